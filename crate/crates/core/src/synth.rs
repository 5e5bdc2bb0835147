//! Term synthesis: identity normalization, the uniform operations `f, g, h`
//! of a class of smooth algebras, and combination terms for thin edges.
//!
//! Every construction is checked afterwards by evaluating the produced
//! term on the relevant tables; nothing is trusted from the construction
//! itself.

use std::collections::BTreeSet;
use std::fmt;

use crate::algebra::{check_similar, quotient, restrict, tuple_index, Elem, FiniteAlgebra, Operation, TupleIter};
use crate::congruence::Congruence;
use crate::edges::{smoothness_of, structure_graph, EdgeLabel, Smoothness};
use crate::error::{Error, Result};
use crate::genclose::{subpower_membership, SubpowerAnswer, SubpowerQuery};
use crate::term::{check_identity, eval, realize_named, realize_table, Identity, IdentityCheck, Term};
use crate::thin::{synth_sls, DistinguishedOps, ThinEdge, ThinKind};
use crate::Limits;

/// A thick edge of a member of the class together with its quotient
/// `Sg{a, b}/theta`.
#[derive(Debug, Clone)]
pub struct ThickEdge {
    /// Index of the algebra in the class.
    pub algebra: usize,
    pub a: Elem,
    pub b: Elem,
    pub label: EdgeLabel,
    pub subalgebra: Vec<Elem>,
    /// Congruence of the subalgebra, indexed by position in `subalgebra`.
    pub theta: Congruence,
    pub quotient: FiniteAlgebra,
    pub qa: Elem,
    pub qb: Elem,
    /// The witness found by edge classification; `None` for unary edges.
    pub witness: Option<Term>,
}

impl ThickEdge {
    /// The elements of the quotient on which the edge's conditions are
    /// stated: the two blocks, or the whole quotient for affine edges.
    pub fn support(&self) -> Vec<Elem> {
        match self.label {
            EdgeLabel::Affine | EdgeLabel::Unary => (0..self.quotient.size()).collect(),
            _ => vec![self.qa, self.qb],
        }
    }

    pub fn describe(&self, class: &[FiniteAlgebra]) -> String {
        let alg = &class[self.algebra];
        let theta = self.theta.display_with(|i| alg.label(self.subalgebra[i]));
        format!("{} {} edge {},{} theta={}", alg.name(), self.label, alg.label(self.a), alg.label(self.b), theta)
    }
}

/// All thick edges of a class, grouped by type.
#[derive(Debug, Clone)]
pub struct EdgeInventory {
    pub class: Vec<FiniteAlgebra>,
    pub semilattice: Vec<ThickEdge>,
    pub majority: Vec<ThickEdge>,
    pub affine: Vec<ThickEdge>,
    pub unary: Vec<ThickEdge>,
}

impl EdgeInventory {
    pub fn all_edges(&self) -> impl Iterator<Item = &ThickEdge> {
        self.semilattice.iter().chain(&self.majority).chain(&self.affine).chain(&self.unary)
    }

    pub fn describe(&self, e: &ThickEdge) -> String {
        e.describe(&self.class)
    }
}

/// Classifies every pair of every member. Affine edges are listed once per
/// quotient since their conditions concern the whole quotient.
pub fn build_edge_inventory(class: &[FiniteAlgebra], limits: &Limits) -> Result<EdgeInventory> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    check_similar(class)?;
    let mut inv = EdgeInventory {
        class: class.to_vec(),
        semilattice: Vec::new(),
        majority: Vec::new(),
        affine: Vec::new(),
        unary: Vec::new(),
    };
    for (i, alg) in class.iter().enumerate() {
        limits.check_size(alg.size())?;
        let graph = structure_graph(alg, limits)?;
        if !graph.unknown_pairs().is_empty() {
            return Err(Error::CapExceeded { cap: limits.node_cap });
        }
        if let Smoothness::Counterexample { a, b, .. } = smoothness_of(alg, &graph) {
            return Err(Error::NotSmooth { algebra: alg.name().to_string(), a, b });
        }
        let mut seen = BTreeSet::new();
        for r in &graph.reports {
            let (sub, emb) = restrict(alg, &r.subalgebra)?;
            let local = |x: Elem| emb.iter().position(|&e| e == x).unwrap();
            for w in &r.witnesses {
                let mut pair = [w.a_block.clone(), w.b_block.clone()];
                pair.sort();
                let key = match w.label {
                    EdgeLabel::Affine | EdgeLabel::Unary => (w.label, r.subalgebra.clone(), w.theta.leaders(), None),
                    _ => (w.label, r.subalgebra.clone(), w.theta.leaders(), Some(pair)),
                };
                if !seen.insert(key) {
                    continue;
                }
                let (d, map) = quotient(&sub, &w.theta)?;
                let edge = ThickEdge {
                    algebra: i,
                    a: r.a,
                    b: r.b,
                    label: w.label,
                    subalgebra: r.subalgebra.clone(),
                    theta: w.theta.clone(),
                    qa: map[local(r.a)],
                    qb: map[local(r.b)],
                    quotient: d,
                    witness: w.witness.clone(),
                };
                if let Some(t) = &edge.witness {
                    let table = realize_table(t, &edge.quotient)?;
                    let ok = match edge.label {
                        EdgeLabel::Semilattice => semilattice_violation(&table, &edge.support()).is_none(),
                        EdgeLabel::Majority => majority_violation(&table, &edge.support()).is_none(),
                        EdgeLabel::Affine => maltsev_violation(&table, &edge.support()).is_none(),
                        EdgeLabel::Unary => true,
                    };
                    if !ok {
                        return Err(Error::VerificationFailed {
                            condition: format!("{} witness", edge.label),
                            edge: edge.describe(class),
                            tuple: Vec::new(),
                        });
                    }
                }
                match edge.label {
                    EdgeLabel::Semilattice => inv.semilattice.push(edge),
                    EdgeLabel::Majority => inv.majority.push(edge),
                    EdgeLabel::Affine => inv.affine.push(edge),
                    EdgeLabel::Unary => inv.unary.push(edge),
                }
            }
        }
    }
    Ok(inv)
}

fn tuples(s: &[Elem], k: usize) -> impl Iterator<Item = Vec<Elem>> + '_ {
    TupleIter::new(s.len(), k).map(move |t| t.iter().map(|&i| s[i]).collect())
}

pub(crate) fn at(op: &Operation, args: &[Elem]) -> Elem {
    op.table()[tuple_index(op.size(), args)]
}

/// First tuple over `s` where `op` differs from `expected`.
fn violation(op: &Operation, s: &[Elem], expected: impl Fn(&[Elem]) -> Elem) -> Option<Vec<Elem>> {
    tuples(s, op.arity()).find(|t| at(op, t) != expected(t))
}

pub(crate) fn semilattice_violation(op: &Operation, s: &[Elem]) -> Option<Vec<Elem>> {
    for t in tuples(s, 2) {
        let v = at(op, &t);
        if v != at(op, &[t[1], t[0]]) || !s.contains(&v) {
            return Some(t);
        }
    }
    None
}

pub(crate) fn majority_violation(op: &Operation, s: &[Elem]) -> Option<Vec<Elem>> {
    violation(op, s, |t| if t[1] == t[2] { t[1] } else { t[0] })
}

pub(crate) fn maltsev_violation(op: &Operation, s: &[Elem]) -> Option<Vec<Elem>> {
    for x in s {
        for y in s {
            if at(op, &[*x, *x, *y]) != *y {
                return Some(vec![*x, *x, *y]);
            }
            if at(op, &[*y, *x, *x]) != *y {
                return Some(vec![*y, *x, *x]);
            }
        }
    }
    None
}

pub(crate) fn projection_violation(op: &Operation, s: &[Elem], i: usize) -> Option<Vec<Elem>> {
    violation(op, s, |t| t[i])
}

fn is_some_projection(op: &Operation, s: &[Elem]) -> bool {
    (0..op.arity()).any(|i| projection_violation(op, s, i).is_none())
}

/// Smallest `n >= 1` such that `map^n` is idempotent for every map given.
pub fn idempotent_exponent<I, M>(maps: I) -> u64
where
    I: IntoIterator<Item = M>,
    M: AsRef<[Elem]>,
{
    let mut index = 1u64;
    let mut period = 1u64;
    for map in maps {
        let map = map.as_ref();
        let mut seen = vec![usize::MAX; map.len()];
        for start in 0..map.len() {
            let mut x = start;
            let mut step = 0;
            let mut trail = Vec::new();
            while seen[x] != start {
                seen[x] = start;
                trail.push(x);
                x = map[x];
                step += 1;
            }
            if let Some(pos) = trail.iter().position(|&t| t == x) {
                index = index.max(pos as u64);
                period = lcm(period, (step - pos) as u64);
            }
        }
    }
    index.div_ceil(period).max(1) * period
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// The identities `normalize_identities` can enforce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Normalization {
    /// `f(x, f(x, y)) = f(x, y)`
    BinaryAbsorb,
    /// `f(f(x, y), f(y, x)) = f(x, y)`
    BinarySwap,
    /// `m(x, m(x, y, y), m(x, y, y)) = m(x, y, y)`
    TernaryAbsorb,
    /// `m(m(x, y, z), m(y, z, x), m(z, x, y)) = m(x, y, z)`
    TernaryCycle,
    /// `h(h(x, y, y), y, y) = h(x, y, y)`
    TernaryLeft,
}

impl Normalization {
    pub const ALL: [Normalization; 5] = [
        Normalization::BinaryAbsorb,
        Normalization::BinarySwap,
        Normalization::TernaryAbsorb,
        Normalization::TernaryCycle,
        Normalization::TernaryLeft,
    ];

    pub fn arity(self) -> usize {
        match self {
            Normalization::BinaryAbsorb | Normalization::BinarySwap => 2,
            _ => 3,
        }
    }

    /// The identity for the term `t`.
    pub fn identity(self, t: &Term) -> Identity {
        let v = Term::vars(self.arity());
        match self {
            Normalization::BinaryAbsorb => {
                Identity::new(t.call(&[v[0].clone(), t.clone()]), t.clone())
            }
            Normalization::BinarySwap => {
                Identity::new(t.call(&[t.clone(), t.permute(&[1, 0])]), t.clone())
            }
            Normalization::TernaryAbsorb => {
                let xyy = t.permute(&[0, 1, 1]);
                Identity::new(t.call(&[v[0].clone(), xyy.clone(), xyy.clone()]), xyy)
            }
            Normalization::TernaryCycle => Identity::new(
                t.call(&[t.clone(), t.permute(&[1, 2, 0]), t.permute(&[2, 0, 1])]),
                t.clone(),
            ),
            Normalization::TernaryLeft => {
                let xyy = t.permute(&[0, 1, 1]);
                Identity::new(t.call(&[xyy.clone(), v[1].clone(), v[1].clone()]), xyy)
            }
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = Term::apply(if self.arity() == 2 { "f" } else { "m" }, Term::vars(self.arity()));
        write!(f, "{}", self.identity(&sym))
    }
}

fn holds_everywhere(class: &[FiniteAlgebra], id: &Identity) -> Result<Option<(usize, Vec<Elem>)>> {
    for (i, alg) in class.iter().enumerate() {
        if let IdentityCheck::Counterexample(t) = check_identity(alg, id)? {
            return Ok(Some((i, t)));
        }
    }
    Ok(None)
}

/// Rewrites `op` so that it satisfies the chosen identity on every member
/// of `class`, by iterating it the idempotent exponent of the relevant
/// transformations. Returns `op` itself when the identity already holds.
pub fn normalize_identities(class: &[FiniteAlgebra], op: &Term, which: Normalization) -> Result<Term> {
    if op.arity() != which.arity() {
        return Err(Error::ArityMismatch { symbol: op.to_string(), expected: which.arity(), found: op.arity() });
    }
    if holds_everywhere(class, &which.identity(op))?.is_none() {
        return Ok(op.clone());
    }
    let tables = class.iter().map(|a| realize_table(op, a)).collect::<Result<Vec<_>>>()?;
    let v = Term::vars(which.arity());
    let out = match which {
        Normalization::BinaryAbsorb => {
            // y -> f(x, y) for fixed x
            let maps = class.iter().zip(&tables).flat_map(|(a, t)| {
                let n = a.size();
                (0..n).map(move |x| (0..n).map(|u| at(t, &[x, u])).collect::<Vec<_>>())
            });
            let n = idempotent_exponent(maps);
            let step = op.call(&[Term::proj(3, 0), Term::proj(3, 2)]);
            Term::iterate(step, v[1].clone(), n)
        }
        Normalization::TernaryAbsorb => {
            // u -> m(x, u, u) for fixed x
            let maps = class.iter().zip(&tables).flat_map(|(a, t)| {
                let n = a.size();
                (0..n).map(move |x| (0..n).map(|u| at(t, &[x, u, u])).collect::<Vec<_>>())
            });
            let n = idempotent_exponent(maps);
            let step = op.call(&[Term::proj(4, 0), Term::proj(4, 3), Term::proj(4, 3)]);
            Term::iterate(step, op.clone(), n - 1)
        }
        Normalization::TernaryLeft => {
            // u -> h(u, y, y) for fixed y
            let maps = class.iter().zip(&tables).flat_map(|(a, t)| {
                let n = a.size();
                (0..n).map(move |y| (0..n).map(|u| at(t, &[u, y, y])).collect::<Vec<_>>())
            });
            let n = idempotent_exponent(maps);
            let step = op.call(&[Term::proj(4, 3), Term::proj(4, 1), Term::proj(4, 1)]);
            let inner = Term::iterate(step, v[0].clone(), n - 1);
            op.call(&[inner, v[1].clone(), v[2].clone()])
        }
        Normalization::BinarySwap => {
            // (x, y) -> (f(x, y), f(y, x)) on pairs
            let maps = class.iter().zip(&tables).map(|(a, t)| {
                let n = a.size();
                TupleIter::new(n, 2).map(|p| at(t, &[p[0], p[1]]) * n + at(t, &[p[1], p[0]])).collect::<Vec<_>>()
            });
            let n = idempotent_exponent(maps);
            let (mut u, mut w) = (v[0].clone(), v[1].clone());
            for _ in 0..n {
                let nu = op.call(&[u.clone(), w.clone()]);
                let nw = op.call(&[w, u]);
                u = nu;
                w = nw;
            }
            u
        }
        Normalization::TernaryCycle => {
            // (x, y, z) -> (m(x,y,z), m(y,z,x), m(z,x,y)) on triples
            let maps = class.iter().zip(&tables).map(|(a, t)| {
                let n = a.size();
                TupleIter::new(n, 3)
                    .map(|p| {
                        let (x, y, z) = (p[0], p[1], p[2]);
                        (at(t, &[x, y, z]) * n + at(t, &[y, z, x])) * n + at(t, &[z, x, y])
                    })
                    .collect::<Vec<_>>()
            });
            let n = idempotent_exponent(maps);
            let mut c = v.clone();
            for _ in 0..n {
                c = vec![
                    op.call(&[c[0].clone(), c[1].clone(), c[2].clone()]),
                    op.call(&[c[1].clone(), c[2].clone(), c[0].clone()]),
                    op.call(&[c[2].clone(), c[0].clone(), c[1].clone()]),
                ];
            }
            c[0].clone()
        }
    };
    if let Some((i, t)) = holds_everywhere(class, &which.identity(&out))? {
        return Err(Error::PostconditionFailed(format!(
            "{which} fails on {} at {t:?} after normalization",
            class[i].name()
        )));
    }
    Ok(out)
}

/// What [`module_projection_fix`] should repair.
#[derive(Debug, Clone, Copy)]
pub enum FixTarget<'a> {
    /// A binary operation that is a semilattice operation or a projection
    /// on the edges it is meant for.
    Binary(&'a Term),
    /// A ternary `m` that is a majority operation on `edge`; `h` is a
    /// Mal'tsev operation on every module quotient.
    Ternary { m: &'a Term, h: &'a Term, edge: &'a ThickEdge },
}

fn xy() -> (Term, Term) {
    (Term::proj(2, 0), Term::proj(2, 1))
}

fn xyz() -> (Term, Term, Term) {
    (Term::proj(3, 0), Term::proj(3, 1), Term::proj(3, 2))
}

/// The role of each variable of a ternary operation on a 2-element set:
/// `true` when `h(x,y,y)`, `h(y,x,y)`, `h(y,y,x)` respectively returns
/// the repeated value.
fn two_element_pattern(op: &Operation, u: Elem, v: Elem) -> Option<[bool; 3]> {
    let mut pat = [false; 3];
    for (i, slot) in pat.iter_mut().enumerate() {
        let mut vals = Vec::new();
        for (odd, rep) in [(u, v), (v, u)] {
            let mut t = [rep; 3];
            t[i] = odd;
            let r = at(op, &t);
            if r == rep {
                vals.push(true);
            } else if r == odd {
                vals.push(false);
            } else {
                return None;
            }
        }
        if vals[0] != vals[1] {
            return None;
        }
        *slot = vals[0];
    }
    Some(pat)
}

/// A binary term that is the first projection on the blocks of `edge` and
/// the second projection on every quotient where `h` is Mal'tsev. `m` is
/// a majority operation on `edge`, used only when `h` is the minority
/// there.
pub fn projection_separator(class: &[FiniteAlgebra], m: &Term, h: &Term, edge: &ThickEdge) -> Result<Term> {
    let table = realize_table(h, &edge.quotient)?;
    let pat = two_element_pattern(&table, edge.qa, edge.qb).ok_or_else(|| {
        Error::CaseNotRecognized(format!("{} is not a Boolean operation on {}", h, edge.describe(class)))
    })?;
    let (x, y) = xy();
    let h2 = |a: &Term, b: &Term, c: &Term| h.call(&[a.clone(), b.clone(), c.clone()]);
    let p = match pat {
        // h(y,y,x) = y: projection, majority, or 2/3-minority
        [_, _, true] => h2(&x, &x, &y),
        // h(x,y,y) = y
        [true, _, _] => h2(&y, &x, &x),
        // h(x,y,x) = x
        [false, true, false] => h2(&x, &h2(&x, &y, &x), &x),
        // minority
        [false, false, false] => {
            let m2 = |a: &Term, b: &Term, c: &Term| m.call(&[a.clone(), b.clone(), c.clone()]);
            let s1 = h2(&m2(&x, &y, &y), &y, &m2(&y, &y, &x));
            let s2 = m2(&x, &y, &x);
            h2(&s1, &s2, &y)
        }
    };
    Ok(p)
}

/// Makes the operation the first projection on every module quotient in
/// `modules` while keeping it unchanged on the edges it serves.
pub fn module_projection_fix(class: &[FiniteAlgebra], modules: &[ThickEdge], which: FixTarget<'_>) -> Result<Term> {
    let (out, keep): (Term, Vec<(&ThickEdge, Term)>) = match which {
        FixTarget::Binary(f) => {
            let on_modules = modules
                .iter()
                .map(|e| Ok(projection_violation(&realize_table(f, &e.quotient)?, &e.support(), 0).is_none()))
                .collect::<Result<Vec<bool>>>()?;
            if on_modules.iter().all(|&b| b) {
                return Ok(f.clone());
            }
            // u -> f(u, y) for fixed y
            let tables = class.iter().map(|a| realize_table(f, a)).collect::<Result<Vec<_>>>()?;
            let maps = class.iter().zip(&tables).flat_map(|(a, t)| {
                let n = a.size();
                (0..n).map(move |y| (0..n).map(|u| at(t, &[u, y])).collect::<Vec<_>>())
            });
            let n = idempotent_exponent(maps);
            let (x, _) = xy();
            let step = f.call(&[Term::proj(3, 2), Term::proj(3, 1)]);
            let f1 = Term::iterate(step, x.clone(), n);
            (f1.call(&[f1.clone(), x]), Vec::new())
        }
        FixTarget::Ternary { m, h, edge } => {
            let p = projection_separator(class, m, h, edge)?;
            let (x, _, _) = xyz();
            (p.call(&[m.clone(), x]), vec![(edge, m.clone())])
        }
    };
    for e in modules {
        let t = realize_table(&out, &e.quotient)?;
        if let Some(tuple) = projection_violation(&t, &e.support(), 0) {
            return Err(Error::VerificationFailed {
                condition: "first projection after module fix".into(),
                edge: e.describe(class),
                tuple,
            });
        }
    }
    for (e, orig) in keep {
        let t = realize_table(&out, &e.quotient)?;
        let o = realize_table(&orig, &e.quotient)?;
        if let Some(tuple) = violation(&t, &e.support(), |args| at(&o, args)) {
            return Err(Error::VerificationFailed {
                condition: "unchanged on the edge after module fix".into(),
                edge: e.describe(class),
                tuple,
            });
        }
    }
    Ok(out)
}

/// One condition checked on one edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub condition: String,
    pub edge: String,
    /// `None` when the condition holds.
    pub counterexample: Option<Vec<Elem>>,
}

impl Check {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// A synthesized term, its tables on the members of the class, and the
/// conditions verified for it.
#[derive(Debug, Clone)]
pub struct SynthesizedOp {
    pub name: String,
    pub term: Term,
    pub tables: Vec<Operation>,
    pub checks: Vec<Check>,
}

impl SynthesizedOp {
    fn new(name: &str, term: Term, class: &[FiniteAlgebra]) -> Result<Self> {
        let tables = class.iter().map(|a| realize_named(&term, a, name)).collect::<Result<Vec<_>>>()?;
        Ok(SynthesizedOp { name: name.to_string(), term, tables, checks: Vec::new() })
    }

    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(Check::holds)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.holds())
    }
}

fn first_projection_term(k: usize) -> Term {
    Term::proj(k, 0)
}

/// `f(x, f(y, z))` for a binary `f`.
fn left_nest(f: &Term) -> Term {
    let (x, y, z) = xyz();
    f.call(&[x, f.call(&[y, z])])
}

/// `t(f(x,f(y,z)), f(y,f(z,x)), f(z,f(x,y)))`.
fn cyclic_feed(t: &Term, f: &Term) -> Term {
    let n = left_nest(f);
    t.call(&[n.clone(), n.permute(&[1, 2, 0]), n.permute(&[2, 0, 1])])
}

const PERMS3: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn table_on(t: &Term, e: &ThickEdge) -> Result<Operation> {
    realize_table(t, &e.quotient)
}

fn is_first_projection_on(t: &Term, e: &ThickEdge) -> Result<bool> {
    Ok(projection_violation(&table_on(t, e)?, &e.support(), 0).is_none())
}

/// Operations `f, g, h` for the class of the inventory.
///
/// On each thick semilattice edge `f` is the semilattice operation and
/// `g`, `h` act as `f(x, f(y, z))`; on majority edges `f`, `h` are first
/// projections and `g` is the majority; on affine quotients `f`, `g` are
/// first projections and `h` is Mal'tsev. `f` additionally satisfies the
/// SLS condition.
pub fn uniform_ops(inv: &EdgeInventory) -> Result<DistinguishedOps> {
    let class = &inv.class;
    let (x2, y2) = xy();
    let (x, y, z) = xyz();

    // f: fold the semilattice witnesses
    let mut f = first_projection_term(2);
    for (i, e) in inv.semilattice.iter().enumerate() {
        let w = e.witness.clone().expect("semilattice edges carry witnesses");
        f = if i == 0 { w } else { w.call(&[f.clone(), f.permute(&[1, 0])]) };
    }
    let needs_fix = inv
        .majority
        .iter()
        .chain(&inv.affine)
        .map(|e| is_first_projection_on(&f, e).map(|ok| !ok))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .any(|b| b);
    if needs_fix {
        let all: Vec<ThickEdge> = inv.majority.iter().chain(&inv.affine).cloned().collect();
        f = module_projection_fix(class, &all, FixTarget::Binary(&f))?;
    }
    f = normalize_identities(class, &f, Normalization::BinaryAbsorb)?;
    let sls = synth_sls(inv, &f)?;
    f = sls.term.clone();

    // h over the affine quotients
    let mut hl = first_projection_term(3);
    for (i, e) in inv.affine.iter().enumerate() {
        let hi = e.witness.clone().expect("affine edges carry witnesses");
        if i == 0 {
            hl = hi;
            continue;
        }
        if maltsev_violation(&table_on(&hl, e)?, &e.support()).is_none() {
            continue;
        }
        let prev = hl.clone();
        let w = hi.call(&[z.clone(), y.clone(), x.clone()]);
        let h1 = prev.call(&[x.clone(), w.clone(), w.clone()]);
        let h3 = prev.call(&[w.clone(), w.clone(), x.clone()]);
        let h2 = h1.call(&[prev.clone(), z.clone(), x.clone()]);
        hl = h1.call(&[h2.call(&[h3, y.clone(), z.clone()]), y.clone(), z.clone()]);
    }

    // g over the majority edges
    let mut gk: Option<Term> = None;
    for e in &inv.majority {
        let mut gi = e.witness.clone().expect("majority edges carry witnesses");
        if !inv.affine.is_empty() {
            gi = module_projection_fix(class, &inv.affine, FixTarget::Ternary { m: &gi, h: &hl, edge: e })?;
        }
        let prev = match gk.take() {
            None => {
                gk = Some(gi);
                continue;
            }
            Some(p) => p,
        };
        if majority_violation(&table_on(&prev, e)?, &e.support()).is_none() {
            gk = Some(prev);
            continue;
        }
        let mut next = None;
        for perm in PERMS3 {
            let gp = prev.permute(&perm);
            let p = gp.call(&[x2.clone(), y2.clone(), y2.clone()]);
            if projection_violation(&table_on(&p, e)?, &e.support(), 0).is_none() {
                next = Some(p.call(&[gi.clone(), prev.clone()]));
                break;
            }
        }
        gk = Some(next.ok_or_else(|| {
            Error::CaseNotRecognized(format!("no variable order separates {}", e.describe(class)))
        })?);
    }
    let mut gk = gk.unwrap_or_else(|| first_projection_term(3));
    if !inv.affine.is_empty() && !inv.majority.is_empty() {
        let mut chosen = None;
        for perm in PERMS3 {
            let cand = gk.permute(&perm);
            let ok = inv
                .affine
                .iter()
                .map(|e| is_first_projection_on(&cand, e))
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .all(|b| b);
            if ok {
                chosen = Some(cand);
                break;
            }
        }
        gk = chosen.ok_or_else(|| {
            Error::CaseNotRecognized("the majority term is not a projection on the module quotients".into())
        })?;
    }
    let g = cyclic_feed(&gk, &f);
    let g = normalize_identities(class, &g, Normalization::TernaryAbsorb)?;

    // final h
    let p = g.call(&[x2.clone(), y2.clone(), y2.clone()]);
    let hbar = p.call(&[hl, x.clone()]);
    let h = cyclic_feed(&hbar, &f);
    let h = normalize_identities(class, &h, Normalization::TernaryLeft)?;

    let ops = DistinguishedOps {
        f: SynthesizedOp::new("f", f, class)?,
        g: SynthesizedOp::new("g", g, class)?,
        h: SynthesizedOp::new("h", h, class)?,
        sls_steps: sls.steps,
    };
    let ops = verify_uniform(inv, ops)?;
    if let Some(c) = [&ops.f, &ops.g, &ops.h].iter().find_map(|o| o.first_failure()) {
        return Err(Error::VerificationFailed {
            condition: c.condition.clone(),
            edge: c.edge.clone(),
            tuple: c.counterexample.clone().unwrap_or_default(),
        });
    }
    Ok(ops)
}

/// Builds the inventory and runs [`uniform_ops`].
pub fn uniform_ops_for(class: &[FiniteAlgebra], limits: &Limits) -> Result<DistinguishedOps> {
    uniform_ops(&build_edge_inventory(class, limits)?)
}

/// Recomputes every condition of `f, g, h` on every edge of the inventory
/// and stores the outcome in the checks of each operation.
pub fn verify_uniform(inv: &EdgeInventory, mut ops: DistinguishedOps) -> Result<DistinguishedOps> {
    let class = &inv.class;
    let mut fc = Vec::new();
    let mut gc = Vec::new();
    let mut hc = Vec::new();
    let nest = left_nest(&ops.f.term);
    for e in inv.all_edges() {
        let s = e.support();
        let name = inv.describe(e);
        let ft = table_on(&ops.f.term, e)?;
        let gt = table_on(&ops.g.term, e)?;
        let ht = table_on(&ops.h.term, e)?;
        let check = |condition: &str, counterexample| Check { condition: condition.into(), edge: name.clone(), counterexample };
        match e.label {
            EdgeLabel::Semilattice => {
                let nt = table_on(&nest, e)?;
                fc.push(check("f semilattice", semilattice_violation(&ft, &s)));
                gc.push(check("g = f(x,f(y,z))", violation(&gt, &s, |t| at(&nt, t))));
                hc.push(check("h = f(x,f(y,z))", violation(&ht, &s, |t| at(&nt, t))));
            }
            EdgeLabel::Majority => {
                fc.push(check("f first projection", projection_violation(&ft, &s, 0)));
                gc.push(check("g majority", majority_violation(&gt, &s)));
                hc.push(check("h first projection", projection_violation(&ht, &s, 0)));
            }
            EdgeLabel::Affine => {
                fc.push(check("f first projection", projection_violation(&ft, &s, 0)));
                gc.push(check("g first projection", projection_violation(&gt, &s, 0)));
                hc.push(check("h Mal'tsev", maltsev_violation(&ht, &s)));
            }
            EdgeLabel::Unary => {
                for (c, t, out) in [("f projection", &ft, &mut fc), ("g projection", &gt, &mut gc), ("h projection", &ht, &mut hc)] {
                    let cx = if is_some_projection(t, &s) { None } else { Some(Vec::new()) };
                    out.push(check(c, cx));
                }
            }
        }
    }
    for (which, out, term) in [
        (Normalization::BinaryAbsorb, &mut fc, &ops.f.term),
        (Normalization::TernaryAbsorb, &mut gc, &ops.g.term),
        (Normalization::TernaryLeft, &mut hc, &ops.h.term),
    ] {
        for alg in class {
            let cx = match check_identity(alg, &which.identity(term))? {
                IdentityCheck::Holds => None,
                IdentityCheck::Counterexample(t) => Some(t),
            };
            out.push(Check { condition: which.to_string(), edge: alg.name().to_string(), counterexample: cx });
        }
    }
    for (i, alg) in class.iter().enumerate() {
        let f = &ops.f.tables[i];
        let cx = TupleIter::new(alg.size(), 2).find(|t| {
            let c = at(f, t);
            c != t[0] && !(at(f, &[t[0], c]) == c && at(f, &[c, t[0]]) == c)
        });
        fc.push(Check { condition: "SLS".into(), edge: alg.name().to_string(), counterexample: cx });
    }
    ops.f.checks = fc;
    ops.g.checks = gc;
    ops.h.checks = hc;
    Ok(ops)
}

/// A binary term `t` with `t(a, c) = b` in `alg`.
fn binary_witness(alg: &FiniteAlgebra, a: Elem, c: Elem, b: Elem, cap: usize) -> Result<Term> {
    let q = SubpowerQuery { algebra: alg, generators: vec![vec![a], vec![c]], target: vec![b], cap };
    match subpower_membership(&q) {
        SubpowerAnswer::Found { witness, .. } => Ok(witness),
        _ => Err(Error::WitnessNotFound(format!(
            "{} is not in Sg{{{}, {}}} of {}",
            alg.label(b),
            alg.label(a),
            alg.label(c),
            alg.name()
        ))),
    }
}

fn value(t: &Term, alg: &FiniteAlgebra, args: &[Elem]) -> Result<Elem> {
    eval(t, alg, args)
}

fn expect_value(
    class: &[FiniteAlgebra],
    t: &Term,
    e: &ThinEdge,
    args: &[Elem],
    want: Elem,
    what: &str,
) -> Result<()> {
    let alg = &class[e.algebra];
    if value(t, alg, args)? != want {
        return Err(Error::VerificationFailed {
            condition: what.to_string(),
            edge: e.describe(class),
            tuple: args.to_vec(),
        });
    }
    Ok(())
}

fn require_kind(e: &ThinEdge, kind: ThinKind, what: &str) -> Result<()> {
    if e.kind != kind {
        return Err(Error::PreconditionViolated(format!("{what} needs {kind:?} edges, got {:?}", e.kind)));
    }
    Ok(())
}

fn check_majority_condition(inv: &EdgeInventory, g: &Term) -> Result<()> {
    for e in &inv.majority {
        if let Some(tuple) = majority_violation(&table_on(g, e)?, &e.support()) {
            return Err(Error::VerificationFailed { condition: "majority condition".into(), edge: inv.describe(e), tuple });
        }
    }
    Ok(())
}

/// A ternary `g'` that is still a majority on every thick majority edge
/// and satisfies `g'(a1,b1,b1) = b1`, `g'(b2,a2,b2) = b2`,
/// `g'(b3,b3,a3) = b3` for three special thin majority edges.
pub fn majority_triple(
    inv: &EdgeInventory,
    ops: &DistinguishedOps,
    edges: [&ThinEdge; 3],
    limits: &Limits,
) -> Result<Term> {
    let class = &inv.class;
    for e in edges {
        require_kind(e, ThinKind::SpecialThinMajority, "majority_triple")?;
    }
    let (x, y, z) = xyz();
    let [e1, e2, e3] = edges;
    let (a1, b1) = (e1.a, e1.b);
    let (a2, b2) = (e2.a, e2.b);
    let (a3, b3) = (e3.a, e3.b);
    let g = ops.g.term.clone();

    let c1 = value(&g, &class[e1.algebra], &[a1, b1, b1])?;
    let t = binary_witness(&class[e1.algebra], a1, c1, b1, limits.node_cap)?;
    let g1 = g.call(&[t.call(&[x.clone(), g.clone()]), y.clone(), z.clone()]);

    let c2 = value(&g1, &class[e2.algebra], &[b2, a2, b2])?;
    let s = binary_witness(&class[e2.algebra], a2, c2, b2, limits.node_cap)?;
    let g2 = g1.call(&[x.clone(), s.call(&[y.clone(), g1.clone()]), z.clone()]);

    let c3 = value(&g2, &class[e3.algebra], &[b3, b3, a3])?;
    let q = binary_witness(&class[e3.algebra], a3, c3, b3, limits.node_cap)?;
    let g3 = g2.call(&[x, y, q.call(&[z, g2.clone()])]);

    expect_value(class, &g3, e1, &[a1, b1, b1], b1, "g(a,b,b) = b")?;
    expect_value(class, &g3, e2, &[b2, a2, b2], b2, "g(b,a,b) = b")?;
    expect_value(class, &g3, e3, &[b3, b3, a3], b3, "g(b,b,a) = b")?;
    check_majority_condition(inv, &g3)?;
    Ok(g3)
}

/// A ternary `h'` with `h'(b,a,a) = b` on the thin affine edge `ab` and
/// `h'(c,c,d) = d` on the thin affine edge `cd`.
pub fn affine_pair(
    inv: &EdgeInventory,
    ops: &DistinguishedOps,
    e1: &ThinEdge,
    e2: &ThinEdge,
    limits: &Limits,
) -> Result<Term> {
    let class = &inv.class;
    require_kind(e1, ThinKind::ThinAffine, "affine_pair")?;
    require_kind(e2, ThinKind::ThinAffine, "affine_pair")?;
    let (x, _, _) = xyz();
    let h = ops.h.term.clone();
    let (c, d) = (e2.a, e2.b);
    let d1 = value(&h, &class[e2.algebra], &[c, c, d])?;
    let r = binary_witness(&class[e2.algebra], c, d1, d, limits.node_cap)?;
    let out = r.call(&[x, h]);
    expect_value(class, &out, e1, &[e1.b, e1.a, e1.a], e1.b, "h'(b,a,a) = b")?;
    expect_value(class, &out, e2, &[c, c, d], d, "h'(c,c,d) = d")?;
    Ok(out)
}

/// A binary `p` with `p(b,a) = b` and `p(c,d) = d` for thin edges `ab`,
/// `cd` of different kinds.
pub fn mixed_pair(
    inv: &EdgeInventory,
    ops: &DistinguishedOps,
    e1: &ThinEdge,
    e2: &ThinEdge,
    limits: &Limits,
) -> Result<Term> {
    use ThinKind::*;
    let class = &inv.class;
    let (x2, y2) = xy();
    let (a, b) = (e1.a, e1.b);
    let (c, d) = (e2.a, e2.b);
    let (g, h) = (&ops.g.term, &ops.h.term);
    let p = match (e1.kind, e2.kind) {
        (k1, k2) if k1 == k2 => {
            return Err(Error::UnsupportedCombination(format!("both edges are {k1:?}")));
        }
        (SpecialThinMajority, ThinSemilattice) => {
            let b1 = value(g, &class[e1.algebra], &[a, b, b])?;
            let r = binary_witness(&class[e1.algebra], a, b1, b, limits.node_cap)?;
            r.call(&[y2.clone(), g.call(&[y2.clone(), x2.clone(), x2.clone()])])
        }
        (ThinAffine, ThinSemilattice) => h.call(&[x2.clone(), y2.clone(), y2.clone()]),
        (ThinAffine, SpecialThinMajority) => {
            let (x, y, z) = xyz();
            let b1 = value(h, &class[e1.algebra], &[a, a, b])?;
            let r = binary_witness(&class[e1.algebra], a, b1, b, limits.node_cap)?;
            let g1 = g.call(&[
                r.call(&[x.clone(), h.clone()]),
                r.call(&[y.clone(), h.permute(&[1, 0, 2])]),
                z,
            ]);
            let d1 = value(&g1, &class[e2.algebra], &[d, d, c])?;
            let s = binary_witness(&class[e2.algebra], c, d1, d, limits.node_cap)?;
            s.call(&[x2.clone(), g1.call(&[y2.clone(), y2.clone(), x2.clone()])])
        }
        _ => {
            let q = mixed_pair(inv, ops, e2, e1, limits)?;
            q.permute(&[1, 0])
        }
    };
    expect_value(class, &p, e1, &[b, a], b, "p(b,a) = b")?;
    expect_value(class, &p, e2, &[c, d], d, "p(c,d) = d")?;
    Ok(p)
}

/// The two stable operations of a thin edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StableKind {
    /// `t_ab(a,b) = b`, `t_ab(c,d)` congruent to `c` on affine edges.
    Tab,
    /// `h_ab(a,a,b) = b`, `h_ab(d,c,c)` congruent to `d` on affine edges,
    /// and `x -> h_ab(x,c',d')` a permutation of each affine quotient.
    Hab,
}

pub fn affine_stable_ops(
    inv: &EdgeInventory,
    ops: &DistinguishedOps,
    edge: &ThinEdge,
    kind: StableKind,
    limits: &Limits,
) -> Result<Term> {
    let class = &inv.class;
    let alg = &class[edge.algebra];
    let (a, b) = (edge.a, edge.b);
    match kind {
        StableKind::Tab => {
            require_kind(edge, ThinKind::SpecialThinMajority, "t_ab")?;
            let (x, y) = xy();
            let g = &ops.g.term;
            let b1 = value(g, alg, &[a, b, b])?;
            let r = binary_witness(alg, a, b1, b, limits.node_cap)?;
            let t = r.call(&[x.clone(), g.call(&[x, y.clone(), y])]);
            expect_value(class, &t, edge, &[a, b], b, "t_ab(a,b) = b")?;
            for e in &inv.affine {
                if let Some(tuple) = projection_violation(&table_on(&t, e)?, &e.support(), 0) {
                    return Err(Error::VerificationFailed { condition: "t_ab(c,d) = c".into(), edge: inv.describe(e), tuple });
                }
            }
            Ok(t)
        }
        StableKind::Hab => {
            require_kind(edge, ThinKind::ThinAffine, "h_ab")?;
            let (x, _, _) = xyz();
            let h = &ops.h.term;
            let b1 = value(h, alg, &[a, a, b])?;
            let s = binary_witness(alg, a, b1, b, limits.node_cap)?;
            let t = s.call(&[x, h.clone()]);
            expect_value(class, &t, edge, &[a, a, b], b, "h_ab(a,a,b) = b")?;
            for e in &inv.affine {
                let tab = table_on(&t, e)?;
                let n = e.quotient.size();
                for c in 0..n {
                    for dd in 0..n {
                        if at(&tab, &[dd, c, c]) != dd {
                            return Err(Error::VerificationFailed {
                                condition: "h_ab(d,c,c) = d".into(),
                                edge: inv.describe(e),
                                tuple: vec![dd, c, c],
                            });
                        }
                    }
                }
                for c1 in 0..n {
                    for d1 in 0..n {
                        let image: BTreeSet<Elem> = (0..n).map(|u| at(&tab, &[u, c1, d1])).collect();
                        if image.len() != n {
                            return Err(Error::VerificationFailed {
                                condition: "h_ab(x,c,d) a permutation".into(),
                                edge: inv.describe(e),
                                tuple: vec![c1, d1],
                            });
                        }
                    }
                }
            }
            Ok(t)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn exponent_of_cycles_and_tails() {
        assert_eq!(idempotent_exponent([vec![0usize, 1, 2]]), 1);
        assert_eq!(idempotent_exponent([vec![1usize, 0]]), 2);
        // 0 -> 1 -> 2 -> 2
        assert_eq!(idempotent_exponent([vec![1usize, 2, 2]]), 2);
        // tail 2 into a 3-cycle
        assert_eq!(idempotent_exponent([vec![1usize, 2, 3, 4, 2]]), 3);
        assert_eq!(idempotent_exponent([vec![1usize, 0], vec![1, 2, 0]]), 6);
    }

    #[test]
    fn binary_absorb_on_no_edge() {
        let ne = fixtures::no_edge();
        let f = Term::parse("f(p0, p1)", 2).unwrap();
        let out = normalize_identities(std::slice::from_ref(&ne), &f, Normalization::BinaryAbsorb).unwrap();
        assert!(check_identity(&ne, &Normalization::BinaryAbsorb.identity(&out)).unwrap().holds());
    }

    #[test]
    fn identities_already_hold() {
        let sl = fixtures::sl2();
        let f = Term::parse("f(p0, p1)", 2).unwrap();
        assert_eq!(normalize_identities(&[sl], &f, Normalization::BinaryAbsorb).unwrap(), f);
        let z = fixtures::z3_affine();
        let h = Term::parse("h(p0, p1, p2)", 3).unwrap();
        assert_eq!(normalize_identities(&[z], &h, Normalization::TernaryLeft).unwrap(), h);
    }

    #[test]
    fn swap_and_cycle_normalize() {
        let z = fixtures::z3_affine();
        // 2x + 2y on Z3 as a binary term
        let f = Term::parse("h(p0, p1, p0)", 2).unwrap();
        let out = normalize_identities(std::slice::from_ref(&z), &f, Normalization::BinarySwap).unwrap();
        assert!(check_identity(&z, &Normalization::BinarySwap.identity(&out)).unwrap().holds());
        let m = Term::parse("h(p1, p0, p2)", 3).unwrap();
        let out = normalize_identities(std::slice::from_ref(&z), &m, Normalization::TernaryCycle).unwrap();
        assert!(check_identity(&z, &Normalization::TernaryCycle.identity(&out)).unwrap().holds());
    }

    #[test]
    fn inventory_of_class_k() {
        let inv = build_edge_inventory(&fixtures::class_k(), &Limits::default()).unwrap();
        assert_eq!((inv.semilattice.len(), inv.majority.len(), inv.affine.len()), (1, 1, 1));
        let ne = build_edge_inventory(&[fixtures::no_edge()], &Limits::default()).unwrap();
        assert_eq!((ne.semilattice.len(), ne.majority.len(), ne.affine.len()), (2, 0, 0));
        let one = build_edge_inventory(&[fixtures::trivial()], &Limits::default()).unwrap();
        assert_eq!(one.all_edges().count(), 0);
    }

    #[test]
    fn uniform_on_class_k() {
        let ops = uniform_ops_for(&fixtures::class_k(), &Limits::default()).unwrap();
        assert!(ops.f.all_hold() && ops.g.all_hold() && ops.h.all_hold());
        // on SL2 f is the meet
        assert_eq!(ops.f.tables[0].table(), &[0, 0, 0, 1]);
    }
}
