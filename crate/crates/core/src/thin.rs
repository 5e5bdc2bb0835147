//! Thin (directed) edges and the SLS binary operation.
//!
//! A thin edge is an ordered pair of elements carrying equation-level
//! evidence, as opposed to a thick edge, which is a pair of congruence
//! blocks. Thin semilattice edges come from a fixed binary operation `f`:
//! `a <= b` when `f(a,b) = f(b,a) = b`. Thin majority and affine edges are
//! derived from thick edges through minimal pairs.

use std::collections::BTreeSet;
use std::fmt;

use crate::algebra::{Elem, FiniteAlgebra, TupleIter};
use crate::congruence::Congruence;
use crate::edges::{structure_graph, EdgeLabel, EdgeReport, EdgeWitness};
use crate::error::{Error, Result};
use crate::genclose::sg;
use crate::synth::{at, projection_violation, semilattice_violation, EdgeInventory, SynthesizedOp};
use crate::term::{realize_table, Evaluator, Term};
use crate::Limits;

/// The operations `f`, `g`, `h` fixed for a class.
#[derive(Debug, Clone)]
pub struct DistinguishedOps {
    pub f: SynthesizedOp,
    pub g: SynthesizedOp,
    pub h: SynthesizedOp,
    /// Number of SLS rounds applied to `f`.
    pub sls_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ThinKind {
    ThinSemilattice,
    SpecialThinMajority,
    ThinAffine,
}

impl ThinKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ThinKind::ThinSemilattice => "semilattice",
            ThinKind::SpecialThinMajority => "majority",
            ThinKind::ThinAffine => "affine",
        }
    }

    pub fn label(self) -> EdgeLabel {
        match self {
            ThinKind::ThinSemilattice => EdgeLabel::Semilattice,
            ThinKind::SpecialThinMajority => EdgeLabel::Majority,
            ThinKind::ThinAffine => EdgeLabel::Affine,
        }
    }
}

impl fmt::Display for ThinKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An arc `a -> b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThinEdge {
    /// Index of the algebra within its class; 0 for a single algebra.
    pub algebra: usize,
    pub a: Elem,
    pub b: Elem,
    pub kind: ThinKind,
    pub certificate: String,
    /// Verdict of [`check_thin_necessary`] once operations are known.
    pub necessary: Option<bool>,
}

impl ThinEdge {
    pub fn in_algebra(mut self, i: usize) -> Self {
        self.algebra = i;
        self
    }

    pub fn describe(&self, class: &[FiniteAlgebra]) -> String {
        let alg = &class[self.algebra];
        format!("{} thin {} {}->{}", alg.name(), self.kind, alg.label(self.a), alg.label(self.b))
    }
}

/// Result of [`synth_sls`].
#[derive(Debug, Clone)]
pub struct SlsResult {
    pub term: Term,
    pub steps: usize,
}

fn sls_counterexample(f: &crate::algebra::Operation, n: usize) -> Option<Vec<Elem>> {
    TupleIter::new(n, 2).find(|t| {
        let c = at(f, t);
        c != t[0] && !(at(f, &[t[0], c]) == c && at(f, &[c, t[0]]) == c)
    })
}

/// Turns `f0` into an operation satisfying the SLS condition: for all
/// `a, b` either `f(a,b) = a` or `a <= f(a,b)`.
///
/// `f0` must satisfy `f0(x, f0(x, y)) = f0(x, y)`, be a semilattice
/// operation on each thick semilattice edge and the first projection on
/// the other thick edges of the inventory.
pub fn synth_sls(inv: &EdgeInventory, f0: &Term) -> Result<SlsResult> {
    let mut steps = 0;
    for alg in &inv.class {
        let t = realize_table(f0, alg)?;
        for ab in TupleIter::new(alg.size(), 2) {
            let a = ab[0];
            let mut bi = at(&t, &ab);
            if bi == a {
                continue;
            }
            let mut current = sg(alg, &[a, bi]);
            let mut k = 0;
            loop {
                let next = at(&t, &[a, at(&t, &[bi, a])]);
                let s = sg(alg, &[a, next]);
                if s == current {
                    break;
                }
                bi = next;
                current = s;
                k += 1;
            }
            steps = steps.max(k);
        }
    }
    let x = Term::proj(2, 0);
    let mut f = f0.clone();
    for _ in 0..steps {
        f = f0.call(&[x.clone(), f0.call(&[f, x.clone()])]);
    }
    for alg in &inv.class {
        let t = realize_table(&f, alg)?;
        if let Some(p) = sls_counterexample(&t, alg.size()) {
            return Err(Error::PostconditionFailed(format!(
                "SLS fails on {} at ({}, {})",
                alg.name(),
                alg.label(p[0]),
                alg.label(p[1])
            )));
        }
    }
    for e in inv.all_edges() {
        let t = realize_table(&f, &e.quotient)?;
        let bad = match e.label {
            EdgeLabel::Semilattice => semilattice_violation(&t, &e.support()),
            EdgeLabel::Unary => None,
            _ => projection_violation(&t, &e.support(), 0),
        };
        if let Some(p) = bad {
            return Err(Error::PostconditionFailed(format!("{} lost on {} at {p:?}", e.label, inv.describe(e))));
        }
    }
    Ok(SlsResult { term: f, steps })
}

/// All `(a, b)`, `a != b`, with `f(a,b) = f(b,a) = b`.
pub fn thin_semilattice_order(alg: &FiniteAlgebra, f: &Term) -> Result<Vec<(Elem, Elem)>> {
    let t = realize_table(f, alg)?;
    let mut out = Vec::new();
    for a in 0..alg.size() {
        for b in (0..alg.size()).filter(|&b| b != a) {
            if at(&t, &[a, b]) == b && at(&t, &[b, a]) == b {
                out.push((a, b));
            }
        }
    }
    Ok(out)
}

/// `theta` on `Sg{a, b}` (indexed by position in the sorted subuniverse),
/// read on ambient elements.
struct Blocks {
    sub: Vec<Elem>,
    theta: Congruence,
}

impl Blocks {
    fn pos(&self, x: Elem) -> Option<usize> {
        self.sub.binary_search(&x).ok()
    }

    fn related(&self, x: Elem, y: Elem) -> bool {
        match (self.pos(x), self.pos(y)) {
            (Some(i), Some(j)) => self.theta.related(i, j),
            _ => false,
        }
    }

    fn class(&self, x: Elem) -> Vec<Elem> {
        self.sub.iter().copied().filter(|&y| self.related(x, y)).collect()
    }

    /// Is `cd` minimal with respect to the restriction of `theta` to
    /// `Sg{c, d}`?
    fn minimal(&self, alg: &FiniteAlgebra, c: Elem, d: Elem) -> bool {
        let s = sg(alg, &[c, d]);
        s.iter().filter(|&&d1| self.related(d, d1)).all(|&d1| sg(alg, &[c, d1]).binary_search(&d).is_ok())
    }
}

/// For every `b'` in `b/theta`, `b` lies in `Sg{a, b'}`. `theta` is a
/// congruence of `Sg{a, b}` indexed by position in the sorted subuniverse.
pub fn is_minimal_pair(alg: &FiniteAlgebra, a: Elem, b: Elem, theta: &Congruence) -> bool {
    let blocks = Blocks { sub: sg(alg, &[a, b]), theta: theta.clone() };
    blocks.class(b).into_iter().all(|b1| sg(alg, &[a, b1]).binary_search(&b).is_ok())
}

fn blocks_of(report: &EdgeReport, w: &EdgeWitness) -> Blocks {
    Blocks { sub: report.subalgebra.clone(), theta: w.theta.clone() }
}

/// Every `cd` with `c`, `d` in the two blocks of a majority witness (in
/// either order) that is minimal with respect to the restriction of
/// `theta` to `Sg{c, d}`.
pub fn find_special_thin_majority(alg: &FiniteAlgebra, report: &EdgeReport, w: &EdgeWitness) -> Result<Vec<ThinEdge>> {
    if w.label != EdgeLabel::Majority {
        return Err(Error::PreconditionViolated(format!("witness is {}, not majority", w.label)));
    }
    let blocks = blocks_of(report, w);
    let theta = report.theta_string(alg, &w.theta);
    let mut out = Vec::new();
    for (from, to) in [(&w.a_block, &w.b_block), (&w.b_block, &w.a_block)] {
        for &c in from {
            for &d in to {
                if blocks.minimal(alg, c, d) {
                    out.push(ThinEdge {
                        algebra: 0,
                        a: c,
                        b: d,
                        kind: ThinKind::SpecialThinMajority,
                        certificate: format!("majority theta={theta}; minimal in Sg{{{},{}}}", alg.label(c), alg.label(d)),
                        necessary: None,
                    });
                }
            }
        }
    }
    if !out.iter().any(|e| e.a == report.a) {
        return Err(Error::EmptyResult(format!(
            "no minimal pair from {} into its partner block",
            alg.label(report.a)
        )));
    }
    Ok(out)
}

/// Thin affine edges `ab'` with `b'` in `b/theta`: for each `b''` with
/// `ab''` minimal, `b' = h(b'', a, a)`, kept when `h(b', a, a) = b'` and
/// `ab'` is minimal.
pub fn find_thin_affine(alg: &FiniteAlgebra, report: &EdgeReport, w: &EdgeWitness, h: &Term) -> Result<Vec<ThinEdge>> {
    if w.label != EdgeLabel::Affine {
        return Err(Error::PreconditionViolated(format!("witness is {}, not affine", w.label)));
    }
    let blocks = blocks_of(report, w);
    let theta = report.theta_string(alg, &w.theta);
    let a = report.a;
    let mut ev = Evaluator::new(alg);
    let mut found = BTreeSet::new();
    for &b2 in &w.b_block {
        if !blocks.minimal(alg, a, b2) {
            continue;
        }
        let b1 = ev.eval(h, &[b2, a, a])?;
        if blocks.related(b1, report.b) && ev.eval(h, &[b1, a, a])? == b1 && blocks.minimal(alg, a, b1) {
            found.insert(b1);
        }
    }
    if found.is_empty() {
        return Err(Error::EmptyResult(format!("no thin affine edge from {}", alg.label(a))));
    }
    Ok(found
        .into_iter()
        .map(|b1| ThinEdge {
            algebra: 0,
            a,
            b: b1,
            kind: ThinKind::ThinAffine,
            certificate: format!("affine theta={theta}; h(b,a,a)=b; minimal in Sg{{{},{}}}", alg.label(a), alg.label(b1)),
            necessary: None,
        })
        .collect())
}

/// The necessary conditions of a thin edge, using the distinguished
/// operations as the instance of the quantified operation.
pub fn check_thin_necessary(alg: &FiniteAlgebra, a: Elem, b: Elem, kind: ThinKind, ops: &DistinguishedOps) -> Result<bool> {
    let mut ev = Evaluator::new(alg);
    let contains = |c: Elem| sg(alg, &[a, c]).binary_search(&b).is_ok();
    Ok(match kind {
        ThinKind::ThinSemilattice => {
            let f = &ops.f.term;
            ev.eval(f, &[a, b])? == b && ev.eval(f, &[b, a])? == b
        }
        ThinKind::SpecialThinMajority => {
            let g = &ops.g.term;
            [[a, b, b], [b, a, b], [b, b, a]]
                .iter()
                .map(|t| ev.eval(g, t).map(contains))
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .all(|x| x)
        }
        ThinKind::ThinAffine => {
            let h = &ops.h.term;
            ev.eval(h, &[b, a, a])? == b && contains(ev.eval(h, &[a, a, b])?)
        }
    })
}

fn swapped(report: &EdgeReport, w: &EdgeWitness) -> (EdgeReport, EdgeWitness) {
    let mut r = report.clone();
    std::mem::swap(&mut r.a, &mut r.b);
    let mut w = w.clone();
    std::mem::swap(&mut w.a_block, &mut w.b_block);
    (r, w)
}

#[derive(Debug, Clone)]
pub struct ThinGraph {
    pub size: usize,
    pub labels: Vec<String>,
    pub arcs: Vec<ThinEdge>,
}

impl ThinGraph {
    pub fn arcs_of(&self, kind: ThinKind) -> Vec<(Elem, Elem)> {
        self.arcs.iter().filter(|e| e.kind == kind).map(|e| (e.a, e.b)).collect()
    }
}

/// All thin semilattice, special thin majority and thin affine arcs of
/// `alg`, each tagged with its necessary-condition verdict.
pub fn thin_graph(alg: &FiniteAlgebra, ops: &DistinguishedOps, limits: &Limits) -> Result<ThinGraph> {
    let mut arcs: Vec<ThinEdge> = thin_semilattice_order(alg, &ops.f.term)?
        .into_iter()
        .map(|(a, b)| ThinEdge {
            algebra: 0,
            a,
            b,
            kind: ThinKind::ThinSemilattice,
            certificate: "f(a,b)=f(b,a)=b".into(),
            necessary: None,
        })
        .collect();
    let graph = structure_graph(alg, limits)?;
    for r in &graph.reports {
        for w in &r.witnesses {
            match w.label {
                EdgeLabel::Majority => arcs.extend(find_special_thin_majority(alg, r, w)?),
                EdgeLabel::Affine => {
                    arcs.extend(find_thin_affine(alg, r, w, &ops.h.term)?);
                    let (r2, w2) = swapped(r, w);
                    arcs.extend(find_thin_affine(alg, &r2, &w2, &ops.h.term)?);
                }
                _ => {}
            }
        }
    }
    let mut seen = BTreeSet::new();
    arcs.retain(|e| seen.insert((e.kind, e.a, e.b)));
    arcs.sort_by_key(|e| (e.kind, e.a, e.b));
    for e in &mut arcs {
        e.necessary = Some(check_thin_necessary(alg, e.a, e.b, e.kind, ops)?);
    }
    let labels = (0..alg.size()).map(|x| alg.label(x)).collect();
    Ok(ThinGraph { size: alg.size(), labels, arcs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edges::classify_pair;
    use crate::fixtures;
    use crate::synth::{build_edge_inventory, uniform_ops_for};

    fn lim() -> Limits {
        Limits::default()
    }

    #[test]
    fn sls_on_no_edge_is_f() {
        let ne = fixtures::no_edge();
        let inv = build_edge_inventory(std::slice::from_ref(&ne), &lim()).unwrap();
        let f = Term::parse("f(p0, p1)", 2).unwrap();
        let out = synth_sls(&inv, &f).unwrap();
        assert_eq!(realize_table(&out.term, &ne).unwrap().table(), ne.op_by_name("f").unwrap().table());
        assert_eq!(thin_semilattice_order(&ne, &out.term).unwrap(), vec![(0, 2), (1, 2)]);
    }

    #[test]
    fn sl2_order_points_to_meet() {
        let sl = fixtures::sl2();
        let f = Term::parse("f(p0, p1)", 2).unwrap();
        assert_eq!(thin_semilattice_order(&sl, &f).unwrap(), vec![(1, 0)]);
    }

    #[test]
    fn mj2_majority_arcs_both_ways() {
        let mj = fixtures::mj2();
        let r = classify_pair(&mj, 0, 1, &lim()).unwrap();
        let arcs = find_special_thin_majority(&mj, &r, &r.witnesses[0]).unwrap();
        let pairs: Vec<_> = arcs.iter().map(|e| (e.a, e.b)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn z3_thin_graph_is_complete() {
        let z = fixtures::z3_affine();
        let ops = uniform_ops_for(std::slice::from_ref(&z), &lim()).unwrap();
        let g = thin_graph(&z, &ops, &lim()).unwrap();
        assert_eq!(g.arcs_of(ThinKind::ThinAffine).len(), 6);
        assert!(g.arcs.iter().all(|e| e.necessary == Some(true)));
    }

    #[test]
    fn sl2_is_not_thin_affine() {
        let sl = fixtures::sl2();
        let ops = uniform_ops_for(std::slice::from_ref(&sl), &lim()).unwrap();
        assert!(!check_thin_necessary(&sl, 0, 1, ThinKind::ThinAffine, &ops).unwrap());
    }
}
