//! Congruences, tolerances and the decision procedures built on them:
//! simplicity, abelianness and absorbing elements.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::algebra::{product, Elem, FiniteAlgebra, TupleIter};
use crate::error::{Error, Result};
use crate::genclose;
use crate::Limits;

#[derive(Debug, Clone)]
struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, x: usize, y: usize) -> bool {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return false;
        }
        // keep the smaller element as root
        if rx < ry {
            self.parent[ry] = rx;
        } else {
            self.parent[rx] = ry;
        }
        true
    }

    fn into_congruence(mut self) -> Congruence {
        let n = self.parent.len();
        let roots: Vec<usize> = (0..n).map(|x| self.find(x)).collect();
        Congruence::from_labels(&roots)
    }
}

/// An equivalence relation on `0..n`, stored as canonical block indices:
/// blocks are numbered in order of their least elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Congruence {
    block: Vec<usize>,
}

impl Congruence {
    /// Partition whose blocks are the classes of equal labels.
    pub fn from_labels<T: Eq + std::hash::Hash>(labels: &[T]) -> Self {
        let mut ids: HashMap<&T, usize> = HashMap::new();
        let block = labels
            .iter()
            .map(|l| {
                let next = ids.len();
                *ids.entry(l).or_insert(next)
            })
            .collect();
        Congruence { block }
    }

    /// Partition of `0..n` with the given blocks; missing elements become
    /// singletons.
    pub fn from_blocks(n: usize, blocks: &[Vec<Elem>]) -> Self {
        let mut uf = UnionFind::new(n);
        for b in blocks {
            for w in b.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
        uf.into_congruence()
    }

    pub fn equality(n: usize) -> Self {
        Congruence { block: (0..n).collect() }
    }

    pub fn total(n: usize) -> Self {
        Congruence { block: vec![0; n] }
    }

    /// Kernel of a map given by its values.
    pub fn kernel(values: &[usize]) -> Self {
        Self::from_labels(values)
    }

    pub fn size(&self) -> usize {
        self.block.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.block.iter().max().map_or(0, |&m| m + 1)
    }

    /// Block index of every element.
    pub fn block_index(&self) -> &[usize] {
        &self.block
    }

    pub fn block_of(&self, x: Elem) -> usize {
        self.block[x]
    }

    pub fn related(&self, x: Elem, y: Elem) -> bool {
        self.block[x] == self.block[y]
    }

    pub fn blocks(&self) -> Vec<Vec<Elem>> {
        let mut out = vec![Vec::new(); self.num_blocks()];
        for (x, &b) in self.block.iter().enumerate() {
            out[b].push(x);
        }
        out
    }

    /// Elements of the block of `x`.
    pub fn class(&self, x: Elem) -> Vec<Elem> {
        (0..self.size()).filter(|&y| self.related(x, y)).collect()
    }

    /// Least element of each block, in block order.
    pub fn representatives(&self) -> Vec<Elem> {
        self.blocks().iter().map(|b| b[0]).collect()
    }

    /// Least element of the block of each element.
    pub fn leaders(&self) -> Vec<Elem> {
        let reps = self.representatives();
        self.block.iter().map(|&b| reps[b]).collect()
    }

    pub fn is_equality(&self) -> bool {
        self.num_blocks() == self.size()
    }

    pub fn is_total(&self) -> bool {
        self.num_blocks() <= 1
    }

    /// `self` is contained in `other`.
    pub fn leq(&self, other: &Congruence) -> bool {
        let mut image: HashMap<usize, usize> = HashMap::new();
        self.block
            .iter()
            .zip(&other.block)
            .all(|(&a, &b)| *image.entry(a).or_insert(b) == b)
    }

    pub fn join(&self, other: &Congruence) -> Congruence {
        let mut uf = UnionFind::new(self.size());
        for c in [self, other] {
            let reps = c.representatives();
            for (x, &b) in c.block.iter().enumerate() {
                uf.union(x, reps[b]);
            }
        }
        uf.into_congruence()
    }

    pub fn meet(&self, other: &Congruence) -> Congruence {
        let pairs: Vec<(usize, usize)> = self.block.iter().copied().zip(other.block.iter().copied()).collect();
        Congruence::from_labels(&pairs)
    }

    /// First failure of compatibility with the basic operations, as the
    /// operation name and two argument tuples that differ in one related
    /// position but have unrelated images.
    pub fn compatibility_violation(&self, a: &FiniteAlgebra) -> Option<(String, Vec<Elem>, Vec<Elem>)> {
        let n = a.size();
        let pairs: Vec<(Elem, Elem)> = (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .filter(|&(x, y)| x < y && self.related(x, y))
            .collect();
        for op in a.operations() {
            let r = op.arity();
            for slot in 0..r {
                for fill in TupleIter::new(n, r - 1) {
                    for &(x, y) in &pairs {
                        let mut u = fill.clone();
                        u.insert(slot, x);
                        let mut v = fill.clone();
                        v.insert(slot, y);
                        if !self.related(op.apply(&u), op.apply(&v)) {
                            return Some((op.name().to_string(), u, v));
                        }
                    }
                }
            }
        }
        None
    }

    pub fn is_congruence_of(&self, a: &FiniteAlgebra) -> bool {
        self.size() == a.size() && self.compatibility_violation(a).is_none()
    }

    /// Restriction to a subset, re-indexed by position in `subset`.
    pub fn restrict(&self, subset: &[Elem]) -> Congruence {
        let labels: Vec<usize> = subset.iter().map(|&x| self.block[x]).collect();
        Congruence::from_labels(&labels)
    }

    /// Prints blocks with custom element names.
    pub fn display_with(&self, name: impl Fn(Elem) -> String) -> String {
        let blocks: Vec<String> = self
            .blocks()
            .iter()
            .map(|b| b.iter().map(|&x| name(x)).collect::<Vec<_>>().join(","))
            .collect();
        format!("{{{}}}", blocks.join("|"))
    }
}

impl PartialOrd for Congruence {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical order: lexicographic on the block-leader vectors.
impl Ord for Congruence {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.leaders().cmp(&other.leaders())
    }
}

impl fmt::Display for Congruence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(|x| x.to_string()))
    }
}

/// Least congruence containing `pairs`: union-find saturated under every
/// unary slice of a basic operation (one free slot, constants elsewhere).
pub fn cg(a: &FiniteAlgebra, pairs: &[(Elem, Elem)]) -> Congruence {
    let n = a.size();
    let mut uf = UnionFind::new(n);
    let mut queue: Vec<(Elem, Elem)> = Vec::new();
    for &(x, y) in pairs {
        if uf.union(x, y) {
            queue.push((x, y));
        }
    }
    let fills: Vec<Vec<Vec<Elem>>> = a
        .operations()
        .iter()
        .map(|op| TupleIter::new(n, op.arity() - 1).collect())
        .collect();
    let mut u = Vec::new();
    let mut v = Vec::new();
    while let Some((x, y)) = queue.pop() {
        for (op, fills) in a.operations().iter().zip(&fills) {
            for slot in 0..op.arity() {
                for fill in fills {
                    u.clear();
                    u.extend_from_slice(&fill[..slot]);
                    u.push(x);
                    u.extend_from_slice(&fill[slot..]);
                    v.clear();
                    v.extend_from_slice(&fill[..slot]);
                    v.push(y);
                    v.extend_from_slice(&fill[slot..]);
                    let (p, q) = (op.apply(&u), op.apply(&v));
                    if uf.union(p, q) {
                        queue.push((p, q));
                    }
                }
            }
        }
    }
    uf.into_congruence()
}

/// Principal congruences `Cg(x, y)` for `x < y`, deduplicated, in
/// canonical order.
pub fn principal_congruences(a: &FiniteAlgebra) -> Vec<Congruence> {
    let n = a.size();
    let mut set = BTreeSet::new();
    for x in 0..n {
        for y in x + 1..n {
            set.insert(cg(a, &[(x, y)]));
        }
    }
    set.into_iter().collect()
}

/// All congruences: equality together with every join of principal
/// congruences. Canonically sorted.
pub fn congruence_lattice(a: &FiniteAlgebra, limits: &Limits) -> Result<Vec<Congruence>> {
    limits.check_size(a.size())?;
    let principals = principal_congruences(a);
    let mut seen: HashSet<Congruence> = HashSet::new();
    let eq = Congruence::equality(a.size());
    seen.insert(eq.clone());
    let mut queue = vec![eq];
    while let Some(c) = queue.pop() {
        for p in &principals {
            let j = c.join(p);
            if seen.insert(j.clone()) {
                queue.push(j);
            }
        }
    }
    let mut out: Vec<Congruence> = seen.into_iter().collect();
    out.sort();
    Ok(out)
}

/// Maximal proper congruences (those with a simple quotient), canonically
/// sorted. Empty for a one-element algebra.
pub fn maximal_congruences(a: &FiniteAlgebra, limits: &Limits) -> Result<Vec<Congruence>> {
    let lattice = congruence_lattice(a, limits)?;
    Ok(maximal_in(&lattice))
}

fn maximal_in(lattice: &[Congruence]) -> Vec<Congruence> {
    lattice
        .iter()
        .filter(|t| !t.is_total())
        .filter(|t| !lattice.iter().any(|u| !u.is_total() && u != *t && t.leq(u)))
        .cloned()
        .collect()
}

pub fn is_simple(a: &FiniteAlgebra, limits: &Limits) -> Result<bool> {
    Ok(a.size() >= 2 && congruence_lattice(a, limits)?.len() == 2)
}

/// A reflexive, symmetric relation on `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tolerance {
    n: usize,
    rel: Vec<bool>,
}

impl Tolerance {
    pub fn equality(n: usize) -> Self {
        let mut rel = vec![false; n * n];
        for x in 0..n {
            rel[x * n + x] = true;
        }
        Tolerance { n, rel }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn related(&self, x: Elem, y: Elem) -> bool {
        self.rel[x * self.n + y]
    }

    fn add(&mut self, x: Elem, y: Elem) -> bool {
        let fresh = !self.rel[x * self.n + y];
        self.rel[x * self.n + y] = true;
        self.rel[y * self.n + x] = true;
        fresh
    }

    /// Related pairs `(x, y)` with `x <= y`.
    pub fn pairs(&self) -> Vec<(Elem, Elem)> {
        (0..self.n)
            .flat_map(|x| (x..self.n).map(move |y| (x, y)))
            .filter(|&(x, y)| self.related(x, y))
            .collect()
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|x| self.related(x, x))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|x| (0..self.n).all(|y| self.related(x, y) == self.related(y, x)))
    }

    pub fn is_total(&self) -> bool {
        self.rel.iter().all(|&b| b)
    }

    /// Preserved by every basic operation, checked on all tuples of
    /// related pairs.
    pub fn is_compatible(&self, a: &FiniteAlgebra) -> bool {
        let pairs: Vec<(Elem, Elem)> = (0..self.n)
            .flat_map(|x| (0..self.n).map(move |y| (x, y)))
            .filter(|&(x, y)| self.related(x, y))
            .collect();
        a.operations().iter().all(|op| {
            TupleIter::new(pairs.len(), op.arity()).all(|idx| {
                let u: Vec<Elem> = idx.iter().map(|&i| pairs[i].0).collect();
                let v: Vec<Elem> = idx.iter().map(|&i| pairs[i].1).collect();
                self.related(op.apply(&u), op.apply(&v))
            })
        })
    }

    /// Maximal sets `B` with `B^2` inside the relation, sorted.
    pub fn classes(&self) -> Vec<Vec<Elem>> {
        let mut out = Vec::new();
        let all: Vec<Elem> = (0..self.n).collect();
        self.bron_kerbosch(Vec::new(), all, Vec::new(), &mut out);
        out.sort();
        out
    }

    fn bron_kerbosch(&self, r: Vec<Elem>, p: Vec<Elem>, x: Vec<Elem>, out: &mut Vec<Vec<Elem>>) {
        if p.is_empty() && x.is_empty() {
            let mut r = r;
            r.sort_unstable();
            out.push(r);
            return;
        }
        let pivot = p.iter().chain(&x).copied().max_by_key(|&u| p.iter().filter(|&&v| self.related(u, v)).count());
        let pivot = pivot.unwrap();
        let candidates: Vec<Elem> = p.iter().copied().filter(|&v| v == pivot || !self.related(pivot, v)).collect();
        let (mut p, mut x) = (p, x);
        for v in candidates {
            let mut r2 = r.clone();
            r2.push(v);
            let p2 = p.iter().copied().filter(|&w| w != v && self.related(v, w)).collect();
            let x2 = x.iter().copied().filter(|&w| w != v && self.related(v, w)).collect();
            self.bron_kerbosch(r2, p2, x2, out);
            p.retain(|&w| w != v);
            x.push(v);
        }
    }

    /// The transitive closure, which for a tolerance is a congruence.
    pub fn transitive_closure(&self) -> Congruence {
        let mut uf = UnionFind::new(self.n);
        for (x, y) in self.pairs() {
            uf.union(x, y);
        }
        uf.into_congruence()
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> = self
            .pairs()
            .into_iter()
            .filter(|(x, y)| x != y)
            .map(|(x, y)| format!("{x}-{y}"))
            .collect();
        write!(f, "tol{{{}}}", pairs.join(","))
    }
}

/// Least tolerance containing `pairs`, with its classes.
pub fn tolerance_ops(a: &FiniteAlgebra, pairs: &[(Elem, Elem)]) -> (Tolerance, Vec<Vec<Elem>>) {
    let n = a.size();
    let mut tol = Tolerance::equality(n);
    // ordered pairs, both directions, in insertion order
    let mut list: Vec<(Elem, Elem)> = (0..n).map(|x| (x, x)).collect();
    for &(x, y) in pairs {
        if tol.add(x, y) {
            list.push((x, y));
            list.push((y, x));
        }
    }
    let mut lo = 0;
    // the diagonal maps to the diagonal, so the first round may start past it
    if list.len() > n {
        lo = n;
    }
    while lo < list.len() {
        let hi = list.len();
        for op in a.operations() {
            let r = op.arity();
            let mut u = vec![0; r];
            let mut v = vec![0; r];
            for idx in TupleIter::new(hi, r) {
                if idx.iter().all(|&i| i < lo) {
                    continue;
                }
                for (j, &i) in idx.iter().enumerate() {
                    u[j] = list[i].0;
                    v[j] = list[i].1;
                }
                let (p, q) = (op.apply(&u), op.apply(&v));
                if tol.add(p, q) {
                    list.push((p, q));
                    list.push((q, p));
                }
            }
        }
        lo = hi;
    }
    let classes = tol.classes();
    (tol, classes)
}

/// The `i`th link tolerance of a relation `R` whose projections are all
/// of `A`: `x ~ y` when two tuples of `R` agree off coordinate `i` and
/// carry `x`, `y` there.
pub fn link_tolerance(a: &FiniteAlgebra, r: &[Vec<Elem>], i: usize) -> Result<Tolerance> {
    let k = r.first().map_or(0, Vec::len);
    for j in 0..k {
        let mut seen = vec![false; a.size()];
        for t in r {
            seen[t[j]] = true;
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::ProjectionNotFull(j));
        }
    }
    let mut groups: HashMap<Vec<Elem>, Vec<Elem>> = HashMap::new();
    for t in r {
        let mut rest = t.clone();
        let x = rest.remove(i);
        groups.entry(rest).or_default().push(x);
    }
    let mut tol = Tolerance::equality(a.size());
    for vals in groups.values() {
        for &x in vals {
            for &y in vals {
                tol.add(x, y);
            }
        }
    }
    if !(tol.is_reflexive() && tol.is_symmetric() && tol.is_compatible(a)) {
        return Err(Error::PostconditionFailed(format!(
            "link tolerance {i} is not a tolerance; the relation is not compatible"
        )));
    }
    Ok(tol)
}

/// `A` is abelian iff the diagonal of `A^2` is a block of the congruence of
/// `A^2` generated by all pairs of diagonal elements.
pub fn is_abelian(a: &FiniteAlgebra, limits: &Limits) -> Result<bool> {
    limits.check_size(a.size())?;
    let n = a.size();
    if n == 1 {
        return Ok(true);
    }
    let sq = product(a, a)?;
    let diag: Vec<(Elem, Elem)> = (1..n).map(|x| (0, x * n + x)).collect();
    let theta = cg(&sq, &diag);
    let block = theta.class(0);
    Ok(block.len() == n && block.iter().all(|&p| p / n == p % n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimpleKind {
    Set,
    Module,
    Other,
}

impl fmt::Display for SimpleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SimpleKind::Set => "set",
            SimpleKind::Module => "module",
            SimpleKind::Other => "other",
        };
        f.write_str(s)
    }
}

/// For a simple idempotent algebra: a set, a module (abelian and not a
/// set), or neither.
pub fn classify_simple_quotient(d: &FiniteAlgebra, limits: &Limits) -> Result<SimpleKind> {
    if d.is_set() {
        Ok(SimpleKind::Set)
    } else if is_abelian(d, limits)? {
        Ok(SimpleKind::Module)
    } else {
        Ok(SimpleKind::Other)
    }
}

/// Absorbing elements, with the arity up to which term operations were
/// checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Absorption {
    pub elements: Vec<Elem>,
    /// 3 when every ternary term operation was checked; 1 when the term
    /// closure hit the cap and only basic operations were checked.
    pub checked_arity: usize,
}

/// Positions on which a table of the given arity depends.
pub(crate) fn essential_positions(table: &[Elem], n: usize, arity: usize) -> Vec<usize> {
    (0..arity)
        .filter(|&i| {
            let stride = n.pow((arity - 1 - i) as u32);
            (0..table.len()).any(|idx| {
                let d = (idx / stride) % n;
                d > 0 && table[idx] != table[idx - d * stride]
            })
        })
        .collect()
}

fn absorbs(table: &[Elem], n: usize, arity: usize, a: Elem, positions: &[usize]) -> bool {
    positions.iter().all(|&i| {
        TupleIter::new(n, arity)
            .enumerate()
            .filter(|(_, t)| t[i] == a)
            .all(|(idx, _)| table[idx] == a)
    })
}

/// Elements `a` with `t(.., a, ..) = a` whenever `t` depends on that
/// position, for every term operation `t` of arity at most 3.
pub fn absorbing_elements(a: &FiniteAlgebra, limits: &Limits) -> Result<Absorption> {
    limits.check_size(a.size())?;
    let n = a.size();
    let mut elements: Vec<Elem> = (0..n)
        .filter(|&x| {
            a.operations().iter().all(|op| {
                let pos = essential_positions(op.table(), n, op.arity());
                absorbs(op.table(), n, op.arity(), x, &pos)
            })
        })
        .collect();
    if elements.is_empty() {
        return Ok(Absorption { elements, checked_arity: 3 });
    }
    let gens: Vec<Vec<Elem>> = (0..3).map(|i| TupleIter::new(n, 3).map(|t| t[i]).collect()).collect();
    match genclose::closure(a, &gens, limits.node_cap) {
        Ok(trace) => {
            for table in trace.elements() {
                let pos = essential_positions(&table, n, 3);
                elements.retain(|&x| absorbs(&table, n, 3, x, &pos));
            }
            Ok(Absorption { elements, checked_arity: 3 })
        }
        Err(Error::CapExceeded { .. }) => Ok(Absorption { elements, checked_arity: 1 }),
        Err(e) => Err(e),
    }
}
