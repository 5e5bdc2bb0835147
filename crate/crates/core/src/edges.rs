//! Edges of an idempotent algebra and the graphs they form.
//!
//! A pair `ab` is an edge when some maximal congruence `theta` of
//! `B = Sg{a, b}` makes `B/theta` a set (unary type), or admits a term that
//! is a semilattice operation on `{a/theta, b/theta}` (semilattice type), or
//! failing that a majority operation there (majority type), or makes
//! `B/theta` a module (affine type).

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::algebra::{quotient, restrict, Elem, FiniteAlgebra};
use crate::congruence::{classify_simple_quotient, maximal_congruences, Congruence, SimpleKind};
use crate::error::{Error, Result};
use crate::genclose::{all_subalgebras, find_pair_witness, sg, PairWitness, WitnessKind};
use crate::term::Term;
use crate::Limits;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeLabel {
    Unary,
    Semilattice,
    Majority,
    Affine,
}

impl EdgeLabel {
    pub const ALL: [EdgeLabel; 4] = [EdgeLabel::Unary, EdgeLabel::Semilattice, EdgeLabel::Majority, EdgeLabel::Affine];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeLabel::Unary => "unary",
            EdgeLabel::Semilattice => "semilattice",
            EdgeLabel::Majority => "majority",
            EdgeLabel::Affine => "affine",
        }
    }

    pub fn parse(s: &str) -> Option<EdgeLabel> {
        EdgeLabel::ALL.into_iter().find(|l| l.as_str() == s)
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One maximal congruence of `Sg{a, b}` and the type it certifies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeWitness {
    /// Congruence of the generated subalgebra, indexed by position in
    /// [`EdgeReport::subalgebra`].
    pub theta: Congruence,
    pub label: EdgeLabel,
    /// Semilattice or majority operation on the two blocks, or a Mal'tsev
    /// operation on the whole quotient. `None` for the unary type.
    pub witness: Option<Term>,
    /// For the semilattice type: the element (`a` or `b`) whose block the
    /// witness sends both mixed pairs to.
    pub absorbing: Option<Elem>,
    /// The blocks of `a` and `b`, as elements of the ambient algebra.
    pub a_block: Vec<Elem>,
    pub b_block: Vec<Elem>,
    pub quotient_size: usize,
}

impl EdgeWitness {
    /// `a/theta` union `b/theta`, sorted.
    pub fn union_blocks(&self) -> Vec<Elem> {
        let mut u: Vec<Elem> = self.a_block.iter().chain(&self.b_block).copied().collect();
        u.sort_unstable();
        u
    }
}

/// A maximal congruence that certified nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unlabeled {
    pub theta: Congruence,
    pub kind: SimpleKind,
    /// True when a closure hit the node cap, so the verdict is open.
    pub inconclusive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeStatus {
    Edge,
    NonEdge,
    /// No congruence certified a type and some search hit the cap.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeReport {
    pub a: Elem,
    pub b: Elem,
    /// `Sg{a, b}` as sorted elements of the ambient algebra.
    pub subalgebra: Vec<Elem>,
    pub witnesses: Vec<EdgeWitness>,
    pub unlabeled: Vec<Unlabeled>,
    pub status: EdgeStatus,
}

impl EdgeReport {
    pub fn is_edge(&self) -> bool {
        !self.witnesses.is_empty()
    }

    /// Distinct labels, sorted.
    pub fn labels(&self) -> Vec<EdgeLabel> {
        let set: BTreeSet<EdgeLabel> = self.witnesses.iter().map(|w| w.label).collect();
        set.into_iter().collect()
    }

    pub fn has_label(&self, label: EdgeLabel) -> bool {
        self.witnesses.iter().any(|w| w.label == label)
    }

    /// A congruence of the generated subalgebra printed with ambient
    /// element names.
    pub fn theta_string(&self, alg: &FiniteAlgebra, theta: &Congruence) -> String {
        theta.display_with(|i| alg.label(self.subalgebra[i]))
    }
}

/// Classifies the pair `ab` (`a != b`).
pub fn classify_pair(alg: &FiniteAlgebra, a: Elem, b: Elem, limits: &Limits) -> Result<EdgeReport> {
    if a == b || a >= alg.size() || b >= alg.size() {
        return Err(Error::PreconditionViolated(format!("classify_pair needs two distinct elements, got {a}, {b}")));
    }
    limits.check_size(alg.size())?;
    let subalgebra = sg(alg, &[a, b]);
    let (sub, emb) = restrict(alg, &subalgebra)?;
    let local = |x: Elem| emb.iter().position(|&e| e == x).unwrap();
    let (la, lb) = (local(a), local(b));
    let mut witnesses = Vec::new();
    let mut unlabeled = Vec::new();
    for theta in maximal_congruences(&sub, limits)? {
        let (d, map) = quotient(&sub, &theta)?;
        let (qa, qb) = (map[la], map[lb]);
        let blocks = |q: usize| -> Vec<Elem> {
            (0..sub.size()).filter(|&i| map[i] == q).map(|i| emb[i]).collect()
        };
        let mut found = |label, witness: Option<Term>, absorbing| {
            witnesses.push(EdgeWitness {
                theta: theta.clone(),
                label,
                witness,
                absorbing,
                a_block: blocks(qa),
                b_block: blocks(qb),
                quotient_size: d.size(),
            });
        };
        if d.is_set() {
            found(EdgeLabel::Unary, None, None);
            continue;
        }
        let mut capped = false;
        match find_pair_witness(&d, WitnessKind::Semilattice, qa, qb, limits.node_cap) {
            PairWitness::Found { term, target } => {
                let top = if target[0] == qb { b } else { a };
                found(EdgeLabel::Semilattice, Some(term), Some(top));
                continue;
            }
            PairWitness::CapExceeded { .. } => capped = true,
            PairWitness::Absent { .. } => {}
        }
        if !capped {
            match find_pair_witness(&d, WitnessKind::Majority, qa, qb, limits.node_cap) {
                PairWitness::Found { term, .. } => {
                    found(EdgeLabel::Majority, Some(term), None);
                    continue;
                }
                PairWitness::CapExceeded { .. } => capped = true,
                PairWitness::Absent { .. } => {}
            }
        }
        let kind = classify_simple_quotient(&d, limits)?;
        if !capped && kind == SimpleKind::Module {
            match find_pair_witness(&d, WitnessKind::Maltsev, qa, qb, limits.node_cap) {
                PairWitness::Found { term, .. } => {
                    found(EdgeLabel::Affine, Some(term), None);
                    continue;
                }
                PairWitness::CapExceeded { .. } => capped = true,
                PairWitness::Absent { .. } => {}
            }
        }
        unlabeled.push(Unlabeled { theta, kind, inconclusive: capped });
    }
    let status = if !witnesses.is_empty() {
        EdgeStatus::Edge
    } else if unlabeled.iter().any(|u| u.inconclusive) {
        EdgeStatus::Unknown
    } else {
        EdgeStatus::NonEdge
    };
    Ok(EdgeReport { a, b, subalgebra, witnesses, unlabeled, status })
}

/// Anything whose vertices are linked by sets (edges or hyperedges).
pub trait Connectivity {
    fn vertex_count(&self) -> usize;
    fn links(&self) -> Vec<Vec<Elem>>;

    fn connected_components(&self) -> Vec<Vec<Elem>> {
        components(self.vertex_count(), &self.links())
    }

    fn is_connected(&self) -> bool {
        self.connected_components().len() <= 1
    }
}

/// Components of the vertex set `0..n` under the given links.
pub fn components(n: usize, links: &[Vec<Elem>]) -> Vec<Vec<Elem>> {
    Congruence::from_blocks(n, links).blocks()
}

/// `G(A)`: typed edges over the universe, with the report of every pair.
#[derive(Debug, Clone)]
pub struct StructureGraph {
    pub size: usize,
    pub labels: Vec<String>,
    /// Reports for all pairs `a < b`, in lexicographic order.
    pub reports: Vec<EdgeReport>,
}

impl StructureGraph {
    /// Distinct `(a, b, label)` triples with `a < b`.
    pub fn edges(&self) -> Vec<(Elem, Elem, EdgeLabel)> {
        self.reports
            .iter()
            .flat_map(|r| r.labels().into_iter().map(move |l| (r.a, r.b, l)))
            .collect()
    }

    pub fn report(&self, a: Elem, b: Elem) -> Option<&EdgeReport> {
        let (a, b) = (a.min(b), a.max(b));
        self.reports.iter().find(|r| r.a == a && r.b == b)
    }

    pub fn unknown_pairs(&self) -> Vec<(Elem, Elem)> {
        self.reports
            .iter()
            .filter(|r| r.status == EdgeStatus::Unknown)
            .map(|r| (r.a, r.b))
            .collect()
    }

    /// Only the edges carrying a label from `allowed`.
    pub fn restricted(&self, allowed: &[EdgeLabel]) -> SimpleGraph {
        SimpleGraph {
            size: self.size,
            edges: self
                .reports
                .iter()
                .filter(|r| r.labels().iter().any(|l| allowed.contains(l)))
                .map(|r| (r.a, r.b))
                .collect(),
        }
    }
}

impl Connectivity for StructureGraph {
    fn vertex_count(&self) -> usize {
        self.size
    }

    fn links(&self) -> Vec<Vec<Elem>> {
        self.reports.iter().filter(|r| r.is_edge()).map(|r| vec![r.a, r.b]).collect()
    }
}

/// An untyped graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    pub size: usize,
    pub edges: Vec<(Elem, Elem)>,
}

impl Connectivity for SimpleGraph {
    fn vertex_count(&self) -> usize {
        self.size
    }

    fn links(&self) -> Vec<Vec<Elem>> {
        self.edges.iter().map(|&(a, b)| vec![a, b]).collect()
    }
}

/// `H(A)`: the proper subuniverses as hyperedges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    pub size: usize,
    pub hyperedges: Vec<Vec<Elem>>,
}

impl Connectivity for Hypergraph {
    fn vertex_count(&self) -> usize {
        self.size
    }

    fn links(&self) -> Vec<Vec<Elem>> {
        self.hyperedges.clone()
    }
}

pub fn structure_graph(alg: &FiniteAlgebra, limits: &Limits) -> Result<StructureGraph> {
    limits.check_size(alg.size())?;
    let n = alg.size();
    let mut reports = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            reports.push(classify_pair(alg, a, b, limits)?);
        }
    }
    Ok(StructureGraph { size: n, labels: (0..n).map(|x| alg.label(x)).collect(), reports })
}

pub fn hypergraph(alg: &FiniteAlgebra, limits: &Limits) -> Result<Hypergraph> {
    let n = alg.size();
    let hyperedges = all_subalgebras(alg, limits)?.into_iter().filter(|s| s.len() < n).collect();
    Ok(Hypergraph { size: n, hyperedges })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum XConnectivity {
    Connected,
    /// A subuniverse and two of its elements not joined by a path of
    /// allowed edges (classified inside the subalgebra).
    Counterexample { subalgebra: Vec<Elem>, a: Elem, b: Elem },
}

impl XConnectivity {
    pub fn holds(&self) -> bool {
        matches!(self, XConnectivity::Connected)
    }
}

/// For every subalgebra `B` and `a, b` in `B`: is there a path in `G(B)`
/// using only edges with a type in `allowed`?
pub fn x_connected(alg: &FiniteAlgebra, allowed: &[EdgeLabel], limits: &Limits) -> Result<XConnectivity> {
    // Classification inside B only depends on the algebra Sg{a, b}, which
    // is the same subset whether generated in B or in A; cache on it.
    let mut cache: HashMap<(Vec<Elem>, Elem, Elem), Vec<EdgeLabel>> = HashMap::new();
    for subset in all_subalgebras(alg, limits)? {
        let (b_alg, emb) = restrict(alg, &subset)?;
        let m = b_alg.size();
        let mut edges = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                let key = (sg(alg, &[emb[i], emb[j]]), emb[i], emb[j]);
                let labels = match cache.get(&key) {
                    Some(l) => l.clone(),
                    None => {
                        let l = classify_pair(&b_alg, i, j, limits)?.labels();
                        cache.insert(key, l.clone());
                        l
                    }
                };
                if labels.iter().any(|l| allowed.contains(l)) {
                    edges.push((i, j));
                }
            }
        }
        let comps = SimpleGraph { size: m, edges }.connected_components();
        if comps.len() > 1 {
            return Ok(XConnectivity::Counterexample {
                subalgebra: subset.clone(),
                a: emb[comps[0][0]],
                b: emb[comps[1][0]],
            });
        }
    }
    Ok(XConnectivity::Connected)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Smoothness {
    Smooth,
    /// A thick semilattice or majority edge whose two blocks do not form a
    /// subuniverse.
    Counterexample { a: Elem, b: Elem, label: EdgeLabel, blocks: Vec<Elem> },
}

impl Smoothness {
    pub fn holds(&self) -> bool {
        matches!(self, Smoothness::Smooth)
    }
}

pub fn is_smooth(alg: &FiniteAlgebra, limits: &Limits) -> Result<Smoothness> {
    Ok(smoothness_of(alg, &structure_graph(alg, limits)?))
}

/// Smoothness from an already computed graph.
pub fn smoothness_of(alg: &FiniteAlgebra, graph: &StructureGraph) -> Smoothness {
    for r in &graph.reports {
        for w in &r.witnesses {
            if matches!(w.label, EdgeLabel::Semilattice | EdgeLabel::Majority) {
                let blocks = w.union_blocks();
                if !alg.is_subuniverse(&blocks) {
                    return Smoothness::Counterexample { a: r.a, b: r.b, label: w.label, blocks };
                }
            }
        }
    }
    Smoothness::Smooth
}
