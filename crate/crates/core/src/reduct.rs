//! Bounded-arity reducts: the term operations of `A` of arity at most `m`
//! that preserve the union `R_ab` of the two blocks of a semilattice or
//! majority edge.

use std::collections::BTreeSet;

use crate::algebra::{Elem, FiniteAlgebra, Operation, TupleIter};
use crate::congruence::{essential_positions, Congruence};
use crate::edges::{classify_pair, structure_graph, EdgeLabel, StructureGraph};
use crate::error::{Error, Result};
use crate::genclose::closure;
use crate::term::{realize_table, Term};
use crate::Limits;

/// Default largest arity.
pub const DEFAULT_MAX_ARITY: usize = 3;
/// Largest universe accepted for arity 3.
pub const TERNARY_MAX_SIZE: usize = 4;

/// A stored operation of the reduct and a term of the base algebra
/// realizing it.
#[derive(Debug, Clone)]
pub struct ReductOp {
    pub table: Operation,
    pub term: Term,
}

#[derive(Debug, Clone)]
pub struct BoundedReduct {
    pub base: FiniteAlgebra,
    pub a: Elem,
    pub b: Elem,
    pub label: EdgeLabel,
    /// `a/theta` union `b/theta`, sorted.
    pub relation: Vec<Elem>,
    pub max_arity: usize,
    /// Operations depending on all of their variables, by arity.
    pub operations: Vec<ReductOp>,
    /// Term operations of each arity examined, before filtering.
    pub examined: Vec<usize>,
}

impl BoundedReduct {
    /// The reduct as an algebra whose basic operations are the stored ones.
    pub fn algebra(&self) -> FiniteAlgebra {
        let n = self.base.size();
        let ops: Vec<Operation> = self
            .operations
            .iter()
            .enumerate()
            .map(|(i, o)| Operation::from_table(format!("t{}_{i}", o.table.arity()), o.table.arity(), n, o.table.table().to_vec()))
            .collect();
        FiniteAlgebra::new(format!("{}'", self.base.name()), n, self.base.labels().map(<[String]>::to_vec), ops)
            .expect("term operations of an idempotent algebra form a valid algebra")
    }
}

fn preserves(op: &Operation, r: &[Elem]) -> bool {
    let k = op.arity();
    TupleIter::new(r.len(), k).all(|t| {
        let args: Vec<Elem> = t.iter().map(|&i| r[i]).collect();
        r.binary_search(&op.apply(&args)).is_ok()
    })
}

/// Term operations of arity `1..=m` preserving `R_ab`, where `theta` is a
/// semilattice or majority witness of `ab` (a congruence of `Sg{a, b}`
/// indexed by position in the sorted subuniverse).
pub fn bounded_reduct(
    alg: &FiniteAlgebra,
    a: Elem,
    b: Elem,
    theta: &Congruence,
    m: usize,
    limits: &Limits,
) -> Result<BoundedReduct> {
    let n = alg.size();
    limits.check_size(n)?;
    if m == 0 {
        return Err(Error::PreconditionViolated("arity bound must be positive".into()));
    }
    if m >= 3 && n > TERNARY_MAX_SIZE && !limits.force {
        return Err(Error::TooLarge { size: n, limit: TERNARY_MAX_SIZE });
    }
    let report = classify_pair(alg, a, b, limits)?;
    let w = report
        .witnesses
        .iter()
        .find(|w| &w.theta == theta && matches!(w.label, EdgeLabel::Semilattice | EdgeLabel::Majority))
        .ok_or_else(|| {
            Error::PreconditionViolated(format!(
                "{} does not witness a semilattice or majority edge {},{}",
                report.theta_string(alg, theta),
                alg.label(a),
                alg.label(b)
            ))
        })?;
    let relation = w.union_blocks();
    let mut operations = Vec::new();
    let mut examined = Vec::new();
    for k in 1..=m {
        let len = n.checked_pow(k as u32).ok_or(Error::TooLarge { size: n, limit: TERNARY_MAX_SIZE })?;
        let gens: Vec<Vec<Elem>> = (0..k).map(|i| TupleIter::new(n, k).map(|t| t[i]).collect()).collect();
        debug_assert!(gens.iter().all(|g| g.len() == len));
        let trace = closure(alg, &gens, limits.node_cap)?;
        examined.push(trace.len());
        for i in 0..trace.len() {
            let table = trace.element(i);
            if essential_positions(&table, n, k).len() != k {
                continue;
            }
            let op = Operation::from_table(format!("t{k}_{i}"), k, n, table);
            if preserves(&op, &relation) {
                operations.push(ReductOp { table: op, term: trace.term_at(i) });
            }
        }
    }
    Ok(BoundedReduct { base: alg.clone(), a, b, label: w.label, relation, max_arity: m, operations, examined })
}

/// Re-evaluates every stored term on the base algebra.
pub fn verify_reduct_terms(r: &BoundedReduct) -> Result<Option<usize>> {
    for (i, op) in r.operations.iter().enumerate() {
        if realize_table(&op.term, &r.base)?.table() != op.table.table() || !preserves(&op.table, &r.relation) {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Labels of one pair in the base algebra and in the reduct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairChange {
    pub a: Elem,
    pub b: Elem,
    pub base: Vec<EdgeLabel>,
    pub reduct: Vec<EdgeLabel>,
}

#[derive(Debug, Clone)]
pub struct ReductDiff {
    pub max_arity: usize,
    pub base: StructureGraph,
    pub reduct: StructureGraph,
    /// Pairs whose label sets differ.
    pub changes: Vec<PairChange>,
    /// Pairs with a unary label in the reduct but not in the base.
    pub new_unary: Vec<(Elem, Elem)>,
    pub new_affine: Vec<(Elem, Elem)>,
}

/// Classifies every pair of the reduct and compares with the base.
pub fn reduct_edge_report(r: &BoundedReduct, limits: &Limits) -> Result<ReductDiff> {
    let base = structure_graph(&r.base, limits)?;
    let reduct = structure_graph(&r.algebra(), limits)?;
    let mut changes = Vec::new();
    let mut new_unary = Vec::new();
    let mut new_affine = Vec::new();
    for (x, y) in base.reports.iter().zip(&reduct.reports) {
        let (bl, rl) = (x.labels(), y.labels());
        if bl != rl {
            let (bs, rs): (BTreeSet<_>, BTreeSet<_>) = (bl.iter().collect(), rl.iter().collect());
            if rs.contains(&EdgeLabel::Unary) && !bs.contains(&EdgeLabel::Unary) {
                new_unary.push((x.a, x.b));
            }
            if rs.contains(&EdgeLabel::Affine) && !bs.contains(&EdgeLabel::Affine) {
                new_affine.push((x.a, x.b));
            }
            changes.push(PairChange { a: x.a, b: x.b, base: bl, reduct: rl });
        }
    }
    Ok(ReductDiff { max_arity: r.max_arity, base, reduct, changes, new_unary, new_affine })
}
