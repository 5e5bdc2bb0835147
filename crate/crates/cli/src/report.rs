//! JSON renderings of analysis results.
//!
//! Every report is an object with `format_version` and `command` at the
//! top. Terms carry both a short text form and their full DAG listing, so
//! any certificate can be re-evaluated from the report alone.

use algedge::congruence::{Absorption, Congruence};
use algedge::edges::{EdgeReport, EdgeStatus, Hypergraph, StructureGraph};
use algedge::reduct::{BoundedReduct, ReductDiff};
use algedge::synth::SynthesizedOp;
use algedge::thin::{DistinguishedOps, ThinGraph};
use algedge::{Elem, FiniteAlgebra, Term};
use serde_json::{json, Value};

pub const FORMAT_VERSION: u32 = 1;

pub fn envelope(command: &str, body: Value) -> Value {
    let mut out = json!({ "format_version": FORMAT_VERSION, "command": command });
    if let (Value::Object(o), Value::Object(b)) = (&mut out, body) {
        o.extend(b);
    }
    out
}

pub fn algebra(alg: &FiniteAlgebra) -> Value {
    json!({
        "name": alg.name(),
        "size": alg.size(),
        "labels": (0..alg.size()).map(|x| alg.label(x)).collect::<Vec<_>>(),
        "operations": alg.signature().iter().map(|(n, k)| json!({ "name": n, "arity": k })).collect::<Vec<_>>(),
    })
}

pub fn term(t: &Term) -> Value {
    json!({ "text": t.to_short_name(), "arity": t.arity(), "dag": t.to_dag() })
}

fn labels_of(alg: &FiniteAlgebra, xs: &[Elem]) -> Vec<String> {
    xs.iter().map(|&x| alg.label(x)).collect()
}

pub fn congruence(alg: &FiniteAlgebra, theta: &Congruence) -> Value {
    json!(theta.blocks().iter().map(|b| labels_of(alg, b)).collect::<Vec<_>>())
}

pub fn status_str(s: EdgeStatus) -> &'static str {
    match s {
        EdgeStatus::Edge => "edge",
        EdgeStatus::NonEdge => "non-edge",
        EdgeStatus::Unknown => "unknown",
    }
}

pub fn edge_report(alg: &FiniteAlgebra, r: &EdgeReport) -> Value {
    let sub_theta = |theta: &Congruence| {
        json!(theta
            .blocks()
            .iter()
            .map(|b| b.iter().map(|&i| alg.label(r.subalgebra[i])).collect::<Vec<_>>())
            .collect::<Vec<_>>())
    };
    json!({
        "a": alg.label(r.a),
        "b": alg.label(r.b),
        "status": status_str(r.status),
        "labels": r.labels().iter().map(|l| l.as_str()).collect::<Vec<_>>(),
        "subalgebra": labels_of(alg, &r.subalgebra),
        "witnesses": r.witnesses.iter().map(|w| json!({
            "label": w.label.as_str(),
            "theta": sub_theta(&w.theta),
            "a_block": labels_of(alg, &w.a_block),
            "b_block": labels_of(alg, &w.b_block),
            "quotient_size": w.quotient_size,
            "term": w.witness.as_ref().map(term),
            "absorbing": w.absorbing.map(|x| alg.label(x)),
        })).collect::<Vec<_>>(),
        "unlabeled": r.unlabeled.iter().map(|u| json!({
            "theta": sub_theta(&u.theta),
            "quotient_kind": u.kind.to_string(),
            "inconclusive": u.inconclusive,
        })).collect::<Vec<_>>(),
    })
}

fn components(alg: &FiniteAlgebra, comps: &[Vec<Elem>]) -> Value {
    json!(comps.iter().map(|c| labels_of(alg, c)).collect::<Vec<_>>())
}

pub fn structure_graph(alg: &FiniteAlgebra, g: &StructureGraph, comps: &[Vec<Elem>]) -> Value {
    json!({
        "pairs": g.reports.iter().map(|r| edge_report(alg, r)).collect::<Vec<_>>(),
        "edges": g.edges().iter().map(|&(a, b, l)| json!([alg.label(a), alg.label(b), l.as_str()])).collect::<Vec<_>>(),
        "unknown_pairs": g.unknown_pairs().iter().map(|&(a, b)| json!([alg.label(a), alg.label(b)])).collect::<Vec<_>>(),
        "connected": comps.len() <= 1,
        "components": components(alg, comps),
    })
}

pub fn hypergraph(alg: &FiniteAlgebra, h: &Hypergraph, comps: &[Vec<Elem>]) -> Value {
    json!({
        "hyperedges": h.hyperedges.iter().map(|e| labels_of(alg, e)).collect::<Vec<_>>(),
        "connected": comps.len() <= 1,
        "components": components(alg, comps),
    })
}

pub fn absorption(alg: &FiniteAlgebra, a: &Absorption) -> Value {
    json!({ "elements": labels_of(alg, &a.elements), "checked_arity": a.checked_arity })
}

pub fn synthesized(class: &[FiniteAlgebra], op: &SynthesizedOp) -> Value {
    json!({
        "name": op.name,
        "term": term(&op.term),
        "tables": class.iter().zip(&op.tables).map(|(a, t)| json!({ "algebra": a.name(), "table": t.table() })).collect::<Vec<_>>(),
        "checks": op.checks.iter().map(|c| json!({
            "condition": c.condition,
            "edge": c.edge,
            "holds": c.holds(),
            "counterexample": c.counterexample,
        })).collect::<Vec<_>>(),
    })
}

pub fn distinguished(class: &[FiniteAlgebra], ops: &DistinguishedOps) -> Value {
    json!({
        "f": synthesized(class, &ops.f),
        "g": synthesized(class, &ops.g),
        "h": synthesized(class, &ops.h),
        "sls_steps": ops.sls_steps,
    })
}

pub fn thin_graph(alg: &FiniteAlgebra, g: &ThinGraph) -> Value {
    json!({
        "arcs": g.arcs.iter().map(|e| json!({
            "from": alg.label(e.a),
            "to": alg.label(e.b),
            "kind": e.kind.as_str(),
            "certificate": e.certificate,
            "necessary": e.necessary,
        })).collect::<Vec<_>>(),
    })
}

pub fn reduct(r: &BoundedReduct, diff: &ReductDiff) -> Value {
    let alg = &r.base;
    let pair = |&(a, b): &(Elem, Elem)| json!([alg.label(a), alg.label(b)]);
    json!({
        "a": alg.label(r.a),
        "b": alg.label(r.b),
        "label": r.label.as_str(),
        "relation": labels_of(alg, &r.relation),
        "max_arity": r.max_arity,
        "examined": r.examined,
        "operations": r.operations.iter().map(|o| json!({
            "arity": o.table.arity(),
            "table": o.table.table(),
            "term": term(&o.term),
        })).collect::<Vec<_>>(),
        "changes": diff.changes.iter().map(|c| json!({
            "a": alg.label(c.a),
            "b": alg.label(c.b),
            "base": c.base.iter().map(|l| l.as_str()).collect::<Vec<_>>(),
            "reduct": c.reduct.iter().map(|l| l.as_str()).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "new_unary": diff.new_unary.iter().map(pair).collect::<Vec<_>>(),
        "new_affine": diff.new_affine.iter().map(pair).collect::<Vec<_>>(),
    })
}

/// One line per pair, for the terminal.
pub fn edge_line(alg: &FiniteAlgebra, r: &EdgeReport) -> String {
    let mut s = format!("{},{}  {}", alg.label(r.a), alg.label(r.b), status_str(r.status));
    for w in &r.witnesses {
        s.push_str(&format!("\n    {} theta={}", w.label, r.theta_string(alg, &w.theta)));
        if let Some(t) = &w.witness {
            s.push_str(&format!(" term={}", t.to_short_name()));
        }
        if let Some(x) = w.absorbing {
            s.push_str(&format!(" absorbing={}", alg.label(x)));
        }
    }
    if !r.is_edge() {
        for u in &r.unlabeled {
            s.push_str(&format!(
                "\n    no type at theta={} (quotient {}{})",
                r.theta_string(alg, &u.theta),
                u.kind,
                if u.inconclusive { ", cap hit" } else { "" }
            ));
        }
    }
    s
}
