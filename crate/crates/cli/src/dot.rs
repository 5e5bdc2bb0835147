//! Graphviz output.
//!
//! Attribute vocabulary:
//!
//! | type        | `style`  | `color` |
//! |-------------|----------|---------|
//! | semilattice | `solid`  | `black` |
//! | majority    | `dashed` | `blue`  |
//! | affine      | `dotted` | `red`   |
//! | unary       | `bold`   | `gray`  |
//!
//! Each edge also carries `label` set to its type name. A pair with several
//! types gets one parallel edge per type. Thin graphs are digraphs using the
//! same styles, with the certificate in `tooltip`; an arc failing the
//! necessary-condition check gets `fontcolor="red"`. Hypergraphs draw each
//! hyperedge as a `shape=point` node joined to its members.

use std::fmt::Write;

use algedge::edges::{EdgeLabel, Hypergraph, StructureGraph};
use algedge::thin::ThinGraph;
use algedge::FiniteAlgebra;

pub fn style(label: EdgeLabel) -> (&'static str, &'static str) {
    match label {
        EdgeLabel::Semilattice => ("solid", "black"),
        EdgeLabel::Majority => ("dashed", "blue"),
        EdgeLabel::Affine => ("dotted", "red"),
        EdgeLabel::Unary => ("bold", "gray"),
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn header(out: &mut String, kind: &str, alg: &FiniteAlgebra) {
    writeln!(out, "{kind} {} {{", quote(alg.name())).unwrap();
    writeln!(out, "  node [shape=circle];").unwrap();
    for x in 0..alg.size() {
        writeln!(out, "  n{x} [label={}];", quote(&alg.label(x))).unwrap();
    }
}

pub fn structure_graph(alg: &FiniteAlgebra, g: &StructureGraph) -> String {
    let mut out = String::new();
    header(&mut out, "graph", alg);
    for (a, b, l) in g.edges() {
        let (s, c) = style(l);
        writeln!(out, "  n{a} -- n{b} [label={}, style={s}, color={c}];", quote(l.as_str())).unwrap();
    }
    for (a, b) in g.unknown_pairs() {
        writeln!(out, "  // unknown: n{a} -- n{b}").unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn hypergraph(alg: &FiniteAlgebra, h: &Hypergraph) -> String {
    let mut out = String::new();
    header(&mut out, "graph", alg);
    for (i, e) in h.hyperedges.iter().enumerate() {
        writeln!(out, "  e{i} [shape=point];").unwrap();
        for x in e {
            writeln!(out, "  e{i} -- n{x};").unwrap();
        }
    }
    out.push_str("}\n");
    out
}

pub fn thin_graph(alg: &FiniteAlgebra, g: &ThinGraph) -> String {
    let mut out = String::new();
    header(&mut out, "digraph", alg);
    for e in &g.arcs {
        let (s, c) = style(e.kind.label());
        let mut attrs = format!("label={}, style={s}, color={c}, tooltip={}", quote(e.kind.as_str()), quote(&e.certificate));
        if e.necessary == Some(false) {
            attrs.push_str(", fontcolor=\"red\"");
        }
        writeln!(out, "  n{} -> n{} [{attrs}];", e.a, e.b).unwrap();
    }
    out.push_str("}\n");
    out
}

