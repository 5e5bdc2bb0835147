//! The invariant suites run by `verify`.

use std::collections::BTreeSet;

use algedge::algebra::is_isomorphic;
use algedge::congruence::{congruence_lattice, maximal_congruences, tolerance_ops, Congruence};
use algedge::edges::{
    classify_pair, structure_graph, x_connected, Connectivity, EdgeLabel, EdgeStatus, StructureGraph, XConnectivity,
};
use algedge::genclose::{all_subalgebras, find_pair_witness, PairWitness, WitnessKind};
use algedge::synth::uniform_ops_for;
use algedge::thin::{find_special_thin_majority, find_thin_affine, thin_graph};
use algedge::{fixtures, quotient, restrict, validate_algebra, Elem, Error, FiniteAlgebra, Limits};
use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::input::{algebra_to_toml, parse_algebra_toml};

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_TOLERANCES: usize = 200;

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub suite: &'static str,
    pub checked: usize,
    pub failures: Vec<String>,
    pub skipped: Option<String>,
}

impl SuiteOutcome {
    fn new(suite: &'static str) -> Self {
        SuiteOutcome { suite, checked: 0, failures: Vec::new(), skipped: None }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "checked": self.checked,
            "passed": self.passed(),
            "skipped": self.skipped,
            "failures": self.failures,
        })
    }
}

#[derive(Debug, Clone)]
pub struct FixtureOutcome {
    pub fixture: String,
    pub suites: Vec<SuiteOutcome>,
}

impl FixtureOutcome {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteOutcome::passed)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    pub tolerances: usize,
    pub limits: Limits,
}

struct Ctx<'a> {
    alg: &'a FiniteAlgebra,
    graph: StructureGraph,
    limits: Limits,
}

impl Ctx<'_> {
    fn labels(&self, a: Elem, b: Elem) -> Vec<EdgeLabel> {
        self.graph.report(a, b).map(|r| r.labels()).unwrap_or_default()
    }

    fn pair(&self, a: Elem, b: Elem) -> String {
        format!("{},{}", self.alg.label(a), self.alg.label(b))
    }
}

/// Runs every suite on one algebra. `fixture` names a built-in fixture
/// whose published claims should be checked as well.
pub fn run_suites(alg: &FiniteAlgebra, fixture: Option<&str>, opts: &VerifyOptions) -> Result<FixtureOutcome> {
    let limits = opts.limits;
    let graph = structure_graph(alg, &limits)?;
    let cx = Ctx { alg, graph, limits };
    let mut suites = vec![
        round_trip(alg),
        congruences(&cx)?,
        connectedness(&cx)?,
        label_exclusivity(&cx),
        many_edges(&cx),
        edge_subalgebra(&cx)?,
        edge_factor(&cx)?,
        tolerances(alg, opts.seed, opts.tolerances),
        synth_thin(&cx)?,
    ];
    if let Some(name) = fixture {
        if let Some(s) = published_claims(&cx, name)? {
            suites.push(s);
        }
    }
    Ok(FixtureOutcome { fixture: fixture.unwrap_or(alg.name()).to_string(), suites })
}

fn round_trip(alg: &FiniteAlgebra) -> SuiteOutcome {
    let mut s = SuiteOutcome::new("round-trip");
    let text = algebra_to_toml(alg);
    match parse_algebra_toml(&text) {
        Ok(raw) => {
            s.check(raw == alg.to_raw(), || "parsed file differs from the serialized one".into());
            match validate_algebra(&raw) {
                Ok(back) => {
                    s.check(&back == alg, || "validated algebra differs".into());
                    s.check(algebra_to_toml(&back) == text, || "second serialization differs".into());
                }
                Err(e) => s.check(false, || format!("serialized file does not validate: {e}")),
            }
        }
        Err(e) => s.check(false, || format!("serialized file does not parse: {e}")),
    }
    s
}

fn congruences(cx: &Ctx<'_>) -> Result<SuiteOutcome> {
    let mut s = SuiteOutcome::new("congruences");
    let n = cx.alg.size();
    let lattice = congruence_lattice(cx.alg, &cx.limits)?;
    for c in &lattice {
        s.check(c.is_congruence_of(cx.alg), || format!("{c} is not compatible"));
    }
    s.check(lattice.contains(&Congruence::equality(n)), || "equality missing".into());
    s.check(lattice.contains(&Congruence::total(n)), || "total relation missing".into());
    for m in maximal_congruences(cx.alg, &cx.limits)? {
        s.check(!m.is_total() && lattice.contains(&m), || format!("{m} is not a proper congruence"));
        let above = lattice.iter().filter(|c| m.leq(c) && **c != m && !c.is_total()).count();
        s.check(above == 0, || format!("{m} is not maximal"));
    }
    Ok(s)
}

fn connectedness(cx: &Ctx<'_>) -> Result<SuiteOutcome> {
    let mut s = SuiteOutcome::new("connectedness");
    match x_connected(cx.alg, &EdgeLabel::ALL, &cx.limits)? {
        XConnectivity::Connected => s.check(true, String::new),
        XConnectivity::Counterexample { subalgebra, a, b } => s.check(false, || {
            format!("G(B) disconnected for B={:?} between {}", subalgebra, cx.pair(a, b))
        }),
    }
    Ok(s)
}

fn label_exclusivity(cx: &Ctx<'_>) -> SuiteOutcome {
    let mut s = SuiteOutcome::new("label-exclusivity");
    for r in &cx.graph.reports {
        for w in r.witnesses.iter().filter(|w| w.label == EdgeLabel::Semilattice) {
            let clash = r.witnesses.iter().any(|v| v.label == EdgeLabel::Majority && v.theta == w.theta);
            s.check(!clash, || format!("{}: semilattice and majority for one theta", cx.pair(r.a, r.b)));
        }
    }
    s
}

fn many_edges(cx: &Ctx<'_>) -> SuiteOutcome {
    let mut s = SuiteOutcome::new("many-edges");
    for r in &cx.graph.reports {
        for w in &r.witnesses {
            for &c in &w.a_block {
                for &d in &w.b_block {
                    let labels = cx.labels(c, d);
                    s.check(labels.contains(&w.label), || {
                        format!("{} is {} but {} is {:?}", cx.pair(r.a, r.b), w.label, cx.pair(c, d), labels)
                    });
                }
            }
        }
    }
    s
}

fn edge_subalgebra(cx: &Ctx<'_>) -> Result<SuiteOutcome> {
    let mut s = SuiteOutcome::new("edge-subalgebra");
    for sub in all_subalgebras(cx.alg, &cx.limits)? {
        if sub.len() < 2 || sub.len() == cx.alg.size() {
            continue;
        }
        let (b, emb) = restrict(cx.alg, &sub)?;
        for i in 0..b.size() {
            for j in i + 1..b.size() {
                let inner = classify_pair(&b, i, j, &cx.limits)?.labels();
                let outer = cx.labels(emb[i], emb[j]);
                s.check(inner == outer, || {
                    format!("{} in {:?}: {:?} inside, {:?} in A", cx.pair(emb[i], emb[j]), sub, inner, outer)
                });
            }
        }
    }
    Ok(s)
}

fn edge_factor(cx: &Ctx<'_>) -> Result<SuiteOutcome> {
    let mut s = SuiteOutcome::new("edge-factor");
    let n = cx.alg.size();
    for alpha in congruence_lattice(cx.alg, &cx.limits)? {
        if alpha.is_equality() || alpha.is_total() {
            continue;
        }
        let (q, map) = quotient(cx.alg, &alpha)?;
        let qg = structure_graph(&q, &cx.limits)?;
        for r in &qg.reports {
            for l in r.labels() {
                for a in (0..n).filter(|&a| map[a] == r.a) {
                    for b in (0..n).filter(|&b| map[b] == r.b) {
                        let labels = cx.labels(a, b);
                        s.check(labels.contains(&l), || {
                            format!("modulo {alpha}: blocks are {l} but {} is {:?}", cx.pair(a, b), labels)
                        });
                    }
                }
            }
        }
    }
    Ok(s)
}

/// Generates tolerances from random pairs and checks that each class is a
/// subuniverse.
pub fn tolerances(alg: &FiniteAlgebra, seed: u64, count: usize) -> SuiteOutcome {
    let mut s = SuiteOutcome::new("tolerances");
    let n = alg.size();
    if n < 2 {
        s.skipped = Some("one element".into());
        return s;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let k = rng.gen_range(1..=2);
        let pairs: Vec<(Elem, Elem)> = (0..k).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
        let (tol, classes) = tolerance_ops(alg, &pairs);
        s.check(tol.is_reflexive() && tol.is_symmetric() && tol.is_compatible(alg), || {
            format!("tolerance from {pairs:?} is not a compatible tolerance")
        });
        s.check(pairs.iter().all(|&(x, y)| tol.related(x, y)), || format!("{pairs:?} not contained"));
        for c in &classes {
            s.check(alg.is_subuniverse(c), || format!("class {c:?} of the tolerance from {pairs:?} is not closed"));
        }
    }
    s
}

fn synth_thin(cx: &Ctx<'_>) -> Result<SuiteOutcome> {
    let mut s = SuiteOutcome::new("synth-thin");
    let alg = cx.alg;
    let ops = match uniform_ops_for(std::slice::from_ref(alg), &cx.limits) {
        Ok(ops) => ops,
        Err(Error::NotSmooth { a, b, .. }) => {
            s.skipped = Some(format!("not smooth at {}", cx.pair(a, b)));
            return Ok(s);
        }
        Err(e @ Error::CapExceeded { .. }) => return Err(e.into()),
        Err(e) => {
            s.check(false, || format!("synthesis failed: {e}"));
            return Ok(s);
        }
    };
    for op in [&ops.f, &ops.g, &ops.h] {
        for c in &op.checks {
            s.check(c.holds(), || format!("{}: {} on {} at {:?}", op.name, c.condition, c.edge, c.counterexample));
        }
    }
    let f = &ops.f.tables[0];
    let n = alg.size();
    for a in 0..n {
        for b in 0..n {
            let c = f.apply(&[a, b]);
            let ok = c == a || (f.apply(&[a, c]) == c && f.apply(&[c, a]) == c);
            s.check(ok, || format!("SLS fails at {}", cx.pair(a, b)));
        }
    }
    for r in &cx.graph.reports {
        for w in &r.witnesses {
            let found = match w.label {
                EdgeLabel::Majority => find_special_thin_majority(alg, r, w)?.len(),
                EdgeLabel::Affine => find_thin_affine(alg, r, w, &ops.h.term)?.len(),
                _ => continue,
            };
            s.check(found > 0, || format!("no thin {} edge inside {}", w.label, cx.pair(r.a, r.b)));
        }
    }
    let thin = thin_graph(alg, &ops, &cx.limits)?;
    for e in &thin.arcs {
        s.check(e.necessary == Some(true), || {
            format!("thin {} arc {} fails the necessary condition", e.kind, cx.pair(e.a, e.b))
        });
    }
    Ok(s)
}

fn label_set(g: &StructureGraph) -> BTreeSet<EdgeLabel> {
    g.edges().into_iter().map(|(_, _, l)| l).collect()
}

/// Claims stated for the built-in fixtures.
fn published_claims(cx: &Ctx<'_>, name: &str) -> Result<Option<SuiteOutcome>> {
    let mut s = SuiteOutcome::new("published-claims");
    let g = &cx.graph;
    let alg = cx.alg;
    let only = |s: &mut SuiteOutcome, label: EdgeLabel| {
        for r in &g.reports {
            s.check(r.labels() == vec![label], || format!("{} is {:?}, expected {label}", cx.pair(r.a, r.b), r.labels()));
        }
    };
    match name {
        "no-edge" => {
            let (a, b, c) = (0, 1, 2);
            s.check(cx.labels(a, c) == vec![EdgeLabel::Semilattice], || "ac is not a semilattice edge".into());
            s.check(cx.labels(b, c) == vec![EdgeLabel::Semilattice], || "bc is not a semilattice edge".into());
            let ab = g.report(a, b).map(|r| r.status);
            s.check(ab == Some(EdgeStatus::NonEdge), || format!("ab status {ab:?}"));
            s.check(congruence_lattice(alg, &cx.limits)?.len() == 2, || "not simple".into());
            s.check(g.connected_components().len() == 1, || "G(A) not connected".into());
        }
        "no-edge-factor" => {
            let (a0, b1) = (0, 3);
            let pi1 = Congruence::kernel(&(0..alg.size()).map(|p| p / 2).collect::<Vec<_>>());
            let pi2 = Congruence::kernel(&(0..alg.size()).map(|p| p % 2).collect::<Vec<_>>());
            let r = classify_pair(alg, a0, b1, &cx.limits)?;
            let via_pi2 = r.witnesses.iter().any(|w| {
                w.label == EdgeLabel::Majority
                    && w.a_block.iter().all(|&x| pi2.related(x, a0))
                    && w.b_block.iter().all(|&x| pi2.related(x, b1))
            });
            s.check(via_pi2, || "(a,0),(b,1) is not majority through the second kernel".into());
            let (q1, map) = quotient(alg, &pi1)?;
            let qr = classify_pair(&q1, map[a0], map[b1], &cx.limits)?;
            s.check(!qr.is_edge(), || format!("image modulo the first kernel is {:?}", qr.labels()));
            s.check(is_isomorphic(&q1, &fixtures::no_edge_prime())?, || "C/pi1 is not isomorphic to A'".into());
        }
        "no-majority-symmetry" => {
            let theta = Congruence::from_blocks(4, &[vec![0, 2], vec![1, 3]]);
            let maximal = maximal_congruences(alg, &cx.limits)?;
            s.check(maximal.contains(&theta), || "{0,2|1,3} is not a maximal congruence".into());
            for a in [0, 2] {
                for b in [1, 3] {
                    let r = g.report(a, b).expect("all pairs classified");
                    let witnessed = r.witnesses.iter().any(|w| {
                        w.label == EdgeLabel::Majority && w.a_block == theta.class(r.a) && w.b_block == theta.class(r.b)
                    });
                    s.check(witnessed, || format!("{} is not majority through {{0,2|1,3}}", cx.pair(a, b)));
                    let pw = find_pair_witness(alg, WitnessKind::Majority, a, b, cx.limits.node_cap);
                    s.check(matches!(pw, PairWitness::Absent { .. }), || match pw.term() {
                        Some(t) => format!("{} has a majority term {}", cx.pair(a, b), t.to_short_name()),
                        None => format!("{}: search inconclusive", cx.pair(a, b)),
                    });
                }
            }
        }
        "z3-affine" => only(&mut s, EdgeLabel::Affine),
        "sl2" => only(&mut s, EdgeLabel::Semilattice),
        "mj2" => only(&mut s, EdgeLabel::Majority),
        "set2" => only(&mut s, EdgeLabel::Unary),
        "z3-squared" => {
            let labels = label_set(g);
            s.check(labels == BTreeSet::from([EdgeLabel::Affine]), || format!("labels {labels:?}"));
        }
        _ => return Ok(None),
    }
    Ok(Some(s))
}

/// Runs the suites on several algebras, one thread each.
pub fn run_all(items: &[(FiniteAlgebra, Option<String>)], opts: &VerifyOptions) -> Result<Vec<FixtureOutcome>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .iter()
            .map(|(alg, name)| scope.spawn(move || run_suites(alg, name.as_deref(), opts)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("suite thread panicked")).collect()
    })
}
