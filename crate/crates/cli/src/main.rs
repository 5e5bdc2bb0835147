//! `algedge`: edge structure of finite idempotent algebras from the
//! command line.
//!
//! Exit codes: 0 when everything checked holds, 1 when a verification or
//! construction fails, 2 on bad input, 3 when a node cap was hit.

mod dot;
mod input;
mod report;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use algedge::congruence::{absorbing_elements, congruence_lattice, maximal_congruences};
use algedge::edges::{hypergraph, smoothness_of, structure_graph, Connectivity, EdgeLabel, Smoothness};
use algedge::reduct::{bounded_reduct, reduct_edge_report, verify_reduct_terms, DEFAULT_MAX_ARITY};
use algedge::synth::{build_edge_inventory, uniform_ops, verify_uniform};
use algedge::thin::thin_graph;
use algedge::{classify_pair, fixtures, Error, FiniteAlgebra, Limits, DEFAULT_MAX_SIZE, DEFAULT_NODE_CAP};
use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::input::{algebra_to_toml, input_error, write_atomic, InputError, Source};
use crate::verify::{VerifyOptions, DEFAULT_SEED, DEFAULT_TOLERANCES};

#[derive(Parser)]
#[command(name = "algedge", version, about = "Edges, thin edges and uniform operations of finite idempotent algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Built-in fixture (see `list-fixtures`); may be repeated for `synth`
    /// and `verify`.
    #[arg(long)]
    fixture: Vec<String>,
    /// Algebra file in TOML; may be repeated for `synth` and `verify`.
    #[arg(long)]
    input: Vec<PathBuf>,
    /// Accept universes larger than --max-size.
    #[arg(long)]
    force: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_SIZE)]
    max_size: usize,
    /// Node cap for every closure computation.
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    node_cap: usize,
    /// Write the machine-readable report here.
    #[arg(long)]
    json: Option<PathBuf>,
}

impl Common {
    fn limits(&self) -> Limits {
        Limits { max_size: self.max_size, force: self.force, node_cap: self.node_cap }
    }

    fn sources(&self) -> Vec<Source> {
        self.fixture
            .iter()
            .map(|f| Source::Fixture(f.clone()))
            .chain(self.input.iter().map(|p| Source::File(p.clone())))
            .collect()
    }

    fn single(&self) -> Result<FiniteAlgebra> {
        match self.sources().as_slice() {
            [one] => one.load(),
            [] => Err(input_error("give --fixture NAME or --input FILE")),
            _ => Err(input_error("this command takes exactly one algebra")),
        }
    }

    fn emit(&self, command: &str, body: Value) -> Result<()> {
        if let Some(path) = &self.json {
            let text = serde_json::to_string_pretty(&report::envelope(command, body))?;
            write_atomic(path, &(text + "\n"))?;
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Edges, graphs, congruences, absorption, and (when smooth) the
    /// uniform operations and thin graph of one algebra.
    Analyze(Common),
    /// Classify every pair of elements.
    Edges(Common),
    /// G(A) and H(A), optionally as DOT.
    Graph {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        hyper_dot: Option<PathBuf>,
    },
    /// The thin graph, optionally as DOT.
    Thin {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// The operations f, g, h for a class of algebras.
    Synth(Common),
    /// Term operations of bounded arity preserving the blocks of one edge.
    Reduct {
        #[command(flatten)]
        common: Common,
        /// Element label of the first end of the edge.
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = DEFAULT_MAX_ARITY)]
        max_arity: usize,
        /// Which semilattice or majority witness of the pair to use.
        #[arg(long, default_value_t = 0)]
        witness: usize,
    },
    /// Run the invariant suites (all fixtures when none is named).
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Random tolerances generated per algebra.
        #[arg(long, default_value_t = DEFAULT_TOLERANCES)]
        tolerances: usize,
    },
    /// Write an algebra as TOML.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Names of the built-in fixtures.
    ListFixtures,
}

/// What a command established; anything but `Holds` maps to a nonzero
/// exit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Holds,
    Fails,
    Capped,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Holds) => ExitCode::SUCCESS,
        Ok(Outcome::Fails) => ExitCode::from(1),
        Ok(Outcome::Capped) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.chain().any(|c| c.is::<InputError>()) {
        return 2;
    }
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(Error::CapExceeded { .. }) => 3,
        Some(
            Error::VerificationFailed { .. }
            | Error::PostconditionFailed(_)
            | Error::CaseNotRecognized(_)
            | Error::WitnessNotFound(_)
            | Error::EmptyResult(_),
        ) => 1,
        _ => 2,
    }
}

fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Analyze(c) => analyze(&c),
        Command::Edges(c) => edges(&c),
        Command::Graph { common, dot, hyper_dot } => graph(&common, dot.as_deref(), hyper_dot.as_deref()),
        Command::Thin { common, dot } => thin(&common, dot.as_deref()),
        Command::Synth(c) => synth(&c),
        Command::Reduct { common, a, b, max_arity, witness } => reduct(&common, &a, &b, max_arity, witness),
        Command::Verify { common, seed, tolerances } => verify_cmd(&common, seed, tolerances),
        Command::Export { common, output } => export(&common, output.as_deref()),
        Command::ListFixtures => {
            for name in fixtures::NAMES {
                let a = fixtures::by_name(name).expect("listed fixtures exist");
                let sig: Vec<String> = a.signature().iter().map(|(n, k)| format!("{n}/{k}")).collect();
                println!("{name:<22} {:<8} size {}  {}", a.name(), a.size(), sig.join(" "));
            }
            Ok(Outcome::Holds)
        }
    }
}

fn print_header(alg: &FiniteAlgebra) {
    let sig: Vec<String> = alg.signature().iter().map(|(n, k)| format!("{n}/{k}")).collect();
    println!("{}: {} elements, operations {}", alg.name(), alg.size(), sig.join(" "));
}

fn capped_if(unknown: bool) -> Outcome {
    if unknown {
        Outcome::Capped
    } else {
        Outcome::Holds
    }
}

fn edges(c: &Common) -> Result<Outcome> {
    let alg = c.single()?;
    let limits = c.limits();
    let g = structure_graph(&alg, &limits)?;
    print_header(&alg);
    for r in &g.reports {
        println!("{}", report::edge_line(&alg, r));
    }
    let comps = g.connected_components();
    c.emit("edges", json!({ "algebra": report::algebra(&alg), "graph": report::structure_graph(&alg, &g, &comps) }))?;
    Ok(capped_if(!g.unknown_pairs().is_empty()))
}

fn graph(c: &Common, dot_path: Option<&Path>, hyper_path: Option<&Path>) -> Result<Outcome> {
    let alg = c.single()?;
    let limits = c.limits();
    let g = structure_graph(&alg, &limits)?;
    let h = hypergraph(&alg, &limits)?;
    let (gc, hc) = (g.connected_components(), h.connected_components());
    print_header(&alg);
    println!("G(A): {} typed edges, {}", g.edges().len(), if gc.len() <= 1 { "connected" } else { "disconnected" });
    println!("H(A): {} hyperedges, {}", h.hyperedges.len(), if hc.len() <= 1 { "connected" } else { "disconnected" });
    for label in EdgeLabel::ALL {
        let sub = g.restricted(&[label]);
        if !sub.edges.is_empty() {
            println!("  {label}: {}", sub.edges.iter().map(|&(a, b)| format!("{}{}", alg.label(a), alg.label(b))).collect::<Vec<_>>().join(" "));
        }
    }
    match dot_path {
        Some(p) => write_atomic(p, &dot::structure_graph(&alg, &g))?,
        None if hyper_path.is_none() => print!("{}", dot::structure_graph(&alg, &g)),
        None => {}
    }
    if let Some(p) = hyper_path {
        write_atomic(p, &dot::hypergraph(&alg, &h))?;
    }
    c.emit(
        "graph",
        json!({
            "algebra": report::algebra(&alg),
            "graph": report::structure_graph(&alg, &g, &gc),
            "hypergraph": report::hypergraph(&alg, &h, &hc),
        }),
    )?;
    Ok(capped_if(!g.unknown_pairs().is_empty()))
}

fn thin(c: &Common, dot_path: Option<&Path>) -> Result<Outcome> {
    let alg = c.single()?;
    let limits = c.limits();
    let class = vec![alg.clone()];
    let inv = build_edge_inventory(&class, &limits)?;
    let ops = verify_uniform(&inv, uniform_ops(&inv)?)?;
    let tg = thin_graph(&alg, &ops, &limits)?;
    print_header(&alg);
    for e in &tg.arcs {
        let verdict = if e.necessary == Some(true) { "" } else { "  (fails necessary condition)" };
        println!("{} -> {}  {}  [{}]{verdict}", alg.label(e.a), alg.label(e.b), e.kind, e.certificate);
    }
    match dot_path {
        Some(p) => write_atomic(p, &dot::thin_graph(&alg, &tg))?,
        None => print!("{}", dot::thin_graph(&alg, &tg)),
    }
    c.emit(
        "thin",
        json!({
            "algebra": report::algebra(&alg),
            "operations": report::distinguished(&class, &ops),
            "thin_graph": report::thin_graph(&alg, &tg),
        }),
    )?;
    let ok = tg.arcs.iter().all(|e| e.necessary == Some(true));
    Ok(if ok { Outcome::Holds } else { Outcome::Fails })
}

fn synth(c: &Common) -> Result<Outcome> {
    let class = c.sources().iter().map(Source::load).collect::<Result<Vec<_>>>()?;
    if class.is_empty() {
        return Err(input_error("give at least one --fixture or --input"));
    }
    let limits = c.limits();
    let inv = build_edge_inventory(&class, &limits)?;
    let ops = verify_uniform(&inv, uniform_ops(&inv)?)?;
    println!(
        "class {}: {} semilattice, {} majority, {} affine, {} unary thick edges",
        class.iter().map(|a| a.name()).collect::<Vec<_>>().join(", "),
        inv.semilattice.len(),
        inv.majority.len(),
        inv.affine.len(),
        inv.unary.len()
    );
    for op in [&ops.f, &ops.g, &ops.h] {
        println!("{} = {}  (dag {} nodes)", op.name, op.term.to_short_name(), op.term.dag_size());
        for (a, t) in class.iter().zip(&op.tables) {
            println!("  {}: {:?}", a.name(), t.table());
        }
        let held = op.checks.iter().filter(|k| k.holds()).count();
        println!("  checks {held}/{}", op.checks.len());
    }
    println!("SLS rounds: {}", ops.sls_steps);
    c.emit(
        "synth",
        json!({
            "class": class.iter().map(report::algebra).collect::<Vec<_>>(),
            "operations": report::distinguished(&class, &ops),
        }),
    )?;
    let ok = ops.f.all_hold() && ops.g.all_hold() && ops.h.all_hold();
    Ok(if ok { Outcome::Holds } else { Outcome::Fails })
}

fn reduct(c: &Common, a: &str, b: &str, max_arity: usize, witness: usize) -> Result<Outcome> {
    let alg = c.single()?;
    let limits = c.limits();
    let elem = |l: &str| alg.elem(l).ok_or_else(|| input_error(format!("no element labeled {l:?}")));
    let (ea, eb) = (elem(a)?, elem(b)?);
    if ea == eb {
        return Err(input_error("the two ends of the edge must differ"));
    }
    let report = classify_pair(&alg, ea, eb, &limits)?;
    let candidates: Vec<_> = report
        .witnesses
        .iter()
        .filter(|w| matches!(w.label, EdgeLabel::Semilattice | EdgeLabel::Majority))
        .collect();
    let w = candidates.get(witness).ok_or_else(|| {
        input_error(format!("{a},{b} has {} semilattice or majority witnesses", candidates.len()))
    })?;
    let r = bounded_reduct(&alg, ea, eb, &w.theta, max_arity, &limits)?;
    let diff = reduct_edge_report(&r, &limits)?;
    let bad = verify_reduct_terms(&r)?;
    print_header(&alg);
    println!(
        "edge {a},{b} ({}), theta={}, relation {{{}}}",
        r.label,
        report.theta_string(&alg, &w.theta),
        r.relation.iter().map(|&x| alg.label(x)).collect::<Vec<_>>().join(",")
    );
    println!("arity bound {}; operations examined per arity {:?}; kept {}", r.max_arity, r.examined, r.operations.len());
    if diff.changes.is_empty() {
        println!("no pair changes its labels");
    }
    for ch in &diff.changes {
        println!("  {},{}: {:?} -> {:?}", alg.label(ch.a), alg.label(ch.b), ch.base, ch.reduct);
    }
    println!("new unary edges: {}, new affine edges: {}", diff.new_unary.len(), diff.new_affine.len());
    if let Some(i) = bad {
        println!("stored term {i} does not reproduce its table");
    }
    c.emit("reduct", json!({ "algebra": report::algebra(&alg), "reduct": report::reduct(&r, &diff) }))?;
    Ok(if bad.is_none() { Outcome::Holds } else { Outcome::Fails })
}

fn verify_cmd(c: &Common, seed: u64, tolerances: usize) -> Result<Outcome> {
    let mut items = Vec::new();
    if c.fixture.is_empty() && c.input.is_empty() {
        for name in fixtures::NAMES {
            items.push((fixtures::by_name(name).expect("listed fixtures exist"), Some(name.to_string())));
        }
    }
    for src in c.sources() {
        let name = match &src {
            Source::Fixture(n) => Some(n.clone()),
            Source::File(_) => None,
        };
        items.push((src.load()?, name));
    }
    let opts = VerifyOptions { seed, tolerances, limits: c.limits() };
    let outcomes = verify::run_all(&items, &opts)?;
    for o in &outcomes {
        for s in &o.suites {
            let status = match (&s.skipped, s.passed()) {
                (Some(_), _) => "SKIP",
                (None, true) => "PASS",
                (None, false) => "FAIL",
            };
            println!("{status} {:<22} {:<18} {} checks", o.fixture, s.suite, s.checked);
            if let Some(why) = &s.skipped {
                println!("     {why}");
            }
            for f in s.failures.iter().take(5) {
                println!("     {f}");
            }
            if s.failures.len() > 5 {
                println!("     ... {} more", s.failures.len() - 5);
            }
        }
    }
    let ok = outcomes.iter().all(|o| o.passed());
    println!("{}", if ok { "all suites passed" } else { "some suites failed" });
    c.emit(
        "verify",
        json!({
            "seed": seed,
            "tolerances": tolerances,
            "passed": ok,
            "fixtures": outcomes.iter().map(|o| json!({
                "fixture": o.fixture,
                "passed": o.passed(),
                "suites": o.suites.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        }),
    )?;
    Ok(if ok { Outcome::Holds } else { Outcome::Fails })
}

fn export(c: &Common, output: Option<&Path>) -> Result<Outcome> {
    let alg = c.single()?;
    let text = algebra_to_toml(&alg);
    match output {
        Some(p) => write_atomic(p, &text)?,
        None => print!("{text}"),
    }
    Ok(Outcome::Holds)
}

fn analyze(c: &Common) -> Result<Outcome> {
    let alg = c.single()?;
    let limits = c.limits();
    let g = structure_graph(&alg, &limits)?;
    let h = hypergraph(&alg, &limits)?;
    let (gc, hc) = (g.connected_components(), h.connected_components());
    let lattice = congruence_lattice(&alg, &limits)?;
    let maximal = maximal_congruences(&alg, &limits)?;
    let absorption = absorbing_elements(&alg, &limits)?;
    let smooth = smoothness_of(&alg, &g);

    print_header(&alg);
    println!("congruences: {} ({})", lattice.len(), if lattice.len() == 2 { "simple" } else { "not simple" });
    for r in &g.reports {
        println!("{}", report::edge_line(&alg, r));
    }
    println!("G(A) {}; H(A) {}", connected_word(gc.len()), connected_word(hc.len()));
    let absorbing: Vec<String> = absorption.elements.iter().map(|&x| alg.label(x)).collect();
    println!("absorbing elements: [{}] (checked to arity {})", absorbing.join(","), absorption.checked_arity);

    let mut body = json!({
        "algebra": report::algebra(&alg),
        "congruences": lattice.iter().map(|t| report::congruence(&alg, t)).collect::<Vec<_>>(),
        "maximal_congruences": maximal.iter().map(|t| report::congruence(&alg, t)).collect::<Vec<_>>(),
        "absorbing": report::absorption(&alg, &absorption),
        "graph": report::structure_graph(&alg, &g, &gc),
        "hypergraph": report::hypergraph(&alg, &h, &hc),
    });
    let mut outcome = capped_if(!g.unknown_pairs().is_empty());
    match smooth {
        Smoothness::Smooth => {
            println!("smooth");
            let class = vec![alg.clone()];
            let inv = build_edge_inventory(&class, &limits)?;
            let ops = verify_uniform(&inv, uniform_ops(&inv)?)?;
            let tg = thin_graph(&alg, &ops, &limits)?;
            println!("f = {}", ops.f.term.to_short_name());
            println!("g = {}", ops.g.term.to_short_name());
            println!("h = {}", ops.h.term.to_short_name());
            for e in &tg.arcs {
                println!("thin {} {} -> {}", e.kind, alg.label(e.a), alg.label(e.b));
            }
            if !tg.arcs.iter().all(|e| e.necessary == Some(true)) && outcome == Outcome::Holds {
                outcome = Outcome::Fails;
            }
            body["smooth"] = json!(true);
            body["operations"] = report::distinguished(&class, &ops);
            body["thin_graph"] = report::thin_graph(&alg, &tg);
        }
        Smoothness::Counterexample { a, b, label, blocks } => {
            let blocks: Vec<String> = blocks.iter().map(|&x| alg.label(x)).collect();
            println!("not smooth: {label} edge {},{} has blocks {{{}}} not closed", alg.label(a), alg.label(b), blocks.join(","));
            body["smooth"] = json!(false);
            body["smoothness_counterexample"] =
                json!({ "a": alg.label(a), "b": alg.label(b), "label": label.as_str(), "blocks": blocks });
        }
    }
    c.emit("analyze", body)?;
    Ok(outcome)
}

fn connected_word(components: usize) -> &'static str {
    if components <= 1 {
        "connected"
    } else {
        "disconnected"
    }
}
