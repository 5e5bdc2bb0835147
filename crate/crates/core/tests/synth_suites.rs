mod common;

use algedge::algebra::{product_all, TupleIter};
use algedge::edges::EdgeLabel;
use algedge::synth::{
    build_edge_inventory, normalize_identities, uniform_ops, uniform_ops_for, verify_uniform, EdgeInventory,
    Normalization, SynthesizedOp, ThickEdge,
};
use algedge::term::{check_identity, realize_named, realize_table};
use algedge::thin::{synth_sls, thin_semilattice_order, DistinguishedOps};
use algedge::{fixtures, Elem, FiniteAlgebra, Limits, Operation, Term};

fn lim() -> Limits {
    Limits { max_size: 16, ..Limits::default() }
}

fn on(t: &Term, e: &ThickEdge) -> Operation {
    realize_table(t, &e.quotient).unwrap()
}

fn is_semilattice(op: &Operation, s: &[Elem]) -> bool {
    TupleIter::new(s.len(), 3).all(|i| {
        let (x, y, z) = (s[i[0]], s[i[1]], s[i[2]]);
        let f = |a, b| op.apply(&[a, b]);
        s.contains(&f(x, y)) && f(x, y) == f(y, x) && f(f(x, y), z) == f(x, f(y, z))
    })
}

fn is_majority(op: &Operation, s: &[Elem]) -> bool {
    TupleIter::new(s.len(), 2).all(|i| {
        let (x, y) = (s[i[0]], s[i[1]]);
        op.apply(&[x, x, y]) == x && op.apply(&[x, y, x]) == x && op.apply(&[y, x, x]) == x
    })
}

fn is_maltsev(op: &Operation, s: &[Elem]) -> bool {
    TupleIter::new(s.len(), 2).all(|i| {
        let (x, y) = (s[i[0]], s[i[1]]);
        op.apply(&[x, x, y]) == y && op.apply(&[y, x, x]) == y
    })
}

fn is_first_projection(op: &Operation, s: &[Elem]) -> bool {
    TupleIter::new(s.len(), op.arity()).all(|i| {
        let args: Vec<Elem> = i.iter().map(|&j| s[j]).collect();
        op.apply(&args) == args[0]
    })
}

fn blocks(e: &ThickEdge) -> Vec<Elem> {
    vec![e.qa, e.qb]
}

fn whole(e: &ThickEdge) -> Vec<Elem> {
    (0..e.quotient.size()).collect()
}

/// The conditions of the uniform operations, checked from scratch on every
/// thick edge of the inventory.
fn assert_uniform(inv: &EdgeInventory, ops: &DistinguishedOps) {
    let (f, g, h) = (&ops.f.term, &ops.g.term, &ops.h.term);
    for e in inv.all_edges() {
        let name = inv.describe(e);
        let (ft, gt, ht) = (on(f, e), on(g, e), on(h, e));
        match e.label {
            EdgeLabel::Semilattice => {
                let s = blocks(e);
                assert!(is_semilattice(&ft, &s), "f on {name}");
                for t in TupleIter::new(2, 3) {
                    let [x, y, z] = [s[t[0]], s[t[1]], s[t[2]]];
                    let nest = ft.apply(&[x, ft.apply(&[y, z])]);
                    assert_eq!(gt.apply(&[x, y, z]), nest, "g on {name}");
                    assert_eq!(ht.apply(&[x, y, z]), nest, "h on {name}");
                }
            }
            EdgeLabel::Majority => {
                let s = blocks(e);
                assert!(is_first_projection(&ft, &s), "f on {name}");
                assert!(is_majority(&gt, &s), "g on {name}");
                assert!(is_first_projection(&ht, &s), "h on {name}");
            }
            EdgeLabel::Affine => {
                let s = whole(e);
                assert!(is_first_projection(&ft, &s), "f on {name}");
                assert!(is_first_projection(&gt, &s), "g on {name}");
                assert!(is_maltsev(&ht, &s), "h on {name}");
            }
            EdgeLabel::Unary => {
                let s = whole(e);
                for t in [&ft, &gt, &ht] {
                    assert!(is_first_projection(t, &s), "{name}");
                }
            }
        }
    }
}

fn assert_sls(alg: &FiniteAlgebra, f: &Term) {
    let ft = realize_table(f, alg).unwrap();
    for t in TupleIter::new(alg.size(), 2) {
        let c = ft.apply(&t);
        assert!(
            c == t[0] || (ft.apply(&[t[0], c]) == c && ft.apply(&[c, t[0]]) == c),
            "{}: SLS fails at {t:?}",
            alg.name()
        );
    }
}

#[test]
fn uniform_ops_on_class_k() {
    let t0 = std::time::Instant::now();
    let inv = build_edge_inventory(&fixtures::class_k(), &lim()).unwrap();
    let ops = verify_uniform(&inv, uniform_ops(&inv).unwrap()).unwrap();
    assert!(t0.elapsed().as_secs() < 30);
    assert!(ops.f.all_hold() && ops.g.all_hold() && ops.h.all_hold());
    assert_uniform(&inv, &ops);
    // SL2, MJ2, Z3A in that order
    assert_eq!(ops.f.tables[0].table(), &[0, 0, 0, 1]);
    assert!(ops.f.tables[1].is_projection() && ops.f.tables[2].is_projection());
    for alg in &inv.class {
        assert_sls(alg, &ops.f.term);
    }
}

#[test]
fn uniform_ops_on_each_fixture_and_larger_classes() {
    let mut classes: Vec<Vec<FiniteAlgebra>> = fixtures::all().into_iter().map(|a| vec![a]).collect();
    classes.push(vec![fixtures::sl2(), fixtures::mj2(), fixtures::z3_affine(), fixtures::set2(), fixtures::trivial()]);
    classes.push(vec![fixtures::z3_squared(), fixtures::sl2()]);
    for class in classes {
        let inv = build_edge_inventory(&class, &lim()).unwrap();
        let ops = verify_uniform(&inv, uniform_ops(&inv).unwrap()).unwrap();
        assert_uniform(&inv, &ops);
        for alg in &class {
            assert_sls(alg, &ops.f.term);
        }
    }
}

fn on_algebra(op: &SynthesizedOp, alg: &FiniteAlgebra) -> SynthesizedOp {
    SynthesizedOp {
        name: op.name.clone(),
        term: op.term.clone(),
        tables: vec![realize_named(&op.term, alg, &op.name).unwrap()],
        checks: Vec::new(),
    }
}

#[test]
fn class_operations_agree_with_the_product() {
    let class = fixtures::class_k();
    let p = product_all(&class).unwrap();
    let class_ops = uniform_ops_for(&class, &lim()).unwrap();
    let product_inv = build_edge_inventory(std::slice::from_ref(&p), &lim()).unwrap();
    assert_eq!(
        (product_inv.semilattice.len(), product_inv.majority.len(), product_inv.affine.len()),
        (12, 12, 9)
    );
    // operations built member by member work on the product
    let moved = DistinguishedOps {
        f: on_algebra(&class_ops.f, &p),
        g: on_algebra(&class_ops.g, &p),
        h: on_algebra(&class_ops.h, &p),
        sls_steps: class_ops.sls_steps,
    };
    assert_uniform(&product_inv, &moved);
    let moved = verify_uniform(&product_inv, moved).unwrap();
    assert!(moved.f.all_hold() && moved.g.all_hold() && moved.h.all_hold());
    // and operations built on the product work on each member
    let product_ops = uniform_ops(&product_inv).unwrap();
    let member_inv = build_edge_inventory(&class, &lim()).unwrap();
    assert_uniform(&member_inv, &product_ops);
}

#[test]
fn synthesis_is_deterministic() {
    let class = fixtures::class_k();
    let a = uniform_ops_for(&class, &lim()).unwrap();
    let b = uniform_ops_for(&class, &lim()).unwrap();
    assert_eq!(a.f.term, b.f.term);
    assert_eq!(a.g.term, b.g.term);
    assert_eq!(a.h.term, b.h.term);
    assert_eq!(a.f.term.to_string(), b.f.term.to_string());
    let ne = [fixtures::no_edge()];
    assert_eq!(uniform_ops_for(&ne, &lim()).unwrap().h.term, uniform_ops_for(&ne, &lim()).unwrap().h.term);
}

#[test]
fn normalization_keeps_edge_behaviour() {
    for alg in fixtures::all() {
        let class = vec![alg.clone()];
        let inv = build_edge_inventory(&class, &lim()).unwrap();
        for e in inv.all_edges() {
            let Some(w) = &e.witness else { continue };
            let which = match e.label {
                EdgeLabel::Semilattice => Normalization::BinaryAbsorb,
                EdgeLabel::Majority => Normalization::TernaryAbsorb,
                EdgeLabel::Affine => Normalization::TernaryLeft,
                EdgeLabel::Unary => continue,
            };
            let out = normalize_identities(&class, w, which).unwrap();
            assert!(check_identity(&alg, &which.identity(&out)).unwrap().holds(), "{} {which}", inv.describe(e));
            let t = on(&out, e);
            let ok = match e.label {
                EdgeLabel::Semilattice => is_semilattice(&t, &blocks(e)),
                EdgeLabel::Majority => is_majority(&t, &blocks(e)),
                _ => is_maltsev(&t, &whole(e)),
            };
            assert!(ok, "{} lost its type under {which}", inv.describe(e));
        }
    }
}

#[test]
fn sls_on_every_fixture() {
    for alg in fixtures::all() {
        let class = vec![alg.clone()];
        let inv = build_edge_inventory(&class, &lim()).unwrap();
        let ops = uniform_ops(&inv).unwrap();
        let out = synth_sls(&inv, &ops.f.term).unwrap();
        assert_sls(&alg, &out.term);
        for e in &inv.semilattice {
            assert!(is_semilattice(&on(&out.term, e), &blocks(e)), "{}", inv.describe(e));
        }
        for e in inv.majority.iter().chain(&inv.affine) {
            assert!(is_first_projection(&on(&out.term, e), &e.support()), "{}", inv.describe(e));
        }
        // the thin order is the order of the semilattice operation
        for (a, b) in thin_semilattice_order(&alg, &out.term).unwrap() {
            let f = realize_table(&out.term, &alg).unwrap();
            assert_eq!((f.apply(&[a, b]), f.apply(&[b, a])), (b, b));
        }
    }
}

#[test]
fn sls_from_the_basic_operation_of_the_no_edge_algebra() {
    let ne = fixtures::no_edge();
    let inv = build_edge_inventory(std::slice::from_ref(&ne), &lim()).unwrap();
    let out = synth_sls(&inv, &Term::parse("f(p0, p1)", 2).unwrap()).unwrap();
    assert_sls(&ne, &out.term);
    assert_eq!(thin_semilattice_order(&ne, &out.term).unwrap(), vec![(0, 2), (1, 2)]);
}
