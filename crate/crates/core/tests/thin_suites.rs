mod common;

use algedge::algebra::TupleIter;
use algedge::edges::{structure_graph, EdgeLabel};
use algedge::genclose::sg;
use algedge::synth::{
    affine_pair, affine_stable_ops, build_edge_inventory, majority_triple, mixed_pair, uniform_ops, EdgeInventory,
    StableKind, ThickEdge,
};
use algedge::term::realize_table;
use algedge::thin::{
    check_thin_necessary, find_special_thin_majority, find_thin_affine, thin_graph, DistinguishedOps, ThinEdge, ThinKind,
};
use algedge::{fixtures, Elem, FiniteAlgebra, Limits, Operation, Term};
use rand::seq::SliceRandom;

fn lim() -> Limits {
    Limits { max_size: 16, ..Limits::default() }
}

fn value(t: &Term, alg: &FiniteAlgebra, args: &[Elem]) -> Elem {
    realize_table(t, alg).unwrap().apply(args)
}

fn on(t: &Term, e: &ThickEdge) -> Operation {
    realize_table(t, &e.quotient).unwrap()
}

fn in_sg(alg: &FiniteAlgebra, a: Elem, c: Elem, b: Elem) -> bool {
    sg(alg, &[a, c]).contains(&b)
}

struct Setup {
    inv: EdgeInventory,
    ops: DistinguishedOps,
    arcs: Vec<ThinEdge>,
}

fn setup(class: Vec<FiniteAlgebra>) -> Setup {
    let inv = build_edge_inventory(&class, &lim()).unwrap();
    let ops = uniform_ops(&inv).unwrap();
    let mut arcs = Vec::new();
    for (i, alg) in class.iter().enumerate() {
        let g = thin_graph(alg, &ops, &lim()).unwrap();
        arcs.extend(g.arcs.into_iter().map(|e| e.in_algebra(i)));
    }
    Setup { inv, ops, arcs }
}

impl Setup {
    fn of(&self, kind: ThinKind) -> Vec<&ThinEdge> {
        self.arcs.iter().filter(|e| e.kind == kind).collect()
    }

    fn alg(&self, e: &ThinEdge) -> &FiniteAlgebra {
        &self.inv.class[e.algebra]
    }
}

fn classes() -> Vec<Vec<FiniteAlgebra>> {
    let mut out: Vec<Vec<FiniteAlgebra>> = fixtures::all().into_iter().map(|a| vec![a]).collect();
    out.push(fixtures::class_k());
    out.push(vec![fixtures::sl2(), fixtures::mj2(), fixtures::z3_affine(), fixtures::set2(), fixtures::trivial()]);
    out.push(vec![fixtures::z3_squared(), fixtures::mj2()]);
    out
}

#[test]
fn thick_semilattice_edges_contain_thin_ones() {
    for alg in fixtures::all() {
        let s = setup(vec![alg.clone()]);
        let thin = s.of(ThinKind::ThinSemilattice);
        for r in structure_graph(&alg, &lim()).unwrap().reports {
            for w in r.witnesses.iter().filter(|w| w.label == EdgeLabel::Semilattice) {
                let across = thin.iter().any(|e| {
                    (w.a_block.contains(&e.a) && w.b_block.contains(&e.b))
                        || (w.b_block.contains(&e.a) && w.a_block.contains(&e.b))
                });
                assert!(across, "{}: no thin arc between the blocks of {},{}", alg.name(), r.a, r.b);
            }
        }
    }
}

#[test]
fn thick_majority_and_affine_edges_contain_thin_ones() {
    for alg in fixtures::all() {
        let ops = uniform_ops(&build_edge_inventory(std::slice::from_ref(&alg), &lim()).unwrap()).unwrap();
        for r in structure_graph(&alg, &lim()).unwrap().reports {
            for w in &r.witnesses {
                let found = match w.label {
                    EdgeLabel::Majority => find_special_thin_majority(&alg, &r, w).unwrap(),
                    EdgeLabel::Affine => find_thin_affine(&alg, &r, w, &ops.h.term).unwrap(),
                    _ => continue,
                };
                assert!(!found.is_empty());
                for e in found {
                    let (from, to) = if w.a_block.contains(&e.a) { (&w.a_block, &w.b_block) } else { (&w.b_block, &w.a_block) };
                    assert!(from.contains(&e.a) && to.contains(&e.b), "{}: {e:?}", alg.name());
                    assert!(in_sg(&alg, e.a, e.b, e.b));
                    if e.kind == ThinKind::ThinAffine {
                        assert_eq!(value(&ops.h.term, &alg, &[e.b, e.a, e.a]), e.b);
                    }
                }
            }
        }
    }
}

#[test]
fn every_thin_arc_meets_the_necessary_conditions() {
    for class in classes() {
        let s = setup(class);
        for e in &s.arcs {
            let alg = s.alg(e);
            assert_eq!(e.necessary, Some(true), "{}", e.describe(&s.inv.class));
            assert!(check_thin_necessary(alg, e.a, e.b, e.kind, &s.ops).unwrap());
            // and the same conditions evaluated here
            let (a, b) = (e.a, e.b);
            let ok = match e.kind {
                ThinKind::ThinSemilattice => {
                    value(&s.ops.f.term, alg, &[a, b]) == b && value(&s.ops.f.term, alg, &[b, a]) == b
                }
                ThinKind::SpecialThinMajority => [[a, b, b], [b, a, b], [b, b, a]]
                    .iter()
                    .all(|t| in_sg(alg, a, value(&s.ops.g.term, alg, t), b)),
                ThinKind::ThinAffine => {
                    value(&s.ops.h.term, alg, &[b, a, a]) == b && in_sg(alg, a, value(&s.ops.h.term, alg, &[a, a, b]), b)
                }
            };
            assert!(ok, "{}", e.describe(&s.inv.class));
        }
    }
}

fn majority_on_thick_edges(inv: &EdgeInventory, g: &Term) -> bool {
    inv.majority.iter().all(|e| {
        let t = on(g, e);
        let s = [e.qa, e.qb];
        TupleIter::new(2, 2).all(|i| {
            let (x, y) = (s[i[0]], s[i[1]]);
            t.apply(&[x, x, y]) == x && t.apply(&[x, y, x]) == x && t.apply(&[y, x, x]) == x
        })
    })
}

#[test]
fn majority_triples() {
    let mut rng = common::rng(30);
    let mut done = 0;
    for class in classes() {
        let s = setup(class);
        let maj = s.of(ThinKind::SpecialThinMajority);
        if maj.is_empty() {
            continue;
        }
        for _ in 0..12 {
            let pick: Vec<&ThinEdge> = (0..3).map(|_| *maj.choose(&mut rng).unwrap()).collect();
            let [e1, e2, e3] = [pick[0], pick[1], pick[2]];
            let g = majority_triple(&s.inv, &s.ops, [e1, e2, e3], &lim()).unwrap();
            assert_eq!(value(&g, s.alg(e1), &[e1.a, e1.b, e1.b]), e1.b);
            assert_eq!(value(&g, s.alg(e2), &[e2.b, e2.a, e2.b]), e2.b);
            assert_eq!(value(&g, s.alg(e3), &[e3.b, e3.b, e3.a]), e3.b);
            assert!(majority_on_thick_edges(&s.inv, &g));
            done += 1;
        }
    }
    assert!(done > 0);
}

#[test]
fn affine_pairs() {
    let mut done = 0;
    for class in classes() {
        let s = setup(class);
        let aff = s.of(ThinKind::ThinAffine);
        for e1 in aff.iter().take(8) {
            for e2 in aff.iter().take(8) {
                let h = affine_pair(&s.inv, &s.ops, e1, e2, &lim()).unwrap();
                assert_eq!(value(&h, s.alg(e1), &[e1.b, e1.a, e1.a]), e1.b);
                assert_eq!(value(&h, s.alg(e2), &[e2.a, e2.a, e2.b]), e2.b);
                done += 1;
            }
        }
    }
    assert!(done > 0);
}

#[test]
fn mixed_pairs() {
    let mut rng = common::rng(31);
    let mut done = 0;
    for class in classes() {
        let s = setup(class);
        let mut arcs: Vec<&ThinEdge> = s.arcs.iter().collect();
        arcs.shuffle(&mut rng);
        let arcs = &arcs[..arcs.len().min(12)];
        for e1 in arcs {
            for e2 in arcs.iter().filter(|e| e.kind != e1.kind) {
                let p = mixed_pair(&s.inv, &s.ops, e1, e2, &lim()).unwrap();
                assert_eq!(value(&p, s.alg(e1), &[e1.b, e1.a]), e1.b);
                assert_eq!(value(&p, s.alg(e2), &[e2.a, e2.b]), e2.b);
                done += 1;
            }
        }
    }
    assert!(done > 0);
}

#[test]
fn stable_operations() {
    let mut tab = 0;
    let mut hab = 0;
    for class in classes() {
        let s = setup(class);
        for e in s.of(ThinKind::SpecialThinMajority).into_iter().take(10) {
            let t = affine_stable_ops(&s.inv, &s.ops, e, StableKind::Tab, &lim()).unwrap();
            assert_eq!(value(&t, s.alg(e), &[e.a, e.b]), e.b);
            for q in &s.inv.affine {
                let table = on(&t, q);
                for i in TupleIter::new(q.quotient.size(), 2) {
                    assert_eq!(table.apply(&i), i[0], "t_ab on {}", s.inv.describe(q));
                }
            }
            tab += 1;
        }
        for e in s.of(ThinKind::ThinAffine).into_iter().take(10) {
            let t = affine_stable_ops(&s.inv, &s.ops, e, StableKind::Hab, &lim()).unwrap();
            assert_eq!(value(&t, s.alg(e), &[e.a, e.a, e.b]), e.b);
            for q in &s.inv.affine {
                let table = on(&t, q);
                let n = q.quotient.size();
                for i in TupleIter::new(n, 2) {
                    let (c, d) = (i[0], i[1]);
                    assert_eq!(table.apply(&[d, c, c]), d);
                    let mut image: Vec<Elem> = (0..n).map(|u| table.apply(&[u, c, d])).collect();
                    image.sort_unstable();
                    image.dedup();
                    assert_eq!(image.len(), n, "h_ab(x,{c},{d}) on {}", s.inv.describe(q));
                }
            }
            hab += 1;
        }
    }
    assert!(tab > 0 && hab > 0);
}

#[test]
fn combinations_reject_wrong_kinds() {
    let s = setup(vec![fixtures::z3_affine(), fixtures::mj2()]);
    let aff = s.of(ThinKind::ThinAffine)[0];
    let maj = s.of(ThinKind::SpecialThinMajority)[0];
    assert!(affine_stable_ops(&s.inv, &s.ops, aff, StableKind::Tab, &lim()).is_err());
    assert!(affine_stable_ops(&s.inv, &s.ops, maj, StableKind::Hab, &lim()).is_err());
    assert!(affine_pair(&s.inv, &s.ops, aff, maj, &lim()).is_err());
    assert!(majority_triple(&s.inv, &s.ops, [maj, maj, aff], &lim()).is_err());
    assert!(mixed_pair(&s.inv, &s.ops, aff, aff, &lim()).is_err());
}
