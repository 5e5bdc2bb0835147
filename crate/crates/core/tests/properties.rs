mod common;

use algedge::algebra::TupleIter;
use algedge::congruence::{cg, congruence_lattice, tolerance_ops, Congruence};
use algedge::genclose::{all_subalgebras, sg};
use algedge::term::{eval, realize_table};
use algedge::{product, quotient, Elem, FiniteAlgebra, Limits, Term};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(common::seed()),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn algebra(max_n: usize) -> impl Strategy<Value = FiniteAlgebra> {
    any::<u64>().prop_map(move |s| common::random_algebra(&mut ChaCha8Rng::seed_from_u64(s), max_n))
}

/// Random terms of arity `k` over the symbols of `alg`, including
/// iteration nodes.
fn term(alg: &FiniteAlgebra, k: usize) -> impl Strategy<Value = Term> {
    let sig = alg.signature();
    let leaf = (0..k).prop_map(move |i| Term::proj(k, i));
    leaf.prop_recursive(4, 24, 3, move |inner| {
        let sig = sig.clone();
        let apply = (0..sig.len(), prop::collection::vec(inner.clone(), 3)).prop_map(move |(o, args)| {
            let (name, arity) = &sig[o];
            Term::apply(name, args[..*arity].to_vec())
        });
        let iterate = (inner.clone(), 0..k + 1, 1u64..50).prop_map(move |(body, hole, times)| {
            // the step puts the hole variable where the body had `hole`
            let mut args = Term::vars(k + 1)[..k].to_vec();
            if hole < k {
                args[hole] = Term::proj(k + 1, k);
            }
            let step = body.call(&args);
            Term::iterate(step, body, times)
        });
        prop_oneof![3 => apply, 1 => iterate]
    })
}

fn algebra_and_term(max_n: usize, k: usize) -> impl Strategy<Value = (FiniteAlgebra, Term)> {
    algebra(max_n).prop_flat_map(move |a| {
        let t = term(&a, k);
        (Just(a), t)
    })
}

/// Unrolled evaluation, independent of the library's evaluator.
fn slow_eval(t: &Term, alg: &FiniteAlgebra, args: &[Elem]) -> Elem {
    if let Some(i) = t.projection_index() {
        return args[i];
    }
    let dag = t.to_dag();
    match dag.last().unwrap() {
        algedge::DagNode::Iterate { times, .. } => {
            let ch = t.children();
            let (step, seed) = (&ch[0], &ch[1]);
            let mut v = slow_eval(seed, alg, args);
            for _ in 0..*times {
                let mut ext = args.to_vec();
                ext.push(v);
                v = slow_eval(step, alg, &ext);
            }
            v
        }
        _ => {
            let vals: Vec<Elem> = t.children().iter().map(|c| slow_eval(c, alg, args)).collect();
            alg.op_by_name(t.symbol().unwrap()).unwrap().apply(&vals)
        }
    }
}

fn is_closed(alg: &FiniteAlgebra, s: &[Elem]) -> bool {
    alg.operations()
        .iter()
        .all(|op| TupleIter::new(s.len(), op.arity()).all(|t| s.contains(&op.apply(&t.iter().map(|&i| s[i]).collect::<Vec<_>>()))))
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn evaluation_matches_unrolled((alg, t) in algebra_and_term(3, 2)) {
        let table = realize_table(&t, &alg).unwrap();
        for args in TupleIter::new(alg.size(), 2) {
            let v = slow_eval(&t, &alg, &args);
            prop_assert_eq!(eval(&t, &alg, &args).unwrap(), v);
            prop_assert_eq!(table.apply(&args), v);
        }
    }

    #[test]
    fn terms_print_parse_and_list((_alg, t) in algebra_and_term(2, 3)) {
        prop_assert_eq!(Term::parse(&t.to_string(), 3).unwrap(), t.clone());
        prop_assert_eq!(Term::from_dag(&t.to_dag()).unwrap(), t);
    }

    #[test]
    fn term_operations_are_idempotent((alg, t) in algebra_and_term(4, 3)) {
        let table = realize_table(&t, &alg).unwrap();
        prop_assert!(table.is_idempotent());
    }

    #[test]
    fn sg_is_the_least_subuniverse(alg in algebra(4), mask in 1u32..16) {
        let s: Vec<Elem> = (0..alg.size()).filter(|&x| mask & (1 << x) != 0).collect();
        prop_assume!(!s.is_empty());
        let b = sg(&alg, &s);
        prop_assert!(s.iter().all(|x| b.contains(x)));
        prop_assert!(is_closed(&alg, &b));
        for sub in all_subalgebras(&alg, &Limits::default()).unwrap() {
            if s.iter().all(|x| sub.contains(x)) {
                prop_assert!(b.iter().all(|x| sub.contains(x)));
            }
        }
    }

    #[test]
    fn cg_is_the_least_congruence(alg in algebra(4), x in 0usize..4, y in 0usize..4) {
        let (x, y) = (x % alg.size(), y % alg.size());
        let theta = cg(&alg, &[(x, y)]);
        prop_assert!(theta.is_congruence_of(&alg));
        prop_assert!(theta.related(x, y));
        let lattice = congruence_lattice(&alg, &Limits::default()).unwrap();
        prop_assert!(lattice.contains(&theta));
        for c in lattice.iter().filter(|c| c.related(x, y)) {
            prop_assert!(theta.leq(c));
        }
    }

    #[test]
    fn congruence_lattice_is_closed(alg in algebra(4)) {
        let lattice = congruence_lattice(&alg, &Limits::default()).unwrap();
        for a in &lattice {
            for b in &lattice {
                prop_assert!(lattice.contains(&a.meet(b)));
                // the join of congruences in Eq(A) is again a congruence
                prop_assert!(lattice.contains(&a.join(b)));
                prop_assert_eq!(a.meet(b).leq(a), true);
                prop_assert_eq!(a.leq(&a.join(b)), true);
            }
        }
    }

    #[test]
    fn tolerance_classes_are_subuniverses(alg in algebra(4), pairs in prop::collection::vec((0usize..4, 0usize..4), 1..3)) {
        let pairs: Vec<(Elem, Elem)> = pairs.iter().map(|&(x, y)| (x % alg.size(), y % alg.size())).collect();
        let (tol, classes) = tolerance_ops(&alg, &pairs);
        prop_assert!(tol.is_reflexive() && tol.is_symmetric() && tol.is_compatible(&alg));
        let mut covered = vec![false; alg.size()];
        for c in &classes {
            prop_assert!(is_closed(&alg, c));
            for &x in c {
                covered[x] = true;
                prop_assert!(c.iter().all(|&y| tol.related(x, y)));
            }
            // maximal clique
            for z in (0..alg.size()).filter(|z| !c.contains(z)) {
                prop_assert!(!c.iter().all(|&y| tol.related(z, y)));
            }
        }
        prop_assert!(covered.iter().all(|&c| c));
    }

    #[test]
    fn quotient_map_is_a_homomorphism(alg in algebra(4), x in 0usize..4, y in 0usize..4) {
        let theta = cg(&alg, &[(x % alg.size(), y % alg.size())]);
        let (q, map) = quotient(&alg, &theta).unwrap();
        prop_assert_eq!(q.size(), theta.num_blocks());
        for (op, qop) in alg.operations().iter().zip(q.operations()) {
            for t in TupleIter::new(alg.size(), op.arity()) {
                let image: Vec<Elem> = t.iter().map(|&e| map[e]).collect();
                prop_assert_eq!(map[op.apply(&t)], qop.apply(&image));
            }
        }
    }

    #[test]
    fn product_kernels_are_congruences(a in algebra(3), seed in any::<u64>()) {
        // a second algebra of the same signature
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 2;
        let ops = a
            .signature()
            .iter()
            .map(|(name, k)| common::random_op(&mut rng, name, *k, n))
            .collect();
        let b = FiniteAlgebra::new("B", n, None, ops).unwrap();
        let p = product(&a, &b).unwrap();
        let k1 = Congruence::kernel(&(0..p.size()).map(|x| x / n).collect::<Vec<_>>());
        let k2 = Congruence::kernel(&(0..p.size()).map(|x| x % n).collect::<Vec<_>>());
        prop_assert!(k1.is_congruence_of(&p) && k2.is_congruence_of(&p));
        prop_assert!(k1.meet(&k2).is_equality());
    }
}
