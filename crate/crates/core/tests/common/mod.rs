//! Helpers shared by the integration tests: seeds, random algebras and the
//! independent oracles the library is compared against.
#![allow(dead_code)]

use std::collections::HashSet;

use algedge::algebra::TupleIter;
use algedge::{Elem, FiniteAlgebra, Operation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x5eed_0001;

/// `ALGEDGE_SEED` overrides the fixed default.
pub fn seed() -> u64 {
    std::env::var("ALGEDGE_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED)
}

pub fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed() ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// A random idempotent table.
pub fn random_op(rng: &mut ChaCha8Rng, name: &str, arity: usize, n: usize) -> Operation {
    Operation::from_fn(name, arity, n, |t| if t.iter().all(|&x| x == t[0]) { t[0] } else { rng.gen_range(0..n) })
}

/// `sum c_i x_i mod n` with coefficients summing to 1.
pub fn affine_op(rng: &mut ChaCha8Rng, name: &str, arity: usize, n: usize) -> Operation {
    let mut c: Vec<usize> = (0..arity - 1).map(|_| rng.gen_range(0..n)).collect();
    let s: usize = c.iter().sum();
    c.push((1 + n * arity - s % n) % n);
    Operation::from_fn(name, arity, n, |t| t.iter().zip(&c).map(|(x, k)| x * k).sum::<usize>() % n)
}

/// Random idempotent algebra of size `2..=max_n` with one or two
/// operations. A third of the draws use affine operations over `Z_n`, a
/// sixth use projections, so abelian algebras turn up regularly.
pub fn random_algebra(rng: &mut ChaCha8Rng, max_n: usize) -> FiniteAlgebra {
    let n = rng.gen_range(2..=max_n);
    let count = rng.gen_range(1..=2);
    let style = rng.gen_range(0..6);
    let ops = (0..count)
        .map(|i| {
            let arity = rng.gen_range(2..=3);
            let name = format!("o{i}");
            match style {
                0 | 1 => affine_op(rng, &name, arity, n),
                2 => {
                    let p = rng.gen_range(0..arity);
                    Operation::projection(name, arity, n, p)
                }
                _ => random_op(rng, &name, arity, n),
            }
        })
        .collect();
    FiniteAlgebra::new("R", n, None, ops).expect("random tables are valid")
}

/// Closure of `generators` (each a tuple over `A`) under coordinatewise
/// application of the basic operations, computed round by round: each
/// round applies every operation to every argument vector that uses an
/// element found in the previous round. Gives up once more than `budget`
/// operation applications were spent.
pub fn naive_closure(alg: &FiniteAlgebra, generators: &[Vec<Elem>], budget: u64) -> Option<HashSet<Vec<Elem>>> {
    let n = alg.size();
    let k = generators.first().map_or(0, Vec::len);
    let code = |t: &[Elem]| t.iter().fold(0usize, |acc, &x| acc * n + x);
    let mut member = vec![false; n.pow(k as u32)];
    // flat storage, k entries per tuple
    let mut all: Vec<Elem> = Vec::new();
    for g in generators {
        if !member[code(g)] {
            member[code(g)] = true;
            all.extend_from_slice(g);
        }
    }
    let mut spent = 0u64;
    let mut old = 0;
    let mut t = vec![0; k];
    while old < all.len() / k.max(1) {
        let frontier = all.len() / k.max(1);
        let mut fresh: Vec<Elem> = Vec::new();
        for op in alg.operations() {
            let r = op.arity();
            let table = op.table();
            // p is the first position holding an element of the last
            // round: earlier positions range over older elements, later
            // ones over everything
            for p in 0..r {
                let lo = |j: usize| if j == p { old } else { 0 };
                let hi = |j: usize| if j < p { old } else { frontier };
                if (0..r).any(|j| lo(j) >= hi(j)) {
                    continue;
                }
                let mut idx: Vec<usize> = (0..r).map(lo).collect();
                'combos: loop {
                    spent += 1;
                    if spent > budget {
                        return None;
                    }
                    for (c, v) in t.iter_mut().enumerate() {
                        *v = table[idx.iter().fold(0, |acc, &i| acc * n + all[i * k + c])];
                    }
                    let m = code(&t);
                    if !member[m] {
                        member[m] = true;
                        fresh.extend_from_slice(&t);
                    }
                    let mut j = r;
                    loop {
                        if j == 0 {
                            break 'combos;
                        }
                        j -= 1;
                        idx[j] += 1;
                        if idx[j] < hi(j) {
                            break;
                        }
                        idx[j] = lo(j);
                    }
                }
            }
        }
        old = frontier;
        all.extend(fresh);
    }
    if k == 0 {
        return Some(HashSet::from([Vec::new()]));
    }
    Some(all.chunks(k).map(<[Elem]>::to_vec).collect())
}

/// All ternary term operations of `alg` as tables, generated from the
/// projections, checking the term condition on each as it appears.
/// `Some(true)` when the whole ternary clone satisfies it, `Some(false)` on
/// the first failure, `None` when more than `cap` operations were produced
/// without a failure.
pub fn term_condition_up_to_3(alg: &FiniteAlgebra, cap: usize) -> Option<bool> {
    let n = alg.size();
    let rows: Vec<Vec<Elem>> = TupleIter::new(n, 3).collect();
    let proj: Vec<Vec<Elem>> = (0..3).map(|i| rows.iter().map(|t| t[i]).collect()).collect();
    let mut seen: HashSet<Vec<Elem>> = HashSet::new();
    let mut all: Vec<Vec<Elem>> = Vec::new();
    for p in proj {
        if seen.insert(p.clone()) {
            all.push(p);
        }
    }
    let mut checked = 0;
    loop {
        while checked < all.len() {
            if !term_condition(&all[checked], n) {
                return Some(false);
            }
            checked += 1;
        }
        let before = all.len();
        for op in alg.operations() {
            let r = op.arity();
            for idx in TupleIter::new(before, r) {
                let t: Vec<Elem> = (0..rows.len())
                    .map(|c| {
                        let args: Vec<Elem> = idx.iter().map(|&i| all[i][c]).collect();
                        op.apply(&args)
                    })
                    .collect();
                if seen.insert(t.clone()) {
                    all.push(t);
                    if all.len() > cap {
                        return None;
                    }
                }
            }
        }
        if all.len() == before {
            return Some(true);
        }
    }
}

/// `t(x, u) = t(x, v)` implies `t(y, u) = t(y, v)` for every split of the
/// three variables into a nonempty `x` part and a nonempty rest.
fn term_condition(table: &[Elem], n: usize) -> bool {
    let at = |t: [Elem; 3]| table[(t[0] * n + t[1]) * n + t[2]];
    for mask in 1..7u32 {
        let xs: Vec<usize> = (0..3).filter(|i| mask & (1 << i) != 0).collect();
        let us: Vec<usize> = (0..3).filter(|i| mask & (1 << i) == 0).collect();
        let fill = |x: &[Elem], u: &[Elem]| {
            let mut t = [0; 3];
            for (p, v) in xs.iter().zip(x) {
                t[*p] = *v;
            }
            for (p, v) in us.iter().zip(u) {
                t[*p] = *v;
            }
            t
        };
        let xt: Vec<Vec<Elem>> = TupleIter::new(n, xs.len()).collect();
        let ut: Vec<Vec<Elem>> = TupleIter::new(n, us.len()).collect();
        for u in &ut {
            for v in &ut {
                let agree: Vec<bool> = xt.iter().map(|x| at(fill(x, u)) == at(fill(x, v))).collect();
                if agree.iter().any(|&a| a) && agree.iter().any(|&a| !a) {
                    return false;
                }
            }
        }
    }
    true
}
