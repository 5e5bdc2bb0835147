//! Small algebras used throughout the tests and by the command line tool.
//!
//! `sl2`, `mj2`, `z3_affine`, `set2` and `trivial` share the signature
//! `f/2, g/3, h/3` so that they can be combined into one class; operations
//! not mentioned in their description are first projections.

use crate::algebra::{product, Elem, FiniteAlgebra, Operation};

fn alg(name: &str, size: usize, labels: Option<&[&str]>, ops: Vec<Operation>) -> FiniteAlgebra {
    let labels = labels.map(|l| l.iter().map(|s| s.to_string()).collect());
    FiniteAlgebra::new(name, size, labels, ops).expect("fixture tables are valid")
}

fn fgh(
    name: &str,
    size: usize,
    f: impl FnMut(&[Elem]) -> Elem,
    g: impl FnMut(&[Elem]) -> Elem,
    h: impl FnMut(&[Elem]) -> Elem,
) -> FiniteAlgebra {
    alg(
        name,
        size,
        None,
        vec![
            Operation::from_fn("f", 2, size, f),
            Operation::from_fn("g", 3, size, g),
            Operation::from_fn("h", 3, size, h),
        ],
    )
}

fn first(t: &[Elem]) -> Elem {
    t[0]
}

fn majority(t: &[Elem]) -> Elem {
    if t[1] == t[2] {
        t[1]
    } else {
        t[0]
    }
}

/// Two-element meet semilattice.
pub fn sl2() -> FiniteAlgebra {
    fgh("SL2", 2, |t| t[0].min(t[1]), first, first)
}

/// Two-element majority algebra.
pub fn mj2() -> FiniteAlgebra {
    fgh("MJ2", 2, first, majority, first)
}

/// `h(x, y, z) = x - y + z` on `Z_3`.
pub fn z3_affine() -> FiniteAlgebra {
    fgh("Z3A", 3, first, first, |t| (t[0] + 3 - t[1] + t[2]) % 3)
}

/// `Z3A x Z3A`.
pub fn z3_squared() -> FiniteAlgebra {
    product(&z3_affine(), &z3_affine()).expect("same signature").with_name("Z3A^2")
}

/// Two elements, every operation a projection.
pub fn set2() -> FiniteAlgebra {
    fgh("SET2", 2, first, first, first)
}

/// One-element algebra in the common signature.
pub fn trivial() -> FiniteAlgebra {
    fgh("ONE", 1, first, first, first)
}

/// One-element algebra with the signature of `a`.
pub fn trivial_like(a: &FiniteAlgebra) -> FiniteAlgebra {
    let ops = a
        .operations()
        .iter()
        .map(|o| Operation::projection(o.name(), o.arity(), 1, 0))
        .collect();
    alg("ONE", 1, None, ops)
}

const A: Elem = 0;
const B: Elem = 1;
const C: Elem = 2;

/// Three elements `a, b, c`; `f` and `g` are joins towards `c` except that
/// `f(b, a) = b` and `g(a, b) = a`. Every pair involving `c` is a
/// two-element semilattice, while `{a, b}` generates everything and
/// carries no edge. The algebra is simple.
pub fn no_edge() -> FiniteAlgebra {
    let f = |t: &[Elem]| match (t[0], t[1]) {
        (x, y) if x == y => x,
        (B, A) => B,
        _ => C,
    };
    let g = |t: &[Elem]| match (t[0], t[1]) {
        (x, y) if x == y => x,
        (A, B) => A,
        _ => C,
    };
    alg(
        "A_NE",
        3,
        Some(&["a", "b", "c"]),
        vec![Operation::from_fn("f", 2, 3, f), Operation::from_fn("g", 2, 3, g)],
    )
}

/// [`no_edge`] with an extra ternary `m` acting as the first projection.
pub fn no_edge_prime() -> FiniteAlgebra {
    let ne = no_edge();
    let mut ops = ne.operations().to_vec();
    ops.push(Operation::projection("m", 3, 3, 0));
    alg("A'", 3, Some(&["a", "b", "c"]), ops)
}

/// `{0, 1}` with `m` majority and `f`, `g` first projections.
pub fn majority_prime() -> FiniteAlgebra {
    alg(
        "B'",
        2,
        None,
        vec![
            Operation::projection("f", 2, 2, 0),
            Operation::projection("g", 2, 2, 0),
            Operation::from_fn("m", 3, 2, majority),
        ],
    )
}

/// `A' x B'`: the pair `(a,0),(b,1)` is a majority edge through the second
/// projection kernel although its image modulo the first kernel is not an
/// edge.
pub fn no_edge_factor() -> FiniteAlgebra {
    product(&no_edge_prime(), &majority_prime()).expect("same signature").with_name("C")
}

/// Four elements with `theta = {0,2|1,3}`. Modulo `theta`, `maj` is the
/// majority and `min` the third projection; inside a block `maj` is the
/// first projection and `min` the minority. Cross-block values:
/// with `(b, c)` in `theta` and `a` in the other block,
/// `maj(a,b,c) = maj(b,a,c) = c`, `maj(b,c,a) = a + 1`,
/// `min(a,b,c) = min(b,a,c) = c + 2`, `min(b,c,a) = c + 3`, all mod 4.
pub fn no_majority_symmetry() -> FiniteAlgebra {
    let blk = |x: Elem| x % 2;
    let maj = move |t: &[Elem]| {
        let (x, y, z) = (t[0], t[1], t[2]);
        if blk(x) == blk(y) && blk(y) == blk(z) {
            x
        } else if blk(y) == blk(z) || blk(x) == blk(z) {
            z
        } else {
            (z + 1) % 4
        }
    };
    let min = move |t: &[Elem]| {
        let (x, y, z) = (t[0], t[1], t[2]);
        if blk(x) == blk(y) && blk(y) == blk(z) {
            let bit = (x / 2) ^ (y / 2) ^ (z / 2);
            blk(x) + 2 * bit
        } else if blk(y) == blk(z) || blk(x) == blk(z) {
            (z + 2) % 4
        } else {
            (y + 3) % 4
        }
    };
    alg(
        "A_NMS",
        4,
        None,
        vec![Operation::from_fn("maj", 3, 4, maj), Operation::from_fn("min", 3, 4, min)],
    )
}

/// The class `{SL2, MJ2, Z3A}`: one thick edge of each non-unary type.
pub fn class_k() -> Vec<FiniteAlgebra> {
    vec![sl2(), mj2(), z3_affine()]
}

/// Names accepted by [`by_name`].
pub const NAMES: &[&str] = &[
    "no-edge",
    "no-edge-factor",
    "no-majority-symmetry",
    "z3-affine",
    "sl2",
    "mj2",
    "z3-squared",
    "set2",
    "trivial",
];

pub fn by_name(name: &str) -> Option<FiniteAlgebra> {
    Some(match name {
        "no-edge" => no_edge(),
        "no-edge-factor" => no_edge_factor(),
        "no-majority-symmetry" => no_majority_symmetry(),
        "z3-affine" => z3_affine(),
        "sl2" => sl2(),
        "mj2" => mj2(),
        "z3-squared" => z3_squared(),
        "set2" => set2(),
        "trivial" => trivial(),
        _ => return None,
    })
}

/// Every named fixture.
pub fn all() -> Vec<FiniteAlgebra> {
    NAMES.iter().map(|n| by_name(n).unwrap()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_edge_tables() {
        let ne = no_edge();
        let f = ne.op_by_name("f").unwrap();
        let g = ne.op_by_name("g").unwrap();
        assert_eq!(f.apply(&[A, B]), C);
        assert_eq!(g.apply(&[B, A]), C);
        assert_eq!(f.apply(&[B, A]), B);
        assert_eq!(g.apply(&[A, B]), A);
        for x in [A, B] {
            for op in [f, g] {
                assert_eq!(op.apply(&[x, C]), C);
                assert_eq!(op.apply(&[C, x]), C);
            }
        }
    }

    #[test]
    fn nms_cross_values() {
        let a = no_majority_symmetry();
        let maj = a.op_by_name("maj").unwrap();
        let min = a.op_by_name("min").unwrap();
        // a = 1, (b, c) = (0, 2)
        assert_eq!(maj.apply(&[1, 0, 2]), 2);
        assert_eq!(maj.apply(&[0, 1, 2]), 2);
        assert_eq!(maj.apply(&[0, 2, 1]), 2);
        assert_eq!(min.apply(&[1, 0, 2]), 0);
        assert_eq!(min.apply(&[0, 1, 2]), 0);
        assert_eq!(min.apply(&[0, 2, 1]), 1);
        // inside a block
        assert_eq!(maj.apply(&[2, 0, 0]), 2);
        assert_eq!(min.apply(&[3, 1, 1]), 3);
        assert_eq!(min.apply(&[1, 3, 1]), 3);
    }

    #[test]
    fn names_resolve() {
        for n in NAMES {
            assert!(by_name(n).is_some(), "{n}");
        }
        assert!(by_name("nope").is_none());
        assert_eq!(no_edge_factor().size(), 6);
    }
}
