//! Finite idempotent algebras given by operation tables, and the basic
//! constructions on them: products, quotients and restrictions to
//! subuniverses.
//!
//! Elements are the dense integers `0..n`. An operation of arity `k` is
//! stored row-major in radix `n`, with the first argument most significant,
//! so the table index of `(x_1, ..., x_k)` is `x_1 n^{k-1} + ... + x_k`.
//! Enumerating indices in increasing order therefore enumerates argument
//! tuples lexicographically.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::congruence::Congruence;
use crate::error::Error;

/// An element of a finite universe `0..n`.
pub type Elem = usize;

/// A basic operation of a finite algebra.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Operation {
    name: String,
    arity: usize,
    size: usize,
    table: Vec<Elem>,
}

impl Operation {
    /// Builds an operation from a full table without any checks. Use
    /// [`FiniteAlgebra::new`] (or [`validate_algebra`]) to validate.
    pub fn from_table(name: impl Into<String>, arity: usize, size: usize, table: Vec<Elem>) -> Self {
        Operation { name: name.into(), arity, size, table }
    }

    /// Tabulates `f` over all argument tuples in lexicographic order.
    pub fn from_fn(
        name: impl Into<String>,
        arity: usize,
        size: usize,
        mut f: impl FnMut(&[Elem]) -> Elem,
    ) -> Self {
        let table = TupleIter::new(size, arity).map(|t| f(&t)).collect();
        Operation { name: name.into(), arity, size, table }
    }

    /// The `i`th projection of the given arity.
    pub fn projection(name: impl Into<String>, arity: usize, size: usize, i: usize) -> Self {
        Self::from_fn(name, arity, size, |t| t[i])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn table(&self) -> &[Elem] {
        &self.table
    }

    pub fn index_of(&self, args: &[Elem]) -> usize {
        tuple_index(self.size, args)
    }

    #[inline]
    pub fn apply(&self, args: &[Elem]) -> Elem {
        debug_assert_eq!(args.len(), self.arity);
        self.table[tuple_index(self.size, args)]
    }

    pub fn is_idempotent(&self) -> bool {
        (0..self.size).all(|x| self.apply(&vec![x; self.arity]) == x)
    }

    /// Returns `Some(i)` if this operation is the `i`th projection.
    pub fn projection_index(&self) -> Option<usize> {
        (0..self.arity).find(|&i| {
            TupleIter::new(self.size, self.arity)
                .enumerate()
                .all(|(idx, t)| self.table[idx] == t[i])
        })
    }

    pub fn is_projection(&self) -> bool {
        self.projection_index().is_some()
    }
}

/// Index of `args` in a radix-`size` row-major table.
#[inline]
pub fn tuple_index(size: usize, args: &[Elem]) -> usize {
    args.iter().fold(0, |acc, &x| acc * size + x)
}

/// Enumerates `{0..size}^len` in lexicographic order.
#[derive(Debug, Clone)]
pub struct TupleIter {
    size: usize,
    current: Vec<Elem>,
    done: bool,
}

impl TupleIter {
    pub fn new(size: usize, len: usize) -> Self {
        TupleIter { size, current: vec![0; len], done: size == 0 && len > 0 }
    }
}

impl Iterator for TupleIter {
    type Item = Vec<Elem>;

    fn next(&mut self) -> Option<Vec<Elem>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let mut i = self.current.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.current[i] += 1;
            if self.current[i] < self.size {
                break;
            }
            self.current[i] = 0;
        }
        Some(out)
    }
}

/// Unvalidated description of an algebra, as read from a file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawAlgebra {
    pub name: String,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub operations: Vec<RawOperation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawOperation {
    pub name: String,
    pub arity: usize,
    pub table: Vec<usize>,
}

/// Validates a raw description: table shapes, entry ranges, unique names
/// and idempotency.
pub fn validate_algebra(raw: &RawAlgebra) -> Result<FiniteAlgebra, Error> {
    let ops = raw
        .operations
        .iter()
        .map(|op| Operation::from_table(op.name.clone(), op.arity, raw.size, op.table.clone()))
        .collect();
    FiniteAlgebra::new(raw.name.clone(), raw.size, raw.labels.clone(), ops)
}

/// A finite idempotent algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAlgebra {
    name: String,
    size: usize,
    labels: Option<Vec<String>>,
    ops: Vec<Operation>,
}

impl FiniteAlgebra {
    pub fn new(
        name: impl Into<String>,
        size: usize,
        labels: Option<Vec<String>>,
        ops: Vec<Operation>,
    ) -> Result<Self, Error> {
        if size == 0 {
            return Err(Error::EmptyUniverse);
        }
        if ops.is_empty() {
            return Err(Error::NoOperations);
        }
        if let Some(labels) = &labels {
            if labels.len() != size {
                return Err(Error::BadLabels(format!(
                    "{} labels for a universe of size {size}",
                    labels.len()
                )));
            }
            let mut seen = std::collections::HashSet::new();
            for l in labels {
                if !seen.insert(l) {
                    return Err(Error::BadLabels(format!("duplicate label {l:?}")));
                }
            }
        }
        let mut names = std::collections::HashSet::new();
        for op in &ops {
            if !names.insert(op.name.as_str()) {
                return Err(Error::DuplicateOpName(op.name.clone()));
            }
            if op.arity == 0 {
                return Err(Error::ZeroArity(op.name.clone()));
            }
            let expected = size.checked_pow(op.arity as u32).ok_or_else(|| Error::BadTableLength {
                op: op.name.clone(),
                expected: usize::MAX,
                found: op.table.len(),
            })?;
            if op.table.len() != expected || op.size != size {
                return Err(Error::BadTableLength {
                    op: op.name.clone(),
                    expected,
                    found: op.table.len(),
                });
            }
            if let Some((index, &value)) = op.table.iter().enumerate().find(|(_, &v)| v >= size) {
                return Err(Error::EntryOutOfRange { op: op.name.clone(), index, value });
            }
            if let Some(x) = (0..size).find(|&x| op.apply(&vec![x; op.arity]) != x) {
                return Err(Error::NonIdempotent { op: op.name.clone(), x });
            }
        }
        Ok(FiniteAlgebra { name: name.into(), size, labels, ops })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn operations(&self) -> &[Operation] {
        &self.ops
    }

    pub fn op(&self, i: usize) -> &Operation {
        &self.ops[i]
    }

    pub fn op_index(&self, name: &str) -> Option<usize> {
        self.ops.iter().position(|o| o.name == name)
    }

    pub fn op_by_name(&self, name: &str) -> Option<&Operation> {
        self.ops.iter().find(|o| o.name == name)
    }

    pub fn signature(&self) -> Vec<(String, usize)> {
        self.ops.iter().map(|o| (o.name.clone(), o.arity)).collect()
    }

    pub fn max_arity(&self) -> usize {
        self.ops.iter().map(|o| o.arity).max().unwrap_or(0)
    }

    /// Display label of an element; falls back to the integer.
    pub fn label(&self, x: Elem) -> String {
        match &self.labels {
            Some(l) => l[x].clone(),
            None => x.to_string(),
        }
    }

    /// Inverse of [`label`](Self::label).
    pub fn elem(&self, label: &str) -> Option<Elem> {
        match &self.labels {
            Some(l) => l.iter().position(|s| s == label),
            None => label.parse().ok().filter(|&x| x < self.size),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn to_raw(&self) -> RawAlgebra {
        RawAlgebra {
            name: self.name.clone(),
            size: self.size,
            labels: self.labels.clone(),
            operations: self
                .ops
                .iter()
                .map(|o| RawOperation { name: o.name.clone(), arity: o.arity, table: o.table.clone() })
                .collect(),
        }
    }

    /// True iff every basic operation is a projection. Compositions of
    /// projections are projections, so this decides whether every term
    /// operation is one.
    pub fn is_set(&self) -> bool {
        self.ops.iter().all(Operation::is_projection)
    }

    /// Checks whether `subset` is closed under every basic operation and
    /// reports the first escape in (operation, lexicographic tuple) order.
    pub fn closure_violation(&self, subset: &[Elem]) -> Option<(String, Vec<Elem>, Elem)> {
        let mut member = vec![false; self.size];
        for &x in subset {
            member[x] = true;
        }
        let elems: Vec<Elem> = (0..self.size).filter(|&x| member[x]).collect();
        for op in &self.ops {
            for idx in TupleIter::new(elems.len(), op.arity) {
                let args: Vec<Elem> = idx.iter().map(|&i| elems[i]).collect();
                let v = op.apply(&args);
                if !member[v] {
                    return Some((op.name.clone(), args, v));
                }
            }
        }
        None
    }

    pub fn is_subuniverse(&self, subset: &[Elem]) -> bool {
        self.closure_violation(subset).is_none()
    }
}

impl fmt::Display for FiniteAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (size {}; ", self.name, self.size)?;
        for (i, op) in self.ops.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}/{}", op.name, op.arity)?;
        }
        write!(f, ")")
    }
}

/// Correspondence between the basic operations of two similar algebras,
/// matched by name and arity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureMap {
    /// `forward[i]` is the index in the second algebra of the first
    /// algebra's `i`th operation.
    forward: Vec<usize>,
}

impl SignatureMap {
    pub fn between(a: &FiniteAlgebra, b: &FiniteAlgebra) -> Result<Self, Error> {
        if a.ops.len() != b.ops.len() {
            return Err(Error::SignatureMismatch(format!(
                "{} has {} operations, {} has {}",
                a.name,
                a.ops.len(),
                b.name,
                b.ops.len()
            )));
        }
        let mut forward = Vec::with_capacity(a.ops.len());
        for op in &a.ops {
            let j = b.op_index(&op.name).ok_or_else(|| {
                Error::SignatureMismatch(format!("{} has no operation {}", b.name, op.name))
            })?;
            if b.ops[j].arity != op.arity {
                return Err(Error::SignatureMismatch(format!(
                    "{} has arity {} in {} but {} in {}",
                    op.name, op.arity, a.name, b.ops[j].arity, b.name
                )));
            }
            forward.push(j);
        }
        Ok(SignatureMap { forward })
    }

    pub fn image(&self, i: usize) -> usize {
        self.forward[i]
    }
}

/// Checks that all algebras of a class share one signature.
pub fn check_similar(class: &[FiniteAlgebra]) -> Result<(), Error> {
    for w in class.windows(2) {
        SignatureMap::between(&w[0], &w[1])?;
    }
    Ok(())
}

/// Direct product `A × B`. The pair `(x, y)` is encoded as `x·|B| + y`;
/// operations act coordinatewise and keep `A`'s declaration order.
pub fn product(a: &FiniteAlgebra, b: &FiniteAlgebra) -> Result<FiniteAlgebra, Error> {
    let sig = SignatureMap::between(a, b)?;
    let n = a.size * b.size;
    let ops = a
        .ops
        .iter()
        .enumerate()
        .map(|(i, op_a)| {
            let op_b = &b.ops[sig.image(i)];
            let mut xs = vec![0; op_a.arity];
            let mut ys = vec![0; op_a.arity];
            Operation::from_fn(op_a.name.clone(), op_a.arity, n, |t| {
                for (j, &p) in t.iter().enumerate() {
                    xs[j] = p / b.size;
                    ys[j] = p % b.size;
                }
                op_a.apply(&xs) * b.size + op_b.apply(&ys)
            })
        })
        .collect();
    let labels = (0..n)
        .map(|p| format!("({},{})", a.label(p / b.size), b.label(p % b.size)))
        .collect();
    FiniteAlgebra::new(format!("{}x{}", a.name, b.name), n, Some(labels), ops)
}

/// Product of a nonempty class, folded left to right.
pub fn product_all(class: &[FiniteAlgebra]) -> Result<FiniteAlgebra, Error> {
    let (first, rest) = class.split_first().ok_or(Error::EmptyClass)?;
    rest.iter().try_fold(first.clone(), |acc, b| product(&acc, b))
}

/// Factor algebra `A/θ`. Blocks are numbered by their least element; the
/// returned map sends each element to its block.
pub fn quotient(a: &FiniteAlgebra, theta: &Congruence) -> Result<(FiniteAlgebra, Vec<usize>), Error> {
    if theta.size() != a.size {
        return Err(Error::NotACongruence {
            op: String::new(),
            detail: format!("partition of {} elements for algebra of size {}", theta.size(), a.size),
        });
    }
    if let Some((op, x, y)) = theta.compatibility_violation(a) {
        return Err(Error::NotACongruence {
            op,
            detail: format!("{x:?} ~ {y:?} blockwise but the images are not related"),
        });
    }
    let block_map = theta.block_index().to_vec();
    let reps = theta.representatives();
    let m = reps.len();
    let ops = a
        .ops
        .iter()
        .map(|op| {
            let mut args = vec![0; op.arity];
            Operation::from_fn(op.name.clone(), op.arity, m, |t| {
                for (j, &blk) in t.iter().enumerate() {
                    args[j] = reps[blk];
                }
                block_map[op.apply(&args)]
            })
        })
        .collect();
    let labels = theta
        .blocks()
        .iter()
        .map(|blk| {
            if blk.len() == 1 {
                a.label(blk[0])
            } else {
                let inner: Vec<String> = blk.iter().map(|&x| a.label(x)).collect();
                format!("[{}]", inner.join(","))
            }
        })
        .collect();
    let q = FiniteAlgebra::new(format!("{}/{}", a.name, theta), m, Some(labels), ops)?;
    Ok((q, block_map))
}

/// Subalgebra on a closed subset. Returns the algebra (elements re-indexed
/// in increasing order) and the embedding into `A`.
pub fn restrict(a: &FiniteAlgebra, subset: &[Elem]) -> Result<(FiniteAlgebra, Vec<Elem>), Error> {
    let mut embedding: Vec<Elem> = subset.to_vec();
    embedding.sort_unstable();
    embedding.dedup();
    if embedding.is_empty() {
        return Err(Error::EmptyUniverse);
    }
    if let Some(&x) = embedding.iter().find(|&&x| x >= a.size) {
        return Err(Error::EntryOutOfRange { op: String::new(), index: x, value: x });
    }
    if let Some((op, args, value)) = a.closure_violation(&embedding) {
        return Err(Error::NotClosed { op, args, value });
    }
    let mut back = vec![usize::MAX; a.size];
    for (i, &x) in embedding.iter().enumerate() {
        back[x] = i;
    }
    let m = embedding.len();
    let ops = a
        .ops
        .iter()
        .map(|op| {
            let mut args = vec![0; op.arity];
            Operation::from_fn(op.name.clone(), op.arity, m, |t| {
                for (j, &i) in t.iter().enumerate() {
                    args[j] = embedding[i];
                }
                back[op.apply(&args)]
            })
        })
        .collect();
    let labels = embedding.iter().map(|&x| a.label(x)).collect();
    let b = FiniteAlgebra::new(a.name.clone(), m, Some(labels), ops)?;
    Ok((b, embedding))
}

/// Largest size accepted by [`find_isomorphism`].
pub const ISOMORPHISM_MAX_SIZE: usize = 8;

/// Brute-force search for an isomorphism `A → B` (operations matched by
/// name). Backtracks over injective partial maps, checking every operation
/// tuple as soon as all of its entries and its value are mapped.
pub fn find_isomorphism(a: &FiniteAlgebra, b: &FiniteAlgebra) -> Result<Option<Vec<Elem>>, Error> {
    if a.size > ISOMORPHISM_MAX_SIZE {
        return Err(Error::TooLarge { size: a.size, limit: ISOMORPHISM_MAX_SIZE });
    }
    let sig = SignatureMap::between(a, b)?;
    if a.size != b.size {
        return Ok(None);
    }
    let n = a.size;
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn consistent(a: &FiniteAlgebra, b: &FiniteAlgebra, sig: &SignatureMap, map: &[usize]) -> bool {
        let mut image = Vec::new();
        for (i, op) in a.ops.iter().enumerate() {
            let op_b = &b.ops[sig.image(i)];
            for (idx, t) in TupleIter::new(a.size, op.arity).enumerate() {
                if t.iter().any(|&x| map[x] == usize::MAX) {
                    continue;
                }
                let v = op.table[idx];
                if map[v] == usize::MAX {
                    continue;
                }
                image.clear();
                image.extend(t.iter().map(|&x| map[x]));
                if op_b.apply(&image) != map[v] {
                    return false;
                }
            }
        }
        true
    }
    fn search(
        a: &FiniteAlgebra,
        b: &FiniteAlgebra,
        sig: &SignatureMap,
        x: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if x == a.size {
            return true;
        }
        for y in 0..b.size {
            if used[y] {
                continue;
            }
            map[x] = y;
            used[y] = true;
            if consistent(a, b, sig, map) && search(a, b, sig, x + 1, map, used) {
                return true;
            }
            used[y] = false;
            map[x] = usize::MAX;
        }
        false
    }
    if search(a, b, &sig, 0, &mut map, &mut used) {
        Ok(Some(map))
    } else {
        Ok(None)
    }
}

pub fn is_isomorphic(a: &FiniteAlgebra, b: &FiniteAlgebra) -> Result<bool, Error> {
    Ok(find_isomorphism(a, b)?.is_some())
}

/// Lookup from operation name to index, shared by evaluators.
pub(crate) fn op_lookup(a: &FiniteAlgebra) -> HashMap<&str, usize> {
    a.ops.iter().enumerate().map(|(i, o)| (o.name.as_str(), i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn raw(name: &str, size: usize, ops: Vec<(&str, usize, Vec<usize>)>) -> RawAlgebra {
        RawAlgebra {
            name: name.into(),
            size,
            labels: None,
            operations: ops
                .into_iter()
                .map(|(n, a, t)| RawOperation { name: n.into(), arity: a, table: t })
                .collect(),
        }
    }

    #[test]
    fn tuple_iter_is_lexicographic() {
        let all: Vec<_> = TupleIter::new(2, 2).collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(TupleIter::new(3, 0).count(), 1);
        for (i, t) in TupleIter::new(3, 3).enumerate() {
            assert_eq!(tuple_index(3, &t), i);
        }
    }

    #[test]
    fn validation_errors() {
        let bad = raw("x", 2, vec![("f", 2, vec![1, 0, 0, 1])]);
        assert_eq!(
            validate_algebra(&bad),
            Err(Error::NonIdempotent { op: "f".into(), x: 0 })
        );
        let short = raw("x", 2, vec![("f", 2, vec![0, 0, 1])]);
        assert!(matches!(validate_algebra(&short), Err(Error::BadTableLength { .. })));
        let range = raw("x", 2, vec![("f", 2, vec![0, 2, 0, 1])]);
        assert!(matches!(validate_algebra(&range), Err(Error::EntryOutOfRange { value: 2, .. })));
        let dup = raw("x", 2, vec![("f", 2, vec![0, 0, 0, 1]), ("f", 2, vec![0, 0, 0, 1])]);
        assert_eq!(validate_algebra(&dup), Err(Error::DuplicateOpName("f".into())));
    }

    #[test]
    fn fixtures_validate() {
        let ne = fixtures::no_edge();
        assert_eq!(ne.size(), 3);
        let z3 = fixtures::z3_affine();
        assert_eq!(z3.size(), 3);
        assert!(validate_algebra(&z3.to_raw()).is_ok());
    }

    #[test]
    fn product_with_trivial_is_a_copy() {
        let a = fixtures::no_edge();
        let one = fixtures::trivial_like(&a);
        let p = product(&a, &one).unwrap();
        assert!(is_isomorphic(&p, &a).unwrap());
    }

    #[test]
    fn sl2_squared_is_coordinatewise() {
        let sl = fixtures::sl2();
        let sq = product(&sl, &sl).unwrap();
        assert_eq!(sq.size(), 4);
        let f = sq.op_by_name("f").unwrap();
        for x in 0..4 {
            for y in 0..4 {
                let expect = (x / 2).min(y / 2) * 2 + (x % 2).min(y % 2);
                assert_eq!(f.apply(&[x, y]), expect);
            }
        }
    }

    #[test]
    fn product_needs_matching_signatures() {
        assert!(matches!(
            product(&fixtures::no_edge(), &fixtures::z3_affine()),
            Err(Error::SignatureMismatch(_))
        ));
    }

    #[test]
    fn restrict_no_edge() {
        let a = fixtures::no_edge();
        let (ac, emb) = restrict(&a, &[0, 2]).unwrap();
        assert_eq!(emb, vec![0, 2]);
        // both operations are the join towards c
        for op in ac.operations() {
            assert_eq!(op.table(), &[0, 1, 1, 1]);
        }
        assert_eq!(
            restrict(&a, &[0, 1]),
            Err(Error::NotClosed { op: "f".into(), args: vec![0, 1], value: 2 })
        );
        let (full, _) = restrict(&a, &[0, 1, 2]).unwrap();
        assert_eq!(full.operations(), a.operations());
    }

    #[test]
    fn is_set_cases() {
        assert!(fixtures::set2().is_set());
        assert!(!fixtures::sl2().is_set());
    }

    #[test]
    fn isomorphism_detects_relabeling() {
        let sl = fixtures::sl2();
        // join is the meet with 0 and 1 swapped
        let join = FiniteAlgebra::new(
            "join",
            2,
            None,
            sl.operations()
                .iter()
                .map(|op| Operation::from_fn(op.name(), op.arity(), 2, |t| {
                    let flipped: Vec<_> = t.iter().map(|&x| 1 - x).collect();
                    1 - op.apply(&flipped)
                }))
                .collect(),
        )
        .unwrap();
        assert_eq!(find_isomorphism(&sl, &join).unwrap(), Some(vec![1, 0]));
        assert!(!is_isomorphic(&sl, &fixtures::mj2()).unwrap());
    }
}
