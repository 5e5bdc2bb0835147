//! Generation with provenance, and subpower membership.
//!
//! Every "is there a term such that ..." question reduces to membership of
//! a target tuple in the subalgebra of a power `A^k` generated by some
//! tuples. The closure runs breadth first in rounds: round `r` applies each
//! operation (in declaration order) to every argument tuple (in
//! lexicographic order of generation index) that uses at least one element
//! created in round `r - 1`. The first time an element appears it records
//! the operation and arguments that produced it, so every element has a
//! witness term of minimal depth.

use std::collections::{HashMap, HashSet};

use smallvec::SmallVec;

use crate::algebra::{Elem, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::term::{eval, Term};
use crate::Limits;

/// How an element of a generated subuniverse was obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Generator(usize),
    /// Operation index and generation indices of the arguments.
    Step { op: usize, args: Vec<usize> },
}

type Key = SmallVec<[u64; 2]>;

#[derive(Debug, Clone)]
struct Packer {
    bits: u32,
    per_word: usize,
}

impl Packer {
    fn new(n: usize) -> Self {
        let bits = (usize::BITS - (n.max(2) - 1).leading_zeros()).max(1);
        Packer { bits, per_word: (64 / bits) as usize }
    }

    fn pack(&self, t: &[u8]) -> Key {
        t.chunks(self.per_word)
            .map(|chunk| chunk.iter().fold(0u64, |acc, &x| (acc << self.bits) | x as u64))
            .collect()
    }
}

/// A generated subuniverse of `A^k` with provenance for each element.
#[derive(Debug, Clone)]
pub struct GenerationTrace {
    k: usize,
    op_names: Vec<String>,
    elems: Vec<u8>,
    prov: Vec<Provenance>,
    depth: Vec<u32>,
    num_generators: usize,
    index: HashMap<Key, u32>,
    packer: Packer,
}

impl GenerationTrace {
    fn new(alg: &FiniteAlgebra, k: usize, num_generators: usize) -> Self {
        GenerationTrace {
            k,
            op_names: alg.operations().iter().map(|o| o.name().to_string()).collect(),
            elems: Vec::new(),
            prov: Vec::new(),
            depth: Vec::new(),
            num_generators,
            index: HashMap::new(),
            packer: Packer::new(alg.size()),
        }
    }

    /// Number of coordinates.
    pub fn coordinates(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.prov.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prov.is_empty()
    }

    pub fn num_generators(&self) -> usize {
        self.num_generators
    }

    pub fn element(&self, i: usize) -> Vec<Elem> {
        self.elems[i * self.k..(i + 1) * self.k].iter().map(|&x| x as Elem).collect()
    }

    pub fn elements(&self) -> impl Iterator<Item = Vec<Elem>> + '_ {
        (0..self.len()).map(|i| self.element(i))
    }

    pub fn provenance(&self, i: usize) -> &Provenance {
        &self.prov[i]
    }

    pub fn depth(&self, i: usize) -> u32 {
        self.depth[i]
    }

    /// Symbol of the operation used by a `Step`.
    pub fn op_name(&self, op: usize) -> &str {
        &self.op_names[op]
    }

    pub fn position(&self, tuple: &[Elem]) -> Option<usize> {
        if tuple.len() != self.k || tuple.iter().any(|&x| x > u8::MAX as usize) {
            return None;
        }
        let bytes: Vec<u8> = tuple.iter().map(|&x| x as u8).collect();
        self.index.get(&self.packer.pack(&bytes)).map(|&i| i as usize)
    }

    pub fn contains(&self, tuple: &[Elem]) -> bool {
        self.position(tuple).is_some()
    }

    /// For one coordinate: the generated elements in increasing order.
    pub fn subuniverse(&self) -> Vec<Elem> {
        assert_eq!(self.k, 1, "subuniverse() is for traces of single elements");
        let mut v: Vec<Elem> = self.elems.iter().map(|&x| x as Elem).collect();
        v.sort_unstable();
        v
    }

    /// Witness term of the element at generation index `i`, of arity equal
    /// to the number of generators.
    pub fn term_at(&self, i: usize) -> Term {
        let m = self.num_generators;
        let mut built: Vec<Option<Term>> = vec![None; self.len()];
        let mut stack = vec![i];
        while let Some(&j) = stack.last() {
            if built[j].is_some() {
                stack.pop();
                continue;
            }
            match &self.prov[j] {
                Provenance::Generator(g) => {
                    built[j] = Some(Term::proj(m, *g));
                    stack.pop();
                }
                Provenance::Step { op, args } => {
                    let missing: Vec<usize> = args.iter().copied().filter(|&a| built[a].is_none()).collect();
                    if missing.is_empty() {
                        let children = args.iter().map(|&a| built[a].clone().unwrap()).collect();
                        built[j] = Some(Term::apply(&self.op_names[*op], children));
                        stack.pop();
                    } else {
                        stack.extend(missing);
                    }
                }
            }
        }
        built[i].take().unwrap()
    }

    fn insert(&mut self, t: &[u8], p: Provenance, depth: u32) -> Option<usize> {
        let key = self.packer.pack(t);
        if self.index.contains_key(&key) {
            return None;
        }
        let i = self.prov.len();
        self.index.insert(key, i as u32);
        self.elems.extend_from_slice(t);
        self.prov.push(p);
        self.depth.push(depth);
        Some(i)
    }
}

/// Witness term for element `e` (a `k`-tuple) of the trace.
pub fn witness_term(trace: &GenerationTrace, e: &[Elem]) -> Result<Term> {
    let i = trace.position(e).ok_or_else(|| Error::ElementNotGenerated(e.to_vec()))?;
    Ok(trace.term_at(i))
}

/// Next tuple over `[0, hi)` in lexicographic order that has an entry of
/// at least `lo`; false when exhausted.
fn advance(args: &mut [usize], lo: usize, hi: usize) -> bool {
    let r = args.len();
    let mut pos = r;
    loop {
        if pos == 0 {
            return false;
        }
        pos -= 1;
        args[pos] += 1;
        if args[pos] < hi {
            break;
        }
        args[pos] = 0;
    }
    if args[r - 1] < lo && args[..r - 1].iter().all(|&a| a < lo) {
        args[r - 1] = lo;
    }
    true
}

enum Stop {
    Complete,
    Found(usize),
    Cap,
}

fn run(
    alg: &FiniteAlgebra,
    generators: &[Vec<Elem>],
    k: usize,
    target: Option<&[Elem]>,
    cap: usize,
) -> (GenerationTrace, Stop) {
    assert!(alg.size() <= u8::MAX as usize + 1, "closure supports universes of at most 256 elements");
    let mut trace = GenerationTrace::new(alg, k, generators.len());
    let target: Option<Vec<u8>> = target.map(|t| t.iter().map(|&x| x as u8).collect());
    for (g, tuple) in generators.iter().enumerate() {
        assert_eq!(tuple.len(), k, "generator length differs from coordinate count");
        let bytes: Vec<u8> = tuple.iter().map(|&x| x as u8).collect();
        if let Some(i) = trace.insert(&bytes, Provenance::Generator(g), 0) {
            if target.as_deref() == Some(&bytes[..]) {
                return (trace, Stop::Found(i));
            }
        }
    }
    if trace.len() > cap {
        return (trace, Stop::Cap);
    }
    let n = alg.size();
    let mut lo = 0;
    let mut hi = trace.len();
    let mut round = 1;
    let mut out = vec![0u8; k];
    while lo < hi {
        for (oi, op) in alg.operations().iter().enumerate() {
            let r = op.arity();
            let table = op.table();
            let mut args = vec![0usize; r];
            args[r - 1] = lo;
            loop {
                for (c, slot) in out.iter_mut().enumerate() {
                    let mut idx = 0;
                    for &a in &args {
                        idx = idx * n + trace.elems[a * k + c] as usize;
                    }
                    *slot = table[idx] as u8;
                }
                if let Some(i) = trace.insert(&out, Provenance::Step { op: oi, args: args.clone() }, round) {
                    if target.as_deref() == Some(&out[..]) {
                        return (trace, Stop::Found(i));
                    }
                    if trace.len() > cap {
                        return (trace, Stop::Cap);
                    }
                }
                if !advance(&mut args, lo, hi) {
                    break;
                }
            }
        }
        lo = hi;
        hi = trace.len();
        round += 1;
    }
    (trace, Stop::Complete)
}

/// Full closure of `generators` in `A^k`, failing if it exceeds `cap`.
pub fn closure(alg: &FiniteAlgebra, generators: &[Vec<Elem>], cap: usize) -> Result<GenerationTrace> {
    let k = generators.first().map_or(0, Vec::len);
    match run(alg, generators, k, None, cap) {
        (trace, Stop::Complete) => Ok(trace),
        _ => Err(Error::CapExceeded { cap }),
    }
}

/// `Sg(S)` with provenance; generators are `S` sorted and deduplicated.
pub fn generate_subalgebra(alg: &FiniteAlgebra, s: &[Elem]) -> GenerationTrace {
    let mut gens: Vec<Elem> = s.to_vec();
    gens.sort_unstable();
    gens.dedup();
    let gens: Vec<Vec<Elem>> = gens.into_iter().map(|x| vec![x]).collect();
    run(alg, &gens, 1, None, usize::MAX).0
}

/// `Sg(S)` as a sorted element list, without provenance.
pub fn sg(alg: &FiniteAlgebra, s: &[Elem]) -> Vec<Elem> {
    let n = alg.size();
    let mut member = vec![false; n];
    let mut elems: Vec<Elem> = Vec::new();
    for &x in s {
        if !member[x] {
            member[x] = true;
            elems.push(x);
        }
    }
    let mut lo = 0;
    let mut args = Vec::new();
    while lo < elems.len() {
        let hi = elems.len();
        for op in alg.operations() {
            let r = op.arity();
            args.clear();
            args.resize(r, 0usize);
            args[r - 1] = lo;
            loop {
                let mut idx = 0;
                for &a in &args {
                    idx = idx * n + elems[a];
                }
                let v = op.table()[idx];
                if !member[v] {
                    member[v] = true;
                    elems.push(v);
                }
                if !advance(&mut args, lo, hi) {
                    break;
                }
            }
        }
        lo = hi;
    }
    elems.sort_unstable();
    elems
}

/// Every subuniverse of `A`, ordered by size and then lexicographically.
pub fn all_subalgebras(alg: &FiniteAlgebra, limits: &Limits) -> Result<Vec<Vec<Elem>>> {
    limits.check_size(alg.size())?;
    let n = alg.size();
    let mut seen: HashSet<Vec<Elem>> = HashSet::new();
    let mut queue: Vec<Vec<Elem>> = Vec::new();
    for x in 0..n {
        let s = sg(alg, &[x]);
        if seen.insert(s.clone()) {
            queue.push(s);
        }
    }
    while let Some(s) = queue.pop() {
        let mut member = vec![false; n];
        for &x in &s {
            member[x] = true;
        }
        for x in (0..n).filter(|&x| !member[x]) {
            let mut ext = s.clone();
            ext.push(x);
            let t = sg(alg, &ext);
            if seen.insert(t.clone()) {
                queue.push(t);
            }
        }
    }
    let mut out: Vec<Vec<Elem>> = seen.into_iter().collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

/// Does some term, applied coordinatewise to `generators`, give `target`?
#[derive(Debug, Clone)]
pub struct SubpowerQuery<'a> {
    pub algebra: &'a FiniteAlgebra,
    pub generators: Vec<Vec<Elem>>,
    pub target: Vec<Elem>,
    pub cap: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubpowerAnswer {
    /// A witness of minimal depth.
    Found { witness: Term, depth: u32 },
    /// The closure was explored completely.
    Absent { closure_size: usize },
    CapExceeded { cap: usize },
}

impl SubpowerAnswer {
    pub fn witness(&self) -> Option<&Term> {
        match self {
            SubpowerAnswer::Found { witness, .. } => Some(witness),
            _ => None,
        }
    }
}

pub fn subpower_membership(q: &SubpowerQuery<'_>) -> SubpowerAnswer {
    assert!(q.cap > 0, "cap must be positive");
    let k = q.target.len();
    assert!(q.generators.iter().all(|g| g.len() == k), "generator length differs from the target");
    assert!(
        q.generators.iter().flatten().chain(&q.target).all(|&x| x < q.algebra.size()),
        "tuple entry outside the universe"
    );
    let (trace, stop) = run(q.algebra, &q.generators, k, Some(&q.target), q.cap);
    match stop {
        Stop::Found(i) => {
            let witness = trace.term_at(i);
            for c in 0..k {
                let args: Vec<Elem> = q.generators.iter().map(|g| g[c]).collect();
                let v = eval(&witness, q.algebra, &args).expect("witness uses the algebra's symbols");
                assert_eq!(v, q.target[c], "witness term does not reproduce the target");
            }
            SubpowerAnswer::Found { witness, depth: trace.depth(i) }
        }
        Stop::Complete => SubpowerAnswer::Absent { closure_size: trace.len() },
        Stop::Cap => SubpowerAnswer::CapExceeded { cap: q.cap },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WitnessKind {
    Semilattice,
    Majority,
    Maltsev,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairWitness {
    /// `target` is the tuple of required values; for a semilattice query
    /// it names the absorbing element.
    Found { term: Term, target: Vec<Elem> },
    Absent { closure_size: usize },
    CapExceeded { cap: usize },
}

impl PairWitness {
    pub fn term(&self) -> Option<&Term> {
        match self {
            PairWitness::Found { term, .. } => Some(term),
            _ => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, PairWitness::Found { .. })
    }
}

/// The six non-constant triples over `{a, b}` in lexicographic order, and
/// the majority value of each.
pub fn majority_coordinates(a: Elem, b: Elem) -> (Vec<[Elem; 3]>, Vec<Elem>) {
    let mut triples = Vec::new();
    let mut values = Vec::new();
    for mask in 1..7u32 {
        let t = [0, 1, 2].map(|i| if mask & (4 >> i) != 0 { b } else { a });
        let ones = mask.count_ones();
        triples.push(t);
        values.push(if ones >= 2 { b } else { a });
    }
    (triples, values)
}

/// The inputs `(x,x,y)` and `(y,x,x)` for ordered `x != y` over `0..n`,
/// each with required value `y`.
pub fn maltsev_coordinates(n: usize) -> (Vec<[Elem; 3]>, Vec<Elem>) {
    let mut triples = Vec::new();
    let mut values = Vec::new();
    for x in 0..n {
        for y in (0..n).filter(|&y| y != x) {
            triples.push([x, x, y]);
            values.push(y);
            triples.push([y, x, x]);
            values.push(y);
        }
    }
    (triples, values)
}

fn rows(triples: &[[Elem; 3]]) -> Vec<Vec<Elem>> {
    (0..3).map(|i| triples.iter().map(|t| t[i]).collect()).collect()
}

/// Searches `D` for a term that is a semilattice or majority operation on
/// `{a, b}`, or a Mal'tsev operation on all of `D`.
pub fn find_pair_witness(d: &FiniteAlgebra, kind: WitnessKind, a: Elem, b: Elem, cap: usize) -> PairWitness {
    let ask = |generators: Vec<Vec<Elem>>, target: Vec<Elem>| {
        let q = SubpowerQuery { algebra: d, generators, target: target.clone(), cap };
        match subpower_membership(&q) {
            SubpowerAnswer::Found { witness, .. } => PairWitness::Found { term: witness, target },
            SubpowerAnswer::Absent { closure_size } => PairWitness::Absent { closure_size },
            SubpowerAnswer::CapExceeded { cap } => PairWitness::CapExceeded { cap },
        }
    };
    match kind {
        WitnessKind::Semilattice => {
            assert_ne!(a, b);
            let gens = vec![vec![a, b], vec![b, a]];
            let first = ask(gens.clone(), vec![b, b]);
            if first.is_found() {
                return first;
            }
            let second = ask(gens, vec![a, a]);
            match (&first, &second) {
                (_, PairWitness::Found { .. }) => second,
                (PairWitness::CapExceeded { .. }, _) => first,
                _ => second,
            }
        }
        WitnessKind::Majority => {
            assert_ne!(a, b);
            let (triples, values) = majority_coordinates(a, b);
            ask(rows(&triples), values)
        }
        WitnessKind::Maltsev => {
            let (triples, values) = maltsev_coordinates(d.size());
            if triples.is_empty() {
                return PairWitness::Found { term: Term::proj(3, 0), target: values };
            }
            ask(rows(&triples), values)
        }
    }
}
