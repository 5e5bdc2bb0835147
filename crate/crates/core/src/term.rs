//! Terms over a signature as hash-consed DAGs.
//!
//! A term has a declared arity `k` and is built from projections `pI`
//! (`I < k`), applications of operation symbols, and an iteration node.
//! `iter[m](s, t)` has arity `k` when `t` has arity `k` and `s` has arity
//! `k + 1`; it denotes `v_m` where `v_0 = t(x)` and `v_{i+1} = s(x, v_i)`.
//! Iteration keeps terms of the form "apply this context a few thousand
//! times" small; evaluation raises the induced unary map to the `m`th power
//! by repeated squaring.
//!
//! Structurally equal terms are the same allocation, so `==` and hashing
//! are by pointer.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, Weak};

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::algebra::{op_lookup, tuple_index, Elem, FiniteAlgebra, Operation, TupleIter};
use crate::error::{Error, Result};

#[derive(Debug)]
enum Kind {
    Proj(usize),
    Apply { op: Arc<str>, args: Vec<Term> },
    Iterate { step: Term, seed: Term, times: u64 },
}

#[derive(Debug)]
struct Node {
    arity: usize,
    kind: Kind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Proj(usize, usize),
    Apply(usize, Arc<str>, Vec<usize>),
    Iterate(usize, usize, usize, u64),
}

struct Interner {
    map: HashMap<Key, Weak<Node>>,
    next_sweep: usize,
}

static INTERNER: Lazy<Mutex<Interner>> =
    Lazy::new(|| Mutex::new(Interner { map: HashMap::new(), next_sweep: 4096 }));

/// One entry of a DAG listing of a term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum DagNode {
    Proj { arity: usize, index: usize },
    Apply { op: String, args: Vec<usize> },
    Iterate { step: usize, seed: usize, times: u64 },
}

/// A term with a declared arity.
#[derive(Clone)]
pub struct Term(Arc<Node>);

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id().hash(state)
    }
}

fn intern(key: Key, make: impl FnOnce() -> Node) -> Term {
    let mut guard = INTERNER.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(node) = guard.map.get(&key).and_then(Weak::upgrade) {
        return Term(node);
    }
    if guard.map.len() >= guard.next_sweep {
        guard.map.retain(|_, w| w.strong_count() > 0);
        guard.next_sweep = (guard.map.len() * 2).max(4096);
    }
    let node = Arc::new(make());
    guard.map.insert(key, Arc::downgrade(&node));
    Term(node)
}

impl Term {
    fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// The projection `p{i}` among `arity` variables.
    pub fn proj(arity: usize, i: usize) -> Term {
        assert!(i < arity, "projection index {i} out of range for arity {arity}");
        intern(Key::Proj(arity, i), || Node { arity, kind: Kind::Proj(i) })
    }

    /// All projections of the given arity, in order.
    pub fn vars(arity: usize) -> Vec<Term> {
        (0..arity).map(|i| Term::proj(arity, i)).collect()
    }

    /// `op(args)`. All arguments must share one arity; the number of
    /// arguments is checked against the signature at evaluation time.
    pub fn apply(op: &str, args: Vec<Term>) -> Term {
        assert!(!args.is_empty(), "operation {op} applied to no arguments");
        let arity = args[0].arity();
        assert!(args.iter().all(|t| t.arity() == arity), "arguments of {op} have different arities");
        let op: Arc<str> = Arc::from(op);
        let key = Key::Apply(arity, op.clone(), args.iter().map(Term::id).collect());
        intern(key, || Node { arity, kind: Kind::Apply { op, args } })
    }

    /// `iter[times](step, seed)`; `step` takes one more variable than `seed`.
    pub fn iterate(step: Term, seed: Term, times: u64) -> Term {
        assert_eq!(step.arity(), seed.arity() + 1, "iteration step must have one extra variable");
        if times == 0 {
            return seed;
        }
        let arity = seed.arity();
        let key = Key::Iterate(arity, step.id(), seed.id(), times);
        intern(key, || Node { arity, kind: Kind::Iterate { step, seed, times } })
    }

    pub fn arity(&self) -> usize {
        self.0.arity
    }

    pub fn projection_index(&self) -> Option<usize> {
        match self.0.kind {
            Kind::Proj(i) => Some(i),
            _ => None,
        }
    }

    pub fn symbol(&self) -> Option<&str> {
        match &self.0.kind {
            Kind::Apply { op, .. } => Some(op),
            _ => None,
        }
    }

    pub fn children(&self) -> Vec<Term> {
        match &self.0.kind {
            Kind::Proj(_) => Vec::new(),
            Kind::Apply { args, .. } => args.clone(),
            Kind::Iterate { step, seed, .. } => vec![step.clone(), seed.clone()],
        }
    }

    /// Substitutes `args[i]` for `p{i}`. The result has the arity shared by
    /// the arguments.
    pub fn call(&self, args: &[Term]) -> Term {
        assert_eq!(args.len(), self.arity(), "substitution needs one term per variable");
        assert!(!args.is_empty());
        let m = args[0].arity();
        assert!(args.iter().all(|t| t.arity() == m), "substituted terms have different arities");
        let mut memo = HashMap::new();
        self.subst(args, &mut memo)
    }

    fn subst(&self, args: &[Term], memo: &mut HashMap<usize, Term>) -> Term {
        if let Some(t) = memo.get(&self.id()) {
            return t.clone();
        }
        let out = match &self.0.kind {
            Kind::Proj(i) => args[*i].clone(),
            Kind::Apply { op, args: children } => {
                let new: Vec<Term> = children.iter().map(|c| c.subst(args, memo)).collect();
                Term::apply(op, new)
            }
            Kind::Iterate { step, seed, times } => {
                let m = args[0].arity();
                let mut inner: Vec<Term> = args.iter().map(|t| t.widen(m + 1)).collect();
                inner.push(Term::proj(m + 1, m));
                let step = step.call(&inner);
                let seed = seed.subst(args, memo);
                Term::iterate(step, seed, *times)
            }
        };
        memo.insert(self.id(), out.clone());
        out
    }

    /// The same term viewed with `arity` variables, the extra ones unused.
    pub fn widen(&self, arity: usize) -> Term {
        assert!(arity >= self.arity());
        if arity == self.arity() {
            return self.clone();
        }
        let vars: Vec<Term> = (0..self.arity()).map(|i| Term::proj(arity, i)).collect();
        self.call(&vars)
    }

    /// `self(p{perm[0]}, ..., p{perm[k-1]})`.
    pub fn permute(&self, perm: &[usize]) -> Term {
        let vars: Vec<Term> = perm.iter().map(|&i| Term::proj(self.arity(), i)).collect();
        self.call(&vars)
    }

    /// Number of distinct nodes in the DAG.
    pub fn dag_size(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(t) = stack.pop() {
            if seen.insert(t.id()) {
                stack.extend(t.children());
            }
        }
        seen.len()
    }

    /// Number of symbols in the printed form (saturating).
    pub fn tree_size(&self) -> u64 {
        fn go(t: &Term, memo: &mut HashMap<usize, u64>) -> u64 {
            if let Some(&s) = memo.get(&t.id()) {
                return s;
            }
            let s = t
                .children()
                .iter()
                .fold(1u64, |acc, c| acc.saturating_add(go(c, memo)));
            memo.insert(t.id(), s);
            s
        }
        go(self, &mut HashMap::new())
    }

    /// Symbols used, with the number of arguments they are applied to.
    pub fn symbols(&self) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(t) = stack.pop() {
            if !seen.insert(t.id()) {
                continue;
            }
            if let Kind::Apply { op, args } = &t.0.kind {
                if !out.iter().any(|(n, _)| **n == **op) {
                    out.push((op.to_string(), args.len()));
                }
            }
            stack.extend(t.children());
        }
        out.sort();
        out
    }

    /// The DAG in topological order; children refer to earlier entries and
    /// the last entry is `self`.
    pub fn to_dag(&self) -> Vec<DagNode> {
        fn go(t: &Term, index: &mut HashMap<usize, usize>, out: &mut Vec<DagNode>) -> usize {
            if let Some(&i) = index.get(&t.id()) {
                return i;
            }
            let node = match &t.0.kind {
                Kind::Proj(i) => DagNode::Proj { arity: t.arity(), index: *i },
                Kind::Apply { op, args } => {
                    let args = args.iter().map(|a| go(a, index, out)).collect();
                    DagNode::Apply { op: op.to_string(), args }
                }
                Kind::Iterate { step, seed, times } => {
                    let step = go(step, index, out);
                    let seed = go(seed, index, out);
                    DagNode::Iterate { step, seed, times: *times }
                }
            };
            out.push(node);
            index.insert(t.id(), out.len() - 1);
            out.len() - 1
        }
        let mut out = Vec::new();
        go(self, &mut HashMap::new(), &mut out);
        out
    }

    /// Rebuilds a term from [`Term::to_dag`] output.
    pub fn from_dag(nodes: &[DagNode]) -> Result<Term> {
        let bad = |pos: usize, msg: &str| Error::Parse { pos, msg: msg.to_string() };
        let mut built: Vec<Term> = Vec::with_capacity(nodes.len());
        for (pos, node) in nodes.iter().enumerate() {
            let get = |i: usize| built.get(i).cloned().ok_or_else(|| bad(pos, "forward reference"));
            let t = match node {
                DagNode::Proj { arity, index } => {
                    if index >= arity {
                        return Err(bad(pos, "projection index out of range"));
                    }
                    Term::proj(*arity, *index)
                }
                DagNode::Apply { op, args } => {
                    let args = args.iter().map(|&i| get(i)).collect::<Result<Vec<_>>>()?;
                    if args.is_empty() || args.iter().any(|a| a.arity() != args[0].arity()) {
                        return Err(bad(pos, "arguments of different arities"));
                    }
                    Term::apply(op, args)
                }
                DagNode::Iterate { step, seed, times } => {
                    let (step, seed) = (get(*step)?, get(*seed)?);
                    if step.arity() != seed.arity() + 1 {
                        return Err(bad(pos, "iteration step must have one extra variable"));
                    }
                    Term::iterate(step, seed, *times)
                }
            };
            built.push(t);
        }
        built.pop().ok_or_else(|| bad(0, "empty listing"))
    }

    /// Parses the text form produced by `Display`, for a term of the given
    /// arity.
    pub fn parse(text: &str, arity: usize) -> Result<Term> {
        let mut p = Parser { s: text.as_bytes(), pos: 0 };
        let t = p.term(arity)?;
        p.ws();
        if p.pos != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(t)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            Kind::Proj(i) => write!(f, "p{i}"),
            Kind::Apply { op, args } => {
                write!(f, "{op}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Kind::Iterate { step, seed, times } => write!(f, "iter[{times}]({step}, {seed})"),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.tree_size() <= 200 {
            write!(f, "Term/{}[{}]", self.arity(), self)
        } else {
            write!(f, "Term/{}[{} nodes]", self.arity(), self.dag_size())
        }
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.into() }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        self.ws();
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn ident(&mut self) -> Result<String> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() {
            let c = self.s[self.pos];
            let ok = c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' || (c == b'-' && self.pos > start);
            if !ok {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos || self.s[start].is_ascii_digit() {
            self.pos = start;
            return Err(self.err("expected a symbol"));
        }
        Ok(String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<u64> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| self.err("expected a number"))
    }

    fn term(&mut self, arity: usize) -> Result<Term> {
        let start = self.pos;
        let name = self.ident()?;
        if name == "iter" && self.peek() == Some(b'[') {
            self.eat(b'[')?;
            let times = self.number()?;
            self.eat(b']')?;
            self.eat(b'(')?;
            let step = self.term(arity + 1)?;
            self.eat(b',')?;
            let seed = self.term(arity)?;
            self.eat(b')')?;
            return Ok(Term::iterate(step, seed, times));
        }
        if self.peek() == Some(b'(') {
            self.eat(b'(')?;
            let mut args = vec![self.term(arity)?];
            while self.peek() == Some(b',') {
                self.eat(b',')?;
                args.push(self.term(arity)?);
            }
            self.eat(b')')?;
            return Ok(Term::apply(&name, args));
        }
        if let Some(digits) = name.strip_prefix('p') {
            if let Ok(i) = digits.parse::<usize>() {
                if i < arity {
                    return Ok(Term::proj(arity, i));
                }
                self.pos = start;
                return Err(self.err(&format!("variable p{i} out of range for arity {arity}")));
            }
        }
        self.pos = start;
        Err(self.err(&format!("symbol {name} needs arguments")))
    }
}

type Args = SmallVec<[Elem; 8]>;

/// Evaluates terms in one algebra, resolving symbols by name.
pub struct Evaluator<'a> {
    alg: &'a FiniteAlgebra,
    lookup: HashMap<&'a str, usize>,
    memo: HashMap<(usize, Args), Elem>,
}

impl<'a> Evaluator<'a> {
    pub fn new(alg: &'a FiniteAlgebra) -> Self {
        Evaluator { alg, lookup: op_lookup(alg), memo: HashMap::new() }
    }

    fn resolve(&self, op: &str, nargs: usize) -> Result<&'a Operation> {
        let i = *self.lookup.get(op).ok_or_else(|| Error::UnknownSymbol(op.to_string()))?;
        let o = self.alg.op(i);
        if o.arity() != nargs {
            return Err(Error::ArityMismatch { symbol: op.to_string(), expected: o.arity(), found: nargs });
        }
        Ok(o)
    }

    pub fn eval(&mut self, t: &Term, args: &[Elem]) -> Result<Elem> {
        if args.len() != t.arity() {
            return Err(Error::ArityMismatch { symbol: t.to_string(), expected: t.arity(), found: args.len() });
        }
        if let Some(&x) = args.iter().find(|&&x| x >= self.alg.size()) {
            return Err(Error::EntryOutOfRange { op: String::new(), index: x, value: x });
        }
        self.go(t, args)
    }

    fn go(&mut self, t: &Term, args: &[Elem]) -> Result<Elem> {
        match &t.0.kind {
            Kind::Proj(i) => Ok(args[*i]),
            Kind::Apply { op, args: children } => {
                let key = (t.id(), Args::from_slice(args));
                if let Some(&v) = self.memo.get(&key) {
                    return Ok(v);
                }
                let o = self.resolve(op, children.len())?;
                let mut vals: Args = SmallVec::new();
                for c in children {
                    vals.push(self.go(c, args)?);
                }
                let v = o.apply(&vals);
                self.memo.insert(key, v);
                Ok(v)
            }
            Kind::Iterate { step, seed, times } => {
                let key = (t.id(), Args::from_slice(args));
                if let Some(&v) = self.memo.get(&key) {
                    return Ok(v);
                }
                let n = self.alg.size();
                let mut map = Vec::with_capacity(n);
                let mut ext: Args = Args::from_slice(args);
                ext.push(0);
                for u in 0..n {
                    *ext.last_mut().unwrap() = u;
                    map.push(self.go(step, &ext)?);
                }
                let v0 = self.go(seed, args)?;
                let v = unary_power(&map, *times)[v0];
                self.memo.insert(key, v);
                Ok(v)
            }
        }
    }
}

/// `map` composed with itself `times` times, by repeated squaring.
pub fn unary_power(map: &[Elem], mut times: u64) -> Vec<Elem> {
    let mut result: Vec<Elem> = (0..map.len()).collect();
    let mut base = map.to_vec();
    while times > 0 {
        if times & 1 == 1 {
            result = result.iter().map(|&x| base[x]).collect();
        }
        times >>= 1;
        if times > 0 {
            base = base.iter().map(|&x| base[x]).collect();
        }
    }
    result
}

/// Value of `t` at `args` in `alg`.
pub fn eval(t: &Term, alg: &FiniteAlgebra, args: &[Elem]) -> Result<Elem> {
    Evaluator::new(alg).eval(t, args)
}

/// Largest table `realize_table` will build.
pub const MAX_TABLE: usize = 1 << 26;

/// The full table of the term operation of `t` on `alg`.
pub fn realize_table(t: &Term, alg: &FiniteAlgebra) -> Result<Operation> {
    realize_named(t, alg, &t.to_short_name())
}

/// As [`realize_table`], naming the resulting operation.
pub fn realize_named(t: &Term, alg: &FiniteAlgebra, name: &str) -> Result<Operation> {
    let lookup = op_lookup(alg);
    let mut memo: HashMap<usize, Arc<Vec<Elem>>> = HashMap::new();
    let table = table_of(t, alg, &lookup, &mut memo)?;
    Ok(Operation::from_table(name, t.arity(), alg.size(), (*table).clone()))
}

fn table_of(
    t: &Term,
    alg: &FiniteAlgebra,
    lookup: &HashMap<&str, usize>,
    memo: &mut HashMap<usize, Arc<Vec<Elem>>>,
) -> Result<Arc<Vec<Elem>>> {
    if let Some(tab) = memo.get(&t.id()) {
        return Ok(tab.clone());
    }
    let n = alg.size();
    let k = t.arity();
    let len = n
        .checked_pow(k as u32)
        .filter(|&l| l <= MAX_TABLE)
        .ok_or(Error::TooLarge { size: n, limit: MAX_TABLE })?;
    let out: Vec<Elem> = match &t.0.kind {
        Kind::Proj(i) => TupleIter::new(n, k).map(|x| x[*i]).collect(),
        Kind::Apply { op, args } => {
            let i = *lookup.get(&**op).ok_or_else(|| Error::UnknownSymbol(op.to_string()))?;
            let o = alg.op(i);
            if o.arity() != args.len() {
                return Err(Error::ArityMismatch { symbol: op.to_string(), expected: o.arity(), found: args.len() });
            }
            let tabs = args
                .iter()
                .map(|a| table_of(a, alg, lookup, memo))
                .collect::<Result<Vec<_>>>()?;
            let ot = o.table();
            (0..len)
                .map(|idx| ot[tabs.iter().fold(0, |acc, tab| acc * n + tab[idx])])
                .collect()
        }
        Kind::Iterate { step, seed, times } => {
            let st = table_of(step, alg, lookup, memo)?;
            let sd = table_of(seed, alg, lookup, memo)?;
            (0..len)
                .map(|idx| unary_power(&st[idx * n..idx * n + n], *times)[sd[idx]])
                .collect()
        }
    };
    let out = Arc::new(out);
    memo.insert(t.id(), out.clone());
    Ok(out)
}

impl Term {
    /// A short display name: the text form if small, otherwise a summary.
    pub fn to_short_name(&self) -> String {
        if self.tree_size() <= 64 {
            self.to_string()
        } else {
            format!("term/{}#{}", self.arity(), self.dag_size())
        }
    }
}

/// `left = right`, both of the same arity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identity {
    pub left: Term,
    pub right: Term,
}

impl Identity {
    pub fn new(left: Term, right: Term) -> Self {
        assert_eq!(left.arity(), right.arity(), "identity sides differ in arity");
        Identity { left, right }
    }

    pub fn arity(&self) -> usize {
        self.left.arity()
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.left, self.right)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdentityCheck {
    Holds,
    Counterexample(Vec<Elem>),
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        matches!(self, IdentityCheck::Holds)
    }
}

/// Exhaustive check; the counterexample is the lexicographically first.
pub fn check_identity(alg: &FiniteAlgebra, id: &Identity) -> Result<IdentityCheck> {
    let l = realize_table(&id.left, alg)?;
    let r = realize_table(&id.right, alg)?;
    for (idx, t) in TupleIter::new(alg.size(), id.arity()).enumerate() {
        if l.table()[idx] != r.table()[idx] {
            return Ok(IdentityCheck::Counterexample(t));
        }
    }
    Ok(IdentityCheck::Holds)
}

/// Value of a realized table at `args`.
pub fn lookup(op: &Operation, args: &[Elem]) -> Elem {
    op.table()[tuple_index(op.size(), args)]
}

/// Short constructors for tests and synthesis code.
pub mod build {
    use super::Term;

    pub fn x(k: usize) -> Term {
        Term::proj(k, 0)
    }
    pub fn y(k: usize) -> Term {
        Term::proj(k, 1)
    }
    pub fn z(k: usize) -> Term {
        Term::proj(k, 2)
    }
    pub fn op(name: &str, args: &[Term]) -> Term {
        Term::apply(name, args.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::build::*;
    use super::*;
    use crate::fixtures;

    #[test]
    fn hash_consing_shares_nodes() {
        let a = op("f", &[x(2), op("g", &[y(2), x(2)])]);
        let b = Term::parse("f(p0, g(p1, p0))", 2).unwrap();
        assert!(Arc::ptr_eq(&a.0, &b.0));
        assert_ne!(a, op("f", &[y(2), op("g", &[y(2), x(2)])]));
    }

    #[test]
    fn print_parse_round_trip() {
        for (s, k) in [
            ("f(p0, g(p1, p0, p1))", 2),
            ("p2", 3),
            ("iter[12](h(p0, p1, p3), f(p2, p0))", 3),
            ("maj(p0, min(p1, p1, p0), p0)", 2),
        ] {
            let t = Term::parse(s, k).unwrap();
            assert_eq!(t.to_string(), s);
        }
        assert!(Term::parse("f(p0, p2)", 2).is_err());
        assert!(Term::parse("f(p0,", 2).is_err());
        assert!(Term::parse("f", 2).is_err());
    }

    #[test]
    fn dag_round_trip() {
        let t = Term::parse("iter[12](h(p0, p1, p3), f(p2, f(p2, p0)))", 3).unwrap();
        let dag = t.to_dag();
        assert_eq!(dag.len(), t.dag_size());
        assert_eq!(Term::from_dag(&dag).unwrap(), t);
        assert!(Term::from_dag(&[DagNode::Apply { op: "f".into(), args: vec![0] }]).is_err());
    }

    #[test]
    fn eval_examples() {
        let ne = fixtures::no_edge();
        assert_eq!(eval(&op("f", &[x(2), y(2)]), &ne, &[0, 1]).unwrap(), 2);
        assert_eq!(eval(&Term::proj(3, 0), &ne, &[1, 2, 0]).unwrap(), 1);
        let z3 = fixtures::z3_affine();
        assert_eq!(eval(&op("h", &[x(3), y(3), z(3)]), &z3, &[1, 0, 0]).unwrap(), 1);
        assert_eq!(eval(&op("q", &[x(2), y(2)]), &ne, &[0, 1]), Err(Error::UnknownSymbol("q".into())));
        assert!(matches!(eval(&op("f", &[x(3), y(3), z(3)]), &ne, &[0, 1, 2]), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn realize_examples() {
        let sl = fixtures::sl2();
        let t = realize_table(&op("f", &[y(2), x(2)]), &sl).unwrap();
        assert_eq!(t.table(), sl.op_by_name("f").unwrap().table());

        let z3 = fixtures::z3_affine();
        let t = op("h", &[x(3), op("h", &[x(3), y(3), z(3)]), z(3)]);
        let tab = realize_table(&t, &z3).unwrap();
        for (i, v) in TupleIter::new(3, 3).enumerate() {
            assert_eq!(tab.table()[i], v[1]);
        }
    }

    #[test]
    fn iterate_matches_unrolled() {
        let ne = fixtures::no_edge();
        // v0 = g(x, y), v_{i+1} = f(x, v_i)
        let step = op("f", &[x(3), z(3)]);
        let seed = op("g", &[x(2), y(2)]);
        let mut unrolled = seed.clone();
        for m in 0..7u64 {
            let it = Term::iterate(step.clone(), seed.clone(), m);
            assert_eq!(
                realize_table(&it, &ne).unwrap().table(),
                realize_table(&unrolled, &ne).unwrap().table()
            );
            for t in TupleIter::new(3, 2) {
                assert_eq!(eval(&it, &ne, &t).unwrap(), eval(&unrolled, &ne, &t).unwrap());
            }
            unrolled = op("f", &[x(2), unrolled]);
        }
    }

    #[test]
    fn substitution_through_iterate() {
        let ne = fixtures::no_edge();
        let it = Term::iterate(op("g", &[z(3), x(3)]), op("f", &[y(2), x(2)]), 5);
        let swapped = it.permute(&[1, 0]);
        for t in TupleIter::new(3, 2) {
            assert_eq!(eval(&swapped, &ne, &t).unwrap(), eval(&it, &ne, &[t[1], t[0]]).unwrap());
        }
    }

    #[test]
    fn unary_power_by_squaring() {
        let map = vec![1, 2, 0, 3];
        assert_eq!(unary_power(&map, 0), vec![0, 1, 2, 3]);
        assert_eq!(unary_power(&map, 2), vec![2, 0, 1, 3]);
        assert_eq!(unary_power(&map, 3000), vec![0, 1, 2, 3]);
        assert_eq!(unary_power(&map, 3001), map);
    }

    #[test]
    fn identity_examples() {
        let sl = fixtures::sl2();
        let f = |a: Term, b: Term| op("f", &[a, b]);
        let absorb = Identity::new(f(x(2), f(x(2), y(2))), f(x(2), y(2)));
        assert!(check_identity(&sl, &absorb).unwrap().holds());

        let z3 = fixtures::z3_affine();
        let h = |a: Term, b: Term, c: Term| op("h", &[a, b, c]);
        let id = Identity::new(h(h(x(3), y(3), y(3)), y(3), y(3)), h(x(3), y(3), y(3)));
        assert!(check_identity(&z3, &id).unwrap().holds());

        let ne = fixtures::no_edge();
        let comm = Identity::new(f(x(2), y(2)), f(y(2), x(2)));
        assert_eq!(check_identity(&ne, &comm).unwrap(), IdentityCheck::Counterexample(vec![0, 1]));
    }
}
