//! Finite-automaton layer: ε-cycle elimination, exact run counting and the
//! exactly-one-run check by path-count equivalence with the one-state
//! universal automaton.

use std::collections::{HashMap, HashSet, VecDeque};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::{Label, StateId, SymbolId, Vass, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("the automaton has ε-cycles; eliminate them first")]
    EpsilonCycle,
    #[error("expected a finite automaton (dimension 0), got dimension {dim}")]
    NotFiniteAutomaton { dim: usize },
    #[error("state budget of {budget} exceeded")]
    StateBudgetExceeded { budget: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaEdge {
    pub label: Label,
    pub dst: usize,
}

/// A finite automaton whose states may be discovered on demand. State
/// indices are dense and assigned in discovery order.
pub trait FaSource {
    fn initial(&mut self) -> usize;
    fn is_final(&mut self, s: usize) -> bool;
    fn edges(&mut self, s: usize) -> Result<Vec<FaEdge>, EngineError>;
    fn symbol_count(&self) -> usize;
    /// States discovered so far.
    fn state_count(&self) -> usize;
}

/// A dimension-0 VASS viewed as a finite automaton.
#[derive(Debug, Clone)]
pub struct ExplicitFa {
    initial: usize,
    finals: Vec<bool>,
    edges: Vec<Vec<FaEdge>>,
    symbols: usize,
}

impl ExplicitFa {
    pub fn from_vass(v: &Vass) -> Result<Self, EngineError> {
        if v.dim() != 0 {
            return Err(EngineError::NotFiniteAutomaton { dim: v.dim() });
        }
        let n = v.state_count();
        let edges = (0..n)
            .map(|q| {
                v.outgoing(StateId(q))
                    .iter()
                    .map(|&t| {
                        let t = v.transition(t);
                        FaEdge {
                            label: t.label,
                            dst: t.dst.0,
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(ExplicitFa {
            initial: v.initial().0,
            finals: (0..n).map(|q| v.is_final(StateId(q))).collect(),
            edges,
            symbols: v.alphabet().len(),
        })
    }
}

impl FaSource for ExplicitFa {
    fn initial(&mut self) -> usize {
        self.initial
    }

    fn is_final(&mut self, s: usize) -> bool {
        self.finals[s]
    }

    fn edges(&mut self, s: usize) -> Result<Vec<FaEdge>, EngineError> {
        Ok(self.edges[s].clone())
    }

    fn symbol_count(&self) -> usize {
        self.symbols
    }

    fn state_count(&self) -> usize {
        self.finals.len()
    }
}

/// Drops every ε-edge that lies on an ε-cycle, i.e. `u →ε→ v` with `u`
/// ε-reachable from `v`.
pub struct CycleFree<S> {
    inner: S,
    eps_reach: HashMap<usize, HashSet<usize>>,
}

impl<S: FaSource> CycleFree<S> {
    pub fn new(inner: S) -> Self {
        CycleFree {
            inner,
            eps_reach: HashMap::new(),
        }
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }

    pub fn into_inner(self) -> S {
        self.inner
    }

    fn reach(&mut self, from: usize) -> Result<&HashSet<usize>, EngineError> {
        if !self.eps_reach.contains_key(&from) {
            let mut seen = HashSet::from([from]);
            let mut todo = vec![from];
            while let Some(s) = todo.pop() {
                for e in self.inner.edges(s)? {
                    if e.label.is_epsilon() && seen.insert(e.dst) {
                        todo.push(e.dst);
                    }
                }
            }
            self.eps_reach.insert(from, seen);
        }
        Ok(&self.eps_reach[&from])
    }
}

impl<S: FaSource> FaSource for CycleFree<S> {
    fn initial(&mut self) -> usize {
        self.inner.initial()
    }

    fn is_final(&mut self, s: usize) -> bool {
        self.inner.is_final(s)
    }

    fn edges(&mut self, s: usize) -> Result<Vec<FaEdge>, EngineError> {
        let all = self.inner.edges(s)?;
        let mut kept = Vec::with_capacity(all.len());
        for e in all {
            if e.label.is_epsilon() && self.reach(e.dst)?.contains(&s) {
                continue;
            }
            kept.push(e);
        }
        Ok(kept)
    }

    fn symbol_count(&self) -> usize {
        self.inner.symbol_count()
    }

    fn state_count(&self) -> usize {
        self.inner.state_count()
    }
}

/// Strongly connected components of the ε-graph (iterative Tarjan); returns
/// the component index of every state.
fn epsilon_components(v: &Vass) -> Vec<usize> {
    let n = v.state_count();
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|q| {
            v.outgoing(StateId(q))
                .iter()
                .map(|&t| v.transition(t))
                .filter(|t| t.label.is_epsilon())
                .map(|t| t.dst.0)
                .collect()
        })
        .collect();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (u, ref mut i)) = call.last_mut() {
            if let Some(&w) = succ[u].get(*i) {
                *i += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[u] = low[u].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[u]);
            }
            if low[u] == index[u] {
                while let Some(w) = stack.pop() {
                    on_stack[w] = false;
                    comp[w] = next_comp;
                    if w == u {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }
    comp
}

/// Whether some ε-transition lies on an ε-cycle.
pub fn has_epsilon_cycle(v: &Vass) -> bool {
    let comp = epsilon_components(v);
    v.transitions()
        .iter()
        .any(|t| t.label.is_epsilon() && comp[t.src.0] == comp[t.dst.0])
}

/// Removes every ε-transition inside a strongly connected component of the
/// ε-graph, ε-self-loops included.
pub fn eliminate_epsilon_cycles(v: &Vass) -> Vass {
    let comp = epsilon_components(v);
    let kept = v
        .transitions()
        .iter()
        .filter(|t| !(t.label.is_epsilon() && comp[t.src.0] == comp[t.dst.0]))
        .cloned()
        .collect();
    Vass::new(
        v.dim(),
        v.alphabet().to_vec(),
        v.states().to_vec(),
        v.initial(),
        v.finals().iter().copied().collect(),
        kept,
    )
    .expect("removing transitions keeps the instance valid")
}

/// Sparse nonnegative count vector over automaton states.
type Counts = HashMap<usize, BigUint>;

/// Adds every ε-extension to `x`: `x · Σ_k M_ε^k`. The source must be
/// ε-acyclic.
fn eps_close<S: FaSource>(src: &mut S, x: Counts) -> Result<Counts, EngineError> {
    // topological order of the ε-states reachable from the support
    let mut order = Vec::new();
    let mut seen = HashSet::new();
    let mut roots: Vec<usize> = x.keys().copied().collect();
    roots.sort_unstable();
    let mut eps_succ: HashMap<usize, Vec<usize>> = HashMap::new();
    for root in roots {
        if !seen.insert(root) {
            continue;
        }
        let mut call = vec![(root, 0usize)];
        while let Some(&mut (u, ref mut i)) = call.last_mut() {
            if !eps_succ.contains_key(&u) {
                let succ = src
                    .edges(u)?
                    .into_iter()
                    .filter(|e| e.label.is_epsilon())
                    .map(|e| e.dst)
                    .collect();
                eps_succ.insert(u, succ);
            }
            if let Some(&w) = eps_succ[&u].get(*i) {
                *i += 1;
                if seen.insert(w) {
                    call.push((w, 0));
                }
                continue;
            }
            order.push(u);
            call.pop();
        }
    }
    let mut y = x;
    for &u in order.iter().rev() {
        let Some(c) = y.get(&u).cloned() else {
            continue;
        };
        for &w in &eps_succ[&u] {
            *y.entry(w).or_default() += &c;
        }
    }
    Ok(y)
}

fn step<S: FaSource>(src: &mut S, x: &Counts, a: SymbolId) -> Result<Counts, EngineError> {
    let mut support: Vec<usize> = x.keys().copied().collect();
    support.sort_unstable();
    let mut out = Counts::new();
    for u in support {
        for e in src.edges(u)? {
            if e.label == Label::Symbol(a) {
                *out.entry(e.dst).or_default() += &x[&u];
            }
        }
    }
    eps_close(src, out)
}

fn accepting<S: FaSource>(src: &mut S, x: &Counts) -> BigUint {
    let mut total = BigUint::zero();
    for (&s, c) in x {
        if src.is_final(s) {
            total += c;
        }
    }
    total
}

fn initial_counts<S: FaSource>(src: &mut S) -> Result<Counts, EngineError> {
    let q0 = src.initial();
    eps_close(src, Counts::from([(q0, BigUint::one())]))
}

/// Number of accepting runs of an ε-acyclic source on `word`.
pub fn count_word_runs_source<S: FaSource>(src: &mut S, word: &[SymbolId]) -> Result<BigUint, EngineError> {
    let mut x = initial_counts(src)?;
    for &a in word {
        x = step(src, &x, a)?;
    }
    Ok(accepting(src, &x))
}

/// Number of accepting runs of a dimension-0 VASS on `word`.
pub fn count_word_runs_fa(fa: &Vass, word: &[SymbolId]) -> Result<BigUint, EngineError> {
    let mut src = ExplicitFa::from_vass(fa)?;
    if has_epsilon_cycle(fa) {
        return Err(EngineError::EpsilonCycle);
    }
    count_word_runs_source(&mut src, word)
}

/// Linearly independent integer vectors kept in echelon form.
#[derive(Debug, Default)]
struct Basis {
    rows: Vec<(usize, Vec<BigInt>)>,
}

impl Basis {
    fn len(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `x` against the basis; adds it and returns true when it is
    /// independent.
    fn insert(&mut self, mut x: Vec<BigInt>) -> bool {
        for (pivot, row) in &self.rows {
            let c = x.get(*pivot).cloned().unwrap_or_default();
            if c.is_zero() {
                continue;
            }
            let p = &row[*pivot];
            if x.len() < row.len() {
                x.resize(row.len(), BigInt::zero());
            }
            for (i, xi) in x.iter_mut().enumerate() {
                let r = row.get(i).cloned().unwrap_or_default();
                *xi = &*xi * p - &c * r;
            }
            normalize(&mut x);
        }
        match x.iter().position(|e| !e.is_zero()) {
            Some(pivot) => {
                normalize(&mut x);
                self.rows.push((pivot, x));
                true
            }
            None => false,
        }
    }
}

fn normalize(x: &mut [BigInt]) {
    let g = x.iter().fold(BigInt::zero(), |g, e| g.gcd(e));
    if g > BigInt::one() {
        for e in x.iter_mut() {
            *e /= &g;
        }
    }
}

/// Coordinates: 0 is the reference count 1, `1 + s` is state `s`.
fn extended(x: &Counts, states: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); states + 1];
    v[0] = BigInt::one();
    for (&s, c) in x {
        if s + 1 >= v.len() {
            v.resize(s + 2, BigInt::zero());
        }
        v[s + 1] = BigInt::from_biguint(Sign::Plus, c.clone());
    }
    v
}

/// Outcome of [`exact_one_run_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OneRunVerdict {
    ExactlyOne { basis_size: usize, words_explored: usize },
    Counterexample { word: Word, count: BigUint },
}

/// Decides whether every word has exactly one accepting run. Words are
/// explored breadth-first, children in alphabet order; a word whose count
/// vector depends on those already kept is not extended.
pub fn exact_one_run_check_source<S: FaSource>(src: &mut S) -> Result<OneRunVerdict, EngineError> {
    let k = src.symbol_count();
    let mut basis = Basis::default();
    let mut explored = 0usize;
    let root = initial_counts(src)?;
    let mut queue = VecDeque::new();
    let mut consider = |src: &mut S, word: Word, x: Counts, queue: &mut VecDeque<(Word, Counts)>| {
        explored += 1;
        let acc = accepting(src, &x);
        if !acc.is_one() {
            return Some(OneRunVerdict::Counterexample { word, count: acc });
        }
        if basis.insert(extended(&x, src.state_count())) {
            queue.push_back((word, x));
        }
        None
    };
    if let Some(found) = consider(src, Word::empty(), root, &mut queue) {
        return Ok(found);
    }
    while let Some((word, x)) = queue.pop_front() {
        for a in 0..k {
            let child = step(src, &x, SymbolId(a))?;
            let mut w = word.clone();
            w.push(SymbolId(a));
            if let Some(found) = consider(src, w, child, &mut queue) {
                return Ok(found);
            }
        }
    }
    drop(consider);
    Ok(OneRunVerdict::ExactlyOne {
        basis_size: basis.len(),
        words_explored: explored,
    })
}

/// [`exact_one_run_check_source`] on a dimension-0 VASS after ε-cycle
/// elimination.
pub fn exact_one_run_check(fa: &Vass) -> Result<OneRunVerdict, EngineError> {
    let cleaned = eliminate_epsilon_cycles(fa);
    let mut src = ExplicitFa::from_vass(&cleaned)?;
    exact_one_run_check_source(&mut src)
}

/// Outcome of [`shortest_rejected_word`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectedSearch {
    Found(Word),
    /// Every word is accepted.
    None,
    LimitReached,
}

fn eps_reach_set<S: FaSource>(src: &mut S, mut set: Vec<usize>) -> Result<Vec<usize>, EngineError> {
    let mut seen: HashSet<usize> = set.iter().copied().collect();
    let mut todo = set.clone();
    while let Some(s) = todo.pop() {
        for e in src.edges(s)? {
            if e.label.is_epsilon() && seen.insert(e.dst) {
                todo.push(e.dst);
                set.push(e.dst);
            }
        }
    }
    set.sort_unstable();
    Ok(set)
}

/// Length-lexicographically least rejected word, by breadth-first search
/// over the subset construction. Gives up after `max_subsets` subsets.
pub fn shortest_rejected_word<S: FaSource>(src: &mut S, max_subsets: usize) -> Result<RejectedSearch, EngineError> {
    let k = src.symbol_count();
    let q0 = src.initial();
    let start = eps_reach_set(src, vec![q0])?;
    let mut seen: HashSet<Vec<usize>> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(Word::empty(), start)]);
    while let Some((word, set)) = queue.pop_front() {
        let mut accepted = false;
        for &s in &set {
            accepted |= src.is_final(s);
        }
        if !accepted {
            return Ok(RejectedSearch::Found(word));
        }
        let mut edges = Vec::with_capacity(set.len());
        for &s in &set {
            edges.push(src.edges(s)?);
        }
        for a in 0..k {
            let mut next: Vec<usize> = edges
                .iter()
                .flatten()
                .filter(|e| e.label == Label::Symbol(SymbolId(a)))
                .map(|e| e.dst)
                .collect();
            next.sort_unstable();
            next.dedup();
            let next = eps_reach_set(src, next)?;
            if seen.insert(next.clone()) {
                if seen.len() > max_subsets {
                    return Ok(RejectedSearch::LimitReached);
                }
                let mut w = word.clone();
                w.push(SymbolId(a));
                queue.push_back((w, next));
            }
        }
    }
    Ok(RejectedSearch::None)
}
