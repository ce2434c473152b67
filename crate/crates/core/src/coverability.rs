//! Control-state coverability.
//!
//! Verdicts come from the backward saturation over upward-closed sets, which
//! always terminates. Witness runs come from a forward breadth-first search
//! with domination pruning under a node cap.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::model::{add_effect, dominates, Configuration, Label, Run, StateId, SymbolId, TransitionId, Vass};

/// Default node cap of the forward witness search.
pub const DEFAULT_NODE_CAP: usize = 1_000_000;

/// Finite antichain of configurations standing for its upward closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpwardBasis {
    dim: usize,
    per_state: Vec<Vec<Vec<BigInt>>>,
}

impl UpwardBasis {
    pub fn new(state_count: usize, dim: usize) -> Self {
        UpwardBasis {
            dim,
            per_state: vec![Vec::new(); state_count],
        }
    }

    /// Upward closure of `{f(0̄) : f final}`.
    pub fn finals(v: &Vass) -> Self {
        let mut basis = UpwardBasis::new(v.state_count(), v.dim());
        for &f in v.finals() {
            basis.insert(Configuration::zero(f, v.dim()));
        }
        basis
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `c` unless it is already covered; drops the elements `c`
    /// dominates. Returns whether `c` was added.
    pub fn insert(&mut self, c: Configuration) -> bool {
        let bucket = &mut self.per_state[c.state.0];
        if bucket.iter().any(|b| dominates(&c.counters, b)) {
            return false;
        }
        bucket.retain(|b| !dominates(b, &c.counters));
        bucket.push(c.counters);
        true
    }

    /// Whether `c` lies in the upward closure.
    pub fn contains(&self, c: &Configuration) -> bool {
        self.per_state
            .get(c.state.0)
            .is_some_and(|bucket| bucket.iter().any(|b| dominates(&c.counters, b)))
    }

    fn has_element(&self, c: &Configuration) -> bool {
        self.per_state[c.state.0].iter().any(|b| *b == c.counters)
    }

    pub fn len(&self) -> usize {
        self.per_state.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn elements(&self) -> impl Iterator<Item = Configuration> + '_ {
        self.per_state.iter().enumerate().flat_map(|(q, bucket)| {
            bucket
                .iter()
                .map(move |c| Configuration::new(StateId(q), c.clone()))
        })
    }

    /// No element dominates another.
    pub fn is_antichain(&self) -> bool {
        self.per_state.iter().all(|bucket| {
            bucket.iter().enumerate().all(|(i, a)| {
                bucket
                    .iter()
                    .enumerate()
                    .all(|(j, b)| i == j || !dominates(a, b))
            })
        })
    }
}

/// Transition structure seen by the search procedures. State indices are
/// dense; transitions report the original `TransitionId` they come from.
pub(crate) trait System {
    fn state_count(&self) -> usize;
    fn for_each_incoming(&self, s: usize, f: &mut dyn FnMut(usize, &[BigInt]));
    fn for_each_outgoing(&self, s: usize, f: &mut dyn FnMut(TransitionId, usize, &[BigInt]));
}

impl System for Vass {
    fn state_count(&self) -> usize {
        Vass::state_count(self)
    }

    fn for_each_incoming(&self, s: usize, f: &mut dyn FnMut(usize, &[BigInt])) {
        for &t in self.incoming(StateId(s)) {
            let t = self.transition(t);
            f(t.src.0, &t.effect);
        }
    }

    fn for_each_outgoing(&self, s: usize, f: &mut dyn FnMut(TransitionId, usize, &[BigInt])) {
        for &tid in self.outgoing(StateId(s)) {
            let t = self.transition(tid);
            f(tid, t.dst.0, &t.effect);
        }
    }
}

/// Product of a VASS with the line automaton of a fixed word: state
/// `(q, i)` is `i · n + q`, where `i` letters have been read.
pub(crate) struct LineProduct<'a> {
    v: &'a Vass,
    word: &'a [SymbolId],
}

impl<'a> LineProduct<'a> {
    pub(crate) fn new(v: &'a Vass, word: &'a [SymbolId]) -> Self {
        LineProduct { v, word }
    }

    fn split(&self, s: usize) -> (StateId, usize) {
        let n = self.v.state_count();
        (StateId(s % n), s / n)
    }

    pub(crate) fn encode(&self, q: StateId, pos: usize) -> usize {
        pos * self.v.state_count() + q.0
    }
}

impl System for LineProduct<'_> {
    fn state_count(&self) -> usize {
        self.v.state_count() * (self.word.len() + 1)
    }

    fn for_each_incoming(&self, s: usize, f: &mut dyn FnMut(usize, &[BigInt])) {
        let (q, pos) = self.split(s);
        for &tid in self.v.incoming(q) {
            let t = self.v.transition(tid);
            match t.label {
                Label::Epsilon => f(self.encode(t.src, pos), &t.effect),
                Label::Symbol(a) => {
                    if pos > 0 && self.word[pos - 1] == a {
                        f(self.encode(t.src, pos - 1), &t.effect)
                    }
                }
            }
        }
    }

    fn for_each_outgoing(&self, s: usize, f: &mut dyn FnMut(TransitionId, usize, &[BigInt])) {
        let (q, pos) = self.split(s);
        for &tid in self.v.outgoing(q) {
            let t = self.v.transition(tid);
            match t.label {
                Label::Epsilon => f(tid, self.encode(t.dst, pos), &t.effect),
                Label::Symbol(a) => {
                    if pos < self.word.len() && self.word[pos] == a {
                        f(tid, self.encode(t.dst, pos + 1), &t.effect)
                    }
                }
            }
        }
    }
}

/// Minimal predecessor of the upward closure of `c` through a transition
/// with `effect`: `max(c − effect, 0)` per coordinate.
fn min_predecessor(c: &[BigInt], effect: &[BigInt]) -> Vec<BigInt> {
    c.iter()
        .zip(effect)
        .map(|(x, e)| {
            let p = x - e;
            if p.is_negative() {
                BigInt::zero()
            } else {
                p
            }
        })
        .collect()
}

/// Backward saturation of `targets`. With `start` given, stops as soon as
/// the basis covers it and reports whether it did.
fn saturate_from<S: System + ?Sized>(
    sys: &S,
    targets: &UpwardBasis,
    start: Option<&Configuration>,
) -> (bool, UpwardBasis) {
    let mut basis = targets.clone();
    if start.is_some_and(|s| basis.contains(s)) {
        return (true, basis);
    }
    let mut work: VecDeque<Configuration> = basis.elements().collect();
    while let Some(c) = work.pop_front() {
        // superseded by a smaller element since it was queued
        if !basis.has_element(&c) {
            continue;
        }
        let mut found = false;
        let mut fresh = Vec::new();
        sys.for_each_incoming(c.state.0, &mut |src, effect| {
            if found {
                return;
            }
            let pred = Configuration::new(StateId(src), min_predecessor(&c.counters, effect));
            if basis.insert(pred.clone()) {
                if start.is_some_and(|s| s.covers(&pred)) {
                    found = true;
                }
                fresh.push(pred);
            }
        });
        if found {
            return (true, basis);
        }
        work.extend(fresh);
    }
    (false, basis)
}

pub(crate) fn saturate<S: System + ?Sized>(sys: &S, targets: &UpwardBasis, start: &Configuration) -> bool {
    saturate_from(sys, targets, Some(start)).0
}

/// The full set of configurations from which `targets` is coverable.
pub(crate) fn backward_basis<S: System + ?Sized>(sys: &S, targets: &UpwardBasis) -> UpwardBasis {
    saturate_from(sys, targets, None).1
}

/// Whether some configuration in the upward closure of `targets` is
/// reachable from `start`.
pub fn backward_coverable(v: &Vass, targets: &UpwardBasis, start: &Configuration) -> bool {
    assert_eq!(targets.dim(), v.dim(), "target dimension mismatch");
    saturate(v, targets, start)
}

/// Outcome of the forward witness search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ForwardOutcome {
    Found(Run),
    /// The pruned search space was exhausted without reaching a target.
    Exhausted,
    /// The node cap tripped first.
    CapReached,
}

/// Breadth-first search from `start` for a configuration whose state
/// satisfies `is_target`. A configuration dominated by an already visited
/// one of the same state is discarded, which keeps the first hit shortest.
pub(crate) fn forward_search<S: System + ?Sized>(
    sys: &S,
    start: &Configuration,
    is_target: &dyn Fn(usize) -> bool,
    node_cap: usize,
) -> ForwardOutcome {
    struct Node {
        state: usize,
        counters: Vec<BigInt>,
        parent: usize,
        via: Option<TransitionId>,
    }
    if is_target(start.state.0) {
        return ForwardOutcome::Found(Run::default());
    }
    let mut nodes = vec![Node {
        state: start.state.0,
        counters: start.counters.clone(),
        parent: 0,
        via: None,
    }];
    let mut visited: Vec<Vec<Vec<BigInt>>> = vec![Vec::new(); sys.state_count()];
    visited[start.state.0].push(start.counters.clone());
    let mut queue = VecDeque::from([0usize]);
    let rebuild = |nodes: &[Node], mut i: usize| {
        let mut steps = Vec::new();
        while let Some(t) = nodes[i].via {
            steps.push(t);
            i = nodes[i].parent;
        }
        steps.reverse();
        Run(steps)
    };
    while let Some(i) = queue.pop_front() {
        let mut hit = None;
        let mut capped = false;
        let mut fresh = Vec::new();
        let (state, counters) = (nodes[i].state, nodes[i].counters.clone());
        sys.for_each_outgoing(state, &mut |tid, dst, effect| {
            if hit.is_some() || capped {
                return;
            }
            let Some(next) = add_effect(&counters, effect) else {
                return;
            };
            let seen = &mut visited[dst];
            if seen.iter().any(|s| dominates(s, &next)) {
                return;
            }
            seen.retain(|s| !dominates(&next, s));
            seen.push(next.clone());
            fresh.push(Node {
                state: dst,
                counters: next,
                parent: i,
                via: Some(tid),
            });
            if is_target(dst) {
                hit = Some(fresh.len() - 1);
            }
            if nodes.len() + fresh.len() > node_cap {
                capped = true;
            }
        });
        let base = nodes.len();
        nodes.extend(fresh);
        if let Some(k) = hit {
            return ForwardOutcome::Found(rebuild(&nodes, base + k));
        }
        if capped {
            return ForwardOutcome::CapReached;
        }
        queue.extend(base..nodes.len());
    }
    ForwardOutcome::Exhausted
}

/// Result of [`emptiness`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Emptiness {
    Empty,
    /// Nonempty; `witness` is `None` when the node cap tripped.
    NonEmpty { witness: Option<Run> },
}

impl Emptiness {
    pub fn is_empty(&self) -> bool {
        matches!(self, Emptiness::Empty)
    }
}

/// Decides whether `L(v)` is empty and, if not, looks for a shortest
/// accepting run from `q₀(0̄)`.
pub fn emptiness(v: &Vass, node_cap: usize) -> Emptiness {
    let start = Configuration::initial(v);
    if !backward_coverable(v, &UpwardBasis::finals(v), &start) {
        return Emptiness::Empty;
    }
    let witness = match forward_search(v, &start, &|s| v.is_final(StateId(s)), node_cap) {
        ForwardOutcome::Found(run) => Some(run),
        ForwardOutcome::CapReached => None,
        ForwardOutcome::Exhausted => {
            debug_assert!(false, "forward search exhausted on a coverable instance");
            None
        }
    };
    Emptiness::NonEmpty { witness }
}

fn line_targets(v: &Vass, product: &LineProduct<'_>, len: usize) -> UpwardBasis {
    let mut targets = UpwardBasis::new(product.state_count(), v.dim());
    for &f in v.finals() {
        targets.insert(Configuration::zero(StateId(product.encode(f, len)), v.dim()));
    }
    targets
}

/// Configurations `(q, i, ū)` of the line product from which the rest of
/// `word` after position `i` can be read into a final state.
pub(crate) fn word_liveness<'a>(v: &'a Vass, word: &'a [SymbolId]) -> (LineProduct<'a>, UpwardBasis) {
    let product = LineProduct::new(v, word);
    let targets = line_targets(v, &product, word.len());
    let basis = backward_basis(&product, &targets);
    (product, basis)
}

/// Whether `word` is accepted from `start`.
pub fn accepts_from(v: &Vass, start: &Configuration, word: &[SymbolId]) -> bool {
    let product = LineProduct::new(v, word);
    let targets = line_targets(v, &product, word.len());
    let start = Configuration::new(StateId(product.encode(start.state, 0)), start.counters.clone());
    saturate(&product, &targets, &start)
}

/// `w ∈ L(v)`.
pub fn membership(v: &Vass, word: &[SymbolId]) -> bool {
    accepts_from(v, &Configuration::initial(v), word)
}

/// Forward search for an accepting run reading `word` from `start`; the
/// returned run is a sequence of transitions of `v`.
pub fn forward_witness_from(
    v: &Vass,
    start: &Configuration,
    word: &[SymbolId],
    node_cap: usize,
) -> ForwardOutcome {
    let product = LineProduct::new(v, word);
    let n = v.state_count();
    let last = word.len();
    let start = Configuration::new(StateId(product.encode(start.state, 0)), start.counters.clone());
    forward_search(
        &product,
        &start,
        &|s| s / n == last && v.is_final(StateId(s % n)),
        node_cap,
    )
}
