//! Unambiguity checking through a self-product that simulates two runs on
//! the same word: the shared prefix once, then the two suffixes after the
//! first position where the runs differ.
//!
//! Product states:
//! - `Same(q)`: both runs are at the same configuration (counters doubled).
//! - `Diff(p, q)`: the runs have differed; letters are read in lockstep and
//!   ε-steps move one half at a time.
//! - `Wait(p, q)`: the first run stopped at its split state and is about to
//!   read a letter (or to end), while the second run takes ε-steps.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::coverability::{backward_coverable, forward_search, ForwardOutcome, UpwardBasis, DEFAULT_NODE_CAP};
use crate::model::{Configuration, Label, Run, StateId, Transition, TransitionId, Vass, Word};
use crate::oracle::{brute_unambiguous_up_to, RunCount};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProductState {
    Same(StateId),
    Diff(StateId, StateId),
    Wait(StateId, StateId),
}

/// One product transition as the pair of original transitions it moves;
/// `None` means that half stays put.
pub type Move = (Option<TransitionId>, Option<TransitionId>);

#[derive(Debug, Clone)]
pub struct DivergenceProduct {
    pub product: Vass,
    pub states: Vec<ProductState>,
    pub moves: Vec<Move>,
}

impl DivergenceProduct {
    /// The two runs of the original VASS simulated by a product run.
    pub fn project(&self, run: &Run) -> (Run, Run) {
        let mut first = Vec::new();
        let mut second = Vec::new();
        for &t in run.steps() {
            let (a, b) = self.moves[t.0];
            first.extend(a);
            second.extend(b);
        }
        (Run(first), Run(second))
    }
}

struct Draft {
    states: Vec<ProductState>,
    index: HashMap<ProductState, usize>,
    edges: Vec<(usize, Label, Vec<BigInt>, usize, Move)>,
}

impl Draft {
    fn id(&mut self, s: ProductState) -> usize {
        if let Some(&i) = self.index.get(&s) {
            return i;
        }
        self.states.push(s);
        self.index.insert(s, self.states.len() - 1);
        self.states.len() - 1
    }

    fn add(&mut self, src: ProductState, label: Label, effect: Vec<BigInt>, dst: ProductState, mv: Move) {
        let (s, d) = (self.id(src), self.id(dst));
        self.edges.push((s, label, effect, d, mv));
    }
}

fn pair(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    a.iter().chain(b).cloned().collect()
}

fn state_name(s: ProductState) -> String {
    match s {
        ProductState::Same(q) => format!("s{}", q.0),
        ProductState::Diff(p, q) => format!("d{}_{}", p.0, q.0),
        ProductState::Wait(p, q) => format!("w{}_{}", p.0, q.0),
    }
}

/// Builds the first-divergence product. Its language is the set of words
/// with at least two accepting runs.
pub fn build_divergence_product(v: &Vass) -> DivergenceProduct {
    let n = v.state_count();
    let zero = vec![BigInt::zero(); v.dim()];
    let mut draft = Draft {
        states: Vec::new(),
        index: Default::default(),
        edges: Vec::new(),
    };
    draft.id(ProductState::Same(v.initial()));
    let out = |q: usize| -> Vec<(TransitionId, &Transition)> {
        v.outgoing(StateId(q))
            .iter()
            .map(|&t| (t, v.transition(t)))
            .collect()
    };
    for q in 0..n {
        let same = ProductState::Same(StateId(q));
        let ts = out(q);
        for &(i, t) in &ts {
            draft.add(
                same,
                t.label,
                pair(&t.effect, &t.effect),
                ProductState::Same(t.dst),
                (Some(i), Some(i)),
            );
        }
        for (k, &(i1, t1)) in ts.iter().enumerate() {
            for &(i2, t2) in &ts[k + 1..] {
                if t1.label == t2.label {
                    draft.add(
                        same,
                        t1.label,
                        pair(&t1.effect, &t2.effect),
                        ProductState::Diff(t1.dst, t2.dst),
                        (Some(i1), Some(i2)),
                    );
                }
            }
        }
        for &(i, t) in &ts {
            if t.label.is_epsilon() {
                draft.add(
                    same,
                    Label::Epsilon,
                    pair(&zero, &t.effect),
                    ProductState::Wait(StateId(q), t.dst),
                    (None, Some(i)),
                );
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            let (ps, qs) = (StateId(p), StateId(q));
            let (op, oq) = (out(p), out(q));
            let wait = ProductState::Wait(ps, qs);
            let diff = ProductState::Diff(ps, qs);
            for &(i, t) in &oq {
                if t.label.is_epsilon() {
                    draft.add(wait, Label::Epsilon, pair(&zero, &t.effect), ProductState::Wait(ps, t.dst), (None, Some(i)));
                    draft.add(diff, Label::Epsilon, pair(&zero, &t.effect), ProductState::Diff(ps, t.dst), (None, Some(i)));
                }
            }
            for &(i, t) in &op {
                if t.label.is_epsilon() {
                    draft.add(diff, Label::Epsilon, pair(&t.effect, &zero), ProductState::Diff(t.dst, qs), (Some(i), None));
                }
            }
            for &(i1, t1) in &op {
                for &(i2, t2) in &oq {
                    if !t1.label.is_epsilon() && t1.label == t2.label {
                        let effect = pair(&t1.effect, &t2.effect);
                        let dst = ProductState::Diff(t1.dst, t2.dst);
                        draft.add(wait, t1.label, effect.clone(), dst, (Some(i1), Some(i2)));
                        draft.add(diff, t1.label, effect, dst, (Some(i1), Some(i2)));
                    }
                }
            }
        }
    }
    trim(v, draft)
}

fn is_accepting(v: &Vass, s: ProductState) -> bool {
    match s {
        ProductState::Same(_) => false,
        ProductState::Diff(p, q) | ProductState::Wait(p, q) => v.is_final(p) && v.is_final(q),
    }
}

/// Keeps the states that are reachable from the initial state and can reach
/// an accepting one, plus the initial state itself.
fn trim(v: &Vass, draft: Draft) -> DivergenceProduct {
    let m = draft.states.len();
    let mut succ = vec![Vec::new(); m];
    let mut pred = vec![Vec::new(); m];
    for (s, _, _, d, _) in &draft.edges {
        succ[*s].push(*d);
        pred[*d].push(*s);
    }
    let sweep = |seeds: Vec<usize>, adj: &Vec<Vec<usize>>| {
        let mut seen = vec![false; m];
        let mut todo = seeds;
        for &s in &todo {
            seen[s] = true;
        }
        while let Some(s) = todo.pop() {
            for &d in &adj[s] {
                if !seen[d] {
                    seen[d] = true;
                    todo.push(d);
                }
            }
        }
        seen
    };
    let forward = sweep(vec![0], &succ);
    let accepting: Vec<usize> = (0..m).filter(|&s| is_accepting(v, draft.states[s])).collect();
    let backward = sweep(accepting, &pred);
    let keep: Vec<bool> = (0..m).map(|s| s == 0 || (forward[s] && backward[s])).collect();
    let mut rename = vec![usize::MAX; m];
    let mut states = Vec::new();
    for s in 0..m {
        if keep[s] {
            rename[s] = states.len();
            states.push(draft.states[s]);
        }
    }
    let mut transitions = Vec::new();
    let mut moves = Vec::new();
    for (s, label, effect, d, mv) in draft.edges {
        if keep[s] && keep[d] && backward[d] {
            transitions.push(Transition {
                src: StateId(rename[s]),
                label,
                effect,
                dst: StateId(rename[d]),
            });
            moves.push(mv);
        }
    }
    let finals = (0..states.len())
        .filter(|&s| is_accepting(v, states[s]))
        .map(StateId)
        .collect();
    let product = Vass::new(
        2 * v.dim(),
        v.alphabet().to_vec(),
        states.iter().map(|&s| state_name(s)).collect(),
        StateId(0),
        finals,
        transitions,
    )
    .expect("product of a valid instance is valid");
    DivergenceProduct { product, states, moves }
}

#[derive(Debug, Clone, Copy)]
pub struct AmbiguityOptions {
    pub node_cap: usize,
    pub eps_budget: Option<usize>,
    /// Canonicalize a witness by brute force when there are at most this
    /// many words up to its length.
    pub canonical_word_limit: usize,
}

impl Default for AmbiguityOptions {
    fn default() -> Self {
        AmbiguityOptions {
            node_cap: DEFAULT_NODE_CAP,
            eps_budget: None,
            canonical_word_limit: 10_000,
        }
    }
}

/// Evidence of ambiguity. Fields are `None` when the witness search was cut
/// off by its cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbiguityEvidence {
    pub word: Option<Word>,
    pub runs: Option<(Run, Run)>,
    pub count: Option<RunCount>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnambiguityVerdict {
    Unambiguous,
    Ambiguous(AmbiguityEvidence),
}

impl UnambiguityVerdict {
    pub fn is_unambiguous(&self) -> bool {
        matches!(self, UnambiguityVerdict::Unambiguous)
    }
}

fn words_up_to_count(k: usize, len: usize) -> u128 {
    (0..=len as u32).fold(0u128, |acc, l| acc.saturating_add((k as u128).saturating_pow(l)))
}

pub fn check_unambiguous(v: &Vass, opts: &AmbiguityOptions) -> UnambiguityVerdict {
    let dp = build_divergence_product(v);
    let p = &dp.product;
    let start = Configuration::initial(p);
    if !backward_coverable(p, &UpwardBasis::finals(p), &start) {
        return UnambiguityVerdict::Unambiguous;
    }
    let found = match forward_search(p, &start, &|s| p.is_final(StateId(s)), opts.node_cap) {
        ForwardOutcome::Found(run) => run,
        _ => {
            return UnambiguityVerdict::Ambiguous(AmbiguityEvidence {
                word: None,
                runs: None,
                count: None,
            })
        }
    };
    let word = found.word(p);
    let runs = dp.project(&found);
    let mut evidence = AmbiguityEvidence {
        word: Some(word.clone()),
        runs: Some(runs),
        count: None,
    };
    if words_up_to_count(v.alphabet().len(), word.len()) <= opts.canonical_word_limit as u128 {
        if let Ok(Some(w)) = brute_unambiguous_up_to(v, word.len(), opts.eps_budget) {
            evidence = AmbiguityEvidence {
                word: Some(w.word),
                runs: w.runs.or(evidence.runs),
                count: Some(w.count),
            };
        }
    }
    UnambiguityVerdict::Ambiguous(evidence)
}
