//! Ground-truth run semantics: run replay, exact accepting-run counting per
//! word and bounded brute-force universality and unambiguity checks.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::coverability::{forward_witness_from, word_liveness, ForwardOutcome, DEFAULT_NODE_CAP};
use crate::model::{add_effect, dominates, norm, words_up_to, Configuration, Label, Run, StateId, SymbolId, TransitionId, Vass, Word};

/// Upper limit of the automatic ε-segment budget.
pub const MAX_DEFAULT_EPS_BUDGET: usize = 1 << 20;

/// Number of accepting runs on one word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunCount {
    Finite(BigUint),
    Unbounded,
}

impl RunCount {
    pub fn finite(n: u64) -> Self {
        RunCount::Finite(BigUint::from(n))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, RunCount::Finite(n) if n.is_zero())
    }

    /// At least two accepting runs.
    pub fn is_ambiguous(&self) -> bool {
        match self {
            RunCount::Finite(n) => *n > BigUint::one(),
            RunCount::Unbounded => true,
        }
    }
}

impl fmt::Display for RunCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunCount::Finite(n) => write!(f, "{n}"),
            RunCount::Unbounded => f.write_str("unbounded"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("ε-segment budget {eps_budget} exhausted; raise --eps-budget")]
    BudgetExhausted { eps_budget: usize },
    #[error("start configuration does not fit the VASS")]
    InvalidStart,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("start configuration does not fit the VASS")]
    InvalidStart,
    #[error("step {step}: unknown transition")]
    UnknownTransition { step: usize },
    #[error("step {step}: transition does not start in the current state")]
    BrokenChain { step: usize },
    #[error("step {step}: counter {coordinate} becomes negative")]
    Underflow { step: usize, coordinate: usize },
}

/// Replays `run` from `start`. Steps are numbered from 1 in errors.
pub fn apply_run(v: &Vass, start: &Configuration, run: &Run) -> Result<Configuration, RunError> {
    if !start.is_valid_for(v) {
        return Err(RunError::InvalidStart);
    }
    let mut current = start.clone();
    for (i, &tid) in run.steps().iter().enumerate() {
        let step = i + 1;
        let t = v
            .transitions()
            .get(tid.0)
            .ok_or(RunError::UnknownTransition { step })?;
        if t.src != current.state {
            return Err(RunError::BrokenChain { step });
        }
        for (k, (x, e)) in current.counters.iter_mut().zip(&t.effect).enumerate() {
            *x += e;
            if *x < BigInt::zero() {
                return Err(RunError::Underflow { step, coordinate: k });
            }
        }
        current.state = t.dst;
    }
    Ok(current)
}

/// Whether `run` is an accepting run on `word` from `start`.
pub fn is_accepting_run(v: &Vass, start: &Configuration, run: &Run, word: &[SymbolId]) -> bool {
    match apply_run(v, start, run) {
        Ok(end) => v.is_final(end.state) && run.word(v).0 == word,
        Err(_) => false,
    }
}

/// Default ε-segment budget for `word` from `start`.
pub fn default_eps_budget(v: &Vass, start: &Configuration, word_len: usize) -> usize {
    let n = v.state_count().max(1) as u128;
    let max_start = start
        .counters
        .iter()
        .max()
        .and_then(ToPrimitive::to_u128)
        .unwrap_or(0);
    let m = norm(v).to_u128().unwrap_or(u128::MAX);
    let horizon = m
        .saturating_mul(n)
        .saturating_mul(word_len as u128 + 1)
        .saturating_add(max_start)
        .saturating_add(1);
    n.saturating_mul(horizon)
        .min(MAX_DEFAULT_EPS_BUDGET as u128) as usize
}

struct Frame {
    state: StateId,
    counters: Vec<BigInt>,
    pos: usize,
    next_out: usize,
    via: Option<TransitionId>,
    seg_start: usize,
}

struct SearchResult {
    count: RunCount,
    runs: Vec<Run>,
}

/// Depth-first enumeration of accepting runs in transition-id order.
/// Branches that cannot be completed into an accepting run are cut using
/// the backward basis of the line product.
fn search(
    v: &Vass,
    word: &[SymbolId],
    start: &Configuration,
    eps_budget: usize,
    stop_after: Option<u64>,
    collect: usize,
) -> Result<SearchResult, OracleError> {
    if !start.is_valid_for(v) {
        return Err(OracleError::InvalidStart);
    }
    let (product, live) = word_liveness(v, word);
    let is_live = |q: StateId, pos: usize, c: &[BigInt]| {
        live.contains(&Configuration::new(StateId(product.encode(q, pos)), c.to_vec()))
    };
    let mut out = SearchResult {
        count: RunCount::finite(0),
        runs: Vec::new(),
    };
    if !is_live(start.state, 0, &start.counters) {
        return Ok(out);
    }
    let mut count: u64 = 0;
    let mut stack = vec![Frame {
        state: start.state,
        counters: start.counters.clone(),
        pos: 0,
        next_out: 0,
        via: None,
        seg_start: 0,
    }];
    let path = |stack: &[Frame]| Run(stack.iter().filter_map(|f| f.via).collect());
    let accepted = |f: &Frame| f.pos == word.len() && v.is_final(f.state);
    if accepted(&stack[0]) {
        count += 1;
        if collect > 0 {
            out.runs.push(Run::default());
        }
    }
    while let Some(top) = stack.last() {
        if stop_after.is_some_and(|s| count >= s) {
            break;
        }
        let outgoing = v.outgoing(top.state);
        let Some(&tid) = outgoing.get(top.next_out) else {
            stack.pop();
            continue;
        };
        let top_index = stack.len() - 1;
        stack[top_index].next_out += 1;
        let top = &stack[top_index];
        let t = v.transition(tid);
        let (pos, is_eps) = match t.label {
            Label::Epsilon => (top.pos, true),
            Label::Symbol(a) if top.pos < word.len() && word[top.pos] == a => (top.pos + 1, false),
            Label::Symbol(_) => continue,
        };
        let Some(next) = add_effect(&top.counters, &t.effect) else {
            continue;
        };
        if !is_live(t.dst, pos, &next) {
            continue;
        }
        let seg_start = if is_eps { top.seg_start } else { top_index + 1 };
        if is_eps {
            if let Some(k) = (top.seg_start..=top_index)
                .find(|&k| stack[k].state == t.dst && dominates(&next, &stack[k].counters))
            {
                out.count = RunCount::Unbounded;
                if collect > 0 {
                    out.runs = pump_runs(v, word, &stack, k, tid, &next);
                }
                return Ok(out);
            }
            if top_index + 1 - top.seg_start > eps_budget {
                return Err(OracleError::BudgetExhausted { eps_budget });
            }
        }
        stack.push(Frame {
            state: t.dst,
            counters: next,
            pos,
            next_out: 0,
            via: Some(tid),
            seg_start,
        });
        if accepted(stack.last().unwrap()) {
            count += 1;
            if out.runs.len() < collect {
                out.runs.push(path(&stack));
            }
        }
    }
    out.count = RunCount::finite(count);
    Ok(out)
}

/// Two accepting runs through an ε-cycle from `stack[k]` back above it:
/// the path closing the cycle once and then twice, each completed by the
/// same accepting continuation.
fn pump_runs(
    v: &Vass,
    word: &[SymbolId],
    stack: &[Frame],
    k: usize,
    closing: TransitionId,
    reached: &[BigInt],
) -> Vec<Run> {
    let mut prefix: Vec<TransitionId> = stack.iter().filter_map(|f| f.via).collect();
    prefix.push(closing);
    let cycle: Vec<TransitionId> = stack[k + 1..]
        .iter()
        .filter_map(|f| f.via)
        .chain(std::iter::once(closing))
        .collect();
    let here = Configuration::new(v.transition(closing).dst, reached.to_vec());
    let pos = stack.last().map_or(0, |f| f.pos);
    let ForwardOutcome::Found(cont) = forward_witness_from(v, &here, &word[pos..], DEFAULT_NODE_CAP) else {
        return Vec::new();
    };
    let once: Vec<TransitionId> = prefix.iter().chain(&cont.0).copied().collect();
    let twice: Vec<TransitionId> = prefix.iter().chain(&cycle).chain(&cont.0).copied().collect();
    vec![Run(once), Run(twice)]
}

/// Exact number of accepting runs reading `word` from `start`.
pub fn count_accepting_runs(
    v: &Vass,
    word: &[SymbolId],
    start: &Configuration,
    eps_budget: usize,
) -> Result<RunCount, OracleError> {
    Ok(search(v, word, start, eps_budget, None, 0)?.count)
}

/// Two distinct accepting runs on `word` from `start`, if there are.
/// For a finite count the runs are the least two in transition-id order.
pub fn two_accepting_runs(
    v: &Vass,
    word: &[SymbolId],
    start: &Configuration,
    eps_budget: usize,
) -> Result<Option<(Run, Run)>, OracleError> {
    let mut res = search(v, word, start, eps_budget, Some(2), 2)?;
    if res.runs.len() < 2 {
        return Ok(None);
    }
    let second = res.runs.pop().unwrap();
    let first = res.runs.pop().unwrap();
    Ok(Some((first, second)))
}

fn budget_for(v: &Vass, word: &Word, eps_budget: Option<usize>) -> usize {
    eps_budget.unwrap_or_else(|| default_eps_budget(v, &Configuration::initial(v), word.len()))
}

/// The length-lexicographically least word of length at most `max_len`
/// without an accepting run from `q₀(0̄)`.
pub fn brute_universal_up_to(
    v: &Vass,
    max_len: usize,
    eps_budget: Option<usize>,
) -> Result<Option<Word>, OracleError> {
    let start = Configuration::initial(v);
    for w in words_up_to(v.alphabet().len(), max_len) {
        let budget = budget_for(v, &w, eps_budget);
        if search(v, &w.0, &start, budget, Some(1), 0)?.count.is_zero() {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// A word with at least two accepting runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbiguityWitness {
    pub word: Word,
    /// Exact count, or a lower bound of 2 when the search stopped early.
    pub count: RunCount,
    pub runs: Option<(Run, Run)>,
}

/// The length-lexicographically least word of length at most `max_len`
/// with two or more accepting runs, with two of them.
pub fn brute_unambiguous_up_to(
    v: &Vass,
    max_len: usize,
    eps_budget: Option<usize>,
) -> Result<Option<AmbiguityWitness>, OracleError> {
    let start = Configuration::initial(v);
    for w in words_up_to(v.alphabet().len(), max_len) {
        let budget = budget_for(v, &w, eps_budget);
        let mut res = search(v, &w.0, &start, budget, Some(2), 2)?;
        if res.count.is_ambiguous() {
            let runs = if res.runs.len() == 2 {
                let second = res.runs.pop().unwrap();
                Some((res.runs.pop().unwrap(), second))
            } else {
                None
            };
            return Ok(Some(AmbiguityWitness {
                word: w,
                count: res.count,
                runs,
            }));
        }
    }
    Ok(None)
}
