//! Universality of unambiguous VASS by iterative deepening over truncation
//! caps, and equivalence with a regular language given as a DFA.

use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use thiserror::Error;

use crate::ambiguity::{check_unambiguous, AmbiguityOptions, UnambiguityVerdict};
use crate::bounds::truncation_bound_c;
use crate::coverability::membership;
use crate::engine::{exact_one_run_check_source, shortest_rejected_word, CycleFree, EngineError, OneRunVerdict, RejectedSearch};
use crate::model::{norm, Label, ModelError, StateId, SymbolId, Transition, Vass, Word};
use crate::oracle::RunCount;
use crate::profile::{ProfileAutomaton, DEFAULT_PROFILE_BUDGET};

#[derive(Debug, Clone)]
pub struct UniversalityOptions {
    /// Explicit caps to try in order; by default caps double from 1 and end
    /// with the truncation bound.
    pub cap_schedule: Option<Vec<BigInt>>,
    pub profile_budget: usize,
    /// Re-minimize counterexamples when the profile automaton has at most
    /// this many states.
    pub minimize_threshold: usize,
    /// Stop after this many caps when the truncation bound is too large to
    /// evaluate.
    pub max_caps: usize,
}

impl Default for UniversalityOptions {
    fn default() -> Self {
        UniversalityOptions {
            cap_schedule: None,
            profile_budget: DEFAULT_PROFILE_BUDGET,
            minimize_threshold: 10_000,
            max_caps: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniversalityAnswer {
    Universal,
    NotUniversal,
    PreconditionViolated,
    Inconclusive,
}

impl UniversalityAnswer {
    pub fn as_str(self) -> &'static str {
        match self {
            UniversalityAnswer::Universal => "universal",
            UniversalityAnswer::NotUniversal => "not-universal",
            UniversalityAnswer::PreconditionViolated => "precondition-violated",
            UniversalityAnswer::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapEvidence {
    pub count: BigUint,
    pub cap: BigInt,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UniversalityStats {
    /// Profiles discovered at the last cap.
    pub profile_states: usize,
    pub words_explored: usize,
    pub basis_size: Option<usize>,
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniversalityVerdict {
    pub answer: UniversalityAnswer,
    pub witness: Option<Word>,
    pub evidence: Option<CapEvidence>,
    pub caps_tried: Vec<BigInt>,
    pub stats: UniversalityStats,
    pub note: Option<String>,
}

/// Caps to try: the explicit schedule, or 1, 2, 4, … below the truncation
/// bound followed by the bound itself. `None` as the last element means the
/// bound could not be evaluated.
fn default_schedule(v: &Vass) -> (Vec<BigInt>, Option<BigInt>) {
    if v.dim() == 0 {
        return (vec![BigInt::zero()], Some(BigInt::zero()));
    }
    let omega = truncation_bound_c(&norm(v), v.dim(), v.state_count()).ok();
    let mut caps = Vec::new();
    let mut cap = BigInt::one();
    if let Some(omega) = &omega {
        while &cap < omega {
            caps.push(cap.clone());
            cap *= 2;
        }
        caps.push(omega.clone());
    }
    (caps, omega)
}

enum CapOutcome {
    Universal { basis_size: usize },
    Refuted(Word),
    TooCoarse,
    Ambiguous { word: Word, count: BigUint },
}

fn try_cap(
    v: &Vass,
    cap: &BigInt,
    opts: &UniversalityOptions,
    stats: &mut UniversalityStats,
) -> Result<CapOutcome, EngineError> {
    let mut src = CycleFree::new(ProfileAutomaton::new(v, cap.clone(), opts.profile_budget));
    let verdict = exact_one_run_check_source(&mut src);
    stats.profile_states = src.inner().state_count();
    match verdict? {
        OneRunVerdict::ExactlyOne {
            basis_size,
            words_explored,
        } => {
            stats.words_explored += words_explored;
            Ok(CapOutcome::Universal { basis_size })
        }
        OneRunVerdict::Counterexample { word, count } if count.is_zero() => {
            let mut candidates = Vec::new();
            if src.inner().state_count() <= opts.minimize_threshold {
                if let Ok(RejectedSearch::Found(w)) = shortest_rejected_word(&mut src, opts.minimize_threshold) {
                    candidates.push(w);
                }
            }
            if !candidates.contains(&word) {
                candidates.push(word);
            }
            stats.profile_states = src.inner().state_count();
            Ok(candidates
                .into_iter()
                .find(|w| !membership(v, &w.0))
                .map_or(CapOutcome::TooCoarse, CapOutcome::Refuted))
        }
        OneRunVerdict::Counterexample { word, count } => Ok(CapOutcome::Ambiguous { word, count }),
    }
}

/// Decides universality of an unambiguous VASS.
///
/// A cap at which every word has exactly one run in the profile automaton
/// proves universality, since the abstraction only accepts words of the
/// VASS. A word with no run is reported only after exact membership
/// confirms it is rejected.
pub fn check_universal(v: &Vass, opts: &UniversalityOptions) -> UniversalityVerdict {
    let started = Instant::now();
    let (schedule, unbounded) = match &opts.cap_schedule {
        Some(caps) => (caps.clone(), false),
        None => {
            let (caps, omega) = default_schedule(v);
            (caps, omega.is_none())
        }
    };
    let mut verdict = UniversalityVerdict {
        answer: UniversalityAnswer::Inconclusive,
        witness: None,
        evidence: None,
        caps_tried: Vec::new(),
        stats: UniversalityStats::default(),
        note: None,
    };
    let mut caps = schedule.into_iter();
    let mut doubling = BigInt::one();
    loop {
        let cap = if unbounded {
            if verdict.caps_tried.len() >= opts.max_caps {
                verdict.note = Some(format!("stopped after {} caps", opts.max_caps));
                break;
            }
            let c = doubling.clone();
            doubling *= 2;
            c
        } else {
            match caps.next() {
                Some(c) => c,
                None => {
                    verdict.note = Some("cap schedule exhausted".into());
                    break;
                }
            }
        };
        verdict.caps_tried.push(cap.clone());
        match try_cap(v, &cap, opts, &mut verdict.stats) {
            Err(e) => {
                verdict.note = Some(format!("cap {cap}: {e}"));
                break;
            }
            Ok(CapOutcome::Universal { basis_size }) => {
                verdict.answer = UniversalityAnswer::Universal;
                verdict.stats.basis_size = Some(basis_size);
                break;
            }
            Ok(CapOutcome::Refuted(w)) => {
                verdict.answer = UniversalityAnswer::NotUniversal;
                verdict.evidence = Some(CapEvidence {
                    count: BigUint::zero(),
                    cap,
                });
                verdict.witness = Some(w);
                break;
            }
            Ok(CapOutcome::Ambiguous { word, count }) => {
                verdict.answer = UniversalityAnswer::PreconditionViolated;
                verdict.evidence = Some(CapEvidence { count, cap });
                verdict.witness = Some(word);
                break;
            }
            Ok(CapOutcome::TooCoarse) => {}
        }
    }
    verdict.stats.elapsed_ms = started.elapsed().as_millis();
    verdict
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivalenceError {
    #[error("the DFA must have dimension 0")]
    NotFiniteAutomaton,
    #[error("the DFA alphabet differs from the VASS alphabet")]
    AlphabetMismatch,
    #[error("the DFA has an ε-transition")]
    EpsilonTransition,
    #[error("the DFA is not deterministic at state {state} on {symbol}")]
    NotDeterministic { state: String, symbol: String },
    #[error("the DFA is not complete at state {state} on {symbol}")]
    NotComplete { state: String, symbol: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquivalenceAnswer {
    Equivalent,
    NotEquivalent,
    PreconditionViolated,
    Inconclusive,
}

impl EquivalenceAnswer {
    pub fn as_str(self) -> &'static str {
        match self {
            EquivalenceAnswer::Equivalent => "equivalent",
            EquivalenceAnswer::NotEquivalent => "not-equivalent",
            EquivalenceAnswer::PreconditionViolated => "precondition-violated",
            EquivalenceAnswer::Inconclusive => "inconclusive",
        }
    }
}

/// Which language a distinguishing word belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessSide {
    VassOnly,
    RegularOnly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceVerdict {
    pub answer: EquivalenceAnswer,
    pub witness: Option<Word>,
    pub side: Option<WitnessSide>,
    pub note: Option<String>,
}

fn dfa_accepts(dfa: &Vass, symbol_map: &[SymbolId], word: &[SymbolId]) -> bool {
    let mut q = dfa.initial();
    for &a in word {
        let label = Label::Symbol(symbol_map[a.0]);
        match dfa
            .outgoing(q)
            .iter()
            .map(|&t| dfa.transition(t))
            .find(|t| t.label == label)
        {
            Some(t) => q = t.dst,
            None => return false,
        }
    }
    dfa.is_final(q)
}

/// Maps each VASS symbol to the DFA symbol of the same name, after checking
/// that the DFA is complete and deterministic.
fn validate_dfa(v: &Vass, dfa: &Vass) -> Result<Vec<SymbolId>, EquivalenceError> {
    if dfa.dim() != 0 {
        return Err(EquivalenceError::NotFiniteAutomaton);
    }
    let mut ours: Vec<&String> = v.alphabet().iter().collect();
    let mut theirs: Vec<&String> = dfa.alphabet().iter().collect();
    ours.sort();
    theirs.sort();
    if ours != theirs {
        return Err(EquivalenceError::AlphabetMismatch);
    }
    for q in 0..dfa.state_count() {
        let mut seen = vec![0usize; dfa.alphabet().len()];
        for &t in dfa.outgoing(StateId(q)) {
            match dfa.transition(t).label {
                Label::Epsilon => return Err(EquivalenceError::EpsilonTransition),
                Label::Symbol(a) => seen[a.0] += 1,
            }
        }
        for (a, &k) in seen.iter().enumerate() {
            let state = dfa.state_name(StateId(q)).to_string();
            let symbol = dfa.alphabet()[a].clone();
            if k > 1 {
                return Err(EquivalenceError::NotDeterministic { state, symbol });
            }
            if k == 0 {
                return Err(EquivalenceError::NotComplete { state, symbol });
            }
        }
    }
    Ok(v.alphabet()
        .iter()
        .map(|name| dfa.symbol_id(name).expect("alphabets match"))
        .collect())
}

fn fresh(base: &str, taken: &[String]) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('_');
    }
    name
}

/// Disjoint union of `v` and the complement of `dfa` under a fresh initial
/// state with ε-edges into both.
pub fn union_with_complement(v: &Vass, dfa: &Vass) -> Result<Vass, EquivalenceError> {
    let symbol_map = validate_dfa(v, dfa)?;
    let back: Vec<SymbolId> = (0..dfa.alphabet().len())
        .map(|a| SymbolId(symbol_map.iter().position(|s| s.0 == a).unwrap()))
        .collect();
    let d = v.dim();
    let zero = vec![BigInt::zero(); d];
    let a_names: Vec<String> = v.states().iter().map(|s| format!("a_{s}")).collect();
    let b_names: Vec<String> = dfa.states().iter().map(|s| format!("b_{s}")).collect();
    let mut states = vec![fresh("start", &[a_names.clone(), b_names.clone()].concat())];
    states.extend(a_names);
    states.extend(b_names);
    let a_off = 1;
    let b_off = 1 + v.state_count();
    let mut transitions = vec![
        Transition {
            src: StateId(0),
            label: Label::Epsilon,
            effect: zero.clone(),
            dst: StateId(a_off + v.initial().0),
        },
        Transition {
            src: StateId(0),
            label: Label::Epsilon,
            effect: zero.clone(),
            dst: StateId(b_off + dfa.initial().0),
        },
    ];
    for t in v.transitions() {
        transitions.push(Transition {
            src: StateId(a_off + t.src.0),
            label: t.label,
            effect: t.effect.clone(),
            dst: StateId(a_off + t.dst.0),
        });
    }
    for t in dfa.transitions() {
        let label = match t.label {
            Label::Symbol(a) => Label::Symbol(back[a.0]),
            Label::Epsilon => Label::Epsilon,
        };
        transitions.push(Transition {
            src: StateId(b_off + t.src.0),
            label,
            effect: zero.clone(),
            dst: StateId(b_off + t.dst.0),
        });
    }
    let mut finals: Vec<StateId> = v.finals().iter().map(|f| StateId(a_off + f.0)).collect();
    finals.extend(
        (0..dfa.state_count())
            .filter(|&q| !dfa.is_final(StateId(q)))
            .map(|q| StateId(b_off + q)),
    );
    Ok(Vass::new(d, v.alphabet().to_vec(), states, StateId(0), finals.into_iter().collect(), transitions)?)
}

/// Decides `L(v) = L(dfa)` for an unambiguous `v`: the union of `v` with
/// the complement of the DFA must be unambiguous and universal.
pub fn check_equivalence_with_regular(
    v: &Vass,
    dfa: &Vass,
    amb: &AmbiguityOptions,
    opts: &UniversalityOptions,
) -> Result<EquivalenceVerdict, EquivalenceError> {
    let union = union_with_complement(v, dfa)?;
    let symbol_map = validate_dfa(v, dfa)?;
    let side_of = |w: &Word| {
        let in_v = membership(v, &w.0);
        let in_l = dfa_accepts(dfa, &symbol_map, &w.0);
        match (in_v, in_l) {
            (true, false) => Some(WitnessSide::VassOnly),
            (false, true) => Some(WitnessSide::RegularOnly),
            _ => None,
        }
    };
    if let UnambiguityVerdict::Ambiguous(ev) = check_unambiguous(&union, amb) {
        let Some(word) = ev.word else {
            return Ok(EquivalenceVerdict {
                answer: EquivalenceAnswer::Inconclusive,
                witness: None,
                side: None,
                note: Some("union is ambiguous but the witness search hit its cap".into()),
            });
        };
        return Ok(match side_of(&word) {
            Some(side) => EquivalenceVerdict {
                answer: EquivalenceAnswer::NotEquivalent,
                witness: Some(word),
                side: Some(side),
                note: None,
            },
            None => EquivalenceVerdict {
                answer: EquivalenceAnswer::PreconditionViolated,
                witness: Some(word),
                side: None,
                note: Some(match ev.count {
                    Some(RunCount::Unbounded) => "the VASS has unboundedly many runs on the witness".into(),
                    _ => "the VASS is ambiguous on the witness".into(),
                }),
            },
        });
    }
    let u = check_universal(&union, opts);
    Ok(match u.answer {
        UniversalityAnswer::Universal => EquivalenceVerdict {
            answer: EquivalenceAnswer::Equivalent,
            witness: None,
            side: None,
            note: None,
        },
        UniversalityAnswer::NotUniversal => {
            let side = u.witness.as_ref().and_then(side_of);
            EquivalenceVerdict {
                answer: EquivalenceAnswer::NotEquivalent,
                witness: u.witness,
                side,
                note: None,
            }
        }
        UniversalityAnswer::PreconditionViolated => EquivalenceVerdict {
            answer: EquivalenceAnswer::PreconditionViolated,
            witness: u.witness,
            side: None,
            note: u.note,
        },
        UniversalityAnswer::Inconclusive => EquivalenceVerdict {
            answer: EquivalenceAnswer::Inconclusive,
            witness: None,
            side: None,
            note: u.note,
        },
    })
}
