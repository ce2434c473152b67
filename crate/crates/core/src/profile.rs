//! Counter truncation: the finite automaton over `N`-profiles of a VASS,
//! built lazily from the initial profile.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;
use thiserror::Error;

use crate::engine::{EngineError, FaEdge, FaSource};
use crate::model::{add_effect, Configuration, Label, ModelError, StateId, Transition, TransitionId, Vass};

/// Default limit on discovered profiles.
pub const DEFAULT_PROFILE_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("more than {budget} profiles discovered; raise the budget or lower the cap")]
    StateBudgetExceeded { budget: usize },
    #[error("profile automaton is not a valid instance: {0}")]
    Model(#[from] ModelError),
}

impl From<ProfileError> for EngineError {
    fn from(e: ProfileError) -> Self {
        match e {
            ProfileError::StateBudgetExceeded { budget } => EngineError::StateBudgetExceeded { budget },
            ProfileError::Model(_) => unreachable!("expansion never builds an instance"),
        }
    }
}

/// A state together with counters truncated at the cap; an entry equal to
/// the cap stands for any value at least the cap.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Profile {
    pub state: StateId,
    pub truncated: Vec<BigInt>,
}

impl Profile {
    pub fn name(&self, v: &Vass) -> String {
        let mut name = v.state_name(self.state).to_string();
        if !self.truncated.is_empty() {
            name.push('_');
            for c in &self.truncated {
                name.push('_');
                name.push_str(&c.to_string());
            }
        }
        name
    }
}

pub fn profile_of(c: &Configuration, cap: &BigInt) -> Profile {
    Profile {
        state: c.state,
        truncated: c.counters.iter().map(|x| x.min(cap).clone()).collect(),
    }
}

/// Outgoing edge of a profile together with the VASS transition it comes
/// from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileEdge {
    pub label: Label,
    pub dst: usize,
    pub origin: TransitionId,
}

/// The reachable part of the profile automaton at a fixed cap. Profiles get
/// dense indices in discovery order; index 0 is the initial profile.
#[derive(Debug, Clone)]
pub struct ProfileAutomaton<'a> {
    v: &'a Vass,
    cap: BigInt,
    budget: usize,
    profiles: Vec<Profile>,
    index: HashMap<Profile, usize>,
    expanded: Vec<Option<Vec<ProfileEdge>>>,
}

impl<'a> ProfileAutomaton<'a> {
    pub fn new(v: &'a Vass, cap: BigInt, budget: usize) -> Self {
        let init = profile_of(&Configuration::initial(v), &cap);
        ProfileAutomaton {
            v,
            cap,
            budget: budget.max(1),
            profiles: vec![init.clone()],
            index: HashMap::from([(init, 0)]),
            expanded: vec![None],
        }
    }

    pub fn vass(&self) -> &'a Vass {
        self.v
    }

    pub fn cap(&self) -> &BigInt {
        &self.cap
    }

    pub fn state_count(&self) -> usize {
        self.profiles.len()
    }

    pub fn profile(&self, s: usize) -> &Profile {
        &self.profiles[s]
    }

    fn intern(&mut self, p: Profile) -> Result<usize, ProfileError> {
        if let Some(&i) = self.index.get(&p) {
            return Ok(i);
        }
        if self.profiles.len() >= self.budget {
            return Err(ProfileError::StateBudgetExceeded { budget: self.budget });
        }
        let i = self.profiles.len();
        self.profiles.push(p.clone());
        self.index.insert(p, i);
        self.expanded.push(None);
        Ok(i)
    }

    fn successor(&self, from: &Profile, t: &Transition) -> Option<Profile> {
        let next = add_effect(&from.truncated, &t.effect)?;
        Some(Profile {
            state: t.dst,
            truncated: next.into_iter().map(|x| x.min(self.cap.clone())).collect(),
        })
    }

    /// Outgoing edges of profile `s`, in transition-id order.
    pub fn expand(&mut self, s: usize) -> Result<&[ProfileEdge], ProfileError> {
        if self.expanded[s].is_none() {
            let from = self.profiles[s].clone();
            let mut edges = Vec::new();
            for &tid in self.v.outgoing(from.state) {
                let t = self.v.transition(tid);
                if let Some(p) = self.successor(&from, t) {
                    let dst = self.intern(p)?;
                    edges.push(ProfileEdge {
                        label: t.label,
                        dst,
                        origin: tid,
                    });
                }
            }
            self.expanded[s] = Some(edges);
        }
        Ok(self.expanded[s].as_deref().unwrap())
    }

    /// Expands every reachable profile.
    pub fn materialize(&mut self) -> Result<(), ProfileError> {
        let mut s = 0;
        while s < self.profiles.len() {
            self.expand(s)?;
            s += 1;
        }
        Ok(())
    }

    /// The whole reachable automaton as a dimension-0 VASS with states in
    /// breadth-first order, together with the VASS transition behind each
    /// of its transitions.
    pub fn to_vass(&mut self) -> Result<(Vass, Vec<TransitionId>), ProfileError> {
        self.materialize()?;
        let mut order = Vec::new();
        let mut rank = vec![usize::MAX; self.profiles.len()];
        let mut queue = VecDeque::from([0usize]);
        rank[0] = 0;
        while let Some(s) = queue.pop_front() {
            order.push(s);
            for e in self.expanded[s].as_ref().unwrap() {
                if rank[e.dst] == usize::MAX {
                    rank[e.dst] = order.len() + queue.len();
                    queue.push_back(e.dst);
                }
            }
        }
        let names = order.iter().map(|&s| self.profiles[s].name(self.v)).collect();
        let finals = order
            .iter()
            .filter(|&&s| self.v.is_final(self.profiles[s].state))
            .map(|&s| StateId(rank[s]))
            .collect();
        let mut transitions = Vec::new();
        let mut back = Vec::new();
        for &s in &order {
            for e in self.expanded[s].as_ref().unwrap() {
                transitions.push(Transition {
                    src: StateId(rank[s]),
                    label: e.label,
                    effect: Vec::new(),
                    dst: StateId(rank[e.dst]),
                });
                back.push(e.origin);
            }
        }
        let fa = Vass::new(0, self.v.alphabet().to_vec(), names, StateId(0), finals, transitions)?;
        Ok((fa, back))
    }
}

impl FaSource for ProfileAutomaton<'_> {
    fn initial(&mut self) -> usize {
        0
    }

    fn is_final(&mut self, s: usize) -> bool {
        self.v.is_final(self.profiles[s].state)
    }

    fn edges(&mut self, s: usize) -> Result<Vec<FaEdge>, EngineError> {
        Ok(self
            .expand(s)?
            .iter()
            .map(|e| FaEdge {
                label: e.label,
                dst: e.dst,
            })
            .collect())
    }

    fn symbol_count(&self) -> usize {
        self.v.alphabet().len()
    }

    fn state_count(&self) -> usize {
        self.profiles.len()
    }
}

/// Fully built profile automaton at `cap`.
pub fn build_profile_automaton(
    v: &Vass,
    cap: BigInt,
    budget: usize,
) -> Result<(Vass, Vec<TransitionId>), ProfileError> {
    ProfileAutomaton::new(v, cap, budget).to_vass()
}
