//! Hardness gadgets as concrete instances, and seeded random VASS.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{is_valid_token, Label, ModelError, StateId, SymbolId, Transition, Vass, EPSILON_TOKEN};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("the partition instance must contain at least one number")]
    EmptyPartition,
    #[error("partition elements must be positive")]
    NonPositiveElement,
    #[error("the bounded reachability instance needs a 1-dimensional VASS")]
    NotOneDimensional,
    #[error("target counter value must lie in [0, N]")]
    TargetOutOfRange,
    #[error("the bound N must be nonnegative")]
    NegativeBound,
    #[error("transition {index} reads a letter; only ε-transitions are allowed")]
    NonEpsilonTransition { index: usize },
    #[error("invalid letter name {0:?}")]
    InvalidLetter(String),
    #[error("density must lie in [0, 1]")]
    InvalidDensity,
    #[error("at least one state is required")]
    NoStates,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A multiset of positive integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionInstance {
    pub numbers: Vec<BigInt>,
}

impl PartitionInstance {
    pub fn new(numbers: Vec<BigInt>) -> Result<Self, GeneratorError> {
        if numbers.is_empty() {
            return Err(GeneratorError::EmptyPartition);
        }
        if numbers.iter().any(|x| !x.is_positive()) {
            return Err(GeneratorError::NonPositiveElement);
        }
        Ok(PartitionInstance { numbers })
    }

    pub fn total(&self) -> BigInt {
        self.numbers.iter().sum()
    }
}

struct Draft {
    dim: usize,
    alphabet: Vec<String>,
    states: Vec<String>,
    transitions: Vec<Transition>,
}

impl Draft {
    fn state(&self, name: &str) -> StateId {
        StateId(self.states.iter().position(|s| s == name).expect("declared state"))
    }

    fn label(&self, symbol: Option<&str>) -> Label {
        match symbol {
            None => Label::Epsilon,
            Some(a) => Label::Symbol(SymbolId(self.alphabet.iter().position(|s| s == a).expect("declared symbol"))),
        }
    }

    fn add(&mut self, src: &str, symbol: Option<&str>, effect: Vec<BigInt>, dst: &str) {
        assert_eq!(effect.len(), self.dim);
        let t = Transition {
            src: self.state(src),
            label: self.label(symbol),
            effect,
            dst: self.state(dst),
        };
        self.transitions.push(t);
    }

    fn finish(self, initial: &str, finals: &[String]) -> Result<Vass, GeneratorError> {
        let initial = self.state(initial);
        let finals = finals.iter().map(|f| self.state(f)).collect();
        Ok(Vass::new(self.dim, self.alphabet, self.states, initial, finals, self.transitions)?)
    }
}

fn partition_gadget(inst: &PartitionInstance, last_decrement: BigInt) -> Result<Vass, GeneratorError> {
    let k = inst.numbers.len();
    let n = inst.total();
    let mut states: Vec<String> = (0..=k + 1).map(|i| format!("q{i}")).collect();
    states.push("p".into());
    states.extend((0..=k).map(|i| format!("r{i}")));
    states.extend((0..=k).map(|i| format!("s{i}")));
    states.push("pf".into());
    let mut g = Draft {
        dim: 1,
        alphabet: vec!["0".into(), "1".into()],
        states,
        transitions: Vec::new(),
    };
    let zero = || vec![BigInt::zero()];
    for i in 0..=k {
        for b in ["0", "1"] {
            g.add(&format!("q{i}"), Some(b), zero(), &format!("q{}", i + 1));
        }
    }
    for b in ["0", "1"] {
        g.add(&format!("q{}", k + 1), Some(b), zero(), &format!("q{}", k + 1));
    }
    g.add("q0", None, vec![BigInt::from(2) * &n], "p");
    g.add("p", None, zero(), "r0");
    g.add("p", None, zero(), "s0");
    for (i, ni) in inst.numbers.iter().enumerate() {
        let (r, r1) = (format!("r{i}"), format!("r{}", i + 1));
        g.add(&r, Some("1"), vec![-BigInt::from(2) * ni], &r1);
        g.add(&r, Some("0"), zero(), &r1);
    }
    for (i, ni) in inst.numbers.iter().enumerate() {
        let (s, s1) = (format!("s{i}"), format!("s{}", i + 1));
        g.add(&s, Some("0"), vec![-BigInt::from(2) * ni], &s1);
        g.add(&s, Some("1"), zero(), &s1);
    }
    g.add(&format!("r{k}"), None, vec![-last_decrement.clone()], "pf");
    g.add(&format!("s{k}"), None, vec![-last_decrement], "pf");
    let mut finals: Vec<String> = (0..=k + 1).filter(|&i| i != k).map(|i| format!("q{i}")).collect();
    finals.push("pf".into());
    g.finish("q0", &finals)
}

/// Unambiguous 1-VASS over `{0, 1}` accepting every word of length other
/// than `k`, and a word `w` of length `k` iff the numbers selected by the
/// 1-positions of `w` do not sum to `N/2`.
pub fn gen_partition(inst: &PartitionInstance) -> Result<Vass, GeneratorError> {
    partition_gadget(inst, inst.total() + 1)
}

/// As [`gen_partition`] with final decrements `−N`: ambiguous iff a perfect
/// partition exists.
pub fn gen_partition_ambiguous(inst: &PartitionInstance) -> Result<Vass, GeneratorError> {
    partition_gadget(inst, inst.total())
}

/// Bounded reachability in a one-counter net: is `p(m)` reachable from the
/// initial configuration `q(0)` with the counter never above `bound`?
#[derive(Debug, Clone)]
pub struct BoundedOcaInstance {
    pub a: Vass,
    pub bound: BigInt,
    pub target: StateId,
    pub m: BigInt,
}

impl BoundedOcaInstance {
    pub fn new(a: Vass, bound: BigInt, target: StateId, m: BigInt) -> Result<Self, GeneratorError> {
        if a.dim() != 1 {
            return Err(GeneratorError::NotOneDimensional);
        }
        if bound.is_negative() {
            return Err(GeneratorError::NegativeBound);
        }
        if m.is_negative() || m > bound {
            return Err(GeneratorError::TargetOutOfRange);
        }
        if target.0 >= a.state_count() {
            return Err(GeneratorError::Model(ModelError::IndexOutOfRange(format!("state {}", target.0))));
        }
        Ok(BoundedOcaInstance { a, bound, target, m })
    }
}

fn fresh(base: &str, taken: &[String]) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('_');
    }
    name
}

/// Symbol name of the `i`-th transition of the simulated net.
pub fn oca_symbol(i: usize) -> String {
    format!("t{i}")
}

pub const STAR: &str = "star";

struct OcaNames {
    bot: String,
    q0: String,
}

fn bounded_oca_draft(inst: &BoundedOcaInstance) -> (Draft, OcaNames) {
    let a = &inst.a;
    let n = &inst.bound;
    let m = &inst.m;
    let mut states: Vec<String> = a.states().to_vec();
    let bot = fresh("bot", &states);
    states.push(bot.clone());
    let qf = fresh("qf", &states);
    states.push(qf.clone());
    let q0 = fresh("q0", &states);
    states.push(q0.clone());
    let mut alphabet: Vec<String> = (0..a.transitions().len()).map(oca_symbol).collect();
    alphabet.push(STAR.into());
    let mut g = Draft {
        dim: 2,
        alphabet: alphabet.clone(),
        states,
        transitions: Vec::new(),
    };
    let v2 = |x: BigInt, y: BigInt| vec![x, y];
    let z = BigInt::zero;
    let name = |q: StateId| a.state_name(q).to_string();
    let q_init = name(a.initial());
    let p = name(inst.target);
    let one = BigInt::one();
    // (i) the first letter, whatever it is, loads (0, N)
    for sym in &alphabet {
        g.add(&q0, Some(sym), v2(z(), n.clone()), &q_init);
    }
    // (ii) simulation
    for (i, t) in a.transitions().iter().enumerate() {
        let h = t.effect[0].clone();
        g.add(&name(t.src), Some(&oca_symbol(i)), v2(h.clone(), -h), &name(t.dst));
    }
    // (iii)
    g.add(&p, Some(STAR), v2(-m.clone(), m - n), &bot);
    // (iv)
    for r in 0..a.state_count() {
        if StateId(r) != inst.target {
            g.add(&name(StateId(r)), Some(STAR), v2(z(), z()), &qf);
        }
    }
    // (v)
    g.add(&p, Some(STAR), v2(-m - &one, z()), &qf);
    g.add(&p, Some(STAR), v2(z(), -(n - m) - &one), &qf);
    // (vi) letters of transitions leaving elsewhere
    for r in 0..a.state_count() {
        for (i, t) in a.transitions().iter().enumerate() {
            if t.src != StateId(r) {
                g.add(&name(StateId(r)), Some(&oca_symbol(i)), v2(z(), z()), &qf);
            }
        }
    }
    // (vii) the simulated step would leave [0, N]
    for (i, t) in a.transitions().iter().enumerate() {
        let l = &t.effect[0];
        if l.is_negative() {
            g.add(&name(t.src), Some(&oca_symbol(i)), v2(z(), -(n + l) - &one), &qf);
        } else if l.is_positive() {
            g.add(&name(t.src), Some(&oca_symbol(i)), v2(-(n - l) - &one, z()), &qf);
        }
    }
    // (viii)
    for sym in &alphabet {
        g.add(&qf, Some(sym), v2(z(), z()), &qf);
    }
    (g, OcaNames { bot, q0 })
}

/// Unambiguous 2-VASS that is universal iff `p(m)` is not reachable from
/// `q(0)` by an `N`-bounded run. A word `x ρ star` is rejected exactly when
/// `ρ` spells such a run; `x` is an arbitrary first letter.
pub fn gen_bounded_oca(inst: &BoundedOcaInstance) -> Result<Vass, GeneratorError> {
    let (g, names) = bounded_oca_draft(inst);
    let finals: Vec<String> = g.states.iter().filter(|s| **s != names.bot).cloned().collect();
    g.finish(&names.q0, &finals)
}

/// [`gen_bounded_oca`] with `bot` as the only final state and a zero ε-loop
/// on it: ambiguous iff `bot` is reachable.
pub fn gen_unamb_check_variant(inst: &BoundedOcaInstance) -> Result<Vass, GeneratorError> {
    let (mut g, names) = bounded_oca_draft(inst);
    g.add(&names.bot, None, vec![BigInt::zero(), BigInt::zero()], &names.bot);
    g.finish(&names.q0, &[names.bot.clone()])
}

/// Turns an ε-only VASS into one over `{letter}` whose language is
/// `letter*` if the input accepts ε and empty otherwise.
pub fn gen_empty_wrap(a: &Vass, letter: &str) -> Result<Vass, GeneratorError> {
    if !is_valid_token(letter) || letter == EPSILON_TOKEN {
        return Err(GeneratorError::InvalidLetter(letter.to_string()));
    }
    if let Some(index) = a.transitions().iter().position(|t| !t.label.is_epsilon()) {
        return Err(GeneratorError::NonEpsilonTransition { index });
    }
    let mut states = a.states().to_vec();
    let qf = fresh("qf", &states);
    states.push(qf);
    let qf_id = StateId(states.len() - 1);
    let zero = vec![BigInt::zero(); a.dim()];
    let mut transitions = a.transitions().to_vec();
    let sym = Label::Symbol(SymbolId(0));
    for &f in a.finals().iter().chain(std::iter::once(&qf_id)) {
        transitions.push(Transition {
            src: f,
            label: sym,
            effect: zero.clone(),
            dst: qf_id,
        });
    }
    let mut finals = a.finals().clone();
    finals.insert(qf_id);
    Ok(Vass::new(a.dim(), vec![letter.to_string()], states, a.initial(), finals, transitions)?)
}

/// Parameters of [`random_vass`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomParams {
    pub states: usize,
    pub dim: usize,
    pub norm: u32,
    pub symbols: usize,
    pub density: f64,
    pub seed: u64,
}

fn symbol_name(i: usize) -> String {
    let mut name = String::new();
    let mut i = i;
    loop {
        name.insert(0, (b'a' + (i % 26) as u8) as char);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    name
}

/// Seeded random instance: every state is final with probability 1/2, and
/// each candidate transition `(src, label, effect, dst)` with effect in
/// `[−M, M]^d` is kept with probability `density`. Candidates are drawn in a
/// fixed order (source, label with ε first, effect lexicographic, target).
pub fn random_vass(p: &RandomParams) -> Result<Vass, GeneratorError> {
    if p.states == 0 {
        return Err(GeneratorError::NoStates);
    }
    if !(0.0..=1.0).contains(&p.density) {
        return Err(GeneratorError::InvalidDensity);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let states: Vec<String> = (0..p.states).map(|i| format!("q{i}")).collect();
    let alphabet: Vec<String> = (0..p.symbols).map(symbol_name).collect();
    let finals = (0..p.states).filter(|_| rng.gen_bool(0.5)).map(StateId).collect();
    let m = p.norm as i64;
    let width = (2 * m + 1) as usize;
    let effects = width.pow(p.dim as u32);
    let labels: Vec<Label> = std::iter::once(Label::Epsilon)
        .chain((0..p.symbols).map(|a| Label::Symbol(SymbolId(a))))
        .collect();
    let mut transitions = Vec::new();
    for src in 0..p.states {
        for &label in &labels {
            for e in 0..effects {
                let mut rest = e;
                let mut effect = vec![BigInt::zero(); p.dim];
                for k in (0..p.dim).rev() {
                    effect[k] = BigInt::from((rest % width) as i64 - m);
                    rest /= width;
                }
                for dst in 0..p.states {
                    if rng.gen_bool(p.density) {
                        transitions.push(Transition {
                            src: StateId(src),
                            label,
                            effect: effect.clone(),
                            dst: StateId(dst),
                        });
                    }
                }
            }
        }
    }
    Ok(Vass::new(p.dim, alphabet, states, StateId(0), finals, transitions)?)
}
