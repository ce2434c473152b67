//! VASS data model, validation and the textual interchange format.
//!
//! A finite automaton is a VASS of dimension 0. All algorithms work on the
//! dense indices ([`StateId`], [`SymbolId`], [`TransitionId`]) assigned by
//! declaration order; names only matter at the surface.

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

/// Token reserved for the empty word in transition labels.
pub const EPSILON_TOKEN: &str = "eps";

/// Interchange format version accepted by [`parse_vass`].
pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub usize);

/// Zero-based position of a transition in the declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransitionId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Epsilon,
    Symbol(SymbolId),
}

impl Label {
    pub fn is_epsilon(self) -> bool {
        matches!(self, Label::Epsilon)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub src: StateId,
    pub label: Label,
    pub effect: Vec<BigInt>,
    pub dst: StateId,
}

fn line_prefix(line: &Option<usize>) -> String {
    match line {
        Some(l) => format!("line {l}: "),
        None => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{}effect arity {found}, expected {expected}", line_prefix(.line))]
    EffectArity {
        line: Option<usize>,
        found: usize,
        expected: usize,
    },
    #[error("{}undeclared state `{name}`", line_prefix(.line))]
    UndeclaredState { line: Option<usize>, name: String },
    #[error("{}undeclared symbol `{name}`", line_prefix(.line))]
    UndeclaredSymbol { line: Option<usize>, name: String },
    #[error("{}duplicate state `{name}`", line_prefix(.line))]
    DuplicateState { line: Option<usize>, name: String },
    #[error("{}duplicate symbol `{name}`", line_prefix(.line))]
    DuplicateSymbol { line: Option<usize>, name: String },
    #[error("{}duplicate final state `{name}`", line_prefix(.line))]
    DuplicateFinal { line: Option<usize>, name: String },
    #[error("{}`eps` is reserved for the empty word and cannot be a symbol", line_prefix(.line))]
    ReservedSymbol { line: Option<usize> },
    #[error("{}invalid name `{name}` (expected a non-empty token over [A-Za-z0-9_*])", line_prefix(.line))]
    InvalidName { line: Option<usize>, name: String },
    #[error("a VASS needs at least one state")]
    NoStates,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
}

pub(crate) fn is_valid_token(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '*')
}

/// A vector addition system with states, reading letters of a finite alphabet.
///
/// Values are immutable once built; construct them through [`Vass::new`],
/// [`VassBuilder`] or [`parse_vass`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vass {
    dim: usize,
    alphabet: Vec<String>,
    states: Vec<String>,
    initial: StateId,
    finals: BTreeSet<StateId>,
    transitions: Vec<Transition>,
    outgoing: Vec<Vec<TransitionId>>,
    incoming: Vec<Vec<TransitionId>>,
    symbol_index: HashMap<String, SymbolId>,
    state_index: HashMap<String, StateId>,
}

impl Vass {
    pub fn new(
        dim: usize,
        alphabet: Vec<String>,
        states: Vec<String>,
        initial: StateId,
        finals: BTreeSet<StateId>,
        transitions: Vec<Transition>,
    ) -> Result<Self, ModelError> {
        if states.is_empty() {
            return Err(ModelError::NoStates);
        }
        let mut symbol_index = HashMap::new();
        for (i, s) in alphabet.iter().enumerate() {
            if s == EPSILON_TOKEN {
                return Err(ModelError::ReservedSymbol { line: None });
            }
            if !is_valid_token(s) {
                return Err(ModelError::InvalidName {
                    line: None,
                    name: s.clone(),
                });
            }
            if symbol_index.insert(s.clone(), SymbolId(i)).is_some() {
                return Err(ModelError::DuplicateSymbol {
                    line: None,
                    name: s.clone(),
                });
            }
        }
        let mut state_index = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            if !is_valid_token(s) {
                return Err(ModelError::InvalidName {
                    line: None,
                    name: s.clone(),
                });
            }
            if state_index.insert(s.clone(), StateId(i)).is_some() {
                return Err(ModelError::DuplicateState {
                    line: None,
                    name: s.clone(),
                });
            }
        }
        let n = states.len();
        if initial.0 >= n {
            return Err(ModelError::IndexOutOfRange(format!("initial state {}", initial.0)));
        }
        if let Some(f) = finals.iter().find(|f| f.0 >= n) {
            return Err(ModelError::IndexOutOfRange(format!("final state {}", f.0)));
        }
        let mut outgoing = vec![Vec::new(); n];
        let mut incoming = vec![Vec::new(); n];
        for (i, t) in transitions.iter().enumerate() {
            if t.src.0 >= n || t.dst.0 >= n {
                return Err(ModelError::IndexOutOfRange(format!("endpoint of transition {i}")));
            }
            if let Label::Symbol(a) = t.label {
                if a.0 >= alphabet.len() {
                    return Err(ModelError::IndexOutOfRange(format!("label of transition {i}")));
                }
            }
            if t.effect.len() != dim {
                return Err(ModelError::EffectArity {
                    line: None,
                    found: t.effect.len(),
                    expected: dim,
                });
            }
            outgoing[t.src.0].push(TransitionId(i));
            incoming[t.dst.0].push(TransitionId(i));
        }
        Ok(Vass {
            dim,
            alphabet,
            states,
            initial,
            finals,
            transitions,
            outgoing,
            incoming,
            symbol_index,
            state_index,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn finals(&self) -> &BTreeSet<StateId> {
        &self.finals
    }

    pub fn is_final(&self, q: StateId) -> bool {
        self.finals.contains(&q)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, t: TransitionId) -> &Transition {
        &self.transitions[t.0]
    }

    /// Outgoing transitions of `q`, in `TransitionId` order.
    pub fn outgoing(&self, q: StateId) -> &[TransitionId] {
        &self.outgoing[q.0]
    }

    pub fn incoming(&self, q: StateId) -> &[TransitionId] {
        &self.incoming[q.0]
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q.0]
    }

    pub fn symbol_name(&self, a: SymbolId) -> &str {
        &self.alphabet[a.0]
    }

    pub fn label_name(&self, l: Label) -> &str {
        match l {
            Label::Epsilon => EPSILON_TOKEN,
            Label::Symbol(a) => self.symbol_name(a),
        }
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_index.get(name).copied()
    }

    pub fn symbol_id(&self, name: &str) -> Option<SymbolId> {
        self.symbol_index.get(name).copied()
    }

    pub fn has_epsilon(&self) -> bool {
        self.transitions.iter().any(|t| t.label.is_epsilon())
    }

    /// Maximal absolute value of an effect entry; 0 without transitions or
    /// counters.
    pub fn norm(&self) -> BigInt {
        norm(self)
    }
}

/// See [`Vass::norm`].
pub fn norm(v: &Vass) -> BigInt {
    v.transitions
        .iter()
        .flat_map(|t| t.effect.iter())
        .map(|e| e.abs())
        .max()
        .unwrap_or_else(BigInt::zero)
}

/// Name-based construction, used by the generators.
#[derive(Debug, Clone, Default)]
pub struct VassBuilder {
    dim: usize,
    alphabet: Vec<String>,
    states: Vec<String>,
    initial: Option<String>,
    finals: Vec<String>,
    transitions: Vec<(String, Option<String>, Vec<BigInt>, String)>,
}

impl VassBuilder {
    pub fn new(dim: usize) -> Self {
        VassBuilder {
            dim,
            ..Default::default()
        }
    }

    pub fn symbol(&mut self, name: impl Into<String>) -> &mut Self {
        self.alphabet.push(name.into());
        self
    }

    pub fn state(&mut self, name: impl Into<String>) -> &mut Self {
        self.states.push(name.into());
        self
    }

    pub fn initial(&mut self, name: impl Into<String>) -> &mut Self {
        self.initial = Some(name.into());
        self
    }

    pub fn final_state(&mut self, name: impl Into<String>) -> &mut Self {
        self.finals.push(name.into());
        self
    }

    /// `label = None` is ε.
    pub fn transition<I, E>(
        &mut self,
        src: impl Into<String>,
        label: Option<&str>,
        effect: I,
        dst: impl Into<String>,
    ) -> &mut Self
    where
        I: IntoIterator<Item = E>,
        E: Into<BigInt>,
    {
        self.transitions.push((
            src.into(),
            label.map(str::to_string),
            effect.into_iter().map(Into::into).collect(),
            dst.into(),
        ));
        self
    }

    pub fn build(&self) -> Result<Vass, ModelError> {
        let lookup_state = |name: &str| -> Result<StateId, ModelError> {
            self.states
                .iter()
                .position(|s| s == name)
                .map(StateId)
                .ok_or_else(|| ModelError::UndeclaredState {
                    line: None,
                    name: name.to_string(),
                })
        };
        let initial = match &self.initial {
            Some(q) => lookup_state(q)?,
            None => StateId(0),
        };
        let mut finals = BTreeSet::new();
        for f in &self.finals {
            if !finals.insert(lookup_state(f)?) {
                return Err(ModelError::DuplicateFinal {
                    line: None,
                    name: f.clone(),
                });
            }
        }
        let mut transitions = Vec::with_capacity(self.transitions.len());
        for (src, label, effect, dst) in &self.transitions {
            let label = match label {
                None => Label::Epsilon,
                Some(a) => Label::Symbol(
                    self.alphabet
                        .iter()
                        .position(|s| s == a)
                        .map(SymbolId)
                        .ok_or_else(|| ModelError::UndeclaredSymbol {
                            line: None,
                            name: a.clone(),
                        })?,
                ),
            };
            transitions.push(Transition {
                src: lookup_state(src)?,
                label,
                effect: effect.clone(),
                dst: lookup_state(dst)?,
            });
        }
        Vass::new(
            self.dim,
            self.alphabet.clone(),
            self.states.clone(),
            initial,
            finals,
            transitions,
        )
    }
}

/// A state together with non-negative counter values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: StateId,
    pub counters: Vec<BigInt>,
}

impl Configuration {
    pub fn new(state: StateId, counters: Vec<BigInt>) -> Self {
        Configuration { state, counters }
    }

    /// `q₀(0̄)`.
    pub fn initial(v: &Vass) -> Self {
        Configuration {
            state: v.initial(),
            counters: vec![BigInt::zero(); v.dim()],
        }
    }

    pub fn zero(state: StateId, dim: usize) -> Self {
        Configuration {
            state,
            counters: vec![BigInt::zero(); dim],
        }
    }

    pub fn is_valid_for(&self, v: &Vass) -> bool {
        self.state.0 < v.state_count()
            && self.counters.len() == v.dim()
            && self.counters.iter().all(|c| !c.is_negative())
    }

    /// Same state and component-wise `≥`.
    pub fn covers(&self, other: &Configuration) -> bool {
        self.state == other.state && dominates(&self.counters, &other.counters)
    }

    /// Fires `t` if the source matches and no counter drops below zero.
    pub fn fire(&self, t: &Transition) -> Option<Configuration> {
        if t.src != self.state {
            return None;
        }
        add_effect(&self.counters, &t.effect).map(|counters| Configuration {
            state: t.dst,
            counters,
        })
    }
}

/// Component-wise `a ⪰ b`.
pub fn dominates(a: &[BigInt], b: &[BigInt]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

/// `counters + effect` if it stays in ℕ^d.
pub fn add_effect(counters: &[BigInt], effect: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut out = Vec::with_capacity(counters.len());
    for (c, e) in counters.iter().zip(effect) {
        let s = c + e;
        if s.is_negative() {
            return None;
        }
        out.push(s);
    }
    Some(out)
}

/// A finite word over the alphabet of some VASS.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<SymbolId>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[SymbolId] {
        &self.0
    }

    pub fn push(&mut self, a: SymbolId) {
        self.0.push(a);
    }

    pub fn names<'a>(&self, v: &'a Vass) -> Vec<&'a str> {
        self.0.iter().map(|&a| v.symbol_name(a)).collect()
    }

    /// Concatenated if every symbol is one character, space-separated
    /// otherwise; the empty word renders as `""`.
    pub fn render(&self, v: &Vass) -> String {
        let names = self.names(v);
        if v.alphabet().iter().all(|s| s.chars().count() == 1) {
            names.concat()
        } else {
            names.join(" ")
        }
    }

    /// Parses `text` over the alphabet of `v`. Separators (`,` or
    /// whitespace) are honoured when present; otherwise the text is split by
    /// greedy longest match against the alphabet. `""` and `eps` denote the
    /// empty word.
    pub fn parse(v: &Vass, text: &str) -> Result<Word, ModelError> {
        let text = text.trim();
        if text.is_empty() || text == EPSILON_TOKEN {
            return Ok(Word::empty());
        }
        let lookup = |tok: &str| {
            v.symbol_id(tok).ok_or_else(|| ModelError::UndeclaredSymbol {
                line: None,
                name: tok.to_string(),
            })
        };
        if text.contains(|c: char| c == ',' || c.is_whitespace()) {
            return text
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(lookup)
                .collect::<Result<Vec<_>, _>>()
                .map(Word);
        }
        let mut out = Vec::new();
        let mut rest = text;
        while !rest.is_empty() {
            let best = v
                .alphabet()
                .iter()
                .enumerate()
                .filter(|(_, s)| rest.starts_with(s.as_str()))
                .max_by_key(|(_, s)| s.len());
            match best {
                Some((i, s)) => {
                    out.push(SymbolId(i));
                    rest = &rest[s.len()..];
                }
                None => return Err(lookup(rest).unwrap_err()),
            }
        }
        Ok(Word(out))
    }
}

/// Enumerates all words over `k` symbols in length-lexicographic order
/// (symbol order = declaration order), up to length `max_len` inclusive.
pub fn words_up_to(k: usize, max_len: usize) -> impl Iterator<Item = Word> {
    let mut current: Option<Vec<usize>> = Some(Vec::new());
    std::iter::from_fn(move || {
        let w = current.take()?;
        let out = Word(w.iter().map(|&i| SymbolId(i)).collect());
        // successor in length-lex order
        let mut next = w;
        let mut i = next.len();
        loop {
            if i == 0 {
                let len = next.len() + 1;
                if len <= max_len && k > 0 {
                    current = Some(vec![0; len]);
                }
                break;
            }
            i -= 1;
            if next[i] + 1 < k {
                next[i] += 1;
                for x in next.iter_mut().skip(i + 1) {
                    *x = 0;
                }
                current = Some(next);
                break;
            }
        }
        Some(out)
    })
}

/// A sequence of transitions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Run(pub Vec<TransitionId>);

impl Run {
    pub fn steps(&self) -> &[TransitionId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Label projection with ε dropped.
    pub fn word(&self, v: &Vass) -> Word {
        Word(
            self.0
                .iter()
                .filter_map(|&t| match v.transition(t).label {
                    Label::Symbol(a) => Some(a),
                    Label::Epsilon => None,
                })
                .collect(),
        )
    }
}

fn syntax(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Syntax {
        line,
        message: message.into(),
    }
}

/// Parses the interchange format.
///
/// ```text
/// vass 1
/// dim 1
/// alphabet a b
/// states p q
/// initial p
/// final q
/// trans p a 1 q
/// trans q eps -1 p
/// ```
pub fn parse_vass(text: &str) -> Result<Vass, ModelError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("")))
        .map(|(i, l)| (i, l.split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, toks)| !toks.is_empty());

    let mut section = |keyword: &str| -> Result<(usize, Vec<&str>), ModelError> {
        match lines.next() {
            Some((line, toks)) if toks[0] == keyword => Ok((line, toks[1..].to_vec())),
            Some((line, toks)) => Err(syntax(
                line,
                format!("expected `{keyword}`, found `{}`", toks[0]),
            )),
            None => Err(syntax(
                text.lines().count().max(1),
                format!("unexpected end of input, expected `{keyword}`"),
            )),
        }
    };

    let (line, args) = section("vass")?;
    if args != [FORMAT_VERSION] {
        return Err(syntax(line, format!("unsupported format version `{}`", args.join(" "))));
    }
    let (line, args) = section("dim")?;
    let dim = match args.as_slice() {
        [d] => d
            .parse::<usize>()
            .map_err(|_| syntax(line, format!("invalid dimension `{d}`")))?,
        _ => return Err(syntax(line, "`dim` takes exactly one argument")),
    };

    let (line, args) = section("alphabet")?;
    let mut alphabet = Vec::new();
    let mut symbol_index = HashMap::new();
    for a in args {
        if a == EPSILON_TOKEN {
            return Err(ModelError::ReservedSymbol { line: Some(line) });
        }
        if !is_valid_token(a) {
            return Err(ModelError::InvalidName {
                line: Some(line),
                name: a.to_string(),
            });
        }
        if symbol_index.insert(a, SymbolId(alphabet.len())).is_some() {
            return Err(ModelError::DuplicateSymbol {
                line: Some(line),
                name: a.to_string(),
            });
        }
        alphabet.push(a.to_string());
    }

    let (line, args) = section("states")?;
    if args.is_empty() {
        return Err(syntax(line, "`states` needs at least one state"));
    }
    let mut states = Vec::new();
    let mut state_index = HashMap::new();
    for q in args {
        if !is_valid_token(q) {
            return Err(ModelError::InvalidName {
                line: Some(line),
                name: q.to_string(),
            });
        }
        if state_index.insert(q, StateId(states.len())).is_some() {
            return Err(ModelError::DuplicateState {
                line: Some(line),
                name: q.to_string(),
            });
        }
        states.push(q.to_string());
    }
    let state = |line: usize, name: &str| {
        state_index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UndeclaredState {
                line: Some(line),
                name: name.to_string(),
            })
    };

    let (line, args) = section("initial")?;
    let initial = match args.as_slice() {
        [q] => state(line, q)?,
        _ => return Err(syntax(line, "`initial` takes exactly one state")),
    };

    let (line, args) = section("final")?;
    let mut finals = BTreeSet::new();
    for f in args {
        if !finals.insert(state(line, f)?) {
            return Err(ModelError::DuplicateFinal {
                line: Some(line),
                name: f.to_string(),
            });
        }
    }

    let mut transitions = Vec::new();
    for (line, toks) in lines {
        if toks[0] != "trans" {
            return Err(syntax(line, format!("expected `trans`, found `{}`", toks[0])));
        }
        if toks.len() < 4 {
            return Err(syntax(line, "`trans` needs <src> <label> <effect…> <dst>"));
        }
        let found = toks.len() - 4;
        let src = state(line, toks[1])?;
        let label = if toks[2] == EPSILON_TOKEN {
            Label::Epsilon
        } else {
            Label::Symbol(symbol_index.get(toks[2]).copied().ok_or_else(|| {
                ModelError::UndeclaredSymbol {
                    line: Some(line),
                    name: toks[2].to_string(),
                }
            })?)
        };
        let mut effect = Vec::with_capacity(found);
        for tok in &toks[3..toks.len() - 1] {
            let valid = {
                let digits = tok.strip_prefix('-').unwrap_or(tok);
                !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
            };
            if !valid {
                // a non-integer here usually means the effect is too short
                if found < dim {
                    return Err(ModelError::EffectArity {
                        line: Some(line),
                        found,
                        expected: dim,
                    });
                }
                return Err(syntax(line, format!("invalid integer `{tok}`")));
            }
            effect.push(tok.parse::<BigInt>().map_err(|_| syntax(line, format!("invalid integer `{tok}`")))?);
        }
        if found != dim {
            return Err(ModelError::EffectArity {
                line: Some(line),
                found,
                expected: dim,
            });
        }
        let dst = state(line, toks[toks.len() - 1])?;
        transitions.push(Transition {
            src,
            label,
            effect,
            dst,
        });
    }

    Vass::new(dim, alphabet, states, initial, finals, transitions)
}

/// Canonical text form: fixed section order, one transition per line in
/// `TransitionId` order, finals in declaration order.
pub fn serialize_vass(v: &Vass) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "vass {FORMAT_VERSION}");
    let _ = writeln!(out, "dim {}", v.dim());
    write_list(&mut out, "alphabet", v.alphabet().iter().map(String::as_str));
    write_list(&mut out, "states", v.states().iter().map(String::as_str));
    let _ = writeln!(out, "initial {}", v.state_name(v.initial()));
    write_list(&mut out, "final", v.finals().iter().map(|&f| v.state_name(f)));
    for t in v.transitions() {
        let _ = write!(out, "trans {} {}", v.state_name(t.src), v.label_name(t.label));
        for e in &t.effect {
            let _ = write!(out, " {e}");
        }
        let _ = writeln!(out, " {}", v.state_name(t.dst));
    }
    out
}

fn write_list<'a>(out: &mut String, keyword: &str, items: impl Iterator<Item = &'a str>) {
    out.push_str(keyword);
    for it in items {
        out.push(' ');
        out.push_str(it);
    }
    out.push('\n');
}

impl fmt::Display for Vass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_vass(self))
    }
}
