//! Command-line front end. Every analysis prints a JSON report on standard
//! output; diagnostics go to standard error.
//!
//! Exit codes: 0 the property holds, 1 it fails, 2 inconclusive, 3 usage or
//! input error, 4 the brute-force oracle and the decision procedure
//! disagree.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::ambiguity::{check_unambiguous, AmbiguityOptions, UnambiguityVerdict};
use crate::bounds::{bounds_for, bounds_report, BoundsError};
use crate::coverability::{emptiness, membership, Emptiness, DEFAULT_NODE_CAP};
use crate::generators::{
    gen_bounded_oca, gen_empty_wrap, gen_partition, gen_partition_ambiguous, gen_unamb_check_variant, random_vass,
    BoundedOcaInstance, PartitionInstance, RandomParams,
};
use crate::model::{parse_vass, serialize_vass, Run, Vass, Word};
use crate::oracle::{brute_unambiguous_up_to, brute_universal_up_to, RunCount};
use crate::orchestrator::{
    check_equivalence_with_regular, check_universal, EquivalenceAnswer, UniversalityAnswer, UniversalityOptions,
    WitnessSide,
};
use crate::profile::DEFAULT_PROFILE_BUDGET;

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;
pub const EXIT_DISAGREEMENT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "uvass", version, about = "Decision procedures for unambiguous VASS coverability languages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a model, echoing its canonical form.
    Validate { file: PathBuf },
    /// Decide a property of a model.
    Check {
        file: PathBuf,
        #[command(subcommand)]
        problem: Problem,
        #[command(flatten)]
        budgets: Budgets,
    },
    /// Write a generated instance.
    Generate {
        #[command(subcommand)]
        kind: GenKind,
        /// Output file; standard output when absent.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Brute-force check over all words up to a length.
    Oracle {
        file: PathBuf,
        #[arg(value_enum)]
        mode: OracleMode,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        /// Also run the decision procedure and compare verdicts.
        #[arg(long)]
        cross_check: bool,
        #[command(flatten)]
        budgets: Budgets,
    },
    /// Evaluate the run-length and truncation bounds.
    Bounds {
        /// Model file; alternatively give all of --norm, --dim and --states.
        file: Option<PathBuf>,
        #[arg(long)]
        norm: Option<BigInt>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        states: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
enum Problem {
    /// Is the language empty?
    Empty,
    /// Is WORD accepted?
    Member { word: String },
    /// Does every word have at most one accepting run?
    Unambiguous,
    /// Is every word accepted? (the model must be unambiguous)
    Universal,
    /// Is the language equal to that of a complete DFA?
    EquivRegular { dfa: PathBuf },
}

#[derive(Debug, Clone, Args)]
struct Budgets {
    /// Cap schedule: a list such as 1,2,8, or a single maximum N meaning 1, 2, 4, ... up to N.
    #[arg(long)]
    max_profile: Option<String>,
    /// Node cap of forward witness searches.
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    node_cap: usize,
    /// Largest number of profiles per cap.
    #[arg(long, default_value_t = DEFAULT_PROFILE_BUDGET)]
    profile_budget: usize,
    /// ε-segment budget per word of the run-counting oracle (default derived from the instance).
    #[arg(long)]
    eps_budget: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OracleMode {
    Universal,
    Unambiguous,
}

#[derive(Debug, Subcommand)]
enum GenKind {
    /// Universality gadget for a multiset of positive integers.
    Partition {
        #[arg(required = true, value_delimiter = ',')]
        numbers: Vec<BigInt>,
    },
    /// Ambiguity gadget for a multiset of positive integers.
    PartitionAmbiguous {
        #[arg(required = true, value_delimiter = ',')]
        numbers: Vec<BigInt>,
    },
    /// Universality gadget for bounded reachability in a 1-dimensional VASS.
    BoundedOca(OcaArgs),
    /// Ambiguity gadget for bounded reachability.
    UnambVariant(OcaArgs),
    /// Wrap an ε-only VASS into one over a single letter.
    EmptyWrap {
        file: PathBuf,
        #[arg(long, default_value = "a")]
        letter: String,
    },
    /// Seeded random instance.
    Random {
        #[arg(long, default_value_t = 2)]
        states: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        norm: u32,
        #[arg(long, default_value_t = 2)]
        symbols: usize,
        #[arg(long, default_value_t = 0.1)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct OcaArgs {
    file: PathBuf,
    /// Counter bound N.
    #[arg(long)]
    bound: BigInt,
    /// Target state p.
    #[arg(long)]
    target: String,
    /// Target counter value m.
    #[arg(long)]
    m: BigInt,
}

#[derive(Debug, Serialize)]
struct Input {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Report {
    tool: &'static str,
    version: &'static str,
    command: String,
    inputs: Vec<Input>,
    parameters: Value,
    verdict: Value,
    witnesses: Value,
    statistics: Value,
}

/// A failure that ends the command with a message and an exit code.
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.to_string(),
    }
}

struct Loaded {
    vass: Vass,
    input: Input,
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    let bytes = fs::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| usage(format!("{}: not UTF-8", path.display())))?;
    let vass = parse_vass(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(Loaded {
        vass,
        input: Input {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        },
    })
}

fn run_json(v: &Vass, run: &Run) -> Value {
    json!({
        "transitions": run.steps().iter().map(|t| t.0).collect::<Vec<_>>(),
        "word": run.word(v).render(v),
    })
}

fn word_json(v: &Vass, w: &Word) -> Value {
    json!({ "text": w.render(v), "symbols": w.names(v) })
}

impl Budgets {
    fn caps(&self) -> Result<Option<Vec<BigInt>>, Failure> {
        let Some(raw) = &self.max_profile else {
            return Ok(None);
        };
        let caps = raw
            .split(',')
            .map(|s| s.trim().parse::<BigInt>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| usage(format!("--max-profile: cannot parse {raw:?}")))?;
        if caps.is_empty() || caps.iter().any(|c| c < &BigInt::from(0)) {
            return Err(usage("--max-profile: caps must be nonnegative"));
        }
        if caps.len() > 1 {
            return Ok(Some(caps));
        }
        let max = &caps[0];
        let mut schedule = Vec::new();
        let mut c = BigInt::from(1);
        while &c < max {
            schedule.push(c.clone());
            c *= 2;
        }
        schedule.push(max.clone());
        Ok(Some(schedule))
    }

    fn universality(&self) -> Result<UniversalityOptions, Failure> {
        Ok(UniversalityOptions {
            cap_schedule: self.caps()?,
            profile_budget: self.profile_budget,
            ..UniversalityOptions::default()
        })
    }

    fn ambiguity(&self) -> AmbiguityOptions {
        AmbiguityOptions {
            node_cap: self.node_cap,
            eps_budget: self.eps_budget,
            ..AmbiguityOptions::default()
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "max_profile": self.max_profile,
            "node_cap": self.node_cap,
            "profile_budget": self.profile_budget,
            "eps_budget": self.eps_budget,
        })
    }
}

struct Outcome {
    code: i32,
    report: Report,
}

fn report(command: &str, inputs: Vec<Input>, parameters: Value) -> Report {
    Report {
        tool: "uvass",
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        inputs,
        parameters,
        verdict: Value::Null,
        witnesses: Value::Null,
        statistics: Value::Null,
    }
}

fn cmd_validate(file: &Path) -> Result<Outcome, Failure> {
    let loaded = load(file)?;
    let v = &loaded.vass;
    let mut r = report("validate", vec![loaded.input], json!({}));
    r.verdict = json!({
        "valid": true,
        "dim": v.dim(),
        "states": v.state_count(),
        "symbols": v.alphabet().len(),
        "transitions": v.transitions().len(),
        "norm": v.norm().to_string(),
        "canonical": serialize_vass(v),
    });
    Ok(Outcome {
        code: EXIT_HOLDS,
        report: r,
    })
}

fn universality_json(v: &Vass, u: &crate::orchestrator::UniversalityVerdict) -> (Value, Value, Value) {
    let verdict = json!({
        "answer": u.answer.as_str(),
        "caps_tried": u.caps_tried.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "evidence": u.evidence.as_ref().map(|e| json!({"count": e.count.to_string(), "cap": e.cap.to_string()})),
        "note": u.note,
    });
    let witnesses = json!({ "word": u.witness.as_ref().map(|w| word_json(v, w)) });
    let stats = json!({
        "profile_states": u.stats.profile_states,
        "words_explored": u.stats.words_explored,
        "basis_size": u.stats.basis_size,
    });
    (verdict, witnesses, stats)
}

fn universality_code(a: UniversalityAnswer) -> i32 {
    match a {
        UniversalityAnswer::Universal => EXIT_HOLDS,
        UniversalityAnswer::NotUniversal => EXIT_FAILS,
        UniversalityAnswer::PreconditionViolated | UniversalityAnswer::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn unambiguity_json(v: &Vass, u: &UnambiguityVerdict) -> (Value, Value) {
    match u {
        UnambiguityVerdict::Unambiguous => (json!({"answer": "unambiguous"}), Value::Null),
        UnambiguityVerdict::Ambiguous(ev) => (
            json!({
                "answer": "ambiguous",
                "count": ev.count.as_ref().map(ToString::to_string),
                "witness_omitted": ev.word.is_none(),
            }),
            json!({
                "word": ev.word.as_ref().map(|w| word_json(v, w)),
                "runs": ev.runs.as_ref().map(|(a, b)| vec![run_json(v, a), run_json(v, b)]),
            }),
        ),
    }
}

fn cmd_check(file: &Path, problem: &Problem, budgets: &Budgets) -> Result<Outcome, Failure> {
    let loaded = load(file)?;
    let v = &loaded.vass;
    let mut inputs = vec![loaded.input];
    let (name, mut params) = match problem {
        Problem::Empty => ("check empty", json!({})),
        Problem::Member { word } => ("check member", json!({ "word": word })),
        Problem::Unambiguous => ("check unambiguous", json!({})),
        Problem::Universal => ("check universal", json!({})),
        Problem::EquivRegular { dfa } => ("check equiv-regular", json!({ "dfa": dfa.display().to_string() })),
    };
    params["budgets"] = budgets.to_json();
    let started = Instant::now();
    let (code, verdict, witnesses, mut stats) = match problem {
        Problem::Empty => match emptiness(v, budgets.node_cap) {
            Emptiness::Empty => (EXIT_HOLDS, json!({"answer": "empty"}), Value::Null, json!({})),
            Emptiness::NonEmpty { witness } => (
                EXIT_FAILS,
                json!({"answer": "nonempty", "witness_omitted": witness.is_none()}),
                json!({ "run": witness.as_ref().map(|r| run_json(v, r)) }),
                json!({}),
            ),
        },
        Problem::Member { word } => {
            let w = Word::parse(v, word).map_err(usage)?;
            let member = membership(v, &w.0);
            (
                if member { EXIT_HOLDS } else { EXIT_FAILS },
                json!({"answer": if member { "member" } else { "not-member" }}),
                json!({ "word": word_json(v, &w) }),
                json!({}),
            )
        }
        Problem::Unambiguous => {
            let u = check_unambiguous(v, &budgets.ambiguity());
            let (verdict, witnesses) = unambiguity_json(v, &u);
            let code = if u.is_unambiguous() { EXIT_HOLDS } else { EXIT_FAILS };
            (code, verdict, witnesses, json!({}))
        }
        Problem::Universal => {
            let u = check_universal(v, &budgets.universality()?);
            let (verdict, witnesses, stats) = universality_json(v, &u);
            (universality_code(u.answer), verdict, witnesses, stats)
        }
        Problem::EquivRegular { dfa } => {
            let d = load(dfa)?;
            inputs.push(d.input);
            let e = check_equivalence_with_regular(v, &d.vass, &budgets.ambiguity(), &budgets.universality()?)
                .map_err(usage)?;
            let code = match e.answer {
                EquivalenceAnswer::Equivalent => EXIT_HOLDS,
                EquivalenceAnswer::NotEquivalent => EXIT_FAILS,
                _ => EXIT_INCONCLUSIVE,
            };
            let side = e.side.map(|s| match s {
                WitnessSide::VassOnly => "vass-only",
                WitnessSide::RegularOnly => "regular-only",
            });
            (
                code,
                json!({"answer": e.answer.as_str(), "note": e.note}),
                json!({"word": e.witness.as_ref().map(|w| word_json(v, w)), "side": side}),
                json!({}),
            )
        }
    };
    stats["wall_time_ms"] = json!(started.elapsed().as_millis());
    let mut r = report(name, inputs, params);
    r.verdict = verdict;
    r.witnesses = witnesses;
    r.statistics = stats;
    Ok(Outcome { code, report: r })
}

fn cmd_oracle(
    file: &Path,
    mode: OracleMode,
    max_len: usize,
    cross_check: bool,
    budgets: &Budgets,
) -> Result<Outcome, Failure> {
    let eps_budget = budgets.eps_budget;
    let loaded = load(file)?;
    let v = &loaded.vass;
    let started = Instant::now();
    let mut params = json!({ "max_len": max_len, "cross_check": cross_check });
    params["budgets"] = budgets.to_json();
    let mut r = report(
        match mode {
            OracleMode::Universal => "oracle universal",
            OracleMode::Unambiguous => "oracle unambiguous",
        },
        vec![loaded.input],
        params,
    );
    let inconclusive = |e: crate::oracle::OracleError| Failure {
        code: EXIT_INCONCLUSIVE,
        message: e.to_string(),
    };
    let mut code;
    match mode {
        OracleMode::Universal => {
            let missing = brute_universal_up_to(v, max_len, eps_budget).map_err(inconclusive)?;
            code = if missing.is_some() { EXIT_FAILS } else { EXIT_HOLDS };
            r.verdict = json!({
                "answer": if missing.is_some() { "not-universal" } else { "no-missing-word-up-to-bound" },
            });
            r.witnesses = json!({ "word": missing.as_ref().map(|w| word_json(v, w)) });
            if cross_check {
                let u = check_universal(v, &budgets.universality()?);
                let disagree = match u.answer {
                    UniversalityAnswer::Universal => missing.is_some(),
                    UniversalityAnswer::NotUniversal => {
                        missing.is_none() && u.witness.as_ref().is_some_and(|w| w.len() <= max_len)
                    }
                    _ => false,
                };
                r.verdict["checker"] = json!(u.answer.as_str());
                r.verdict["agreement"] = json!(!disagree);
                if disagree {
                    code = EXIT_DISAGREEMENT;
                }
            }
        }
        OracleMode::Unambiguous => {
            let found = brute_unambiguous_up_to(v, max_len, eps_budget).map_err(inconclusive)?;
            code = if found.is_some() { EXIT_FAILS } else { EXIT_HOLDS };
            r.verdict = json!({
                "answer": if found.is_some() { "ambiguous" } else { "no-ambiguous-word-up-to-bound" },
                "count": found.as_ref().map(|f| match &f.count {
                    RunCount::Unbounded => "unbounded".to_string(),
                    c => c.to_string(),
                }),
            });
            r.witnesses = json!({
                "word": found.as_ref().map(|f| word_json(v, &f.word)),
                "runs": found.as_ref().and_then(|f| f.runs.as_ref()).map(|(a, b)| vec![run_json(v, a), run_json(v, b)]),
            });
            if cross_check {
                let u = check_unambiguous(v, &budgets.ambiguity());
                let disagree = match &u {
                    UnambiguityVerdict::Unambiguous => found.is_some(),
                    UnambiguityVerdict::Ambiguous(ev) => {
                        found.is_none() && ev.word.as_ref().is_some_and(|w| w.len() <= max_len)
                    }
                };
                r.verdict["checker"] = json!(if u.is_unambiguous() { "unambiguous" } else { "ambiguous" });
                r.verdict["agreement"] = json!(!disagree);
                if disagree {
                    code = EXIT_DISAGREEMENT;
                }
            }
        }
    }
    r.statistics = json!({ "wall_time_ms": started.elapsed().as_millis() });
    Ok(Outcome { code, report: r })
}

fn cmd_bounds(
    file: Option<&Path>,
    norm: Option<&BigInt>,
    dim: Option<usize>,
    states: Option<usize>,
) -> Result<Outcome, Failure> {
    let (inputs, result) = match (file, norm, dim, states) {
        (Some(f), None, None, None) => {
            let loaded = load(f)?;
            let result = bounds_report(&loaded.vass);
            (vec![loaded.input], result)
        }
        (None, Some(m), Some(d), Some(n)) => (Vec::new(), bounds_for(m, d, n)),
        _ => return Err(usage("give either a model file or all of --norm, --dim and --states")),
    };
    let params = json!({
        "norm": norm.map(ToString::to_string),
        "dim": dim,
        "states": states,
    });
    let mut r = report("bounds", inputs, params);
    let code = match result {
        Ok(b) => {
            r.verdict = b.to_json();
            EXIT_HOLDS
        }
        Err(e @ BoundsError::TooLarge { .. }) => {
            r.verdict = json!({ "error": e.to_string() });
            EXIT_INCONCLUSIVE
        }
        Err(e) => return Err(usage(e)),
    };
    Ok(Outcome { code, report: r })
}

fn write_model(v: &Vass, out: Option<&Path>, command: &str, params: Value) -> Result<Option<Outcome>, Failure> {
    let text = serialize_vass(v);
    let Some(path) = out else {
        let _ = std::io::stdout().lock().write_all(text.as_bytes());
        return Ok(None);
    };
    fs::write(path, &text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut r = report(command, Vec::new(), params);
    r.verdict = json!({
        "written": path.display().to_string(),
        "sha256": hex::encode(Sha256::digest(text.as_bytes())),
        "states": v.state_count(),
        "transitions": v.transitions().len(),
    });
    Ok(Some(Outcome {
        code: EXIT_HOLDS,
        report: r,
    }))
}

fn oca_instance(args: &OcaArgs) -> Result<(BoundedOcaInstance, Input), Failure> {
    let loaded = load(&args.file)?;
    let target = loaded
        .vass
        .state_id(&args.target)
        .ok_or_else(|| usage(format!("unknown target state {:?}", args.target)))?;
    let inst = BoundedOcaInstance::new(loaded.vass, args.bound.clone(), target, args.m.clone()).map_err(usage)?;
    Ok((inst, loaded.input))
}

fn cmd_generate(kind: &GenKind, out: Option<&Path>) -> Result<Option<Outcome>, Failure> {
    let nums = |xs: &[BigInt]| json!(xs.iter().map(ToString::to_string).collect::<Vec<_>>());
    let (v, command, params) = match kind {
        GenKind::Partition { numbers } => {
            let inst = PartitionInstance::new(numbers.clone()).map_err(usage)?;
            (gen_partition(&inst).map_err(usage)?, "generate partition", json!({ "numbers": nums(numbers) }))
        }
        GenKind::PartitionAmbiguous { numbers } => {
            let inst = PartitionInstance::new(numbers.clone()).map_err(usage)?;
            (
                gen_partition_ambiguous(&inst).map_err(usage)?,
                "generate partition-ambiguous",
                json!({ "numbers": nums(numbers) }),
            )
        }
        GenKind::BoundedOca(args) | GenKind::UnambVariant(args) => {
            let (inst, input) = oca_instance(args)?;
            let (v, command) = if matches!(kind, GenKind::BoundedOca(_)) {
                (gen_bounded_oca(&inst).map_err(usage)?, "generate bounded-oca")
            } else {
                (gen_unamb_check_variant(&inst).map_err(usage)?, "generate unamb-variant")
            };
            let params = json!({
                "input": input,
                "bound": args.bound.to_string(),
                "target": args.target,
                "m": args.m.to_string(),
            });
            (v, command, params)
        }
        GenKind::EmptyWrap { file, letter } => {
            let loaded = load(file)?;
            (
                gen_empty_wrap(&loaded.vass, letter).map_err(usage)?,
                "generate empty-wrap",
                json!({ "input": loaded.input, "letter": letter }),
            )
        }
        GenKind::Random {
            states,
            dim,
            norm,
            symbols,
            density,
            seed,
        } => {
            let p = RandomParams {
                states: *states,
                dim: *dim,
                norm: *norm,
                symbols: *symbols,
                density: *density,
                seed: *seed,
            };
            (
                random_vass(&p).map_err(usage)?,
                "generate random",
                json!({
                    "states": states, "dim": dim, "norm": norm,
                    "symbols": symbols, "density": density, "seed": seed,
                }),
            )
        }
    };
    write_model(&v, out, command, params)
}

fn dispatch(cli: Cli) -> Result<Option<Outcome>, Failure> {
    match cli.command {
        Command::Validate { file } => cmd_validate(&file).map(Some),
        Command::Check { file, problem, budgets } => cmd_check(&file, &problem, &budgets).map(Some),
        Command::Generate { kind, out } => cmd_generate(&kind, out.as_deref()),
        Command::Oracle {
            file,
            mode,
            max_len,
            cross_check,
            budgets,
        } => cmd_oracle(&file, mode, max_len, cross_check, &budgets).map(Some),
        Command::Bounds {
            file,
            norm,
            dim,
            states,
        } => cmd_bounds(file.as_deref(), norm.as_ref(), dim, states).map(Some),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_HOLDS };
        }
    };
    match dispatch(cli) {
        Ok(None) => EXIT_HOLDS,
        Ok(Some(outcome)) => {
            let text = serde_json::to_string_pretty(&outcome.report).expect("reports serialize");
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            outcome.code
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
