use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_uvass");

const DETERMINISTIC: &str = "vass 1\ndim 0\nalphabet a b\nstates q r\ninitial q\nfinal r\n\
trans q a r\ntrans q b q\ntrans r a r\ntrans r b q\n";

const COUNTER_ONE: &str = "vass 1\ndim 1\nalphabet a b\nstates q f\ninitial q\nfinal f\n\
trans q a 1 q\ntrans q b -1 f\ntrans f b 0 f\n";

fn scratch(test: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("uvass-cli-{}-{test}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn uvass<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(BIN).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("not a JSON report ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn generate(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let out = uvass(std::iter::once("generate").chain(args.iter().copied()));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let p = dir.join(name);
    fs::write(&p, &out.stdout).unwrap();
    p
}

#[test]
fn validate_accepts_and_rejects() {
    let dir = scratch("validate");
    let ok = write(&dir, "ok.vass", COUNTER_ONE);
    let out = uvass([Path::new("validate"), &ok]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["verdict"]["valid"], true);

    let arity = write(&dir, "arity.vass", &COUNTER_ONE.replace("trans q a 1 q", "trans q a 1 2 q"));
    let out = uvass([Path::new("validate"), &arity]);
    assert_eq!(code(&out), 3);
    assert!(!out.stderr.is_empty());

    let eps = write(&dir, "eps.vass", &COUNTER_ONE.replace("alphabet a b", "alphabet a eps"));
    assert_eq!(code(&uvass([Path::new("validate"), &eps])), 3);

    assert_eq!(code(&uvass(["validate", "/nonexistent/file.vass"])), 3);
}

#[test]
fn universal_partition_example() {
    let dir = scratch("universal");
    let f = generate(&dir, "p11.vass", &["partition", "1,1"]);
    let out = uvass([Path::new("check"), &f, Path::new("universal")]);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_eq!(r["verdict"]["answer"], "not-universal");
    assert_eq!(r["witnesses"]["word"]["text"], "01");

    let f = generate(&dir, "p12.vass", &["partition", "1,2"]);
    let out = uvass([Path::new("check"), &f, Path::new("universal")]);
    assert_eq!(code(&out), 0);
}

#[test]
fn universal_on_ambiguous_input_is_a_precondition_failure() {
    let dir = scratch("precondition");
    let f = generate(&dir, "amb.vass", &["partition-ambiguous", "1,1"]);
    assert_eq!(code(&uvass([Path::new("check"), &f, Path::new("universal")])), 2);
}

#[test]
fn unambiguous_on_deterministic_automaton() {
    let dir = scratch("unambiguous");
    let f = write(&dir, "det.vass", DETERMINISTIC);
    assert_eq!(code(&uvass([Path::new("check"), &f, Path::new("unambiguous")])), 0);

    let f = generate(&dir, "amb.vass", &["partition-ambiguous", "1,1"]);
    let out = uvass([Path::new("check"), &f, Path::new("unambiguous")]);
    assert_eq!(code(&out), 1);
}

#[test]
fn member_partition_example() {
    let dir = scratch("member");
    let f = generate(&dir, "p235.vass", &["partition", "2,3,5"]);
    assert_eq!(code(&uvass([Path::new("check"), &f, Path::new("member"), Path::new("110")])), 1);
    assert_eq!(code(&uvass([Path::new("check"), &f, Path::new("member"), Path::new("1100")])), 0);
    assert_eq!(code(&uvass([Path::new("check"), &f, Path::new("member"), Path::new("12")])), 3);
}

#[test]
fn emptiness_exit_codes() {
    let dir = scratch("empty");
    let f = write(&dir, "one.vass", COUNTER_ONE);
    let out = uvass([Path::new("check"), &f, Path::new("empty")]);
    assert_eq!(code(&out), 1);

    let dead = write(&dir, "dead.vass", &COUNTER_ONE.replace("trans q a 1 q\n", ""));
    assert_eq!(code(&uvass([Path::new("check"), &dead, Path::new("empty")])), 0);
}

#[test]
fn equivalence_with_regular() {
    let dir = scratch("equiv");
    let v = write(&dir, "det.vass", DETERMINISTIC);
    let same = write(&dir, "same.dfa", DETERMINISTIC);
    let out = uvass([Path::new("check"), &v, Path::new("equiv-regular"), &same]);
    assert_eq!(code(&out), 0);

    let other = write(&dir, "other.dfa", &DETERMINISTIC.replace("trans r b q", "trans r b r"));
    let out = uvass([Path::new("check"), &v, Path::new("equiv-regular"), &other]);
    assert_eq!(code(&out), 1);
}

#[test]
fn generate_is_deterministic() {
    let dir = scratch("generate");
    let oca = write(&dir, "a.vass", "vass 1\ndim 1\nalphabet a\nstates u w\ninitial u\nfinal\ntrans u a 1 w\n");
    let eps = write(&dir, "e.vass", "vass 1\ndim 1\nalphabet\nstates u w\ninitial u\nfinal w\ntrans u eps 0 w\n");
    let oca = oca.to_str().unwrap();
    let eps = eps.to_str().unwrap();
    let kinds: Vec<Vec<&str>> = vec![
        vec!["partition", "1,1"],
        vec!["partition-ambiguous", "2,3,5"],
        vec!["bounded-oca", oca, "--bound", "2", "--target", "w", "--m", "1"],
        vec!["unamb-variant", oca, "--bound", "2", "--target", "w", "--m", "1"],
        vec!["empty-wrap", eps, "--letter", "x"],
        vec!["random", "--states", "3", "--dim", "2", "--norm", "2", "--symbols", "2", "--density", "0.05", "--seed", "7"],
    ];
    for args in kinds {
        let first = uvass(std::iter::once("generate").chain(args.iter().copied()));
        let second = uvass(std::iter::once("generate").chain(args.iter().copied()));
        assert_eq!(code(&first), 0, "{args:?}: {}", String::from_utf8_lossy(&first.stderr));
        assert!(!first.stdout.is_empty());
        assert_eq!(first.stdout, second.stdout, "{args:?}");
        let f = write(&dir, "gen.vass", std::str::from_utf8(&first.stdout).unwrap());
        assert_eq!(code(&uvass([Path::new("validate"), &f])), 0, "{args:?}");
    }
}

#[test]
fn generate_to_file_writes_the_model() {
    let dir = scratch("generate-out");
    let target = dir.join("p.vass");
    let out = uvass([
        Path::new("generate"),
        Path::new("partition"),
        Path::new("1,1"),
        Path::new("--out"),
        &target,
    ]);
    assert_eq!(code(&out), 0);
    let stdout = uvass(["generate", "partition", "1,1"]).stdout;
    assert_eq!(fs::read(&target).unwrap(), stdout);
    assert_eq!(report(&out)["command"], "generate partition");
}

#[test]
fn generate_usage_errors() {
    assert_eq!(code(&uvass(["generate", "no-such-kind"])), 3);
    assert_eq!(code(&uvass(["generate", "partition", ""])), 3);
    assert_eq!(code(&uvass(["generate", "partition", "0,1"])), 3);
    assert_eq!(code(&uvass(["frobnicate"])), 3);
    assert_eq!(code(&uvass(["--help"])), 0);
}

#[test]
fn oracle_modes_and_cross_check() {
    let dir = scratch("oracle");
    let f = generate(&dir, "p11.vass", &["partition", "1,1"]);
    let out = uvass([Path::new("oracle"), &f, Path::new("universal"), Path::new("--max-len"), Path::new("0")]);
    assert_eq!(code(&out), 0);
    let out = uvass([Path::new("oracle"), &f, Path::new("universal"), Path::new("--max-len"), Path::new("2")]);
    assert_eq!(code(&out), 1);
    assert_eq!(report(&out)["witnesses"]["word"]["text"], "01");

    generate(&dir, "amb.vass", &["partition-ambiguous", "1,1"]);
    for mode in ["universal", "unambiguous"] {
        for file in ["p11.vass", "amb.vass"] {
            let path = dir.join(file);
            let out = uvass([Path::new("oracle"), &path, Path::new(mode), Path::new("--cross-check")]);
            assert_ne!(code(&out), 4, "{mode} {file}: {}", String::from_utf8_lossy(&out.stdout));
        }
    }
}

#[test]
fn reports_are_deterministic_except_wall_time() {
    let dir = scratch("determinism");
    let f = generate(&dir, "p11.vass", &["partition", "1,1"]);
    let strip = |mut r: Value| {
        r["statistics"].as_object_mut().unwrap().remove("wall_time_ms");
        r
    };
    let a = strip(report(&uvass([Path::new("check"), &f, Path::new("universal")])));
    let b = strip(report(&uvass([Path::new("check"), &f, Path::new("universal")])));
    assert_eq!(a, b);
    assert_eq!(a["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn bounds_report() {
    let out = uvass(["bounds", "--norm", "1", "--dim", "1", "--states", "1"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    let text = r.to_string();
    assert!(text.contains("4294967297"), "{text}");
    assert!(text.contains("1099511627776"), "{text}");

    let out = uvass(["bounds", "--norm", "1", "--dim", "3", "--states", "3"]);
    assert_eq!(code(&out), 2);
}
