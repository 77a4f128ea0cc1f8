use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use embias::report::Report;
use embias::weat::{WeatResult, WordSets};
use embias::wordlists::{self, ListId};

fn embias() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_embias"));
    c.env("RUST_LOG", "warn");
    c
}

fn run(args: &[&str]) -> Output {
    embias().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_vectors(path: &Path, seed: u64) {
    let mut words: Vec<&String> = ListId::ALL.iter().flat_map(|id| wordlists::builtin(*id)).collect();
    words.sort();
    words.dedup();
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut text = String::new();
    for w in words {
        text.push_str(w);
        for _ in 0..8 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let v = ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0;
            text.push_str(&format!(" {v:.6}"));
        }
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}

fn corpus(path: &Path) {
    let groups: [(&[&str], &[&str]); 3] = [
        (&["king", "queen"], &["crown", "throne", "palace", "court"]),
        (&["rock", "pebble"], &["gravel", "quarry", "granite", "sand"]),
        (&["banjo", "fiddle"], &["song", "tune", "melody", "string"]),
    ];
    let mut text = String::new();
    for i in 0..60 {
        let (targets, ctx) = groups[i % 3];
        let t = targets[i / 3 % 2];
        let words: Vec<&str> = (0..8).map(|k| ctx[(i + k * 3) % ctx.len()]).collect();
        text.push_str(&format!("{} {t} {}\n", words[..4].join(" "), words[4..].join(" ")));
    }
    fs::write(path, text).unwrap();
}

#[test]
fn vocab_on_three_words_writes_three_lines() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tiny.txt");
    fs::write(&input, "apple banana cherry\nbanana cherry\ncherry\n").unwrap();
    let out = dir.path().join("v.tsv");
    ok(&["vocab", "--in", p(&input), "--min-count", "1", "--out", p(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().collect::<Vec<_>>(), ["cherry\t3", "banana\t2", "apple\t1"]);
}

#[test]
fn usage_errors_exit_one() {
    for args in [&["vocab", "--bogus"][..], &["frobnicate"], &[]] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("Usage"), "{args:?}: {err}");
        assert!(out.stdout.is_empty());
    }
    let out = run(&["cooccur", "--window", "0", "--in", "x", "--vocab", "y", "--out", "z"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid value '0'"));
}

#[test]
fn help_and_version_exit_zero() {
    for args in [&["--help"][..], &["--version"], &["audit", "--help"]] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.txt");
    let out = run(&["vocab", "--in", p(&missing), "--out", p(&dir.path().join("v.tsv"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.txt"));

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "not a vector file\n").unwrap();
    let out = run(&["validate", "--vectors", p(&bad)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_values_apply_unless_flag_given() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("c.txt");
    fs::write(&input, "a a a b b c\n").unwrap();
    let cfg = dir.path().join("run.cfg");
    let from_cfg = dir.path().join("cfg.tsv");
    fs::write(&cfg, format!("# shared\nmin_count = 2\nout = {}\ndim = 50\n", p(&from_cfg))).unwrap();

    ok(&["vocab", "--config", p(&cfg), "--in", p(&input)]);
    assert_eq!(fs::read_to_string(&from_cfg).unwrap(), "a\t3\nb\t2\n");

    let from_flag = dir.path().join("flag.tsv");
    ok(&["--config", p(&cfg), "vocab", "--in", p(&input), "--min-count=3", "--out", p(&from_flag)]);
    assert_eq!(fs::read_to_string(&from_flag).unwrap(), "a\t3\n");

    fs::write(&cfg, "min_count: 2\n").unwrap();
    assert_eq!(run(&["vocab", "--config", p(&cfg), "--in", p(&input)]).status.code(), Some(1));
    let absent = dir.path().join("absent.cfg");
    assert_eq!(run(&["vocab", "--config", p(&absent), "--in", p(&input)]).status.code(), Some(1));
}

#[test]
fn stages_resume_from_artifacts_with_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("corpus.txt");
    corpus(&input);
    let mut outputs: Vec<Vec<Vec<u8>>> = Vec::new();
    for round in 0..2 {
        let f = |name: &str| dir.path().join(format!("{round}-{name}"));
        ok(&["vocab", "--in", p(&input), "--min-count", "1", "--out", p(&f("vocab.tsv"))]);
        ok(&["cooccur", "--in", p(&input), "--vocab", p(&f("vocab.tsv")), "--threads", "3", "--out", p(&f("m.bin"))]);
        ok(&[
            "train", "--cooccur", p(&f("m.bin")), "--vocab", p(&f("vocab.tsv")), "--dim", "8", "--epochs", "20",
            "--deterministic", "--out", p(&f("vectors.txt")),
        ]);
        let sets = f("sets.json");
        fs::write(&sets, r#"{"name": "royal-stone", "X": ["king", "queen"], "Y": ["rock", "pebble"], "A": ["crown", "throne"], "B": ["gravel", "quarry"]}"#).unwrap();
        ok(&["weat", "--vectors", p(&f("vectors.txt")), "--sets", p(&sets), "--out", p(&f("result.json"))]);
        outputs.push(
            ["vocab.tsv", "m.bin", "vectors.txt", "result.json"]
                .iter()
                .map(|n| fs::read(f(n)).unwrap())
                .collect(),
        );
    }
    assert_eq!(outputs[0], outputs[1]);
    let r = WeatResult::from_json(std::str::from_utf8(&outputs[0][3]).unwrap()).unwrap();
    assert!(r.statistic > 0.0, "{}", r.statistic);
}

fn json_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    files
}

#[test]
fn audit_writes_five_results_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let vectors = dir.path().join("vectors.txt");
    write_vectors(&vectors, 3);
    let results = dir.path().join("results");
    let out = ok(&["audit", "--vectors", p(&vectors), "--shuffles", "5000", "--seed", "42", "--out-dir", p(&results)]);
    let files = json_files(&results);
    assert_eq!(files.len(), 5);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 6);
    let parsed: Vec<WeatResult> = files.iter().map(|f| WeatResult::from_json(&fs::read_to_string(f).unwrap()).unwrap()).collect();
    assert_eq!(parsed[0].name, wordlists::validation_sets().name);
    assert!(parsed.iter().all(|r| r.seed == 42));

    let md = dir.path().join("audit.md");
    let mut args = vec!["report", "--out", p(&md), "--meta", "corpus=synthetic", "--in"];
    args.extend(files.iter().map(|f| p(f)));
    ok(&args);
    let json = fs::read_to_string(md.with_extension("json")).unwrap();
    let report = Report::from_json(&json).unwrap();
    assert_eq!(report.comparisons.len(), 5);
    assert_eq!(report.metadata["corpus"], "synthetic");
    let first_md = fs::read_to_string(&md).unwrap();
    ok(&args);
    assert_eq!(fs::read_to_string(md.with_extension("json")).unwrap(), json);
    assert_eq!(fs::read_to_string(&md).unwrap(), first_md);
}

#[test]
fn exported_lists_drive_weat() {
    let dir = tempfile::tempdir().unwrap();
    let lists = dir.path().join("lists.json");
    ok(&["lists", "export", "--out", p(&lists)]);
    let sets = WordSets::load(&lists).unwrap();
    assert_eq!(sets, wordlists::all_sets());

    let vectors = dir.path().join("vectors.txt");
    write_vectors(&vectors, 4);
    let out_dir = dir.path().join("out");
    ok(&["weat", "--vectors", p(&vectors), "--sets", p(&lists), "--shuffles", "200", "--out-dir", p(&out_dir)]);
    assert_eq!(json_files(&out_dir).len(), sets.len());

    let shown = ok(&["lists", "show", "flowers"]);
    let words: Vec<String> = String::from_utf8(shown.stdout).unwrap().lines().map(String::from).collect();
    assert_eq!(words, wordlists::builtin(ListId::Flowers));
    assert_eq!(run(&["lists", "show", "nope"]).status.code(), Some(2));
}

#[test]
fn chisq_reports_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.csv");
    fs::write(&table, "group,positive,negative\nmale,10,20\nfemale,20,10\n").unwrap();
    let out = ok(&["stats", "chisq", "--table", p(&table)]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["chi_square"]["statistic"].as_f64().unwrap() - 20.0 / 3.0).abs() < 1e-12);
    assert_eq!(v["chi_square"]["df"], 1);
    assert_eq!(v["rows"], serde_json::json!(["male", "female"]));
}

#[test]
fn thread_default_follows_environment() {
    let out = embias().env("EMBIAS_THREADS", "3").args(["train", "--help"]).output().unwrap();
    let help = String::from_utf8(out.stdout).unwrap();
    assert!(help.contains("[default: 3]"), "{help}");
}
