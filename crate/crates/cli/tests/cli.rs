use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

const TRAIN: &str = "ため 池 の 水\n水 を ため る\n池 に 行く\n日本 の 池\n";

fn kiru(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_kiru"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn setup() -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.txt");
    fs::write(&train, TRAIN).unwrap();
    (dir, train)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn train_small(dir: &Path, train: &Path, extra: &[&str]) -> (PathBuf, Output) {
    let model = dir.join("m.kiru");
    let mut args = vec![
        "train",
        "--train",
        p(train),
        "--out",
        p(&model),
        "--char-dim",
        "6",
        "--hidden",
        "6",
        "--epochs",
        "2",
    ];
    args.extend_from_slice(extra);
    let out = kiru(&args, "");
    (model, out)
}

#[test]
fn train_writes_model_and_log() {
    let (dir, train) = setup();
    let (model, out) = train_small(
        dir.path(),
        &train,
        &["--ctype", "--ngram", "1,2,3", "--dict", "train"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(model.exists());
    let log = fs::read_to_string(dir.path().join("m.kiru.log")).unwrap();
    assert_eq!(log.lines().count(), 3);
    assert!(out.stdout.is_empty(), "diagnostics belong on stderr");
}

#[test]
fn train_with_config_file_and_dev() {
    let (dir, train) = setup();
    let cfg = dir.path().join("cfg.toml");
    fs::write(
        &cfg,
        "arch = \"ffnn\"\nchar_dim = 4\nhidden = 4\nepochs = 3\nscheme = \"bi\"\n",
    )
    .unwrap();
    let model = dir.path().join("f.kiru");
    let out = kiru(
        &[
            "train",
            "--config",
            p(&cfg),
            "--train",
            p(&train),
            "--dev",
            p(&train),
            "--out",
            p(&model),
            "--epochs",
            "2",
        ],
        "",
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let info = stdout(&kiru(&["inspect", p(&model)], ""));
    assert!(info.contains("arch = \"ffnn\""));
    assert!(info.contains("scheme = \"bi\""));
    assert!(info.contains("epochs = 2"), "flags override the file");
}

#[test]
fn gold_dictionary_needs_test_corpus() {
    let (dir, train) = setup();
    let (_, out) = train_small(dir.path(), &train, &["--dict", "train,test"]);
    assert_eq!(out.status.code(), Some(2));
    let (_, out) = train_small(
        dir.path(),
        &train,
        &["--dict", "train,test", "--test", p(&train)],
    );
    assert!(out.status.success());
}

#[test]
fn bad_configuration_exits_2() {
    let (dir, train) = setup();
    let (_, out) = train_small(dir.path(), &train, &["--window", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "unknown_key = 3\n").unwrap();
    let (_, out) = train_small(dir.path(), &train, &["--config", p(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    let (_, out) = train_small(dir.path(), &train, &["--ngram", "1,x"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn divergence_exits_3() {
    let (dir, train) = setup();
    let model = dir.path().join("d.kiru");
    let out = kiru(
        &[
            "train",
            "--train",
            p(&train),
            "--out",
            p(&model),
            "--char-dim",
            "4",
            "--hidden",
            "4",
            "--epochs",
            "5",
            "--lr",
            "1e38",
        ],
        "",
    );
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn segment_behaviour() {
    let (dir, train) = setup();
    let (model, _) = train_small(dir.path(), &train, &[]);
    let m = p(&model);

    let empty = kiru(&["segment", "-m", m], "");
    assert!(empty.status.success());
    assert!(empty.stdout.is_empty());

    let text = "ため池の水\n\n日本の池に行く\n";
    let a = kiru(&["segment", "-m", m], text);
    let b = kiru(&["segment", "-m", m], text);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).replace(' ', ""), text);

    let file = dir.path().join("raw.txt");
    fs::write(&file, text).unwrap();
    assert_eq!(kiru(&["segment", "-m", m, p(&file)], "").stdout, a.stdout);
}

#[test]
fn missing_model_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = kiru(&["segment", "-m", p(&dir.path().join("nope.kiru"))], "x\n");
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn eval_against_itself_is_perfect() {
    let (_dir, train) = setup();
    let out = kiru(&["eval", "--pred", p(&train), "--gold", p(&train)], "");
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("domain=All precision=1.000000 recall=1.000000 f1=1.000000"));
    assert!(text.contains("incorrect=0"));
}

#[test]
fn eval_by_domain() {
    let (dir, _) = setup();
    let gold = dir.path().join("gold");
    let pred = dir.path().join("pred");
    fs::create_dir_all(&gold).unwrap();
    fs::create_dir_all(&pred).unwrap();
    fs::write(gold.join("blog.txt"), "ため 池\n水 を\n").unwrap();
    fs::write(gold.join("news.txt"), "日本 の 池\n").unwrap();
    fs::write(pred.join("blog.txt"), "ため池\n水 を\n").unwrap();
    fs::write(pred.join("news.txt"), "日本 の 池\n").unwrap();
    let out = kiru(
        &[
            "eval",
            "--pred",
            p(&pred),
            "--gold",
            p(&gold),
            "--by-domain",
        ],
        "",
    );
    assert!(out.status.success());
    let text = stdout(&out);
    let table: Vec<&str> = text.lines().take(4).collect();
    assert!(
        table[1].starts_with("blog") && table[2].starts_with("news") && table[3].starts_with("All")
    );
    assert!(text.contains("domain=blog") && text.contains("domain=All"));
    assert!(text.contains("sentences=3 incorrect=1"));

    let json = kiru(
        &[
            "eval",
            "--pred",
            p(&pred),
            "--gold",
            p(&gold),
            "--by-domain",
            "--json",
        ],
        "",
    );
    let doc: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(doc["domains"].as_array().unwrap().len(), 2);
    assert_eq!(doc["all"]["incorrect"], 1);
}

#[test]
fn eval_with_model_exits_0_regardless_of_score() {
    let (dir, train) = setup();
    let (model, _) = train_small(dir.path(), &train, &[]);
    let out = kiru(&["eval", "-m", p(&model), "--gold", p(&train)], "");
    assert!(out.status.success());
    assert!(stdout(&out).contains("domain=All"));
}

#[test]
fn unreadable_corpus_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.txt");
    let out = kiru(&["eval", "--pred", p(&missing), "--gold", p(&missing)], "");
    assert_eq!(out.status.code(), Some(2));
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, b"ok line\n\xff\xfe\n").unwrap();
    let out = kiru(&["eval", "--pred", p(&bad), "--gold", p(&bad)], "");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn grad_check_exit_codes() {
    let ok = kiru(&["grad-check", "--arch", "ffnn"], "");
    assert!(ok.status.success(), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("result=pass"));

    let full = kiru(
        &[
            "grad-check",
            "--arch",
            "lstm",
            "--ctype",
            "--ngram",
            "1,2,3",
            "--dict",
        ],
        "",
    );
    assert!(full.status.success(), "{}", stdout(&full));

    let fail = kiru(&["grad-check", "--arch", "rnn", "--tol", "0"], "");
    assert_eq!(fail.status.code(), Some(1));
    assert!(stdout(&fail).contains("result=fail"));

    let zero = kiru(&["grad-check", "--eps", "0"], "");
    assert_eq!(zero.status.code(), Some(2));
}

#[test]
fn dict_build_writes_word_list() {
    let (dir, train) = setup();
    let out_path = dir.path().join("dict.txt");
    let out = kiru(
        &[
            "dict-build",
            p(&train),
            "--prune-singletons",
            "--out",
            p(&out_path),
        ],
        "",
    );
    assert!(out.status.success());
    let words: Vec<String> = fs::read_to_string(&out_path)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    assert_eq!(words, vec!["ため", "の", "水", "池"]);

    let model = dir.path().join("d.kiru");
    let out = kiru(
        &[
            "train",
            "--train",
            p(&train),
            "--out",
            p(&model),
            "--dict-file",
            p(&out_path),
            "--char-dim",
            "4",
            "--hidden",
            "4",
            "--epochs",
            "1",
        ],
        "",
    );
    assert!(out.status.success());
    assert!(stdout(&kiru(&["inspect", p(&model)], "")).contains("dictionary_words=4"));
}

#[test]
fn thread_cap_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_kiru"))
        .args(["grad-check", "--arch", "ffnn"])
        .env("KIRU_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_kiru"))
        .args(["grad-check", "--arch", "ffnn"])
        .env("KIRU_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
}
