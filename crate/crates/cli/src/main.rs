//! `kiru` command-line tool.
//!
//! Exit codes: 0 success, 1 gradient check failed, 2 bad configuration or
//! unreadable input, 3 training diverged (non-finite loss).

mod args;

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::Parser;
use kiru::corpus::{
    build_dictionary, read_dictionary, read_domain_corpus, read_segmented_corpus, write_dictionary,
    SegDictionary, Sentence,
};
use kiru::eval::{domain_report, evaluate};
use kiru::nn::Parameters;
use kiru::{ModelConfig, SegmenterModel};

use args::{
    config_error, Cli, Command, DictBuildArgs, EvalArgs, GradCheckArgs, InspectArgs, SegmentArgs,
    TrainArgs,
};

const THREADS_ENV: &str = "KIRU_THREADS";
const SEGMENT_BATCH: usize = 512;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match cli.command {
        Command::Train(a) => train(a),
        Command::Segment(a) => segment(a),
        Command::Eval(a) => eval(a),
        Command::DictBuild(a) => dict_build(a),
        Command::GradCheck(a) => grad_check(a),
        Command::Inspect(a) => inspect(a),
    });
    match result {
        Ok(code) => code,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kiru: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Error chain joined by `: `, skipping causes already quoted by the
/// message before them.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    let mut prev = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !prev.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
        prev = msg;
    }
    out
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<io::Error>()
            .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
    })
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<kiru::Error>() {
        Some(kiru::Error::NonFiniteLoss { .. } | kiru::Error::NonFiniteGradient { .. }) => 3,
        _ => 2,
    }
}

fn init_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        config_error(format!(
            "{THREADS_ENV} must be a positive integer, got `{value}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| anyhow!("cannot start thread pool: {e}"))
}

fn read_corpus(path: &Path) -> Result<Vec<Sentence>> {
    read_segmented_corpus(path).with_context(|| format!("cannot read corpus {}", path.display()))
}

fn load_model(path: &Path) -> Result<SegmenterModel> {
    SegmenterModel::load(path).with_context(|| format!("cannot load model {}", path.display()))
}

fn train(a: TrainArgs) -> Result<ExitCode> {
    let mut cfg = a.model.resolve(ModelConfig::default())?;
    if a.dict.is_some() || !a.dict_files.is_empty() {
        cfg.use_dict = true;
    }
    cfg.validate()?;

    let train = read_corpus(&a.train)?;
    let dev = a.dev.as_deref().map(read_corpus).transpose()?;
    let dictionary = if cfg.use_dict {
        Some(training_dictionary(&a, &cfg, &train, dev.as_deref())?)
    } else {
        None
    };
    if let Some(d) = &dictionary {
        eprintln!("dictionary: {} words", d.len());
    }

    let mut model = SegmenterModel::from_corpus(cfg, &train, dictionary)?;
    eprintln!(
        "training {} on {} sentences, {} parameters",
        model.config().arch,
        train.len(),
        model.num_params()
    );
    let log = model.train_with(&train, dev.as_deref(), |r, _| {
        match r.dev_f1 {
            Some(f) => eprintln!("epoch {:>3}  loss {:.4}  dev F1 {:.4}", r.epoch, r.loss, f),
            None => eprintln!("epoch {:>3}  loss {:.4}", r.epoch, r.loss),
        }
        true
    })?;
    model
        .save(&a.out)
        .with_context(|| format!("cannot write model {}", a.out.display()))?;

    let log_path = a.log.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".log");
        p.into()
    });
    let mut w = BufWriter::new(
        File::create(&log_path).with_context(|| format!("cannot write {}", log_path.display()))?,
    );
    writeln!(w, "epoch\tloss\tdev_f1\tclamped")?;
    for r in &log.epochs {
        let dev = r
            .dev_f1
            .map(|f| format!("{f:.6}"))
            .unwrap_or_else(|| "-".into());
        writeln!(w, "{}\t{:.6}\t{dev}\t{}", r.epoch, r.loss, r.clamped)?;
    }
    w.flush()?;
    if let Some(e) = log.kept_epoch {
        eprintln!(
            "kept parameters of epoch {e}; model written to {}",
            a.out.display()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn training_dictionary(
    a: &TrainArgs,
    cfg: &ModelConfig,
    train: &[Sentence],
    dev: Option<&[Sentence]>,
) -> Result<SegDictionary> {
    let sources = a
        .dict
        .as_deref()
        .unwrap_or(if a.dict_files.is_empty() { "train" } else { "" });
    let mut owned: Vec<Vec<Sentence>> = Vec::new();
    let mut borrowed: Vec<&[Sentence]> = Vec::new();
    for src in sources.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match src {
            "train" => borrowed.push(train),
            "dev" => borrowed.push(dev.ok_or_else(|| config_error("--dict dev needs --dev"))?),
            "test" => {
                let path = a
                    .test
                    .as_ref()
                    .ok_or_else(|| config_error("--dict test needs --test"))?;
                owned.push(read_corpus(path)?);
            }
            path => owned.push(read_corpus(Path::new(path))?),
        }
    }
    borrowed.extend(owned.iter().map(Vec::as_slice));
    let mut words: Vec<String> = build_dictionary(&borrowed, a.prune_singletons, cfg.dict_max_len)?
        .words()
        .map(String::from)
        .collect();
    for path in &a.dict_files {
        let d = read_dictionary(path, cfg.dict_max_len)
            .with_context(|| format!("cannot read dictionary {}", path.display()))?;
        words.extend(d.words().map(String::from));
    }
    Ok(SegDictionary::new(words, cfg.dict_max_len))
}

fn segment(a: SegmentArgs) -> Result<ExitCode> {
    let model = load_model(&a.model)?;
    let reader: Box<dyn BufRead> = match &a.input {
        Some(p) => Box::new(BufReader::new(
            File::open(p).with_context(|| format!("cannot open {}", p.display()))?,
        )),
        None => Box::new(io::stdin().lock()),
    };
    let mut out = BufWriter::new(io::stdout().lock());
    let mut batch = Vec::with_capacity(SEGMENT_BATCH);
    let flush = |batch: &mut Vec<String>, out: &mut BufWriter<_>| -> Result<()> {
        for line in model.segment_lines(batch)? {
            writeln!(out, "{line}")?;
        }
        batch.clear();
        Ok(())
    };
    for (i, line) in reader.lines().enumerate() {
        let mut line = line.with_context(|| format!("input line {}", i + 1))?;
        if line.ends_with('\r') {
            line.pop();
        }
        batch.push(line);
        if batch.len() == SEGMENT_BATCH {
            flush(&mut batch, &mut out)?;
        }
    }
    flush(&mut batch, &mut out)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

/// Gold sentences tagged with their domain: file stems inside a directory,
/// or the stem of a single file.
fn read_gold(path: &Path) -> Result<Vec<Sentence>> {
    if path.is_dir() {
        return read_domain_corpus(path)
            .with_context(|| format!("cannot read corpus directory {}", path.display()));
    }
    let domain = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(read_corpus(path)?
        .into_iter()
        .map(|s| s.with_domain(domain.clone()))
        .collect())
}

fn eval(a: EvalArgs) -> Result<ExitCode> {
    let gold = read_gold(&a.gold)?;
    let pred = match (&a.model, &a.pred) {
        (Some(m), _) => {
            let model = load_model(m)?;
            let lines: Vec<String> = gold.iter().map(Sentence::text).collect();
            model
                .segment_lines(&lines)?
                .iter()
                .map(|l| kiru::corpus::parse_segmented_line(l, 0))
                .collect::<kiru::Result<Vec<_>>>()?
        }
        (None, Some(p)) => read_gold(p)?,
        (None, None) => unreachable!("clap requires --model or --pred"),
    };
    let report = if a.by_domain {
        domain_report(&gold, &pred)?
    } else {
        evaluate(&gold, &pred)?
    };
    let mut out = io::stdout().lock();
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report.to_json())?)?;
    } else {
        if a.by_domain {
            write!(out, "{}", report.to_table())?;
            writeln!(out)?;
        }
        write!(out, "{}", report.to_key_values())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn dict_build(a: DictBuildArgs) -> Result<ExitCode> {
    let corpora = a
        .corpora
        .iter()
        .map(|p| read_corpus(p))
        .collect::<Result<Vec<_>>>()?;
    let slices: Vec<&[Sentence]> = corpora.iter().map(Vec::as_slice).collect();
    let dict = build_dictionary(&slices, a.prune_singletons, kiru::corpus::DEFAULT_MAX_LEN)?;
    write_dictionary(&a.out, &dict).with_context(|| format!("cannot write {}", a.out.display()))?;
    eprintln!("{} words written to {}", dict.len(), a.out.display());
    Ok(ExitCode::SUCCESS)
}

/// Defaults for gradient checks: the architecture and features of the
/// reference configuration, with dimensions small enough to check every weight.
fn tiny_config() -> ModelConfig {
    ModelConfig {
        char_dim: 4,
        ctype_dim: 2,
        hidden: 5,
        ..ModelConfig::default()
    }
}

fn grad_check(a: GradCheckArgs) -> Result<ExitCode> {
    let mut cfg = a.model.resolve(tiny_config())?;
    cfg.use_dict |= a.dict;
    let sentence = kiru::corpus::parse_segmented_line(&a.sentence, 1)?;
    let corpus = [sentence.clone()];
    let dict = cfg
        .use_dict
        .then(|| SegDictionary::new(sentence.words().unwrap_or_default(), cfg.dict_max_len));
    let model = SegmenterModel::from_corpus(cfg, &corpus, dict)?;
    let report = model.grad_check(&sentence, a.eps, a.tol)?;
    let mut out = io::stdout().lock();
    writeln!(out, "parameters={}", report.checked)?;
    writeln!(out, "max_rel_error={:.3e}", report.max_rel_error)?;
    writeln!(out, "tolerance={:.3e}", report.tolerance)?;
    if let Some(w) = &report.worst {
        writeln!(
            out,
            "worst={}[{}] analytic={:.6e} numeric={:.6e}",
            w.param, w.index, w.analytic, w.numeric
        )?;
    }
    writeln!(out, "failures={}", report.failures.len())?;
    if report.passed() {
        writeln!(out, "result=pass")?;
        Ok(ExitCode::SUCCESS)
    } else {
        writeln!(out, "result=fail")?;
        Ok(ExitCode::from(1))
    }
}

fn inspect(a: InspectArgs) -> Result<ExitCode> {
    let model = load_model(&a.model)?;
    let cfg = model.config();
    let vocab = model.vocabulary();
    let tensors: Vec<(String, (usize, usize))> = model
        .network()
        .tensors()
        .into_iter()
        .map(|(n, t)| (n, t.shape()))
        .collect();
    let vocab_sizes: Vec<(String, usize)> = kiru::corpus::Stream::ALL
        .iter()
        .flat_map(|&s| {
            (1..=3).map(move |n| {
                (
                    format!("{s:?}.{n}").to_lowercase(),
                    vocab.table(s, n).size(),
                )
            })
        })
        .collect();
    let mut out = io::stdout().lock();
    if a.json {
        let doc = serde_json::json!({
            "format_version": kiru::model::FORMAT_VERSION,
            "config": cfg,
            "parameters": model.num_params(),
            "vocab_sizes": vocab_sizes.iter().cloned().collect::<std::collections::BTreeMap<_, _>>(),
            "dictionary_words": model.dictionary().map(|d| d.len()),
            "tensors": tensors.iter().map(|(n, (r, c))| serde_json::json!({"name": n, "rows": r, "cols": c})).collect::<Vec<_>>(),
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        return Ok(ExitCode::SUCCESS);
    }
    writeln!(out, "format_version={}", kiru::model::FORMAT_VERSION)?;
    write!(out, "{}", toml::to_string(cfg)?)?;
    writeln!(out, "parameters={}", model.num_params())?;
    for (name, size) in &vocab_sizes {
        writeln!(out, "vocab.{name}={size}")?;
    }
    if let Some(d) = model.dictionary() {
        writeln!(out, "dictionary_words={}", d.len())?;
    }
    for (name, (r, c)) in &tensors {
        writeln!(out, "tensor.{name}={r}x{c}")?;
    }
    Ok(ExitCode::SUCCESS)
}
