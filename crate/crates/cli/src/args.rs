use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use kiru::corpus::LabelScheme;
use kiru::{Arch, ModelConfig};

#[derive(Parser, Debug)]
#[command(
    name = "kiru",
    version,
    about = "Character-based neural word segmenter"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train a model on a segmented corpus.
    Train(TrainArgs),
    /// Segment raw text, one sentence per line.
    Segment(SegmentArgs),
    /// Score a model (or a file of predictions) against a gold corpus.
    Eval(EvalArgs),
    /// Build a dictionary word list from segmented corpora.
    DictBuild(DictBuildArgs),
    /// Check analytic gradients of a small model against finite differences.
    GradCheck(GradCheckArgs),
    /// Print the configuration and shapes stored in a model file.
    Inspect(InspectArgs),
}

/// Hyperparameter flags. Each one overrides the configuration file.
#[derive(Args, Debug, Default, Clone)]
pub struct ModelFlags {
    /// Configuration file (TOML) with ModelConfig fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_arch)]
    pub arch: Option<Arch>,
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: Option<LabelScheme>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub char_dim: Option<usize>,
    #[arg(long)]
    pub ctype_dim: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    /// AdaGrad learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// L2 regularisation coefficient.
    #[arg(long)]
    pub l2: Option<f64>,
    /// Sentences per mini-batch.
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Minimum n-gram count for the vocabulary.
    #[arg(long)]
    pub min_count: Option<usize>,
    /// Enable character-type embeddings.
    #[arg(long)]
    pub ctype: bool,
    /// Comma-separated n-gram orders, e.g. `1,2,3`.
    #[arg(long, value_name = "LIST")]
    pub ngram: Option<String>,
    /// Length at which dictionary matches are clipped.
    #[arg(long)]
    pub dict_max_len: Option<usize>,
}

impl ModelFlags {
    pub fn resolve(&self, base: ModelConfig) -> Result<ModelConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read config file {}", path.display()))?;
                toml::from_str(&text)
                    .map_err(|e| config_error(format!("{}: {e}", path.display())))?
            }
            None => base,
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag.clone() { cfg.$field = v; })*
            };
        }
        set!(arch => arch, scheme => scheme, window => window, char_dim => char_dim,
             ctype_dim => ctype_dim, hidden => hidden, lr => learning_rate, l2 => l2,
             batch => batch_size, epochs => epochs, seed => seed, min_count => min_count,
             dict_max_len => dict_max_len);
        if self.ctype {
            cfg.use_ctype = true;
        }
        if let Some(list) = &self.ngram {
            cfg.ngram_orders = parse_orders(list)?;
        }
        Ok(cfg)
    }
}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    kiru::Error::Config(msg.into()).into()
}

fn parse_arch(s: &str) -> Result<Arch, String> {
    s.parse().map_err(|e: kiru::Error| e.to_string())
}

fn parse_scheme(s: &str) -> Result<LabelScheme, String> {
    s.parse().map_err(|e: kiru::Error| e.to_string())
}

fn parse_orders(list: &str) -> Result<Vec<usize>> {
    let orders = list
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| config_error(format!("bad n-gram list `{list}`")))?;
    if orders.is_empty() {
        bail!(config_error("empty n-gram list"));
    }
    Ok(orders)
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    /// Segmented training corpus.
    #[arg(long)]
    pub train: PathBuf,
    /// Segmented development corpus; enables best-epoch selection.
    #[arg(long)]
    pub dev: Option<PathBuf>,
    /// Segmented test corpus, only read when `--dict` names `test`.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Comma-separated dictionary sources: `train`, `dev`, `test` or corpus paths.
    /// Giving this flag enables dictionary features.
    #[arg(long, value_name = "SOURCES")]
    pub dict: Option<String>,
    /// Word-list dictionary files (one word per line); enables dictionary features.
    #[arg(long = "dict-file", value_name = "PATH")]
    pub dict_files: Vec<PathBuf>,
    /// Drop words seen only once in the dictionary sources.
    #[arg(long)]
    pub prune_singletons: bool,
    /// Output model path.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Epoch log path (defaults to the model path with `.log` appended).
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SegmentArgs {
    #[arg(long, short)]
    pub model: PathBuf,
    /// Raw text file; reads standard input when omitted.
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Model whose segmentation is scored.
    #[arg(long, short, required_unless_present = "pred", conflicts_with = "pred")]
    pub model: Option<PathBuf>,
    /// Already segmented predictions, aligned line by line with the gold corpus.
    #[arg(long)]
    pub pred: Option<PathBuf>,
    /// Gold corpus: a file, or a directory with one file per domain.
    #[arg(long)]
    pub gold: PathBuf,
    /// Print a per-domain table.
    #[arg(long)]
    pub by_domain: bool,
    /// Emit JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct DictBuildArgs {
    /// Segmented corpora whose word types form the dictionary.
    #[arg(required = true)]
    pub corpora: Vec<PathBuf>,
    #[arg(long)]
    pub prune_singletons: bool,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct GradCheckArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    /// Enable dictionary features, with the words of the probe sentence as dictionary.
    #[arg(long)]
    pub dict: bool,
    /// Segmented probe sentence.
    #[arg(long, default_value = "ため 池")]
    pub sentence: String,
    /// Finite-difference step.
    #[arg(long, default_value_t = kiru::nn::GRAD_EPS)]
    pub eps: f64,
    /// Largest acceptable relative error.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct InspectArgs {
    pub model: PathBuf,
    #[arg(long)]
    pub json: bool,
}
