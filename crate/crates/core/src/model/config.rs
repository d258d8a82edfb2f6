use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{LabelScheme, DEFAULT_MAX_LEN, MAX_CUTOFF};
use crate::error::{Error, Result};
use crate::features::{DICT_WIDTH, MAX_ORDER};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    Ffnn,
    Rnn,
    #[default]
    Lstm,
}

impl Arch {
    pub const ALL: [Arch; 3] = [Arch::Ffnn, Arch::Rnn, Arch::Lstm];
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arch::Ffnn => "ffnn",
            Arch::Rnn => "rnn",
            Arch::Lstm => "lstm",
        })
    }
}

impl FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ffnn" => Ok(Arch::Ffnn),
            "rnn" => Ok(Arch::Rnn),
            "lstm" => Ok(Arch::Lstm),
            other => Err(Error::Config(format!("unknown architecture `{other}`"))),
        }
    }
}

/// Architecture, feature selection and training hyperparameters.
///
/// The defaults are the reference setting: window 5, 100-dimensional
/// character embeddings, 10-dimensional character-type embeddings, 150
/// hidden units, BIES labels, learning rate 0.1 and L2 coefficient 1e-4.
/// Features default to plain character unigrams.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub arch: Arch,
    pub use_ctype: bool,
    pub ngram_orders: Vec<usize>,
    pub use_dict: bool,
    pub dict_max_len: usize,
    pub window: usize,
    pub char_dim: usize,
    pub ctype_dim: usize,
    pub hidden: usize,
    pub scheme: LabelScheme,
    pub learning_rate: f64,
    pub l2: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub min_count: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            arch: Arch::Lstm,
            use_ctype: false,
            ngram_orders: vec![1],
            use_dict: false,
            dict_max_len: DEFAULT_MAX_LEN,
            window: 5,
            char_dim: 100,
            ctype_dim: 10,
            hidden: 150,
            scheme: LabelScheme::Bies,
            learning_rate: 0.1,
            l2: 1e-4,
            batch_size: 16,
            epochs: 20,
            seed: 1,
            min_count: 1,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.window == 0 || self.window.is_multiple_of(2) {
            return err(format!(
                "window must be a positive odd number, got {}",
                self.window
            ));
        }
        if self.ngram_orders.is_empty() {
            return err("at least one n-gram order is required".into());
        }
        let mut seen = [false; MAX_ORDER + 1];
        for &n in &self.ngram_orders {
            if !(1..=MAX_ORDER).contains(&n) {
                return err(format!("n-gram order {n} outside 1..={MAX_ORDER}"));
            }
            if seen[n] {
                return err(format!("n-gram order {n} listed twice"));
            }
            seen[n] = true;
        }
        for (name, v) in [
            ("char_dim", self.char_dim),
            ("hidden", self.hidden),
            ("batch_size", self.batch_size),
            ("min_count", self.min_count),
        ] {
            if v == 0 {
                return err(format!("{name} must be positive"));
            }
        }
        if self.use_ctype && self.ctype_dim == 0 {
            return err("ctype_dim must be positive when character types are used".into());
        }
        if !(1..=MAX_CUTOFF).contains(&self.dict_max_len) {
            return err(format!("dict_max_len must be in 1..={MAX_CUTOFF}"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return err(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return err(format!(
                "L2 coefficient must be non-negative, got {}",
                self.l2
            ));
        }
        Ok(())
    }

    /// Enabled orders in ascending order.
    pub fn orders(&self) -> Vec<usize> {
        let mut o = self.ngram_orders.clone();
        o.sort_unstable();
        o
    }

    /// Width of the concatenated window embedding `x_t`.
    pub fn input_width(&self) -> usize {
        let per_order = self.char_dim + if self.use_ctype { self.ctype_dim } else { 0 };
        self.window * self.ngram_orders.len() * per_order
    }

    pub fn dict_width(&self) -> usize {
        if self.use_dict {
            DICT_WIDTH
        } else {
            0
        }
    }

    /// Input width of the output layer: hidden units plus dictionary features.
    pub fn output_input_width(&self) -> usize {
        self.hidden + self.dict_width()
    }

    pub fn num_labels(&self) -> usize {
        self.scheme.size()
    }
}
