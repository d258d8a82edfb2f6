//! Segmenter models: assembly of the network variants, training and
//! persistence.

mod config;
mod io;
mod network;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use config::{Arch, ModelConfig};
pub use io::{FORMAT_VERSION, MAGIC};
pub use network::{Layout, Network, Recurrent, SentenceInputs, INIT_BOUND};

use crate::corpus::{encode_labels, LabelSequence, SegDictionary, Sentence, Vocabulary};
use crate::error::{Error, Result};
use crate::eval::PrfCounts;
use crate::features::{sentence_dictionary_vectors, sentence_ngram_ids};
use crate::nn::{
    adagrad_update, grad_check, l2_penalty, AdaGradState, GradCheckReport, Parameters,
};

/// Sentence-level gradients of the training objective.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub grads: Network<f32>,
    /// Summed cross-entropy plus `(λ/2)‖θ‖²`.
    pub loss: f64,
    pub clamped: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub dev_f1: Option<f64>,
    pub clamped: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept (best development F1, or the last epoch).
    pub kept_epoch: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct SegmenterModel {
    config: ModelConfig,
    vocab: Vocabulary,
    dictionary: Option<SegDictionary>,
    network: Network<f32>,
    optimizer: AdaGradState<f32>,
}

impl SegmenterModel {
    /// Freshly initialised model. A dictionary is required when
    /// `config.use_dict` is set and ignored otherwise.
    pub fn new(
        config: ModelConfig,
        vocab: Vocabulary,
        dictionary: Option<SegDictionary>,
    ) -> Result<Self> {
        config.validate()?;
        vocab.check()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let network = Network::init(Layout::from_config(&config), &vocab, &mut rng);
        Self::from_parts(config, vocab, dictionary, network)
    }

    /// Builds the vocabulary from `corpus` and initialises a model.
    pub fn from_corpus(
        config: ModelConfig,
        corpus: &[Sentence],
        dictionary: Option<SegDictionary>,
    ) -> Result<Self> {
        let vocab = Vocabulary::build(corpus, config.min_count)?;
        Self::new(config, vocab, dictionary)
    }

    pub fn from_parts(
        config: ModelConfig,
        vocab: Vocabulary,
        dictionary: Option<SegDictionary>,
        network: Network<f32>,
    ) -> Result<Self> {
        config.validate()?;
        vocab.check()?;
        let dictionary = match (config.use_dict, dictionary) {
            (true, None) => {
                return Err(Error::Config(
                    "dictionary features enabled but no dictionary given".into(),
                ))
            }
            (true, Some(d)) => Some(d),
            (false, _) => None,
        };
        if *network.layout() != Layout::from_config(&config) {
            return Err(Error::Config(
                "network layout does not match the configuration".into(),
            ));
        }
        network.check_shapes(&vocab)?;
        let optimizer = AdaGradState::new(config.learning_rate);
        Ok(Self {
            config,
            vocab,
            dictionary,
            network,
            optimizer,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dictionary(&self) -> Option<&SegDictionary> {
        self.dictionary.as_ref()
    }

    pub fn network(&self) -> &Network<f32> {
        &self.network
    }

    pub fn network_mut(&mut self) -> &mut Network<f32> {
        &mut self.network
    }

    pub fn optimizer(&self) -> &AdaGradState<f32> {
        &self.optimizer
    }

    pub fn num_params(&self) -> usize {
        self.network.num_params()
    }

    pub fn inputs(&self, chars: &[char]) -> SentenceInputs {
        SentenceInputs {
            ngrams: sentence_ngram_ids(chars, &self.vocab),
            dict: match &self.dictionary {
                Some(d) => sentence_dictionary_vectors(chars, d),
                None => Vec::new(),
            },
        }
    }

    /// Label distributions `y_t` for every character of `sentence`.
    pub fn forward(&self, sentence: &Sentence) -> Result<Vec<Vec<f32>>> {
        self.forward_chars(&sentence.chars)
    }

    pub fn forward_chars(&self, chars: &[char]) -> Result<Vec<Vec<f32>>> {
        if chars.is_empty() {
            return Err(Error::Precondition(
                "cannot run the model on an empty sentence".into(),
            ));
        }
        self.network.forward(&self.inputs(chars))
    }

    fn gold_indices(&self, sentence: &Sentence, gold: &LabelSequence) -> Result<Vec<usize>> {
        if gold.scheme() != self.config.scheme {
            return Err(Error::Precondition(format!(
                "labels use the {} scheme but the model predicts {}",
                gold.scheme(),
                self.config.scheme
            )));
        }
        if gold.len() != sentence.len() {
            return Err(Error::LengthMismatch(format!(
                "{} labels for a sentence of {} characters",
                gold.len(),
                sentence.len()
            )));
        }
        Ok(gold.class_indices())
    }

    /// Exact gradients of the summed cross-entropy of one sentence plus the
    /// L2 term, w.r.t. every parameter. Dictionary vectors are constants.
    pub fn backward(&self, sentence: &Sentence, gold: &LabelSequence) -> Result<Gradients> {
        let indices = self.gold_indices(sentence, gold)?;
        let inputs = self.inputs(&sentence.chars);
        let mut grads = self.network.zeros_like();
        let (data, clamped) = self
            .network
            .accumulate_gradients(&inputs, &indices, &mut grads)?;
        self.network.add_l2_gradient(self.config.l2, &mut grads);
        Ok(Gradients {
            grads,
            loss: data + l2_penalty(&self.network, self.config.l2),
            clamped,
        })
    }

    /// Checks analytic gradients against central differences at double
    /// precision for one segmented sentence.
    pub fn grad_check(
        &self,
        sentence: &Sentence,
        eps: f64,
        tolerance: f64,
    ) -> Result<GradCheckReport> {
        let gold = encode_labels(sentence, self.config.scheme)?.class_indices();
        let inputs = self.inputs(&sentence.chars);
        let net: Network<f64> = self.network.cast();
        let mut analytic = net.zeros_like();
        net.accumulate_gradients(&inputs, &gold, &mut analytic)?;
        net.add_l2_gradient(self.config.l2, &mut analytic);
        let lambda = self.config.l2;
        let mut point = net;
        grad_check(
            &mut point,
            &analytic,
            |p| p.data_loss(&inputs, &gold).unwrap_or(f64::NAN) + l2_penalty(p, lambda),
            eps,
            tolerance,
        )
    }

    /// Trains for `config.epochs` epochs. With a development set, the
    /// parameters of the epoch with the best development F1 are kept;
    /// otherwise the final parameters are.
    pub fn train(&mut self, corpus: &[Sentence], dev: Option<&[Sentence]>) -> Result<TrainingLog> {
        self.train_with(corpus, dev, |_, _| true)
    }

    /// Like [`train`](Self::train), calling `on_epoch` after every epoch.
    /// Training stops early when it returns `false`.
    pub fn train_with<F>(
        &mut self,
        corpus: &[Sentence],
        dev: Option<&[Sentence]>,
        mut on_epoch: F,
    ) -> Result<TrainingLog>
    where
        F: FnMut(&EpochRecord, &SegmenterModel) -> bool,
    {
        self.config.validate()?;
        let prepared: Vec<_> = corpus
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| -> Result<_> {
                let gold = encode_labels(s, self.config.scheme)?.class_indices();
                Ok((self.inputs(&s.chars), gold))
            })
            .collect::<Result<_>>()?;
        if prepared.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        self.optimizer.learning_rate = self.config.learning_rate;

        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(1);
        let mut order: Vec<usize> = (0..prepared.len()).collect();
        let mut grads = self.network.zeros_like();
        let mut log = TrainingLog::default();
        let mut best: Option<(f64, Network<f32>)> = None;

        for epoch in 1..=self.config.epochs {
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            let mut epoch_clamped = 0;
            for batch in order.chunks(self.config.batch_size) {
                for (_, t) in grads.tensors_mut() {
                    t.fill(0.0);
                }
                let mut batch_loss = 0.0;
                for &i in batch {
                    let (inputs, gold) = &prepared[i];
                    let (l, c) = self
                        .network
                        .accumulate_gradients(inputs, gold, &mut grads)?;
                    batch_loss += l;
                    epoch_clamped += c;
                }
                self.network.add_l2_gradient(self.config.l2, &mut grads);
                batch_loss += l2_penalty(&self.network, self.config.l2);
                if !batch_loss.is_finite() {
                    return Err(Error::NonFiniteLoss { epoch });
                }
                adagrad_update(&mut self.network, &grads, &mut self.optimizer)?;
                epoch_loss += batch_loss;
            }

            let dev_f1 = match dev {
                Some(d) => Some(self.corpus_counts(d)?.f1()),
                None => None,
            };
            if let Some(f1) = dev_f1 {
                if best.as_ref().is_none_or(|(b, _)| f1 > *b) {
                    best = Some((f1, self.network.clone()));
                    log.kept_epoch = Some(epoch);
                }
            } else {
                log.kept_epoch = Some(epoch);
            }
            let record = EpochRecord {
                epoch,
                loss: epoch_loss,
                dev_f1,
                clamped: epoch_clamped,
            };
            let go_on = on_epoch(&record, self);
            log.epochs.push(record);
            if !go_on {
                break;
            }
        }
        if let Some((_, net)) = best {
            self.network = net;
        }
        Ok(log)
    }

    /// Token-level counts of this model's segmentation of `corpus` against
    /// its gold spans.
    pub fn corpus_counts(&self, corpus: &[Sentence]) -> Result<PrfCounts> {
        let mut counts = PrfCounts::default();
        for s in corpus.iter().filter(|s| !s.is_empty()) {
            let pred = self.predict_spans(&s.chars)?;
            counts += crate::eval::span_counts(s.gold_spans()?, &pred);
        }
        Ok(counts)
    }
}
