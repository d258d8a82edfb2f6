//! Parameter tensors of a segmenter and the per-sentence forward and
//! backward passes.

use rand::Rng;

use super::config::{Arch, ModelConfig};
use crate::corpus::{Stream, Vocabulary};
use crate::error::{Error, Result};
use crate::features::{window_slot, DictVector, NgramIds};
use crate::nn::{
    cross_entropy, lstm_step, lstm_step_backward, matvec_acc, matvec_t_acc, outer_acc, rnn_step,
    rnn_step_backward, softmax, LstmParams, LstmStep, Parameters, Real, RnnParams, Tensor,
};

/// Bound of the uniform initialisation of weights and embeddings.
pub const INIT_BOUND: f64 = 0.08;

/// Shape-determining part of a [`ModelConfig`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub arch: Arch,
    pub window: usize,
    pub orders: Vec<usize>,
    pub use_ctype: bool,
    pub char_dim: usize,
    pub ctype_dim: usize,
    pub hidden: usize,
    pub dict_width: usize,
    pub classes: usize,
}

impl Layout {
    pub fn from_config(config: &ModelConfig) -> Self {
        Self {
            arch: config.arch,
            window: config.window,
            orders: config.orders(),
            use_ctype: config.use_ctype,
            char_dim: config.char_dim,
            ctype_dim: config.ctype_dim,
            hidden: config.hidden,
            dict_width: config.dict_width(),
            classes: config.num_labels(),
        }
    }

    pub fn input_width(&self) -> usize {
        let per_order = self.char_dim + if self.use_ctype { self.ctype_dim } else { 0 };
        self.window * self.orders.len() * per_order
    }

    /// Input width of the hidden layer (`W1` columns).
    pub fn hidden_input_width(&self) -> usize {
        match self.arch {
            Arch::Ffnn => self.input_width(),
            Arch::Rnn | Arch::Lstm => self.hidden,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Recurrent<T> {
    None,
    Rnn(RnnParams<T>),
    Lstm(LstmParams<T>),
}

/// Features of one sentence, computed once and reused across epochs.
#[derive(Clone, Debug, PartialEq)]
pub struct SentenceInputs {
    pub ngrams: Vec<NgramIds>,
    /// Empty when dictionary features are disabled.
    pub dict: Vec<DictVector>,
}

impl SentenceInputs {
    pub fn len(&self) -> usize {
        self.ngrams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ngrams.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network<T> {
    layout: Layout,
    /// One table per enabled order, ascending.
    pub char_emb: Vec<Tensor<T>>,
    pub ctype_emb: Vec<Tensor<T>>,
    pub recurrent: Recurrent<T>,
    pub w1: Tensor<T>,
    pub b1: Tensor<T>,
    pub w2: Tensor<T>,
    pub b2: Tensor<T>,
}

struct Trace<T> {
    xs: Vec<Vec<T>>,
    rnn: Vec<Vec<T>>,
    lstm: Vec<LstmStep<T>>,
    hs: Vec<Vec<T>>,
    outs: Vec<Vec<T>>,
    ys: Vec<Vec<T>>,
}

impl<T: Real> Network<T> {
    /// Randomly initialised network: uniform(±INIT_BOUND) weights and
    /// embeddings, zero biases except the LSTM forget gate (1.0).
    pub fn init<R: Rng>(layout: Layout, vocab: &Vocabulary, rng: &mut R) -> Self {
        let mut net = Self::shaped(layout, vocab, |r, c| Tensor::uniform(r, c, INIT_BOUND, rng));
        let (input, hidden) = (net.layout.input_width(), net.layout.hidden);
        net.recurrent = match net.layout.arch {
            Arch::Ffnn => Recurrent::None,
            Arch::Rnn => Recurrent::Rnn(RnnParams::init(input, hidden, INIT_BOUND, rng)),
            Arch::Lstm => Recurrent::Lstm(LstmParams::init(input, hidden, INIT_BOUND, rng)),
        };
        net.w1 = Tensor::uniform(hidden, net.layout.hidden_input_width(), INIT_BOUND, rng);
        net.w2 = Tensor::uniform(
            net.layout.classes,
            hidden + net.layout.dict_width,
            INIT_BOUND,
            rng,
        );
        net
    }

    pub fn zeros(layout: Layout, vocab: &Vocabulary) -> Self {
        Self::shaped(layout, vocab, |r, c| Tensor::zeros(r, c))
    }

    fn shaped(
        layout: Layout,
        vocab: &Vocabulary,
        mut emb: impl FnMut(usize, usize) -> Tensor<T>,
    ) -> Self {
        let char_emb = layout
            .orders
            .iter()
            .map(|&n| emb(vocab.table(Stream::Char, n).size(), layout.char_dim))
            .collect();
        let ctype_emb = if layout.use_ctype {
            layout
                .orders
                .iter()
                .map(|&n| emb(vocab.table(Stream::CharType, n).size(), layout.ctype_dim))
                .collect()
        } else {
            Vec::new()
        };
        let (input, hidden) = (layout.input_width(), layout.hidden);
        let recurrent = match layout.arch {
            Arch::Ffnn => Recurrent::None,
            Arch::Rnn => Recurrent::Rnn(RnnParams::zeros(input, hidden)),
            Arch::Lstm => Recurrent::Lstm(LstmParams::zeros(input, hidden)),
        };
        Self {
            w1: Tensor::zeros(hidden, layout.hidden_input_width()),
            b1: Tensor::zeros(hidden, 1),
            w2: Tensor::zeros(layout.classes, hidden + layout.dict_width),
            b2: Tensor::zeros(layout.classes, 1),
            char_emb,
            ctype_emb,
            recurrent,
            layout,
        }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// A zero tensor set with the same shapes, for gradient accumulation.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for (_, t) in z.tensors_mut() {
            t.fill(T::zero());
        }
        z
    }

    pub fn cast<U: Real>(&self) -> Network<U> {
        Network {
            layout: self.layout.clone(),
            char_emb: self.char_emb.iter().map(Tensor::cast).collect(),
            ctype_emb: self.ctype_emb.iter().map(Tensor::cast).collect(),
            recurrent: match &self.recurrent {
                Recurrent::None => Recurrent::None,
                Recurrent::Rnn(p) => Recurrent::Rnn(p.cast()),
                Recurrent::Lstm(p) => Recurrent::Lstm(p.cast()),
            },
            w1: self.w1.cast(),
            b1: self.b1.cast(),
            w2: self.w2.cast(),
            b2: self.b2.cast(),
        }
    }

    /// Checks every tensor against the layout and the vocabulary sizes.
    pub fn check_shapes(&self, vocab: &Vocabulary) -> Result<()> {
        let expected = Self::zeros(self.layout.clone(), vocab);
        for ((name, want), (_, got)) in expected.tensors().iter().zip(self.tensors()) {
            if want.shape() != got.shape() {
                return Err(Error::ShapeMismatch {
                    op: "network",
                    expected: format!("{name} of shape {:?}", want.shape()),
                    actual: format!("{:?}", got.shape()),
                });
            }
        }
        if expected.tensors().len() != self.tensors().len() {
            return Err(Error::ShapeMismatch {
                op: "network",
                expected: format!("{} tensors", expected.tensors().len()),
                actual: self.tensors().len().to_string(),
            });
        }
        Ok(())
    }

    fn embed(&self, ngrams: &[NgramIds], t: usize, out: &mut Vec<T>) {
        out.clear();
        let half = (self.layout.window / 2) as isize;
        for off in -half..=half {
            let slot = window_slot(ngrams, t, off);
            for (k, &n) in self.layout.orders.iter().enumerate() {
                out.extend_from_slice(self.char_emb[k].row(slot.chars[n - 1] as usize));
            }
            for (k, &n) in self
                .layout
                .orders
                .iter()
                .enumerate()
                .take(self.ctype_emb.len())
            {
                out.extend_from_slice(self.ctype_emb[k].row(slot.ctypes[n - 1] as usize));
            }
        }
    }

    fn scatter_embedding_grad(&self, ngrams: &[NgramIds], t: usize, dx: &[T], grads: &mut Self) {
        let half = (self.layout.window / 2) as isize;
        let mut pos = 0;
        let mut take = |width: usize| {
            let s = &dx[pos..pos + width];
            pos += width;
            s
        };
        for off in -half..=half {
            let slot = window_slot(ngrams, t, off);
            for (k, &n) in self.layout.orders.iter().enumerate() {
                let g = take(self.layout.char_dim);
                let row = grads.char_emb[k].row_mut(slot.chars[n - 1] as usize);
                row.iter_mut().zip(g).for_each(|(r, &v)| *r += v);
            }
            for (k, &n) in self
                .layout
                .orders
                .iter()
                .enumerate()
                .take(self.ctype_emb.len())
            {
                let g = take(self.layout.ctype_dim);
                let row = grads.ctype_emb[k].row_mut(slot.ctypes[n - 1] as usize);
                row.iter_mut().zip(g).for_each(|(r, &v)| *r += v);
            }
        }
    }

    fn trace(&self, inputs: &SentenceInputs, keep: bool) -> Trace<T> {
        let n = inputs.len();
        let hidden = self.layout.hidden;
        let mut tr = Trace {
            xs: Vec::with_capacity(if keep { n } else { 0 }),
            rnn: Vec::new(),
            lstm: Vec::new(),
            hs: Vec::with_capacity(n),
            outs: Vec::with_capacity(n),
            ys: Vec::with_capacity(n),
        };
        let mut x = Vec::with_capacity(self.layout.input_width());
        let mut state_h = vec![T::zero(); hidden];
        let mut state_c = vec![T::zero(); hidden];
        for t in 0..n {
            self.embed(&inputs.ngrams, t, &mut x);
            let mut a = self.b1.data().to_vec();
            match &self.recurrent {
                Recurrent::None => matvec_acc(&self.w1, &x, &mut a),
                Recurrent::Rnn(p) => {
                    state_h = rnn_step(&x, &state_h, p).expect("layout-consistent shapes");
                    matvec_acc(&self.w1, &state_h, &mut a);
                    if keep {
                        tr.rnn.push(state_h.clone());
                    }
                }
                Recurrent::Lstm(p) => {
                    let step =
                        lstm_step(&x, &state_h, &state_c, p).expect("layout-consistent shapes");
                    matvec_acc(&self.w1, &step.h, &mut a);
                    state_h.clone_from(&step.h);
                    state_c.clone_from(&step.c);
                    if keep {
                        tr.lstm.push(step);
                    }
                }
            }
            let mut h_out: Vec<T> = a.iter().map(|v| v.tanh()).collect();
            if let Some(d) = inputs.dict.get(t) {
                h_out.extend(d.as_slice().iter().map(|&b| T::from_f64(b as f64)));
            }
            let mut z = self.b2.data().to_vec();
            matvec_acc(&self.w2, &h_out, &mut z);
            tr.ys.push(softmax(&z));
            if keep {
                tr.xs.push(x.clone());
                tr.hs.push(h_out[..hidden].to_vec());
                tr.outs.push(h_out);
            }
        }
        tr
    }

    fn check_inputs(&self, inputs: &SentenceInputs) -> Result<()> {
        let want_dict = self.layout.dict_width > 0;
        if want_dict && inputs.dict.len() != inputs.len() {
            return Err(Error::LengthMismatch(format!(
                "{} dictionary vectors for {} positions",
                inputs.dict.len(),
                inputs.len()
            )));
        }
        if !want_dict && !inputs.dict.is_empty() {
            return Err(Error::Precondition(
                "dictionary features given to a model without them".into(),
            ));
        }
        Ok(())
    }

    /// Label distributions for every position.
    pub fn forward(&self, inputs: &SentenceInputs) -> Result<Vec<Vec<T>>> {
        self.check_inputs(inputs)?;
        Ok(self.trace(inputs, false).ys)
    }

    /// Summed cross-entropy of `gold` (class indices) without regularisation.
    pub fn data_loss(&self, inputs: &SentenceInputs, gold: &[usize]) -> Result<f64> {
        let ys = self.forward(inputs)?;
        check_gold(gold, ys.len(), self.layout.classes)?;
        Ok(ys
            .iter()
            .zip(gold)
            .map(|(y, &g)| cross_entropy(y, g).0)
            .sum())
    }

    /// Adds the gradient of the summed cross-entropy of one sentence into
    /// `grads` (backpropagation through time for recurrent variants).
    /// Returns the data loss and the number of clamped probabilities.
    pub fn accumulate_gradients(
        &self,
        inputs: &SentenceInputs,
        gold: &[usize],
        grads: &mut Self,
    ) -> Result<(f64, usize)> {
        self.check_inputs(inputs)?;
        check_gold(gold, inputs.len(), self.layout.classes)?;
        let tr = self.trace(inputs, true);
        let n = inputs.len();
        let hidden = self.layout.hidden;
        let mut loss = 0.0;
        let mut clamped = 0;
        let mut carry_h = vec![T::zero(); hidden];
        let mut carry_c = vec![T::zero(); hidden];
        let zeros = vec![T::zero(); hidden];

        for t in (0..n).rev() {
            let (l, c) = cross_entropy(&tr.ys[t], gold[t]);
            loss += l;
            clamped += c as usize;

            let mut dz = tr.ys[t].clone();
            dz[gold[t]] -= T::one();
            outer_acc(&mut grads.w2, &dz, &tr.outs[t]);
            add_into(grads.b2.data_mut(), &dz);
            let mut dout = vec![T::zero(); self.w2.cols()];
            matvec_t_acc(&self.w2, &dz, &mut dout);

            let da: Vec<T> = tr.hs[t]
                .iter()
                .zip(&dout[..hidden])
                .map(|(&h, &g)| g * (T::one() - h * h))
                .collect();
            add_into(grads.b1.data_mut(), &da);
            let mut du = vec![T::zero(); self.w1.cols()];
            matvec_t_acc(&self.w1, &da, &mut du);

            let dx = match (&self.recurrent, &mut grads.recurrent) {
                (Recurrent::None, _) => {
                    outer_acc(&mut grads.w1, &da, &tr.xs[t]);
                    du
                }
                (Recurrent::Rnn(p), Recurrent::Rnn(g)) => {
                    outer_acc(&mut grads.w1, &da, &tr.rnn[t]);
                    add_into(&mut du, &carry_h);
                    let prev = if t > 0 { &tr.rnn[t - 1] } else { &zeros };
                    let (dx, dprev) = rnn_step_backward(&tr.xs[t], prev, &tr.rnn[t], &du, p, g);
                    carry_h = dprev;
                    dx
                }
                (Recurrent::Lstm(p), Recurrent::Lstm(g)) => {
                    let step = &tr.lstm[t];
                    outer_acc(&mut grads.w1, &da, &step.h);
                    add_into(&mut du, &carry_h);
                    let (h_prev, c_prev) = if t > 0 {
                        (&tr.lstm[t - 1].h, &tr.lstm[t - 1].c)
                    } else {
                        (&zeros, &zeros)
                    };
                    let (dx, dh_prev, dc_prev) =
                        lstm_step_backward(&tr.xs[t], h_prev, c_prev, step, &du, &carry_c, p, g);
                    carry_h = dh_prev;
                    carry_c = dc_prev;
                    dx
                }
                _ => {
                    return Err(Error::Precondition(
                        "gradient buffer does not match the network".into(),
                    ))
                }
            };
            self.scatter_embedding_grad(&inputs.ngrams, t, &dx, grads);
        }
        Ok((loss, clamped))
    }

    /// Adds `λ θ` to every gradient tensor.
    pub fn add_l2_gradient(&self, lambda: f64, grads: &mut Self) {
        if lambda == 0.0 {
            return;
        }
        let l = T::from_f64(lambda);
        for ((_, p), (_, g)) in self.tensors().iter().zip(grads.tensors_mut()) {
            for (gv, &pv) in g.data_mut().iter_mut().zip(p.data()) {
                *gv += l * pv;
            }
        }
    }
}

fn check_gold(gold: &[usize], len: usize, classes: usize) -> Result<()> {
    if gold.len() != len {
        return Err(Error::LengthMismatch(format!(
            "{} gold labels for a sentence of {len} characters",
            gold.len()
        )));
    }
    if let Some(&bad) = gold.iter().find(|&&g| g >= classes) {
        return Err(Error::Precondition(format!(
            "gold class {bad} out of range"
        )));
    }
    Ok(())
}

fn add_into<T: Real>(dst: &mut [T], src: &[T]) {
    dst.iter_mut().zip(src).for_each(|(d, &s)| *d += s);
}

impl<T> Parameters<T> for Network<T> {
    fn tensors(&self) -> Vec<(String, &Tensor<T>)> {
        let mut out = Vec::new();
        for (k, t) in self.char_emb.iter().enumerate() {
            out.push((format!("char_emb.{}", self.layout.orders[k]), t));
        }
        for (k, t) in self.ctype_emb.iter().enumerate() {
            out.push((format!("ctype_emb.{}", self.layout.orders[k]), t));
        }
        match &self.recurrent {
            Recurrent::None => {}
            Recurrent::Rnn(p) => out.extend(
                p.tensors()
                    .into_iter()
                    .map(|(n, t)| (format!("rnn.{n}"), t)),
            ),
            Recurrent::Lstm(p) => out.extend(
                p.tensors()
                    .into_iter()
                    .map(|(n, t)| (format!("lstm.{n}"), t)),
            ),
        }
        out.push(("w1".into(), &self.w1));
        out.push(("b1".into(), &self.b1));
        out.push(("w2".into(), &self.w2));
        out.push(("b2".into(), &self.b2));
        out
    }

    fn tensors_mut(&mut self) -> Vec<(String, &mut Tensor<T>)> {
        let mut out = Vec::new();
        let orders = &self.layout.orders;
        for (k, t) in self.char_emb.iter_mut().enumerate() {
            out.push((format!("char_emb.{}", orders[k]), t));
        }
        for (k, t) in self.ctype_emb.iter_mut().enumerate() {
            out.push((format!("ctype_emb.{}", orders[k]), t));
        }
        match &mut self.recurrent {
            Recurrent::None => {}
            Recurrent::Rnn(p) => out.extend(
                p.tensors_mut()
                    .into_iter()
                    .map(|(n, t)| (format!("rnn.{n}"), t)),
            ),
            Recurrent::Lstm(p) => out.extend(
                p.tensors_mut()
                    .into_iter()
                    .map(|(n, t)| (format!("lstm.{n}"), t)),
            ),
        }
        out.push(("w1".into(), &mut self.w1));
        out.push(("b1".into(), &mut self.b1));
        out.push(("w2".into(), &mut self.w2));
        out.push(("b2".into(), &mut self.b2));
        out
    }
}
