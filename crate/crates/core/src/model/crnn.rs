//! The CRNN stack: conv(+relu)/pool twice, the map from feature maps to
//! a horizontal time sequence, a dense bottleneck, two bidirectional
//! LSTMs with dropout between layers, and the softmax head.

use super::{CrnnConfig, ModelError};
use crate::ctc::{ctc_gradient, ctc_loss, LabelSequence, ProbMatrix, SymbolAlphabet};
use crate::data::{plate_alphabet, PlateSample};
use crate::model::PLATE_CLASSES;
use crate::nn::{
    bilstm_backward, bilstm_forward, conv2d_backward, conv2d_forward, dense_backward,
    dense_forward, dropout_backward, dropout_forward, he_normal_init, maxpool2_backward,
    maxpool2_forward, softmax_rows, Activation, AdamState, BilstmCache, DenseCache, LstmParams,
    MaxPoolCache, Param,
};
use crate::tensor::Tensor;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Canonical parameter order; checkpoints and optimizer state follow it.
pub const PARAM_NAMES: [&str; 20] = [
    "conv1.kernel",
    "conv1.bias",
    "conv2.kernel",
    "conv2.bias",
    "dense1.weight",
    "dense1.bias",
    "lstm1.fwd.wx",
    "lstm1.fwd.wh",
    "lstm1.fwd.bias",
    "lstm1.bwd.wx",
    "lstm1.bwd.wh",
    "lstm1.bwd.bias",
    "lstm2.fwd.wx",
    "lstm2.fwd.wh",
    "lstm2.fwd.bias",
    "lstm2.bwd.wx",
    "lstm2.bwd.wh",
    "lstm2.bwd.bias",
    "out.weight",
    "out.bias",
];

#[derive(Debug, Clone)]
struct LstmBlock {
    wx: Param,
    wh: Param,
    b: Param,
}

impl LstmBlock {
    fn init(fin: usize, hidden: usize, rng: &mut ChaCha8Rng) -> Self {
        let wx = he_normal_init(vec![fin, 4 * hidden], fin, rng);
        let wh = he_normal_init(vec![hidden, 4 * hidden], hidden, rng);
        let mut b = Tensor::zeros(vec![4 * hidden]);
        // forget-gate block starts at 1 to keep early gradients alive
        for v in &mut b.data_mut()[hidden..2 * hidden] {
            *v = 1.0;
        }
        Self {
            wx: Param::new(wx),
            wh: Param::new(wh),
            b: Param::new(b),
        }
    }

    fn weights(&self) -> LstmParams {
        LstmParams {
            wx: self.wx.value.clone(),
            wh: self.wh.value.clone(),
            b: self.b.value.clone(),
        }
    }
}

/// Per-parameter gradients in canonical order.
#[derive(Debug, Clone)]
pub struct GradientSet(pub Vec<Tensor>);

impl GradientSet {
    fn add_assign(&mut self, other: &GradientSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            a.axpy(1.0, b).expect("gradient shapes agree");
        }
    }

    fn scale(&mut self, k: f64) {
        for t in &mut self.0 {
            for v in t.data_mut() {
                *v *= k;
            }
        }
    }
}

struct Caches {
    image: Tensor,
    z1: Tensor,
    pool1: MaxPoolCache,
    p1: Tensor,
    z2: Tensor,
    pool2: MaxPoolCache,
    p2_shape: Vec<usize>,
    dense1: DenseCache,
    drop1_mask: Tensor,
    bilstm1: BilstmCache,
    drop2_mask: Tensor,
    bilstm2: BilstmCache,
    drop3_mask: Tensor,
    out: DenseCache,
}

#[derive(Clone)]
pub struct Crnn {
    config: CrnnConfig,
    conv1_kernel: Param,
    conv1_bias: Param,
    conv2_kernel: Param,
    conv2_bias: Param,
    dense1_weight: Param,
    dense1_bias: Param,
    lstm1_fwd: LstmBlock,
    lstm1_bwd: LstmBlock,
    lstm2_fwd: LstmBlock,
    lstm2_bwd: LstmBlock,
    out_weight: Param,
    out_bias: Param,
}

impl Crnn {
    /// Builds the stack with he_normal kernels; two builds from the same
    /// seed are parameter-identical.
    pub fn build(config: CrnnConfig, rng: &mut ChaCha8Rng) -> Result<Self, ModelError> {
        config.validate()?;
        let c = &config;
        let conv1_kernel = Param::new(he_normal_init(vec![3, 3, 1, c.conv1_units], 9, rng));
        let conv1_bias = Param::new(Tensor::zeros(vec![c.conv1_units]));
        let conv2_kernel = Param::new(he_normal_init(
            vec![3, 3, c.conv1_units, c.conv2_units],
            9 * c.conv1_units,
            rng,
        ));
        let conv2_bias = Param::new(Tensor::zeros(vec![c.conv2_units]));
        let feature_width = c.feature_width();
        let dense1_weight = Param::new(he_normal_init(
            vec![feature_width, c.dense_units],
            feature_width,
            rng,
        ));
        let dense1_bias = Param::new(Tensor::zeros(vec![c.dense_units]));
        let lstm1_fwd = LstmBlock::init(c.dense_units, c.lstm1_hidden, rng);
        let lstm1_bwd = LstmBlock::init(c.dense_units, c.lstm1_hidden, rng);
        let lstm2_fwd = LstmBlock::init(2 * c.lstm1_hidden, c.lstm2_hidden, rng);
        let lstm2_bwd = LstmBlock::init(2 * c.lstm1_hidden, c.lstm2_hidden, rng);
        let out_weight = Param::new(he_normal_init(
            vec![2 * c.lstm2_hidden, c.classes],
            2 * c.lstm2_hidden,
            rng,
        ));
        let out_bias = Param::new(Tensor::zeros(vec![c.classes]));
        Ok(Self {
            config,
            conv1_kernel,
            conv1_bias,
            conv2_kernel,
            conv2_bias,
            dense1_weight,
            dense1_bias,
            lstm1_fwd,
            lstm1_bwd,
            lstm2_fwd,
            lstm2_bwd,
            out_weight,
            out_bias,
        })
    }

    pub fn config(&self) -> &CrnnConfig {
        &self.config
    }

    /// The recognition alphabet this head decodes into: the plate table
    /// for 38-class heads, generic symbol names otherwise.
    pub fn alphabet(&self) -> SymbolAlphabet {
        if self.config.classes == PLATE_CLASSES {
            plate_alphabet()
        } else {
            SymbolAlphabet::new(
                (0..self.config.classes - 1).map(|i| format!("s{i}")).collect::<Vec<_>>(),
            )
            .expect("generated names are unique")
        }
    }

    pub fn params(&self) -> Vec<&Param> {
        vec![
            &self.conv1_kernel,
            &self.conv1_bias,
            &self.conv2_kernel,
            &self.conv2_bias,
            &self.dense1_weight,
            &self.dense1_bias,
            &self.lstm1_fwd.wx,
            &self.lstm1_fwd.wh,
            &self.lstm1_fwd.b,
            &self.lstm1_bwd.wx,
            &self.lstm1_bwd.wh,
            &self.lstm1_bwd.b,
            &self.lstm2_fwd.wx,
            &self.lstm2_fwd.wh,
            &self.lstm2_fwd.b,
            &self.lstm2_bwd.wx,
            &self.lstm2_bwd.wh,
            &self.lstm2_bwd.b,
            &self.out_weight,
            &self.out_bias,
        ]
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        vec![
            &mut self.conv1_kernel,
            &mut self.conv1_bias,
            &mut self.conv2_kernel,
            &mut self.conv2_bias,
            &mut self.dense1_weight,
            &mut self.dense1_bias,
            &mut self.lstm1_fwd.wx,
            &mut self.lstm1_fwd.wh,
            &mut self.lstm1_fwd.b,
            &mut self.lstm1_bwd.wx,
            &mut self.lstm1_bwd.wh,
            &mut self.lstm1_bwd.b,
            &mut self.lstm2_fwd.wx,
            &mut self.lstm2_fwd.wh,
            &mut self.lstm2_fwd.b,
            &mut self.lstm2_bwd.wx,
            &mut self.lstm2_bwd.wh,
            &mut self.lstm2_bwd.b,
            &mut self.out_weight,
            &mut self.out_bias,
        ]
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.value.len()).sum()
    }

    fn check_image(&self, image: &Tensor) -> Result<(), ModelError> {
        let want = [self.config.input_height, self.config.input_width, 1];
        if image.shape() != want {
            return Err(ModelError::ShapeMismatch(format!(
                "image must be {want:?}, got {:?}",
                image.shape()
            )));
        }
        Ok(())
    }

    /// Feature maps `[Hp, T, C]` to sequence `[T, Hp * C]`: the time axis
    /// is the pooled image width, read column by column.
    fn maps_to_sequence(&self, maps: &Tensor) -> Tensor {
        let (hp, t, c) = (maps.shape()[0], maps.shape()[1], maps.shape()[2]);
        let f = hp * c;
        let mut seq = Tensor::zeros(vec![t, f]);
        for h in 0..hp {
            for step in 0..t {
                let src = (h * t + step) * c;
                let dst = step * f + h * c;
                seq.data_mut()[dst..dst + c].copy_from_slice(&maps.data()[src..src + c]);
            }
        }
        seq
    }

    fn sequence_to_maps(&self, seq: &Tensor, maps_shape: &[usize]) -> Tensor {
        let (hp, t, c) = (maps_shape[0], maps_shape[1], maps_shape[2]);
        let f = hp * c;
        let mut maps = Tensor::zeros(maps_shape.to_vec());
        for h in 0..hp {
            for step in 0..t {
                let dst = (h * t + step) * c;
                let src = step * f + h * c;
                maps.data_mut()[dst..dst + c].copy_from_slice(&seq.data()[src..src + c]);
            }
        }
        maps
    }

    fn forward_cached(
        &self,
        image: &Tensor,
        training: bool,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Tensor, Caches), ModelError> {
        self.check_image(image)?;
        let rates = self.config.dropout_rates;

        let z1 = conv2d_forward(image, &self.conv1_kernel.value, &self.conv1_bias.value)?;
        let mut a1 = z1.clone();
        a1.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
        let (p1, pool1) = maxpool2_forward(&a1)?;

        let z2 = conv2d_forward(&p1, &self.conv2_kernel.value, &self.conv2_bias.value)?;
        let mut a2 = z2.clone();
        a2.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
        let (p2, pool2) = maxpool2_forward(&a2)?;
        let p2_shape = p2.shape().to_vec();

        let seq = self.maps_to_sequence(&p2);
        let (d1, dense1) = dense_forward(
            &seq,
            &self.dense1_weight.value,
            &self.dense1_bias.value,
            Activation::Relu,
        )?;
        let (d1, drop1_mask) = dropout_forward(&d1, rates[0], training, rng);

        let (l1, bilstm1) = bilstm_forward(&d1, &self.lstm1_fwd.weights(), &self.lstm1_bwd.weights())?;
        let (l1, drop2_mask) = dropout_forward(&l1, rates[1], training, rng);

        let (l2, bilstm2) = bilstm_forward(&l1, &self.lstm2_fwd.weights(), &self.lstm2_bwd.weights())?;
        let (l2, drop3_mask) = dropout_forward(&l2, rates[2], training, rng);

        let (logits, out) = dense_forward(
            &l2,
            &self.out_weight.value,
            &self.out_bias.value,
            Activation::None,
        )?;

        Ok((
            logits,
            Caches {
                image: image.clone(),
                z1,
                pool1,
                p1,
                z2,
                pool2,
                p2_shape,
                dense1,
                drop1_mask,
                bilstm1,
                drop2_mask,
                bilstm2,
                drop3_mask,
                out,
            },
        ))
    }

    /// Full forward pass to a row-stochastic probability matrix.
    /// Dropout is active only when `training` is set; inference is a
    /// pure function of (weights, image).
    pub fn forward(
        &self,
        image: &Tensor,
        training: bool,
        rng: &mut ChaCha8Rng,
    ) -> Result<ProbMatrix, ModelError> {
        let (logits, _) = self.forward_cached(image, training, rng)?;
        Ok(ProbMatrix::from_tensor_unchecked(&softmax_rows(&logits)))
    }

    /// Inference without dropout or RNG.
    pub fn infer(&self, image: &Tensor) -> Result<ProbMatrix, ModelError> {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        self.forward(image, false, &mut rng)
    }

    fn backward(&self, caches: &Caches, grad_logits: &Tensor) -> Result<GradientSet, ModelError> {
        let (g_l2, g_out_w, g_out_b) = dense_backward(&caches.out, &self.out_weight.value, grad_logits)?;
        let g_l2 = dropout_backward(&caches.drop3_mask, &g_l2);

        let (g2f, g2b) = bilstm_backward(
            &self.lstm2_fwd.weights(),
            &self.lstm2_bwd.weights(),
            &caches.bilstm2,
            &g_l2,
        )?;
        let g_l1 = dropout_backward(&caches.drop2_mask, &g2f.seq);

        let (g1f, g1b) = bilstm_backward(
            &self.lstm1_fwd.weights(),
            &self.lstm1_bwd.weights(),
            &caches.bilstm1,
            &g_l1,
        )?;
        let g_d1 = dropout_backward(&caches.drop1_mask, &g1f.seq);

        let (g_seq, g_d1_w, g_d1_b) = dense_backward(&caches.dense1, &self.dense1_weight.value, &g_d1)?;
        let g_p2 = self.sequence_to_maps(&g_seq, &caches.p2_shape);

        let g_a2 = maxpool2_backward(&caches.pool2, &g_p2)?;
        let mut g_z2 = g_a2;
        for (g, &z) in g_z2.data_mut().iter_mut().zip(caches.z2.data()) {
            if z <= 0.0 {
                *g = 0.0;
            }
        }
        let (g_p1, g_k2, g_b2) = conv2d_backward(&caches.p1, &self.conv2_kernel.value, &g_z2)?;

        let g_a1 = maxpool2_backward(&caches.pool1, &g_p1)?;
        let mut g_z1 = g_a1;
        for (g, &z) in g_z1.data_mut().iter_mut().zip(caches.z1.data()) {
            if z <= 0.0 {
                *g = 0.0;
            }
        }
        let (_, g_k1, g_b1) = conv2d_backward(&caches.image, &self.conv1_kernel.value, &g_z1)?;

        Ok(GradientSet(vec![
            g_k1, g_b1, g_k2, g_b2, g_d1_w, g_d1_b, g1f.wx, g1f.wh, g1f.b, g1b.wx, g1b.wh, g1b.b,
            g2f.wx, g2f.wh, g2f.b, g2b.wx, g2b.wh, g2b.b, g_out_w, g_out_b,
        ]))
    }

    /// CTC loss of one sample and its gradient for every parameter.
    pub fn loss_and_gradients(
        &self,
        image: &Tensor,
        label: &LabelSequence,
        training: bool,
        rng: &mut ChaCha8Rng,
    ) -> Result<(f64, GradientSet), ModelError> {
        let alphabet = self.alphabet();
        let (logits, caches) = self.forward_cached(image, training, rng)?;
        let probs = ProbMatrix::from_tensor_unchecked(&softmax_rows(&logits));
        let loss = ctc_loss(&probs, label, &alphabet)?;
        let grad_logits = ctc_gradient(&probs, label, &alphabet)?;
        let grads = self.backward(&caches, &grad_logits)?;
        Ok((loss, grads))
    }

    /// Loss of one sample without dropout; used by evaluation loops and
    /// gradient probes.
    pub fn evaluate_loss(&self, image: &Tensor, label: &LabelSequence) -> Result<f64, ModelError> {
        let alphabet = self.alphabet();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (logits, _) = self.forward_cached(image, false, &mut rng)?;
        let probs = ProbMatrix::from_tensor_unchecked(&softmax_rows(&logits));
        Ok(ctc_loss(&probs, label, &alphabet)?)
    }

    /// One optimizer step on a batch: mean CTC loss backpropagated
    /// through the stack, then a single Adam update. Returns the
    /// pre-update mean loss. A non-finite loss aborts the step with the
    /// parameters untouched.
    pub fn train_step(
        &mut self,
        batch: &[PlateSample],
        adam: &mut AdamState,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64, ModelError> {
        if batch.is_empty() {
            return Err(ModelError::ConfigInvalid("empty batch".into()));
        }
        let t_steps = self.config.time_steps();
        for s in batch {
            if s.label.min_frames() > t_steps {
                return Err(ModelError::Ctc(crate::ctc::CtcError::InfeasibleLabel(format!(
                    "{}: label needs {} frames, model emits {t_steps}",
                    s.source_id,
                    s.label.min_frames()
                ))));
            }
        }
        // per-sample dropout streams, fixed before the parallel section
        // so the result does not depend on scheduling
        let seeds: Vec<u64> = (0..batch.len()).map(|_| rng.gen()).collect();

        let results: Vec<Result<(f64, GradientSet), ModelError>> = batch
            .par_iter()
            .zip(seeds)
            .map(|(sample, seed)| {
                let mut sample_rng = ChaCha8Rng::seed_from_u64(seed);
                self.loss_and_gradients(&sample.image, &sample.label, true, &mut sample_rng)
            })
            .collect();

        let mut total_loss = 0.0;
        let mut total: Option<GradientSet> = None;
        for r in results {
            let (loss, grads) = r?;
            total_loss += loss;
            match &mut total {
                None => total = Some(grads),
                Some(t) => t.add_assign(&grads),
            }
        }
        let mean_loss = total_loss / batch.len() as f64;
        if !mean_loss.is_finite() {
            return Err(ModelError::NonFiniteLoss(mean_loss));
        }
        let mut mean = total.expect("non-empty batch");
        mean.scale(1.0 / batch.len() as f64);

        let mut params = self.params_mut();
        for (p, g) in params.iter_mut().zip(mean.0.iter_mut()) {
            p.zero_grad();
            p.grad.axpy(1.0, g).expect("gradient shapes agree");
        }
        adam.step(&mut params)?;
        Ok(mean_loss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctc::greedy_decode;
    use crate::gradcheck::{central_diff, max_rel_err};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn forward_shape_and_row_stochasticity() {
        let model = Crnn::build(CrnnConfig::default(), &mut rng(1)).unwrap();
        let image = Tensor::filled(vec![50, 200, 1], 0.5);
        let probs = model.infer(&image).unwrap();
        assert_eq!((probs.steps(), probs.classes()), (50, 38));
        for t in 0..50 {
            let sum: f64 = probs.row(t).iter().sum();
            assert!((sum - 1.0).abs() <= 1e-9, "row {t} sums to {sum}");
        }
    }

    #[test]
    fn same_seed_builds_identical_models() {
        let a = Crnn::build(CrnnConfig::default(), &mut rng(7)).unwrap();
        let b = Crnn::build(CrnnConfig::default(), &mut rng(7)).unwrap();
        for (pa, pb) in a.params().iter().zip(b.params()) {
            assert_eq!(pa.value.data(), pb.value.data());
        }
    }

    #[test]
    fn inference_is_deterministic() {
        let model = Crnn::build(CrnnConfig::default(), &mut rng(3)).unwrap();
        let image = Tensor::filled(vec![50, 200, 1], 0.25);
        let a = model.infer(&image).unwrap();
        let b = model.infer(&image).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parameter_tally_matches_closed_form() {
        let model = Crnn::build(CrnnConfig::default(), &mut rng(2)).unwrap();
        // conv: 320 + 18,496; dense: 24,608; bilstm1: 2x82,432;
        // bilstm2: 2x82,176; head: 4,902
        assert_eq!(model.param_count(), 377_542);
        assert_eq!(model.params().len(), PARAM_NAMES.len());
    }

    #[test]
    fn wrong_image_shape_rejected() {
        let model = Crnn::build(CrnnConfig::default(), &mut rng(4)).unwrap();
        let image = Tensor::zeros(vec![200, 50, 1]);
        assert!(matches!(
            model.infer(&image),
            Err(ModelError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn fresh_model_loss_lands_in_sanity_band() {
        let model = Crnn::build(CrnnConfig::default(), &mut rng(5)).unwrap();
        let alphabet = model.alphabet();
        let label = LabelSequence::new(vec![1, 2, 3, 4, 5, 6, 7, 8], &alphabet).unwrap();
        let image = Tensor::filled(vec![50, 200, 1], 0.5);
        let loss = model.evaluate_loss(&image, &label).unwrap();
        // a uniform-ish start sits between L ln C and 2 T ln C
        let ln_c = (38f64).ln();
        assert!(loss >= 8.0 * ln_c * 0.5, "loss {loss} suspiciously low");
        assert!(loss <= 2.0 * 50.0 * ln_c, "loss {loss} suspiciously high");
    }

    #[test]
    fn zero_length_label_trains_without_error() {
        let mut model = Crnn::build(CrnnConfig::shrunken(), &mut rng(6)).unwrap();
        let image = Tensor::filled(vec![8, 16, 1], 0.3);
        let sample = PlateSample {
            image,
            label: LabelSequence::empty(),
            source_id: "blank".into(),
            truth_boxes: None,
        };
        let mut adam = AdamState::new(1e-3);
        let loss = model.train_step(&[sample], &mut adam, &mut rng(7)).unwrap();
        assert!(loss.is_finite() && loss > 0.0);
    }

    #[test]
    fn infeasible_label_aborts_before_compute() {
        let mut model = Crnn::build(CrnnConfig::shrunken(), &mut rng(8)).unwrap();
        let alphabet = model.alphabet();
        // T = 4 but "sss" needs 5 frames
        let label = LabelSequence::new(vec![0, 0, 0], &alphabet).unwrap();
        let sample = PlateSample {
            image: Tensor::filled(vec![8, 16, 1], 0.3),
            label,
            source_id: "bad".into(),
            truth_boxes: None,
        };
        let mut adam = AdamState::new(1e-3);
        assert!(matches!(
            model.train_step(&[sample], &mut adam, &mut rng(9)),
            Err(ModelError::Ctc(crate::ctc::CtcError::InfeasibleLabel(_)))
        ));
    }

    #[test]
    fn training_reduces_loss_on_a_fixed_sample() {
        let mut model = Crnn::build(CrnnConfig::shrunken(), &mut rng(10)).unwrap();
        let alphabet = model.alphabet();
        let label = LabelSequence::new(vec![0, 2], &alphabet).unwrap();
        let mut image = Tensor::zeros(vec![8, 16, 1]);
        for (i, v) in image.data_mut().iter_mut().enumerate() {
            *v = ((i * 37) % 97) as f64 / 97.0;
        }
        let sample = PlateSample {
            image: image.clone(),
            label: label.clone(),
            source_id: "fixed".into(),
            truth_boxes: None,
        };
        let mut adam = AdamState::new(5e-3);
        let mut step_rng = rng(11);
        let first = model.train_step(&[sample.clone()], &mut adam, &mut step_rng).unwrap();
        let mut last = first;
        for _ in 0..60 {
            last = model.train_step(&[sample.clone()], &mut adam, &mut step_rng).unwrap();
        }
        assert!(last < first * 0.5, "loss {first} -> {last}");
        let probs = model.infer(&image).unwrap();
        assert_eq!(greedy_decode(&probs, &alphabet), label);
    }

    #[test]
    fn full_stack_gradients_match_finite_differences() {
        let mut model = Crnn::build(CrnnConfig::shrunken(), &mut rng(12)).unwrap();
        // nudge every parameter off its initial value: zero biases leave
        // relu pre-activations sitting exactly on the kink, where the
        // loss is not differentiable and finite differences measure the
        // two-sided average instead of either subgradient
        {
            let mut jitter = rng(120);
            for p in model.params_mut() {
                for v in p.value.data_mut() {
                    *v += jitter.gen_range(-0.05..0.05);
                }
            }
        }
        let model = model;
        let alphabet = model.alphabet();
        let label = LabelSequence::new(vec![0, 2], &alphabet).unwrap();
        let mut image = Tensor::zeros(vec![8, 16, 1]);
        for (i, v) in image.data_mut().iter_mut().enumerate() {
            *v = ((i * 53) % 101) as f64 / 101.0;
        }

        let (_, analytic) = model
            .loss_and_gradients(&image, &label, false, &mut rng(0))
            .unwrap();

        // probe every parameter tensor with central differences
        let mut probe = model.clone();
        for (idx, name) in PARAM_NAMES.iter().enumerate() {
            let base = model.params()[idx].value.clone();
            let shape = base.shape().to_vec();
            let numeric = central_diff(
                |v| {
                    probe.params_mut()[idx].value = Tensor::new(shape.clone(), v.to_vec()).unwrap();
                    probe.evaluate_loss(&image, &label).unwrap()
                },
                base.data(),
                1e-5,
            );
            probe.params_mut()[idx].value = base;
            let err = max_rel_err(analytic.0[idx].data(), &numeric);
            assert!(err <= 1e-4, "{name}: rel err {err}");
        }
    }
}
