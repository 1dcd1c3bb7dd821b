//! Wide-and-deep regressor for interval fuel.
//!
//! The wide part is linear in (t0, aircraft metadata); the deep part is a
//! ReLU feed-forward network over the concatenated altitude and speed
//! coefficients. Both are summed with a global bias and squashed by a
//! sigmoid, whose output is mapped onto the target range of the scaler.

mod io;
mod train;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{featurize, SpectralFeature};
use crate::trajectory::{slice_track, AircraftMeta, FlightTrack};

pub use io::{load_model, read_dataset, save_model, write_dataset, FeatureRecord, MODEL_VERSION};
pub use train::{initialize, train, TrainOutcome};

/// Age normalization for the wide input, years.
pub const AGE_SCALE: f64 = 50.0;
/// Wingspan normalization for the wide input, meters.
pub const WINGSPAN_SCALE: f64 = 80.0;
/// Sigmoid outputs above this are reported as saturated.
pub const SATURATION: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    /// Identity activation; turns the deep part into a linear map.
    Linear,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Linear => x,
        }
    }

    fn grad(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
        }
    }
}

/// Update rule applied to each mini-batch gradient.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    /// Heavy-ball momentum: v ← μ v + g, θ ← θ − lr v.
    #[default]
    Sgd,
    /// Adam with β1 = `momentum`, β2 = 0.999, ε = 1e-8 and bias correction.
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub n_h: usize,
    pub n_v: usize,
    pub hidden_sizes: Vec<usize>,
    pub activation: Activation,
    pub learning_rate: f64,
    pub momentum: f64,
    pub optimizer: Optimizer,
    /// Learning rate at the last epoch as a fraction of the initial one
    /// (cosine schedule); 1 keeps it constant.
    pub final_lr_fraction: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    #[serde(rename = "T_M")]
    pub t_max: f64,
    pub type_vocabulary: Vec<String>,
    /// Altitude coefficients are divided by this before entering the deep part, meters.
    pub alt_scale: f64,
    /// Speed coefficients are divided by this, m/s.
    pub speed_scale: f64,
    pub shuffle: bool,
    /// Shortest interval accepted by [`predict_interval`], seconds.
    pub min_interval: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            n_h: 50,
            n_v: 50,
            hidden_sizes: vec![256, 128, 64],
            activation: Activation::Relu,
            learning_rate: 0.01,
            momentum: 0.9,
            optimizer: Optimizer::Sgd,
            final_lr_fraction: 1.0,
            batch_size: 64,
            epochs: 20,
            seed: 0,
            t_max: 7200.0,
            type_vocabulary: Vec::new(),
            alt_scale: 10_000.0,
            speed_scale: 250.0,
            shuffle: true,
            min_interval: 60.0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.hidden_sizes.is_empty() || self.hidden_sizes.contains(&0) {
            return bad(format!("hidden sizes {:?} must be non-empty and positive", self.hidden_sizes));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate < 1.0) {
            return bad(format!("learning rate {} outside (0, 1)", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("momentum {} outside [0, 1)", self.momentum));
        }
        if !(self.final_lr_fraction > 0.0 && self.final_lr_fraction <= 1.0) {
            return bad(format!("final lr fraction {} outside (0, 1]", self.final_lr_fraction));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return bad("batch size and epochs must be positive".into());
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return bad(format!("T_M = {} must be positive", self.t_max));
        }
        if self.type_vocabulary.is_empty() {
            return bad("type vocabulary is empty".into());
        }
        let mut sorted = self.type_vocabulary.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.type_vocabulary.len() {
            return bad("type vocabulary has duplicates".into());
        }
        if !(self.alt_scale > 0.0 && self.speed_scale > 0.0 && self.min_interval >= 0.0) {
            return bad("input scales must be positive".into());
        }
        Ok(())
    }

    pub fn deep_input_len(&self) -> usize {
        self.n_h + self.n_v + 2
    }

    pub fn wide_input_len(&self) -> usize {
        3 + self.type_vocabulary.len()
    }
}

/// Maps sigmoid output s in (0, 1) to kilograms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScaler {
    pub q_min: f64,
    pub q_max: f64,
}

impl TargetScaler {
    pub fn new(q_min: f64, q_max: f64) -> Result<Self> {
        if !(q_min >= 0.0 && q_max > q_min && q_max.is_finite()) {
            return Err(Error::InvalidInput(format!("bad scaler range [{q_min}, {q_max}]")));
        }
        Ok(Self { q_min, q_max })
    }

    /// Range [0, 1.1 · max target].
    pub fn fit(targets: impl IntoIterator<Item = f64>) -> Result<Self> {
        let max = targets.into_iter().fold(0.0f64, f64::max);
        Self::new(0.0, 1.1 * max)
    }

    pub fn scale(&self, q: f64) -> Result<f64> {
        if !(q >= self.q_min && q <= self.q_max) {
            return Err(Error::TargetOutOfRange { q, q_min: self.q_min, q_max: self.q_max });
        }
        Ok((q - self.q_min) / (self.q_max - self.q_min))
    }

    pub fn unscale(&self, s: f64) -> f64 {
        self.q_min + s * (self.q_max - self.q_min)
    }
}

/// One labelled segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub flight_id: String,
    /// Segment start within its flight, seconds.
    pub t_start: f64,
    pub feature: SpectralFeature,
    pub meta: AircraftMeta,
    /// Fuel burned over the segment, kg.
    pub q_true: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// out × in
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WideDeepModel {
    pub wide_weights: Array1<f64>,
    pub wide_bias: f64,
    pub deep_layers: Vec<DenseLayer>,
    pub output_weights: Array1<f64>,
    pub global_bias: f64,
    pub scaler: TargetScaler,
    pub config: ModelConfig,
}

/// Addresses one parameter block of a model (or of its gradient).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamGroup {
    WideWeights,
    WideBias,
    DeepWeights(usize),
    DeepBias(usize),
    OutputWeights,
    GlobalBias,
}

/// [t0 / T_M, one-hot(type), age / 50, wingspan / 80].
pub fn encode_wide(t0: f64, meta: &AircraftMeta, vocabulary: &[String], t_max: f64) -> Result<Vec<f64>> {
    let idx = vocabulary
        .iter()
        .position(|v| *v == meta.aircraft_type)
        .ok_or_else(|| Error::UnknownAircraftType(meta.aircraft_type.clone()))?;
    let mut out = Vec::with_capacity(3 + vocabulary.len());
    out.push(t0 / t_max);
    out.extend((0..vocabulary.len()).map(|i| if i == idx { 1.0 } else { 0.0 }));
    out.push(meta.age / AGE_SCALE);
    out.push(meta.wingspan / WINGSPAN_SCALE);
    Ok(out)
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Intermediate values of a batched forward pass.
pub(crate) struct ForwardCache {
    /// Pre-activations per hidden layer.
    pre: Vec<Array2<f64>>,
    /// Activations per hidden layer.
    post: Vec<Array2<f64>>,
    pub(crate) s: Array1<f64>,
}

/// Parameter gradients, laid out like the model.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub wide_weights: Array1<f64>,
    pub wide_bias: f64,
    pub deep_weights: Vec<Array2<f64>>,
    pub deep_bias: Vec<Array1<f64>>,
    pub output_weights: Array1<f64>,
    pub global_bias: f64,
}

impl Gradients {
    pub fn get(&self, group: ParamGroup, index: usize) -> f64 {
        match group {
            ParamGroup::WideWeights => self.wide_weights[index],
            ParamGroup::WideBias => self.wide_bias,
            ParamGroup::DeepWeights(l) => {
                let cols = self.deep_weights[l].ncols();
                self.deep_weights[l][[index / cols, index % cols]]
            }
            ParamGroup::DeepBias(l) => self.deep_bias[l][index],
            ParamGroup::OutputWeights => self.output_weights[index],
            ParamGroup::GlobalBias => self.global_bias,
        }
    }
}

impl WideDeepModel {
    /// Zero-initialized model; mostly useful for tests.
    pub fn zeros(config: ModelConfig, scaler: TargetScaler) -> Result<Self> {
        config.validate()?;
        let mut fan_in = config.deep_input_len();
        let mut deep_layers = Vec::new();
        for &h in &config.hidden_sizes {
            deep_layers.push(DenseLayer {
                weights: Array2::zeros((h, fan_in)),
                bias: Array1::zeros(h),
            });
            fan_in = h;
        }
        Ok(Self {
            wide_weights: Array1::zeros(config.wide_input_len()),
            wide_bias: 0.0,
            deep_layers,
            output_weights: Array1::zeros(fan_in),
            global_bias: 0.0,
            scaler,
            config,
        })
    }

    /// Deep input: altitude then speed coefficients, each divided by its scale.
    pub fn deep_input(&self, feature: &SpectralFeature) -> Result<Vec<f64>> {
        let cfg = &self.config;
        if feature.alpha.len() != cfg.n_h + 1 || feature.beta.len() != cfg.n_v + 1 {
            return Err(Error::ShapeMismatch(format!(
                "feature radii ({}, {}) vs model ({}, {})",
                feature.n_h(),
                feature.n_v(),
                cfg.n_h,
                cfg.n_v
            )));
        }
        let mut x = Vec::with_capacity(cfg.deep_input_len());
        x.extend(feature.alpha.iter().map(|a| a / cfg.alt_scale));
        x.extend(feature.beta.iter().map(|b| b / cfg.speed_scale));
        Ok(x)
    }

    pub fn wide_input(&self, t0: f64, meta: &AircraftMeta) -> Result<Vec<f64>> {
        encode_wide(t0, meta, &self.config.type_vocabulary, self.config.t_max)
    }

    pub(crate) fn forward_batch(&self, deep: ArrayView2<f64>, wide: ArrayView2<f64>) -> ForwardCache {
        let act = self.config.activation;
        let mut pre = Vec::with_capacity(self.deep_layers.len());
        let mut post: Vec<Array2<f64>> = Vec::with_capacity(self.deep_layers.len());
        for layer in &self.deep_layers {
            let input = post.last().map_or(deep, |a| a.view());
            let z = input.dot(&layer.weights.t()) + &layer.bias;
            let a = z.mapv(|v| act.apply(v));
            pre.push(z);
            post.push(a);
        }
        let last = post.last().expect("at least one hidden layer");
        let logits = last.dot(&self.output_weights) + wide.dot(&self.wide_weights)
            + (self.wide_bias + self.global_bias);
        let s = logits.mapv(sigmoid);
        ForwardCache { pre, post, s }
    }

    /// Sigmoid outputs for a batch.
    pub fn predict_scaled(&self, deep: ArrayView2<f64>, wide: ArrayView2<f64>) -> Array1<f64> {
        self.forward_batch(deep, wide).s
    }

    /// Gradients of the mean squared error between sigmoid outputs and
    /// scaled targets; also returns the loss.
    pub(crate) fn backward(
        &self,
        deep: ArrayView2<f64>,
        wide: ArrayView2<f64>,
        targets: ArrayView1<f64>,
    ) -> (f64, Gradients) {
        let cache = self.forward_batch(deep, wide);
        let n = targets.len() as f64;
        let err = &cache.s - &targets;
        let loss = err.dot(&err) / n;
        // dL/dlogit
        let g: Array1<f64> = err
            .iter()
            .zip(cache.s.iter())
            .map(|(e, s)| 2.0 * e / n * s * (1.0 - s))
            .collect();
        let g_sum = g.sum();
        let act = self.config.activation;
        let layers = self.deep_layers.len();
        let mut deep_weights = vec![Array2::zeros((0, 0)); layers];
        let mut deep_bias = vec![Array1::zeros(0); layers];

        let last = &cache.post[layers - 1];
        let output_weights = last.t().dot(&g);
        let mut upstream = g
            .view()
            .insert_axis(Axis(1))
            .dot(&self.output_weights.view().insert_axis(Axis(0)));
        for l in (0..layers).rev() {
            let z = &cache.pre[l];
            upstream.zip_mut_with(z, |u, &zv| *u *= act.grad(zv));
            let input = if l == 0 { deep } else { cache.post[l - 1].view() };
            deep_weights[l] = upstream.t().dot(&input);
            deep_bias[l] = upstream.sum_axis(Axis(0));
            if l > 0 {
                upstream = upstream.dot(&self.deep_layers[l].weights);
            }
        }
        let grads = Gradients {
            wide_weights: wide.t().dot(&g),
            wide_bias: g_sum,
            deep_weights,
            deep_bias,
            output_weights,
            global_bias: g_sum,
        };
        (loss, grads)
    }

    /// Loss and gradients over labelled samples.
    pub fn gradients(&self, batch: &[TrainingSample]) -> Result<(f64, Gradients)> {
        let (deep, wide, y) = self.batch_arrays(batch)?;
        Ok(self.backward(deep.view(), wide.view(), y.view()))
    }

    /// Predicted kilograms for each sample's feature; labels are ignored.
    pub fn predict_samples(&self, samples: &[TrainingSample]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(samples.len());
        for chunk in samples.chunks(1024) {
            let mut deep = Array2::zeros((chunk.len(), self.config.deep_input_len()));
            let mut wide = Array2::zeros((chunk.len(), self.config.wide_input_len()));
            for (i, s) in chunk.iter().enumerate() {
                deep.row_mut(i).assign(&ArrayView1::from(&self.deep_input(&s.feature)?));
                wide.row_mut(i).assign(&ArrayView1::from(&self.wide_input(s.feature.t0, &s.meta)?));
            }
            out.extend(self.predict_scaled(deep.view(), wide.view()).iter().map(|&s| self.scaler.unscale(s)));
        }
        Ok(out)
    }

    pub(crate) fn batch_arrays(&self, batch: &[TrainingSample]) -> Result<(Array2<f64>, Array2<f64>, Array1<f64>)> {
        if batch.is_empty() {
            return Err(Error::InvalidInput("empty batch".into()));
        }
        let dl = self.config.deep_input_len();
        let wl = self.config.wide_input_len();
        let mut deep = Array2::zeros((batch.len(), dl));
        let mut wide = Array2::zeros((batch.len(), wl));
        let mut y = Array1::zeros(batch.len());
        for (i, s) in batch.iter().enumerate() {
            let d = self.deep_input(&s.feature)?;
            let w = self.wide_input(s.feature.t0, &s.meta)?;
            deep.row_mut(i).assign(&ArrayView1::from(&d));
            wide.row_mut(i).assign(&ArrayView1::from(&w));
            y[i] = self.scaler.scale(s.q_true)?;
        }
        Ok((deep, wide, y))
    }

    /// Sigmoid output s for one input.
    pub fn forward_scaled(&self, t0: f64, meta: &AircraftMeta, feature: &SpectralFeature) -> Result<f64> {
        let d = self.deep_input(feature)?;
        let w = self.wide_input(t0, meta)?;
        let deep = ArrayView2::from_shape((1, d.len()), &d).expect("row shape");
        let wide = ArrayView2::from_shape((1, w.len()), &w).expect("row shape");
        Ok(self.forward_batch(deep, wide).s[0])
    }

    pub fn param_len(&self, group: ParamGroup) -> usize {
        match group {
            ParamGroup::WideWeights => self.wide_weights.len(),
            ParamGroup::WideBias | ParamGroup::GlobalBias => 1,
            ParamGroup::DeepWeights(l) => self.deep_layers[l].weights.len(),
            ParamGroup::DeepBias(l) => self.deep_layers[l].bias.len(),
            ParamGroup::OutputWeights => self.output_weights.len(),
        }
    }

    /// Every parameter block, wide part first.
    pub fn param_groups(&self) -> Vec<ParamGroup> {
        let mut groups = vec![ParamGroup::WideWeights, ParamGroup::WideBias];
        for l in 0..self.deep_layers.len() {
            groups.push(ParamGroup::DeepWeights(l));
            groups.push(ParamGroup::DeepBias(l));
        }
        groups.push(ParamGroup::OutputWeights);
        groups.push(ParamGroup::GlobalBias);
        groups
    }

    fn param_mut(&mut self, group: ParamGroup, index: usize) -> &mut f64 {
        match group {
            ParamGroup::WideWeights => &mut self.wide_weights[index],
            ParamGroup::WideBias => &mut self.wide_bias,
            ParamGroup::DeepWeights(l) => {
                let w = &mut self.deep_layers[l].weights;
                let cols = w.ncols();
                &mut w[[index / cols, index % cols]]
            }
            ParamGroup::DeepBias(l) => &mut self.deep_layers[l].bias[index],
            ParamGroup::OutputWeights => &mut self.output_weights[index],
            ParamGroup::GlobalBias => &mut self.global_bias,
        }
    }

    pub fn param(&self, group: ParamGroup, index: usize) -> f64 {
        match group {
            ParamGroup::WideWeights => self.wide_weights[index],
            ParamGroup::WideBias => self.wide_bias,
            ParamGroup::DeepWeights(l) => {
                let w = &self.deep_layers[l].weights;
                w[[index / w.ncols(), index % w.ncols()]]
            }
            ParamGroup::DeepBias(l) => self.deep_layers[l].bias[index],
            ParamGroup::OutputWeights => self.output_weights[index],
            ParamGroup::GlobalBias => self.global_bias,
        }
    }

    pub fn set_param(&mut self, group: ParamGroup, index: usize, value: f64) {
        *self.param_mut(group, index) = value;
    }

    pub fn all_finite(&self) -> bool {
        self.wide_weights.iter().all(|v| v.is_finite())
            && self.wide_bias.is_finite()
            && self.global_bias.is_finite()
            && self.output_weights.iter().all(|v| v.is_finite())
            && self
                .deep_layers
                .iter()
                .all(|l| l.weights.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
    }
}

/// Interval fuel in kg for a segment of duration `t0`.
pub fn forward(model: &WideDeepModel, t0: f64, meta: &AircraftMeta, feature: &SpectralFeature) -> Result<f64> {
    let s = model.forward_scaled(t0, meta, feature)?;
    Ok(model.scaler.unscale(s))
}

/// Mean squared error of the sigmoid output against scaled targets.
pub fn loss(model: &WideDeepModel, batch: &[TrainingSample]) -> Result<f64> {
    let (deep, wide, y) = model.batch_arrays(batch)?;
    let s = model.predict_scaled(deep.view(), wide.view());
    let err = &s - &y;
    Ok(err.dot(&err) / y.len() as f64)
}

/// Fuel burned between track times `t_a` and `t_b`.
pub fn predict_interval(model: &WideDeepModel, track: &FlightTrack, t_a: f64, t_b: f64) -> Result<f64> {
    let len = t_b - t_a;
    if len < model.config.min_interval {
        return Err(Error::IntervalTooShort { len, min: model.config.min_interval });
    }
    let seg = slice_track(track, t_a, t_b)?;
    let feature = featurize(&seg, model.config.n_h, model.config.n_v, model.config.t_max)?;
    forward(model, feature.t0, &track.meta, &feature)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ModelConfig {
        ModelConfig {
            n_h: 3,
            n_v: 3,
            hidden_sizes: vec![4, 3],
            type_vocabulary: vec!["A".into(), "B".into()],
            t_max: 3600.0,
            ..Default::default()
        }
    }

    fn meta(ty: &str) -> AircraftMeta {
        AircraftMeta { aircraft_type: ty.into(), age: 10.0, wingspan: 40.0 }
    }

    fn feature() -> SpectralFeature {
        SpectralFeature {
            alpha: vec![8000.0, -100.0, 50.0, 10.0],
            beta: vec![300.0, 20.0, -5.0, 1.0],
            t0: 1800.0,
            t_max: 3600.0,
        }
    }

    #[test]
    fn wide_encoding() {
        let vocab = config().type_vocabulary;
        let a = encode_wide(3600.0, &meta("A"), &vocab, 3600.0).unwrap();
        assert_eq!(a, vec![1.0, 1.0, 0.0, 0.2, 0.5]);
        let b = encode_wide(3600.0, &meta("B"), &vocab, 3600.0).unwrap();
        let diff: Vec<usize> = (0..a.len()).filter(|&i| a[i] != b[i]).collect();
        assert_eq!(diff, vec![1, 2]);
        assert!(matches!(
            encode_wide(1.0, &meta("C"), &vocab, 3600.0),
            Err(Error::UnknownAircraftType(_))
        ));
    }

    #[test]
    fn zero_model_outputs_midpoint() {
        let model = WideDeepModel::zeros(config(), TargetScaler::new(100.0, 300.0).unwrap()).unwrap();
        let q = forward(&model, 1800.0, &meta("A"), &feature()).unwrap();
        assert_eq!(q, 200.0);
    }

    #[test]
    fn saturated_bias_reaches_q_max() {
        let mut model = WideDeepModel::zeros(config(), TargetScaler::new(0.0, 500.0).unwrap()).unwrap();
        model.global_bias = 50.0;
        let q = forward(&model, 1800.0, &meta("A"), &feature()).unwrap();
        assert!((q - 500.0).abs() < 1e-9);
    }

    #[test]
    fn radius_mismatch() {
        let model = WideDeepModel::zeros(config(), TargetScaler::new(0.0, 1.0).unwrap()).unwrap();
        let mut f = feature();
        f.alpha.push(0.0);
        assert!(matches!(forward(&model, 1.0, &meta("A"), &f), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn loss_cases() {
        let model = WideDeepModel::zeros(config(), TargetScaler::new(0.0, 100.0).unwrap()).unwrap();
        let sample = |q: f64| TrainingSample {
            flight_id: "f".into(),
            t_start: 0.0,
            feature: feature(),
            meta: meta("A"),
            q_true: q,
        };
        // constant 0.5 prediction against {0, 1}
        assert!((loss(&model, &[sample(0.0), sample(100.0)]).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(loss(&model, &[sample(50.0)]).unwrap(), 0.0);
        let a = loss(&model, &[sample(10.0), sample(70.0), sample(95.0)]).unwrap();
        let b = loss(&model, &[sample(95.0), sample(10.0), sample(70.0)]).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!(matches!(loss(&model, &[sample(150.0)]), Err(Error::TargetOutOfRange { .. })));
    }

    #[test]
    fn scaler_fit() {
        let s = TargetScaler::fit([10.0, 200.0, 50.0]).unwrap();
        assert_eq!(s.q_min, 0.0);
        assert!((s.q_max - 220.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut c = config();
        c.hidden_sizes.clear();
        assert!(c.validate().is_err());
        let mut c = config();
        c.learning_rate = 1.5;
        assert!(c.validate().is_err());
        assert!(config().validate().is_ok());
    }
}
