use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;

use super::{DenseLayer, Gradients, ModelConfig, Optimizer, TargetScaler, TrainingSample, WideDeepModel};
use crate::error::{Error, Result};
use crate::seed::{self, Stream};

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: WideDeepModel,
    /// Mean batch loss per epoch.
    pub history: Vec<f64>,
}

fn glorot<R: Rng>(rng: &mut R, fan_in: usize, fan_out: usize, shape: (usize, usize)) -> Array2<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Array2::from_shape_simple_fn(shape, || rng.gen_range(-limit..=limit))
}

/// Glorot-uniform weights drawn from the seeded init stream, zero biases.
pub fn initialize(config: &ModelConfig, scaler: TargetScaler) -> Result<WideDeepModel> {
    let mut model = WideDeepModel::zeros(config.clone(), scaler)?;
    let mut rng = seed::rng(config.seed, Stream::Init, 0);
    for layer in &mut model.deep_layers {
        let (out, inp) = layer.weights.dim();
        layer.weights = glorot(&mut rng, inp, out, (out, inp));
    }
    let h = model.output_weights.len();
    model.output_weights = glorot(&mut rng, h, 1, (1, h)).row(0).to_owned();
    let w = model.wide_weights.len();
    model.wide_weights = glorot(&mut rng, w, 1, (1, w)).row(0).to_owned();
    Ok(model)
}

const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// One optimizer buffer per parameter block, in the same order as
/// [`blocks`] yields them.
struct Buffers(Vec<Vec<f64>>);

impl Buffers {
    fn zeros(model: &WideDeepModel) -> Self {
        let mut sizes = vec![model.wide_weights.len(), 1];
        for l in &model.deep_layers {
            sizes.push(l.weights.len());
            sizes.push(l.bias.len());
        }
        sizes.push(model.output_weights.len());
        sizes.push(1);
        Self(sizes.into_iter().map(|n| vec![0.0; n]).collect())
    }
}

fn contiguous<'a, D: ndarray::Dimension>(a: &'a mut ndarray::Array<f64, D>) -> &'a mut [f64] {
    a.as_slice_memory_order_mut().expect("parameter arrays are contiguous")
}

fn contiguous_ref<'a, D: ndarray::Dimension>(a: &'a ndarray::Array<f64, D>) -> &'a [f64] {
    a.as_slice_memory_order().expect("gradient arrays are contiguous")
}

/// (parameters, gradient) pairs for every block of the model.
fn blocks<'a>(model: &'a mut WideDeepModel, g: &'a Gradients) -> Vec<(&'a mut [f64], &'a [f64])> {
    let mut out: Vec<(&mut [f64], &[f64])> = vec![
        (contiguous(&mut model.wide_weights), contiguous_ref(&g.wide_weights)),
        (std::slice::from_mut(&mut model.wide_bias), std::slice::from_ref(&g.wide_bias)),
    ];
    for (l, layer) in model.deep_layers.iter_mut().enumerate() {
        let DenseLayer { weights, bias } = layer;
        out.push((contiguous(weights), contiguous_ref(&g.deep_weights[l])));
        out.push((contiguous(bias), contiguous_ref(&g.deep_bias[l])));
    }
    out.push((contiguous(&mut model.output_weights), contiguous_ref(&g.output_weights)));
    out.push((std::slice::from_mut(&mut model.global_bias), std::slice::from_ref(&g.global_bias)));
    out
}

struct OptimizerState {
    kind: Optimizer,
    first: Buffers,
    second: Buffers,
    steps: i32,
}

impl OptimizerState {
    fn new(model: &WideDeepModel, kind: Optimizer) -> Self {
        Self { kind, first: Buffers::zeros(model), second: Buffers::zeros(model), steps: 0 }
    }

    fn step(&mut self, model: &mut WideDeepModel, g: &Gradients, lr: f64, mu: f64) {
        self.steps += 1;
        let kind = self.kind;
        let (c1, c2) = (1.0 - mu.powi(self.steps), 1.0 - ADAM_BETA2.powi(self.steps));
        let buffers = self.first.0.iter_mut().zip(self.second.0.iter_mut());
        for ((theta, grad), (m, v)) in blocks(model, g).into_iter().zip(buffers) {
            match kind {
                Optimizer::Sgd => {
                    for ((p, &gi), mi) in theta.iter_mut().zip(grad).zip(m.iter_mut()) {
                        *mi = mu * *mi + gi;
                        *p -= lr * *mi;
                    }
                }
                Optimizer::Adam => {
                    for (((p, &gi), mi), vi) in theta.iter_mut().zip(grad).zip(m.iter_mut()).zip(v.iter_mut()) {
                        *mi = mu * *mi + (1.0 - mu) * gi;
                        *vi = ADAM_BETA2 * *vi + (1.0 - ADAM_BETA2) * gi * gi;
                        *p -= lr * (*mi / c1) / ((*vi / c2).sqrt() + ADAM_EPS);
                    }
                }
            }
        }
    }
}

fn learning_rate(config: &ModelConfig, epoch: usize) -> f64 {
    if config.epochs <= 1 || config.final_lr_fraction >= 1.0 {
        return config.learning_rate;
    }
    let progress = epoch as f64 / (config.epochs - 1) as f64;
    let f = config.final_lr_fraction;
    config.learning_rate * (f + (1.0 - f) * 0.5 * (1.0 + (std::f64::consts::PI * progress).cos()))
}

/// Mini-batch SGD with momentum on the scaled squared error.
///
/// With `config.shuffle` the samples are first put in canonical
/// (flight_id, t_start) order and every epoch draws a permutation from the
/// seeded shuffle stream, so the result does not depend on input order.
/// Without it batches follow the given order.
pub fn train(samples: &[TrainingSample], config: &ModelConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if samples.len() < config.batch_size {
        return Err(Error::InvalidInput(format!(
            "dataset of {} samples is smaller than batch size {}",
            samples.len(),
            config.batch_size
        )));
    }
    for s in samples {
        if (s.feature.t_max - config.t_max).abs() > 1e-9 * config.t_max {
            return Err(Error::InvalidInput(format!(
                "sample {} was featurized with T_M = {}, config has {}",
                s.flight_id, s.feature.t_max, config.t_max
            )));
        }
        if !(s.q_true > 0.0 && s.q_true.is_finite()) {
            return Err(Error::InvalidInput(format!("sample {} has q_true = {}", s.flight_id, s.q_true)));
        }
    }
    let scaler = TargetScaler::fit(samples.iter().map(|s| s.q_true))?;
    let mut model = initialize(config, scaler)?;

    let mut order: Vec<&TrainingSample> = samples.iter().collect();
    if config.shuffle {
        order.sort_by(|a, b| {
            a.flight_id
                .cmp(&b.flight_id)
                .then(a.t_start.total_cmp(&b.t_start))
                .then(a.feature.t0.total_cmp(&b.feature.t0))
        });
    }
    let canonical: Vec<TrainingSample> = order.into_iter().cloned().collect();
    let (deep, wide, y) = model.batch_arrays(&canonical)?;
    drop(canonical);

    let mut optimizer = OptimizerState::new(&model, config.optimizer);
    let mut shuffle_rng = seed::rng(config.seed, Stream::Shuffle, 0);
    let mut idx: Vec<usize> = (0..y.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        if config.shuffle {
            idx.shuffle(&mut shuffle_rng);
        }
        let lr = learning_rate(config, epoch);
        let mut total = 0.0;
        let mut batches = 0usize;
        for (b, chunk) in idx.chunks(config.batch_size).enumerate() {
            let xd = deep.select(Axis(0), chunk);
            let xw = wide.select(Axis(0), chunk);
            let yb = y.select(Axis(0), chunk);
            let (l, grads) = model.backward(xd.view(), xw.view(), yb.view());
            if !l.is_finite() {
                return Err(Error::Diverged { epoch, batch: b, loss: l });
            }
            optimizer.step(&mut model, &grads, lr, config.momentum);
            if !model.all_finite() {
                return Err(Error::Diverged { epoch, batch: b, loss: f64::NAN });
            }
            total += l;
            batches += 1;
        }
        history.push(total / batches as f64);
    }
    Ok(TrainOutcome { model, history })
}
