//! C² monotone interpolation of cumulative fuel and its derivative, the
//! instantaneous fuel flow.
//!
//! Each interval I_j = [T_j, T_{j+1}] is split into thirds, each carrying a
//! cubic Hermite piece. With knot data (Q, Q', Q'') at both ends the four
//! interior unknowns (the values and slopes at the third points) are fixed by
//! the two end second-derivative conditions plus C² continuity at the two
//! interior joints. Solving that system gives, with h = ΔT_j and
//! P = (Q_{j+1} − Q_j) / h:
//!
//! ```text
//! a = Q_j'     + (h/6) Q_j''          d = Q_{j+1}' − (h/6) Q_{j+1}''
//! ω = 3P − (Q_j' + Q_{j+1}') + (h/9)(Q_{j+1}'' − Q_j'')
//! b = (a + ω)/2                       c = (d + ω)/2
//! Q_{j+1/3} = Q_j     + (h/9)(Q_j'     + 3a/2 + ω/2)
//! Q_{j+2/3} = Q_{j+1} − (h/9)(Q_{j+1}' + 3d/2 + ω/2)
//! ```
//!
//! The pieces carry slopes (Q_j', b), (b, c), (c, Q_{j+1}').

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuelnet::{predict_interval, WideDeepModel};
use crate::trajectory::FlightTrack;

/// Ramp added between pooled values so repaired series stay strictly increasing, kg.
pub const REPAIR_EPSILON: f64 = 1e-6;
/// Largest fraction of points the isotonic repair may touch before giving up.
pub const MAX_REPAIR_FRACTION: f64 = 0.2;

const HALVING_ROUNDS: usize = 32;

/// Cumulative fuel samples (T_j, Q_j), both strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuelSeries {
    t: Vec<f64>,
    q: Vec<f64>,
}

impl FuelSeries {
    pub fn new(t: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if t.len() != q.len() {
            return Err(Error::ShapeMismatch(format!("{} times vs {} values", t.len(), q.len())));
        }
        if t.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "fuel series needs at least 3 samples, got {}",
                t.len()
            )));
        }
        if t.iter().chain(&q).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("fuel series must be finite".into()));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("fuel series times must be strictly increasing".into()));
        }
        if q.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("cumulative fuel must be strictly increasing".into()));
        }
        Ok(Self { t, q })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.q
    }
}

/// P_j = (Q_{j+1} − Q_j) / ΔT_j.
pub fn interval_slopes(series: &FuelSeries) -> Vec<f64> {
    series
        .t
        .windows(2)
        .zip(series.q.windows(2))
        .map(|(t, q)| (q[1] - q[0]) / (t[1] - t[0]))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotDerivatives {
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    /// Knots whose derivatives were altered by limiting.
    pub limited: Vec<bool>,
}

/// Second-order knot derivatives before any limiting.
///
/// Interior knots use the derivatives of the parabola through the three
/// neighbouring samples; the endpoints use the same parabola evaluated at the
/// outer sample.
pub fn raw_knot_derivatives(series: &FuelSeries, p: &[f64]) -> KnotDerivatives {
    let t = &series.t;
    let k = t.len() - 1;
    let dt: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let mut d1 = vec![0.0; k + 1];
    let mut d2 = vec![0.0; k + 1];
    for j in 1..k {
        let span = dt[j - 1] + dt[j];
        d1[j] = (dt[j - 1] * p[j] + dt[j] * p[j - 1]) / span;
        d2[j] = 2.0 * (p[j] - p[j - 1]) / span;
    }
    let curv0 = (p[1] - p[0]) / (dt[0] + dt[1]);
    d1[0] = p[0] - curv0 * dt[0];
    d2[0] = 2.0 * curv0;
    let curv_k = (p[k - 1] - p[k - 2]) / (dt[k - 2] + dt[k - 1]);
    d1[k] = p[k - 1] + curv_k * dt[k - 1];
    d2[k] = 2.0 * curv_k;
    KnotDerivatives {
        d1,
        d2,
        limited: vec![false; k + 1],
    }
}

/// Knot derivatives with the monotonicity clamp applied: Q_j' is limited to
/// [0, 3 min(P_{j−1}, P_j)] (one adjacent slope at the ends) and Q_j'' at a
/// clamped knot is replaced by the difference quotient of the limited first
/// derivatives of its neighbours.
pub fn knot_derivatives(series: &FuelSeries, p: &[f64]) -> KnotDerivatives {
    let mut kd = raw_knot_derivatives(series, p);
    let t = &series.t;
    let k = t.len() - 1;
    for j in 0..=k {
        let cap = match j {
            0 => 3.0 * p[0],
            _ if j == k => 3.0 * p[k - 1],
            _ => 3.0 * p[j - 1].min(p[j]),
        };
        let clamped = kd.d1[j].clamp(0.0, cap);
        if clamped != kd.d1[j] {
            kd.d1[j] = clamped;
            kd.limited[j] = true;
        }
    }
    for j in 0..=k {
        if !kd.limited[j] {
            continue;
        }
        kd.d2[j] = match j {
            0 => (kd.d1[1] - kd.d1[0]) / (t[1] - t[0]),
            _ if j == k => (kd.d1[k] - kd.d1[k - 1]) / (t[k] - t[k - 1]),
            _ => (kd.d1[j + 1] - kd.d1[j - 1]) / (t[j + 1] - t[j - 1]),
        };
    }
    kd
}

/// A cubic Hermite piece on [start, start + width].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermiteSegment {
    pub start: f64,
    pub width: f64,
    pub y0: f64,
    pub y1: f64,
    /// `y1 - y0` formed from the interval data rather than by subtracting the
    /// rounded endpoint values, so flat pieces high on the curve keep their precision.
    pub rise: f64,
    /// Derivatives scaled by the width (derivative in the local coordinate).
    pub m0: f64,
    pub m1: f64,
}

/// H_0, H_1, G_0, G_1 at local coordinate u.
fn hermite_basis(u: f64) -> [f64; 4] {
    let v = 1.0 - u;
    [v * v * (1.0 + 2.0 * u), u * u * (3.0 - 2.0 * u), u * v * v, -u * u * v]
}

impl HermiteSegment {
    fn new(start: f64, width: f64, (y0, y1, rise): (f64, f64, f64), d0: f64, d1: f64) -> Self {
        Self { start, width, y0, y1, rise, m0: width * d0, m1: width * d1 }
    }

    pub fn end(&self) -> f64 {
        self.start + self.width
    }

    /// Coefficients (A, B, C) of dp/du = A u² + B u + C.
    fn derivative_poly(&self) -> (f64, f64, f64) {
        let delta = self.rise;
        (
            -6.0 * delta + 3.0 * self.m0 + 3.0 * self.m1,
            6.0 * delta - 4.0 * self.m0 - 2.0 * self.m1,
            self.m0,
        )
    }

    pub fn value_at(&self, u: f64) -> f64 {
        let [h0, h1, g0, g1] = hermite_basis(u);
        self.y0 * h0 + self.y1 * h1 + self.m0 * g0 + self.m1 * g1
    }

    /// dQ/dT at local coordinate u.
    pub fn derivative_at(&self, u: f64) -> f64 {
        let (a, b, c) = self.derivative_poly();
        ((a * u + b) * u + c) / self.width
    }

    /// d²Q/dT² at local coordinate u.
    pub fn second_derivative_at(&self, u: f64) -> f64 {
        let (a, b, _) = self.derivative_poly();
        (2.0 * a * u + b) / (self.width * self.width)
    }

    /// Exact minimum of dp/du over [0, 1].
    fn min_local_derivative(&self) -> f64 {
        let (a, b, c) = self.derivative_poly();
        let mut lo = c.min(a + b + c);
        if a > 0.0 {
            let u = -b / (2.0 * a);
            if u > 0.0 && u < 1.0 {
                lo = lo.min(c - b * b / (4.0 * a));
            }
        }
        lo
    }

    /// Non-decreasing up to rounding relative to the piece's own scale.
    pub fn is_monotone(&self) -> bool {
        let scale = self.rise.abs() + self.m0.abs() + self.m1.abs();
        self.min_local_derivative() >= -1e-12 * scale
    }
}

/// Interior parameters of one interval, kept for inspection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub omega: f64,
    pub q_third: f64,
    pub q_two_thirds: f64,
}

fn interval_pieces(
    t0: f64,
    t1: f64,
    q0: f64,
    q1: f64,
    (m0, m1): (f64, f64),
    (s0, s1): (f64, f64),
) -> (IntervalParams, [HermiteSegment; 3]) {
    let h = t1 - t0;
    let p = (q1 - q0) / h;
    let a = m0 + h / 6.0 * s0;
    let d = m1 - h / 6.0 * s1;
    let omega = 3.0 * p - (m0 + m1) + h / 9.0 * (s1 - s0);
    let b = 0.5 * (a + omega);
    let c = 0.5 * (d + omega);
    let r1 = h / 9.0 * (m0 + 1.5 * a + 0.5 * omega);
    let r3 = h / 9.0 * (m1 + 1.5 * d + 0.5 * omega);
    let q13 = q0 + r1;
    let q23 = q1 - r3;
    let ta = t0 + h / 3.0;
    let tb = t0 + 2.0 * h / 3.0;
    let params = IntervalParams { a, b, c, d, omega, q_third: q13, q_two_thirds: q23 };
    (
        params,
        [
            HermiteSegment::new(t0, ta - t0, (q0, q13, r1), m0, b),
            HermiteSegment::new(ta, tb - ta, (q13, q23, (q1 - q0) - r1 - r3), b, c),
            HermiteSegment::new(tb, t1 - tb, (q23, q1, r3), c, m1),
        ],
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCurve {
    knots: Vec<f64>,
    values: Vec<f64>,
    derivatives: KnotDerivatives,
    params: Vec<IntervalParams>,
    segments: Vec<HermiteSegment>,
}

fn assemble(series: &FuelSeries, kd: &KnotDerivatives) -> (Vec<IntervalParams>, Vec<HermiteSegment>) {
    let n = series.len() - 1;
    let mut params = Vec::with_capacity(n);
    let mut segments = Vec::with_capacity(3 * n);
    for j in 0..n {
        let (ip, segs) = interval_pieces(
            series.t[j],
            series.t[j + 1],
            series.q[j],
            series.q[j + 1],
            (kd.d1[j], kd.d1[j + 1]),
            (kd.d2[j], kd.d2[j + 1]),
        );
        params.push(ip);
        segments.extend(segs);
    }
    (params, segments)
}

fn failing_intervals(segments: &[HermiteSegment]) -> Vec<usize> {
    segments
        .chunks(3)
        .enumerate()
        .filter(|(_, segs)| !segs.iter().all(HermiteSegment::is_monotone))
        .map(|(j, _)| j)
        .collect()
}

/// Build the C² monotone curve through `series`.
///
/// After the knot clamp, any interval whose pieces still dip is repaired by
/// damping the knot data at its two ends toward zero: second derivatives are
/// halved each round, first derivatives too once that alone has not helped,
/// and both are zeroed after repeated failure. All-zero knot data always
/// yields a non-decreasing interval, so every zeroing round clears at least
/// one more knot and the loop ends within one round per knot. The final
/// sweep checks the exact minimum of every piece's derivative.
pub fn build_curve(series: &FuelSeries) -> Result<MonotoneCurve> {
    let p = interval_slopes(series);
    let mut kd = knot_derivatives(series, &p);
    let (mut params, mut segments) = assemble(series, &kd);
    for round in 0..HALVING_ROUNDS + series.len() {
        let failing = failing_intervals(&segments);
        if failing.is_empty() {
            break;
        }
        for j in failing.into_iter().flat_map(|j| [j, j + 1]) {
            kd.limited[j] = true;
            if round >= HALVING_ROUNDS {
                kd.d1[j] = 0.0;
                kd.d2[j] = 0.0;
            } else {
                kd.d2[j] *= 0.5;
                if round >= 4 {
                    kd.d1[j] *= 0.5;
                }
            }
        }
        (params, segments) = assemble(series, &kd);
    }
    if let Some(&interval) = failing_intervals(&segments).first() {
        return Err(Error::NonMonotonicConstruction { interval });
    }
    Ok(MonotoneCurve {
        knots: series.t.clone(),
        values: series.q.clone(),
        derivatives: kd,
        params,
        segments,
    })
}

impl MonotoneCurve {
    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn knot_values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivatives(&self) -> &KnotDerivatives {
        &self.derivatives
    }

    pub fn params(&self) -> &[IntervalParams] {
        &self.params
    }

    /// Three pieces per interval, in time order.
    pub fn segments(&self) -> &[HermiteSegment] {
        &self.segments
    }

    fn locate(&self, t: f64) -> Result<(&HermiteSegment, f64)> {
        let (lo, hi) = self.domain();
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfDomain { t, t_min: lo, t_max: hi });
        }
        let interval = (self.knots.partition_point(|&k| k <= t).max(1) - 1).min(self.knots.len() - 2);
        let base = 3 * interval;
        let seg_idx = if t >= self.segments[base + 2].start {
            base + 2
        } else if t >= self.segments[base + 1].start {
            base + 1
        } else {
            base
        };
        let seg = &self.segments[seg_idx];
        Ok((seg, ((t - seg.start) / seg.width).clamp(0.0, 1.0)))
    }

    /// Cumulative fuel at `t`; exact at the knots.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if let Ok(i) = self.knots.binary_search_by(|k| k.total_cmp(&t)) {
            return Ok(self.values[i]);
        }
        let (seg, u) = self.locate(t)?;
        Ok(seg.value_at(u))
    }

    /// Instantaneous flow dQ/dT at `t`. Rounding-level negatives are
    /// reported as zero.
    pub fn flow(&self, t: f64) -> Result<f64> {
        let (seg, u) = self.locate(t)?;
        Ok(seg.derivative_at(u).max(0.0))
    }

    pub fn flow_rate(&self, t: f64) -> Result<f64> {
        let (seg, u) = self.locate(t)?;
        Ok(seg.second_derivative_at(u))
    }
}

pub fn eval_curve(curve: &MonotoneCurve, t: f64) -> Result<f64> {
    curve.eval(t)
}

pub fn eval_flow(curve: &MonotoneCurve, t: f64) -> Result<f64> {
    curve.flow(t)
}

/// Least-squares non-decreasing fit by pooling adjacent violators.
pub fn isotonic_increasing(values: &[f64]) -> Vec<f64> {
    // (mean, weight) blocks
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, w2) = blocks[blocks.len() - 1];
            let (m1, w1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let w = w1 + w2;
            *blocks.last_mut().unwrap() = ((m1 * w1 as f64 + m2 * w2 as f64) / w as f64, w);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, w)| std::iter::repeat_n(m, w))
        .collect()
}

/// Make a cumulative series strictly increasing with the smallest change:
/// pool violators to their mean, then lift ties by `REPAIR_EPSILON` steps.
/// Returns the repaired values and how many entries changed.
pub fn repair_cumulative(values: &[f64]) -> (Vec<f64>, usize) {
    let mut fixed = isotonic_increasing(values);
    for j in 1..fixed.len() {
        if fixed[j] <= fixed[j - 1] {
            fixed[j] = fixed[j - 1] + REPAIR_EPSILON;
        }
    }
    let changed = fixed.iter().zip(values).filter(|(a, b)| a != b).count();
    (fixed, changed)
}

/// Instantaneous flow reconstructed from cumulative interval predictions.
#[derive(Debug, Clone)]
pub struct InstantaneousFlow {
    pub series: FuelSeries,
    pub curve: MonotoneCurve,
    /// Number of cumulative predictions changed by the isotonic repair.
    pub repairs: usize,
    /// Track start time; curve time 0 corresponds to it.
    pub offset: f64,
}

impl InstantaneousFlow {
    /// Flow in kg/s at track time `t`.
    pub fn flow(&self, t: f64) -> Result<f64> {
        self.curve.flow(t - self.offset)
    }

    /// Cumulative fuel since track start at track time `t`.
    pub fn cumulative(&self, t: f64) -> Result<f64> {
        self.curve.eval(t - self.offset)
    }

    pub fn sample(&self, grid: &[f64]) -> Result<Vec<f64>> {
        grid.iter().map(|&t| self.flow(t)).collect()
    }
}

/// Breakpoints 0, step, 2·step, … ending exactly at `span`. A final
/// remainder shorter than half a step is merged into the previous interval.
pub fn cumulative_grid(span: f64, step: f64) -> Vec<f64> {
    let mut grid = vec![0.0];
    let mut j = 1;
    while (j as f64) * step < span {
        grid.push(j as f64 * step);
        j += 1;
    }
    if grid.len() > 1 && span - grid[grid.len() - 1] < 0.5 * step {
        grid.pop();
    }
    grid.push(span);
    grid
}

/// Predict cumulative fuel from track start at `step`-second breakpoints,
/// repair any non-monotone predictions and build the flow curve.
pub fn instantaneous_from_model(
    model: &WideDeepModel,
    track: &FlightTrack,
    step: f64,
) -> Result<InstantaneousFlow> {
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!("step {step} must be positive")));
    }
    let span = track.duration();
    if span < 3.0 * step {
        return Err(Error::InvalidInput(format!(
            "track span {span} s is shorter than 3 steps of {step} s"
        )));
    }
    let offset = track.start();
    let grid = cumulative_grid(span, step);
    let mut q = Vec::with_capacity(grid.len());
    q.push(0.0);
    for &t in &grid[1..] {
        q.push(predict_interval(model, track, offset, offset + t)?);
    }
    let (q, repairs) = repair_cumulative(&q);
    if repairs as f64 > MAX_REPAIR_FRACTION * grid.len() as f64 {
        return Err(Error::NonMonotoneModelOutput { repaired: repairs, total: grid.len() });
    }
    let series = FuelSeries::new(grid, q)?;
    let curve = build_curve(&series)?;
    Ok(InstantaneousFlow { series, curve, repairs, offset })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quadratic(n: usize) -> FuelSeries {
        let t: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.5).collect();
        let q = t.iter().map(|x| x * x).collect();
        FuelSeries::new(t, q).unwrap()
    }

    #[test]
    fn series_validation() {
        assert!(FuelSeries::new(vec![0.0, 1.0], vec![0.0, 1.0]).is_err());
        assert!(FuelSeries::new(vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 2.0]).is_err());
        assert!(FuelSeries::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn slopes_of_linear_and_quadratic_data() {
        let lin = FuelSeries::new(vec![0.0, 1.5, 4.0, 9.0], vec![0.0, 1.5, 4.0, 9.0]).unwrap();
        assert!(interval_slopes(&lin).iter().all(|&p| p == 1.0));
        let sq = quadratic(6);
        let p = interval_slopes(&sq);
        for (j, pj) in p.iter().enumerate() {
            let (a, b) = (sq.times()[j], sq.times()[j + 1]);
            assert!((pj - (a + b)).abs() < 1e-14);
        }
    }

    #[test]
    fn quadratic_knot_derivatives_exact() {
        let s = quadratic(8);
        let kd = knot_derivatives(&s, &interval_slopes(&s));
        for (j, &t) in s.times().iter().enumerate() {
            assert!((kd.d1[j] - 2.0 * t).abs() < 1e-12, "d1[{j}]");
            assert!((kd.d2[j] - 2.0).abs() < 1e-12, "d2[{j}]");
        }
        assert!(kd.limited.iter().all(|l| !l));
    }

    #[test]
    fn linear_series_reproduced() {
        let t = vec![0.0, 1.0, 3.0, 3.5, 7.0];
        let q: Vec<f64> = t.iter().map(|x| 2.0 * x + 5.0).collect();
        let s = FuelSeries::new(t, q).unwrap();
        let kd = knot_derivatives(&s, &interval_slopes(&s));
        assert!(kd.d1.iter().all(|d| (d - 2.0).abs() < 1e-14));
        assert!(kd.d2.iter().all(|d| d.abs() < 1e-14));
        let curve = build_curve(&s).unwrap();
        for i in 0..=700 {
            let x = i as f64 * 0.01;
            assert!((curve.eval(x).unwrap() - (2.0 * x + 5.0)).abs() < 1e-12);
            assert!((curve.flow(x).unwrap() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn near_flat_interval_is_clamped() {
        let t = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let q = vec![0.0, 1.0, 1.0 + 1e-6, 2.0 + 1e-6, 3.0 + 1e-6];
        let s = FuelSeries::new(t, q).unwrap();
        let kd = knot_derivatives(&s, &interval_slopes(&s));
        assert!(kd.d1[1] <= 3e-6 + 1e-18);
        assert!(kd.d1[2] <= 3e-6 + 1e-18);
        assert!(kd.limited[1] && kd.limited[2]);
        let curve = build_curve(&s).unwrap();
        for i in 0..=4000 {
            assert!(curve.flow(i as f64 * 1e-3).unwrap() >= 0.0);
        }
    }

    #[test]
    fn flat_stretch_far_from_zero_stays_monotone() {
        let t = vec![
            3970.199242772121,
            3970.845116959674,
            3971.003417289823,
            3971.783493367074,
            4853.678188880589,
            5426.082245134456,
            5426.3758490367045,
            6016.109747027622,
            6016.456267724914,
        ];
        let q = vec![
            4635.1080098848915,
            4636.111177042725,
            4636.111177201025,
            4701.108914300129,
            6365.9011444522885,
            6365.901716856345,
            6365.901717149949,
            6365.911446020562,
            6968.333738290756,
        ];
        let curve = build_curve(&FuelSeries::new(t.clone(), q).unwrap()).unwrap();
        assert!(curve.segments().iter().all(HermiteSegment::is_monotone));
        for w in t.windows(2) {
            for i in 0..=200 {
                let x = w[0] + (w[1] - w[0]) * i as f64 / 200.0;
                assert!(curve.flow(x).unwrap() >= 0.0, "flow at {x}");
            }
        }
    }

    #[test]
    fn out_of_domain() {
        let curve = build_curve(&quadratic(5)).unwrap();
        assert!(matches!(curve.eval(0.5), Err(Error::OutOfDomain { .. })));
        assert!(matches!(curve.flow(100.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn pava_pools_violators() {
        assert_eq!(isotonic_increasing(&[1.0, 3.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(isotonic_increasing(&[3.0, 2.0, 1.0]), vec![2.0, 2.0, 2.0]);
        let (fixed, changed) = repair_cumulative(&[0.0, 1.0, 3.0, 2.0, 4.0]);
        assert_eq!(changed, 2);
        assert!(fixed.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(fixed[2], 2.5);
        assert_eq!(fixed[3], 2.5 + REPAIR_EPSILON);
    }

    #[test]
    fn grid_merges_short_tail() {
        assert_eq!(cumulative_grid(650.0, 200.0), vec![0.0, 200.0, 400.0, 650.0]);
        assert_eq!(cumulative_grid(720.0, 200.0), vec![0.0, 200.0, 400.0, 600.0, 720.0]);
        assert_eq!(cumulative_grid(600.0, 200.0), vec![0.0, 200.0, 400.0, 600.0]);
    }

    fn arb_monotone() -> impl Strategy<Value = FuelSeries> {
        (3usize..30).prop_flat_map(|n| {
            (prop::collection::vec(0.01f64..10.0, n - 1), prop::collection::vec(1e-4f64..5.0, n - 1))
                .prop_map(|(dt, dq)| {
                    let mut t = vec![0.0];
                    let mut q = vec![0.0];
                    for (a, b) in dt.iter().zip(&dq) {
                        t.push(t[t.len() - 1] + a);
                        q.push(q[q.len() - 1] + b);
                    }
                    FuelSeries::new(t, q).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn curve_interpolates_and_is_monotone(s in arb_monotone()) {
            let curve = build_curve(&s).unwrap();
            for (t, q) in s.times().iter().zip(s.values()) {
                prop_assert_eq!(curve.eval(*t).unwrap(), *q);
            }
            let (lo, hi) = curve.domain();
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=500 {
                let t = (lo + (hi - lo) * i as f64 / 500.0).min(hi);
                prop_assert!(curve.flow(t).unwrap() >= 0.0);
                let v = curve.eval(t).unwrap();
                prop_assert!(v >= prev - 1e-12 * v.abs().max(1.0));
                prev = v;
            }
        }

        #[test]
        fn joints_are_c2(s in arb_monotone()) {
            let curve = build_curve(&s).unwrap();
            for w in curve.segments().windows(2) {
                let (l, r) = (w[0], w[1]);
                let size = |h: &HermiteSegment| h.rise.abs() + h.m0.abs() + h.m1.abs();
                let slope = (size(&l) / l.width).max(size(&r) / r.width);
                prop_assert!((l.value_at(1.0) - r.value_at(0.0)).abs() <= 1e-12 * l.y1.abs().max(1.0));
                prop_assert!((l.derivative_at(1.0) - r.derivative_at(0.0)).abs() <= 1e-12 * slope);
                let c2 = (size(&l) / (l.width * l.width)).max(size(&r) / (r.width * r.width));
                prop_assert!((l.second_derivative_at(1.0) - r.second_derivative_at(0.0)).abs() <= 1e-10 * c2);
            }
        }
    }
}
