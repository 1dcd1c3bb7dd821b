//! Cosine-series features of altitude and speed profiles.
//!
//! A profile sampled at times t_0..t_k is mapped to t* in [0, π] with a
//! fixed normalization constant T_M, linearly interpolated between samples,
//! set to zero on (t_k*, π] and extended evenly to [-π, π]. Its Fourier
//! series is then a pure cosine series whose coefficients have a closed form
//! in the samples.

use std::f64::consts::{FRAC_2_PI, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::trajectory::FlightTrack;

/// Re-seed the trigonometric recurrences from `sin_cos` this often.
const RESEED_EVERY: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSeries {
    tstar: Vec<f64>,
    values: Vec<f64>,
    t_max: f64,
}

impl NormalizedSeries {
    pub fn new(tstar: Vec<f64>, values: Vec<f64>, t_max: f64) -> Result<Self> {
        if tstar.len() != values.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} times vs {} values",
                tstar.len(),
                values.len()
            )));
        }
        if tstar.len() < 2 {
            return Err(Error::EmptyTrack);
        }
        if tstar[0] != 0.0 {
            return Err(Error::InvalidInput("normalized series must start at 0".into()));
        }
        if tstar.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("normalized times must be strictly increasing".into()));
        }
        if tstar[tstar.len() - 1] > PI {
            return Err(Error::SpanExceedsTM {
                span: tstar[tstar.len() - 1] / PI * t_max,
                t_max,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("series values must be finite".into()));
        }
        Ok(Self { tstar, values, t_max })
    }

    /// Normalize raw times and pair them with `values`.
    pub fn from_times(times: &[f64], values: &[f64], t_max: f64) -> Result<Self> {
        Self::new(normalize_time(times, t_max)?, values.to_vec(), t_max)
    }

    pub fn tstar(&self) -> &[f64] {
        &self.tstar
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// The piecewise-linear, zero-extended function on [0, π].
    pub fn eval(&self, tstar: f64) -> f64 {
        let ts = &self.tstar;
        let last = ts.len() - 1;
        if tstar < 0.0 || tstar > ts[last] {
            return 0.0;
        }
        if tstar == ts[last] {
            return self.values[last];
        }
        let j = ts.partition_point(|&x| x <= tstar) - 1;
        let w = (tstar - ts[j]) / (ts[j + 1] - ts[j]);
        self.values[j] + w * (self.values[j + 1] - self.values[j])
    }
}

/// t_i* = (t_i - t_0) π / T_M.
pub fn normalize_time(times: &[f64], t_max: f64) -> Result<Vec<f64>> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidInput(format!("T_M = {t_max} must be positive")));
    }
    let Some(&t0) = times.first() else {
        return Ok(Vec::new());
    };
    let span = times[times.len() - 1] - t0;
    if span > t_max {
        return Err(Error::SpanExceedsTM { span, t_max });
    }
    Ok(times.iter().map(|&t| (t - t0) / t_max * PI).collect())
}

/// Rotating (cos nθ, sin nθ) for a batch of angles θ, advanced one n at a time.
struct Harmonics {
    angles: Vec<f64>,
    step: Vec<(f64, f64)>,
    cur: Vec<(f64, f64)>,
    n: usize,
}

impl Harmonics {
    fn new(angles: Vec<f64>) -> Self {
        let step: Vec<_> = angles.iter().map(|a| {
            let (s, c) = a.sin_cos();
            (c, s)
        }).collect();
        let cur = step.clone();
        Self { angles, step, cur, n: 1 }
    }

    fn advance(&mut self) {
        self.n += 1;
        if self.n % RESEED_EVERY == 0 {
            let n = self.n as f64;
            for (c, a) in self.cur.iter_mut().zip(&self.angles) {
                let (s, co) = (n * a).sin_cos();
                *c = (co, s);
            }
        } else {
            for (c, s) in self.cur.iter_mut().zip(&self.step) {
                *c = (c.0 * s.0 - c.1 * s.1, c.1 * s.0 + c.0 * s.1);
            }
        }
    }
}

/// Closed-form cosine coefficients α_0..α_N of the piecewise-linear,
/// zero-extended series.
///
/// Per segment j with slope M_j:
/// α_n = (2/π) Σ_j [ M_j (cos n t*_{j+1} − cos n t*_j) / n² + (f_{j+1} sin n t*_{j+1} − f_j sin n t*_j) / n ]
/// and α_0 is the trapezoid area times 2/π. The cosine difference is
/// evaluated as −2 sin(n m_j) sin(n δ_j / 2) to avoid cancellation on short
/// segments. The zero tail contributes nothing.
pub fn fourier_closed_form(series: &NormalizedSeries, n_max: usize) -> Vec<f64> {
    let ts = &series.tstar;
    let fs = &series.values;
    let k = ts.len() - 1;
    let mut coeffs = Vec::with_capacity(n_max + 1);

    let mut area = 0.0;
    for j in 0..k {
        area += (fs[j + 1] + fs[j]) * (ts[j + 1] - ts[j]) / 2.0;
    }
    coeffs.push(FRAC_2_PI * area);
    if n_max == 0 {
        return coeffs;
    }

    let slopes: Vec<f64> = (0..k).map(|j| (fs[j + 1] - fs[j]) / (ts[j + 1] - ts[j])).collect();
    let mut knots = Harmonics::new(ts.clone());
    let mut mids = Harmonics::new((0..k).map(|j| 0.5 * (ts[j] + ts[j + 1])).collect());
    let mut halves = Harmonics::new((0..k).map(|j| 0.5 * (ts[j + 1] - ts[j])).collect());

    for n in 1..=n_max {
        if n > 1 {
            knots.advance();
            mids.advance();
            halves.advance();
        }
        let nf = n as f64;
        let inv_n = 1.0 / nf;
        let inv_n2 = inv_n * inv_n;
        let mut acc = 0.0;
        for j in 0..k {
            let ct = -2.0 * mids.cur[j].1 * halves.cur[j].1;
            let nt = fs[j + 1] * knots.cur[j + 1].1 - fs[j] * knots.cur[j].1;
            acc += slopes[j] * ct * inv_n2 + nt * inv_n;
        }
        coeffs.push(FRAC_2_PI * acc);
    }
    coeffs
}

/// Cosine coefficients by direct numerical integration of the
/// piecewise-linear function: 8-point Gauss–Legendre on each linear piece,
/// with panels no wider than one radian of the integrand's oscillation.
pub fn fourier_quadrature(series: &NormalizedSeries, n_max: usize) -> Vec<f64> {
    let rule = GaussLegendre::new(8);
    let ts = &series.tstar;
    let fs = &series.values;
    (0..=n_max)
        .map(|n| {
            let nf = n as f64;
            let mut acc = 0.0;
            for j in 0..ts.len() - 1 {
                let (a, b) = (ts[j], ts[j + 1]);
                let (fa, fb) = (fs[j], fs[j + 1]);
                let panels = ((nf * (b - a)).ceil() as usize).max(1);
                acc += rule.integrate_composite(a, b, panels, |t| {
                    let f = fa + (fb - fa) * ((t - a) / (b - a));
                    f * (nf * t).cos()
                });
            }
            FRAC_2_PI * acc
        })
        .collect()
}

/// α_0/2 + Σ α_n cos(n t*).
pub fn reconstruct(coefficients: &[f64], tstar: f64) -> f64 {
    let Some((&a0, rest)) = coefficients.split_first() else {
        return 0.0;
    };
    let mut acc = a0 / 2.0;
    for (i, a) in rest.iter().enumerate() {
        acc += a * ((i + 1) as f64 * tstar).cos();
    }
    acc
}

/// Truncated coefficient vectors for one track or segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFeature {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Segment duration, seconds.
    pub t0: f64,
    #[serde(rename = "T_M")]
    pub t_max: f64,
}

impl SpectralFeature {
    pub fn n_h(&self) -> usize {
        self.alpha.len().saturating_sub(1)
    }

    pub fn n_v(&self) -> usize {
        self.beta.len().saturating_sub(1)
    }
}

pub fn featurize(track: &FlightTrack, n_h: usize, n_v: usize, t_max: f64) -> Result<SpectralFeature> {
    let times = track.times();
    let tstar = normalize_time(&times, t_max)?;
    let alt = NormalizedSeries::new(tstar.clone(), track.altitudes(), t_max)?;
    let gs = NormalizedSeries::new(tstar, track.speeds(), t_max)?;
    Ok(SpectralFeature {
        alpha: fourier_closed_form(&alt, n_h),
        beta: fourier_closed_form(&gs, n_v),
        t0: track.duration(),
        t_max,
    })
}
