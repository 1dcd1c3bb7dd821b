//! Error metrics, grouped evaluation reports, and log-log convergence fits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::ShapeMismatch(format!("{a} predictions vs {b} reference values")));
    }
    if a == 0 {
        return Err(Error::InvalidInput("no values to compare".into()));
    }
    Ok(())
}

/// Mean absolute percentage error, as a fraction.
pub fn mape(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred.len(), truth.len())?;
    let mut sum = 0.0;
    for (i, (p, t)) in pred.iter().zip(truth).enumerate() {
        if *t == 0.0 {
            return Err(Error::ZeroTruth(i));
        }
        sum += ((p - t) / t).abs();
    }
    Ok(sum / pred.len() as f64)
}

fn trapezoid_sq(grid: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    grid.windows(2)
        .enumerate()
        .map(|(i, w)| 0.5 * (w[1] - w[0]) * (f(i).powi(2) + f(i + 1).powi(2)))
        .sum()
}

/// ‖f − f_ref‖ / ‖f_ref‖ in L2 over `grid`, trapezoid rule.
pub fn rel_l2(f: &[f64], f_ref: &[f64], grid: &[f64]) -> Result<f64> {
    check_lengths(f.len(), f_ref.len())?;
    check_lengths(f.len(), grid.len())?;
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("grid must be strictly increasing with at least 2 points".into()));
    }
    let den = trapezoid_sq(grid, |i| f_ref[i]);
    if !(den > 0.0) {
        return Err(Error::ZeroReference);
    }
    let num = trapezoid_sq(grid, |i| f[i] - f_ref[i]);
    Ok((num / den).sqrt())
}

/// Discrete relative L2 error over paired samples.
pub fn rel_l2_discrete(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred.len(), truth.len())?;
    let den: f64 = truth.iter().map(|t| t * t).sum();
    if !(den > 0.0) {
        return Err(Error::ZeroReference);
    }
    let num: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum();
    Ok((num / den).sqrt())
}

/// Signed least-squares slope m of log(error) = m·log(size) + c.
/// Decaying errors give m < 0; rates are usually quoted as |m|.
pub fn convergence_slope(sizes: &[f64], errors: &[f64]) -> Result<f64> {
    check_lengths(sizes.len(), errors.len())?;
    if sizes.len() < 3 {
        return Err(Error::InvalidInput("need at least 3 points for a slope".into()));
    }
    if sizes.iter().chain(errors).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidInput("sizes and errors must be positive".into()));
    }
    let x: Vec<f64> = sizes.iter().map(|s| s.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    if sxx <= 1e-300 {
        return Err(Error::DegenerateFit("all sizes are equal".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    Ok(sxy / sxx)
}

/// What an [`EvalReport`] row aggregates over.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupKey {
    All,
    AircraftType { name: String },
    /// Durations in [lo, hi) seconds.
    Duration { lo: u64, hi: u64 },
}

impl std::fmt::Display for GroupKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GroupKey::All => write!(f, "all"),
            GroupKey::AircraftType { name } => write!(f, "type={name}"),
            GroupKey::Duration { lo, hi } => write!(f, "duration={lo}-{hi}s"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub group: GroupKey,
    pub n: usize,
    pub mape: f64,
    pub rel_l2: f64,
}

/// One scored prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub aircraft_type: String,
    pub duration: f64,
    pub pred: f64,
    pub truth: f64,
}

/// Lower edge of the first duration bucket; buckets double from here.
pub const BUCKET_BASE: f64 = 100.0;

pub fn duration_bucket(duration: f64) -> GroupKey {
    let k = (duration / BUCKET_BASE).log2().floor().max(0.0) as i32;
    let lo = if k == 0 { 0.0 } else { BUCKET_BASE * 2f64.powi(k) };
    GroupKey::Duration { lo: lo as u64, hi: (BUCKET_BASE * 2f64.powi(k + 1)) as u64 }
}

fn report(group: GroupKey, rows: &[&Scored]) -> Result<EvalReport> {
    let pred: Vec<f64> = rows.iter().map(|r| r.pred).collect();
    let truth: Vec<f64> = rows.iter().map(|r| r.truth).collect();
    Ok(EvalReport { group, n: rows.len(), mape: mape(&pred, &truth)?, rel_l2: rel_l2_discrete(&pred, &truth)? })
}

/// Overall row, then one row per aircraft type, then one per duration
/// bucket (log-spaced, doubling).
pub fn evaluate(rows: &[Scored]) -> Result<Vec<EvalReport>> {
    let all: Vec<&Scored> = rows.iter().collect();
    let mut out = vec![report(GroupKey::All, &all)?];
    let mut by_type: BTreeMap<GroupKey, Vec<&Scored>> = BTreeMap::new();
    let mut by_duration: BTreeMap<GroupKey, Vec<&Scored>> = BTreeMap::new();
    for r in rows {
        by_type
            .entry(GroupKey::AircraftType { name: r.aircraft_type.clone() })
            .or_default()
            .push(r);
        by_duration.entry(duration_bucket(r.duration)).or_default().push(r);
    }
    for (key, group) in by_type.into_iter().chain(by_duration) {
        out.push(report(key, &group)?);
    }
    Ok(out)
}
