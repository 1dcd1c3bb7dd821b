//! Synthetic ground truth: a closed-form fuel law, smooth climb / cruise /
//! descent flights sampled like surveillance tracks, and an accurate
//! quadrature of the law along the continuous profile.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuelnet::TrainingSample;
use crate::quadrature::GaussLegendre;
use crate::seed::{self, Stream};
use crate::spectral::featurize;
use crate::trajectory::{slice_track, AircraftMeta, FlightTrack, TrackPoint};

/// Reference altitude of the altitude-relief term, meters.
pub const H_REF: f64 = 12_000.0;
const EARTH_RADIUS: f64 = 6_371_000.0;
/// Half width of the smooth hand-over between per-phase noise levels.
const NOISE_BLEND: f64 = 60.0;
const WAVES: usize = 3;
const WAVE_PERIOD: (f64, f64) = (400.0, 1500.0);

/// q = (c0 + c1·max(h′,0) + c2·v² + c3·max(v′,0)·v)·(1 − c4·h/H_REF)
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuelLaw {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl FuelLaw {
    pub fn constant(c0: f64) -> Self {
        Self { c0, c1: 0.0, c2: 0.0, c3: 0.0, c4: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.c0 > 0.0
            && [self.c1, self.c2, self.c3].iter().all(|c| c.is_finite() && *c >= 0.0)
            && (0.0..=0.5).contains(&self.c4);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("fuel law {self:?} out of range")))
        }
    }

    pub fn rate(&self, h: f64, dh: f64, v: f64, dv: f64) -> f64 {
        let q = (self.c0 + self.c1 * dh.max(0.0) + self.c2 * v * v + self.c3 * dv.max(0.0) * v)
            * (1.0 - self.c4 * h / H_REF);
        q.max(0.01 * self.c0)
    }
}

/// Instantaneous burn in kg/s.
pub fn q_true(law: &FuelLaw, h: f64, dh: f64, v: f64, dv: f64) -> f64 {
    law.rate(h, dh, v, dv)
}

/// Flight plan of one synthetic flight. Noise levels are given per phase
/// (climb, cruise, descent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseProfile {
    pub climb_duration: f64,
    pub cruise_altitude: f64,
    pub cruise_speed: f64,
    pub cruise_duration: f64,
    pub descent_duration: f64,
    pub initial_speed: f64,
    pub final_speed: f64,
    pub altitude_noise: [f64; 3],
    pub speed_noise: [f64; 3],
    /// Half width of the rounded phase corners, seconds.
    pub corner_width: f64,
    pub sample_interval: f64,
    pub lat0: f64,
    pub lon0: f64,
    pub heading_deg: f64,
    pub seed: u64,
}

impl Default for PhaseProfile {
    fn default() -> Self {
        Self {
            climb_duration: 1205.0,
            cruise_altitude: 10_500.0,
            cruise_speed: 225.0,
            cruise_duration: 1800.0,
            descent_duration: 1200.0,
            initial_speed: 80.0,
            final_speed: 75.0,
            altitude_noise: [0.0; 3],
            speed_noise: [0.0; 3],
            corner_width: 4.0,
            sample_interval: 10.0,
            lat0: 30.0,
            lon0: 120.0,
            heading_deg: 45.0,
            seed: 0,
        }
    }
}

impl PhaseProfile {
    pub fn climb_rate(&self) -> f64 {
        self.cruise_altitude / self.climb_duration
    }

    pub fn descent_rate(&self) -> f64 {
        self.cruise_altitude / self.descent_duration
    }

    pub fn duration(&self) -> f64 {
        self.climb_duration + self.cruise_duration + self.descent_duration
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidInput(format!("profile: {what}")));
        let margin = 2.0 * self.corner_width.max(NOISE_BLEND);
        if !(self.sample_interval > 0.0) {
            return bad("sample interval must be positive");
        }
        if !(self.corner_width >= 0.0) {
            return bad("corner width must be non-negative");
        }
        for d in [self.climb_duration, self.cruise_duration, self.descent_duration] {
            if !(d > margin && d.is_finite()) {
                return bad("phase shorter than its smoothing windows");
            }
        }
        if !(self.cruise_altitude > 0.0 && self.cruise_speed > 0.0) {
            return bad("cruise altitude and speed must be positive");
        }
        let noise_ok = |levels: &[f64; 3]| levels.iter().all(|a| a.is_finite() && *a >= 0.0);
        if !noise_ok(&self.altitude_noise) || !noise_ok(&self.speed_noise) {
            return bad("noise levels must be non-negative");
        }
        let floor = self.initial_speed.min(self.final_speed).min(self.cruise_speed);
        if !(floor > 2.0 * self.speed_noise.iter().cloned().fold(0.0, f64::max)) {
            return bad("speeds must stay well above the speed noise");
        }
        if !(self.lat0.abs() < 80.0 && self.lon0.is_finite() && self.heading_deg.is_finite()) {
            return bad("origin or heading invalid");
        }
        Ok(())
    }
}

/// Smooth ramp r_w(x): zero left of -w, identity right of w, a quadratic
/// blend in between (C¹).
fn ramp(x: f64, w: f64) -> f64 {
    if x <= -w {
        0.0
    } else if x >= w {
        x
    } else {
        (x + w) * (x + w) / (4.0 * w)
    }
}

fn ramp_slope(x: f64, w: f64) -> f64 {
    if x <= -w {
        0.0
    } else if x >= w {
        1.0
    } else {
        (x + w) / (2.0 * w)
    }
}

/// Piecewise-linear signal with rounded corners.
#[derive(Debug, Clone, PartialEq)]
struct Polyline {
    y0: f64,
    s0: f64,
    /// (corner time, change in slope)
    corners: Vec<(f64, f64)>,
    width: f64,
}

impl Polyline {
    fn value(&self, t: f64) -> f64 {
        self.corners
            .iter()
            .fold(self.y0 + self.s0 * t, |acc, &(tc, ds)| acc + ds * ramp(t - tc, self.width))
    }

    fn slope(&self, t: f64) -> f64 {
        self.corners
            .iter()
            .fold(self.s0, |acc, &(tc, ds)| acc + ds * ramp_slope(t - tc, self.width))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Wave {
    amp: f64,
    omega: f64,
    phase: f64,
}

/// Sum of sinusoids under a per-phase level envelope.
#[derive(Debug, Clone, PartialEq)]
struct Noise {
    waves: Vec<Wave>,
    levels: [f64; 3],
    edges: [f64; 2],
}

fn smoothstep(x: f64) -> (f64, f64) {
    if x <= 0.0 {
        (0.0, 0.0)
    } else if x >= 1.0 {
        (1.0, 0.0)
    } else {
        (x * x * (3.0 - 2.0 * x), 6.0 * x * (1.0 - x))
    }
}

impl Noise {
    fn new<R: Rng>(rng: &mut R, levels: [f64; 3], edges: [f64; 2]) -> Self {
        let mut waves: Vec<Wave> = (0..WAVES)
            .map(|_| Wave {
                amp: rng.gen_range(0.5..1.0),
                omega: 2.0 * std::f64::consts::PI / rng.gen_range(WAVE_PERIOD.0..WAVE_PERIOD.1),
                phase: rng.gen_range(0.0..2.0 * std::f64::consts::PI),
            })
            .collect();
        let total: f64 = waves.iter().map(|w| w.amp).sum();
        for w in &mut waves {
            w.amp /= total;
        }
        Self { waves, levels, edges }
    }

    fn envelope(&self, t: f64) -> (f64, f64) {
        let mut e = self.levels[0];
        let mut de = 0.0;
        for (k, &edge) in self.edges.iter().enumerate() {
            let (s, ds) = smoothstep((t - edge + NOISE_BLEND) / (2.0 * NOISE_BLEND));
            let jump = self.levels[k + 1] - self.levels[k];
            e += jump * s;
            de += jump * ds / (2.0 * NOISE_BLEND);
        }
        (e, de)
    }

    fn eval(&self, t: f64) -> (f64, f64) {
        if self.levels.iter().all(|&l| l == 0.0) {
            return (0.0, 0.0);
        }
        let (e, de) = self.envelope(t);
        let (mut s, mut ds) = (0.0, 0.0);
        for w in &self.waves {
            let (sin, cos) = (w.omega * t + w.phase).sin_cos();
            s += w.amp * sin;
            ds += w.amp * w.omega * cos;
        }
        (e * s, de * s + e * ds)
    }
}

/// Altitude (m), climb rate (m/s), speed (m/s) and acceleration (m/s²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightState {
    pub h: f64,
    pub dh: f64,
    pub v: f64,
    pub dv: f64,
}

/// A generated flight: continuous profile plus its sampled track.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFlight {
    profile: PhaseProfile,
    altitude: Polyline,
    speed: Polyline,
    altitude_noise: Noise,
    speed_noise: Noise,
    track: FlightTrack,
}

impl SyntheticFlight {
    pub fn new(profile: PhaseProfile, meta: AircraftMeta) -> Result<Self> {
        profile.validate()?;
        meta.validate()?;
        let t1 = profile.climb_duration;
        let t2 = t1 + profile.cruise_duration;
        let w = profile.corner_width;
        let altitude = Polyline {
            y0: 0.0,
            s0: profile.climb_rate(),
            corners: vec![(t1, -profile.climb_rate()), (t2, -profile.descent_rate())],
            width: w,
        };
        let climb_accel = (profile.cruise_speed - profile.initial_speed) / profile.climb_duration;
        let descent_accel = (profile.final_speed - profile.cruise_speed) / profile.descent_duration;
        let speed = Polyline {
            y0: profile.initial_speed,
            s0: climb_accel,
            corners: vec![(t1, -climb_accel), (t2, descent_accel)],
            width: w,
        };
        let mut rng = seed::rng(profile.seed, Stream::Synth, 0);
        let altitude_noise = Noise::new(&mut rng, profile.altitude_noise, [t1, t2]);
        let speed_noise = Noise::new(&mut rng, profile.speed_noise, [t1, t2]);
        let mut flight = Self {
            profile,
            altitude,
            speed,
            altitude_noise,
            speed_noise,
            track: FlightTrack { meta, points: Vec::new() },
        };
        flight.track.points = flight.sample_points();
        Ok(flight)
    }

    pub fn profile(&self) -> &PhaseProfile {
        &self.profile
    }

    pub fn track(&self) -> &FlightTrack {
        &self.track
    }

    pub fn into_track(self) -> FlightTrack {
        self.track
    }

    pub fn duration(&self) -> f64 {
        self.profile.duration()
    }

    pub fn state(&self, t: f64) -> FlightState {
        let (hn, dhn) = self.altitude_noise.eval(t);
        let (vn, dvn) = self.speed_noise.eval(t);
        FlightState {
            h: self.altitude.value(t) + hn,
            dh: self.altitude.slope(t) + dhn,
            v: self.speed.value(t) + vn,
            dv: self.speed.slope(t) + dvn,
        }
    }

    pub fn fuel_rate(&self, law: &FuelLaw, t: f64) -> f64 {
        let s = self.state(t);
        law.rate(s.h, s.dh, s.v, s.dv)
    }

    /// Sample times: multiples of the sample interval plus the end.
    pub fn sample_times(&self) -> Vec<f64> {
        let dt = self.profile.sample_interval;
        let end = self.duration();
        let mut ts: Vec<f64> = (0..).map(|k| k as f64 * dt).take_while(|&t| t < end - 1e-6 * dt).collect();
        ts.push(end);
        ts
    }

    fn sample_points(&self) -> Vec<TrackPoint> {
        let gl = GaussLegendre::new(5);
        let p = &self.profile;
        let heading = p.heading_deg.to_radians();
        let deg_per_m = 180.0 / (std::f64::consts::PI * EARTH_RADIUS);
        let mut dist = 0.0;
        let mut prev = 0.0;
        self.sample_times()
            .into_iter()
            .map(|t| {
                dist += gl.integrate(prev, t, |s| self.state(s).v);
                prev = t;
                let st = self.state(t);
                let lat = p.lat0 + dist * heading.cos() * deg_per_m;
                let lon = p.lon0 + dist * heading.sin() * deg_per_m / p.lat0.to_radians().cos();
                TrackPoint { t, lat, lon: (lon + 180.0).rem_euclid(360.0) - 180.0, alt: st.h, gs: st.v }
            })
            .collect()
    }

    /// Points where the integrand may lose smoothness: corner windows,
    /// noise hand-overs, and the sample grid.
    fn panel_edges(&self, t_a: f64, t_b: f64) -> Vec<f64> {
        let w = self.profile.corner_width;
        let mut edges = vec![t_a, t_b];
        for &(tc, _) in &self.altitude.corners {
            edges.extend([tc - w, tc + w, tc - NOISE_BLEND, tc + NOISE_BLEND]);
        }
        edges.extend(self.sample_times());
        edges.retain(|&e| e >= t_a && e <= t_b);
        edges.sort_by(f64::total_cmp);
        edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        edges
    }
}

pub fn generate_track(profile: &PhaseProfile, meta: &AircraftMeta) -> Result<FlightTrack> {
    Ok(SyntheticFlight::new(profile.clone(), meta.clone())?.into_track())
}

fn bisect_root<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sign changes of the climb rate and acceleration inside a panel, where
/// the law has kinks.
fn kinks(flight: &SyntheticFlight, law: &FuelLaw, a: f64, b: f64, out: &mut Vec<f64>) {
    const PROBES: usize = 4;
    let probes: Vec<(f64, FlightState)> = (0..=PROBES)
        .map(|i| {
            let t = a + (b - a) * i as f64 / PROBES as f64;
            (t, flight.state(t))
        })
        .collect();
    for pair in probes.windows(2) {
        let ((t0, s0), (t1, s1)) = (pair[0], pair[1]);
        if law.c1 > 0.0 && (s0.dh > 0.0) != (s1.dh > 0.0) {
            out.push(bisect_root(|t| flight.state(t).dh, t0, t1));
        }
        if law.c3 > 0.0 && (s0.dv > 0.0) != (s1.dv > 0.0) {
            out.push(bisect_root(|t| flight.state(t).dv, t0, t1));
        }
    }
}

/// Fuel burned over [t_a, t_b] with an `order`-point Gauss rule on every
/// smooth piece.
pub fn integrate_fuel_with_order(
    law: &FuelLaw,
    flight: &SyntheticFlight,
    t_a: f64,
    t_b: f64,
    order: usize,
) -> Result<f64> {
    let end = flight.duration();
    if !(t_a >= 0.0 && t_a <= t_b && t_b <= end * (1.0 + 1e-12)) {
        return Err(Error::OutOfDomain { t: if t_a < 0.0 { t_a } else { t_b }, t_min: 0.0, t_max: end });
    }
    let t_b = t_b.min(end);
    let gl = GaussLegendre::new(order);
    let edges = flight.panel_edges(t_a, t_b);
    let mut total = 0.0;
    let mut cuts = Vec::new();
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        cuts.clear();
        cuts.push(a);
        kinks(flight, law, a, b, &mut cuts);
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        for piece in cuts.windows(2) {
            total += gl.integrate(piece[0], piece[1], |t| flight.fuel_rate(law, t));
        }
    }
    Ok(total)
}

/// Fuel burned over [t_a, t_b], kg.
pub fn integrate_fuel(law: &FuelLaw, flight: &SyntheticFlight, t_a: f64, t_b: f64) -> Result<f64> {
    integrate_fuel_with_order(law, flight, t_a, t_b, 5)
}

/// One synthetic aircraft type: its law and the envelope its flights use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AircraftClass {
    pub name: String,
    pub law: FuelLaw,
    pub wingspan: f64,
    /// Relative share of the dataset.
    pub weight: f64,
    pub cruise_altitude: (f64, f64),
    pub cruise_speed: (f64, f64),
}

/// Ranges the per-flight profile parameters are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProfileRanges {
    pub climb_duration: (f64, f64),
    pub cruise_duration: (f64, f64),
    pub descent_duration: (f64, f64),
    pub initial_speed: (f64, f64),
    pub final_speed: (f64, f64),
    pub altitude_noise: (f64, f64),
    pub speed_noise: (f64, f64),
    pub age: (f64, f64),
    pub sample_interval: f64,
}

impl Default for ProfileRanges {
    fn default() -> Self {
        Self {
            climb_duration: (900.0, 1800.0),
            cruise_duration: (300.0, 2700.0),
            descent_duration: (900.0, 1500.0),
            initial_speed: (75.0, 90.0),
            final_speed: (70.0, 85.0),
            altitude_noise: (10.0, 40.0),
            speed_noise: (0.5, 3.0),
            age: (0.0, 25.0),
            sample_interval: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub classes: Vec<AircraftClass>,
    pub ranges: ProfileRanges,
    /// Share of samples covering a whole flight.
    pub whole_fraction: f64,
    /// Share of samples covering [0, t] of a flight.
    pub prefix_fraction: f64,
    pub min_segment: f64,
    #[serde(rename = "T_M")]
    pub t_max: f64,
}

fn class(name: &str, law: FuelLaw, wingspan: f64, alt: (f64, f64), speed: (f64, f64)) -> AircraftClass {
    AircraftClass { name: name.into(), law, wingspan, weight: 1.0, cruise_altitude: alt, cruise_speed: speed }
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            classes: vec![
                class(
                    "narrow",
                    FuelLaw { c0: 0.22, c1: 0.085, c2: 8.5e-6, c3: 2.5e-3, c4: 0.30 },
                    35.8,
                    (9_500.0, 10_500.0),
                    (214.0, 228.0),
                ),
                class(
                    "regional",
                    FuelLaw { c0: 0.16, c1: 0.065, c2: 7.0e-6, c3: 2.0e-3, c4: 0.25 },
                    28.7,
                    (7_000.0, 8_500.0),
                    (185.0, 205.0),
                ),
                class(
                    "wide",
                    FuelLaw { c0: 0.40, c1: 0.15, c2: 1.5e-5, c3: 4.5e-3, c4: 0.35 },
                    60.3,
                    (11_000.0, 12_000.0),
                    (234.0, 248.0),
                ),
            ],
            ranges: ProfileRanges::default(),
            whole_fraction: 0.2,
            prefix_fraction: 0.3,
            min_segment: 200.0,
            t_max: 7200.0,
        }
    }
}

fn draw<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(Error::InvalidInput("synth config has no aircraft classes".into()));
        }
        for c in &self.classes {
            c.law.validate()?;
            if !(c.weight >= 0.0 && c.wingspan > 0.0) {
                return Err(Error::InvalidInput(format!("class {} has invalid weight or wingspan", c.name)));
            }
        }
        if !(self.classes.iter().map(|c| c.weight).sum::<f64>() > 0.0) {
            return Err(Error::InvalidInput("class weights sum to zero".into()));
        }
        let f = self.whole_fraction + self.prefix_fraction;
        if !(self.whole_fraction >= 0.0 && self.prefix_fraction >= 0.0 && f <= 1.0) {
            return Err(Error::InvalidInput("segment fractions must be in [0, 1]".into()));
        }
        let r = &self.ranges;
        let shortest = r.climb_duration.0 + r.cruise_duration.0 + r.descent_duration.0;
        if !(self.min_segment > 0.0 && self.min_segment <= shortest) {
            return Err(Error::InvalidInput("min_segment longer than the shortest flight".into()));
        }
        if self.max_duration() > self.t_max {
            return Err(Error::SpanExceedsTM { span: self.max_duration(), t_max: self.t_max });
        }
        Ok(())
    }

    /// Longest flight the ranges can produce.
    pub fn max_duration(&self) -> f64 {
        let r = &self.ranges;
        r.climb_duration.1 + r.cruise_duration.1 + r.descent_duration.1 + r.sample_interval
    }

    pub fn type_vocabulary(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.name.clone()).collect()
    }

    fn pick_class<R: Rng>(&self, rng: &mut R) -> usize {
        let total: f64 = self.classes.iter().map(|c| c.weight).sum();
        let mut u = rng.gen_range(0.0..total);
        for (i, c) in self.classes.iter().enumerate() {
            if u < c.weight {
                return i;
            }
            u -= c.weight;
        }
        self.classes.len() - 1
    }

    /// Draw a flight plan. Phase corners fall halfway between samples so a
    /// noise-free track is exactly trapezoidal at the sample times.
    pub fn random_profile<R: Rng>(&self, class: usize, rng: &mut R) -> PhaseProfile {
        let r = &self.ranges;
        let c = &self.classes[class];
        let dt = r.sample_interval;
        let snap = |d: f64| (d / dt).round().max(1.0) * dt;
        let noise = |rng: &mut R, range| [draw(rng, range), draw(rng, range), draw(rng, range)];
        PhaseProfile {
            climb_duration: snap(draw(rng, r.climb_duration)) + 0.5 * dt,
            cruise_altitude: draw(rng, c.cruise_altitude),
            cruise_speed: draw(rng, c.cruise_speed),
            cruise_duration: snap(draw(rng, r.cruise_duration)),
            descent_duration: snap(draw(rng, r.descent_duration)),
            initial_speed: draw(rng, r.initial_speed),
            final_speed: draw(rng, r.final_speed),
            altitude_noise: noise(rng, r.altitude_noise),
            speed_noise: noise(rng, r.speed_noise),
            corner_width: 0.4 * dt,
            sample_interval: dt,
            lat0: rng.gen_range(20.0..50.0),
            lon0: rng.gen_range(-120.0..140.0),
            heading_deg: rng.gen_range(0.0..360.0),
            seed: rng.gen(),
        }
    }

    /// The `index`-th flight of the stream keyed by `seed`, with its class.
    pub fn flight(&self, seed: u64, index: u64) -> Result<(SyntheticFlight, usize)> {
        let mut rng = seed::rng(seed, Stream::Synth, index);
        let class = self.pick_class(&mut rng);
        let profile = self.random_profile(class, &mut rng);
        let c = &self.classes[class];
        let meta = AircraftMeta {
            aircraft_type: c.name.clone(),
            age: draw(&mut rng, self.ranges.age),
            wingspan: c.wingspan,
        };
        Ok((SyntheticFlight::new(profile, meta)?, class))
    }
}

/// A labelled interval of a synthetic flight.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub flight_id: String,
    pub class: usize,
    pub flight: SyntheticFlight,
    pub t_start: f64,
    pub t_end: f64,
    pub q_true: f64,
}

pub fn flight_id(seed: u64, index: u64) -> String {
    format!("{seed:016x}-{index:08}")
}

/// The `index`-th labelled segment: one flight per index, then a whole
/// flight, a prefix, or a random sub-segment of it.
pub fn make_segment(config: &SynthConfig, seed: u64, index: u64) -> Result<Segment> {
    let (flight, class) = config.flight(seed, index)?;
    let mut rng = seed::rng(seed, Stream::Split, index);
    let d = flight.duration();
    let min = config.min_segment;
    let u: f64 = rng.gen();
    let (t_start, t_end) = if u < config.whole_fraction {
        (0.0, d)
    } else if u < config.whole_fraction + config.prefix_fraction {
        (0.0, draw(&mut rng, (min, d)))
    } else {
        let len = draw(&mut rng, (min, d));
        let a = draw(&mut rng, (0.0, d - len));
        (a, (a + len).min(d))
    };
    let law = config.classes[class].law;
    let q_true = integrate_fuel(&law, &flight, t_start, t_end)?;
    Ok(Segment { flight_id: flight_id(seed, index), class, flight, t_start, t_end, q_true })
}

impl Segment {
    pub fn training_sample(&self, n_h: usize, n_v: usize, t_max: f64) -> Result<TrainingSample> {
        let track = self.flight.track();
        let piece = if self.t_start == track.start() && self.t_end == track.end() {
            track.clone()
        } else {
            slice_track(track, self.t_start, self.t_end)?
        };
        Ok(TrainingSample {
            flight_id: self.flight_id.clone(),
            t_start: self.t_start,
            feature: featurize(&piece, n_h, n_v, t_max)?,
            meta: track.meta.clone(),
            q_true: self.q_true,
        })
    }
}

/// `n` labelled, featurized samples. Sample `i` depends only on
/// `(seed, i)`, so the result is independent of thread count.
pub fn make_dataset(config: &SynthConfig, n: usize, n_h: usize, n_v: usize, seed: u64) -> Result<Vec<TrainingSample>> {
    if n == 0 {
        return Err(Error::InvalidInput("dataset size must be at least 1".into()));
    }
    config.validate()?;
    (0..n as u64)
        .into_par_iter()
        .map(|i| make_segment(config, seed, i)?.training_sample(n_h, n_v, config.t_max))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> AircraftMeta {
        AircraftMeta { aircraft_type: "narrow".into(), age: 4.0, wingspan: 35.8 }
    }

    fn law() -> FuelLaw {
        SynthConfig::default().classes[0].law
    }

    fn noisy() -> SyntheticFlight {
        let profile = PhaseProfile { altitude_noise: [30.0, 20.0, 40.0], speed_noise: [2.0, 1.0, 3.0], seed: 9, ..Default::default() };
        SyntheticFlight::new(profile, meta()).unwrap()
    }

    #[test]
    fn law_base_case_and_linearity() {
        let l = law();
        assert_eq!(q_true(&l, 0.0, 0.0, 0.0, 0.0), l.c0);
        let v = 200.0;
        let doubled = FuelLaw { c2: 2.0 * l.c2, ..l };
        let base = q_true(&FuelLaw { c2: 0.0, ..l }, 0.0, 0.0, v, 0.0);
        let one = q_true(&l, 0.0, 0.0, v, 0.0) - base;
        let two = q_true(&doubled, 0.0, 0.0, v, 0.0) - base;
        assert!((two - 2.0 * one).abs() < 1e-15);
    }

    #[test]
    fn noise_free_track_is_trapezoidal() {
        let p = PhaseProfile::default();
        let track = generate_track(&p, &meta()).unwrap();
        let t1 = p.climb_duration;
        let t2 = t1 + p.cruise_duration;
        let end = p.duration();
        for pt in &track.points {
            let expect = if pt.t <= t1 {
                p.climb_rate() * pt.t
            } else if pt.t <= t2 {
                p.cruise_altitude
            } else {
                p.descent_rate() * (end - pt.t)
            };
            assert!((pt.alt - expect).abs() < 1e-9, "t={} alt={} want={}", pt.t, pt.alt, expect);
        }
        let mid = track.interpolate(t1 + p.cruise_duration / 2.0);
        assert!((mid.alt - p.cruise_altitude).abs() < 1e-9);
        assert!((mid.gs - p.cruise_speed).abs() < 1e-9);
    }

    #[test]
    fn profile_is_c1_at_corners() {
        let f = noisy();
        let p = f.profile().clone();
        for tc in [p.climb_duration, p.climb_duration + p.cruise_duration] {
            for edge in [tc - p.corner_width, tc + p.corner_width, tc - NOISE_BLEND, tc + NOISE_BLEND] {
                let (l, r) = (f.state(edge - 1e-9), f.state(edge + 1e-9));
                assert!((l.dh - r.dh).abs() < 1e-6 && (l.dv - r.dv).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn same_seed_same_track() {
        assert_eq!(noisy().track(), noisy().track());
        let other = SyntheticFlight::new(PhaseProfile { seed: 10, ..noisy().profile().clone() }, meta()).unwrap();
        assert_ne!(other.track(), noisy().track());
    }

    #[test]
    fn constant_law_integrates_exactly() {
        let f = noisy();
        let d = f.duration();
        let q = integrate_fuel(&FuelLaw::constant(0.7), &f, 0.0, d).unwrap();
        assert!((q - 0.7 * d).abs() < 1e-9 * q);
    }

    #[test]
    fn additive_and_converged() {
        let f = noisy();
        let l = law();
        let (a, b, c) = (13.0, 1717.7, 4100.2);
        let ab = integrate_fuel(&l, &f, a, b).unwrap();
        let bc = integrate_fuel(&l, &f, b, c).unwrap();
        let ac = integrate_fuel(&l, &f, a, c).unwrap();
        assert!((ab + bc - ac).abs() <= 1e-10 * ac);
        let fine = integrate_fuel_with_order(&l, &f, 0.0, f.duration(), 10).unwrap();
        let coarse = integrate_fuel_with_order(&l, &f, 0.0, f.duration(), 5).unwrap();
        assert!((fine - coarse).abs() <= 1e-8 * fine, "{fine} {coarse}");
    }

    #[test]
    fn cumulative_derivative_recovers_law() {
        let f = noisy();
        let l = law();
        let h = 0.25;
        for t in [250.3, 1204.9, 2001.0, 3100.7, 4000.2] {
            let num = integrate_fuel(&l, &f, t - h, t + h).unwrap() / (2.0 * h);
            let exact = f.fuel_rate(&l, t);
            assert!((num - exact).abs() <= 1e-6 * exact, "t={t} {num} {exact}");
        }
    }

    #[test]
    fn law_positive_over_envelope() {
        let cfg = SynthConfig::default();
        let mut rng = seed::rng(1, Stream::Synth, 0);
        for c in &cfg.classes {
            for _ in 0..100_000 {
                let q = c.law.rate(
                    rng.gen_range(-500.0..13_000.0),
                    rng.gen_range(-30.0..30.0),
                    rng.gen_range(0.0..300.0),
                    rng.gen_range(-3.0..3.0),
                );
                assert!(q > 0.0);
            }
        }
    }

    #[test]
    fn single_sample_is_labelled_by_quadrature() {
        let cfg = SynthConfig::default();
        let ds = make_dataset(&cfg, 1, 5, 5, 42).unwrap();
        let seg = make_segment(&cfg, 42, 0).unwrap();
        let law = cfg.classes[seg.class].law;
        assert_eq!(ds.len(), 1);
        assert_eq!(ds[0].q_true, integrate_fuel(&law, &seg.flight, seg.t_start, seg.t_end).unwrap());
        assert!((ds[0].feature.t0 - (seg.t_end - seg.t_start)).abs() < 1e-9);
    }

    #[test]
    fn segments_respect_minimum_and_mix_types() {
        let cfg = SynthConfig::default();
        let mut counts = [0usize; 3];
        for i in 0..300 {
            let s = make_segment(&cfg, 5, i).unwrap();
            assert!(s.t_end - s.t_start >= cfg.min_segment - 1e-9);
            assert!(s.flight.duration() <= cfg.t_max);
            counts[s.class] += 1;
        }
        assert!(counts.iter().all(|&c| c > 60), "{counts:?}");
    }
}
