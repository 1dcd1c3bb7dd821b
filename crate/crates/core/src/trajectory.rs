//! Flight surveillance tracks: parsing, cleaning, slicing and continuous
//! evaluation of the altitude / speed profile.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One surveillance sample. Altitude in meters, ground speed in m/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub t: f64,
    pub lat: f64,
    pub lon: f64,
    pub alt: f64,
    pub gs: f64,
}

/// Intrinsic aircraft parameters fed to the wide part of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AircraftMeta {
    pub aircraft_type: String,
    pub age: f64,
    pub wingspan: f64,
}

impl AircraftMeta {
    pub fn validate(&self) -> Result<()> {
        if self.aircraft_type.is_empty() {
            return Err(Error::InvalidInput("empty aircraft type".into()));
        }
        if !(self.age.is_finite() && self.age >= 0.0) {
            return Err(Error::InvalidInput(format!("aircraft age {} invalid", self.age)));
        }
        if !(self.wingspan.is_finite() && self.wingspan > 0.0) {
            return Err(Error::InvalidInput(format!("wingspan {} invalid", self.wingspan)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightTrack {
    pub meta: AircraftMeta,
    pub points: Vec<TrackPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackFormat {
    Csv,
    Jsonl,
}

impl TrackFormat {
    /// Guess the format from a file extension.
    pub fn from_extension(ext: &str) -> Option<Self> {
        match ext.to_ascii_lowercase().as_str() {
            "csv" => Some(TrackFormat::Csv),
            "jsonl" | "ndjson" => Some(TrackFormat::Jsonl),
            _ => None,
        }
    }
}

impl FlightTrack {
    pub fn new(meta: AircraftMeta, points: Vec<TrackPoint>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::EmptyTrack);
        }
        Ok(Self { meta, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.points[0].t
    }

    pub fn end(&self) -> f64 {
        self.points[self.points.len() - 1].t
    }

    pub fn duration(&self) -> f64 {
        self.end() - self.start()
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn altitudes(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.alt).collect()
    }

    pub fn speeds(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.gs).collect()
    }

    /// Linear interpolation of the full sample (position included) at `t`,
    /// clamped to the track span.
    pub fn interpolate(&self, t: f64) -> TrackPoint {
        let pts = &self.points;
        if t <= pts[0].t {
            return pts[0];
        }
        let last = pts[pts.len() - 1];
        if t >= last.t {
            return last;
        }
        let i = pts.partition_point(|p| p.t <= t) - 1;
        let (a, b) = (pts[i], pts[i + 1]);
        if t == a.t {
            return a;
        }
        let w = (t - a.t) / (b.t - a.t);
        TrackPoint {
            t,
            lat: a.lat + w * (b.lat - a.lat),
            lon: a.lon + w * (b.lon - a.lon),
            alt: a.alt + w * (b.alt - a.alt),
            gs: a.gs + w * (b.gs - a.gs),
        }
    }
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    t: String,
    lat: String,
    lon: String,
    alt: String,
    gs: String,
}

fn parse_field(raw: &str, name: &str, line: usize) -> Result<f64> {
    let v: f64 = raw.trim().parse().map_err(|_| Error::MalformedRecord {
        line,
        reason: format!("field {name} = {raw:?} is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::MalformedRecord {
            line,
            reason: format!("field {name} is not finite"),
        });
    }
    Ok(v)
}

fn check_point(p: TrackPoint, line: usize) -> Result<TrackPoint> {
    let bad = |reason: String| Error::MalformedRecord { line, reason };
    for (name, v) in [("t", p.t), ("lat", p.lat), ("lon", p.lon), ("alt", p.alt), ("gs", p.gs)] {
        if !v.is_finite() {
            return Err(bad(format!("field {name} is not finite")));
        }
    }
    if p.t < 0.0 {
        return Err(bad(format!("negative time {}", p.t)));
    }
    if !(-90.0..=90.0).contains(&p.lat) {
        return Err(bad(format!("latitude {} out of range", p.lat)));
    }
    if !(-180.0..=180.0).contains(&p.lon) {
        return Err(bad(format!("longitude {} out of range", p.lon)));
    }
    let lon = if p.lon == 180.0 { -180.0 } else { p.lon };
    Ok(TrackPoint { lon, ..p })
}

/// Parse a track from CSV (`t,lat,lon,alt,gs`) or JSONL.
///
/// JSONL may carry a leading metadata object; `meta` overrides it when given.
/// CSV has no embedded metadata, so `meta` is required for it.
pub fn parse_track<R: Read>(
    source: R,
    format: TrackFormat,
    meta: Option<AircraftMeta>,
) -> Result<FlightTrack> {
    let (points, embedded) = match format {
        TrackFormat::Csv => (parse_csv(source)?, None),
        TrackFormat::Jsonl => parse_jsonl(source)?,
    };
    let meta = meta
        .or(embedded)
        .ok_or_else(|| Error::InvalidInput("track has no aircraft metadata".into()))?;
    meta.validate()?;
    FlightTrack::new(meta, points)
}

fn parse_csv<R: Read>(source: R) -> Result<Vec<TrackPoint>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| Error::MalformedRecord { line: 1, reason: e.to_string() })?
        .clone();
    for want in ["t", "lat", "lon", "alt", "gs"] {
        if !headers.iter().any(|h| h == want) {
            return Err(Error::MalformedRecord {
                line: 1,
                reason: format!("missing column {want:?}"),
            });
        }
    }
    let mut points = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::MalformedRecord {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let row: CsvRow = rec
            .deserialize(Some(&headers))
            .map_err(|e| Error::MalformedRecord { line, reason: e.to_string() })?;
        let p = TrackPoint {
            t: parse_field(&row.t, "t", line)?,
            lat: parse_field(&row.lat, "lat", line)?,
            lon: parse_field(&row.lon, "lon", line)?,
            alt: parse_field(&row.alt, "alt", line)?,
            gs: parse_field(&row.gs, "gs", line)?,
        };
        points.push(check_point(p, line)?);
    }
    Ok(points)
}

fn parse_jsonl<R: Read>(source: R) -> Result<(Vec<TrackPoint>, Option<AircraftMeta>)> {
    let reader = BufReader::new(source);
    let mut points = Vec::new();
    let mut meta = None;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::MalformedRecord { line: lineno, reason: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| Error::MalformedRecord { line: lineno, reason: e.to_string() })?;
        if points.is_empty() && meta.is_none() && value.get("aircraft_type").is_some() {
            let m: AircraftMeta = serde_json::from_value(value)
                .map_err(|e| Error::MalformedRecord { line: lineno, reason: e.to_string() })?;
            meta = Some(m);
            continue;
        }
        let p: TrackPoint = serde_json::from_value(value)
            .map_err(|e| Error::MalformedRecord { line: lineno, reason: e.to_string() })?;
        points.push(check_point(p, lineno)?);
    }
    Ok((points, meta))
}

/// Write a track in the same formats [`parse_track`] reads. JSONL output
/// carries the metadata line; CSV does not.
pub fn write_track<W: Write>(track: &FlightTrack, sink: W, format: TrackFormat) -> Result<()> {
    match format {
        TrackFormat::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(["t", "lat", "lon", "alt", "gs"])
                .map_err(|e| Error::Io(e.into()))?;
            for p in &track.points {
                w.write_record([
                    p.t.to_string(),
                    p.lat.to_string(),
                    p.lon.to_string(),
                    p.alt.to_string(),
                    p.gs.to_string(),
                ])
                .map_err(|e| Error::Io(e.into()))?;
            }
            w.flush()?;
        }
        TrackFormat::Jsonl => {
            let mut sink = sink;
            serde_json::to_writer(&mut sink, &track.meta)?;
            sink.write_all(b"\n")?;
            for p in &track.points {
                serde_json::to_writer(&mut sink, p)?;
                sink.write_all(b"\n")?;
            }
            sink.flush()?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleaningConfig {
    pub min_alt: f64,
    pub max_alt: f64,
    pub max_gs: f64,
    /// Largest accepted |Δalt/Δt| between consecutive kept points, m/s.
    pub max_climb_rate: f64,
    pub min_points: usize,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        Self {
            min_alt: -500.0,
            max_alt: 20_000.0,
            max_gs: 400.0,
            max_climb_rate: 60.0,
            min_points: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningReport {
    /// Points whose timestamp did not advance past the last kept point.
    pub duplicates: usize,
    pub bounds: usize,
    pub climb_rate: usize,
    pub kept: usize,
}

/// Drop non-advancing timestamps, out-of-envelope samples and climb-rate
/// spikes. Each rule compares against the last kept point, which makes the
/// operation idempotent.
pub fn clean_track(track: &FlightTrack, cfg: &CleaningConfig) -> Result<(FlightTrack, CleaningReport)> {
    let mut report = CleaningReport::default();
    let mut kept: Vec<TrackPoint> = Vec::with_capacity(track.points.len());
    for &p in &track.points {
        if let Some(last) = kept.last() {
            if p.t <= last.t {
                report.duplicates += 1;
                continue;
            }
        }
        if !(cfg.min_alt..=cfg.max_alt).contains(&p.alt) || !(0.0..=cfg.max_gs).contains(&p.gs) {
            report.bounds += 1;
            continue;
        }
        if let Some(last) = kept.last() {
            let rate = (p.alt - last.alt) / (p.t - last.t);
            if rate.abs() > cfg.max_climb_rate {
                report.climb_rate += 1;
                continue;
            }
        }
        kept.push(p);
    }
    report.kept = kept.len();
    if kept.len() < cfg.min_points.max(2) {
        return Err(Error::TooSparse {
            survivors: kept.len(),
            required: cfg.min_points.max(2),
        });
    }
    Ok((
        FlightTrack {
            meta: track.meta.clone(),
            points: kept,
        },
        report,
    ))
}

/// Restrict a clean track to [t_a, t_b], inserting interpolated boundary
/// samples, and re-base time so the slice starts at 0.
pub fn slice_track(track: &FlightTrack, t_a: f64, t_b: f64) -> Result<FlightTrack> {
    if !(t_a < t_b) {
        return Err(Error::InvalidInput(format!("slice bounds {t_a} >= {t_b}")));
    }
    let (start, end) = (track.start(), track.end());
    if t_b <= start || t_a >= end {
        return Err(Error::EmptySlice { t_a, t_b });
    }
    let lo = t_a.max(start);
    let hi = t_b.min(end);
    let mut pts = Vec::new();
    if lo > start && !track.points.iter().any(|p| p.t == lo) {
        pts.push(track.interpolate(lo));
    }
    pts.extend(track.points.iter().filter(|p| p.t >= lo && p.t <= hi).copied());
    if hi < end && !track.points.iter().any(|p| p.t == hi) {
        pts.push(track.interpolate(hi));
    }
    if pts.len() < 2 {
        return Err(Error::EmptySlice { t_a, t_b });
    }
    let t0 = pts[0].t;
    for p in &mut pts {
        p.t -= t0;
    }
    Ok(FlightTrack {
        meta: track.meta.clone(),
        points: pts,
    })
}

/// Piecewise-linear altitude and speed at `t`; zero past the last sample.
pub fn eval_profile(track: &FlightTrack, t: f64) -> (f64, f64) {
    if t > track.end() {
        return (0.0, 0.0);
    }
    let p = track.interpolate(t);
    (p.alt, p.gs)
}
