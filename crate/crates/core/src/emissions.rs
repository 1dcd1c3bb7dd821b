//! Gridded CO₂ inventories built from flight tracks and flow curves.
//!
//! Masses are accumulated as integer nanograms so that merging and
//! re-aggregating grids is exact and order independent.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monotone::InstantaneousFlow;
use crate::trajectory::FlightTrack;

/// Nanograms per kilogram.
const NG_PER_KG: f64 = 1e12;
const SUB_STEP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub cell_deg: f64,
    pub layer_m: f64,
    /// kg CO₂ per kg fuel.
    pub emission_factor: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { cell_deg: 0.33, layer_m: 1000.0, emission_factor: 3.16 }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.cell_deg > 0.0 && self.layer_m > 0.0 && self.emission_factor > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("grid spec {self:?} must be positive")))
        }
    }

    /// Same layers and factor, cells half as wide.
    pub fn refined(&self) -> Self {
        Self { cell_deg: self.cell_deg / 2.0, ..*self }
    }

    pub fn cell(&self, lat: f64, lon: f64, alt: f64) -> CellIndex {
        let lon = (lon + 180.0).rem_euclid(360.0) - 180.0;
        CellIndex {
            lat: (lat / self.cell_deg).floor() as i64,
            lon: (lon / self.cell_deg).floor() as i64,
            layer: (alt.max(0.0) / self.layer_m).floor() as i64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellIndex {
    pub lat: i64,
    pub lon: i64,
    pub layer: i64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmissionGrid {
    spec: GridSpec,
    cells: BTreeMap<CellIndex, i128>,
}

fn to_ng(kg: f64) -> i128 {
    (kg * NG_PER_KG).round() as i128
}

impl EmissionGrid {
    pub fn new(spec: GridSpec) -> Self {
        Self { spec, cells: BTreeMap::new() }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn add_kg(&mut self, cell: CellIndex, co2_kg: f64) {
        self.add_ng(cell, to_ng(co2_kg));
    }

    fn add_ng(&mut self, cell: CellIndex, ng: i128) {
        if ng != 0 {
            *self.cells.entry(cell).or_insert(0) += ng;
        }
    }

    /// CO₂ in the cell, kg.
    pub fn get(&self, cell: CellIndex) -> f64 {
        self.cells.get(&cell).map_or(0.0, |&ng| ng as f64 / NG_PER_KG)
    }

    pub fn total_kg(&self) -> f64 {
        self.cells.values().sum::<i128>() as f64 / NG_PER_KG
    }

    pub fn cells(&self) -> impl Iterator<Item = (CellIndex, f64)> + '_ {
        self.cells.iter().map(|(&c, &ng)| (c, ng as f64 / NG_PER_KG))
    }

    /// Sum 2×2 horizontal blocks into a grid with twice the cell size.
    pub fn coarsen(&self) -> Self {
        let mut out = Self::new(GridSpec { cell_deg: self.spec.cell_deg * 2.0, ..self.spec });
        for (&c, &ng) in &self.cells {
            out.add_ng(CellIndex { lat: c.lat.div_euclid(2), lon: c.lon.div_euclid(2), layer: c.layer }, ng);
        }
        out
    }
}

/// Spread a flight's fuel over the grid: the flow curve is integrated over
/// 1 s sub-steps and each sub-step's CO₂ lands in the cell of its midpoint.
pub fn grid_flight(track: &FlightTrack, flow: &InstantaneousFlow, spec: &GridSpec) -> Result<EmissionGrid> {
    spec.validate()?;
    let (lo, hi) = flow.curve.domain();
    let (c_start, c_end) = (lo + flow.offset, hi + flow.offset);
    let (t_start, t_end) = (track.start(), track.end());
    let tol = 1e-9 * t_end.abs().max(1.0);
    if c_start > t_start + tol || c_end < t_end - tol {
        return Err(Error::SpanMismatch { curve_start: c_start, curve_end: c_end, track_start: t_start, track_end: t_end });
    }
    let mut grid = EmissionGrid::new(*spec);
    let mut a = t_start;
    let mut q_a = flow.cumulative(a.max(c_start))?;
    while a < t_end {
        let b = if t_end - a <= SUB_STEP { t_end } else { a + SUB_STEP };
        let q_b = flow.cumulative(b.min(c_end))?;
        let p = track.interpolate(0.5 * (a + b));
        grid.add_kg(spec.cell(p.lat, p.lon, p.alt), (q_b - q_a).max(0.0) * spec.emission_factor);
        a = b;
        q_a = q_b;
    }
    Ok(grid)
}

/// Cell-wise sum of grids sharing one spec.
pub fn merge<'a>(grids: impl IntoIterator<Item = &'a EmissionGrid>) -> Result<EmissionGrid> {
    let mut iter = grids.into_iter();
    let Some(first) = iter.next() else {
        return Ok(EmissionGrid::default());
    };
    let mut out = first.clone();
    for g in iter {
        if g.spec != out.spec {
            return Err(Error::SpecMismatch);
        }
        for (&c, &ng) in &g.cells {
            out.add_ng(c, ng);
        }
    }
    Ok(out)
}

fn format_ng(ng: i128) -> String {
    let sign = if ng < 0 { "-" } else { "" };
    let abs = ng.unsigned_abs();
    format!("{sign}{}.{:012}", abs / 1_000_000_000_000, abs % 1_000_000_000_000)
}

fn parse_ng(s: &str) -> Option<i128> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if frac.len() > 12 || int.is_empty() || !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let v = int.parse::<i128>().ok()? * 1_000_000_000_000 + format!("{frac:0<12}").parse::<i128>().ok()?;
    Some(if neg { -v } else { v })
}

const HEADER: [&str; 7] = ["lat_idx", "lon_idx", "layer_idx", "lat_min", "lon_min", "alt_min", "co2_kg"];

/// CSV rows sorted by (lat, lon, layer) index.
pub fn export_csv<W: Write>(grid: &EmissionGrid, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(HEADER).map_err(csv_err)?;
    let s = &grid.spec;
    for (c, &ng) in &grid.cells {
        w.write_record([
            c.lat.to_string(),
            c.lon.to_string(),
            c.layer.to_string(),
            (c.lat as f64 * s.cell_deg).to_string(),
            (c.lon as f64 * s.cell_deg).to_string(),
            (c.layer as f64 * s.layer_m).to_string(),
            format_ng(ng),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidInput(format!("{other:?}")),
    }
}

pub fn import_csv<R: Read>(source: R, spec: GridSpec) -> Result<EmissionGrid> {
    let mut r = csv::Reader::from_reader(source);
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.iter().ne(HEADER) {
        return Err(Error::MalformedRecord { line: 1, reason: "unexpected header".into() });
    }
    let mut grid = EmissionGrid::new(spec);
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::MalformedRecord { line, reason: e.to_string() })?;
        let bad = |what: &str| Error::MalformedRecord { line, reason: format!("bad {what}") };
        let idx = |k: usize| rec[k].parse::<i64>().map_err(|_| bad(HEADER[k]));
        let cell = CellIndex { lat: idx(0)?, lon: idx(1)?, layer: idx(2)? };
        let ng = parse_ng(&rec[6]).ok_or_else(|| bad("co2_kg"))?;
        grid.add_ng(cell, ng);
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monotone::{build_curve, FuelSeries};
    use crate::trajectory::{AircraftMeta, TrackPoint};

    fn meta() -> AircraftMeta {
        AircraftMeta { aircraft_type: "A".into(), age: 1.0, wingspan: 30.0 }
    }

    fn flow(span: f64, rate: f64) -> InstantaneousFlow {
        let t: Vec<f64> = (0..=4).map(|i| span * i as f64 / 4.0).collect();
        let q: Vec<f64> = t.iter().map(|x| rate * x).collect();
        let series = FuelSeries::new(t, q).unwrap();
        InstantaneousFlow { curve: build_curve(&series).unwrap(), series, repairs: 0, offset: 0.0 }
    }

    fn hold() -> FlightTrack {
        let points = (0..=10)
            .map(|i| TrackPoint { t: 60.0 * i as f64, lat: 30.0, lon: 120.0, alt: 8500.0, gs: 0.0 })
            .collect();
        FlightTrack::new(meta(), points).unwrap()
    }

    #[test]
    fn stationary_hold_lands_in_one_cell() {
        let g = grid_flight(&hold(), &flow(600.0, 0.5), &GridSpec::default()).unwrap();
        assert_eq!(g.len(), 1);
        let cell = CellIndex { lat: 90, lon: 363, layer: 8 };
        assert!((g.get(cell) - 0.5 * 600.0 * 3.16).abs() < 1e-9 * 948.0);
    }

    #[test]
    fn short_curve_is_rejected() {
        assert!(matches!(
            grid_flight(&hold(), &flow(300.0, 0.5), &GridSpec::default()),
            Err(Error::SpanMismatch { .. })
        ));
    }

    #[test]
    fn csv_round_trip_and_merge_identity() {
        let mut g = EmissionGrid::new(GridSpec::default());
        g.add_kg(CellIndex { lat: -3, lon: 545, layer: 0 }, 12.345678901234);
        g.add_kg(CellIndex { lat: 90, lon: -1, layer: 13 }, 0.000000000001);
        let mut buf = Vec::new();
        export_csv(&g, &mut buf).unwrap();
        let back = import_csv(buf.as_slice(), GridSpec::default()).unwrap();
        assert_eq!(back, g);
        let empty = EmissionGrid::new(GridSpec::default());
        assert_eq!(merge([&g, &empty]).unwrap(), g);
        let other = EmissionGrid::new(GridSpec { layer_m: 500.0, ..GridSpec::default() });
        assert!(matches!(merge([&g, &other]), Err(Error::SpecMismatch)));
    }

    #[test]
    fn negative_altitude_in_layer_zero_and_dateline_wrap() {
        let s = GridSpec::default();
        assert_eq!(s.cell(0.1, 180.0, -50.0), s.cell(0.1, -180.0, 0.0));
        assert_eq!(s.cell(0.1, 10.0, -50.0).layer, 0);
    }

    #[test]
    fn decimal_formatting() {
        assert_eq!(format_ng(1_500_000_000_000), "1.500000000000");
        assert_eq!(format_ng(7), "0.000000000007");
        assert_eq!(parse_ng("1.5"), Some(1_500_000_000_000));
        assert_eq!(parse_ng("0.000000000007"), Some(7));
        assert_eq!(parse_ng("1.0000000000001"), None);
    }
}
