use fuelburn::emissions::{export_csv, grid_flight, import_csv, merge, GridSpec};
use fuelburn::monotone::{build_curve, FuelSeries, InstantaneousFlow};
use fuelburn::spectral::{fourier_closed_form, NormalizedSeries};
use fuelburn::trajectory::{
    clean_track, eval_profile, parse_track, slice_track, write_track, AircraftMeta, CleaningConfig, FlightTrack,
    TrackFormat, TrackPoint,
};
use proptest::prelude::*;

fn meta() -> AircraftMeta {
    AircraftMeta { aircraft_type: "B738".into(), age: 7.5, wingspan: 35.8 }
}

/// Strictly increasing times with arbitrary, possibly unphysical, samples.
fn arb_track(dirty: bool) -> impl Strategy<Value = FlightTrack> {
    let alt = if dirty { -2_000.0..25_000.0 } else { 0.0..12_000.0 };
    let gs = if dirty { 0.0..500.0 } else { 50.0..260.0 };
    (2usize..120).prop_flat_map(move |n| {
        (
            0.0f64..1e6,
            prop::collection::vec((0.5f64..40.0, -60.0f64..60.0, -179.0f64..179.0, alt.clone(), gs.clone()), n),
        )
            .prop_map(|(t0, rows)| {
                let mut t = t0;
                let points = rows
                    .into_iter()
                    .map(|(dt, lat, lon, alt, gs)| {
                        t += dt;
                        TrackPoint { t, lat, lon, alt, gs }
                    })
                    .collect();
                FlightTrack::new(meta(), points).unwrap()
            })
    })
}

fn piecewise_linear() -> impl Strategy<Value = NormalizedSeries> {
    (2usize..80).prop_flat_map(|k| {
        (prop::collection::vec(0.01f64..1.0, k - 1), 0.2f64..1.0, prop::collection::vec(-3.0f64..3.0, k)).prop_map(
            |(gaps, span, f)| {
                let total: f64 = gaps.iter().sum();
                let mut t = vec![0.0];
                for g in &gaps {
                    let next = t[t.len() - 1] + g / total * span * std::f64::consts::PI;
                    t.push(next);
                }
                NormalizedSeries::new(t, f, 7200.0).unwrap()
            },
        )
    })
}

fn arb_cumulative() -> impl Strategy<Value = FuelSeries> {
    (4usize..40).prop_flat_map(|n| {
        (prop::collection::vec(20.0f64..400.0, n), prop::collection::vec(0.05f64..3.0, n)).prop_map(|(dt, rate)| {
            let mut t = vec![0.0];
            let mut q = vec![0.0];
            for (a, r) in dt.iter().zip(&rate) {
                t.push(t[t.len() - 1] + a);
                q.push(q[q.len() - 1] + a * r);
            }
            FuelSeries::new(t, q).unwrap()
        })
    })
}

/// A track flying along a great-ish circle with a cumulative fuel curve over it.
fn arb_flight() -> impl Strategy<Value = (FlightTrack, InstantaneousFlow)> {
    (arb_cumulative(), -50.0f64..50.0, -170.0f64..170.0, -0.002f64..0.002, -0.002f64..0.002).prop_map(
        |(series, lat0, lon0, dlat, dlon)| {
            let end = *series.times().last().unwrap();
            let n = (end / 30.0).ceil() as usize + 1;
            let points = (0..n)
                .map(|i| {
                    let t = (i as f64 * 30.0).min(end);
                    let alt = 11_000.0 * (std::f64::consts::PI * t / end).sin();
                    TrackPoint { t, lat: lat0 + dlat * t, lon: lon0 + dlon * t, alt, gs: 220.0 }
                })
                .collect();
            let track = FlightTrack::new(meta(), points).unwrap();
            let curve = build_curve(&series).unwrap();
            (track, InstantaneousFlow { series, curve, repairs: 0, offset: 0.0 })
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn track_files_round_trip(track in arb_track(false)) {
        for format in [TrackFormat::Csv, TrackFormat::Jsonl] {
            let mut buf = Vec::new();
            write_track(&track, &mut buf, format).unwrap();
            let back = parse_track(buf.as_slice(), format, Some(meta())).unwrap();
            prop_assert_eq!(&back, &track);
        }
    }

    #[test]
    fn cleaning_is_idempotent(track in arb_track(true)) {
        let cfg = CleaningConfig { min_points: 2, ..CleaningConfig::default() };
        if let Ok((once, _)) = clean_track(&track, &cfg) {
            let (twice, report) = clean_track(&once, &cfg).unwrap();
            prop_assert_eq!(twice, once);
            prop_assert_eq!(report.duplicates + report.bounds + report.climb_rate, 0);
        }
    }

    #[test]
    fn profile_hits_nodes_and_is_continuous(track in arb_track(false)) {
        for p in &track.points {
            prop_assert_eq!(eval_profile(&track, p.t), (p.alt, p.gs));
        }
        for w in track.points.windows(2) {
            let mid = 0.5 * (w[0].t + w[1].t);
            let eps = 1e-7 * (w[1].t - w[0].t);
            let (a, b) = (eval_profile(&track, mid - eps), eval_profile(&track, mid + eps));
            prop_assert!((a.0 - b.0).abs() <= 1e-5 * (w[1].alt - w[0].alt).abs().max(1.0));
            prop_assert!((a.1 - b.1).abs() <= 1e-5 * (w[1].gs - w[0].gs).abs().max(1.0));
        }
    }

    #[test]
    fn full_slice_is_the_rebased_track(track in arb_track(false)) {
        let sliced = slice_track(&track, track.start(), track.end()).unwrap();
        prop_assert_eq!(sliced.len(), track.len());
        for (a, b) in sliced.points.iter().zip(&track.points) {
            prop_assert!((a.t - (b.t - track.start())).abs() <= 1e-9 * track.end().abs().max(1.0));
            prop_assert_eq!((a.lat, a.lon, a.alt, a.gs), (b.lat, b.lon, b.alt, b.gs));
        }
    }

    #[test]
    fn coefficients_decay_like_one_over_n(series in piecewise_linear()) {
        // Integrating by parts once bounds n|a_n| by the total variation
        // plus the jump to zero at the end of the support.
        let f = series.values();
        let tv: f64 = f.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() + f[f.len() - 1].abs();
        let cap = std::f64::consts::FRAC_2_PI * tv;
        for (n, a) in fourier_closed_form(&series, 200).iter().enumerate().skip(1) {
            prop_assert!(n as f64 * a.abs() <= cap * (1.0 + 1e-9) + 1e-12, "n={} n|a|={} cap={}", n, n as f64 * a.abs(), cap);
        }
    }

    #[test]
    fn truncated_series_norm_does_not_exceed_the_signal(series in piecewise_linear()) {
        let (t, f) = (series.tstar(), series.values());
        let signal: f64 = t
            .windows(2)
            .zip(f.windows(2))
            .map(|(t, f)| (t[1] - t[0]) * (f[0] * f[0] + f[0] * f[1] + f[1] * f[1]) / 3.0)
            .sum();
        let c = fourier_closed_form(&series, 100);
        let truncated = std::f64::consts::FRAC_PI_2 * (0.5 * c[0] * c[0] + c[1..].iter().map(|a| a * a).sum::<f64>());
        prop_assert!(truncated.sqrt() <= signal.sqrt() + 1e-6);
    }

    #[test]
    fn flow_is_second_order_derivative_of_the_curve(series in arb_cumulative()) {
        let curve = build_curve(&series).unwrap();
        let t = series.times();
        let probe = 0.5 * (t[1] + t[2]);
        let exact = curve.flow(probe).unwrap();
        let fd = |h: f64| (curve.eval(probe + h).unwrap() - curve.eval(probe - h).unwrap()) / (2.0 * h);
        let q_end = *series.values().last().unwrap();
        let (e1, e2) = ((fd(1.0) - exact).abs(), (fd(0.5) - exact).abs());
        // Halving h cuts the error four-fold until rounding takes over.
        prop_assert!(e2 <= 0.3 * e1 + 1e-12 * q_end, "e(1)={} e(0.5)={}", e1, e2);
    }

    #[test]
    fn gridding_merging_and_export_conserve_mass(flights in prop::collection::vec(arb_flight(), 1..4)) {
        let spec = GridSpec::default();
        let mut grids = Vec::new();
        let mut expected = 0.0;
        for (track, flow) in &flights {
            let g = grid_flight(track, flow, &spec).unwrap();
            let fuel = flow.cumulative(track.end()).unwrap();
            prop_assert!(((g.total_kg() - spec.emission_factor * fuel) / (spec.emission_factor * fuel)).abs() <= 1e-9);
            prop_assert!(g.cells().all(|(_, kg)| kg >= 0.0));
            expected += spec.emission_factor * fuel;
            grids.push(g);
        }
        let total = merge(&grids).unwrap();
        prop_assert!(((total.total_kg() - expected) / expected).abs() <= 1e-9);
        let mut csv = Vec::new();
        export_csv(&total, &mut csv).unwrap();
        let back = import_csv(csv.as_slice(), spec).unwrap();
        prop_assert!(back.cells().eq(total.cells()));
    }

    #[test]
    fn refinement_reaggregates_exactly((track, flow) in arb_flight()) {
        let spec = GridSpec { cell_deg: 0.25, ..GridSpec::default() };
        let coarse = grid_flight(&track, &flow, &spec).unwrap();
        let fine = grid_flight(&track, &flow, &spec.refined()).unwrap();
        prop_assert!(fine.coarsen().cells().eq(coarse.cells()));
    }
}
