use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use fuelburn::emissions::{export_csv, grid_flight, merge, GridSpec};
use fuelburn::fuelnet::{
    load_model, predict_interval, read_dataset, save_model, train as fit, write_dataset, Activation, FeatureRecord,
    ModelConfig, Optimizer, TrainingSample, WideDeepModel,
};
use fuelburn::metrics::{convergence_slope, evaluate, mape, EvalReport, Scored};
use fuelburn::monotone::instantaneous_from_model;
use fuelburn::seed::{self, Stream};
use fuelburn::spectral::featurize as spectral_features;
use fuelburn::synth::{make_dataset, SynthConfig};
use fuelburn::trajectory::{write_track, AircraftMeta, TrackFormat};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::files::{load_track, open, read_json, sidecar, stem, track_paths, write_output};
use crate::{
    ActivationArg, ConvergenceArgs, CurveArgs, EvalArgs, FeaturizeArgs, GridArgs, MetaArgs, OptimizerArg, PredictArgs,
    SynthArgs,
    TableFormat, TrackFileFormat, TrainArgs,
};

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::io(path, e)
}

impl From<OptimizerArg> for Optimizer {
    fn from(o: OptimizerArg) -> Self {
        match o {
            OptimizerArg::Sgd => Optimizer::Sgd,
            OptimizerArg::Adam => Optimizer::Adam,
        }
    }
}

impl MetaArgs {
    fn meta(&self) -> Option<AircraftMeta> {
        Some(AircraftMeta {
            aircraft_type: self.aircraft_type.clone()?,
            age: self.age?,
            wingspan: self.wingspan?,
        })
    }
}

fn synth_config(path: Option<&Path>) -> CliResult<SynthConfig> {
    let cfg = match path {
        Some(p) => read_json(p)?,
        None => SynthConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn load_samples(path: &Path) -> CliResult<Vec<TrainingSample>> {
    let samples = read_dataset(open(path)?)?
        .into_iter()
        .map(TrainingSample::try_from)
        .collect::<Result<Vec<_>, _>>()?;
    if samples.is_empty() {
        return Err(CliError::Usage(format!("{}: dataset is empty", path.display())));
    }
    Ok(samples)
}

fn load_model_file(path: &Path) -> CliResult<WideDeepModel> {
    Ok(load_model(open(path)?)?)
}

pub fn synth(a: SynthArgs, seed: u64) -> CliResult<()> {
    let cfg = synth_config(a.synth_config.as_deref())?;
    if a.flights == 0 && a.dataset.is_none() {
        return Err(CliError::Usage("nothing to generate: give --flights with --out-dir, or --dataset".into()));
    }
    if a.flights > 0 {
        let dir = a
            .out_dir
            .as_deref()
            .ok_or_else(|| CliError::Usage("--flights needs --out-dir".into()))?;
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        for i in 0..a.flights as u64 {
            let (flight, _) = cfg.flight(seed, i)?;
            let name = format!("flight_{i:05}");
            let track = flight.track();
            match a.format {
                TrackFileFormat::Jsonl => {
                    let path = dir.join(format!("{name}.jsonl"));
                    write_output(Some(&path), |w| Ok(write_track(track, w, TrackFormat::Jsonl)?))?;
                }
                TrackFileFormat::Csv => {
                    let path = dir.join(format!("{name}.csv"));
                    write_output(Some(&path), |w| Ok(write_track(track, w, TrackFormat::Csv)?))?;
                    let side = sidecar(&path);
                    write_output(Some(&side), |w| {
                        serde_json::to_writer_pretty(&mut *w, &track.meta).map_err(fuelburn::Error::from)?;
                        Ok(writeln!(w).map_err(io_err(&side))?)
                    })?;
                }
            }
        }
    }
    if let Some(path) = a.dataset.as_deref() {
        let data = make_dataset(&cfg, a.samples, a.radius, a.radius, seed)?;
        let records: Vec<FeatureRecord> = data.iter().map(FeatureRecord::from).collect();
        write_output(Some(path), |w| Ok(write_dataset(&records, w)?))?;
    }
    Ok(())
}

pub fn featurize(a: FeaturizeArgs) -> CliResult<()> {
    let meta = a.meta.meta();
    let mut records = Vec::new();
    for path in track_paths(&a.tracks)? {
        let track = load_track(&path, meta.as_ref())?;
        let feature = spectral_features(&track, a.radius, a.radius, a.t_max)?;
        records.push(FeatureRecord::from_feature(stem(&path), track.start(), feature, track.meta.clone(), None));
    }
    write_output(a.out.as_deref(), |w| Ok(write_dataset(&records, w)?))
}

pub fn train(a: TrainArgs, seed: u64) -> CliResult<()> {
    let samples = load_samples(&a.dataset)?;
    let first = &samples[0].feature;
    let (n_h, n_v, t_max) = (first.n_h(), first.n_v(), first.t_max);
    if let Some(s) = samples
        .iter()
        .find(|s| s.feature.n_h() != n_h || s.feature.n_v() != n_v || s.feature.t_max != t_max)
    {
        return Err(fuelburn::Error::ShapeMismatch(format!(
            "record {} has radii ({}, {}) and T_M {}, first record has ({n_h}, {n_v}) and {t_max}",
            s.flight_id,
            s.feature.n_h(),
            s.feature.n_v(),
            s.feature.t_max
        ))
        .into());
    }
    let vocabulary: BTreeSet<&str> = samples.iter().map(|s| s.meta.aircraft_type.as_str()).collect();
    let config = ModelConfig {
        n_h,
        n_v,
        hidden_sizes: a.hidden.clone(),
        activation: match a.activation {
            ActivationArg::Relu => Activation::Relu,
            ActivationArg::Linear => Activation::Linear,
        },
        learning_rate: a.learning_rate,
        momentum: a.momentum,
        optimizer: a.optimizer.into(),
        final_lr_fraction: a.final_lr_fraction,
        batch_size: a.batch_size,
        epochs: a.epochs,
        seed,
        t_max,
        type_vocabulary: vocabulary.into_iter().map(String::from).collect(),
        shuffle: !a.no_shuffle,
        ..ModelConfig::default()
    };
    let outcome = fit(&samples, &config)?;
    write_output(Some(&a.out), |w| Ok(save_model(&outcome.model, w)?))?;
    if let Some(path) = a.history.as_deref() {
        write_output(Some(path), |w| {
            writeln!(w, "epoch,loss").map_err(io_err(path))?;
            for (i, l) in outcome.history.iter().enumerate() {
                writeln!(w, "{},{l}", i + 1).map_err(io_err(path))?;
            }
            Ok(())
        })?;
    }
    eprintln!(
        "trained on {} samples, final epoch loss {:.6e}",
        samples.len(),
        outcome.history.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

pub fn predict(a: PredictArgs) -> CliResult<()> {
    let model = load_model_file(&a.model)?;
    let track = load_track(&a.track, a.meta.meta().as_ref())?;
    let from = a.from.unwrap_or(track.start());
    let to = a.to.unwrap_or(track.end());
    let q = predict_interval(&model, &track, from, to)?;
    println!("{q}");
    Ok(())
}

pub fn curve(a: CurveArgs) -> CliResult<()> {
    if !(a.spacing > 0.0) {
        return Err(CliError::Usage("--spacing must be positive".into()));
    }
    let model = load_model_file(&a.model)?;
    let track = load_track(&a.track, a.meta.meta().as_ref())?;
    let flow = instantaneous_from_model(&model, &track, a.step)?;
    if flow.repairs > 0 {
        eprintln!("isotonic repair adjusted {} of {} cumulative predictions", flow.repairs, flow.series.len());
    }
    let (start, end) = (track.start(), track.end());
    let n = ((end - start) / a.spacing).floor() as usize;
    let mut rows = Vec::with_capacity(n + 2);
    for i in 0..=n {
        let t = start + i as f64 * a.spacing;
        rows.push((t, flow.cumulative(t)?, flow.flow(t)?));
    }
    if rows.last().is_some_and(|r| r.0 < end) {
        rows.push((end, flow.cumulative(end)?, flow.flow(end)?));
    }
    let out = a.out.clone();
    write_output(out.as_deref(), |w| {
        let e = io_err(Path::new("<curve>"));
        writeln!(w, "T,Q,q").map_err(&e)?;
        for (t, q, f) in &rows {
            writeln!(w, "{t},{q},{f}").map_err(&e)?;
        }
        Ok(())
    })
}

fn write_reports(w: &mut dyn Write, reports: &[EvalReport], format: TableFormat) -> std::io::Result<()> {
    match format {
        TableFormat::Csv => {
            writeln!(w, "group,n,mape,rel_l2")?;
            for r in reports {
                writeln!(w, "{},{},{},{}", r.group, r.n, r.mape, r.rel_l2)?;
            }
        }
        TableFormat::Text => {
            let width = reports.iter().map(|r| r.group.to_string().len()).max().unwrap_or(5).max(5);
            writeln!(w, "{:<width$}  {:>8}  {:>8}  {:>8}", "group", "n", "mape", "rel_l2")?;
            for r in reports {
                writeln!(
                    w,
                    "{:<width$}  {:>8}  {:>7.3}%  {:>8.4}",
                    r.group.to_string(),
                    r.n,
                    100.0 * r.mape,
                    r.rel_l2
                )?;
            }
        }
    }
    Ok(())
}

pub fn eval(a: EvalArgs) -> CliResult<()> {
    let model = load_model_file(&a.model)?;
    let samples = load_samples(&a.dataset)?;
    let pred = model.predict_samples(&samples)?;
    let rows: Vec<Scored> = samples
        .iter()
        .zip(pred)
        .map(|(s, p)| Scored {
            aircraft_type: s.meta.aircraft_type.clone(),
            duration: s.feature.t0,
            pred: p,
            truth: s.q_true,
        })
        .collect();
    let reports = evaluate(&rows)?;
    write_output(a.out.as_deref(), |w| {
        Ok(write_reports(w, &reports, a.format).map_err(io_err(Path::new("<eval>")))?)
    })
}

pub fn grid(a: GridArgs) -> CliResult<()> {
    let spec = GridSpec { cell_deg: a.cell_deg, layer_m: a.layer_m, emission_factor: a.emission_factor };
    spec.validate()?;
    let model = load_model_file(&a.model)?;
    let paths = track_paths(&a.tracks)?;
    let grids = paths
        .par_iter()
        .map(|p| {
            let track = load_track(p, None)?;
            let flow = instantaneous_from_model(&model, &track, a.step)?;
            Ok(grid_flight(&track, &flow, &spec)?)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut total = merge(&grids)?;
    if grids.is_empty() {
        total = fuelburn::emissions::EmissionGrid::new(spec);
    }
    write_output(a.out.as_deref(), |w| Ok(export_csv(&total, w)?))?;
    eprintln!("{} flights, {} cells, {:.3} kg CO2", paths.len(), total.len(), total.total_kg());
    Ok(())
}

pub fn convergence(a: ConvergenceArgs, seed: u64) -> CliResult<()> {
    if a.sizes.is_empty() || a.radii.is_empty() {
        return Err(CliError::Usage("--sizes and --radii must be non-empty".into()));
    }
    if a.test_size == 0 {
        return Err(CliError::Usage("--test-size must be positive".into()));
    }
    let cfg = synth_config(a.synth_config.as_deref())?;
    let largest = *a.sizes.iter().max().expect("non-empty");
    let test_seed = seed::derive(seed, Stream::Split, 0);
    let mut errors = vec![vec![0.0; a.radii.len()]; a.sizes.len()];
    for (j, &radius) in a.radii.iter().enumerate() {
        let pool = make_dataset(&cfg, largest, radius, radius, seed)?;
        let test = make_dataset(&cfg, a.test_size, radius, radius, test_seed)?;
        let truth: Vec<f64> = test.iter().map(|s| s.q_true).collect();
        for (i, &size) in a.sizes.iter().enumerate() {
            let config = ModelConfig {
                n_h: radius,
                n_v: radius,
                hidden_sizes: a.hidden.clone(),
                learning_rate: a.learning_rate,
                final_lr_fraction: a.final_lr_fraction,
                optimizer: a.optimizer.into(),
                batch_size: a.batch_size,
                epochs: a.epochs,
                seed,
                t_max: cfg.t_max,
                type_vocabulary: cfg.type_vocabulary(),
                ..ModelConfig::default()
            };
            let model = fit(&pool[..size], &config)?.model;
            errors[i][j] = mape(&model.predict_samples(&test)?, &truth)?;
        }
    }
    let sizes: Vec<f64> = a.sizes.iter().map(|&s| s as f64).collect();
    let slopes: Vec<String> = (0..a.radii.len())
        .map(|j| {
            let col: Vec<f64> = errors.iter().map(|row| row[j]).collect();
            convergence_slope(&sizes, &col).map(|m| m.to_string()).unwrap_or_default()
        })
        .collect();
    write_output(a.out.as_deref(), |w| {
        let e = io_err(Path::new("<convergence>"));
        let header: Vec<String> = a.radii.iter().map(|r| format!("N={r}")).collect();
        writeln!(w, "size,{}", header.join(",")).map_err(&e)?;
        for (size, row) in a.sizes.iter().zip(&errors) {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{size},{}", cells.join(",")).map_err(&e)?;
        }
        writeln!(w, "slope,{}", slopes.join(",")).map_err(&e)?;
        Ok(())
    })
}
