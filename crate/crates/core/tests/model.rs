use fuelburn::fuelnet::{
    forward, initialize, loss, read_dataset, save_model, train, write_dataset, Activation, FeatureRecord, ModelConfig,
    TargetScaler, TrainingSample,
};
use fuelburn::spectral::{featurize, SpectralFeature};
use fuelburn::synth::{make_dataset, make_segment, SynthConfig};
use fuelburn::trajectory::{clean_track, parse_track, write_track, AircraftMeta, CleaningConfig, TrackFormat};
use proptest::prelude::*;

fn small_config(synth: &SynthConfig, hidden: Vec<usize>) -> ModelConfig {
    ModelConfig {
        n_h: 10,
        n_v: 10,
        hidden_sizes: hidden,
        epochs: 8,
        learning_rate: 0.1,
        t_max: synth.t_max,
        type_vocabulary: synth.type_vocabulary(),
        ..ModelConfig::default()
    }
}

fn model_bytes(samples: &[TrainingSample], config: &ModelConfig) -> Vec<u8> {
    let mut out = Vec::new();
    save_model(&train(samples, config).unwrap().model, &mut out).unwrap();
    out
}

fn dataset_bytes(synth: &SynthConfig, n: usize, threads: usize) -> Vec<u8> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let data = pool.install(|| make_dataset(synth, n, 8, 8, 42)).unwrap();
    let records: Vec<FeatureRecord> = data.iter().map(FeatureRecord::from).collect();
    let mut out = Vec::new();
    write_dataset(&records, &mut out).unwrap();
    out
}

#[test]
fn dataset_bytes_do_not_depend_on_thread_count() {
    let synth = SynthConfig::default();
    let one = dataset_bytes(&synth, 300, 1);
    assert_eq!(one, dataset_bytes(&synth, 300, 1));
    assert_eq!(one, dataset_bytes(&synth, 300, 3));
    let back = read_dataset(one.as_slice()).unwrap();
    assert_eq!(back.len(), 300);
    assert!(back.iter().all(|r| r.q_true.is_some_and(|q| q > 0.0)));
}

#[test]
fn aircraft_types_are_drawn_evenly() {
    let synth = SynthConfig::default();
    let n = 20_000;
    let mut counts = vec![0usize; synth.classes.len()];
    for i in 0..n {
        counts[synth.flight(9, i).unwrap().1] += 1;
    }
    for c in counts {
        let share = c as f64 / n as f64;
        assert!((share - 1.0 / 3.0).abs() <= 0.02, "share {share}");
    }
}

#[test]
fn whole_flight_features_survive_a_file_round_trip() {
    let synth = SynthConfig::default();
    let mut checked = 0;
    for i in 0..60 {
        let seg = make_segment(&synth, 5, i).unwrap();
        let track = seg.flight.track();
        if seg.t_start != track.start() || seg.t_end != track.end() {
            continue;
        }
        let sample = seg.training_sample(12, 12, synth.t_max).unwrap();
        let mut buf = Vec::new();
        write_track(track, &mut buf, TrackFormat::Jsonl).unwrap();
        let parsed = parse_track(buf.as_slice(), TrackFormat::Jsonl, None).unwrap();
        let (clean, report) = clean_track(&parsed, &CleaningConfig::default()).unwrap();
        assert_eq!(report.kept, track.len());
        assert_eq!(featurize(&clean, 12, 12, synth.t_max).unwrap(), sample.feature);
        checked += 1;
    }
    assert!(checked >= 5);
}

#[test]
fn training_is_reproducible_and_order_sensitive_only_without_shuffle() {
    let synth = SynthConfig::default();
    let data = make_dataset(&synth, 1200, 10, 10, 7).unwrap();
    let mut reversed = data.clone();
    reversed.reverse();

    let shuffled = small_config(&synth, vec![16, 8]);
    let a = model_bytes(&data, &shuffled);
    assert_eq!(a, model_bytes(&data, &shuffled));
    assert_eq!(a, model_bytes(&reversed, &shuffled));

    let ordered = ModelConfig { shuffle: false, ..shuffled };
    assert_ne!(model_bytes(&data, &ordered), model_bytes(&reversed, &ordered));
}

#[test]
fn deep_network_fits_better_than_a_linear_one() {
    let synth = SynthConfig::default();
    let data = make_dataset(&synth, 3000, 10, 10, 8).unwrap();
    let deep = train(&data, &small_config(&synth, vec![256, 128, 64])).unwrap().model;
    let linear_config = ModelConfig { activation: Activation::Linear, ..small_config(&synth, vec![8]) };
    let linear = train(&data, &linear_config).unwrap().model;
    let (l_deep, l_linear) = (loss(&deep, &data).unwrap(), loss(&linear, &data).unwrap());
    assert!(l_deep <= l_linear, "deep {l_deep} vs linear {l_linear}");
}

fn arb_feature() -> impl Strategy<Value = (SpectralFeature, f64, f64)> {
    (
        prop::collection::vec(-20_000.0f64..20_000.0, 7),
        prop::collection::vec(-400.0f64..400.0, 7),
        60.0f64..7200.0,
        0.0f64..40.0,
        10.0f64..90.0,
    )
        .prop_map(|(alpha, beta, t0, age, wingspan)| {
            (SpectralFeature { alpha, beta, t0, t_max: 7200.0 }, age, wingspan)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn predictions_stay_strictly_inside_the_scaler_range(
        (feature, age, wingspan) in arb_feature(),
        seed in 0u64..50,
        ty in 0usize..3,
    ) {
        let config = ModelConfig {
            n_h: 6,
            n_v: 6,
            hidden_sizes: vec![32, 16],
            seed,
            type_vocabulary: vec!["a".into(), "b".into(), "c".into()],
            ..ModelConfig::default()
        };
        let model = initialize(&config, TargetScaler::new(0.0, 5000.0).unwrap()).unwrap();
        let meta = AircraftMeta { aircraft_type: config.type_vocabulary[ty].clone(), age, wingspan };
        let q = forward(&model, feature.t0, &meta, &feature).unwrap();
        prop_assert!(q > 0.0 && q < 5000.0, "q = {}", q);
    }
}
