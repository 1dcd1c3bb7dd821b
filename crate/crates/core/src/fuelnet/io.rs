use std::io::{BufRead, BufReader, Read, Write};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{DenseLayer, ModelConfig, TargetScaler, TrainingSample, WideDeepModel};
use crate::error::{Error, Result};
use crate::spectral::SpectralFeature;
use crate::trajectory::AircraftMeta;

pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct WideBlock {
    w: Vec<f64>,
    b: f64,
}

#[derive(Serialize, Deserialize)]
struct DeepBlock {
    #[serde(rename = "W")]
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct OutBlock {
    w: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    config: ModelConfig,
    scaler: TargetScaler,
    vocabulary: Vec<String>,
    wide: WideBlock,
    deep: Vec<DeepBlock>,
    out: OutBlock,
    global_bias: f64,
}

pub fn save_model<W: Write>(model: &WideDeepModel, mut sink: W) -> Result<()> {
    let file = ModelFile {
        version: MODEL_VERSION,
        config: model.config.clone(),
        scaler: model.scaler,
        vocabulary: model.config.type_vocabulary.clone(),
        wide: WideBlock { w: model.wide_weights.to_vec(), b: model.wide_bias },
        deep: model
            .deep_layers
            .iter()
            .map(|l| DeepBlock {
                w: l.weights.outer_iter().map(|r| r.to_vec()).collect(),
                b: l.bias.to_vec(),
            })
            .collect(),
        out: OutBlock { w: model.output_weights.to_vec() },
        global_bias: model.global_bias,
    };
    serde_json::to_writer(&mut sink, &file)?;
    sink.write_all(b"\n")?;
    sink.flush()?;
    Ok(())
}

pub fn load_model<R: Read>(mut source: R) -> Result<WideDeepModel> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| Error::CorruptModel(e.to_string()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::CorruptModel(e.to_string()))?;
    let version = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::CorruptModel("missing version".into()))?;
    if version != MODEL_VERSION as u64 {
        return Err(Error::VersionMismatch {
            found: version.min(u32::MAX as u64) as u32,
            expected: MODEL_VERSION,
        });
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| Error::CorruptModel(e.to_string()))?;
    file.config
        .validate()
        .map_err(|e| Error::CorruptModel(e.to_string()))?;
    if file.vocabulary != file.config.type_vocabulary {
        return Err(Error::CorruptModel("vocabulary disagrees with config".into()));
    }
    let cfg = &file.config;
    if file.wide.w.len() != cfg.wide_input_len() {
        return Err(Error::CorruptModel("wide weight length".into()));
    }
    if file.deep.len() != cfg.hidden_sizes.len() {
        return Err(Error::CorruptModel("layer count".into()));
    }
    let mut fan_in = cfg.deep_input_len();
    let mut layers = Vec::with_capacity(file.deep.len());
    for (l, (block, &h)) in file.deep.iter().zip(&cfg.hidden_sizes).enumerate() {
        if block.w.len() != h || block.b.len() != h || block.w.iter().any(|r| r.len() != fan_in) {
            return Err(Error::CorruptModel(format!("layer {l} shape")));
        }
        let flat: Vec<f64> = block.w.iter().flatten().copied().collect();
        layers.push(DenseLayer {
            weights: Array2::from_shape_vec((h, fan_in), flat).expect("checked shape"),
            bias: Array1::from(block.b.clone()),
        });
        fan_in = h;
    }
    if file.out.w.len() != fan_in {
        return Err(Error::CorruptModel("output weight length".into()));
    }
    let scaler = TargetScaler::new(file.scaler.q_min, file.scaler.q_max)
        .map_err(|e| Error::CorruptModel(e.to_string()))?;
    let model = WideDeepModel {
        wide_weights: Array1::from(file.wide.w),
        wide_bias: file.wide.b,
        deep_layers: layers,
        output_weights: Array1::from(file.out.w),
        global_bias: file.global_bias,
        scaler,
        config: file.config,
    };
    if !model.all_finite() {
        return Err(Error::CorruptModel("non-finite parameter".into()));
    }
    Ok(model)
}

/// One line of a feature dump or labelled dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub flight_id: String,
    #[serde(default)]
    pub t_start: f64,
    pub t0: f64,
    #[serde(rename = "T_M")]
    pub t_max: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub meta: AircraftMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_true: Option<f64>,
}

impl FeatureRecord {
    pub fn from_feature(flight_id: String, t_start: f64, feature: SpectralFeature, meta: AircraftMeta, q_true: Option<f64>) -> Self {
        Self {
            flight_id,
            t_start,
            t0: feature.t0,
            t_max: feature.t_max,
            alpha: feature.alpha,
            beta: feature.beta,
            meta,
            q_true,
        }
    }

    pub fn feature(&self) -> SpectralFeature {
        SpectralFeature {
            alpha: self.alpha.clone(),
            beta: self.beta.clone(),
            t0: self.t0,
            t_max: self.t_max,
        }
    }
}

impl From<&TrainingSample> for FeatureRecord {
    fn from(s: &TrainingSample) -> Self {
        FeatureRecord::from_feature(s.flight_id.clone(), s.t_start, s.feature.clone(), s.meta.clone(), Some(s.q_true))
    }
}

impl TryFrom<FeatureRecord> for TrainingSample {
    type Error = Error;

    fn try_from(r: FeatureRecord) -> Result<Self> {
        let q_true = r
            .q_true
            .ok_or_else(|| Error::InvalidInput(format!("record {} has no q_true", r.flight_id)))?;
        Ok(TrainingSample {
            feature: r.feature(),
            flight_id: r.flight_id,
            t_start: r.t_start,
            meta: r.meta,
            q_true,
        })
    }
}

pub fn read_dataset<R: Read>(source: R) -> Result<Vec<FeatureRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: FeatureRecord = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_dataset<'a, W: Write>(records: impl IntoIterator<Item = &'a FeatureRecord>, mut sink: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut sink, r)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuelnet::{forward, ModelConfig};

    fn model() -> WideDeepModel {
        let cfg = ModelConfig {
            n_h: 2,
            n_v: 2,
            hidden_sizes: vec![3, 2],
            type_vocabulary: vec!["A".into()],
            t_max: 3600.0,
            ..Default::default()
        };
        let mut m = WideDeepModel::zeros(cfg, TargetScaler::new(0.0, 900.0).unwrap()).unwrap();
        let mut v = 0.1;
        for g in m.param_groups() {
            for i in 0..m.param_len(g) {
                m.set_param(g, i, (v as f64).sin() / 3.0);
                v += 0.77;
            }
        }
        m
    }

    #[test]
    fn round_trip_is_bitwise() {
        let m = model();
        let mut buf = Vec::new();
        save_model(&m, &mut buf).unwrap();
        let back = load_model(buf.as_slice()).unwrap();
        assert_eq!(back, m);
        let meta = AircraftMeta { aircraft_type: "A".into(), age: 3.0, wingspan: 30.0 };
        let f = SpectralFeature { alpha: vec![1e4, 3.0, -2.0], beta: vec![400.0, 1.0, 2.0], t0: 900.0, t_max: 3600.0 };
        assert_eq!(
            forward(&m, 900.0, &meta, &f).unwrap().to_bits(),
            forward(&back, 900.0, &meta, &f).unwrap().to_bits()
        );
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let mut buf = Vec::new();
        save_model(&model(), &mut buf).unwrap();
        buf.truncate(buf.len() / 2);
        assert!(matches!(load_model(buf.as_slice()), Err(Error::CorruptModel(_))));
    }

    #[test]
    fn future_version_rejected() {
        let mut buf = Vec::new();
        save_model(&model(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replacen("\"version\":1", "\"version\":7", 1);
        assert!(matches!(
            load_model(text.as_bytes()),
            Err(Error::VersionMismatch { found: 7, expected: 1 })
        ));
    }

    #[test]
    fn dataset_lines() {
        let rec = FeatureRecord {
            flight_id: "x".into(),
            t_start: 10.0,
            t0: 300.0,
            t_max: 3600.0,
            alpha: vec![1.0, 2.0],
            beta: vec![3.0, 4.0],
            meta: AircraftMeta { aircraft_type: "A".into(), age: 1.0, wingspan: 2.0 },
            q_true: Some(12.5),
        };
        let mut buf = Vec::new();
        write_dataset([&rec, &rec], &mut buf).unwrap();
        let back = read_dataset(buf.as_slice()).unwrap();
        assert_eq!(back, vec![rec.clone(), rec]);
    }
}
