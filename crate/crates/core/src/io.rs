//! Versioned text serialization of a [`GrowingModel`].
//!
//! Every float is written with Rust's shortest round-trip formatting, so a
//! model read back from its text is bit-identical and re-serializes to the
//! same bytes.
//!
//! ```text
//! incbm-model 1
//! variant diBM
//! seed 0
//! ...
//! vocabulary 3
//! a
//! b
//! c
//! layers 1
//! layer 0 3 2 active
//! confidence_baseline -0.1 3.2
//! layer_baseline 0
//! 0.1 -0.2
//! ...
//! events 1
//! 12 neuron_added 0
//! end
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;

use crate::data::Vocabulary;
use crate::error::{Error, Result};
use crate::growth::{ConfidenceRule, ConfidenceState, LayerGrowthState, ModelConfidence, NeuronInit};
use crate::model::{GrowingModel, GrowthEvent, GrowthKind, LayerState, ModelConfig, Variant};
use crate::rbm::RbmLayer;

pub const FORMAT_MAGIC: &str = "incbm-model";
pub const FORMAT_VERSION: u32 = 1;

pub fn model_to_string(model: &GrowingModel) -> String {
    let c = model.config();
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "{FORMAT_MAGIC} {FORMAT_VERSION}");
    let _ = writeln!(w, "variant {}", model.variant());
    let _ = writeln!(w, "seed {}", c.seed);
    let _ = writeln!(w, "learning_rate {}", c.learning_rate);
    let _ = writeln!(w, "patience_neuron {}", c.patience_neuron);
    let _ = writeln!(w, "patience_layer {}", c.patience_layer);
    let _ = writeln!(w, "init_std {}", c.init_std);
    let _ = writeln!(w, "new_layer_range {}", c.new_layer_range);
    let _ = writeln!(w, "ripple_weight {}", c.ripple_weight);
    let _ = writeln!(w, "neuron_init_delta {}", c.neuron_init.delta);
    let _ = writeln!(w, "neuron_init_cap {}", c.neuron_init.cap);
    let _ = writeln!(w, "confidence_rule {}", c.confidence_rule.name());
    let _ = writeln!(w, "sample_hidden {}", c.sample_hidden);
    let _ = writeln!(w, "scenes_seen {}", model.scenes_seen());

    let labels = model.vocabulary().labels();
    let _ = writeln!(w, "vocabulary {}", labels.len());
    for l in labels {
        let _ = writeln!(w, "{l}");
    }

    let _ = writeln!(w, "layers {}", model.layers().len());
    for (i, layer) in model.layers().iter().enumerate() {
        let rbm = &layer.rbm;
        let _ = writeln!(
            w,
            "layer {i} {} {} {}",
            rbm.n_visible(),
            rbm.n_hidden(),
            if layer.frozen { "frozen" } else { "active" }
        );
        match &layer.confidence.baseline {
            Some(b) => {
                let _ = writeln!(w, "confidence_baseline {} {}", b.min_confidence, b.partition);
            }
            None => {
                let _ = writeln!(w, "confidence_baseline none");
            }
        }
        let _ = writeln!(w, "layer_baseline {}", layer.growth.baseline);
        for row in rbm.weights().rows() {
            let row: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(w, "{}", row.join(" "));
        }
    }

    let _ = writeln!(w, "events {}", model.events().len());
    for e in model.events() {
        let _ = writeln!(w, "{} {} {}", e.scene_index, e.kind.name(), e.layer_index);
    }
    let _ = writeln!(w, "end");
    out
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        match self.iter.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => Err(Error::parse(self.line + 1, "unexpected end of model file")),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, msg)
    }

    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next()?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v),
            _ => Err(self.err(format!("expected `{key} <value>`, found `{line}`"))),
        }
    }

    fn value<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let raw = self.keyed(key)?;
        self.parse(raw, key)
    }

    fn parse<T: FromStr>(&self, raw: &str, what: &str) -> Result<T> {
        raw.parse()
            .map_err(|_| self.err(format!("invalid {what} `{raw}`")))
    }
}

pub fn model_from_str(text: &str) -> Result<GrowingModel> {
    let mut lines = Lines {
        iter: text.lines().enumerate(),
        line: 0,
    };
    let header = lines.next()?;
    if header != format!("{FORMAT_MAGIC} {FORMAT_VERSION}") {
        return Err(lines.err(format!("unsupported model header `{header}`")));
    }
    let variant: Variant = {
        let raw = lines.keyed("variant")?;
        raw.parse().map_err(|e: Error| lines.err(e.to_string()))?
    };
    let seed = lines.value("seed")?;
    let learning_rate = lines.value("learning_rate")?;
    let patience_neuron = lines.value("patience_neuron")?;
    let patience_layer = lines.value("patience_layer")?;
    let init_std = lines.value("init_std")?;
    let new_layer_range = lines.value("new_layer_range")?;
    let ripple_weight = lines.value("ripple_weight")?;
    let delta = lines.value("neuron_init_delta")?;
    let cap = lines.value("neuron_init_cap")?;
    let confidence_rule = {
        let raw = lines.keyed("confidence_rule")?;
        ConfidenceRule::parse(raw).map_err(|e| lines.err(e.to_string()))?
    };
    let sample_hidden = lines.value("sample_hidden")?;
    let config = ModelConfig {
        learning_rate,
        patience_neuron,
        patience_layer,
        init_std,
        new_layer_range,
        ripple_weight,
        neuron_init: NeuronInit { delta, cap },
        confidence_rule,
        sample_hidden,
        seed,
    };
    let scenes_seen = lines.value("scenes_seen")?;

    let n_labels: usize = lines.value("vocabulary")?;
    let mut labels = Vec::with_capacity(n_labels);
    for _ in 0..n_labels {
        labels.push(lines.next()?.to_string());
    }
    let vocabulary = Vocabulary::new(labels).map_err(|e| lines.err(e.to_string()))?;

    let n_layers: usize = lines.value("layers")?;
    let mut layers = Vec::with_capacity(n_layers);
    for expected in 0..n_layers {
        let spec = lines.keyed("layer")?;
        let parts: Vec<&str> = spec.split(' ').collect();
        if parts.len() != 4 || parts[0] != expected.to_string() {
            return Err(lines.err(format!("malformed layer header `layer {spec}`")));
        }
        let n_visible: usize = lines.parse(parts[1], "visible count")?;
        let n_hidden: usize = lines.parse(parts[2], "hidden count")?;
        let frozen = match parts[3] {
            "frozen" => true,
            "active" => false,
            other => return Err(lines.err(format!("unknown layer status `{other}`"))),
        };
        let baseline = match lines.keyed("confidence_baseline")? {
            "none" => None,
            raw => {
                let (a, b) = raw
                    .split_once(' ')
                    .ok_or_else(|| lines.err("confidence_baseline needs two values"))?;
                Some(ModelConfidence {
                    min_confidence: lines.parse(a, "confidence")?,
                    partition: lines.parse(b, "partition")?,
                })
            }
        };
        let layer_baseline: f64 = lines.value("layer_baseline")?;

        let mut weights = Vec::with_capacity(n_visible * n_hidden);
        for _ in 0..n_visible {
            let row = lines.next()?;
            let before = weights.len();
            for tok in row.split(' ') {
                weights.push(lines.parse::<f64>(tok, "weight")?);
            }
            if weights.len() - before != n_hidden {
                return Err(lines.err(format!(
                    "expected {n_hidden} weights, found {}",
                    weights.len() - before
                )));
            }
        }
        let weights = Array2::from_shape_vec((n_visible, n_hidden), weights)
            .map_err(|e| lines.err(e.to_string()))?;
        let rbm = RbmLayer::new(weights, config.learning_rate).map_err(|e| lines.err(e.to_string()))?;
        let mut confidence = ConfidenceState::new(config.patience_neuron, config.confidence_rule)?;
        confidence.baseline = baseline;
        let mut growth = LayerGrowthState::new(config.patience_layer)?;
        growth.baseline = layer_baseline;
        layers.push(LayerState {
            rbm,
            confidence,
            growth,
            frozen,
        });
    }

    let n_events: usize = lines.value("events")?;
    let mut events = Vec::with_capacity(n_events);
    for _ in 0..n_events {
        let line = lines.next()?;
        let parts: Vec<&str> = line.split(' ').collect();
        if parts.len() != 3 {
            return Err(lines.err(format!("malformed event `{line}`")));
        }
        events.push(GrowthEvent {
            scene_index: lines.parse(parts[0], "scene index")?,
            kind: parts[1].parse::<GrowthKind>().map_err(|e| lines.err(e.to_string()))?,
            layer_index: lines.parse(parts[2], "layer index")?,
        });
    }
    if lines.next()? != "end" {
        return Err(lines.err("expected `end`"));
    }
    GrowingModel::from_parts(variant, vocabulary, config, layers, scenes_seen, events)
}

pub fn save_model(path: impl AsRef<Path>, model: &GrowingModel) -> Result<()> {
    fs::write(path, model_to_string(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<GrowingModel> {
    model_from_str(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, SyntheticSpec};
    use crate::rbm::SceneVector;

    fn trained(variant: Variant) -> GrowingModel {
        let (vocab, records) = generate_synthetic(&SyntheticSpec {
            scenes_per_context: 60,
            seed: 9,
            ..SyntheticSpec::default()
        })
        .unwrap();
        let scenes: Vec<SceneVector> = records.iter().map(|r| vocab.encode(r).unwrap()).collect();
        let mut m = GrowingModel::new(variant, vocab, ModelConfig::default()).unwrap();
        m.process_stream(&scenes, 1).unwrap();
        m
    }

    #[test]
    fn round_trip_is_bit_exact() {
        for variant in [Variant::Irbm, Variant::Dibm, Variant::Sirbm] {
            let m = trained(variant);
            let text = model_to_string(&m);
            let back = model_from_str(&text).unwrap();
            assert_eq!(back, m);
            assert_eq!(model_to_string(&back), text);
        }
    }

    #[test]
    fn fixed_model_round_trip() {
        let vocab = Vocabulary::new(["a", "b", "c"]).unwrap();
        let m = GrowingModel::fixed(Variant::StackedRbm, vocab, ModelConfig::default(), &[3, 2]).unwrap();
        assert_eq!(model_from_str(&model_to_string(&m)).unwrap(), m);
    }

    #[test]
    fn truncated_or_corrupt_files_fail() {
        let text = model_to_string(&trained(Variant::Irbm));
        let cut: String = text.lines().take(20).map(|l| format!("{l}\n")).collect();
        assert!(model_from_str(&cut).is_err());
        assert!(model_from_str(&text.replacen("incbm-model 1", "incbm-model 9", 1)).is_err());
        assert!(model_from_str(&text.replacen("variant iRBM", "variant DBM", 1)).is_err());
        let err = model_from_str(&text.replacen("\nend", "\nnope", 1)).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn file_round_trip() {
        let m = trained(Variant::Dibm);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        save_model(&path, &m).unwrap();
        assert_eq!(load_model(&path).unwrap(), m);
    }
}
