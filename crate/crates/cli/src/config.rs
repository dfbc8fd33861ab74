//! Experiment configuration: a plain `key = value` file whose keys can all be
//! overridden from the command line.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use incbm::growth::{default_patience_neuron, NeuronInit, DEFAULT_PATIENCE_LAYER};
use incbm::rbm::DEFAULT_GIBBS_STEPS;
use incbm::{ConfidenceRule, ModelConfig, SyntheticSpec, TrainMode, Variant};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub variant: Variant,
    /// Corpus file; a synthetic corpus is generated when absent.
    pub corpus: Option<PathBuf>,
    pub synthetic: SyntheticSpec,
    pub epochs: usize,
    pub mode: TrainMode,
    pub learning_rate: f64,
    pub patience_neuron: f64,
    pub patience_layer: f64,
    pub neuron_init_cap: f64,
    pub confidence_rule: ConfidenceRule,
    pub sample_hidden: bool,
    /// Fixed layer sizes for the `RBM` and `stackedRBM` baselines.
    pub hidden_sizes: Option<Vec<usize>>,
    /// Model file whose layer sizes the baselines copy.
    pub sizes_from: Option<PathBuf>,
    pub train_fraction: f64,
    pub alpha: f64,
    pub gibbs_steps: usize,
    pub rho: f64,
    pub seed: u64,
    pub output: PathBuf,
    pub model: Option<PathBuf>,
    pub test: Option<PathBuf>,
    /// Entropy checkpoint spacing in scenes; 0 evaluates the model file only.
    pub checkpoint: usize,
    pub k: usize,
    pub layer: usize,
}

/// Every recognized key, in the order [`ExperimentConfig::to_text`] writes them.
pub const KEYS: &[&str] = &[
    "variant",
    "corpus",
    "contexts",
    "scenes_per_context",
    "vocab_per_context",
    "shared_vocab",
    "objects_min",
    "objects_max",
    "noise_label_prob",
    "epochs",
    "mode",
    "learning_rate",
    "patience_neuron",
    "patience_layer",
    "neuron_init_cap",
    "confidence_rule",
    "sample_hidden",
    "hidden_sizes",
    "sizes_from",
    "train_fraction",
    "alpha",
    "gibbs_steps",
    "rho",
    "seed",
    "output",
    "model",
    "test",
    "checkpoint",
    "k",
    "layer",
];

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            variant: Variant::Irbm,
            corpus: None,
            synthetic: SyntheticSpec::default(),
            epochs: 1,
            mode: TrainMode::Online,
            learning_rate: ModelConfig::DEFAULT_LEARNING_RATE,
            patience_neuron: default_patience_neuron(),
            patience_layer: DEFAULT_PATIENCE_LAYER,
            neuron_init_cap: NeuronInit::DEFAULT_CAP,
            confidence_rule: ConfidenceRule::Partitioned,
            sample_hidden: false,
            hidden_sizes: None,
            sizes_from: None,
            train_fraction: 1.0,
            alpha: 0.4,
            gibbs_steps: DEFAULT_GIBBS_STEPS,
            rho: 0.5,
            seed: 0,
            output: PathBuf::from("out"),
            model: None,
            test: None,
            checkpoint: 100,
            k: 10,
            layer: 0,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow!("invalid value `{value}` for `{key}`: {e}"))
}

fn opt_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "variant" => self.variant = value.parse()?,
            "corpus" => self.corpus = opt_path(value),
            "contexts" => self.synthetic.contexts = num(key, value)?,
            "scenes_per_context" => self.synthetic.scenes_per_context = num(key, value)?,
            "vocab_per_context" => self.synthetic.vocab_per_context = num(key, value)?,
            "shared_vocab" => self.synthetic.shared_vocab = num(key, value)?,
            "objects_min" => self.synthetic.objects_per_scene.0 = num(key, value)?,
            "objects_max" => self.synthetic.objects_per_scene.1 = num(key, value)?,
            "noise_label_prob" => self.synthetic.noise_label_prob = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "mode" => self.mode = value.parse()?,
            "learning_rate" => self.learning_rate = num(key, value)?,
            "patience_neuron" => self.patience_neuron = num(key, value)?,
            "patience_layer" => self.patience_layer = num(key, value)?,
            "neuron_init_cap" => self.neuron_init_cap = num(key, value)?,
            "confidence_rule" => self.confidence_rule = ConfidenceRule::parse(value)?,
            "sample_hidden" => self.sample_hidden = num(key, value)?,
            "hidden_sizes" => {
                self.hidden_sizes = if value.is_empty() {
                    None
                } else {
                    Some(
                        value
                            .split(',')
                            .map(|s| num(key, s.trim()))
                            .collect::<Result<_>>()?,
                    )
                }
            }
            "sizes_from" => self.sizes_from = opt_path(value),
            "train_fraction" => self.train_fraction = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "gibbs_steps" => self.gibbs_steps = num(key, value)?,
            "rho" => self.rho = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "output" => self.output = PathBuf::from(value),
            "model" => self.model = opt_path(value),
            "test" => self.test = opt_path(value),
            "checkpoint" => self.checkpoint = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "layer" => self.layer = num(key, value)?,
            other => bail!("unknown config key `{other}`"),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment line.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", n + 1))?;
            self.set(key.trim(), value)
                .with_context(|| format!("line {}", n + 1))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut config = Self::default();
        config
            .apply_text(&text)
            .with_context(|| format!("in config {}", path.display()))?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.model_config().validate()?;
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            bail!("train_fraction must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            bail!("alpha must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.rho) {
            bail!("rho must lie in [0, 1]");
        }
        if self.gibbs_steps == 0 {
            bail!("gibbs_steps must be at least 1");
        }
        if self.k == 0 {
            bail!("k must be at least 1");
        }
        Ok(())
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            learning_rate: self.learning_rate,
            patience_neuron: self.patience_neuron,
            patience_layer: self.patience_layer,
            neuron_init: NeuronInit {
                cap: self.neuron_init_cap,
                ..NeuronInit::default()
            },
            confidence_rule: self.confidence_rule,
            sample_hidden: self.sample_hidden,
            seed: self.seed,
            ..ModelConfig::default()
        }
    }

    pub fn synthetic_spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            seed: self.seed,
            ..self.synthetic.clone()
        }
    }

    pub fn model_path(&self) -> PathBuf {
        self.model
            .clone()
            .unwrap_or_else(|| self.output.join("model.txt"))
    }

    /// The configuration as `key = value` text; parsing it back yields an
    /// equal configuration.
    pub fn to_text(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let s = &self.synthetic;
        let values: Vec<String> = vec![
            self.variant.to_string(),
            path(&self.corpus),
            s.contexts.to_string(),
            s.scenes_per_context.to_string(),
            s.vocab_per_context.to_string(),
            s.shared_vocab.to_string(),
            s.objects_per_scene.0.to_string(),
            s.objects_per_scene.1.to_string(),
            s.noise_label_prob.to_string(),
            self.epochs.to_string(),
            match self.mode {
                TrainMode::Online => "online".into(),
                TrainMode::Batch => "batch".into(),
            },
            self.learning_rate.to_string(),
            self.patience_neuron.to_string(),
            self.patience_layer.to_string(),
            self.neuron_init_cap.to_string(),
            self.confidence_rule.name().to_string(),
            self.sample_hidden.to_string(),
            self.hidden_sizes
                .as_ref()
                .map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
                .unwrap_or_default(),
            path(&self.sizes_from),
            self.train_fraction.to_string(),
            self.alpha.to_string(),
            self.gibbs_steps.to_string(),
            self.rho.to_string(),
            self.seed.to_string(),
            self.output.display().to_string(),
            path(&self.model),
            path(&self.test),
            self.checkpoint.to_string(),
            self.k.to_string(),
            self.layer.to_string(),
        ];
        KEYS.iter()
            .zip(values)
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}
