//! The five subcommands as library functions, so tests can drive them
//! without spawning processes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use incbm::data::{generate_synthetic, load_corpus, save_corpus, split};
use incbm::io::{load_model, model_to_string, save_model};
use incbm::metrics::{
    context_counts, corrupt_all, model_entropy, reconstruction_benchmark, top_objects,
};
use incbm::{GrowingModel, ReconstructionMode, SceneRecord, SceneVector, Variant, Vocabulary};

use crate::config::ExperimentConfig;

pub const GROWTH_HEADER: &str = "scenes_seen,total_contexts,layers,per_layer_contexts";
pub const ENTROPY_HEADER: &str =
    "scenes_seen,layers,per_layer_entropy,mean_entropy,h_object_given_context,h_context_given_scene";
pub const RECONSTRUCT_HEADER: &str = "mode,cd_k,cda_k,cd,cda";

/// Training data resolved from a configuration.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// Vocabulary of the whole corpus, so held-out scenes stay encodable.
    pub vocabulary: Vocabulary,
    pub train: Vec<SceneRecord>,
    /// Held-out records when `train_fraction < 1`.
    pub test: Option<Vec<SceneRecord>>,
}

impl Dataset {
    pub fn load(config: &ExperimentConfig) -> Result<Self> {
        let (vocabulary, records) = match &config.corpus {
            Some(path) => load_corpus(path)
                .with_context(|| format!("loading corpus {}", path.display()))?,
            None => generate_synthetic(&config.synthetic_spec())?,
        };
        let (train, test) = if config.train_fraction < 1.0 {
            let (train, test) = split(&records, config.train_fraction, config.seed)?;
            (train, Some(test))
        } else {
            (records, None)
        };
        Ok(Dataset {
            vocabulary,
            train,
            test,
        })
    }

    pub fn train_scenes(&self) -> Result<Vec<SceneVector>> {
        encode_all(&self.vocabulary, &self.train)
    }
}

pub fn encode_all(vocabulary: &Vocabulary, records: &[SceneRecord]) -> Result<Vec<SceneVector>> {
    records
        .iter()
        .map(|r| {
            vocabulary
                .encode(r)
                .with_context(|| format!("scene `{}` does not fit the model vocabulary", r.scene_id))
        })
        .collect()
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn growth_row(model: &GrowingModel) -> String {
    let counts = context_counts(model);
    format!(
        "{},{},{},{}\n",
        model.scenes_seen(),
        counts.total,
        counts.layers,
        join(&counts.per_layer)
    )
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn baseline_sizes(config: &ExperimentConfig) -> Result<Vec<usize>> {
    let sizes = match (&config.hidden_sizes, &config.sizes_from) {
        (Some(sizes), _) => sizes.clone(),
        (None, Some(path)) => load_model(path)
            .with_context(|| format!("loading {}", path.display()))?
            .hidden_sizes(),
        (None, None) => bail!("{} needs `hidden_sizes` or `sizes_from`", config.variant),
    };
    Ok(match config.variant {
        Variant::Rbm => sizes[..1].to_vec(),
        _ => sizes,
    })
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: GrowingModel,
    /// Growth-curve CSV text, header included.
    pub curve: String,
}

/// Trains a model as configured without touching the filesystem beyond
/// reading the corpus.
pub fn train_model(config: &ExperimentConfig, data: &Dataset) -> Result<TrainOutput> {
    config.validate()?;
    if config.epochs == 0 {
        bail!("epochs must be at least 1; an empty stream trains nothing");
    }
    let scenes = data.train_scenes()?;
    if scenes.is_empty() {
        bail!("the training corpus is empty");
    }
    let mut curve = format!("{GROWTH_HEADER}\n");
    let model = if config.variant.is_growing() {
        let mut model =
            GrowingModel::new(config.variant, data.vocabulary.clone(), config.model_config())?;
        for _ in 0..config.epochs {
            for s in &scenes {
                model.process_scene(s)?;
                curve.push_str(&growth_row(&model));
            }
        }
        model
    } else {
        let sizes = baseline_sizes(config)?;
        let mut model = GrowingModel::fixed(
            config.variant,
            data.vocabulary.clone(),
            config.model_config(),
            &sizes,
        )?;
        model.train_fixed(&scenes, config.epochs, config.mode)?;
        curve.push_str(&growth_row(&model));
        model
    };
    Ok(TrainOutput { model, curve })
}

/// `train`: writes the model, the growth curve, the resolved config and,
/// when splitting, the train and test corpora. Returns the written paths.
pub fn cmd_train(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let data = Dataset::load(config)?;
    let out = train_model(config, &data)?;
    let dir = &config.output;
    let mut written = Vec::new();
    let model_path = config.model_path();
    if let Some(dir) = model_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    save_model(&model_path, &out.model)
        .with_context(|| format!("writing {}", model_path.display()))?;
    written.push(model_path);
    let curve = dir.join("growth.csv");
    write_file(&curve, &out.curve)?;
    written.push(curve);
    let resolved = dir.join("config.txt");
    write_file(&resolved, &config.to_text())?;
    written.push(resolved);
    if let Some(test) = &data.test {
        for (name, records) in [("train.tsv", &data.train), ("test.tsv", test)] {
            let path = dir.join(name);
            save_corpus(&path, records)
                .with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Scenes used for evaluation: the `test` corpus when given, else the
/// held-out split, else the training stream itself. Encoded with the model's
/// vocabulary.
pub fn evaluation_scenes(
    config: &ExperimentConfig,
    vocabulary: &Vocabulary,
) -> Result<Vec<SceneVector>> {
    let records = match &config.test {
        Some(path) => {
            load_corpus(path)
                .with_context(|| format!("loading test corpus {}", path.display()))?
                .1
        }
        None => {
            let data = Dataset::load(config)?;
            data.test.unwrap_or(data.train)
        }
    };
    encode_all(vocabulary, &records).context("vocabulary mismatch between model and test corpus")
}

fn entropy_row(model: &GrowingModel, scenes: &[SceneVector], rho: f64) -> Result<String> {
    let report = model_entropy(model, scenes, rho)?;
    Ok(format!(
        "{},{},{},{},{},{}\n",
        model.scenes_seen(),
        report.per_layer.len(),
        join(report.per_layer.iter().map(|l| l.combined)),
        report.combined,
        report.h_object_given_context,
        report.h_context_given_scene
    ))
}

/// Entropy curve as CSV text.
///
/// With `checkpoint > 0` and a growing variant, training is replayed from the
/// configuration and a row is emitted every `checkpoint` scenes and at the
/// end; the replayed model must equal the model file. Otherwise the model
/// file is evaluated once.
pub fn entropy_curve(config: &ExperimentConfig) -> Result<String> {
    config.validate()?;
    let path = config.model_path();
    let model = load_model(&path).with_context(|| format!("loading model {}", path.display()))?;
    let scenes = evaluation_scenes(config, model.vocabulary())?;
    let mut csv = format!("{ENTROPY_HEADER}\n");
    if config.checkpoint == 0 || !model.variant().is_growing() {
        csv.push_str(&entropy_row(&model, &scenes, config.rho)?);
        return Ok(csv);
    }
    let data = Dataset::load(config)?;
    if &data.vocabulary != model.vocabulary() {
        bail!("vocabulary mismatch between model and training corpus");
    }
    let stream = data.train_scenes()?;
    let mut replay = GrowingModel::new(model.variant(), data.vocabulary, model.config().clone())?;
    let total = model.scenes_seen();
    if stream.is_empty() {
        bail!("the training corpus is empty");
    }
    for s in stream.iter().cycle().take(total as usize) {
        replay.process_scene(s)?;
        if replay.scenes_seen() % config.checkpoint as u64 == 0 || replay.scenes_seen() == total {
            csv.push_str(&entropy_row(&replay, &scenes, config.rho)?);
        }
    }
    if model_to_string(&replay) != model_to_string(&model) {
        bail!(
            "model {} was not produced by this configuration; \
             set checkpoint = 0 to evaluate it without replay",
            path.display()
        );
    }
    Ok(csv)
}

pub fn cmd_entropy(config: &ExperimentConfig) -> Result<PathBuf> {
    let csv = entropy_curve(config)?;
    let path = config.output.join("entropy.csv");
    write_file(&path, &csv)?;
    Ok(path)
}

/// Reconstruction table as CSV text: one row per mode over the whole
/// evaluation set.
pub fn reconstruction_table(config: &ExperimentConfig) -> Result<String> {
    config.validate()?;
    if config.alpha <= 0.0 {
        bail!("alpha must lie in (0, 1]");
    }
    let path = config.model_path();
    let model = load_model(&path).with_context(|| format!("loading model {}", path.display()))?;
    let scenes = evaluation_scenes(config, model.vocabulary())?;
    let corrupted = corrupt_all(&scenes, config.alpha, config.seed)?;
    let mut csv = format!("{RECONSTRUCT_HEADER}\n");
    for mode in [ReconstructionMode::Kcp, ReconstructionMode::Ucp] {
        let s = reconstruction_benchmark(&model, &scenes, &corrupted, mode, config.gibbs_steps)?;
        writeln!(csv, "{},{},{},{},{}", mode.name(), s.cd_k, s.cda_k, s.cd, s.cda)?;
    }
    Ok(csv)
}

pub fn cmd_reconstruct(config: &ExperimentConfig) -> Result<PathBuf> {
    let csv = reconstruction_table(config)?;
    let path = config.output.join("reconstruct.csv");
    write_file(&path, &csv)?;
    Ok(path)
}

/// `topics`: the `k` strongest visible labels of every hidden unit of
/// `layer`, one unit per line.
pub fn cmd_topics(config: &ExperimentConfig) -> Result<String> {
    let path = config.model_path();
    let model = load_model(&path).with_context(|| format!("loading model {}", path.display()))?;
    let tops = top_objects(&model, config.layer, config.k)?;
    let mut table = String::new();
    for (j, labels) in tops.iter().enumerate() {
        writeln!(table, "L{}:h{}\t{}", config.layer, j, labels.join(", "))?;
    }
    Ok(table)
}

/// `synth`: writes the configured synthetic corpus to `corpus.tsv` in the
/// output directory.
pub fn cmd_synth(config: &ExperimentConfig) -> Result<PathBuf> {
    let (_, records) = generate_synthetic(&config.synthetic_spec())?;
    let path = config.output.join("corpus.tsv");
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    save_corpus(&path, &records).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
