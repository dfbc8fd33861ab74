//! Corpus ingestion, vocabulary handling, splitting and a planted-context
//! scene generator.
//!
//! Corpus files hold one scene per line as three tab-separated fields:
//! `scene_id`, an optional `context_id` (may be empty) and a comma-separated
//! label list. Lines starting with `#` and blank lines are skipped.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rbm::SceneVector;

/// Ordered object labels with a reverse index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary keeping the given order. Duplicates are rejected.
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::Empty("vocabulary"));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            validate_label(label)?;
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate vocabulary label `{label}`")));
            }
        }
        Ok(Vocabulary { labels, index })
    }

    /// Lexicographically sorted union of the records' labels.
    pub fn from_records(records: &[SceneRecord]) -> Result<Self> {
        let all: BTreeSet<&str> = records
            .iter()
            .flat_map(|r| r.labels.iter().map(String::as_str))
            .collect();
        Self::new(all)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> Option<&str> {
        self.labels.get(i).map(String::as_str)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Binary presence vector for `record`.
    pub fn encode(&self, record: &SceneRecord) -> Result<SceneVector> {
        let mut bits = vec![false; self.len()];
        for label in &record.labels {
            let i = self
                .index_of(label)
                .ok_or_else(|| Error::UnknownLabel(label.clone()))?;
            bits[i] = true;
        }
        Ok(SceneVector::from_bits(&bits))
    }

    /// Labels whose entry is at or above the binarization threshold.
    pub fn decode(&self, v: &SceneVector) -> Result<BTreeSet<String>> {
        if v.len() != self.len() {
            return Err(Error::DimensionMismatch {
                context: "decode",
                expected: self.len(),
                found: v.len(),
            });
        }
        Ok(v
            .to_bits()
            .into_iter()
            .zip(&self.labels)
            .filter(|(bit, _)| *bit)
            .map(|(_, l)| l.clone())
            .collect())
    }
}

fn validate_label(label: &str) -> Result<()> {
    if label.is_empty() {
        return Err(Error::invalid("empty label"));
    }
    if label != label.trim() || label.contains([',', '\t', '\n', '\r']) {
        return Err(Error::invalid(format!(
            "label `{label}` contains a separator or surrounding whitespace"
        )));
    }
    Ok(())
}

/// One observed scene.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneRecord {
    pub scene_id: String,
    pub labels: BTreeSet<String>,
    pub context_id: Option<String>,
}

impl SceneRecord {
    pub fn new<I, S>(scene_id: impl Into<String>, labels: I, context_id: Option<String>) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: BTreeSet<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::Empty("scene labels"));
        }
        for l in &labels {
            validate_label(l)?;
        }
        Ok(SceneRecord {
            scene_id: scene_id.into(),
            labels,
            context_id,
        })
    }
}

/// Parses corpus text. Returns the sorted vocabulary and the records in file order.
pub fn parse_corpus(text: &str) -> Result<(Vocabulary, Vec<SceneRecord>)> {
    let mut records = Vec::new();
    let mut ids = HashSet::new();
    for (n, line) in text.lines().enumerate() {
        let lineno = n + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                lineno,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let scene_id = fields[0].trim();
        if scene_id.is_empty() {
            return Err(Error::parse(lineno, "empty scene id"));
        }
        if !ids.insert(scene_id.to_string()) {
            return Err(Error::parse(lineno, format!("duplicate scene id `{scene_id}`")));
        }
        let context = fields[1].trim();
        let context = (!context.is_empty()).then(|| context.to_string());
        let labels: Vec<&str> = fields[2]
            .split(',')
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        let record = SceneRecord::new(scene_id, labels, context)
            .map_err(|e| Error::parse(lineno, e.to_string()))?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::Empty("corpus"));
    }
    let vocab = Vocabulary::from_records(&records)?;
    Ok((vocab, records))
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<(Vocabulary, Vec<SceneRecord>)> {
    let text = fs::read_to_string(path)?;
    parse_corpus(&text)
}

/// Serializes records in the corpus line format.
pub fn format_corpus(records: &[SceneRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let labels: Vec<&str> = r.labels.iter().map(String::as_str).collect();
        let _ = writeln!(
            out,
            "{}\t{}\t{}",
            r.scene_id,
            r.context_id.as_deref().unwrap_or(""),
            labels.join(",")
        );
    }
    out
}

pub fn save_corpus(path: impl AsRef<Path>, records: &[SceneRecord]) -> Result<()> {
    fs::write(path, format_corpus(records))?;
    Ok(())
}

/// Seeded shuffle followed by a cut at `round(train_fraction * n)`, kept
/// within `[1, n - 1]` so both halves are non-empty.
pub fn split(
    records: &[SceneRecord],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<SceneRecord>, Vec<SceneRecord>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    if records.len() < 2 {
        return Err(Error::invalid("split needs at least two records"));
    }
    let mut shuffled = records.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n = shuffled.len();
    let cut = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let test = shuffled.split_off(cut);
    Ok((shuffled, test))
}

/// Parameters of the planted-context generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub contexts: usize,
    pub scenes_per_context: usize,
    pub vocab_per_context: usize,
    /// Labels available to every context.
    pub shared_vocab: usize,
    /// Inclusive range of distinct objects per scene.
    pub objects_per_scene: (usize, usize),
    /// Per-slot chance of drawing from the full vocabulary instead.
    pub noise_label_prob: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            contexts: 8,
            scenes_per_context: 200,
            vocab_per_context: 8,
            shared_vocab: 0,
            objects_per_scene: (4, 8),
            noise_label_prob: 0.0,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.objects_per_scene;
        if self.contexts == 0 {
            return Err(Error::invalid("synthetic spec needs at least one context"));
        }
        if self.scenes_per_context == 0 {
            return Err(Error::invalid("synthetic spec needs at least one scene per context"));
        }
        if lo == 0 || lo > hi {
            return Err(Error::invalid(format!("bad objects-per-scene range {lo}..={hi}")));
        }
        if hi > self.vocab_per_context + self.shared_vocab {
            return Err(Error::invalid(format!(
                "{hi} objects per scene exceed the {} labels available to a context",
                self.vocab_per_context + self.shared_vocab
            )));
        }
        if !(0.0..=1.0).contains(&self.noise_label_prob) {
            return Err(Error::invalid("noise probability must lie in [0, 1]"));
        }
        Ok(())
    }

    fn context_label(&self, c: usize, i: usize) -> String {
        format!("ctx{c:03}_obj{i:03}")
    }

    fn shared_label(&self, i: usize) -> String {
        format!("shared_obj{i:03}")
    }

    pub fn context_name(c: usize) -> String {
        format!("ctx{c:03}")
    }
}

/// Generates a planted-context corpus.
///
/// Contexts are assigned round-robin, so every context gets exactly
/// `scenes_per_context` scenes; the stream is then shuffled.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Vocabulary, Vec<SceneRecord>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pools: Vec<Vec<String>> = (0..spec.contexts)
        .map(|c| {
            (0..spec.vocab_per_context)
                .map(|i| spec.context_label(c, i))
                .chain((0..spec.shared_vocab).map(|i| spec.shared_label(i)))
                .collect()
        })
        .collect();
    let mut all: Vec<String> = pools.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    all.sort();

    let total = spec.contexts * spec.scenes_per_context;
    let width = total.to_string().len();
    let (lo, hi) = spec.objects_per_scene;
    let mut records = Vec::with_capacity(total);
    for s in 0..total {
        let c = s % spec.contexts;
        let count = rng.random_range(lo..=hi);
        let mut labels = BTreeSet::new();
        while labels.len() < count {
            let pool = if spec.noise_label_prob > 0.0 && rng.random_bool(spec.noise_label_prob) {
                &all
            } else {
                &pools[c]
            };
            labels.insert(pool.choose(&mut rng).expect("pools are non-empty").clone());
        }
        records.push(SceneRecord {
            scene_id: format!("scene{s:0width$}"),
            labels,
            context_id: Some(SyntheticSpec::context_name(c)),
        });
    }
    records.shuffle(&mut rng);
    let vocab = Vocabulary::new(all)?;
    Ok((vocab, records))
}
