//! Evaluation: scene corruption, reconstruction scores, model entropy,
//! top objects per hidden unit and context counts.

use ndarray::{Array1, ArrayView1};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{GrowingModel, ReconstructionMode};
use crate::rbm::SceneVector;

/// A corrupted copy of a binary scene.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionResult {
    pub corrupted: SceneVector,
    /// Positions selected for corruption, whether or not they were flipped.
    pub mask: Vec<bool>,
    pub rate: f64,
}

impl CorruptionResult {
    pub fn selected(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

/// Selects `round(alpha * |v|)` distinct positions uniformly at random and
/// flips each of them with probability one half.
pub fn corrupt<R: Rng + ?Sized>(scene: &SceneVector, alpha: f64, rng: &mut R) -> Result<CorruptionResult> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("corruption rate must lie in [0, 1], got {alpha}")));
    }
    if !scene.is_binary() {
        return Err(Error::invalid("only binary scenes can be corrupted"));
    }
    let n = scene.len();
    let count = (alpha * n as f64).round() as usize;
    let mut values = scene.values().to_owned();
    let mut mask = vec![false; n];
    for i in index::sample(rng, n, count) {
        mask[i] = true;
        if rng.random_bool(0.5) {
            values[i] = 1.0 - values[i];
        }
    }
    Ok(CorruptionResult {
        corrupted: SceneVector::from_array_unchecked(values),
        mask,
        rate: alpha,
    })
}

/// Corrupts every scene with one seeded generator, in order.
pub fn corrupt_all(scenes: &[SceneVector], alpha: f64, seed: u64) -> Result<Vec<CorruptionResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    scenes.iter().map(|s| corrupt(s, alpha, &mut rng)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionScores {
    /// Full-vector error normalized by the number of selected dimensions.
    pub cd: f64,
    /// Full-vector error normalized by the corruption actually introduced.
    pub cda: f64,
    /// As `cd`, counting errors on the selected positions only.
    pub cd_k: f64,
    /// As `cda`, counting errors on the selected positions only.
    pub cda_k: f64,
}

/// Scores reconstructions against the originals.
///
/// The `cd` denominators are the total count of selected positions, which is
/// `alpha * |v| * |V|` when every scene has the same width.
pub fn score_reconstruction(
    originals: &[SceneVector],
    corrupted: &[CorruptionResult],
    reconstructed: &[SceneVector],
) -> Result<ReconstructionScores> {
    if originals.len() != corrupted.len() || originals.len() != reconstructed.len() {
        return Err(Error::invalid(format!(
            "score_reconstruction needs equal-length lists, got {}, {}, {}",
            originals.len(),
            corrupted.len(),
            reconstructed.len()
        )));
    }
    let mut full_err = 0.0;
    let mut masked_err = 0.0;
    let mut introduced = 0.0;
    let mut selected = 0usize;
    for ((v, c), r) in originals.iter().zip(corrupted).zip(reconstructed) {
        let n = v.len();
        for (len, what) in [
            (c.corrupted.len(), "corrupted scene"),
            (c.mask.len(), "corruption mask"),
            (r.len(), "reconstruction"),
        ] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    context: what,
                    expected: n,
                    found: len,
                });
            }
        }
        for i in 0..n {
            let orig = v.as_slice()[i];
            let err = (orig - r.as_slice()[i]).abs();
            full_err += err;
            if c.mask[i] {
                masked_err += err;
            }
            introduced += (orig - c.corrupted.as_slice()[i]).abs();
        }
        selected += c.selected();
    }
    if selected == 0 {
        return Err(Error::Degenerate("no position was selected for corruption"));
    }
    if introduced == 0.0 {
        return Err(Error::Degenerate("corruption did not change any bit"));
    }
    let selected = selected as f64;
    // One division per score: with binary inputs every operand is an exact
    // integer, so each score is the correctly rounded ratio.
    Ok(ReconstructionScores {
        cd: (selected - full_err) / selected,
        cda: (introduced - full_err) / introduced,
        cd_k: (selected - masked_err) / selected,
        cda_k: (introduced - masked_err) / introduced,
    })
}

/// Corrupts, reconstructs and scores a test set in one go.
pub fn reconstruction_benchmark(
    model: &GrowingModel,
    scenes: &[SceneVector],
    corrupted: &[CorruptionResult],
    mode: ReconstructionMode,
    steps: usize,
) -> Result<ReconstructionScores> {
    if scenes.len() != corrupted.len() {
        return Err(Error::invalid("one corruption per scene is required"));
    }
    let reconstructed = corrupted
        .iter()
        .map(|c| model.reconstruct(&c.corrupted, &c.mask, mode, steps))
        .collect::<Result<Vec<_>>>()?;
    score_reconstruction(scenes, corrupted, &reconstructed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerEntropy {
    pub h_object_given_context: f64,
    pub h_context_given_scene: f64,
    pub combined: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    /// Layer means of the per-layer terms.
    pub h_object_given_context: f64,
    pub h_context_given_scene: f64,
    /// `rho * H(o|c) + (1 - rho) * H(c|s)`, equal to the layer mean of the
    /// per-layer combined values.
    pub combined: f64,
    pub rho: f64,
    pub per_layer: Vec<LayerEntropy>,
}

fn entropy(p: ArrayView1<'_, f64>) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

fn softmax(x: ArrayView1<'_, f64>) -> Array1<f64> {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = x.mapv(|v| (v - max).exp());
    let z = e.sum();
    e / z
}

/// Weighted entropy of the model over `scenes`, natural log.
///
/// Per layer, `p(o|c_j)` is the softmax of hidden unit `j`'s incoming weights
/// (contexts weighted uniformly) and `p(c|s)` is the layer's activation
/// vector for scene `s` normalized to sum to one.
pub fn model_entropy(model: &GrowingModel, scenes: &[SceneVector], rho: f64) -> Result<EntropyReport> {
    if scenes.is_empty() {
        return Err(Error::Empty("entropy scene list"));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::invalid(format!("rho must lie in [0, 1], got {rho}")));
    }
    let n_layers = model.layers().len();
    let mut context_given_scene = vec![0.0; n_layers];
    for s in scenes {
        for (acc, h) in context_given_scene.iter_mut().zip(model.propagate_up(s)?) {
            let total = h.values().sum();
            *acc += entropy((h.values().to_owned() / total).view());
        }
    }
    let per_layer: Vec<LayerEntropy> = model
        .layers()
        .iter()
        .zip(context_given_scene)
        .map(|(layer, hcs)| {
            let w = layer.rbm.weights();
            let hoc = w
                .columns()
                .into_iter()
                .map(|col| entropy(softmax(col).view()))
                .sum::<f64>()
                / w.ncols() as f64;
            let hcs = hcs / scenes.len() as f64;
            LayerEntropy {
                h_object_given_context: hoc,
                h_context_given_scene: hcs,
                combined: rho * hoc + (1.0 - rho) * hcs,
            }
        })
        .collect();
    let mean = |f: fn(&LayerEntropy) -> f64| per_layer.iter().map(f).sum::<f64>() / n_layers as f64;
    let h_object_given_context = mean(|l| l.h_object_given_context);
    let h_context_given_scene = mean(|l| l.h_context_given_scene);
    Ok(EntropyReport {
        h_object_given_context,
        h_context_given_scene,
        combined: rho * h_object_given_context + (1.0 - rho) * h_context_given_scene,
        rho,
        per_layer,
    })
}

/// Labels of the visible units feeding `layer`: vocabulary labels for the
/// bottom layer, `L<l>:h<j>` names of the hidden units below otherwise.
pub fn visible_labels(model: &GrowingModel, layer: usize) -> Result<Vec<String>> {
    model.layer(layer)?;
    if layer == 0 {
        return Ok(model.vocabulary().labels().to_vec());
    }
    let below = model.layer(layer - 1)?;
    Ok((0..below.n_hidden())
        .map(|j| format!("L{}:h{}", layer - 1, j))
        .collect())
}

/// For every hidden unit of `layer`, the `k` visible labels with the largest
/// weights, strongest first; ties go to the lower visible index.
pub fn top_objects(model: &GrowingModel, layer: usize, k: usize) -> Result<Vec<Vec<String>>> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let labels = visible_labels(model, layer)?;
    let w = model.layer(layer)?.weights();
    let k = k.min(w.nrows());
    Ok(w.columns()
        .into_iter()
        .map(|col| {
            let mut order: Vec<usize> = (0..col.len()).collect();
            order.sort_by(|&a, &b| col[b].total_cmp(&col[a]).then(a.cmp(&b)));
            order[..k].iter().map(|&i| labels[i].clone()).collect()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextCounts {
    pub total: usize,
    pub per_layer: Vec<usize>,
    pub layers: usize,
}

pub fn context_counts(model: &GrowingModel) -> ContextCounts {
    let per_layer = model.hidden_sizes();
    ContextCounts {
        total: per_layer.iter().sum(),
        layers: per_layer.len(),
        per_layer,
    }
}
