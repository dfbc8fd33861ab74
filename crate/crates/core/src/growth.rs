//! Growth criteria: confidence-driven hidden-unit insertion and
//! divergence-driven layer insertion.

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};
use crate::rbm::RbmLayer;

/// Default neuron patience, `exp(-0.5)`.
pub fn default_patience_neuron() -> f64 {
    (-0.5f64).exp()
}

/// Default layer patience.
pub const DEFAULT_PATIENCE_LAYER: f64 = 0.1;

/// Per-visible-unit confidence: the strongest weight to any hidden unit.
pub fn visible_confidences(layer: &RbmLayer) -> Array1<f64> {
    layer
        .weights()
        .rows()
        .into_iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

/// How the model confidence is compared against its baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConfidenceRule {
    /// `exp(min c_v) / Z_0`, each side with its own partition function.
    #[default]
    Partitioned,
    /// `exp(min c_v)`, partition functions dropped from both sides.
    Simplified,
}

impl ConfidenceRule {
    pub fn name(self) -> &'static str {
        match self {
            ConfidenceRule::Partitioned => "partitioned",
            ConfidenceRule::Simplified => "simplified",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "partitioned" => Ok(ConfidenceRule::Partitioned),
            "simplified" => Ok(ConfidenceRule::Simplified),
            other => Err(Error::invalid(format!("unknown confidence rule `{other}`"))),
        }
    }
}

/// Model confidence computed from a set of visible confidences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfidence {
    /// `min_v c_v`.
    pub min_confidence: f64,
    /// `Z_0 = sum_v exp(c_v)`.
    pub partition: f64,
}

impl ModelConfidence {
    /// `c_m = exp(min c_v) / Z_0`.
    pub fn value(&self) -> f64 {
        self.min_confidence.exp() / self.partition
    }

    pub fn score(&self, rule: ConfidenceRule) -> f64 {
        match rule {
            ConfidenceRule::Partitioned => self.value(),
            ConfidenceRule::Simplified => self.min_confidence.exp(),
        }
    }
}

pub fn model_confidence(confidences: ArrayView1<'_, f64>) -> Result<ModelConfidence> {
    if confidences.is_empty() {
        return Err(Error::Empty("visible confidences"));
    }
    if confidences.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("model_confidence"));
    }
    let min_confidence = confidences.iter().copied().fold(f64::INFINITY, f64::min);
    let partition = confidences.iter().map(|c| c.exp()).sum();
    Ok(ModelConfidence {
        min_confidence,
        partition,
    })
}

/// Baseline state for the hidden-unit growth check of one layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceState {
    /// Confidence recorded at the last structural change; `None` until the
    /// layer has seen its first update.
    pub baseline: Option<ModelConfidence>,
    pub patience: f64,
    pub rule: ConfidenceRule,
}

impl ConfidenceState {
    pub fn new(patience: f64, rule: ConfidenceRule) -> Result<Self> {
        if !(0.0..1.0).contains(&patience) {
            return Err(Error::invalid(format!(
                "neuron patience must lie in [0, 1), got {patience}"
            )));
        }
        Ok(ConfidenceState {
            baseline: None,
            patience,
            rule,
        })
    }

    pub fn set_baseline(&mut self, confidence: ModelConfidence) {
        self.baseline = Some(confidence);
    }

    /// `current < patience * baseline`; false while no baseline exists.
    pub fn needs_new_neuron(&self, current: &ModelConfidence) -> bool {
        match &self.baseline {
            Some(base) => current.score(self.rule) < self.patience * base.score(self.rule),
            None => false,
        }
    }
}

/// Predicate on raw confidence values.
pub fn needs_new_neuron(current_c_m: f64, baseline_c_m: f64, patience: f64) -> bool {
    current_c_m < patience * baseline_c_m
}

/// Guard for the reciprocal-row-sum initialization of a new hidden unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronInit {
    /// Row sums with magnitude below this are replaced by `±delta`.
    pub delta: f64,
    /// New weights are clipped to `[-cap, cap]`.
    pub cap: f64,
}

impl NeuronInit {
    pub const DEFAULT_DELTA: f64 = 1e-6;
    pub const DEFAULT_CAP: f64 = 5.0;

    /// The weight a visible unit with row sum `sum` receives.
    pub fn weight_for(&self, sum: f64) -> f64 {
        let guarded = if sum.abs() < self.delta {
            if sum < 0.0 {
                -self.delta
            } else {
                self.delta
            }
        } else {
            sum
        };
        (1.0 / guarded).clamp(-self.cap, self.cap)
    }
}

impl Default for NeuronInit {
    fn default() -> Self {
        NeuronInit {
            delta: Self::DEFAULT_DELTA,
            cap: Self::DEFAULT_CAP,
        }
    }
}

/// Incoming weights for a new hidden unit: the guarded reciprocal of each
/// visible unit's summed weights to the existing hidden units.
pub fn new_neuron_weights(layer: &RbmLayer, init: &NeuronInit) -> Array1<f64> {
    layer
        .weights()
        .rows()
        .into_iter()
        .map(|row| init.weight_for(row.sum()))
        .collect()
}

/// Appends a hidden unit initialized by [`new_neuron_weights`].
pub fn add_neuron(layer: &mut RbmLayer, init: &NeuronInit) {
    let column = new_neuron_weights(layer, init);
    layer
        .push_hidden(&column)
        .expect("column built from the layer's own rows");
}

fn softmax(x: ArrayView1<'_, f64>) -> Array1<f64> {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = x.mapv(|v| (v - max).exp());
    let z = e.sum();
    e / z
}

fn kl(p: &Array1<f64>, q: &Array1<f64>) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| pi * (pi / qi).ln())
        .sum()
}

fn check_hidden_index(layer: &RbmLayer, j: usize) -> Result<()> {
    if j >= layer.n_hidden() {
        return Err(Error::InvalidIndex {
            index: j,
            len: layer.n_hidden(),
        });
    }
    Ok(())
}

/// Symmetrized KL divergence between the softmaxed incoming-weight columns
/// of two hidden units.
pub fn hidden_distance(layer: &RbmLayer, j1: usize, j2: usize) -> Result<f64> {
    check_hidden_index(layer, j1)?;
    check_hidden_index(layer, j2)?;
    if j1 == j2 {
        return Ok(0.0);
    }
    let w = layer.weights();
    let p = softmax(w.column(j1));
    let q = softmax(w.column(j2));
    // Tiny negative values can appear from rounding when p and q nearly agree.
    Ok((0.5 * (kl(&p, &q) + kl(&q, &p))).max(0.0))
}

/// Minimum [`hidden_distance`] over all unordered pairs of hidden units.
pub fn layer_min_distance(layer: &RbmLayer) -> Result<f64> {
    let n = layer.n_hidden();
    if n < 2 {
        return Err(Error::invalid(format!(
            "layer_min_distance needs at least two hidden units, layer has {n}"
        )));
    }
    let w = layer.weights();
    let dists: Vec<Array1<f64>> = (0..n).map(|j| softmax(w.column(j))).collect();
    let mut best = f64::INFINITY;
    for a in 0..n {
        for b in a + 1..n {
            let d = 0.5 * (kl(&dists[a], &dists[b]) + kl(&dists[b], &dists[a]));
            best = best.min(d.max(0.0));
        }
    }
    Ok(best)
}

/// Baseline state for the layer-insertion check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerGrowthState {
    /// Distance recorded when the layer first reached two hidden units;
    /// zero means unset.
    pub baseline: f64,
    pub patience: f64,
}

impl LayerGrowthState {
    pub fn new(patience: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&patience) {
            return Err(Error::invalid(format!(
                "layer patience must lie in [0, 1), got {patience}"
            )));
        }
        Ok(LayerGrowthState {
            baseline: 0.0,
            patience,
        })
    }

    /// `current < patience * baseline`, only once a baseline is set.
    pub fn needs_new_layer(&self, current: f64) -> bool {
        self.baseline > 0.0 && current < self.patience * self.baseline
    }
}
