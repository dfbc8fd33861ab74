//! Streaming model variants.
//!
//! * `iRBM`: one layer that grows hidden units when its model confidence
//!   drifts below the patience-scaled baseline.
//! * `diBM`: a hierarchy of growing layers; a new single-unit layer is
//!   appended when the top layer's closest pair of hidden units collapses
//!   relative to the distance recorded when it had two units.
//! * `siRBM`: growing layers trained one at a time; the top layer is frozen
//!   and a new one stacked when it becomes less confident than the layer
//!   below.
//! * `RBM` and `stackedRBM`: fixed-size baselines.

use std::fmt;
use std::str::FromStr;

use ndarray::Array1;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Vocabulary;
use crate::error::{Error, Result};
use crate::growth::{
    add_neuron, default_patience_neuron, layer_min_distance, model_confidence,
    visible_confidences, ConfidenceRule, ConfidenceState, LayerGrowthState, NeuronInit,
    DEFAULT_PATIENCE_LAYER,
};
use crate::rbm::{gibbs_reconstruct, HiddenState, RbmLayer, SceneVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Irbm,
    Dibm,
    Sirbm,
    Rbm,
    StackedRbm,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Irbm,
        Variant::Dibm,
        Variant::Sirbm,
        Variant::Rbm,
        Variant::StackedRbm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Irbm => "iRBM",
            Variant::Dibm => "diBM",
            Variant::Sirbm => "siRBM",
            Variant::Rbm => "RBM",
            Variant::StackedRbm => "stackedRBM",
        }
    }

    pub fn is_growing(self) -> bool {
        matches!(self, Variant::Irbm | Variant::Dibm | Variant::Sirbm)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown variant `{s}`")))
    }
}

/// Hyperparameters shared by every layer of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub learning_rate: f64,
    pub patience_neuron: f64,
    pub patience_layer: f64,
    /// Standard deviation of the Gaussian used for a fresh bottom layer.
    pub init_std: f64,
    /// Half-width of the uniform initialization of a new upper layer.
    pub new_layer_range: f64,
    /// Outgoing weight of the visible unit an upper layer gains when the
    /// layer below grows.
    pub ripple_weight: f64,
    pub neuron_init: NeuronInit,
    pub confidence_rule: ConfidenceRule,
    /// Sample the positive-phase hidden units instead of using probabilities.
    pub sample_hidden: bool,
    pub seed: u64,
}

impl ModelConfig {
    pub const DEFAULT_LEARNING_RATE: f64 = 0.5;

    pub fn validate(&self) -> Result<()> {
        let finite_pos = |x: f64| x.is_finite() && x >= 0.0;
        if !finite_pos(self.learning_rate) {
            return Err(Error::invalid("learning_rate must be finite and non-negative"));
        }
        if !(0.0..1.0).contains(&self.patience_neuron) {
            return Err(Error::invalid("patience_neuron must lie in [0, 1)"));
        }
        if !(0.0..1.0).contains(&self.patience_layer) {
            return Err(Error::invalid("patience_layer must lie in [0, 1)"));
        }
        if !(self.init_std > 0.0 && self.init_std.is_finite()) {
            return Err(Error::invalid("init_std must be positive"));
        }
        if !(self.new_layer_range > 0.0 && self.new_layer_range.is_finite()) {
            return Err(Error::invalid("new_layer_range must be positive"));
        }
        if !self.ripple_weight.is_finite() {
            return Err(Error::invalid("ripple_weight must be finite"));
        }
        if !(self.neuron_init.delta > 0.0 && self.neuron_init.cap > 0.0)
            || !self.neuron_init.cap.is_finite()
        {
            return Err(Error::invalid("neuron init delta and cap must be positive"));
        }
        Ok(())
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            learning_rate: Self::DEFAULT_LEARNING_RATE,
            patience_neuron: default_patience_neuron(),
            patience_layer: DEFAULT_PATIENCE_LAYER,
            init_std: 0.01,
            new_layer_range: 0.01,
            ripple_weight: 0.01,
            neuron_init: NeuronInit::default(),
            confidence_rule: ConfidenceRule::Partitioned,
            sample_hidden: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GrowthKind {
    NeuronAdded,
    LayerAdded,
}

impl GrowthKind {
    pub fn name(self) -> &'static str {
        match self {
            GrowthKind::NeuronAdded => "neuron_added",
            GrowthKind::LayerAdded => "layer_added",
        }
    }
}

impl FromStr for GrowthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neuron_added" => Ok(GrowthKind::NeuronAdded),
            "layer_added" => Ok(GrowthKind::LayerAdded),
            other => Err(Error::invalid(format!("unknown growth event `{other}`"))),
        }
    }
}

/// One structural change, recorded in stream order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrowthEvent {
    /// Zero-based index of the scene whose presentation caused the change.
    pub scene_index: u64,
    pub kind: GrowthKind,
    pub layer_index: usize,
}

/// A layer plus the state driving its growth decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerState {
    pub rbm: RbmLayer,
    pub confidence: ConfidenceState,
    pub growth: LayerGrowthState,
    pub frozen: bool,
}

impl AsRef<RbmLayer> for LayerState {
    fn as_ref(&self) -> &RbmLayer {
        &self.rbm
    }
}

/// How reconstruction treats the bits that were not selected for corruption.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconstructionMode {
    /// Known corrupted part: uncorrupted bits are clamped.
    Kcp,
    /// Unknown corrupted part: every bit is free.
    Ucp,
}

impl ReconstructionMode {
    pub fn name(self) -> &'static str {
        match self {
            ReconstructionMode::Kcp => "KCP",
            ReconstructionMode::Ucp => "UCP",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainMode {
    /// One pass per epoch in stream order.
    Online,
    /// One pass per epoch over a seeded reshuffle of the corpus.
    Batch,
}

impl FromStr for TrainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "online" => Ok(TrainMode::Online),
            "batch" => Ok(TrainMode::Batch),
            other => Err(Error::invalid(format!("unknown train mode `{other}`"))),
        }
    }
}

const TAG_SAMPLE: u64 = 1;
const TAG_NEW_LAYER: u64 = 2;
const TAG_SHUFFLE: u64 = 3;
const TAG_INIT: u64 = 4;

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// An ordered stack of layers over a fixed vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowingModel {
    variant: Variant,
    vocabulary: Vocabulary,
    config: ModelConfig,
    layers: Vec<LayerState>,
    scenes_seen: u64,
    events: Vec<GrowthEvent>,
}

impl GrowingModel {
    /// A fresh growing model: one layer with a single hidden unit.
    pub fn new(variant: Variant, vocabulary: Vocabulary, config: ModelConfig) -> Result<Self> {
        if !variant.is_growing() {
            return Err(Error::invalid(format!(
                "{variant} has a fixed size; use GrowingModel::fixed"
            )));
        }
        Self::build(variant, vocabulary, config, &[1])
    }

    /// A fixed-size baseline with the given hidden sizes, bottom first.
    pub fn fixed(
        variant: Variant,
        vocabulary: Vocabulary,
        config: ModelConfig,
        hidden_sizes: &[usize],
    ) -> Result<Self> {
        match variant {
            Variant::Rbm if hidden_sizes.len() != 1 => {
                Err(Error::invalid("RBM takes exactly one hidden size"))
            }
            Variant::Rbm | Variant::StackedRbm => {
                Self::build(variant, vocabulary, config, hidden_sizes)
            }
            other => Err(Error::invalid(format!("{other} is a growing variant"))),
        }
    }

    fn build(
        variant: Variant,
        vocabulary: Vocabulary,
        config: ModelConfig,
        hidden_sizes: &[usize],
    ) -> Result<Self> {
        config.validate()?;
        if hidden_sizes.is_empty() || hidden_sizes.contains(&0) {
            return Err(Error::invalid("every layer needs at least one hidden unit"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(mix(config.seed ^ mix(TAG_INIT)));
        let mut layers = Vec::with_capacity(hidden_sizes.len());
        let mut n_visible = vocabulary.len();
        for &n_hidden in hidden_sizes {
            let rbm = RbmLayer::gaussian(
                n_visible,
                n_hidden,
                config.init_std,
                config.learning_rate,
                &mut rng,
            )?;
            layers.push(Self::layer_state(rbm, &config)?);
            n_visible = n_hidden;
        }
        Ok(GrowingModel {
            variant,
            vocabulary,
            config,
            layers,
            scenes_seen: 0,
            events: Vec::new(),
        })
    }

    fn layer_state(rbm: RbmLayer, config: &ModelConfig) -> Result<LayerState> {
        Ok(LayerState {
            rbm,
            confidence: ConfidenceState::new(config.patience_neuron, config.confidence_rule)?,
            growth: LayerGrowthState::new(config.patience_layer)?,
            frozen: false,
        })
    }

    /// Reassembles a model from its parts, checking every structural invariant.
    pub fn from_parts(
        variant: Variant,
        vocabulary: Vocabulary,
        config: ModelConfig,
        layers: Vec<LayerState>,
        scenes_seen: u64,
        events: Vec<GrowthEvent>,
    ) -> Result<Self> {
        config.validate()?;
        let model = GrowingModel {
            variant,
            vocabulary,
            config,
            layers,
            scenes_seen,
            events,
        };
        model.check_invariants()?;
        Ok(model)
    }

    pub fn check_invariants(&self) -> Result<()> {
        let first = self.layers.first().ok_or(Error::Empty("layer stack"))?;
        if first.rbm.n_visible() != self.vocabulary.len() {
            return Err(Error::DimensionMismatch {
                context: "bottom layer vs vocabulary",
                expected: self.vocabulary.len(),
                found: first.rbm.n_visible(),
            });
        }
        for pair in self.layers.windows(2) {
            if pair[0].rbm.n_hidden() != pair[1].rbm.n_visible() {
                return Err(Error::DimensionMismatch {
                    context: "layer chain",
                    expected: pair[0].rbm.n_hidden(),
                    found: pair[1].rbm.n_visible(),
                });
            }
        }
        if matches!(self.variant, Variant::Irbm | Variant::Rbm) && self.layers.len() != 1 {
            return Err(Error::invalid(format!(
                "{} must have exactly one layer, found {}",
                self.variant,
                self.layers.len()
            )));
        }
        Ok(())
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn layers(&self) -> &[LayerState] {
        &self.layers
    }

    pub fn layer(&self, index: usize) -> Result<&RbmLayer> {
        self.layers
            .get(index)
            .map(|l| &l.rbm)
            .ok_or(Error::InvalidLayer {
                index,
                len: self.layers.len(),
            })
    }

    pub fn scenes_seen(&self) -> u64 {
        self.scenes_seen
    }

    pub fn events(&self) -> &[GrowthEvent] {
        &self.events
    }

    /// Hidden sizes, bottom first.
    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.rbm.n_hidden()).collect()
    }

    fn rng_for(&self, tag: u64, a: u64, b: u64) -> ChaCha8Rng {
        let s = mix(self.config.seed ^ mix(tag ^ mix(a ^ mix(b))));
        ChaCha8Rng::seed_from_u64(s)
    }

    fn check_scene(&self, scene: &SceneVector) -> Result<()> {
        if scene.len() != self.vocabulary.len() {
            return Err(Error::DimensionMismatch {
                context: "scene vs vocabulary",
                expected: self.vocabulary.len(),
                found: scene.len(),
            });
        }
        Ok(())
    }

    /// Feeds one scene to the model, applying the variant's update and
    /// growth rules. Returns the structural changes it caused.
    pub fn process_scene(&mut self, scene: &SceneVector) -> Result<Vec<GrowthEvent>> {
        self.check_scene(scene)?;
        let before = self.events.len();
        match self.variant {
            Variant::Irbm => {
                self.irbm_step(0, scene)?;
            }
            Variant::Dibm => self.dibm_step(scene)?,
            Variant::Sirbm => self.sirbm_step(scene)?,
            Variant::Rbm | Variant::StackedRbm => self.fixed_step(scene)?,
        }
        self.scenes_seen += 1;
        debug_assert!(self.check_invariants().is_ok());
        Ok(self.events[before..].to_vec())
    }

    /// Streams `scenes` through [`process_scene`](Self::process_scene)
    /// `epochs` times.
    pub fn process_stream(&mut self, scenes: &[SceneVector], epochs: usize) -> Result<()> {
        for _ in 0..epochs {
            for s in scenes {
                self.process_scene(s)?;
            }
        }
        Ok(())
    }

    fn cd_update(&mut self, l: usize, input: &SceneVector) -> Result<()> {
        if self.config.sample_hidden {
            let mut rng = self.rng_for(TAG_SAMPLE, self.scenes_seen, l as u64);
            self.layers[l].rbm.cd1_update_sampled(input, &mut rng)
        } else {
            self.layers[l].rbm.cd1_update(input)
        }
    }

    /// CD update plus the hidden-unit growth check for layer `l`.
    /// Returns whether a unit was added.
    fn irbm_step(&mut self, l: usize, input: &SceneVector) -> Result<bool> {
        self.cd_update(l, input)?;
        let state = &mut self.layers[l];
        let current = model_confidence(visible_confidences(&state.rbm).view())?;
        if state.confidence.baseline.is_none() {
            state.confidence.set_baseline(current);
            return Ok(false);
        }
        if !state.confidence.needs_new_neuron(&current) {
            return Ok(false);
        }
        add_neuron(&mut state.rbm, &self.config.neuron_init);
        let rebased = model_confidence(visible_confidences(&state.rbm).view())?;
        state.confidence.set_baseline(rebased);

        if let Some(above) = self.layers.get_mut(l + 1) {
            let row = Array1::from_elem(above.rbm.n_hidden(), self.config.ripple_weight);
            above.rbm.push_visible(&row)?;
        }
        self.events.push(GrowthEvent {
            scene_index: self.scenes_seen,
            kind: GrowthKind::NeuronAdded,
            layer_index: l,
        });
        Ok(true)
    }

    fn dibm_step(&mut self, scene: &SceneVector) -> Result<()> {
        let top = self.layers.len() - 1;
        let mut input = scene.clone();
        let mut top_grew = false;
        for l in 0..=top {
            let grew = self.irbm_step(l, &input)?;
            top_grew |= grew && l == top;
            if l < top {
                input = self.layers[l].rbm.hidden_activations(&input)?.into();
            }
        }
        if self.divergence_check(top, top_grew)? {
            self.layers[top].growth.baseline = 0.0;
            self.append_layer()?;
        }
        Ok(())
    }

    /// Layer-insertion bookkeeping for layer `f`: records the baseline when
    /// the layer first reaches two hidden units and reports whether the
    /// closest pair has since collapsed below the patience threshold.
    fn divergence_check(&mut self, f: usize, grew: bool) -> Result<bool> {
        let state = &mut self.layers[f];
        let n_hidden = state.rbm.n_hidden();
        if n_hidden < 2 {
            state.growth.baseline = 0.0;
            return Ok(false);
        }
        if grew && n_hidden == 2 {
            state.growth.baseline = layer_min_distance(&state.rbm)?;
            return Ok(false);
        }
        if state.growth.baseline > 0.0 && state.growth.patience > 0.0 {
            let current = layer_min_distance(&state.rbm)?;
            return Ok(state.growth.needs_new_layer(current));
        }
        Ok(false)
    }

    fn append_layer(&mut self) -> Result<()> {
        let below = self.layers.len() - 1;
        let n_visible = self.layers[below].rbm.n_hidden();
        let mut rng = self.rng_for(TAG_NEW_LAYER, self.scenes_seen, self.layers.len() as u64);
        let rbm = RbmLayer::uniform(
            n_visible,
            1,
            self.config.new_layer_range,
            self.config.learning_rate,
            &mut rng,
        )?;
        let state = Self::layer_state(rbm, &self.config)?;
        self.layers.push(state);
        self.events.push(GrowthEvent {
            scene_index: self.scenes_seen,
            kind: GrowthKind::LayerAdded,
            layer_index: self.layers.len() - 1,
        });
        Ok(())
    }

    fn sirbm_step(&mut self, scene: &SceneVector) -> Result<()> {
        let top = self.layers.len() - 1;
        let mut input = scene.clone();
        for l in 0..top {
            input = self.layers[l].rbm.hidden_activations(&input)?.into();
        }
        let grew = self.irbm_step(top, &input)?;
        let stack = if top == 0 {
            // No layer below to compare with: bootstrap with the divergence rule.
            self.divergence_check(0, grew)?
        } else if self.layers[top].rbm.n_hidden() >= 2 {
            let current = layer_min_distance(&self.layers[top].rbm)?;
            let previous = layer_min_distance(&self.layers[top - 1].rbm)?;
            stacks_new_layer(current, previous)
        } else {
            false
        };
        if stack {
            self.layers[top].frozen = true;
            self.layers[top].growth.baseline = 0.0;
            self.append_layer()?;
        }
        Ok(())
    }

    fn fixed_step(&mut self, scene: &SceneVector) -> Result<()> {
        let mut input = scene.clone();
        for l in 0..self.layers.len() {
            self.cd_update(l, &input)?;
            if l + 1 < self.layers.len() {
                input = self.layers[l].rbm.hidden_activations(&input)?.into();
            }
        }
        Ok(())
    }

    /// Trains a fixed-size baseline. `stackedRBM` is trained greedily: each
    /// layer gets `epochs` passes over the corpus as seen through the
    /// already-trained layers below it.
    pub fn train_fixed(&mut self, corpus: &[SceneVector], epochs: usize, mode: TrainMode) -> Result<()> {
        if self.variant.is_growing() {
            return Err(Error::invalid(format!(
                "{} grows online; use process_scene",
                self.variant
            )));
        }
        if corpus.is_empty() {
            return Err(Error::Empty("training corpus"));
        }
        for s in corpus {
            self.check_scene(s)?;
        }
        let mut inputs: Vec<SceneVector> = corpus.to_vec();
        for l in 0..self.layers.len() {
            for epoch in 0..epochs {
                let mut order: Vec<usize> = (0..inputs.len()).collect();
                if mode == TrainMode::Batch {
                    order.shuffle(&mut self.rng_for(TAG_SHUFFLE, epoch as u64, l as u64));
                }
                for i in order {
                    self.cd_update(l, &inputs[i])?;
                }
            }
            if l + 1 < self.layers.len() {
                let layer = &self.layers[l].rbm;
                inputs = inputs
                    .iter()
                    .map(|x| layer.hidden_activations(x).map(SceneVector::from))
                    .collect::<Result<_>>()?;
            }
        }
        self.scenes_seen += (corpus.len() * epochs) as u64;
        Ok(())
    }

    /// Mean-field hidden activations of every layer, bottom first.
    pub fn propagate_up(&self, scene: &SceneVector) -> Result<Vec<HiddenState>> {
        self.check_scene(scene)?;
        let mut out = Vec::with_capacity(self.layers.len());
        let mut input = scene.clone();
        for layer in &self.layers {
            let h = layer.rbm.hidden_activations(&input)?;
            input = h.clone().into();
            out.push(h);
        }
        Ok(out)
    }

    /// Reconstructs a corrupted scene through the whole stack. `mask` marks
    /// the positions selected for corruption.
    pub fn reconstruct(
        &self,
        corrupted: &SceneVector,
        mask: &[bool],
        mode: ReconstructionMode,
        steps: usize,
    ) -> Result<SceneVector> {
        self.check_scene(corrupted)?;
        if mask.len() != corrupted.len() {
            return Err(Error::DimensionMismatch {
                context: "reconstruction mask",
                expected: corrupted.len(),
                found: mask.len(),
            });
        }
        match mode {
            ReconstructionMode::Kcp => {
                let clamp: Vec<bool> = mask.iter().map(|m| !m).collect();
                gibbs_reconstruct(&self.layers, corrupted, Some(&clamp), steps)
            }
            ReconstructionMode::Ucp => gibbs_reconstruct(&self.layers, corrupted, None, steps),
        }
    }
}

/// siRBM stacking rule: the top layer is less confident than the one below.
pub fn stacks_new_layer(top_min_distance: f64, previous_min_distance: f64) -> bool {
    top_min_distance < previous_min_distance
}
