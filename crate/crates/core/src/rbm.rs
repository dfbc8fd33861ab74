//! Dense weight-only RBM layer with binary (or mean-field) units.
//!
//! The layer carries no bias terms: the confidence and growth rules treat the
//! weight matrix as the only set of parameters, so the energy of a joint state
//! is just `-v^T W h`.

use ndarray::{concatenate, Array1, Array2, ArrayView1, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{Error, Result};

/// Default number of up-down passes used by [`gibbs_reconstruct`] callers.
pub const DEFAULT_GIBBS_STEPS: usize = 5;

/// Binarization threshold applied after the last downward pass.
pub const BINARY_THRESHOLD: f64 = 0.5;

#[inline]
pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

macro_rules! unit_vector {
    ($(#[$meta:meta])* $name:ident, $what:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(Array1<f64>);

        impl $name {
            /// Wraps `values`, rejecting entries outside `[0, 1]` or non-finite.
            pub fn new(values: impl Into<Array1<f64>>) -> Result<Self> {
                let values = values.into();
                if values.iter().any(|x| !x.is_finite() || *x < 0.0 || *x > 1.0) {
                    return Err(Error::invalid(concat!($what, " entries must lie in [0, 1]")));
                }
                Ok($name(values))
            }

            pub fn zeros(len: usize) -> Self {
                $name(Array1::zeros(len))
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn values(&self) -> ArrayView1<'_, f64> {
                self.0.view()
            }

            pub fn as_slice(&self) -> &[f64] {
                self.0.as_slice().expect("unit vectors are contiguous")
            }

            pub fn into_inner(self) -> Array1<f64> {
                self.0
            }

            #[allow(dead_code)]
            pub(crate) fn from_array_unchecked(values: Array1<f64>) -> Self {
                $name(values)
            }
        }
    };
}

unit_vector!(
    /// Visible-side unit values: binary presence bits for raw scenes, or the
    /// real-valued activations of the layer below for upper layers.
    SceneVector,
    "scene vector"
);

unit_vector!(
    /// Hidden activation probabilities of one layer.
    HiddenState,
    "hidden state"
);

impl SceneVector {
    /// Builds a binary scene from presence flags.
    pub fn from_bits(bits: &[bool]) -> Self {
        SceneVector(bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
    }

    pub fn is_binary(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0 || x == 1.0)
    }

    /// Thresholds every entry at [`BINARY_THRESHOLD`] (ties go to 1).
    pub fn binarized(&self) -> SceneVector {
        SceneVector(self.0.mapv(|x| if x >= BINARY_THRESHOLD { 1.0 } else { 0.0 }))
    }

    pub fn to_bits(&self) -> Vec<bool> {
        self.0.iter().map(|&x| x >= BINARY_THRESHOLD).collect()
    }
}

impl From<HiddenState> for SceneVector {
    fn from(h: HiddenState) -> Self {
        SceneVector(h.0)
    }
}

impl From<SceneVector> for HiddenState {
    fn from(v: SceneVector) -> Self {
        HiddenState(v.0)
    }
}

/// One weight matrix connecting a visible band (rows) to a hidden band
/// (columns), plus the CD learning rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RbmLayer {
    weights: Array2<f64>,
    learning_rate: f64,
}

impl RbmLayer {
    pub fn new(weights: Array2<f64>, learning_rate: f64) -> Result<Self> {
        let (nv, nh) = weights.dim();
        if nv == 0 || nh == 0 {
            return Err(Error::invalid("a layer needs at least one visible and one hidden unit"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("layer construction"));
        }
        if !(learning_rate.is_finite() && learning_rate >= 0.0) {
            return Err(Error::invalid("learning rate must be finite and non-negative"));
        }
        Ok(RbmLayer {
            weights: weights.as_standard_layout().into_owned(),
            learning_rate,
        })
    }

    pub fn zeros(n_visible: usize, n_hidden: usize, learning_rate: f64) -> Result<Self> {
        Self::new(Array2::zeros((n_visible, n_hidden)), learning_rate)
    }

    /// Zero-mean Gaussian initialization.
    pub fn gaussian<R: Rng + ?Sized>(
        n_visible: usize,
        n_hidden: usize,
        std_dev: f64,
        learning_rate: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let normal = Normal::new(0.0, std_dev)
            .map_err(|e| Error::invalid(format!("bad init std {std_dev}: {e}")))?;
        let weights = Array2::from_shape_simple_fn((n_visible, n_hidden), || normal.sample(rng));
        Self::new(weights, learning_rate)
    }

    /// Uniform initialization on `[-range, range]`.
    pub fn uniform<R: Rng + ?Sized>(
        n_visible: usize,
        n_hidden: usize,
        range: f64,
        learning_rate: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let uniform = Uniform::new_inclusive(-range, range)
            .map_err(|e| Error::invalid(format!("bad init range {range}: {e}")))?;
        let weights = Array2::from_shape_simple_fn((n_visible, n_hidden), || uniform.sample(rng));
        Self::new(weights, learning_rate)
    }

    pub fn n_visible(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_hidden(&self) -> usize {
        self.weights.ncols()
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn set_learning_rate(&mut self, learning_rate: f64) {
        self.learning_rate = learning_rate;
    }

    fn check_visible(&self, len: usize, context: &'static str) -> Result<()> {
        if len != self.n_visible() {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.n_visible(),
                found: len,
            });
        }
        Ok(())
    }

    fn check_hidden(&self, len: usize, context: &'static str) -> Result<()> {
        if len != self.n_hidden() {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.n_hidden(),
                found: len,
            });
        }
        Ok(())
    }

    /// `h_j = logistic(sum_i w_ij v_i)`.
    pub fn hidden_activations(&self, v: &SceneVector) -> Result<HiddenState> {
        self.check_visible(v.len(), "hidden_activations")?;
        Ok(HiddenState(self.up(v.values())))
    }

    /// `v_i = logistic(sum_j w_ij h_j)`.
    pub fn visible_reconstruction(&self, h: &HiddenState) -> Result<SceneVector> {
        self.check_hidden(h.len(), "visible_reconstruction")?;
        Ok(SceneVector(self.down(h.values())))
    }

    // Both directions sum in ascending index order whatever the memory
    // layout, so a model reloaded from disk computes bit-identical values.
    fn up(&self, v: ArrayView1<'_, f64>) -> Array1<f64> {
        let mut acc = Array1::zeros(self.n_hidden());
        for (vi, row) in v.iter().zip(self.weights.rows()) {
            if *vi != 0.0 {
                acc.zip_mut_with(&row, |a, w| *a += *vi * *w);
            }
        }
        acc.mapv_into(logistic)
    }

    fn down(&self, h: ArrayView1<'_, f64>) -> Array1<f64> {
        self.weights
            .rows()
            .into_iter()
            .map(|row| logistic(row.iter().zip(h).fold(0.0, |a, (w, hj)| a + w * hj)))
            .collect()
    }

    /// One mean-field CD-1 step on a single scene:
    /// `w_ij += lr * (<v_i h_j>^0 - <v_i h_j>^1)`.
    ///
    /// On a non-finite result the layer is left untouched.
    pub fn cd1_update(&mut self, v: &SceneVector) -> Result<()> {
        self.check_visible(v.len(), "cd1_update")?;
        let h0 = self.up(v.values());
        self.apply_cd(v.values(), h0)
    }

    /// CD-1 with the positive-phase hidden units sampled as Bernoulli
    /// variables instead of kept as probabilities.
    pub fn cd1_update_sampled<R: Rng + ?Sized>(&mut self, v: &SceneVector, rng: &mut R) -> Result<()> {
        self.check_visible(v.len(), "cd1_update")?;
        let h0 = self
            .up(v.values())
            .mapv_into(|p| if rng.random::<f64>() < p { 1.0 } else { 0.0 });
        self.apply_cd(v.values(), h0)
    }

    fn apply_cd(&mut self, v: ArrayView1<'_, f64>, h0: Array1<f64>) -> Result<()> {
        let v1 = self.down(h0.view());
        let h1 = self.up(v1.view());
        let positive = outer(v, h0.view());
        let negative = outer(v1.view(), h1.view());
        let updated = &self.weights + &((positive - negative) * self.learning_rate);
        if updated.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("cd1_update"));
        }
        self.weights = updated.as_standard_layout().into_owned();
        Ok(())
    }

    /// Appends one hidden unit with the given incoming weights.
    pub fn push_hidden(&mut self, column: &Array1<f64>) -> Result<()> {
        self.check_visible(column.len(), "push_hidden")?;
        let col = column.view().insert_axis(Axis(1));
        self.weights = concatenate(Axis(1), &[self.weights.view(), col])
            .expect("row counts checked above")
            .as_standard_layout()
            .into_owned();
        Ok(())
    }

    /// Appends one visible unit with the given outgoing weights.
    pub fn push_visible(&mut self, row: &Array1<f64>) -> Result<()> {
        self.check_hidden(row.len(), "push_visible")?;
        let r = row.view().insert_axis(Axis(0));
        self.weights = concatenate(Axis(0), &[self.weights.view(), r])
            .expect("column counts checked above")
            .as_standard_layout()
            .into_owned();
        Ok(())
    }
}

impl AsRef<RbmLayer> for RbmLayer {
    fn as_ref(&self) -> &RbmLayer {
        self
    }
}

fn outer(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> Array2<f64> {
    let a = a.insert_axis(Axis(1));
    let b = b.insert_axis(Axis(0));
    a.dot(&b)
}

/// Mean-field up-down reconstruction through a stack of layers.
///
/// Each step propagates the current visible vector to the top layer and back
/// down. After every downward pass the entries selected by `clamp_mask` are
/// reset to their `v_init` values. The final visible vector is binarized at
/// [`BINARY_THRESHOLD`].
pub fn gibbs_reconstruct<L: AsRef<RbmLayer>>(
    layers: &[L],
    v_init: &SceneVector,
    clamp_mask: Option<&[bool]>,
    steps: usize,
) -> Result<SceneVector> {
    let layers: Vec<&RbmLayer> = layers.iter().map(AsRef::as_ref).collect();
    let bottom = layers.first().ok_or(Error::Empty("layer stack"))?;
    bottom.check_visible(v_init.len(), "gibbs_reconstruct")?;
    if let Some(mask) = clamp_mask {
        if mask.len() != v_init.len() {
            return Err(Error::DimensionMismatch {
                context: "gibbs_reconstruct clamp mask",
                expected: v_init.len(),
                found: mask.len(),
            });
        }
    }
    for pair in layers.windows(2) {
        if pair[0].n_hidden() != pair[1].n_visible() {
            return Err(Error::DimensionMismatch {
                context: "gibbs_reconstruct layer chain",
                expected: pair[0].n_hidden(),
                found: pair[1].n_visible(),
            });
        }
    }
    if steps == 0 {
        return Err(Error::invalid("gibbs_reconstruct needs at least one step"));
    }

    let mut v = v_init.values().to_owned();
    for _ in 0..steps {
        let mut x = v;
        for layer in &layers {
            x = layer.up(x.view());
        }
        for layer in layers.iter().rev() {
            x = layer.down(x.view());
        }
        if let Some(mask) = clamp_mask {
            for ((xi, &clamped), &orig) in x.iter_mut().zip(mask).zip(v_init.values()) {
                if clamped {
                    *xi = orig;
                }
            }
        }
        v = x;
    }
    Ok(SceneVector(v).binarized())
}
