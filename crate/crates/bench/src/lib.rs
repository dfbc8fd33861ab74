//! Shared fixtures for the benchmarks.

use incbm::data::generate_synthetic;
use incbm::{SceneVector, SyntheticSpec, Vocabulary};

/// The default planted-context stream for `seed`, encoded.
pub fn planted_scenes(seed: u64) -> (Vocabulary, Vec<SceneVector>) {
    let (vocab, records) = generate_synthetic(&SyntheticSpec {
        seed,
        ..SyntheticSpec::default()
    })
    .expect("default spec is valid");
    let scenes = records
        .iter()
        .map(|r| vocab.encode(r).expect("generated labels are in the vocabulary"))
        .collect();
    (vocab, scenes)
}
