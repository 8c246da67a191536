//! Verification campaigns. Each returns its check records in a fixed order.

mod algebra;
mod grids;
mod molecules;
mod phase;

use std::sync::Arc;

use alphaloc::{Alpha, Grid, LocalizedMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::report::CheckRecord;

pub use algebra::{n_plus_checks, pinv_correctness, pinv_decay, schur_bounds, submultiplicativity};
pub use grids::{admissibility_growth, separation};
pub use molecules::{gaussian_pair, gram_checks, molecule_conditions};
pub use phase::{axiom_constants, counterexamples, lemmas};

/// Runs every check of `kind`.
pub fn checks_for(kind: ExperimentKind, cfg: &ExperimentConfig) -> Vec<CheckRecord> {
    match kind {
        ExperimentKind::Axioms => [axiom_constants(cfg), lemmas(cfg), counterexamples(cfg)].concat(),
        ExperimentKind::Grid => separation(cfg),
        ExperimentKind::Admissibility => admissibility_growth(cfg),
        ExperimentKind::Submult => submultiplicativity(cfg),
        ExperimentKind::Pinv => [pinv_correctness(cfg), n_plus_checks(cfg), pinv_decay(cfg)].concat(),
        ExperimentKind::Molecules => [molecule_conditions(cfg), gaussian_pair(cfg), gram_checks(cfg)].concat(),
        ExperimentKind::Schur => schur_bounds(cfg),
        ExperimentKind::Full => [
            ExperimentKind::Axioms,
            ExperimentKind::Grid,
            ExperimentKind::Admissibility,
            ExperimentKind::Submult,
            ExperimentKind::Pinv,
            ExperimentKind::Molecules,
            ExperimentKind::Schur,
        ]
        .into_iter()
        .flat_map(|k| checks_for(k, cfg))
        .collect(),
    }
}

/// Runs `f`, turning an error into an aborted check instead of stopping the campaign.
pub(crate) fn attempt(name: String, anchor: &str, f: impl FnOnce() -> alphaloc::Result<CheckRecord>) -> CheckRecord {
    f().unwrap_or_else(|e| CheckRecord::errored(name, anchor, e))
}

pub(crate) fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `A_{λλ'} = u_{λλ'} ω(λ, λ')^{-order}` with `u` uniform in `[-1, 1]`, so
/// `‖A‖_{B_order} ≤ 1`.
pub(crate) fn random_localized(grid: &Arc<Grid>, alpha: Alpha<f64>, order: f64, rng: &mut ChaCha8Rng) -> LocalizedMatrix<f64> {
    let dist = grid.distance(alpha);
    LocalizedMatrix::from_fn(grid.clone(), |i, j| rng.gen_range(-1.0..=1.0) * dist.omega(i, j).powf(-order))
        .expect("dimensions match the grid")
}

pub(crate) fn fmt_alpha(a: f64) -> String {
    format!("alpha={a}")
}
