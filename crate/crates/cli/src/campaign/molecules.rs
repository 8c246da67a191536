use std::sync::Arc;

use alphaloc::grid::{build_curvelet_grid, CurveletGridSpec, GridIndex};
use alphaloc::locmat::{spectral_gap, symmetric_eigendecomposition};
use alphaloc::molecule::{gram_matrix, localization_check, make_profile, molecule_condition_check};
use alphaloc::{FrequencyLattice, MoleculeOrder, MoleculeSystem, Result};

use super::attempt;
use crate::config::{alpha, ExperimentConfig};
use crate::report::CheckRecord;

const CONDITION: &str = "|∂^β â_λ(ξ)| ≲ min(1, s^{-1}+|ξ₁|+s^{-(1−α)}|ξ₂|)^M ⟨|ξ|⟩^{-N₁} ⟨ξ₂⟩^{-N₂}";
const GAUSSIAN_PAIR: &str = "⟨m_λ, m_λ'⟩ = exp(−|Δx|²/4) for unit Gaussian molecules";
const GRAM_LOCALIZED: &str = "|⟨m_λ, m_λ'⟩| ≲ ω_α(λ, λ')^{-N}";
const GRAM_GAP: &str = "σ(G) ⊂ {0} ∪ [a, b]";

pub fn molecule_conditions(cfg: &ExperimentConfig) -> Vec<CheckRecord> {
    let mc = &cfg.molecules;
    let profile = make_profile(mc.order);
    mc.scales
        .iter()
        .map(|&s| {
            let name = format!("molecule_condition[s={s}]");
            attempt(name.clone(), CONDITION, || {
                let r = molecule_condition_check(&profile, s, alpha(mc.alpha), &mc.check_lattice, mc.margin_cap)?;
                Ok(CheckRecord::new(name, CONDITION)
                    .measure("margin", r.margin)
                    .measure("beta1", f64::from(r.beta[0]))
                    .measure("beta2", f64::from(r.beta[1]))
                    .bound(mc.margin_cap)
                    .pass(r.holds))
            })
        })
        .collect()
}

pub fn gaussian_pair(cfg: &ExperimentConfig) -> Vec<CheckRecord> {
    let mc = &cfg.molecules;
    let name = "molecule_pair_inner_product".to_string();
    vec![attempt(name.clone(), GAUSSIAN_PAIR, || {
        // One scale and one orientation: nine unit Gaussians on the integer lattice.
        let mut spec = CurveletGridSpec::new(alpha(mc.alpha), 2.0, 1.0, 0, 1);
        spec.angular_count_coeff = 0.5;
        let grid = Arc::new(build_curvelet_grid(&spec)?);
        let profile = make_profile(MoleculeOrder::new(0, 0, 0.0, 0.0)?);
        let system = MoleculeSystem::new(grid.clone(), alpha(mc.alpha), profile, FrequencyLattice::new(9.0, 0.1)?)?;
        let g = gram_matrix(&system)?;
        let origin = grid
            .position(&GridIndex { j: 0, l: 0, k: [0, 0] })
            .expect("the origin is in the grid");
        let mut worst = 0.0f64;
        for (o, p) in grid.points().iter().enumerate() {
            let dx2: f64 = p.location().iter().map(|v| v * v).sum();
            worst = worst.max((g.entries()[(origin, o)] - (-dx2 / 4.0).exp()).abs());
        }
        Ok(CheckRecord::new(name, GAUSSIAN_PAIR)
            .measure("max_abs_error", worst)
            .measure("pairs", grid.len() as f64)
            .bound(mc.pair_tol)
            .pass(worst <= mc.pair_tol))
    })]
}

pub fn gram_checks(cfg: &ExperimentConfig) -> Vec<CheckRecord> {
    let mc = &cfg.molecules;
    let build = || -> Result<_> {
        let grid = Arc::new(mc.gram_grid.build()?);
        let a = mc.gram_grid.alpha();
        let s_max = grid.points().iter().map(|p| p.scale()).fold(1.0, f64::max);
        let lattice = match mc.gram_lattice {
            Some(l) => l,
            None => FrequencyLattice::for_scales(s_max)?,
        };
        let system = MoleculeSystem::new(grid.clone(), a, make_profile(mc.order), lattice)?;
        Ok((grid, a, gram_matrix(&system)?))
    };
    let (grid, a, g) = match build() {
        Ok(v) => v,
        Err(e) => {
            return vec![
                CheckRecord::errored("gram_localization", GRAM_LOCALIZED, &e),
                CheckRecord::errored("gram_spectral_gap", GRAM_GAP, &e),
            ]
        }
    };
    let localized = attempt("gram_localization".into(), GRAM_LOCALIZED, || {
        let r = localization_check(&g, a, mc.n, &grid.interior())?;
        Ok(CheckRecord::new("gram_localization", GRAM_LOCALIZED)
            .measure("constant", r.constant)
            .measure("exponent", r.exponent)
            .measure("r2", r.r2)
            .measure("molecules", grid.len() as f64)
            .bound(mc.n)
            .pass(r.holds))
    });
    let gap = attempt("gram_spectral_gap".into(), GRAM_GAP, || {
        let spec = symmetric_eigendecomposition(&g)?;
        let gap = spectral_gap(&spec, mc.kernel_tol)?;
        let lowest = spec.eigenvalues()[0];
        Ok(CheckRecord::new("gram_spectral_gap", GRAM_GAP)
            .measure("a", gap.a)
            .measure("b", gap.b)
            .measure("kernel_dim", gap.kernel_dim as f64)
            .measure("lowest_eigenvalue", lowest)
            .measure("threshold", gap.threshold())
            .bound(gap.threshold())
            .pass(gap.a > gap.threshold()))
    });
    vec![localized, gap]
}
