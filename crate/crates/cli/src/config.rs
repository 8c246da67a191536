//! JSON experiment configuration.
//!
//! Every section has desk-scale defaults, so `{}` is a complete config.
//! Unknown keys are rejected and parse errors carry the offending field path.

use std::fmt;
use std::path::Path;

use alphaloc::grid::{CurveletGridSpec, GridKind, GridSpec};
use alphaloc::molecule::{FrequencyLattice, MoleculeOrder};
use alphaloc::{Alpha, Real};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Axioms,
    Grid,
    Admissibility,
    Submult,
    Pinv,
    Molecules,
    Schur,
    Full,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Axioms => "axioms",
            Self::Grid => "grid",
            Self::Admissibility => "admissibility",
            Self::Submult => "submult",
            Self::Pinv => "pinv",
            Self::Molecules => "molecules",
            Self::Schur => "schur",
            Self::Full => "full",
        }
    }
}

/// An `ℓ^p` exponent; JSON accepts a number or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent(pub f64);

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Exponent;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Exponent, E> {
                Ok(Exponent(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Exponent, E> {
                Ok(Exponent(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Exponent, E> {
                Ok(Exponent(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Exponent, E> {
                match v {
                    "inf" | "infinity" => Ok(Exponent(f64::INFINITY)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Must match the subcommand when present.
    pub experiment: Option<ExperimentKind>,
    pub seed: u64,
    pub alphas: Vec<f64>,
    pub axioms: AxiomsConfig,
    pub grid: SeparationConfig,
    pub admissibility: AdmissibilityConfig,
    pub submult: SubmultConfig,
    pub pinv: PinvConfig,
    pub molecules: MoleculeConfig,
    pub schur: SchurConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            seed: 20_240_601,
            alphas: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            axioms: AxiomsConfig::default(),
            grid: SeparationConfig::default(),
            admissibility: AdmissibilityConfig::default(),
            submult: SubmultConfig::default(),
            pinv: PinvConfig::default(),
            molecules: MoleculeConfig::default(),
            schur: SchurConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AxiomsConfig {
    pub triples: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub half_width: f64,
    /// Random inputs per elementary inequality.
    pub lemma_samples: usize,
    /// Lemma inputs are drawn from `[0, lemma_range]`.
    pub lemma_range: f64,
    pub counterexample_c: f64,
    pub tolerance: f64,
}

impl Default for AxiomsConfig {
    fn default() -> Self {
        Self {
            triples: 100_000,
            s_min: 1.0,
            s_max: 64.0,
            half_width: 10.0,
            lemma_samples: 1_000_000,
            lemma_range: 10.0,
            counterexample_c: 100.0,
            tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeparationConfig {
    pub families: Vec<GridKind>,
    pub g: f64,
    pub taus: Vec<f64>,
    pub j_max: u32,
    pub k_box: u32,
    pub tolerance: f64,
}

impl Default for SeparationConfig {
    fn default() -> Self {
        Self {
            families: vec![GridKind::Curvelet, GridKind::Shearlet],
            g: 2.0,
            taus: vec![0.5, 1.0],
            j_max: 4,
            k_box: 8,
            tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdmissibilityConfig {
    pub families: Vec<GridKind>,
    pub g: f64,
    pub tau: f64,
    pub k: f64,
    /// Nested `[j_max, k_box]` truncations, smallest first.
    pub truncations: Vec<[u32; 2]>,
    /// Largest relative growth allowed at the last nesting step.
    pub growth_limit: f64,
}

impl Default for AdmissibilityConfig {
    fn default() -> Self {
        Self {
            families: vec![GridKind::Curvelet, GridKind::Shearlet],
            g: 2.0,
            tau: 1.0,
            k: 2.0,
            truncations: vec![[2, 4], [3, 8], [4, 16]],
            growth_limit: 0.01,
        }
    }
}

/// The 400-index curvelet grid used by the matrix campaigns.
pub fn desk_grid() -> GridSpec<f64> {
    GridSpec::Curvelet(CurveletGridSpec::new(Alpha::new(0.5).unwrap(), 2.0, 1.0, 3, 2))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SubmultConfig {
    pub grid: GridSpec<f64>,
    pub n: f64,
    /// Admissibility order entering `L ≥ 2K`.
    pub k: f64,
    pub pairs: usize,
}

impl Default for SubmultConfig {
    fn default() -> Self {
        Self {
            grid: desk_grid(),
            n: 2.0,
            k: 2.0,
            pairs: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PinvConfig {
    pub grid: GridSpec<f64>,
    pub n: f64,
    pub l: f64,
    pub target_a: f64,
    pub target_b: f64,
    /// Off-diagonal amplitude as a fraction of the largest Gershgorin-feasible one.
    pub epsilon_fraction: f64,
    /// Kernel dimensions of the rank-deficient test matrices.
    pub kernel_dims: Vec<usize>,
    pub kernel_tol: f64,
    /// Relative sup-norm tolerance of the identities.
    pub identity_tol: f64,
    pub neumann_tol: f64,
    pub neumann_max_iter: usize,
    pub ratio_slack: f64,
    pub decay_seeds: usize,
    pub exponent_factor: f64,
    pub min_r2: f64,
}

impl Default for PinvConfig {
    fn default() -> Self {
        Self {
            grid: desk_grid(),
            n: 2.0,
            l: 10.0,
            target_a: 1.0,
            target_b: 3.0,
            epsilon_fraction: 0.1,
            kernel_dims: vec![1, 5],
            kernel_tol: 1e-8,
            identity_tol: 1e-8,
            neumann_tol: 1e-13,
            neumann_max_iter: 20_000,
            ratio_slack: 0.05,
            decay_seeds: 10,
            exponent_factor: 0.9,
            min_r2: 0.8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MoleculeConfig {
    pub order: MoleculeOrder<f64>,
    pub alpha: f64,
    pub scales: Vec<f64>,
    pub check_lattice: FrequencyLattice<f64>,
    pub margin_cap: f64,
    pub pair_tol: f64,
    pub gram_grid: GridSpec<f64>,
    /// Defaults to [`FrequencyLattice::for_scales`] of the largest scale.
    pub gram_lattice: Option<FrequencyLattice<f64>>,
    pub n: f64,
    pub kernel_tol: f64,
}

impl Default for MoleculeConfig {
    fn default() -> Self {
        Self {
            order: MoleculeOrder::new(2, 3, 4.0, 4.0).unwrap(),
            alpha: 0.5,
            scales: vec![1.0, 2.0, 4.0, 8.0],
            check_lattice: FrequencyLattice {
                half_width: 20.0,
                step: 0.1,
            },
            margin_cap: alphaloc::molecule::DEFAULT_MARGIN_CAP,
            pair_tol: 1e-3,
            gram_grid: GridSpec::Curvelet(CurveletGridSpec::new(Alpha::new(0.75).unwrap(), 2.0, 3.0, 3, 2)),
            gram_lattice: None,
            n: 2.0,
            kernel_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchurConfig {
    pub grid: GridSpec<f64>,
    pub n: f64,
    pub matrices: usize,
    pub exponents: Vec<Exponent>,
    /// Weight families `s^r`; `r = 0` is the unweighted case.
    pub weight_exponents: Vec<f64>,
    pub trials: usize,
    pub slack: f64,
}

impl Default for SchurConfig {
    fn default() -> Self {
        Self {
            grid: desk_grid(),
            n: 2.0,
            matrices: 20,
            exponents: vec![Exponent(1.0), Exponent(2.0), Exponent(f64::INFINITY)],
            weight_exponents: vec![0.0, 1.0],
            trials: 32,
            slack: 1e-9,
        }
    }
}

fn ensure(ok: bool, path: &str, msg: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{path}: {msg}")))
    }
}

fn ensure_alpha(a: f64, path: &str) -> Result<(), CliError> {
    ensure((0.0..=1.0).contains(&a), path, "alpha must lie in [0, 1]")
}

fn ensure_grid(spec: &GridSpec<f64>, path: &str) -> Result<(), CliError> {
    let checked = match spec {
        GridSpec::Curvelet(s) => s.validate(),
        GridSpec::Shearlet(s) => s.validate(),
    };
    checked.map_err(|e| CliError::Usage(format!("{path}: {e}")))
}

fn ensure_positive(v: f64, path: &str) -> Result<(), CliError> {
    ensure(v > 0.0 && v.is_finite(), path, "must be positive and finite")
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Usage(format!("{path}: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        ensure(!self.alphas.is_empty(), "alphas", "at least one alpha is required")?;
        for (i, &a) in self.alphas.iter().enumerate() {
            ensure_alpha(a, &format!("alphas[{i}]"))?;
        }

        let ax = &self.axioms;
        ensure(ax.triples > 0, "axioms.triples", "must be positive")?;
        ensure(ax.s_min > 0.0 && ax.s_max >= ax.s_min && ax.s_max.is_finite(), "axioms.s_max", "need 0 < s_min <= s_max")?;
        ensure(ax.half_width >= 0.0 && ax.half_width.is_finite(), "axioms.half_width", "must be finite and nonnegative")?;
        ensure(ax.lemma_samples > 0, "axioms.lemma_samples", "must be positive")?;
        ensure_positive(ax.lemma_range, "axioms.lemma_range")?;
        ensure(ax.counterexample_c >= 1.0 && ax.counterexample_c.is_finite(), "axioms.counterexample_c", "must be finite and >= 1")?;
        ensure(ax.tolerance >= 0.0, "axioms.tolerance", "must be nonnegative")?;

        let gs = &self.grid;
        ensure(!gs.families.is_empty(), "grid.families", "at least one family is required")?;
        ensure(gs.g > 1.0 && gs.g.is_finite(), "grid.g", "must exceed 1")?;
        ensure(!gs.taus.is_empty(), "grid.taus", "at least one tau is required")?;
        for (i, &t) in gs.taus.iter().enumerate() {
            ensure_positive(t, &format!("grid.taus[{i}]"))?;
        }
        ensure(gs.tolerance >= 0.0, "grid.tolerance", "must be nonnegative")?;

        let ad = &self.admissibility;
        ensure(!ad.families.is_empty(), "admissibility.families", "at least one family is required")?;
        ensure(ad.g > 1.0 && ad.g.is_finite(), "admissibility.g", "must exceed 1")?;
        ensure_positive(ad.tau, "admissibility.tau")?;
        ensure(ad.k >= 1.0 && ad.k.is_finite(), "admissibility.k", "must be finite and >= 1")?;
        ensure(ad.truncations.len() >= 2, "admissibility.truncations", "need at least two nested truncations")?;
        for (i, w) in ad.truncations.windows(2).enumerate() {
            ensure(
                w[0][0] <= w[1][0] && w[0][1] <= w[1][1],
                &format!("admissibility.truncations[{}]", i + 1),
                "truncations must be nested",
            )?;
        }
        ensure(ad.growth_limit >= 0.0, "admissibility.growth_limit", "must be nonnegative")?;

        let sm = &self.submult;
        ensure_grid(&sm.grid, "submult.grid")?;
        ensure(sm.n >= 0.0 && sm.n.is_finite(), "submult.n", "must be finite and nonnegative")?;
        ensure(sm.k >= 1.0 && sm.k.is_finite(), "submult.k", "must be finite and >= 1")?;
        ensure(sm.pairs > 0, "submult.pairs", "must be positive")?;

        let pv = &self.pinv;
        ensure_grid(&pv.grid, "pinv.grid")?;
        ensure(pv.n >= 0.0 && pv.n.is_finite(), "pinv.n", "must be finite and nonnegative")?;
        ensure(pv.n + pv.l >= 2.0 && pv.l.is_finite(), "pinv.l", "the decay order n + l must be at least 2")?;
        ensure_positive(pv.target_a, "pinv.target_a")?;
        ensure(pv.target_b > pv.target_a && pv.target_b.is_finite(), "pinv.target_b", "must exceed target_a")?;
        ensure(
            (0.0..1.0).contains(&pv.epsilon_fraction),
            "pinv.epsilon_fraction",
            "must lie in [0, 1)",
        )?;
        ensure_positive(pv.kernel_tol, "pinv.kernel_tol")?;
        ensure_positive(pv.identity_tol, "pinv.identity_tol")?;
        ensure_positive(pv.neumann_tol, "pinv.neumann_tol")?;
        ensure(pv.neumann_max_iter > 0, "pinv.neumann_max_iter", "must be positive")?;
        ensure(pv.ratio_slack >= 0.0, "pinv.ratio_slack", "must be nonnegative")?;
        ensure(pv.decay_seeds > 0, "pinv.decay_seeds", "must be positive")?;
        ensure(pv.exponent_factor > 0.0, "pinv.exponent_factor", "must be positive")?;
        ensure((0.0..=1.0).contains(&pv.min_r2), "pinv.min_r2", "must lie in [0, 1]")?;

        let mc = &self.molecules;
        ensure_alpha(mc.alpha, "molecules.alpha")?;
        ensure(mc.order.n1 >= 0.0 && mc.order.n2 >= 0.0, "molecules.order", "decay orders must be nonnegative")?;
        ensure(!mc.scales.is_empty(), "molecules.scales", "at least one scale is required")?;
        for (i, &s) in mc.scales.iter().enumerate() {
            ensure_positive(s, &format!("molecules.scales[{i}]"))?;
        }
        mc.check_lattice
            .validate()
            .map_err(|e| CliError::Usage(format!("molecules.check_lattice: {e}")))?;
        if let Some(lattice) = &mc.gram_lattice {
            lattice.validate().map_err(|e| CliError::Usage(format!("molecules.gram_lattice: {e}")))?;
        }
        ensure_positive(mc.margin_cap, "molecules.margin_cap")?;
        ensure_positive(mc.pair_tol, "molecules.pair_tol")?;
        ensure_grid(&mc.gram_grid, "molecules.gram_grid")?;
        ensure(mc.n >= 0.0 && mc.n.is_finite(), "molecules.n", "must be finite and nonnegative")?;
        ensure_positive(mc.kernel_tol, "molecules.kernel_tol")?;

        let sc = &self.schur;
        ensure_grid(&sc.grid, "schur.grid")?;
        ensure(sc.n >= 0.0 && sc.n.is_finite(), "schur.n", "must be finite and nonnegative")?;
        ensure(sc.matrices > 0, "schur.matrices", "must be positive")?;
        ensure(!sc.exponents.is_empty(), "schur.exponents", "at least one exponent is required")?;
        for (i, p) in sc.exponents.iter().enumerate() {
            ensure(p.0 >= 1.0, &format!("schur.exponents[{i}]"), "must be >= 1")?;
        }
        for (i, &r) in sc.weight_exponents.iter().enumerate() {
            ensure(r.is_finite(), &format!("schur.weight_exponents[{i}]"), "must be finite")?;
        }
        ensure(sc.trials > 0, "schur.trials", "must be positive")?;
        ensure(sc.slack >= 0.0, "schur.slack", "must be nonnegative")?;
        Ok(())
    }
}

/// `α` values are validated up front, so this cannot fail afterwards.
pub(crate) fn alpha<T: Real>(v: T) -> Alpha<T> {
    Alpha::new(v).expect("alpha validated with the config")
}
