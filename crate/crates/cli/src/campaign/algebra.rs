use std::sync::Arc;

use alphaloc::grid::{admissibility_sup, measured_separation};
use alphaloc::locmat::{
    bn_norm, decay_exponent_fit, n_plus, pinv_from_spectrum, pinv_neumann, pinv_spectral, spectral_gap,
    submultiplicativity_check, symmetric_eigendecomposition, PinvParams,
};
use alphaloc::molecule::{max_feasible_epsilon, synth_localized_dd, synth_rank_deficient, GapSpec};
use alphaloc::schur::{check_schur_minus, check_schur_plus, estimate_op_norm, op_norm_bound};
use alphaloc::{AlgebraConstants, Alpha, Grid, LocalizedMatrix, Result, WeightFamily};

use super::{attempt, random_localized, rng};
use crate::config::{ExperimentConfig, PinvConfig};
use crate::report::CheckRecord;

const SUBMULT: &str = "‖AB‖_{B_N} ≤ (1+C_ω)‖A‖_{B_{N+L}}‖B‖_{B_N}";
const MOORE_PENROSE: &str = "AA⁺A = A, A⁺AA⁺ = A⁺, (AA⁺)ᵀ = AA⁺, (A⁺A)ᵀ = A⁺A";
const NORMAL_EQ: &str = "A²A⁺ = A";
const NEUMANN: &str = "A⁺ = γ Σ_k (I − γA²)^k A, γ = 2/(a²+b²)";
const NEUMANN_RATE: &str = "‖(I − γA²)|_{ran A}‖ ≤ q = (b²−a²)/(b²+a²)";
const N_PLUS: &str = "N⁺ = N / (1 − log(1 + γ‖A‖²(1+C_ω)²) / log q)";
const DECAY: &str = "A ∈ B_{N+L} with spectrum in {0} ∪ [a,b] implies A⁺ ∈ B_{N⁺}";
const SCHUR: &str = "‖A‖_{ℓ^p_w → ℓ^p_w} ≤ C₁^{1/p} C₂^{1−1/p}";
const SCHUR_LOCALIZED: &str = "‖A‖_{ℓ^p → ℓ^p} ≤ 2^{N/p} C_ω ‖A‖_{B_N}";

fn rel_diff(x: &LocalizedMatrix<f64>, y: &LocalizedMatrix<f64>) -> Result<f64> {
    let scale = y.entries().max_abs();
    let diff = x.sub(y)?.entries().max_abs();
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

pub fn submultiplicativity(cfg: &ExperimentConfig) -> Vec<CheckRecord> {
    let sm = &cfg.submult;
    let name = "submultiplicativity".to_string();
    vec![attempt(name.clone(), SUBMULT, || {
        let grid = Arc::new(sm.grid.build()?);
        let alpha = sm.grid.alpha();
        let consts = AlgebraConstants {
            c_lambda: measured_separation(&grid, alpha)?.measured_min,
            c_t: 4.0,
            c_omega: admissibility_sup(&grid, alpha, sm.k)?,
            k: sm.k,
        };
        let l = consts.min_extra_order(sm.n);
        let mut violations = 0usize;
        let mut worst = 0.0f64;
        for i in 0..sm.pairs as u64 {
            let mut r = rng(cfg.seed, i);
            let a = random_localized(&grid, alpha, sm.n + l, &mut r);
            let b = random_localized(&grid, alpha, sm.n, &mut r);
            let outcome = submultiplicativity_check(&a, &b, alpha, sm.n, l, &consts)?;
            violations += usize::from(!outcome.holds);
            worst = worst.max(outcome.lhs / outcome.rhs);
        }
        Ok(CheckRecord::new(name, SUBMULT)
            .measure("pairs", sm.pairs as f64)
            .measure("violations", violations as f64)
            .measure("max_lhs_over_rhs", worst)
            .measure("c_lambda", consts.c_lambda)
            .measure("c_omega", consts.c_omega)
            .measure("l", l)
            .measure("indices", grid.len() as f64)
            .bound(1.0)
            .pass(violations == 0))
    })]
}

fn dd_gap(pv: &PinvConfig, grid: &Grid, alpha: Alpha<f64>) -> Result<GapSpec<f64>> {
    let eps = pv.epsilon_fraction * max_feasible_epsilon(grid, alpha, pv.n + pv.l, pv.target_a, pv.target_b);
    GapSpec::new(pv.target_a, pv.target_b, eps)
}

/// Pseudoinverse identities and Neumann agreement for one test matrix.
fn pinv_suite(label: &str, a: &LocalizedMatrix<f64>, pv: &PinvConfig) -> Vec<CheckRecord> {
    let names = [
        format!("moore_penrose[{label}]"),
        format!("normal_equation[{label}]"),
        format!("neumann_agreement[{label}]"),
        format!("neumann_ratio[{label}]"),
    ];
    let anchors = [MOORE_PENROSE, NORMAL_EQ, NEUMANN, NEUMANN_RATE];
    let run = || -> Result<Vec<CheckRecord>> {
        let spec = symmetric_eigendecomposition(a)?;
        let gap = spectral_gap(&spec, pv.kernel_tol)?;
        let p = pinv_from_spectrum(a, &spec, pv.kernel_tol)?;
        let ap = a.matmul(&p)?;
        let pa = p.matmul(a)?;
        let mp = [
            rel_diff(&ap.matmul(a)?, a)?,
            rel_diff(&pa.matmul(&p)?, &p)?,
            rel_diff(&ap.transpose(), &ap)?,
            rel_diff(&pa.transpose(), &pa)?,
        ];
        let worst = mp.iter().copied().fold(0.0, f64::max);
        let normal = rel_diff(&a.matmul(&ap)?, a)?;
        let neumann = pinv_neumann(a, gap.a, gap.b, pv.neumann_tol, pv.neumann_max_iter)?;
        let agreement = neumann.pinv.sub(&p)?.entries().max_abs();
        let q = PinvParams::new(gap.a, gap.b, 0.0, 0)?.q;
        let ratio = neumann.contraction_ratio().unwrap_or(0.0);
        Ok(vec![
            CheckRecord::new(names[0].clone(), anchors[0])
                .measure("aa_plus_a", mp[0])
                .measure("a_plus_a_a_plus", mp[1])
                .measure("aa_plus_symmetry", mp[2])
                .measure("a_plus_a_symmetry", mp[3])
                .measure("kernel_dim", gap.kernel_dim as f64)
                .bound(pv.identity_tol)
                .pass(worst <= pv.identity_tol),
            CheckRecord::new(names[1].clone(), anchors[1])
                .measure("residual", normal)
                .bound(pv.identity_tol)
                .pass(normal <= pv.identity_tol),
            CheckRecord::new(names[2].clone(), anchors[2])
                .measure("sup_diff", agreement)
                .measure("iterations", neumann.iterations as f64)
                .measure("a", gap.a)
                .measure("b", gap.b)
                .bound(pv.identity_tol)
                .pass(agreement <= pv.identity_tol),
            CheckRecord::new(names[3].clone(), anchors[3])
                .measure("ratio", ratio)
                .measure("q", q)
                .bound(q + pv.ratio_slack)
                .pass(ratio <= q + pv.ratio_slack),
        ])
    };
    run().unwrap_or_else(|e| {
        names
            .iter()
            .zip(anchors)
            .map(|(n, anchor)| CheckRecord::errored(n.clone(), anchor, &e))
            .collect()
    })
}

pub fn pinv_correctness(cfg: &ExperimentConfig) -> Vec<CheckRecord> {
    let pv = &cfg.pinv;
    let decay = pv.n + pv.l;
    let setup = || -> Result<(Arc<Grid>, Alpha<f64>, GapSpec<f64>)> {
        let grid = Arc::new(pv.grid.build()?);
        let alpha = pv.grid.alpha();
        let gap = dd_gap(pv, &grid, alpha)?;
        Ok((grid, alpha, gap))
    };
    let (grid, alpha, gap) = match setup() {
        Ok(s) => s,
        Err(e) => return vec![CheckRecord::errored("pinv_setup", MOORE_PENROSE, e)],
    };
    let mut out = Vec::new();
    match synth_localized_dd(grid.clone(), alpha, decay, &gap, cfg.seed) {
        Ok(a) => out.extend(pinv_suite("dd", &a, pv)),
        Err(e) => out.push(CheckRecord::errored("pinv[dd]", MOORE_PENROSE, e)),
    }
    for &k in &pv.kernel_dims {
        let label = format!("rank_deficient,kernel={k}");
        match synth_rank_deficient(grid.clone(), alpha, decay, &gap, k, cfg.seed.wrapping_add(k as u64)) {
            Ok(rd) => out.extend(pinv_suite(&label, &rd.matrix, pv)),
            Err(e) => out.push(CheckRecord::errored(format!("pinv[{label}]"), MOORE_PENROSE, e)),
        }
    }
    out
}

pub fn n_plus_checks(_cfg: &ExperimentConfig) -> Vec<CheckRecord> {
    let reference = attempt("n_plus_reference".into(), N_PLUS, || {
        let v = n_plus(10.0, 1.0, 3f64.sqrt(), 1.0, 1.0)?;
        Ok(CheckRecord::new("n_plus_reference", N_PLUS)
            .measure("n_plus", v)
            .measure("expected", 3.8685)
            .bound(1e-3)
            .pass((v - 3.8685).abs() <= 1e-3))
    });
    let equal = attempt("n_plus_equal_bounds".into(), N_PLUS, || {
        let mut worst = 0.0f64;
        for &(n, a) in &[(1.0f64, 1.0f64), (2.0, 0.5), (7.5, 3.0), (10.0, 1.0)] {
            worst = worst.max((n_plus(n, a, a, 2.0, 5.0)? - n).abs());
        }
        Ok(CheckRecord::new("n_plus_equal_bounds", N_PLUS)
            .measure("max_abs_diff", worst)
            .bound(0.0)
            .pass(worst == 0.0))
    });
    let monotone = attempt("n_plus_monotone".into(), N_PLUS, || {
        let c_omegas = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0];
        let norms = [0.25, 0.5, 1.0, 2.0, 4.0];
        let mut breaks = 0usize;
        let mut cases = 0usize;
        for &(a, b) in &[(1.0, 3f64.sqrt()), (1.0, 3.0), (0.5, 4.0)] {
            for &norm in &norms {
                for w in c_omegas.windows(2) {
                    cases += 1;
                    breaks += usize::from(n_plus(10.0, a, b, norm, w[1])? >= n_plus(10.0, a, b, norm, w[0])?);
                }
            }
            for &c in &c_omegas {
                for w in norms.windows(2) {
                    cases += 1;
                    breaks += usize::from(n_plus(10.0, a, b, w[1], c)? >= n_plus(10.0, a, b, w[0], c)?);
                }
            }
        }
        Ok(CheckRecord::new("n_plus_monotone", N_PLUS)
            .measure("cases", cases as f64)
            .measure("non_decreasing_steps", breaks as f64)
            .bound(0.0)
            .pass(breaks == 0))
    });
    vec![reference, equal, monotone]
}

pub fn pinv_decay(cfg: &ExperimentConfig) -> Vec<CheckRecord> {
    let pv = &cfg.pinv;
    let decay = pv.n + pv.l;
    let setup = || -> Result<_> {
        let grid = Arc::new(pv.grid.build()?);
        let alpha = pv.grid.alpha();
        let gap = dd_gap(pv, &grid, alpha)?;
        let c_omega = admissibility_sup(&grid, alpha, 2.0)?;
        Ok((grid, alpha, gap, c_omega))
    };
    let (grid, alpha, gap, c_omega) = match setup() {
        Ok(s) => s,
        Err(e) => return vec![CheckRecord::errored("pinv_decay_setup", DECAY, e)],
    };
    let interior = grid.interior();
    (0..pv.decay_seeds as u64)
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i);
            let name = format!("pinv_decay[seed={seed}]");
            attempt(name.clone(), DECAY, || {
                let a = synth_localized_dd(grid.clone(), alpha, decay, &gap, seed)?;
                let norm = bn_norm(&a, alpha, decay)?.value;
                let target = n_plus(pv.n, pv.target_a, pv.target_b, norm, c_omega)?;
                let fit = decay_exponent_fit(&pinv_spectral(&a, pv.kernel_tol)?, alpha, &interior)?;
                let bound = pv.exponent_factor * target;
                Ok(CheckRecord::new(name, DECAY)
                    .measure("exponent", fit.exponent)
                    .measure("r2", fit.r2)
                    .measure("n_plus", target)
                    .measure("norm_a", norm)
                    .measure("c_omega", c_omega)
                    .measure("epsilon", gap.epsilon)
                    .bound(bound)
                    .pass(fit.exponent >= bound && fit.r2 >= pv.min_r2))
            })
        })
        .collect()
}

pub fn schur_bounds(cfg: &ExperimentConfig) -> Vec<CheckRecord> {
    let sc = &cfg.schur;
    let setup = || -> Result<_> {
        let grid = Arc::new(sc.grid.build()?);
        let alpha = sc.grid.alpha();
        let c_omega = admissibility_sup(&grid, alpha, sc.n.max(1.0))?;
        Ok((grid, alpha, c_omega))
    };
    let (grid, alpha, c_omega) = match setup() {
        Ok(s) => s,
        Err(e) => return vec![CheckRecord::errored("schur_setup", SCHUR, e)],
    };
    let matrices: Vec<LocalizedMatrix<f64>> = (0..sc.matrices as u64)
        .map(|i| random_localized(&grid, alpha, sc.n, &mut rng(cfg.seed, 1000 + i)))
        .collect();
    let mut out = Vec::new();
    for &r in &sc.weight_exponents {
        let w = if r == 0.0 {
            WeightFamily::unit()
        } else {
            WeightFamily::ScalePower { r }
        };
        for p in &sc.exponents {
            let p = p.0;
            let name = format!("schur[p={p},w=s^{r}]");
            out.push(attempt(name.clone(), SCHUR, || {
                let mut worst = 0.0f64;
                let mut violations = 0usize;
                for (i, a) in matrices.iter().enumerate() {
                    let c1 = check_schur_plus(a, &w, &w, 1.0)?;
                    let c2 = check_schur_minus(a, &w, &w)?;
                    let bound = op_norm_bound(c1, c2, p, 1.0)?;
                    let est = estimate_op_norm(a, &w, &w, p, sc.trials, cfg.seed.wrapping_add(i as u64))?;
                    violations += usize::from(est > bound * (1.0 + sc.slack));
                    worst = worst.max(est / bound);
                }
                Ok(CheckRecord::new(name, SCHUR)
                    .measure("matrices", matrices.len() as f64)
                    .measure("max_estimate_over_bound", worst)
                    .measure("violations", violations as f64)
                    .bound(1.0 + sc.slack)
                    .pass(violations == 0))
            }));
        }
    }
    for p in &sc.exponents {
        let p = p.0;
        let name = format!("schur_localized[p={p}]");
        out.push(attempt(name.clone(), SCHUR_LOCALIZED, || {
            let unit = WeightFamily::unit();
            let factor = 2f64.powf(sc.n / p) * c_omega;
            let mut worst = 0.0f64;
            let mut violations = 0usize;
            for (i, a) in matrices.iter().enumerate() {
                let bound = factor * bn_norm(a, alpha, sc.n)?.value;
                let est = estimate_op_norm(a, &unit, &unit, p, sc.trials, cfg.seed.wrapping_add(i as u64))?;
                violations += usize::from(est > bound * (1.0 + sc.slack));
                worst = worst.max(est / bound);
            }
            Ok(CheckRecord::new(name, SCHUR_LOCALIZED)
                .measure("matrices", matrices.len() as f64)
                .measure("c_omega", c_omega)
                .measure("max_estimate_over_bound", worst)
                .measure("violations", violations as f64)
                .bound(1.0 + sc.slack)
                .pass(violations == 0))
        }));
    }
    out
}
