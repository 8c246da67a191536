use alphaloc::grid::{c_omega_interior, measured_separation, CurveletGridSpec, GridKind, GridSpec, ShearletGridSpec};

use super::{attempt, fmt_alpha};
use crate::config::{alpha, ExperimentConfig};
use crate::report::CheckRecord;

const SEPARATION: &str = "ω_α(λ, λ') ≥ C_Λ > 1 for λ ≠ λ'";
const ADMISSIBLE: &str = "sup_λ Σ_λ' ω_α(λ, λ')^{-K} = C_ω < ∞";

fn family_name(kind: GridKind) -> &'static str {
    match kind {
        GridKind::Curvelet => "curvelet",
        GridKind::Shearlet => "shearlet",
    }
}

fn family_spec(kind: GridKind, a: f64, g: f64, tau: f64, j_max: u32, k_box: u32) -> GridSpec<f64> {
    match kind {
        GridKind::Curvelet => GridSpec::Curvelet(CurveletGridSpec::new(alpha(a), g, tau, j_max, k_box)),
        GridKind::Shearlet => GridSpec::Shearlet(ShearletGridSpec::new(alpha(a), g, tau, 0, j_max as i32, k_box)),
    }
}

pub fn separation(cfg: &ExperimentConfig) -> Vec<CheckRecord> {
    let gs = &cfg.grid;
    let mut out = Vec::new();
    for &kind in &gs.families {
        for &a in &cfg.alphas {
            for &tau in &gs.taus {
                let name = format!("separation[{},{},tau={tau}]", family_name(kind), fmt_alpha(a));
                out.push(attempt(name.clone(), SEPARATION, || {
                    let spec = family_spec(kind, a, gs.g, tau, gs.j_max, gs.k_box);
                    let grid = spec.build()?;
                    let report = measured_separation(&grid, alpha(a))?;
                    let (m, f) = (report.measured_min, report.formula_value);
                    let attained_ok = !report.formula_attained || (m - f).abs() <= gs.tolerance;
                    Ok(CheckRecord::new(name, SEPARATION)
                        .measure("measured_min", m)
                        .measure("formula", f)
                        .measure("formula_attained", f64::from(u8::from(report.formula_attained)))
                        .measure("indices", grid.len() as f64)
                        .bound(f)
                        .pass(m >= f - gs.tolerance && attained_ok))
                }));
            }
        }
    }
    out
}

pub fn admissibility_growth(cfg: &ExperimentConfig) -> Vec<CheckRecord> {
    let ad = &cfg.admissibility;
    let mut out = Vec::new();
    for &kind in &ad.families {
        for &a in &cfg.alphas {
            let name = format!("admissibility[{},{},K={}]", family_name(kind), fmt_alpha(a), ad.k);
            out.push(attempt(name.clone(), ADMISSIBLE, || {
                let mut record = CheckRecord::new(name, ADMISSIBLE);
                let mut values = Vec::new();
                for &[j_max, k_box] in &ad.truncations {
                    let grid = family_spec(kind, a, ad.g, ad.tau, j_max, k_box).build()?;
                    let c = c_omega_interior(&grid, alpha(a), ad.k)?;
                    record = record.measure(&format!("c_omega[j_max={j_max},k_box={k_box}]"), c);
                    values.push(c);
                }
                let (prev, last) = (values[values.len() - 2], values[values.len() - 1]);
                let growth = (last - prev) / prev;
                Ok(record.measure("growth", growth).bound(ad.growth_limit).pass(growth < ad.growth_limit))
            }));
        }
    }
    out
}
