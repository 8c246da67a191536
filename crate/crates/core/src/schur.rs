//! Weighted sequence norms and the weighted Schur test.

use std::io::Read;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::IndexGrid;
use crate::locmat::LocalizedMatrix;
use crate::phase::Alpha;
use crate::scalar::Real;

const POWER_ITERATIONS: usize = 1000;

/// A positive weight `w: Λ → (0, ∞)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightFamily<T> {
    Constant { value: T },
    /// `w(λ) = s_λ^r`.
    ScalePower { r: T },
    /// One weight per grid ordinal.
    Table { values: Vec<T> },
}

impl<T: Real> WeightFamily<T> {
    pub fn unit() -> Self {
        Self::Constant { value: T::one() }
    }

    /// The weight at every grid ordinal.
    pub fn values(&self, grid: &IndexGrid<T>) -> Result<Vec<T>> {
        let values: Vec<T> = match self {
            Self::Constant { value } => vec![*value; grid.len()],
            Self::ScalePower { r } => grid.points().iter().map(|p| p.scale().powf(*r)).collect(),
            Self::Table { values } => {
                if values.len() != grid.len() {
                    return domain(format!("weight table has {} entries for {} indices", values.len(), grid.len()));
                }
                values.clone()
            }
        };
        if let Some(bad) = values.iter().find(|w| !(**w > T::zero() && w.is_finite())) {
            return domain(format!("weights must be positive and finite, found {bad}"));
        }
        Ok(values)
    }
}

impl WeightFamily<f64> {
    /// Reads an `ordinal,weight` CSV (with header) covering every ordinal once.
    pub fn read_table<R: Read>(reader: R, len: usize) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            ordinal: usize,
            weight: f64,
        }
        let mut values = vec![None; len];
        for row in csv::Reader::from_reader(reader).deserialize() {
            let row: Row = row?;
            let slot = values
                .get_mut(row.ordinal)
                .ok_or_else(|| Error::Format(format!("ordinal {} out of range", row.ordinal)))?;
            if slot.replace(row.weight).is_some() {
                return Err(Error::Format(format!("ordinal {} listed twice", row.ordinal)));
            }
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(o, v)| v.ok_or_else(|| Error::Format(format!("no weight for ordinal {o}"))))
            .collect::<Result<_>>()?;
        Ok(Self::Table { values })
    }
}

/// `‖a·w‖_p`, with `p = ∞` as the sup.
pub fn weighted_lp_norm<T: Real>(seq: &[T], weights: &[T], p: T) -> Result<T> {
    if seq.len() != weights.len() {
        return domain("sequence and weights differ in length");
    }
    if !(p > T::zero()) {
        return domain(format!("p must be positive, got {p}"));
    }
    let terms = seq.iter().zip(weights).map(|(&a, &w)| (a * w).abs());
    if p.is_infinite() {
        return Ok(terms.fold(T::zero(), T::max));
    }
    if p == T::one() {
        return Ok(terms.sum());
    }
    Ok(terms.map(|t| t.powf(p)).sum::<T>().powf(p.recip()))
}

pub fn apply_matrix<T: Real>(a: &LocalizedMatrix<T>, seq: &[T]) -> Result<Vec<T>> {
    a.entries().matvec(seq)
}

fn check_p0<T: Real>(p0: T) -> Result<()> {
    if !(p0 > T::zero() && p0 <= T::one()) {
        return domain(format!("p0 must lie in (0, 1], got {p0}"));
    }
    Ok(())
}

/// Smallest `C₁` with `Σ_λ w₂(λ)^{p₀}|A_{λλ'}|^{p₀} ≤ C₁^{p₀} w₁(λ')^{p₀}` for every `λ'`.
pub fn check_schur_plus<T: Real>(a: &LocalizedMatrix<T>, w1: &WeightFamily<T>, w2: &WeightFamily<T>, p0: T) -> Result<T> {
    check_p0(p0)?;
    let (w1, w2) = (w1.values(a.grid())?, w2.values(a.grid())?);
    let m = a.entries();
    Ok(column_sup(m.rows(), |i, j| m[(i, j)].abs(), &w1, &w2, p0))
}

/// Smallest `C₂` with `Σ_{λ'}|A_{λλ'}| w₁(λ')^{-1} ≤ C₂ w₂(λ)^{-1}` for every `λ`.
pub fn check_schur_minus<T: Real>(a: &LocalizedMatrix<T>, w1: &WeightFamily<T>, w2: &WeightFamily<T>) -> Result<T> {
    let (w1, w2) = (w1.values(a.grid())?, w2.values(a.grid())?);
    let m = a.entries();
    Ok(row_sup(m.rows(), |i, j| m[(i, j)].abs(), &w1, &w2))
}

fn column_sup<T: Real>(n: usize, entry: impl Fn(usize, usize) -> T + Sync, w1: &[T], w2: &[T], p0: T) -> T {
    (0..n)
        .into_par_iter()
        .map(|j| {
            let sum: T = if p0 == T::one() {
                (0..n).map(|i| w2[i] * entry(i, j)).sum()
            } else {
                (0..n).map(|i| (w2[i] * entry(i, j)).powf(p0)).sum::<T>().powf(p0.recip())
            };
            sum / w1[j]
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(T::zero(), T::max)
}

fn row_sup<T: Real>(n: usize, entry: impl Fn(usize, usize) -> T + Sync, w1: &[T], w2: &[T]) -> T {
    (0..n)
        .into_par_iter()
        .map(|i| w2[i] * (0..n).map(|j| entry(i, j) / w1[j]).sum::<T>())
        .collect::<Vec<_>>()
        .into_iter()
        .fold(T::zero(), T::max)
}

/// `C₁^{1/p} C₂^{1/p'}` for `p ≥ 1`, and `C₁` for `p₀ ≤ p < 1`.
pub fn op_norm_bound<T: Real>(c1: T, c2: T, p: T, p0: T) -> Result<T> {
    check_p0(p0)?;
    if !(c1 >= T::zero() && c2 >= T::zero()) {
        return domain("Schur constants must be nonnegative");
    }
    if !(p >= p0) {
        return domain(format!("p = {p} is below p0 = {p0}"));
    }
    if p <= T::one() {
        return Ok(c1);
    }
    if p.is_infinite() {
        return Ok(c2);
    }
    let inv = p.recip();
    Ok(c1.powf(inv) * c2.powf(T::one() - inv))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchurReport<T> {
    pub c1: Option<T>,
    pub c2: Option<T>,
    pub p0: T,
    pub k: T,
}

/// Both Schur constants of the matrix `ω_α^{-K}`.
pub fn weighted_admissibility<T: Real>(
    grid: &IndexGrid<T>,
    alpha: Alpha<T>,
    w1: &WeightFamily<T>,
    w2: &WeightFamily<T>,
    p0: T,
    k: T,
) -> Result<SchurReport<T>> {
    check_p0(p0)?;
    if !(k >= T::one()) {
        return domain(format!("admissibility order must be >= 1, got {k}"));
    }
    let (w1, w2) = (w1.values(grid)?, w2.values(grid)?);
    let dist = grid.distance(alpha);
    let entry = |i: usize, j: usize| dist.omega(i, j).powf(-k);
    Ok(SchurReport {
        c1: Some(column_sup(grid.len(), entry, &w1, &w2, p0)),
        c2: Some(row_sup(grid.len(), entry, &w1, &w2)),
        p0,
        k,
    })
}

/// Empirical lower bound for `‖A‖_{ℓ^p_{w₁} → ℓ^p_{w₂}}`.
///
/// `p = 2` uses power iteration on `W₂ A W₁^{-1}`; other exponents take the
/// best of `trials` seeded Rademacher sequences.
pub fn estimate_op_norm<T: Real>(
    a: &LocalizedMatrix<T>,
    w1: &WeightFamily<T>,
    w2: &WeightFamily<T>,
    p: T,
    trials: usize,
    seed: u64,
) -> Result<T> {
    if trials == 0 {
        return domain("at least one trial is required");
    }
    let (w1, w2) = (w1.values(a.grid())?, w2.values(a.grid())?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if p == T::lit(2.0) {
        return power_iteration(a, &w1, &w2, &mut rng);
    }
    let mut best = T::zero();
    for _ in 0..trials {
        let seq: Vec<T> = (0..a.dim())
            .map(|_| if rng.gen::<bool>() { T::one() } else { -T::one() })
            .collect();
        let src = weighted_lp_norm(&seq, &w1, p)?;
        let dst = weighted_lp_norm(&apply_matrix(a, &seq)?, &w2, p)?;
        best = best.max(dst / src);
    }
    Ok(best)
}

fn power_iteration<T: Real>(a: &LocalizedMatrix<T>, w1: &[T], w2: &[T], rng: &mut ChaCha8Rng) -> Result<T> {
    let n = a.dim();
    let m = a.entries();
    // B = W₂ A W₁⁻¹ and its transpose, applied without forming them.
    let b = |x: &[T]| -> Vec<T> {
        (0..n)
            .map(|i| w2[i] * m.row(i).iter().zip(x).zip(w1).map(|((&v, &xj), &wj)| v * xj / wj).sum::<T>())
            .collect()
    };
    let bt = |y: &[T]| -> Vec<T> {
        let mut out = vec![T::zero(); n];
        for (i, &yi) in y.iter().enumerate() {
            let c = yi * w2[i];
            for ((o, &v), &wj) in out.iter_mut().zip(m.row(i)).zip(w1) {
                *o = *o + c * v / wj;
            }
        }
        out
    };
    let norm = |v: &[T]| v.iter().map(|&x| x * x).sum::<T>().sqrt();
    let mut x: Vec<T> = (0..n).map(|_| T::lit(rng.gen::<f64>() - 0.5)).collect();
    let mut estimate = T::zero();
    for _ in 0..POWER_ITERATIONS {
        let nx = norm(&x);
        if nx == T::zero() {
            break;
        }
        x.iter_mut().for_each(|v| *v = *v / nx);
        let y = b(&x);
        let next = norm(&y);
        let converged = (next - estimate).abs() <= T::epsilon() * T::lit(16.0) * next;
        estimate = next;
        if converged {
            break;
        }
        x = bt(&y);
    }
    Ok(estimate)
}
