//! Frequency-domain α-molecule systems, their Gramians, and synthetic
//! localized matrices with a prescribed spectral gap.
//!
//! Fourier transforms use the unitary angular-frequency convention
//! `f̂(ξ) = (2π)^{-1} ∫ f(x) e^{-i⟨x,ξ⟩} dx`. For
//! `m_λ(x) = s^{(1+α)/2} a(D_s R_θ (x − x_λ))` this gives
//! `m̂_λ(ξ) = s^{-(1+α)/2} e^{-i⟨x_λ,ξ⟩} â(D_s^{-1} R_θ ξ)`.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::{dilation_matrix, mat2_apply, rotation_matrix, IndexGrid};
use crate::locmat::{bn_norm, decay_exponent_fit, symmetric_eigendecomposition, LocalizedMatrix};
use crate::matrix::DenseMatrix;
use crate::phase::{Alpha, PhasePoint};
use crate::scalar::{bound_slack, Real};

/// Largest molecule system the Gramian assembly accepts.
pub const MAX_MOLECULES: usize = 400;
/// Largest number of frequency lattice points.
pub const MAX_LATTICE_POINTS: usize = 512 * 512;
/// Finite-difference step of the molecule-condition check.
pub const FD_STEP: f64 = 0.05;
/// Coarsest lattice the molecule-condition check accepts.
pub const MAX_CHECK_STEP: f64 = 0.1;
/// Margins above this are reported as a failed condition.
pub const DEFAULT_MARGIN_CAP: f64 = 1e6;
/// Amplitudes below this fraction of a molecule's peak are dropped.
const CROP_FRACTION: f64 = 1e-17;

/// Orders `(R, M, N₁, N₂)` of the molecule decay condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct MoleculeOrder<T> {
    /// Number of frequency derivatives controlled.
    pub r: u32,
    /// Vanishing order along `ξ₁`.
    pub m0: u32,
    pub n1: T,
    pub n2: T,
}

impl<T: Real> MoleculeOrder<T> {
    pub fn new(r: u32, m0: u32, n1: T, n2: T) -> Result<Self> {
        if !(n1 >= T::zero() && n2 >= T::zero()) {
            return domain("decay orders must be nonnegative");
        }
        Ok(Self { r, m0, n1, n2 })
    }
}

/// A real-valued generating function on the frequency plane.
pub trait FrequencyProfile<T>: Send + Sync {
    fn eval(&self, xi: [T; 2]) -> T;
}

impl<T, F> FrequencyProfile<T> for F
where
    F: Fn([T; 2]) -> T + Send + Sync,
{
    fn eval(&self, xi: [T; 2]) -> T {
        self(xi)
    }
}

/// `c · (ξ₁/√(1+ξ₁²))^{M} · exp(−|ξ|²/2)` with `c` making the L² norm one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuiltinProfile<T> {
    pub m0: u32,
    pub c: T,
}

impl<T: Real> FrequencyProfile<T> for BuiltinProfile<T> {
    fn eval(&self, xi: [T; 2]) -> T {
        let t = xi[0] / (T::one() + xi[0] * xi[0]).sqrt();
        self.c * t.powi(self.m0 as i32) * (-(xi[0] * xi[0] + xi[1] * xi[1]) * T::lit(0.5)).exp()
    }
}

pub struct MoleculeProfile<T> {
    pub order: MoleculeOrder<T>,
    evaluator: Arc<dyn FrequencyProfile<T>>,
}

impl<T: Copy> Clone for MoleculeProfile<T> {
    fn clone(&self) -> Self {
        Self {
            order: self.order,
            evaluator: self.evaluator.clone(),
        }
    }
}

impl<T: std::fmt::Debug> std::fmt::Debug for MoleculeProfile<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MoleculeProfile").field("order", &self.order).finish_non_exhaustive()
    }
}

impl<T: Real> MoleculeProfile<T> {
    pub fn custom(order: MoleculeOrder<T>, evaluator: impl FrequencyProfile<T> + 'static) -> Self {
        Self {
            order,
            evaluator: Arc::new(evaluator),
        }
    }

    #[inline]
    pub fn eval(&self, xi: [T; 2]) -> T {
        self.evaluator.eval(xi)
    }
}

/// The built-in profile for `order`, normalized in L².
pub fn make_profile<T: Real>(order: MoleculeOrder<T>) -> MoleculeProfile<T> {
    // ‖â‖² = √π ∫ (t²/(1+t²))^{M} e^{-t²} dt; the trapezoid rule is spectrally
    // accurate for this integrand.
    let h = 1e-3;
    let half = 12_000;
    let radial: f64 = (-half..=half)
        .map(|i| {
            let t = i as f64 * h;
            (t * t / (1.0 + t * t)).powi(order.m0 as i32) * (-t * t).exp() * h
        })
        .sum();
    let norm2 = std::f64::consts::PI.sqrt() * radial;
    MoleculeProfile::custom(
        order,
        BuiltinProfile {
            m0: order.m0,
            c: T::lit(norm2.sqrt().recip()),
        },
    )
}

/// The square lattice `{h·(i, j) : |i|, |j| ≤ half_count}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct FrequencyLattice<T> {
    pub half_width: T,
    pub step: T,
}

impl<T: Real> FrequencyLattice<T> {
    pub fn new(half_width: T, step: T) -> Result<Self> {
        let lattice = Self { half_width, step };
        lattice.validate()?;
        Ok(lattice)
    }

    /// Extent `6·s_max` with the finest step that stays within the point cap.
    pub fn for_scales(s_max: T) -> Result<Self> {
        let half_width = T::lit(6.0) * s_max.max(T::one());
        let side = (MAX_LATTICE_POINTS as f64).sqrt().floor() - 1.0;
        let step = T::lit(0.2).min(T::lit(2.0) * half_width / T::lit(side - 1.0));
        Self::new(half_width, step)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > T::zero() && self.half_width >= T::zero() && self.half_width.is_finite()) {
            return domain("lattice needs a positive step and a finite nonnegative extent");
        }
        let points = self.axis_len().saturating_mul(self.axis_len());
        if points > MAX_LATTICE_POINTS {
            return Err(Error::Size {
                requested: points,
                cap: MAX_LATTICE_POINTS,
            });
        }
        Ok(())
    }

    pub fn half_count(&self) -> usize {
        (self.half_width / self.step * (T::one() + T::epsilon() * T::lit(8.0)))
            .floor()
            .to_usize()
            .unwrap_or(usize::MAX / 4)
    }

    pub fn axis_len(&self) -> usize {
        2 * self.half_count() + 1
    }

    /// Lattice coordinate along one axis.
    #[inline]
    pub fn coord(&self, i: usize) -> T {
        (T::from_count(i) - T::from_count(self.half_count())) * self.step
    }

    pub fn cell_area(&self) -> T {
        self.step * self.step
    }
}

/// `s^{-(1+α)/2} â(D_s^{-1} R_θ ξ)`, the modulus part of `m̂_λ`.
pub fn molecule_amplitude<T: Real>(profile: &MoleculeProfile<T>, alpha: Alpha<T>, s: T, theta: T, xi: [T; 2]) -> T {
    let d = dilation_matrix(s, alpha);
    let rotated = mat2_apply(&rotation_matrix(theta), xi);
    let arg = [rotated[0] / d[0][0], rotated[1] / d[1][1]];
    s.powf(-(T::one() + alpha.value()) * T::lit(0.5)) * profile.eval(arg)
}

/// `m̂_λ(ξ)` including the translation phase.
pub fn molecule_hat<T: Real>(profile: &MoleculeProfile<T>, alpha: Alpha<T>, p: &PhasePoint<T>, xi: [T; 2]) -> Complex<T> {
    let x = p.location();
    let phase = -(x[0] * xi[0] + x[1] * xi[1]);
    Complex::from_polar(molecule_amplitude(profile, alpha, p.scale(), p.theta(), xi), phase)
}

/// Samples of one molecule on a lattice: a real amplitude array plus the
/// translation, whose phase is applied analytically.
#[derive(Clone, Debug)]
pub struct MoleculeSamples<T> {
    pub lattice: FrequencyLattice<T>,
    /// Row-major over `(ξ₁, ξ₂)` lattice indices.
    pub amplitude: Vec<T>,
    pub location: [T; 2],
}

impl<T: Real> MoleculeSamples<T> {
    pub fn value(&self, i: usize, j: usize) -> Complex<T> {
        let xi = [self.lattice.coord(i), self.lattice.coord(j)];
        let a = self.amplitude[i * self.lattice.axis_len() + j];
        Complex::from_polar(a, -(self.location[0] * xi[0] + self.location[1] * xi[1]))
    }

    /// Lattice approximation of `‖m_λ‖²`.
    pub fn l2_norm_sq(&self) -> T {
        self.amplitude.iter().map(|&a| a * a).sum::<T>() * self.lattice.cell_area()
    }

    /// `(∫ξ₁²|m̂|², ∫ξ₂²|m̂|²) / ∫|m̂|²` on the lattice.
    pub fn second_moments(&self) -> [T; 2] {
        let n = self.lattice.axis_len();
        let (mut m1, mut m2, mut mass) = (T::zero(), T::zero(), T::zero());
        for i in 0..n {
            let x1 = self.lattice.coord(i);
            for j in 0..n {
                let x2 = self.lattice.coord(j);
                let w = self.amplitude[i * n + j] * self.amplitude[i * n + j];
                m1 = m1 + x1 * x1 * w;
                m2 = m2 + x2 * x2 * w;
                mass = mass + w;
            }
        }
        [m1 / mass, m2 / mass]
    }
}

pub fn synthesize_molecule<T: Real>(
    p: &PhasePoint<T>,
    alpha: Alpha<T>,
    profile: &MoleculeProfile<T>,
    lattice: &FrequencyLattice<T>,
) -> Result<MoleculeSamples<T>> {
    lattice.validate()?;
    let n = lattice.axis_len();
    let mut amplitude = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let xi = [lattice.coord(i), lattice.coord(j)];
            amplitude.push(molecule_amplitude(profile, alpha, p.scale(), p.theta(), xi));
        }
    }
    Ok(MoleculeSamples {
        lattice: *lattice,
        amplitude,
        location: p.location(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport<T> {
    /// Largest ratio of a derivative to the decay bound.
    pub margin: T,
    /// Frequency where the margin is attained.
    pub argmax: [T; 2],
    /// Multi-index `β` attaining it.
    pub beta: [u32; 2],
    pub holds: bool,
}

/// `min(1, s^{-1}+|ξ₁|+s^{-(1−α)}|ξ₂|)^M ⟨|ξ|⟩^{-N₁} ⟨ξ₂⟩^{-N₂}` with `⟨t⟩ = √(1+t²)`.
pub fn molecule_bound<T: Real>(order: &MoleculeOrder<T>, s: T, alpha: Alpha<T>, xi: [T; 2]) -> T {
    let near = (s.recip() + xi[0].abs() + s.powf(-alpha.angular_exponent()) * xi[1].abs()).min(T::one());
    let radial = T::one() + xi[0] * xi[0] + xi[1] * xi[1];
    let second = T::one() + xi[1] * xi[1];
    near.powi(order.m0 as i32) * radial.powf(-order.n1 * T::lit(0.5)) * second.powf(-order.n2 * T::lit(0.5))
}

/// Central difference `h^{-n} Σ_k (−1)^k C(n,k) f(x + (n/2 − k)h)` along each axis.
fn central_difference<T: Real>(profile: &MoleculeProfile<T>, xi: [T; 2], beta: [u32; 2], h: T) -> T {
    let weights = |n: u32| -> Vec<(T, T)> {
        let mut c = 1.0f64;
        (0..=n)
            .map(|k| {
                if k > 0 {
                    c = c * f64::from(n - k + 1) / f64::from(k);
                }
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                (T::lit(sign * c), (T::lit(f64::from(n) * 0.5) - T::lit(f64::from(k))) * h)
            })
            .collect()
    };
    let (w1, w2) = (weights(beta[0]), weights(beta[1]));
    let mut acc = T::zero();
    for &(c1, d1) in &w1 {
        for &(c2, d2) in &w2 {
            acc = acc + c1 * c2 * profile.eval([xi[0] + d1, xi[1] + d2]);
        }
    }
    acc / h.powi((beta[0] + beta[1]) as i32)
}

/// Implicit constant of the molecule decay condition at scale `s`, estimated
/// over the lattice for every derivative order `|β| ≤ R`.
pub fn molecule_condition_check<T: Real>(
    profile: &MoleculeProfile<T>,
    s: T,
    alpha: Alpha<T>,
    lattice: &FrequencyLattice<T>,
    cap: T,
) -> Result<ConditionReport<T>> {
    lattice.validate()?;
    if lattice.step > T::lit(MAX_CHECK_STEP) {
        return domain(format!(
            "lattice step {} is too coarse for the derivative check (max {MAX_CHECK_STEP})",
            lattice.step
        ));
    }
    if !(s > T::zero()) {
        return domain("scale must be positive");
    }
    let order = profile.order;
    let betas: Vec<[u32; 2]> = (0..=order.r)
        .flat_map(|total| (0..=total).map(move |b1| [b1, total - b1]))
        .collect();
    let n = lattice.axis_len();
    let h = T::lit(FD_STEP);
    let rows: Vec<(T, [T; 2], [u32; 2])> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = (T::zero(), [T::zero(); 2], [0, 0]);
            for j in 0..n {
                let xi = [lattice.coord(i), lattice.coord(j)];
                let bound = molecule_bound(&order, s, alpha, xi);
                for &beta in &betas {
                    let d = central_difference(profile, xi, beta, h).abs();
                    let ratio = if d == T::zero() { T::zero() } else { d / bound };
                    if ratio > best.0 || ratio.is_nan() {
                        best = (if ratio.is_nan() { T::infinity() } else { ratio }, xi, beta);
                    }
                }
            }
            best
        })
        .collect();
    let (margin, argmax, beta) = rows
        .into_iter()
        .fold((T::zero(), [T::zero(); 2], [0, 0]), |acc, r| if r.0 > acc.0 { r } else { acc });
    Ok(ConditionReport {
        margin,
        argmax,
        beta,
        holds: margin.is_finite() && margin <= cap,
    })
}

/// Amplitude window shared by every molecule with the same scale and orientation.
#[derive(Clone, Debug)]
struct ClassAmplitude<T> {
    /// Lattice index ranges along `ξ₁` and `ξ₂`.
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
    /// Row-major over the window.
    values: Vec<T>,
}

impl<T: Real> ClassAmplitude<T> {
    fn at(&self, i: usize, j: usize) -> T {
        self.values[(i - self.rows.start) * self.cols.len() + (j - self.cols.start)]
    }
}

/// Molecules for every index of a grid, sampled on one lattice.
#[derive(Debug)]
pub struct MoleculeSystem<T> {
    grid: Arc<IndexGrid<T>>,
    alpha: Alpha<T>,
    profile: MoleculeProfile<T>,
    lattice: FrequencyLattice<T>,
    classes: Vec<ClassAmplitude<T>>,
    class_of: Vec<usize>,
}

impl<T: Real> MoleculeSystem<T> {
    pub fn new(
        grid: Arc<IndexGrid<T>>,
        alpha: Alpha<T>,
        profile: MoleculeProfile<T>,
        lattice: FrequencyLattice<T>,
    ) -> Result<Self> {
        if grid.len() > MAX_MOLECULES {
            return Err(Error::Size {
                requested: grid.len(),
                cap: MAX_MOLECULES,
            });
        }
        lattice.validate()?;
        let mut keys: Vec<(i32, i32)> = Vec::new();
        let mut class_of = Vec::with_capacity(grid.len());
        let mut reps = Vec::new();
        for (o, idx) in grid.indices().iter().enumerate() {
            let key = (idx.j, idx.l);
            let c = match keys.iter().position(|k| *k == key) {
                Some(c) => c,
                None => {
                    keys.push(key);
                    reps.push(o);
                    keys.len() - 1
                }
            };
            class_of.push(c);
        }
        let classes = reps
            .par_iter()
            .map(|&o| {
                let p = grid.points()[o];
                class_window(&profile, alpha, p.scale(), p.theta(), &lattice)
            })
            .collect();
        Ok(Self {
            grid,
            alpha,
            profile,
            lattice,
            classes,
            class_of,
        })
    }

    pub fn grid(&self) -> &Arc<IndexGrid<T>> {
        &self.grid
    }

    pub fn lattice(&self) -> &FrequencyLattice<T> {
        &self.lattice
    }

    pub fn profile(&self) -> &MoleculeProfile<T> {
        &self.profile
    }

    pub fn len(&self) -> usize {
        self.class_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_of.is_empty()
    }

    /// Full lattice samples of molecule `o`.
    pub fn samples(&self, o: usize) -> Result<MoleculeSamples<T>> {
        synthesize_molecule(&self.grid.points()[o], self.alpha, &self.profile, &self.lattice)
    }

    /// Writes `ordinal,j,l,k1,k2,s,theta,x1,x2,l2_norm_sq`.
    pub fn write_metadata_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["ordinal", "j", "l", "k1", "k2", "s", "theta", "x1", "x2", "l2_norm_sq"])?;
        let h2 = self.lattice.cell_area();
        for (o, (idx, p)) in self.grid.indices().iter().zip(self.grid.points()).enumerate() {
            let class = &self.classes[self.class_of[o]];
            let norm = class.values.iter().map(|&a| a * a).sum::<T>() * h2;
            let x = p.location();
            w.write_record([
                o.to_string(),
                idx.j.to_string(),
                idx.l.to_string(),
                idx.k[0].to_string(),
                idx.k[1].to_string(),
                p.scale().as_f64().to_string(),
                p.theta().as_f64().to_string(),
                x[0].as_f64().to_string(),
                x[1].as_f64().to_string(),
                norm.as_f64().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn class_window<T: Real>(
    profile: &MoleculeProfile<T>,
    alpha: Alpha<T>,
    s: T,
    theta: T,
    lattice: &FrequencyLattice<T>,
) -> ClassAmplitude<T> {
    let n = lattice.axis_len();
    let full: Vec<T> = (0..n * n)
        .map(|ij| molecule_amplitude(profile, alpha, s, theta, [lattice.coord(ij / n), lattice.coord(ij % n)]))
        .collect();
    let peak = full.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let cut = peak * T::lit(CROP_FRACTION);
    let (mut r0, mut r1, mut c0, mut c1) = (n, 0, n, 0);
    for i in 0..n {
        for j in 0..n {
            if full[i * n + j].abs() > cut {
                r0 = r0.min(i);
                r1 = r1.max(i + 1);
                c0 = c0.min(j);
                c1 = c1.max(j + 1);
            }
        }
    }
    if r0 >= r1 {
        return ClassAmplitude {
            rows: 0..0,
            cols: 0..0,
            values: Vec::new(),
        };
    }
    let values = (r0..r1)
        .flat_map(|i| full[i * n + c0..i * n + c1].to_vec())
        .collect();
    ClassAmplitude {
        rows: r0..r1,
        cols: c0..c1,
        values,
    }
}

fn intersect(a: &std::ops::Range<usize>, b: &std::ops::Range<usize>) -> std::ops::Range<usize> {
    a.start.max(b.start)..a.end.min(b.end).max(a.start.max(b.start))
}

/// `G_{λλ'} = Σ_ξ m̂_λ(ξ) conj(m̂_{λ'}(ξ)) h²` on the shared lattice.
///
/// Amplitudes are real and the lattice is symmetric, so each entry reduces to
/// `Σ r_λ r_{λ'} cos⟨x_λ − x_{λ'}, ξ⟩ h²`. The amplitude product is formed once
/// per pair of (scale, orientation) classes, the phase separates over the two
/// axes, and every entry is accumulated in fixed lattice order.
pub fn gram_matrix<T: Real>(system: &MoleculeSystem<T>) -> Result<LocalizedMatrix<T>> {
    let n = system.len();
    let lat = &system.lattice;
    let points = system.grid.points();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); system.classes.len()];
    for (o, &c) in system.class_of.iter().enumerate() {
        members[c].push(o);
    }
    let class_pairs: Vec<(usize, usize)> = (0..members.len())
        .flat_map(|c| (c..members.len()).map(move |d| (c, d)))
        .collect();
    let blocks: Vec<Vec<(usize, usize, T)>> = class_pairs
        .par_iter()
        .map(|&(c, d)| {
            let (cc, cd) = (&system.classes[c], &system.classes[d]);
            let rows = intersect(&cc.rows, &cd.rows);
            let cols = intersect(&cc.cols, &cd.cols);
            let pairs = members[c]
                .iter()
                .flat_map(|&i| members[d].iter().map(move |&j| (i.min(j), i.max(j))))
                .filter(|&(i, j)| c != d || i <= j);
            if rows.is_empty() || cols.is_empty() {
                return pairs.map(|(i, j)| (i, j, T::zero())).collect();
            }
            let width = cols.len();
            let mut product = Vec::with_capacity(rows.len() * width);
            for a in rows.clone() {
                for b in cols.clone() {
                    product.push(cc.at(a, b) * cd.at(a, b));
                }
            }
            let xi1: Vec<T> = rows.clone().map(|a| lat.coord(a)).collect();
            let xi2: Vec<T> = cols.clone().map(|b| lat.coord(b)).collect();
            let h2 = lat.cell_area();
            pairs
                .map(|(i, j)| {
                    let (xi, xj) = (points[i].location(), points[j].location());
                    let dx = [xi[0] - xj[0], xi[1] - xj[1]];
                    let (v_re, v_im): (Vec<T>, Vec<T>) = xi2
                        .iter()
                        .map(|&w| {
                            let (sin, cos) = (dx[1] * w).sin_cos();
                            (cos, -sin)
                        })
                        .unzip();
                    let mut acc = T::zero();
                    for (row, &w) in product.chunks_exact(width).zip(&xi1) {
                        let (mut re, mut im) = (T::zero(), T::zero());
                        for ((&p, &vr), &vi) in row.iter().zip(&v_re).zip(&v_im) {
                            re = re + p * vr;
                            im = im + p * vi;
                        }
                        let (sin, cos) = (dx[0] * w).sin_cos();
                        acc = acc + cos * re + sin * im;
                    }
                    (i, j, acc * h2)
                })
                .collect()
        })
        .collect();
    let mut g = DenseMatrix::zeros(n, n);
    for (i, j, v) in blocks.into_iter().flatten() {
        g[(i, j)] = v;
    }
    g.mirror_upper();
    LocalizedMatrix::new(system.grid.clone(), g)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport<T> {
    /// `‖G‖_{B_N}` on the finite grid.
    pub constant: T,
    pub exponent: T,
    pub r2: T,
    pub holds: bool,
}

/// `‖G‖_{B_N}` plus a decay fit over interior pairs; holds when the constant is
/// finite and the fitted exponent reaches `N`.
pub fn localization_check<T: Real>(
    g: &LocalizedMatrix<T>,
    alpha: Alpha<T>,
    n: T,
    interior: &[usize],
) -> Result<LocalizationReport<T>> {
    let constant = bn_norm(g, alpha, n)?.value;
    let off_diagonal_zero = (0..g.dim()).all(|i| (0..g.dim()).all(|j| i == j || g.entries()[(i, j)] == T::zero()));
    if off_diagonal_zero {
        return Ok(LocalizationReport {
            constant,
            exponent: T::infinity(),
            r2: T::one(),
            holds: constant.is_finite(),
        });
    }
    let fit = decay_exponent_fit(g, alpha, interior)?;
    Ok(LocalizationReport {
        constant,
        exponent: fit.exponent,
        r2: fit.r2,
        holds: constant.is_finite() && fit.exponent >= n - bound_slack::<T>() * n.max(T::one()),
    })
}

/// Target spectrum `[a, b]` and off-diagonal amplitude of a synthetic matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct GapSpec<T> {
    pub target_a: T,
    pub target_b: T,
    pub epsilon: T,
}

impl<T: Real> GapSpec<T> {
    pub fn new(target_a: T, target_b: T, epsilon: T) -> Result<Self> {
        if !(target_a > T::zero() && target_b >= target_a && epsilon >= T::zero()) {
            return domain("gap needs 0 < a <= b and epsilon >= 0");
        }
        Ok(Self {
            target_a,
            target_b,
            epsilon,
        })
    }
}

/// `max_λ Σ_{λ'≠λ} max(ω(λ,λ'), ω(λ',λ))^{-decay}`, the Gershgorin radius of
/// the unit-amplitude off-diagonal pattern.
pub fn gershgorin_radius<T: Real>(grid: &IndexGrid<T>, alpha: Alpha<T>, decay: T) -> T {
    let dist = grid.distance(alpha);
    let n = grid.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| dist.omega(i, j).max(dist.omega(j, i)).powf(-decay))
                .sum::<T>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(T::zero(), T::max)
}

/// Largest `ε` keeping the Gershgorin discs of [`synth_localized_dd`] inside `[a, b]`.
pub fn max_feasible_epsilon<T: Real>(grid: &IndexGrid<T>, alpha: Alpha<T>, decay: T, a: T, b: T) -> T {
    let r = gershgorin_radius(grid, alpha, decay);
    if r == T::zero() {
        T::infinity()
    } else {
        (b - a) / (T::lit(2.0) * r)
    }
}

/// `A = D + E`, symmetric, with `|E_{λλ'}| = ε max(ω(λ,λ'), ω(λ',λ))^{-decay}`
/// under seeded random signs and `D` uniform in `[a + εR, b − εR]`, where `R`
/// is the Gershgorin radius. The spectrum therefore lies in `[a, b]`.
pub fn synth_localized_dd<T: Real>(
    grid: Arc<IndexGrid<T>>,
    alpha: Alpha<T>,
    decay: T,
    gap: &GapSpec<T>,
    seed: u64,
) -> Result<LocalizedMatrix<T>> {
    if !(decay >= T::lit(2.0)) {
        return domain(format!("decay must be >= 2, got {decay}"));
    }
    GapSpec::new(gap.target_a, gap.target_b, gap.epsilon)?;
    let radius = gap.epsilon * gershgorin_radius(&grid, alpha, decay);
    let lo = gap.target_a + radius;
    let hi = gap.target_b - radius;
    if lo > hi {
        return domain(format!(
            "gap [{}, {}] is infeasible: epsilon times the Gershgorin radius is {radius}",
            gap.target_a, gap.target_b
        ));
    }
    let dist = grid.distance(alpha);
    let n = grid.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = lo + (hi - lo) * T::lit(rng.gen::<f64>());
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let sign = if rng.gen::<bool>() { T::one() } else { -T::one() };
            let v = sign * gap.epsilon * dist.omega(i, j).max(dist.omega(j, i)).powf(-decay);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    LocalizedMatrix::new(grid, m)
}

#[derive(Clone, Debug)]
pub struct RankDeficient<T> {
    pub matrix: LocalizedMatrix<T>,
    /// `‖A‖_{B_decay}` after the projection.
    pub bn_norm: T,
}

/// [`synth_localized_dd`] with its `kernel_dim` smallest eigenpairs removed.
pub fn synth_rank_deficient<T: Real>(
    grid: Arc<IndexGrid<T>>,
    alpha: Alpha<T>,
    decay: T,
    gap: &GapSpec<T>,
    kernel_dim: usize,
    seed: u64,
) -> Result<RankDeficient<T>> {
    if kernel_dim >= grid.len() {
        return domain(format!("kernel dimension {kernel_dim} must be below {}", grid.len()));
    }
    let base = synth_localized_dd(grid, alpha, decay, gap, seed)?;
    let matrix = if kernel_dim == 0 {
        base
    } else {
        let spec = symmetric_eigendecomposition(&base)?;
        let v = spec.eigenvectors();
        let n = base.dim();
        let mut m = base.entries().clone();
        for k in 0..kernel_dim {
            let lambda = spec.eigenvalues()[k];
            for i in 0..n {
                let vi = lambda * v[(i, k)];
                for j in i..n {
                    m[(i, j)] = m[(i, j)] - vi * v[(j, k)];
                }
            }
        }
        m.mirror_upper();
        base.with_entries(m)?
    };
    let bn = bn_norm(&matrix, alpha, decay)?.value;
    Ok(RankDeficient { matrix, bn_norm: bn })
}
