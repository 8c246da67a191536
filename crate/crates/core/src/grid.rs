//! Truncated curvelet- and shearlet-type index sets and their maps into phase space.

use std::collections::HashSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{domain, Error, Result};
use crate::phase::{Alpha, AlphaDistance, PhasePoint};
use crate::scalar::Real;

/// Default cap on the number of indices a grid builder will enumerate.
pub const DEFAULT_INDEX_CAP: usize = 250_000;

pub type Mat2<T> = [[T; 2]; 2];

/// `D_s = diag(s, s^α)`.
pub fn dilation_matrix<T: Real>(s: T, alpha: Alpha<T>) -> Mat2<T> {
    [[s, T::zero()], [T::zero(), s.powf(alpha.value())]]
}

/// Counter-clockwise rotation by `theta`.
pub fn rotation_matrix<T: Real>(theta: T) -> Mat2<T> {
    let (sin, cos) = theta.sin_cos();
    [[cos, -sin], [sin, cos]]
}

/// `S_t = [[1, t], [0, 1]]`.
pub fn shear_matrix<T: Real>(t: T) -> Mat2<T> {
    [[T::one(), t], [T::zero(), T::one()]]
}

pub fn mat2_mul<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    let mut out = [[T::zero(); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat2_apply<T: Real>(a: &Mat2<T>, v: [T; 2]) -> [T; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

pub fn mat2_det<T: Real>(a: &Mat2<T>) -> T {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// Parameters of a truncated α-curvelet index set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct CurveletGridSpec<T> {
    pub alpha: Alpha<T>,
    /// Scale base `g > 1`.
    pub g: T,
    /// Location step `τ > 0`.
    pub tau: T,
    /// `γ_j = gamma_coeff · g^{-j(1-α)}`.
    #[serde(default = "one")]
    pub gamma_coeff: T,
    /// `L_j = floor(angular_count_coeff · g^{j(1-α)})`.
    #[serde(default = "one")]
    pub angular_count_coeff: T,
    pub j_max: u32,
    /// Spatial truncation `‖k‖_∞ ≤ k_box`.
    pub k_box: u32,
}

/// Parameters of a truncated α-shearlet index set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct ShearletGridSpec<T> {
    pub alpha: Alpha<T>,
    pub g: T,
    pub tau: T,
    /// `η_j = eta_coeff · g^{-j(1-α)}`.
    #[serde(default = "one")]
    pub eta_coeff: T,
    /// `L_j = floor(angular_count_coeff · g^{j(1-α)})`; the default `1/eta_coeff`
    /// keeps `sup_j L_j η_j ≤ 1`.
    #[serde(default)]
    pub angular_count_coeff: Option<T>,
    #[serde(default)]
    pub j_min: i32,
    pub j_max: i32,
    pub k_box: u32,
}

fn one<T: Real>() -> T {
    T::one()
}

impl<T: Real> CurveletGridSpec<T> {
    pub fn new(alpha: Alpha<T>, g: T, tau: T, j_max: u32, k_box: u32) -> Self {
        Self {
            alpha,
            g,
            tau,
            gamma_coeff: T::one(),
            angular_count_coeff: T::one(),
            j_max,
            k_box,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_common(self.g, self.tau)?;
        if !(self.gamma_coeff > T::zero() && self.gamma_coeff.is_finite()) {
            return domain("gamma_coeff must be positive");
        }
        if !(self.angular_count_coeff >= T::zero() && self.angular_count_coeff.is_finite()) {
            return domain("angular_count_coeff must be nonnegative");
        }
        Ok(())
    }

    /// Angular step `γ_j`.
    pub fn gamma(&self, j: i32) -> T {
        self.gamma_coeff * self.g.powf(-T::from_i32(j).unwrap() * (T::one() - self.alpha.value()))
    }

    pub fn angular_count(&self, j: i32) -> i32 {
        angular_count(self.angular_count_coeff, self.g, self.alpha, j)
    }
}

impl<T: Real> ShearletGridSpec<T> {
    pub fn new(alpha: Alpha<T>, g: T, tau: T, j_min: i32, j_max: i32, k_box: u32) -> Self {
        Self {
            alpha,
            g,
            tau,
            eta_coeff: T::one(),
            angular_count_coeff: None,
            j_min,
            j_max,
            k_box,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_common(self.g, self.tau)?;
        if !(self.eta_coeff > T::zero() && self.eta_coeff.is_finite()) {
            return domain("eta_coeff must be positive");
        }
        if let Some(c) = self.angular_count_coeff {
            if !(c >= T::zero() && c.is_finite()) {
                return domain("angular_count_coeff must be nonnegative");
            }
        }
        if self.j_min > self.j_max {
            return domain("j_min must not exceed j_max");
        }
        Ok(())
    }

    /// Slope step `η_j`.
    pub fn eta(&self, j: i32) -> T {
        self.eta_coeff * self.g.powf(-T::from_i32(j).unwrap() * (T::one() - self.alpha.value()))
    }

    pub fn count_coeff(&self) -> T {
        self.angular_count_coeff.unwrap_or_else(|| self.eta_coeff.recip())
    }

    pub fn angular_count(&self, j: i32) -> i32 {
        angular_count(self.count_coeff(), self.g, self.alpha, j)
    }
}

fn check_common<T: Real>(g: T, tau: T) -> Result<()> {
    if !(g > T::one() && g.is_finite()) {
        return domain(format!("scale base g must exceed 1, got {g}"));
    }
    if !(tau > T::zero() && tau.is_finite()) {
        return domain(format!("location step tau must be positive, got {tau}"));
    }
    Ok(())
}

fn angular_count<T: Real>(coeff: T, g: T, alpha: Alpha<T>, j: i32) -> i32 {
    let raw = coeff * g.powf(T::from_i32(j).unwrap() * (T::one() - alpha.value()));
    // Tolerate rounding just below an integer, e.g. 2^{0.5·2} = 1.9999999999999998.
    let nudged = raw * (T::one() + T::epsilon() * T::lit(8.0));
    nudged.floor().to_i32().unwrap_or(i32::MAX)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub enum GridSpec<T> {
    Curvelet(CurveletGridSpec<T>),
    Shearlet(ShearletGridSpec<T>),
}

impl<T: Real> GridSpec<T> {
    pub fn alpha(&self) -> Alpha<T> {
        match self {
            GridSpec::Curvelet(s) => s.alpha,
            GridSpec::Shearlet(s) => s.alpha,
        }
    }

    pub fn kind(&self) -> GridKind {
        match self {
            GridSpec::Curvelet(_) => GridKind::Curvelet,
            GridSpec::Shearlet(_) => GridKind::Shearlet,
        }
    }

    pub fn j_range(&self) -> (i32, i32) {
        match self {
            GridSpec::Curvelet(s) => (0, s.j_max as i32),
            GridSpec::Shearlet(s) => (s.j_min, s.j_max),
        }
    }

    pub fn k_box(&self) -> u32 {
        match self {
            GridSpec::Curvelet(s) => s.k_box,
            GridSpec::Shearlet(s) => s.k_box,
        }
    }

    /// The same family truncated to a smaller window.
    pub fn truncated(&self, j_max: i32, k_box: u32) -> Self {
        match *self {
            GridSpec::Curvelet(s) => GridSpec::Curvelet(CurveletGridSpec {
                j_max: j_max.max(0) as u32,
                k_box,
                ..s
            }),
            GridSpec::Shearlet(s) => GridSpec::Shearlet(ShearletGridSpec { j_max, k_box, ..s }),
        }
    }

    pub fn build(&self) -> Result<IndexGrid<T>> {
        match self {
            GridSpec::Curvelet(s) => build_curvelet_grid(s),
            GridSpec::Shearlet(s) => build_shearlet_grid(s),
        }
    }

    /// Closed-form separation constant of the full (untruncated) family.
    pub fn separation_formula(&self) -> T {
        self.separation_terms().iter().fold(T::infinity(), |m, t| m.min(t.value))
    }

    /// The four candidates of the closed-form separation constant, flagged by
    /// whether a finite truncation contains a pair realizing them exactly.
    fn separation_terms(&self) -> [SeparationTerm<T>; 4] {
        let (j_lo, j_hi) = self.j_range();
        match self {
            GridSpec::Curvelet(s) => {
                let (c, c_attained) = (j_lo..=j_hi)
                    .map(|j| {
                        let realized = s.gamma(j) * s.g.powf(T::from_i32(j).unwrap() * (T::one() - s.alpha.value()));
                        (realized, s.angular_count(j) >= 1)
                    })
                    .fold((T::infinity(), false), |acc, (c, has_pair)| {
                        if c < acc.0 {
                            (c, has_pair)
                        } else {
                            acc
                        }
                    });
                [
                    SeparationTerm::new(s.g, j_hi > j_lo),
                    SeparationTerm::new(T::one() + c * c, c_attained),
                    SeparationTerm::new(T::one() + s.tau * s.tau, s.k_box >= 1),
                    SeparationTerm::new(T::one() + s.tau, false),
                ]
            }
            GridSpec::Shearlet(s) => {
                let c = (j_lo..=j_hi)
                    .map(|j| s.eta(j) * s.g.powf(T::from_i32(j).unwrap() * (T::one() - s.alpha.value())))
                    .fold(T::infinity(), T::min);
                let big_c = (j_lo..=j_hi)
                    .map(|j| T::from_i32(s.angular_count(j)).unwrap() * s.eta(j))
                    .fold(T::zero(), T::max);
                let damp = T::one() + big_c * big_c;
                [
                    SeparationTerm::new(s.g, j_hi > j_lo),
                    SeparationTerm::new(T::one() + c * c / (damp * damp), false),
                    SeparationTerm::new(T::one() + s.tau * s.tau, s.k_box >= 1),
                    SeparationTerm::new(T::one() + s.tau / damp.sqrt(), false),
                ]
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct SeparationTerm<T> {
    value: T,
    attained: bool,
}

impl<T> SeparationTerm<T> {
    fn new(value: T, attained: bool) -> Self {
        Self { value, attained }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Curvelet,
    Shearlet,
}

/// Discrete index `(j, l, k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridIndex {
    pub j: i32,
    pub l: i32,
    pub k: [i32; 2],
}

/// A finite, lexicographically ordered index set with its phase-space image.
#[derive(Clone, Debug)]
pub struct IndexGrid<T> {
    spec: GridSpec<T>,
    indices: Vec<GridIndex>,
    points: Vec<PhasePoint<T>>,
    fingerprint: String,
}

impl<T: Real> IndexGrid<T> {
    fn assemble(spec: GridSpec<T>, indices: Vec<GridIndex>, points: Vec<PhasePoint<T>>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(points.len());
        for (idx, p) in indices.iter().zip(&points) {
            let key = [p.scale(), p.theta(), p.location()[0], p.location()[1]].map(|v| v.as_f64().to_bits());
            if !seen.insert(key) {
                return domain(format!("parametrization is not injective: {idx:?} collides with another index"));
            }
        }
        let fingerprint = fingerprint(&indices, &points);
        Ok(Self {
            spec,
            indices,
            points,
            fingerprint,
        })
    }

    pub fn spec(&self) -> &GridSpec<T> {
        &self.spec
    }

    pub fn kind(&self) -> GridKind {
        self.spec.kind()
    }

    pub fn alpha(&self) -> Alpha<T> {
        self.spec.alpha()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[GridIndex] {
        &self.indices
    }

    pub fn points(&self) -> &[PhasePoint<T>] {
        &self.points
    }

    /// Hex digest of the ordered indices and their points.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn position(&self, index: &GridIndex) -> Option<usize> {
        self.indices.binary_search(index).ok()
    }

    /// `ω_α` on this grid's points.
    pub fn distance(&self, alpha: Alpha<T>) -> AlphaDistance<T> {
        AlphaDistance::new(alpha, &self.points)
    }

    /// The sub-grid at the given ordinals (kept in grid order).
    pub fn subset(&self, ordinals: &[usize]) -> Result<Self> {
        let mut ords = ordinals.to_vec();
        ords.sort_unstable();
        ords.dedup();
        if ords.last().is_some_and(|&o| o >= self.len()) {
            return domain("ordinal out of range");
        }
        Self::assemble(
            self.spec,
            ords.iter().map(|&o| self.indices[o]).collect(),
            ords.iter().map(|&o| self.points[o]).collect(),
        )
    }

    /// Ordinals with `j ≤ j_max` and `‖k‖_∞ ≤ k_box`.
    pub fn window(&self, j_max: i32, k_box: u32) -> Vec<usize> {
        self.ordinals_where(|idx| idx.j <= j_max && linf(idx.k) <= k_box as i32)
    }

    pub fn ordinals_where(&self, pred: impl Fn(&GridIndex) -> bool) -> Vec<usize> {
        self.indices
            .iter()
            .enumerate()
            .filter(|(_, idx)| pred(idx))
            .map(|(o, _)| o)
            .collect()
    }

    /// Ordinals at least one layer away from the truncation boundary in both
    /// scale and space.
    pub fn interior(&self) -> Vec<usize> {
        let (j_lo, j_hi) = self.spec.j_range();
        let k_box = self.spec.k_box() as i32;
        self.ordinals_where(|idx| idx.j > j_lo && idx.j < j_hi && linf(idx.k) < k_box)
    }

    /// Writes `ordinal,j,l,k1,k2,s,theta,x1,x2` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["ordinal", "j", "l", "k1", "k2", "s", "theta", "x1", "x2"])?;
        for (o, (idx, p)) in self.indices.iter().zip(&self.points).enumerate() {
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
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[inline]
fn linf(k: [i32; 2]) -> i32 {
    k[0].abs().max(k[1].abs())
}

fn fingerprint<T: Real>(indices: &[GridIndex], points: &[PhasePoint<T>]) -> String {
    let mut h = Sha256::new();
    for (idx, p) in indices.iter().zip(points) {
        for v in [idx.j, idx.l, idx.k[0], idx.k[1]] {
            h.update(v.to_le_bytes());
        }
        for v in [p.scale(), p.theta(), p.location()[0], p.location()[1]] {
            h.update(v.as_f64().to_le_bytes());
        }
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn enumerate<T: Real>(
    j_range: (i32, i32),
    k_box: u32,
    angular_count: impl Fn(i32) -> i32,
    cap: usize,
    mut phi: impl FnMut(GridIndex) -> Result<PhasePoint<T>>,
) -> Result<(Vec<GridIndex>, Vec<PhasePoint<T>>)> {
    let side = 2 * k_box as usize + 1;
    let requested = (j_range.0..=j_range.1)
        .map(|j| (2 * angular_count(j).max(0) as usize + 1).saturating_mul(side * side))
        .fold(0usize, usize::saturating_add);
    if requested > cap {
        return Err(Error::Size { requested, cap });
    }
    let kb = k_box as i32;
    let mut indices = Vec::with_capacity(requested);
    let mut points = Vec::with_capacity(requested);
    for j in j_range.0..=j_range.1 {
        let lj = angular_count(j).max(0);
        for l in -lj..=lj {
            for k1 in -kb..=kb {
                for k2 in -kb..=kb {
                    let idx = GridIndex { j, l, k: [k1, k2] };
                    points.push(phi(idx)?);
                    indices.push(idx);
                }
            }
        }
    }
    Ok((indices, points))
}

pub fn build_curvelet_grid<T: Real>(spec: &CurveletGridSpec<T>) -> Result<IndexGrid<T>> {
    build_curvelet_grid_capped(spec, DEFAULT_INDEX_CAP)
}

/// `Φ(j, l, k) = (g^j, l γ_j, R_θ^{-1} D_s^{-1} τ k)`.
pub fn build_curvelet_grid_capped<T: Real>(spec: &CurveletGridSpec<T>, cap: usize) -> Result<IndexGrid<T>> {
    spec.validate()?;
    let (indices, points) = enumerate(
        (0, spec.j_max as i32),
        spec.k_box,
        |j| spec.angular_count(j),
        cap,
        |idx| {
            let s = spec.g.powi(idx.j);
            let theta = T::from_i32(idx.l).unwrap() * spec.gamma(idx.j);
            let d = dilation_matrix(s, spec.alpha);
            let scaled = [
                spec.tau * T::from_i32(idx.k[0]).unwrap() / d[0][0],
                spec.tau * T::from_i32(idx.k[1]).unwrap() / d[1][1],
            ];
            let x = mat2_apply(&rotation_matrix(-theta), scaled);
            PhasePoint::new(s, theta, x)
        },
    )?;
    IndexGrid::assemble(GridSpec::Curvelet(*spec), indices, points)
}

pub fn build_shearlet_grid<T: Real>(spec: &ShearletGridSpec<T>) -> Result<IndexGrid<T>> {
    build_shearlet_grid_capped(spec, DEFAULT_INDEX_CAP)
}

/// `Φ(j, l, k) = (g^j, arctan(l η_j), S_{l η_j}^{-1} D_s^{-1} τ k)`.
pub fn build_shearlet_grid_capped<T: Real>(spec: &ShearletGridSpec<T>, cap: usize) -> Result<IndexGrid<T>> {
    spec.validate()?;
    let (indices, points) = enumerate(
        (spec.j_min, spec.j_max),
        spec.k_box,
        |j| spec.angular_count(j),
        cap,
        |idx| {
            let s = spec.g.powi(idx.j);
            let slope = T::from_i32(idx.l).unwrap() * spec.eta(idx.j);
            let d = dilation_matrix(s, spec.alpha);
            let scaled = [
                spec.tau * T::from_i32(idx.k[0]).unwrap() / d[0][0],
                spec.tau * T::from_i32(idx.k[1]).unwrap() / d[1][1],
            ];
            let x = mat2_apply(&shear_matrix(-slope), scaled);
            PhasePoint::new(s, slope.atan(), x)
        },
    )?;
    IndexGrid::assemble(GridSpec::Shearlet(*spec), indices, points)
}

/// `min{g, 1+c², 1+τ², 1+τ}`.
pub fn separation_formula_curvelet<T: Real>(g: T, tau: T, c: T) -> T {
    g.min(T::one() + c * c).min(T::one() + tau * tau).min(T::one() + tau)
}

/// `min{g, 1+c²(1+C²)^{-2}, 1+τ², 1+τ(1+C²)^{-1/2}}`.
pub fn separation_formula_shearlet<T: Real>(g: T, tau: T, c: T, big_c: T) -> T {
    let damp = T::one() + big_c * big_c;
    g.min(T::one() + c * c / (damp * damp))
        .min(T::one() + tau * tau)
        .min(T::one() + tau / damp.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport<T> {
    /// Closed-form separation constant of the untruncated family.
    pub formula_value: T,
    /// `min_{λ≠λ'} ω(λ, λ')` over the truncation.
    pub measured_min: T,
    pub argmin_pair: (usize, usize),
    /// Whether the truncation contains a pair that realizes the closed form
    /// exactly, so that the measured minimum should equal it.
    pub formula_attained: bool,
}

/// Exhaustive minimum of `ω_α` over distinct ordered pairs.
///
/// Indices are ordered by scale, so each row scans its own scale block first
/// and then skips whole blocks whose scale ratio alone already exceeds the
/// running minimum (`ω ≥ M`). Ties resolve to the smallest ordinal pair.
pub fn measured_separation<T: Real>(grid: &IndexGrid<T>, alpha: Alpha<T>) -> Result<SeparationReport<T>> {
    if grid.len() < 2 {
        return domain("separation needs at least two indices");
    }
    if alpha != grid.alpha() {
        return domain("the closed-form separation constant only applies to the grid's own alpha");
    }
    let dist = grid.distance(alpha);
    let blocks = scale_blocks(grid);
    let block_of: Vec<usize> = blocks
        .iter()
        .enumerate()
        .flat_map(|(b, r)| std::iter::repeat(b).take(r.len()))
        .collect();
    let (measured_min, argmin_pair) = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let own = block_of[i];
            let mut best = (T::infinity(), usize::MAX);
            let consider = |j: usize, best: &mut (T, usize)| {
                if j == i {
                    return;
                }
                let w = dist.omega(i, j);
                if w < best.0 || (w == best.0 && j < best.1) {
                    *best = (w, j);
                }
            };
            for j in blocks[own].clone() {
                consider(j, &mut best);
            }
            for (b, range) in blocks.iter().enumerate() {
                if b == own || range.is_empty() || dist.scale_ratio(i, range.start) > best.0 {
                    continue;
                }
                for j in range.clone() {
                    consider(j, &mut best);
                }
            }
            (best.0, (i, best.1))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((T::infinity(), (0, 0)), |acc, cand| if cand.0 < acc.0 { cand } else { acc });
    let terms = grid.spec().separation_terms();
    let formula_value = grid.spec().separation_formula();
    let tie = T::lit(1e-12) * formula_value;
    let formula_attained = terms
        .iter()
        .any(|t| t.attained && (t.value - formula_value).abs() <= tie);
    Ok(SeparationReport {
        formula_value,
        measured_min,
        argmin_pair,
        formula_attained,
    })
}

fn scale_blocks<T: Real>(grid: &IndexGrid<T>) -> Vec<std::ops::Range<usize>> {
    let mut blocks: Vec<std::ops::Range<usize>> = Vec::new();
    for (o, idx) in grid.indices().iter().enumerate() {
        match blocks.last_mut() {
            Some(r) if grid.indices()[r.start].j == idx.j => r.end = o + 1,
            _ => blocks.push(o..o + 1),
        }
    }
    blocks
}

/// `ω^{-K}`.
#[inline]
pub fn decay_weight<T: Real>(w: T, k: T) -> T {
    if k == T::lit(2.0) {
        (w * w).recip()
    } else {
        w.powf(-k)
    }
}

/// `Σ_{λ'} ω_α(center, λ')^{-K}` over the grid.
pub fn admissibility_sum<T: Real>(grid: &IndexGrid<T>, alpha: Alpha<T>, k: T, center: usize) -> Result<T> {
    check_order(k)?;
    if center >= grid.len() {
        return domain(format!("center {center} is not in a grid of {} indices", grid.len()));
    }
    let dist = grid.distance(alpha);
    Ok(row_sum(&dist, k, center))
}

fn check_order<T: Real>(k: T) -> Result<()> {
    if !(k >= T::one() && k.is_finite()) {
        return domain(format!("admissibility order must be >= 1, got {k}"));
    }
    Ok(())
}

fn row_sum<T: Real>(dist: &AlphaDistance<T>, k: T, i: usize) -> T {
    (0..dist.len()).map(|j| decay_weight(dist.omega(i, j), k)).sum()
}

fn max_row_sum<T: Real>(dist: &AlphaDistance<T>, k: T, centers: &[usize]) -> T {
    centers
        .par_iter()
        .map(|&i| row_sum(dist, k, i))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(T::zero(), T::max)
}

/// `sup_λ Σ_{λ'} ω(λ, λ')^{-K}` over every center of the grid.
pub fn admissibility_sup<T: Real>(grid: &IndexGrid<T>, alpha: Alpha<T>, k: T) -> Result<T> {
    check_order(k)?;
    let dist = grid.distance(alpha);
    let centers: Vec<usize> = (0..grid.len()).collect();
    Ok(max_row_sum(&dist, k, &centers))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityEstimate<T> {
    pub c_omega_hat: T,
    /// `(ĉ(T) - ĉ(T')) / ĉ(T')` for the next smaller nested truncation `T'`.
    pub tail_increment: T,
}

/// Interior centers used for the sup: scale index at most `j_max - 1` and
/// `‖k‖_∞ ≤ k_box / 2`.
fn admissibility_centers<T: Real>(grid: &IndexGrid<T>) -> Vec<usize> {
    let (_, j_hi) = grid.spec().j_range();
    grid.window(j_hi - 1, grid.spec().k_box() / 2)
}

/// Max of [`admissibility_sum`] over interior centers, plus the relative
/// growth from the truncation with one scale fewer and half the spatial box.
pub fn c_omega_estimate<T: Real>(grid: &IndexGrid<T>, alpha: Alpha<T>, k: T) -> Result<AdmissibilityEstimate<T>> {
    check_order(k)?;
    if grid.len() == 1 {
        return Ok(AdmissibilityEstimate {
            c_omega_hat: T::one(),
            tail_increment: T::zero(),
        });
    }
    let (j_lo, j_hi) = grid.spec().j_range();
    if j_hi - j_lo < 2 || grid.spec().k_box() < 2 {
        return domain("grid too small for nested truncations: need at least three scales and k_box >= 2");
    }
    let full = interior_sup(grid, alpha, k)?;
    let inner = grid.subset(&grid.window(j_hi - 1, grid.spec().k_box() / 2))?;
    let inner = IndexGrid {
        spec: grid.spec().truncated(j_hi - 1, grid.spec().k_box() / 2),
        ..inner
    };
    let prev = interior_sup(&inner, alpha, k)?;
    Ok(AdmissibilityEstimate {
        c_omega_hat: full,
        tail_increment: (full - prev) / prev,
    })
}

fn interior_sup<T: Real>(grid: &IndexGrid<T>, alpha: Alpha<T>, k: T) -> Result<T> {
    let centers = admissibility_centers(grid);
    if centers.is_empty() {
        return domain("no interior centers");
    }
    Ok(max_row_sum(&grid.distance(alpha), k, &centers))
}

/// [`c_omega_estimate`]'s sup for a single truncation, without the growth term.
pub fn c_omega_interior<T: Real>(grid: &IndexGrid<T>, alpha: Alpha<T>, k: T) -> Result<T> {
    check_order(k)?;
    if grid.len() == 1 {
        return Ok(T::one());
    }
    interior_sup(grid, alpha, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn a(v: f64) -> Alpha<f64> {
        Alpha::new(v).unwrap()
    }

    #[test]
    fn dilation_examples() {
        assert_eq!(dilation_matrix(1.0, a(0.3)), [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(dilation_matrix(4.0, a(0.5)), [[4.0, 0.0], [0.0, 2.0]]);
        assert_eq!(dilation_matrix(8.0, a(0.0)), [[8.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn rotation_examples() {
        assert_eq!(rotation_matrix(0.0), [[1.0, -0.0], [0.0, 1.0]]);
        let r = rotation_matrix(PI / 2.0);
        assert!(r[0][0].abs() < 1e-16 && r[1][1].abs() < 1e-16);
        assert_eq!((r[0][1], r[1][0]), (-1.0, 1.0));
        for k in 0..20 {
            assert!((mat2_det(&rotation_matrix(k as f64 * 0.7)) - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn shear_examples() {
        assert_eq!(shear_matrix(0.0), [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(shear_matrix(1.0), [[1.0, 1.0], [0.0, 1.0]]);
        assert_eq!(mat2_mul(&shear_matrix(0.7), &shear_matrix(-0.7)), [[1.0, 0.0], [0.0, 1.0]]);
    }

    fn curvelet(alpha: f64, j_max: u32, k_box: u32) -> CurveletGridSpec<f64> {
        CurveletGridSpec::new(a(alpha), 2.0, 1.0, j_max, k_box)
    }

    #[test]
    fn smallest_curvelet_grid() {
        let mut spec = curvelet(0.5, 0, 0);
        spec.angular_count_coeff = 0.5;
        let grid = build_curvelet_grid(&spec).unwrap();
        assert_eq!(grid.len(), 1);
        assert_eq!(grid.indices()[0], GridIndex { j: 0, l: 0, k: [0, 0] });
        let p = grid.points()[0];
        assert_eq!((p.scale(), p.theta(), p.location()), (1.0, 0.0, [0.0, 0.0]));
    }

    #[test]
    fn nine_point_curvelet_grid() {
        let mut spec = curvelet(0.5, 0, 1);
        spec.angular_count_coeff = 0.5;
        let grid = build_curvelet_grid(&spec).unwrap();
        assert_eq!(grid.len(), 9);
        let o = grid.position(&GridIndex { j: 0, l: 0, k: [1, 0] }).unwrap();
        assert_eq!(grid.points()[o].location(), [1.0, 0.0]);
    }

    #[test]
    fn curvelet_grid_size_and_invariants() {
        for alpha in [0.0, 0.5, 1.0] {
            let spec = curvelet(alpha, 3, 2);
            let grid = build_curvelet_grid(&spec).unwrap();
            let expected: usize = (0..=3).map(|j| (2 * spec.angular_count(j) as usize + 1) * 25).sum();
            assert_eq!(grid.len(), expected);
            for (idx, p) in grid.indices().iter().zip(grid.points()) {
                assert!(idx.l.abs() <= spec.angular_count(idx.j));
                assert_eq!(p.theta(), idx.l as f64 * spec.gamma(idx.j));
                let realized = spec.gamma(idx.j) * 2f64.powf(idx.j as f64 * (1.0 - alpha));
                assert_relative_eq!(realized, 1.0, max_relative = 1e-14);
            }
            let mut sorted = grid.indices().to_vec();
            sorted.sort();
            assert_eq!(sorted, grid.indices());
        }
    }

    #[test]
    fn angular_counts_survive_rounding() {
        // 2^{(1-1/2)·2} is not exactly 2 in floating point.
        assert_eq!(curvelet(0.5, 4, 0).angular_count(2), 2);
        assert_eq!(curvelet(0.5, 4, 0).angular_count(4), 4);
    }

    #[test]
    fn shearlet_examples() {
        let mut spec = ShearletGridSpec::new(a(0.5), 2.0, 1.0, 0, 0, 0);
        spec.angular_count_coeff = Some(0.5);
        let grid = build_shearlet_grid(&spec).unwrap();
        assert_eq!(grid.len(), 1);
        assert_eq!(grid.points()[0].location(), [0.0, 0.0]);
        assert_eq!(grid.points()[0].scale(), 1.0);

        let spec = ShearletGridSpec::new(a(0.5), 2.0, 1.0, 0, 3, 1);
        let grid = build_shearlet_grid(&spec).unwrap();
        let o = grid.position(&GridIndex { j: 0, l: 1, k: [0, 0] }).unwrap();
        assert_relative_eq!(grid.points()[o].theta(), PI / 4.0);
        assert!(grid.points().iter().all(|p| p.theta().abs() < PI / 2.0));
    }

    #[test]
    fn shearlet_negative_scales() {
        let spec = ShearletGridSpec::new(a(0.5), 2.0, 1.0, -2, 1, 1);
        let grid = build_shearlet_grid(&spec).unwrap();
        assert_eq!(grid.points()[0].scale(), 0.25);
        assert!(ShearletGridSpec::new(a(0.5), 2.0, 1.0, 2, 1, 1).validate().is_err());
    }

    #[test]
    fn size_cap_enforced() {
        let spec = curvelet(0.0, 4, 8);
        assert!(matches!(build_curvelet_grid_capped(&spec, 100), Err(Error::Size { .. })));
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = curvelet(0.5, 1, 1);
        spec.g = 1.0;
        assert!(build_curvelet_grid(&spec).is_err());
        let mut spec = curvelet(0.5, 1, 1);
        spec.tau = 0.0;
        assert!(build_curvelet_grid(&spec).is_err());
    }

    #[test]
    fn colliding_parametrization_rejected() {
        // γ_0 = 2π maps l = ±1 onto l = 0.
        let mut spec = curvelet(0.5, 0, 0);
        spec.gamma_coeff = 2.0 * PI;
        spec.angular_count_coeff = 1.0;
        assert!(build_curvelet_grid(&spec).is_err());
    }

    #[test]
    fn formula_examples() {
        assert_eq!(separation_formula_curvelet(2.0, 1.0, 1.0), 2.0);
        assert_eq!(separation_formula_curvelet(2.0, 0.5, 1.0), 1.25);
        assert_eq!(
            separation_formula_shearlet(3.0, 0.7, 1.2, 0.0),
            separation_formula_curvelet(3.0, 0.7, 1.2)
        );
        assert_relative_eq!(separation_formula_shearlet(2.0, 1.0, 1.0, 1.0), 1.25);
    }

    #[test]
    fn two_point_separation() {
        let grid = build_curvelet_grid(&curvelet(0.5, 0, 1)).unwrap();
        let o0 = grid.position(&GridIndex { j: 0, l: 0, k: [0, 0] }).unwrap();
        let o1 = grid.position(&GridIndex { j: 0, l: 0, k: [1, 0] }).unwrap();
        let pair = grid.subset(&[o0, o1]).unwrap();
        let rep = measured_separation(&pair, a(0.5)).unwrap();
        assert_relative_eq!(rep.measured_min, 3.0);
        assert!(rep.measured_min >= rep.formula_value - 1e-9);
    }

    #[test]
    fn separation_at_least_formula() {
        let grid = build_curvelet_grid(&curvelet(0.5, 3, 3)).unwrap();
        let rep = measured_separation(&grid, a(0.5)).unwrap();
        assert!(rep.formula_attained);
        assert!((rep.measured_min - rep.formula_value).abs() <= 1e-9, "{rep:?}");
        // Identical scale, l = 0, adjacent k₂: ω = 1 + τ² exactly.
        let o0 = grid.position(&GridIndex { j: 2, l: 0, k: [0, 0] }).unwrap();
        let o1 = grid.position(&GridIndex { j: 2, l: 0, k: [0, 1] }).unwrap();
        assert_relative_eq!(grid.distance(a(0.5)).omega(o0, o1), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn separation_errors() {
        let mut spec = curvelet(0.5, 0, 0);
        spec.angular_count_coeff = 0.5;
        let single = build_curvelet_grid(&spec).unwrap();
        assert!(measured_separation(&single, a(0.5)).is_err());
        let grid = build_curvelet_grid(&curvelet(0.5, 1, 1)).unwrap();
        assert!(measured_separation(&grid, a(0.25)).is_err());
    }

    #[test]
    fn admissibility_examples() {
        let mut spec = curvelet(0.5, 0, 0);
        spec.angular_count_coeff = 0.5;
        let single = build_curvelet_grid(&spec).unwrap();
        assert_eq!(admissibility_sum(&single, a(0.5), 2.0, 0).unwrap(), 1.0);
        assert!(admissibility_sum(&single, a(0.5), 2.0, 1).is_err());
        assert!(admissibility_sum(&single, a(0.5), 0.5, 0).is_err());
        let est = c_omega_estimate(&single, a(0.5), 2.0).unwrap();
        assert_eq!((est.c_omega_hat, est.tail_increment), (1.0, 0.0));

        let small = build_curvelet_grid(&curvelet(0.5, 1, 2)).unwrap();
        let big = build_curvelet_grid(&curvelet(0.5, 2, 4)).unwrap();
        let center = GridIndex { j: 1, l: 0, k: [0, 0] };
        let s_small = admissibility_sum(&small, a(0.5), 2.0, small.position(&center).unwrap()).unwrap();
        let s_big = admissibility_sum(&big, a(0.5), 2.0, big.position(&center).unwrap()).unwrap();
        assert!(s_small >= 1.0 && s_small <= s_big);
        assert!(c_omega_estimate(&small, a(0.5), 2.0).is_err());
    }

    #[test]
    fn c_omega_nested_monotone() {
        let spec = curvelet(0.5, 3, 4);
        let g3 = build_curvelet_grid(&spec).unwrap();
        let g2 = build_curvelet_grid(&curvelet(0.5, 2, 2)).unwrap();
        let est = c_omega_estimate(&g3, a(0.5), 2.0).unwrap();
        let prev = c_omega_interior(&g2, a(0.5), 2.0).unwrap();
        assert_relative_eq!(est.c_omega_hat, prev * (1.0 + est.tail_increment), max_relative = 1e-12);
        assert!(est.tail_increment >= 0.0);
        assert!(admissibility_sup(&g3, a(0.5), 2.0).unwrap() >= est.c_omega_hat);
    }

    #[test]
    fn grid_csv_export() {
        let grid = build_curvelet_grid(&curvelet(0.5, 1, 1)).unwrap();
        let mut buf = Vec::new();
        grid.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), grid.len() + 1);
        assert!(text.starts_with("ordinal,j,l,k1,k2,s,theta,x1,x2\n"));
    }
}
