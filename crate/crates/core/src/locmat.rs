//! Matrices indexed by a grid, the localization norms `‖·‖_{B_N}`, and the
//! pseudoinverse machinery built on them.

use std::io::{BufRead, Read, Write};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{symmetric_eigen, SymmetricEigen};
use crate::error::{domain, Error, Result};
use crate::grid::IndexGrid;
use crate::matrix::DenseMatrix;
use crate::phase::{Alpha, AlphaDistance};
use crate::scalar::Real;

/// Kernel threshold relative to the largest eigenvalue.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-8;
/// Proven pseudo-triangle constant of `ω_α`.
pub const PSEUDO_TRIANGLE_BOUND: f64 = 4.0;
/// Entries at or below this magnitude are left out of decay fits.
pub const FIT_FLOOR: f64 = 1e-14;

const SYMMETRY_TOL: f64 = 1e-12;

/// A square matrix whose rows and columns are indexed by a grid.
#[derive(Clone, Debug)]
pub struct LocalizedMatrix<T> {
    grid: Arc<IndexGrid<T>>,
    entries: DenseMatrix<T>,
    symmetric: bool,
}

impl<T: Real> LocalizedMatrix<T> {
    pub fn new(grid: Arc<IndexGrid<T>>, entries: DenseMatrix<T>) -> Result<Self> {
        if !entries.is_square() || entries.rows() != grid.len() {
            return domain(format!(
                "a {}x{} matrix does not fit a grid of {} indices",
                entries.rows(),
                entries.cols(),
                grid.len()
            ));
        }
        let symmetric = entries.asymmetry() <= T::lit(SYMMETRY_TOL) * entries.max_abs();
        Ok(Self {
            grid,
            entries,
            symmetric,
        })
    }

    pub fn from_fn(grid: Arc<IndexGrid<T>>, f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, DenseMatrix::from_fn(n, n, f))
    }

    pub fn identity(grid: Arc<IndexGrid<T>>) -> Self {
        let n = grid.len();
        Self {
            grid,
            entries: DenseMatrix::identity(n),
            symmetric: true,
        }
    }

    /// `A_{λλ'} = c · ω_α(λ, λ')^{-N}`.
    pub fn power_law(grid: Arc<IndexGrid<T>>, alpha: Alpha<T>, n: T, c: T) -> Self {
        let dist = grid.distance(alpha);
        let len = grid.len();
        let entries = DenseMatrix::from_fn(len, len, |i, j| c * dist.omega(i, j).powf(-n));
        let symmetric = entries.asymmetry() <= T::lit(SYMMETRY_TOL) * entries.max_abs();
        Self {
            grid,
            entries,
            symmetric,
        }
    }

    pub fn grid(&self) -> &Arc<IndexGrid<T>> {
        &self.grid
    }

    pub fn entries(&self) -> &DenseMatrix<T> {
        &self.entries
    }

    pub fn into_entries(self) -> DenseMatrix<T> {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn with_entries(&self, entries: DenseMatrix<T>) -> Result<Self> {
        Self::new(self.grid.clone(), entries)
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid)
            || (self.grid.len() == other.grid.len() && self.grid.fingerprint() == other.grid.fingerprint())
        {
            Ok(())
        } else {
            domain("matrices are indexed by different grids")
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        self.with_entries(self.entries.matmul(&other.entries)?)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        self.with_entries(self.entries.add(&other.entries)?)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        self.with_entries(self.entries.sub(&other.entries)?)
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            grid: self.grid.clone(),
            entries: self.entries.scaled(factor),
            symmetric: self.symmetric,
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            entries: self.entries.transpose(),
            symmetric: self.symmetric,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BnNormResult<T> {
    pub value: T,
    pub arg_pair: (usize, usize),
}

/// `max_{λ,λ'} ω_α(λ, λ')^N |A_{λλ'}|`; ties go to the first pair in row-major order.
pub fn bn_norm<T: Real>(a: &LocalizedMatrix<T>, alpha: Alpha<T>, n: T) -> Result<BnNormResult<T>> {
    if !(n >= T::zero() && n.is_finite()) {
        return domain(format!("localization order must be >= 0, got {n}"));
    }
    let dist = a.grid.distance(alpha);
    Ok(bn_norm_with(&a.entries, &dist, n))
}

pub(crate) fn bn_norm_with<T: Real>(a: &DenseMatrix<T>, dist: &AlphaDistance<T>, n: T) -> BnNormResult<T> {
    let rows: Vec<(T, usize)> = (0..a.rows())
        .into_par_iter()
        .map(|i| {
            let mut best = (T::zero(), 0usize);
            for (j, &v) in a.row(i).iter().enumerate() {
                if v == T::zero() {
                    continue;
                }
                let w = dist.omega(i, j).powf(n) * v.abs();
                if w > best.0 {
                    best = (w, j);
                }
            }
            best
        })
        .collect();
    let (mut value, mut arg_pair) = (T::zero(), (0, 0));
    for (i, (w, j)) in rows.into_iter().enumerate() {
        if w > value {
            value = w;
            arg_pair = (i, j);
        }
    }
    BnNormResult { value, arg_pair }
}

/// Constants entering the algebra estimate `‖AB‖_{B_N} ≤ (1+C_ω)‖A‖_{B_{N+L}}‖B‖_{B_N}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraConstants<T> {
    /// Separation constant `C_Λ > 1` of the grid.
    pub c_lambda: T,
    /// Pseudo-triangle constant `C_T` of the index distance.
    pub c_t: T,
    /// Admissibility constant `C_ω` for order `k`.
    pub c_omega: T,
    pub k: T,
}

impl<T: Real> AlgebraConstants<T> {
    /// `max(2N log_{C_Λ} C_T, 2K)`.
    pub fn min_extra_order(&self, n: T) -> T {
        let two = T::lit(2.0);
        (two * n * self.c_t.ln() / self.c_lambda.ln()).max(two * self.k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubmultOutcome<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

/// Evaluates both sides of the algebra estimate for one pair.
pub fn submultiplicativity_check<T: Real>(
    a: &LocalizedMatrix<T>,
    b: &LocalizedMatrix<T>,
    alpha: Alpha<T>,
    n: T,
    l: T,
    constants: &AlgebraConstants<T>,
) -> Result<SubmultOutcome<T>> {
    if !(constants.c_lambda > T::one()) {
        return domain("the separation constant must exceed 1");
    }
    let min_l = constants.min_extra_order(n);
    if l < min_l * (T::one() - T::epsilon() * T::lit(16.0)) {
        return domain(format!("L = {l} is below the minimum admissible L = {min_l}"));
    }
    let ab = a.matmul(b)?;
    let dist = a.grid.distance(alpha);
    let lhs = bn_norm_with(&ab.entries, &dist, n).value;
    let rhs = (T::one() + constants.c_omega)
        * bn_norm_with(&a.entries, &dist, n + l).value
        * bn_norm_with(&b.entries, &dist, n).value;
    Ok(SubmultOutcome {
        lhs,
        rhs,
        holds: lhs <= rhs * (T::one() + T::lit(1e-9)),
    })
}

/// Eigendecomposition of a symmetric localized matrix.
#[derive(Clone, Debug)]
pub struct SpectralData<T> {
    pub eigen: SymmetricEigen<T>,
}

impl<T: Real> SpectralData<T> {
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigen.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DenseMatrix<T> {
        &self.eigen.eigenvectors
    }
}

pub fn symmetric_eigendecomposition<T: Real>(a: &LocalizedMatrix<T>) -> Result<SpectralData<T>> {
    if !a.symmetric {
        return domain("eigendecomposition needs a symmetric matrix");
    }
    Ok(SpectralData {
        eigen: symmetric_eigen(&a.entries)?,
    })
}

/// Spectrum contained in `{0} ∪ [a, b]` up to the kernel threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralGap<T> {
    pub a: T,
    pub b: T,
    pub kernel_dim: usize,
    pub kernel_tol: T,
}

impl<T: Real> SpectralGap<T> {
    /// Eigenvalues at or below this value count as kernel.
    pub fn threshold(&self) -> T {
        self.kernel_tol * self.b
    }
}

pub fn spectral_gap<T: Real>(s: &SpectralData<T>, kernel_tol: T) -> Result<SpectralGap<T>> {
    if !(kernel_tol >= T::zero()) {
        return domain("kernel tolerance must be nonnegative");
    }
    let eig = s.eigenvalues();
    let b = match eig.last() {
        Some(&b) => b,
        None => return Err(Error::Degenerate("empty spectrum".into())),
    };
    let threshold = kernel_tol * b.abs();
    if b <= threshold {
        return Err(Error::Degenerate("every eigenvalue lies in the kernel".into()));
    }
    if eig[0] < -threshold {
        return domain(format!("materially negative eigenvalue {}", eig[0]));
    }
    let kernel_dim = eig.iter().take_while(|&&l| l <= threshold).count();
    Ok(SpectralGap {
        a: eig[kernel_dim],
        b,
        kernel_dim,
        kernel_tol,
    })
}

/// Moore-Penrose pseudoinverse from the eigendecomposition.
pub fn pinv_spectral<T: Real>(a: &LocalizedMatrix<T>, kernel_tol: T) -> Result<LocalizedMatrix<T>> {
    let spec = symmetric_eigendecomposition(a)?;
    pinv_from_spectrum(a, &spec, kernel_tol)
}

pub fn pinv_from_spectrum<T: Real>(
    a: &LocalizedMatrix<T>,
    spec: &SpectralData<T>,
    kernel_tol: T,
) -> Result<LocalizedMatrix<T>> {
    let threshold = spectral_gap(spec, kernel_tol)?.threshold();
    let p = spec.eigen.spectral_map(|l| if l > threshold { l.recip() } else { T::zero() });
    a.with_entries(p)
}

/// Step size and contraction ratio of the Neumann series for `A⁺`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinvParams<T> {
    /// `2 / (a² + b²)`.
    pub gamma: T,
    /// `(b² − a²) / (b² + a²)`.
    pub q: T,
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> PinvParams<T> {
    pub fn new(a: T, b: T, tol: T, max_iter: usize) -> Result<Self> {
        if !(a > T::zero()) {
            return domain(format!("lower spectral bound must be positive, got {a}"));
        }
        if a > b {
            return domain(format!("lower spectral bound {a} exceeds upper bound {b}"));
        }
        let (a2, b2) = (a * a, b * b);
        Ok(Self {
            gamma: T::lit(2.0) / (a2 + b2),
            q: (b2 - a2) / (b2 + a2),
            tol,
            max_iter,
        })
    }
}

#[derive(Clone, Debug)]
pub struct NeumannResult<T> {
    pub pinv: LocalizedMatrix<T>,
    /// Number of series terms summed.
    pub iterations: usize,
    /// Sup norm of each summed term.
    pub increments: Vec<T>,
    pub params: PinvParams<T>,
}

impl<T: Real> NeumannResult<T> {
    /// Geometric-mean ratio of successive increments over the second half of
    /// the series, where the slowest eigenvalue dominates. The span is even
    /// because the component at `b` alternates in sign.
    pub fn contraction_ratio(&self) -> Option<T> {
        let inc = &self.increments;
        if inc.len() < 3 {
            return None;
        }
        let mut start = inc.len() / 2;
        if (inc.len() - 1 - start) % 2 == 1 {
            start += 1;
        }
        if start + 1 >= inc.len() {
            return None;
        }
        let (first, last) = (inc[start], inc[inc.len() - 1]);
        if first <= T::zero() || last <= T::zero() {
            return None;
        }
        let steps = T::from_count(inc.len() - 1 - start);
        Some((last / first).powf(steps.recip()))
    }
}

/// `A⁺ = γ Σ_{k≥0} (I − γA²)^k A` with `γ = 2/(a²+b²)`.
pub fn pinv_neumann<T: Real>(a: &LocalizedMatrix<T>, lo: T, hi: T, tol: T, max_iter: usize) -> Result<NeumannResult<T>> {
    let params = PinvParams::new(lo, hi, tol, max_iter)?;
    let a2 = a.entries.matmul(&a.entries)?;
    let mut term = a.entries.scaled(params.gamma);
    let mut sum = DenseMatrix::zeros(a.dim(), a.dim());
    let mut increments = Vec::new();
    loop {
        let size = term.max_abs();
        if size < tol {
            break;
        }
        if increments.len() == max_iter {
            return Err(Error::Numeric(format!(
                "Neumann series did not reach tolerance {tol} in {max_iter} terms (last increment {size})"
            )));
        }
        sum = sum.add(&term)?;
        increments.push(size);
        let correction = a2.matmul(&term)?.scaled(params.gamma);
        term = term.sub(&correction)?;
    }
    sum.symmetrize();
    Ok(NeumannResult {
        pinv: a.with_entries(sum)?,
        iterations: increments.len(),
        increments,
        params,
    })
}

/// Reduced localization order of `A⁺`:
/// `N / (1 − log(1 + 2/(a²+b²)·‖A‖²(1+C_ω)²) / log((b²−a²)/(b²+a²)))`.
pub fn n_plus<T: Real>(n: T, a: T, b: T, norm_a: T, c_omega: T) -> Result<T> {
    let params = PinvParams::new(a, b, T::zero(), 0)?;
    if !(norm_a > T::zero()) {
        return domain("the localization norm must be positive");
    }
    if !(c_omega >= T::zero()) {
        return domain("the admissibility constant must be nonnegative");
    }
    if a == b {
        return Ok(n);
    }
    let growth = T::one() + params.gamma * norm_a * norm_a * (T::one() + c_omega).powi(2);
    Ok(n / (T::one() - growth.ln() / params.q.ln()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit<T> {
    pub exponent: T,
    pub prefactor: T,
    pub r2: T,
    pub pairs: usize,
}

/// Least-squares fit of `log|A_{λλ'}|` against `−log ω_α(λ, λ')` over
/// off-diagonal pairs with both indices in `interior`.
pub fn decay_exponent_fit<T: Real>(a: &LocalizedMatrix<T>, alpha: Alpha<T>, interior: &[usize]) -> Result<DecayFit<T>> {
    if interior.iter().any(|&i| i >= a.dim()) {
        return domain("interior ordinal out of range");
    }
    let dist = a.grid.distance(alpha);
    let floor = T::lit(FIT_FLOOR);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &i in interior {
        for &j in interior {
            let v = a.entries[(i, j)].abs();
            if i == j || !(v > floor) {
                continue;
            }
            xs.push(-dist.omega(i, j).ln());
            ys.push(v.ln());
        }
    }
    if xs.len() < 10 {
        return domain(format!("only {} usable pairs for the decay fit, need 10", xs.len()));
    }
    let count = T::from_count(xs.len());
    let mx = xs.iter().copied().sum::<T>() / count;
    let my = ys.iter().copied().sum::<T>() / count;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(&ys) {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
        syy = syy + (y - my) * (y - my);
    }
    if sxx <= T::zero() {
        return domain("all fitted pairs share one distance");
    }
    let slope = sxy / sxx;
    let r2 = if syy <= T::zero() { T::one() } else { sxy * sxy / (sxx * syy) };
    Ok(DecayFit {
        exponent: slope,
        prefactor: (my - slope * mx).exp(),
        r2,
        pairs: xs.len(),
    })
}

const BINARY_MAGIC: &[u8; 4] = b"ALOC";
const BINARY_VERSION: u32 = 1;
const CSV_PREFIX: &str = "# alphaloc-matrix grid=";

impl LocalizedMatrix<f64> {
    /// Row-major CSV preceded by a `# alphaloc-matrix grid=<hash> dim=<n>` line.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "{CSV_PREFIX}{} dim={}", self.grid.fingerprint(), self.dim())?;
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        for i in 0..self.dim() {
            w.write_record(self.entries.row(i).iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads [`write_csv`](Self::write_csv) output; the grid hash must match.
    pub fn read_csv<R: BufRead>(grid: Arc<IndexGrid<f64>>, mut reader: R) -> Result<Self> {
        let mut header = String::new();
        reader.read_line(&mut header)?;
        let expected = format!("{CSV_PREFIX}{} dim={}", grid.fingerprint(), grid.len());
        if header.trim_end() != expected {
            return Err(Error::Format(format!(
                "matrix header {:?} does not match grid {}",
                header.trim_end(),
                grid.fingerprint()
            )));
        }
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
        let mut data = Vec::with_capacity(grid.len() * grid.len());
        for record in r.records() {
            let record = record?;
            if record.len() != grid.len() {
                return Err(Error::Format(format!("row of length {} in a {}-index matrix", record.len(), grid.len())));
            }
            for field in record.iter() {
                data.push(field.parse::<f64>().map_err(|e| Error::Format(format!("bad entry {field:?}: {e}")))?);
            }
        }
        let n = grid.len();
        Self::new(grid, DenseMatrix::from_row_major(n, n, data).map_err(|e| Error::Format(e.to_string()))?)
    }

    /// `"ALOC"`, version and dimension as little-endian `u32`, then row-major little-endian `f64`s.
    pub fn write_binary<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(BINARY_MAGIC)?;
        writer.write_all(&BINARY_VERSION.to_le_bytes())?;
        let dim = u32::try_from(self.dim()).map_err(|_| Error::Format("dimension exceeds u32".into()))?;
        writer.write_all(&dim.to_le_bytes())?;
        for v in self.entries.as_slice() {
            writer.write_all(&v.to_le_bytes())?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(grid: Arc<IndexGrid<f64>>, mut reader: R) -> Result<Self> {
        let mut word = [0u8; 4];
        reader.read_exact(&mut word)?;
        if &word != BINARY_MAGIC {
            return Err(Error::Format("missing ALOC magic".into()));
        }
        reader.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != BINARY_VERSION {
            return Err(Error::Format(format!("unsupported matrix format version {version}")));
        }
        reader.read_exact(&mut word)?;
        let dim = u32::from_le_bytes(word) as usize;
        if dim != grid.len() {
            return Err(Error::Format(format!("matrix dimension {dim} does not match grid of {}", grid.len())));
        }
        let mut bytes = vec![0u8; dim * dim * 8];
        reader.read_exact(&mut bytes)?;
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Self::new(grid, DenseMatrix::from_row_major(dim, dim, data)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_curvelet_grid, CurveletGridSpec};
    use approx::assert_relative_eq;

    fn alpha() -> Alpha<f64> {
        Alpha::new(0.5).unwrap()
    }

    fn grid() -> Arc<IndexGrid<f64>> {
        Arc::new(build_curvelet_grid(&CurveletGridSpec::new(alpha(), 2.0, 1.0, 2, 1)).unwrap())
    }

    fn small(rows: &[&[f64]]) -> LocalizedMatrix<f64> {
        let n = rows.len();
        let mut spec = CurveletGridSpec::new(alpha(), 2.0, 1.0, (n - 1) as u32, 0);
        spec.angular_count_coeff = 0.5;
        let g = Arc::new(build_curvelet_grid(&spec).unwrap());
        assert_eq!(g.len(), n);
        let entries = DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
        LocalizedMatrix::new(g, entries).unwrap()
    }

    #[test]
    fn bn_norm_examples() {
        let g = grid();
        let id = LocalizedMatrix::identity(g.clone());
        assert_eq!(bn_norm(&id, alpha(), 3.0).unwrap().value, 1.0);
        let p = LocalizedMatrix::power_law(g.clone(), alpha(), 3.0, 1.0);
        assert_relative_eq!(bn_norm(&p, alpha(), 3.0).unwrap().value, 1.0, max_relative = 1e-12);
        let p3 = LocalizedMatrix::power_law(g, alpha(), 3.0, 3.0);
        assert_relative_eq!(bn_norm(&p3, alpha(), 3.0).unwrap().value, 3.0, max_relative = 1e-12);
        assert!(bn_norm(&p3, alpha(), -1.0).is_err());
    }

    #[test]
    fn matmul_examples() {
        let a = small(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let b = a.with_entries(DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap()).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.entries().as_slice(), &[2.0, 1.0, 1.0, 1.0]);
        let id = LocalizedMatrix::identity(a.grid().clone());
        assert_eq!(a.matmul(&id).unwrap().entries(), a.entries());
        assert_eq!(id.matmul(&a).unwrap().entries(), a.entries());
        assert!(a.matmul(&LocalizedMatrix::identity(grid())).is_err());
    }

    fn consts(c_omega: f64) -> AlgebraConstants<f64> {
        AlgebraConstants {
            c_lambda: 2.0,
            c_t: 4.0,
            c_omega,
            k: 2.0,
        }
    }

    #[test]
    fn submultiplicativity_examples() {
        let g = grid();
        let id = LocalizedMatrix::identity(g.clone());
        let out = submultiplicativity_check(&id, &id, alpha(), 2.0, 8.0, &consts(1.5)).unwrap();
        assert_eq!((out.lhs, out.rhs, out.holds), (1.0, 2.5, true));
        let c_omega = crate::grid::admissibility_sup(&g, alpha(), 2.0).unwrap();
        let a = LocalizedMatrix::power_law(g.clone(), alpha(), 10.0, 1.0);
        let b = LocalizedMatrix::power_law(g, alpha(), 2.0, 1.0);
        assert!(submultiplicativity_check(&a, &b, alpha(), 2.0, 8.0, &consts(c_omega)).unwrap().holds);
        match submultiplicativity_check(&a, &b, alpha(), 2.0, 3.0, &consts(c_omega)) {
            Err(Error::Domain(msg)) => assert!(msg.contains("minimum admissible L = 8")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spectral_examples() {
        let id = small(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let s = symmetric_eigendecomposition(&id).unwrap();
        let gap = spectral_gap(&s, 1e-8).unwrap();
        assert_eq!((gap.a, gap.b, gap.kernel_dim), (1.0, 1.0, 0));

        let d = small(&[&[2.0, 0.0], &[0.0, 0.0]]);
        let s = symmetric_eigendecomposition(&d).unwrap();
        assert_eq!(s.eigenvalues(), &[0.0, 2.0]);
        let gap = spectral_gap(&s, 1e-8).unwrap();
        assert_eq!((gap.a, gap.b, gap.kernel_dim), (2.0, 2.0, 1));

        let m = small(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let gap = spectral_gap(&symmetric_eigendecomposition(&m).unwrap(), 1e-8).unwrap();
        assert_relative_eq!(gap.a, 1.0, epsilon = 1e-14);
        assert_relative_eq!(gap.b, 3.0, epsilon = 1e-14);
        assert_eq!(gap.kernel_dim, 0);
    }

    #[test]
    fn spectral_gap_errors() {
        let z = small(&[&[0.0, 0.0], &[0.0, 0.0]]);
        assert!(matches!(
            spectral_gap(&symmetric_eigendecomposition(&z).unwrap(), 1e-8),
            Err(Error::Degenerate(_))
        ));
        let neg = small(&[&[1.0, 0.0], &[0.0, -1.0]]);
        assert!(matches!(
            spectral_gap(&symmetric_eigendecomposition(&neg).unwrap(), 1e-8),
            Err(Error::Domain(_))
        ));
        let asym = small(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(symmetric_eigendecomposition(&asym).is_err());
    }

    #[test]
    fn pinv_spectral_examples() {
        let id = small(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(pinv_spectral(&id, 1e-8).unwrap().entries(), id.entries());
        let d = small(&[&[2.0, 0.0], &[0.0, 0.0]]);
        assert_eq!(pinv_spectral(&d, 1e-8).unwrap().entries().as_slice(), &[0.5, 0.0, 0.0, 0.0]);
        let m = small(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let p = pinv_spectral(&m, 1e-8).unwrap();
        for (got, want) in p.entries().as_slice().iter().zip([2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0]) {
            assert_relative_eq!(*got, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn pinv_neumann_examples() {
        let id = small(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let r = pinv_neumann(&id, 1.0, 1.0, 1e-12, 10).unwrap();
        assert_eq!((r.iterations, r.params.gamma), (1, 1.0));
        assert_eq!(r.pinv.entries(), id.entries());

        let d = small(&[&[2.0, 0.0], &[0.0, 0.0]]);
        let r = pinv_neumann(&d, 2.0, 2.0, 1e-12, 10).unwrap();
        assert_eq!(r.params.gamma, 0.25);
        assert_eq!(r.pinv.entries().as_slice(), &[0.5, 0.0, 0.0, 0.0]);

        let m = small(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let r = pinv_neumann(&m, 1.0, 3.0, 1e-12, 500).unwrap();
        assert_relative_eq!(r.params.q, 0.8, epsilon = 1e-15);
        let p = pinv_spectral(&m, 1e-8).unwrap();
        assert!(r.pinv.sub(&p).unwrap().entries().max_abs() <= 1e-8);
        for (k, inc) in r.increments.iter().enumerate() {
            assert!(*inc <= r.increments[0] * 0.8f64.powi(k as i32) * (1.0 + 1e-9));
        }
        assert_relative_eq!(r.contraction_ratio().unwrap(), 0.8, epsilon = 1e-9);
    }

    #[test]
    fn pinv_neumann_errors() {
        let m = small(&[&[2.0, 1.0], &[1.0, 2.0]]);
        assert!(matches!(pinv_neumann(&m, 0.0, 3.0, 1e-12, 10), Err(Error::Domain(_))));
        assert!(matches!(pinv_neumann(&m, 1.0, 3.0, 1e-12, 5), Err(Error::Numeric(_))));
    }

    #[test]
    fn n_plus_examples() {
        assert_eq!(n_plus(7.0, 2.0, 2.0, 3.0, 1.0).unwrap(), 7.0);
        assert_relative_eq!(n_plus(10.0, 1.0, 3f64.sqrt(), 1.0, 1.0).unwrap(), 3.8685, epsilon = 1e-3);
        let mut last = f64::INFINITY;
        for c in [0.0, 0.5, 1.0, 2.0, 5.0] {
            let v = n_plus(4.0, 1.0, 2.0, 1.0, c).unwrap();
            assert!(v < last && v > 0.0 && v <= 4.0);
            last = v;
        }
        assert!(n_plus(4.0, 2.0, 1.0, 1.0, 1.0).is_err());
        assert!(n_plus(4.0, 0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn decay_fit_examples() {
        let g = grid();
        let interior: Vec<usize> = (0..g.len()).collect();
        let fit = decay_exponent_fit(&LocalizedMatrix::power_law(g.clone(), alpha(), 5.0, 1.0), alpha(), &interior).unwrap();
        assert_relative_eq!(fit.exponent, 5.0, epsilon = 1e-9);
        assert_relative_eq!(fit.r2, 1.0, epsilon = 1e-9);
        let fit = decay_exponent_fit(&LocalizedMatrix::power_law(g.clone(), alpha(), 3.0, 2.0), alpha(), &interior).unwrap();
        assert_relative_eq!(fit.exponent, 3.0, epsilon = 1e-9);
        assert_relative_eq!(fit.prefactor, 2.0, epsilon = 1e-9);
        assert!(decay_exponent_fit(&LocalizedMatrix::identity(g), alpha(), &interior).is_err());
    }

    #[test]
    fn io_round_trips() {
        let g = grid();
        let p = LocalizedMatrix::power_law(g.clone(), alpha(), 2.5, 1.0);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let back = LocalizedMatrix::read_csv(g.clone(), buf.as_slice()).unwrap();
        assert_eq!(back.entries(), p.entries());
        let mut bin = Vec::new();
        p.write_binary(&mut bin).unwrap();
        assert_eq!(&bin[..4], b"ALOC");
        assert_eq!(bin.len(), 12 + 8 * g.len() * g.len());
        let back = LocalizedMatrix::read_binary(g.clone(), bin.as_slice()).unwrap();
        assert_eq!(back.entries(), p.entries());

        let other = Arc::new(build_curvelet_grid(&CurveletGridSpec::new(alpha(), 2.0, 1.0, 1, 1)).unwrap());
        assert!(matches!(LocalizedMatrix::read_csv(other.clone(), buf.as_slice()), Err(Error::Format(_))));
        assert!(matches!(LocalizedMatrix::read_binary(other, bin.as_slice()), Err(Error::Format(_))));
    }
}
