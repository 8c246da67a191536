//! The α-index distance on the phase space `ℝ₊ × S¹ × ℝ²`.
//!
//! A phase point carries a scale, an orientation and a location. For every
//! anisotropy parameter `α ∈ [0, 1]` the distance
//!
//! ```text
//! ω_α(p, q) = M(p, q) · (1 + d_α(p, q))
//! M(p, q)   = max(s_p / s_q, s_q / s_p)
//! d_α(p, q) = m^{2(1-α)} |Δθ|² + m^{2α} ‖Δx‖² + m |⟨Δx, e_{θ_p}⟩|,   m = min(s_p, s_q)
//! ```
//!
//! is an index distance with symmetry constant at most 2 and triangle constant
//! at most 4. Angle differences are geodesic on `ℝ/2πℤ`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::Real;

/// Anisotropy parameter `α ∈ [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64", bound = "T: Real")]
pub struct Alpha<T>(T);

impl<T: Real> Alpha<T> {
    pub fn new(value: T) -> Result<Self> {
        if value.is_finite() && value >= T::zero() && value <= T::one() {
            Ok(Self(value))
        } else {
            domain(format!("alpha must lie in [0, 1], got {value}"))
        }
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }

    /// Exponent `2(1-α)` of the angular term.
    #[inline]
    pub fn angular_exponent(self) -> T {
        T::lit(2.0) * (T::one() - self.0)
    }

    /// Exponent `2α` of the isotropic spatial term.
    #[inline]
    pub fn spatial_exponent(self) -> T {
        T::lit(2.0) * self.0
    }
}

impl<T: Real> TryFrom<f64> for Alpha<T> {
    type Error = crate::Error;
    fn try_from(value: f64) -> Result<Self> {
        Self::new(T::lit(value))
    }
}

impl<T: Real> From<Alpha<T>> for f64 {
    fn from(alpha: Alpha<T>) -> f64 {
        alpha.0.as_f64()
    }
}

/// Maps an angle to its canonical representative in `(-π, π]`.
pub fn canonical_angle<T: Real>(theta: T) -> T {
    let two_pi = T::TAU();
    let mut r = theta % two_pi;
    if r <= -T::PI() {
        r = r + two_pi;
    } else if r > T::PI() {
        r = r - two_pi;
    }
    r
}

/// Geodesic distance between two orientations on `ℝ/2πℤ`, in `[0, π]`.
pub fn angle_distance<T: Real>(a: T, b: T) -> T {
    canonical_angle(a - b).abs()
}

// Both arguments already canonical, so |a - b| < 2π.
#[inline]
fn canonical_distance<T: Real>(a: T, b: T) -> T {
    let d = (a - b).abs();
    if d > T::PI() {
        T::TAU() - d
    } else {
        d
    }
}

/// A point `(s, θ, x)` of phase space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint<T> {
    s: T,
    theta: T,
    x: [T; 2],
}

impl<T: Real> PhasePoint<T> {
    /// Builds a point, reducing `theta` into `(-π, π]`.
    pub fn new(s: T, theta: T, x: [T; 2]) -> Result<Self> {
        if !(s.is_finite() && s > T::zero()) {
            return domain(format!("scale must be finite and positive, got {s}"));
        }
        if !theta.is_finite() || !x[0].is_finite() || !x[1].is_finite() {
            return domain("orientation and location must be finite");
        }
        Ok(Self {
            s,
            theta: canonical_angle(theta),
            x,
        })
    }

    #[inline]
    pub fn scale(&self) -> T {
        self.s
    }

    #[inline]
    pub fn theta(&self) -> T {
        self.theta
    }

    #[inline]
    pub fn location(&self) -> [T; 2] {
        self.x
    }

    /// The same point shifted by `t` in location.
    pub fn translated(&self, t: [T; 2]) -> Self {
        Self {
            x: [self.x[0] + t[0], self.x[1] + t[1]],
            ..*self
        }
    }
}

/// The co-direction `e_θ = (cos θ, -sin θ)`.
#[inline]
pub fn co_direction<T: Real>(theta: T) -> [T; 2] {
    let (sin, cos) = theta.sin_cos();
    [cos, -sin]
}

/// Scale ratio `M(p, q) = max(s_p/s_q, s_q/s_p) ≥ 1`.
#[inline]
pub fn scale_ratio<T: Real>(p: &PhasePoint<T>, q: &PhasePoint<T>) -> T {
    (p.s / q.s).max(q.s / p.s)
}

/// The three summands of `d_α(p, q)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceTerms<T> {
    /// `min(s,s')^{2(1-α)} |Δθ|²`
    pub angular: T,
    /// `min(s,s')^{2α} ‖Δx‖²`
    pub spatial: T,
    /// `min(s,s') |⟨Δx, e_{θ_p}⟩|`
    pub directional: T,
}

impl<T: Real> DistanceTerms<T> {
    #[inline]
    pub fn sum(&self) -> T {
        self.angular + self.spatial + self.directional
    }
}

/// Per-point quantities that the distance needs, computed once.
#[derive(Clone, Copy, Debug)]
struct Prepared<T> {
    s: T,
    theta: T,
    x: [T; 2],
    e: [T; 2],
    s_ang: T,
    s_sp: T,
}

impl<T: Real> Prepared<T> {
    fn new(alpha: Alpha<T>, p: &PhasePoint<T>) -> Self {
        Self {
            s: p.s,
            theta: p.theta,
            x: p.x,
            e: co_direction(p.theta),
            s_ang: p.s.powf(alpha.angular_exponent()),
            s_sp: p.s.powf(alpha.spatial_exponent()),
        }
    }

    // min(s,s')^e == min(s^e, s'^e) because powf is monotone for e ≥ 0, so
    // caching the powers reproduces the direct formula bit for bit.
    #[inline]
    fn terms(&self, q: &Self) -> DistanceTerms<T> {
        let dth = canonical_distance(self.theta, q.theta);
        let dx = [self.x[0] - q.x[0], self.x[1] - q.x[1]];
        let inner = dx[0] * self.e[0] + dx[1] * self.e[1];
        DistanceTerms {
            angular: self.s_ang.min(q.s_ang) * dth * dth,
            spatial: self.s_sp.min(q.s_sp) * (dx[0] * dx[0] + dx[1] * dx[1]),
            directional: self.s.min(q.s) * inner.abs(),
        }
    }

    #[inline]
    fn ratio(&self, q: &Self) -> T {
        (self.s / q.s).max(q.s / self.s)
    }

    #[inline]
    fn omega(&self, q: &Self) -> T {
        self.ratio(q) * (T::one() + self.terms(q).sum())
    }
}

/// The summands of `d_α(p, q)`.
pub fn distance_terms<T: Real>(alpha: Alpha<T>, p: &PhasePoint<T>, q: &PhasePoint<T>) -> DistanceTerms<T> {
    Prepared::new(alpha, p).terms(&Prepared::new(alpha, q))
}

/// `d_α(p, q)`. Not symmetric in general: the directional term uses `e_{θ_p}`.
pub fn dist_d<T: Real>(alpha: Alpha<T>, p: &PhasePoint<T>, q: &PhasePoint<T>) -> T {
    distance_terms(alpha, p, q).sum()
}

/// `ω_α(p, q) = M(p, q)(1 + d_α(p, q))`.
pub fn omega<T: Real>(alpha: Alpha<T>, p: &PhasePoint<T>, q: &PhasePoint<T>) -> T {
    Prepared::new(alpha, p).omega(&Prepared::new(alpha, q))
}

/// Variant whose directional term is `m² ⟨Δx, e_θ⟩² / (1 + m^{2(1-α)} |Δθ|²)`.
pub fn omega_tilde<T: Real>(alpha: Alpha<T>, p: &PhasePoint<T>, q: &PhasePoint<T>) -> T {
    let terms = distance_terms(alpha, p, q);
    let denom = T::one() + terms.angular;
    let last = terms.directional * terms.directional / denom;
    scale_ratio(p, q) * (T::one() + terms.angular + terms.spatial + last)
}

/// `½(ω_α(p, q) + ω_α(q, p))`.
pub fn omega_symmetrized<T: Real>(alpha: Alpha<T>, p: &PhasePoint<T>, q: &PhasePoint<T>) -> T {
    T::lit(0.5) * (omega(alpha, p, q) + omega(alpha, q, p))
}

/// `d̃_α(p, q) = m^{1-2α}|Δθ|² + m^{2α-1}‖Δx‖² + |⟨Δx, e_{θ_p}⟩|`.
pub fn dtilde<T: Real>(alpha: Alpha<T>, p: &PhasePoint<T>, q: &PhasePoint<T>) -> T {
    let m = p.s.min(q.s);
    let a = alpha.value();
    let two = T::lit(2.0);
    let dth = canonical_distance(p.theta, q.theta);
    let dx = [p.x[0] - q.x[0], p.x[1] - q.x[1]];
    let e = co_direction(p.theta);
    m.powf(T::one() - two * a) * dth * dth
        + m.powf(two * a - T::one()) * (dx[0] * dx[0] + dx[1] * dx[1])
        + (dx[0] * e[0] + dx[1] * e[1]).abs()
}

/// `ω_α` evaluated over a fixed list of points with per-point powers cached.
#[derive(Clone, Debug)]
pub struct AlphaDistance<T> {
    alpha: Alpha<T>,
    points: Vec<Prepared<T>>,
}

impl<T: Real> AlphaDistance<T> {
    pub fn new(alpha: Alpha<T>, points: &[PhasePoint<T>]) -> Self {
        Self {
            alpha,
            points: points.iter().map(|p| Prepared::new(alpha, p)).collect(),
        }
    }

    #[inline]
    pub fn alpha(&self) -> Alpha<T> {
        self.alpha
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `ω_α(λ_i, λ_j)`.
    #[inline]
    pub fn omega(&self, i: usize, j: usize) -> T {
        self.points[i].omega(&self.points[j])
    }

    #[inline]
    pub fn scale_ratio(&self, i: usize, j: usize) -> T {
        self.points[i].ratio(&self.points[j])
    }
}

/// Empirical index-distance constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomConstants<T> {
    /// `max ω(p,q) / ω(q,p)`
    pub c_s_hat: T,
    /// `max ω(p,q) / (ω(p,r) ω(r,q))`
    pub c_t_hat: T,
    pub samples: usize,
}

/// Uniform sampling box for phase points: log-uniform scale in `[s_min, s_max]`,
/// uniform angle, uniform location in `[-half_width, half_width]²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseBox<T> {
    pub s_min: T,
    pub s_max: T,
    pub half_width: T,
}

impl<T: Real> PhaseBox<T> {
    pub fn new(s_min: T, s_max: T, half_width: T) -> Result<Self> {
        if !(s_min > T::zero() && s_max >= s_min && s_max.is_finite()) {
            return domain("phase box needs 0 < s_min <= s_max < inf");
        }
        if !(half_width >= T::zero() && half_width.is_finite()) {
            return domain("phase box half width must be finite and nonnegative");
        }
        Ok(Self {
            s_min,
            s_max,
            half_width,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PhasePoint<T> {
        let u: f64 = rng.gen();
        let (lo, hi) = (self.s_min.as_f64().ln(), self.s_max.as_f64().ln());
        let s = (lo + u * (hi - lo)).exp();
        // (-π, π]
        let theta = std::f64::consts::PI - rng.gen::<f64>() * std::f64::consts::TAU;
        let w = self.half_width.as_f64();
        let x = [rng.gen_range(-w..=w), rng.gen_range(-w..=w)];
        PhasePoint::new(
            T::lit(s.clamp(self.s_min.as_f64(), self.s_max.as_f64())),
            T::lit(theta),
            [T::lit(x[0]), T::lit(x[1])],
        )
        .expect("sampled point is valid")
    }
}

/// Accumulates `(C_S, C_T)` estimates over triples. Pairs are taken in both
/// orders and triples in all six orders.
pub fn axiom_constants_of<'a, T, I>(alpha: Alpha<T>, triples: I) -> Result<AxiomConstants<T>>
where
    T: Real,
    I: IntoIterator<Item = &'a [PhasePoint<T>; 3]>,
{
    let mut acc = AxiomAccumulator::new();
    for triple in triples {
        acc.push(alpha, triple);
    }
    acc.finish()
}

struct AxiomAccumulator<T> {
    c_s: T,
    c_t: T,
    samples: usize,
}

impl<T: Real> AxiomAccumulator<T> {
    fn new() -> Self {
        Self {
            c_s: T::one(),
            c_t: T::one(),
            samples: 0,
        }
    }

    fn push(&mut self, alpha: Alpha<T>, triple: &[PhasePoint<T>; 3]) {
        let pts = triple.each_ref().map(|p| Prepared::new(alpha, p));
        let mut w = [[T::one(); 3]; 3];
        for (i, row) in w.iter_mut().enumerate() {
            for (j, value) in row.iter_mut().enumerate() {
                *value = pts[i].omega(&pts[j]);
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    self.c_s = self.c_s.max(w[i][j] / w[j][i]);
                    let k = 3 - i - j;
                    self.c_t = self.c_t.max(w[i][j] / (w[i][k] * w[k][j]));
                }
            }
        }
        self.samples += 1;
    }

    fn merge(mut self, other: Self) -> Self {
        self.c_s = self.c_s.max(other.c_s);
        self.c_t = self.c_t.max(other.c_t);
        self.samples += other.samples;
        self
    }

    fn finish(self) -> Result<AxiomConstants<T>> {
        if self.samples == 0 {
            return domain("axiom estimation needs at least one triple");
        }
        Ok(AxiomConstants {
            c_s_hat: self.c_s,
            c_t_hat: self.c_t,
            samples: self.samples,
        })
    }
}

/// Number of independent random streams the sampling work is split into.
/// Fixed so that results do not depend on the thread count.
const SAMPLING_SHARDS: usize = 16;

/// Splits `n` samples into fixed shards, each with its own ChaCha stream.
pub(crate) fn sharded_rngs(n: usize, seed: u64) -> Vec<(usize, ChaCha8Rng)> {
    (0..SAMPLING_SHARDS)
        .map(|shard| {
            let count = n / SAMPLING_SHARDS + usize::from(shard < n % SAMPLING_SHARDS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard as u64);
            (count, rng)
        })
        .collect()
}

/// Estimates `(C_S, C_T)` from `n_triples` seeded random triples drawn from `sampler`.
pub fn estimate_axiom_constants<T: Real>(
    alpha: Alpha<T>,
    sampler: &PhaseBox<T>,
    n_triples: usize,
    seed: u64,
) -> Result<AxiomConstants<T>> {
    if n_triples == 0 {
        return domain("axiom estimation needs at least one triple");
    }
    sharded_rngs(n_triples, seed)
        .into_par_iter()
        .map(|(count, mut rng)| {
            let mut acc = AxiomAccumulator::new();
            for _ in 0..count {
                let triple = [(); 3].map(|_| sampler.sample(&mut rng));
                acc.push(alpha, &triple);
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(AxiomAccumulator::new(), AxiomAccumulator::merge)
        .finish()
}

fn lemma_slack<T: Real>(scale: T) -> T {
    T::epsilon() * T::lit(16.0) * (T::one() + scale)
}

/// `|t-t'| + β min(t,t') ≤ |t-t''| + |t''-t'| + β min(t,t',t'')` and, for
/// `β ∈ [0, 2]`, the same with `min(t,t'')` and `min(t'',t')` on the right.
pub fn trimin_holds<T: Real>(t: T, t2: T, t3: T, beta: T) -> bool {
    let lhs = (t - t2).abs() + beta * t.min(t2);
    let base = (t - t3).abs() + (t3 - t2).abs();
    let slack = lemma_slack((t.abs() + t2.abs() + t3.abs()) * (T::one() + beta.abs()));
    let mut ok = lhs <= base + beta * t.min(t2).min(t3) + slack;
    if beta >= T::zero() && beta <= T::lit(2.0) {
        ok &= lhs <= base + beta * t.min(t3) + slack;
        ok &= lhs <= base + beta * t3.min(t2) + slack;
    }
    ok
}

/// `max(min(t,t''), min(t'',t')) ≤ min(max(t,t''), max(t'',t'))`.
pub fn maxmin_holds<T: Real>(t: T, t2: T, t3: T) -> bool {
    t.min(t3).max(t3.min(t2)) <= t.max(t3).min(t3.max(t2))
}

/// A triple `(p, p', p'')` on which `d̃_α` breaks the pseudo-triangle inequality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DtildeCounterexample<T> {
    pub p: PhasePoint<T>,
    pub p_prime: PhasePoint<T>,
    pub p_mid: PhasePoint<T>,
}

impl<T: Real> DtildeCounterexample<T> {
    /// `d̃(p,p') / (d̃(p,p'') + d̃(p'',p'))`.
    pub fn violation_factor(&self, alpha: Alpha<T>) -> T {
        dtilde(alpha, &self.p, &self.p_prime)
            / (dtilde(alpha, &self.p, &self.p_mid) + dtilde(alpha, &self.p_mid, &self.p_prime))
    }
}

/// Builds a triple with `d̃(p,p') > c · (d̃(p,p'') + d̃(p'',p'))`. None exists for `α = ½`.
pub fn dtilde_counterexample<T: Real>(alpha: Alpha<T>, c: T) -> Result<DtildeCounterexample<T>> {
    let a = alpha.value();
    let half = T::lit(0.5);
    if a == half {
        return domain("no counterexample exists: d̃ satisfies the pseudo-triangle inequality at alpha = 1/2");
    }
    if !(c >= T::one() && c.is_finite()) {
        return domain(format!("constant must be finite and >= 1, got {c}"));
    }
    let gap = (T::one() - T::lit(2.0) * a).abs();
    let s = c.powf(gap.recip()) + T::one();
    if !s.is_finite() {
        return domain("alpha too close to 1/2: required scale overflows");
    }
    let zero = [T::zero(); 2];
    if a < half {
        let turn = T::one();
        Ok(DtildeCounterexample {
            p: PhasePoint::new(s, T::zero(), zero)?,
            p_prime: PhasePoint::new(s, turn, zero)?,
            p_mid: PhasePoint::new(T::one(), turn, zero)?,
        })
    } else {
        let shifted = [T::zero(), T::one()];
        Ok(DtildeCounterexample {
            p: PhasePoint::new(s, T::zero(), zero)?,
            p_prime: PhasePoint::new(s, T::zero(), shifted)?,
            p_mid: PhasePoint::new(T::one(), T::zero(), shifted)?,
        })
    }
}
