use std::f64::consts::PI;
use std::sync::Arc;

use alphaloc::grid::{build_curvelet_grid, CurveletGridSpec, GridIndex};
use alphaloc::locmat::{
    bn_norm, pinv_spectral, spectral_gap, symmetric_eigendecomposition, LocalizedMatrix,
};
use alphaloc::molecule::*;
use alphaloc::{Alpha, Error, Grid, PhasePoint};
use approx::assert_relative_eq;
use num_complex::Complex;

fn alpha(v: f64) -> Alpha<f64> {
    Alpha::new(v).unwrap()
}

fn order(r: u32, m0: u32, n1: f64, n2: f64) -> MoleculeOrder<f64> {
    MoleculeOrder::new(r, m0, n1, n2).unwrap()
}

fn point(s: f64, theta: f64, x: [f64; 2]) -> PhasePoint<f64> {
    PhasePoint::new(s, theta, x).unwrap()
}

fn grid(a: f64, j_max: u32, k_box: u32, tau: f64, c_l: f64) -> Arc<Grid> {
    let mut spec = CurveletGridSpec::new(alpha(a), 2.0, tau, j_max, k_box);
    spec.angular_count_coeff = c_l;
    Arc::new(build_curvelet_grid(&spec).unwrap())
}

#[test]
fn builtin_profile_shape() {
    let p0 = make_profile(order(2, 0, 4.0, 4.0));
    assert!(p0.eval([0.0, 0.0]) > 0.0);
    assert_relative_eq!(p0.eval([0.0, 0.0]), 1.0 / PI.sqrt(), max_relative = 1e-9);

    let p2 = make_profile(order(2, 2, 4.0, 4.0));
    assert_eq!(p2.eval([0.0, 0.0]), 0.0);
    // Second-order vanishing: â(t, 0)/t² tends to a nonzero limit.
    let c = p2.eval([1e-3, 0.0]) / 1e-6;
    assert!(c > 0.0);
    assert_relative_eq!(p2.eval([2e-3, 0.0]) / 4e-6, c, max_relative = 1e-5);
    assert!(p2.eval([1e-3, 0.0]) / 1e-3 < 1e-2);
}

#[test]
fn profile_is_normalized_on_lattice() {
    let lattice = FrequencyLattice::new(10.0, 0.1).unwrap();
    for m0 in [0, 1, 3] {
        let s = synthesize_molecule(&point(1.0, 0.0, [0.0, 0.0]), alpha(0.5), &make_profile(order(2, m0, 4.0, 4.0)), &lattice)
            .unwrap();
        assert!((s.l2_norm_sq() - 1.0).abs() <= 1e-3, "M0 = {m0}: {}", s.l2_norm_sq());
    }
}

#[test]
fn condition_margins_are_finite_and_nearly_uniform() {
    let profile = make_profile(order(2, 3, 4.0, 4.0));
    let lattice = FrequencyLattice::new(20.0, 0.1).unwrap();
    let margins: Vec<f64> = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&s| {
            let r = molecule_condition_check(&profile, s, alpha(0.5), &lattice, DEFAULT_MARGIN_CAP).unwrap();
            assert!(r.holds && r.margin.is_finite() && r.margin > 0.0, "{r:?}");
            r.margin
        })
        .collect();
    let (lo, hi) = margins.iter().fold((f64::MAX, 0.0f64), |(lo, hi), &m| (lo.min(m), hi.max(m)));
    assert!(hi <= 2.0 * lo, "margins {margins:?}");
}

#[test]
fn flat_profile_fails_condition() {
    let flat = MoleculeProfile::custom(order(3, 0, 2.0, 0.0), |xi: [f64; 2]| {
        if xi[0] * xi[0] + xi[1] * xi[1] <= 400.0 {
            1.0
        } else {
            0.0
        }
    });
    let small = FrequencyLattice::new(5.0, 0.1).unwrap();
    let large = FrequencyLattice::new(20.0, 0.1).unwrap();
    let m_small = molecule_condition_check(&flat, 1.0, alpha(0.5), &small, DEFAULT_MARGIN_CAP).unwrap();
    let m_large = molecule_condition_check(&flat, 1.0, alpha(0.5), &large, DEFAULT_MARGIN_CAP).unwrap();
    assert!(m_large.margin > 100.0 * m_small.margin);
    assert!(!m_large.holds);
}

#[test]
fn zero_moment_order_reduces_to_decay() {
    let profile = make_profile(order(2, 0, 4.0, 4.0));
    let lattice = FrequencyLattice::new(12.0, 0.1).unwrap();
    let r = molecule_condition_check(&profile, 3.0, alpha(0.5), &lattice, DEFAULT_MARGIN_CAP).unwrap();
    assert!(r.holds);
    assert_eq!(molecule_bound(&profile.order, 3.0, alpha(0.5), [0.0, 0.0]), 1.0);
}

#[test]
fn coarse_lattice_rejected() {
    let profile = make_profile(order(2, 3, 4.0, 4.0));
    let coarse = FrequencyLattice::new(10.0, 0.2).unwrap();
    assert!(matches!(
        molecule_condition_check(&profile, 1.0, alpha(0.5), &coarse, DEFAULT_MARGIN_CAP),
        Err(Error::Domain(_))
    ));
    assert!(matches!(FrequencyLattice::new(100.0, 0.1), Err(Error::Size { .. })));
}

#[test]
fn identity_transformation_reproduces_profile() {
    let profile = make_profile(order(2, 3, 4.0, 4.0));
    let lattice = FrequencyLattice::new(4.0, 0.25).unwrap();
    let s = synthesize_molecule(&point(1.0, 0.0, [0.0, 0.0]), alpha(0.3), &profile, &lattice).unwrap();
    let n = lattice.axis_len();
    for i in 0..n {
        for j in 0..n {
            let want = profile.eval([lattice.coord(i), lattice.coord(j)]);
            assert_eq!(s.value(i, j), Complex::new(want, 0.0));
        }
    }
}

#[test]
fn translation_only_changes_phase() {
    let profile = make_profile(order(2, 3, 4.0, 4.0));
    let lattice = FrequencyLattice::new(6.0, 0.2).unwrap();
    let a = synthesize_molecule(&point(2.0, 0.4, [0.0, 0.0]), alpha(0.5), &profile, &lattice).unwrap();
    let b = synthesize_molecule(&point(2.0, 0.4, [1.3, -0.7]), alpha(0.5), &profile, &lattice).unwrap();
    let n = lattice.axis_len();
    for i in (0..n).step_by(3) {
        for j in (0..n).step_by(3) {
            assert_relative_eq!(a.value(i, j).norm(), b.value(i, j).norm(), max_relative = 1e-12, epsilon = 1e-300);
        }
    }
}

#[test]
fn dilation_law_second_moments() {
    let profile = make_profile(order(2, 3, 4.0, 4.0));
    let lattice = FrequencyLattice::new(30.0, 0.15).unwrap();
    let base = synthesize_molecule(&point(1.0, 0.0, [0.0, 0.0]), alpha(0.5), &profile, &lattice).unwrap();
    let wide = synthesize_molecule(&point(4.0, 0.0, [0.0, 0.0]), alpha(0.5), &profile, &lattice).unwrap();
    let (m0, m1) = (base.second_moments(), wide.second_moments());
    assert!((m1[0] / m0[0] / 16.0 - 1.0).abs() <= 0.05);
    assert!((m1[1] / m0[1] / 4.0 - 1.0).abs() <= 0.05);
}

/// Direct quadrature of `(2π)^{-1} ∫ m(x) e^{-i⟨x,ξ⟩} dx` for the Gaussian
/// profile, whose spatial generator is `a(x) = e^{-|x|²/2}/√π`.
fn direct_transform(p: &PhasePoint<f64>, a: Alpha<f64>, xi: [f64; 2]) -> Complex<f64> {
    let s = p.scale();
    let (sin, cos) = p.theta().sin_cos();
    let x0 = p.location();
    let sa = s.powf(a.value());
    let h = 0.01;
    let half = 600;
    let mut acc = Complex::new(0.0, 0.0);
    for i in -half..=half {
        for j in -half..=half {
            let x = [x0[0] + i as f64 * h, x0[1] + j as f64 * h];
            let d = [x[0] - x0[0], x[1] - x0[1]];
            let y = [s * (cos * d[0] - sin * d[1]), sa * (sin * d[0] + cos * d[1])];
            let m = s.powf((1.0 + a.value()) / 2.0) * (-(y[0] * y[0] + y[1] * y[1]) / 2.0).exp() / PI.sqrt();
            acc += Complex::from_polar(m * h * h, -(x[0] * xi[0] + x[1] * xi[1]));
        }
    }
    acc / (2.0 * PI)
}

#[test]
fn transformation_law_matches_direct_quadrature() {
    let a = alpha(0.5);
    let profile = make_profile(order(0, 0, 0.0, 0.0));
    let p = point(2.0, 0.6, [0.3, -0.2]);
    for xi in [[0.0, 0.0], [1.0, 0.5], [-2.0, 1.5], [3.0, -1.0]] {
        let fast = molecule_hat(&profile, a, &p, xi);
        let slow = direct_transform(&p, a, xi);
        assert!((fast - slow).norm() <= 1e-6, "ξ = {xi:?}: {fast} vs {slow}");
    }
}

#[test]
fn single_molecule_gram_is_one() {
    let g = grid(0.5, 0, 0, 1.0, 0.5);
    let sys = MoleculeSystem::new(g, alpha(0.5), make_profile(order(2, 3, 4.0, 4.0)), FrequencyLattice::new(8.0, 0.1).unwrap())
        .unwrap();
    let gm = gram_matrix(&sys).unwrap();
    assert!((gm.entries()[(0, 0)] - 1.0).abs() <= 1e-3);
}

#[test]
fn gaussian_pair_inner_products() {
    let g = grid(0.5, 0, 1, 1.0, 0.5);
    assert_eq!(g.len(), 9);
    let sys = MoleculeSystem::new(g.clone(), alpha(0.5), make_profile(order(0, 0, 0.0, 0.0)), FrequencyLattice::new(9.0, 0.1).unwrap())
        .unwrap();
    let gm = gram_matrix(&sys).unwrap();
    let at = |k: [i32; 2]| g.position(&GridIndex { j: 0, l: 0, k }).unwrap();
    let origin = at([0, 0]);
    for k in [[1, 0], [0, 1], [1, 1], [-1, 1]] {
        let other = at(k);
        let dx2 = g.points()[other].location().iter().map(|v| v * v).sum::<f64>();
        assert!((gm.entries()[(origin, other)] - (-dx2 / 4.0).exp()).abs() <= 1e-3);
    }
    assert_eq!(gm.entries().asymmetry(), 0.0);
}

#[test]
fn gram_symmetric_psd_and_plancherel() {
    let a = alpha(0.5);
    let g = grid(0.5, 2, 1, 1.0, 1.0);
    let lattice = FrequencyLattice::for_scales(4.0).unwrap();
    let sys = MoleculeSystem::new(g.clone(), a, make_profile(order(2, 3, 4.0, 4.0)), lattice).unwrap();
    let gm = gram_matrix(&sys).unwrap();
    assert_eq!(gm.entries().asymmetry(), 0.0);
    let spec = symmetric_eigendecomposition(&gm).unwrap();
    let top = *spec.eigenvalues().last().unwrap();
    assert!(spec.eigenvalues()[0] >= -1e-10 * top);
    for o in [0, g.len() / 2, g.len() - 1] {
        assert_relative_eq!(gm.entries()[(o, o)], sys.samples(o).unwrap().l2_norm_sq(), max_relative = 1e-12);
    }
    let mut meta = Vec::new();
    sys.write_metadata_csv(&mut meta).unwrap();
    assert_eq!(String::from_utf8(meta).unwrap().lines().count(), g.len() + 1);
}

#[test]
fn system_size_capped() {
    let g = grid(0.5, 3, 4, 1.0, 1.0);
    assert!(g.len() > MAX_MOLECULES);
    let lattice = FrequencyLattice::new(4.0, 0.2).unwrap();
    assert!(matches!(
        MoleculeSystem::new(g, alpha(0.5), make_profile(order(2, 3, 4.0, 4.0)), lattice),
        Err(Error::Size { .. })
    ));
}

#[test]
fn localization_check_examples() {
    let a = alpha(0.5);
    let g = grid(0.5, 2, 2, 1.0, 1.0);
    let interior = g.interior();
    let id = LocalizedMatrix::identity(g.clone());
    for n in [1.0, 4.0, 9.0] {
        assert!(localization_check(&id, a, n, &interior).unwrap().holds);
    }
    let p5 = LocalizedMatrix::power_law(g.clone(), a, 5.0, 1.0);
    assert!(localization_check(&p5, a, 5.0, &interior).unwrap().holds);
    assert!(!localization_check(&p5, a, 6.0, &interior).unwrap().holds);
}

fn gap(a: f64, b: f64, eps: f64) -> GapSpec<f64> {
    GapSpec::new(a, b, eps).unwrap()
}

#[test]
fn dd_without_coupling_is_diagonal() {
    let g = grid(0.5, 2, 1, 1.0, 1.0);
    let m = synth_localized_dd(g.clone(), alpha(0.5), 4.0, &gap(1.0, 3.0, 0.0), 5).unwrap();
    for i in 0..g.len() {
        for j in 0..g.len() {
            let v = m.entries()[(i, j)];
            if i == j {
                assert!((1.0..=3.0).contains(&v));
            } else {
                assert_eq!(v, 0.0);
            }
        }
    }
}

#[test]
fn dd_spectrum_inside_gap() {
    let a = alpha(0.5);
    let g = grid(0.5, 2, 2, 1.0, 1.0);
    let eps = 0.9 * max_feasible_epsilon(&g, a, 4.0, 1.0, 3.0);
    let m = synth_localized_dd(g.clone(), a, 4.0, &gap(1.0, 3.0, eps), 11).unwrap();
    assert_eq!(m.entries().asymmetry(), 0.0);
    let spec = symmetric_eigendecomposition(&m).unwrap();
    assert!(spec.eigenvalues()[0] >= 1.0 - 1e-12);
    assert!(*spec.eigenvalues().last().unwrap() <= 3.0 + 1e-12);
    assert!(bn_norm(&m, a, 4.0).unwrap().value <= 3.0f64.max(eps) * (1.0 + 1e-9));
    let again = synth_localized_dd(g, a, 4.0, &gap(1.0, 3.0, eps), 11).unwrap();
    assert_eq!(again.entries(), m.entries());
}

#[test]
fn dd_rejects_infeasible_gap() {
    let a = alpha(0.5);
    let g = grid(0.5, 2, 2, 1.0, 1.0);
    let eps = 1.01 * max_feasible_epsilon(&g, a, 4.0, 1.0, 3.0);
    assert!(matches!(synth_localized_dd(g.clone(), a, 4.0, &gap(1.0, 3.0, eps), 1), Err(Error::Domain(_))));
    assert!(synth_localized_dd(g, a, 1.5, &gap(1.0, 3.0, 0.0), 1).is_err());
}

#[test]
fn rank_deficient_examples() {
    let a = alpha(0.5);
    let g = grid(0.5, 2, 1, 1.0, 1.0);
    let spec_gap = gap(1.0, 3.0, 0.5 * max_feasible_epsilon(&g, a, 4.0, 1.0, 3.0));
    let base = synth_localized_dd(g.clone(), a, 4.0, &spec_gap, 3).unwrap();
    let same = synth_rank_deficient(g.clone(), a, 4.0, &spec_gap, 0, 3).unwrap();
    assert_eq!(same.matrix.entries(), base.entries());

    let rd = synth_rank_deficient(g.clone(), a, 4.0, &spec_gap, 1, 3).unwrap();
    let s = symmetric_eigendecomposition(&rd.matrix).unwrap();
    assert_eq!(spectral_gap(&s, 1e-8).unwrap().kernel_dim, 1);
    assert!(rd.bn_norm.is_finite());

    let p = pinv_spectral(&rd.matrix, 1e-8).unwrap();
    let a2p = rd.matrix.matmul(&rd.matrix).unwrap().matmul(&p).unwrap();
    let err = a2p.sub(&rd.matrix).unwrap().entries().max_abs();
    assert!(err <= 1e-8 * rd.matrix.entries().max_abs());
    assert!(synth_rank_deficient(g.clone(), a, 4.0, &spec_gap, g.len(), 3).is_err());
}
