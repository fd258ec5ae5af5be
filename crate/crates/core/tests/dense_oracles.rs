//! Cross-checks against dense matrix constructions on small chains.

use nalgebra::DMatrix;
use num_complex::Complex64;

use spinlaw::finite::{
    commutator_norm_check, diagonal_evolve, partial_trace, Pauli, SiteSpec, SiteState, SpinState,
};
use spinlaw::interaction::CouplingModel;
use spinlaw::product::{dyson_readings, sensitivity_scan, ScanTarget};

type M = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli(op: Pauli) -> M {
    match op {
        Pauli::X => M::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        Pauli::Y => M::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        Pauli::Z => M::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
    }
}

/// `op` at `site` of an `n`-site chain. Site x is bit x of the basis index,
/// so site 0 is the rightmost Kronecker factor.
fn embed(op: &M, site: usize, n: usize) -> M {
    let mut out = M::identity(1, 1);
    for x in (0..n).rev() {
        let factor = if x == site { op.clone() } else { M::identity(2, 2) };
        out = out.kronecker(&factor);
    }
    out
}

fn hamiltonian(model: &CouplingModel, n: usize) -> M {
    let z = pauli(Pauli::Z);
    let mut h = M::zeros(1 << n, 1 << n);
    for x in 0..n {
        for y in x + 1..n {
            let j = model.coupling_at((y - x) as i64);
            h += embed(&z, x, n) * embed(&z, y, n) * c(j, 0.0);
        }
    }
    h
}

fn propagator(h: &M, t: f64) -> M {
    (h * c(0.0, -t)).exp()
}

#[test]
fn evolution_matches_matrix_exponential() {
    let model = CouplingModel::exponential(1.7).unwrap();
    for spec in ["+x-x+z", "+x+x+x-x", "-z+x-x+x+z"] {
        let spec: SiteSpec = spec.parse().unwrap();
        let n = spec.len();
        let psi = SpinState::product(&spec).unwrap();
        let h = hamiltonian(&model, n);
        for &t in &[0.3, 2.5, -7.0] {
            let dense = propagator(&h, t) * DMatrix::from_column_slice(1 << n, 1, psi.amplitudes());
            let fast = diagonal_evolve(&psi, &model, t).unwrap();
            for (a, b) in fast.amplitudes().iter().zip(dense.iter()) {
                assert!((a - b).norm() < 1e-12, "{spec} t={t}");
            }
        }
    }
}

#[test]
fn two_site_phases_match_dense_exponential() {
    let model = CouplingModel::table([(1, -1.0)]).unwrap();
    let u = propagator(&hamiltonian(&model, 2), 0.9);
    for k in 0..4 {
        let aligned = k == 0 || k == 3;
        let expected = Complex64::from_polar(1.0, if aligned { 0.9 } else { -0.9 });
        assert!((u[(k, k)] - expected).norm() < 1e-13);
    }
}

fn dense_commutator_norm(model: &CouplingModel, a: usize, b: usize, op: Pauli, t: f64, n: usize) -> f64 {
    let u = propagator(&hamiltonian(model, n), t);
    let (sa, sb) = (embed(&pauli(op), a, n), embed(&pauli(op), b, n));
    let ta = u.adjoint() * sa * &u;
    let comm = &ta * &sb - &sb * &ta;
    comm.singular_values().max()
}

#[test]
fn commutator_norm_matches_dense_singular_value() {
    let model = CouplingModel::exponential(2.0).unwrap();
    for (a, b, op, t, n) in [
        (0, 4, Pauli::X, 0.5, 8),
        (0, 4, Pauli::X, 1.0, 8),
        (0, 4, Pauli::X, 2.0, 8),
        (1, 2, Pauli::Y, 0.7, 5),
        (3, 0, Pauli::X, 3.1, 6),
        (2, 4, Pauli::Z, 1.3, 5),
    ] {
        let fast = commutator_norm_check(&model, a, b, op, t, n).unwrap();
        let dense = dense_commutator_norm(&model, a, b, op, t, n);
        assert!((fast.lhs - dense).abs() < 1e-10, "{a} {b} {op:?} t={t}: {} vs {dense}", fast.lhs);
        assert!(fast.lhs <= fast.bound);
    }
}

#[test]
fn partial_trace_matches_kronecker_reduction() {
    // random-ish entangled state on 4 sites
    let amps: Vec<Complex64> = (0..16)
        .map(|k| c((k as f64 * 0.7).sin(), (k as f64 * 1.3).cos()))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let psi = SpinState::new(4, amps.iter().map(|a| a / norm).collect()).unwrap();
    let v = DMatrix::from_column_slice(16, 1, psi.amplitudes());
    let full = &v * v.adjoint();
    // keep site 1 and 3: ρ_{a,a'} = Σ_rest ⟨a,rest|ρ|a',rest⟩
    let rho = partial_trace(&psi, &[1, 3]).unwrap();
    let scatter = |a: usize, r: usize| ((a & 1) << 1) | ((a >> 1) << 3) | (r & 1) | ((r >> 1) << 2);
    for a in 0..4 {
        for a2 in 0..4 {
            let want: Complex64 = (0..4).map(|r| full[(scatter(a, r), scatter(a2, r))]).sum();
            assert!((rho.matrix()[(a, a2)] - want).norm() < 1e-14);
        }
    }
}

#[test]
fn full_chain_entropy_zero_from_dense_spectrum() {
    let model = CouplingModel::exponential(std::f64::consts::E).unwrap();
    let psi = SpinState::product(&SiteSpec::uniform(SiteState::Plus, 6)).unwrap();
    for &t in &[0.0, 0.8, 13.0] {
        let out = diagonal_evolve(&psi, &model, t).unwrap();
        let v = DMatrix::from_column_slice(64, 1, out.amplitudes());
        let eig = (&v * v.adjoint()).symmetric_eigenvalues();
        let s: f64 = eig.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.ln()).sum();
        assert!(s.abs() < 1e-9);
    }
}

#[test]
fn dyson_readings_are_reported_side_by_side() {
    for &t in &[0.5, 3.0, 20.0] {
        let r = dyson_readings(1.2, t, 1e-10).unwrap();
        let (rescaled, squared) = r.disagreement();
        assert!(rescaled < 1e-8, "t={t}: {rescaled}");
        assert!(squared.is_finite());
    }
    // the two readings part ways away from t = 0
    let r = dyson_readings(1.2, 3.0, 1e-10).unwrap();
    let log_gap = (r.correlator.log_magnitude - r.cloitre_squared.log_magnitude).abs();
    assert!(log_gap > 0.1, "{log_gap}");
}

#[test]
fn small_delta_differences_scale_linearly() {
    let targets = [
        ScanTarget::Cloitre { p: 0.5, s: 1.2 },
        ScanTarget::Correlator(CouplingModel::exponential(2.0).unwrap()),
        ScanTarget::Correlator(CouplingModel::dyson(1.5).unwrap()),
    ];
    for target in &targets {
        let diffs: Vec<f64> = [1e-4, 1e-5, 1e-6]
            .iter()
            .map(|&d| sensitivity_scan(target, &[0.7], d, 1e-13).unwrap()[0].diff.clone().unwrap() / d)
            .collect();
        for w in diffs.windows(2) {
            assert!((w[0] / w[1] - 1.0).abs() < 0.1, "{target:?}: {diffs:?}");
        }
    }
}

#[test]
fn exponential_scan_respects_closed_form_derivative() {
    // |F(t+δ) − F(t)| ≤ δ · max |F'| with F = (sin 2t / 2t)², F' bounded by 4/(2t)² + 4/(2t)
    let target = ScanTarget::Correlator(CouplingModel::exponential(2.0).unwrap());
    let times: Vec<f64> = (1..=40).map(|i| 5.0 * i as f64).collect();
    let delta = 0.01;
    for row in sensitivity_scan(&target, &times, delta, 1e-12).unwrap() {
        let x = 2.0 * row.t;
        let envelope = delta * (4.0 / (x * x) + 4.0 / x);
        assert!(row.diff.unwrap() <= envelope + 1e-12, "t={}", row.t);
    }
}

#[test]
fn dyson_scan_at_doubling_times_stays_bounded() {
    let target = ScanTarget::Cloitre { p: 0.5, s: 1.2 };
    let times: Vec<f64> = (0..=10).map(|k| 2f64.powi(k)).collect();
    let rows = sensitivity_scan(&target, &times, 1.0, 1e-8).unwrap();
    assert_eq!(rows.len(), 11);
    for (row, &t) in rows.iter().zip(&times) {
        assert_eq!(row.t, t);
        let d = row.diff.clone().unwrap();
        assert!((0.0..=2.0).contains(&d));
    }
}
