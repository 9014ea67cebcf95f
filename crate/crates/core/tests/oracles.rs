//! Values checked against independent computations: brute-force Simpson
//! quadrature, hand-solved algebra and closed forms evaluated directly.

use std::f64::consts::PI;

use soliton_jj::approx::{self, Fit};
use soliton_jj::dynamics;
use soliton_jj::functionals::{self, EvalKind};
use soliton_jj::metrology;
use soliton_jj::steady::{self, Stability};
use soliton_jj::{derive_params, Error, Evaluator, FunctionalMode, State, ThetaBranch};

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// Composite Simpson with 2^20 panels on |x| ≤ 80.
fn simpson(f: impl Fn(f64) -> f64) -> f64 {
    let n = 1usize << 20;
    let (a, b) = (-80.0, 80.0);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

fn i_ref(z: f64, d: f64) -> f64 {
    simpson(|x| (sech((1.0 - z) * (x - d)) * sech((1.0 + z) * (x + d))).powi(2))
}

fn j_ref(z: f64, d: f64) -> f64 {
    simpson(|x| {
        let a = sech((1.0 - z) * (x - d));
        let b = sech((1.0 + z) * (x + d));
        a * b * ((1.0 + z).powi(2) * b * b + (1.0 - z).powi(2) * a * a)
    })
}

#[test]
fn functionals_match_simpson() {
    for (z, d) in [(0.3f64, 0.5), (0.0, 0.0), (-0.7, 1.2), (0.95, 2.0), (0.5, 4.0)] {
        let (i, j) = functionals::eval_ij(z, d, 1e-12).unwrap();
        let (ri, rj) = (i_ref(z, d), j_ref(z, d));
        assert!((i - ri).abs() <= 1e-9 * ri.max(1e-3), "I({z},{d}) = {i} vs {ri}");
        assert!((j - rj).abs() <= 1e-9 * rj.max(1e-3), "J({z},{d}) = {j} vs {rj}");
    }
}

#[test]
fn functionals_at_contact() {
    // ∫sech⁴ = 4/3, so I(0,0) = 4/3 and J(0,0) = 2·4/3.
    let (i, j) = functionals::eval_ij(0.0f64, 0.0, 1e-12).unwrap();
    assert!((i - 4.0 / 3.0).abs() < 1e-11);
    assert!((j - 8.0 / 3.0).abs() < 1e-11);
}

#[test]
fn limit_branch_values() {
    for mode in [FunctionalMode::Auto, FunctionalMode::Quadrature, FunctionalMode::Sextic] {
        for z in [1.0, -1.0, 1.0 - 1e-10] {
            let v = functionals::eval_all(z, 0.8, 1e-10, mode).unwrap();
            assert_eq!(v.mode, EvalKind::Limit);
            assert_eq!(v.i_val, 1.0);
            assert_eq!(v.j_val, PI);
        }
    }
}

#[test]
fn derivative_against_wider_difference() {
    for (z, d) in [(0.2f64, 0.4), (-0.6, 2.5), (0.9, 1.0)] {
        let v = functionals::eval_all(z, d, 1e-12, FunctionalMode::Quadrature).unwrap();
        let h = 1e-4;
        let di = (functionals::eval_i(z + h, d, 1e-13).unwrap() - functionals::eval_i(z - h, d, 1e-13).unwrap()) / (2.0 * h);
        let dj = (functionals::eval_j(z + h, d, 1e-13).unwrap() - functionals::eval_j(z - h, d, 1e-13).unwrap()) / (2.0 * h);
        assert!((v.di_dz - di).abs() <= 1e-4 * di.abs().max(1e-2), "dI {z} {d}: {} vs {di}", v.di_dz);
        assert!((v.dj_dz - dj).abs() <= 1e-4 * dj.abs().max(1e-2), "dJ {z} {d}: {} vs {dj}", v.dj_dz);
    }
}

#[test]
fn large_separation_decay_is_small() {
    let (i, j) = functionals::large_delta_decay(10.0f64).unwrap();
    let (ri, rj) = (i_ref(0.0, 10.0), j_ref(0.0, 10.0));
    assert!((i - ri).abs() < 1e-14 && (j - rj).abs() < 1e-14);
    assert!(i < 1e-14 && j < 1e-7 && i > 0.0 && j > 0.0, "{i} {j}");
    assert!(functionals::large_delta_decay(2.0).is_err());
}

#[test]
fn polynomial_reference_values() {
    // At z = 0, Δ = 0 only the constant coefficients survive.
    let v = approx::poly_values(0.0f64, 0.0, Some(Fit::Quartic)).unwrap();
    assert_eq!((v.i_val, v.j_val), (1.33, 2.7));
    assert!((v.i_val - 4.0 / 3.0).abs() < 0.01 && (v.j_val - 8.0 / 3.0).abs() < 0.05);
    assert!(approx::regime_for(1.6).is_err());
    assert_eq!(approx::regime_for(0.6).unwrap().fit, Fit::Sextic);
    assert_eq!(approx::regime_for(0.59).unwrap().fit, Fit::Quartic);
}

#[test]
fn linear_frequencies_at_contact() {
    let p = derive_params(0.4f64, 10, 0.0, 0.0).unwrap();
    let z = dynamics::linear_zero_phase(&p).unwrap();
    assert!((z.omega - 13.4 * 0.37f64.sqrt()).abs() < 1e-12);
    assert!((z.omega - 8.15).abs() < 0.01);
    let pi = dynamics::linear_pi_phase(&p).unwrap();
    assert!((pi.omega - 2f64.sqrt()).abs() < 1e-12);
    assert!(dynamics::linear_zero_phase(&p.with_delta(0.6).unwrap()).is_err());
    assert!(dynamics::linear_bifurcation(&p.with_delta(0.5).unwrap()).is_err());
    let (a, b) = dynamics::linear_bifurcation(&p.with_delta(0.6267).unwrap()).unwrap();
    // Split ±(1.2 − 18·0.04/ω²)·0.2 at ωr = 0.
    let w2 = a.omega * a.omega;
    assert!((a.offset - (1.2 - 0.72 / w2) * 0.2).abs() < 1e-9);
    assert!((a.offset + b.offset).abs() < 1e-15);
}

#[test]
fn qubit_coefficients_solve_orthonormality() {
    // With r = c2/c1 orthogonality is 2r = η(1 + r²); bisect it, then normalize.
    for eta in [0.0, 0.1, 0.5, 0.9, 0.99] {
        let (mut a, mut b) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if 2.0 * m - eta * (1.0 + m * m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let r = 0.5 * (a + b);
        let c1 = 1.0 / (1.0 + r * r - 2.0 * r * eta).sqrt();
        let (k1, k2) = metrology::qubit_coefficients(eta).unwrap();
        assert!((k1 - c1).abs() < 1e-10 && (k2 - r * c1).abs() < 1e-10, "eta {eta}");
    }
}

#[test]
fn gram_identity_in_explicit_vectors() {
    for eta in [0.0, 0.3, 0.5, 0.8, 0.97] {
        let (c1, c2) = metrology::qubit_coefficients(eta).unwrap();
        let f1 = [1.0, 0.0];
        let f2 = [eta, (1.0f64 - eta * eta).sqrt()];
        let p0 = [c1 * f1[0] - c2 * f2[0], c1 * f1[1] - c2 * f2[1]];
        let p1 = [c2 * f1[0] - c1 * f2[0], c2 * f1[1] - c1 * f2[1]];
        let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
        assert!((dot(p0, p0) - 1.0).abs() < 1e-10);
        assert!((dot(p1, p1) - 1.0).abs() < 1e-10);
        assert!(dot(p0, p1).abs() < 1e-10);
        let g = metrology::gram_matrix(c1, c2, eta);
        assert!((g[0][0] - dot(p0, p0)).abs() < 1e-12 && (g[0][1] - dot(p0, p1)).abs() < 1e-12);
    }
}

#[test]
fn povm_second_element_is_scaled_projector() {
    let [_, e2, _] = metrology::povm_elements(0.4).unwrap();
    let k = 2f64.sqrt() / (1.0 + 2f64.sqrt());
    // E₂ (|1⟩ − |0⟩) = k (|1⟩ − |0⟩), E₂ (|0⟩ + |1⟩) = 0.
    let v = [-1.0, 1.0];
    for i in 0..2 {
        let w = e2[i][0].re * v[0] + e2[i][1].re * v[1];
        assert!((w - k * v[i]).abs() < 1e-15);
        assert!((e2[i][0].re + e2[i][1].re).abs() < 1e-15);
    }
    assert!((k - 0.5858).abs() < 1e-4);
}

#[test]
fn phase_sensitivity_by_finite_difference() {
    // ⟨Σ₂⟩(Γ) = cos(NΓ) differentiated numerically.
    let (n, g) = (7u64, 0.3f64);
    let mean = |g: f64| metrology::sigma_expectations(n as f64 * g).1;
    let h = 1e-6;
    let slope = (mean(g + h) - mean(g - h)) / (2.0 * h);
    let var = 1.0 - mean(g).powi(2);
    let est = var.sqrt() / slope.abs();
    assert!((est - 1.0 / 7.0).abs() < 1e-8);
    assert!((metrology::phase_sensitivity(n, g).unwrap() - 1.0 / 7.0).abs() < 1e-12);
    assert_eq!(metrology::phase_sensitivity(100, 0.0).unwrap(), 0.01);
    assert!((metrology::phase_sensitivity(1, 0.7f64).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn noon_phase_values() {
    let t0 = metrology::noon_theta_prime(0.0).unwrap();
    assert!((t0 - (1.0 / PI).acos()).abs() < 1e-15);
    assert!((t0 - 1.2468).abs() < 1e-4);
    let w = metrology::noon_window::<f64>();
    let edge = metrology::noon_theta_prime(w).unwrap();
    assert!((edge - 0.5 * ((4.0 - 2.0 * PI) / (2.0 * PI)).acos()).abs() < 1e-12);
    assert!(matches!(metrology::noon_theta_prime(5.0), Err(Error::OutOfRange { .. })));
    let r = metrology::noon_interference(1, 0.0).unwrap();
    assert!((r.sigma_mean - 1.0 / PI).abs() < 1e-12);
    assert!(r.sensitivity.is_none());
}

#[test]
fn omega_sensitivity_closed_form() {
    let (n, w, l) = (100u64, 4.2f64, 1.0f64);
    let a = (4.0 * PI * PI - (2.0 + w).powi(2)).sqrt();
    let b = (4.0 * PI * PI - (2.0 - w).powi(2)).sqrt();
    let direct = 2.0 * l / n as f64 * (a * b / (a - b)).abs();
    assert!((metrology::omega_sensitivity(n, w, l).unwrap() - direct).abs() < 1e-15);
    let border = 10.0 * l / n as f64 * 1.65 * (4.28 - w).sqrt() / (1.65 - (4.28 - w).sqrt());
    assert!((metrology::omega_sensitivity_border(n, w, l).unwrap() - border).abs() < 1e-15);
    assert!(matches!(metrology::omega_sensitivity(n, 0.0, l), Err(Error::Singular(_))));
}

#[test]
fn closed_form_overlap_examples() {
    assert!((metrology::overlap_epsilon(0.0f64, 0.0).unwrap() - 1.0).abs() < 1e-15);
    let z0 = 0.412f64;
    let e = metrology::overlap_epsilon(z0, -z0).unwrap();
    let z2 = z0 * z0;
    assert!((e - (1.0 - z2) * (1.0 - 0.21 * z2)).abs() < 1e-12);
    assert!((e - 0.8007).abs() < 2e-3);
}

#[test]
fn exact_overlap_by_simpson() {
    let p = derive_params(0.4f64, 10, 0.0, 0.0).unwrap();
    let z0 = 0.412;
    let e = metrology::overlap_epsilon_exact(z0, -z0, &p, 1e-12).unwrap();
    // uN = 4: ψ = ½(1∓z) sech((1∓z)x) on both sides at Δ = 0.
    let side = |s: f64| simpson(|x| 0.25 * (1.0 + s * z0) * (1.0 - s * z0) * sech((1.0 + s * z0) * x) * sech((1.0 - s * z0) * x));
    let r = side(1.0) + side(-1.0);
    assert!((e - r).abs() < 1e-9, "{e} vs {r}");
    assert!((e - 0.8007).abs() / 0.8007 < 0.03);
    let same = metrology::overlap_epsilon_exact(0.3, 0.3, &p, 1e-12).unwrap();
    assert!((same - 1.0).abs() < 1e-10);
}

#[test]
fn eta_in_log_space() {
    let (eta, under) = metrology::eta_of(0.9f64, 10);
    assert!((eta - 0.9f64.powi(10)).abs() < 1e-15 && !under);
    let (eta, under) = metrology::eta_of(0.5f64, 2000);
    assert_eq!(eta, 0.0);
    assert!(under);
}

#[test]
fn cat_report_branch_cases() {
    let ev = Evaluator::new(FunctionalMode::Auto);
    let p = derive_params(0.4f64, 10, 0.0, 0.3).unwrap();
    assert!(matches!(metrology::build_cat_report(&p, &ev), Err(Error::NoPair { roots: 1 })));
    let c = metrology::build_cat_report(&p.with_delta(2.0).unwrap(), &ev).unwrap();
    assert!((c.z_plus + c.z_minus).abs() < 1e-8);
    let z2 = c.z_plus * c.z_plus;
    assert!((c.epsilon - (1.0 - z2) * (1.0 - 0.21 * z2)).abs() < 1e-12);
    assert!((c.eta - c.epsilon.powi(10)).abs() < 1e-15);
}

#[test]
fn stationary_condition_stability_window() {
    let ev = Evaluator::new(FunctionalMode::Auto);
    let p = derive_params(0.4f64, 10, 0.0, 0.0).unwrap();
    for z in [-0.6, 0.0, 0.6] {
        let w = steady::stationarity(ThetaBranch::Zero, z, 0.0, &ev).unwrap();
        let s = steady::classify_stability(&p.with_omega_ratio(w).unwrap(), &State::new(z, 0.0), &ev).unwrap();
        assert_eq!(s, Stability::Center, "z = {z}");
    }
}

#[test]
fn pi_branch_single_root_window() {
    let ev = Evaluator::new(FunctionalMode::Auto);
    let p = derive_params(0.4f64, 10, 0.0, 0.0).unwrap();
    for w in [0.5 * PI, PI, 2.0 * PI] {
        let r = steady::branch_roots(&p.with_omega_ratio(w).unwrap(), ThetaBranch::Pi, &ev).unwrap();
        assert_eq!(r.len(), 1, "ωr = {w}");
        assert_eq!(r[0].stability, Stability::Center);
    }
}

#[test]
fn pi_branch_pair_across_separations() {
    let ev = Evaluator::new(FunctionalMode::Auto);
    let base = derive_params(0.4f64, 10, 0.0, 0.0).unwrap();
    let near = steady::branch_roots(&base, ThetaBranch::Pi, &ev).unwrap();
    assert!((near.last().unwrap().z_star - 0.41).abs() < 0.03);
    let far = steady::branch_roots(&base.with_delta(2.8).unwrap(), ThetaBranch::Pi, &ev).unwrap();
    let top = far.iter().filter(|s| s.stability == Stability::Center).map(|s| s.z_star).fold(f64::MIN, f64::max);
    assert!((top - 0.64).abs() < 0.03, "{top}");
    let beyond = steady::branch_roots(&base.with_delta(3.0).unwrap(), ThetaBranch::Pi, &ev).unwrap();
    assert_eq!(beyond.len(), 1);
}

#[test]
fn small_delta_closed_forms_track_general_path() {
    // Compared against the largest |ωr(z)| on each branch, since the pi
    // branch crosses zero at its roots.
    for b in [ThetaBranch::Zero, ThetaBranch::Pi] {
        let zs: Vec<f64> = (1..100).map(|k| k as f64 * 0.01).collect();
        let g: Vec<f64> = zs.iter().map(|&z| approx::stationarity_poly(b, z, 0.0).unwrap()).collect();
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (&z, &gv) in zs.iter().zip(&g) {
            let c = approx::stationarity_smalldelta(b, z);
            assert!((gv - c).abs() <= 0.05 * scale, "{b:?} z {z}: {gv} vs {c}");
        }
    }
}

#[test]
fn quartic_and_sextic_jump_at_split() {
    for k in 0..=200 {
        let z = -1.0 + k as f64 * 0.01;
        let a = approx::LOW.eval(z, 0.6).i_val;
        let b = approx::HIGH.eval(z, 0.6).i_val;
        assert!((a - b).abs() <= 0.08, "z {z}");
    }
}
