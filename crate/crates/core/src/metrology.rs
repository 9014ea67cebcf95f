//! Macroscopic qubits from two non-orthogonal soliton configurations,
//! their readout operators, and the phase/frequency error estimates for
//! cat and N00N superpositions.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::functionals::{quadrature, Evaluator};
use crate::model::{sech_profile, ModelParams, Side, ThetaBranch};
use crate::scalar::{lit, Real};
use crate::steady::branch_roots;

/// 2×2 complex matrix in the {|π₀⟩, |π₁⟩} basis.
pub type Mat2<T> = [[Complex<T>; 2]; 2];

/// Below this η is reported as zero.
pub const ETA_FLOOR: f64 = 1e-300;

/// c₁,₂ = √[(1 ± √(1−η²)) / (2(1−η²))].
pub fn qubit_coefficients<T: Real>(eta: T) -> Result<(T, T)> {
    if !(eta >= T::zero()) {
        return Err(domain(format!("eta must be in [0, 1), got {eta}")));
    }
    if eta >= T::one() {
        return Err(Error::Singular("eta = 1: the two halves are indistinguishable and c1, c2 diverge".into()));
    }
    let g = T::one() - eta * eta;
    let r = g.sqrt();
    let two = lit::<T>(2.0);
    Ok((((T::one() + r) / (two * g)).sqrt(), ((T::one() - r) / (two * g)).sqrt()))
}

/// Gram matrix of |π₀⟩ = c₁|Φ₁⟩ − c₂|Φ₂⟩ and |π₁⟩ = c₂|Φ₁⟩ − c₁|Φ₂⟩ given
/// the real overlap η = ⟨Φ₁|Φ₂⟩.
pub fn gram_matrix<T: Real>(c1: T, c2: T, eta: T) -> [[T; 2]; 2] {
    let s = [[T::one(), eta], [eta, T::one()]];
    let v = [[c1, -c2], [c2, -c1]];
    let mut g = [[T::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = T::zero();
            for a in 0..2 {
                for b in 0..2 {
                    acc = acc + v[i][a] * s[a][b] * v[j][b];
                }
            }
            g[i][j] = acc;
        }
    }
    g
}

fn c<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// Readout operators Σ₁ = |π₁⟩⟨π₁| − |π₀⟩⟨π₀|, Σ₂ = |π₀⟩⟨π₁| + |π₁⟩⟨π₀|,
/// Σ₃ = i(|π₀⟩⟨π₁| − |π₁⟩⟨π₀|).
pub fn sigma_operators<T: Real>() -> [Mat2<T>; 3] {
    let (o, l) = (T::zero(), T::one());
    let i = Complex::new(o, l);
    [
        [[c(-l), c(o)], [c(o), c(l)]],
        [[c(o), c(l)], [c(l), c(o)]],
        [[c(o), i], [-i, c(o)]],
    ]
}

/// Equal-weight qubit state (|π₀⟩ + e^{−iφ}|π₁⟩)/√2.
pub fn qubit_state<T: Real>(phi: T) -> [Complex<T>; 2] {
    let h = T::one() / lit::<T>(2.0).sqrt();
    [c(h), Complex::from_polar(h, -phi)]
}

pub fn expectation<T: Real>(op: &Mat2<T>, psi: &[Complex<T>; 2]) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..2 {
        for j in 0..2 {
            acc = acc + psi[i].conj() * op[i][j] * psi[j];
        }
    }
    acc
}

/// (⟨Σ₁⟩, ⟨Σ₂⟩, ⟨Σ₃⟩) in the state with relative phase φ; equals (0, cos φ, sin φ).
pub fn sigma_expectations<T: Real>(phi: T) -> (T, T, T) {
    let psi = qubit_state(phi);
    let [s1, s2, s3] = sigma_operators::<T>();
    (expectation(&s1, &psi).re, expectation(&s2, &psi).re, expectation(&s3, &psi).re)
}

/// Three-outcome POVM that unambiguously discriminates |0⟩ from
/// (|0⟩ + |1⟩)/√2 in the orthonormal qubit basis:
/// E₁ = k|1⟩⟨1|, E₂ = k(|0⟩−|1⟩)(⟨0|−⟨1|)/2, E₃ = I − E₁ − E₂, k = √2/(1+√2).
/// The basis exists only for η < 1, which is checked.
pub fn povm_elements<T: Real>(eta: T) -> Result<[Mat2<T>; 3]> {
    qubit_coefficients(eta)?;
    let r2 = lit::<T>(2.0).sqrt();
    let k = r2 / (T::one() + r2);
    let h = k / lit(2.0);
    let (o, l) = (T::zero(), T::one());
    let e1 = [[c(o), c(o)], [c(o), c(k)]];
    let e2 = [[c(h), c(-h)], [c(-h), c(h)]];
    let mut e3 = [[c(o); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let id = if i == j { c(l) } else { c(o) };
            e3[i][j] = id - e1[i][j] - e2[i][j];
        }
    }
    Ok([e1, e2, e3])
}

/// Eigenvalues of a Hermitian 2×2 matrix, ascending.
pub fn hermitian_eigenvalues<T: Real>(m: &Mat2<T>) -> (T, T) {
    let a = m[0][0].re;
    let d = m[1][1].re;
    let b = m[0][1];
    let mid = (a + d) * lit(0.5);
    let half = (a - d) * lit(0.5);
    let r = (half * half + b.norm_sqr()).sqrt();
    (mid - r, mid + r)
}

/// Error-propagation estimate √Var / |∂⟨Π⟩/∂x|.
pub fn error_propagation<T: Real>(variance: T, slope: T) -> T {
    variance.sqrt() / slope.abs()
}

/// σ_Γ for an N-particle phase imprint Γ read out through ⟨Σ₂⟩ = cos(NΓ):
/// variance sin²(NΓ), slope −N sin(NΓ), ratio 1/N.
pub fn phase_sensitivity<T: Real>(n_particles: u64, gamma: T) -> Result<T> {
    if n_particles < 1 {
        return Err(domain("particle number must be at least 1"));
    }
    let n = T::from_u64(n_particles).unwrap();
    let s = (n * gamma).sin();
    if s == T::zero() {
        // Both numerator and slope vanish; the ratio is Γ-independent.
        return Ok(T::one() / n);
    }
    Ok(error_propagation(s * s, n * s))
}

/// Edge of the N00N window, 2(π − 1).
pub fn noon_window<T: Real>() -> T {
    lit::<T>(2.0) * (T::PI() - T::one())
}

fn clamped_acos<T: Real>(x: T) -> T {
    x.max(-T::one()).min(T::one()).acos()
}

/// Θ′ = ½[arccos((2 − ωr)/2π) + arccos((2 + ωr)/2π)].
pub fn noon_theta_prime<T: Real>(omega_ratio: T) -> Result<T> {
    if !(omega_ratio.abs() <= noon_window()) {
        return Err(Error::OutOfRange {
            what: "omega_ratio",
            value: omega_ratio.f64(),
            min: -noon_window::<f64>(),
            max: noon_window::<f64>(),
        });
    }
    let two = lit::<T>(2.0);
    let tp = T::PI() + T::PI();
    Ok((clamped_acos((two - omega_ratio) / tp) + clamped_acos((two + omega_ratio) / tp)) * lit(0.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetrologyReport<T> {
    pub theta_prime: T,
    pub sigma_mean: T,
    pub sigma_var: T,
    /// σ_Ω/Λ; `None` at ωr = 0 where the estimate is singular.
    pub sensitivity: Option<T>,
    pub domain_ok: bool,
}

/// ⟨Σ⟩ = cos(NΘ′) and Var = sin²(NΘ′) for the N00N superposition of the
/// two |z| = 1 states, plus σ_Ω in units of Λ.
pub fn noon_interference<T: Real>(n_particles: u64, omega_ratio: T) -> Result<MetrologyReport<T>> {
    let tp = noon_theta_prime(omega_ratio)?;
    let n = T::from_u64(n_particles).unwrap();
    let (s, cphi) = (n * tp).sin_cos();
    let sensitivity = omega_sensitivity(n_particles, omega_ratio, T::one()).ok();
    Ok(MetrologyReport {
        theta_prime: tp,
        sigma_mean: cphi,
        sigma_var: s * s,
        sensitivity,
        domain_ok: true,
    })
}

/// σ_Ω = (2Λ/N)·|AB/(A − B)| with A = √(4π² − (2+ωr)²), B = √(4π² − (2−ωr)²).
pub fn omega_sensitivity<T: Real>(n_particles: u64, omega_ratio: T, lambda_scale: T) -> Result<T> {
    if n_particles < 1 {
        return Err(domain("particle number must be at least 1"));
    }
    if omega_ratio == T::zero() {
        return Err(Error::Singular("frequency error is undefined at omega_ratio = 0 (vanishing denominator)".into()));
    }
    if !(omega_ratio.abs() <= noon_window()) {
        return Err(Error::OutOfRange {
            what: "omega_ratio",
            value: omega_ratio.f64(),
            min: -noon_window::<f64>(),
            max: noon_window::<f64>(),
        });
    }
    let two = lit::<T>(2.0);
    let fpp = lit::<T>(4.0) * T::PI() * T::PI();
    let a = (fpp - (two + omega_ratio).powi(2)).max(T::zero()).sqrt();
    let b = (fpp - (two - omega_ratio).powi(2)).max(T::zero()).sqrt();
    let n = T::from_u64(n_particles).unwrap();
    Ok(two * lambda_scale / n * (a * b / (a - b)).abs())
}

/// Near-border approximation (10Λ/N)·1.65·√(4.28−ωr)/(1.65 − √(4.28−ωr)),
/// 4.28 being 2(π−1) rounded.
pub fn omega_sensitivity_border<T: Real>(n_particles: u64, omega_ratio: T, lambda_scale: T) -> Result<T> {
    let gap = lit::<T>(4.28) - omega_ratio;
    if !(gap > T::zero()) {
        return Err(domain(format!("border approximation needs omega_ratio < 4.28, got {omega_ratio}")));
    }
    let n = T::from_u64(n_particles).unwrap();
    let r = gap.sqrt();
    let k = lit::<T>(1.65);
    Ok(lit::<T>(10.0) * lambda_scale / n * k * r / (k - r))
}

/// Closed-form single-particle overlap of two pairs of solitons with
/// imbalances z₊ and z₋, s = z₊ + z₋, d = z₊ − z₋:
/// ε = ½[(1−s/2)(1−z₊)(1−z₋)(1−0.21(d/(2−s))²) + (1+s/2)(1+z₊)(1+z₋)(1−0.21(d/(2+s))²)].
pub fn overlap_epsilon<T: Real>(z_plus: T, z_minus: T) -> Result<T> {
    for z in [z_plus, z_minus] {
        if !(z.abs() <= T::one()) {
            return Err(Error::OutOfRange {
                what: "z",
                value: z.f64(),
                min: -1.0,
                max: 1.0,
            });
        }
    }
    let two = lit::<T>(2.0);
    let k = lit::<T>(0.21);
    let s = z_plus + z_minus;
    let d = z_plus - z_minus;
    let term = |w: T, p: T| {
        if p == T::zero() {
            T::zero()
        } else {
            let r = d / (two + w * s);
            (T::one() + w * s / two) * p * (T::one() - k * r * r)
        }
    };
    let left = term(-T::one(), (T::one() - z_plus) * (T::one() - z_minus));
    let right = term(T::one(), (T::one() + z_plus) * (T::one() + z_minus));
    Ok((left + right) / two)
}

/// ε = ∫(ψ₁⁺ψ₁⁻ + ψ₂⁺ψ₂⁻)dx from the sech profiles of the two configurations.
pub fn overlap_epsilon_exact<T: Real>(z_plus: T, z_minus: T, params: &ModelParams<T>, tol: T) -> Result<T> {
    let mut total = T::zero();
    for side in [Side::Left, Side::Right] {
        let a = sech_profile(params, z_plus, side)?;
        let b = sech_profile(params, z_minus, side)?;
        if a.amplitude == T::zero() || b.amplitude == T::zero() {
            continue;
        }
        let x0 = a.center();
        let w = a.width_factor.min(b.width_factor);
        let reach = lit::<T>(40.0) / w;
        let brk: Vec<T> = [-64.0, -16.0, -4.0, -1.0, 0.0, 1.0, 4.0, 16.0, 64.0]
            .iter()
            .map(|&f| x0 + reach * lit(f / 64.0))
            .collect();
        let q = quadrature::integrate_vec(|x| [a.value(x) * b.value(x)], &brk, tol, quadrature::MAX_PANELS)?;
        total = total + q.value[0];
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CatPair<T> {
    pub z_plus: T,
    pub z_minus: T,
    pub epsilon: T,
    /// ε^N; zero with `eta_underflow` when below 1e−300.
    pub eta: T,
    pub eta_underflow: bool,
    /// Infinite when `singular`.
    pub c1: T,
    pub c2: T,
    pub singular: bool,
    pub n_particles: u64,
}

/// η = ε^N evaluated through logarithms.
pub fn eta_of<T: Real>(epsilon: T, n_particles: u64) -> (T, bool) {
    if epsilon <= T::zero() {
        return (T::zero(), true);
    }
    let n = T::from_u64(n_particles).unwrap();
    let ln_eta = n * epsilon.ln();
    if ln_eta < lit::<T>(ETA_FLOOR).ln() {
        (T::zero(), true)
    } else {
        (ln_eta.exp(), false)
    }
}

/// Assembles the cat pair from given branch imbalances.
pub fn cat_from_roots<T: Real>(z_plus: T, z_minus: T, n_particles: u64) -> Result<CatPair<T>> {
    let epsilon = overlap_epsilon(z_plus, z_minus)?;
    let (eta, eta_underflow) = eta_of(epsilon, n_particles);
    let (c1, c2, singular) = match qubit_coefficients(eta) {
        Ok((a, b)) => (a, b, false),
        Err(Error::Singular(_)) => (T::infinity(), T::infinity(), true),
        Err(e) => return Err(e),
    };
    Ok(CatPair {
        z_plus,
        z_minus,
        epsilon,
        eta,
        eta_underflow,
        c1,
        c2,
        singular,
        n_particles,
    })
}

/// Cat pair from the outermost zero-phase steady states at the given
/// (Δ, ωr). Roots closer than 1e−6 are treated as merged (η = 1).
pub fn build_cat_report<T: Real>(params: &ModelParams<T>, eval: &Evaluator<T>) -> Result<CatPair<T>> {
    let roots = branch_roots(params, ThetaBranch::Zero, eval)?;
    if roots.len() < 2 {
        if roots.len() == 1 && params.omega_ratio == T::zero() {
            // A root pair merged into the central one exactly at the bifurcation.
            let z = roots[0].z_star;
            let j = crate::steady::jacobian(params, &crate::model::PhaseState::new(z, T::zero()), eval)?;
            if crate::steady::stability_of(&j) == crate::steady::Stability::Degenerate {
                return cat_from_roots(z, z, params.n_particles);
            }
        }
        return Err(Error::NoPair { roots: roots.len() });
    }
    let z_plus = roots[roots.len() - 1].z_star;
    let z_minus = roots[0].z_star;
    if (z_plus - z_minus).abs() < lit(1e-6) {
        return cat_from_roots(z_plus, z_plus, params.n_particles);
    }
    cat_from_roots(z_plus, z_minus, params.n_particles)
}

/// Separation at which the cat pair reaches the requested second
/// coefficient, by bisection on Δ in `range` (c₂ increases with ε, which
/// decreases with Δ along the branch).
pub fn locate_delta_for_c2<T: Real>(params: &ModelParams<T>, eval: &Evaluator<T>, target_c2: T, range: (T, T), tol: T) -> Result<(T, CatPair<T>)> {
    let (mut a, mut b) = range;
    let at = |d: T| -> Result<Option<CatPair<T>>> {
        match build_cat_report(&params.with_delta(d)?, eval) {
            Ok(c) => Ok(Some(c)),
            Err(Error::NoPair { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    match at(b)? {
        Some(c) if c.c2 <= target_c2 => {}
        _ => return Err(domain("target c2 not reached at the upper end of the range")),
    }
    while b - a > tol {
        let m = (a + b) * lit(0.5);
        match at(m)? {
            Some(c) if c.c2 <= target_c2 => b = m,
            _ => a = m,
        }
    }
    let c = at(b)?.ok_or(Error::NoPair { roots: 1 })?;
    Ok((b, c))
}
