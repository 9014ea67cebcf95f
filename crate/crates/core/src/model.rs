//! Parameters, phase-plane state, sech soliton profiles and the conserved
//! energy of the reduced two-soliton model.
//!
//! Time is measured in τ = Λt with Λ = N²u²/16, and the level spacing enters
//! only through the ratio ωr = Ω/Λ.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::functionals::FunctionalValues;
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams<T> {
    pub u: T,
    pub n_particles: u64,
    /// Λ = N²u²/16.
    pub lambda_scale: T,
    /// Ω/Λ.
    pub omega_ratio: T,
    /// Δ = (Nu/4)·δ.
    pub delta_sep: T,
}

pub fn derive_params<T: Real>(u: T, n_particles: u64, omega_ratio: T, delta_sep: T) -> Result<ModelParams<T>> {
    if !(u > T::zero()) || !u.is_finite() {
        return Err(domain(format!("u must be positive and finite, got {u}")));
    }
    if n_particles < 2 {
        return Err(domain(format!("particle number must be at least 2, got {n_particles}")));
    }
    if !(delta_sep >= T::zero()) || !delta_sep.is_finite() {
        return Err(domain(format!("delta must be finite and non-negative, got {delta_sep}")));
    }
    if !omega_ratio.is_finite() {
        return Err(domain("omega ratio must be finite"));
    }
    Ok(ModelParams {
        u,
        n_particles,
        lambda_scale: lambda_of(u, n_particles),
        omega_ratio,
        delta_sep,
    })
}

fn lambda_of<T: Real>(u: T, n: u64) -> T {
    let n = T::from_u64(n).unwrap_or_else(T::infinity);
    n * n * u * u / lit(16.0)
}

impl<T: Real> ModelParams<T> {
    /// Absolute level spacing Ω = ωr·Λ.
    pub fn omega(&self) -> T {
        self.omega_ratio * self.lambda_scale
    }

    /// uN/4, the scale between lab coordinate x and the scaled coordinate.
    pub fn scale(&self) -> T {
        self.u * T::from_u64(self.n_particles).unwrap_or_else(T::infinity) / lit(4.0)
    }

    pub fn with_delta(&self, delta: T) -> Result<Self> {
        derive_params(self.u, self.n_particles, self.omega_ratio, delta)
    }

    pub fn with_omega_ratio(&self, omega_ratio: T) -> Result<Self> {
        derive_params(self.u, self.n_particles, omega_ratio, self.delta_sep)
    }

    pub fn with_particles(&self, n: u64) -> Result<Self> {
        derive_params(self.u, n, self.omega_ratio, self.delta_sep)
    }

    /// Re-derives Λ and compares with the stored value.
    pub fn is_consistent(&self) -> bool {
        self.lambda_scale == lambda_of(self.u, self.n_particles)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseState<T> {
    pub z: T,
    pub theta: T,
}

impl<T: Real> PhaseState<T> {
    pub fn new(z: T, theta: T) -> Self {
        Self { z, theta }
    }

    /// Phase reduced to [−π, π).
    pub fn canonical_theta(&self) -> T {
        wrap_angle(self.theta)
    }
}

pub fn wrap_angle<T: Real>(theta: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut t = (theta + T::PI()) % two_pi;
    if t < T::zero() {
        t = t + two_pi;
    }
    let t = t - T::PI();
    if t >= T::PI() {
        -T::PI()
    } else {
        t
    }
}

/// Phase of a stationary point: Θ = 0 or Θ = π.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaBranch {
    Zero,
    Pi,
}

impl ThetaBranch {
    pub fn theta<T: Real>(self) -> T {
        match self {
            ThetaBranch::Zero => T::zero(),
            ThetaBranch::Pi => T::PI(),
        }
    }

    fn cos<T: Real>(self) -> T {
        match self {
            ThetaBranch::Zero => T::one(),
            ThetaBranch::Pi => -T::one(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ThetaBranch::Zero => "zero",
            ThetaBranch::Pi => "pi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// One sech soliton, `amplitude · sech((1 ∓ z)·(uN·x/4 + center_offset))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolitonProfile<T> {
    pub amplitude: T,
    pub width_factor: T,
    /// Additive shift inside the scaled argument: −Δ on the left, +Δ on the right.
    pub center_offset: T,
    pub phase: T,
    scale: T,
}

pub fn sech_profile<T: Real>(params: &ModelParams<T>, z: T, side: Side) -> Result<SolitonProfile<T>> {
    if !(z.abs() <= T::one()) {
        return Err(domain(format!("z = {z} outside [-1, 1]")));
    }
    let scale = params.scale();
    let (weight, offset) = match side {
        Side::Left => (T::one() - z, -params.delta_sep),
        Side::Right => (T::one() + z, params.delta_sep),
    };
    Ok(SolitonProfile {
        amplitude: (params.u * T::from_u64(params.n_particles).unwrap()).sqrt() / lit(4.0) * weight,
        width_factor: weight * scale,
        center_offset: offset,
        phase: T::zero(),
        scale,
    })
}

impl<T: Real> SolitonProfile<T> {
    pub fn with_phase(mut self, phase: T) -> Self {
        self.phase = phase;
        self
    }

    /// Peak position in lab coordinates.
    pub fn center(&self) -> T {
        -self.center_offset / self.scale
    }

    /// Real envelope at lab coordinate `x` (the phase factor is separate).
    pub fn value(&self, x: T) -> T {
        if self.amplitude == T::zero() {
            return T::zero();
        }
        self.amplitude * sech(self.width_factor * (x - self.center()))
    }

    /// ∫|ψ|² dx = 2·amplitude²/width_factor = (1 ∓ z)/2.
    pub fn norm_sq(&self) -> T {
        if self.width_factor == T::zero() {
            return T::zero();
        }
        lit::<T>(2.0) * self.amplitude * self.amplitude / self.width_factor
    }
}

pub(crate) fn sech<T: Real>(y: T) -> T {
    let e = (-y.abs()).exp();
    lit::<T>(2.0) * e / (T::one() + e * e)
}

/// Conserved energy E(z, Θ) in τ units:
/// z² − ωr·z + ½(1−z²)²·I·(cos 2Θ + 2) + (1−z²)·J·cos Θ.
pub fn energy<T: Real>(params: &ModelParams<T>, state: &PhaseState<T>, fv: &FunctionalValues<T>) -> T {
    let z = state.z;
    let q = T::one() - z * z;
    z * z - params.omega_ratio * z
        + lit::<T>(0.5) * q * q * fv.i_val * ((state.theta + state.theta).cos() + lit(2.0))
        + q * fv.j_val * state.theta.cos()
}

/// ∂E/∂z at ωr = 0 with Θ pinned to a branch; equating it to ωr gives the
/// stationary condition Θ̇ = 0 on that branch.
pub fn stationarity_rhs<T: Real>(branch: ThetaBranch, z: T, fv: &FunctionalValues<T>) -> T {
    let q = T::one() - z * z;
    let c: T = branch.cos();
    let two = lit::<T>(2.0);
    two * z - lit::<T>(6.0) * z * q * fv.i_val + lit::<T>(1.5) * q * q * fv.di_dz + c * (q * fv.dj_dz - two * z * fv.j_val)
}
