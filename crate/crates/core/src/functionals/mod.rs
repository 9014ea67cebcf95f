//! The overlap functionals
//!
//! I(z,Δ) = ∫ sech²[(1−z)(x−Δ)] sech²[(1+z)(x+Δ)] dx
//! J(z,Δ) = Σ_{s=±1} ∫ (1+sz)² sech³[(1+sz)(x+sΔ)] sech[(1−sz)(x−sΔ)] dx
//!
//! by adaptive quadrature, plus dispatch to the polynomial surrogates.

pub mod quadrature;

use serde::Serialize;

use crate::approx::{self, Fit};
use crate::error::{Error, Result};
use crate::model::sech;
use crate::scalar::{lit, Real};

pub const DEFAULT_TOL: f64 = 1e-10;
/// Within this distance of |z| = 1 the limit values I = 1, J = π are returned.
pub const LIMIT_GAP: f64 = 1e-9;
/// Step of the finite differences used for dI/dz, dJ/dz under quadrature.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalKind {
    Quadrature,
    Polynomial,
    Limit,
}

/// How functionals are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FunctionalMode {
    /// Polynomial fits for Δ ≤ 1.5, quadrature beyond.
    #[default]
    Auto,
    Quadrature,
    /// Polynomial fits chosen by Δ; error for Δ > 1.5.
    Polynomial,
    /// The quartic fit at any Δ in [0, 1.5].
    Quartic,
    /// The sextic fit at any Δ in [0, 1.5].
    Sextic,
}

impl FunctionalMode {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "auto" => Self::Auto,
            "quadrature" | "exact" => Self::Quadrature,
            "polynomial" => Self::Polynomial,
            "quartic" => Self::Quartic,
            "sextic" => Self::Sextic,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Auto => "auto",
            Self::Quadrature => "quadrature",
            Self::Polynomial => "polynomial",
            Self::Quartic => "quartic",
            Self::Sextic => "sextic",
        }
    }

    /// Whether a point at separation `delta` is evaluated by quadrature.
    pub fn uses_quadrature<T: Real>(self, delta: T) -> bool {
        match self {
            Self::Quadrature => true,
            Self::Auto => delta.f64() > approx::DELTA_MAX,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalValues<T> {
    pub i_val: T,
    pub j_val: T,
    pub di_dz: T,
    pub dj_dz: T,
    pub mode: EvalKind,
}

fn check<T: Real>(z: T, delta: T, tol: T) -> Result<()> {
    if !(z.abs() <= T::one()) {
        return Err(Error::OutOfRange {
            what: "z",
            value: z.f64(),
            min: -1.0,
            max: 1.0,
        });
    }
    if !(delta >= T::zero()) || !delta.is_finite() {
        return Err(Error::Domain(format!("delta must be finite and non-negative, got {delta}")));
    }
    if !(tol > T::zero()) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// Half-width of the integration window: the slower factor decays like
/// exp(−2(1−|z|)|x|), so 40/(1−|z|) leaves nothing measurable outside it.
pub fn x_max<T: Real>(z: T, delta: T) -> T {
    delta + lit::<T>(40.0) / (T::one() - z.abs()).max(lit(0.02))
}

/// Initial partition: geometric offsets around both peaks so that no
/// first-pass panel straddles a peak at coarse resolution.
fn breakpoints<T: Real>(delta: T, xm: T) -> Vec<T> {
    let mut b = vec![-xm, xm, T::zero()];
    for c in [-delta, delta] {
        b.push(c);
        let mut off = lit::<T>(0.5);
        while off < xm + delta {
            for p in [c - off, c + off] {
                if p > -xm && p < xm {
                    b.push(p);
                }
            }
            off = off * lit(4.0);
        }
    }
    b.sort_by(|a, c| a.partial_cmp(c).unwrap());
    b.dedup_by(|a, c| (*a - *c).abs() <= lit::<T>(1e-12) * (T::one() + c.abs()));
    b
}

/// Integrands of I and J at one abscissa. Both reduce to the same two sech
/// factors, A = sech[(1−z)(x−Δ)] and B = sech[(1+z)(x+Δ)].
#[inline]
fn kernels<T: Real>(z: T, delta: T, x: T) -> (T, T) {
    let zm = T::one() - z;
    let zp = T::one() + z;
    let a = sech(zm * (x - delta));
    let b = sech(zp * (x + delta));
    let ab = a * b;
    (ab * ab, ab * (zp * zp * b * b + zm * zm * a * a))
}

/// I and J in one adaptive pass.
pub fn eval_ij<T: Real>(z: T, delta: T, tol: T) -> Result<(T, T)> {
    check(z, delta, tol)?;
    let xm = x_max(z, delta);
    let q = quadrature::integrate_vec(
        |x| {
            let (i, j) = kernels(z, delta, x);
            [i, j]
        },
        &breakpoints(delta, xm),
        tol,
        quadrature::MAX_PANELS,
    )?;
    Ok((q.value[0], q.value[1]))
}

pub fn eval_i<T: Real>(z: T, delta: T, tol: T) -> Result<T> {
    check(z, delta, tol)?;
    let xm = x_max(z, delta);
    let q = quadrature::integrate_vec(|x| [kernels(z, delta, x).0], &breakpoints(delta, xm), tol, quadrature::MAX_PANELS)?;
    Ok(q.value[0])
}

pub fn eval_j<T: Real>(z: T, delta: T, tol: T) -> Result<T> {
    check(z, delta, tol)?;
    let xm = x_max(z, delta);
    let q = quadrature::integrate_vec(|x| [kernels(z, delta, x).1], &breakpoints(delta, xm), tol, quadrature::MAX_PANELS)?;
    Ok(q.value[0])
}

/// I, J at z and two neighbours, all on one shared set of nodes, followed by
/// finite differences. Central when both neighbours are inside [−1, 1],
/// otherwise second-order one-sided towards the interior.
fn quadrature_values<T: Real>(z: T, delta: T, tol: T) -> Result<FunctionalValues<T>> {
    let h: T = lit(FD_STEP);
    let central = z.abs() + h <= T::one();
    let s = if z >= T::zero() { T::one() } else { -T::one() };
    let zs = if central {
        [z - h, z, z + h]
    } else {
        [z - s * (h + h), z - s * h, z]
    };
    let xm = zs.iter().fold(T::zero(), |m, &w| m.max(x_max(w, delta)));
    let q = quadrature::integrate_vec(
        |x| {
            let (i0, j0) = kernels(zs[0], delta, x);
            let (i1, j1) = kernels(zs[1], delta, x);
            let (i2, j2) = kernels(zs[2], delta, x);
            [i0, i1, i2, j0, j1, j2]
        },
        &breakpoints(delta, xm),
        tol,
        quadrature::MAX_PANELS,
    )?;
    let v = q.value;
    let two = lit::<T>(2.0);
    let (i_val, j_val, di, dj) = if central {
        (v[1], v[4], (v[2] - v[0]) / (two * h), (v[5] - v[3]) / (two * h))
    } else {
        let d = |f0: T, f1: T, f2: T| s * (lit::<T>(3.0) * f2 - lit::<T>(4.0) * f1 + f0) / (two * h);
        (v[2], v[5], d(v[0], v[1], v[2]), d(v[3], v[4], v[5]))
    };
    Ok(FunctionalValues {
        i_val,
        j_val,
        di_dz: di,
        dj_dz: dj,
        mode: EvalKind::Quadrature,
    })
}

/// All four functional values at (z, Δ) in the requested mode.
pub fn eval_all<T: Real>(z: T, delta: T, tol: T, mode: FunctionalMode) -> Result<FunctionalValues<T>> {
    check(z, delta, tol)?;
    let mut fv = if mode.uses_quadrature(delta) {
        quadrature_values(z, delta, tol)?
    } else {
        let fit = match mode {
            FunctionalMode::Quartic => Some(Fit::Quartic),
            FunctionalMode::Sextic => Some(Fit::Sextic),
            _ => None,
        };
        approx::poly_values(z, delta, fit)?
    };
    if T::one() - z.abs() < lit(LIMIT_GAP) {
        fv.i_val = T::one();
        fv.j_val = T::PI();
        fv.mode = EvalKind::Limit;
    }
    Ok(fv)
}

/// (I, J) at z = 0 for well separated solitons.
pub fn large_delta_decay<T: Real>(delta: T) -> Result<(T, T)> {
    if !(delta >= lit(3.0)) {
        return Err(Error::Domain(format!("large-separation evaluation needs delta >= 3, got {delta}")));
    }
    eval_ij(T::zero(), delta, lit(1e-14))
}

/// Functional mode and quadrature tolerance bundled for the consumers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluator<T> {
    pub mode: FunctionalMode,
    pub tol: T,
}

impl<T: Real> Default for Evaluator<T> {
    fn default() -> Self {
        Self {
            mode: FunctionalMode::Auto,
            tol: lit(DEFAULT_TOL),
        }
    }
}

impl<T: Real> Evaluator<T> {
    pub fn new(mode: FunctionalMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn eval(&self, z: T, delta: T) -> Result<FunctionalValues<T>> {
        eval_all(z, delta, self.tol, self.mode)
    }

    /// The evaluation kind used at this separation away from |z| = 1.
    pub fn kind_at(&self, delta: T) -> EvalKind {
        if self.mode.uses_quadrature(delta) {
            EvalKind::Quadrature
        } else {
            EvalKind::Polynomial
        }
    }
}
