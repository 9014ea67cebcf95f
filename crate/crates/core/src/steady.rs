//! Steady states on the Θ = 0 and Θ = π branches and at |z| = 1, their
//! stability, and the pitchfork of the zero-phase branch.

use serde::Serialize;

use crate::dynamics::rhs;
use crate::error::{Error, Result};
use crate::functionals::Evaluator;
use crate::model::{stationarity_rhs, ModelParams, PhaseState, ThetaBranch};
use crate::scalar::{lit, Real};

/// Spacing of the bracketing grid on z ∈ [−1, 1].
pub const GRID_STEP: f64 = 1e-3;
/// Bisection stops once the bracket is narrower than this.
pub const ROOT_TOL: f64 = 1e-10;
/// Step of the finite-difference Jacobian.
pub const JAC_STEP: f64 = 1e-6;
/// Eigenvalues below this magnitude count as zero.
pub const DEGENERATE_EIG: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Center,
    Saddle,
    Degenerate,
}

impl Stability {
    pub fn name(self) -> &'static str {
        match self {
            Stability::Center => "center",
            Stability::Saddle => "saddle",
            Stability::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RootBranch {
    ZPlus,
    ZMinus,
    Central,
    NoonPlus,
    NoonMinus,
}

impl RootBranch {
    pub fn name(self) -> &'static str {
        match self {
            RootBranch::ZPlus => "z_plus",
            RootBranch::ZMinus => "z_minus",
            RootBranch::Central => "central",
            RootBranch::NoonPlus => "noon_plus",
            RootBranch::NoonMinus => "noon_minus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState<T> {
    pub z_star: T,
    pub theta_star: T,
    pub stability: Stability,
    pub branch: RootBranch,
    /// max(|ż|, |Θ̇|) at the root.
    pub residual: T,
}

/// Jacobian of the flow by central differences, one-sided in z at |z| = 1.
pub fn jacobian<T: Real>(params: &ModelParams<T>, s: &PhaseState<T>, eval: &Evaluator<T>) -> Result<[[T; 2]; 2]> {
    let h: T = lit(JAC_STEP);
    let f = |z: T, th: T| rhs(params, &PhaseState::new(z, th), eval);
    let (zp, zm) = if s.z + h > T::one() {
        (s.z, s.z - h)
    } else if s.z - h < -T::one() {
        (s.z + h, s.z)
    } else {
        (s.z + h, s.z - h)
    };
    let (a1, b1) = f(zp, s.theta)?;
    let (a0, b0) = f(zm, s.theta)?;
    let (c1, d1) = f(s.z, s.theta + h)?;
    let (c0, d0) = f(s.z, s.theta - h)?;
    let dz = zp - zm;
    let dt = h + h;
    Ok([[(a1 - a0) / dz, (c1 - c0) / dt], [(b1 - b0) / dz, (d1 - d0) / dt]])
}

/// Center, saddle or degenerate from the eigenvalues of the 2×2 Jacobian.
pub fn classify_stability<T: Real>(params: &ModelParams<T>, s: &PhaseState<T>, eval: &Evaluator<T>) -> Result<Stability> {
    Ok(stability_of(&jacobian(params, s, eval)?))
}

pub fn stability_of<T: Real>(j: &[[T; 2]; 2]) -> Stability {
    let half_tr = (j[0][0] + j[1][1]) * lit(0.5);
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = half_tr * half_tr - det;
    let biggest = half_tr.abs() + disc.abs().sqrt();
    if biggest < lit(DEGENERATE_EIG) {
        Stability::Degenerate
    } else if disc < T::zero() {
        Stability::Center
    } else {
        Stability::Saddle
    }
}

fn residual<T: Real>(params: &ModelParams<T>, s: &PhaseState<T>, eval: &Evaluator<T>) -> Result<T> {
    let (a, b) = rhs(params, s, eval)?;
    Ok(a.abs().max(b.abs()))
}

/// Stationary states at |z| = 1: Θ = arccos((2 − sign(z)·ωr)/2π) where defined.
pub fn noon_steady<T: Real>(params: &ModelParams<T>, eval: &Evaluator<T>) -> Result<Vec<SteadyState<T>>> {
    let mut out = Vec::new();
    let two_pi = T::PI() + T::PI();
    for (sign, branch) in [(T::one(), RootBranch::NoonPlus), (-T::one(), RootBranch::NoonMinus)] {
        let arg = (lit::<T>(2.0) - sign * params.omega_ratio) / two_pi;
        if arg.abs() > T::one() {
            continue;
        }
        let s = PhaseState::new(sign, arg.acos());
        out.push(SteadyState {
            z_star: s.z,
            theta_star: s.theta,
            stability: classify_stability(params, &s, eval)?,
            branch,
            residual: residual(params, &s, eval)?,
        });
    }
    Ok(out)
}

/// ωr-independent part of the stationary condition minus ωr.
fn condition<T: Real>(params: &ModelParams<T>, branch: ThetaBranch, z: T, eval: &Evaluator<T>) -> Result<T> {
    let fv = eval.eval(z, params.delta_sep)?;
    Ok(stationarity_rhs(branch, z, &fv) - params.omega_ratio)
}

/// ωr = f(z) on a Θ branch, for plotting the stationary condition.
pub fn stationarity<T: Real>(branch: ThetaBranch, z: T, delta: T, eval: &Evaluator<T>) -> Result<T> {
    let fv = eval.eval(z, delta)?;
    Ok(stationarity_rhs(branch, z, &fv))
}

fn root_positions<T: Real>(params: &ModelParams<T>, branch: ThetaBranch, eval: &Evaluator<T>) -> Result<Vec<T>> {
    use rayon::prelude::*;
    let n = (2.0 / GRID_STEP).round() as i64;
    let half = n / 2;
    let zs: Vec<T> = (0..=n).map(|k| lit::<T>((k - half) as f64) / lit(half as f64)).collect();
    let fs: Vec<T> = zs
        .par_iter()
        .map(|&z| condition(params, branch, z, eval))
        .collect::<Result<_>>()?;
    let edge = T::one() - lit(crate::functionals::LIMIT_GAP);
    let mut roots = Vec::new();
    for k in 0..zs.len() {
        if fs[k] == T::zero() {
            roots.push(zs[k]);
            continue;
        }
        if k + 1 < zs.len() && fs[k + 1] != T::zero() && (fs[k] < T::zero()) != (fs[k + 1] < T::zero()) {
            let (mut a, mut b, mut fa) = (zs[k], zs[k + 1], fs[k]);
            while b - a > lit(ROOT_TOL) {
                let m = (a + b) * lit(0.5);
                if m <= a || m >= b {
                    break;
                }
                let fm = condition(params, branch, m, eval)?;
                if fm == T::zero() {
                    a = m;
                    b = m;
                    break;
                }
                if (fm < T::zero()) == (fa < T::zero()) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            roots.push((a + b) * lit(0.5));
        }
    }
    roots.retain(|z| z.abs() < edge);
    Ok(roots)
}

/// All roots z ∈ (−1, 1) of the stationary condition on one Θ branch,
/// ascending, each with its stability. With an odd count the middle root
/// is `Central`; roots below and above it are `ZMinus` and `ZPlus`.
pub fn branch_roots<T: Real>(params: &ModelParams<T>, branch: ThetaBranch, eval: &Evaluator<T>) -> Result<Vec<SteadyState<T>>> {
    let zs = root_positions(params, branch, eval)?;
    let n = zs.len();
    let mut out = Vec::with_capacity(n);
    for (k, &z) in zs.iter().enumerate() {
        let label = if n % 2 == 1 {
            match k.cmp(&(n / 2)) {
                std::cmp::Ordering::Less => RootBranch::ZMinus,
                std::cmp::Ordering::Equal => RootBranch::Central,
                std::cmp::Ordering::Greater => RootBranch::ZPlus,
            }
        } else if z < T::zero() {
            RootBranch::ZMinus
        } else {
            RootBranch::ZPlus
        };
        let s = PhaseState::new(z, branch.theta());
        out.push(SteadyState {
            z_star: z,
            theta_star: s.theta,
            stability: classify_stability(params, &s, eval)?,
            branch: label,
            residual: residual(params, &s, eval)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchPoint<T> {
    pub delta: T,
    /// Largest and smallest zero-phase roots (equal when only one exists).
    pub z_plus: T,
    pub z_minus: T,
    pub n_roots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationResult<T> {
    pub delta_c: T,
    pub branch_pts: Vec<BranchPoint<T>>,
}

/// Resolution of the bisection on Δ.
pub const DELTA_TOL: f64 = 1e-4;

fn count_at<T: Real>(params: &ModelParams<T>, delta: T, eval: &Evaluator<T>) -> Result<Vec<T>> {
    root_positions(&params.with_delta(delta)?, ThetaBranch::Zero, eval)
}

/// Samples the zero-phase roots over `delta_range` and locates the first
/// change of the root count by bisection on Δ.
pub fn trace_bifurcation<T: Real>(params: &ModelParams<T>, delta_range: (T, T), n_steps: usize, eval: &Evaluator<T>) -> Result<BifurcationResult<T>> {
    let (d0, d1) = delta_range;
    if !(d1 > d0) || !(d0 >= T::zero()) {
        return Err(Error::Domain(format!("invalid delta range ({d0}, {d1})")));
    }
    if n_steps < 2 {
        return Err(Error::Domain("need at least two samples in delta".into()));
    }
    let mut pts = Vec::with_capacity(n_steps);
    for k in 0..n_steps {
        let d = if k + 1 == n_steps {
            d1
        } else {
            d0 + (d1 - d0) * lit(k as f64) / lit((n_steps - 1) as f64)
        };
        let roots = count_at(params, d, eval)?;
        let (lo, hi) = match (roots.first(), roots.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => (T::nan(), T::nan()),
        };
        pts.push(BranchPoint {
            delta: d,
            z_plus: hi,
            z_minus: lo,
            n_roots: roots.len(),
        });
    }
    let change = pts.windows(2).position(|w| w[0].n_roots != w[1].n_roots);
    let k = match change {
        Some(k) => k,
        None => return Err(Error::NoBifurcation { roots: pts[0].n_roots }),
    };
    let before = pts[k].n_roots;
    let (mut a, mut b) = (pts[k].delta, pts[k + 1].delta);
    while b - a > lit(DELTA_TOL) {
        let m = (a + b) * lit(0.5);
        if count_at(params, m, eval)?.len() == before {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(BifurcationResult {
        delta_c: (a + b) * lit(0.5),
        branch_pts: pts,
    })
}
