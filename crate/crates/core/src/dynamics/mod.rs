//! Phase-plane flow of (z, Θ), trajectory integration, regime
//! classification and the small-oscillation formulas.

pub mod dop853;
mod tableau;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::functionals::{Evaluator, FunctionalValues};
use crate::model::{energy, ModelParams, PhaseState};
use crate::scalar::{lit, Real};

pub use dop853::Status;

pub const DEFAULT_RTOL: f64 = 1e-12;
pub const DEFAULT_ATOL: f64 = 1e-14;
pub const DEFAULT_SAMPLES: usize = 2000;
/// Clamp tolerance for |z| ≤ 1.
pub const Z_CLIP: f64 = 1e-12;

/// Right-hand side from precomputed functional values.
pub fn rhs_from<T: Real>(params: &ModelParams<T>, state: &PhaseState<T>, fv: &FunctionalValues<T>) -> (T, T) {
    let z = state.z;
    let q = T::one() - z * z;
    let two = lit::<T>(2.0);
    let (s1, c1) = state.theta.sin_cos();
    let (s2, c2) = (state.theta + state.theta).sin_cos();
    let c2p = c2 + two;
    let dz = q * (q * fv.i_val * s2 + fv.j_val * s1);
    let dth = -params.omega_ratio + two * z - two * z * q * fv.i_val * c2p + lit::<T>(0.5) * q * q * fv.di_dz * c2p
        - two * z * fv.j_val * c1
        + q * fv.dj_dz * c1;
    (dz, dth)
}

/// (dz/dτ, dΘ/dτ).
pub fn rhs<T: Real>(params: &ModelParams<T>, state: &PhaseState<T>, eval: &Evaluator<T>) -> Result<(T, T)> {
    let fv = eval.eval(state.z, params.delta_sep)?;
    Ok(rhs_from(params, state, &fv))
}

/// Energy at a state, evaluating the functionals there.
pub fn energy_at<T: Real>(params: &ModelParams<T>, state: &PhaseState<T>, eval: &Evaluator<T>) -> Result<T> {
    let fv = eval.eval(state.z, params.delta_sep)?;
    Ok(energy(params, state, &fv))
}

/// Largest relative mismatch between the flow and the symplectic gradient
/// of the energy (ż = −∂E/∂Θ, Θ̇ = ∂E/∂z) over a grid of states.
pub fn hamiltonian_mismatch<T: Real>(params: &ModelParams<T>, eval: &Evaluator<T>, zs: &[T], thetas: &[T], h: T) -> Result<T> {
    let mut worst = T::zero();
    let floor: T = lit(1e-3);
    for &z in zs {
        for &th in thetas {
            let s = PhaseState::new(z, th);
            let (dz, dth) = rhs(params, &s, eval)?;
            let e = |z: T, th: T| energy_at(params, &PhaseState::new(z, th), eval);
            let de_dth = (e(z, th + h)? - e(z, th - h)?) / (h + h);
            let de_dz = (e(z + h, th)? - e(z - h, th)?) / (h + h);
            worst = worst
                .max((dz + de_dth).abs() / dz.abs().max(floor))
                .max((dth - de_dz).abs() / dth.abs().max(floor));
        }
    }
    Ok(worst)
}

/// Checks the sign convention of the energy against the flow at Δ = 0.3
/// with the polynomial functionals.
pub fn self_test() -> Result<()> {
    let params = crate::model::derive_params(0.4f64, 10, 0.3, 0.3)?;
    let eval = Evaluator::new(crate::FunctionalMode::Polynomial);
    let zs = [-0.8, -0.31, 0.05, 0.5, 0.9];
    let ths = [-2.5, -0.7, 0.4, 1.9, 3.0];
    let m = hamiltonian_mismatch(&params, &eval, &zs, &ths, 1e-6)?;
    if m > 1e-6 {
        return Err(Error::Singular(format!("energy gradient disagrees with the flow (mismatch {m:e})")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions<T> {
    pub rtol: T,
    pub atol: T,
    pub samples: usize,
}

impl<T: Real> Default for IntegrateOptions<T> {
    fn default() -> Self {
        Self {
            rtol: lit(DEFAULT_RTOL),
            atol: lit(DEFAULT_ATOL),
            samples: DEFAULT_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Outcome {
    Complete,
    StepUnderflow { tau: f64 },
    TooManySteps { tau: f64 },
    Failed { tau: f64, message: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory<T> {
    pub params: ModelParams<T>,
    pub t_grid: Vec<T>,
    pub states: Vec<PhaseState<T>>,
    pub energies: Vec<T>,
    /// max |E(τ) − E(0)| over the samples.
    pub energy_drift: T,
    pub outcome: Outcome,
    pub steps: usize,
}

impl<T: Real> Trajectory<T> {
    pub fn is_complete(&self) -> bool {
        self.outcome == Outcome::Complete
    }

    pub fn span(&self) -> T {
        match (self.t_grid.first(), self.t_grid.last()) {
            (Some(&a), Some(&b)) => b - a,
            _ => T::zero(),
        }
    }
}

fn check_state<T: Real>(s: &PhaseState<T>) -> Result<()> {
    if !(s.z.abs() <= T::one()) {
        return Err(Error::OutOfRange {
            what: "z0",
            value: s.z.f64(),
            min: -1.0,
            max: 1.0,
        });
    }
    if !s.theta.is_finite() {
        return Err(domain("theta0 must be finite"));
    }
    Ok(())
}

/// Integrates the flow from `initial` over τ ∈ [0, t_final] and samples it
/// on a uniform grid.
pub fn integrate<T: Real>(
    params: &ModelParams<T>,
    initial: PhaseState<T>,
    t_final: T,
    eval: &Evaluator<T>,
    opts: &IntegrateOptions<T>,
) -> Result<Trajectory<T>> {
    check_state(&initial)?;
    if !(t_final > T::zero()) || !t_final.is_finite() {
        return Err(domain(format!("t_final must be positive, got {t_final}")));
    }
    if !(opts.rtol > T::zero()) || !(opts.atol > T::zero()) {
        return Err(domain("integration tolerances must be positive"));
    }
    let n = opts.samples.max(2);
    let t_out: Vec<T> = (0..n)
        .map(|k| if k + 1 == n { t_final } else { t_final * lit(k as f64) / lit((n - 1) as f64) })
        .collect();
    let p = *params;
    let ev = *eval;
    let f = move |_t: T, y: &[T; 2]| -> Result<[T; 2]> {
        let z = y[0].max(-T::one()).min(T::one());
        let (a, b) = rhs(&p, &PhaseState::new(z, y[1]), &ev)?;
        Ok([a, b])
    };
    let clip: T = lit(Z_CLIP);
    let project = move |y: &mut [T; 2]| {
        if y[0] > T::one() {
            debug_assert!(y[0] - T::one() < clip.max(lit(1e-6)));
            y[0] = T::one();
        } else if y[0] < -T::one() {
            y[0] = -T::one();
        }
    };
    let opt = dop853::Options {
        rtol: opts.rtol,
        atol: opts.atol,
        ..dop853::Options::default()
    };
    let sol = dop853::solve(f, T::zero(), [initial.z, initial.theta], &t_out, &opt, project);
    let outcome = match &sol.status {
        Status::Finished => Outcome::Complete,
        Status::StepUnderflow { t } => Outcome::StepUnderflow { tau: t.f64() },
        Status::TooManySteps { t } => Outcome::TooManySteps { tau: t.f64() },
        Status::RhsFailed { t, message } => Outcome::Failed {
            tau: t.f64(),
            message: message.clone(),
        },
    };
    let states: Vec<PhaseState<T>> = sol.y.iter().map(|y| PhaseState::new(y[0], y[1])).collect();
    let mut energies = Vec::with_capacity(states.len());
    for s in &states {
        energies.push(energy_at(params, s, eval)?);
    }
    let e0 = energies.first().copied().unwrap_or_else(T::zero);
    let energy_drift = energies.iter().fold(T::zero(), |m, &e| m.max((e - e0).abs()));
    Ok(Trajectory {
        params: *params,
        t_grid: sol.t,
        states,
        energies,
        energy_drift,
        outcome,
        steps: sol.accepted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Oscillation,
    Mqst,
    RunningPhase,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Oscillation => "oscillation",
            Regime::Mqst => "mqst",
            Regime::RunningPhase => "running_phase",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeLabel<T> {
    pub label: Regime,
    pub z_mean: T,
    pub z_sign_flips: usize,
    /// Total change of Θ over the run, in turns.
    pub theta_winding: T,
    pub spearman: T,
}

/// Minimum span accepted by [`classify`].
pub const MIN_CLASSIFY_SPAN: f64 = 100.0;

fn ranks<T: Real>(v: &[T]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation.
pub fn spearman<T: Real>(x: &[T], y: &[T]) -> T {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return T::zero();
    }
    lit(sxy / (sxx * syy).sqrt())
}

/// Interpolated times at which `z − mean` changes sign.
pub fn mean_crossings<T: Real>(traj: &Trajectory<T>) -> Vec<T> {
    let n = lit::<T>(traj.states.len().max(1) as f64);
    let mean = traj.states.iter().fold(T::zero(), |s, p| s + p.z) / n;
    let mut out = Vec::new();
    for k in 1..traj.states.len() {
        let a = traj.states[k - 1].z - mean;
        let b = traj.states[k].z - mean;
        if (a < T::zero() && b >= T::zero()) || (a > T::zero() && b <= T::zero()) {
            let (ta, tb) = (traj.t_grid[k - 1], traj.t_grid[k]);
            out.push(ta + (tb - ta) * a / (a - b));
        }
    }
    out
}

/// Angular frequency from the spacing of mean crossings (two per period).
pub fn measure_frequency<T: Real>(traj: &Trajectory<T>) -> Option<T> {
    let c = mean_crossings(traj);
    if c.len() < 3 {
        return None;
    }
    let half = (c[c.len() - 1] - c[0]) / lit((c.len() - 1) as f64);
    Some(T::PI() / half)
}

pub fn classify<T: Real>(traj: &Trajectory<T>) -> Result<RegimeLabel<T>> {
    if traj.span() < lit(MIN_CLASSIFY_SPAN) {
        return Err(Error::Ambiguous(format!("trajectory spans τ = {} < {}", traj.span(), MIN_CLASSIFY_SPAN)));
    }
    let n = traj.states.len();
    let zs: Vec<T> = traj.states.iter().map(|s| s.z).collect();
    let th: Vec<T> = traj.states.iter().map(|s| s.theta).collect();
    let z_mean = zs.iter().fold(T::zero(), |s, &z| s + z) / lit(n as f64);
    let mut flips = 0;
    let mut last = 0i8;
    for &z in &zs {
        let s = if z > T::zero() {
            1
        } else if z < T::zero() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                flips += 1;
            }
            last = s;
        }
    }
    let two_pi = T::PI() + T::PI();
    let theta_winding = (th[n - 1] - th[0]) / two_pi;
    let rho = spearman(&traj.t_grid, &th);
    let mk = |label| RegimeLabel {
        label,
        z_mean,
        z_sign_flips: flips,
        theta_winding,
        spearman: rho,
    };
    if theta_winding.abs() >= lit(2.0) && rho.abs() > lit(0.95) {
        return Ok(mk(Regime::RunningPhase));
    }
    let crossings = mean_crossings(traj).len();
    if crossings < 6 {
        return Err(Error::Ambiguous(format!("only {crossings} mean crossings, fewer than 3 periods")));
    }
    if flips == 0 && z_mean.abs() > lit(0.02) {
        Ok(mk(Regime::Mqst))
    } else {
        Ok(mk(Regime::Oscillation))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearOscillation<T> {
    /// Angular frequency in τ units.
    pub omega: T,
    /// Coefficient of ωr in the forced linear equation.
    pub forcing: T,
    /// Equilibrium shift of z produced by the forcing (relative to the
    /// unforced steady state for the π phase and bifurcated branches).
    pub offset: T,
}

/// Critical separation used by the near-bifurcation formulas.
pub const DELTA_C: f64 = 0.5867;

/// Small oscillations about z = 0, Θ = 0 for Δ below the bifurcation.
pub fn linear_zero_phase<T: Real>(params: &ModelParams<T>) -> Result<LinearOscillation<T>> {
    let d = params.delta_sep;
    let rad = lit::<T>(0.37) - d * d - lit::<T>(0.25) * d;
    if !(rad > T::zero()) {
        return Err(domain(format!("zero-phase linear formula needs 0.37 − Δ² − 0.25Δ > 0 (Δ = {d})")));
    }
    let omega = lit::<T>(13.4) * rad.sqrt();
    let forcing = lit::<T>(5.36) - lit::<T>(0.8) * d - lit::<T>(4.22) * d * d;
    Ok(LinearOscillation {
        omega,
        forcing,
        offset: -params.omega_ratio * forcing / (omega * omega),
    })
}

/// Small oscillations about the two bifurcated zero-phase states for Δ just
/// above the critical value; returns the (+, −) branches.
pub fn linear_bifurcation<T: Real>(params: &ModelParams<T>) -> Result<(LinearOscillation<T>, LinearOscillation<T>)> {
    let dm = params.delta_sep - lit(DELTA_C);
    if !(dm > T::zero()) {
        return Err(domain(format!("near-bifurcation formula needs Δ > {DELTA_C}")));
    }
    let rad = dm - lit::<T>(4.48) * dm * dm + lit::<T>(17.8) * dm.powi(3) - lit::<T>(53.5) * dm.powi(4);
    if !(rad > T::zero()) {
        return Err(domain(format!("near-bifurcation radicand non-positive at Δ − Δc = {dm}")));
    }
    let omega = lit::<T>(14.53) * rad.sqrt();
    let forcing = lit::<T>(3.4) - lit::<T>(7.26) * dm + lit::<T>(11.0) * dm * dm;
    let w2 = omega * omega;
    let split = (lit::<T>(1.2) - lit::<T>(18.0) * dm / w2) * dm.sqrt();
    let forced = -params.omega_ratio * forcing / w2;
    let mk = |offset| LinearOscillation { omega, forcing, offset };
    Ok((mk(split + forced), mk(-split + forced)))
}

/// Small oscillations about the π-phase states z = ±z₀.
pub fn linear_pi_phase<T: Real>(params: &ModelParams<T>) -> Result<LinearOscillation<T>> {
    let d = params.delta_sep;
    let rad = lit::<T>(2.0) - lit::<T>(0.9) * d * d - lit::<T>(0.3) * d;
    if !(rad > T::zero()) {
        return Err(domain(format!("π-phase linear formula needs 2 − 0.9Δ² − 0.3Δ > 0 (Δ = {d})")));
    }
    let omega = rad.sqrt();
    let forcing = lit::<T>(0.1) * (d * d + lit::<T>(0.38) * d + lit(5.5));
    Ok(LinearOscillation {
        omega,
        forcing,
        offset: forcing * params.omega_ratio / (omega * omega),
    })
}

#[derive(Debug, Clone)]
pub struct PortraitCell<T> {
    pub initial: PhaseState<T>,
    pub trajectory: Option<Trajectory<T>>,
    pub label: std::result::Result<RegimeLabel<T>, Error>,
}

/// One classified trajectory per (z₀, Θ₀) pair, z-major. Cells are computed
/// in parallel and returned in grid order; failures stay in their cell.
pub fn phase_portrait<T: Real>(
    params: &ModelParams<T>,
    z_grid: &[T],
    theta_grid: &[T],
    t_final: T,
    eval: &Evaluator<T>,
    opts: &IntegrateOptions<T>,
) -> Vec<PortraitCell<T>> {
    use rayon::prelude::*;
    let inits: Vec<PhaseState<T>> = z_grid
        .iter()
        .flat_map(|&z| theta_grid.iter().map(move |&th| PhaseState::new(z, th)))
        .collect();
    inits
        .par_iter()
        .map(|&initial| match integrate(params, initial, t_final, eval, opts) {
            Ok(traj) => {
                let label = if traj.is_complete() {
                    classify(&traj)
                } else {
                    Err(Error::Ambiguous(format!("integration stopped: {:?}", traj.outcome)))
                };
                PortraitCell {
                    initial,
                    trajectory: Some(traj),
                    label,
                }
            }
            Err(e) => PortraitCell {
                initial,
                trajectory: None,
                label: Err(e),
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::derive_params;
    use crate::FunctionalMode;

    #[test]
    fn rhs_examples() {
        let p = derive_params(0.4f64, 10, 0.0, 0.0).unwrap();
        let ev = Evaluator::new(FunctionalMode::Quadrature);
        for th in [0.0, 1.0, 2.5] {
            let (dz, _) = rhs(&p, &PhaseState::new(1.0, th), &ev).unwrap();
            assert_eq!(dz, 0.0);
            let (dz, _) = rhs(&p, &PhaseState::new(-1.0, th), &ev).unwrap();
            assert_eq!(dz, 0.0);
        }
        let (dz, dth) = rhs(&p, &PhaseState::new(0.0, 0.0), &ev).unwrap();
        assert!(dz.abs() < 1e-15 && dth.abs() < 1e-9);
    }

    #[test]
    fn self_test_passes() {
        self_test().unwrap();
    }

    #[test]
    fn linear_formula_examples() {
        let p = derive_params(0.4f64, 10, 0.0, 0.0).unwrap();
        let l = linear_zero_phase(&p).unwrap();
        assert!((l.omega - 13.4 * 0.37f64.sqrt()).abs() < 1e-12);
        assert!((l.omega - 8.151).abs() < 1e-3);
        assert_eq!(l.forcing, 5.36);
        assert_eq!(l.offset, 0.0);
        assert!(linear_zero_phase(&p.with_delta(0.7).unwrap()).is_err());

        let l = linear_pi_phase(&p).unwrap();
        assert!((l.omega - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(l.offset, 0.0);
        let l = linear_pi_phase(&p.with_delta(1.0).unwrap()).unwrap();
        assert!((l.omega - 0.8f64.sqrt()).abs() < 1e-15);

        let (a, b) = linear_bifurcation(&p.with_delta(DELTA_C + 0.01).unwrap()).unwrap();
        let rad: f64 = 0.01 - 4.48e-4 + 17.8e-6 - 53.5e-8;
        assert!((a.omega - 14.53 * rad.sqrt()).abs() < 1e-9);
        assert!((a.offset + b.offset).abs() < 1e-12 && a.offset > 0.0);
        let (a, _) = linear_bifurcation(&p.with_delta(DELTA_C + 1e-10).unwrap()).unwrap();
        assert!(a.offset.abs() < 1e-4);
        assert!(linear_bifurcation(&p.with_delta(0.5).unwrap()).is_err());
    }

    #[test]
    fn spearman_basics() {
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v * v).collect();
        assert!((spearman(&x, &y) - 1.0).abs() < 1e-12);
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((spearman(&x, &y) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_initial_state() {
        let p = derive_params(0.4f64, 10, 0.0, 0.0).unwrap();
        let ev = Evaluator::default();
        let r = integrate(&p, PhaseState::new(2.0, 0.0), 10.0, &ev, &IntegrateOptions::default());
        assert!(matches!(r, Err(Error::OutOfRange { what: "z0", .. })));
        assert!(integrate(&p, PhaseState::new(0.1, 0.0), -1.0, &ev, &IntegrateOptions::default()).is_err());
    }
}
