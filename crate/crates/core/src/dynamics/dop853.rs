//! Explicit Runge-Kutta 8(5,3) of Dormand and Prince with step-size control
//! and the seventh-order continuous extension, for fixed-size systems.

use super::tableau::{A, B, C, D, E3, E5, STAGES, STAGES_EXT};
use crate::error::Result;
use crate::scalar::{lit, Real};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
    /// Upper bound on |h|; infinite by default.
    pub h_max: T,
}

impl<T: Real> Default for Options<T> {
    fn default() -> Self {
        Self {
            rtol: lit(1e-10),
            atol: lit(1e-12),
            max_steps: 5_000_000,
            h_max: T::infinity(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status<T> {
    Finished,
    /// Step size fell below the resolution of t.
    StepUnderflow { t: T },
    TooManySteps { t: T },
    RhsFailed { t: T, message: String },
}

#[derive(Debug, Clone)]
pub struct Solution<T, const N: usize> {
    /// Output times actually reached (a prefix of the requested ones).
    pub t: Vec<T>,
    pub y: Vec<[T; N]>,
    pub accepted: usize,
    pub rejected: usize,
    pub evals: usize,
    pub status: Status<T>,
}

fn axpy<T: Real, const N: usize>(y: &[T; N], h: T, ks: &[[T; N]], coeffs: &[f64]) -> [T; N] {
    let mut out = *y;
    for (k, &c) in ks.iter().zip(coeffs) {
        if c == 0.0 {
            continue;
        }
        let c: T = lit(c);
        for i in 0..N {
            out[i] = out[i] + h * c * k[i];
        }
    }
    out
}

fn rms_norm<T: Real, const N: usize>(v: &[T; N], scale: &[T; N]) -> T {
    let mut s = T::zero();
    for i in 0..N {
        let r = v[i] / scale[i];
        s = s + r * r;
    }
    (s / lit(N as f64)).sqrt()
}

fn initial_step<T: Real, const N: usize, F>(f: &mut F, t0: T, y0: &[T; N], f0: &[T; N], dir: T, opt: &Options<T>, evals: &mut usize) -> Result<T>
where
    F: FnMut(T, &[T; N]) -> Result<[T; N]>,
{
    let mut scale = [T::zero(); N];
    for i in 0..N {
        scale[i] = opt.atol + y0[i].abs() * opt.rtol;
    }
    let d0 = rms_norm(y0, &scale);
    let d1 = rms_norm(f0, &scale);
    let h0 = if d0 < lit(1e-5) || d1 < lit(1e-5) {
        lit(1e-6)
    } else {
        lit::<T>(0.01) * d0 / d1
    };
    let mut y1 = *y0;
    for i in 0..N {
        y1[i] = y0[i] + h0 * dir * f0[i];
    }
    let f1 = f(t0 + h0 * dir, &y1)?;
    *evals += 1;
    let mut df = [T::zero(); N];
    for i in 0..N {
        df[i] = f1[i] - f0[i];
    }
    let d2 = rms_norm(&df, &scale) / h0;
    let h1 = if d1 <= lit(1e-15) && d2 <= lit(1e-15) {
        (h0 * lit(1e-3)).max(lit(1e-6))
    } else {
        (lit::<T>(0.01) / d1.max(d2)).powf(lit(1.0 / 8.0))
    };
    Ok((h0 * lit(100.0)).min(h1).min(opt.h_max))
}

/// Integrates `y' = f(t, y)` from `t0` and reports the solution at the
/// increasing times `t_out` (all ≥ `t0`) through dense output. `project`
/// runs on every accepted state and may pull it back onto the admissible set.
pub fn solve<T, const N: usize, F, P>(mut f: F, t0: T, y0: [T; N], t_out: &[T], opt: &Options<T>, mut project: P) -> Solution<T, N>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> Result<[T; N]>,
    P: FnMut(&mut [T; N]),
{
    let mut sol = Solution {
        t: Vec::with_capacity(t_out.len()),
        y: Vec::with_capacity(t_out.len()),
        accepted: 0,
        rejected: 0,
        evals: 0,
        status: Status::Finished,
    };
    let t_end = match t_out.last() {
        Some(&t) => t,
        None => return sol,
    };
    let mut next = 0;
    while next < t_out.len() && t_out[next] <= t0 {
        sol.t.push(t_out[next]);
        sol.y.push(y0);
        next += 1;
    }
    if next == t_out.len() {
        return sol;
    }

    let fail = |sol: &mut Solution<T, N>, t: T, e: crate::Error| {
        sol.status = Status::RhsFailed {
            t,
            message: e.to_string(),
        };
    };

    let mut t = t0;
    let mut y = y0;
    let mut fy = match f(t, &y) {
        Ok(v) => v,
        Err(e) => {
            fail(&mut sol, t, e);
            return sol;
        }
    };
    sol.evals += 1;
    let mut h = match initial_step(&mut f, t, &y, &fy, T::one(), opt, &mut sol.evals) {
        Ok(h) => h,
        Err(e) => {
            fail(&mut sol, t, e);
            return sol;
        }
    };
    let exponent: T = lit(-1.0 / 8.0);
    let mut k = [[T::zero(); N]; STAGES_EXT];
    let mut steps = 0usize;

    while t < t_end {
        if steps >= opt.max_steps {
            sol.status = Status::TooManySteps { t };
            return sol;
        }
        steps += 1;
        let min_step = lit::<T>(10.0) * (t.abs().max(T::one()) * T::epsilon());
        h = h.min(opt.h_max);
        if h < min_step {
            sol.status = Status::StepUnderflow { t };
            return sol;
        }
        let mut step_rejected = false;
        // Attempt steps until one is accepted.
        let (t_new, y_new, f_new, h_used) = loop {
            let mut h_try = h;
            let mut last = false;
            if t + h_try >= t_end {
                h_try = t_end - t;
                last = true;
            }
            k[0] = fy;
            let mut bad = None;
            for s in 1..STAGES {
                let ys = axpy(&y, h_try, &k[..s], &A[s][..s]);
                match f(t + h_try * lit(C[s]), &ys) {
                    Ok(v) => k[s] = v,
                    Err(e) => {
                        bad = Some(e);
                        break;
                    }
                }
            }
            if let Some(e) = bad {
                fail(&mut sol, t, e);
                return sol;
            }
            sol.evals += STAGES - 1;
            let mut y_new = axpy(&y, h_try, &k[..STAGES], &B);
            let f_new = match f(t + h_try, &y_new) {
                Ok(v) => v,
                Err(e) => {
                    fail(&mut sol, t, e);
                    return sol;
                }
            };
            sol.evals += 1;

            let mut scale = [T::zero(); N];
            let mut e5 = [T::zero(); N];
            let mut e3 = [T::zero(); N];
            for i in 0..N {
                scale[i] = opt.atol + y[i].abs().max(y_new[i].abs()) * opt.rtol;
                for s in 0..STAGES {
                    e5[i] = e5[i] + lit::<T>(E5[s]) * k[s][i];
                    e3[i] = e3[i] + lit::<T>(E3[s]) * k[s][i];
                }
            }
            let n5 = {
                let r = rms_norm(&e5, &scale);
                r * r * lit(N as f64)
            };
            let n3 = {
                let r = rms_norm(&e3, &scale);
                r * r * lit(N as f64)
            };
            let err = if n5 == T::zero() && n3 == T::zero() {
                T::zero()
            } else {
                h_try.abs() * n5 / ((n5 + lit::<T>(0.01) * n3) * lit(N as f64)).sqrt()
            };

            if err < T::one() {
                let factor = if err == T::zero() {
                    lit(MAX_FACTOR)
                } else {
                    (lit::<T>(SAFETY) * err.powf(exponent)).min(lit(MAX_FACTOR))
                };
                let factor = if step_rejected { factor.min(T::one()) } else { factor };
                h = h_try * factor;
                let t_new = if last { t_end } else { t + h_try };
                project(&mut y_new);
                break (t_new, y_new, f_new, h_try);
            }
            step_rejected = true;
            sol.rejected += 1;
            h = h_try * (lit::<T>(SAFETY) * err.powf(exponent)).max(lit(MIN_FACTOR));
            if h < min_step {
                sol.status = Status::StepUnderflow { t };
                return sol;
            }
        };
        sol.accepted += 1;

        if next < t_out.len() && t_out[next] <= t_new {
            // Continuous extension over [t, t_new].
            k[STAGES] = f_new;
            for s in STAGES + 1..STAGES_EXT {
                let ys = axpy(&y, h_used, &k[..s], &A[s][..s]);
                match f(t + h_used * lit(C[s]), &ys) {
                    Ok(v) => k[s] = v,
                    Err(e) => {
                        fail(&mut sol, t, e);
                        return sol;
                    }
                }
            }
            sol.evals += STAGES_EXT - STAGES - 1;
            let mut cf = [[T::zero(); N]; 7];
            for i in 0..N {
                let dy = y_new[i] - y[i];
                cf[0][i] = dy;
                cf[1][i] = h_used * fy[i] - dy;
                cf[2][i] = dy + dy - h_used * (f_new[i] + fy[i]);
                for r in 0..4 {
                    let mut acc = T::zero();
                    for s in 0..STAGES_EXT {
                        acc = acc + lit::<T>(D[r][s]) * k[s][i];
                    }
                    cf[3 + r][i] = h_used * acc;
                }
            }
            while next < t_out.len() && t_out[next] <= t_new {
                let x = (t_out[next] - t) / h_used;
                let mut out = [T::zero(); N];
                for i in 0..N {
                    let mut v = T::zero();
                    for (j, c) in cf.iter().rev().enumerate() {
                        v = v + c[i];
                        v = if j % 2 == 0 { v * x } else { v * (T::one() - x) };
                    }
                    out[i] = y[i] + v;
                }
                if t_out[next] == t_new {
                    out = y_new;
                }
                project(&mut out);
                sol.t.push(t_out[next]);
                sol.y.push(out);
                next += 1;
            }
        }
        t = t_new;
        y = y_new;
        fy = f_new;
    }
    sol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let ts: Vec<f64> = (0..=100).map(|k| k as f64 * 0.3).collect();
        let opt = Options {
            rtol: 1e-12,
            atol: 1e-14,
            ..Options::default()
        };
        let s = solve(|_, y: &[f64; 2]| Ok([y[1], -y[0]]), 0.0, [1.0, 0.0], &ts, &opt, |_| {});
        assert_eq!(s.status, Status::Finished);
        assert_eq!(s.t.len(), ts.len());
        for (t, y) in s.t.iter().zip(&s.y) {
            assert!((y[0] - t.cos()).abs() < 1e-10, "t={t}");
            assert!((y[1] + t.sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn dense_output_is_accurate_between_steps() {
        // Large tolerance forces long steps; dense output must stay close.
        let ts: Vec<f64> = (0..=400).map(|k| k as f64 * 0.01).collect();
        let opt = Options {
            rtol: 1e-8,
            atol: 1e-10,
            ..Options::default()
        };
        let s = solve(|_, y: &[f64; 1]| Ok([-y[0]]), 0.0, [1.0], &ts, &opt, |_| {});
        assert!(s.accepted < 40);
        for (t, y) in s.t.iter().zip(&s.y) {
            assert!((y[0] - (-t).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn stops_on_rhs_failure() {
        let ts = [0.0, 1.0, 2.0];
        let s = solve(
            |t, y: &[f64; 1]| if t > 1.5 { Err(crate::Error::Domain("boom".into())) } else { Ok([y[0]]) },
            0.0,
            [1.0],
            &ts,
            &Options::default(),
            |_| {},
        );
        assert!(matches!(s.status, Status::RhsFailed { .. }));
        assert!(s.t.len() < 3);
    }

    #[test]
    fn single_precision_runs() {
        let ts = [0.0f32, 1.0];
        let opt = Options {
            rtol: 1e-5,
            atol: 1e-6,
            ..Options::default()
        };
        let s = solve(|_, y: &[f32; 1]| Ok([-y[0]]), 0.0, [1.0], &ts, &opt, |_| {});
        assert!((s.y[1][0] - (-1.0f32).exp()).abs() < 1e-4);
    }
}
