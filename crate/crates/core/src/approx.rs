//! Even-polynomial surrogates for the coupling functionals, with
//! coefficients that are themselves quadratics in Δ, and their
//! certification against quadrature.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{self, EvalKind, FunctionalValues};
use crate::model::{stationarity_rhs, ThetaBranch};
use crate::scalar::{lit, Real};

/// Upper end of the fitted range.
pub const DELTA_MAX: f64 = 1.5;
/// Separations at or above this use the sextic fit.
pub const DELTA_SPLIT: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Fit {
    Quartic,
    Sextic,
}

/// One fit. Each row holds (Δ², Δ, 1) coefficients; rows run from the
/// highest power of z down to z⁰ in steps of z².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyRegime {
    pub fit: Fit,
    pub delta_min: f64,
    pub delta_max: f64,
    pub coeffs_i: &'static [[f64; 3]],
    pub coeffs_j: &'static [[f64; 3]],
}

pub const LOW: PolyRegime = PolyRegime {
    fit: Fit::Quartic,
    delta_min: 0.0,
    delta_max: DELTA_SPLIT,
    coeffs_i: &[[-1.0, -0.52, 0.1], [2.0, 0.76, -0.42], [-1.16, -0.24, 1.33]],
    coeffs_j: &[[-2.0, -0.72, 0.4], [3.9, 1.03, 0.07], [-1.9, -0.32, 2.7]],
};

pub const HIGH: PolyRegime = PolyRegime {
    fit: Fit::Sextic,
    delta_min: DELTA_SPLIT,
    delta_max: DELTA_MAX,
    coeffs_i: &[
        [0.31, -2.57, 1.43],
        [0.9, 1.24, -1.6],
        [-1.9, 3.5, -0.67],
        [0.69, -2.21, 1.85],
    ],
    coeffs_j: &[
        [-1.5, -0.13, 0.89],
        [4.62, -4.78, 0.15],
        [-4.0, 8.4, -1.45],
        [0.94, -3.52, 3.56],
    ],
};

impl Fit {
    pub fn regime(self) -> &'static PolyRegime {
        match self {
            Fit::Quartic => &LOW,
            Fit::Sextic => &HIGH,
        }
    }
}

/// Fit that covers `delta`; Δ = 0.6 belongs to the sextic.
pub fn regime_for<T: Real>(delta: T) -> Result<&'static PolyRegime> {
    let d = delta.f64();
    if !(0.0..=DELTA_MAX).contains(&d) {
        return Err(out_of_range(d));
    }
    Ok(if d < DELTA_SPLIT { &LOW } else { &HIGH })
}

fn out_of_range(d: f64) -> Error {
    Error::OutOfRange {
        what: "delta",
        value: d,
        min: 0.0,
        max: DELTA_MAX,
    }
}

/// Value and z-derivative of Σ c_k(Δ) z^{2k}.
fn even_poly<T: Real>(rows: &[[f64; 3]], z: T, delta: T) -> (T, T) {
    let z2 = z * z;
    let mut v = T::zero();
    let mut dv = T::zero();
    for row in rows {
        let c = (lit::<T>(row[0]) * delta + lit(row[1])) * delta + lit(row[2]);
        // Horner in z² for the value, and d/dz via d/dz² · 2z.
        dv = dv * z2 + v;
        v = v * z2 + c;
    }
    (v, lit::<T>(2.0) * z * dv)
}

impl PolyRegime {
    /// (I, J, dI/dz, dJ/dz) without a range check; callers decide whether
    /// using the fit at this Δ is permitted.
    pub fn eval<T: Real>(&self, z: T, delta: T) -> FunctionalValues<T> {
        let (i, di) = even_poly(self.coeffs_i, z, delta);
        let (j, dj) = even_poly(self.coeffs_j, z, delta);
        FunctionalValues {
            i_val: i,
            j_val: j,
            di_dz: di,
            dj_dz: dj,
            mode: EvalKind::Polynomial,
        }
    }

    /// z-coefficients of I at this Δ, highest power first.
    pub fn z_coeffs_i(&self, delta: f64) -> Vec<f64> {
        self.coeffs_i.iter().map(|r| (r[0] * delta + r[1]) * delta + r[2]).collect()
    }

    pub fn z_coeffs_j(&self, delta: f64) -> Vec<f64> {
        self.coeffs_j.iter().map(|r| (r[0] * delta + r[1]) * delta + r[2]).collect()
    }
}

fn check_z<T: Real>(z: T) -> Result<()> {
    if !(z.abs() <= T::one()) {
        return Err(Error::OutOfRange {
            what: "z",
            value: z.f64(),
            min: -1.0,
            max: 1.0,
        });
    }
    Ok(())
}

/// Surrogate for I, regime chosen by Δ.
pub fn poly_i<T: Real>(z: T, delta: T) -> Result<T> {
    check_z(z)?;
    Ok(regime_for(delta)?.eval(z, delta).i_val)
}

/// Surrogate for J, regime chosen by Δ.
pub fn poly_j<T: Real>(z: T, delta: T) -> Result<T> {
    check_z(z)?;
    Ok(regime_for(delta)?.eval(z, delta).j_val)
}

/// Surrogate values with analytic derivatives. `fit = None` picks the
/// regime by Δ; a forced fit is still limited to 0 ≤ Δ ≤ 1.5.
pub fn poly_values<T: Real>(z: T, delta: T, fit: Option<Fit>) -> Result<FunctionalValues<T>> {
    check_z(z)?;
    let d = delta.f64();
    if !(0.0..=DELTA_MAX).contains(&d) {
        return Err(out_of_range(d));
    }
    let reg = match fit {
        Some(f) => f.regime(),
        None => regime_for(delta)?,
    };
    Ok(reg.eval(z, delta))
}

/// Right-hand side of ωr = f(z) on a Θ branch, built from the surrogate
/// functionals and their analytic derivatives.
pub fn stationarity_poly<T: Real>(branch: ThetaBranch, z: T, delta: T) -> Result<T> {
    let fv = poly_values(z, delta, None)?;
    Ok(stationarity_rhs(branch, z, &fv))
}

/// Closed forms of the stationary condition at Δ = 0 with rounded coefficients.
pub fn stationarity_smalldelta<T: Real>(branch: ThetaBranch, z: T) -> T {
    let c: [f64; 4] = match branch {
        ThetaBranch::Zero => [1.2, -8.0, 15.0, -12.5],
        ThetaBranch::Pi => [1.2, -3.2, 12.3, -2.0],
    };
    let z2 = z * z;
    let mut v = T::zero();
    for k in c {
        v = v * z2 + lit(k);
    }
    v * z
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Functional {
    I,
    J,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertRow {
    pub z: f64,
    pub delta: f64,
    pub poly: f64,
    pub quad: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertReport {
    pub tol_rel: f64,
    pub max_rel_err: f64,
    pub worst: CertRow,
    pub worst_functional: Functional,
    pub pass: bool,
    pub rows_i: Vec<CertRow>,
    pub rows_j: Vec<CertRow>,
}

/// z grid of 41 points on [−1, 1] and Δ grid of 31 points on [0, 1.5].
pub fn default_grids() -> (Vec<f64>, Vec<f64>) {
    let z = (0..41).map(|k| -1.0 + k as f64 * 0.05).collect();
    let d = (0..31).map(|k| k as f64 * 0.05).collect();
    (d, z)
}

/// Compares the regime-appropriate surrogate with quadrature at every grid
/// point and reports the largest relative deviation of either functional.
pub fn certify(delta_grid: &[f64], z_grid: &[f64], tol_rel: f64, quad_tol: f64) -> Result<CertReport> {
    use rayon::prelude::*;

    let mut points = Vec::with_capacity(delta_grid.len() * z_grid.len());
    for &d in delta_grid {
        regime_for(d)?;
        for &z in z_grid {
            check_z(z)?;
            points.push((z, d));
        }
    }
    let rows: Vec<(CertRow, CertRow)> = points
        .par_iter()
        .map(|&(z, d)| -> Result<(CertRow, CertRow)> {
            let fv = poly_values(z, d, None)?;
            let (qi, qj) = functionals::eval_ij(z, d, quad_tol)?;
            let row = |poly: f64, quad: f64| CertRow {
                z,
                delta: d,
                poly,
                quad,
                rel_err: ((poly - quad) / quad).abs(),
            };
            Ok((row(fv.i_val, qi), row(fv.j_val, qj)))
        })
        .collect::<Result<_>>()?;
    let (rows_i, rows_j): (Vec<_>, Vec<_>) = rows.into_iter().unzip();

    let mut worst = CertRow {
        z: f64::NAN,
        delta: f64::NAN,
        poly: f64::NAN,
        quad: f64::NAN,
        rel_err: 0.0,
    };
    let mut worst_functional = Functional::I;
    for (f, rows) in [(Functional::I, &rows_i), (Functional::J, &rows_j)] {
        for r in rows.iter() {
            if r.rel_err > worst.rel_err || worst.z.is_nan() {
                worst = *r;
                worst_functional = f;
            }
        }
    }
    Ok(CertReport {
        tol_rel,
        max_rel_err: worst.rel_err,
        worst,
        worst_functional,
        pass: worst.rel_err <= tol_rel,
        rows_i,
        rows_j,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitted_values() {
        assert!((poly_i(0.0f64, 0.0).unwrap() - 1.33).abs() < 1e-15);
        assert!((poly_i(1.0f64, 0.0).unwrap() - 1.01).abs() < 1e-14);
        assert!((poly_j(0.0f64, 0.0).unwrap() - 2.7).abs() < 1e-15);
        assert!((poly_j(1.0f64, 0.0).unwrap() - 3.17).abs() < 1e-14);
    }

    #[test]
    fn coefficient_rows_at_delta() {
        let c = HIGH.z_coeffs_i(1.0);
        let want = [0.31 - 2.57 + 1.43, 0.9 + 1.24 - 1.6, -1.9 + 3.5 - 0.67, 0.69 - 2.21 + 1.85];
        for (a, b) in c.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn regime_boundaries() {
        assert_eq!(regime_for(0.59).unwrap().fit, Fit::Quartic);
        assert_eq!(regime_for(0.6).unwrap().fit, Fit::Sextic);
        assert_eq!(regime_for(1.5).unwrap().fit, Fit::Sextic);
        assert!(matches!(regime_for(1.51), Err(Error::OutOfRange { .. })));
        assert!(poly_i(0.2, 2.0).is_err());
        assert!(poly_j(1.2, 0.2).is_err());
    }

    #[test]
    fn derivative_matches_difference() {
        for reg in [&LOW, &HIGH] {
            for &(z, d) in &[(0.3f64, 0.2f64), (-0.7, 1.1), (0.95, 0.6)] {
                let fv = reg.eval(z, d);
                let h = 1e-6;
                let (p, m) = (reg.eval(z + h, d), reg.eval(z - h, d));
                assert!((fv.di_dz - (p.i_val - m.i_val) / (2.0 * h)).abs() < 1e-8);
                assert!((fv.dj_dz - (p.j_val - m.j_val) / (2.0 * h)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn small_delta_closed_form_value() {
        let v = stationarity_smalldelta(ThetaBranch::Zero, 0.5);
        let want = 1.2 * 0.5f64.powi(7) - 8.0 * 0.5f64.powi(5) + 15.0 * 0.125 - 6.25;
        assert!((v - want).abs() < 1e-14);
        assert!((v + 4.6156).abs() < 1e-3);
        assert_eq!(stationarity_poly(ThetaBranch::Pi, 0.0, 0.9).unwrap(), 0.0);
    }

    #[test]
    fn f32_evaluation() {
        let v: f32 = poly_j(0.5f32, 1.0).unwrap();
        let w = poly_j(0.5f64, 1.0).unwrap();
        assert!((v as f64 - w).abs() < 1e-5);
    }
}
