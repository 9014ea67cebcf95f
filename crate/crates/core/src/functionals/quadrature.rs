//! Globally adaptive Gauss-Kronrod (G10/K21) quadrature over a partitioned
//! interval, with vector-valued integrands sharing one set of nodes.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

// Positive Kronrod abscissae, descending; odd indices are the Gauss nodes.
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077926051946576,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Default panel budget before giving up.
pub const MAX_PANELS: usize = 4000;

#[derive(Debug, Clone, Copy)]
pub struct Quad<T, const K: usize> {
    pub value: [T; K],
    /// Sum over panels of the per-panel error estimate (max over components).
    pub error: T,
    pub evals: usize,
}

#[derive(Clone, Copy)]
struct Panel<T, const K: usize> {
    a: T,
    b: T,
    value: [T; K],
    error: T,
}

fn kronrod21<T: Real, const K: usize, F>(f: &F, a: T, b: T) -> Panel<T, K>
where
    F: Fn(T) -> [T; K],
{
    let half = (b - a) * lit(0.5);
    let mid = (a + b) * lit(0.5);
    let mut rk = [T::zero(); K];
    let mut rg = [T::zero(); K];

    let fc = f(mid);
    for c in 0..K {
        rk[c] = fc[c] * lit(WGK[10]);
    }
    for j in 0..10 {
        let dx = half * lit(XGK[j]);
        let f1 = f(mid - dx);
        let f2 = f(mid + dx);
        for c in 0..K {
            let s = f1[c] + f2[c];
            rk[c] = rk[c] + s * lit(WGK[j]);
            if j % 2 == 1 {
                rg[c] = rg[c] + s * lit(WG[j / 2]);
            }
        }
    }
    let mut err = T::zero();
    for c in 0..K {
        rk[c] = rk[c] * half;
        rg[c] = rg[c] * half;
        err = err.max((rk[c] - rg[c]).abs());
    }
    Panel {
        a,
        b,
        value: rk,
        error: err,
    }
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, starting from the given
/// partition and bisecting the worst panel until the summed error estimate
/// drops below `tol`.
pub fn integrate_vec<T: Real, const K: usize, F>(
    f: F,
    breaks: &[T],
    tol: T,
    max_panels: usize,
) -> Result<Quad<T, K>>
where
    F: Fn(T) -> [T; K],
{
    if breaks.len() < 2 {
        return Err(Error::Domain("quadrature needs at least one interval".into()));
    }
    if !(tol > T::zero()) {
        return Err(Error::Domain("quadrature tolerance must be positive".into()));
    }
    let mut panels: Vec<Panel<T, K>> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod21(&f, w[0], w[1]))
        .collect();
    let mut evals = 21 * panels.len();

    loop {
        let total: T = panels.iter().fold(T::zero(), |s, p| s + p.error);
        if total <= tol {
            break;
        }
        if panels.len() >= max_panels {
            return Err(Error::Convergence {
                achieved: total.f64(),
                requested: tol.f64(),
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |(bi, be), (i, p)| {
                if p.error > be {
                    (i, p.error)
                } else {
                    (bi, be)
                }
            });
        let p = panels[worst];
        let m = (p.a + p.b) * lit(0.5);
        if !(m > p.a && m < p.b) {
            // Panel cannot be split further in this precision.
            return Err(Error::Convergence {
                achieved: total.f64(),
                requested: tol.f64(),
            });
        }
        panels[worst] = kronrod21(&f, p.a, m);
        panels.push(kronrod21(&f, m, p.b));
        evals += 42;
    }

    // Sum in left-to-right order so the result does not depend on refinement order.
    panels.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap_or(std::cmp::Ordering::Equal));
    let mut value = [T::zero(); K];
    let mut error = T::zero();
    for p in &panels {
        for c in 0..K {
            value[c] = value[c] + p.value[c];
        }
        error = error + p.error;
    }
    Ok(Quad {
        value,
        error,
        evals,
    })
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<T: Real, F>(f: F, a: T, b: T, tol: T) -> Result<(T, T)>
where
    F: Fn(T) -> T,
{
    let q = integrate_vec(|x| [f(x)], &[a, b], tol, MAX_PANELS)?;
    Ok((q.value[0], q.error))
}
