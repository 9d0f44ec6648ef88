//! Deterministic kernels of the harmonizable model.
//!
//! Notation: `gamma = 1 - H - 1/alpha`. The increment kernel is
//! `r(s) = (1 - e^{-is})/(is) |s|^gamma`, the geometric ratio is
//! `g_n(x) = (1 - e^{inx})/(1 - e^{ix})`, and the two pair kernels are
//! `h_n(s,u) = n^{1-2H} g_n(s-u) r(s) conj(r(u))` and its scaling limit `h`,
//! both supported on `u < s`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Relative distance to the nearest multiple of 2π below which `g_n` switches
/// to its Taylor expansion.
const GN_TAYLOR_THRESHOLD: f64 = 1e-8;

/// Stability index, Hurst parameter and the derived quantities used everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub hurst: f64,
    pub gamma: f64,
    pub clt_regime: bool,
}

impl ModelParams {
    pub fn new(alpha: f64, hurst: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(param("alpha", alpha, "must lie in (0, 2)"));
        }
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(param("hurst", hurst, "must lie in (0, 1)"));
        }
        Ok(Self {
            alpha,
            hurst,
            gamma: 1.0 - hurst - 1.0 / alpha,
            clt_regime: hurst > 0.5 && alpha * (1.0 - hurst) < 0.5,
        })
    }
}

/// `2 sin(x/2) / x`, the modulus-carrying part of `(1 - e^{-ix})/(ix)`.
fn sinc_half(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        2.0 * (0.5 * x).sin() / x
    }
}

fn zero_limit(gamma: f64) -> Complex64 {
    if gamma > 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(1.0, 0.0)
    }
}

/// Increment kernel `r(s) = (1 - e^{-is})/(is) |s|^gamma`.
///
/// Evaluated as `2 sin(s/2)/s * e^{-is/2} * |s|^gamma`, which is free of
/// cancellation near `s = 0`.
pub fn kernel_r(s: f64, p: &ModelParams) -> Result<Complex64> {
    if s.abs() < 1e-300 {
        if p.gamma < 0.0 {
            return Err(Error::Singular { location: s });
        }
        return Ok(zero_limit(p.gamma));
    }
    let modulus = sinc_half(s) * s.abs().powf(p.gamma);
    let (sin, cos) = (-0.5 * s).sin_cos();
    Ok(Complex64::new(modulus * cos, modulus * sin))
}

/// `(x - 2πk, k)` for the integer `k` nearest to `x / 2π`.
fn reduce_2pi(x: f64) -> (f64, f64) {
    let k = (x / TAU).round();
    (x - k * TAU, k)
}

/// Geometric ratio `g_n(x) = sum_{j<n} e^{ijx}`.
///
/// Accepts any real `x`; `g_n(-x) = conj(g_n(x))`.
pub fn kernel_gn(x: f64, n: u64) -> Complex64 {
    let nf = n as f64;
    let (delta, k) = reduce_2pi(x);
    if delta.abs() <= GN_TAYLOR_THRESHOLD * (k.abs() * TAU).max(1.0) {
        return Complex64::new(nf, 0.5 * delta * nf * (nf - 1.0));
    }
    // Dirichlet form: sin(nx/2)/sin(x/2) * e^{i(n-1)x/2}.
    let amp = (0.5 * nf * x).sin() / (0.5 * x).sin();
    let (sin, cos) = (0.5 * (nf - 1.0) * x).sin_cos();
    Complex64::new(amp * cos, amp * sin)
}

/// Explicit upper bound `min(n, 2/|1 - e^{ix}|)` for `|g_n(x)|`.
pub fn gn_bound(x: f64, n: u64) -> f64 {
    let nf = n as f64;
    let s = (0.5 * x).sin().abs();
    if s == 0.0 {
        nf
    } else {
        nf.min(1.0 / s)
    }
}

/// Pre-limit pair kernel `h_n(s,u) = n^{1-2H} g_n(s-u) r(s) conj(r(u)) 1{u<s}`.
pub fn kernel_hn(s: f64, u: f64, n: u64, p: &ModelParams) -> Result<Complex64> {
    if u >= s {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let rs = kernel_r(s, p).map_err(|_| Error::SingularPair { s, u })?;
    let ru = kernel_r(u, p).map_err(|_| Error::SingularPair { s, u })?;
    let scale = (n as f64).powf(1.0 - 2.0 * p.hurst);
    Ok(kernel_gn(s - u, n) * rs * ru.conj() * scale)
}

/// Limit pair kernel `h(s,u) = (e^{i(s-u)} - 1)/(i(s-u)) |su|^gamma 1{u<s}`.
///
/// This is the pointwise limit of `n^{-2/alpha} h_n(s/n, u/n)`; note the
/// orientation `e^{ix} - 1`, which is what `n^{-1} g_n(x/n)` converges to.
pub fn kernel_h(s: f64, u: f64, p: &ModelParams) -> Result<Complex64> {
    if u >= s {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let su = (s * u).abs();
    if su < 1e-300 && p.gamma < 0.0 {
        return Err(Error::SingularPair { s, u });
    }
    let x = s - u;
    // (e^{ix} - 1)/(ix) = 2 sin(x/2)/x * e^{ix/2}
    let modulus = sinc_half(x) * if su == 0.0 { 0.0 } else { su.powf(p.gamma) };
    let (sin, cos) = (0.5 * x).sin_cos();
    Ok(Complex64::new(modulus * cos, modulus * sin))
}

/// Normalising constant `c` of `psi`, solving `2 c^alpha (1 + 1/(r alpha - 1)) = 1`.
pub fn psi_constant(r_exp: f64, alpha: f64) -> Result<f64> {
    if !(r_exp * alpha > 1.0) {
        return Err(param("r_exp", r_exp, "r_exp * alpha must exceed 1"));
    }
    Ok((2.0 * (1.0 + 1.0 / (r_exp * alpha - 1.0))).powf(-1.0 / alpha))
}

/// Reference density `psi(s) = c (|s|^{-r} 1{|s|>1} + 1{|s|<=1})` with `int psi^alpha = 1`.
pub fn psi(s: f64, r_exp: f64, alpha: f64) -> Result<f64> {
    let c = psi_constant(r_exp, alpha)?;
    Ok(if s.abs() > 1.0 {
        c * s.abs().powf(-r_exp)
    } else {
        c
    })
}

/// Quadratic-variation weight `phi(s) = |s|^{-2H-2/alpha} (1 - cos s)`.
pub fn phi_qv(s: f64, p: &ModelParams) -> Result<f64> {
    if s == 0.0 {
        return Err(Error::Singular { location: s });
    }
    let half = (0.5 * s).sin();
    Ok(2.0 * half * half * s.abs().powf(-2.0 * p.hurst - 2.0 / p.alpha))
}

/// Nearest element of `{2πj : j >= 0}`; midpoint ties go to the smaller multiple.
pub fn nearest_2pi(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(param("x", x, "must be nonnegative"));
    }
    let q = x / TAU;
    let lower = q.floor();
    let j = if q - lower > 0.5 { lower + 1.0 } else { lower };
    Ok(j * TAU)
}
