//! Random variate generation for symmetric and isotropic stable laws.
//!
//! All stable samplers use the characteristic-function convention
//! `E exp(i t X) = exp(-scale^alpha |t|^alpha)`. A complex variate `Z` is
//! called isotropic with scale `sigma` when `Re(conj(w) Z)` is SαS with scale
//! `sigma |w|` for every complex `w`; in particular its real and imaginary
//! parts are both SαS(sigma).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::distr::Open01;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{param, Result};

/// A reproducible random substream keyed on `(master_seed, stream_index)`.
///
/// The underlying generator is ChaCha8 seeded from `master_seed` with its
/// stream word set to `stream_index`, so distinct indices address disjoint
/// keystreams of the same cipher key.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self {
            master_seed,
            stream_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        self.rng.sample(Open01)
    }

    /// Uniform draw on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn exp1(&mut self) -> f64 {
        self.rng.sample(Exp1)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn check_alpha_scale(alpha: f64, scale: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(param("alpha", alpha, "must lie in (0, 2]"));
    }
    if !(scale >= 0.0) || !scale.is_finite() {
        return Err(param("scale", scale, "must be finite and nonnegative"));
    }
    Ok(())
}

/// Standard SαS draw (scale 1) by the Chambers–Mallows–Stuck method.
fn cms_unit(alpha: f64, rng: &mut RngStream) -> f64 {
    let v = PI * (rng.uniform_open() - 0.5);
    if alpha == 1.0 {
        return v.tan();
    }
    let w = rng.exp1();
    let (sin_av, cos_v) = ((alpha * v).sin(), v.cos());
    sin_av / cos_v.powf(1.0 / alpha) * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Draw from SαS(`scale`).
pub fn sample_sas(alpha: f64, scale: f64, rng: &mut RngStream) -> Result<f64> {
    check_alpha_scale(alpha, scale)?;
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(scale * cms_unit(alpha, rng))
}

/// Positive stable draw with Laplace transform `exp(-lambda^a)`, `a in (0, 1)`
/// (Kanter's representation).
fn positive_stable(a: f64, rng: &mut RngStream) -> f64 {
    let u = PI * rng.uniform_open();
    let e = rng.exp1();
    let lead = ((a * u).sin() / u.sin()).powf(1.0 / a);
    lead * (((1.0 - a) * u).sin() / ((a * u).sin() * e)).powf((1.0 - a) / a)
}

/// Draw an isotropic complex α-stable value with the given scale.
///
/// Built as a Gaussian scale mixture `scale * sqrt(2A) * (N1 + i N2)` with
/// `A` positive (α/2)-stable; the mixture is rotation invariant because the
/// complex Gaussian is.
pub fn sample_isotropic_stable(alpha: f64, scale: f64, rng: &mut RngStream) -> Result<Complex64> {
    check_alpha_scale(alpha, scale)?;
    if scale == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mix = if alpha == 2.0 {
        1.0
    } else {
        positive_stable(alpha / 2.0, rng)
    };
    let radius = scale * (2.0 * mix).sqrt();
    let re = rng.standard_normal();
    let im = rng.standard_normal();
    Ok(Complex64::new(radius * re, radius * im))
}

/// Arrival times `Γ_1 < ... < Γ_count` of a unit-rate Poisson process.
pub fn poisson_arrivals(count: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(param("count", 0.0, "must be at least 1"));
    }
    let mut acc = 0.0;
    Ok((0..count)
        .map(|_| {
            acc += rng.exp1();
            acc
        })
        .collect())
}

/// Uniform angle on [0, 2π).
pub(crate) fn uniform_angle(rng: &mut RngStream) -> f64 {
    2.0 * PI * rng.uniform()
}
