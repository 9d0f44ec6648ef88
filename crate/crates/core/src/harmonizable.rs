//! Pathwise-coupled functionals of the harmonizable fractional stable motion.
//!
//! Everything here is computed from one [`JumpMeasure`]: the increments
//! `Y_j = sum_i e^{i j s_i} r(s_i) z_i`, the quadratic statistic
//! `Q_m = sum_{j<m} |Y_j|^2`, the random level
//! `U = 2 sum_i phi(s_i) |z_i|^2`, and the Rosenblatt-type double integral
//! `2 Re sum_{k<i} h(s_i, s_k) conj(z_k) z_i`.

use std::io::Write;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::kernels::{kernel_h, kernel_r, phi_qv, ModelParams};
use crate::levy::{double_integrate, integrate_qv, JumpMeasure};

/// Steps between exact re-evaluations of the rotation `e^{ijs}`.
const RENORMALIZE_EVERY: usize = 1024;

/// Above this many atoms `realized_rosenblatt` switches to the `t`-quadrature.
pub const BRUTE_FORCE_MAX_ATOMS: usize = 2000;

/// Where a jump measure came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub stream: u64,
    pub half_width: f64,
    pub n_terms: usize,
}

impl Provenance {
    pub fn of(jm: &JumpMeasure, seed: u64, stream: u64) -> Self {
        Self {
            seed,
            stream,
            half_width: jm.half_width(),
            n_terms: jm.n_terms(),
        }
    }
}

/// Increments `Y_0, ..., Y_{n-1}` of the process.
#[derive(Clone, Debug, PartialEq)]
pub struct IncrementSeries {
    pub n: usize,
    pub increments: Vec<Complex64>,
    pub params: ModelParams,
    pub source: Option<Provenance>,
    /// `sum_i |e^{ijs_i} r(s_i) z_i|^2` as accumulated alongside `Y_j`.
    diagonal: Vec<f64>,
}

impl IncrementSeries {
    /// `V_j = |Y_j|^2 - sum_i |r(s_i) z_i|^2`, the off-diagonal part of `|Y_j|^2`.
    pub fn centered_square(&self, j: usize) -> f64 {
        self.increments[j].norm_sqr() - self.diagonal[j]
    }

    /// `(1/m) sum_{j<m} V_j`, i.e. `Q_m/m - U` evaluated without forming `Q_m`.
    pub fn mean_centered(&self, m: usize) -> Result<f64> {
        check_m(m, self.n)?;
        Ok((0..m).map(|j| self.centered_square(j)).sum::<f64>() / m as f64)
    }

    /// CSV with columns `j,re,im`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "j,re,im")?;
        for (j, y) in self.increments.iter().enumerate() {
            writeln!(out, "{j},{:.16e},{:.16e}", y.re, y.im)?;
        }
        Ok(())
    }
}

fn check_m(m: usize, n: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::Range { index: m, len: n });
    }
    Ok(())
}

fn cis(x: f64) -> Complex64 {
    let (s, c) = x.sin_cos();
    Complex64::new(c, s)
}

/// Increments `Y_j`, `j = 0..n`, by per-atom rotation `e^{i(j+1)s} = e^{ijs} e^{is}`.
pub fn simulate_increments(jm: &JumpMeasure, n: usize, p: &ModelParams) -> Result<IncrementSeries> {
    if n == 0 {
        return Err(param("n", 0.0, "must be at least 1"));
    }
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    let mut diag = vec![0.0; n];
    for atom in jm.atoms() {
        let s = atom.location;
        let w = kernel_r(s, p).map_err(|_| Error::Singular { location: s })? * atom.value;
        let step = cis(s);
        for start in (0..n).step_by(RENORMALIZE_EVERY) {
            let end = (start + RENORMALIZE_EVERY).min(n);
            let mut cur = if start == 0 { w } else { w * cis(start as f64 * s) };
            for (yj, dj) in y[start..end].iter_mut().zip(&mut diag[start..end]) {
                *yj += cur;
                *dj += cur.norm_sqr();
                cur *= step;
            }
        }
    }
    Ok(IncrementSeries {
        n,
        increments: y,
        params: *p,
        source: None,
        diagonal: diag,
    })
}

/// `U = 2 int phi d([L1] + [L2])`.
pub fn realized_u(jm: &JumpMeasure, p: &ModelParams) -> Result<f64> {
    Ok(2.0 * integrate_qv(jm, |s| phi_qv(s, p))?)
}

/// `Q_m = sum_{j<m} |Y_j|^2`.
pub fn quadratic_statistic(inc: &IncrementSeries, m: usize) -> Result<f64> {
    check_m(m, inc.n)?;
    Ok(inc.increments[..m].iter().map(|y| y.norm_sqr()).sum())
}

/// `m^{2-2H} (Q_m/m - U)`.
pub fn normalized_error(q_m: f64, u_realized: f64, m: usize, p: &ModelParams) -> f64 {
    let mf = m as f64;
    mf.powf(2.0 - 2.0 * p.hurst) * (q_m / mf - u_realized)
}

/// `2 Re iint h dconj(L) dL` by direct summation over ordered pairs.
pub fn rosenblatt_brute(jm: &JumpMeasure, p: &ModelParams) -> Result<f64> {
    Ok(2.0 * double_integrate(jm, |s, u| kernel_h(s, u, p))?.re)
}

/// Default number of Gauss–Legendre nodes for [`rosenblatt_fast`]: the
/// integrand is a trigonometric polynomial in `t` with frequencies up to the
/// window width `2M`.
pub fn default_t_nodes(half_width: f64) -> usize {
    (2.0 * half_width).ceil() as usize + 64
}

/// `2 Re iint h dconj(L) dL` via the `t`-representation.
///
/// With `(e^{ix} - 1)/(ix) = int_0^1 e^{itx} dt` and
/// `A(t) = sum_i e^{i t s_i} |s_i|^gamma z_i`, the ordered pair sum equals
/// `int_0^1 |A(t)|^2 dt - sum_i |s_i|^{2 gamma} |z_i|^2`. The `t`-integral is
/// done by Gauss–Legendre quadrature with `t_nodes` nodes, so the cost is
/// `O(n_terms * t_nodes)`.
pub fn rosenblatt_fast(jm: &JumpMeasure, p: &ModelParams, t_nodes: usize) -> Result<f64> {
    if t_nodes < 2 {
        return Err(param("t_nodes", t_nodes as f64, "must be at least 2"));
    }
    if jm.n_terms() < 2 {
        return Ok(0.0);
    }
    let rule = GaussLegendre::new(t_nodes).map_err(|e| Error::Config(e.to_string()))?;
    // Nodes on [-1, 1] come in ± pairs; t = (1 + x)/2, so t - 1/2 = x/2.
    let mut half_offsets = Vec::new();
    let mut pair_weights = Vec::new();
    let mut centre_weight = 0.0;
    for &(x, w) in rule.as_node_weight_pairs() {
        if x > 1e-14 {
            half_offsets.push(0.5 * x);
            pair_weights.push(0.5 * w);
        } else if x.abs() <= 1e-14 {
            centre_weight = 0.5 * w;
        }
    }
    let k = half_offsets.len();
    let mut a_plus = vec![Complex64::new(0.0, 0.0); k];
    let mut a_minus = vec![Complex64::new(0.0, 0.0); k];
    let mut a_centre = Complex64::new(0.0, 0.0);
    let mut diagonal = 0.0;
    for atom in jm.atoms() {
        let s = atom.location;
        if s == 0.0 && p.gamma < 0.0 {
            return Err(Error::Singular { location: s });
        }
        let amp = if s == 0.0 { 0.0 } else { s.abs().powf(p.gamma) };
        let c = cis(0.5 * s) * atom.value * amp;
        diagonal += c.norm_sqr();
        a_centre += c;
        for ((d, ap), am) in half_offsets.iter().zip(&mut a_plus).zip(&mut a_minus) {
            let e = cis(d * s);
            *ap += c * e;
            *am += c * e.conj();
        }
    }
    let mut integral = centre_weight * a_centre.norm_sqr();
    for ((w, ap), am) in pair_weights.iter().zip(&a_plus).zip(&a_minus) {
        integral += w * (ap.norm_sqr() + am.norm_sqr());
    }
    Ok(integral - diagonal)
}

/// Rosenblatt-type limit functional; brute force for small measures,
/// `t`-quadrature above [`BRUTE_FORCE_MAX_ATOMS`] atoms.
pub fn realized_rosenblatt(jm: &JumpMeasure, p: &ModelParams) -> Result<f64> {
    if !p.clt_regime {
        log::warn!(
            "alpha = {}, H = {} is outside H > 1/2, alpha (1 - H) < 1/2; the limit functional is still evaluated",
            p.alpha,
            p.hurst
        );
    }
    if jm.n_terms() > BRUTE_FORCE_MAX_ATOMS {
        rosenblatt_fast(jm, p, default_t_nodes(jm.half_width()))
    } else {
        rosenblatt_brute(jm, p)
    }
}

/// `X_t = int (e^{its} - 1)/(is) |s|^gamma dL_s` at integer time `t`.
pub fn process_value(jm: &JumpMeasure, t: i64, p: &ModelParams) -> Result<Complex64> {
    let tf = t as f64;
    jm.atoms().iter().try_fold(Complex64::new(0.0, 0.0), |acc, a| {
        let s = a.location;
        if s == 0.0 {
            return Err(Error::Singular { location: s });
        }
        // (e^{its} - 1)/(is) = t * [2 sin(ts/2)/(ts)] e^{its/2}
        let x = tf * s;
        let sinc = if x == 0.0 { 1.0 } else { 2.0 * (0.5 * x).sin() / x };
        let k = cis(0.5 * x) * (tf * sinc * s.abs().powf(p.gamma));
        Ok(acc + k * a.value)
    })
}

/// Closed-form tail mass `2 M^{-alpha H} / (alpha H)` of `|r|^alpha` beyond `|s| > M`.
pub fn tail_error_estimate(p: &ModelParams, half_width: f64) -> Result<f64> {
    if !(half_width >= 1.0) {
        return Err(param("half_width", half_width, "must be at least 1"));
    }
    let e = p.alpha * p.hurst;
    Ok(2.0 * half_width.powf(-e) / e)
}

/// `Q_m` at one requested `m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialSum {
    pub m: usize,
    pub q: f64,
}

/// Increments, `U`, `Q_m` and the Rosenblatt functional from one measure.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledRealization {
    pub source: Provenance,
    pub increments: IncrementSeries,
    pub u_realized: f64,
    pub rosenblatt: f64,
    pub q_partial: Vec<PartialSum>,
}

impl CoupledRealization {
    /// Build all coupled quantities from `jm`. `m_list` entries must lie in `1..=n`.
    pub fn build(
        jm: &JumpMeasure,
        p: &ModelParams,
        n: usize,
        m_list: &[usize],
        source: Provenance,
    ) -> Result<Self> {
        let mut increments = simulate_increments(jm, n, p)?;
        increments.source = Some(source);
        let q_partial = m_list
            .iter()
            .map(|&m| Ok(PartialSum { m, q: quadratic_statistic(&increments, m)? }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            source,
            u_realized: realized_u(jm, p)?,
            rosenblatt: realized_rosenblatt(jm, p)?,
            increments,
            q_partial,
        })
    }

    /// JSON summary record.
    pub fn summary(&self) -> RealizationSummary {
        RealizationSummary {
            seed: self.source.seed,
            stream: self.source.stream,
            alpha: self.increments.params.alpha,
            hurst: self.increments.params.hurst,
            half_width: self.source.half_width,
            n_terms: self.source.n_terms,
            u_realized: self.u_realized,
            rosenblatt: self.rosenblatt,
            q_partial: self.q_partial.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationSummary {
    pub seed: u64,
    pub stream: u64,
    pub alpha: f64,
    pub hurst: f64,
    #[serde(rename = "M")]
    pub half_width: f64,
    pub n_terms: usize,
    pub u_realized: f64,
    pub rosenblatt: f64,
    pub q_partial: Vec<PartialSum>,
}
