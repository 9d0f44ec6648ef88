//! Monte Carlo experiment runners and the statistics they report.
//!
//! Replications run in parallel, each on its own RNG stream; results are
//! collected in replication order, so a report depends only on its config.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::harmonizable::{
    default_t_nodes, normalized_error, quadratic_statistic, realized_rosenblatt, realized_u, rosenblatt_fast,
    simulate_increments, tail_error_estimate,
};
use crate::kernels::{kernel_h, kernel_hn, psi, ModelParams};
use crate::levy::{condition_value, JumpMeasure, PairKernel, Singularity};
pub use crate::quadrature::QuadratureSpec;
use crate::quadrature::integrate_lower_triangle;
use crate::rng::{sample_isotropic_stable, RngStream};

/// Sup-distance between the empirical distribution functions of `a` and `b`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptySample("a"));
    }
    if b.is_empty() {
        return Err(Error::EmptySample("b"));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(param("sample", f64::NAN, "must not contain NaN"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Least-squares slope of `ln y` against `ln n`, with its standard error.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(param("points", points.len() as f64, "need at least 3 points"));
    }
    for &(n, y) in points {
        if !(n > 0.0) {
            return Err(param("n", n, "must be positive"));
        }
        if !(y > 0.0) {
            return Err(param("y", y, "must be positive"));
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(param("n", points[0].0, "need distinct n"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum();
    let stderr = (rss / (k - 2.0) / sxx).sqrt();
    Ok((slope, stderr))
}

/// Linearly interpolated sample quantile (the usual "type 7" rule).
pub fn quantile(sample: &[f64], prob: f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample("sample"));
    }
    if !(0.0..=1.0).contains(&prob) {
        return Err(param("prob", prob, "must lie in [0, 1]"));
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let h = prob * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    Ok(v[lo] + (h - lo as f64) * (v[hi] - v[lo]))
}

pub fn median(sample: &[f64]) -> Result<f64> {
    quantile(sample, 0.5)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Lln,
    Clt,
    Iid,
    KernelLimit,
    BoundFamily,
    Condition,
}

/// Inputs a report was produced from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub hurst: Option<f64>,
    #[serde(rename = "M")]
    pub half_width: Option<f64>,
    pub n_terms: Option<usize>,
    pub replications: usize,
    pub n_list: Vec<usize>,
    pub master_seed: u64,
}

/// Median and quartiles of a per-`n` sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerN {
    pub n: usize,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

impl PerN {
    fn summarize(n: usize, sample: &[f64]) -> Result<Self> {
        Ok(Self {
            n,
            median: median(sample)?,
            q25: quantile(sample, 0.25)?,
            q75: quantile(sample, 0.75)?,
        })
    }
}

/// One raw per-replication value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub replication: usize,
    pub n: usize,
    pub value: f64,
}

/// A value at one point of a deterministic sweep (over `n` or `Λ`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResults {
    pub per_n: Vec<PerN>,
    pub slope: Option<f64>,
    pub slope_stderr: Option<f64>,
    pub ks_distance: Option<f64>,
    /// Median `Q_n` per `n` and its log-log slope, LLN runs only.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub q_per_n: Vec<PerN>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tail_error_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub sweep: Vec<SweepPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub results: ExperimentResults,
    /// Raw per-replication values; CLT runs tag sample A with `n` and
    /// sample B with `n = 0`.
    #[serde(skip)]
    pub samples: Vec<SampleRow>,
}

/// Slope of medians against `n`, or `None` when some median is not positive.
fn median_slope(per_n: &[PerN]) -> Result<Option<(f64, f64)>> {
    if per_n.len() < 3 || per_n.iter().any(|p| !(p.median > 0.0)) {
        return Ok(None);
    }
    let pts: Vec<(f64, f64)> = per_n.iter().map(|p| (p.n as f64, p.median)).collect();
    loglog_slope(&pts).map(Some)
}

/// Checks `n <= n_terms / (2M)` and warns above `n_terms / (4M)`.
///
/// Below this the grid `2π/n` is resolved by the atom density of the
/// truncated measure.
pub fn check_resolution(n: usize, n_terms: usize, half_width: f64) -> Result<()> {
    let density = n_terms as f64 / half_width;
    if n as f64 > density / 2.0 {
        return Err(Error::Config(format!(
            "n = {n} exceeds n_terms/(2M) = {:.1}; raise n_terms or lower n",
            density / 2.0
        )));
    }
    if n as f64 > density / 4.0 {
        log::warn!("n = {n} exceeds n_terms/(4M) = {:.1}", density / 4.0);
    }
    Ok(())
}

fn check_n_list(n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::Config("n_list must not be empty".into()));
    }
    if n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("n_list must be positive and strictly increasing".into()));
    }
    Ok(())
}

fn check_reps(replications: usize, min: usize) -> Result<()> {
    if replications < min {
        return Err(param("replications", replications as f64, "too few replications"));
    }
    Ok(())
}

/// Settings for [`run_lln_experiment`].
#[derive(Clone, Debug, PartialEq)]
pub struct LlnSettings {
    pub half_width: f64,
    pub n_terms: usize,
    pub n_list: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    /// Enforce the resolution rule on `n`. Off for degenerate checks such as
    /// a single-atom measure.
    pub check_resolution: bool,
}

/// Coupled LLN check: per replication one jump measure, the errors
/// `|Q_n/n - U|` for every `n`, and the slope of their medians.
///
/// The error is accumulated as `(1/n) sum_j (|Y_j|^2 - sum_i |w_ij|^2)`,
/// which is algebraically `Q_n/n - U` but free of cancellation.
pub fn run_lln_experiment(p: &ModelParams, cfg: &LlnSettings) -> Result<ExperimentReport> {
    check_n_list(&cfg.n_list)?;
    check_reps(cfg.replications, 50)?;
    let n_max = *cfg.n_list.last().unwrap();
    if cfg.check_resolution {
        check_resolution(n_max, cfg.n_terms, cfg.half_width)?;
    }
    let per_rep: Vec<(Vec<f64>, Vec<f64>)> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = RngStream::new(cfg.seed, rep as u64);
            let jm = JumpMeasure::build(p.alpha, cfg.half_width, cfg.n_terms, &mut rng)?;
            let inc = simulate_increments(&jm, n_max, p)?;
            let mut errs = Vec::with_capacity(cfg.n_list.len());
            let mut qs = Vec::with_capacity(cfg.n_list.len());
            for &n in &cfg.n_list {
                errs.push(inc.mean_centered(n)?.abs());
                qs.push(quadratic_statistic(&inc, n)?);
            }
            Ok((errs, qs))
        })
        .collect::<Result<_>>()?;

    let mut results = ExperimentResults::default();
    let mut samples = Vec::with_capacity(cfg.replications * cfg.n_list.len());
    for (k, &n) in cfg.n_list.iter().enumerate() {
        let errs: Vec<f64> = per_rep.iter().map(|r| r.0[k]).collect();
        let qs: Vec<f64> = per_rep.iter().map(|r| r.1[k]).collect();
        results.per_n.push(PerN::summarize(n, &errs)?);
        results.q_per_n.push(PerN::summarize(n, &qs)?);
        samples.extend(errs.iter().enumerate().map(|(replication, &value)| SampleRow { replication, n, value }));
    }
    if let Some((slope, se)) = median_slope(&results.per_n)? {
        results.slope = Some(slope);
        results.slope_stderr = Some(se);
    }
    results.q_slope = median_slope(&results.q_per_n)?.map(|s| s.0);
    results.tail_error_estimate = Some(tail_error_estimate(p, cfg.half_width)?);
    Ok(ExperimentReport {
        kind: ExperimentKind::Lln,
        config: ExperimentConfig {
            alpha: p.alpha,
            hurst: Some(p.hurst),
            half_width: Some(cfg.half_width),
            n_terms: Some(cfg.n_terms),
            replications: cfg.replications,
            n_list: cfg.n_list.clone(),
            master_seed: cfg.seed,
        },
        results,
        samples,
    })
}

/// Settings for [`run_clt_experiment`].
#[derive(Clone, Debug, PartialEq)]
pub struct CltSettings {
    pub half_width: f64,
    pub n_terms: usize,
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
}

fn regime_error(p: &ModelParams) -> Error {
    Error::Config(format!(
        "the Rosenblatt limit needs H > 1/2 and alpha (1 - H) < 1/2; got alpha = {}, H = {}, alpha (1 - H) = {}",
        p.alpha,
        p.hurst,
        p.alpha * (1.0 - p.hurst)
    ))
}

/// Distributional CLT check: normalized errors on streams `0..reps` against
/// Rosenblatt values on independent streams `reps..2 reps`.
pub fn run_clt_experiment(p: &ModelParams, cfg: &CltSettings) -> Result<ExperimentReport> {
    if !p.clt_regime {
        return Err(regime_error(p));
    }
    check_reps(cfg.replications, 2)?;
    if cfg.n == 0 {
        return Err(param("n", 0.0, "must be at least 1"));
    }
    check_resolution(cfg.n, cfg.n_terms, cfg.half_width)?;
    let reps = cfg.replications;
    let t_nodes = default_t_nodes(cfg.half_width);
    let draws: Vec<f64> = (0..2 * reps)
        .into_par_iter()
        .map(|k| {
            let mut rng = RngStream::new(cfg.seed, k as u64);
            let jm = JumpMeasure::build(p.alpha, cfg.half_width, cfg.n_terms, &mut rng)?;
            if k < reps {
                let inc = simulate_increments(&jm, cfg.n, p)?;
                // n^{2-2H} (Q_n/n - U), accumulated without cancellation
                Ok((cfg.n as f64).powf(2.0 - 2.0 * p.hurst) * inc.mean_centered(cfg.n)?)
            } else if jm.n_terms() > 1 {
                rosenblatt_fast(&jm, p, t_nodes)
            } else {
                Ok(0.0)
            }
        })
        .collect::<Result<_>>()?;
    let (a, b) = draws.split_at(reps);
    let mut results = ExperimentResults::default();
    results.per_n.push(PerN::summarize(cfg.n, a)?);
    results.ks_distance = Some(ks_two_sample(a, b)?);
    results.tail_error_estimate = Some(tail_error_estimate(p, cfg.half_width)?);
    let samples = a
        .iter()
        .enumerate()
        .map(|(replication, &value)| SampleRow { replication, n: cfg.n, value })
        .chain(b.iter().enumerate().map(|(replication, &value)| SampleRow { replication, n: 0, value }))
        .collect();
    Ok(ExperimentReport {
        kind: ExperimentKind::Clt,
        config: ExperimentConfig {
            alpha: p.alpha,
            hurst: Some(p.hurst),
            half_width: Some(cfg.half_width),
            n_terms: Some(cfg.n_terms),
            replications: reps,
            n_list: vec![cfg.n],
            master_seed: cfg.seed,
        },
        results,
        samples,
    })
}

/// Median of `sum_{j<n} |Y_j|^2` for iid isotropic stable `Y_j`, and its
/// log-log slope in `n` (order `n^{2/alpha}`).
pub fn iid_stable_qv_experiment(alpha: f64, n_list: &[usize], replications: usize, seed: u64) -> Result<ExperimentReport> {
    check_n_list(n_list)?;
    check_reps(replications, 100)?;
    ModelParams::new(alpha, 0.5).map_err(|_| param("alpha", alpha, "must lie in (0, 2)"))?;
    let n_max = *n_list.last().unwrap();
    let per_rep: Vec<Vec<f64>> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = RngStream::new(seed, rep as u64);
            let mut out = Vec::with_capacity(n_list.len());
            let mut sum = 0.0;
            let mut next = 0;
            for j in 1..=n_max {
                sum += sample_isotropic_stable(alpha, 1.0, &mut rng)?.norm_sqr();
                if j == n_list[next] {
                    out.push(sum);
                    next += 1;
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut results = ExperimentResults::default();
    let mut samples = Vec::new();
    for (k, &n) in n_list.iter().enumerate() {
        let v: Vec<f64> = per_rep.iter().map(|r| r[k]).collect();
        results.per_n.push(PerN::summarize(n, &v)?);
        samples.extend(v.iter().enumerate().map(|(replication, &value)| SampleRow { replication, n, value }));
    }
    if let Some((slope, se)) = median_slope(&results.per_n)? {
        results.slope = Some(slope);
        results.slope_stderr = Some(se);
    }
    Ok(ExperimentReport {
        kind: ExperimentKind::Iid,
        config: ExperimentConfig {
            alpha,
            hurst: None,
            half_width: None,
            n_terms: None,
            replications,
            n_list: n_list.to_vec(),
            master_seed: seed,
        },
        results,
        samples,
    })
}

/// Deviations `|n^{-2/alpha} h_n(s/n, u/n) - h(s, u)|` for each `n`.
pub fn kernel_limit_check(s: f64, u: f64, p: &ModelParams, n_list: &[usize]) -> Result<Vec<f64>> {
    if s == 0.0 {
        return Err(param("s", s, "must be nonzero"));
    }
    if u == 0.0 {
        return Err(param("u", u, "must be nonzero"));
    }
    if !(u < s) {
        return Err(param("u", u, "must be below s"));
    }
    if ((s - u) / TAU).fract() == 0.0 {
        log::warn!("s - u = {} is a multiple of 2π; the limit need not hold there", s - u);
    }
    let limit = kernel_h(s, u, p)?;
    n_list
        .iter()
        .map(|&n| {
            let nf = n as f64;
            let scaled = kernel_hn(s / nf, u / nf, n as u64, p)? * nf.powf(-2.0 / p.alpha);
            Ok((scaled - limit).norm())
        })
        .collect()
}

/// Bound family `|su|^{-r1} (1{s-1 <= u < s} + |s-u|^{-r2} 1{u < s-1})`.
pub fn bound_family_integrand(s: f64, u: f64, r1: f64, r2: f64) -> f64 {
    if u >= s {
        return 0.0;
    }
    let base = (s * u).abs().powf(-r1);
    if u >= s - 1.0 {
        base
    } else {
        base * (s - u).powf(-r2)
    }
}

/// Integrals of `g` over `{u < s} ∩ [-Λ, Λ]^2` for each `Λ` in `lambdas`.
pub fn lambda_sweep<G>(g: G, lambdas: &[f64], quad: &QuadratureSpec, lines: &[Singularity]) -> Result<Vec<f64>>
where
    G: Fn(f64, f64) -> f64 + Copy,
{
    lambdas
        .iter()
        .map(|&l| integrate_lower_triangle(g, &quad.with_outer_cutoff(l)?, lines))
        .collect()
}

/// [`bound_family_integrand`] integrated over growing domains.
pub fn bound_family_quadrature(r1: f64, r2: f64, lambdas: &[f64], quad: &QuadratureSpec) -> Result<Vec<f64>> {
    if !(r1 > 0.0) {
        return Err(param("r1", r1, "must be positive"));
    }
    if !(r2 > 0.0) {
        return Err(param("r2", r2, "must be positive"));
    }
    let lines = [
        Singularity::SAxis(0.0),
        Singularity::UAxis(0.0),
        Singularity::Diagonal(1.0),
    ];
    lambda_sweep(move |s, u| bound_family_integrand(s, u, r1, r2), lambdas, quad, &lines)
}

/// `condition_value` of the limit kernel `h` for each `Λ`, with reference
/// density `psi(., r_exp, alpha)`.
pub fn condition_sweep(p: &ModelParams, r_exp: f64, lambdas: &[f64], quad: &QuadratureSpec) -> Result<Vec<f64>> {
    psi(0.0, r_exp, p.alpha)?;
    let p = *p;
    let h = PairKernel::new(move |s, u| kernel_h(s, u, &p))
        .with_singularities(vec![Singularity::SAxis(0.0), Singularity::UAxis(0.0)]);
    let psi_fn = move |s: f64| psi(s, r_exp, p.alpha).unwrap_or(f64::NAN);
    lambdas
        .iter()
        .map(|&l| condition_value(&h, p.alpha, psi_fn, &quad.with_outer_cutoff(l)?))
        .collect()
}

/// Relative identity residuals on one random measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    /// Largest relative residual of `|int g dL|^2 = 2 Re iint g(s) conj(g(u)) + int |g|^2 d[L]`
    /// over `g = e^{ij.} r`, `j = 0..=16`.
    pub square_decomposition: f64,
    /// Largest relative residual of `m^{2-2H}(Q_m/m - U) = 2 Re iint h_m` over `m` in `m_list`.
    pub normalized_error: f64,
}

/// Evaluates both pathwise identities by direct summation on `jm`.
pub fn identity_residuals(jm: &JumpMeasure, p: &ModelParams, m_list: &[usize]) -> Result<IdentityResiduals> {
    let locs: Vec<f64> = jm.atoms().iter().map(|a| a.location).collect();
    let r: Vec<Complex64> = locs
        .iter()
        .map(|&s| crate::kernels::kernel_r(s, p).map_err(|_| Error::Singular { location: s }))
        .collect::<Result<_>>()?;
    let mut square = 0.0f64;
    for j in 0..=16u32 {
        let jf = j as f64;
        let g: Vec<Complex64> = locs.iter().zip(&r).map(|(&s, &rs)| Complex64::from_polar(1.0, jf * s) * rs).collect();
        let lhs = crate::levy::integrate(jm, |s| Ok(Complex64::from_polar(1.0, jf * s) * crate::kernels::kernel_r(s, p)?))?
            .norm_sqr();
        let cross = crate::levy::double_integrate_indexed(jm, |i, k| Ok(g[i] * g[k].conj()))?.re;
        let diag = crate::levy::integrate_qv(jm, |s| Ok(crate::kernels::kernel_r(s, p)?.norm_sqr()))?;
        let scale = diag + 2.0 * cross.abs();
        if scale > 0.0 {
            square = square.max((lhs - 2.0 * cross - diag).abs() / scale);
        }
    }
    let n_max = m_list.iter().copied().max().unwrap_or(1);
    let inc = simulate_increments(jm, n_max, p)?;
    let u = realized_u(jm, p)?;
    let mut normalized = 0.0f64;
    for &m in m_list {
        let q = quadratic_statistic(&inc, m)?;
        let lhs = normalized_error(q, u, m, p);
        let mf = m as f64;
        let pre = mf.powf(1.0 - 2.0 * p.hurst);
        let rhs = 2.0
            * crate::levy::double_integrate_indexed(jm, |i, k| {
                Ok(crate::kernels::kernel_gn(locs[i] - locs[k], m as u64) * r[i] * r[k].conj() * pre)
            })?
            .re;
        // size of the terms that cancel on the left
        let scale = mf.powf(2.0 - 2.0 * p.hurst) * (q / mf + u) + rhs.abs();
        if scale > 0.0 {
            normalized = normalized.max((lhs - rhs).abs() / scale);
        }
    }
    Ok(IdentityResiduals {
        square_decomposition: square,
        normalized_error: normalized,
    })
}

/// Largest identity residuals over `trials` random measures; trial `t` uses
/// `alphas[t % alphas.len()]` and stream `t`.
pub fn check_identities(
    alphas: &[f64],
    hurst: f64,
    half_width: f64,
    n_terms: usize,
    trials: usize,
    seed: u64,
) -> Result<IdentityResiduals> {
    if alphas.is_empty() {
        return Err(Error::Config("alpha list must not be empty".into()));
    }
    let params: Vec<ModelParams> = alphas.iter().map(|&a| ModelParams::new(a, hurst)).collect::<Result<_>>()?;
    let per_trial: Vec<IdentityResiduals> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let p = &params[t % params.len()];
            let mut rng = RngStream::new(seed, t as u64);
            let jm = JumpMeasure::build(p.alpha, half_width, n_terms, &mut rng)?;
            identity_residuals(&jm, p, &[1, 2, 16, 64, 256])
        })
        .collect::<Result<_>>()?;
    Ok(per_trial.iter().fold(
        IdentityResiduals {
            square_decomposition: 0.0,
            normalized_error: 0.0,
        },
        |acc, r| IdentityResiduals {
            square_decomposition: acc.square_decomposition.max(r.square_decomposition),
            normalized_error: acc.normalized_error.max(r.normalized_error),
        },
    ))
}

/// Rosenblatt value by whichever evaluator `realized_rosenblatt` picks.
pub fn rosenblatt_draw(p: &ModelParams, half_width: f64, n_terms: usize, seed: u64, stream: u64) -> Result<f64> {
    let mut rng = RngStream::new(seed, stream);
    let jm = JumpMeasure::build(p.alpha, half_width, n_terms, &mut rng)?;
    realized_rosenblatt(&jm, p)
}

/// Real part of `int r dL` over `[-M, M]` on a graded grid: each cell adds an
/// independent SαS increment (Chambers–Mallows–Stuck) of scale
/// `|r(mid)| width^{1/alpha}`. Grading toward the singularity of `r` at 0
/// stops at `inner_cutoff`.
pub fn grid_integral_re(p: &ModelParams, half_width: f64, inner_cutoff: f64, rng: &mut RngStream) -> Result<f64> {
    let cells = crate::quadrature::graded_cells(-half_width, half_width, &[0.0], (false, false), inner_cutoff, 16, 0.25);
    cells.iter().try_fold(0.0, |acc, c| {
        let scale = crate::kernels::kernel_r(c.mid, p)?.norm() * c.width.powf(1.0 / p.alpha);
        Ok(acc + crate::rng::sample_sas(p.alpha, scale, rng)?)
    })
}

/// KS distance between `Re int r dL` from LePage measures (streams
/// `0..draws`) and from the grid construction (streams `draws..2 draws`).
pub fn lepage_grid_ks(p: &ModelParams, half_width: f64, n_terms: usize, draws: usize, seed: u64) -> Result<f64> {
    let values: Vec<f64> = (0..2 * draws)
        .into_par_iter()
        .map(|k| {
            let mut rng = RngStream::new(seed, k as u64);
            if k < draws {
                let jm = JumpMeasure::build(p.alpha, half_width, n_terms, &mut rng)?;
                Ok(crate::levy::integrate(&jm, |s| crate::kernels::kernel_r(s, p))?.re)
            } else {
                grid_integral_re(p, half_width, 1e-16, &mut rng)
            }
        })
        .collect::<Result<_>>()?;
    let (a, b) = values.split_at(draws);
    ks_two_sample(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ks_examples() {
        assert_eq!(ks_two_sample(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0, 5.0]).unwrap(), 1.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.5, 2.5]).unwrap(), 0.5);
        assert!(ks_two_sample(&[], &[1.0]).is_err());
        assert!(ks_two_sample(&[1.0], &[]).is_err());
    }

    #[test]
    fn ks_handles_ties() {
        // F_a jumps to 1 at 1; F_b is 1/2 at 1
        assert_eq!(ks_two_sample(&[1.0, 1.0], &[1.0, 2.0]).unwrap(), 0.5);
    }

    proptest! {
        #[test]
        fn ks_symmetric_and_transform_invariant(
            a in prop::collection::vec(-10.0f64..10.0, 1..40),
            b in prop::collection::vec(-10.0f64..10.0, 1..40),
        ) {
            let d = ks_two_sample(&a, &b).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert_eq!(d, ks_two_sample(&b, &a).unwrap());
            let ta: Vec<f64> = a.iter().map(|x| x.powi(3) + 2.0 * x).collect();
            let tb: Vec<f64> = b.iter().map(|x| x.powi(3) + 2.0 * x).collect();
            prop_assert_eq!(d, ks_two_sample(&ta, &tb).unwrap());
        }
    }

    #[test]
    fn slope_examples() {
        let exact: Vec<(f64, f64)> = [64.0, 128.0, 256.0, 512.0].iter().map(|&n: &f64| (n, n.powi(-2))).collect();
        let (s, se) = loglog_slope(&exact).unwrap();
        assert!((s + 2.0).abs() < 1e-12 && se < 1e-12);
        let flat = [(1.0, 3.0), (2.0, 3.0), (4.0, 3.0)];
        assert!(loglog_slope(&flat).unwrap().0.abs() < 1e-15);
        assert!(loglog_slope(&[(1.0, 1.0), (2.0, 1.0)]).is_err());
        assert!(loglog_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
        assert!(loglog_slope(&[(2.0, 1.0), (2.0, 2.0), (2.0, 3.0)]).is_err());
    }

    #[test]
    fn slope_under_perturbation() {
        let mut rng = RngStream::new(3, 0);
        for _ in 0..100 {
            let pts: Vec<(f64, f64)> = (6..=12)
                .map(|k| {
                    let n = 2f64.powi(k);
                    let e = 0.01 * (2.0 * rng.uniform() - 1.0);
                    (n, 7.0 * n.powf(-0.5) * (1.0 + e))
                })
                .collect();
            let (s, _) = loglog_slope(&pts).unwrap();
            assert!((s + 0.5).abs() < 0.02, "{s}");
        }
    }

    #[test]
    fn quantiles() {
        let v = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(median(&v).unwrap(), 2.5);
        assert_eq!(quantile(&v, 0.0).unwrap(), 1.0);
        assert_eq!(quantile(&v, 1.0).unwrap(), 4.0);
        assert_eq!(quantile(&v, 0.25).unwrap(), 1.75);
        assert!(median(&[]).is_err());
    }

    #[test]
    fn resolution_rule() {
        assert!(check_resolution(500, 100_000, 50.0).is_ok());
        assert!(check_resolution(512, 100_000, 50.0).is_ok());
        assert!(check_resolution(1001, 100_000, 50.0).is_err());
    }

    #[test]
    fn lln_single_atom_is_exact() {
        let p = ModelParams::new(1.2, 0.75).unwrap();
        let cfg = LlnSettings {
            half_width: 50.0,
            n_terms: 1,
            n_list: vec![64, 128, 256, 512],
            replications: 50,
            seed: 9,
            check_resolution: false,
        };
        let report = run_lln_experiment(&p, &cfg).unwrap();
        assert!(report.samples.iter().all(|s| s.value == 0.0));
        assert!(report.results.slope.is_none());
        let strict = LlnSettings { check_resolution: true, ..cfg };
        assert!(matches!(run_lln_experiment(&p, &strict), Err(Error::Config(_))));
    }

    #[test]
    fn lln_report_is_reproducible() {
        let p = ModelParams::new(1.2, 0.75).unwrap();
        let cfg = LlnSettings {
            half_width: 10.0,
            n_terms: 2000,
            n_list: vec![8, 16, 32],
            replications: 50,
            seed: 4,
            check_resolution: true,
        };
        let a = run_lln_experiment(&p, &cfg).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| run_lln_experiment(&p, &cfg).unwrap());
        assert_eq!(a, b);
        assert!(run_lln_experiment(&p, &LlnSettings { replications: 49, ..cfg }).is_err());
    }

    #[test]
    fn clt_rejects_outside_regime() {
        let p = ModelParams::new(1.8, 0.55).unwrap();
        let cfg = CltSettings {
            half_width: 20.0,
            n_terms: 1000,
            n: 8,
            replications: 10,
            seed: 1,
        };
        assert!(matches!(run_clt_experiment(&p, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn clt_small_run() {
        let p = ModelParams::new(1.2, 0.75).unwrap();
        let cfg = CltSettings {
            half_width: 5.0,
            n_terms: 500,
            n: 16,
            replications: 20,
            seed: 1,
        };
        let r = run_clt_experiment(&p, &cfg).unwrap();
        let d = r.results.ks_distance.unwrap();
        assert!((0.0..=1.0).contains(&d));
        assert_eq!(r.samples.len(), 40);
    }

    #[test]
    fn iid_experiment_validates() {
        assert!(iid_stable_qv_experiment(1.0, &[8, 4], 100, 1).is_err());
        assert!(iid_stable_qv_experiment(1.0, &[4, 8], 99, 1).is_err());
        assert!(iid_stable_qv_experiment(2.5, &[4, 8], 100, 1).is_err());
    }

    #[test]
    fn kernel_limit_decreases() {
        let p = ModelParams::new(1.2, 0.75).unwrap();
        let dev = kernel_limit_check(1.0, -0.5, &p, &[64, 1 << 14]).unwrap();
        assert!(dev[1] < 1e-2 && dev[1] < dev[0]);
        assert!(kernel_limit_check(0.0, -0.5, &p, &[64]).is_err());
        assert!(kernel_limit_check(1.0, 2.0, &p, &[64]).is_err());
    }

    #[test]
    fn composite_exponent_vanishes() {
        for (alpha, hurst) in [(1.2, 0.75), (0.5, 0.9), (1.9, 0.2)] {
            let p = ModelParams::new(alpha, hurst).unwrap();
            let e = 2.0 - 2.0 * p.hurst - 2.0 * p.gamma - 2.0 / p.alpha;
            assert!(e.abs() < 1e-14);
        }
    }

    #[test]
    fn zero_kernel_sweep() {
        let quad = QuadratureSpec::new(10.0, 1e-4, 8).unwrap();
        let v = lambda_sweep(|s, u| 0.0 * bound_family_integrand(s, u, 0.7, 1.2), &[5.0, 10.0], &quad, &[]).unwrap();
        assert_eq!(v, vec![0.0, 0.0]);
    }

    #[test]
    fn bound_family_integrand_pieces() {
        assert_eq!(bound_family_integrand(1.0, 2.0, 0.7, 1.2), 0.0);
        assert!((bound_family_integrand(2.0, 1.5, 0.5, 1.2) - 3f64.powf(-0.5)).abs() < 1e-15);
        let far = bound_family_integrand(2.0, -2.0, 0.5, 1.0);
        assert!((far - 0.5 * 0.25).abs() < 1e-15);
    }

    #[test]
    fn identities_on_small_measure() {
        let p = ModelParams::new(1.2, 0.75).unwrap();
        let mut rng = RngStream::new(8, 0);
        let jm = JumpMeasure::build(1.2, 10.0, 200, &mut rng).unwrap();
        let r = identity_residuals(&jm, &p, &[1, 2, 7, 16]).unwrap();
        assert!(r.square_decomposition < 1e-9, "{r:?}");
        assert!(r.normalized_error < 1e-8, "{r:?}");
    }
}
