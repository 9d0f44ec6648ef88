//! One function per subcommand; each returns the report bytes and a summary line.

use harmstable::analysis::{
    check_identities, condition_sweep, iid_stable_qv_experiment, kernel_limit_check, bound_family_quadrature,
    run_clt_experiment, run_lln_experiment, CltSettings, ExperimentReport, LlnSettings, QuadratureSpec,
};
use harmstable::harmonizable::{tail_error_estimate, CoupledRealization, Provenance};
use harmstable::{JumpMeasure, ModelParams, RngStream};
use serde::Serialize;

use crate::config::{Command, Format, RunConfig};
use crate::error::CliError;
use crate::output::{ecdf_csv, samples_csv, to_json, Envelope};

/// Largest relative residual accepted by `check-identities`.
pub const IDENTITY_TOLERANCE: f64 = 1e-8;

/// Bound-family exponents checked by `check-condition`: one pair inside the
/// integrable range and one with `r1 <= 1/2`.
pub const BOUND_INSIDE: (f64, f64) = (0.7, 1.2);
pub const BOUND_OUTSIDE: (f64, f64) = (0.4, 1.2);

pub struct Outcome {
    pub report: Vec<u8>,
    pub summary: String,
    /// Set when the run completed but its check failed.
    pub failure: Option<String>,
    /// Extra plot-data files `(suffix, bytes)`, written next to `--out`.
    pub extras: Vec<(&'static str, Vec<u8>)>,
}

pub fn run(cfg: &RunConfig, runtime: &dyn Fn() -> Option<f64>) -> Result<Outcome, CliError> {
    let p = ModelParams::new(cfg.alpha, cfg.hurst)?;
    match cfg.command {
        Command::Simulate => simulate(cfg, &p, runtime),
        Command::Lln => lln(cfg, &p, runtime),
        Command::Clt => clt(cfg, &p, runtime),
        Command::Iid => iid(cfg, runtime),
        Command::CheckCondition => check_condition(cfg, &p, runtime),
        Command::CheckIdentities => identities(cfg, runtime),
        Command::KernelLimit => kernel_limit(cfg, &p, runtime),
    }
}

fn json<R: Serialize>(kind: &str, cfg: &RunConfig, results: R, runtime: Option<f64>) -> Result<Vec<u8>, CliError> {
    to_json(&Envelope {
        kind,
        config: cfg,
        results,
        runtime_seconds: runtime,
        version: env!("CARGO_PKG_VERSION"),
    })
    .map_err(|e| CliError::Other(e.to_string()))
}

fn experiment_bytes(kind: &str, cfg: &RunConfig, report: &ExperimentReport, runtime: Option<f64>) -> Result<Vec<u8>, CliError> {
    match cfg.format {
        Format::Csv => Ok(samples_csv(&report.samples)),
        Format::Json => json(kind, cfg, &report.results, runtime),
    }
}

fn simulate(cfg: &RunConfig, p: &ModelParams, runtime: &dyn Fn() -> Option<f64>) -> Result<Outcome, CliError> {
    let mut rng = RngStream::new(cfg.seed, 0);
    let jm = JumpMeasure::build(p.alpha, cfg.half_width, cfg.n_terms, &mut rng)?;
    let mut m_list: Vec<usize> = cfg.n_list.iter().copied().filter(|&m| m <= cfg.n).collect();
    if m_list.last() != Some(&cfg.n) {
        m_list.push(cfg.n);
    }
    let real = CoupledRealization::build(&jm, p, cfg.n, &m_list, Provenance::of(&jm, cfg.seed, 0))?;
    let report = match cfg.format {
        Format::Csv => {
            let mut buf = Vec::new();
            real.increments.write_csv(&mut buf).map_err(|e| CliError::Other(e.to_string()))?;
            buf
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Results {
                #[serde(flatten)]
                summary: harmstable::harmonizable::RealizationSummary,
                tail_error_estimate: f64,
            }
            let results = Results {
                summary: real.summary(),
                tail_error_estimate: tail_error_estimate(p, cfg.half_width.max(1.0))?,
            };
            json("simulate", cfg, results, runtime())?
        }
    };
    let q_n = real.q_partial.last().map(|q| q.q).unwrap_or(0.0);
    Ok(Outcome {
        report,
        summary: format!(
            "simulate: {} increments, Q_n/n = {:.6e}, U = {:.6e}, rosenblatt = {:.6e}",
            cfg.n,
            q_n / cfg.n as f64,
            real.u_realized,
            real.rosenblatt
        ),
        failure: None,
        extras: Vec::new(),
    })
}

fn lln(cfg: &RunConfig, p: &ModelParams, runtime: &dyn Fn() -> Option<f64>) -> Result<Outcome, CliError> {
    let report = run_lln_experiment(
        p,
        &LlnSettings {
            half_width: cfg.half_width,
            n_terms: cfg.n_terms,
            n_list: cfg.n_list.clone(),
            replications: cfg.reps,
            seed: cfg.seed,
            check_resolution: cfg.resolution_check,
        },
    )?;
    let r = &report.results;
    let summary = match (r.slope, r.slope_stderr) {
        (Some(s), Some(se)) => format!(
            "lln: slope of median |Q_n/n - U| = {s:.4} ± {se:.4} (theory {:.4})",
            2.0 * p.hurst - 2.0
        ),
        _ => "lln: slope undefined (some median error is zero)".to_string(),
    };
    Ok(Outcome {
        report: experiment_bytes("lln", cfg, &report, runtime())?,
        summary,
        failure: None,
        extras: Vec::new(),
    })
}

fn clt(cfg: &RunConfig, p: &ModelParams, runtime: &dyn Fn() -> Option<f64>) -> Result<Outcome, CliError> {
    let report = run_clt_experiment(
        p,
        &CltSettings {
            half_width: cfg.half_width,
            n_terms: cfg.n_terms,
            n: cfg.n,
            replications: cfg.reps,
            seed: cfg.seed,
        },
    )?;
    let d = report.results.ks_distance.unwrap_or(f64::NAN);
    let errors: Vec<f64> = report.samples.iter().filter(|r| r.n > 0).map(|r| r.value).collect();
    let limit: Vec<f64> = report.samples.iter().filter(|r| r.n == 0).map(|r| r.value).collect();
    Ok(Outcome {
        report: experiment_bytes("clt", cfg, &report, runtime())?,
        summary: format!("clt: KS distance {d:.4} between {} normalized errors and {} limit draws", cfg.reps, cfg.reps),
        failure: None,
        extras: vec![("ecdf-errors", ecdf_csv(&errors)), ("ecdf-limit", ecdf_csv(&limit))],
    })
}

fn iid(cfg: &RunConfig, runtime: &dyn Fn() -> Option<f64>) -> Result<Outcome, CliError> {
    let report = iid_stable_qv_experiment(cfg.alpha, &cfg.n_list, cfg.reps, cfg.seed)?;
    let summary = match report.results.slope {
        Some(s) => format!("iid: slope of median sum |Y_j|^2 = {s:.4} (theory {:.4})", 2.0 / cfg.alpha),
        None => "iid: slope undefined".to_string(),
    };
    Ok(Outcome {
        report: experiment_bytes("iid", cfg, &report, runtime())?,
        summary,
        failure: None,
        extras: Vec::new(),
    })
}

fn relative_change(v: &[f64]) -> Option<f64> {
    match (v.first(), v.last()) {
        (Some(a), Some(b)) if v.len() > 1 && *a != 0.0 => Some(b / a - 1.0),
        _ => None,
    }
}

/// Grid used by `check-condition`; the outer cutoff is replaced per sweep point.
pub fn condition_quadrature() -> QuadratureSpec {
    QuadratureSpec::new(2.0, 1e-8, 16).expect("valid quadrature constants")
}

fn check_condition(cfg: &RunConfig, p: &ModelParams, runtime: &dyn Fn() -> Option<f64>) -> Result<Outcome, CliError> {
    let quad = condition_quadrature();
    let condition = condition_sweep(p, cfg.r_exp, &cfg.lambda_list, &quad)?;
    let inside = bound_family_quadrature(BOUND_INSIDE.0, BOUND_INSIDE.1, &cfg.lambda_list, &quad)?;
    let outside = bound_family_quadrature(BOUND_OUTSIDE.0, BOUND_OUTSIDE.1, &cfg.lambda_list, &quad)?;

    #[derive(Serialize)]
    struct Results<'a> {
        lambda_list: &'a [f64],
        condition_value: &'a [f64],
        condition_change: Option<f64>,
        bound_family_inside: &'a [f64],
        bound_family_inside_change: Option<f64>,
        bound_family_outside: &'a [f64],
        bound_family_outside_change: Option<f64>,
    }
    let results = Results {
        lambda_list: &cfg.lambda_list,
        condition_value: &condition,
        condition_change: relative_change(&condition),
        bound_family_inside: &inside,
        bound_family_inside_change: relative_change(&inside),
        bound_family_outside: &outside,
        bound_family_outside_change: relative_change(&outside),
    };
    let report = match cfg.format {
        Format::Json => json("check-condition", cfg, &results, runtime())?,
        Format::Csv => {
            let mut out = String::from("lambda,condition_value,bound_family_inside,bound_family_outside\n");
            for (i, l) in cfg.lambda_list.iter().enumerate() {
                out.push_str(&format!("{l:.16e},{:.16e},{:.16e},{:.16e}\n", condition[i], inside[i], outside[i]));
            }
            out.into_bytes()
        }
    };
    let pct = |c: Option<f64>| c.map_or("n/a".to_string(), |c| format!("{:+.2}%", 100.0 * c));
    Ok(Outcome {
        report,
        summary: format!(
            "check-condition: over the lambda sweep the condition value changes {}, bound family (r1={}, r2={}) {}, (r1={}, r2={}) {}",
            pct(results.condition_change),
            BOUND_INSIDE.0,
            BOUND_INSIDE.1,
            pct(results.bound_family_inside_change),
            BOUND_OUTSIDE.0,
            BOUND_OUTSIDE.1,
            pct(results.bound_family_outside_change)
        ),
        failure: None,
        extras: Vec::new(),
    })
}

fn identities(cfg: &RunConfig, runtime: &dyn Fn() -> Option<f64>) -> Result<Outcome, CliError> {
    let r = check_identities(&[cfg.alpha], cfg.hurst, cfg.half_width, cfg.n_terms, cfg.trials, cfg.seed)?;
    let passed = r.square_decomposition < IDENTITY_TOLERANCE && r.normalized_error < IDENTITY_TOLERANCE;

    #[derive(Serialize)]
    struct Results {
        trials: usize,
        max_square_decomposition_residual: f64,
        max_normalized_error_residual: f64,
        tolerance: f64,
        passed: bool,
    }
    let results = Results {
        trials: cfg.trials,
        max_square_decomposition_residual: r.square_decomposition,
        max_normalized_error_residual: r.normalized_error,
        tolerance: IDENTITY_TOLERANCE,
        passed,
    };
    let report = match cfg.format {
        Format::Json => json("check-identities", cfg, &results, runtime())?,
        Format::Csv => format!(
            "identity,max_relative_residual\nsquare_decomposition,{:.16e}\nnormalized_error,{:.16e}\n",
            r.square_decomposition, r.normalized_error
        )
        .into_bytes(),
    };
    let summary = format!(
        "check-identities: {} trials, max residuals {:.3e} (square decomposition), {:.3e} (normalized error): {}",
        cfg.trials,
        r.square_decomposition,
        r.normalized_error,
        if passed { "pass" } else { "FAIL" }
    );
    Ok(Outcome {
        report,
        failure: (!passed).then(|| format!("identity residual above {IDENTITY_TOLERANCE:e}")),
        summary,
        extras: Vec::new(),
    })
}

fn kernel_limit(cfg: &RunConfig, p: &ModelParams, runtime: &dyn Fn() -> Option<f64>) -> Result<Outcome, CliError> {
    let (s, u) = (cfg.s.ok_or(CliError::Missing("s"))?, cfg.u.ok_or(CliError::Missing("u"))?);
    let dev = kernel_limit_check(s, u, p, &cfg.n_list)?;

    #[derive(Serialize)]
    struct Row {
        n: usize,
        deviation: f64,
    }
    let rows: Vec<Row> = cfg.n_list.iter().zip(&dev).map(|(&n, &deviation)| Row { n, deviation }).collect();
    let report = match cfg.format {
        Format::Json => json("kernel-limit", cfg, &rows, runtime())?,
        Format::Csv => {
            let mut out = String::from("n,deviation\n");
            for r in &rows {
                out.push_str(&format!("{},{:.16e}\n", r.n, r.deviation));
            }
            out.into_bytes()
        }
    };
    let (first, last) = (dev[0], *dev.last().unwrap());
    Ok(Outcome {
        report,
        summary: format!(
            "kernel-limit: deviation {first:.3e} at n = {} falls to {last:.3e} at n = {}",
            cfg.n_list[0],
            cfg.n_list.last().unwrap()
        ),
        failure: None,
        extras: Vec::new(),
    })
}
