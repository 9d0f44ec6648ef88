//! Flag and config-file parsing into a validated [`RunConfig`].
//!
//! Precedence: built-in defaults, then the JSON config file, then flags.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use harmstable::ModelParams;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "harmstable", version, about = "Simulation and limit-theorem checks for harmonizable fractional stable motion")]
pub struct Cli {
    #[command(flatten)]
    pub flags: Flags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Simulate one coupled realization and write its increments.
    Simulate,
    /// Law-of-large-numbers rate experiment.
    Lln,
    /// Distributional check of the Rosenblatt-type limit.
    Clt,
    /// Quadratic variation of iid isotropic stable draws.
    Iid,
    /// Existence-condition and bound-family quadratures over growing domains.
    CheckCondition,
    /// Pathwise identity suite on random measures.
    CheckIdentities,
    /// Deviation of the scaled pre-limit kernel from its limit.
    KernelLimit,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Every flag is optional here; unset flags fall back to the config file and
/// then to per-command defaults.
#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub hurst: Option<f64>,
    /// Half-width M of the frequency window [-M, M].
    #[arg(long, global = true)]
    pub half_width: Option<f64>,
    /// Number of LePage atoms per jump measure.
    #[arg(long, global = true)]
    pub n_terms: Option<usize>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    #[arg(long, global = true)]
    pub reps: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub s: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub u: Option<f64>,
    /// Outer cutoffs for check-condition.
    #[arg(long, global = true, value_delimiter = ',')]
    pub lambda_list: Option<Vec<f64>>,
    /// Tail exponent of the reference density in check-condition.
    #[arg(long, global = true)]
    pub r_exp: Option<f64>,
    /// Skip the n <= n_terms/(2M) resolution check (lln only).
    #[arg(long, global = true)]
    pub no_resolution_check: bool,
    /// Record wall-clock runtime in the report (makes reports differ between runs).
    #[arg(long, global = true)]
    pub timing: bool,
}

/// Flat JSON config file; keys mirror the long flag names.
#[derive(Deserialize, Debug, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<Command>,
    pub alpha: Option<f64>,
    pub hurst: Option<f64>,
    #[serde(alias = "half_width", alias = "M")]
    pub half_width: Option<f64>,
    #[serde(alias = "n_terms")]
    pub n_terms: Option<usize>,
    pub n: Option<usize>,
    #[serde(alias = "n_list")]
    pub n_list: Option<Vec<usize>>,
    #[serde(alias = "replications")]
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub trials: Option<usize>,
    pub s: Option<f64>,
    pub u: Option<f64>,
    #[serde(alias = "lambda_list")]
    pub lambda_list: Option<Vec<f64>>,
    #[serde(alias = "r_exp")]
    pub r_exp: Option<f64>,
    #[serde(alias = "resolution_check")]
    pub resolution_check: Option<bool>,
    pub timing: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::ConfigFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// Resolved settings that determine the numbers in a report. Serialized into
/// every report; the same JSON can be passed back with `--config`.
#[derive(Serialize, Debug, Clone, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub command: Command,
    pub alpha: f64,
    pub hurst: f64,
    pub half_width: f64,
    pub n_terms: usize,
    pub n: usize,
    pub n_list: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub format: Format,
    pub trials: usize,
    pub s: Option<f64>,
    pub u: Option<f64>,
    pub lambda_list: Vec<f64>,
    pub r_exp: f64,
    pub resolution_check: bool,
}

/// Settings that affect how a run executes but not its results.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub threads: usize,
    pub out: Option<PathBuf>,
    pub timing: bool,
}

fn powers_of_two(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|k| 1usize << k).collect()
}

impl RunConfig {
    fn defaults(command: Command) -> Self {
        let mut cfg = Self {
            command,
            alpha: 1.2,
            hurst: 0.75,
            half_width: 50.0,
            n_terms: 100_000,
            n: 256,
            n_list: powers_of_two(6, 9),
            reps: 200,
            seed: 1,
            format: Format::Json,
            trials: 100,
            s: None,
            u: None,
            lambda_list: vec![50.0, 100.0],
            r_exp: 1.0,
            resolution_check: true,
        };
        match command {
            Command::Simulate => {
                cfg.n = 1024;
                cfg.format = Format::Csv;
            }
            Command::Clt => {
                cfg.half_width = 20.0;
                cfg.reps = 500;
            }
            Command::Iid => cfg.n_list = powers_of_two(6, 12),
            Command::CheckIdentities => {
                cfg.half_width = 10.0;
                cfg.n_terms = 1000;
            }
            Command::KernelLimit => cfg.n_list = powers_of_two(6, 14),
            Command::Lln | Command::CheckCondition => {}
        }
        cfg
    }
}

macro_rules! layer {
    ($target:expr, $($src:expr),+) => {
        $(if let Some(v) = $src { $target = v; })+
    };
}

/// Merge defaults, file and flags, then validate.
pub fn resolve(command: Command, flags: &Flags) -> Result<(RunConfig, Execution), CliError> {
    let file = match &flags.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    if let Some(c) = file.command {
        if c != command {
            return Err(CliError::Field {
                field: "command",
                message: format!("config file is for {c:?}, command line asks for {command:?}"),
            });
        }
    }
    let mut cfg = RunConfig::defaults(command);
    layer!(cfg.alpha, file.alpha, flags.alpha);
    layer!(cfg.hurst, file.hurst, flags.hurst);
    layer!(cfg.half_width, file.half_width, flags.half_width);
    layer!(cfg.n_terms, file.n_terms, flags.n_terms);
    layer!(cfg.n, file.n, flags.n);
    layer!(cfg.n_list, file.n_list, flags.n_list.clone());
    layer!(cfg.reps, file.reps, flags.reps);
    layer!(cfg.seed, file.seed, flags.seed);
    layer!(cfg.format, file.format, flags.format);
    layer!(cfg.trials, file.trials, flags.trials);
    layer!(cfg.lambda_list, file.lambda_list, flags.lambda_list.clone());
    layer!(cfg.r_exp, file.r_exp, flags.r_exp);
    layer!(cfg.resolution_check, file.resolution_check);
    if flags.no_resolution_check {
        cfg.resolution_check = false;
    }
    cfg.s = flags.s.or(file.s);
    cfg.u = flags.u.or(file.u);

    let mut exec = Execution {
        threads: 0,
        out: None,
        timing: false,
    };
    layer!(exec.threads, file.threads, flags.threads);
    exec.out = flags.out.clone().or(file.out);
    exec.timing = flags.timing || file.timing.unwrap_or(false);

    validate(&cfg)?;
    Ok((cfg, exec))
}

fn field(field: &'static str, message: impl Into<String>) -> CliError {
    CliError::Field {
        field,
        message: message.into(),
    }
}

fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    if !(cfg.alpha > 0.0 && cfg.alpha < 2.0) {
        return Err(field("alpha", format!("{} is outside (0, 2)", cfg.alpha)));
    }
    if !(cfg.hurst > 0.0 && cfg.hurst < 1.0) {
        return Err(field("hurst", format!("{} is outside (0, 1)", cfg.hurst)));
    }
    if !(cfg.half_width > 0.0 && cfg.half_width.is_finite()) {
        return Err(field("half-width", format!("{} must be positive and finite", cfg.half_width)));
    }
    if cfg.n_terms == 0 {
        return Err(field("n-terms", "must be at least 1"));
    }
    if cfg.n == 0 {
        return Err(field("n", "must be at least 1"));
    }
    if cfg.n_list.is_empty() || cfg.n_list[0] == 0 || cfg.n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(field("n-list", "must be positive and strictly increasing"));
    }
    let p = ModelParams::new(cfg.alpha, cfg.hurst).map_err(|e| field("alpha", e.to_string()))?;
    match cfg.command {
        Command::Clt if !p.clt_regime => {
            return Err(CliError::Regime {
                alpha: cfg.alpha,
                hurst: cfg.hurst,
            })
        }
        Command::Lln if cfg.reps < 50 => return Err(field("reps", "lln needs at least 50 replications")),
        Command::Iid if cfg.reps < 100 => return Err(field("reps", "iid needs at least 100 replications")),
        Command::Clt if cfg.reps < 2 => return Err(field("reps", "clt needs at least 2 replications")),
        Command::CheckIdentities if cfg.trials == 0 => return Err(field("trials", "must be at least 1")),
        Command::KernelLimit => {
            let s = cfg.s.ok_or(CliError::Missing("s"))?;
            let u = cfg.u.ok_or(CliError::Missing("u"))?;
            if s == 0.0 {
                return Err(field("s", "must be nonzero"));
            }
            if u == 0.0 {
                return Err(field("u", "must be nonzero"));
            }
            if !(u < s) {
                return Err(field("u", format!("{u} must be below s = {s}")));
            }
        }
        Command::CheckCondition => {
            if cfg.lambda_list.is_empty() || cfg.lambda_list.iter().any(|&l| !(l > 1.0 && l.is_finite())) {
                return Err(field("lambda-list", "entries must be finite and exceed 1"));
            }
            if !(cfg.r_exp * cfg.alpha > 1.0) {
                return Err(field("r-exp", format!("r-exp * alpha = {} must exceed 1", cfg.r_exp * cfg.alpha)));
            }
        }
        _ => {}
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<(RunConfig, Execution), CliError> {
        let cli = Cli::try_parse_from(std::iter::once("harmstable").chain(args.iter().copied())).unwrap();
        resolve(cli.command, &cli.flags)
    }

    #[test]
    fn regime_compatible_lln() {
        let (cfg, _) = parse(&["--alpha", "1.2", "--hurst", "0.75", "lln"]).unwrap();
        assert_eq!(cfg.command, Command::Lln);
        assert_eq!(cfg.n_list, vec![64, 128, 256, 512]);
    }

    #[test]
    fn alpha_out_of_range() {
        let err = parse(&["--alpha", "2.5", "lln"]).unwrap_err();
        assert!(matches!(err, CliError::Field { field: "alpha", .. }), "{err}");
        assert!(err.to_string().contains("alpha"));
    }

    #[test]
    fn clt_regime_error() {
        let err = parse(&["clt", "--alpha", "1.8", "--hurst", "0.55"]).unwrap_err();
        assert!(matches!(err, CliError::Regime { .. }), "{err}");
    }

    #[test]
    fn unknown_flag_is_rejected() {
        let err = Cli::try_parse_from(["harmstable", "lln", "--bogus", "1"]).unwrap_err();
        assert!(err.to_string().contains("--bogus"));
    }

    #[test]
    fn missing_field_named() {
        let err = parse(&["kernel-limit", "--s", "1"]).unwrap_err();
        assert!(matches!(err, CliError::Missing("u")));
    }

    #[test]
    fn negative_coordinates_parse() {
        let (cfg, _) = parse(&["kernel-limit", "--s", "1", "--u", "-0.5"]).unwrap();
        assert_eq!(cfg.u, Some(-0.5));
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("harmstable-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        std::fs::write(&path, r#"{"alpha": 1.5, "seed": 9, "n-list": [8, 16, 32], "half_width": 12}"#).unwrap();
        let p = path.to_str().unwrap();
        let (cfg, _) = parse(&["--config", p, "--seed", "3", "lln"]).unwrap();
        assert_eq!((cfg.alpha, cfg.seed, cfg.half_width), (1.5, 3, 12.0));
        assert_eq!(cfg.n_list, vec![8, 16, 32]);

        std::fs::write(&path, r#"{"alhpa": 1.5}"#).unwrap();
        let err = parse(&["--config", p, "lln"]).unwrap_err();
        assert!(err.to_string().contains("alhpa"), "{err}");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn report_config_round_trips_as_config_file() {
        let (cfg, _) = parse(&["--seed", "5", "--n-list", "8,16,32", "lln"]).unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        let file: FileConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(file.seed, Some(5));
        assert_eq!(file.n_list, Some(vec![8, 16, 32]));
        assert_eq!(file.command, Some(Command::Lln));
    }
}
