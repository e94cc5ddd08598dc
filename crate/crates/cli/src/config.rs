use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;
use weakgrad::weight::{ConstructionParams, EpsilonRule};
use weakgrad::Interval;

use crate::Failure;

/// Flags shared by every subcommand. Each may also come from `--config`;
/// flags win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// JSON file supplying any of these options
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Bump exponent α > 0
    #[arg(long, global = true)]
    pub alpha: Option<f64>,

    /// Number of stages K
    #[arg(long, global = true)]
    pub stages: Option<usize>,

    /// Construction window `a b`
    #[arg(long, global = true, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    pub window: Option<Vec<f64>>,

    /// `inverse_square` (default) or `geometric`
    #[arg(long, global = true, value_parser = parse_rule)]
    pub epsilon_rule: Option<EpsilonRule>,

    /// Exponent(s) p > 1
    #[arg(long, global = true, num_args = 1..)]
    pub p: Option<Vec<f64>>,

    /// Finest scale j of the interval sweeps
    #[arg(long, global = true)]
    pub scale_depth: Option<u32>,

    /// Grid cells for the modulus solver
    #[arg(long, global = true)]
    pub cells: Option<usize>,

    /// Measure JSON; defaults to w_K·Lebesgue
    #[arg(long, global = true)]
    pub measure: Option<PathBuf>,

    /// Piecewise-linear function JSON; defaults to f(x) = x
    #[arg(long, global = true)]
    pub function: Option<PathBuf>,

    /// Curve family JSON, a list of `[a, b]`; defaults to `--interval`
    #[arg(long, global = true)]
    pub family: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Power applied to w_K^{-1} in `integrability`; defaults to 1/α
    #[arg(long, global = true)]
    pub s: Option<f64>,

    /// Log-corrected mode of `integrability` with this θ
    #[arg(long, global = true)]
    pub theta: Option<f64>,

    /// Interval `a b` for eval, np-classify, gradient and modulus; defaults to the window
    #[arg(long, global = true, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    pub interval: Option<Vec<f64>>,

    /// Sample count for eval, gradient and mc-check
    #[arg(long, global = true)]
    pub samples: Option<usize>,

    /// Dimension of the mc-check box
    #[arg(long, global = true)]
    pub dim: Option<usize>,
}

fn parse_rule(s: &str) -> Result<EpsilonRule, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|e| e.to_string())
}

/// Fully resolved options.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub params: ConstructionParams,
    pub p: Vec<f64>,
    pub scale_depth: u32,
    pub cells: usize,
    pub measure: Option<PathBuf>,
    pub function: Option<PathBuf>,
    pub family: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub s: Option<f64>,
    pub theta: Option<f64>,
    pub interval: Interval,
    pub samples: Option<usize>,
    pub dim: usize,
}

macro_rules! merge {
    ($flags:ident, $file:ident; $($field:ident),*) => {
        Options { config: None, $($field: $flags.$field.or($file.$field)),* }
    };
}

impl Options {
    pub fn resolve(self) -> Result<Experiment, Failure> {
        let (file, base) = match &self.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
                let file: Options =
                    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
                (file, path.parent().map(Path::to_path_buf))
            }
            None => (Options::default(), None),
        };
        // paths in the config file are relative to the file
        let rebase = |p: Option<PathBuf>| match (p, &base) {
            (Some(p), Some(dir)) if p.is_relative() => Some(dir.join(p)),
            (p, _) => p,
        };
        let file = Options {
            measure: rebase(file.measure),
            function: rebase(file.function),
            family: rebase(file.family),
            out: rebase(file.out),
            ..file
        };
        let flags = self;
        let o = merge!(flags, file; alpha, stages, window, epsilon_rule, p, scale_depth, cells, measure, function,
            family, out, seed, s, theta, interval, samples, dim);

        let window = interval_arg("window", o.window.as_deref().unwrap_or(&[0.0, 1.0]))?;
        let interval = match &o.interval {
            Some(v) => interval_arg("interval", v)?,
            None => window,
        };
        let mut params = ConstructionParams::new(o.alpha.unwrap_or(1.0), window, o.stages.unwrap_or(50));
        params.epsilon_rule = o.epsilon_rule.unwrap_or_default();
        params.validate().map_err(|e| Failure::Config(e.to_string()))?;

        let p = o.p.unwrap_or_else(|| vec![2.0]);
        if p.is_empty() {
            return Err(Failure::Config("at least one p is needed".into()));
        }
        if let Some(bad) = p.iter().find(|&&p| !(p > 1.0) || !p.is_finite()) {
            return Err(Failure::Config(format!("p must exceed 1, got {bad}")));
        }
        for path in [&o.measure, &o.function, &o.family].into_iter().flatten() {
            if !path.is_file() {
                return Err(Failure::Config(format!("{} does not exist", path.display())));
            }
        }
        let cells = o.cells.unwrap_or(512);
        if cells == 0 {
            return Err(Failure::Config("cells must be positive".into()));
        }
        let dim = o.dim.unwrap_or(2);
        if dim == 0 {
            return Err(Failure::Config("dim must be positive".into()));
        }
        Ok(Experiment {
            params,
            p,
            scale_depth: o.scale_depth.unwrap_or(8),
            cells,
            measure: o.measure,
            function: o.function,
            family: o.family,
            out: o.out.unwrap_or_else(|| PathBuf::from(".")),
            seed: o.seed.unwrap_or(0),
            s: o.s,
            theta: o.theta,
            interval,
            samples: o.samples,
            dim,
        })
    }
}

fn interval_arg(name: &str, v: &[f64]) -> Result<Interval, Failure> {
    match v {
        &[a, b] if a.is_finite() && b.is_finite() && a < b => Ok(Interval { lo: a, hi: b }),
        _ => Err(Failure::Config(format!("{name} needs two finite values a < b, got {v:?}"))),
    }
}
