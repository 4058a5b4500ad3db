//! Run configuration: command-line flags over an optional `key = value` file.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use bregman_bound::bounds::DEFAULT_SEED;
use bregman_bound::divergence::GENERATOR_NAMES;
use bregman_bound::loss::LOSS_NAMES;

use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "bregman-bound",
    version,
    about = "Check KL-domination bounds for proper losses and Bregman divergences"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Tabulate the partial losses of the catalog and check properness.
    Catalog,
    /// Binary bound C * KL >= regret on the interior grid.
    VerifyTheorem1,
    /// Vector bound C * KL >= D_g on seeded cube and simplex samples.
    VerifyTheorem2,
    /// Second-order behaviour of the regret against the Fisher bound.
    VerifyCorollary1,
    /// Smallest constant that works on the grid, next to the threshold.
    EstimateC,
    /// Minimize divergences under a fixed expectation, sweeping c.
    ExpFixedExpectation,
    /// Minimize divergences under a divergence floor, sweeping epsilon.
    ExpEpsConstraint,
    /// Rebuild the oracle fixtures.
    RegenFixtures,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Catalog => "catalog",
            Command::VerifyTheorem1 => "verify-theorem1",
            Command::VerifyTheorem2 => "verify-theorem2",
            Command::VerifyCorollary1 => "verify-corollary1",
            Command::EstimateC => "estimate-c",
            Command::ExpFixedExpectation => "exp-fixed-expectation",
            Command::ExpEpsConstraint => "exp-eps-constraint",
            Command::RegenFixtures => "regen-fixtures",
        }
    }
}

/// Flags shared by every command. Anything unset falls back to the config file, then
/// to the defaults of [`RunConfig::new`].
#[derive(Args, Debug, Default, Clone)]
pub struct Options {
    #[arg(long, global = true)]
    pub grid_n: Option<usize>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Comma-separated loss names.
    #[arg(long, global = true)]
    pub losses: Option<String>,
    /// Comma-separated generator names.
    #[arg(long, global = true)]
    pub generators: Option<String>,
    /// Comma-separated constraint divergences for exp-eps-constraint.
    #[arg(long, global = true)]
    pub constraints: Option<String>,
    /// CSV destination; stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub plot: bool,
    #[arg(long, global = true)]
    pub clamp_epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Truth distribution, comma-separated.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub p: Option<String>,
    /// Support values y_i, comma-separated.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub support: Option<String>,
    /// Override the normalization constant of the verifications.
    #[arg(long, global = true)]
    pub constant: Option<f64>,
    /// Vector length for verify-theorem2.
    #[arg(long, global = true)]
    pub dimension: Option<usize>,
    #[arg(long, global = true)]
    pub fixtures_dir: Option<PathBuf>,
    /// Coarse lattice step for regen-fixtures.
    #[arg(long, global = true)]
    pub resolution: Option<f64>,
}

/// A fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub grid_n: usize,
    pub samples: usize,
    pub seed: u64,
    /// Empty means the command's default set.
    pub losses: Vec<String>,
    pub generators: Vec<String>,
    pub constraints: Vec<String>,
    pub output: Option<PathBuf>,
    pub plot: bool,
    /// Distance from 0 and 1 of the outermost catalog points.
    pub clamp_epsilon: f64,
    pub p: Vec<f64>,
    pub support: Vec<f64>,
    pub constant: Option<f64>,
    pub dimension: usize,
    pub fixtures_dir: PathBuf,
    pub resolution: f64,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            grid_n: 200,
            samples: 100_000,
            seed: DEFAULT_SEED,
            losses: Vec::new(),
            generators: Vec::new(),
            constraints: Vec::new(),
            output: None,
            plot: false,
            clamp_epsilon: 1e-12,
            p: vec![0.25, 0.5, 0.25],
            support: vec![-1.0, 0.0, 1.0],
            constant: None,
            dimension: 3,
            fixtures_dir: PathBuf::from("fixtures"),
            resolution: bregman_bound::oracle::FIXTURE_RESOLUTION,
        }
    }

    /// Defaults, then the config file named by `--config`, then the flags.
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let mut config = Self::new(cli.command);
        if let Some(path) = &cli.options.config {
            config.apply_file(path)?;
        }
        config.apply_options(&cli.options)?;
        config.validate()?;
        Ok(config)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.apply_text(&text)
    }

    /// Parse `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Config {
                line: n + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(key.trim(), value.trim()).map_err(|message| CliError::Config {
                line: n + 1,
                message,
            })?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let key = key.replace('_', "-");
        match key.as_str() {
            "grid-n" => self.grid_n = parse(&key, value)?,
            "samples" => self.samples = parse(&key, value)?,
            "seed" => self.seed = parse(&key, value)?,
            "losses" => self.losses = names(value),
            "generators" => self.generators = names(value),
            "constraints" => self.constraints = names(value),
            "output" => self.output = Some(PathBuf::from(value)),
            "plot" => self.plot = parse(&key, value)?,
            "clamp-epsilon" => self.clamp_epsilon = parse(&key, value)?,
            "p" => self.p = reals(&key, value)?,
            "support" => self.support = reals(&key, value)?,
            "constant" => self.constant = Some(parse(&key, value)?),
            "dimension" => self.dimension = parse(&key, value)?,
            "fixtures-dir" => self.fixtures_dir = PathBuf::from(value),
            "resolution" => self.resolution = parse(&key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    fn apply_options(&mut self, o: &Options) -> Result<(), CliError> {
        let flag = |e: String| CliError::InvalidConfig(e);
        if let Some(v) = o.grid_n {
            self.grid_n = v;
        }
        if let Some(v) = o.samples {
            self.samples = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = &o.losses {
            self.losses = names(v);
        }
        if let Some(v) = &o.generators {
            self.generators = names(v);
        }
        if let Some(v) = &o.constraints {
            self.constraints = names(v);
        }
        if let Some(v) = &o.output {
            self.output = Some(v.clone());
        }
        if o.plot {
            self.plot = true;
        }
        if let Some(v) = o.clamp_epsilon {
            self.clamp_epsilon = v;
        }
        if let Some(v) = &o.p {
            self.p = reals("p", v).map_err(flag)?;
        }
        if let Some(v) = &o.support {
            self.support = reals("support", v).map_err(flag)?;
        }
        if let Some(v) = o.constant {
            self.constant = Some(v);
        }
        if let Some(v) = o.dimension {
            self.dimension = v;
        }
        if let Some(v) = &o.fixtures_dir {
            self.fixtures_dir = v.clone();
        }
        if let Some(v) = o.resolution {
            self.resolution = v;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::InvalidConfig(m));
        if self.grid_n < 10 {
            return bad(format!("grid-n must be at least 10, got {}", self.grid_n));
        }
        if self.samples < 1000 {
            return bad(format!("samples must be at least 1000, got {}", self.samples));
        }
        if !(self.clamp_epsilon > 0.0 && self.clamp_epsilon < 0.5) {
            return bad(format!(
                "clamp-epsilon must lie in (0, 0.5), got {}",
                self.clamp_epsilon
            ));
        }
        if self.dimension == 0 {
            return bad("dimension must be positive".into());
        }
        if !(self.resolution > 0.0 && self.resolution <= 0.1) {
            return bad(format!("resolution must lie in (0, 0.1], got {}", self.resolution));
        }
        if let Some(c) = self.constant {
            if !(c > 0.0) {
                return bad(format!("constant must be positive, got {c}"));
            }
        }
        for l in &self.losses {
            if !LOSS_NAMES.contains(&l.as_str()) {
                return Err(CliError::UnknownName {
                    kind: "loss",
                    name: l.clone(),
                });
            }
        }
        for g in &self.generators {
            if !GENERATOR_NAMES.contains(&g.as_str()) {
                return Err(CliError::UnknownName {
                    kind: "generator",
                    name: g.clone(),
                });
            }
        }
        for c in &self.constraints {
            if !matches!(c.as_str(), "tv" | "chi2" | "total-variation" | "chi-square") {
                return Err(CliError::UnknownName {
                    kind: "constraint divergence",
                    name: c.clone(),
                });
            }
        }
        Ok(())
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid value `{value}` for `{key}`"))
}

fn names(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn reals(key: &str, value: &str) -> Result<Vec<f64>, String> {
    value
        .split(',')
        .map(|s| parse::<f64>(key, s.trim()))
        .collect()
}
