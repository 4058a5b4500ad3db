//! Runner behind the `bregman-bound` binary.
//!
//! [`run`] computes the rows of a command without touching the file system;
//! [`execute`] also writes the CSV, the optional SVG charts and the fixtures.

pub mod config;
pub mod output;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use bregman_bound::bounds::{
    classify_convexity, estimate_c_min, local_expansion_check, min_admissible_c_binary,
    min_admissible_c_separable, verify_theorem1, verify_theorem2_seeded, verify_vector_bound,
    Domain, Location, JUST_ABOVE,
};
use bregman_bound::divergence::{
    bregman_binary, generator_by_name, pinsker_rhs, Divergence, ProbVector, SeparableBregman,
    GENERATOR_NAMES,
};
use bregman_bound::experiment::{
    default_epsilon_grid, dominance_failures, eps_constraint_experiment,
    fixed_expectation_experiment, ExperimentCurve, c_grid,
};
use bregman_bound::loss::{by_name, check_properness, ProperLoss};
use bregman_bound::oracle::{generate_fixtures, write_fixtures, FIXTURE_FINAL_STEP};

pub use config::{Cli, Command, Options, RunConfig};
use output::{curve_rows, sort_rows, write_csv, Row};

/// Name of the fixture file inside the fixtures directory.
pub const FIXTURE_FILE: &str = "oracle.jsonl";
/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "BREGMAN_BOUND_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] bregman_bound::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("{0}")]
    InvalidConfig(String),

    #[error("writing output: {0}")]
    Output(String),
}

/// Everything a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub rows: Vec<Row>,
    /// Failed checks; the process exits non-zero when this is positive.
    pub violations: u64,
    /// Human-readable remarks printed to stderr.
    pub notes: Vec<String>,
    /// Curves of experiment commands, for plotting.
    pub curves: Vec<ExperimentCurve>,
}

/// Cap the global rayon pool from `BREGMAN_BOUND_THREADS` if it is set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::InvalidConfig(format!("{THREADS_ENV} must be a positive integer")))?;
    // a second initialization in the same process is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn loss_list(config: &RunConfig, default: &[&str]) -> Vec<(String, ProperLoss)> {
    let names: Vec<String> = if config.losses.is_empty() {
        default.iter().map(|s| s.to_string()).collect()
    } else {
        config.losses.clone()
    };
    names
        .into_iter()
        .filter_map(|n| by_name(&n).map(|l| (n, l)))
        .collect()
}

fn generator_list(config: &RunConfig) -> Vec<String> {
    if config.generators.is_empty() {
        GENERATOR_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        config.generators.clone()
    }
}

fn location_vector(loc: &Location) -> Vec<f64> {
    match loc {
        Location::None => Vec::new(),
        Location::Binary { p, q } => vec![*p, *q],
        Location::Vector { q, .. } => q.clone(),
    }
}

/// Compute the rows of `config.command`.
pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    config.validate()?;
    let mut outcome = match config.command {
        Command::Catalog => catalog(config)?,
        Command::VerifyTheorem1 => theorem1(config)?,
        Command::VerifyTheorem2 => theorem2(config)?,
        Command::VerifyCorollary1 => corollary1(config)?,
        Command::EstimateC => estimate_c(config)?,
        Command::ExpFixedExpectation => exp_fixed(config)?,
        Command::ExpEpsConstraint => exp_eps(config)?,
        Command::RegenFixtures => regen_fixtures(config)?,
    };
    sort_rows(&mut outcome.rows);
    Ok(outcome)
}

fn catalog(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let e = config.clamp_epsilon;
    let qs = [e, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0 - e];
    for (name, loss) in loss_list(config, &bregman_bound::loss::LOSS_NAMES) {
        let threshold = min_admissible_c_binary(&loss).unwrap_or(f64::NAN);
        for &q in &qs {
            out.rows.push(Row {
                experiment: "catalog".into(),
                sweep_param: "q".into(),
                sweep_value: q,
                divergence: name.clone(),
                constant_c: threshold,
                value: loss.l0(q),
                bounded_value: loss.l1(q),
                q_star: Vec::new(),
            });
        }
        let grid: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
        let report = check_properness(&loss, &grid);
        if !report.pass {
            out.violations += 1;
            out.notes.push(format!(
                "{name}: not proper (expected loss improves by {:e} at p = {})",
                report.max_improvement, report.worst_p
            ));
        }
    }
    Ok(out)
}

fn theorem1(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    for (name, loss) in loss_list(config, &["quadratic", "log", "boosting", "arcsine"]) {
        if !loss.is_smooth() {
            out.notes.push(format!("{name}: skipped, the loss has no weight density"));
            continue;
        }
        let c = match config.constant {
            Some(c) => c,
            None => min_admissible_c_binary(&loss)? + JUST_ABOVE,
        };
        let convexity = classify_convexity(&loss, config.grid_n)?;
        let report = verify_theorem1(&loss, c, config.grid_n)?;
        out.rows.push(Row {
            experiment: "verify-theorem1".into(),
            sweep_param: "grid_n".into(),
            sweep_value: config.grid_n as f64,
            divergence: name.clone(),
            constant_c: c,
            value: report.worst_ratio,
            bounded_value: report.violation_count as f64,
            q_star: location_vector(&report.worst_location),
        });
        if convexity.is_convex {
            out.violations += report.violation_count;
        } else {
            out.notes.push(format!(
                "{name}: not convex in q at {} grid pairs, {} violations reported but not counted",
                convexity.violation_count, report.violation_count
            ));
        }
    }
    Ok(out)
}

fn theorem2(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let m = config.dimension;
    for domain in [Domain::Cube, Domain::Simplex] {
        let tag = match domain {
            Domain::Cube => "verify-theorem2:cube",
            Domain::Simplex => "verify-theorem2:simplex",
        };
        let mut push = |name: &str, c: f64, r: &bregman_bound::bounds::BoundReport| {
            out.rows.push(Row {
                experiment: tag.into(),
                sweep_param: "m".into(),
                sweep_value: m as f64,
                divergence: name.into(),
                constant_c: c,
                value: r.worst_ratio,
                bounded_value: r.violation_count as f64,
                q_star: location_vector(&r.worst_location),
            });
            r.violation_count
        };
        let mut violations = 0;
        for name in generator_list(config) {
            let gen = generator_by_name(&name).ok_or_else(|| CliError::UnknownName {
                kind: "generator",
                name: name.clone(),
            })?;
            let c = config
                .constant
                .unwrap_or(min_admissible_c_separable(&gen) + JUST_ABOVE);
            let sep = SeparableBregman::shared(gen);
            let r = verify_theorem2_seeded(
                &sep,
                c,
                m,
                config.samples,
                domain == Domain::Simplex,
                config.seed,
            )?;
            violations += push(&name, c, &r);
        }
        let pinsker = |p: &[f64], q: &[f64]| {
            let a = ProbVector::cube(p.to_vec());
            let b = ProbVector::cube(q.to_vec());
            match (a, b) {
                (Ok(a), Ok(b)) => pinsker_rhs(&a, &b).unwrap_or(f64::INFINITY),
                _ => f64::INFINITY,
            }
        };
        let r = verify_vector_bound(&pinsker, 1.0, m, config.samples, domain, config.seed)?;
        let pinsker_violations = push("pinsker", 1.0, &r);
        if domain == Domain::Simplex {
            violations += pinsker_violations;
        } else if pinsker_violations > 0 {
            // Pinsker's inequality is a statement about probability vectors
            out.notes.push(format!(
                "pinsker on the cube: {pinsker_violations} unnormalized pairs violate it; not counted"
            ));
        }
        out.violations += violations;
    }
    Ok(out)
}

/// `p` values and steps of the local expansion check.
pub const COROLLARY_P: [f64; 3] = [0.1, 0.3, 0.5];
pub const COROLLARY_DP: [f64; 3] = [1e-2, 1e-3, 1e-4];

fn corollary1(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    for (name, loss) in loss_list(config, &["log", "quadratic"]) {
        if !loss.is_smooth() {
            out.notes.push(format!("{name}: skipped, the loss has no weight density"));
            continue;
        }
        for &p in &COROLLARY_P {
            for &dp in &COROLLARY_DP {
                let e = local_expansion_check(&loss, p, dp)?;
                let ratio_ok = (e.ratio() - 1.0).abs() <= 10.0 * dp.abs();
                let fisher_ok = e.lhs <= e.rhs;
                if !(ratio_ok && fisher_ok) {
                    out.violations += 1;
                    out.notes.push(format!(
                        "{name} at p = {p}, dp = {dp}: ratio {}, lhs {} vs rhs {}",
                        e.ratio(),
                        e.lhs,
                        e.rhs
                    ));
                }
                out.rows.push(Row {
                    experiment: "verify-corollary1".into(),
                    sweep_param: "dp".into(),
                    sweep_value: dp,
                    divergence: name.clone(),
                    constant_c: e.constant,
                    value: e.lhs,
                    bounded_value: e.rhs,
                    q_star: vec![p, p + dp],
                });
            }
        }
    }
    Ok(out)
}

fn estimate_c(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    for (name, loss) in loss_list(config, &["quadratic", "log", "boosting", "arcsine"]) {
        if !loss.is_smooth() {
            out.notes.push(format!("{name}: skipped, the loss has no weight density"));
            continue;
        }
        let threshold = min_admissible_c_binary(&loss)?;
        let target = |p: f64, q: f64| bregman_binary(&loss, p, q);
        let c_min = estimate_c_min(&target, config.grid_n);
        let convex = classify_convexity(&loss, config.grid_n)?.is_convex;
        if convex && c_min > threshold {
            out.violations += 1;
            out.notes
                .push(format!("{name}: empirical constant {c_min} exceeds threshold {threshold}"));
        }
        out.rows.push(Row {
            experiment: "estimate-c".into(),
            sweep_param: "grid_n".into(),
            sweep_value: config.grid_n as f64,
            divergence: name,
            constant_c: threshold,
            value: c_min,
            bounded_value: c_min / threshold,
            q_star: Vec::new(),
        });
    }
    Ok(out)
}

fn experiment_inputs(config: &RunConfig) -> Result<(ProbVector, Vec<Divergence>), CliError> {
    let p = ProbVector::simplex(config.p.clone())?;
    if config.support.len() != p.len() {
        return Err(CliError::InvalidConfig(format!(
            "support has {} values but p has {}",
            config.support.len(),
            p.len()
        )));
    }
    let mut objectives = vec![Divergence::KullbackLeibler];
    for name in generator_list(config) {
        objectives.push(Divergence::by_name(&name).ok_or(CliError::UnknownName {
            kind: "generator",
            name,
        })?);
    }
    Ok((p, objectives))
}

fn exp_fixed(config: &RunConfig) -> Result<Outcome, CliError> {
    let (p, objectives) = experiment_inputs(config)?;
    let curves = fixed_expectation_experiment(&p, &config.support, &objectives, &c_grid())?;
    let mut out = Outcome::default();
    for (d, c, kl, bounded) in dominance_failures(&curves) {
        out.violations += 1;
        out.notes
            .push(format!("{d} at c = {c}: KL {kl} below bounded value {bounded}"));
    }
    out.rows = curve_rows(&curves);
    out.curves = curves;
    Ok(out)
}

/// Constraint slack accepted on floor-constrained solutions.
pub const ACTIVE_TOLERANCE: f64 = 1e-6;

fn exp_eps(config: &RunConfig) -> Result<Outcome, CliError> {
    let (p, objectives) = experiment_inputs(config)?;
    let names: Vec<String> = if config.constraints.is_empty() {
        vec!["tv".into(), "chi2".into()]
    } else {
        config.constraints.clone()
    };
    let mut out = Outcome::default();
    for name in names {
        let constraint = Divergence::by_name(&name).ok_or(CliError::UnknownName {
            kind: "constraint divergence",
            name: name.clone(),
        })?;
        let grid = default_epsilon_grid(&constraint, &p);
        let curves = eps_constraint_experiment(&p, &config.support, &constraint, &objectives, &grid)?;
        for (d, e, kl, bounded) in dominance_failures(&curves) {
            out.violations += 1;
            out.notes
                .push(format!("{name}/{d} at eps = {e}: KL {kl} below bounded value {bounded}"));
        }
        for curve in curves.iter().filter(|c| !c.is_plugin()) {
            for w in curve.points.windows(2) {
                if w[1].value < w[0].value {
                    out.violations += 1;
                    out.notes.push(format!(
                        "{name}/{}: value decreases from {} to {} at eps = {}",
                        curve.divergence, w[0].value, w[1].value, w[1].sweep_value
                    ));
                }
            }
            for pt in &curve.points {
                if pt.constraint_residual.abs() > ACTIVE_TOLERANCE {
                    out.violations += 1;
                    out.notes.push(format!(
                        "{name}/{}: constraint slack {} at eps = {}",
                        curve.divergence, pt.constraint_residual, pt.sweep_value
                    ));
                }
            }
        }
        out.rows.extend(curve_rows(&curves));
        out.curves.extend(curves);
    }
    Ok(out)
}

fn regen_fixtures(config: &RunConfig) -> Result<Outcome, CliError> {
    let fixtures = generate_fixtures(config.resolution, FIXTURE_FINAL_STEP)?;
    let mut out = Outcome::default();
    for (i, f) in fixtures.iter().enumerate() {
        out.rows.push(Row {
            experiment: "regen-fixtures".into(),
            sweep_param: "fixture".into(),
            sweep_value: i as f64,
            divergence: f.inputs.objective.clone(),
            constant_c: f64::NAN,
            value: f.expected_value,
            bounded_value: f.tolerance,
            q_star: f.expected_q.clone(),
        });
    }
    fs::create_dir_all(&config.fixtures_dir).map_err(|source| CliError::Io {
        path: config.fixtures_dir.clone(),
        source,
    })?;
    let path = config.fixtures_dir.join(FIXTURE_FILE);
    write_fixtures(&path, &fixtures)?;
    out.notes
        .push(format!("wrote {} fixtures to {}", fixtures.len(), path.display()));
    Ok(out)
}

fn svg_path(output: Option<&Path>, experiment: &str) -> PathBuf {
    let stem = experiment.replace(':', "-");
    match output {
        Some(path) => {
            let base = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "out".into());
            path.with_file_name(format!("{base}-{stem}.svg"))
        }
        None => PathBuf::from(format!("{stem}.svg")),
    }
}

/// Write one chart per experiment; returns the paths written.
pub fn write_plots(outcome: &Outcome, output: Option<&Path>) -> Result<Vec<PathBuf>, CliError> {
    let mut experiments: Vec<&str> = outcome.curves.iter().map(|c| c.experiment.as_str()).collect();
    experiments.dedup();
    let mut written = Vec::new();
    for e in experiments {
        let curves: Vec<&ExperimentCurve> =
            outcome.curves.iter().filter(|c| c.experiment == e).collect();
        let log_x = curves.first().is_some_and(|c| c.sweep_param == "epsilon");
        let path = svg_path(output, e);
        fs::write(&path, output::svg_chart(e, &curves, log_x))
            .map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
        written.push(path);
    }
    Ok(written)
}

/// Run, write the CSV (and charts), print notes; returns the process exit status.
pub fn execute(config: &RunConfig) -> Result<i32, CliError> {
    let outcome = run(config)?;
    match &config.output {
        Some(path) => {
            let file = fs::File::create(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            write_csv(io::BufWriter::new(file), &outcome.rows)?;
        }
        None => write_csv(io::stdout().lock(), &outcome.rows)?,
    }
    if config.plot {
        for path in write_plots(&outcome, config.output.as_deref())? {
            eprintln!("wrote {}", path.display());
        }
    }
    for note in &outcome.notes {
        eprintln!("{note}");
    }
    Ok(if outcome.violations == 0 { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(command: Command) -> RunConfig {
        let mut c = RunConfig::new(command);
        c.grid_n = 40;
        c.samples = 2000;
        c
    }

    #[test]
    fn theorem1_rows_and_negative_control() {
        let mut c = config(Command::VerifyTheorem1);
        c.losses = vec!["quadratic".into(), "log".into()];
        let out = run(&c).unwrap();
        assert_eq!(out.violations, 0);
        assert_eq!(out.rows.len(), 2);
        assert!(out.rows.iter().all(|r| r.bounded_value == 0.0));
        c.losses = vec!["quadratic".into()];
        c.constant = Some(0.4);
        assert!(run(&c).unwrap().violations > 0);
    }

    #[test]
    fn boosting_is_reported_but_not_counted() {
        let mut c = config(Command::VerifyTheorem1);
        c.losses = vec!["boosting".into(), "zero-one".into()];
        let out = run(&c).unwrap();
        assert_eq!(out.violations, 0);
        assert_eq!(out.rows.len(), 1);
        assert_eq!(out.notes.len(), 2);
    }

    #[test]
    fn estimate_c_quadratic() {
        let mut c = config(Command::EstimateC);
        c.grid_n = 200;
        c.losses = vec!["quadratic".into()];
        let out = run(&c).unwrap();
        let r = &out.rows[0];
        assert!((r.value - 0.5).abs() < 0.02);
        assert_eq!(r.constant_c, 1.0);
    }

    #[test]
    fn fixed_expectation_has_zero_kl_at_unbiased_point() {
        let out = run(&config(Command::ExpFixedExpectation)).unwrap();
        assert_eq!(out.violations, 0);
        let row = out
            .rows
            .iter()
            .find(|r| r.divergence == "kl" && r.sweep_value == 0.0)
            .unwrap();
        assert_eq!(row.value, 0.0);
        assert_eq!(row.constant_c, 1.0);
    }

    #[test]
    fn catalog_is_fair_at_clamped_endpoints() {
        let mut c = config(Command::Catalog);
        c.losses = vec!["log".into()];
        let out = run(&c).unwrap();
        assert_eq!(out.violations, 0);
        let first = &out.rows[0];
        assert_eq!(first.sweep_value, 1e-12);
        assert!(first.value.abs() < 1e-11);
    }

    #[test]
    fn svg_names_follow_output() {
        assert_eq!(
            svg_path(Some(Path::new("/tmp/run.csv")), "eps-constraint:tv"),
            PathBuf::from("/tmp/run-eps-constraint-tv.svg")
        );
        assert_eq!(svg_path(None, "fixed-expectation"), PathBuf::from("fixed-expectation.svg"));
    }
}
