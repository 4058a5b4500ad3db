//! Parameter sweeps over the constrained minimization problems.
//!
//! Each sweep point is solved once per objective. Bregman objectives also get a
//! `plugin:<name>` curve holding `D_g(p || q_KL)` at the KL minimizer, which is the
//! middle term of the chain `min KL >= D_g(p || q_KL) / C`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::JUST_ABOVE;
use crate::divergence::{Divergence, ProbVector};
use crate::error::{Error, Result};
use crate::optimize::{attainable_max, solve, Constraint, SimplexProblem, SolveResult};

pub const FIXED_EXPECTATION: &str = "fixed-expectation";
pub const EPS_CONSTRAINT: &str = "eps-constraint";
/// Prefix of curves evaluated at the KL minimizer.
pub const PLUGIN_PREFIX: &str = "plugin:";
/// Upper cap on the epsilon sweep, used when the constraint is unbounded.
pub const EPSILON_CAP: f64 = 1.5;
pub const EPSILON_POINTS: usize = 20;
pub const EPSILON_MIN: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub sweep_value: f64,
    /// Minimized objective, or `D_g(p || q_KL)` on plug-in curves.
    pub value: f64,
    /// `value / C`.
    pub bounded_value: f64,
    pub q_star: Vec<f64>,
    /// Signed constraint slack at `q_star`.
    pub constraint_residual: f64,
}

/// Values of one divergence against the swept parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentCurve {
    /// `fixed-expectation` or `eps-constraint:<divergence>`.
    pub experiment: String,
    /// `c` or `epsilon`.
    pub sweep_param: String,
    pub divergence: String,
    /// Normalization constant: 1 for KL, `g''(1) + 1e-6` for a Bregman objective.
    pub constant: f64,
    pub points: Vec<CurvePoint>,
}

impl ExperimentCurve {
    pub fn is_plugin(&self) -> bool {
        self.divergence.starts_with(PLUGIN_PREFIX)
    }
}

/// `{-0.9, -0.8, ..., 0.9}`.
pub fn c_grid() -> Vec<f64> {
    (-9..=9).map(|k| k as f64 / 10.0).collect()
}

/// `EPSILON_POINTS` log-spaced values from `1e-3` to `0.8 min(max, 1.5)`.
pub fn epsilon_grid(max: f64) -> Vec<f64> {
    let top = 0.8 * max.min(EPSILON_CAP);
    let (a, b) = (EPSILON_MIN.ln(), top.ln());
    (0..EPSILON_POINTS)
        .map(|k| (a + (b - a) * k as f64 / (EPSILON_POINTS - 1) as f64).exp())
        .collect()
}

fn constant_of(d: &Divergence) -> Result<f64> {
    match d {
        Divergence::KullbackLeibler => Ok(1.0),
        Divergence::Bregman(b) => Ok(b.curvature_at_one() + JUST_ABOVE),
        other => Err(Error::InvalidArgument(format!(
            "`{}` has no normalization constant against KL",
            other.name()
        ))),
    }
}

/// One solved sweep point: results per objective in input order, plus the KL solve.
struct Solved {
    results: Vec<SolveResult>,
    kl: SolveResult,
}

fn sweep(
    experiment: String,
    sweep_param: &str,
    objectives: &[Divergence],
    values: &[f64],
    problem_at: &(dyn Fn(f64, &Divergence) -> Result<SimplexProblem> + Sync),
) -> Result<Vec<ExperimentCurve>> {
    if objectives.is_empty() {
        return Err(Error::InvalidArgument("no objectives given".into()));
    }
    let constants: Vec<f64> = objectives.iter().map(constant_of).collect::<Result<_>>()?;
    let solved: Vec<Solved> = values
        .par_iter()
        .map(|&v| {
            let results = objectives
                .iter()
                .map(|obj| solve(&problem_at(v, obj)?))
                .collect::<Result<Vec<_>>>()?;
            let kl = match objectives
                .iter()
                .position(|o| matches!(o, Divergence::KullbackLeibler))
            {
                Some(i) => results[i].clone(),
                None => solve(&problem_at(v, &Divergence::KullbackLeibler)?)?,
            };
            Ok(Solved { results, kl })
        })
        .collect::<Result<_>>()?;

    let mut curves = Vec::new();
    for (i, obj) in objectives.iter().enumerate() {
        let c = constants[i];
        let points = values
            .iter()
            .zip(&solved)
            .map(|(&v, s)| {
                let r = &s.results[i];
                CurvePoint {
                    sweep_value: v,
                    value: r.objective_value,
                    bounded_value: r.objective_value / c,
                    q_star: r.q_star.values().to_vec(),
                    constraint_residual: r.constraint_residual,
                }
            })
            .collect();
        curves.push(ExperimentCurve {
            experiment: experiment.clone(),
            sweep_param: sweep_param.into(),
            divergence: obj.name().into(),
            constant: c,
            points,
        });
    }
    for (i, obj) in objectives.iter().enumerate() {
        if !matches!(obj, Divergence::Bregman(_)) {
            continue;
        }
        let c = constants[i];
        let points = values
            .iter()
            .zip(&solved)
            .map(|(&v, s)| {
                let p = problem_at(v, obj)?;
                let value = obj.eval(p.p.values(), s.kl.q_star.values());
                Ok(CurvePoint {
                    sweep_value: v,
                    value,
                    bounded_value: value / c,
                    q_star: s.kl.q_star.values().to_vec(),
                    constraint_residual: s.kl.constraint_residual,
                })
            })
            .collect::<Result<_>>()?;
        curves.push(ExperimentCurve {
            experiment: experiment.clone(),
            sweep_param: sweep_param.into(),
            divergence: format!("{PLUGIN_PREFIX}{}", obj.name()),
            constant: c,
            points,
        });
    }
    Ok(curves)
}

/// For each `c`, minimize every objective subject to `E_q(Y) = c`.
pub fn fixed_expectation_experiment(
    p: &ProbVector,
    support: &[f64],
    objectives: &[Divergence],
    c_values: &[f64],
) -> Result<Vec<ExperimentCurve>> {
    let problem_at = |c: f64, obj: &Divergence| {
        SimplexProblem::new(
            p.clone(),
            support.to_vec(),
            obj.clone(),
            Constraint::FixedExpectation(c),
        )
    };
    sweep(FIXED_EXPECTATION.into(), "c", objectives, c_values, &problem_at)
}

/// For each `eps`, minimize every objective subject to `D(p || q) >= eps`.
pub fn eps_constraint_experiment(
    p: &ProbVector,
    support: &[f64],
    constraint: &Divergence,
    objectives: &[Divergence],
    eps_values: &[f64],
) -> Result<Vec<ExperimentCurve>> {
    let problem_at = |eps: f64, obj: &Divergence| {
        SimplexProblem::new(
            p.clone(),
            support.to_vec(),
            obj.clone(),
            Constraint::DivergenceFloor {
                divergence: constraint.clone(),
                epsilon: eps,
            },
        )
    };
    sweep(
        format!("{EPS_CONSTRAINT}:{}", constraint.name()),
        "epsilon",
        objectives,
        eps_values,
        &problem_at,
    )
}

/// Default sweep for a constraint divergence.
pub fn default_epsilon_grid(constraint: &Divergence, p: &ProbVector) -> Vec<f64> {
    epsilon_grid(attainable_max(constraint, p))
}

/// Points where a curve divided by its constant rises above the KL curve of the same
/// experiment, as `(divergence, sweep_value, kl, bounded)`.
pub fn dominance_failures(curves: &[ExperimentCurve]) -> Vec<(String, f64, f64, f64)> {
    let mut out = Vec::new();
    for kl in curves.iter().filter(|c| c.divergence == "kl") {
        for other in curves
            .iter()
            .filter(|c| c.experiment == kl.experiment && c.divergence != "kl")
        {
            for (a, b) in kl.points.iter().zip(&other.points) {
                if a.value < b.bounded_value - 1e-10 {
                    out.push((other.divergence.clone(), a.sweep_value, a.value, b.bounded_value));
                }
            }
        }
    }
    out
}

/// Whether every minimized point satisfies its constraint to within `tol`.
pub fn residuals_within(curves: &[ExperimentCurve], tol: f64) -> bool {
    curves
        .iter()
        .filter(|c| !c.is_plugin())
        .flat_map(|c| &c.points)
        .all(|p| p.constraint_residual.abs() <= tol)
}
