//! Divergence minimization on the probability simplex.
//!
//! Two constraint families are supported: a fixed expectation `sum_i y_i q_i = c` of a
//! support vector `y`, and a divergence floor `D_eps(p || q) >= eps`. The first is convex
//! and solved by spectral projected gradient; the second is solved on its active boundary
//! by ray search from `p`.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{DEFAULT_SEED, JUST_ABOVE};
use crate::divergence::{BregmanGenerator, Divergence, ProbVector};
use crate::error::{Error, Result};
use crate::numeric::golden_section;

/// Lower bound on coordinates when the objective gradient diverges at zero.
pub const CLAMPED_FLOOR: f64 = 1e-10;
/// Iteration cap of the projected-gradient solver.
pub const MAX_ITERATIONS: usize = 10_000;
/// Stop once `|P(q - grad) - q|_inf` falls below this.
pub const GRADIENT_TOLERANCE: f64 = 1e-10;
/// Angles sampled on the boundary before refinement (m = 3).
pub const BOUNDARY_SAMPLES: usize = 2048;
/// Random directions sampled on the boundary when m >= 4.
pub const RANDOM_DIRECTIONS: usize = 8192;

const FEASIBILITY_SLACK: f64 = 1e-12;

/// The constraint placed on `q`.
#[derive(Clone, Debug)]
pub enum Constraint {
    /// `sum_i y_i q_i = c`.
    FixedExpectation(f64),
    /// `D(p || q) >= epsilon`.
    DivergenceFloor { divergence: Divergence, epsilon: f64 },
}

/// Minimize `objective(p || q)` over simplex points `q` satisfying `constraint`.
#[derive(Clone, Debug)]
pub struct SimplexProblem {
    pub p: ProbVector,
    pub support: Vec<f64>,
    pub objective: Divergence,
    pub constraint: Constraint,
}

impl SimplexProblem {
    pub fn new(
        p: ProbVector,
        support: Vec<f64>,
        objective: Divergence,
        constraint: Constraint,
    ) -> Result<Self> {
        if !p.is_simplex() {
            let sum = p.values().iter().sum();
            return Err(Error::NotOnSimplex(sum));
        }
        if support.len() != p.len() {
            return Err(Error::LengthMismatch(p.len(), support.len()));
        }
        if support.iter().any(|y| !y.is_finite()) {
            return Err(Error::InvalidArgument("support values must be finite".into()));
        }
        match &constraint {
            Constraint::FixedExpectation(c) => {
                let (lo, hi) = support_range(&support);
                if !c.is_finite() || *c < lo - FEASIBILITY_SLACK || *c > hi + FEASIBILITY_SLACK {
                    return Err(Error::Infeasible(format!(
                        "expectation {c} outside [{lo}, {hi}]"
                    )));
                }
            }
            Constraint::DivergenceFloor { epsilon, .. } => {
                if !(*epsilon >= 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "epsilon must be non-negative, got {epsilon}"
                    )));
                }
            }
        }
        Ok(Self {
            p,
            support,
            objective,
            constraint,
        })
    }

    /// Same problem with another objective.
    pub fn with_objective(&self, objective: Divergence) -> Self {
        Self {
            objective,
            ..self.clone()
        }
    }

    pub fn dimension(&self) -> usize {
        self.p.len()
    }

    /// Signed constraint slack at `q`: `E_q(Y) - c` or `D(p || q) - eps`.
    pub fn constraint_residual(&self, q: &[f64]) -> f64 {
        match &self.constraint {
            Constraint::FixedExpectation(c) => dot(&self.support, q) - c,
            Constraint::DivergenceFloor {
                divergence,
                epsilon,
            } => divergence.eval(self.p.values(), q) - epsilon,
        }
    }
}

/// Which solver produced a result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// The feasible set is a single point, or the constraint is inactive at `p`.
    Exact,
    ProjectedGradient,
    BoundarySearch,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::ProjectedGradient => "projected-gradient",
            Method::BoundarySearch => "boundary-search",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub q_star: ProbVector,
    pub objective_value: f64,
    /// `|E_q(Y) - c|` for fixed expectation, `D(p || q) - eps` for the floor.
    pub constraint_residual: f64,
    pub iterations: usize,
    pub method: Method,
}

/// Dispatch on the constraint kind.
pub fn solve(prob: &SimplexProblem) -> Result<SolveResult> {
    match prob.constraint {
        Constraint::FixedExpectation(_) => minimize_fixed_expectation(prob),
        Constraint::DivergenceFloor { .. } => minimize_divergence_floor(prob),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn support_range(y: &[f64]) -> (f64, f64) {
    y.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Wrap a numerically normalized vector, absorbing rounding below the simplex tolerance.
fn finish_simplex(mut q: Vec<f64>) -> Result<ProbVector> {
    for x in q.iter_mut() {
        *x = x.clamp(0.0, 1.0);
    }
    let sum: f64 = q.iter().sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::NotOnSimplex(sum));
    }
    if sum != 1.0 {
        for x in q.iter_mut() {
            *x /= sum;
        }
    }
    ProbVector::simplex(q)
}

// --------------------------------------------------------------------------------------
// Projections
// --------------------------------------------------------------------------------------

/// Euclidean projection onto the unit simplex by sort and threshold.
pub fn project_to_simplex(v: &[f64]) -> Result<ProbVector> {
    if v.is_empty() {
        return Err(Error::Empty);
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("cannot project a non-finite vector".into()));
    }
    let mut out = vec![0.0; v.len()];
    project_floored(v, 0.0, &mut out);
    finish_simplex(out)
}

/// Projection onto `{x >= lb, sum x = 1}`; requires `m * lb <= 1`.
fn project_floored(v: &[f64], lb: f64, out: &mut [f64]) {
    let m = v.len();
    let radius = 1.0 - m as f64 * lb;
    let mut u: Vec<f64> = v.iter().map(|x| x - lb).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumulative += uk;
        let t = (cumulative - radius) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    for (o, &x) in out.iter_mut().zip(v) {
        *o = lb + (x - lb - theta).max(0.0);
    }
}

/// Projection onto `{x >= lb, sum x = 1, y . x = c}` by bisection on the multiplier of the
/// expectation constraint. `c` must be feasible for the floor `lb`.
fn project_expectation(v: &[f64], y: &[f64], c: f64, lb: f64, out: &mut [f64]) {
    let mut shifted = vec![0.0; v.len()];
    let mut h = |mu: f64, out: &mut [f64]| {
        for ((s, &vi), &yi) in shifted.iter_mut().zip(v).zip(y) {
            *s = vi - mu * yi;
        }
        project_floored(&shifted, lb, out);
        dot(y, out)
    };
    // h is non-increasing in mu.
    let (mut lo, mut hi) = (-1.0, 1.0);
    for _ in 0..400 {
        if h(lo, out) >= c {
            break;
        }
        lo *= 2.0;
    }
    for _ in 0..400 {
        if h(hi, out) <= c {
            break;
        }
        hi *= 2.0;
    }
    let mut h_lo = h(lo, out);
    let mut h_hi = h(hi, out);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let hm = h(mid, out);
        if hm >= c {
            lo = mid;
            h_lo = hm;
        } else {
            hi = mid;
            h_hi = hm;
        }
    }
    // h is piecewise linear, so interpolation inside the final bracket is exact up to
    // rounding when both ends share a piece.
    let mut best = (lo, (h_lo - c).abs());
    if (h_hi - c).abs() < best.1 {
        best = (hi, (h_hi - c).abs());
    }
    if h_lo != h_hi {
        let mu = lo + (h_lo - c) / (h_lo - h_hi) * (hi - lo);
        let r = (h(mu, out) - c).abs();
        if r < best.1 {
            best = (mu, r);
        }
    }
    h(best.0, out);
}

// --------------------------------------------------------------------------------------
// Fixed expectation
// --------------------------------------------------------------------------------------

fn floor_for(objective: &Divergence) -> f64 {
    if objective.singular_at_zero() {
        CLAMPED_FLOOR
    } else {
        0.0
    }
}

/// Range of `y . x` over `{x >= lb, sum x = 1}`.
fn expectation_range(y: &[f64], lb: f64) -> (f64, f64) {
    let (ymin, ymax) = support_range(y);
    let m = y.len() as f64;
    let total: f64 = y.iter().sum();
    let free = 1.0 - m * lb;
    (lb * total + free * ymin, lb * total + free * ymax)
}

/// Minimize the objective over `{q in simplex : sum_i y_i q_i = c}`.
///
/// Objectives whose gradient diverges at zero are minimized over `q_i >= 1e-10` unless
/// `c` is too extreme for that floor, in which case the floor is dropped.
pub fn minimize_fixed_expectation(prob: &SimplexProblem) -> Result<SolveResult> {
    let c = match prob.constraint {
        Constraint::FixedExpectation(c) => c,
        _ => {
            return Err(Error::InvalidArgument(
                "minimize_fixed_expectation needs a fixed-expectation constraint".into(),
            ))
        }
    };
    let p = prob.p.values();
    let y = &prob.support;
    let m = p.len();
    let (ymin, ymax) = support_range(y);
    let c = c.clamp(ymin, ymax);
    let objective = &prob.objective;
    let residual = |q: &[f64]| (dot(y, q) - c).abs();

    if (dot(y, p) - c).abs() <= FEASIBILITY_SLACK {
        return Ok(SolveResult {
            q_star: prob.p.clone(),
            objective_value: objective.eval(p, p),
            constraint_residual: residual(p),
            iterations: 0,
            method: Method::Exact,
        });
    }

    // Extreme expectations pin q to the face of extreme support values.
    let face: Vec<usize> = if c == ymax {
        (0..m).filter(|&i| y[i] == ymax).collect()
    } else if c == ymin {
        (0..m).filter(|&i| y[i] == ymin).collect()
    } else {
        Vec::new()
    };
    if face.len() == 1 {
        let mut q = vec![0.0; m];
        q[face[0]] = 1.0;
        let value = objective.eval(p, &q);
        if !value.is_finite() {
            return Err(Error::ObjectiveInfinite);
        }
        return Ok(SolveResult {
            constraint_residual: residual(&q),
            q_star: finish_simplex(q)?,
            objective_value: value,
            iterations: 0,
            method: Method::Exact,
        });
    }

    let mut lb = floor_for(objective);
    let (lo, hi) = expectation_range(y, lb);
    if c < lo || c > hi {
        lb = 0.0;
    }

    let (q, iterations) = spectral_projected_gradient(objective, p, y, c, lb);
    let value = objective.eval(p, &q);
    if !value.is_finite() {
        return Err(Error::ObjectiveInfinite);
    }
    Ok(SolveResult {
        constraint_residual: residual(&q),
        q_star: finish_simplex(q)?,
        objective_value: value,
        iterations,
        method: Method::ProjectedGradient,
    })
}

/// Projected gradient with Barzilai-Borwein steps and Armijo backtracking.
fn spectral_projected_gradient(
    objective: &Divergence,
    p: &[f64],
    y: &[f64],
    c: f64,
    lb: f64,
) -> (Vec<f64>, usize) {
    let m = p.len();
    let mut x = vec![0.0; m];
    project_expectation(p, y, c, lb, &mut x);
    let grad = |q: &[f64], g: &mut [f64]| {
        if !objective.gradient(p, q, g) {
            fd_gradient(objective, p, q, g);
        }
    };
    let mut g = vec![0.0; m];
    grad(&x, &mut g);
    let mut fx = objective.eval(p, &x);
    let mut alpha = 1.0;
    let mut trial = vec![0.0; m];
    let mut step = vec![0.0; m];
    let mut candidate = vec![0.0; m];
    let mut g_new = vec![0.0; m];

    for iteration in 1..=MAX_ITERATIONS {
        // stationarity measure
        for i in 0..m {
            trial[i] = x[i] - g[i];
        }
        project_expectation(&trial, y, c, lb, &mut candidate);
        let measure = x
            .iter()
            .zip(&candidate)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if measure <= GRADIENT_TOLERANCE {
            return (x, iteration - 1);
        }

        for i in 0..m {
            trial[i] = x[i] - alpha * g[i];
        }
        project_expectation(&trial, y, c, lb, &mut candidate);
        for i in 0..m {
            step[i] = candidate[i] - x[i];
        }
        let slope = dot(&g, &step);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..m {
                candidate[i] = x[i] + lambda * step[i];
            }
            let fc = objective.eval(p, &candidate);
            if fc.is_finite() && fc <= fx + 1e-4 * lambda * slope {
                accepted = true;
                fx = fc;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted || slope >= 0.0 && lambda < 1.0 {
            // no descent left at working precision
            return (x, iteration);
        }
        grad(&candidate, &mut g_new);
        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..m {
            let s = candidate[i] - x[i];
            ss += s * s;
            sy += s * (g_new[i] - g[i]);
        }
        alpha = if sy > 0.0 {
            (ss / sy).clamp(1e-12, 1e12)
        } else {
            1e12f64.min(alpha * 2.0)
        };
        std::mem::swap(&mut x, &mut candidate);
        std::mem::swap(&mut g, &mut g_new);
        if ss == 0.0 {
            return (x, iteration);
        }
    }
    (x, MAX_ITERATIONS)
}

fn fd_gradient(objective: &Divergence, p: &[f64], q: &[f64], out: &mut [f64]) {
    let mut probe = q.to_vec();
    for i in 0..q.len() {
        let h = 1e-7;
        probe[i] = q[i] + h;
        let up = objective.eval(p, &probe);
        probe[i] = (q[i] - h).max(0.0);
        let down = objective.eval(p, &probe);
        out[i] = (up - down) / (q[i] + h - probe[i]);
        probe[i] = q[i];
    }
}

// --------------------------------------------------------------------------------------
// Divergence floor
// --------------------------------------------------------------------------------------

/// `max_i D(p || e_i)`: the supremum of `D(p || .)` over the simplex for divergences that
/// are convex in their second argument.
pub fn attainable_max(divergence: &Divergence, p: &ProbVector) -> f64 {
    let m = p.len();
    let mut vertex = vec![0.0; m];
    let mut best = 0.0f64;
    for i in 0..m {
        vertex.fill(0.0);
        vertex[i] = 1.0;
        best = best.max(divergence.eval(p.values(), &vertex));
    }
    best
}

struct Boundary<'a> {
    p: &'a [f64],
    constraint: &'a Divergence,
    objective: &'a Divergence,
    epsilon: f64,
    lb: f64,
}

impl Boundary<'_> {
    /// First crossing of `D = eps` on the ray `p + t d`, with the objective there.
    /// Assumes `D(p || p + t d)` is non-decreasing in `t`, true for convex constraints.
    fn crossing(&self, d: &[f64], q: &mut [f64]) -> Option<f64> {
        let mut t_max = f64::INFINITY;
        for (&pi, &di) in self.p.iter().zip(d) {
            if di < 0.0 {
                t_max = t_max.min((pi - self.lb) / -di);
            }
        }
        if !(t_max > 0.0) || !t_max.is_finite() {
            return None;
        }
        let at = |t: f64, q: &mut [f64]| {
            for ((o, &pi), &di) in q.iter_mut().zip(self.p).zip(d) {
                *o = (pi + t * di).max(self.lb);
            }
            self.constraint.eval(self.p, q)
        };
        if !(at(t_max, q) >= self.epsilon) {
            return None;
        }
        let (mut lo, mut hi) = (0.0, t_max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if at(mid, q) >= self.epsilon {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        at(hi, q);
        let value = self.objective.eval(self.p, q);
        value.is_finite().then_some(value)
    }
}

/// Minimize the objective over `{q in simplex : D(p || q) >= eps}`.
///
/// The minimizer sits on `D = eps`. Rays from `p` are cut at their first crossing
/// and the objective is minimized over crossings: exhaustively over angles followed by
/// golden-section refinement when `m = 3`, by seeded directions and pattern search
/// otherwise.
pub fn minimize_divergence_floor(prob: &SimplexProblem) -> Result<SolveResult> {
    let (constraint, epsilon) = match &prob.constraint {
        Constraint::DivergenceFloor {
            divergence,
            epsilon,
        } => (divergence, *epsilon),
        _ => {
            return Err(Error::InvalidArgument(
                "minimize_divergence_floor needs a divergence-floor constraint".into(),
            ))
        }
    };
    let p = prob.p.values();
    let m = p.len();
    if constraint.eval(p, p) >= epsilon {
        return Ok(SolveResult {
            q_star: prob.p.clone(),
            objective_value: prob.objective.eval(p, p),
            constraint_residual: constraint.eval(p, p) - epsilon,
            iterations: 0,
            method: Method::Exact,
        });
    }
    let max = attainable_max(constraint, &prob.p);
    if epsilon > max {
        return Err(Error::EpsilonTooLarge { epsilon, max });
    }
    let boundary = Boundary {
        p,
        constraint,
        objective: &prob.objective,
        epsilon,
        lb: floor_for(&prob.objective),
    };
    let search = match m {
        1 => None,
        2 => search_two(&boundary),
        3 => search_angles(&boundary),
        _ => search_directions(&boundary),
    };
    let (d, evaluations) = search.ok_or_else(|| {
        Error::Infeasible(format!(
            "no simplex point with {}(p || q) >= {epsilon}",
            constraint.name()
        ))
    })?;
    let mut q = vec![0.0; m];
    let value = boundary
        .crossing(&d, &mut q)
        .ok_or(Error::ObjectiveInfinite)?;
    Ok(SolveResult {
        constraint_residual: constraint.eval(p, &q) - epsilon,
        q_star: finish_simplex(q)?,
        objective_value: value,
        iterations: evaluations,
        method: Method::BoundarySearch,
    })
}

fn search_two(b: &Boundary) -> Option<(Vec<f64>, usize)> {
    let mut q = [0.0; 2];
    [[1.0, -1.0], [-1.0, 1.0]]
        .into_iter()
        .filter_map(|d| b.crossing(&d, &mut q).map(|v| (d, v)))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(d, _)| (d.to_vec(), 2))
}

fn angle_direction(theta: f64) -> [f64; 3] {
    // orthonormal basis of the tangent plane sum d = 0
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let s6 = 1.0 / 6f64.sqrt();
    let (s, c) = theta.sin_cos();
    [c * s2 + s * s6, -c * s2 + s * s6, -2.0 * s * s6]
}

fn search_angles(b: &Boundary) -> Option<(Vec<f64>, usize)> {
    let n = BOUNDARY_SAMPLES;
    let step = std::f64::consts::TAU / n as f64;
    let mut q = [0.0; 3];
    let phi = |theta: f64, q: &mut [f64; 3]| {
        b.crossing(&angle_direction(theta), q)
            .unwrap_or(f64::INFINITY)
    };
    let values: Vec<f64> = (0..n).map(|k| phi(k as f64 * step, &mut q)).collect();
    let mut minima: Vec<usize> = (0..n)
        .filter(|&k| {
            let v = values[k];
            v.is_finite() && v <= values[(k + n - 1) % n] && v <= values[(k + 1) % n]
        })
        .collect();
    if minima.is_empty() {
        return None;
    }
    minima.sort_by(|&a, &c| values[a].total_cmp(&values[c]));
    minima.truncate(4);
    let mut evaluations = n;
    let mut best = (f64::INFINITY, 0.0);
    for k in minima {
        let center = k as f64 * step;
        let f = |theta: f64| {
            let mut q = [0.0; 3];
            phi(theta, &mut q)
        };
        let (theta, v) = golden_section(&f, center - step, center + step, 1e-13);
        evaluations += 80;
        let v = v.min(values[k]);
        let theta = if v == values[k] { center } else { theta };
        if v < best.0 {
            best = (v, theta);
        }
    }
    Some((angle_direction(best.1).to_vec(), evaluations))
}

fn normalize_tangent(d: &mut [f64]) -> bool {
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    for x in d.iter_mut() {
        *x -= mean;
    }
    let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return false;
    }
    for x in d.iter_mut() {
        *x /= norm;
    }
    true
}

fn search_directions(b: &Boundary) -> Option<(Vec<f64>, usize)> {
    let m = b.p.len();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut q = vec![0.0; m];
    let mut candidates: Vec<(f64, Vec<f64>)> = Vec::new();
    for _ in 0..RANDOM_DIRECTIONS {
        let mut d: Vec<f64> = (0..m).map(|_| rng.random::<f64>() - 0.5).collect();
        if !normalize_tangent(&mut d) {
            continue;
        }
        if let Some(v) = b.crossing(&d, &mut q) {
            candidates.push((v, d));
        }
    }
    // coordinate directions e_i - e_j are often optimal for piecewise-linear constraints
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let mut d = vec![0.0; m];
                d[i] = 1.0;
                d[j] = -1.0;
                normalize_tangent(&mut d);
                if let Some(v) = b.crossing(&d, &mut q) {
                    candidates.push((v, d));
                }
            }
        }
    }
    if candidates.is_empty() {
        return None;
    }
    candidates.sort_by(|a, c| a.0.total_cmp(&c.0));
    candidates.truncate(4);
    let mut evaluations = RANDOM_DIRECTIONS + m * m;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for (mut value, mut d) in candidates {
        let mut sigma = 0.25;
        while sigma > 1e-12 {
            let mut improved = false;
            for i in 0..m {
                for sign in [1.0, -1.0] {
                    let mut trial = d.clone();
                    trial[i] += sign * sigma;
                    if !normalize_tangent(&mut trial) {
                        continue;
                    }
                    evaluations += 1;
                    if let Some(v) = b.crossing(&trial, &mut q) {
                        if v < value {
                            value = v;
                            d = trial;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                sigma *= 0.5;
            }
        }
        if best.as_ref().is_none_or(|(bv, _)| value < *bv) {
            best = Some((value, d));
        }
    }
    best.map(|(_, d)| (d, evaluations))
}

// --------------------------------------------------------------------------------------
// Plug-in chain
// --------------------------------------------------------------------------------------

/// Values along `KL(p || q) >= KL(p || q_KL) >= D_g(p || q_KL) / C`.
#[derive(Clone, Debug, PartialEq)]
pub struct PluginChain {
    pub kl_at_qkl: f64,
    pub target_at_qkl: f64,
    /// `g''(1) + 1e-6`.
    pub constant: f64,
    pub q_kl: ProbVector,
}

impl PluginChain {
    /// `KL(p || q_KL) >= D_g(p || q_KL) / C - 1e-10`.
    pub fn holds(&self) -> bool {
        self.kl_at_qkl >= self.target_at_qkl / self.constant - 1e-10
    }
}

/// Solve `prob` with the KL objective and evaluate `D_g` at the KL minimizer.
pub fn kl_plugin_chain(gen: &BregmanGenerator, prob: &SimplexProblem) -> Result<PluginChain> {
    let kl = solve(&prob.with_objective(Divergence::KullbackLeibler))?;
    let target = Divergence::bregman(gen.clone()).eval(prob.p.values(), kl.q_star.values());
    Ok(PluginChain {
        kl_at_qkl: kl.objective_value,
        target_at_qkl: target,
        constant: gen.g_second(1.0) + JUST_ABOVE,
        q_kl: kl.q_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::{generator_by_name, BregmanGenerator, GENERATOR_NAMES};

    fn p0() -> ProbVector {
        ProbVector::simplex(vec![0.25, 0.5, 0.25]).unwrap()
    }

    fn y0() -> Vec<f64> {
        vec![-1.0, 0.0, 1.0]
    }

    fn fixed(obj: Divergence, c: f64) -> SimplexProblem {
        SimplexProblem::new(p0(), y0(), obj, Constraint::FixedExpectation(c)).unwrap()
    }

    fn floor(obj: Divergence, con: Divergence, eps: f64) -> SimplexProblem {
        SimplexProblem::new(
            p0(),
            y0(),
            obj,
            Constraint::DivergenceFloor {
                divergence: con,
                epsilon: eps,
            },
        )
        .unwrap()
    }

    fn objectives() -> Vec<Divergence> {
        let mut v = vec![Divergence::KullbackLeibler];
        v.extend(GENERATOR_NAMES.iter().map(|n| Divergence::by_name(n).unwrap()));
        v
    }

    #[test]
    fn projection_examples() {
        let q = project_to_simplex(&[0.25, 0.5, 0.25]).unwrap();
        assert_eq!(q.values(), &[0.25, 0.5, 0.25]);
        let q = project_to_simplex(&[1.0, 1.0, 1.0]).unwrap();
        for x in q.values() {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
        // threshold 0.1 on the two largest coordinates
        let q = project_to_simplex(&[0.9, 0.3, -0.1]).unwrap();
        let expect = [0.8, 0.2, 0.0];
        for (a, b) in q.values().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15, "{:?}", q.values());
        }
    }

    #[test]
    fn projection_satisfies_kkt() {
        let v = [0.9, 0.3, -0.1, 0.45];
        let q = project_to_simplex(&v).unwrap();
        let q = q.values();
        // v - q equals a common theta on the support and is <= theta off it
        let theta = (0..4).find(|&i| q[i] > 0.0).map(|i| v[i] - q[i]).unwrap();
        for i in 0..4 {
            if q[i] > 0.0 {
                assert!((v[i] - q[i] - theta).abs() < 1e-14);
            } else {
                assert!(v[i] <= theta + 1e-14);
            }
        }
    }

    #[test]
    fn expectation_projection_hits_target() {
        let mut out = [0.0; 3];
        project_expectation(&[0.2, 0.7, 0.1], &y0(), 0.35, 0.0, &mut out);
        assert!((dot(&y0(), &out) - 0.35).abs() < 1e-14);
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        project_expectation(&[0.2, 0.7, 0.1], &y0(), 0.35, 1e-10, &mut out);
        assert!(out.iter().all(|&x| x >= 1e-10));
    }

    #[test]
    fn unbiased_expectation_returns_p() {
        for obj in objectives() {
            let r = minimize_fixed_expectation(&fixed(obj, 0.0)).unwrap();
            assert_eq!(r.q_star, p0());
            assert_eq!(r.objective_value, 0.0);
        }
    }

    #[test]
    fn squared_error_at_half() {
        let r = minimize_fixed_expectation(&fixed(Divergence::by_name("squared").unwrap(), 0.5))
            .unwrap();
        let expect = [0.0, 0.5, 0.5];
        for (a, b) in r.q_star.values().iter().zip(expect) {
            assert!((a - b).abs() < 1e-9, "{:?}", r.q_star);
        }
        assert!((r.objective_value - 0.125).abs() < 1e-12);
        assert!(r.constraint_residual < 1e-12);
    }

    #[test]
    fn extreme_expectation_is_a_vertex() {
        let r = minimize_fixed_expectation(&fixed(Divergence::by_name("squared").unwrap(), 1.0))
            .unwrap();
        assert_eq!(r.q_star.values(), &[0.0, 0.0, 1.0]);
        assert!((r.objective_value - 0.875).abs() < 1e-15);
        assert_eq!(r.method, Method::Exact);
        assert_eq!(
            minimize_fixed_expectation(&fixed(Divergence::KullbackLeibler, 1.0)),
            Err(Error::ObjectiveInfinite)
        );
    }

    #[test]
    fn infeasible_expectation() {
        let err = SimplexProblem::new(
            p0(),
            y0(),
            Divergence::KullbackLeibler,
            Constraint::FixedExpectation(1.5),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn kl_fixed_expectation_matches_exponential_tilt() {
        // min KL(p || q) s.t. E_q Y = c has first-order conditions 1 - p_i/q_i = a + b y_i,
        // so q_i = p_i / (a + b y_i); solve for (a, b) by nested bisection independently.
        let c = 0.4;
        let p = [0.25, 0.5, 0.25];
        let q_of = |b: f64| {
            // normalization picks a given b: sum p_i/(a + b y_i) = 1
            let sum = |a: f64| p[0] / (a - b) + p[1] / a + p[2] / (a + b) - 1.0;
            let lo = b.abs() + 1e-15;
            let mut l = lo;
            let mut h = 10.0;
            for _ in 0..200 {
                let m = 0.5 * (l + h);
                if sum(m) > 0.0 {
                    l = m
                } else {
                    h = m
                }
            }
            let a = 0.5 * (l + h);
            [p[0] / (a - b), p[1] / a, p[2] / (a + b)]
        };
        let (mut bl, mut bh) = (-0.999, 0.0);
        for _ in 0..200 {
            let m = 0.5 * (bl + bh);
            let q = q_of(m);
            if q[2] - q[0] > c {
                bl = m
            } else {
                bh = m
            }
        }
        let q_ref = q_of(0.5 * (bl + bh));
        let r = minimize_fixed_expectation(&fixed(Divergence::KullbackLeibler, c)).unwrap();
        for (a, b) in r.q_star.values().iter().zip(q_ref) {
            assert!((a - b).abs() < 1e-8, "{:?} vs {:?}", r.q_star, q_ref);
        }
        assert!(r.constraint_residual < 1e-12);
    }

    #[test]
    fn fixed_expectation_curves_are_symmetric() {
        for obj in objectives() {
            for c in [0.3, 0.7, 0.9] {
                let a = minimize_fixed_expectation(&fixed(obj.clone(), c)).unwrap();
                let b = minimize_fixed_expectation(&fixed(obj.clone(), -c)).unwrap();
                assert!(
                    (a.objective_value - b.objective_value).abs() < 1e-10,
                    "{} at {c}: {} vs {}",
                    obj.name(),
                    a.objective_value,
                    b.objective_value
                );
            }
        }
    }

    #[test]
    fn floor_zero_is_trivial() {
        let r = minimize_divergence_floor(&floor(
            Divergence::KullbackLeibler,
            Divergence::TotalVariation,
            0.0,
        ))
        .unwrap();
        assert_eq!(r.q_star, p0());
        assert_eq!(r.objective_value, 0.0);
    }

    #[test]
    fn floor_squared_under_tv_spreads_mass() {
        // With TV = eps and squared error, moving eps/2 out of k coordinates into the other
        // m - k costs (eps/2)^2 (1/k + 1/(m - k)), smallest at k = 1 or 2 for m = 3.
        let eps = 0.2;
        let r = minimize_divergence_floor(&floor(
            Divergence::by_name("squared").unwrap(),
            Divergence::TotalVariation,
            eps,
        ))
        .unwrap();
        assert!((r.objective_value - 1.5 * (eps / 2.0f64).powi(2)).abs() < 1e-9, "{}", r.objective_value);
        assert!(r.constraint_residual >= 0.0 && r.constraint_residual < 1e-8);
    }

    #[test]
    fn floor_constraint_is_active() {
        for con in [Divergence::TotalVariation, Divergence::ChiSquare] {
            for eps in [1e-3, 0.05, 0.5] {
                let r = minimize_divergence_floor(&floor(Divergence::KullbackLeibler, con.clone(), eps))
                    .unwrap();
                assert!(r.constraint_residual >= 0.0, "{}", r.constraint_residual);
                assert!(r.constraint_residual < 1e-8, "{}", r.constraint_residual);
            }
        }
    }

    #[test]
    fn floor_rejects_unattainable_epsilon() {
        let err = minimize_divergence_floor(&floor(
            Divergence::KullbackLeibler,
            Divergence::TotalVariation,
            1.6,
        ))
        .unwrap_err();
        assert!(matches!(err, Error::EpsilonTooLarge { .. }));
        assert_eq!(attainable_max(&Divergence::TotalVariation, &p0()), 1.5);
        assert_eq!(attainable_max(&Divergence::ChiSquare, &p0()), f64::INFINITY);
    }

    #[test]
    fn floor_in_four_dimensions() {
        let p = ProbVector::simplex(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let prob = SimplexProblem::new(
            p,
            vec![0.0, 1.0, 2.0, 3.0],
            Divergence::by_name("squared").unwrap(),
            Constraint::DivergenceFloor {
                divergence: Divergence::TotalVariation,
                epsilon: 0.2,
            },
        )
        .unwrap();
        let r = minimize_divergence_floor(&prob).unwrap();
        // k = 2: (0.1)^2 (1/2 + 1/2)
        assert!((r.objective_value - 0.01).abs() < 1e-8, "{}", r.objective_value);
    }

    #[test]
    fn plugin_chain_holds() {
        for name in GENERATOR_NAMES {
            let gen = generator_by_name(name).unwrap();
            let chain = kl_plugin_chain(&gen, &fixed(Divergence::KullbackLeibler, 0.5)).unwrap();
            assert!(chain.holds(), "{name}: {chain:?}");
        }
        let chain = kl_plugin_chain(
            &BregmanGenerator::squared(),
            &floor(Divergence::KullbackLeibler, Divergence::TotalVariation, 0.0),
        )
        .unwrap();
        assert_eq!((chain.kl_at_qkl, chain.target_at_qkl), (0.0, 0.0));
    }
}
