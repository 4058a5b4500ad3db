//! Brute-force references: barycentric lattice scans and exhaustive ratio grids.
//!
//! Nothing here shares code with the solvers in [`crate::optimize`] beyond evaluating
//! the divergences themselves. Results are serialized as JSON Lines fixtures.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::{Divergence, ProbVector};
use crate::error::{Error, Result};
use crate::optimize::{Constraint, SimplexProblem};

/// Largest dimension the lattice scan accepts.
pub const MAX_LATTICE_DIMENSION: usize = 4;
/// Pairs whose reference divergence falls below this are skipped by [`grid_sup_ratio`].
pub const REFERENCE_FLOOR: f64 = 1e-14;
/// Candidates kept between zoom levels.
const ZOOM_CANDIDATES: usize = 4;
// coarse candidates are spread out so separate local minima each get refined
const COARSE_CANDIDATES: usize = 8;
const MAX_RESCANS: usize = 200;
const COARSE_SEPARATION: f64 = 20.0;
/// Zoom window half-width in units of the previous step. Ill-conditioned objectives
/// shift the best in-band point along the constraint by several steps per level.
const ZOOM_HALF_WIDTH: f64 = 5.0;

/// Best lattice point found by a scan.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleMin {
    pub q: ProbVector,
    pub value: f64,
    pub resolution: f64,
    /// Twice the largest objective change to a lattice neighbour of `q`. Halving the
    /// resolution cannot raise the best value by more than this.
    pub lipschitz_slack: f64,
    pub points_scanned: u64,
}

fn feasible(prob: &SimplexProblem, q: &[f64], band: f64) -> bool {
    let r = prob.constraint_residual(q);
    match prob.constraint {
        Constraint::FixedExpectation(_) => r.abs() <= band,
        Constraint::DivergenceFloor { .. } => r >= 0.0,
    }
}

/// Visit every composition of `n` into `parts` non-negative integers.
fn compositions(n: usize, parts: usize, prefix: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if parts == 1 {
        prefix.push(n);
        visit(prefix);
        prefix.pop();
        return;
    }
    for k in 0..=n {
        prefix.push(k);
        compositions(n - k, parts - 1, prefix, visit);
        prefix.pop();
    }
}

#[derive(Clone)]
struct Best {
    value: f64,
    q: Vec<f64>,
    scanned: u64,
}

impl Best {
    fn none() -> Self {
        Self {
            value: f64::INFINITY,
            q: Vec::new(),
            scanned: 0,
        }
    }

    fn offer(&mut self, value: f64, q: &[f64]) {
        self.scanned += 1;
        // ties keep the earlier lattice point, so scans are order-stable
        if value < self.value {
            self.value = value;
            self.q = q.to_vec();
        }
    }

    fn merge(mut self, other: Best) -> Best {
        self.scanned += other.scanned;
        if other.value < self.value {
            self.value = other.value;
            self.q = other.q;
        }
        self
    }
}

/// Exhaustive scan of `{k / N : sum k = N}` with `N = round(1 / resolution)`.
///
/// Fixed-expectation constraints accept `|E_q(Y) - c| <= resolution`; divergence floors
/// accept `D(p || q) >= eps` exactly.
pub fn grid_min_constrained(prob: &SimplexProblem, resolution: f64) -> Result<OracleMin> {
    let m = prob.dimension();
    if m > MAX_LATTICE_DIMENSION {
        return Err(Error::DimensionTooLarge(m));
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "resolution must lie in (0, 1], got {resolution}"
        )));
    }
    let n = (1.0 / resolution).round() as usize;
    let step = 1.0 / n as f64;
    let band = resolution;
    let p = prob.p.values();
    let best = (0..=n)
        .into_par_iter()
        .map(|k0| {
            let mut best = Best::none();
            let mut q = vec![0.0; m];
            let mut visit = |ks: &[usize]| {
                q[0] = k0 as f64 * step;
                for (qi, &k) in q[1..].iter_mut().zip(ks) {
                    *qi = k as f64 * step;
                }
                if feasible(prob, &q, band) {
                    best.offer(prob.objective.eval(p, &q), &q);
                }
            };
            if m == 1 {
                if k0 == n {
                    visit(&[]);
                }
            } else {
                compositions(n - k0, m - 1, &mut Vec::with_capacity(m), &mut visit);
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Best::none(), Best::merge);
    finish(prob, best, step)
}

fn finish(prob: &SimplexProblem, best: Best, step: f64) -> Result<OracleMin> {
    if !best.value.is_finite() {
        return Err(Error::Infeasible(
            "no lattice point satisfies the constraint with a finite objective".into(),
        ));
    }
    let slack = 2.0 * neighbour_change(prob, &best.q, step);
    let scanned = best.scanned;
    let value = best.value;
    let q = ProbVector::simplex(renormalize(best.q))?;
    Ok(OracleMin {
        q,
        value,
        resolution: step,
        lipschitz_slack: slack,
        points_scanned: scanned,
    })
}

fn renormalize(mut q: Vec<f64>) -> Vec<f64> {
    let s: f64 = q.iter().sum();
    for x in q.iter_mut() {
        *x /= s;
    }
    q
}

/// Largest `|f(q') - f(q)|` over lattice neighbours `q' = q + step (e_i - e_j)`.
fn neighbour_change(prob: &SimplexProblem, q: &[f64], step: f64) -> f64 {
    let p = prob.p.values();
    let f0 = prob.objective.eval(p, q);
    let m = q.len();
    let mut worst = 0.0f64;
    let mut probe = q.to_vec();
    for i in 0..m {
        for j in 0..m {
            if i == j || q[j] < step {
                continue;
            }
            probe[i] += step;
            probe[j] -= step;
            let f = prob.objective.eval(p, &probe);
            if f.is_finite() {
                worst = worst.max((f - f0).abs());
            }
            probe[i] = q[i];
            probe[j] = q[j];
        }
    }
    worst
}

/// Lattice scan at `resolution`, then repeated local scans on windows of half-width
/// `5h` with step `h / 10` around the best few candidates until the step reaches
/// `final_step`. Under a fixed expectation the local scans stay on the constraint:
/// two coordinates are solved from `sum q = 1` and `y.q = c` given the others.
pub fn grid_min_refined(prob: &SimplexProblem, resolution: f64, final_step: f64) -> Result<OracleMin> {
    let coarse = grid_min_constrained(prob, resolution)?;
    let m = prob.dimension();
    let p = prob.p.values();
    let chart = Chart::new(prob);
    let mut scanned = coarse.points_scanned;
    let mut centres = coarse_candidates(prob, resolution);
    let mut h = coarse.resolution;
    let mut best = Best {
        value: coarse.value,
        q: coarse.q.values().to_vec(),
        scanned: 0,
    };
    while h > final_step * 1.000_001 && m > 1 && !centres.is_empty() {
        let step = h / 10.0;
        let mut level_best = f64::INFINITY;
        // rescan at this step until the best point stops improving
        for _ in 0..MAX_RESCANS {
            let mut found: Vec<(f64, Vec<f64>)> = Vec::new();
            for centre in &centres {
                let local = scan_window(prob, &chart, centre, ZOOM_HALF_WIDTH * h, step);
                scanned += local.len() as u64;
                found.extend(local);
            }
            found.sort_by(|a, b| a.0.total_cmp(&b.0));
            let next = distinct(found, 1.5 * step, ZOOM_CANDIDATES);
            let Some(c) = next.first() else { break };
            let value = prob.objective.eval(p, c);
            if value >= level_best {
                break;
            }
            level_best = value;
            // the coarse band admits infeasible points, so the level's best replaces
            // rather than competes
            best = Best {
                value,
                q: c.clone(),
                scanned: 0,
            };
            centres = next;
        }
        h = step;
    }
    if let Constraint::DivergenceFloor { .. } = prob.constraint {
        if m > 2 {
            let mut starts = centres;
            starts.push(best.q.clone());
            let (sliced, n) = slice_refine(prob, &starts, final_step);
            scanned += n;
            if let Some(s) = sliced.filter(|s| s.value < best.value) {
                best = s;
            }
        }
    }
    best.scanned = scanned;
    finish(prob, best, h)
}

fn coarse_candidates(prob: &SimplexProblem, resolution: f64) -> Vec<Vec<f64>> {
    // second pass keeping the best lattice point of a few separated regions
    let m = prob.dimension();
    let n = (1.0 / resolution).round() as usize;
    let step = 1.0 / n as f64;
    let p = prob.p.values();
    let mut all: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut q = vec![0.0; m];
    let mut visit = |ks: &[usize]| {
        for (qi, &k) in q.iter_mut().zip(ks) {
            *qi = k as f64 * step;
        }
        if feasible(prob, &q, resolution) {
            let v = prob.objective.eval(p, &q);
            if v.is_finite() {
                all.push((v, q.clone()));
            }
        }
    };
    compositions(n, m, &mut Vec::with_capacity(m), &mut visit);
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    distinct(all, COARSE_SEPARATION * step, COARSE_CANDIDATES)
}

fn distinct(sorted: Vec<(f64, Vec<f64>)>, min_gap: f64, keep: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for (_, q) in sorted {
        let far = out.iter().all(|o| {
            o.iter()
                .zip(&q)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                > min_gap
        });
        if far {
            out.push(q);
            if out.len() == keep {
                break;
            }
        }
    }
    out
}

/// Which coordinates a local scan moves and how the rest are recovered.
enum Chart {
    /// Last coordinate from `sum q = 1`.
    Simplex,
    /// Coordinates `j, k` from `sum q = 1` and `y.q = c`.
    Expectation { j: usize, k: usize, c: f64 },
}

impl Chart {
    fn new(prob: &SimplexProblem) -> Self {
        let y = &prob.support;
        match prob.constraint {
            Constraint::FixedExpectation(c) => {
                let mut pair = (0, 0);
                let mut gap = -1.0;
                for a in 0..y.len() {
                    for b in a + 1..y.len() {
                        if (y[a] - y[b]).abs() > gap {
                            gap = (y[a] - y[b]).abs();
                            pair = (a, b);
                        }
                    }
                }
                if gap > 0.0 {
                    Chart::Expectation {
                        j: pair.0,
                        k: pair.1,
                        c,
                    }
                } else {
                    Chart::Simplex
                }
            }
            Constraint::DivergenceFloor { .. } => Chart::Simplex,
        }
    }

    fn free(&self, m: usize) -> Vec<usize> {
        match *self {
            Chart::Simplex => (0..m - 1).collect(),
            Chart::Expectation { j, k, .. } => (0..m).filter(|&i| i != j && i != k).collect(),
        }
    }

    /// Fill the dependent coordinates of `q`; false if one is negative.
    fn complete(&self, q: &mut [f64], y: &[f64], free: &[usize]) -> bool {
        let mass: f64 = free.iter().map(|&i| q[i]).sum();
        match *self {
            Chart::Simplex => {
                let last = q.len() - 1;
                q[last] = 1.0 - mass;
                q[last] >= 0.0
            }
            Chart::Expectation { j, k, c } => {
                let a = 1.0 - mass;
                let b = c - free.iter().map(|&i| y[i] * q[i]).sum::<f64>();
                q[j] = (b - y[k] * a) / (y[j] - y[k]);
                q[k] = a - q[j];
                q[j] >= 0.0 && q[k] >= 0.0
            }
        }
    }
}

fn scan_window(
    prob: &SimplexProblem,
    chart: &Chart,
    centre: &[f64],
    half_width: f64,
    step: f64,
) -> Vec<(f64, Vec<f64>)> {
    let m = centre.len();
    let free = chart.free(m);
    let k = (half_width / step).round() as i64;
    let p = prob.p.values();
    let mut out = Vec::new();
    let mut offsets = vec![-k; free.len()];
    let mut q = centre.to_vec();
    loop {
        let mut ok = true;
        for (&i, &o) in free.iter().zip(&offsets) {
            q[i] = centre[i] + o as f64 * step;
            if q[i] < 0.0 {
                ok = false;
            }
        }
        if ok && chart.complete(&mut q, &prob.support, &free) && in_region(prob, &q) {
            let v = prob.objective.eval(p, &q);
            if v.is_finite() {
                out.push((v, q.clone()));
            }
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == free.len() {
                return out;
            }
            offsets[i] += 1;
            if offsets[i] <= k {
                break;
            }
            offsets[i] = -k;
            i += 1;
        }
    }
}

fn in_region(prob: &SimplexProblem, q: &[f64]) -> bool {
    match prob.constraint {
        // exact by construction
        Constraint::FixedExpectation(_) => prob.constraint_residual(q).abs() <= 1e-9,
        Constraint::DivergenceFloor { .. } => prob.constraint_residual(q) >= 0.0,
    }
}

// --------------------------------------------------------------------------------------
// Boundary slices for divergence floors
// --------------------------------------------------------------------------------------

// Fix every coordinate but a pair `(a, b)`; along the remaining segment a convex
// constraint divergence is convex, so the feasible part is at most two intervals whose
// inner ends are found by bisection.

const SLICE_TOLERANCE: f64 = 1e-13;
const SLICE_START_STEP: f64 = 1e-3;
const SLICE_HALF_WIDTH: f64 = 0.05;

/// Bisection between a feasible and an infeasible parameter; returns a feasible one.
fn feasible_root(g: &dyn Fn(f64) -> f64, mut ok: f64, mut bad: f64) -> f64 {
    for _ in 0..200 {
        if (ok - bad).abs() <= SLICE_TOLERANCE {
            break;
        }
        let mid = 0.5 * (ok + bad);
        if g(mid) >= 0.0 {
            ok = mid;
        } else {
            bad = mid;
        }
    }
    ok
}

/// Best feasible point on the segment through `q` moving mass between `a` and `b`.
fn slice_min(prob: &SimplexProblem, q: &[f64], a: usize, b: usize) -> Option<(f64, Vec<f64>)> {
    let total = q[a] + q[b];
    if total <= 0.0 {
        return None;
    }
    let p = prob.p.values();
    let at = |s: f64| {
        let mut x = q.to_vec();
        x[a] = s;
        x[b] = total - s;
        x
    };
    let g = |s: f64| prob.constraint_residual(&at(s));
    let f = |s: f64| prob.objective.eval(p, &at(s));
    let mut params = Vec::with_capacity(3);
    let (s_d, g_d) = crate::numeric::golden_section(&g, 0.0, total, SLICE_TOLERANCE);
    if g_d < 0.0 {
        if g(0.0) >= 0.0 {
            params.push(feasible_root(&g, 0.0, s_d));
        }
        if g(total) >= 0.0 {
            params.push(feasible_root(&g, total, s_d));
        }
    }
    let (s_o, _) = crate::numeric::golden_section(&f, 0.0, total, SLICE_TOLERANCE);
    if g(s_o) >= 0.0 {
        params.push(s_o);
    }
    params
        .into_iter()
        .filter(|&s| g(s) >= 0.0)
        .map(|s| (f(s), at(s)))
        .filter(|(v, _)| v.is_finite())
        .min_by(|x, y| x.0.total_cmp(&y.0))
}

/// Zoom over the fixed coordinates of every pair chart, starting from `centres`.
fn slice_refine(prob: &SimplexProblem, centres: &[Vec<f64>], final_step: f64) -> (Option<Best>, u64) {
    let m = prob.dimension();
    let mut scanned = 0u64;
    let mut best: Option<Best> = None;
    for a in 0..m {
        for b in a + 1..m {
            let fixed: Vec<usize> = (0..m).filter(|&i| i != a && i != b).collect();
            let mut cs: Vec<Vec<f64>> = centres.to_vec();
            let mut step = SLICE_START_STEP;
            let mut half = SLICE_HALF_WIDTH;
            while !cs.is_empty() {
                let mut level_best = f64::INFINITY;
                for _ in 0..MAX_RESCANS {
                    let mut found = Vec::new();
                    for c in &cs {
                        found.extend(slice_window(prob, c, &fixed, a, b, half, step));
                    }
                    scanned += found.len() as u64;
                    found.sort_by(|x, y| x.0.total_cmp(&y.0));
                    let next = distinct(found, 1.5 * step, ZOOM_CANDIDATES);
                    let Some(first) = next.first() else { break };
                    let value = prob.objective.eval(prob.p.values(), first);
                    if value >= level_best {
                        break;
                    }
                    level_best = value;
                    cs = next;
                }
                if level_best < best.as_ref().map_or(f64::INFINITY, |b| b.value) {
                    best = Some(Best {
                        value: level_best,
                        q: cs[0].clone(),
                        scanned: 0,
                    });
                }
                if fixed.is_empty() || step <= final_step * 1.000_001 {
                    break;
                }
                half = ZOOM_HALF_WIDTH * step;
                step /= 10.0;
            }
        }
    }
    (best, scanned)
}

fn slice_window(
    prob: &SimplexProblem,
    centre: &[f64],
    fixed: &[usize],
    a: usize,
    b: usize,
    half_width: f64,
    step: f64,
) -> Vec<(f64, Vec<f64>)> {
    let k = (half_width / step).round() as i64;
    let mut out = Vec::new();
    let mut offsets = vec![-k; fixed.len()];
    let mut q = centre.to_vec();
    loop {
        let mut mass = 0.0;
        let mut ok = true;
        for (&i, &o) in fixed.iter().zip(&offsets) {
            q[i] = centre[i] + o as f64 * step;
            ok &= q[i] >= 0.0;
            mass += q[i];
        }
        if ok && mass <= 1.0 {
            // split the remaining mass evenly; the slice search moves it
            q[a] = 0.5 * (1.0 - mass);
            q[b] = 0.5 * (1.0 - mass);
            if let Some(hit) = slice_min(prob, &q, a, b) {
                out.push(hit);
            }
        }
        let mut i = 0;
        loop {
            if i == fixed.len() {
                return out;
            }
            offsets[i] += 1;
            if offsets[i] <= k {
                break;
            }
            offsets[i] = -k;
            i += 1;
        }
    }
}

/// Largest `target / reference` on the interior grid `{i / (n + 1)}^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupRatio {
    pub ratio: f64,
    pub p: f64,
    pub q: f64,
}

/// Exhaustive `sup target(p, q) / reference(p, q)` over interior grid pairs, skipping
/// pairs with `reference < 1e-14`.
pub fn grid_sup_ratio(
    target: &dyn Fn(f64, f64) -> f64,
    reference: &dyn Fn(f64, f64) -> f64,
    grid_n: usize,
) -> SupRatio {
    let mut best = SupRatio {
        ratio: f64::NEG_INFINITY,
        p: f64::NAN,
        q: f64::NAN,
    };
    let denom = (grid_n + 1) as f64;
    for i in 1..=grid_n {
        let p = i as f64 / denom;
        for j in 1..=grid_n {
            let q = j as f64 / denom;
            let r = reference(p, q);
            if !(r >= REFERENCE_FLOOR) || !r.is_finite() {
                continue;
            }
            let ratio = target(p, q) / r;
            if ratio > best.ratio {
                best = SupRatio { ratio, p, q };
            }
        }
    }
    best
}

// --------------------------------------------------------------------------------------
// Fixtures
// --------------------------------------------------------------------------------------

/// Constraint as stored in a fixture, with divergences referred to by name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FixtureConstraint {
    FixedExpectation { c: f64 },
    DivergenceFloor { divergence: String, epsilon: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureInputs {
    pub p: Vec<f64>,
    pub support: Vec<f64>,
    pub objective: String,
    pub constraint: FixtureConstraint,
}

fn divergence_named(name: &str) -> Result<Divergence> {
    Divergence::by_name(name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown divergence `{name}`")))
}

impl FixtureInputs {
    pub fn to_problem(&self) -> Result<SimplexProblem> {
        let constraint = match &self.constraint {
            FixtureConstraint::FixedExpectation { c } => Constraint::FixedExpectation(*c),
            FixtureConstraint::DivergenceFloor {
                divergence,
                epsilon,
            } => Constraint::DivergenceFloor {
                divergence: divergence_named(divergence)?,
                epsilon: *epsilon,
            },
        };
        SimplexProblem::new(
            ProbVector::simplex(self.p.clone())?,
            self.support.clone(),
            divergence_named(&self.objective)?,
            constraint,
        )
    }
}

/// One reference minimum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleFixture {
    pub description: String,
    pub inputs: FixtureInputs,
    pub expected_value: f64,
    pub expected_q: Vec<f64>,
    /// Coarse lattice step.
    pub resolution: f64,
    /// Last zoom step.
    pub final_step: f64,
    /// Slack of the value at the final step, see [`OracleMin::lipschitz_slack`].
    pub lipschitz_slack: f64,
    pub tolerance: f64,
}

/// Agreement tolerance recorded in generated fixtures.
pub const FIXTURE_TOLERANCE: f64 = 1e-5;
pub const FIXTURE_RESOLUTION: f64 = 1e-3;
pub const FIXTURE_FINAL_STEP: f64 = 1e-9;

/// The shipped fixture set for `p = (1/4, 1/2, 1/4)`, `y = (-1, 0, 1)`.
pub fn fixture_cases() -> Vec<(String, FixtureInputs)> {
    let p = vec![0.25, 0.5, 0.25];
    let y = vec![-1.0, 0.0, 1.0];
    let mut out = Vec::new();
    for objective in ["kl", "squared", "power-1.5"] {
        for c in [0.25, 0.5, 0.9] {
            out.push((
                format!("fixed expectation c={c}, objective {objective}"),
                FixtureInputs {
                    p: p.clone(),
                    support: y.clone(),
                    objective: objective.into(),
                    constraint: FixtureConstraint::FixedExpectation { c },
                },
            ));
        }
    }
    for (divergence, epsilons) in [("tv", [0.01, 0.2, 0.8]), ("chi2", [0.01, 0.1, 0.8])] {
        for objective in ["kl", "squared"] {
            for epsilon in epsilons {
                out.push((
                    format!("{divergence} floor eps={epsilon}, objective {objective}"),
                    FixtureInputs {
                        p: p.clone(),
                        support: y.clone(),
                        objective: objective.into(),
                        constraint: FixtureConstraint::DivergenceFloor {
                            divergence: divergence.into(),
                            epsilon,
                        },
                    },
                ));
            }
        }
    }
    out
}

/// Run the refined oracle on every case.
pub fn generate_fixtures(resolution: f64, final_step: f64) -> Result<Vec<OracleFixture>> {
    fixture_cases()
        .into_par_iter()
        .map(|(description, inputs)| {
            let prob = inputs.to_problem()?;
            let found = grid_min_refined(&prob, resolution, final_step)?;
            Ok(OracleFixture {
                description,
                inputs,
                expected_value: found.value,
                expected_q: found.q.values().to_vec(),
                resolution,
                final_step: found.resolution,
                lipschitz_slack: found.lipschitz_slack,
                tolerance: FIXTURE_TOLERANCE.max(found.lipschitz_slack),
            })
        })
        .collect()
}

/// Write fixtures as JSON Lines.
pub fn write_fixtures(path: &Path, fixtures: &[OracleFixture]) -> Result<()> {
    let mut out = Vec::new();
    for f in fixtures {
        serde_json::to_writer(&mut out, f).map_err(|e| Error::Fixture(e.to_string()))?;
        out.push(b'\n');
    }
    let mut file = fs::File::create(path)
        .map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))?;
    file.write_all(&out)
        .map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))
}

/// Read JSON Lines fixtures; blank lines and lines starting with `#` are skipped.
pub fn load_fixtures(path: &Path) -> Result<Vec<OracleFixture>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Error::Fixture(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::kl_binary;
    use crate::divergence::bregman_binary;
    use crate::loss::{boosting, quadratic};

    fn problem(objective: &str, constraint: Constraint) -> SimplexProblem {
        SimplexProblem::new(
            ProbVector::simplex(vec![0.25, 0.5, 0.25]).unwrap(),
            vec![-1.0, 0.0, 1.0],
            Divergence::by_name(objective).unwrap(),
            constraint,
        )
        .unwrap()
    }

    #[test]
    fn unbiased_point_is_on_the_lattice() {
        for obj in ["kl", "squared", "xlogx", "power-1.5"] {
            let r = grid_min_constrained(&problem(obj, Constraint::FixedExpectation(0.0)), 1e-2)
                .unwrap();
            assert!(r.value <= 1e-6, "{obj}: {}", r.value);
        }
    }

    #[test]
    fn squared_error_converges_to_kkt_value() {
        let prob = problem("squared", Constraint::FixedExpectation(0.5));
        let coarse = grid_min_constrained(&prob, 1e-2).unwrap();
        assert!((coarse.value - 0.125).abs() < 2e-2, "{}", coarse.value);
        let fine = grid_min_refined(&prob, 1e-2, 1e-9).unwrap();
        assert!((fine.value - 0.125).abs() < 1e-8, "{}", fine.value);
    }

    #[test]
    fn out_of_range_expectation_is_infeasible() {
        let prob = SimplexProblem {
            constraint: Constraint::FixedExpectation(1.5),
            ..problem("squared", Constraint::FixedExpectation(0.0))
        };
        assert!(matches!(
            grid_min_constrained(&prob, 1e-2),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn halving_resolution_respects_slack() {
        let prob = problem("kl", Constraint::FixedExpectation(0.3));
        let mut res = 0.1;
        while res > 2e-3 {
            let a = grid_min_constrained(&prob, res).unwrap();
            let b = grid_min_constrained(&prob, res / 2.0).unwrap();
            assert!(b.value <= a.value + a.lipschitz_slack, "{res}");
            res /= 2.0;
        }
    }

    #[test]
    fn rejects_large_dimension() {
        let prob = SimplexProblem::new(
            ProbVector::simplex(vec![0.2; 5]).unwrap(),
            vec![0.0; 5],
            Divergence::KullbackLeibler,
            Constraint::FixedExpectation(0.0),
        )
        .unwrap();
        assert_eq!(
            grid_min_constrained(&prob, 0.1),
            Err(Error::DimensionTooLarge(5))
        );
    }

    #[test]
    fn sup_ratio_examples() {
        let kl = |p: f64, q: f64| kl_binary(p, q);
        let same = grid_sup_ratio(&kl, &kl, 50);
        assert!((same.ratio - 1.0).abs() < 1e-12);
        let l = quadratic();
        let quad = |p: f64, q: f64| bregman_binary(&l, p, q);
        let r = grid_sup_ratio(&quad, &kl, 200);
        assert!((r.ratio - 0.5).abs() < 0.02, "{r:?}");
        let b = boosting();
        let boost = |p: f64, q: f64| bregman_binary(&b, p, q);
        assert!(grid_sup_ratio(&boost, &kl, 100).ratio.is_finite());
    }

    #[test]
    fn fixture_round_trip() {
        let dir = std::env::temp_dir().join(format!("oracle-rt-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("f.jsonl");
        let (description, inputs) = fixture_cases().remove(0);
        let fx = OracleFixture {
            description,
            inputs,
            expected_value: 0.1,
            expected_q: vec![0.2, 0.3, 0.5],
            resolution: 1e-3,
            final_step: 1e-9,
            lipschitz_slack: 1e-10,
            tolerance: 1e-5,
        };
        write_fixtures(&path, std::slice::from_ref(&fx)).unwrap();
        assert_eq!(load_fixtures(&path).unwrap(), vec![fx]);
        fs::remove_dir_all(&dir).unwrap();
    }
}
