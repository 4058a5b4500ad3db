//! Normalization constants and numerical verification of the KL-domination bounds.
//!
//! Binary bounds are scanned exhaustively on the interior grid `{i / (n + 1)}^2`.
//! Multi-dimensional bounds use seeded Monte-Carlo pairs (uniform on the cube or
//! Dirichlet(1) on the simplex) plus a deterministic 11-point-per-axis lattice for
//! `m <= 3`. Counterexamples are pairs with `C * KL - D < -1e-12`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::{bregman_binary, kl_binary, kl_slices, BregmanGenerator, SeparableBregman};
use crate::error::{Error, Result};
use crate::loss::ProperLoss;

/// Slack below which `C * KL - D` counts as a violation.
pub const VIOLATION_TOLERANCE: f64 = 1e-12;
/// Pairs where both divergences fall below this are left out of ratio estimates.
pub const RATIO_FLOOR: f64 = 1e-14;
/// Margin added to a strict threshold to obtain a licensed constant.
pub const JUST_ABOVE: f64 = 1e-6;
/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 42;

const CHUNK: usize = 4096;

/// Where the largest ratio was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Location {
    None,
    Binary { p: f64, q: f64 },
    Vector { p: Vec<f64>, q: Vec<f64> },
}

/// Outcome of a bound verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub constant_used: f64,
    pub grid_spec: String,
    pub violation_count: u64,
    /// `sup D_target / D_KL` over the scanned pairs.
    pub worst_ratio: f64,
    pub worst_location: Location,
    pub pairs_checked: u64,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

#[derive(Debug, Clone)]
struct Partial {
    violations: u64,
    checked: u64,
    worst: f64,
    location: Location,
}

impl Partial {
    fn empty() -> Self {
        Self {
            violations: 0,
            checked: 0,
            worst: f64::NEG_INFINITY,
            location: Location::None,
        }
    }

    /// Record one pair; `loc` is only built when it becomes the new worst.
    fn record(&mut self, c: f64, kl: f64, target: f64, loc: impl FnOnce() -> Location) {
        if !kl.is_finite() {
            // bound holds vacuously
            return;
        }
        self.checked += 1;
        if c * kl - target < -VIOLATION_TOLERANCE {
            self.violations += 1;
        }
        if kl < RATIO_FLOOR && target < RATIO_FLOOR {
            return;
        }
        let ratio = if kl > 0.0 {
            target / kl
        } else {
            f64::INFINITY
        };
        if ratio > self.worst {
            self.worst = ratio;
            self.location = loc();
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        self.violations += other.violations;
        self.checked += other.checked;
        if other.worst > self.worst {
            self.worst = other.worst;
            self.location = other.location;
        }
        self
    }

    fn into_report(self, c: f64, grid_spec: String) -> BoundReport {
        BoundReport {
            constant_used: c,
            grid_spec,
            violation_count: self.violations,
            worst_ratio: if self.worst == f64::NEG_INFINITY {
                0.0
            } else {
                self.worst
            },
            worst_location: self.location,
            pairs_checked: self.checked,
        }
    }
}

fn interior(i: usize, n: usize) -> f64 {
    i as f64 / (n + 1) as f64
}

// --------------------------------------------------------------------------------------
// Thresholds
// --------------------------------------------------------------------------------------

/// `(1/2) w(1/2) = -(1/2) G''(1/2)`; every strictly larger constant is licensed for
/// smooth proper losses that are convex in `q`.
pub fn min_admissible_c_binary(loss: &ProperLoss) -> Result<f64> {
    Ok(0.5 * loss.weight(0.5)?)
}

/// `g''(1)`.
pub fn min_admissible_c_separable(gen: &BregmanGenerator) -> f64 {
    gen.g_second(1.0)
}

// --------------------------------------------------------------------------------------
// Binary verification
// --------------------------------------------------------------------------------------

/// Scan `C * KL(p || q) - D_{-G}(p || q)` over the `grid_n x grid_n` interior grid.
pub fn verify_theorem1(loss: &ProperLoss, c: f64, grid_n: usize) -> Result<BoundReport> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("constant must be positive, got {c}")));
    }
    if grid_n < 10 {
        return Err(Error::InvalidArgument(format!("grid_n must be >= 10, got {grid_n}")));
    }
    let partial = (1..=grid_n)
        .into_par_iter()
        .map(|i| {
            let p = interior(i, grid_n);
            let mut acc = Partial::empty();
            for j in 1..=grid_n {
                if i == j {
                    continue;
                }
                let q = interior(j, grid_n);
                acc.record(c, kl_binary(p, q), bregman_binary(loss, p, q), || {
                    Location::Binary { p, q }
                });
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Partial::empty(), Partial::merge);
    Ok(partial.into_report(c, format!("interior {grid_n}x{grid_n}")))
}

/// Largest `D_target(p, q) / KL(p, q)` on the interior grid, `p != q`: the smallest
/// constant that could work on that grid.
pub fn estimate_c_min(target: &(dyn Fn(f64, f64) -> f64 + Sync), grid_n: usize) -> f64 {
    (1..=grid_n)
        .into_par_iter()
        .map(|i| {
            let p = interior(i, grid_n);
            let mut best = f64::NEG_INFINITY;
            for j in (1..=grid_n).filter(|&j| j != i) {
                let q = interior(j, grid_n);
                let kl = kl_binary(p, q);
                let d = target(p, q);
                if kl < RATIO_FLOOR && d < RATIO_FLOOR {
                    continue;
                }
                best = best.max(d / kl);
            }
            best
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

// --------------------------------------------------------------------------------------
// Vector verification
// --------------------------------------------------------------------------------------

/// Sampling domain for vector checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    Cube,
    Simplex,
}

/// Fill `out` with a draw from the domain.
pub fn sample_point<R: Rng>(rng: &mut R, domain: Domain, out: &mut [f64]) {
    match domain {
        Domain::Cube => out.iter_mut().for_each(|x| *x = rng.random::<f64>()),
        Domain::Simplex => {
            // Dirichlet(1, ..., 1) via normalized standard exponentials.
            let mut total = 0.0;
            for x in out.iter_mut() {
                let u: f64 = rng.random();
                *x = -(1.0 - u).ln();
                total += *x;
            }
            out.iter_mut().for_each(|x| *x /= total);
        }
    }
}

/// Deterministic lattice with step 1/10: the full `{0, .1, .., 1}^m` for the cube, the
/// compositions of 10 into `m` parts for the simplex. Empty for `m > 3`.
pub fn coarse_lattice(m: usize, domain: Domain) -> Vec<Vec<f64>> {
    if m > 3 || m == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; m];
    loop {
        let keep = match domain {
            Domain::Cube => true,
            Domain::Simplex => idx.iter().sum::<usize>() == 10,
        };
        if keep {
            out.push(idx.iter().map(|&k| k as f64 / 10.0).collect());
        }
        let mut k = 0;
        loop {
            if k == m {
                return out;
            }
            idx[k] += 1;
            if idx[k] <= 10 {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Check `C * KL(p || q) >= target(p, q)` on `samples` seeded random pairs plus the coarse
/// lattice. The target is any vector divergence (Bregman, Pinsker's RHS, ...).
pub fn verify_vector_bound(
    target: &(dyn Fn(&[f64], &[f64]) -> f64 + Sync),
    c: f64,
    m: usize,
    samples: usize,
    domain: Domain,
    seed: u64,
) -> Result<BoundReport> {
    if m == 0 {
        return Err(Error::Empty);
    }
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("constant must be positive, got {c}")));
    }
    let chunks = samples.div_ceil(CHUNK);
    let random = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let n = CHUNK.min(samples - chunk * CHUNK);
            let mut p = vec![0.0; m];
            let mut q = vec![0.0; m];
            let mut acc = Partial::empty();
            for _ in 0..n {
                sample_point(&mut rng, domain, &mut p);
                sample_point(&mut rng, domain, &mut q);
                acc.record(c, kl_slices(&p, &q), target(&p, &q), || Location::Vector {
                    p: p.clone(),
                    q: q.clone(),
                });
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Partial::empty(), Partial::merge);

    let lattice = coarse_lattice(m, domain);
    let on_lattice = lattice
        .par_iter()
        .map(|p| {
            let mut acc = Partial::empty();
            for q in &lattice {
                acc.record(c, kl_slices(p, q), target(p, q), || Location::Vector {
                    p: p.clone(),
                    q: q.clone(),
                });
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Partial::empty(), Partial::merge);

    let spec = format!(
        "{domain:?} m={m} samples={samples} seed={seed} lattice={}",
        lattice.len()
    );
    Ok(random.merge(on_lattice).into_report(c, spec))
}

/// Check `C * KL >= D_g` for a separable Bregman divergence.
pub fn verify_theorem2(
    gen: &SeparableBregman,
    c: f64,
    m: usize,
    samples: usize,
    simplex: bool,
) -> Result<BoundReport> {
    verify_theorem2_seeded(gen, c, m, samples, simplex, DEFAULT_SEED)
}

pub fn verify_theorem2_seeded(
    gen: &SeparableBregman,
    c: f64,
    m: usize,
    samples: usize,
    simplex: bool,
    seed: u64,
) -> Result<BoundReport> {
    if gen.generators().len() > 1 && gen.generators().len() != m {
        return Err(Error::LengthMismatch(gen.generators().len(), m));
    }
    let target = |p: &[f64], q: &[f64]| gen.eval(p, q).unwrap_or(f64::INFINITY);
    let domain = if simplex { Domain::Simplex } else { Domain::Cube };
    verify_vector_bound(&target, c, m, samples, domain, seed)
}

// --------------------------------------------------------------------------------------
// Convexity of the loss in q
// --------------------------------------------------------------------------------------

/// Outcome of [`classify_convexity`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub is_convex: bool,
    /// Up to [`MAX_RECORDED`] grid pairs `(p, q)` where the condition fails.
    pub violating_region: Vec<(f64, f64)>,
    pub violation_count: usize,
    /// `min w(q) + (q - p) w'(q)` over the scanned pairs.
    pub margin: f64,
    /// Whether the weight sandwich around `w(1/2)` holds on the `q` grid.
    pub sandwich_holds: bool,
    pub sandwich_violations: usize,
}

pub const MAX_RECORDED: usize = 256;

/// Evaluate `d^2/dq^2 L(p, q) = w(q) + (q - p) w'(q) >= 0` for `p` in `{0, grid, 1}` and
/// `q` on the interior grid. Also checks, for `q >= 1/2`,
/// `w(1/2) / (2q) <= w(q) <= w(1/2) / (2(1 - q))`, reversed for `q < 1/2`.
pub fn classify_convexity(loss: &ProperLoss, grid_n: usize) -> Result<ConvexityReport> {
    let w_half = loss.weight(0.5)?;
    let mut p_values = vec![0.0];
    p_values.extend((1..=grid_n).map(|i| interior(i, grid_n)));
    p_values.push(1.0);

    let mut margin = f64::INFINITY;
    let mut violating_region = Vec::new();
    let mut violation_count = 0;
    let mut sandwich_violations = 0;
    for j in 1..=grid_n {
        let q = interior(j, grid_n);
        let w = loss.weight(q)?;
        let wp = loss.weight_derivative(q)?;
        for &p in &p_values {
            let value = w + (q - p) * wp;
            margin = margin.min(value);
            if value < -1e-9 {
                violation_count += 1;
                if violating_region.len() < MAX_RECORDED {
                    violating_region.push((p, q));
                }
            }
        }
        let low = w_half / (2.0 * q);
        let high = w_half / (2.0 * (1.0 - q));
        let slack = 1e-12 * w.abs().max(1.0);
        let ok = if q >= 0.5 {
            low <= w + slack && w <= high + slack
        } else {
            low + slack >= w && w + slack >= high
        };
        if !ok {
            sandwich_violations += 1;
        }
    }
    Ok(ConvexityReport {
        is_convex: margin >= -1e-9,
        violating_region,
        violation_count,
        margin,
        sandwich_holds: sandwich_violations == 0,
        sandwich_violations,
    })
}

// --------------------------------------------------------------------------------------
// Local expansion
// --------------------------------------------------------------------------------------

/// Terms of the second-order comparison at `(p, p + dp)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalExpansion {
    /// `D_{-G}(p || p + dp)`.
    pub bregman: f64,
    /// `bregman / C` with `C = (1/2) w(1/2) + 1e-9`.
    pub lhs: f64,
    /// `(dp^2 / 2) I(p)` with Bernoulli Fisher information `I(p) = 1 / (p (1 - p))`.
    pub rhs: f64,
    /// `(dp^2 / 2) w(p)`, the second-order term of the regret.
    pub weight_term: f64,
    pub constant: f64,
}

impl LocalExpansion {
    /// `bregman / weight_term`; tends to 1 as `dp -> 0`.
    pub fn ratio(&self) -> f64 {
        self.bregman / self.weight_term
    }
}

/// Largest step accepted by [`local_expansion_check`].
pub const MAX_LOCAL_STEP: f64 = 1e-2;

pub fn fisher_information(p: f64) -> f64 {
    1.0 / (p * (1.0 - p))
}

pub fn local_expansion_check(loss: &ProperLoss, p: f64, dp: f64) -> Result<LocalExpansion> {
    if dp.abs() > MAX_LOCAL_STEP {
        return Err(Error::StepTooLarge(dp));
    }
    let q = p + dp;
    if !(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0) {
        return Err(Error::OutsideInterior { p, q });
    }
    let constant = min_admissible_c_binary(loss)? + 1e-9;
    let bregman = bregman_binary(loss, p, q);
    let half_sq = 0.5 * dp * dp;
    Ok(LocalExpansion {
        bregman,
        lhs: bregman / constant,
        rhs: half_sq * fisher_information(p),
        weight_term: half_sq * loss.weight(p)?,
        constant,
    })
}
