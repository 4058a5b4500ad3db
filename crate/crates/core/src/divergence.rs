//! Divergences on `[0, 1]` and `[0, 1]^m`.
//!
//! Binary regrets of proper losses ([`bregman_binary`]), separable Bregman divergences
//! `D_g(p || q) = sum_i g(p_i) - g(q_i) - g'(q_i)(p_i - q_i)`, the generalized KL
//! divergence for unnormalized vectors, and the reference divergences used as
//! constraints (total variation without the 1/2 factor, chi-square) or as comparison
//! bounds (Pinsker's right-hand side).
//!
//! All logarithms are natural. Infinite divergences are returned as `f64::INFINITY`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{expected_loss, scalar_fn, ProperLoss, ScalarFn};
use crate::numeric::{
    central_diff, clamp_prob, integrate_from_zero, tanh_sinh_from_zero, xlogxy, ValueCache,
};

/// Tolerance on `sum = 1` for simplex vectors.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// A vector in `[0, 1]^m`, optionally certified to lie on the unit simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbVector {
    values: Vec<f64>,
    simplex: bool,
}

impl ProbVector {
    /// A point of the cube `[0, 1]^m`.
    pub fn cube(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        for (index, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OutOfRange { index, value });
            }
        }
        Ok(Self {
            values,
            simplex: false,
        })
    }

    /// A point of the unit simplex.
    pub fn simplex(values: Vec<f64>) -> Result<Self> {
        let mut v = Self::cube(values)?;
        let sum: f64 = v.values.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::NotOnSimplex(sum));
        }
        v.simplex = true;
        Ok(v)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_simplex(&self) -> bool {
        self.simplex
    }

    /// The binary pair `(p, 1 - p)`.
    pub fn binary(p: f64) -> Result<Self> {
        Self::simplex(vec![p, 1.0 - p])
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl AsRef<[f64]> for ProbVector {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

fn check_lengths(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        Err(Error::LengthMismatch(p.len(), q.len()))
    } else {
        Ok(())
    }
}

// --------------------------------------------------------------------------------------
// Binary regret
// --------------------------------------------------------------------------------------

/// Regret of a proper loss, `D_{-G}(p || q) = -G(p) + G(q) + (p - q) G'(q)`.
///
/// Non-smooth losses fall back to their closed form when they carry one, otherwise to
/// `L(p, q) - G(p)`. When `G'(q)` diverges (log loss at `q in {0, 1}`) the forecast is
/// clamped into `[1e-12, 1 - 1e-12]`.
pub fn bregman_binary(loss: &ProperLoss, p: f64, q: f64) -> f64 {
    if p == q {
        return 0.0;
    }
    if !loss.is_smooth() {
        return match loss.closed_form_divergence(p, q) {
            Some(d) => d,
            None => expected_loss(loss, p, q) - loss.entropy(p),
        };
    }
    let mut q = q;
    let mut slope = loss.entropy_derivative(q);
    if !slope.is_finite() {
        q = clamp_prob(q);
        slope = loss.entropy_derivative(q);
    }
    (-loss.entropy(p) + loss.entropy(q) + (p - q) * slope).max(0.0)
}

/// Binary KL divergence `p ln(p/q) + (1-p) ln((1-p)/(1-q))`, in nats.
pub fn kl_binary(p: f64, q: f64) -> f64 {
    (xlogxy(p, q) + xlogxy(1.0 - p, 1.0 - q)).max(0.0)
}

// --------------------------------------------------------------------------------------
// Generators
// --------------------------------------------------------------------------------------

/// A scalar convex function `g` on `[0, 1]` with up to three derivatives.
#[derive(Clone)]
pub struct BregmanGenerator {
    name: String,
    g: ScalarFn,
    g_prime: ScalarFn,
    g_second: ScalarFn,
    g_third: ScalarFn,
}

impl fmt::Debug for BregmanGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BregmanGenerator")
            .field("name", &self.name)
            .finish()
    }
}

impl BregmanGenerator {
    pub fn new(
        name: impl Into<String>,
        g: ScalarFn,
        g_prime: ScalarFn,
        g_second: ScalarFn,
        g_third: Option<ScalarFn>,
    ) -> Self {
        let g_third = g_third.unwrap_or_else(|| {
            let g2 = g_second.clone();
            scalar_fn(move |x| central_diff(&*g2, x))
        });
        Self {
            name: name.into(),
            g,
            g_prime,
            g_second,
            g_third,
        }
    }

    /// `g(x) = a x^2`; `a = 1` is the squared error, other `a` a diagonal Mahalanobis weight.
    pub fn scaled_squared(a: f64) -> Self {
        let name = if a == 1.0 {
            "squared".to_string()
        } else {
            format!("mahalanobis-{a}")
        };
        Self::new(
            name,
            scalar_fn(move |x| a * x * x),
            scalar_fn(move |x| 2.0 * a * x),
            scalar_fn(move |_| 2.0 * a),
            Some(scalar_fn(|_| 0.0)),
        )
    }

    pub fn squared() -> Self {
        Self::scaled_squared(1.0)
    }

    /// `g(x) = x ln x` with `g(0) = 0`; its separable divergence is the generalized KL.
    pub fn xlogx() -> Self {
        Self::new(
            "xlogx",
            scalar_fn(|x| if x == 0.0 { 0.0 } else { x * x.ln() }),
            scalar_fn(|x| x.ln() + 1.0),
            scalar_fn(|x| 1.0 / x),
            Some(scalar_fn(|x| -1.0 / (x * x))),
        )
    }

    /// Build `g` from its curvature `g''` by integrating twice from 0, so that
    /// `g(0) = g'(0) = 0`. Integrable singularities of the curvature at 0 are allowed.
    pub fn from_curvature(
        name: impl Into<String>,
        curvature: ScalarFn,
        curvature_prime: Option<ScalarFn>,
    ) -> Result<Self> {
        // Probe integrability once so evaluation failures surface here.
        integrate_from_zero(&*curvature, 1.0, 1e-12)?;
        let c1 = curvature.clone();
        let slope_cache = ValueCache::default();
        let g_prime = scalar_fn(move |x| {
            slope_cache.get_or(x, || tanh_sinh_from_zero(&*c1, x, 1e-15))
        });
        let c2 = curvature.clone();
        let value_cache = ValueCache::default();
        let g = scalar_fn(move |x| {
            value_cache.get_or(x, || tanh_sinh_from_zero(&|t| (x - t) * c2(t), x, 1e-15))
        });
        Ok(Self::new(name, g, g_prime, curvature, curvature_prime))
    }

    /// Constructed generator with curvature `(3/4) x^(-1/2)`, i.e. `g(x) = x^(3/2)`.
    pub fn power_three_halves() -> Self {
        Self::from_curvature(
            "power-1.5",
            scalar_fn(|x| 0.75 / x.sqrt()),
            Some(scalar_fn(|x| -0.375 * x.powf(-1.5))),
        )
        .expect("x^(-1/2) is integrable at 0")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn g(&self, x: f64) -> f64 {
        (self.g)(x)
    }

    pub fn g_prime(&self, x: f64) -> f64 {
        (self.g_prime)(x)
    }

    pub fn g_second(&self, x: f64) -> f64 {
        (self.g_second)(x)
    }

    pub fn g_third(&self, x: f64) -> f64 {
        (self.g_third)(x)
    }

    /// True when `g''` blows up at 0, so gradients diverge at empty coordinates.
    pub fn singular_at_zero(&self) -> bool {
        !self.g_second(0.0).is_finite()
    }

    /// `min g''` over `{i / n : i = 1..=n}`.
    pub fn convexity_margin(&self, n: usize) -> f64 {
        (1..=n)
            .map(|i| self.g_second(i as f64 / n as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest `(g''(q) + g'''(q)(q - p)) / g''(q)` over `p in {0, 1}` and an interior
    /// `q` grid: nonnegative iff `D_g` is convex in its second argument on that grid.
    pub fn second_argument_convexity_margin(&self, n: usize) -> f64 {
        let mut margin = f64::INFINITY;
        for i in 1..=n {
            let q = i as f64 / (n + 1) as f64;
            let g2 = self.g_second(q);
            let g3 = self.g_third(q);
            for p in [0.0, 1.0] {
                margin = margin.min((g2 + g3 * (q - p)) / g2);
            }
        }
        margin
    }
}

/// Generators shipped with the crate, by name.
pub fn generator_by_name(name: &str) -> Option<BregmanGenerator> {
    match name {
        "squared" => Some(BregmanGenerator::squared()),
        "xlogx" => Some(BregmanGenerator::xlogx()),
        "power-1.5" => Some(BregmanGenerator::power_three_halves()),
        _ => name
            .strip_prefix("mahalanobis-")
            .and_then(|a| a.parse::<f64>().ok())
            .filter(|a| *a > 0.0 && a.is_finite())
            .map(BregmanGenerator::scaled_squared),
    }
}

/// Names of the generators used by the experiments.
pub const GENERATOR_NAMES: [&str; 5] = [
    "squared",
    "xlogx",
    "mahalanobis-0.5",
    "mahalanobis-2",
    "power-1.5",
];

/// The shipped generators in [`GENERATOR_NAMES`] order.
pub fn shipped_generators() -> Vec<BregmanGenerator> {
    GENERATOR_NAMES
        .iter()
        .map(|n| generator_by_name(n).expect("shipped name"))
        .collect()
}

// --------------------------------------------------------------------------------------
// Separable divergences
// --------------------------------------------------------------------------------------

/// `sum_i g(p_i) - g(q_i) - g'(q_i)(p_i - q_i)`.
///
/// Coordinates with `p_i == q_i` contribute zero. A non-finite `g'(q_i)` elsewhere is an
/// error.
pub fn bregman_separable(gen: &BregmanGenerator, p: &ProbVector, q: &ProbVector) -> Result<f64> {
    bregman_separable_slices(std::slice::from_ref(gen), p.values(), q.values())
}

pub(crate) fn bregman_separable_slices(
    gens: &[BregmanGenerator],
    p: &[f64],
    q: &[f64],
) -> Result<f64> {
    check_lengths(p, q)?;
    let mut total = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi == qi {
            continue;
        }
        let gen = &gens[i % gens.len()];
        let slope = gen.g_prime(qi);
        if !slope.is_finite() {
            return Err(Error::NonFiniteDerivative {
                name: gen.name.clone(),
                index: i,
                q: qi,
            });
        }
        let term = gen.g(pi) - gen.g(qi) - slope * (pi - qi);
        if term.is_nan() {
            return Err(Error::Quadrature { q: qi });
        }
        total += term;
    }
    Ok(total.max(0.0))
}

/// Generalized KL `sum p_i ln(p_i/q_i) - sum p_i + sum q_i`, with `0 ln 0 = 0`.
pub fn kl_generalized(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    check_lengths(p.values(), q.values())?;
    Ok(kl_slices(p.values(), q.values()))
}

pub(crate) fn kl_slices(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&pi, &qi)| (xlogxy(pi, qi) - pi + qi).max(0.0))
        .sum()
}

/// `sum |p_i - q_i|` (no factor 1/2).
pub fn total_variation(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    check_lengths(p.values(), q.values())?;
    Ok(tv_slices(p.values(), q.values()))
}

pub(crate) fn tv_slices(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum()
}

/// `sum (p_i - q_i)^2 / q_i`; infinite if some `q_i = 0` with `p_i != q_i`.
pub fn chi_square(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    check_lengths(p.values(), q.values())?;
    Ok(chi2_slices(p.values(), q.values()))
}

pub(crate) fn chi2_slices(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&pi, &qi)| {
            if pi == qi {
                0.0
            } else if qi == 0.0 {
                f64::INFINITY
            } else {
                (pi - qi) * (pi - qi) / qi
            }
        })
        .sum()
}

/// Pinsker's right-hand side `(1/2) (sum |p_i - q_i|)^2`.
pub fn pinsker_rhs(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    let tv = total_variation(p, q)?;
    Ok(0.5 * tv * tv)
}

/// The squared-error bound `(1/2) sum (p_i - q_i)^2`.
pub fn half_squared_error(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    check_lengths(p.values(), q.values())?;
    Ok(0.5
        * p.values()
            .iter()
            .zip(q.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>())
}

// --------------------------------------------------------------------------------------
// Divergences as optimization objectives / constraints
// --------------------------------------------------------------------------------------

/// A separable Bregman divergence whose generator may differ per coordinate.
/// A single generator is shared by all coordinates.
#[derive(Clone, Debug)]
pub struct SeparableBregman {
    name: String,
    parts: Arc<Vec<BregmanGenerator>>,
}

impl SeparableBregman {
    pub fn shared(gen: BregmanGenerator) -> Self {
        Self {
            name: gen.name.clone(),
            parts: Arc::new(vec![gen]),
        }
    }

    /// Per-coordinate generators, e.g. `a_i x^2` for a diagonal Mahalanobis distance.
    pub fn per_coordinate(name: impl Into<String>, parts: Vec<BregmanGenerator>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Empty);
        }
        Ok(Self {
            name: name.into(),
            parts: Arc::new(parts),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generators(&self) -> &[BregmanGenerator] {
        &self.parts
    }

    fn part(&self, i: usize) -> &BregmanGenerator {
        &self.parts[i % self.parts.len()]
    }

    /// `max_i g_i''(1)`.
    pub fn curvature_at_one(&self) -> f64 {
        self.parts
            .iter()
            .map(|g| g.g_second(1.0))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn singular_at_zero(&self) -> bool {
        self.parts.iter().any(BregmanGenerator::singular_at_zero)
    }

    pub fn eval(&self, p: &[f64], q: &[f64]) -> Result<f64> {
        if self.parts.len() > 1 && self.parts.len() != p.len() {
            return Err(Error::LengthMismatch(self.parts.len(), p.len()));
        }
        bregman_separable_slices(&self.parts, p, q)
    }
}

/// A divergence usable as an objective or as the ε-constraint of the experiments.
#[derive(Clone, Debug)]
pub enum Divergence {
    KullbackLeibler,
    Bregman(SeparableBregman),
    TotalVariation,
    ChiSquare,
}

impl Divergence {
    pub fn bregman(gen: BregmanGenerator) -> Self {
        Divergence::Bregman(SeparableBregman::shared(gen))
    }

    /// Resolve `kl`, `tv`, `chi2` or a generator name.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "kl" => Some(Divergence::KullbackLeibler),
            "tv" | "total-variation" => Some(Divergence::TotalVariation),
            "chi2" | "chi-square" => Some(Divergence::ChiSquare),
            other => generator_by_name(other).map(Divergence::bregman),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Divergence::KullbackLeibler => "kl",
            Divergence::Bregman(b) => b.name(),
            Divergence::TotalVariation => "tv",
            Divergence::ChiSquare => "chi2",
        }
    }

    /// Value at `(p, q)`; infinite where the divergence is, or where a generator
    /// derivative diverges at a coordinate that differs from `p`.
    pub fn eval(&self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            Divergence::KullbackLeibler => kl_slices(p, q),
            Divergence::Bregman(b) => b.eval(p, q).unwrap_or(f64::INFINITY),
            Divergence::TotalVariation => tv_slices(p, q),
            Divergence::ChiSquare => chi2_slices(p, q),
        }
    }

    /// Gradient with respect to `q` written into `out`; `false` if not differentiable.
    pub fn gradient(&self, p: &[f64], q: &[f64], out: &mut [f64]) -> bool {
        match self {
            Divergence::KullbackLeibler => {
                for ((o, &pi), &qi) in out.iter_mut().zip(p).zip(q) {
                    *o = 1.0 - pi / qi;
                }
                true
            }
            Divergence::Bregman(b) => {
                for (i, ((o, &pi), &qi)) in out.iter_mut().zip(p).zip(q).enumerate() {
                    *o = if pi == qi {
                        0.0
                    } else {
                        b.part(i).g_second(qi) * (qi - pi)
                    };
                }
                true
            }
            Divergence::ChiSquare => {
                for ((o, &pi), &qi) in out.iter_mut().zip(p).zip(q) {
                    *o = 1.0 - (pi * pi) / (qi * qi);
                }
                true
            }
            Divergence::TotalVariation => false,
        }
    }

    /// Whether the gradient diverges at an empty coordinate.
    pub fn singular_at_zero(&self) -> bool {
        match self {
            Divergence::KullbackLeibler | Divergence::ChiSquare => true,
            Divergence::Bregman(b) => b.singular_at_zero(),
            Divergence::TotalVariation => false,
        }
    }

    /// Threshold normalization constant against KL: `g''(1)` for Bregman divergences,
    /// 1 for KL itself, `None` for the non-Bregman constraint divergences.
    pub fn curvature_at_one(&self) -> Option<f64> {
        match self {
            Divergence::KullbackLeibler => Some(1.0),
            Divergence::Bregman(b) => Some(b.curvature_at_one()),
            _ => None,
        }
    }
}
