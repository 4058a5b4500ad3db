//! Proper binary losses.
//!
//! A binary loss is a pair of partial losses `l0(q)` (charged when `y = 0`) and `l1(q)`
//! (charged when `y = 1`) for a forecast `q` of `P(y = 1)`. The expected loss under a
//! Bernoulli(`p`) outcome is `L(p, q) = p l1(q) + (1 - p) l0(q)`, its minimum
//! `G(p) = L(p, p)` is the generalized entropy, and the regret `L(p, q) - G(p)` is the
//! Bregman divergence of `-G`.
//!
//! Smooth proper losses are characterized by a nonnegative weight function
//! `w(p) = l0'(p) / p = -l1'(p) / (1 - p)`, with `G'' = -w`. [`loss_from_weight`] builds a
//! loss from `w` by integration, and [`catalog`] ships the four classic closed forms.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::{
    central_diff, clamp_prob, golden_section, integrate_interior, power_law_tail, second_diff,
    xlogxy, Quadrature, ValueCache, CLAMP,
};

/// A thread-safe scalar map.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// A thread-safe map of a `(p, q)` pair.
pub type PairFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Wrap a closure as a [`ScalarFn`].
pub fn scalar_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> ScalarFn {
    Arc::new(f)
}

/// A point mass of the weight measure (the 0-1 loss puts mass 2 at 1/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub at: f64,
    pub mass: f64,
}

/// Continuous part of a weight measure.
#[derive(Clone)]
pub struct Density {
    pub w: ScalarFn,
    /// Analytic derivative; central differences are used when absent.
    pub w_prime: Option<ScalarFn>,
}

/// The weight measure that determines a proper loss.
#[derive(Clone)]
pub struct WeightSpec {
    pub density: Option<Density>,
    pub atoms: Vec<Atom>,
    /// Smallest `eps` for which `int_eps^(1-eps) w` is checked to be finite.
    pub integrability_margin: f64,
}

impl WeightSpec {
    pub fn from_density(w: ScalarFn, w_prime: Option<ScalarFn>) -> Self {
        Self {
            density: Some(Density { w, w_prime }),
            atoms: Vec::new(),
            integrability_margin: 1e-3,
        }
    }

    pub fn point_mass(at: f64, mass: f64) -> Self {
        Self {
            density: None,
            atoms: vec![Atom { at, mass }],
            integrability_margin: 1e-3,
        }
    }

    pub fn is_smooth(&self) -> bool {
        self.density.is_some() && self.atoms.is_empty()
    }

    /// Checks `w >= 0` on an interior grid and finiteness of `int_eps^(1-eps) w` for
    /// `eps` in `{1e-1, 1e-2, 1e-3}` (those not below the margin).
    pub fn validate(&self) -> Result<()> {
        for atom in &self.atoms {
            if !(atom.at > 0.0 && atom.at < 1.0) || !(atom.mass >= 0.0) {
                return Err(Error::InvalidWeight(format!(
                    "atom at {} with mass {}",
                    atom.at, atom.mass
                )));
            }
        }
        let Some(density) = &self.density else {
            return if self.atoms.is_empty() {
                Err(Error::InvalidWeight("empty weight measure".into()))
            } else {
                Ok(())
            };
        };
        for i in 1..1000 {
            let c = i as f64 / 1000.0;
            let v = (density.w)(c);
            if !(v >= -1e-12) || !v.is_finite() {
                return Err(Error::InvalidWeight(format!("w({c}) = {v}")));
            }
        }
        for eps in [1e-1, 1e-2, 1e-3] {
            if eps < self.integrability_margin {
                continue;
            }
            let q = integrate_interior(&*density.w, eps, 1.0 - eps, 1e-9);
            if !q.converged {
                return Err(Error::NonIntegrable { endpoint: eps });
            }
        }
        Ok(())
    }
}

/// A proper binary loss with its entropy and weight function.
#[derive(Clone)]
pub struct ProperLoss {
    name: String,
    l0: ScalarFn,
    l1: ScalarFn,
    entropy: ScalarFn,
    entropy_prime: ScalarFn,
    weight: WeightSpec,
    divergence: Option<PairFn>,
}

impl fmt::Debug for ProperLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProperLoss")
            .field("name", &self.name)
            .field("smooth", &self.is_smooth())
            .finish()
    }
}

impl ProperLoss {
    /// Assemble a loss from explicit parts. `divergence` is an optional closed form of
    /// the regret; `bregman_binary` prefers the entropy route for smooth losses.
    pub fn new(
        name: impl Into<String>,
        l0: ScalarFn,
        l1: ScalarFn,
        entropy: ScalarFn,
        entropy_prime: ScalarFn,
        weight: WeightSpec,
        divergence: Option<PairFn>,
    ) -> Self {
        Self {
            name: name.into(),
            l0,
            l1,
            entropy,
            entropy_prime,
            weight,
            divergence,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_smooth(&self) -> bool {
        self.weight.is_smooth()
    }

    pub fn l0(&self, q: f64) -> f64 {
        (self.l0)(q)
    }

    pub fn l1(&self, q: f64) -> f64 {
        (self.l1)(q)
    }

    /// Generalized entropy `G(p) = L(p, p)`.
    pub fn entropy(&self, p: f64) -> f64 {
        (self.entropy)(p)
    }

    /// `G'(p)`; may be infinite at the endpoints.
    pub fn entropy_derivative(&self, p: f64) -> f64 {
        (self.entropy_prime)(p)
    }

    pub fn weight_spec(&self) -> &WeightSpec {
        &self.weight
    }

    fn density(&self) -> Result<&Density> {
        match &self.weight.density {
            Some(d) if self.weight.atoms.is_empty() => Ok(d),
            _ => Err(Error::NotSmooth(self.name.clone())),
        }
    }

    pub fn weight(&self, p: f64) -> Result<f64> {
        Ok((self.density()?.w)(p))
    }

    pub fn weight_derivative(&self, p: f64) -> Result<f64> {
        let d = self.density()?;
        Ok(match &d.w_prime {
            Some(wp) => wp(p),
            None => central_diff(&*d.w, p),
        })
    }

    /// Closed-form regret, if the loss carries one.
    pub fn closed_form_divergence(&self, p: f64, q: f64) -> Option<f64> {
        self.divergence.as_ref().map(|d| d(p, q))
    }

    pub fn expected_loss(&self, p: f64, q: f64) -> f64 {
        expected_loss(self, p, q)
    }
}

/// `L(p, q) = p l1(q) + (1 - p) l0(q)`. A term with a zero probability factor contributes
/// exactly zero even where the partial loss diverges.
pub fn expected_loss(loss: &ProperLoss, p: f64, q: f64) -> f64 {
    let mut total = 0.0;
    if p != 0.0 {
        total += p * loss.l1(q);
    }
    if p != 1.0 {
        total += (1.0 - p) * loss.l0(q);
    }
    total
}

/// Savage representation `G(q) + (p - q) G'(q)`.
pub fn savage_expected_loss(loss: &ProperLoss, p: f64, q: f64) -> Result<f64> {
    if !loss.is_smooth() {
        return Err(Error::NotSmooth(loss.name.clone()));
    }
    let slope = loss.entropy_derivative(q);
    if !slope.is_finite() {
        return Err(Error::EndpointDerivative {
            loss: loss.name.clone(),
            q,
        });
    }
    let g = loss.entropy(q);
    Ok(if p == q { g } else { g + (p - q) * slope })
}

// --------------------------------------------------------------------------------------
// Construction from a weight function
// --------------------------------------------------------------------------------------

/// Width of the endpoint slivers handled by the power-law tail model. Closer to the
/// endpoints `1 - c` loses too many digits for the quadrature to converge.
pub const QUAD_TRUNCATION: f64 = 1e-8;
const QUAD_TOL: f64 = 1e-10;

struct Constructed {
    w: ScalarFn,
}

impl Constructed {
    /// `int_q^1 (1 - c) w(c) dc`.
    fn upper(&self, q: f64) -> Result<f64> {
        let w = &self.w;
        let f = |c: f64| (1.0 - c) * w(c);
        let d = QUAD_TRUNCATION;
        let q = q.max(CLAMP);
        if q >= 1.0 - d {
            let s = 1.0 - q;
            return power_law_tail(s * w(q), 10.0 * s * w(1.0 - 10.0 * s), s, 1.0);
        }
        let tail = power_law_tail(d * w(1.0 - d), 10.0 * d * w(1.0 - 10.0 * d), d, 1.0)?;
        let body = relative_quadrature(&f, q, 1.0 - d);
        if !body.converged {
            return Err(Error::Quadrature { q });
        }
        Ok(body.value + tail)
    }

    /// `int_0^q c w(c) dc`.
    fn lower(&self, q: f64) -> Result<f64> {
        let w = &self.w;
        let f = |c: f64| c * w(c);
        let d = QUAD_TRUNCATION;
        let q = q.min(1.0 - CLAMP);
        if q <= d {
            return power_law_tail(q * w(q), 10.0 * q * w(10.0 * q), q, 0.0);
        }
        let tail = power_law_tail(d * w(d), 10.0 * d * w(10.0 * d), d, 0.0)?;
        let body = relative_quadrature(&f, d, q);
        if !body.converged {
            return Err(Error::Quadrature { q });
        }
        Ok(body.value + tail)
    }
}

/// `QUAD_TOL` is absolute for values of order one and relative beyond that; near the
/// endpoints the partial losses grow large and an absolute target sits below roundoff.
fn relative_quadrature(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Quadrature {
    let rough = integrate_interior(f, a, b, 1e-4);
    integrate_interior(f, a, b, QUAD_TOL * rough.value.abs().max(1.0))
}

fn atom_upper(atoms: &[Atom], q: f64) -> f64 {
    atoms
        .iter()
        .filter(|a| q < a.at)
        .map(|a| a.mass * (1.0 - a.at))
        .sum()
}

fn atom_lower(atoms: &[Atom], q: f64) -> f64 {
    atoms
        .iter()
        .filter(|a| q >= a.at)
        .map(|a| a.mass * a.at)
        .sum()
}

/// Build the proper loss with `l1(q) = int_q^1 (1 - c) w(c) dc` and
/// `l0(q) = int_0^q c w(c) dc`. Point masses contribute a jump at their location, placed
/// in `l0` on ties (a forecast at the atom predicts `y = 1`).
///
/// The endpoint integrability of `(1 - c) w` at 1 and `c w` at 0 is checked eagerly; the
/// returned closures evaluate the quadrature lazily and yield NaN if it fails at some
/// later argument (see [`try_partial_losses`] for the fallible form).
pub fn loss_from_weight(name: impl Into<String>, spec: WeightSpec) -> Result<ProperLoss> {
    spec.validate()?;
    let name = name.into();
    let constructed = spec.density.as_ref().map(|d| {
        Arc::new(Constructed {
            w: d.w.clone(),
        })
    });
    if let Some(c) = &constructed {
        // Probe both ends and the middle so bad weights fail here rather than as NaN.
        for q in [1e-6, 0.5, 1.0 - 1e-6] {
            c.upper(q)?;
            c.lower(q)?;
        }
    }
    let atoms = Arc::new(spec.atoms.clone());

    let l1: ScalarFn = {
        let c = constructed.clone();
        let atoms = atoms.clone();
        let cache = ValueCache::default();
        Arc::new(move |q| {
            let cont = match &c {
                Some(c) => cache.get_or(q, || c.upper(q).unwrap_or(f64::NAN)),
                None => 0.0,
            };
            cont + atom_upper(&atoms, q)
        })
    };
    let l0: ScalarFn = {
        let c = constructed.clone();
        let atoms = atoms.clone();
        let cache = ValueCache::default();
        Arc::new(move |q| {
            let cont = match &c {
                Some(c) => cache.get_or(q, || c.lower(q).unwrap_or(f64::NAN)),
                None => 0.0,
            };
            cont + atom_lower(&atoms, q)
        })
    };
    let entropy: ScalarFn = {
        let (l0, l1) = (l0.clone(), l1.clone());
        Arc::new(move |p| {
            let mut g = 0.0;
            if p != 0.0 {
                g += p * l1(p);
            }
            if p != 1.0 {
                g += (1.0 - p) * l0(p);
            }
            g
        })
    };
    // l1 blows up at 0 exactly when (1 - c) w(c) is not integrable there; same for l0 at 1.
    let (l1_diverges_at_0, l0_diverges_at_1) = match &spec.density {
        Some(d) => {
            let w = &d.w;
            let t = QUAD_TRUNCATION;
            (
                power_law_tail((1.0 - t) * w(t), (1.0 - 10.0 * t) * w(10.0 * t), t, 0.0)
                    .is_err(),
                power_law_tail(
                    (1.0 - t) * w(1.0 - t),
                    (1.0 - 10.0 * t) * w(1.0 - 10.0 * t),
                    t,
                    1.0,
                )
                .is_err(),
            )
        }
        None => (false, false),
    };
    // p l1'(p) + (1 - p) l0'(p) = 0, so G' = l1 - l0.
    let entropy_prime: ScalarFn = {
        let (l0, l1) = (l0.clone(), l1.clone());
        Arc::new(move |p| {
            if p <= 0.0 && l1_diverges_at_0 {
                f64::INFINITY
            } else if p >= 1.0 && l0_diverges_at_1 {
                f64::NEG_INFINITY
            } else {
                l1(p) - l0(p)
            }
        })
    };
    Ok(ProperLoss::new(
        name,
        l0,
        l1,
        entropy,
        entropy_prime,
        spec,
        None,
    ))
}

/// Fallible evaluation of `(l0(q), l1(q))` for a weight specification, reporting the
/// offending `q` when the quadrature fails.
pub fn try_partial_losses(spec: &WeightSpec, q: f64) -> Result<(f64, f64)> {
    let (mut l0, mut l1) = (0.0, 0.0);
    if let Some(d) = &spec.density {
        let c = Constructed { w: d.w.clone() };
        l0 += c.lower(q)?;
        l1 += c.upper(q)?;
    }
    l0 += atom_lower(&spec.atoms, q);
    l1 += atom_upper(&spec.atoms, q);
    Ok((l0, l1))
}

// --------------------------------------------------------------------------------------
// Properness
// --------------------------------------------------------------------------------------

/// Result of [`check_properness`].
#[derive(Debug, Clone, PartialEq)]
pub struct PropernessReport {
    pub loss: String,
    /// `max |argmin_q L(p, q) - p|` over the grid.
    pub max_deviation: f64,
    /// `max (L(p, p) - min_q L(p, q))`; nonpositive up to rounding for proper losses.
    pub max_improvement: f64,
    pub worst_p: f64,
    pub pass: bool,
}

pub const PROPERNESS_RESOLUTION: f64 = 1e-6;
pub const PROPERNESS_TOLERANCE: f64 = 1e-4;

/// Minimize `q -> L(p, q)` over `[0, 1]` by golden section for each grid point.
///
/// Smooth losses pass when every minimizer is within `1e-4` of `p`. Losses that are not
/// strictly proper (the 0-1 loss) have a set of minimizers, so they pass when reporting
/// `p` is never beaten by the minimizer found.
pub fn check_properness(loss: &ProperLoss, p_grid: &[f64]) -> PropernessReport {
    let mut max_deviation: f64 = 0.0;
    let mut max_improvement = f64::NEG_INFINITY;
    let mut worst_p = f64::NAN;
    for &p in p_grid {
        let f = |q: f64| expected_loss(loss, p, q);
        let (q_star, l_star) = golden_section(&f, 0.0, 1.0, PROPERNESS_RESOLUTION);
        let deviation = (q_star - p).abs();
        let improvement = expected_loss(loss, p, p) - l_star;
        if deviation > max_deviation || worst_p.is_nan() {
            max_deviation = max_deviation.max(deviation);
            worst_p = p;
        }
        max_improvement = max_improvement.max(improvement);
    }
    let not_beaten = max_improvement <= 1e-10;
    let pass = if loss.is_smooth() {
        not_beaten && max_deviation <= PROPERNESS_TOLERANCE
    } else {
        not_beaten
    };
    PropernessReport {
        loss: loss.name.clone(),
        max_deviation,
        max_improvement,
        worst_p,
        pass,
    }
}

// --------------------------------------------------------------------------------------
// Structural invariants
// --------------------------------------------------------------------------------------

/// Numerical audit of the defining identities of a proper loss.
#[derive(Debug, Clone, PartialEq)]
pub struct LossAudit {
    /// `l0(0) = l1(1) = 0`.
    pub fair: bool,
    /// `q l1(q)` and `(1 - q) l0(1 - q)` at `q = 1e-6, 1e-8`.
    pub regularity_samples: [f64; 4],
    /// `max |G(p) - (p l1(p) + (1 - p) l0(p))|` on the grid.
    pub entropy_residual: f64,
    /// Largest finite-difference `G''` on the interior grid (should be <= 0).
    pub max_entropy_curvature: f64,
    /// Smooth losses: `max |l0'(p)/p - w(p)| / w(p)` and the same for `-l1'/(1-p)`.
    pub weight_relation_error: Option<f64>,
    /// Smooth losses: `max |G''(p) + w(p)| / w(p)` on `[0.05, 0.95]`.
    pub curvature_error: Option<f64>,
}

impl LossAudit {
    pub fn is_regular(&self) -> bool {
        let [a6, a8, b6, b8] = self.regularity_samples;
        a8 <= a6 + 1e-15 && b8 <= b6 + 1e-15 && a8 <= 1e-3 && b8 <= 1e-3
    }

    pub fn is_concave(&self) -> bool {
        self.max_entropy_curvature <= 1e-6
    }
}

/// Evaluate the fairness, regularity, entropy, concavity and weight identities.
pub fn audit(loss: &ProperLoss) -> LossAudit {
    let fair = loss.l0(0.0).abs() <= 1e-12 && loss.l1(1.0).abs() <= 1e-12;
    let regularity_samples = [
        1e-6 * loss.l1(1e-6),
        1e-8 * loss.l1(1e-8),
        1e-6 * loss.l0(1.0 - 1e-6),
        1e-8 * loss.l0(1.0 - 1e-8),
    ];
    let grid: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
    let entropy_residual = grid
        .iter()
        .map(|&p| (loss.entropy(p) - (p * loss.l1(p) + (1.0 - p) * loss.l0(p))).abs())
        .fold(0.0, f64::max);
    let g = |p: f64| loss.entropy(p);
    let max_entropy_curvature = grid
        .iter()
        .map(|&p| second_diff(&g, p, 1e-3))
        .fold(f64::NEG_INFINITY, f64::max);

    let (weight_relation_error, curvature_error) = if loss.is_smooth() {
        let h = 1e-4;
        let mut rel: f64 = 0.0;
        let mut curv: f64 = 0.0;
        for i in 0..=90 {
            let p = 0.05 + i as f64 * 0.01;
            let w = loss.weight(p).unwrap_or(f64::NAN);
            let dl0 = (loss.l0(p + h) - loss.l0(p - h)) / (2.0 * h);
            let dl1 = (loss.l1(p + h) - loss.l1(p - h)) / (2.0 * h);
            rel = rel.max(((dl0 / p) - w).abs() / w);
            rel = rel.max(((-dl1 / (1.0 - p)) - w).abs() / w);
            let g2 = second_diff(&g, p, 1e-5);
            curv = curv.max((g2 + w).abs() / w);
        }
        (Some(rel), Some(curv))
    } else {
        (None, None)
    };
    LossAudit {
        fair,
        regularity_samples,
        entropy_residual,
        max_entropy_curvature,
        weight_relation_error,
        curvature_error,
    }
}

// --------------------------------------------------------------------------------------
// Catalog
// --------------------------------------------------------------------------------------

/// The 0-1 loss: `l1 = 1{q < 1/2}`, `l0 = 1{q >= 1/2}`, with weight `2 delta(p - 1/2)`.
pub fn zero_one() -> ProperLoss {
    ProperLoss::new(
        "zero-one",
        scalar_fn(|q| if q >= 0.5 { 1.0 } else { 0.0 }),
        scalar_fn(|q| if q < 0.5 { 1.0 } else { 0.0 }),
        scalar_fn(|p| if p < 0.5 { p } else { 1.0 - p }),
        scalar_fn(|p| if p < 0.5 { 1.0 } else { -1.0 }),
        WeightSpec::point_mass(0.5, 2.0),
        Some(Arc::new(|p, q| {
            if p < 0.5 && q >= 0.5 {
                1.0 - 2.0 * p
            } else if p >= 0.5 && q < 0.5 {
                2.0 * p - 1.0
            } else {
                0.0
            }
        })),
    )
}

/// Quadratic (Brier) loss: `G = p(1 - p)`, `w = 2`, divergence `(p - q)^2`.
pub fn quadratic() -> ProperLoss {
    ProperLoss::new(
        "quadratic",
        scalar_fn(|q| q * q),
        scalar_fn(|q| (1.0 - q) * (1.0 - q)),
        scalar_fn(|p| p * (1.0 - p)),
        scalar_fn(|p| 1.0 - 2.0 * p),
        WeightSpec::from_density(scalar_fn(|_| 2.0), Some(scalar_fn(|_| 0.0))),
        Some(Arc::new(|p, q| (p - q) * (p - q))),
    )
}

/// Log loss: Shannon entropy in nats, `w = 1 / (p(1 - p))`, divergence = binary KL.
pub fn log_loss() -> ProperLoss {
    ProperLoss::new(
        "log",
        scalar_fn(|q| -(1.0 - q).max(CLAMP).ln()),
        scalar_fn(|q| -q.max(CLAMP).ln()),
        scalar_fn(|p| -xlogxy(p, 1.0) - xlogxy(1.0 - p, 1.0)),
        scalar_fn(|p| ((1.0 - p) / p).ln()),
        WeightSpec::from_density(
            scalar_fn(|p| 1.0 / (p * (1.0 - p))),
            Some(scalar_fn(|p| {
                let v = p * (1.0 - p);
                -(1.0 - 2.0 * p) / (v * v)
            })),
        ),
        Some(Arc::new(crate::divergence::kl_binary)),
    )
}

/// Boosting (exponential) loss: `G = 4 sqrt(p(1 - p))`, `w = (p(1 - p))^(-3/2)`.
pub fn boosting() -> ProperLoss {
    ProperLoss::new(
        "boosting",
        scalar_fn(|q| 2.0 * (q / (1.0 - q).max(CLAMP)).sqrt()),
        scalar_fn(|q| 2.0 * ((1.0 - q) / q.max(CLAMP)).sqrt()),
        scalar_fn(|p| 4.0 * (p * (1.0 - p)).max(0.0).sqrt()),
        scalar_fn(|p| 2.0 * (1.0 - 2.0 * p) / (p * (1.0 - p)).sqrt()),
        WeightSpec::from_density(
            scalar_fn(|p| (p * (1.0 - p)).powf(-1.5)),
            Some(scalar_fn(|p| {
                -1.5 * (1.0 - 2.0 * p) * (p * (1.0 - p)).powf(-2.5)
            })),
        ),
        Some(Arc::new(|p, q| {
            let q = clamp_prob(q);
            2.0 * (p * ((1.0 - q) / q).sqrt() + (1.0 - p) * (q / (1.0 - q)).sqrt())
                - 4.0 * (p * (1.0 - p)).max(0.0).sqrt()
        })),
    )
}

/// Weight `(c(1 - c))^(-1/2)`: a smooth loss that is convex in `q`, built by integration.
pub fn arcsine_weight() -> WeightSpec {
    WeightSpec::from_density(
        scalar_fn(|c| (c * (1.0 - c)).powf(-0.5)),
        Some(scalar_fn(|c| -0.5 * (1.0 - 2.0 * c) * (c * (1.0 - c)).powf(-1.5))),
    )
}

/// The custom smooth convex loss constructed from [`arcsine_weight`].
pub fn arcsine() -> ProperLoss {
    loss_from_weight("arcsine", arcsine_weight()).expect("arcsine weight is integrable")
}

/// The four classic closed-form losses: 0-1, quadratic, log and boosting.
pub fn catalog() -> Vec<ProperLoss> {
    vec![zero_one(), quadratic(), log_loss(), boosting()]
}

/// Catalog losses plus the shipped constructed loss, by name.
pub fn by_name(name: &str) -> Option<ProperLoss> {
    match name {
        "zero-one" | "zero_one" | "0-1" => Some(zero_one()),
        "quadratic" => Some(quadratic()),
        "log" => Some(log_loss()),
        "boosting" => Some(boosting()),
        "arcsine" => Some(arcsine()),
        _ => None,
    }
}

/// Names accepted by [`by_name`].
pub const LOSS_NAMES: [&str; 5] = ["zero-one", "quadratic", "log", "boosting", "arcsine"];
