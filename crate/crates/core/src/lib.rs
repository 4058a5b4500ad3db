//! Proper binary losses, their Bregman divergences, and numerical checks of the
//! statement that KL divergence dominates, up to a constant, the regret of every smooth
//! proper loss that is convex in its forecast, and every separable Bregman divergence
//! that is convex in its second argument.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`loss`] | proper losses, entropies, weight functions, construction from a weight |
//! | [`divergence`] | binary regret, separable Bregman, generalized KL, TV, chi-square |
//! | [`bounds`] | normalization thresholds, grid and Monte-Carlo verification, local expansion |
//! | [`optimize`] | simplex-constrained minimization for the two experiments |
//! | [`oracle`] | brute-force lattice references and serialized fixtures |
//! | [`experiment`] | parameter sweeps producing [`experiment::ExperimentCurve`]s |
//!
//! Logarithms are natural throughout.

pub mod bounds;
pub mod divergence;
pub mod error;
pub mod experiment;
pub mod loss;
pub mod numeric;
pub mod optimize;
pub mod oracle;

pub use divergence::{
    bregman_binary, bregman_separable, chi_square, half_squared_error, kl_binary, kl_generalized,
    pinsker_rhs,
    total_variation, BregmanGenerator, Divergence, ProbVector, SeparableBregman,
};
pub use error::{Error, Result};
pub use loss::{
    catalog, check_properness, expected_loss, loss_from_weight, savage_expected_loss,
    ProperLoss, WeightSpec,
};
