//! Concentration bounds, the tail quantity `Λ`, regimes and predicted orders.

pub mod inequalities;
pub mod lambda;
pub mod regime;
pub mod verify;

pub use inequalities::{
    check_binomial_sandwich, chernoff_bound, entropy, hypergeom_tail_lower_check, janson_bound,
    HypergeomTailCheck, Sandwich,
};
pub use lambda::{lambda, LambdaValue};
pub use regime::{
    classify_regime, predicted_disc_via_lambda, right_size, upper_envelope, Envelope,
    EnvelopeBranch, Regime, RegimeParams, UnifiedPrediction,
};
pub use verify::{concentration_monte_carlo, hypergeom_tail_grid, sandwich_grid, BoundCheck};
