//! Numerical checks of the decay, boundary Harnack, quotient, reflection,
//! explicit-solution and growth statements on profiles, barriers and grid
//! solutions.

mod decay;
mod explicit;
mod growth;
mod quotient;
mod reflect;

pub use decay::{
    bhi_band, check_bhi, check_decay, comparison_check, decay_bands, default_delta, harnack_ratio, DecayBands,
};
pub use explicit::{
    explicit_residual, flat_exponent, flat_solution, residual_order_report, sector_exponent, sector_profile,
    sector_report, ExplicitResidual, SectorProfile, RESIDUAL_CONSTANT_GROWTH, SECTOR_ZERO_TOL, VALUE_ACCURACY,
};
pub use growth::{
    drift_level, harmonic_measure_growth, measure_growth, uniqueness_drift, DriftLevel, GrowthFamily,
    GROWTH_EXPONENT_TOL, GROWTH_RATIO_SPREAD,
};
pub use quotient::{
    gradient_bound_check, gradient_bound_report, holder_quotient_estimate, holder_report, quotient_lemma_check,
    refinement_stable, GradientBound, HolderEstimate, QuotientLemmaInput, SecondField, Window,
    GRADIENT_STABILITY, HOLDER_BINS, HOLDER_DECADES, HOLDER_MAX_RESIDUAL_DECADES, HOLDER_PAIRS,
};
pub use reflect::{reflection_report, schwarz_reflect};
