//! Deviation bounds for sums of martingale differences in regular and
//! smooth spaces, their real-valued counterparts, log-MGF envelopes and
//! bound inversion.

mod bounds;
mod mgf;
mod profile;

pub use bounds::{
    gamma_star, invert_gamma, scalar_bound, scalar_deviation_level, second_moment_bound, tail_bound, Hypothesis,
    Regime, ScalarVariant, TailQuery, TailResult, Variant, ALPHA_HIGH, ALPHA_LOW,
};
pub use mgf::{mgf_envelope, MgfVariant};
pub use profile::SigmaProfile;
