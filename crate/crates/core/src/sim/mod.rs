//! Monte Carlo paths of vector-valued martingales and their comparison with
//! the analytic tail bounds.

mod ci;
mod run;
mod scheme;

pub use ci::binomial_upper_ci;
pub use run::{comparator_kappa, path_norms, run, substream, GammaRecord, L1Witness, SimConfig, SimReport, CONF_LEVEL};
pub use scheme::{gaussian_exponent, Certificate, IncrementSampler, Scheme};
