//! Regularity constants, sampled smoothness verification and the trace
//! function calculus on symmetric matrices.

mod blend;
mod golden;
mod kappa;
mod trace;
mod verify;

pub use golden::golden_section_min;
pub use kappa::{
    display_bound, kappa_lp, kappa_product, kappa_schatten, kappa_space, kappa_sum, rho_cap, smooth_constant,
    CertificateSource,
    RegularityCertificate,
};
pub use trace::{
    hessian_sandwich, trace_check, trace_grad, trace_hessian_form, trace_value, ScalarFn, TraceFunction, TraceReport,
    DEGENERATE_GAP, TRACE_FD_TOL,
};
pub use blend::{blend_smooth_norm, BlendNorm, MAX_BLEND_DIM};
pub use verify::{char_check, splitmix64, verify_smoothness, CharReport, SmoothSurrogate, SmoothnessReport, SAMPLE_TOL};
