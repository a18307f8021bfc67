//! Norm families, their duals, gradients of squared norms, the symmetric
//! matrix embedding and Huber smoothing.

mod huber;
mod norms;
mod point;
mod space;

pub use huber::{huber, huber_check, huber_grad, HuberParams, HuberReport, HUBER_TOL};
pub use norms::{
    conjugate_exponent, dual_norm, dual_witness, embed_symmetric, grad_sq_norm, l1_norm, lp_norm_of, norm,
    schatten_norm_via_embedding, singular_values, RANK_TOL,
};
pub use point::{read_point, write_point, Point};
pub use space::{Shape, SpaceDescriptor};
pub(crate) use space::{lookup, parse_params, parse_usize, require};
