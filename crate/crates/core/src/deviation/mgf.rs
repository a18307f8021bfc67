use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Hypothesis on a real increment `ψ` for the log-MGF envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MgfVariant {
    /// `E exp{|ψ/ν|^α} ≤ e` with `α ∈ (1, 2]`.
    LightTail,
    /// `E exp{ψ²/ν²} ≤ e`.
    Subgauss,
    /// `|ψ| ≤ ν`.
    Bounded,
}

impl FromStr for MgfVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "light_tail" => Ok(MgfVariant::LightTail),
            "subgauss" => Ok(MgfVariant::Subgauss),
            "bounded" => Ok(MgfVariant::Bounded),
            _ => Err(Error::Parse(format!("unknown mgf variant '{s}'"))),
        }
    }
}

/// Upper bound on `ln E exp{tψ}` given `E ψ ≤ mean_bound`.
///
/// * light tail: `t·m + 8(tν)² + (2^{α*}/α*)(tν)^{α*}`, `α* = α/(α−1)`;
/// * sub-Gaussian: `t·m + ¾t²ν²`;
/// * bounded: `t·m + t²ν²/2` (the usual Hoeffding form; the quadratic term
///   carries `t²`).
pub fn mgf_envelope<T: Scalar>(variant: MgfVariant, alpha: T, nu: T, mean_bound: T, t: T) -> Result<T> {
    if !(t >= T::zero()) {
        return Err(invalid(format!("t must be >= 0, got {t}")));
    }
    if !(nu > T::zero()) {
        return Err(invalid(format!("nu must be > 0, got {nu}")));
    }
    let tn = t * nu;
    let drift = t * mean_bound;
    Ok(match variant {
        MgfVariant::LightTail => {
            if !(alpha > T::one() && alpha <= T::lit(2.0)) {
                return Err(invalid(format!("light-tail envelope needs alpha in (1, 2], got {alpha}")));
            }
            if t == T::zero() {
                return Ok(T::zero());
            }
            let a_star = alpha / (alpha - T::one());
            // (2^{α*}/α*)(tν)^{α*} in log space: α* is large when α is near 1.
            let tail = (a_star * T::lit(2.0).ln() - a_star.ln() + a_star * tn.ln()).exp();
            drift + T::lit(8.0) * tn * tn + tail
        }
        MgfVariant::Subgauss => drift + T::lit(0.75) * tn * tn,
        MgfVariant::Bounded => drift + tn * tn / T::lit(2.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn examples() {
        let v = mgf_envelope(MgfVariant::LightTail, 1.5, 1.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(v, 8.0 + 8.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(mgf_envelope(MgfVariant::Subgauss, 2.0, 1.0, 0.0, 1.0).unwrap(), 0.75);
        for var in [MgfVariant::LightTail, MgfVariant::Subgauss, MgfVariant::Bounded] {
            assert_eq!(mgf_envelope(var, 1.5, 2.0, 0.3, 0.0).unwrap(), 0.0);
        }
        assert_relative_eq!(mgf_envelope(MgfVariant::Bounded, 2.0, 2.0, 0.5, 3.0).unwrap(), 1.5 + 18.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(mgf_envelope(MgfVariant::Bounded, 2.0, 1.0, 0.0, -1.0).is_err());
        assert!(mgf_envelope(MgfVariant::Bounded, 2.0, 0.0, 0.0, 1.0).is_err());
        assert!(mgf_envelope(MgfVariant::LightTail, 1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn near_one_does_not_overflow_for_small_t() {
        let v = mgf_envelope(MgfVariant::LightTail, 1.0f64 + 1e-9, 1.0, 0.0, 0.1).unwrap();
        assert!(v.is_finite());
        assert_relative_eq!(v, 0.08, max_relative = 1e-6);
    }

    #[test]
    fn dominates_coin_exactly() {
        // ψ = ±1: ln E exp{tψ} = ln cosh t.
        for k in 0..=100 {
            let t = k as f64 * 0.1;
            let exact = t.cosh().ln();
            assert!(exact <= mgf_envelope(MgfVariant::Bounded, 2.0, 1.0, 0.0, t).unwrap() + 1e-15);
            assert!(exact <= mgf_envelope(MgfVariant::LightTail, 1.25, 1.0, 0.0, t).unwrap());
        }
    }
}
