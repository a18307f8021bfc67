use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::norm_core::lp_norm_of;
use crate::scalar::Scalar;

/// The scale sequence `σ₁, …, σ_N` of a light-tail condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr<T>", into = "ProfileRepr<T>")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SigmaProfile<T: Scalar> {
    values: Vec<T>,
    l2: T,
    linf: T,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
struct ProfileRepr<T: Scalar> {
    #[serde(with = "crate::numfmt::sig12_vec")]
    values: Vec<T>,
}

impl<T: Scalar> TryFrom<ProfileRepr<T>> for SigmaProfile<T> {
    type Error = Error;

    fn try_from(r: ProfileRepr<T>) -> Result<Self> {
        SigmaProfile::new(r.values)
    }
}

impl<T: Scalar> From<SigmaProfile<T>> for ProfileRepr<T> {
    fn from(p: SigmaProfile<T>) -> Self {
        ProfileRepr { values: p.values }
    }
}

impl<T: Scalar> SigmaProfile<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("sigma profile must have at least one entry"));
        }
        if let Some(bad) = values.iter().find(|v| !(**v > T::zero() && v.is_finite())) {
            return Err(invalid(format!("sigma entries must be positive and finite, got {bad}")));
        }
        let l2 = lp_norm_of(values.iter().copied(), 2.0);
        let linf = lp_norm_of(values.iter().copied(), f64::INFINITY);
        Ok(Self { values, l2, linf })
    }

    /// `N` copies of `v`.
    pub fn constant(v: T, n: usize) -> Result<Self> {
        Self::new(vec![v; n])
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn l2(&self) -> T {
        self.l2
    }

    pub fn linf(&self) -> T {
        self.linf
    }

    /// `‖σ‖_q` for `q ∈ [1, ∞]`; large `q` are handled by max-rescaling.
    pub fn lq(&self, q: f64) -> T {
        lp_norm_of(self.values.iter().copied(), q)
    }

    /// Leading `k` entries, for partial sums `S_k`.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        Self::new(self.values[..k.min(self.values.len())].to_vec())
    }
}
