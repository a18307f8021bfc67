//! Huber smoothing of a norm: quadratic near the origin, linear far away.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::norms::{dual_norm, grad_sq_norm, norm};
use super::point::Point;
use super::space::SpaceDescriptor;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuberParams<T: Scalar> {
    beta: T,
}

impl<T: Scalar> HuberParams<T> {
    pub fn new(beta: T) -> Result<Self> {
        if !(beta > T::zero()) || !beta.is_finite() {
            return Err(invalid(format!("huber beta must be positive and finite, got {beta}")));
        }
        Ok(Self { beta })
    }

    pub fn beta(&self) -> T {
        self.beta
    }
}

/// `V(r)` as a function of the norm value `r = ‖ξ‖`.
fn profile<T: Scalar>(r: T) -> T {
    let half = T::lit(0.5);
    if r <= T::one() {
        half * r * r
    } else {
        r - half
    }
}

/// `V_β(ξ) = β·V(ξ/β)`.
pub fn huber<T: Scalar>(space: &SpaceDescriptor, params: &HuberParams<T>, xi: &Point<T>) -> Result<T> {
    let r = norm(space, xi)?;
    Ok(params.beta * profile(r / params.beta))
}

/// `V_β'(ξ) = V'(ξ/β)`; its dual norm never exceeds 1.
pub fn huber_grad<T: Scalar>(space: &SpaceDescriptor, params: &HuberParams<T>, xi: &Point<T>) -> Result<Point<T>> {
    let scaled = xi.scale(T::one() / params.beta);
    let r = norm(space, &scaled)?;
    let g = grad_sq_norm(space, &scaled)?;
    let half = T::lit(0.5);
    if r <= T::one() {
        Ok(g.scale(half))
    } else {
        Ok(g.scale(half / r))
    }
}

/// Outcome of [`huber_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HuberReport {
    pub space: String,
    /// Fixed `β`, or `None` when `β` was sampled per trial.
    pub beta: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Largest `|V_β(ξ+η) − V_β(ξ)| − ‖η‖`.
    pub max_lipschitz_excess: f64,
    /// Largest `⟨x, ξ⟩ − β/2 − V_β(ξ)` over sampled `x` with `‖x‖_* ≤ 1`.
    pub max_support_excess: f64,
    pub passed: bool,
}

/// Absolute slack of the sampled Huber inequalities.
pub const HUBER_TOL: f64 = 1e-10;

/// Samples `(ξ, η, β)` and checks that `V_β` is 1-Lipschitz in the norm and
/// that `⟨x, ξ⟩ ≤ β/2 + V_β(ξ)` whenever `‖x‖_* ≤ 1`. With `beta = None`,
/// `β` is drawn log-uniformly from `[10⁻², 10]`.
pub fn huber_check(space: &SpaceDescriptor, beta: Option<f64>, trials: usize, seed: u64) -> Result<HuberReport> {
    space.validate()?;
    if trials == 0 {
        return Err(invalid("trials must be positive"));
    }
    if let Some(b) = beta {
        HuberParams::new(b)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = space.shape();
    let gauss = |rng: &mut ChaCha8Rng, scale: f64| -> Result<Point<f64>> {
        let c: Vec<f64> = (0..space.dim()).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
        Point::from_coords(&shape, &c)
    };
    let mut out = HuberReport {
        space: space.to_string(),
        beta,
        trials,
        seed,
        max_lipschitz_excess: f64::NEG_INFINITY,
        max_support_excess: f64::NEG_INFINITY,
        passed: false,
    };
    for _ in 0..trials {
        let b = beta.unwrap_or_else(|| 10f64.powf(rng.random_range(-2.0..1.0)));
        let params = HuberParams::new(b)?;
        let (s_xi, s_eta) = (10f64.powf(rng.random_range(-2.0..1.5)), 10f64.powf(rng.random_range(-3.0..1.0)));
        let xi = gauss(&mut rng, s_xi)?;
        let eta = gauss(&mut rng, s_eta)?;
        let v = huber(space, &params, &xi)?;
        let lip = (huber(space, &params, &xi.add(&eta))? - v).abs() - norm(space, &eta)?;
        out.max_lipschitz_excess = out.max_lipschitz_excess.max(lip);
        let g = gauss(&mut rng, 1.0)?;
        let d = dual_norm(space, &g)?;
        if d > 0.0 {
            let x = g.scale(1.0 / d);
            out.max_support_excess = out.max_support_excess.max(x.dot(&xi) - b / 2.0 - v);
        }
    }
    out.passed = out.max_lipschitz_excess <= HUBER_TOL && out.max_support_excess <= HUBER_TOL;
    Ok(out)
}
