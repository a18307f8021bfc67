//! Dual blending of a smooth norm with a regular one.
//!
//! Given norms `π_*` and `‖·‖_*` on the dual space with
//! `π_*² ≥ ‖·‖_*² ≥ π_*²/μ`, the blend
//! `q_*(ξ) = √(γ·π_*²(ξ) + (1−γ)·‖ξ‖_*²)`, `γ = 1/(μ−1)`, satisfies
//! `q_*² ≥ ‖·‖_*² ≥ q_*²/2`. The primal norm `q` conjugate to `q_*` is
//! recovered numerically, and `√2·q` is then sandwiched between `‖·‖` and
//! `√2·‖·‖`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::norm_core::{dual_norm, norm, Point, Shape, SpaceDescriptor};

/// Largest ambient dimension for which the primal is recovered by search.
pub const MAX_BLEND_DIM: usize = 4;

const DIRECTIONS_PER_DIM: usize = 5000;
const HYPOTHESIS_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct BlendNorm {
    pi_star: SpaceDescriptor,
    base_star: SpaceDescriptor,
    mu: f64,
    gamma: f64,
    directions: Vec<Vec<f64>>,
}

/// Builds the blend of `pi_star` (dual of the smooth norm) and `base_star`
/// (dual of the regular norm) with distortion `mu`.
///
/// For `μ ≤ 2` no blending is needed and `q_* = π_*`. The hypothesis
/// `π_* ≥ base_* ≥ π_*/√μ` is checked on the sampled directions.
pub fn blend_smooth_norm(pi_star: &SpaceDescriptor, base_star: &SpaceDescriptor, mu: f64) -> Result<BlendNorm> {
    pi_star.validate()?;
    base_star.validate()?;
    if !(mu > 1.0 && mu.is_finite()) {
        return Err(invalid(format!("mu must be a finite real > 1, got {mu}")));
    }
    let n = match (pi_star.shape(), base_star.shape()) {
        (Shape::Vector(a), Shape::Vector(b)) if a == b => a,
        (a, b) => {
            return Err(Error::ShapeMismatch { expected: a.to_string(), found: b.to_string() });
        }
    };
    if n > MAX_BLEND_DIM {
        return Err(Error::Unsupported(format!(
            "primal recovery is limited to dimension <= {MAX_BLEND_DIM}, got {n}"
        )));
    }
    let gamma = if mu <= 2.0 { 1.0 } else { 1.0 / (mu - 1.0) };
    let mut rng = ChaCha8Rng::seed_from_u64(0xB1ED);
    let mut directions = Vec::with_capacity(DIRECTIONS_PER_DIM * n);
    if n == 1 {
        directions.push(vec![1.0]);
        directions.push(vec![-1.0]);
    } else if n == 2 {
        let k = DIRECTIONS_PER_DIM * 2;
        for i in 0..k {
            let t = std::f64::consts::TAU * i as f64 / k as f64;
            directions.push(vec![t.cos(), t.sin()]);
        }
    } else {
        for _ in 0..DIRECTIONS_PER_DIM * n {
            let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let r = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            directions.push(g.into_iter().map(|v| v / r).collect());
        }
    }
    let b = BlendNorm { pi_star: pi_star.clone(), base_star: base_star.clone(), mu, gamma, directions };
    for d in &b.directions {
        let xi = Point::vector(d.iter().copied());
        let p = norm(&b.pi_star, &xi)?;
        let s = norm(&b.base_star, &xi)?;
        if s > p * (1.0 + HYPOTHESIS_TOL) || s * s < p * p / mu * (1.0 - HYPOTHESIS_TOL) {
            return Err(invalid(format!(
                "hypothesis pi* >= base* >= pi*/sqrt(mu) fails along {d:?}: pi*={p}, base*={s}"
            )));
        }
    }
    Ok(b)
}

impl BlendNorm {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `q_*(ξ)` in closed form.
    pub fn q_star(&self, xi: &Point<f64>) -> Result<f64> {
        let p = norm(&self.pi_star, xi)?;
        let s = norm(&self.base_star, xi)?;
        Ok((self.gamma * p * p + (1.0 - self.gamma) * s * s).sqrt())
    }

    /// The regular primal norm `‖x‖`, dual to `base_*`.
    pub fn base_norm(&self, x: &Point<f64>) -> Result<f64> {
        dual_norm(&self.base_star, x)
    }

    fn ratio(&self, u: &[f64], x: &Point<f64>) -> Result<f64> {
        let xi = Point::vector(u.iter().copied());
        Ok(xi.dot(x) / self.q_star(&xi)?)
    }

    /// `q(x) = max{⟨ξ, x⟩ : q_*(ξ) ≤ 1}` by dense direction search followed
    /// by a shrinking random local refinement.
    pub fn q(&self, x: &Point<f64>) -> Result<f64> {
        x.check_shape(&self.pi_star)?;
        if x.is_zero() {
            return Ok(0.0);
        }
        let mut best = (f64::NEG_INFINITY, &self.directions[0]);
        for d in &self.directions {
            let r = self.ratio(d, x)?;
            if r > best.0 {
                best = (r, d);
            }
        }
        let (mut val, mut u) = (best.0, best.1.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
        let mut step = 0.05;
        let mut rounds = 0;
        while step > 1e-9 && rounds < 4000 {
            rounds += 1;
            let mut improved = false;
            for _ in 0..8 * u.len() {
                let cand: Vec<f64> = u.iter().map(|v| v + step * rng.sample::<f64, _>(StandardNormal)).collect();
                let r = self.ratio(&cand, x)?;
                if r > val {
                    val = r;
                    u = cand;
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        Ok(val)
    }

    /// `√2·q(x)`, the smooth norm with `‖x‖² ≤ (√2·q(x))² ≤ 2‖x‖²`.
    pub fn smooth_norm(&self, x: &Point<f64>) -> Result<f64> {
        Ok(std::f64::consts::SQRT_2 * self.q(x)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn randv(rng: &mut ChaCha8Rng, n: usize) -> Point<f64> {
        Point::vector((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
    }

    #[test]
    fn dual_sandwich() {
        let pi = SpaceDescriptor::euclidean(2).unwrap();
        let base = SpaceDescriptor::lp(2, f64::INFINITY).unwrap();
        let b = blend_smooth_norm(&pi, &base, 4.0).unwrap();
        assert_relative_eq!(b.gamma(), 1.0 / 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let xi = randv(&mut rng, 2);
            let q2 = b.q_star(&xi).unwrap().powi(2);
            let s2 = norm(&base, &xi).unwrap().powi(2);
            assert!(q2 >= s2 * (1.0 - 1e-12) && s2 >= q2 / 2.0 * (1.0 - 1e-12));
        }
    }

    #[test]
    fn degenerate_blend_is_the_base() {
        let s = SpaceDescriptor::lp(3, 4.0).unwrap();
        let b = blend_smooth_norm(&s, &s, 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let xi = randv(&mut rng, 3);
            assert_relative_eq!(b.q_star(&xi).unwrap(), norm(&s, &xi).unwrap(), max_relative = 1e-14);
        }
        // q is then the dual norm of ℓ₄, that is ℓ_{4/3}.
        let x = Point::vector([1.0, -2.0, 0.5]);
        assert_relative_eq!(b.q(&x).unwrap(), dual_norm(&s, &x).unwrap(), max_relative = 1e-6);
    }

    #[test]
    fn primal_sandwich_on_l1() {
        let pi = SpaceDescriptor::euclidean(2).unwrap();
        let base = SpaceDescriptor::lp(2, f64::INFINITY).unwrap();
        let b = blend_smooth_norm(&pi, &base, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let x = randv(&mut rng, 2);
            let s2 = b.smooth_norm(&x).unwrap().powi(2);
            let n2 = b.base_norm(&x).unwrap().powi(2);
            assert!(s2 >= n2 * (1.0 - 2e-2) && s2 <= 2.0 * n2 * (1.0 + 2e-2), "{s2} {n2}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let e3 = SpaceDescriptor::euclidean(3).unwrap();
        let e5 = SpaceDescriptor::euclidean(5).unwrap();
        assert!(matches!(blend_smooth_norm(&e5, &e5, 3.0), Err(Error::Unsupported(_))));
        assert!(blend_smooth_norm(&e3, &e5, 3.0).is_err());
        assert!(blend_smooth_norm(&e3, &e3, 1.0).is_err());
        // ℓ₂ exceeds ℓ∞, so the hypothesis fails.
        let l1ish = SpaceDescriptor::lp(3, f64::INFINITY).unwrap();
        assert!(blend_smooth_norm(&l1ish, &e3, 9.0).is_err());
    }
}
