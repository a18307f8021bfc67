//! Trace functions `F(X) = Tr f(X)` on symmetric matrices and their first
//! and second derivatives through divided differences of `f` on the
//! spectrum.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Relative eigenvalue gap below which the divided difference is replaced by `f''`.
pub const DEGENERATE_GAP: f64 = 1e-8;

/// A scalar `C²` function with closed-form derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarFn<T: Scalar> {
    /// `Σ c_k t^k`, coefficients in ascending order.
    Polynomial(Vec<T>),
    Exp,
    /// `|t|^ρ` with `ρ ≥ 2`.
    AbsPower(T),
}

impl<T: Scalar> ScalarFn<T> {
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![T::zero(); k + 1];
        c[k] = T::one();
        ScalarFn::Polynomial(c)
    }

    pub fn value(&self, t: T) -> T {
        match self {
            ScalarFn::Polynomial(c) => c.iter().rev().fold(T::zero(), |acc, ck| acc * t + *ck),
            ScalarFn::Exp => t.exp(),
            ScalarFn::AbsPower(r) => t.abs().powf(*r),
        }
    }

    pub fn d1(&self, t: T) -> T {
        match self {
            ScalarFn::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(T::zero(), |acc, (k, ck)| acc * t + *ck * T::from_usize_lossy(k)),
            ScalarFn::Exp => t.exp(),
            ScalarFn::AbsPower(r) => *r * t.abs().powf(*r - T::one()) * t.signum(),
        }
    }

    pub fn d2(&self, t: T) -> T {
        match self {
            ScalarFn::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(2)
                .rev()
                .fold(T::zero(), |acc, (k, ck)| acc * t + *ck * T::from_usize_lossy(k * (k - 1))),
            ScalarFn::Exp => t.exp(),
            ScalarFn::AbsPower(r) => {
                let two = T::lit(2.0);
                if *r == two {
                    two
                } else {
                    *r * (*r - T::one()) * t.abs().powf(*r - two)
                }
            }
        }
    }
}

impl<T: Scalar> fmt::Display for ScalarFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::Polynomial(c) => {
                let terms: Vec<String> = c
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != T::zero())
                    .map(|(k, v)| match k {
                        0 => format!("{v}"),
                        1 => format!("{v}*t"),
                        _ => format!("{v}*t^{k}"),
                    })
                    .collect();
                if terms.is_empty() {
                    write!(f, "0")
                } else {
                    write!(f, "{}", terms.join(" + "))
                }
            }
            ScalarFn::Exp => write!(f, "exp(t)"),
            ScalarFn::AbsPower(r) => write!(f, "|t|^{r}"),
        }
    }
}

/// `f` on an open interval `Δ` together with constants `θ±, μ±` bracketing
/// its first divided difference:
/// `θ₋·(f''(a)+f''(b))/2 + μ₋ ≤ (f'(b)−f'(a))/(b−a) ≤ θ₊·(f''(a)+f''(b))/2 + μ₊`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFunction<T: Scalar> {
    pub f: ScalarFn<T>,
    pub delta: (T, T),
    pub theta_minus: T,
    pub theta_plus: T,
    pub mu_minus: T,
    pub mu_plus: T,
}

/// Points per axis of the construction-time grid check.
const GRID: usize = 161;
/// Half-width used to clip an unbounded interval for the grid check.
const CLIP: f64 = 6.0;

impl<T: Scalar> TraceFunction<T> {
    /// Builds the trace function, checking the divided-difference bracket on
    /// a dense grid over `Δ × Δ`.
    pub fn new(f: ScalarFn<T>, delta: (T, T), theta: (T, T), mu: (T, T)) -> Result<Self> {
        if !(delta.0 < delta.1) {
            return Err(invalid("interval must satisfy lo < hi"));
        }
        if let ScalarFn::AbsPower(r) = &f {
            if *r < T::lit(2.0) {
                return Err(invalid("|t|^rho needs rho >= 2"));
            }
        }
        let tf = Self { f, delta, theta_minus: theta.0, theta_plus: theta.1, mu_minus: mu.0, mu_plus: mu.1 };
        tf.check_bracket()?;
        Ok(tf)
    }

    /// `t³` on the real line; the bracket is tight with `θ± = 1, μ± = 0`.
    pub fn cube() -> Self {
        let (z, o) = (T::zero(), T::one());
        Self::new(ScalarFn::monomial(3), (-T::infinity(), T::infinity()), (o, o), (z, z)).expect("valid")
    }

    /// `t⁴` on the real line with `θ₋ = 1/3, θ₊ = 1, μ± = 0`.
    pub fn quartic() -> Self {
        let (z, o) = (T::zero(), T::one());
        Self::new(ScalarFn::monomial(4), (-T::infinity(), T::infinity()), (T::lit(1.0 / 3.0), o), (z, z))
            .expect("valid")
    }

    /// `exp(t)` with `θ₋ = μ± = 0, θ₊ = 1` (convexity of `exp`).
    pub fn exp() -> Self {
        let (z, o) = (T::zero(), T::one());
        Self::new(ScalarFn::Exp, (-T::infinity(), T::infinity()), (z, o), (z, z)).expect("valid")
    }

    /// `|t|^ρ` with `θ₊ = max[2/(ρ−1), 1]` and the other constants zero.
    pub fn abs_power(rho: T) -> Result<Self> {
        let (z, o) = (T::zero(), T::one());
        let theta_plus = if rho == T::lit(2.0) { o } else { (T::lit(2.0) / (rho - o)).max(o) };
        Self::new(ScalarFn::AbsPower(rho), (-T::infinity(), T::infinity()), (z, theta_plus), (z, z))
    }

    fn grid_points(&self) -> Vec<T> {
        let clip = T::lit(CLIP);
        let lo = self.delta.0.max(-clip);
        let hi = self.delta.1.min(clip);
        // Stay strictly inside the open interval.
        let pad = (hi - lo) * T::lit(1e-6);
        let (lo, hi) = (lo + pad, hi - pad);
        (0..GRID).map(|k| lo + (hi - lo) * T::from_usize_lossy(k) / T::from_usize_lossy(GRID - 1)).collect()
    }

    fn check_bracket(&self) -> Result<()> {
        let pts = self.grid_points();
        let half = T::lit(0.5);
        let tol = T::lit(1e-9).max(T::epsilon() * T::lit(64.0));
        for (i, &a) in pts.iter().enumerate() {
            for &b in &pts[i + 1..] {
                let dd = (self.f.d1(b) - self.f.d1(a)) / (b - a);
                let avg = (self.f.d2(a) + self.f.d2(b)) * half;
                let lower = self.theta_minus * avg + self.mu_minus;
                let upper = self.theta_plus * avg + self.mu_plus;
                let scale = T::one() + dd.abs() + avg.abs();
                if dd < lower - tol * scale || dd > upper + tol * scale {
                    return Err(invalid(format!(
                        "divided-difference bracket fails at a={a}, b={b}: {lower} <= {dd} <= {upper} is false"
                    )));
                }
            }
        }
        Ok(())
    }

    fn eigen(&self, x: &DMatrix<T>) -> Result<SymmetricEigen<T, nalgebra::Dyn>> {
        if !x.is_square() {
            return Err(invalid(format!("trace function needs a square matrix, got {}x{}", x.nrows(), x.ncols())));
        }
        let eig = SymmetricEigen::new(x.clone());
        for &l in eig.eigenvalues.iter() {
            if !(l > self.delta.0 && l < self.delta.1) {
                return Err(Error::Domain(format!(
                    "eigenvalue {l} outside ({}, {})",
                    self.delta.0, self.delta.1
                )));
            }
        }
        Ok(eig)
    }

    /// The matrix `Γ[f]` of first divided differences of `f'` on the spectrum.
    fn gamma(&self, lambda: &DVector<T>) -> DMatrix<T> {
        let n = lambda.len();
        let radius = lambda.iter().fold(T::zero(), |m, l| m.max(l.abs()));
        let gap = T::lit(DEGENERATE_GAP) * radius.max(T::epsilon());
        let d1: Vec<T> = lambda.iter().map(|&l| self.f.d1(l)).collect();
        DMatrix::from_fn(n, n, |s, t| {
            let (ls, lt) = (lambda[s], lambda[t]);
            if (ls - lt).abs() <= gap {
                self.f.d2(ls)
            } else {
                (d1[s] - d1[t]) / (ls - lt)
            }
        })
    }
}

fn sym<T: Scalar>(h: &DMatrix<T>) -> Result<()> {
    if !h.is_square() {
        return Err(invalid("direction must be square"));
    }
    Ok(())
}

/// `Tr f(X) = Σ_s f(λ_s)`.
pub fn trace_value<T: Scalar>(tf: &TraceFunction<T>, x: &DMatrix<T>) -> Result<T> {
    let eig = tf.eigen(x)?;
    Ok(eig.eigenvalues.iter().fold(T::zero(), |s, &l| s + tf.f.value(l)))
}

/// `∇ Tr f(X) = U·diag(f'(λ))·Uᵀ`.
pub fn trace_grad<T: Scalar>(tf: &TraceFunction<T>, x: &DMatrix<T>) -> Result<DMatrix<T>> {
    let eig = tf.eigen(x)?;
    let d = eig.eigenvalues.map(|l| tf.f.d1(l));
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose())
}

/// `D²F(X)[H,H] = Σ_{s,t} Γ_{st}[f]·Ĥ_{st}²` with `Ĥ = UᵀHU`.
pub fn trace_hessian_form<T: Scalar>(tf: &TraceFunction<T>, x: &DMatrix<T>, h: &DMatrix<T>) -> Result<T> {
    sym(h)?;
    let eig = tf.eigen(x)?;
    let hh = eig.eigenvectors.transpose() * h * &eig.eigenvectors;
    let gamma = tf.gamma(&eig.eigenvalues);
    Ok(gamma.zip_fold(&hh, T::zero(), |acc, g, v| acc + g * v * v))
}

/// The two sides of the trace-Hessian sandwich:
/// `θ₋·Tr(H f''(X) H) + μ₋·Tr(H²)` and `θ₊·Tr(H f''(X) H) + μ₊·Tr(H²)`.
pub fn hessian_sandwich<T: Scalar>(tf: &TraceFunction<T>, x: &DMatrix<T>, h: &DMatrix<T>) -> Result<(T, T)> {
    sym(h)?;
    let eig = tf.eigen(x)?;
    let hh = eig.eigenvectors.transpose() * h * &eig.eigenvectors;
    let mut weighted = T::zero();
    for s in 0..hh.nrows() {
        let row_sq = hh.row(s).iter().fold(T::zero(), |a, v| a + *v * *v);
        weighted += tf.f.d2(eig.eigenvalues[s]) * row_sq;
    }
    let tr_h2 = hh.iter().fold(T::zero(), |a, v| a + *v * *v);
    Ok((
        tf.theta_minus * weighted + tf.mu_minus * tr_h2,
        tf.theta_plus * weighted + tf.mu_plus * tr_h2,
    ))
}

/// Outcome of [`trace_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub function: String,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    /// Largest relative gap between `D²F(X)[H,H]` and a five-point finite difference.
    pub max_hessian_rel_err: f64,
    /// Largest relative gap between `⟨∇F(X), H⟩` and a central difference.
    pub max_grad_rel_err: f64,
    pub sandwich_violations: usize,
    pub passed: bool,
}

/// Tolerance on the finite-difference comparisons of [`trace_check`].
pub const TRACE_FD_TOL: f64 = 1e-5;

/// Compares the closed-form gradient and Hessian form of `Tr f(X)` with
/// finite differences on random symmetric `dim×dim` matrices, and checks the
/// Hessian sandwich on every sample.
pub fn trace_check(tf: &TraceFunction<f64>, dim: usize, trials: usize, seed: u64) -> Result<TraceReport> {
    if dim == 0 || trials == 0 {
        return Err(invalid("dim and trials must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (tf.delta.0.max(-CLIP), tf.delta.1.min(CLIP));
    let (mid, half) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
    let mut out = TraceReport {
        function: tf.f.to_string(),
        dim,
        trials,
        seed,
        max_hessian_rel_err: 0.0,
        max_grad_rel_err: 0.0,
        sandwich_violations: 0,
        passed: false,
    };
    let mut sym = |scale: f64| {
        let a = DMatrix::from_fn(dim, dim, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
        (&a + a.transpose()) * 0.5
    };
    for _ in 0..trials {
        // Keep the spectrum well inside Δ: shift to its centre and shrink.
        let x = sym(1.0);
        let r = SymmetricEigen::new(x.clone()).eigenvalues.amax();
        let x = DMatrix::identity(dim, dim) * mid + x * (0.5 * half / (3.0 * r).max(1.0)).min(1.0);
        let h = sym(1.0);
        let f = |t: f64| trace_value(tf, &(&x + &h * t));
        let step = 1e-3;
        let fd2 = (-f(2.0 * step)? + 16.0 * f(step)? - 30.0 * f(0.0)? + 16.0 * f(-step)? - f(-2.0 * step)?)
            / (12.0 * step * step);
        let d2 = trace_hessian_form(tf, &x, &h)?;
        let scale = d2.abs().max(fd2.abs()).max(1e-12);
        out.max_hessian_rel_err = out.max_hessian_rel_err.max((d2 - fd2).abs() / scale);
        let step = 1e-5;
        let fd1 = (f(step)? - f(-step)?) / (2.0 * step);
        let g = trace_grad(tf, &x)?.dot(&h);
        let scale = g.abs().max(fd1.abs()).max(1e-8);
        out.max_grad_rel_err = out.max_grad_rel_err.max((g - fd1).abs() / scale);
        let (lower, upper) = hessian_sandwich(tf, &x, &h)?;
        let slack = 1e-12 * (1.0 + d2.abs());
        if lower > d2 + slack || d2 > upper + slack {
            out.sandwich_violations += 1;
        }
    }
    out.passed =
        out.max_hessian_rel_err <= TRACE_FD_TOL && out.max_grad_rel_err <= TRACE_FD_TOL && out.sandwich_violations == 0;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn rand_sym(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
        (&a + a.transpose()) * 0.5
    }

    /// Five-point second difference of `t ↦ F(X + tH)` at 0.
    fn fd_second(tf: &TraceFunction<f64>, x: &DMatrix<f64>, h: &DMatrix<f64>, step: f64) -> f64 {
        let f = |t: f64| trace_value(tf, &(x + h * t)).unwrap();
        (-f(2.0 * step) + 16.0 * f(step) - 30.0 * f(0.0) + 16.0 * f(-step) - f(-2.0 * step)) / (12.0 * step * step)
    }

    #[test]
    fn square_has_constant_gamma() {
        let tf = TraceFunction::new(ScalarFn::monomial(2), (-f64::INFINITY, f64::INFINITY), (1.0, 1.0), (0.0, 0.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let x = rand_sym(&mut rng, 4, 1.0);
            let h = rand_sym(&mut rng, 4, 1.0);
            assert_relative_eq!(trace_hessian_form(&tf, &x, &h).unwrap(), 2.0 * (&h * &h).trace(), max_relative = 1e-12);
        }
    }

    #[test]
    fn cube_example() {
        let tf = TraceFunction::<f64>::cube();
        let x = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        // Finite-difference Hessian of Tr(X³) with step 1e-4.
        let fd = fd_second(&tf, &x, &h, 1e-4);
        assert_relative_eq!(fd, 18.0, max_relative = 1e-6);
        assert_relative_eq!(6.0 * (&x * &h * &h).trace(), 18.0);
        assert_relative_eq!(trace_hessian_form(&tf, &x, &h).unwrap(), 18.0, max_relative = 1e-12);
    }

    #[test]
    fn repeated_eigenvalues_use_second_derivative() {
        let tf = TraceFunction::<f64>::exp();
        let x = DMatrix::identity(3, 3) * 0.7;
        let h = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 2.0, -1.0, 0.5, 0.0, 0.5, 0.3]);
        let expected = 0.7f64.exp() * (&h * &h).trace();
        assert_relative_eq!(trace_hessian_form(&tf, &x, &h).unwrap(), expected, max_relative = 1e-12);
        assert_relative_eq!(fd_second(&tf, &x, &h, 1e-3), expected, max_relative = 1e-7);
    }

    #[test]
    fn grad_and_hessian_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for tf in [TraceFunction::<f64>::cube(), TraceFunction::quartic(), TraceFunction::exp()] {
            for _ in 0..20 {
                let x = rand_sym(&mut rng, 5, 1.0);
                let h = rand_sym(&mut rng, 5, 1.0);
                let g = trace_grad(&tf, &x).unwrap();
                let step = 1e-5;
                let fd1 = (trace_value(&tf, &(&x + &h * step)).unwrap() - trace_value(&tf, &(&x - &h * step)).unwrap()) / (2.0 * step);
                assert_relative_eq!(g.dot(&h), fd1, max_relative = 1e-6, epsilon = 1e-8);
                let exact = trace_hessian_form(&tf, &x, &h).unwrap();
                assert_relative_eq!(exact, fd_second(&tf, &x, &h, 1e-3), max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn sandwich_holds_for_quartic() {
        let tf = TraceFunction::<f64>::quartic();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..500 {
            let x = rand_sym(&mut rng, 5, 2.0);
            let h = rand_sym(&mut rng, 5, 1.0);
            let d2 = trace_hessian_form(&tf, &x, &h).unwrap();
            let (lo, hi) = hessian_sandwich(&tf, &x, &h).unwrap();
            assert!(lo <= d2 * (1.0 + 1e-12) + 1e-12 && d2 <= hi * (1.0 + 1e-12) + 1e-12, "{lo} {d2} {hi}");
        }
    }

    #[test]
    fn trace_check_passes_for_shipped_functions() {
        for tf in [TraceFunction::<f64>::cube(), TraceFunction::quartic(), TraceFunction::exp()] {
            let r = trace_check(&tf, 5, 200, 3).unwrap();
            assert!(r.passed, "{r:?}");
        }
        assert_eq!(TraceFunction::<f64>::quartic().f.to_string(), "1*t^4");
    }

    #[test]
    fn construction_rejects_bad_bracket() {
        // t⁴ does not satisfy the upper bracket with θ₊ = 0.5.
        let r = TraceFunction::new(ScalarFn::monomial(4), (-1.0, 1.0), (0.0, 0.5), (0.0, 0.0));
        assert!(r.is_err());
        assert!(TraceFunction::<f64>::abs_power(3.0).is_ok());
        assert!(TraceFunction::<f64>::abs_power(6.0).is_ok());
        assert!(TraceFunction::new(ScalarFn::Exp, (1.0, 1.0), (0.0, 1.0), (0.0, 0.0)).is_err());
    }

    #[test]
    fn domain_is_enforced() {
        let tf = TraceFunction::new(ScalarFn::monomial(3), (0.0, 10.0), (1.0, 1.0), (0.0, 0.0)).unwrap();
        let x = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -2.0]));
        assert!(matches!(trace_value(&tf, &x), Err(Error::Domain(_))));
    }

    #[test]
    fn polynomial_derivatives() {
        let f = ScalarFn::Polynomial(vec![1.0, -2.0, 0.5, 3.0]);
        assert_relative_eq!(f.value(2.0), 1.0 - 4.0 + 2.0 + 24.0);
        assert_relative_eq!(f.d1(2.0), -2.0 + 2.0 + 36.0);
        assert_relative_eq!(f.d2(2.0), 1.0 + 36.0);
    }
}
