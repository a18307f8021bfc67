use nalgebra::{DMatrix, DVector, SVD};

use super::point::Point;
use super::space::SpaceDescriptor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative cutoff below which singular values count as zero in gradients.
pub const RANK_TOL: f64 = 1e-12;

/// Conjugate exponent `p* = p/(p−1)`, with `p* = 1` at `p = ∞`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// `ℓ_p` norm of a sequence of reals, `p ∈ [1, ∞]`.
///
/// Coordinates are rescaled by their largest magnitude before powering, so
/// large exponents neither overflow nor underflow.
pub fn lp_norm_of<T: Scalar>(values: impl Iterator<Item = T> + Clone, p: f64) -> T {
    let big = values.clone().fold(T::zero(), |m, x| m.max(x.abs()));
    if p.is_infinite() || big == T::zero() {
        return big;
    }
    if p == 1.0 {
        return values.fold(T::zero(), |s, x| s + x.abs());
    }
    let pt = T::lit(p);
    let sum = values.fold(T::zero(), |s, x| s + (x.abs() / big).powf(pt));
    big * sum.powf(T::one() / pt)
}

/// `ℓ₁` norm of a vector; used by the counterexample witness.
pub fn l1_norm<T: Scalar>(x: &DVector<T>) -> T {
    x.iter().fold(T::zero(), |s, v| s + v.abs())
}

pub fn singular_values<T: Scalar>(x: &DMatrix<T>) -> DVector<T> {
    x.clone().singular_values()
}

fn vector_of<'a, T: Scalar>(x: &'a Point<T>, space: &SpaceDescriptor) -> Result<&'a DVector<T>> {
    x.check_shape(space)?;
    x.as_vector().ok_or_else(|| Error::ShapeMismatch { expected: space.shape().to_string(), found: x.shape().to_string() })
}

fn matrix_of<'a, T: Scalar>(x: &'a Point<T>, space: &SpaceDescriptor) -> Result<&'a DMatrix<T>> {
    x.check_shape(space)?;
    x.as_matrix().ok_or_else(|| Error::ShapeMismatch { expected: space.shape().to_string(), found: x.shape().to_string() })
}

fn block_of<'a, T: Scalar>(x: &'a Point<T>, space: &SpaceDescriptor) -> Result<&'a [Point<T>]> {
    x.check_shape(space)?;
    match x {
        Point::Block(c) => Ok(c),
        _ => Err(Error::ShapeMismatch { expected: space.shape().to_string(), found: x.shape().to_string() }),
    }
}

/// `‖x‖` in the given space.
pub fn norm<T: Scalar>(space: &SpaceDescriptor, x: &Point<T>) -> Result<T> {
    match space {
        SpaceDescriptor::Euclidean { .. } => Ok(lp_norm_of(vector_of(x, space)?.iter().copied(), 2.0)),
        SpaceDescriptor::Lp { p, .. } => Ok(lp_norm_of(vector_of(x, space)?.iter().copied(), *p)),
        SpaceDescriptor::Schatten { p, .. } => {
            let s = singular_values(matrix_of(x, space)?);
            Ok(lp_norm_of(s.iter().copied(), *p))
        }
        SpaceDescriptor::BlockLp { children, p } => {
            let parts = block_of(x, space)?;
            let inner = children.iter().zip(parts).map(|(c, xi)| norm(c, xi)).collect::<Result<Vec<T>>>()?;
            Ok(lp_norm_of(inner.into_iter(), *p))
        }
        SpaceDescriptor::SumOfNorms { children } => {
            x.check_shape(space)?;
            children.iter().try_fold(T::zero(), |s, c| Ok(s + norm(c, x)?))
        }
    }
}

/// `‖ξ‖_*`, the norm dual to `space`'s norm.
pub fn dual_norm<T: Scalar>(space: &SpaceDescriptor, xi: &Point<T>) -> Result<T> {
    match space {
        SpaceDescriptor::Euclidean { .. } => norm(space, xi),
        SpaceDescriptor::Lp { p, .. } => Ok(lp_norm_of(vector_of(xi, space)?.iter().copied(), conjugate_exponent(*p))),
        SpaceDescriptor::Schatten { p, .. } => {
            let s = singular_values(matrix_of(xi, space)?);
            Ok(lp_norm_of(s.iter().copied(), conjugate_exponent(*p)))
        }
        SpaceDescriptor::BlockLp { children, p } => {
            let parts = block_of(xi, space)?;
            let inner = children.iter().zip(parts).map(|(c, xi)| dual_norm(c, xi)).collect::<Result<Vec<T>>>()?;
            Ok(lp_norm_of(inner.into_iter(), conjugate_exponent(*p)))
        }
        SpaceDescriptor::SumOfNorms { .. } => {
            Err(Error::Unsupported("dual of a sum of norms has no closed form (infimal convolution)".into()))
        }
    }
}

fn nonsmooth(space: &SpaceDescriptor) -> Error {
    Error::NonSmooth(format!(
        "squared norm of {space} is not differentiable; use a finite surrogate exponent (see the kappa certificate's rho)"
    ))
}

/// Gradient of `‖x‖²`, an element of the dual space.
///
/// The gradient at the origin is zero.
pub fn grad_sq_norm<T: Scalar>(space: &SpaceDescriptor, x: &Point<T>) -> Result<Point<T>> {
    let two = T::lit(2.0);
    match space {
        SpaceDescriptor::Euclidean { .. } => Ok(Point::Vector(vector_of(x, space)?.scale(two))),
        SpaceDescriptor::Lp { p, .. } => {
            if p.is_infinite() {
                return Err(nonsmooth(space));
            }
            let v = vector_of(x, space)?;
            let r = lp_norm_of(v.iter().copied(), *p);
            if r == T::zero() {
                return Ok(Point::Vector(DVector::zeros(v.len())));
            }
            let q = T::lit(p - 1.0);
            Ok(Point::Vector(v.map(|xi| two * r * (xi.abs() / r).powf(q) * xi.signum())))
        }
        SpaceDescriptor::Schatten { p, .. } => {
            if p.is_infinite() {
                return Err(nonsmooth(space));
            }
            let m = matrix_of(x, space)?;
            Ok(Point::Matrix(schatten_grad_sq(m, *p)))
        }
        SpaceDescriptor::BlockLp { children, p } => {
            if p.is_infinite() {
                return Err(nonsmooth(space));
            }
            let parts = block_of(x, space)?;
            let inner = children.iter().zip(parts).map(|(c, xi)| norm(c, xi)).collect::<Result<Vec<T>>>()?;
            let r = lp_norm_of(inner.iter().copied(), *p);
            let q = T::lit(p - 2.0);
            let mut out = Vec::with_capacity(parts.len());
            for ((child, xi), ci) in children.iter().zip(parts).zip(inner) {
                let g = grad_sq_norm(child, xi)?;
                if r == T::zero() || ci == T::zero() {
                    out.push(Point::zeros(&child.shape()));
                } else {
                    out.push(g.scale((ci / r).powf(q)));
                }
            }
            Ok(Point::Block(out))
        }
        SpaceDescriptor::SumOfNorms { .. } => {
            Err(Error::Unsupported("gradient of a sum of norms is not exposed (nonsmooth points have no convention)".into()))
        }
    }
}

/// `∇|X|_p²` via `X = U·diag(s)·Vᵀ`: `2r·U·diag((s/r)^{p−1})·Vᵀ` with `r = ‖s‖_p`.
fn schatten_grad_sq<T: Scalar>(x: &DMatrix<T>, p: f64) -> DMatrix<T> {
    let svd = SVD::new(x.clone(), true, true);
    let (u, vt) = (svd.u.as_ref().expect("u requested"), svd.v_t.as_ref().expect("v_t requested"));
    let s = &svd.singular_values;
    let r = lp_norm_of(s.iter().copied(), p);
    if r == T::zero() {
        return DMatrix::zeros(x.nrows(), x.ncols());
    }
    let smax = s.iter().fold(T::zero(), |m, v| m.max(*v));
    let cutoff = smax * T::lit(RANK_TOL);
    let q = T::lit(p - 1.0);
    let two = T::lit(2.0);
    let weights = s.map(|si| if si <= cutoff { T::zero() } else { two * r * (si / r).powf(q) });
    let mut scaled_u = u.clone();
    for (j, w) in weights.iter().enumerate() {
        scaled_u.column_mut(j).scale_mut(*w);
    }
    scaled_u * vt
}

/// A unit-dual-norm `ξ` with `⟨ξ, x⟩ = ‖x‖` (the Hölder-equality witness).
pub fn dual_witness<T: Scalar>(space: &SpaceDescriptor, x: &Point<T>) -> Result<Point<T>> {
    let r = norm(space, x)?;
    if r == T::zero() {
        return Ok(Point::zeros(&space.shape()));
    }
    match space {
        SpaceDescriptor::Lp { p, .. } if p.is_infinite() => {
            let v = vector_of(x, space)?;
            let k = v.iamax();
            let mut w = DVector::zeros(v.len());
            w[k] = v[k].signum();
            Ok(Point::Vector(w))
        }
        SpaceDescriptor::Schatten { p, .. } if p.is_infinite() => {
            let svd = SVD::new(matrix_of(x, space)?.clone(), true, true);
            let (u, vt) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
            let k = svd.singular_values.iamax();
            Ok(Point::Matrix(u.column(k) * vt.row(k)))
        }
        SpaceDescriptor::BlockLp { children, p } => {
            // Child witnesses weighted by the `ℓ_{p*}` witness of the child norms.
            let parts = block_of(x, space)?;
            let inner = children.iter().zip(parts).map(|(c, xi)| norm(c, xi)).collect::<Result<Vec<T>>>()?;
            let k = inner.iter().enumerate().fold(0, |b, (i, c)| if *c > inner[b] { i } else { b });
            let mut out = Vec::with_capacity(parts.len());
            for (i, ((child, xi), ci)) in children.iter().zip(parts).zip(&inner).enumerate() {
                let weight = if p.is_infinite() {
                    if i == k { T::one() } else { T::zero() }
                } else {
                    (*ci / r).powf(T::lit(p - 1.0))
                };
                out.push(dual_witness(child, xi)?.scale(weight));
            }
            Ok(Point::Block(out))
        }
        _ => Ok(grad_sq_norm(space, x)?.scale(T::one() / (T::lit(2.0) * r))),
    }
}

/// `S(X) = [[0, X], [Xᵀ, 0]]`, an `(m+n)×(m+n)` symmetric matrix.
pub fn embed_symmetric<T: Scalar>(x: &DMatrix<T>) -> DMatrix<T> {
    let (m, n) = x.shape();
    let mut s = DMatrix::zeros(m + n, m + n);
    s.view_mut((0, m), (m, n)).copy_from(x);
    s.view_mut((m, 0), (n, m)).copy_from(&x.transpose());
    s
}

/// `|X|_ρ` computed from the spectrum of the symmetric embedding,
/// `2^{−1/ρ}·‖λ(S(X))‖_ρ`.
pub fn schatten_norm_via_embedding<T: Scalar>(x: &DMatrix<T>, rho: f64) -> T {
    let eig = embed_symmetric(x).symmetric_eigenvalues();
    let full = lp_norm_of(eig.iter().copied(), rho);
    if rho.is_infinite() {
        full
    } else {
        full * T::lit(2.0f64.powf(-1.0 / rho))
    }
}
