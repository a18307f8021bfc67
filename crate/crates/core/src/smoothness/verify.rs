//! Sampled checks of the smoothness inequality, the compatibility sandwich
//! and the equivalent first-order characterizations.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kappa::RegularityCertificate;
use super::trace::{trace_grad, trace_value, TraceFunction};
use crate::error::{invalid, Error, Result};
use crate::norm_core::{dual_norm, embed_symmetric, grad_sq_norm, norm, Point, Shape, SpaceDescriptor};

/// Relative slack allowed on sampled inequalities.
pub const SAMPLE_TOL: f64 = 1e-7;

/// Number of independent sampling chunks; each has its own substream so the
/// outcome does not depend on how rayon schedules them.
const CHUNKS: u64 = 64;

/// `splitmix64` finalizer, used to derive substream seeds.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn chunk_rng(seed: u64, tag: u64, chunk: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(tag ^ splitmix64(chunk))))
}

/// The smooth norm whose square is tested: the space itself with its
/// exponent replaced by `ρ`.
#[derive(Debug, Clone)]
pub enum SmoothSurrogate {
    /// A descriptor whose squared norm is differentiable (`p < ∞`).
    Native(SpaceDescriptor),
    /// Schatten-`ρ` evaluated as `(Tr|S(X)|^ρ / 2)^{2/ρ}` through the symmetric embedding.
    Embedded { m: usize, n: usize, tf: TraceFunction<f64> },
    /// Block-`ℓ_ρ` over child surrogates.
    Block { children: Vec<SmoothSurrogate>, rho: f64 },
}

impl SmoothSurrogate {
    /// Surrogate for `space` at exponent `rho`.
    pub fn for_space(space: &SpaceDescriptor, rho: f64) -> Result<Self> {
        if !(rho >= 2.0 && rho.is_finite()) {
            return Err(invalid(format!("smooth exponent must be finite and >= 2, got {rho}")));
        }
        Ok(match space {
            SpaceDescriptor::Euclidean { .. } => SmoothSurrogate::Native(space.clone()),
            SpaceDescriptor::Lp { n, p } => SmoothSurrogate::Native(SpaceDescriptor::lp(*n, rho.min(*p))?),
            SpaceDescriptor::Schatten { m, n, p } => {
                SmoothSurrogate::Embedded { m: *m, n: *n, tf: TraceFunction::abs_power(rho.min(*p))? }
            }
            SpaceDescriptor::BlockLp { children, p } => {
                // Children are replaced by their own ρ-surrogates only when
                // they are not smooth already.
                let kids = children
                    .iter()
                    .map(|c| {
                        if c.is_smooth() {
                            Ok(SmoothSurrogate::Native(c.clone()))
                        } else {
                            let cert = super::kappa::kappa_space(c)?;
                            SmoothSurrogate::for_space(c, cert.smooth_exponent_rho)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                SmoothSurrogate::Block { children: kids, rho: rho.min(*p) }
            }
            SpaceDescriptor::SumOfNorms { .. } => {
                return Err(Error::Unsupported("no smooth surrogate for a sum of norms".into()))
            }
        })
    }

    /// Squared surrogate norm.
    pub fn sq(&self, x: &Point<f64>) -> Result<f64> {
        match self {
            SmoothSurrogate::Native(s) => norm(s, x).map(|r| r * r),
            SmoothSurrogate::Embedded { tf, .. } => {
                let big = embedded(x)?;
                let rho = rho_of(tf);
                // Scale out the largest entry so |t|^ρ stays representable.
                let scale = big.amax();
                if scale == 0.0 {
                    return Ok(0.0);
                }
                let t = trace_value(tf, &(big / scale))?;
                Ok(scale * scale * (t / 2.0).powf(2.0 / rho))
            }
            SmoothSurrogate::Block { children, rho } => {
                let parts = block_parts(x, children.len())?;
                let inner = children.iter().zip(parts).map(|(c, xi)| c.sq(xi).map(f64::sqrt)).collect::<Result<Vec<_>>>()?;
                let r = crate::norm_core::lp_norm_of(inner.into_iter(), *rho);
                Ok(r * r)
            }
        }
    }

    /// `p(x+y) − p(x)`, evaluated without the cancellation of a plain
    /// difference when `‖y‖ ≪ ‖x‖` (except for the embedded Schatten case).
    pub fn sq_increment(&self, x: &Point<f64>, y: &Point<f64>) -> Result<f64> {
        match self {
            SmoothSurrogate::Native(SpaceDescriptor::Euclidean { .. }) => Ok(2.0 * x.dot(y) + y.dot(y)),
            SmoothSurrogate::Native(SpaceDescriptor::Lp { p, .. }) if p.is_finite() => {
                let m = x.max_abs().max(y.max_abs());
                if m == 0.0 {
                    return Ok(0.0);
                }
                let (xs, ys) = (x.coords(), y.coords());
                let e = p / 2.0;
                let (mut s0, mut ds) = (0.0, 0.0);
                for (a, b) in xs.iter().zip(&ys) {
                    let (a, b) = (a / m, b / m);
                    let q = a * a;
                    s0 += q.powf(e);
                    ds += pow_increment(q, b * (2.0 * a + b), e);
                }
                Ok(m * m * pow_increment(s0, ds, 2.0 / p))
            }
            SmoothSurrogate::Block { children, rho } => {
                let (xp, yp) = (block_parts(x, children.len())?, block_parts(y, children.len())?);
                let e = rho / 2.0;
                let (mut s0, mut ds) = (0.0, 0.0);
                for ((c, xi), yi) in children.iter().zip(xp).zip(yp) {
                    let q = c.sq(xi)?;
                    s0 += q.powf(e);
                    ds += pow_increment(q, c.sq_increment(xi, yi)?, e);
                }
                Ok(pow_increment(s0, ds, 2.0 / rho))
            }
            _ => Ok(self.sq(&x.add(y))? - self.sq(x)?),
        }
    }

    /// Gradient of the squared surrogate norm.
    pub fn grad_sq(&self, x: &Point<f64>) -> Result<Point<f64>> {
        match self {
            SmoothSurrogate::Native(s) => grad_sq_norm(s, x),
            SmoothSurrogate::Embedded { m, n, tf } => {
                let big = embedded(x)?;
                let scale = big.amax();
                if scale == 0.0 {
                    return Ok(Point::Matrix(DMatrix::zeros(*m, *n)));
                }
                let rho = rho_of(tf);
                let unit = big / scale;
                let t = trace_value(tf, &unit)?;
                let g = trace_grad(tf, &unit)?;
                // d/dX (F(S(X))/2)^{2/ρ} = (2/ρ)(F/2)^{2/ρ−1}·G₁₂, with G₁₂ the
                // upper-right block of ∇F; rescaled back by `scale`.
                let coef = (2.0 / rho) * (t / 2.0).powf(2.0 / rho - 1.0) * scale;
                Ok(Point::Matrix(g.view((0, *m), (*m, *n)).into_owned() * coef))
            }
            SmoothSurrogate::Block { children, rho } => {
                let parts = block_parts(x, children.len())?;
                let inner = children.iter().zip(parts).map(|(c, xi)| c.sq(xi).map(f64::sqrt)).collect::<Result<Vec<_>>>()?;
                let r = crate::norm_core::lp_norm_of(inner.iter().copied(), *rho);
                let mut out = Vec::with_capacity(parts.len());
                for ((c, xi), ci) in children.iter().zip(parts).zip(inner) {
                    if r == 0.0 || ci == 0.0 {
                        out.push(Point::zeros(&xi.shape()));
                    } else {
                        out.push(c.grad_sq(xi)?.scale((ci / r).powf(rho - 2.0)));
                    }
                }
                Ok(Point::Block(out))
            }
        }
    }
}

/// `(q + dq)^e − q^e` for `q ≥ 0`, accurate when `|dq| ≪ q`.
fn pow_increment(q: f64, dq: f64, e: f64) -> f64 {
    if q > 0.0 && dq.abs() < q {
        q.powf(e) * (e * (dq / q).ln_1p()).exp_m1()
    } else {
        (q + dq).max(0.0).powf(e) - q.powf(e)
    }
}

fn rho_of(tf: &TraceFunction<f64>) -> f64 {
    match tf.f {
        super::trace::ScalarFn::AbsPower(r) => r,
        _ => unreachable!("embedded surrogates use |t|^rho"),
    }
}

fn embedded(x: &Point<f64>) -> Result<DMatrix<f64>> {
    x.as_matrix().map(embed_symmetric).ok_or_else(|| invalid("expected a matrix point"))
}

fn block_parts(x: &Point<f64>, k: usize) -> Result<&[Point<f64>]> {
    match x {
        Point::Block(p) if p.len() == k => Ok(p),
        _ => Err(invalid("expected a block point")),
    }
}

/// Coordinates (in flattened order) that the sparse samplers may use:
/// every vector entry, and the diagonal of each matrix.
fn sparse_slots(shape: &Shape, offset: &mut usize, out: &mut Vec<usize>) {
    match shape {
        Shape::Vector(n) => {
            out.extend(*offset..*offset + n);
            *offset += n;
        }
        Shape::Matrix(m, n) => {
            out.extend((0..*m.min(n)).map(|k| *offset + k * n + k));
            *offset += m * n;
        }
        Shape::Block(children) => children.iter().for_each(|c| sparse_slots(c, offset, out)),
    }
}

/// Draws `(x, y)` test pairs: Gaussian pairs, two-spike points with a small
/// antisymmetric perturbation (the extremal directions for `ℓ_ρ`), flat sign
/// vectors, and Gaussian points with a single-spike perturbation.
struct PairSampler {
    shape: Shape,
    dim: usize,
    slots: Vec<usize>,
}

impl PairSampler {
    fn new(shape: Shape) -> Self {
        let mut slots = Vec::new();
        sparse_slots(&shape, &mut 0, &mut slots);
        let dim = Point::<f64>::zeros(&shape).coords().len();
        Self { shape, dim, slots }
    }

    fn point(&self, c: Vec<f64>) -> Point<f64> {
        Point::from_coords(&self.shape, &c).expect("sampler builds full coordinate vectors")
    }

    fn gauss(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.dim).map(|_| rng.sample(StandardNormal)).collect()
    }

    fn sign(rng: &mut ChaCha8Rng) -> f64 {
        if rng.random::<bool>() {
            1.0
        } else {
            -1.0
        }
    }

    fn pair(&self, kind: u64, rng: &mut ChaCha8Rng) -> (Point<f64>, Point<f64>) {
        let scale = 10f64.powf(rng.random_range(-3.0..0.5));
        match kind % 4 {
            0 => {
                let x = self.gauss(rng);
                let y: Vec<f64> = self.gauss(rng).into_iter().map(|v| v * scale).collect();
                (self.point(x), self.point(y))
            }
            1 => {
                let mut x = vec![0.0; self.dim];
                let mut y = vec![0.0; self.dim];
                let eps = 10f64.powf(rng.random_range(-3.0..-0.5));
                let k = self.slots.len();
                let a = rng.random_range(0..k);
                let (si, sj) = (Self::sign(rng), Self::sign(rng));
                let i = self.slots[a];
                x[i] = si;
                y[i] = eps * si;
                if k > 1 {
                    let j = self.slots[(a + rng.random_range(1..k)) % k];
                    x[j] = sj;
                    y[j] = -eps * sj;
                }
                for v in y.iter_mut() {
                    *v += 1e-3 * eps * rng.sample::<f64, _>(StandardNormal);
                }
                (self.point(x), self.point(y))
            }
            2 => {
                let x: Vec<f64> = (0..self.dim).map(|_| Self::sign(rng)).collect();
                let y: Vec<f64> = (0..self.dim).map(|_| Self::sign(rng) * scale).collect();
                (self.point(x), self.point(y))
            }
            _ => {
                let x = self.gauss(rng);
                let mut y = vec![0.0; self.dim];
                y[self.slots[rng.random_range(0..self.slots.len())]] = scale * Self::sign(rng);
                (self.point(x), self.point(y))
            }
        }
    }
}

fn chunk_range(trials: usize, chunk: u64) -> std::ops::Range<usize> {
    let c = chunk as usize;
    let k = CHUNKS as usize;
    (trials * c / k)..(trials * (c + 1) / k)
}

/// Outcome of [`verify_smoothness`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub space: String,
    pub trials: usize,
    pub seed: u64,
    pub rho: f64,
    /// Largest `(p(x+y) − p(x) − Dp(x)[y]) / p(y)` seen for the surrogate `p`.
    pub worst_violation_ratio: f64,
    pub empirical_kappa: f64,
    /// The certificate's `κ₊`.
    pub claimed_kappa: f64,
    pub passed: bool,
    /// Range of `p(x)/‖x‖²` over the sampled points; the sandwich needs `[1, κ/κ₊]`.
    pub sandwich_min: f64,
    pub sandwich_max: f64,
    pub compatibility: f64,
    pub sandwich_ok: bool,
}

#[derive(Clone, Copy)]
struct Extremes {
    worst: f64,
    lo: f64,
    hi: f64,
}

impl Extremes {
    const EMPTY: Self = Self { worst: f64::NEG_INFINITY, lo: f64::INFINITY, hi: f64::NEG_INFINITY };

    fn merge(self, o: Self) -> Self {
        Self { worst: self.worst.max(o.worst), lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }
}

/// Samples `trials` pairs and checks `p(x+y) ≤ p(x) + Dp(x)[y] + κ₊·p(y)` for
/// the certificate's smooth surrogate `p`, together with the sandwich
/// `‖x‖² ≤ p(x) ≤ (κ/κ₊)‖x‖²`.
pub fn verify_smoothness(
    space: &SpaceDescriptor,
    cert: &RegularityCertificate,
    trials: usize,
    seed: u64,
) -> Result<SmoothnessReport> {
    space.validate()?;
    if trials == 0 {
        return Err(invalid("trials must be positive"));
    }
    let surrogate = SmoothSurrogate::for_space(space, cert.smooth_exponent_rho)?;
    let sampler = PairSampler::new(space.shape());
    let per_chunk = (0..CHUNKS)
        .into_par_iter()
        .map(|chunk| -> Result<Extremes> {
            let mut rng = chunk_rng(seed, 0x5300, chunk);
            let mut ex = Extremes::EMPTY;
            for k in chunk_range(trials, chunk) {
                let (x, y) = sampler.pair(k as u64, &mut rng);
                let py = surrogate.sq(&y)?;
                if py == 0.0 {
                    continue;
                }
                let px = surrogate.sq(&x)?;
                let inc = surrogate.sq_increment(&x, &y)?;
                let d = surrogate.grad_sq(&x)?.dot(&y);
                ex.worst = ex.worst.max((inc - d) / py);
                let nx = norm(space, &x)?;
                if nx > 0.0 {
                    let r = px / (nx * nx);
                    ex.lo = ex.lo.min(r);
                    ex.hi = ex.hi.max(r);
                }
            }
            Ok(ex)
        })
        .collect::<Result<Vec<_>>>()?;
    let ex = per_chunk.into_iter().fold(Extremes::EMPTY, Extremes::merge);
    let compatibility = cert.compatibility();
    Ok(SmoothnessReport {
        space: space.to_string(),
        trials,
        seed,
        rho: cert.smooth_exponent_rho,
        worst_violation_ratio: ex.worst,
        empirical_kappa: ex.worst,
        claimed_kappa: cert.kappa_plus,
        passed: ex.worst <= cert.kappa_plus * (1.0 + SAMPLE_TOL),
        sandwich_min: ex.lo,
        sandwich_max: ex.hi,
        compatibility,
        sandwich_ok: ex.lo >= 1.0 - SAMPLE_TOL && ex.hi <= compatibility * (1.0 + SAMPLE_TOL),
    })
}

/// Outcome of [`char_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharReport {
    pub space: String,
    pub kappa: f64,
    pub trials: usize,
    pub seed: u64,
    /// Largest `⟨f'(x)−f'(y), x−y⟩ / ‖x−y‖²`.
    pub worst_monotone_ratio: f64,
    /// Largest `‖f'(x)−f'(y)‖_* / ‖x−y‖`.
    pub worst_lipschitz_ratio: f64,
    /// Smallest `(f_*(ξ+η) − f_*(ξ) − ⟨η, ξ⟩) / (½‖η‖²)`; only for Euclidean spaces.
    pub dual_strong_convexity_ratio: Option<f64>,
    pub passed: bool,
    /// Coordinates of the pair with the largest ratio, when it violates.
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
}

#[derive(Clone)]
struct CharChunk {
    mono: f64,
    lip: f64,
    dual: f64,
    /// `(ratio, x, y)` of the largest violation in the chunk.
    witness: Option<(f64, Vec<f64>, Vec<f64>)>,
}

/// Samples the first-order characterizations of `κ`-smoothness with
/// `f(x) = ‖x‖²/2`: monotonicity of `f'` and Lipschitz continuity of `f'`
/// into the dual norm.
pub fn char_check(space: &SpaceDescriptor, kappa: f64, trials: usize, seed: u64) -> Result<CharReport> {
    space.validate()?;
    if !space.is_smooth() {
        return Err(Error::NonSmooth(format!("{space} has no differentiable squared norm")));
    }
    if trials == 0 {
        return Err(invalid("trials must be positive"));
    }
    let euclidean = matches!(space, SpaceDescriptor::Euclidean { .. });
    let sampler = PairSampler::new(space.shape());
    let limit = kappa * (1.0 + SAMPLE_TOL);
    let chunks = (0..CHUNKS)
        .into_par_iter()
        .map(|chunk| -> Result<CharChunk> {
            let mut rng = chunk_rng(seed, 0xC4A2, chunk);
            let mut out = CharChunk { mono: f64::NEG_INFINITY, lip: f64::NEG_INFINITY, dual: f64::INFINITY, witness: None };
            for k in chunk_range(trials, chunk) {
                let (x, h) = sampler.pair(k as u64, &mut rng);
                let y = x.add(&h);
                let nh = norm(space, &h)?;
                if nh == 0.0 {
                    continue;
                }
                let gx = grad_sq_norm(space, &x)?.scale(0.5);
                let gy = grad_sq_norm(space, &y)?.scale(0.5);
                let diff = gx.sub(&gy);
                let mono = diff.dot(&x.sub(&y)) / (nh * nh);
                let lip = dual_norm(space, &diff)? / nh;
                out.mono = out.mono.max(mono);
                out.lip = out.lip.max(lip);
                let ratio = mono.max(lip);
                if ratio > limit && out.witness.as_ref().is_none_or(|w| ratio > w.0) {
                    out.witness = Some((ratio, x.coords(), y.coords()));
                }
                if euclidean {
                    // f_* = f here and ∂f_*(ξ) = {ξ}.
                    let fs = |p: &Point<f64>| 0.5 * p.dot(p);
                    let gap = fs(&y) - fs(&x) - h.dot(&x);
                    out.dual = out.dual.min(gap / (0.5 * nh * nh));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut mono = f64::NEG_INFINITY;
    let mut lip = f64::NEG_INFINITY;
    let mut dual = f64::INFINITY;
    let mut witness: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    for c in chunks {
        mono = mono.max(c.mono);
        lip = lip.max(c.lip);
        dual = dual.min(c.dual);
        if let Some(w) = c.witness {
            if witness.as_ref().is_none_or(|b| w.0 > b.0) {
                witness = Some(w);
            }
        }
    }
    let dual_ratio = euclidean.then_some(dual);
    let dual_ok = dual_ratio.is_none_or(|d| d >= (1.0 / kappa) * (1.0 - SAMPLE_TOL));
    Ok(CharReport {
        space: space.to_string(),
        kappa,
        trials,
        seed,
        worst_monotone_ratio: mono,
        worst_lipschitz_ratio: lip,
        dual_strong_convexity_ratio: dual_ratio,
        passed: mono <= limit && lip <= limit && dual_ok,
        witness: witness.map(|(_, x, y)| (x, y)),
    })
}
