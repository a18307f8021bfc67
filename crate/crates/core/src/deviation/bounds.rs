use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::profile::SigmaProfile;
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Below `1 + ALPHA_LOW` the `α = 1` limit of `γ*` is used.
pub const ALPHA_LOW: f64 = 1e-6;
/// Above `2 − ALPHA_HIGH`, `γ* = +∞`.
pub const ALPHA_HIGH: f64 = 1e-9;

/// Which deviation inequality a query refers to.
///
/// `regular_*` are the bounds for `κ`-regular spaces, `smooth_*` the
/// sharper ones for `κ`-smooth spaces, `scalar_*` the real-valued bounds
/// with zero drift. The suffix picks the hypothesis: `_i` light tails of
/// order `α ∈ [1, 2]`, `_ii` sub-Gaussian (`α = 2`), `_iii` almost surely
/// bounded increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    RegularI,
    RegularIi,
    RegularIii,
    SmoothI,
    SmoothIi,
    SmoothIii,
    ScalarI,
    ScalarSubgauss,
    ScalarBounded,
}

/// The tail hypothesis behind a variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    LightTail,
    SubGaussian,
    Bounded,
}

impl Variant {
    pub const ALL: [Variant; 9] = [
        Variant::RegularI,
        Variant::RegularIi,
        Variant::RegularIii,
        Variant::SmoothI,
        Variant::SmoothIi,
        Variant::SmoothIii,
        Variant::ScalarI,
        Variant::ScalarSubgauss,
        Variant::ScalarBounded,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::RegularI => "regular_i",
            Variant::RegularIi => "regular_ii",
            Variant::RegularIii => "regular_iii",
            Variant::SmoothI => "smooth_i",
            Variant::SmoothIi => "smooth_ii",
            Variant::SmoothIii => "smooth_iii",
            Variant::ScalarI => "scalar_i",
            Variant::ScalarSubgauss => "scalar_subgauss",
            Variant::ScalarBounded => "scalar_bounded",
        }
    }

    pub fn hypothesis(self) -> Hypothesis {
        match self {
            Variant::RegularI | Variant::SmoothI | Variant::ScalarI => Hypothesis::LightTail,
            Variant::RegularIi | Variant::SmoothIi | Variant::ScalarSubgauss => Hypothesis::SubGaussian,
            Variant::RegularIii | Variant::SmoothIii | Variant::ScalarBounded => Hypothesis::Bounded,
        }
    }

    pub fn is_smooth(self) -> bool {
        matches!(self, Variant::SmoothI | Variant::SmoothIi | Variant::SmoothIii)
    }

    pub fn is_scalar(self) -> bool {
        matches!(self, Variant::ScalarI | Variant::ScalarSubgauss | Variant::ScalarBounded)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown variant '{s}'")))
    }
}

/// Which term of `min[γ², γ*^{2−α}γ^α]` is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Quadratic,
    AlphaTail,
    NotApplicable,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Quadratic => "quadratic",
            Regime::AlphaTail => "alpha_tail",
            Regime::NotApplicable => "not_applicable",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailQuery<T: Scalar> {
    pub alpha: T,
    pub gamma: T,
    pub kappa: T,
    pub profile: SigmaProfile<T>,
    pub variant: Variant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct TailResult<T: Scalar> {
    pub variant: Variant,
    #[serde(with = "crate::numfmt::sig12")]
    pub alpha: T,
    #[serde(with = "crate::numfmt::sig12")]
    pub gamma: T,
    #[serde(with = "crate::numfmt::sig12")]
    pub kappa: T,
    #[serde(rename = "N")]
    pub n: usize,
    /// Deviation level on `‖S_N‖`.
    #[serde(with = "crate::numfmt::sig12")]
    pub threshold: T,
    /// Probability bound, clamped to 1.
    #[serde(rename = "bound", with = "crate::numfmt::sig12")]
    pub prob_bound: T,
    #[serde(with = "crate::numfmt::sig12")]
    pub gamma_star: T,
    pub regime: Regime,
}

fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    if !(alpha >= T::one() && alpha <= T::lit(2.0)) {
        return Err(invalid(format!("alpha must lie in [1, 2], got {alpha}")));
    }
    Ok(())
}

/// `γ*(α, σ)`, the crossover between the quadratic and the `α`-power tail.
///
/// For `α ∈ (1, 2)`:
/// `32·[8α*/2^{α*}]^{(α−1)/(2−α)}·[‖σ‖₂/‖σ‖_{α*}]^{α/(2−α)}`, `α* = α/(α−1)`,
/// evaluated in log space. The `α → 1` limit is `16‖σ‖₂/‖σ‖_∞` and the
/// `α → 2` limit is `+∞`.
pub fn gamma_star<T: Scalar>(alpha: T, profile: &SigmaProfile<T>) -> Result<T> {
    check_alpha(alpha)?;
    let a = alpha.to_f64_lossy();
    if a > 2.0 - ALPHA_HIGH {
        return Ok(T::infinity());
    }
    if a < 1.0 + ALPHA_LOW {
        return Ok(T::lit(16.0) * profile.l2() / profile.linf());
    }
    let a_star = a / (a - 1.0);
    let ln2 = std::f64::consts::LN_2;
    let lead = (a - 1.0) / (2.0 - a) * (8f64.ln() + a_star.ln() - a_star * ln2);
    let ratio = a / (2.0 - a) * (profile.l2().to_f64_lossy().ln() - profile.lq(a_star).to_f64_lossy().ln());
    Ok(T::lit((32f64.ln() + lead + ratio).exp()))
}

/// `min[γ², γ*^{2−α}γ^α]` with its active term; ties go to the quadratic term.
fn light_tail_exponent<T: Scalar>(alpha: T, gamma: T, gs: T) -> (T, Regime) {
    let quad = gamma * gamma;
    if !gs.is_finite() || gamma == T::zero() {
        return (quad, Regime::Quadratic);
    }
    let two = T::lit(2.0);
    let tail = ((two - alpha) * gs.ln() + alpha * gamma.ln()).exp();
    if quad <= tail {
        (quad, Regime::Quadratic)
    } else {
        (tail, Regime::AlphaTail)
    }
}

fn clamp1<T: Scalar>(x: T) -> T {
    x.min(T::one())
}

fn check_query<T: Scalar>(q: &TailQuery<T>) -> Result<()> {
    check_alpha(q.alpha)?;
    if !(q.gamma >= T::zero() && q.gamma.is_finite()) {
        return Err(invalid(format!("gamma must be finite and >= 0, got {}", q.gamma)));
    }
    if !(q.kappa >= T::one() && q.kappa.is_finite()) {
        return Err(invalid(format!("kappa must be finite and >= 1, got {}", q.kappa)));
    }
    if q.variant.hypothesis() == Hypothesis::SubGaussian && q.alpha != T::lit(2.0) {
        return Err(invalid(format!("variant {} requires alpha = 2, got {}", q.variant, q.alpha)));
    }
    Ok(())
}

/// Coefficient `θ` with threshold `θ·‖σ‖₂`.
fn threshold_coefficient<T: Scalar>(variant: Variant, kappa: T, gamma: T) -> T {
    let two = T::lit(2.0);
    let e = T::lit(std::f64::consts::E);
    let sqrt2 = two.sqrt();
    match variant {
        Variant::RegularI => (two * e * kappa).sqrt() + sqrt2 * gamma,
        Variant::RegularIi | Variant::RegularIii => (two * kappa).sqrt() + sqrt2 * gamma,
        Variant::SmoothI => (e * kappa).sqrt() + gamma,
        Variant::SmoothIi | Variant::SmoothIii => kappa.sqrt() + gamma,
        Variant::ScalarI | Variant::ScalarSubgauss | Variant::ScalarBounded => gamma,
    }
}

/// The probability bound of a hypothesis at level `γ`, with its regime.
fn bound_for<T: Scalar>(hyp: Hypothesis, alpha: T, gamma: T, gs: T) -> (T, Regime) {
    match hyp {
        Hypothesis::LightTail => {
            let (m, regime) = light_tail_exponent(alpha, gamma, gs);
            (clamp1(T::lit(2.0) * (-m / T::lit(64.0)).exp()), regime)
        }
        Hypothesis::SubGaussian => (clamp1((-gamma * gamma / T::lit(3.0)).exp()), Regime::NotApplicable),
        Hypothesis::Bounded => (clamp1((-gamma * gamma / T::lit(2.0)).exp()), Regime::NotApplicable),
    }
}

/// Deviation level and probability bound for a query.
pub fn tail_bound<T: Scalar>(q: &TailQuery<T>) -> Result<TailResult<T>> {
    check_query(q)?;
    let gs = gamma_star(q.alpha, &q.profile)?;
    let (prob_bound, regime) = bound_for(q.variant.hypothesis(), q.alpha, q.gamma, gs);
    Ok(TailResult {
        variant: q.variant,
        alpha: q.alpha,
        gamma: q.gamma,
        kappa: q.kappa,
        n: q.profile.len(),
        threshold: threshold_coefficient(q.variant, q.kappa, q.gamma) * q.profile.l2(),
        prob_bound,
        gamma_star: gs,
        regime,
    })
}

/// Hypotheses of the real-valued bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarVariant {
    General,
    Subgauss,
    Bounded,
}

impl FromStr for ScalarVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(ScalarVariant::General),
            "subgauss" => Ok(ScalarVariant::Subgauss),
            "bounded" => Ok(ScalarVariant::Bounded),
            _ => Err(Error::Parse(format!("unknown scalar variant '{s}'"))),
        }
    }
}

fn check_scalar_inputs<T: Scalar>(mu: &[T], nu: &[T]) -> Result<SigmaProfile<T>> {
    if mu.len() != nu.len() {
        return Err(Error::ShapeMismatch { expected: format!("{} drift bounds", nu.len()), found: mu.len().to_string() });
    }
    if nu.iter().any(|v| !(*v > T::zero())) {
        return Err(invalid("nu entries must be positive"));
    }
    SigmaProfile::new(nu.to_vec())
}

/// `Σμ_i + γ‖ν‖₂`, the level exceeded by `Σψ_i` with the bounded probability.
pub fn scalar_deviation_level<T: Scalar>(mu: &[T], nu: &[T], gamma: T) -> Result<T> {
    let p = check_scalar_inputs(mu, nu)?;
    Ok(mu.iter().fold(T::zero(), |s, m| s + *m) + gamma * p.l2())
}

/// Probability that `Σψ_i` exceeds [`scalar_deviation_level`].
pub fn scalar_bound<T: Scalar>(alpha: T, mu: &[T], nu: &[T], gamma: T, variant: ScalarVariant) -> Result<T> {
    let p = check_scalar_inputs(mu, nu)?;
    if !(gamma >= T::zero()) {
        return Err(invalid(format!("gamma must be >= 0, got {gamma}")));
    }
    let hyp = match variant {
        ScalarVariant::General => {
            check_alpha(alpha)?;
            Hypothesis::LightTail
        }
        ScalarVariant::Subgauss => Hypothesis::SubGaussian,
        ScalarVariant::Bounded => Hypothesis::Bounded,
    };
    let gs = if hyp == Hypothesis::LightTail { gamma_star(alpha, &p)? } else { T::infinity() };
    Ok(bound_for(hyp, alpha, gamma, gs).0)
}

/// Smallest `γ ≥ 0` at which the query's bound is at most `target_eps`.
///
/// Every inversion is closed-form: for the light-tail bound the exponent
/// `min[γ², cγ^α]` is increasing, so the answer is
/// `max[√L, (L/c)^{1/α}]` with `L = 64·ln(2/ε)` and `c = γ*^{2−α}`.
pub fn invert_gamma<T: Scalar>(target_eps: T, q: &TailQuery<T>) -> Result<T> {
    check_query(&TailQuery { gamma: T::zero(), ..q.clone() })?;
    if !(target_eps > T::zero()) {
        return Err(invalid(format!("target probability must be > 0, got {target_eps}")));
    }
    if target_eps >= T::one() {
        return Ok(T::zero());
    }
    let ln_inv = -target_eps.ln();
    Ok(match q.variant.hypothesis() {
        Hypothesis::SubGaussian => (T::lit(3.0) * ln_inv).sqrt(),
        Hypothesis::Bounded => (T::lit(2.0) * ln_inv).sqrt(),
        Hypothesis::LightTail => {
            let l = T::lit(64.0) * (T::lit(2.0).ln() + ln_inv);
            let gs = gamma_star(q.alpha, &q.profile)?;
            let quad = l.sqrt();
            if !gs.is_finite() {
                quad
            } else {
                let ln_c = (T::lit(2.0) - q.alpha) * gs.ln();
                quad.max(((l.ln() - ln_c) / q.alpha).exp())
            }
        }
    })
}

/// `E‖S_N‖² ≤ κ·Σσ_i²`.
pub fn second_moment_bound<T: Scalar>(kappa: T, profile: &SigmaProfile<T>) -> T {
    kappa * profile.l2() * profile.l2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ones(n: usize) -> SigmaProfile<f64> {
        SigmaProfile::constant(1.0, n).unwrap()
    }

    fn query(variant: Variant, alpha: f64, gamma: f64, kappa: f64, p: SigmaProfile<f64>) -> TailQuery<f64> {
        TailQuery { alpha, gamma, kappa, profile: p, variant }
    }

    /// Direct evaluation of the crossover formula, without log space.
    fn gamma_star_direct(alpha: f64, s: &[f64]) -> f64 {
        let a_star = alpha / (alpha - 1.0);
        let l2 = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let la = s.iter().map(|v| v.powf(a_star)).sum::<f64>().powf(1.0 / a_star);
        32.0 * (8.0 * a_star / 2f64.powf(a_star)).powf((alpha - 1.0) / (2.0 - alpha)) * (l2 / la).powf(alpha / (2.0 - alpha))
    }

    #[test]
    fn gamma_star_examples() {
        assert!(gamma_star(2.0, &ones(5)).unwrap().is_infinite());
        assert_eq!(gamma_star(1.0, &ones(16)).unwrap(), 64.0);
        assert_relative_eq!(gamma_star(1.5, &ones(4)).unwrap(), 192.0, max_relative = 1e-12);
        let s = [0.3, 1.0, 2.5, 0.7];
        let p = SigmaProfile::new(s.to_vec()).unwrap();
        for a in [1.1, 1.3, 1.5, 1.8, 1.95] {
            assert_relative_eq!(gamma_star(a, &p).unwrap(), gamma_star_direct(a, &s), max_relative = 1e-10);
        }
        assert!(gamma_star(0.9, &p).is_err());
        assert!(gamma_star(2.1, &p).is_err());
        // Single precision agrees.
        let p32 = SigmaProfile::constant(1.0f32, 4).unwrap();
        assert_relative_eq!(gamma_star(1.5f32, &p32).unwrap(), 192.0, max_relative = 1e-5);
    }

    #[test]
    fn gamma_star_endpoints() {
        let p = SigmaProfile::new(vec![1.0f64, 2.0, 3.0]).unwrap();
        let at1 = gamma_star(1.0, &p).unwrap();
        assert!((gamma_star(1.0 + 1e-8, &p).unwrap() - at1).abs() <= 1e-4 * at1);
        // Just above the switch to the limit the formula is still close.
        let near = gamma_star(1.0 + 2e-6, &p).unwrap();
        assert!((near - at1).abs() <= 1e-4 * at1, "{near} {at1}");
        assert!(gamma_star(2.0 - 1e-8, &p).unwrap() >= 1e10);
    }

    #[test]
    fn tail_examples() {
        let r = tail_bound(&query(Variant::RegularIi, 2.0, 3.0, 1.0, ones(4))).unwrap();
        assert_relative_eq!(r.threshold, 8.0 * 2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(r.prob_bound, (-3f64).exp(), max_relative = 1e-14);
        assert_eq!(r.regime, Regime::NotApplicable);

        let r = tail_bound(&query(Variant::SmoothIii, 2.0, 2.0, 1.0, ones(100))).unwrap();
        assert_relative_eq!(r.threshold, 30.0, max_relative = 1e-14);
        assert_relative_eq!(r.prob_bound, (-2f64).exp(), max_relative = 1e-14);

        for v in [Variant::RegularI, Variant::SmoothI, Variant::ScalarI] {
            let r = tail_bound(&query(v, 1.5, 0.0, 1.0, ones(4))).unwrap();
            assert_eq!(r.prob_bound, 1.0);
            assert_eq!(r.regime, Regime::Quadratic);
        }

        assert!(tail_bound(&query(Variant::RegularIi, 1.5, 1.0, 1.0, ones(4))).is_err());
        assert!(tail_bound(&query(Variant::RegularI, 1.5, -1.0, 1.0, ones(4))).is_err());
        assert!(tail_bound(&query(Variant::RegularI, 1.5, 1.0, 0.5, ones(4))).is_err());
    }

    #[test]
    fn regime_switches() {
        // γ* = 192 at α = 1.5, σ = 1⁴: γ² ≤ γ*^{1/2}γ^{3/2} iff γ ≤ γ*.
        let p = ones(4);
        let below = tail_bound(&query(Variant::RegularI, 1.5, 100.0, 1.0, p.clone())).unwrap();
        assert_eq!(below.regime, Regime::Quadratic);
        let above = tail_bound(&query(Variant::RegularI, 1.5, 300.0, 1.0, p.clone())).unwrap();
        assert_eq!(above.regime, Regime::AlphaTail);
        let tie = tail_bound(&query(Variant::RegularI, 1.5, 192.0, 1.0, p)).unwrap();
        assert_eq!(tie.regime, Regime::Quadratic);
    }

    #[test]
    fn scalar_examples() {
        let zeros = vec![0.0; 100];
        let b = scalar_bound(2.0, &zeros, &vec![1.0; 100], 2.0, ScalarVariant::Bounded).unwrap();
        assert_relative_eq!(b, (-2f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(scalar_deviation_level(&zeros, &vec![1.0; 100], 2.0).unwrap(), 20.0);
        assert_eq!(scalar_bound(2.0, &[0.0], &[1.0], 0.0, ScalarVariant::Subgauss).unwrap(), 1.0);
        let g = scalar_bound(2.0, &[0.0; 3], &[1.0; 3], 8.0, ScalarVariant::General).unwrap();
        assert_relative_eq!(g, 2.0 * (-1f64).exp(), max_relative = 1e-14);
        assert!(scalar_bound(2.0, &[0.0], &[0.0], 1.0, ScalarVariant::Bounded).is_err());
        assert!(scalar_bound(2.0, &[0.0, 1.0], &[1.0], 1.0, ScalarVariant::Bounded).is_err());
    }

    #[test]
    fn invert_examples() {
        let q = query(Variant::RegularIi, 2.0, 0.0, 1.0, ones(4));
        assert_relative_eq!(invert_gamma((-3f64).exp(), &q).unwrap(), 3.0, max_relative = 1e-14);
        let q = query(Variant::RegularIii, 2.0, 0.0, 1.0, ones(4));
        let g = invert_gamma(0.01, &q).unwrap();
        assert_relative_eq!(g, (2.0 * 100f64.ln()).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(g, 3.03485, epsilon = 1e-5);
        assert_eq!(invert_gamma(1.0, &q).unwrap(), 0.0);
        assert!(invert_gamma(0.0, &q).is_err());
    }

    /// Bisection oracle on the forward bound.
    fn bisect(eps: f64, q: &TailQuery<f64>) -> f64 {
        let f = |g: f64| tail_bound(&TailQuery { gamma: g, ..q.clone() }).unwrap().prob_bound;
        let (mut lo, mut hi) = (0.0, 1.0);
        while f(hi) > eps {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    #[test]
    fn light_tail_inversion_matches_bisection() {
        let p = SigmaProfile::new(vec![0.5, 1.0, 3.0, 1.5]).unwrap();
        for alpha in [1.0, 1.2, 1.5, 1.9, 2.0] {
            for eps in [0.5, 1e-2, 1e-6, 1e-40, 1e-200] {
                let q = query(Variant::RegularI, alpha, 0.0, 1.0, p.clone());
                let g = invert_gamma(eps, &q).unwrap();
                assert_relative_eq!(g, bisect(eps, &q), max_relative = 1e-9);
                let back = tail_bound(&TailQuery { gamma: g, ..q }).unwrap().prob_bound;
                assert_relative_eq!(back, eps, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn second_moment_examples() {
        assert_eq!(second_moment_bound(2.0, &SigmaProfile::new(vec![3.0, 4.0]).unwrap()), 50.0);
        assert_eq!(second_moment_bound(1.0, &ones(1)), 1.0);
    }

    #[test]
    fn variant_names_roundtrip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
            assert_eq!(serde_json::to_string(&v).unwrap(), format!("\"{}\"", v.name()));
        }
        assert!("regular_iv".parse::<Variant>().is_err());
    }

    proptest! {
        #[test]
        fn gamma_star_at_least_16(
            s in prop::collection::vec(1e-3f64..1e3, 1..40),
            alpha in 1.0f64..2.0,
        ) {
            let p = SigmaProfile::new(s).unwrap();
            prop_assert!(gamma_star(alpha, &p).unwrap() >= 16.0 * (1.0 - 1e-12));
        }

        #[test]
        fn bounds_monotone(
            g1 in 0.0f64..50.0, dg in 0.0f64..10.0, k1 in 1.0f64..20.0, dk in 0.0f64..5.0,
            alpha in 1.0f64..2.0, vi in 0usize..9,
        ) {
            let v = Variant::ALL[vi];
            let alpha = if v.hypothesis() == Hypothesis::SubGaussian { 2.0 } else { alpha };
            let p = SigmaProfile::new(vec![1.0, 2.0, 0.5]).unwrap();
            let a = tail_bound(&query(v, alpha, g1, k1, p.clone())).unwrap();
            let b = tail_bound(&query(v, alpha, g1 + dg, k1, p.clone())).unwrap();
            let c = tail_bound(&query(v, alpha, g1, k1 + dk, p)).unwrap();
            prop_assert!(b.prob_bound <= a.prob_bound);
            prop_assert!(c.threshold >= a.threshold);
        }

        #[test]
        fn bounded_below_subgaussian(g in 0.0f64..30.0) {
            let p = ones(3);
            let ii = tail_bound(&query(Variant::RegularIi, 2.0, g, 1.0, p.clone())).unwrap();
            let iii = tail_bound(&query(Variant::RegularIii, 2.0, g, 1.0, p)).unwrap();
            prop_assert!(iii.prob_bound <= ii.prob_bound);
        }
    }
}
