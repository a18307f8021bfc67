use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ci::binomial_upper_ci;
use super::scheme::{Certificate, Scheme};
use crate::deviation::{second_moment_bound, tail_bound, Hypothesis, Regime, TailQuery, Variant};
use crate::error::{invalid, Error, Result};
use crate::norm_core::{l1_norm, norm, Point, SpaceDescriptor};
use crate::numfmt::fmt12;
use crate::smoothness::{kappa_space, smooth_constant, splitmix64};

/// Confidence level of the reported upper limits on the hit frequency.
pub const CONF_LEVEL: f64 = 0.999;

/// The random stream for one `(seed, trial, step)` triple.
pub fn substream(seed: u64, trial: u64, step: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(splitmix64(splitmix64(seed) ^ trial) ^ step as u64))
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub scheme: Scheme,
    pub space: SpaceDescriptor,
    /// Horizon `N`.
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub gammas: Vec<f64>,
    /// Analytic comparator.
    pub variant: Variant,
}

impl SimConfig {
    /// A config measured in the scheme's own space.
    pub fn new(scheme: Scheme, n: usize, trials: u64, seed: u64, gammas: Vec<f64>, variant: Variant) -> Result<Self> {
        let space = scheme
            .default_space()
            .ok_or_else(|| Error::Config("custom schemes need an explicit space".into()))?;
        Ok(Self { scheme, space, n, trials, seed, gammas, variant })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaRecord {
    #[serde(with = "crate::numfmt::sig12")]
    pub gamma: f64,
    #[serde(with = "crate::numfmt::sig12")]
    pub threshold: f64,
    pub hits: u64,
    pub trials: u64,
    #[serde(with = "crate::numfmt::sig12")]
    pub freq: f64,
    #[serde(with = "crate::numfmt::sig12")]
    pub freq_upper_conf: f64,
    /// The analytic probability bound at this `γ`.
    #[serde(rename = "bound", with = "crate::numfmt::sig12")]
    pub analytic_bound: f64,
    pub regime: Regime,
}

/// Range of `‖S_N‖₁` over all paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L1Witness {
    #[serde(with = "crate::numfmt::sig12")]
    pub min: f64,
    #[serde(with = "crate::numfmt::sig12")]
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub scheme: String,
    pub space: String,
    pub variant: Variant,
    #[serde(rename = "N")]
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub certificate: Certificate,
    #[serde(with = "crate::numfmt::sig12")]
    pub kappa: f64,
    pub records: Vec<GammaRecord>,
    #[serde(with = "crate::numfmt::sig12")]
    pub mean_sq_norm: f64,
    #[serde(with = "crate::numfmt::sig12")]
    pub mean_sq_norm_stderr: f64,
    /// `κΣσ²` with the regularity constant of the space; absent when the
    /// certificate has `α < 2` and no second moment follows from it.
    #[serde(with = "crate::numfmt::sig12_opt")]
    pub second_moment_bound: Option<f64>,
    /// Present for [`Scheme::RademacherBasis`], where `‖S_N‖₁ = N` surely.
    pub l1_witness: Option<L1Witness>,
    /// Wall time; kept out of the serialized form so reports are reproducible.
    #[serde(skip)]
    pub elapsed_secs: f64,
}

/// Constant used in the threshold of `variant` for `space`.
pub fn comparator_kappa(space: &SpaceDescriptor, variant: Variant) -> Result<f64> {
    if variant.is_scalar() {
        return Err(Error::Config(format!("{variant} is a real-valued bound and has no simulation")));
    }
    if variant.is_smooth() {
        smooth_constant(space).map_err(|e| Error::Config(format!("{variant} needs a smooth space: {e}")))
    } else {
        Ok(kappa_space(space)?.kappa)
    }
}

fn check_config(cfg: &SimConfig, cert: &Certificate) -> Result<()> {
    if cfg.n == 0 {
        return Err(invalid("horizon N must be at least 1"));
    }
    if cfg.trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    if let Some(g) = cfg.gammas.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
        return Err(invalid(format!("gammas must be finite and >= 0, got {g}")));
    }
    cfg.scheme.validate()?;
    cfg.space.validate()?;
    cfg.scheme.check_space(&cfg.space)?;
    if let Some(h) = cfg.scheme.horizon() {
        if cfg.n > h {
            return Err(Error::Config(format!("{} defines only {h} steps, asked for N = {}", cfg.scheme, cfg.n)));
        }
    }
    match cfg.variant.hypothesis() {
        Hypothesis::Bounded if !cert.bounded => Err(Error::Config(format!(
            "{} needs bounded increments but {} is unbounded",
            cfg.variant, cfg.scheme
        ))),
        Hypothesis::SubGaussian if cert.alpha != 2.0 => Err(Error::Config(format!(
            "{} needs alpha = 2 but {} is certified with alpha = {}",
            cfg.variant, cfg.scheme, cert.alpha
        ))),
        _ => Ok(()),
    }
}

/// Partial sum `S_N` of one path.
fn final_sum(cfg: &SimConfig, trial: u64) -> Result<Point<f64>> {
    let mut s = Point::zeros(&cfg.space.shape());
    for step in 1..=cfg.n {
        let mut rng = substream(cfg.seed, trial, step);
        s = s.add(&cfg.scheme.draw_increment(step, &mut rng)?);
    }
    Ok(s)
}

/// `‖S_k‖` in `space` for `k = 1..=steps` along one path of the run with
/// the same seed.
pub fn path_norms(scheme: &Scheme, space: &SpaceDescriptor, steps: usize, seed: u64, trial: u64) -> Result<Vec<f64>> {
    let mut s = Point::zeros(&space.shape());
    (1..=steps)
        .map(|step| {
            let mut rng = substream(seed, trial, step);
            s = s.add(&scheme.draw_increment(step, &mut rng)?);
            norm(space, &s)
        })
        .collect()
}

struct Outcome {
    norm: f64,
    l1: f64,
}

/// Simulates `trials` independent paths and compares hit frequencies with
/// the analytic bounds. The result depends only on `cfg`, not on the number
/// of worker threads.
pub fn run(cfg: &SimConfig) -> Result<SimReport> {
    let start = Instant::now();
    let cert = cfg.scheme.certify_condition();
    check_config(cfg, &cert)?;
    let kappa = comparator_kappa(&cfg.space, cfg.variant)?;
    let profile = cert.profile(cfg.n)?;
    let witness = matches!(cfg.scheme, Scheme::RademacherBasis { .. });

    let outcomes: Vec<Outcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let s = final_sum(cfg, t)?;
            let l1 = if witness { s.as_vector().map_or(0.0, l1_norm) } else { 0.0 };
            Ok(Outcome { norm: norm(&cfg.space, &s)?, l1 })
        })
        .collect::<Result<_>>()?;

    let trials = cfg.trials as f64;
    let mut records = Vec::with_capacity(cfg.gammas.len());
    for &gamma in &cfg.gammas {
        let tail = tail_bound(&TailQuery { alpha: cert.alpha, gamma, kappa, profile: profile.clone(), variant: cfg.variant })?;
        let hits = outcomes.iter().filter(|o| o.norm >= tail.threshold).count() as u64;
        records.push(GammaRecord {
            gamma,
            threshold: tail.threshold,
            hits,
            trials: cfg.trials,
            freq: hits as f64 / trials,
            freq_upper_conf: binomial_upper_ci(hits, cfg.trials, CONF_LEVEL)?,
            analytic_bound: tail.prob_bound,
            regime: tail.regime,
        });
    }

    let mean = outcomes.iter().map(|o| o.norm * o.norm).sum::<f64>() / trials;
    let var = if cfg.trials > 1 {
        outcomes.iter().map(|o| (o.norm * o.norm - mean).powi(2)).sum::<f64>() / (trials - 1.0)
    } else {
        0.0
    };
    let second = if cert.alpha == 2.0 { Some(second_moment_bound(kappa_space(&cfg.space)?.kappa, &profile)) } else { None };
    let l1_witness = witness.then(|| L1Witness {
        min: outcomes.iter().map(|o| o.l1).fold(f64::INFINITY, f64::min),
        max: outcomes.iter().map(|o| o.l1).fold(0.0, f64::max),
    });

    Ok(SimReport {
        scheme: cfg.scheme.to_string(),
        space: cfg.space.to_string(),
        variant: cfg.variant,
        n: cfg.n,
        trials: cfg.trials,
        seed: cfg.seed,
        certificate: cert,
        kappa,
        records,
        mean_sq_norm: mean,
        mean_sq_norm_stderr: (var / trials).sqrt(),
        second_moment_bound: second,
        l1_witness,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

impl SimReport {
    /// One row per `γ`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("gamma,threshold,hits,trials,freq,freq_upper_conf,bound,regime\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                fmt12(r.gamma),
                fmt12(r.threshold),
                r.hits,
                r.trials,
                fmt12(r.freq),
                fmt12(r.freq_upper_conf),
                fmt12(r.analytic_bound),
                r.regime
            );
        }
        out
    }

    /// Whether every confidence limit sits below its analytic bound.
    pub fn bounds_dominate(&self) -> bool {
        self.records.iter().all(|r| r.freq_upper_conf <= r.analytic_bound)
    }

    /// `mean − 4·stderr ≤ κΣσ²`, when the bound exists.
    pub fn second_moment_ok(&self) -> Option<bool> {
        self.second_moment_bound.map(|b| self.mean_sq_norm - 4.0 * self.mean_sq_norm_stderr <= b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::scheme::IncrementSampler;
    use std::sync::Arc;

    fn fixed_1d() -> Scheme {
        Scheme::fixed_direction(SpaceDescriptor::Euclidean { n: 1 }, 1.0).unwrap()
    }

    #[test]
    fn rademacher_basis_l1_is_deterministic() {
        let cfg = SimConfig::new(Scheme::RademacherBasis { n: 100 }, 100, 10, 7, vec![0.0], Variant::RegularIii).unwrap();
        let r = run(&cfg).unwrap();
        assert_eq!(r.l1_witness, Some(L1Witness { min: 100.0, max: 100.0 }));
        // In ℓ₂ every path has ‖S_N‖² = N exactly.
        assert_eq!(r.mean_sq_norm, 100.0);
        assert_eq!(r.mean_sq_norm_stderr, 0.0);
        let l1 = SpaceDescriptor::lp(100, 1.0);
        // ℓ₁ is below the supported exponent range, so evaluate through l1_norm.
        assert!(l1.is_err());
        let s = final_sum(&cfg, 3).unwrap();
        assert_eq!(l1_norm(s.as_vector().unwrap()), 100.0);
        let k = path_norms(&cfg.scheme, &SpaceDescriptor::Euclidean { n: 100 }, 100, 7, 3).unwrap();
        for (i, v) in k.iter().enumerate() {
            assert!((v * v - (i + 1) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn one_dimensional_walk_against_binomial() {
        let cfg = SimConfig::new(fixed_1d(), 64, 20_000, 11, vec![0.0, 0.5, 2.0], Variant::SmoothIii).unwrap();
        let r = run(&cfg).unwrap();
        // P(|S_64| ≥ 8(1+γ)) for a ±1 walk, summed from the exact binomial law.
        let exact = |level: f64| -> f64 {
            (0..=64u32)
                .filter(|k| (2.0 * *k as f64 - 64.0).abs() >= level)
                .map(|k| {
                    let ln_c = (1..=k).map(|j| ((64 - k + j) as f64 / j as f64).ln()).sum::<f64>();
                    (ln_c - 64.0 * 2f64.ln()).exp()
                })
                .sum()
        };
        for rec in &r.records {
            let p = exact(rec.threshold);
            let sd = (p * (1.0 - p) / 20_000.0).sqrt();
            assert!((rec.freq - p).abs() <= 5.0 * sd + 1e-12, "{rec:?} vs {p}");
            assert!(rec.freq <= rec.freq_upper_conf);
            assert!(rec.freq_upper_conf <= rec.analytic_bound);
        }
        assert!(r.bounds_dominate());
        assert_eq!(r.second_moment_ok(), Some(true));
    }

    #[test]
    fn reproducible_and_thread_independent() {
        let space = SpaceDescriptor::lp(10, 4.0).unwrap();
        let cfg = SimConfig::new(Scheme::BoundedSphere { space, sigma: 3.0 }, 16, 2000, 5, vec![0.0, 1.0], Variant::RegularIii).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run(&cfg)).unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| run(&cfg)).unwrap();
        let again = run(&cfg).unwrap();
        let js = |r: &SimReport| serde_json::to_string(r).unwrap();
        assert_eq!(js(&one), js(&four));
        assert_eq!(js(&one), js(&again));
        let other = SimConfig { seed: 6, ..cfg };
        assert_ne!(js(&run(&other).unwrap()), js(&one));
    }

    #[test]
    fn incompatible_configs() {
        let g = Scheme::GaussianIso { n: 3, scale: 1.0 };
        let cfg = SimConfig::new(g.clone(), 8, 10, 0, vec![1.0], Variant::RegularIii).unwrap();
        assert!(matches!(run(&cfg), Err(Error::Config(_))));
        let cfg = SimConfig::new(g.clone(), 8, 10, 0, vec![1.0], Variant::ScalarBounded).unwrap();
        assert!(matches!(run(&cfg), Err(Error::Config(_))));
        let cfg = SimConfig::new(Scheme::RademacherBasis { n: 5 }, 6, 10, 0, vec![1.0], Variant::RegularIi).unwrap();
        assert!(matches!(run(&cfg), Err(Error::Config(_))));
        let cfg = SimConfig { space: SpaceDescriptor::lp(3, 4.0).unwrap(), ..SimConfig::new(g, 8, 10, 0, vec![1.0], Variant::RegularIi).unwrap() };
        assert!(matches!(run(&cfg), Err(Error::Config(_))));
        let sp = SpaceDescriptor::lp(3, f64::INFINITY).unwrap();
        let cfg = SimConfig::new(Scheme::BoundedSphere { space: sp, sigma: 1.0 }, 8, 10, 0, vec![1.0], Variant::SmoothIii).unwrap();
        assert!(matches!(run(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn csv_layout() {
        let cfg = SimConfig::new(fixed_1d(), 4, 100, 0, vec![0.0, 1.0], Variant::SmoothIii).unwrap();
        let csv = run(&cfg).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "gamma,threshold,hits,trials,freq,freq_upper_conf,bound,regime");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0,2,"));
    }

    #[derive(Debug)]
    struct Coin;

    impl IncrementSampler for Coin {
        fn shape(&self) -> crate::norm_core::Shape {
            crate::norm_core::Shape::Vector(2)
        }
        fn draw(&self, _step: usize, rng: &mut ChaCha8Rng) -> Result<Point<f64>> {
            use rand::Rng;
            Ok(Point::vector([if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0]))
        }
    }

    #[test]
    fn custom_schemes_are_uncertified() {
        let scheme = Scheme::Custom { sampler: Arc::new(Coin), alpha: 2.0, sigma: 1.0, bounded: true };
        let cfg = SimConfig {
            scheme,
            space: SpaceDescriptor::Euclidean { n: 2 },
            n: 9,
            trials: 50,
            seed: 1,
            gammas: vec![0.0],
            variant: Variant::SmoothIii,
        };
        let r = run(&cfg).unwrap();
        assert!(!r.certificate.certified);
        // S_9 of a ±1 walk is odd, so every squared norm is at least 1.
        assert!(r.mean_sq_norm >= 1.0);
        assert_eq!(r.second_moment_ok(), Some(true));
    }
}
