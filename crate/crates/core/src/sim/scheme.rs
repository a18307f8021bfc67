use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::deviation::SigmaProfile;
use crate::error::{invalid, Error, Result};
use crate::norm_core::{lookup, norm, parse_params, parse_usize, require, Point, Shape, SpaceDescriptor};

/// A user-supplied increment generator. It must be sign-symmetric (mean
/// zero) and satisfy the declared light-tail condition; neither property is
/// verified, so reports built on it are marked uncertified.
pub trait IncrementSampler: Send + Sync + fmt::Debug {
    fn shape(&self) -> Shape;
    fn draw(&self, step: usize, rng: &mut ChaCha8Rng) -> Result<Point<f64>>;
}

/// Martingale-difference generators with analytic tail certificates.
///
/// Steps are numbered from 1.
#[derive(Debug, Clone)]
pub enum Scheme {
    /// Step `i` emits `±e_i`; only defined for `i ≤ n`.
    RademacherBasis { n: usize },
    /// `±σ·u` for a fixed unit vector `u`.
    FixedDirectionRademacher { space: SpaceDescriptor, direction: Point<f64>, sigma: f64 },
    /// `scale·g` with `g` standard normal in `ℝⁿ` (Euclidean norm).
    GaussianIso { n: usize, scale: f64 },
    /// `σ·g/‖g‖`, uniform in direction and exactly of norm `σ`.
    BoundedSphere { space: SpaceDescriptor, sigma: f64 },
    Custom { sampler: Arc<dyn IncrementSampler>, alpha: f64, sigma: f64, bounded: bool },
}

/// The light-tail condition a scheme satisfies: `E exp{(‖ξ_i‖/σ)^α} ≤ e`
/// at every step, and `‖ξ_i‖ ≤ σ` surely when `bounded`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub alpha: f64,
    pub sigma: f64,
    pub bounded: bool,
    /// False for user-supplied schemes whose condition is declared, not derived.
    pub certified: bool,
}

impl Certificate {
    pub fn profile(&self, steps: usize) -> Result<SigmaProfile<f64>> {
        SigmaProfile::constant(self.sigma, steps)
    }
}

/// Largest `s` with `E exp{s‖g‖²} ≤ e` for standard normal `g ∈ ℝⁿ`:
/// `(1−2s)^{−n/2} = e` gives `s = (1 − e^{−2/n})/2`.
pub fn gaussian_exponent(n: usize) -> f64 {
    -(-2.0 / n as f64).exp_m1() / 2.0
}

impl Scheme {
    pub fn fixed_direction(space: SpaceDescriptor, sigma: f64) -> Result<Self> {
        let ones = Point::zeros(&space.shape()).map(&|_| 1.0);
        let r = norm(&space, &ones)?;
        let s = Scheme::FixedDirectionRademacher { direction: ones.scale(1.0 / r), space, sigma };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match self {
            Scheme::RademacherBasis { n } | Scheme::GaussianIso { n, .. } if *n == 0 => {
                Err(invalid("dimension n must be at least 1"))
            }
            Scheme::RademacherBasis { .. } => Ok(()),
            Scheme::GaussianIso { scale, .. } => positive("scale", *scale),
            Scheme::FixedDirectionRademacher { space, direction, sigma } => {
                positive("sigma", *sigma)?;
                space.validate()?;
                let r = norm(space, direction)?;
                if (r - 1.0).abs() > 1e-12 {
                    return Err(invalid(format!("direction must have unit norm, got {r}")));
                }
                Ok(())
            }
            Scheme::BoundedSphere { space, sigma } => {
                space.validate()?;
                positive("sigma", *sigma)
            }
            Scheme::Custom { alpha, sigma, .. } => {
                positive("sigma", *sigma)?;
                if !(1.0..=2.0).contains(alpha) {
                    return Err(invalid(format!("declared alpha must lie in [1, 2], got {alpha}")));
                }
                Ok(())
            }
        }
    }

    /// Layout of the increments.
    pub fn shape(&self) -> Shape {
        match self {
            Scheme::RademacherBasis { n } | Scheme::GaussianIso { n, .. } => Shape::Vector(*n),
            Scheme::FixedDirectionRademacher { space, .. } | Scheme::BoundedSphere { space, .. } => space.shape(),
            Scheme::Custom { sampler, .. } => sampler.shape(),
        }
    }

    /// The space a scheme is naturally measured in, when it fixes one.
    pub fn default_space(&self) -> Option<SpaceDescriptor> {
        match self {
            Scheme::RademacherBasis { n } | Scheme::GaussianIso { n, .. } => Some(SpaceDescriptor::Euclidean { n: *n }),
            Scheme::FixedDirectionRademacher { space, .. } | Scheme::BoundedSphere { space, .. } => Some(space.clone()),
            Scheme::Custom { .. } => None,
        }
    }

    /// Number of steps the scheme defines, if finite.
    pub fn horizon(&self) -> Option<usize> {
        match self {
            Scheme::RademacherBasis { n } => Some(*n),
            _ => None,
        }
    }

    /// Whether the certificate's `σ` refers to the norm of `space`.
    pub fn check_space(&self, space: &SpaceDescriptor) -> Result<()> {
        if space.shape() != self.shape() {
            return Err(Error::Config(format!("scheme emits {} but the space holds {}", self.shape(), space.shape())));
        }
        let own = match self {
            Scheme::GaussianIso { n, .. } => Some(SpaceDescriptor::Euclidean { n: *n }),
            Scheme::FixedDirectionRademacher { space, .. } | Scheme::BoundedSphere { space, .. } => Some(space.clone()),
            Scheme::RademacherBasis { .. } | Scheme::Custom { .. } => None,
        };
        if let Some(own) = own {
            if &own != space {
                return Err(Error::Config(format!(
                    "the scheme's certificate is stated in {own}; simulating in {space} is not certified"
                )));
            }
        }
        if let SpaceDescriptor::Schatten { m, n, .. } = space {
            if *m > 16 || *n > 16 {
                return Err(Error::Config("Schatten simulation is limited to 16x16 matrices".into()));
            }
        }
        Ok(())
    }

    /// The analytic `(α, σ, bounded)` certificate.
    ///
    /// Bounded schemes satisfy the `α = 2` condition with their own `σ` since
    /// `‖ξ‖/σ ≤ 1` forces `E exp{‖ξ‖²/σ²} ≤ e`. RademacherBasis is certified
    /// in the Euclidean (or any `ℓ_p`) norm, where `‖±e_i‖ = 1`.
    pub fn certify_condition(&self) -> Certificate {
        let bounded = |sigma: f64| Certificate { alpha: 2.0, sigma, bounded: true, certified: true };
        match self {
            Scheme::RademacherBasis { .. } => bounded(1.0),
            Scheme::FixedDirectionRademacher { sigma, .. } | Scheme::BoundedSphere { sigma, .. } => bounded(*sigma),
            Scheme::GaussianIso { n, scale } => Certificate {
                alpha: 2.0,
                sigma: scale / gaussian_exponent(*n).sqrt(),
                bounded: false,
                certified: true,
            },
            Scheme::Custom { alpha, sigma, bounded, .. } => {
                Certificate { alpha: *alpha, sigma: *sigma, bounded: *bounded, certified: false }
            }
        }
    }

    /// Increment at `step` (1-based) from the substream `rng`.
    pub fn draw_increment(&self, step: usize, rng: &mut ChaCha8Rng) -> Result<Point<f64>> {
        let sign = |rng: &mut ChaCha8Rng| if rng.random::<bool>() { 1.0 } else { -1.0 };
        match self {
            Scheme::RademacherBasis { n } => {
                if step == 0 || step > *n {
                    return Err(Error::Config(format!("rademacher-basis:n={n} defines steps 1..={n}, asked for {step}")));
                }
                let mut v = vec![0.0; *n];
                v[step - 1] = sign(rng);
                Ok(Point::vector(v))
            }
            Scheme::FixedDirectionRademacher { direction, sigma, .. } => Ok(direction.scale(sigma * sign(rng))),
            Scheme::GaussianIso { n, scale } => Ok(Point::vector((0..*n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)))),
            Scheme::BoundedSphere { space, sigma } => loop {
                let g: Vec<f64> = (0..space.dim()).map(|_| rng.sample(StandardNormal)).collect();
                let g = Point::from_coords(&space.shape(), &g)?;
                let r = norm(space, &g)?;
                if r > 0.0 {
                    break Ok(g.scale(sigma / r));
                }
            },
            Scheme::Custom { sampler, .. } => sampler.draw(step, rng),
        }
    }

    /// Parses the command-line form, e.g. `rademacher-basis:n=100`,
    /// `fixed-direction:sigma=1`, `gaussian-iso:n=5,scale=0.5`,
    /// `bounded-sphere:sigma=3`. Schemes tied to a space take it from `space`.
    pub fn parse(text: &str, space: Option<&SpaceDescriptor>) -> Result<Self> {
        let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
        let need_space = || {
            space.cloned().ok_or_else(|| Error::Config(format!("scheme '{kind}' needs a --space")))
        };
        let float = |params: &[(&str, &str)], key: &str, default: Option<f64>| -> Result<f64> {
            match (lookup(params, key), default) {
                (Some(v), _) => v.parse().map_err(|_| Error::Parse(format!("bad value '{v}' for {key}"))),
                (None, Some(d)) => Ok(d),
                (None, None) => Err(Error::Parse(format!("scheme '{kind}' needs {key}=..."))),
            }
        };
        let s = match kind {
            "rademacher-basis" => {
                let p = parse_params(rest, &["n"])?;
                Scheme::RademacherBasis { n: parse_usize(require(&p, "n", kind)?, "n")? }
            }
            "fixed-direction" => {
                let p = parse_params(rest, &["sigma"])?;
                return Scheme::fixed_direction(need_space()?, float(&p, "sigma", Some(1.0))?);
            }
            "gaussian-iso" => {
                let p = parse_params(rest, &["n", "scale"])?;
                Scheme::GaussianIso { n: parse_usize(require(&p, "n", kind)?, "n")?, scale: float(&p, "scale", Some(1.0))? }
            }
            "bounded-sphere" => {
                let p = parse_params(rest, &["sigma"])?;
                Scheme::BoundedSphere { space: need_space()?, sigma: float(&p, "sigma", Some(1.0))? }
            }
            _ => return Err(Error::Parse(format!("unknown scheme '{kind}'"))),
        };
        s.validate()?;
        Ok(s)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::RademacherBasis { n } => write!(f, "rademacher-basis:n={n}"),
            Scheme::FixedDirectionRademacher { sigma, .. } => write!(f, "fixed-direction:sigma={sigma}"),
            Scheme::GaussianIso { n, scale } => write!(f, "gaussian-iso:n={n},scale={scale}"),
            Scheme::BoundedSphere { sigma, .. } => write!(f, "bounded-sphere:sigma={sigma}"),
            Scheme::Custom { .. } => write!(f, "custom"),
        }
    }
}
