//! Command-line front end.

mod render;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use render::{round_value, Format, Output};

use crate::deviation::{gamma_star, invert_gamma, tail_bound, SigmaProfile, TailQuery, Variant};
use crate::error::{Error, Result};
use crate::norm_core::{huber_check, SpaceDescriptor};
use crate::sim::{run, Scheme, SimConfig};
use crate::smoothness::{
    char_check, display_bound, kappa_space, CertificateSource, smooth_constant, trace_check, verify_smoothness, TraceFunction,
};

/// Exit code for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code for invalid invocations and inputs.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for numerical failures inside a computation.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "regnorm", version, about = "Regularity constants, deviation bounds and martingale simulation")]
pub struct Cli {
    #[arg(long, value_enum, global = true, default_value = "table")]
    pub format: Format,
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Sigma profile: `const:<v>x<N>` or `file:<path>` (one value per line).
    #[arg(long)]
    pub sigma: String,
}

#[derive(Debug, Args)]
pub struct Sampling {
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regularity constant of a space.
    Kappa {
        #[arg(long)]
        space: String,
    },
    /// Crossover constant between the quadratic and the alpha-power tail.
    GammaStar {
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        profile: ProfileArgs,
    },
    /// Deviation threshold and probability bound.
    Bound {
        #[arg(long)]
        variant: Variant,
        #[arg(long)]
        kappa: f64,
        #[command(flatten)]
        profile: ProfileArgs,
        /// One or more comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        gamma: Vec<f64>,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
    },
    /// Smallest gamma whose bound is at most eps.
    Invert {
        #[arg(long)]
        variant: Variant,
        #[arg(long)]
        kappa: f64,
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
    },
    /// Samples the smoothness inequality of the certified smooth surrogate.
    VerifySmooth {
        #[arg(long)]
        space: String,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Samples the first-order characterizations of smoothness.
    CharCheck {
        #[arg(long)]
        space: String,
        /// Defaults to the space's smoothness constant.
        #[arg(long)]
        kappa: Option<f64>,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Checks trace-function derivatives against finite differences.
    TraceCheck {
        /// `cube`, `quartic`, `exp` or `abs:<rho>`.
        #[arg(long)]
        function: String,
        #[arg(long, default_value_t = 5)]
        dim: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Samples the Huber smoothing inequalities.
    HuberCheck {
        #[arg(long)]
        space: String,
        /// Fixed beta; sampled per trial when omitted.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte Carlo comparison of tail frequencies with the analytic bounds.
    Simulate {
        /// e.g. `rademacher-basis:n=100`, `gaussian-iso:n=5`, `bounded-sphere:sigma=3`.
        #[arg(long)]
        scheme: String,
        /// Simulation space; defaults to the scheme's own.
        #[arg(long)]
        space: Option<String>,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,3")]
        gammas: Vec<f64>,
        /// Defaults to regular_iii for bounded schemes and regular_ii otherwise.
        #[arg(long)]
        variant: Option<Variant>,
    },
}

/// What a finished invocation prints and returns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `const:<v>x<N>` or `file:<path>`.
pub fn parse_profile(text: &str) -> Result<SigmaProfile<f64>> {
    let bad = |v: &str| Error::Parse(format!("bad sigma value '{v}'"));
    if let Some(rest) = text.strip_prefix("const:") {
        let (v, n) = rest.split_once('x').ok_or_else(|| Error::Parse(format!("expected const:<v>x<N>, got '{text}'")))?;
        let v: f64 = v.trim().parse().map_err(|_| bad(v))?;
        let n: usize = n.trim().parse().map_err(|_| Error::Parse(format!("bad length '{n}'")))?;
        SigmaProfile::constant(v, n)
    } else if let Some(path) = text.strip_prefix("file:") {
        let body = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {path}: {e}")))?;
        let values = body
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| l.parse::<f64>().map_err(|_| bad(l)))
            .collect::<Result<Vec<_>>>()?;
        SigmaProfile::new(values)
    } else {
        Err(Error::Parse(format!("sigma profile must start with const: or file:, got '{text}'")))
    }
}

fn parse_function(text: &str) -> Result<TraceFunction<f64>> {
    match text {
        "cube" => Ok(TraceFunction::cube()),
        "quartic" => Ok(TraceFunction::quartic()),
        "exp" => Ok(TraceFunction::exp()),
        _ => match text.strip_prefix("abs:") {
            Some(r) => TraceFunction::abs_power(r.parse().map_err(|_| Error::Parse(format!("bad exponent '{r}'")))?),
            None => Err(Error::Parse(format!("unknown trace function '{text}'"))),
        },
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaOutput {
    pub space: String,
    #[serde(with = "crate::numfmt::sig12")]
    pub kappa: f64,
    #[serde(with = "crate::numfmt::sig12")]
    pub kappa_plus: f64,
    #[serde(with = "crate::numfmt::sig12")]
    pub rho_opt: f64,
    pub source: CertificateSource,
    #[serde(with = "crate::numfmt::sig12_opt")]
    pub display_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaStarOutput {
    #[serde(with = "crate::numfmt::sig12")]
    pub alpha: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(with = "crate::numfmt::sig12")]
    pub gamma_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertOutput {
    pub variant: Variant,
    #[serde(with = "crate::numfmt::sig12")]
    pub eps: f64,
    #[serde(with = "crate::numfmt::sig12")]
    pub gamma: f64,
    #[serde(with = "crate::numfmt::sig12")]
    pub threshold: f64,
    #[serde(with = "crate::numfmt::sig12")]
    pub bound: f64,
}

/// Runs one parsed command. The second value goes to standard error.
pub fn dispatch(cmd: &Command) -> Result<(Output, Option<String>)> {
    let space = |s: &str| s.parse::<SpaceDescriptor>();
    Ok(match cmd {
        Command::Kappa { space: s } => {
            let sp = space(s)?;
            let c = kappa_space(&sp)?;
            let out = KappaOutput {
                space: sp.to_string(),
                kappa: c.kappa,
                kappa_plus: c.kappa_plus,
                rho_opt: c.smooth_exponent_rho,
                source: c.source,
                display_bound: display_bound(&sp),
            };
            (Output::single(to_value(&out)), None)
        }
        Command::GammaStar { alpha, profile } => {
            let p = parse_profile(&profile.sigma)?;
            let g = gamma_star(*alpha, &p)?;
            (Output::single(to_value(&GammaStarOutput { alpha: *alpha, n: p.len(), gamma_star: g })), None)
        }
        Command::Bound { variant, kappa, profile, gamma, alpha } => {
            let p = parse_profile(&profile.sigma)?;
            let rows = gamma
                .iter()
                .map(|&g| {
                    tail_bound(&TailQuery { alpha: *alpha, gamma: g, kappa: *kappa, profile: p.clone(), variant: *variant })
                        .map(|r| to_value(&r))
                })
                .collect::<Result<Vec<_>>>()?;
            let out = if rows.len() == 1 { Output::single(rows.into_iter().next().expect("one row")) } else { Output::list(rows) };
            (out, None)
        }
        Command::Invert { variant, kappa, profile, eps, alpha } => {
            let p = parse_profile(&profile.sigma)?;
            let mut q = TailQuery { alpha: *alpha, gamma: 0.0, kappa: *kappa, profile: p, variant: *variant };
            let g = invert_gamma(*eps, &q)?;
            q.gamma = g;
            let r = tail_bound(&q)?;
            let out = InvertOutput { variant: *variant, eps: *eps, gamma: g, threshold: r.threshold, bound: r.prob_bound };
            (Output::single(to_value(&out)), None)
        }
        Command::VerifySmooth { space: s, sampling } => {
            let sp = space(s)?;
            let cert = kappa_space(&sp)?;
            (Output::single(to_value(&verify_smoothness(&sp, &cert, sampling.trials, sampling.seed)?)), None)
        }
        Command::CharCheck { space: s, kappa, sampling } => {
            let sp = space(s)?;
            let k = match kappa {
                Some(k) => *k,
                None => smooth_constant(&sp)?,
            };
            (Output::single(to_value(&char_check(&sp, k, sampling.trials, sampling.seed)?)), None)
        }
        Command::TraceCheck { function, dim, trials, seed } => {
            let tf = parse_function(function)?;
            (Output::single(to_value(&trace_check(&tf, *dim, *trials, *seed)?)), None)
        }
        Command::HuberCheck { space: s, beta, trials, seed } => {
            let sp = space(s)?;
            (Output::single(to_value(&huber_check(&sp, *beta, *trials, *seed)?)), None)
        }
        Command::Simulate { scheme, space: s, n, trials, seed, gammas, variant } => {
            let sp = s.as_deref().map(space).transpose()?;
            let scheme = Scheme::parse(scheme, sp.as_ref())?;
            let cert = scheme.certify_condition();
            let variant = variant.unwrap_or(if cert.bounded { Variant::RegularIii } else { Variant::RegularIi });
            let space = match sp {
                Some(sp) => sp,
                None => scheme.default_space().ok_or_else(|| Error::Config("--space is required".into()))?,
            };
            let cfg = SimConfig { scheme, space, n: *n, trials: *trials, seed: *seed, gammas: gammas.clone(), variant };
            let report = run(&cfg)?;
            let note = format!("elapsed {:.3} s", report.elapsed_secs);
            (Output::with_rows(to_value(&report), "records"), Some(note))
        }
    })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numeric(_) => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name), runs the command and
/// renders its output.
pub fn execute<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Outcome { code: EXIT_OK, stdout: e.to_string(), stderr: String::new() }
                }
                _ => {
                    let text = e.to_string();
                    let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid invocation");
                    Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: format!("{line}\n") }
                }
            };
        }
    };
    match dispatch(&cli.command) {
        Ok((out, note)) => {
            let text = out.render(cli.format);
            let mut stderr = note.map(|n| format!("{n}\n")).unwrap_or_default();
            let stdout = match &cli.out {
                Some(path) => match std::fs::write(path, &text) {
                    Ok(()) => String::new(),
                    Err(e) => {
                        stderr.push_str(&format!("error: cannot write {}: {e}\n", path.display()));
                        return Outcome { code: EXIT_USAGE, stdout: String::new(), stderr };
                    }
                },
                None => text,
            };
            Outcome { code: EXIT_OK, stdout, stderr }
        }
        Err(e) => Outcome { code: exit_code(&e), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}
