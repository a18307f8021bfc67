use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Which normed space a point lives in.
///
/// Exponents are stored as `f64` with `f64::INFINITY` standing for `p = ∞`;
/// only `p ∈ [2, ∞]` is admitted.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceDescriptor {
    Euclidean { n: usize },
    Lp { n: usize, p: f64 },
    Schatten { m: usize, n: usize, p: f64 },
    /// `(Σ ‖x^i‖_i^p)^{1/p}` over a product of child spaces.
    BlockLp { children: Vec<SpaceDescriptor>, p: f64 },
    /// `Σ ‖x‖_i` over children sharing one ambient space.
    SumOfNorms { children: Vec<SpaceDescriptor> },
}

/// Layout of the points a descriptor accepts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    Vector(usize),
    Matrix(usize, usize),
    Block(Vec<Shape>),
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Vector(n) => write!(f, "vector[{n}]"),
            Shape::Matrix(m, n) => write!(f, "matrix[{m}x{n}]"),
            Shape::Block(children) => {
                write!(f, "block(")?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 2.0 {
        return Err(invalid(format!("exponent p must lie in [2, inf], got {p}")));
    }
    Ok(())
}

fn check_dim(name: &str, n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid(format!("dimension {name} must be at least 1")));
    }
    Ok(())
}

impl SpaceDescriptor {
    pub fn euclidean(n: usize) -> Result<Self> {
        check_dim("n", n)?;
        Ok(Self::Euclidean { n })
    }

    pub fn lp(n: usize, p: f64) -> Result<Self> {
        check_dim("n", n)?;
        check_exponent(p)?;
        Ok(Self::Lp { n, p })
    }

    pub fn schatten(m: usize, n: usize, p: f64) -> Result<Self> {
        check_dim("m", m)?;
        check_dim("n", n)?;
        check_exponent(p)?;
        Ok(Self::Schatten { m, n, p })
    }

    pub fn block(children: Vec<SpaceDescriptor>, p: f64) -> Result<Self> {
        let s = Self::BlockLp { children, p };
        s.validate()?;
        Ok(s)
    }

    pub fn sum(children: Vec<SpaceDescriptor>) -> Result<Self> {
        let s = Self::SumOfNorms { children };
        s.validate()?;
        Ok(s)
    }

    /// Checks every invariant recursively.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Euclidean { n } => check_dim("n", *n),
            Self::Lp { n, p } => {
                check_dim("n", *n)?;
                check_exponent(*p)
            }
            Self::Schatten { m, n, p } => {
                check_dim("m", *m)?;
                check_dim("n", *n)?;
                check_exponent(*p)
            }
            Self::BlockLp { children, p } => {
                check_exponent(*p)?;
                if children.is_empty() {
                    return Err(invalid("block space needs at least one child"));
                }
                children.iter().try_for_each(Self::validate)
            }
            Self::SumOfNorms { children } => {
                if children.is_empty() {
                    return Err(invalid("sum of norms needs at least one child"));
                }
                children.iter().try_for_each(Self::validate)?;
                let shape = children[0].shape();
                if children.iter().any(|c| c.shape() != shape) {
                    return Err(invalid("sum-of-norms children must share one ambient space"));
                }
                Ok(())
            }
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            Self::Euclidean { n } | Self::Lp { n, .. } => Shape::Vector(*n),
            Self::Schatten { m, n, .. } => Shape::Matrix(*m, *n),
            Self::BlockLp { children, .. } => Shape::Block(children.iter().map(Self::shape).collect()),
            Self::SumOfNorms { children } => children[0].shape(),
        }
    }

    /// Real dimension of the underlying linear space.
    pub fn dim(&self) -> usize {
        match self {
            Self::Euclidean { n } | Self::Lp { n, .. } => *n,
            Self::Schatten { m, n, .. } => m * n,
            Self::BlockLp { children, .. } => children.iter().map(Self::dim).sum(),
            Self::SumOfNorms { children } => children[0].dim(),
        }
    }

    /// Whether `‖x‖²` is continuously differentiable with an exposed gradient.
    pub fn is_smooth(&self) -> bool {
        match self {
            Self::Euclidean { .. } => true,
            Self::Lp { p, .. } | Self::Schatten { p, .. } => p.is_finite(),
            Self::BlockLp { children, p } => p.is_finite() && children.iter().all(Self::is_smooth),
            Self::SumOfNorms { .. } => false,
        }
    }
}

fn fmt_exponent(p: f64) -> String {
    if p.is_infinite() {
        "inf".to_string()
    } else if p.fract() == 0.0 && p.abs() < 1e15 {
        format!("{}", p as i64)
    } else {
        format!("{p}")
    }
}

fn fmt_children(f: &mut fmt::Formatter<'_>, children: &[SpaceDescriptor]) -> fmt::Result {
    write!(f, "[")?;
    let mut i = 0;
    let mut first = true;
    while i < children.len() {
        let mut run = 1;
        while i + run < children.len() && children[i + run] == children[i] {
            run += 1;
        }
        if !first {
            write!(f, "|")?;
        }
        first = false;
        if run > 1 {
            write!(f, "{run}*")?;
        }
        write!(f, "{}", children[i])?;
        i += run;
    }
    write!(f, "]")
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Euclidean { n } => write!(f, "euclidean:n={n}"),
            Self::Lp { n, p } => write!(f, "lp:n={n},p={}", fmt_exponent(*p)),
            Self::Schatten { m, n, p } => write!(f, "schatten:m={m},n={n},p={}", fmt_exponent(*p)),
            Self::BlockLp { children, p } => {
                write!(f, "block:p={}", fmt_exponent(*p))?;
                fmt_children(f, children)
            }
            Self::SumOfNorms { children } => {
                write!(f, "sum")?;
                fmt_children(f, children)
            }
        }
    }
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

pub(crate) fn parse_exponent(s: &str) -> Result<f64> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
        return Ok(f64::INFINITY);
    }
    s.parse::<f64>().map_err(|_| parse_err(format!("bad exponent '{s}'")))
}

/// Parses `key=value` pairs separated by commas.
pub(crate) fn parse_params<'a>(s: &'a str, allowed: &[&str]) -> Result<Vec<(&'a str, &'a str)>> {
    let mut out = Vec::new();
    if s.trim().is_empty() {
        return Ok(out);
    }
    for part in s.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| parse_err(format!("expected key=value, got '{part}'")))?;
        let k = k.trim();
        if !allowed.contains(&k) {
            return Err(parse_err(format!("unknown parameter '{k}'")));
        }
        if out.iter().any(|(seen, _)| *seen == k) {
            return Err(parse_err(format!("duplicate parameter '{k}'")));
        }
        out.push((k, v.trim()));
    }
    Ok(out)
}

pub(crate) fn lookup<'a>(params: &[(&'a str, &'a str)], key: &str) -> Option<&'a str> {
    params.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
}

pub(crate) fn require<'a>(params: &[(&'a str, &'a str)], key: &str, ctx: &str) -> Result<&'a str> {
    lookup(params, key).ok_or_else(|| parse_err(format!("{ctx}: missing parameter '{key}'")))
}

pub(crate) fn parse_usize(s: &str, key: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| parse_err(format!("parameter '{key}' must be a nonnegative integer, got '{s}'")))
}

/// Splits `a|b|c` at depth zero with respect to square brackets.
fn split_top_level(s: &str) -> Result<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => {
                depth -= 1;
                if depth < 0 {
                    return Err(parse_err("unbalanced ']'"));
                }
            }
            '|' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(parse_err("unbalanced '['"));
    }
    parts.push(&s[start..]);
    Ok(parts)
}

fn parse_children(body: &str) -> Result<Vec<SpaceDescriptor>> {
    let mut children = Vec::new();
    for part in split_top_level(body)? {
        let part = part.trim();
        let (count, desc) = match part.split_once('*') {
            Some((k, rest)) if !k.contains('[') && !k.contains(':') => (parse_usize(k.trim(), "repeat")?, rest),
            _ => (1, part),
        };
        if count == 0 {
            return Err(parse_err("repeat count must be positive"));
        }
        let child: SpaceDescriptor = desc.parse()?;
        children.extend(std::iter::repeat_n(child, count));
    }
    Ok(children)
}

/// Splits `head[body]` into head and body; `body` is `None` without brackets.
fn split_bracketed(s: &str) -> Result<(&str, Option<&str>)> {
    match s.find('[') {
        None => Ok((s, None)),
        Some(i) => {
            if !s.ends_with(']') {
                return Err(parse_err(format!("expected trailing ']' in '{s}'")));
            }
            Ok((&s[..i], Some(&s[i + 1..s.len() - 1])))
        }
    }
}

impl FromStr for SpaceDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, body) = split_bracketed(s)?;
        let (kind, params) = head.split_once(':').unwrap_or((head, ""));
        let kind = kind.trim().to_ascii_lowercase();
        let desc = match kind.as_str() {
            "euclidean" | "l2" => {
                let ps = parse_params(params, &["n"])?;
                Self::euclidean(parse_usize(require(&ps, "n", "euclidean")?, "n")?)?
            }
            "lp" => {
                let ps = parse_params(params, &["n", "p"])?;
                Self::lp(
                    parse_usize(require(&ps, "n", "lp")?, "n")?,
                    parse_exponent(require(&ps, "p", "lp")?)?,
                )?
            }
            "schatten" => {
                let ps = parse_params(params, &["m", "n", "p"])?;
                Self::schatten(
                    parse_usize(require(&ps, "m", "schatten")?, "m")?,
                    parse_usize(require(&ps, "n", "schatten")?, "n")?,
                    parse_exponent(require(&ps, "p", "schatten")?)?,
                )?
            }
            "block" => {
                let ps = parse_params(params, &["p"])?;
                let body = body.ok_or_else(|| parse_err("block needs [children]"))?;
                Self::block(parse_children(body)?, parse_exponent(require(&ps, "p", "block")?)?)?
            }
            "sum" => {
                parse_params(params, &[])?;
                let body = body.ok_or_else(|| parse_err("sum needs [children]"))?;
                Self::sum(parse_children(body)?)?
            }
            other => return Err(parse_err(format!("unknown space kind '{other}'"))),
        };
        if body.is_some() && !matches!(desc, Self::BlockLp { .. } | Self::SumOfNorms { .. }) {
            return Err(parse_err(format!("'{kind}' takes no children")));
        }
        Ok(desc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_documented_forms() {
        assert_eq!("lp:n=10,p=inf".parse::<SpaceDescriptor>().unwrap(), SpaceDescriptor::Lp { n: 10, p: f64::INFINITY });
        assert_eq!(
            "schatten:m=3,n=4,p=2".parse::<SpaceDescriptor>().unwrap(),
            SpaceDescriptor::Schatten { m: 3, n: 4, p: 2.0 }
        );
        let b: SpaceDescriptor = "block:p=inf[4*euclidean:n=3]".parse().unwrap();
        assert_eq!(b.dim(), 12);
        assert_eq!(b.to_string(), "block:p=inf[4*euclidean:n=3]");
    }

    #[test]
    fn rejects_small_exponent_and_zero_dims() {
        assert!("lp:n=3,p=1.5".parse::<SpaceDescriptor>().is_err());
        assert!("lp:n=0,p=3".parse::<SpaceDescriptor>().is_err());
        assert!("lp:n=3".parse::<SpaceDescriptor>().is_err());
        assert!("lp:n=3,p=3,q=1".parse::<SpaceDescriptor>().is_err());
        assert!("sum[euclidean:n=2|euclidean:n=3]".parse::<SpaceDescriptor>().is_err());
        assert!("block:p=2[]".parse::<SpaceDescriptor>().is_err());
    }

    fn leaf() -> impl Strategy<Value = SpaceDescriptor> {
        let p = prop_oneof![Just(2.0), Just(2.5), Just(3.0), Just(f64::INFINITY), 2.0f64..40.0];
        prop_oneof![
            (1usize..6).prop_map(|n| SpaceDescriptor::Euclidean { n }),
            (1usize..6, p.clone()).prop_map(|(n, p)| SpaceDescriptor::Lp { n, p }),
            (1usize..4, 1usize..4, p).prop_map(|(m, n, p)| SpaceDescriptor::Schatten { m, n, p }),
        ]
    }

    fn descriptor() -> impl Strategy<Value = SpaceDescriptor> {
        leaf().prop_recursive(2, 12, 4, |inner| {
            prop_oneof![
                (prop::collection::vec(inner.clone(), 1..4), prop_oneof![Just(2.0), Just(f64::INFINITY), 2.0f64..9.0])
                    .prop_map(|(children, p)| SpaceDescriptor::BlockLp { children, p }),
                (inner, 1usize..4).prop_map(|(c, k)| SpaceDescriptor::SumOfNorms { children: vec![c; k] }),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_parse_roundtrip(d in descriptor()) {
            let text = d.to_string();
            let back: SpaceDescriptor = text.parse().unwrap();
            prop_assert_eq!(back, d);
        }
    }
}
