//! Twelve-significant-digit rendering of reals, shared by every text and
//! structured output so golden files stay stable across platforms.

use serde::de::{self, Deserializer, Visitor};
use serde::Serializer;

use crate::scalar::Scalar;

/// Rounds to 12 significant digits (non-finite values pass through).
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Text form: plain decimal for moderate magnitudes, exponent form otherwise,
/// `inf`/`-inf`/`nan` for non-finite values.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round12(x);
    let a = r.abs();
    if r == 0.0 {
        "0".into()
    } else if (1e-5..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn parse_special(v: &str) -> Option<f64> {
    match v {
        "inf" | "+inf" | "infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        _ => v.parse().ok(),
    }
}

struct F64Visitor;

impl Visitor<'_> for F64Visitor {
    type Value = f64;

    fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        parse_special(v).ok_or_else(|| E::custom(format!("bad number '{v}'")))
    }
}

/// `serde(with = "sig12")` for scalar fields: numbers rounded to 12
/// significant digits, non-finite values as strings.
pub mod sig12 {
    use super::*;

    pub fn serialize<T: Scalar, S: Serializer>(x: &T, s: S) -> Result<S::Ok, S::Error> {
        let v = x.to_f64_lossy();
        if v.is_finite() {
            s.serialize_f64(round12(v))
        } else {
            s.serialize_str(&fmt12(v))
        }
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        d.deserialize_any(F64Visitor).map(T::lit)
    }
}

/// `serde(with = "sig12_vec")` for lists of scalars.
pub mod sig12_vec {
    use serde::ser::SerializeSeq;
    use serde::Deserialize;

    use super::*;

    #[derive(serde::Serialize, Deserialize)]
    struct Wrapped(#[serde(with = "super::sig12")] f64);

    pub fn serialize<T: Scalar, S: Serializer>(xs: &[T], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&Wrapped(x.to_f64_lossy()))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<Vec<T>, D::Error> {
        let v: Vec<Wrapped> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|w| T::lit(w.0)).collect())
    }
}

/// `serde(with = "sig12_opt")` for optional scalars.
pub mod sig12_opt {
    use serde::Deserialize;

    use super::*;

    #[derive(serde::Serialize, Deserialize)]
    struct Wrapped(#[serde(with = "super::sig12")] f64);

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&Wrapped(*v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<Wrapped>::deserialize(d)?.map(|w| w.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::{Deserialize, Serialize};

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct R {
        #[serde(with = "sig12")]
        a: f64,
        #[serde(with = "sig12")]
        b: f64,
    }

    #[test]
    fn text_forms() {
        assert_eq!(fmt12(2f64.sqrt() * 8.0), "11.313708499");
        assert_eq!(fmt12(1.0), "1");
        assert_eq!(fmt12(f64::INFINITY), "inf");
        assert_eq!(fmt12(1e-20), "1e-20");
        assert_eq!(fmt12(-2.5e300), "-2.5e300");
        assert_eq!(fmt12(0.049787068367863944), "0.0497870683679");
    }

    #[test]
    fn structured_roundtrip_is_identity() {
        let r = R { a: std::f64::consts::PI, b: f64::INFINITY };
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(text, r#"{"a":3.14159265359,"b":"inf"}"#);
        let back: R = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
}
