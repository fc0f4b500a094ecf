//! Serde helpers for extended reals: `+inf` is written as the string `"inf"`
//! (JSON has no infinity literal), finite values as plain numbers.
//!
//! Use with `#[serde(with = "lao_core::extended::value")]` and the `vec` /
//! `matrix` variants for nested containers.

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

/// An `f64` that serializes `±inf` as `"inf"` / `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Ext(pub f64);

impl Serialize for Ext {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else if self.0.is_nan() {
            s.serialize_str("nan")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Ext {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct ExtVisitor;
        impl Visitor<'_> for ExtVisitor {
            type Value = Ext;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Ext, E> {
                Ok(Ext(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Ext, E> {
                Ok(Ext(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Ext, E> {
                Ok(Ext(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Ext, E> {
                match v {
                    "inf" | "+inf" => Ok(Ext(f64::INFINITY)),
                    "-inf" => Ok(Ext(f64::NEG_INFINITY)),
                    "nan" => Ok(Ext(f64::NAN)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(ExtVisitor)
    }
}

/// Textual form used in CSV output.
pub fn format(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        // shortest representation that round-trips
        format!("{v:?}")
    }
}

pub mod value {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        Ext(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ext::deserialize(d).map(|e| e.0)
    }
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| Ext(*x)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Ext>::deserialize(d)?.into_iter().map(|e| e.0).collect())
    }
}

pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(
            v.iter()
                .map(|row| row.iter().map(|x| Ext(*x)).collect::<Vec<_>>()),
        )
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        Ok(Vec::<Vec<Ext>>::deserialize(d)?
            .into_iter()
            .map(|row| row.into_iter().map(|e| e.0).collect())
            .collect())
    }
}
