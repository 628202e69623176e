//! Corpus-level analyses: rank-bucket distributions, tail usage, and the
//! entropy/rank kernel density estimate.

mod kde;
mod ranks;

pub use kde::{entropy_rank_points, kde2d, scott_bandwidths, GridSpec, KdeGrid};
pub use ranks::{rank_distribution, tail_ratio, RankDistribution, TailRatio};

/// Serializes non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`,
/// which JSON cannot carry as numbers.
pub(crate) mod float_or_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad float {other:?}"))),
            },
        }
    }
}
