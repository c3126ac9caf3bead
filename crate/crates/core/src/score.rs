//! Extended-real scores with a total order.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// A real-valued score that may also be positive or negative infinity.
///
/// Ordering is total: `NegInfinity < Finite(_) < PosInfinity`, and finite
/// values compare numerically. NaN is never stored.
#[derive(Debug, Clone, Copy)]
pub enum Score {
    NegInfinity,
    Finite(f64),
    PosInfinity,
}

impl Score {
    /// Converts a float, mapping IEEE infinities onto the sentinels.
    /// Returns `None` for NaN.
    pub fn from_f64(value: f64) -> Option<Self> {
        if value.is_nan() {
            None
        } else if value == f64::INFINITY {
            Some(Score::PosInfinity)
        } else if value == f64::NEG_INFINITY {
            Some(Score::NegInfinity)
        } else {
            Some(Score::Finite(value))
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Score::NegInfinity => f64::NEG_INFINITY,
            Score::Finite(v) => v,
            Score::PosInfinity => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Score::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Score::Finite(_))
    }

    fn rank(self) -> u8 {
        match self {
            Score::NegInfinity => 0,
            Score::Finite(_) => 1,
            Score::PosInfinity => 2,
        }
    }
}

impl PartialEq for Score {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Score {}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            // -0.0 and 0.0 are the same score
            (Score::Finite(a), Score::Finite(b)) => a.partial_cmp(b).unwrap_or(Ordering::Equal),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl From<f64> for Score {
    /// Panics on NaN.
    fn from(value: f64) -> Self {
        Score::from_f64(value).expect("score must not be NaN")
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Score::NegInfinity => f.write_str("-inf"),
            Score::PosInfinity => f.write_str("+inf"),
            Score::Finite(v) => match f.precision() {
                Some(p) => write!(f, "{v:.p$}"),
                None => write!(f, "{v}"),
            },
        }
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Score::NegInfinity => serializer.serialize_str("-inf"),
            Score::PosInfinity => serializer.serialize_str("+inf"),
            Score::Finite(v) => serializer.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Score {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ScoreVisitor;

        impl Visitor<'_> for ScoreVisitor {
            type Value = Score;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number, \"+inf\" or \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Score, E> {
                Score::from_f64(v).ok_or_else(|| E::custom("NaN score"))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Score, E> {
                Ok(Score::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Score, E> {
                Ok(Score::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Score, E> {
                match v {
                    "+inf" | "inf" => Ok(Score::PosInfinity),
                    "-inf" => Ok(Score::NegInfinity),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        deserializer.deserialize_any(ScoreVisitor)
    }
}
