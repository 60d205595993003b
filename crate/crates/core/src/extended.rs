use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A finite double or `+inf`: the value type of every divergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PositiveInfinity,
}

impl ExtendedReal {
    /// Wraps `value`; `+inf` maps to [`ExtendedReal::PositiveInfinity`].
    ///
    /// # Panics
    /// On NaN or `-inf`, which no divergence in this crate can produce.
    pub fn new(value: f64) -> Self {
        assert!(!value.is_nan(), "ExtendedReal cannot hold NaN");
        if value == f64::INFINITY {
            ExtendedReal::PositiveInfinity
        } else {
            assert!(value.is_finite(), "ExtendedReal cannot hold -inf");
            ExtendedReal::Finite(value)
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedReal::PositiveInfinity)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::PositiveInfinity => None,
        }
    }

    /// `f64` view with `+inf` for the infinite case.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn add_finite(self, x: f64) -> Self {
        match self {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(v + x),
            ExtendedReal::PositiveInfinity => ExtendedReal::PositiveInfinity,
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtendedReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            (Finite(_), PositiveInfinity) => Some(Ordering::Less),
            (PositiveInfinity, Finite(_)) => Some(Ordering::Greater),
            (PositiveInfinity, PositiveInfinity) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PositiveInfinity => f.write_str("+inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => crate::io::float::serialize(v, serializer),
            ExtendedReal::PositiveInfinity => serializer.serialize_str("+inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(v) if v.is_finite() => Ok(ExtendedReal::Finite(v)),
            Repr::Text(s) if s == "+inf" => Ok(ExtendedReal::PositiveInfinity),
            _ => Err(serde::de::Error::custom("expected a finite number or \"+inf\"")),
        }
    }
}

/// Signed difference `lhs - rhs` of two extended reals, keeping track of
/// which side (if any) is infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gap {
    Finite(f64),
    /// `lhs = +inf`, `rhs` finite.
    PositiveInfinity,
    /// `lhs` finite, `rhs = +inf`.
    NegativeInfinity,
    /// Both sides `+inf`; vacuously monotone.
    BothInfinite,
}

impl Gap {
    pub fn between(lhs: ExtendedReal, rhs: ExtendedReal) -> Self {
        use ExtendedReal::*;
        match (lhs, rhs) {
            (Finite(a), Finite(b)) => Gap::Finite(a - b),
            (PositiveInfinity, Finite(_)) => Gap::PositiveInfinity,
            (Finite(_), PositiveInfinity) => Gap::NegativeInfinity,
            (PositiveInfinity, PositiveInfinity) => Gap::BothInfinite,
        }
    }

    /// Ordering key; `BothInfinite` sorts above all finite gaps so it never
    /// becomes a minimum while any finite gap exists.
    pub fn sort_key(self) -> f64 {
        match self {
            Gap::Finite(v) => v,
            Gap::PositiveInfinity | Gap::BothInfinite => f64::INFINITY,
            Gap::NegativeInfinity => f64::NEG_INFINITY,
        }
    }

    /// `lhs >= rhs - slack`, with `+inf` on the left always satisfying it.
    pub fn satisfies(self, slack: f64) -> bool {
        match self {
            Gap::Finite(v) => v >= -slack,
            Gap::PositiveInfinity | Gap::BothInfinite => true,
            Gap::NegativeInfinity => false,
        }
    }
}

impl Serialize for Gap {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Gap::Finite(v) => crate::io::float::serialize(v, serializer),
            Gap::PositiveInfinity => serializer.serialize_str("+inf"),
            Gap::NegativeInfinity => serializer.serialize_str("-inf"),
            Gap::BothInfinite => serializer.serialize_str("both-infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Gap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(v) if v.is_finite() => Ok(Gap::Finite(v)),
            Repr::Text(s) => match s.as_str() {
                "+inf" => Ok(Gap::PositiveInfinity),
                "-inf" => Ok(Gap::NegativeInfinity),
                "both-infinite" => Ok(Gap::BothInfinite),
                _ => Err(serde::de::Error::custom(format!("unknown gap tag {s:?}"))),
            },
            _ => Err(serde::de::Error::custom("expected a finite gap or a gap tag")),
        }
    }
}
