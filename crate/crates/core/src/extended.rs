use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A real number extended by the two infinities. Variant order gives the
/// natural total order, so the derived comparisons are the right ones.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum ExtendedReal {
    NegInf,
    Finite(f64),
    PosInf,
}

pub use ExtendedReal::{NegInf, PosInf};

impl ExtendedReal {
    /// Maps IEEE infinities onto the matching variant. NaN is kept as a
    /// finite payload so it surfaces in comparisons instead of vanishing.
    pub fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            PosInf
        } else if x == f64::NEG_INFINITY {
            NegInf
        } else {
            ExtendedReal::Finite(x)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            NegInf => f64::NEG_INFINITY,
            ExtendedReal::Finite(x) => x,
            PosInf => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn is_neg_inf(self) -> bool {
        matches!(self, NegInf)
    }

    /// Sum with the convention that anything involving `-inf` is `-inf`.
    pub fn add_pessimistic(self, other: Self) -> Self {
        match (self, other) {
            (NegInf, _) | (_, NegInf) => NegInf,
            (PosInf, _) | (_, PosInf) => PosInf,
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::from_f64(a + b),
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(x: f64) -> Self {
        ExtendedReal::from_f64(x)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegInf => f.write_str("-inf"),
            ExtendedReal::Finite(x) => write!(f, "{x}"),
            PosInf => f.write_str("+inf"),
        }
    }
}

impl std::ops::Neg for ExtendedReal {
    type Output = Self;

    fn neg(self) -> Self {
        match self {
            NegInf => PosInf,
            ExtendedReal::Finite(x) => ExtendedReal::Finite(-x),
            PosInf => NegInf,
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NegInf => s.serialize_str("-inf"),
            ExtendedReal::Finite(x) => s.serialize_f64(*x),
            PosInf => s.serialize_str("+inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(ExtendedReal::Finite(x)),
            Raw::Text(t) => match t.as_str() {
                "-inf" => Ok(NegInf),
                "+inf" | "inf" => Ok(PosInf),
                other => Err(serde::de::Error::custom(format!("expected a number or ±inf, got {other:?}"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_places_infinities_at_the_ends() {
        let xs = [PosInf, ExtendedReal::Finite(-1e300), NegInf, ExtendedReal::Finite(2.0)];
        let mut sorted = xs.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(sorted, vec![NegInf, ExtendedReal::Finite(-1e300), ExtendedReal::Finite(2.0), PosInf]);
    }

    #[test]
    fn pessimistic_sum_absorbs_into_neg_inf() {
        assert_eq!(PosInf.add_pessimistic(NegInf), NegInf);
        assert_eq!(ExtendedReal::Finite(1.0).add_pessimistic(ExtendedReal::Finite(2.0)), ExtendedReal::Finite(3.0));
    }

    #[test]
    fn json_round_trip() {
        let xs = vec![NegInf, ExtendedReal::Finite(0.25), PosInf];
        let text = serde_json::to_string(&xs).unwrap();
        assert_eq!(text, r#"["-inf",0.25,"+inf"]"#);
        let back: Vec<ExtendedReal> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, xs);
    }
}
