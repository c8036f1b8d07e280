use std::cmp::Ordering;
use std::fmt;

/// A nonnegative length that may be infinite.
///
/// Used for weighted distances (unreachable targets) and for percolation
/// thresholds whose quantile argument hits 1 on an unbounded law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Length {
    Finite(f64),
    Infinite,
}

impl Length {
    pub fn is_finite(self) -> bool {
        matches!(self, Length::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Length::Finite(x) => Some(x),
            Length::Infinite => None,
        }
    }

    /// `f64` view with `+inf` for the infinite variant.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn from_f64(x: f64) -> Self {
        if x.is_finite() {
            Length::Finite(x)
        } else {
            Length::Infinite
        }
    }
}

impl PartialOrd for Length {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Length::Finite(a), Length::Finite(b)) => a.partial_cmp(b),
            (Length::Finite(_), Length::Infinite) => Some(Ordering::Less),
            (Length::Infinite, Length::Finite(_)) => Some(Ordering::Greater),
            (Length::Infinite, Length::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Length::Finite(x) => write!(f, "{x}"),
            Length::Infinite => f.write_str("inf"),
        }
    }
}

/// Finite lengths serialize as numbers, the infinite one as `"inf"`.
impl serde::Serialize for Length {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Length::Finite(x) => s.serialize_f64(*x),
            Length::Infinite => s.serialize_str("inf"),
        }
    }
}

impl std::str::FromStr for Length {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        if s == "inf" {
            return Ok(Length::Infinite);
        }
        s.parse::<f64>()
            .map(Length::Finite)
            .map_err(|e| crate::Error::Parse(format!("length {s:?}: {e}")))
    }
}
