//! Extended reals `R ∪ {+∞}` with saturating arithmetic.
//!
//! Values of the discretized functional and of `p^p_M` live in the extended
//! half-line: either a finite `f64` or `+∞`. Arithmetic saturates at `+∞`
//! and is never allowed to produce a NaN.

use serde::{Deserialize, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Mul};

/// A finite real or `+∞`. NaN is not representable.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    /// Wraps a finite value; non-finite input saturates to `+∞`.
    pub fn finite(v: f64) -> Self {
        if v.is_finite() {
            ExtReal::Finite(v)
        } else {
            ExtReal::PosInf
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// The finite value, if any.
    pub fn value(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    /// The finite value, or `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn powf(self, e: f64) -> Self {
        match self {
            ExtReal::Finite(v) => ExtReal::finite(v.powf(e)),
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::finite(a + b),
            _ => ExtReal::PosInf,
        }
    }
}

impl Mul for ExtReal {
    type Output = ExtReal;
    fn mul(self, rhs: ExtReal) -> ExtReal {
        // 0 · ∞ = 0, the measure-theoretic convention the p^p_M calculus relies on.
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::finite(a * b),
            (ExtReal::Finite(a), ExtReal::PosInf) | (ExtReal::PosInf, ExtReal::Finite(a)) => {
                if a == 0.0 {
                    ExtReal::Finite(0.0)
                } else {
                    ExtReal::PosInf
                }
            }
            (ExtReal::PosInf, ExtReal::PosInf) => ExtReal::PosInf,
        }
    }
}

impl Mul<f64> for ExtReal {
    type Output = ExtReal;
    fn mul(self, rhs: f64) -> ExtReal {
        self * ExtReal::finite(rhs)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::PosInf => s.serialize_str("inf"),
        }
    }
}
