//! Extended nonnegative reals `[0, ∞]` with the measure-theoretic conventions
//! `0·∞ = 0`, `t/0 = ∞` for `t > 0` and `0/0 = 0`.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul};

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// A value in `[0, ∞]`.
///
/// `∞` is an explicit value, never the result of silent overflow into NaN.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal(0.0);
    pub const ONE: ExtReal = ExtReal(1.0);
    pub const INFINITY: ExtReal = ExtReal(f64::INFINITY);

    /// Wraps a nonnegative value. Negative zero is normalised; NaN and negative
    /// inputs panic since they indicate a bug upstream.
    pub fn new(v: f64) -> Self {
        assert!(v >= 0.0, "ExtReal must be nonnegative, got {v}");
        ExtReal(v + 0.0)
    }

    /// Clamps tiny negative roundoff to zero.
    pub fn from_nonneg_approx(v: f64) -> Self {
        assert!(!v.is_nan(), "ExtReal cannot hold NaN");
        ExtReal(v.max(0.0))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0.0
    }

    /// `self^e` with `0^e = 0` for `e > 0`, `∞^e = ∞` for `e > 0`, and `x^0 = 1`.
    pub fn powf(self, e: f64) -> Self {
        if e == 0.0 {
            return ExtReal::ONE;
        }
        if self.0 == 0.0 {
            return if e > 0.0 { ExtReal::ZERO } else { ExtReal::INFINITY };
        }
        if self.0.is_infinite() {
            return if e > 0.0 { ExtReal::INFINITY } else { ExtReal::ZERO };
        }
        ExtReal(self.0.powf(e))
    }

    /// `self^e` on the support only: `0^0` is taken as `0`, i.e. the power is
    /// multiplied by `χ_{self > 0}`.
    pub fn powf_on_support(self, e: f64) -> Self {
        if self.0 == 0.0 {
            ExtReal::ZERO
        } else {
            self.powf(e)
        }
    }

    pub fn sqrt(self) -> Self {
        self.powf(0.5)
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Relative comparison `self <= other` with slack `tol·max(1, |other|)`.
    pub fn le_tol(self, other: Self, tol: f64) -> bool {
        if other.is_infinite() {
            return true;
        }
        if self.is_infinite() {
            return false;
        }
        self.0 <= other.0 + tol * other.0.abs().max(self.0.abs()).max(1.0)
    }

    /// Relative equality within `tol`; two infinities compare equal.
    pub fn approx_eq(self, other: Self, tol: f64) -> bool {
        match (self.is_infinite(), other.is_infinite()) {
            (true, true) => true,
            (false, false) => (self.0 - other.0).abs() <= tol * self.0.abs().max(other.0.abs()).max(1.0),
            _ => false,
        }
    }
}

impl fmt::Debug for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{:?}", self.0)
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::new(v)
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: Self) -> Self {
        ExtReal(self.0 + rhs.0)
    }
}

impl Mul for ExtReal {
    type Output = ExtReal;
    fn mul(self, rhs: Self) -> Self {
        if self.0 == 0.0 || rhs.0 == 0.0 {
            ExtReal::ZERO
        } else {
            ExtReal(self.0 * rhs.0)
        }
    }
}

impl Div for ExtReal {
    type Output = ExtReal;
    fn div(self, rhs: Self) -> Self {
        match (self.0 == 0.0, rhs.0 == 0.0) {
            (true, _) => ExtReal::ZERO,
            (false, true) => ExtReal::INFINITY,
            _ if self.is_infinite() && rhs.is_infinite() => {
                panic!("∞/∞ is undefined in the extended-real conventions")
            }
            _ => ExtReal(self.0 / rhs.0),
        }
    }
}

impl Sum for ExtReal {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ExtReal::ZERO, |a, b| a + b)
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtReal;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative number or the string \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
                if v.is_finite() && v >= 0.0 {
                    Ok(ExtReal::new(v))
                } else {
                    Err(E::custom(format!("invalid extended nonnegative real {v}")))
                }
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
                Ok(ExtReal::new(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
                self.visit_f64(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
                if v == "inf" {
                    Ok(ExtReal::INFINITY)
                } else {
                    Err(E::custom(format!("unexpected string {v:?}")))
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_times_infinity_is_zero() {
        assert_eq!(ExtReal::ZERO * ExtReal::INFINITY, ExtReal::ZERO);
        assert_eq!(ExtReal::INFINITY * ExtReal::ZERO, ExtReal::ZERO);
    }

    #[test]
    fn division_conventions() {
        assert_eq!(ExtReal::new(3.0) / ExtReal::ZERO, ExtReal::INFINITY);
        assert_eq!(ExtReal::ZERO / ExtReal::ZERO, ExtReal::ZERO);
        assert_eq!(ExtReal::new(3.0) / ExtReal::new(2.0), ExtReal::new(1.5));
        assert_eq!(ExtReal::new(3.0) / ExtReal::INFINITY, ExtReal::ZERO);
    }

    #[test]
    fn powers_at_the_ends() {
        assert_eq!(ExtReal::ZERO.powf(0.5), ExtReal::ZERO);
        assert_eq!(ExtReal::INFINITY.powf(0.5), ExtReal::INFINITY);
        assert_eq!(ExtReal::ZERO.powf(0.0), ExtReal::ONE);
        assert_eq!(ExtReal::ZERO.powf_on_support(0.0), ExtReal::ZERO);
        assert_eq!(ExtReal::new(4.0).powf_on_support(0.0), ExtReal::ONE);
    }

    #[test]
    fn json_round_trip_uses_inf_string() {
        let v = vec![ExtReal::new(1.5), ExtReal::INFINITY];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[1.5,"inf"]"#);
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<ExtReal>("-1.0").is_err());
    }
}
