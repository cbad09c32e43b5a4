//! Distance values that stay exact whenever the underlying space allows it.
//!
//! Tree computations produce rationals (for `d_A`) or `c * e^{-x}` with rational
//! `c` and `x` (for the integral metric). Floating spaces produce plain `f64`.
//! Comparisons between two exact values of compatible shape are decided without
//! rounding; everything else falls back to `f64`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Rational(BigRational),
    /// `coeff * exp(-exponent)`.
    ExpDecay {
        coeff: BigRational,
        exponent: BigRational,
    },
    Float(f64),
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact rational image of a finite float.
pub fn exact(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

impl Value {
    pub fn zero() -> Self {
        Value::Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Value::Rational(BigRational::one())
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Value::Float(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Value::Rational(r) => r.is_zero(),
            Value::ExpDecay { coeff, .. } => coeff.is_zero(),
            Value::Float(x) => *x == 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Rational(r) => to_f64(r),
            Value::ExpDecay { coeff, exponent } => {
                if coeff.is_zero() {
                    return 0.0;
                }
                let e = to_f64(exponent);
                let c = to_f64(coeff);
                // Split the exponent so e^{-e} does not overflow before the product is formed.
                if e < -700.0 {
                    (c.ln() - e).exp()
                } else {
                    c * (-e).exp()
                }
            }
            Value::Float(x) => *x,
        }
    }

    /// Rational view when the value is an exact rational (including `c * e^0`).
    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            Value::Rational(r) => Some(r.clone()),
            Value::ExpDecay { coeff, exponent } if exponent.is_zero() || coeff.is_zero() => {
                Some(coeff.clone())
            }
            _ => None,
        }
    }

    fn normalized(self) -> Self {
        match self {
            Value::ExpDecay { coeff, exponent } if exponent.is_zero() || coeff.is_zero() => {
                Value::Rational(coeff)
            }
            v => v,
        }
    }

    pub fn add(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Rational(a), Value::Rational(b)) => Value::Rational(a + b),
            (
                Value::ExpDecay {
                    coeff: c1,
                    exponent: e1,
                },
                Value::ExpDecay {
                    coeff: c2,
                    exponent: e2,
                },
            ) if e1 == e2 => Value::ExpDecay {
                coeff: c1 + c2,
                exponent: e1.clone(),
            }
            .normalized(),
            _ if self.is_zero() => other.clone(),
            _ if other.is_zero() => self.clone(),
            _ => Value::Float(self.to_f64() + other.to_f64()),
        }
    }

    pub fn mul(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Rational(a), Value::Rational(b)) => Value::Rational(a * b),
            (Value::Rational(a), Value::ExpDecay { coeff, exponent })
            | (Value::ExpDecay { coeff, exponent }, Value::Rational(a)) => Value::ExpDecay {
                coeff: coeff * a,
                exponent: exponent.clone(),
            }
            .normalized(),
            (
                Value::ExpDecay {
                    coeff: c1,
                    exponent: e1,
                },
                Value::ExpDecay {
                    coeff: c2,
                    exponent: e2,
                },
            ) => Value::ExpDecay {
                coeff: c1 * c2,
                exponent: e1 + e2,
            }
            .normalized(),
            _ => Value::Float(self.to_f64() * other.to_f64()),
        }
    }

    /// `self / other`, or `None` when `other` is zero.
    pub fn div(&self, other: &Value) -> Option<Value> {
        if other.is_zero() {
            return None;
        }
        Some(match (self, other) {
            (Value::Rational(a), Value::Rational(b)) => Value::Rational(a / b),
            (Value::ExpDecay { coeff, exponent }, Value::Rational(b)) => Value::ExpDecay {
                coeff: coeff / b,
                exponent: exponent.clone(),
            }
            .normalized(),
            (Value::Rational(a), Value::ExpDecay { coeff, exponent }) => Value::ExpDecay {
                coeff: a / coeff,
                exponent: -exponent,
            }
            .normalized(),
            (
                Value::ExpDecay {
                    coeff: c1,
                    exponent: e1,
                },
                Value::ExpDecay {
                    coeff: c2,
                    exponent: e2,
                },
            ) => Value::ExpDecay {
                coeff: c1 / c2,
                exponent: e1 - e2,
            }
            .normalized(),
            _ => Value::Float(self.to_f64() / other.to_f64()),
        })
    }

    /// Multiply by `e^{p}`; exact for exact inputs.
    pub fn mul_exp(&self, p: &BigRational) -> Value {
        match self {
            Value::Rational(a) => Value::ExpDecay {
                coeff: a.clone(),
                exponent: -p,
            }
            .normalized(),
            Value::ExpDecay { coeff, exponent } => Value::ExpDecay {
                coeff: coeff.clone(),
                exponent: exponent - p,
            }
            .normalized(),
            Value::Float(x) => Value::Float(x * to_f64(p).exp()),
        }
    }

    /// `(coeff, exponent)` with `self = coeff * e^{-exponent}`; `None` for floats.
    fn exp_form(&self) -> Option<(BigRational, BigRational)> {
        match self {
            Value::Rational(r) => Some((r.clone(), BigRational::zero())),
            Value::ExpDecay { coeff, exponent } => Some((coeff.clone(), exponent.clone())),
            Value::Float(_) => None,
        }
    }

    /// Exact comparison of two exact values, `None` when either is a float or
    /// the rational bounds on `e` are too coarse to separate them.
    pub fn exact_cmp(&self, other: &Value) -> Option<Ordering> {
        let (c1, e1) = self.exp_form()?;
        let (c2, e2) = other.exp_form()?;
        if e1 == e2 || c1.is_zero() || c2.is_zero() || c1.is_positive() != c2.is_positive() {
            return Some(if e1 == e2 { c1.cmp(&c2) } else { c1.signum().cmp(&c2.signum()) });
        }
        if c1.is_negative() {
            return cmp_positive_exp(-c2, e2, -c1, e1);
        }
        cmp_positive_exp(c1, e1, c2, e2)
    }
}

/// Rational bracket around `e`.
fn e_bounds() -> (BigRational, BigRational) {
    let den = BigInt::from(10u64.pow(15));
    (
        BigRational::new(BigInt::from(2_718_281_828_459_045u64), den.clone()),
        BigRational::new(BigInt::from(2_718_281_828_459_046u64), den),
    )
}

/// Largest `|p|` and `q` for which `e^{p/q}` is bracketed by powers.
const MAX_EXP_NUMER: i64 = 4096;
const MAX_EXP_DENOM: i64 = 64;

/// Compare `c1 e^{-e1}` with `c2 e^{-e2}` for positive `c1`, `c2` and `e1 != e2`.
fn cmp_positive_exp(c1: BigRational, e1: BigRational, c2: BigRational, e2: BigRational) -> Option<Ordering> {
    if c1 >= c2 && e1 < e2 {
        return Some(Ordering::Greater);
    }
    if c1 <= c2 && e1 > e2 {
        return Some(Ordering::Less);
    }
    // c1 e^{-e1} vs c2 e^{-e2}  <=>  c1^q vs c2^q e^{p}, with p/q = e1 - e2.
    let k = e1 - e2;
    let (p, q) = (k.numer().to_i64()?, k.denom().to_i64()?);
    if p.abs() > MAX_EXP_NUMER || q > MAX_EXP_DENOM {
        return None;
    }
    let q = q as i32;
    let (lhs, base) = (c1.pow(q), c2.pow(q));
    let (lo, hi) = e_bounds();
    let (lo, hi) = if p >= 0 {
        (lo.pow(p as i32), hi.pow(p as i32))
    } else {
        (hi.pow(p as i32), lo.pow(p as i32))
    };
    if lhs <= &base * lo {
        Some(Ordering::Less)
    } else if lhs >= base * hi {
        Some(Ordering::Greater)
    } else {
        None
    }
}

impl Value {
    /// `self <= bound`: exact with zero slack when `self` is a rational, otherwise
    /// in `f64` with relative slack `rel_tol`.
    pub fn le_bound(&self, bound: f64, rel_tol: f64) -> bool {
        if let (Some(v), Some(b)) = (self.as_rational(), exact(bound)) {
            return v <= b;
        }
        self.to_f64() <= bound + rel_tol * bound.abs()
    }

    /// `self >= bound`, with the same conventions as [`Value::le_bound`].
    pub fn ge_bound(&self, bound: f64, rel_tol: f64) -> bool {
        if let (Some(v), Some(b)) = (self.as_rational(), exact(bound)) {
            return v >= b;
        }
        self.to_f64() >= bound - rel_tol * bound.abs()
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Value) -> Option<Ordering> {
        self.exact_cmp(other)
            .or_else(|| self.to_f64().partial_cmp(&other.to_f64()))
    }
}

/// `{"value": f64, "exact": "..."}`, the exact form omitted for floats.
impl serde::Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Value", 2)?;
        st.serialize_field("value", &self.to_f64())?;
        if self.is_exact() {
            st.serialize_field("exact", &self.to_string())?;
        } else {
            st.skip_field("exact")?;
        }
        st.end()
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<BigRational> for Value {
    fn from(r: BigRational) -> Self {
        Value::Rational(r)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Rational(r) => write!(f, "{r}"),
            Value::ExpDecay { coeff, exponent } => write!(f, "{coeff}*e^(-{exponent})"),
            Value::Float(x) => write!(f, "{x}"),
        }
    }
}

/// Serde adapter writing a rational as its `p/q` text.
pub mod rational_text {
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        text.trim().parse().map_err(D::Error::custom)
    }
}
