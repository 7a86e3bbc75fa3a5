use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{Rational, RationalMatrix};

/// Renders as `p/q`, or `p` when the denominator is 1.
pub fn format_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `p/q`, `p`, or a finite decimal such as `-1.25`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(int).map_err(|_| bad())?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac = BigInt::from_str(frac).map_err(|_| bad())?;
        let mag = Rational::new(int.abs() * &scale + frac, scale);
        return Ok(if negative { -mag } else { mag });
    }
    Ok(Rational::from_integer(BigInt::from_str(s).map_err(|_| bad())?))
}

pub fn rational_to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Fallback for magnitudes beyond f64's direct conversion path.
        let n = x.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = x.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// A non-negative exact quantity standing for the square of a length,
/// determinant or height.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SquaredMagnitude(Rational);

impl SquaredMagnitude {
    pub fn new(value: Rational) -> Result<Self> {
        if value.is_negative() {
            return Err(Error::Domain(format!(
                "squared magnitude must be non-negative, got {}",
                format_rational(&value)
            )));
        }
        Ok(SquaredMagnitude(value))
    }

    pub fn from_integer(v: u64) -> Self {
        SquaredMagnitude(Rational::from_integer(BigInt::from(v)))
    }

    /// Square of the given rational.
    pub fn square_of(x: &Rational) -> Self {
        SquaredMagnitude(x * x)
    }

    pub fn zero() -> Self {
        SquaredMagnitude(Rational::zero())
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn into_value(self) -> Rational {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.0)
    }

    /// Unsquared magnitude, for presentation only.
    pub fn sqrt_f64(&self) -> f64 {
        self.to_f64().sqrt()
    }
}

impl fmt::Display for SquaredMagnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

impl fmt::Debug for SquaredMagnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SquaredMagnitude({self})")
    }
}

impl FromStr for SquaredMagnitude {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SquaredMagnitude::new(parse_rational(s)?)
    }
}

/// Determinant of `b * b^T`; zero when `b` is rank deficient.
pub fn det_squared(b: &RationalMatrix) -> SquaredMagnitude {
    if b.rows() == 0 {
        return SquaredMagnitude(Rational::from_integer(1.into()));
    }
    let g = b.gram();
    let det = g.determinant().expect("gram matrix is square");
    // Round-off is impossible here; the sign guard only catches bugs.
    debug_assert!(!det.is_negative());
    SquaredMagnitude(det)
}

pub fn gram(b: &RationalMatrix) -> RationalMatrix {
    b.gram()
}
