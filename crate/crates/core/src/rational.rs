//! Exact rational scalars.
//!
//! Every quantity in this crate is a `Rational`; no floating point is used
//! anywhere. The scalar type is isolated here so that another exact field
//! could be substituted without touching the interval machinery.

use num::bigint::BigInt;
use num::rational::Ratio;
use num::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational number, always in lowest terms with a
/// positive denominator.
pub type Rational = Ratio<BigInt>;

/// Shorthand constructor for `n/d`. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Ratio::new(BigInt::from(n), BigInt::from(d))
}

/// Shorthand constructor for the integer `n`.
pub fn int(n: i64) -> Rational {
    Ratio::from_integer(BigInt::from(n))
}

/// Midpoint of two rationals.
pub fn midpoint(a: &Rational, b: &Rational) -> Rational {
    (a + b) / int(2)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational {input:?}: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: String,
}

/// Parses the textual form `p/q` (or `p` when the denominator is one).
///
/// This is the inverse of the `Display` impl on [`Rational`], which prints
/// `p/q` and drops `/q` when `q == 1`.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = |reason: &str| ParseRationalError {
        input: text.to_owned(),
        reason: reason.to_owned(),
    };
    let mut split = text.splitn(2, '/');
    let numer = split.next().unwrap_or("");
    let numer: BigInt = numer.trim().parse().map_err(|_| err("bad numerator"))?;
    match split.next() {
        None => Ok(Ratio::from_integer(numer)),
        Some(denom) => {
            let denom: BigInt = denom.trim().parse().map_err(|_| err("bad denominator"))?;
            if denom.is_zero() {
                return Err(err("denominator is zero"));
            }
            Ok(Ratio::new(numer, denom))
        }
    }
}

/// True when `x` is a positive quantity; used for slope checks.
pub fn is_positive(x: &Rational) -> bool {
    x.is_positive()
}

/// The multiplicative inverse. Panics on zero.
pub fn recip(x: &Rational) -> Rational {
    assert!(!x.is_zero(), "reciprocal of zero");
    Rational::one() / x
}
