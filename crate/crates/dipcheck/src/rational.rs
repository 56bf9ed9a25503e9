//! Exact rational parameters. Automaton parameters and weights are kept as
//! arbitrary-precision rationals so that weight computation is exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Parses `"p/q"` or a plain integer string into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty rational".to_string());
    }
    match s.split_once('/') {
        Some((num, den)) => {
            let n: BigInt = num
                .trim()
                .parse()
                .map_err(|_| format!("bad numerator in rational {s:?}"))?;
            let d: BigInt = den
                .trim()
                .parse()
                .map_err(|_| format!("bad denominator in rational {s:?}"))?;
            if d.is_zero() {
                return Err(format!("zero denominator in rational {s:?}"));
            }
            Ok(BigRational::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| format!("bad rational {s:?}"))?;
            Ok(BigRational::from_integer(n))
        }
    }
}

/// Canonical string form: `"p/q"` reduced, or `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Out-of-range rationals only arise from absurd inputs; saturate.
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub fn rational_from_int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rational_from_parts(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
