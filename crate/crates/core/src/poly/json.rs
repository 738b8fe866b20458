//! JSON polynomial descriptor: `{ "degree": d, "coeffs": ["…", …] }`.
//!
//! Coefficients are strings holding an exact decimal (`"-1.25e-3"`) or a
//! rational `"p/q"`, listed from the constant term upward.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{Coeffs, Poly, PolyError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyDescriptor {
    pub degree: isize,
    pub coeffs: Vec<String>,
}

impl PolyDescriptor {
    pub fn from_poly(p: &Poly) -> Self {
        let coeffs = match p.coeffs() {
            Coeffs::Exact(v) => v.iter().map(format_rational).collect(),
            Coeffs::Float(v) => v.iter().map(|x| format!("{x:e}")).collect(),
        };
        Self {
            degree: p.degree(),
            coeffs,
        }
    }

    /// Parses the coefficients exactly; the declared degree must match.
    pub fn to_poly(&self) -> Result<Poly, PolyError> {
        let c = self
            .coeffs
            .iter()
            .map(|s| parse_coefficient(s))
            .collect::<Result<Vec<_>, _>>()?;
        let p = Poly::exact(c);
        if p.degree() != self.degree {
            return Err(PolyError::Descriptor(format!(
                "declared degree {} but coefficients give degree {}",
                self.degree,
                p.degree()
            )));
        }
        Ok(p)
    }
}

pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `"p/q"`, an integer, or a decimal with optional exponent, exactly.
pub fn parse_coefficient(s: &str) -> Result<BigRational, PolyError> {
    let s = s.trim();
    let bad = || PolyError::Descriptor(format!("cannot parse coefficient {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(PolyError::Descriptor(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part
            .chars()
            .chain(frac_part.chars())
            .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i64;
    if exp.unsigned_abs() > 100_000 {
        return Err(bad());
    }
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_coefficient("3/8").unwrap(), q(3, 8));
        assert_eq!(parse_coefficient("-0.125").unwrap(), q(-1, 8));
        assert_eq!(parse_coefficient("1.5e2").unwrap(), q(150, 1));
        assert_eq!(parse_coefficient("25e-2").unwrap(), q(1, 4));
        assert_eq!(parse_coefficient(".5").unwrap(), q(1, 2));
        assert!(parse_coefficient("abc").is_err());
        assert!(parse_coefficient("1/0").is_err());
        assert!(parse_coefficient("").is_err());
    }

    #[test]
    fn round_trip() {
        let p = Poly::exact(vec![q(0, 1), q(-3, 7), q(5, 1)]);
        let d = PolyDescriptor::from_poly(&p);
        let text = serde_json::to_string(&d).unwrap();
        let back: PolyDescriptor = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_poly().unwrap(), p);
    }

    #[test]
    fn float_round_trip_preserves_doubles() {
        let p = Poly::float(vec![0.1, -2.5e-7, 3.0]).unwrap();
        let back = PolyDescriptor::from_poly(&p).to_poly().unwrap();
        assert_eq!(back.float_coeffs(), p.float_coeffs());
    }

    #[test]
    fn degree_mismatch_rejected() {
        let d = PolyDescriptor {
            degree: 3,
            coeffs: vec!["1".into(), "2".into()],
        };
        assert!(d.to_poly().is_err());
    }
}
