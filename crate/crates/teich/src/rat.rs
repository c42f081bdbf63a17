//! Exact rational arithmetic for surface geometry.
//!
//! Edge vectors and deformation parameters carry an optional exact
//! representation next to their `f64` mirror, so linear operations on
//! rational data round-trip without drift. Values are parsed from and
//! printed to decimal strings (`"-1.25"`) or fractions (`"1/3"`).

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A complex number with exact rational real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatComplex {
    pub re: BigRational,
    pub im: BigRational,
}

impl RatComplex {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self::new(
            BigRational::from_integer(BigInt::from(re)),
            BigRational::from_integer(BigInt::from(im)),
        )
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// |z|² as an exact rational.
    pub fn norm_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::new(&self.re * s, &self.im * s)
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl Add for &RatComplex {
    type Output = RatComplex;
    fn add(self, rhs: &RatComplex) -> RatComplex {
        RatComplex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &RatComplex {
    type Output = RatComplex;
    fn sub(self, rhs: &RatComplex) -> RatComplex {
        RatComplex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &RatComplex {
    type Output = RatComplex;
    fn mul(self, rhs: &RatComplex) -> RatComplex {
        RatComplex::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Div for &RatComplex {
    type Output = RatComplex;
    fn div(self, rhs: &RatComplex) -> RatComplex {
        let d = rhs.norm_sq();
        let num = self * &rhs.conj();
        RatComplex::new(num.re / &d, num.im / &d)
    }
}

impl Neg for &RatComplex {
    type Output = RatComplex;
    fn neg(self) -> RatComplex {
        RatComplex::new(-self.re.clone(), -self.im.clone())
    }
}

/// Convert a `BigRational` to the nearest `f64` by one long division.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parse `"2"`, `"-1.25"`, or `"1/3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, ParseRationalError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRationalError(s.to_string()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| ParseRationalError(s.to_string()))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| ParseRationalError(s.to_string()))?;
        if d.is_zero() {
            return Err(ParseRationalError(s.to_string()));
        }
        return Ok(BigRational::new(n, d));
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(ParseRationalError(s.to_string()));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(ParseRationalError(s.to_string()));
    }
    let digits = format!("{int_part}{frac_part}");
    let n: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| ParseRationalError(s.to_string()))?
    };
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(BigRational::new(n * BigInt::from(sign), den))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a decimal or fraction: {0:?}")]
pub struct ParseRationalError(pub String);

/// Print a rational as a finite decimal when the denominator is of the
/// form 2^a·5^b, falling back to `"p/q"` otherwise.
pub fn format_rational(r: &BigRational) -> String {
    let r = r.reduced();
    let mut den = r.denom().clone();
    if den.is_one() {
        return r.numer().to_string();
    }
    let mut twos = 0u32;
    let mut fives = 0u32;
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let k = twos.max(fives);
    let scale = BigInt::from(10u32).pow(k);
    let scaled = r.numer() * &scale / r.denom();
    let neg = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let digits = if digits.len() <= k as usize {
        format!("{}{}", "0".repeat(k as usize + 1 - digits.len()), digits)
    } else {
        digits
    };
    let split = digits.len() - k as usize;
    let (int_part, frac_part) = digits.split_at(split);
    let sign = if neg { "-" } else { "" };
    format!("{sign}{int_part}.{frac_part}")
}

/// Exact square root of a non-negative rational, if one exists.
pub fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let r = r.reduced();
    let ns = r.numer().sqrt();
    let ds = r.denom().sqrt();
    if &(&ns * &ns) == r.numer() && &(&ds * &ds) == r.denom() {
        Some(BigRational::new(ns, ds))
    } else {
        None
    }
}

/// Solve the real 2×2 system `m · x = rhs` exactly.
///
/// `m` is row-major. Returns `None` when the determinant vanishes.
pub fn solve2x2(m: &[[BigRational; 2]; 2], rhs: &[BigRational; 2]) -> Option<[BigRational; 2]> {
    let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
    if det.is_zero() {
        return None;
    }
    let x = (&rhs[0] * &m[1][1] - &rhs[1] * &m[0][1]) / &det;
    let y = (&m[0][0] * &rhs[1] - &m[1][0] * &rhs[0]) / &det;
    Some([x, y])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_rational("2").unwrap(), rat(2, 1));
        assert_eq!(parse_rational("-1.25").unwrap(), rat(-5, 4));
        assert_eq!(parse_rational("0.1").unwrap(), rat(1, 10));
        assert_eq!(parse_rational("1/3").unwrap(), rat(1, 3));
        assert_eq!(parse_rational("-7/2").unwrap(), rat(-7, 2));
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn formats_round_trip() {
        for r in [rat(5, 4), rat(-1, 8), rat(3, 1), rat(1, 3), rat(-22, 7), rat(7, 10)] {
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
        assert_eq!(format_rational(&rat(1, 4)), "0.25");
        assert_eq!(format_rational(&rat(-1, 2)), "-0.5");
        assert_eq!(format_rational(&rat(1, 3)), "1/3");
    }

    #[test]
    fn sqrt_detects_perfect_squares() {
        assert_eq!(rational_sqrt(&rat(1, 4)).unwrap(), rat(1, 2));
        assert_eq!(rational_sqrt(&rat(9, 16)).unwrap(), rat(3, 4));
        assert!(rational_sqrt(&rat(1, 3)).is_none());
        assert!(rational_sqrt(&rat(-1, 4)).is_none());
    }

    #[test]
    fn complex_field_ops() {
        let a = RatComplex::from_ints(1, 2);
        let b = RatComplex::from_ints(3, -1);
        let prod = &a * &b;
        assert_eq!(prod, RatComplex::from_ints(5, 5));
        let back = &prod / &b;
        assert_eq!(back, a);
        assert_eq!(a.conj().im, rat(-2, 1));
    }

    #[test]
    fn solves_2x2() {
        let m = [[rat(2, 1), rat(1, 1)], [rat(1, 1), rat(3, 1)]];
        let rhs = [rat(5, 1), rat(10, 1)];
        let [x, y] = solve2x2(&m, &rhs).unwrap();
        assert_eq!(x, rat(1, 1));
        assert_eq!(y, rat(3, 1));
        let singular = [[rat(1, 1), rat(2, 1)], [rat(2, 1), rat(4, 1)]];
        assert!(solve2x2(&singular, &rhs).is_none());
    }
}
