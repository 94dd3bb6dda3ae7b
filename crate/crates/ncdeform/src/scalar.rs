//! Gaussian rational scalars: exact complex numbers `re + im*i` with
//! arbitrary-precision rational parts.
//!
//! This is the coefficient field of the whole exact engine. Values print as
//! `p/q`, `r/t*i` or `p/q+r/t*i` and parse back bit-exactly.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::AlgebraError;

/// Exact complex scalar with rational real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ExactScalar {
    pub re: BigRational,
    pub im: BigRational,
}

impl ExactScalar {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Self {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn from_int(v: i64) -> Self {
        Self {
            re: BigRational::from_integer(BigInt::from(v)),
            im: BigRational::zero(),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    pub fn from_rational(re: BigRational) -> Self {
        Self {
            re,
            im: BigRational::zero(),
        }
    }

    /// `v * i` for rational `v`.
    pub fn imaginary(im: BigRational) -> Self {
        Self {
            re: BigRational::zero(),
            im,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn inv(&self) -> Result<Self, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        let norm = &self.re * &self.re + &self.im * &self.im;
        Ok(Self {
            re: &self.re / &norm,
            im: -&self.im / &norm,
        })
    }

    pub fn div(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        Ok(self * &rhs.inv()?)
    }

    /// Integer power with nonnegative exponent.
    pub fn pow(&self, mut exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            exp >>= 1;
            if exp > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Lossy conversion for the floating mirrors.
    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.re)
    }

    pub fn to_complex_f64(&self) -> (f64, f64) {
        (rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    let num = r.numer();
    let den = r.denom();
    // Good enough for desk-scale magnitudes; exact integers up to 2^53.
    let fnum: f64 = num.to_string().parse().unwrap_or(f64::NAN);
    let fden: f64 = den.to_string().parse().unwrap_or(f64::NAN);
    fnum / fden
}

impl Add for &ExactScalar {
    type Output = ExactScalar;
    fn add(self, rhs: &ExactScalar) -> ExactScalar {
        ExactScalar {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: &ExactScalar) -> ExactScalar {
        ExactScalar {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul for &ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        // Fast paths: purely real factors dominate in practice.
        if self.im.is_zero() && rhs.im.is_zero() {
            return ExactScalar {
                re: &self.re * &rhs.re,
                im: BigRational::zero(),
            };
        }
        ExactScalar {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

impl AddAssign<&ExactScalar> for ExactScalar {
    fn add_assign(&mut self, rhs: &ExactScalar) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&ExactScalar> for ExactScalar {
    fn sub_assign(&mut self, rhs: &ExactScalar) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

fn rational_str(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", rational_str(&self.re));
        }
        let im_part = format!("{}*i", rational_str(&self.im.abs()));
        if self.re.is_zero() {
            if self.im.is_negative() {
                return write!(f, "-{im_part}");
            }
            return write!(f, "{im_part}");
        }
        let sign = if self.im.is_negative() { '-' } else { '+' };
        write!(f, "{}{}{}", rational_str(&self.re), sign, im_part)
    }
}

impl FromStr for ExactScalar {
    type Err = AlgebraError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = || AlgebraError::InvalidScalar(text.to_string());
        let s = text.trim();
        if s.is_empty() {
            return Err(bad());
        }
        // Split on the last '+'/'-' that is not the leading sign; both pieces
        // are plain rationals, with the imaginary one ending in "*i" or "i".
        let mut split_at = None;
        for (idx, ch) in s.char_indices().skip(1) {
            if (ch == '+' || ch == '-') && !matches!(&s[idx - 1..idx], "/" | "+" | "-") {
                split_at = Some(idx);
            }
        }
        let (first, second) = match split_at {
            Some(idx) => (&s[..idx], &s[idx..]),
            None => (s, ""),
        };
        let mut re = BigRational::zero();
        let mut im = BigRational::zero();
        for piece in [first, second] {
            if piece.is_empty() {
                continue;
            }
            if let Some(body) = piece
                .strip_suffix("*i")
                .or_else(|| piece.strip_suffix('i'))
            {
                let body = match body {
                    "" | "+" => "1".to_string(),
                    "-" => "-1".to_string(),
                    other => other.trim_start_matches('+').to_string(),
                };
                im = BigRational::from_str(&body).map_err(|_| bad())?;
            } else {
                let body = piece.trim_start_matches('+');
                re = BigRational::from_str(body).map_err(|_| bad())?;
            }
        }
        Ok(Self { re, im })
    }
}

pub fn big_rational_from_str(text: &str) -> Result<BigRational, AlgebraError> {
    BigRational::from_str(text.trim())
        .map_err(|_| AlgebraError::InvalidScalar(text.to_string()))
}

/// Rational square root, when it exists: `sqrt(p/q)` with both `p` and `q`
/// perfect squares.
pub fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let num = r.numer().sqrt();
    let den = r.denom().sqrt();
    if &(&num * &num) == r.numer() && &(&den * &den) == r.denom() {
        Some(BigRational::new(num, den))
    } else {
        None
    }
}

/// Binomial coefficient `C(top, m)` for half-integer `top`, as used by the
/// sqrt power series.
pub fn binomial_half(m: u32) -> BigRational {
    // C(1/2, m) = (1/2)(1/2-1)...(1/2-m+1)/m!
    let mut acc = BigRational::one();
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    for j in 0..m {
        let factor = &half - BigRational::from_integer(BigInt::from(j));
        acc = acc * factor / BigRational::from_integer(BigInt::from(j + 1));
    }
    acc
}
