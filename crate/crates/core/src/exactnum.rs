//! Exact Gaussian-rational arithmetic.
//!
//! All symbolic computation (Groebner bases, normal forms, multiplication
//! matrices) runs over `Q(i)`. Rationals are `num_rational::BigRational`,
//! which already keeps `gcd(num, den) = 1` and `den > 0`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use num_rational::BigRational;

/// Parse `"a"`, `"-a"` or `"a/b"` into a canonical rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational literal `{s}`"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(BigRational::new(num, den))
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest double to a rational, with overflow reported as an error.
pub fn rational_to_f64(r: &BigRational) -> Result<f64> {
    let v = r.to_f64().unwrap_or(f64::NAN);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(format_rational(r)))
    }
}

/// Exact complex number with rational real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRational { re, im }
    }

    pub fn from_integer(n: i64) -> Self {
        GaussRational::real(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        GaussRational::real(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn real(re: BigRational) -> Self {
        GaussRational { re, im: BigRational::zero() }
    }

    pub fn i() -> Self {
        GaussRational { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn zero() -> Self {
        GaussRational::default()
    }

    pub fn one() -> Self {
        GaussRational::from_integer(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRational { re: self.re.clone(), im: -&self.im }
    }

    /// `|a|^2 = re^2 + im^2`, exact.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.norm_sqr();
        Ok(GaussRational { re: &self.re / &n, im: -&self.im / &n })
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self * &rhs.inv()?)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = GaussRational::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn to_complex(&self) -> Result<Complex64> {
        Ok(Complex64::new(rational_to_f64(&self.re)?, rational_to_f64(&self.im)?))
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return f.write_str(&format_rational(&self.re));
        }
        let sign = if self.im.is_negative() { '-' } else { '+' };
        write!(
            f,
            "({}){}({})i",
            format_rational(&self.re),
            sign,
            format_rational(&self.im.abs())
        )
    }
}

impl FromStr for GaussRational {
    type Err = Error;

    /// Accepts `a/b` (real) or `(a/b)+(c/d)i` / `(a/b)-(c/d)i`.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if !t.ends_with('i') {
            return parse_rational(&t).map(GaussRational::real);
        }
        let bad = || Error::Parse(format!("invalid Gaussian rational `{s}`"));
        let body = t.strip_suffix('i').ok_or_else(bad)?;
        let body = body.strip_suffix(')').ok_or_else(bad)?;
        let open = body.rfind('(').ok_or_else(bad)?;
        let im_text = &body[open + 1..];
        let head = &body[..open];
        let (re_text, neg) = if let Some(h) = head.strip_suffix('+') {
            (h, false)
        } else if let Some(h) = head.strip_suffix('-') {
            (h, true)
        } else {
            return Err(bad());
        };
        let re_text = re_text
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let re = parse_rational(re_text)?;
        let mut im = parse_rational(im_text)?;
        if neg {
            im = -im;
        }
        Ok(GaussRational { re, im })
    }
}

impl From<i64> for GaussRational {
    fn from(n: i64) -> Self {
        GaussRational::from_integer(n)
    }
}

impl From<BigRational> for GaussRational {
    fn from(r: BigRational) -> Self {
        GaussRational::real(r)
    }
}

impl<'a> Add<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn add(self, rhs: &GaussRational) -> GaussRational {
        GaussRational { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl<'a> Sub<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn sub(self, rhs: &GaussRational) -> GaussRational {
        GaussRational { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl<'a> Mul<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn mul(self, rhs: &GaussRational) -> GaussRational {
        if self.im.is_zero() && rhs.im.is_zero() {
            return GaussRational::real(&self.re * &rhs.re);
        }
        GaussRational {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

/// Panics on division by zero; use [`GaussRational::checked_div`] when the
/// divisor is not known to be nonzero.
impl<'a> Div<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn div(self, rhs: &GaussRational) -> GaussRational {
        self.checked_div(rhs).expect("division by zero Gaussian rational")
    }
}

impl Neg for &GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational { re: -&self.re, im: -&self.im }
    }
}

impl Neg for GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational { re: -self.re, im: -self.im }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<GaussRational> for GaussRational {
            type Output = GaussRational;
            fn $m(self, rhs: GaussRational) -> GaussRational {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&GaussRational> for GaussRational {
    fn add_assign(&mut self, rhs: &GaussRational) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&GaussRational> for GaussRational {
    fn sub_assign(&mut self, rhs: &GaussRational) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&GaussRational> for GaussRational {
    fn mul_assign(&mut self, rhs: &GaussRational) {
        *self = &*self * rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> GaussRational {
        GaussRational::from_ratio(n, d)
    }

    fn g(a: (i64, i64), b: (i64, i64)) -> GaussRational {
        GaussRational::new(q(a.0, a.1).re, q(b.0, b.1).re)
    }

    #[test]
    fn rational_addition() {
        assert_eq!(&q(1, 2) + &q(1, 3), q(5, 6));
    }

    #[test]
    fn conjugate_product() {
        let a = g((1, 1), (1, 1));
        let b = g((1, 1), (-1, 1));
        assert_eq!(&a * &b, GaussRational::from_integer(2));
    }

    #[test]
    fn inverse_via_conjugate() {
        let a = g((1, 1), (1, 1));
        assert_eq!(GaussRational::one().checked_div(&a).unwrap(), g((1, 2), (-1, 2)));
    }

    #[test]
    fn division_by_zero_is_error() {
        let err = GaussRational::one().checked_div(&GaussRational::zero());
        assert!(matches!(err, Err(Error::DivisionByZero)));
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn float_conversion() {
        assert_eq!(q(6, 10).to_complex().unwrap().re, 0.6);
        let z = GaussRational::zero().to_complex().unwrap();
        assert_eq!((z.re, z.im), (0.0, 0.0));
        assert_eq!(q(1, 3).to_complex().unwrap().re, 1.0 / 3.0);
        assert_eq!(q(1, 3).to_complex().unwrap().re, 0.333_333_333_333_333_3);
    }

    #[test]
    fn float_overflow_is_flagged() {
        let huge = BigRational::from_integer(BigInt::from(10).pow(400));
        assert!(matches!(rational_to_f64(&huge), Err(Error::Overflow(_))));
    }

    #[test]
    fn text_round_trip() {
        for s in ["5/6", "-3", "(1/2)-(1/2)i", "(0)+(7)i", "(-2/3)+(1/9)i"] {
            let v: GaussRational = s.parse().unwrap();
            assert_eq!(v.to_string(), s);
        }
        assert_eq!("6/10".parse::<GaussRational>().unwrap(), q(3, 5));
        assert!("(1/2)*(3)i".parse::<GaussRational>().is_err());
    }

    fn arb_gr() -> impl Strategy<Value = GaussRational> {
        (-50i64..50, 1i64..30, -50i64..50, 1i64..30)
            .prop_map(|(a, b, c, d)| GaussRational::new(q(a, b).re, q(c, d).re))
    }

    proptest! {
        #[test]
        fn canonical_form(a in arb_gr(), b in arb_gr()) {
            let c = &a * &b + a.clone();
            for r in [&c.re, &c.im] {
                prop_assert!(r.denom().is_positive());
                prop_assert!(r.numer().gcd(r.denom()).is_one());
            }
            let reparsed: GaussRational = c.to_string().parse().unwrap();
            prop_assert_eq!(reparsed, c);
        }

        #[test]
        fn field_axioms(a in arb_gr(), b in arb_gr(), c in arb_gr()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            if !a.is_zero() {
                prop_assert!((&a * &a.inv().unwrap()).is_one());
            }
        }
    }
}
