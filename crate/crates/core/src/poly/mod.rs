//! Sparse multivariate polynomials over `Q(i)`.
//!
//! Terms are stored strictly descending in the paper grevlex order, without
//! zero coefficients, so the leading term is always `terms[0]`.

mod monomial;
mod parse;

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exactnum::GaussRational;

pub use monomial::{grevlex_cmp, monomials_of_degree, MultiIndex};
pub use parse::parse_poly;

pub type Term = (GaussRational, MultiIndex);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: Vec<Term>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: Vec::new() }
    }

    pub fn constant(nvars: usize, c: GaussRational) -> Self {
        Poly::monomial(c, MultiIndex::zero(nvars))
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, GaussRational::one())
    }

    pub fn monomial(c: GaussRational, alpha: MultiIndex) -> Self {
        let nvars = alpha.nvars();
        if c.is_zero() {
            return Poly::zero(nvars);
        }
        Poly { nvars, terms: vec![(c, alpha)] }
    }

    /// `z_{k+1}` (zero-based `k`).
    pub fn var(nvars: usize, k: usize) -> Self {
        Poly::monomial(GaussRational::one(), MultiIndex::var_pow(nvars, k, 1))
    }

    /// Build from arbitrary terms: sorts, merges duplicates, drops zeros.
    pub fn from_terms(nvars: usize, mut terms: Vec<Term>) -> Self {
        terms.sort_by(|a, b| b.1.cmp(&a.1));
        let mut out: Vec<Term> = Vec::with_capacity(terms.len());
        for (c, a) in terms {
            debug_assert_eq!(a.nvars(), nvars);
            match out.last_mut() {
                Some((lc, la)) if *la == a => *lc += &c,
                _ => out.push((c, a)),
            }
        }
        out.retain(|(c, _)| !c.is_zero());
        Poly { nvars, terms: out }
    }

    /// Trusts that `terms` already satisfies the storage invariant.
    pub(crate) fn from_sorted(nvars: usize, terms: Vec<Term>) -> Self {
        let p = Poly { nvars, terms };
        debug_assert!(p.is_canonical());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<Term> {
        self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_canonical(&self) -> bool {
        self.terms.iter().all(|(c, a)| !c.is_zero() && a.nvars() == self.nvars)
            && self.terms.windows(2).all(|w| w[0].1 > w[1].1)
    }

    pub fn leading_term(&self) -> Result<(&GaussRational, &MultiIndex)> {
        self.terms.first().map(|(c, a)| (c, a)).ok_or(Error::ZeroPolynomial)
    }

    pub fn leading_monomial(&self) -> Option<&MultiIndex> {
        self.terms.first().map(|t| &t.1)
    }

    /// Total degree; the leading term has maximal degree since the order is graded.
    pub fn degree(&self) -> Option<u32> {
        self.leading_monomial().map(MultiIndex::degree)
    }

    pub fn is_homogeneous(&self) -> bool {
        match self.degree() {
            None => true,
            Some(d) => self.terms.iter().all(|(_, a)| a.degree() == d),
        }
    }

    pub fn leading_homogeneous_part(&self) -> Result<Poly> {
        let d = self.degree().ok_or(Error::ZeroPolynomial)?;
        Ok(self.homogeneous_part(d))
    }

    /// Terms of total degree exactly `d` (a contiguous run, by gradedness).
    pub fn homogeneous_part(&self, d: u32) -> Poly {
        let terms = self.terms.iter().filter(|(_, a)| a.degree() == d).cloned().collect();
        Poly::from_sorted(self.nvars, terms)
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> GaussRational {
        self.terms
            .binary_search_by(|(_, a)| alpha.cmp(a))
            .map(|i| self.terms[i].0.clone())
            .unwrap_or_default()
    }

    pub fn scale(&self, c: &GaussRational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        let terms = self.terms.iter().map(|(k, a)| (k * c, a.clone())).collect();
        Poly::from_sorted(self.nvars, terms)
    }

    /// `c · z^β · self`; multiplication by a monomial preserves term order.
    pub fn mul_term(&self, c: &GaussRational, beta: &MultiIndex) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        let terms = self.terms.iter().map(|(k, a)| (k * c, a.mul(beta))).collect();
        Poly::from_sorted(self.nvars, terms)
    }

    pub fn monic(&self) -> Result<Poly> {
        let (lc, _) = self.leading_term()?;
        Ok(self.scale(&lc.inv()?))
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.merge(other, true)
    }

    pub fn neg(&self) -> Poly {
        let terms = self.terms.iter().map(|(c, a)| (-c, a.clone())).collect();
        Poly::from_sorted(self.nvars, terms)
    }

    fn merge(&self, other: &Poly, negate: bool) -> Poly {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let fix = |c: &GaussRational| if negate { -c } else { c.clone() };
        while i < self.terms.len() && j < other.terms.len() {
            let (a, b) = (&self.terms[i], &other.terms[j]);
            match a.1.cmp(&b.1) {
                Ordering::Greater => {
                    out.push(a.clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push((fix(&b.0), b.1.clone()));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate { &a.0 - &b.0 } else { &a.0 + &b.0 };
                    if !c.is_zero() {
                        out.push((c, a.1.clone()));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(self.terms[i..].iter().cloned());
        out.extend(other.terms[j..].iter().map(|(c, a)| (fix(c), a.clone())));
        Poly::from_sorted(self.nvars, out)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (c, a) in &self.terms {
            for (k, b) in &other.terms {
                terms.push((c * k, a.mul(b)));
            }
        }
        Poly::from_terms(self.nvars, terms)
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval_exact(&self, z: &[GaussRational]) -> Result<GaussRational> {
        if z.len() != self.nvars {
            return Err(Error::LengthMismatch { expected: self.nvars, got: z.len() });
        }
        let mut acc = GaussRational::zero();
        for (c, a) in &self.terms {
            let mut t = c.clone();
            for (zk, &e) in z.iter().zip(a.exponents()) {
                if e > 0 {
                    t = &t * &zk.pow(e);
                }
            }
            acc += &t;
        }
        Ok(acc)
    }

    /// Direct term summation: each monomial is an independent product of
    /// `powi` factors, so the relative error per term is `O(deg · ε)` and the
    /// sum adds `O(len · ε · Σ|terms|)`. No Horner scheme is used.
    pub fn eval_complex(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.nvars {
            return Err(Error::LengthMismatch { expected: self.nvars, got: z.len() });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, a) in &self.terms {
            let mut t = c.to_complex()?;
            for (zk, &e) in z.iter().zip(a.exponents()) {
                if e > 0 {
                    t *= zk.powi(e as i32);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Substitute polynomial `images[k]` for variable `z_{k+1}`.
    pub fn compose(&self, images: &[Poly]) -> Result<Poly> {
        if images.len() != self.nvars {
            return Err(Error::LengthMismatch { expected: self.nvars, got: images.len() });
        }
        let m = images.first().map_or(0, Poly::nvars);
        let mut acc = Poly::zero(m);
        for (c, a) in &self.terms {
            let mut t = Poly::constant(m, c.clone());
            for (img, &e) in images.iter().zip(a.exponents()) {
                if e > 0 {
                    t = t.mul(&img.pow(e));
                }
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    pub fn homogenize(&self) -> HPoly {
        let deg = self.degree().unwrap_or(0);
        let terms = self
            .terms
            .iter()
            .map(|(c, a)| {
                let mut e = Vec::with_capacity(self.nvars + 1);
                e.push(deg - a.degree());
                e.extend_from_slice(a.exponents());
                (c.clone(), MultiIndex(e))
            })
            .collect();
        HPoly { poly: Poly::from_terms(self.nvars + 1, terms), degree: deg }
    }
}

/// Homogeneous polynomial in `z0..zN`; index 0 is the homogenizing variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HPoly {
    poly: Poly,
    degree: u32,
}

impl HPoly {
    pub fn new(poly: Poly) -> Result<Self> {
        if !poly.is_homogeneous() {
            return Err(Error::Input("polynomial is not homogeneous".into()));
        }
        let degree = poly.degree().unwrap_or(0);
        Ok(HPoly { poly, degree })
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Set `z_j = 1` and drop that variable; the remaining variables keep
    /// their relative order.
    pub fn dehomogenize_at(&self, j: usize) -> Result<Poly> {
        let n = self.poly.nvars();
        if j >= n {
            return Err(Error::Input(format!("variable index {j} out of range 0..{n}")));
        }
        let terms = self
            .poly
            .terms()
            .iter()
            .map(|(c, a)| {
                let mut e = a.exponents().to_vec();
                e.remove(j);
                (c.clone(), MultiIndex(e))
            })
            .collect();
        Ok(Poly::from_terms(n - 1, terms))
    }
}

impl fmt::Display for HPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_poly(f, &self.poly, 0)
    }
}

impl fmt::Display for Poly {
    /// Output re-parses to the same polynomial with [`parse_poly`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_poly(f, self, 1)
    }
}

struct Mono<'a>(&'a MultiIndex, usize);

impl fmt::Display for Mono<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_with_base(f, self.1)
    }
}

fn write_poly(f: &mut fmt::Formatter<'_>, p: &Poly, base: usize) -> fmt::Result {
    use crate::exactnum::format_rational;
    use num_traits::Signed;
    if p.is_zero() {
        return f.write_str("0");
    }
    for (k, (c, a)) in p.terms().iter().enumerate() {
        let constant = a.degree() == 0;
        let body = if c.is_real() {
            let neg = c.re.is_negative();
            let mag = format_rational(&c.re.abs());
            let s = match (constant, mag == "1") {
                (true, _) => mag,
                (false, true) => Mono(a, base).to_string(),
                (false, false) => format!("{mag}*{}", Mono(a, base)),
            };
            (neg, s)
        } else {
            let sign = if c.im.is_negative() { '-' } else { '+' };
            let cs = format!(
                "({} {sign} {}*i)",
                format_rational(&c.re),
                format_rational(&c.im.abs())
            );
            let s = if constant { cs } else { format!("{cs}*{}", Mono(a, base)) };
            (false, s)
        };
        match (k, body.0) {
            (0, true) => write!(f, "-{}", body.1)?,
            (0, false) => f.write_str(&body.1)?,
            (_, true) => write!(f, " - {}", body.1)?,
            (_, false) => write!(f, " + {}", body.1)?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str, n: usize) -> Poly {
        parse_poly(s, n).unwrap()
    }

    #[test]
    fn leading_terms() {
        let g1 = p("z2*z3 + z1*z3 - 3*z2^2 - z1*z2 + z1^2 + 2", 3);
        let (c, a) = g1.leading_term().unwrap();
        assert!(c.is_one());
        assert_eq!(a.exponents(), &[0, 1, 1]);
        let g2 = p("z3^2 + z2^2 - z1^2 - 1", 3);
        assert_eq!(g2.leading_term().unwrap().1.exponents(), &[0, 0, 2]);
        let five = p("5", 3);
        assert_eq!(five.leading_term().unwrap(), (&GaussRational::from_integer(5), &MultiIndex::zero(3)));
        assert!(matches!(Poly::zero(2).leading_term(), Err(Error::ZeroPolynomial)));
    }

    #[test]
    fn leading_homogeneous_parts() {
        let q = p("z2^2 - z1^2 - z1 - 1", 2);
        assert_eq!(q.leading_homogeneous_part().unwrap(), p("z2^2 - z1^2", 2));
        let h = p("z1*z2 + 3*z2^2", 2);
        assert_eq!(h.leading_homogeneous_part().unwrap(), h);
        let prod = p("z1 + z2", 2).mul(&p("z1 - z2", 2));
        assert_eq!(prod, p("z1^2 - z2^2", 2));
    }

    #[test]
    fn homogenize_round_trip() {
        let q = p("z2^2 - z1^2 - 1", 2);
        let h = q.homogenize();
        assert_eq!(h.to_string(), "z2^2 - z1^2 - z0^2");
        assert_eq!(h.dehomogenize_at(0).unwrap(), q);
        // Chart z1 = 1: remaining variables (z0, z2) sit at indices 0, 1.
        assert_eq!(h.dehomogenize_at(1).unwrap(), p("z2^2 - z1^2 - 1", 2));
        assert!(h.dehomogenize_at(3).is_err());
    }

    #[test]
    fn ring_ops() {
        let q = p("z2^2 - z1^2 - 1", 2);
        let pt = [GaussRational::from_ratio(3, 4), GaussRational::from_ratio(5, 4)];
        assert!(q.eval_exact(&pt).unwrap().is_zero());
        assert!(q.add(&q.neg()).terms().is_empty());
        let z = [Complex64::new(0.75, 0.0), Complex64::new(1.25, 0.0)];
        assert!(q.eval_complex(&z).unwrap().norm() < 1e-15);
    }

    #[test]
    fn compose_substitutes() {
        let q = p("z2 - z1", 2);
        let img = [p("z1 + z2", 2), p("z2", 2)];
        assert_eq!(q.compose(&img).unwrap(), p("-z1", 2));
    }

    fn arb_poly() -> impl Strategy<Value = Poly> {
        prop::collection::vec(
            ((-9i64..9, 1i64..5, -3i64..3), prop::collection::vec(0u32..4, 3)),
            0..6,
        )
        .prop_map(|ts| {
            let terms = ts
                .into_iter()
                .map(|((a, b, c), e)| {
                    let re = GaussRational::from_ratio(a, b).re;
                    let im = GaussRational::from_integer(c).re;
                    (GaussRational::new(re, im), MultiIndex(e))
                })
                .collect();
            Poly::from_terms(3, terms)
        })
    }

    proptest! {
        #[test]
        fn ops_keep_invariant(a in arb_poly(), b in arb_poly()) {
            for r in [a.add(&b), a.sub(&b), a.mul(&b), a.neg()] {
                prop_assert!(r.is_canonical());
            }
            prop_assert_eq!(a.sub(&b).add(&b), a.clone());
        }

        #[test]
        fn print_parse_round_trip(a in arb_poly()) {
            prop_assert_eq!(parse_poly(&a.to_string(), 3).unwrap(), a);
        }

        #[test]
        fn dehomogenize_inverts_homogenize(a in arb_poly()) {
            let h = a.homogenize();
            prop_assert!(h.poly().is_homogeneous());
            prop_assert_eq!(h.dehomogenize_at(0).unwrap(), a);
        }
    }
}
