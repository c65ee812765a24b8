use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Exponent vector of a monomial `z^α`. Index `k` is the exponent of
/// `z_{k+1}` for affine polynomials (or `z_k` for homogenized ones).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(nvars: usize) -> Self {
        MultiIndex(vec![0; nvars])
    }

    /// `z_{k+1}^e`.
    pub fn var_pow(nvars: usize, k: usize, e: u32) -> Self {
        let mut v = vec![0; nvars];
        v[k] = e;
        MultiIndex(v)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn mul(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self | other`.
    pub fn quotient_of(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(other.0.iter().zip(&self.0).map(|(b, a)| b - a).collect())
    }

    pub fn lcm(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn coprime(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    /// `Some(k)` when the monomial is `z_{k+1}^e` with `e > 0`.
    pub fn pure_power_of(&self) -> Option<usize> {
        let mut nz = self.0.iter().enumerate().filter(|(_, e)| **e > 0);
        match (nz.next(), nz.next()) {
            (Some((k, _)), None) => Some(k),
            _ => None,
        }
    }
}

/// The grevlex variant used throughout: graded by total degree, and within a
/// degree the monomial with the LARGER exponent at the first differing index
/// is the SMALLER one. Pure `z1` powers are therefore least in each degree.
pub fn grevlex_cmp(a: &MultiIndex, b: &MultiIndex) -> Result<Ordering> {
    if a.nvars() != b.nvars() {
        return Err(Error::LengthMismatch { expected: a.nvars(), got: b.nvars() });
    }
    Ok(grevlex_unchecked(a, b))
}

fn grevlex_unchecked(a: &MultiIndex, b: &MultiIndex) -> Ordering {
    match a.degree().cmp(&b.degree()) {
        Ordering::Equal => {}
        o => return o,
    }
    for (x, y) in a.0.iter().zip(&b.0) {
        if x != y {
            return y.cmp(x);
        }
    }
    Ordering::Equal
}

impl Ord for MultiIndex {
    /// Paper grevlex; indices of different length compare by length first so
    /// the order stays total, but mixing lengths is a caller bug.
    fn cmp(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.nvars(), other.nvars());
        self.nvars().cmp(&other.nvars()).then_with(|| grevlex_unchecked(self, other))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials in `nvars` variables of total degree exactly `n`, ascending.
pub fn monomials_of_degree(nvars: usize, n: u32) -> Vec<MultiIndex> {
    fn rec(k: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if k + 1 == cur.len() {
            cur[k] = left;
            out.push(MultiIndex(cur.clone()));
            return;
        }
        // Larger leading exponent first yields ascending order directly.
        for e in (0..=left).rev() {
            cur[k] = e;
            rec(k + 1, left - e, cur, out);
        }
        cur[k] = 0;
    }
    if nvars == 0 {
        return if n == 0 { vec![MultiIndex(vec![])] } else { vec![] };
    }
    let mut out = Vec::new();
    rec(0, n, &mut vec![0; nvars], &mut out);
    out
}

impl fmt::Display for MultiIndex {
    /// Variables print as `z1..zN` (offset `var_base` is applied by callers
    /// through [`MultiIndex::fmt_with_base`]).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with_base(f, 1)
    }
}

impl MultiIndex {
    pub(crate) fn fmt_with_base(&self, f: &mut fmt::Formatter<'_>, base: usize) -> fmt::Result {
        let mut first = true;
        for (k, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            write!(f, "z{}", k + base)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}
