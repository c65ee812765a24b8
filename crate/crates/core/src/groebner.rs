//! Buchberger's algorithm, normal forms and standard-monomial data.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::exactnum::GaussRational;
use crate::poly::{monomials_of_degree, HPoly, MultiIndex, Poly};

#[derive(Clone, Debug)]
pub struct Ideal {
    nvars: usize,
    generators: Vec<Poly>,
}

impl Ideal {
    pub fn new(nvars: usize, generators: Vec<Poly>) -> Result<Self> {
        for g in &generators {
            if g.nvars() != nvars {
                return Err(Error::LengthMismatch { expected: nvars, got: g.nvars() });
            }
            if g.is_zero() {
                return Err(Error::ZeroPolynomial);
            }
        }
        Ok(Ideal { nvars, generators })
    }

    pub fn parse(nvars: usize, texts: &[impl AsRef<str>]) -> Result<Self> {
        let gens = texts
            .iter()
            .map(|t| crate::poly::parse_poly(t.as_ref(), nvars))
            .collect::<Result<Vec<_>>>()?;
        Ideal::new(nvars, gens)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn generators(&self) -> &[Poly] {
        &self.generators
    }

    pub fn with_generator(&self, g: Poly) -> Result<Self> {
        let mut gens = self.generators.clone();
        gens.push(g);
        Ideal::new(self.nvars, gens)
    }
}

/// Caps on Buchberger work; exceeding either aborts with a diagnostic.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub max_pairs: usize,
    pub max_elements: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_pairs: 20_000, max_elements: 2_000 }
    }
}

/// Reduced Groebner basis: monic elements, sorted ascending by leading
/// monomial, no term of any element divisible by another's leading monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroebnerBasis {
    nvars: usize,
    elements: Vec<Poly>,
    lt: Vec<MultiIndex>,
}

impl GroebnerBasis {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn elements(&self) -> &[Poly] {
        &self.elements
    }

    pub fn lt_exponents(&self) -> &[MultiIndex] {
        &self.lt
    }

    /// True for the basis `{1}` of the unit ideal.
    pub fn is_unit(&self) -> bool {
        self.lt.iter().any(|a| a.degree() == 0)
    }

    /// Normal form `ρ_V(p)`.
    pub fn reduce(&self, p: &Poly) -> Poly {
        normal_form(p, &self.elements)
    }

    pub fn in_lt_ideal(&self, alpha: &MultiIndex) -> bool {
        self.lt.iter().any(|l| l.divides(alpha))
    }

    /// Standard monomials of degree exactly `n`, ascending.
    pub fn quotient_basis(&self, n: u32) -> Vec<MultiIndex> {
        monomials_of_degree(self.nvars, n).into_iter().filter(|a| !self.in_lt_ideal(a)).collect()
    }

    /// `(m_n, l_n)`: number of standard monomials of degree `<= n` and the
    /// sum of their degrees.
    pub fn cumulative_counts(&self, n: u32) -> (usize, u64) {
        (0..=n).fold((0, 0), |(m, l), k| {
            let c = self.quotient_basis(k).len();
            (m + c, l + k as u64 * c as u64)
        })
    }

    pub fn homogenize_basis(&self) -> Vec<HPoly> {
        self.elements.iter().map(Poly::homogenize).collect()
    }

    /// Every S-polynomial reduces to zero.
    pub fn certificate_holds(&self) -> bool {
        let g = &self.elements;
        (0..g.len()).all(|i| (i + 1..g.len()).all(|j| self.reduce(&s_poly(&g[i], &g[j])).is_zero()))
    }

    pub fn hilbert_data(&self, s_max: u32) -> Result<HilbertData> {
        if self.is_unit() {
            return Err(Error::EmptyVariety);
        }
        let max_lt = self.lt.iter().map(MultiIndex::degree).max().unwrap_or(0);
        let incs: Vec<usize> = (0..=s_max).map(|s| self.quotient_basis(s).len()).collect();
        let dims: Vec<usize> = incs
            .iter()
            .scan(0, |acc, &x| {
                *acc += x;
                Some(*acc)
            })
            .collect();
        let d = incs[s_max as usize];
        let mut first_stable = s_max;
        while first_stable > 0 && incs[first_stable as usize - 1] == d {
            first_stable -= 1;
        }
        // Monomial ideals generated in degree <= D settle by degree 2D; we
        // insist on a stable window of at least D + 1 degrees past that.
        if s_max < 2 * max_lt.max(1) || s_max - first_stable < max_lt {
            return Err(Error::NotACurve(format!(
                "graded dimensions {incs:?} undetermined up to s_max = {s_max}"
            )));
        }
        if d == 0 {
            return Err(Error::NotACurve("variety is zero dimensional".into()));
        }
        let c = dims[s_max as usize] as i64 - (d as i64) * s_max as i64;
        let s0 = (0..=s_max)
            .find(|&s| {
                (s..=s_max).all(|t| dims[t as usize] as i64 == d as i64 * t as i64 + c)
            })
            .unwrap_or(s_max);
        Ok(HilbertData { dims, increments: incs, d, c, s0 })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertData {
    /// `dim C[V]_{<=s}` for `s = 0..=s_max`.
    pub dims: Vec<usize>,
    /// `dim C[V]_{=s}`.
    pub increments: Vec<usize>,
    pub d: usize,
    pub c: i64,
    /// First `s` with `dims(t) = d·t + c` for all `t >= s`.
    pub s0: u32,
}

pub fn s_poly(f: &Poly, g: &Poly) -> Poly {
    let (cf, af) = f.leading_term().expect("nonzero");
    let (cg, ag) = g.leading_term().expect("nonzero");
    let l = af.lcm(ag);
    let one = GaussRational::one();
    let lf = f.mul_term(&(&one / cf), &af.quotient_of(&l));
    let lg = g.mul_term(&(&one / cg), &ag.quotient_of(&l));
    lf.sub(&lg)
}

/// Full reduction of `p` by monic divisors. Terms are processed from the top
/// in a grevlex-ordered map so each step removes the current maximum.
fn normal_form(p: &Poly, divisors: &[Poly]) -> Poly {
    let mut work: BTreeMap<MultiIndex, GaussRational> =
        p.terms().iter().map(|(c, a)| (a.clone(), c.clone())).collect();
    let mut rem = Vec::new();
    while let Some((alpha, c)) = work.pop_last() {
        let Some(g) = divisors.iter().find(|g| g.terms()[0].1.divides(&alpha)) else {
            rem.push((c, alpha));
            continue;
        };
        debug_assert!(g.terms()[0].0.is_one());
        let shift = g.terms()[0].1.quotient_of(&alpha);
        for (gc, ga) in &g.terms()[1..] {
            let key = ga.mul(&shift);
            let delta = gc * &c;
            match work.entry(key) {
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    *e.get_mut() -= &delta;
                    if e.get().is_zero() {
                        e.remove();
                    }
                }
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(-delta);
                }
            }
        }
    }
    Poly::from_sorted(p.nvars(), rem)
}

pub fn buchberger(ideal: &Ideal) -> Result<GroebnerBasis> {
    buchberger_with_budget(ideal, Budget::default())
}

pub fn buchberger_with_budget(ideal: &Ideal, budget: Budget) -> Result<GroebnerBasis> {
    let n = ideal.nvars();
    let mut g: Vec<Poly> = Vec::new();
    let mut pending: BTreeSet<(MultiIndex, usize, usize)> = BTreeSet::new();
    let lm = |p: &Poly| p.terms()[0].1.clone();

    let push = |g: &mut Vec<Poly>, pending: &mut BTreeSet<_>, p: Poly| -> Result<bool> {
        let p = p.monic()?;
        let is_const = lm(&p).degree() == 0;
        let k = g.len();
        for (i, q) in g.iter().enumerate() {
            pending.insert((lm(q).lcm(&lm(&p)), i, k));
        }
        g.push(p);
        Ok(is_const)
    };

    for f in ideal.generators() {
        let r = normal_form(f, &g);
        if !r.is_zero() && push(&mut g, &mut pending, r)? {
            return Ok(unit_basis(n));
        }
    }

    let mut processed = 0usize;
    while let Some(pair) = pending.pop_first() {
        let (l, i, j) = pair;
        processed += 1;
        if processed > budget.max_pairs || g.len() > budget.max_elements {
            return Err(Error::BudgetExceeded { pairs: processed, elements: g.len() });
        }
        let (li, lj) = (lm(&g[i]), lm(&g[j]));
        if li.coprime(&lj) {
            continue;
        }
        // Chain criterion: some g_k with LM(g_k) | lcm whose pairs with both
        // g_i and g_j are already resolved.
        let key = |a: usize, b: usize| {
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            (lm(&g[a]).lcm(&lm(&g[b])), a, b)
        };
        let chain = (0..g.len()).any(|k| {
            k != i
                && k != j
                && lm(&g[k]).divides(&l)
                && !pending.contains(&key(i, k))
                && !pending.contains(&key(j, k))
        });
        if chain {
            continue;
        }
        let r = normal_form(&s_poly(&g[i], &g[j]), &g);
        if !r.is_zero() && push(&mut g, &mut pending, r)? {
            return Ok(unit_basis(n));
        }
    }
    Ok(reduce_basis(n, g))
}

fn unit_basis(n: usize) -> GroebnerBasis {
    GroebnerBasis { nvars: n, elements: vec![Poly::one(n)], lt: vec![MultiIndex::zero(n)] }
}

/// Minimalize and interreduce a (monic) Groebner basis.
fn reduce_basis(n: usize, g: Vec<Poly>) -> GroebnerBasis {
    let mut minimal: Vec<Poly> = Vec::new();
    for (i, p) in g.iter().enumerate() {
        let a = &p.terms()[0].1;
        let redundant = g.iter().enumerate().any(|(k, q)| {
            let b = &q.terms()[0].1;
            k != i && b.divides(a) && (b != a || k < i)
        });
        if !redundant {
            minimal.push(p.clone());
        }
    }
    minimal.sort_by(|a, b| a.terms()[0].1.cmp(&b.terms()[0].1));
    let mut elements = Vec::with_capacity(minimal.len());
    for (i, p) in minimal.iter().enumerate() {
        let others: Vec<Poly> =
            minimal.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, q)| q.clone()).collect();
        let (c, a) = (&p.terms()[0].0, &p.terms()[0].1);
        let tail = Poly::from_sorted(n, p.terms()[1..].to_vec());
        let head = Poly::monomial(c.clone(), a.clone());
        elements.push(head.add(&normal_form(&tail, &others)));
    }
    let lt = elements.iter().map(|p| p.terms()[0].1.clone()).collect();
    GroebnerBasis { nvars: n, elements, lt }
}
