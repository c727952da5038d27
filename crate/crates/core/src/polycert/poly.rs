//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Exponent vectors are packed into a `u64`, one byte per variable with the
//! first variable in the most significant byte, so comparing packed words
//! compares exponent vectors lexicographically. Terms are kept sorted in
//! descending graded-lexicographic order (leading term first) and never hold
//! zero coefficients.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::polycert::CertStats;
use crate::scalar::Rational;

pub type Monomial = u64;

pub const MAX_VARS: usize = 8;
const MAX_DEGREE: u32 = 255;

fn shift(var: usize) -> u32 {
    56 - 8 * var as u32
}

pub fn pack(exps: &[u32]) -> Monomial {
    assert!(exps.len() <= MAX_VARS, "at most {MAX_VARS} variables");
    exps.iter().enumerate().fold(0, |acc, (i, &e)| {
        assert!(e <= MAX_DEGREE, "exponent {e} too large");
        acc | ((e as u64) << shift(i))
    })
}

pub fn unpack(m: Monomial, nvars: usize) -> Vec<u32> {
    (0..nvars)
        .map(|i| ((m >> shift(i)) & 0xff) as u32)
        .collect()
}

pub fn degree(m: Monomial) -> u32 {
    m.to_le_bytes().iter().map(|&b| b as u32).sum()
}

fn divides(d: Monomial, m: Monomial) -> bool {
    d.to_le_bytes()
        .iter()
        .zip(m.to_le_bytes())
        .all(|(a, b)| *a <= b)
}

/// Descending graded-lexicographic comparison.
fn grlex_desc(a: &Monomial, b: &Monomial) -> Ordering {
    (degree(*b), *b).cmp(&(degree(*a), *a))
}

/// Caps the size of intermediate expansions.
#[derive(Debug)]
pub struct TermBudget {
    pub limit: usize,
    peak: std::cell::Cell<usize>,
}

impl TermBudget {
    pub fn new(limit: usize) -> Self {
        TermBudget {
            limit,
            peak: std::cell::Cell::new(0),
        }
    }

    pub fn unlimited() -> Self {
        TermBudget::new(usize::MAX)
    }

    pub fn peak(&self) -> usize {
        self.peak.get()
    }

    pub fn charge(&self, terms: usize) -> Result<()> {
        if terms > self.peak.get() {
            self.peak.set(terms);
        }
        if terms > self.limit {
            return Err(Error::TermBudget {
                name: String::new(),
                budget: self.limit,
                partial: Box::new(CertStats {
                    peak_terms: terms,
                    ..CertStats::default()
                }),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiPoly {
    nvars: usize,
    terms: Vec<(Monomial, Rational)>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} variables");
        MultiPoly {
            nvars,
            terms: Vec::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = MultiPoly::zero(nvars);
        if !c.is_zero() {
            p.terms.push((0, c));
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        MultiPoly::constant(nvars, Rational::one())
    }

    /// The variable `x_{var+1}` (0-based `var`).
    pub fn var(nvars: usize, var: usize) -> Self {
        assert!(var < nvars);
        let mut exps = vec![0; nvars];
        exps[var] = 1;
        MultiPoly {
            nvars,
            terms: vec![(pack(&exps), Rational::one())],
        }
    }

    /// Builds from arbitrary terms, combining duplicates.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Self {
        let mut map: FxHashMap<Monomial, Rational> = FxHashMap::default();
        for (exps, c) in terms {
            assert_eq!(exps.len(), nvars, "exponent vector length");
            *map.entry(pack(&exps)).or_insert_with(Rational::zero) += c;
        }
        MultiPoly::from_map(nvars, map)
    }

    fn from_map(nvars: usize, map: FxHashMap<Monomial, Rational>) -> Self {
        let mut terms: Vec<_> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| grlex_desc(&a.0, &b.0));
        MultiPoly { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in descending graded-lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<u32>, &Rational)> + '_ {
        self.terms.iter().map(|(m, c)| (unpack(*m, self.nvars), c))
    }

    pub fn leading(&self) -> Option<(Monomial, &Rational)> {
        self.terms.first().map(|(m, c)| (*m, c))
    }

    /// The value if the polynomial is constant.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [(0, c)] => Some(c.clone()),
            _ => None,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.first().map_or(0, |(m, _)| degree(*m))
    }

    /// First negative coefficient in graded-lexicographic order.
    pub fn first_negative(&self) -> Option<(Vec<u32>, Rational)> {
        self.terms
            .iter()
            .find(|(_, c)| c.is_negative())
            .map(|(m, c)| (unpack(*m, self.nvars), c.clone()))
    }

    pub fn coefficients_nonneg(&self) -> bool {
        self.terms.iter().all(|(_, c)| !c.is_negative())
    }

    fn check_vars(&self, other: &MultiPoly) {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        self.check_vars(other);
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            let (a, b) = (&self.terms[i], &other.terms[j]);
            match grlex_desc(&a.0, &b.0) {
                Ordering::Less => {
                    out.push(a.clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b.clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &a.1 + &b.1;
                    if !c.is_zero() {
                        out.push((a.0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        MultiPoly {
            nvars: self.nvars,
            terms: out,
        }
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (*m, a * c)).collect(),
        }
    }

    /// Common denominator and integer coefficients.
    fn integerized(&self) -> (BigInt, Vec<(Monomial, BigInt)>) {
        let lcm = self
            .terms
            .iter()
            .fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
        let ints = self
            .terms
            .iter()
            .map(|(m, c)| (*m, c.numer() * (&lcm / c.denom())))
            .collect();
        (lcm, ints)
    }

    /// Product, failing when the result exceeds the budget.
    pub fn mul_budget(&self, other: &MultiPoly, budget: &TermBudget) -> Result<MultiPoly> {
        self.check_vars(other);
        if self.is_zero() || other.is_zero() {
            return Ok(MultiPoly::zero(self.nvars));
        }
        assert!(
            self.total_degree() + other.total_degree() <= MAX_DEGREE,
            "product degree exceeds {MAX_DEGREE}"
        );
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let (da, a) = small.integerized();
        let (db, b) = large.integerized();
        let bits = |v: &[(Monomial, BigInt)]| v.iter().map(|(_, c)| c.bits()).max().unwrap_or(0);
        let headroom = 64 - (small.len() as u64).leading_zeros() as u64;
        let denom = da * db;
        let mut map: FxHashMap<Monomial, Rational> = FxHashMap::default();
        if bits(&a) <= 62 && bits(&b) <= 62 && bits(&a) + bits(&b) + headroom < 126 {
            let a: Vec<(Monomial, i128)> =
                a.iter().map(|(m, c)| (*m, c.to_i128().unwrap())).collect();
            let b: Vec<(Monomial, i128)> =
                b.iter().map(|(m, c)| (*m, c.to_i128().unwrap())).collect();
            let mut acc: FxHashMap<Monomial, i128> = FxHashMap::default();
            for (ma, ca) in &a {
                for (mb, cb) in &b {
                    *acc.entry(ma + mb).or_insert(0) += ca * cb;
                }
                budget.charge(acc.len())?;
            }
            map.reserve(acc.len());
            for (m, c) in acc {
                if c != 0 {
                    map.insert(m, Rational::new(BigInt::from(c), denom.clone()));
                }
            }
        } else {
            let mut acc: FxHashMap<Monomial, BigInt> = FxHashMap::default();
            for (ma, ca) in &a {
                for (mb, cb) in &b {
                    *acc.entry(ma + mb).or_insert_with(BigInt::zero) += ca * cb;
                }
                budget.charge(acc.len())?;
            }
            for (m, c) in acc {
                if !c.is_zero() {
                    map.insert(m, Rational::new(c, denom.clone()));
                }
            }
        }
        Ok(MultiPoly::from_map(self.nvars, map))
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        self.mul_budget(other, &TermBudget::unlimited())
            .expect("unlimited budget")
    }

    pub fn pow_budget(&self, exp: u32, budget: &TermBudget) -> Result<MultiPoly> {
        let mut acc = MultiPoly::one(self.nvars);
        for _ in 0..exp {
            acc = acc.mul_budget(self, budget)?;
        }
        Ok(acc)
    }

    pub fn pow(&self, exp: u32) -> MultiPoly {
        self.pow_budget(exp, &TermBudget::unlimited())
            .expect("unlimited budget")
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars);
        self.terms.iter().fold(Rational::zero(), |acc, (m, c)| {
            let e = unpack(*m, self.nvars);
            let mono = e.iter().zip(point).fold(Rational::one(), |p, (&k, x)| {
                p * num_traits::pow(x.clone(), k as usize)
            });
            acc + c * mono
        })
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.nvars);
        self.terms
            .iter()
            .map(|(m, c)| {
                let e = unpack(*m, self.nvars);
                let mono: f64 = e
                    .iter()
                    .zip(point)
                    .map(|(&k, x)| x.powi(k as i32))
                    .product();
                c.to_f64().unwrap_or(f64::NAN) * mono
            })
            .sum()
    }

    /// `(c, q)` with `self = c q`, `q` having coprime integer coefficients and
    /// a positive leading coefficient. Zero maps to `(0, 0)`.
    pub fn primitive(&self) -> (Rational, MultiPoly) {
        if self.is_zero() {
            return (Rational::zero(), self.clone());
        }
        let (lcm, ints) = self.integerized();
        let mut g = ints.iter().fold(BigInt::zero(), |acc, (_, c)| acc.gcd(c));
        if ints[0].1.is_negative() {
            g = -g;
        }
        let content = Rational::new(g.clone(), lcm);
        let terms = ints
            .into_iter()
            .map(|(m, c)| (m, Rational::from_integer(c / &g)))
            .collect();
        (
            content,
            MultiPoly {
                nvars: self.nvars,
                terms,
            },
        )
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &MultiPoly) -> Option<MultiPoly> {
        self.check_vars(d);
        let (dm, dc) = d.leading()?;
        let mut rem: std::collections::BTreeMap<(u32, Monomial), Rational> = self
            .terms
            .iter()
            .map(|(m, c)| ((degree(*m), *m), c.clone()))
            .collect();
        let mut quotient = Vec::new();
        while let Some(((_, m), c)) = rem.pop_last() {
            if !divides(dm, m) {
                return None;
            }
            let qm = m - dm;
            let qc = c / dc;
            for (tm, tc) in &d.terms[1..] {
                let key = qm + tm;
                let entry = rem.entry((degree(key), key)).or_insert_with(Rational::zero);
                *entry -= &qc * tc;
                if entry.is_zero() {
                    rem.remove(&(degree(key), key));
                }
            }
            quotient.push((qm, qc));
        }
        Some(MultiPoly {
            nvars: self.nvars,
            terms: quotient,
        })
    }

    /// `Some(c)` with `self = c other`.
    pub fn proportional_to(&self, other: &MultiPoly) -> Option<Rational> {
        if self.len() != other.len() || self.is_zero() {
            return None;
        }
        let c = &self.terms[0].1 / &other.terms[0].1;
        self.terms
            .iter()
            .zip(&other.terms)
            .all(|((ma, ca), (mb, cb))| ma == mb && *ca == &c * cb)
            .then_some(c)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() {
                "-"
            } else if k > 0 {
                "+"
            } else {
                ""
            };
            let abs = c.abs();
            write!(f, "{}{sign}", if k > 0 { " " } else { "" })?;
            if k > 0 && !sign.is_empty() {
                write!(f, " ")?;
            }
            let vars: Vec<String> = unpack(*m, self.nvars)
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{e}", i + 1)
                    }
                })
                .collect();
            if vars.is_empty() || !abs.is_one() {
                write!(f, "{abs}")?;
                if !vars.is_empty() {
                    write!(f, "*")?;
                }
            }
            write!(f, "{}", vars.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn x(i: usize) -> MultiPoly {
        MultiPoly::var(3, i)
    }

    #[test]
    fn packing_round_trip() {
        let e = vec![3, 0, 7, 255];
        assert_eq!(unpack(pack(&e), 4), e);
        assert_eq!(degree(pack(&e)), 265);
        assert!(divides(pack(&[1, 0, 2]), pack(&[1, 1, 2])));
        assert!(!divides(pack(&[1, 0, 3]), pack(&[1, 1, 2])));
    }

    #[test]
    fn grlex_order() {
        // (x1 + x2)^2 + x3 = x1^2 + 2 x1 x2 + x2^2 + x3
        let p = x(0).add(&x(1)).pow(2).add(&x(2));
        let exps: Vec<Vec<u32>> = p.terms().map(|(e, _)| e).collect();
        assert_eq!(
            exps,
            vec![vec![2, 0, 0], vec![1, 1, 0], vec![0, 2, 0], vec![0, 0, 1]]
        );
        assert_eq!(p.to_string(), "x1^2 + 2*x1*x2 + x2^2 + x3");
    }

    #[test]
    fn arithmetic() {
        let a = x(0).sub(&x(1));
        let b = x(0).add(&x(1));
        assert_eq!(a.mul(&b), x(0).pow(2).sub(&x(1).pow(2)));
        assert!(a.sub(&a).is_zero());
        assert_eq!(a.scale(&q(1, 2)).scale(&q(2, 1)), a);
        assert_eq!(a.first_negative(), Some((vec![0, 1, 0], q(-1, 1))));
    }

    #[test]
    fn big_coefficients_use_bigint_path() {
        let big = MultiPoly::constant(3, Rational::from_integer(BigInt::from(1u8) << 100));
        let p = x(0).add(&big);
        let sq = p.mul(&p);
        assert_eq!(
            sq.eval(&[q(1, 1), q(0, 1), q(0, 1)]),
            (q(1, 1) + big.as_constant().unwrap()).pow(2)
        );
    }

    #[test]
    fn primitive_and_division() {
        let p = x(0).scale(&q(-2, 3)).add(&x(1).scale(&q(4, 9)));
        let (c, prim) = p.primitive();
        assert_eq!(c, q(-2, 9));
        assert_eq!(prim, x(0).scale(&q(3, 1)).sub(&x(1).scale(&q(2, 1))));
        let s = x(0).add(&x(1));
        let prod = s.mul(&x(2).add(&MultiPoly::one(3))).mul(&s);
        assert_eq!(
            prod.div_exact(&s).unwrap(),
            s.mul(&x(2).add(&MultiPoly::one(3)))
        );
        assert!(prod.div_exact(&x(1).add(&x(2))).is_none());
        assert_eq!(prod.scale(&q(3, 1)).proportional_to(&prod), Some(q(3, 1)));
    }

    #[test]
    fn budget_is_enforced() {
        let p = x(0).add(&x(1)).add(&x(2));
        let budget = TermBudget::new(5);
        assert!(p.mul_budget(&p, &budget).is_err());
        let roomy = TermBudget::new(6);
        assert_eq!(p.mul_budget(&p, &roomy).unwrap().len(), 6);
        assert_eq!(roomy.peak(), 6);
    }

    #[test]
    fn evaluation() {
        let p = x(0).pow(2).scale(&q(1, 2)).sub(&x(2));
        assert_eq!(p.eval(&[q(2, 1), q(5, 1), q(1, 3)]), q(5, 3));
        assert!((p.eval_f64(&[2.0, 5.0, 1.0 / 3.0]) - 5.0 / 3.0).abs() < 1e-15);
    }
}
