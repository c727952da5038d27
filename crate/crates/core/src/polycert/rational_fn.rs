//! Rational functions stored in factored form `c * prod_i P_i^{e_i}`.
//!
//! Each factor `P_i` is a primitive integer polynomial with positive leading
//! coefficient and `e_i` is a nonzero integer, so numerator and denominator
//! are the products over positive and negative exponents. Products and
//! reciprocals only touch exponents; sums factor out the common part
//! `prod P_i^{min(e_i, f_i)}` (the lcm of the denominators) and expand the
//! rest. Syntactically equal factors cancel automatically, which keeps the
//! denominators small without any polynomial gcd.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::polycert::poly::{MultiPoly, TermBudget};
use crate::scalar::Rational;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Factor(Arc<MultiPoly>);

#[derive(Clone, Debug, PartialEq)]
pub struct RationalFn {
    nvars: usize,
    content: Rational,
    factors: BTreeMap<Factor, i32>,
}

impl RationalFn {
    pub fn zero(nvars: usize) -> Self {
        RationalFn::constant(nvars, Rational::zero())
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        RationalFn {
            nvars,
            content: c,
            factors: BTreeMap::new(),
        }
    }

    pub fn from_poly(p: &MultiPoly) -> Self {
        let (content, prim) = p.primitive();
        let mut f = RationalFn::constant(p.nvars(), content);
        if !f.content.is_zero() && prim.as_constant().is_none() {
            f.factors.insert(Factor(Arc::new(prim)), 1);
        }
        f
    }

    /// `num / den` for polynomials.
    pub fn from_parts(num: &MultiPoly, den: &MultiPoly) -> Result<Self> {
        RationalFn::from_poly(num).div(&RationalFn::from_poly(den))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.content.is_zero()
    }

    pub fn content(&self) -> &Rational {
        &self.content
    }

    /// Factors with their exponents, denominators negative.
    pub fn factors(&self) -> impl Iterator<Item = (&MultiPoly, i32)> + '_ {
        self.factors.iter().map(|(f, e)| (f.0.as_ref(), *e))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return RationalFn::zero(self.nvars);
        }
        RationalFn {
            content: &self.content * c,
            ..self.clone()
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn mul(&self, other: &RationalFn) -> Self {
        assert_eq!(self.nvars, other.nvars);
        if self.is_zero() || other.is_zero() {
            return RationalFn::zero(self.nvars);
        }
        let mut factors = self.factors.clone();
        for (f, e) in &other.factors {
            let slot = factors.entry(f.clone()).or_insert(0);
            *slot += e;
            if *slot == 0 {
                factors.remove(f);
            }
        }
        RationalFn {
            nvars: self.nvars,
            content: &self.content * &other.content,
            factors,
        }
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Arithmetic {
                step: 0,
                message: "reciprocal of zero rational function".into(),
            });
        }
        Ok(RationalFn {
            nvars: self.nvars,
            content: self.content.recip(),
            factors: self.factors.iter().map(|(f, e)| (f.clone(), -e)).collect(),
        })
    }

    pub fn div(&self, other: &RationalFn) -> Result<Self> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn powi(&self, exp: i32) -> Result<Self> {
        if exp < 0 {
            return self.recip()?.powi(-exp);
        }
        if self.is_zero() {
            return Ok(if exp == 0 {
                RationalFn::constant(self.nvars, Rational::one())
            } else {
                self.clone()
            });
        }
        Ok(RationalFn {
            nvars: self.nvars,
            content: num_traits::pow(self.content.clone(), exp as usize),
            factors: self
                .factors
                .iter()
                .filter(|_| exp != 0)
                .map(|(f, e)| (f.clone(), e * exp))
                .collect(),
        })
    }

    /// Expands `c * prod P^e` over the given factors (all `e > 0`).
    fn expand(
        nvars: usize,
        content: &Rational,
        factors: &[(&Factor, i32)],
        budget: &TermBudget,
    ) -> Result<MultiPoly> {
        let mut acc = MultiPoly::constant(nvars, content.clone());
        // Multiply small factors first to keep intermediates small.
        let mut order: Vec<_> = factors.to_vec();
        order.sort_by_key(|(f, _)| f.0.len());
        for (f, e) in order {
            for _ in 0..e {
                acc = acc.mul_budget(&f.0, budget)?;
            }
        }
        Ok(acc)
    }

    pub fn add(&self, other: &RationalFn, budget: &TermBudget) -> Result<Self> {
        assert_eq!(self.nvars, other.nvars);
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let mut common: BTreeMap<Factor, i32> = BTreeMap::new();
        let mut rest_a = Vec::new();
        let mut rest_b = Vec::new();
        let keys: std::collections::BTreeSet<&Factor> =
            self.factors.keys().chain(other.factors.keys()).collect();
        for f in keys {
            let ea = self.factors.get(f).copied().unwrap_or(0);
            let eb = other.factors.get(f).copied().unwrap_or(0);
            let lo = ea.min(eb);
            if lo != 0 {
                common.insert(f.clone(), lo);
            }
            if ea > lo {
                rest_a.push((f, ea - lo));
            }
            if eb > lo {
                rest_b.push((f, eb - lo));
            }
        }
        let a = RationalFn::expand(self.nvars, &self.content, &rest_a, budget)?;
        let b = RationalFn::expand(self.nvars, &other.content, &rest_b, budget)?;
        let sum = a.add(&b);
        budget.charge(sum.len())?;
        if sum.is_zero() {
            return Ok(RationalFn::zero(self.nvars));
        }
        Ok(RationalFn::from_poly(&sum).mul(&RationalFn {
            nvars: self.nvars,
            content: Rational::one(),
            factors: common,
        }))
    }

    pub fn sub(&self, other: &RationalFn, budget: &TermBudget) -> Result<Self> {
        self.add(&other.neg(), budget)
    }

    /// Sum of many terms.
    pub fn sum(nvars: usize, terms: &[RationalFn], budget: &TermBudget) -> Result<Self> {
        terms
            .iter()
            .try_fold(RationalFn::zero(nvars), |acc, t| acc.add(t, budget))
    }

    /// Expanded numerator (including the content) and denominator.
    pub fn expand_parts(&self, budget: &TermBudget) -> Result<(MultiPoly, MultiPoly)> {
        let pos: Vec<_> = self
            .factors
            .iter()
            .filter(|(_, e)| **e > 0)
            .map(|(f, e)| (f, *e))
            .collect();
        let neg: Vec<_> = self
            .factors
            .iter()
            .filter(|(_, e)| **e < 0)
            .map(|(f, e)| (f, -e))
            .collect();
        let num = RationalFn::expand(self.nvars, &self.content, &pos, budget)?;
        let den = RationalFn::expand(self.nvars, &Rational::one(), &neg, budget)?;
        Ok((num, den))
    }

    /// Denominator factors `(P, e)` with `e > 0`.
    pub fn denominator_factors(&self) -> Vec<(MultiPoly, u32)> {
        self.factors
            .iter()
            .filter(|(_, e)| **e < 0)
            .map(|(f, e)| ((*f.0).clone(), (-e) as u32))
            .collect()
    }

    /// Cancels denominator factors that divide the expanded numerator.
    /// Returns the number of cancelled factor powers.
    pub fn cancel_by_division(&mut self, budget: &TermBudget) -> Result<usize> {
        let pos: Vec<_> = self
            .factors
            .iter()
            .filter(|(_, e)| **e > 0)
            .map(|(f, e)| (f, *e))
            .collect();
        let mut num = RationalFn::expand(self.nvars, &Rational::one(), &pos, budget)?;
        let mut cancelled = 0;
        let den: Vec<(Factor, i32)> = self
            .factors
            .iter()
            .filter(|(_, e)| **e < 0)
            .map(|(f, e)| (f.clone(), -e))
            .collect();
        let mut changed = false;
        for (f, e) in den {
            for _ in 0..e {
                match num.div_exact(&f.0) {
                    Some(q) => {
                        num = q;
                        cancelled += 1;
                        changed = true;
                        let slot = self.factors.get_mut(&f).expect("factor present");
                        *slot += 1;
                        if *slot == 0 {
                            self.factors.remove(&f);
                        }
                    }
                    None => break,
                }
            }
        }
        if changed {
            self.factors.retain(|_, e| *e < 0);
            let rebuilt = RationalFn::from_poly(&num);
            let content = &self.content * rebuilt.content;
            *self = RationalFn {
                content,
                ..self.mul(&RationalFn {
                    content: Rational::one(),
                    ..rebuilt
                })
            };
        }
        Ok(cancelled)
    }

    pub fn eval(&self, point: &[Rational]) -> Option<Rational> {
        let mut acc = self.content.clone();
        for (f, e) in &self.factors {
            let v = f.0.eval(point);
            if v.is_zero() {
                if *e < 0 {
                    return None;
                }
                return Some(Rational::zero());
            }
            acc *= num_traits::pow(
                if *e > 0 { v } else { v.recip() },
                e.unsigned_abs() as usize,
            );
        }
        Some(acc)
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        let mut acc = self.content.to_f64().unwrap_or(f64::NAN);
        for (f, e) in &self.factors {
            acc *= f.0.eval_f64(point).powi(*e);
        }
        acc
    }

    /// `true` when every factor is linear.
    pub fn denominator_is_linear(&self) -> bool {
        self.factors
            .iter()
            .filter(|(_, e)| **e < 0)
            .all(|(f, _)| f.0.total_degree() <= 1)
    }

    pub fn is_negative_constant(&self) -> bool {
        self.factors.is_empty() && self.content.is_negative()
    }
}
