//! Order-3 Gram entries and bound functions as exact rational functions of
//! consecutive knot gaps.
//!
//! A window of `nvars` gaps is anchored at a reference index `n`: variable
//! `x[r]` (1-based) is the gap `t_{n+e0+r} - t_{n+e0+r-1}`, where `e0` is the
//! window offset. A bracket `(l p)` at subindex `n + d` is then the sum of the
//! variables covering `t_{n+d+p} .. t_{n+d+l}`. Gaps listed as zero are
//! dropped, which reproduces clamped-end degeneracies, and a ratio whose
//! numerator contains a vanishing bracket is zero.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::polycert::poly::{MultiPoly, TermBudget};
use crate::polycert::rational_fn::RationalFn;
use crate::scalar::Rational;

/// Placement of the gap variables relative to the reference index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub nvars: usize,
    pub offset: i64,
    /// 0-based variables fixed to zero.
    pub zero_vars: Vec<usize>,
}

impl Window {
    pub fn new(nvars: usize, offset: i64) -> Self {
        Window {
            nvars,
            offset,
            zero_vars: Vec::new(),
        }
    }

    pub fn with_zero_vars(mut self, zero_vars: &[usize]) -> Self {
        self.zero_vars = zero_vars.to_vec();
        self
    }
}

/// Quantities that can be built symbolically. Offsets are relative to the
/// reference index `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolicExpr {
    /// Gram entry `a_{n+i, n+j}`.
    GramEntry(i64, i64),
    Phi(i64),
    PhiRecip(i64),
    Psi(i64),
    /// `phi_{n+d} (a_{n+d-1,n+d} - a_{n+d-2,n+d} a_{n+d-1,n+d-1} / a_{n+d-2,n+d-1})`.
    ThetaHat(i64),
    /// Bracket `(l p)` at subindex `n + d`.
    Bracket(i64, i64, i64),
}

impl fmt::Display for SymbolicExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolicExpr::GramEntry(i, j) => write!(f, "a({i},{j})"),
            SymbolicExpr::Phi(d) => write!(f, "phi({d})"),
            SymbolicExpr::PhiRecip(d) => write!(f, "phi_recip({d})"),
            SymbolicExpr::Psi(d) => write!(f, "psi({d})"),
            SymbolicExpr::ThetaHat(d) => write!(f, "theta({d})"),
            SymbolicExpr::Bracket(l, p, d) => write!(f, "bracket({l},{p},{d})"),
        }
    }
}

impl FromStr for SymbolicExpr {
    type Err = Error;

    /// Parses the `Display` form, e.g. `a(0,1)`, `phi(-1)`, `bracket(3,0,0)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::input(format!("unknown symbolic expression {s:?}"));
        let (name, rest) = s.trim().split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let args: Vec<i64> = args
            .split(',')
            .map(|a| a.trim().parse::<i64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match (name.trim(), args.as_slice()) {
            ("a", &[i, j]) => Ok(SymbolicExpr::GramEntry(i, j)),
            ("phi", &[d]) => Ok(SymbolicExpr::Phi(d)),
            ("phi_recip", &[d]) => Ok(SymbolicExpr::PhiRecip(d)),
            ("psi", &[d]) => Ok(SymbolicExpr::Psi(d)),
            ("theta", &[d]) => Ok(SymbolicExpr::ThetaHat(d)),
            ("bracket", &[l, p, d]) => Ok(SymbolicExpr::Bracket(l, p, d)),
            _ => Err(bad()),
        }
    }
}

/// Builds rational functions inside one window.
pub struct SymbolicBuilder<'a> {
    window: Window,
    budget: &'a TermBudget,
}

impl<'a> SymbolicBuilder<'a> {
    pub fn new(window: Window, budget: &'a TermBudget) -> Self {
        SymbolicBuilder { window, budget }
    }

    pub fn nvars(&self) -> usize {
        self.window.nvars
    }

    pub fn budget(&self) -> &TermBudget {
        self.budget
    }

    pub fn constant(&self, n: i64, d: i64) -> RationalFn {
        RationalFn::constant(self.nvars(), Rational::new(n.into(), d.into()))
    }

    /// `(l p)` at subindex `n + d` as a polynomial in the gap variables.
    pub fn bracket_poly(&self, ell: i64, en: i64, d: i64) -> Result<MultiPoly> {
        if ell < en {
            return Err(Error::input(format!(
                "bracket ({ell} {en}) has reversed orientation"
            )));
        }
        let mut p = MultiPoly::zero(self.nvars());
        for gap in (d + en)..(d + ell) {
            let r = gap - self.window.offset;
            if r < 0 || r >= self.nvars() as i64 {
                return Err(Error::input(format!(
                    "bracket ({ell} {en}) at offset {d} leaves the {}-gap window at offset {}",
                    self.nvars(),
                    self.window.offset
                )));
            }
            if !self.window.zero_vars.contains(&(r as usize)) {
                p = p.add(&MultiPoly::var(self.nvars(), r as usize));
            }
        }
        Ok(p)
    }

    /// `coef * prod(num) / prod(den)` over brackets `(l, p, d)`, zero when a
    /// numerator bracket vanishes.
    pub fn ratio(
        &self,
        coef: (i64, i64),
        num: &[(i64, i64, i64)],
        den: &[(i64, i64, i64)],
    ) -> Result<RationalFn> {
        let mut acc = self.constant(coef.0, coef.1);
        for &(l, p, d) in num {
            let b = self.bracket_poly(l, p, d)?;
            if b.is_zero() {
                return Ok(RationalFn::zero(self.nvars()));
            }
            acc = acc.mul(&RationalFn::from_poly(&b));
        }
        for &(l, p, d) in den {
            let b = self.bracket_poly(l, p, d)?;
            if b.is_zero() {
                return Err(Error::Arithmetic {
                    step: 0,
                    message: format!("vanishing denominator bracket ({l} {p}) at offset {d}"),
                });
            }
            acc = acc.div(&RationalFn::from_poly(&b))?;
        }
        Ok(acc)
    }

    pub fn sum(&self, terms: &[RationalFn]) -> Result<RationalFn> {
        RationalFn::sum(self.nvars(), terms, self.budget)
    }

    pub fn add(&self, a: &RationalFn, b: &RationalFn) -> Result<RationalFn> {
        a.add(b, self.budget)
    }

    pub fn sub(&self, a: &RationalFn, b: &RationalFn) -> Result<RationalFn> {
        a.sub(b, self.budget)
    }

    /// Gram entry `a_{n+i, n+j}` of the order-3 Gram matrix.
    pub fn gram_entry(&self, i: i64, j: i64) -> Result<RationalFn> {
        let (d, dist) = (i.min(j), (i - j).abs());
        match dist {
            0 => self.sub(
                &self.ratio((1, 5), &[(3, 0, d)], &[])?,
                &self.ratio(
                    (1, 15),
                    &[(3, 0, d), (2, 1, d), (2, 1, d)],
                    &[(2, 0, d), (3, 1, d)],
                )?,
            ),
            1 => self.sum(&[
                self.ratio((1, 10), &[(3, 1, d)], &[])?,
                self.ratio(
                    (1, 30),
                    &[(2, 1, d), (2, 1, d), (1, 0, d)],
                    &[(2, 0, d), (3, 1, d)],
                )?,
                self.ratio(
                    (1, 30),
                    &[(3, 2, d), (3, 2, d), (4, 3, d)],
                    &[(3, 1, d), (4, 2, d)],
                )?,
            ]),
            2 => self.ratio(
                (1, 30),
                &[(3, 2, d), (3, 2, d), (3, 2, d)],
                &[(3, 1, d), (4, 2, d)],
            ),
            _ => Ok(RationalFn::zero(self.nvars())),
        }
    }

    /// `1 / phi_{n+d}`.
    pub fn phi_recip(&self, d: i64) -> Result<RationalFn> {
        let z = (0, -1, d);
        let y = (1, -1, d);
        let (a, b, c, s, r) = ((1, 0, d), (2, 1, d), (3, 2, d), (3, 1, d), (2, 0, d));
        self.sum(&[
            self.ratio((1, 9), &[a], &[])?,
            self.ratio((1, 12), &[b], &[])?,
            self.ratio((1, 5), &[c], &[])?,
            self.ratio((-1, 30), &[b, c], &[s])?,
            self.ratio((-1, 180), &[b, c, c], &[s, s])?,
            self.ratio((2, 27), &[a, b, c], &[s, r])?,
            self.ratio((5, 108), &[z, a], &[y])?,
            self.ratio((2, 73), &[z, z, a], &[y, y])?,
        ])
    }

    pub fn phi(&self, d: i64) -> Result<RationalFn> {
        self.phi_recip(d)?.recip()
    }

    pub fn psi(&self, d: i64) -> Result<RationalFn> {
        self.sum(&[
            self.ratio((1, 9), &[(1, 0, d)], &[])?,
            self.ratio((1, 12), &[(2, 1, d)], &[])?,
            self.ratio((1, 6), &[(3, 2, d)], &[])?,
        ])?
        .recip()
    }

    /// `a_{n+d-1,n+d} - a_{n+d-2,n+d} a_{n+d-1,n+d-1} / a_{n+d-2,n+d-1}`.
    pub fn theta_factor(&self, d: i64) -> Result<RationalFn> {
        let cross = self
            .gram_entry(d - 2, d)?
            .mul(&self.gram_entry(d - 1, d - 1)?)
            .div(&self.gram_entry(d - 2, d - 1)?)?;
        self.sub(&self.gram_entry(d - 1, d)?, &cross)
    }

    pub fn theta_hat(&self, d: i64) -> Result<RationalFn> {
        Ok(self.phi(d)?.mul(&self.theta_factor(d)?))
    }

    pub fn bracket(&self, ell: i64, en: i64, d: i64) -> Result<RationalFn> {
        Ok(RationalFn::from_poly(&self.bracket_poly(ell, en, d)?))
    }

    pub fn build(&self, expr: SymbolicExpr) -> Result<RationalFn> {
        match expr {
            SymbolicExpr::GramEntry(i, j) => self.gram_entry(i, j),
            SymbolicExpr::Phi(d) => self.phi(d),
            SymbolicExpr::PhiRecip(d) => self.phi_recip(d),
            SymbolicExpr::Psi(d) => self.psi(d),
            SymbolicExpr::ThetaHat(d) => self.theta_hat(d),
            SymbolicExpr::Bracket(l, p, d) => self.bracket(l, p, d),
        }
    }
}

/// Builds `expr` in the given window with an unlimited term budget.
pub fn build_symbolic(expr: SymbolicExpr, window: Window) -> Result<RationalFn> {
    let budget = TermBudget::unlimited();
    SymbolicBuilder::new(window, &budget).build(expr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn bracket_variables() {
        let budget = TermBudget::unlimited();
        let b = SymbolicBuilder::new(Window::new(5, -1), &budget);
        // (10)_{n-1} is the first variable; (31)_n covers x3 + x4.
        assert_eq!(b.bracket_poly(1, 0, -1).unwrap(), MultiPoly::var(5, 0));
        assert_eq!(
            b.bracket_poly(3, 1, 0).unwrap(),
            MultiPoly::var(5, 2).add(&MultiPoly::var(5, 3))
        );
        assert!(b.bracket_poly(4, 0, 1).is_err());
        assert!(b.bracket_poly(0, 1, 0).is_err());
    }

    #[test]
    fn psi_at_unit_gaps() {
        let psi = build_symbolic(SymbolicExpr::Psi(0), Window::new(3, 0)).unwrap();
        assert_eq!(psi.eval(&[q(1, 1), q(1, 1), q(1, 1)]), Some(q(36, 13)));
    }

    #[test]
    fn phi_bernstein_degeneration() {
        // Reference index at the first spline with no interior knots: only
        // (32) = x5 is nonzero, so phi = 5 / (30) = 5 / x5.
        let w = Window::new(5, -2).with_zero_vars(&[0, 1, 2, 3]);
        let phi = build_symbolic(SymbolicExpr::Phi(0), w).unwrap();
        let expected =
            RationalFn::from_parts(&MultiPoly::constant(5, q(5, 1)), &MultiPoly::var(5, 4))
                .unwrap();
        assert_eq!(phi, expected);
    }

    #[test]
    fn gram_entry_shape() {
        let a = build_symbolic(SymbolicExpr::GramEntry(0, 2), Window::new(4, 0)).unwrap();
        // (32)^3 / (30 (31)(42)) with x1..x4 = (10),(21),(32),(43)
        let at = [q(1, 1), q(2, 1), q(3, 1), q(4, 1)];
        assert_eq!(a.eval(&at), Some(q(27, 1) / (q(30, 1) * q(5, 1) * q(7, 1))));
        let row_sum: Vec<RationalFn> = (-2..=2)
            .map(|j| build_symbolic(SymbolicExpr::GramEntry(0, j), Window::new(7, -2)).unwrap())
            .collect();
        let budget = TermBudget::unlimited();
        let mut total = RationalFn::sum(7, &row_sum, &budget).unwrap();
        total.cancel_by_division(&budget).unwrap();
        // Row sum equals (30)/3 = (x3 + x4 + x5) / 3.
        let expected = RationalFn::from_poly(
            &MultiPoly::var(7, 2)
                .add(&MultiPoly::var(7, 3))
                .add(&MultiPoly::var(7, 4))
                .scale(&q(1, 3)),
        );
        assert_eq!(total, expected);
    }

    #[test]
    fn expression_names() {
        for text in [
            "a(0,1)",
            "phi(-1)",
            "phi_recip(0)",
            "psi(2)",
            "theta(1)",
            "bracket(3,0,0)",
        ] {
            let e: SymbolicExpr = text.parse().unwrap();
            assert_eq!(e.to_string(), text);
        }
        assert!("gamma(1)".parse::<SymbolicExpr>().is_err());
        assert!("a(1)".parse::<SymbolicExpr>().is_err());
        let _ = Rational::one();
    }
}
