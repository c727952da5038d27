//! Clamped knot sequences on `[0, 1]`, bracket notation and B-spline evaluation.
//!
//! Indices follow the usual 1-based B-spline convention: knots are
//! `t_1, ..., t_{m+k}` and the splines are `N_1, ..., N_m`. Knot queries
//! outside the stored range clamp to `0` (left) and `1` (right).

use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, rational_from_f64, Rational, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct KnotSequence<S> {
    order: usize,
    interior: Vec<S>,
    knots: Vec<S>,
}

/// Knot difference `(ell, en)_j = t_{j+ell} - t_{j+en}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bracket {
    pub ell: i64,
    pub en: i64,
}

impl Bracket {
    pub const fn new(ell: i64, en: i64) -> Self {
        Bracket { ell, en }
    }

    pub fn value<S: Scalar>(&self, ks: &KnotSequence<S>, j: i64) -> S {
        ks.bracket(self.ell, self.en, j)
    }
}

impl<S: Scalar> KnotSequence<S> {
    /// Builds the clamped knot vector for the given order and interior breakpoints.
    pub fn new(order: usize, interior: Vec<S>) -> Result<Self> {
        if order == 0 {
            return Err(Error::input("spline order must be at least 1"));
        }
        let zero = S::zero();
        let one = S::one();
        for (idx, x) in interior.iter().enumerate() {
            if *x <= zero || *x >= one {
                return Err(Error::input(format!(
                    "interior breakpoint #{} = {x} is not strictly inside (0, 1)",
                    idx + 1
                )));
            }
        }
        if let Some(w) = interior.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::input(format!(
                "interior breakpoints must be strictly increasing (#{} >= #{})",
                w + 1,
                w + 2
            )));
        }
        let mut knots = Vec::with_capacity(2 * order + interior.len());
        knots.extend(std::iter::repeat_n(zero, order));
        knots.extend(interior.iter().cloned());
        knots.extend(std::iter::repeat_n(one, order));
        Ok(KnotSequence {
            order,
            interior,
            knots,
        })
    }

    /// Spline order `k` (degree `k - 1`).
    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of B-splines `m = k + #interior`.
    pub fn dim(&self) -> usize {
        self.order + self.interior.len()
    }

    pub fn interior(&self) -> &[S] {
        &self.interior
    }

    /// Full knot vector `t_1, ..., t_{m+k}`.
    pub fn knots(&self) -> &[S] {
        &self.knots
    }

    /// `t_i` with clamping outside `1..=m+k`.
    pub fn t(&self, i: i64) -> S {
        if i < 1 {
            S::zero()
        } else if i as usize > self.knots.len() {
            S::one()
        } else {
            self.knots[i as usize - 1].clone()
        }
    }

    /// Largest gap between consecutive knots.
    pub fn mesh(&self) -> S {
        self.knots
            .windows(2)
            .map(|w| w[1].clone() - w[0].clone())
            .fold(S::zero(), S::max_of)
    }

    /// Gaps between consecutive breakpoints `0, interior..., 1`.
    pub fn breakpoint_gaps(&self) -> Vec<S> {
        let mut pts = Vec::with_capacity(self.interior.len() + 2);
        pts.push(S::zero());
        pts.extend(self.interior.iter().cloned());
        pts.push(S::one());
        pts.windows(2)
            .map(|w| w[1].clone() - w[0].clone())
            .collect()
    }

    /// `(ell en)_j = t_{j+ell} - t_{j+en}`; indices clamp, so this never fails.
    pub fn bracket(&self, ell: i64, en: i64, j: i64) -> S {
        self.t(j + ell) - self.t(j + en)
    }

    fn check_index(&self, i: usize, what: &str) -> Result<()> {
        if i == 0 || i > self.dim() {
            Err(Error::input(format!(
                "{what} index {i} outside 1..={}",
                self.dim()
            )))
        } else {
            Ok(())
        }
    }

    /// Length of the joint support hull `[t_min(i,j), t_{max(i,j)+k}]`.
    pub fn eta(&self, i: usize, j: usize) -> Result<S> {
        self.check_index(i, "eta row")?;
        self.check_index(j, "eta column")?;
        Ok(self.eta_unchecked(i, j))
    }

    pub(crate) fn eta_unchecked(&self, i: usize, j: usize) -> S {
        let lo = i.min(j) as i64;
        let hi = i.max(j) as i64;
        self.t(hi + self.order as i64) - self.t(lo)
    }

    /// `||N_{i,k}||_1 = (t_{i+k} - t_i) / k`.
    pub fn l1_norm(&self, i: usize) -> Result<S> {
        self.check_index(i, "spline")?;
        let i = i as i64;
        let k = self.order as i64;
        Ok((self.t(i + k) - self.t(i)) / S::from_int(k))
    }

    /// Index `r` of the knot interval containing `x`: `t_r <= x < t_{r+1}`,
    /// except that `x = 1` belongs to the last nonempty interval (`r = m`).
    pub fn locate(&self, x: &S) -> Result<usize> {
        if *x < S::zero() || *x > S::one() {
            return Err(Error::input(format!("evaluation point {x} outside [0, 1]")));
        }
        let m = self.dim();
        if *x >= S::one() {
            return Ok(m);
        }
        // Knots t_k..t_{m+1} are strictly increasing; binary search there.
        let (mut lo, mut hi) = (self.order, m);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if self.t(mid as i64) <= *x {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        Ok(lo)
    }

    /// Values of every nonzero `N_{i,ord}(x)` as `(first_index, values)`.
    ///
    /// Terms of the recursion with a zero-length denominator vanish.
    pub fn eval_local(&self, ord: usize, x: &S) -> Result<(usize, Vec<S>)> {
        if ord == 0 || ord > self.order {
            return Err(Error::input(format!(
                "evaluation order {ord} outside 1..={}",
                self.order
            )));
        }
        let r = self.locate(x)?;
        let offset = x.clone() - self.t(r as i64);
        Ok(self.eval_in_interval(ord, r, &offset))
    }

    /// Like [`eval_local`](Self::eval_local) at `x = t_r + offset`, with
    /// every distance `x - t_i` formed as `(t_r - t_i) + offset`. In floating
    /// point this keeps full relative accuracy inside very short intervals.
    /// `ord` must lie in `1..=k` and `r` in `k..=m`.
    pub fn eval_in_interval(&self, ord: usize, r: usize, offset: &S) -> (usize, Vec<S>) {
        let tr = self.t(r as i64);
        let dist = |i: i64| (tr.clone() - self.t(i)) + offset.clone();
        // values[q] holds N_{r-p+1+q, p} during the sweep over p.
        let mut values = vec![S::one()];
        for p in 1..ord {
            let first = r as i64 - p as i64 + 1;
            let mut next = Vec::with_capacity(p + 1);
            for q in 0..=p {
                let i = first - 1 + q as i64;
                let mut acc = S::zero();
                if q >= 1 {
                    let left = &values[q - 1];
                    let den = self.t(i + p as i64) - self.t(i);
                    if !den.is_zero() && !left.is_zero() {
                        acc = acc + dist(i) / den * left.clone();
                    }
                }
                if q < p {
                    let right = &values[q];
                    let den = self.t(i + p as i64 + 1) - self.t(i + 1);
                    if !den.is_zero() && !right.is_zero() {
                        acc = acc - dist(i + p as i64 + 1) / den * right.clone();
                    }
                }
                next.push(acc);
            }
            values = next;
        }
        (r + 1 - ord, values)
    }

    /// `N_{i,ord}(x)` by the Cox-de Boor recursion.
    pub fn eval(&self, i: usize, ord: usize, x: &S) -> Result<S> {
        let last = self.dim() + self.order - ord.max(1);
        if i == 0 || i > last {
            return Err(Error::input(format!("spline index {i} outside 1..={last}")));
        }
        let (first, values) = self.eval_local(ord, x)?;
        Ok(if i >= first && i < first + values.len() {
            values[i - first].clone()
        } else {
            S::zero()
        })
    }

    /// Order-3 B-spline through its explicit three-branch quadratic form.
    pub fn eval_quadratic_closed(&self, i: usize, x: &S) -> Result<S> {
        if self.order != 3 {
            return Err(Error::input(format!(
                "closed quadratic form needs order 3, knot sequence has order {}",
                self.order
            )));
        }
        self.check_index(i, "spline")?;
        let r = self.locate(x)?;
        let i = i as i64;
        let t = |d: i64| self.t(i + d);
        let b = |ell: i64, en: i64| self.bracket(ell, en, i);
        let x = x.clone();
        Ok(match r as i64 - i {
            0 => (x.clone() - t(0)).square() / (b(2, 0) * b(1, 0)),
            1 => {
                (x.clone() - t(0)) * (t(2) - x.clone()) / (b(2, 0) * b(2, 1))
                    + (x.clone() - t(1)) * (t(3) - x) / (b(3, 1) * b(2, 1))
            }
            2 => (t(3) - x).square() / (b(3, 1) * b(3, 2)),
            _ => S::zero(),
        })
    }

    /// Converts the knot sequence to another scalar type.
    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> KnotSequence<T> {
        KnotSequence {
            order: self.order,
            interior: self.interior.iter().map(&f).collect(),
            knots: self.knots.iter().map(&f).collect(),
        }
    }
}

impl KnotSequence<Rational> {
    pub fn to_f64(&self) -> KnotSequence<f64> {
        self.map_scalar(Scalar::to_f64)
    }
}

/// Partition file `{"order": k, "interior": [...]}`. Entries written as
/// strings (`"p/q"`) are parsed exactly, JSON numbers are taken at their
/// double-precision value.
#[derive(Debug, Clone, Deserialize)]
pub struct PartitionFile {
    pub order: usize,
    pub interior: Vec<Value>,
}

impl PartitionFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn interior_rationals(&self) -> Result<Vec<Rational>> {
        self.interior
            .iter()
            .map(|v| match v {
                Value::String(s) => parse_rational(s)
                    .ok_or_else(|| Error::input(format!("cannot parse breakpoint {s:?}"))),
                Value::Number(n) => n
                    .as_f64()
                    .and_then(rational_from_f64)
                    .ok_or_else(|| Error::input(format!("cannot parse breakpoint {n}"))),
                other => Err(Error::input(format!("unexpected breakpoint {other}"))),
            })
            .collect()
    }

    pub fn knots(&self) -> Result<KnotSequence<Rational>> {
        KnotSequence::new(self.order, self.interior_rationals()?)
    }
}
