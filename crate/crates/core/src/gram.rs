//! B-spline Gram matrices `a_{i,j} = <N_i, N_j>` and exact total-positivity checks.
//!
//! Closed forms are provided for orders 2 and 3. Any order can be assembled
//! either by Gauss-Legendre quadrature (floating point) or by exact
//! interval-wise integration of the polynomial pieces.

use itertools::Itertools;
use ndarray::Array2;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::knots::KnotSequence;
use crate::scalar::{scalar_json, serialize_scalar, Rational, Scalar};

/// Symmetric banded matrix. `bands[d][i]` stores `a_{i,i+d}` (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct SymBandedMatrix<S> {
    n: usize,
    bandwidth: usize,
    bands: Vec<Vec<S>>,
}

impl<S: Scalar> SymBandedMatrix<S> {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        let bandwidth = bandwidth.min(n.saturating_sub(1));
        let bands = (0..=bandwidth)
            .map(|d| vec![S::zero(); n.saturating_sub(d)])
            .collect();
        SymBandedMatrix {
            n,
            bandwidth,
            bands,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Entry `(i, j)`, 0-based; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> S {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.bandwidth || hi >= self.n {
            S::zero()
        } else {
            self.bands[d][lo].clone()
        }
    }

    /// Borrowing accessor for an in-band entry.
    pub fn band_entry(&self, i: usize, j: usize) -> Option<&S> {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        self.bands.get(hi - lo).and_then(|band| band.get(lo))
    }

    pub fn set(&mut self, i: usize, j: usize, value: S) {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        assert!(
            d <= self.bandwidth && hi < self.n,
            "entry ({i}, {j}) outside band"
        );
        self.bands[d][lo] = value;
    }

    pub fn to_dense(&self) -> Array2<S> {
        Array2::from_shape_fn((self.n, self.n), |(i, j)| self.get(i, j))
    }

    /// Leading principal `n x n` submatrix.
    pub fn leading(&self, n: usize) -> Self {
        let mut out = Self::zeros(n.min(self.n), self.bandwidth);
        for d in 0..=out.bandwidth {
            for i in 0..out.n.saturating_sub(d) {
                out.bands[d][i] = self.bands[d][i].clone();
            }
        }
        out
    }

    pub fn row_sum(&self, i: usize) -> S {
        let lo = i.saturating_sub(self.bandwidth);
        let hi = (i + self.bandwidth).min(self.n - 1);
        (lo..=hi).fold(S::zero(), |acc, j| acc + self.get(i, j))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> SymBandedMatrix<T> {
        SymBandedMatrix {
            n: self.n,
            bandwidth: self.bandwidth,
            bands: self
                .bands
                .iter()
                .map(|band| band.iter().map(&f).collect())
                .collect(),
        }
    }

    /// Matrix dump: `{"n", "bandwidth", "entries": [[i, j, value], ...]}` with
    /// 1-based indices and `i <= j`.
    pub fn to_json(&self) -> Value {
        let mut entries = Vec::new();
        for i in 0..self.n {
            for d in 0..=self.bandwidth {
                if i + d < self.n {
                    entries.push(json!([i + 1, i + d + 1, scalar_json(&self.bands[d][i])]));
                }
            }
        }
        json!({ "n": self.n, "bandwidth": self.bandwidth, "entries": entries })
    }
}

/// `coef * prod(num) / prod(den)`; a zero factor in the numerator short-circuits
/// to zero before dividing, which resolves the `0/0` ratios at clamped ends.
pub(crate) fn bracket_ratio<S: Scalar>(coef: S, num: &[S], den: &[S]) -> S {
    if num.iter().any(Zero::is_zero) {
        return S::zero();
    }
    let top = num.iter().fold(coef, |acc, f| acc * f.clone());
    let bottom = den.iter().fold(S::one(), |acc, f| acc * f.clone());
    assert!(
        !bottom.is_zero(),
        "zero bracket denominator with nonzero numerator"
    );
    top / bottom
}

fn require_order<S: Scalar>(ks: &KnotSequence<S>, order: usize) -> Result<()> {
    if ks.order() != order {
        Err(Error::input(format!(
            "expected spline order {order}, got {}",
            ks.order()
        )))
    } else {
        Ok(())
    }
}

/// Gram matrix of piecewise linear B-splines:
/// `a_{i,i} = (20)_i / 3`, `a_{i,i+1} = (21)_i / 6`.
pub fn gram_linear<S: Scalar>(ks: &KnotSequence<S>) -> Result<SymBandedMatrix<S>> {
    require_order(ks, 2)?;
    let m = ks.dim();
    let mut a = SymBandedMatrix::zeros(m, 1);
    for i in 1..=m {
        let j = i as i64;
        a.set(i - 1, i - 1, ks.bracket(2, 0, j) / S::from_int(3));
        if i < m {
            a.set(i - 1, i, ks.bracket(2, 1, j) / S::from_int(6));
        }
    }
    Ok(a)
}

/// Single entry `a_{i,j}` (1-based) of the order-3 Gram matrix.
pub fn quadratic_entry<S: Scalar>(ks: &KnotSequence<S>, i: usize, j: usize) -> S {
    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
    let b = |ell: i64, en: i64| ks.bracket(ell, en, lo as i64);
    let c = |n: i64, d: i64| S::from_ratio(n, d);
    match hi - lo {
        0 => {
            let (b30, b21, b20, b31) = (b(3, 0), b(2, 1), b(2, 0), b(3, 1));
            bracket_ratio(c(1, 5), std::slice::from_ref(&b30), &[])
                - bracket_ratio(c(1, 15), &[b30, b21.clone(), b21], &[b20, b31])
        }
        1 => {
            let (b31, b21, b10, b20) = (b(3, 1), b(2, 1), b(1, 0), b(2, 0));
            let (b32, b43, b42) = (b(3, 2), b(4, 3), b(4, 2));
            bracket_ratio(c(1, 10), std::slice::from_ref(&b31), &[])
                + bracket_ratio(c(1, 30), &[b21.clone(), b21, b10], &[b20, b31.clone()])
                + bracket_ratio(c(1, 30), &[b32.clone(), b32, b43], &[b31, b42])
        }
        2 => {
            let b32 = b(3, 2);
            bracket_ratio(
                c(1, 30),
                &[b32.clone(), b32.clone(), b32],
                &[b(3, 1), b(4, 2)],
            )
        }
        _ => S::zero(),
    }
}

/// Gram matrix of quadratic B-splines from the bracket closed forms.
pub fn gram_quadratic<S: Scalar>(ks: &KnotSequence<S>) -> Result<SymBandedMatrix<S>> {
    require_order(ks, 3)?;
    let m = ks.dim();
    let mut a = SymBandedMatrix::zeros(m, 2);
    for i in 1..=m {
        for j in i..=(i + 2).min(m) {
            a.set(i - 1, j - 1, quadratic_entry(ks, i, j));
        }
    }
    Ok(a)
}

/// The two partial integrals of `N_i N_{i+1}` over `[t_{i+1}, t_{i+2}]` and
/// `[t_{i+2}, t_{i+3}]` (order 3, 1-based `i`).
pub fn quadratic_cross_terms<S: Scalar>(ks: &KnotSequence<S>, i: usize) -> Result<(S, S)> {
    require_order(ks, 3)?;
    if i == 0 || i >= ks.dim() {
        return Err(Error::input(format!(
            "cross-term index {i} outside 1..={}",
            ks.dim() - 1
        )));
    }
    let b = |ell: i64, en: i64| ks.bracket(ell, en, i as i64);
    let c = |n: i64, d: i64| S::from_ratio(n, d);
    let (b21, b31, b10, b20, b32, b43, b42) = (
        b(2, 1),
        b(3, 1),
        b(1, 0),
        b(2, 0),
        b(3, 2),
        b(4, 3),
        b(4, 2),
    );
    let first = bracket_ratio(
        c(1, 10),
        &[b21.clone(), b21.clone()],
        std::slice::from_ref(&b31),
    ) + bracket_ratio(
        c(1, 30),
        &[b21.clone(), b21.clone(), b10],
        &[b31.clone(), b20],
    ) + bracket_ratio(
        c(1, 5),
        &[b21.clone(), b21.clone(), b32.clone()],
        &[b31.clone(), b31.clone()],
    );
    let second = bracket_ratio(
        c(1, 10),
        &[b32.clone(), b32.clone()],
        std::slice::from_ref(&b31),
    ) + bracket_ratio(
        c(1, 30),
        &[b32.clone(), b32.clone(), b43],
        &[b31.clone(), b42],
    ) + bracket_ratio(c(1, 5), &[b32.clone(), b32, b21], &[b31.clone(), b31]);
    Ok((first, second))
}

/// Gram matrix for the order of the knot sequence: closed forms for orders
/// 2 and 3, exact piecewise integration otherwise.
pub fn gram<S: Scalar>(ks: &KnotSequence<S>) -> SymBandedMatrix<S> {
    match ks.order() {
        2 => gram_linear(ks).expect("order checked"),
        3 => gram_quadratic(ks).expect("order checked"),
        _ => gram_exact_integration(ks),
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(points: usize) -> Vec<(f64, f64)> {
    let n = points;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut slope = 1.0;
        for _ in 0..100 {
            // Three-term recurrence: p1 = P_n(x), p0 = P_{n-1}(x).
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            slope = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / slope;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * slope * slope)));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Gram matrix by Gauss-Legendre quadrature with `k` nodes per knot interval,
/// which integrates the degree `2k - 2` products exactly up to rounding.
pub fn gram_quadrature(ks: &KnotSequence<f64>) -> SymBandedMatrix<f64> {
    let k = ks.order();
    let m = ks.dim();
    let rule = gauss_legendre(k);
    let mut a = SymBandedMatrix::zeros(m, k - 1);
    for r in k..=m {
        let (lo, hi) = (ks.t(r as i64), ks.t(r as i64 + 1));
        let half = 0.5 * (hi - lo);
        for &(node, weight) in &rule {
            // Node position measured from t_r, not from 0.
            let (first, values) = ks.eval_in_interval(k, r, &(half * (1.0 + node)));
            for (p, vp) in values.iter().enumerate() {
                for (q, vq) in values.iter().enumerate().skip(p) {
                    let (i, j) = (first - 1 + p, first - 1 + q);
                    let cur = a.get(i, j);
                    a.set(i, j, cur + weight * half * vp * vq);
                }
            }
        }
    }
    a
}

type Poly<S> = Vec<S>;

fn poly_axpy<S: Scalar>(acc: &mut Poly<S>, p: &Poly<S>, c0: &S, c1: &S) {
    // acc += (c0 + c1 s) * p
    if acc.len() < p.len() + 1 {
        acc.resize(p.len() + 1, S::zero());
    }
    for (d, coef) in p.iter().enumerate() {
        acc[d] = acc[d].clone() + c0.clone() * coef.clone();
        acc[d + 1] = acc[d + 1].clone() + c1.clone() * coef.clone();
    }
}

/// Polynomial pieces of `N_{r-k+1..=r, k}` on `[t_r, t_{r+1}]` in the local
/// variable `s = x - t_r`.
fn local_pieces<S: Scalar>(ks: &KnotSequence<S>, r: usize) -> Vec<Poly<S>> {
    let k = ks.order();
    let tr = ks.t(r as i64);
    let mut pieces: Vec<Poly<S>> = vec![vec![S::one()]];
    for p in 1..k {
        let first = r as i64 - p as i64 + 1;
        let mut next = Vec::with_capacity(p + 1);
        for q in 0..=p {
            let i = first - 1 + q as i64;
            let mut acc: Poly<S> = Vec::new();
            if q >= 1 {
                let den = ks.t(i + p as i64) - ks.t(i);
                if !den.is_zero() {
                    let c0 = (tr.clone() - ks.t(i)) / den.clone();
                    let c1 = S::one() / den;
                    poly_axpy(&mut acc, &pieces[q - 1], &c0, &c1);
                }
            }
            if q < p {
                let den = ks.t(i + p as i64 + 1) - ks.t(i + 1);
                if !den.is_zero() {
                    let c0 = (ks.t(i + p as i64 + 1) - tr.clone()) / den.clone();
                    let c1 = -(S::one() / den);
                    poly_axpy(&mut acc, &pieces[q], &c0, &c1);
                }
            }
            next.push(acc);
        }
        pieces = next;
    }
    pieces
}

fn integrate_product<S: Scalar>(p: &Poly<S>, q: &Poly<S>, h: &S) -> S {
    if p.is_empty() || q.is_empty() {
        return S::zero();
    }
    let mut prod = vec![S::zero(); p.len() + q.len() - 1];
    for (a, pa) in p.iter().enumerate() {
        for (b, qb) in q.iter().enumerate() {
            prod[a + b] = prod[a + b].clone() + pa.clone() * qb.clone();
        }
    }
    // Horner on sum_d c_d h^{d+1} / (d+1).
    let mut acc = S::zero();
    for (d, c) in prod.iter().enumerate().rev() {
        acc = acc * h.clone() + c.clone() / S::from_int(d as i64 + 1);
    }
    acc * h.clone()
}

/// Gram matrix by exact integration of the piecewise polynomial products.
/// Exact for rational knots, any order.
pub fn gram_exact_integration<S: Scalar>(ks: &KnotSequence<S>) -> SymBandedMatrix<S> {
    let k = ks.order();
    let m = ks.dim();
    let mut a = SymBandedMatrix::zeros(m, k - 1);
    for r in k..=m {
        let h = ks.t(r as i64 + 1) - ks.t(r as i64);
        let pieces = local_pieces(ks, r);
        let first = r + 1 - k;
        for p in 0..pieces.len() {
            for q in p..pieces.len() {
                let (i, j) = (first - 1 + p, first - 1 + q);
                let cur = a.get(i, j);
                a.set(i, j, cur + integrate_product(&pieces[p], &pieces[q], &h));
            }
        }
    }
    a
}

/// Outcome of the minor enumeration.
#[derive(Debug, Clone, Serialize)]
pub struct MinorReport {
    pub max_order: usize,
    pub minors_checked: u64,
    /// Minors that vanish because the band structure forces a zero block.
    pub structural_zeros: u64,
    #[serde(serialize_with = "serialize_scalar")]
    pub min_value: Rational,
    /// Row and column sets (1-based) of the minimal minor.
    pub witness: Option<(Vec<usize>, Vec<usize>)>,
    pub complete: bool,
}

impl MinorReport {
    pub fn pass(&self) -> bool {
        self.complete && !self.min_value.is_negative()
    }
}

fn bareiss_det(mut mat: Vec<Vec<BigInt>>) -> BigInt {
    let n = mat.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if mat[k][k].is_zero() {
            match (k + 1..n).find(|&r| !mat[r][k].is_zero()) {
                Some(r) => {
                    mat.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &mat[k][k] * &mat[i][j] - &mat[i][k] * &mat[k][j];
                mat[i][j] = v / &prev;
            }
        }
        prev = mat[k][k].clone();
    }
    sign * mat[n - 1][n - 1].clone()
}

/// Enumerates every minor `det A[alpha; beta]` with `|alpha| = |beta| <= max_order`
/// in increasing order, lexicographic in `alpha` then `beta`, and stops at the
/// first negative one. `budget` caps the number of minors visited.
pub fn check_total_positivity(
    a: &SymBandedMatrix<Rational>,
    max_order: usize,
    budget: Option<u64>,
) -> Result<MinorReport> {
    let n = a.dim();
    if max_order > n {
        return Err(Error::input(format!(
            "minor order {max_order} exceeds dimension {n}"
        )));
    }
    // Scale to integers; a positive common factor preserves every sign.
    let mut scale = BigInt::one();
    for i in 0..n {
        for j in i..n.min(i + a.bandwidth() + 1) {
            scale = scale.lcm(a.get(i, j).denom());
        }
    }
    let ints: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let v = a.get(i, j);
                    (v.numer() * &scale / v.denom()).clone()
                })
                .collect()
        })
        .collect();
    let w = a.bandwidth();
    let mut report = MinorReport {
        max_order,
        minors_checked: 0,
        structural_zeros: 0,
        min_value: Rational::zero(),
        witness: None,
        complete: false,
    };
    let mut min_scaled: Option<(BigInt, usize)> = None;
    for ell in 1..=max_order {
        for alpha in (0..n).combinations(ell) {
            for beta in (0..n).combinations(ell) {
                if budget.is_some_and(|b| report.minors_checked >= b) {
                    finalize_min(&mut report, &min_scaled, &scale);
                    return Err(Error::MinorBudget {
                        budget: budget.unwrap_or_default(),
                        partial: Box::new(report),
                    });
                }
                report.minors_checked += 1;
                // A shifted pair |alpha_r - beta_r| > w leaves a zero block
                // too large for a nonzero determinant.
                let det = if alpha.iter().zip(&beta).any(|(&p, &q)| p.abs_diff(q) > w) {
                    report.structural_zeros += 1;
                    BigInt::zero()
                } else {
                    let sub = alpha
                        .iter()
                        .map(|&p| beta.iter().map(|&q| ints[p][q].clone()).collect())
                        .collect();
                    bareiss_det(sub)
                };
                let better = match &min_scaled {
                    None => true,
                    Some((cur, cur_ell)) => {
                        // Compare det / scale^ell across orders.
                        let lhs = &det * scale.pow(*cur_ell as u32);
                        let rhs = cur * scale.pow(ell as u32);
                        lhs < rhs
                    }
                };
                if better {
                    min_scaled = Some((det.clone(), ell));
                    report.witness = Some((
                        alpha.iter().map(|p| p + 1).collect(),
                        beta.iter().map(|q| q + 1).collect(),
                    ));
                }
                if det.is_negative() {
                    finalize_min(&mut report, &min_scaled, &scale);
                    report.complete = true;
                    return Ok(report);
                }
            }
        }
    }
    finalize_min(&mut report, &min_scaled, &scale);
    report.complete = true;
    Ok(report)
}

fn finalize_min(report: &mut MinorReport, min_scaled: &Option<(BigInt, usize)>, scale: &BigInt) {
    if let Some((det, ell)) = min_scaled {
        report.min_value = Rational::new(det.clone(), scale.pow(*ell as u32));
    }
}
