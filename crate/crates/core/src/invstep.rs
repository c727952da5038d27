//! Inverses of the leading principal submatrices `A_n` built one border at a
//! time.
//!
//! `A_{n+1}` is the block-diagonal extension of `A_n` plus the rank-2 border
//! `U V^T`; the Sherman-Morrison-Woodbury identity then gives
//!
//! ```text
//! B_{n+1} = [B_n 0; 0 0] + s^{-1} [B_n u v^T B_n, -B_n u; -v^T B_n, 1],
//! s = a_{n+1,n+1} - v^T B_n u.
//! ```

use ndarray::Array2;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gram::SymBandedMatrix;
use crate::report::LemmaCheck;
use crate::scalar::{scalar_json, Rational, Scalar};

/// Border of `A_{n+1}` around `A_n`: column `u`, row `v` and the new corner.
#[derive(Debug, Clone, PartialEq)]
pub struct BorderVectors<S> {
    pub u: Vec<S>,
    pub v: Vec<S>,
    pub corner: S,
}

impl<S: Scalar> BorderVectors<S> {
    /// Border that grows the leading `n x n` block of `a` to `(n+1) x (n+1)`.
    pub fn from_banded(a: &SymBandedMatrix<S>, n: usize) -> Self {
        let u: Vec<S> = (0..n).map(|i| a.get(i, n)).collect();
        BorderVectors {
            v: u.clone(),
            u,
            corner: a.get(n, n),
        }
    }
}

/// State of the incremental inversion: the current `B_n = A_n^{-1}` together
/// with the diagonal history `b_{j,j}^j` and, when requested, every last
/// column `b_{.,j}^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowingInverse<S> {
    rows: Vec<Vec<S>>,
    diag_history: Vec<S>,
    last_cols: Option<Vec<Vec<S>>>,
}

impl<S: Scalar> GrowingInverse<S> {
    /// Empty state (`n = 0`).
    pub fn new(keep_history: bool) -> Self {
        GrowingInverse {
            rows: Vec::new(),
            diag_history: Vec::new(),
            last_cols: keep_history.then(Vec::new),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Entry of `B_n`, 0-based.
    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.rows[i][j]
    }

    pub fn matrix(&self) -> Array2<S> {
        let n = self.dim();
        Array2::from_shape_fn((n, n), |(i, j)| self.rows[i][j].clone())
    }

    /// `b_{j,j}^j` for `j = 1..=n`.
    pub fn diag_history(&self) -> &[S] {
        &self.diag_history
    }

    pub fn has_history(&self) -> bool {
        self.last_cols.is_some()
    }

    /// Last column of `B_j` (length `j`, 1-based `j`), when history is kept.
    pub fn last_column(&self, j: usize) -> Option<&[S]> {
        self.last_cols
            .as_ref()
            .and_then(|cols| cols.get(j.checked_sub(1)?))
            .map(Vec::as_slice)
    }

    fn push_history(&mut self) {
        let n = self.dim();
        self.diag_history.push(self.rows[n - 1][n - 1].clone());
        if let Some(cols) = self.last_cols.as_mut() {
            cols.push(self.rows.iter().map(|row| row[n - 1].clone()).collect());
        }
    }

    fn check_border(&self, border: &BorderVectors<S>) -> Result<()> {
        let n = self.dim();
        if border.u.len() != n || border.v.len() != n {
            return Err(Error::input(format!(
                "border vectors of length {}/{} for a {n}x{n} inverse",
                border.u.len(),
                border.v.len()
            )));
        }
        if border.corner.is_zero() {
            return Err(Error::Arithmetic {
                step: n + 1,
                message: "zero corner entry a_{n+1,n+1}".into(),
            });
        }
        Ok(())
    }

    fn apply_border(
        &mut self,
        w: Vec<S>,
        z: Vec<S>,
        border: &BorderVectors<S>,
        symmetric: bool,
    ) -> Result<()> {
        let n = self.dim();
        let vw = border
            .v
            .iter()
            .zip(&w)
            .fold(S::zero(), |mut acc, (vp, wp)| {
                acc.add_assign_ref(&vp.mul_ref(wp));
                acc
            });
        let s = border.corner.clone() - vw;
        if s.is_zero() {
            return Err(Error::Arithmetic {
                step: n + 1,
                message: "vanishing denominator a_{n+1,n+1} - v^T B_n u".into(),
            });
        }
        let inv = s.recip();
        let scaled_w: Vec<S> = w.iter().map(|wi| wi.mul_ref(&inv)).collect();
        for i in 0..n {
            let start = if symmetric { i } else { 0 };
            for j in start..n {
                let delta = scaled_w[i].mul_ref(&z[j]);
                self.rows[i][j].add_assign_ref(&delta);
            }
        }
        if symmetric {
            for i in 0..n {
                for j in 0..i {
                    self.rows[i][j] = self.rows[j][i].clone();
                }
            }
        }
        for (i, row) in self.rows.iter_mut().enumerate() {
            row.push(-scaled_w[i].clone());
        }
        let mut last: Vec<S> = z.iter().map(|zj| -(zj.clone() * inv.clone())).collect();
        if symmetric {
            last = scaled_w.iter().map(|x| -x.clone()).collect();
        }
        last.push(inv);
        self.rows.push(last);
        self.push_history();
        Ok(())
    }

    /// One bordered step using the full block formula.
    pub fn extend(&mut self, border: &BorderVectors<S>) -> Result<()> {
        self.check_border(border)?;
        let n = self.dim();
        let w: Vec<S> = (0..n)
            .map(|i| {
                (0..n).fold(S::zero(), |mut acc, p| {
                    acc.add_assign_ref(&self.rows[i][p].mul_ref(&border.u[p]));
                    acc
                })
            })
            .collect();
        let z: Vec<S> = (0..n)
            .map(|j| {
                (0..n).fold(S::zero(), |mut acc, p| {
                    acc.add_assign_ref(&border.v[p].mul_ref(&self.rows[p][j]));
                    acc
                })
            })
            .collect();
        self.apply_border(w, z, border, false)
    }

    /// One bordered step for a symmetric border whose nonzero entries lie in
    /// the last `bandwidth` positions; zero products are skipped.
    pub fn extend_banded(&mut self, border: &BorderVectors<S>, bandwidth: usize) -> Result<()> {
        self.check_border(border)?;
        let n = self.dim();
        let lo = n.saturating_sub(bandwidth);
        if border.u[..lo].iter().any(|x| !x.is_zero()) || border.u != border.v {
            return Err(Error::input(
                "border is not symmetric with the given bandwidth",
            ));
        }
        let w: Vec<S> = (0..n)
            .map(|i| {
                (lo..n).fold(S::zero(), |mut acc, p| {
                    acc.add_assign_ref(&self.rows[i][p].mul_ref(&border.u[p]));
                    acc
                })
            })
            .collect();
        let z = w.clone();
        self.apply_border(w, z, border, true)
    }
}

/// Applies one bordered step and returns the grown state.
pub fn extend_inverse<S: Scalar>(
    mut state: GrowingInverse<S>,
    border: &BorderVectors<S>,
) -> Result<GrowingInverse<S>> {
    state.extend(border)?;
    Ok(state)
}

/// Inverts `A` through its leading principal submatrices `A_1, ..., A_m`.
pub fn invert_iteratively<S: Scalar>(
    a: &SymBandedMatrix<S>,
    keep_history: bool,
) -> Result<GrowingInverse<S>> {
    let mut state = GrowingInverse::new(keep_history);
    for n in 0..a.dim() {
        let border = BorderVectors::from_banded(a, n);
        state.extend_banded(&border, a.bandwidth())?;
    }
    Ok(state)
}

/// `(A + U V^T)^{-1} = A^{-1} - A^{-1} U (1 + V^T A^{-1} U)^{-1} V^T A^{-1}`.
pub fn sm_update<S: Scalar>(ainv: &Array2<S>, u: &Array2<S>, v: &Array2<S>) -> Result<Array2<S>> {
    let (n, j) = u.dim();
    if ainv.dim() != (n, n) || v.dim() != (n, j) {
        return Err(Error::input("inconsistent Sherman-Morrison dimensions"));
    }
    let w = matmul(ainv, u); // n x j
    let z = matmul(&transpose(v), ainv); // j x n
    let mut cap = matmul(&transpose(v), &w);
    for d in 0..j {
        cap[[d, d]] = cap[[d, d]].clone() + S::one();
    }
    let cap_inv = gauss_jordan_inverse(&cap).map_err(|_| Error::SingularCapacitance {
        matrix: cap
            .rows()
            .into_iter()
            .map(|row| row.iter().map(Scalar::to_exact_string).collect())
            .collect(),
    })?;
    let correction = matmul(&matmul(&w, &cap_inv), &z);
    Ok(Array2::from_shape_fn((n, n), |(r, c)| {
        ainv[[r, c]].clone() - correction[[r, c]].clone()
    }))
}

pub(crate) fn matmul<S: Scalar>(a: &Array2<S>, b: &Array2<S>) -> Array2<S> {
    let (n, k) = a.dim();
    let (k2, m) = b.dim();
    assert_eq!(k, k2, "matmul shape mismatch");
    Array2::from_shape_fn((n, m), |(i, j)| {
        (0..k).fold(S::zero(), |mut acc, p| {
            if !a[[i, p]].is_zero() {
                acc.add_assign_ref(&a[[i, p]].mul_ref(&b[[p, j]]));
            }
            acc
        })
    })
}

fn transpose<S: Scalar>(a: &Array2<S>) -> Array2<S> {
    a.t().to_owned()
}

/// Gauss-Jordan inverse with partial pivoting (largest magnitude).
pub fn gauss_jordan_inverse<S: Scalar>(a: &Array2<S>) -> Result<Array2<S>> {
    let (n, cols) = a.dim();
    if n != cols {
        return Err(Error::input("matrix is not square"));
    }
    let mut aug = Array2::from_shape_fn((n, 2 * n), |(i, j)| {
        if j < n {
            a[[i, j]].clone()
        } else if j - n == i {
            S::one()
        } else {
            S::zero()
        }
    });
    for k in 0..n {
        let pivot = (k..n)
            .filter(|&r| !aug[[r, k]].is_zero())
            .max_by(|&r, &s| {
                aug[[r, k]]
                    .abs()
                    .partial_cmp(&aug[[s, k]].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .ok_or(Error::Singular)?;
        if pivot != k {
            for j in 0..2 * n {
                aug.swap([k, j], [pivot, j]);
            }
        }
        let p = aug[[k, k]].recip();
        for j in 0..2 * n {
            aug[[k, j]] = aug[[k, j]].clone() * p.clone();
        }
        for i in 0..n {
            if i != k && !aug[[i, k]].is_zero() {
                let f = aug[[i, k]].clone();
                for j in 0..2 * n {
                    let v = aug[[k, j]].clone() * f.clone();
                    aug[[i, j]] = aug[[i, j]].clone() - v;
                }
            }
        }
    }
    Ok(Array2::from_shape_fn((n, n), |(i, j)| {
        aug[[i, j + n]].clone()
    }))
}

/// Exact inverse by fraction-free Gauss-Jordan elimination over the integers,
/// verified against `A A^{-1} = I` before returning.
pub fn dense_inverse_oracle(a: &Array2<Rational>) -> Result<Array2<Rational>> {
    let (n, cols) = a.dim();
    if n != cols {
        return Err(Error::input("matrix is not square"));
    }
    let scale = a.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    // [M | I] with M = scale * A integral.
    let mut aug: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            (0..2 * n)
                .map(|j| {
                    if j < n {
                        a[[i, j]].numer() * &scale / a[[i, j]].denom()
                    } else if j - n == i {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect();
    let mut prev = BigInt::one();
    for k in 0..n {
        let pivot = (k..n)
            .find(|&r| !aug[r][k].is_zero())
            .ok_or(Error::Singular)?;
        aug.swap(k, pivot);
        for i in 0..n {
            if i == k {
                continue;
            }
            for j in 0..2 * n {
                if j == k {
                    continue;
                }
                let v = &aug[k][k] * &aug[i][j] - &aug[i][k] * &aug[k][j];
                aug[i][j] = v / &prev;
            }
            aug[i][k] = BigInt::zero();
        }
        prev = aug[k][k].clone();
    }
    // Left block is now det(M) * I (up to the row swaps already applied).
    let inv = Array2::from_shape_fn((n, n), |(i, j)| {
        Rational::new(aug[i][j + n].clone() * &scale, aug[i][i].clone())
    });
    let product = matmul(a, &inv);
    for ((i, j), v) in product.indexed_iter() {
        let expected = if i == j {
            Rational::one()
        } else {
            Rational::zero()
        };
        if *v != expected {
            return Err(Error::Arithmetic {
                step: i + 1,
                message: format!("oracle verification failed at ({}, {})", i + 1, j + 1),
            });
        }
    }
    Ok(inv)
}

/// Outcome of the sign-pattern test `(-1)^{i+j} b_{i,j} >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Checkerboard {
    pub pass: bool,
    /// First violating entry in row-major order (1-based).
    pub witness: Option<(usize, usize)>,
}

pub fn check_checkerboard<S: Scalar>(b: &Array2<S>) -> Checkerboard {
    for ((i, j), v) in b.indexed_iter() {
        let ok = if (i + j) % 2 == 0 {
            !v.is_negative()
        } else {
            !v.is_positive()
        };
        if !ok {
            return Checkerboard {
                pass: false,
                witness: Some((i + 1, j + 1)),
            };
        }
    }
    Checkerboard {
        pass: true,
        witness: None,
    }
}

/// Largest `|(B A - I)_{ij}|` as a float.
pub fn residual_max<S: Scalar>(b: &Array2<S>, a: &SymBandedMatrix<S>) -> f64 {
    let n = a.dim();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let lo = j.saturating_sub(a.bandwidth());
            let hi = (j + a.bandwidth()).min(n - 1);
            let mut acc = (lo..=hi).fold(S::zero(), |mut acc, p| {
                if let Some(apj) = a.band_entry(p, j) {
                    acc.add_assign_ref(&b[[i, p]].mul_ref(apj));
                }
                acc
            });
            if i == j {
                acc = acc - S::one();
            }
            worst = worst.max(acc.abs().to_f64());
        }
    }
    worst
}

/// Inequalities satisfied by the bordered recursion on any symmetric matrix
/// with at most two nonzero superdiagonals whose leading inverses are all
/// checkerboard: the diagonal recursion bound, the last-column propagation
/// bounds (coarse and sharp), and the nonnegativity of
/// `a_{n,n+1} a_{n-1,n} - 2 a_{n,n} a_{n-1,n+1}`.
pub fn check_bordered_inequalities<S: Scalar>(
    mat: &SymBandedMatrix<S>,
    inv: &GrowingInverse<S>,
) -> Result<Vec<LemmaCheck>> {
    if !inv.has_history() {
        return Err(Error::input("bordered checks need the inverse history"));
    }
    if mat.bandwidth() > 2 || inv.dim() != mat.dim() {
        return Err(Error::input(
            "bordered checks need a matching 5-banded matrix",
        ));
    }
    let m = mat.dim();
    let a = |i: usize, j: usize| mat.get(i - 1, j - 1);
    let diag = inv.diag_history();
    let bnn = |n: usize| diag[n - 1].clone();
    let col = |n: usize, j: usize| inv.last_column(n).expect("history")[j - 1].clone();

    let mut diag_bound = LemmaCheck::new("bordered diagonal recursion bound");
    let mut coarse = LemmaCheck::new("last column propagation (coarse)");
    let mut sharp = LemmaCheck::new("last column propagation (sharp)");
    let mut dominance = LemmaCheck::new("off-diagonal dominance");

    for n in 2..m {
        let a_prev = a(n - 1, n);
        if a_prev.is_zero() {
            continue;
        }
        let b_prev_prev = bnn(n - 1);
        let x = a(n + 1, n + 1)
            - bnn(n)
                * a(n, n + 1)
                * (a(n, n + 1) - S::from_int(2) * a(n, n) * a(n - 1, n + 1) / a_prev.clone())
            - S::from_int(2) * a(n, n + 1) * a(n - 1, n + 1) / a_prev.clone()
            - a(n - 1, n + 1).square()
                * b_prev_prev.clone()
                * (S::one() + bnn(n) * b_prev_prev * a_prev.square());
        if x.is_positive() {
            diag_bound.record(&(bnn(n + 1) * x), &S::one(), &[n + 1]);
        } else {
            diag_bound.record_flag(false, &[n + 1]);
        }
        dominance.record(
            &(S::from_int(2) * a(n, n) * a(n - 1, n + 1)),
            &(a(n, n + 1) * a(n - 1, n)),
            &[n],
        );
    }
    for n in 2..=m {
        let factor = bnn(n) * a(n - 1, n);
        for j in 1..n {
            coarse.record(
                &col(n, j).abs(),
                &(col(n - 1, j).abs() * factor.clone()),
                &[j, n],
            );
        }
        if n >= 3 && !a(n - 2, n - 1).is_zero() {
            let theta = bnn(n) * (a(n - 1, n) - a(n - 2, n) * a(n - 1, n - 1) / a(n - 2, n - 1));
            for j in 1..n - 1 {
                sharp.record(
                    &col(n, j).abs(),
                    &(col(n - 1, j).abs() * theta.clone()),
                    &[j, n],
                );
            }
        }
    }
    Ok(vec![diag_bound, coarse, sharp, dominance])
}

/// Inverse dump in the matrix-dump layout (`bandwidth = n - 1`).
pub fn inverse_json<S: Scalar>(b: &Array2<S>) -> Value {
    let n = b.nrows();
    let mut entries = Vec::new();
    for i in 0..n {
        for j in i..n {
            entries.push(json!([i + 1, j + 1, scalar_json(&b[[i, j]])]));
        }
    }
    json!({ "n": n, "bandwidth": n.saturating_sub(1), "entries": entries })
}

/// History dump: one `{"n", "b_nn", "last_col"}` record per step.
pub fn history_json<S: Scalar>(inv: &GrowingInverse<S>) -> Value {
    let records: Vec<Value> = (1..=inv.dim())
        .map(|n| {
            let last_col = inv
                .last_column(n)
                .map(|c| c.iter().map(scalar_json).collect::<Vec<_>>());
            json!({
                "n": n,
                "b_nn": scalar_json(&inv.diag_history()[n - 1]),
                "last_col": last_col,
            })
        })
        .collect();
    Value::Array(records)
}
