//! Geometric decay bounds `|b_{i,j}| <= K gamma^{|i-j|} / eta_{ij}` for inverse
//! B-spline Gram matrices, with the explicit constants for orders 2 and 3.
//!
//! For order 3 the decay rate `gamma = (87/100)^{1/2}` is irrational, so every
//! bound is compared in squared form: `(|b| eta)^2 <= K^2 gamma^{2d}`. Both
//! sides are rational in exact mode and the comparison never rounds.

use ndarray::Array2;
use num_traits::One;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gram::{bracket_ratio, quadratic_entry};
use crate::invstep::GrowingInverse;
use crate::knots::KnotSequence;
use crate::report::LemmaCheck;
use crate::scalar::{Rational, Scalar};

/// Certified decay constants for one spline order.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayConstants {
    pub order: usize,
    /// `K` in the full-matrix bound.
    pub k_const: Rational,
    /// `gamma^2`.
    pub gamma_sq: Rational,
    /// Constant of the last-column bound `|b_{j,n}^n| <= C gamma^{n-j} / eta_{jn}`.
    pub last_column: Rational,
    pub provenance: &'static str,
}

pub fn decay_constants(order: usize) -> Result<DecayConstants> {
    let q = |n: i64, d: i64| Rational::from_ratio(n, d);
    match order {
        2 => Ok(DecayConstants {
            order,
            k_const: q(36, 5),
            gamma_sq: q(4, 9),
            last_column: q(4, 1),
            provenance: "K = 4 (1 + (4/9) / (1 - q^2)) = 36/5, q = 2/3",
        }),
        3 => {
            let gamma_sq = q(87, 100);
            let c = q(12, 1) / gamma_sq.clone() * q(6, 5).square();
            let k_const = c.clone()
                * (Rational::one() + q(12, 75) * c.clone() / (Rational::one() - gamma_sq.clone()));
            Ok(DecayConstants {
                order,
                k_const,
                gamma_sq,
                last_column: c,
                provenance: "C = 12 q^-2 (6/5)^2, K = C (1 + (12/75) C / (1 - q^2)), q^2 = 87/100",
            })
        }
        _ => Err(Error::input(format!(
            "no certified decay constants for order {order} (only 2 and 3)"
        ))),
    }
}

impl DecayConstants {
    pub fn gamma(&self) -> f64 {
        self.gamma_sq.to_f64().sqrt()
    }

    /// `K^2 gamma^{2d}` for `d = 0..len`, in the working scalar.
    fn squared_envelope<S: Scalar>(constant: &Rational, gamma_sq: &Rational, len: usize) -> Vec<S> {
        let mut out = Vec::with_capacity(len);
        let mut cur = constant.square();
        for _ in 0..len {
            out.push(S::from_rational(&cur));
            cur *= gamma_sq.clone();
        }
        out
    }
}

/// Result of comparing every inverse entry against the decay envelope.
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub k: usize,
    pub m: usize,
    /// `max |b_{i,j}| eta_{ij} / (K gamma^{|i-j|})`.
    pub worst_ratio: f64,
    /// 1-based position of the worst ratio.
    pub worst_entry: (usize, usize),
    pub per_diagonal_max: Vec<f64>,
    pub pass: bool,
}

/// Checks `|b_{i,j}| eta_{ij} <= K gamma^{|i-j|}` on the full inverse.
pub fn decay_report<S: Scalar>(
    b: &Array2<S>,
    ks: &KnotSequence<S>,
    consts: &DecayConstants,
) -> Result<DecayReport> {
    let m = ks.dim();
    if b.dim() != (m, m) {
        return Err(Error::input(format!(
            "inverse is {}x{} but the knot sequence has {m} splines",
            b.nrows(),
            b.ncols()
        )));
    }
    let envelope: Vec<S> = DecayConstants::squared_envelope(&consts.k_const, &consts.gamma_sq, m);
    let mut report = DecayReport {
        k: ks.order(),
        m,
        worst_ratio: 0.0,
        worst_entry: (1, 1),
        per_diagonal_max: vec![0.0; m],
        pass: true,
    };
    let mut worst_sq: Option<S> = None;
    for i in 0..m {
        for j in 0..m {
            let d = i.abs_diff(j);
            let scaled = (b[[i, j]].abs() * ks.eta_unchecked(i + 1, j + 1)).square();
            let ratio_sq = scaled / envelope[d].clone();
            if !crate::scalar::le_with_slack(&ratio_sq, &S::one()) {
                report.pass = false;
            }
            let ratio = ratio_sq.to_f64().sqrt();
            if ratio > report.per_diagonal_max[d] {
                report.per_diagonal_max[d] = ratio;
            }
            if worst_sq.as_ref().is_none_or(|w| ratio_sq > *w) {
                report.worst_entry = (i + 1, j + 1);
                worst_sq = Some(ratio_sq);
            }
        }
    }
    report.worst_ratio = worst_sq.map_or(0.0, |w| w.to_f64().sqrt());
    Ok(report)
}

/// Empirical decay envelope for orders without certified constants.
#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalFit {
    pub gamma: f64,
    pub k_const: f64,
    pub diagonals_used: usize,
}

/// Fits `max_{|i-j|=d} |b_{i,j}| eta_{ij} ~ K gamma^d` by least squares on the
/// logarithms, then raises `K` until the fit envelopes every diagonal.
pub fn empirical_decay_fit<S: Scalar>(b: &Array2<S>, ks: &KnotSequence<S>) -> Option<EmpiricalFit> {
    let m = ks.dim();
    let mut per_diag = vec![0.0_f64; m];
    for i in 0..m {
        for j in 0..m {
            let v = (b[[i, j]].abs() * ks.eta_unchecked(i + 1, j + 1)).to_f64();
            let d = i.abs_diff(j);
            per_diag[d] = per_diag[d].max(v);
        }
    }
    let points: Vec<(f64, f64)> = per_diag
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > f64::MIN_POSITIVE)
        .map(|(d, v)| (d as f64, v.ln()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let gamma = (sxy / sxx).exp();
    let k_const = points
        .iter()
        .map(|(d, ly)| (ly - d * gamma.ln()).exp())
        .fold(0.0, f64::max);
    Some(EmpiricalFit {
        gamma,
        k_const,
        diagonals_used: points.len(),
    })
}

/// Values of the order-3 bound functions at index `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundFunctions<S> {
    pub phi: S,
    pub psi: S,
    /// Only defined for `n >= 3`.
    pub theta: Option<S>,
}

fn require_quadratic<S: Scalar>(ks: &KnotSequence<S>, n: usize) -> Result<()> {
    if ks.order() != 3 {
        return Err(Error::input("bound functions are defined for order 3"));
    }
    if n == 0 || n > ks.dim() {
        return Err(Error::input(format!("index {n} outside 1..={}", ks.dim())));
    }
    Ok(())
}

/// `1 / phi_n`, the sharp upper bound for `b_{n,n}^n` inverted, with the
/// clamped-end `0/0` ratios resolved to zero.
pub fn phi_reciprocal<S: Scalar>(ks: &KnotSequence<S>, n: usize) -> Result<S> {
    require_quadratic(ks, n)?;
    let b = |ell: i64, en: i64| ks.bracket(ell, en, n as i64);
    let c = |p: i64, d: i64| S::from_ratio(p, d);
    let (a10, a21, a32, a31, a20) = (b(1, 0), b(2, 1), b(3, 2), b(3, 1), b(2, 0));
    let (z, y) = (b(0, -1), b(1, -1));
    Ok(bracket_ratio(c(1, 9), std::slice::from_ref(&a10), &[])
        + bracket_ratio(c(1, 12), std::slice::from_ref(&a21), &[])
        + bracket_ratio(c(1, 5), std::slice::from_ref(&a32), &[])
        - bracket_ratio(
            c(1, 30),
            &[a21.clone(), a32.clone()],
            std::slice::from_ref(&a31),
        )
        - bracket_ratio(
            c(1, 180),
            &[a21.clone(), a32.clone(), a32.clone()],
            &[a31.clone(), a31.clone()],
        )
        + bracket_ratio(c(2, 27), &[a10.clone(), a21, a32], &[a31, a20])
        + bracket_ratio(
            c(5, 108),
            &[z.clone(), a10.clone()],
            std::slice::from_ref(&y),
        )
        + bracket_ratio(c(2, 73), &[z.clone(), z, a10], &[y.clone(), y]))
}

/// `phi_n`.
pub fn phi<S: Scalar>(ks: &KnotSequence<S>, n: usize) -> Result<S> {
    Ok(phi_reciprocal(ks, n)?.recip())
}

/// `psi_n = ((10)/9 + (21)/12 + (32)/6)^{-1}`.
pub fn psi<S: Scalar>(ks: &KnotSequence<S>, n: usize) -> Result<S> {
    require_quadratic(ks, n)?;
    let b = |ell: i64, en: i64| ks.bracket(ell, en, n as i64);
    let r = b(1, 0) / S::from_int(9) + b(2, 1) / S::from_int(12) + b(3, 2) / S::from_int(6);
    Ok(r.recip())
}

/// Propagation factor `a_{n-1,n} - a_{n-2,n} a_{n-1,n-1} / a_{n-2,n-1}`.
pub fn theta_factor<S: Scalar>(ks: &KnotSequence<S>, n: usize) -> Result<S> {
    require_quadratic(ks, n)?;
    if n < 3 {
        return Err(Error::input(format!("theta needs n >= 3, got {n}")));
    }
    let a = |i: usize, j: usize| quadratic_entry(ks, i, j);
    Ok(a(n - 1, n) - a(n - 2, n) * a(n - 1, n - 1) / a(n - 2, n - 1))
}

/// `theta_n = b_nn * (a_{n-1,n} - a_{n-2,n} a_{n-1,n-1} / a_{n-2,n-1})`.
pub fn theta<S: Scalar>(ks: &KnotSequence<S>, n: usize, b_nn: &S) -> Result<S> {
    Ok(b_nn.clone() * theta_factor(ks, n)?)
}

pub fn bound_functions<S: Scalar>(
    ks: &KnotSequence<S>,
    n: usize,
    b_nn: &S,
) -> Result<BoundFunctions<S>> {
    Ok(BoundFunctions {
        phi: phi(ks, n)?,
        psi: psi(ks, n)?,
        theta: if n >= 3 {
            Some(theta(ks, n, b_nn)?)
        } else {
            None
        },
    })
}

fn require_history<S: Scalar>(ks: &KnotSequence<S>, inv: &GrowingInverse<S>) -> Result<()> {
    if !inv.has_history() {
        return Err(Error::input("lemma checks need the inverse history"));
    }
    if inv.dim() != ks.dim() {
        return Err(Error::input("inverse and knot sequence dimensions differ"));
    }
    Ok(())
}

/// Squared geometric bound `(|x| eta)^2 <= C^2 gamma^{2d}` recorded into `check`.
fn record_geometric<S: Scalar>(
    check: &mut LemmaCheck,
    value: &S,
    eta: &S,
    envelope_sq: &S,
    at: &[usize],
) {
    let lhs = (value.abs() * eta.clone()).square();
    check.record_squared(&lhs, envelope_sq, at);
}

fn full_matrix_check<S: Scalar>(
    name: &str,
    ks: &KnotSequence<S>,
    inv: &GrowingInverse<S>,
    consts: &DecayConstants,
) -> LemmaCheck {
    let m = ks.dim();
    let envelope: Vec<S> = DecayConstants::squared_envelope(&consts.k_const, &consts.gamma_sq, m);
    let mut check = LemmaCheck::new(name);
    for i in 1..=m {
        for j in i..=m {
            record_geometric(
                &mut check,
                inv.get(i - 1, j - 1),
                &ks.eta_unchecked(i, j),
                &envelope[j - i],
                &[i, j],
            );
        }
    }
    check
}

/// Diagonal sandwich, last-column decay and full-matrix decay for
/// piecewise linear splines.
pub fn verify_linear_lemmas<S: Scalar>(
    ks: &KnotSequence<S>,
    inv: &GrowingInverse<S>,
) -> Result<Vec<LemmaCheck>> {
    if ks.order() != 2 {
        return Err(Error::input("linear lemma checks need order 2"));
    }
    require_history(ks, inv)?;
    let consts = decay_constants(2)?;
    let m = ks.dim();
    let mut lower = LemmaCheck::new("diagonal lower bound 3/(20)");
    let mut middle = LemmaCheck::new("diagonal upper bound 3/(3/4 (10) + (21))");
    let mut upper = LemmaCheck::new("diagonal chain 3/(3/4 (10) + (21)) <= 4/(20)");
    let mut last_col = LemmaCheck::new("last column decay 4 (2/3)^(n-j)");
    let envelope: Vec<S> =
        DecayConstants::squared_envelope(&consts.last_column, &consts.gamma_sq, m);
    for n in 1..=m {
        let j = n as i64;
        let b20 = ks.bracket(2, 0, j);
        let b10 = ks.bracket(1, 0, j);
        let b21 = ks.bracket(2, 1, j);
        let bnn = inv.diag_history()[n - 1].clone();
        let three = S::from_int(3);
        let mid = three.clone() / (S::from_ratio(3, 4) * b10 + b21);
        lower.record(&(three / b20.clone()), &bnn, &[n]);
        middle.record(&bnn, &mid, &[n]);
        upper.record(&mid, &(S::from_int(4) / b20), &[n]);
        let col = inv.last_column(n).expect("history");
        for (jj, value) in col.iter().enumerate() {
            record_geometric(
                &mut last_col,
                value,
                &ks.eta_unchecked(jj + 1, n),
                &envelope[n - jj - 1],
                &[jj + 1, n],
            );
        }
    }
    let full = full_matrix_check("full matrix decay (36/5)(2/3)^|i-j|", ks, inv, &consts);
    Ok(vec![lower, middle, upper, last_col, full])
}

/// Diagonal bounds, propagation bounds, last-column and full-matrix decay for
/// quadratic splines.
pub fn verify_quadratic_lemmas<S: Scalar>(
    ks: &KnotSequence<S>,
    inv: &GrowingInverse<S>,
) -> Result<Vec<LemmaCheck>> {
    if ks.order() != 3 {
        return Err(Error::input("quadratic lemma checks need order 3"));
    }
    require_history(ks, inv)?;
    let consts = decay_constants(3)?;
    let m = ks.dim();
    let a = |i: usize, j: usize| quadratic_entry(ks, i, j);
    let ratio20_30 = |n: usize| ks.bracket(2, 0, n as i64) / ks.bracket(3, 0, n as i64);

    let mut b_le_phi = LemmaCheck::new("b_nn <= phi_n");
    let mut phi_le_psi = LemmaCheck::new("phi_n <= psi_n");
    let mut psi_le = LemmaCheck::new("psi_n <= 12/(30)_n");
    let mut b_times_a = LemmaCheck::new("b_nn a_{n-1,n} <= (6/5)(20)/(30)");
    let mut theta_pair = LemmaCheck::new("theta_n theta_{n+1} <= (87/100)(20)(20)/((30)(30))");
    let mut theta_monotone = LemmaCheck::new("theta factor nonnegative");
    let mut last_col = LemmaCheck::new("last column decay C q^(n-j)");

    let envelope: Vec<S> =
        DecayConstants::squared_envelope(&consts.last_column, &consts.gamma_sq, m);
    let mut thetas: Vec<Option<S>> = vec![None; m + 1];
    for n in 1..=m {
        let bnn = inv.diag_history()[n - 1].clone();
        let phi_n = phi(ks, n)?;
        let psi_n = psi(ks, n)?;
        b_le_phi.record(&bnn, &phi_n, &[n]);
        phi_le_psi.record(&phi_n, &psi_n, &[n]);
        psi_le.record(
            &psi_n,
            &(S::from_int(12) / ks.bracket(3, 0, n as i64)),
            &[n],
        );
        if n >= 2 {
            b_times_a.record(
                &(bnn.clone() * a(n - 1, n)),
                &(S::from_ratio(6, 5) * ratio20_30(n)),
                &[n],
            );
        }
        if n >= 3 {
            let factor = theta_factor(ks, n)?;
            // Factor >= 0 makes theta monotone in b_nn, so bounding b_nn by
            // phi_n bounds theta_n.
            theta_monotone.record(
                &(a(n - 2, n) * a(n - 1, n - 1)),
                &(a(n - 1, n) * a(n - 2, n - 1)),
                &[n],
            );
            thetas[n] = Some(bnn.clone() * factor);
        }
        let col = inv.last_column(n).expect("history");
        for (jj, value) in col.iter().enumerate() {
            record_geometric(
                &mut last_col,
                value,
                &ks.eta_unchecked(jj + 1, n),
                &envelope[n - jj - 1],
                &[jj + 1, n],
            );
        }
    }
    for n in 3..m {
        if let (Some(t0), Some(t1)) = (&thetas[n], &thetas[n + 1]) {
            let bound = S::from_ratio(87, 100) * ratio20_30(n) * ratio20_30(n + 1);
            theta_pair.record(&(t0.clone() * t1.clone()), &bound, &[n]);
        }
    }
    let full = full_matrix_check("full matrix decay C_1 q^|i-j|", ks, inv, &consts);
    Ok(vec![
        b_le_phi,
        phi_le_psi,
        psi_le,
        b_times_a,
        theta_monotone,
        theta_pair,
        last_col,
        full,
    ])
}

/// Report JSON for one instance.
pub fn report_json(
    report: &DecayReport,
    consts: Option<&DecayConstants>,
    checks: &[LemmaCheck],
) -> Value {
    json!({
        "k": report.k,
        "m": report.m,
        "K": consts.map(|c| c.k_const.to_exact_string()),
        "gamma_sq": consts.map(|c| c.gamma_sq.to_exact_string()),
        "worst_ratio": report.worst_ratio,
        "worst_entry": [report.worst_entry.0, report.worst_entry.1],
        "pass": report.pass,
        "lemma_checks": checks
            .iter()
            .map(|c| json!({"name": c.name, "pass": c.pass, "worst_slack": c.worst_slack}))
            .collect::<Vec<_>>(),
    })
}

/// CSV rows `i,j,ratio` for every entry of the inverse.
pub fn ratio_csv<S: Scalar>(
    b: &Array2<S>,
    ks: &KnotSequence<S>,
    consts: &DecayConstants,
) -> String {
    let m = ks.dim();
    let k = consts.k_const.to_f64();
    let gamma = consts.gamma();
    let mut out = String::from("i,j,ratio\n");
    for i in 0..m {
        for j in 0..m {
            let d = i.abs_diff(j) as i32;
            let ratio = b[[i, j]].abs().to_f64() * ks.eta_unchecked(i + 1, j + 1).to_f64()
                / (k * gamma.powi(d));
            out.push_str(&format!("{},{},{ratio:e}\n", i + 1, j + 1));
        }
    }
    out
}

impl<S: Scalar> BoundFunctions<S> {
    pub fn is_ordered(&self) -> bool {
        self.phi <= self.psi && !self.phi.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{gram_linear, gram_quadratic};
    use crate::invstep::invert_iteratively;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn exact(order: usize, interior: &[(i64, i64)]) -> KnotSequence<Rational> {
        KnotSequence::new(order, interior.iter().map(|&(n, d)| q(n, d)).collect()).unwrap()
    }

    #[test]
    fn constants() {
        let c2 = decay_constants(2).unwrap();
        assert_eq!(c2.k_const, q(36, 5));
        assert_eq!(c2.gamma_sq, q(4, 9));
        let c3 = decay_constants(3).unwrap();
        assert_eq!(c3.last_column, q(576, 29));
        assert_eq!(c3.k_const, q(5525568, 10933));
        assert_eq!(c3.gamma_sq, q(87, 100));
        // K = C (1 + (16/13) C) after substituting 1 - q^2 = 13/100.
        let c = q(576, 29);
        assert_eq!(c3.k_const, c.clone() * (q(1, 1) + q(16, 13) * c));
        assert!(decay_constants(4).is_err());
        assert!((c3.k_const.to_f64() - 505.4).abs() < 0.05);
    }

    #[test]
    fn bernstein_linear_report() {
        let ks = exact(2, &[]);
        let a = gram_linear(&ks).unwrap();
        let inv = invert_iteratively(&a, true).unwrap();
        let report = decay_report(&inv.matrix(), &ks, &decay_constants(2).unwrap()).unwrap();
        assert!(report.pass);
        assert_eq!(report.worst_entry, (1, 1));
        assert!((report.worst_ratio - 5.0 / 9.0).abs() < 1e-15);
        assert!((report.per_diagonal_max[1] - 5.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn report_dimension_mismatch() {
        let ks = exact(2, &[(1, 2)]);
        let b = Array2::from_elem((2, 2), q(1, 1));
        assert!(decay_report(&b, &ks, &decay_constants(2).unwrap()).is_err());
    }

    #[test]
    fn linear_lemmas_examples() {
        let ks = exact(2, &[]);
        let inv = invert_iteratively(&gram_linear(&ks).unwrap(), true).unwrap();
        // n = 1 attains the lower bound with equality.
        assert_eq!(inv.diag_history()[0], q(3, 1));
        let checks = verify_linear_lemmas(&ks, &inv).unwrap();
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
        assert_eq!(checks[0].worst_slack, Some(0.0));

        let ks = exact(2, &[(1, 2)]);
        let inv = invert_iteratively(&gram_linear(&ks).unwrap(), true).unwrap();
        assert_eq!(inv.diag_history()[1], q(24, 7));
        assert_eq!(ks.bracket(2, 0, 2), q(1, 1));
        let checks = verify_linear_lemmas(&ks, &inv).unwrap();
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
    }

    #[test]
    fn bernstein_phi_base_case() {
        let ks = exact(3, &[]);
        assert_eq!(phi(&ks, 1).unwrap(), q(5, 1));
        let inv = invert_iteratively(&gram_quadratic(&ks).unwrap(), true).unwrap();
        assert_eq!(inv.diag_history()[0], phi(&ks, 1).unwrap());
    }

    #[test]
    fn second_base_case_matches_closed_form() {
        let ks = exact(3, &[(1, 6), (1, 2), (4, 5)]);
        let inv = invert_iteratively(&gram_quadratic(&ks).unwrap(), true).unwrap();
        let b = |ell: i64, en: i64| ks.bracket(ell, en, 2);
        let expected = (b(2, 1) / q(12, 1) + b(3, 2) / q(5, 1)
            - b(2, 1) * b(3, 2) / (q(30, 1) * b(3, 1)) * (q(1, 1) + b(3, 2) / (q(6, 1) * b(3, 1))))
        .recip();
        assert_eq!(inv.diag_history()[1], expected);
        assert_eq!(phi(&ks, 2).unwrap(), expected);
    }

    #[test]
    fn psi_uniform() {
        let interior: Vec<_> = (1..10).map(|s| (s, 10)).collect();
        let ks = exact(3, &interior);
        let h = q(1, 10);
        assert_eq!(psi(&ks, 5).unwrap(), q(36, 13) / h);
    }

    #[test]
    fn theta_needs_three() {
        let ks = exact(3, &[(1, 2)]);
        assert!(theta(&ks, 2, &q(1, 1)).is_err());
        let bf = bound_functions(&ks, 2, &q(1, 1)).unwrap();
        assert!(bf.theta.is_none());
        assert!(bf.is_ordered());
        assert!(phi(&exact(2, &[]), 1).is_err());
    }

    #[test]
    fn quadratic_lemmas_on_small_partition() {
        let ks = exact(
            3,
            &[(1, 9), (1, 5), (1, 3), (1, 2), (5, 7), (6, 7), (19, 20)],
        );
        let inv = invert_iteratively(&gram_quadratic(&ks).unwrap(), true).unwrap();
        let checks = verify_quadratic_lemmas(&ks, &inv).unwrap();
        for c in &checks {
            assert!(c.pass, "{c:?}");
            assert!(c.checked > 0, "{c:?}");
        }
    }

    #[test]
    fn empirical_fit_on_quartic() {
        let ks = KnotSequence::new(4, (1..20).map(|s| s as f64 / 20.0).collect()).unwrap();
        let a = crate::gram::gram_quadrature(&ks);
        let inv = invert_iteratively(&a, false).unwrap();
        let fit = empirical_decay_fit(&inv.matrix(), &ks).unwrap();
        assert!(fit.gamma > 0.0 && fit.gamma < 1.0, "{fit:?}");
        assert!(fit.k_const > 0.0);
    }

    #[test]
    fn csv_has_one_row_per_entry() {
        let ks = exact(2, &[(1, 3)]);
        let inv = invert_iteratively(&gram_linear(&ks).unwrap(), false).unwrap();
        let csv = ratio_csv(&inv.matrix(), &ks, &decay_constants(2).unwrap());
        assert_eq!(csv.lines().count(), 1 + 9);
    }
}
