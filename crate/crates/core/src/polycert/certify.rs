//! Clear-denominator-and-check-signs certificates for the rational
//! inequalities behind the order-3 bounds.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::decay::{phi_reciprocal, psi, theta_factor};
use crate::error::{Error, Result};
use crate::gram::quadratic_entry;
use crate::knots::KnotSequence;
use crate::partition::from_gaps;
use crate::polycert::poly::{MultiPoly, TermBudget};
use crate::polycert::rational_fn::RationalFn;
use crate::polycert::symbolic::{SymbolicBuilder, Window};
use crate::polycert::CertStats;
use crate::scalar::{Rational, Scalar};

pub const DEFAULT_TERM_BUDGET: usize = 5_000_000;

/// Recorded in every certificate: inside `theta`, `b_nn` is replaced by its
/// upper bound `phi_n`.
pub const THETA_SUBSTITUTION: &str = "theta uses phi_n in place of b_nn";

/// The inequalities that can be certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    /// `a_{n,n+1} a_{n-1,n} - 2 a_{n,n} a_{n-1,n+1} >= 0`.
    Offdiag,
    /// Inductive step of the diagonal bound `b_nn <= phi_n`.
    PhiStep,
    /// `(6/5)(20)_n/(30)_n - psi_n a_{n-1,n} >= 0`.
    PsiA,
    /// `87/100 - ((30)_n/(20)_n)((30)_{n+1}/(20)_{n+1}) theta_n theta_{n+1} >= 0`.
    ThetaProduct,
    /// `a_{n-1,n} a_{n-2,n-1} - a_{n-2,n} a_{n-1,n-1} >= 0`, the 2x2 minor
    /// making `theta` monotone in `b_nn`.
    ThetaMinor,
    /// `(32) - (21)(32)/(31) (1 + (32)/(6 (31))) >= 0`.
    PsiFromPhi,
}

impl Inequality {
    /// The five headline certificates.
    pub const ALL: [Inequality; 5] = [
        Inequality::Offdiag,
        Inequality::PhiStep,
        Inequality::PsiA,
        Inequality::ThetaProduct,
        Inequality::PsiFromPhi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Inequality::Offdiag => "offdiag",
            Inequality::PhiStep => "phi_step",
            Inequality::PsiA => "psi_a",
            Inequality::ThetaProduct => "theta_product",
            Inequality::ThetaMinor => "theta_minor",
            Inequality::PsiFromPhi => "psi_from_phi",
        }
    }

    /// Gap window: number of variables and offset of `x[1]`.
    pub fn window(self) -> Window {
        match self {
            Inequality::Offdiag => Window::new(5, -1),
            Inequality::PhiStep => Window::new(6, -2),
            Inequality::PsiA => Window::new(4, -1),
            Inequality::ThetaProduct => Window::new(6, -2),
            Inequality::ThetaMinor => Window::new(5, -2),
            Inequality::PsiFromPhi => Window::new(2, 1),
        }
    }

    /// Reference denominator factors `(coefficients of a linear form, power)`
    /// where one is stated for the cleared form.
    fn reference_denominator(self) -> Option<Vec<(Vec<i64>, u32)>> {
        match self {
            Inequality::Offdiag => Some(vec![
                (vec![1, 1, 0, 0, 0], 1),
                (vec![0, 1, 1, 0, 0], 2),
                (vec![0, 0, 1, 1, 0], 2),
                (vec![0, 0, 0, 1, 1], 1),
            ]),
            Inequality::PhiStep => Some(vec![
                (vec![1, 1, 0, 0, 0, 0], 4),
                (vec![0, 1, 1, 0, 0, 0], 5),
                (vec![0, 0, 1, 1, 0, 0], 8),
                (vec![0, 0, 0, 1, 1, 0], 5),
                (vec![0, 0, 0, 0, 1, 1], 2),
            ]),
            Inequality::PsiA => Some(vec![
                (vec![1, 1, 0, 0], 1),
                (vec![0, 1, 1, 0], 1),
                (vec![0, 0, 1, 1], 1),
                (vec![0, 1, 1, 1], 1),
                (vec![0, 4, 3, 6], 1),
            ]),
            _ => None,
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Inequality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Inequality::Offdiag,
            Inequality::PhiStep,
            Inequality::PsiA,
            Inequality::ThetaProduct,
            Inequality::ThetaMinor,
            Inequality::PsiFromPhi,
        ]
        .into_iter()
        .find(|w| w.name() == s)
        .ok_or_else(|| Error::input(format!("unknown certificate {s:?}")))
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Witness {
    pub monomial: Vec<u32>,
    #[serde(serialize_with = "crate::scalar::serialize_scalar")]
    pub coeff: Rational,
    /// `"num"` or `"den"`.
    pub part: &'static str,
}

/// How the cleared denominator compares with a stated reference product.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DenominatorComparison {
    /// Equal to the reference up to a positive scalar.
    pub proportional: bool,
    /// Divides a positive multiple of the reference.
    pub divides: bool,
    /// Factors not present in the reference, as text.
    pub extra_factors: Vec<String>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SpotCheck {
    pub samples: usize,
    /// Smallest `(rhs - lhs) / max(|lhs|, |rhs|)` seen on the numeric path.
    pub min_relative_margin: f64,
    /// Largest disagreement between the symbolic and numeric values,
    /// relative to `max(|lhs|, |rhs|)`.
    pub max_discrepancy: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Certificate {
    pub name: String,
    pub success: bool,
    pub den_coeffs_nonneg: bool,
    pub num_coeffs_nonneg: bool,
    pub num_terms: usize,
    pub den_terms: usize,
    pub max_total_degree: u32,
    pub witness: Option<Witness>,
    /// Cleared denominator as a list of `(factor, power)`.
    pub den_factors: Vec<(String, u32)>,
    /// Denominator factor powers removed by exact division.
    pub cancelled_factors: usize,
    pub reference_denominator: Option<DenominatorComparison>,
    pub spot_check: Option<SpotCheck>,
    pub auxiliary: Vec<Certificate>,
    pub notes: Vec<String>,
    pub peak_terms: usize,
    pub seconds: f64,
}

impl Certificate {
    pub fn stats(&self) -> CertStats {
        CertStats {
            name: self.name.clone(),
            num_terms: self.num_terms,
            den_terms: self.den_terms,
            max_total_degree: self.max_total_degree,
            peak_terms: self.peak_terms,
        }
    }

    /// Output record: the summary fields plus diagnostics.
    pub fn to_json(&self) -> Value {
        let witness = self.witness.as_ref().map(
            |w| json!({"monomial": w.monomial, "coeff": w.coeff.to_exact_string(), "part": w.part}),
        );
        json!({
            "name": self.name,
            "success": self.success,
            "den_terms": self.den_terms,
            "num_terms": self.num_terms,
            "max_total_degree": self.max_total_degree,
            "witness": witness,
            "den_coeffs_nonneg": self.den_coeffs_nonneg,
            "num_coeffs_nonneg": self.num_coeffs_nonneg,
            "den_factors": self.den_factors,
            "cancelled_factors": self.cancelled_factors,
            "reference_denominator": self.reference_denominator,
            "spot_check": self.spot_check,
            "auxiliary": self.auxiliary.iter().map(Certificate::to_json).collect::<Vec<_>>(),
            "notes": self.notes,
            "peak_terms": self.peak_terms,
            "seconds": self.seconds,
        })
    }
}

fn with_name(err: Error, name: &str, peak: usize) -> Error {
    match err {
        Error::TermBudget {
            budget, partial, ..
        } => Error::TermBudget {
            name: name.to_string(),
            budget,
            partial: Box::new(CertStats {
                name: name.to_string(),
                peak_terms: partial.peak_terms.max(peak),
                ..*partial
            }),
        },
        other => other,
    }
}

/// Expands numerator and denominator of `p` and checks every coefficient
/// sign. Success implies `p >= 0` on the open positive orthant; failure
/// proves nothing.
pub fn certify_nonneg(name: &str, p: &RationalFn, budget: &TermBudget) -> Result<Certificate> {
    let start = Instant::now();
    let run = || -> Result<Certificate> {
        let mut p = p.clone();
        let cancelled = p.cancel_by_division(budget)?;
        let (num, den) = p.expand_parts(budget)?;
        let num_ok = num.coefficients_nonneg();
        let den_ok = !den.is_zero() && den.coefficients_nonneg();
        let witness = num
            .first_negative()
            .map(|(monomial, coeff)| Witness {
                monomial,
                coeff,
                part: "num",
            })
            .or_else(|| {
                den.first_negative().map(|(monomial, coeff)| Witness {
                    monomial,
                    coeff,
                    part: "den",
                })
            });
        Ok(Certificate {
            name: name.to_string(),
            success: num_ok && den_ok,
            den_coeffs_nonneg: den_ok,
            num_coeffs_nonneg: num_ok,
            num_terms: num.len(),
            den_terms: den.len(),
            max_total_degree: num.total_degree().max(den.total_degree()),
            witness,
            den_factors: p
                .denominator_factors()
                .iter()
                .map(|(f, e)| (f.to_string(), *e))
                .collect(),
            cancelled_factors: cancelled,
            reference_denominator: None,
            spot_check: None,
            auxiliary: Vec::new(),
            notes: Vec::new(),
            peak_terms: budget.peak(),
            seconds: 0.0,
        })
    };
    let mut cert = run().map_err(|e| with_name(e, name, budget.peak()))?;
    cert.seconds = start.elapsed().as_secs_f64();
    Ok(cert)
}

/// The inequality as a rational function that must be nonnegative.
pub fn inequality_function(which: Inequality, budget: &TermBudget) -> Result<RationalFn> {
    let b = SymbolicBuilder::new(which.window(), budget);
    let a = |i, j| b.gram_entry(i, j);
    match which {
        Inequality::Offdiag => b.sub(
            &a(0, 1)?.mul(&a(-1, 0)?),
            &a(0, 0)?.mul(&a(-1, 1)?).scale(&q(2, 1)),
        ),
        Inequality::PhiStep => {
            let (phi0, phim) = (b.phi(0)?, b.phi(-1)?);
            let ratio = a(-1, 1)?.div(&a(-1, 0)?)?;
            let inner = b.sub(&a(0, 1)?, &a(0, 0)?.mul(&ratio).scale(&q(2, 1)))?;
            let tail = b.add(&b.constant(1, 1), &phi0.mul(&phim).mul(&a(-1, 0)?.powi(2)?))?;
            let x = b.sum(&[
                a(1, 1)?,
                phi0.mul(&a(0, 1)?).mul(&inner).neg(),
                a(0, 1)?.mul(&ratio).scale(&q(-2, 1)),
                a(-1, 1)?.powi(2)?.mul(&phim).mul(&tail).neg(),
            ])?;
            let diff = b.sub(&x, &b.phi_recip(1)?)?;
            Ok(b.phi_recip(0)?
                .mul(&b.phi_recip(-1)?)
                .mul(&a(-1, 0)?)
                .mul(&diff))
        }
        Inequality::PsiA => {
            let lead = b
                .bracket(2, 0, 0)?
                .div(&b.bracket(3, 0, 0)?)?
                .scale(&q(6, 5));
            b.sub(&lead, &b.psi(0)?.mul(&a(-1, 0)?))
        }
        Inequality::ThetaProduct => {
            let weight =
                |d| -> Result<RationalFn> { b.bracket(3, 0, d)?.div(&b.bracket(2, 0, d)?) };
            let prod = weight(0)?
                .mul(&weight(1)?)
                .mul(&b.theta_hat(0)?)
                .mul(&b.theta_hat(1)?);
            b.sub(&b.constant(87, 100), &prod)
        }
        Inequality::ThetaMinor => b.sub(&a(-1, 0)?.mul(&a(-2, -1)?), &a(-2, 0)?.mul(&a(-1, -1)?)),
        Inequality::PsiFromPhi => {
            let (u, w, s) = (
                b.bracket(2, 1, 0)?,
                b.bracket(3, 2, 0)?,
                b.bracket(3, 1, 0)?,
            );
            let tail = b.add(&b.constant(1, 1), &w.div(&s)?.scale(&q(1, 6)))?;
            b.sub(&w, &u.mul(&w).div(&s)?.mul(&tail))
        }
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn compare_denominator(p: &RationalFn, reference: &[(Vec<i64>, u32)]) -> DenominatorComparison {
    let nvars = p.nvars();
    let linear = |coeffs: &[i64]| {
        MultiPoly::from_terms(
            nvars,
            coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0)
                .map(|(i, c)| {
                    let mut e = vec![0; nvars];
                    e[i] = 1;
                    (e, Rational::from_integer((*c).into()))
                }),
        )
    };
    let reference: Vec<(MultiPoly, u32)> = reference
        .iter()
        .map(|(c, e)| (linear(c).primitive().1, *e))
        .collect();
    let ours = p.denominator_factors();
    let mut extra = Vec::new();
    let mut divides = true;
    let mut proportional = ours.len() == reference.len();
    for (f, e) in &ours {
        match reference.iter().find(|(r, _)| r == f) {
            Some((_, re)) => {
                divides &= e <= re;
                proportional &= e == re;
            }
            None => {
                divides = false;
                proportional = false;
                extra.push(format!("({f})^{e}"));
            }
        }
    }
    DenominatorComparison {
        proportional,
        divides,
        extra_factors: extra,
    }
}

/// Builds and certifies one inequality. `theta_product` also certifies the
/// 2x2 minor that licenses replacing `b_nn` by `phi_n`, and succeeds only if
/// both do.
pub fn certify_inequality(which: Inequality, budget_limit: usize) -> Result<Certificate> {
    let start = Instant::now();
    let budget = TermBudget::new(budget_limit);
    let p = inequality_function(which, &budget)
        .map_err(|e| with_name(e, which.name(), budget.peak()))?;
    let mut cert = certify_nonneg(which.name(), &p, &budget)?;
    if let Some(reference) = which.reference_denominator() {
        let mut reduced = p.clone();
        reduced.cancel_by_division(&budget)?;
        cert.reference_denominator = Some(compare_denominator(&reduced, &reference));
    }
    if which == Inequality::ThetaProduct {
        cert.notes.push(THETA_SUBSTITUTION.to_string());
        let minor = certify_inequality(Inequality::ThetaMinor, budget_limit)?;
        cert.success &= minor.success;
        cert.auxiliary.push(minor);
    }
    cert.seconds = start.elapsed().as_secs_f64();
    Ok(cert)
}

/// `(lhs, rhs)` of the inequality `lhs <= rhs` on a concrete order-3 knot
/// sequence at index `n`, computed from the Gram and bound-function modules.
pub fn numeric_sides<S: Scalar>(
    which: Inequality,
    ks: &KnotSequence<S>,
    n: usize,
) -> Result<(S, S)> {
    let a = |i: usize, j: usize| quadratic_entry(ks, i, j);
    let br = |l: i64, p: i64, j: usize| ks.bracket(l, p, j as i64);
    let phi_r = |j: usize| phi_reciprocal(ks, j);
    Ok(match which {
        Inequality::Offdiag => (
            S::from_int(2) * a(n, n) * a(n - 1, n + 1),
            a(n, n + 1) * a(n - 1, n),
        ),
        Inequality::PhiStep => {
            let (p0, pm) = (phi_r(n)?.recip(), phi_r(n - 1)?.recip());
            let ratio = a(n - 1, n + 1) / a(n - 1, n);
            let x = a(n + 1, n + 1)
                - p0.clone()
                    * a(n, n + 1)
                    * (a(n, n + 1) - S::from_int(2) * a(n, n) * ratio.clone())
                - S::from_int(2) * a(n, n + 1) * ratio
                - a(n - 1, n + 1).square()
                    * pm.clone()
                    * (S::one() + p0 * pm * a(n - 1, n).square());
            let pref = phi_r(n)? * phi_r(n - 1)? * a(n - 1, n);
            (pref.clone() * phi_r(n + 1)?, pref * x)
        }
        Inequality::PsiA => (
            psi(ks, n)? * a(n - 1, n),
            S::from_ratio(6, 5) * br(2, 0, n) / br(3, 0, n),
        ),
        Inequality::ThetaProduct => {
            let hat = |j: usize| -> Result<S> { Ok(phi_r(j)?.recip() * theta_factor(ks, j)?) };
            let w = |j: usize| br(3, 0, j) / br(2, 0, j);
            (
                w(n) * w(n + 1) * hat(n)? * hat(n + 1)?,
                S::from_ratio(87, 100),
            )
        }
        Inequality::ThetaMinor => (a(n - 2, n) * a(n - 1, n - 1), a(n - 1, n) * a(n - 2, n - 1)),
        Inequality::PsiFromPhi => {
            let (u, w, s) = (br(2, 1, n), br(3, 2, n), br(3, 1, n));
            (
                u * w.clone() / s.clone() * (S::one() + w.clone() / (S::from_int(6) * s)),
                w,
            )
        }
    })
}

const PADDING: usize = 4;

/// Order-3 knot sequence whose gaps around index `n` are `window_gaps`, with
/// `PADDING` unit gaps on each side, and the reference index `n`.
pub fn embed_window<S: Scalar>(
    window: &Window,
    window_gaps: &[S],
) -> Result<(KnotSequence<S>, usize)> {
    assert_eq!(window_gaps.len(), window.nvars);
    let mut gaps = vec![S::one(); PADDING];
    gaps.extend_from_slice(window_gaps);
    gaps.extend(std::iter::repeat_n(S::one(), PADDING));
    let ks = from_gaps(3, &gaps)?;
    // Breakpoint gap number g (0-based) is t_{g+4} - t_{g+3}.
    let n = (3 + PADDING as i64 - window.offset) as usize;
    Ok((ks, n))
}

fn window_values<S: Scalar>(ks: &KnotSequence<S>, window: &Window) -> Vec<S> {
    ks.breakpoint_gaps()[PADDING..PADDING + window.nvars].to_vec()
}

/// Evaluates `p` and the independent numeric path at random positive gap
/// vectors. Gaps are exponential draws, occasionally shrunk by `10^-3`.
pub fn spot_check(
    which: Inequality,
    p: &RationalFn,
    samples: usize,
    seed: u64,
) -> Result<SpotCheck> {
    let window = which.window();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SpotCheck {
        samples,
        min_relative_margin: f64::INFINITY,
        max_discrepancy: 0.0,
        pass: true,
    };
    for _ in 0..samples {
        let gaps: Vec<f64> = (0..window.nvars)
            .map(|_| {
                let u: f64 = rng.gen_range(f64::EPSILON..1.0);
                let g = -u.ln();
                if rng.gen_bool(0.1) {
                    g * 1e-3
                } else {
                    g
                }
            })
            .collect();
        let (ks, n) = embed_window(&window, &gaps)?;
        let (lhs, rhs) = numeric_sides(which, &ks, n)?;
        let scale = lhs.abs().max(rhs.abs());
        let sym = p.eval_f64(&window_values(&ks, &window));
        let margin = (rhs - lhs) / scale;
        let discrepancy = (sym - (rhs - lhs)).abs() / scale;
        report.min_relative_margin = report.min_relative_margin.min(margin);
        report.max_discrepancy = report.max_discrepancy.max(discrepancy);
        if !(margin >= -1e-10 && discrepancy <= 1e-8) {
            report.pass = false;
        }
    }
    Ok(report)
}

/// Certificate plus a numeric spot check of its conclusion.
pub fn certify_with_spot_check(
    which: Inequality,
    budget_limit: usize,
    samples: usize,
    seed: u64,
) -> Result<Certificate> {
    let mut cert = certify_inequality(which, budget_limit)?;
    let budget = TermBudget::new(budget_limit);
    let p = inequality_function(which, &budget)?;
    cert.spot_check = Some(spot_check(which, &p, samples, seed)?);
    for aux in &mut cert.auxiliary {
        if let Ok(w) = aux.name.parse::<Inequality>() {
            let p = inequality_function(w, &budget)?;
            aux.spot_check = Some(spot_check(w, &p, samples, seed)?);
        }
    }
    Ok(cert)
}

/// Exact value of `p` at the window gaps of a rational knot sequence.
pub fn eval_on_knots(
    which: Inequality,
    p: &RationalFn,
    ks: &KnotSequence<Rational>,
) -> Option<Rational> {
    p.eval(&window_values(ks, &which.window()))
}
