//! Verification of every bound on one partition, and randomized sweeps that
//! merge many such runs.

use ndarray::Array2;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::decay::{
    decay_constants, decay_report, empirical_decay_fit, report_json, verify_linear_lemmas,
    verify_quadratic_lemmas, DecayReport, EmpiricalFit,
};
use crate::error::{Error, Result};
use crate::gram::{gram, gram_quadrature, SymBandedMatrix};
use crate::invstep::{
    check_bordered_inequalities, check_checkerboard, invert_iteratively, residual_max,
};
use crate::knots::KnotSequence;
use crate::partition::{from_gaps, random_gaps_exact, random_gaps_float, trial_rng};
use crate::report::{merge_checks, LemmaCheck};
use crate::scalar::{Rational, Scalar};

/// Largest dimension allowed in exact sweeps.
pub const EXACT_MAX_M: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMode {
    Exact,
    Float,
}

impl std::str::FromStr for ScalarMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(ScalarMode::Exact),
            "float" => Ok(ScalarMode::Float),
            _ => Err(Error::input(format!("unknown scalar mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub order: usize,
    pub trials: usize,
    pub max_m: usize,
    pub mode: ScalarMode,
    pub seed: u64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::input("order must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::input("at least one trial is required"));
        }
        if self.max_m < self.order {
            return Err(Error::input(format!(
                "max-m {} is below the order {}",
                self.max_m, self.order
            )));
        }
        if self.mode == ScalarMode::Exact && self.max_m > EXACT_MAX_M {
            return Err(Error::input(format!(
                "exact sweeps are capped at m = {EXACT_MAX_M}"
            )));
        }
        Ok(())
    }
}

/// Everything checked on one partition.
#[derive(Debug, Clone, Serialize)]
pub struct InstanceReport {
    pub k: usize,
    pub m: usize,
    /// Whether certified constants exist for this order.
    pub certified: bool,
    pub decay: Option<DecayReport>,
    pub empirical: Option<EmpiricalFit>,
    pub checks: Vec<LemmaCheck>,
    pub checkerboard: bool,
    pub checkerboard_witness: Option<(usize, usize)>,
    /// `max |B A - I|`; zero in exact mode means the inverse is exact.
    pub residual: f64,
    /// `b_{n,n}^n` for every step, when the history was kept.
    pub b_nn: Vec<String>,
    pub pass: bool,
}

/// `B A = I` entry by entry, using the band structure of `A`.
pub fn is_exact_inverse<S: Scalar>(b: &Array2<S>, a: &SymBandedMatrix<S>) -> bool {
    let n = a.dim();
    let w = a.bandwidth();
    (0..n).all(|i| {
        (0..n).all(|j| {
            let (lo, hi) = (j.saturating_sub(w), (j + w).min(n - 1));
            let acc = (lo..=hi).fold(S::zero(), |mut acc, p| {
                if let Some(apj) = a.band_entry(p, j) {
                    acc.add_assign_ref(&b[[i, p]].mul_ref(apj));
                }
                acc
            });
            if i == j {
                acc == S::one()
            } else {
                acc.is_zero()
            }
        })
    })
}

/// Inverts the Gram matrix of `ks` with history and runs every applicable
/// check.
pub fn verify_instance<S: Scalar>(
    ks: &KnotSequence<S>,
    a: &SymBandedMatrix<S>,
) -> Result<InstanceReport> {
    let k = ks.order();
    let certified = matches!(k, 2 | 3);
    let inv = invert_iteratively(a, certified)?;
    let b = inv.matrix();
    let cb = check_checkerboard(&b);
    let residual = if S::EXACT {
        if is_exact_inverse(&b, a) {
            0.0
        } else {
            residual_max(&b, a).max(f64::MIN_POSITIVE)
        }
    } else {
        residual_max(&b, a)
    };
    let mut checks = Vec::new();
    let (decay, empirical) = if certified {
        let consts = decay_constants(k)?;
        checks = if k == 2 {
            verify_linear_lemmas(ks, &inv)?
        } else {
            let mut c = verify_quadratic_lemmas(ks, &inv)?;
            c.extend(check_bordered_inequalities(a, &inv)?);
            c
        };
        (Some(decay_report(&b, ks, &consts)?), None)
    } else {
        (None, empirical_decay_fit(&b, ks))
    };
    let residual_ok = if S::EXACT {
        residual == 0.0
    } else {
        residual <= 1e-10
    };
    let pass = cb.pass
        && residual_ok
        && checks.iter().all(|c| c.pass)
        && decay.as_ref().is_none_or(|d| d.pass);
    Ok(InstanceReport {
        k,
        m: ks.dim(),
        certified,
        decay,
        empirical,
        checks,
        checkerboard: cb.pass,
        checkerboard_witness: cb.witness,
        residual,
        b_nn: inv
            .diag_history()
            .iter()
            .map(Scalar::to_exact_string)
            .collect(),
        pass,
    })
}

impl InstanceReport {
    /// Report record: decay summary, lemma checks and the diagonal history.
    pub fn to_json(&self) -> Value {
        let consts = decay_constants(self.k).ok();
        let mut value = match &self.decay {
            Some(d) => report_json(d, consts.as_ref(), &self.checks),
            None => {
                json!({"k": self.k, "m": self.m, "K": null, "gamma_sq": null, "lemma_checks": []})
            }
        };
        value["pass"] = json!(self.pass);
        value["uncertified"] = json!(!self.certified);
        value["empirical"] = json!(self.empirical);
        value["checkerboard"] = json!(self.checkerboard);
        value["checkerboard_witness"] = json!(self.checkerboard_witness);
        value["residual"] = json!(self.residual);
        value["b_nn"] = json!(self.b_nn);
        value
    }
}

/// Gram matrix used by the float pipeline: closed forms for orders 2 and 3,
/// quadrature otherwise.
pub fn float_gram(ks: &KnotSequence<f64>) -> SymBandedMatrix<f64> {
    match ks.order() {
        2 | 3 => gram(ks),
        _ => gram_quadrature(ks),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialSummary {
    pub trial: usize,
    pub m: usize,
    pub worst_ratio: Option<f64>,
    pub pass: bool,
}

/// Merged outcome of a randomized sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub k: usize,
    pub mode: ScalarMode,
    pub trials: usize,
    pub max_m: usize,
    pub seed: u64,
    pub certified: bool,
    pub pass: bool,
    pub checkerboard: bool,
    pub max_residual: f64,
    pub worst_ratio: Option<f64>,
    pub worst_trial: Option<usize>,
    pub per_diagonal_max: Vec<f64>,
    pub empirical_gamma_max: Option<f64>,
    pub empirical_k_max: Option<f64>,
    pub checks: Vec<LemmaCheck>,
    pub trial_summaries: Vec<TrialSummary>,
}

impl SweepReport {
    fn new(config: &SweepConfig) -> Self {
        SweepReport {
            k: config.order,
            mode: config.mode,
            trials: 0,
            max_m: config.max_m,
            seed: config.seed,
            certified: matches!(config.order, 2 | 3),
            pass: true,
            checkerboard: true,
            max_residual: 0.0,
            worst_ratio: None,
            worst_trial: None,
            per_diagonal_max: Vec::new(),
            empirical_gamma_max: None,
            empirical_k_max: None,
            checks: Vec::new(),
            trial_summaries: Vec::new(),
        }
    }

    /// Folds one instance into the sweep.
    pub fn absorb(&mut self, trial: usize, inst: &InstanceReport) {
        self.trials += 1;
        self.pass &= inst.pass;
        self.checkerboard &= inst.checkerboard;
        self.max_residual = self.max_residual.max(inst.residual);
        merge_checks(&mut self.checks, &inst.checks);
        if let Some(d) = &inst.decay {
            if self.worst_ratio.is_none_or(|w| d.worst_ratio > w) {
                self.worst_ratio = Some(d.worst_ratio);
                self.worst_trial = Some(trial);
            }
            if self.per_diagonal_max.len() < d.per_diagonal_max.len() {
                self.per_diagonal_max.resize(d.per_diagonal_max.len(), 0.0);
            }
            for (acc, v) in self.per_diagonal_max.iter_mut().zip(&d.per_diagonal_max) {
                *acc = acc.max(*v);
            }
        }
        if let Some(fit) = &inst.empirical {
            self.empirical_gamma_max = Some(
                self.empirical_gamma_max
                    .map_or(fit.gamma, |g| g.max(fit.gamma)),
            );
            self.empirical_k_max = Some(
                self.empirical_k_max
                    .map_or(fit.k_const, |g| g.max(fit.k_const)),
            );
        }
        self.trial_summaries.push(TrialSummary {
            trial,
            m: inst.m,
            worst_ratio: inst.decay.as_ref().map(|d| d.worst_ratio),
            pass: inst.pass,
        });
    }

    pub fn to_json(&self) -> Value {
        let consts = decay_constants(self.k).ok();
        let mut value = serde_json::to_value(self).expect("serializable");
        value["K"] = json!(consts.as_ref().map(|c| c.k_const.to_exact_string()));
        value["gamma_sq"] = json!(consts.as_ref().map(|c| c.gamma_sq.to_exact_string()));
        value["uncertified"] = json!(!self.certified);
        value
    }

    /// One CSV row per trial.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,m,worst_ratio,pass\n");
        for t in &self.trial_summaries {
            let ratio = t.worst_ratio.map(|r| format!("{r:e}")).unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", t.trial, t.m, ratio, t.pass));
        }
        out
    }
}

/// Random partition of trial `trial`: dimension uniform in `order..=max_m`.
pub fn trial_partition_exact(config: &SweepConfig, trial: usize) -> Result<KnotSequence<Rational>> {
    let mut rng = trial_rng(config.seed, trial as u64);
    let m = rng.gen_range(config.order..=config.max_m);
    from_gaps(
        config.order,
        &random_gaps_exact(&mut rng, m - config.order + 1),
    )
}

pub fn trial_partition_float(config: &SweepConfig, trial: usize) -> Result<KnotSequence<f64>> {
    let mut rng = trial_rng(config.seed, trial as u64);
    let m = rng.gen_range(config.order..=config.max_m);
    from_gaps(
        config.order,
        &random_gaps_float(&mut rng, m - config.order + 1),
    )
}

/// Runs `config.trials` random partitions and merges the reports. Trials are
/// independent and processed in index order, so the report is deterministic.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let mut report = SweepReport::new(config);
    for trial in 0..config.trials {
        let inst = match config.mode {
            ScalarMode::Exact => {
                let ks = trial_partition_exact(config, trial)?;
                verify_instance(&ks, &gram(&ks))?
            }
            ScalarMode::Float => {
                let ks = trial_partition_float(config, trial)?;
                verify_instance(&ks, &float_gram(&ks))?
            }
        };
        report.absorb(trial, &inst);
    }
    Ok(report)
}
