//! Per-inequality bookkeeping shared by the lemma verifiers.

use serde::Serialize;

use crate::scalar::{le_with_slack, Scalar};

/// Running record of one inequality family `lhs <= rhs` checked over many
/// instances. `worst_slack` is the smallest relative margin `1 - lhs/rhs`
/// seen; a negative value means the inequality failed somewhere.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LemmaCheck {
    pub name: String,
    pub pass: bool,
    pub checked: u64,
    pub violations: u64,
    pub worst_slack: Option<f64>,
    /// 1-based indices of the instance with the worst slack.
    pub worst_at: Option<Vec<usize>>,
}

impl LemmaCheck {
    pub fn new(name: impl Into<String>) -> Self {
        LemmaCheck {
            name: name.into(),
            pass: true,
            checked: 0,
            violations: 0,
            worst_slack: None,
            worst_at: None,
        }
    }

    fn note(&mut self, ok: bool, slack: f64, at: &[usize]) {
        self.checked += 1;
        if !ok {
            self.pass = false;
            self.violations += 1;
        }
        let worse = match self.worst_slack {
            None => true,
            Some(cur) => slack < cur || (slack.is_nan() && !cur.is_nan()),
        };
        if worse {
            self.worst_slack = Some(slack);
            self.worst_at = Some(at.to_vec());
        }
    }

    /// Records `lhs <= rhs`.
    pub fn record<S: Scalar>(&mut self, lhs: &S, rhs: &S, at: &[usize]) {
        let ok = le_with_slack(lhs, rhs);
        let slack = relative_margin(lhs, rhs);
        self.note(ok, slack, at);
    }

    /// Records `lhs <= rhs` given both sides squared (both nonnegative);
    /// the slack is reported on the unsquared scale.
    pub fn record_squared<S: Scalar>(&mut self, lhs_sq: &S, rhs_sq: &S, at: &[usize]) {
        let ok = le_with_slack(lhs_sq, rhs_sq);
        let slack = if rhs_sq.is_zero() {
            if lhs_sq.is_zero() {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            1.0 - (lhs_sq.clone() / rhs_sq.clone()).to_f64().sqrt()
        };
        self.note(ok, slack, at);
    }

    /// Records a condition that is simply true or false.
    pub fn record_flag(&mut self, ok: bool, at: &[usize]) {
        self.note(ok, if ok { 0.0 } else { -1.0 }, at);
    }

    /// Merges another record of the same inequality.
    pub fn merge(&mut self, other: &LemmaCheck) {
        self.pass &= other.pass;
        self.checked += other.checked;
        self.violations += other.violations;
        if let Some(slack) = other.worst_slack {
            if self.worst_slack.is_none_or(|cur| slack < cur) {
                self.worst_slack = Some(slack);
                self.worst_at = other.worst_at.clone();
            }
        }
    }
}

fn relative_margin<S: Scalar>(lhs: &S, rhs: &S) -> f64 {
    let diff = rhs.clone() - lhs.clone();
    if rhs.is_zero() {
        diff.to_f64()
    } else {
        (diff / rhs.abs()).to_f64()
    }
}

/// Merges lists of checks by name, keeping first-seen order.
pub fn merge_checks(into: &mut Vec<LemmaCheck>, from: &[LemmaCheck]) {
    for check in from {
        match into.iter_mut().find(|c| c.name == check.name) {
            Some(existing) => existing.merge(check),
            None => into.push(check.clone()),
        }
    }
}
