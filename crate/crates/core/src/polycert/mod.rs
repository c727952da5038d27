//! Exact sparse polynomial arithmetic and coefficient-sign certificates.

pub mod certify;
pub mod poly;
pub mod rational_fn;
pub mod symbolic;

use serde::Serialize;

pub use certify::{
    certify_inequality, certify_nonneg, certify_with_spot_check, Certificate, Inequality,
    DEFAULT_TERM_BUDGET,
};
pub use poly::{MultiPoly, TermBudget};
pub use rational_fn::RationalFn;
pub use symbolic::{build_symbolic, SymbolicExpr, Window};

/// Size statistics of a certificate run, also reported when it aborts.
#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct CertStats {
    pub name: String,
    pub num_terms: usize,
    pub den_terms: usize,
    pub max_total_degree: u32,
    pub peak_terms: usize,
}
