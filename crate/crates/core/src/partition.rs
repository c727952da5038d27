//! Partition generators: uniform, random, geometric and file-backed knot
//! sequences, deterministic for a fixed seed.

use std::path::PathBuf;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::knots::{KnotSequence, PartitionFile};
use crate::scalar::{parse_rational, Rational, Scalar};

/// How the interior breakpoints are placed.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionKind {
    /// `n` equally spaced interior points.
    Uniform(usize),
    /// `n` interior points from random positive gaps.
    Random { seed: u64, n: usize },
    /// `n` interior points whose consecutive gaps have ratio `ratio`.
    Geometric { ratio: Rational, n: usize },
    /// Partition read from a JSON file.
    Explicit(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSpec {
    pub order: usize,
    pub kind: PartitionKind,
}

impl PartitionKind {
    /// Parses `uniform:N`, `random:SEED:N`, `geometric:RATIO:N` or `file:PATH`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut parts = text.splitn(2, ':');
        let head = parts.next().unwrap_or_default();
        let rest = parts.next();
        let bad = || Error::input(format!("cannot parse partition spec {text:?}"));
        let int = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
        match (head, rest) {
            ("uniform", Some(n)) => Ok(PartitionKind::Uniform(int(n)?)),
            ("random", Some(rest)) => {
                let (seed, n) = rest.split_once(':').ok_or_else(bad)?;
                Ok(PartitionKind::Random {
                    seed: seed.trim().parse().map_err(|_| bad())?,
                    n: int(n)?,
                })
            }
            ("geometric", Some(rest)) => {
                let (ratio, n) = rest.rsplit_once(':').ok_or_else(bad)?;
                let ratio = parse_rational(ratio.trim()).ok_or_else(bad)?;
                if ratio <= Rational::zero() || ratio >= Rational::one() {
                    return Err(Error::input(format!(
                        "geometric ratio {ratio} outside (0,1)"
                    )));
                }
                Ok(PartitionKind::Geometric { ratio, n: int(n)? })
            }
            ("file", Some(path)) if !path.is_empty() => Ok(PartitionKind::Explicit(path.into())),
            _ => Err(bad()),
        }
    }
}

impl PartitionSpec {
    pub fn new(order: usize, kind: PartitionKind) -> Self {
        PartitionSpec { order, kind }
    }

    pub fn parse(order: usize, text: &str) -> Result<Self> {
        Ok(PartitionSpec::new(order, PartitionKind::parse(text)?))
    }

    /// Exact knot sequence.
    pub fn generate(&self) -> Result<KnotSequence<Rational>> {
        match &self.kind {
            PartitionKind::Uniform(n) => {
                let gaps = vec![Rational::one(); n + 1];
                from_gaps(self.order, &gaps)
            }
            PartitionKind::Random { seed, n } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                from_gaps(self.order, &random_gaps_exact(&mut rng, n + 1))
            }
            PartitionKind::Geometric { ratio, n } => {
                let mut gaps = Vec::with_capacity(n + 1);
                let mut cur = Rational::one();
                for _ in 0..=*n {
                    gaps.push(cur.clone());
                    cur *= ratio.clone();
                }
                from_gaps(self.order, &gaps)
            }
            PartitionKind::Explicit(path) => {
                let file = PartitionFile::read(path)?;
                if file.order != self.order {
                    return Err(Error::input(format!(
                        "partition file has order {} but order {} was requested",
                        file.order, self.order
                    )));
                }
                file.knots()
            }
        }
    }

    /// Floating-point knot sequence. Random partitions use continuous gap
    /// draws; the other kinds round the exact sequence.
    pub fn generate_float(&self) -> Result<KnotSequence<f64>> {
        match &self.kind {
            PartitionKind::Random { seed, n } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                from_gaps(self.order, &random_gaps_float(&mut rng, n + 1))
            }
            _ => Ok(self.generate()?.to_f64()),
        }
    }
}

/// Knot sequence whose `gaps.len()` breakpoint intervals are proportional to
/// `gaps`.
pub fn from_gaps<S: Scalar>(order: usize, gaps: &[S]) -> Result<KnotSequence<S>> {
    if gaps.is_empty() || gaps.iter().any(|g| !g.is_positive()) {
        return Err(Error::input(
            "gaps must be a nonempty list of positive values",
        ));
    }
    let total = gaps.iter().fold(S::zero(), |acc, g| acc + g.clone());
    let mut interior = Vec::with_capacity(gaps.len() - 1);
    let mut acc = S::zero();
    for g in &gaps[..gaps.len() - 1] {
        acc = acc + g.clone();
        interior.push(acc.clone() / total.clone());
    }
    KnotSequence::new(order, interior)
}

/// Small-denominator rational gaps: integer weights in `1..=16`; with
/// probability 1/2 one gap is shrunk by `10^-4` to stress near-degenerate
/// meshes.
pub fn random_gaps_exact(rng: &mut impl Rng, count: usize) -> Vec<Rational> {
    let mut gaps: Vec<Rational> = (0..count)
        .map(|_| Rational::from_int(rng.gen_range(1..=16)))
        .collect();
    if count > 0 && rng.gen_bool(0.5) {
        let idx = rng.gen_range(0..count);
        gaps[idx] = gaps[idx].clone() / Rational::from_int(10_000);
    }
    gaps
}

/// Exponentially distributed gaps (a symmetric Dirichlet draw after
/// normalization), with the same occasional `10^-4` shrink.
pub fn random_gaps_float(rng: &mut impl Rng, count: usize) -> Vec<f64> {
    let mut gaps: Vec<f64> = (0..count)
        .map(|_| {
            let u: f64 = rng.gen_range(f64::EPSILON..1.0);
            -u.ln()
        })
        .collect();
    if count > 0 && rng.gen_bool(0.5) {
        let idx = rng.gen_range(0..count);
        gaps[idx] *= 1e-4;
    }
    gaps
}

/// Per-trial generator derived from a base seed.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(trial))
}
