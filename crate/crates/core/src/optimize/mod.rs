//! Population-based search over signature matrices.
//!
//! Every search minimizes. [`make_cost`] turns a criterion into a cost by
//! flipping the sign of criteria that are maximized.

mod compare;
mod ga;
mod pso;

pub use compare::{compare_algorithms, CompareOptions, DeltaRow};
pub use ga::{run_ga, GaConfig, Population};
pub use pso::{run_pso, PsoConfig, Swarm};

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{evaluate, CriterionSpec, Direction};
use crate::error::{Error, Result};
use crate::matrix::{Alphabet, SignatureMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ga,
    Pso,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Ga => "ga",
            Algorithm::Pso => "pso",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ga" => Ok(Algorithm::Ga),
            "pso" => Ok(Algorithm::Pso),
            other => Err(Error::Parse(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Cost of a criterion: its value when minimized, its negation when
/// maximized. Evaluation failures cost `+inf`.
///
/// The returned closure evaluates with the criterion's fixed seed, so noisy
/// criteria compare candidates under common random numbers.
pub fn make_cost(spec: CriterionSpec) -> impl Fn(&SignatureMatrix) -> f64 + Send + Sync + Clone {
    move |a: &SignatureMatrix| match evaluate(a, &spec) {
        Ok(v) => {
            let cost = match v.direction {
                Direction::Minimize => v.value,
                Direction::Maximize => -v.value,
            };
            if cost.is_nan() {
                f64::INFINITY
            } else {
                cost
            }
        }
        Err(_) => f64::INFINITY,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub best_cost: f64,
    pub mean_cost: f64,
}

/// Result of a search: per-iteration statistics (iteration 0 is the initial
/// population) and the best matrix found.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    pub algorithm: Algorithm,
    pub iterations: Vec<IterationStats>,
    pub final_matrix: SignatureMatrix,
    pub final_cost: f64,
    pub evaluations: usize,
    pub metadata: BTreeMap<String, String>,
}

impl OptimizationTrace {
    pub fn best_costs(&self) -> impl Iterator<Item = f64> + '_ {
        self.iterations.iter().map(|s| s.best_cost)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for s in &self.iterations {
            w.serialize(s)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Box constraint shared by all searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            lower: -1.0,
            upper: 1.0,
        }
    }
}

impl Bounds {
    pub fn validate(&self) -> Result<()> {
        if !(self.lower < self.upper) || !self.lower.is_finite() || !self.upper.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "bounds [{}, {}] are not a finite interval",
                self.lower, self.upper
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lower, self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.random_range(self.lower..=self.upper)
    }
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidConfig(format!(
            "matrix dimensions must be positive, got {m}x{n}"
        )));
    }
    Ok(())
}

fn check_warm_start(
    warm: &[SignatureMatrix],
    m: usize,
    n: usize,
    bounds: &Bounds,
    alphabet: Alphabet,
) -> Result<()> {
    for a in warm {
        if (a.m(), a.n()) != (m, n) {
            return Err(Error::InvalidConfig(format!(
                "warm-start matrix is {}x{}, search is {m}x{n}",
                a.m(),
                a.n()
            )));
        }
        if !a.within_bounds(bounds.lower, bounds.upper) {
            return Err(Error::InvalidConfig(
                "warm-start matrix violates bounds".into(),
            ));
        }
        if alphabet == Alphabet::Binary && a.alphabet() != Alphabet::Binary {
            return Err(Error::InvalidConfig(
                "binary search needs binary warm starts".into(),
            ));
        }
    }
    Ok(())
}

fn to_matrix(m: usize, n: usize, genes: &[f64], alphabet: Alphabet) -> SignatureMatrix {
    SignatureMatrix::new(m, n, genes.to_vec(), alphabet).expect("search keeps genes valid")
}

/// Costs of a batch of candidates; order of evaluation does not matter
/// because costs are pure.
fn evaluate_all<C>(
    m: usize,
    n: usize,
    genomes: &[Vec<f64>],
    alphabet: Alphabet,
    cost: &C,
) -> Vec<f64>
where
    C: Fn(&SignatureMatrix) -> f64 + Sync,
{
    genomes
        .par_iter()
        .map(|g| {
            let c = cost(&to_matrix(m, n, g, alphabet));
            if c.is_nan() {
                f64::INFINITY
            } else {
                c
            }
        })
        .collect()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Index of the smallest cost; ties go to the lowest index.
fn argmin(costs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &c) in costs.iter().enumerate() {
        if c < costs[best] {
            best = i;
        }
    }
    best
}
