//! Head-to-head GA versus PSO on per-user capacity.

use serde::{Deserialize, Serialize};

use super::{make_cost, run_ga, run_pso, GaConfig, PsoConfig};
use crate::criteria::{per_user_capacity, CriterionKind, CriterionSpec, REPORT_SAMPLES};
use crate::error::{Error, Result};
use crate::mc::derive_seed;
use crate::system::NoiseLevel;

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    pub ga: GaConfig,
    pub pso: PsoConfig,
    /// Samples of the capacity estimate applied to both final matrices.
    pub eval_samples: usize,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            ga: GaConfig::default(),
            pso: PsoConfig::default(),
            eval_samples: REPORT_SAMPLES,
        }
    }
}

/// Per-user capacity of the GA result minus that of the PSO result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub criterion: CriterionKind,
    pub ebn0_db: f64,
    pub seeds: usize,
    pub mean_delta: f64,
    /// Sample standard deviation of the delta across seeds.
    pub std_delta: f64,
    /// Monte-Carlo standard error of `mean_delta`.
    pub mc_error: f64,
}

impl DeltaRow {
    /// Standard error of `mean_delta` from seed spread and Monte-Carlo noise.
    pub fn combined_error(&self) -> f64 {
        (self.std_delta * self.std_delta / self.seeds as f64 + self.mc_error * self.mc_error).sqrt()
    }
}

/// Optimizes each criterion at each Eb/N0 with both algorithms for every seed
/// and compares the resulting matrices.
///
/// `specs` give the criterion kinds and search sample budgets; their noise
/// level and seed are replaced per grid point. Both final matrices are
/// evaluated with the same seed.
pub fn compare_algorithms(
    m: usize,
    n: usize,
    specs: &[CriterionSpec],
    ebn0_grid: &[f64],
    seeds: &[u64],
    opts: &CompareOptions,
) -> Result<Vec<DeltaRow>> {
    if seeds.is_empty() {
        return Err(Error::InvalidConfig("at least one seed is needed".into()));
    }
    let mut rows = Vec::with_capacity(specs.len() * ebn0_grid.len());
    for spec in specs {
        for &db in ebn0_grid {
            let mut deltas = Vec::with_capacity(seeds.len());
            let mut mc_var = 0.0;
            for &seed in seeds {
                let run_seed = derive_seed(seed, &[spec.kind as u64, db.to_bits()]);
                let search = CriterionSpec {
                    noise: NoiseLevel::EbN0Db(db),
                    seed: derive_seed(run_seed, &[1]),
                    ..*spec
                };
                let cost = make_cost(search);
                let ga = run_ga(
                    m,
                    n,
                    &cost,
                    &GaConfig {
                        seed: run_seed,
                        ..opts.ga.clone()
                    },
                )?;
                let pso = run_pso(
                    m,
                    n,
                    &cost,
                    &PsoConfig {
                        seed: run_seed,
                        ..opts.pso.clone()
                    },
                )?;
                let eval = CriterionSpec::new(
                    CriterionKind::Capacity,
                    NoiseLevel::EbN0Db(db),
                    opts.eval_samples,
                    derive_seed(run_seed, &[2]),
                );
                let cg = per_user_capacity(&ga.final_matrix, &eval)?;
                let cp = per_user_capacity(&pso.final_matrix, &eval)?;
                deltas.push(cg.value - cp.value);
                mc_var += cg.std_error.powi(2) + cp.std_error.powi(2);
            }
            let k = deltas.len() as f64;
            let mean_delta = deltas.iter().sum::<f64>() / k;
            let std_delta = if deltas.len() > 1 {
                (deltas.iter().map(|d| (d - mean_delta).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
            } else {
                0.0
            };
            rows.push(DeltaRow {
                criterion: spec.kind,
                ebn0_db: db,
                seeds: deltas.len(),
                mean_delta,
                std_delta,
                mc_error: mc_var.sqrt() / k,
            });
        }
    }
    Ok(rows)
}
