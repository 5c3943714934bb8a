//! Real-coded and binary genetic algorithm.
//!
//! Each generation keeps the elite unchanged, breeds a fixed fraction of the
//! remaining slots by uniform crossover of two tournament winners and fills
//! the rest by mutating a tournament winner. Each gene of a mutant changes
//! with probability `1 / (m n)`: real genes by a Gaussian step whose scale
//! shrinks linearly to a tenth of its initial value, binary genes by a flip.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{
    argmin, check_dims, check_warm_start, evaluate_all, mean, to_matrix, Algorithm, Bounds,
    IterationStats, OptimizationTrace,
};
use crate::error::{Error, Result};
use crate::matrix::{Alphabet, SignatureMatrix};
use crate::mc::{rng_from_seed, McRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub elite_count: usize,
    pub crossover_fraction: f64,
    pub max_iterations: usize,
    pub function_tolerance: f64,
    /// Generations over which the best cost must improve by at least
    /// `function_tolerance` to keep going.
    pub stall_generations: usize,
    pub bounds: Bounds,
    /// Initial mutation standard deviation as a fraction of the bound width.
    pub mutation_scale: f64,
    /// Final mutation scale relative to the initial one.
    pub mutation_shrink: f64,
    /// Probability that a gene of a mutant is perturbed or flipped;
    /// `1 / (m n)` when absent.
    pub mutation_rate: Option<f64>,
    /// Individuals drawn per tournament.
    pub tournament_size: usize,
    /// Recorded in the trace; there is a single population, so inert.
    pub migration_direction: String,
    /// Recorded in the trace; inert.
    pub migration_fraction: f64,
    #[serde(skip)]
    pub warm_start: Vec<SignatureMatrix>,
    pub alphabet: Alphabet,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 20,
            elite_count: 2,
            crossover_fraction: 0.8,
            max_iterations: 100,
            function_tolerance: 1e-6,
            stall_generations: 20,
            bounds: Bounds::default(),
            mutation_scale: 0.1,
            mutation_shrink: 0.1,
            mutation_rate: None,
            tournament_size: 2,
            migration_direction: "forward".into(),
            migration_fraction: 0.2,
            warm_start: Vec::new(),
            alphabet: Alphabet::Real,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 {
            return Err(Error::InvalidConfig("population must not be empty".into()));
        }
        if self.elite_count >= self.population_size {
            return Err(Error::InvalidConfig(format!(
                "elite count {} must be below population size {}",
                self.elite_count, self.population_size
            )));
        }
        if !(0.0..=1.0).contains(&self.crossover_fraction) {
            return Err(Error::InvalidConfig(format!(
                "crossover fraction {} outside [0, 1]",
                self.crossover_fraction
            )));
        }
        if !(self.mutation_scale >= 0.0)
            || !(0.0..=1.0).contains(&self.mutation_shrink)
            || self
                .mutation_rate
                .is_some_and(|r| !(0.0..=1.0).contains(&r))
        {
            return Err(Error::InvalidConfig("invalid mutation schedule".into()));
        }
        if self.tournament_size == 0 {
            return Err(Error::InvalidConfig(
                "tournament size must be positive".into(),
            ));
        }
        if self.warm_start.len() > self.population_size {
            return Err(Error::InvalidConfig(
                "more warm starts than individuals".into(),
            ));
        }
        self.bounds.validate()?;
        if self.alphabet == Alphabet::Binary
            && (self.bounds.lower > -1.0 || self.bounds.upper < 1.0)
        {
            return Err(Error::InvalidConfig(
                "binary search needs bounds covering ±1".into(),
            ));
        }
        Ok(())
    }
}

/// A GA population that can be advanced one generation at a time.
pub struct Population<'a, C> {
    m: usize,
    n: usize,
    cfg: &'a GaConfig,
    cost: &'a C,
    rng: McRng,
    genomes: Vec<Vec<f64>>,
    costs: Vec<f64>,
    generation: usize,
    evaluations: usize,
}

impl<'a, C> Population<'a, C>
where
    C: Fn(&SignatureMatrix) -> f64 + Sync,
{
    pub fn new(m: usize, n: usize, cost: &'a C, cfg: &'a GaConfig) -> Result<Self> {
        check_dims(m, n)?;
        cfg.validate()?;
        check_warm_start(&cfg.warm_start, m, n, &cfg.bounds, cfg.alphabet)?;
        let mut rng = rng_from_seed(cfg.seed);
        let mut genomes: Vec<Vec<f64>> = cfg
            .warm_start
            .iter()
            .map(|a| a.entries().to_vec())
            .collect();
        while genomes.len() < cfg.population_size {
            let g = (0..m * n)
                .map(|_| match cfg.alphabet {
                    Alphabet::Real => cfg.bounds.sample(&mut rng),
                    Alphabet::Binary => random_sign(&mut rng),
                })
                .collect();
            genomes.push(g);
        }
        let costs = evaluate_all(m, n, &genomes, cfg.alphabet, cost);
        Ok(Self {
            m,
            n,
            cfg,
            cost,
            rng,
            evaluations: genomes.len(),
            genomes,
            costs,
            generation: 0,
        })
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn genomes(&self) -> &[Vec<f64>] {
        &self.genomes
    }

    pub fn stats(&self) -> IterationStats {
        IterationStats {
            iteration: self.generation,
            best_cost: self.costs[argmin(&self.costs)],
            mean_cost: mean(&self.costs),
        }
    }

    pub fn best(&self) -> (SignatureMatrix, f64) {
        let i = argmin(&self.costs);
        (
            to_matrix(self.m, self.n, &self.genomes[i], self.cfg.alphabet),
            self.costs[i],
        )
    }

    fn tournament(&mut self) -> usize {
        let mut best = self.rng.random_range(0..self.genomes.len());
        for _ in 1..self.cfg.tournament_size {
            let c = self.rng.random_range(0..self.genomes.len());
            if self.costs[c] < self.costs[best] || (self.costs[c] == self.costs[best] && c < best) {
                best = c;
            }
        }
        best
    }

    fn mutation_sigma(&self) -> f64 {
        let t = self.generation as f64 / self.cfg.max_iterations.max(1) as f64;
        let shrink = 1.0 - (1.0 - self.cfg.mutation_shrink) * t.min(1.0);
        self.cfg.mutation_scale * self.cfg.bounds.width() * shrink
    }

    /// Breeds and evaluates the next generation.
    pub fn step(&mut self) {
        self.generation += 1;
        let cfg = self.cfg;
        let size = cfg.population_size;
        let genes = self.m * self.n;

        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&a, &b| self.costs[a].total_cmp(&self.costs[b]).then(a.cmp(&b)));

        let mut next: Vec<Vec<f64>> = order[..cfg.elite_count]
            .iter()
            .map(|&i| self.genomes[i].clone())
            .collect();
        let mut next_costs: Vec<f64> = order[..cfg.elite_count]
            .iter()
            .map(|&i| self.costs[i])
            .collect();

        let rest = size - cfg.elite_count;
        let crossovers = (cfg.crossover_fraction * rest as f64).round() as usize;
        let mut children = Vec::with_capacity(rest);
        for _ in 0..crossovers {
            let p1 = self.tournament();
            let p2 = self.tournament();
            let child: Vec<f64> = (0..genes)
                .map(|g| {
                    if self.rng.random::<bool>() {
                        self.genomes[p1][g]
                    } else {
                        self.genomes[p2][g]
                    }
                })
                .collect();
            children.push(child);
        }
        let sigma = self.mutation_sigma();
        let rate = cfg.mutation_rate.unwrap_or(1.0 / genes as f64);
        for _ in crossovers..rest {
            let p = self.tournament();
            let mut child = self.genomes[p].clone();
            match cfg.alphabet {
                Alphabet::Real => {
                    for v in &mut child {
                        if self.rng.random::<f64>() < rate {
                            let z: f64 = self.rng.sample(StandardNormal);
                            *v = cfg.bounds.clamp(*v + sigma * z);
                        }
                    }
                }
                Alphabet::Binary => {
                    for v in &mut child {
                        if self.rng.random::<f64>() < rate {
                            *v = -*v;
                        }
                    }
                }
            }
            children.push(child);
        }

        let child_costs = evaluate_all(self.m, self.n, &children, cfg.alphabet, self.cost);
        self.evaluations += children.len();
        next.extend(children);
        next_costs.extend(child_costs);
        debug_assert!(next.iter().all(|g| g
            .iter()
            .all(|&v| v >= cfg.bounds.lower && v <= cfg.bounds.upper)));
        self.genomes = next;
        self.costs = next_costs;
    }
}

fn random_sign<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Runs the GA on `m x n` matrices until the iteration limit or until the
/// best cost stalls.
pub fn run_ga<C>(m: usize, n: usize, cost: &C, cfg: &GaConfig) -> Result<OptimizationTrace>
where
    C: Fn(&SignatureMatrix) -> f64 + Sync,
{
    let mut pop = Population::new(m, n, cost, cfg)?;
    let mut iterations = vec![pop.stats()];
    let mut stop_reason = "max_iterations";
    while pop.generation() < cfg.max_iterations {
        pop.step();
        iterations.push(pop.stats());
        let g = pop.generation();
        if cfg.stall_generations > 0 && g >= cfg.stall_generations {
            let before = iterations[g - cfg.stall_generations].best_cost;
            let now = iterations[g].best_cost;
            if !(before - now >= cfg.function_tolerance) {
                stop_reason = "function_tolerance";
                break;
            }
        }
    }
    let (final_matrix, final_cost) = pop.best();
    let mut metadata = BTreeMap::new();
    metadata.insert("stop_reason".into(), stop_reason.into());
    metadata.insert(
        "migration_direction".into(),
        cfg.migration_direction.clone(),
    );
    metadata.insert(
        "migration_fraction".into(),
        cfg.migration_fraction.to_string(),
    );
    metadata.insert("seed".into(), cfg.seed.to_string());
    Ok(OptimizationTrace {
        algorithm: Algorithm::Ga,
        iterations,
        final_matrix,
        final_cost,
        evaluations: pop.evaluations,
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(a: &SignatureMatrix) -> f64 {
        a.entries().iter().map(|v| v * v).sum()
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = GaConfig {
            elite_count: 20,
            ..GaConfig::default()
        };
        assert!(run_ga(2, 2, &sphere, &cfg).is_err());
        let cfg = GaConfig {
            crossover_fraction: 1.5,
            ..GaConfig::default()
        };
        assert!(run_ga(2, 2, &sphere, &cfg).is_err());
        assert!(run_ga(0, 2, &sphere, &GaConfig::default()).is_err());
    }

    #[test]
    fn table_defaults() {
        let cfg = GaConfig::default();
        assert_eq!(cfg.population_size, 20);
        assert_eq!(cfg.elite_count, 2);
        assert_eq!(cfg.crossover_fraction, 0.8);
        assert_eq!(cfg.max_iterations, 100);
        assert_eq!(cfg.function_tolerance, 1e-6);
        assert_eq!((cfg.bounds.lower, cfg.bounds.upper), (-1.0, 1.0));
    }

    #[test]
    fn sphere_converges() {
        let cfg = GaConfig {
            seed: 3,
            ..GaConfig::default()
        };
        let trace = run_ga(3, 4, &sphere, &cfg).unwrap();
        let start = trace.iterations[0].best_cost;
        assert!(
            trace.final_cost < start / 100.0,
            "{start} -> {}",
            trace.final_cost
        );
        assert!(trace.iterations.len() <= 101);
    }

    #[test]
    fn best_cost_never_increases() {
        let cfg = GaConfig {
            seed: 8,
            ..GaConfig::default()
        };
        let trace = run_ga(2, 3, &sphere, &cfg).unwrap();
        for w in trace.iterations.windows(2) {
            assert!(w[1].best_cost <= w[0].best_cost);
        }
        assert_eq!(trace.final_cost, trace.iterations.last().unwrap().best_cost);
    }

    #[test]
    fn population_respects_bounds() {
        let cfg = GaConfig {
            bounds: Bounds {
                lower: -0.3,
                upper: 0.7,
            },
            seed: 1,
            ..GaConfig::default()
        };
        let far = |a: &SignatureMatrix| a.entries().iter().map(|v| (v - 5.0).powi(2)).sum::<f64>();
        let mut pop = Population::new(2, 2, &far, &cfg).unwrap();
        for _ in 0..30 {
            pop.step();
            assert!(pop
                .genomes()
                .iter()
                .flatten()
                .all(|&v| (-0.3..=0.7).contains(&v)));
        }
        assert!(pop.best().0.within_bounds(-0.3, 0.7));
    }

    #[test]
    fn binary_mode_stays_binary() {
        let cfg = GaConfig {
            alphabet: Alphabet::Binary,
            seed: 4,
            ..GaConfig::default()
        };
        let target = [1.0, -1.0, -1.0, 1.0, 1.0, 1.0];
        let cost = |a: &SignatureMatrix| {
            a.entries()
                .iter()
                .zip(target)
                .filter(|(v, t)| **v != *t)
                .count() as f64
        };
        let mut pop = Population::new(2, 3, &cost, &cfg).unwrap();
        for _ in 0..40 {
            pop.step();
            assert!(pop
                .genomes()
                .iter()
                .flatten()
                .all(|&v| v == 1.0 || v == -1.0));
        }
        let (best, c) = pop.best();
        assert_eq!(best.alphabet(), Alphabet::Binary);
        assert_eq!(c, 0.0);
    }

    #[test]
    fn warm_start_is_kept() {
        let warm =
            SignatureMatrix::new(2, 2, vec![0.01, -0.01, 0.0, 0.02], Alphabet::Real).unwrap();
        let warm_cost = sphere(&warm);
        let cfg = GaConfig {
            warm_start: vec![warm],
            seed: 2,
            ..GaConfig::default()
        };
        let trace = run_ga(2, 2, &sphere, &cfg).unwrap();
        assert!(trace.iterations[0].best_cost <= warm_cost);

        let wrong = SignatureMatrix::identity(3);
        let cfg = GaConfig {
            warm_start: vec![wrong],
            ..GaConfig::default()
        };
        assert!(run_ga(2, 2, &sphere, &cfg).is_err());
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let cfg = GaConfig {
            seed: 12,
            max_iterations: 15,
            ..GaConfig::default()
        };
        let a = run_ga(2, 3, &sphere, &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let b = pool.install(|| run_ga(2, 3, &sphere, &cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn migration_fields_recorded() {
        let cfg = GaConfig {
            max_iterations: 2,
            ..GaConfig::default()
        };
        let trace = run_ga(1, 1, &sphere, &cfg).unwrap();
        assert_eq!(trace.metadata["migration_direction"], "forward");
        assert_eq!(trace.metadata["migration_fraction"], "0.2");
    }
}
