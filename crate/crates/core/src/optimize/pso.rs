//! Global-best particle swarm optimization over the `m n` dimensional box.

use std::collections::BTreeMap;

use rand::Rng;
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
pub struct PsoConfig {
    pub particle_count: usize,
    pub max_iterations: usize,
    pub bounds: Bounds,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Initial positions for the first particles.
    #[serde(skip)]
    pub warm_start: Vec<SignatureMatrix>,
    pub seed: u64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            particle_count: 20,
            max_iterations: 100,
            bounds: Bounds::default(),
            inertia: 0.729,
            cognitive: 1.494,
            social: 1.494,
            warm_start: Vec::new(),
            seed: 0,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particle_count == 0 {
            return Err(Error::InvalidConfig("swarm must not be empty".into()));
        }
        if self.warm_start.len() > self.particle_count {
            return Err(Error::InvalidConfig(
                "more warm starts than particles".into(),
            ));
        }
        for (name, v) in [
            ("inertia", self.inertia),
            ("cognitive", self.cognitive),
            ("social", self.social),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} coefficient {v} is invalid"
                )));
            }
        }
        self.bounds.validate()
    }
}

/// Particle swarm state that can be advanced one iteration at a time.
pub struct Swarm<'a, C> {
    m: usize,
    n: usize,
    cfg: &'a PsoConfig,
    cost: &'a C,
    rng: McRng,
    positions: Vec<Vec<f64>>,
    velocities: Vec<Vec<f64>>,
    costs: Vec<f64>,
    personal_best: Vec<Vec<f64>>,
    personal_best_costs: Vec<f64>,
    global_best: usize,
    iteration: usize,
    evaluations: usize,
}

impl<'a, C> Swarm<'a, C>
where
    C: Fn(&SignatureMatrix) -> f64 + Sync,
{
    pub fn new(m: usize, n: usize, cost: &'a C, cfg: &'a PsoConfig) -> Result<Self> {
        check_dims(m, n)?;
        cfg.validate()?;
        check_warm_start(&cfg.warm_start, m, n, &cfg.bounds, Alphabet::Real)?;
        let dim = m * n;
        let mut rng = rng_from_seed(cfg.seed);
        let mut positions: Vec<Vec<f64>> = cfg
            .warm_start
            .iter()
            .map(|a| a.entries().to_vec())
            .collect();
        while positions.len() < cfg.particle_count {
            positions.push((0..dim).map(|_| cfg.bounds.sample(&mut rng)).collect());
        }
        let velocities = (0..cfg.particle_count)
            .map(|_| (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect())
            .collect();
        let costs = evaluate_all(m, n, &positions, Alphabet::Real, cost);
        Ok(Self {
            m,
            n,
            cfg,
            cost,
            rng,
            personal_best: positions.clone(),
            personal_best_costs: costs.clone(),
            global_best: argmin(&costs),
            evaluations: positions.len(),
            positions,
            velocities,
            costs,
            iteration: 0,
        })
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }

    pub fn personal_best_costs(&self) -> &[f64] {
        &self.personal_best_costs
    }

    pub fn global_best_cost(&self) -> f64 {
        self.personal_best_costs[self.global_best]
    }

    pub fn stats(&self) -> IterationStats {
        IterationStats {
            iteration: self.iteration,
            best_cost: self.global_best_cost(),
            mean_cost: mean(&self.costs),
        }
    }

    pub fn best(&self) -> (SignatureMatrix, f64) {
        (
            to_matrix(
                self.m,
                self.n,
                &self.personal_best[self.global_best],
                Alphabet::Real,
            ),
            self.global_best_cost(),
        )
    }

    /// Moves every particle, evaluates the swarm and updates the bests.
    pub fn step(&mut self) {
        self.iteration += 1;
        let cfg = self.cfg;
        let gbest = self.personal_best[self.global_best].clone();
        for p in 0..self.positions.len() {
            let (x, v, pb) = (
                &mut self.positions[p],
                &mut self.velocities[p],
                &self.personal_best[p],
            );
            for d in 0..x.len() {
                let r1: f64 = self.rng.random();
                let r2: f64 = self.rng.random();
                v[d] = cfg.inertia * v[d]
                    + cfg.cognitive * r1 * (pb[d] - x[d])
                    + cfg.social * r2 * (gbest[d] - x[d]);
                x[d] = cfg.bounds.clamp(x[d] + v[d]);
            }
        }
        self.costs = evaluate_all(self.m, self.n, &self.positions, Alphabet::Real, self.cost);
        self.evaluations += self.positions.len();
        for p in 0..self.positions.len() {
            if self.costs[p] < self.personal_best_costs[p] {
                self.personal_best_costs[p] = self.costs[p];
                self.personal_best[p].clone_from(&self.positions[p]);
            }
        }
        self.global_best = argmin(&self.personal_best_costs);
    }
}

/// Runs PSO for `max_iterations` iterations.
pub fn run_pso<C>(m: usize, n: usize, cost: &C, cfg: &PsoConfig) -> Result<OptimizationTrace>
where
    C: Fn(&SignatureMatrix) -> f64 + Sync,
{
    let mut swarm = Swarm::new(m, n, cost, cfg)?;
    let mut iterations = vec![swarm.stats()];
    while swarm.iteration() < cfg.max_iterations {
        swarm.step();
        iterations.push(swarm.stats());
    }
    let (final_matrix, final_cost) = swarm.best();
    let mut metadata = BTreeMap::new();
    metadata.insert("inertia".into(), cfg.inertia.to_string());
    metadata.insert("cognitive".into(), cfg.cognitive.to_string());
    metadata.insert("social".into(), cfg.social.to_string());
    metadata.insert("seed".into(), cfg.seed.to_string());
    Ok(OptimizationTrace {
        algorithm: Algorithm::Pso,
        iterations,
        final_matrix,
        final_cost,
        evaluations: swarm.evaluations,
        metadata,
    })
}
