//! Design criteria for signature matrices.
//!
//! Sum capacity and BER are Monte-Carlo estimates; MD, QD and ED are exact
//! functions of the noiseless constellation. Every criterion is a pure
//! function of the matrix and its [`CriterionSpec`], including the seed.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use libm::erfc;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SignatureMatrix;
use crate::mc::{self, Moments};
use crate::system::{add_noise, sq_dist, ChannelParams, Constellation, NoiseLevel};

/// Monte-Carlo samples used while searching.
pub const SEARCH_SAMPLES: usize = 20_000;
/// Monte-Carlo samples used for reported values.
pub const REPORT_SAMPLES: usize = 200_000;
/// BER bit budget of a full-scale simulation.
pub const FULL_BER_BITS: usize = 1_000_000;
/// Smallest accepted sample budget for Monte-Carlo criteria.
pub const MIN_MC_SAMPLES: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriterionKind {
    Capacity,
    Ber,
    Md,
    Qd,
    Ed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Maximize,
    Minimize,
}

impl CriterionKind {
    pub const ALL: [CriterionKind; 5] = [
        CriterionKind::Capacity,
        CriterionKind::Ber,
        CriterionKind::Md,
        CriterionKind::Qd,
        CriterionKind::Ed,
    ];

    pub fn direction(self) -> Direction {
        match self {
            CriterionKind::Capacity | CriterionKind::Md => Direction::Maximize,
            CriterionKind::Ber | CriterionKind::Qd | CriterionKind::Ed => Direction::Minimize,
        }
    }

    pub fn is_monte_carlo(self) -> bool {
        matches!(self, CriterionKind::Capacity | CriterionKind::Ber)
    }

    pub fn name(self) -> &'static str {
        match self {
            CriterionKind::Capacity => "capacity",
            CriterionKind::Ber => "ber",
            CriterionKind::Md => "md",
            CriterionKind::Qd => "qd",
            CriterionKind::Ed => "ed",
        }
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CriterionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CriterionKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown criterion `{s}`")))
    }
}

/// What to evaluate and at which noise level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionSpec {
    pub kind: CriterionKind,
    pub noise: NoiseLevel,
    /// Monte-Carlo draws for capacity, simulated bits for BER.
    pub mc_samples: usize,
    pub seed: u64,
}

impl CriterionSpec {
    pub fn new(kind: CriterionKind, noise: NoiseLevel, mc_samples: usize, seed: u64) -> Self {
        Self {
            kind,
            noise,
            mc_samples,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.is_monte_carlo() && self.mc_samples < MIN_MC_SAMPLES {
            return Err(Error::InvalidConfig(format!(
                "{} needs at least {MIN_MC_SAMPLES} samples, got {}",
                self.kind, self.mc_samples
            )));
        }
        if let NoiseLevel::Sigma(s) = self.noise {
            ChannelParams::from_sigma(s)?;
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_samples(self, mc_samples: usize) -> Self {
        Self { mc_samples, ..self }
    }

    fn expect(&self, kind: CriterionKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::KindMismatch {
                expected: kind.name(),
                actual: self.kind.name(),
            });
        }
        self.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionValue {
    pub value: f64,
    /// Monte-Carlo standard error; zero for exact criteria.
    pub std_error: f64,
    pub direction: Direction,
}

impl CriterionValue {
    fn exact(value: f64, direction: Direction) -> Self {
        Self {
            value,
            std_error: 0.0,
            direction,
        }
    }
}

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Exponential approximation `0.7 exp(-((x + 1) / 1.6)^2)` of `Q(x)`.
pub fn q_approx(x: f64) -> f64 {
    0.7 * ed_term(x)
}

#[inline]
fn ed_term(x: f64) -> f64 {
    let t = (x + 1.0) / 1.6;
    (-t * t).exp()
}

/// Natural log of the output density `f_Y(y)` of a uniform-input channel,
/// evaluated with log-sum-exp over the constellation.
pub fn log_mixture_pdf(c: &Constellation, sigma: f64, y: &[f64]) -> f64 {
    let mut buf = vec![0.0; c.len()];
    log_mixture_pdf_with(c, sigma, y, &mut buf)
}

fn log_mixture_pdf_with(c: &Constellation, sigma: f64, y: &[f64], buf: &mut [f64]) -> f64 {
    let m = c.m() as f64;
    let inv_two_var = 1.0 / (2.0 * sigma * sigma);
    let mut min = f64::INFINITY;
    for (d, z) in buf.iter_mut().zip(c.points()) {
        *d = sq_dist(y, z);
        if *d < min {
            min = *d;
        }
    }
    let sum: f64 = buf.iter().map(|d| (-(d - min) * inv_two_var).exp()).sum();
    -min * inv_two_var + sum.ln()
        - c.n() as f64 * std::f64::consts::LN_2
        - 0.5 * m * (2.0 * std::f64::consts::PI * sigma * sigma).ln()
}

/// Output density `f_Y(y)` for uniform inputs.
pub fn mixture_pdf(a: &SignatureMatrix, ch: &ChannelParams, y: &[f64]) -> Result<f64> {
    if y.len() != a.m() {
        return Err(Error::DimensionMismatch {
            expected: a.m(),
            actual: y.len(),
        });
    }
    let c = Constellation::new(a)?;
    Ok(log_mixture_pdf(&c, ch.sigma_n, y).exp())
}

/// Monte-Carlo sum capacity `h(Y) - h(N)` in bits at a fixed noise level.
pub fn capacity_at(
    a: &SignatureMatrix,
    ch: &ChannelParams,
    samples: usize,
    seed: u64,
) -> Result<CriterionValue> {
    let c = Constellation::new(a)?;
    let sigma = ch.sigma_n;
    let mask = (c.len() - 1) as u64;
    let chunks = mc::map_chunks(seed, samples, |rng, count| {
        let mut moments = Moments::default();
        let mut y = vec![0.0; c.m()];
        let mut buf = vec![0.0; c.len()];
        for _ in 0..count {
            let idx = (rng.random::<u64>() & mask) as usize;
            y.copy_from_slice(c.point(idx));
            add_noise(&mut y, sigma, rng);
            let log2_f = log_mixture_pdf_with(&c, sigma, &y, &mut buf) * std::f64::consts::LOG2_E;
            moments.push(log2_f);
        }
        moments
    });
    let moments = chunks.into_iter().fold(Moments::default(), Moments::merge);
    let h_y = -moments.mean();
    let h_n = 0.5
        * c.m() as f64
        * (2.0 * std::f64::consts::PI * std::f64::consts::E * sigma * sigma).log2();
    Ok(CriterionValue {
        value: h_y - h_n,
        std_error: moments.std_error(),
        direction: Direction::Maximize,
    })
}

/// Sum capacity of `a` with uniform inputs.
pub fn capacity(a: &SignatureMatrix, spec: &CriterionSpec) -> Result<CriterionValue> {
    spec.expect(CriterionKind::Capacity)?;
    let ch = spec.noise.resolve(a)?;
    capacity_at(a, &ch, spec.mc_samples, spec.seed)
}

/// Sum capacity divided by the number of users.
pub fn per_user_capacity(a: &SignatureMatrix, spec: &CriterionSpec) -> Result<CriterionValue> {
    let c = capacity(a, spec)?;
    let n = a.n() as f64;
    Ok(CriterionValue {
        value: c.value / n,
        std_error: c.std_error / n,
        ..c
    })
}

/// Bit error rate of exhaustive ML detection, simulated over
/// `ceil(mc_samples / n)` random blocks.
pub fn ber(a: &SignatureMatrix, spec: &CriterionSpec) -> Result<CriterionValue> {
    spec.expect(CriterionKind::Ber)?;
    let ch = spec.noise.resolve(a)?;
    ber_at(a, &ch, spec.mc_samples, spec.seed)
}

pub fn ber_at(
    a: &SignatureMatrix,
    ch: &ChannelParams,
    bits: usize,
    seed: u64,
) -> Result<CriterionValue> {
    let c = Constellation::new(a)?;
    let blocks = bits.div_ceil(a.n());
    let mask = (c.len() - 1) as u64;
    let errors: u64 = mc::map_chunks(seed, blocks, |rng, count| {
        let mut y = vec![0.0; c.m()];
        let mut errors = 0u64;
        for _ in 0..count {
            let idx = rng.random::<u64>() & mask;
            y.copy_from_slice(c.point(idx as usize));
            add_noise(&mut y, ch.sigma_n, rng);
            let decided = c.nearest(&y) as u64;
            errors += u64::from((idx ^ decided).count_ones());
        }
        errors
    })
    .into_iter()
    .sum();
    let total = (blocks * a.n()) as f64;
    let p = errors as f64 / total;
    Ok(CriterionValue {
        value: p,
        std_error: (p * (1.0 - p) / total).sqrt(),
        direction: Direction::Minimize,
    })
}

/// Visits every unordered pair of distinct constellation points as
/// `(distance, multiplicity)`.
///
/// Only the half of the constellation whose last user sends `-1` is stored;
/// the other half is its negation, so a pair of stored points `(i, j)` stands
/// for the distances `|Z_i - Z_j|` and `|Z_i + Z_j|`, each occurring twice,
/// and each stored point contributes `|2 Z_i|` once.
fn for_each_pair(c: &Constellation, mut f: impl FnMut(f64, f64)) {
    let half = c.len() / 2;
    for i in 0..half {
        let zi = c.point(i);
        let self_dist = 2.0 * zi.iter().map(|v| v * v).sum::<f64>().sqrt();
        f(self_dist, 1.0);
        for j in (i + 1)..half {
            let zj = c.point(j);
            let (mut minus, mut plus) = (0.0, 0.0);
            for (a, b) in zi.iter().zip(zj) {
                minus += (a - b) * (a - b);
                plus += (a + b) * (a + b);
            }
            f(minus.sqrt(), 2.0);
            f(plus.sqrt(), 2.0);
        }
    }
}

/// Minimum distance between constellation points.
pub fn md(a: &SignatureMatrix) -> Result<CriterionValue> {
    let c = Constellation::new(a)?;
    let mut min = f64::INFINITY;
    for_each_pair(&c, |d, _| min = min.min(d));
    Ok(CriterionValue::exact(min, Direction::Maximize))
}

/// Sum over ordered pairs of `g(|Z_i - Z_j| / (2 sigma))`.
fn ordered_pair_sum(
    a: &SignatureMatrix,
    ch: &ChannelParams,
    g: impl Fn(f64) -> f64,
) -> Result<f64> {
    if !(ch.sigma_n > 0.0) {
        return Err(Error::InvalidChannel(format!(
            "noise standard deviation must be positive, got {}",
            ch.sigma_n
        )));
    }
    let c = Constellation::new(a)?;
    let scale = 1.0 / (2.0 * ch.sigma_n);
    let mut sum = 0.0;
    for_each_pair(&c, |d, w| sum += w * g(d * scale));
    Ok(2.0 * sum)
}

/// Union-bound surrogate `sum_{i != j} Q(|Z_i - Z_j| / (2 sigma))`.
pub fn qd(a: &SignatureMatrix, ch: &ChannelParams) -> Result<CriterionValue> {
    Ok(CriterionValue::exact(
        ordered_pair_sum(a, ch, q_function)?,
        Direction::Minimize,
    ))
}

/// `qd` with `Q` replaced by [`q_approx`].
pub fn qd_approx(a: &SignatureMatrix, ch: &ChannelParams) -> Result<CriterionValue> {
    Ok(CriterionValue::exact(
        ordered_pair_sum(a, ch, q_approx)?,
        Direction::Minimize,
    ))
}

/// Exponential distance `sum_{i != j} exp(-((|Z_i - Z_j| / (2 sigma) + 1) / 1.6)^2)`.
///
/// Equal to [`qd_approx`] without its constant factor 0.7.
pub fn ed(a: &SignatureMatrix, ch: &ChannelParams) -> Result<CriterionValue> {
    Ok(CriterionValue::exact(
        ordered_pair_sum(a, ch, ed_term)?,
        Direction::Minimize,
    ))
}

/// Evaluates any criterion.
pub fn evaluate(a: &SignatureMatrix, spec: &CriterionSpec) -> Result<CriterionValue> {
    spec.validate()?;
    match spec.kind {
        CriterionKind::Capacity => capacity(a, spec),
        CriterionKind::Ber => ber(a, spec),
        CriterionKind::Md => md(a),
        CriterionKind::Qd => qd(a, &spec.noise.resolve(a)?),
        CriterionKind::Ed => ed(a, &spec.noise.resolve(a)?),
    }
}

/// One row of an evaluation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub matrix_id: String,
    pub criterion: CriterionKind,
    pub ebn0_db: Option<f64>,
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

impl EvaluationRecord {
    pub fn new(matrix_id: impl Into<String>, spec: &CriterionSpec, value: &CriterionValue) -> Self {
        Self {
            matrix_id: matrix_id.into(),
            criterion: spec.kind,
            ebn0_db: spec.noise.eb_n0_db(),
            value: value.value,
            std_error: value.std_error,
            samples: if spec.kind.is_monte_carlo() {
                spec.mc_samples
            } else {
                0
            },
            seed: spec.seed,
        }
    }
}

pub fn write_records<W: Write>(out: W, records: &[EvaluationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
