//! The synchronous CDMA channel `Y = A X + N`.
//!
//! Inputs are antipodal bit vectors. Input vectors are enumerated by binary
//! counting: index `i` maps to the vector whose entry `j` is `+1` when bit `j`
//! of `i` is set and `-1` otherwise, so user 1 is the least significant bit.
//! With this order the negation of input `i` is input `2^n - 1 - i`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SignatureMatrix;

/// Largest user count for which a full constellation is built by default.
pub const DEFAULT_MAX_USERS: usize = 26;

/// A length-`n` antipodal input vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InputVector(Vec<i8>);

impl InputVector {
    pub fn new(bits: Vec<i8>) -> Result<Self> {
        if bits.iter().any(|&b| b != 1 && b != -1) {
            return Err(Error::InvalidConfig(
                "input entries must be +1 or -1".into(),
            ));
        }
        Ok(Self(bits))
    }

    /// Input vector number `index` in the canonical enumeration.
    pub fn from_index(index: u64, n: usize) -> Self {
        Self(
            (0..n)
                .map(|j| if (index >> j) & 1 == 1 { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn index(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .fold(0, |acc, (j, _)| acc | (1 << j))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[i8] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&b| b as f64).collect()
    }

    pub fn concat(parts: &[InputVector]) -> InputVector {
        InputVector(parts.iter().flat_map(|p| p.0.iter().copied()).collect())
    }
}

/// Noise description resolved against a concrete channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Eb/N0 in dB, when the noise level was derived from it.
    pub eb_n0_db: Option<f64>,
    /// Per-chip noise standard deviation.
    pub sigma_n: f64,
}

impl ChannelParams {
    pub fn from_sigma(sigma_n: f64) -> Result<Self> {
        if !(sigma_n > 0.0 && sigma_n.is_finite()) {
            return Err(Error::InvalidChannel(format!(
                "noise standard deviation must be positive and finite, got {sigma_n}"
            )));
        }
        Ok(Self {
            eb_n0_db: None,
            sigma_n,
        })
    }

    pub fn from_ebn0(a: &SignatureMatrix, eb_n0_db: f64) -> Result<Self> {
        Ok(Self {
            eb_n0_db: Some(eb_n0_db),
            sigma_n: sigma_from_ebn0(a, eb_n0_db)?,
        })
    }
}

/// Noise level as configured by a user: either Eb/N0 (resolved per matrix)
/// or an explicit per-chip standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLevel {
    EbN0Db(f64),
    Sigma(f64),
}

impl NoiseLevel {
    pub fn resolve(&self, a: &SignatureMatrix) -> Result<ChannelParams> {
        match *self {
            NoiseLevel::EbN0Db(db) => ChannelParams::from_ebn0(a, db),
            NoiseLevel::Sigma(s) => ChannelParams::from_sigma(s),
        }
    }

    pub fn eb_n0_db(&self) -> Option<f64> {
        match *self {
            NoiseLevel::EbN0Db(db) => Some(db),
            NoiseLevel::Sigma(_) => None,
        }
    }
}

/// Per-chip noise standard deviation for a given Eb/N0.
///
/// `Eb = ||A||_F^2 / n` is the average energy spent per user bit and the noise
/// variance per chip is `N0 / 2`, so `sigma^2 = Eb / (2 * 10^(EbN0/10))`.
pub fn sigma_from_ebn0(a: &SignatureMatrix, eb_n0_db: f64) -> Result<f64> {
    if !eb_n0_db.is_finite() {
        return Err(Error::InvalidChannel(format!(
            "Eb/N0 must be finite, got {eb_n0_db}"
        )));
    }
    let eb = a.frobenius_norm_sq() / a.n() as f64;
    if eb <= 0.0 {
        return Err(Error::InvalidChannel(
            "zero matrix has no bit energy".into(),
        ));
    }
    Ok((eb / (2.0 * 10f64.powf(eb_n0_db / 10.0))).sqrt())
}

/// The `2^n` noiseless outputs `Z_i = A X_i`, indexed canonically.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    m: usize,
    n: usize,
    points: Vec<f64>,
}

impl Constellation {
    pub fn new(a: &SignatureMatrix) -> Result<Self> {
        Self::with_limit(a, DEFAULT_MAX_USERS)
    }

    pub fn with_limit(a: &SignatureMatrix, max_users: usize) -> Result<Self> {
        let (m, n) = (a.m(), a.n());
        if n > max_users || n >= usize::BITS as usize - 1 {
            return Err(Error::Capacity {
                n,
                limit: max_users,
            });
        }
        let count = 1usize << n;
        let mut points = vec![0.0; count * m];
        for (i, z) in points.chunks_exact_mut(m).enumerate() {
            for (r, zr) in z.iter_mut().enumerate() {
                let row = a.row(r);
                let mut acc = 0.0;
                for (j, &v) in row.iter().enumerate() {
                    if (i >> j) & 1 == 1 {
                        acc += v;
                    } else {
                        acc += -v;
                    }
                }
                *zr = acc;
            }
        }
        Ok(Self { m, n, points })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn point(&self, index: usize) -> &[f64] {
        &self.points[index * self.m..(index + 1) * self.m]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.points.chunks_exact(self.m)
    }

    /// Flat row-major storage, one point per `m` values.
    pub fn as_flat(&self) -> &[f64] {
        &self.points
    }

    pub fn input(&self, index: usize) -> InputVector {
        InputVector::from_index(index as u64, self.n)
    }

    /// Index of the negated input.
    #[inline]
    pub fn negation_of(&self, index: usize) -> usize {
        self.len() - 1 - index
    }

    /// Index of the point nearest to `y`; ties go to the lowest index.
    pub fn nearest(&self, y: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, z) in self.points.chunks_exact(self.m).enumerate() {
            let d = sq_dist(y, z);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// True when every pair of points is distinct.
    pub fn is_injective(&self) -> bool {
        let mut keys: Vec<Vec<u64>> = self
            .points()
            .map(|z| z.iter().map(|v| (v + 0.0).to_bits()).collect())
            .collect();
        keys.sort_unstable();
        keys.windows(2).all(|w| w[0] != w[1])
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn constellation(a: &SignatureMatrix) -> Result<Constellation> {
    Constellation::new(a)
}

fn check_input(a: &SignatureMatrix, x: &InputVector) -> Result<()> {
    if x.len() != a.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            actual: x.len(),
        });
    }
    Ok(())
}

/// One channel use: `A X` plus i.i.d. Gaussian noise of deviation `sigma_n`.
pub fn transmit<R: Rng + ?Sized>(
    a: &SignatureMatrix,
    x: &InputVector,
    ch: &ChannelParams,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_input(a, x)?;
    let mut y = a.mul_vec(&x.to_f64())?;
    add_noise(&mut y, ch.sigma_n, rng);
    Ok(y)
}

#[inline]
pub(crate) fn add_noise<R: Rng + ?Sized>(y: &mut [f64], sigma: f64, rng: &mut R) {
    for v in y {
        let g: f64 = rng.sample(StandardNormal);
        *v += sigma * g;
    }
}

/// Exhaustive maximum-likelihood decoding of a reusable constellation.
#[derive(Debug, Clone)]
pub struct MlDecoder {
    constellation: Constellation,
}

impl MlDecoder {
    pub fn new(a: &SignatureMatrix) -> Result<Self> {
        Ok(Self {
            constellation: Constellation::new(a)?,
        })
    }

    pub fn from_constellation(constellation: Constellation) -> Self {
        Self { constellation }
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn decode_index(&self, y: &[f64]) -> Result<usize> {
        if y.len() != self.constellation.m() {
            return Err(Error::DimensionMismatch {
                expected: self.constellation.m(),
                actual: y.len(),
            });
        }
        Ok(self.constellation.nearest(y))
    }

    pub fn decode(&self, y: &[f64]) -> Result<InputVector> {
        Ok(self.constellation.input(self.decode_index(y)?))
    }
}

/// Nearest-constellation-point decision for a single received vector.
pub fn ml_decode(a: &SignatureMatrix, y: &[f64]) -> Result<InputVector> {
    MlDecoder::new(a)?.decode(y)
}
