//! Kronecker enlargement `B = G ⊗ A` of a small signature matrix and the
//! block decoder that goes with it.
//!
//! For a square invertible generator `G` with unit-norm columns, the sum
//! capacity of `B` is at most `k` times that of `A`, with equality exactly
//! when `G` is unitary. Normalized Sylvester–Hadamard matrices are the
//! unitary generators used in practice.
//!
//! Decoding multiplies the received vector by `G^-1 ⊗ I_m`, which turns the
//! enlarged channel into `k` copies of the base channel, and decodes each
//! length-`m` segment independently with exhaustive ML.

use nalgebra::DMatrix;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::criteria::capacity_at;
use crate::error::{Error, Result};
use crate::matrix::{Alphabet, SignatureMatrix};
use crate::mc::derive_seed;
use crate::system::{ChannelParams, InputVector, MlDecoder};

/// Column-norm tolerance for generator validation.
const NORM_TOLERANCE: f64 = 1e-9;

/// Largest enlarged user count accepted by [`compare_capacity`].
pub const MAX_COMPARE_USERS: usize = 16;

/// Kronecker product: block `(i, j)` of the result is `g[(i, j)] * a`.
pub fn kronecker(g: &DMatrix<f64>, a: &DMatrix<f64>) -> DMatrix<f64> {
    let (p, q) = g.shape();
    let (m, n) = a.shape();
    let mut out = DMatrix::zeros(p * m, q * n);
    for i in 0..p {
        for j in 0..q {
            let gij = g[(i, j)];
            for r in 0..m {
                for c in 0..n {
                    out[(i * m + r, j * n + c)] = gij * a[(r, c)];
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Hadamard,
    Custom,
}

/// Square invertible enlargement generator with unit-norm columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    kind: GeneratorKind,
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl Generator {
    /// Validates a custom generator. Columns must already have unit norm.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidGenerator(format!(
                "generator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for (j, col) in matrix.column_iter().enumerate() {
            let norm = col.norm();
            if (norm - 1.0).abs() > NORM_TOLERANCE {
                return Err(Error::InvalidGenerator(format!(
                    "column {j} has norm {norm}, expected 1"
                )));
            }
        }
        let inverse = matrix
            .clone()
            .try_inverse()
            .filter(|inv| inv.iter().all(|v| v.is_finite()))
            .ok_or_else(|| Error::InvalidGenerator("generator is singular".into()))?;
        Ok(Self {
            kind: GeneratorKind::Custom,
            matrix,
            inverse,
        })
    }

    /// Custom generator from row-major entries.
    pub fn from_rows(k: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != k * k {
            return Err(Error::InvalidGenerator(format!(
                "{k}x{k} generator needs {} entries, got {}",
                k * k,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(k, k, entries))
    }

    /// Normalized Sylvester–Hadamard matrix of order `k`, built as
    /// `G_2k = G_2 ⊗ G_k` from `G_1 = [1]`.
    pub fn hadamard(k: usize) -> Result<Self> {
        if k == 0 || !k.is_power_of_two() {
            return Err(Error::InvalidGenerator(format!(
                "Hadamard order must be a power of two, got {k}"
            )));
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let base = DMatrix::from_row_slice(2, 2, &[h, h, h, -h]);
        let mut g = DMatrix::from_element(1, 1, 1.0);
        while g.nrows() < k {
            g = kronecker(&base, &g);
        }
        Ok(Self {
            kind: GeneratorKind::Hadamard,
            inverse: g.transpose(),
            matrix: g,
        })
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    /// Largest entry of `|G^T G - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let k = self.k();
        let gram = self.matrix.transpose() * &self.matrix;
        (gram - DMatrix::<f64>::identity(k, k)).amax()
    }

    pub fn is_unitary(&self, tolerance: f64) -> bool {
        self.unitarity_error() <= tolerance
    }
}

/// Normalized Sylvester–Hadamard generator of order `k`.
pub fn hadamard_generator(k: usize) -> Result<Generator> {
    Generator::hadamard(k)
}

/// A base matrix, its generator and the enlarged matrix `G ⊗ A`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnlargementPlan {
    base: SignatureMatrix,
    generator: Generator,
    enlarged: SignatureMatrix,
}

impl EnlargementPlan {
    pub fn new(base: SignatureMatrix, generator: Generator) -> Result<Self> {
        let product = kronecker(generator.matrix(), &base.to_dmatrix());
        let k = generator.k();
        let entries: Vec<f64> = (0..product.nrows())
            .flat_map(|r| (0..product.ncols()).map(move |c| (r, c)))
            .map(|(r, c)| product[(r, c)])
            .collect();
        let alphabet = if k == 1 && generator.matrix()[(0, 0)] == 1.0 {
            base.alphabet()
        } else {
            Alphabet::Real
        };
        let enlarged = SignatureMatrix::new(k * base.m(), k * base.n(), entries, alphabet)?;
        Ok(Self {
            base,
            generator,
            enlarged,
        })
    }

    pub fn base(&self) -> &SignatureMatrix {
        &self.base
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn enlarged(&self) -> &SignatureMatrix {
        &self.enlarged
    }

    pub fn k(&self) -> usize {
        self.generator.k()
    }

    pub fn to_json(&self) -> String {
        let file = PlanFile {
            base: self.base.clone(),
            k: self.k(),
            generator: self.generator.kind,
            generator_entries: match self.generator.kind {
                GeneratorKind::Hadamard => None,
                GeneratorKind::Custom => Some(
                    (0..self.k())
                        .flat_map(|r| (0..self.k()).map(move |c| (r, c)))
                        .map(|(r, c)| self.generator.matrix[(r, c)])
                        .collect(),
                ),
            },
        };
        serde_json::to_string_pretty(&file).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PlanFile = serde_json::from_str(text)?;
        let generator = match (file.generator, file.generator_entries) {
            (GeneratorKind::Hadamard, _) => Generator::hadamard(file.k)?,
            (GeneratorKind::Custom, Some(entries)) => Generator::from_rows(file.k, &entries)?,
            (GeneratorKind::Custom, None) => {
                return Err(Error::InvalidGenerator(
                    "custom generator without entries".into(),
                ))
            }
        };
        Self::new(file.base, generator)
    }
}

#[derive(Serialize, Deserialize)]
struct PlanFile {
    base: SignatureMatrix,
    k: usize,
    generator: GeneratorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator_entries: Option<Vec<f64>>,
}

/// Enlarges `a` by the normalized Hadamard generator of order `k`.
pub fn enlarge(a: &SignatureMatrix, k: usize) -> Result<EnlargementPlan> {
    EnlargementPlan::new(a.clone(), Generator::hadamard(k)?)
}

/// Block decoder for an enlarged matrix; reuses the base constellation.
#[derive(Debug, Clone)]
pub struct TensorDecoder {
    m: usize,
    inverse: DMatrix<f64>,
    base: MlDecoder,
}

impl TensorDecoder {
    pub fn new(plan: &EnlargementPlan) -> Result<Self> {
        Ok(Self {
            m: plan.base.m(),
            inverse: plan.generator.inverse.clone(),
            base: MlDecoder::new(&plan.base)?,
        })
    }

    /// `(G^-1 ⊗ I_m) y`.
    pub fn transform(&self, y: &[f64]) -> Result<Vec<f64>> {
        let k = self.inverse.nrows();
        if y.len() != k * self.m {
            return Err(Error::DimensionMismatch {
                expected: k * self.m,
                actual: y.len(),
            });
        }
        let mut z = vec![0.0; y.len()];
        for i in 0..k {
            let zi = &mut z[i * self.m..(i + 1) * self.m];
            for j in 0..k {
                let w = self.inverse[(i, j)];
                for (zr, yr) in zi.iter_mut().zip(&y[j * self.m..(j + 1) * self.m]) {
                    *zr += w * yr;
                }
            }
        }
        Ok(z)
    }

    /// Decoded segments `X^1, ..., X^k`.
    pub fn decode_blocks(&self, y: &[f64]) -> Result<Vec<InputVector>> {
        let z = self.transform(y)?;
        z.chunks_exact(self.m)
            .map(|seg| self.base.decode(seg))
            .collect()
    }

    pub fn decode(&self, y: &[f64]) -> Result<InputVector> {
        Ok(InputVector::concat(&self.decode_blocks(y)?))
    }
}

/// Decodes a received vector of the enlarged channel.
pub fn tensor_decode(plan: &EnlargementPlan, y: &[f64]) -> Result<InputVector> {
    TensorDecoder::new(plan)?.decode(y)
}

/// Both sides of the capacity inequality for an enlargement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityComparison {
    /// Estimated sum capacity of `G ⊗ A`.
    pub lhs: f64,
    pub lhs_error: f64,
    /// `k` times the estimated sum capacity of `A`.
    pub rhs: f64,
    pub rhs_error: f64,
    pub combined_error: f64,
    /// `lhs <= rhs + 3 * combined_error`.
    pub holds: bool,
}

/// Estimates both sides of `C(B) <= k C(A)` with independent random streams.
pub fn compare_capacity(
    a: &SignatureMatrix,
    generator: &Generator,
    ch: &ChannelParams,
    mc_samples: usize,
    seed: u64,
) -> Result<CapacityComparison> {
    let k = generator.k();
    if k * a.n() > MAX_COMPARE_USERS {
        return Err(Error::Capacity {
            n: k * a.n(),
            limit: MAX_COMPARE_USERS,
        });
    }
    let plan = EnlargementPlan::new(a.clone(), generator.clone())?;
    let lhs = capacity_at(plan.enlarged(), ch, mc_samples, derive_seed(seed, &[1]))?;
    let base = capacity_at(a, ch, mc_samples, derive_seed(seed, &[2]))?;
    let kf = k as f64;
    let rhs = kf * base.value;
    let rhs_error = kf * base.std_error;
    let combined_error = (lhs.std_error.powi(2) + rhs_error.powi(2)).sqrt();
    Ok(CapacityComparison {
        lhs: lhs.value,
        lhs_error: lhs.std_error,
        rhs,
        rhs_error,
        combined_error,
        holds: lhs.value <= rhs + 3.0 * combined_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderMode {
    /// Exhaustive ML over all `2^(kn)` inputs of the enlarged matrix.
    Naive,
    /// Per-segment exhaustive ML: `k 2^n` comparisons.
    Tensor,
}

/// Number of Euclidean distance evaluations needed to decode one block.
pub fn decoder_complexity(plan: &EnlargementPlan, mode: DecoderMode) -> BigUint {
    let k = plan.k();
    let n = plan.base.n();
    match mode {
        DecoderMode::Naive => BigUint::from(1u8) << (k * n),
        DecoderMode::Tensor => BigUint::from(k) << n,
    }
}
