//! Signature matrices and their JSON file format.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_atomic;

/// Entry alphabet of a signature matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alphabet {
    Real,
    Binary,
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Alphabet::Real => "real",
            Alphabet::Binary => "binary",
        })
    }
}

impl std::str::FromStr for Alphabet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "real" => Ok(Alphabet::Real),
            "binary" => Ok(Alphabet::Binary),
            other => Err(Error::Parse(format!("unknown alphabet `{other}`"))),
        }
    }
}

/// An `m x n` spreading matrix: `m` chips, `n` users, one column per user.
///
/// Entries are stored row-major. Binary matrices hold only `-1.0` and
/// `+1.0`; real matrices hold arbitrary finite values (the optimizers keep
/// them inside their box bounds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixFile", into = "MatrixFile")]
pub struct SignatureMatrix {
    m: usize,
    n: usize,
    alphabet: Alphabet,
    entries: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    m: usize,
    n: usize,
    alphabet: Alphabet,
    entries: Vec<f64>,
}

impl TryFrom<MatrixFile> for SignatureMatrix {
    type Error = Error;

    fn try_from(file: MatrixFile) -> Result<Self> {
        SignatureMatrix::new(file.m, file.n, file.entries, file.alphabet)
    }
}

impl From<SignatureMatrix> for MatrixFile {
    fn from(a: SignatureMatrix) -> Self {
        MatrixFile {
            m: a.m,
            n: a.n,
            alphabet: a.alphabet,
            entries: a.entries,
        }
    }
}

impl SignatureMatrix {
    pub fn new(m: usize, n: usize, entries: Vec<f64>, alphabet: Alphabet) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidMatrix(format!(
                "dimensions must be positive, got {m}x{n}"
            )));
        }
        if entries.len() != m * n {
            return Err(Error::InvalidMatrix(format!(
                "{m}x{n} matrix needs {} entries, got {}",
                m * n,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!("non-finite entry {bad}")));
        }
        if alphabet == Alphabet::Binary {
            if let Some(bad) = entries.iter().find(|&&v| v != 1.0 && v != -1.0) {
                return Err(Error::InvalidMatrix(format!(
                    "binary matrix entry {bad} is not in {{-1, 1}}"
                )));
            }
        }
        Ok(SignatureMatrix {
            m,
            n,
            alphabet,
            entries,
        })
    }

    /// Real matrix from a slice of rows.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows_with(rows, Alphabet::Real)
    }

    pub fn from_rows_with(rows: &[&[f64]], alphabet: Alphabet) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("ragged rows".into()));
        }
        Self::new(m, n, rows.concat(), alphabet)
    }

    pub fn identity(size: usize) -> Self {
        let mut entries = vec![0.0; size * size];
        for i in 0..size {
            entries[i * size + i] = 1.0;
        }
        Self::new(size, size, entries, Alphabet::Real).expect("identity is valid")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.n + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.n..(row + 1) * self.n]
    }

    /// Loading factor `n / m`.
    pub fn loading_factor(&self) -> f64 {
        self.n as f64 / self.m as f64
    }

    pub fn is_overloaded(&self) -> bool {
        self.n > self.m
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum()
    }

    pub fn within_bounds(&self, lower: f64, upper: f64) -> bool {
        self.entries.iter().all(|&v| v >= lower && v <= upper)
    }

    /// `c * A`. The result is real unless `c` is `1`.
    pub fn scaled(&self, c: f64) -> Self {
        let alphabet = if c == 1.0 {
            self.alphabet
        } else {
            Alphabet::Real
        };
        Self {
            entries: self.entries.iter().map(|v| c * v).collect(),
            alphabet,
            ..*self
        }
    }

    /// Reorders columns so that column `j` of the result is column `perm[j]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: perm.len(),
            });
        }
        let mut entries = Vec::with_capacity(self.entries.len());
        for r in 0..self.m {
            for &c in perm {
                entries.push(self.get(r, c));
            }
        }
        Self::new(self.m, self.n, entries, self.alphabet)
    }

    pub fn negate_column(&self, col: usize) -> Self {
        let mut out = self.clone();
        for r in 0..self.m {
            out.entries[r * self.n + col] = -out.entries[r * self.n + col];
        }
        out
    }

    /// `A x` for an arbitrary real vector `x` of length `n`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        Ok((0..self.m)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.m, self.n, &self.entries)
    }

    /// Real matrix from a dense nalgebra matrix; binary if every entry is `±1`.
    pub fn from_dmatrix(d: &DMatrix<f64>) -> Result<Self> {
        let entries: Vec<f64> = (0..d.nrows())
            .flat_map(|r| (0..d.ncols()).map(move |c| d[(r, c)]))
            .collect();
        let alphabet = if entries.iter().all(|&v| v == 1.0 || v == -1.0) {
            Alphabet::Binary
        } else {
            Alphabet::Real
        };
        Self::new(d.nrows(), d.ncols(), entries, alphabet)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serializes")
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>, overwrite: bool) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        write_atomic(path, text.as_bytes(), overwrite)
    }
}

impl fmt::Display for SignatureMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.m {
            let row: Vec<String> = self.row(r).iter().map(|v| format!("{v:8.4}")).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let a = SignatureMatrix::from_rows(&[&[0.5, -0.25, 1.0], &[0.0, 0.125, -1.0]]).unwrap();
        let back = SignatureMatrix::from_json(&a.to_json()).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn rejects_wrong_entry_count() {
        let text = r#"{"m": 2, "n": 2, "alphabet": "real", "entries": [1, 2, 3]}"#;
        assert!(SignatureMatrix::from_json(text).is_err());
    }

    #[test]
    fn rejects_non_binary_entries() {
        let text = r#"{"m": 1, "n": 2, "alphabet": "binary", "entries": [1, 0.5]}"#;
        assert!(SignatureMatrix::from_json(text).is_err());
        let ok = r#"{"m": 1, "n": 2, "alphabet": "binary", "entries": [1, -1]}"#;
        assert_eq!(
            SignatureMatrix::from_json(ok).unwrap().alphabet(),
            Alphabet::Binary
        );
    }

    #[test]
    fn rejects_empty_dimensions() {
        assert!(SignatureMatrix::new(0, 3, vec![], Alphabet::Real).is_err());
    }

    #[test]
    fn loading_factor() {
        let a = SignatureMatrix::new(4, 5, vec![1.0; 20], Alphabet::Binary).unwrap();
        assert_eq!(a.loading_factor(), 1.25);
        assert!(a.is_overloaded());
    }

    #[test]
    fn column_operations() {
        let a = SignatureMatrix::from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]).unwrap();
        let p = a.permute_columns(&[2, 0, 1]).unwrap();
        assert_eq!(p.row(0), &[3.0, 1.0, 2.0]);
        let neg = a.negate_column(1);
        assert_eq!(neg.row(1), &[4.0, -5.0, 6.0]);
    }
}
