//! Wire schemas for matrices, measures and map specifications.
//!
//! Matrix schema: `{"n": int, "re": [[...]], "im": [[...]]}` with row-major
//! `n x n` blocks. Measure schema:
//! `{"alpha": float, "beta": float, "atoms": [[t, w], ...]}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::monotone::DiscreteMeasure;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_complex(m: &DMatrix<Complex64>) -> Self {
        let n = m.nrows();
        let re = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect();
        Self { n, re, im }
    }

    pub fn from_hermitian(m: &HermitianMatrix) -> Self {
        Self::from_complex(m.as_matrix())
    }

    /// Parse into a general complex matrix, validating the shape.
    pub fn to_complex(&self) -> Result<DMatrix<Complex64>> {
        let n = self.n;
        if n == 0 {
            return Err(Error::Schema { reason: "matrix dimension must be at least 1".into() });
        }
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(Error::Schema {
                reason: format!("re/im blocks must both be {n} x {n} row-major"),
            });
        }
        Ok(DMatrix::from_fn(n, n, |i, j| Complex64::new(self.re[i][j], self.im[i][j])))
    }

    /// Parse into a Hermitian matrix (symmetrizing, rejecting asymmetry
    /// beyond tolerance).
    pub fn to_hermitian(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::new(self.to_complex()?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureJson {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub atoms: Vec<(f64, f64)>,
}

impl MeasureJson {
    pub fn from_measure(m: &DiscreteMeasure) -> Self {
        Self { alpha: m.alpha(), beta: m.beta(), atoms: m.atoms().to_vec() }
    }

    pub fn to_measure(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(self.alpha, self.beta, self.atoms.clone())
    }
}

/// Candidate-map specification accepted by the preserver pipeline.
///
/// Kinds: `identity`, `jordan-unitary` (field `U`), `jordan-transpose`
/// (field `U`), `congruence` (field `C` plus `inner`), `perturbed`
/// (fields `eta`, `seed` plus `inner`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapSpecJson {
    pub kind: String,
    #[serde(rename = "U", skip_serializing_if = "Option::is_none")]
    pub u: Option<MatrixJson>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub c: Option<MatrixJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner: Option<Box<MapSpecJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Dimension, required only for `identity`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}
