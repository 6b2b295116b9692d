//! Extraction of the linear Jordan extension.
//!
//! The shifted map ψ is tabulated on a spanning set of rank-1 projections
//! (the diagonal units together with the real and imaginary two-index
//! combinations), the unique real-linear extension on Hermitian space is
//! solved for, and the candidate is verified on fresh samples: it must
//! reproduce the map on the cone, fix the identity, commute with squaring
//! and be bijective.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::{symmetrize_product, HermitianMatrix, TolerancePolicy};
use crate::sampling::{self, SampleRng};

use super::{PreserverMap, PsiEps};

/// Orthonormal real basis of Hermitian `n x n` space under the trace inner
/// product: diagonal units, symmetric and antisymmetric two-index blocks.
fn hermitian_basis(n: usize) -> Vec<DMatrix<Complex64>> {
    let mut basis = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        m[(i, i)] = Complex64::new(1.0, 0.0);
        basis.push(m);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut m = DMatrix::<Complex64>::zeros(n, n);
            m[(i, j)] = Complex64::new(s, 0.0);
            m[(j, i)] = Complex64::new(s, 0.0);
            basis.push(m);
            let mut m = DMatrix::<Complex64>::zeros(n, n);
            m[(i, j)] = Complex64::new(0.0, s);
            m[(j, i)] = Complex64::new(0.0, -s);
            basis.push(m);
        }
    }
    basis
}

fn coords(h: &HermitianMatrix, basis: &[DMatrix<Complex64>]) -> DVector<f64> {
    DVector::from_iterator(
        basis.len(),
        basis.iter().map(|b| (b * h.as_matrix()).trace().re),
    )
}

fn from_coords(c: &DVector<f64>, basis: &[DMatrix<Complex64>], n: usize) -> HermitianMatrix {
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for (k, b) in basis.iter().enumerate() {
        m += b.scale(c[k]);
    }
    symmetrize_product(m)
}

/// Rank-1 projections spanning Hermitian space over the reals: `e_i e_i*`,
/// and `v v*` for `v = (e_i + e_j)/sqrt(2)` and `v = (e_i - i e_j)/sqrt(2)`.
fn spanning_projections(n: usize) -> Vec<HermitianMatrix> {
    let mut set = Vec::with_capacity(n * n);
    let unit = |i: usize| {
        let mut v = DVector::<Complex64>::zeros(n);
        v[i] = Complex64::new(1.0, 0.0);
        v
    };
    for i in 0..n {
        let v = unit(i);
        set.push(symmetrize_product(&v * v.adjoint()));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (unit(i) + unit(j)).scale(s);
            set.push(symmetrize_product(&v * v.adjoint()));
            let v = (unit(i) - unit(j) * Complex64::new(0.0, 1.0)).scale(s);
            set.push(symmetrize_product(&v * v.adjoint()));
        }
    }
    set
}

/// Residuals of the verification of an extracted linear extension.
#[derive(Debug, Clone, Serialize)]
pub struct JordanResiduals {
    /// Worst relative `|J(A) - φ(A)|` over fresh positive definite samples.
    pub reproduction: f64,
    /// `|J(I) - I|`.
    pub unital: f64,
    /// Worst relative `|J(A^2) - J(A)^2|` over fresh Hermitian samples.
    pub square: f64,
    /// Condition number of the matrix of `J` (bijectivity indicator).
    pub condition: f64,
}

/// The real-linear extension of ψ on Hermitian space.
#[derive(Debug, Clone)]
pub struct JordanExtraction {
    matrix: DMatrix<f64>,
    dim: usize,
    pub residuals: JordanResiduals,
}

impl JordanExtraction {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Matrix of `J` in the orthonormal Hermitian coordinate basis.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, h: &HermitianMatrix) -> Result<HermitianMatrix> {
        if h.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: h.dim() });
        }
        let basis = hermitian_basis(self.dim);
        let image = &self.matrix * coords(h, &basis);
        Ok(from_coords(&image, &basis, self.dim))
    }
}

/// Tabulate ψ on the spanning projections, solve for the linear extension
/// and verify it on fresh samples.
pub fn extract_jordan(
    map: &PreserverMap,
    eps: f64,
    trials: usize,
    seed: u64,
    pol: &TolerancePolicy,
) -> Result<JordanExtraction> {
    let n = map.dim();
    let basis = hermitian_basis(n);
    let psi = PsiEps::new(map, eps)?;
    let span = spanning_projections(n);
    let d = n * n;

    let mut source = DMatrix::<f64>::zeros(d, d);
    let mut image = DMatrix::<f64>::zeros(d, d);
    for (k, s) in span.iter().enumerate() {
        source.set_column(k, &coords(s, &basis));
        image.set_column(k, &coords(&psi.apply(s, pol)?, &basis));
    }
    // J * source = image, solved through the transposed system
    let j_t = source
        .transpose()
        .lu()
        .solve(&image.transpose())
        .ok_or_else(|| Error::InvalidMapSpec {
            reason: "spanning projections produced a singular tabulation".into(),
        })?;
    let j = j_t.transpose();

    let svd = j.clone().svd(false, false);
    let s_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let s_min = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };

    let extraction = JordanExtraction {
        matrix: j,
        dim: n,
        residuals: JordanResiduals { reproduction: 0.0, unital: 0.0, square: 0.0, condition },
    };

    // verification on fresh samples
    let mut rng = SampleRng::seed_from_u64(seed ^ 0xA00B);
    let mut reproduction: f64 = 0.0;
    for _ in 0..trials {
        let a = sampling::random_pd(n, &mut rng);
        let by_linear = extraction.apply(&a)?;
        let by_map = map.apply(&a, pol)?;
        reproduction = reproduction.max(
            by_linear.sub(&by_map).operator_norm() / (1.0 + by_map.operator_norm()),
        );
    }
    let unital = extraction
        .apply(&HermitianMatrix::identity(n))?
        .sub(&HermitianMatrix::identity(n))
        .operator_norm();
    let mut square: f64 = 0.0;
    for _ in 0..trials {
        let h = sampling::random_hermitian(n, 1.0, &mut rng);
        let h_squared = symmetrize_product(h.as_matrix() * h.as_matrix());
        let lhs = extraction.apply(&h_squared)?;
        let jh = extraction.apply(&h)?;
        let rhs = symmetrize_product(jh.as_matrix() * jh.as_matrix());
        square = square.max(lhs.sub(&rhs).operator_norm() / (1.0 + rhs.operator_norm()));
    }

    Ok(JordanExtraction {
        residuals: JordanResiduals { reproduction, unital, square, condition },
        ..extraction
    })
}
