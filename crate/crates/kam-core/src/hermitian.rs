//! Dense Hermitian matrix values and spectral primitives.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// A dense n x n complex Hermitian matrix.
///
/// Constructors symmetrize the input as `(A + A*)/2` and reject inputs whose
/// asymmetry exceeds `1e-8 * (1 + max |entry|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    entries: DMatrix<Complex64>,
}

impl HermitianMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                got: entries.ncols(),
            });
        }
        if entries.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NotHermitian { asymmetry: f64::INFINITY, tolerance: 0.0 });
        }
        let max_entry = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tolerance = 1e-8 * (1.0 + max_entry);
        let asymmetry = (&entries - entries.adjoint()).norm() / 2.0;
        if asymmetry > tolerance {
            return Err(Error::NotHermitian { asymmetry, tolerance });
        }
        let symmetrized = (&entries + entries.adjoint()).scale(0.5);
        Ok(Self { entries: symmetrized })
    }

    pub fn identity(n: usize) -> Self {
        Self { entries: DMatrix::identity(n, n) }
    }

    pub fn zeros(n: usize) -> Self {
        Self { entries: DMatrix::zeros(n, n) }
    }

    /// Real diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        Self { entries: m }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Operator norm, i.e. the largest eigenvalue magnitude.
    pub fn operator_norm(&self) -> f64 {
        self.eig()
            .eigenvalues
            .iter()
            .map(|l| l.abs())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn scale(&self, t: f64) -> Self {
        Self { entries: self.entries.scale(t) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { entries: &self.entries + &other.entries }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { entries: &self.entries - &other.entries }
    }

    /// `A + t*I`.
    pub fn shift(&self, t: f64) -> Self {
        let n = self.dim();
        Self { entries: &self.entries + DMatrix::<Complex64>::identity(n, n).scale(t) }
    }

    /// Hermitian part of the product `A * B` (used where the exact product is
    /// Hermitian up to rounding).
    pub fn congruence_product(&self, mid: &Self) -> Self {
        let product = &self.entries * &mid.entries * &self.entries;
        symmetrize(product)
    }

    /// Spectral decomposition with eigenvalues sorted ascending.
    ///
    /// Entries are finite and Hermitian by construction, so the symmetric
    /// QR iteration converges; the cap turns a hypothetical stall into a
    /// diagnostic failure instead of a hang.
    pub fn eig(&self) -> SpectralDecomposition {
        let se = nalgebra::SymmetricEigen::try_new(self.entries.clone(), f64::EPSILON, 100_000)
            .unwrap_or_else(|| {
                panic!(
                    "eigensolver stalled after 100000 sweeps on a {}x{} matrix \
                     (norm {:.3e}, frobenius {:.3e})",
                    self.dim(),
                    self.dim(),
                    self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max),
                    self.entries.norm()
                )
            });
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
        let eigenvalues: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
        let mut eigenvectors = DMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            eigenvectors.set_column(col, &se.eigenvectors.column(i));
        }
        SpectralDecomposition { eigenvalues, eigenvectors }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig().eigenvalues[0]
    }
}

fn symmetrize(m: DMatrix<Complex64>) -> HermitianMatrix {
    let sym = (&m + m.adjoint()).scale(0.5);
    HermitianMatrix { entries: sym }
}

/// Symmetrize an almost-Hermitian product without the asymmetry check.
/// Used internally for results of spectral reconstructions.
pub(crate) fn symmetrize_product(m: DMatrix<Complex64>) -> HermitianMatrix {
    symmetrize(m)
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

impl SpectralDecomposition {
    /// `V diag(g(lambda_i)) V*`, failing if `g` rejects an eigenvalue.
    pub fn map_eigenvalues(&self, g: impl Fn(f64) -> Option<f64>) -> Result<HermitianMatrix> {
        let n = self.eigenvalues.len();
        let mut diag = DMatrix::<Complex64>::zeros(n, n);
        for (i, &l) in self.eigenvalues.iter().enumerate() {
            let mapped = g(l).ok_or(Error::ScalarDomain { eigenvalue: l })?;
            diag[(i, i)] = Complex64::new(mapped, 0.0);
        }
        let rebuilt = &self.eigenvectors * diag * self.eigenvectors.adjoint();
        Ok(symmetrize(rebuilt))
    }

    /// Orthonormal basis (as columns) of the span of eigenvectors selected by
    /// the predicate on eigenvalues.
    pub fn eigenbasis_where(&self, keep: impl Fn(f64) -> bool) -> DMatrix<Complex64> {
        let n = self.eigenvalues.len();
        let cols: Vec<usize> = (0..n).filter(|&i| keep(self.eigenvalues[i])).collect();
        let mut basis = DMatrix::zeros(n, cols.len());
        for (j, &i) in cols.iter().enumerate() {
            basis.set_column(j, &self.eigenvectors.column(i));
        }
        basis
    }
}

/// Tolerances for order comparisons, matrix equality and cone membership.
///
/// `psd_floor` is the magnitude of the (negative) eigenvalue floor used for
/// semidefinite cone membership: eigenvalues down to `-psd_floor * (1 + |A|)`
/// still count as zero.
#[derive(Debug, Clone, Copy)]
pub struct TolerancePolicy {
    pub order_tol: f64,
    pub eq_tol: f64,
    pub psd_floor: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self { order_tol: 1e-9, eq_tol: 1e-8, psd_floor: 1e-10 }
    }
}

impl TolerancePolicy {
    pub fn new(order_tol: f64, eq_tol: f64, psd_floor: f64) -> Result<Self> {
        if !(order_tol > 0.0 && eq_tol > 0.0 && psd_floor > 0.0) {
            return Err(Error::InvalidTolerance {
                reason: "all tolerances must be positive".into(),
            });
        }
        if order_tol > 1e-6 {
            return Err(Error::InvalidTolerance {
                reason: format!("order_tol {order_tol:.3e} exceeds 1e-6"),
            });
        }
        Ok(Self { order_tol, eq_tol, psd_floor })
    }
}

/// Where a Hermitian matrix sits relative to the positive cones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeMembership {
    /// Strictly positive definite.
    Pd,
    /// Positive semidefinite but with an eigenvalue at the zero band.
    PsdOnly,
    /// Has an eigenvalue below the semidefinite floor.
    NotPsd,
}

/// A Hermitian idempotent together with its rank.
#[derive(Debug, Clone)]
pub struct Projection {
    matrix: HermitianMatrix,
    rank: usize,
}

impl Projection {
    /// Validates `P^2 = P` within `1e-9 * (1 + |P|)` and that the trace is
    /// within `1e-6` of an integer.
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let m = matrix.as_matrix();
        let idempotency = (m * m - m).norm();
        let scale = 1.0 + matrix.operator_norm();
        if idempotency > 1e-9 * scale {
            return Err(Error::NotProjection {
                reason: format!("P^2 - P has norm {idempotency:.3e}"),
            });
        }
        let trace = matrix.trace();
        let rank = trace.round();
        if (trace - rank).abs() >= 1e-6 {
            return Err(Error::NotProjection {
                reason: format!("trace {trace} is not within 1e-6 of an integer"),
            });
        }
        if rank < -0.5 {
            return Err(Error::NotProjection { reason: format!("negative trace {trace}") });
        }
        Ok(Self { matrix, rank: rank as usize })
    }

    pub fn zero(n: usize) -> Self {
        Self { matrix: HermitianMatrix::zeros(n), rank: 0 }
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: HermitianMatrix::identity(n), rank: n }
    }

    /// Projection onto the span of the given orthonormal columns.
    pub fn from_orthonormal_basis(basis: &DMatrix<Complex64>) -> Self {
        let rank = basis.ncols();
        let matrix = symmetrize(basis * basis.adjoint());
        Self { matrix, rank }
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn complement(&self) -> Self {
        let n = self.dim();
        Self {
            matrix: HermitianMatrix::identity(n).sub(&self.matrix),
            rank: n - self.rank,
        }
    }

    /// Orthonormal basis of the range, recovered from the spectral
    /// decomposition (eigenvalues cluster at 0 and 1).
    pub fn range_basis(&self) -> DMatrix<Complex64> {
        self.matrix.eig().eigenbasis_where(|l| l > 0.5)
    }
}

/// Loewner order: `A <= B` iff `lambda_min(B - A) >= -order_tol * (1 + |A| + |B|)`.
pub fn loewner_leq(a: &HermitianMatrix, b: &HermitianMatrix, pol: &TolerancePolicy) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let diff = b.sub(a);
    let lambda_min = diff.min_eigenvalue();
    let cushion = pol.order_tol * (1.0 + a.operator_norm() + b.operator_norm());
    Ok(lambda_min >= -cushion)
}

/// Classify a Hermitian matrix against the positive cones.
pub fn cone_membership(a: &HermitianMatrix, pol: &TolerancePolicy) -> ConeMembership {
    let lambda_min = a.min_eigenvalue();
    let scale = 1.0 + a.operator_norm();
    if lambda_min > pol.order_tol * scale {
        ConeMembership::Pd
    } else if lambda_min >= -pol.psd_floor * scale {
        ConeMembership::PsdOnly
    } else {
        ConeMembership::NotPsd
    }
}

/// `f(A) = V diag(f(lambda_i)) V*`. The scalar map returns `None` for
/// eigenvalues outside its domain, which surfaces as a domain error naming
/// the offending eigenvalue.
pub fn spectral_apply(
    f: impl Fn(f64) -> Option<f64>,
    a: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    a.eig().map_eigenvalues(f)
}

/// Projection onto the span of eigenvectors with eigenvalue above
/// `order_tol * (1 + |A|)`. The input must be positive semidefinite.
pub fn range_projection(a: &HermitianMatrix, pol: &TolerancePolicy) -> Result<Projection> {
    if cone_membership(a, pol) == ConeMembership::NotPsd {
        return Err(Error::NotPositiveSemidefinite { lambda_min: a.min_eigenvalue() });
    }
    let cut = pol.order_tol * (1.0 + a.operator_norm());
    let basis = a.eig().eigenbasis_where(|l| l > cut);
    Ok(Projection::from_orthonormal_basis(&basis))
}

/// The largest `lambda >= 0` with `lambda * P <= P A^{-1} P`, computed as the
/// least eigenvalue of the compression of `A^{-1}` to the range of `P`.
pub fn max_lambda_compression(
    a: &HermitianMatrix,
    p: &Projection,
    pol: &TolerancePolicy,
) -> Result<f64> {
    if p.rank() == 0 {
        return Err(Error::ZeroProjection);
    }
    if a.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: p.dim() });
    }
    if cone_membership(a, pol) != ConeMembership::Pd {
        return Err(Error::NotPositiveDefinite { lambda_min: a.min_eigenvalue() });
    }
    let a_inv = spectral_apply(|l| Some(1.0 / l), a)?;
    let basis = p.range_basis();
    let compressed = basis.adjoint() * a_inv.as_matrix() * &basis;
    let compressed = symmetrize(compressed);
    Ok(compressed.min_eigenvalue())
}

/// Projection onto the span of eigenvectors of `T` with eigenvalue at or
/// below the threshold. May be zero.
pub fn spectral_projection_below(t: &HermitianMatrix, threshold: f64) -> Projection {
    let basis = t.eig().eigenbasis_where(|l| l <= threshold);
    Projection::from_orthonormal_basis(&basis)
}

/// `|A - B| <= eq_tol * (1 + |A| + |B|)` in operator norm.
pub fn approx_eq(a: &HermitianMatrix, b: &HermitianMatrix, pol: &TolerancePolicy) -> bool {
    let scale = 1.0 + a.operator_norm() + b.operator_norm();
    a.sub(b).operator_norm() <= pol.eq_tol * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{self, SampleRng};
    use approx::assert_relative_eq;

    fn pol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn eig_diagonal_is_sorted() {
        let a = HermitianMatrix::from_diagonal(&[3.0, 1.0]);
        let dec = a.eig();
        assert_relative_eq!(dec.eigenvalues[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(dec.eigenvalues[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn eig_identity() {
        let a = HermitianMatrix::identity(4);
        let dec = a.eig();
        for l in dec.eigenvalues {
            assert_relative_eq!(l, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = SampleRng::seed_from_u64(7);
        for _ in 0..20 {
            let a = sampling::random_hermitian(6, 1.0, &mut rng);
            let dec = a.eig();
            let rebuilt = dec.map_eigenvalues(Some).unwrap();
            let err = a.sub(&rebuilt).operator_norm();
            assert!(err < 1e-10 * (1.0 + a.operator_norm()), "reconstruction error {err}");
            let v = &dec.eigenvectors;
            let gram_err = (v.adjoint() * v - DMatrix::<Complex64>::identity(6, 6)).norm();
            assert!(gram_err < 1e-10, "orthonormality error {gram_err}");
        }
    }

    #[test]
    fn loewner_examples() {
        let id = HermitianMatrix::identity(3);
        let two = id.scale(2.0);
        assert!(loewner_leq(&id, &two, &pol()).unwrap());
        assert!(loewner_leq(&id, &id, &pol()).unwrap());
        let a = HermitianMatrix::from_diagonal(&[1.0, 2.0]);
        let b = HermitianMatrix::from_diagonal(&[2.0, 1.0]);
        assert!(!loewner_leq(&a, &b, &pol()).unwrap());
        assert!(loewner_leq(&a, &a, &pol()).unwrap());
    }

    #[test]
    fn loewner_dimension_mismatch() {
        let a = HermitianMatrix::identity(2);
        let b = HermitianMatrix::identity(3);
        assert!(loewner_leq(&a, &b, &pol()).is_err());
    }

    #[test]
    fn cone_examples() {
        assert_eq!(cone_membership(&HermitianMatrix::identity(3), &pol()), ConeMembership::Pd);
        assert_eq!(
            cone_membership(&HermitianMatrix::from_diagonal(&[1.0, 0.0]), &pol()),
            ConeMembership::PsdOnly
        );
        assert_eq!(
            cone_membership(&HermitianMatrix::from_diagonal(&[1.0, -1.0]), &pol()),
            ConeMembership::NotPsd
        );
    }

    #[test]
    fn spectral_apply_examples() {
        let a = HermitianMatrix::from_diagonal(&[4.0, 9.0]);
        let root = spectral_apply(|l| Some(l.sqrt()), &a).unwrap();
        let expected = HermitianMatrix::from_diagonal(&[2.0, 3.0]);
        assert!(root.sub(&expected).operator_norm() < 1e-12);

        let mut rng = SampleRng::seed_from_u64(3);
        let h = sampling::random_hermitian(5, 1.0, &mut rng);
        let ident = spectral_apply(Some, &h).unwrap();
        assert!(ident.sub(&h).operator_norm() < 1e-11 * (1.0 + h.operator_norm()));

        let squared = spectral_apply(|l| Some(l * l), &h).unwrap();
        let product = symmetrize(h.as_matrix() * h.as_matrix());
        assert!(squared.sub(&product).operator_norm() < 1e-10 * (1.0 + h.operator_norm().powi(2)));
    }

    #[test]
    fn spectral_apply_domain_error_names_eigenvalue() {
        let a = HermitianMatrix::from_diagonal(&[1.0, 0.0]);
        let err = spectral_apply(|l| if l > 0.0 { Some(l.ln()) } else { None }, &a).unwrap_err();
        match err {
            Error::ScalarDomain { eigenvalue } => assert!(eigenvalue.abs() < 1e-12),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn operator_norm_examples() {
        assert_relative_eq!(
            HermitianMatrix::from_diagonal(&[1.0, 3.0]).operator_norm(),
            3.0,
            epsilon = 1e-12
        );
        let t = 0.37;
        assert_relative_eq!(HermitianMatrix::identity(5).scale(t).operator_norm(), t, epsilon = 1e-12);
        // rank-1 xx* with a unit vector has norm 1
        let mut rng = SampleRng::seed_from_u64(11);
        let p = sampling::random_projection(4, 1, &mut rng);
        assert_relative_eq!(p.matrix().operator_norm(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn range_projection_examples() {
        let a = HermitianMatrix::from_diagonal(&[2.0, 0.0]);
        let p = range_projection(&a, &pol()).unwrap();
        assert_eq!(p.rank(), 1);
        let expected = HermitianMatrix::from_diagonal(&[1.0, 0.0]);
        assert!(p.matrix().sub(&expected).operator_norm() < 1e-10);

        let mut rng = SampleRng::seed_from_u64(5);
        let pd = sampling::random_pd(4, &mut rng);
        let full = range_projection(&pd, &pol()).unwrap();
        assert_eq!(full.rank(), 4);
        assert!(full.matrix().sub(&HermitianMatrix::identity(4)).operator_norm() < 1e-10);

        // PA = A for PSD A
        let psd = sampling::random_psd(5, 3, &mut rng);
        let proj = range_projection(&psd, &pol()).unwrap();
        let pa = proj.matrix().as_matrix() * psd.as_matrix();
        let err = (&pa - psd.as_matrix()).norm();
        assert!(err < 1e-8 * (1.0 + psd.operator_norm()), "PA != A, err {err}");
    }

    #[test]
    fn max_lambda_examples() {
        let a = HermitianMatrix::from_diagonal(&[2.0, 3.0]);
        let p = Projection::new(HermitianMatrix::from_diagonal(&[1.0, 0.0])).unwrap();
        let lambda = max_lambda_compression(&a, &p, &pol()).unwrap();
        assert_relative_eq!(lambda, 0.5, epsilon = 1e-12);

        let id = HermitianMatrix::identity(3);
        let mut rng = SampleRng::seed_from_u64(9);
        let q = sampling::random_projection(3, 2, &mut rng);
        assert_relative_eq!(max_lambda_compression(&id, &q, &pol()).unwrap(), 1.0, epsilon = 1e-10);

        let pd = sampling::random_pd(3, &mut rng);
        let full = Projection::identity(3);
        let lam = max_lambda_compression(&pd, &full, &pol()).unwrap();
        let inv = spectral_apply(|l| Some(1.0 / l), &pd).unwrap();
        assert_relative_eq!(lam, inv.min_eigenvalue(), epsilon = 1e-10);
    }

    #[test]
    fn max_lambda_rejects_zero_projection() {
        let a = HermitianMatrix::identity(2);
        let z = Projection::zero(2);
        assert!(matches!(max_lambda_compression(&a, &z, &pol()), Err(Error::ZeroProjection)));
    }

    /// Bisection over `{lambda : lambda P <= P A^{-1} P}` is the independent
    /// oracle for the compression eigenvalue.
    fn bisection_oracle(a: &HermitianMatrix, p: &Projection, pol: &TolerancePolicy) -> f64 {
        let a_inv = spectral_apply(|l| Some(1.0 / l), a).unwrap();
        let pap = symmetrize(
            p.matrix().as_matrix() * a_inv.as_matrix() * p.matrix().as_matrix(),
        );
        let admissible = |lambda: f64| {
            loewner_leq(&p.matrix().scale(lambda), &pap, pol).unwrap()
        };
        let mut lo = 0.0;
        let mut hi = 1.0;
        while admissible(hi) {
            hi *= 2.0;
            if hi > 1e12 {
                return hi;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if admissible(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn max_lambda_matches_bisection_oracle() {
        let mut rng = SampleRng::seed_from_u64(2024);
        for trial in 0..100 {
            let n = 2 + (trial % 5);
            let a = sampling::random_pd(n, &mut rng);
            let rank = 1 + (trial % n);
            let p = sampling::random_projection(n, rank, &mut rng);
            let exact = max_lambda_compression(&a, &p, &pol()).unwrap();
            let searched = bisection_oracle(&a, &p, &pol());
            assert!(
                (exact - searched).abs() < 1e-8 * (1.0 + exact),
                "trial {trial}: exact {exact} vs bisection {searched}"
            );
        }
    }

    #[test]
    fn spectral_projection_below_examples() {
        let t = HermitianMatrix::from_diagonal(&[-1.0, 1.0]);
        let p = spectral_projection_below(&t, -0.5);
        assert_eq!(p.rank(), 1);
        assert!(p.matrix().sub(&HermitianMatrix::from_diagonal(&[1.0, 0.0])).operator_norm() < 1e-12);

        let mut rng = SampleRng::seed_from_u64(17);
        let psd = sampling::random_psd(4, 4, &mut rng);
        assert_eq!(spectral_projection_below(&psd, -1e-3).rank(), 0);

        let t3 = HermitianMatrix::from_diagonal(&[-2.0, -1.0, 3.0]);
        let p3 = spectral_projection_below(&t3, -0.5);
        assert_eq!(p3.rank(), 2);
        // P T P <= threshold * P
        let ptp = symmetrize(p3.matrix().as_matrix() * t3.as_matrix() * p3.matrix().as_matrix());
        assert!(loewner_leq(&ptp, &p3.matrix().scale(-0.5), &pol()).unwrap());
    }

    #[test]
    fn constructor_rejects_asymmetric() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        m[(1, 0)] = Complex64::new(0.0, 0.0);
        assert!(HermitianMatrix::new(m).is_err());
    }

    #[test]
    fn constructor_rejects_nonfinite_entries() {
        let mut m = DMatrix::<Complex64>::identity(2, 2);
        m[(0, 0)] = Complex64::new(f64::NAN, 0.0);
        assert!(HermitianMatrix::new(m).is_err());
        let mut m = DMatrix::<Complex64>::identity(2, 2);
        m[(1, 0)] = Complex64::new(0.0, f64::INFINITY);
        assert!(HermitianMatrix::new(m).is_err());
    }

    #[test]
    fn constructor_symmetrizes_small_noise() {
        let mut rng = SampleRng::seed_from_u64(23);
        let a = sampling::random_hermitian(3, 1.0, &mut rng);
        let mut m = a.as_matrix().clone();
        m[(0, 1)] += Complex64::new(1e-12, -1e-12);
        let b = HermitianMatrix::new(m).unwrap();
        let asym = (b.as_matrix() - b.as_matrix().adjoint()).norm();
        assert!(asym < 1e-15);
    }

    #[test]
    fn projection_validation() {
        assert!(Projection::new(HermitianMatrix::from_diagonal(&[1.0, 0.0])).is_ok());
        assert!(Projection::new(HermitianMatrix::from_diagonal(&[0.5, 0.0])).is_err());
        let p = Projection::new(HermitianMatrix::from_diagonal(&[1.0, 1.0, 0.0])).unwrap();
        assert_eq!(p.rank(), 2);
        assert_eq!(p.complement().rank(), 1);
    }

    #[test]
    fn loewner_transitive_on_chains() {
        let mut rng = SampleRng::seed_from_u64(31);
        for _ in 0..50 {
            let a = sampling::random_hermitian(4, 1.0, &mut rng);
            let p = sampling::random_psd(4, 3, &mut rng);
            let q = sampling::random_psd(4, 2, &mut rng);
            let ap = a.add(&p);
            let apq = ap.add(&q);
            assert!(loewner_leq(&a, &ap, &pol()).unwrap());
            assert!(loewner_leq(&ap, &apq, &pol()).unwrap());
            assert!(loewner_leq(&a, &apq, &pol()).unwrap());
        }
    }

    #[test]
    fn loewner_antisymmetric_up_to_eq_tol() {
        let mut rng = SampleRng::seed_from_u64(37);
        for _ in 0..30 {
            let a = sampling::random_hermitian(4, 1.0, &mut rng);
            let b = a.add(&sampling::random_hermitian(4, 1e-12, &mut rng));
            if loewner_leq(&a, &b, &pol()).unwrap() && loewner_leq(&b, &a, &pol()).unwrap() {
                assert!(approx_eq(&a, &b, &pol()));
            }
        }
    }

    #[test]
    fn monotone_scalar_map_preserves_order_on_commuting_pairs() {
        let mut rng = SampleRng::seed_from_u64(41);
        for _ in 0..50 {
            // commuting pair: same eigenbasis, ordered eigenvalues
            let u = sampling::haar_unitary(4, &mut rng);
            let lows: Vec<f64> = (0..4).map(|_| rng.uniform(0.5, 2.0)).collect();
            let highs: Vec<f64> = lows.iter().map(|&l| l + rng.uniform(0.0, 2.0)).collect();
            let a = sampling::hermitian_with_spectrum(&u, &lows);
            let b = sampling::hermitian_with_spectrum(&u, &highs);
            assert!(loewner_leq(&a, &b, &pol()).unwrap());
            let fa = spectral_apply(|l| Some(l.sqrt()), &a).unwrap();
            let fb = spectral_apply(|l| Some(l.sqrt()), &b).unwrap();
            assert!(loewner_leq(&fa, &fb, &pol()).unwrap());
        }
    }
}
