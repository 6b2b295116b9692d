//! Seeded random generation of Hermitian values, cone elements, projections
//! and unitaries. Everything is deterministic given the seed so trial
//! batteries are reproducible.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::hermitian::{symmetrize_product, HermitianMatrix, Projection};
use crate::monotone::DiscreteMeasure;

/// The RNG used throughout the crate for sampling.
pub struct SampleRng(ChaCha8Rng);

impl SampleRng {
    pub fn seed_from_u64(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.0)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.0.random_range(lo..hi)
    }

    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        (self.uniform(lo.ln(), hi.ln())).exp()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.0.random_range(0..n)
    }

    pub fn complex_normal(&mut self) -> Complex64 {
        Complex64::new(self.normal(), self.normal())
    }
}

/// Square matrix with independent standard complex Gaussian entries.
pub fn ginibre(n: usize, rng: &mut SampleRng) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |_, _| rng.complex_normal())
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase fixing.
pub fn haar_unitary(n: usize, rng: &mut SampleRng) -> DMatrix<Complex64> {
    let g = ginibre(n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    q
}

/// `U diag(spectrum) U*` for a given unitary.
pub fn hermitian_with_spectrum(u: &DMatrix<Complex64>, spectrum: &[f64]) -> HermitianMatrix {
    let n = spectrum.len();
    let mut d = DMatrix::<Complex64>::zeros(n, n);
    for (i, &s) in spectrum.iter().enumerate() {
        d[(i, i)] = Complex64::new(s, 0.0);
    }
    symmetrize_product(u * d * u.adjoint())
}

/// Random Hermitian matrix with entries at the given scale.
pub fn random_hermitian(n: usize, scale: f64, rng: &mut SampleRng) -> HermitianMatrix {
    let g = ginibre(n, rng).scale(scale);
    let sym = (&g + g.adjoint()).scale(0.5);
    HermitianMatrix::new(sym).expect("symmetrized Gaussian is Hermitian")
}

/// Random positive definite matrix with eigenvalues log-uniform in
/// `[0.1, 10]` (condition number at most 100).
pub fn random_pd(n: usize, rng: &mut SampleRng) -> HermitianMatrix {
    random_pd_in(n, 0.1, 10.0, rng)
}

/// Random positive definite matrix with eigenvalues log-uniform in the band.
pub fn random_pd_in(n: usize, lo: f64, hi: f64, rng: &mut SampleRng) -> HermitianMatrix {
    let u = haar_unitary(n, rng);
    let spectrum: Vec<f64> = (0..n).map(|_| rng.log_uniform(lo, hi)).collect();
    hermitian_with_spectrum(&u, &spectrum)
}

/// Random positive semidefinite matrix of the given rank.
pub fn random_psd(n: usize, rank: usize, rng: &mut SampleRng) -> HermitianMatrix {
    let u = haar_unitary(n, rng);
    let spectrum: Vec<f64> = (0..n)
        .map(|i| if i < rank { rng.log_uniform(0.1, 10.0) } else { 0.0 })
        .collect();
    hermitian_with_spectrum(&u, &spectrum)
}

/// Haar-random projection of the given rank.
pub fn random_projection(n: usize, rank: usize, rng: &mut SampleRng) -> Projection {
    let u = haar_unitary(n, rng);
    let basis = u.columns(0, rank).into_owned();
    Projection::from_orthonormal_basis(&basis)
}

/// Pair of mutually orthogonal projections with the given ranks
/// (`rank_p + rank_q <= n`).
pub fn orthogonal_projection_pair(
    n: usize,
    rank_p: usize,
    rank_q: usize,
    rng: &mut SampleRng,
) -> (Projection, Projection) {
    assert!(rank_p + rank_q <= n, "ranks exceed dimension");
    let u = haar_unitary(n, rng);
    let p = Projection::from_orthonormal_basis(&u.columns(0, rank_p).into_owned());
    let q = Projection::from_orthonormal_basis(&u.columns(rank_p, rank_q).into_owned());
    (p, q)
}

/// Random effect element: `0 <= A <= I`, eigenvalues uniform in `[0, 1]`.
pub fn random_effect(n: usize, rng: &mut SampleRng) -> HermitianMatrix {
    let u = haar_unitary(n, rng);
    let spectrum: Vec<f64> = (0..n).map(|_| rng.uniform(0.0, 1.0)).collect();
    hermitian_with_spectrum(&u, &spectrum)
}

/// Random effect whose spectrum is bounded away from `{0, 1}`, so it is
/// decisively not a projection.
pub fn random_non_projection_effect(n: usize, rng: &mut SampleRng) -> HermitianMatrix {
    let u = haar_unitary(n, rng);
    let spectrum: Vec<f64> = (0..n).map(|_| rng.uniform(0.05, 0.95)).collect();
    hermitian_with_spectrum(&u, &spectrum)
}

/// Ordered pair `A <= B` of positive definite matrices (`B = A + PSD bump`).
pub fn ordered_pd_pair(n: usize, rng: &mut SampleRng) -> (HermitianMatrix, HermitianMatrix) {
    let a = random_pd(n, rng);
    let rank = 1 + rng.index(n);
    let bump = random_psd(n, rank, rng);
    let b = a.add(&bump.scale(rng.uniform(0.1, 1.0)));
    (a, b)
}

/// Pair of positive definite matrices that is ordered in neither direction;
/// the difference has an eigenvalue of each sign with magnitude at least
/// `0.05`.
pub fn unordered_pd_pair(n: usize, rng: &mut SampleRng) -> (HermitianMatrix, HermitianMatrix) {
    assert!(n >= 2, "need dimension >= 2 for an unordered pair");
    loop {
        let a = random_pd(n, rng);
        let b = random_pd(n, rng);
        let eig = b.sub(&a).eig();
        let min = eig.eigenvalues[0];
        let max = eig.eigenvalues[n - 1];
        if min < -0.05 && max > 0.05 {
            return (a, b);
        }
    }
}

/// Random Hermitian invertible matrix: eigenvalues with random signs and
/// magnitudes log-uniform in `[0.3, 3]`.
pub fn random_hermitian_invertible(n: usize, rng: &mut SampleRng) -> HermitianMatrix {
    let u = haar_unitary(n, rng);
    let spectrum: Vec<f64> = (0..n)
        .map(|_| {
            let sign = if rng.uniform(0.0, 1.0) < 0.5 { -1.0 } else { 1.0 };
            sign * rng.log_uniform(0.3, 3.0)
        })
        .collect();
    hermitian_with_spectrum(&u, &spectrum)
}

/// Random discrete measure with up to `max_atoms` atoms in `(0, inf)` and
/// optional mass at 0 and at infinity.
pub fn random_measure(max_atoms: usize, rng: &mut SampleRng) -> DiscreteMeasure {
    loop {
        let n_atoms = rng.index(max_atoms + 1);
        let alpha = if rng.uniform(0.0, 1.0) < 0.7 { rng.uniform(0.0, 1.0) } else { 0.0 };
        let beta = if rng.uniform(0.0, 1.0) < 0.7 { rng.uniform(0.0, 1.0) } else { 0.0 };
        let mut atoms: Vec<(f64, f64)> = (0..n_atoms)
            .map(|_| (rng.log_uniform(1e-2, 1e2), rng.uniform(0.05, 1.0)))
            .collect();
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        atoms.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12);
        if alpha + beta + atoms.iter().map(|a| a.1).sum::<f64>() > 1e-6 {
            if let Ok(m) = DiscreteMeasure::new(alpha, beta, atoms) {
                return m;
            }
        }
    }
}
