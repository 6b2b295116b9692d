//! Effect intervals, disjoint pairs and order structure.
//!
//! `E_t` is the interval `{0 <= A <= tI}`; a disjoint pair holds two
//! effects at a common level whose infimum in the positive cone is zero.
//! On matrix algebras the infimum-zero predicate is decidable by range
//! intersection, and pairs of complementary projections are exactly the
//! maximal disjoint pairs under the componentwise order. The module also
//! hosts the criterion that recovers the Loewner order from norms of means
//! against spectral projections of `A^{-1} - B^{-1}`.

use crate::error::{Error, Result};
use crate::hermitian::{
    cone_membership, loewner_leq, range_projection, spectral_apply, spectral_projection_below,
    symmetrize_product, ConeMembership, HermitianMatrix, Projection, TolerancePolicy,
};
use crate::means::{norm_mean_projection, parallel_sum, EpsLadder, MeanDescriptor};

/// An element of `E_t = {0 <= A <= tI}`.
#[derive(Debug, Clone)]
pub struct EffectElement {
    matrix: HermitianMatrix,
    level: f64,
}

impl EffectElement {
    pub fn new(matrix: HermitianMatrix, level: f64, pol: &TolerancePolicy) -> Result<Self> {
        if level <= 0.0 || level.is_nan() {
            return Err(Error::NonPositiveScale { value: level });
        }
        if cone_membership(&matrix, pol) == ConeMembership::NotPsd {
            return Err(Error::NotEffect {
                level,
                reason: format!("lambda_min = {:.3e} < 0", matrix.min_eigenvalue()),
            });
        }
        let cap = HermitianMatrix::identity(matrix.dim()).scale(level);
        if !loewner_leq(&matrix, &cap, pol)? {
            return Err(Error::NotEffect {
                level,
                reason: format!("lambda_max = {:.6} exceeds level", matrix.operator_norm()),
            });
        }
        Ok(Self { matrix, level })
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// A pair in `E_t x E_t` whose infimum in the positive cone is zero.
#[derive(Debug, Clone)]
pub struct DisjointPair {
    first: EffectElement,
    second: EffectElement,
}

impl DisjointPair {
    pub fn new(first: EffectElement, second: EffectElement, pol: &TolerancePolicy) -> Result<Self> {
        if first.level() != second.level() {
            return Err(Error::LevelMismatch { first: first.level(), second: second.level() });
        }
        if first.dim() != second.dim() {
            return Err(Error::DimensionMismatch { expected: first.dim(), got: second.dim() });
        }
        if !inf_is_zero(first.matrix(), second.matrix(), pol)? {
            return Err(Error::NotEffect {
                level: first.level(),
                reason: "components do not have infimum zero".into(),
            });
        }
        Ok(Self { first, second })
    }

    pub fn first(&self) -> &EffectElement {
        &self.first
    }

    pub fn second(&self) -> &EffectElement {
        &self.second
    }

    pub fn level(&self) -> f64 {
        self.first.level()
    }
}

/// Joint rank of the ranges of two orthonormal bases, counted through the
/// kernel of the stacked Gram matrix.
fn joint_rank(
    basis_a: &nalgebra::DMatrix<num_complex::Complex64>,
    basis_b: &nalgebra::DMatrix<num_complex::Complex64>,
) -> usize {
    let ra = basis_a.ncols();
    let rb = basis_b.ncols();
    if ra + rb == 0 {
        return 0;
    }
    let n = basis_a.nrows();
    let mut stacked = nalgebra::DMatrix::zeros(n, ra + rb);
    for j in 0..ra {
        stacked.set_column(j, &basis_a.column(j));
    }
    for j in 0..rb {
        stacked.set_column(ra + j, &basis_b.column(j));
    }
    let gram = symmetrize_product(stacked.adjoint() * stacked);
    gram.eig().eigenvalues.iter().filter(|&&l| l > 1e-9).count()
}

/// `true` iff the ranges of the two positive semidefinite matrices meet
/// only in zero.
///
/// Two routes are computed: the rank route (joint column span of the range
/// bases) and the regularized parallel-sum route
/// `|(A+εI):(B+εI)| -> 0` down the default ladder. Disagreement beyond
/// tolerance is an error carrying both values.
pub fn inf_is_zero(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    pol: &TolerancePolicy,
) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let pa = range_projection(a, pol)?;
    let pb = range_projection(b, pol)?;
    let basis_a = pa.range_basis();
    let basis_b = pb.range_basis();
    let joint = joint_rank(&basis_a, &basis_b);
    let by_rank = joint == pa.rank() + pb.rank();

    let ladder = EpsLadder::default();
    let mut final_norm = f64::INFINITY;
    for &eps in ladder.rungs() {
        let ps = parallel_sum(&a.shift(eps), &b.shift(eps), pol)?;
        final_norm = ps.operator_norm();
    }
    let zero_cap = 1e-3 * (1.0 + a.operator_norm().max(b.operator_norm()));
    let by_parallel_sum = final_norm <= zero_cap;

    if by_rank != by_parallel_sum {
        return Err(Error::RouteDisagreement {
            first_route: "range-rank",
            first: if by_rank { 0.0 } else { 1.0 },
            second_route: "parallel-sum limit norm",
            second: final_norm,
        });
    }
    Ok(by_rank)
}

/// `true` iff the pair consists of level-scaled projections with
/// complementary ranks (and, by pair validity, infimum zero): the
/// finite-dimensional characterization of maximality under the
/// componentwise order on disjoint pairs.
pub fn is_maximal_pair(pair: &DisjointPair, pol: &TolerancePolicy) -> Result<bool> {
    let t = pair.level();
    let n = pair.first().dim();
    let as_projection = |e: &EffectElement| -> Option<Projection> {
        Projection::new(e.matrix().scale(1.0 / t)).ok()
    };
    let (Some(p), Some(q)) = (as_projection(pair.first()), as_projection(pair.second())) else {
        return Ok(false);
    };
    if p.rank() + q.rank() != n {
        return Ok(false);
    }
    inf_is_zero(pair.first().matrix(), pair.second().matrix(), pol)
}

/// Witness that a pair is not maximal: a strictly dominating pair in the
/// componentwise order, built by lifting the first component to its range
/// projection.
pub fn dominating_pair(pair: &DisjointPair, pol: &TolerancePolicy) -> Result<Option<DisjointPair>> {
    let t = pair.level();
    let a = pair.first().matrix();
    let lifted = range_projection(&a.scale(1.0 / t), pol)?.matrix().scale(t);
    if lifted.sub(a).operator_norm() <= pol.eq_tol * (1.0 + a.operator_norm()) {
        return Ok(None);
    }
    let first = EffectElement::new(lifted, t, pol)?;
    let second = pair.second().clone();
    Ok(Some(DisjointPair::new(first, second, pol)?))
}

/// Decide whether a level-1 effect is a projection by the maximality route
/// (complete it with the complement of its range projection and test
/// maximality) and cross-check against the direct spectral test
/// `spec(A) ⊆ {0, 1}`. Disagreement is an error.
pub fn detect_projection(effect: &EffectElement, pol: &TolerancePolicy) -> Result<bool> {
    if (effect.level() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidConfig {
            reason: format!("projection detection runs at level 1, got {}", effect.level()),
        });
    }
    let a = effect.matrix();
    let complement = range_projection(a, pol)?.complement();
    let partner = EffectElement::new(complement.matrix().clone(), 1.0, pol)?;
    let pair = DisjointPair::new(effect.clone(), partner, pol)?;
    let by_maximality = is_maximal_pair(&pair, pol)?;

    let by_spectrum = a
        .eig()
        .eigenvalues
        .iter()
        .all(|&l| l.abs() <= 1e-6 || (l - 1.0).abs() <= 1e-6);

    if by_maximality != by_spectrum {
        return Err(Error::RouteDisagreement {
            first_route: "maximal-pair completion",
            first: if by_maximality { 1.0 } else { 0.0 },
            second_route: "spectrum in {0,1}",
            second: if by_spectrum { 1.0 } else { 0.0 },
        });
    }
    Ok(by_spectrum)
}

/// Scale a disjoint pair from level `s` to level `s * t`.
pub fn scale_pair(pair: &DisjointPair, t: f64, pol: &TolerancePolicy) -> Result<DisjointPair> {
    if t <= 0.0 || t.is_nan() {
        return Err(Error::NonPositiveScale { value: t });
    }
    let level = pair.level() * t;
    let first = EffectElement::new(pair.first().matrix().scale(t), level, pol)?;
    let second = EffectElement::new(pair.second().matrix().scale(t), level, pol)?;
    DisjointPair::new(first, second, pol)
}

/// Outcome of the projection-norm order criterion, with the witness
/// projection when the order fails.
#[derive(Debug, Clone)]
pub struct OrderCheck {
    pub holds: bool,
    /// Projection onto eigenvectors of `T = A^{-1} - B^{-1}` below `-ε`,
    /// together with its ε, where the norm comparison flips.
    pub witness: Option<OrderWitness>,
}

#[derive(Debug, Clone)]
pub struct OrderWitness {
    pub projection: Projection,
    pub epsilon: f64,
    pub norm_first: f64,
    pub norm_second: f64,
}

/// Cluster the eigenvalues of `T` and return one orthonormal eigenbasis
/// column block per cluster.
fn eigenvalue_clusters(t: &HermitianMatrix, pol: &TolerancePolicy) -> Vec<(f64, Vec<usize>)> {
    let eig = t.eig();
    let gap = 1e-8 * (1.0 + t.operator_norm());
    let mut clusters: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        match clusters.last_mut() {
            Some((last, members)) if (l - *last).abs() <= gap => {
                members.push(i);
                *last = l;
            }
            _ => clusters.push((l, vec![i])),
        }
    }
    let _ = pol;
    clusters
}

/// Projections commuting with `T` that the criterion enumerates: all
/// nonempty unions of eigenvalue clusters when there are at most 6
/// clusters, otherwise the family of negative spectral cuts
/// `P = 1_{(-inf, -ε]}(T)` over the eigenvalue gaps.
fn enumerate_spectral_projections(
    t: &HermitianMatrix,
    pol: &TolerancePolicy,
) -> Vec<Projection> {
    let eig = t.eig();
    let clusters = eigenvalue_clusters(t, pol);
    let k = clusters.len();
    let mut projections = Vec::new();
    if k <= 6 {
        for mask in 1u32..(1 << k) {
            let mut indices = Vec::new();
            for (c, (_, members)) in clusters.iter().enumerate() {
                if mask & (1 << c) != 0 {
                    indices.extend_from_slice(members);
                }
            }
            let n = t.dim();
            let mut basis = nalgebra::DMatrix::zeros(n, indices.len());
            for (j, &i) in indices.iter().enumerate() {
                basis.set_column(j, &eig.eigenvectors.column(i));
            }
            projections.push(Projection::from_orthonormal_basis(&basis));
        }
    } else {
        // negative cuts at midpoints of gaps below zero, plus one just below zero
        let mut thresholds: Vec<f64> = clusters
            .windows(2)
            .filter(|w| w[0].0 < 0.0)
            .map(|w| 0.5 * (w[0].0 + w[1].0.min(0.0)))
            .collect();
        thresholds.push(-pol.order_tol * (1.0 + t.operator_norm()));
        for thr in thresholds {
            let p = spectral_projection_below(t, thr);
            if p.rank() > 0 {
                projections.push(p);
            }
        }
    }
    projections
}

/// Order criterion through projection norms: for a symmetric connection
/// with `f(0+) = 0` and positive definite `A, B`,
/// `A <= B` iff `|A σ P| <= |B σ P|` for every projection `P` commuting
/// with `T = A^{-1} - B^{-1}`. Returns the verdict and, when the order
/// fails, a witness cut `P_ε` with `P A^{-1} P + εP <= P B^{-1} P`.
pub fn order_from_projection_norms(
    sigma: &MeanDescriptor,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    pol: &TolerancePolicy,
) -> Result<OrderCheck> {
    if sigma.function().f_at_0() > 1e-12 {
        return Err(Error::Hypothesis { reason: "order criterion requires f(0+) = 0".into() });
    }
    if !sigma.is_symmetric() {
        return Err(Error::Hypothesis { reason: "order criterion requires a symmetric mean".into() });
    }
    let a_inv = spectral_apply(|l| Some(1.0 / l), a)?;
    let b_inv = spectral_apply(|l| Some(1.0 / l), b)?;
    let t = a_inv.sub(&b_inv);

    // The norms are evaluated through the compression formula rather than
    // the raw spectral route: at boundary equality the latter amplifies
    // rounding through the infinite slope of f at 0 (noise near sqrt(eps)),
    // while the compression eigenvalue is smooth in the relevant range.
    let mut holds = true;
    let mut witness = None;
    for p in enumerate_spectral_projections(&t, pol) {
        let norm_a = norm_mean_projection(sigma, a, &p, pol)?;
        let norm_b = norm_mean_projection(sigma, b, &p, pol)?;
        let cushion = pol.order_tol * (1.0 + norm_a.abs() + norm_b.abs());
        if norm_a > norm_b + cushion {
            holds = false;
            // canonical witness: the cut below -ε at half the most negative
            // eigenvalue of T, which certifies P A^{-1} P + εP <= P B^{-1} P
            let most_negative = t.min_eigenvalue();
            let epsilon = 0.5 * (-most_negative);
            let cut = spectral_projection_below(&t, -epsilon);
            let norm_first = norm_mean_projection(sigma, a, &cut, pol)?;
            let norm_second = norm_mean_projection(sigma, b, &cut, pol)?;
            witness = Some(OrderWitness {
                projection: cut,
                epsilon,
                norm_first,
                norm_second,
            });
            break;
        }
    }
    Ok(OrderCheck { holds, witness })
}
