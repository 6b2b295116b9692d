//! Evaluation of Kubo-Ando connections `A σ B` on the matrix cones.
//!
//! Two independent routes are provided. The spectral route
//! `A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}` is canonical when `A` is
//! positive definite. The quadrature route
//! `alpha A + beta B + sum_i w_i (1+t_i)/t_i (t_i A : B)` is exact for
//! measure-backed descriptors and serves as the module's cross-oracle.
//! Boundary arguments are handled by evaluating down a descending ε-ladder,
//! which is monotone nonincreasing by the downward-continuity axiom — a
//! free correctness check asserted on every descent.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::{
    cone_membership, loewner_leq, max_lambda_compression, spectral_apply, symmetrize_product,
    ConeMembership, HermitianMatrix, Projection, TolerancePolicy,
};
use crate::monotone::{h_decomposition, probe_grid, DiscreteMeasure, HPart, RepresentingFunction};

/// Condition-number cap for the spectral route; beyond it the formula
/// degrades quadratically and the evaluation is refused.
pub const CONDITION_CAP: f64 = 1e12;

/// A Kubo-Ando connection: representing function plus, when known, the
/// backing measure.
#[derive(Debug, Clone)]
pub struct MeanDescriptor {
    f: RepresentingFunction,
    measure: Option<DiscreteMeasure>,
    label: String,
}

impl MeanDescriptor {
    /// Descriptor from a representing function alone (no quadrature route).
    pub fn from_function(f: RepresentingFunction, label: impl Into<String>) -> Self {
        Self { f, measure: None, label: label.into() }
    }

    /// Descriptor whose function is induced by the measure; both routes
    /// available.
    pub fn from_measure(measure: DiscreteMeasure, label: impl Into<String>) -> Self {
        let f = RepresentingFunction::from_measure(measure.clone());
        Self { f, measure: Some(measure), label: label.into() }
    }

    /// Attach a known measure to a function, verifying agreement on the
    /// probe grid within `1e-9` relative.
    pub fn with_measure(
        f: RepresentingFunction,
        measure: DiscreteMeasure,
        label: impl Into<String>,
    ) -> Result<Self> {
        let mut deviation: f64 = 0.0;
        for &x in &probe_grid() {
            let from_f = f.eval(x)?;
            let from_m = measure.eval(x)?;
            deviation = deviation.max((from_f - from_m).abs() / (1.0 + from_f.abs()));
        }
        if deviation > 1e-9 {
            return Err(Error::MeasureMismatch { deviation });
        }
        Ok(Self { f, measure: Some(measure), label: label.into() })
    }

    pub fn arithmetic() -> Self {
        Self::with_measure(
            RepresentingFunction::arithmetic(),
            DiscreteMeasure::new(0.5, 0.5, vec![]).expect("valid measure"),
            "arithmetic",
        )
        .expect("arithmetic measure matches its function")
    }

    pub fn geometric() -> Self {
        Self::from_function(RepresentingFunction::geometric(), "geometric")
    }

    pub fn harmonic() -> Self {
        Self::with_measure(
            RepresentingFunction::harmonic(),
            DiscreteMeasure::new(0.0, 0.0, vec![(1.0, 1.0)]).expect("valid measure"),
            "harmonic",
        )
        .expect("harmonic measure matches its function")
    }

    pub fn power(p: f64) -> Result<Self> {
        Ok(Self::from_function(RepresentingFunction::power(p)?, format!("power({p})")))
    }

    pub fn logarithmic() -> Self {
        Self::from_function(RepresentingFunction::logarithmic(), "logarithmic")
    }

    /// The five built-in symmetric means.
    pub fn catalog() -> Vec<Self> {
        vec![
            Self::arithmetic(),
            Self::geometric(),
            Self::harmonic(),
            Self::power(0.5).expect("valid exponent"),
            Self::logarithmic(),
        ]
    }

    /// Resolve a catalog name; `power:<p>` (or the label form `power(<p>)`)
    /// selects a power mean.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "arithmetic" => Ok(Self::arithmetic()),
            "geometric" => Ok(Self::geometric()),
            "harmonic" => Ok(Self::harmonic()),
            "logarithmic" => Ok(Self::logarithmic()),
            other => {
                let exponent = other.strip_prefix("power:").or_else(|| {
                    other.strip_prefix("power(").and_then(|rest| rest.strip_suffix(')'))
                });
                if let Some(p) = exponent {
                    let p: f64 = p.parse().map_err(|_| Error::InvalidConfig {
                        reason: format!("cannot parse power exponent in `{other}`"),
                    })?;
                    Self::power(p)
                } else {
                    Err(Error::InvalidConfig { reason: format!("unknown mean `{other}`") })
                }
            }
        }
    }

    pub fn function(&self) -> &RepresentingFunction {
        &self.f
    }

    pub fn measure(&self) -> Option<&DiscreteMeasure> {
        self.measure.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_symmetric(&self) -> bool {
        self.f.is_symmetric_flag()
    }

    /// The connection of the h-part `h = f - f(0+) - f°(0+) x`, when the
    /// measure has mass on `(0, inf)`.
    pub fn h_connection(&self) -> Option<Self> {
        match h_decomposition(&self.f) {
            HPart::NonAffine(h) => {
                let measure = match &self.measure {
                    Some(m) if !m.atoms().is_empty() => {
                        Some(
                            DiscreteMeasure::new(0.0, 0.0, m.atoms().to_vec())
                                .expect("interior part of a valid measure is valid"),
                        )
                    }
                    _ => None,
                };
                Some(Self { f: h, measure, label: format!("h-part of {}", self.label) })
            }
            HPart::Affine => None,
        }
    }
}

/// Strictly decreasing positive regularization levels for boundary
/// evaluation. Default `(1e-3, 1e-4, 1e-5, 1e-6, 1e-7)`.
#[derive(Debug, Clone)]
pub struct EpsLadder(Vec<f64>);

impl Default for EpsLadder {
    fn default() -> Self {
        Self(vec![1e-3, 1e-4, 1e-5, 1e-6, 1e-7])
    }
}

impl EpsLadder {
    pub fn new(rungs: Vec<f64>) -> Result<Self> {
        if rungs.is_empty()
            || rungs.iter().any(|&e| e <= 0.0 || e.is_nan())
            || rungs.windows(2).any(|w| w[0] <= w[1])
        {
            return Err(Error::InvalidLadder);
        }
        Ok(Self(rungs))
    }

    pub fn rungs(&self) -> &[f64] {
        &self.0
    }

    pub fn last(&self) -> f64 {
        *self.0.last().expect("ladder is nonempty")
    }
}

/// Result of a descent down the ε-ladder.
#[derive(Debug, Clone)]
pub struct LadderResult {
    pub value: HermitianMatrix,
    /// `|last - previous|` in operator norm; 0 for a single-rung ladder.
    pub convergence_estimate: f64,
    /// The ε at which `value` was evaluated.
    pub eps_end: f64,
}

fn require_pd(a: &HermitianMatrix, pol: &TolerancePolicy) -> Result<()> {
    if cone_membership(a, pol) != ConeMembership::Pd {
        return Err(Error::NotPositiveDefinite { lambda_min: a.min_eigenvalue() });
    }
    Ok(())
}

fn require_psd(a: &HermitianMatrix, pol: &TolerancePolicy) -> Result<()> {
    if cone_membership(a, pol) == ConeMembership::NotPsd {
        return Err(Error::NotPositiveSemidefinite { lambda_min: a.min_eigenvalue() });
    }
    Ok(())
}

/// Parallel sum `A : B = (A^{-1} + B^{-1})^{-1}` of positive definite
/// matrices.
pub fn parallel_sum(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    pol: &TolerancePolicy,
) -> Result<HermitianMatrix> {
    require_pd(a, pol)?;
    require_pd(b, pol)?;
    let a_inv = spectral_apply(|l| Some(1.0 / l), a)?;
    let b_inv = spectral_apply(|l| Some(1.0 / l), b)?;
    spectral_apply(|l| Some(1.0 / l), &a_inv.add(&b_inv))
}

/// Spectral route: `A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}` for `A`
/// positive definite and `B` positive semidefinite.
///
/// The conjugated argument `M = A^{-1/2} B A^{-1/2}` has exactly
/// `rank(B)` nonzero eigenvalues; the zero ones belong to `ker(B)` and
/// must take the boundary value `f(0+)`. Evaluating them through a raw
/// eigendecomposition of `M` would expose `f` to rounding noise on exact
/// zeros, which is fatal for functions approaching `f(0+)` slowly (like
/// `(x-1)/ln x`). The evaluation therefore splits `B = W W*` by rank
/// first: the nonzero spectrum of `M` is the spectrum of the positive
/// definite `W* A^{-1} W`, and
/// `A σ B = f(0+) A + sum_i (f(μ_i) - f(0+)) y_i y_i*` with
/// `y_i = W g_i / sqrt(μ_i)` for eigenpairs `(μ_i, g_i)`.
pub fn mean_spectral(
    sigma: &MeanDescriptor,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    pol: &TolerancePolicy,
) -> Result<HermitianMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    require_pd(a, pol)?;
    require_psd(b, pol)?;
    let eig_a = a.eig();
    let lambda_min = eig_a.eigenvalues[0];
    let lambda_max = *eig_a.eigenvalues.last().expect("nonempty spectrum");
    let cond = lambda_max / lambda_min;
    if cond > CONDITION_CAP || cond.is_nan() {
        return Err(Error::IllConditioned { cond, cap: CONDITION_CAP });
    }
    let f = sigma.function();
    let f0 = f.f_at_0();

    let eig_b = b.eig();
    let rank_cut = pol.order_tol * (1.0 + b.operator_norm());
    let kept: Vec<usize> = (0..b.dim())
        .filter(|&i| eig_b.eigenvalues[i] > rank_cut)
        .collect();
    if kept.is_empty() {
        return Ok(a.scale(f0));
    }
    // W = U_r diag(sqrt(b_i)) so that B = W W* up to the rank cut
    let n = a.dim();
    let r = kept.len();
    let mut w = nalgebra::DMatrix::zeros(n, r);
    for (col, &i) in kept.iter().enumerate() {
        let scaled = eig_b.eigenvectors.column(i) * Complex64::from(eig_b.eigenvalues[i].sqrt());
        w.set_column(col, &scaled);
    }
    let a_inv = eig_a.map_eigenvalues(|l| Some(1.0 / l))?;
    let compression = symmetrize_product(w.adjoint() * a_inv.as_matrix() * &w);
    let eig_c = compression.eig();
    // structurally positive; the floor only guards extreme conditioning
    let floor = f64::EPSILON * (1.0 + compression.operator_norm());
    let mut result = a.as_matrix().scale(f0);
    for i in 0..r {
        let mu = eig_c.eigenvalues[i].max(floor);
        let y = &w * eig_c.eigenvectors.column(i) / Complex64::from(mu.sqrt());
        let weight = f.eval(mu)? - f0;
        result += (&y * y.adjoint()).scale(weight);
    }
    Ok(symmetrize_product(result))
}

/// Quadrature route:
/// `alpha A + beta B + sum_i w_i (1+t_i)/t_i (t_i A : B)`.
/// Requires the descriptor to carry its measure and both arguments to be
/// positive definite.
pub fn mean_quadrature(
    sigma: &MeanDescriptor,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    pol: &TolerancePolicy,
) -> Result<HermitianMatrix> {
    let measure = sigma.measure().ok_or_else(|| Error::MissingMeasure {
        label: sigma.label().to_string(),
    })?;
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    require_pd(a, pol)?;
    require_pd(b, pol)?;
    let mut acc = a.scale(measure.alpha()).add(&b.scale(measure.beta()));
    for &(t, w) in measure.atoms() {
        let scaled_a = a.scale(t);
        let ps = parallel_sum(&scaled_a, b, pol)?;
        acc = acc.add(&ps.scale(w * (1.0 + t) / t));
    }
    Ok(acc)
}

/// Boundary evaluation `(A + εI) σ (B + εI)` down the ladder. The iterates
/// must be Loewner-nonincreasing; the final iterate is returned together
/// with the last step size.
pub fn mean_psd_limit(
    sigma: &MeanDescriptor,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    ladder: &EpsLadder,
    pol: &TolerancePolicy,
) -> Result<LadderResult> {
    require_psd(a, pol)?;
    require_psd(b, pol)?;
    let mut previous: Option<HermitianMatrix> = None;
    let mut estimate = 0.0;
    for (step, &eps) in ladder.rungs().iter().enumerate() {
        let current = mean_spectral(sigma, &a.shift(eps), &b.shift(eps), pol)?;
        if let Some(prev) = &previous {
            if !loewner_leq(&current, prev, pol)? {
                let violation = current.sub(prev).eig().eigenvalues.last().copied().unwrap_or(0.0);
                return Err(Error::LadderNotMonotone { step, violation });
            }
            estimate = prev.sub(&current).operator_norm();
        }
        previous = Some(current);
    }
    Ok(LadderResult {
        value: previous.expect("ladder is nonempty"),
        convergence_estimate: estimate,
        eps_end: ladder.last(),
    })
}

/// `|A σ B|`: spectral route when `A` is positive definite, ladder route on
/// the boundary.
pub fn norm_of_mean(
    sigma: &MeanDescriptor,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    ladder: &EpsLadder,
    pol: &TolerancePolicy,
) -> Result<f64> {
    if cone_membership(a, pol) == ConeMembership::Pd {
        Ok(mean_spectral(sigma, a, b, pol)?.operator_norm())
    } else {
        Ok(mean_psd_limit(sigma, a, b, ladder, pol)?.value.operator_norm())
    }
}

/// Projection-norm formula for connections with `f(0+) = 0` that are not
/// affine: `|A σ P| = f°(1 / max{λ >= 0 : λP <= P A^{-1} P})`.
pub fn norm_mean_projection(
    sigma: &MeanDescriptor,
    a: &HermitianMatrix,
    p: &Projection,
    pol: &TolerancePolicy,
) -> Result<f64> {
    if sigma.function().f_at_0() > 1e-12 {
        return Err(Error::Hypothesis {
            reason: format!(
                "projection-norm formula needs f(0+) = 0, but f(0+) = {}",
                sigma.function().f_at_0()
            ),
        });
    }
    if matches!(h_decomposition(sigma.function()), HPart::Affine) {
        return Err(Error::Hypothesis {
            reason: "projection-norm formula needs a non-affine connection".into(),
        });
    }
    if p.rank() == 0 {
        return Err(Error::ZeroProjection);
    }
    let lambda = max_lambda_compression(a, p, pol)?;
    sigma.function().eval_transpose(1.0 / lambda)
}

/// Identity `|A σ P| = f°(|A # P|^2)` for symmetric connections with
/// `f(0+) = 0`, with the inner quantity computed as the compression
/// eigenvalue `|A # P|^2 = 1 / max λ` and the outer norm evaluated by the
/// direct spectral route. Returns `true` when the two sides agree within
/// `1e-6` relative.
pub fn geometric_relation_check(
    sigma: &MeanDescriptor,
    a: &HermitianMatrix,
    p: &Projection,
    pol: &TolerancePolicy,
) -> Result<bool> {
    if sigma.function().f_at_0() > 1e-12 {
        return Err(Error::Hypothesis {
            reason: "identity requires f(0+) = 0".into(),
        });
    }
    let direct = mean_spectral(sigma, a, p.matrix(), pol)?.operator_norm();
    let geo_sq = 1.0 / max_lambda_compression(a, p, pol)?;
    let via_geometric = sigma.function().eval_transpose(geo_sq)?;
    Ok((direct - via_geometric).abs() <= 1e-6 * (1.0 + direct.abs()))
}
