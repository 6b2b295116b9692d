//! Candidate maps on the positive definite cone and the certification
//! pipeline.
//!
//! A candidate map is checked stage by stage: norm-of-mean preservation,
//! order isomorphism, fixing of scalar multiples of the identity, the
//! shifted maps `ψ_ε(A) = φ(A + εI) - εI` on the semidefinite cone,
//! projection preservation and homogeneity, ε-independence, the key norm
//! equation against shifted projections, then a case split on `f(0+)`
//! (positive homogeneity for `f(0+) = 0`, orthogonality preservation for
//! `f(0+) > 0`), and finally extraction of the linear Jordan extension with
//! its residuals. Verdicts carry deviations, thresholds and reproducible
//! witnesses.

mod jordan;
mod pipeline;
mod stages;

pub use jordan::{extract_jordan, JordanExtraction, JordanResiduals};
pub use pipeline::{run_pipeline, Overall, PipelineReport};
pub use stages::{
    build_psi_eps, check_case1_homogeneity, check_case2_orthogonality, check_eps_independence,
    check_key_equation, check_norm_preservation, check_order_iso, check_projection_homogeneity,
    check_projection_preservation, check_psi_wellformed, check_unit_scalars, classify_case,
    CaseBranch, PipelineConfig, StageStatus, StageVerdict,
};

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::{
    cone_membership, spectral_apply, symmetrize_product, ConeMembership, HermitianMatrix,
    TolerancePolicy,
};
use crate::sampling::{self, SampleRng};

type CustomEval = Arc<dyn Fn(&HermitianMatrix) -> Result<HermitianMatrix> + Send + Sync>;

#[derive(Clone)]
enum MapKind {
    /// `A -> U A U*`
    JordanUnitary(DMatrix<Complex64>),
    /// `A -> U A^T U*`
    JordanTranspose(DMatrix<Complex64>),
    /// `A -> C inner(A) C` with `C` positive definite
    Congruence { c: HermitianMatrix, inner: Box<PreserverMap> },
    /// `A -> base(A) + noise(A)`, eigenvalues clamped back into the cone
    Perturbed { base: Box<PreserverMap>, eta: f64, seed: u64 },
    /// Arbitrary evaluation; surjectivity cannot be checked and is assumed
    Custom { name: String, eval: CustomEval },
}

/// A candidate map on the positive definite cone of `M_n`.
#[derive(Clone)]
pub struct PreserverMap {
    kind: MapKind,
    dim: usize,
}

impl std::fmt::Debug for PreserverMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PreserverMap({}, dim {})", self.describe(), self.dim)
    }
}

fn check_unitary(u: &DMatrix<Complex64>) -> Result<()> {
    let n = u.nrows();
    if n != u.ncols() || n == 0 {
        return Err(Error::DimensionMismatch { expected: n.max(1), got: u.ncols() });
    }
    let deviation = (u.adjoint() * u - DMatrix::<Complex64>::identity(n, n)).norm();
    if deviation > 1e-10 * (n as f64) {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

impl PreserverMap {
    pub fn identity(dim: usize) -> Self {
        Self { kind: MapKind::JordanUnitary(DMatrix::identity(dim, dim)), dim }
    }

    pub fn jordan_unitary(u: DMatrix<Complex64>) -> Result<Self> {
        check_unitary(&u)?;
        let dim = u.nrows();
        Ok(Self { kind: MapKind::JordanUnitary(u), dim })
    }

    pub fn jordan_transpose(u: DMatrix<Complex64>) -> Result<Self> {
        check_unitary(&u)?;
        let dim = u.nrows();
        Ok(Self { kind: MapKind::JordanTranspose(u), dim })
    }

    pub fn congruence(c: HermitianMatrix, inner: PreserverMap) -> Result<Self> {
        if c.dim() != inner.dim() {
            return Err(Error::DimensionMismatch { expected: inner.dim(), got: c.dim() });
        }
        if cone_membership(&c, &TolerancePolicy::default()) != ConeMembership::Pd {
            return Err(Error::NotPositiveDefinite { lambda_min: c.min_eigenvalue() });
        }
        let dim = c.dim();
        Ok(Self { kind: MapKind::Congruence { c, inner: Box::new(inner) }, dim })
    }

    pub fn perturbed(base: PreserverMap, eta: f64, seed: u64) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::InvalidMapSpec {
                reason: format!("noise scale {eta} must be nonnegative"),
            });
        }
        let dim = base.dim();
        Ok(Self { kind: MapKind::Perturbed { base: Box::new(base), eta, seed }, dim })
    }

    pub fn custom(
        name: impl Into<String>,
        dim: usize,
        eval: impl Fn(&HermitianMatrix) -> Result<HermitianMatrix> + Send + Sync + 'static,
    ) -> Self {
        Self { kind: MapKind::Custom { name: name.into(), eval: Arc::new(eval) }, dim }
    }

    /// Custom map tabulated on a fixed sample set; queries off the set (up
    /// to `eq_tol`) are errors.
    pub fn custom_from_table(
        name: impl Into<String>,
        dim: usize,
        table: Vec<(HermitianMatrix, HermitianMatrix)>,
    ) -> Self {
        let pol = TolerancePolicy::default();
        Self::custom(name, dim, move |a| {
            for (input, output) in &table {
                let scale = 1.0 + input.operator_norm() + a.operator_norm();
                if input.sub(a).operator_norm() <= pol.eq_tol * scale {
                    return Ok(output.clone());
                }
            }
            Err(Error::CustomMapDomain)
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            MapKind::JordanUnitary(_) => "jordan-unitary".into(),
            MapKind::JordanTranspose(_) => "jordan-transpose".into(),
            MapKind::Congruence { inner, .. } => {
                format!("congruence of {}", inner.describe())
            }
            MapKind::Perturbed { base, eta, .. } => {
                format!("perturbed({eta}) {}", base.describe())
            }
            MapKind::Custom { name, .. } => format!("custom:{name}"),
        }
    }

    /// Surjectivity is a hypothesis the pipeline cannot sample; structured
    /// generators are surjective by construction, custom maps are not.
    pub fn surjectivity_assumed(&self) -> bool {
        match &self.kind {
            MapKind::Custom { .. } => true,
            MapKind::Congruence { inner, .. } => inner.surjectivity_assumed(),
            MapKind::Perturbed { base, .. } => base.surjectivity_assumed(),
            _ => false,
        }
    }

    /// Apply to a positive definite argument; the output is kept inside the
    /// cone (perturbed maps clamp eigenvalues at the tolerance floor).
    pub fn apply(&self, a: &HermitianMatrix, pol: &TolerancePolicy) -> Result<HermitianMatrix> {
        if a.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: a.dim() });
        }
        match &self.kind {
            MapKind::JordanUnitary(u) => {
                Ok(symmetrize_product(u * a.as_matrix() * u.adjoint()))
            }
            MapKind::JordanTranspose(u) => {
                Ok(symmetrize_product(u * a.as_matrix().transpose() * u.adjoint()))
            }
            MapKind::Congruence { c, inner } => {
                Ok(c.congruence_product(&inner.apply(a, pol)?))
            }
            MapKind::Perturbed { base, eta, seed } => {
                let value = base.apply(a, pol)?;
                let noise = deterministic_noise(a, *seed, self.dim).scale(*eta);
                let bumped = value.add(&noise);
                // clamp back into the cone so failures localize to the
                // preservation properties rather than domain errors
                let floor = pol.order_tol * (1.0 + bumped.operator_norm());
                spectral_apply(|l| Some(l.max(floor)), &bumped)
            }
            MapKind::Custom { eval, .. } => eval(a),
        }
    }

    /// Build a map from its wire specification. `fallback_dim` supplies the
    /// dimension for kinds that carry no matrix (`identity`).
    pub fn from_spec(spec: &crate::json::MapSpecJson, fallback_dim: Option<usize>) -> Result<Self> {
        match spec.kind.as_str() {
            "identity" => {
                let dim = spec.dim.or(fallback_dim).ok_or_else(|| Error::InvalidMapSpec {
                    reason: "identity map needs a dimension".into(),
                })?;
                Ok(Self::identity(dim))
            }
            "jordan-unitary" => {
                let u = spec.u.as_ref().ok_or_else(|| Error::InvalidMapSpec {
                    reason: "jordan-unitary needs the field `U`".into(),
                })?;
                Self::jordan_unitary(u.to_complex()?)
            }
            "jordan-transpose" => {
                let u = spec.u.as_ref().ok_or_else(|| Error::InvalidMapSpec {
                    reason: "jordan-transpose needs the field `U`".into(),
                })?;
                Self::jordan_transpose(u.to_complex()?)
            }
            "congruence" => {
                let c = spec.c.as_ref().ok_or_else(|| Error::InvalidMapSpec {
                    reason: "congruence needs the field `C`".into(),
                })?;
                let c = c.to_hermitian()?;
                let inner = match &spec.inner {
                    Some(inner) => Self::from_spec(inner, Some(c.dim()))?,
                    None => Self::identity(c.dim()),
                };
                Self::congruence(c, inner)
            }
            "perturbed" => {
                let eta = spec.eta.ok_or_else(|| Error::InvalidMapSpec {
                    reason: "perturbed needs the field `eta`".into(),
                })?;
                let base = match &spec.inner {
                    Some(inner) => Self::from_spec(inner, fallback_dim)?,
                    None => {
                        let dim =
                            spec.dim.or(fallback_dim).ok_or_else(|| Error::InvalidMapSpec {
                                reason: "perturbed needs an inner map or a dimension".into(),
                            })?;
                        Self::identity(dim)
                    }
                };
                Self::perturbed(base, eta, spec.seed.unwrap_or(0))
            }
            other => Err(Error::InvalidMapSpec { reason: format!("unknown map kind `{other}`") }),
        }
    }

    /// The inverse map, when expressible.
    pub fn inverse(&self) -> Option<PreserverMap> {
        match &self.kind {
            MapKind::JordanUnitary(u) => {
                Some(Self { kind: MapKind::JordanUnitary(u.adjoint()), dim: self.dim })
            }
            MapKind::JordanTranspose(u) => {
                Some(Self {
                    kind: MapKind::JordanTranspose(u.transpose()),
                    dim: self.dim,
                })
            }
            MapKind::Congruence { c, inner } => {
                let inner_inv = inner.inverse()?;
                let c_inv = spectral_apply(|l| Some(1.0 / l), c).ok()?;
                let dim = self.dim;
                Some(Self::custom(
                    format!("inverse of congruence of {}", inner.describe()),
                    dim,
                    move |b| {
                        let pol = TolerancePolicy::default();
                        inner_inv.apply(&c_inv.congruence_product(b), &pol)
                    },
                ))
            }
            _ => None,
        }
    }
}

/// Deterministic Hermitian noise derived from the input's bit pattern and
/// the map seed, so perturbed maps are functions.
fn deterministic_noise(a: &HermitianMatrix, seed: u64, dim: usize) -> HermitianMatrix {
    let mut hasher = DefaultHasher::new();
    seed.hash(&mut hasher);
    for z in a.as_matrix().iter() {
        z.re.to_bits().hash(&mut hasher);
        z.im.to_bits().hash(&mut hasher);
    }
    let mut rng = SampleRng::seed_from_u64(hasher.finish());
    sampling::random_hermitian(dim, 1.0, &mut rng)
}

/// The shifted map `ψ_ε(A) = φ(A + εI) - εI` carrying a cone map to the
/// positive semidefinite cone.
pub struct PsiEps<'a> {
    map: &'a PreserverMap,
    eps: f64,
}

impl<'a> PsiEps<'a> {
    pub fn new(map: &'a PreserverMap, eps: f64) -> Result<Self> {
        if eps <= 0.0 || eps.is_nan() {
            return Err(Error::InvalidConfig { reason: format!("epsilon {eps} must be positive") });
        }
        Ok(Self { map, eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn apply(&self, a: &HermitianMatrix, pol: &TolerancePolicy) -> Result<HermitianMatrix> {
        Ok(self.map.apply(&a.shift(self.eps), pol)?.shift(-self.eps))
    }
}
