//! Representing functions of Kubo-Ando connections and their discrete
//! Löwner measures.
//!
//! A connection is determined by an operator monotone function `f` on
//! `(0, inf)`; the measure form is
//! `f(x) = alpha + beta*x + sum_i w_i * x(1+t_i)/(x+t_i)`
//! with `alpha` the mass at 0 and `beta` the mass at infinity. The
//! transpose is `f°(x) = x f(1/x)`; a connection is symmetric exactly when
//! `f = f°`. The h-part strips the affine contribution:
//! `h(x) = f(x) - f(0+) - f°(0+) x` is what the mass on `(0, inf)` carries.

use crate::error::{Error, Result};
use crate::hermitian::{loewner_leq, spectral_apply, TolerancePolicy};
use crate::sampling::{self, SampleRng};

/// Finitely supported positive measure on `[0, inf]`: mass `alpha` at 0,
/// `beta` at infinity, plus weighted atoms in `(0, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    alpha: f64,
    beta: f64,
    atoms: Vec<(f64, f64)>,
}

impl DiscreteMeasure {
    pub fn new(alpha: f64, beta: f64, mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) || !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidMeasure {
                reason: "alpha and beta must be finite and nonnegative".into(),
            });
        }
        for &(t, w) in &atoms {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidMeasure {
                    reason: format!("atom location {t} is not in (0, inf)"),
                });
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidMeasure {
                    reason: format!("atom weight {w} is not positive and finite"),
                });
            }
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidMeasure { reason: "duplicate atom locations".into() });
        }
        let mass = alpha + beta + atoms.iter().map(|a| a.1).sum::<f64>();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidMeasure {
                reason: format!("total mass {mass} must be positive and finite"),
            });
        }
        Ok(Self { alpha, beta, atoms })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.alpha + self.beta + self.atoms.iter().map(|a| a.1).sum::<f64>()
    }

    /// `alpha + beta*x + sum_i w_i * x(1+t_i)/(x+t_i)` for `x > 0`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x <= 0.0 || x.is_nan() {
            return Err(Error::FunctionDomain { x });
        }
        let mut value = self.alpha + self.beta * x;
        for &(t, w) in &self.atoms {
            value += w * x * (1.0 + t) / (x + t);
        }
        Ok(value)
    }

    /// Measure of the reversed connection: swaps the masses at 0 and
    /// infinity and sends each atom `(t, w)` to `(1/t, w)`.
    pub fn transpose(&self) -> Self {
        let atoms: Vec<(f64, f64)> = self.atoms.iter().map(|&(t, w)| (1.0 / t, w)).collect();
        Self::new(self.beta, self.alpha, atoms).expect("transpose of a valid measure is valid")
    }
}

/// Closed-form families plus measure-backed functions.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionKind {
    /// `(1 + x)/2`
    Arithmetic,
    /// `sqrt(x)`
    Geometric,
    /// `2x/(1 + x)`
    Harmonic,
    /// `((1 + x^p)/2)^(1/p)` for `p` in `[-1, 1] \ {0}`
    Power(f64),
    /// `(x - 1)/ln(x)`, extended by 1 at `x = 1`
    Logarithmic,
    /// Built from a discrete measure via the integral form
    FromMeasure(DiscreteMeasure),
    /// The h-part of another function: `f(x) - f(0+) - f°(0+) x`
    InteriorPart(Box<RepresentingFunction>),
}

/// An operator monotone function on `(0, inf)` with cached boundary data
/// `f(0+)`, `f°(0+)` and symmetry/normalization flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentingFunction {
    kind: FunctionKind,
    f_at_0: f64,
    fo_at_0: f64,
    symmetric: bool,
    normalized: bool,
}

/// Log-spaced probe grid on which symmetry, concavity and monotonicity are
/// sampled. Symmetric around `x = 1`.
pub fn probe_grid() -> Vec<f64> {
    let decades = 6;
    let per_decade = 4;
    let count = 2 * decades * per_decade + 1;
    (0..count)
        .map(|i| 10f64.powf((i as f64 - (decades * per_decade) as f64) / per_decade as f64))
        .collect()
}

impl RepresentingFunction {
    pub fn arithmetic() -> Self {
        Self {
            kind: FunctionKind::Arithmetic,
            f_at_0: 0.5,
            fo_at_0: 0.5,
            symmetric: true,
            normalized: true,
        }
    }

    pub fn geometric() -> Self {
        Self {
            kind: FunctionKind::Geometric,
            f_at_0: 0.0,
            fo_at_0: 0.0,
            symmetric: true,
            normalized: true,
        }
    }

    pub fn harmonic() -> Self {
        Self {
            kind: FunctionKind::Harmonic,
            f_at_0: 0.0,
            fo_at_0: 0.0,
            symmetric: true,
            normalized: true,
        }
    }

    /// Power mean `((1 + x^p)/2)^(1/p)`. The removable singularity at
    /// `p = 0` is excluded; use [`RepresentingFunction::geometric`] instead.
    pub fn power(p: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&p) || p == 0.0 {
            return Err(Error::InvalidFunction {
                reason: format!("power exponent {p} must lie in [-1, 1] and be nonzero"),
            });
        }
        let f_at_0 = if p > 0.0 { 2f64.powf(-1.0 / p) } else { 0.0 };
        Ok(Self {
            kind: FunctionKind::Power(p),
            f_at_0,
            fo_at_0: f_at_0,
            symmetric: true,
            normalized: true,
        })
    }

    pub fn logarithmic() -> Self {
        Self {
            kind: FunctionKind::Logarithmic,
            f_at_0: 0.0,
            fo_at_0: 0.0,
            symmetric: true,
            normalized: true,
        }
    }

    /// Build from a discrete measure. Boundary data is exact
    /// (`f(0+) = alpha`, `f°(0+) = beta`); the symmetry flag is probed on
    /// the standard grid and normalization means unit total mass.
    pub fn from_measure(measure: DiscreteMeasure) -> Self {
        let f_at_0 = measure.alpha();
        let fo_at_0 = measure.beta();
        let normalized = (measure.total_mass() - 1.0).abs() <= 1e-12;
        let mut rf = Self {
            kind: FunctionKind::FromMeasure(measure),
            f_at_0,
            fo_at_0,
            symmetric: false,
            normalized,
        };
        rf.symmetric = rf.probe_symmetry(&probe_grid()) <= 1e-9;
        rf
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    pub fn f_at_0(&self) -> f64 {
        self.f_at_0
    }

    pub fn fo_at_0(&self) -> f64 {
        self.fo_at_0
    }

    pub fn is_symmetric_flag(&self) -> bool {
        self.symmetric
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Evaluate at `x > 0`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x <= 0.0 || x.is_nan() {
            return Err(Error::FunctionDomain { x });
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: f64) -> f64 {
        match &self.kind {
            FunctionKind::Arithmetic => 0.5 * (1.0 + x),
            FunctionKind::Geometric => x.sqrt(),
            FunctionKind::Harmonic => 2.0 * x / (1.0 + x),
            FunctionKind::Power(p) => ((1.0 + x.powf(*p)) / 2.0).powf(1.0 / p),
            FunctionKind::Logarithmic => {
                let u = x - 1.0;
                if u.abs() < 1e-8 {
                    // series around the removable singularity at x = 1
                    1.0 + u / 2.0 - u * u / 12.0
                } else {
                    u / u.ln_1p()
                }
            }
            FunctionKind::FromMeasure(m) => m.eval(x).expect("x > 0 checked by caller"),
            FunctionKind::InteriorPart(f) => {
                f.eval_unchecked(x) - f.f_at_0 - f.fo_at_0 * x
            }
        }
    }

    /// Evaluate extended to the boundary: eigenvalues inside the rounding
    /// band around zero use the stored `f(0+)`. The band is asymmetric:
    /// `pos_band` covers rounding noise on exact zeros (which matters for
    /// functions like `(x-1)/ln x` whose limit at 0 is approached
    /// logarithmically slowly), `neg_band` covers the semidefinite floor.
    pub fn eval_or_boundary(&self, x: f64, neg_band: f64, pos_band: f64) -> Result<f64> {
        if x > pos_band.abs() {
            Ok(self.eval_unchecked(x))
        } else if x >= -neg_band.abs() {
            Ok(self.f_at_0)
        } else {
            Err(Error::ScalarDomain { eigenvalue: x })
        }
    }

    /// `f°(x) = x f(1/x)`.
    pub fn eval_transpose(&self, x: f64) -> Result<f64> {
        if x <= 0.0 || x.is_nan() {
            return Err(Error::FunctionDomain { x });
        }
        Ok(x * self.eval_unchecked(1.0 / x))
    }

    /// The representing function of the reversed connection. Boundary data
    /// swaps; symmetric functions map to themselves; measure-backed
    /// functions transform their measure exactly.
    pub fn transpose(&self) -> Self {
        match &self.kind {
            FunctionKind::Arithmetic
            | FunctionKind::Geometric
            | FunctionKind::Harmonic
            | FunctionKind::Power(_)
            | FunctionKind::Logarithmic => self.clone(),
            FunctionKind::FromMeasure(m) => Self::from_measure(m.transpose()),
            FunctionKind::InteriorPart(f) => {
                let base = f.transpose();
                Self {
                    kind: FunctionKind::InteriorPart(Box::new(base)),
                    f_at_0: 0.0,
                    fo_at_0: 0.0,
                    symmetric: self.symmetric,
                    normalized: self.normalized,
                }
            }
        }
    }

    /// Max relative symmetry deviation `|f(x) - x f(1/x)| / (1 + f(x))`
    /// over the grid.
    pub fn probe_symmetry(&self, grid: &[f64]) -> f64 {
        grid.iter()
            .map(|&x| {
                let fx = self.eval_unchecked(x);
                let tx = x * self.eval_unchecked(1.0 / x);
                (fx - tx).abs() / (1.0 + fx)
            })
            .fold(0.0, f64::max)
    }
}

/// `true` iff the max relative deviation `|f(x) - x f(1/x)|/(1 + f(x))`
/// over the grid is at most `1e-9`.
pub fn is_symmetric(f: &RepresentingFunction, grid: &[f64]) -> Result<bool> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig { reason: "empty probe grid".into() });
    }
    if grid.iter().any(|&x| x <= 0.0 || x.is_nan()) {
        return Err(Error::InvalidConfig { reason: "probe grid must be positive".into() });
    }
    Ok(f.probe_symmetry(grid) <= 1e-9)
}

/// Outcome of stripping the affine part from a representing function.
#[derive(Debug, Clone)]
pub enum HPart {
    /// `h(x) = f(x) - f(0+) - f°(0+) x`, carried by mass on `(0, inf)`.
    NonAffine(RepresentingFunction),
    /// The measure is concentrated on `{0, inf}`: the function is affine
    /// and the h-part is empty.
    Affine,
}

impl HPart {
    pub fn non_affine(&self) -> Option<&RepresentingFunction> {
        match self {
            HPart::NonAffine(h) => Some(h),
            HPart::Affine => None,
        }
    }
}

/// Strip the affine contribution: returns the h-part, or the distinct
/// `Affine` outcome when the remainder is identically zero on the grid.
pub fn h_decomposition(f: &RepresentingFunction) -> HPart {
    // exact shortcut when the measure is known
    if let FunctionKind::FromMeasure(m) = f.kind() {
        if m.atoms().is_empty() {
            return HPart::Affine;
        }
        let interior = DiscreteMeasure::new(0.0, 0.0, m.atoms().to_vec())
            .expect("atoms of a valid measure form a valid measure");
        return HPart::NonAffine(RepresentingFunction::from_measure(interior));
    }
    let h = RepresentingFunction {
        kind: FunctionKind::InteriorPart(Box::new(f.clone())),
        f_at_0: 0.0,
        fo_at_0: 0.0,
        symmetric: f.symmetric,
        normalized: false,
    };
    let max_on_grid = probe_grid()
        .iter()
        .map(|&x| h.eval_unchecked(x))
        .fold(f64::NEG_INFINITY, f64::max);
    if max_on_grid <= 1e-12 {
        return HPart::Affine;
    }
    let h1 = h.eval_unchecked(1.0);
    let normalized = (h1 - 1.0).abs() <= 1e-12;
    HPart::NonAffine(RepresentingFunction { normalized, ..h })
}

/// Outcome of an empirical operator-monotonicity probe.
#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub trials: usize,
    pub violations: usize,
    /// Largest margin by which `f(A) <= f(B)` failed, as a relative
    /// eigenvalue deficit.
    pub max_violation: f64,
}

/// Generate `trials` ordered pairs `A <= B` of positive definite matrices
/// and count violations of `f(A) <= f(B)` in the Loewner order.
///
/// Takes a raw scalar map so that non-operator-monotone candidates (for
/// which no [`RepresentingFunction`] exists) can be probed too.
pub fn monotonicity_probe(
    f: impl Fn(f64) -> f64,
    dim: usize,
    trials: usize,
    seed: u64,
    pol: &TolerancePolicy,
) -> Result<ProbeReport> {
    if dim > 8 {
        return Err(Error::InvalidConfig { reason: format!("probe dimension {dim} exceeds 8") });
    }
    let mut rng = SampleRng::seed_from_u64(seed);
    let mut violations = 0;
    let mut max_violation: f64 = 0.0;
    for _ in 0..trials {
        let (a, b) = sampling::ordered_pd_pair(dim, &mut rng);
        let fa = spectral_apply(|l| Some(f(l)), &a)?;
        let fb = spectral_apply(|l| Some(f(l)), &b)?;
        if !loewner_leq(&fa, &fb, pol)? {
            violations += 1;
            let deficit = -fb.sub(&fa).min_eigenvalue()
                / (1.0 + fa.operator_norm() + fb.operator_norm());
            max_violation = max_violation.max(deficit);
        }
    }
    Ok(ProbeReport { trials, violations, max_violation })
}

/// The built-in symmetric means: arithmetic, geometric, harmonic,
/// power(1/2) and logarithmic. All are normalized.
pub fn builtin_catalog() -> Vec<RepresentingFunction> {
    vec![
        RepresentingFunction::arithmetic(),
        RepresentingFunction::geometric(),
        RepresentingFunction::harmonic(),
        RepresentingFunction::power(0.5).expect("1/2 is a valid exponent"),
        RepresentingFunction::logarithmic(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn measure_eval_examples() {
        // single atom at t=1 gives the harmonic function 2x/(1+x)
        let m = DiscreteMeasure::new(0.0, 0.0, vec![(1.0, 1.0)]).unwrap();
        assert_relative_eq!(m.eval(3.0).unwrap(), 1.5, epsilon = 1e-15);

        // masses 1/2 at both ends give the arithmetic function (1+x)/2
        let m = DiscreteMeasure::new(0.5, 0.5, vec![]).unwrap();
        for x in [0.1, 1.0, 7.0] {
            assert_relative_eq!(m.eval(x).unwrap(), (1.0 + x) / 2.0, epsilon = 1e-15);
        }

        // f(1) equals the total mass
        let mut rng = SampleRng::seed_from_u64(2);
        for _ in 0..20 {
            let m = sampling::random_measure(5, &mut rng);
            assert_relative_eq!(m.eval(1.0).unwrap(), m.total_mass(), epsilon = 1e-12);
        }
    }

    #[test]
    fn measure_eval_rejects_nonpositive() {
        let m = DiscreteMeasure::new(0.5, 0.5, vec![]).unwrap();
        assert!(m.eval(0.0).is_err());
        assert!(m.eval(-1.0).is_err());
    }

    #[test]
    fn measure_validation() {
        assert!(DiscreteMeasure::new(0.0, 0.0, vec![]).is_err()); // zero mass
        assert!(DiscreteMeasure::new(0.0, 0.0, vec![(0.0, 1.0)]).is_err());
        assert!(DiscreteMeasure::new(0.0, 0.0, vec![(1.0, 0.0)]).is_err());
        assert!(DiscreteMeasure::new(0.0, 0.0, vec![(1.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(DiscreteMeasure::new(-0.1, 0.0, vec![(1.0, 1.0)]).is_err());
    }

    #[test]
    fn boundary_limits_match_masses() {
        let mut rng = SampleRng::seed_from_u64(12);
        for _ in 0..25 {
            let m = sampling::random_measure(5, &mut rng);
            let f = RepresentingFunction::from_measure(m.clone());
            let near_zero = f.eval(1e-12).unwrap();
            assert!(
                (near_zero - m.alpha()).abs() <= 1e-6 * (1.0 + m.alpha()),
                "f(0+) limit {near_zero} vs alpha {}",
                m.alpha()
            );
            let slope_at_inf = f.eval(1e12).unwrap() / 1e12;
            assert!(
                (slope_at_inf - m.beta()).abs() <= 1e-6 * (1.0 + m.beta()),
                "f(x)/x at 1e12 is {slope_at_inf} vs beta {}",
                m.beta()
            );
        }
    }

    #[test]
    fn transpose_examples() {
        // f(x) = x has transpose 1
        let right = RepresentingFunction::from_measure(
            DiscreteMeasure::new(0.0, 1.0, vec![]).unwrap(),
        );
        let left = right.transpose();
        for x in [0.2, 1.0, 5.0] {
            assert_relative_eq!(left.eval(x).unwrap(), 1.0, epsilon = 1e-14);
        }

        // arithmetic and harmonic are fixed by transpose
        for f in [RepresentingFunction::arithmetic(), RepresentingFunction::harmonic()] {
            let t = f.transpose();
            for &x in &probe_grid() {
                assert_relative_eq!(t.eval(x).unwrap(), f.eval(x).unwrap(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn transpose_is_an_involution() {
        let mut rng = SampleRng::seed_from_u64(8);
        for _ in 0..20 {
            let m = sampling::random_measure(4, &mut rng);
            let f = RepresentingFunction::from_measure(m);
            let tt = f.transpose().transpose();
            for &x in &probe_grid() {
                let a = f.eval(x).unwrap();
                let b = tt.eval(x).unwrap();
                assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn transpose_swaps_boundary_data() {
        let m = DiscreteMeasure::new(0.25, 0.5, vec![(2.0, 0.25)]).unwrap();
        let f = RepresentingFunction::from_measure(m);
        let t = f.transpose();
        assert_relative_eq!(t.f_at_0(), f.fo_at_0(), epsilon = 1e-15);
        assert_relative_eq!(t.fo_at_0(), f.f_at_0(), epsilon = 1e-15);
        // g(x) = x f(1/x) pointwise
        for &x in &probe_grid() {
            assert_relative_eq!(
                t.eval(x).unwrap(),
                f.eval_transpose(x).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn symmetry_probe_examples() {
        let grid = probe_grid();
        assert!(is_symmetric(&RepresentingFunction::geometric(), &grid).unwrap());
        assert!(is_symmetric(&RepresentingFunction::power(0.5).unwrap(), &grid).unwrap());
        let right = RepresentingFunction::from_measure(
            DiscreteMeasure::new(0.0, 1.0, vec![]).unwrap(),
        );
        assert!(!is_symmetric(&right, &grid).unwrap());
        let constant = RepresentingFunction::from_measure(
            DiscreteMeasure::new(1.0, 0.0, vec![]).unwrap(),
        );
        assert!(!is_symmetric(&constant, &grid).unwrap());
        for f in builtin_catalog() {
            assert!(is_symmetric(&f, &grid).unwrap(), "{:?} should be symmetric", f.kind());
        }
    }

    #[test]
    fn h_part_examples() {
        // arithmetic: no mass on (0, inf)
        assert!(matches!(h_decomposition(&RepresentingFunction::arithmetic()), HPart::Affine));

        // harmonic: f(0+) = f°(0+) = 0, so h = f
        let harmonic = RepresentingFunction::harmonic();
        match h_decomposition(&harmonic) {
            HPart::NonAffine(h) => {
                for &x in &probe_grid() {
                    assert_relative_eq!(
                        h.eval(x).unwrap(),
                        harmonic.eval(x).unwrap(),
                        max_relative = 1e-12
                    );
                }
            }
            HPart::Affine => panic!("harmonic h-part should be nonempty"),
        }

        // blend of arithmetic and harmonic: h is half the harmonic function
        let blend = RepresentingFunction::from_measure(
            DiscreteMeasure::new(0.25, 0.25, vec![(1.0, 0.5)]).unwrap(),
        );
        match h_decomposition(&blend) {
            HPart::NonAffine(h) => {
                for &x in &probe_grid() {
                    let expected = 0.5 * RepresentingFunction::harmonic().eval(x).unwrap();
                    assert_relative_eq!(h.eval(x).unwrap(), expected, max_relative = 1e-12);
                }
            }
            HPart::Affine => panic!("blend h-part should be nonempty"),
        }

        // power(1/2): h(x) = sqrt(x)/2
        let pow = RepresentingFunction::power(0.5).unwrap();
        match h_decomposition(&pow) {
            HPart::NonAffine(h) => {
                assert_relative_eq!(h.eval(4.0).unwrap(), 1.0, epsilon = 1e-12);
                assert_relative_eq!(h.eval(0.01).unwrap(), 0.05, epsilon = 1e-12);
            }
            HPart::Affine => panic!("power(1/2) h-part should be nonempty"),
        }
    }

    #[test]
    fn h_part_reproduces_f() {
        let mut rng = SampleRng::seed_from_u64(21);
        for _ in 0..20 {
            let m = sampling::random_measure(5, &mut rng);
            let f = RepresentingFunction::from_measure(m);
            let h = h_decomposition(&f);
            for &x in &probe_grid() {
                let fx = f.eval(x).unwrap();
                let rebuilt = f.f_at_0()
                    + f.fo_at_0() * x
                    + h.non_affine().map_or(0.0, |h| h.eval(x).unwrap());
                assert!(
                    (fx - rebuilt).abs() <= 1e-12 * (1.0 + fx),
                    "x={x}: f={fx}, rebuilt={rebuilt}"
                );
            }
        }
    }

    #[test]
    fn h_part_vanishes_at_zero_and_stays_monotone() {
        for f in builtin_catalog() {
            if let HPart::NonAffine(h) = h_decomposition(&f) {
                let cap = if matches!(f.kind(), FunctionKind::Logarithmic) {
                    2.0 / 1e-12f64.ln().abs()
                } else {
                    1e-6
                };
                assert!(h.eval(1e-12).unwrap() <= cap);
                let grid = probe_grid();
                for w in grid.windows(2) {
                    let lo = h.eval(w[0]).unwrap();
                    let hi = h.eval(w[1]).unwrap();
                    assert!(hi >= lo - 1e-12 * (1.0 + hi.abs()));
                }
                assert_eq!(h.is_symmetric_flag(), f.is_symmetric_flag());
            }
        }
    }

    #[test]
    fn catalog_values() {
        let catalog = builtin_catalog();
        for f in &catalog {
            assert_relative_eq!(f.eval(1.0).unwrap(), 1.0, epsilon = 1e-12);
            assert!(f.is_normalized());
            assert!(f.is_symmetric_flag());
        }
        let harmonic = RepresentingFunction::harmonic();
        assert_relative_eq!(harmonic.eval(2.0).unwrap(), 4.0 / 3.0, epsilon = 1e-15);

        // power(-1) coincides with harmonic
        let p = RepresentingFunction::power(-1.0).unwrap();
        for &x in &probe_grid() {
            assert_relative_eq!(
                p.eval(x).unwrap(),
                harmonic.eval(x).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn catalog_boundary_data_matches_numerical_limit() {
        for f in builtin_catalog() {
            let limit = f.eval(1e-12).unwrap();
            if matches!(f.kind(), FunctionKind::Logarithmic) {
                // converges like 1/ln(1/x); check the asymptotic envelope
                assert!(limit > 0.0 && limit <= 2.0 / 1e-12f64.ln().abs());
                assert!(f.eval(1e-8).unwrap() > f.eval(1e-10).unwrap());
                continue;
            }
            assert!(
                (limit - f.f_at_0()).abs() <= 1e-6 * (1.0 + f.f_at_0()),
                "{:?}: limit {limit} vs stored {}",
                f.kind(),
                f.f_at_0()
            );
        }
        // power(1/2) has f(0+) = 1/4
        assert_relative_eq!(
            RepresentingFunction::power(0.5).unwrap().f_at_0(),
            0.25,
            epsilon = 1e-15
        );
    }

    #[test]
    fn logarithmic_is_stable_near_one() {
        let f = RepresentingFunction::logarithmic();
        assert_relative_eq!(f.eval(1.0).unwrap(), 1.0, epsilon = 1e-15);
        for u in [1e-12, 1e-9, 1e-7, 1e-5] {
            let v = f.eval(1.0 + u).unwrap();
            assert!((v - (1.0 + u / 2.0)).abs() < 1e-10, "u={u}: {v}");
        }
        assert_relative_eq!(f.eval(std::f64::consts::E).unwrap(), std::f64::consts::E - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn concavity_and_monotonicity_on_grid() {
        let grid = probe_grid();
        let mut rng = SampleRng::seed_from_u64(33);
        let mut functions = builtin_catalog();
        for _ in 0..10 {
            functions.push(RepresentingFunction::from_measure(sampling::random_measure(
                5, &mut rng,
            )));
        }
        for f in &functions {
            for w in grid.windows(2) {
                let lo = f.eval(w[0]).unwrap();
                let hi = f.eval(w[1]).unwrap();
                assert!(lo > 0.0);
                assert!(hi >= lo - 1e-12 * (1.0 + hi), "{:?} not nondecreasing", f.kind());
            }
            // chord test for concavity
            for w in grid.windows(3) {
                let (x0, x1, x2) = (w[0], w[1], w[2]);
                let (f0, f1, f2) = (
                    f.eval(x0).unwrap(),
                    f.eval(x1).unwrap(),
                    f.eval(x2).unwrap(),
                );
                let chord = f0 + (f2 - f0) * (x1 - x0) / (x2 - x0);
                assert!(
                    f1 >= chord - 1e-9 * (1.0 + f1.abs()),
                    "{:?} not concave at {x1}",
                    f.kind()
                );
            }
        }
    }

    #[test]
    fn probe_flags_operator_monotone_and_rejects_square() {
        let pol = TolerancePolicy::default();
        let geometric = RepresentingFunction::geometric();
        let report =
            monotonicity_probe(|x| geometric.eval(x).unwrap(), 4, 200, 7, &pol).unwrap();
        assert_eq!(report.violations, 0, "geometric probe: {report:?}");

        let report = monotonicity_probe(|x| x * x, 2, 200, 7, &pol).unwrap();
        assert!(report.violations > 0, "x^2 is not operator monotone: {report:?}");
    }

    #[test]
    fn probe_equal_pairs_never_violate() {
        // A = B pairs: f(A) <= f(A) trivially
        let pol = TolerancePolicy::default();
        let mut rng = SampleRng::seed_from_u64(3);
        for _ in 0..20 {
            let a = sampling::random_pd(3, &mut rng);
            let fa = spectral_apply(|l| Some(l * l), &a).unwrap();
            assert!(loewner_leq(&fa, &fa, &pol).unwrap());
        }
    }
}
