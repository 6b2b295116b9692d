//! Reusable property batteries behind the CLI verify suites and the
//! acceptance tests.
//!
//! Each battery samples deterministically from its seed and returns one
//! record per check with the worst deviation and, on failure, a witness
//! holding the full inputs so the case can be replayed.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hermitian::{
    loewner_leq, max_lambda_compression, spectral_apply, symmetrize_product, HermitianMatrix,
    Projection, TolerancePolicy,
};
use crate::json::{MatrixJson, MeasureJson};
use crate::means::{
    geometric_relation_check, mean_psd_limit, mean_quadrature, mean_spectral,
    norm_mean_projection, EpsLadder, MeanDescriptor,
};
use crate::monotone::{h_decomposition, probe_grid, HPart};
use crate::order::{
    detect_projection, dominating_pair, inf_is_zero, is_maximal_pair, order_from_projection_norms,
    scale_pair, DisjointPair, EffectElement,
};
use crate::sampling::{self, SampleRng};

/// One verified property with its worst observed deviation.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub statement: String,
    pub pass: bool,
    pub trials: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<CheckRecord>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Tracks the worst deviation of one check across its trials.
struct Check {
    id: &'static str,
    statement: &'static str,
    tolerance: f64,
    trials: usize,
    max_deviation: f64,
    witness: Option<Value>,
}

impl Check {
    fn new(id: &'static str, statement: &'static str, tolerance: f64) -> Self {
        Self { id, statement, tolerance, trials: 0, max_deviation: 0.0, witness: None }
    }

    fn record(&mut self, deviation: f64, witness: impl FnOnce() -> Value) {
        self.trials += 1;
        if deviation > self.max_deviation {
            self.max_deviation = deviation;
            if deviation > self.tolerance {
                self.witness = Some(witness());
            }
        }
    }

    fn finish(self) -> CheckRecord {
        let pass = self.max_deviation <= self.tolerance;
        CheckRecord {
            id: self.id.to_string(),
            statement: self.statement.to_string(),
            pass,
            trials: self.trials,
            max_deviation: self.max_deviation,
            tolerance: self.tolerance,
            witness: if pass { None } else { self.witness },
        }
    }
}

fn mean_name(sigma: &MeanDescriptor) -> Value {
    match sigma.measure() {
        Some(m) if MeanDescriptor::by_name(sigma.label()).is_err() => {
            json!({"measure": MeasureJson::from_measure(m)})
        }
        _ => json!(sigma.label()),
    }
}

fn witness(check: &str, mean: Option<&MeanDescriptor>, inputs: Value, data: Value) -> Value {
    let mut obj = serde_json::Map::new();
    obj.insert("check".into(), json!(check));
    if let Some(sigma) = mean {
        obj.insert("mean".into(), mean_name(sigma));
    }
    obj.insert("inputs".into(), inputs);
    obj.insert("data".into(), data);
    Value::Object(obj)
}

fn mat(m: &HermitianMatrix) -> Value {
    serde_json::to_value(MatrixJson::from_hermitian(m)).expect("matrix serializes")
}

/// Connection axioms plus the norm fixed point `|A σ A| = |A|`.
pub fn axiom_suite(
    sigma: &MeanDescriptor,
    dim: usize,
    trials: usize,
    seed: u64,
    pol: &TolerancePolicy,
) -> Result<SuiteReport> {
    let mut rng = SampleRng::seed_from_u64(seed);
    let mut monotonicity = Check::new(
        "axioms.monotonicity",
        "A <= C and B <= D imply (A s B) <= (C s D)",
        pol.order_tol,
    );
    let mut transformer = Check::new(
        "axioms.transformer-inequality",
        "C (A s B) C <= (C A C) s (C B C) for Hermitian invertible C",
        pol.order_tol,
    );
    let mut transformer_eq = Check::new(
        "axioms.transformer-equality-pd",
        "C (A s B) C = (C A C) s (C B C) for positive definite C",
        pol.eq_tol,
    );
    let mut symmetry = Check::new(
        "axioms.symmetry",
        "A s B = B s A for a symmetric mean",
        1e-9,
    );
    let mut homogeneity = Check::new(
        "axioms.positive-homogeneity",
        "(tA) s (tB) = t (A s B) for t in {0.1, 2, 10}",
        pol.eq_tol,
    );
    let mut fixed_point = Check::new(
        "axioms.norm-fixed-point",
        "|A s A| = |A|",
        pol.order_tol,
    );

    for trial in 0..trials {
        let (a, c) = sampling::ordered_pd_pair(dim, &mut rng);
        let (b, d) = sampling::ordered_pd_pair(dim, &mut rng);
        let ab = mean_spectral(sigma, &a, &b, pol)?;
        let cd = mean_spectral(sigma, &c, &d, pol)?;
        let scale = 1.0 + ab.operator_norm() + cd.operator_norm();
        let deficit = (-cd.sub(&ab).min_eigenvalue()).max(0.0) / scale;
        monotonicity.record(deficit, || {
            witness(
                "axioms.monotonicity",
                Some(sigma),
                json!({"a": mat(&a), "b": mat(&b), "c": mat(&c), "d": mat(&d)}),
                json!({"trial": trial}),
            )
        });

        let t = sampling::random_hermitian_invertible(dim, &mut rng);
        let lhs = t.congruence_product(&ab);
        let rhs = mean_spectral(sigma, &t.congruence_product(&a), &t.congruence_product(&b), pol)?;
        let scale = 1.0 + lhs.operator_norm() + rhs.operator_norm();
        let deficit = (-rhs.sub(&lhs).min_eigenvalue()).max(0.0) / scale;
        transformer.record(deficit, || {
            witness(
                "axioms.transformer-inequality",
                Some(sigma),
                json!({"a": mat(&a), "b": mat(&b), "c": mat(&t)}),
                json!({"trial": trial}),
            )
        });

        let t_pd = sampling::random_pd_in(dim, 0.3, 3.0, &mut rng);
        let lhs = t_pd.congruence_product(&ab);
        let rhs = mean_spectral(
            sigma,
            &t_pd.congruence_product(&a),
            &t_pd.congruence_product(&b),
            pol,
        )?;
        let deviation = lhs.sub(&rhs).operator_norm() / (1.0 + lhs.operator_norm());
        transformer_eq.record(deviation, || {
            witness(
                "axioms.transformer-equality-pd",
                Some(sigma),
                json!({"a": mat(&a), "b": mat(&b), "c": mat(&t_pd)}),
                json!({"trial": trial}),
            )
        });

        if sigma.is_symmetric() {
            let ba = mean_spectral(sigma, &b, &a, pol)?;
            let deviation = ab.sub(&ba).operator_norm() / (1.0 + ab.operator_norm());
            symmetry.record(deviation, || {
                witness(
                    "axioms.symmetry",
                    Some(sigma),
                    json!({"a": mat(&a), "b": mat(&b)}),
                    json!({"trial": trial}),
                )
            });
        }

        for &t in &[0.1, 2.0, 10.0] {
            let scaled = mean_spectral(sigma, &a.scale(t), &b.scale(t), pol)?;
            let deviation =
                scaled.sub(&ab.scale(t)).operator_norm() / (t * (1.0 + ab.operator_norm()));
            homogeneity.record(deviation, || {
                witness(
                    "axioms.positive-homogeneity",
                    Some(sigma),
                    json!({"a": mat(&a), "b": mat(&b)}),
                    json!({"trial": trial, "t": t}),
                )
            });
        }

        let aa = mean_spectral(sigma, &a, &a, pol)?;
        let deviation =
            (aa.operator_norm() - a.operator_norm()).abs() / (1.0 + a.operator_norm());
        fixed_point.record(deviation, || {
            witness(
                "axioms.norm-fixed-point",
                Some(sigma),
                json!({"a": mat(&a)}),
                json!({"trial": trial}),
            )
        });
    }

    Ok(SuiteReport {
        suite: format!("axioms[{}]", sigma.label()),
        checks: vec![
            monotonicity.finish(),
            transformer.finish(),
            transformer_eq.finish(),
            symmetry.finish(),
            homogeneity.finish(),
            fixed_point.finish(),
        ],
    })
}

/// Spectral route against quadrature route for measure-backed means.
pub fn route_equivalence_suite(
    measures: usize,
    pairs_per_measure: usize,
    max_dim: usize,
    seed: u64,
    pol: &TolerancePolicy,
) -> Result<SuiteReport> {
    let mut rng = SampleRng::seed_from_u64(seed);
    let mut agreement = Check::new(
        "routes.spectral-vs-quadrature",
        "spectral formula and measure quadrature evaluate the same mean",
        1e-8,
    );
    for m_index in 0..measures {
        let measure = sampling::random_measure(5, &mut rng);
        let sigma = MeanDescriptor::from_measure(measure.clone(), format!("measure-{m_index}"));
        for _ in 0..pairs_per_measure {
            let n = 2 + rng.index(max_dim - 1);
            let a = sampling::random_pd(n, &mut rng);
            let b = sampling::random_pd(n, &mut rng);
            let spectral = mean_spectral(&sigma, &a, &b, pol)?;
            let quadrature = mean_quadrature(&sigma, &a, &b, pol)?;
            let deviation = spectral.sub(&quadrature).operator_norm()
                / (1.0 + a.operator_norm() + b.operator_norm());
            agreement.record(deviation, || {
                witness(
                    "routes.spectral-vs-quadrature",
                    Some(&sigma),
                    json!({"a": mat(&a), "b": mat(&b)}),
                    json!({"measure_index": m_index}),
                )
            });
        }
    }
    Ok(SuiteReport { suite: "routes".into(), checks: vec![agreement.finish()] })
}

/// The ladder used when a projection norm is cross-checked against the
/// closed formula: functions with unbounded slope at 0 converge like
/// sqrt(eps), so the descent runs to 1e-12.
pub fn projection_norm_ladder() -> EpsLadder {
    EpsLadder::new((3..=12).map(|k| 10f64.powi(-k)).collect()).expect("valid ladder")
}

/// Case-1 means used by the projection-norm batteries.
pub fn case1_means() -> Vec<MeanDescriptor> {
    vec![
        MeanDescriptor::geometric(),
        MeanDescriptor::harmonic(),
        MeanDescriptor::power(-0.5).expect("valid exponent"),
        MeanDescriptor::logarithmic(),
    ]
}

/// Projection-norm formula `|A σ P| = f°(1/max λ)` against the ε-ladder
/// evaluation, the worked 2x2 value, and the norm identity
/// `|A σ P| = f°(|A # P|^2)`.
pub fn projection_norm_suite(
    trials: usize,
    seed: u64,
    pol: &TolerancePolicy,
) -> Result<SuiteReport> {
    let ladder = projection_norm_ladder();
    let mut rng = SampleRng::seed_from_u64(seed);
    let mut checks = Vec::new();

    // worked value: |A # P| = sqrt(2) for A = diag(2,3), P = e11
    {
        let mut worked = Check::new(
            "projection-norm.worked-value",
            "|diag(2,3) # e11| = sqrt(2)",
            1e-10,
        );
        let a = HermitianMatrix::from_diagonal(&[2.0, 3.0]);
        let p = Projection::new(HermitianMatrix::from_diagonal(&[1.0, 0.0]))?;
        let geometric = MeanDescriptor::geometric();
        let value = norm_mean_projection(&geometric, &a, &p, pol)?;
        worked.record((value - 2f64.sqrt()).abs(), || {
            witness(
                "projection-norm.worked-value",
                Some(&geometric),
                json!({"a": mat(&a), "p": mat(p.matrix())}),
                json!({"value": value}),
            )
        });
        checks.push(worked.finish());
    }

    for sigma in [
        MeanDescriptor::geometric(),
        MeanDescriptor::harmonic(),
        MeanDescriptor::power(-0.5).expect("valid exponent"),
    ] {
        let mut formula_vs_ladder = Check::new(
            "projection-norm.formula-vs-ladder",
            "|A s P| from the compression formula matches the eps-ladder evaluation",
            1e-5,
        );
        for trial in 0..trials {
            let n = 2 + rng.index(4);
            let a = sampling::random_pd(n, &mut rng);
            let p = sampling::random_projection(n, 1 + rng.index(n.max(2) - 1), &mut rng);
            let formula = norm_mean_projection(&sigma, &a, &p, pol)?;
            let by_ladder =
                mean_psd_limit(&sigma, &a, p.matrix(), &ladder, pol)?.value.operator_norm();
            formula_vs_ladder.record((formula - by_ladder).abs(), || {
                witness(
                    "projection-norm.formula-vs-ladder",
                    Some(&sigma),
                    json!({"a": mat(&a), "p": mat(p.matrix())}),
                    json!({"trial": trial, "formula": formula, "ladder": by_ladder}),
                )
            });
        }
        let mut record = formula_vs_ladder.finish();
        record.id = format!("projection-norm.formula-vs-ladder[{}]", sigma.label());
        checks.push(record);
    }

    Ok(SuiteReport { suite: "projection-norm".into(), checks })
}

/// Norm identity `|A σ P| = f°(|A # P|^2)` per Case-1 mean.
pub fn relation_identity_suite(
    trials: usize,
    seed: u64,
    pol: &TolerancePolicy,
) -> Result<SuiteReport> {
    let mut rng = SampleRng::seed_from_u64(seed);
    let mut checks = Vec::new();
    for sigma in case1_means() {
        let mut identity = Check::new(
            "projection-norm.relation-identity",
            "|A s P| = f_transpose(|A # P|^2)",
            1e-6,
        );
        for trial in 0..trials {
            let n = 2 + rng.index(4);
            let a = sampling::random_pd(n, &mut rng);
            let p = sampling::random_projection(n, 1 + rng.index(n.max(2) - 1), &mut rng);
            let direct = mean_spectral(&sigma, &a, p.matrix(), pol)?.operator_norm();
            let inner = 1.0 / max_lambda_compression(&a, &p, pol)?;
            let via_geometric = sigma.function().eval_transpose(inner)?;
            let deviation = (direct - via_geometric).abs() / (1.0 + direct.abs());
            identity.record(deviation, || {
                witness(
                    "projection-norm.relation-identity",
                    Some(&sigma),
                    json!({"a": mat(&a), "p": mat(p.matrix())}),
                    json!({"trial": trial, "direct": direct, "via_geometric": via_geometric}),
                )
            });
            debug_assert!(geometric_relation_check(&sigma, &a, &p, pol)? || !identity.witness.is_none());
        }
        let mut record = identity.finish();
        record.id = format!("projection-norm.relation-identity[{}]", sigma.label());
        checks.push(record);
    }
    Ok(SuiteReport { suite: "relation-identity".into(), checks })
}

/// Order criterion against the direct Loewner comparison, with witness
/// validation on the negative cases.
pub fn order_criterion_suite(
    sigma: &MeanDescriptor,
    dims: &[usize],
    trials: usize,
    seed: u64,
    pol: &TolerancePolicy,
) -> Result<SuiteReport> {
    let mut rng = SampleRng::seed_from_u64(seed);
    let mut agreement = Check::new(
        "order-criterion.agreement",
        "A <= B iff |A s P| <= |B s P| over spectral projections of A^{-1} - B^{-1}",
        0.0,
    );
    let mut witness_valid = Check::new(
        "order-criterion.witness-strictness",
        "negative cases produce a cut with P A^{-1} P + eps P <= P B^{-1} P",
        0.0,
    );
    for trial in 0..trials {
        let n = dims[trial % dims.len()];
        let (a, b) = if trial % 2 == 0 {
            sampling::ordered_pd_pair(n, &mut rng)
        } else {
            sampling::unordered_pd_pair(n, &mut rng)
        };
        let direct = loewner_leq(&a, &b, pol)?;
        let check = order_from_projection_norms(sigma, &a, &b, pol)?;
        let disagree = if check.holds == direct { 0.0 } else { 1.0 };
        agreement.record(disagree, || {
            witness(
                "order-criterion.agreement",
                Some(sigma),
                json!({"a": mat(&a), "b": mat(&b)}),
                json!({"trial": trial, "direct": direct, "criterion": check.holds}),
            )
        });
        if !check.holds {
            let w = check.witness.as_ref().expect("negative case carries a witness");
            let a_inv = spectral_apply(|l| Some(1.0 / l), &a)?;
            let b_inv = spectral_apply(|l| Some(1.0 / l), &b)?;
            let pm = w.projection.matrix().as_matrix();
            let lhs = symmetrize_product(pm * a_inv.as_matrix() * pm)
                .add(&w.projection.matrix().scale(w.epsilon));
            let rhs = symmetrize_product(pm * b_inv.as_matrix() * pm);
            let strict_ok = w.epsilon > 0.0
                && w.projection.rank() > 0
                && loewner_leq(&lhs, &rhs, pol)?
                && w.norm_first > w.norm_second;
            witness_valid.record(if strict_ok { 0.0 } else { 1.0 }, || {
                witness(
                    "order-criterion.witness-strictness",
                    Some(sigma),
                    json!({"a": mat(&a), "b": mat(&b), "p": mat(w.projection.matrix())}),
                    json!({"epsilon": w.epsilon, "norm_first": w.norm_first, "norm_second": w.norm_second}),
                )
            });
        }
    }
    Ok(SuiteReport {
        suite: format!("order-criterion[{}]", sigma.label()),
        checks: vec![agreement.finish(), witness_valid.finish()],
    })
}

/// Maximal pairs, dominating witnesses for non-projections, and agreement
/// of projection detection with the spectral test.
pub fn maximality_suite(
    pairs: usize,
    effects: usize,
    detections: usize,
    seed: u64,
    pol: &TolerancePolicy,
) -> Result<SuiteReport> {
    let mut rng = SampleRng::seed_from_u64(seed);

    let mut complementary = Check::new(
        "maximality.complementary-projections",
        "(P, I - P) is maximal among disjoint pairs",
        0.0,
    );
    for trial in 0..pairs {
        let n = 2 + trial % 4;
        let p = sampling::random_projection(n, 1 + rng.index(n - 1), &mut rng);
        let pair = DisjointPair::new(
            EffectElement::new(p.matrix().clone(), 1.0, pol)?,
            EffectElement::new(p.complement().matrix().clone(), 1.0, pol)?,
            pol,
        )?;
        let maximal = is_maximal_pair(&pair, pol)?;
        complementary.record(if maximal { 0.0 } else { 1.0 }, || {
            witness(
                "maximality.complementary-projections",
                None,
                json!({"p": mat(p.matrix())}),
                json!({"trial": trial}),
            )
        });
    }

    let mut dominated = Check::new(
        "maximality.dominating-witness",
        "a non-projection effect admits a strictly dominating disjoint pair",
        0.0,
    );
    for trial in 0..effects {
        let n = 2 + trial % 4;
        let a = sampling::random_non_projection_effect(n, &mut rng);
        let partner = crate::hermitian::range_projection(&a, pol)?.complement();
        let pair = DisjointPair::new(
            EffectElement::new(a.clone(), 1.0, pol)?,
            EffectElement::new(partner.matrix().clone(), 1.0, pol)?,
            pol,
        )?;
        let not_maximal = !is_maximal_pair(&pair, pol)?;
        let witness_pair = dominating_pair(&pair, pol)?;
        let valid = not_maximal
            && match &witness_pair {
                Some(dominating) => {
                    let first_grows = loewner_leq(
                        pair.first().matrix(),
                        dominating.first().matrix(),
                        pol,
                    )? && dominating
                        .first()
                        .matrix()
                        .sub(pair.first().matrix())
                        .operator_norm()
                        > pol.eq_tol;
                    let second_keeps = loewner_leq(
                        pair.second().matrix(),
                        dominating.second().matrix(),
                        pol,
                    )?;
                    first_grows && second_keeps
                }
                None => false,
            };
        dominated.record(if valid { 0.0 } else { 1.0 }, || {
            witness(
                "maximality.dominating-witness",
                None,
                json!({"a": mat(&a)}),
                json!({"trial": trial}),
            )
        });
    }

    let mut detection = Check::new(
        "maximality.projection-detection",
        "maximality-based projection detection agrees with spectrum in {0,1}",
        0.0,
    );
    for trial in 0..detections {
        let n = 2 + trial % 4;
        let e = if trial % 3 == 0 {
            sampling::random_projection(n, 1 + rng.index(n), &mut rng).matrix().clone()
        } else {
            sampling::random_effect(n, &mut rng)
        };
        let spectral = e
            .eig()
            .eigenvalues
            .iter()
            .all(|&l| l.abs() <= 1e-6 || (l - 1.0).abs() <= 1e-6);
        let via_maximality = detect_projection(&EffectElement::new(e.clone(), 1.0, pol)?, pol)?;
        detection.record(if via_maximality == spectral { 0.0 } else { 1.0 }, || {
            witness(
                "maximality.projection-detection",
                None,
                json!({"a": mat(&e)}),
                json!({"trial": trial, "spectral": spectral, "maximality": via_maximality}),
            )
        });
    }

    Ok(SuiteReport {
        suite: "maximality".into(),
        checks: vec![complementary.finish(), dominated.finish(), detection.finish()],
    })
}

/// Maximality is preserved by positive scaling, in both directions.
pub fn scaling_suite(trials: usize, seed: u64, pol: &TolerancePolicy) -> Result<SuiteReport> {
    let mut rng = SampleRng::seed_from_u64(seed);
    let mut preserved = Check::new(
        "scaling.maximality-preserved",
        "(A, B) maximal at level s iff (tA, tB) maximal at level s*t",
        0.0,
    );
    for trial in 0..trials {
        let n = 2 + trial % 4;
        let p = sampling::random_projection(n, 1 + rng.index(n - 1), &mut rng);
        let maximal = trial % 2 == 0;
        let (first, second) = if maximal {
            (p.matrix().clone(), p.complement().matrix().clone())
        } else {
            (p.matrix().scale(rng.uniform(0.3, 0.9)), p.complement().matrix().clone())
        };
        let pair = DisjointPair::new(
            EffectElement::new(first, 1.0, pol)?,
            EffectElement::new(second, 1.0, pol)?,
            pol,
        )?;
        let t = rng.log_uniform(0.2, 5.0);
        let scaled = scale_pair(&pair, t, pol)?;
        let before = is_maximal_pair(&pair, pol)?;
        let after = is_maximal_pair(&scaled, pol)?;
        let back = is_maximal_pair(&scale_pair(&scaled, 1.0 / t, pol)?, pol)?;
        let consistent = before == maximal && after == maximal && back == maximal;
        preserved.record(if consistent { 0.0 } else { 1.0 }, || {
            witness(
                "scaling.maximality-preserved",
                None,
                json!({"p": mat(p.matrix())}),
                json!({"trial": trial, "t": t, "before": before, "after": after, "back": back}),
            )
        });
    }
    Ok(SuiteReport { suite: "scaling".into(), checks: vec![preserved.finish()] })
}

/// h-part checks for one mean: vanishing at 0, symmetry inheritance,
/// reconstruction of `f`, and monotonicity; affine means pass vacuously.
pub fn h_part_suite(sigma: &MeanDescriptor) -> Result<SuiteReport> {
    let f = sigma.function();
    let mut checks = Vec::new();
    match h_decomposition(f) {
        HPart::Affine => {
            checks.push(CheckRecord {
                id: "h-part.affine".into(),
                statement: "measure has no mass on (0, inf); h-part is empty and the suite passes vacuously".into(),
                pass: true,
                trials: 1,
                max_deviation: 0.0,
                tolerance: 0.0,
                witness: None,
            });
        }
        HPart::NonAffine(h) => {
            let grid = probe_grid();
            let mut reconstruction = Check::new(
                "h-part.reconstruction",
                "f(x) = f(0+) + f_transpose(0+) x + h(x) on the probe grid",
                1e-12,
            );
            let mut monotone = Check::new(
                "h-part.nondecreasing",
                "h is nondecreasing on the probe grid",
                1e-12,
            );
            for &x in &grid {
                let fx = f.eval(x)?;
                let rebuilt = f.f_at_0() + f.fo_at_0() * x + h.eval(x)?;
                reconstruction.record((fx - rebuilt).abs() / (1.0 + fx.abs()), || {
                    witness("h-part.reconstruction", Some(sigma), json!({}), json!({"x": x}))
                });
            }
            for w in grid.windows(2) {
                let lo = h.eval(w[0])?;
                let hi = h.eval(w[1])?;
                monotone.record(((lo - hi) / (1.0 + hi.abs())).max(0.0), || {
                    witness("h-part.nondecreasing", Some(sigma), json!({}), json!({"x": w[0]}))
                });
            }
            let symmetric = h.is_symmetric_flag() == f.is_symmetric_flag();
            checks.push(reconstruction.finish());
            checks.push(monotone.finish());
            checks.push(CheckRecord {
                id: "h-part.symmetry-inherited".into(),
                statement: "h is symmetric whenever f is".into(),
                pass: symmetric,
                trials: 1,
                max_deviation: if symmetric { 0.0 } else { 1.0 },
                tolerance: 0.0,
                witness: None,
            });
        }
    }
    Ok(SuiteReport { suite: format!("h-part[{}]", sigma.label()), checks })
}

/// The orthogonal-projection identity `|(Q + δI) σ_h P| = h(δ)` at the
/// fixed δ schedule, in dimensions 3 and 5.
pub fn orthogonality_suite(
    sigma: &MeanDescriptor,
    trials: usize,
    seed: u64,
    pol: &TolerancePolicy,
) -> Result<SuiteReport> {
    let mut rng = SampleRng::seed_from_u64(seed);
    let mut checks = Vec::new();
    match sigma.h_connection() {
        None => checks.push(CheckRecord {
            id: "orthogonality.h-identity".into(),
            statement: "h-part empty (affine mean); identity passes vacuously".into(),
            pass: true,
            trials: 1,
            max_deviation: 0.0,
            tolerance: 0.0,
            witness: None,
        }),
        Some(h_conn) => {
            let h = h_conn.function().clone();
            let mut identity = Check::new(
                "orthogonality.h-identity",
                "|(Q + delta I) s_h P| = h(delta) for orthogonal projections P, Q",
                1e-6,
            );
            for trial in 0..trials {
                for &n in &[3usize, 5] {
                    let rank_p = 1 + rng.index(n - 1);
                    let rank_q = 1 + rng.index(n - rank_p);
                    let (p, q) =
                        sampling::orthogonal_projection_pair(n, rank_p, rank_q, &mut rng);
                    for &delta in &[1e-1, 1e-2, 1e-3] {
                        let shifted = q.matrix().shift(delta);
                        let value = mean_spectral(&h_conn, &shifted, p.matrix(), pol)?
                            .operator_norm();
                        let expected = h.eval(delta)?;
                        let deviation = (value - expected).abs() / (1.0 + expected);
                        identity.record(deviation, || {
                            witness(
                                "orthogonality.h-identity",
                                Some(sigma),
                                json!({"p": mat(p.matrix()), "q": mat(q.matrix())}),
                                json!({"trial": trial, "delta": delta, "value": value, "expected": expected}),
                            )
                        });
                    }
                }
            }
            checks.push(identity.finish());
        }
    }
    Ok(SuiteReport { suite: format!("orthogonality[{}]", sigma.label()), checks })
}

/// Re-run a single check from a witness produced by one of the suites.
pub fn replay_witness(value: &Value, pol: &TolerancePolicy) -> Result<CheckRecord> {
    let check = value
        .get("check")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Schema { reason: "witness has no `check` field".into() })?
        .to_string();
    let inputs = value.get("inputs").cloned().unwrap_or_else(|| json!({}));
    let matrix = |name: &str| -> Result<HermitianMatrix> {
        let raw = inputs
            .get(name)
            .ok_or_else(|| Error::Schema { reason: format!("witness inputs lack `{name}`") })?;
        let parsed: MatrixJson = serde_json::from_value(raw.clone())
            .map_err(|e| Error::Schema { reason: e.to_string() })?;
        parsed.to_hermitian()
    };
    let sigma = match value.get("mean") {
        Some(Value::String(name)) => Some(MeanDescriptor::by_name(name)?),
        Some(Value::Object(obj)) => {
            let raw = obj
                .get("measure")
                .ok_or_else(|| Error::Schema { reason: "mean object lacks `measure`".into() })?;
            let parsed: MeasureJson = serde_json::from_value(raw.clone())
                .map_err(|e| Error::Schema { reason: e.to_string() })?;
            Some(MeanDescriptor::from_measure(parsed.to_measure()?, "replayed-measure"))
        }
        _ => None,
    };
    let need_mean = || {
        sigma
            .clone()
            .ok_or_else(|| Error::Schema { reason: "witness lacks a `mean` field".into() })
    };

    let out = |pass: bool, deviation: f64, tolerance: f64, statement: &str| CheckRecord {
        id: check.clone(),
        statement: statement.to_string(),
        pass,
        trials: 1,
        max_deviation: deviation,
        tolerance,
        witness: if pass { None } else { Some(value.clone()) },
    };

    let base = check.split('[').next().unwrap_or(&check);
    match base {
        "axioms.monotonicity" => {
            let sigma = need_mean()?;
            let (a, b, c, d) = (matrix("a")?, matrix("b")?, matrix("c")?, matrix("d")?);
            let ab = mean_spectral(&sigma, &a, &b, pol)?;
            let cd = mean_spectral(&sigma, &c, &d, pol)?;
            let deficit = (-cd.sub(&ab).min_eigenvalue()).max(0.0)
                / (1.0 + ab.operator_norm() + cd.operator_norm());
            Ok(out(deficit <= pol.order_tol, deficit, pol.order_tol, "replayed monotonicity"))
        }
        "axioms.transformer-inequality" => {
            let sigma = need_mean()?;
            let (a, b, c) = (matrix("a")?, matrix("b")?, matrix("c")?);
            let lhs = c.congruence_product(&mean_spectral(&sigma, &a, &b, pol)?);
            let rhs =
                mean_spectral(&sigma, &c.congruence_product(&a), &c.congruence_product(&b), pol)?;
            let deficit = (-rhs.sub(&lhs).min_eigenvalue()).max(0.0)
                / (1.0 + lhs.operator_norm() + rhs.operator_norm());
            Ok(out(deficit <= pol.order_tol, deficit, pol.order_tol, "replayed transformer inequality"))
        }
        "axioms.symmetry" => {
            let sigma = need_mean()?;
            let (a, b) = (matrix("a")?, matrix("b")?);
            let ab = mean_spectral(&sigma, &a, &b, pol)?;
            let ba = mean_spectral(&sigma, &b, &a, pol)?;
            let dev = ab.sub(&ba).operator_norm() / (1.0 + ab.operator_norm());
            Ok(out(dev <= 1e-9, dev, 1e-9, "replayed symmetry"))
        }
        "axioms.norm-fixed-point" => {
            let sigma = need_mean()?;
            let a = matrix("a")?;
            let aa = mean_spectral(&sigma, &a, &a, pol)?;
            let dev = (aa.operator_norm() - a.operator_norm()).abs() / (1.0 + a.operator_norm());
            Ok(out(dev <= pol.order_tol, dev, pol.order_tol, "replayed norm fixed point"))
        }
        "routes.spectral-vs-quadrature" => {
            let sigma = need_mean()?;
            let (a, b) = (matrix("a")?, matrix("b")?);
            let spectral = mean_spectral(&sigma, &a, &b, pol)?;
            let quadrature = mean_quadrature(&sigma, &a, &b, pol)?;
            let dev = spectral.sub(&quadrature).operator_norm()
                / (1.0 + a.operator_norm() + b.operator_norm());
            Ok(out(dev <= 1e-8, dev, 1e-8, "replayed route agreement"))
        }
        "projection-norm.formula-vs-ladder" => {
            let sigma = need_mean()?;
            let (a, p) = (matrix("a")?, Projection::new(matrix("p")?)?);
            let formula = norm_mean_projection(&sigma, &a, &p, pol)?;
            let ladder = projection_norm_ladder();
            let by_ladder =
                mean_psd_limit(&sigma, &a, p.matrix(), &ladder, pol)?.value.operator_norm();
            let dev = (formula - by_ladder).abs();
            Ok(out(dev <= 1e-5, dev, 1e-5, "replayed formula vs ladder"))
        }
        "projection-norm.relation-identity" => {
            let sigma = need_mean()?;
            let (a, p) = (matrix("a")?, Projection::new(matrix("p")?)?);
            let ok = geometric_relation_check(&sigma, &a, &p, pol)?;
            Ok(out(ok, if ok { 0.0 } else { 1.0 }, 1e-6, "replayed norm identity"))
        }
        "order-criterion.agreement" | "order-criterion.witness-strictness" => {
            let sigma = need_mean()?;
            let (a, b) = (matrix("a")?, matrix("b")?);
            let direct = loewner_leq(&a, &b, pol)?;
            let via = order_from_projection_norms(&sigma, &a, &b, pol)?;
            let agree = via.holds == direct;
            Ok(out(agree, if agree { 0.0 } else { 1.0 }, 0.0, "replayed order criterion"))
        }
        "maximality.projection-detection" => {
            let a = matrix("a")?;
            let spectral = a
                .eig()
                .eigenvalues
                .iter()
                .all(|&l| l.abs() <= 1e-6 || (l - 1.0).abs() <= 1e-6);
            let via = detect_projection(&EffectElement::new(a, 1.0, pol)?, pol)?;
            let agree = via == spectral;
            Ok(out(agree, if agree { 0.0 } else { 1.0 }, 0.0, "replayed projection detection"))
        }
        "maximality.complementary-projections" => {
            let p = Projection::new(matrix("p")?)?;
            let pair = DisjointPair::new(
                EffectElement::new(p.matrix().clone(), 1.0, pol)?,
                EffectElement::new(p.complement().matrix().clone(), 1.0, pol)?,
                pol,
            )?;
            let ok = is_maximal_pair(&pair, pol)?;
            Ok(out(ok, if ok { 0.0 } else { 1.0 }, 0.0, "replayed complementary maximality"))
        }
        "maximality.dominating-witness" => {
            let a = matrix("a")?;
            let partner = crate::hermitian::range_projection(&a, pol)?.complement();
            let pair = DisjointPair::new(
                EffectElement::new(a, 1.0, pol)?,
                EffectElement::new(partner.matrix().clone(), 1.0, pol)?,
                pol,
            )?;
            let ok = !is_maximal_pair(&pair, pol)? && dominating_pair(&pair, pol)?.is_some();
            Ok(out(ok, if ok { 0.0 } else { 1.0 }, 0.0, "replayed dominating witness"))
        }
        "orthogonality.h-identity" => {
            let sigma = need_mean()?;
            let (p, q) = (Projection::new(matrix("p")?)?, Projection::new(matrix("q")?)?);
            let delta = value
                .get("data")
                .and_then(|d| d.get("delta"))
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Schema { reason: "witness lacks data.delta".into() })?;
            let h_conn = sigma.h_connection().ok_or(Error::AffineFunction)?;
            let shifted = q.matrix().shift(delta);
            let value_norm =
                mean_spectral(&h_conn, &shifted, p.matrix(), pol)?.operator_norm();
            let expected = h_conn.function().eval(delta)?;
            let dev = (value_norm - expected).abs() / (1.0 + expected);
            Ok(out(dev <= 1e-6, dev, 1e-6, "replayed h-part identity"))
        }
        other => Err(Error::Schema { reason: format!("no replay handler for check `{other}`") }),
    }
}

/// `inf_is_zero` route agreement on random semidefinite pairs.
pub fn inf_routes_suite(trials: usize, seed: u64, pol: &TolerancePolicy) -> Result<SuiteReport> {
    let mut rng = SampleRng::seed_from_u64(seed);
    let mut agreement = Check::new(
        "maximality.inf-routes",
        "range-rank and parallel-sum routes agree on infimum-zero",
        0.0,
    );
    for trial in 0..trials {
        let n = 2 + trial % 5;
        let a = sampling::random_psd(n, 1 + rng.index(n), &mut rng);
        let b = sampling::random_psd(n, 1 + rng.index(n), &mut rng);
        let disagree = match inf_is_zero(&a, &b, pol) {
            Ok(_) => 0.0,
            Err(Error::RouteDisagreement { .. }) => 1.0,
            Err(e) => return Err(e),
        };
        agreement.record(disagree, || {
            witness(
                "maximality.inf-routes",
                None,
                json!({"a": mat(&a), "b": mat(&b)}),
                json!({"trial": trial}),
            )
        });
    }
    Ok(SuiteReport { suite: "inf-routes".into(), checks: vec![agreement.finish()] })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn axiom_suite_passes_for_catalog() {
        for sigma in MeanDescriptor::catalog() {
            let report = axiom_suite(&sigma, 3, 25, 7, &pol()).unwrap();
            assert!(report.all_pass(), "{}: {:#?}", sigma.label(), report.checks);
        }
    }

    #[test]
    fn route_suite_passes() {
        let report = route_equivalence_suite(8, 6, 4, 11, &pol()).unwrap();
        assert!(report.all_pass(), "{:#?}", report.checks);
    }

    #[test]
    fn projection_norm_suite_passes() {
        let report = projection_norm_suite(12, 13, &pol()).unwrap();
        assert!(report.all_pass(), "{:#?}", report.checks);
    }

    #[test]
    fn relation_identity_suite_passes() {
        let report = relation_identity_suite(12, 17, &pol()).unwrap();
        assert!(report.all_pass(), "{:#?}", report.checks);
    }

    #[test]
    fn order_criterion_suite_passes() {
        for sigma in [MeanDescriptor::geometric(), MeanDescriptor::harmonic()] {
            let report = order_criterion_suite(&sigma, &[3, 4], 20, 19, &pol()).unwrap();
            assert!(report.all_pass(), "{}: {:#?}", sigma.label(), report.checks);
        }
    }

    #[test]
    fn maximality_suite_passes() {
        let report = maximality_suite(15, 15, 40, 23, &pol()).unwrap();
        assert!(report.all_pass(), "{:#?}", report.checks);
    }

    #[test]
    fn scaling_suite_passes() {
        let report = scaling_suite(20, 29, &pol()).unwrap();
        assert!(report.all_pass(), "{:#?}", report.checks);
    }

    #[test]
    fn h_part_suite_handles_both_outcomes() {
        let affine = h_part_suite(&MeanDescriptor::arithmetic()).unwrap();
        assert!(affine.all_pass());
        assert_eq!(affine.checks[0].id, "h-part.affine");
        for sigma in [MeanDescriptor::geometric(), MeanDescriptor::power(0.5).unwrap()] {
            let report = h_part_suite(&sigma).unwrap();
            assert!(report.all_pass(), "{}: {:#?}", sigma.label(), report.checks);
            assert!(report.checks.len() >= 3);
        }
    }

    #[test]
    fn orthogonality_suite_passes() {
        for sigma in MeanDescriptor::catalog() {
            let report = orthogonality_suite(&sigma, 4, 31, &pol()).unwrap();
            assert!(report.all_pass(), "{}: {:#?}", sigma.label(), report.checks);
        }
    }

    #[test]
    fn inf_routes_suite_passes() {
        let report = inf_routes_suite(60, 37, &pol()).unwrap();
        assert!(report.all_pass());
    }

    #[test]
    fn replay_round_trip() {
        // construct a witness by hand and replay it
        let mut rng = SampleRng::seed_from_u64(41);
        let a = sampling::random_pd(3, &mut rng);
        let b = sampling::random_pd(3, &mut rng);
        let sigma = MeanDescriptor::harmonic();
        let w = witness(
            "routes.spectral-vs-quadrature",
            Some(&sigma),
            json!({"a": mat(&a), "b": mat(&b)}),
            json!({}),
        );
        let record = replay_witness(&w, &pol()).unwrap();
        assert!(record.pass, "{record:?}");

        let p = sampling::random_projection(3, 1, &mut rng);
        let w = witness(
            "projection-norm.relation-identity",
            Some(&MeanDescriptor::geometric()),
            json!({"a": mat(&a), "p": mat(p.matrix())}),
            json!({}),
        );
        assert!(replay_witness(&w, &pol()).unwrap().pass);

        let unknown = json!({"check": "nonsense", "inputs": {}});
        assert!(replay_witness(&unknown, &pol()).is_err());
    }
}
