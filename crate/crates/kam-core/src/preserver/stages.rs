//! Stage checks of the certification pipeline.
//!
//! Every stage samples deterministically from the run seed, records the
//! worst deviation normalized by the stage threshold and keeps a
//! reproducible witness for the worst case. A stage passes when the worst
//! ratio is at most 1, is rejected at 10 times the threshold, and is
//! inconclusive in between.

use serde::Serialize;
use serde_json::{json, Value};

use crate::hermitian::{
    cone_membership, ConeMembership, HermitianMatrix, TolerancePolicy,
};
use crate::json::MatrixJson;
use crate::means::{mean_spectral, EpsLadder, MeanDescriptor};
use crate::sampling::{self, SampleRng};

use super::{PreserverMap, PsiEps};

/// Sampling parameters of a pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub trials: usize,
    pub seed: u64,
    pub ladder: EpsLadder,
    pub pol: TolerancePolicy,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            trials: 40,
            seed: 42,
            ladder: EpsLadder::default(),
            pol: TolerancePolicy::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Pass,
    Inconclusive,
    Fail,
}

/// Outcome of one pipeline stage.
#[derive(Debug, Clone, Serialize)]
pub struct StageVerdict {
    pub stage: String,
    pub status: StageStatus,
    /// Worst deviation divided by its threshold.
    pub ratio: f64,
    pub max_deviation: f64,
    pub threshold: f64,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl StageVerdict {
    pub fn passed(&self) -> bool {
        self.status == StageStatus::Pass
    }
}

/// Accumulates normalized deviations and the witness of the worst one.
struct Gauge {
    stage: &'static str,
    ratio: f64,
    max_deviation: f64,
    threshold: f64,
    detail: String,
    witness: Option<Value>,
    hard_failure: bool,
}

impl Gauge {
    fn new(stage: &'static str) -> Self {
        Self {
            stage,
            ratio: 0.0,
            max_deviation: 0.0,
            threshold: f64::NAN,
            detail: String::new(),
            witness: None,
            hard_failure: false,
        }
    }

    fn record(&mut self, deviation: f64, threshold: f64, what: &str, witness: impl FnOnce() -> Value) {
        let ratio = deviation / threshold;
        if ratio > self.ratio || self.threshold.is_nan() {
            self.ratio = ratio.max(self.ratio);
            self.max_deviation = deviation;
            self.threshold = threshold;
            if ratio > 0.0 {
                self.detail = what.to_string();
                self.witness = Some(witness());
            } else if self.detail.is_empty() {
                self.detail = what.to_string();
            }
        }
    }

    /// An evaluation failed outright (for instance the image left the
    /// cone); the stage is rejected with the error as witness.
    fn fail(&mut self, what: &str, witness: Value) {
        self.hard_failure = true;
        self.ratio = f64::INFINITY;
        self.max_deviation = f64::INFINITY;
        self.detail = what.to_string();
        self.witness = Some(witness);
    }

    fn finish(self) -> StageVerdict {
        let status = if self.hard_failure || self.ratio >= 10.0 {
            StageStatus::Fail
        } else if self.ratio <= 1.0 {
            StageStatus::Pass
        } else {
            StageStatus::Inconclusive
        };
        StageVerdict {
            stage: self.stage.to_string(),
            status,
            ratio: self.ratio,
            max_deviation: self.max_deviation,
            threshold: if self.threshold.is_nan() { 0.0 } else { self.threshold },
            detail: self.detail,
            witness: if status == StageStatus::Pass { None } else { self.witness },
        }
    }
}

fn matrix_witness(label: &str, m: &HermitianMatrix) -> (String, Value) {
    (label.to_string(), serde_json::to_value(MatrixJson::from_hermitian(m)).expect("serializable"))
}

fn pair_witness(entries: &[(&str, &HermitianMatrix)], extra: Value) -> Value {
    let mut map = serde_json::Map::new();
    for (label, m) in entries {
        let (k, v) = matrix_witness(label, m);
        map.insert(k, v);
    }
    map.insert("data".into(), extra);
    Value::Object(map)
}

/// `|A σ B| = |φ(A) σ φ(B)|` on sampled positive definite pairs.
pub fn check_norm_preservation(
    map: &PreserverMap,
    sigma: &MeanDescriptor,
    cfg: &PipelineConfig,
) -> StageVerdict {
    const THRESHOLD: f64 = 1e-7;
    let mut gauge = Gauge::new("norm_preservation");
    let mut rng = SampleRng::seed_from_u64(cfg.seed ^ 0xA001);
    let n = map.dim();
    for trial in 0..cfg.trials {
        let a = sampling::random_pd(n, &mut rng);
        let b = sampling::random_pd(n, &mut rng);
        let lhs = match mean_spectral(sigma, &a, &b, &cfg.pol) {
            Ok(m) => m.operator_norm(),
            Err(e) => {
                gauge.fail(
                    "mean evaluation failed on the source pair",
                    pair_witness(&[("a", &a), ("b", &b)], json!({"error": e.to_string()})),
                );
                break;
            }
        };
        let image = match (map.apply(&a, &cfg.pol), map.apply(&b, &cfg.pol)) {
            (Ok(fa), Ok(fb)) => (fa, fb),
            (Err(e), _) | (_, Err(e)) => {
                gauge.fail(
                    "map evaluation failed",
                    pair_witness(&[("a", &a), ("b", &b)], json!({"error": e.to_string()})),
                );
                break;
            }
        };
        let rhs = match mean_spectral(sigma, &image.0, &image.1, &cfg.pol) {
            Ok(m) => m.operator_norm(),
            Err(e) => {
                gauge.fail(
                    "mean evaluation failed on the image pair",
                    pair_witness(
                        &[("a", &a), ("b", &b), ("phi_a", &image.0), ("phi_b", &image.1)],
                        json!({"error": e.to_string()}),
                    ),
                );
                break;
            }
        };
        let deviation = (lhs - rhs).abs() / (1.0 + lhs);
        gauge.record(deviation, THRESHOLD, "norm of mean drifted under the map", || {
            pair_witness(
                &[("a", &a), ("b", &b)],
                json!({"trial": trial, "norm_source": lhs, "norm_image": rhs}),
            )
        });
    }
    gauge.finish()
}

/// Ordered pairs stay ordered, unordered pairs stay unordered.
pub fn check_order_iso(map: &PreserverMap, cfg: &PipelineConfig) -> StageVerdict {
    const THRESHOLD: f64 = 1e-7;
    let mut gauge = Gauge::new("order_iso");
    let mut rng = SampleRng::seed_from_u64(cfg.seed ^ 0xA002);
    let n = map.dim();
    for trial in 0..cfg.trials {
        let ordered = trial % 2 == 0 || n < 2;
        let (a, b) = if ordered {
            sampling::ordered_pd_pair(n, &mut rng)
        } else {
            sampling::unordered_pd_pair(n, &mut rng)
        };
        let (fa, fb) = match (map.apply(&a, &cfg.pol), map.apply(&b, &cfg.pol)) {
            (Ok(fa), Ok(fb)) => (fa, fb),
            (Err(e), _) | (_, Err(e)) => {
                gauge.fail(
                    "map evaluation failed",
                    pair_witness(&[("a", &a), ("b", &b)], json!({"error": e.to_string()})),
                );
                break;
            }
        };
        let scale = 1.0 + fa.operator_norm() + fb.operator_norm();
        let min_fwd = fb.sub(&fa).min_eigenvalue();
        if ordered {
            // φ(a) <= φ(b) must survive
            let deviation = (-min_fwd).max(0.0) / scale;
            gauge.record(deviation, THRESHOLD, "ordered pair lost its order", || {
                pair_witness(&[("a", &a), ("b", &b)], json!({"trial": trial, "margin": min_fwd}))
            });
        } else {
            // neither direction may become ordered
            let min_bwd = fa.sub(&fb).min_eigenvalue();
            let deviation = min_fwd.max(min_bwd).max(0.0) / scale;
            gauge.record(deviation, THRESHOLD, "unordered pair became ordered", || {
                pair_witness(
                    &[("a", &a), ("b", &b)],
                    json!({"trial": trial, "margin_fwd": min_fwd, "margin_bwd": min_bwd}),
                )
            });
        }
    }
    gauge.finish()
}

/// `φ(tI) = tI` over a scale grid.
pub fn check_unit_scalars(map: &PreserverMap, cfg: &PipelineConfig) -> StageVerdict {
    const THRESHOLD: f64 = 1e-8;
    let mut gauge = Gauge::new("unit_scalars");
    let n = map.dim();
    for &t in &[1e-2, 1e-1, 1.0, 10.0, 100.0] {
        let scaled = HermitianMatrix::identity(n).scale(t);
        match map.apply(&scaled, &cfg.pol) {
            Ok(image) => {
                let deviation = image.sub(&scaled).operator_norm() / t;
                gauge.record(deviation, THRESHOLD, "scalar multiple of identity moved", || {
                    pair_witness(&[("image", &image)], json!({"t": t}))
                });
            }
            Err(e) => {
                gauge.fail("map evaluation failed on tI", json!({"t": t, "error": e.to_string()}));
                break;
            }
        }
    }
    gauge.finish()
}

/// Construct `ψ_ε` and validate it on samples: semidefinite values, order
/// isomorphism, norm preservation and `ψ_ε(tI) = tI`.
pub fn build_psi_eps<'a>(
    map: &'a PreserverMap,
    eps: f64,
    trials: usize,
    seed: u64,
    pol: &TolerancePolicy,
) -> (Option<PsiEps<'a>>, StageVerdict) {
    const THRESHOLD: f64 = 1e-7;
    let mut gauge = Gauge::new("psi_eps_wellformed");
    let psi = match PsiEps::new(map, eps) {
        Ok(psi) => psi,
        Err(e) => {
            gauge.fail("invalid epsilon", json!({"eps": eps, "error": e.to_string()}));
            return (None, gauge.finish());
        }
    };
    let n = map.dim();
    let mut rng = SampleRng::seed_from_u64(seed ^ 0xA004);

    // scalar lines: psi(0) = 0 and psi(tI) = tI
    for &t in &[0.0, 0.5, 1.0, 2.0] {
        let x = HermitianMatrix::identity(n).scale(t);
        match psi.apply(&x, pol) {
            Ok(y) => {
                let deviation = y.sub(&x).operator_norm() / t.max(1.0);
                gauge.record(deviation, THRESHOLD, "psi moved a scalar element", || {
                    json!({"eps": eps, "t": t})
                });
            }
            Err(e) => {
                gauge.fail(
                    "psi evaluation failed on a scalar element",
                    json!({"eps": eps, "t": t, "error": e.to_string()}),
                );
                return (None, gauge.finish());
            }
        }
    }

    for trial in 0..trials {
        let rank = 1 + rng.index(n);
        let a = sampling::random_psd(n, rank, &mut rng);
        let value = match psi.apply(&a, pol) {
            Ok(v) => v,
            Err(e) => {
                gauge.fail(
                    "psi evaluation failed",
                    pair_witness(&[("a", &a)], json!({"eps": eps, "error": e.to_string()})),
                );
                return (None, gauge.finish());
            }
        };
        // semidefinite image
        let psd_deficit =
            (-value.min_eigenvalue()).max(0.0) / (1.0 + value.operator_norm());
        gauge.record(psd_deficit, THRESHOLD, "psi image left the semidefinite cone", || {
            pair_witness(&[("a", &a), ("psi_a", &value)], json!({"eps": eps, "trial": trial}))
        });
        // norm preservation
        let norm_dev =
            (value.operator_norm() - a.operator_norm()).abs() / (1.0 + a.operator_norm());
        gauge.record(norm_dev, THRESHOLD, "psi changed a norm", || {
            pair_witness(&[("a", &a)], json!({"eps": eps, "trial": trial}))
        });
        // order preservation on a bumped partner
        let b = a.add(&sampling::random_psd(n, 1 + rng.index(n), &mut rng));
        if let Ok(vb) = psi.apply(&b, pol) {
            let scale = 1.0 + value.operator_norm() + vb.operator_norm();
            let deficit = (-vb.sub(&value).min_eigenvalue()).max(0.0) / scale;
            gauge.record(deficit, THRESHOLD, "psi broke an order relation", || {
                pair_witness(&[("a", &a), ("b", &b)], json!({"eps": eps, "trial": trial}))
            });
        }
    }
    (Some(psi), gauge.finish())
}

/// Run the ψ_ε well-formedness battery across a sample of ladder rungs.
pub fn check_psi_wellformed(map: &PreserverMap, cfg: &PipelineConfig) -> StageVerdict {
    let rungs = cfg.ladder.rungs();
    let sample: Vec<f64> = vec![
        rungs[0],
        rungs[rungs.len() / 2],
        *rungs.last().expect("nonempty ladder"),
    ];
    let mut worst: Option<StageVerdict> = None;
    for eps in sample {
        let (_, verdict) = build_psi_eps(map, eps, cfg.trials / 3 + 1, cfg.seed, &cfg.pol);
        let replace = match &worst {
            None => true,
            Some(w) => verdict.ratio > w.ratio,
        };
        if replace {
            worst = Some(verdict);
        }
    }
    worst.expect("at least one rung sampled")
}

/// Spectral distance of a Hermitian matrix from the set of projections.
fn projection_distance(a: &HermitianMatrix) -> f64 {
    a.eig()
        .eigenvalues
        .iter()
        .map(|&l| l.abs().min((l - 1.0).abs()))
        .fold(0.0, f64::max)
}

/// `ψ_ε` maps projections to projections, in both directions when the map
/// has an explicit inverse.
pub fn check_projection_preservation(map: &PreserverMap, cfg: &PipelineConfig) -> StageVerdict {
    const THRESHOLD: f64 = 1e-7;
    let mut gauge = Gauge::new("projection_preservation");
    let n = map.dim();
    let rungs = cfg.ladder.rungs();
    let eps = rungs[rungs.len() / 2];
    let Ok(psi) = PsiEps::new(map, eps) else {
        let mut g = Gauge::new("projection_preservation");
        g.fail("invalid epsilon", json!({"eps": eps}));
        return g.finish();
    };
    let inverse = map.inverse();
    let mut rng = SampleRng::seed_from_u64(cfg.seed ^ 0xA005);
    for trial in 0..cfg.trials {
        let rank = if n == 1 { 1 } else { 1 + rng.index(n - 1) };
        let p = sampling::random_projection(n, rank, &mut rng);
        match psi.apply(p.matrix(), &cfg.pol) {
            Ok(image) => {
                let deviation = projection_distance(&image);
                gauge.record(deviation, THRESHOLD, "psi image of a projection has spectrum off {0,1}", || {
                    pair_witness(
                        &[("p", p.matrix()), ("psi_p", &image)],
                        json!({"eps": eps, "trial": trial, "rank": rank}),
                    )
                });
            }
            Err(e) => {
                gauge.fail(
                    "psi evaluation failed on a projection",
                    pair_witness(&[("p", p.matrix())], json!({"eps": eps, "error": e.to_string()})),
                );
                break;
            }
        }
        if let Some(inv) = &inverse {
            if let Ok(inv_psi) = PsiEps::new(inv, eps) {
                let q = sampling::random_projection(n, rank, &mut rng);
                if let Ok(preimage) = inv_psi.apply(q.matrix(), &cfg.pol) {
                    let deviation = projection_distance(&preimage);
                    gauge.record(
                        deviation,
                        THRESHOLD,
                        "inverse psi image of a projection has spectrum off {0,1}",
                        || {
                            pair_witness(
                                &[("q", q.matrix()), ("inv_psi_q", &preimage)],
                                json!({"eps": eps, "trial": trial}),
                            )
                        },
                    );
                }
            }
        }
    }
    gauge.finish()
}

/// `ψ_ε(tP) = t ψ_ε(P)` for projections and positive scales.
pub fn check_projection_homogeneity(map: &PreserverMap, cfg: &PipelineConfig) -> StageVerdict {
    const THRESHOLD: f64 = 1e-8;
    let mut gauge = Gauge::new("projection_homogeneity");
    let n = map.dim();
    let rungs = cfg.ladder.rungs();
    let eps = rungs[rungs.len() / 2];
    let Ok(psi) = PsiEps::new(map, eps) else {
        let mut g = Gauge::new("projection_homogeneity");
        g.fail("invalid epsilon", json!({"eps": eps}));
        return g.finish();
    };
    let mut rng = SampleRng::seed_from_u64(cfg.seed ^ 0xA006);
    for trial in 0..cfg.trials {
        let rank = if n == 1 { 1 } else { 1 + rng.index(n - 1) };
        let p = sampling::random_projection(n, rank, &mut rng);
        let base = match psi.apply(p.matrix(), &cfg.pol) {
            Ok(b) => b,
            Err(e) => {
                gauge.fail(
                    "psi evaluation failed",
                    pair_witness(&[("p", p.matrix())], json!({"error": e.to_string()})),
                );
                break;
            }
        };
        for &t in &[0.5, 2.0, 7.3] {
            match psi.apply(&p.matrix().scale(t), &cfg.pol) {
                Ok(scaled) => {
                    let deviation = scaled.sub(&base.scale(t)).operator_norm() / t;
                    gauge.record(deviation, THRESHOLD, "psi is not homogeneous on projections", || {
                        pair_witness(
                            &[("p", p.matrix())],
                            json!({"eps": eps, "t": t, "trial": trial}),
                        )
                    });
                }
                Err(e) => {
                    gauge.fail(
                        "psi evaluation failed on a scaled projection",
                        pair_witness(&[("p", p.matrix())], json!({"t": t, "error": e.to_string()})),
                    );
                    return gauge.finish();
                }
            }
        }
    }
    gauge.finish()
}

/// `ψ_ε1(P) = ψ_ε2(P)` across the ladder: the shifted maps glue into a
/// single map on projections.
pub fn check_eps_independence(map: &PreserverMap, cfg: &PipelineConfig) -> StageVerdict {
    const THRESHOLD: f64 = 1e-7;
    let mut gauge = Gauge::new("eps_independence");
    let n = map.dim();
    let rungs = cfg.ladder.rungs();
    let mut rng = SampleRng::seed_from_u64(cfg.seed ^ 0xA007);
    let count = cfg.trials.clamp(1, 50);
    for trial in 0..count {
        let rank = if n == 1 { 1 } else { 1 + rng.index(n - 1) };
        let p = sampling::random_projection(n, rank, &mut rng);
        let images: Vec<(f64, HermitianMatrix)> = rungs
            .iter()
            .filter_map(|&eps| {
                PsiEps::new(map, eps)
                    .ok()
                    .and_then(|psi| psi.apply(p.matrix(), &cfg.pol).ok())
                    .map(|im| (eps, im))
            })
            .collect();
        if images.len() != rungs.len() {
            gauge.fail(
                "psi evaluation failed on a rung",
                pair_witness(&[("p", p.matrix())], json!({"trial": trial})),
            );
            break;
        }
        for pair in images.windows(2) {
            let deviation = pair[0].1.sub(&pair[1].1).operator_norm();
            gauge.record(deviation, THRESHOLD, "psi images differ across epsilons", || {
                pair_witness(
                    &[("p", p.matrix())],
                    json!({"eps_pair": [pair[0].0, pair[1].0], "trial": trial}),
                )
            });
        }
        let first = &images[0];
        let last = images.last().expect("nonempty");
        let deviation = first.1.sub(&last.1).operator_norm();
        gauge.record(deviation, THRESHOLD, "psi images differ across the full ladder", || {
            pair_witness(
                &[("p", p.matrix())],
                json!({"eps_pair": [first.0, last.0], "trial": trial}),
            )
        });
    }
    gauge.finish()
}

/// Key norm equation `|A σ P| = |φ(A) σ ψ_ε(P)|` across the ladder, plus
/// the shifted variant `|(Q + δI) σ P| = |(ψ_ε(Q) + δI) σ ψ_ε(P)|` for
/// orthogonal projections.
pub fn check_key_equation(
    map: &PreserverMap,
    sigma: &MeanDescriptor,
    cfg: &PipelineConfig,
) -> StageVerdict {
    const THRESHOLD: f64 = 1e-6;
    let mut gauge = Gauge::new("key_equation");
    let n = map.dim();
    let mut rng = SampleRng::seed_from_u64(cfg.seed ^ 0xA008);
    let trials = cfg.trials.clamp(1, 25);
    for trial in 0..trials {
        let a = sampling::random_pd(n, &mut rng);
        let rank = if n == 1 { 1 } else { 1 + rng.index(n - 1) };
        let p = sampling::random_projection(n, rank, &mut rng);
        let lhs = match mean_spectral(sigma, &a, p.matrix(), &cfg.pol) {
            Ok(m) => m.operator_norm(),
            Err(e) => {
                gauge.fail(
                    "source norm evaluation failed",
                    pair_witness(&[("a", &a), ("p", p.matrix())], json!({"error": e.to_string()})),
                );
                break;
            }
        };
        let fa = match map.apply(&a, &cfg.pol) {
            Ok(fa) => fa,
            Err(e) => {
                gauge.fail("map evaluation failed", json!({"error": e.to_string()}));
                break;
            }
        };
        for &eps in cfg.ladder.rungs() {
            let Ok(psi) = PsiEps::new(map, eps) else { continue };
            let psi_p = match psi.apply(p.matrix(), &cfg.pol) {
                Ok(v) => v,
                Err(e) => {
                    gauge.fail(
                        "psi evaluation failed",
                        pair_witness(&[("p", p.matrix())], json!({"eps": eps, "error": e.to_string()})),
                    );
                    return gauge.finish();
                }
            };
            if cone_membership(&psi_p, &cfg.pol) == ConeMembership::NotPsd {
                gauge.fail(
                    "psi image of a projection left the semidefinite cone",
                    pair_witness(
                        &[("p", p.matrix()), ("psi_p", &psi_p)],
                        json!({"eps": eps, "lambda_min": psi_p.min_eigenvalue()}),
                    ),
                );
                return gauge.finish();
            }
            let rhs = match mean_spectral(sigma, &fa, &psi_p, &cfg.pol) {
                Ok(m) => m.operator_norm(),
                Err(e) => {
                    gauge.fail(
                        "image norm evaluation failed",
                        pair_witness(&[("phi_a", &fa), ("psi_p", &psi_p)], json!({"error": e.to_string()})),
                    );
                    return gauge.finish();
                }
            };
            let deviation = (lhs - rhs).abs() / (1.0 + lhs);
            gauge.record(deviation, THRESHOLD, "key norm equation drifted", || {
                pair_witness(
                    &[("a", &a), ("p", p.matrix())],
                    json!({"eps": eps, "trial": trial, "lhs": lhs, "rhs": rhs}),
                )
            });
        }
    }

    // shifted variant with orthogonal projections
    if n >= 2 {
        let eps = cfg.ladder.rungs()[cfg.ladder.rungs().len() / 2];
        let Ok(psi) = PsiEps::new(map, eps) else {
            return gauge.finish();
        };
        for trial in 0..trials {
            let rank_p = 1 + rng.index(n - 1);
            let rank_q = 1 + rng.index(n - rank_p);
            let (p, q) = sampling::orthogonal_projection_pair(n, rank_p, rank_q, &mut rng);
            let (psi_p, psi_q) = match (
                psi.apply(p.matrix(), &cfg.pol),
                psi.apply(q.matrix(), &cfg.pol),
            ) {
                (Ok(x), Ok(y)) => (x, y),
                _ => {
                    gauge.fail("psi evaluation failed on orthogonal projections", json!({"trial": trial}));
                    break;
                }
            };
            for &delta in &[1e-1, 1e-2] {
                let lhs = match mean_spectral(sigma, &q.matrix().shift(delta), p.matrix(), &cfg.pol)
                {
                    Ok(m) => m.operator_norm(),
                    Err(_) => continue,
                };
                let rhs = match mean_spectral(sigma, &psi_q.shift(delta), &psi_p, &cfg.pol) {
                    Ok(m) => m.operator_norm(),
                    Err(e) => {
                        gauge.fail(
                            "shifted image norm evaluation failed",
                            json!({"delta": delta, "error": e.to_string()}),
                        );
                        return gauge.finish();
                    }
                };
                let deviation = (lhs - rhs).abs() / (1.0 + lhs);
                gauge.record(deviation, THRESHOLD, "shifted key equation drifted", || {
                    pair_witness(
                        &[("p", p.matrix()), ("q", q.matrix())],
                        json!({"delta": delta, "eps": eps, "lhs": lhs, "rhs": rhs}),
                    )
                });
            }
        }
    }
    gauge.finish()
}

/// Case split on the boundary value of the representing function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseBranch {
    /// `f(0+) = 0`: the map is shown positive homogeneous.
    F0Zero,
    /// `f(0+) > 0`: the shifted maps are shown orthogonality preserving.
    F0Positive,
}

pub fn classify_case(sigma: &MeanDescriptor) -> CaseBranch {
    if sigma.function().f_at_0() <= 1e-12 {
        CaseBranch::F0Zero
    } else {
        CaseBranch::F0Positive
    }
}

/// Replay of the homogeneity argument: the geometric-norm identity
/// `|A # P| = |φ(A) # ψ_ε(P)|`, positive homogeneity `φ(tA) = tφ(A)` and
/// the congruence factor `φ(I)^{1/2} = I`.
pub fn check_case1_homogeneity(map: &PreserverMap, cfg: &PipelineConfig) -> StageVerdict {
    const HOMOGENEITY_THRESHOLD: f64 = 1e-7;
    const IDENTITY_THRESHOLD: f64 = 1e-6;
    let mut gauge = Gauge::new("homogeneity_or_orthogonality");
    let n = map.dim();
    let geometric = MeanDescriptor::geometric();
    let rungs = cfg.ladder.rungs();
    let eps = rungs[rungs.len() / 2];
    let Ok(psi) = PsiEps::new(map, eps) else {
        gauge.fail("invalid epsilon", json!({"eps": eps}));
        return gauge.finish();
    };
    let mut rng = SampleRng::seed_from_u64(cfg.seed ^ 0xA009);

    // congruence factor: phi(I) should already be the identity
    match map.apply(&HermitianMatrix::identity(n), &cfg.pol) {
        Ok(phi_id) => {
            let deviation = phi_id.sub(&HermitianMatrix::identity(n)).operator_norm();
            gauge.record(deviation, HOMOGENEITY_THRESHOLD, "congruence factor differs from identity", || {
                pair_witness(&[("phi_identity", &phi_id)], json!({}))
            });
        }
        Err(e) => {
            gauge.fail("map evaluation failed on the identity", json!({"error": e.to_string()}));
            return gauge.finish();
        }
    }

    for trial in 0..cfg.trials {
        let a = sampling::random_pd(n, &mut rng);
        // geometric-norm identity
        let rank = if n == 1 { 1 } else { 1 + rng.index(n - 1) };
        let p = sampling::random_projection(n, rank, &mut rng);
        let lhs = mean_spectral(&geometric, &a, p.matrix(), &cfg.pol)
            .map(|m| m.operator_norm());
        let fa = map.apply(&a, &cfg.pol);
        let psi_p = psi.apply(p.matrix(), &cfg.pol);
        match (lhs, &fa, psi_p) {
            (Ok(lhs), Ok(fa_m), Ok(psi_p)) => {
                match mean_spectral(&geometric, fa_m, &psi_p, &cfg.pol) {
                    Ok(m) => {
                        let rhs = m.operator_norm();
                        let deviation = (lhs - rhs).abs() / (1.0 + lhs);
                        gauge.record(deviation, IDENTITY_THRESHOLD, "geometric norm identity drifted", || {
                            pair_witness(
                                &[("a", &a), ("p", p.matrix())],
                                json!({"trial": trial, "lhs": lhs, "rhs": rhs}),
                            )
                        });
                    }
                    Err(e) => {
                        gauge.fail(
                            "geometric mean evaluation failed on the image",
                            json!({"trial": trial, "error": e.to_string()}),
                        );
                        break;
                    }
                }
            }
            _ => {
                gauge.fail("evaluation failed", json!({"trial": trial}));
                break;
            }
        }
        // positive homogeneity
        let Ok(fa) = fa else { break };
        for &t in &[0.5, 2.0, 7.3] {
            match map.apply(&a.scale(t), &cfg.pol) {
                Ok(fta) => {
                    let deviation =
                        fta.sub(&fa.scale(t)).operator_norm() / (t * (1.0 + fa.operator_norm()));
                    gauge.record(deviation, HOMOGENEITY_THRESHOLD, "map is not positive homogeneous", || {
                        pair_witness(&[("a", &a)], json!({"t": t, "trial": trial}))
                    });
                }
                Err(e) => {
                    gauge.fail(
                        "map evaluation failed on a scaled element",
                        json!({"t": t, "error": e.to_string()}),
                    );
                    return gauge.finish();
                }
            }
        }
    }
    gauge.finish()
}

/// Replay of the orthogonality argument: the h-part decomposition and its
/// projection-norm value, the norm chain forcing
/// `|ψ_ε(P) + ψ_ε(Q)| <= 1`, vanishing products of images of orthogonal
/// projections, and of images of orthogonal semidefinite pairs.
pub fn check_case2_orthogonality(
    map: &PreserverMap,
    sigma: &MeanDescriptor,
    cfg: &PipelineConfig,
) -> StageVerdict {
    const PROJECTION_THRESHOLD: f64 = 1e-7;
    const PSD_THRESHOLD: f64 = 1e-6;
    const IDENTITY_THRESHOLD: f64 = 1e-6;
    let mut gauge = Gauge::new("homogeneity_or_orthogonality");
    let n = map.dim();
    if n < 2 {
        gauge.record(0.0, PROJECTION_THRESHOLD, "dimension 1: no orthogonal pairs to test", || json!({}));
        return gauge.finish();
    }
    let alpha = sigma.function().f_at_0();
    let h_conn = sigma.h_connection();
    let rungs = cfg.ladder.rungs();
    let eps = rungs[rungs.len() / 2];
    let Ok(psi) = PsiEps::new(map, eps) else {
        gauge.fail("invalid epsilon", json!({"eps": eps}));
        return gauge.finish();
    };
    let mut rng = SampleRng::seed_from_u64(cfg.seed ^ 0xA00A);

    for trial in 0..cfg.trials {
        let rank_p = 1 + rng.index(n - 1);
        let rank_q = 1 + rng.index(n - rank_p);
        let (p, q) = sampling::orthogonal_projection_pair(n, rank_p, rank_q, &mut rng);
        let (psi_p, psi_q) = match (
            psi.apply(p.matrix(), &cfg.pol),
            psi.apply(q.matrix(), &cfg.pol),
        ) {
            (Ok(x), Ok(y)) => (x, y),
            _ => {
                gauge.fail(
                    "psi evaluation failed on orthogonal projections",
                    pair_witness(&[("p", p.matrix()), ("q", q.matrix())], json!({"trial": trial})),
                );
                break;
            }
        };

        if let Some(h_conn) = &h_conn {
            let h = h_conn.function();
            for &delta in &[1e-1, 1e-2, 1e-3] {
                let shifted = q.matrix().shift(delta);
                // decomposition: σ = α(first + second) + σ_h on this pair
                let full = mean_spectral(sigma, &shifted, p.matrix(), &cfg.pol);
                let h_term = mean_spectral(h_conn, &shifted, p.matrix(), &cfg.pol);
                let (Ok(full), Ok(h_term)) = (full, h_term) else {
                    gauge.fail("mean evaluation failed in the decomposition", json!({"delta": delta}));
                    return gauge.finish();
                };
                let affine = shifted.add(p.matrix()).scale(alpha);
                let rebuilt = affine.add(&h_term);
                let dev_split = full.sub(&rebuilt).operator_norm() / (1.0 + full.operator_norm());
                gauge.record(dev_split, IDENTITY_THRESHOLD, "affine + h-part decomposition drifted", || {
                    pair_witness(
                        &[("p", p.matrix()), ("q", q.matrix())],
                        json!({"delta": delta, "trial": trial}),
                    )
                });
                // |(Q + δI) σ_h P| = h(δ)
                let h_delta = h.eval(delta).expect("delta > 0");
                let dev_h = (h_term.operator_norm() - h_delta).abs() / (1.0 + h_delta);
                gauge.record(dev_h, IDENTITY_THRESHOLD, "h-part projection norm drifted from h(delta)", || {
                    pair_witness(
                        &[("p", p.matrix()), ("q", q.matrix())],
                        json!({"delta": delta, "h_delta": h_delta, "norm": h_term.operator_norm()}),
                    )
                });
                // chain: α|ψ(Q) + ψ(P)| <= |α(Q + δI + P) + h(δ)I|
                let chain_rhs = affine.shift(h_delta).operator_norm();
                let chain_lhs = alpha * psi_q.add(&psi_p).operator_norm();
                let deficit = (chain_lhs - chain_rhs).max(0.0) / (1.0 + chain_rhs);
                gauge.record(deficit, PROJECTION_THRESHOLD, "norm chain inequality violated", || {
                    pair_witness(
                        &[("p", p.matrix()), ("q", q.matrix())],
                        json!({"delta": delta, "lhs": chain_lhs, "rhs": chain_rhs}),
                    )
                });
            }
        }

        // limit conclusion: |ψ(P) + ψ(Q)| <= 1
        let sum_norm = psi_p.add(&psi_q).operator_norm();
        gauge.record((sum_norm - 1.0).max(0.0), PROJECTION_THRESHOLD, "image projections overlap in norm", || {
            pair_witness(
                &[("p", p.matrix()), ("q", q.matrix())],
                json!({"trial": trial, "sum_norm": sum_norm}),
            )
        });
        // product vanishes
        let product = (psi_p.as_matrix() * psi_q.as_matrix()).norm();
        gauge.record(product, PROJECTION_THRESHOLD, "image projections fail orthogonality", || {
            pair_witness(
                &[("p", p.matrix()), ("q", q.matrix()), ("psi_p", &psi_p), ("psi_q", &psi_q)],
                json!({"trial": trial, "product_norm": product}),
            )
        });

        // general orthogonal semidefinite pairs
        let u = sampling::haar_unitary(n, &mut rng);
        let split = 1 + rng.index(n - 1);
        let spec_a: Vec<f64> =
            (0..n).map(|i| if i < split { rng.uniform(0.1, 1.0) } else { 0.0 }).collect();
        let spec_b: Vec<f64> =
            (0..n).map(|i| if i >= split { rng.uniform(0.1, 1.0) } else { 0.0 }).collect();
        let a = sampling::hermitian_with_spectrum(&u, &spec_a);
        let b = sampling::hermitian_with_spectrum(&u, &spec_b);
        if let (Ok(pa), Ok(pb)) = (psi.apply(&a, &cfg.pol), psi.apply(&b, &cfg.pol)) {
            let product = (pa.as_matrix() * pb.as_matrix()).norm()
                / ((1.0 + pa.operator_norm()) * (1.0 + pb.operator_norm()));
            gauge.record(product, PSD_THRESHOLD, "images of an orthogonal pair fail orthogonality", || {
                pair_witness(
                    &[("a", &a), ("b", &b)],
                    json!({"trial": trial, "product_norm": product}),
                )
            });
        }
    }
    gauge.finish()
}

/// Distance used by tests to reason about the spectral projection check.
#[cfg(test)]
pub(crate) fn projection_distance_for_tests(a: &HermitianMatrix) -> f64 {
    projection_distance(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::SampleRng;

    fn cfg() -> PipelineConfig {
        PipelineConfig { trials: 20, ..PipelineConfig::default() }
    }

    fn unitary_map(n: usize, seed: u64) -> PreserverMap {
        let mut rng = SampleRng::seed_from_u64(seed);
        PreserverMap::jordan_unitary(sampling::haar_unitary(n, &mut rng)).unwrap()
    }

    #[test]
    fn norm_preservation_verdicts() {
        let sigma = MeanDescriptor::geometric();
        let v = check_norm_preservation(&unitary_map(3, 1), &sigma, &cfg());
        assert_eq!(v.status, StageStatus::Pass, "{v:?}");

        // doubling map scales the arithmetic mean norm
        let doubling = PreserverMap::custom("doubling", 3, |a| Ok(a.scale(2.0)));
        let v = check_norm_preservation(&doubling, &MeanDescriptor::arithmetic(), &cfg());
        assert_eq!(v.status, StageStatus::Fail);
        assert!(v.witness.is_some());

        // non-unitary congruence changes geometric mean norms
        let c = HermitianMatrix::from_diagonal(&[1.0, 2.0, 1.0]);
        let congruence = PreserverMap::congruence(c, PreserverMap::identity(3)).unwrap();
        let v = check_norm_preservation(&congruence, &sigma, &cfg());
        assert_eq!(v.status, StageStatus::Fail);
    }

    #[test]
    fn order_iso_verdicts() {
        let v = check_order_iso(&unitary_map(3, 2), &cfg());
        assert_eq!(v.status, StageStatus::Pass, "{v:?}");

        let inversion = PreserverMap::custom("inversion", 3, |a| {
            crate::hermitian::spectral_apply(|l| Some(1.0 / l), a)
        });
        let v = check_order_iso(&inversion, &cfg());
        assert_eq!(v.status, StageStatus::Fail);
    }

    #[test]
    fn unit_scalar_verdicts() {
        let v = check_unit_scalars(&unitary_map(2, 3), &cfg());
        assert_eq!(v.status, StageStatus::Pass);

        let c2 = PreserverMap::congruence(
            HermitianMatrix::identity(2).scale(2.0),
            PreserverMap::identity(2),
        )
        .unwrap();
        let v = check_unit_scalars(&c2, &cfg());
        assert_eq!(v.status, StageStatus::Fail);

        let t = PreserverMap::jordan_transpose(nalgebra::DMatrix::identity(2, 2)).unwrap();
        assert_eq!(check_unit_scalars(&t, &cfg()).status, StageStatus::Pass);
    }

    #[test]
    fn psi_wellformed_verdicts() {
        let v = check_psi_wellformed(&unitary_map(3, 4), &cfg());
        assert_eq!(v.status, StageStatus::Pass, "{v:?}");
    }

    #[test]
    fn projection_preservation_verdicts() {
        let v = check_projection_preservation(&unitary_map(3, 5), &cfg());
        assert_eq!(v.status, StageStatus::Pass, "{v:?}");

        let noisy =
            PreserverMap::perturbed(PreserverMap::identity(3), 1e-2, 11).unwrap();
        let v = check_projection_preservation(&noisy, &cfg());
        assert_eq!(v.status, StageStatus::Fail);
        // the witness spectrum sits off {0,1} by roughly the noise scale
        assert!(v.max_deviation > 1e-4 && v.max_deviation < 1.0, "{v:?}");
    }

    #[test]
    fn projection_homogeneity_verdicts() {
        let v = check_projection_homogeneity(&unitary_map(4, 6), &cfg());
        assert_eq!(v.status, StageStatus::Pass);

        // norm-distorting map violates homogeneity on scaled projections
        let distorting = PreserverMap::custom("norm-distorting", 3, |a| {
            let bump = (a.operator_norm() - 1.0).powi(2);
            Ok(a.shift(bump))
        });
        let v = check_projection_homogeneity(&distorting, &cfg());
        assert_eq!(v.status, StageStatus::Fail);
    }

    #[test]
    fn eps_independence_verdicts() {
        let v = check_eps_independence(&unitary_map(3, 7), &cfg());
        assert_eq!(v.status, StageStatus::Pass);
    }

    #[test]
    fn key_equation_verdicts() {
        for sigma in [MeanDescriptor::geometric(), MeanDescriptor::arithmetic()] {
            let v = check_key_equation(&unitary_map(3, 8), &sigma, &cfg());
            assert_eq!(v.status, StageStatus::Pass, "{}: {v:?}", sigma.label());
            let v = check_key_equation(&PreserverMap::identity(3), &sigma, &cfg());
            assert_eq!(v.status, StageStatus::Pass);
        }
        let noisy =
            PreserverMap::perturbed(PreserverMap::identity(3), 1e-2, 13).unwrap();
        let v = check_key_equation(&noisy, &MeanDescriptor::geometric(), &cfg());
        assert_eq!(v.status, StageStatus::Fail);
        assert!(v.witness.is_some());
    }

    #[test]
    fn case_classification() {
        assert_eq!(classify_case(&MeanDescriptor::geometric()), CaseBranch::F0Zero);
        assert_eq!(classify_case(&MeanDescriptor::harmonic()), CaseBranch::F0Zero);
        assert_eq!(classify_case(&MeanDescriptor::logarithmic()), CaseBranch::F0Zero);
        assert_eq!(classify_case(&MeanDescriptor::arithmetic()), CaseBranch::F0Positive);
        assert_eq!(
            classify_case(&MeanDescriptor::power(0.5).unwrap()),
            CaseBranch::F0Positive
        );
        assert_eq!(
            classify_case(&MeanDescriptor::power(-0.5).unwrap()),
            CaseBranch::F0Zero
        );
    }

    #[test]
    fn case1_verdicts() {
        let v = check_case1_homogeneity(&unitary_map(3, 9), &cfg());
        assert_eq!(v.status, StageStatus::Pass, "{v:?}");
        let t = PreserverMap::jordan_transpose(nalgebra::DMatrix::identity(3, 3)).unwrap();
        assert_eq!(check_case1_homogeneity(&t, &cfg()).status, StageStatus::Pass);

        let distorting = PreserverMap::custom("norm-distorting", 3, |a| {
            let bump = (a.operator_norm() - 1.0).powi(2);
            Ok(a.shift(bump))
        });
        let v = check_case1_homogeneity(&distorting, &cfg());
        assert_eq!(v.status, StageStatus::Fail);
        assert!(v.witness.is_some(), "homogeneity failure needs an (A, t) witness");
    }

    #[test]
    fn case2_verdicts() {
        for sigma in [MeanDescriptor::arithmetic(), MeanDescriptor::power(0.5).unwrap()] {
            let v = check_case2_orthogonality(&unitary_map(3, 10), &sigma, &cfg());
            assert_eq!(v.status, StageStatus::Pass, "{}: {v:?}", sigma.label());
        }
        let noisy =
            PreserverMap::perturbed(PreserverMap::identity(3), 1e-2, 17).unwrap();
        let v = check_case2_orthogonality(&noisy, &MeanDescriptor::arithmetic(), &cfg());
        assert_eq!(v.status, StageStatus::Fail);
        // orthogonality residual is of the order of the noise
        assert!(v.max_deviation > 1e-4, "{v:?}");
    }

    #[test]
    fn projection_distance_measures_spectra() {
        let p = HermitianMatrix::from_diagonal(&[1.0, 0.0]);
        assert!(projection_distance_for_tests(&p) < 1e-15);
        let off = HermitianMatrix::from_diagonal(&[0.9, 0.1]);
        assert!((projection_distance_for_tests(&off) - 0.1).abs() < 1e-12);
    }
}
