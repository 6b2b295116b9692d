//! Stage orchestration and the pipeline report.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::means::MeanDescriptor;

use super::jordan::{extract_jordan, JordanResiduals};
use super::stages::{
    check_case1_homogeneity, check_case2_orthogonality, check_eps_independence,
    check_key_equation, check_norm_preservation, check_order_iso, check_projection_homogeneity,
    check_projection_preservation, check_psi_wellformed, check_unit_scalars, classify_case,
    CaseBranch, PipelineConfig, StageStatus, StageVerdict,
};
use super::PreserverMap;


/// Final verdict of a pipeline run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Overall {
    CertifiedJordan,
    Rejected { stage: String },
    Inconclusive { stage: String },
}

/// Structured result of the full proof-chain replay for one candidate map
/// and one symmetric mean.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub map: String,
    pub mean: String,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub case_branch: CaseBranch,
    pub surjectivity_assumed: bool,
    pub stages: Vec<StageVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extraction: Option<JordanResiduals>,
    pub overall: Overall,
}

impl PipelineReport {
    pub fn certified(&self) -> bool {
        self.overall == Overall::CertifiedJordan
    }

    pub fn stage(&self, name: &str) -> Option<&StageVerdict> {
        self.stages.iter().find(|s| s.stage == name)
    }
}

/// Run every stage in proof order with early exit on rejection.
///
/// Certification requires every stage to pass and the extraction residuals
/// to sit below their thresholds; a rejected stage carries its witness.
pub fn run_pipeline(
    map: &PreserverMap,
    sigma: &MeanDescriptor,
    cfg: &PipelineConfig,
) -> Result<PipelineReport> {
    if !sigma.is_symmetric() {
        return Err(Error::Hypothesis {
            reason: format!("pipeline requires a symmetric mean, got {}", sigma.label()),
        });
    }
    if !sigma.function().is_normalized() {
        return Err(Error::Hypothesis {
            reason: format!("pipeline requires a normalized mean, got {}", sigma.label()),
        });
    }

    let case_branch = classify_case(sigma);
    let mut report = PipelineReport {
        map: map.describe(),
        mean: sigma.label().to_string(),
        dim: map.dim(),
        trials: cfg.trials,
        seed: cfg.seed,
        case_branch,
        surjectivity_assumed: map.surjectivity_assumed(),
        stages: Vec::new(),
        extraction: None,
        overall: Overall::CertifiedJordan,
    };

    let stage_fns: Vec<Box<dyn Fn() -> StageVerdict>> = vec![
        Box::new(|| check_norm_preservation(map, sigma, cfg)),
        Box::new(|| check_order_iso(map, cfg)),
        Box::new(|| check_unit_scalars(map, cfg)),
        Box::new(|| check_psi_wellformed(map, cfg)),
        Box::new(|| check_projection_preservation(map, cfg)),
        Box::new(|| check_projection_homogeneity(map, cfg)),
        Box::new(|| check_eps_independence(map, cfg)),
        Box::new(|| check_key_equation(map, sigma, cfg)),
        Box::new(|| match case_branch {
            CaseBranch::F0Zero => check_case1_homogeneity(map, cfg),
            CaseBranch::F0Positive => check_case2_orthogonality(map, sigma, cfg),
        }),
    ];

    let mut first_inconclusive: Option<String> = None;
    for stage_fn in stage_fns {
        let verdict = stage_fn();
        let status = verdict.status;
        let name = verdict.stage.clone();
        report.stages.push(verdict);
        match status {
            StageStatus::Fail => {
                report.overall = Overall::Rejected { stage: name };
                return Ok(report);
            }
            StageStatus::Inconclusive => {
                first_inconclusive.get_or_insert(name);
            }
            StageStatus::Pass => {}
        }
    }

    // extraction runs only after the chain holds
    const REPRODUCTION_THRESHOLD: f64 = 1e-7;
    const UNITAL_THRESHOLD: f64 = 1e-7;
    const SQUARE_THRESHOLD: f64 = 1e-6;
    const CONDITION_CAP: f64 = 1e8;
    let eps = cfg.ladder.last();
    let verdict = match extract_jordan(map, eps, cfg.trials.clamp(5, 30), cfg.seed, &cfg.pol) {
        Ok(extraction) => {
            let r = &extraction.residuals;
            let ratio = (r.reproduction / REPRODUCTION_THRESHOLD)
                .max(r.unital / UNITAL_THRESHOLD)
                .max(r.square / SQUARE_THRESHOLD)
                .max(if r.condition.is_finite() { 0.0 } else { f64::INFINITY });
            let status = if ratio >= 10.0 || r.condition > CONDITION_CAP {
                StageStatus::Fail
            } else if ratio <= 1.0 {
                StageStatus::Pass
            } else {
                StageStatus::Inconclusive
            };
            let detail = if status == StageStatus::Pass {
                "linear extension reproduces the map, fixes the identity, commutes with squaring and is bijective".to_string()
            } else {
                "linear extension residuals exceed thresholds; the map is not linearizable".to_string()
            };
            report.extraction = Some(extraction.residuals.clone());
            StageVerdict {
                stage: "jordan_extraction".into(),
                status,
                ratio,
                max_deviation: r.reproduction.max(r.unital).max(r.square),
                threshold: REPRODUCTION_THRESHOLD,
                detail,
                witness: None,
            }
        }
        Err(e) => StageVerdict {
            stage: "jordan_extraction".into(),
            status: StageStatus::Fail,
            ratio: f64::INFINITY,
            max_deviation: f64::INFINITY,
            threshold: REPRODUCTION_THRESHOLD,
            detail: format!("extraction failed: {e}"),
            witness: None,
        },
    };
    let status = verdict.status;
    let name = verdict.stage.clone();
    report.stages.push(verdict);
    match status {
        StageStatus::Fail => {
            report.overall = Overall::Rejected { stage: name };
        }
        StageStatus::Inconclusive => {
            first_inconclusive.get_or_insert(name);
        }
        StageStatus::Pass => {}
    }
    if report.overall == Overall::CertifiedJordan {
        if let Some(stage) = first_inconclusive {
            report.overall = Overall::Inconclusive { stage };
        }
    }
    Ok(report)
}
