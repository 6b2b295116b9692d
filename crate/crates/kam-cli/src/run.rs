//! Command implementations.

use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};

use kam_core::error::Error;
use kam_core::json::{MapSpecJson, MatrixJson, MeasureJson};
use kam_core::means::{
    mean_psd_limit, mean_quadrature, mean_spectral, norm_of_mean, EpsLadder, MeanDescriptor,
};
use kam_core::order::order_from_projection_norms;
use kam_core::preserver::{run_pipeline, Overall, PipelineConfig, PreserverMap};
use kam_core::verify::{self, CheckRecord, SuiteReport};
use kam_core::{cone_membership, loewner_leq, ConeMembership, HermitianMatrix, TolerancePolicy};

use crate::report::{ConfigEcho, Report};
use crate::CommonOpts;
use crate::{EXIT_CONDITIONING, EXIT_CONE, EXIT_FAILED, EXIT_INCONCLUSIVE, EXIT_OK, EXIT_SCHEMA};

pub fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::NotPositiveDefinite { .. }
        | Error::NotPositiveSemidefinite { .. }
        | Error::NotProjection { .. }
        | Error::NotEffect { .. }
        | Error::ZeroProjection => EXIT_CONE,
        Error::IllConditioned { .. } | Error::LadderNotMonotone { .. } => EXIT_CONDITIONING,
        _ => EXIT_SCHEMA,
    }
}

fn policy(common: &CommonOpts) -> Result<TolerancePolicy, Error> {
    let base = TolerancePolicy::default();
    TolerancePolicy::new(
        common.order_tol.unwrap_or(base.order_tol),
        common.eq_tol.unwrap_or(base.eq_tol),
        common.psd_floor.unwrap_or(base.psd_floor),
    )
}

/// Seed resolution: KAM_SEED overrides the flag (and the default).
fn seed(common: &CommonOpts) -> Result<u64, Error> {
    match std::env::var("KAM_SEED") {
        Ok(raw) => raw.parse().map_err(|_| Error::InvalidConfig {
            reason: format!("KAM_SEED value `{raw}` is not an integer"),
        }),
        Err(_) => Ok(common.seed),
    }
}

fn validate(common: &CommonOpts) -> Result<(), Error> {
    if !(1..=16).contains(&common.dim) {
        return Err(Error::InvalidConfig {
            reason: format!("dim {} outside [1, 16]", common.dim),
        });
    }
    if !(1..=1_000_000).contains(&common.trials) {
        return Err(Error::InvalidConfig {
            reason: format!("trials {} outside [1, 1000000]", common.trials),
        });
    }
    Ok(())
}

fn config_echo(common: &CommonOpts, mean: Option<&str>) -> Result<ConfigEcho, Error> {
    let pol = policy(common)?;
    Ok(ConfigEcho {
        mean: mean.map(str::to_string),
        dim: common.dim,
        trials: common.trials,
        seed: seed(common)?,
        order_tol: pol.order_tol,
        eq_tol: pol.eq_tol,
        psd_floor: pol.psd_floor,
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Schema {
        reason: format!("cannot read {}: {e}", path.display()),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Schema {
        reason: format!("cannot parse {}: {e}", path.display()),
    })
}

fn read_matrix(path: &Path) -> Result<HermitianMatrix, Error> {
    let parsed: MatrixJson = read_json(path)?;
    if parsed.n > 16 {
        return Err(Error::Schema {
            reason: format!("matrix dimension {} exceeds the CLI cap of 16", parsed.n),
        });
    }
    parsed.to_hermitian()
}

/// Resolve a mean: catalog name first, otherwise a measure JSON path.
fn resolve_mean(spec: &str) -> Result<MeanDescriptor, Error> {
    if let Ok(sigma) = MeanDescriptor::by_name(spec) {
        return Ok(sigma);
    }
    let path = Path::new(spec.strip_prefix("measure:").unwrap_or(spec));
    if path.exists() {
        let measure = read_json::<MeasureJson>(path)?.to_measure()?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "measure".to_string());
        return Ok(MeanDescriptor::from_measure(measure, label));
    }
    Err(Error::InvalidConfig {
        reason: format!("`{spec}` is neither a catalog mean nor a readable measure file"),
    })
}

fn emit(mut report: Report, started: Instant, out: Option<&Path>) -> Result<(), Error> {
    report.wall_time_ms = started.elapsed().as_millis();
    let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Schema {
        reason: format!("report serialization failed: {e}"),
    })?;
    if let Some(path) = out {
        std::fs::write(path, &text).map_err(|e| Error::Schema {
            reason: format!("cannot write {}: {e}", path.display()),
        })?;
    }
    println!("{text}");
    Ok(())
}

fn summarize(checks: &[CheckRecord]) {
    for c in checks {
        eprintln!(
            "[{}] {} (max deviation {:.3e}, tolerance {:.3e}, trials {})",
            if c.pass { "pass" } else { "FAIL" },
            c.id,
            c.max_deviation,
            c.tolerance,
            c.trials
        );
    }
}

pub fn cmd_mean(
    mean: &str,
    a: &Path,
    b: &Path,
    common: &CommonOpts,
    result_path: Option<&Path>,
) -> Result<u8, Error> {
    let started = Instant::now();
    validate(common)?;
    let pol = policy(common)?;
    let sigma = resolve_mean(mean)?;
    let a = read_matrix(a)?;
    let b = read_matrix(b)?;
    if cone_membership(&b, &pol) == ConeMembership::NotPsd {
        return Err(Error::NotPositiveSemidefinite { lambda_min: b.min_eigenvalue() });
    }
    let value = mean_spectral(&sigma, &a, &b, &pol)?;
    let matrix_json = MatrixJson::from_hermitian(&value);
    if let Some(path) = result_path {
        let text = serde_json::to_string_pretty(&matrix_json).map_err(|e| Error::Schema {
            reason: e.to_string(),
        })?;
        std::fs::write(path, text).map_err(|e| Error::Schema {
            reason: format!("cannot write {}: {e}", path.display()),
        })?;
    }
    let mut payload = json!({
        "result": matrix_json,
        "norm_spectral": value.operator_norm(),
    });
    if sigma.measure().is_some() && cone_membership(&b, &pol) == ConeMembership::Pd {
        let quadrature = mean_quadrature(&sigma, &a, &b, &pol)?;
        let deviation = value.sub(&quadrature).operator_norm()
            / (1.0 + a.operator_norm() + b.operator_norm());
        payload["norm_quadrature"] = json!(quadrature.operator_norm());
        payload["route_deviation"] = json!(deviation);
    }
    let mut report = Report::new(format!("mean {}", sigma.label()), config_echo(common, Some(mean))?);
    report.payload = Some(payload);
    emit(report, started, common.out.as_deref())?;
    Ok(EXIT_OK)
}

pub fn cmd_norm_mean(mean: &str, a: &Path, b: &Path, common: &CommonOpts) -> Result<u8, Error> {
    let started = Instant::now();
    validate(common)?;
    let pol = policy(common)?;
    let sigma = resolve_mean(mean)?;
    let a = read_matrix(a)?;
    let b = read_matrix(b)?;
    let ladder = EpsLadder::default();
    let norm = norm_of_mean(&sigma, &a, &b, &ladder, &pol)?;
    let mut report =
        Report::new(format!("norm-mean {}", sigma.label()), config_echo(common, Some(mean))?);
    report.payload = Some(json!({"norm": norm}));
    emit(report, started, common.out.as_deref())?;
    Ok(EXIT_OK)
}

fn suite_to_exit(report: &Report) -> u8 {
    if report.all_pass() {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

fn push_suite(report: &mut Report, suite: SuiteReport) {
    report.checks.extend(suite.checks);
}

pub fn cmd_check_axioms(mean: &str, common: &CommonOpts) -> Result<u8, Error> {
    let started = Instant::now();
    validate(common)?;
    let pol = policy(common)?;
    let sigma = resolve_mean(mean)?;
    let seed = seed(common)?;
    let mut report = Report::new(
        format!("check-mean-axioms {}", sigma.label()),
        config_echo(common, Some(mean))?,
    );
    push_suite(&mut report, verify::axiom_suite(&sigma, common.dim, common.trials, seed, &pol)?);
    summarize(&report.checks);
    let code = suite_to_exit(&report);
    emit(report, started, common.out.as_deref())?;
    Ok(code)
}

pub fn cmd_check_order(mean: &str, a: &Path, b: &Path, common: &CommonOpts) -> Result<u8, Error> {
    let started = Instant::now();
    validate(common)?;
    let pol = policy(common)?;
    let sigma = resolve_mean(mean)?;
    let a = read_matrix(a)?;
    let b = read_matrix(b)?;
    let direct = loewner_leq(&a, &b, &pol)?;
    let check = order_from_projection_norms(&sigma, &a, &b, &pol)?;
    let consistent = direct == check.holds;
    let witness = check.witness.as_ref().map(|w| {
        json!({
            "projection": MatrixJson::from_hermitian(w.projection.matrix()),
            "epsilon": w.epsilon,
            "norm_first": w.norm_first,
            "norm_second": w.norm_second,
        })
    });
    let mut report =
        Report::new(format!("check-order {}", sigma.label()), config_echo(common, Some(mean))?);
    report.payload = Some(json!({
        "direct_order": direct,
        "criterion_order": check.holds,
        "consistent": consistent,
        "witness": witness,
    }));
    emit(report, started, common.out.as_deref())?;
    Ok(if consistent { EXIT_OK } else { EXIT_FAILED })
}

pub fn cmd_verify(
    suite: Option<&str>,
    mean: Option<&str>,
    common: &CommonOpts,
    replay: Option<&Path>,
) -> Result<u8, Error> {
    let started = Instant::now();
    validate(common)?;
    let pol = policy(common)?;
    let seed = seed(common)?;

    if let Some(witness_path) = replay {
        let value: Value = read_json(witness_path)?;
        let record = verify::replay_witness(&value, &pol)?;
        let mut report = Report::new("verify --replay", config_echo(common, mean)?);
        report.checks.push(record);
        summarize(&report.checks);
        let code = suite_to_exit(&report);
        emit(report, started, common.out.as_deref())?;
        return Ok(code);
    }

    let suite = suite.ok_or_else(|| Error::InvalidConfig {
        reason: "a suite name is required unless --replay is given".into(),
    })?;
    let need_mean = || {
        mean.ok_or_else(|| Error::InvalidConfig {
            reason: format!("suite `{suite}` needs --mean"),
        })
        .and_then(resolve_mean)
    };
    let mut report = Report::new(format!("verify {suite}"), config_echo(common, mean)?);
    match suite {
        "axioms" => {
            let sigma = need_mean()?;
            push_suite(
                &mut report,
                verify::axiom_suite(&sigma, common.dim, common.trials, seed, &pol)?,
            );
        }
        "maximality" => {
            push_suite(
                &mut report,
                verify::maximality_suite(
                    common.trials,
                    common.trials,
                    common.trials,
                    seed,
                    &pol,
                )?,
            );
            push_suite(&mut report, verify::inf_routes_suite(common.trials, seed, &pol)?);
        }
        "scaling" => {
            push_suite(&mut report, verify::scaling_suite(common.trials, seed, &pol)?);
        }
        "projection-norm" => {
            push_suite(&mut report, verify::projection_norm_suite(common.trials, seed, &pol)?);
            push_suite(&mut report, verify::relation_identity_suite(common.trials, seed, &pol)?);
        }
        "order-criterion" => {
            let sigma = need_mean()?;
            push_suite(
                &mut report,
                verify::order_criterion_suite(&sigma, &[common.dim], common.trials, seed, &pol)?,
            );
        }
        "h-part" => {
            let sigma = need_mean()?;
            push_suite(&mut report, verify::h_part_suite(&sigma)?);
        }
        "orthogonality" => {
            let sigma = need_mean()?;
            push_suite(&mut report, verify::orthogonality_suite(&sigma, common.trials, seed, &pol)?);
        }
        other => {
            return Err(Error::InvalidConfig {
                reason: format!(
                    "unknown suite `{other}`; expected axioms|maximality|scaling|projection-norm|order-criterion|h-part|orthogonality"
                ),
            })
        }
    }
    summarize(&report.checks);
    let code = suite_to_exit(&report);
    emit(report, started, common.out.as_deref())?;
    Ok(code)
}

pub fn cmd_preserver(map: &Path, mean: &str, common: &CommonOpts) -> Result<u8, Error> {
    let started = Instant::now();
    validate(common)?;
    let pol = policy(common)?;
    let sigma = resolve_mean(mean)?;
    let spec: MapSpecJson = read_json(map)?;
    let map = PreserverMap::from_spec(&spec, Some(common.dim))?;
    if map.dim() != common.dim && spec.kind != "identity" {
        eprintln!(
            "note: map dimension {} taken from the map file (flag --dim {} ignored)",
            map.dim(),
            common.dim
        );
    }
    let cfg = PipelineConfig {
        trials: common.trials,
        seed: seed(common)?,
        ladder: EpsLadder::default(),
        pol,
    };
    let pipeline = run_pipeline(&map, &sigma, &cfg)?;
    for stage in &pipeline.stages {
        eprintln!(
            "[{}] {} (ratio {:.3e})",
            match stage.status {
                kam_core::preserver::StageStatus::Pass => "pass",
                kam_core::preserver::StageStatus::Inconclusive => "????",
                kam_core::preserver::StageStatus::Fail => "FAIL",
            },
            stage.stage,
            stage.ratio
        );
    }
    let code = match &pipeline.overall {
        Overall::CertifiedJordan => EXIT_OK,
        Overall::Rejected { .. } => EXIT_FAILED,
        Overall::Inconclusive { .. } => EXIT_INCONCLUSIVE,
    };
    let mut report =
        Report::new(format!("preserver run {}", sigma.label()), config_echo(common, Some(mean))?);
    report.payload = Some(serde_json::to_value(&pipeline).map_err(|e| Error::Schema {
        reason: e.to_string(),
    })?);
    emit(report, started, common.out.as_deref())?;
    Ok(code)
}

pub fn cmd_measure_equivalence(measure: &Path, common: &CommonOpts) -> Result<u8, Error> {
    let started = Instant::now();
    validate(common)?;
    let pol = policy(common)?;
    let parsed = read_json::<MeasureJson>(measure)?.to_measure()?;
    let sigma = MeanDescriptor::from_measure(parsed, "measure-under-test");
    let seed = seed(common)?;
    let mut rng = kam_core::sampling::SampleRng::seed_from_u64(seed);
    let ladder = EpsLadder::default();
    let mut worst: f64 = 0.0;
    for _ in 0..common.trials {
        let a = kam_core::sampling::random_pd(common.dim, &mut rng);
        let b = kam_core::sampling::random_pd(common.dim, &mut rng);
        let spectral = mean_spectral(&sigma, &a, &b, &pol)?;
        let quadrature = mean_quadrature(&sigma, &a, &b, &pol)?;
        let deviation = spectral.sub(&quadrature).operator_norm()
            / (1.0 + a.operator_norm() + b.operator_norm());
        worst = worst.max(deviation);
        // the boundary route must stay consistent too
        let _ = mean_psd_limit(&sigma, &a, &b, &ladder, &pol)?;
    }
    let pass = worst <= 1e-8;
    let mut report = Report::new("measure check-equivalence", config_echo(common, None)?);
    report.payload = Some(json!({"max_route_deviation": worst, "tolerance": 1e-8, "pass": pass}));
    emit(report, started, common.out.as_deref())?;
    Ok(if pass { EXIT_OK } else { EXIT_FAILED })
}
