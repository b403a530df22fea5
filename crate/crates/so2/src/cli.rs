//! Command implementations behind the `so2` binary: problem analysis, raw
//! second-order queries, chain-rule queries, the oracle cross-check harness,
//! and the embedded strict-inclusion reproduction.

use crate::catalog::{self, strict_inclusion_data};
use crate::chain;
use crate::io::{self, InnerMapJson, PolyUnionJson, ProblemSpecJson, ThetaJson};
use crate::linalg::RatVector;
use crate::oracle::GraphOracle;
use crate::poly::{PolyUnion, Polyhedron};
use crate::soc;
use crate::tilt::{self, ProblemSpec, Status};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;

/// One named derivation step in a report trace.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TraceStep {
    pub step: String,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Timings {
    pub total_micros: u128,
}

/// The report emitted by every command: verdict/summary, echoed inputs, a
/// derivation trace, and optional timings (omitted where byte-identical
/// reruns are part of the contract).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Report {
    pub command: String,
    pub status: String,
    pub inputs: serde_json::Value,
    pub output: serde_json::Value,
    pub trace: Vec<TraceStep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

/// A finished command: the report plus the process exit code.
#[derive(Clone, Debug)]
pub struct CmdOutcome {
    pub report: Report,
    pub exit_code: i32,
}

/// Exit codes: 0 tilt-stable/success, 1 not-tilt-stable/failed checks,
/// 2 inapplicable or inconclusive, 3 parse error, 4 face budget exceeded,
/// 5 internal error.
pub fn exit_code_for_error(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => 3,
        Error::FaceBudget { .. } => 4,
        _ => 5,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct VerdictJson {
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspace_basis: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failing_direction: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qc_full_rank: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qc_second_order: Option<bool>,
    pub prox_regularity_note: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn verdict_to_json(v: &tilt::Verdict) -> (VerdictJson, i32) {
    let (status, reason, code) = match &v.status {
        Status::TiltStable => ("tilt_stable".to_string(), None, 0),
        Status::NotTiltStable => ("not_tilt_stable".to_string(), None, 1),
        Status::SufficientOnly => ("tilt_stable_by_sufficiency".to_string(), None, 0),
        Status::Inconclusive => ("inconclusive".to_string(), None, 2),
        Status::Inapplicable(r) => ("inapplicable".to_string(), Some(r.clone()), 2),
    };
    (
        VerdictJson {
            status,
            reason,
            multiplier: v.multiplier.as_ref().map(io::vector_to_json),
            subspace_basis: v
                .subspace
                .as_ref()
                .map(|b| b.iter().map(io::vector_to_json).collect()),
            failing_direction: v.failing_direction.as_ref().map(io::vector_to_json),
            qc_full_rank: v.qc_full_rank,
            qc_second_order: v.qc_second_order,
            prox_regularity_note: v.prox_regularity_note.clone(),
            notes: v.notes.clone(),
        },
        code,
    )
}

fn parse_json<T: for<'a> Deserialize<'a>>(what: &str, s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::parse(what, e.to_string()))
}

/// Parses a comma-separated rational vector argument like "0,1/2,-3".
pub fn parse_vector_arg(s: &str) -> Result<RatVector> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(RatVector::zeros(0));
    }
    let mut out = Vec::new();
    for part in s.split(',') {
        out.push(crate::rat::parse_rat(part)?);
    }
    Ok(RatVector(out))
}

/// Parses a point/subgradient pair argument "z1,z2;v1,v2".
pub fn parse_at_arg(s: &str) -> Result<(RatVector, RatVector)> {
    let (z, v) = s
        .split_once(';')
        .ok_or_else(|| Error::parse("--at", "expected \"z1,..;v1,..\""))?;
    Ok((parse_vector_arg(z)?, parse_vector_arg(v)?))
}

/// Full tilt-stability analysis of a ProblemSpec JSON document.
pub fn cmd_analyze(spec_json: &str, with_trace: bool) -> Result<CmdOutcome> {
    let start = std::time::Instant::now();
    let wire: ProblemSpecJson = parse_json("problem", spec_json)?;
    let spec = io::problem_from_json(&wire)?;
    let mut trace = Vec::new();
    let verdict = match &spec {
        ProblemSpec::Nlp { .. } => {
            if with_trace {
                trace.push(TraceStep {
                    step: "pipeline".into(),
                    detail: "drop inactive constraints, check LICQ, solve the KKT system, \
                             decide the strong second-order condition on the reduced subspace"
                        .into(),
                });
            }
            tilt::tilt_verdict_nlp(&spec)?
        }
        ProblemSpec::Composite { .. } => {
            if with_trace {
                trace.push(TraceStep {
                    step: "pipeline".into(),
                    detail: "solve the stationarity system for a multiplier, check full rank \
                             or the second-order qualification condition, assemble the T-map, \
                             decide positive definiteness by subspace reduction and by \
                             face-pair enumeration (the two must agree)"
                        .into(),
                });
            }
            tilt::tilt_verdict_composite(&spec)?
        }
    };
    let (vjson, code) = verdict_to_json(&verdict);
    if with_trace {
        if let Some(m) = &verdict.multiplier {
            trace.push(TraceStep {
                step: "multiplier".into(),
                detail: format!("{:?}", io::vector_to_json(m)),
            });
        }
    }
    // default reports are byte-identical across runs; timings ride along
    // only when a trace is requested
    let timings = with_trace.then(|| Timings {
        total_micros: start.elapsed().as_micros(),
    });
    let report = Report {
        command: "analyze".into(),
        status: vjson.status.clone(),
        inputs: serde_json::to_value(&wire).expect("serializable"),
        output: serde_json::to_value(&vjson).expect("serializable"),
        trace,
        timings,
    };
    Ok(CmdOutcome {
        report,
        exit_code: code,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SocRequest {
    pub theta: ThetaJson,
    pub zbar: Vec<String>,
    pub vbar: Vec<String>,
    #[serde(default)]
    pub direction: Option<Vec<String>>,
}

/// Second-order value query: emits the PolyUnion ∂²θ(z̄,v̄)(u). A direction
/// given on the command line overrides the one in the request.
pub fn cmd_soc(request_json: &str, direction_arg: Option<&str>) -> Result<CmdOutcome> {
    let req: SocRequest = parse_json("request", request_json)?;
    let theta = io::theta_from_json("theta", &req.theta)?;
    let zbar = io::vector_from_json("zbar", &req.zbar)?;
    let vbar = io::vector_from_json("vbar", &req.vbar)?;
    let u = match (direction_arg, &req.direction) {
        (Some(s), _) => parse_vector_arg(s)?,
        (None, Some(d)) => io::vector_from_json("direction", d)?,
        (None, None) => return Err(Error::parse("direction", "no direction given")),
    };
    let sys = soc::soc_system(&theta, &zbar, &vbar)?;
    let value = sys.value(&u)?;
    let report = Report {
        command: "soc".into(),
        status: "ok".into(),
        inputs: serde_json::to_value(&req).expect("serializable"),
        output: json!({
            "value": io::union_to_json_canonical(&value),
            "pair_count": sys.pairs.len(),
        }),
        trace: vec![],
        timings: None,
    };
    Ok(CmdOutcome {
        report,
        exit_code: 0,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainRequest {
    pub theta: ThetaJson,
    pub inner: InnerMapJson,
    pub xbar: Vec<String>,
    pub ybar: Vec<String>,
    #[serde(default)]
    pub direction: Option<Vec<String>>,
}

/// Chain-rule query modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainMode {
    FullRank,
    Amenable,
    Partial,
}

pub fn cmd_chain(
    request_json: &str,
    mode: ChainMode,
    check_qc_only: bool,
    override_qc2: bool,
    direction_arg: Option<&str>,
) -> Result<CmdOutcome> {
    let mut req: ChainRequest = parse_json("request", request_json)?;
    if let Some(s) = direction_arg {
        req.direction = Some(io::vector_to_json(&parse_vector_arg(s)?));
    }
    let theta = io::theta_from_json("theta", &req.theta)?;
    let inner = io::inner_map_from_json("inner", &req.inner)?;
    let xbar = io::vector_from_json("xbar", &req.xbar)?;
    let ybar = io::vector_from_json("ybar", &req.ybar)?;

    if check_qc_only {
        let (qc1, w1) = chain::check_first_order_qc(&theta, &inner, &xbar)?;
        let qc2 = chain::check_second_order_qc(&theta, &inner, &xbar, &ybar)?;
        let output = json!({
            "first_order_qc": qc1,
            "first_order_witness": w1.as_ref().map(io::vector_to_json),
            "second_order_qc": qc2.holds,
            "second_order_witness": qc2.witness.as_ref().map(|(v, d)| json!({
                "multiplier": io::vector_to_json(v),
                "direction": io::vector_to_json(d),
            })),
        });
        let status = format!("qc1={qc1} qc2={}", qc2.holds);
        return Ok(CmdOutcome {
            report: Report {
                command: "chain".into(),
                status,
                inputs: serde_json::to_value(&req).expect("serializable"),
                output,
                trace: vec![],
                timings: None,
            },
            exit_code: 0,
        });
    }

    let (kind, reps, jac, value): (String, Vec<_>, _, Option<PolyUnionJson>) = match mode {
        ChainMode::FullRank => {
            let res = chain::chain_full_rank(&theta, &inner, &xbar, &ybar)?;
            let value = match &req.direction {
                Some(d) => {
                    let u = io::vector_from_json("direction", d)?;
                    Some(io::union_to_json_canonical(&res.value(&u)?))
                }
                None => None,
            };
            (
                "exact".into(),
                res.reps.iter().map(|r| io::vector_to_json(&r.v)).collect(),
                io::matrix_to_json(&res.jac),
                value,
            )
        }
        ChainMode::Amenable => {
            let res = chain::chain_amenable_upper(&theta, &inner, &xbar, &ybar, override_qc2)?;
            let value = match &req.direction {
                Some(d) => {
                    let u = io::vector_from_json("direction", d)?;
                    Some(io::union_to_json_canonical(&res.value(&u)?))
                }
                None => None,
            };
            let kind = match res.kind {
                chain::ResultKind::UpperEstimate { qc2_verified: true } => "upper_estimate".into(),
                chain::ResultKind::UpperEstimate {
                    qc2_verified: false,
                } => "upper_estimate_unverified_hypothesis".into(),
                chain::ResultKind::Exact => "exact".into(),
            };
            (
                kind,
                res.reps.iter().map(|r| io::vector_to_json(&r.v)).collect(),
                io::matrix_to_json(&res.jac),
                value,
            )
        }
        ChainMode::Partial => {
            let res = chain::chain_partial_full_rank(&theta, &inner, &xbar, &ybar)?;
            let value = match &req.direction {
                Some(d) => {
                    let u = io::vector_from_json("direction", d)?;
                    Some(io::union_to_json_canonical(&res.extended_value(&u)?))
                }
                None => None,
            };
            (
                "exact_partial".into(),
                res.frozen
                    .reps
                    .iter()
                    .map(|r| io::vector_to_json(&r.v))
                    .collect(),
                io::matrix_to_json(&res.frozen.jac),
                value,
            )
        }
    };
    let output = json!({
        "kind": kind,
        "multipliers": reps,
        "jacobian": jac,
        "value": value,
    });
    Ok(CmdOutcome {
        report: Report {
            command: "chain".into(),
            status: "ok".into(),
            inputs: serde_json::to_value(&req).expect("serializable"),
            output,
            trace: vec![],
            timings: None,
        },
        exit_code: 0,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleRequest {
    pub theta: ThetaJson,
    pub zbar: Vec<String>,
    pub vbar: Vec<String>,
    #[serde(default)]
    pub directions: Option<Vec<Vec<String>>>,
}

fn check_one_instance(
    name: &str,
    theta: &crate::plq::PLQFunction,
    zbar: &RatVector,
    vbar: &RatVector,
    directions: &[RatVector],
    results: &mut Vec<serde_json::Value>,
) -> Result<usize> {
    let sys = soc::soc_system(theta, zbar, vbar)?;
    let oracle = GraphOracle::new(theta, zbar, vbar)?;
    let mut disagreements = 0;
    for u in directions {
        let formula = sys.value(u)?;
        let brute = oracle.soc_value(u)?;
        let agree = formula.set_eq(&brute);
        if !agree {
            disagreements += 1;
        }
        results.push(json!({
            "instance": name,
            "direction": io::vector_to_json(u),
            "agree": agree,
        }));
    }
    Ok(disagreements)
}

/// Input forms for the oracle cross check: a consolidated request document,
/// a separate θ document with an `--at "z;v"` pair and an optional direction
/// grid document, or the embedded catalog.
#[derive(Clone, Copy, Debug, Default)]
pub struct OracleArgs<'a> {
    pub input: Option<&'a str>,
    pub theta: Option<&'a str>,
    pub at: Option<&'a str>,
    pub directions: Option<&'a str>,
    pub catalog: bool,
}

/// Formula-vs-oracle cross check, emitting agree/disagree per direction.
pub fn cmd_oracle_check(args: OracleArgs) -> Result<CmdOutcome> {
    let mut results = Vec::new();
    let mut disagreements = 0;
    let inputs;
    if args.catalog {
        inputs = json!({ "catalog": true });
        for inst in catalog::soc_catalog() {
            let dirs = catalog::probe_directions(inst.theta.ambient_dim());
            disagreements += check_one_instance(
                &inst.name,
                &inst.theta,
                &inst.zbar,
                &inst.vbar,
                &dirs,
                &mut results,
            )?;
        }
    } else {
        let req: OracleRequest = match (args.input, args.theta, args.at) {
            (Some(s), None, None) => parse_json("request", s)?,
            (None, Some(t), Some(at)) => {
                let theta: ThetaJson = parse_json("theta", t)?;
                let (zbar, vbar) = parse_at_arg(at)?;
                let directions = match args.directions {
                    Some(d) => Some(parse_json::<Vec<Vec<String>>>("directions", d)?),
                    None => None,
                };
                OracleRequest {
                    theta,
                    zbar: io::vector_to_json(&zbar),
                    vbar: io::vector_to_json(&vbar),
                    directions,
                }
            }
            _ => {
                return Err(Error::parse(
                    "request",
                    "give --input, or --theta with --at, or --catalog",
                ))
            }
        };
        let theta = io::theta_from_json("theta", &req.theta)?;
        let zbar = io::vector_from_json("zbar", &req.zbar)?;
        let vbar = io::vector_from_json("vbar", &req.vbar)?;
        let dirs = match &req.directions {
            Some(ds) => {
                let mut out = Vec::new();
                for (i, d) in ds.iter().enumerate() {
                    out.push(io::vector_from_json(&format!("directions[{i}]"), d)?);
                }
                out
            }
            None => catalog::probe_directions(theta.ambient_dim()),
        };
        inputs = serde_json::to_value(&req).expect("serializable");
        disagreements += check_one_instance("request", &theta, &zbar, &vbar, &dirs, &mut results)?;
    }
    let status = if disagreements == 0 {
        "agree".to_string()
    } else {
        format!("{disagreements} disagreements")
    };
    Ok(CmdOutcome {
        report: Report {
            command: "oracle-check".into(),
            status,
            inputs,
            output: json!({
                "results": results,
                "disagreements": disagreements,
            }),
            trace: vec![],
            timings: None,
        },
        exit_code: if disagreements == 0 { 0 } else { 1 },
    })
}

/// One reproduction check with its outcome.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Runs the four strict-inclusion checks on the given data (embedded data in
/// production; tests may tamper with it as a negative control).
pub fn run_strict_inclusion(data: &catalog::StrictInclusionData) -> Result<Vec<CheckResult>> {
    let mut checks = Vec::new();

    // (a) ∂φ(0) = B
    let sub = chain::first_order_chain(&data.theta, &data.inner, &data.xbar)?;
    let ball = catalog::ell1_ball(2);
    let pass_a = sub.set_eq(&ball);
    checks.push(CheckResult {
        name: "first_order_subdifferential_is_ball".into(),
        pass: pass_a,
        detail: "image of the simplex under the adjoint equals the l1 ball".into(),
    });

    // (b) direct second-order values of φ = σ_B: R² at u = 0, ∅ at u = (0,1)
    let direct0 = chain::direct_soc_when_available(
        &data.phi_direct,
        &data.xbar,
        &data.ybar,
        &RatVector::zeros(2),
    )?;
    let whole_plane = PolyUnion::new(2, vec![Polyhedron::space(2)]);
    let pass_b0 = direct0.set_eq(&whole_plane);
    let direct1 = chain::direct_soc_when_available(
        &data.phi_direct,
        &data.xbar,
        &data.ybar,
        &data.probe_direction,
    )?;
    let pass_b1 = direct1.is_empty();
    checks.push(CheckResult {
        name: "direct_value_is_plane_at_zero_and_empty_off_zero".into(),
        pass: pass_b0 && pass_b1,
        detail: "second-order value of the direct representation".into(),
    });

    // (c) the upper-estimate value at (0,1) contains A^T(0,0,1,0) = (0,1)
    let upper =
        chain::chain_amenable_upper(&data.theta, &data.inner, &data.xbar, &data.ybar, true)?;
    let target = {
        let mut w4 = RatVector::zeros(4);
        w4.0[2] = crate::rat::rat(1);
        data.a.transpose().mul_vec(&w4)
    };
    let pass_c = upper.membership(&data.probe_direction, &target)?;
    checks.push(CheckResult {
        name: "upper_estimate_nonempty_off_zero".into(),
        pass: pass_c,
        detail: "the chain-rule inclusion is strict: the estimate contains a point \
                 where the direct value is empty"
            .into(),
    });

    // (d) the second-order qualification condition fails with a witness
    let qc = chain::check_second_order_qc(&data.theta, &data.inner, &data.xbar, &data.ybar)?;
    let pass_d = !qc.holds && qc.witness.is_some();
    let detail_d = match &qc.witness {
        Some((v, dir)) => format!(
            "multiplier {:?}, direction {:?}",
            io::vector_to_json(v),
            io::vector_to_json(dir)
        ),
        None => "no witness".into(),
    };
    checks.push(CheckResult {
        name: "second_order_qualification_fails".into(),
        pass: pass_d,
        detail: detail_d,
    });

    Ok(checks)
}

/// The embedded strict-inclusion reproduction. Exit 0 iff all four checks
/// pass; reports are byte-identical across runs.
pub fn cmd_repro(name: &str) -> Result<CmdOutcome> {
    if name != "strict-inclusion" {
        return Err(Error::parse("repro", format!("unknown target {name:?}")));
    }
    let data = strict_inclusion_data();
    let checks = run_strict_inclusion(&data)?;
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(CmdOutcome {
        report: Report {
            command: "repro".into(),
            status: if all_pass {
                "pass".into()
            } else {
                "fail".into()
            },
            inputs: json!({ "target": "strict-inclusion" }),
            output: serde_json::to_value(&checks).expect("serializable"),
            trace: vec![],
            timings: None,
        },
        exit_code: if all_pass { 0 } else { 1 },
    })
}
