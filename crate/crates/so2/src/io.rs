//! JSON wire formats. Rationals travel as strings ("p/q" or "p"), so every
//! payload is bit-exact and human-inspectable.

use crate::chain::{InnerMap, ParamBlock, PointData, QuadraticFn, QuadraticMap};
use crate::linalg::{RatMatrix, RatVector};
use crate::plq::PLQFunction;
use crate::poly::{HRow, PolyUnion, Polyhedron, Rel};
use crate::rat::{format_rat, parse_rat};
use crate::tilt::{ConstraintRel, Objective, ProblemSpec};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

fn ctx(at: &str, inner: Error) -> Error {
    match inner {
        Error::Parse { at: a, msg } => Error::Parse {
            at: format!("{at}.{a}"),
            msg,
        },
        other => Error::Parse {
            at: at.into(),
            msg: other.to_string(),
        },
    }
}

pub fn vector_to_json(v: &RatVector) -> Vec<String> {
    v.0.iter().map(format_rat).collect()
}

pub fn vector_from_json(at: &str, v: &[String]) -> Result<RatVector> {
    let mut out = Vec::with_capacity(v.len());
    for (i, s) in v.iter().enumerate() {
        out.push(parse_rat(s).map_err(|e| ctx(&format!("{at}[{i}]"), e))?);
    }
    Ok(RatVector(out))
}

pub fn matrix_to_json(m: &RatMatrix) -> Vec<Vec<String>> {
    (0..m.nrows()).map(|r| vector_to_json(&m.row(r))).collect()
}

pub fn matrix_from_json(at: &str, rows: &[Vec<String>]) -> Result<RatMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut out = Vec::with_capacity(nrows);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != ncols {
            return Err(Error::parse(
                format!("{at}[{i}]"),
                "ragged matrix rows".to_string(),
            ));
        }
        out.push(vector_from_json(&format!("{at}[{i}]"), r)?);
    }
    Ok(RatMatrix::from_rows(out, ncols))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct HRowJson {
    pub a: Vec<String>,
    pub rel: String,
    pub b: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct PolyhedronJson {
    pub dim: usize,
    pub rows: Vec<HRowJson>,
}

pub fn polyhedron_to_json(p: &Polyhedron) -> PolyhedronJson {
    PolyhedronJson {
        dim: p.ambient_dim(),
        rows: p
            .rows()
            .iter()
            .map(|r| HRowJson {
                a: vector_to_json(&r.a),
                rel: match r.rel {
                    Rel::Le => "le".into(),
                    Rel::Eq => "eq".into(),
                },
                b: format_rat(&r.b),
            })
            .collect(),
    }
}

pub fn polyhedron_from_json(at: &str, j: &PolyhedronJson) -> Result<Polyhedron> {
    let mut rows = Vec::with_capacity(j.rows.len());
    for (i, r) in j.rows.iter().enumerate() {
        let here = format!("{at}.rows[{i}]");
        let a = vector_from_json(&format!("{here}.a"), &r.a)?;
        if a.len() != j.dim {
            return Err(Error::parse(
                here,
                format!("row has {} coefficients, dim is {}", a.len(), j.dim),
            ));
        }
        let rel = match r.rel.as_str() {
            "le" => Rel::Le,
            "eq" => Rel::Eq,
            other => {
                return Err(Error::parse(
                    format!("{here}.rel"),
                    format!("unknown relation {other:?}"),
                ))
            }
        };
        let b = parse_rat(&r.b).map_err(|e| ctx(&format!("{here}.b"), e))?;
        rows.push(HRow { a, rel, b });
    }
    Ok(Polyhedron::new(j.dim, rows))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "type")]
pub enum ThetaJson {
    #[serde(rename = "indicator")]
    Indicator {
        #[serde(rename = "Z")]
        z: PolyhedronJson,
    },
    #[serde(rename = "support_plq")]
    SupportPlq {
        #[serde(rename = "C")]
        c: PolyhedronJson,
        #[serde(rename = "Q")]
        q: Vec<Vec<String>>,
    },
}

pub fn theta_to_json(theta: &PLQFunction) -> ThetaJson {
    match theta {
        PLQFunction::Indicator(z) => ThetaJson::Indicator {
            z: polyhedron_to_json(z),
        },
        PLQFunction::SupportPLQ { c, q } => ThetaJson::SupportPlq {
            c: polyhedron_to_json(c),
            q: matrix_to_json(q),
        },
    }
}

pub fn theta_from_json(at: &str, j: &ThetaJson) -> Result<PLQFunction> {
    match j {
        ThetaJson::Indicator { z } => {
            let z = polyhedron_from_json(&format!("{at}.Z"), z)?;
            PLQFunction::indicator(z).map_err(|e| ctx(at, e))
        }
        ThetaJson::SupportPlq { c, q } => {
            let c = polyhedron_from_json(&format!("{at}.C"), c)?;
            let q = matrix_from_json(&format!("{at}.Q"), q)?;
            PLQFunction::support_plq(c, q).map_err(|e| ctx(at, e))
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct PolyUnionJson {
    pub dim: usize,
    pub pieces: Vec<PolyhedronJson>,
}

pub fn union_to_json(u: &PolyUnion) -> PolyUnionJson {
    PolyUnionJson {
        dim: u.dim,
        pieces: u.pieces.iter().map(polyhedron_to_json).collect(),
    }
}

/// Canonicalized output form: pieces are emitted through their irredundant
/// H-representation so equal runs serialize identically.
pub fn union_to_json_canonical(u: &PolyUnion) -> PolyUnionJson {
    PolyUnionJson {
        dim: u.dim,
        pieces: u
            .pieces
            .iter()
            .map(|p| {
                let canon = Polyhedron::new(u.dim, p.canonical_rows().to_vec());
                polyhedron_to_json(&canon)
            })
            .collect(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "type")]
pub enum ScalarFnJson {
    #[serde(rename = "quadratic")]
    Quadratic {
        #[serde(rename = "A")]
        a: Vec<Vec<String>>,
        b: Vec<String>,
        c: String,
    },
    #[serde(rename = "point")]
    Point {
        gradient: Vec<String>,
        hessian: Vec<Vec<String>>,
    },
}

pub fn objective_from_json(at: &str, j: &ScalarFnJson) -> Result<Objective> {
    match j {
        ScalarFnJson::Quadratic { a, b, c } => {
            let a = matrix_from_json(&format!("{at}.A"), a)?;
            let b = vector_from_json(&format!("{at}.b"), b)?;
            let c = parse_rat(c).map_err(|e| ctx(&format!("{at}.c"), e))?;
            Ok(Objective::Quadratic(
                QuadraticFn::new(a, b, c).map_err(|e| ctx(at, e))?,
            ))
        }
        ScalarFnJson::Point { gradient, hessian } => {
            let gradient = vector_from_json(&format!("{at}.gradient"), gradient)?;
            let hessian = matrix_from_json(&format!("{at}.hessian"), hessian)?;
            if !hessian.is_symmetric() {
                return Err(Error::parse(
                    format!("{at}.hessian"),
                    "not symmetric".to_string(),
                ));
            }
            Ok(Objective::Point { gradient, hessian })
        }
    }
}

pub fn objective_to_json(o: &Objective) -> ScalarFnJson {
    match o {
        Objective::Quadratic(q) => ScalarFnJson::Quadratic {
            a: matrix_to_json(&q.a),
            b: vector_to_json(&q.b),
            c: format_rat(&q.c),
        },
        Objective::Point { gradient, hessian } => ScalarFnJson::Point {
            gradient: vector_to_json(gradient),
            hessian: matrix_to_json(hessian),
        },
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct QuadraticComponentJson {
    #[serde(rename = "A")]
    pub a: Vec<Vec<String>>,
    pub b: Vec<String>,
    pub c: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "type")]
pub enum InnerMapJson {
    #[serde(rename = "quadratic")]
    Quadratic {
        input_dim: usize,
        components: Vec<QuadraticComponentJson>,
    },
    #[serde(rename = "point")]
    Point {
        value: Vec<String>,
        jacobian: Vec<Vec<String>>,
        hessians: Vec<Vec<Vec<String>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        jacobian_w: Option<Vec<Vec<String>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hessians_wx: Option<Vec<Vec<Vec<String>>>>,
    },
}

pub fn inner_map_from_json(at: &str, j: &InnerMapJson) -> Result<InnerMap> {
    match j {
        InnerMapJson::Quadratic {
            input_dim,
            components,
        } => {
            let mut comps = Vec::with_capacity(components.len());
            for (i, c) in components.iter().enumerate() {
                let here = format!("{at}.components[{i}]");
                let a = matrix_from_json(&format!("{here}.A"), &c.a)?;
                let b = vector_from_json(&format!("{here}.b"), &c.b)?;
                let cc = parse_rat(&c.c).map_err(|e| ctx(&format!("{here}.c"), e))?;
                comps.push(QuadraticFn::new(a, b, cc).map_err(|e| ctx(&here, e))?);
            }
            Ok(InnerMap::Quadratic(
                QuadraticMap::new(*input_dim, comps).map_err(|e| ctx(at, e))?,
            ))
        }
        InnerMapJson::Point {
            value,
            jacobian,
            hessians,
            jacobian_w,
            hessians_wx,
        } => {
            let value = vector_from_json(&format!("{at}.value"), value)?;
            let jac_x = matrix_from_json(&format!("{at}.jacobian"), jacobian)?;
            let mut hess_xx = Vec::with_capacity(hessians.len());
            for (i, h) in hessians.iter().enumerate() {
                hess_xx.push(matrix_from_json(&format!("{at}.hessians[{i}]"), h)?);
            }
            let param = match (jacobian_w, hessians_wx) {
                (None, None) => None,
                (Some(jw), Some(hwx)) => {
                    let jac_w = matrix_from_json(&format!("{at}.jacobian_w"), jw)?;
                    let mut hess_wx = Vec::with_capacity(hwx.len());
                    for (i, h) in hwx.iter().enumerate() {
                        hess_wx.push(matrix_from_json(&format!("{at}.hessians_wx[{i}]"), h)?);
                    }
                    Some(ParamBlock { jac_w, hess_wx })
                }
                _ => {
                    return Err(Error::parse(
                        at.to_string(),
                        "jacobian_w and hessians_wx must be given together".to_string(),
                    ))
                }
            };
            let data = PointData {
                value,
                jac_x,
                hess_xx,
                param,
            };
            data.validate().map_err(|e| ctx(at, e))?;
            Ok(InnerMap::Point(data))
        }
    }
}

pub fn inner_map_to_json(h: &InnerMap) -> InnerMapJson {
    match h {
        InnerMap::Quadratic(q) => InnerMapJson::Quadratic {
            input_dim: q.input_dim(),
            components: q
                .components
                .iter()
                .map(|c| QuadraticComponentJson {
                    a: matrix_to_json(&c.a),
                    b: vector_to_json(&c.b),
                    c: format_rat(&c.c),
                })
                .collect(),
        },
        InnerMap::Point(p) => InnerMapJson::Point {
            value: vector_to_json(&p.value),
            jacobian: matrix_to_json(&p.jac_x),
            hessians: p.hess_xx.iter().map(matrix_to_json).collect(),
            jacobian_w: p.param.as_ref().map(|b| matrix_to_json(&b.jac_w)),
            hessians_wx: p
                .param
                .as_ref()
                .map(|b| b.hess_wx.iter().map(matrix_to_json).collect()),
        },
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct NlpConstraintJson {
    #[serde(rename = "fn")]
    pub function: QuadraticComponentJson,
    pub rel: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "kind")]
pub enum ProblemSpecJson {
    #[serde(rename = "nlp")]
    Nlp {
        objective: ScalarFnJson,
        constraints: Vec<NlpConstraintJson>,
        point: Vec<String>,
    },
    #[serde(rename = "composite")]
    Composite {
        objective: ScalarFnJson,
        inner: InnerMapJson,
        theta: ThetaJson,
        point: Vec<String>,
    },
}

fn objective_dim(o: &Objective) -> usize {
    match o {
        Objective::Quadratic(q) => q.b.len(),
        Objective::Point { gradient, .. } => gradient.len(),
    }
}

pub fn problem_from_json(j: &ProblemSpecJson) -> Result<ProblemSpec> {
    match j {
        ProblemSpecJson::Nlp {
            objective,
            constraints,
            point,
        } => {
            let objective = objective_from_json("objective", objective)?;
            let point = vector_from_json("point", point)?;
            let n = point.len();
            if objective_dim(&objective) != n {
                return Err(Error::parse(
                    "objective",
                    format!(
                        "dimension {} does not match the point dimension {n}",
                        objective_dim(&objective)
                    ),
                ));
            }
            let mut cons = Vec::with_capacity(constraints.len());
            for (i, c) in constraints.iter().enumerate() {
                let here = format!("constraints[{i}]");
                let a = matrix_from_json(&format!("{here}.fn.A"), &c.function.a)?;
                let b = vector_from_json(&format!("{here}.fn.b"), &c.function.b)?;
                let cc = parse_rat(&c.function.c).map_err(|e| ctx(&format!("{here}.fn.c"), e))?;
                let f = QuadraticFn::new(a, b, cc).map_err(|e| ctx(&here, e))?;
                if f.b.len() != n {
                    return Err(Error::parse(
                        here,
                        format!(
                            "constraint dimension {} does not match the point dimension {n}",
                            f.b.len()
                        ),
                    ));
                }
                let rel = match c.rel.as_str() {
                    "le" => ConstraintRel::Le,
                    "eq" => ConstraintRel::Eq,
                    other => {
                        return Err(Error::parse(
                            format!("{here}.rel"),
                            format!("unknown relation {other:?}"),
                        ))
                    }
                };
                cons.push((f, rel));
            }
            Ok(ProblemSpec::Nlp {
                objective,
                constraints: cons,
                point,
            })
        }
        ProblemSpecJson::Composite {
            objective,
            inner,
            theta,
            point,
        } => {
            let objective = objective_from_json("objective", objective)?;
            let inner = inner_map_from_json("inner", inner)?;
            let theta = theta_from_json("theta", theta)?;
            let point = vector_from_json("point", point)?;
            let n = point.len();
            if objective_dim(&objective) != n {
                return Err(Error::parse(
                    "objective",
                    format!(
                        "dimension {} does not match the point dimension {n}",
                        objective_dim(&objective)
                    ),
                ));
            }
            let data = inner.data_at(&point).map_err(|e| ctx("inner", e))?;
            if data.value.len() != theta.ambient_dim() {
                return Err(Error::parse(
                    "theta",
                    format!(
                        "outer dimension {} does not match the inner map's {} components",
                        theta.ambient_dim(),
                        data.value.len()
                    ),
                ));
            }
            Ok(ProblemSpec::Composite {
                objective,
                inner,
                theta,
                point,
            })
        }
    }
}

pub fn problem_to_json(p: &ProblemSpec) -> ProblemSpecJson {
    match p {
        ProblemSpec::Nlp {
            objective,
            constraints,
            point,
        } => ProblemSpecJson::Nlp {
            objective: objective_to_json(objective),
            constraints: constraints
                .iter()
                .map(|(f, rel)| NlpConstraintJson {
                    function: QuadraticComponentJson {
                        a: matrix_to_json(&f.a),
                        b: vector_to_json(&f.b),
                        c: format_rat(&f.c),
                    },
                    rel: match rel {
                        ConstraintRel::Le => "le".into(),
                        ConstraintRel::Eq => "eq".into(),
                    },
                })
                .collect(),
            point: vector_to_json(point),
        },
        ProblemSpec::Composite {
            objective,
            inner,
            theta,
            point,
        } => ProblemSpecJson::Composite {
            objective: objective_to_json(objective),
            inner: inner_map_to_json(inner),
            theta: theta_to_json(theta),
            point: vector_to_json(point),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::unit_simplex;

    #[test]
    fn polyhedron_round_trip() {
        let p = unit_simplex(3);
        let j = polyhedron_to_json(&p);
        let back = polyhedron_from_json("poly", &j).unwrap();
        assert!(p.set_eq(&back));
        let s = serde_json::to_string(&j).unwrap();
        let j2: PolyhedronJson = serde_json::from_str(&s).unwrap();
        assert_eq!(j, j2);
    }

    #[test]
    fn malformed_rational_is_parse_error() {
        let j = PolyhedronJson {
            dim: 1,
            rows: vec![HRowJson {
                a: vec!["1/0".into()],
                rel: "le".into(),
                b: "0".into(),
            }],
        };
        match polyhedron_from_json("poly", &j) {
            Err(Error::Parse { at, .. }) => assert!(at.contains("rows[0].a[0]")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn theta_round_trip() {
        let theta = PLQFunction::support_function(unit_simplex(2)).unwrap();
        let j = theta_to_json(&theta);
        let back = theta_from_json("theta", &j).unwrap();
        match (&theta, &back) {
            (
                PLQFunction::SupportPLQ { c: c1, q: q1 },
                PLQFunction::SupportPLQ { c: c2, q: q2 },
            ) => {
                assert!(c1.set_eq(c2));
                assert_eq!(q1, q2);
            }
            _ => panic!("variant mismatch"),
        }
    }

    #[test]
    fn dimension_mismatches_are_parse_errors() {
        // objective in R^1 against a point in R^2
        let j: ProblemSpecJson = serde_json::from_str(
            r#"{"kind":"nlp","objective":{"type":"quadratic","A":[["1"]],"b":["1"],"c":"0"},
                "constraints":[],"point":["0","0"]}"#,
        )
        .unwrap();
        assert!(matches!(problem_from_json(&j), Err(Error::Parse { .. })));
        // inner map with 1 component against a 2-dimensional theta
        let j: ProblemSpecJson = serde_json::from_str(
            r#"{"kind":"composite",
                "objective":{"type":"quadratic","A":[["1"]],"b":["0"],"c":"0"},
                "inner":{"type":"quadratic","input_dim":1,
                         "components":[{"A":[["0"]],"b":["1"],"c":"0"}]},
                "theta":{"type":"indicator","Z":{"dim":2,"rows":[]}},
                "point":["0"]}"#,
        )
        .unwrap();
        assert!(matches!(problem_from_json(&j), Err(Error::Parse { .. })));
    }

    #[test]
    fn problem_round_trip() {
        for (_, spec) in crate::catalog::nlp_catalog() {
            let j = problem_to_json(&spec);
            let s = serde_json::to_string(&j).unwrap();
            let j2: ProblemSpecJson = serde_json::from_str(&s).unwrap();
            assert_eq!(j, j2);
            problem_from_json(&j2).unwrap();
        }
        for (_, spec) in crate::catalog::composite_catalog() {
            let j = problem_to_json(&spec);
            problem_from_json(&j).unwrap();
        }
    }
}
