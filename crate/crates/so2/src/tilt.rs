//! Tilt-stability verdicts: the SSOC route for NLP and the T-map
//! positive-definiteness route for composite problems, decided exactly and
//! cross-checked by two independent algorithms.
//!
//! The T-map of the composite minimize φ₀(x) + θ(Φ(x)) at a stationary x̄ with
//! multiplier v̄ is
//!   T(u) = ∇²φ₀(x̄)u + ∇²<v̄,Φ>(x̄)u + ∇Φ(x̄)^* ∂²θ(z̄,v̄)(∇Φ(x̄)u),
//! and tilt stability is equivalent to ⟨w,u⟩ > 0 for all w ∈ T(u), u ≠ 0.
//!
//! Indicator θ: the minimum of ⟨w, Ju⟩ over the value is 0 and the domain of
//! ∂²δ_Z(0,v̄) is span K, so the test reduces to positive definiteness of
//! H_eff on {u : Ju ∈ span K}.
//!
//! Support-PLQ θ: for every closed face C of K the diagonal slice
//! W_C = {(u,w) : w ∈ span C, P_{span C}(Qw - Ju) = 0} carries the exact
//! minimum of ⟨w, Ju⟩ as w^T Q w (any witness through a pair C₁ ⊆ C₂ is
//! dominated by the slice of C₁, since C₂-C₁ ⊇ span C₁ makes the slice system
//! solvable and the Q-seminorm Cauchy-Schwarz bounds its value). The test is
//! positive definiteness of u^T H_eff u + w^T Q w on each W_C off {u = 0}.
//!
//! The guard path re-decides positivity per face pair by exact quadratic
//! copositivity over the pair's coupling cone; the two paths must agree.

use crate::chain::{check_second_order_qc, InnerMap, QuadraticFn};
use crate::linalg::{nullspace, psd_check, rank, restrict_form, PsdOutcome, RatMatrix, RatVector};
use crate::plq::PLQFunction;
use crate::poly::{HRow, PolyCone, Polyhedron};
use crate::qform::{positive_on_cone_off_block, ConeSign};
use crate::rat::{rat, zero};
use crate::soc::{soc_system, FacePairSystem, SocMode};
use crate::{Error, Result};
use num::{Signed, Zero};

/// Constraint sense of one NLP row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintRel {
    Le,
    Eq,
}

/// Objective data: exact quadratic or point derivatives at x̄.
#[derive(Clone, Debug)]
pub enum Objective {
    Quadratic(QuadraticFn),
    Point {
        gradient: RatVector,
        hessian: RatMatrix,
    },
}

impl Objective {
    pub fn gradient_at(&self, x: &RatVector) -> RatVector {
        match self {
            Objective::Quadratic(q) => q.gradient(x),
            Objective::Point { gradient, .. } => gradient.clone(),
        }
    }

    pub fn hessian_at(&self, _x: &RatVector) -> RatMatrix {
        match self {
            Objective::Quadratic(q) => q.a.clone(),
            Objective::Point { hessian, .. } => hessian.clone(),
        }
    }
}

/// A candidate-point analysis problem.
#[derive(Clone, Debug)]
pub enum ProblemSpec {
    Nlp {
        objective: Objective,
        constraints: Vec<(QuadraticFn, ConstraintRel)>,
        point: RatVector,
    },
    Composite {
        objective: Objective,
        inner: InnerMap,
        theta: PLQFunction,
        point: RatVector,
    },
}

/// Status of a tilt-stability verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    TiltStable,
    NotTiltStable,
    /// Tilt-stable by the sufficiency route only (Remark-style inclusion).
    SufficientOnly,
    /// The sufficiency test failed; nothing is decided.
    Inconclusive,
    Inapplicable(String),
}

/// The analysis report for one candidate point.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub status: Status,
    /// KKT / stationarity multiplier when one exists.
    pub multiplier: Option<RatVector>,
    /// Basis of the subspace the definiteness test ran on (NLP path).
    pub subspace: Option<Vec<RatVector>>,
    /// Failing direction u with ⟨u, H_eff u⟩ + curvature ≤ 0 when not stable.
    pub failing_direction: Option<RatVector>,
    /// Qualification flags: (LICQ or full rank, second-order qc).
    pub qc_full_rank: Option<bool>,
    pub qc_second_order: Option<bool>,
    /// Certified by class membership, not numerics.
    pub prox_regularity_note: String,
    /// Additional textual notes attached to the verdict.
    pub notes: Vec<String>,
}

impl Verdict {
    fn new(status: Status) -> Self {
        Verdict {
            status,
            multiplier: None,
            subspace: None,
            failing_direction: None,
            qc_full_rank: None,
            qc_second_order: None,
            prox_regularity_note:
                "prox-regularity and subdifferential continuity hold by class membership \
                 (convex polyhedral indicator / support-PLQ outer functions)"
                    .into(),
            notes: Vec::new(),
        }
    }
}

/// Drops inactive inequality constraints at the candidate point; errors if
/// the point is infeasible.
pub fn drop_inactive(spec: &ProblemSpec) -> Result<ProblemSpec> {
    let ProblemSpec::Nlp {
        objective,
        constraints,
        point,
    } = spec
    else {
        return Err(Error::Unsupported("drop_inactive expects an NLP".into()));
    };
    let mut kept = Vec::new();
    for (f, rel) in constraints {
        let v = f.eval(point);
        match rel {
            ConstraintRel::Eq => {
                if !v.is_zero() {
                    return Err(Error::PointNotInSet);
                }
                kept.push((f.clone(), *rel));
            }
            ConstraintRel::Le => {
                if v.is_positive() {
                    return Err(Error::PointNotInSet);
                }
                if v.is_zero() {
                    kept.push((f.clone(), *rel));
                }
            }
        }
    }
    Ok(ProblemSpec::Nlp {
        objective: objective.clone(),
        constraints: kept,
        point: point.clone(),
    })
}

fn active_gradient_matrix(
    constraints: &[(QuadraticFn, ConstraintRel)],
    x: &RatVector,
) -> RatMatrix {
    RatMatrix::from_rows(
        constraints.iter().map(|(f, _)| f.gradient(x)).collect(),
        x.len(),
    )
}

/// LICQ: the active constraint gradients are linearly independent.
/// Expects inactive constraints already dropped.
pub fn check_licq(spec: &ProblemSpec) -> Result<bool> {
    let ProblemSpec::Nlp {
        constraints, point, ..
    } = spec
    else {
        return Err(Error::Unsupported("check_licq expects an NLP".into()));
    };
    let jac = active_gradient_matrix(constraints, point);
    Ok(rank(&jac) == constraints.len())
}

/// Result of the KKT multiplier solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KktOutcome {
    /// The unique multiplier, sign-admissible.
    Unique(RatVector),
    /// The stationarity system is inconsistent: x̄ is not a stationary point.
    NotStationary,
    /// Solvable but some inequality multiplier is negative.
    SignViolation(RatVector),
}

/// Solves ∇φ₀(x̄) + Σ λ_i ∇φ_i(x̄) = 0 under LICQ. Inequality multipliers
/// must be nonnegative to be admissible.
pub fn kkt_multiplier(spec: &ProblemSpec) -> Result<KktOutcome> {
    let ProblemSpec::Nlp {
        objective,
        constraints,
        point,
    } = spec
    else {
        return Err(Error::Unsupported("kkt_multiplier expects an NLP".into()));
    };
    if !check_licq(spec)? {
        return Err(Error::RankDeficient);
    }
    let jac = active_gradient_matrix(constraints, point); // m×n
    let jt = jac.transpose(); // n×m
    let rhs = -&objective.gradient_at(point);
    let sol = match crate::linalg::solve_affine(&jt, &rhs) {
        Ok(s) => s,
        Err(Error::Infeasible) => return Ok(KktOutcome::NotStationary),
        Err(e) => return Err(e),
    };
    debug_assert!(sol.is_unique(), "LICQ forces a unique multiplier");
    let lambda = sol.particular;
    let admissible = constraints
        .iter()
        .zip(lambda.0.iter())
        .all(|((_, rel), l)| *rel == ConstraintRel::Eq || !l.is_negative());
    Ok(if admissible {
        KktOutcome::Unique(lambda)
    } else {
        KktOutcome::SignViolation(lambda)
    })
}

/// The subspace of the strong second-order condition: directions orthogonal
/// to the gradients of equality constraints and of inequality constraints
/// with positive multiplier. This is exactly the subspace the T-map reduces
/// to for the indicator encoding; it coincides with the all-active-gradient
/// subspace under strict complementarity.
fn ssoc_subspace(
    constraints: &[(QuadraticFn, ConstraintRel)],
    x: &RatVector,
    lambda: &RatVector,
) -> Vec<RatVector> {
    let n = x.len();
    let rows: Vec<RatVector> = constraints
        .iter()
        .zip(lambda.0.iter())
        .filter(|((_, rel), l)| *rel == ConstraintRel::Eq || l.is_positive())
        .map(|((f, _), _)| f.gradient(x))
        .collect();
    if rows.is_empty() {
        return (0..n).map(|i| RatVector::unit(n, i)).collect();
    }
    nullspace(&RatMatrix::from_rows(rows, n))
}

fn lagrangian_hessian(
    objective: &Objective,
    constraints: &[(QuadraticFn, ConstraintRel)],
    x: &RatVector,
    lambda: &RatVector,
) -> RatMatrix {
    let mut h = objective.hessian_at(x);
    for ((f, _), l) in constraints.iter().zip(lambda.0.iter()) {
        h = h.add_mat(&f.a.scale(l));
    }
    h
}

/// SSOC: ⟨u, ∇²_xx L(x̄,λ̄) u⟩ > 0 on the SSOC subspace. Returns the decision
/// and, on failure, a certificate direction.
pub fn ssoc_check(spec: &ProblemSpec, lambda: &RatVector) -> Result<(bool, Option<RatVector>)> {
    let ProblemSpec::Nlp {
        objective,
        constraints,
        point,
    } = spec
    else {
        return Err(Error::Unsupported("ssoc_check expects an NLP".into()));
    };
    let s = ssoc_subspace(constraints, point, lambda);
    let h = lagrangian_hessian(objective, constraints, point, lambda);
    definite_on_basis(&h, &s)
}

/// PD of a symmetric form on span(basis), with a failing direction.
fn definite_on_basis(h: &RatMatrix, basis: &[RatVector]) -> Result<(bool, Option<RatVector>)> {
    if basis.is_empty() {
        return Ok((true, None));
    }
    let restricted = restrict_form(h, basis);
    match psd_check(&restricted)? {
        PsdOutcome::NotPsd { witness } => Ok((false, Some(expand(basis, &witness)))),
        PsdOutcome::Psd { kernel } => {
            if let Some(k) = kernel.first() {
                Ok((false, Some(expand(basis, k))))
            } else {
                Ok((true, None))
            }
        }
    }
}

fn expand(basis: &[RatVector], coords: &RatVector) -> RatVector {
    let mut y = RatVector::zeros(basis[0].len());
    for (c, b) in coords.0.iter().zip(basis.iter()) {
        y = &y + &b.scale(c);
    }
    y
}

/// Tilt-stability verdict for an NLP via LICQ + KKT + SSOC.
pub fn tilt_verdict_nlp(spec: &ProblemSpec) -> Result<Verdict> {
    let reduced = drop_inactive(spec)?;
    let mut verdict = Verdict::new(Status::Inapplicable(String::new()));
    if !check_licq(&reduced)? {
        verdict.status = Status::Inapplicable("LICQ fails at the candidate point".into());
        verdict.qc_full_rank = Some(false);
        return Ok(verdict);
    }
    verdict.qc_full_rank = Some(true);
    let lambda = match kkt_multiplier(&reduced)? {
        KktOutcome::Unique(l) => l,
        KktOutcome::NotStationary => {
            verdict.status = Status::Inapplicable("not a stationary point".into());
            return Ok(verdict);
        }
        KktOutcome::SignViolation(l) => {
            verdict.status = Status::Inapplicable("KKT multiplier sign condition fails".into());
            verdict.multiplier = Some(l);
            return Ok(verdict);
        }
    };
    let ProblemSpec::Nlp {
        constraints, point, ..
    } = &reduced
    else {
        unreachable!()
    };
    let s = ssoc_subspace(constraints, point, &lambda);
    let (ok, witness) = ssoc_check(&reduced, &lambda)?;
    verdict.multiplier = Some(lambda);
    verdict.subspace = Some(s);
    if ok {
        verdict.status = Status::TiltStable;
    } else {
        verdict.status = Status::NotTiltStable;
        verdict.failing_direction = witness;
    }
    verdict.qc_second_order = Some(true);
    verdict.notes.push(
        "under LICQ this verdict equally decides strong regularity of the variational \
         inequality associated with the KKT system: the two properties are equivalent here"
            .into(),
    );
    Ok(verdict)
}

/// Encodes an NLP (with inactive constraints dropped) as the composite
/// minimize φ₀ + δ_Z(Φ(x)) with Z = R^s_- × {0}^{m-s}.
pub fn nlp_to_composite(spec: &ProblemSpec) -> Result<ProblemSpec> {
    let reduced = drop_inactive(spec)?;
    let ProblemSpec::Nlp {
        objective,
        constraints,
        point,
    } = reduced
    else {
        unreachable!()
    };
    let m = constraints.len();
    let mut rows = Vec::new();
    for (i, (_, rel)) in constraints.iter().enumerate() {
        let e = RatVector::unit(m, i);
        rows.push(match rel {
            ConstraintRel::Le => HRow::le(e, zero()),
            ConstraintRel::Eq => HRow::eq(e, zero()),
        });
    }
    let z = Polyhedron::new(m, rows);
    let inner = InnerMap::Quadratic(crate::chain::QuadraticMap::new(
        point.len(),
        constraints.into_iter().map(|(f, _)| f).collect(),
    )?);
    Ok(ProblemSpec::Composite {
        objective,
        inner,
        theta: PLQFunction::indicator(z)?,
        point,
    })
}

/// The assembled T-map data: effective Hessian, second-order system of θ at
/// (z̄, v̄), and the Jacobian ∇Φ(x̄).
pub struct TMap {
    pub h_eff: RatMatrix,
    pub system: FacePairSystem,
    pub jac: RatMatrix,
}

/// Builds the T-map for a composite problem at a given multiplier v̄
/// satisfying v̄ ∈ ∂θ(z̄) and ∇Φ(x̄)^* v̄ = -∇φ₀(x̄).
pub fn t_map(spec: &ProblemSpec, vbar: &RatVector) -> Result<TMap> {
    let ProblemSpec::Composite {
        objective,
        inner,
        theta,
        point,
    } = spec
    else {
        return Err(Error::Unsupported(
            "t_map expects a composite problem".into(),
        ));
    };
    let data = inner.data_at(point)?;
    if !theta.is_subgradient(&data.value, vbar)? {
        return Err(Error::NotSubgradient);
    }
    let residual = &data.jac_x.transpose().mul_vec(vbar) + &objective.gradient_at(point);
    if !residual.is_zero() {
        return Err(Error::NotSubgradient);
    }
    let h_eff = objective
        .hessian_at(point)
        .add_mat(&data.scalarized_hessian(vbar));
    let system = soc_system(theta, &data.value, vbar)?;
    Ok(TMap {
        h_eff,
        system,
        jac: data.jac_x,
    })
}

/// Positive definiteness of the T-map in the tilt sense, decided by the
/// subspace-reduction path. Returns the decision and a failing direction in
/// the u variable on failure.
pub fn t_map_positive_definite_reduction(t: &TMap) -> Result<(bool, Option<RatVector>)> {
    let n = t.jac.ncols();
    match &t.system.mode {
        SocMode::IndicatorRule => {
            // PD of H_eff on {u : Ju ∈ span K}
            let span_k = t.system.base_cone.span();
            let complement = span_k.complement();
            let mut rows = Vec::new();
            for c in complement.basis() {
                // <c, Ju> = 0
                rows.push(t.jac.transpose().mul_vec(c));
            }
            let basis = if rows.is_empty() {
                (0..n).map(|i| RatVector::unit(n, i)).collect()
            } else {
                nullspace(&RatMatrix::from_rows(rows, n))
            };
            definite_on_basis(&t.h_eff, &basis)
        }
        SocMode::MajRule { q } => {
            // per closed face C of K: PD of u^T H_eff u + w^T Q w on
            // W_C = {(u,w) : w ∈ span C, P_{span C}(Qw - Ju) = 0}, off u = 0
            let m = t.jac.nrows();
            let form = block_form(&t.h_eff, q);
            for face in t.system.base_cone.faces()? {
                let span_c = face.span();
                // rows over (u, w): w ⟂ complement of span C; b^T(Qw - Ju) = 0
                let mut rows: Vec<RatVector> = Vec::new();
                for c in span_c.complement().basis() {
                    rows.push(RatVector::zeros(n).concat(c));
                }
                for b in span_c.basis() {
                    let ju_part = -&t.jac.transpose().mul_vec(b);
                    let qw_part = q.mul_vec(b);
                    rows.push(ju_part.concat(&qw_part));
                }
                let basis = if rows.is_empty() {
                    (0..n + m).map(|i| RatVector::unit(n + m, i)).collect()
                } else {
                    nullspace(&RatMatrix::from_rows(rows, n + m))
                };
                let (ok, witness) = definite_on_block(&form, &basis, n)?;
                if !ok {
                    return Ok((false, witness.map(|y| RatVector(y.0[..n].to_vec()))));
                }
            }
            Ok((true, None))
        }
    }
}

/// blockdiag(H, Q) as a form over (u, w).
fn block_form(h: &RatMatrix, q: &RatMatrix) -> RatMatrix {
    let n = h.nrows();
    let m = q.nrows();
    let mut f = RatMatrix::zeros(n + m, n + m);
    for i in 0..n {
        for j in 0..n {
            f.set(i, j, h.at(i, j).clone());
        }
    }
    for i in 0..m {
        for j in 0..m {
            f.set(n + i, n + j, q.at(i, j).clone());
        }
    }
    f
}

/// PD of a form on span(basis) off the subspace where the first `head`
/// coordinates vanish: PSD plus no kernel vector with nonzero head.
fn definite_on_block(
    form: &RatMatrix,
    basis: &[RatVector],
    head: usize,
) -> Result<(bool, Option<RatVector>)> {
    if basis.is_empty() {
        return Ok((true, None));
    }
    let restricted = restrict_form(form, basis);
    match psd_check(&restricted)? {
        PsdOutcome::NotPsd { witness } => Ok((false, Some(expand(basis, &witness)))),
        PsdOutcome::Psd { kernel } => {
            for k in &kernel {
                let y = expand(basis, k);
                if y.0[..head].iter().any(|x| !x.is_zero()) {
                    return Ok((false, Some(y)));
                }
            }
            Ok((true, None))
        }
    }
}

/// Positive definiteness of the T-map decided by direct face-pair
/// enumeration: for every pair, the coupling cone in (u, w) is checked for a
/// point with u ≠ 0 and u^T H_eff u + ⟨w, Ju⟩ ≤ 0, by exact quadratic
/// copositivity. Independent of the reduction path.
pub fn t_map_positive_definite_enumeration(t: &TMap) -> Result<(bool, Option<RatVector>)> {
    let n = t.jac.ncols();
    let m = t.jac.nrows();
    // q(u, w) = u^T H u + <w, Ju>
    let mut form = RatMatrix::zeros(n + m, n + m);
    for i in 0..n {
        for j in 0..n {
            form.set(i, j, t.h_eff.at(i, j).clone());
        }
    }
    for wi in 0..m {
        for uj in 0..n {
            let half = t.jac.at(wi, uj) / rat(2);
            form.set(n + wi, uj, half.clone());
            form.set(uj, n + wi, half);
        }
    }
    for pair in &t.system.pairs {
        // coupling cone in (u, w)
        let mut rows: Vec<HRow> = Vec::new();
        match &t.system.mode {
            SocMode::IndicatorRule => {
                // w ∈ (C₂-C₁)*: free (min over w is 0 at w = 0); constrain
                // instead Ju ∈ C₁-C₂ and w = 0: the binding witness set.
                for r in pair.diff.as_polyhedron().rows() {
                    // -Ju ∈ diff ⟺ rows applied to -Ju
                    rows.push(HRow {
                        a: t.jac
                            .transpose()
                            .mul_vec(&-&r.a)
                            .concat(&RatVector::zeros(m)),
                        rel: r.rel,
                        b: zero(),
                    });
                }
                for i in 0..m {
                    rows.push(HRow::eq(
                        RatVector::zeros(n).concat(&RatVector::unit(m, i)),
                        zero(),
                    ));
                }
            }
            SocMode::MajRule { q } => {
                // w ∈ D and Qw - Ju ∈ D*
                for r in pair.diff.as_polyhedron().rows() {
                    rows.push(HRow {
                        a: RatVector::zeros(n).concat(&r.a),
                        rel: r.rel,
                        b: zero(),
                    });
                }
                for r in pair.diff_polar.as_polyhedron().rows() {
                    // <s, Qw - Ju> ≤/= 0
                    let u_part = -&t.jac.transpose().mul_vec(&r.a);
                    let w_part = q.mul_vec(&r.a);
                    rows.push(HRow {
                        a: u_part.concat(&w_part),
                        rel: r.rel,
                        b: zero(),
                    });
                }
            }
        }
        let cone = PolyCone::from_rows(n + m, rows);
        match positive_on_cone_off_block(&cone, &form, 0..n)? {
            ConeSign::Positive => {}
            ConeSign::Failure { point, .. } => {
                return Ok((false, Some(RatVector(point.0[..n].to_vec()))));
            }
        }
    }
    Ok((true, None))
}

/// Multiplier set of the composite stationarity system (fr1):
/// {v ∈ ∂θ(z̄) : ∇Φ(x̄)^* v = -∇φ₀(x̄)}.
pub fn composite_multiplier_set(spec: &ProblemSpec) -> Result<Polyhedron> {
    let ProblemSpec::Composite {
        objective,
        inner,
        theta,
        point,
    } = spec
    else {
        return Err(Error::Unsupported("expects a composite problem".into()));
    };
    let ybar = -&objective.gradient_at(point);
    crate::chain::multiplier_set(theta, inner, point, &ybar)
}

/// Exact tilt verdict for a composite problem. Applicable when the Jacobian
/// has full row rank or the second-order qualification condition holds (the
/// supported θ classes then admit the exact chain rule). Both decision paths
/// are run and must agree.
pub fn tilt_verdict_composite(spec: &ProblemSpec) -> Result<Verdict> {
    let ProblemSpec::Composite {
        objective,
        inner,
        theta,
        point,
    } = spec
    else {
        return Err(Error::Unsupported("expects a composite problem".into()));
    };
    let data = inner.data_at(point)?;
    let m = data.jac_x.nrows();
    let mut verdict = Verdict::new(Status::Inapplicable(String::new()));

    let mset = composite_multiplier_set(spec)?;
    if mset.is_empty() {
        verdict.status = Status::Inapplicable(
            "not a stationary point: the stationarity system has no multiplier".into(),
        );
        return Ok(verdict);
    }
    let full_rank = rank(&data.jac_x) == m;
    verdict.qc_full_rank = Some(full_rank);
    let ybar = -&objective.gradient_at(point);
    let qc2 = if full_rank {
        true
    } else {
        check_second_order_qc(theta, inner, point, &ybar)?.holds
    };
    verdict.qc_second_order = Some(qc2);
    if !full_rank && !qc2 {
        verdict.status = Status::Inapplicable(
            "neither full rank nor the second-order qualification condition holds; \
             see the sufficiency mode"
                .into(),
        );
        return Ok(verdict);
    }
    // the multiplier is unique under either hypothesis for these classes;
    // anything else is a defect, not an input condition
    let mv = mset.vrep();
    if mv.vertices.len() != 1 || !mv.rays.is_empty() || !mv.lineality.is_empty() {
        return Err(Error::Unsupported(
            "multiplier set is not a singleton although full rank or the second-order \
             qualification condition holds; this is a defect"
                .into(),
        ));
    }
    let vbar = mset.rel_interior_point()?;
    let t = t_map(spec, &vbar)?;
    let (ok_red, wit_red) = t_map_positive_definite_reduction(&t)?;
    let (ok_enum, wit_enum) = t_map_positive_definite_enumeration(&t)?;
    if ok_red != ok_enum {
        return Err(Error::Unsupported(format!(
            "tilt decision paths disagree (reduction: {ok_red}, enumeration: {ok_enum}); \
             this is a defect"
        )));
    }
    verdict.multiplier = Some(vbar);
    if ok_red {
        verdict.status = Status::TiltStable;
    } else {
        verdict.status = Status::NotTiltStable;
        let witness = wit_red.or(wit_enum);
        if let Some(u) = &witness {
            debug_assert!(verify_failing_direction(&t, u));
        }
        verdict.failing_direction = witness;
    }
    Ok(verdict)
}

/// Exact check that a claimed failing direction really witnesses failure:
/// u ≠ 0 and some w ∈ T(u) has ⟨w, u⟩ ≤ 0.
pub fn verify_failing_direction(t: &TMap, u: &RatVector) -> bool {
    if u.is_zero() {
        return false;
    }
    let base = t.h_eff.quad_form(u, u);
    let ju = t.jac.mul_vec(u);
    let Ok(val) = t.system.value(&ju) else {
        return false;
    };
    // minimize <s, Ju> over each piece: pieces are polyhedra; evaluate the
    // generators (the minimum over a polyhedron is attained at a vertex or
    // is -∞ along a ray)
    for piece in &val.pieces {
        let v = piece.vrep();
        for ray in v.rays.iter().chain(v.lineality.iter()) {
            if ray.dot(&ju).is_negative() {
                return true; // unbounded below
            }
        }
        for l in &v.lineality {
            if l.dot(&ju).is_positive() {
                return true;
            }
        }
        for vert in &v.vertices {
            if !(base.clone() + vert.dot(&ju)).is_positive() {
                return true;
            }
        }
    }
    false
}

/// Sufficiency mode: under strong amenability with (2qc1), a passed T-map
/// test certifies tilt stability (SufficientOnly); a failed test decides
/// nothing (Inconclusive).
pub fn tilt_sufficient(spec: &ProblemSpec) -> Result<Verdict> {
    let ProblemSpec::Composite {
        objective,
        inner,
        theta,
        point,
    } = spec
    else {
        return Err(Error::Unsupported("expects a composite problem".into()));
    };
    let (qc1, _) = crate::chain::check_first_order_qc(theta, inner, point)?;
    if !qc1 {
        return Err(Error::QcViolation);
    }
    let ybar = -&objective.gradient_at(point);
    let qc2 = check_second_order_qc(theta, inner, point, &ybar)?;
    if !qc2.holds {
        return Err(Error::QcViolation);
    }
    let mset = composite_multiplier_set(spec)?;
    if mset.is_empty() {
        let mut v = Verdict::new(Status::Inapplicable("not a stationary point".into()));
        v.qc_second_order = Some(true);
        return Ok(v);
    }
    let vbar = mset.rel_interior_point()?;
    let t = t_map(spec, &vbar)?;
    let (ok, witness) = t_map_positive_definite_enumeration(&t)?;
    let mut verdict = Verdict::new(if ok {
        Status::SufficientOnly
    } else {
        Status::Inconclusive
    });
    verdict.multiplier = Some(vbar);
    verdict.failing_direction = witness;
    verdict.qc_second_order = Some(true);
    Ok(verdict)
}
