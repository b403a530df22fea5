//! Embedded reproduction data and the instance catalogs driving the
//! cross-check suites and the `oracle-check` command.

use crate::chain::{InnerMap, QuadraticFn};
use crate::linalg::{RatMatrix, RatVector};
use crate::plq::PLQFunction;
use crate::poly::{nonneg_orthant, nonpos_orthant, unit_simplex, HRow, Polyhedron};
use crate::rat::{rat, ratio, zero};
use crate::tilt::{ConstraintRel, Objective, ProblemSpec};

/// The ℓ¹ ball {y : Σ|y_i| ≤ 1}.
pub fn ell1_ball(dim: usize) -> Polyhedron {
    let mut rows = Vec::new();
    for mask in 0..(1u32 << dim) {
        let a = RatVector(
            (0..dim)
                .map(|i| {
                    if mask & (1 << i) != 0 {
                        rat(-1)
                    } else {
                        rat(1)
                    }
                })
                .collect(),
        );
        rows.push(HRow::le(a, rat(1)));
    }
    Polyhedron::new(dim, rows)
}

/// The strict-inclusion reproduction data: h(x) = Ax with the 4×2 matrix A,
/// θ = σ_M over the unit simplex M ⊂ R⁴, analysis point x̄ = ȳ = 0, and the
/// direct representation φ = σ_B over the ℓ¹ ball B.
pub struct StrictInclusionData {
    pub a: RatMatrix,
    pub simplex: Polyhedron,
    pub theta: PLQFunction,
    pub inner: InnerMap,
    pub phi_direct: PLQFunction,
    pub xbar: RatVector,
    pub ybar: RatVector,
    pub probe_direction: RatVector,
    pub vbar: RatVector,
}

pub fn strict_inclusion_data() -> StrictInclusionData {
    let a = RatMatrix::from_i64(&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]]);
    let simplex = unit_simplex(4);
    let theta = PLQFunction::support_function(simplex.clone()).expect("simplex is nonempty");
    let inner = InnerMap::linear(&a);
    let phi_direct = PLQFunction::support_function(ell1_ball(2)).expect("ball is nonempty");
    StrictInclusionData {
        a,
        simplex,
        theta,
        inner,
        phi_direct,
        xbar: RatVector::zeros(2),
        ybar: RatVector::zeros(2),
        probe_direction: RatVector::from_i64(&[0, 1]),
        vbar: RatVector(vec![ratio(1, 2), ratio(1, 2), zero(), zero()]),
    }
}

/// One second-order instance: a supported θ with a graph point (z̄, v̄).
pub struct SocInstance {
    pub name: String,
    pub theta: PLQFunction,
    pub zbar: RatVector,
    pub vbar: RatVector,
}

impl SocInstance {
    fn new(name: &str, theta: PLQFunction, zbar: RatVector, vbar: RatVector) -> Self {
        SocInstance {
            name: name.into(),
            theta,
            zbar,
            vbar,
        }
    }
}

fn interval(lo: i64, hi: i64) -> Polyhedron {
    Polyhedron::new(
        1,
        vec![
            HRow::le(RatVector::from_i64(&[-1]), rat(-lo)),
            HRow::le(RatVector::from_i64(&[1]), rat(hi)),
        ],
    )
}

fn box2(lo: i64, hi: i64) -> Polyhedron {
    Polyhedron::new(
        2,
        vec![
            HRow::le(RatVector::from_i64(&[1, 0]), rat(hi)),
            HRow::le(RatVector::from_i64(&[-1, 0]), rat(-lo)),
            HRow::le(RatVector::from_i64(&[0, 1]), rat(hi)),
            HRow::le(RatVector::from_i64(&[0, -1]), rat(-lo)),
        ],
    )
}

/// Z = R^s_- × {0}^(m-s).
fn orthant_product(s: usize, m: usize) -> Polyhedron {
    let mut rows = Vec::new();
    for i in 0..m {
        let e = RatVector::unit(m, i);
        if i < s {
            rows.push(HRow::le(e, zero()));
        } else {
            rows.push(HRow::eq(e, zero()));
        }
    }
    Polyhedron::new(m, rows)
}

/// The catalog used by the formula-vs-oracle suite: indicators and
/// support-PLQ instances in dimension ≤ 4, covering orthant products, the
/// simplex, a diamond, and Q of ranks 0, 1, and full.
pub fn soc_catalog() -> Vec<SocInstance> {
    let rv = RatVector::from_i64;
    let mut out = Vec::new();

    // --- indicators -------------------------------------------------------
    let ind = |p: Polyhedron| PLQFunction::indicator(p).expect("nonempty");
    out.push(SocInstance::new(
        "delta_halfline_zero_mult",
        ind(nonpos_orthant(1).into_polyhedron()),
        rv(&[0]),
        rv(&[0]),
    ));
    out.push(SocInstance::new(
        "delta_halfline_strict_mult",
        ind(nonpos_orthant(1).into_polyhedron()),
        rv(&[0]),
        rv(&[1]),
    ));
    out.push(SocInstance::new(
        "delta_orthant2_zero",
        ind(nonpos_orthant(2).into_polyhedron()),
        rv(&[0, 0]),
        rv(&[0, 0]),
    ));
    out.push(SocInstance::new(
        "delta_orthant2_mixed",
        ind(nonpos_orthant(2).into_polyhedron()),
        rv(&[0, 0]),
        rv(&[1, 0]),
    ));
    out.push(SocInstance::new(
        "delta_r1m1_product_zero",
        ind(orthant_product(1, 2)),
        rv(&[0, 0]),
        rv(&[0, 2]),
    ));
    out.push(SocInstance::new(
        "delta_r1m1_product_free",
        ind(orthant_product(1, 2)),
        rv(&[0, 0]),
        rv(&[0, 0]),
    ));
    out.push(SocInstance::new(
        "delta_orthant3",
        ind(orthant_product(3, 3)),
        rv(&[0, 0, 0]),
        rv(&[1, 0, 0]),
    ));
    out.push(SocInstance::new(
        "delta_orthant4_two_strict",
        ind(orthant_product(4, 4)),
        rv(&[0, 0, 0, 0]),
        rv(&[1, 1, 0, 0]),
    ));
    out.push(SocInstance::new(
        "delta_square_vertex",
        ind(box2(0, 1)),
        rv(&[0, 0]),
        rv(&[-1, -1]),
    ));
    out.push(SocInstance::new(
        "delta_square_edge",
        ind(box2(0, 1)),
        RatVector(vec![zero(), ratio(1, 2)]),
        rv(&[-1, 0]),
    ));
    out.push(SocInstance::new(
        "delta_diamond_vertex",
        ind(ell1_ball(2)),
        rv(&[1, 0]),
        rv(&[1, 0]),
    ));
    out.push(SocInstance::new(
        "delta_simplex3_vertex",
        ind(unit_simplex(3)),
        rv(&[1, 0, 0]),
        rv(&[1, 0, 0]),
    ));
    out.push(SocInstance::new(
        "delta_halfspace_facet",
        ind(Polyhedron::new(2, vec![HRow::le(rv(&[1, 0]), zero())])),
        rv(&[0, 3]),
        rv(&[1, 0]),
    ));
    out.push(SocInstance::new(
        "delta_line",
        ind(Polyhedron::new(2, vec![HRow::eq(rv(&[1, -1]), zero())])),
        rv(&[2, 2]),
        rv(&[1, -1]),
    ));

    // --- support functions (Q = 0) ----------------------------------------
    out.push(SocInstance::new(
        "sigma_simplex4_example",
        PLQFunction::support_function(unit_simplex(4)).unwrap(),
        rv(&[0, 0, 0, 0]),
        RatVector(vec![ratio(1, 2), ratio(1, 2), zero(), zero()]),
    ));
    out.push(SocInstance::new(
        "sigma_diamond_interior",
        PLQFunction::support_function(ell1_ball(2)).unwrap(),
        rv(&[0, 0]),
        rv(&[0, 0]),
    ));
    out.push(SocInstance::new(
        "sigma_interval_origin",
        PLQFunction::support_function(interval(0, 1)).unwrap(),
        rv(&[0]),
        rv(&[0]),
    ));
    out.push(SocInstance::new(
        "sigma_box_face",
        PLQFunction::support_function(box2(-1, 1)).unwrap(),
        rv(&[1, 0]),
        rv(&[1, 0]),
    ));
    out.push(SocInstance::new(
        "sigma_ray_boundary",
        PLQFunction::support_function(nonneg_orthant(1).into_polyhedron()).unwrap(),
        rv(&[-1]),
        rv(&[0]),
    ));

    // --- support-PLQ with Q ≠ 0 --------------------------------------------
    out.push(SocInstance::new(
        "huber_kink",
        PLQFunction::support_plq(interval(0, 1), RatMatrix::identity(1)).unwrap(),
        RatVector(vec![ratio(3, 2)]),
        rv(&[1]),
    ));
    out.push(SocInstance::new(
        "huber_smooth_zone",
        PLQFunction::support_plq(interval(0, 1), RatMatrix::identity(1)).unwrap(),
        RatVector(vec![ratio(1, 2)]),
        RatVector(vec![ratio(1, 2)]),
    ));
    out.push(SocInstance::new(
        "plus_square_corner",
        PLQFunction::support_plq(nonneg_orthant(1).into_polyhedron(), RatMatrix::identity(1))
            .unwrap(),
        rv(&[0]),
        rv(&[0]),
    ));
    out.push(SocInstance::new(
        "rank1_q_orthant",
        PLQFunction::support_plq(
            nonneg_orthant(2).into_polyhedron(),
            RatMatrix::from_i64(&[&[1, 0], &[0, 0]]),
        )
        .unwrap(),
        rv(&[0, 0]),
        rv(&[0, 0]),
    ));
    out.push(SocInstance::new(
        "full_q_box_mixed",
        PLQFunction::support_plq(box2(0, 1), RatMatrix::identity(2)).unwrap(),
        RatVector(vec![ratio(3, 2), ratio(1, 2)]),
        RatVector(vec![rat(1), ratio(1, 2)]),
    ));
    out.push(SocInstance::new(
        "full_q_segment",
        PLQFunction::support_plq(
            // conv{(0,0), (1,1)}
            Polyhedron::new(
                2,
                vec![
                    HRow::eq(rv(&[1, -1]), zero()),
                    HRow::le(rv(&[-1, 0]), zero()),
                    HRow::le(rv(&[1, 0]), rat(1)),
                ],
            ),
            RatMatrix::identity(2),
        )
        .unwrap(),
        rv(&[1, 0]),
        RatVector(vec![ratio(1, 2), ratio(1, 2)]),
    ));
    out.push(SocInstance::new(
        "rank1_q_line",
        PLQFunction::support_plq(
            Polyhedron::new(2, vec![HRow::eq(rv(&[0, 1]), zero())]),
            RatMatrix::from_i64(&[&[1, 0], &[0, 0]]),
        )
        .unwrap(),
        rv(&[2, 0]),
        rv(&[2, 0]),
    ));

    out
}

/// Deterministic probe directions: at least nine per ambient dimension.
pub fn probe_directions(dim: usize) -> Vec<RatVector> {
    let rv = RatVector::from_i64;
    match dim {
        0 => vec![RatVector::zeros(0)],
        1 => vec![
            rv(&[-3]),
            rv(&[-2]),
            rv(&[-1]),
            RatVector(vec![ratio(-1, 2)]),
            rv(&[0]),
            RatVector(vec![ratio(1, 2)]),
            rv(&[1]),
            rv(&[2]),
            rv(&[3]),
        ],
        2 => vec![
            rv(&[0, 0]),
            rv(&[1, 0]),
            rv(&[-1, 0]),
            rv(&[0, 1]),
            rv(&[0, -1]),
            rv(&[1, 1]),
            rv(&[1, -1]),
            rv(&[-1, 1]),
            rv(&[-2, -1]),
            rv(&[2, 3]),
        ],
        3 => vec![
            rv(&[0, 0, 0]),
            rv(&[1, 0, 0]),
            rv(&[0, 1, 0]),
            rv(&[0, 0, 1]),
            rv(&[-1, 0, 0]),
            rv(&[0, -1, -1]),
            rv(&[1, 1, 1]),
            rv(&[-1, 1, -1]),
            rv(&[2, -1, 0]),
        ],
        _ => vec![
            RatVector::zeros(dim),
            RatVector::unit(dim, 0),
            RatVector::unit(dim, 1),
            RatVector::unit(dim, dim - 1),
            -&RatVector::unit(dim, 0),
            -&RatVector::unit(dim, dim - 2),
            RatVector(vec![rat(1); dim]),
            RatVector(
                (0..dim)
                    .map(|i| rat(if i % 2 == 0 { 1 } else { -1 }))
                    .collect(),
            ),
            RatVector((0..dim).map(|i| rat(i as i64 - 1)).collect()),
            {
                let mut v = RatVector::zeros(dim);
                v.0[2] = rat(1);
                v.0[3] = rat(-1);
                v
            },
        ],
    }
}

/// NLP instances with LICQ for the path-equivalence suite. Mixes stable,
/// unstable, weak-complementarity, equality-constrained and unconstrained
/// cases; every point is feasible and stationarity is decided by the
/// pipeline.
pub fn nlp_catalog() -> Vec<(String, ProblemSpec)> {
    let rv = RatVector::from_i64;
    let quad = |a: &[&[i64]], b: &[i64]| {
        Objective::Quadratic(
            QuadraticFn::new(RatMatrix::from_i64(a), rv(b), zero()).expect("symmetric"),
        )
    };
    let lin = |b: &[i64]| QuadraticFn::linear(rv(b));
    let mut out: Vec<(String, ProblemSpec)> = Vec::new();

    out.push((
        "stable_single_ineq".into(),
        ProblemSpec::Nlp {
            objective: quad(&[&[2, 0], &[0, 2]], &[-1, 0]),
            constraints: vec![(lin(&[1, 0]), ConstraintRel::Le)],
            point: RatVector::zeros(2),
        },
    ));
    out.push((
        "saddle_single_ineq".into(),
        ProblemSpec::Nlp {
            objective: quad(&[&[1, 0], &[0, -1]], &[-1, 0]),
            constraints: vec![(lin(&[1, 0]), ConstraintRel::Le)],
            point: RatVector::zeros(2),
        },
    ));
    out.push((
        "weak_complementarity_unstable".into(),
        ProblemSpec::Nlp {
            objective: quad(&[&[-2, 0], &[0, 2]], &[0, 0]),
            constraints: vec![(lin(&[1, 0]), ConstraintRel::Le)],
            point: RatVector::zeros(2),
        },
    ));
    out.push((
        "weak_complementarity_stable".into(),
        ProblemSpec::Nlp {
            objective: quad(&[&[2, 0], &[0, 2]], &[0, 0]),
            constraints: vec![(lin(&[1, 0]), ConstraintRel::Le)],
            point: RatVector::zeros(2),
        },
    ));
    out.push((
        "equality_reduced_subspace".into(),
        ProblemSpec::Nlp {
            objective: quad(&[&[-1, 0], &[0, 1]], &[0, 0]),
            constraints: vec![(lin(&[1, 0]), ConstraintRel::Eq)],
            point: RatVector::zeros(2),
        },
    ));
    out.push((
        "equality_unstable".into(),
        ProblemSpec::Nlp {
            objective: quad(&[&[1, 0], &[0, -1]], &[0, 0]),
            constraints: vec![(lin(&[1, 0]), ConstraintRel::Eq)],
            point: RatVector::zeros(2),
        },
    ));
    out.push((
        "unconstrained_stable".into(),
        ProblemSpec::Nlp {
            objective: quad(&[&[2, 1], &[1, 2]], &[0, 0]),
            constraints: vec![],
            point: RatVector::zeros(2),
        },
    ));
    out.push((
        "unconstrained_saddle".into(),
        ProblemSpec::Nlp {
            objective: quad(&[&[1, 0], &[0, -1]], &[0, 0]),
            constraints: vec![],
            point: RatVector::zeros(2),
        },
    ));
    out.push((
        "two_active_corner".into(),
        ProblemSpec::Nlp {
            objective: quad(&[&[2, 0], &[0, 2]], &[-1, -1]),
            constraints: vec![
                (lin(&[1, 0]), ConstraintRel::Le),
                (lin(&[0, 1]), ConstraintRel::Le),
            ],
            point: RatVector::zeros(2),
        },
    ));
    out.push((
        "two_active_indefinite_off_cone".into(),
        ProblemSpec::Nlp {
            objective: quad(&[&[0, 1], &[1, 0]], &[-1, -1]),
            constraints: vec![
                (lin(&[1, 0]), ConstraintRel::Le),
                (lin(&[0, 1]), ConstraintRel::Le),
            ],
            point: RatVector::zeros(2),
        },
    ));
    out.push((
        "quadratic_constraint_curvature".into(),
        ProblemSpec::Nlp {
            objective: quad(&[&[0, 0], &[0, 2]], &[-1, 0]),
            constraints: vec![(
                // φ₁(x) = x₁ + x₁² + x₂²: multiplier 1 injects 2I curvature
                QuadraticFn::new(
                    RatMatrix::from_i64(&[&[2, 0], &[0, 2]]),
                    rv(&[1, 0]),
                    zero(),
                )
                .unwrap(),
                ConstraintRel::Le,
            )],
            point: RatVector::zeros(2),
        },
    ));
    out.push((
        "quadratic_constraint_negative_curvature".into(),
        ProblemSpec::Nlp {
            objective: quad(&[&[0, 0], &[0, 1]], &[-1, 0]),
            constraints: vec![(
                // multiplier 1 injects -3 curvature in x₂
                QuadraticFn::new(
                    RatMatrix::from_i64(&[&[0, 0], &[0, -3]]),
                    rv(&[1, 0]),
                    zero(),
                )
                .unwrap(),
                ConstraintRel::Le,
            )],
            point: RatVector::zeros(2),
        },
    ));
    out.push((
        "not_stationary_sign_violation".into(),
        ProblemSpec::Nlp {
            objective: quad(&[&[2, 0], &[0, 2]], &[1, 0]),
            constraints: vec![(lin(&[1, 0]), ConstraintRel::Le)],
            point: RatVector::zeros(2),
        },
    ));
    out.push((
        "inactive_constraint_dropped".into(),
        ProblemSpec::Nlp {
            objective: quad(&[&[2, 0], &[0, 2]], &[-1, 0]),
            constraints: vec![
                (lin(&[1, 0]), ConstraintRel::Le),
                (
                    QuadraticFn::new(RatMatrix::zeros(2, 2), rv(&[0, 1]), rat(-5)).unwrap(),
                    ConstraintRel::Le,
                ),
            ],
            point: RatVector::zeros(2),
        },
    ));
    out.push((
        "three_dims_mixed".into(),
        ProblemSpec::Nlp {
            objective: quad(&[&[2, 0, 0], &[0, 2, 0], &[0, 0, -1]], &[-1, 0, 0]),
            constraints: vec![
                (lin(&[1, 0, 0]), ConstraintRel::Le),
                (lin(&[0, 0, 1]), ConstraintRel::Eq),
            ],
            point: RatVector::zeros(3),
        },
    ));
    out
}

/// Composite tilt instances with Q ≠ 0 for the (pd)-reduction guard.
pub fn composite_catalog() -> Vec<(String, ProblemSpec)> {
    let rv = RatVector::from_i64;
    let mut out: Vec<(String, ProblemSpec)> = Vec::new();
    let quad_obj = |a: &[&[i64]]| {
        Objective::Quadratic(
            QuadraticFn::new(RatMatrix::from_i64(a), RatVector::zeros(a.len()), zero()).unwrap(),
        )
    };
    // smooth quadratic θ with full Q
    for (tag, h) in [("pdq_full_stable", 0i64), ("pdq_full_unstable", -3)] {
        out.push((
            tag.into(),
            ProblemSpec::Composite {
                objective: quad_obj(&[&[h]]),
                inner: InnerMap::identity(1),
                theta: PLQFunction::support_plq(Polyhedron::space(1), RatMatrix::identity(1))
                    .unwrap(),
                point: RatVector::zeros(1),
            },
        ));
    }
    // rank-1 Q over the orthant, cross objective signs
    for (tag, h11) in [
        ("pdq_rank1_stable", 1i64),
        ("pdq_rank1_kernel", 0),
        ("pdq_rank1_unstable", -1),
    ] {
        out.push((
            tag.into(),
            ProblemSpec::Composite {
                objective: quad_obj(&[&[h11, 0], &[0, 1]]),
                inner: InnerMap::identity(2),
                theta: PLQFunction::support_plq(
                    nonpos_orthant(2).into_polyhedron(),
                    RatMatrix::from_i64(&[&[1, 0], &[0, 0]]),
                )
                .unwrap(),
                point: RatVector::zeros(2),
            },
        ));
    }
    // huber kink: no one-sided curvature help
    for (tag, h) in [("pdq_kink_stable", 1i64), ("pdq_kink_flat", 0)] {
        out.push((
            tag.into(),
            ProblemSpec::Composite {
                objective: Objective::Quadratic(
                    QuadraticFn::new(
                        RatMatrix::from_i64(&[&[2 * h]]),
                        RatVector(vec![rat(-1) - rat(2 * h)]),
                        zero(),
                    )
                    .unwrap(),
                ),
                inner: InnerMap::identity(1),
                theta: PLQFunction::support_plq(interval(0, 1), RatMatrix::identity(1)).unwrap(),
                point: rv(&[1]),
            },
        ));
    }
    // non-identity Jacobian with full Q: curvature transported through J
    out.push((
        "pdq_rect_jacobian".into(),
        ProblemSpec::Composite {
            objective: quad_obj(&[&[0, 0], &[0, 1]]),
            inner: InnerMap::linear(&RatMatrix::from_i64(&[&[1, 1]])),
            theta: PLQFunction::support_plq(Polyhedron::space(1), RatMatrix::identity(1)).unwrap(),
            point: RatVector::zeros(2),
        },
    ));
    // indicator composites through the NLP encodings are covered by the
    // path-equivalence suite; add one direct polyhedral instance
    out.push((
        "pd_indicator_orthant".into(),
        ProblemSpec::Composite {
            objective: quad_obj(&[&[2, 1], &[1, 2]]),
            inner: InnerMap::identity(2),
            theta: PLQFunction::indicator(nonpos_orthant(2).into_polyhedron()).unwrap(),
            point: RatVector::zeros(2),
        },
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_sizes() {
        assert!(soc_catalog().len() >= 20);
        assert!(nlp_catalog().len() >= 10);
        assert!(composite_catalog().len() >= 5);
        for inst in soc_catalog() {
            assert!(inst.theta.ambient_dim() <= 4, "{}", inst.name);
            assert!(probe_directions(inst.theta.ambient_dim()).len() >= 9);
        }
    }

    #[test]
    fn catalog_points_are_graph_points() {
        for inst in soc_catalog() {
            assert!(
                inst.theta.is_subgradient(&inst.zbar, &inst.vbar).unwrap(),
                "{}: (z̄, v̄) must lie in gph ∂θ",
                inst.name
            );
        }
    }
}
