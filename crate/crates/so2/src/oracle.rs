//! Brute-force second-order subdifferentials from first principles: build the
//! piecewise-polyhedral graph of ∂θ, stratify it locally around the reference
//! point, take regular normal cones cell by cell, and realize the limiting
//! normal cone as their finite union. Coderivative slices of that union are
//! the oracle values the face-pair formulas are checked against.

use crate::linalg::RatVector;
use crate::plq::PLQFunction;
use crate::poly::{face_budget, strict_point, HRow, PolyCone, PolyUnion, Polyhedron};
use crate::rat::zero;
use crate::{Error, Result};
use std::collections::BTreeSet;

/// One relatively open cell of the local stratification, with its closed
/// support, the indices of the pieces whose localization contains it, and the
/// regular normal cone of the union along it.
#[derive(Clone, Debug)]
pub struct StratCell {
    pub support: Polyhedron,
    pub point: RatVector,
    pub incident: Vec<usize>,
    pub normal: PolyCone,
}

/// Local stratification of a union of polyhedra around a point.
#[derive(Clone, Debug)]
pub struct Stratification {
    pub cells: Vec<StratCell>,
}

/// Graph of the subgradient map gph ∂θ ⊂ R^m × R^m as a finite union of
/// polyhedra, assembled face-wise. Coordinates are (z, v).
pub fn graph_of_subgradient_map(theta: &PLQFunction) -> Result<PolyUnion> {
    let m = theta.ambient_dim();
    let dim = 2 * m;
    let mut pieces = Vec::new();
    match theta {
        PLQFunction::Indicator(z) => {
            for face in z.faces()? {
                let x = face.rel_interior_point()?;
                let nf = z.normal_cone(&x)?;
                let mut rows = Vec::new();
                for r in face.rows() {
                    rows.push(HRow {
                        a: r.a.concat(&RatVector::zeros(m)),
                        rel: r.rel,
                        b: r.b.clone(),
                    });
                }
                for r in nf.as_polyhedron().rows() {
                    rows.push(HRow {
                        a: RatVector::zeros(m).concat(&r.a),
                        rel: r.rel,
                        b: r.b.clone(),
                    });
                }
                pieces.push(Polyhedron::new(dim, rows));
            }
        }
        PLQFunction::SupportPLQ { c, q } => {
            // inverse graph of v ↦ Qv + N_C(v): piece over face F is
            // {(z, v) : v ∈ F, z - Qv ∈ N_F}
            for face in c.faces()? {
                let x = face.rel_interior_point()?;
                let nf = c.normal_cone(&x)?;
                let mut rows = Vec::new();
                for r in face.rows() {
                    rows.push(HRow {
                        a: RatVector::zeros(m).concat(&r.a),
                        rel: r.rel,
                        b: r.b.clone(),
                    });
                }
                for r in nf.as_polyhedron().rows() {
                    // <s, z - Qv> ≤/= 0  ⟺  <s, z> + <-Qs, v> ≤/= 0
                    let a = r.a.concat(&-&q.mul_vec(&r.a));
                    rows.push(HRow {
                        a,
                        rel: r.rel,
                        b: zero(),
                    });
                }
                pieces.push(Polyhedron::new(dim, rows));
            }
        }
    }
    Ok(PolyUnion::new(dim, pieces))
}

/// Regular normal cone to a union at a common point: the intersection over
/// all pieces containing the point of their regular normal cones.
pub fn regular_normals_at(u: &PolyUnion, p: &RatVector) -> Result<PolyCone> {
    let incident: Vec<&Polyhedron> = u.pieces.iter().filter(|q| q.contains_point(p)).collect();
    if incident.is_empty() {
        return Err(Error::PointNotInSet);
    }
    let mut rows = Vec::new();
    for piece in incident {
        let n = piece.normal_cone(p)?;
        rows.extend(n.as_polyhedron().rows().to_vec());
    }
    Ok(PolyCone::from_rows(u.dim, rows))
}

fn canonical_hyperplane(a: &RatVector) -> RatVector {
    use num::Signed;
    let p = a.primitive();
    match p.0.iter().find(|x| !num::Zero::is_zero(*x)) {
        Some(x) if x.is_negative() => -&p,
        _ => p,
    }
}

/// Builds the local stratification of the union around `p`: localize each
/// incident piece to its tangent cone, collect all facet and affine-hull
/// hyperplanes, and enumerate the nonempty relatively open sign cells lying
/// inside the localized union. Extra hyperplanes may be injected to test
/// refinement stability.
pub fn stratify_at(u: &PolyUnion, p: &RatVector, extra: &[RatVector]) -> Result<Stratification> {
    let dim = u.dim;
    let incident_idx: Vec<usize> = (0..u.pieces.len())
        .filter(|&i| u.pieces[i].contains_point(p))
        .collect();
    if incident_idx.is_empty() {
        return Err(Error::PointNotInSet);
    }
    let localized: Vec<PolyCone> = incident_idx
        .iter()
        .map(|&i| u.pieces[i].tangent_cone(p))
        .collect::<Result<_>>()?;

    let mut hyperplanes: BTreeSet<RatVector> = BTreeSet::new();
    for cone in &localized {
        for r in cone.as_polyhedron().canonical_rows() {
            if !r.a.is_zero() {
                hyperplanes.insert(canonical_hyperplane(&r.a));
            }
        }
    }
    for h in extra {
        if !h.is_zero() {
            hyperplanes.insert(canonical_hyperplane(h));
        }
    }
    let hyperplanes: Vec<RatVector> = hyperplanes.into_iter().collect();

    let mut seen: BTreeSet<Vec<i8>> = BTreeSet::new();
    let mut cells = Vec::new();
    let budget = face_budget();
    let mut visited: u128 = 0;

    for cone in &localized {
        let closed0: Vec<HRow> = cone.as_polyhedron().rows().to_vec();
        // depth-first sign assignment with infeasibility pruning
        let mut stack: Vec<(usize, Vec<HRow>, Vec<HRow>, Vec<i8>)> =
            vec![(0, closed0, Vec::new(), Vec::new())];
        while let Some((next, closed, strict, signs)) = stack.pop() {
            visited += 1;
            if visited > budget.saturating_mul(4) {
                return Err(Error::FaceBudget {
                    needed: visited,
                    cap: budget.saturating_mul(4),
                });
            }
            let Some(point) = strict_point(dim, &closed, &strict) else {
                continue;
            };
            if next == hyperplanes.len() {
                if !seen.insert(signs.clone()) {
                    continue;
                }
                let incidence: Vec<usize> = (0..localized.len())
                    .filter(|&j| localized[j].contains_point(&point))
                    .collect();
                let mut nrows = Vec::new();
                for &j in &incidence {
                    let t = localized[j].as_polyhedron().tangent_cone(&point)?;
                    nrows.extend(t.polar().as_polyhedron().rows().to_vec());
                }
                let normal = PolyCone::from_rows(dim, nrows);
                // closed support of the cell
                let mut support_rows = closed.clone();
                support_rows.extend(strict.iter().cloned());
                cells.push(StratCell {
                    support: Polyhedron::new(dim, support_rows),
                    point,
                    incident: incidence.iter().map(|&j| incident_idx[j]).collect(),
                    normal,
                });
                continue;
            }
            let h = &hyperplanes[next];
            // sign 0
            let mut c0 = closed.clone();
            c0.push(HRow::eq(h.clone(), zero()));
            let mut s0 = signs.clone();
            s0.push(0);
            stack.push((next + 1, c0, strict.clone(), s0));
            // sign -1: <h, x> < 0
            let mut sm = strict.clone();
            sm.push(HRow::le(h.clone(), zero()));
            let mut gm = signs.clone();
            gm.push(-1);
            stack.push((next + 1, closed.clone(), sm, gm));
            // sign +1: <h, x> > 0
            let mut sp = strict.clone();
            sp.push(HRow::le(-h, zero()));
            let mut gp = signs.clone();
            gp.push(1);
            stack.push((next + 1, closed, sp, gp));
        }
    }
    Ok(Stratification { cells })
}

/// Limiting normal cone to the union at `p`, as the finite family of regular
/// normal cones over the cells of the local stratification whose closure
/// contains `p` (all localized cells, by conic structure). Deduplicated.
pub fn limiting_normals_at(u: &PolyUnion, p: &RatVector) -> Result<Vec<PolyCone>> {
    limiting_normals_refined(u, p, &[])
}

/// Same as [`limiting_normals_at`] with extra stratification hyperplanes.
pub fn limiting_normals_refined(
    u: &PolyUnion,
    p: &RatVector,
    extra: &[RatVector],
) -> Result<Vec<PolyCone>> {
    let strat = stratify_at(u, p, extra)?;
    let mut out: Vec<PolyCone> = Vec::new();
    for cell in strat.cells {
        if !out.iter().any(|c| c.set_eq(&cell.normal)) {
            out.push(cell.normal);
        }
    }
    Ok(out)
}

/// Precomputed oracle for one (θ, z̄, v̄): the graph, and the limiting normal
/// cone family at (z̄, v̄). Direction slices are then cheap.
pub struct GraphOracle {
    pub graph: PolyUnion,
    pub normal_cones: Vec<PolyCone>,
    m: usize,
}

impl GraphOracle {
    pub fn new(theta: &PLQFunction, zbar: &RatVector, vbar: &RatVector) -> Result<Self> {
        let graph = graph_of_subgradient_map(theta)?;
        let point = zbar.concat(vbar);
        if !graph.contains_point(&point) {
            return Err(Error::NotSubgradient);
        }
        let normal_cones = limiting_normals_at(&graph, &point)?;
        Ok(GraphOracle {
            graph,
            normal_cones,
            m: theta.ambient_dim(),
        })
    }

    /// The coderivative slice {w : (w, -u) ∈ N(gph ∂θ; (z̄,v̄))}.
    pub fn soc_value(&self, u: &RatVector) -> Result<PolyUnion> {
        if u.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: u.len(),
            });
        }
        let mut pieces = Vec::new();
        for cone in &self.normal_cones {
            // rows over (w, -u): <a1, w> + <a2, -u> ≤/= 0
            let mut rows = Vec::new();
            for r in cone.as_polyhedron().rows() {
                let a1 = RatVector(r.a.0[..self.m].to_vec());
                let a2 = RatVector(r.a.0[self.m..].to_vec());
                rows.push(HRow {
                    a: a1,
                    rel: r.rel,
                    b: a2.dot(u),
                });
            }
            pieces.push(Polyhedron::new(self.m, rows));
        }
        Ok(PolyUnion::new(self.m, pieces).dedup())
    }

    pub fn membership(&self, u: &RatVector, w: &RatVector) -> Result<bool> {
        let probe = w.concat(&-u);
        Ok(self.normal_cones.iter().any(|c| c.contains_point(&probe)))
    }
}

/// One-shot brute-force value of ∂²θ(z̄,v̄)(u) from the graph definition.
pub fn brute_soc(
    theta: &PLQFunction,
    zbar: &RatVector,
    vbar: &RatVector,
    u: &RatVector,
) -> Result<PolyUnion> {
    GraphOracle::new(theta, zbar, vbar)?.soc_value(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{nonpos_orthant, unit_simplex};
    use crate::rat::{rat, ratio};
    use crate::soc;

    fn rv(xs: &[i64]) -> RatVector {
        RatVector::from_i64(xs)
    }

    fn delta_r_nonpos() -> PLQFunction {
        PLQFunction::indicator(nonpos_orthant(1).into_polyhedron()).unwrap()
    }

    #[test]
    fn graph_of_half_line_indicator() {
        let g = graph_of_subgradient_map(&delta_r_nonpos()).unwrap();
        // {(x,0): x ≤ 0} ∪ {(0,v): v ≥ 0}
        assert!(g.contains_point(&rv(&[-3, 0])));
        assert!(g.contains_point(&rv(&[0, 4])));
        assert!(g.contains_point(&rv(&[0, 0])));
        assert!(!g.contains_point(&rv(&[-3, 1])));
        assert!(!g.contains_point(&rv(&[1, 0])));
    }

    #[test]
    fn graph_of_affine_function() {
        let theta = PLQFunction::support_function(Polyhedron::point(&rv(&[2, 1]))).unwrap();
        let g = graph_of_subgradient_map(&theta).unwrap();
        assert_eq!(g.pieces.len(), 1);
        assert!(g.contains_point(&rv(&[9, -4, 2, 1])));
        assert!(!g.contains_point(&rv(&[9, -4, 2, 2])));
    }

    #[test]
    fn regular_normals_examples() {
        // single convex piece: the normal cone of that piece
        let square = Polyhedron::new(
            2,
            vec![
                HRow::le(rv(&[1, 0]), rat(1)),
                HRow::le(rv(&[-1, 0]), rat(0)),
                HRow::le(rv(&[0, 1]), rat(1)),
                HRow::le(rv(&[0, -1]), rat(0)),
            ],
        );
        let u = PolyUnion::new(2, vec![square.clone()]);
        let n = regular_normals_at(&u, &rv(&[0, 0])).unwrap();
        assert!(n.set_eq(&square.normal_cone(&rv(&[0, 0])).unwrap()));
        // interior point of a full-dimensional piece: {0}
        let interior = RatVector(vec![ratio(1, 2), ratio(1, 2)]);
        assert!(regular_normals_at(&u, &interior).unwrap().is_zero_cone());

        // the δ_{R₋} graph at the corner: intersection of the two normal cones
        let g = graph_of_subgradient_map(&delta_r_nonpos()).unwrap();
        let n = regular_normals_at(&g, &rv(&[0, 0])).unwrap();
        let expected = PolyCone::from_rows(
            2,
            vec![
                HRow::le(rv(&[-1, 0]), rat(0)),
                HRow::le(rv(&[0, 1]), rat(0)),
            ],
        );
        assert!(n.set_eq(&expected));
        assert!(matches!(
            regular_normals_at(&g, &rv(&[1, 1])),
            Err(Error::PointNotInSet)
        ));
    }

    #[test]
    fn limiting_normals_convex_set_are_regular() {
        let square = Polyhedron::new(
            2,
            vec![
                HRow::le(rv(&[1, 0]), rat(1)),
                HRow::le(rv(&[-1, 0]), rat(0)),
                HRow::le(rv(&[0, 1]), rat(1)),
                HRow::le(rv(&[0, -1]), rat(0)),
            ],
        );
        let u = PolyUnion::new(2, vec![square.clone()]);
        let p = rv(&[0, 0]);
        let cones = limiting_normals_at(&u, &p).unwrap();
        let reg = square.normal_cone(&p).unwrap();
        // all limiting normals at a convex set's point lie in the regular cone,
        // and the regular cone itself appears
        assert!(cones.iter().all(|c| c.subset_of(&reg)));
        assert!(cones.iter().any(|c| c.set_eq(&reg)));
    }

    #[test]
    fn limiting_normals_half_line_graph() {
        let g = graph_of_subgradient_map(&delta_r_nonpos()).unwrap();
        let cones = limiting_normals_at(&g, &rv(&[0, 0])).unwrap();
        // {0} × R, R × {0}, R₊ × R₋
        let vertical = PolyCone::from_rows(2, vec![HRow::eq(rv(&[1, 0]), rat(0))]);
        let horizontal = PolyCone::from_rows(2, vec![HRow::eq(rv(&[0, 1]), rat(0))]);
        let corner = PolyCone::from_rows(
            2,
            vec![
                HRow::le(rv(&[-1, 0]), rat(0)),
                HRow::le(rv(&[0, 1]), rat(0)),
            ],
        );
        for expected in [&vertical, &horizontal, &corner] {
            assert!(
                cones.iter().any(|c| c.set_eq(expected)),
                "missing normal cone value"
            );
        }
        for c in &cones {
            assert!(
                c.subset_of(&vertical) || c.subset_of(&horizontal) || c.subset_of(&corner),
                "unexpected normal cone value"
            );
        }
    }

    #[test]
    fn brute_matches_formula_on_half_line() {
        let theta = delta_r_nonpos();
        let zbar = RatVector::zeros(1);
        let sys = soc::soc_system(&theta, &zbar, &zbar).unwrap();
        let oracle = GraphOracle::new(&theta, &zbar, &zbar).unwrap();
        for ui in -1..=1 {
            let u = rv(&[ui]);
            let lhs = oracle.soc_value(&u).unwrap();
            let rhs = sys.value(&u).unwrap();
            assert!(lhs.set_eq(&rhs), "mismatch at u = {ui}");
        }
    }

    #[test]
    fn brute_matches_rep1_for_sigma_b() {
        let mut rows = Vec::new();
        for sx in [1i64, -1] {
            for sy in [1i64, -1] {
                rows.push(HRow::le(rv(&[sx, sy]), rat(1)));
            }
        }
        let phi = PLQFunction::support_function(Polyhedron::new(2, rows)).unwrap();
        let oracle = GraphOracle::new(&phi, &RatVector::zeros(2), &RatVector::zeros(2)).unwrap();
        let at_zero = oracle.soc_value(&RatVector::zeros(2)).unwrap();
        assert!(at_zero.contains_point(&rv(&[11, -3])));
        let off = oracle.soc_value(&rv(&[0, 1])).unwrap();
        assert!(off.is_empty());
    }

    #[test]
    fn brute_matches_formula_on_simplex_example() {
        let theta = PLQFunction::support_function(unit_simplex(4)).unwrap();
        let zbar = RatVector::zeros(4);
        let vbar = RatVector(vec![ratio(1, 2), ratio(1, 2), rat(0), rat(0)]);
        let sys = soc::soc_system(&theta, &zbar, &vbar).unwrap();
        let oracle = GraphOracle::new(&theta, &zbar, &vbar).unwrap();
        let au = rv(&[0, 0, 1, -1]);
        let lhs = oracle.soc_value(&au).unwrap();
        let rhs = sys.value(&au).unwrap();
        assert!(lhs.set_eq(&rhs));
        assert!(lhs.contains_point(&RatVector(vec![ratio(-1, 2), ratio(-1, 2), rat(1), rat(0)])));
        // u = 0 contains 0 for any θ
        let at_zero = oracle.soc_value(&RatVector::zeros(4)).unwrap();
        assert!(at_zero.contains_point(&RatVector::zeros(4)));
    }

    #[test]
    fn refinement_stability() {
        let g = graph_of_subgradient_map(&delta_r_nonpos()).unwrap();
        let p = rv(&[0, 0]);
        let base = limiting_normals_at(&g, &p).unwrap();
        let refined = limiting_normals_refined(&g, &p, &[rv(&[1, 1]), rv(&[2, -3])]).unwrap();
        let to_union = |cones: &[PolyCone]| {
            PolyUnion::new(2, cones.iter().map(|c| c.as_polyhedron().clone()).collect())
        };
        assert!(to_union(&base).set_eq(&to_union(&refined)));
    }

    mod random_agreement {
        use super::*;
        use crate::rat::rat;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(12))]

            // formula vs brute force on random indicator cones in R² with a
            // random admissible multiplier at the apex
            #[test]
            fn indicator_formula_matches_oracle(
                rows in prop::collection::vec((-2i64..=2, -2i64..=2), 1..4),
                pick in 0usize..4,
            ) {
                let hrows: Vec<HRow> = rows
                    .iter()
                    .filter(|(a, b)| *a != 0 || *b != 0)
                    .map(|(a, b)| HRow::le(rv(&[*a, *b]), rat(0)))
                    .collect();
                prop_assume!(!hrows.is_empty());
                let z = Polyhedron::new(2, hrows);
                let theta = PLQFunction::indicator(z.clone()).unwrap();
                // multiplier: a generator of the polar cone, or zero
                let polar = PolyCone::try_from_polyhedron(z.clone()).unwrap().polar();
                let (prays, plin) = polar.generators();
                let mut candidates = vec![RatVector::zeros(2)];
                candidates.extend(prays);
                candidates.extend(plin);
                let vbar = candidates[pick % candidates.len()].clone();
                let zbar = RatVector::zeros(2);

                let sys = crate::soc::soc_system(&theta, &zbar, &vbar).unwrap();
                let oracle = GraphOracle::new(&theta, &zbar, &vbar).unwrap();
                for u in crate::catalog::probe_directions(2) {
                    let lhs = sys.value(&u).unwrap();
                    let rhs = oracle.soc_value(&u).unwrap();
                    prop_assert!(lhs.set_eq(&rhs), "direction {:?}", u);
                }
            }

            // formula vs brute force on random support-PLQ instances with a
            // random PSD curvature g·gᵀ + diag, at a constructed graph point
            #[test]
            fn maj_formula_matches_oracle(
                cuts in prop::collection::vec((-2i64..=2, -2i64..=2, 0i64..=1), 0..3),
                g in (-1i64..=1, -1i64..=1),
                diag in (0i64..=1, 0i64..=1),
                pick in 0usize..6,
            ) {
                // C: the box [-1,1]² with extra cuts through the interior
                let mut rows = vec![
                    HRow::le(rv(&[1, 0]), rat(1)),
                    HRow::le(rv(&[-1, 0]), rat(1)),
                    HRow::le(rv(&[0, 1]), rat(1)),
                    HRow::le(rv(&[0, -1]), rat(1)),
                ];
                for (a, b, c) in cuts {
                    if a != 0 || b != 0 {
                        rows.push(HRow::le(rv(&[a, b]), rat(c)));
                    }
                }
                let cset = Polyhedron::new(2, rows);
                prop_assume!(!cset.is_empty());
                // Q = g gᵀ + diag(d₁, d₂): symmetric PSD by construction
                let gv = rv(&[g.0, g.1]);
                let mut q = crate::linalg::RatMatrix::zeros(2, 2);
                for i in 0..2 {
                    for j in 0..2 {
                        q.set(i, j, gv.0[i].clone() * &gv.0[j]);
                    }
                }
                q.set(0, 0, q.at(0, 0) + rat(diag.0));
                q.set(1, 1, q.at(1, 1) + rat(diag.1));
                let theta = PLQFunction::support_plq(cset.clone(), q.clone()).unwrap();
                // graph point: pick v̄ on C, then z̄ = Qv̄ + n for a normal
                // generator n at v̄ (so z̄ - Qv̄ ∈ N_C(v̄) by construction)
                let vertices = cset.vrep().vertices.clone();
                let vbar = vertices[pick % vertices.len()].clone();
                let ncone = cset.normal_cone(&vbar).unwrap();
                let (nrays, _) = ncone.generators();
                let n = nrays
                    .get(pick % (nrays.len() + 1))
                    .cloned()
                    .unwrap_or_else(|| RatVector::zeros(2));
                let zbar = &q.mul_vec(&vbar) + &n;

                let sys = crate::soc::soc_system(&theta, &zbar, &vbar).unwrap();
                let oracle = GraphOracle::new(&theta, &zbar, &vbar).unwrap();
                for u in crate::catalog::probe_directions(2) {
                    let lhs = sys.value(&u).unwrap();
                    let rhs = oracle.soc_value(&u).unwrap();
                    prop_assert!(lhs.set_eq(&rhs), "direction {:?}", u);
                }
            }
        }
    }
}
