//! The supported outer function classes: polyhedral indicators δ_Z and
//! support-type piecewise linear-quadratic functions
//! θ(z) = sup_{v∈C} { <v,z> - ½<v,Qv> } with C polyhedral and Q symmetric PSD
//! (convex piecewise linear when Q = 0).

use crate::linalg::{psd_check, RatMatrix, RatVector};
use crate::poly::{HRow, PolyCone, Polyhedron, Subspace, VRep};
use crate::rat::{rat, zero, Rat};
use crate::{Error, Result};
use std::cmp::Ordering;
use std::fmt;

/// Extended real value: finite rational or +∞.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtendedReal {
    Finite(Rat),
    PlusInfinity,
}

impl ExtendedReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(&self) -> Option<&Rat> {
        match self {
            ExtendedReal::Finite(x) => Some(x),
            ExtendedReal::PlusInfinity => None,
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(match (self, other) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => a.cmp(b),
            (ExtendedReal::Finite(_), ExtendedReal::PlusInfinity) => Ordering::Less,
            (ExtendedReal::PlusInfinity, ExtendedReal::Finite(_)) => Ordering::Greater,
            (ExtendedReal::PlusInfinity, ExtendedReal::PlusInfinity) => Ordering::Equal,
        })
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(x) => write!(f, "{x}"),
            ExtendedReal::PlusInfinity => write!(f, "+inf"),
        }
    }
}

/// A supported outer function θ.
#[derive(Clone, Debug)]
pub enum PLQFunction {
    /// δ_Z for a nonempty polyhedron Z.
    Indicator(Polyhedron),
    /// θ(z) = sup_{v∈C} { <v,z> - ½<v,Qv> }, C nonempty polyhedral, Q sym PSD.
    SupportPLQ { c: Polyhedron, q: RatMatrix },
}

impl PLQFunction {
    pub fn indicator(z: Polyhedron) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(PLQFunction::Indicator(z))
    }

    pub fn support_plq(c: Polyhedron, q: RatMatrix) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::EmptySet);
        }
        if q.nrows() != c.ambient_dim() || q.ncols() != c.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: c.ambient_dim(),
                got: q.nrows(),
            });
        }
        if !q.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        if !psd_check(&q)?.is_psd() {
            return Err(Error::NotPsd);
        }
        Ok(PLQFunction::SupportPLQ { c, q })
    }

    /// Support function of a polyhedral set (Q = 0).
    pub fn support_function(c: Polyhedron) -> Result<Self> {
        let m = c.ambient_dim();
        Self::support_plq(c, RatMatrix::zeros(m, m))
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            PLQFunction::Indicator(z) => z.ambient_dim(),
            PLQFunction::SupportPLQ { c, .. } => c.ambient_dim(),
        }
    }

    fn check_dim(&self, z: &RatVector) -> Result<()> {
        if z.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: z.len(),
            });
        }
        Ok(())
    }

    /// Effective domain as a polyhedron: Z for the indicator, the polar of
    /// rec(C) ∩ ker Q for the support class.
    pub fn domain(&self) -> Polyhedron {
        match self {
            PLQFunction::Indicator(z) => z.clone(),
            PLQFunction::SupportPLQ { c, q } => flat_recession_cone(c, q).polar().into_polyhedron(),
        }
    }

    /// Exact evaluation. For the support class the supremum is computed by
    /// restricting to each closed face of C, intersecting with the
    /// stationarity equations of the concave objective there, and comparing
    /// the attained values.
    pub fn evaluate(&self, z: &RatVector) -> Result<ExtendedReal> {
        self.check_dim(z)?;
        match self {
            PLQFunction::Indicator(set) => Ok(if set.contains_point(z) {
                ExtendedReal::Finite(zero())
            } else {
                ExtendedReal::PlusInfinity
            }),
            PLQFunction::SupportPLQ { c, q } => {
                if !self.domain().contains_point(z) {
                    return Ok(ExtendedReal::PlusInfinity);
                }
                let objective = |v: &RatVector| -> Rat { v.dot(z) - q.quad_form(v, v) / rat(2) };
                let mut best: Option<Rat> = None;
                for face in c.faces()? {
                    let Some(g) = stationary_slice(&face, q, z) else {
                        continue;
                    };
                    let v = g.rel_interior_point()?;
                    let val = objective(&v);
                    if best.as_ref().map_or(true, |b| val > *b) {
                        best = Some(val);
                    }
                }
                // vertices are zero-dimensional faces, already covered; a
                // nonempty C in dom θ always yields at least one candidate
                let val = best.ok_or(Error::EmptySet)?;
                Ok(ExtendedReal::Finite(val))
            }
        }
    }

    /// First-order subdifferential ∂θ(z) as a polyhedron. For the indicator
    /// this is the normal cone; for the support class it is the argmax set
    /// {v ∈ C : z - Qv ∈ N_C(v)}, assembled face-wise (it is convex).
    pub fn subdifferential(&self, z: &RatVector) -> Result<Polyhedron> {
        self.check_dim(z)?;
        if !self.domain().contains_point(z) {
            return Err(Error::OutsideDomain);
        }
        match self {
            PLQFunction::Indicator(set) => Ok(set.normal_cone(z)?.into_polyhedron()),
            PLQFunction::SupportPLQ { c, q } => {
                let m = c.ambient_dim();
                let mut vertices = Vec::new();
                let mut rays = Vec::new();
                let mut lineality = Vec::new();
                for face in c.faces()? {
                    let x = face.rel_interior_point()?;
                    let nf = c.normal_cone(&x)?;
                    // piece = face ∩ {v : z - Qv ∈ N_F}
                    let mut rows = face.rows().to_vec();
                    for r in nf.as_polyhedron().rows() {
                        // <s, z - Qv> ≤ 0  ⟺  <-Qs, v> ≤ -<s, z>
                        let a = -&q.mul_vec(&r.a);
                        let b = -r.a.dot(z);
                        rows.push(HRow { a, rel: r.rel, b });
                    }
                    let piece = Polyhedron::new(m, rows);
                    let v = piece.vrep();
                    if v.is_empty() {
                        continue;
                    }
                    vertices.extend(v.vertices.iter().cloned());
                    rays.extend(v.rays.iter().cloned());
                    lineality.extend(v.lineality.iter().cloned());
                }
                if vertices.is_empty() {
                    return Err(Error::NotSubgradient);
                }
                vertices.sort();
                vertices.dedup();
                Ok(Polyhedron::from_generators(
                    m,
                    &VRep {
                        vertices,
                        rays,
                        lineality,
                    },
                ))
            }
        }
    }

    /// Singular subdifferential ∂^∞θ(z): the normal cone to dom θ at z.
    pub fn singular_subdifferential(&self, z: &RatVector) -> Result<PolyCone> {
        self.check_dim(z)?;
        let dom = self.domain();
        if !dom.contains_point(z) {
            return Err(Error::OutsideDomain);
        }
        dom.normal_cone(z)
    }

    /// Direction space of aff ∂θ(z) — the subspace S(z) of the local
    /// reduction lemma.
    pub fn affine_hull_direction_space(&self, z: &RatVector) -> Result<Subspace> {
        self.subdifferential(z)?.affine_hull_directions()
    }

    /// Membership v ∈ ∂θ(z) without materializing the subdifferential:
    /// for the support class this is the conjugate relation z - Qv ∈ N_C(v).
    pub fn is_subgradient(&self, z: &RatVector, v: &RatVector) -> Result<bool> {
        self.check_dim(z)?;
        self.check_dim(v)?;
        match self {
            PLQFunction::Indicator(set) => {
                if !set.contains_point(z) {
                    return Err(Error::OutsideDomain);
                }
                Ok(set.normal_cone(z)?.contains_point(v))
            }
            PLQFunction::SupportPLQ { c, q } => {
                if !c.contains_point(v) {
                    return Ok(false);
                }
                let p = z - &q.mul_vec(v);
                Ok(c.normal_cone(v)?.contains_point(&p))
            }
        }
    }
}

/// rec(C) ∩ ker Q: the directions along which the support objective is flat.
pub fn flat_recession_cone(c: &Polyhedron, q: &RatMatrix) -> PolyCone {
    let m = c.ambient_dim();
    let mut rows: Vec<HRow> = c
        .rows()
        .iter()
        .map(|r| HRow {
            a: r.a.clone(),
            rel: r.rel,
            b: zero(),
        })
        .collect();
    for i in 0..m {
        let row = q.row(i);
        if !row.is_zero() {
            rows.push(HRow::eq(row, zero()));
        }
    }
    PolyCone::from_rows(m, rows)
}

/// F ∩ {v : B^T (z - Qv) = 0} where B spans the direction space of aff(F);
/// None when the slice is empty.
fn stationary_slice(face: &Polyhedron, q: &RatMatrix, z: &RatVector) -> Option<Polyhedron> {
    let m = face.ambient_dim();
    let dirs = face.affine_hull_directions().ok()?;
    let mut rows = face.rows().to_vec();
    for b in dirs.basis() {
        // <b, z - Qv> = 0  ⟺  <Qb, v> = <b, z>
        rows.push(HRow::eq(q.mul_vec(b), b.dot(z)));
    }
    let g = Polyhedron::new(m, rows);
    if g.is_empty() {
        None
    } else {
        Some(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{nonneg_orthant, nonpos_orthant, unit_simplex};
    use crate::rat::ratio;
    use num::Signed;

    fn sigma_m4() -> PLQFunction {
        PLQFunction::support_function(unit_simplex(4)).unwrap()
    }

    /// The ℓ¹ ball in R².
    fn ell1_ball() -> Polyhedron {
        let mut rows = Vec::new();
        for sx in [1i64, -1] {
            for sy in [1i64, -1] {
                rows.push(HRow::le(RatVector::from_i64(&[sx, sy]), rat(1)));
            }
        }
        Polyhedron::new(2, rows)
    }

    #[test]
    fn construction_rejects_bad_q() {
        let c = unit_simplex(2);
        let not_sym = RatMatrix::from_i64(&[&[0, 1], &[0, 0]]);
        assert!(matches!(
            PLQFunction::support_plq(c.clone(), not_sym),
            Err(Error::NotSymmetric)
        ));
        let not_psd = RatMatrix::from_i64(&[&[1, 0], &[0, -1]]);
        assert!(matches!(
            PLQFunction::support_plq(c, not_psd),
            Err(Error::NotPsd)
        ));
        assert!(matches!(
            PLQFunction::indicator(Polyhedron::new(
                1,
                vec![HRow::le(RatVector::from_i64(&[0]), rat(-1))]
            )),
            Err(Error::EmptySet)
        ));
    }

    #[test]
    fn evaluate_examples() {
        // max of coordinates
        let theta = sigma_m4();
        let v = theta.evaluate(&RatVector::from_i64(&[1, 2, 3, 0])).unwrap();
        assert_eq!(v, ExtendedReal::Finite(rat(3)));

        // indicator
        let delta = PLQFunction::indicator(nonpos_orthant(2).into_polyhedron()).unwrap();
        assert_eq!(
            delta.evaluate(&RatVector::from_i64(&[-1, 0])).unwrap(),
            ExtendedReal::Finite(rat(0))
        );
        assert_eq!(
            delta.evaluate(&RatVector::from_i64(&[1, 0])).unwrap(),
            ExtendedReal::PlusInfinity
        );

        // huber-style: C = [0,1], Q = (1), z = 2 → 3/2 at v = 1
        let c = Polyhedron::new(
            1,
            vec![
                HRow::le(RatVector::from_i64(&[-1]), rat(0)),
                HRow::le(RatVector::from_i64(&[1]), rat(1)),
            ],
        );
        let theta = PLQFunction::support_plq(c, RatMatrix::identity(1)).unwrap();
        assert_eq!(
            theta.evaluate(&RatVector::from_i64(&[2])).unwrap(),
            ExtendedReal::Finite(ratio(3, 2))
        );
        // interior of the quadratic zone: z = 1/2 → z²/2 = 1/8
        assert_eq!(
            theta.evaluate(&RatVector(vec![ratio(1, 2)])).unwrap(),
            ExtendedReal::Finite(ratio(1, 8))
        );
    }

    #[test]
    fn subdifferential_examples() {
        // σ_M at 0: the whole simplex
        let theta = sigma_m4();
        let sub = theta.subdifferential(&RatVector::zeros(4)).unwrap();
        assert!(sub.set_eq(&unit_simplex(4)));

        // δ at the corner: the polar orthant
        let delta = PLQFunction::indicator(nonpos_orthant(2).into_polyhedron()).unwrap();
        let sub = delta.subdifferential(&RatVector::zeros(2)).unwrap();
        assert!(sub.set_eq(nonneg_orthant(2).as_polyhedron()));

        // φ = σ_B at 0: ∂φ(0) = B
        let phi = PLQFunction::support_function(ell1_ball()).unwrap();
        let sub = phi.subdifferential(&RatVector::zeros(2)).unwrap();
        assert!(sub.set_eq(&ell1_ball()));

        // outside the domain is an error
        let theta = PLQFunction::support_function(nonneg_orthant(1).into_polyhedron()).unwrap();
        assert!(matches!(
            theta.subdifferential(&RatVector::from_i64(&[1])),
            Err(Error::OutsideDomain)
        ));
    }

    #[test]
    fn singular_subdifferential_examples() {
        let theta = sigma_m4();
        let s = theta
            .singular_subdifferential(&RatVector::zeros(4))
            .unwrap();
        assert!(s.is_zero_cone());

        let delta = PLQFunction::indicator(nonpos_orthant(1).into_polyhedron()).unwrap();
        let s = delta
            .singular_subdifferential(&RatVector::zeros(1))
            .unwrap();
        assert!(s.set_eq(&nonneg_orthant(1)));

        // θ = σ_{R₊} ⊂ R: dom θ = R₋, singular at 0 is R₊
        let theta = PLQFunction::support_function(nonneg_orthant(1).into_polyhedron()).unwrap();
        assert!(theta.domain().set_eq(nonpos_orthant(1).as_polyhedron()));
        let s = theta
            .singular_subdifferential(&RatVector::zeros(1))
            .unwrap();
        assert!(s.set_eq(&nonneg_orthant(1)));
    }

    #[test]
    fn domain_examples() {
        let delta = PLQFunction::indicator(unit_simplex(3)).unwrap();
        assert!(delta.domain().set_eq(&unit_simplex(3)));
        assert!(sigma_m4().domain().set_eq(&Polyhedron::space(4)));
    }

    #[test]
    fn affine_hull_direction_space_examples() {
        let theta = sigma_m4();
        let s = theta
            .affine_hull_direction_space(&RatVector::zeros(4))
            .unwrap();
        assert_eq!(s.rank(), 3);
        assert!(s.contains(&RatVector::from_i64(&[1, -1, 0, 0])));
        assert!(!s.contains(&RatVector::from_i64(&[1, 0, 0, 0])));

        // singleton subdifferential → {0}
        let c = Polyhedron::point(&RatVector::from_i64(&[2, 1]));
        let affine = PLQFunction::support_function(c).unwrap();
        let s = affine
            .affine_hull_direction_space(&RatVector::from_i64(&[5, 5]))
            .unwrap();
        assert!(s.is_zero());

        // δ_{R²₋} at 0: aff R²₊ = R²
        let delta = PLQFunction::indicator(nonpos_orthant(2).into_polyhedron()).unwrap();
        let s = delta
            .affine_hull_direction_space(&RatVector::zeros(2))
            .unwrap();
        assert_eq!(s.rank(), 2);
    }

    #[test]
    fn conjugacy_and_fenchel_young() {
        // v ∈ ∂θ(z) ⟺ z - Qv ∈ N_C(v), and the Fenchel-Young equality holds
        // for returned subgradients.
        let c = Polyhedron::new(
            1,
            vec![
                HRow::le(RatVector::from_i64(&[-1]), rat(0)),
                HRow::le(RatVector::from_i64(&[1]), rat(1)),
            ],
        );
        let q = RatMatrix::identity(1);
        let theta = PLQFunction::support_plq(c.clone(), q.clone()).unwrap();
        for zi in -3..=3 {
            let z = RatVector(vec![ratio(zi, 2)]);
            let sub = theta.subdifferential(&z).unwrap();
            let value = theta.evaluate(&z).unwrap();
            for v in &sub.vrep().vertices {
                assert!(theta.is_subgradient(&z, v).unwrap());
                let fy = v.dot(&z) - q.quad_form(v, v) / rat(2);
                assert_eq!(value, ExtendedReal::Finite(fy));
            }
            // grid check of the equivalence
            for vi in -2..=4 {
                let v = RatVector(vec![ratio(vi, 2)]);
                let member = sub.contains_point(&v);
                let conj = theta.is_subgradient(&z, &v).unwrap();
                assert_eq!(member, conj, "z={zi}/2 v={vi}/2");
            }
        }
    }

    #[test]
    fn subdifferential_monotonicity() {
        let theta = sigma_m4();
        let pts = [
            RatVector::from_i64(&[0, 0, 0, 0]),
            RatVector::from_i64(&[1, 0, 0, 0]),
            RatVector::from_i64(&[1, 2, 0, -1]),
            RatVector::from_i64(&[-1, -1, 2, 0]),
        ];
        for z1 in &pts {
            for z2 in &pts {
                let s1 = theta.subdifferential(z1).unwrap();
                let s2 = theta.subdifferential(z2).unwrap();
                for v1 in &s1.vrep().vertices {
                    for v2 in &s2.vrep().vertices {
                        let d = (v1 - v2).dot(&(z1 - z2));
                        assert!(!d.is_negative(), "monotonicity violated");
                    }
                }
            }
        }
    }

    #[test]
    fn singular_zero_iff_locally_lipschitz() {
        // full-dimensional domain with interior point → {0}
        let theta = PLQFunction::support_function(nonneg_orthant(1).into_polyhedron()).unwrap();
        let interior = RatVector::from_i64(&[-1]);
        assert!(theta
            .singular_subdifferential(&interior)
            .unwrap()
            .is_zero_cone());
        // boundary point → nontrivial
        assert!(!theta
            .singular_subdifferential(&RatVector::zeros(1))
            .unwrap()
            .is_zero_cone());
    }

    #[test]
    fn unbounded_c_with_curvature() {
        // θ = sup_{v≥0}(vz - v²/2) = (max(z,0))²/2
        let theta =
            PLQFunction::support_plq(nonneg_orthant(1).into_polyhedron(), RatMatrix::identity(1))
                .unwrap();
        assert!(theta.domain().set_eq(&Polyhedron::space(1)));
        assert_eq!(
            theta.evaluate(&RatVector::from_i64(&[2])).unwrap(),
            ExtendedReal::Finite(rat(2))
        );
        assert_eq!(
            theta.evaluate(&RatVector::from_i64(&[-3])).unwrap(),
            ExtendedReal::Finite(rat(0))
        );
        // subgradients: θ'(2) = 2, θ'(-3) = 0
        let s = theta.subdifferential(&RatVector::from_i64(&[2])).unwrap();
        assert!(s.set_eq(&Polyhedron::point(&RatVector::from_i64(&[2]))));
        let s = theta.subdifferential(&RatVector::from_i64(&[-3])).unwrap();
        assert!(s.set_eq(&Polyhedron::point(&RatVector::from_i64(&[0]))));
    }

    mod random_support_eval {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            // σ_C evaluation by face-wise stationarity against the
            // independent vertex maximum, on random bounded polytopes
            #[test]
            fn support_value_matches_vertex_max(
                cuts in prop::collection::vec((-2i64..=2, -2i64..=2, 0i64..=2), 0..4),
                z in (-3i64..=3, -3i64..=3),
            ) {
                // start from the box [-1,1]² so C is never empty or unbounded
                let mut rows = vec![
                    HRow::le(RatVector::from_i64(&[1, 0]), rat(1)),
                    HRow::le(RatVector::from_i64(&[-1, 0]), rat(1)),
                    HRow::le(RatVector::from_i64(&[0, 1]), rat(1)),
                    HRow::le(RatVector::from_i64(&[0, -1]), rat(1)),
                ];
                for (a, b, c) in cuts {
                    if a != 0 || b != 0 {
                        rows.push(HRow::le(RatVector::from_i64(&[a, b]), rat(c)));
                    }
                }
                let cset = Polyhedron::new(2, rows);
                prop_assume!(!cset.is_empty());
                let theta = PLQFunction::support_function(cset.clone()).unwrap();
                let zv = RatVector::from_i64(&[z.0, z.1]);
                let value = theta.evaluate(&zv).unwrap();
                let best = cset
                    .vrep()
                    .vertices
                    .iter()
                    .map(|v| v.dot(&zv))
                    .max()
                    .expect("nonempty polytope has vertices");
                prop_assert_eq!(value, ExtendedReal::Finite(best));
            }
        }
    }
}
