//! Convex polyhedra and polyhedral cones with dual (H/V) representations.
//!
//! The workhorse is a double-description converter over the rationals.
//! Everything else — polarity, tangent/normal/critical cones, closed faces,
//! relative-interior points, set comparisons — reduces to it.

use crate::linalg::{nullspace, rank, span_basis, RatMatrix, RatVector};
use crate::rat::{rat, sign, zero, Rat};
use crate::{Error, Result};
use num::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

/// Relation of an H-representation row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rel {
    Le,
    Eq,
}

/// One H-representation row: <a, x> ≤ b or <a, x> = b.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct HRow {
    pub a: RatVector,
    pub rel: Rel,
    pub b: Rat,
}

impl HRow {
    pub fn le(a: RatVector, b: Rat) -> Self {
        HRow { a, rel: Rel::Le, b }
    }

    pub fn eq(a: RatVector, b: Rat) -> Self {
        HRow { a, rel: Rel::Eq, b }
    }

    pub fn holds_at(&self, x: &RatVector) -> bool {
        let v = self.a.dot(x);
        match self.rel {
            Rel::Le => v <= self.b,
            Rel::Eq => v == self.b,
        }
    }

    pub fn tight_at(&self, x: &RatVector) -> bool {
        self.a.dot(x) == self.b
    }

    /// Recession version: does the ray direction satisfy the row?
    pub fn holds_for_ray(&self, r: &RatVector) -> bool {
        let v = self.a.dot(r);
        match self.rel {
            Rel::Le => !v.is_positive(),
            Rel::Eq => v.is_zero(),
        }
    }

    pub fn holds_for_lineality(&self, l: &RatVector) -> bool {
        self.a.dot(l).is_zero()
    }

    /// Primitive-scaled copy; equality rows get a canonical sign.
    fn normalized(&self) -> HRow {
        let joint = self.a.concat(&RatVector(vec![self.b.clone()])).primitive();
        let n = self.a.len();
        let mut a = RatVector(joint.0[..n].to_vec());
        let mut b = joint.0[n].clone();
        if self.rel == Rel::Eq {
            let s = a.0.iter().chain(std::iter::once(&b)).find(|x| !x.is_zero());
            if let Some(x) = s {
                if x.is_negative() {
                    a = -&a;
                    b = -b;
                }
            }
        }
        HRow {
            a,
            rel: self.rel,
            b,
        }
    }
}

/// Generator representation: conv(vertices) + cone(rays) + span(lineality).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VRep {
    pub vertices: Vec<RatVector>,
    pub rays: Vec<RatVector>,
    pub lineality: Vec<RatVector>,
}

impl VRep {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// A convex polyhedron in H-representation with lazily cached V-representation
/// and canonical (irredundant) H-representation.
#[derive(Debug)]
pub struct Polyhedron {
    dim: usize,
    rows: Vec<HRow>,
    vrep: OnceLock<VRep>,
    canon: OnceLock<Vec<HRow>>,
}

impl Clone for Polyhedron {
    fn clone(&self) -> Self {
        let p = Polyhedron {
            dim: self.dim,
            rows: self.rows.clone(),
            vrep: OnceLock::new(),
            canon: OnceLock::new(),
        };
        if let Some(v) = self.vrep.get() {
            let _ = p.vrep.set(v.clone());
        }
        if let Some(c) = self.canon.get() {
            let _ = p.canon.set(c.clone());
        }
        p
    }
}

impl PartialEq for Polyhedron {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.rows == other.rows
    }
}
impl Eq for Polyhedron {}

/// Face-enumeration budget, read once from SO2_MAX_FACES (default 4096).
pub fn face_budget() -> u128 {
    static BUDGET: OnceLock<u128> = OnceLock::new();
    *BUDGET.get_or_init(|| {
        std::env::var("SO2_MAX_FACES")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(4096)
    })
}

impl Polyhedron {
    pub fn new(dim: usize, rows: Vec<HRow>) -> Self {
        for r in &rows {
            assert_eq!(r.a.len(), dim, "H-row dimension mismatch");
        }
        Polyhedron {
            dim,
            rows,
            vrep: OnceLock::new(),
            canon: OnceLock::new(),
        }
    }

    /// The whole space.
    pub fn space(dim: usize) -> Self {
        Polyhedron::new(dim, vec![])
    }

    /// A single point.
    pub fn point(x: &RatVector) -> Self {
        let dim = x.len();
        let rows = (0..dim)
            .map(|i| HRow::eq(RatVector::unit(dim, i), x.0[i].clone()))
            .collect();
        Polyhedron::new(dim, rows)
    }

    pub fn from_generators(dim: usize, vrep: &VRep) -> Self {
        let rows = v_to_h(dim, vrep);
        let p = Polyhedron::new(dim, rows);
        let _ = p.vrep.set(vrep.clone());
        p
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[HRow] {
        &self.rows
    }

    pub fn vrep(&self) -> &VRep {
        self.vrep.get_or_init(|| {
            // homogenize: (a | -b) over (x, t), plus t >= 0
            let hdim = self.dim + 1;
            let mut rows: Vec<(RatVector, Rel)> = Vec::with_capacity(self.rows.len() + 1);
            for r in &self.rows {
                let mut a = r.a.0.clone();
                a.push(-r.b.clone());
                rows.push((RatVector(a), r.rel));
            }
            let mut tpos = RatVector::zeros(hdim);
            tpos.0[self.dim] = rat(-1);
            rows.push((tpos, Rel::Le)); // -t <= 0
            let (rays, lineality) = cone_dd(hdim, &rows);
            let mut vertices = Vec::new();
            let mut prays = Vec::new();
            for r in rays {
                let t = r.0[self.dim].clone();
                let x = RatVector(r.0[..self.dim].to_vec());
                if t.is_zero() {
                    prays.push(x.primitive());
                } else {
                    vertices.push(x.scale(&(rat(1) / t)));
                }
            }
            let lin: Vec<RatVector> = lineality
                .iter()
                .map(|l| RatVector(l.0[..self.dim].to_vec()))
                .collect();
            vertices.sort();
            vertices.dedup();
            prays.sort();
            prays.dedup();
            VRep {
                vertices,
                rays: prays,
                lineality: span_basis(&lin, self.dim),
            }
        })
    }

    pub fn is_empty(&self) -> bool {
        self.vrep().is_empty()
    }

    pub fn contains_point(&self, x: &RatVector) -> bool {
        x.len() == self.dim && self.rows.iter().all(|r| r.holds_at(x))
    }

    /// Irredundant H-representation derived from the generators; deterministic.
    pub fn canonical_rows(&self) -> &[HRow] {
        self.canon.get_or_init(|| {
            let v = self.vrep();
            if v.is_empty() {
                // canonical empty set
                return vec![HRow::le(RatVector::zeros(self.dim), rat(-1))];
            }
            let mut rows = v_to_h(self.dim, v);
            rows = rows
                .into_iter()
                .map(|r| r.normalized())
                .filter(|r| !(r.a.is_zero() && (r.rel == Rel::Le && !r.b.is_negative())))
                .filter(|r| !(r.a.is_zero() && r.rel == Rel::Eq && r.b.is_zero()))
                .collect();
            rows.sort();
            rows.dedup();
            rows
        })
    }

    /// P ∩ Q by concatenating rows.
    pub fn intersect(&self, other: &Polyhedron) -> Polyhedron {
        assert_eq!(self.dim, other.dim);
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Polyhedron::new(self.dim, rows)
    }

    /// Is self a subset of other? Decided by checking self's generators
    /// against other's rows.
    pub fn subset_of(&self, other: &Polyhedron) -> bool {
        assert_eq!(self.dim, other.dim);
        let v = self.vrep();
        if v.is_empty() {
            return true;
        }
        for vert in &v.vertices {
            if !other.rows.iter().all(|r| r.holds_at(vert)) {
                return false;
            }
        }
        for ray in &v.rays {
            if !other.rows.iter().all(|r| r.holds_for_ray(ray)) {
                return false;
            }
        }
        for l in &v.lineality {
            if !other.rows.iter().all(|r| r.holds_for_lineality(l)) {
                return false;
            }
        }
        true
    }

    /// Set equality by double inclusion.
    pub fn set_eq(&self, other: &Polyhedron) -> bool {
        self.subset_of(other) && other.subset_of(self)
    }

    /// Image under the affine map x ↦ Mx + t, computed on generators.
    pub fn affine_image(&self, m: &RatMatrix, t: &RatVector) -> Polyhedron {
        assert_eq!(m.ncols(), self.dim);
        assert_eq!(m.nrows(), t.len());
        let v = self.vrep();
        if v.is_empty() {
            return Polyhedron::new(
                m.nrows(),
                vec![HRow::le(RatVector::zeros(m.nrows()), rat(-1))],
            );
        }
        let vertices: Vec<RatVector> = v.vertices.iter().map(|x| &m.mul_vec(x) + t).collect();
        let rays: Vec<RatVector> = v
            .rays
            .iter()
            .map(|x| m.mul_vec(x))
            .filter(|x| !x.is_zero())
            .collect();
        let lineality: Vec<RatVector> = v
            .lineality
            .iter()
            .map(|x| m.mul_vec(x))
            .filter(|x| !x.is_zero())
            .collect();
        Polyhedron::from_generators(
            m.nrows(),
            &VRep {
                vertices,
                rays,
                lineality,
            },
        )
    }

    /// Tangent cone at a point of the polyhedron: active rows made homogeneous.
    pub fn tangent_cone(&self, x: &RatVector) -> Result<PolyCone> {
        if !self.contains_point(x) {
            return Err(Error::PointNotInSet);
        }
        let mut rows = Vec::new();
        for r in &self.rows {
            match r.rel {
                Rel::Eq => rows.push(HRow::eq(r.a.clone(), zero())),
                Rel::Le => {
                    if r.tight_at(x) {
                        rows.push(HRow::le(r.a.clone(), zero()));
                    }
                }
            }
        }
        Ok(PolyCone::from_rows(self.dim, rows))
    }

    /// Normal cone at a point: polar of the tangent cone. For convex polyhedra
    /// this is the basic normal cone.
    pub fn normal_cone(&self, x: &RatVector) -> Result<PolyCone> {
        Ok(self.tangent_cone(x)?.polar())
    }

    /// Critical cone K(x, p) = T(x) ∩ p⊥; p must lie in the normal cone at x.
    pub fn critical_cone(&self, x: &RatVector, p: &RatVector) -> Result<PolyCone> {
        let t = self.tangent_cone(x)?;
        if !self.normal_cone(x)?.contains_point(p) {
            return Err(Error::NotNormal);
        }
        let mut rows = t.as_polyhedron().rows().to_vec();
        rows.push(HRow::eq(p.clone(), zero()));
        Ok(PolyCone::from_rows(self.dim, rows))
    }

    /// A rational point in the relative interior: vertex average plus the sum
    /// of the (primitive) extreme rays. Deterministic.
    pub fn rel_interior_point(&self) -> Result<RatVector> {
        let v = self.vrep();
        if v.is_empty() {
            return Err(Error::EmptySet);
        }
        let n = rat(v.vertices.len() as i64);
        let mut p = RatVector::zeros(self.dim);
        for vert in &v.vertices {
            p = &p + vert;
        }
        p = p.scale(&(rat(1) / n));
        for ray in &v.rays {
            p = &p + ray;
        }
        Ok(p)
    }

    /// All nonempty closed faces (including the polyhedron itself), obtained
    /// by flipping subsets of the irredundant inequality rows to equalities.
    /// Deduplicated by the full tight set. Aborts when the subset count
    /// exceeds the face budget.
    pub fn faces(&self) -> Result<Vec<Polyhedron>> {
        let canon = self.canonical_rows().to_vec();
        if self.is_empty() {
            return Ok(vec![]);
        }
        let ineq_idx: Vec<usize> = canon
            .iter()
            .enumerate()
            .filter(|(_, r)| r.rel == Rel::Le)
            .map(|(i, _)| i)
            .collect();
        let needed: u128 = 1u128
            .checked_shl(ineq_idx.len() as u32)
            .ok_or(Error::FaceBudget {
                needed: u128::MAX,
                cap: face_budget(),
            })?;
        if needed > face_budget() {
            return Err(Error::FaceBudget {
                needed,
                cap: face_budget(),
            });
        }
        let mut seen: BTreeMap<Vec<bool>, Polyhedron> = BTreeMap::new();
        // depth-first over inclusion of each inequality, pruning empty branches
        let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, vec![])];
        while let Some((next, chosen)) = stack.pop() {
            if next == ineq_idx.len() {
                let mut rows = canon.clone();
                for &i in &chosen {
                    rows[i] = HRow::eq(rows[i].a.clone(), rows[i].b.clone());
                }
                let f = Polyhedron::new(self.dim, rows);
                if f.is_empty() {
                    continue;
                }
                let key: Vec<bool> = ineq_idx
                    .iter()
                    .map(|&i| row_tight_on(&canon[i], &f))
                    .collect();
                seen.entry(key).or_insert(f);
                continue;
            }
            // prune: if the current partial equality set is already empty, stop
            if !chosen.is_empty() {
                let mut rows = canon.clone();
                for &i in &chosen {
                    rows[i] = HRow::eq(rows[i].a.clone(), rows[i].b.clone());
                }
                if Polyhedron::new(self.dim, rows).is_empty() {
                    continue;
                }
            }
            let mut with = chosen.clone();
            with.push(ineq_idx[next]);
            stack.push((next + 1, chosen));
            stack.push((next + 1, with));
        }
        Ok(seen.into_values().collect())
    }

    /// Direction space of the affine hull: span of (v_i - v_0), rays, lineality.
    pub fn affine_hull_directions(&self) -> Result<Subspace> {
        let v = self.vrep();
        if v.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut dirs: Vec<RatVector> = Vec::new();
        let v0 = &v.vertices[0];
        for vert in v.vertices.iter().skip(1) {
            dirs.push(vert - v0);
        }
        dirs.extend(v.rays.iter().cloned());
        dirs.extend(v.lineality.iter().cloned());
        Ok(Subspace::from_vectors(&dirs, self.dim))
    }
}

fn row_tight_on(row: &HRow, f: &Polyhedron) -> bool {
    let v = f.vrep();
    v.vertices.iter().all(|x| row.tight_at(x))
        && v.rays.iter().all(|r| row.a.dot(r).is_zero())
        && v.lineality.iter().all(|l| row.a.dot(l).is_zero())
}

/// A polyhedral cone: a polyhedron whose rows all have zero offset.
/// Always nonempty (contains the origin).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyCone(Polyhedron);

impl PolyCone {
    pub fn from_rows(dim: usize, rows: Vec<HRow>) -> Self {
        for r in &rows {
            assert!(r.b.is_zero(), "cone rows must have zero offset");
        }
        PolyCone(Polyhedron::new(dim, rows))
    }

    pub fn try_from_polyhedron(p: Polyhedron) -> Result<Self> {
        if p.rows().iter().any(|r| !r.b.is_zero()) {
            return Err(Error::parse("cone", "nonzero offset in cone row"));
        }
        Ok(PolyCone(p))
    }

    /// Cone generated by rays and lineality directions.
    pub fn from_generators(dim: usize, rays: &[RatVector], lineality: &[RatVector]) -> Self {
        // H-rep of the polar, then double-describe it back
        let mut dual_rows: Vec<(RatVector, Rel)> = Vec::new();
        for r in rays {
            if !r.is_zero() {
                dual_rows.push((r.clone(), Rel::Le));
            }
        }
        for l in lineality {
            if !l.is_zero() {
                dual_rows.push((l.clone(), Rel::Eq));
            }
        }
        let (s, t) = cone_dd(dim, &dual_rows);
        let mut rows: Vec<HRow> = s.into_iter().map(|a| HRow::le(a, zero())).collect();
        rows.extend(t.into_iter().map(|a| HRow::eq(a, zero())));
        let c = PolyCone(Polyhedron::new(dim, rows));
        // seed the generator cache with what we were given
        let mut vr = VRep {
            vertices: vec![RatVector::zeros(dim)],
            rays: rays
                .iter()
                .filter(|r| !r.is_zero())
                .map(|r| r.primitive())
                .collect(),
            lineality: span_basis(lineality, dim),
        };
        vr.rays.sort();
        vr.rays.dedup();
        let _ = c.0.vrep.set(vr);
        c
    }

    pub fn space(dim: usize) -> Self {
        PolyCone(Polyhedron::space(dim))
    }

    pub fn zero(dim: usize) -> Self {
        let rows = (0..dim)
            .map(|i| HRow::eq(RatVector::unit(dim, i), zero()))
            .collect();
        PolyCone(Polyhedron::new(dim, rows))
    }

    pub fn ambient_dim(&self) -> usize {
        self.0.ambient_dim()
    }

    pub fn as_polyhedron(&self) -> &Polyhedron {
        &self.0
    }

    pub fn into_polyhedron(self) -> Polyhedron {
        self.0
    }

    pub fn contains_point(&self, x: &RatVector) -> bool {
        self.0.contains_point(x)
    }

    /// Generators of the cone: (rays, lineality). The vertex is the origin.
    pub fn generators(&self) -> (Vec<RatVector>, Vec<RatVector>) {
        let v = self.0.vrep();
        (v.rays.clone(), v.lineality.clone())
    }

    /// Polar cone {y : <y, x> ≤ 0 for all x in the cone}.
    pub fn polar(&self) -> PolyCone {
        let (rays, lineality) = self.generators();
        let mut rows: Vec<HRow> = rays.into_iter().map(|r| HRow::le(r, zero())).collect();
        rows.extend(lineality.into_iter().map(|l| HRow::eq(l, zero())));
        PolyCone(Polyhedron::new(self.ambient_dim(), rows))
    }

    /// All closed faces of the cone (each again a cone).
    pub fn faces(&self) -> Result<Vec<PolyCone>> {
        Ok(self.0.faces()?.into_iter().map(PolyCone).collect())
    }

    /// Span of the cone, i.e. the subspace K - K.
    pub fn span(&self) -> Subspace {
        let (mut gens, lin) = self.generators();
        gens.extend(lin);
        Subspace::from_vectors(&gens, self.ambient_dim())
    }

    /// Minkowski difference cone self - other = {a - b}.
    pub fn minkowski_diff(&self, other: &PolyCone) -> PolyCone {
        assert_eq!(self.ambient_dim(), other.ambient_dim());
        let (r1, l1) = self.generators();
        let (r2, l2) = other.generators();
        let mut rays = r1;
        rays.extend(r2.iter().map(|r| -r));
        let mut lin = l1;
        lin.extend(l2);
        PolyCone::from_generators(self.ambient_dim(), &rays, &lin)
    }

    pub fn intersect(&self, other: &PolyCone) -> PolyCone {
        PolyCone(self.0.intersect(&other.0))
    }

    pub fn set_eq(&self, other: &PolyCone) -> bool {
        self.0.set_eq(&other.0)
    }

    pub fn subset_of(&self, other: &PolyCone) -> bool {
        self.0.subset_of(&other.0)
    }

    /// Is this cone the single point {0}?
    pub fn is_zero_cone(&self) -> bool {
        let (rays, lin) = self.generators();
        rays.is_empty() && lin.is_empty()
    }

    /// Some nonzero element, if one exists.
    pub fn nonzero_element(&self) -> Option<RatVector> {
        let (rays, lin) = self.generators();
        rays.into_iter().chain(lin).next()
    }
}

/// A linear subspace given by an RREF basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    dim: usize,
    basis: Vec<RatVector>,
}

impl Subspace {
    pub fn from_vectors(vectors: &[RatVector], dim: usize) -> Self {
        Subspace {
            dim,
            basis: span_basis(vectors, dim),
        }
    }

    pub fn full(dim: usize) -> Self {
        Subspace {
            dim,
            basis: (0..dim).map(|i| RatVector::unit(dim, i)).collect(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Subspace { dim, basis: vec![] }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[RatVector] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn contains(&self, x: &RatVector) -> bool {
        if x.is_zero() {
            return true;
        }
        let mut rows = self.basis.clone();
        rows.push(x.clone());
        rank(&RatMatrix::from_rows(rows, self.dim)) == self.basis.len()
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.dim, other.dim);
        let b = crate::linalg::subspace_intersection(&self.basis, &other.basis, self.dim);
        Subspace::from_vectors(&b, self.dim)
    }

    /// Orthogonal complement.
    pub fn complement(&self) -> Subspace {
        if self.basis.is_empty() {
            return Subspace::full(self.dim);
        }
        let b = nullspace(&RatMatrix::from_rows(self.basis.clone(), self.dim));
        Subspace::from_vectors(&b, self.dim)
    }

    /// The subspace as a cone (equality rows from the complement basis).
    pub fn to_cone(&self) -> PolyCone {
        let rows = self
            .complement()
            .basis
            .iter()
            .map(|c| HRow::eq(c.clone(), zero()))
            .collect();
        PolyCone::from_rows(self.dim, rows)
    }
}

/// A finite union of polyhedra sharing an ambient dimension. Interpreted as a
/// set union; never convexified.
#[derive(Clone, Debug)]
pub struct PolyUnion {
    pub dim: usize,
    pub pieces: Vec<Polyhedron>,
}

impl PolyUnion {
    pub fn empty(dim: usize) -> Self {
        PolyUnion {
            dim,
            pieces: vec![],
        }
    }

    pub fn new(dim: usize, pieces: Vec<Polyhedron>) -> Self {
        for p in &pieces {
            assert_eq!(p.ambient_dim(), dim);
        }
        PolyUnion { dim, pieces }
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.iter().all(|p| p.is_empty())
    }

    pub fn contains_point(&self, x: &RatVector) -> bool {
        self.pieces.iter().any(|p| p.contains_point(x))
    }

    /// Is every piece of self covered by the union other?
    pub fn subset_of(&self, other: &PolyUnion) -> bool {
        self.pieces
            .iter()
            .all(|p| poly_minus_union_is_empty(p, &other.pieces))
    }

    pub fn set_eq(&self, other: &PolyUnion) -> bool {
        self.subset_of(other) && other.subset_of(self)
    }

    /// Drops empty pieces and pieces contained in another piece; the set is
    /// unchanged and the representation is minimal piece-wise.
    pub fn dedup(mut self) -> Self {
        let pieces: Vec<Polyhedron> = self.pieces.drain(..).filter(|p| !p.is_empty()).collect();
        let mut kept: Vec<Polyhedron> = Vec::new();
        for (i, p) in pieces.iter().enumerate() {
            let dominated = pieces.iter().enumerate().any(|(j, q)| {
                if i == j {
                    return false;
                }
                // drop p when p ⊆ q, breaking ties of equal sets by index
                p.subset_of(q) && (!q.subset_of(p) || j < i)
            });
            if !dominated {
                kept.push(p.clone());
            }
        }
        PolyUnion {
            dim: self.dim,
            pieces: kept,
        }
    }
}

/// Is A \ (B_1 ∪ ... ∪ B_k) empty? Exact, by recursive half-space splitting.
pub fn poly_minus_union_is_empty(a: &Polyhedron, bs: &[Polyhedron]) -> bool {
    fn rec(dim: usize, closed: &[HRow], strict: &[HRow], bs: &[Polyhedron]) -> bool {
        if strict_point(dim, closed, strict).is_none() {
            return true;
        }
        let Some((b, rest)) = bs.split_first() else {
            return false;
        };
        // A' \ b = union over violated rows of A' ∩ {row violated}
        for row in b.canonical_rows() {
            let mut violators: Vec<HRow> = Vec::new();
            match row.rel {
                Rel::Le => violators.push(HRow::le(-&row.a, -row.b.clone())), // <a,x> > b
                Rel::Eq => {
                    violators.push(HRow::le(-&row.a, -row.b.clone()));
                    violators.push(HRow::le(row.a.clone(), row.b.clone()));
                }
            }
            for (k, v) in violators.into_iter().enumerate() {
                // Eq rows produce two open sides; Le rows one
                let opposite = row.rel == Rel::Eq && k == 1;
                let mut s = strict.to_vec();
                if opposite {
                    // strict version of <a,x> < b
                    s.push(HRow::le(row.a.clone(), row.b.clone()));
                } else {
                    s.push(v);
                }
                if !rec(dim, closed, &s, rest) {
                    return false;
                }
            }
        }
        true
    }
    let strict: Vec<HRow> = vec![];
    rec(a.ambient_dim(), a.rows(), &strict, bs)
}

/// A rational point satisfying all closed rows and all strict rows strictly
/// (strict rows are interpreted as <a, x> < b), or None.
pub fn strict_point(dim: usize, closed: &[HRow], strict: &[HRow]) -> Option<RatVector> {
    if strict.is_empty() {
        let p = Polyhedron::new(dim, closed.to_vec());
        return if p.is_empty() {
            None
        } else {
            Some(p.rel_interior_point().expect("nonempty"))
        };
    }
    // epsilon trick: maximize eps with <a,x> + eps <= b on strict rows
    let edim = dim + 1;
    let mut rows: Vec<HRow> = Vec::new();
    for r in closed {
        let mut a = r.a.0.clone();
        a.push(zero());
        rows.push(HRow {
            a: RatVector(a),
            rel: r.rel,
            b: r.b.clone(),
        });
    }
    for r in strict {
        assert_eq!(r.rel, Rel::Le, "strict rows must be inequalities");
        let mut a = r.a.0.clone();
        a.push(rat(1));
        rows.push(HRow::le(RatVector(a), r.b.clone()));
    }
    // 0 <= eps <= 1
    let mut eneg = RatVector::zeros(edim);
    eneg.0[dim] = rat(-1);
    rows.push(HRow::le(eneg, zero()));
    let mut epos = RatVector::zeros(edim);
    epos.0[dim] = rat(1);
    rows.push(HRow::le(epos, rat(1)));
    let p = Polyhedron::new(edim, rows);
    let v = p.vrep();
    let mut best: Option<RatVector> = None;
    for vert in &v.vertices {
        if vert.0[dim].is_positive() {
            let x = RatVector(vert.0[..dim].to_vec());
            if best.as_ref().map_or(true, |b| x < *b) {
                best = Some(x);
            }
        }
    }
    best
}

/// Double description: generators of {x : <a_i, x> ≤ 0 (Le) / = 0 (Eq)}.
/// Returns (extreme rays modulo lineality, lineality basis).
pub fn cone_dd(dim: usize, rows: &[(RatVector, Rel)]) -> (Vec<RatVector>, Vec<RatVector>) {
    let mut lineality: Vec<RatVector> = (0..dim).map(|i| RatVector::unit(dim, i)).collect();
    let mut rays: Vec<RatVector> = Vec::new();
    let mut processed: Vec<RatVector> = Vec::new();

    for (a, rel) in rows {
        if a.is_zero() {
            continue;
        }
        if let Some(idx) = lineality.iter().position(|l| !a.dot(l).is_zero()) {
            let l0 = lineality.remove(idx);
            let d0 = a.dot(&l0);
            for l in lineality.iter_mut() {
                let f = a.dot(l) / &d0;
                if !f.is_zero() {
                    *l = &*l - &l0.scale(&f);
                }
            }
            for r in rays.iter_mut() {
                let f = a.dot(r) / &d0;
                if !f.is_zero() {
                    *r = (&*r - &l0.scale(&f)).primitive();
                }
            }
            rays.retain(|r| !r.is_zero());
            if *rel == Rel::Le {
                let r0 = if d0.is_negative() { l0 } else { -&l0 };
                rays.push(r0.primitive());
            }
            processed.push(a.clone());
        } else {
            let vals: Vec<Rat> = rays.iter().map(|r| a.dot(r)).collect();
            let mut neg: Vec<usize> = Vec::new();
            let mut zer: Vec<usize> = Vec::new();
            let mut pos: Vec<usize> = Vec::new();
            for (i, v) in vals.iter().enumerate() {
                match sign(v) {
                    -1 => neg.push(i),
                    0 => zer.push(i),
                    _ => pos.push(i),
                }
            }
            if pos.is_empty() && *rel == Rel::Le {
                processed.push(a.clone());
                continue;
            }
            let zero_sets: Vec<BTreeSet<usize>> = rays
                .iter()
                .map(|r| {
                    processed
                        .iter()
                        .enumerate()
                        .filter(|(_, q)| q.dot(r).is_zero())
                        .map(|(i, _)| i)
                        .collect()
                })
                .collect();
            let mut new_rays: Vec<RatVector> = Vec::new();
            let keep: Vec<usize> = match rel {
                Rel::Le => neg.iter().chain(zer.iter()).copied().collect(),
                Rel::Eq => zer.clone(),
            };
            for &i in &keep {
                new_rays.push(rays[i].clone());
            }
            for &p in &pos {
                for &n in &neg {
                    let common: BTreeSet<usize> =
                        zero_sets[p].intersection(&zero_sets[n]).copied().collect();
                    let adjacent = !rays
                        .iter()
                        .enumerate()
                        .any(|(k, _)| k != p && k != n && common.is_subset(&zero_sets[k]));
                    if !adjacent {
                        continue;
                    }
                    // <a, comb> = 0, positive combination of rays[p], rays[n]
                    let comb = &rays[n].scale(&vals[p]) - &rays[p].scale(&vals[n]);
                    if !comb.is_zero() {
                        new_rays.push(comb.primitive());
                    }
                }
            }
            new_rays.sort();
            new_rays.dedup();
            rays = new_rays;
            processed.push(a.clone());
        }
    }
    rays.sort();
    rays.dedup();
    (rays, span_basis(&lineality, dim))
}

/// H-representation of conv(vertices) + cone(rays) + span(lineality), via the
/// polar of the homogenization.
pub fn v_to_h(dim: usize, v: &VRep) -> Vec<HRow> {
    let hdim = dim + 1;
    let mut dual_rows: Vec<(RatVector, Rel)> = Vec::new();
    for vert in &v.vertices {
        let mut a = vert.0.clone();
        a.push(rat(1));
        dual_rows.push((RatVector(a), Rel::Le));
    }
    for ray in &v.rays {
        let mut a = ray.0.clone();
        a.push(zero());
        dual_rows.push((RatVector(a), Rel::Le));
    }
    for l in &v.lineality {
        let mut a = l.0.clone();
        a.push(zero());
        dual_rows.push((RatVector(a), Rel::Eq));
    }
    let (s, t) = cone_dd(hdim, &dual_rows);
    let mut rows = Vec::new();
    for sigma in s {
        let a = RatVector(sigma.0[..dim].to_vec());
        let b = -sigma.0[dim].clone();
        if a.is_zero() && !b.is_negative() {
            continue; // trivial 0 <= b
        }
        rows.push(HRow::le(a, b));
    }
    for tau in t {
        let a = RatVector(tau.0[..dim].to_vec());
        let b = -tau.0[dim].clone();
        if a.is_zero() && b.is_zero() {
            continue;
        }
        rows.push(HRow::eq(a, b));
    }
    rows
}

/// Convenience: orthant-style cones.
pub fn nonneg_orthant(dim: usize) -> PolyCone {
    let rows = (0..dim)
        .map(|i| HRow::le(-&RatVector::unit(dim, i), zero()))
        .collect();
    PolyCone::from_rows(dim, rows)
}

pub fn nonpos_orthant(dim: usize) -> PolyCone {
    let rows = (0..dim)
        .map(|i| HRow::le(RatVector::unit(dim, i), zero()))
        .collect();
    PolyCone::from_rows(dim, rows)
}

/// The unit simplex {v ≥ 0, Σv = 1}.
pub fn unit_simplex(dim: usize) -> Polyhedron {
    let mut rows: Vec<HRow> = (0..dim)
        .map(|i| HRow::le(-&RatVector::unit(dim, i), zero()))
        .collect();
    rows.push(HRow::eq(RatVector(vec![rat(1); dim]), rat(1)));
    Polyhedron::new(dim, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::ratio;
    use proptest::prelude::*;

    fn unit_square() -> Polyhedron {
        Polyhedron::new(
            2,
            vec![
                HRow::le(RatVector::from_i64(&[1, 0]), rat(1)),
                HRow::le(RatVector::from_i64(&[-1, 0]), rat(0)),
                HRow::le(RatVector::from_i64(&[0, 1]), rat(1)),
                HRow::le(RatVector::from_i64(&[0, -1]), rat(0)),
            ],
        )
    }

    #[test]
    fn dd_unit_square() {
        let p = unit_square();
        let v = p.vrep();
        assert_eq!(v.vertices.len(), 4);
        assert!(v.rays.is_empty());
        assert!(v.lineality.is_empty());
    }

    #[test]
    fn dd_nonneg_orthant() {
        let k = nonneg_orthant(2);
        let (rays, lin) = k.generators();
        assert_eq!(rays.len(), 2);
        assert!(lin.is_empty());
        assert!(rays.contains(&RatVector::from_i64(&[1, 0])));
        assert!(rays.contains(&RatVector::from_i64(&[0, 1])));
    }

    #[test]
    fn dd_simplex() {
        let m = unit_simplex(4);
        let v = m.vrep();
        assert_eq!(v.vertices.len(), 4);
        assert!(v.rays.is_empty());
        for i in 0..4 {
            assert!(v.vertices.contains(&RatVector::unit(4, i)));
        }
    }

    #[test]
    fn dd_round_trip() {
        for p in [unit_square(), unit_simplex(3)] {
            let q = Polyhedron::from_generators(p.ambient_dim(), p.vrep());
            assert!(p.set_eq(&q));
        }
    }

    #[test]
    fn empty_polyhedron() {
        let p = Polyhedron::new(
            1,
            vec![
                HRow::le(RatVector::from_i64(&[1]), rat(-1)),
                HRow::le(RatVector::from_i64(&[-1]), rat(0)),
            ],
        );
        assert!(p.is_empty());
        assert!(p.rel_interior_point().is_err());
    }

    #[test]
    fn polar_examples() {
        assert!(PolyCone::space(3).polar().set_eq(&PolyCone::zero(3)));
        assert!(nonpos_orthant(2).polar().set_eq(&nonneg_orthant(2)));
        // polar of a span is the orthogonal complement
        let k = PolyCone::from_generators(
            3,
            &[],
            &[
                RatVector::from_i64(&[1, 1, 0]),
                RatVector::from_i64(&[0, 0, 1]),
            ],
        );
        let polar = k.polar();
        let expected = Subspace::from_vectors(&[RatVector::from_i64(&[1, -1, 0])], 3).to_cone();
        assert!(polar.set_eq(&expected));
    }

    #[test]
    fn tangent_normal_examples() {
        let p = nonpos_orthant(2).into_polyhedron();
        let t = p.tangent_cone(&RatVector::zeros(2)).unwrap();
        assert!(t.set_eq(&nonpos_orthant(2)));
        let n = p.normal_cone(&RatVector::zeros(2)).unwrap();
        assert!(n.set_eq(&nonneg_orthant(2)));

        let sq = unit_square();
        let interior = RatVector(vec![ratio(1, 2), ratio(1, 2)]);
        assert!(sq
            .tangent_cone(&interior)
            .unwrap()
            .set_eq(&PolyCone::space(2)));
        assert!(sq
            .normal_cone(&interior)
            .unwrap()
            .set_eq(&PolyCone::zero(2)));

        // half-space facet: normal cone is a ray
        let h = Polyhedron::new(2, vec![HRow::le(RatVector::from_i64(&[1, 0]), rat(0))]);
        let n = h.normal_cone(&RatVector::from_i64(&[0, 3])).unwrap();
        let ray = PolyCone::from_generators(2, &[RatVector::from_i64(&[1, 0])], &[]);
        assert!(n.set_eq(&ray));

        // outside point errors
        assert!(matches!(
            h.tangent_cone(&RatVector::from_i64(&[1, 0])),
            Err(Error::PointNotInSet)
        ));
    }

    #[test]
    fn simplex_tangent_at_edge_midpoint() {
        let m = unit_simplex(4);
        let vbar = RatVector(vec![ratio(1, 2), ratio(1, 2), rat(0), rat(0)]);
        let t = m.tangent_cone(&vbar).unwrap();
        // {Σω = 0, ω3 ≥ 0, ω4 ≥ 0}
        let expected = PolyCone::from_rows(
            4,
            vec![
                HRow::eq(RatVector::from_i64(&[1, 1, 1, 1]), rat(0)),
                HRow::le(RatVector::from_i64(&[0, 0, -1, 0]), rat(0)),
                HRow::le(RatVector::from_i64(&[0, 0, 0, -1]), rat(0)),
            ],
        );
        assert!(t.set_eq(&expected));
        // critical cone with p = 0 is the tangent cone
        let k = m.critical_cone(&vbar, &RatVector::zeros(4)).unwrap();
        assert!(k.set_eq(&expected));
    }

    #[test]
    fn face_examples() {
        let k = nonneg_orthant(2);
        let faces = k.faces().unwrap();
        assert_eq!(faces.len(), 4);

        // a linear subspace has exactly one face: itself
        let s = Subspace::from_vectors(&[RatVector::from_i64(&[1, 2])], 2).to_cone();
        let faces = s.faces().unwrap();
        assert_eq!(faces.len(), 1);
        assert!(faces[0].set_eq(&s));

        // example critical cone: 4 faces
        let m = unit_simplex(4);
        let vbar = RatVector(vec![ratio(1, 2), ratio(1, 2), rat(0), rat(0)]);
        let k = m.critical_cone(&vbar, &RatVector::zeros(4)).unwrap();
        assert_eq!(k.faces().unwrap().len(), 4);
    }

    #[test]
    fn critical_cone_errors_and_ray_case() {
        let p = nonpos_orthant(1).into_polyhedron();
        let k = p
            .critical_cone(&RatVector::zeros(1), &RatVector::from_i64(&[1]))
            .unwrap();
        assert!(k.set_eq(&PolyCone::zero(1)));
        // p not normal
        assert!(matches!(
            p.critical_cone(&RatVector::zeros(1), &RatVector::from_i64(&[-1])),
            Err(Error::NotNormal)
        ));
    }

    #[test]
    fn span_examples() {
        assert_eq!(nonneg_orthant(2).span().rank(), 2);
        let ray = PolyCone::from_generators(2, &[RatVector::from_i64(&[1, 0])], &[]);
        let s = ray.span();
        assert_eq!(s.rank(), 1);
        assert!(s.contains(&RatVector::from_i64(&[3, 0])));
        // Example K spans {Σω = 0}
        let m = unit_simplex(4);
        let vbar = RatVector(vec![ratio(1, 2), ratio(1, 2), rat(0), rat(0)]);
        let k = m.critical_cone(&vbar, &RatVector::zeros(4)).unwrap();
        let s = k.span();
        assert_eq!(s.rank(), 3);
        assert!(s.contains(&RatVector::from_i64(&[1, -1, 0, 0])));
        assert!(s.contains(&RatVector::from_i64(&[0, 1, -1, 0])));
        assert!(!s.contains(&RatVector::from_i64(&[0, 0, 1, 0])));
    }

    #[test]
    fn rel_interior_examples() {
        let m = unit_simplex(4);
        assert_eq!(
            m.rel_interior_point().unwrap(),
            RatVector(vec![ratio(1, 4); 4])
        );
        let pt = Polyhedron::point(&RatVector::from_i64(&[2, 5]));
        assert_eq!(
            pt.rel_interior_point().unwrap(),
            RatVector::from_i64(&[2, 5])
        );
        let halfline = nonneg_orthant(1).into_polyhedron();
        let p = halfline.rel_interior_point().unwrap();
        assert!(p.0[0].is_positive());
    }

    #[test]
    fn minkowski_examples() {
        let m = unit_simplex(4);
        let vbar = RatVector(vec![ratio(1, 2), ratio(1, 2), rat(0), rat(0)]);
        let k = m.critical_cone(&vbar, &RatVector::zeros(4)).unwrap();
        let d = k.minkowski_diff(&k);
        assert!(d.set_eq(&k.span().to_cone()));

        let z = PolyCone::zero(1);
        let r = nonneg_orthant(1);
        assert!(z.minkowski_diff(&r).set_eq(&nonpos_orthant(1)));

        let e1 = PolyCone::from_generators(2, &[RatVector::from_i64(&[1, 0])], &[]);
        let e2 = PolyCone::from_generators(2, &[RatVector::from_i64(&[0, 1])], &[]);
        let expected = PolyCone::from_generators(
            2,
            &[RatVector::from_i64(&[1, 0]), RatVector::from_i64(&[0, -1])],
            &[],
        );
        assert!(e1.minkowski_diff(&e2).set_eq(&expected));
    }

    #[test]
    fn union_difference() {
        // [0,2] \ ([0,1] ∪ [1,2]) is empty; [0,2] \ [0,1] is not
        let seg = |a: i64, b: i64| {
            Polyhedron::new(
                1,
                vec![
                    HRow::le(RatVector::from_i64(&[-1]), rat(-a)),
                    HRow::le(RatVector::from_i64(&[1]), rat(b)),
                ],
            )
        };
        assert!(poly_minus_union_is_empty(
            &seg(0, 2),
            &[seg(0, 1), seg(1, 2)]
        ));
        assert!(!poly_minus_union_is_empty(&seg(0, 2), &[seg(0, 1)]));
        assert!(poly_minus_union_is_empty(&seg(0, 1), &[seg(0, 2)]));
    }

    #[test]
    fn values_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Polyhedron>();
        assert_send_sync::<PolyCone>();
        assert_send_sync::<Subspace>();
        assert_send_sync::<PolyUnion>();
    }

    #[test]
    fn zero_dimensional_space() {
        let p = Polyhedron::space(0);
        assert!(!p.is_empty());
        assert_eq!(p.rel_interior_point().unwrap(), RatVector::zeros(0));
        assert!(p.contains_point(&RatVector::zeros(0)));
    }

    fn small_cone() -> impl Strategy<Value = PolyCone> {
        // random H-cones in R^3 with up to 5 rows
        let row = (prop::collection::vec(-2i64..=2, 3), prop::bool::ANY).prop_map(|(a, eq)| {
            let a = RatVector::from_i64(&a);
            if eq {
                HRow::eq(a, rat(0))
            } else {
                HRow::le(a, rat(0))
            }
        });
        prop::collection::vec(row, 0..5).prop_map(|rows| {
            PolyCone::from_rows(3, rows.into_iter().filter(|r| !r.a.is_zero()).collect())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn polar_involution(k in small_cone()) {
            prop_assert!(k.polar().polar().set_eq(&k));
        }

        #[test]
        fn normal_is_polar_of_tangent(k in small_cone()) {
            let p = k.as_polyhedron();
            let x = p.rel_interior_point().unwrap();
            let t = p.tangent_cone(&x).unwrap();
            let n = p.normal_cone(&x).unwrap();
            prop_assert!(n.set_eq(&t.polar()));
        }

        #[test]
        fn faces_of_faces_are_faces(k in small_cone()) {
            let faces = k.faces().unwrap();
            for f in &faces {
                for g in f.faces().unwrap() {
                    prop_assert!(faces.iter().any(|h| h.set_eq(&g)));
                }
            }
        }

        #[test]
        fn dd_round_trip_cones(k in small_cone()) {
            let (rays, lin) = k.generators();
            let back = PolyCone::from_generators(3, &rays, &lin);
            prop_assert!(back.set_eq(&k));
        }
    }
}
