//! Computable graphs of second-order subdifferentials ∂²θ(z̄, v̄) for the
//! supported θ classes, as finite systems of closed face pairs of the critical
//! cone.
//!
//! Indicator rule (convex polyhedron Z, x ∈ Z, p ∈ N_Z(x), K = T_Z(x) ∩ p⊥):
//!   w ∈ ∂²δ_Z(x,p)(u)  ⟺  ∃ faces C₁ ⊆ C₂ of K with u ∈ C₁-C₂, w ∈ (C₂-C₁)*.
//!
//! Support-PLQ rule (θ(z) = sup_{v∈C}{<v,z> - ½<v,Qv>}, v̄ ∈ ∂θ(z̄),
//! K = T_C(v̄) ∩ (z̄-Qv̄)⊥): composing the conjugate flip
//! w ∈ ∂²θ(z̄,v̄)(u) ⟺ Qw-u ∈ ∂²δ_C(v̄, z̄-Qv̄)(-w) with the indicator rule:
//!   w ∈ ∂²θ(z̄,v̄)(u)  ⟺  ∃ faces C₁ ⊆ C₂ of K with -w ∈ C₁-C₂,
//!                         Qw-u ∈ (C₂-C₁)*.
//!
//! Values are explicit finite unions of polyhedra and are never convexified.

use crate::linalg::{nullspace, RatMatrix, RatVector};
use crate::plq::PLQFunction;
pub use crate::poly::PolyUnion;
use crate::poly::{HRow, PolyCone, Polyhedron, Subspace};
use crate::{Error, Result};

/// Which second-order rule the system encodes.
#[derive(Clone, Debug)]
pub enum SocMode {
    IndicatorRule,
    MajRule { q: RatMatrix },
}

/// One ordered pair of closed faces inner ⊆ outer of the base cone, with the
/// difference cone D = outer - inner and its polar cached.
#[derive(Clone, Debug)]
pub struct FacePair {
    pub inner: PolyCone,
    pub outer: PolyCone,
    pub diff: PolyCone,
    pub diff_polar: PolyCone,
}

/// The finite system representing ∂²θ(z̄, v̄).
#[derive(Clone, Debug)]
pub struct FacePairSystem {
    pub base_cone: PolyCone,
    pub pairs: Vec<FacePair>,
    pub mode: SocMode,
}

fn all_face_pairs(k: &PolyCone) -> Result<Vec<FacePair>> {
    let faces = k.faces()?;
    let mut pairs = Vec::new();
    for inner in &faces {
        for outer in &faces {
            if inner.subset_of(outer) {
                let diff = outer.minkowski_diff(inner);
                let diff_polar = diff.polar();
                pairs.push(FacePair {
                    inner: inner.clone(),
                    outer: outer.clone(),
                    diff,
                    diff_polar,
                });
            }
        }
    }
    Ok(pairs)
}

/// System for ∂²δ_Z(x, p). Requires x ∈ Z and p ∈ N_Z(x).
pub fn soc_system_indicator(
    z: &Polyhedron,
    x: &RatVector,
    p: &RatVector,
) -> Result<FacePairSystem> {
    let k = z.critical_cone(x, p)?;
    Ok(FacePairSystem {
        pairs: all_face_pairs(&k)?,
        base_cone: k,
        mode: SocMode::IndicatorRule,
    })
}

/// System for ∂²θ(z̄, v̄) with θ of support-PLQ class (C, Q). Requires
/// v̄ ∈ ∂θ(z̄), equivalently z̄ - Qv̄ ∈ N_C(v̄).
pub fn soc_system_maj(
    c: &Polyhedron,
    q: &RatMatrix,
    zbar: &RatVector,
    vbar: &RatVector,
) -> Result<FacePairSystem> {
    let p = zbar - &q.mul_vec(vbar);
    let k = match c.critical_cone(vbar, &p) {
        Ok(k) => k,
        Err(Error::PointNotInSet) | Err(Error::NotNormal) => return Err(Error::NotSubgradient),
        Err(e) => return Err(e),
    };
    Ok(FacePairSystem {
        pairs: all_face_pairs(&k)?,
        base_cone: k,
        mode: SocMode::MajRule { q: q.clone() },
    })
}

/// System for ∂²θ(z̄, v̄) of any supported θ.
pub fn soc_system(
    theta: &PLQFunction,
    zbar: &RatVector,
    vbar: &RatVector,
) -> Result<FacePairSystem> {
    match theta {
        PLQFunction::Indicator(z) => soc_system_indicator(z, zbar, vbar),
        PLQFunction::SupportPLQ { c, q } => soc_system_maj(c, q, zbar, vbar),
    }
}

impl FacePairSystem {
    pub fn ambient_dim(&self) -> usize {
        self.base_cone.ambient_dim()
    }

    fn check_dim(&self, u: &RatVector) -> Result<()> {
        if u.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: u.len(),
            });
        }
        Ok(())
    }

    /// The value set ∂²θ(z̄,v̄)(u) as a finite union of polyhedra.
    pub fn value(&self, u: &RatVector) -> Result<PolyUnion> {
        self.check_dim(u)?;
        let m = self.ambient_dim();
        let mut pieces: Vec<Polyhedron> = Vec::new();
        match &self.mode {
            SocMode::IndicatorRule => {
                let neg_u = -u;
                for pair in &self.pairs {
                    if pair.diff.contains_point(&neg_u) {
                        pieces.push(pair.diff_polar.as_polyhedron().clone());
                    }
                }
            }
            SocMode::MajRule { q } => {
                for pair in &self.pairs {
                    // { w : w ∈ D, Qw - u ∈ D* }
                    let mut rows = pair.diff.as_polyhedron().rows().to_vec();
                    for r in pair.diff_polar.as_polyhedron().rows() {
                        // <s, Qw - u> ≤/= 0  ⟺  <Qs, w> ≤/= <s, u>
                        rows.push(HRow {
                            a: q.mul_vec(&r.a),
                            rel: r.rel,
                            b: r.a.dot(u),
                        });
                    }
                    pieces.push(Polyhedron::new(m, rows));
                }
            }
        }
        Ok(PolyUnion::new(m, pieces).dedup())
    }

    /// Membership w ∈ ∂²θ(z̄,v̄)(u), decided pair by pair.
    pub fn membership(&self, u: &RatVector, w: &RatVector) -> Result<bool> {
        self.check_dim(u)?;
        self.check_dim(w)?;
        match &self.mode {
            SocMode::IndicatorRule => {
                let neg_u = -u;
                Ok(self
                    .pairs
                    .iter()
                    .any(|p| p.diff.contains_point(&neg_u) && p.diff_polar.contains_point(w)))
            }
            SocMode::MajRule { q } => {
                let qw_minus_u = &q.mul_vec(w) - u;
                Ok(self
                    .pairs
                    .iter()
                    .any(|p| p.diff.contains_point(w) && p.diff_polar.contains_point(&qw_minus_u)))
            }
        }
    }

    /// ∂²θ(z̄,v̄)(0) reduced to its subspace pieces.
    ///
    /// Indicator: the union over all pairs of (C₂-C₁)* collapses onto the
    /// subspaces (span C)⊥ over faces C, because C₂-C₁ ⊇ C₁-C₁ = span C₁; the
    /// containment is verified for every pair and the maximal subspaces are
    /// returned. Support-PLQ: the single subspace (ker Q) ∩ span K.
    pub fn at_zero_subspaces(&self) -> Result<Vec<Subspace>> {
        let m = self.ambient_dim();
        match &self.mode {
            SocMode::IndicatorRule => {
                let faces = self.base_cone.faces()?;
                let mut subs: Vec<Subspace> = Vec::new();
                for f in &faces {
                    subs.push(f.span().complement());
                }
                // structural guard: every pair piece sits inside one of them
                for pair in &self.pairs {
                    let covered = subs.iter().any(|s| pair.diff_polar.subset_of(&s.to_cone()));
                    if !covered {
                        return Err(Error::Unsupported(
                            "indicator at-zero union has a non-subspace piece".into(),
                        ));
                    }
                }
                // keep maximal subspaces only
                let mut maximal: Vec<Subspace> = Vec::new();
                for s in subs {
                    if maximal
                        .iter()
                        .any(|t| s.basis().iter().all(|b| t.contains(b)))
                    {
                        continue;
                    }
                    maximal.retain(|t| !t.basis().iter().all(|b| s.contains(b)));
                    maximal.push(s);
                }
                Ok(maximal)
            }
            SocMode::MajRule { q } => {
                let ker = Subspace::from_vectors(&nullspace(q), m);
                Ok(vec![ker.intersect(&self.base_cone.span())])
            }
        }
    }
}

/// ∂²θ(z̄,v̄)(0) for a supported θ, as a list of subspaces.
pub fn soc_at_zero(
    theta: &PLQFunction,
    zbar: &RatVector,
    vbar: &RatVector,
) -> Result<Vec<Subspace>> {
    soc_system(theta, zbar, vbar)?.at_zero_subspaces()
}

/// Convenience: the value union of the zero cone {0} piece, used by callers
/// that need the at-zero union as polyhedra rather than subspaces.
pub fn at_zero_union(sys: &FacePairSystem) -> Result<PolyUnion> {
    sys.value(&RatVector::zeros(sys.ambient_dim()))
}
