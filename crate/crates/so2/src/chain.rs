//! First- and second-order chain rules for compositions θ∘h: the exact rule
//! under the full-rank condition, the upper-estimate rule for strongly
//! amenable compositions with the second-order qualification condition, and
//! the partial variants carrying a parameter block.

use crate::linalg::{nullspace, rank, solve_affine, RatMatrix, RatVector};
use crate::plq::PLQFunction;
use crate::poly::{HRow, PolyCone, PolyUnion, Polyhedron, Subspace};
use crate::rat::{zero, Rat};
use crate::soc::{soc_system, FacePairSystem};
use crate::{Error, Result};

/// One scalar quadratic component h_i(x) = ½ x^T A x + b^T x + c.
#[derive(Clone, Debug)]
pub struct QuadraticFn {
    pub a: RatMatrix,
    pub b: RatVector,
    pub c: Rat,
}

impl QuadraticFn {
    pub fn new(a: RatMatrix, b: RatVector, c: Rat) -> Result<Self> {
        if !a.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: b.len(),
            });
        }
        Ok(QuadraticFn { a, b, c })
    }

    pub fn linear(b: RatVector) -> Self {
        let n = b.len();
        QuadraticFn {
            a: RatMatrix::zeros(n, n),
            b,
            c: zero(),
        }
    }

    pub fn eval(&self, x: &RatVector) -> Rat {
        self.a.quad_form(x, x) / crate::rat::rat(2) + self.b.dot(x) + self.c.clone()
    }

    pub fn gradient(&self, x: &RatVector) -> RatVector {
        &self.a.mul_vec(x) + &self.b
    }
}

/// Inner map h: R^n → R^m with exact rational quadratic components.
#[derive(Clone, Debug)]
pub struct QuadraticMap {
    input_dim: usize,
    pub components: Vec<QuadraticFn>,
}

impl QuadraticMap {
    pub fn new(input_dim: usize, components: Vec<QuadraticFn>) -> Result<Self> {
        for c in &components {
            if c.b.len() != input_dim {
                return Err(Error::DimensionMismatch {
                    expected: input_dim,
                    got: c.b.len(),
                });
            }
        }
        Ok(QuadraticMap {
            input_dim,
            components,
        })
    }

    pub fn linear(a: &RatMatrix) -> Self {
        QuadraticMap {
            input_dim: a.ncols(),
            components: (0..a.nrows())
                .map(|i| QuadraticFn::linear(a.row(i)))
                .collect(),
        }
    }

    pub fn output_dim(&self) -> usize {
        self.components.len()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn data_at(&self, x: &RatVector) -> PointData {
        let n = self.input_dim();
        let value = RatVector(self.components.iter().map(|c| c.eval(x)).collect());
        let jac_x =
            RatMatrix::from_rows(self.components.iter().map(|c| c.gradient(x)).collect(), n);
        let hess_xx = self.components.iter().map(|c| c.a.clone()).collect();
        PointData {
            value,
            jac_x,
            hess_xx,
            param: None,
        }
    }
}

/// Cross-parameter derivative blocks at the analysis point.
#[derive(Clone, Debug)]
pub struct ParamBlock {
    /// ∇_w h(x̄, w̄), m×d.
    pub jac_w: RatMatrix,
    /// ∂²h_i/∂w∂x (x̄, w̄), one d×n matrix per component.
    pub hess_wx: Vec<RatMatrix>,
}

/// Exact derivative data of the inner map at the analysis point.
#[derive(Clone, Debug)]
pub struct PointData {
    /// h(x̄) (or h(x̄, w̄)).
    pub value: RatVector,
    /// ∇_x h, m×n.
    pub jac_x: RatMatrix,
    /// ∇²_{xx} h_i, one symmetric n×n matrix per component.
    pub hess_xx: Vec<RatMatrix>,
    pub param: Option<ParamBlock>,
}

impl PointData {
    pub fn validate(&self) -> Result<()> {
        let m = self.value.len();
        let n = self.jac_x.ncols();
        if self.jac_x.nrows() != m || self.hess_xx.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: self.jac_x.nrows(),
            });
        }
        for h in &self.hess_xx {
            if !h.is_symmetric() {
                return Err(Error::NotSymmetric);
            }
            if h.nrows() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: h.nrows(),
                });
            }
        }
        if let Some(p) = &self.param {
            let d = p.jac_w.ncols();
            if p.jac_w.nrows() != m || p.hess_wx.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: p.jac_w.nrows(),
                });
            }
            for h in &p.hess_wx {
                if h.nrows() != d || h.ncols() != n {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: h.nrows(),
                    });
                }
            }
        }
        Ok(())
    }

    /// ∇²<v, h>(x̄) = Σ v_i ∇²h_i(x̄).
    pub fn scalarized_hessian(&self, v: &RatVector) -> RatMatrix {
        let n = self.jac_x.ncols();
        let mut acc = RatMatrix::zeros(n, n);
        for (vi, h) in v.0.iter().zip(self.hess_xx.iter()) {
            acc = acc.add_mat(&h.scale(vi));
        }
        acc
    }

    /// ∇²_{wx}<v, h>(x̄, w̄) = Σ v_i ∂²h_i/∂w∂x, d×n.
    pub fn scalarized_cross_hessian(&self, v: &RatVector) -> Option<RatMatrix> {
        let p = self.param.as_ref()?;
        let d = p.jac_w.ncols();
        let n = self.jac_x.ncols();
        let mut acc = RatMatrix::zeros(d, n);
        for (vi, h) in v.0.iter().zip(p.hess_wx.iter()) {
            acc = acc.add_mat(&h.scale(vi));
        }
        Some(acc)
    }
}

/// Inner map: quadratic components, or raw derivative data at the point.
#[derive(Clone, Debug)]
pub enum InnerMap {
    Quadratic(QuadraticMap),
    Point(PointData),
}

impl InnerMap {
    pub fn identity(n: usize) -> Self {
        InnerMap::Quadratic(QuadraticMap::linear(&RatMatrix::identity(n)))
    }

    pub fn linear(a: &RatMatrix) -> Self {
        InnerMap::Quadratic(QuadraticMap::linear(a))
    }

    /// Exact data at the analysis point. Point data is returned as stored;
    /// its `value`/derivatives are understood to belong to x̄.
    pub fn data_at(&self, x: &RatVector) -> Result<PointData> {
        let data = match self {
            InnerMap::Quadratic(q) => {
                if x.len() != q.input_dim() {
                    return Err(Error::DimensionMismatch {
                        expected: q.input_dim(),
                        got: x.len(),
                    });
                }
                q.data_at(x)
            }
            InnerMap::Point(p) => p.clone(),
        };
        data.validate()?;
        Ok(data)
    }
}

/// First-order chain rule ∂φ(x) = ∇h(x)^* ∂θ(h(x)); requires the first-order
/// qualification condition (the equality is what is promised).
pub fn first_order_chain(theta: &PLQFunction, h: &InnerMap, x: &RatVector) -> Result<Polyhedron> {
    let data = h.data_at(x)?;
    let (holds, _) = check_first_order_qc(theta, h, x)?;
    if !holds {
        return Err(Error::QcViolation);
    }
    let sub = theta.subdifferential(&data.value)?;
    let jt = data.jac_x.transpose();
    Ok(sub.affine_image(&jt, &RatVector::zeros(jt.nrows())))
}

/// Multiplier set M(x̄, ȳ) = {v ∈ ∂θ(h(x̄)) : ∇h(x̄)^* v = ȳ}. Empty output
/// signals ȳ ∉ ∂φ(x̄).
pub fn multiplier_set(
    theta: &PLQFunction,
    h: &InnerMap,
    xbar: &RatVector,
    ybar: &RatVector,
) -> Result<Polyhedron> {
    let data = h.data_at(xbar)?;
    let sub = theta.subdifferential(&data.value)?;
    let m = sub.ambient_dim();
    let mut rows = sub.rows().to_vec();
    for k in 0..data.jac_x.ncols() {
        rows.push(HRow::eq(data.jac_x.col(k), ybar.0[k].clone()));
    }
    Ok(Polyhedron::new(m, rows))
}

/// First-order qualification condition (1qc):
/// ∂^∞θ(h(x̄)) ∩ ker ∇h(x̄)^* = {0}. Returns a nonzero witness on failure.
pub fn check_first_order_qc(
    theta: &PLQFunction,
    h: &InnerMap,
    xbar: &RatVector,
) -> Result<(bool, Option<RatVector>)> {
    let data = h.data_at(xbar)?;
    let singular = theta.singular_subdifferential(&data.value)?;
    let m = singular.ambient_dim();
    let mut rows = singular.as_polyhedron().rows().to_vec();
    for k in 0..data.jac_x.ncols() {
        rows.push(HRow::eq(data.jac_x.col(k), zero()));
    }
    let inter = PolyCone::from_rows(m, rows);
    match inter.nonzero_element() {
        Some(w) => Ok((false, Some(w))),
        None => Ok((true, None)),
    }
}

/// Outcome of the basic second-order qualification condition (2qc1).
#[derive(Clone, Debug)]
pub struct SecondOrderQc {
    pub holds: bool,
    /// On failure: the multiplier v and a nonzero vector of
    /// ∂²θ(z̄; v)(0) ∩ ker ∇h(x̄)^*.
    pub witness: Option<(RatVector, RatVector)>,
}

/// Second-order qualification condition (2qc1):
/// ∂²θ(z̄; v)(0) ∩ ker ∇h(x̄)^* = {0} for every v ∈ M(x̄, ȳ), checked at one
/// relative-interior representative per closed face of the multiplier set.
pub fn check_second_order_qc(
    theta: &PLQFunction,
    h: &InnerMap,
    xbar: &RatVector,
    ybar: &RatVector,
) -> Result<SecondOrderQc> {
    let data = h.data_at(xbar)?;
    let mset = multiplier_set(theta, h, xbar, ybar)?;
    if mset.is_empty() {
        return Err(Error::NotSubgradient);
    }
    let m = theta.ambient_dim();
    let ker = Subspace::from_vectors(&nullspace(&data.jac_x.transpose()), m);
    for face in mset.faces()? {
        let v = face.rel_interior_point()?;
        for s in crate::soc::soc_at_zero(theta, &data.value, &v)? {
            let inter = s.intersect(&ker);
            if !inter.is_zero() {
                return Ok(SecondOrderQc {
                    holds: false,
                    witness: Some((v, inter.basis()[0].clone())),
                });
            }
        }
    }
    Ok(SecondOrderQc {
        holds: true,
        witness: None,
    })
}

/// Whether the result is an exact value map or an upper estimate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResultKind {
    Exact,
    /// Upper estimate from the strongly-amenable chain rule; records whether
    /// (2qc1) was verified or overridden.
    UpperEstimate {
        qc2_verified: bool,
    },
}

/// One multiplier representative with its curvature term and cached
/// second-order system.
#[derive(Clone, Debug)]
pub struct ChainRep {
    pub v: RatVector,
    /// ∇²<v, h>(x̄), n×n.
    pub curvature: RatMatrix,
    pub system: FacePairSystem,
}

/// A computed second-order chain rule: value map
/// u ↦ ⋃_reps ∇²<v,h>(x̄)u + ∇h(x̄)^* ∂²θ(z̄,v)(∇h(x̄)u).
#[derive(Clone, Debug)]
pub struct ChainRuleResult {
    pub kind: ResultKind,
    pub reps: Vec<ChainRep>,
    /// ∇h(x̄), m×n.
    pub jac: RatMatrix,
}

impl ChainRuleResult {
    pub fn input_dim(&self) -> usize {
        self.jac.ncols()
    }

    /// The value set at direction u as a finite union of polyhedra in R^n.
    pub fn value(&self, u: &RatVector) -> Result<PolyUnion> {
        let n = self.input_dim();
        if u.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: u.len(),
            });
        }
        let jt = self.jac.transpose();
        let mut pieces = Vec::new();
        for rep in &self.reps {
            let ju = self.jac.mul_vec(u);
            let inner = rep.system.value(&ju)?;
            let offset = rep.curvature.mul_vec(u);
            for piece in inner.pieces {
                pieces.push(piece.affine_image(&jt, &offset));
            }
        }
        Ok(PolyUnion::new(n, pieces).dedup())
    }

    /// Membership w ∈ value(u) without materializing images: solves
    /// ∇h^* s = w - ∇²<v,h>u and intersects the solution set with
    /// ∂²θ(z̄,v)(∇h u).
    pub fn membership(&self, u: &RatVector, w: &RatVector) -> Result<bool> {
        let jt = self.jac.transpose();
        let m = self.jac.nrows();
        for rep in &self.reps {
            let rhs = w - &rep.curvature.mul_vec(u);
            if solve_affine(&jt, &rhs).is_err() {
                continue;
            }
            let ju = self.jac.mul_vec(u);
            let inner = rep.system.value(&ju)?;
            // affine solution set as a polyhedron {s : J^T s = rhs}
            let mut rows = Vec::new();
            for k in 0..jt.nrows() {
                rows.push(HRow::eq(jt.row(k), rhs.0[k].clone()));
            }
            let sol_set = Polyhedron::new(m, rows);
            if inner
                .pieces
                .iter()
                .any(|p| !p.intersect(&sol_set).is_empty())
            {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Exact second-order chain rule under the full row rank condition
/// rank ∇h(x̄) = m; the multiplier v̄ with ∇h(x̄)^*v̄ = ȳ is unique.
pub fn chain_full_rank(
    theta: &PLQFunction,
    h: &InnerMap,
    xbar: &RatVector,
    ybar: &RatVector,
) -> Result<ChainRuleResult> {
    let data = h.data_at(xbar)?;
    let m = data.jac_x.nrows();
    if rank(&data.jac_x) != m {
        return Err(Error::RankDeficient);
    }
    let jt = data.jac_x.transpose();
    let sol = solve_affine(&jt, ybar).map_err(|_| Error::NotSubgradient)?;
    let vbar = sol.particular;
    if !theta.is_subgradient(&data.value, &vbar)? {
        return Err(Error::NotSubgradient);
    }
    let system = soc_system(theta, &data.value, &vbar)?;
    let curvature = data.scalarized_hessian(&vbar);
    Ok(ChainRuleResult {
        kind: ResultKind::Exact,
        reps: vec![ChainRep {
            v: vbar,
            curvature,
            system,
        }],
        jac: data.jac_x,
    })
}

/// Upper-estimate chain rule for strongly amenable compositions: the union
/// over one relative-interior representative per closed face of the
/// multiplier set. Requires (1qc); requires (2qc1) unless `override_qc2`
/// acknowledges the estimate may be invalid.
pub fn chain_amenable_upper(
    theta: &PLQFunction,
    h: &InnerMap,
    xbar: &RatVector,
    ybar: &RatVector,
    override_qc2: bool,
) -> Result<ChainRuleResult> {
    let data = h.data_at(xbar)?;
    let (qc1, _) = check_first_order_qc(theta, h, xbar)?;
    if !qc1 {
        return Err(Error::QcViolation);
    }
    let qc2 = check_second_order_qc(theta, h, xbar, ybar)?;
    if !qc2.holds && !override_qc2 {
        return Err(Error::QcViolation);
    }
    let mset = multiplier_set(theta, h, xbar, ybar)?;
    if mset.is_empty() {
        return Err(Error::NotSubgradient);
    }
    let mut reps = Vec::new();
    for face in mset.faces()? {
        let v = face.rel_interior_point()?;
        let system = soc_system(theta, &data.value, &v)?;
        let curvature = data.scalarized_hessian(&v);
        reps.push(ChainRep {
            v,
            curvature,
            system,
        });
    }
    Ok(ChainRuleResult {
        kind: ResultKind::UpperEstimate {
            qc2_verified: qc2.holds,
        },
        reps,
        jac: data.jac_x,
    })
}

/// Partial second-order chain rules: the (par1) result (parameters frozen)
/// plus the (par2) cross blocks, one per multiplier representative.
#[derive(Clone, Debug)]
pub struct PartialChainRuleResult {
    /// The (par1) value map, identical to the nonparametric rule.
    pub frozen: ChainRuleResult,
    /// ∇²_{wx}<v, h>(x̄, w̄) per representative, d×n each.
    pub cross_curvatures: Vec<RatMatrix>,
    /// ∇_w h(x̄, w̄), m×d.
    pub jac_w: RatMatrix,
}

impl PartialChainRuleResult {
    pub fn param_dim(&self) -> usize {
        self.jac_w.ncols()
    }

    /// The (par2) value set at u, in R^{n+d}: the union over representatives
    /// of the pairs (∇²_{xx}<v,h>u + ∇_x h^* s, ∇²_{wx}<v,h>u + ∇_w h^* s)
    /// with s ∈ ∂²θ(z̄,v)(∇_x h u).
    pub fn extended_value(&self, u: &RatVector) -> Result<PolyUnion> {
        let n = self.frozen.input_dim();
        let d = self.param_dim();
        if u.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: u.len(),
            });
        }
        let jxt = self.frozen.jac.transpose(); // n×m
        let jwt = self.jac_w.transpose(); // d×m
        let stacked = jxt.vstack(&jwt); // (n+d)×m
        let ju = self.frozen.jac.mul_vec(u);
        let mut pieces = Vec::new();
        for (rep, cross) in self.frozen.reps.iter().zip(self.cross_curvatures.iter()) {
            let offset = rep.curvature.mul_vec(u).concat(&cross.mul_vec(u));
            let inner = rep.system.value(&ju)?;
            pieces.extend(
                inner
                    .pieces
                    .into_iter()
                    .map(|p| p.affine_image(&stacked, &offset)),
            );
        }
        Ok(PolyUnion::new(n + d, pieces).dedup())
    }
}

fn partial_blocks(data: &PointData, frozen: &ChainRuleResult) -> (RatMatrix, Vec<RatMatrix>) {
    let n = frozen.input_dim();
    match &data.param {
        Some(p) => (
            p.jac_w.clone(),
            frozen
                .reps
                .iter()
                .map(|r| data.scalarized_cross_hessian(&r.v).expect("param block"))
                .collect(),
        ),
        None => (
            RatMatrix::zeros(data.jac_x.nrows(), 0),
            frozen.reps.iter().map(|_| RatMatrix::zeros(0, n)).collect(),
        ),
    }
}

/// Exact partial chain rules (rank1)/(rank2) under rank ∇_x h(x̄, w̄) = m.
/// Inner maps without a parameter block get d = 0 and both results coincide
/// with [`chain_full_rank`].
pub fn chain_partial_full_rank(
    theta: &PLQFunction,
    h: &InnerMap,
    xbar: &RatVector,
    ybar: &RatVector,
) -> Result<PartialChainRuleResult> {
    let data = h.data_at(xbar)?;
    let frozen = chain_full_rank(theta, h, xbar, ybar)?;
    let (jac_w, cross_curvatures) = partial_blocks(&data, &frozen);
    Ok(PartialChainRuleResult {
        frozen,
        cross_curvatures,
        jac_w,
    })
}

/// Partial upper-estimate chain rules (am1)/(am2) for strongly amenable
/// compositions with a parameter block, with the same representative scheme
/// and qualification handling as [`chain_amenable_upper`].
pub fn chain_partial_amenable_upper(
    theta: &PLQFunction,
    h: &InnerMap,
    xbar: &RatVector,
    ybar: &RatVector,
    override_qc2: bool,
) -> Result<PartialChainRuleResult> {
    let data = h.data_at(xbar)?;
    let frozen = chain_amenable_upper(theta, h, xbar, ybar, override_qc2)?;
    let (jac_w, cross_curvatures) = partial_blocks(&data, &frozen);
    Ok(PartialChainRuleResult {
        frozen,
        cross_curvatures,
        jac_w,
    })
}

/// Ground-truth second-order value for a φ that is directly representable as
/// a supported PLQ function (no inner map) — the left-hand side in
/// strictness tests.
pub fn direct_soc_when_available(
    phi: &PLQFunction,
    xbar: &RatVector,
    ybar: &RatVector,
    u: &RatVector,
) -> Result<PolyUnion> {
    soc_system(phi, xbar, ybar)?.value(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::poly::{nonpos_orthant, unit_simplex};
    use crate::rat::{rat, ratio};

    fn rv(xs: &[i64]) -> RatVector {
        RatVector::from_i64(xs)
    }

    fn example_a() -> RatMatrix {
        RatMatrix::from_i64(&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]])
    }

    fn example_theta() -> PLQFunction {
        PLQFunction::support_function(unit_simplex(4)).unwrap()
    }

    #[test]
    fn first_order_chain_examples() {
        // Example data: ∂φ(0) = A^T M = the ℓ¹ ball
        let theta = example_theta();
        let h = InnerMap::linear(&example_a());
        let sub = first_order_chain(&theta, &h, &RatVector::zeros(2)).unwrap();
        assert!(sub.set_eq(&catalog::ell1_ball(2)));

        // identity inner map, indicator θ: the normal cone
        let z = nonpos_orthant(2).into_polyhedron();
        let theta = PLQFunction::indicator(z.clone()).unwrap();
        let h = InnerMap::identity(2);
        let sub = first_order_chain(&theta, &h, &RatVector::zeros(2)).unwrap();
        assert!(sub.set_eq(z.normal_cone(&RatVector::zeros(2)).unwrap().as_polyhedron()));

        // θ = σ_{[0,1]} ⊂ R, h(x) = 2x at 0: ∂φ(0) = [0, 2]
        let c = Polyhedron::new(
            1,
            vec![HRow::le(rv(&[-1]), rat(0)), HRow::le(rv(&[1]), rat(1))],
        );
        let theta = PLQFunction::support_function(c).unwrap();
        let h = InnerMap::linear(&RatMatrix::from_i64(&[&[2]]));
        let sub = first_order_chain(&theta, &h, &RatVector::zeros(1)).unwrap();
        let expected = Polyhedron::new(
            1,
            vec![HRow::le(rv(&[-1]), rat(0)), HRow::le(rv(&[1]), rat(2))],
        );
        assert!(sub.set_eq(&expected));
    }

    #[test]
    fn multiplier_set_examples() {
        // Example at (0, 0): {(a,a,b,b) : a,b ≥ 0, 2a+2b = 1}
        let theta = example_theta();
        let h = InnerMap::linear(&example_a());
        let mset = multiplier_set(&theta, &h, &RatVector::zeros(2), &RatVector::zeros(2)).unwrap();
        let vbar = RatVector(vec![ratio(1, 2), ratio(1, 2), rat(0), rat(0)]);
        assert!(mset.contains_point(&vbar));
        assert!(mset.contains_point(&RatVector(vec![
            ratio(1, 4),
            ratio(1, 4),
            ratio(1, 4),
            ratio(1, 4)
        ])));
        assert!(!mset.contains_point(&RatVector(vec![rat(1), rat(0), rat(0), rat(0)])));
        // it is the segment between (½,½,0,0) and (0,0,½,½)
        assert_eq!(mset.vrep().vertices.len(), 2);

        // full-rank (identity) → singleton
        let z = nonpos_orthant(2).into_polyhedron();
        let theta = PLQFunction::indicator(z).unwrap();
        let h = InnerMap::identity(2);
        let mset = multiplier_set(&theta, &h, &RatVector::zeros(2), &rv(&[1, 0])).unwrap();
        assert!(mset.set_eq(&Polyhedron::point(&rv(&[1, 0]))));
    }

    #[test]
    fn first_order_qc_examples() {
        // locally Lipschitz θ (bounded C): singular subdifferential {0}
        let theta = example_theta();
        let h = InnerMap::linear(&example_a());
        let (ok, w) = check_first_order_qc(&theta, &h, &RatVector::zeros(2)).unwrap();
        assert!(ok && w.is_none());

        // full rank ∇h: trivial kernel
        let theta = PLQFunction::indicator(nonpos_orthant(1).into_polyhedron()).unwrap();
        let h = InnerMap::identity(1);
        let (ok, _) = check_first_order_qc(&theta, &h, &RatVector::zeros(1)).unwrap();
        assert!(ok);

        // θ = δ_{{0}} ⊂ R, h ≡ 0 from one variable: fails with witness
        let theta = PLQFunction::indicator(Polyhedron::point(&rv(&[0]))).unwrap();
        let h =
            InnerMap::Quadratic(QuadraticMap::new(1, vec![QuadraticFn::linear(rv(&[0]))]).unwrap());
        let (ok, w) = check_first_order_qc(&theta, &h, &RatVector::zeros(1)).unwrap();
        assert!(!ok);
        assert!(!w.unwrap().is_zero());
    }

    #[test]
    fn second_order_qc_examples() {
        // the Example: (2qc1) fails with an explicit witness
        let theta = example_theta();
        let h = InnerMap::linear(&example_a());
        let qc =
            check_second_order_qc(&theta, &h, &RatVector::zeros(2), &RatVector::zeros(2)).unwrap();
        assert!(!qc.holds);
        let (v, dir) = qc.witness.unwrap();
        // verify the witness from first principles: dir ∈ ∂²θ(0; v)(0) ∩ ker A^T
        assert!(!dir.is_zero());
        let subs = crate::soc::soc_at_zero(&theta, &RatVector::zeros(4), &v).unwrap();
        assert!(subs.iter().any(|s| s.contains(&dir)));
        assert!(example_a().transpose().mul_vec(&dir).is_zero());

        // full rank: trivially true
        let theta2 = PLQFunction::indicator(nonpos_orthant(2).into_polyhedron()).unwrap();
        let h2 = InnerMap::identity(2);
        let qc = check_second_order_qc(&theta2, &h2, &RatVector::zeros(2), &rv(&[1, 0])).unwrap();
        assert!(qc.holds);

        // affine θ (singleton C): soc_at_zero = {0}
        let affine = PLQFunction::support_function(Polyhedron::point(&rv(&[1, 1]))).unwrap();
        let h3 = InnerMap::linear(&RatMatrix::from_i64(&[&[1, 0], &[0, 0]]));
        // ∂φ(x) = {A^T (1,1)} = {(1,0)}
        let qc = check_second_order_qc(&affine, &h3, &RatVector::zeros(2), &rv(&[1, 0])).unwrap();
        assert!(qc.holds);
    }

    #[test]
    fn chain_full_rank_identity_reproduces_soc() {
        let theta = PLQFunction::indicator(nonpos_orthant(2).into_polyhedron()).unwrap();
        let h = InnerMap::identity(2);
        let res = chain_full_rank(&theta, &h, &RatVector::zeros(2), &rv(&[0, 0])).unwrap();
        assert_eq!(res.kind, ResultKind::Exact);
        let sys = soc_system(&theta, &RatVector::zeros(2), &RatVector::zeros(2)).unwrap();
        for u in [rv(&[1, 0]), rv(&[-1, 2]), rv(&[0, 0])] {
            let lhs = res.value(&u).unwrap();
            let rhs = sys.value(&u).unwrap();
            assert!(lhs.set_eq(&rhs));
        }
    }

    #[test]
    fn chain_full_rank_vs_preimage_indicator() {
        // φ = δ_Z ∘ T = δ_{T^{-1}Z} for invertible T; compare the chain value
        // with the direct system for the preimage.
        let t = RatMatrix::from_i64(&[&[1, 1], &[0, 1]]);
        let z = nonpos_orthant(2).into_polyhedron();
        let theta = PLQFunction::indicator(z.clone()).unwrap();
        let h = InnerMap::linear(&t);
        // preimage: rows a∘T
        let pre_rows = z
            .rows()
            .iter()
            .map(|r| HRow {
                a: t.transpose().mul_vec(&r.a),
                rel: r.rel,
                b: r.b.clone(),
            })
            .collect();
        let pre = Polyhedron::new(2, pre_rows);
        let phi = PLQFunction::indicator(pre).unwrap();

        let xbar = RatVector::zeros(2);
        // pick ȳ = T^T v for a boundary multiplier v ∈ N_Z(0)
        let v = rv(&[1, 0]);
        let ybar = t.transpose().mul_vec(&v);
        let res = chain_full_rank(&theta, &h, &xbar, &ybar).unwrap();
        let direct = soc_system(&phi, &xbar, &ybar).unwrap();
        for u in [
            rv(&[0, 0]),
            rv(&[1, 0]),
            rv(&[0, -1]),
            rv(&[2, 3]),
            rv(&[-1, -1]),
        ] {
            let lhs = res.value(&u).unwrap();
            let rhs = direct.value(&u).unwrap();
            assert!(lhs.set_eq(&rhs), "mismatch at {u:?}");
        }
    }

    #[test]
    fn chain_rank_deficiency_error() {
        let theta = example_theta();
        let h = InnerMap::linear(&example_a()); // rank 2 < m = 4
        assert!(matches!(
            chain_full_rank(&theta, &h, &RatVector::zeros(2), &RatVector::zeros(2)),
            Err(Error::RankDeficient)
        ));
    }

    #[test]
    fn partial_chain_no_parameters_coincides() {
        let theta = PLQFunction::indicator(nonpos_orthant(1).into_polyhedron()).unwrap();
        let h = InnerMap::identity(1);
        let res = chain_partial_full_rank(&theta, &h, &RatVector::zeros(1), &rv(&[0])).unwrap();
        assert_eq!(res.param_dim(), 0);
        for u in [rv(&[1]), rv(&[-1])] {
            let v1 = res.frozen.value(&u).unwrap();
            let v2 = res.extended_value(&u).unwrap();
            // d = 0: both live in R^1 and must agree
            assert!(v1.set_eq(&v2));
        }
    }

    #[test]
    fn partial_chain_duplicated_block() {
        // h(x, w) = x + w, θ = δ_{R₋}: the (par2) value duplicates the
        // x-block through the identical parameter Jacobian.
        let data = PointData {
            value: RatVector::zeros(1),
            jac_x: RatMatrix::identity(1),
            hess_xx: vec![RatMatrix::zeros(1, 1)],
            param: Some(ParamBlock {
                jac_w: RatMatrix::identity(1),
                hess_wx: vec![RatMatrix::zeros(1, 1)],
            }),
        };
        let theta = PLQFunction::indicator(nonpos_orthant(1).into_polyhedron()).unwrap();
        let h = InnerMap::Point(data);
        let res = chain_partial_full_rank(&theta, &h, &RatVector::zeros(1), &rv(&[0])).unwrap();
        let val = res.extended_value(&rv(&[1])).unwrap();
        // ∂²δ(0,0)(1) = R₊, so the extended value is the diagonal ray
        assert!(val.contains_point(&rv(&[2, 2])));
        assert!(val.contains_point(&rv(&[0, 0])));
        assert!(!val.contains_point(&rv(&[1, 0])));
    }

    #[test]
    fn partial_chain_smooth_sanity() {
        // affine θ via singleton C: (par1) value {∇²xx u}, (par2) adds the
        // cross block {(∇²xx u, ∇²wx u)}.
        let hxx = RatMatrix::from_i64(&[&[2]]);
        let hwx = RatMatrix::from_i64(&[&[3]]);
        let data = PointData {
            value: rv(&[0]),
            jac_x: RatMatrix::identity(1),
            hess_xx: vec![hxx],
            param: Some(ParamBlock {
                jac_w: RatMatrix::zeros(1, 1),
                hess_wx: vec![hwx],
            }),
        };
        let theta = PLQFunction::support_function(Polyhedron::point(&rv(&[1]))).unwrap();
        let h = InnerMap::Point(data);
        // ȳ = ∇h^T v = 1
        let res = chain_partial_full_rank(&theta, &h, &RatVector::zeros(1), &rv(&[1])).unwrap();
        let v1 = res.frozen.value(&rv(&[1])).unwrap();
        assert!(v1.contains_point(&rv(&[2])));
        assert!(!v1.contains_point(&rv(&[3])));
        let v2 = res.extended_value(&rv(&[1])).unwrap();
        assert!(v2.contains_point(&rv(&[2, 3])));
        assert!(!v2.contains_point(&rv(&[2, 0])));
    }

    #[test]
    fn partial_amenable_matches_partial_full_rank_when_unique() {
        let data = PointData {
            value: RatVector::zeros(1),
            jac_x: RatMatrix::identity(1),
            hess_xx: vec![RatMatrix::zeros(1, 1)],
            param: Some(ParamBlock {
                jac_w: RatMatrix::identity(1),
                hess_wx: vec![RatMatrix::zeros(1, 1)],
            }),
        };
        let theta = PLQFunction::indicator(nonpos_orthant(1).into_polyhedron()).unwrap();
        let h = InnerMap::Point(data);
        let exact = chain_partial_full_rank(&theta, &h, &RatVector::zeros(1), &rv(&[0])).unwrap();
        let upper =
            chain_partial_amenable_upper(&theta, &h, &RatVector::zeros(1), &rv(&[0]), false)
                .unwrap();
        for u in [rv(&[1]), rv(&[-1]), rv(&[0])] {
            assert!(exact
                .extended_value(&u)
                .unwrap()
                .set_eq(&upper.extended_value(&u).unwrap()));
        }
    }

    #[test]
    fn amenable_upper_reduces_to_full_rank() {
        let theta = PLQFunction::indicator(nonpos_orthant(2).into_polyhedron()).unwrap();
        let h = InnerMap::identity(2);
        let ybar = rv(&[1, 0]);
        let upper = chain_amenable_upper(&theta, &h, &RatVector::zeros(2), &ybar, false).unwrap();
        let exact = chain_full_rank(&theta, &h, &RatVector::zeros(2), &ybar).unwrap();
        assert_eq!(upper.reps.len(), 1);
        for u in [rv(&[1, 1]), rv(&[0, -1]), rv(&[2, 0])] {
            assert!(upper.value(&u).unwrap().set_eq(&exact.value(&u).unwrap()));
        }
    }

    #[test]
    fn amenable_upper_strictness_on_example() {
        // With the Example's data and the override flag, the upper-estimate
        // value at ū = (0,1) is nonempty (it contains (0,1) = A^T(0,0,1,0))
        // while the direct value of φ = σ_B is empty: strict inclusion.
        let theta = example_theta();
        let h = InnerMap::linear(&example_a());
        let xbar = RatVector::zeros(2);
        let ybar = RatVector::zeros(2);
        // without the override the qc violation is an error
        assert!(matches!(
            chain_amenable_upper(&theta, &h, &xbar, &ybar, false),
            Err(Error::QcViolation)
        ));
        let upper = chain_amenable_upper(&theta, &h, &xbar, &ybar, true).unwrap();
        assert_eq!(
            upper.kind,
            ResultKind::UpperEstimate {
                qc2_verified: false
            }
        );
        let ubar = rv(&[0, 1]);
        let rhs = upper.value(&ubar).unwrap();
        assert!(rhs.contains_point(&rv(&[0, 1])));
        assert!(upper.membership(&ubar, &rv(&[0, 1])).unwrap());

        let phi = PLQFunction::support_function(catalog::ell1_ball(2)).unwrap();
        let lhs = direct_soc_when_available(&phi, &xbar, &ybar, &ubar).unwrap();
        assert!(lhs.is_empty());

        // at ū = 0 the inclusion LHS ⊆ RHS holds: LHS = R², probe a grid
        let lhs0 = direct_soc_when_available(&phi, &xbar, &ybar, &RatVector::zeros(2)).unwrap();
        let rhs0 = upper.value(&RatVector::zeros(2)).unwrap();
        for x in -2..=2i64 {
            for y in -2..=2i64 {
                let w = rv(&[x, y]);
                assert!(lhs0.contains_point(&w));
                assert!(rhs0.contains_point(&w), "RHS misses {w:?}");
            }
        }
    }

    #[test]
    fn first_order_chain_contains_adjoint_images() {
        // ∂φ(x̄) ⊇ ∇h(x̄)^* v for every vertex v of ∂θ(h(x̄))
        let cases: Vec<(PLQFunction, RatMatrix, RatVector)> = vec![
            (example_theta(), example_a(), RatVector::zeros(2)),
            (
                PLQFunction::indicator(nonpos_orthant(2).into_polyhedron()).unwrap(),
                RatMatrix::from_i64(&[&[1, 1], &[0, 1]]),
                RatVector::zeros(2),
            ),
            (
                PLQFunction::support_function(unit_simplex(2)).unwrap(),
                RatMatrix::from_i64(&[&[2, 0], &[1, 1]]),
                RatVector::zeros(2),
            ),
        ];
        for (theta, a, xbar) in cases {
            let h = InnerMap::linear(&a);
            let data = h.data_at(&xbar).unwrap();
            let image = first_order_chain(&theta, &h, &xbar).unwrap();
            let sub = theta.subdifferential(&data.value).unwrap();
            for v in &sub.vrep().vertices {
                let y = a.transpose().mul_vec(v);
                assert!(image.contains_point(&y));
            }
        }
    }

    #[test]
    fn full_rank_qc_always_holds() {
        // (2qc1) holds whenever rank ∇h = m
        let t = RatMatrix::from_i64(&[&[2, 1], &[1, 1]]);
        let theta = PLQFunction::indicator(nonpos_orthant(2).into_polyhedron()).unwrap();
        let h = InnerMap::linear(&t);
        let ybar = t.transpose().mul_vec(&rv(&[1, 0]));
        let qc = check_second_order_qc(&theta, &h, &RatVector::zeros(2), &ybar).unwrap();
        assert!(qc.holds);
    }
}
