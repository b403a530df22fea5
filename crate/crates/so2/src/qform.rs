//! Exact positivity of a rational quadratic form over a polyhedral cone.
//!
//! Decides whether y^T M y > 0 for every y in the cone whose marked coordinate
//! block is nonzero. Negativity is decided by folding the form onto the cone
//! generators (free minimization over the lineality block, then a complete
//! critical-point scan of the resulting copositivity problem over the
//! simplex); boundary zeros are found by a PSD-kernel scan over the closed
//! faces. Everything is rational; no rounding.
//!
//! Precondition: the form is nonnegative on the block-zero slice of the cone
//! (true for the tilt T-map forms, where the slice value is identically 0).

use crate::linalg::{
    psd_check, restrict_form, solve_affine, span_basis, PsdOutcome, RatMatrix, RatVector,
};
use crate::poly::{HRow, PolyCone, Polyhedron};
use crate::rat::{rat, zero, Rat};
use crate::{Error, Result};
use num::{Signed, Zero};
use std::ops::Range;

/// Outcome of the positivity decision.
#[derive(Clone, Debug)]
pub enum ConeSign {
    /// q(y) > 0 for all y in the cone with nonzero marked block.
    Positive,
    /// A witness y in the cone with nonzero marked block and q(y) ≤ 0.
    Failure { point: RatVector, value: Rat },
}

impl ConeSign {
    pub fn is_positive(&self) -> bool {
        matches!(self, ConeSign::Positive)
    }
}

fn block_nonzero(y: &RatVector, block: &Range<usize>) -> bool {
    y.0[block.clone()].iter().any(|x| !x.is_zero())
}

/// Decides q > 0 on cone ∖ {y : the `block` coordinates of y vanish}, exactly.
pub fn positive_on_cone_off_block(
    cone: &PolyCone,
    form: &RatMatrix,
    block: Range<usize>,
) -> Result<ConeSign> {
    if !form.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let dim = cone.ambient_dim();
    if form.nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: form.nrows(),
        });
    }
    if let Some(fail) = negative_point(cone, form)? {
        debug_assert!(
            block_nonzero(&fail, &block),
            "form is negative on the block-zero slice"
        );
        let value = form.quad_form(&fail, &fail);
        return Ok(ConeSign::Failure { point: fail, value });
    }
    // q ≥ 0 on the cone; look for zeros with nonzero block on closed faces
    for face in cone.faces()? {
        let (rays, lin) = face.generators();
        let mut gens = rays;
        gens.extend(lin);
        let basis = span_basis(&gens, dim);
        if basis.is_empty() {
            continue;
        }
        let restricted = restrict_form(form, &basis);
        match psd_check(&restricted)? {
            PsdOutcome::NotPsd { .. } => continue, // no zeros in the relative interior
            PsdOutcome::Psd { .. } => {
                // zero set of q on span(face): {y ∈ span : B^T M y = 0}
                let mut rows = face.as_polyhedron().rows().to_vec();
                for b in &basis {
                    rows.push(HRow::eq(form.mul_vec(b), zero()));
                }
                let zcone = PolyCone::from_rows(dim, rows);
                let (zr, zl) = zcone.generators();
                for g in zr.into_iter().chain(zl) {
                    if block_nonzero(&g, &block) {
                        let value = form.quad_form(&g, &g);
                        debug_assert!(value.is_zero());
                        return Ok(ConeSign::Failure { point: g, value });
                    }
                }
            }
        }
    }
    Ok(ConeSign::Positive)
}

/// A point of the cone with strictly negative form value, or None when the
/// form is nonnegative on the whole cone.
fn negative_point(cone: &PolyCone, form: &RatMatrix) -> Result<Option<RatVector>> {
    let (rays, lin) = cone.generators();
    let k = rays.len();
    let j = lin.len();
    if k == 0 && j == 0 {
        return Ok(None);
    }
    if k > 16 {
        return Err(Error::FaceBudget {
            needed: 1u128 << k,
            cap: 1u128 << 16,
        });
    }
    let dim = cone.ambient_dim();
    // fold the form onto generator coordinates
    let mut cols: Vec<RatVector> = rays.clone();
    cols.extend(lin.iter().cloned());
    let gmat = RatMatrix::from_rows(cols, dim).transpose(); // dim × (k+j)
    let folded = gmat.transpose().mul_mat(&form.mul_mat(&gmat)); // (k+j)²

    let lift = |alpha: &[Rat], beta: &[Rat]| -> RatVector {
        let mut y = RatVector::zeros(dim);
        for (c, r) in alpha.iter().zip(rays.iter()) {
            y = &y + &r.scale(c);
        }
        for (c, l) in beta.iter().zip(lin.iter()) {
            y = &y + &l.scale(c);
        }
        y
    };

    // free block over the lineality coordinates
    if j > 0 {
        let mut cmat = RatMatrix::zeros(j, j);
        for a in 0..j {
            for b in 0..j {
                cmat.set(a, b, folded.at(k + a, k + b).clone());
            }
        }
        match psd_check(&cmat)? {
            PsdOutcome::NotPsd { witness } => {
                return Ok(Some(lift(&vec![zero(); k], &witness.0)));
            }
            PsdOutcome::Psd { kernel } => {
                // coupling of ray directions with the flat lineality kernel
                for kappa in &kernel {
                    for i in 0..k {
                        let mut coupling = zero();
                        for b in 0..j {
                            coupling += folded.at(i, k + b) * &kappa.0[b];
                        }
                        if !coupling.is_zero() {
                            // q(G_i + τ L κ) = A_ii + 2 τ coupling: pick τ
                            let aii = folded.at(i, i).clone();
                            let tau = -(aii + rat(1)) / (rat(2) * &coupling);
                            let mut alpha = vec![zero(); k];
                            alpha[i] = rat(1);
                            let beta: Vec<Rat> = kappa.0.iter().map(|x| x * &tau).collect();
                            let y = lift(&alpha, &beta);
                            debug_assert!(form.quad_form(&y, &y).is_negative());
                            return Ok(Some(y));
                        }
                    }
                }
                if k == 0 {
                    return Ok(None);
                }
                // eliminate the lineality block: M̃ = A - B X with C X = B^T
                let mut reduced = RatMatrix::zeros(k, k);
                // columns of X: solve C x = B^T e_i
                let mut xcols: Vec<RatVector> = Vec::with_capacity(k);
                for i in 0..k {
                    let bi = RatVector((0..j).map(|b| folded.at(i, k + b).clone()).collect());
                    let sol = solve_affine(&cmat, &bi)?;
                    xcols.push(sol.particular);
                }
                for p in 0..k {
                    for qi in 0..k {
                        let mut v = folded.at(p, qi).clone();
                        for b in 0..j {
                            v -= folded.at(p, k + b) * &xcols[qi].0[b];
                        }
                        reduced.set(p, qi, v);
                    }
                }
                return copositive_scan(&reduced, &|alpha| {
                    let beta: Vec<Rat> = (0..j)
                        .map(|b| {
                            let mut acc = zero();
                            for (i, a) in alpha.iter().enumerate() {
                                acc -= &xcols[i].0[b] * a;
                            }
                            acc
                        })
                        .collect();
                    lift(alpha, &beta)
                });
            }
        }
    }
    // pure ray case
    let mut amat = RatMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            amat.set(a, b, folded.at(a, b).clone());
        }
    }
    copositive_scan(&amat, &|alpha| lift(alpha, &[]))
}

/// Complete negative-value search for α^T M α over the unit simplex: for each
/// support S, solve the face-wise critical-point system 2 M_S α = μ1,
/// 1^T α = 1 (the critical value is μ/2 and is unique), and when μ/2 < 0 test
/// whether a nonnegative solution exists. The global minimizer's support
/// always yields such a system, so a miss certifies copositivity.
fn copositive_scan(m: &RatMatrix, lift: &dyn Fn(&[Rat]) -> RatVector) -> Result<Option<RatVector>> {
    let k = m.nrows();
    for mask in 1u32..(1u32 << k) {
        let support: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let s = support.len();
        // unknowns: (α_S, μ)
        let mut sys = RatMatrix::zeros(s + 1, s + 1);
        let mut rhs = RatVector::zeros(s + 1);
        for (r, &i) in support.iter().enumerate() {
            for (c, &jj) in support.iter().enumerate() {
                sys.set(r, c, m.at(i, jj).clone() * rat(2));
            }
            sys.set(r, s, rat(-1));
        }
        for c in 0..s {
            sys.set(s, c, rat(1));
        }
        rhs.0[s] = rat(1);
        let Ok(sol) = solve_affine(&sys, &rhs) else {
            continue;
        };
        let mu = sol.particular.0[s].clone();
        if !(mu.clone() / rat(2)).is_negative() {
            continue;
        }
        // nonnegative solution of the same affine system?
        let mut rows: Vec<HRow> = Vec::new();
        for r in 0..(s + 1) {
            rows.push(HRow::eq(sys.row(r), rhs.0[r].clone()));
        }
        for c in 0..s {
            rows.push(HRow::le(-&RatVector::unit(s + 1, c), zero()));
        }
        let feas = Polyhedron::new(s + 1, rows);
        if feas.is_empty() {
            continue;
        }
        let pt = feas.rel_interior_point()?;
        let mut alpha = vec![zero(); k];
        for (c, &i) in support.iter().enumerate() {
            alpha[i] = pt.0[c].clone();
        }
        let val = {
            let av = RatVector(alpha.clone());
            m.quad_form(&av, &av)
        };
        if val.is_negative() {
            return Ok(Some(lift(&alpha)));
        }
    }
    Ok(None)
}
