//! Exact rational vectors, matrices and the elimination routines every other
//! module leans on: rank, nullspace, affine solves and positive-(semi)definite
//! decisions with certificates.

use crate::rat::{rat, zero, Rat};
use crate::{Error, Result};
use num::{Signed, Zero};
use std::fmt;
use std::ops::{Add, Neg, Sub};

/// Dense rational vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatVector(pub Vec<Rat>);

/// Dense rational matrix, row major.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl fmt::Debug for RatVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl RatVector {
    pub fn zeros(n: usize) -> Self {
        RatVector(vec![zero(); n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = rat(1);
        v
    }

    pub fn from_i64(xs: &[i64]) -> Self {
        RatVector(xs.iter().map(|&x| rat(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn dot(&self, other: &RatVector) -> Rat {
        assert_eq!(self.len(), other.len(), "dot dimension mismatch");
        let mut acc = zero();
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            acc += a * b;
        }
        acc
    }

    pub fn scale(&self, c: &Rat) -> RatVector {
        RatVector(self.0.iter().map(|x| x * c).collect())
    }

    /// Concatenates two vectors.
    pub fn concat(&self, other: &RatVector) -> RatVector {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        RatVector(v)
    }

    /// Scales by the least common denominator and divides by the gcd, keeping
    /// the sign. The canonical representative of the open ray through `self`.
    pub fn primitive(&self) -> RatVector {
        use num::bigint::BigInt;
        use num::Integer;
        if self.is_zero() {
            return self.clone();
        }
        let mut lcm = BigInt::from(1);
        for x in &self.0 {
            lcm = lcm.lcm(x.denom());
        }
        let ints: Vec<BigInt> = self
            .0
            .iter()
            .map(|x| x.numer() * (&lcm / x.denom()))
            .collect();
        let mut g = BigInt::from(0);
        for z in &ints {
            g = g.gcd(z);
        }
        RatVector(ints.iter().map(|z| Rat::from_integer(z / &g)).collect())
    }
}

impl Add for &RatVector {
    type Output = RatVector;
    fn add(self, rhs: &RatVector) -> RatVector {
        assert_eq!(self.len(), rhs.len());
        RatVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &RatVector {
    type Output = RatVector;
    fn sub(self, rhs: &RatVector) -> RatVector {
        assert_eq!(self.len(), rhs.len());
        RatVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &RatVector {
    type Output = RatVector;
    fn neg(self) -> RatVector {
        RatVector(self.0.iter().map(|a| -a).collect())
    }
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, rat(1));
        }
        m
    }

    pub fn from_rows(rows: Vec<RatVector>, cols: usize) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "row length mismatch");
            data.extend(r.0);
        }
        RatMatrix {
            rows: n,
            cols,
            data,
        }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(rows.iter().map(|r| RatVector::from_i64(r)).collect(), cols)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &Rat {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rat) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> RatVector {
        RatVector(self.data[r * self.cols..(r + 1) * self.cols].to_vec())
    }

    pub fn col(&self, c: usize) -> RatVector {
        RatVector((0..self.rows).map(|r| self.at(r, c).clone()).collect())
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut t = RatMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.at(r, c).clone());
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for r in 0..self.rows {
            for c in (r + 1)..self.cols {
                if self.at(r, c) != self.at(c, r) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn mul_vec(&self, v: &RatVector) -> RatVector {
        assert_eq!(self.cols, v.len(), "mat-vec dimension mismatch");
        RatVector(
            (0..self.rows)
                .map(|r| {
                    let mut acc = zero();
                    for c in 0..self.cols {
                        acc += self.at(r, c) * &v.0[c];
                    }
                    acc
                })
                .collect(),
        )
    }

    pub fn mul_mat(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows, "mat-mat dimension mismatch");
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = zero();
                for k in 0..self.cols {
                    acc += self.at(r, k) * other.at(k, c);
                }
                out.set(r, c, acc);
            }
        }
        out
    }

    pub fn add_mat(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a = &*a + b;
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> RatMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = &*a * c;
        }
        out
    }

    /// x^T M y for a square matrix.
    pub fn quad_form(&self, x: &RatVector, y: &RatVector) -> Rat {
        self.mul_vec(y).dot(x)
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        RatMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }
}

/// Reduced row echelon form. Returns (rref, pivot columns).
pub fn rref(m: &RatMatrix) -> (RatMatrix, Vec<usize>) {
    let mut a = m.clone();
    let (rows, cols) = (a.nrows(), a.ncols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a.at(i, c).is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                let tmp = a.at(r, j).clone();
                a.set(r, j, a.at(p, j).clone());
                a.set(p, j, tmp);
            }
        }
        let inv = rat(1) / a.at(r, c).clone();
        for j in 0..cols {
            let v = a.at(r, j) * &inv;
            a.set(r, j, v);
        }
        for i in 0..rows {
            if i != r && !a.at(i, c).is_zero() {
                let f = a.at(i, c).clone();
                for j in 0..cols {
                    let v = a.at(i, j) - &(a.at(r, j) * &f);
                    a.set(i, j, v);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Exact rank over the rationals.
pub fn rank(m: &RatMatrix) -> usize {
    rref(m).1.len()
}

/// Rational basis of {v : Mv = 0}. Empty iff the kernel is trivial.
pub fn nullspace(m: &RatMatrix) -> Vec<RatVector> {
    let (a, pivots) = rref(m);
    let cols = m.ncols();
    let mut basis = Vec::new();
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    for free in (0..cols).filter(|c| !pivot_set.contains(c)) {
        let mut v = RatVector::zeros(cols);
        v.0[free] = rat(1);
        for (r, &pc) in pivots.iter().enumerate() {
            v.0[pc] = -a.at(r, free).clone();
        }
        basis.push(v);
    }
    basis
}

/// Exact inverse of a square matrix, or None when singular.
pub fn inverse(m: &RatMatrix) -> Option<RatMatrix> {
    let n = m.nrows();
    if m.ncols() != n {
        return None;
    }
    let mut aug = RatMatrix::zeros(n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            aug.set(r, c, m.at(r, c).clone());
        }
        aug.set(r, n + r, rat(1));
    }
    let (red, pivots) = rref(&aug);
    if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    let mut inv = RatMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            inv.set(r, c, red.at(r, n + c).clone());
        }
    }
    Some(inv)
}

/// Solution set of Ax = b: a particular point plus a kernel basis.
#[derive(Clone, Debug)]
pub struct AffineSolutionSet {
    pub particular: RatVector,
    pub nullspace: Vec<RatVector>,
}

impl AffineSolutionSet {
    pub fn is_unique(&self) -> bool {
        self.nullspace.is_empty()
    }
}

/// Solves Ax = b exactly, reporting infeasibility.
pub fn solve_affine(a: &RatMatrix, b: &RatVector) -> Result<AffineSolutionSet> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    let cols = a.ncols();
    let mut aug = RatMatrix::zeros(a.nrows(), cols + 1);
    for r in 0..a.nrows() {
        for c in 0..cols {
            aug.set(r, c, a.at(r, c).clone());
        }
        aug.set(r, cols, b.0[r].clone());
    }
    let (red, pivots) = rref(&aug);
    if pivots.contains(&cols) {
        return Err(Error::Infeasible);
    }
    let mut x = RatVector::zeros(cols);
    for (r, &pc) in pivots.iter().enumerate() {
        x.0[pc] = red.at(r, cols).clone();
    }
    Ok(AffineSolutionSet {
        particular: x,
        nullspace: nullspace(a),
    })
}

/// Certificate-producing positive semidefiniteness decision for a symmetric
/// matrix, by symmetric elimination with free pivot order.
#[derive(Clone, Debug)]
pub enum PsdOutcome {
    /// PSD; carries a basis of the kernel {x : Mx = 0}.
    Psd { kernel: Vec<RatVector> },
    /// Not PSD; `witness` satisfies witness^T M witness < 0.
    NotPsd { witness: RatVector },
}

impl PsdOutcome {
    pub fn is_psd(&self) -> bool {
        matches!(self, PsdOutcome::Psd { .. })
    }
}

/// Decides PSD for symmetric `m`. Errors on non-symmetric input.
pub fn psd_check(m: &RatMatrix) -> Result<PsdOutcome> {
    if !m.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = m.nrows();
    // basis[i] maps current coordinate i back to original coordinates.
    let mut basis: Vec<RatVector> = (0..n).map(|i| RatVector::unit(n, i)).collect();
    let mut a = m.clone();
    let mut active: Vec<usize> = (0..n).collect();
    loop {
        let Some(&p) = active.iter().find(|&&i| !a.at(i, i).is_zero()) else {
            // all remaining diagonal entries are zero
            for (k, &i) in active.iter().enumerate() {
                for &j in active.iter().skip(k + 1) {
                    if !a.at(i, j).is_zero() {
                        // x = b_i - sign(a_ij) b_j has value -2|a_ij| < 0
                        let s = if a.at(i, j).is_positive() {
                            rat(1)
                        } else {
                            rat(-1)
                        };
                        let w = &basis[i] - &basis[j].scale(&s);
                        debug_assert!(m.quad_form(&w, &w).is_negative());
                        return Ok(PsdOutcome::NotPsd { witness: w });
                    }
                }
            }
            return Ok(PsdOutcome::Psd {
                kernel: active.iter().map(|&i| basis[i].clone()).collect(),
            });
        };
        let d = a.at(p, p).clone();
        if d.is_negative() {
            let w = basis[p].clone();
            debug_assert!(m.quad_form(&w, &w).is_negative());
            return Ok(PsdOutcome::NotPsd { witness: w });
        }
        active.retain(|&i| i != p);
        // eliminate row/column p from the active block
        let others: Vec<usize> = active.clone();
        for &i in &others {
            let f = a.at(i, p) / &d;
            if f.is_zero() {
                continue;
            }
            let adj = basis[p].scale(&f);
            basis[i] = &basis[i] - &adj;
            for &j in &others {
                let v = a.at(i, j) - &(&f * a.at(p, j));
                a.set(i, j, v);
            }
            a.set(i, p, zero());
            a.set(p, i, zero());
        }
        if active.is_empty() {
            return Ok(PsdOutcome::Psd { kernel: vec![] });
        }
    }
}

/// Strict positive definiteness of a symmetric matrix via in-order pivots
/// (equivalently: all leading principal minors positive).
pub fn pd_check(m: &RatMatrix) -> Result<bool> {
    if !m.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = m.nrows();
    let mut a = m.clone();
    for k in 0..n {
        let d = a.at(k, k).clone();
        if !d.is_positive() {
            return Ok(false);
        }
        for i in (k + 1)..n {
            let f = a.at(i, k) / &d;
            if f.is_zero() {
                continue;
            }
            for j in (k + 1)..n {
                let v = a.at(i, j) - &(&f * a.at(k, j));
                a.set(i, j, v);
            }
        }
    }
    Ok(true)
}

/// True iff u^T H u > 0 for every u in span(B), u != 0. The basis must be
/// linearly independent and H symmetric; decided by forming B^T H B and
/// checking its leading principal minors.
pub fn positive_definite_on_subspace(h: &RatMatrix, basis: &[RatVector]) -> Result<bool> {
    if !h.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    if basis.is_empty() {
        return Ok(true);
    }
    let n = h.nrows();
    for b in basis {
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
    }
    let bmat = RatMatrix::from_rows(basis.to_vec(), n).transpose(); // n x k
    if rank(&bmat) != basis.len() {
        return Err(Error::DependentBasis);
    }
    let restricted = bmat.transpose().mul_mat(&h.mul_mat(&bmat));
    pd_check(&restricted)
}

/// Restricts a symmetric form to span(basis): returns B^T M B.
pub fn restrict_form(m: &RatMatrix, basis: &[RatVector]) -> RatMatrix {
    let n = m.nrows();
    let bmat = RatMatrix::from_rows(basis.to_vec(), n).transpose();
    bmat.transpose().mul_mat(&m.mul_mat(&bmat))
}

/// Basis of the span of the given vectors, in RREF form.
pub fn span_basis(vectors: &[RatVector], dim: usize) -> Vec<RatVector> {
    let rows: Vec<RatVector> = vectors.iter().filter(|v| !v.is_zero()).cloned().collect();
    if rows.is_empty() {
        return vec![];
    }
    let m = RatMatrix::from_rows(rows, dim);
    let (red, pivots) = rref(&m);
    (0..pivots.len()).map(|r| red.row(r)).collect()
}

/// Basis of the intersection of two subspaces given by bases.
pub fn subspace_intersection(b1: &[RatVector], b2: &[RatVector], dim: usize) -> Vec<RatVector> {
    // x in span(b1) ∩ span(b2)  ⟺  x ⟂ complement rows of both
    let c1 = orthogonal_complement(b1, dim);
    let c2 = orthogonal_complement(b2, dim);
    let mut rows = c1;
    rows.extend(c2);
    if rows.is_empty() {
        return (0..dim).map(|i| RatVector::unit(dim, i)).collect();
    }
    nullspace(&RatMatrix::from_rows(rows, dim))
}

/// Basis of {x : <b, x> = 0 for all b in basis}.
pub fn orthogonal_complement(basis: &[RatVector], dim: usize) -> Vec<RatVector> {
    if basis.is_empty() {
        return (0..dim).map(|i| RatVector::unit(dim, i)).collect();
    }
    nullspace(&RatMatrix::from_rows(basis.to_vec(), dim))
}
