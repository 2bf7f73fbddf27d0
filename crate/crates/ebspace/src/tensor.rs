//! Dense complex linear algebra kernels.
//!
//! Everything operates on `nalgebra` dynamic matrices over `Complex<f64>`.
//! Subsystem bookkeeping uses row-major index flattening: for dims
//! `(d_0, .., d_{k-1})` the flat index of `(i_0, .., i_{k-1})` is
//! `((i_0 * d_1 + i_1) * d_2 + ..)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Complex scalar from real/imaginary parts.
#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Real scalar promoted to a complex one.
#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Ordered list of subsystem dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemDims(Vec<usize>);

impl SystemDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Domain("subsystem dimensions must be >= 1".into()));
        }
        Ok(SystemDims(dims))
    }

    pub fn bipartite(da: usize, db: usize) -> Self {
        SystemDims(vec![da, db])
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self, k: usize) -> usize {
        self.0[k]
    }

    fn check_total(&self, n: usize) -> Result<()> {
        if self.total() != n {
            return Err(Error::Dimensions(format!(
                "dims {:?} give total {}, object has {}",
                self.0,
                self.total(),
                n
            )));
        }
        Ok(())
    }
}

/// Computational basis vector `|i>` in dimension `dim`.
pub fn basis_vector(dim: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(dim);
    v[i] = cr(1.0);
    v
}

/// Outer product `|a><b|`.
pub fn outer(a: &CVec, b: &CVec) -> CMat {
    let mut m = CMat::zeros(a.len(), b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            m[(i, j)] = a[i] * b[j].conj();
        }
    }
    m
}

/// Kronecker product of matrices.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Kronecker product of column vectors.
pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn unflatten(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
    out
}

/// Partial trace over the subsystems *not* listed in `keep`.
///
/// `keep` is a set of subsystem indices; the output is the reduced operator
/// on the kept subsystems in their original order. Trace is preserved.
pub fn partial_trace(rho: &CMat, dims: &SystemDims, keep: &[usize]) -> Result<CMat> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::Dimensions(
            "partial_trace expects a square matrix".into(),
        ));
    }
    dims.check_total(rho.nrows())?;
    let n = dims.len();
    if keep.iter().any(|&k| k >= n) {
        return Err(Error::Dimensions(format!(
            "keep index out of range for {} subsystems",
            n
        )));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    let traced: Vec<usize> = (0..n).filter(|k| !keep.contains(k)).collect();

    let d = dims.dims();
    let st = strides(d);
    let kept_dims: Vec<usize> = keep.iter().map(|&k| d[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| d[k]).collect();
    let traced_total: usize = traced_dims.iter().product();

    let mut out = CMat::zeros(out_dim, out_dim);
    for (row_out, idx_r) in (0..out_dim).map(|i| (i, unflatten(i, &kept_dims))) {
        for (col_out, idx_c) in (0..out_dim).map(|i| (i, unflatten(i, &kept_dims))) {
            let mut acc = cr(0.0);
            for t in 0..traced_total {
                let idx_t = unflatten(t, &traced_dims);
                let mut row = 0usize;
                let mut col = 0usize;
                for (pos, &k) in keep.iter().enumerate() {
                    row += idx_r[pos] * st[k];
                    col += idx_c[pos] * st[k];
                }
                for (pos, &k) in traced.iter().enumerate() {
                    row += idx_t[pos] * st[k];
                    col += idx_t[pos] * st[k];
                }
                acc += rho[(row, col)];
            }
            out[(row_out, col_out)] = acc;
        }
    }
    Ok(out)
}

/// Partial transpose with respect to one subsystem.
pub fn partial_transpose(rho: &CMat, dims: &SystemDims, subsystem: usize) -> Result<CMat> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::Dimensions(
            "partial_transpose expects a square matrix".into(),
        ));
    }
    dims.check_total(rho.nrows())?;
    if subsystem >= dims.len() {
        return Err(Error::Dimensions(format!(
            "subsystem {} out of range for {} subsystems",
            subsystem,
            dims.len()
        )));
    }
    let d = dims.dims();
    let n = rho.nrows();
    let mut out = CMat::zeros(n, n);
    for row in 0..n {
        let ir = unflatten(row, d);
        for col in 0..n {
            let mut ic = unflatten(col, d);
            let mut ir2 = ir.clone();
            std::mem::swap(&mut ir2[subsystem], &mut ic[subsystem]);
            let st = strides(d);
            let row2: usize = ir2.iter().zip(&st).map(|(i, s)| i * s).sum();
            let col2: usize = ic.iter().zip(&st).map(|(i, s)| i * s).sum();
            out[(row2, col2)] = rho[(row, col)];
        }
    }
    Ok(out)
}

/// Reorder subsystems of a state vector.
///
/// `perm[k]` is the original index of the subsystem placed at slot `k`.
pub fn permute_systems_vec(v: &CVec, dims: &SystemDims, perm: &[usize]) -> Result<CVec> {
    dims.check_total(v.len())?;
    check_perm(perm, dims.len())?;
    let d = dims.dims();
    let new_dims: Vec<usize> = perm.iter().map(|&p| d[p]).collect();
    let new_strides = strides(&new_dims);
    let mut out = CVec::zeros(v.len());
    for i in 0..v.len() {
        let idx = unflatten(i, d);
        let j: usize = perm
            .iter()
            .enumerate()
            .map(|(slot, &p)| idx[p] * new_strides[slot])
            .sum();
        out[j] = v[i];
    }
    Ok(out)
}

/// Reorder subsystems of a density operator.
pub fn permute_systems_mat(m: &CMat, dims: &SystemDims, perm: &[usize]) -> Result<CMat> {
    dims.check_total(m.nrows())?;
    check_perm(perm, dims.len())?;
    let d = dims.dims();
    let new_dims: Vec<usize> = perm.iter().map(|&p| d[p]).collect();
    let new_strides = strides(&new_dims);
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    let map = |i: usize| -> usize {
        let idx = unflatten(i, d);
        perm.iter()
            .enumerate()
            .map(|(slot, &p)| idx[p] * new_strides[slot])
            .sum()
    };
    let mapped: Vec<usize> = (0..n).map(map).collect();
    for r in 0..n {
        for cidx in 0..n {
            out[(mapped[r], mapped[cidx])] = m[(r, cidx)];
        }
    }
    Ok(out)
}

fn check_perm(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::Dimensions("permutation length mismatch".into()));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::Dimensions("invalid subsystem permutation".into()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Hermiticity deviation `||m - m^dag||` (Frobenius).
pub fn hermiticity_deviation(m: &CMat) -> f64 {
    (m - m.adjoint()).norm()
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in descending order with matching eigenvector columns.
/// Inputs failing the Hermiticity check (relative to their norm) are rejected.
pub fn hermitian_eigs(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimensions(
            "hermitian_eigs expects a square matrix".into(),
        ));
    }
    let dev = hermiticity_deviation(m);
    let scale = m.norm().max(1.0);
    if dev > 1e-8 * scale {
        return Err(Error::NotHermitian(dev));
    }
    // Symmetrize before factoring so the result is exactly Hermitian.
    let h = (m + m.adjoint()).scale(0.5);
    let se = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(m.nrows(), m.ncols());
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &se.eigenvectors.column(i));
    }
    Ok((vals, vecs))
}

/// Minimum eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMat) -> Result<f64> {
    let (vals, _) = hermitian_eigs(m)?;
    Ok(*vals.last().expect("nonempty spectrum"))
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let svd = m.clone().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Number of singular values above `tol` times the largest one.
pub fn numerical_rank(m: &CMat, tol: f64) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        None => 0,
        Some(&s0) if s0 <= 0.0 => 0,
        Some(&s0) => sv.iter().filter(|&&s| s > tol * s0).count(),
    }
}

/// Schmidt decomposition of a bipartite vector.
#[derive(Clone, Debug)]
pub struct Schmidt {
    /// Nonnegative coefficients, descending. Their squares sum to `||psi||^2`.
    pub coefficients: Vec<f64>,
    pub a_basis: Vec<CVec>,
    pub b_basis: Vec<CVec>,
}

impl Schmidt {
    /// Number of coefficients above `tol` times the largest.
    pub fn rank(&self, tol: f64) -> usize {
        match self.coefficients.first() {
            None => 0,
            Some(&s0) if s0 <= 0.0 => 0,
            Some(&s0) => self.coefficients.iter().filter(|&&s| s > tol * s0).count(),
        }
    }

    pub fn reconstruct(&self) -> CVec {
        let da = self.a_basis[0].len();
        let db = self.b_basis[0].len();
        let mut v = CVec::zeros(da * db);
        for (k, &s) in self.coefficients.iter().enumerate() {
            v += kron_vec(&self.a_basis[k], &self.b_basis[k]).scale(s);
        }
        v
    }
}

/// Reshape a bipartite vector into its `da x db` coefficient matrix.
pub fn reshape_to_matrix(psi: &CVec, da: usize, db: usize) -> Result<CMat> {
    if psi.len() != da * db {
        return Err(Error::Dimensions(format!(
            "vector of length {} is not {}x{}",
            psi.len(),
            da,
            db
        )));
    }
    Ok(CMat::from_fn(da, db, |a, b| psi[a * db + b]))
}

/// Flatten a coefficient matrix back into a bipartite vector.
pub fn reshape_to_vector(m: &CMat) -> CVec {
    let (da, db) = m.shape();
    CVec::from_fn(da * db, |i, _| m[(i / db, i % db)])
}

/// Schmidt decomposition across the bipartition `(da, db)`.
pub fn schmidt_decompose(psi: &CVec, da: usize, db: usize) -> Result<Schmidt> {
    let m = reshape_to_matrix(psi, da, db)?;
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd with u");
    let vt = svd.v_t.expect("svd with v_t");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let mut coefficients = Vec::with_capacity(k);
    let mut a_basis = Vec::with_capacity(k);
    let mut b_basis = Vec::with_capacity(k);
    for &i in &order {
        coefficients.push(svd.singular_values[i]);
        a_basis.push(CVec::from_iterator(da, u.column(i).iter().copied()));
        b_basis.push(CVec::from_iterator(db, vt.row(i).iter().copied()));
    }
    Ok(Schmidt {
        coefficients,
        a_basis,
        b_basis,
    })
}

/// Gram-Schmidt orthonormalization, dropping directions below `tol`.
///
/// The leading surviving vector keeps its direction, which downstream
/// canonicalizations rely on.
pub fn orthonormalize(vectors: &[CVec], tol: f64) -> Vec<CVec> {
    let mut basis: Vec<CVec> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        // Two passes of classical Gram-Schmidt for numerical stability.
        for _ in 0..2 {
            for b in &basis {
                let ov = b.dotc(&w);
                w -= b.scale_complex(ov);
            }
        }
        let n = w.norm();
        if n > tol {
            basis.push(w.unscale(n));
        }
    }
    basis
}

trait ScaleComplex {
    fn scale_complex(&self, s: C64) -> Self;
}

impl ScaleComplex for CVec {
    fn scale_complex(&self, s: C64) -> Self {
        self * s
    }
}
