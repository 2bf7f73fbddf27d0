//! State and subspace types: pure states, density operators, bipartite
//! subspaces, product operators and probe states.
//!
//! Subsystem ordering for probes is fixed as `(A, B, ancilla)`, with `B`
//! always traced by index 1.

use crate::error::{Error, Result};
use crate::tensor::{
    self, basis_vector, cr, hermitian_eigs, kron_vec, numerical_rank, orthonormalize, outer,
    partial_trace, reshape_to_matrix, CMat, CVec, SystemDims, C64,
};
use crate::tol;

/// A pure state together with its subsystem factorization.
#[derive(Clone, Debug)]
pub struct PureState {
    pub amplitudes: CVec,
    pub dims: SystemDims,
    normalized: bool,
}

impl PureState {
    /// A normalized state; rejects vectors whose norm deviates from one.
    pub fn new(amplitudes: CVec, dims: SystemDims) -> Result<Self> {
        if dims.total() != amplitudes.len() {
            return Err(Error::Dimensions(format!(
                "state of length {} does not factor as {:?}",
                amplitudes.len(),
                dims.dims()
            )));
        }
        let n = amplitudes.norm();
        if (n - 1.0).abs() > tol::VALIDATE {
            return Err(Error::NotNormalized(n));
        }
        Ok(PureState {
            amplitudes,
            dims,
            normalized: true,
        })
    }

    /// A raw (possibly unnormalized) vector, handy for fixture definitions.
    pub fn raw(amplitudes: CVec, dims: SystemDims) -> Result<Self> {
        if dims.total() != amplitudes.len() {
            return Err(Error::Dimensions(format!(
                "state of length {} does not factor as {:?}",
                amplitudes.len(),
                dims.dims()
            )));
        }
        if amplitudes.norm() == 0.0 {
            return Err(Error::EmptySpace);
        }
        Ok(PureState {
            amplitudes,
            dims,
            normalized: false,
        })
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Normalized copy.
    pub fn normalized(&self) -> PureState {
        let n = self.amplitudes.norm();
        PureState {
            amplitudes: self.amplitudes.unscale(n),
            dims: self.dims.clone(),
            normalized: true,
        }
    }

    pub fn density(&self) -> DensityOperator {
        let v = if self.normalized {
            self.amplitudes.clone()
        } else {
            self.normalized().amplitudes
        };
        DensityOperator {
            matrix: outer(&v, &v),
            dims: self.dims.clone(),
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    pub matrix: CMat,
    pub dims: SystemDims,
}

impl DensityOperator {
    pub fn new(matrix: CMat, dims: SystemDims) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Dimensions("density operator must be square".into()));
        }
        if dims.total() != matrix.nrows() {
            return Err(Error::Dimensions(format!(
                "operator of size {} does not factor as {:?}",
                matrix.nrows(),
                dims.dims()
            )));
        }
        let herm = tensor::hermiticity_deviation(&matrix);
        if herm > tol::VALIDATE * matrix.norm().max(1.0) {
            return Err(Error::NotHermitian(herm));
        }
        let tr: f64 = matrix.diagonal().iter().map(|z| z.re).sum();
        if (tr - 1.0).abs() > tol::VALIDATE {
            return Err(Error::TraceNotOne((tr - 1.0).abs()));
        }
        let (vals, _) = hermitian_eigs(&matrix)?;
        let min = vals.last().copied().unwrap_or(0.0);
        if min < -tol::VALIDATE {
            return Err(Error::NotPositive(min));
        }
        Ok(DensityOperator { matrix, dims })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn rank(&self, tol: f64) -> usize {
        numerical_rank(&self.matrix, tol)
    }

    /// Eigenvalues (descending) and eigenvectors.
    pub fn eigs(&self) -> (Vec<f64>, CMat) {
        hermitian_eigs(&self.matrix).expect("validated Hermitian")
    }

    /// Reduced operator on the kept subsystems.
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityOperator> {
        let m = partial_trace(&self.matrix, &self.dims, keep)?;
        let dims = SystemDims::new(keep.iter().map(|&k| self.dims.dim(k)).collect())?;
        Ok(DensityOperator { matrix: m, dims })
    }

    /// Range as a list of orthonormal eigenvectors with eigenvalue above the
    /// relative cutoff.
    pub fn range(&self, rel_tol: f64) -> Vec<CVec> {
        let (vals, vecs) = self.eigs();
        let top = vals.first().copied().unwrap_or(0.0);
        let mut out = Vec::new();
        for (i, &v) in vals.iter().enumerate() {
            if v > rel_tol * top.max(1e-300) {
                out.push(CVec::from_iterator(
                    self.dim(),
                    vecs.column(i).iter().copied(),
                ));
            }
        }
        out
    }
}

/// Orthonormal-basis representation of a subspace `V` of `C^dA (x) C^dB`.
#[derive(Clone, Debug)]
pub struct BipartiteSubspace {
    d_a: usize,
    d_b: usize,
    basis: Vec<CVec>,
}

impl BipartiteSubspace {
    /// Builds from an already orthonormal basis, which is kept verbatim.
    pub fn from_orthonormal(d_a: usize, d_b: usize, basis: Vec<CVec>) -> Result<Self> {
        Self::check_shape(d_a, d_b, &basis)?;
        let mut max_dev: f64 = 0.0;
        for (i, v) in basis.iter().enumerate() {
            for (j, w) in basis.iter().enumerate() {
                let g = v.dotc(w);
                let want = if i == j { cr(1.0) } else { cr(0.0) };
                max_dev = max_dev.max((g - want).norm());
            }
        }
        if max_dev > tol::VALIDATE {
            return Err(Error::NotOrthonormal(max_dev));
        }
        Ok(BipartiteSubspace { d_a, d_b, basis })
    }

    /// Builds from an arbitrary spanning set, orthonormalizing it.
    pub fn from_span(d_a: usize, d_b: usize, span: &[CVec]) -> Result<Self> {
        Self::check_shape(d_a, d_b, span)?;
        let basis = orthonormalize(span, 1e-9);
        if basis.is_empty() {
            return Err(Error::EmptySpace);
        }
        Ok(BipartiteSubspace { d_a, d_b, basis })
    }

    fn check_shape(d_a: usize, d_b: usize, vs: &[CVec]) -> Result<()> {
        if d_a == 0 || d_b == 0 {
            return Err(Error::Domain("subsystem dimensions must be >= 1".into()));
        }
        if vs.is_empty() {
            return Err(Error::EmptySpace);
        }
        if vs.iter().any(|v| v.len() != d_a * d_b) {
            return Err(Error::Dimensions(format!(
                "basis vectors must have length {}",
                d_a * d_b
            )));
        }
        Ok(())
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CVec] {
        &self.basis
    }

    pub fn basis_vector(&self, i: usize) -> &CVec {
        &self.basis[i]
    }

    /// Reshaped basis vector `i` as a `dA x dB` matrix.
    pub fn reshaped(&self, i: usize) -> CMat {
        reshape_to_matrix(&self.basis[i], self.d_a, self.d_b).expect("validated shape")
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> CMat {
        let n = self.d_a * self.d_b;
        let mut p = CMat::zeros(n, n);
        for v in &self.basis {
            p += outer(v, v);
        }
        p
    }

    /// Dimension of the span of all A-side components.
    pub fn a_support_rank(&self) -> usize {
        // Stack the reshaped basis matrices side by side: column space = A-support.
        let mut stacked = CMat::zeros(self.d_a, self.d_b * self.dim());
        for (i, _) in self.basis.iter().enumerate() {
            let r = self.reshaped(i);
            stacked
                .view_mut((0, i * self.d_b), (self.d_a, self.d_b))
                .copy_from(&r);
        }
        numerical_rank(&stacked, tol::RANK_REL)
    }

    /// Dimension of the span of all B-side components.
    pub fn b_support_rank(&self) -> usize {
        let mut stacked = CMat::zeros(self.d_a * self.dim(), self.d_b);
        for (i, _) in self.basis.iter().enumerate() {
            let r = self.reshaped(i);
            stacked
                .view_mut((i * self.d_a, 0), (self.d_a, self.d_b))
                .copy_from(&r);
        }
        numerical_rank(&stacked, tol::RANK_REL)
    }

    /// Isometry onto the A-support (columns form an orthonormal basis of it).
    pub fn a_support_isometry(&self) -> CMat {
        let mut stacked = CMat::zeros(self.d_a, self.d_b * self.dim());
        for (i, _) in self.basis.iter().enumerate() {
            let r = self.reshaped(i);
            stacked
                .view_mut((0, i * self.d_b), (self.d_a, self.d_b))
                .copy_from(&r);
        }
        support_isometry(&stacked)
    }

    /// Isometry onto the B-support.
    pub fn b_support_isometry(&self) -> CMat {
        let mut stacked = CMat::zeros(self.d_a * self.dim(), self.d_b);
        for (i, _) in self.basis.iter().enumerate() {
            let r = self.reshaped(i);
            stacked
                .view_mut((i * self.d_a, 0), (self.d_a, self.d_b))
                .copy_from(&r);
        }
        support_isometry(&stacked.adjoint())
    }

    /// The same subspace expressed on restricted A/B supports.
    ///
    /// Returns the restricted space plus the two isometries used, so results
    /// can be mapped back. Restriction is a local unitary relabeling and
    /// preserves all entanglement structure. A space already living on full
    /// supports is returned unchanged (identity isometries), which keeps the
    /// stored basis convention intact.
    pub fn restrict_supports(&self) -> (BipartiteSubspace, CMat, CMat) {
        if self.a_support_rank() == self.d_a && self.b_support_rank() == self.d_b {
            return (
                self.clone(),
                CMat::identity(self.d_a, self.d_a),
                CMat::identity(self.d_b, self.d_b),
            );
        }
        let ua = self.a_support_isometry();
        let ub = self.b_support_isometry();
        let (ra, rb) = (ua.ncols(), ub.ncols());
        let basis: Vec<CVec> = self
            .basis
            .iter()
            .enumerate()
            .map(|(i, _)| {
                let m = self.reshaped(i);
                let small = ua.adjoint() * m * ub.conjugate();
                tensor::reshape_to_vector(&small)
            })
            .collect();
        let space = BipartiteSubspace::from_orthonormal(ra, rb, basis)
            .expect("support restriction preserves orthonormality");
        (space, ua, ub)
    }

    /// Whether the (unit) vector lies in the subspace within `tol`.
    pub fn contains(&self, v: &CVec, tol: f64) -> bool {
        let p = self.projector();
        let pv = &p * v;
        (pv - v).norm() <= tol * v.norm().max(1.0)
    }
}

/// Operator-norm distance between the orthogonal projectors of two subspaces.
pub fn subspace_distance(v1: &BipartiteSubspace, v2: &BipartiteSubspace) -> Result<f64> {
    if v1.d_a() != v2.d_a() || v1.d_b() != v2.d_b() {
        return Err(Error::Dimensions(
            "subspaces live in different ambient spaces".into(),
        ));
    }
    if v1.dim() != v2.dim() {
        return Err(Error::Dimensions(
            "subspaces have different dimensions".into(),
        ));
    }
    let diff = v1.projector() - v2.projector();
    let (vals, _) = hermitian_eigs(&diff)?;
    Ok(vals.iter().fold(0.0f64, |m, &v| m.max(v.abs())))
}

/// Product operator `W_A (x) U_B`, with `U_B` optionally required unitary.
#[derive(Clone, Debug)]
pub struct ProductOperator {
    pub op_a: CMat,
    pub op_b: CMat,
    pub b_unitary: bool,
}

impl ProductOperator {
    pub fn new(op_a: CMat, op_b: CMat, b_unitary: bool) -> Result<Self> {
        if b_unitary {
            if op_b.nrows() != op_b.ncols() {
                return Err(Error::Dimensions(
                    "a unitary B factor must be square".into(),
                ));
            }
            let dev = (op_b.adjoint() * &op_b - CMat::identity(op_b.ncols(), op_b.ncols())).norm();
            if dev > tol::VALIDATE * (op_b.ncols() as f64) {
                return Err(Error::NotUnitary(dev));
            }
        }
        Ok(ProductOperator {
            op_a,
            op_b,
            b_unitary,
        })
    }
}

/// Image of a subspace under `W_A (x) U_B`, re-orthonormalized.
pub fn apply_product_operator(
    v: &BipartiteSubspace,
    op: &ProductOperator,
) -> Result<BipartiteSubspace> {
    if op.op_a.ncols() != v.d_a() || op.op_b.ncols() != v.d_b() {
        return Err(Error::Dimensions(format!(
            "operator acts on {}x{}, space lives in {}x{}",
            op.op_a.ncols(),
            op.op_b.ncols(),
            v.d_a(),
            v.d_b()
        )));
    }
    let (pa, pb) = (op.op_a.nrows(), op.op_b.nrows());
    let images: Vec<CVec> = (0..v.dim())
        .map(|i| {
            let m = &op.op_a * v.reshaped(i) * op.op_b.transpose();
            tensor::reshape_to_vector(&m)
        })
        .collect();
    BipartiteSubspace::from_span(pa, pb, &images)
}

/// A pure state in `V (x) H_ab` expressed by coefficients on the subspace
/// basis and an ancilla basis.
#[derive(Clone, Debug)]
pub struct ProbeState {
    pub space: BipartiteSubspace,
    pub coeffs: CMat,
}

impl ProbeState {
    pub fn new(space: BipartiteSubspace, coeffs: CMat) -> Result<Self> {
        if coeffs.nrows() != space.dim() {
            return Err(Error::Dimensions(format!(
                "coefficient matrix has {} rows for a {}-dimensional space",
                coeffs.nrows(),
                space.dim()
            )));
        }
        if coeffs.ncols() == 0 {
            return Err(Error::Domain("ancilla dimension must be >= 1".into()));
        }
        let n = coeffs.norm();
        if (n - 1.0).abs() > tol::VALIDATE {
            return Err(Error::NotNormalized(n));
        }
        Ok(ProbeState { space, coeffs })
    }

    /// The canonical probe `sum_i |v_i>|i> / sqrt(dim V)`.
    ///
    /// Its reduction decides the EB property: every other probe reduction is
    /// a local filtering of this one on the ancilla side.
    pub fn canonical(space: &BipartiteSubspace) -> ProbeState {
        let d = space.dim();
        let coeffs = CMat::identity(d, d).unscale((d as f64).sqrt());
        ProbeState {
            space: space.clone(),
            coeffs,
        }
    }

    pub fn ancilla_dim(&self) -> usize {
        self.coeffs.ncols()
    }
}

/// Expands a probe into a full state vector on `H_A (x) H_B (x) H_ab`.
pub fn probe_to_vector(p: &ProbeState) -> PureState {
    let (da, db) = (p.space.d_a(), p.space.d_b());
    let anc = p.ancilla_dim();
    let mut out = CVec::zeros(da * db * anc);
    for i in 0..p.space.dim() {
        for k in 0..anc {
            let z = p.coeffs[(i, k)];
            if z.norm() == 0.0 {
                continue;
            }
            out += kron_vec(p.space.basis_vector(i), &basis_vector(anc, k)).scale_c(z);
        }
    }
    let dims = SystemDims::new(vec![da, db, anc]).expect("positive dims");
    PureState {
        amplitudes: out,
        dims,
        normalized: true,
    }
}

/// Reduction of a probe after tracing out system B; lives on `A : ab`.
pub fn reduced_after_trace_b(p: &ProbeState) -> DensityOperator {
    // sigma = sum_{i,j} (R_i R_j^dag) (x) |chi_i><chi_j| built directly from
    // the reshaped basis, avoiding the full |Psi><Psi| intermediate.
    let (da, _db) = (p.space.d_a(), p.space.d_b());
    let anc = p.ancilla_dim();
    let d = p.space.dim();
    let reshapes: Vec<CMat> = (0..d).map(|i| p.space.reshaped(i)).collect();
    let mut out = CMat::zeros(da * anc, da * anc);
    for i in 0..d {
        for j in 0..d {
            let block = &reshapes[i] * reshapes[j].adjoint();
            for (ai, aj) in (0..da).flat_map(|x| (0..da).map(move |y| (x, y))) {
                let z = block[(ai, aj)];
                if z.norm() == 0.0 {
                    continue;
                }
                for k in 0..anc {
                    for l in 0..anc {
                        out[(ai * anc + k, aj * anc + l)] +=
                            z * p.coeffs[(i, k)] * p.coeffs[(j, l)].conj();
                    }
                }
            }
        }
    }
    // Exact symmetrization guards against accumulated rounding.
    let out = (&out + out.adjoint()).scale(0.5);
    DensityOperator {
        matrix: out,
        dims: SystemDims::bipartite(da, anc),
    }
}

/// Purification of a density operator; the ancilla dimension equals the
/// numerical rank.
pub fn purify(rho: &DensityOperator) -> Result<PureState> {
    let (vals, vecs) = rho.eigs();
    let top = vals.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return Err(Error::NotPositive(top));
    }
    let kept: Vec<(usize, f64)> = vals
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > tol::RANK_REL * top)
        .map(|(i, &v)| (i, v))
        .collect();
    let r = kept.len();
    let d = rho.dim();
    let mut psi = CVec::zeros(d * r);
    for (slot, (i, v)) in kept.iter().enumerate() {
        let col = CVec::from_iterator(d, vecs.column(*i).iter().copied());
        psi += kron_vec(&col, &basis_vector(r, slot)).scale(v.sqrt());
    }
    let mut dims = rho.dims.dims().to_vec();
    dims.push(r);
    PureState::new(psi.unscale(psi.norm()), SystemDims::new(dims)?)
}

/// Weighted product-state decomposition of a separable operator.
#[derive(Clone, Debug)]
pub struct SeparableDecomposition {
    pub weights: Vec<f64>,
    pub a_vectors: Vec<CVec>,
    pub ab_vectors: Vec<CVec>,
}

impl SeparableDecomposition {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn reassemble(&self) -> CMat {
        let da = self.a_vectors[0].len();
        let db = self.ab_vectors[0].len();
        let mut m = CMat::zeros(da * db, da * db);
        for ((w, a), b) in self
            .weights
            .iter()
            .zip(&self.a_vectors)
            .zip(&self.ab_vectors)
        {
            let v = kron_vec(a, b);
            m += outer(&v, &v).scale(*w);
        }
        m
    }

    /// Largest deviation from the target matrix.
    pub fn reassembly_error(&self, target: &CMat) -> f64 {
        (self.reassemble() - target).norm()
    }

    /// Largest second Schmidt coefficient across terms (all should be ~0 for
    /// genuinely product terms — the terms are stored already factored, so
    /// this checks the stored factors are unit vectors).
    pub fn max_weight_deviation(&self) -> f64 {
        let mut dev: f64 = (self.weights.iter().sum::<f64>() - 1.0).abs();
        for (a, b) in self.a_vectors.iter().zip(&self.ab_vectors) {
            dev = dev.max((a.norm() - 1.0).abs());
            dev = dev.max((b.norm() - 1.0).abs());
        }
        dev
    }
}

fn support_isometry(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("svd with u");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let top = order
        .first()
        .map(|&i| svd.singular_values[i])
        .unwrap_or(0.0);
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&i| svd.singular_values[i] > tol::RANK_REL * top.max(1e-300))
        .collect();
    let mut out = CMat::zeros(m.nrows(), kept.len());
    for (slot, &i) in kept.iter().enumerate() {
        out.set_column(slot, &u.column(i));
    }
    out
}

trait ScaleC {
    fn scale_c(&self, z: C64) -> Self;
}

impl ScaleC for CVec {
    fn scale_c(&self, z: C64) -> Self {
        self * z
    }
}
