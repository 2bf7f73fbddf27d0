//! Constructors for entanglement-breaking spaces: saturating bases, tensor
//! products, B-direct sums, the parametric families, and the fixture spaces
//! with their companion operators.

use crate::certify::{family3_inequality, Family3Params};
use crate::error::{Error, Result};
use crate::states::{BipartiteSubspace, ProductOperator, PureState};
use crate::tensor::{
    basis_vector, c, cr, kron_vec, permute_systems_vec, CMat, CVec, SystemDims, C64,
};

/// Parameters of the 3-dimensional family in `C^m (x) C^{3N}`.
///
/// The three leading blocks carry the GHZ-like core with weights `x_j`
/// (each of modulus at least sqrt(2)); the remaining `N-2` blocks carry
/// arbitrary tail vectors.
#[derive(Clone, Debug)]
pub struct DirectSumFamilyParams {
    pub m: usize,
    pub block_count: usize,
    pub x: [C64; 3],
    pub a_tails: Vec<CVec>,
    pub b_tails: Vec<CVec>,
    pub c_tails: Vec<CVec>,
}

impl DirectSumFamilyParams {
    /// Family member without tail vectors.
    pub fn plain(m: usize, block_count: usize, x: [C64; 3]) -> Self {
        let zero = || vec![CVec::zeros(m); block_count.saturating_sub(2)];
        DirectSumFamilyParams {
            m,
            block_count,
            x,
            a_tails: zero(),
            b_tails: zero(),
            c_tails: zero(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.m < 3 {
            return Err(Error::Domain("A dimension must be at least 3".into()));
        }
        if self.block_count < 2 {
            return Err(Error::Domain("block count must be at least 2".into()));
        }
        let min = 2f64.sqrt() - 1e-12;
        if self.x.iter().any(|x| x.norm() < min) {
            return Err(Error::Domain(
                "each |x_j| must be at least sqrt(2) for the family to be EB".into(),
            ));
        }
        let tails = self.block_count - 2;
        for t in [&self.a_tails, &self.b_tails, &self.c_tails] {
            if t.len() != tails {
                return Err(Error::Dimensions(format!(
                    "expected {} tail vectors",
                    tails
                )));
            }
            if t.iter().any(|v| v.len() != self.m) {
                return Err(Error::Dimensions("tail vectors must live in C^m".into()));
            }
        }
        Ok(())
    }
}

/// Parameters of the 2-dimensional family in `C^2 (x) C^4`.
#[derive(Clone, Debug)]
pub struct Family2xnParams {
    pub a: (C64, C64),
    pub b: (C64, C64),
    pub c: (C64, C64),
    pub d: (C64, C64),
}

impl Family2xnParams {
    /// The determinant whose non-vanishing makes the purification rank four.
    pub fn det(&self) -> C64 {
        let (a0, a1) = self.a;
        let (b0, b1) = self.b;
        let (c0, c1) = self.c;
        let (d0, d1) = self.d;
        a0 * b1 * c1 * d0 - a1 * b0 * c0 * d1
    }
}

/// The n-dimensional space `span{|a_1,1>, .., |a_n,n>}` saturating the
/// dimension bound.
pub fn saturating_space(n: usize, a_vecs: &[CVec]) -> Result<BipartiteSubspace> {
    if a_vecs.len() != n || n == 0 {
        return Err(Error::Dimensions(format!("expected {} A-side vectors", n)));
    }
    let m = a_vecs[0].len();
    if a_vecs.iter().any(|v| v.len() != m) {
        return Err(Error::Dimensions(
            "A-side vectors must share a dimension".into(),
        ));
    }
    if a_vecs.iter().any(|v| v.norm() == 0.0) {
        return Err(Error::Domain("A-side vectors must be nonzero".into()));
    }
    let span: Vec<CVec> = a_vecs
        .iter()
        .enumerate()
        .map(|(i, a)| kron_vec(a, &basis_vector(n, i)))
        .collect();
    BipartiteSubspace::from_span(m, n, &span)
}

/// Tensor product of two bipartite subspaces on the grouped cut
/// `(A1 A2):(B1 B2)`.
pub fn tensor_product_space(
    v: &BipartiteSubspace,
    w: &BipartiteSubspace,
) -> Result<BipartiteSubspace> {
    let dims = SystemDims::new(vec![v.d_a(), v.d_b(), w.d_a(), w.d_b()])?;
    // Original order (A1, B1, A2, B2); regroup as (A1, A2, B1, B2).
    let perm = [0usize, 2, 1, 3];
    let mut basis = Vec::with_capacity(v.dim() * w.dim());
    for bv in v.basis() {
        for bw in w.basis() {
            let joint = kron_vec(bv, bw);
            basis.push(permute_systems_vec(&joint, &dims, &perm)?);
        }
    }
    BipartiteSubspace::from_orthonormal(v.d_a() * w.d_a(), v.d_b() * w.d_b(), basis)
}

/// B-direct sum: embeds each space's B side into consecutive orthogonal
/// blocks of an enlarged B space. All spaces must share the A dimension.
pub fn b_direct_sum(spaces: &[BipartiteSubspace]) -> Result<BipartiteSubspace> {
    if spaces.is_empty() {
        return Err(Error::EmptySpace);
    }
    let d_a = spaces[0].d_a();
    if spaces.iter().any(|s| s.d_a() != d_a) {
        return Err(Error::Dimensions(
            "B-direct sum needs a common A dimension".into(),
        ));
    }
    let d_b_total: usize = spaces.iter().map(|s| s.d_b()).sum();
    let mut basis = Vec::new();
    let mut offset = 0usize;
    for s in spaces {
        for v in s.basis() {
            let mut big = CVec::zeros(d_a * d_b_total);
            for a in 0..d_a {
                for b in 0..s.d_b() {
                    big[a * d_b_total + offset + b] = v[a * s.d_b() + b];
                }
            }
            basis.push(big);
        }
        offset += s.d_b();
    }
    BipartiteSubspace::from_orthonormal(d_a, d_b_total, basis)
}

/// The 3-dimensional family in `C^m (x) C^{3N}`.
///
/// With `x_j = sqrt(2)`, `N = 2` and no tails this reduces to the fixture
/// space U.
pub fn family_3dim_3n(p: &DirectSumFamilyParams) -> Result<BipartiteSubspace> {
    p.validate()?;
    let m = p.m;
    let n = 3 * p.block_count;
    let ket = |a: usize, b: usize| kron_vec(&basis_vector(m, a), &basis_vector(n, b));
    let tail_ket = |vec: &CVec, b: usize| kron_vec(vec, &basis_vector(n, b));

    let mut v0 =
        ket(1, 2) + ket(2, 1) + kron_vec(&basis_vector(m, 0), &basis_vector(n, 3)) * p.x[0];
    let mut v1 =
        ket(2, 0) + ket(0, 2) + kron_vec(&basis_vector(m, 1), &basis_vector(n, 4)) * p.x[1];
    let mut v2 =
        ket(0, 1) + ket(1, 0) + kron_vec(&basis_vector(m, 2), &basis_vector(n, 5)) * p.x[2];
    for i in 1..=(p.block_count - 2) {
        v0 += tail_ket(&p.a_tails[i - 1], 3 * (i + 1));
        v1 += tail_ket(&p.b_tails[i - 1], 3 * (i + 1) + 1);
        v2 += tail_ket(&p.c_tails[i - 1], 3 * (i + 1) + 2);
    }
    BipartiteSubspace::from_span(m, n, &[v0, v1, v2])
}

/// A constructed member of the 2-dimensional family in `C^m (x) C^3`,
/// together with the inequality value that decides whether it is EB.
#[derive(Clone, Debug)]
pub struct Family3Space {
    pub space: BipartiteSubspace,
    pub params: Family3Params,
    pub lhs: f64,
    pub eb: bool,
}

/// The family `span{|00>+|11>, |01> + |1>(d|0> + f e^{i theta}|1> + g|2>)}`
/// embedded in `C^m (x) C^3`.
pub fn family3_space(p: &Family3Params, m: usize) -> Result<Family3Space> {
    if p.g <= 0.0 {
        return Err(Error::Domain(
            "family-3 parameter g must be positive".into(),
        ));
    }
    if m < 2 {
        return Err(Error::Domain("A dimension must be at least 2".into()));
    }
    let ket = |a: usize, b: usize| kron_vec(&basis_vector(m, a), &basis_vector(3, b));
    let v1 = ket(0, 0) + ket(1, 1);
    let fphase = c(0.0, p.theta).exp() * cr(p.f);
    let v2 = ket(0, 1) + ket(1, 0) * cr(p.d) + ket(1, 1) * fphase + ket(1, 2) * cr(p.g);
    let space = BipartiteSubspace::from_span(m, 3, &[v1, v2])?;
    let lhs = family3_inequality(p);
    Ok(Family3Space {
        space,
        params: p.clone(),
        lhs,
        eb: lhs >= -crate::tol::PPT,
    })
}

/// The 2-dimensional family in `C^2 (x) C^4` (B-support four).
pub fn family_2xn_space(p: &Family2xnParams) -> Result<BipartiteSubspace> {
    if p.det().norm() <= 1e-9 {
        return Err(Error::Domain(
            "family parameters must satisfy the non-vanishing determinant condition".into(),
        ));
    }
    let ket = |a: usize, b: usize| kron_vec(&basis_vector(2, a), &basis_vector(4, b));
    let a_vec = basis_vector(2, 0) * p.a.0 + basis_vector(2, 1) * p.a.1;
    let c_vec = basis_vector(2, 0) * p.c.0 + basis_vector(2, 1) * p.c.1;
    let with_b = |aside: &CVec, b: usize| kron_vec(aside, &basis_vector(4, b));
    let v1 = ket(0, 0) + with_b(&a_vec, 2) * p.b.0 + with_b(&c_vec, 3) * p.d.0;
    let v2 = ket(1, 1) + with_b(&a_vec, 2) * p.b.1 + with_b(&c_vec, 3) * p.d.1;
    BipartiteSubspace::from_span(2, 4, &[v1, v2])
}

/// The fixture spaces and companion operators used across the tests
/// and the CLI.
#[derive(Clone, Debug)]
pub struct Fixtures {
    /// 3-dimensional space U in `C^3 (x) C^6`.
    pub space_u: BipartiteSubspace,
    /// The 2-dimensional subspace `span{|0>_U, |1>_U}`.
    pub space_u01: BipartiteSubspace,
    /// 2-dimensional space V in `C^2 (x) C^3`.
    pub space_v: BipartiteSubspace,
    /// V embedded in `C^2 (x) C^6` (B levels 0..2), for image comparisons.
    pub space_v_in_b6: BipartiteSubspace,
    /// The product operator converting `span{|0>_U, |1>_U}` into V.
    pub operator_w: ProductOperator,
    /// The three factors of the operator Pi on (A, B, ab).
    pub operator_pi: (CMat, CMat, CMat),
    /// The six SLOCC-inequivalent tripartite states with local ranks (3,3,2).
    pub tensor_332: Vec<PureState>,
}

/// Exact double-precision realizations of the fixtures.
pub fn fixtures() -> Fixtures {
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();

    // U basis in C^3 (x) C^6, flat index a*6 + b.
    let ket_u = |a: usize, b: usize| kron_vec(&basis_vector(3, a), &basis_vector(6, b));
    let u0 = (ket_u(1, 2) + ket_u(2, 1) + ket_u(0, 3) * cr(s2)).unscale(2.0);
    let u1 = (ket_u(2, 0) + ket_u(0, 2) + ket_u(1, 4) * cr(s2)).unscale(2.0);
    let u2 = (ket_u(0, 1) + ket_u(1, 0) + ket_u(2, 5) * cr(s2)).unscale(2.0);
    let space_u = BipartiteSubspace::from_orthonormal(3, 6, vec![u0.clone(), u1.clone(), u2])
        .expect("fixture U is orthonormal");
    let space_u01 = BipartiteSubspace::from_orthonormal(3, 6, vec![u0, u1])
        .expect("fixture U01 is orthonormal");

    // V basis in C^2 (x) C^3.
    let ket_v = |a: usize, b: usize| kron_vec(&basis_vector(2, a), &basis_vector(3, b));
    let v0 = (ket_v(0, 2) - ket_v(1, 0) * cr(s2)).unscale(s3);
    let v1 = (ket_v(1, 2) - ket_v(0, 1) * cr(s2)).unscale(-s3);
    let space_v =
        BipartiteSubspace::from_orthonormal(2, 3, vec![v0, v1]).expect("fixture V is orthonormal");

    let ket_v6 = |a: usize, b: usize| kron_vec(&basis_vector(2, a), &basis_vector(6, b));
    let v0_6 = (ket_v6(0, 2) - ket_v6(1, 0) * cr(s2)).unscale(s3);
    let v1_6 = (ket_v6(1, 2) - ket_v6(0, 1) * cr(s2)).unscale(-s3);
    let space_v_in_b6 = BipartiteSubspace::from_orthonormal(2, 6, vec![v0_6, v1_6])
        .expect("embedded fixture V is orthonormal");

    // W = (|0><1| - |1><0|) (x) (|0><3| + |1><4| + |2><2| + |4><1| + |3><0| + |5><5|).
    let mut w_a = CMat::zeros(2, 3);
    w_a[(0, 1)] = cr(1.0);
    w_a[(1, 0)] = cr(-1.0);
    let mut u_b = CMat::zeros(6, 6);
    for (out, input) in [(0usize, 3usize), (1, 4), (2, 2), (4, 1), (3, 0), (5, 5)] {
        u_b[(out, input)] = cr(1.0);
    }
    let operator_w = ProductOperator::new(w_a, u_b, true).expect("permutation is unitary");

    // Pi = sqrt(3/2) diag(1, -sqrt(2)) (x) cycle (x) [[0, 1], [sqrt(2), 0]].
    // The B and ab factors are the transposes of the printed ones; as
    // printed the operator does not reproduce the worked example, with the
    // transposes it reproduces it exactly.
    let scale = (3f64 / 2f64).sqrt();
    let mut pi_a = CMat::zeros(2, 2);
    pi_a[(0, 0)] = cr(scale);
    pi_a[(1, 1)] = cr(-scale * s2);
    let mut pi_b = CMat::zeros(3, 3);
    pi_b[(2, 0)] = cr(1.0);
    pi_b[(0, 1)] = cr(1.0);
    pi_b[(1, 2)] = cr(1.0);
    let mut pi_ab = CMat::zeros(2, 2);
    pi_ab[(0, 1)] = cr(1.0);
    pi_ab[(1, 0)] = cr(s2);

    // The six canonical (3,3,2) tensors, flat index a*6 + b*2 + c.
    let dims = SystemDims::new(vec![3, 3, 2]).expect("positive dims");
    let ket3 = |a: usize, b: usize, cc: usize| -> CVec {
        let mut v = CVec::zeros(18);
        v[a * 6 + b * 2 + cc] = cr(1.0);
        v
    };
    let raw_states = vec![
        ket3(0, 0, 0) + ket3(1, 1, 1) + ket3(2, 2, 0),
        ket3(0, 0, 0) + ket3(1, 1, 1) + ket3(2, 2, 0) + ket3(2, 2, 1),
        ket3(1, 0, 0) + ket3(0, 1, 0) + ket3(1, 2, 1) + ket3(2, 1, 1),
        ket3(0, 0, 1) + ket3(1, 0, 0) + ket3(0, 1, 0) + ket3(1, 2, 1) + ket3(2, 1, 1),
        ket3(0, 0, 1) + ket3(1, 0, 0) + ket3(0, 1, 0) + ket3(2, 2, 0),
        ket3(0, 0, 1) + ket3(1, 0, 0) + ket3(0, 1, 0) + ket3(2, 2, 1),
    ];
    let tensor_332 = raw_states
        .into_iter()
        .map(|v| {
            PureState::raw(v, dims.clone())
                .expect("nonzero")
                .normalized()
        })
        .collect();

    Fixtures {
        space_u,
        space_u01,
        space_v,
        space_v_in_b6,
        operator_w,
        operator_pi: (pi_a, pi_b, pi_ab),
        tensor_332,
    }
}
