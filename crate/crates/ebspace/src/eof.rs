//! Entanglement measures: pure-state entropy, the two-qubit closed form,
//! convex-roof optimization, additivity checks, entanglement cost, and the
//! non-additivity candidate scan.
//!
//! The convex roof is minimized over k-term decompositions of a state,
//! parametrized by co-isometries acting on a square-root factor: every
//! decomposition `rho = sum_j |phi_j><phi_j|` with k terms is `phi_j = A u_j`
//! for a factor `A` with `A A^dag = rho` and a matrix `U` with orthonormal
//! rows. Riemannian gradient descent on that manifold with random restarts
//! gives a certified upper bound on the EOF (the average entropy of the best
//! decomposition found).

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{random_complex_matrix, stream_rng};
use crate::sep::{separability_decision, SepStatus};
use crate::states::{BipartiteSubspace, DensityOperator, PureState};
use crate::tensor::{
    basis_vector, cr, hermitian_eigs, kron, kron_vec, outer, permute_systems_mat,
    schmidt_decompose, CMat, CVec, SystemDims,
};
use crate::tol;

const LN2: f64 = std::f64::consts::LN_2;

fn xlog2x(x: f64) -> f64 {
    if x <= 1e-300 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    -xlog2x(p) - xlog2x(1.0 - p)
}

/// Entanglement entropy (base 2) of a pure state across a bipartition.
pub fn entanglement_entropy(psi: &PureState, cut: (usize, usize)) -> Result<f64> {
    let (da, db) = cut;
    if da * db != psi.amplitudes.len() {
        return Err(Error::Dimensions(format!(
            "cut {}x{} does not match state of length {}",
            da,
            db,
            psi.amplitudes.len()
        )));
    }
    let normalized = if psi.is_normalized() {
        psi.clone()
    } else {
        psi.normalized()
    };
    let s = schmidt_decompose(&normalized.amplitudes, da, db)?;
    Ok(-s.coefficients.iter().map(|&c| xlog2x(c * c)).sum::<f64>())
}

/// Two-qubit concurrence from the spin-flip spectrum.
pub fn concurrence(rho: &DensityOperator) -> Result<f64> {
    if rho.dim() != 4 || rho.dims.dims() != [2, 2] {
        return Err(Error::Dimensions(
            "concurrence needs a two-qubit state".into(),
        ));
    }
    // sigma_y (x) sigma_y in the computational basis.
    let mut yy = CMat::zeros(4, 4);
    yy[(0, 3)] = cr(-1.0);
    yy[(1, 2)] = cr(1.0);
    yy[(2, 1)] = cr(1.0);
    yy[(3, 0)] = cr(-1.0);
    let flipped = &yy * rho.matrix.map(|z| z.conj()) * &yy;
    let product = &rho.matrix * flipped;
    // Eigenvalues of rho * rho~ are real and nonnegative.
    let eigs = product
        .eigenvalues()
        .ok_or_else(|| Error::Singular("spin-flip spectrum did not converge".into()))?;
    let mut lambdas: Vec<f64> = eigs.iter().map(|z| z.re.max(0.0).sqrt()).collect();
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Wootters' closed form for the two-qubit entanglement of formation.
pub fn wootters_eof(rho: &DensityOperator) -> Result<f64> {
    let c = concurrence(rho)?;
    Ok(binary_entropy(0.5 * (1.0 + (1.0 - c * c).sqrt())))
}

/// Convex-roof estimate: value, optimizing decomposition, and convergence
/// metadata.
#[derive(Clone, Debug)]
pub struct EofEstimate {
    /// Upper bound on the EOF in ebits.
    pub value: f64,
    /// Columns of the optimal co-isometry (ancilla transformation).
    pub ansatz: CMat,
    /// The unnormalized decomposition vectors `phi_j` (they reassemble rho).
    pub vectors: Vec<CVec>,
    pub restarts_used: usize,
    pub converged: bool,
    /// Set when the value 0 is certified by an exact separability rule.
    pub separable_exact: bool,
}

impl EofEstimate {
    /// Reassembles `sum_j |phi_j><phi_j|`.
    pub fn reassemble(&self) -> CMat {
        let d = self.vectors[0].len();
        let mut m = CMat::zeros(d, d);
        for v in &self.vectors {
            m += outer(v, v);
        }
        m
    }

    /// Average entanglement entropy of the recorded decomposition.
    pub fn average_entropy(&self, cut: (usize, usize)) -> Result<f64> {
        let mut acc = 0.0;
        for v in &self.vectors {
            let w = v.norm_squared();
            if w < 1e-18 {
                continue;
            }
            let s = schmidt_decompose(v, cut.0, cut.1)?;
            acc += -s
                .coefficients
                .iter()
                .map(|&c| xlog2x(c * c / w))
                .sum::<f64>()
                * w;
        }
        Ok(acc)
    }
}

/// Options for the convex-roof optimizer.
#[derive(Clone, Debug)]
pub struct RoofOptions {
    /// Number of decomposition terms; defaults to `min(r^2, r + 4)`.
    pub ansatz: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Warm start from a previous co-isometry (tried before the restarts).
    pub warm_start: Option<CMat>,
    /// Skip the exact separability shortcut (used by cross-validation tests).
    pub skip_separability_shortcut: bool,
}

impl Default for RoofOptions {
    fn default() -> Self {
        RoofOptions {
            ansatz: None,
            restarts: 50,
            seed: 0xEB5EED,
            max_iters: 300,
            grad_tol: 1e-8,
            warm_start: None,
            skip_separability_shortcut: false,
        }
    }
}

/// Convex-roof upper bound on the entanglement of formation.
///
/// For pure inputs the entropy is returned exactly (single-term ansatz).
/// When an exact separability rule certifies the state, the value is pinned
/// to zero and the optimizer only polishes the recorded decomposition.
pub fn convex_roof_eof(
    rho: &DensityOperator,
    cut: (usize, usize),
    opts: &RoofOptions,
) -> Result<EofEstimate> {
    let (da, db) = cut;
    if da * db != rho.dim() {
        return Err(Error::Dimensions(format!(
            "cut {}x{} does not match operator of size {}",
            da,
            db,
            rho.dim()
        )));
    }
    let (vals, vecs) = rho.eigs();
    let top = vals.first().copied().unwrap_or(0.0).max(1e-300);
    let kept: Vec<usize> = (0..vals.len())
        .filter(|&i| vals[i] > tol::RANK_REL * top)
        .collect();
    let r = kept.len();
    let k = opts.ansatz.unwrap_or_else(|| (r * r).min(r + 4));
    if k < r {
        return Err(Error::Domain(format!("ansatz size {} below rank {}", k, r)));
    }

    let mut factor = CMat::zeros(rho.dim(), r);
    for (slot, &i) in kept.iter().enumerate() {
        factor.set_column(slot, &(vecs.column(i) * cr(vals[i].sqrt())).column(0));
    }

    // Pure state: the roof is the entropy itself.
    if r == 1 {
        let phi = CVec::from_iterator(rho.dim(), factor.column(0).iter().copied());
        let psi = PureState::raw(phi.clone(), SystemDims::bipartite(da, db))?.normalized();
        let value = entanglement_entropy(&psi, cut)?;
        return Ok(EofEstimate {
            value,
            ansatz: CMat::identity(1, 1),
            vectors: vec![phi],
            restarts_used: 0,
            converged: true,
            separable_exact: false,
        });
    }

    let separable = if opts.skip_separability_shortcut {
        false
    } else {
        matches!(
            separability_decision(rho, cut).map(|v| v.status),
            Ok(SepStatus::Separable)
        )
    };

    let mut best_value = f64::INFINITY;
    let mut best_u = CMat::zeros(r, k);
    let mut restarts_used = 0;
    let mut converged = false;

    let mut starts: Vec<CMat> = Vec::new();
    if let Some(w) = &opts.warm_start {
        if w.nrows() == r && w.ncols() == k {
            starts.push(w.clone());
        }
    }
    // Deterministic start: eigen-decomposition padded with zeros.
    let mut eye = CMat::zeros(r, k);
    for i in 0..r {
        eye[(i, i)] = cr(1.0);
    }
    starts.push(eye);
    for restart in 0..opts.restarts {
        let mut rng = stream_rng(opts.seed, restart as u64 + 1);
        starts.push(haar_coisometry(r, k, &mut rng));
    }

    for (idx, start) in starts.into_iter().enumerate() {
        restarts_used = idx + 1;
        let (u, value, grad_norm) = descend(&factor, start, da, db, opts.max_iters, opts.grad_tol);
        if value < best_value {
            best_value = value;
            best_u = u;
            converged = grad_norm <= opts.grad_tol;
        }
        // A separable state cannot beat zero; stop once we are there.
        if separable && best_value < 1e-9 {
            break;
        }
    }

    let phis = &factor * &best_u;
    let vectors: Vec<CVec> = (0..k)
        .map(|j| CVec::from_iterator(rho.dim(), phis.column(j).iter().copied()))
        .collect();
    let value = if separable && best_value < 1e-8 {
        0.0
    } else {
        best_value
    };
    Ok(EofEstimate {
        value,
        ansatz: best_u,
        vectors,
        restarts_used,
        converged,
        separable_exact: separable,
    })
}

fn haar_coisometry(r: usize, k: usize, rng: &mut impl Rng) -> CMat {
    let g = random_complex_matrix(r, k, rng);
    retract(&g)
}

/// Projects onto matrices with orthonormal rows (polar retraction).
fn retract(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd");
    let vt = svd.v_t.expect("svd");
    u * vt
}

/// Average entanglement entropy of the ensemble `factor * U` and its
/// Euclidean gradient with respect to `conj(U)`.
///
/// For a term `phi` with weight `p = |phi|^2` and reduced state
/// `rho_A = Tr_B |phi><phi|`, the weighted entropy is
/// `-Tr[rho_A log2 rho_A] + p log2 p` and its gradient in `phi` is
/// `(-log2(rho_A) (x) I) phi + log2(p) phi` (up to the common 1/ln2 shift,
/// which cancels between the two terms).
fn roof_objective_grad(factor: &CMat, u: &CMat, da: usize, db: usize) -> (f64, CMat) {
    let k = u.ncols();
    let d = factor.nrows();
    let phis = factor * u;
    let mut value = 0.0;
    let mut grad_phi = CMat::zeros(d, k);
    for j in 0..k {
        let phi = CVec::from_iterator(d, phis.column(j).iter().copied());
        let p = phi.norm_squared();
        if p < 1e-18 {
            continue;
        }
        let m = crate::tensor::reshape_to_matrix(&phi, da, db).expect("shape");
        let rho_a = &m * m.adjoint();
        let (vals, vecs) = hermitian_eigs(&rho_a).expect("Hermitian");
        value += -vals.iter().map(|&v| xlog2x(v)).sum::<f64>() + xlog2x(p);

        // (-log2(rho_A) (x) I_B) phi + log2 p * phi, acting on the reshaped state.
        let mut log_m = CMat::zeros(da, da);
        for (i, &v) in vals.iter().enumerate() {
            let lv = if v > 1e-18 { v.log2() } else { -60.0 };
            let col = vecs.column(i);
            for a in 0..da {
                for b in 0..da {
                    log_m[(a, b)] += col[a] * col[b].conj() * cr(lv);
                }
            }
        }
        let gm = log_m * &m * cr(-1.0) + &m * cr(p.log2());
        for a in 0..da {
            for b in 0..db {
                grad_phi[(a * db + b, j)] = gm[(a, b)] / cr(LN2);
            }
        }
    }
    // Chain rule back to U: grad_U = factor^dag grad_phi.
    let grad_u = factor.adjoint() * grad_phi;
    (value, grad_u)
}

fn descend(
    factor: &CMat,
    start: CMat,
    da: usize,
    db: usize,
    max_iters: usize,
    grad_tol: f64,
) -> (CMat, f64, f64) {
    let mut u = retract(&start);
    let (mut value, mut grad) = roof_objective_grad(factor, &u, da, db);
    let mut step = 0.5;
    let mut grad_norm = f64::INFINITY;
    for _ in 0..max_iters {
        // Riemannian gradient: project onto the tangent space of the
        // row-Stiefel manifold at U.
        let ug = &u * grad.adjoint();
        let sym = (&ug + ug.adjoint()).scale(0.5);
        let tangent = &grad - sym * &u;
        grad_norm = tangent.norm();
        if grad_norm <= grad_tol {
            break;
        }
        let mut advanced = false;
        while step > 1e-12 {
            let cand = retract(&(&u - &tangent * cr(step)));
            let (cv, cg) = roof_objective_grad(factor, &cand, da, db);
            if cv < value - 1e-15 {
                u = cand;
                value = cv;
                grad = cg;
                step = (step * 1.4).min(2.0);
                advanced = true;
                break;
            }
            step *= 0.5;
        }
        if !advanced {
            break;
        }
    }
    (u, value, grad_norm)
}

/// Report of an additivity check `E_f(rho_V (x) sigma) vs E_f(rho_V) + E_f(sigma)`.
#[derive(Clone, Debug)]
pub struct AdditivityReport {
    pub lhs: f64,
    pub eof_rho: f64,
    pub eof_sigma: f64,
    pub gap: f64,
}

/// Checks EOF additivity for a state supported on a certified EB space.
///
/// `rho_v` lives on the `(A, B)` cut of `space`; `sigma` on `(a, b)`. The
/// tensor product is regrouped to the `(A a):(B b)` cut. Refuses to run
/// without an EB certificate, since additivity is only guaranteed then.
pub fn additivity_check(
    rho_v: &DensityOperator,
    space: &BipartiteSubspace,
    verdict: &crate::certify::EbVerdict,
    sigma: &DensityOperator,
    opts: &RoofOptions,
) -> Result<AdditivityReport> {
    if verdict.status != crate::certify::EbStatus::Eb {
        return Err(Error::Precondition(
            "additivity is only guaranteed on a certified EB space".into(),
        ));
    }
    if rho_v.dims.dims() != [space.d_a(), space.d_b()] {
        return Err(Error::Dimensions(
            "state does not match the space dimensions".into(),
        ));
    }
    // Range containment check.
    let proj = space.projector();
    let leak = (&rho_v.matrix - &proj * &rho_v.matrix * &proj).norm();
    if leak > 1e-8 {
        return Err(Error::Precondition(format!(
            "state leaks out of the certified space (residual {:.3e})",
            leak
        )));
    }
    let eof_rho = eof_auto(rho_v, (space.d_a(), space.d_b()), opts)?;
    let (sa, sb) = (sigma.dims.dim(0), sigma.dims.dim(1));
    let eof_sigma = eof_auto(sigma, (sa, sb), opts)?;

    let product = tensor_grouped(rho_v, sigma)?;
    let lhs_cut = (space.d_a() * sa, space.d_b() * sb);
    let lhs = convex_roof_eof(&product, lhs_cut, opts)?.value;
    Ok(AdditivityReport {
        lhs,
        eof_rho,
        eof_sigma,
        gap: lhs - eof_rho - eof_sigma,
    })
}

/// `rho (x) sigma` regrouped from `(A, B, a, b)` to `(A a):(B b)`.
pub fn tensor_grouped(rho: &DensityOperator, sigma: &DensityOperator) -> Result<DensityOperator> {
    let (da, db) = (rho.dims.dim(0), rho.dims.dim(1));
    let (sa, sb) = (sigma.dims.dim(0), sigma.dims.dim(1));
    let joint = kron(&rho.matrix, &sigma.matrix);
    let dims = SystemDims::new(vec![da, db, sa, sb])?;
    let grouped = permute_systems_mat(&joint, &dims, &[0, 2, 1, 3])?;
    DensityOperator::new(grouped, SystemDims::bipartite(da * sa, db * sb))
}

/// EOF via the closed form when the cut is two qubits, the roof otherwise.
pub fn eof_auto(rho: &DensityOperator, cut: (usize, usize), opts: &RoofOptions) -> Result<f64> {
    if cut == (2, 2) {
        wootters_eof(rho)
    } else {
        Ok(convex_roof_eof(rho, cut, opts)?.value)
    }
}

/// Entanglement cost via an EB certificate: equals the EOF.
pub fn entanglement_cost(
    rho_v: &DensityOperator,
    space: &BipartiteSubspace,
    verdict: &crate::certify::EbVerdict,
    opts: &RoofOptions,
) -> Result<f64> {
    if verdict.status != crate::certify::EbStatus::Eb {
        return Err(Error::Precondition(
            "entanglement cost is not established by this method without an EB certificate".into(),
        ));
    }
    let proj = space.projector();
    let leak = (&rho_v.matrix - &proj * &rho_v.matrix * &proj).norm();
    if leak > 1e-8 {
        return Err(Error::Precondition(format!(
            "state leaks out of the certified space (residual {:.3e})",
            leak
        )));
    }
    eof_auto(rho_v, (space.d_a(), space.d_b()), opts)
}

/// The candidate form for rank-two two-qubit states with non-additive EOF:
/// a mixture of `sqrt(p)|a,0> + sqrt(1-p)|b,1>` (normalized) and `|a,1>`.
pub fn nonadditive_candidate(a: &CVec, b: &CVec, p: f64, q: f64) -> Result<DensityOperator> {
    if a.len() != 2 || b.len() != 2 {
        return Err(Error::Dimensions(
            "candidate vectors must be qubit states".into(),
        ));
    }
    if !(0.0..=1.0).contains(&p) || !(0.0 < q && q < 1.0) {
        return Err(Error::Domain(
            "weights must satisfy p in [0,1], q in (0,1)".into(),
        ));
    }
    let an = a.unscale(a.norm());
    let bn = b.unscale(b.norm());
    if (1.0 - an.dotc(&bn).norm()) < 1e-10 {
        return Err(Error::Domain(
            "candidate vectors must be linearly independent".into(),
        ));
    }
    let psi1 = kron_vec(&an, &basis_vector(2, 0)).scale(p.sqrt())
        + kron_vec(&bn, &basis_vector(2, 1)).scale((1.0 - p).sqrt());
    let psi1 = psi1.unscale(psi1.norm());
    let psi2 = kron_vec(&an, &basis_vector(2, 1));
    let m = outer(&psi1, &psi1).scale(q) + outer(&psi2, &psi2).scale(1.0 - q);
    DensityOperator::new(m, SystemDims::bipartite(2, 2))
}

/// Grid specification for the non-additivity scan.
#[derive(Clone, Copy, Debug)]
pub struct ScanGrid {
    pub angles: usize,
    pub p_steps: usize,
    pub q_steps: usize,
}

#[derive(Clone, Debug)]
pub struct ScanPoint {
    pub angle: f64,
    pub p: f64,
    pub q: f64,
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct ScanReport {
    pub points: Vec<ScanPoint>,
    pub min_gap: f64,
    pub argmin: Option<ScanPoint>,
    /// Points whose gap is below the optimizer slack. A convex-roof upper
    /// bound cannot certify superadditivity, so these are flagged for manual
    /// study, never claimed as discoveries.
    pub flagged: Vec<ScanPoint>,
}

/// Scans the candidate family for additivity gaps against a fixed sigma.
pub fn scan_nonadditivity(
    grid: ScanGrid,
    sigma: &DensityOperator,
    opts: &RoofOptions,
) -> Result<ScanReport> {
    let (sa, sb) = (sigma.dims.dim(0), sigma.dims.dim(1));
    let eof_sigma = eof_auto(sigma, (sa, sb), opts)?;
    let mut points = Vec::new();
    let mut flagged = Vec::new();
    let mut min_gap = f64::INFINITY;
    let mut argmin = None;
    for ai in 0..grid.angles {
        // Angles strictly inside (0, pi/2]: proportional vectors excluded.
        let angle = (ai + 1) as f64 * std::f64::consts::FRAC_PI_2 / grid.angles as f64;
        let a = basis_vector(2, 0);
        let b = basis_vector(2, 0) * cr(angle.cos()) + basis_vector(2, 1) * cr(angle.sin());
        for pi in 0..grid.p_steps {
            let p = (pi + 1) as f64 / (grid.p_steps + 1) as f64;
            for qi in 0..grid.q_steps {
                let q = (qi + 1) as f64 / (grid.q_steps + 1) as f64;
                let rho = nonadditive_candidate(&a, &b, p, q)?;
                let eof_rho = wootters_eof(&rho)?;
                let product = tensor_grouped(&rho, sigma)?;
                let lhs = convex_roof_eof(&product, (2 * sa, 2 * sb), opts)?.value;
                let gap = lhs - eof_rho - eof_sigma;
                let point = ScanPoint { angle, p, q, gap };
                if gap < min_gap {
                    min_gap = gap;
                    argmin = Some(point.clone());
                }
                if gap < -3e-3 {
                    flagged.push(point.clone());
                }
                points.push(point);
            }
        }
    }
    Ok(ScanReport {
        points,
        min_gap,
        argmin,
        flagged,
    })
}
