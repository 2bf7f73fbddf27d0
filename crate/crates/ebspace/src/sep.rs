//! Exact and evidence-based separability decisions.
//!
//! The Peres-Horodecki criterion (PPT) is necessary for separability and
//! sufficient on 2x2 and 2x3 supports. Low-rank rules extend exactness:
//! a state of rank at most three is separable iff PPT; an m x n state of
//! rank max{m,n} is separable iff PPT (and is then a convex sum of that many
//! product states); an m x n state of rank r < max{m,n} is entangled.
//! Everything else is reported `Unknown` with the PPT evidence attached.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{random_complex_vector, stream_rng};
use crate::states::{DensityOperator, SeparableDecomposition};
use crate::tensor::{
    hermitian_eigs, kron_vec, min_eigenvalue, numerical_rank, partial_trace, partial_transpose,
    reshape_to_matrix, schmidt_decompose, CMat, CVec, SystemDims,
};
use crate::tol;

/// Outcome of a separability decision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SepStatus {
    Separable,
    Entangled,
    Unknown,
}

/// Rule that produced the decision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SepRule {
    /// Negative partial transpose.
    Npt,
    /// Support dimension exceeds the rank (rank rule iv).
    SupportExceedsRank,
    /// PPT on 2x2 or 2x3 supports (Peres-Horodecki).
    PptSmallDims,
    /// PPT at rank <= 3 (rank rule i).
    PptLowRank,
    /// PPT at rank = max support (rank rule ii).
    PptRankEqualsSupport,
    /// No exact rule applies.
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct SepVerdict {
    pub status: SepStatus,
    pub rule: SepRule,
    /// Minimum eigenvalue of the partial transpose (restricted to supports).
    pub min_pt_eigenvalue: f64,
    /// Local support dimensions and rank after restriction.
    pub supports: (usize, usize),
    pub rank: usize,
    /// Attached when extraction succeeded for a separable verdict.
    pub decomposition: Option<SeparableDecomposition>,
}

/// PPT flag and minimum partial-transpose eigenvalue across the given cut.
pub fn is_ppt(rho: &DensityOperator, cut: (usize, usize), ppt_tol: f64) -> Result<(bool, f64)> {
    let (da, db) = cut;
    if da * db != rho.dim() {
        return Err(Error::Dimensions(format!(
            "cut {}x{} does not match operator of size {}",
            da,
            db,
            rho.dim()
        )));
    }
    let dims = SystemDims::bipartite(da, db);
    let pt = partial_transpose(&rho.matrix, &dims, 1)?;
    let min = min_eigenvalue(&pt)?;
    Ok((min >= -ppt_tol, min))
}

/// Restrict a bipartite operator to its local supports.
///
/// Returns the restricted matrix plus the two support isometries. The
/// restriction preserves separability in both directions.
fn restrict_to_supports(rho: &CMat, da: usize, db: usize) -> (CMat, CMat, CMat) {
    let dims = SystemDims::bipartite(da, db);
    let rho_a = partial_trace(rho, &dims, &[0]).expect("valid dims");
    let rho_b = partial_trace(rho, &dims, &[1]).expect("valid dims");
    let iso = |m: &CMat| -> CMat {
        let (vals, vecs) = hermitian_eigs(m).expect("reduced state Hermitian");
        let top = vals.first().copied().unwrap_or(0.0).max(1e-300);
        let kept: Vec<usize> = (0..vals.len())
            .filter(|&i| vals[i] > tol::RANK_REL * top)
            .collect();
        let mut out = CMat::zeros(m.nrows(), kept.len());
        for (slot, &i) in kept.iter().enumerate() {
            out.set_column(slot, &vecs.column(i));
        }
        out
    };
    let ua = iso(&rho_a);
    let ub = iso(&rho_b);
    let embed = ua.kronecker(&ub);
    let restricted = embed.adjoint() * rho * &embed;
    (restricted, ua, ub)
}

/// Exact separability decision tree.
///
/// The low-rank rules are applied after restricting to local supports,
/// since they are statements about support dimensions.
pub fn is_separable_exact(rho: &DensityOperator, cut: (usize, usize)) -> Result<SepVerdict> {
    is_separable_exact_seeded(rho, cut, 0)
}

/// Decision only: skips the (expensive) decomposition extraction on
/// separable verdicts. Used by search loops that test many candidates.
pub fn separability_decision(rho: &DensityOperator, cut: (usize, usize)) -> Result<SepVerdict> {
    decide(rho, cut, None)
}

/// Same as [`is_separable_exact`], with a seed for the decomposition search.
pub fn is_separable_exact_seeded(
    rho: &DensityOperator,
    cut: (usize, usize),
    seed: u64,
) -> Result<SepVerdict> {
    decide(rho, cut, Some(seed))
}

fn decide(
    rho: &DensityOperator,
    cut: (usize, usize),
    extract_seed: Option<u64>,
) -> Result<SepVerdict> {
    let (da, db) = cut;
    if da * db != rho.dim() {
        return Err(Error::Dimensions(format!(
            "cut {}x{} does not match operator of size {}",
            da,
            db,
            rho.dim()
        )));
    }
    let (restricted, ua, ub) = restrict_to_supports(&rho.matrix, da, db);
    let (m, n) = (ua.ncols(), ub.ncols());
    let rank = numerical_rank(&restricted, tol::RANK_REL);
    let dims = SystemDims::bipartite(m, n);
    let pt = partial_transpose(&restricted, &dims, 1)?;
    let min_pt = min_eigenvalue(&pt)?;

    let max_support = m.max(n);
    let min_support = m.min(n);

    if min_pt < -tol::PPT {
        return Ok(SepVerdict {
            status: SepStatus::Entangled,
            rule: SepRule::Npt,
            min_pt_eigenvalue: min_pt,
            supports: (m, n),
            rank,
            decomposition: None,
        });
    }
    if max_support > rank {
        return Ok(SepVerdict {
            status: SepStatus::Entangled,
            rule: SepRule::SupportExceedsRank,
            min_pt_eigenvalue: min_pt,
            supports: (m, n),
            rank,
            decomposition: None,
        });
    }
    let rule = if min_support <= 2 && max_support <= 3 {
        Some(SepRule::PptSmallDims)
    } else if rank <= 3 {
        Some(SepRule::PptLowRank)
    } else if rank == max_support {
        Some(SepRule::PptRankEqualsSupport)
    } else {
        None
    };
    match rule {
        Some(rule) => {
            let decomposition = extract_seed.and_then(|seed| {
                let restricted_rho = DensityOperator::new(symmetrized(&restricted), dims.clone())
                    .expect("restriction preserves density properties");
                extract_separable_decomposition(
                    &restricted_rho,
                    (m, n),
                    seed,
                    DecompositionBudget::default(),
                )
                .ok()
                .map(|d| lift_decomposition(d, &ua, &ub))
            });
            Ok(SepVerdict {
                status: SepStatus::Separable,
                rule,
                min_pt_eigenvalue: min_pt,
                supports: (m, n),
                rank,
                decomposition,
            })
        }
        None => Ok(SepVerdict {
            status: SepStatus::Unknown,
            rule: SepRule::Inconclusive,
            min_pt_eigenvalue: min_pt,
            supports: (m, n),
            rank,
            decomposition: None,
        }),
    }
}

fn symmetrized(m: &CMat) -> CMat {
    let h = (m + m.adjoint()).scale(0.5);
    let tr: f64 = h.diagonal().iter().map(|z| z.re).sum();
    h.unscale(tr)
}

fn lift_decomposition(d: SeparableDecomposition, ua: &CMat, ub: &CMat) -> SeparableDecomposition {
    SeparableDecomposition {
        weights: d.weights,
        a_vectors: d.a_vectors.iter().map(|v| ua * v).collect(),
        ab_vectors: d.ab_vectors.iter().map(|v| ub * v).collect(),
    }
}

/// Two-qubit determinant criterion: separable iff `det(rho^Gamma) >= 0`.
pub fn two_qubit_det_criterion(rho: &DensityOperator) -> Result<(bool, f64)> {
    if rho.dim() != 4 || rho.dims.dims() != [2, 2] {
        return Err(Error::Dimensions(
            "determinant criterion needs a 2x2 cut".into(),
        ));
    }
    let pt = partial_transpose(&rho.matrix, &rho.dims, 1)?;
    let (vals, _) = hermitian_eigs(&pt)?;
    let det: f64 = vals.iter().product();
    Ok((det >= -tol::PPT, det))
}

/// Budget for the decomposition search.
#[derive(Clone, Copy, Debug)]
pub struct DecompositionBudget {
    pub restarts: usize,
    pub max_iters: usize,
    /// Extra terms allowed beyond the rank.
    pub extra_terms: usize,
}

impl Default for DecompositionBudget {
    fn default() -> Self {
        DecompositionBudget {
            restarts: 24,
            max_iters: 400,
            extra_terms: 3,
        }
    }
}

/// Best-effort numerical search for a product-state decomposition.
///
/// Parametrizes k-term decompositions by co-isometries on a square-root
/// factor of the state and alternates rank-one snapping of each term with a
/// least-squares refit, over several random restarts. Never gates a
/// separability verdict: failure returns an error and callers keep their
/// PPT-based decision.
pub fn extract_separable_decomposition(
    rho: &DensityOperator,
    cut: (usize, usize),
    seed: u64,
    budget: DecompositionBudget,
) -> Result<SeparableDecomposition> {
    let (da, db) = cut;
    if da * db != rho.dim() {
        return Err(Error::Dimensions("cut does not match operator".into()));
    }
    let (vals, vecs) = rho.eigs();
    let top = vals.first().copied().unwrap_or(0.0).max(1e-300);
    let kept: Vec<usize> = (0..vals.len())
        .filter(|&i| vals[i] > tol::RANK_REL * top)
        .collect();
    let r = kept.len();
    if r == 0 {
        return Err(Error::NotPositive(0.0));
    }
    // Square-root factor: columns are sqrt(lambda_i) v_i.
    let mut factor = CMat::zeros(rho.dim(), r);
    for (slot, &i) in kept.iter().enumerate() {
        let col = vecs.column(i) * crate::tensor::cr(vals[i].sqrt());
        factor.set_column(slot, &col);
    }

    let mut best: Option<(f64, SeparableDecomposition)> = None;
    for k in r..=(r + budget.extra_terms) {
        for restart in 0..budget.restarts {
            let mut rng = stream_rng(seed, (k * 1009 + restart) as u64);
            if let Some(dec) =
                try_decomposition(&factor, da, db, k, budget.max_iters, &mut rng, restart == 0)
            {
                let err = dec.reassembly_error(&rho.matrix);
                if err <= tol::DECOMPOSITION {
                    return Ok(dec);
                }
                if best.as_ref().is_none_or(|(e, _)| err < *e) {
                    best = Some((err, dec));
                }
            }
        }
    }
    Err(Error::SearchFailed(format!(
        "no product decomposition within tolerance (best reassembly error {:.3e})",
        best.map(|(e, _)| e).unwrap_or(f64::NAN)
    )))
}

/// One optimization run. The k-term ensembles of a fixed state are exactly
/// `factor * U` over co-isometries `U` (rows orthonormal), so the search
/// alternates: snap every current term to its closest product vector, then
/// refit `U` toward those targets and retract back onto the manifold.
fn try_decomposition(
    factor: &CMat,
    da: usize,
    db: usize,
    k: usize,
    max_iters: usize,
    rng: &mut impl Rng,
    deterministic_start: bool,
) -> Option<SeparableDecomposition> {
    let r = factor.ncols();
    let mut u = if deterministic_start && k >= r {
        let mut m = CMat::zeros(r, k);
        for i in 0..r {
            m[(i, i)] = crate::tensor::cr(1.0);
        }
        m
    } else {
        let g = crate::rng::random_complex_matrix(r, k, rng);
        retract_rows(&g)?
    };

    let objective = |u: &CMat| -> f64 {
        let phis = factor * u;
        let mut obj = 0.0;
        for j in 0..k {
            let phi = CVec::from_iterator(phis.nrows(), phis.column(j).iter().copied());
            let m = reshape_to_matrix(&phi, da, db).expect("shape");
            let sv = crate::tensor::singular_values(&m);
            obj += sv.iter().skip(1).map(|s| s * s).sum::<f64>();
        }
        obj
    };

    let pseudo = factor.clone().svd(true, true).pseudo_inverse(1e-12).ok()?;
    let mut best = objective(&u);
    let mut step = 1.0;
    for _ in 0..max_iters {
        if best < 1e-18 {
            break;
        }
        let phis = factor * &u;
        let mut targets = CMat::zeros(phis.nrows(), k);
        for j in 0..k {
            let phi = CVec::from_iterator(phis.nrows(), phis.column(j).iter().copied());
            let norm = phi.norm();
            if norm < 1e-12 {
                // Dead term: reseed with a random direction.
                let p = random_complex_vector(phis.nrows(), rng);
                targets.set_column(j, &(p.unscale(p.norm() * 4.0)).column(0));
                continue;
            }
            let s = schmidt_decompose(&phi, da, db).expect("shape");
            let product = kron_vec(&s.a_basis[0], &s.b_basis[0]).scale(s.coefficients[0]);
            targets.set_column(j, &product.column(0));
        }
        let fitted = &pseudo * &targets;
        let blend = &u * crate::tensor::cr(1.0 - step) + fitted * crate::tensor::cr(step);
        match retract_rows(&blend) {
            Some(candidate) => {
                let cand_obj = objective(&candidate);
                if cand_obj < best - 1e-18 {
                    best = cand_obj;
                    u = candidate;
                    step = (step * 1.2).min(1.0);
                } else {
                    step *= 0.5;
                    if step < 1e-4 {
                        break;
                    }
                }
            }
            None => break,
        }
    }

    // Assemble the decomposition from the final co-isometry.
    let phis = factor * &u;
    let mut weights = Vec::new();
    let mut a_vectors = Vec::new();
    let mut ab_vectors = Vec::new();
    for j in 0..k {
        let phi = CVec::from_iterator(phis.nrows(), phis.column(j).iter().copied());
        let w = phi.norm_squared();
        if w < 1e-14 {
            continue;
        }
        let s = schmidt_decompose(&phi, da, db).ok()?;
        weights.push(w);
        a_vectors.push(s.a_basis[0].clone());
        ab_vectors.push(s.b_basis[0].clone());
    }
    if weights.is_empty() {
        return None;
    }
    Some(SeparableDecomposition {
        weights,
        a_vectors,
        ab_vectors,
    })
}

/// Projects a matrix onto the manifold of matrices with orthonormal rows.
fn retract_rows(m: &CMat) -> Option<CMat> {
    let svd = m.clone().svd(true, true);
    let u = svd.u?;
    let vt = svd.v_t?;
    Some(u * vt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_density, stream_rng};
    use crate::tensor::{basis_vector, cr, kron, outer, permute_systems_mat, CMat};
    use approx::assert_relative_eq;

    fn bell_vec() -> CVec {
        CVec::from_vec(vec![cr(1.0), cr(0.0), cr(0.0), cr(1.0)]).unscale(2f64.sqrt())
    }

    fn density(m: CMat, dims: Vec<usize>) -> DensityOperator {
        DensityOperator::new(m, SystemDims::new(dims).unwrap()).unwrap()
    }

    #[test]
    fn bell_is_npt() {
        let rho = density(outer(&bell_vec(), &bell_vec()), vec![2, 2]);
        let (flag, min) = is_ppt(&rho, (2, 2), tol::PPT).unwrap();
        assert!(!flag);
        assert_relative_eq!(min, -0.5, epsilon = 1e-12);
    }

    #[test]
    fn product_state_is_ppt_and_separable() {
        let p = kron_vec(&basis_vector(2, 0), &basis_vector(3, 1));
        let rho = density(outer(&p, &p), vec![2, 3]);
        let (flag, min) = is_ppt(&rho, (2, 3), tol::PPT).unwrap();
        assert!(flag);
        assert!(min >= -tol::PPT);
        let v = is_separable_exact(&rho, (2, 3)).unwrap();
        assert_eq!(v.status, SepStatus::Separable);
    }

    #[test]
    fn i3_i2_bell_state_is_npt_across_grouped_cut() {
        // (1/6) I_3 (x) I_2 (x) |Bell><Bell| on the cut (A a):(B b).
        let bell = outer(&bell_vec(), &bell_vec());
        let full = kron(&CMat::identity(6, 6).scale(1.0 / 6.0), &bell);
        // Order is (A, B, a, b); regroup to (A, a, B, b).
        let dims = SystemDims::new(vec![3, 2, 2, 2]).unwrap();
        let grouped = permute_systems_mat(&full, &dims, &[0, 2, 1, 3]).unwrap();
        let rho = density(grouped, vec![6, 4]);
        let (flag, min) = is_ppt(&rho, (6, 4), tol::PPT).unwrap();
        assert!(!flag);
        assert!(min < -1e-3);
    }

    #[test]
    fn rank_two_mixture_separable_by_low_rank_rule() {
        // p|x,0><x,0| + (1-p)|y,1><y,1| on 3x2.
        let mut rng = stream_rng(5, 0);
        let x = crate::rng::random_complex_vector(3, &mut rng).normalize();
        let y = crate::rng::random_complex_vector(3, &mut rng).normalize();
        let v1 = kron_vec(&x, &basis_vector(2, 0));
        let v2 = kron_vec(&y, &basis_vector(2, 1));
        let m = outer(&v1, &v1).scale(0.3) + outer(&v2, &v2).scale(0.7);
        let rho = density(m, vec![3, 2]);
        let v = is_separable_exact(&rho, (3, 2)).unwrap();
        assert_eq!(v.status, SepStatus::Separable);
        if let Some(dec) = &v.decomposition {
            assert!(dec.reassembly_error(&rho.matrix) <= tol::DECOMPOSITION);
        }
    }

    #[test]
    fn support_exceeding_rank_is_entangled() {
        // Rank-2 state on 3x2 supports whose range has an entangled vector.
        let mut v1 = CVec::zeros(6);
        v1[0] = cr(1.0); // |0,0>
        v1[3] = cr(1.0); // |1,1>
        let v1 = v1.unscale(v1.norm());
        let mut v2 = CVec::zeros(6);
        v2[4] = cr(1.0); // |2,0>
        let m = outer(&v1, &v1).scale(0.5) + outer(&v2, &v2).scale(0.5);
        let rho = density(m, vec![3, 2]);
        let v = is_separable_exact(&rho, (3, 2)).unwrap();
        assert_eq!(v.status, SepStatus::Entangled);
        // NPT may fire first; support-vs-rank is the backstop.
        assert!(matches!(v.rule, SepRule::Npt | SepRule::SupportExceedsRank));
    }

    #[test]
    fn entangled_plus_product_mixture_is_entangled() {
        // |alpha><alpha| + |gamma><gamma| (x) delta with |alpha> entangled.
        let alpha = bell_vec();
        let gamma = basis_vector(2, 0);
        let delta = basis_vector(2, 1);
        let gd = kron_vec(&gamma, &delta);
        let m = (outer(&alpha, &alpha) + outer(&gd, &gd)).scale(0.5);
        let rho = density(m, vec![2, 2]);
        let v = is_separable_exact(&rho, (2, 2)).unwrap();
        assert_eq!(v.status, SepStatus::Entangled);
    }

    #[test]
    fn two_qubit_det_values() {
        let mm = density(CMat::identity(4, 4).scale(0.25), vec![2, 2]);
        let (flag, det) = two_qubit_det_criterion(&mm).unwrap();
        assert!(flag);
        assert_relative_eq!(det, 1.0 / 256.0, epsilon = 1e-12);

        let rho = density(outer(&bell_vec(), &bell_vec()), vec![2, 2]);
        let (flag, det) = two_qubit_det_criterion(&rho).unwrap();
        assert!(!flag);
        assert_relative_eq!(det, -1.0 / 16.0, epsilon = 1e-12);

        let p = kron_vec(&basis_vector(2, 0), &basis_vector(2, 1));
        let rho = density(outer(&p, &p), vec![2, 2]);
        let (flag, det) = two_qubit_det_criterion(&rho).unwrap();
        assert!(flag);
        assert!(det >= -tol::PPT);
    }

    #[test]
    fn det_criterion_agrees_with_ppt_on_random_states() {
        let mut agree = 0;
        let mut total = 0;
        for seed in 0..300u64 {
            let mut rng = stream_rng(1000, seed);
            let rank = 1 + (seed % 4) as usize;
            let rho = density(random_density(4, rank, &mut rng), vec![2, 2]);
            let (ppt, _) = is_ppt(&rho, (2, 2), tol::PPT).unwrap();
            let (det_flag, det) = two_qubit_det_criterion(&rho).unwrap();
            if det.abs() <= 1e-12 {
                continue; // boundary band excluded
            }
            total += 1;
            if ppt == det_flag {
                agree += 1;
            }
        }
        assert_eq!(agree, total);
        assert!(total > 250);
    }

    #[test]
    fn small_supports_never_unknown() {
        for seed in 0..40u64 {
            let mut rng = stream_rng(2000, seed);
            let rank = 1 + (seed % 4) as usize;
            let rho = density(random_density(6, rank.min(6), &mut rng), vec![2, 3]);
            let v = is_separable_exact(&rho, (2, 3)).unwrap();
            assert_ne!(v.status, SepStatus::Unknown);
        }
    }

    #[test]
    fn diagonal_mixture_decomposes_exactly() {
        let v1 = kron_vec(&basis_vector(2, 0), &basis_vector(2, 0));
        let v2 = kron_vec(&basis_vector(2, 1), &basis_vector(2, 1));
        let m = outer(&v1, &v1).scale(0.4) + outer(&v2, &v2).scale(0.6);
        let rho = density(m, vec![2, 2]);
        let dec = extract_separable_decomposition(&rho, (2, 2), 7, DecompositionBudget::default())
            .unwrap();
        assert!(dec.reassembly_error(&rho.matrix) < 1e-9);
        assert_eq!(dec.len(), 2);
    }

    #[test]
    fn werner_like_state_decomposes() {
        // q|Bell><Bell| + (1-q) I/4 at q = 0.2 is separable (q <= 1/3).
        let bell = outer(&bell_vec(), &bell_vec());
        let m = bell.scale(0.2) + CMat::identity(4, 4).scale(0.8 / 4.0);
        let rho = density(m, vec![2, 2]);
        let v = is_separable_exact(&rho, (2, 2)).unwrap();
        assert_eq!(v.status, SepStatus::Separable);
        let dec = extract_separable_decomposition(
            &rho,
            (2, 2),
            11,
            DecompositionBudget {
                restarts: 40,
                max_iters: 600,
                extra_terms: 3,
            },
        )
        .unwrap();
        assert!(dec.len() <= 7);
        assert!(dec.reassembly_error(&rho.matrix) <= tol::DECOMPOSITION);
    }
}
