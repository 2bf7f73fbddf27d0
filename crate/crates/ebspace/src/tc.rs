//! Two-atom Tavis-Cummings dynamics in the two-excitation sector
//! `C^2 (x) C^2 (x) C^3` (atoms A, B and cavity mode C).
//!
//! Starting from `(alpha|0,0> + beta|1,1>)_AB |0>_C`, the closed-form
//! coefficients evolve with frequency `sqrt(6) g`, the qubit-qutrit
//! reduction `rho_AC` has rank at most two, and its range is a
//! 2-dimensional subspace of `C^2 (x) C^3` whose EB property is decided
//! per time. At EB-flagged times the entanglement cost equals the EOF.

use crate::certify::{certify, CertifyOptions, EbStatus, Family3Params};
use crate::eof::{convex_roof_eof, RoofOptions};
use crate::error::{Error, Result};
use crate::states::{BipartiteSubspace, DensityOperator, PureState};
use crate::tensor::{basis_vector, c, cr, kron_vec, partial_trace, CVec, SystemDims, C64};
use crate::tol;

/// Model parameters: initial amplitudes, coupling, and time.
#[derive(Clone, Copy, Debug)]
pub struct TcParams {
    pub alpha: f64,
    pub beta: f64,
    /// Collective coupling g_c > 0 (angular frequency units).
    pub coupling: f64,
    /// Time t >= 0.
    pub time: f64,
}

impl TcParams {
    pub fn new(alpha: f64, beta: f64, coupling: f64, time: f64) -> Result<Self> {
        if (alpha * alpha + beta * beta - 1.0).abs() > 1e-12 {
            return Err(Error::Domain("alpha^2 + beta^2 must equal 1".into()));
        }
        if coupling <= 0.0 {
            return Err(Error::Domain("coupling must be positive".into()));
        }
        if time < 0.0 {
            return Err(Error::Domain("time must be nonnegative".into()));
        }
        Ok(TcParams {
            alpha,
            beta,
            coupling,
            time,
        })
    }

    /// The dimensionless phase `sqrt(6) g_c t` driving the dynamics.
    pub fn phase(&self) -> f64 {
        6f64.sqrt() * self.coupling * self.time
    }
}

/// The four closed-form amplitudes.
#[derive(Clone, Copy, Debug)]
pub struct TcCoefficients {
    pub c1: C64,
    pub c2: C64,
    pub c3: C64,
    pub c4: C64,
}

impl TcCoefficients {
    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr() + self.c3.norm_sqr() + self.c4.norm_sqr()
    }
}

/// Closed-form coefficients at time t.
pub fn tc_coefficients(p: &TcParams) -> TcCoefficients {
    let x = p.phase();
    let (beta, alpha) = (p.beta, p.alpha);
    TcCoefficients {
        c1: cr(-(2f64.sqrt() / 3.0) * beta * (1.0 - x.cos())),
        c2: c(0.0, -(1.0 / 3f64.sqrt()) * beta * x.sin()),
        c3: cr(beta * (1.0 - (1.0 - x.cos()) / 3.0)),
        c4: cr(alpha),
    }
}

/// The evolved state on `(A, B, C)`.
pub fn tc_state(p: &TcParams) -> PureState {
    let co = tc_coefficients(p);
    let ket = |a: usize, b: usize, cc: usize| -> CVec {
        kron_vec(
            &kron_vec(&basis_vector(2, a), &basis_vector(2, b)),
            &basis_vector(3, cc),
        )
    };
    let mut v = ket(0, 0, 2) * co.c1;
    v += (ket(0, 1, 1) + ket(1, 0, 1)) * (co.c2 / cr(2f64.sqrt()));
    v += ket(1, 1, 0) * co.c3;
    v += ket(0, 0, 0) * co.c4;
    let dims = SystemDims::new(vec![2, 2, 3]).expect("positive dims");
    PureState::raw(v, dims).expect("nonzero").normalized()
}

/// Qubit-qutrit reduction `rho_AC = Tr_B |psi(t)><psi(t)|`.
pub fn tc_rho_ac(p: &TcParams) -> DensityOperator {
    let psi = tc_state(p);
    let rho = psi.density();
    let m = partial_trace(&rho.matrix, &rho.dims, &[0, 2]).expect("valid dims");
    DensityOperator::new(m, SystemDims::bipartite(2, 3)).expect("valid reduction")
}

/// B-slices of the evolved state: the range of `rho_AC` is their span, and
/// this presentation is the canonical basis used by the parameter map.
pub fn tc_range_slices(p: &TcParams) -> (CVec, CVec) {
    let co = tc_coefficients(p);
    // slice_b = (I (x) <b| (x) I) |psi>, on (A, C) with flat index a*3 + c.
    let mut s0 = CVec::zeros(6);
    s0[0] = co.c4; // |0,0>
    s0[2] = co.c1; // |0,2>
    s0[4] = co.c2 / cr(2f64.sqrt()); // |1,1>
    let mut s1 = CVec::zeros(6);
    s1[1] = co.c2 / cr(2f64.sqrt()); // |0,1>
    s1[3] = co.c3; // |1,0>
    (s0, s1)
}

/// The range of `rho_AC` as a subspace in its canonical slice basis.
pub fn tc_range_space(p: &TcParams) -> Result<BipartiteSubspace> {
    let (s0, s1) = tc_range_slices(p);
    BipartiteSubspace::from_span(2, 3, &[s0, s1])
}

/// Family-3 parameters of the range at a regular time.
///
/// Reducing the slice basis to the family form with an invertible A-side
/// transform and the identity on C gives the closed-form raw parameters
/// `d = 2 c3 c4 / c2^2`, `f' = 0`, `g = 2 c1 c3 / c2^2`, canonicalized by
/// the usual phase moves. Singular times (`c2 = 0`) are rejected; callers
/// fall back to certifying the range directly.
pub fn tc_family3_params(p: &TcParams) -> Result<Family3Params> {
    let co = tc_coefficients(p);
    if co.c2.norm() <= 1e-10 {
        return Err(Error::Singular(format!(
            "c2 vanishes at phase {:.6}; certify the range directly instead",
            p.phase()
        )));
    }
    let c2sq = co.c2 * co.c2;
    let d_raw = cr(2.0) * co.c3 * co.c4 / c2sq;
    let f_raw = cr(0.0);
    let g_raw = cr(2.0) * co.c1 * co.c3 / c2sq;
    if g_raw.norm() <= 1e-14 {
        return Err(Error::Singular(
            "the range degenerates (g = 0); certify the range directly instead".into(),
        ));
    }
    Ok(Family3Params::canonicalize(d_raw, f_raw, g_raw))
}

/// One row of the time curve.
#[derive(Clone, Debug)]
pub struct TcCurvePoint {
    pub t: f64,
    pub eof: f64,
    pub eb: bool,
    /// Entanglement cost; present exactly when the EB flag is set.
    pub ec: Option<f64>,
    /// Minimum partial-transpose eigenvalue of the canonical probe reduction.
    pub evidence: f64,
}

/// EOF / EB / entanglement-cost curve over a time grid.
///
/// Each grid point certifies the range of `rho_AC` exactly and estimates the
/// EOF by the convex roof, warm-started from the neighboring time.
pub fn tc_curve(
    base: &TcParams,
    t_grid: &[f64],
    restarts: usize,
    seed: u64,
) -> Result<Vec<TcCurvePoint>> {
    if t_grid.is_empty() {
        return Err(Error::Domain("time grid must be nonempty".into()));
    }
    let mut rows = Vec::with_capacity(t_grid.len());
    let mut warm: Option<crate::tensor::CMat> = None;
    for (idx, &t) in t_grid.iter().enumerate() {
        let params = TcParams::new(base.alpha, base.beta, base.coupling, t)?;
        let rho = tc_rho_ac(&params);
        let opts = RoofOptions {
            restarts,
            seed: seed.wrapping_add(idx as u64),
            warm_start: warm.take(),
            ..RoofOptions::default()
        };
        let est = convex_roof_eof(&rho, (2, 3), &opts)?;
        warm = Some(est.ansatz.clone());

        let range = tc_range_space(&params)?;
        let verdict = certify(&range, &CertifyOptions::default())?;
        let eb = verdict.status == EbStatus::Eb;
        // Consistency: at regular times the parameter map must agree in sign.
        if let Ok(fp) = tc_family3_params(&params) {
            debug_assert_eq!(
                fp.lhs >= -tol::PPT,
                eb,
                "family-3 inequality disagrees with the exact certificate at t = {}",
                t
            );
        }
        rows.push(TcCurvePoint {
            t,
            eof: est.value,
            eb,
            ec: eb.then_some(est.value),
            evidence: verdict.choi_min_pt,
        });
    }
    Ok(rows)
}

/// Uniform grid helper.
pub fn linspace(t0: f64, t1: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![t0];
    }
    (0..steps)
        .map(|i| t0 + (t1 - t0) * i as f64 / (steps - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::extract_family3_params;
    use approx::assert_relative_eq;

    const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn at_phase(alpha: f64, beta: f64, x: f64) -> TcParams {
        // coupling 1, time = x / sqrt(6)
        TcParams::new(alpha, beta, 1.0, x / 6f64.sqrt()).unwrap()
    }

    #[test]
    fn coefficients_at_zero_and_pi() {
        let p = at_phase(0.6, 0.8, 0.0);
        let co = tc_coefficients(&p);
        assert!(co.c1.norm() < 1e-15);
        assert!(co.c2.norm() < 1e-15);
        assert_relative_eq!(co.c3.re, 0.8, epsilon = 1e-15);
        assert_relative_eq!(co.c4.re, 0.6, epsilon = 1e-15);

        // sqrt(6) g t = pi with beta = 1.
        let p = at_phase(0.0, 1.0, std::f64::consts::PI);
        let co = tc_coefficients(&p);
        assert_relative_eq!(co.c1.re, -2.0 * 2f64.sqrt() / 3.0, epsilon = 1e-12);
        assert!(co.c2.norm() < 1e-12);
        assert_relative_eq!(co.c3.re, 1.0 / 3.0, epsilon = 1e-12);
        assert!(co.c4.norm() < 1e-15);
    }

    #[test]
    fn normalization_identity_on_grid() {
        for i in 0..100 {
            let x = i as f64 * 0.07;
            let p = at_phase(SQRT_HALF, SQRT_HALF, x);
            assert!((tc_coefficients(&p).norm_sqr() - 1.0).abs() < 1e-12);
            assert!((tc_state(&p).amplitudes.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn state_at_zero_is_initial() {
        let p = at_phase(0.6, 0.8, 0.0);
        let psi = tc_state(&p);
        // (0.6|00> + 0.8|11>)_AB |0>_C: flat index (a*2 + b)*3 + c.
        assert_relative_eq!(psi.amplitudes[0].re, 0.6, epsilon = 1e-15);
        assert_relative_eq!(psi.amplitudes[9].re, 0.8, epsilon = 1e-15);
    }

    #[test]
    fn beta_zero_freezes_the_system() {
        for x in [0.0, 0.5, 1.5, 3.0] {
            let p = at_phase(1.0, 0.0, x);
            let rho = tc_rho_ac(&p);
            // |00><00| on A:C for all t.
            assert_relative_eq!(rho.matrix[(0, 0)].re, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn reduction_has_rank_two_and_slice_range() {
        let p = at_phase(SQRT_HALF, SQRT_HALF, 1.1);
        let rho = tc_rho_ac(&p);
        assert_eq!(rho.rank(1e-9), 2);
        // The slices span the range: projector residual check.
        let range = tc_range_space(&p).unwrap();
        let proj = range.projector();
        let leak = (&rho.matrix - &proj * &rho.matrix * &proj).norm();
        assert!(leak < 1e-12);
    }

    #[test]
    fn singular_time_raises_and_fallback_certifies() {
        let p = at_phase(SQRT_HALF, SQRT_HALF, std::f64::consts::PI);
        assert!(tc_family3_params(&p).is_err());
        let range = tc_range_space(&p).unwrap();
        let verdict = certify(&range, &CertifyOptions::default()).unwrap();
        assert_ne!(verdict.status, EbStatus::Undecided);
    }

    #[test]
    fn alpha_zero_has_vanishing_d() {
        for x in [0.4, 1.0, 2.0] {
            let p = at_phase(0.0, 1.0, x);
            let fp = tc_family3_params(&p).unwrap();
            assert!(fp.d.abs() < 1e-12);
        }
    }

    #[test]
    fn parameter_map_agrees_with_independent_extraction() {
        for x in [0.5, 0.9, std::f64::consts::FRAC_PI_2, 2.2, 2.9] {
            let p = at_phase(SQRT_HALF, SQRT_HALF, x);
            let mapped = tc_family3_params(&p).unwrap();
            let range = tc_range_space(&p).unwrap();
            let extracted = extract_family3_params(&range).unwrap();
            assert_relative_eq!(mapped.d, extracted.d, epsilon = 1e-8);
            assert_relative_eq!(mapped.f, extracted.f, epsilon = 1e-8);
            assert_relative_eq!(mapped.g, extracted.g, epsilon = 1e-8);
        }
    }

    #[test]
    fn eb_flag_matches_exact_certificate() {
        // The map's inequality sign must match the exact Choi decision.
        for i in 1..24 {
            let x = i as f64 * 0.13;
            let p = at_phase(0.0, 1.0, x);
            let range = tc_range_space(&p).unwrap();
            let verdict = certify(&range, &CertifyOptions::default()).unwrap();
            if let Ok(fp) = tc_family3_params(&p) {
                if fp.lhs.abs() > 1e-6 {
                    assert_eq!(
                        fp.lhs >= 0.0,
                        verdict.status == EbStatus::Eb,
                        "x = {}: lhs {} vs {:?}",
                        x,
                        fp.lhs,
                        verdict.status
                    );
                }
            }
        }
    }

    #[test]
    fn short_curve_starts_at_zero_and_reports_cost_when_flagged() {
        let base = TcParams::new(SQRT_HALF, SQRT_HALF, 1.0, 0.0).unwrap();
        let grid = linspace(0.0, 2.0, 8);
        let rows = tc_curve(&base, &grid, 12, 99).unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[0].eof, 0.0);
        for r in &rows {
            assert!(r.eof >= 0.0);
            assert_eq!(r.ec.is_some(), r.eb);
            if let Some(ec) = r.ec {
                assert_eq!(ec, r.eof);
            }
        }
    }

    #[test]
    fn coefficients_are_periodic() {
        let period = 2.0 * std::f64::consts::PI;
        for i in 0..25 {
            let x = i as f64 * 0.23;
            let a = tc_coefficients(&at_phase(SQRT_HALF, SQRT_HALF, x));
            let b = tc_coefficients(&at_phase(SQRT_HALF, SQRT_HALF, x + period));
            assert!((a.c1 - b.c1).norm() < 1e-12);
            assert!((a.c2 - b.c2).norm() < 1e-12);
            assert!((a.c3 - b.c3).norm() < 1e-12);
            assert!((a.c4 - b.c4).norm() < 1e-12);
        }
    }
}
