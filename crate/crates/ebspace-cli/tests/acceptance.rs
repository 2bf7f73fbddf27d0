//! Acceptance suite: one test per criterion, each printing a pass line with
//! its runtime (visible via `cargo test --test acceptance -- --nocapture`).

use std::time::{Duration, Instant};

use ebspace::certify::{
    certify, certify_with_claim, extract_family3_params, family3_inequality,
    lift_counterexample_through_tensor, numeric_falsify, CertifyOptions, ConstructionClaim,
    EbCertificate, EbStatus, FalsifyBudget, Family3Params,
};
use ebspace::construct::{
    b_direct_sum, family3_space, fixtures, saturating_space, tensor_product_space,
    DirectSumFamilyParams,
};
use ebspace::eof::{additivity_check, convex_roof_eof, wootters_eof, RoofOptions};
use ebspace::rng::{random_complex_vector, random_density, stream_rng};
use ebspace::sep::{is_separable_exact, SepStatus};
use ebspace::states::{
    apply_product_operator, reduced_after_trace_b, subspace_distance, BipartiteSubspace,
    DensityOperator,
};
use ebspace::tc::{
    linspace, tc_coefficients, tc_curve, tc_family3_params, tc_range_space, tc_rho_ac, TcParams,
};
use ebspace::tensor::{
    basis_vector, c, cr, hermitian_eigs, kron, kron_vec, outer, partial_transpose,
    permute_systems_mat, CMat, CVec, SystemDims,
};

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn bell_vec() -> CVec {
    let mut v = CVec::zeros(4);
    v[0] = cr(SQRT_HALF);
    v[3] = cr(SQRT_HALF);
    v
}

fn bell_density() -> DensityOperator {
    DensityOperator::new(outer(&bell_vec(), &bell_vec()), SystemDims::bipartite(2, 2)).unwrap()
}

fn report(criterion: &str, start: Instant, budget: Duration) {
    let elapsed = start.elapsed();
    println!(
        "criterion {}: PASS ({:.2?} of {:.0?} budget)",
        criterion, elapsed, budget
    );
    assert!(
        elapsed <= budget,
        "criterion {} exceeded its runtime budget: {:?}",
        criterion,
        elapsed
    );
}

/// Criterion 1: applying the fixture W operator to the 2-dimensional span
/// of the first two fixture-U vectors reproduces fixture V (embedded in the
/// operator's codomain) within 1e-10.
#[test]
fn criterion_01_fixture_convertibility() {
    let start = Instant::now();
    let fx = fixtures();
    let image = apply_product_operator(&fx.space_u01, &fx.operator_w).unwrap();
    let d = subspace_distance(&image, &fx.space_v_in_b6).unwrap();
    assert!(d <= 1e-10, "subspace distance {}", d);
    report("1 (fixture convertibility)", start, Duration::from_secs(1));
}

/// Criterion 2: fixture V certifies EB as family 3 with (d, f, g) = (0, 0, 2)
/// within 1e-8; fixture U certifies EB.
#[test]
fn criterion_02_fixture_certification() {
    let start = Instant::now();
    let fx = fixtures();
    let opts = CertifyOptions {
        falsify: FalsifyBudget {
            restarts: 150,
            max_iters: 60,
        },
        ..CertifyOptions::default()
    };
    let verdict = certify(&fx.space_v, &opts).unwrap();
    assert_eq!(verdict.status, EbStatus::Eb);
    match &verdict.certificate {
        Some(EbCertificate::Family3 { params }) => {
            assert!(params.d.abs() <= 1e-8, "d = {}", params.d);
            assert!(params.f.abs() <= 1e-8, "f = {}", params.f);
            assert!((params.g - 2.0).abs() <= 1e-8, "g = {}", params.g);
        }
        other => panic!("fixture V should classify as family 3, got {:?}", other),
    }

    let s2 = 2f64.sqrt();
    let claim =
        ConstructionClaim::Family3N(DirectSumFamilyParams::plain(3, 2, [cr(s2), cr(s2), cr(s2)]));
    let verdict_u = certify_with_claim(&fx.space_u, Some(&claim), &opts).unwrap();
    assert_eq!(verdict_u.status, EbStatus::Eb);
    report("2 (fixture certification)", start, Duration::from_secs(5));
}

/// Criterion 3: over 1000 seeded tuples with |LHS| > 1e-6, the sign of the
/// family-3 inequality equals the sign of det of the partially transposed
/// two-qubit reduction of the canonical reduced state built directly from
/// the parameters.
#[test]
fn criterion_03_inequality_determinant_equivalence() {
    let start = Instant::now();
    use rand::Rng;
    let mut rng = stream_rng(30_001, 0);
    let mut tested = 0usize;
    let mut drawn = 0usize;
    while tested < 1000 {
        drawn += 1;
        assert!(drawn < 20_000, "sampling is not terminating");
        let d: f64 = rng.random::<f64>() * 2.0;
        let f: f64 = rng.random::<f64>() * 2.0;
        let theta: f64 = rng.random::<f64>() * std::f64::consts::PI;
        let g: f64 = rng.random::<f64>() * 2.4 + 0.05;
        let p = Family3Params::new(d, f, theta, g);
        let lhs = family3_inequality(&p);
        if lhs.abs() <= 1e-6 {
            continue;
        }
        tested += 1;
        let det = det_pt_of_phi_reduction(&p);
        assert_eq!(
            lhs >= 0.0,
            det >= 0.0,
            "sign mismatch at (d,f,theta,g) = ({},{},{},{}): lhs {} det {}",
            d,
            f,
            theta,
            g,
            lhs,
            det
        );
    }
    report(
        "3 (inequality/determinant equivalence)",
        start,
        Duration::from_secs(30),
    );
}

/// Independent oracle for criterion 3: the reduction of the canonical-form
/// probe state built directly from the parameters.
fn det_pt_of_phi_reduction(p: &Family3Params) -> f64 {
    // Phi = |0>_B|00> + |1>_B(|01>+|10>) + (d|0> + f e^{i theta}|1> + g|2>)_B |11>
    // on (B, A, ab); alpha = Tr_B = sum of B-slice projectors on (A, ab).
    let f_phase = c(0.0, p.theta).exp() * cr(p.f);
    let idx = |a: usize, e: usize| a * 2 + e;
    let mut m0 = CVec::zeros(4);
    m0[idx(0, 0)] = cr(1.0);
    m0[idx(1, 1)] = cr(p.d);
    let mut m1 = CVec::zeros(4);
    m1[idx(0, 1)] = cr(1.0);
    m1[idx(1, 0)] = cr(1.0);
    m1[idx(1, 1)] = f_phase;
    let mut m2 = CVec::zeros(4);
    m2[idx(1, 1)] = cr(p.g);
    let mut alpha = outer(&m0, &m0) + outer(&m1, &m1) + outer(&m2, &m2);
    let tr: f64 = alpha.diagonal().iter().map(|z| z.re).sum();
    alpha /= cr(tr);
    let pt = partial_transpose(&alpha, &SystemDims::bipartite(2, 2), 1).unwrap();
    let (vals, _) = hermitian_eigs(&pt).unwrap();
    vals.iter().product()
}

/// Criterion 4: on 200 seeded random 2-dimensional subspaces of C^3 (x) C^3,
/// the structural certifier and the numeric falsifier (budget 500) never
/// contradict, and every NotEB counterexample replays as an entangled
/// reduction with min PT eigenvalue below -1e-6.
#[test]
fn criterion_04_certifier_cross_validation() {
    let start = Instant::now();
    let opts = CertifyOptions::default();
    let budget = FalsifyBudget {
        restarts: 500,
        max_iters: 80,
    };
    for case in 0..200u64 {
        let mut rng = stream_rng(40_000 + case, 0);
        let raw: Vec<CVec> = (0..2).map(|_| random_complex_vector(9, &mut rng)).collect();
        let v = BipartiteSubspace::from_span(3, 3, &raw).unwrap();
        let verdict = certify(&v, &opts).unwrap();
        let outcome = numeric_falsify(&v, budget, case).unwrap();
        match (&verdict.status, &outcome) {
            (EbStatus::Eb, ebspace::certify::FalsifyOutcome::Counterexample { .. }) => {
                panic!("case {}: certified EB but falsified", case)
            }
            (EbStatus::NotEb, ebspace::certify::FalsifyOutcome::Evidence { min_found, .. }) => {
                assert!(
                    *min_found < -1e-6,
                    "case {}: NotEB but no counterexample (min {})",
                    case,
                    min_found
                );
            }
            (
                EbStatus::NotEb,
                ebspace::certify::FalsifyOutcome::Counterexample { reduction, .. },
            ) => {
                assert_eq!(reduction.status, SepStatus::Entangled);
                assert!(
                    reduction.min_pt_eigenvalue < -1e-6,
                    "case {}: weak counterexample ({})",
                    case,
                    reduction.min_pt_eigenvalue
                );
            }
            (EbStatus::Undecided, _) => panic!("case {}: undecided within exact scope", case),
            (EbStatus::Eb, ebspace::certify::FalsifyOutcome::Evidence { .. }) => {}
        }
        // Replay the certifier's own counterexample as well.
        if let Some(cex) = &verdict.counterexample {
            let sigma = reduced_after_trace_b(&cex.probe);
            let replay = is_separable_exact(&sigma, (3, cex.probe.ancilla_dim())).unwrap();
            assert_eq!(replay.status, SepStatus::Entangled);
            assert!(replay.min_pt_eigenvalue < -1e-6);
        }
    }
    report(
        "4 (certifier cross-validation)",
        start,
        Duration::from_secs(300),
    );
}

/// Criterion 5: every seeded random (n+1)-dimensional subspace of
/// C^m (x) C^n with n <= 3 is rejected with a verified counterexample probe.
#[test]
fn criterion_05_dimension_bound() {
    let start = Instant::now();
    for case in 0..20u64 {
        let mut rng = stream_rng(50_000 + case, 0);
        let n = 1 + (case % 3) as usize;
        let m = 2 + (case % 3) as usize;
        let dim = n + 1;
        let raw: Vec<CVec> = (0..dim)
            .map(|_| random_complex_vector(m * n, &mut rng))
            .collect();
        let v = BipartiteSubspace::from_span(m, n, &raw).unwrap();
        assert_eq!(v.dim(), dim);
        let verdict = certify(&v, &CertifyOptions::default()).unwrap();
        assert_eq!(verdict.status, EbStatus::NotEb, "case {}", case);
        let cex = verdict
            .counterexample
            .expect("dimension bound provides a probe");
        let sigma = reduced_after_trace_b(&cex.probe);
        let replay = is_separable_exact(&sigma, (m, cex.probe.ancilla_dim())).unwrap();
        assert_eq!(replay.status, SepStatus::Entangled, "case {}", case);
    }
    report("5 (dimension bound)", start, Duration::from_secs(30));
}

fn certified_eb_space(kind: u64, seed: u64) -> BipartiteSubspace {
    let mut rng = stream_rng(60_000 + seed, 0);
    match kind % 4 {
        0 => {
            let v = random_complex_vector(4, &mut rng);
            BipartiteSubspace::from_span(2, 2, &[v]).unwrap()
        }
        1 => {
            let a: Vec<CVec> = (0..2)
                .map(|_| random_complex_vector(2, &mut rng).normalize())
                .collect();
            saturating_space(2, &a).unwrap()
        }
        2 => {
            let g = 1.2 + 0.3 * ((seed % 4) as f64);
            family3_space(&Family3Params::new(0.0, 0.0, 0.0, g), 2)
                .unwrap()
                .space
        }
        _ => fixtures().space_v,
    }
}

/// Criterion 6: tensor products and B-direct sums of certified EB pairs
/// produce no falsifier counterexample at budget 300; lifting a NotEB
/// counterexample probe falsifies the corresponding tensor product.
#[test]
fn criterion_06_closure_theorems() {
    let start = Instant::now();
    let opts = CertifyOptions::default();
    let budget = FalsifyBudget {
        restarts: 300,
        max_iters: 80,
    };
    for pair in 0..20u64 {
        let v = certified_eb_space(pair, pair * 2);
        let w = certified_eb_space(pair + 1, pair * 2 + 1);
        assert_eq!(
            certify(&v, &opts).unwrap().status,
            EbStatus::Eb,
            "pair {}",
            pair
        );
        assert_eq!(
            certify(&w, &opts).unwrap().status,
            EbStatus::Eb,
            "pair {}",
            pair
        );

        let t = tensor_product_space(&v, &w).unwrap();
        match numeric_falsify(&t, budget, pair).unwrap() {
            ebspace::certify::FalsifyOutcome::Counterexample { .. } => {
                panic!("pair {}: tensor product of EB spaces falsified", pair)
            }
            ebspace::certify::FalsifyOutcome::Evidence { min_found, .. } => {
                assert!(min_found >= -1e-8, "pair {}: min {}", pair, min_found)
            }
        }
        if v.d_a() == w.d_a() {
            let s = b_direct_sum(&[v.clone(), w.clone()]).unwrap();
            match numeric_falsify(&s, budget, pair + 1000).unwrap() {
                ebspace::certify::FalsifyOutcome::Counterexample { .. } => {
                    panic!("pair {}: B-direct sum of EB spaces falsified", pair)
                }
                ebspace::certify::FalsifyOutcome::Evidence { min_found, .. } => {
                    assert!(min_found >= -1e-8, "pair {} bsum: min {}", pair, min_found)
                }
            }
        }
    }

    // Converse closure: a NotEB factor poisons every tensor product.
    for case in 0..10u64 {
        let mut rng = stream_rng(61_000 + case, 0);
        let raw: Vec<CVec> = (0..2).map(|_| random_complex_vector(9, &mut rng)).collect();
        let v = BipartiteSubspace::from_span(3, 3, &raw).unwrap();
        let verdict = certify(&v, &opts).unwrap();
        assert_eq!(verdict.status, EbStatus::NotEb, "case {}", case);
        let cex = verdict.counterexample.unwrap();
        let w = certified_eb_space(case % 4, 555 + case);
        let t = tensor_product_space(&v, &w).unwrap();
        let mut member = CVec::zeros(w.dim());
        member[0] = cr(1.0);
        let lifted = lift_counterexample_through_tensor(&cex.probe, &w, &member, &t).unwrap();
        let sigma = reduced_after_trace_b(&lifted);
        let replay = is_separable_exact(&sigma, (t.d_a(), lifted.ancilla_dim())).unwrap();
        assert_eq!(replay.status, SepStatus::Entangled, "case {}", case);
    }
    report("6 (closure theorems)", start, Duration::from_secs(300));
}

/// Criterion 7: on 50 seeded random two-qubit states of rank at most 3,
/// the convex roof with at least 50 restarts matches the closed form
/// within 1e-3.
#[test]
fn criterion_07_eof_oracle_agreement() {
    let start = Instant::now();
    for case in 0..50u64 {
        let mut rng = stream_rng(70_000 + case, 0);
        let rank = 1 + (case % 3) as usize;
        let rho = DensityOperator::new(
            random_density(4, rank, &mut rng),
            SystemDims::bipartite(2, 2),
        )
        .unwrap();
        let exact = wootters_eof(&rho).unwrap();
        let opts = RoofOptions {
            restarts: 50,
            seed: case,
            skip_separability_shortcut: true,
            ..RoofOptions::default()
        };
        let est = convex_roof_eof(&rho, (2, 2), &opts).unwrap();
        assert!(
            est.value >= exact - 1e-9,
            "case {}: roof below the closed form",
            case
        );
        assert!(
            (est.value - exact).abs() <= 1e-3,
            "case {}: roof {} vs wootters {}",
            case,
            est.value,
            exact
        );
    }
    report("7 (EOF oracle agreement)", start, Duration::from_secs(120));
}

/// Criterion 8: the example state (1/6) I_3 (x) I_2 (x) |Bell><Bell| on the
/// grouped cut has convex-roof EOF of one ebit within 2e-3.
#[test]
fn criterion_08_one_ebit_example() {
    let start = Instant::now();
    let bell = outer(&bell_vec(), &bell_vec());
    let full = kron(&CMat::identity(6, 6).scale(1.0 / 6.0), &bell);
    let dims = SystemDims::new(vec![3, 2, 2, 2]).unwrap();
    let grouped = permute_systems_mat(&full, &dims, &[0, 2, 1, 3]).unwrap();
    let rho = DensityOperator::new(grouped, SystemDims::bipartite(6, 4)).unwrap();
    let opts = RoofOptions {
        restarts: 30,
        seed: 80_001,
        ..RoofOptions::default()
    };
    let est = convex_roof_eof(&rho, (6, 4), &opts).unwrap();
    assert!((est.value - 1.0).abs() <= 2e-3, "EOF {}", est.value);
    report("8 (one-ebit example)", start, Duration::from_secs(60));
}

/// Criterion 9: additivity on certified EB two-qubit spaces tensored with a
/// Bell state: |E_f(rho (x) sigma) - E_f(rho) - 1| <= 3e-3 for 10 cases.
#[test]
fn criterion_09_additivity() {
    let start = Instant::now();
    let sigma = bell_density();
    for case in 0..10u64 {
        let mut rng = stream_rng(90_000 + case, 0);
        let x = random_complex_vector(2, &mut rng).normalize();
        let y = random_complex_vector(2, &mut rng).normalize();
        let space = BipartiteSubspace::from_span(
            2,
            2,
            &[
                kron_vec(&x, &basis_vector(2, 0)),
                kron_vec(&y, &basis_vector(2, 1)),
            ],
        )
        .unwrap();
        let verdict = certify(&space, &CertifyOptions::default()).unwrap();
        assert_eq!(verdict.status, EbStatus::Eb, "case {}", case);

        // Random rank-<=2 state supported on the space.
        use rand::Rng;
        let p: f64 = 0.15 + 0.7 * rng.random::<f64>();
        let b0 = space.basis_vector(0);
        let b1 = space.basis_vector(1);
        let mix = random_complex_vector(2, &mut rng).normalize();
        let v1 = b0 * mix[0] + b1 * mix[1];
        let m = outer(&v1, &v1).scale(p) + outer(b1, b1).scale(1.0 - p);
        let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
        let rho = DensityOperator::new(m.unscale(tr), SystemDims::bipartite(2, 2)).unwrap();

        let opts = RoofOptions {
            restarts: 60,
            seed: case,
            ..RoofOptions::default()
        };
        let rep = additivity_check(&rho, &space, &verdict, &sigma, &opts).unwrap();
        assert!((rep.eof_sigma - 1.0).abs() <= 1e-9);
        assert!(
            (rep.lhs - rep.eof_rho - 1.0).abs() <= 3e-3,
            "case {}: lhs {} eof_rho {}",
            case,
            rep.lhs,
            rep.eof_rho
        );
    }
    report("9 (additivity)", start, Duration::from_secs(300));
}

/// Criterion 10: Tavis-Cummings properties — coefficient normalization to
/// 1e-12 on a 1000-point grid, EOF(0) exactly zero, period 2 pi / sqrt(6)
/// within 1e-10, parameter map vs independent extraction within 1e-8 at
/// regular times, and E_c equal to the EOF at every EB-flagged time, with a
/// full 50-point curve inside the runtime budget.
#[test]
fn criterion_10_tavis_cummings() {
    let start = Instant::now();

    // Normalization on a 1000-point grid.
    for i in 0..1000 {
        let t = i as f64 * 0.004;
        let p = TcParams::new(SQRT_HALF, SQRT_HALF, 1.0, t).unwrap();
        assert!((tc_coefficients(&p).norm_sqr() - 1.0).abs() <= 1e-12);
    }

    // Full 50-point curve; EOF(0) exactly zero; cost equals EOF when flagged.
    let base = TcParams::new(SQRT_HALF, SQRT_HALF, 1.0, 0.0).unwrap();
    let grid = linspace(0.0, 2.565, 50);
    let rows = tc_curve(&base, &grid, 30, 100_001).unwrap();
    assert_eq!(rows.len(), 50);
    assert_eq!(rows[0].eof, 0.0, "EOF(0) must be exactly zero");
    for r in &rows {
        assert_eq!(r.ec.is_some(), r.eb);
        if let Some(ec) = r.ec {
            assert_eq!(ec, r.eof, "cost must equal the EOF at EB-flagged times");
        }
    }

    // Periodicity: coefficients, reductions, and warm-started EOF repeat.
    let period = 2.0 * std::f64::consts::PI / 6f64.sqrt();
    for i in 0..12 {
        let t = 0.05 + i as f64 * 0.2;
        let p1 = TcParams::new(SQRT_HALF, SQRT_HALF, 1.0, t).unwrap();
        let p2 = TcParams::new(SQRT_HALF, SQRT_HALF, 1.0, t + period).unwrap();
        let c1 = tc_coefficients(&p1);
        let c2 = tc_coefficients(&p2);
        assert!((c1.c1 - c2.c1).norm() <= 1e-10);
        assert!((c1.c2 - c2.c2).norm() <= 1e-10);
        assert!((c1.c3 - c2.c3).norm() <= 1e-10);
        assert!((c1.c4 - c2.c4).norm() <= 1e-10);
        let r1 = tc_rho_ac(&p1);
        let r2 = tc_rho_ac(&p2);
        assert!((&r1.matrix - &r2.matrix).norm() <= 1e-10);
        let opts = RoofOptions {
            restarts: 20,
            seed: 3,
            ..RoofOptions::default()
        };
        let e1 = convex_roof_eof(&r1, (2, 3), &opts).unwrap();
        let warm = RoofOptions {
            restarts: 0,
            seed: 3,
            warm_start: Some(e1.ansatz.clone()),
            ..RoofOptions::default()
        };
        let e2 = convex_roof_eof(&r2, (2, 3), &warm).unwrap();
        assert!(
            (e1.value - e2.value).abs() <= 1e-10,
            "EOF period violation at t = {}: {} vs {}",
            t,
            e1.value,
            e2.value
        );
    }

    // Parameter map vs independent extraction at regular times.
    for i in 1..20 {
        let x = i as f64 * 0.15;
        let t = x / 6f64.sqrt();
        let p = TcParams::new(SQRT_HALF, SQRT_HALF, 1.0, t).unwrap();
        let mapped = match tc_family3_params(&p) {
            Ok(m) => m,
            Err(_) => continue, // singular time
        };
        let range = tc_range_space(&p).unwrap();
        let extracted = extract_family3_params(&range).unwrap();
        assert!(
            (mapped.d - extracted.d).abs() <= 1e-8,
            "d mismatch at x = {}",
            x
        );
        assert!(
            (mapped.f - extracted.f).abs() <= 1e-8,
            "f mismatch at x = {}",
            x
        );
        assert!(
            (mapped.g - extracted.g).abs() <= 1e-8,
            "g mismatch at x = {}",
            x
        );
    }

    report("10 (Tavis-Cummings)", start, Duration::from_secs(120));
}
