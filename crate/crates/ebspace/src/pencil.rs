//! Matrix pencils and rank-one point detection.
//!
//! A two-dimensional bipartite subspace, reshaped, becomes the pencil
//! `mu*M1 + lambda*M2`. A vector of the subspace is a product vector exactly
//! when its reshaped matrix has rank one, so locating the projective points
//! `[mu : lambda]` where the pencil drops to rank one locates all product
//! vectors of the subspace.
//!
//! Detection follows the minor-polynomial route: every 2x2 minor of the
//! pencil is a homogeneous quadratic in `(mu, lambda)`; the rank-one points
//! are the common roots of all minors, and each candidate root is verified
//! by SVD. Points at infinity are covered by solving each quadratic in
//! whichever affine chart keeps it well conditioned.

use crate::error::{Error, Result};
use crate::tensor::{c, cr, singular_values, CMat, C64};
use crate::tol;

/// Pair of equal-shaped matrices defining the pencil `mu*M1 + lambda*M2`.
#[derive(Clone, Debug)]
pub struct MatrixPencil {
    pub m1: CMat,
    pub m2: CMat,
}

impl MatrixPencil {
    pub fn new(m1: CMat, m2: CMat) -> Result<Self> {
        if m1.shape() != m2.shape() {
            return Err(Error::Dimensions(format!(
                "pencil matrices have shapes {:?} and {:?}",
                m1.shape(),
                m2.shape()
            )));
        }
        Ok(MatrixPencil { m1, m2 })
    }

    pub fn eval(&self, mu: C64, lambda: C64) -> CMat {
        &self.m1 * mu + &self.m2 * lambda
    }
}

/// A projective point `[mu : lambda]`, stored normalized.
#[derive(Clone, Debug)]
pub struct PencilPoint {
    pub mu: C64,
    pub lambda: C64,
}

impl PencilPoint {
    fn normalized(mu: C64, lambda: C64) -> Self {
        let n = (mu.norm_sqr() + lambda.norm_sqr()).sqrt();
        let (mut mu, mut lambda) = (mu / n, lambda / n);
        // Canonical phase: first significant component real positive.
        let anchor = if mu.norm() >= lambda.norm() {
            mu
        } else {
            lambda
        };
        if anchor.norm() > 0.0 {
            let phase = anchor / anchor.norm();
            mu /= phase;
            lambda /= phase;
        }
        PencilPoint { mu, lambda }
    }

    /// Chordal distance on the projective line; zero iff equal points.
    pub fn distance(&self, other: &PencilPoint) -> f64 {
        chordal(self.mu, self.lambda, other.mu, other.lambda)
    }
}

/// Chordal distance between `[a0:a1]` and `[b0:b1]`.
pub fn chordal(a0: C64, a1: C64, b0: C64, b1: C64) -> f64 {
    let cross = a0 * b1 - a1 * b0;
    let na = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
    let nb = (b0.norm_sqr() + b1.norm_sqr()).sqrt();
    cross.norm() / (na * nb)
}

/// Result of scanning a pencil for rank-one points.
#[derive(Clone, Debug)]
pub enum RankOnePoints {
    /// Finitely many verified points (possibly none).
    Discrete(Vec<PencilPoint>),
    /// Every member of the pencil has rank at most one.
    Continuum,
}

impl RankOnePoints {
    pub fn points(&self) -> &[PencilPoint] {
        match self {
            RankOnePoints::Discrete(p) => p,
            RankOnePoints::Continuum => &[],
        }
    }

    pub fn is_continuum(&self) -> bool {
        matches!(self, RankOnePoints::Continuum)
    }
}

/// Homogeneous quadratic `alpha*mu^2 + beta*mu*lambda + gamma*lambda^2`.
#[derive(Clone, Copy, Debug)]
struct Quadratic {
    alpha: C64,
    beta: C64,
    gamma: C64,
}

impl Quadratic {
    fn magnitude(&self) -> f64 {
        self.alpha
            .norm()
            .max(self.beta.norm())
            .max(self.gamma.norm())
    }

    /// Projective roots of `alpha*mu^2 + beta*mu*lambda + gamma*lambda^2`,
    /// at most two, including points at infinity of either affine chart.
    fn roots(&self) -> Vec<(C64, C64)> {
        let (a, b, g) = (self.alpha, self.beta, self.gamma);
        let scale = self.magnitude();
        if scale == 0.0 {
            return vec![];
        }
        let eps = 1e-13 * scale;
        if a.norm() <= eps {
            // lambda * (beta*mu + gamma*lambda): [1:0] plus a linear root.
            if b.norm() <= eps {
                // gamma*lambda^2 alone: double root at [1:0].
                return vec![(cr(1.0), cr(0.0))];
            }
            return vec![(cr(1.0), cr(0.0)), (-g, b)];
        }
        if g.norm() <= eps {
            // mu * (alpha*mu + beta*lambda): [0:1] plus a linear root.
            return vec![(cr(0.0), cr(1.0)), (-b, a)];
        }
        // Both end coefficients significant: both roots are finite and
        // nonzero in the chart mu = t, lambda = 1.
        quadratic_roots(a, b, g)
            .into_iter()
            .map(|t| (t, cr(1.0)))
            .collect()
    }
}

/// Roots of `a z^2 + b z + c` for significant `a`, via the numerically
/// stable complex quadratic formula.
fn quadratic_roots(a: C64, b: C64, cc: C64) -> Vec<C64> {
    let scale = a.norm().max(b.norm()).max(cc.norm());
    let disc = (b * b - a * cc * cr(4.0)).sqrt();
    // Pick the branch that avoids cancellation.
    let q = if (b + disc).norm() >= (b - disc).norm() {
        -(b + disc) * cr(0.5)
    } else {
        (disc - b) * cr(0.5)
    };
    if q.norm() <= 1e-14 * scale {
        return vec![cr(0.0), -b / a];
    }
    vec![q / a, cc / q]
}

/// All projective points where the pencil has numerical rank exactly one.
///
/// A pencil whose members all have rank at most one is reported as
/// [`RankOnePoints::Continuum`]. Completeness holds for pencils whose 2x2
/// minors have well-separated roots; every returned point is SVD-verified.
pub fn rank_one_points(p: &MatrixPencil) -> Result<RankOnePoints> {
    let n1 = p.m1.norm();
    let n2 = p.m2.norm();
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::Precondition(
            "pencil matrices must be nonzero".into(),
        ));
    }
    // Work with Frobenius-normalized matrices so tolerances are absolute.
    let scaled = MatrixPencil {
        m1: p.m1.unscale(n1),
        m2: p.m2.unscale(n2),
    };

    let (rows, cols) = scaled.m1.shape();
    let mut minors: Vec<Quadratic> = Vec::new();
    for r1 in 0..rows {
        for r2 in (r1 + 1)..rows {
            for c1 in 0..cols {
                for c2 in (c1 + 1)..cols {
                    let a11 = scaled.m1[(r1, c1)];
                    let a12 = scaled.m1[(r1, c2)];
                    let a21 = scaled.m1[(r2, c1)];
                    let a22 = scaled.m1[(r2, c2)];
                    let b11 = scaled.m2[(r1, c1)];
                    let b12 = scaled.m2[(r1, c2)];
                    let b21 = scaled.m2[(r2, c1)];
                    let b22 = scaled.m2[(r2, c2)];
                    minors.push(Quadratic {
                        alpha: a11 * a22 - a12 * a21,
                        beta: a11 * b22 + b11 * a22 - a12 * b21 - b12 * a21,
                        gamma: b11 * b22 - b12 * b21,
                    });
                }
            }
        }
    }

    let significant: Vec<&Quadratic> = minors.iter().filter(|q| q.magnitude() > 1e-11).collect();
    if significant.is_empty() {
        return Ok(RankOnePoints::Continuum);
    }

    // Candidate roots from every significant minor, then dedupe and verify.
    let mut candidates: Vec<PencilPoint> = Vec::new();
    for q in &significant {
        for (mu, lambda) in q.roots() {
            let pt = PencilPoint::normalized(mu, lambda);
            if candidates.iter().all(|e| e.distance(&pt) > 1e-6) {
                candidates.push(pt);
            }
        }
    }

    let mut verified = Vec::new();
    for pt in candidates {
        let m = scaled.eval(pt.mu, pt.lambda);
        let sv = singular_values(&m);
        if sv.is_empty() {
            continue;
        }
        let s1 = sv[0];
        let s2 = sv.get(1).copied().unwrap_or(0.0);
        if s1 > 1e-10 && s2 <= tol::PENCIL_RANK1 * s1 {
            verified.push(pt);
        }
    }
    Ok(RankOnePoints::Discrete(verified))
}

/// Coefficients `c_k` of `det(mu*M1 + lambda*M2) = sum_k c_k mu^(n-k) lambda^k`
/// for a square pencil of size `n` (returned as `n+1` coefficients).
pub fn determinant_coefficients(p: &MatrixPencil) -> Result<Vec<C64>> {
    let n = p.m1.nrows();
    if p.m1.nrows() != p.m1.ncols() {
        return Err(Error::Dimensions(
            "determinant needs a square pencil".into(),
        ));
    }
    // Evaluate at n+1 parameter values on the unit circle and interpolate.
    let samples = n + 1;
    let mut vander = nalgebra::DMatrix::<C64>::zeros(samples, samples);
    let mut rhs = nalgebra::DVector::<C64>::zeros(samples);
    for (row, t) in (0..samples).map(|i| (i, i as f64 * std::f64::consts::PI / samples as f64)) {
        let mu = c(t.cos(), 0.0);
        let lambda = c(t.sin(), (0.5 * t).sin() * 0.25);
        let norm = (mu.norm_sqr() + lambda.norm_sqr()).sqrt();
        let (mu, lambda) = (mu / norm, lambda / norm);
        rhs[row] = p.eval(mu, lambda).determinant();
        for k in 0..samples {
            vander[(row, k)] = mu.powu((n - k) as u32) * lambda.powu(k as u32);
        }
    }
    let lu = vander.lu();
    lu.solve(&rhs)
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::Singular("determinant interpolation failed".into()))
}

/// Projective roots of a homogeneous polynomial of degree `n` given by its
/// coefficient list `c_k` (of `mu^(n-k) lambda^k`).
pub fn projective_roots(coeffs: &[C64]) -> Vec<PencilPoint> {
    let n = coeffs.len() - 1;
    let scale = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return vec![];
    }
    // Solve in the affine chart whose point at infinity has the larger end
    // coefficient, so at-infinity roots come from *vanishing* coefficients.
    //
    // Chart w = mu/lambda: p(w) = c_0 w^n + .. + c_n, roots [w : 1],
    // infinity = [1:0] (vanishing c_0 side).
    // Chart z = lambda/mu: p(z) = c_n z^n + .. + c_0, roots [1 : z],
    // infinity = [0:1] (vanishing c_n side).
    let use_w_chart = coeffs[0].norm() >= coeffs[n].norm();
    let poly: Vec<C64> = if use_w_chart {
        coeffs.to_vec()
    } else {
        coeffs.iter().rev().copied().collect()
    };
    let mut effective = n;
    while effective > 0 && poly[n - effective].norm() <= 1e-12 * scale {
        effective -= 1;
    }
    let at_infinity = if use_w_chart {
        PencilPoint::normalized(cr(1.0), cr(0.0))
    } else {
        PencilPoint::normalized(cr(0.0), cr(1.0))
    };
    let mut points: Vec<PencilPoint> = Vec::new();
    // Dropped leading degrees are roots at infinity of the chosen chart.
    for _ in 0..(n - effective) {
        points.push(at_infinity.clone());
    }
    if effective == 0 {
        return points;
    }
    let offset = n - effective;
    let lead_coeff = poly[offset];
    // Companion matrix of the monic polynomial of degree `effective`.
    let mut comp = CMat::zeros(effective, effective);
    for i in 1..effective {
        comp[(i, i - 1)] = cr(1.0);
    }
    for i in 0..effective {
        comp[(i, effective - 1)] = -poly[n - i] / lead_coeff;
    }
    if let Some(eigs) = comp.eigenvalues() {
        for root in eigs.iter() {
            let pt = if use_w_chart {
                PencilPoint::normalized(*root, cr(1.0))
            } else {
                PencilPoint::normalized(cr(1.0), *root)
            };
            points.push(pt);
        }
    }
    points
}
