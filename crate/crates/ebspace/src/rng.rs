//! Seeded random sampling helpers.
//!
//! All randomized routines in this crate take an explicit `u64` seed and
//! derive per-restart streams with [`stream_rng`], so results are
//! reproducible regardless of scheduling.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::tensor::{c, CMat, CVec};

/// RNG for a given `(seed, stream)` pair.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_complex_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    DMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Vector with i.i.d. standard complex Gaussian entries.
pub fn random_complex_vector(dim: usize, rng: &mut impl Rng) -> CVec {
    DVector::from_fn(dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random unitary via QR of a Gaussian matrix.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> CMat {
    let g = random_complex_matrix(dim, dim, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // Fix the phase convention so the distribution is Haar.
    for j in 0..dim {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..dim {
                q[(i, j)] *= phase.conj();
            }
        }
    }
    q
}

/// Random density operator of the given rank (eigenvalue-weighted projectors).
pub fn random_density(dim: usize, rank: usize, rng: &mut impl Rng) -> CMat {
    let a = random_complex_matrix(dim, rank, rng);
    let m = &a * a.adjoint();
    let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
    m.unscale(tr)
}
