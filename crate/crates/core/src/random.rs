//! Seeded random generators for operators, states and channels.
//!
//! Everything takes an explicit RNG so callers (tests, the reproduce suites)
//! stay deterministic; `seeded(seed)` is the single entry point for creating
//! one.

use crate::channel::{ChannelChoi, SystemDim};
use crate::operator::{pinv_sqrt, CMatrix, Cx, ProductDims};
use rand::{Rng, RngExt};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Deterministic RNG used across the crate.
pub type SeededRng = ChaCha12Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Standard normal sample via Box-Muller.
fn normal(rng: &mut impl Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 1e-300 {
            let v: f64 = rng.random();
            return (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos();
        }
    }
}

fn ginibre(d: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| Cx::new(normal(rng), normal(rng)))
}

/// Random Hermitian matrix with Gaussian entries, Frobenius scale about d.
pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = ginibre(d, rng);
    g.add(&g.dagger()).scale(0.5)
}

/// Random pure state as a rank-one projector.
pub fn random_pure(d: usize, rng: &mut impl Rng) -> CMatrix {
    let mut amps: Vec<Cx> = (0..d).map(|_| Cx::new(normal(rng), normal(rng))).collect();
    let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for a in amps.iter_mut() {
        *a /= Cx::new(norm, 0.0);
    }
    CMatrix::from_fn(d, d, |r, c| amps[r] * amps[c].conj())
}

/// Random full-rank density matrix (Hilbert-Schmidt measure).
pub fn random_density(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = ginibre(d, rng);
    let w = g.matmul(&g.dagger());
    let t = w.trace().re;
    w.scale(1.0 / t)
}

/// Haar-ish random unitary from the QR decomposition of a Ginibre matrix,
/// with the R diagonal phases absorbed so the distribution is exact.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = ginibre(d, rng);
    // Gram-Schmidt on columns; d stays small so stability is not a concern.
    let mut cols: Vec<Vec<Cx>> = (0..d)
        .map(|c| (0..d).map(|r| g.entry(r, c)).collect())
        .collect();
    for c in 0..d {
        for p in 0..c {
            let proj: Cx = (0..d).map(|r| cols[p][r].conj() * cols[c][r]).sum();
            for r in 0..d {
                let sub = proj * cols[p][r];
                cols[c][r] -= sub;
            }
        }
        let norm: f64 = cols[c].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for r in 0..d {
            cols[c][r] /= Cx::new(norm, 0.0);
        }
    }
    CMatrix::from_fn(d, d, |r, c| cols[c][r])
}

/// Random full-rank channel: a Ginibre Choi matrix with its input marginal
/// normalized to the identity.
pub fn random_channel(d_in: usize, d_out: usize, rng: &mut impl Rng) -> ChannelChoi {
    let n = d_in * d_out;
    let g = ginibre(n, rng);
    let w = g
        .matmul(&g.dagger())
        .add(&CMatrix::identity(n).scale(1e-6));
    let dims = ProductDims::new(&[d_in, d_out]).expect("positive dims");
    let marg = w.partial_trace(&dims, &[0]).expect("marginal");
    let fix = pinv_sqrt(&marg, 1e-12).tensor(&CMatrix::identity(d_out));
    let j = fix.matmul(&w).matmul(&fix.dagger());
    ChannelChoi::new(SystemDim::new(d_in, d_out).expect("dims"), j)
        .expect("normalized Choi is a channel")
}
