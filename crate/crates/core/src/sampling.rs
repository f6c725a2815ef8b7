//! Seeded random states, observables, measurements, channels and instruments.
//!
//! Every trial of a sweep draws from its own ChaCha20 stream whose seed is a
//! fixed function of `(master_seed, trial_index)`, so results do not depend on
//! the order in which trials run.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, RMatrix};
use crate::processes::{ClassicalChannel, Instrument, KrausChannel, Povm};
use crate::systems::{DensityOp, HermitianOp, ProbDist, RealFn};

const POVM_RETRIES: usize = 16;

/// Per-trial seeding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub trial_index: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedSpec {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        Self { master_seed, trial_index }
    }

    /// The 64-bit seed of this trial's stream; recorded in reports.
    pub fn trial_seed(&self) -> u64 {
        splitmix64(splitmix64(self.master_seed) ^ self.trial_index)
    }

    pub fn rng(&self) -> ChaCha20Rng {
        rng_from_seed(self.trial_seed())
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Entries `(x + i y)/√2` with `x, y` standard normal.
pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| c(s * normal(rng), s * normal(rng)))
}

/// Ginibre (Hilbert–Schmidt measure) state `G G† / Tr[G G†]`.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityOp {
    let g = complex_gaussian(d, d, rng);
    let w = &g * g.adjoint();
    let t = linalg::trace(&w).re;
    DensityOp::from_matrix_unchecked(w.unscale(t))
}

/// Haar-random pure state.
pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityOp {
    let v = complex_gaussian(d, 1, rng);
    DensityOp::pure(v.as_slice()).expect("gaussian vector is nonzero")
}

/// `(G + G†)/2` with `G` complex Gaussian.
pub fn random_observable<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianOp {
    let g = complex_gaussian(d, d, rng);
    HermitianOp::from_hermitian_part(g)
}

/// Haar-random isometry `rows × cols` (`rows ≥ cols`) from the QR
/// factorization of a Gaussian matrix with phases fixed by `R`'s diagonal.
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<CMatrix> {
    if rows < cols || cols == 0 {
        return Err(Error::InvalidInput(format!("no {rows}x{cols} isometry")));
    }
    let qr = complex_gaussian(rows, cols, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..cols {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { linalg::ONE };
        for i in 0..rows {
            q[(i, k)] *= phase;
        }
    }
    Ok(q)
}

pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    haar_isometry(d, d, rng).expect("square isometry")
}

/// Slices a Haar isometry `d_in → d_out·(n_outcomes·n_kraus)` into Kraus
/// blocks, `n_kraus` consecutive blocks per outcome.
pub fn random_instrument<R: Rng + ?Sized>(
    d_in: usize,
    d_out: usize,
    n_outcomes: usize,
    n_kraus: usize,
    rng: &mut R,
) -> Result<Instrument> {
    if d_in == 0 || d_out == 0 || n_outcomes == 0 || n_kraus == 0 {
        return Err(Error::InvalidInput("instrument sizes must be positive".into()));
    }
    let blocks = n_outcomes * n_kraus;
    let v = haar_isometry(d_out * blocks, d_in, rng)?;
    let branches = (0..n_outcomes)
        .map(|i| {
            (0..n_kraus)
                .map(|a| {
                    let b = i * n_kraus + a;
                    v.rows(b * d_out, d_out).into_owned()
                })
                .collect()
        })
        .collect();
    Ok(Instrument::from_branches_unchecked(branches))
}

pub fn random_channel<R: Rng + ?Sized>(d_in: usize, d_out: usize, n_kraus: usize, rng: &mut R) -> Result<KrausChannel> {
    if n_kraus == 0 {
        return Err(Error::InvalidInput("channel needs at least one Kraus operator".into()));
    }
    let v = haar_isometry(d_out * n_kraus, d_in, rng)?;
    Ok(KrausChannel::from_kraus_unchecked(
        (0..n_kraus).map(|a| v.rows(a * d_out, d_out).into_owned()).collect(),
    ))
}

/// `E_i = S^{-1/2} S_i S^{-1/2}` with `S_i = A_i A_i†` Gaussian and `S = Σ S_i`.
pub fn random_povm<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Result<Povm> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidInput("measurement sizes must be positive".into()));
    }
    for _ in 0..POVM_RETRIES {
        let parts: Vec<CMatrix> = (0..n)
            .map(|_| {
                let a = complex_gaussian(d, d, rng);
                &a * a.adjoint()
            })
            .collect();
        let total = parts.iter().fold(CMatrix::zeros(d, d), |acc, s| acc + s);
        let Some(w) = linalg::inverse_sqrt(&total, 1e-10) else {
            continue;
        };
        let effects = parts.iter().map(|s| HermitianOp::from_hermitian_part(&w * s * &w)).collect();
        return Ok(Povm::from_effects_unchecked(effects));
    }
    Err(Error::InvalidInput("could not draw a nonsingular effect sum".into()))
}

/// Effects `q_i·I`: outcome statistics independent of the state.
pub fn non_informative_povm(d: usize, q: &ProbDist) -> Povm {
    Povm::from_effects_unchecked(q.weights().iter().map(|&w| HermitianOp::identity(d).scale(w)).collect())
}

/// Flat Dirichlet draw.
pub fn random_prob_dist<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ProbDist {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    ProbDist::new(raw.into_iter().map(|v| v / total).collect()).expect("normalized")
}

pub fn random_real_fn<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RealFn {
    RealFn::new((0..n).map(|_| normal(rng)).collect()).expect("finite")
}

/// Column-stochastic matrix with independent flat-Dirichlet columns.
pub fn random_classical_channel<R: Rng + ?Sized>(size_in: usize, size_out: usize, rng: &mut R) -> ClassicalChannel {
    let mut m = RMatrix::zeros(size_out, size_in);
    for j in 0..size_in {
        let col = random_prob_dist(size_out, rng);
        m.set_column(j, &DVector::from_column_slice(col.weights()));
    }
    ClassicalChannel::new(m).expect("stochastic by construction")
}

pub fn random_labels<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}
