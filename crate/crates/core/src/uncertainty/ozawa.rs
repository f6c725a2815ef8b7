use serde::Serialize;

use super::relation::check_relation_error_disturbance;
use super::{error, loss_radicand, BoundTerms};
use crate::error::{Error, Result};
use crate::processes::{induced_channel, induced_povm, Instrument, KrausChannel, Povm};
use crate::systems::{expectation, local_product, std_dev, DensityOp, HermitianOp, RealFn};
use crate::tolerance::Tolerances;

/// Noise-operator error of a labelled measurement,
/// `⟨M′(m²)⟩ − ⟨{M′(m), A}⟩ + ⟨A²⟩`, square-rooted.
pub fn ozawa_error(a: &HermitianOp, m: &Povm, rho: &DensityOp, tol: &Tolerances) -> Result<f64> {
    let labels = m.labels().ok_or(Error::MissingLabels)?;
    let probs = m.apply(rho)?;
    let second: f64 = labels.iter().zip(probs.weights()).map(|(x, p)| x * x * p).sum();
    let mean_op = m.adjoint(&RealFn::new(labels.to_vec())?)?;
    let cross = 2.0 * local_product(&mean_op, a, rho)?.re;
    loss_radicand(second + expectation(&a.square(), rho)?, cross, tol).map(f64::sqrt)
}

/// Noise-operator disturbance, `⟨Θ′(B²)⟩ − ⟨{Θ′(B), B}⟩ + ⟨B²⟩`,
/// square-rooted. Needs `Θ` to return to the input system.
pub fn ozawa_disturbance(b: &HermitianOp, t: &KrausChannel, rho: &DensityOp, tol: &Tolerances) -> Result<f64> {
    if t.dim_in() != t.dim_out() {
        return Err(Error::DimensionMismatch { expected: t.dim_in(), found: t.dim_out() });
    }
    let heis_sq = t.adjoint(&b.square())?;
    let heis = t.adjoint(b)?;
    let cross = 2.0 * local_product(&heis, b, rho)?.re;
    loss_radicand(expectation(&heis_sq, rho)? + expectation(&b.square(), rho)?, cross, tol).map(f64::sqrt)
}

/// Every quantity in the comparison chain, and the slack of each link:
/// `ε_O ≥ ε`, `η_O ≥ η`, `εη ≥ √(R²+I²)`, `√(R²+I²) ≥ |I|`,
/// `|I| ≥ |⟨[A,B]⟩|/2 − ε_O σ(B) − σ(A) η_O`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OzawaChain {
    pub ozawa_error: f64,
    pub ozawa_disturbance: f64,
    pub error: f64,
    pub disturbance: f64,
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub half_commutator: f64,
    pub bounds: BoundTerms,
    /// `|⟨[A,B]⟩|/2 − ε_O σ(B) − σ(A) η_O`, the chain's right end.
    pub ozawa_bound: f64,
    pub links: [f64; 5],
}

impl OzawaChain {
    pub const LINK_NAMES: [&'static str; 5] = ["error", "disturbance", "product", "quadrature", "commutator"];

    pub fn min_slack(&self) -> f64 {
        self.links.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn holds(&self, tol: &Tolerances) -> bool {
        self.min_slack() >= -tol.num
    }

    /// Index of the link with the smallest slack.
    pub fn tightest_link(&self) -> usize {
        let mut best = 0;
        for k in 1..5 {
            if self.links[k] < self.links[best] {
                best = k;
            }
        }
        best
    }

    /// `ε_O η_O`, the chain's left end.
    pub fn ozawa_product(&self) -> f64 {
        self.ozawa_error * self.ozawa_disturbance
    }
}

pub fn ozawa_chain_check(a: &HermitianOp, b: &HermitianOp, ins: &Instrument, rho: &DensityOp, tol: &Tolerances) -> Result<OzawaChain> {
    let m = induced_povm(ins);
    let theta = induced_channel(ins);
    let eps_o = ozawa_error(a, &m, rho, tol)?;
    let eta_o = ozawa_disturbance(b, &theta, rho, tol)?;
    let eps = error(a, &m, rho, tol)?;
    let report = check_relation_error_disturbance(a, b, ins, rho, tol)?;
    let eta = report.eps_or_eta_b;
    let bounds = report.bounds;
    let sigma_a = std_dev(a, rho)?;
    let sigma_b = std_dev(b, rho)?;
    let half_commutator = local_product(a, b, rho)?.im;
    let ozawa_bound = half_commutator.abs() - eps_o * sigma_b - sigma_a * eta_o;
    let links = [eps_o - eps, eta_o - eta, eps * eta - bounds.full, bounds.full - bounds.simple, bounds.simple - ozawa_bound];
    Ok(OzawaChain {
        ozawa_error: eps_o,
        ozawa_disturbance: eta_o,
        error: eps,
        disturbance: eta,
        sigma_a,
        sigma_b,
        half_commutator,
        bounds,
        ozawa_bound,
        links,
    })
}
