//! Error, disturbance and the relations between them.
//!
//! Error and disturbance are contraction losses: the part of `‖A‖_ρ` that a
//! pushforward fails to carry over. Relations bound products of these losses
//! from below by a classical term `R` and a quantum term `I`.

mod ozawa;
mod reductions;
mod relation;

pub use ozawa::{ozawa_chain_check, ozawa_disturbance, ozawa_error, OzawaChain};
pub use reductions::{no_free_measurement, no_free_measurement_demo, robertson_reduction, NoFreeMeasurement, RobertsonReport};
pub use relation::{
    bound_i_error_disturbance, bound_terms_joint, check_relation_error_disturbance, check_relation_errors,
    classical_bound_terms, relation_error_disturbance_after, semi_inner_product, BoundTerms, RelationMode, RelationReport, SemiInner,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::processes::{compose_measurement_after_channel, Channel, ClassicalChannel, Povm};
use crate::systems::{inner_c, inner_q, DensityOp, HermitianOp, LocalFrame, ProbDist, RealFn};
use crate::tolerance::Tolerances;
use crate::transport::{pullback_channel, pullback_measurement, pushforward_channel, pushforward_classical, pushforward_measurement};

/// Contraction-loss radicand `before − after`. Differences within rounding of
/// the operands are zero; negatives inside `[−tol_num, 0]` clamp to zero.
pub(crate) fn loss_radicand(before: f64, after: f64, tol: &Tolerances) -> Result<f64> {
    let diff = before - after;
    if diff.abs() <= 16.0 * f64::EPSILON * before.abs().max(after.abs()) {
        return Ok(0.0);
    }
    clamp_radicand(diff, tol)
}

/// Clamps values inside `[−tol_num, 0]` to zero; more negative is an error.
pub(crate) fn clamp_radicand(value: f64, tol: &Tolerances) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::NonFinite);
    }
    if value >= 0.0 {
        Ok(value)
    } else if value >= -tol.num {
        Ok(0.0)
    } else {
        Err(Error::NegativeRadicand { value })
    }
}

/// `ε_ρ(A;M)² = ‖A‖_ρ² − ‖M_*A‖_{Mρ}²`.
pub fn error_squared(a: &HermitianOp, m: &Povm, rho: &DensityOp, tol: &Tolerances) -> Result<f64> {
    let pf = pushforward_measurement(m, rho, a, tol)?;
    let before = inner_q(a, a, rho)?;
    let after = pf.inner(pf.values())?;
    loss_radicand(before, after, tol)
}

pub fn error(a: &HermitianOp, m: &Povm, rho: &DensityOp, tol: &Tolerances) -> Result<f64> {
    error_squared(a, m, rho, tol).map(f64::sqrt)
}

/// `η_ρ(B;Θ)² = ‖B‖_ρ² − ‖Θ_*B‖_{Θρ}²`.
pub fn disturbance_squared(b: &HermitianOp, t: &Channel, rho: &DensityOp, tol: &Tolerances) -> Result<f64> {
    let pf = pushforward_channel(t, rho, b, tol)?;
    let before = inner_q(b, b, rho)?;
    let after = pf.inner(pf.representative())?;
    loss_radicand(before, after, tol)
}

pub fn disturbance(b: &HermitianOp, t: &Channel, rho: &DensityOp, tol: &Tolerances) -> Result<f64> {
    disturbance_squared(b, t, rho, tol).map(f64::sqrt)
}

/// Contraction loss of a random variable through a classical process.
pub fn classical_loss(f: &RealFn, k: &ClassicalChannel, p: &ProbDist, tol: &Tolerances) -> Result<f64> {
    let pf = pushforward_classical(k, p, f)?;
    let before = inner_c(f, f, p)?;
    let after = pf.inner(pf.values())?;
    loss_radicand(before, after, tol).map(f64::sqrt)
}

/// Projective measurement of the canonical representative of `Θ_*B` at
/// `Θρ`. A vanishing pushforward gives the one-outcome measurement.
pub fn optimal_secondary(t: &Channel, b: &HermitianOp, rho: &DensityOp, tol: &Tolerances) -> Result<Povm> {
    let pf = pushforward_channel(t, rho, b, tol)?;
    if pf.seminorm() <= tol.num {
        return Ok(Povm::trivial(t.dim_out()));
    }
    Ok(Povm::projective(pf.representative(), tol.spec))
}

/// Both sides of `ε(A;L∘Θ)² = η(A;Θ)² + ε_{Θρ}(Θ_*A;L)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    pub composite_error_sq: f64,
    pub disturbance_sq: f64,
    pub downstream_error_sq: f64,
    pub deviation: f64,
}

pub fn decomposition_check(a: &HermitianOp, t: &Channel, l: &Povm, rho: &DensityOp, tol: &Tolerances) -> Result<Decomposition> {
    let composite = compose_measurement_after_channel(l, t)?;
    let composite_error_sq = error_squared(a, &composite, rho, tol)?;
    let disturbance_sq = disturbance_squared(a, t, rho, tol)?;
    let out = t.apply(rho, tol)?;
    let pf = pushforward_channel(t, rho, a, tol)?;
    let downstream_error_sq = error_squared(pf.representative(), l, &out, tol)?;
    let deviation = (composite_error_sq - disturbance_sq - downstream_error_sq).abs();
    Ok(Decomposition { composite_error_sq, disturbance_sq, downstream_error_sq, deviation })
}

/// The three characterizations of a lossless transport, each decided by
/// comparing squared seminorms against `tol_num`:
/// (a) the loss vanishes, (b) `A` equals its pullback of its pushforward,
/// (c) `‖A‖ = ‖push A‖ = ‖pull push A‖`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Predicates {
    pub vanishing_loss: bool,
    pub fixed_by_round_trip: bool,
    pub norm_chain: bool,
}

impl Predicates {
    pub fn agree(&self) -> bool {
        self.vanishing_loss == self.fixed_by_round_trip && self.fixed_by_round_trip == self.norm_chain
    }

    fn conclude(self) -> Result<bool> {
        if self.agree() {
            Ok(self.vanishing_loss)
        } else {
            Err(Error::PredicateDisagreement(format!("{self:?}")))
        }
    }
}

fn predicates_from(norm_sq: f64, pushed_sq: f64, round_trip_sq: f64, gap_sq: f64, tol: &Tolerances) -> Predicates {
    Predicates {
        vanishing_loss: norm_sq - pushed_sq <= tol.num,
        fixed_by_round_trip: gap_sq <= tol.num,
        norm_chain: (norm_sq - pushed_sq).abs() <= tol.num && (norm_sq - round_trip_sq).abs() <= tol.num,
    }
}

pub fn measurement_predicates(a: &HermitianOp, m: &Povm, rho: &DensityOp, tol: &Tolerances) -> Result<Predicates> {
    let pf = pushforward_measurement(m, rho, a, tol)?;
    let back = pullback_measurement(m, rho, pf.values(), tol)?;
    let norm_sq = inner_q(a, a, rho)?;
    let pushed_sq = pf.inner(pf.values())?;
    let round_trip_sq = back.seminorm().powi(2);
    let gap_sq = back.distance_to(a)?.powi(2);
    Ok(predicates_from(norm_sq, pushed_sq, round_trip_sq, gap_sq, tol))
}

pub fn channel_predicates(a: &HermitianOp, t: &Channel, rho: &DensityOp, tol: &Tolerances) -> Result<Predicates> {
    let pf = pushforward_channel(t, rho, a, tol)?;
    let back = pullback_channel(t, rho, pf.representative(), tol)?;
    let norm_sq = inner_q(a, a, rho)?;
    let pushed_sq = pf.seminorm().powi(2);
    let round_trip_sq = back.seminorm().powi(2);
    let gap_sq = back.distance_to(a)?.powi(2);
    Ok(predicates_from(norm_sq, pushed_sq, round_trip_sq, gap_sq, tol))
}

/// Whether `M` measures `A` without error over `ρ`; errors if the three
/// characterizations disagree.
pub fn errorless_predicate(a: &HermitianOp, m: &Povm, rho: &DensityOp, tol: &Tolerances) -> Result<bool> {
    measurement_predicates(a, m, rho, tol)?.conclude()
}

/// Whether `Θ` leaves `A` undisturbed over `ρ`; errors if the three
/// characterizations disagree.
pub fn disturbanceless_predicate(a: &HermitianOp, t: &Channel, rho: &DensityOp, tol: &Tolerances) -> Result<bool> {
    channel_predicates(a, t, rho, tol)?.conclude()
}

/// Canonical representative of `Θ^*(Θ_*B)` at `ρ`.
pub fn round_trip_channel(t: &Channel, rho: &DensityOp, b: &HermitianOp, tol: &Tolerances) -> Result<HermitianOp> {
    let pf = pushforward_channel(t, rho, b, tol)?;
    let back = t.adjoint(pf.representative())?;
    Ok(LocalFrame::new(rho, tol).canonical(&back)?.representative().clone())
}
