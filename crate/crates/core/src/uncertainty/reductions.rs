use serde::Serialize;

use super::relation::check_relation_error_disturbance;
use super::{bound_terms_joint, error, BoundTerms, RelationReport};
use crate::error::{Error, Result};
use crate::processes::{Instrument, JointMeasurement};
use crate::sampling::non_informative_povm;
use crate::systems::{expectation, local_product, std_dev, DensityOp, HermitianOp, ProbDist};
use crate::tolerance::Tolerances;

/// A measurement whose statistics ignore the state, checked against the
/// Schrödinger relation it reduces to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobertsonReport {
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub eps_a: f64,
    pub eps_b: f64,
    pub cov_sym: f64,
    pub half_commutator: f64,
    pub bounds: BoundTerms,
    /// `√(Cov_sym² + ⟨[A,B]/2i⟩²)`.
    pub schrodinger_bound: f64,
    /// `max(|ε(A) − σ(A)|, |ε(B) − σ(B)|)`.
    pub eps_deviation: f64,
    /// `|√(R²+I²) − schrodinger_bound|`.
    pub bound_deviation: f64,
    pub lhs: f64,
    pub satisfied: bool,
}

pub fn robertson_reduction(a: &HermitianOp, b: &HermitianOp, rho: &DensityOp, tol: &Tolerances) -> Result<RobertsonReport> {
    let m = non_informative_povm(rho.dim(), &ProbDist::uniform(2));
    let joint = JointMeasurement::diagonal(&m);
    let eps_a = error(a, &m, rho, tol)?;
    let eps_b = error(b, &m, rho, tol)?;
    let bounds = bound_terms_joint(a, b, &m, &m, &joint, rho, tol)?;
    let sigma_a = std_dev(a, rho)?;
    let sigma_b = std_dev(b, rho)?;
    let product = local_product(a, b, rho)?;
    let cov_sym = product.re - expectation(a, rho)? * expectation(b, rho)?;
    let half_commutator = product.im;
    let schrodinger_bound = cov_sym.hypot(half_commutator);
    let lhs = eps_a * eps_b;
    Ok(RobertsonReport {
        sigma_a,
        sigma_b,
        eps_a,
        eps_b,
        cov_sym,
        half_commutator,
        bounds,
        schrodinger_bound,
        eps_deviation: (eps_a - sigma_a).abs().max((eps_b - sigma_b).abs()),
        bound_deviation: (bounds.full - schrodinger_bound).abs(),
        lhs,
        satisfied: lhs - bounds.full >= -tol.num,
    })
}

/// Errorless measurement of `A` by its Lüders instrument, with the effect on
/// `B`: the relation holds while the product may fall below the naive
/// commutator bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoFreeMeasurement {
    pub relation: RelationReport,
    /// `|⟨[A,B]⟩_ρ| / 2`.
    pub naive_bound: f64,
    pub violates_naive: bool,
}

impl NoFreeMeasurement {
    pub fn eps_a(&self) -> f64 {
        self.relation.eps_a
    }

    pub fn eta_b(&self) -> f64 {
        self.relation.eps_or_eta_b
    }
}

pub fn no_free_measurement(a: &HermitianOp, b: &HermitianOp, rho: &DensityOp, tol: &Tolerances) -> Result<NoFreeMeasurement> {
    let ins = Instrument::luders_of(a, tol.spec);
    let relation = check_relation_error_disturbance(a, b, &ins, rho, tol)?;
    let naive_bound = local_product(a, b, rho)?.im.abs();
    let violates_naive = relation.lhs < naive_bound - tol.num;
    Ok(NoFreeMeasurement { relation, naive_bound, violates_naive })
}

/// Spin case in dimension `dim`: `A = 2J_x`, `B = 2J_y`, `ρ` the top `J_z`
/// eigenstate. For `dim = 2` this is `σx`, `σy`, `|0⟩⟨0|`.
pub fn no_free_measurement_demo(dim: usize, tol: &Tolerances) -> Result<NoFreeMeasurement> {
    if dim < 2 {
        return Err(Error::InvalidInput(format!("dimension {dim} has no incompatible pair")));
    }
    let (jx, jy, _) = HermitianOp::spin(dim);
    let rho = DensityOp::basis_state(dim, 0);
    no_free_measurement(&jx.scale(2.0), &jy.scale(2.0), &rho, tol)
}
