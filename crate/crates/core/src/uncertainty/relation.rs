use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{disturbance, error, optimal_secondary, round_trip_channel};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::processes::{
    compose_measurement_after_channel, induced_channel, induced_povm, joint_measurement, Channel, ClassicalChannel,
    Instrument, JointMeasurement, Povm,
};
use crate::systems::{local_product, DensityOp, HermitianOp, ProbDist, RealFn};
use crate::tolerance::Tolerances;
use crate::transport::{pullback_measurement, pushforward_measurement};

/// Lower-bound terms: `R` is shared with classical processes, `I` is the
/// quantum contribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundTerms {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "I")]
    pub i: f64,
    pub full: f64,
    pub simple: f64,
}

impl BoundTerms {
    pub fn new(r: f64, i: f64) -> Self {
        Self { r, i, full: r.hypot(i), simple: i.abs() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationMode {
    ErrorsJoint,
    ErrorDisturbance,
}

impl RelationMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RelationMode::ErrorsJoint => "errors-joint",
            RelationMode::ErrorDisturbance => "error-disturbance",
        }
    }
}

/// One evaluated instance of a relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub mode: RelationMode,
    pub eps_a: f64,
    pub eps_or_eta_b: f64,
    pub lhs: f64,
    pub bounds: BoundTerms,
    /// `lhs` minus the bound the mode asserts (`full` for errors-joint,
    /// `simple` for error-disturbance).
    pub slack: f64,
    pub satisfied_full: bool,
    pub satisfied_simple: bool,
    pub seed: Option<u64>,
    pub dim_in: usize,
    pub dim_out: usize,
}

impl RelationReport {
    fn assemble(mode: RelationMode, eps_a: f64, second: f64, bounds: BoundTerms, dims: (usize, usize), tol: &Tolerances) -> Self {
        let lhs = eps_a * second;
        let asserted = match mode {
            RelationMode::ErrorsJoint => bounds.full,
            RelationMode::ErrorDisturbance => bounds.simple,
        };
        Self {
            mode,
            eps_a,
            eps_or_eta_b: second,
            lhs,
            bounds,
            slack: lhs - asserted,
            satisfied_full: lhs - bounds.full >= -tol.num,
            satisfied_simple: lhs - bounds.simple >= -tol.num,
            seed: None,
            dim_in: dims.0,
            dim_out: dims.1,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// The check this mode asserts.
    pub fn satisfied(&self) -> bool {
        match self.mode {
            RelationMode::ErrorsJoint => self.satisfied_full,
            RelationMode::ErrorDisturbance => self.satisfied_simple,
        }
    }
}

fn max_effect_gap(x: &Povm, y: &Povm) -> f64 {
    x.effects()
        .iter()
        .zip(y.effects())
        .map(|(e, f)| linalg::max_abs(&(e.matrix() - f.matrix())))
        .fold(0.0, f64::max)
}

fn check_marginals(m: &Povm, n: &Povm, joint: &JointMeasurement, tol: &Tolerances) -> Result<()> {
    if joint.first_outcomes() != m.outcomes() || joint.second_outcomes() != n.outcomes() {
        return Err(Error::DimensionMismatch {
            expected: m.outcomes() * n.outcomes(),
            found: joint.first_outcomes() * joint.second_outcomes(),
        });
    }
    for (which, marginal, target) in [(1, joint.first_marginal(), m), (2, joint.second_marginal(), n)] {
        let deviation = max_effect_gap(&marginal, target);
        if deviation > tol.num {
            return Err(Error::MarginalMismatch { which, deviation });
        }
    }
    Ok(())
}

/// `Im Tr[ABρ] − Im Tr[PBρ] − Im Tr[AQρ]`.
fn quantum_term(a: &HermitianOp, b: &HermitianOp, p: &HermitianOp, q: &HermitianOp, rho: &DensityOp) -> Result<f64> {
    Ok(local_product(a, b, rho)?.im - local_product(p, b, rho)?.im - local_product(a, q, rho)?.im)
}

fn joint_probabilities(joint: &JointMeasurement, rho: &DensityOp) -> Result<Vec<f64>> {
    Ok(joint.povm().apply(rho)?.weights().to_vec())
}

/// `R` and `I` for measurements `M`, `N` jointly described by `J`.
pub fn bound_terms_joint(
    a: &HermitianOp,
    b: &HermitianOp,
    m: &Povm,
    n: &Povm,
    joint: &JointMeasurement,
    rho: &DensityOp,
    tol: &Tolerances,
) -> Result<BoundTerms> {
    check_marginals(m, n, joint, tol)?;
    let ma = pushforward_measurement(m, rho, a, tol)?;
    let mb = pushforward_measurement(m, rho, b, tol)?;
    let na = pushforward_measurement(n, rho, a, tol)?;
    let nb = pushforward_measurement(n, rho, b, tol)?;
    let probs = joint_probabilities(joint, rho)?;
    let second = joint.second_outcomes();
    let cross: f64 = probs
        .iter()
        .enumerate()
        .map(|(k, w)| ma.values().values()[k / second] * nb.values().values()[k % second] * w)
        .sum();
    let r = local_product(a, b, rho)?.re - ma.inner(mb.values())? - na.inner(nb.values())? + cross;

    let p = pullback_measurement(m, rho, ma.values(), tol)?;
    let q = pullback_measurement(n, rho, nb.values(), tol)?;
    let i = quantum_term(a, b, p.representative(), q.representative(), rho)?;
    Ok(BoundTerms::new(r, i))
}

/// The semi-inner product `⟨(X_A,f_A),(Y_B,g_B)⟩` assembled from its
/// definition, with the seminorms of both arguments. Its real and imaginary
/// parts reproduce `R` and `I`; the seminorms reproduce the two errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiInner {
    pub value: Complex64,
    pub norm_first: f64,
    pub norm_second: f64,
}

pub fn semi_inner_product(
    a: &HermitianOp,
    b: &HermitianOp,
    m: &Povm,
    n: &Povm,
    joint: &JointMeasurement,
    rho: &DensityOp,
    tol: &Tolerances,
) -> Result<SemiInner> {
    check_marginals(m, n, joint, tol)?;
    let (n1, n2) = (joint.first_outcomes(), joint.second_outcomes());
    let f = pushforward_measurement(m, rho, a, tol)?.values().values().to_vec();
    let g = pushforward_measurement(n, rho, b, tol)?.values().values().to_vec();
    // Lift to Ω₁ × Ω₂ and pull back through J directly.
    let lift_f: Vec<f64> = (0..n1 * n2).map(|k| f[k / n2]).collect();
    let lift_g: Vec<f64> = (0..n1 * n2).map(|k| g[k % n2]).collect();
    let jf = joint.povm().adjoint(&RealFn::new(lift_f.clone())?)?;
    let jg = joint.povm().adjoint(&RealFn::new(lift_g.clone())?)?;
    let x = a.matrix() - m.adjoint(&RealFn::new(f)?)?.matrix();
    let y = b.matrix() - n.adjoint(&RealFn::new(g)?)?.matrix();
    let probs = joint_probabilities(joint, rho)?;

    let form = |x1: &CMatrix, u: &[f64], x2: &CMatrix, v: &[f64], j1: &CMatrix, j2: &CMatrix| -> Complex64 {
        let r = rho.matrix();
        let classical: f64 = u.iter().zip(v).zip(&probs).map(|((s, t), w)| s * t * w).sum();
        linalg::trace_product(&(x1.adjoint() * x2), r) + classical - linalg::trace_product(&(j1.adjoint() * j2), r)
    };
    let value = form(&x, &lift_f, &y, &lift_g, jf.matrix(), jg.matrix());
    let nf = form(&x, &lift_f, &x, &lift_f, jf.matrix(), jf.matrix()).re;
    let ng = form(&y, &lift_g, &y, &lift_g, jg.matrix(), jg.matrix()).re;
    Ok(SemiInner { value, norm_first: nf.max(0.0).sqrt(), norm_second: ng.max(0.0).sqrt() })
}

/// `I` with the second measurement's round trip replaced by `Θ`'s: independent
/// of the secondary measurement once it is optimal.
pub fn bound_i_error_disturbance(
    a: &HermitianOp,
    b: &HermitianOp,
    m: &Povm,
    t: &Channel,
    rho: &DensityOp,
    tol: &Tolerances,
) -> Result<f64> {
    let ma = pushforward_measurement(m, rho, a, tol)?;
    let p = pullback_measurement(m, rho, ma.values(), tol)?;
    let q = round_trip_channel(t, rho, b, tol)?;
    quantum_term(a, b, p.representative(), &q, rho)
}

/// Sequential setup: `M` and `Θ` from the instrument, `N = L ∘ Θ`, `J` the
/// sequential joint measurement.
pub fn check_relation_errors(
    a: &HermitianOp,
    b: &HermitianOp,
    ins: &Instrument,
    l: &Povm,
    rho: &DensityOp,
    tol: &Tolerances,
) -> Result<RelationReport> {
    let m = induced_povm(ins);
    let theta: Channel = induced_channel(ins).into();
    let n = compose_measurement_after_channel(l, &theta)?;
    let joint = joint_measurement(ins, l)?;
    let eps_a = error(a, &m, rho, tol)?;
    let eps_b = error(b, &n, rho, tol)?;
    let bounds = bound_terms_joint(a, b, &m, &n, &joint, rho, tol)?;
    Ok(RelationReport::assemble(RelationMode::ErrorsJoint, eps_a, eps_b, bounds, (ins.dim_in(), ins.dim_out()), tol))
}

/// `ε(A;M)·η(B;Θ) ≥ |I|`, with `I` in its channel form. `R` is reported for
/// the optimal secondary measurement.
pub fn check_relation_error_disturbance(
    a: &HermitianOp,
    b: &HermitianOp,
    ins: &Instrument,
    rho: &DensityOp,
    tol: &Tolerances,
) -> Result<RelationReport> {
    relation_error_disturbance_after(a, b, ins, None, rho, tol)
}

/// As [`check_relation_error_disturbance`], with `Θ` optionally followed by a
/// further process.
pub fn relation_error_disturbance_after(
    a: &HermitianOp,
    b: &HermitianOp,
    ins: &Instrument,
    after: Option<&Channel>,
    rho: &DensityOp,
    tol: &Tolerances,
) -> Result<RelationReport> {
    let m = induced_povm(ins);
    let base: Channel = induced_channel(ins).into();
    let theta = match after {
        Some(extra) => base.then(extra)?,
        None => base.clone(),
    };
    let eps_a = error(a, &m, rho, tol)?;
    let eta_b = disturbance(b, &theta, rho, tol)?;
    let i = bound_i_error_disturbance(a, b, &m, &theta, rho, tol)?;
    let mut l = optimal_secondary(&theta, b, rho, tol)?;
    if let Some(extra) = after {
        l = compose_measurement_after_channel(&l, extra)?;
    }
    let n = compose_measurement_after_channel(&l, &base)?;
    let joint = joint_measurement(ins, &l)?;
    let r = bound_terms_joint(a, b, &m, &n, &joint, rho, tol)?.r;
    let dims = (ins.dim_in(), theta.dim_out());
    Ok(RelationReport::assemble(RelationMode::ErrorDisturbance, eps_a, eta_b, BoundTerms::new(r, i), dims, tol))
}

/// `R` and `I` for two classical processes out of `p`, jointly described by
/// running both on the same sample. Evaluated through the diagonal embedding,
/// so `I` is computed rather than assumed.
pub fn classical_bound_terms(
    f: &RealFn,
    g: &RealFn,
    k1: &ClassicalChannel,
    k2: &ClassicalChannel,
    p: &ProbDist,
    tol: &Tolerances,
) -> Result<BoundTerms> {
    if k1.size_in() != p.len() || k2.size_in() != p.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), found: k1.size_in().max(k2.size_in()) });
    }
    let rho = DensityOp::from_diagonal(p.weights())?;
    let a = HermitianOp::from_real_diagonal(f.values());
    let b = HermitianOp::from_real_diagonal(g.values());
    let (n1, n2) = (k1.size_out(), k2.size_out());
    let effects = (0..n1 * n2)
        .map(|k| {
            let diag: Vec<f64> =
                (0..p.len()).map(|w| k1.matrix()[(k / n2, w)] * k2.matrix()[(k % n2, w)]).collect();
            HermitianOp::from_real_diagonal(&diag)
        })
        .collect();
    let joint = JointMeasurement::new(n1, n2, Povm::with_tolerances(effects, tol)?)?;
    bound_terms_joint(&a, &b, &k1.as_povm(), &k2.as_povm(), &joint, &rho, tol)
}
