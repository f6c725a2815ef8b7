//! Pullback and pushforward of observables through measurements, quantum
//! processes and classical processes.
//!
//! For a process `Θ` and state `ρ`, the pullback sends a class at `Θρ` to the
//! class of its adjoint image at `ρ`; the pushforward goes the other way and
//! is fixed by `⟨A, Θ*C⟩_ρ = ⟨Θ_*A, C⟩_{Θρ}` for every `C`. Both contract the
//! local seminorms.

use crate::error::{Error, Result};
use crate::linalg::{self, RVector};
use crate::processes::{Channel, ClassicalChannel, Povm};
use crate::systems::{inner_q, DensityOp, HermitianOp, LocalFrame, ProbDist, RealFn, TangentC, TangentQ};
use crate::tolerance::{Tolerances, ZERO_PROB};

/// Class of `M′f` at `ρ`.
pub fn pullback_measurement(m: &Povm, rho: &DensityOp, f: &RealFn, tol: &Tolerances) -> Result<TangentQ> {
    LocalFrame::new(rho, tol).canonical(&m.adjoint(f)?)
}

/// Weak-value form `(M_*A)(i) = Re Tr[E_i A ρ] / Tr[E_i ρ]`, zero on outcomes
/// of vanishing probability.
pub fn pushforward_measurement(m: &Povm, rho: &DensityOp, a: &HermitianOp, tol: &Tolerances) -> Result<TangentC> {
    if a.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: a.dim() });
    }
    let probs = m.raw_probabilities(rho)?;
    let a_rho = a.matrix() * rho.matrix();
    let values = m
        .effects()
        .iter()
        .zip(&probs)
        .map(|(e, &p)| if p > ZERO_PROB { linalg::trace_product(e.matrix(), &a_rho).re / p } else { 0.0 })
        .collect();
    let base = ProbDist::with_tolerances(probs.iter().map(|p| p.max(0.0)).collect(), tol)?;
    TangentC::new(base, RealFn::new(values)?)
}

/// Class of `Θ′C` at `ρ`.
pub fn pullback_channel(t: &Channel, rho: &DensityOp, c: &HermitianOp, tol: &Tolerances) -> Result<TangentQ> {
    LocalFrame::new(rho, tol).canonical(&t.adjoint(c)?)
}

/// Riesz representative at `Θρ` of the functional `C ↦ ⟨A, Θ′C⟩_ρ`.
pub fn pushforward_channel(t: &Channel, rho: &DensityOp, a: &HermitianOp, tol: &Tolerances) -> Result<TangentQ> {
    let out = t.apply(rho, tol)?;
    pushforward_channel_at(&LocalFrame::new(&out, tol), t, rho, a)
}

/// As [`pushforward_channel`], with the output frame already factorized.
pub fn pushforward_channel_at(out: &LocalFrame, t: &Channel, rho: &DensityOp, a: &HermitianOp) -> Result<TangentQ> {
    if a.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: a.dim() });
    }
    let v = RVector::from_iterator(
        out.basis().len(),
        (0..out.basis().len())
            .map(|k| inner_q(a, &t.adjoint(&out.basis().element(k))?, rho))
            .collect::<Result<Vec<_>>>()?,
    );
    out.riesz(&v)
}

/// `(K_*f)(j) = Σ_i K_{ji} f(i) p(i) / (Kp)(j)`.
pub fn pushforward_classical(k: &ClassicalChannel, p: &ProbDist, f: &RealFn) -> Result<TangentC> {
    if f.len() != p.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), found: f.len() });
    }
    let q = k.apply(p)?;
    let values = (0..k.size_out())
        .map(|j| {
            let qj = q.weight(j);
            if qj <= ZERO_PROB {
                return 0.0;
            }
            (0..k.size_in()).map(|i| k.matrix()[(j, i)] * f.values()[i] * p.weight(i)).sum::<f64>() / qj
        })
        .collect();
    TangentC::new(q, RealFn::new(values)?)
}

/// Class of `K′g` at `p`.
pub fn pullback_classical(k: &ClassicalChannel, p: &ProbDist, g: &RealFn) -> Result<TangentC> {
    TangentC::new(p.clone(), k.adjoint(g)?)
}

/// Largest violation of the defining pushforward identity against the output
/// basis.
pub fn channel_duality_defect(t: &Channel, rho: &DensityOp, a: &HermitianOp, tol: &Tolerances) -> Result<f64> {
    let pf = pushforward_channel(t, rho, a, tol)?;
    let basis = crate::systems::HermitianBasis::new(t.dim_out());
    let mut worst = 0.0f64;
    for k in 0..basis.len() {
        let c = basis.element(k);
        let lhs = pf.inner(&c)?;
        let rhs = inner_q(a, &t.adjoint(&c)?, rho)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Same check for a measurement, against outcome indicators.
pub fn measurement_duality_defect(m: &Povm, rho: &DensityOp, a: &HermitianOp, tol: &Tolerances) -> Result<f64> {
    let pf = pushforward_measurement(m, rho, a, tol)?;
    let mut worst = 0.0f64;
    for i in 0..m.outcomes() {
        let mut g = vec![0.0; m.outcomes()];
        g[i] = 1.0;
        let g = RealFn::new(g)?;
        let lhs = pf.inner(&g)?;
        let rhs = inner_q(a, &m.adjoint(&g)?, rho)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Deviations between transporting through a composite process and through
/// its factors one at a time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositionReport {
    pub pushforward_deviation: f64,
    pub pullback_deviation: f64,
    pub contraction_slack: f64,
}

impl CompositionReport {
    pub fn max_deviation(&self) -> f64 {
        self.pushforward_deviation.max(self.pullback_deviation)
    }
}

/// Compares `(Θₙ∘…∘Θ₁)_*A` with `Θₙ_* … Θ₁_* A` at the final state, and
/// `(Θₙ∘…∘Θ₁)^*C` with `Θ₁^* … Θₙ^* C` at `ρ`. Also records the smallest
/// contraction slack seen along the sequential path.
pub fn compose_check(
    chain: &[Channel],
    rho: &DensityOp,
    a: &HermitianOp,
    c: &HermitianOp,
    tol: &Tolerances,
) -> Result<CompositionReport> {
    let (first, rest) = chain
        .split_first()
        .ok_or_else(|| Error::InvalidInput("composition chain is empty".into()))?;
    let composite = rest.iter().try_fold(first.clone(), |acc, ch| acc.then(ch))?;

    let mut states = vec![rho.clone()];
    for ch in chain {
        let next = ch.apply(states.last().unwrap(), tol)?;
        states.push(next);
    }
    let last = states.last().unwrap();

    let mut slack = f64::INFINITY;
    let mut class = LocalFrame::new(rho, tol).canonical(a)?;
    for (ch, state) in chain.iter().zip(&states) {
        let next = pushforward_channel(ch, state, class.representative(), tol)?;
        slack = slack.min(class.seminorm() - next.seminorm());
        class = next;
    }
    let direct = pushforward_channel(&composite, rho, a, tol)?;
    let pushforward_deviation = direct.distance_to(class.representative())?;

    let mut back = LocalFrame::new(last, tol).canonical(c)?;
    for (ch, state) in chain.iter().zip(&states).rev() {
        let next = pullback_channel(ch, state, back.representative(), tol)?;
        slack = slack.min(back.seminorm() - next.seminorm());
        back = next;
    }
    let direct_back = pullback_channel(&composite, rho, c, tol)?;
    let pullback_deviation = direct_back.distance_to(back.representative())?;

    Ok(CompositionReport { pushforward_deviation, pullback_deviation, contraction_slack: slack })
}
