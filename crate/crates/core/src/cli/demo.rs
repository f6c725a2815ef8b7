//! Closed-form desk-scale cases, every intermediate quantity next to the
//! value it must take.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};
use crate::processes::{induced_channel, induced_povm, Channel, Instrument, TransferMap};
use crate::systems::{DensityOp, HermitianOp};
use crate::tolerance::{Tolerances, REDUCTION_TOL};
use crate::transport::{pushforward_channel, pushforward_measurement};
use crate::uncertainty::{
    check_relation_error_disturbance, disturbance, error, no_free_measurement, no_free_measurement_demo,
    relation_error_disturbance_after, robertson_reduction,
};

pub const DEMO_NAMES: [&str; 4] = ["luders-xy", "naive-violation", "schrodinger-equality", "transpose-map"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
    /// Closed-form value, when there is one.
    pub expected: Option<f64>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoReport {
    pub name: String,
    pub description: String,
    pub quantities: Vec<Quantity>,
    pub passed: bool,
}

struct Builder {
    tol: f64,
    items: Vec<Quantity>,
}

impl Builder {
    fn new(tol: f64) -> Self {
        Self { tol, items: Vec::new() }
    }

    fn show(&mut self, name: &str, value: f64) {
        self.items.push(Quantity { name: name.into(), value, expected: None, ok: true });
    }

    fn check(&mut self, name: &str, value: f64, expected: f64) {
        let ok = (value - expected).abs() <= self.tol;
        self.items.push(Quantity { name: name.into(), value, expected: Some(expected), ok });
    }

    /// A named condition, recorded as 1 (true) against an expected 1.
    fn holds(&mut self, name: &str, cond: bool) {
        let v = if cond { 1.0 } else { 0.0 };
        self.items.push(Quantity { name: name.into(), value: v, expected: Some(1.0), ok: cond });
    }

    fn finish(self, name: &str, description: &str) -> DemoReport {
        let passed = self.items.iter().all(|q| q.ok);
        DemoReport { name: name.into(), description: description.into(), quantities: self.items, passed }
    }
}

fn x_projectors() -> Vec<HermitianOp> {
    let id = HermitianOp::identity(2);
    let x = HermitianOp::pauli_x();
    vec![(&id + &x).scale(0.5), (&id - &x).scale(0.5)]
}

fn luders_xy(tol: &Tolerances) -> Result<DemoReport> {
    let (a, b) = (HermitianOp::pauli_x(), HermitianOp::pauli_y());
    let rho = DensityOp::basis_state(2, 0);
    let ins = Instrument::luders(&x_projectors())?;
    let m = induced_povm(&ins);
    let theta: Channel = induced_channel(&ins).into();
    let mut out = Builder::new(1e-10);

    let pa = pushforward_measurement(&m, &rho, &a, tol)?;
    for (k, (p, v)) in pa.base().weights().iter().zip(pa.values().values()).enumerate() {
        out.check(&format!("p[{k}]"), *p, 0.5);
        out.check(&format!("(M_*A)[{k}]"), *v, if k == 0 { 1.0 } else { -1.0 });
    }
    let pb = pushforward_channel(&theta, &rho, &b, tol)?;
    out.check("||Theta_*B||", pb.seminorm(), 0.0);
    out.check("||A||", crate::systems::seminorm_q(&a, &rho)?, 1.0);
    out.check("||B||", crate::systems::seminorm_q(&b, &rho)?, 1.0);
    let rep = check_relation_error_disturbance(&a, &b, &ins, &rho, tol)?;
    out.check("eps(A;M)", rep.eps_a, 0.0);
    out.check("eta(B;Theta)", rep.eps_or_eta_b, 1.0);
    out.show("R", rep.bounds.r);
    out.check("I", rep.bounds.i, 0.0);
    out.check("eps*eta", rep.lhs, 0.0);
    out.check("|I|", rep.bounds.simple, 0.0);
    out.holds("eps*eta >= |I|", rep.satisfied());
    Ok(out.finish("luders-xy", "Lüders measurement of σx on |0⟩, effect on σy"))
}

fn naive_violation(tol: &Tolerances) -> Result<DemoReport> {
    let rho = DensityOp::basis_state(2, 0);
    let nf = no_free_measurement(&HermitianOp::pauli_x(), &HermitianOp::pauli_y(), &rho, tol)?;
    let mut out = Builder::new(1e-10);
    out.check("eps(A;M)", nf.eps_a(), 0.0);
    out.check("eta(B;Theta)", nf.eta_b(), 1.0);
    out.check("eps*eta", nf.relation.lhs, 0.0);
    out.check("|<[A,B]>|/2", nf.naive_bound, 1.0);
    out.check("|I|", nf.relation.bounds.simple, 0.0);
    out.holds("eps*eta < |<[A,B]>|/2", nf.violates_naive);
    out.holds("eps*eta >= |I|", nf.relation.satisfied());

    // Spin-1 analogue: 2Jx, 2Jy on the top Jz state.
    let q = no_free_measurement_demo(3, tol)?;
    out.check("qutrit eps(A;M)", q.eps_a(), 0.0);
    out.show("qutrit eta(B;Theta)", q.eta_b());
    out.check("qutrit |<[A,B]>|/2", q.naive_bound, 2.0);
    out.holds("qutrit eps*eta < |<[A,B]>|/2", q.violates_naive);
    out.holds("qutrit eps*eta >= |I|", q.relation.satisfied());
    Ok(out.finish("naive-violation", "errorless measurement falls below the commutator bound"))
}

fn schrodinger_equality(tol: &Tolerances) -> Result<DemoReport> {
    // Pure qubit state with Bloch vector n; A = a·σ, B = b·σ.
    let (theta, phi) = (std::f64::consts::PI / 4.0, std::f64::consts::PI / 5.0);
    let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
    let av = [0.0, 0.0, 1.0];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bv = [s, s, 0.0];
    let pauli = |v: [f64; 3]| -> HermitianOp {
        let x = HermitianOp::pauli_x().scale(v[0]);
        let y = HermitianOp::pauli_y().scale(v[1]);
        let z = HermitianOp::pauli_z().scale(v[2]);
        &(&x + &y) + &z
    };
    let psi = [c((theta / 2.0).cos(), 0.0), c((theta / 2.0).sin() * phi.cos(), (theta / 2.0).sin() * phi.sin())];
    let rho = DensityOp::pure(&psi)?;
    let rep = robertson_reduction(&pauli(av), &pauli(bv), &rho, tol)?;

    let dot = |u: [f64; 3], v: [f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let cross = [av[1] * bv[2] - av[2] * bv[1], av[2] * bv[0] - av[0] * bv[2], av[0] * bv[1] - av[1] * bv[0]];
    let sigma_a = (1.0 - dot(av, n).powi(2)).sqrt();
    let sigma_b = (1.0 - dot(bv, n).powi(2)).sqrt();
    let cov = dot(av, bv) - dot(av, n) * dot(bv, n);
    let comm = dot(cross, n).abs();

    let mut out = Builder::new(REDUCTION_TOL);
    out.check("sigma(A)", rep.sigma_a, sigma_a);
    out.check("sigma(B)", rep.sigma_b, sigma_b);
    out.check("eps(A;M)", rep.eps_a, sigma_a);
    out.check("eps(B;M)", rep.eps_b, sigma_b);
    out.check("Cov_sym", rep.cov_sym, cov);
    out.check("|<[A,B]>|/2", rep.half_commutator.abs(), comm);
    out.show("R", rep.bounds.r);
    out.show("I", rep.bounds.i);
    out.check("sqrt(R^2+I^2)", rep.bounds.full, cov.hypot(comm));
    out.check("sigma(A)*sigma(B)", rep.lhs, cov.hypot(comm));
    Ok(out.finish("schrodinger-equality", "non-informative measurement on a pure qubit saturates the Schrödinger bound"))
}

fn transpose_map(tol: &Tolerances) -> Result<DemoReport> {
    let rho = DensityOp::new(CMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.1, -0.2), c(0.1, 0.2), c(0.3, 0.0)]))?;
    let t: Channel = TransferMap::transpose(2).into();
    let mut out = Builder::new(1e-10);
    for (name, op, image) in [
        ("x", HermitianOp::pauli_x(), HermitianOp::pauli_x()),
        ("y", HermitianOp::pauli_y(), -&HermitianOp::pauli_y()),
        ("z", HermitianOp::pauli_z(), HermitianOp::pauli_z()),
    ] {
        let pf = pushforward_channel(&t, &rho, &op, tol)?;
        out.check(&format!("||T_*sigma_{name} - sigma_{name}^T||"), pf.distance_to(&image)?, 0.0);
        out.check(&format!("eta(sigma_{name};T)"), disturbance(&op, &t, &rho, tol)?, 0.0);
    }
    // A Lüders measurement of σx followed by transposition, acting on |0⟩.
    let ket0 = DensityOp::basis_state(2, 0);
    let ins = Instrument::luders(&x_projectors())?;
    let rep = relation_error_disturbance_after(&HermitianOp::pauli_x(), &HermitianOp::pauli_y(), &ins, Some(&t), &ket0, tol)?;
    out.check("eps(sigma_x;M)", error(&HermitianOp::pauli_x(), &induced_povm(&ins), &ket0, tol)?, 0.0);
    out.check("eta(sigma_y;T.Theta)", rep.eps_or_eta_b, 1.0);
    out.check("I", rep.bounds.i, 0.0);
    out.holds("eps*eta >= |I|", rep.satisfied());
    Ok(out.finish("transpose-map", "transposition: positive, not completely positive, and undisturbing"))
}

pub fn run_demo(name: &str, tol: &Tolerances) -> Result<DemoReport> {
    match name {
        "luders-xy" => luders_xy(tol),
        "naive-violation" => naive_violation(tol),
        "schrodinger-equality" => schrodinger_equality(tol),
        "transpose-map" => transpose_map(tol),
        other => Err(Error::InvalidInput(format!("unknown demo '{other}'; choose one of {}", DEMO_NAMES.join(", ")))),
    }
}

impl std::fmt::Display for DemoReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{}: {}", self.name, self.description)?;
        for q in &self.quantities {
            match q.expected {
                Some(e) => writeln!(f, "  {:<34} {:>14.10}  expected {:>14.10}  {}", q.name, q.value, e, if q.ok { "ok" } else { "MISMATCH" })?,
                None => writeln!(f, "  {:<34} {:>14.10}", q.name, q.value)?,
            }
        }
        write!(f, "{}", if self.passed { "PASS" } else { "FAIL" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_demos_match_their_closed_forms() {
        let tol = Tolerances::default();
        for name in DEMO_NAMES {
            let rep = run_demo(name, &tol).unwrap();
            assert!(rep.passed, "{rep}");
        }
    }

    #[test]
    fn unknown_demo_is_rejected() {
        assert!(matches!(run_demo("nope", &Tolerances::default()), Err(Error::InvalidInput(_))));
    }
}
