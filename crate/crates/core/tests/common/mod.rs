//! Independent oracles built from raw matrices, sharing nothing with the
//! library's Gram/Riesz code beyond nalgebra.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use uqrel::linalg::CMatrix;
use uqrel::{DensityOp, HermitianOp, Instrument, Povm};

pub fn tr(m: &CMatrix) -> C {
    m.trace()
}

/// `Re Tr[XYρ]`.
pub fn re3(x: &CMatrix, y: &CMatrix, rho: &CMatrix) -> f64 {
    tr(&(x * y * rho)).re
}

pub fn expect(a: &HermitianOp, rho: &DensityOp) -> f64 {
    tr(&(a.matrix() * rho.matrix())).re
}

/// `ε² = Tr[A²ρ] − Σ_i (Re Tr[E_iAρ])² / Tr[E_iρ]`.
pub fn error_sq(a: &HermitianOp, m: &Povm, rho: &DensityOp) -> f64 {
    let (a, r) = (a.matrix(), rho.matrix());
    let mut pushed = 0.0;
    for e in m.effects() {
        let p = tr(&(e.matrix() * r)).re;
        if p > 1e-14 {
            pushed += re3(e.matrix(), a, r).powi(2) / p;
        }
    }
    re3(a, a, r) - pushed
}

/// Unnormalized Hermitian spanning set: `E_jj`, `E_jk + E_kj`, `i(E_jk − E_kj)`.
fn spanning_set(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::new();
    for j in 0..d {
        for k in j..d {
            let mut s = CMatrix::zeros(d, d);
            s[(j, k)] = C::new(1.0, 0.0);
            s[(k, j)] = C::new(1.0, 0.0);
            out.push(if j == k { s.scale(0.5) } else { s });
            if j != k {
                let mut t = CMatrix::zeros(d, d);
                t[(j, k)] = C::new(0.0, 1.0);
                t[(k, j)] = C::new(0.0, -1.0);
                out.push(t);
            }
        }
    }
    out
}

fn heisenberg(kraus: &[CMatrix], x: &CMatrix) -> CMatrix {
    kraus.iter().fold(CMatrix::zeros(kraus[0].ncols(), kraus[0].ncols()), |acc, k| acc + k.adjoint() * x * k)
}

fn schrodinger(kraus: &[CMatrix], rho: &CMatrix) -> CMatrix {
    kraus.iter().fold(CMatrix::zeros(kraus[0].nrows(), kraus[0].nrows()), |acc, k| acc + k * rho * k.adjoint())
}

pub fn kraus_of(ins: &Instrument) -> Vec<CMatrix> {
    ins.branches().iter().flatten().cloned().collect()
}

/// `‖Θ_*B‖²` as the supremum of `⟨Θ′C, B⟩_ρ² / ‖C‖²_{Θρ}`: `vᵀ G⁺ v` in a
/// non-orthonormal spanning set, pseudoinverse by SVD.
pub fn pushed_norm_sq(kraus: &[CMatrix], rho: &DensityOp, b: &HermitianOp) -> f64 {
    let out = schrodinger(kraus, rho.matrix());
    let basis = spanning_set(out.nrows());
    let n = basis.len();
    let g = DMatrix::<f64>::from_fn(n, n, |i, j| re3(&basis[i], &basis[j], &out));
    let v = nalgebra::DVector::<f64>::from_fn(n, |i, _| re3(&heisenberg(kraus, &basis[i]), b.matrix(), rho.matrix()));
    let pinv = g.clone().pseudo_inverse(1e-12 * g.norm()).unwrap();
    (v.transpose() * pinv * v)[(0, 0)]
}

pub fn disturbance_sq(kraus: &[CMatrix], rho: &DensityOp, b: &HermitianOp) -> f64 {
    re3(b.matrix(), b.matrix(), rho.matrix()) - pushed_norm_sq(kraus, rho, b)
}

/// `(σ_A, σ_B, Cov_sym, |⟨[A,B]⟩|/2)`.
pub fn schrodinger_terms(a: &HermitianOp, b: &HermitianOp, rho: &DensityOp) -> (f64, f64, f64, f64) {
    let (ea, eb) = (expect(a, rho), expect(b, rho));
    let r = rho.matrix();
    let var = |x: &CMatrix, e: f64| re3(x, x, r) - e * e;
    let sa = var(a.matrix(), ea).max(0.0).sqrt();
    let sb = var(b.matrix(), eb).max(0.0).sqrt();
    let ab = tr(&(a.matrix() * b.matrix() * r));
    let ba = tr(&(b.matrix() * a.matrix() * r));
    let cov = 0.5 * (ab + ba).re - ea * eb;
    let half_comm = 0.5 * (ab - ba).norm();
    (sa, sb, cov, half_comm)
}

/// `|⟨[A,X]⟩_ρ|`.
pub fn commutator_abs(a: &CMatrix, x: &CMatrix, rho: &CMatrix) -> f64 {
    tr(&((a * x - x * a) * rho)).norm()
}
