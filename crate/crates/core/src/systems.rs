//! Finite-dimensional quantum and classical state spaces, their state-dependent
//! inner products, and the Gram/Riesz machinery that backs every transport.
//!
//! Observables live in coordinates over a fixed Hilbert–Schmidt orthonormal
//! basis (identity first, then generalized Gell-Mann matrices). At a state `ρ`
//! the local inner product `⟨A, B⟩_ρ = Re Tr[A B ρ]` becomes the real Gram
//! matrix returned by [`gram_q`]; its null space is exactly the set of
//! observables that vanish in the seminorm `‖·‖_ρ`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, RMatrix, RVector, C64, I, ONE, ZERO};
use crate::tolerance::{Tolerances, ZERO_PROB};

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    if !linalg::is_finite(m) {
        return Err(Error::NonFinite);
    }
    Ok(m.nrows())
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// A self-adjoint operator on a `dim`-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOp {
    m: CMatrix,
}

impl HermitianOp {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, Tolerances::default().herm)
    }

    /// Validates Hermiticity within `tol`; the stored matrix is the Hermitian part.
    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        check_square(&m)?;
        let deviation = linalg::hermitian_deviation(&m);
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { m: linalg::hermitian_part(&m) })
    }

    /// Takes the Hermitian part of `m` without validation. For matrices that are
    /// Hermitian by construction up to rounding.
    pub(crate) fn from_hermitian_part(m: CMatrix) -> Self {
        Self { m: linalg::hermitian_part(&m) }
    }

    pub fn identity(d: usize) -> Self {
        Self { m: linalg::identity(d) }
    }

    pub fn zero(d: usize) -> Self {
        Self { m: CMatrix::zeros(d, d) }
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let d = values.len();
        Self { m: CMatrix::from_fn(d, d, |i, j| if i == j { c(values[i], 0.0) } else { ZERO }) }
    }

    pub fn pauli_x() -> Self {
        Self { m: CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]) }
    }

    pub fn pauli_y() -> Self {
        Self { m: CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]) }
    }

    pub fn pauli_z() -> Self {
        Self { m: CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]) }
    }

    /// Spin operators `(Jx, Jy, Jz)` for spin `j = (d-1)/2`, basis ordered by
    /// decreasing magnetic quantum number.
    pub fn spin(d: usize) -> (Self, Self, Self) {
        let j = (d as f64 - 1.0) / 2.0;
        let m = |k: usize| j - k as f64;
        let mut jp = CMatrix::zeros(d, d);
        for k in 1..d {
            // J+ |j, m_k> = sqrt(j(j+1) - m_k(m_k+1)) |j, m_k + 1>
            let mk = m(k);
            jp[(k - 1, k)] = c((j * (j + 1.0) - mk * (mk + 1.0)).sqrt(), 0.0);
        }
        let jm = jp.adjoint();
        let jx = (&jp + &jm).scale(0.5);
        let jy = (&jp - &jm) * c(0.0, -0.5);
        let jz = CMatrix::from_fn(d, d, |a, b| if a == b { c(m(a), 0.0) } else { ZERO });
        (Self::from_hermitian_part(jx), Self::from_hermitian_part(jy), Self::from_hermitian_part(jz))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn scale(&self, t: f64) -> Self {
        Self { m: self.m.scale(t) }
    }

    pub fn square(&self) -> Self {
        Self::from_hermitian_part(&self.m * &self.m)
    }

    /// `U A U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self::from_hermitian_part(u * &self.m * u.adjoint())
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigen(&self.m).0
    }
}

impl<'a> Add<&'a HermitianOp> for &'a HermitianOp {
    type Output = HermitianOp;
    fn add(self, rhs: &HermitianOp) -> HermitianOp {
        HermitianOp { m: &self.m + &rhs.m }
    }
}

impl<'a> Sub<&'a HermitianOp> for &'a HermitianOp {
    type Output = HermitianOp;
    fn sub(self, rhs: &HermitianOp) -> HermitianOp {
        HermitianOp { m: &self.m - &rhs.m }
    }
}

impl Neg for &HermitianOp {
    type Output = HermitianOp;
    fn neg(self) -> HermitianOp {
        HermitianOp { m: -&self.m }
    }
}

impl Mul<&HermitianOp> for f64 {
    type Output = HermitianOp;
    fn mul(self, rhs: &HermitianOp) -> HermitianOp {
        rhs.scale(self)
    }
}

/// A density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOp {
    m: CMatrix,
}

impl DensityOp {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerances(m, &Tolerances::default())
    }

    pub fn with_tolerances(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        check_square(&m)?;
        let deviation = linalg::hermitian_deviation(&m);
        if deviation > tol.herm {
            return Err(Error::NotHermitian { deviation });
        }
        let m = linalg::hermitian_part(&m);
        let trace = linalg::trace(&m).re;
        if (trace - 1.0).abs() > tol.trace {
            return Err(Error::BadTrace { trace });
        }
        let min_eigenvalue = linalg::min_eigenvalue(&m);
        if min_eigenvalue < -tol.psd {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { m })
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self { m: linalg::hermitian_part(&m) }
    }

    /// `|ψ⟩⟨ψ|` for the normalized `psi`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if psi.is_empty() || !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidInput("state vector must be nonzero".into()));
        }
        let v = nalgebra::DVector::from_iterator(psi.len(), psi.iter().map(|z| z / norm));
        Ok(Self::from_matrix_unchecked(&v * v.adjoint()))
    }

    /// The computational basis state `|k⟩⟨k|`.
    pub fn basis_state(d: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(d, d);
        m[(k, k)] = ONE;
        Self { m }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { m: linalg::identity(d).unscale(d as f64) }
    }

    pub fn from_diagonal(weights: &[f64]) -> Result<Self> {
        let d = weights.len();
        Self::new(CMatrix::from_fn(d, d, |i, j| if i == j { c(weights[i], 0.0) } else { ZERO }))
    }

    /// `λ·self + (1-λ)·other`.
    pub fn mix(&self, other: &DensityOp, lambda: f64) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidInput(format!("mixing weight {lambda} outside [0, 1]")));
        }
        Ok(Self { m: self.m.scale(lambda) + other.m.scale(1.0 - lambda) })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigen(&self.m).0
    }

    pub fn transpose(&self) -> Self {
        Self { m: self.m.transpose() }
    }
}

/// A probability distribution on the outcome set `0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist {
    weights: Vec<f64>,
}

impl ProbDist {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::with_tolerances(weights, &Tolerances::default())
    }

    /// Weights in `[-tol.psd, 0)` are clamped to zero.
    pub fn with_tolerances(mut weights: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty outcome set".into()));
        }
        for (i, w) in weights.iter_mut().enumerate() {
            if !w.is_finite() {
                return Err(Error::InvalidDistribution(format!("weight {i} is not finite")));
            }
            if *w < -tol.psd {
                return Err(Error::InvalidDistribution(format!("weight {i} is negative ({w})")));
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol.trace {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Self {
        Self { weights: vec![1.0 / n as f64; n] }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// `⟨f⟩_p`.
    pub fn expectation(&self, f: &RealFn) -> Result<f64> {
        check_dims(self.len(), f.len())?;
        Ok(self.weights.iter().zip(f.values()).map(|(p, v)| p * v).sum())
    }
}

/// A real random variable on the outcome set `0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealFn {
    values: Vec<f64>,
}

impl RealFn {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { values })
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self { values: vec![value; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect() }
    }
}

/// `⟨A, B⟩_ρ = ⟨{A, B}⟩_ρ / 2 = Re Tr[A B ρ]`.
pub fn inner_q(a: &HermitianOp, b: &HermitianOp, rho: &DensityOp) -> Result<f64> {
    Ok(local_product(a, b, rho)?.re)
}

/// `Tr[A B ρ]`. Its real part is the local inner product, its imaginary part
/// is `⟨[A, B]/2i⟩_ρ`.
pub fn local_product(a: &HermitianOp, b: &HermitianOp, rho: &DensityOp) -> Result<C64> {
    check_dims(rho.dim(), a.dim())?;
    check_dims(rho.dim(), b.dim())?;
    Ok(linalg::trace_product(&(a.matrix() * b.matrix()), rho.matrix()))
}

/// `⟨[A, B]/2i⟩_ρ`.
pub fn commutator_expectation(a: &HermitianOp, b: &HermitianOp, rho: &DensityOp) -> Result<f64> {
    Ok(local_product(a, b, rho)?.im)
}

/// `⟨A⟩_ρ = Tr[A ρ]`.
pub fn expectation(a: &HermitianOp, rho: &DensityOp) -> Result<f64> {
    check_dims(rho.dim(), a.dim())?;
    Ok(linalg::trace_product(a.matrix(), rho.matrix()).re)
}

/// `‖A‖_ρ`.
pub fn seminorm_q(a: &HermitianOp, rho: &DensityOp) -> Result<f64> {
    Ok(inner_q(a, a, rho)?.max(0.0).sqrt())
}

/// Standard deviation `σ_ρ(A)`.
pub fn std_dev(a: &HermitianOp, rho: &DensityOp) -> Result<f64> {
    let mean = expectation(a, rho)?;
    Ok((inner_q(a, a, rho)? - mean * mean).max(0.0).sqrt())
}

/// `⟨f, g⟩_p = Σ f g p`.
pub fn inner_c(f: &RealFn, g: &RealFn, p: &ProbDist) -> Result<f64> {
    check_dims(p.len(), f.len())?;
    check_dims(p.len(), g.len())?;
    Ok(f.values().iter().zip(g.values()).zip(p.weights()).map(|((a, b), w)| a * b * w).sum())
}

pub fn seminorm_c(f: &RealFn, p: &ProbDist) -> Result<f64> {
    Ok(inner_c(f, f, p)?.max(0.0).sqrt())
}

/// Hilbert–Schmidt orthonormal Hermitian basis: `I/√d` followed by the
/// generalized Gell-Mann matrices. Off-diagonal pairs `(j, k)`, `j < k`, come in
/// lexicographic order as a symmetric then an antisymmetric element; the
/// diagonal elements follow.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    dim: usize,
    elements: Vec<CMatrix>,
}

impl HermitianBasis {
    pub fn new(d: usize) -> Self {
        assert!(d >= 1, "basis dimension must be positive");
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut elements = Vec::with_capacity(d * d);
        elements.push(linalg::identity(d).unscale((d as f64).sqrt()));
        for j in 0..d {
            for k in (j + 1)..d {
                let mut sym = CMatrix::zeros(d, d);
                sym[(j, k)] = c(inv_sqrt2, 0.0);
                sym[(k, j)] = c(inv_sqrt2, 0.0);
                elements.push(sym);
                let mut anti = CMatrix::zeros(d, d);
                anti[(j, k)] = c(0.0, -inv_sqrt2);
                anti[(k, j)] = c(0.0, inv_sqrt2);
                elements.push(anti);
            }
        }
        for l in 1..d {
            let norm = ((l * (l + 1)) as f64).sqrt();
            let mut diag = CMatrix::zeros(d, d);
            for m in 0..l {
                diag[(m, m)] = c(1.0 / norm, 0.0);
            }
            diag[(l, l)] = c(-(l as f64) / norm, 0.0);
            elements.push(diag);
        }
        Self { dim: d, elements }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn element(&self, k: usize) -> HermitianOp {
        HermitianOp { m: self.elements[k].clone() }
    }

    /// Real coordinates `c_k = Tr[G_k X]` of a Hermitian matrix.
    pub fn coords_of_matrix(&self, x: &CMatrix) -> RVector {
        RVector::from_iterator(
            self.elements.len(),
            self.elements.iter().map(|g| linalg::trace_product(g, x).re),
        )
    }

    pub fn coords(&self, a: &HermitianOp) -> RVector {
        self.coords_of_matrix(a.matrix())
    }

    pub fn matrix_from_coords(&self, coeffs: &RVector) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (g, &ck) in self.elements.iter().zip(coeffs.iter()) {
            m += g.scale(ck);
        }
        m
    }

    pub fn operator(&self, coeffs: &RVector) -> HermitianOp {
        HermitianOp::from_hermitian_part(self.matrix_from_coords(coeffs))
    }
}

pub fn hermitian_basis(d: usize) -> Vec<HermitianOp> {
    let basis = HermitianBasis::new(d);
    (0..basis.len()).map(|k| basis.element(k)).collect()
}

/// Gram matrix of the local inner product at `rho` in basis coordinates.
pub fn gram_q(rho: &DensityOp) -> RMatrix {
    gram_in_basis(&HermitianBasis::new(rho.dim()), rho)
}

fn gram_in_basis(basis: &HermitianBasis, rho: &DensityOp) -> RMatrix {
    let n = basis.len();
    let right: Vec<CMatrix> = basis.elements().iter().map(|g| g * rho.matrix()).collect();
    let mut gram = RMatrix::zeros(n, n);
    for k in 0..n {
        for l in k..n {
            let v = linalg::trace_product(&basis.elements()[k], &right[l]).re;
            gram[(k, l)] = v;
            gram[(l, k)] = v;
        }
    }
    gram
}

/// Eigen-truncated pseudoinverse of a positive semidefinite matrix.
#[derive(Debug, Clone)]
pub struct PseudoInverse {
    values: Vec<f64>,
    vectors: RMatrix,
    /// Number of retained eigenpairs, taken from the top of the spectrum.
    rank: usize,
    tol: f64,
}

impl PseudoInverse {
    /// Retains eigenvalues strictly above `tol` times the largest one.
    pub fn new(g: &RMatrix, tol: f64) -> Self {
        let (values, vectors) = linalg::symmetric_eigen(g);
        let top = values.last().copied().unwrap_or(0.0).max(0.0);
        let rank = values.iter().filter(|&&v| top > 0.0 && v > tol * top).count();
        Self { values, vectors, rank, tol }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    fn kept(&self) -> impl Iterator<Item = usize> + '_ {
        let n = self.values.len();
        (n - self.rank)..n
    }

    /// Orthogonal projection onto the retained range.
    pub fn project(&self, v: &RVector) -> RVector {
        let mut out = RVector::zeros(v.len());
        for k in self.kept() {
            let u = self.vectors.column(k);
            out += u * u.dot(v);
        }
        out
    }

    /// Minimal-norm `c` with `G c = v`, or an error when the residual exceeds
    /// `tol·(1 + ‖v‖)`.
    pub fn solve(&self, v: &RVector) -> Result<RVector> {
        let mut out = RVector::zeros(v.len());
        let mut image = RVector::zeros(v.len());
        for k in self.kept() {
            let u = self.vectors.column(k);
            let proj = u.dot(v);
            out += u * (proj / self.values[k]);
            image += u * proj;
        }
        let residual = (&image - v).norm();
        if residual > self.tol * (1.0 + v.norm()) {
            return Err(Error::NotRepresentable { residual });
        }
        Ok(out)
    }
}

/// Minimal-Euclidean-norm solution of `G c = v` via the eigen-truncated
/// pseudoinverse with relative cutoff `tol`.
pub fn riesz_solve(g: &RMatrix, v: &RVector, tol: f64) -> Result<RVector> {
    if g.nrows() != g.ncols() {
        return Err(Error::NotSquare { rows: g.nrows(), cols: g.ncols() });
    }
    check_dims(g.nrows(), v.len())?;
    PseudoInverse::new(g, tol).solve(v)
}

/// An equivalence class in `S_ρ(H)`, stored through its canonical
/// representative: the coefficient vector with no component along the Gram
/// null space.
#[derive(Debug, Clone)]
pub struct TangentQ {
    base: DensityOp,
    coeffs: RVector,
    representative: HermitianOp,
}

impl TangentQ {
    pub fn base(&self) -> &DensityOp {
        &self.base
    }

    pub fn coeffs(&self) -> &RVector {
        &self.coeffs
    }

    pub fn representative(&self) -> &HermitianOp {
        &self.representative
    }

    pub fn seminorm(&self) -> f64 {
        seminorm_q(&self.representative, &self.base).expect("representative matches base")
    }

    pub fn inner(&self, other: &HermitianOp) -> Result<f64> {
        inner_q(&self.representative, other, &self.base)
    }

    /// `‖rep - other‖_base`.
    pub fn distance_to(&self, other: &HermitianOp) -> Result<f64> {
        seminorm_q(&(&self.representative - other), &self.base)
    }
}

/// Gram factorization at a fixed state, reused by every transport that lands
/// on or leaves from that state.
#[derive(Debug, Clone)]
pub struct LocalFrame {
    state: DensityOp,
    basis: HermitianBasis,
    gram: RMatrix,
    pinv: PseudoInverse,
}

impl LocalFrame {
    pub fn new(state: &DensityOp, tol: &Tolerances) -> Self {
        let basis = HermitianBasis::new(state.dim());
        let gram = gram_in_basis(&basis, state);
        let pinv = PseudoInverse::new(&gram, tol.pinv);
        Self { state: state.clone(), basis, gram, pinv }
    }

    pub fn state(&self) -> &DensityOp {
        &self.state
    }

    pub fn basis(&self) -> &HermitianBasis {
        &self.basis
    }

    pub fn gram(&self) -> &RMatrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.pinv.rank()
    }

    fn tangent_from_projected(&self, coeffs: RVector) -> TangentQ {
        let representative = self.basis.operator(&coeffs);
        TangentQ { base: self.state.clone(), coeffs, representative }
    }

    pub fn canonical(&self, a: &HermitianOp) -> Result<TangentQ> {
        check_dims(self.state.dim(), a.dim())?;
        Ok(self.canonical_coords(&self.basis.coords(a)))
    }

    pub fn canonical_coords(&self, coeffs: &RVector) -> TangentQ {
        self.tangent_from_projected(self.pinv.project(coeffs))
    }

    /// Class representing the linear functional with basis values `v`.
    pub fn riesz(&self, v: &RVector) -> Result<TangentQ> {
        check_dims(self.basis.len(), v.len())?;
        Ok(self.tangent_from_projected(self.pinv.solve(v)?))
    }
}

/// Canonical representative of the class of `A` in `S_ρ(H)`.
pub fn canonical_rep(a: &HermitianOp, rho: &DensityOp, tol: &Tolerances) -> Result<TangentQ> {
    LocalFrame::new(rho, tol).canonical(a)
}

/// An equivalence class in `R_p(Ω)`; values vanish where `p` does.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentC {
    base: ProbDist,
    values: RealFn,
}

impl TangentC {
    pub fn new(base: ProbDist, values: RealFn) -> Result<Self> {
        check_dims(base.len(), values.len())?;
        let values = RealFn {
            values: values
                .values()
                .iter()
                .zip(base.weights())
                .map(|(&v, &w)| if w <= ZERO_PROB { 0.0 } else { v })
                .collect(),
        };
        Ok(Self { base, values })
    }

    pub fn base(&self) -> &ProbDist {
        &self.base
    }

    pub fn values(&self) -> &RealFn {
        &self.values
    }

    pub fn seminorm(&self) -> f64 {
        seminorm_c(&self.values, &self.base).expect("values match base")
    }

    pub fn inner(&self, g: &RealFn) -> Result<f64> {
        inner_c(&self.values, g, &self.base)
    }
}
