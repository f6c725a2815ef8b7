//! Quantum measurements (Q-C), quantum processes (Q-Q), classical processes
//! (C-C), their adjoints, and instruments binding a measurement to the state
//! change it causes.
//!
//! Outcome sets are index sets `0..n`. A joint outcome `(i, j)` on `Ω₁ × Ω₂`
//! is flattened row-major to `i·|Ω₂| + j`.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, RMatrix, RVector};
use crate::systems::{DensityOp, HermitianBasis, HermitianOp, ProbDist, RealFn};
use crate::tolerance::Tolerances;

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn completeness_deviation(sum: &CMatrix) -> f64 {
    let d = sum.nrows();
    linalg::max_abs(&(sum - linalg::identity(d)))
}

/// A positive operator-valued measure with optional real outcome labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    effects: Vec<HermitianOp>,
    labels: Option<Vec<f64>>,
}

impl Povm {
    pub fn new(effects: Vec<HermitianOp>) -> Result<Self> {
        Self::with_tolerances(effects, &Tolerances::default())
    }

    pub fn with_tolerances(effects: Vec<HermitianOp>, tol: &Tolerances) -> Result<Self> {
        let Some(first) = effects.first() else {
            return Err(Error::InvalidInput("measurement needs at least one outcome".into()));
        };
        let dim = first.dim();
        let mut sum = CMatrix::zeros(dim, dim);
        for (index, e) in effects.iter().enumerate() {
            check_dims(dim, e.dim())?;
            let min_eigenvalue = linalg::min_eigenvalue(e.matrix());
            if min_eigenvalue < -tol.psd {
                return Err(Error::EffectNotPositive { index, min_eigenvalue });
            }
            sum += e.matrix();
        }
        let deviation = completeness_deviation(&sum);
        if deviation > tol.num {
            return Err(Error::IncompletePovm { deviation });
        }
        Ok(Self { dim, effects, labels: None })
    }

    /// Effects that are positive and complete by construction up to rounding.
    pub(crate) fn from_effects_unchecked(effects: Vec<HermitianOp>) -> Self {
        let dim = effects[0].dim();
        Self { dim, effects, labels: None }
    }

    pub fn with_labels(mut self, labels: Vec<f64>) -> Result<Self> {
        check_dims(self.effects.len(), labels.len())?;
        if labels.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// The one-outcome measurement `{I}`.
    pub fn trivial(d: usize) -> Self {
        Self { dim: d, effects: vec![HermitianOp::identity(d)], labels: None }
    }

    /// Projection measurement of `a`, eigenvalues grouped within `width`,
    /// labelled by the (grouped) eigenvalues in descending order.
    pub fn projective(a: &HermitianOp, width: f64) -> Self {
        let (labels, effects): (Vec<f64>, Vec<HermitianOp>) = linalg::spectral_projectors(a.matrix(), width)
            .into_iter()
            .map(|(v, p)| (v, HermitianOp::from_hermitian_part(p)))
            .unzip();
        Self { dim: a.dim(), effects, labels: Some(labels) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[HermitianOp] {
        &self.effects
    }

    pub fn labels(&self) -> Option<&[f64]> {
        self.labels.as_deref()
    }

    /// Raw Born probabilities `Tr[E_i ρ]` without clamping.
    pub(crate) fn raw_probabilities(&self, rho: &DensityOp) -> Result<Vec<f64>> {
        check_dims(self.dim, rho.dim())?;
        Ok(self
            .effects
            .iter()
            .map(|e| linalg::trace_product(e.matrix(), rho.matrix()).re)
            .collect())
    }

    pub fn apply(&self, rho: &DensityOp) -> Result<ProbDist> {
        let raw = self.raw_probabilities(rho)?;
        ProbDist::new(raw.into_iter().map(|p| p.max(0.0)).collect())
    }

    /// `M′f = Σ_i f(i) E_i`.
    pub fn adjoint(&self, f: &RealFn) -> Result<HermitianOp> {
        check_dims(self.outcomes(), f.len())?;
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (e, &v) in self.effects.iter().zip(f.values()) {
            m += e.matrix().scale(v);
        }
        Ok(HermitianOp::from_hermitian_part(m))
    }
}

/// Born rule: `p(i) = Tr[E_i ρ]`.
pub fn apply_measurement(m: &Povm, rho: &DensityOp) -> Result<ProbDist> {
    m.apply(rho)
}

pub fn adjoint_measurement(m: &Povm, f: &RealFn) -> Result<HermitianOp> {
    m.adjoint(f)
}

/// Trace-preserving completely positive map `ρ ↦ Σ_a K_a ρ K_a†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        Self::with_tolerances(kraus, &Tolerances::default())
    }

    pub fn with_tolerances(kraus: Vec<CMatrix>, tol: &Tolerances) -> Result<Self> {
        let Some(first) = kraus.first() else {
            return Err(Error::InvalidInput("channel needs at least one Kraus operator".into()));
        };
        let (dim_out, dim_in) = first.shape();
        let mut sum = CMatrix::zeros(dim_in, dim_in);
        for k in &kraus {
            if k.shape() != (dim_out, dim_in) {
                return Err(Error::InvalidInput(format!(
                    "Kraus operator shape {:?} differs from {:?}",
                    k.shape(),
                    (dim_out, dim_in)
                )));
            }
            if !linalg::is_finite(k) {
                return Err(Error::NonFinite);
            }
            sum += k.adjoint() * k;
        }
        let deviation = completeness_deviation(&sum);
        if deviation > tol.num {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(Self { dim_in, dim_out, kraus })
    }

    pub(crate) fn from_kraus_unchecked(kraus: Vec<CMatrix>) -> Self {
        let (dim_out, dim_in) = kraus[0].shape();
        Self { dim_in, dim_out, kraus }
    }

    pub fn identity(d: usize) -> Self {
        Self { dim_in: d, dim_out: d, kraus: vec![linalg::identity(d)] }
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// Lüders (projection-postulate) channel `ρ ↦ Σ_i Π_i ρ Π_i`.
    pub fn luders(projectors: &[HermitianOp]) -> Result<Self> {
        Self::new(projectors.iter().map(|p| p.matrix().clone()).collect())
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn apply(&self, rho: &DensityOp) -> Result<DensityOp> {
        check_dims(self.dim_in, rho.dim())?;
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * rho.matrix() * k.adjoint();
        }
        Ok(DensityOp::from_matrix_unchecked(out))
    }

    /// `Θ′X = Σ_a K_a† X K_a`.
    pub fn adjoint(&self, x: &HermitianOp) -> Result<HermitianOp> {
        check_dims(self.dim_out, x.dim())?;
        let mut out = CMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out += k.adjoint() * x.matrix() * k;
        }
        Ok(HermitianOp::from_hermitian_part(out))
    }

    /// `after ∘ self`, Kraus operators as pairwise products.
    pub fn then(&self, after: &KrausChannel) -> Result<KrausChannel> {
        check_dims(self.dim_out, after.dim_in)?;
        let kraus = after
            .kraus
            .iter()
            .flat_map(|b| self.kraus.iter().map(move |a| b * a))
            .collect();
        Ok(Self { dim_in: self.dim_in, dim_out: after.dim_out, kraus })
    }

    pub fn to_transfer(&self) -> TransferMap {
        let bin = HermitianBasis::new(self.dim_in);
        let bout = HermitianBasis::new(self.dim_out);
        let mut matrix = RMatrix::zeros(bout.len(), bin.len());
        for (l, g) in bin.elements().iter().enumerate() {
            let mut image = CMatrix::zeros(self.dim_out, self.dim_out);
            for k in &self.kraus {
                image += k * g * k.adjoint();
            }
            matrix.set_column(l, &bout.coords_of_matrix(&image));
        }
        TransferMap { dim_in: self.dim_in, dim_out: self.dim_out, matrix }
    }
}

/// A Hermiticity-preserving trace-preserving map given by its real action on
/// basis coordinates. Complete positivity is not assumed; positivity is
/// checked on each input it is applied to.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMap {
    dim_in: usize,
    dim_out: usize,
    matrix: RMatrix,
}

impl TransferMap {
    pub fn new(dim_in: usize, dim_out: usize, matrix: RMatrix) -> Result<Self> {
        Self::with_tolerances(dim_in, dim_out, matrix, &Tolerances::default())
    }

    pub fn with_tolerances(dim_in: usize, dim_out: usize, matrix: RMatrix, tol: &Tolerances) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidInput("transfer map dimensions must be positive".into()));
        }
        check_dims(dim_out * dim_out, matrix.nrows())?;
        check_dims(dim_in * dim_in, matrix.ncols())?;
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let map = Self { dim_in, dim_out, matrix };
        // Trace preservation is unitality of the adjoint.
        let unit = map.adjoint_coords(&HermitianBasis::new(dim_out).coords(&HermitianOp::identity(dim_out)));
        let want = HermitianBasis::new(dim_in).coords(&HermitianOp::identity(dim_in));
        let deviation = (unit - want).amax();
        if deviation > tol.num {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(map)
    }

    /// Transposition in the computational basis: positive, trace preserving,
    /// not completely positive. Flips the sign of every antisymmetric
    /// basis coordinate.
    pub fn transpose(d: usize) -> Self {
        let basis = HermitianBasis::new(d);
        let diag = RVector::from_iterator(
            basis.len(),
            basis.elements().iter().map(|g| {
                let t = g.transpose();
                if linalg::max_abs(&(t - g)) == 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }),
        );
        Self { dim_in: d, dim_out: d, matrix: RMatrix::from_diagonal(&diag) }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.matrix
    }

    fn adjoint_coords(&self, coeffs: &RVector) -> RVector {
        self.matrix.transpose() * coeffs
    }

    /// Coordinate action. Fails if the image is not a state.
    pub fn apply(&self, rho: &DensityOp, tol: &Tolerances) -> Result<DensityOp> {
        check_dims(self.dim_in, rho.dim())?;
        let cin = HermitianBasis::new(self.dim_in).coords_of_matrix(rho.matrix());
        let out = HermitianBasis::new(self.dim_out).matrix_from_coords(&(&self.matrix * cin));
        let min_eigenvalue = linalg::min_eigenvalue(&out);
        if min_eigenvalue < -tol.psd {
            return Err(Error::NotPositiveOnInput { min_eigenvalue });
        }
        Ok(DensityOp::from_matrix_unchecked(out))
    }

    pub fn adjoint(&self, x: &HermitianOp) -> Result<HermitianOp> {
        check_dims(self.dim_out, x.dim())?;
        let cx = HermitianBasis::new(self.dim_out).coords(x);
        Ok(HermitianBasis::new(self.dim_in).operator(&self.adjoint_coords(&cx)))
    }

    pub fn then(&self, after: &TransferMap) -> Result<TransferMap> {
        check_dims(self.dim_out, after.dim_in)?;
        Ok(Self { dim_in: self.dim_in, dim_out: after.dim_out, matrix: &after.matrix * &self.matrix })
    }
}

/// A quantum process in either representation. Downstream code only uses
/// [`Channel::apply`] and [`Channel::adjoint`].
#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    Kraus(KrausChannel),
    Transfer(TransferMap),
}

impl From<KrausChannel> for Channel {
    fn from(k: KrausChannel) -> Self {
        Channel::Kraus(k)
    }
}

impl From<TransferMap> for Channel {
    fn from(t: TransferMap) -> Self {
        Channel::Transfer(t)
    }
}

impl Channel {
    pub fn identity(d: usize) -> Self {
        KrausChannel::identity(d).into()
    }

    pub fn dim_in(&self) -> usize {
        match self {
            Channel::Kraus(k) => k.dim_in(),
            Channel::Transfer(t) => t.dim_in(),
        }
    }

    pub fn dim_out(&self) -> usize {
        match self {
            Channel::Kraus(k) => k.dim_out(),
            Channel::Transfer(t) => t.dim_out(),
        }
    }

    pub fn apply(&self, rho: &DensityOp, tol: &Tolerances) -> Result<DensityOp> {
        match self {
            Channel::Kraus(k) => k.apply(rho),
            Channel::Transfer(t) => t.apply(rho, tol),
        }
    }

    pub fn adjoint(&self, x: &HermitianOp) -> Result<HermitianOp> {
        match self {
            Channel::Kraus(k) => k.adjoint(x),
            Channel::Transfer(t) => t.adjoint(x),
        }
    }

    pub fn to_transfer(&self) -> TransferMap {
        match self {
            Channel::Kraus(k) => k.to_transfer(),
            Channel::Transfer(t) => t.clone(),
        }
    }

    /// `after ∘ self`. Stays in Kraus form when both sides are Kraus.
    pub fn then(&self, after: &Channel) -> Result<Channel> {
        match (self, after) {
            (Channel::Kraus(a), Channel::Kraus(b)) => Ok(a.then(b)?.into()),
            _ => Ok(self.to_transfer().then(&after.to_transfer())?.into()),
        }
    }
}

pub fn apply_channel(t: &Channel, rho: &DensityOp, tol: &Tolerances) -> Result<DensityOp> {
    t.apply(rho, tol)
}

pub fn adjoint_channel(t: &Channel, x: &HermitianOp) -> Result<HermitianOp> {
    t.adjoint(x)
}

/// Outcome-indexed families of Kraus operators whose completely positive
/// branches sum to a trace-preserving channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    dim_in: usize,
    dim_out: usize,
    branches: Vec<Vec<CMatrix>>,
    labels: Option<Vec<f64>>,
}

impl Instrument {
    pub fn new(branches: Vec<Vec<CMatrix>>) -> Result<Self> {
        Self::with_tolerances(branches, &Tolerances::default())
    }

    pub fn with_tolerances(branches: Vec<Vec<CMatrix>>, tol: &Tolerances) -> Result<Self> {
        if branches.is_empty() || branches.iter().any(|b| b.is_empty()) {
            return Err(Error::InvalidInput("every instrument branch needs a Kraus operator".into()));
        }
        let all: Vec<CMatrix> = branches.iter().flatten().cloned().collect();
        let channel = KrausChannel::with_tolerances(all, tol)?;
        Ok(Self { dim_in: channel.dim_in, dim_out: channel.dim_out, branches, labels: None })
    }

    pub(crate) fn from_branches_unchecked(branches: Vec<Vec<CMatrix>>) -> Self {
        let (dim_out, dim_in) = branches[0][0].shape();
        Self { dim_in, dim_out, branches, labels: None }
    }

    /// Lüders instrument with one projector per branch.
    pub fn luders(projectors: &[HermitianOp]) -> Result<Self> {
        Self::new(projectors.iter().map(|p| vec![p.matrix().clone()]).collect())
    }

    /// Lüders instrument of the projection measurement of `a`, labelled by its
    /// eigenvalues.
    pub fn luders_of(a: &HermitianOp, width: f64) -> Self {
        let povm = Povm::projective(a, width);
        let branches = povm.effects().iter().map(|p| vec![p.matrix().clone()]).collect();
        Self {
            dim_in: a.dim(),
            dim_out: a.dim(),
            branches,
            labels: povm.labels().map(<[f64]>::to_vec),
        }
    }

    /// The single-branch instrument of a channel.
    pub fn from_channel(channel: &KrausChannel) -> Self {
        Self {
            dim_in: channel.dim_in,
            dim_out: channel.dim_out,
            branches: vec![channel.kraus.clone()],
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<f64>) -> Result<Self> {
        check_dims(self.branches.len(), labels.len())?;
        if labels.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn outcomes(&self) -> usize {
        self.branches.len()
    }

    pub fn branches(&self) -> &[Vec<CMatrix>] {
        &self.branches
    }

    pub fn labels(&self) -> Option<&[f64]> {
        self.labels.as_deref()
    }

    /// Unnormalized post-measurement state `I_i(ρ) = Σ_a K_{i,a} ρ K_{i,a}†`.
    pub fn branch_state(&self, i: usize, rho: &DensityOp) -> Result<CMatrix> {
        check_dims(self.dim_in, rho.dim())?;
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.branches[i] {
            out += k * rho.matrix() * k.adjoint();
        }
        Ok(out)
    }

    /// Heisenberg-picture branch `I_i′(X) = Σ_a K_{i,a}† X K_{i,a}`.
    pub fn branch_adjoint(&self, i: usize, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.branches[i] {
            out += k.adjoint() * x * k;
        }
        out
    }
}

/// `E_i = Σ_a K_{i,a}† K_{i,a}`, carrying the instrument's labels.
pub fn induced_povm(ins: &Instrument) -> Povm {
    let effects = (0..ins.outcomes())
        .map(|i| HermitianOp::from_hermitian_part(ins.branch_adjoint(i, &linalg::identity(ins.dim_out))))
        .collect();
    Povm { dim: ins.dim_in, effects, labels: ins.labels.clone() }
}

/// Channel with all branches' Kraus operators.
pub fn induced_channel(ins: &Instrument) -> KrausChannel {
    KrausChannel::from_kraus_unchecked(ins.branches.iter().flatten().cloned().collect())
}

/// A measurement on `Ω₁ × Ω₂` together with the factor sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct JointMeasurement {
    first: usize,
    second: usize,
    povm: Povm,
}

impl JointMeasurement {
    pub fn new(first: usize, second: usize, povm: Povm) -> Result<Self> {
        check_dims(first * second, povm.outcomes())?;
        Ok(Self { first, second, povm })
    }

    /// The product measurement `E_{ij} = P_i Q_j` of two commuting projective
    /// measurements (or any pair whose products are positive).
    pub fn commuting_product(m: &Povm, n: &Povm) -> Result<Self> {
        check_dims(m.dim(), n.dim())?;
        let effects = m
            .effects()
            .iter()
            .flat_map(|p| n.effects().iter().map(move |q| HermitianOp::with_tolerance(p.matrix() * q.matrix(), 1e-9)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(m.outcomes(), n.outcomes(), Povm::new(effects)?)
    }

    /// `J = M` on the diagonal of `Ω × Ω`: the trivial joint description of a
    /// measurement paired with itself.
    pub fn diagonal(m: &Povm) -> Self {
        let n = m.outcomes();
        let zero = HermitianOp::zero(m.dim());
        let effects = (0..n * n)
            .map(|k| if k / n == k % n { m.effects()[k / n].clone() } else { zero.clone() })
            .collect();
        Self { first: n, second: n, povm: Povm::from_effects_unchecked(effects) }
    }

    pub fn first_outcomes(&self) -> usize {
        self.first
    }

    pub fn second_outcomes(&self) -> usize {
        self.second
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn effect(&self, i: usize, j: usize) -> &HermitianOp {
        &self.povm.effects()[i * self.second + j]
    }

    /// `π₁ ∘ J`.
    pub fn first_marginal(&self) -> Povm {
        let effects = (0..self.first)
            .map(|i| {
                let mut m = CMatrix::zeros(self.povm.dim, self.povm.dim);
                for j in 0..self.second {
                    m += self.effect(i, j).matrix();
                }
                HermitianOp::from_hermitian_part(m)
            })
            .collect();
        Povm::from_effects_unchecked(effects)
    }

    /// `π₂ ∘ J`.
    pub fn second_marginal(&self) -> Povm {
        let effects = (0..self.second)
            .map(|j| {
                let mut m = CMatrix::zeros(self.povm.dim, self.povm.dim);
                for i in 0..self.first {
                    m += self.effect(i, j).matrix();
                }
                HermitianOp::from_hermitian_part(m)
            })
            .collect();
        Povm::from_effects_unchecked(effects)
    }
}

/// Sequential measurement: instrument outcome `i`, then `L` outcome `j` on the
/// post-measurement state. Heisenberg effects `J_{ij} = Σ_a K_{i,a}† F_j K_{i,a}`.
pub fn joint_measurement(ins: &Instrument, l: &Povm) -> Result<JointMeasurement> {
    check_dims(ins.dim_out, l.dim())?;
    let effects = (0..ins.outcomes())
        .flat_map(|i| l.effects().iter().map(move |f| (i, f)))
        .map(|(i, f)| HermitianOp::from_hermitian_part(ins.branch_adjoint(i, f.matrix())))
        .collect();
    JointMeasurement::new(ins.outcomes(), l.outcomes(), Povm::from_effects_unchecked(effects))
}

/// `J(i, j) = Tr[F_j I_i(ρ)]`, row-major over `Ω₁ × Ω₂`.
pub fn joint_distribution(ins: &Instrument, l: &Povm, rho: &DensityOp) -> Result<ProbDist> {
    check_dims(ins.dim_out, l.dim())?;
    let mut weights = Vec::with_capacity(ins.outcomes() * l.outcomes());
    for i in 0..ins.outcomes() {
        let post = ins.branch_state(i, rho)?;
        for f in l.effects() {
            weights.push(linalg::trace_product(f.matrix(), &post).re.max(0.0));
        }
    }
    ProbDist::new(weights)
}

/// `L ∘ Θ` with effects `Θ′(F_j)`.
pub fn compose_measurement_after_channel(l: &Povm, t: &Channel) -> Result<Povm> {
    check_dims(t.dim_out(), l.dim())?;
    let effects = l.effects().iter().map(|f| t.adjoint(f)).collect::<Result<Vec<_>>>()?;
    Ok(Povm { dim: t.dim_in(), effects, labels: l.labels.clone() })
}

/// Column-stochastic matrix acting on distributions, `(Kp)(j) = Σ_i K_{ji} p(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalChannel {
    matrix: RMatrix,
}

impl ClassicalChannel {
    pub fn new(matrix: RMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::default())
    }

    pub fn with_tolerances(matrix: RMatrix, tol: &Tolerances) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::InvalidInput("classical channel must be nonempty".into()));
        }
        for (column, col) in matrix.column_iter().enumerate() {
            let ok = col.iter().all(|&v| v.is_finite() && v >= -tol.psd) && (col.sum() - 1.0).abs() <= tol.num;
            if !ok {
                return Err(Error::NotStochastic { column });
            }
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: RMatrix::identity(n, n) }
    }

    /// Every outcome mapped to a single one.
    pub fn merge_all(n: usize) -> Self {
        Self { matrix: RMatrix::from_element(1, n, 1.0) }
    }

    /// Deterministic relabelling `i ↦ targets[i]` onto `size_out` outcomes.
    pub fn deterministic(targets: &[usize], size_out: usize) -> Result<Self> {
        let mut matrix = RMatrix::zeros(size_out, targets.len());
        for (i, &t) in targets.iter().enumerate() {
            if t >= size_out {
                return Err(Error::InvalidInput(format!("target {t} out of range")));
            }
            matrix[(t, i)] = 1.0;
        }
        Ok(Self { matrix })
    }

    /// Marginal projection `π₁` from `Ω₁ × Ω₂`.
    pub fn first_marginal(n1: usize, n2: usize) -> Self {
        let targets: Vec<usize> = (0..n1 * n2).map(|k| k / n2).collect();
        Self::deterministic(&targets, n1).expect("targets in range")
    }

    /// Marginal projection `π₂` from `Ω₁ × Ω₂`.
    pub fn second_marginal(n1: usize, n2: usize) -> Self {
        let targets: Vec<usize> = (0..n1 * n2).map(|k| k % n2).collect();
        Self::deterministic(&targets, n2).expect("targets in range")
    }

    pub fn size_in(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn size_out(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.matrix
    }

    pub fn apply(&self, p: &ProbDist) -> Result<ProbDist> {
        check_dims(self.size_in(), p.len())?;
        let out = &self.matrix * RVector::from_column_slice(p.weights());
        ProbDist::new(out.iter().map(|v| v.max(0.0)).collect())
    }

    /// `(K′f)(i) = Σ_j K_{ji} f(j)`.
    pub fn adjoint(&self, f: &RealFn) -> Result<RealFn> {
        check_dims(self.size_out(), f.len())?;
        let out = self.matrix.transpose() * RVector::from_column_slice(f.values());
        RealFn::new(out.iter().copied().collect())
    }

    /// The post-processed measurement `K ∘ M`.
    pub fn after_measurement(&self, m: &Povm) -> Result<Povm> {
        check_dims(self.size_in(), m.outcomes())?;
        let effects = (0..self.size_out())
            .map(|j| {
                let mut acc = CMatrix::zeros(m.dim(), m.dim());
                for (i, e) in m.effects().iter().enumerate() {
                    acc += e.matrix().scale(self.matrix[(j, i)]);
                }
                HermitianOp::from_hermitian_part(acc)
            })
            .collect();
        Ok(Povm { dim: m.dim(), effects, labels: None })
    }

    /// The same process seen as a measurement on diagonal (classical) states.
    pub fn as_povm(&self) -> Povm {
        let effects = self
            .matrix
            .row_iter()
            .map(|row| HermitianOp::from_real_diagonal(&row.iter().copied().collect::<Vec<_>>()))
            .collect();
        Povm::from_effects_unchecked(effects)
    }
}

pub fn apply_classical(k: &ClassicalChannel, p: &ProbDist) -> Result<ProbDist> {
    k.apply(p)
}

pub fn adjoint_classical(k: &ClassicalChannel, f: &RealFn) -> Result<RealFn> {
    k.adjoint(f)
}
