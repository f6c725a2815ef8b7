//! Small dense helpers over `nalgebra` shared by the domain modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type RMatrix = DMatrix<f64>;
pub type RVector = DVector<f64>;

pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `Tr[a b]` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Largest entrywise modulus of `m - m†`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Max entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues in ascending order.
/// Column `k` of the returned matrix is the eigenvector for eigenvalue `k`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    hermitian_eigen(m).0[0]
}

/// Eigen-decomposition of a real symmetric matrix, ascending.
pub fn symmetric_eigen(m: &RMatrix) -> (Vec<f64>, RMatrix) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = RMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// `m^{-1/2}` for a positive definite Hermitian `m`; `None` when the smallest
/// eigenvalue is below `floor` times the largest.
pub fn inverse_sqrt(m: &CMatrix, floor: f64) -> Option<CMatrix> {
    let (values, vectors) = hermitian_eigen(m);
    let top = values.last().copied().unwrap_or(0.0);
    if top <= 0.0 || values[0] <= floor * top {
        return None;
    }
    let n = m.nrows();
    let mut scaled = vectors.clone();
    for (k, &lambda) in values.iter().enumerate() {
        let s = 1.0 / lambda.sqrt();
        for i in 0..n {
            scaled[(i, k)] *= s;
        }
    }
    Some(&scaled * vectors.adjoint())
}

/// Projectors onto the eigenspaces of a Hermitian matrix, eigenvalues grouped
/// when consecutive values differ by at most `width`. Returns `(value, projector)`
/// pairs in descending order of value; each value is the mean of its group.
pub fn spectral_projectors(m: &CMatrix, width: f64) -> Vec<(f64, CMatrix)> {
    let (values, vectors) = hermitian_eigen(m);
    let n = m.nrows();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in (0..n).rev() {
        match groups.last_mut() {
            Some(g) if values[*g.last().unwrap()] - values[k] <= width => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let mean = g.iter().map(|&k| values[k]).sum::<f64>() / g.len() as f64;
            let mut p = CMatrix::zeros(n, n);
            for &k in &g {
                let v = vectors.column(k);
                p += v * v.adjoint();
            }
            (mean, p)
        })
        .collect()
}
