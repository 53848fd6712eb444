//! Dense complex linear algebra helpers shared by every module.
//!
//! All matrices are `DMatrix<Complex64>`. Subspaces are carried as matrices
//! with orthonormal columns; zero-dimensional spaces are legal everywhere and
//! are represented by matrices with zero rows and/or zero columns.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Builds a matrix from real row-major data.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMat {
    assert_eq!(data.len(), rows * cols, "real_matrix: data length");
    CMat::from_fn(rows, cols, |i, j| c(data[i * cols + j], 0.0))
}

/// Standard complex Gaussian entries (real and imaginary parts i.i.d. N(0, 1/2)).
pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(scale * re, scale * im)
    })
}

pub fn fro(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn fro_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Frobenius inner product `tr(a* b)`.
pub fn inner(a: &CMat, b: &CMat) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn trace(m: &CMat) -> Complex64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Largest singular value; zero for empty matrices.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect()
}

/// Reciprocal 2-norm condition number `σ_min / σ_max`; 1 for empty matrices.
pub fn rcond(m: &CMat) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    if m.nrows() != m.ncols() {
        return 0.0;
    }
    let sv = singular_values(m);
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

pub fn inverse(m: &CMat) -> Option<CMat> {
    if m.nrows() != m.ncols() {
        return None;
    }
    if m.is_empty() {
        return Some(m.clone());
    }
    m.clone().try_inverse()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let mut out = zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

pub fn hstack(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.nrows(), b.nrows(), "hstack: row mismatch");
    let mut out = zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

pub fn vstack(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.ncols(), "vstack: column mismatch");
    let mut out = zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    out
}

/// Standard symplectic matrix `[[0, I], [-I, 0]]` of even size `n`.
pub fn symplectic_j(n: usize) -> CMat {
    assert!(n % 2 == 0, "symplectic_j needs an even size");
    let h = n / 2;
    let mut j = zeros(n, n);
    for k in 0..h {
        j[(k, h + k)] = ONE;
        j[(h + k, k)] = -ONE;
    }
    j
}

/// Orthonormal basis of the column span of `m`. Columns with singular value
/// at most `tol * max(1, σ_max)` are discarded.
pub fn orth(m: &CMat, tol: f64) -> CMat {
    let n = m.nrows();
    if m.ncols() == 0 || n == 0 {
        return zeros(n, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("svd u");
    let smax = svd.singular_values.max();
    let cut = tol * smax.max(1.0);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > cut)
        .collect();
    select_columns(&u, &keep)
}

/// Orthonormal basis of the kernel of `m` (`tol` relative as in [`orth`]).
pub fn null_space(m: &CMat, tol: f64) -> CMat {
    let cols = m.ncols();
    if cols == 0 {
        return zeros(0, 0);
    }
    if m.nrows() == 0 {
        return identity(cols);
    }
    let padded = if m.nrows() < cols {
        vstack(m, &zeros(cols - m.nrows(), cols))
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("svd v_t");
    let smax = svd.singular_values.max();
    let cut = tol * smax.max(1.0);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= cut)
        .collect();
    let v = v_t.adjoint();
    select_columns(&v, &keep)
}

pub fn select_columns(m: &CMat, idx: &[usize]) -> CMat {
    let mut out = zeros(m.nrows(), idx.len());
    for (k, &j) in idx.iter().enumerate() {
        out.set_column(k, &m.column(j));
    }
    out
}

/// Orthogonal projector `U U*` for a matrix with orthonormal columns.
pub fn projector(u: &CMat) -> CMat {
    u * u.adjoint()
}

/// Distance between the spans of two orthonormal bases: the spectral norm
/// of the projector difference (the sine of the largest principal angle).
pub fn subspace_distance(a: &CMat, b: &CMat) -> f64 {
    if a.ncols() != b.ncols() {
        return 1.0;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    spectral_norm(&(projector(a) - projector(b)))
}

/// Orthonormal basis of the intersection of two spans (both orthonormal).
pub fn intersect(a: &CMat, b: &CMat, tol: f64) -> CMat {
    let n = a.nrows();
    if a.ncols() == 0 || b.ncols() == 0 {
        return zeros(n, 0);
    }
    let stacked = hstack(a, &(-b));
    let ker = null_space(&stacked, tol);
    let coeffs = ker.rows(0, a.ncols()).into_owned();
    orth(&(a * coeffs), tol)
}

/// Hermitian eigendecomposition; eigenvalues sorted ascending.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let herm = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = select_columns(&eig.eigenvectors, &order);
    (values, vectors)
}

/// `exp(t·h)` for hermitian `h`, computed spectrally.
pub fn expm_hermitian(h: &CMat, t: f64) -> CMat {
    let (vals, vecs) = eigh(h);
    let n = vals.len();
    let d = CMat::from_fn(n, n, |i, j| {
        if i == j {
            c((t * vals[i]).exp(), 0.0)
        } else {
            ZERO
        }
    });
    &vecs * d * vecs.adjoint()
}

/// Polar decomposition `g = k · p` with `k` unitary and `p` positive; returns
/// `log p` (hermitian).
pub fn polar_log(g: &CMat) -> (CMat, CMat) {
    let n = g.nrows();
    if n == 0 {
        return (zeros(0, 0), zeros(0, 0));
    }
    let (vals, vecs) = eigh(&(g.adjoint() * g));
    let logd = CMat::from_fn(n, n, |i, j| {
        if i == j {
            c(0.5 * vals[i].ln(), 0.0)
        } else {
            ZERO
        }
    });
    let invsqrt = CMat::from_fn(n, n, |i, j| {
        if i == j {
            c(1.0 / vals[i].sqrt(), 0.0)
        } else {
            ZERO
        }
    });
    let log_p = &vecs * logd * vecs.adjoint();
    let k = g * (&vecs * invsqrt * vecs.adjoint());
    (k, log_p)
}

/// Eigenvalues of a general square matrix (via complex Schur form).
pub fn eigenvalues(m: &CMat) -> Vec<Complex64> {
    if m.is_empty() {
        return Vec::new();
    }
    m.clone()
        .schur()
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .unwrap_or_default()
}

/// Orthonormal basis of the span of the eigenvectors of a square matrix.
pub fn eigenvectors(m: &CMat, tol: f64) -> Vec<CMat> {
    let n = m.nrows();
    let mut out: Vec<CMat> = Vec::new();
    for lambda in eigenvalues(m) {
        let shifted = m - identity(n) * lambda;
        let ker = null_space(&shifted, tol);
        if ker.ncols() > 0 && !out.iter().any(|b| subspace_distance(b, &ker) < 1e-8) {
            out.push(ker);
        }
    }
    out
}

/// Random unitary matrix (QR of a Gaussian matrix with phases fixed).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    if n == 0 {
        return zeros(0, 0);
    }
    let g = random_gaussian(rng, n, n);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut out = q.clone();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            out[(i, k)] = q[(i, k)] * phase;
        }
    }
    out
}

/// Random hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = random_gaussian(rng, n, n);
    (&g + g.adjoint()) * c(0.5, 0.0)
}

/// Well-conditioned random invertible matrix `I + 0.3·G`.
pub fn random_invertible<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    loop {
        let g = identity(n) + random_gaussian(rng, n, n) * c(0.3, 0.0);
        if rcond(&g) > 1e-2 {
            return g;
        }
    }
}
