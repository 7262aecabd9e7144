//! Small dense linear-algebra helpers shared by the lattice and channel code.
//!
//! Complex vectors in `C^n` are embedded into `R^{2n}` by stacking real parts
//! over imaginary parts. A complex linear map `A` acts on that embedding as
//! `[[Re A, -Im A], [Im A, Re A]]`, see [`real_form`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

/// Tolerance used for lattice membership and coefficient rounding.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Tolerance used for matrix identities (Hermitian symmetry, factorizations).
pub const LINALG_TOL: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Action of a complex matrix on real embeddings.
pub fn real_form(a: &CMat) -> RMat {
    let (r, k) = a.shape();
    let mut out = RMat::zeros(2 * r, 2 * k);
    for i in 0..r {
        for j in 0..k {
            let z = a[(i, j)];
            out[(i, j)] = z.re;
            out[(i, j + k)] = -z.im;
            out[(i + r, j)] = z.im;
            out[(i + r, j + k)] = z.re;
        }
    }
    out
}

/// `[Re v; Im v]`.
pub fn embed(v: &CVec) -> RVec {
    let n = v.len();
    RVec::from_fn(2 * n, |i, _| if i < n { v[i].re } else { v[i - n].im })
}

pub fn unembed(v: &RVec) -> CVec {
    let n = v.len() / 2;
    CVec::from_fn(n, |i, _| c(v[i], v[i + n]))
}

/// Stacks real over imaginary parts row-wise: `n x k` complex to `2n x k` real.
pub fn stack_real(a: &CMat) -> RMat {
    let (r, k) = a.shape();
    RMat::from_fn(2 * r, k, |i, j| if i < r { a[(i, j)].re } else { a[(i - r, j)].im })
}

pub fn unstack_real(a: &RMat) -> CMat {
    let r = a.nrows() / 2;
    CMat::from_fn(r, a.ncols(), |i, j| c(a[(i, j)], a[(i + r, j)]))
}

/// `a ⊗ I_t`: the operator applying `a` to every column of an `n x t` matrix,
/// expressed on its row-major vectorization.
pub fn kron_identity(a: &CMat, t: usize) -> CMat {
    let (r, k) = a.shape();
    let mut out = CMat::zeros(r * t, k * t);
    for i in 0..r {
        for j in 0..k {
            for s in 0..t {
                out[(i * t + s, j * t + s)] = a[(i, j)];
            }
        }
    }
    out
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    if !a.is_square() {
        return false;
    }
    let scale = a.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    (a - a.adjoint()).iter().all(|z| z.norm() <= tol * scale)
}

/// Symmetrizes `(a + a^†)/2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    let eig = nalgebra::SymmetricEigen::new(hermitian_part(a));
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    v
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_map(a: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let eig = nalgebra::SymmetricEigen::new(hermitian_part(a));
    let d = CMat::from_diagonal(&DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| c(f(l), 0.0)),
    ));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Hermitian positive square root.
pub fn hermitian_sqrt(a: &CMat) -> CMat {
    hermitian_map(a, |l| l.max(0.0).sqrt())
}

/// `log |a|` for a Hermitian positive-definite matrix.
pub fn log_det_hpd(a: &CMat) -> Option<f64> {
    let ch = nalgebra::Cholesky::new(hermitian_part(a))?;
    Some(ch.l_dirty().diagonal().iter().map(|z| 2.0 * z.re.ln()).sum())
}

pub fn det_abs(a: &CMat) -> f64 {
    a.clone().determinant().norm()
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(a: &CMat) -> f64 {
    a.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

pub fn frobenius_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn condition_number(a: &CMat) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Circularly symmetric complex Gaussian with variance `var` per entry.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> C64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(s * re, s * im)
}

pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, var: f64) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng, var))
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase correction.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = complex_gaussian_matrix(rng, n, n, 1.0);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-random `rows x cols` isometry (`rows >= cols`, orthonormal columns).
pub fn haar_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let u = haar_unitary(rng, rows);
    u.columns(0, cols).into_owned()
}

/// Extends the rows of `a` (assumed linearly independent) to an orthonormal
/// basis of the orthogonal complement of its row space. Returns the new rows.
pub fn orthonormal_row_completion(a: &CMat) -> Option<CMat> {
    let (r, n) = a.shape();
    if r > n {
        return None;
    }
    // Orthonormal basis of the row space first, then fill with unit vectors.
    let mut basis: Vec<CVec> = Vec::with_capacity(n);
    let push = |v: CVec, basis: &mut Vec<CVec>| -> bool {
        let mut w = v;
        for _ in 0..2 {
            for b in basis.iter() {
                let proj = b.dotc(&w);
                w -= b * proj;
            }
        }
        let norm = w.norm();
        if norm > 1e-10 {
            basis.push(w / c(norm, 0.0));
            true
        } else {
            false
        }
    };
    for i in 0..r {
        // Row vectors are treated as column vectors of their conjugates so that
        // the complement satisfies a * h^† = 0.
        let v = a.row(i).adjoint();
        if !push(v.into_owned(), &mut basis) {
            return None;
        }
    }
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        let mut e = CVec::zeros(n);
        e[k] = c(1.0, 0.0);
        push(e, &mut basis);
    }
    let rows = n - r;
    Some(CMat::from_fn(rows, n, |i, j| basis[r + i][j].conj()))
}
