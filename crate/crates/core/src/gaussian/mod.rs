//! Lattice Gaussians: theta series, flatness factor, smoothing parameter,
//! volume-to-noise ratio, periodic densities and discrete Gaussian sampling.
//!
//! Covariances are carried in the real embedding. A complex covariance `Σ`
//! is stored as `M = real_form(Σ)`, the density is
//! `f(x) = exp(-vᵀ M⁻¹ v) / (π^n |Σ|)` with `v` the embedding of `x` and
//! `|Σ| = √det M`. Real `2n x 2n` covariances without complex structure are
//! accepted as-is.

mod closeness;
mod sampler;
mod sum;

pub use closeness::{sum_closeness_check, ClosenessReport};
pub use sampler::{sample_discrete_gaussian, DiscreteGaussianSampler, DiscreteGaussianSpec};
pub use sum::Certified;
pub(crate) use sum::GaussLattice;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{self, CMat, RMat, RVec, LINALG_TOL};

/// Default absolute tolerance on flatness factors and theta series.
pub const FLATNESS_TOL: f64 = 1e-12;

/// Hermitian positive-definite covariance in real-embedded form.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSpec {
    real: RMat,
    det: f64,
}

impl CovarianceSpec {
    pub fn from_complex(sigma: &CMat) -> Result<Self> {
        if !linalg::is_hermitian(sigma, LINALG_TOL) {
            return Err(Error::InvalidParameter("covariance is not Hermitian".into()));
        }
        Self::from_real_embedding(linalg::real_form(&linalg::hermitian_part(sigma)))
    }

    /// Accepts a symmetric positive-definite `2n x 2n` matrix acting on
    /// `[Re; Im]` coordinates.
    pub fn from_real_embedding(m: RMat) -> Result<Self> {
        if !m.is_square() || m.nrows() % 2 != 0 || m.nrows() == 0 {
            return Err(Error::Shape(format!("real covariance must be 2n x 2n, got {:?}", m.shape())));
        }
        let scale = m.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        if (&m - m.transpose()).iter().any(|v| v.abs() > LINALG_TOL * scale) {
            return Err(Error::InvalidParameter("covariance is not symmetric".into()));
        }
        let m = (&m + m.transpose()) * 0.5;
        let eig = m.clone().symmetric_eigenvalues();
        if eig.iter().any(|&l| l <= 0.0 || !l.is_finite()) {
            return Err(Error::InvalidParameter("covariance is not positive-definite".into()));
        }
        let det = eig.iter().map(|l| l.ln()).sum::<f64>() * 0.5;
        Ok(Self { real: m, det: det.exp() })
    }

    /// `s² I_n`.
    pub fn isotropic(n: usize, s2: f64) -> Result<Self> {
        Self::from_real_embedding(RMat::identity(2 * n, 2 * n) * s2)
    }

    pub fn complex_dim(&self) -> usize {
        self.real.nrows() / 2
    }

    pub fn real_matrix(&self) -> &RMat {
        &self.real
    }

    /// `|Σ|`.
    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.real.clone().symmetric_eigenvalues().min()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.real.clone().symmetric_eigenvalues().max()
    }

    pub fn inverse(&self) -> Self {
        let inv = self.real.clone().try_inverse().expect("positive-definite");
        Self::from_real_embedding((&inv + inv.transpose()) * 0.5).expect("inverse of PD is PD")
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.real.shape() != other.real.shape() {
            return Err(Error::Shape("covariance dimensions differ".into()));
        }
        Self::from_real_embedding(&self.real + &other.real)
    }

    /// `(Σ₁⁻¹ + Σ₂⁻¹)⁻¹`.
    pub fn harmonic(&self, other: &Self) -> Result<Self> {
        Ok(self.inverse().add(&other.inverse())?.inverse())
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::from_real_embedding(&self.real * s)
    }

    /// `A M Aᵀ` for a real map `A`.
    pub fn congruence(&self, a: &RMat) -> Result<Self> {
        Self::from_real_embedding(a * &self.real * a.transpose())
    }

    /// Back to complex form when the embedding has complex structure.
    pub fn to_complex(&self) -> Option<CMat> {
        let n = self.complex_dim();
        let a = self.real.view((0, 0), (n, n));
        let b = self.real.view((n, 0), (n, n));
        let ok = (a - self.real.view((n, n), (n, n))).norm() <= 1e-12 * self.real.norm()
            && (b + self.real.view((0, n), (n, n))).norm() <= 1e-12 * self.real.norm();
        ok.then(|| CMat::from_fn(n, n, |i, j| linalg::c(a[(i, j)], b[(i, j)])))
    }

    /// Lower-triangular `L` with `L Lᵀ = M`.
    fn cholesky_real(&self) -> RMat {
        self.real.clone().cholesky().expect("positive-definite").l()
    }
}

/// Either a scalar `σ` (covariance `σ² I`) or a full covariance.
#[derive(Debug, Clone, PartialEq)]
pub enum Spread {
    Sigma(f64),
    Cov(CovarianceSpec),
}

impl From<f64> for Spread {
    fn from(s: f64) -> Self {
        Spread::Sigma(s)
    }
}

impl From<CovarianceSpec> for Spread {
    fn from(c: CovarianceSpec) -> Self {
        Spread::Cov(c)
    }
}

impl Spread {
    pub fn covariance(&self, complex_dim: usize) -> Result<CovarianceSpec> {
        match self {
            Spread::Sigma(s) => {
                if !(*s > 0.0) || !s.is_finite() {
                    return Err(Error::InvalidParameter(format!("spread must be positive, got {s}")));
                }
                CovarianceSpec::isotropic(complex_dim, s * s)
            }
            Spread::Cov(c) => {
                if c.complex_dim() != complex_dim {
                    return Err(Error::Shape(format!(
                        "covariance has dimension {}, lattice {}",
                        c.complex_dim(),
                        complex_dim
                    )));
                }
                Ok(c.clone())
            }
        }
    }
}

/// `Θ_Λ(τ) = Σ_λ exp(-πτ||λ||²)`; `tail_bound` certifies the truncation.
pub fn theta_series(lattice: &Lattice, tau: f64, tol: f64) -> Result<Certified> {
    if !(tau > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidParameter("tau and tol must be positive".into()));
    }
    GaussLattice::new(&(lattice.real_basis() * tau.sqrt()))?.centered(tol, false)
}

/// Generator of the dual sum `Σ_{λ*} exp(-π² λ*ᵀ M λ*) = Σ_z exp(-π||G z||²)`.
fn dual_generator(lattice: &Lattice, cov: &CovarianceSpec) -> RMat {
    let l = cov.cholesky_real();
    l.transpose() * lattice.dual().real_basis() * PI.sqrt()
}

/// `ε_Λ(√Σ) = Σ_{λ* ≠ 0} exp(-π² λ*† Σ λ*)`, which for `σ² I` equals
/// `Θ_{Λ*}(πσ²) - 1`.
pub fn flatness_factor(lattice: &Lattice, spread: impl Into<Spread>) -> Result<Certified> {
    flatness_factor_tol(lattice, spread, FLATNESS_TOL)
}

pub fn flatness_factor_tol(lattice: &Lattice, spread: impl Into<Spread>, tol: f64) -> Result<Certified> {
    let cov = spread.into().covariance(lattice.complex_dim())?;
    GaussLattice::new(&dual_generator(lattice, &cov))?.centered(tol, true)
}

/// `η_ε(Λ) = √(2π) σ*` where `σ*` solves `ε_Λ(σ*) = ε`.
pub fn smoothing_parameter(lattice: &Lattice, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0,1), got {eps}")));
    }
    let eval = |s: f64| -> Result<f64> { Ok(flatness_factor_tol(lattice, s, eps * 1e-12)?.value) };
    let scale = lattice.volume().powf(1.0 / lattice.real_dim() as f64);
    let mut lo = scale;
    while eval(lo)? <= eps {
        lo *= 0.5;
    }
    let mut hi = scale;
    while eval(hi)? > eps {
        hi *= 2.0;
    }
    while (hi - lo) > 1e-11 * hi {
        let mid = (lo * hi).sqrt();
        if eval(mid)? > eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((2.0 * PI).sqrt() * 0.5 * (lo + hi))
}

/// `γ_Λ(√Σ) = V(Λ)^{1/n} / |Σ|^{1/n}` with `n` the complex dimension.
pub fn vnr(lattice: &Lattice, spread: impl Into<Spread>) -> Result<f64> {
    let n = lattice.complex_dim() as f64;
    let cov = spread.into().covariance(lattice.complex_dim())?;
    Ok((lattice.volume().ln() / n - cov.det().ln() / n).exp())
}

/// Evaluator of the periodic Gaussian `f_{√Σ,Λ}(x) = Σ_λ f_{√Σ}(x - λ)`.
pub struct PeriodicGaussian {
    sums: GaussLattice,
    whiten: RMat,
    norm: f64,
    volume: f64,
}

impl PeriodicGaussian {
    pub fn new(lattice: &Lattice, spread: impl Into<Spread>) -> Result<Self> {
        let cov = spread.into().covariance(lattice.complex_dim())?;
        // exp(-vᵀM⁻¹v) = exp(-π ||Kᵀv/√π||²) with M⁻¹ = K Kᵀ.
        let k = cov.inverse().cholesky_real();
        let whiten = k.transpose() / PI.sqrt();
        let g = &whiten * lattice.real_basis();
        let sums = GaussLattice::new(&g)?.with_centered_bound()?;
        let n = lattice.complex_dim() as i32;
        Ok(Self { sums, whiten, norm: 1.0 / (PI.powi(n) * cov.det()), volume: lattice.volume() })
    }

    /// Density at a real-embedded point, with certified tail in `tail_bound`.
    pub fn eval_real(&self, x: &RVec, tol: f64) -> Result<Certified> {
        let s = self.sums.shifted(&(&self.whiten * x), tol / self.norm)?;
        Ok(Certified { value: s.value * self.norm, tail_bound: s.tail_bound * self.norm, points: s.points })
    }

    /// `V(Λ) f_{√Σ,Λ}(x)`.
    pub fn normalized(&self, x: &RVec, tol: f64) -> Result<f64> {
        Ok(self.volume * self.eval_real(x, tol / self.volume)?.value)
    }
}

/// Grid evaluation of `max_x |V(Λ) f_{σ,Λ}(x) - 1|` over the fundamental
/// parallelepiped. Orthogonal blocks of the basis are evaluated separately
/// and combined, which keeps `Z^4`-like lattices cheap. Returns the maximal
/// deviation; approximate by construction.
pub fn primal_flatness(lattice: &Lattice, sigma: f64, points_per_dim: usize) -> Result<f64> {
    let b = lattice.real_basis();
    let blocks = orthogonal_blocks(b);
    let mut max_prod = 1.0;
    let mut min_prod = 1.0;
    for block in blocks {
        let sub = RMat::from_fn(b.nrows(), block.len(), |i, j| b[(i, block[j])]);
        // Restrict to the span of the block: an orthonormal frame from QR.
        let qr = sub.qr();
        let r = qr.r();
        let (lo, hi) = block_extremes(&r, sigma, points_per_dim.max(2))?;
        max_prod *= hi;
        min_prod *= lo;
    }
    Ok((max_prod - 1.0).max(1.0 - min_prod))
}

/// Groups basis vectors into mutually orthogonal families.
fn orthogonal_blocks(b: &RMat) -> Vec<Vec<usize>> {
    let m = b.ncols();
    let gram = b.transpose() * b;
    let scale = gram.diagonal().max();
    let mut label: Vec<usize> = (0..m).collect();
    fn find(l: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while l[r] != r {
            r = l[r];
        }
        l[i] = r;
        r
    }
    for i in 0..m {
        for j in (i + 1)..m {
            if gram[(i, j)].abs() > 1e-12 * scale {
                let (a, c) = (find(&mut label, i), find(&mut label, j));
                label[a.max(c)] = a.min(c);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for i in 0..m {
        let r = find(&mut label, i);
        match roots.iter().position(|&x| x == r) {
            Some(k) => groups[k].push(i),
            None => {
                roots.push(r);
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Min and max of `V f_{σ,L}` for the lattice generated by the square `r`,
/// where the real Gaussian has per-coordinate variance `σ²/2`.
fn block_extremes(r: &RMat, sigma: f64, points: usize) -> Result<(f64, f64)> {
    let d = r.ncols();
    let whiten = 1.0 / (sigma * PI.sqrt());
    let sums = GaussLattice::new(&(r * whiten))?.with_centered_bound()?;
    let volume = r.determinant().abs();
    let norm = volume / (PI * sigma * sigma).powf(d as f64 / 2.0);
    let eval = |u: &RVec| -> Result<f64> { Ok(norm * sums.shifted(&(r * u * whiten), 1e-13 / norm)?.value) };

    let mut best_hi = (f64::NEG_INFINITY, RVec::zeros(d));
    let mut best_lo = (f64::INFINITY, RVec::zeros(d));
    let total = points.pow(d as u32);
    let mut u = RVec::zeros(d);
    for idx in 0..total {
        let mut k = idx;
        for j in 0..d {
            u[j] = (k % points) as f64 / points as f64;
            k /= points;
        }
        let v = eval(&u)?;
        if v > best_hi.0 {
            best_hi = (v, u.clone());
        }
        if v < best_lo.0 {
            best_lo = (v, u.clone());
        }
    }
    // Local refinement around both extremes.
    let h = 1.0 / points as f64;
    for (target, is_max) in [(best_hi.1.clone(), true), (best_lo.1.clone(), false)] {
        let fine = 9usize;
        for idx in 0..fine.pow(d as u32) {
            let mut k = idx;
            let mut w = target.clone();
            for j in 0..d {
                w[j] += h * ((k % fine) as f64 / (fine - 1) as f64 * 2.0 - 1.0);
                k /= fine;
            }
            let v = eval(&w)?;
            if is_max && v > best_hi.0 {
                best_hi.0 = v;
            }
            if !is_max && v < best_lo.0 {
                best_lo.0 = v;
            }
        }
    }
    Ok((best_lo.0, best_hi.0))
}
