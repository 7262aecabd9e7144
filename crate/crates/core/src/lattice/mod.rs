//! Complex lattices `Λ = L(B_c) ⊂ C^n` with their real `2n`-dimensional
//! embedding, duals, modular reduction and exact closest-point search.

mod enumerate;
pub mod io;
mod reduce;

pub(crate) use enumerate::Enumeration;
pub use reduce::{lll, Unimodular};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, RMat, RVec, C64, MEMBERSHIP_TOL};

/// Largest real dimension handled by exact enumeration.
pub const REAL_DIM_CAP: usize = 32;

const LLL_DELTA: f64 = 0.99;
const CVP_NODE_CAP: usize = 50_000_000;
/// Relative tolerance under which two candidate distances count as a tie.
const TIE_TOL: f64 = 1e-9;

/// Stacks real and imaginary parts of a complex `n x 2n` generator.
pub fn real_embedding(generator: &CMat) -> Result<RMat> {
    let (n, k) = generator.shape();
    if k != 2 * n {
        return Err(Error::Shape(format!("generator must be n x 2n, got {n} x {k}")));
    }
    let br = linalg::stack_real(generator);
    check_full_rank(&br)?;
    Ok(br)
}

fn check_full_rank(br: &RMat) -> Result<f64> {
    if br.nrows() == 0 {
        return Err(Error::RankDeficient);
    }
    let sv = br.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || !max.is_finite() || min <= 1e-12 * max {
        return Err(Error::RankDeficient);
    }
    Ok(br.clone().determinant().abs())
}

/// Row-major reshape of an `nT` vector into an `n x T` matrix: row `r` holds
/// entries `r*T .. (r+1)*T`.
pub fn matrix_form(x: &[C64], n: usize, t: usize) -> Result<CMat> {
    if x.len() != n * t {
        return Err(Error::Shape(format!("vector of length {} cannot form {n} x {t}", x.len())));
    }
    Ok(CMat::from_row_slice(n, t, x))
}

/// Inverse of [`matrix_form`].
pub fn vectorize(m: &CMat) -> CVec {
    let (n, t) = m.shape();
    CVec::from_fn(n * t, |i, _| m[(i / t, i % t)])
}

/// A point of a lattice with optional integer coordinates w.r.t. `B_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePoint {
    pub coords: CVec,
    pub coeffs: Option<Vec<i64>>,
}

/// A full-rank complex lattice. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Lattice {
    generator: CMat,
    real_basis: RMat,
    inverse: RMat,
    volume: f64,
}

impl Lattice {
    pub fn new(generator: CMat) -> Result<Self> {
        let real_basis = real_embedding(&generator)?;
        Self::build(generator, real_basis)
    }

    /// Builds from a real `2n x 2n` basis (columns are basis vectors, rows are
    /// `[Re; Im]` coordinates).
    pub fn from_real_basis(real_basis: RMat) -> Result<Self> {
        if !real_basis.is_square() || real_basis.nrows() % 2 != 0 {
            return Err(Error::Shape(format!(
                "real basis must be 2n x 2n, got {:?}",
                real_basis.shape()
            )));
        }
        let generator = linalg::unstack_real(&real_basis);
        Self::build(generator, real_basis)
    }

    fn build(generator: CMat, real_basis: RMat) -> Result<Self> {
        let volume = check_full_rank(&real_basis)?;
        let inverse = real_basis.clone().try_inverse().ok_or(Error::RankDeficient)?;
        Ok(Self { generator, real_basis, inverse, volume })
    }

    /// `Z[i]^n`.
    pub fn gaussian_integers(n: usize) -> Self {
        Self::from_real_basis(RMat::identity(2 * n, 2 * n)).expect("identity basis")
    }

    pub fn complex_dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn real_dim(&self) -> usize {
        self.real_basis.nrows()
    }

    pub fn generator(&self) -> &CMat {
        &self.generator
    }

    pub fn real_basis(&self) -> &RMat {
        &self.real_basis
    }

    /// `|det B_r|`.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// `c·Λ` for a real scalar.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_real_basis(&self.real_basis * c)
    }

    /// `AΛ` for a complex `n x n` matrix `A`.
    pub fn transform(&self, a: &CMat) -> Result<Self> {
        if a.shape() != (self.complex_dim(), self.complex_dim()) {
            return Err(Error::Shape(format!(
                "transform must be {n} x {n}",
                n = self.complex_dim()
            )));
        }
        Self::new(a * &self.generator)
    }

    /// Same lattice under a change of basis by an integer unimodular matrix.
    pub fn rebased(&self, u: &Unimodular) -> Result<Self> {
        let uf = u.map(|x| x as f64);
        let det = uf.clone().determinant();
        if (det.abs() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter("basis change is not unimodular".into()));
        }
        Self::from_real_basis(&self.real_basis * uf)
    }

    /// `Λ* = {x : Re<x, y> ∈ Z for all y ∈ Λ}`, generated by `B_r^{-T}`.
    pub fn dual(&self) -> Self {
        Self::from_real_basis(self.inverse.transpose()).expect("inverse of full-rank basis")
    }

    /// Real coordinates of `y` with respect to `B_r`.
    pub fn coefficients(&self, y: &CVec) -> RVec {
        &self.inverse * linalg::embed(y)
    }

    pub fn point(&self, coeffs: &[i64]) -> Result<LatticePoint> {
        if coeffs.len() != self.real_dim() {
            return Err(Error::Shape(format!(
                "expected {} coefficients, got {}",
                self.real_dim(),
                coeffs.len()
            )));
        }
        let z = RVec::from_iterator(coeffs.len(), coeffs.iter().map(|&v| v as f64));
        let coords = linalg::unembed(&(&self.real_basis * z));
        Ok(LatticePoint { coords, coeffs: Some(coeffs.to_vec()) })
    }

    /// Integer coordinates of `y` when it is a lattice point within `tol`.
    pub fn integer_coefficients(&self, y: &CVec, tol: f64) -> Option<Vec<i64>> {
        let u = self.coefficients(y);
        let mut out = Vec::with_capacity(u.len());
        for v in u.iter() {
            let r = v.round();
            if (v - r).abs() > tol {
                return None;
            }
            out.push(r as i64);
        }
        Some(out)
    }

    pub fn contains(&self, y: &CVec) -> bool {
        self.integer_coefficients(y, MEMBERSHIP_TOL).is_some()
    }

    /// Representative of `y + Λ` in the half-open fundamental parallelepiped
    /// `{B_r u : u ∈ [0,1)^{2n}}`. Coordinates within `MEMBERSHIP_TOL` of an
    /// integer are snapped before reduction.
    pub fn mod_lattice(&self, y: &CVec) -> CVec {
        let mut u = self.coefficients(y);
        for v in u.iter_mut() {
            let r = v.round();
            if (*v - r).abs() <= MEMBERSHIP_TOL {
                *v = r;
            }
            *v -= v.floor();
        }
        linalg::unembed(&(&self.real_basis * u))
    }

    /// Exact closest lattice point to `y`; ties go to the lexicographically
    /// smallest coefficient vector.
    pub fn closest_point(&self, y: &CVec) -> Result<LatticePoint> {
        ClosestPointSolver::new(self)?.closest(y)
    }
}

/// Preprocessed closest-point search (LLL + QR) reusable across queries.
#[derive(Debug, Clone)]
pub struct ClosestPointSolver {
    basis: RMat,
    unimodular: Unimodular,
    q_t: RMat,
    r: RMat,
    scale_sq: f64,
}

impl ClosestPointSolver {
    pub fn new(lattice: &Lattice) -> Result<Self> {
        Self::from_real_basis(lattice.real_basis())
    }

    pub fn from_real_basis(basis: &RMat) -> Result<Self> {
        let m = basis.ncols();
        if m > REAL_DIM_CAP {
            return Err(Error::DimensionTooLarge { dim: m, cap: REAL_DIM_CAP });
        }
        let (reduced, unimodular) = lll(basis, LLL_DELTA);
        let qr = reduced.clone().qr();
        let q_t = qr.q().transpose();
        let r = qr.r();
        let scale_sq = basis.column_iter().map(|c| c.norm_squared()).sum::<f64>() / m.max(1) as f64;
        Ok(Self { basis: basis.clone(), unimodular, q_t, r, scale_sq })
    }

    fn babai(&self, q: &RVec) -> (Vec<i64>, f64) {
        let m = self.r.ncols();
        let mut z = vec![0i64; m];
        for k in (0..m).rev() {
            let mut acc = q[k];
            for j in (k + 1)..m {
                acc -= self.r[(k, j)] * z[j] as f64;
            }
            z[k] = (acc / self.r[(k, k)]).round() as i64;
        }
        let zf = RVec::from_iterator(m, z.iter().map(|&v| v as f64));
        let d = (&self.r * zf - q).norm_squared();
        (z, d)
    }

    fn to_original(&self, z: &[i64]) -> Vec<i64> {
        let m = z.len();
        (0..m)
            .map(|i| (0..m).map(|j| self.unimodular[(i, j)] * z[j]).sum())
            .collect()
    }

    /// Closest point to a real embedded target. Returns original coefficients
    /// and the squared distance.
    pub fn closest_real(&self, y: &RVec) -> Result<(Vec<i64>, f64)> {
        let q = &self.q_t * y;
        let (_, babai_d) = self.babai(&q);
        // Schnorr-Euchner pass: shrink the radius to the optimum.
        let mut best = babai_d * (1.0 + 1e-12) + 1e-300;
        Enumeration::new(&self.r, &q, CVP_NODE_CAP)
            .run(best, &mut |_, d| {
                if d < best {
                    best = d;
                }
                best
            })
            .map_err(|e| Error::Truncation { lower: 0.0, upper: f64::INFINITY, points: e.nodes })?;
        // Collect near-ties and apply the lexicographic rule.
        let radius = best * (1.0 + TIE_TOL) + TIE_TOL * 1e-3 * self.scale_sq;
        let mut pick: Option<(Vec<i64>, f64)> = None;
        Enumeration::new(&self.r, &q, CVP_NODE_CAP)
            .run(radius, &mut |z, d| {
                let orig = self.to_original(z);
                match &pick {
                    Some((p, _)) if *p <= orig => {}
                    _ => pick = Some((orig, d)),
                }
                radius
            })
            .map_err(|e| Error::Truncation { lower: 0.0, upper: f64::INFINITY, points: e.nodes })?;
        pick.ok_or_else(|| Error::Truncation { lower: 0.0, upper: f64::INFINITY, points: 0 })
    }

    pub fn closest(&self, y: &CVec) -> Result<LatticePoint> {
        if 2 * y.len() != self.basis.nrows() {
            return Err(Error::Shape(format!(
                "target has complex length {}, lattice real dimension {}",
                y.len(),
                self.basis.nrows()
            )));
        }
        let (coeffs, _) = self.closest_real(&linalg::embed(y))?;
        let z = RVec::from_iterator(coeffs.len(), coeffs.iter().map(|&v| v as f64));
        let coords = linalg::unembed(&(&self.basis * z));
        Ok(LatticePoint { coords, coeffs: Some(coeffs) })
    }
}
