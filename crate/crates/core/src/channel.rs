//! Compound MIMO channels: equal-capacity shells, channel application,
//! antenna-mismatch reductions, eavesdropper covariances and quantization of
//! the eavesdropper covariance set.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::CovarianceSpec;
use crate::linalg::{self, c, CMat, CVec, C64};

/// Relative tolerance on the shell constraint `|I + ρH†H| = e^C`.
pub const SHELL_TOL: f64 = 1e-9;
/// Condition number above which an eavesdropper channel counts as singular.
pub const SINGULAR_COND: f64 = 1e12;

/// Parameters of the compound sets `S_b`, `S_e`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompoundSet {
    pub n_a: usize,
    pub n_b: usize,
    pub n_e: usize,
    pub power: f64,
    pub sigma_b: f64,
    pub sigma_e: f64,
    pub c_b: f64,
    pub c_e: f64,
}

impl CompoundSet {
    pub fn validate(&self) -> Result<()> {
        if self.n_a == 0 || self.n_b == 0 || self.n_e == 0 {
            return Err(Error::InvalidParameter("antenna counts must be positive".into()));
        }
        for (name, v) in [("power", self.power), ("sigma_b", self.sigma_b), ("sigma_e", self.sigma_e)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.c_b >= 0.0) || !(self.c_e >= 0.0) {
            return Err(Error::InvalidParameter("capacities must be nonnegative".into()));
        }
        Ok(())
    }

    /// `ρ_b = P / σ_b²`.
    pub fn rho_b(&self) -> f64 {
        self.power / (self.sigma_b * self.sigma_b)
    }

    /// `ρ_e = P / σ_e²`.
    pub fn rho_e(&self) -> f64 {
        self.power / (self.sigma_e * self.sigma_e)
    }
}

/// One realization `(H_b, H_e)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub h_b: CMat,
    pub h_e: CMat,
}

impl ChannelState {
    /// Checks both shell constraints.
    pub fn check(&self, set: &CompoundSet) -> Result<()> {
        for (name, h, rho, cap) in [("H_b", &self.h_b, set.rho_b(), set.c_b), ("H_e", &self.h_e, set.rho_e(), set.c_e)] {
            let r = shell_residual(h, rho, cap);
            if r > SHELL_TOL {
                return Err(Error::InvalidParameter(format!("{name} is off its shell (relative residual {r:.3e})")));
            }
        }
        Ok(())
    }
}

/// `ln |I + ρ H†H|`.
pub fn log_capacity(h: &CMat, rho: f64) -> f64 {
    let n = h.ncols();
    linalg::log_det_hpd(&(linalg::identity(n) + h.adjoint() * h * c(rho, 0.0))).unwrap_or(f64::NAN)
}

/// `| |I + ρH†H| / e^C - 1 |`.
pub fn shell_residual(h: &CMat, rho: f64, cap: f64) -> f64 {
    (log_capacity(h, rho) - cap).exp_m1().abs()
}

/// The isotropic point `H = √α [I; 0]` with `α = (e^{C/n_a} - 1)/ρ`.
pub fn isotropic_on_shell(n_rx: usize, n_a: usize, rho: f64, cap: f64) -> Result<CMat> {
    if n_rx < n_a {
        return Err(Error::InvalidParameter(format!(
            "an isotropic realization needs n_rx >= n_a, got {n_rx} < {n_a}"
        )));
    }
    if cap < 0.0 {
        return Err(Error::InvalidParameter(format!("capacity must be nonnegative, got {cap}")));
    }
    let alpha = (cap / n_a as f64).exp_m1() / rho;
    Ok(CMat::from_fn(n_rx, n_a, |i, j| if i == j { c(alpha.sqrt(), 0.0) } else { c(0.0, 0.0) }))
}

/// Random `H` with `|I + ρH†H| = e^C`: log-factors `ln(1 + ρλ_i)` uniform on
/// the simplex of total `C`, Haar-random singular directions on both sides.
pub fn sample_on_shell<R: Rng + ?Sized>(n_rx: usize, n_a: usize, rho: f64, cap: f64, rng: &mut R) -> Result<CMat> {
    if cap < 0.0 || !cap.is_finite() {
        return Err(Error::InvalidParameter(format!("capacity must be nonnegative, got {cap}")));
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("SNR must be positive, got {rho}")));
    }
    if cap == 0.0 {
        return Ok(CMat::zeros(n_rx, n_a));
    }
    let r = n_rx.min(n_a);
    let e: Vec<f64> = (0..r).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = e.iter().sum();
    let logs: Vec<f64> = e.iter().map(|x| cap * x / total).collect();
    let u = linalg::haar_isometry(rng, n_rx, r);
    let v = linalg::haar_isometry(rng, n_a, r);
    let d = CMat::from_diagonal(&CVec::from_iterator(r, logs.iter().map(|&l| c((l.exp_m1() / rho).sqrt(), 0.0))));
    Ok(u * d * v.adjoint())
}

/// Draws `H_b` and `H_e` on their shells.
pub fn sample_state<R: Rng + ?Sized>(set: &CompoundSet, rng: &mut R) -> Result<ChannelState> {
    set.validate()?;
    Ok(ChannelState {
        h_b: sample_on_shell(set.n_b, set.n_a, set.rho_b(), set.c_b, rng)?,
        h_e: sample_on_shell(set.n_e, set.n_a, set.rho_e(), set.c_e, rng)?,
    })
}

/// The isotropic state on both shells.
pub fn isotropic_state(set: &CompoundSet) -> Result<ChannelState> {
    set.validate()?;
    Ok(ChannelState {
        h_b: isotropic_on_shell(set.n_b, set.n_a, set.rho_b(), set.c_b)?,
        h_e: isotropic_on_shell(set.n_e, set.n_a, set.rho_e(), set.c_e)?,
    })
}

/// `Y = HX + W`, `W` i.i.d. circularly symmetric with variance `σ²` per entry.
pub fn apply_channel<R: Rng + ?Sized>(x: &CMat, h: &CMat, sigma: f64, rng: &mut R) -> Result<CMat> {
    if h.ncols() != x.nrows() {
        return Err(Error::Shape(format!("H is {:?} but X has {} rows", h.shape(), x.nrows())));
    }
    let mut y = h * x;
    if sigma > 0.0 {
        for v in y.iter_mut() {
            *v += linalg::complex_gaussian(rng, sigma * sigma);
        }
    }
    Ok(y)
}

fn singular_values(h: &CMat) -> (f64, f64) {
    let sv = h.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    (min, max)
}

/// Square surrogate of `H_e`: identity for `n_e = n_a`, `[H_e; βH̃_e]` with an
/// orthonormal row completion for `n_e < n_a`, and the `R̂` factor of
/// `H_e = Q [R̂; 0]` for `n_e > n_a`.
pub fn reduce_antenna_mismatch(h_e: &CMat, beta: f64) -> Result<CMat> {
    let (n_e, n_a) = h_e.shape();
    let (min, max) = singular_values(h_e);
    if !(min > 1e-12 * max) {
        return Err(Error::RankDeficient);
    }
    match n_e.cmp(&n_a) {
        std::cmp::Ordering::Equal => Ok(h_e.clone()),
        std::cmp::Ordering::Less => {
            if !(beta > 0.0) {
                return Err(Error::InvalidParameter(format!("completion scale must be positive, got {beta}")));
            }
            let tilde = linalg::orthonormal_row_completion(h_e).ok_or(Error::RankDeficient)?;
            let mut out = CMat::zeros(n_a, n_a);
            out.view_mut((0, 0), (n_e, n_a)).copy_from(h_e);
            out.view_mut((n_e, 0), (n_a - n_e, n_a)).copy_from(&(tilde * c(beta, 0.0)));
            Ok(out)
        }
        std::cmp::Ordering::Greater => Ok(h_e.clone().qr().r()),
    }
}

/// `Σ₀`, `Σ₃` and the pulled-back `Σ` for a square eavesdropper channel.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceBundle {
    pub sigma0: CMat,
    pub sigma3: CMat,
    pub sigma: CMat,
}

impl CovarianceBundle {
    /// `Σ ⊗ I_T` as a covariance on `C^{n_a T}` (row-major block layout).
    pub fn sigma_blocks(&self, t: usize) -> Result<CovarianceSpec> {
        CovarianceSpec::from_complex(&linalg::kron_identity(&self.sigma, t))
    }

    pub fn sigma3_blocks(&self, t: usize) -> Result<CovarianceSpec> {
        CovarianceSpec::from_complex(&linalg::kron_identity(&self.sigma3, t))
    }
}

/// `Σ₀ = σ_s² HH† + σ_e² I`, `Σ₃⁻¹ = σ_s⁻²(HH†)⁻¹ + σ_e⁻² I`,
/// `Σ⁻¹ = H†Σ₃⁻¹H = σ_s⁻² I + σ_e⁻² H†H`.
pub fn eve_covariances(h_e: &CMat, sigma_s: f64, sigma_e: f64) -> Result<CovarianceBundle> {
    if !h_e.is_square() {
        return Err(Error::Shape(format!("eavesdropper channel must be square, got {:?}", h_e.shape())));
    }
    let cond = linalg::condition_number(h_e);
    if !(cond <= SINGULAR_COND) {
        return Err(Error::SingularChannel(cond));
    }
    let n = h_e.nrows();
    let id = linalg::identity(n);
    let s2 = c(sigma_s * sigma_s, 0.0);
    let e2 = c(sigma_e * sigma_e, 0.0);
    let hh = h_e * h_e.adjoint();
    let sigma0 = linalg::hermitian_part(&(&hh * s2 + &id * e2));
    let hh_inv = hh.try_inverse().ok_or(Error::SingularChannel(cond))?;
    let sigma3_inv = hh_inv / s2 + &id / e2;
    let sigma3 = linalg::hermitian_part(&sigma3_inv.try_inverse().ok_or(Error::SingularChannel(cond))?);
    let sigma = eve_effective_covariance(h_e, sigma_s, sigma_e);
    Ok(CovarianceBundle { sigma0, sigma3, sigma })
}

/// `(σ_s⁻² I + σ_e⁻² H†H)⁻¹`, defined for any `n_e`.
pub fn eve_effective_covariance(h_e: &CMat, sigma_s: f64, sigma_e: f64) -> CMat {
    let n = h_e.ncols();
    let inv = linalg::identity(n) / c(sigma_s * sigma_s, 0.0) + h_e.adjoint() * h_e / c(sigma_e * sigma_e, 0.0);
    linalg::hermitian_part(&inv.try_inverse().expect("positive-definite"))
}

/// Which part of the eavesdropper set is quantized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    /// `|I + ρ_e H†H| = e^{C_e}`.
    Shell,
    /// `|I + ρ_e H†H| <= e^{C_e}`.
    Ball,
}

/// A finite set of covariances covering `Ω_e` to spectral-norm radius `δ`.
#[derive(Debug, Clone, Serialize)]
pub struct Covering {
    pub delta: f64,
    #[serde(skip)]
    pub centers: Vec<CMat>,
    pub size: usize,
    /// Largest distance from a validation probe to its nearest center.
    pub max_validated_gap: f64,
    pub validation_probes: usize,
    pub validated: bool,
}

impl Covering {
    /// Index of the nearest center and its spectral distance.
    pub fn nearest(&self, sigma: &CMat) -> (usize, f64) {
        self.centers
            .iter()
            .enumerate()
            .map(|(i, s)| (i, spectral_distance(sigma, s)))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }
}

/// `max |eig(A - B)|` for Hermitian `A`, `B`.
pub fn spectral_distance(a: &CMat, b: &CMat) -> f64 {
    linalg::hermitian_eigenvalues(&(a - b)).iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `f(δ) = 1 / |I - δΣ⁻¹|`.
pub fn perturbation_factor(sigma: &CMat, delta: f64) -> Result<f64> {
    let n = sigma.nrows();
    if !(linalg::hermitian_eigenvalues(sigma)[0] > delta) {
        return Err(Error::DeltaTooLarge(format!("Σ - δI is not positive-definite at δ = {delta}")));
    }
    let inv = sigma.clone().try_inverse().ok_or(Error::SingularChannel(f64::INFINITY))?;
    Ok(1.0 / (linalg::identity(n) - inv * c(delta, 0.0)).determinant().re)
}

/// A random point of `Ω_e = {σ_s² (I + ρ_e H†H)⁻¹}`.
pub fn sample_eve_covariance<R: Rng + ?Sized>(set: &CompoundSet, sigma_s: f64, region: Region, rng: &mut R) -> Result<CMat> {
    let cap = match region {
        Region::Shell => set.c_e,
        Region::Ball => set.c_e * rng.random::<f64>().powf(1.0 / set.n_a as f64),
    };
    let h = sample_on_shell(set.n_e, set.n_a, set.rho_e(), cap, rng)?;
    let id = linalg::identity(set.n_a);
    let m = &id + h.adjoint() * &h * c(set.rho_e(), 0.0);
    Ok(linalg::hermitian_part(&(m.try_inverse().expect("positive-definite") * c(sigma_s * sigma_s, 0.0))))
}

const NET_FRACTION: f64 = 0.75;

/// Builds a `δ`-covering of `Ω_e`. For `n_a = 1` on the ball the set is the
/// interval `[σ_s² e^{-C_e}, σ_s²]` and the covering is exact. Otherwise
/// centers come from greedy farthest-point selection over `probes` draws
/// at radius `NET_FRACTION·δ`, which leaves room for points between draws,
/// then rounds of fresh probes add any uncovered point until a round of
/// `validation` probes is fully covered (at most `rounds` rounds).
pub fn quantize_channel_space<R: Rng + ?Sized>(
    set: &CompoundSet,
    sigma_s: f64,
    delta: f64,
    region: Region,
    probes: usize,
    validation: usize,
    rng: &mut R,
) -> Result<Covering> {
    set.validate()?;
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let floor = sigma_s * sigma_s * (-set.c_e / set.n_a as f64).exp();
    let lambda_min_bound = sigma_s * sigma_s * (-set.c_e).exp();
    if set.n_a == 1 && region == Region::Ball {
        let (a, b) = (floor, sigma_s * sigma_s);
        if delta >= a {
            return Err(Error::DeltaTooLarge(format!("Σ̄ - δI fails at δ = {delta} >= {a}")));
        }
        let size = (((b - a) / (2.0 * delta)).ceil() as usize).max(1);
        let centers: Vec<CMat> = (0..size)
            .map(|i| CMat::from_element(1, 1, c((a + delta * (2 * i + 1) as f64).min(b), 0.0)))
            .collect();
        let mut cov = Covering { delta, size, centers, max_validated_gap: 0.0, validation_probes: 0, validated: true };
        let mut gap: f64 = 0.0;
        for _ in 0..validation {
            let s = sample_eve_covariance(set, sigma_s, region, rng)?;
            gap = gap.max(cov.nearest(&s).1);
        }
        cov.max_validated_gap = gap;
        cov.validation_probes = validation;
        cov.validated = gap <= delta;
        return Ok(cov);
    }
    if delta >= lambda_min_bound {
        return Err(Error::DeltaTooLarge(format!(
            "Σ̄ - δI may lose definiteness: δ = {delta} >= {lambda_min_bound:.4e}"
        )));
    }
    let pool: Vec<CMat> = (0..probes.max(1))
        .map(|_| sample_eve_covariance(set, sigma_s, region, rng))
        .collect::<Result<_>>()?;
    let mut centers = vec![pool[0].clone()];
    let mut dist: Vec<f64> = pool.iter().map(|s| spectral_distance(s, &centers[0])).collect();
    loop {
        let (idx, far) = dist.iter().copied().enumerate().fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        if far <= NET_FRACTION * delta {
            break;
        }
        centers.push(pool[idx].clone());
        let last = centers.last().expect("just pushed");
        for (d, s) in dist.iter_mut().zip(&pool) {
            *d = d.min(spectral_distance(s, last));
        }
    }
    let mut cov = Covering { delta, size: 0, centers, max_validated_gap: f64::INFINITY, validation_probes: 0, validated: false };
    for _ in 0..16 {
        let mut gap: f64 = 0.0;
        let mut uncovered = Vec::new();
        for _ in 0..validation {
            let s = sample_eve_covariance(set, sigma_s, region, rng)?;
            let d = cov.nearest(&s).1;
            gap = gap.max(d);
            if d > delta {
                uncovered.push(s);
            }
        }
        cov.max_validated_gap = gap;
        cov.validation_probes = validation;
        if uncovered.is_empty() {
            cov.validated = true;
            break;
        }
        for s in uncovered {
            if cov.nearest(&s).1 > delta {
                cov.centers.push(s);
            }
        }
    }
    for s in &cov.centers {
        if linalg::hermitian_eigenvalues(s)[0] <= delta {
            return Err(Error::DeltaTooLarge(format!("a center has eigenvalue below δ = {delta}")));
        }
    }
    cov.size = cov.centers.len();
    Ok(cov)
}

/// `Σ̄ - δI`.
pub fn shrink(center: &CMat, delta: f64) -> CMat {
    center - linalg::identity(center.nrows()) * C64::new(delta, 0.0)
}
