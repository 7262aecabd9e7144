//! Secrecy-side evaluators: leakage bound, VNR conditions, achievable rates,
//! algebraic (EU) reduction, variational-distance proxy and the
//! simultaneous-goodness ensemble experiment.

use std::f64::consts::{E, PI};

use rand::Rng;
use serde::Serialize;

use crate::channel::{self, ChannelState, CompoundSet};
use crate::codec::Encoder;
use crate::construction_a::NestedPair;
use crate::error::{Error, Result};
use crate::gaussian::{flatness_factor, CovarianceSpec, GaussLattice};
use crate::lattice::{ClosestPointSolver, Lattice};
use crate::linalg::{self, c, CMat, CVec, RVec, MEMBERSHIP_TOL};

/// Relative width of the band around a VNR threshold inside which the VNR
/// and volume formulations may round to different verdicts.
pub const BOUNDARY_TOL: f64 = 1e-12;
/// Completion weight used when the eavesdropper has fewer antennas.
pub const MISMATCH_BETA: f64 = 1e-3;
/// `3 + 2√2`, the totally positive fundamental unit of `Z[√2]`.
pub const SQRT2_UNIT: f64 = 3.0 + 2.0 * std::f64::consts::SQRT_2;

/// `8 n_e T ε R - 8ε ln(8ε)`; zero at `ε = 0`, infinite once `8ε >= 1`.
/// Monotone in every argument while `8ε <= 1/e`.
pub fn leakage_bound(eps: f64, rate: f64, n_e: usize, t: usize) -> f64 {
    if eps <= 0.0 {
        return 0.0;
    }
    let e8 = 8.0 * eps;
    if e8 >= 1.0 {
        return f64::INFINITY;
    }
    e8 * n_e as f64 * t as f64 * rate - e8 * e8.ln()
}

/// `(C_b - C_e - n_a)^+`, or `(C_b - C_e - n_a - 2 n_a ln α)^+` with `α`.
pub fn achievable_rate(c_b: f64, c_e: f64, n_a: usize, alpha: Option<f64>) -> f64 {
    let n = n_a as f64;
    let loss = alpha.map_or(0.0, |a| 2.0 * n * a.ln());
    (c_b - c_e - n - loss).max(0.0)
}

/// Single-antenna condition `(1 + ρ_b)/(1 + ρ_e) > e` under which a positive
/// rate survives the one-nat gap.
pub fn snr_condition(rho_b: f64, rho_e: f64) -> bool {
    (1.0 + rho_b) / (1.0 + rho_e) > E
}

/// A VNR condition evaluated in both of its equivalent forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VnrCheck {
    pub gamma: f64,
    pub threshold: f64,
    /// Positive when the condition holds: `π - γ` for secrecy, `γ - πe` for reliability.
    pub margin: f64,
    /// `V(Λ)^{1/(n_a T)}`.
    pub volume_per_dim: f64,
    /// `πσ_s² e^{-C_e/n_a}` or `πeσ_s² e^{-C_b/n_a}`.
    pub volume_threshold: f64,
    pub pass_vnr: bool,
    pub pass_volume: bool,
    /// Verdicts agree, or both sit within `BOUNDARY_TOL` of the threshold.
    pub agree: bool,
    pub pass: bool,
}

fn block_dims(lattice: &Lattice, n_a: usize) -> Result<usize> {
    let n = lattice.complex_dim();
    if n_a == 0 || n % n_a != 0 {
        return Err(Error::Shape(format!("lattice dimension {n} is not a multiple of n_a = {n_a}")));
    }
    Ok(n / n_a)
}

fn verdicts(gamma: f64, threshold: f64, vol: f64, vol_thr: f64, below: bool) -> (bool, bool, bool) {
    let (pv, pw) = if below { (gamma < threshold, vol < vol_thr) } else { (gamma > threshold, vol > vol_thr) };
    let near = ((gamma - threshold) / threshold).abs() <= BOUNDARY_TOL
        || ((vol - vol_thr) / vol_thr).abs() <= BOUNDARY_TOL;
    (pv, pw, pv == pw || near)
}

/// Secrecy condition `γ_{H_eΛ_e}(√Σ₃) < π` and its volume form
/// `V(Λ_e)^{1/(n_aT)} < πσ_s² e^{-C_e/n_a}` with `C_e = ln|I + (σ_s²/σ_e²) H_e†H_e|`.
/// `h_e` must be square (see [`channel::reduce_antenna_mismatch`]).
pub fn check_secrecy(lattice_e: &Lattice, h_e: &CMat, sigma_s: f64, sigma_e: f64) -> Result<VnrCheck> {
    let n_a = h_e.ncols();
    let t = block_dims(lattice_e, n_a)?;
    let bundle = channel::eve_covariances(h_e, sigma_s, sigma_e)?;
    let image = lattice_e.transform(&linalg::kron_identity(h_e, t))?;
    let gamma = crate::gaussian::vnr(&image, bundle.sigma3_blocks(t)?)?;
    let c_e = channel::log_capacity(h_e, (sigma_s / sigma_e).powi(2));
    let vol = lattice_e.volume().powf(1.0 / (n_a * t) as f64);
    let vol_thr = PI * sigma_s * sigma_s * (-c_e / n_a as f64).exp();
    let (pass_vnr, pass_volume, agree) = verdicts(gamma, PI, vol, vol_thr, true);
    Ok(VnrCheck {
        gamma,
        threshold: PI,
        margin: PI - gamma,
        volume_per_dim: vol,
        volume_threshold: vol_thr,
        pass_vnr,
        pass_volume,
        agree,
        pass: pass_vnr,
    })
}

/// Reliability condition `γ_{R_bΛ_b}(σ_b) > πe` (strict) and its volume
/// form `V(Λ_b)^{1/(n_aT)} > πeP e^{-C_b/n_a}` with `P = ρ_bσ_b²`.
pub fn check_reliability(lattice_b: &Lattice, h_b: &CMat, rho_b: f64, sigma_b: f64) -> Result<VnrCheck> {
    let n_a = h_b.ncols();
    let t = block_dims(lattice_b, n_a)?;
    let filter = crate::codec::mmse_gdfe(h_b, rho_b)?;
    let image = lattice_b.transform(&linalg::kron_identity(&filter.r_b, t))?;
    let gamma = crate::gaussian::vnr(&image, sigma_b)?;
    let c_b = channel::log_capacity(h_b, rho_b);
    let power = rho_b * sigma_b * sigma_b;
    let vol = lattice_b.volume().powf(1.0 / (n_a * t) as f64);
    let vol_thr = PI * E * power * (-c_b / n_a as f64).exp();
    let threshold = PI * E;
    let (pass_vnr, pass_volume, agree) = verdicts(gamma, threshold, vol, vol_thr, false);
    Ok(VnrCheck {
        gamma,
        threshold,
        margin: gamma - threshold,
        volume_per_dim: vol,
        volume_threshold: vol_thr,
        pass_vnr,
        pass_volume,
        agree,
        pass: pass_vnr,
    })
}

/// Per-configuration secrecy summary.
#[derive(Debug, Clone, Serialize)]
pub struct SecurityReport {
    /// `ε_{Λ_e}(√Σ)` for the realized eavesdropper channel.
    pub epsilon: f64,
    pub epsilon_tail: f64,
    pub leakage_bound: f64,
    pub secrecy: VnrCheck,
    pub reliability: VnrCheck,
    pub rate: f64,
    pub rate_bound: f64,
}

pub fn security_report(
    pair: &NestedPair,
    set: &CompoundSet,
    state: &ChannelState,
    sigma_s: f64,
    alpha: Option<f64>,
) -> Result<SecurityReport> {
    let t = pair.t();
    let h_e = channel::reduce_antenna_mismatch(&state.h_e, MISMATCH_BETA)?;
    let bundle = channel::eve_covariances(&h_e, sigma_s, set.sigma_e)?;
    let eps = flatness_factor(pair.lattice_e(), bundle.sigma_blocks(t)?)?;
    let rate = pair.rate();
    Ok(SecurityReport {
        epsilon: eps.value,
        epsilon_tail: eps.tail_bound,
        leakage_bound: leakage_bound(eps.upper(), rate, set.n_e, t),
        secrecy: check_secrecy(pair.lattice_e(), &h_e, sigma_s, set.sigma_e)?,
        reliability: check_reliability(pair.lattice_b(), &state.h_b, set.rho_b(), set.sigma_b)?,
        rate,
        rate_bound: achievable_rate(set.c_b, set.c_e, set.n_a, alpha),
    })
}

/// `A = EU` with `|det E| = |det U| = 1`, `UΛ = Λ`, and `α = ||E⁻¹||_F`.
#[derive(Debug, Clone, PartialEq)]
pub struct EuDecomposition {
    pub e: CMat,
    pub u: CMat,
    pub alpha_observed: f64,
}

/// Checks `(I_T ⊗ U)Λ = Λ` through basis membership in both directions.
/// Returns the first basis vector whose image leaves the lattice.
fn stabilizes(u: &CMat, lattice: &Lattice) -> Result<Option<CVec>> {
    let n_a = u.nrows();
    let t = block_dims(lattice, n_a)?;
    let big = linalg::kron_identity(u, t);
    let inv = big.clone().try_inverse().ok_or(Error::RankDeficient)?;
    for col in lattice.real_basis().column_iter() {
        let v = linalg::unembed(&col.into_owned());
        for m in [&big, &inv] {
            let w = m * &v;
            if lattice.integer_coefficients(&w, MEMBERSHIP_TOL).is_none() {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

/// Verifies a supplied decomposition of `a` against `lattice`.
pub fn verify_eu(a: &CMat, e: &CMat, u: &CMat, lattice: &Lattice) -> Result<EuDecomposition> {
    let n = a.nrows();
    if !a.is_square() || e.shape() != (n, n) || u.shape() != (n, n) {
        return Err(Error::Shape("A, E and U must be square of the same size".into()));
    }
    let scale = a.norm().max(1.0);
    if (e * u - a).norm() > 1e-9 * scale {
        return Err(Error::PreconditionViolated("E U does not reproduce A".into()));
    }
    for (name, m) in [("A", a), ("E", e), ("U", u)] {
        let d = m.determinant().norm();
        if (d - 1.0).abs() > 1e-9 {
            return Err(Error::PreconditionViolated(format!("|det {name}| = {d}, expected 1")));
        }
    }
    if let Some(w) = stabilizes(u, lattice)? {
        return Err(Error::PreconditionViolated(format!(
            "U does not stabilize the lattice: image {} of a basis vector is not a lattice point",
            w.iter().map(|z| crate::lattice::io::format_complex(*z)).collect::<Vec<_>>().join(" ")
        )));
    }
    let e_inv = e.clone().try_inverse().ok_or(Error::RankDeficient)?;
    Ok(EuDecomposition { e: e.clone(), u: u.clone(), alpha_observed: linalg::frobenius_norm(&e_inv) })
}

/// Decomposes a unit-determinant `A`. Supported: `n_a = 1` (`E = A`,
/// `U = 1`), and positive diagonal `diag(u, 1/u)` when the lattice is
/// stable under `diag(ϵ, 1/ϵ)` for the supplied unit `ϵ > 1`; there
/// `U = diag(ϵ^k, ϵ^-k)` with `k = round(ln u / ln ϵ)`, so that
/// `||E⁻¹||_F <= √(ϵ + 1/ϵ)`.
pub fn eu_decompose(a: &CMat, lattice: &Lattice, unit: Option<f64>) -> Result<EuDecomposition> {
    let n = a.nrows();
    if n == 1 {
        return verify_eu(a, a, &linalg::identity(1), lattice);
    }
    let diagonal_positive = n == 2
        && a[(0, 1)].norm() == 0.0
        && a[(1, 0)].norm() == 0.0
        && a[(0, 0)].im == 0.0
        && a[(1, 1)].im == 0.0
        && a[(0, 0)].re > 0.0;
    match unit {
        Some(eps) if diagonal_positive && eps > 1.0 => {
            let k = (a[(0, 0)].re.ln() / eps.ln()).round() as i32;
            let uk = eps.powi(k);
            let u = CMat::from_diagonal(&CVec::from_vec(vec![c(uk, 0.0), c(1.0 / uk, 0.0)]));
            let e = CMat::from_diagonal(&CVec::from_vec(vec![a[(0, 0)] / uk, a[(1, 1)] * uk]));
            verify_eu(a, &e, &u, lattice)
        }
        _ => Err(Error::UnsupportedShape(
            "EU decomposition needs n_a = 1 or a positive diagonal matrix with a lattice unit".into(),
        )),
    }
}

/// `{(x, σ(x)) : x ∈ Z[√2][i]}` scaled by `scale`, a lattice in `C²` stable
/// under `diag(ϵ, 1/ϵ)` for every totally positive unit `ϵ` of `Z[√2]`.
pub fn sqrt2_unit_lattice(scale: f64) -> Result<Lattice> {
    let r = std::f64::consts::SQRT_2;
    let (a, b) = (scale, scale * r);
    Lattice::new(CMat::from_row_slice(
        2,
        4,
        &[c(a, 0.0), c(b, 0.0), c(0.0, a), c(0.0, b), c(a, 0.0), c(-b, 0.0), c(0.0, a), c(0.0, -b)],
    ))
}

/// Outcome of [`algebraic_flatness_bound_check`].
#[derive(Debug, Clone, Serialize)]
pub struct AlgebraicBoundReport {
    /// `ε_Λ(√(I_T ⊗ A))`.
    pub lhs: f64,
    /// `ε_Λ(|A|^{1/(2n_a)} / α)`.
    pub rhs: f64,
    pub slack: f64,
    pub alpha_observed: f64,
    pub holds: bool,
    pub vectors_checked: usize,
    /// Sampled dual vectors with `||(I ⊗ E)λ|| < ||λ|| / ||E⁻¹||_F`.
    pub vector_violations: usize,
}

/// Checks `ε_Λ(√(I_T ⊗ A)) <= ε_Λ(|A|^{1/(2n_a)}/α)` where `decomposition`
/// factors `√A / |A|^{1/(2n_a)}` with `U` stabilizing `Λ*`. Also checks
/// the norm inequality on `n_vectors` random dual points.
pub fn algebraic_flatness_bound_check<R: Rng + ?Sized>(
    lattice: &Lattice,
    a: &CMat,
    decomposition: &EuDecomposition,
    n_vectors: usize,
    rng: &mut R,
) -> Result<AlgebraicBoundReport> {
    let n_a = a.nrows();
    let t = block_dims(lattice, n_a)?;
    if !linalg::is_hermitian(a, 1e-12) {
        return Err(Error::InvalidParameter("A must be Hermitian".into()));
    }
    let det = linalg::det_abs(a);
    let norm_root = det.powf(1.0 / (2 * n_a) as f64);
    let target = linalg::hermitian_sqrt(a) / c(norm_root, 0.0);
    let dual = lattice.dual();
    let checked = verify_eu(&target, &decomposition.e, &decomposition.u, &dual)?;
    let alpha = checked.alpha_observed;

    let lhs = flatness_factor(lattice, CovarianceSpec::from_complex(&linalg::kron_identity(a, t))?)?;
    let rhs = flatness_factor(lattice, norm_root / alpha)?;

    let big_e = linalg::kron_identity(&decomposition.e, t);
    let m = dual.real_dim();
    let mut violations = 0;
    for _ in 0..n_vectors {
        let z: Vec<i64> = (0..m).map(|_| rng.random_range(-3..=3)).collect();
        let lam = dual.point(&z)?.coords;
        if (&big_e * &lam).norm() < lam.norm() / alpha * (1.0 - 1e-12) {
            violations += 1;
        }
    }
    let slack = rhs.upper() - lhs.value;
    Ok(AlgebraicBoundReport {
        lhs: lhs.value,
        rhs: rhs.upper(),
        slack,
        alpha_observed: alpha,
        holds: lhs.value <= rhs.upper() + lhs.tail_bound,
        vectors_checked: n_vectors,
        vector_violations: violations,
    })
}

/// Outcome of [`variational_distance_proxy`].
#[derive(Debug, Clone, Serialize)]
pub struct DistanceEstimate {
    /// Estimate of `∫ |p(y|m') - p(y|m'')| dy`.
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `ε_{Λ_e}(√Σ)` for the eavesdropper channel.
    pub epsilon: f64,
    /// The analytic bound `8ε`.
    pub bound: f64,
    pub samples: usize,
}

/// Support of `D_{Λ+c,σ}` down to relative weight `e^{-40}`, normalized.
fn coset_table(lattice: &Lattice, center: &CVec, sigma: f64) -> Result<Vec<(CVec, f64)>> {
    let scale = 1.0 / (sigma * PI.sqrt());
    let sums = GaussLattice::new(&(lattice.real_basis() * scale))?;
    let c_real = linalg::embed(center);
    let nearest = ClosestPointSolver::new(lattice)?.closest(&(-center))?;
    let d0 = (linalg::embed(&nearest.coords) + &c_real).norm_squared() * scale * scale;
    let target = -(&c_real * scale);
    let mut points = Vec::new();
    sums.for_each_within(&target, d0 + 40.0 / PI, &mut |z, d| {
        let zo = sums.original(z);
        let zf = RVec::from_iterator(zo.len(), zo.iter().map(|&v| v as f64));
        let x = linalg::unembed(&(lattice.real_basis() * zf + &c_real));
        points.push((x, -PI * (d - d0)));
    })
    .map_err(|nodes| Error::Truncation { lower: 0.0, upper: f64::INFINITY, points: nodes })?;
    let total: f64 = points.iter().map(|(_, lw)| lw.exp()).sum();
    Ok(points.into_iter().map(|(x, lw)| (x, lw.exp() / total)).collect())
}

/// `ln p(y|m)` for the mixture `Σ_x w(x) CN(y; Hx, σ_e² I)`.
fn log_mixture(y: &CVec, table: &[(CVec, CVec, f64)], sigma_e: f64) -> f64 {
    let s2 = sigma_e * sigma_e;
    let n = y.len() as i32;
    let terms: Vec<f64> = table.iter().map(|(_, hx, w)| w.ln() - (y - hx).norm_squared() / s2).collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln() - (PI * s2).ln() * n as f64
}

/// Monte-Carlo estimate of the variational distance between Eve's output
/// distributions for two messages, using the exact lattice-mixture
/// densities. Samples come from the equal mixture `q` of both outputs and
/// `V = 2 E_q[|p' - p''| / (p' + p'')]`; a percentile bootstrap gives a 95%
/// interval. Restricted to `n_a T <= 2`.
pub fn variational_distance_proxy<R: Rng + ?Sized>(
    encoder: &Encoder,
    h_e: &CMat,
    sigma_e: f64,
    m1: u64,
    m2: u64,
    n_samples: usize,
    rng: &mut R,
) -> Result<DistanceEstimate> {
    let pair = encoder.pair();
    let t = pair.t();
    let n = pair.n_a() * t;
    if n > 2 {
        return Err(Error::UnsupportedShape(format!("density evaluation needs n_a T <= 2, got {n}")));
    }
    if h_e.ncols() != pair.n_a() {
        return Err(Error::Shape(format!("H_e must have {} columns", pair.n_a())));
    }
    let h_sq = channel::reduce_antenna_mismatch(h_e, MISMATCH_BETA)?;
    let bundle = channel::eve_covariances(&h_sq, encoder.sigma_s(), sigma_e)?;
    let eps = flatness_factor(pair.lattice_e(), bundle.sigma_blocks(t)?)?.upper();

    let big_h = linalg::kron_identity(h_e, t);
    let table = |m: u64| -> Result<Vec<(CVec, CVec, f64)>> {
        let rep = pair.coset_encode(m)?;
        Ok(coset_table(pair.lattice_e(), &rep, encoder.sigma_s())?
            .into_iter()
            .map(|(x, w)| {
                let hx = &big_h * &x;
                (x, hx, w)
            })
            .collect())
    };
    let t1 = table(m1)?;
    let t2 = table(m2)?;
    let mut vals = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let m = if rng.random::<bool>() { m1 } else { m2 };
        let x = encoder.encode_vector(m, rng)?;
        let y = &big_h * x + CVec::from_fn(big_h.nrows(), |_, _| linalg::complex_gaussian(rng, sigma_e * sigma_e));
        let l1 = log_mixture(&y, &t1, sigma_e);
        let l2 = log_mixture(&y, &t2, sigma_e);
        // |p1 - p2| / (p1 + p2) = |tanh((l1 - l2)/2)|
        vals.push(2.0 * ((l1 - l2) / 2.0).tanh().abs());
    }
    let k = vals.len().max(1);
    let estimate = vals.iter().sum::<f64>() / k as f64;
    let mut boots: Vec<f64> = (0..400)
        .map(|_| (0..k).map(|_| vals[rng.random_range(0..k)]).sum::<f64>() / k as f64)
        .collect();
    boots.sort_by(f64::total_cmp);
    Ok(DistanceEstimate {
        estimate,
        ci_low: boots[10],
        ci_high: boots[389],
        epsilon: eps,
        bound: 8.0 * eps,
        samples: vals.len(),
    })
}

/// Parameters for [`ensemble_concentration`]. Bob decodes in `(R_b ⊗ I_T)Λ_b`
/// under `CN(0, σ_b² I)` noise; Eve's covariance is `Σ ⊗ I_T`.
#[derive(Debug, Clone)]
pub struct EnsembleParams {
    pub p: u64,
    pub n_a: usize,
    pub t: usize,
    pub k_b: usize,
    pub k_e: usize,
    pub n_codes: usize,
    pub r_b: CMat,
    pub sigma_b: f64,
    pub eve_sigma: CMat,
    pub error_trials: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleReport {
    pub t: usize,
    pub p_err: Vec<f64>,
    pub epsilon: Vec<f64>,
    /// `max{P_err, ε}` per code pair.
    pub max_metric: Vec<f64>,
    pub mean_p_err: f64,
    pub mean_epsilon: f64,
    pub mean_max: f64,
    pub median_max: f64,
    /// `mean(max) <= mean(P_err) + mean(ε)`.
    pub sum_bound_holds: bool,
    /// Fraction of code pairs with `max > 10 · mean(max)`; Markov gives `<= 0.1`.
    pub fraction_above_10x_mean: f64,
}

/// Draws `n_codes` nested pairs and records Bob's lattice decoding error
/// probability and Eve's flatness factor for each.
pub fn ensemble_concentration<R: Rng + ?Sized>(params: &EnsembleParams, rng: &mut R) -> Result<EnsembleReport> {
    let big_r = linalg::kron_identity(&params.r_b, params.t);
    let eve = CovarianceSpec::from_complex(&linalg::kron_identity(&params.eve_sigma, params.t))?;
    let mut p_err = Vec::with_capacity(params.n_codes);
    let mut epsilon = Vec::with_capacity(params.n_codes);
    for _ in 0..params.n_codes {
        let pair = NestedPair::sample(params.p, params.n_a, params.t, params.k_b, params.k_e, rng)?;
        let decoding = pair.lattice_b().transform(&big_r)?;
        let solver = ClosestPointSolver::new(&decoding)?;
        let n = decoding.complex_dim();
        let mut errors = 0usize;
        for _ in 0..params.error_trials {
            let w = CVec::from_fn(n, |_, _| linalg::complex_gaussian(rng, params.sigma_b * params.sigma_b));
            let (z, _) = solver.closest_real(&linalg::embed(&w))?;
            errors += usize::from(z.iter().any(|&v| v != 0));
        }
        p_err.push(errors as f64 / params.error_trials.max(1) as f64);
        epsilon.push(flatness_factor(pair.lattice_e(), eve.clone())?.upper());
    }
    let max_metric: Vec<f64> = p_err.iter().zip(&epsilon).map(|(a, b)| a.max(*b)).collect();
    let k = max_metric.len().max(1) as f64;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / k;
    let mean_max = mean(&max_metric);
    let mean_p_err = mean(&p_err);
    let mean_epsilon = mean(&epsilon);
    let mut sorted = max_metric.clone();
    sorted.sort_by(f64::total_cmp);
    let median_max = match sorted.len() {
        0 => 0.0,
        l if l % 2 == 1 => sorted[l / 2],
        l => 0.5 * (sorted[l / 2 - 1] + sorted[l / 2]),
    };
    let fraction = max_metric.iter().filter(|&&v| v > 10.0 * mean_max).count() as f64 / k;
    Ok(EnsembleReport {
        t: params.t,
        p_err,
        epsilon,
        max_metric,
        mean_p_err,
        mean_epsilon,
        mean_max,
        median_max,
        sum_bound_holds: mean_max <= mean_p_err + mean_epsilon + 1e-15,
        fraction_above_10x_mean: fraction,
    })
}

/// Least-squares fit of `y ≈ a e^{-c x}` over points with `y > 0`; returns `(a, c)`.
pub fn fit_exponential_decay(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(_, y)| *y > 0.0).map(|&(x, y)| (x, y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - xm).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum::<f64>() / sxx;
    Some(((ym - slope * xm).exp(), -slope))
}
