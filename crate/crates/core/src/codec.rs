//! Coset encoder with discrete Gaussian shaping and the MMSE-GDFE lattice
//! decoder.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::construction_a::NestedPair;
use crate::error::{Error, Result};
use crate::gaussian::{flatness_factor, DiscreteGaussianSampler, PeriodicGaussian};
use crate::lattice::{matrix_form, vectorize, ClosestPointSolver, Lattice};
use crate::linalg::{self, c, CMat, CVec, RVec};

/// Transmitter: `x ~ D_{Λ_e + φ(m), σ_s}` reshaped to `n_a x T`.
#[derive(Debug, Clone)]
pub struct Encoder {
    pair: Arc<NestedPair>,
    sigma_s: f64,
    power: f64,
    sampler: DiscreteGaussianSampler,
    epsilon: f64,
}

impl Encoder {
    pub fn new(pair: Arc<NestedPair>, sigma_s: f64, power: f64) -> Result<Self> {
        if !(sigma_s > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma_s must be positive, got {sigma_s}")));
        }
        if sigma_s * sigma_s > power * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "shaping power {} exceeds the power constraint {power}",
                sigma_s * sigma_s
            )));
        }
        // A dual sum too large to enumerate means the coarse lattice is far from flat.
        let epsilon = match flatness_factor(pair.lattice_e(), sigma_s) {
            Ok(eps) => eps.upper(),
            Err(Error::Truncation { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        let sampler = DiscreteGaussianSampler::new(pair.lattice_e(), sigma_s)?;
        Ok(Self { pair, sigma_s, power, sampler, epsilon })
    }

    pub fn pair(&self) -> &NestedPair {
        &self.pair
    }

    pub fn sigma_s(&self) -> f64 {
        self.sigma_s
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    /// `ε_{Λ_e}(σ_s)` (upper end of the certified interval; infinite when
    /// the dual sum cannot be enumerated).
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The transmitted vector `x ∈ Λ_e + φ(m)`.
    pub fn encode_vector<R: Rng + ?Sized>(&self, m: u64, rng: &mut R) -> Result<CVec> {
        let rep = self.pair.coset_encode(m)?;
        Ok(self.sampler.sample(&rep, rng)?.coords)
    }

    pub fn encode<R: Rng + ?Sized>(&self, m: u64, rng: &mut R) -> Result<CMat> {
        let x = self.encode_vector(m, rng)?;
        matrix_form(x.as_slice(), self.pair.n_a(), self.pair.t())
    }

    /// Empirical `tr(X†X) / (n_a T)` over `n` encodings of random messages.
    /// Fails when the mean exceeds `P` by more than three standard errors.
    pub fn power_guard<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<f64> {
        let dim = (self.pair.n_a() * self.pair.t()) as f64;
        let mut vals = Vec::with_capacity(n);
        for _ in 0..n {
            let m = rng.random_range(0..self.pair.message_count());
            vals.push(self.encode_vector(m, rng)?.norm_squared() / dim);
        }
        let k = vals.len().max(1) as f64;
        let mean = vals.iter().sum::<f64>() / k;
        let se = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0) / k).sqrt();
        if mean > self.power + 3.0 * se {
            return Err(Error::InvalidParameter(format!(
                "empirical power {mean:.4} exceeds the constraint {} beyond sampling error",
                self.power
            )));
        }
        Ok(mean)
    }
}

/// `R_b` (upper triangular, `R_b†R_b = H_b†H_b + ρ_b⁻¹ I`) and `F_b = R_b^{-†} H_b†`.
#[derive(Debug, Clone, PartialEq)]
pub struct MmseGdfe {
    pub f_b: CMat,
    pub r_b: CMat,
}

pub fn mmse_gdfe(h_b: &CMat, rho_b: f64) -> Result<MmseGdfe> {
    if !(rho_b > 0.0) {
        return Err(Error::InvalidParameter(format!("rho_b must be positive, got {rho_b}")));
    }
    let n = h_b.ncols();
    let gram = linalg::hermitian_part(&(h_b.adjoint() * h_b + linalg::identity(n) * c(1.0 / rho_b, 0.0)));
    let l = gram.cholesky().ok_or_else(|| Error::InvalidParameter("MMSE Gram matrix is not PD".into()))?.l();
    let r_b = l.adjoint();
    let l_inv = l.try_inverse().ok_or(Error::RankDeficient)?;
    let f_b = l_inv * h_b.adjoint();
    Ok(MmseGdfe { f_b, r_b })
}

/// Bob's receiver for a fixed channel realization.
#[derive(Debug, Clone)]
pub struct Decoder {
    pair: Arc<NestedPair>,
    filter: MmseGdfe,
    solver: ClosestPointSolver,
}

impl Decoder {
    pub fn new(pair: Arc<NestedPair>, h_b: &CMat, rho_b: f64) -> Result<Self> {
        if h_b.ncols() != pair.n_a() {
            return Err(Error::Shape(format!("H_b has {} columns, n_a = {}", h_b.ncols(), pair.n_a())));
        }
        let filter = mmse_gdfe(h_b, rho_b)?;
        let big_r = linalg::kron_identity(&filter.r_b, pair.t());
        let decoding = Lattice::from_real_basis(linalg::real_form(&big_r) * pair.lattice_b().real_basis())?;
        let solver = ClosestPointSolver::new(&decoding)?;
        Ok(Self { pair, filter, solver })
    }

    pub fn filter(&self) -> &MmseGdfe {
        &self.filter
    }

    /// `Ỹ = F_b Y_b`, closest point in `(R_b ⊗ I_T) Λ_b`, then `φ⁻¹` of the
    /// corresponding point of `Λ_b`.
    pub fn decode(&self, y_b: &CMat) -> Result<u64> {
        if y_b.nrows() != self.filter.f_b.ncols() || y_b.ncols() != self.pair.t() {
            return Err(Error::Shape(format!(
                "Y_b must be {} x {}, got {:?}",
                self.filter.f_b.ncols(),
                self.pair.t(),
                y_b.shape()
            )));
        }
        let y_tilde = vectorize(&(&self.filter.f_b * y_b));
        let point = self.solver.closest(&y_tilde)?;
        let z = point.coeffs.expect("solver returns coefficients");
        let zf = RVec::from_iterator(z.len(), z.iter().map(|&v| v as f64));
        let lambda = linalg::unembed(&(self.pair.lattice_b().real_basis() * zf));
        self.pair.coset_decode(&lambda)
    }
}

/// Outcome of [`subgaussian_check`].
#[derive(Debug, Clone, Serialize)]
pub struct SubgaussianReport {
    pub epsilon_prime: f64,
    pub pairs: usize,
    pub samples: usize,
    /// Largest empirical `E[e^{Re x†Au}]` over its bound.
    pub max_ratio: f64,
    /// Largest exact MGF over its bound (from periodic Gaussian sums).
    pub max_exact_ratio: f64,
    /// Pairs whose empirical MGF exceeds the bound by more than 3 SE.
    pub violations: usize,
}

/// `E[e^{Re x†v}]` for `x ~ D_{Λ+c,σ}`, exactly:
/// `e^{σ²||v||²/4} f_{σ,Λ}(c - σ²v/2) / f_{σ,Λ}(c)`.
fn exact_mgf(pg: &PeriodicGaussian, center: &RVec, v: &RVec, sigma: f64) -> Result<f64> {
    let s2 = sigma * sigma;
    let shifted = center - v * (s2 / 2.0);
    let num = pg.eval_real(&shifted, 1e-14)?.value;
    let den = pg.eval_real(center, 1e-14)?.value;
    Ok((s2 * v.norm_squared() / 4.0).exp() * num / den)
}

/// Monte-Carlo check of `E[e^{Re x†Au}] <= ((1+ε')/(1-ε')) e^{(σ_s²/4)||Au||²}`
/// for shaped codewords `x`. The first operator is the MMSE bias
/// `(F_bH_b - R_b) ⊗ I_T`; the others are random. `u` is scaled so the
/// bound's exponent lies in `[0.02, 0.2]`.
pub fn subgaussian_check<R: Rng + ?Sized>(
    encoder: &Encoder,
    h_b: &CMat,
    rho_b: f64,
    n_pairs: usize,
    n_samples: usize,
    rng: &mut R,
) -> Result<SubgaussianReport> {
    let eps = encoder.epsilon();
    if !(eps < 1.0) {
        return Err(Error::PreconditionViolated(format!("ε' = {eps} is not below 1")));
    }
    let pair = encoder.pair();
    let n = pair.n_a() * pair.t();
    let m = rng.random_range(0..pair.message_count());
    let center = linalg::embed(&pair.coset_encode(m)?);
    let xs: Vec<RVec> = (0..n_samples)
        .map(|_| encoder.encode_vector(m, rng).map(|x| linalg::embed(&x)))
        .collect::<Result<_>>()?;
    let pg = PeriodicGaussian::new(pair.lattice_e(), encoder.sigma_s())?;
    let filter = mmse_gdfe(h_b, rho_b)?;
    let bias = linalg::kron_identity(&(&filter.f_b * h_b - &filter.r_b), pair.t());
    let factor = (1.0 + eps) / (1.0 - eps);
    let s2 = encoder.sigma_s().powi(2);
    let mut report = SubgaussianReport {
        epsilon_prime: eps,
        pairs: n_pairs,
        samples: n_samples,
        max_ratio: 0.0,
        max_exact_ratio: 0.0,
        violations: 0,
    };
    for k in 0..n_pairs {
        let a = if k == 0 { bias.clone() } else { linalg::complex_gaussian_matrix(rng, n, n, 1.0) };
        let u = CVec::from_fn(n, |_, _| linalg::complex_gaussian(rng, 1.0));
        let au = &a * &u;
        let target: f64 = rng.random_range(0.02..0.2);
        let scale = if au.norm() > 0.0 { (4.0 * target / s2).sqrt() / au.norm() } else { 0.0 };
        let v = linalg::embed(&(au * c(scale, 0.0)));
        let bound = factor * (s2 * v.norm_squared() / 4.0).exp();
        let vals: Vec<f64> = xs.iter().map(|x| x.dot(&v).exp()).collect();
        let k_f = vals.len().max(1) as f64;
        let mean = vals.iter().sum::<f64>() / k_f;
        let se = (vals.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (k_f - 1.0).max(1.0) / k_f).sqrt();
        let exact = exact_mgf(&pg, &center, &v, encoder.sigma_s())?;
        report.max_ratio = report.max_ratio.max(mean / bound);
        report.max_exact_ratio = report.max_exact_ratio.max(exact / bound);
        if mean - 3.0 * se > bound {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// `ln E[e^{Re x†(t v)}]` estimated from shaped codewords for each `t`,
/// with a fixed random direction `v` of unit norm.
pub fn mgf_growth<R: Rng + ?Sized>(encoder: &Encoder, scales: &[f64], n_samples: usize, rng: &mut R) -> Result<Vec<f64>> {
    let pair = encoder.pair();
    let n = pair.n_a() * pair.t();
    let m = rng.random_range(0..pair.message_count());
    let xs: Vec<RVec> = (0..n_samples)
        .map(|_| encoder.encode_vector(m, rng).map(|x| linalg::embed(&x)))
        .collect::<Result<_>>()?;
    let dir = CVec::from_fn(n, |_, _| linalg::complex_gaussian(rng, 1.0));
    let v = linalg::embed(&(&dir / c(dir.norm(), 0.0)));
    Ok(scales
        .iter()
        .map(|&t| (xs.iter().map(|x| (t * x.dot(&v)).exp()).sum::<f64>() / xs.len() as f64).ln())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::apply_channel;
    use crate::construction_a::LinearCode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair(seed: u64, n_a: usize, t: usize, k_b: usize, k_e: usize) -> Arc<NestedPair> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Arc::new(NestedPair::sample(5, n_a, t, k_b, k_e, &mut rng).unwrap())
    }

    #[test]
    fn tiny_spread_encodes_zero_message_to_origin() {
        let enc = Encoder::new(pair(1, 2, 2, 2, 1), 0.3, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            assert!(enc.encode(0, &mut rng).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn codeword_lies_in_its_coset() {
        let p = pair(3, 2, 2, 3, 1);
        let enc = Encoder::new(p.clone(), 8.0, 64.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for m in 0..p.message_count() {
            let x = enc.encode(m, &mut rng).unwrap();
            let diff = vectorize(&x) - p.coset_encode(m).unwrap();
            assert!(p.lattice_e().integer_coefficients(&diff, 1e-9).is_some());
        }
    }

    #[test]
    fn shaped_power_matches_sigma_squared() {
        let p = pair(5, 2, 2, 2, 1);
        let sigma = 12.0;
        let enc = Encoder::new(p.clone(), sigma, sigma * sigma).unwrap();
        assert!(enc.epsilon() < 0.01);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let power = enc.power_guard(10_000, &mut rng).unwrap();
        assert!((power / (sigma * sigma) - 1.0).abs() < 0.02, "{power}");
    }

    #[test]
    fn shaping_above_power_is_rejected() {
        assert!(Encoder::new(pair(7, 1, 1, 1, 0), 2.0, 3.0).is_err());
    }

    #[test]
    fn mmse_identity_case() {
        let f = mmse_gdfe(&linalg::identity(2), 3.0).unwrap();
        let r = 2.0 / 3f64.sqrt();
        assert!((&f.r_b - linalg::identity(2) * c(r, 0.0)).norm() < 1e-12);
        assert!((&f.f_b - linalg::identity(2) * c(1.0 / r, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn mmse_effective_noise_is_white() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let h = linalg::complex_gaussian_matrix(&mut rng, 3, 2, 1.0);
            let (power, sigma_b) = (2.5, 0.4);
            let rho = power / (sigma_b * sigma_b);
            let f = mmse_gdfe(&h, rho).unwrap();
            let gram = f.r_b.adjoint() * &f.r_b - h.adjoint() * &h - linalg::identity(2) * c(1.0 / rho, 0.0);
            assert!(gram.norm() < 1e-10);
            assert!(f.r_b[(1, 0)].norm() == 0.0);
            let bias = &f.f_b * &h - &f.r_b;
            let cov = &bias * bias.adjoint() * c(power, 0.0) + &f.f_b * f.f_b.adjoint() * c(sigma_b * sigma_b, 0.0);
            assert!((cov - linalg::identity(2) * c(sigma_b * sigma_b, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn mmse_tends_to_zero_forcing() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = linalg::complex_gaussian_matrix(&mut rng, 2, 2, 1.0);
        let f = mmse_gdfe(&h, 1e12).unwrap();
        assert!((&f.f_b * &h - &f.r_b).norm() < 1e-9);
    }

    #[test]
    fn noiseless_round_trip_for_every_message() {
        let p = pair(10, 2, 2, 2, 0);
        let enc = Encoder::new(p.clone(), 6.0, 36.0).unwrap();
        let dec = Decoder::new(p.clone(), &linalg::identity(2), 1e9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in 0..p.message_count() {
            let x = enc.encode(m, &mut rng).unwrap();
            assert_eq!(dec.decode(&x).unwrap(), m);
        }
    }

    #[test]
    fn decoding_is_unitarily_equivariant() {
        let p = pair(12, 2, 2, 2, 1);
        let enc = Encoder::new(p.clone(), 6.0, 36.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = linalg::complex_gaussian_matrix(&mut rng, 2, 2, 1.0);
        let q = linalg::haar_unitary(&mut rng, 2);
        let rho = 36.0 / 0.5;
        let d1 = Decoder::new(p.clone(), &h, rho).unwrap();
        let d2 = Decoder::new(p.clone(), &(&q * &h), rho).unwrap();
        for _ in 0..200 {
            let m = rng.random_range(0..p.message_count());
            let x = enc.encode(m, &mut rng).unwrap();
            let y = apply_channel(&x, &h, 0.5f64.sqrt(), &mut rng).unwrap();
            assert_eq!(d1.decode(&y).unwrap(), d2.decode(&(&q * &y)).unwrap());
        }
    }

    #[test]
    fn decoder_agrees_with_exhaustive_search() {
        // n_a = T = 1: Λ_b ⊂ Z[i] is small enough to scan.
        let code_b = LinearCode::new(5, 2, vec![vec![1, 2]]).unwrap();
        let p = Arc::new(NestedPair::from_code(code_b, 0, 1, 1).unwrap());
        let (power, sigma_b) = (9.0, 0.9);
        let rho = power / (sigma_b * sigma_b);
        let enc = Encoder::new(p.clone(), 3.0, power).unwrap();
        let h = CMat::from_element(1, 1, c(0.6, 0.8) * 1.3);
        let dec = Decoder::new(p.clone(), &h, rho).unwrap();
        let f = mmse_gdfe(&h, rho).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mut errors = 0;
        for _ in 0..500 {
            let m = rng.random_range(0..p.message_count());
            let x = enc.encode(m, &mut rng).unwrap();
            let y = apply_channel(&x, &h, sigma_b, &mut rng).unwrap();
            let yt = (&f.f_b * &y)[(0, 0)];
            let r = f.r_b[(0, 0)];
            // All points of R_b Λ_b within a generous ball around ỹ.
            let center = yt / r;
            let rad = 6.0 * sigma_b / r.norm() + 3.0;
            let mut best = (f64::INFINITY, 0u64);
            for a in (center.re - rad).floor() as i64..=(center.re + rad).ceil() as i64 {
                for b in (center.im - rad).floor() as i64..=(center.im + rad).ceil() as i64 {
                    let pt = CVec::from_element(1, c(a as f64, b as f64));
                    if !p.lattice_b().contains(&pt) {
                        continue;
                    }
                    let d = (r * pt[0] - yt).norm_sqr();
                    if d < best.0 {
                        best = (d, p.coset_decode(&pt).unwrap());
                    }
                }
            }
            let got = dec.decode(&y).unwrap();
            assert_eq!(got, best.1);
            errors += usize::from(got != m);
        }
        assert!(errors > 0, "SNR too high for a meaningful comparison");
    }

    #[test]
    fn subgaussian_bound_holds_when_flat() {
        let p = pair(15, 1, 1, 1, 0);
        let enc = Encoder::new(p, 15.0, 225.0).unwrap();
        assert!(enc.epsilon() < 1e-6);
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let h = linalg::complex_gaussian_matrix(&mut rng, 1, 1, 1.0);
        let rep = subgaussian_check(&enc, &h, 10.0, 100, 50_000, &mut rng).unwrap();
        assert_eq!(rep.violations, 0, "{rep:?}");
        assert!(rep.max_exact_ratio <= 1.0 + 1e-9);
        assert!(rep.max_ratio <= 1.0 / (1.0 - 1e-3) + 0.02, "{rep:?}");
    }

    #[test]
    fn mgf_exponent_grows_quadratically() {
        let p = pair(17, 1, 1, 1, 0);
        let enc = Encoder::new(p, 15.0, 225.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let scales = [0.02, 0.03, 0.04, 0.05, 0.06];
        let logs = mgf_growth(&enc, &scales, 200_000, &mut rng).unwrap();
        let xs: Vec<f64> = scales.iter().map(|s: &f64| s.ln()).collect();
        let ys: Vec<f64> = logs.iter().map(|l| l.ln()).collect();
        let xm = xs.iter().sum::<f64>() / 5.0;
        let ym = ys.iter().sum::<f64>() / 5.0;
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum::<f64>()
            / xs.iter().map(|x| (x - xm).powi(2)).sum::<f64>();
        assert!((slope - 2.0).abs() < 0.05, "{slope}");
    }
}
