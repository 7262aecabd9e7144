//! Exact discrete Gaussian sampling on lattice cosets.
//!
//! The proposal is Klein's nearest-plane sampler on the whitened, LLL-reduced
//! basis. Its output density differs from the target by the product of
//! one-dimensional normalizers, which is corrected by rejection. After
//! `KLEIN_ATTEMPTS` rejections the draw falls back to sampling from the
//! enumerated point table. Every accepted draw follows the target, so the
//! mixture is exact up to double-precision truncation of negligible tails.

use std::f64::consts::PI;

use rand::Rng;

use super::{GaussLattice, Spread};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticePoint};
use crate::linalg::{self, CVec, RMat, RVec};

const KLEIN_ATTEMPTS: usize = 64;
/// Terms below `exp(-WINDOW_EXP)` are dropped from 1-D samplers.
const WINDOW_EXP: f64 = 45.0;
/// Relative mass neglected by the enumeration fallback, as a natural log.
const TABLE_LOG_TOL: f64 = -40.0;

/// `D_{Λ+c,√Σ}`.
#[derive(Debug, Clone)]
pub struct DiscreteGaussianSpec {
    pub lattice: Lattice,
    pub center: CVec,
    pub spread: Spread,
}

/// Preprocessed sampler for `D_{Λ+c,√Σ}` with a fixed lattice and spread;
/// the center is supplied per draw.
#[derive(Debug, Clone)]
pub struct DiscreteGaussianSampler {
    lattice: Lattice,
    /// Maps real points to π-units: weight is `exp(-π ||whiten · v||²)`.
    whiten: RMat,
    sums: GaussLattice,
    norm0: Vec<f64>,
}

/// One-dimensional `Σ_z exp(-a (z - c)²)` and a draw from it.
fn sample_1d<R: Rng + ?Sized>(rng: &mut R, a: f64, c: f64) -> (i64, f64) {
    let w = (WINDOW_EXP / a).sqrt() + 1.0;
    let lo = (c - w).floor() as i64;
    let hi = (c + w).ceil() as i64;
    let weight = |z: i64| (-a * (z as f64 - c).powi(2)).exp();
    let total: f64 = (lo..=hi).map(weight).sum();
    let mut u = rng.random::<f64>() * total;
    let mut pick = hi;
    for z in lo..=hi {
        u -= weight(z);
        if u < 0.0 {
            pick = z;
            break;
        }
    }
    (pick, total)
}

fn normalizer_1d(a: f64, c: f64) -> f64 {
    let w = (WINDOW_EXP / a).sqrt() + 1.0;
    let lo = (c - w).floor() as i64;
    let hi = (c + w).ceil() as i64;
    (lo..=hi).map(|z| (-a * (z as f64 - c).powi(2)).exp()).sum()
}

impl DiscreteGaussianSampler {
    pub fn new(lattice: &Lattice, spread: impl Into<Spread>) -> Result<Self> {
        let cov = spread.into().covariance(lattice.complex_dim())?;
        let b = lattice.real_basis();
        let gram_scale = (b.transpose() * b).diagonal().mean();
        if cov.min_eigenvalue() <= 1e-6 * gram_scale {
            return Err(Error::DegenerateSpread(format!(
                "smallest covariance eigenvalue {:.3e} against Gram scale {:.3e}",
                cov.min_eigenvalue(),
                gram_scale
            )));
        }
        let k = cov.inverse().cholesky_real();
        let whiten = k.transpose() / PI.sqrt();
        let sums = GaussLattice::new(&(&whiten * b))?.with_centered_bound()?;
        let r = sums.r();
        let norm0 = (0..r.ncols()).map(|i| normalizer_1d(PI * r[(i, i)].powi(2), 0.0)).collect();
        Ok(Self { lattice: lattice.clone(), whiten, sums, norm0 })
    }

    pub fn from_spec(spec: &DiscreteGaussianSpec) -> Result<Self> {
        Self::new(&spec.lattice, spec.spread.clone())
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// Draws `λ + c` with `λ ∈ Λ`. `coeffs` hold the integer coordinates of `λ`.
    pub fn sample<R: Rng + ?Sized>(&self, center: &CVec, rng: &mut R) -> Result<LatticePoint> {
        if center.len() != self.lattice.complex_dim() {
            return Err(Error::Shape(format!(
                "center has length {}, lattice dimension {}",
                center.len(),
                self.lattice.complex_dim()
            )));
        }
        let c = linalg::embed(center);
        // Enumeration form: weight exp(-π ||G z - target||²) with target = -whiten·c.
        let target = -(&self.whiten * &c);
        let coeffs = match self.klein(&target, rng) {
            Some(z) => z,
            None => self.from_table(&target, rng)?,
        };
        let z = RVec::from_iterator(coeffs.len(), coeffs.iter().map(|&v| v as f64));
        let coords = linalg::unembed(&(self.lattice.real_basis() * z + c));
        Ok(LatticePoint { coords, coeffs: Some(coeffs) })
    }

    fn klein<R: Rng + ?Sized>(&self, target: &RVec, rng: &mut R) -> Option<Vec<i64>> {
        let r = self.sums.r();
        let q = self.sums.rotate(target);
        let m = r.ncols();
        let mut z = vec![0i64; m];
        for _ in 0..KLEIN_ATTEMPTS {
            let mut ratio = 1.0;
            for k in (0..m).rev() {
                let mut acc = q[k];
                for j in (k + 1)..m {
                    acc -= r[(k, j)] * z[j] as f64;
                }
                let ck = acc / r[(k, k)];
                let (zk, nk) = sample_1d(rng, PI * r[(k, k)].powi(2), ck);
                z[k] = zk;
                ratio *= nk / self.norm0[k];
            }
            if rng.random::<f64>() < ratio {
                return Some(self.sums.original(&z));
            }
        }
        None
    }

    fn from_table<R: Rng + ?Sized>(&self, target: &RVec, rng: &mut R) -> Result<Vec<i64>> {
        let r = self.sums.r();
        let q = self.sums.rotate(target);
        let m = r.ncols();
        // Nearest-plane point gives a lower bound exp(-π d0²) on the coset mass.
        let mut z = vec![0i64; m];
        for k in (0..m).rev() {
            let mut acc = q[k];
            for j in (k + 1)..m {
                acc -= r[(k, j)] * z[j] as f64;
            }
            z[k] = (acc / r[(k, k)]).round() as i64;
        }
        let zf = RVec::from_iterator(m, z.iter().map(|&v| v as f64));
        let d0 = (r * zf - &q).norm_squared();
        let rho = self.sums.rho_upper().expect("centered bound");
        let log_target = TABLE_LOG_TOL - PI * d0 - (2.0 * rho).ln();
        let radius_sq = self.sums.tail_radius_sq(log_target).max(d0 * (1.0 + 1e-9));
        let mut table: Vec<(Vec<i64>, f64)> = Vec::new();
        let mut total = 0.0;
        self.sums
            .for_each_within(target, radius_sq, &mut |z, d| {
                let w = (-PI * d).exp();
                total += w;
                table.push((z.to_vec(), w));
            })
            .map_err(|nodes| Error::Truncation { lower: total, upper: f64::INFINITY, points: nodes })?;
        let mut u = rng.random::<f64>() * total;
        for (z, w) in &table {
            u -= w;
            if u < 0.0 {
                return Ok(self.sums.original(z));
            }
        }
        let last = &table.last().expect("nearest-plane point is inside the radius").0;
        Ok(self.sums.original(last))
    }
}

/// One draw from `D_{Λ+c,√Σ}`. Build a [`DiscreteGaussianSampler`] when
/// drawing repeatedly.
pub fn sample_discrete_gaussian<R: Rng + ?Sized>(spec: &DiscreteGaussianSpec, rng: &mut R) -> Result<LatticePoint> {
    DiscreteGaussianSampler::from_spec(spec)?.sample(&spec.center, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::CovarianceSpec;
    use crate::linalg::c;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use std::collections::HashMap;

    #[test]
    fn tiny_spread_concentrates_on_nearest_coset_point() {
        let z = Lattice::gaussian_integers(1);
        let s = DiscreteGaussianSampler::new(&z, 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let center = CVec::from_element(1, c(0.3, -0.2));
        for _ in 0..200 {
            let p = s.sample(&center, &mut rng).unwrap();
            assert_eq!(p.coeffs.unwrap(), vec![0, 0]);
        }
    }

    #[test]
    fn degenerate_spread_is_rejected() {
        let z = Lattice::gaussian_integers(1).scaled(100.0).unwrap();
        assert!(matches!(DiscreteGaussianSampler::new(&z, 0.005), Err(Error::DegenerateSpread(_))));
    }

    #[test]
    fn chi_square_on_gaussian_integers() {
        let z = Lattice::gaussian_integers(1);
        let s = DiscreteGaussianSampler::new(&z, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 200_000;
        let mut counts: HashMap<(i64, i64), usize> = HashMap::new();
        let center = CVec::zeros(1);
        for _ in 0..n {
            let p = s.sample(&center, &mut rng).unwrap().coeffs.unwrap();
            *counts.entry((p[0], p[1])).or_default() += 1;
        }
        let w = |a: i64, b: i64| (-((a * a + b * b) as f64)).exp();
        let total: f64 = (-30..=30).flat_map(|a| (-30..=30).map(move |b| w(a, b))).sum();
        let mut stat = 0.0;
        let mut cells = 0;
        let mut expected_rest = n as f64;
        let mut observed_rest = n as f64;
        for a in -4i64..=4 {
            for b in -4i64..=4 {
                if a * a + b * b > 16 {
                    continue;
                }
                let e = n as f64 * w(a, b) / total;
                let o = *counts.get(&(a, b)).unwrap_or(&0) as f64;
                expected_rest -= e;
                observed_rest -= o;
                if e >= 5.0 {
                    stat += (o - e).powi(2) / e;
                    cells += 1;
                } else {
                    expected_rest += e;
                    observed_rest += o;
                }
            }
        }
        if expected_rest >= 5.0 {
            stat += (observed_rest - expected_rest).powi(2) / expected_rest;
            cells += 1;
        }
        let crit = ChiSquared::new((cells - 1) as f64).unwrap().inverse_cdf(0.99);
        assert!(stat < crit, "chi2 {stat} >= {crit} with {cells} cells");
    }

    #[test]
    fn correlated_marginals_match_moments() {
        let z2 = Lattice::gaussian_integers(1);
        let cov = CovarianceSpec::from_real_embedding(RMat::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0])).unwrap();
        let s = DiscreteGaussianSampler::new(&z2, cov).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let (mut s0, mut s1) = (0.0, 0.0);
        for _ in 0..n {
            let p = s.sample(&CVec::zeros(1), &mut rng).unwrap().coeffs.unwrap();
            s0 += (p[0] * p[0]) as f64;
            s1 += (p[1] * p[1]) as f64;
        }
        let moment = |var: f64| {
            let (num, den) = (-60i64..=60).fold((0.0, 0.0), |(n, d), k| {
                let w = (-(k * k) as f64 / var).exp();
                (n + (k * k) as f64 * w, d + w)
            });
            (num / den).sqrt()
        };
        let sd0 = (s0 / n as f64).sqrt();
        let sd1 = (s1 / n as f64).sqrt();
        assert!((sd0 / moment(4.0) - 1.0).abs() < 0.01, "{sd0} vs {}", moment(4.0));
        assert!((sd1 / moment(1.0) - 1.0).abs() < 0.01, "{sd1} vs {}", moment(1.0));
    }

    #[test]
    fn table_fallback_matches_exact_weights_on_shifted_coset() {
        // Narrow spread on a skewed lattice: Klein rejects often, so the
        // fallback path carries much of the mass.
        let lat = Lattice::from_real_basis(RMat::from_row_slice(2, 2, &[1.0, 0.4, 0.0, 0.9])).unwrap();
        let s = DiscreteGaussianSampler::new(&lat, 0.45).unwrap();
        let center = CVec::from_element(1, c(0.5, 0.45));
        let target = -(&s.whiten * linalg::embed(&center));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 40_000;
        let mut counts: HashMap<Vec<i64>, usize> = HashMap::new();
        for _ in 0..n {
            let z = s.from_table(&target, &mut rng).unwrap();
            *counts.entry(z).or_default() += 1;
        }
        let weight = |z: &[i64]| {
            let v = lat.real_basis() * RVec::from_vec(vec![z[0] as f64, z[1] as f64]) + linalg::embed(&center);
            (-v.norm_squared() / 0.45f64.powi(2)).exp()
        };
        let total: f64 = (-20i64..=20).flat_map(|a| (-20i64..=20).map(move |b| (a, b))).map(|(a, b)| weight(&[a, b])).sum();
        for (z, &o) in &counts {
            let e = n as f64 * weight(z) / total;
            if e > 200.0 {
                assert!((o as f64 - e).abs() < 5.0 * e.sqrt(), "{z:?}: {o} vs {e}");
            }
        }
    }
}
