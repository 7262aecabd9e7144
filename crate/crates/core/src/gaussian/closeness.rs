//! Monte-Carlo check that a discrete Gaussian plus independent continuous
//! Gaussian noise has a density within `[1 - 4ε, 1 + 4ε]` of the continuous
//! Gaussian with the summed covariance.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use super::{flatness_factor, CovarianceSpec, DiscreteGaussianSampler, DiscreteGaussianSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, RMat, RVec};

const BATCHES: usize = 20;
const BOOTSTRAP: usize = 400;

#[derive(Debug, Clone, Serialize)]
pub struct ClosenessReport {
    /// Flatness factor at `Σ₃ = (Σ₁⁻¹ + Σ₂⁻¹)⁻¹`.
    pub epsilon: f64,
    pub samples: usize,
    pub grid_points: usize,
    /// `max_x |ĝ(x)/f₀(x) - 1|`.
    pub max_deviation: f64,
    /// Largest bootstrap standard error of the ratio over the grid.
    pub max_std_error: f64,
    /// Largest `|ratio - 1| - (4ε + 3 SE)` over the grid; `<= 0` on pass.
    pub worst_excess: f64,
    pub pass: bool,
}

struct Gaussian {
    inv: RMat,
    norm: f64,
}

impl Gaussian {
    fn new(cov: &CovarianceSpec) -> Self {
        let n = cov.complex_dim() as i32;
        Self { inv: cov.inverse().real_matrix().clone(), norm: 1.0 / (PI.powi(n) * cov.det()) }
    }

    fn density(&self, v: &RVec) -> f64 {
        self.norm * (-(v.transpose() * &self.inv * v)[(0, 0)]).exp()
    }
}

/// Draws `x₁ ~ D_{Λ+c,√Σ₁}` and estimates the density of `x₁ + x₂`,
/// `x₂ ~ N(0, Σ₂)`, by averaging `f_{Σ₂}(x - x₁)` over the draws. The grid
/// has `grid_per_dim` points per real coordinate spanning 1.5 standard
/// deviations of `Σ₀ = Σ₁ + Σ₂`.
pub fn sum_closeness_check<R: Rng + ?Sized>(
    spec: &DiscreteGaussianSpec,
    sigma2: &CovarianceSpec,
    n_samples: usize,
    grid_per_dim: usize,
    rng: &mut R,
) -> Result<ClosenessReport> {
    let lattice = &spec.lattice;
    let sigma1 = spec.spread.covariance(lattice.complex_dim())?;
    let sigma3 = sigma1.harmonic(sigma2)?;
    let eps = flatness_factor(lattice, sigma3)?;
    if eps.upper() > 0.5 {
        return Err(Error::PreconditionViolated(format!(
            "flatness factor {:.4} at the harmonic covariance exceeds 1/2",
            eps.upper()
        )));
    }
    let sigma0 = sigma1.add(sigma2)?;
    let f0 = Gaussian::new(&sigma0);
    let f2 = Gaussian::new(sigma2);

    let sampler = DiscreteGaussianSampler::new(lattice, sigma1)?;
    let per_batch = n_samples.div_ceil(BATCHES).max(1);
    let mut batches: Vec<HashMap<Vec<i64>, usize>> = Vec::with_capacity(BATCHES);
    let mut points: HashMap<Vec<i64>, RVec> = HashMap::new();
    for _ in 0..BATCHES {
        let mut counts = HashMap::new();
        for _ in 0..per_batch {
            let p = sampler.sample(&spec.center, rng)?;
            let key = p.coeffs.clone().expect("sampler returns coefficients");
            points.entry(key.clone()).or_insert_with(|| linalg::embed(&p.coords));
            *counts.entry(key).or_insert(0usize) += 1;
        }
        batches.push(counts);
    }

    let d = lattice.real_dim();
    let g = grid_per_dim.max(2);
    let half: Vec<f64> = (0..d).map(|i| 1.5 * (sigma0.real_matrix()[(i, i)] / 2.0).sqrt()).collect();
    let total = g.pow(d as u32);
    let mut max_dev: f64 = 0.0;
    let mut max_se: f64 = 0.0;
    let mut worst = f64::NEG_INFINITY;
    let mut x = RVec::zeros(d);
    let mut boot_idx = vec![0usize; BATCHES * BOOTSTRAP];
    for v in boot_idx.iter_mut() {
        *v = rng.random_range(0..BATCHES);
    }
    for idx in 0..total {
        let mut k = idx;
        for j in 0..d {
            x[j] = -half[j] + 2.0 * half[j] * (k % g) as f64 / (g - 1) as f64;
            k /= g;
        }
        let base = f0.density(&x);
        let kernel: HashMap<&Vec<i64>, f64> =
            points.iter().map(|(key, p)| (key, f2.density(&(&x - p)))).collect();
        let ratios: Vec<f64> = batches
            .iter()
            .map(|counts| {
                let s: f64 = counts.iter().map(|(key, &c)| c as f64 * kernel[key]).sum();
                s / per_batch as f64 / base
            })
            .collect();
        let mean = ratios.iter().sum::<f64>() / BATCHES as f64;
        let boots: Vec<f64> = boot_idx
            .chunks(BATCHES)
            .map(|ch| ch.iter().map(|&i| ratios[i]).sum::<f64>() / BATCHES as f64)
            .collect();
        let bm = boots.iter().sum::<f64>() / BOOTSTRAP as f64;
        let se = (boots.iter().map(|b| (b - bm).powi(2)).sum::<f64>() / (BOOTSTRAP - 1) as f64).sqrt();
        let dev = (mean - 1.0).abs();
        max_dev = max_dev.max(dev);
        max_se = max_se.max(se);
        worst = worst.max(dev - (4.0 * eps.upper() + 3.0 * se));
    }
    Ok(ClosenessReport {
        epsilon: eps.value,
        samples: per_batch * BATCHES,
        grid_points: total,
        max_deviation: max_dev,
        max_std_error: max_se,
        worst_excess: worst,
        pass: worst <= 0.0,
    })
}
