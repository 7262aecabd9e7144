//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use wiretap_core::channel::{self, quantize_channel_space, CompoundSet, Region};
use wiretap_core::codec::mmse_gdfe;
use wiretap_core::construction_a::{lift_code, LinearCode, NestedPair};
use wiretap_core::experiment::{self, ExperimentConfig};
use wiretap_core::gaussian::{
    flatness_factor, primal_flatness, sum_closeness_check, CovarianceSpec, DiscreteGaussianSampler,
    DiscreteGaussianSpec, Spread,
};
use wiretap_core::linalg::{self, c, CMat, CVec, RMat};
use wiretap_core::security::{
    achievable_rate, algebraic_flatness_bound_check, check_secrecy, eu_decompose, sqrt2_unit_lattice, SQRT2_UNIT,
};
use wiretap_core::{Lattice, Result};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

/// `Θ_Z(τ)` by direct summation.
fn theta_z(tau: f64) -> f64 {
    (-50i64..=50).map(|k| (-PI * tau * (k * k) as f64).exp()).sum()
}

fn flatness_cross_validation() -> Result<Outcome> {
    let start = Instant::now();
    let skewed = Lattice::from_real_basis(RMat::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 3f64.sqrt() / 2.0]))?;
    let lattices = [("Z^2", Lattice::gaussian_integers(1)), ("skewed", skewed), ("Z^4", Lattice::gaussian_integers(2))];
    let mut worst: f64 = 0.0;
    for (_, lat) in &lattices {
        for sigma in [0.3, 0.5, 1.0] {
            let dual = flatness_factor(lat, sigma)?.value;
            let primal = primal_flatness(lat, sigma, 64)?;
            worst = worst.max((dual - primal).abs());
        }
    }
    let eps = flatness_factor(&Lattice::gaussian_integers(1), 1.0 / PI.sqrt())?.value;
    let oracle = theta_z(1.0).powi(2) - 1.0;
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-4 && (eps - oracle).abs() < 1e-6 && secs < 60.0,
        format!("max |dual - primal| = {worst:.2e}; eps(1/sqrt(pi)) = {eps:.7} vs {oracle:.7}; {secs:.1}s"),
    )
}

fn sampler_correctness() -> Result<Outcome> {
    let z = Lattice::gaussian_integers(1);
    let sampler = DiscreteGaussianSampler::new(&z, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 1_000_000usize;
    let center = CVec::zeros(1);
    let mut counts: HashMap<(i64, i64), usize> = HashMap::new();
    for _ in 0..n {
        let p = sampler.sample(&center, &mut rng)?.coeffs.expect("coefficients");
        *counts.entry((p[0], p[1])).or_default() += 1;
    }
    // Exact weights exp(-|x|²/σ²) with σ = 1; cells with expectation < 5 pooled.
    let w = |a: i64, b: i64| (-((a * a + b * b) as f64)).exp();
    let total: f64 = (-20..=20).flat_map(|a| (-20..=20).map(move |b| w(a, b))).sum();
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut pooled_e, mut pooled_o) = (0.0, 0.0);
    let mut seen = 0usize;
    for a in -6i64..=6 {
        for b in -6i64..=6 {
            let e = n as f64 * w(a, b) / total;
            let o = *counts.get(&(a, b)).unwrap_or(&0) as f64;
            seen += o as usize;
            if e >= 5.0 {
                stat += (o - e).powi(2) / e;
                cells += 1;
            } else {
                pooled_e += e;
                pooled_o += o;
            }
        }
    }
    pooled_e += n as f64 * (1.0 - (-6i64..=6).flat_map(|a| (-6i64..=6).map(move |b| w(a, b))).sum::<f64>() / total);
    pooled_o += (n - seen) as f64;
    stat += (pooled_o - pooled_e).powi(2) / pooled_e.max(1e-300);
    cells += 1;
    let crit = ChiSquared::new((cells - 1) as f64).expect("dof").inverse_cdf(0.99);

    let spec = DiscreteGaussianSpec { lattice: z, center, spread: Spread::Sigma(2f64.sqrt()) };
    let rep = sum_closeness_check(&spec, &CovarianceSpec::isotropic(1, 2.0)?, 1_000_000, 9, &mut rng)?;
    let bound = 4.0 * rep.epsilon + 3.0 * rep.max_std_error;
    outcome(
        stat < crit && rep.epsilon < 0.01 && rep.max_deviation <= bound,
        format!(
            "chi2 = {stat:.1} < {crit:.1} ({cells} cells); closeness dev {:.2e} <= 4eps+3se = {bound:.2e} (eps {:.1e})",
            rep.max_deviation, rep.epsilon
        ),
    )
}

fn construction_a_laws() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = 5u64;
    let mut volume_ok = true;
    for t in 1..=2usize {
        for k in 0..=2 * t {
            let code = LinearCode::sample(p, 2 * t, k, &mut rng)?;
            let lat = lift_code(&code, t)?;
            // Cosets of Λ in Z[i]^t, counted over representatives in [0, p)^{2t}.
            let mut reps = HashSet::new();
            let total = p.pow(2 * t as u32);
            for idx in 0..total {
                let mut v = idx;
                let coords: Vec<f64> = (0..2 * t)
                    .map(|_| {
                        let d = v % p;
                        v /= p;
                        d as f64
                    })
                    .collect();
                let x = CVec::from_fn(t, |i, _| c(coords[2 * i], coords[2 * i + 1]));
                let r = lat.mod_lattice(&x);
                reps.insert(r.iter().map(|z| ((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64)).collect::<Vec<_>>());
            }
            let expected = p.pow((2 * t - k) as u32);
            volume_ok &= reps.len() as u64 == expected && (lat.volume() / expected as f64 - 1.0).abs() < 1e-9;
        }
    }
    let pair = NestedPair::sample(p, 2, 2, 3, 1, &mut rng)?;
    let m = pair.lattice_e().real_dim();
    let mut nested = 0;
    for _ in 0..1000 {
        let z: Vec<i64> = (0..m).map(|_| rng.random_range(-50..=50)).collect();
        nested += usize::from(pair.lattice_b().contains(&pair.lattice_e().point(&z)?.coords));
    }
    let mut rate_err: f64 = 0.0;
    for (t, k_b, k_e) in [(1usize, 2usize, 0usize), (2, 3, 1), (2, 4, 0), (2, 2, 2)] {
        let pr = NestedPair::sample(p, 1, t, k_b, k_e, &mut rng)?;
        let lhs = (pr.lattice_e().volume() / pr.lattice_b().volume()).ln() / t as f64;
        let rhs = (k_b - k_e) as f64 * (p as f64).ln() / t as f64;
        rate_err = rate_err.max((lhs - rhs).abs()).max((pr.rate() - rhs).abs());
    }
    outcome(
        volume_ok && nested == 1000 && rate_err < 1e-12,
        format!("volume law {}; nesting {nested}/1000; rate identity error {rate_err:.1e}", if volume_ok { "exact" } else { "broken" }),
    )
}

fn mmse_identity() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n_b = rng.random_range(2..=4);
        let h = linalg::complex_gaussian_matrix(&mut rng, n_b, 2, 1.0);
        let sigma_s2: f64 = rng.random_range(0.5..50.0);
        let sigma_b2: f64 = rng.random_range(0.01..2.0);
        let f = mmse_gdfe(&h, sigma_s2 / sigma_b2)?;
        let bias = &f.f_b * &h - &f.r_b;
        let lhs = &bias * bias.adjoint() * c(sigma_s2, 0.0) + &f.f_b * f.f_b.adjoint() * c(sigma_b2, 0.0);
        worst = worst.max((lhs - linalg::identity(2) * c(sigma_b2, 0.0)).norm());
    }
    outcome(worst < 1e-9, format!("max deviation {worst:.2e} over 100 channels"))
}

/// The desk configuration: n_a = n_b = n_e = 2, T = 2, p = 5, Λ_e = 5Z[i]^4.
fn desk_config(trials: usize) -> ExperimentConfig {
    ExperimentConfig::from_toml(&format!(
        "p = 5\nn_a = 2\nn_b = 2\nn_e = 2\nt = 2\nk_b = 2\nk_e = 0\nsigma_s = 10.0\n\
         snr_b_db = 24.0\nsnr_e_db = 10.0\nc_e = {}\ntrials = {trials}\nseed = 20240501\n",
        2.0 * 5f64.ln()
    ))
    .expect("valid config")
}

fn end_to_end() -> Result<Outcome> {
    let start = Instant::now();
    let cfg = desk_config(10_000);
    let main = experiment::run(&cfg)?.report;
    let sec = &main.security;
    let points = experiment::sweep(&cfg, "snr_b_db", &[16.0, 18.0, 20.0, 22.0, 24.0])?;
    let rates: Vec<f64> = points.iter().map(|p| p.report.error_rate).collect();
    let improving = rates.windows(2).all(|w| w[1] < w[0]);
    let secs = start.elapsed().as_secs_f64();
    let eps_upper = sec.epsilon + sec.epsilon_tail;
    outcome(
        main.error_rate < 1e-2
            && sec.reliability.pass
            && sec.secrecy.pass
            && eps_upper < 0.1
            && sec.leakage_bound.is_finite()
            && improving
            && secs < 600.0,
        format!(
            "P_e = {:.1e} [{:.1e}, {:.1e}]; gamma_b = {:.2} > pi e; gamma_e = {:.3} < pi; eps = {:.2e} (+{:.0e}); \
             leakage bound {:.3}; sweep {:?}; {secs:.0}s",
            main.error_rate,
            main.wilson_low,
            main.wilson_high,
            sec.reliability.gamma,
            sec.secrecy.gamma,
            sec.epsilon,
            sec.epsilon_tail,
            sec.leakage_bound,
            rates
        ),
    )
}

const EPS_THRESHOLD: f64 = 0.1;

fn universality() -> Result<Outcome> {
    let cfg = desk_config(0);
    let setup = experiment::setup(&cfg)?;
    let set = &setup.set;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut eps = Vec::new();
    let mut verdicts = HashSet::new();
    for i in 0..20 {
        let h = if i == 0 { setup.state.h_e.clone() } else { channel::sample_on_shell(set.n_e, set.n_a, set.rho_e(), set.c_e, &mut rng)? };
        let bundle = channel::eve_covariances(&h, cfg.sigma_s, set.sigma_e)?;
        eps.push(flatness_factor(setup.pair.lattice_e(), bundle.sigma_blocks(cfg.t)?)?.upper());
        verdicts.insert(check_secrecy(setup.pair.lattice_e(), &h, cfg.sigma_s, set.sigma_e)?.pass_volume);
    }
    let min = eps.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eps.iter().copied().fold(0.0, f64::max);
    outcome(
        verdicts.len() == 1 && max > min * (1.0 + 1e-6) && max < EPS_THRESHOLD,
        format!("eps in [{min:.2e}, {max:.2e}] (threshold {EPS_THRESHOLD}); verdicts {verdicts:?}"),
    )
}

fn antenna_mismatch() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lattice = Lattice::gaussian_integers(2).scaled(2.0)?;
    let (sigma_s, sigma_e) = (1.5, 1.0);
    let h = linalg::complex_gaussian_matrix(&mut rng, 3, 2, 1.0);
    let flat = |h: &CMat| -> Result<f64> {
        let r = channel::reduce_antenna_mismatch(h, 1e-3)?;
        let bundle = channel::eve_covariances(&r, sigma_s, sigma_e)?;
        Ok(flatness_factor(&lattice, bundle.sigma_blocks(1)?)?.value)
    };
    let base = flat(&h)?;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let q = linalg::haar_unitary(&mut rng, 3);
        worst = worst.max((flat(&(&q * &h))? - base).abs());
    }
    let (rho, cap) = (4.0, 1.5);
    let h1 = channel::sample_on_shell(1, 2, rho, cap, &mut rng)?;
    let excess: Vec<f64> = [0.1, 0.01, 0.001]
        .iter()
        .map(|&b| channel::reduce_antenna_mismatch(&h1, b).map(|r| channel::log_capacity(&r, rho) - cap))
        .collect::<Result<_>>()?;
    let monotone = excess[0] > excess[1] && excess[1] > excess[2] && excess[2] >= 0.0;
    outcome(
        worst <= 1e-9 && monotone && excess[2] < 1e-4,
        format!("unitary invariance {worst:.1e} (eps {base:.3e}); excess {}", sci(&excess)),
    )
}

fn perturbation() -> Result<Outcome> {
    let set = CompoundSet { n_a: 2, n_b: 2, n_e: 2, power: 1.0, sigma_b: 0.3, sigma_e: 1.0, c_b: 5.0, c_e: 1.0 };
    let sigma_s = 1.0;
    let delta = 0.1;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cov = quantize_channel_space(&set, sigma_s, delta, Region::Shell, 20_000, 10_000, &mut rng)?;
    let lattice = Lattice::gaussian_integers(2).scaled(0.8)?;
    let mut f_err: f64 = 0.0;
    let mut shrunk = Vec::with_capacity(cov.centers.len());
    for center in &cov.centers {
        let lowered = channel::shrink(center, delta);
        let direct = center.determinant().re / lowered.determinant().re;
        f_err = f_err.max((channel::perturbation_factor(center, delta)? / direct - 1.0).abs());
        shrunk.push(flatness_factor(&lattice, CovarianceSpec::from_complex(&lowered)?)?.upper());
    }
    let (mut violations, mut uncovered) = (0usize, 0usize);
    let probes = 10_000;
    for _ in 0..probes {
        let s = channel::sample_eve_covariance(&set, sigma_s, Region::Shell, &mut rng)?;
        let (idx, gap) = cov.nearest(&s);
        if gap > delta {
            uncovered += 1;
            continue;
        }
        let eps = flatness_factor(&lattice, CovarianceSpec::from_complex(&s)?)?.value;
        if eps > shrunk[idx] + 1e-12 {
            violations += 1;
        }
    }
    outcome(
        cov.validated && violations == 0 && uncovered == 0 && f_err < 1e-12,
        format!(
            "{} centers, {probes} probes, {violations} violations, {uncovered} uncovered; f(delta) rel. error {f_err:.1e}",
            cov.size
        ),
    )
}

fn rate_formulas() -> Result<Outcome> {
    let plain = achievable_rate(10.0, 2.0, 2, None);
    let alg = achievable_rate(10.0, 2.0, 2, Some(2f64.sqrt()));
    let oracle = 6.0 - 2.0 * 2f64.ln();
    let clamp = achievable_rate(3.0, 2.0, 2, None) == 0.0 && achievable_rate(8.0, 2.0, 2, Some(3.0)) == 0.0;
    outcome(
        (plain - 6.0).abs() < 1e-12 && (alg - oracle).abs() < 1e-12 && (alg - 4.6137).abs() < 1e-4 && clamp,
        format!("R(10,2,2) = {plain}; R_alpha = {alg:.12}; clamp {clamp}"),
    )
}

fn algebraic_bound() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let lattice = sqrt2_unit_lattice(1.0)?.dual();
    let mut slacks = Vec::new();
    let mut ok = true;
    for kappa in [1.0f64, 2.0, 5.0, 10.0] {
        let a = CMat::from_diagonal(&CVec::from_vec(vec![c(kappa.sqrt(), 0.0), c(1.0 / kappa.sqrt(), 0.0)]));
        let d = eu_decompose(&linalg::hermitian_sqrt(&a), &lattice.dual(), Some(SQRT2_UNIT))?;
        let rep = algebraic_flatness_bound_check(&lattice, &a, &d, 500, &mut rng)?;
        ok &= rep.holds && rep.slack >= 0.0;
        slacks.push(rep.slack);
    }
    outcome(ok, format!("slack over kappa in {{1,2,5,10}}: {}", sci(&slacks)))
}

fn reproducibility() -> Result<Outcome> {
    let mut cfg = desk_config(2000);
    cfg.snr_b_db = 18.0;
    let csv = |workers: usize| -> Result<Vec<u8>> {
        let mut c = cfg.clone();
        c.workers = Some(workers);
        let mut buf = Vec::new();
        experiment::write_trials_csv(&mut buf, &experiment::run(&c)?.trials)?;
        Ok(buf)
    };
    let (a, b, d) = (csv(1)?, csv(4)?, csv(1)?);
    outcome(a == b && a == d, format!("{} bytes; 1 vs 4 workers identical: {}; rerun identical: {}", a.len(), a == b, a == d))
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 11] = [
        ("flatness factor cross-validation", flatness_cross_validation),
        ("discrete Gaussian sampler", sampler_correctness),
        ("Construction A volume, nesting, rate", construction_a_laws),
        ("MMSE-GDFE effective noise identity", mmse_identity),
        ("end-to-end desk run", end_to_end),
        ("universality over the eavesdropper shell", universality),
        ("antenna mismatch reduction", antenna_mismatch),
        ("covariance perturbation on a covering", perturbation),
        ("rate formulas", rate_formulas),
        ("algebraic flatness bound", algebraic_bound),
        ("reproducibility across workers", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "[{}] {:>2}. {name}: {detail} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
