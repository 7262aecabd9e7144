//! Construction A over `Z[i]`: linear codes over `F_p` lifted through the
//! coordinate-wise real/imaginary reduction `ψ : Z[i]^n → F_p^{2n}`, nested
//! pairs obtained by expurgating generator rows, and the coset map between
//! messages and `Λ_b / Λ_e`.
//!
//! Code coordinates are interleaved `(Re x₁, Im x₁, Re x₂, Im x₂, ...)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gaussian::GaussLattice;
use crate::lattice::{ClosestPointSolver, Lattice};
use crate::linalg::{c, CVec, RMat, RVec};

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % p;
        }
        a = a * a % p;
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Row-reduces `rows` over `F_p` in place; returns pivot columns.
fn rref(rows: &mut Vec<Vec<u64>>, p: u64) -> Vec<usize> {
    let n = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut pivots = Vec::new();
    let mut lead = 0;
    for col in 0..n {
        let Some(sel) = (lead..rows.len()).find(|&r| rows[r][col] % p != 0) else {
            continue;
        };
        rows.swap(lead, sel);
        let inv = inv_mod(rows[lead][col], p);
        for v in rows[lead].iter_mut() {
            *v = *v * inv % p;
        }
        for r in 0..rows.len() {
            if r != lead && rows[r][col] != 0 {
                let f = rows[r][col];
                for j in 0..n {
                    rows[r][j] = (rows[r][j] + p * p - f * rows[lead][j] % p) % p;
                }
            }
        }
        pivots.push(col);
        lead += 1;
        if lead == rows.len() {
            break;
        }
    }
    rows.truncate(lead);
    pivots
}

/// A linear code over `F_p` with a generator in reduced row-echelon form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCode {
    p: u64,
    n: usize,
    generator: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl LinearCode {
    /// Canonicalizes the given generator rows. Rows must be independent.
    pub fn new(p: u64, n: usize, rows: Vec<Vec<u64>>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParameter(format!("{p} is not prime")));
        }
        if p > u32::MAX as u64 {
            return Err(Error::InvalidParameter(format!("prime {p} too large")));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(format!("generator rows must have length {n}")));
        }
        let k = rows.len();
        let mut g: Vec<Vec<u64>> = rows.into_iter().map(|r| r.into_iter().map(|v| v % p).collect()).collect();
        let pivots = rref(&mut g, p);
        if g.len() != k {
            return Err(Error::RankDeficient);
        }
        Ok(Self { p, n, generator: g, pivots })
    }

    pub fn zero(p: u64, n: usize) -> Result<Self> {
        Self::new(p, n, Vec::new())
    }

    pub fn full(p: u64, n: usize) -> Result<Self> {
        Self::new(p, n, (0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect())
    }

    /// Uniformly random `k`-dimensional code: a uniform full-rank generator,
    /// redrawn on rank deficiency.
    pub fn sample<R: Rng + ?Sized>(p: u64, n: usize, k: usize, rng: &mut R) -> Result<Self> {
        if k > n {
            return Err(Error::InvalidParameter(format!("dimension {k} exceeds length {n}")));
        }
        loop {
            let rows = (0..k).map(|_| (0..n).map(|_| rng.random_range(0..p)).collect()).collect();
            match Self::new(p, n, rows) {
                Ok(code) => return Ok(code),
                Err(Error::RankDeficient) => continue,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.generator.len()
    }

    pub fn generator(&self) -> &[Vec<u64>] {
        &self.generator
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Code spanned by the first `k` canonical generator rows.
    pub fn leading_subcode(&self, k: usize) -> Result<Self> {
        if k > self.dim() {
            return Err(Error::InvalidParameter(format!("subcode dimension {k} exceeds {}", self.dim())));
        }
        Self::new(self.p, self.n, self.generator[..k].to_vec())
    }

    /// `Σ_i info[i] g_i mod p`.
    pub fn encode(&self, info: &[u64]) -> Vec<u64> {
        let mut w = vec![0u64; self.n];
        for (row, &a) in self.generator.iter().zip(info) {
            for (wj, &g) in w.iter_mut().zip(row) {
                *wj = (*wj + a % self.p * g) % self.p;
            }
        }
        w
    }

    /// Coordinates of a codeword in the canonical generator, or `None`.
    pub fn information(&self, word: &[u64]) -> Option<Vec<u64>> {
        if word.len() != self.n {
            return None;
        }
        let info: Vec<u64> = self.pivots.iter().map(|&j| word[j] % self.p).collect();
        let back = self.encode(&info);
        back.iter().zip(word).all(|(a, b)| *a == b % self.p).then_some(info)
    }

    pub fn contains(&self, word: &[u64]) -> bool {
        self.information(word).is_some()
    }

    /// All `p^k` codewords (desk-scale only).
    pub fn codewords(&self) -> Vec<Vec<u64>> {
        let k = self.dim();
        let total = self.p.pow(k as u32);
        (0..total)
            .map(|mut idx| {
                let info: Vec<u64> = (0..k)
                    .map(|_| {
                        let d = idx % self.p;
                        idx /= self.p;
                        d
                    })
                    .collect();
                self.encode(&info)
            })
            .collect()
    }
}

/// Interleaved code coordinates to the real embedding `[Re; Im]`.
fn code_to_real(v: &[f64]) -> RVec {
    let n = v.len() / 2;
    RVec::from_fn(2 * n, |i, _| if i < n { v[2 * i] } else { v[2 * (i - n) + 1] })
}

/// `ψ(x)`: the interleaved reduction mod `p` of a Gaussian-integer vector.
pub fn reduce_mod_p(x: &[(i64, i64)], p: u64) -> Vec<u64> {
    let m = |v: i64| v.rem_euclid(p as i64) as u64;
    x.iter().flat_map(|&(a, b)| [m(a), m(b)]).collect()
}

/// `Λ(C) = ψ⁻¹(C) ⊂ Z[i]^n` for a code of length `2n`.
pub fn lift_code(code: &LinearCode, n: usize) -> Result<Lattice> {
    if code.len() != 2 * n {
        return Err(Error::Shape(format!("code length {} does not match 2 x {n}", code.len())));
    }
    let p = code.p() as f64;
    let mut cols: Vec<RVec> = Vec::with_capacity(2 * n);
    for row in code.generator() {
        let v: Vec<f64> = row.iter().map(|&x| x as f64).collect();
        cols.push(code_to_real(&v));
    }
    for j in 0..2 * n {
        if !code.pivots().contains(&j) {
            let mut v = vec![0.0; 2 * n];
            v[j] = p;
            cols.push(code_to_real(&v));
        }
    }
    Lattice::from_real_basis(RMat::from_columns(&cols))
}

/// A nested pair `Λ_e ⊆ Λ_b ⊂ Z[i]^{n_a T}` with its coset map.
#[derive(Debug, Clone)]
pub struct NestedPair {
    n_a: usize,
    t: usize,
    code_b: LinearCode,
    code_e: LinearCode,
    lattice_b: Lattice,
    lattice_e: Lattice,
    solver_e: ClosestPointSolver,
    messages: u64,
}

impl NestedPair {
    /// Builds the pair from `C_b` and the number `k_e` of leading generator
    /// rows kept for `C_e`.
    pub fn from_code(code_b: LinearCode, k_e: usize, n_a: usize, t: usize) -> Result<Self> {
        if n_a == 0 || t == 0 {
            return Err(Error::InvalidParameter("n_a and T must be positive".into()));
        }
        let n = n_a * t;
        let code_e = code_b.leading_subcode(k_e)?;
        let lattice_b = lift_code(&code_b, n)?;
        let lattice_e = lift_code(&code_e, n)?;
        let solver_e = ClosestPointSolver::new(&lattice_e)?;
        let diff = (code_b.dim() - k_e) as u32;
        let messages = code_b
            .p()
            .checked_pow(diff)
            .ok_or_else(|| Error::InvalidParameter("message set too large".into()))?;
        Ok(Self { n_a, t, code_b, code_e, lattice_b, lattice_e, solver_e, messages })
    }

    /// Draws `C_b` uniformly and expurgates to `C_e`.
    pub fn sample<R: Rng + ?Sized>(p: u64, n_a: usize, t: usize, k_b: usize, k_e: usize, rng: &mut R) -> Result<Self> {
        if k_e > k_b || k_b > 2 * n_a * t {
            return Err(Error::InvalidParameter(format!(
                "need k_e <= k_b <= 2 n_a T, got k_e={k_e}, k_b={k_b}, 2 n_a T={}",
                2 * n_a * t
            )));
        }
        let code_b = LinearCode::sample(p, 2 * n_a * t, k_b, rng)?;
        Self::from_code(code_b, k_e, n_a, t)
    }

    /// Plain-text form: `p`, `n_a`, `t` and `k_e` as `key value` lines, then
    /// the canonical generator of `C_b`, one row of integers per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("p {}\nn_a {}\nt {}\nk_e {}\n", self.p(), self.n_a, self.t, self.code_e.dim());
        for row in self.code_b.generator() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    /// Inverse of [`NestedPair::to_text`]. Rows need not be canonical.
    pub fn parse(text: &str) -> Result<Self> {
        let mut header = std::collections::HashMap::new();
        let mut rows = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let mut parts = line.split_whitespace();
            let first = parts.next().unwrap_or_default();
            if first.chars().next().is_some_and(|ch| ch.is_ascii_alphabetic()) {
                let value = parts
                    .next()
                    .and_then(|v| v.parse::<u64>().ok())
                    .ok_or_else(|| Error::Parse(format!("bad header line `{line}`")))?;
                header.insert(first.to_string(), value);
            } else {
                let row = line
                    .split_whitespace()
                    .map(|v| v.parse::<u64>().map_err(|_| Error::Parse(format!("bad generator entry `{v}`"))))
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
        }
        let get = |k: &str| header.get(k).copied().ok_or_else(|| Error::Parse(format!("missing `{k}` line")));
        let (p, n_a, t, k_e) = (get("p")?, get("n_a")? as usize, get("t")? as usize, get("k_e")? as usize);
        let code_b = LinearCode::new(p, 2 * n_a * t, rows)?;
        Self::from_code(code_b, k_e, n_a, t)
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn p(&self) -> u64 {
        self.code_b.p()
    }

    pub fn code_b(&self) -> &LinearCode {
        &self.code_b
    }

    pub fn code_e(&self) -> &LinearCode {
        &self.code_e
    }

    pub fn lattice_b(&self) -> &Lattice {
        &self.lattice_b
    }

    pub fn lattice_e(&self) -> &Lattice {
        &self.lattice_e
    }

    /// `|Λ_b / Λ_e|`.
    pub fn message_count(&self) -> u64 {
        self.messages
    }

    /// Secrecy rate `R = (k_b - k_e) ln p / T` in nats per channel use.
    pub fn rate(&self) -> f64 {
        (self.code_b.dim() - self.code_e.dim()) as f64 * (self.p() as f64).ln() / self.t as f64
    }

    fn digits(&self, m: u64) -> Vec<u64> {
        let p = self.p();
        let r = self.code_b.dim() - self.code_e.dim();
        let mut m = m;
        (0..r)
            .map(|_| {
                let d = m % p;
                m /= p;
                d
            })
            .collect()
    }

    /// `φ(m)`: the minimal-norm representative of the `m`-th coset of `Λ_e`.
    pub fn coset_encode(&self, m: u64) -> Result<CVec> {
        if m >= self.messages {
            return Err(Error::IndexOutOfRange { index: m, size: self.messages });
        }
        let mut info = vec![0u64; self.code_e.dim()];
        info.extend(self.digits(m));
        let word = self.code_b.encode(&info);
        let w: Vec<f64> = word.iter().map(|&x| x as f64).collect();
        let wr = code_to_real(&w);
        let wc = crate::linalg::unembed(&wr);
        let q = self.solver_e.closest(&wc)?;
        Ok(wc - q.coords)
    }

    /// `φ⁻¹` on any point of `Λ_b` (coordinates rounded to `Z[i]`).
    pub fn coset_decode(&self, x: &CVec) -> Result<u64> {
        let n = self.n_a * self.t;
        if x.len() != n {
            return Err(Error::Shape(format!("expected length {n}, got {}", x.len())));
        }
        let ints: Vec<(i64, i64)> = x.iter().map(|z| (z.re.round() as i64, z.im.round() as i64)).collect();
        let word = reduce_mod_p(&ints, self.p());
        let info = self
            .code_b
            .information(&word)
            .ok_or_else(|| Error::InvalidParameter("point is not in the fine lattice".into()))?;
        let p = self.p();
        Ok(info[self.code_e.dim()..].iter().rev().fold(0u64, |acc, &d| acc * p + d))
    }
}

/// Outcome of [`minkowski_hlawka_estimate`].
#[derive(Debug, Clone, Copy)]
pub struct MhEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub reference: f64,
}

/// `E_C[Σ_{x ∈ βΛ(C) \ 0} f(x)]` over uniformly random `[2T, k]` codes with
/// `β` chosen so every `βΛ(C)` has volume `volume`, against `V⁻¹ ∫ f`.
/// `f(x) = profile(||x||)` is radial and vanishes beyond `support`.
pub fn minkowski_hlawka_estimate<R: Rng + ?Sized>(
    p: u64,
    t: usize,
    k: usize,
    volume: f64,
    profile: &dyn Fn(f64) -> f64,
    support: f64,
    n_draws: usize,
    rng: &mut R,
) -> Result<MhEstimate> {
    let d = 2 * t;
    if d > 8 {
        return Err(Error::DimensionTooLarge { dim: d, cap: 8 });
    }
    let beta = (volume / (p as f64).powi((d - k) as i32)).powf(1.0 / d as f64);
    let mut vals = Vec::with_capacity(n_draws);
    for _ in 0..n_draws {
        let code = LinearCode::sample(p, d, k, rng)?;
        let lat = lift_code(&code, t)?;
        let g = lat.real_basis() * beta;
        let sums = GaussLattice::new(&g)?;
        let mut acc = 0.0;
        sums.for_each_within(&RVec::zeros(d), support * support, &mut |z, dist| {
            if z.iter().any(|&v| v != 0) {
                acc += profile(dist.sqrt());
            }
        })
        .map_err(|nodes| Error::Truncation { lower: acc, upper: f64::INFINITY, points: nodes })?;
        vals.push(acc);
    }
    let n = vals.len().max(1) as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    // Radial quadrature: ∫ f = S_{d-1} ∫_0^R g(r) r^{d-1} dr (composite Simpson).
    let steps = 20_000;
    let h = support / steps as f64;
    let mut integral = 0.0;
    for i in 0..=steps {
        let r = i as f64 * h;
        let w = if i == 0 || i == steps { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        integral += w * profile(r) * r.powi(d as i32 - 1);
    }
    integral *= h / 3.0;
    let sphere = 2.0 * std::f64::consts::PI.powf(d as f64 / 2.0) / gamma_half_int(d);
    Ok(MhEstimate { mean, std_error: (var / n).sqrt(), reference: sphere * integral / volume })
}

/// `Γ(d/2)` for positive integer `d`.
fn gamma_half_int(d: usize) -> f64 {
    if d % 2 == 0 {
        (1..d / 2).map(|k| k as f64).product()
    } else {
        let mut g = std::f64::consts::PI.sqrt();
        let mut x = 0.5;
        while x < d as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Gaussian-integer vector from interleaved `(re, im)` integers.
pub fn gaussian_integer_vector(interleaved: &[i64]) -> CVec {
    CVec::from_fn(interleaved.len() / 2, |i, _| c(interleaved[2 * i] as f64, interleaved[2 * i + 1] as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn binom(n: usize, k: usize) -> f64 {
        (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product()
    }

    /// Number of classes of `[0,p)^{2n}` under `Λ(C)`: count residues of
    /// all points modulo the lattice by brute force.
    fn coset_count_in_box(lat: &Lattice, p: i64, n: usize) -> usize {
        let mut reps: HashSet<Vec<i64>> = HashSet::new();
        let total = (p as usize).pow(2 * n as u32);
        for idx in 0..total {
            let mut k = idx;
            let coords: Vec<i64> = (0..2 * n)
                .map(|_| {
                    let v = (k % p as usize) as i64;
                    k /= p as usize;
                    v
                })
                .collect();
            let x = gaussian_integer_vector(&coords);
            let r = lat.mod_lattice(&x);
            reps.insert(r.iter().flat_map(|z| [z.re.round() as i64, z.im.round() as i64]).collect());
        }
        reps.len()
    }

    #[test]
    fn full_and_zero_codes_lift_to_standard_lattices() {
        let t = 2;
        let full = lift_code(&LinearCode::full(5, 4).unwrap(), t).unwrap();
        assert!((full.volume() - 1.0).abs() < 1e-9);
        let zero = lift_code(&LinearCode::zero(5, 4).unwrap(), t).unwrap();
        assert!((zero.volume() - 625.0).abs() < 1e-6);
        assert!(zero.contains(&CVec::from_vec(vec![c(5.0, -10.0), c(0.0, 5.0)])));
        assert!(!zero.contains(&CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])));
    }

    #[test]
    fn small_code_lifts_to_expected_lattice() {
        let code = LinearCode::new(5, 2, vec![vec![1, 2]]).unwrap();
        let lat = lift_code(&code, 1).unwrap();
        assert!((lat.volume() - 5.0).abs() < 1e-9);
        for a in 0..5i64 {
            for b in 0..5i64 {
                let inside = lat.contains(&CVec::from_element(1, c(a as f64, b as f64)));
                let expected = (0..5).any(|t| a == t && b == (2 * t) % 5);
                assert_eq!(inside, expected, "{a}+{b}i");
            }
        }
        assert_eq!(coset_count_in_box(&lat, 5, 1), 5);
    }

    #[test]
    fn volume_law_by_coset_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in 1..=2usize {
            for k in 0..=2 * t {
                let code = LinearCode::sample(5, 2 * t, k, &mut rng).unwrap();
                let lat = lift_code(&code, t).unwrap();
                let expected = 5f64.powi((2 * t - k) as i32);
                assert!((lat.volume() / expected - 1.0).abs() < 1e-9);
                // |Z[i]^t / Λ| = |[0,5)^{2t} / Λ| since 5Z[i]^t ⊆ Λ.
                assert_eq!(coset_count_in_box(&lat, 5, t) as f64, expected);
            }
        }
    }

    #[test]
    fn weight_distribution_matches_ensemble_average() {
        let (p, n, k) = (5u64, 4usize, 2usize);
        let draws = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut sums = vec![0.0; n + 1];
        let mut sq = vec![0.0; n + 1];
        for _ in 0..draws {
            let code = LinearCode::sample(p, n, k, &mut rng).unwrap();
            let mut a = vec![0.0; n + 1];
            for w in code.codewords() {
                a[w.iter().filter(|&&x| x != 0).count()] += 1.0;
            }
            for i in 0..=n {
                sums[i] += a[i];
                sq[i] += a[i] * a[i];
            }
        }
        let frac = (p.pow(k as u32) - 1) as f64 / (p.pow(n as u32) - 1) as f64;
        for w in 1..=n {
            let expected = binom(n, w) * ((p - 1) as f64).powi(w as i32) * frac;
            let mean = sums[w] / draws as f64;
            let sd = ((sq[w] / draws as f64 - mean * mean) / draws as f64).sqrt();
            assert!((mean - expected).abs() <= 3.0 * sd + 1e-12, "w={w}: {mean} vs {expected} (sd {sd})");
        }
    }

    #[test]
    fn nested_pair_rate_and_index() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pair = NestedPair::sample(5, 1, 2, 2, 1, &mut rng).unwrap();
        assert!((pair.rate() - 5f64.ln() / 2.0).abs() < 1e-15);
        assert!((pair.rate() - 0.8047).abs() < 1e-4);
        assert_eq!(pair.message_count(), 5);
        let ratio = pair.lattice_e().volume() / pair.lattice_b().volume();
        assert!((ratio.ln() / 2.0 - pair.rate()).abs() < 1e-12);
        let same = NestedPair::sample(5, 1, 2, 2, 2, &mut rng).unwrap();
        assert_eq!(same.rate(), 0.0);
        assert!((same.lattice_b().volume() - same.lattice_e().volume()).abs() < 1e-9);
    }

    #[test]
    fn coarse_points_lie_in_fine_lattice() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pair = NestedPair::sample(5, 2, 2, 3, 1, &mut rng).unwrap();
        let m = pair.lattice_e().real_dim();
        for _ in 0..1000 {
            let z: Vec<i64> = (0..m).map(|_| rng.random_range(-20..=20)).collect();
            let x = pair.lattice_e().point(&z).unwrap();
            assert!(pair.lattice_b().contains(&x.coords));
        }
    }

    #[test]
    fn coset_map_is_bijective_on_small_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pair = NestedPair::sample(5, 1, 1, 2, 0, &mut rng).unwrap();
        assert_eq!(pair.message_count(), 25);
        let reps: Vec<CVec> = (0..25).map(|m| pair.coset_encode(m).unwrap()).collect();
        assert!(reps[0].norm() < 1e-12);
        for i in 0..25 {
            assert!(pair.lattice_b().contains(&reps[i]));
            assert_eq!(pair.coset_decode(&reps[i]).unwrap(), i as u64);
            for j in (i + 1)..25 {
                assert!(!pair.lattice_e().contains(&(&reps[i] - &reps[j])));
            }
        }
        assert!(matches!(pair.coset_encode(25), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn coset_representatives_are_minimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pair = NestedPair::sample(5, 1, 2, 2, 1, &mut rng).unwrap();
        for m in 0..pair.message_count() {
            let r = pair.coset_encode(m).unwrap();
            let q = pair.lattice_e().closest_point(&r).unwrap();
            assert!(q.coords.norm() < 1e-9, "representative of {m} not in the Voronoi cell");
        }
    }

    #[test]
    fn mh_ratio_near_one_for_large_prime() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = |r: f64| (-std::f64::consts::PI * r * r).exp();
        let est = minkowski_hlawka_estimate(257, 2, 2, 1.0, &g, 6.0, 200, &mut rng).unwrap();
        assert!((est.reference - 1.0).abs() < 1e-9);
        let ratio = est.mean / est.reference;
        assert!((0.8..=1.25).contains(&ratio), "{ratio}");
    }

    #[test]
    fn mh_empty_support_gives_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        // k = 0: βΛ = βp Z[i]^T has no nonzero point within half its spacing.
        let beta_p = (1.0f64 / 5f64.powi(4)).powf(0.25) * 5.0;
        let g = |_r: f64| 1.0;
        let est = minkowski_hlawka_estimate(5, 2, 0, 1.0, &g, 0.49 * beta_p, 10, &mut rng).unwrap();
        assert_eq!(est.mean, 0.0);
    }

    proptest! {
        #[test]
        fn reduction_is_additive(a in proptest::collection::vec(-1000i64..1000, 4), b in proptest::collection::vec(-1000i64..1000, 4)) {
            let pairs = |v: &[i64]| v.chunks(2).map(|c| (c[0], c[1])).collect::<Vec<_>>();
            let sum: Vec<i64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let lhs = reduce_mod_p(&pairs(&sum), 7);
            let ra = reduce_mod_p(&pairs(&a), 7);
            let rb = reduce_mod_p(&pairs(&b), 7);
            let rhs: Vec<u64> = ra.iter().zip(&rb).map(|(x, y)| (x + y) % 7).collect();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn volume_law_holds(seed in 0u64..1000, t in 1usize..=3, p_idx in 0usize..3) {
            let p = [3u64, 5, 7][p_idx];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = rng.random_range(0..=2 * t);
            let lat = lift_code(&LinearCode::sample(p, 2 * t, k, &mut rng).unwrap(), t).unwrap();
            let expected = (p as f64).powi((2 * t - k) as i32);
            prop_assert!((lat.volume() / expected - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn pair_text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let pair = NestedPair::sample(7, 2, 2, 3, 1, &mut rng).unwrap();
        let back = NestedPair::parse(&pair.to_text()).unwrap();
        assert_eq!(back.code_b(), pair.code_b());
        assert_eq!(back.code_e(), pair.code_e());
        assert_eq!(back.to_text(), pair.to_text());
        assert!(matches!(NestedPair::parse("p 5\nn_a 1\n1 2\n"), Err(Error::Parse(_))));
    }

}
