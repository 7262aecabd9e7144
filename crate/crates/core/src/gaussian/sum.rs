//! Gaussian sums `Σ_z exp(-π ||G z - c||²)` over `Z^m` with certified tails.
//!
//! Points inside the ball of radius `c√m` are enumerated; the remainder is
//! bounded with Banaszczyk's tail lemma: for `c >= 1/√(2π)`,
//! `ρ(L \ c√m B) < C^m ρ(L)` and `ρ((L + v) \ c√m B) < 2 C^m ρ(L)` with
//! `C = c √(2πe) exp(-πc²)`.

use crate::error::{Error, Result};
use crate::lattice::{lll, Enumeration, Unimodular, REAL_DIM_CAP};
use crate::linalg::{RMat, RVec};

const NODE_CAP: usize = 40_000_000;
const LLL_DELTA: f64 = 0.99;

/// A truncated sum together with a certified bound on the omitted mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certified {
    pub value: f64,
    pub tail_bound: f64,
    pub points: usize,
}

impl Certified {
    pub fn upper(&self) -> f64 {
        self.value + self.tail_bound
    }
}

/// `C(c) = c √(2πe) exp(-πc²)`.
fn tail_constant(c: f64) -> f64 {
    c * (2.0 * std::f64::consts::PI * std::f64::consts::E).sqrt() * (-std::f64::consts::PI * c * c).exp()
}

/// Smallest `c >= 1/√(2π)` with `C(c)^m <= target` (`0 < target < 1`).
fn radius_factor(m: usize, target: f64) -> f64 {
    radius_factor_ln(m, target.ln())
}

fn radius_factor_ln(m: usize, log_target: f64) -> f64 {
    let log_target = log_target / m as f64;
    let f = |c: f64| c.ln() + 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln()
        - std::f64::consts::PI * c * c;
    let mut lo = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let mut hi = 1.0;
    while f(hi) > log_target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > log_target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * hi {
            break;
        }
    }
    hi
}

/// Preprocessed generator `G` (columns are basis vectors) for repeated sums.
#[derive(Debug, Clone)]
pub(crate) struct GaussLattice {
    u: Unimodular,
    q_t: RMat,
    r: RMat,
    m: usize,
    node_cap: usize,
    /// Upper bound on `ρ(L)`, filled lazily by `with_centered_bound`.
    rho_upper: Option<f64>,
}

impl GaussLattice {
    pub fn new(g: &RMat) -> Result<Self> {
        let m = g.ncols();
        if m > REAL_DIM_CAP {
            return Err(Error::DimensionTooLarge { dim: m, cap: REAL_DIM_CAP });
        }
        if !g.is_square() || m == 0 {
            return Err(Error::Shape(format!("Gaussian sum generator must be square, got {:?}", g.shape())));
        }
        let (reduced, u) = lll(g, LLL_DELTA);
        let qr = reduced.qr();
        let r = qr.r();
        if r.diagonal().iter().any(|d| d.abs() < 1e-300 || !d.is_finite()) {
            return Err(Error::RankDeficient);
        }
        Ok(Self { u, q_t: qr.q().transpose(), r, m, node_cap: NODE_CAP, rho_upper: None })
    }

    #[cfg(test)]
    fn with_node_cap(mut self, cap: usize) -> Self {
        self.node_cap = cap;
        self
    }

    fn det(&self) -> f64 {
        self.r.diagonal().iter().map(|d| d.abs()).product()
    }

    /// Stores an upper bound on `ρ(L)`, needed for shifted sums. Summing
    /// level by level, each one-dimensional layer is at most its centered
    /// value, so `ρ(L) <= Π_k θ(r_kk²) <= Π_k (1 + 1/|r_kk|)`.
    pub fn with_centered_bound(mut self) -> Result<Self> {
        let bound = self.r.diagonal().iter().map(|d| 1.0 + 1.0 / d.abs()).product();
        self.rho_upper = Some(bound);
        Ok(self)
    }

    pub fn r(&self) -> &RMat {
        &self.r
    }

    pub fn rotate(&self, target: &RVec) -> RVec {
        &self.q_t * target
    }

    pub fn rho_upper(&self) -> Option<f64> {
        self.rho_upper
    }

    /// Squared radius `r²` such that the mass of `L + v` outside `r` is
    /// below `2 exp(log_target) ρ(L)`.
    pub fn tail_radius_sq(&self, log_target: f64) -> f64 {
        let c = radius_factor_ln(self.m, log_target.min(-1e-3));
        c * c * self.m as f64
    }

    /// Original integer coefficients of an enumeration point.
    pub fn original(&self, z: &[i64]) -> Vec<i64> {
        (0..self.m)
            .map(|i| (0..self.m).map(|j| self.u[(i, j)] * z[j]).sum())
            .collect()
    }

    /// Visits every `z` with `||G z - c||² <= radius_sq`, passing reduced
    /// coordinates and the squared distance.
    pub fn for_each_within(
        &self,
        target: &RVec,
        radius_sq: f64,
        visit: &mut dyn FnMut(&[i64], f64),
    ) -> std::result::Result<usize, usize> {
        let q = &self.q_t * target;
        Enumeration::new(&self.r, &q, self.node_cap)
            .run(radius_sq, &mut |z, d| {
                visit(z, d);
                radius_sq
            })
            .map_err(|e| e.nodes)
    }

    /// `Σ_z exp(-π||Gz||²)` with absolute tail bound `<= tol`. With
    /// `exclude_origin` the `z = 0` term is left out of `value`.
    pub fn centered(&self, tol: f64, exclude_origin: bool) -> Result<Certified> {
        let zero = RVec::zeros(self.m);
        let mut estimate = (1.0 / self.det()).max(1.0);
        let mut previous: Option<(f64, f64)> = None;
        for _ in 0..8 {
            let target = (tol / (2.0 * estimate)).min(0.5);
            let c = radius_factor(self.m, target);
            let cm = tail_constant(c).powi(self.m as i32);
            let radius_sq = c * c * self.m as f64;
            let mut total = 0.0;
            let mut origin = 0.0;
            let mut points = 0usize;
            let res = self.for_each_within(&zero, radius_sq, &mut |z, d| {
                let w = (-std::f64::consts::PI * d).exp();
                if z.iter().all(|&v| v == 0) {
                    origin = w;
                }
                total += w;
                points += 1;
            });
            if res.is_err() {
                let (lower, upper) = previous.unwrap_or((total - origin, f64::INFINITY));
                return Err(Error::Truncation { lower, upper, points });
            }
            let bound = cm / (1.0 - cm) * total;
            let value = if exclude_origin { total - origin } else { total };
            if bound <= tol {
                return Ok(Certified { value, tail_bound: bound, points });
            }
            previous = Some((value, value + bound));
            estimate = total * 4.0;
        }
        let (lower, upper) = previous.unwrap_or((0.0, f64::INFINITY));
        Err(Error::Truncation { lower, upper, points: 0 })
    }

    /// `Σ_z exp(-π||Gz - c||²)` with absolute tail bound `<= tol`. Requires
    /// [`GaussLattice::with_centered_bound`].
    pub fn shifted(&self, target: &RVec, tol: f64) -> Result<Certified> {
        let rho = self.rho_upper.expect("centered bound computed at construction");
        let goal = (tol / (2.0 * rho)).min(0.5);
        let c = radius_factor(self.m, goal);
        let cm = tail_constant(c).powi(self.m as i32);
        let radius_sq = c * c * self.m as f64;
        let mut total = 0.0;
        let mut points = 0usize;
        let res = self.for_each_within(target, radius_sq, &mut |_, d| {
            total += (-std::f64::consts::PI * d).exp();
            points += 1;
        });
        if res.is_err() {
            return Err(Error::Truncation { lower: total, upper: f64::INFINITY, points });
        }
        Ok(Certified { value: total, tail_bound: 2.0 * cm * rho, points })
    }
}
