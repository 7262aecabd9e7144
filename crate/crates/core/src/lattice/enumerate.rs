//! Depth-first lattice point enumeration over an upper-triangular factor.
//!
//! Points are `z ∈ Z^m` with `||R z - q||² <= radius²`, visited with
//! Schnorr-Euchner zig-zag ordering at every level so that a shrinking radius
//! prunes as early as possible.

/// Outcome of an enumeration that hit its node budget.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NodeCapExceeded {
    pub nodes: usize,
}

pub(crate) struct Enumeration<'a> {
    r: &'a crate::linalg::RMat,
    q: &'a crate::linalg::RVec,
    node_cap: usize,
    nodes: usize,
    z: Vec<i64>,
}

impl<'a> Enumeration<'a> {
    pub fn new(r: &'a crate::linalg::RMat, q: &'a crate::linalg::RVec, node_cap: usize) -> Self {
        let m = r.ncols();
        Self { r, q, node_cap, nodes: 0, z: vec![0; m] }
    }

    /// Runs the enumeration. `visit` receives every point inside the current
    /// radius and returns the (possibly reduced) squared radius to continue with.
    pub fn run(
        mut self,
        radius_sq: f64,
        visit: &mut dyn FnMut(&[i64], f64) -> f64,
    ) -> Result<usize, NodeCapExceeded> {
        let m = self.r.ncols();
        if m == 0 {
            visit(&[], 0.0);
            return Ok(0);
        }
        let mut radius = radius_sq;
        self.level(m - 1, 0.0, &mut radius, visit)?;
        Ok(self.nodes)
    }

    fn level(
        &mut self,
        k: usize,
        partial: f64,
        radius_sq: &mut f64,
        visit: &mut dyn FnMut(&[i64], f64) -> f64,
    ) -> Result<(), NodeCapExceeded> {
        let m = self.r.ncols();
        let rkk = self.r[(k, k)];
        let mut acc = self.q[k];
        for j in (k + 1)..m {
            acc -= self.r[(k, j)] * self.z[j] as f64;
        }
        let center = acc / rkk;
        let z0 = center.round();
        let dir = if center >= z0 { 1.0 } else { -1.0 };
        let mut step = 0i64;
        loop {
            // zig-zag: z0, z0+dir, z0-dir, z0+2dir, ...
            let offset = if step == 0 {
                0.0
            } else if step % 2 == 1 {
                dir * ((step + 1) / 2) as f64
            } else {
                -dir * (step / 2) as f64
            };
            let zk = z0 + offset;
            let diff = rkk * (zk - center);
            let d = partial + diff * diff;
            if d > *radius_sq {
                break;
            }
            self.nodes += 1;
            if self.nodes > self.node_cap {
                return Err(NodeCapExceeded { nodes: self.nodes });
            }
            self.z[k] = zk as i64;
            if k == 0 {
                *radius_sq = visit(&self.z, d);
            } else {
                self.level(k - 1, d, radius_sq, visit)?;
            }
            step += 1;
        }
        self.z[k] = 0;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{RMat, RVec};

    #[test]
    fn counts_integer_points_in_disc() {
        let r = RMat::identity(2, 2);
        let q = RVec::zeros(2);
        let mut count = 0;
        Enumeration::new(&r, &q, 1 << 20)
            .run(4.0, &mut |_, _| {
                count += 1;
                4.0
            })
            .unwrap();
        // x² + y² <= 4 on Z²
        assert_eq!(count, 13);
    }

    #[test]
    fn node_cap_is_reported() {
        let r = RMat::identity(3, 3);
        let q = RVec::zeros(3);
        let res = Enumeration::new(&r, &q, 10).run(100.0, &mut |_, _| 100.0);
        assert!(res.is_err());
    }
}
