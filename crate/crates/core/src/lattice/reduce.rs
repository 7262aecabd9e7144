//! Floating-point LLL reduction on column bases.

use nalgebra::DMatrix;

use crate::linalg::RMat;

/// Integer unimodular matrix tracking basis changes.
pub type Unimodular = DMatrix<i64>;

/// Gram-Schmidt data of a column basis: orthogonal vectors and `mu[(i, j)]`
/// coefficients for `j < i`.
pub(crate) struct Gso {
    pub star: RMat,
    pub norms_sq: Vec<f64>,
    pub mu: RMat,
}

pub(crate) fn gram_schmidt(b: &RMat) -> Gso {
    let m = b.ncols();
    let mut star = b.clone();
    let mut mu = RMat::identity(m, m);
    let mut norms_sq = vec![0.0; m];
    for i in 0..m {
        for j in 0..i {
            let coef = b.column(i).dot(&star.column(j)) / norms_sq[j];
            mu[(i, j)] = coef;
            let sj = star.column(j).into_owned();
            let mut si = star.column_mut(i);
            si.axpy(-coef, &sj, 1.0);
        }
        norms_sq[i] = star.column(i).norm_squared();
    }
    Gso { star, norms_sq, mu }
}

/// LLL-reduces the columns of `b` with parameter `delta`. Returns the reduced
/// basis together with the unimodular `u` such that `reduced = b * u`.
pub fn lll(b: &RMat, delta: f64) -> (RMat, Unimodular) {
    let m = b.ncols();
    let mut basis = b.clone();
    let mut u = Unimodular::identity(m, m);
    if m <= 1 {
        return (basis, u);
    }
    let mut k = 1;
    let mut guard = 0usize;
    while k < m {
        guard += 1;
        if guard > 100_000 {
            break;
        }
        let gso = gram_schmidt(&basis);
        for j in (0..k).rev() {
            let coef = basis.column(k).dot(&gso.star.column(j)) / gso.norms_sq[j];
            let r = coef.round();
            if r != 0.0 {
                let bj = basis.column(j).into_owned();
                basis.column_mut(k).axpy(-r, &bj, 1.0);
                let ri = r as i64;
                for row in 0..m {
                    u[(row, k)] -= ri * u[(row, j)];
                }
            }
        }
        let gso = gram_schmidt(&basis);
        let lhs = gso.norms_sq[k];
        let mu = gso.mu[(k, k - 1)];
        if lhs >= (delta - mu * mu) * gso.norms_sq[k - 1] {
            k += 1;
        } else {
            basis.swap_columns(k, k - 1);
            u.swap_columns(k, k - 1);
            k = if k > 1 { k - 1 } else { 1 };
        }
    }
    (basis, u)
}
