//! Small dense linear-algebra helpers over `nalgebra`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Eigenvalues of a square complex matrix via the Schur form.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let t = m.clone().schur().unpack().1;
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Singular values in decreasing order and the numerical rank at
/// `rel_tol * sigma_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankReport {
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub tolerance: f64,
}

impl RankReport {
    fn from_values(mut singular_values: Vec<f64>, rel_tol: f64) -> Self {
        singular_values.sort_by(|a, b| b.total_cmp(a));
        let smax = singular_values.first().copied().unwrap_or(0.0);
        let tolerance = rel_tol * smax;
        let rank = if smax == 0.0 {
            0
        } else {
            singular_values.iter().filter(|&&s| s > tolerance).count()
        };
        Self {
            singular_values,
            rank,
            tolerance,
        }
    }

    /// Complex or real kernel dimension for `cols` unknowns.
    pub fn kernel_dim(&self, cols: usize) -> usize {
        cols - self.rank
    }
}

pub fn rank_complex(m: &DMatrix<Complex64>, rel_tol: f64) -> RankReport {
    if m.is_empty() {
        return RankReport::from_values(Vec::new(), rel_tol);
    }
    let s = m.clone().svd(false, false).singular_values;
    RankReport::from_values(s.iter().copied().collect(), rel_tol)
}

pub fn rank_real(m: &DMatrix<f64>, rel_tol: f64) -> RankReport {
    if m.is_empty() {
        return RankReport::from_values(Vec::new(), rel_tol);
    }
    let s = m.clone().svd(false, false).singular_values;
    RankReport::from_values(s.iter().copied().collect(), rel_tol)
}

/// Solves `a x = b` by LU; `None` when `a` is singular.
pub fn solve(a: DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    a.lu().solve(b)
}
