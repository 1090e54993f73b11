//! Dense eigenvalues and multiset comparison.

use nalgebra::linalg::balancing::balance_parlett_reinsch;
use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Deflation tolerances, tightest first.
const DEFLATION_LADDER: [f64; 4] = [f64::EPSILON, 8.0 * f64::EPSILON, 64.0 * f64::EPSILON, 1e-13];

/// All eigenvalues of a real square matrix (balanced real Schur form).
///
/// Subdiagonal entries can stagnate at rounding level just above the tightest
/// deflation threshold on degenerate spectra, so the iteration is retried with
/// looser thresholds. The loosest one perturbs eigenvalues by at most about
/// 1e-13·‖M‖.
pub fn dense_eigenvalues(mut m: DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    balance_parlett_reinsch(&mut m);
    DEFLATION_LADDER
        .iter()
        .find_map(|&eps| Schur::try_new(m.clone(), eps, 100 * n.max(10)))
        .map(|s| s.complex_eigenvalues().iter().copied().collect())
        .ok_or(Error::NoConvergence(n))
}

/// Sort key: real part descending, then imaginary part descending.
pub fn sort_descending(values: &mut [Complex64]) {
    values.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
}

/// Greedy matching of two equally sized multisets, sorted by (re, im); each
/// element of `a` takes its nearest unmatched partner in `b`. Returns the
/// largest pair distance, or `None` when the sizes differ.
pub fn match_multisets(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let key = |x: &Complex64, y: &Complex64| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(key);
    b.sort_by(key);
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in &a {
        let mut best: Option<(usize, f64)> = None;
        for (j, y) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (x - y).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best?;
        used[j] = true;
        worst = worst.max(d);
    }
    Some(worst)
}

pub fn match_real_multisets(a: &[f64], b: &[f64]) -> Option<f64> {
    let lift = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
    match_multisets(&lift(a), &lift(b))
}
