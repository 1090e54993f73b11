//! The 2(N+2)-dimensional block matrix ℳ whose eigenvalues are ±λ_k.
//!
//! Site blocks are indexed 0 … N+1; sites 0 and N+1 are the auxiliary end
//! sites that absorb the boundary terms.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::dense_eigenvalues;
use crate::model::{ChainSpec, JunctionRates, RateTriple};
use crate::spin::{bulk_coefficients, junction_coefficients};

/// Quadratic couplings of one bond: a·S⁺S⁻ + b·S⁻S⁺ + c·S⁺S⁺ + d·S⁻S⁻ + h·Sz⊗1 + h̄·1⊗Sz.
#[derive(Debug, Clone, Copy)]
struct BondCouplings {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    h: f64,
    h_bar: f64,
}

#[derive(Debug, Clone)]
pub struct BlockTridiagonalM {
    sites: usize,
    matrix: DMatrix<f64>,
}

impl BlockTridiagonalM {
    fn assemble(bonds: &[BondCouplings], t1: f64, t2: f64) -> Self {
        let n = bonds.len() + 1;
        let dim = 2 * (n + 2);
        let mut m = DMatrix::zeros(dim, dim);
        let mut add = |bi: usize, bj: usize, blk: Matrix2<f64>| {
            for r in 0..2 {
                for c in 0..2 {
                    m[(2 * bi + r, 2 * bj + c)] += blk[(r, c)];
                }
            }
        };
        for (i, k) in bonds.iter().enumerate() {
            let site = i + 1;
            add(site, site, Matrix2::new(2.0 * k.h, 0.0, 0.0, -2.0 * k.h));
            add(site + 1, site + 1, Matrix2::new(2.0 * k.h_bar, 0.0, 0.0, -2.0 * k.h_bar));
            add(site, site + 1, Matrix2::new(-k.a, -k.c, k.d, k.b));
            add(site + 1, site, Matrix2::new(-k.b, k.c, -k.d, k.a));
        }
        let tb = |t: f64| Matrix2::new(-t, -t, t, t);
        add(0, 1, tb(t1));
        add(1, 0, tb(t1).transpose());
        add(n, n + 1, -tb(t2));
        add(n + 1, n, -tb(t2).transpose());
        BlockTridiagonalM { sites: n, matrix: m }
    }

    /// Number of physical sites N.
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn block(&self, i: usize, j: usize) -> Matrix2<f64> {
        self.matrix.fixed_view::<2, 2>(2 * i, 2 * j).into_owned()
    }

    /// True when every nonzero block sits on the three central block diagonals.
    pub fn is_block_tridiagonal(&self) -> bool {
        let nb = self.sites + 2;
        (0..nb).all(|i| (0..nb).all(|j| i.abs_diff(j) <= 1 || self.block(i, j).amax() == 0.0))
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        dense_eigenvalues(self.matrix.clone())
    }

    /// Worst violation of the ± pairing, including imaginary parts.
    pub fn pairing_residual(eigs: &[Complex64]) -> f64 {
        let mut re: Vec<f64> = eigs.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        let n = re.len();
        let pair = (0..n / 2).map(|i| (re[i] + re[n - 1 - i]).abs()).fold(0.0, f64::max);
        eigs.iter().map(|z| z.im.abs()).fold(pair, f64::max)
    }

    /// The N+2 smallest real parts, in decreasing order.
    pub fn negative_half(eigs: &[Complex64]) -> Vec<f64> {
        let mut re: Vec<f64> = eigs.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        re.truncate(eigs.len() / 2);
        re.reverse();
        re
    }

    /// Bulk energies read off the eigenvalues: the negative half with one zero
    /// and the two edge energies removed.
    pub fn bulk_energies(&self, spec: &ChainSpec) -> Result<Vec<f64>> {
        let mut rest = Self::negative_half(&self.eigenvalues()?);
        for target in [0.0, spec.seg1().edge_energy(), spec.seg2().edge_energy()] {
            let (idx, _) = rest
                .iter()
                .enumerate()
                .min_by(|x, y| (x.1 - target).abs().total_cmp(&(y.1 - target).abs()))
                .ok_or_else(|| Error::Consistency("too few eigenvalues of the block matrix".into()))?;
            rest.remove(idx);
        }
        Ok(rest)
    }
}

fn bulk_couplings(rates: &RateTriple) -> BondCouplings {
    let k = bulk_coefficients(rates);
    BondCouplings { a: k.a, b: k.b, c: k.c, d: k.d, h: k.h, h_bar: k.h_bar }
}

fn junction_couplings(seg1: &RateTriple, seg2: &RateTriple, j: &JunctionRates) -> BondCouplings {
    let k = junction_coefficients(seg1, seg2, j);
    BondCouplings { a: k.alpha, b: k.beta, c: k.gamma, d: k.delta_c, h: k.eta, h_bar: k.eta_bar }
}

pub fn build_script_matrix(spec: &ChainSpec) -> Result<BlockTridiagonalM> {
    spec.ensure_valid()?;
    let n = spec.sites();
    let limit = crate::generator::MAX_DENSE_DIM / 2 - 2;
    if n > limit {
        return Err(Error::SizeGuard { what: "sites", value: n, limit });
    }
    let (s1, s2) = (spec.seg1(), spec.seg2());
    let bonds: Vec<BondCouplings> = (1..n)
        .map(|k| match k.cmp(&spec.l1()) {
            std::cmp::Ordering::Less => bulk_couplings(s1),
            std::cmp::Ordering::Equal => junction_couplings(s1, s2, spec.junction()),
            std::cmp::Ordering::Greater => bulk_couplings(s2),
        })
        .collect();
    Ok(BlockTridiagonalM::assemble(&bonds, s1.boundary_field(), s2.boundary_field()))
}

/// The block matrix of a homogeneous chain of `l` sites.
pub fn homogeneous_script_matrix(rates: &RateTriple, l: usize) -> Result<BlockTridiagonalM> {
    if l < 2 {
        return Err(Error::InvalidRate { name: "L", value: l as f64, reason: "homogeneous chain needs L ≥ 2" });
    }
    let bonds = vec![bulk_couplings(rates); l - 1];
    let t = rates.boundary_field();
    Ok(BlockTridiagonalM::assemble(&bonds, t, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::one_particle::{homogeneous_energies, solve_secular};

    fn quench(l: usize) -> ChainSpec {
        let s1 = RateTriple::new(0.6, 6.0, 1.0).unwrap();
        let s2 = RateTriple::new(6.0, 0.2, 1.0).unwrap();
        ChainSpec::quench(l, l, s1, s2).unwrap()
    }

    #[test]
    fn dimension_and_shape() {
        let m = build_script_matrix(&quench(3)).unwrap();
        assert_eq!(m.dim(), 16);
        assert!(m.is_block_tridiagonal());
    }

    #[test]
    fn quench_pairs_and_matches_secular() {
        let spec = quench(3);
        let m = build_script_matrix(&spec).unwrap();
        let eigs = m.eigenvalues().unwrap();
        assert!(BlockTridiagonalM::pairing_residual(&eigs) < 1e-9);
        let spec4 = quench(4);
        let from_matrix = build_script_matrix(&spec4).unwrap().bulk_energies(&spec4).unwrap();
        let roots = solve_secular(&spec4).unwrap();
        for (a, b) in from_matrix.iter().zip(&roots) {
            assert!((a - b).abs() < 1e-8, "{from_matrix:?} vs {roots:?}");
        }
    }

    #[test]
    fn homogeneous_spec_reduces_to_uniform_chain() {
        let r = RateTriple::new(1.1, 0.4, 0.9).unwrap();
        let a = build_script_matrix(&ChainSpec::homogeneous(3, 2, r).unwrap()).unwrap();
        let b = homogeneous_script_matrix(&r, 5).unwrap();
        assert!((a.matrix() - b.matrix()).amax() < 1e-14);
        let e = homogeneous_energies(&r, 5).unwrap();
        let mut want: Vec<f64> = e.levels().iter().map(|l| l.lambda).collect();
        want.sort_by(|x, y| y.total_cmp(x));
        let got = BlockTridiagonalM::negative_half(&b.eigenvalues().unwrap());
        for (x, y) in got.iter().zip(&want) {
            assert!((x - y).abs() < 1e-9, "{got:?} vs {want:?}");
        }
    }
}
