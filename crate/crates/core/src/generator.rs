//! The Markov generator on the full 2^N configuration space.
//!
//! Configurations are bitstrings b1…bN with b_k = 1 when site k is occupied;
//! the index is Σ b_k 2^(N−k), so site 1 is the most significant bit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::linalg::{dense_eigenvalues, sort_descending};
use crate::model::{ChainSpec, LocalOperator};

/// Largest lattice that [`assemble_generator`] accepts.
pub const MAX_ASSEMBLY_SITES: usize = 24;
/// Largest dimension for dense diagonalization and null spaces.
pub const MAX_DENSE_DIM: usize = 4096;

/// Occupation bit of `site` (1-based) in a configuration of `n` sites.
pub fn occupied(config: usize, n: usize, site: usize) -> bool {
    (config >> (n - site)) & 1 == 1
}

/// Two-site configuration of bond (k, k+1) in the local basis order.
pub fn bond_state(config: usize, n: usize, k: usize) -> usize {
    (config >> (n - k - 1)) & 3
}

/// Replace the pair at bond (k, k+1) by `local`.
pub fn with_bond_state(config: usize, n: usize, k: usize, local: usize) -> usize {
    let shift = n - k - 1;
    (config & !(3 << shift)) | (local << shift)
}

pub fn bitstring(config: usize, n: usize) -> String {
    (1..=n).map(|s| if occupied(config, n, s) { '1' } else { '0' }).collect()
}

pub fn config_from_occupancy(occ: &[bool]) -> usize {
    occ.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

/// Column-compressed generator: off-diagonal rates per source configuration
/// plus the diagonal.
#[derive(Debug, Clone)]
pub struct SparseGenerator {
    sites: usize,
    columns: Vec<Vec<(usize, f64)>>,
    diagonal: Vec<f64>,
}

impl SparseGenerator {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Off-diagonal (target, rate) pairs leaving `source`.
    pub fn column(&self, source: usize) -> &[(usize, f64)] {
        &self.columns[source]
    }

    pub fn trace(&self) -> f64 {
        self.diagonal.iter().sum()
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum::<usize>() + self.dim()
    }

    pub fn max_column_sum(&self) -> f64 {
        (0..self.dim())
            .map(|c| (self.diagonal[c] + self.columns[c].iter().map(|e| e.1).sum::<f64>()).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_off_diagonal(&self) -> f64 {
        self.columns.iter().flatten().map(|e| e.1).fold(f64::INFINITY, f64::min)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.diagonal.iter().zip(x).map(|(d, v)| d * v).collect();
        for (src, col) in self.columns.iter().enumerate() {
            for &(tgt, rate) in col {
                y[tgt] += rate * x[src];
            }
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for c in 0..n {
            m[(c, c)] = self.diagonal[c];
            for &(r, v) in &self.columns[c] {
                m[(r, c)] += v;
            }
        }
        m
    }
}

fn assemble_from_bonds(n: usize, bonds: &[LocalOperator]) -> SparseGenerator {
    let dim = 1usize << n;
    let mut columns = Vec::with_capacity(dim);
    let mut diagonal = Vec::with_capacity(dim);
    let mut scratch: Vec<(usize, f64)> = Vec::new();
    for src in 0..dim {
        let mut diag = 0.0;
        scratch.clear();
        for (i, op) in bonds.iter().enumerate() {
            let k = i + 1;
            let local = bond_state(src, n, k);
            diag += op.entry(local, local);
            for tgt_local in 0..4 {
                let rate = op.entry(tgt_local, local);
                if tgt_local != local && rate != 0.0 {
                    scratch.push((with_bond_state(src, n, k, tgt_local), rate));
                }
            }
        }
        // distinct bonds can reach the same target; merge them
        scratch.sort_by_key(|e| e.0);
        let mut col: Vec<(usize, f64)> = Vec::with_capacity(scratch.len());
        for &(t, r) in &scratch {
            match col.last_mut() {
                Some(last) if last.0 == t => last.1 += r,
                _ => col.push((t, r)),
            }
        }
        columns.push(col);
        diagonal.push(diag);
    }
    SparseGenerator { sites: n, columns, diagonal }
}

/// Sum over bonds of the identity-padded bond operators.
pub fn assemble_generator(spec: &ChainSpec) -> Result<SparseGenerator> {
    let n = spec.sites();
    if n > MAX_ASSEMBLY_SITES {
        return Err(Error::SizeGuard { what: "sites", value: n, limit: MAX_ASSEMBLY_SITES });
    }
    Ok(assemble_from_bonds(n, &spec.bond_operators()?))
}

#[derive(Debug, Clone)]
pub struct BruteSpectrum {
    /// Sorted by real part, descending.
    pub eigenvalues: Vec<Complex64>,
    pub max_imag: f64,
}

pub fn brute_force_spectrum(gen: &SparseGenerator) -> Result<BruteSpectrum> {
    if gen.dim() > MAX_DENSE_DIM {
        return Err(Error::SizeGuard { what: "dimension", value: gen.dim(), limit: MAX_DENSE_DIM });
    }
    let mut eigenvalues = dense_eigenvalues(gen.to_dense())?;
    sort_descending(&mut eigenvalues);
    let max_imag = eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(BruteSpectrum { eigenvalues, max_imag })
}

/// Closed communicating classes of the transition graph, each sorted.
pub fn closed_classes(gen: &SparseGenerator) -> Vec<Vec<usize>> {
    let mut graph = DiGraph::<(), ()>::with_capacity(gen.dim(), gen.nnz());
    let nodes: Vec<_> = (0..gen.dim()).map(|_| graph.add_node(())).collect();
    for (src, col) in gen.columns.iter().enumerate() {
        for &(tgt, rate) in col {
            if rate > 0.0 {
                graph.add_edge(nodes[src], nodes[tgt], ());
            }
        }
    }
    let mut comp = vec![usize::MAX; gen.dim()];
    let sccs = tarjan_scc(&graph);
    for (id, scc) in sccs.iter().enumerate() {
        for v in scc {
            comp[v.index()] = id;
        }
    }
    let mut classes: Vec<Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|(id, scc)| {
            scc.iter().all(|v| gen.columns[v.index()].iter().all(|&(t, r)| r <= 0.0 || comp[t] == *id))
        })
        .map(|(_, scc)| {
            let mut c: Vec<usize> = scc.iter().map(|v| v.index()).collect();
            c.sort_unstable();
            c
        })
        .collect();
    classes.sort();
    classes
}

/// Stationary distribution restricted to one closed class.
fn class_stationary(gen: &SparseGenerator, class: &[usize]) -> Result<Vec<f64>> {
    let k = class.len();
    let mut pos = vec![usize::MAX; gen.dim()];
    for (i, &c) in class.iter().enumerate() {
        pos[c] = i;
    }
    let mut a = DMatrix::zeros(k, k);
    for (j, &src) in class.iter().enumerate() {
        a[(j, j)] = gen.diagonal[src];
        for &(tgt, rate) in &gen.columns[src] {
            a[(pos[tgt], j)] += rate;
        }
    }
    // replace one balance equation by normalization
    for j in 0..k {
        a[(k - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(k);
    rhs[k - 1] = 1.0;
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Consistency("singular balance equations in a closed class".into()))?;
    let mut out = vec![0.0; gen.dim()];
    for (i, &c) in class.iter().enumerate() {
        out[c] = sol[i].max(0.0);
    }
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= total);
    Ok(out)
}

/// A basis of the null space: one probability vector per closed class.
pub fn stationary_vectors(gen: &SparseGenerator) -> Result<Vec<Vec<f64>>> {
    if gen.dim() > MAX_DENSE_DIM {
        return Err(Error::SizeGuard { what: "dimension", value: gen.dim(), limit: MAX_DENSE_DIM });
    }
    closed_classes(gen).iter().map(|c| class_stationary(gen, c)).collect()
}

/// Numerical rank deficiency of the dense generator: singular values below
/// 1e-9·σ_max.
pub fn null_space_dimension(gen: &SparseGenerator) -> Result<usize> {
    if gen.dim() > MAX_DENSE_DIM {
        return Err(Error::SizeGuard { what: "dimension", value: gen.dim(), limit: MAX_DENSE_DIM });
    }
    let sv = gen.to_dense().singular_values();
    let cut = 1e-9 * sv.max();
    Ok(sv.iter().filter(|&&s| s <= cut).count())
}
