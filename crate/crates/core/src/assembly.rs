//! Local element contributions and the sparse containers they are assembled into.

use crate::jet::Jet;

/// Value, gradient and dense Hessian of one element term over a few global variables.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTerm {
    pub vars: Vec<usize>,
    pub value: f64,
    pub grad: Vec<f64>,
    /// Row-major `vars.len() x vars.len()`.
    pub hess: Vec<f64>,
}

impl LocalTerm {
    pub fn from_jet<const N: usize>(vars: Vec<usize>, jet: &Jet<N>) -> Self {
        let k = vars.len();
        debug_assert!(k <= N);
        let mut hess = Vec::with_capacity(k * k);
        for i in 0..k {
            // symmetrize: jet arithmetic keeps h symmetric up to rounding only
            for j in 0..k {
                hess.push(0.5 * (jet.h[i][j] + jet.h[j][i]));
            }
        }
        Self {
            vars,
            value: jet.v,
            grad: jet.g[..k].to_vec(),
            hess,
        }
    }

    /// Global variable indices `2v, 2v+1` for each vertex in order.
    pub fn vertex_vars(vertices: &[usize]) -> Vec<usize> {
        vertices.iter().flat_map(|&v| [2 * v, 2 * v + 1]).collect()
    }
}

/// Coordinate-format sparse matrix; duplicates are summed on conversion.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Triplets {
    pub n_rows: usize,
    pub n_cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.n_rows && c < self.n_cols);
        self.entries.push((r, c, v));
    }

    pub fn extend_scaled(&mut self, other: &Triplets, s: f64) {
        self.entries.extend(other.entries.iter().map(|&(r, c, v)| (r, c, s * v)));
    }

    pub fn to_csr(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(self)
    }
}

/// Compressed sparse row matrix with sorted, unique column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicates in input order, so equal inputs give bit-identical matrices.
    pub fn from_triplets(t: &Triplets) -> Self {
        let mut order: Vec<usize> = (0..t.entries.len()).collect();
        order.sort_by_key(|&k| (t.entries[k].0, t.entries[k].1));
        let mut indptr = vec![0; t.n_rows + 1];
        let mut indices = Vec::with_capacity(order.len());
        let mut values: Vec<f64> = Vec::with_capacity(order.len());
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (r, c, v) = t.entries[k];
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..t.n_rows {
            indptr[r + 1] += indptr[r];
        }
        Self {
            n_rows: t.n_rows,
            n_cols: t.n_cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(cc, _)| cc == c).map_or(0.0, |(_, v)| v)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    /// `A^T x`.
    pub fn tmatvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        for r in 0..self.n_rows {
            for (c, v) in self.row(r) {
                out[c] += v * x[r];
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (r, c, v) in self.iter() {
            d[r][c] += v;
        }
        d
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        self.iter().map(|(r, c, v)| (v - self.get(c, r)).abs()).fold(0.0, f64::max)
    }
}

/// Objective value with gradient and Hessian in the flattened configuration `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyTerm {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Triplets,
}

impl EnergyTerm {
    pub fn zero(n_vars: usize) -> Self {
        Self {
            value: 0.0,
            grad: vec![0.0; n_vars],
            hess: Triplets::new(n_vars, n_vars),
        }
    }

    /// Adds `scale * term` for every local term, in order.
    pub fn accumulate(&mut self, terms: &[LocalTerm], scale: f64) {
        for t in terms {
            self.value += scale * t.value;
            let k = t.vars.len();
            for (a, &va) in t.vars.iter().enumerate() {
                self.grad[va] += scale * t.grad[a];
                for (b, &vb) in t.vars.iter().enumerate() {
                    let h = t.hess[a * k + b];
                    if h != 0.0 {
                        self.hess.push(va, vb, scale * h);
                    }
                }
            }
        }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, other: &EnergyTerm, s: f64) {
        self.value += s * other.value;
        for (g, o) in self.grad.iter_mut().zip(&other.grad) {
            *g += s * o;
        }
        self.hess.extend_scaled(&other.hess, s);
    }
}

pub fn flatten(y: &[[f64; 2]]) -> Vec<f64> {
    y.iter().flat_map(|p| *p).collect()
}

pub fn unflatten(x: &[f64]) -> Vec<[f64; 2]> {
    x.chunks_exact(2).map(|c| [c[0], c[1]]).collect()
}

pub fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csr_sums_duplicates() {
        let mut t = Triplets::new(2, 3);
        t.push(1, 2, 1.0);
        t.push(0, 0, 2.0);
        t.push(1, 2, 0.5);
        let m = t.to_csr();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(1, 2), 1.5);
        assert_eq!(m.matvec(&[1.0, 1.0, 2.0]), vec![2.0, 3.0]);
        assert_eq!(m.tmatvec(&[1.0, 2.0]), vec![2.0, 0.0, 3.0]);
    }

    #[test]
    fn flatten_roundtrip() {
        let y = vec![[1.0, 2.0], [3.0, 4.0]];
        assert_eq!(unflatten(&flatten(&y)), y);
    }
}
