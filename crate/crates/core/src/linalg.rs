//! Sparse complex matrices and exponential actions.
//!
//! Register-wide operators are stored in compressed sparse row form. The
//! propagator splits a Hermitian matrix into the connected components of its
//! sparsity graph and diagonalizes each one densely; conserved quantities keep
//! those components small.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Blocks larger than this are exponentiated by a Taylor action instead of a
/// dense eigendecomposition.
pub const DEFAULT_EIG_THRESHOLD: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

impl CsrMatrix {
    pub fn zeros(n: usize) -> Self {
        CsrMatrix { n, indptr: vec![0; n + 1], indices: Vec::new(), data: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![ONE; n],
        }
    }

    pub fn diagonal(d: &[C64]) -> Self {
        Self::from_triplets(d.len(), d.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Duplicates are summed; exact zeros are dropped.
    pub fn from_triplets<T>(n: usize, triplets: T) -> Self
    where
        T: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut t: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        t.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut data: Vec<C64> = Vec::with_capacity(t.len());
        let mut rows = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            assert!(r < n && c < n, "triplet ({r},{c}) outside {n}x{n}");
            if let (Some(&lr), Some(&lc)) = (rows.last(), indices.last()) {
                if lr == r && lc == c {
                    *data.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            indices.push(c);
            data.push(v);
        }
        let mut keep_rows = Vec::with_capacity(rows.len());
        let mut keep_idx = Vec::with_capacity(rows.len());
        let mut keep_data = Vec::with_capacity(rows.len());
        for ((r, c), v) in rows.into_iter().zip(indices).zip(data) {
            if v != ZERO {
                keep_rows.push(r);
                keep_idx.push(c);
                keep_data.push(v);
            }
        }
        for &r in &keep_rows {
            indptr[r + 1] += 1;
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix { n, indptr, indices: keep_idx, data: keep_data }
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let n = m.nrows();
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = m[(i, j)];
                if v != ZERO {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, t)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.data[r].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.data[r.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.n];
        self.matvec_add(ONE, x, &mut y);
        y
    }

    /// y += alpha · A x
    pub fn matvec_add(&self, alpha: C64, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            *yi += alpha * acc;
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        if c == ZERO {
            return Self::zeros(self.n);
        }
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self::from_triplets(self.n, self.triplets().chain(other.triplets()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-ONE))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.n, self.triplets().map(|(i, j, v)| (j, i, v.conj())))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut t = Vec::new();
        for i in 0..self.n {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    t.push((i, j, a * b));
                }
            }
        }
        Self::from_triplets(self.n, t)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (max column sum).
    pub fn one_norm(&self) -> f64 {
        let mut col = vec![0.0; self.n];
        for (_, j, v) in self.triplets() {
            col[j] += v.norm();
        }
        col.into_iter().fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        self.sub(&self.adjoint()).max_abs()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.n, self.n, ZERO);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn diagonal_values(&self) -> Vec<C64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn submatrix_dense(&self, idx: &[usize]) -> DMatrix<C64> {
        let mut pos = std::collections::HashMap::with_capacity(idx.len());
        for (k, &i) in idx.iter().enumerate() {
            pos.insert(i, k);
        }
        let mut m = DMatrix::from_element(idx.len(), idx.len(), ZERO);
        for (a, &i) in idx.iter().enumerate() {
            for (j, v) in self.row(i) {
                if let Some(&b) = pos.get(&j) {
                    m[(a, b)] += v;
                }
            }
        }
        m
    }

    fn submatrix_sparse(&self, idx: &[usize]) -> CsrMatrix {
        let mut pos = std::collections::HashMap::with_capacity(idx.len());
        for (k, &i) in idx.iter().enumerate() {
            pos.insert(i, k);
        }
        let mut t = Vec::new();
        for (a, &i) in idx.iter().enumerate() {
            for (j, v) in self.row(i) {
                if let Some(&b) = pos.get(&j) {
                    t.push((a, b, v));
                }
            }
        }
        CsrMatrix::from_triplets(idx.len(), t)
    }

    /// Connected components of the (symmetrized) sparsity graph, each sorted.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (i, j, _) in self.triplets() {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..self.n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        groups.into_values().collect()
    }
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn diff_norm(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// exp(−i t A) x by a scaled Taylor series. `apply` computes y = A x and
/// `norm_bound` must bound ‖A‖.
pub fn expm_action<F>(apply: F, norm_bound: f64, t: f64, x: &[C64]) -> Vec<C64>
where
    F: Fn(&[C64], &mut [C64]),
{
    let n = x.len();
    let s = ((norm_bound * t.abs()).ceil() as usize).max(1);
    let h = t / s as f64;
    let mut out = x.to_vec();
    let mut term = vec![ZERO; n];
    let mut next = vec![ZERO; n];
    for _ in 0..s {
        term.copy_from_slice(&out);
        let mut acc = out.clone();
        let scale = norm(&acc).max(1e-300);
        let mut small = 0;
        for k in 1..200 {
            next.iter_mut().for_each(|v| *v = ZERO);
            apply(&term, &mut next);
            let c = C64::new(0.0, -h / k as f64);
            for (tv, nv) in term.iter_mut().zip(&next) {
                *tv = c * nv;
            }
            for (a, tv) in acc.iter_mut().zip(&term) {
                *a += tv;
            }
            if norm(&term) <= 1e-17 * scale {
                small += 1;
                if small == 2 {
                    break;
                }
            } else {
                small = 0;
            }
        }
        out = acc;
    }
    out
}

#[derive(Debug, Clone)]
enum Block {
    Phase { index: usize, energy: f64 },
    Eig { idx: Vec<usize>, vals: DVector<f64>, vecs: DMatrix<C64> },
    Large { idx: Vec<usize>, h: CsrMatrix, norm: f64 },
}

/// Cached block eigendecomposition of a Hermitian matrix; applies exp(−iHt).
#[derive(Debug, Clone)]
pub struct Propagator {
    n: usize,
    blocks: Vec<Block>,
}

impl Propagator {
    pub fn new(h: &CsrMatrix) -> Self {
        Self::with_threshold(h, DEFAULT_EIG_THRESHOLD)
    }

    pub fn with_threshold(h: &CsrMatrix, threshold: usize) -> Self {
        let blocks = h
            .components()
            .into_iter()
            .map(|idx| {
                if idx.len() == 1 {
                    let i = idx[0];
                    Block::Phase { index: i, energy: h.get(i, i).re }
                } else if idx.len() <= threshold {
                    let m = h.submatrix_dense(&idx);
                    let eig = SymmetricEigen::new(m);
                    Block::Eig { idx, vals: eig.eigenvalues, vecs: eig.eigenvectors }
                } else {
                    let sub = h.submatrix_sparse(&idx);
                    let norm = sub.one_norm();
                    Block::Large { idx, h: sub, norm }
                }
            })
            .collect();
        Propagator { n: h.dim(), blocks }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn apply(&self, t: f64, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![ZERO; self.n];
        for b in &self.blocks {
            match b {
                Block::Phase { index, energy } => {
                    y[*index] = x[*index] * C64::from_polar(1.0, -energy * t);
                }
                Block::Eig { idx, vals, vecs } => {
                    let xs = DVector::from_iterator(idx.len(), idx.iter().map(|&i| x[i]));
                    let mut c = vecs.ad_mul(&xs);
                    for (k, ck) in c.iter_mut().enumerate() {
                        *ck *= C64::from_polar(1.0, -vals[k] * t);
                    }
                    let ys = vecs * c;
                    for (k, &i) in idx.iter().enumerate() {
                        y[i] = ys[k];
                    }
                }
                Block::Large { idx, h, norm } => {
                    let xs: Vec<C64> = idx.iter().map(|&i| x[i]).collect();
                    let ys = expm_action(|v, out| h.matvec_add(ONE, v, out), *norm, t, &xs);
                    for (k, &i) in idx.iter().enumerate() {
                        y[i] = ys[k];
                    }
                }
            }
        }
        y
    }

    /// All eigenvalues of the diagonalized blocks, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = Vec::with_capacity(self.n);
        for b in &self.blocks {
            match b {
                Block::Phase { energy, .. } => v.push(*energy),
                Block::Eig { vals, .. } => v.extend(vals.iter()),
                Block::Large { h, .. } => {
                    v.extend(SymmetricEigen::new(h.to_dense()).eigenvalues.iter())
                }
            }
        }
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }
}

/// exp(−i t H) for a dense Hermitian matrix.
pub fn expm_hermitian(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let mut d = v.clone();
    for (k, mut col) in d.column_iter_mut().enumerate() {
        col *= C64::from_polar(1.0, -eig.eigenvalues[k] * t);
    }
    d * v.adjoint()
}

pub fn dense_matvec(m: &DMatrix<C64>, x: &[C64]) -> Vec<C64> {
    let v = m * DVector::from_column_slice(x);
    v.iter().copied().collect()
}
