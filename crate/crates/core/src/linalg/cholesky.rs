use std::collections::VecDeque;

use super::sparse::SparseSymMatrix;
use crate::error::{Error, Result};

/// Reverse Cuthill-McKee ordering of the matrix graph; `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &SparseSymMatrix) -> Vec<usize> {
    let n = a.dim();
    let adj: Vec<Vec<usize>> = a
        .full_rows()
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.into_iter().map(|e| e.0).filter(|&j| j != i).collect())
        .collect();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adj, &degree);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (degree[w], w));
            for w in nb {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Last vertex of the deepest BFS level, iterated while eccentricity grows.
fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize]) -> usize {
    let mut start = seed;
    let mut best_depth = 0;
    for _ in 0..8 {
        let (depth, last_level) = bfs_levels(start, adj);
        if depth <= best_depth && best_depth > 0 {
            break;
        }
        best_depth = depth;
        let next = *last_level.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
        if next == start {
            break;
        }
        start = next;
    }
    start
}

fn bfs_levels(start: usize, adj: &[Vec<usize>]) -> (usize, Vec<usize>) {
    let mut level = std::collections::HashMap::new();
    level.insert(start, 0usize);
    let mut frontier = vec![start];
    let mut depth = 0;
    loop {
        let mut next = Vec::new();
        for &v in &frontier {
            for &w in &adj[v] {
                if let std::collections::hash_map::Entry::Vacant(e) = level.entry(w) {
                    e.insert(depth + 1);
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return (depth, frontier);
        }
        depth += 1;
        frontier = next;
    }
}

/// Cholesky factor `L` of a symmetric positive definite matrix stored over
/// its row envelope after a bandwidth-reducing permutation.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    first: Vec<usize>,
    row_start: Vec<usize>,
    values: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &SparseSymMatrix) -> Result<Self> {
        Self::factor_with_order(a, reverse_cuthill_mckee(a))
    }

    pub fn factor_with_order(a: &SparseSymMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.dim();
        assert_eq!(perm.len(), n);
        let mut inv_perm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv_perm[old] = new;
        }
        let rows = a.full_rows();
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for &(j, _) in &rows[old] {
                first[new] = first[new].min(inv_perm[j]);
            }
        }
        let mut row_start = Vec::with_capacity(n + 1);
        row_start.push(0);
        for i in 0..n {
            row_start.push(row_start[i] + i - first[i] + 1);
        }
        let mut values = vec![0.0; row_start[n]];
        for (new, &old) in perm.iter().enumerate() {
            for &(j, v) in &rows[old] {
                let jn = inv_perm[j];
                if jn <= new {
                    values[row_start[new] + jn - first[new]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let (done, rest) = values.split_at_mut(row_start[i]);
            let row = &mut rest[..i - fi + 1];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let lj = &done[row_start[j]..row_start[j + 1]];
                let s: f64 = row[k0 - fi..j - fi]
                    .iter()
                    .zip(&lj[k0 - fj..j - fj])
                    .map(|(x, y)| x * y)
                    .sum();
                row[j - fi] = (row[j - fi] - s) / lj[j - fj];
            }
            let off = &row[..i - fi];
            let d = row[i - fi] - off.iter().map(|x| x * x).sum::<f64>();
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { row: perm[i], pivot: d });
            }
            row[i - fi] = d.sqrt();
        }
        Ok(Self { n, perm, first, row_start, values })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.values[self.row_start[i]..self.row_start[i + 1]]
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        let start = y.iter().position(|&v| v != 0.0).unwrap_or(self.n);
        for i in start..self.n {
            let fi = self.first[i].max(start);
            let row = self.row(i);
            let off = self.first[i];
            let s: f64 = row[fi - off..i - off].iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - s) / row[i - off];
        }
        for i in (0..self.n).rev() {
            let row = self.row(i);
            let off = self.first[i];
            let xi = y[i] / row[i - off];
            y[i] = xi;
            if xi != 0.0 {
                for (k, l) in (off..i).zip(row) {
                    y[k] -= l * xi;
                }
            }
        }
        let mut x = vec![0.0; self.n];
        for (new, v) in y.into_iter().enumerate() {
            x[self.perm[new]] = v;
        }
        x
    }
}

/// Solves `A x = b` for symmetric positive definite `A`.
pub fn spd_solve(a: &SparseSymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    Ok(EnvelopeCholesky::factor(a)?.solve(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> SparseSymMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i + 1, i, -1.0));
            }
        }
        SparseSymMatrix::from_triplets(n, t)
    }

    #[test]
    fn identity_and_diagonal() {
        let b = [3.0, -1.0, 0.5];
        assert_eq!(spd_solve(&SparseSymMatrix::identity(3), &b).unwrap(), b.to_vec());
        let d = SparseSymMatrix::from_triplets(3, [(0, 0, 1.0), (1, 1, 2.0), (2, 2, 4.0)]);
        let x = spd_solve(&d, &[1.0, 2.0, 4.0]).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn tridiagonal_residual() {
        let a = laplacian_1d(200);
        let b: Vec<f64> = (0..200).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = spd_solve(&a, &b).unwrap();
        let r: Vec<f64> = a.mul_vec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(super::super::norm(&r) <= 1e-10 * super::super::norm(&b));
    }

    #[test]
    fn indefinite_is_rejected() {
        let a = SparseSymMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(
            EnvelopeCholesky::factor(&a),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = laplacian_1d(50);
        let mut p = reverse_cuthill_mckee(&a);
        p.sort_unstable();
        assert_eq!(p, (0..50).collect::<Vec<_>>());
    }
}
