#![allow(dead_code)]

//! Brute-force dense oracles and random instances shared by the test targets.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use steklov_core::geom::Point;
use steklov_core::linalg::{
    jacobi_eigh, schur_complement, spd_solve, DenseSymMatrix, SparseSymMatrix,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sparse-ish SPD matrix: random symmetric pattern made diagonally dominant.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..i {
            if rng.gen_bool(0.5) {
                let v = rng.gen_range(-1.0..1.0);
                a[i][j] = v;
                a[j][i] = v;
            }
        }
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| a[i][j].abs()).sum();
        a[i][i] = off + rng.gen_range(0.1..2.0);
    }
    a
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let v = rng.gen_range(-1.0..1.0);
            a[i][j] = v;
            a[j][i] = v;
        }
    }
    a
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &bi)| {
        let mut r = r.clone();
        r.push(bi);
        r
    }).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..=n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    x
}

pub fn dense_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| gauss_solve(a, &(0..n).map(|i| (i == j) as u8 as f64).collect::<Vec<_>>()))
        .collect();
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

/// Number of eigenvalues below `sigma`, by Sylvester's law of inertia on the
/// pivots of `A − σI`.
fn count_below(a: &[Vec<f64>], sigma: f64) -> usize {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= sigma;
    }
    let mut count = 0;
    for c in 0..n {
        let mut piv = m[c][c];
        if piv.abs() < 1e-300 {
            piv = -1e-300;
            m[c][c] = piv;
        }
        if piv < 0.0 {
            count += 1;
        }
        for r in c + 1..n {
            let f = m[r][c] / piv;
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    count
}

/// Eigenvalues in ascending order by inertia bisection.
pub fn bisection_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let bound = a.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max) + 1.0;
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(a, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo < 1e-15 * bound {
                    break;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// `K_bb − K_bi K_ii⁻¹ K_ib` by explicit inversion.
pub fn dense_schur(k: &[Vec<f64>], interior: &[usize], boundary: &[usize]) -> Vec<Vec<f64>> {
    let kii: Vec<Vec<f64>> = interior.iter().map(|&i| interior.iter().map(|&j| k[i][j]).collect()).collect();
    let inv = dense_inverse(&kii);
    boundary
        .iter()
        .map(|&a| {
            boundary
                .iter()
                .map(|&b| {
                    let mut s = k[a][b];
                    for (p, &i) in interior.iter().enumerate() {
                        for (q, &j) in interior.iter().enumerate() {
                            s -= k[a][i] * inv[p][q] * k[j][b];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Worst errors of the three solvers against the oracles on one random
/// instance of dimension 5..=10: `[solve, eigen, schur]`, each relative to
/// the size of the data.
pub fn linalg_oracle_errors(seed: u64) -> [f64; 3] {
    let mut r = rng(seed);
    let n = r.gen_range(5..=10);

    let a = random_spd(&mut r, n);
    let b: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
    let x = spd_solve(&SparseSymMatrix::from_dense(&a), &b).unwrap();
    let x_ref = gauss_solve(&a, &b);
    let solve_err = max_diff(&x, &x_ref) / x_ref.iter().fold(1.0f64, |m, v| m.max(v.abs()));

    let s = random_symmetric(&mut r, n);
    let eig = jacobi_eigh(&DenseSymMatrix::from_rows(&s)).unwrap();
    let eig_ref = bisection_eigenvalues(&s);
    let mut eig_err = max_diff(&eig.eigenvalues, &eig_ref);
    for (l, v) in eig.eigenvalues.iter().zip(&eig.eigenvectors) {
        let av: Vec<f64> = s.iter().map(|row| row.iter().zip(v).map(|(p, q)| p * q).sum()).collect();
        let res = av.iter().zip(v).map(|(p, q)| (p - l * q).abs()).fold(0.0, f64::max);
        eig_err = eig_err.max(res);
    }

    let k = random_spd(&mut r, n);
    let nb = r.gen_range(2..n - 1);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        idx.swap(i, r.gen_range(0..=i));
    }
    let (boundary, interior) = idx.split_at(nb);
    let sc = schur_complement(&SparseSymMatrix::from_dense(&k), interior, boundary).unwrap();
    let sc_ref = dense_schur(&k, interior, boundary);
    let scale = k.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut schur_err: f64 = 0.0;
    for (i, row) in sc_ref.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            schur_err = schur_err.max((sc.get(i, j) - v).abs() / scale);
        }
    }
    [solve_err, eig_err, schur_err]
}

/// Pearson correlation.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Separation-of-variables Steklov spectrum of the unit disk: `0, 1, 1, 2, 2, …`.
pub fn disk_spectrum(k: usize) -> Vec<f64> {
    (0..k).map(|i| ((i + 1) / 2) as f64).collect()
}

/// Sloshing eigenvalue `w coth(w d)` with `w = kπ/L`.
pub fn sloshing(length: f64, depth: f64, k: u32) -> f64 {
    let w = k as f64 * std::f64::consts::PI / length;
    w * (w * depth).cosh() / (w * depth).sinh()
}

pub fn p(x: f64, y: f64) -> Point {
    Point::new(x, y)
}
