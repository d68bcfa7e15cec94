use super::dense::{DenseCholesky, DenseSymMatrix};
use crate::error::{Error, Result};

/// Ascending eigenvalues with matching eigenvectors (`eigenvectors[i]`
/// belongs to `eigenvalues[i]`).
#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
}

impl EigenDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Keeps the `k` smallest pairs.
    pub fn truncate(&mut self, k: usize) {
        self.eigenvalues.truncate(k);
        self.eigenvectors.truncate(k);
    }
}

pub const MAX_SWEEPS: usize = 50;
const OFF_TOL: f64 = 1e-12;

/// Cyclic Jacobi eigensolver for a dense symmetric matrix.
pub fn jacobi_eigh(a: &DenseSymMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    let mut a = a.clone();
    a.symmetrize();
    let scale = a.frobenius();
    let mut vt = DenseSymMatrix::identity(n);
    let off_norm = |a: &DenseSymMatrix| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..i {
                s += 2.0 * a.get(i, j) * a.get(i, j);
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= OFF_TOL * scale || scale == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NonConvergence { sweeps, off_norm: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut vt, p, q, sweeps);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).total_cmp(&a.get(j, j)).then(i.cmp(&j)));
    Ok(EigenDecomposition {
        eigenvalues: order.iter().map(|&i| a.get(i, i)).collect(),
        eigenvectors: order.iter().map(|&i| vt.row(i).to_vec()).collect(),
    })
}

/// Annihilates `a[p][q]`; `vt` accumulates the rotations row-wise.
fn rotate(a: &mut DenseSymMatrix, vt: &mut DenseSymMatrix, p: usize, q: usize, sweep: usize) {
    let n = a.dim();
    let apq = a.get(p, q);
    if apq == 0.0 {
        return;
    }
    let (app, aqq) = (a.get(p, p), a.get(q, q));
    // Late sweeps: entries below rounding of both diagonals are dropped.
    if sweep > 4 && apq.abs() * 1e17 < app.abs().min(aqq.abs()) {
        a.set_sym(p, q, 0.0);
        return;
    }
    let tau = (aqq - app) / (2.0 * apq);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    {
        let data = a.data_mut();
        for k in 0..n {
            if k == p || k == q {
                continue;
            }
            let akp = data[p * n + k];
            let akq = data[q * n + k];
            let np = c * akp - s * akq;
            let nq = s * akp + c * akq;
            data[p * n + k] = np;
            data[k * n + p] = np;
            data[q * n + k] = nq;
            data[k * n + q] = nq;
        }
        data[p * n + p] = app - t * apq;
        data[q * n + q] = aqq + t * apq;
        data[p * n + q] = 0.0;
        data[q * n + p] = 0.0;
    }
    let v = vt.data_mut();
    for k in 0..n {
        let vp = v[p * n + k];
        let vq = v[q * n + k];
        v[p * n + k] = c * vp - s * vq;
        v[q * n + k] = s * vp + c * vq;
    }
}

/// Solves `S v = λ M v` for diagonal positive `M`; eigenvectors are
/// `M`-orthonormal.
pub fn generalized_eigh(s: &DenseSymMatrix, m: &[f64]) -> Result<EigenDecomposition> {
    let n = s.dim();
    if m.len() != n {
        return Err(Error::InvalidInput(format!("mass has {} entries, matrix {n}", m.len())));
    }
    if let Some(bad) = m.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::InvalidInput(format!("mass entry {bad} is not positive")));
    }
    let r: Vec<f64> = m.iter().map(|x| 1.0 / x.sqrt()).collect();
    let a = DenseSymMatrix::from_fn(n, |i, j| s.get(i, j) * r[i] * r[j]);
    let mut eig = jacobi_eigh(&a)?;
    for v in &mut eig.eigenvectors {
        for (x, ri) in v.iter_mut().zip(&r) {
            *x *= ri;
        }
    }
    Ok(eig)
}

/// Solves `S v = λ M v` for dense symmetric positive definite `M` through
/// `L⁻¹ S L⁻ᵀ` with `M = L Lᵀ`.
pub fn generalized_eigh_dense(s: &DenseSymMatrix, m: &DenseSymMatrix) -> Result<EigenDecomposition> {
    let n = s.dim();
    if m.dim() != n {
        return Err(Error::InvalidInput("mass and stiffness dimensions differ".into()));
    }
    let l = DenseCholesky::factor(m)?;
    // Column i of L⁻¹ S.
    let x: Vec<Vec<f64>> = (0..n).map(|i| l.solve_lower(s.row(i))).collect();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| l.solve_lower(&(0..n).map(|i| x[i][j]).collect::<Vec<_>>()))
        .collect();
    let c = DenseSymMatrix::from_fn(n, |i, j| cols[j][i]);
    let mut eig = jacobi_eigh(&c)?;
    for v in &mut eig.eigenvectors {
        *v = l.solve_upper(v);
    }
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_spectrum() {
        let e = jacobi_eigh(&DenseSymMatrix::identity(5)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0; 5]);
    }

    #[test]
    fn swap_matrix() {
        let e = jacobi_eigh(&DenseSymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_generalized() {
        let s = DenseSymMatrix::from_diagonal(&[0.0, 2.0]);
        let e = generalized_eigh(&s, &[1.0, 2.0]).unwrap();
        assert_eq!(e.eigenvalues[0], 0.0);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-15);
        let e2 = generalized_eigh_dense(&s, &DenseSymMatrix::from_diagonal(&[1.0, 2.0])).unwrap();
        assert!((e2.eigenvalues[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_mass_rejected() {
        let s = DenseSymMatrix::identity(2);
        assert!(generalized_eigh(&s, &[1.0, 0.0]).is_err());
    }
}
