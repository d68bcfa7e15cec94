use super::cholesky::EnvelopeCholesky;
use super::dense::DenseSymMatrix;
use super::sparse::SparseSymMatrix;
use crate::error::Result;

/// Elimination of the `interior` unknowns of `K` onto `boundary`. Indices in
/// neither list are dropped (homogeneous Dirichlet rows and columns).
#[derive(Clone, Debug)]
pub struct SchurReduction {
    pub interior: Vec<usize>,
    pub boundary: Vec<usize>,
    /// `K_bb − K_bi K_ii⁻¹ K_ib`.
    pub s: DenseSymMatrix,
    factor: Option<EnvelopeCholesky>,
    /// Column `j` of `K_ib` as `(interior position, value)` pairs.
    k_ib: Vec<Vec<(usize, f64)>>,
}

impl SchurReduction {
    pub fn new(k: &SparseSymMatrix, interior: &[usize], boundary: &[usize]) -> Result<Self> {
        let n = k.dim();
        let (mut ipos, mut bpos) = (vec![usize::MAX; n], vec![usize::MAX; n]);
        for (p, &i) in interior.iter().enumerate() {
            ipos[i] = p;
        }
        for (p, &b) in boundary.iter().enumerate() {
            bpos[b] = p;
        }
        let nb = boundary.len();
        let mut kbb = DenseSymMatrix::zeros(nb);
        let mut k_ib: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nb];
        for r in 0..n {
            for (c, v) in k.lower_row(r) {
                match (bpos[r], bpos[c], ipos[r], ipos[c]) {
                    (br, bc, _, _) if br != usize::MAX && bc != usize::MAX => kbb.set_sym(br, bc, v),
                    (br, _, _, ic) if br != usize::MAX && ic != usize::MAX => k_ib[br].push((ic, v)),
                    (_, bc, ir, _) if bc != usize::MAX && ir != usize::MAX => k_ib[bc].push((ir, v)),
                    _ => {}
                }
            }
        }
        let factor = if interior.is_empty() {
            None
        } else {
            Some(EnvelopeCholesky::factor(&k.principal_submatrix(interior))?)
        };
        let mut reduction = Self {
            interior: interior.to_vec(),
            boundary: boundary.to_vec(),
            s: kbb,
            factor,
            k_ib,
        };
        if let Some(f) = &reduction.factor {
            let ni = interior.len();
            let k_ib = &reduction.k_ib;
            let columns = super::map_indices(nb, |j| {
                let mut rhs = vec![0.0; ni];
                for &(i, v) in &k_ib[j] {
                    rhs[i] = v;
                }
                let x = f.solve(&rhs);
                k_ib.iter()
                    .map(|col| col.iter().map(|&(i, v)| v * x[i]).sum::<f64>())
                    .collect::<Vec<f64>>()
            });
            for (j, col) in columns.iter().enumerate() {
                for (b, v) in col.iter().enumerate() {
                    let cur = reduction.s.get(b, j);
                    reduction.s.set(b, j, cur - v);
                }
            }
            reduction.s.symmetrize();
        }
        Ok(reduction)
    }

    /// Interior values `x_i = −K_ii⁻¹ K_ib x_b` of the discrete harmonic
    /// extension of boundary data `x_b`.
    pub fn extend(&self, x_b: &[f64]) -> Vec<f64> {
        let Some(f) = &self.factor else {
            return Vec::new();
        };
        let mut rhs = vec![0.0; self.interior.len()];
        for (col, &xb) in self.k_ib.iter().zip(x_b) {
            for &(i, v) in col {
                rhs[i] -= v * xb;
            }
        }
        f.solve(&rhs)
    }

    /// Full-length vector (length `n`) with boundary data, its extension, and
    /// zeros on dropped indices.
    pub fn assemble_full(&self, n: usize, x_b: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; n];
        for (&b, &v) in self.boundary.iter().zip(x_b) {
            full[b] = v;
        }
        for (&i, v) in self.interior.iter().zip(self.extend(x_b)) {
            full[i] = v;
        }
        full
    }
}

/// `K_bb − K_bi K_ii⁻¹ K_ib` as a dense matrix.
pub fn schur_complement(
    k: &SparseSymMatrix,
    interior: &[usize],
    boundary: &[usize],
) -> Result<DenseSymMatrix> {
    Ok(SchurReduction::new(k, interior, boundary)?.s)
}
