//! Sparse symmetric storage, envelope Cholesky, dense Jacobi eigensolver and
//! Schur-complement reduction.

mod cholesky;
mod dense;
mod eigen;
mod schur;
mod sparse;

pub use cholesky::{reverse_cuthill_mckee, spd_solve, EnvelopeCholesky};
pub use dense::{DenseCholesky, DenseSymMatrix};
pub use eigen::{generalized_eigh, generalized_eigh_dense, jacobi_eigh, EigenDecomposition};
pub use schur::{schur_complement, SchurReduction};
pub use sparse::SparseSymMatrix;

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is on.
pub(crate) fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
