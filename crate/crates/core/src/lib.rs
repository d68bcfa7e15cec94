//! Finite element Steklov spectra, mixed Steklov-Dirichlet spectra and the
//! nodal geometry of their eigenfunctions on planar Lipschitz domains.

pub mod domain;
pub mod error;
pub mod experiments;
pub mod geom;
pub mod linalg;
pub mod mesh;
pub mod mixed;
pub mod nodal;
pub mod oracles;
pub mod steklov;

pub use error::{Error, Result};
