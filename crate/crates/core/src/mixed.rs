//! Mixed Steklov-Dirichlet eigenproblem, Rayleigh quotients and the
//! boundary-ball upper bound `σ₁ ≤ C/s`.

use serde::{Deserialize, Serialize};

use crate::domain::{BoundaryBallRegion, PiecewiseLinear};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mesh::{triangulate, triangulate_region, Mark, MarkedPolygon, PlanarMesh};
use crate::steklov::{
    assemble_boundary_mass, assemble_consistent_boundary_mass, assemble_stiffness, DtnOperator,
    MassKind,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixedSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Vertices of Steklov edges not touching a Dirichlet edge.
    pub f_vertices: Vec<usize>,
    /// Full-mesh vectors, zero on Dirichlet vertices, `M_F`-orthonormal.
    pub eigenvectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

impl MixedSpectrum {
    /// `min u / max u` of the first eigenvector (sign fixed so max > 0).
    pub fn ground_state_sign_ratio(&self) -> f64 {
        let u = &self.eigenvectors[0];
        let max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = u.iter().copied().fold(f64::INFINITY, f64::min);
        min / max
    }
}

pub fn solve_mixed(mesh: &PlanarMesh, k: usize) -> Result<MixedSpectrum> {
    solve_mixed_with(mesh, k, MassKind::Lumped)
}

pub fn solve_mixed_with(mesh: &PlanarMesh, k: usize, mass: MassKind) -> Result<MixedSpectrum> {
    if !mesh.has_mark(Mark::Dirichlet) {
        return Err(Error::EmptyBoundary("dirichlet"));
    }
    let op = DtnOperator::new(mesh, mass)?;
    if k == 0 || k > op.dim() {
        return Err(Error::InvalidInput(format!(
            "k = {k} must be between 1 and the {} free-surface vertices",
            op.dim()
        )));
    }
    let eig = op.eigenpairs(k)?;
    let residuals = eig
        .eigenvalues
        .iter()
        .zip(&eig.eigenvectors)
        .map(|(&l, v)| op.residual(v, l))
        .collect();
    let eigenvectors = crate::linalg::map_indices(k, |i| op.extend(&eig.eigenvectors[i]));
    Ok(MixedSpectrum {
        eigenvalues: eig.eigenvalues,
        f_vertices: op.boundary().to_vec(),
        eigenvectors,
        residuals,
    })
}

/// `uᵀ K u / uᵀ M_F u` with the lumped mass of the Steklov edges.
pub fn rayleigh_quotient(mesh: &PlanarMesh, u: &[f64]) -> Result<f64> {
    rayleigh_quotient_with(mesh, u, MassKind::Lumped)
}

pub fn rayleigh_quotient_with(mesh: &PlanarMesh, u: &[f64], mass: MassKind) -> Result<f64> {
    if u.len() != mesh.n_vertices() {
        return Err(Error::InvalidInput("vector length differs from vertex count".into()));
    }
    let energy = assemble_stiffness(mesh).quad_form(u);
    let m = assemble_boundary_mass(mesh, Mark::Steklov)?;
    let denom = match mass {
        MassKind::Lumped => m.vertices.iter().zip(&m.diag).map(|(&v, &d)| d * u[v] * u[v]).sum(),
        MassKind::Consistent => {
            let mc = assemble_consistent_boundary_mass(mesh, Mark::Steklov, &m.vertices);
            mc.quad_form(&m.vertices.iter().map(|&v| u[v]).collect::<Vec<_>>())
        }
    };
    let scale: f64 = u.iter().map(|x| x * x).sum();
    if denom <= 1e-14 * scale || denom == 0.0 {
        return Err(Error::ZeroDenominator(denom));
    }
    Ok(energy / denom)
}

/// The bump `ψ(x) = 1 − |x − x₀|²/s²`, clamped to zero outside the ball.
pub fn psi(x: Point, x0: Point, s: f64) -> f64 {
    (1.0 - (x - x0).norm2() / (s * s)).max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Record {
    pub domain: String,
    pub x0: Point,
    pub s: f64,
    pub h: f64,
    pub sigma1: f64,
    pub r_psi: f64,
    pub sigma1_s: f64,
    /// `σ₁ ≤ R[ψ](1 + 5h/s)`.
    pub bound_holds: bool,
}

/// First mixed eigenvalue of `W = B(x₀, s) ∩ Ω` against the Rayleigh quotient
/// of the interpolated bump `ψ`.
pub fn lemma1_check(region: &BoundaryBallRegion, h: f64) -> Result<Lemma1Record> {
    let mesh = triangulate_region(region, h)?;
    lemma1_on_mesh(region, &mesh)
}

pub fn lemma1_on_mesh(region: &BoundaryBallRegion, mesh: &PlanarMesh) -> Result<Lemma1Record> {
    let h = mesh.h_target;
    let spec = solve_mixed(mesh, 1)?;
    let sigma1 = spec.eigenvalues[0];
    let mut u: Vec<f64> = mesh.vertices.iter().map(|&p| psi(p, region.x0, region.s)).collect();
    for v in mesh.vertices_with_mark(Mark::Dirichlet) {
        u[v] = 0.0;
    }
    let r_psi = rayleigh_quotient(mesh, &u)?;
    Ok(Lemma1Record {
        domain: region.parent.id.clone(),
        x0: region.x0,
        s: region.s,
        h,
        sigma1,
        r_psi,
        sigma1_s: sigma1 * region.s,
        bound_holds: sigma1 <= r_psi * (1.0 + 5.0 * h / region.s),
    })
}

/// σ₁ of the almost rectangle of half-width `w` under the graph, with
/// Dirichlet condition off the graph, meshed at `mesh_h`.
pub fn almost_rectangle_sigma1(
    graph: &PiecewiseLinear,
    xq: f64,
    w: f64,
    gamma: f64,
    mesh_h: f64,
) -> Result<f64> {
    let mesh = triangulate(&MarkedPolygon::almost_rectangle(graph, xq, w, gamma), mesh_h)?;
    Ok(solve_mixed(&mesh, 1)?.eigenvalues[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{DomainSpec, PiecewiseLinear};
    use crate::mesh::triangulate_domain;

    #[test]
    fn constant_has_zero_quotient() {
        let mesh = triangulate_domain(&DomainSpec::square(1.0), 0.2).unwrap();
        let r = rayleigh_quotient(&mesh, &vec![1.0; mesh.n_vertices()]).unwrap();
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn zero_on_steklov_is_rejected() {
        let mesh = triangulate_domain(&DomainSpec::square(1.0), 0.2).unwrap();
        let flag = mesh.is_boundary_vertex();
        let u: Vec<f64> = flag.iter().map(|&b| if b { 0.0 } else { 1.0 }).collect();
        assert!(matches!(rayleigh_quotient(&mesh, &u), Err(Error::ZeroDenominator(_))));
    }

    #[test]
    fn all_steklov_mesh_is_not_mixed() {
        let mesh = triangulate_domain(&DomainSpec::square(1.0), 0.5).unwrap();
        assert!(matches!(solve_mixed(&mesh, 1), Err(Error::EmptyBoundary("dirichlet"))));
    }

    #[test]
    fn almost_rectangle_flat_ground_state() {
        let g = PiecewiseLinear::constant(0.0, -1.0, 1.0);
        let s = almost_rectangle_sigma1(&g, 0.0, 0.2, 1.0, 0.02).unwrap();
        assert!(s > 0.0 && s.is_finite());
    }
}
