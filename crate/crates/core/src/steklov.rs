//! P1 finite elements for the Steklov problem and its Dirichlet-to-Neumann
//! reduction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::linalg::{
    generalized_eigh, generalized_eigh_dense, DenseSymMatrix, EigenDecomposition, SchurReduction,
    SparseSymMatrix,
};
use crate::mesh::{Mark, PlanarMesh};

/// Local P1 stiffness `∫ ∇φᵢ·∇φⱼ` on a triangle.
pub fn local_stiffness(p: [Point; 3]) -> [[f64; 3]; 3] {
    let area = geom::triangle_area(p[0], p[1], p[2]);
    let b = [p[1].y - p[2].y, p[2].y - p[0].y, p[0].y - p[1].y];
    let c = [p[2].x - p[1].x, p[0].x - p[2].x, p[1].x - p[0].x];
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
        }
    }
    k
}

pub fn assemble_stiffness(mesh: &PlanarMesh) -> SparseSymMatrix {
    let mut trip = Vec::with_capacity(6 * mesh.n_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let k = local_stiffness(mesh.triangle_points(t));
        for i in 0..3 {
            for j in 0..=i {
                trip.push((tri[i], tri[j], k[i][j]));
            }
        }
    }
    SparseSymMatrix::from_triplets(mesh.n_vertices(), trip)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassKind {
    #[default]
    Lumped,
    Consistent,
}

/// Lumped boundary mass over the vertices of edges carrying `mark`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryMass {
    /// Sorted vertex indices.
    pub vertices: Vec<usize>,
    pub diag: Vec<f64>,
}

impl BoundaryMass {
    pub fn total(&self) -> f64 {
        self.diag.iter().sum()
    }

    /// Mass entry for each mesh vertex (zero off the marked set).
    pub fn on_vertices(&self, n: usize) -> Vec<f64> {
        let mut m = vec![0.0; n];
        for (&v, &d) in self.vertices.iter().zip(&self.diag) {
            m[v] = d;
        }
        m
    }
}

/// Entry of vertex `v` is half the total length of marked edges at `v`.
pub fn assemble_boundary_mass(mesh: &PlanarMesh, mark: Mark) -> Result<BoundaryMass> {
    assemble_boundary_mass_excluding(mesh, mark, &[])
}

fn assemble_boundary_mass_excluding(
    mesh: &PlanarMesh,
    mark: Mark,
    excluded: &[bool],
) -> Result<BoundaryMass> {
    let mut m = vec![0.0; mesh.n_vertices()];
    let mut any = false;
    for e in mesh.boundary_edges.iter().filter(|e| e.mark == mark) {
        any = true;
        let half = 0.5 * mesh.vertices[e.a].dist(mesh.vertices[e.b]);
        m[e.a] += half;
        m[e.b] += half;
    }
    if !any {
        return Err(Error::EmptyBoundary(mark.as_str()));
    }
    let vertices: Vec<usize> = (0..m.len())
        .filter(|&v| m[v] > 0.0 && !excluded.get(v).copied().unwrap_or(false))
        .collect();
    let diag = vertices.iter().map(|&v| m[v]).collect();
    Ok(BoundaryMass { vertices, diag })
}

/// Consistent mass `Σ ℓ/6 [[2,1],[1,2]]` over marked edges, restricted to
/// `vertices` (sorted).
pub fn assemble_consistent_boundary_mass(
    mesh: &PlanarMesh,
    mark: Mark,
    vertices: &[usize],
) -> DenseSymMatrix {
    let mut pos = vec![usize::MAX; mesh.n_vertices()];
    for (k, &v) in vertices.iter().enumerate() {
        pos[v] = k;
    }
    let mut m = DenseSymMatrix::zeros(vertices.len());
    for e in mesh.boundary_edges.iter().filter(|e| e.mark == mark) {
        let l = mesh.vertices[e.a].dist(mesh.vertices[e.b]);
        let (a, b) = (pos[e.a], pos[e.b]);
        if a != usize::MAX {
            m.set(a, a, m.get(a, a) + l / 3.0);
        }
        if b != usize::MAX {
            m.set(b, b, m.get(b, b) + l / 3.0);
        }
        if a != usize::MAX && b != usize::MAX {
            m.set_sym(a, b, m.get(a, b) + l / 6.0);
        }
    }
    m
}

/// Discrete Dirichlet-to-Neumann operator on the Steklov vertices of a
/// marked mesh. Vertices on Dirichlet edges are removed; all other
/// non-Steklov vertices are eliminated.
#[derive(Clone, Debug)]
pub struct DtnOperator {
    pub n_vertices: usize,
    pub stiffness: SparseSymMatrix,
    pub reduction: SchurReduction,
    pub lumped: BoundaryMass,
    pub consistent: Option<DenseSymMatrix>,
}

impl DtnOperator {
    pub fn new(mesh: &PlanarMesh, mass: MassKind) -> Result<Self> {
        let n = mesh.n_vertices();
        let mut dirichlet = vec![false; n];
        for v in mesh.vertices_with_mark(Mark::Dirichlet) {
            dirichlet[v] = true;
        }
        let lumped = assemble_boundary_mass_excluding(mesh, Mark::Steklov, &dirichlet)?;
        if lumped.vertices.is_empty() {
            return Err(Error::EmptyBoundary("steklov"));
        }
        let mut is_b = vec![false; n];
        for &v in &lumped.vertices {
            is_b[v] = true;
        }
        let interior: Vec<usize> = (0..n).filter(|&v| !is_b[v] && !dirichlet[v]).collect();
        let stiffness = assemble_stiffness(mesh);
        let reduction = SchurReduction::new(&stiffness, &interior, &lumped.vertices)?;
        let consistent = match mass {
            MassKind::Lumped => None,
            MassKind::Consistent => {
                Some(assemble_consistent_boundary_mass(mesh, Mark::Steklov, &lumped.vertices))
            }
        };
        Ok(Self { n_vertices: n, stiffness, reduction, lumped, consistent })
    }

    pub fn boundary(&self) -> &[usize] {
        &self.reduction.boundary
    }

    pub fn dim(&self) -> usize {
        self.lumped.vertices.len()
    }

    fn mass_mul(&self, x: &[f64]) -> Vec<f64> {
        match &self.consistent {
            Some(m) => m.mul_vec(x),
            None => x.iter().zip(&self.lumped.diag).map(|(a, b)| a * b).collect(),
        }
    }

    /// `‖S x − λ M x‖ / ‖M x‖`.
    pub fn residual(&self, x_b: &[f64], lambda: f64) -> f64 {
        let sx = self.reduction.s.mul_vec(x_b);
        let mx = self.mass_mul(x_b);
        let r: Vec<f64> = sx.iter().zip(&mx).map(|(s, m)| s - lambda * m).collect();
        crate::linalg::norm(&r) / crate::linalg::norm(&mx)
    }

    /// Restriction of a vertex vector to the operator's boundary ordering.
    pub fn restrict(&self, u: &[f64]) -> Vec<f64> {
        self.boundary().iter().map(|&v| u[v]).collect()
    }

    /// The `k` smallest eigenpairs of `S v = λ M v`, `M`-orthonormal, each
    /// sign-normalized so its largest-magnitude entry is positive.
    pub fn eigenpairs(&self, k: usize) -> Result<EigenDecomposition> {
        let mut eig = match &self.consistent {
            Some(m) => generalized_eigh_dense(&self.reduction.s, m)?,
            None => generalized_eigh(&self.reduction.s, &self.lumped.diag)?,
        };
        eig.truncate(k);
        for v in &mut eig.eigenvectors {
            let big = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            if big < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        Ok(eig)
    }

    /// Interior reconstruction; Dirichlet vertices get zero.
    pub fn extend(&self, x_b: &[f64]) -> Vec<f64> {
        self.reduction.assemble_full(self.n_vertices, x_b)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteklovSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Vertex indices of the boundary traces.
    pub boundary_vertices: Vec<usize>,
    /// `M`-orthonormal traces over `boundary_vertices`.
    pub boundary_traces: Vec<Vec<f64>>,
    /// Discrete harmonic extensions over all mesh vertices.
    pub interior_extensions: Vec<Vec<f64>>,
    /// `‖S v − λ M v‖ / ‖M v‖` per pair.
    pub residuals: Vec<f64>,
    /// Lumped boundary mass over `boundary_vertices`.
    pub mass: Vec<f64>,
    pub mass_kind: MassKind,
    pub h: f64,
}

impl SteklovSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Runs of consecutive eigenvalues whose gaps are below `rel·λ`.
    pub fn clusters(&self, rel: f64) -> Vec<Vec<usize>> {
        cluster_indices(&self.eigenvalues, rel)
    }
}

/// Groups sorted values whose consecutive gaps are at most `rel·|λ|`
/// (absolute `rel` near zero).
pub fn cluster_indices(values: &[f64], rel: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(c) if (v - values[i - 1]).abs() <= rel * v.abs().max(1.0) => c.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

pub const CLUSTER_GAP: f64 = 1e-3;

pub fn solve_steklov(mesh: &PlanarMesh, k: usize) -> Result<SteklovSpectrum> {
    solve_steklov_with(mesh, k, MassKind::Lumped)
}

/// First `k` Steklov eigenpairs. Steklov vertices carry the traces; any
/// Dirichlet-marked vertices are held at zero.
pub fn solve_steklov_with(mesh: &PlanarMesh, k: usize, mass: MassKind) -> Result<SteklovSpectrum> {
    let op = DtnOperator::new(mesh, mass)?;
    if k == 0 || k > op.dim() {
        return Err(Error::InvalidInput(format!(
            "k = {k} must be between 1 and the {} boundary vertices",
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
    let interior_extensions = crate::linalg::map_indices(k, |i| op.extend(&eig.eigenvectors[i]));
    Ok(SteklovSpectrum {
        eigenvalues: eig.eigenvalues,
        boundary_vertices: op.boundary().to_vec(),
        boundary_traces: eig.eigenvectors,
        interior_extensions,
        residuals,
        mass: op.lumped.diag.clone(),
        mass_kind: mass,
        h: mesh.h_target,
    })
}
