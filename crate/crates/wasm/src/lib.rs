//! Browser bindings: solve a catalog domain, inspect one eigenfunction with
//! its nodal set, and compute the mixed ground state of a boundary ball.

use wasm_bindgen::prelude::*;

use steklov_core::domain::{boundary_points, clip_ball, DomainSpec};
use steklov_core::mesh::{triangulate_domain, triangulate_region, PlanarMesh};
use steklov_core::mixed::lemma1_on_mesh;
use steklov_core::mixed::solve_mixed;
use steklov_core::nodal::{analyze, zero_segments};
use steklov_core::steklov::{solve_steklov, SteklovSpectrum};

fn js_err(e: steklov_core::Error) -> JsError {
    JsError::new(&format!("{}: {e}", e.kind()))
}

fn domain(id: &str) -> Result<DomainSpec, JsError> {
    DomainSpec::by_id(id).ok_or_else(|| JsError::new(&format!("unknown domain '{id}'")))
}

fn flat_vertices(mesh: &PlanarMesh) -> Vec<f64> {
    mesh.vertices.iter().flat_map(|p| [p.x, p.y]).collect()
}

fn flat_triangles(mesh: &PlanarMesh) -> Vec<u32> {
    mesh.triangles.iter().flat_map(|t| t.map(|i| i as u32)).collect()
}

/// A meshed domain with its first `k` Steklov eigenpairs.
#[wasm_bindgen]
pub struct Lab {
    mesh: PlanarMesh,
    spectrum: SteklovSpectrum,
}

#[wasm_bindgen]
impl Lab {
    #[wasm_bindgen(constructor)]
    pub fn new(domain_id: &str, h: f64, k: usize) -> Result<Lab, JsError> {
        let mesh = triangulate_domain(&domain(domain_id)?, h).map_err(js_err)?;
        let spectrum = solve_steklov(&mesh, k).map_err(js_err)?;
        Ok(Lab { mesh, spectrum })
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spectrum.eigenvalues.clone()
    }

    /// Interleaved `x, y` coordinates.
    pub fn vertices(&self) -> Vec<f64> {
        flat_vertices(&self.mesh)
    }

    pub fn triangles(&self) -> Vec<u32> {
        flat_triangles(&self.mesh)
    }

    /// Vertex values of eigenfunction `i`.
    pub fn mode(&self, i: usize) -> Result<Vec<f64>, JsError> {
        self.spectrum
            .interior_extensions
            .get(i)
            .cloned()
            .ok_or_else(|| JsError::new("eigenvector index out of range"))
    }

    /// Zero segments of eigenfunction `i` as `x0, y0, x1, y1` quadruples.
    pub fn nodal_segments(&self, i: usize) -> Result<Vec<f64>, JsError> {
        let u = self.mode(i)?;
        Ok(zero_segments(&self.mesh, &u)
            .segments
            .iter()
            .flat_map(|s| [s.a.x, s.a.y, s.b.x, s.b.y])
            .collect())
    }

    /// `[λ, n_domains, density_radius·λ, min ρ(D)·λ]` for eigenfunction `i ≥ 1`.
    pub fn nodal_summary(&self, i: usize) -> Result<Vec<f64>, JsError> {
        let u = self.mode(i)?;
        let r = analyze(&self.mesh, &u, self.spectrum.eigenvalues[i], i, None).map_err(js_err)?;
        Ok(vec![
            r.lambda,
            r.n_domains as f64,
            r.density_radius_times_lambda,
            r.min_rho_times_lambda,
        ])
    }
}

/// Mixed ground state on `B(x₀, s) ∩ Ω` with `x₀` the `x0_index`-th of 64
/// boundary samples.
#[wasm_bindgen]
pub struct BallState {
    mesh: PlanarMesh,
    values: Vec<f64>,
    sigma1: f64,
    r_psi: f64,
}

#[wasm_bindgen]
impl BallState {
    #[wasm_bindgen(constructor)]
    pub fn new(domain_id: &str, x0_index: usize, s: f64, h: f64) -> Result<BallState, JsError> {
        let spec = domain(domain_id)?;
        let samples = boundary_points(&spec, 64).map_err(js_err)?;
        let x0 = samples
            .get(x0_index)
            .ok_or_else(|| JsError::new("x0 index must be below 64"))?
            .point;
        let region = clip_ball(&spec, x0, s).map_err(js_err)?;
        let mesh = triangulate_region(&region, h).map_err(js_err)?;
        let record = lemma1_on_mesh(&region, &mesh).map_err(js_err)?;
        let values = solve_mixed(&mesh, 1).map_err(js_err)?.eigenvectors.remove(0);
        Ok(BallState { mesh, values, sigma1: record.sigma1, r_psi: record.r_psi })
    }

    pub fn vertices(&self) -> Vec<f64> {
        flat_vertices(&self.mesh)
    }

    pub fn triangles(&self) -> Vec<u32> {
        flat_triangles(&self.mesh)
    }

    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    pub fn sigma1(&self) -> f64 {
        self.sigma1
    }

    /// Rayleigh quotient of the bump `1 − |x − x₀|²/s²`.
    pub fn r_psi(&self) -> f64 {
        self.r_psi
    }
}

/// Catalog ids accepted by the constructors.
#[wasm_bindgen]
pub fn domain_ids() -> Vec<String> {
    let mut ids: Vec<String> = DomainSpec::catalog().into_iter().map(|d| d.id).collect();
    ids.push("flat_graph".into());
    ids
}
