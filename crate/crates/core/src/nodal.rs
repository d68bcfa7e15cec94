//! Nodal sets and nodal domains of P1 eigenfunctions, with the boundary
//! density radius and the modified inner radius of each domain.

use serde::{Deserialize, Serialize};

use crate::domain::PiecewiseLinear;
use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::mesh::PlanarMesh;
use crate::steklov::MassKind;

/// Relative threshold under which vertex values count as zero (and then as
/// positive).
pub const ZERO_TOL: f64 = 1e-12;

fn linf(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `true` for the positive side; near-zero values are positive.
pub fn vertex_signs(u: &[f64]) -> Vec<bool> {
    let tol = ZERO_TOL * linf(u);
    u.iter().map(|&v| v >= -tol).collect()
}

/// Parameter along `a → b` where the interpolant crosses zero, for
/// endpoints of opposite sign (`pa` the sign of `a`).
fn crossing(ua: f64, ub: f64, pa: bool) -> f64 {
    // Values counted positive but slightly negative sit exactly on the zero.
    let (a, b) = if pa { (ua.max(0.0), ub) } else { (ua, ub.max(0.0)) };
    if a == b {
        return 0.5;
    }
    (a / (a - b)).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroSegment {
    pub a: Point,
    pub b: Point,
    pub triangle: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    pub segments: Vec<ZeroSegment>,
}

impl ZeroSet {
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    /// Distance from `p` to the nearest zero segment.
    pub fn distance(&self, p: Point) -> f64 {
        self.segments
            .iter()
            .map(|s| geom::dist_point_segment(p, s.a, s.b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn endpoints(&self) -> impl Iterator<Item = Point> + '_ {
        self.segments.iter().flat_map(|s| [s.a, s.b])
    }
}

/// Marching triangles: the chord where the P1 interpolant vanishes in each
/// triangle with vertices of both signs.
pub fn zero_segments(mesh: &PlanarMesh, u: &[f64]) -> ZeroSet {
    let sign = vertex_signs(u);
    let mut segments = Vec::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let mut pts = Vec::with_capacity(2);
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            if sign[a] != sign[b] {
                let s = crossing(u[a], u[b], sign[a]);
                pts.push(mesh.vertices[a].lerp(mesh.vertices[b], s));
            }
        }
        if pts.len() == 2 {
            segments.push(ZeroSegment { a: pts[0], b: pts[1], triangle: t });
        }
    }
    ZeroSet { segments }
}

/// Sub-interval `[t0, t1]` of boundary edge `edge` (parameter along a → b)
/// lying in the closure of one nodal domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPiece {
    pub edge: usize,
    pub t0: f64,
    pub t1: f64,
    pub p0: Point,
    pub p1: Point,
}

impl BoundaryPiece {
    pub fn length(&self) -> f64 {
        self.p0.dist(self.p1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodalDomainLabeling {
    pub n_domains: usize,
    /// Domain of each vertex.
    pub vertex_domain: Vec<usize>,
    /// `+1` or `-1` per domain.
    pub domain_sign: Vec<i8>,
    /// Per triangle: domain of the positive subcell and of the negative one.
    pub subcells: Vec<[Option<usize>; 2]>,
    /// `F_D`: boundary pieces in the closure of each domain.
    pub boundary_pieces: Vec<Vec<BoundaryPiece>>,
}

impl NodalDomainLabeling {
    /// Domains whose closure misses the boundary.
    pub fn interior_domains(&self) -> Vec<usize> {
        (0..self.n_domains).filter(|&d| self.boundary_pieces[d].is_empty()).collect()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Components of the complement of the zero set.
///
/// Each triangle crossed by a chord splits into a positive and a negative
/// subcell. The subcells of one sign in a triangle contain all of its
/// vertices of that sign, and two subcells across a shared edge touch exactly
/// when they contain a common endpoint of that edge, so subcells are merged
/// through their vertices.
pub fn label_nodal_domains(mesh: &PlanarMesh, u: &[f64]) -> NodalDomainLabeling {
    let n = mesh.n_vertices();
    let sign = vertex_signs(u);
    let mut uf = UnionFind::new(n);
    for tri in &mesh.triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            if sign[a] == sign[b] {
                uf.union(a, b);
            }
        }
    }
    let mut id_of_root = vec![usize::MAX; n];
    let mut vertex_domain = vec![0; n];
    let mut domain_sign = Vec::new();
    for v in 0..n {
        let r = uf.find(v);
        if id_of_root[r] == usize::MAX {
            id_of_root[r] = domain_sign.len();
            domain_sign.push(if sign[v] { 1 } else { -1 });
        }
        vertex_domain[v] = id_of_root[r];
    }
    let subcells = mesh
        .triangles
        .iter()
        .map(|tri| {
            let mut cells = [None, None];
            for &v in tri {
                cells[if sign[v] { 0 } else { 1 }] = Some(vertex_domain[v]);
            }
            cells
        })
        .collect();
    let n_domains = domain_sign.len();
    let mut boundary_pieces = vec![Vec::new(); n_domains];
    for (i, e) in mesh.boundary_edges.iter().enumerate() {
        let (pa, pb) = (mesh.vertices[e.a], mesh.vertices[e.b]);
        if sign[e.a] == sign[e.b] {
            boundary_pieces[vertex_domain[e.a]].push(BoundaryPiece { edge: i, t0: 0.0, t1: 1.0, p0: pa, p1: pb });
        } else {
            let t = crossing(u[e.a], u[e.b], sign[e.a]);
            let pm = pa.lerp(pb, t);
            boundary_pieces[vertex_domain[e.a]].push(BoundaryPiece { edge: i, t0: 0.0, t1: t, p0: pa, p1: pm });
            boundary_pieces[vertex_domain[e.b]].push(BoundaryPiece { edge: i, t0: t, t1: 1.0, p0: pm, p1: pb });
        }
    }
    NodalDomainLabeling { n_domains, vertex_domain, domain_sign, subcells, boundary_pieces }
}

/// Points where the boundary trace changes sign.
pub fn boundary_zero_points(mesh: &PlanarMesh, u: &[f64]) -> Vec<Point> {
    let sign = vertex_signs(u);
    mesh.boundary_edges
        .iter()
        .filter(|e| sign[e.a] != sign[e.b])
        .map(|e| {
            let t = crossing(u[e.a], u[e.b], sign[e.a]);
            mesh.vertices[e.a].lerp(mesh.vertices[e.b], t)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityRadius {
    pub radius: f64,
    /// Boundary sample attaining the maximum.
    pub witness: Point,
}

/// Boundary vertices followed by boundary edge midpoints.
pub fn boundary_samples(mesh: &PlanarMesh) -> Vec<Point> {
    let mut s: Vec<Point> = mesh.boundary_edges.iter().map(|e| mesh.vertices[e.a]).collect();
    s.extend(mesh.boundary_edges.iter().map(|e| mesh.vertices[e.a].midpoint(mesh.vertices[e.b])));
    s
}

/// Largest distance from a boundary sample to the zero set.
pub fn density_radius(mesh: &PlanarMesh, zeros: &ZeroSet) -> Result<DensityRadius> {
    max_distance_to_zeros(&boundary_samples(mesh), zeros)
}

fn max_distance_to_zeros(samples: &[Point], zeros: &ZeroSet) -> Result<DensityRadius> {
    if zeros.is_empty() {
        return Err(Error::NoZeros);
    }
    let dists = crate::linalg::map_indices(samples.len(), |i| zeros.distance(samples[i]));
    let mut best = DensityRadius { radius: -1.0, witness: Point::default() };
    for (p, d) in samples.iter().zip(dists) {
        if d > best.radius {
            best = DensityRadius { radius: d, witness: *p };
        }
    }
    Ok(best)
}

/// Density radius measured from points at distance `depth` inside the
/// boundary (edge midpoints pushed along the inward normal).
pub fn collar_density_radius(mesh: &PlanarMesh, zeros: &ZeroSet, depth: f64) -> Result<DensityRadius> {
    let poly = mesh.boundary_polygon();
    let samples: Vec<Point> = mesh
        .boundary_edges
        .iter()
        .filter_map(|e| {
            let (a, b) = (mesh.vertices[e.a], mesh.vertices[e.b]);
            let d = b - a;
            let normal = Point::new(-d.y, d.x) * (1.0 / d.norm());
            let p = a.midpoint(b) + normal * depth;
            (geom::point_in_polygon(p, &poly)
                && geom::dist_point_polyline_closed(p, &poly) >= (1.0 - 1e-9) * depth)
                .then_some(p)
        })
        .collect();
    if samples.is_empty() {
        return Err(Error::InvalidInput(format!("no collar points at depth {depth}")));
    }
    max_distance_to_zeros(&samples, zeros)
}

/// Sample points on a piece: endpoints and `SUBDIV - 1` interior points.
const SUBDIV: usize = 8;

fn piece_samples(p: &BoundaryPiece) -> impl Iterator<Item = Point> + '_ {
    (0..=SUBDIV).map(move |k| p.p0.lerp(p.p1, k as f64 / SUBDIV as f64))
}

/// Obstacles for balls centred in the closure of domain `d`: every zero
/// segment and every boundary piece of another domain.
fn obstacle_distance(labeling: &NodalDomainLabeling, zeros: &ZeroSet, d: usize, y: Point) -> f64 {
    let mut r = zeros.distance(y);
    for (other, pieces) in labeling.boundary_pieces.iter().enumerate() {
        if other == d {
            continue;
        }
        for p in pieces {
            r = r.min(geom::dist_point_segment(y, p.p0, p.p1));
        }
    }
    r
}

/// Whether `B(y, r) ∩ Ω` avoids the zero set and the boundary of every other
/// domain, tested against each segment analytically.
pub fn ball_in_domain(labeling: &NodalDomainLabeling, zeros: &ZeroSet, d: usize, y: Point, r: f64) -> bool {
    obstacle_distance(labeling, zeros, d, y) >= r
}

/// Largest radius of a ball centred on `F_D` whose trace in `Ω` stays in `D`
/// (maximised over the piece samples), or `None` when `D` misses the
/// boundary.
pub fn modified_inner_radius(
    labeling: &NodalDomainLabeling,
    zeros: &ZeroSet,
    d: usize,
) -> Option<(f64, Point)> {
    let pieces = &labeling.boundary_pieces[d];
    if pieces.is_empty() {
        return None;
    }
    let samples: Vec<Point> = pieces.iter().flat_map(piece_samples).collect();
    let radii = crate::linalg::map_indices(samples.len(), |i| obstacle_distance(labeling, zeros, d, samples[i]));
    samples
        .into_iter()
        .zip(radii)
        .map(|(p, r)| (r, p))
        .fold(None, |best: Option<(f64, Point)>, cur| match best {
            Some(b) if b.0 >= cur.0 => Some(b),
            _ => Some(cur),
        })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodalRayleigh {
    /// `∫_D |∇u|²` per domain.
    pub energy: Vec<f64>,
    /// Boundary mass of `u` on `F_D` per domain.
    pub boundary_mass: Vec<f64>,
    /// `R_D`.
    pub quotient: Vec<f64>,
    /// `|R_D − λ| / λ`.
    pub residual: Vec<f64>,
    /// `Σ energy / Σ boundary_mass`, the mass-weighted mean of `R_D`.
    pub aggregate: f64,
}

/// Per-domain Rayleigh quotients of an eigenfunction. With lumped mass the
/// boundary term of `D` is `Σ M_v u_v²` over its boundary vertices, so the
/// aggregate reproduces `uᵀKu / uᵀMu` exactly; with consistent mass the
/// pieces of `F_D` are integrated exactly.
pub fn nodal_rayleigh_check(
    mesh: &PlanarMesh,
    u: &[f64],
    lambda: f64,
    labeling: &NodalDomainLabeling,
    mass: MassKind,
) -> Result<NodalRayleigh> {
    let nd = labeling.n_domains;
    let sign = vertex_signs(u);
    let mut energy = vec![0.0; nd];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = mesh.triangle_points(t);
        let area = geom::triangle_area(p[0], p[1], p[2]);
        let grad2 = {
            let k = crate::steklov::local_stiffness(p);
            let uu = tri.map(|v| u[v]);
            (0..3).map(|i| (0..3).map(|j| uu[i] * k[i][j] * uu[j]).sum::<f64>()).sum::<f64>() / area
        };
        let [pos, neg] = labeling.subcells[t];
        match (pos, neg) {
            (Some(d), None) | (None, Some(d)) => energy[d] += grad2 * area,
            (Some(dp), Some(dn)) => {
                // The lone-sign corner is cut off at parameters s1, s2 along its edges.
                let lone = (0..3)
                    .find(|&k| sign[tri[k]] != sign[tri[(k + 1) % 3]] && sign[tri[k]] != sign[tri[(k + 2) % 3]])
                    .unwrap();
                let (a, b, c) = (tri[lone], tri[(lone + 1) % 3], tri[(lone + 2) % 3]);
                let s1 = crossing(u[a], u[b], sign[a]);
                let s2 = crossing(u[a], u[c], sign[a]);
                let corner = area * s1 * s2;
                let (dc, dr) = if sign[a] { (dp, dn) } else { (dn, dp) };
                energy[dc] += grad2 * corner;
                energy[dr] += grad2 * (area - corner);
            }
            (None, None) => unreachable!("triangle without subcells"),
        }
    }
    let mut bmass = vec![0.0; nd];
    match mass {
        MassKind::Lumped => {
            let m = crate::steklov::assemble_boundary_mass(mesh, crate::mesh::Mark::Steklov)?;
            for (&v, &mv) in m.vertices.iter().zip(&m.diag) {
                bmass[labeling.vertex_domain[v]] += mv * u[v] * u[v];
            }
        }
        MassKind::Consistent => {
            for (d, pieces) in labeling.boundary_pieces.iter().enumerate() {
                for p in pieces {
                    let e = mesh.boundary_edges[p.edge];
                    if e.mark != crate::mesh::Mark::Steklov {
                        continue;
                    }
                    let len = mesh.vertices[e.a].dist(mesh.vertices[e.b]);
                    let at = |t: f64| u[e.a] + t * (u[e.b] - u[e.a]);
                    let (x, y) = (at(p.t0), at(p.t1));
                    bmass[d] += (p.t1 - p.t0) * len * (x * x + x * y + y * y) / 3.0;
                }
            }
        }
    }
    let total: f64 = bmass.iter().sum();
    if let Some(&small) = bmass.iter().find(|&&m| m <= 1e-12 * total) {
        return Err(Error::ZeroDenominator(small));
    }
    let quotient: Vec<f64> = energy.iter().zip(&bmass).map(|(e, m)| e / m).collect();
    let residual = quotient.iter().map(|r| (r - lambda).abs() / lambda.abs()).collect();
    let aggregate = energy.iter().sum::<f64>() / total;
    Ok(NodalRayleigh { energy, boundary_mass: bmass, quotient, residual, aggregate })
}

/// `∫ u²` over a triangle for linear `u` with vertex values `v`.
fn tri_integral_u2(area: f64, v: [f64; 3]) -> f64 {
    // Edge-midpoint rule, exact for quadratics.
    let m = [0.5 * (v[0] + v[1]), 0.5 * (v[1] + v[2]), 0.5 * (v[2] + v[0])];
    area * (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) / 3.0
}

/// Barycentric evaluation of the linear interpolant on triangle `p`.
fn interpolate(p: [Point; 3], v: [f64; 3], x: Point) -> f64 {
    let area = geom::orient2d(p[0], p[1], p[2]);
    let l0 = geom::orient2d(x, p[1], p[2]) / area;
    let l1 = geom::orient2d(p[0], x, p[2]) / area;
    l0 * v[0] + l1 * v[1] + (1.0 - l0 - l1) * v[2]
}

/// Empirical trace constant on the almost-square
/// `q ∩ Ω = { |x − x_q| < w, g(x) − 2Γw < y < g(x) }` under the graph `g`:
/// `∫_{q∩F} u² / ((1/w) ∫_{q∩Ω} u² + w ∫_{q∩Ω} |∇u|²)`.
pub fn trace_inequality_constant(
    mesh: &PlanarMesh,
    u: &[f64],
    graph: &PiecewiseLinear,
    xq: f64,
    w: f64,
    gamma: f64,
) -> Result<f64> {
    let (lo, hi) = (xq - w, xq + w);
    let xs = graph.breakpoints(lo, hi);
    let drop = 2.0 * gamma * w;
    let strips: Vec<[Point; 4]> = xs
        .windows(2)
        .map(|s| {
            let (a, b) = (s[0], s[1]);
            [
                Point::new(a, graph.eval(a) - drop),
                Point::new(b, graph.eval(b) - drop),
                Point::new(b, graph.eval(b)),
                Point::new(a, graph.eval(a)),
            ]
        })
        .collect();
    let (mut vol_u2, mut vol_grad) = (0.0, 0.0);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = mesh.triangle_points(t);
        let (xmin, xmax) = p.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), q| (a.min(q.x), b.max(q.x)));
        if xmax <= lo || xmin >= hi {
            continue;
        }
        let v = tri.map(|i| u[i]);
        let area = geom::triangle_area(p[0], p[1], p[2]);
        let k = crate::steklov::local_stiffness(p);
        let grad2 = (0..3).map(|i| (0..3).map(|j| v[i] * k[i][j] * v[j]).sum::<f64>()).sum::<f64>() / area;
        for strip in &strips {
            let clipped = geom::clip_convex(&p, strip);
            if clipped.len() < 3 {
                continue;
            }
            for j in 1..clipped.len() - 1 {
                let sub = [clipped[0], clipped[j], clipped[j + 1]];
                let a = geom::triangle_area(sub[0], sub[1], sub[2]);
                if a <= 0.0 {
                    continue;
                }
                vol_u2 += tri_integral_u2(a, sub.map(|x| interpolate(p, v, x)));
                vol_grad += grad2 * a;
            }
        }
    }
    let mut surf = 0.0;
    let on_graph = |p: Point| (p.y - graph.eval(p.x)).abs() <= 1e-9 * (1.0 + p.y.abs());
    for e in &mesh.boundary_edges {
        let (pa, pb) = (mesh.vertices[e.a], mesh.vertices[e.b]);
        if !on_graph(pa) || !on_graph(pb) || pa.x == pb.x {
            continue;
        }
        let ta = ((lo - pa.x) / (pb.x - pa.x)).clamp(0.0, 1.0);
        let tb = ((hi - pa.x) / (pb.x - pa.x)).clamp(0.0, 1.0);
        let (t0, t1) = (ta.min(tb), ta.max(tb));
        if t1 <= t0 {
            continue;
        }
        let len = pa.dist(pb) * (t1 - t0);
        let at = |t: f64| u[e.a] + t * (u[e.b] - u[e.a]);
        let (x, y) = (at(t0), at(t1));
        surf += len * (x * x + x * y + y * y) / 3.0;
    }
    let denom = vol_u2 / w + w * vol_grad;
    if !(denom > 1e-300) {
        return Err(Error::ZeroDenominator(denom));
    }
    Ok(surf / denom)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodalGeometryReport {
    pub eig_index: usize,
    pub lambda: f64,
    pub n_domains: usize,
    pub density_radius: f64,
    pub density_radius_times_lambda: f64,
    /// `ρ(D)` per domain (zero for domains missing the boundary).
    pub inner_radii: Vec<f64>,
    pub min_rho: f64,
    pub min_rho_times_lambda: f64,
    pub rayleigh_residuals: Vec<f64>,
    pub max_rayleigh_residual: f64,
    pub aggregate_rayleigh: f64,
    pub collar_density_radius: Option<f64>,
    pub boundary_has_both_signs: bool,
}

/// Full nodal geometry of one eigenfunction.
pub fn analyze(
    mesh: &PlanarMesh,
    u: &[f64],
    lambda: f64,
    eig_index: usize,
    collar_depth: Option<f64>,
) -> Result<NodalGeometryReport> {
    let zeros = zero_segments(mesh, u);
    let labeling = label_nodal_domains(mesh, u);
    let density = density_radius(mesh, &zeros)?;
    let inner_radii: Vec<f64> = (0..labeling.n_domains)
        .map(|d| modified_inner_radius(&labeling, &zeros, d).map_or(0.0, |r| r.0))
        .collect();
    let min_rho = inner_radii.iter().copied().fold(f64::INFINITY, f64::min);
    // A sliver domain without boundary mass leaves the residuals undefined (NaN).
    let rayleigh = match nodal_rayleigh_check(mesh, u, lambda, &labeling, MassKind::Lumped) {
        Ok(r) => r,
        Err(Error::ZeroDenominator(_)) => NodalRayleigh {
            energy: Vec::new(),
            boundary_mass: Vec::new(),
            quotient: Vec::new(),
            residual: vec![f64::NAN; labeling.n_domains],
            aggregate: f64::NAN,
        },
        Err(e) => return Err(e),
    };
    let collar = match collar_depth {
        Some(d) => collar_density_radius(mesh, &zeros, d).ok().map(|r| r.radius),
        None => None,
    };
    let tol = ZERO_TOL * linf(u);
    let bverts = mesh.boundary_vertices();
    let boundary_has_both_signs =
        bverts.iter().any(|&v| u[v] > tol) && bverts.iter().any(|&v| u[v] < -tol);
    Ok(NodalGeometryReport {
        eig_index,
        lambda,
        n_domains: labeling.n_domains,
        density_radius: density.radius,
        density_radius_times_lambda: density.radius * lambda,
        min_rho,
        min_rho_times_lambda: min_rho * lambda,
        max_rayleigh_residual: rayleigh.residual.iter().copied().fold(0.0, |m, r| if r.is_nan() || m.is_nan() { f64::NAN } else { m.max(r) }),
        rayleigh_residuals: rayleigh.residual,
        aggregate_rayleigh: rayleigh.aggregate,
        inner_radii,
        collar_density_radius: collar,
        boundary_has_both_signs,
    })
}
