//! Conforming triangulations of marked polygons.
//!
//! Meshes come from a constrained Delaunay triangulation of the pre-split
//! boundary followed by Delaunay refinement with an angle bound and an area
//! bound tied to the target size `h` (backed by `spade`).

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use spade::handles::FixedFaceHandle;
use spade::{
    AngleLimit, ConstrainedDelaunayTriangulation, HasPosition, Point2, RefinementParameters,
    Triangulation,
};

use crate::domain::{BoundaryBallRegion, CircleArc, Curve, DomainSpec, PiecewiseLinear, RegionPiece};
use crate::error::{Error, Result};
use crate::geom::{self, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mark {
    Steklov,
    Dirichlet,
}

impl Mark {
    pub fn as_str(self) -> &'static str {
        match self {
            Mark::Steklov => "steklov",
            Mark::Dirichlet => "dirichlet",
        }
    }
}

/// Simple counter-clockwise polygon whose edge `i` (from vertex `i` to
/// `i + 1`) carries a boundary mark and optionally the exact curve it
/// approximates.
#[derive(Clone, Debug)]
pub struct MarkedPolygon {
    pub vertices: Vec<Point>,
    pub marks: Vec<Mark>,
    pub curves: Vec<Option<usize>>,
    pub curve_table: Vec<Curve>,
    /// Grade the mesh size down near points where the mark changes.
    pub grade_corners: bool,
}

impl MarkedPolygon {
    pub fn from_domain(spec: &DomainSpec) -> Self {
        let vertices = spec.polygon();
        let n = vertices.len();
        let (curve_table, curve) = match spec.curve() {
            Some(c) => (vec![c], Some(0)),
            None => (Vec::new(), None),
        };
        Self {
            vertices,
            marks: vec![Mark::Steklov; n],
            curves: vec![curve; n],
            curve_table,
            grade_corners: false,
        }
    }

    /// F pieces become Steklov edges, S arcs Dirichlet chords of length at
    /// most `h` (at most `h/2` within `4h` of an F/S junction).
    pub fn from_region(region: &BoundaryBallRegion, h: f64) -> Self {
        let mut out = Self {
            vertices: Vec::new(),
            marks: Vec::new(),
            curves: Vec::new(),
            curve_table: Vec::new(),
            grade_corners: true,
        };
        let parent_curve = region.parent.curve();
        let mut parent_idx = None;
        if let Some(c) = parent_curve {
            out.curve_table.push(c);
            parent_idx = Some(0);
        }
        let sphere_idx = out.curve_table.len();
        out.curve_table.push(Curve::Circle { center: region.x0, radius: region.s });
        for piece in &region.pieces {
            match piece {
                RegionPiece::Free(pts) => {
                    let first = pts[0];
                    let last = pts[pts.len() - 1];
                    out.push(first, Mark::Steklov, parent_idx);
                    for &p in &pts[1..pts.len() - 1] {
                        // Polygon vertices hugging a junction only produce slivers.
                        if p.dist(first) > 0.05 * h && p.dist(last) > 0.05 * h {
                            out.push(p, Mark::Steklov, parent_idx);
                        }
                    }
                }
                RegionPiece::Sphere(arc) => {
                    for p in graded_arc_points(arc, h) {
                        out.push(p, Mark::Dirichlet, Some(sphere_idx));
                    }
                }
            }
        }
        out
    }

    /// Rectangle `(0, L) × (-d, 0)`: Steklov on the free surface `y = 0`,
    /// Dirichlet on the walls and bottom.
    pub fn sloshing_tank(length: f64, depth: f64) -> Self {
        Self {
            vertices: vec![
                Point::new(0.0, -depth),
                Point::new(length, -depth),
                Point::new(length, 0.0),
                Point::new(0.0, 0.0),
            ],
            marks: vec![Mark::Dirichlet, Mark::Dirichlet, Mark::Steklov, Mark::Dirichlet],
            curves: vec![None; 4],
            curve_table: Vec::new(),
            grade_corners: true,
        }
    }

    /// The almost rectangle `{ |x - xq| < w, g(x) - 2Γw < y < g(x) }`, with
    /// Steklov condition on the graph and Dirichlet elsewhere.
    pub fn almost_rectangle(graph: &PiecewiseLinear, xq: f64, w: f64, gamma: f64) -> Self {
        let xs = graph.breakpoints(xq - w, xq + w);
        let drop = 2.0 * gamma * w;
        let mut vertices = Vec::new();
        let mut marks = Vec::new();
        for &x in &xs[..xs.len() - 1] {
            vertices.push(Point::new(x, graph.eval(x) - drop));
            marks.push(Mark::Dirichlet);
        }
        let xr = xs[xs.len() - 1];
        vertices.push(Point::new(xr, graph.eval(xr) - drop));
        marks.push(Mark::Dirichlet);
        for &x in xs.iter().rev().take(xs.len() - 1) {
            vertices.push(Point::new(x, graph.eval(x)));
            marks.push(Mark::Steklov);
        }
        let xl = xs[0];
        vertices.push(Point::new(xl, graph.eval(xl)));
        marks.push(Mark::Dirichlet);
        let n = vertices.len();
        Self { vertices, marks, curves: vec![None; n], curve_table: Vec::new(), grade_corners: true }
    }

    fn push(&mut self, p: Point, mark: Mark, curve: Option<usize>) {
        self.vertices.push(p);
        self.marks.push(mark);
        self.curves.push(curve);
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        let p = &self.vertices;
        let mut d: f64 = 0.0;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                d = d.max(p[i].dist(p[j]));
            }
        }
        d
    }

    /// Vertices where the incoming and outgoing edge marks differ.
    pub fn corners(&self) -> Vec<Point> {
        let n = self.len();
        (0..n)
            .filter(|&i| self.marks[(i + n - 1) % n] != self.marks[i])
            .map(|i| self.vertices[i])
            .collect()
    }

    /// Interior angle (radians) at each vertex.
    fn interior_angles(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let prev = self.vertices[(i + n - 1) % n];
                let cur = self.vertices[i];
                let next = self.vertices[(i + 1) % n];
                let a = (prev - cur).angle();
                let b = (next - cur).angle();
                (a - b).rem_euclid(2.0 * std::f64::consts::PI)
            })
            .collect()
    }
}

fn graded_arc_points(arc: &CircleArc, h: f64) -> Vec<Point> {
    let len = arc.length();
    let step_at = |pos: f64| if pos.min(len - pos) < 4.0 * h { 0.5 * h } else { h };
    let mut cuts = vec![0.0f64];
    let mut pos = 0.0;
    loop {
        let step = step_at(pos);
        if pos + step >= len - 0.25 * step {
            // Stretch the cuts so the final gap matches the local step.
            let scale = len / (pos + step);
            return cuts.iter().map(|&c| arc.point_at(c * scale / len)).collect();
        }
        pos += step;
        cuts.push(pos);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub mark: Mark,
    pub curve: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanarMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    /// Oriented counter-clockwise (domain on the left).
    pub boundary_edges: Vec<BoundaryEdge>,
    pub curves: Vec<Curve>,
    pub h_target: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshQuality {
    pub min_angle_deg: f64,
    pub max_circumradius: f64,
    pub max_edge: f64,
    /// Triangles whose three vertices all lie on the boundary.
    pub all_boundary_triangles: usize,
}

#[derive(Clone, Copy, Debug)]
struct Vtx {
    pos: Point2<f64>,
    /// Index into the pre-split boundary loop, or `NOT_ON_LOOP`.
    loop_pos: usize,
}

const NOT_ON_LOOP: usize = usize::MAX;

impl HasPosition for Vtx {
    type Scalar = f64;
    fn position(&self) -> Point2<f64> {
        self.pos
    }
}

impl From<Point2<f64>> for Vtx {
    fn from(pos: Point2<f64>) -> Self {
        Vtx { pos, loop_pos: NOT_ON_LOOP }
    }
}

const ANGLE_LIMIT_DEG: f64 = 25.0;
const MIN_ANGLE_DEG: f64 = 20.0;

/// Triangulates a domain with all-Steklov boundary.
pub fn triangulate_domain(spec: &DomainSpec, h: f64) -> Result<PlanarMesh> {
    spec.validate()?;
    triangulate(&MarkedPolygon::from_domain(spec), h)
}

/// Triangulates `W = B(x0, s) ∩ Ω`: Steklov on F, Dirichlet on S.
pub fn triangulate_region(region: &BoundaryBallRegion, h: f64) -> Result<PlanarMesh> {
    triangulate(&MarkedPolygon::from_region(region, h), h)
}

/// Constrained Delaunay triangulation of `poly` refined to an angle bound and
/// to triangles no larger than equilateral ones of side `h`.
///
/// When `h` is at least a quarter of the diameter only the angle bound is
/// enforced, which yields the coarsest legal triangulation.
pub fn triangulate(poly: &MarkedPolygon, h: f64) -> Result<PlanarMesh> {
    if !(h > 0.0) || poly.len() < 3 {
        return Err(Error::MeshFailure(format!("invalid target size {h} or polygon")));
    }
    if !(geom::signed_area(&poly.vertices) > 0.0) {
        return Err(Error::MeshFailure("polygon is not counter-clockwise".into()));
    }
    let diameter = poly.diameter();
    let coarse = h >= diameter / 4.0;
    let corners = if poly.grade_corners { poly.corners() } else { Vec::new() };
    let near_corner = |p: Point| corners.iter().any(|c| c.dist(p) < 4.0 * h);

    // Pre-split boundary edges to the local target size.
    let n = poly.len();
    let mut loop_pts = Vec::new();
    let mut loop_edge_src = Vec::new();
    for i in 0..n {
        let a = poly.vertices[i];
        let b = poly.vertices[(i + 1) % n];
        let len = a.dist(b);
        let mut pieces = if coarse { 1 } else { (len / h).ceil().max(1.0) as usize };
        if !coarse && (near_corner(a) || near_corner(b)) {
            pieces = (2.0 * len / h).ceil().max(1.0) as usize;
        }
        for k in 0..pieces {
            loop_pts.push(a.lerp(b, k as f64 / pieces as f64));
            loop_edge_src.push(i);
        }
    }
    let m = loop_pts.len();
    let mut verts: Vec<Vtx> = loop_pts
        .iter()
        .enumerate()
        .map(|(i, p)| Vtx { pos: Point2::new(p.x, p.y), loop_pos: i })
        .collect();
    let edges: Vec<[usize; 2]> = (0..m).map(|i| [i, (i + 1) % m]).collect();

    // Seed a finer lattice around mark junctions.
    if !coarse {
        let step = 0.5 * h;
        for c in &corners {
            let r = (4.0 / 0.5) as i64;
            for i in -r..=r {
                for j in -r..=r {
                    let p = *c
                        + Point::new(
                            (i as f64 + 0.5 * (j & 1) as f64) * step,
                            j as f64 * step * 3f64.sqrt() / 2.0,
                        );
                    if p.dist(*c) < 4.0 * h
                        && geom::point_in_polygon(p, &poly.vertices)
                        && geom::dist_point_polyline_closed(p, &poly.vertices) > 0.3 * h
                    {
                        verts.push(Vtx { pos: Point2::new(p.x, p.y), loop_pos: NOT_ON_LOOP });
                    }
                }
            }
        }
    }

    // Incremental insertion: spade's bulk loader re-inserts skipped vertices
    // in hash order, which makes the mesh vary between runs.
    let mut cdt: ConstrainedDelaunayTriangulation<Vtx> = ConstrainedDelaunayTriangulation::new();
    let mut handles = Vec::with_capacity(verts.len());
    for v in verts {
        handles.push(
            cdt.insert(v)
                .map_err(|e| Error::MeshFailure(format!("constrained triangulation: {e:?}")))?,
        );
    }
    for [a, b] in edges {
        if !cdt.can_add_constraint(handles[a], handles[b]) {
            return Err(Error::MeshFailure("boundary constraints conflict".into()));
        }
        cdt.add_constraint(handles[a], handles[b]);
    }
    if cdt.num_constraints() != m {
        return Err(Error::MeshFailure("boundary constraints conflict".into()));
    }
    let mut params = RefinementParameters::<f64>::new()
        .with_angle_limit(AngleLimit::from_deg(ANGLE_LIMIT_DEG))
        .exclude_outer_faces(true)
        .with_max_additional_vertices(200 * m + 4 * (poly_area(poly) / (h * h)) as usize + 1000);
    if !coarse {
        params = params.with_max_allowed_area(3f64.sqrt() / 4.0 * h * h);
    }
    let result = cdt.refine(params);
    if !result.refinement_complete {
        return Err(Error::MeshFailure("refinement ran out of vertices".into()));
    }
    let excluded: HashSet<FixedFaceHandle<spade::handles::InnerTag>> =
        result.excluded_faces.into_iter().collect();

    // Extract inner triangles with compacted vertex indices.
    let mut index_of = vec![usize::MAX; cdt.num_vertices()];
    let mut vertices = Vec::new();
    let mut loop_pos_of = Vec::new();
    let mut triangles = Vec::new();
    let mut boundary_pairs = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let mut tri = [0usize; 3];
        for (k, v) in face.vertices().iter().enumerate() {
            let vi = v.fix().index();
            if index_of[vi] == usize::MAX {
                index_of[vi] = vertices.len();
                let p = v.position();
                vertices.push(Point::new(p.x, p.y));
                loop_pos_of.push(v.data().loop_pos);
            }
            tri[k] = index_of[vi];
        }
        let flip = geom::orient2d(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]) < 0.0;
        for e in face.adjacent_edges() {
            let outer = match e.rev().face().as_inner() {
                None => true,
                Some(f) => excluded.contains(&f.fix()),
            };
            if outer {
                let [from, to] = e.vertices();
                let (a, b) = (index_of[from.fix().index()], index_of[to.fix().index()]);
                boundary_pairs.push(if flip { (b, a) } else { (a, b) });
            }
        }
        if flip {
            tri.swap(1, 2);
        }
        triangles.push(tri);
    }
    // Vertices first reached through a boundary pair only are already indexed
    // (boundary pairs come from inner faces).

    // Recover marks by walking the boundary loop from an original vertex.
    let next: HashMap<usize, usize> = boundary_pairs.iter().copied().collect();
    if next.len() != boundary_pairs.len() {
        return Err(Error::MeshFailure("boundary is not a simple loop".into()));
    }
    let start = boundary_pairs
        .iter()
        .map(|&(a, _)| a)
        .find(|&a| loop_pos_of[a] != NOT_ON_LOOP)
        .ok_or_else(|| Error::MeshFailure("boundary lost its input vertices".into()))?;
    let mut boundary_edges = Vec::with_capacity(boundary_pairs.len());
    let mut cur = start;
    let mut seg = loop_pos_of[start];
    loop {
        if loop_pos_of[cur] != NOT_ON_LOOP {
            seg = loop_pos_of[cur];
        }
        let nxt = next[&cur];
        let src = loop_edge_src[seg];
        boundary_edges.push(BoundaryEdge { a: cur, b: nxt, mark: poly.marks[src], curve: poly.curves[src] });
        cur = nxt;
        if cur == start {
            break;
        }
        if boundary_edges.len() > boundary_pairs.len() {
            return Err(Error::MeshFailure("boundary walk did not close".into()));
        }
    }
    if boundary_edges.len() != boundary_pairs.len() {
        return Err(Error::MeshFailure("mesh boundary has several loops".into()));
    }

    let mesh = PlanarMesh {
        vertices,
        triangles,
        boundary_edges,
        curves: poly.curve_table.clone(),
        h_target: h,
    };
    check_quality(&mesh, poly, h, coarse)?;
    Ok(mesh)
}

fn poly_area(poly: &MarkedPolygon) -> f64 {
    geom::signed_area(&poly.vertices)
}

fn check_quality(mesh: &PlanarMesh, poly: &MarkedPolygon, h: f64, coarse: bool) -> Result<()> {
    mesh.validate()?;
    // Input corners sharper than this cannot meet the angle bound.
    let sharp: Vec<Point> = poly
        .interior_angles()
        .iter()
        .zip(&poly.vertices)
        .filter(|(a, _)| a.to_degrees() < 2.0 * MIN_ANGLE_DEG + 10.0)
        .map(|(_, p)| *p)
        .collect();
    for t in &mesh.triangles {
        let p = t.map(|i| mesh.vertices[i]);
        if sharp.iter().any(|s| p.iter().any(|q| q.dist(*s) < 1e-12)) {
            continue;
        }
        let ang = min_angle(p[0], p[1], p[2]).to_degrees();
        if ang < MIN_ANGLE_DEG {
            return Err(Error::MeshFailure(format!("triangle with angle {ang:.2} degrees")));
        }
        if !coarse && circumradius(p[0], p[1], p[2]) > 3.0 * h {
            return Err(Error::MeshFailure("circumradius exceeds 3h".into()));
        }
    }
    Ok(())
}

fn min_angle(a: Point, b: Point, c: Point) -> f64 {
    let ang = |p: Point, q: Point, r: Point| {
        let u = q - p;
        let v = r - p;
        u.cross(v).abs().atan2(u.dot(v))
    };
    ang(a, b, c).min(ang(b, c, a)).min(ang(c, a, b))
}

fn circumradius(a: Point, b: Point, c: Point) -> f64 {
    let (la, lb, lc) = (b.dist(c), c.dist(a), a.dist(b));
    la * lb * lc / (4.0 * geom::triangle_area(a, b, c).abs())
}

impl PlanarMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    /// Unique undirected edges, each as `(min, max)`, in first-seen order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let e = (a.min(b), a.max(b));
                if seen.insert(e) {
                    out.push(e);
                }
            }
        }
        out
    }

    pub fn area(&self) -> f64 {
        (0..self.n_triangles())
            .map(|t| {
                let [a, b, c] = self.triangle_points(t);
                geom::triangle_area(a, b, c)
            })
            .sum()
    }

    /// Boundary loop as a polygon (vertex order of the oriented edges).
    pub fn boundary_polygon(&self) -> Vec<Point> {
        self.boundary_edges.iter().map(|e| self.vertices[e.a]).collect()
    }

    /// Sorted boundary vertex indices.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.boundary_edges.iter().flat_map(|e| [e.a, e.b]).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn is_boundary_vertex(&self) -> Vec<bool> {
        let mut flag = vec![false; self.n_vertices()];
        for e in &self.boundary_edges {
            flag[e.a] = true;
            flag[e.b] = true;
        }
        flag
    }

    /// Vertices touched by an edge with the given mark.
    pub fn vertices_with_mark(&self, mark: Mark) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .boundary_edges
            .iter()
            .filter(|e| e.mark == mark)
            .flat_map(|e| [e.a, e.b])
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn has_mark(&self, mark: Mark) -> bool {
        self.boundary_edges.iter().any(|e| e.mark == mark)
    }

    /// Copy of the mesh with every boundary edge relabeled by `f`.
    pub fn remarked(&self, f: impl Fn(&BoundaryEdge, Point, Point) -> Mark) -> PlanarMesh {
        let mut out = self.clone();
        for e in &mut out.boundary_edges {
            e.mark = f(e, self.vertices[e.a], self.vertices[e.b]);
        }
        out
    }

    pub fn quality(&self) -> MeshQuality {
        let flag = self.is_boundary_vertex();
        let mut q = MeshQuality {
            min_angle_deg: f64::INFINITY,
            max_circumradius: 0.0,
            max_edge: 0.0,
            all_boundary_triangles: 0,
        };
        for (t, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = self.triangle_points(t);
            q.min_angle_deg = q.min_angle_deg.min(min_angle(a, b, c).to_degrees());
            q.max_circumradius = q.max_circumradius.max(circumradius(a, b, c));
            q.max_edge = q.max_edge.max(a.dist(b)).max(b.dist(c)).max(c.dist(a));
            if tri.iter().all(|&v| flag[v]) {
                q.all_boundary_triangles += 1;
            }
        }
        q
    }

    /// Checks orientation, edge manifoldness and boundary loop closure.
    pub fn validate(&self) -> Result<()> {
        for (t, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = self.triangle_points(t);
            if !(geom::orient2d(a, b, c) > 0.0) || tri.iter().any(|&v| v >= self.n_vertices()) {
                return Err(Error::MeshFailure(format!("triangle {t} is degenerate or inverted")));
            }
        }
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut boundary: HashSet<(usize, usize)> = HashSet::new();
        for e in &self.boundary_edges {
            if !boundary.insert((e.a.min(e.b), e.a.max(e.b))) {
                return Err(Error::MeshFailure("duplicate boundary edge".into()));
            }
        }
        for (e, &c) in &count {
            let want = if boundary.contains(e) { 1 } else { 2 };
            if c != want {
                return Err(Error::MeshFailure(format!("edge {e:?} has {c} triangles")));
            }
        }
        if boundary.iter().any(|e| !count.contains_key(e)) {
            return Err(Error::MeshFailure("boundary edge outside the mesh".into()));
        }
        let mut degree = vec![0u8; self.n_vertices()];
        for e in &self.boundary_edges {
            degree[e.a] += 1;
            degree[e.b] += 1;
        }
        if degree.iter().any(|&d| d != 0 && d != 2) {
            return Err(Error::MeshFailure("boundary loop is not closed".into()));
        }
        Ok(())
    }

    /// Uniform red refinement: each triangle splits into four through its edge
    /// midpoints; boundary midpoints of curved edges are projected onto the curve.
    pub fn refine(&self) -> PlanarMesh {
        let mut vertices = self.vertices.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut curve_of: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &self.boundary_edges {
            if let Some(c) = e.curve {
                curve_of.insert((e.a.min(e.b), e.a.max(e.b)), c);
            }
        }
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                let mut p = vertices[a].midpoint(vertices[b]);
                if let Some(&c) = curve_of.get(&key) {
                    p = self.curves[c].project(p);
                }
                vertices.push(p);
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        for e in &self.boundary_edges {
            let m = midpoint(e.a, e.b, &mut vertices);
            boundary_edges.push(BoundaryEdge { a: e.a, b: m, ..*e });
            boundary_edges.push(BoundaryEdge { a: m, b: e.b, ..*e });
        }
        PlanarMesh {
            vertices,
            triangles,
            boundary_edges,
            curves: self.curves.clone(),
            h_target: 0.5 * self.h_target,
        }
    }

    /// Plain-text export: a header line "V T B", then V lines "x y", T lines
    /// "i j k" and B lines "i j mark".
    pub fn to_text(&self) -> String {
        self.to_text_with_values(None)
    }

    /// Same as [`PlanarMesh::to_text`] with an extra per-vertex value column.
    pub fn to_text_with_values(&self, values: Option<&[f64]>) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} {} {}",
            self.n_vertices(),
            self.n_triangles(),
            self.boundary_edges.len()
        );
        for (i, p) in self.vertices.iter().enumerate() {
            match values {
                Some(v) => {
                    let _ = writeln!(s, "{:?} {:?} {:?}", p.x, p.y, v[i]);
                }
                None => {
                    let _ = writeln!(s, "{:?} {:?}", p.x, p.y);
                }
            }
        }
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        for e in &self.boundary_edges {
            let _ = writeln!(s, "{} {} {}", e.a, e.b, e.mark.as_str());
        }
        s
    }

    /// Parses the text export (curve information is not part of the format).
    pub fn from_text(text: &str) -> Result<PlanarMesh> {
        let bad = |what: &str| Error::InvalidInput(format!("mesh text: {what}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("empty"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("header")))
            .collect::<Result<_>>()?;
        if header.len() != 3 {
            return Err(bad("header needs V T B"));
        }
        let (nv, nt, nb) = (header[0], header[1], header[2]);
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let f: Vec<f64> = lines
                .next()
                .ok_or_else(|| bad("missing vertex"))?
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad("vertex")))
                .collect::<Result<_>>()?;
            if f.len() < 2 {
                return Err(bad("vertex needs x y"));
            }
            vertices.push(Point::new(f[0], f[1]));
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let f: Vec<usize> = lines
                .next()
                .ok_or_else(|| bad("missing triangle"))?
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad("triangle")))
                .collect::<Result<_>>()?;
            if f.len() != 3 {
                return Err(bad("triangle needs i j k"));
            }
            triangles.push([f[0], f[1], f[2]]);
        }
        let mut boundary_edges = Vec::with_capacity(nb);
        for _ in 0..nb {
            let line = lines.next().ok_or_else(|| bad("missing boundary edge"))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad("boundary edge needs i j mark"));
            }
            let mark = match f[2] {
                "steklov" => Mark::Steklov,
                "dirichlet" => Mark::Dirichlet,
                _ => return Err(bad("unknown mark")),
            };
            boundary_edges.push(BoundaryEdge {
                a: f[0].parse().map_err(|_| bad("edge index"))?,
                b: f[1].parse().map_err(|_| bad("edge index"))?,
                mark,
                curve: None,
            });
        }
        let h_target = triangles
            .iter()
            .flat_map(|t: &[usize; 3]| (0..3).map(move |k| (t[k], t[(k + 1) % 3])))
            .map(|(a, b)| vertices[a].dist(vertices[b]))
            .fold(0.0, f64::max);
        let mesh = PlanarMesh { vertices, triangles, boundary_edges, curves: Vec::new(), h_target };
        mesh.validate()?;
        Ok(mesh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::clip_ball;
    use std::f64::consts::PI;

    fn euler(mesh: &PlanarMesh) -> i64 {
        mesh.n_vertices() as i64 - mesh.edges().len() as i64 + mesh.n_triangles() as i64
    }

    #[test]
    fn coarse_square_is_two_triangles() {
        let m = triangulate_domain(&DomainSpec::square(1.0), 2.0).unwrap();
        assert_eq!(m.n_triangles(), 2);
        assert_eq!(m.n_vertices(), 4);
        assert_eq!(m.boundary_edges.len(), 4);
        let r = m.refine();
        assert_eq!(r.n_triangles(), 8);
        assert_eq!(r.n_vertices(), 9);
        r.validate().unwrap();
    }

    #[test]
    fn disk_vertex_count_matches_area_estimate() {
        let h = 0.1;
        let m = triangulate_domain(&DomainSpec::unit_disk(256), h).unwrap();
        let v = m.n_vertices() as f64;
        assert!(v >= PI / (4.0 * h * h) && v <= 4.0 * PI / (h * h), "V = {v}");
        assert_eq!(euler(&m), 1);
        let q = m.quality();
        assert!(q.min_angle_deg >= 20.0);
        assert!(q.max_circumradius <= 3.0 * h);
    }

    #[test]
    fn area_matches_shoelace() {
        for d in DomainSpec::catalog() {
            let m = triangulate_domain(&d, 0.1 * d.diameter()).unwrap();
            let want = geom::signed_area(&m.boundary_polygon());
            assert!((m.area() - want).abs() <= 1e-10 * want, "{}", d.id);
            assert!((m.area() - d.area()).abs() <= 1e-10 * want, "{}", d.id);
            assert_eq!(euler(&m), 1, "{}", d.id);
        }
    }

    #[test]
    fn refine_bookkeeping() {
        let m = triangulate_domain(&DomainSpec::unit_disk(64), 0.3).unwrap();
        let (v, e, t) = (m.n_vertices(), m.edges().len(), m.n_triangles());
        let r = m.refine();
        assert_eq!(r.n_vertices(), v + e);
        assert_eq!(r.n_triangles(), 4 * t);
        r.validate().unwrap();
        // Boundary midpoints were pushed onto the unit circle.
        for e in &r.boundary_edges {
            assert!((r.vertices[e.a].norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(euler(&r), 1);
    }

    #[test]
    fn refine_twice_quarters_edges() {
        let m = triangulate_domain(&DomainSpec::unit_disk(32), 0.25).unwrap();
        let before = m.quality().max_edge;
        let after = m.refine().refine().quality().max_edge;
        // Curved-boundary projection moves midpoints by O(h^2).
        assert!(after <= 0.25 * before + before * before, "{before} -> {after}");
    }

    #[test]
    fn region_marks_follow_the_sphere() {
        let region = clip_ball(&DomainSpec::flat_graph(), Point::new(0.0, 0.0), 1.0).unwrap();
        let h = 0.05;
        let m = triangulate_region(&region, h).unwrap();
        m.validate().unwrap();
        for e in &m.boundary_edges {
            let (a, b) = (m.vertices[e.a], m.vertices[e.b]);
            match e.mark {
                Mark::Dirichlet => {
                    for p in [a, b, a.midpoint(b)] {
                        assert!((p.norm() - 1.0).abs() <= 1.5 * h);
                    }
                }
                Mark::Steklov => assert!(a.y.abs() < 1e-12 && b.y.abs() < 1e-12),
            }
        }
        let r = m.refine();
        assert_eq!(
            r.boundary_edges.iter().filter(|e| e.mark == Mark::Dirichlet).count(),
            2 * m.boundary_edges.iter().filter(|e| e.mark == Mark::Dirichlet).count()
        );
        assert!(((m.area() - PI / 2.0) / (PI / 2.0)).abs() < 0.01);
    }

    #[test]
    fn corners_are_graded() {
        let m = triangulate(&MarkedPolygon::sloshing_tank(1.0, 1.0), 0.1).unwrap();
        let corner = Point::new(1.0, 0.0);
        let near = m
            .triangles
            .iter()
            .enumerate()
            .filter(|(t, _)| m.triangle_points(*t).iter().any(|p| p.dist(corner) < 1e-12))
            .map(|(t, _)| {
                let [a, b, c] = m.triangle_points(t);
                a.dist(b).max(b.dist(c)).max(c.dist(a))
            })
            .fold(0.0, f64::max);
        assert!(near <= 0.1, "largest edge at corner {near}");
    }

    #[test]
    fn text_round_trip() {
        let m = triangulate_domain(&DomainSpec::l_shape(), 0.1).unwrap();
        let text = m.to_text();
        assert!(text.starts_with(&format!(
            "{} {} {}\n",
            m.n_vertices(),
            m.n_triangles(),
            m.boundary_edges.len()
        )));
        let back = PlanarMesh::from_text(&text).unwrap();
        assert_eq!(back.vertices, m.vertices);
        assert_eq!(back.triangles, m.triangles);
        assert_eq!(back.boundary_edges.len(), m.boundary_edges.len());
    }
}
