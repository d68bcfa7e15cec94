//! Catalog of planar test domains and the boundary-ball regions
//! `W = B(x0, s) ∩ Ω` on which the mixed problem is posed.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Point};

/// Exact curve a boundary edge approximates; used to project new boundary
/// points during uniform refinement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Curve {
    Circle { center: Point, radius: f64 },
    /// Star-shaped curve `r(θ)` about the origin, scaled by `scale`.
    Radial { radius: RadialFunction, scale: f64 },
}

impl Curve {
    pub fn project(&self, p: Point) -> Point {
        match self {
            Curve::Circle { center, radius } => {
                let d = p - *center;
                let n = d.norm();
                if n == 0.0 {
                    return p;
                }
                *center + d * (radius / n)
            }
            Curve::Radial { radius, scale } => {
                let theta = p.angle();
                Point::from_polar(scale * radius.eval(theta), theta)
            }
        }
    }
}

/// `r(θ) = c₀ + Σ_{k≥1} (c_k cos kθ + s_k sin kθ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialFunction {
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl RadialFunction {
    pub fn eval(&self, theta: f64) -> f64 {
        let mut r = self.cos.first().copied().unwrap_or(0.0);
        for (k, c) in self.cos.iter().enumerate().skip(1) {
            r += c * (k as f64 * theta).cos();
        }
        for (k, s) in self.sin.iter().enumerate().skip(1) {
            r += s * (k as f64 * theta).sin();
        }
        r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    UnitDiskPolygon {
        #[serde(default = "default_sides")]
        n_sides: usize,
    },
    /// `[-a, a]²`.
    Square { a: f64 },
    /// `[-a, a] × [-b, b]`.
    Rectangle { a: f64, b: f64 },
    LShape,
    PerturbedDisk {
        radius: RadialFunction,
        #[serde(default = "default_sides")]
        n_sides: usize,
    },
    /// `{ -1 < x < 1, -depth < y < g(x) }` with `g` piecewise linear through
    /// `knots` (ascending x, spanning [-1, 1]) and Lipschitz constant `gamma`.
    LipschitzGraph {
        knots: Vec<Point>,
        gamma: f64,
        depth: f64,
    },
}

fn default_sides() -> usize {
    256
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub id: String,
    #[serde(flatten)]
    pub kind: DomainKind,
    /// Uniform dilation about the origin.
    #[serde(default = "default_scale")]
    pub scale: f64,
}

impl DomainSpec {
    pub fn new(id: impl Into<String>, kind: DomainKind) -> Self {
        Self { id: id.into(), kind, scale: 1.0 }
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.scale *= factor;
        self
    }

    pub fn unit_disk(n_sides: usize) -> Self {
        Self::new("unit_disk", DomainKind::UnitDiskPolygon { n_sides })
    }

    pub fn square(a: f64) -> Self {
        Self::new("square", DomainKind::Square { a })
    }

    pub fn rectangle(a: f64, b: f64) -> Self {
        Self::new("rectangle", DomainKind::Rectangle { a, b })
    }

    pub fn l_shape() -> Self {
        Self::new("l_shape", DomainKind::LShape)
    }

    pub fn perturbed_disk() -> Self {
        Self::new(
            "perturbed_disk",
            DomainKind::PerturbedDisk {
                radius: RadialFunction {
                    cos: vec![1.0, 0.0, 0.1, 0.06],
                    sin: vec![0.0, 0.0, 0.0, 0.0, 0.05],
                },
                n_sides: 256,
            },
        )
    }

    /// Flat graph `g ≡ 0`; the lower half of the strip behaves like a half-plane
    /// for balls of radius at most 1 centered on the graph.
    pub fn flat_graph() -> Self {
        Self::new(
            "flat_graph",
            DomainKind::LipschitzGraph {
                knots: vec![Point::new(-1.0, 0.0), Point::new(1.0, 0.0)],
                gamma: 1.0,
                depth: 1.5,
            },
        )
    }

    /// Sawtooth graph with slopes ±`gamma`, period `period`, `g(0) = 0`.
    pub fn sawtooth(gamma: f64, period: f64) -> Self {
        let teeth = (2.0 / period).round().max(1.0) as usize;
        let dx = 2.0 / (2 * teeth) as f64;
        let knots = (0..=2 * teeth)
            .map(|i| {
                let x = -1.0 + i as f64 * dx;
                // Distance-to-even-knot profile keeps g(0) = 0 when teeth is even.
                let y = if i % 2 == 0 { 0.0 } else { gamma * dx };
                Point::new(x, y)
            })
            .collect();
        Self::new(
            "lipschitz_sawtooth",
            DomainKind::LipschitzGraph { knots, gamma, depth: 1.5 },
        )
    }

    /// The default catalog exercised by the scaling suites.
    pub fn catalog() -> Vec<DomainSpec> {
        vec![
            Self::unit_disk(256),
            Self::square(1.0),
            Self::rectangle(2.0, 0.5),
            Self::l_shape(),
            Self::perturbed_disk(),
            Self::sawtooth(1.0, 0.2),
        ]
    }

    /// Looks up a built-in domain by id (see [`DomainSpec::catalog`]).
    pub fn by_id(id: &str) -> Option<DomainSpec> {
        match id {
            "flat_graph" => Some(Self::flat_graph()),
            _ => Self::catalog().into_iter().find(|d| d.id == id),
        }
    }

    /// Counter-clockwise boundary polygon.
    pub fn polygon(&self) -> Vec<Point> {
        let raw: Vec<Point> = match &self.kind {
            DomainKind::UnitDiskPolygon { n_sides } => (0..*n_sides)
                .map(|i| Point::from_polar(1.0, 2.0 * PI * i as f64 / *n_sides as f64))
                .collect(),
            DomainKind::Square { a } => rect_polygon(*a, *a),
            DomainKind::Rectangle { a, b } => rect_polygon(*a, *b),
            DomainKind::LShape => {
                let k = 1.0 / (2.0 * 2f64.sqrt());
                [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]
                    .iter()
                    .map(|&(x, y)| Point::new(x * k, y * k))
                    .collect()
            }
            DomainKind::PerturbedDisk { radius, n_sides } => (0..*n_sides)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / *n_sides as f64;
                    Point::from_polar(radius.eval(t), t)
                })
                .collect(),
            DomainKind::LipschitzGraph { knots, depth, .. } => {
                let mut v = vec![Point::new(-1.0, -depth), Point::new(1.0, -depth)];
                v.extend(knots.iter().rev().copied());
                v
            }
        };
        raw.into_iter().map(|p| p * self.scale).collect()
    }

    /// Exact curve the polygon approximates, if the boundary is curved.
    pub fn curve(&self) -> Option<Curve> {
        match &self.kind {
            DomainKind::UnitDiskPolygon { .. } => Some(Curve::Circle {
                center: Point::default(),
                radius: self.scale,
            }),
            DomainKind::PerturbedDisk { radius, .. } => Some(Curve::Radial {
                radius: radius.clone(),
                scale: self.scale,
            }),
            _ => None,
        }
    }

    /// The upper graph of a `LipschitzGraph` domain (in scaled coordinates).
    pub fn graph(&self) -> Option<PiecewiseLinear> {
        match &self.kind {
            DomainKind::LipschitzGraph { knots, .. } => Some(PiecewiseLinear {
                knots: knots.iter().map(|&p| p * self.scale).collect(),
            }),
            _ => None,
        }
    }

    pub fn lipschitz_constant(&self) -> Option<f64> {
        match &self.kind {
            DomainKind::LipschitzGraph { gamma, .. } => Some(*gamma),
            _ => None,
        }
    }

    pub fn diameter(&self) -> f64 {
        let p = self.polygon();
        let mut d: f64 = 0.0;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                d = d.max(p[i].dist(p[j]));
            }
        }
        d
    }

    pub fn perimeter(&self) -> f64 {
        geom::perimeter(&self.polygon())
    }

    pub fn area(&self) -> f64 {
        geom::signed_area(&self.polygon())
    }

    /// Largest ball radius for which boundary-ball regions are used in sweeps.
    /// Chosen per kind so that `B(x0, s) ∩ Ω` stays connected for every
    /// boundary point; not derived from any estimate.
    pub fn s_max(&self) -> f64 {
        let base = match &self.kind {
            DomainKind::UnitDiskPolygon { .. } => 0.5,
            DomainKind::Square { a } => 0.5 * a,
            DomainKind::Rectangle { a, b } => 0.5 * a.min(*b),
            DomainKind::LShape => 0.15,
            DomainKind::PerturbedDisk { .. } => 0.3,
            DomainKind::LipschitzGraph { depth, .. } => 0.4f64.min(0.5 * depth),
        };
        base * self.scale
    }

    /// Checks the catalog invariants: positive orientation, simple boundary,
    /// and the Lipschitz bound of graph domains.
    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0) {
            return Err(Error::InvalidInput(format!("{}: scale must be positive", self.id)));
        }
        match &self.kind {
            DomainKind::UnitDiskPolygon { n_sides } | DomainKind::PerturbedDisk { n_sides, .. }
                if *n_sides < 3 =>
            {
                return Err(Error::InvalidInput(format!("{}: n_sides < 3", self.id)));
            }
            DomainKind::Square { a } if !(*a > 0.0) => {
                return Err(Error::InvalidInput(format!("{}: a must be positive", self.id)));
            }
            DomainKind::Rectangle { a, b } if !(*a > 0.0 && *b > 0.0) => {
                return Err(Error::InvalidInput(format!("{}: sides must be positive", self.id)));
            }
            DomainKind::PerturbedDisk { radius, n_sides } => {
                let min_r = (0..4 * n_sides)
                    .map(|i| radius.eval(2.0 * PI * i as f64 / (4 * n_sides) as f64))
                    .fold(f64::INFINITY, f64::min);
                if !(min_r > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "{}: radial function not positive",
                        self.id
                    )));
                }
            }
            DomainKind::LipschitzGraph { knots, gamma, depth } => {
                if knots.len() < 2 {
                    return Err(Error::InvalidInput(format!("{}: need two knots", self.id)));
                }
                let first = knots[0].x;
                let last = knots[knots.len() - 1].x;
                if (first + 1.0).abs() > 1e-12 || (last - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "{}: knots must span [-1, 1]",
                        self.id
                    )));
                }
                for w in knots.windows(2) {
                    let dx = w[1].x - w[0].x;
                    if !(dx > 0.0) {
                        return Err(Error::InvalidInput(format!(
                            "{}: knots must be strictly increasing in x",
                            self.id
                        )));
                    }
                    if (w[1].y - w[0].y).abs() > gamma * dx * (1.0 + 1e-12) {
                        return Err(Error::InvalidInput(format!(
                            "{}: slope exceeds Lipschitz constant {gamma}",
                            self.id
                        )));
                    }
                }
                let min_g = knots.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
                if !(-depth < min_g) {
                    return Err(Error::InvalidInput(format!(
                        "{}: depth must exceed the graph's lowest point",
                        self.id
                    )));
                }
            }
            _ => {}
        }
        let poly = self.polygon();
        if !(geom::signed_area(&poly) > 0.0) {
            return Err(Error::InvalidInput(format!("{}: boundary not positively oriented", self.id)));
        }
        if !is_simple(&poly) {
            return Err(Error::InvalidInput(format!("{}: boundary self-intersects", self.id)));
        }
        Ok(())
    }
}

fn rect_polygon(a: f64, b: f64) -> Vec<Point> {
    vec![
        Point::new(-a, -b),
        Point::new(a, -b),
        Point::new(a, b),
        Point::new(-a, b),
    ]
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = geom::orient2d(a, b, c);
    let d2 = geom::orient2d(a, b, d);
    let d3 = geom::orient2d(c, d, a);
    let d4 = geom::orient2d(c, d, b);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0
}

fn is_simple(poly: &[Point]) -> bool {
    let n = poly.len();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// Piecewise-linear function through `knots` (ascending x).
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear {
    pub knots: Vec<Point>,
}

impl PiecewiseLinear {
    pub fn constant(value: f64, x_min: f64, x_max: f64) -> Self {
        Self { knots: vec![Point::new(x_min, value), Point::new(x_max, value)] }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        if x <= k[0].x {
            return k[0].y;
        }
        for w in k.windows(2) {
            if x <= w[1].x {
                let t = (x - w[0].x) / (w[1].x - w[0].x);
                return w[0].y + t * (w[1].y - w[0].y);
            }
        }
        k[k.len() - 1].y
    }

    /// Knot abscissae strictly inside (lo, hi), with lo and hi added.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut xs = vec![lo];
        xs.extend(self.knots.iter().map(|p| p.x).filter(|&x| x > lo && x < hi));
        xs.push(hi);
        xs
    }
}

/// A point on the boundary together with its arclength parameter measured
/// from polygon vertex 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundarySample {
    pub point: Point,
    pub arclength: f64,
}

/// `n` points equally spaced in arclength along the boundary, starting at
/// polygon vertex 0.
pub fn boundary_points(spec: &DomainSpec, n: usize) -> Result<Vec<BoundarySample>> {
    if n < 3 {
        return Err(Error::InvalidInput("boundary_points needs n >= 3".into()));
    }
    let poly = spec.polygon();
    let total = geom::perimeter(&poly);
    let step = total / n as f64;
    let m = poly.len();
    let mut out = Vec::with_capacity(n);
    let mut edge = 0;
    let mut edge_start = 0.0;
    for i in 0..n {
        let s = i as f64 * step;
        loop {
            let len = poly[edge].dist(poly[(edge + 1) % m]);
            if s <= edge_start + len || edge == m - 1 {
                let t = if len > 0.0 { ((s - edge_start) / len).clamp(0.0, 1.0) } else { 0.0 };
                out.push(BoundarySample {
                    point: poly[edge].lerp(poly[(edge + 1) % m], t),
                    arclength: s,
                });
                break;
            }
            edge_start += len;
            edge += 1;
        }
    }
    Ok(out)
}

/// Length of the part of the closed polyline `poly` inside the open ball B(c, r).
pub fn arclength_in_ball(poly: &[Point], c: Point, r: f64) -> f64 {
    let n = poly.len();
    let mut total = 0.0;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let len = a.dist(b);
        if let Some((t1, t2)) = geom::segment_circle_params(a, b, c, r) {
            let lo = t1.max(0.0);
            let hi = t2.min(1.0);
            if hi > lo {
                total += (hi - lo) * len;
            }
        }
    }
    total
}

/// Counter-clockwise arc of the circle `|x - center| = radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleArc {
    pub center: Point,
    pub radius: f64,
    pub start_angle: f64,
    /// Positive angular extent.
    pub sweep: f64,
}

impl CircleArc {
    pub fn point_at(&self, t: f64) -> Point {
        self.center + Point::from_polar(self.radius, self.start_angle + t * self.sweep)
    }

    pub fn start(&self) -> Point {
        self.point_at(0.0)
    }

    pub fn end(&self) -> Point {
        self.point_at(1.0)
    }

    pub fn length(&self) -> f64 {
        self.radius * self.sweep
    }
}

/// One piece of the boundary loop of `W`.
#[derive(Clone, Debug, PartialEq)]
pub enum RegionPiece {
    /// Polyline along ∂Ω inside the ball (Steklov part).
    Free(Vec<Point>),
    /// Arc of ∂B(x0, s) inside Ω (Dirichlet part).
    Sphere(CircleArc),
}

/// `W = B(x0, s) ∩ Ω` with its boundary split into the Steklov part `F`
/// (arcs of ∂Ω inside the ball) and the Dirichlet part `S` (arcs of the
/// sphere inside Ω).
#[derive(Clone, Debug)]
pub struct BoundaryBallRegion {
    pub parent: DomainSpec,
    pub x0: Point,
    pub s: f64,
    /// Positively oriented boundary loop, alternating F and S pieces.
    pub pieces: Vec<RegionPiece>,
}

impl BoundaryBallRegion {
    pub fn f_arcs(&self) -> impl Iterator<Item = &Vec<Point>> {
        self.pieces.iter().filter_map(|p| match p {
            RegionPiece::Free(pts) => Some(pts),
            RegionPiece::Sphere(_) => None,
        })
    }

    pub fn s_arcs(&self) -> impl Iterator<Item = &CircleArc> {
        self.pieces.iter().filter_map(|p| match p {
            RegionPiece::Sphere(a) => Some(a),
            RegionPiece::Free(_) => None,
        })
    }

    pub fn f_length(&self) -> f64 {
        self.f_arcs()
            .map(|pts| pts.windows(2).map(|w| w[0].dist(w[1])).sum::<f64>())
            .sum()
    }

    /// Exact area, integrating `(x dy - y dx) / 2` along straight and circular pieces.
    pub fn area(&self) -> f64 {
        let mut twice = 0.0;
        for piece in &self.pieces {
            match piece {
                RegionPiece::Free(pts) => {
                    for w in pts.windows(2) {
                        twice += w[0].cross(w[1]);
                    }
                }
                RegionPiece::Sphere(arc) => {
                    let (c, r) = (arc.center, arc.radius);
                    let t0 = arc.start_angle;
                    let t1 = t0 + arc.sweep;
                    twice += r * r * arc.sweep
                        + r * (c.x * (t1.sin() - t0.sin()) - c.y * (t1.cos() - t0.cos()));
                }
            }
        }
        0.5 * twice
    }
}

#[derive(Clone, Copy, Debug)]
struct Crossing {
    /// Arclength position along the re-rooted boundary walk.
    pos: f64,
    point: Point,
    entering: bool,
}

/// Intersects Ω with the ball `B(x0, s)` for a boundary point `x0`.
///
/// Circle/segment intersections are computed analytically and ordered by the
/// boundary's arclength; tangential contact is not a crossing. Fails with
/// [`Error::DisconnectedRegion`] when the intersection has more than one
/// component.
pub fn clip_ball(spec: &DomainSpec, x0: Point, s: f64) -> Result<BoundaryBallRegion> {
    if !(s > 0.0) {
        return Err(Error::InvalidInput("ball radius must be positive".into()));
    }
    let poly = spec.polygon();
    let n = poly.len();
    let tol = 1e-9 * spec.diameter();

    // Re-root the boundary loop at x0.
    let (edge, t_on) = (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            let t = geom::closest_param_on_segment(x0, a, b);
            (i, t, x0.dist(a.lerp(b, t)))
        })
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .map(|(i, t, d)| {
            if d > tol {
                Err(Error::InvalidInput(format!("x0 is {d:e} away from the boundary")))
            } else {
                Ok((i, t))
            }
        })
        .expect("polygon has edges")?;
    let mut walk = vec![x0];
    let first = if t_on >= 1.0 { edge + 2 } else { edge + 1 };
    for k in 0..n {
        let p = poly[(first + k) % n];
        if p.dist(x0) > 0.0 {
            walk.push(p);
        }
    }
    walk.push(x0);

    // Events along the walk.
    let mut crossings = Vec::new();
    let mut pos = 0.0;
    for w in walk.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = a.dist(b);
        if let Some((t1, t2)) = geom::segment_circle_params(a, b, x0, s) {
            if (0.0..1.0).contains(&t1) {
                crossings.push(Crossing { pos: pos + t1 * len, point: a.lerp(b, t1), entering: true });
            }
            if t2 > 0.0 && t2 <= 1.0 {
                crossings.push(Crossing { pos: pos + t2 * len, point: a.lerp(b, t2), entering: false });
            }
        }
        pos += len;
    }
    let total = pos;
    crossings.sort_by(|a, b| a.pos.total_cmp(&b.pos));
    // Drop zero-length excursions (exit immediately followed by re-entry at a
    // vertex lying exactly on the circle).
    let mut cleaned: Vec<Crossing> = Vec::with_capacity(crossings.len());
    for c in crossings {
        if let Some(last) = cleaned.last() {
            if !last.entering && c.entering && (c.pos - last.pos).abs() <= tol {
                cleaned.pop();
                continue;
            }
        }
        cleaned.push(c);
    }
    let crossings = cleaned;
    if crossings.is_empty() {
        return Err(Error::BallCoversDomain { radius: s });
    }
    let alternating = crossings
        .iter()
        .enumerate()
        .all(|(i, c)| c.entering == (i % 2 == 1));
    if !alternating || crossings.len() % 2 != 0 {
        return Err(Error::InvalidInput("inconsistent circle crossings".into()));
    }

    // F arcs: each runs from an entry (or the walk start) to the next exit.
    let m = crossings.len() / 2;
    let slice_walk = |from: f64, to: f64, from_pt: Point, to_pt: Point| -> Vec<Point> {
        let mut pts = vec![from_pt];
        let mut acc = 0.0;
        for w in walk.windows(2) {
            let len = w[0].dist(w[1]);
            acc += len;
            if acc > from + tol && acc < to - tol && acc < total - tol {
                pts.push(w[1]);
            }
        }
        pts.push(to_pt);
        pts
    };
    // Arc i starts at entry 2i-1 (arc 0 wraps around x0) and ends at exit 2i.
    let mut f_arcs: Vec<Vec<Point>> = Vec::with_capacity(m);
    for i in 0..m {
        let exit = crossings[2 * i];
        if i == 0 {
            let entry = crossings[2 * m - 1];
            let mut tail = slice_walk(entry.pos, total, entry.point, x0);
            tail.pop();
            let head = slice_walk(0.0, exit.pos, x0, exit.point);
            tail.extend(head);
            f_arcs.push(tail);
        } else {
            let entry = crossings[2 * i - 1];
            f_arcs.push(slice_walk(entry.pos, exit.pos, entry.point, exit.point));
        }
    }
    // Entry index j (into crossings) -> F arc that starts there.
    let arc_of_entry = |ci: usize| if ci == 2 * m - 1 { 0 } else { (ci + 1) / 2 };

    // From each exit, walk the circle counter-clockwise to the next crossing.
    let angle_of = |p: Point| (p - x0).angle().rem_euclid(2.0 * PI);
    let mut by_angle: Vec<usize> = (0..crossings.len()).collect();
    by_angle.sort_by(|&a, &b| angle_of(crossings[a].point).total_cmp(&angle_of(crossings[b].point)));
    let mut next_arc = vec![0usize; m];
    let mut s_arcs = vec![None; m];
    for (i, slot) in next_arc.iter_mut().enumerate() {
        let exit_idx = 2 * i;
        let k = by_angle.iter().position(|&c| c == exit_idx).unwrap();
        let nxt = by_angle[(k + 1) % by_angle.len()];
        if !crossings[nxt].entering {
            return Err(Error::InvalidInput("circle crossings do not alternate".into()));
        }
        let a0 = angle_of(crossings[exit_idx].point);
        let mut a1 = angle_of(crossings[nxt].point);
        if a1 <= a0 {
            a1 += 2.0 * PI;
        }
        s_arcs[i] = Some(CircleArc { center: x0, radius: s, start_angle: a0, sweep: a1 - a0 });
        *slot = arc_of_entry(nxt);
    }

    // Follow F -> S -> F links; more than one cycle means several components.
    let mut seen = vec![false; m];
    let mut components = 0;
    let mut pieces = Vec::new();
    for start in 0..m {
        if seen[start] {
            continue;
        }
        components += 1;
        let mut cur = start;
        while !seen[cur] {
            seen[cur] = true;
            if components == 1 {
                pieces.push(RegionPiece::Free(f_arcs[cur].clone()));
                pieces.push(RegionPiece::Sphere(s_arcs[cur].unwrap()));
            }
            cur = next_arc[cur];
        }
    }
    if components > 1 {
        return Err(Error::DisconnectedRegion { radius: s, components });
    }
    Ok(BoundaryBallRegion { parent: spec.clone(), x0, s, pieces })
}
