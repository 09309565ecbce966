//! Polygonal curves in 3-space, projections along a direction and the
//! geometric predicates the diagram layer relies on.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when the caller does not supply one.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn dot(self, o: Point3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Point3) -> Point3 {
        Point3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Point3 {
        self * (1.0 / self.norm())
    }

    pub fn distance(self, o: Point3) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Component of largest magnitude is reported last, so index 0 is the
    /// axis least aligned with `self`.
    fn axis_order(self) -> [usize; 3] {
        let a = [self.x.abs(), self.y.abs(), self.z.abs()];
        let mut idx = [0, 1, 2];
        idx.sort_by(|&i, &j| a[i].total_cmp(&a[j]));
        idx
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// A straight segment `start -> end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: Point3,
    pub end: Point3,
}

impl Segment {
    pub fn new(start: Point3, end: Point3) -> Self {
        Segment { start, end }
    }

    pub fn vector(&self) -> Point3 {
        self.end - self.start
    }

    pub fn length(&self) -> f64 {
        self.vector().norm()
    }

    pub fn at(&self, t: f64) -> Point3 {
        self.start + self.vector() * t
    }

    /// Closest distance between two segments in 3-space.
    pub fn distance_to(&self, other: &Segment) -> f64 {
        let d1 = self.vector();
        let d2 = other.vector();
        let r = self.start - other.start;
        let a = d1.dot(d1);
        let e = d2.dot(d2);
        let f = d2.dot(r);
        let c = d1.dot(r);
        let b = d1.dot(d2);
        let denom = a * e - b * b;
        let mut s = if denom > 1e-300 {
            ((b * f - c * e) / denom).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let mut t = (b * s + f) / e;
        if t < 0.0 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else if t > 1.0 {
            t = 1.0;
            s = ((b - c) / a).clamp(0.0, 1.0);
        }
        self.at(s).distance(other.at(t))
    }
}

/// Unit vector on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction(Point3);

impl Direction {
    /// Normalises `v`; fails on a zero or non-finite vector.
    pub fn new(v: Point3) -> Result<Self> {
        let n = v.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidInput(format!("cannot normalise direction {v}")));
        }
        Ok(Direction(v * (1.0 / n)))
    }

    pub fn vector(self) -> Point3 {
        self.0
    }

    pub fn antipode(self) -> Direction {
        Direction(-self.0)
    }

    /// Right-handed orthonormal frame `(u, v)` with `u x v = self`, built from
    /// the coordinate axis least aligned with the direction.
    pub fn frame(self) -> (Point3, Point3) {
        let d = self.0;
        let k = d.axis_order()[0];
        let mut a = Point3::default();
        match k {
            0 => a.x = 1.0,
            1 => a.y = 1.0,
            _ => a.z = 1.0,
        }
        let u = (a - d * a.dot(d)).normalized();
        let v = d.cross(u);
        (u, v)
    }
}

/// Arc-length coordinate along a curve, measured from its first vertex.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ArcPosition(pub f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonalCurve {
    closed: bool,
    vertices: Vec<Point3>,
}

impl PolygonalCurve {
    /// Validates and builds a curve. For closed curves the closing edge from
    /// the last vertex back to the first is implicit.
    pub fn new(vertices: Vec<Point3>, closed: bool) -> Result<Self> {
        let min_vertices = if closed { 3 } else { 2 };
        if vertices.len() < min_vertices {
            return Err(Error::InvalidInput(format!(
                "{} curve needs at least {min_vertices} vertices, got {}",
                if closed { "closed" } else { "open" },
                vertices.len()
            )));
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite vertex {p}")));
        }
        let curve = PolygonalCurve { closed, vertices };
        let scale = curve.diameter().max(f64::MIN_POSITIVE);
        let edges: Vec<Segment> = curve.edges().collect();
        for (i, e) in edges.iter().enumerate() {
            if e.length() <= 1e-12 * scale {
                return Err(Error::InvalidInput(format!("edge {i} has zero length")));
            }
        }
        let pairs = if closed { edges.len() } else { edges.len() - 1 };
        for i in 0..pairs {
            let a = edges[i].vector();
            let b = edges[(i + 1) % edges.len()].vector();
            let sin = a.cross(b).norm() / (a.norm() * b.norm());
            if sin <= 1e-12 && a.dot(b) < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "edges {i} and {} fold back onto each other",
                    (i + 1) % edges.len()
                )));
            }
        }
        Ok(curve)
    }

    pub fn open(vertices: Vec<Point3>) -> Result<Self> {
        Self::new(vertices, false)
    }

    pub fn closed(vertices: Vec<Point3>) -> Result<Self> {
        Self::new(vertices, true)
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn edge_count(&self) -> usize {
        if self.closed {
            self.vertices.len()
        } else {
            self.vertices.len() - 1
        }
    }

    pub fn edge(&self, i: usize) -> Segment {
        let n = self.vertices.len();
        Segment::new(self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        (0..self.edge_count()).map(move |i| self.edge(i))
    }

    /// Arc-length position of the start of every edge, plus the total length
    /// as the final entry.
    pub fn cumulative_lengths(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.edge_count() + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for e in self.edges() {
            acc += e.length();
            out.push(acc);
        }
        out
    }

    pub fn length(&self) -> f64 {
        self.edges().map(|e| e.length()).sum()
    }

    /// Largest vertex-to-vertex distance.
    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max(v[i].distance(v[j]));
            }
        }
        d
    }

    /// Maps an arc-length position to the `[0, 1]` parametrisation.
    pub fn unit_parameter(&self, pos: ArcPosition) -> f64 {
        pos.0 / self.length()
    }

    /// Distance between the first and last vertex (zero for closed curves).
    pub fn endpoint_gap(&self) -> f64 {
        if self.closed {
            0.0
        } else {
            self.vertices[0].distance(*self.vertices.last().unwrap())
        }
    }

    /// Reverses traversal order.
    pub fn reversed(&self) -> PolygonalCurve {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        PolygonalCurve { closed: self.closed, vertices }
    }
}

/// Direction number `index` of the stream identified by `seed`.
///
/// Every sample index owns an independent ChaCha stream, so the value never
/// depends on how indices are distributed over threads. `attempt` selects
/// successive draws within one index (used for resampling rejected
/// directions).
pub fn direction_at(seed: u64, index: u64, attempt: u32) -> Direction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ splitmix64(index));
    let mut d = random_direction(&mut rng);
    for _ in 0..attempt {
        d = random_direction(&mut rng);
    }
    d
}

fn random_direction<R: Rng>(rng: &mut R) -> Direction {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).max(0.0).sqrt();
    let v = Point3::new(r * phi.cos(), r * phi.sin(), z);
    Direction(v.normalized())
}

pub(crate) fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `count` i.i.d. uniform directions; entry `i` equals `direction_at(seed, i, 0)`.
pub fn sample_directions(count: usize, seed: u64) -> Vec<Direction> {
    (0..count as u64).map(|i| direction_at(seed, i, 0)).collect()
}

/// Orthogonal projection of a curve onto the plane perpendicular to a
/// direction. Depth grows towards the viewer, who looks down `-dir`.
#[derive(Debug, Clone)]
pub struct ProjectedCurve {
    pub dir: Direction,
    pub points: Vec<[f64; 2]>,
    pub depth: Vec<f64>,
    pub closed: bool,
    /// Arc-length position of each vertex in the original curve; one extra
    /// trailing entry holds the total length.
    pub arc: Vec<f64>,
    /// Diameter of the 3D curve, the scale for relative tolerances.
    pub scale: f64,
}

impl ProjectedCurve {
    pub fn edge_count(&self) -> usize {
        if self.closed {
            self.points.len()
        } else {
            self.points.len() - 1
        }
    }

    pub(crate) fn edge_points(&self, i: usize) -> ([f64; 2], [f64; 2]) {
        let n = self.points.len();
        (self.points[i], self.points[(i + 1) % n])
    }

    pub(crate) fn edge_depths(&self, i: usize) -> (f64, f64) {
        let n = self.depth.len();
        (self.depth[i], self.depth[(i + 1) % n])
    }

    pub fn total_length(&self) -> f64 {
        *self.arc.last().unwrap()
    }
}

pub fn project(curve: &PolygonalCurve, dir: Direction) -> ProjectedCurve {
    let (u, v) = dir.frame();
    let d = dir.vector();
    let points = curve.vertices().iter().map(|p| [p.dot(u), p.dot(v)]).collect();
    let depth = curve.vertices().iter().map(|p| p.dot(d)).collect();
    ProjectedCurve {
        dir,
        points,
        depth,
        closed: curve.is_closed(),
        arc: curve.cumulative_lengths(),
        scale: curve.diameter(),
    }
}

/// Which genericity clause a projection violates.
#[derive(Debug, Clone, PartialEq)]
pub enum NonGeneric {
    /// An edge is (nearly) parallel to the projection direction.
    EdgeAlongDirection { edge: usize },
    /// Two projected edges touch, overlap, or cross too close to a vertex.
    NonTransverse { edges: (usize, usize) },
    /// Two 3D edges pass through each other along the direction.
    DepthCollision { edges: (usize, usize) },
    /// Three or more strands meet at one point of the projection.
    TriplePoint { edges: [usize; 3] },
}

impl fmt::Display for NonGeneric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NonGeneric::EdgeAlongDirection { edge } => {
                write!(f, "edge {edge} is parallel to the projection direction")
            }
            NonGeneric::NonTransverse { edges: (a, b) } => {
                write!(f, "projections of edges {a} and {b} meet non-transversally")
            }
            NonGeneric::DepthCollision { edges: (a, b) } => {
                write!(f, "edges {a} and {b} collide along the projection direction")
            }
            NonGeneric::TriplePoint { edges } => {
                write!(f, "triple point between edges {edges:?}")
            }
        }
    }
}

/// A transverse intersection of two projected edges. Edges are addressed as
/// `(component, edge index)`; `first` precedes `second` in that order.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RawCrossing {
    pub first: (usize, usize),
    pub second: (usize, usize),
    /// Parameters along `first` and `second` in `[0, 1]`.
    pub t_first: f64,
    pub t_second: f64,
    pub point: [f64; 2],
    /// Depth difference `depth(first) - depth(second)` at the crossing.
    pub depth_gap: f64,
}

fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm2(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = sub2(b, a);
    let ap = sub2(p, a);
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    norm2(sub2(p, [a[0] + t * ab[0], a[1] + t * ab[1]]))
}

struct FlatEdge {
    id: (usize, usize),
    p: ([f64; 2], [f64; 2]),
    depth: (f64, f64),
}

/// Finds all crossings of one or more projected curves (all projected along
/// the same direction), rejecting non-generic situations.
///
/// `tol` is relative: lengths are compared against `tol * scale` and angles
/// (as sines) against `tol`.
pub(crate) fn find_crossings(
    parts: &[&ProjectedCurve],
    tol: f64,
) -> std::result::Result<Vec<RawCrossing>, NonGeneric> {
    let scale = parts.iter().map(|p| p.scale).fold(0.0, f64::max);
    let eps = tol * scale.max(f64::MIN_POSITIVE);

    let mut edges = Vec::new();
    for (c, proj) in parts.iter().enumerate() {
        for i in 0..proj.edge_count() {
            let (a, b) = proj.edge_points(i);
            let (da, db) = proj.edge_depths(i);
            let planar = norm2(sub2(b, a));
            let full = (planar * planar + (db - da) * (db - da)).sqrt();
            if planar <= tol * full {
                return Err(NonGeneric::EdgeAlongDirection { edge: i });
            }
            edges.push(FlatEdge { id: (c, i), p: (a, b), depth: (da, db) });
        }
    }

    let adjacent = |x: (usize, usize), y: (usize, usize)| -> bool {
        if x.0 != y.0 {
            return false;
        }
        let proj = parts[x.0];
        let n = proj.edge_count();
        let (i, j) = (x.1.min(y.1), x.1.max(y.1));
        j == i + 1 || (proj.closed && i == 0 && j == n - 1)
    };

    let mut out = Vec::new();
    for (ei, e) in edges.iter().enumerate() {
        let (p0, p1) = e.p;
        let r = sub2(p1, p0);
        for f in &edges[ei + 1..] {
            let (q0, q1) = f.p;
            let s = sub2(q1, q0);
            let pair = (e.id.1, f.id.1);
            if adjacent(e.id, f.id) {
                // Shared vertex: the projections must not fold onto each other.
                let (x, y) = if f.id.1 == e.id.1 + 1 { (r, s) } else { (s, r) };
                let sin = cross2(x, y) / (norm2(x) * norm2(y));
                let cos = x[0] * y[0] + x[1] * y[1];
                if sin.abs() <= tol && cos < 0.0 {
                    return Err(NonGeneric::NonTransverse { edges: pair });
                }
                continue;
            }
            if p0[0].max(p1[0]) + eps < q0[0].min(q1[0])
                || q0[0].max(q1[0]) + eps < p0[0].min(p1[0])
                || p0[1].max(p1[1]) + eps < q0[1].min(q1[1])
                || q0[1].max(q1[1]) + eps < p0[1].min(p1[1])
            {
                continue;
            }
            let denom = cross2(r, s);
            let qp = sub2(q0, p0);
            let sin = denom / (norm2(r) * norm2(s));
            let near_touch = point_segment_distance(p0, q0, q1) <= eps
                || point_segment_distance(p1, q0, q1) <= eps
                || point_segment_distance(q0, p0, p1) <= eps
                || point_segment_distance(q1, p0, p1) <= eps;
            if near_touch {
                return Err(NonGeneric::NonTransverse { edges: pair });
            }
            if sin.abs() <= tol {
                // Parallel and well separated.
                continue;
            }
            let t = cross2(qp, s) / denom;
            let u = cross2(qp, r) / denom;
            if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&u) {
                continue;
            }
            let depth_gap = (e.depth.0 + t * (e.depth.1 - e.depth.0))
                - (f.depth.0 + u * (f.depth.1 - f.depth.0));
            if depth_gap.abs() <= eps {
                return Err(NonGeneric::DepthCollision { edges: pair });
            }
            out.push(RawCrossing {
                first: e.id,
                second: f.id,
                t_first: t,
                t_second: u,
                point: [p0[0] + t * r[0], p0[1] + t * r[1]],
                depth_gap,
            });
        }
    }

    // Distinct crossings sharing a location would be a multiple point.
    if out.len() > 1 {
        let mut order: Vec<usize> = (0..out.len()).collect();
        order.sort_by(|&a, &b| out[a].point[0].total_cmp(&out[b].point[0]));
        for w in 0..order.len() {
            let a = &out[order[w]];
            for &ob in &order[w + 1..] {
                let b = &out[ob];
                if b.point[0] - a.point[0] > eps {
                    break;
                }
                if norm2(sub2(a.point, b.point)) <= eps {
                    let third = if b.first == a.first || b.first == a.second {
                        b.second
                    } else {
                        b.first
                    };
                    return Err(NonGeneric::TriplePoint {
                        edges: [a.first.1, a.second.1, third.1],
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Checks every genericity clause, reporting the first one violated.
pub fn check_generic(
    curve: &PolygonalCurve,
    dir: Direction,
    tol: f64,
) -> std::result::Result<(), NonGeneric> {
    find_crossings(&[&project(curve, dir)], tol).map(|_| ())
}

pub fn is_generic(curve: &PolygonalCurve, dir: Direction, tol: f64) -> bool {
    check_generic(curve, dir, tol).is_ok()
}

/// Signed solid angle (over 4π) subtended by two segments: the contribution of
/// an edge pair to the Gauss linking integral.
pub fn segment_pair_linking(a: &Segment, b: &Segment) -> f64 {
    let r13 = b.start - a.start;
    let r14 = b.end - a.start;
    let r23 = b.start - a.end;
    let r24 = b.end - a.end;
    let faces = [
        r13.cross(r14),
        r14.cross(r24),
        r24.cross(r23),
        r23.cross(r13),
    ];
    let mut n = [Point3::default(); 4];
    for (k, f) in faces.iter().enumerate() {
        let len = f.norm();
        if len <= 1e-300 {
            return 0.0;
        }
        n[k] = *f * (1.0 / len);
    }
    let omega: f64 = (0..4)
        .map(|k| n[k].dot(n[(k + 1) % 4]).clamp(-1.0, 1.0).asin())
        .sum();
    let orient = b.vector().cross(a.vector()).dot(r13);
    if orient == 0.0 {
        return 0.0;
    }
    // Sign chosen so that positive crossings contribute positively.
    -omega.copysign(orient) / (4.0 * PI)
}

/// Gauss linking integral of two polygonal curves, evaluated exactly edge pair
/// by edge pair.
pub fn gauss_linking(a: &PolygonalCurve, b: &PolygonalCurve) -> Result<f64> {
    let scale = a.diameter().max(b.diameter()).max(f64::MIN_POSITIVE);
    let ea: Vec<Segment> = a.edges().collect();
    let eb: Vec<Segment> = b.edges().collect();
    for (i, x) in ea.iter().enumerate() {
        for (j, y) in eb.iter().enumerate() {
            if x.distance_to(y) <= 1e-12 * scale {
                return Err(Error::Degenerate(format!(
                    "curves intersect: edge {i} of the first meets edge {j} of the second"
                )));
            }
        }
    }
    let mut total = 0.0;
    for x in &ea {
        for y in &eb {
            total += segment_pair_linking(x, y);
        }
    }
    Ok(total)
}
