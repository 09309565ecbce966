//! Exact geometric probabilities on the sphere of projection directions:
//! crossing quadrangles of edge pairs, their intersections, the alternating
//! region of an edge against two consecutive edges, and the exact double
//! alternating self-linking integral of a 4-edge curve.
//!
//! A direction and its antipode give the same projection, so every region is
//! represented by one hemispheric copy and probabilities are `area / 2π`.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::geometry::{direction_at, Direction, Point3, PolygonalCurve, Segment, DEFAULT_TOL};
use crate::error::{Error, Result};

/// Simple spherical polygon with minor-arc edges, counterclockwise seen from
/// outside the sphere.
///
/// `labels[k]` names the great circle carrying the edge from vertex `k` to
/// `k + 1`, when known (see [`q_star_consecutive`]).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphericalPolygon {
    vertices: Vec<Point3>,
    labels: Vec<String>,
}

fn det(a: Point3, b: Point3, c: Point3) -> f64 {
    a.cross(b).dot(c)
}

impl SphericalPolygon {
    /// Normalises the vertices and orients them counterclockwise. The polygon
    /// must lie in an open hemisphere.
    pub fn new(vertices: Vec<Point3>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Degenerate("spherical polygon needs 3 vertices".into()));
        }
        let mut vs = Vec::with_capacity(vertices.len());
        for v in vertices {
            let n = v.norm();
            if !(n.is_finite() && n > 0.0) {
                return Err(Error::InvalidInput(format!("vertex {v} is not a direction")));
            }
            vs.push(v * (1.0 / n));
        }
        let m = vs.len();
        for k in 0..m {
            let (a, b) = (vs[k], vs[(k + 1) % m]);
            if a.cross(b).norm() < 1e-15 {
                return Err(Error::Degenerate(format!(
                    "consecutive vertices {k} and {} coincide or are antipodal",
                    (k + 1) % m
                )));
            }
        }
        let c = hemisphere_center(&vs)
            .ok_or_else(|| Error::Precondition("polygon is not contained in an open hemisphere".into()))?;
        let winding: f64 = (0..m).map(|k| det(c, vs[k], vs[(k + 1) % m])).sum();
        if winding < 0.0 {
            vs.reverse();
        }
        Ok(SphericalPolygon {
            labels: vec![String::new(); m],
            vertices: vs,
        })
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn area(&self) -> f64 {
        spherical_area(self)
    }

    pub fn antipodal(&self) -> SphericalPolygon {
        // negation reverses orientation, so reverse the order back
        let mut vertices: Vec<Point3> = self.vertices.iter().map(|&v| -v).collect();
        vertices.reverse();
        // the same great circles, traversed with negated normals
        let m = self.labels.len();
        let labels = (0..m)
            .map(|k| {
                let l = &self.labels[(2 * m - 2 - k) % m];
                match l.strip_prefix('-') {
                    Some(rest) => rest.to_string(),
                    None if l.is_empty() || l == "?" => l.clone(),
                    None => format!("-{l}"),
                }
            })
            .collect();
        SphericalPolygon { vertices, labels }
    }

    /// Unit normal of the great circle through edge `k`, pointing inside.
    pub fn edge_normal(&self, k: usize) -> Point3 {
        let m = self.vertices.len();
        self.vertices[k].cross(self.vertices[(k + 1) % m]).normalized()
    }

    pub fn is_convex(&self) -> bool {
        let m = self.vertices.len();
        (0..m).all(|k| det(self.vertices[k], self.vertices[(k + 1) % m], self.vertices[(k + 2) % m]) > 0.0)
    }

    /// Membership for convex polygons (boundary included).
    pub fn contains(&self, x: Point3) -> bool {
        let m = self.vertices.len();
        (0..m).all(|k| det(self.vertices[k], self.vertices[(k + 1) % m], x) >= 0.0)
    }

    /// Normalised vertex mean, an interior point of a convex polygon.
    pub fn interior_point(&self) -> Point3 {
        self.vertices.iter().fold(Point3::default(), |a, &v| a + v).normalized()
    }
}

/// A direction strictly on the positive side of every vertex, tried among
/// the vertex mean, the mean of edge normals and the vertices themselves.
fn hemisphere_center(vs: &[Point3]) -> Option<Point3> {
    let m = vs.len();
    let mean = vs.iter().fold(Point3::default(), |a, &v| a + v);
    let normals = (0..m).fold(Point3::default(), |a, k| a + vs[k].cross(vs[(k + 1) % m]).normalized());
    let mut candidates = vec![mean, normals, -normals, mean + normals, mean - normals];
    candidates.extend_from_slice(vs);
    candidates.into_iter().filter(|c| c.norm() > 1e-12).map(|c| c.normalized()).find(|c| {
        vs.iter().all(|v| v.dot(*c) > 1e-12)
    })
}

/// Area by Gauss–Bonnet: `2π − Σ turning angles` for a counterclockwise
/// geodesic polygon (the Girard excess for convex ones).
pub fn spherical_area(p: &SphericalPolygon) -> f64 {
    let vs = &p.vertices;
    let m = vs.len();
    let mut turning = 0.0;
    for k in 0..m {
        let prev = vs[(k + m - 1) % m];
        let cur = vs[k];
        let next = vs[(k + 1) % m];
        // direction of travel on arrival, and on departure
        let t_in = -(prev - cur * prev.dot(cur)).normalized();
        let t_out = (next - cur * next.dot(cur)).normalized();
        turning += t_in.cross(t_out).dot(cur).atan2(t_in.dot(t_out));
    }
    (2.0 * PI - turning).rem_euclid(4.0 * PI)
}

fn segment_gap_check(a: &Segment, b: &Segment) -> Result<()> {
    let scale = a.length().max(b.length());
    for p in [a.start, a.end] {
        for q in [b.start, b.end] {
            if p.distance(q) <= DEFAULT_TOL * scale {
                return Err(Error::Precondition("segments share an endpoint".into()));
            }
        }
    }
    if a.distance_to(b) <= DEFAULT_TOL * scale {
        return Err(Error::Degenerate("segments intersect".into()));
    }
    Ok(())
}

/// Directions whose projections of `a` and `b` cross with `a` over `b` (the
/// antipodal copy has `b` over `a`). Vertices are the normalised endpoint
/// differences `a₁−b₁, a₁−b₂, a₂−b₂, a₂−b₁`: the central projection of the
/// parallelogram `a − b`.
pub fn crossing_quadrangle(a: &Segment, b: &Segment) -> Result<SphericalPolygon> {
    segment_gap_check(a, b)?;
    let vs = vec![a.start - b.start, a.start - b.end, a.end - b.end, a.end - b.start];
    let normal = a.vector().cross(b.vector());
    let scale = a.length() * b.length() * (a.start - b.start).norm();
    if det(a.vector(), b.vector(), a.start - b.start).abs() <= DEFAULT_TOL * scale || normal.norm() == 0.0 {
        return Err(Error::Degenerate("segments are coplanar".into()));
    }
    SphericalPolygon::new(vs)
}

/// Probability that a uniformly random projection makes `a` and `b` cross.
pub fn crossing_probability(a: &Segment, b: &Segment) -> Result<f64> {
    Ok(crossing_quadrangle(a, b)?.area() / (2.0 * PI))
}

/// Sign of the crossing of `a` and `b` in any projection where they cross.
pub fn crossing_sign(a: &Segment, b: &Segment) -> i8 {
    if det(a.vector(), b.vector(), a.start - b.start) > 0.0 {
        1
    } else {
        -1
    }
}

/// Keeps the part of `p` with `normal · x ≥ 0`; new edges get `label`.
pub fn clip_half_space(p: &SphericalPolygon, normal: Point3, label: &str) -> Option<SphericalPolygon> {
    let n = normal.normalized();
    let vs = &p.vertices;
    let m = vs.len();
    let mut out_v = Vec::new();
    let mut out_l: Vec<String> = Vec::new();
    for k in 0..m {
        let (a, b) = (vs[k], vs[(k + 1) % m]);
        let (sa, sb) = (n.dot(a), n.dot(b));
        let edge_label = &p.labels[k];
        if sa >= 0.0 {
            out_v.push(a);
            out_l.push(edge_label.clone());
        }
        if (sa >= 0.0) != (sb >= 0.0) {
            let x = (b * sa.abs() + a * sb.abs()).normalized();
            out_v.push(x);
            out_l.push(if sa >= 0.0 { label.to_string() } else { edge_label.clone() });
        }
    }
    // drop repeated vertices produced by clipping through a vertex
    let mut vertices: Vec<Point3> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    for (v, l) in out_v.into_iter().zip(out_l) {
        if let Some(&last) = vertices.last() {
            if last.cross(v).norm() < 1e-14 && last.dot(v) > 0.0 {
                *labels.last_mut().unwrap() = l;
                continue;
            }
        }
        vertices.push(v);
        labels.push(l);
    }
    while vertices.len() > 1 && vertices[0].cross(*vertices.last().unwrap()).norm() < 1e-14 {
        vertices.pop();
        labels.pop();
    }
    if vertices.len() < 3 {
        return None;
    }
    let poly = SphericalPolygon { vertices, labels };
    (poly.area() > 1e-14).then_some(poly)
}

/// Intersection of a polygon with a convex polygon, by clipping against each
/// great circle of `q` in turn. Both must lie in open hemispheres.
pub fn intersect_polygons(p: &SphericalPolygon, q: &SphericalPolygon) -> Result<Vec<SphericalPolygon>> {
    for poly in [p, q] {
        if hemisphere_center(&poly.vertices).is_none() {
            return Err(Error::Precondition("polygon is not contained in an open hemisphere".into()));
        }
    }
    if !q.is_convex() {
        return Err(Error::Precondition("clip polygon must be convex".into()));
    }
    let mut cur = p.clone();
    for k in 0..q.vertices.len() {
        match clip_half_space(&cur, q.edge_normal(k), &q.labels[k]) {
            Some(next) => cur = next,
            None => return Ok(Vec::new()),
        }
    }
    Ok(vec![cur])
}

/// Where a projection along `dir` makes two segments cross: parameters along
/// each and whether `a` is over.
pub fn projected_crossing(a: &Segment, b: &Segment, dir: Direction) -> Option<(f64, f64, bool)> {
    let (u, v) = dir.frame();
    let d = dir.vector();
    let p = |x: Point3| [x.dot(u), x.dot(v)];
    let (a0, a1, b0, b1) = (p(a.start), p(a.end), p(b.start), p(b.end));
    let r = [a1[0] - a0[0], a1[1] - a0[1]];
    let s = [b1[0] - b0[0], b1[1] - b0[1]];
    let den = r[0] * s[1] - r[1] * s[0];
    if den == 0.0 {
        return None;
    }
    let w = [b0[0] - a0[0], b0[1] - a0[1]];
    let t = (w[0] * s[1] - w[1] * s[0]) / den;
    let sb = (w[0] * r[1] - w[1] * r[0]) / den;
    if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&sb) {
        return None;
    }
    let over = a.at(t).dot(d) > b.at(sb).dot(d);
    Some((t, sb, over))
}

/// Whether the projection along `dir` shows `e_i` crossing both `e_j` and
/// `e_{j+1}`, meeting `e_j` first along `e_i`, and passing over exactly one.
pub fn alternating_triple_event(e_i: &Segment, e_j: &Segment, e_j1: &Segment, dir: Direction) -> bool {
    match (projected_crossing(e_i, e_j, dir), projected_crossing(e_i, e_j1, dir)) {
        (Some((t1, _, o1)), Some((t2, _, o2))) => t1 < t2 && o1 != o2,
        _ => false,
    }
}

/// Plane normals of the consecutive-triple configuration, named after the
/// vertex triples they come from. `e_i = (A0, A1)`, `e_j = (B0, B1)`,
/// `e_{j+1} = (B1, B2)`.
pub fn triple_normals(e_i: &Segment, e_j: &Segment, e_j1: &Segment) -> Vec<(&'static str, Point3)> {
    let (a0, a1, b0, b1, b2) = (e_i.start, e_i.end, e_j.start, e_j.end, e_j1.end);
    let plane = |p: Point3, q: Point3, r: Point3| (q - p).cross(r - p).normalized();
    vec![
        ("n1", plane(a0, b0, b1)),
        ("n2", plane(a0, a1, b1)),
        ("n3", plane(a1, b0, b1)),
        ("n4", plane(a0, b0, a1)),
        ("u2", plane(a0, a1, b2)),
        ("u3", plane(a1, b2, b1)),
        ("t3", plane(a0, b1, b2)),
        ("v3", plane(b0, b2, b1)),
    ]
}

/// Great-circle rows of the consecutive-triple table, each a
/// counterclockwise list of signed normal names.
pub const TABLE_ROWS: [&[&str]; 4] = [
    &["n4", "n1", "-u2", "v3"],
    &["n4", "-u3", "-u2", "v3"],
    &["n4", "n1", "-u3", "-u2", "v3"],
    &["n4", "-u3", "n1", "-u2", "v3"],
];

fn name_edges(p: &mut SphericalPolygon, named: &[(&'static str, Point3)]) {
    for k in 0..p.vertices.len() {
        let nrm = p.edge_normal(k);
        p.labels[k] = named
            .iter()
            .find_map(|(name, w)| {
                let c = nrm.dot(*w);
                if c > 1.0 - 1e-7 {
                    Some(name.to_string())
                } else if c < -1.0 + 1e-7 {
                    Some(format!("-{name}"))
                } else {
                    None
                }
            })
            .unwrap_or_else(|| "?".to_string());
    }
}

/// Signed-normal signature of a polygon, rotated to start at `n4` when
/// present and with repeated circles merged.
pub fn signature(p: &SphericalPolygon) -> Vec<String> {
    let mut sig: Vec<String> = Vec::new();
    for l in &p.labels {
        if sig.last() != Some(l) {
            sig.push(l.clone());
        }
    }
    if sig.len() > 1 && sig.first() == sig.last() {
        sig.pop();
    }
    if let Some(k) = sig.iter().position(|s| s == "n4" || s == "-n4") {
        sig.rotate_left(k);
    }
    sig
}

/// Index of the table row whose circles (up to the sign of each normal)
/// bound `p`, if any.
pub fn table_row(p: &SphericalPolygon) -> Option<usize> {
    let strip = |s: &str| s.trim_start_matches('-').to_string();
    let sig: Vec<String> = signature(p).iter().map(|s| strip(s)).collect();
    TABLE_ROWS.iter().position(|row| {
        let r: Vec<String> = row.iter().map(|s| strip(s)).collect();
        r.len() == sig.len() && (0..r.len()).any(|k| {
            let mut rot = r.clone();
            rot.rotate_left(k);
            rot == sig
        })
    })
}

/// Region of directions where `e_i` crosses both `e_j` and `e_{j+1}` as an
/// alternating pair, in the antipodal copy on the positive side of `v3`;
/// `None` when the region is empty. Probability = area / 2π.
///
/// Built as `Q(e_i, e_j) ∩ Q(e_{j+1}, e_i)` (nonempty only when `e_i`
/// pierces the triangle of the consecutive pair) split along the plane of
/// the pair, across which the crossing order along `e_i` flips; the side
/// whose interior shows `e_j` met first is kept. Edges are labelled with the
/// names from [`triple_normals`].
pub fn q_star_consecutive(e_i: &Segment, e_j: &Segment, e_j1: &Segment) -> Result<Option<SphericalPolygon>> {
    if e_j.end.distance(e_j1.start) > DEFAULT_TOL * e_j.length().max(e_j1.length()) {
        return Err(Error::Precondition("e_j and e_j+1 must be consecutive".into()));
    }
    let named = triple_normals(e_i, e_j, e_j1);
    let v3 = named.iter().find(|(n, _)| *n == "v3").unwrap().1;
    let coplanar = |p: Point3, q: Point3, r: Point3, s: Point3| {
        let scale = (q - p).norm() * (r - p).norm() * (s - p).norm();
        det(q - p, r - p, s - p).abs() <= DEFAULT_TOL * scale
    };
    if coplanar(e_j.start, e_j.end, e_j1.end, e_i.start) || coplanar(e_j.start, e_j.end, e_j1.end, e_i.end) {
        return Err(Error::Degenerate("edge lies in the plane of the consecutive pair".into()));
    }
    let qa = crossing_quadrangle(e_i, e_j)?;
    let qb = crossing_quadrangle(e_j1, e_i)?;
    let Some(p) = intersect_polygons(&qa, &qb)?.pop() else {
        return Ok(None);
    };
    let mut kept = Vec::new();
    for side in [v3, -v3] {
        if let Some(piece) = clip_half_space(&p, side, "") {
            let x = Direction::new(piece.interior_point())?;
            if alternating_triple_event(e_i, e_j, e_j1, x) {
                kept.push(piece);
            }
        }
    }
    match kept.len() {
        0 => Ok(None),
        1 => {
            let mut piece = kept.pop().unwrap();
            if piece.interior_point().dot(v3) < 0.0 {
                piece = piece.antipodal();
            }
            name_edges(&mut piece, &named);
            Ok(Some(piece))
        }
        _ => Err(Error::Degenerate("crossing order did not flip across the pair's plane".into())),
    }
}

/// Probability of the alternating consecutive-triple event.
pub fn q_star_probability(e_i: &Segment, e_j: &Segment, e_j1: &Segment) -> Result<f64> {
    Ok(q_star_consecutive(e_i, e_j, e_j1)?.map_or(0.0, |p| p.area() / (2.0 * PI)))
}

/// Terms of the exact 4-edge integral: probabilities and sign products.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourEdgeTerms {
    /// Edges (0,2) and (1,3) crossing as an alternating pair.
    pub quadruple: f64,
    pub quadruple_sign: i8,
    /// Edge 0 against edges 2, 3.
    pub triple_front: f64,
    pub triple_front_sign: i8,
    /// Edge 3 against edges 0, 1.
    pub triple_back: f64,
    pub triple_back_sign: i8,
}

impl FourEdgeTerms {
    pub fn sll(&self) -> f64 {
        0.5 * (self.quadruple * self.quadruple_sign as f64
            + self.triple_front * self.triple_front_sign as f64
            + self.triple_back * self.triple_back_sign as f64)
    }
}

fn segment_pair_ok(a: &Segment, b: &Segment) -> Result<Option<SphericalPolygon>> {
    match crossing_quadrangle(a, b) {
        Ok(q) => Ok(Some(q)),
        Err(Error::Degenerate(m)) if m.contains("coplanar") => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn four_edge_terms(curve: &PolygonalCurve) -> Result<FourEdgeTerms> {
    if curve.is_closed() || curve.edge_count() != 4 {
        return Err(Error::InvalidInput(format!(
            "exact integral needs an open curve with 4 edges, got {} edges ({})",
            curve.edge_count(),
            if curve.is_closed() { "closed" } else { "open" }
        )));
    }
    let e: Vec<Segment> = curve.edges().collect();
    let planar = {
        let v = curve.vertices();
        let n = (v[1] - v[0]).cross(v[2] - v[0]);
        let scale = curve.diameter().powi(3);
        v.iter().all(|p| n.dot(*p - v[0]).abs() <= DEFAULT_TOL * scale)
    };
    if planar {
        return Ok(FourEdgeTerms {
            quadruple: 0.0,
            quadruple_sign: 1,
            triple_front: 0.0,
            triple_front_sign: 1,
            triple_back: 0.0,
            triple_back_sign: 1,
        });
    }
    let quadruple = match (segment_pair_ok(&e[0], &e[2])?, segment_pair_ok(&e[3], &e[1])?) {
        (Some(q02), Some(q31)) => intersect_polygons(&q02, &q31)?
            .iter()
            .map(|p| p.area() / (2.0 * PI))
            .fold(0.0, |a, b| a + b),
        _ => 0.0,
    };
    let s02 = crossing_sign(&e[0], &e[2]);
    let s03 = crossing_sign(&e[0], &e[3]);
    let s13 = crossing_sign(&e[1], &e[3]);
    Ok(FourEdgeTerms {
        quadruple,
        quadruple_sign: s02 * s13,
        triple_front: q_star_probability(&e[0], &e[2], &e[3])?,
        triple_front_sign: s02 * s03,
        triple_back: q_star_probability(&e[3], &e[0], &e[1])?,
        triple_back_sign: s03 * s13,
    })
}

/// Exact double alternating self-linking integral of an open 4-edge curve.
pub fn sll_exact_4edge(curve: &PolygonalCurve) -> Result<f64> {
    Ok(four_edge_terms(curve)?.sll())
}

/// Monte Carlo estimate of the fraction of directions satisfying `pred`,
/// with the same per-index direction stream as the measures.
pub fn mc_frequency<F>(n: usize, seed: u64, pred: F) -> f64
where
    F: Fn(Direction) -> bool + Sync,
{
    use rayon::prelude::*;
    let hits: usize = (0..n as u64)
        .into_par_iter()
        .filter(|&i| pred(direction_at(seed, i, 0)))
        .count();
    hits as f64 / n as f64
}

/// Random segment with endpoints uniform in `[-1, 1]³`, for oracles.
pub fn random_segment(rng: &mut ChaCha8Rng) -> Segment {
    use rand::Rng;
    let mut p = || Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    Segment::new(p(), p())
}

pub fn oracle_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
