//! Curve generators and random diagram corpora.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diagram::{extract_diagram_with_tol, Diagram};
use crate::error::{Error, Result};
use crate::geometry::{direction_at, project, Point3, PolygonalCurve, DEFAULT_TOL};

fn trefoil_point(t: f64) -> Point3 {
    Point3::new(t.sin() + 2.0 * (2.0 * t).sin(), t.cos() - 2.0 * (2.0 * t).cos(), -(3.0 * t).sin())
}

/// Lobe tip of the trefoil, where the near-closed family is cut open.
const TIP: f64 = PI;

/// Closed polygonal trefoil with `n` vertices, starting at a lobe tip.
pub fn trefoil(n: usize) -> Result<PolygonalCurve> {
    if n < 6 {
        return Err(Error::InvalidInput(format!("trefoil needs at least 6 vertices, got {n}")));
    }
    PolygonalCurve::closed((0..n).map(|k| trefoil_point(TIP + 2.0 * PI * k as f64 / n as f64)).collect())
}

/// The `n`-vertex trefoil with an arc around a lobe tip removed, so that
/// the two ends are `gap` apart. Interior vertices coincide with those of
/// [`trefoil`]; `gap = 0` returns the closed curve.
pub fn near_closed_trefoil(n: usize, gap: f64) -> Result<PolygonalCurve> {
    if !(gap >= 0.0 && gap.is_finite()) {
        return Err(Error::InvalidInput(format!("gap must be non-negative, got {gap}")));
    }
    if gap == 0.0 {
        return trefoil(n);
    }
    let chord = |a: f64| trefoil_point(TIP + a).distance(trefoil_point(TIP - a));
    let step = 2.0 * PI / n as f64;
    // The chord grows monotonically only up to its first maximum.
    let mut max = 0.0;
    while chord(max + 1e-3) > chord(max) {
        max += 1e-3;
    }
    if chord(max) < gap {
        return Err(Error::InvalidInput(format!("gap {gap} exceeds the curve's span")));
    }
    let (mut lo, mut hi) = (0.0, max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chord(mid) < gap {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha = 0.5 * (lo + hi);
    let mut vs = vec![trefoil_point(TIP + alpha)];
    for k in 1..n {
        let a = step * k as f64;
        // Keep grid vertices clear of the new ends.
        if a > alpha + 1e-3 * step && a < 2.0 * PI - alpha - 1e-3 * step {
            vs.push(trefoil_point(TIP + a));
        }
    }
    vs.push(trefoil_point(TIP - alpha));
    PolygonalCurve::open(vs)
}

fn unit_vector(rng: &mut ChaCha8Rng) -> Point3 {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).sqrt();
    Point3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Open walk of `n_edges` unit steps in uniformly random directions.
pub fn random_walk(n_edges: usize, seed: u64) -> Result<PolygonalCurve> {
    if n_edges == 0 {
        return Err(Error::InvalidInput("random walk needs at least one edge".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = Point3::new(0.0, 0.0, 0.0);
    let mut vs = vec![p];
    for _ in 0..n_edges {
        p = p + unit_vector(&mut rng);
        vs.push(p);
    }
    PolygonalCurve::open(vs)
}

/// Polygon with vertices uniform in `[-1, 1]³`.
pub fn random_polygon(n_vertices: usize, closed: bool, rng: &mut ChaCha8Rng) -> Result<PolygonalCurve> {
    let vs = (0..n_vertices)
        .map(|_| Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    PolygonalCurve::new(vs, closed)
}

/// Open 4-edge curve (5 vertices uniform in the cube).
pub fn random_four_edge(seed: u64) -> Result<PolygonalCurve> {
    random_polygon(5, false, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `count` diagrams from generic projections of random polygons, each with
/// between 1 and `max_crossings` crossings. Alternates closed and open
/// curves unless `closed` pins one kind.
pub fn projection_corpus(count: usize, max_crossings: usize, closed: Option<bool>, seed: u64) -> Vec<Diagram> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        let is_closed = closed.unwrap_or(out.len() % 2 == 0);
        let n = rng.gen_range(5..=10);
        i += 1;
        let Ok(curve) = random_polygon(n, is_closed, &mut rng) else { continue };
        let Ok(d) = extract_diagram_with_tol(&project(&curve, direction_at(seed, i, 0)), DEFAULT_TOL) else {
            continue;
        };
        if (1..=max_crossings).contains(&d.crossing_count()) {
            out.push(d);
        }
    }
    out
}
