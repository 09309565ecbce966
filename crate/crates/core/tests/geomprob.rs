use std::f64::consts::PI;

use knotmeasure::curves::random_four_edge;
use knotmeasure::geometry::{direction_at, Direction, Point3, Segment};
use knotmeasure::geomprob::*;
use knotmeasure::measures::{sll_estimate, SampleConfig};
use rand::Rng;

const N: usize = 200_000;
// About 5 standard errors at N for probabilities up to 1/2.
const TOL: f64 = 6e-3;

fn random_point(rng: &mut rand_chacha::ChaCha8Rng) -> Point3 {
    Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

#[test]
fn small_triangle_area() {
    let mut rng = oracle_rng(1);
    let c = random_point(&mut rng).normalized();
    let mut vs = Vec::new();
    for _ in 0..3 {
        vs.push((c + random_point(&mut rng) * 0.4).normalized());
    }
    let t = SphericalPolygon::new(vs).unwrap();
    let mc = mc_frequency(N, 2, |d| t.contains(d.vector()));
    assert!((t.area() / (4.0 * PI) - mc).abs() < TOL, "{} vs {mc}", t.area() / (4.0 * PI));
}

#[test]
fn crossing_probability_matches_sampling() {
    let mut rng = oracle_rng(3);
    for k in 0..5 {
        let (a, b) = (random_segment(&mut rng), random_segment(&mut rng));
        let exact = crossing_probability(&a, &b).unwrap();
        let mc = mc_frequency(N, k, |d| projected_crossing(&a, &b, d).is_some());
        assert!((exact - mc).abs() < TOL, "pair {k}: {exact} vs {mc}");
    }
}

#[test]
fn far_pairs_rarely_cross() {
    let a = Segment::new(Point3::new(-1.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0));
    let mut last = f64::INFINITY;
    for dist in [2.0, 10.0, 100.0, 1000.0] {
        let b = Segment::new(Point3::new(0.0, -1.0, dist), Point3::new(0.0, 1.0, dist));
        let p = crossing_probability(&a, &b).unwrap();
        assert!(p < last);
        last = p;
    }
    assert!(last < 1e-5);
}

#[test]
fn quadrangle_membership_is_exact() {
    let mut rng = oracle_rng(4);
    let (a, b) = (random_segment(&mut rng), random_segment(&mut rng));
    let q = crossing_quadrangle(&a, &b).unwrap();
    let (mut inside, mut outside) = (0, 0);
    for i in 0..20_000 {
        let d = direction_at(5, i, 0);
        let x = d.vector();
        let member = q.contains(x) || q.contains(-x);
        assert_eq!(member, projected_crossing(&a, &b, d).is_some(), "{x}");
        if member {
            inside += 1;
        } else {
            outside += 1;
        }
    }
    assert!(inside > 100 && outside > 100);
}

#[test]
fn intersection_area_matches_sampling() {
    let mut rng = oracle_rng(6);
    let mut tested = 0;
    while tested < 5 {
        let p = crossing_quadrangle(&random_segment(&mut rng), &random_segment(&mut rng)).unwrap();
        let q = crossing_quadrangle(&random_segment(&mut rng), &random_segment(&mut rng)).unwrap();
        let pieces = intersect_polygons(&p, &q).unwrap();
        let area: f64 = pieces.iter().map(|x| x.area()).sum();
        if area == 0.0 {
            continue;
        }
        let mc = mc_frequency(N, tested, |d| p.contains(d.vector()) && q.contains(d.vector()));
        assert!((area / (4.0 * PI) - mc).abs() < TOL, "{} vs {mc}", area / (4.0 * PI));
        tested += 1;
    }
}

/// `e_i` and a consecutive pair `e_j`, `e_{j+1}` with `e_i` piercing their
/// triangle, so the alternating region is non-empty.
fn piercing_triple(rng: &mut rand_chacha::ChaCha8Rng) -> (Segment, Segment, Segment) {
    loop {
        let (b0, b1, b2) = (random_point(rng), random_point(rng), random_point(rng));
        let (a0, a1) = (random_point(rng), random_point(rng));
        let n = (b1 - b0).cross(b2 - b0);
        let (s0, s1) = (n.dot(a0 - b0), n.dot(a1 - b0));
        if s0 * s1 >= 0.0 {
            continue;
        }
        let x = a0 + (a1 - a0) * (s0 / (s0 - s1));
        let inside = [(b0, b1), (b1, b2), (b2, b0)]
            .iter()
            .all(|&(p, q)| (q - p).cross(x - p).dot(n) > 0.0);
        if inside {
            return (Segment::new(a0, a1), Segment::new(b0, b1), Segment::new(b1, b2));
        }
    }
}

#[test]
fn consecutive_triple_region_matches_sampling() {
    let mut rng = oracle_rng(7);
    for k in 0..5 {
        let (ei, ej, ej1) = piercing_triple(&mut rng);
        let region = q_star_consecutive(&ei, &ej, &ej1).unwrap().expect("piercing gives a region");
        let exact = region.area() / (2.0 * PI);
        let mc = mc_frequency(N, 100 + k, |d| alternating_triple_event(&ei, &ej, &ej1, d));
        assert!((exact - mc).abs() < TOL, "triple {k}: {exact} vs {mc}, signature {:?}", signature(&region));
        // Both crossings in the region carry the same sign.
        assert_eq!(crossing_sign(&ei, &ej), crossing_sign(&ei, &ej1));
        let x = Direction::new(region.interior_point()).unwrap();
        assert!(alternating_triple_event(&ei, &ej, &ej1, x));
    }
}

#[test]
fn non_piercing_triple_is_empty() {
    let mut rng = oracle_rng(8);
    let mut empty = 0;
    for _ in 0..200 {
        let (b0, b1, b2) = (random_point(&mut rng), random_point(&mut rng), random_point(&mut rng));
        let ei = random_segment(&mut rng);
        let (ej, ej1) = (Segment::new(b0, b1), Segment::new(b1, b2));
        let n = (b1 - b0).cross(b2 - b0);
        if n.dot(ei.start - b0) * n.dot(ei.end - b0) > 0.0 {
            assert_eq!(q_star_consecutive(&ei, &ej, &ej1).unwrap(), None);
            assert_eq!(mc_frequency(2000, 1, |d| alternating_triple_event(&ei, &ej, &ej1, d)), 0.0);
            empty += 1;
        }
    }
    assert!(empty > 50);
}

#[test]
fn exact_four_edge_integral_matches_estimate() {
    let mut checked = 0;
    for seed in 0..20 {
        let c = random_four_edge(seed).unwrap();
        let exact = sll_exact_4edge(&c).unwrap();
        assert!((0.0..=0.5).contains(&exact));
        let est = sll_estimate(&c, &SampleConfig::new(20_000, seed)).unwrap();
        assert!((exact - est.mean).abs() <= 4.0 * est.stderr + 1e-12, "seed {seed}: {exact} vs {} ± {}", est.mean, est.stderr);
        checked += (exact > 0.0) as usize;
    }
    assert!(checked >= 3);
}

#[test]
fn planar_four_edge_is_zero() {
    let c = knotmeasure::geometry::PolygonalCurve::open(vec![
        Point3::new(0.0, 0.0, 0.0),
        Point3::new(2.0, 0.0, 0.0),
        Point3::new(2.0, 1.0, 0.0),
        Point3::new(1.0, -1.0, 0.0),
        Point3::new(0.5, 2.0, 0.0),
    ])
    .unwrap();
    assert_eq!(sll_exact_4edge(&c).unwrap(), 0.0);
}
