//! Acceptance criteria, one line each. Exits non-zero if any fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use knotmeasure::curves::{near_closed_trefoil, projection_corpus, random_four_edge, random_walk, trefoil};
use knotmeasure::diagram::Diagram;
use knotmeasure::geometry::{Point3, Segment};
use knotmeasure::geomprob::*;
use knotmeasure::measures::*;
use knotmeasure::polynomial::*;
use knotmeasure::vassiliev::*;
use knotmeasure_cli::curve_io::{write_curve, CurveFormat};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::Rng;

/// Vertices of the polygonal trefoil fixture.
const TREFOIL_N: usize = 48;
/// Directions per exact-area oracle: a standard error of at most 2.5e-4.
const AREA_SAMPLES: usize = 4_000_000;
const AREA_TOL: f64 = 1e-3;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn q(e: i64) -> LaurentPolynomial {
    LaurentPolynomial::monomial(e, 1)
}

fn plus_minus(d: &Diagram, id: usize) -> (Diagram, Diagram) {
    if d.crossing(id).sign > 0 {
        (d.clone(), d.switched(id))
    } else {
        (d.switched(id), d.clone())
    }
}

fn c1_bracket_axioms() -> Verdict {
    let arc = Diagram::from_gauss_code(&["open:"], &[]).unwrap();
    let circle = Diagram::from_gauss_code(&[""], &[]).unwrap();
    let loop_value = LaurentPolynomial::loop_value();
    let unknot_ok = bracket(&circle).unwrap() == loop_value && bracket(&arc).unwrap() == loop_value;
    let corpus = projection_corpus(50, 10, None, 101);
    let bad = corpus
        .iter()
        .filter(|d| enhanced_jones(&d.with_distant_circle()).unwrap() != &enhanced_jones(d).unwrap() * &loop_value)
        .count();
    verdict(
        unknot_ok && bad == 0,
        format!("<O> = {}; distant circle multiplies J by q+q^-1 on {}/{} diagrams", bracket(&circle).unwrap(), corpus.len() - bad, corpus.len()),
    )
}

fn c2_skein() -> Verdict {
    let corpus = projection_corpus(120, 12, None, 102);
    let (mut pairs, mut bad) = (0, 0);
    for d in &corpus {
        for id in 0..d.crossing_count() {
            let (p, m) = plus_minus(d, id);
            let lhs = &q(-2) * &enhanced_jones(&p).unwrap() - &q(2) * &enhanced_jones(&m).unwrap();
            let rhs = &(q(-1) - q(1)) * &enhanced_jones(&p.smoothed(id)).unwrap();
            pairs += 1;
            bad += (lhs != rhs) as usize;
        }
    }
    let max = corpus.iter().map(|d| d.crossing_count()).max().unwrap();
    verdict(bad == 0, format!("{} diagrams (≤{max} crossings), {pairs} crossings, {bad} violations", corpus.len()))
}

fn link(codes: [&str; 2], sign: i8) -> Diagram {
    let n = codes[0].split(' ').count();
    Diagram::from_gauss_code(&codes, &vec![sign; n]).unwrap()
}

fn c3_low_order() -> Verdict {
    let corpus = projection_corpus(120, 12, None, 103);
    let v0_bad = corpus.iter().filter(|d| vassiliev_coefficient(d, 0).unwrap() != int(2)).count();
    let mut link_lines = Vec::new();
    let mut links_ok = true;
    for (name, codes) in [("Hopf", ["O0 U1", "U0 O1"]), ("T(2,4)", ["O0 U1 O2 U3", "U0 O1 U2 O3"])] {
        for sign in [1, -1] {
            let d = link(codes, sign);
            let (v0, v1, lk) = (vassiliev_coefficient(&d, 0).unwrap(), vassiliev_coefficient(&d, 1).unwrap(), linkoid_lk(&d).unwrap());
            let ok = v0 == int(4) && v1 == -(int(6) * &lk);
            links_ok &= ok;
            link_lines.push(format!("{name}{} v0={} v1={} lk={}", if sign > 0 { "+" } else { "-" }, format_rational(&v0), format_rational(&v1), format_rational(&lk)));
        }
    }
    verdict(
        v0_bad == 0 && links_ok,
        format!("v0 = 2 on {}/{} knot/knotoid diagrams; {}", corpus.len() - v0_bad, corpus.len(), link_lines.join(", ")),
    )
}

fn c4_central_identity() -> Verdict {
    let corpus = projection_corpus(100, 10, Some(true), 104);
    let (mut knots_bad, mut cuts, mut cuts_bad) = (0, 0, 0);
    for d in &corpus {
        knots_bad += (v2_combinatorial(d).unwrap() != vassiliev_coefficient(d, 2).unwrap()) as usize;
        for start in 0..2 * d.crossing_count() {
            let k = d.cut(start).unwrap();
            cuts += 1;
            cuts_bad += (v2_combinatorial(&k).unwrap() != vassiliev_coefficient(&k, 2).unwrap()) as usize;
        }
    }
    verdict(
        knots_bad + cuts_bad == 0,
        format!("{} knot diagrams ({knots_bad} mismatches), {cuts} cut knotoids ({cuts_bad} mismatches)", corpus.len()),
    )
}

fn c5_switch_law() -> Verdict {
    let corpus = projection_corpus(60, 10, Some(true), 105);
    let (mut pairs, mut bad) = (0, 0);
    for d in &corpus {
        for id in 0..d.crossing_count() {
            let t = plus_minus(d, id);
            let zero = t.0.smoothed(id);
            let lhs = vassiliev_coefficient(&t.0, 2).unwrap() - vassiliev_coefficient(&t.1, 2).unwrap();
            let rhs = -(int(6) * linkoid_lk(&zero).unwrap());
            pairs += 1;
            bad += (lhs != rhs) as usize;
        }
    }
    verdict(pairs >= 100 && bad == 0, format!("{pairs} (diagram, crossing) pairs, {bad} violations"))
}

fn c6_direction_independence() -> Verdict {
    let c = trefoil(TREFOIL_N).unwrap();
    let mut values = BTreeMap::new();
    for i in 0..100 {
        let (d, _, _) = sample_diagram(&c, 106, i, knotmeasure::geometry::DEFAULT_TOL).unwrap();
        *values.entry(format_rational(&vassiliev_coefficient(&d, 2).unwrap())).or_insert(0) += 1;
    }
    verdict(values.len() == 1, format!("v2 values over 100 directions: {values:?}"))
}

fn trefoil_v2() -> f64 {
    let d = Diagram::from_gauss_code(&["O0 U1 O2 U0 O1 U2"], &[1, 1, 1]).unwrap();
    vassiliev_coefficient(&d, 2).unwrap().to_f64().unwrap()
}

fn c7_sll_linkage() -> Verdict {
    let e = sll_estimate(&trefoil(TREFOIL_N).unwrap(), &SampleConfig::new(100_000, 107)).unwrap();
    let v2 = trefoil_v2();
    let stated = 0.25 + 6.0 * e.mean;
    let band = 3.0 * 6.0 * e.stderr;
    let pass = (stated - v2).abs() <= band;
    let mut detail = format!("SLL = {} ± {:.3e}, 1/4 + 6·SLL = {stated}, v2 = {v2}, band {band:.3e}", e.mean, e.stderr);
    if !pass {
        detail.push_str(&format!(
            "; the sign-reversed relation 1/4 - 6·SLL = {} {}",
            0.25 - 6.0 * e.mean,
            if (0.25 - 6.0 * e.mean - v2).abs() <= band { "holds" } else { "also fails" }
        ));
    }
    verdict(pass, detail)
}

fn k21_fingerprints() -> Vec<LaurentPolynomial> {
    let mut out = Vec::new();
    for code in ["open:O0 U1 U0 O1", "open:U0 O1 O0 U1"] {
        for signs in [[1, 1], [-1, -1], [1, -1], [-1, 1]] {
            let j = enhanced_jones(&Diagram::from_gauss_code(&[code], &signs).unwrap()).unwrap();
            if j != LaurentPolynomial::loop_value() && !out.contains(&j) {
                out.push(j);
            }
        }
    }
    out
}

fn c8_four_edge() -> Verdict {
    let k21 = k21_fingerprints();
    let (mut curves, mut seed) = (0, 0u64);
    let (mut identity_bad, mut exact_bad, mut other_classes) = (0, 0, 0);
    let mut worst = 0.0f64;
    while curves < 50 {
        let c = random_four_edge(seed).unwrap();
        seed += 1;
        let exact = sll_exact_4edge(&c).unwrap();
        if exact == 0.0 {
            continue;
        }
        curves += 1;
        let cfg = SampleConfig::new(100_000, 1000 + seed);
        let est = sll_estimate(&c, &cfg).unwrap();
        let sp = knotoid_spectrum(&c, &cfg).unwrap();
        let k21_count: usize = sp.entries.iter().filter(|e| k21.contains(&e.fingerprint)).map(|e| e.count).sum();
        other_classes += sp.entries.iter().filter(|e| e.fingerprint != LaurentPolynomial::loop_value() && !k21.contains(&e.fingerprint)).count();
        let half_p = 0.5 * k21_count as f64 / sp.samples_used as f64;
        identity_bad += ((est.mean - half_p).abs() > 3.0 * est.stderr) as usize;
        let z = (exact - est.mean).abs() / est.stderr.max(f64::MIN_POSITIVE);
        worst = worst.max(z);
        exact_bad += (z > 3.0) as usize;
    }
    verdict(
        identity_bad == 0 && exact_bad == 0,
        format!(
            "{curves} curves with a k2.1 region (seeds 0..{seed}), 10^5 samples each: SLL vs P(k2.1)/2 off in {identity_bad}, exact vs estimate beyond 3σ in {exact_bad} (worst {worst:.2}σ); other non-trivial classes seen: {other_classes}"
        ),
    )
}

fn random_point(rng: &mut rand_chacha::ChaCha8Rng) -> Point3 {
    Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

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
        if [(b0, b1), (b1, b2), (b2, b0)].iter().all(|&(p, q)| (q - p).cross(x - p).dot(n) > 0.0) {
            return (Segment::new(a0, a1), Segment::new(b0, b1), Segment::new(b1, b2));
        }
    }
}

fn c9_areas() -> Verdict {
    let mut rng = oracle_rng(109);
    let mut worst = [0.0f64; 3];
    let mut seed = 0u64;
    let mut next_seed = || {
        seed += 1;
        seed
    };
    for _ in 0..50 {
        let (a, b) = (random_segment(&mut rng), random_segment(&mut rng));
        let mc = mc_frequency(AREA_SAMPLES, next_seed(), |d| projected_crossing(&a, &b, d).is_some());
        worst[0] = worst[0].max((crossing_probability(&a, &b).unwrap() - mc).abs());
    }
    let mut pieces = 0;
    while pieces < 20 {
        let p = crossing_quadrangle(&random_segment(&mut rng), &random_segment(&mut rng)).unwrap();
        let r = crossing_quadrangle(&random_segment(&mut rng), &random_segment(&mut rng)).unwrap();
        let area: f64 = intersect_polygons(&p, &r).unwrap().iter().map(|x| x.area()).sum();
        if area == 0.0 {
            continue;
        }
        pieces += 1;
        let mc = mc_frequency(AREA_SAMPLES, next_seed(), |d| p.contains(d.vector()) && r.contains(d.vector()));
        worst[1] = worst[1].max((area / (4.0 * PI) - mc).abs());
    }
    // Consecutive triples, five per observed row signature.
    let mut per_row: BTreeMap<String, usize> = BTreeMap::new();
    let mut attempts = 0;
    while attempts < 4000 && (0..3).any(|r| per_row.get(&format!("row {r}")).copied().unwrap_or(0) < 5) {
        attempts += 1;
        let (ei, ej, ej1) = piercing_triple(&mut rng);
        let Some(region) = q_star_consecutive(&ei, &ej, &ej1).unwrap() else { continue };
        let key = match table_row(&region) {
            Some(r) => format!("row {r}"),
            None => format!("off-table {:?}", signature(&region)),
        };
        let n = per_row.entry(key).or_insert(0);
        if *n >= 5 {
            continue;
        }
        *n += 1;
        let mc = mc_frequency(AREA_SAMPLES, next_seed(), |d| alternating_triple_event(&ei, &ej, &ej1, d));
        worst[2] = worst[2].max((region.area() / (2.0 * PI) - mc).abs());
    }
    let rows: Vec<String> = per_row.iter().map(|(k, n)| format!("{k}: {n}")).collect();
    verdict(
        worst.iter().all(|&w| w <= AREA_TOL),
        format!(
            "max |exact - MC| at 4·10^6 directions: crossing {:.2e} (50 pairs), intersection {:.2e} (20), consecutive triples {:.2e} [{}]; row 3 {}",
            worst[0],
            worst[1],
            worst[2],
            rows.join(", "),
            if per_row.contains_key("row 3") { "observed" } else { "not observed" }
        ),
    )
}

fn c10_convergence() -> Verdict {
    let diameter = trefoil(TREFOIL_N).unwrap().diameter();
    let v2 = trefoil_v2();
    let gaps: Vec<f64> = [0.5, 0.2, 0.1, 0.05].iter().map(|f| f * diameter).collect();
    let rows = convergence_scan(|g| near_closed_trefoil(TREFOIL_N, g), &gaps, ScanMeasure::WK(2), &SampleConfig::new(100_000, 110)).unwrap();
    let dist: Vec<f64> = rows.iter().map(|r| (r.estimate.mean - v2).abs()).collect();
    let decreasing = dist.windows(2).all(|w| w[1] < w[0]);
    let last = rows.last().unwrap();
    let within = dist[3] <= 3.0 * last.estimate.stderr;
    let table: Vec<String> = rows
        .iter()
        .zip(&dist)
        .map(|(r, d)| format!("gap {:.3}: {:.4} ± {:.4} (|Δ| {d:.4})", r.gap, r.estimate.mean, r.estimate.stderr))
        .collect();
    verdict(decreasing && within, format!("v2 = {v2}; {}; decreasing: {decreasing}, last within 3σ: {within}", table.join("; ")))
}

fn c11_knotoid_skein() -> Verdict {
    let mut fixtures: Vec<(String, Diagram, bool)> = Vec::new();
    for sign in [1, -1] {
        fixtures.push((format!("kink{sign:+}"), Diagram::from_gauss_code(&["open:O0 U0"], &[sign]).unwrap(), true));
    }
    let tref = Diagram::from_gauss_code(&["O0 U1 O2 U0 O1 U2"], &[1, 1, 1]).unwrap();
    for start in 0..6 {
        fixtures.push((format!("cut trefoil @{start}"), tref.cut(start).unwrap(), true));
    }
    fixtures.push(("k2.1".into(), Diagram::from_gauss_code(&["open:O0 U1 U0 O1"], &[1, 1]).unwrap(), false));
    let mut failed = Vec::new();
    for (name, d, knot_type) in &fixtures {
        for id in 0..d.crossing_count() {
            let r = verify_knotoid_skein(d, id, *knot_type).unwrap();
            if !r.pass() {
                let why: Vec<String> = r
                    .checks
                    .iter()
                    .filter(|c| !c.pass)
                    .map(|c| format!("{}: {} vs {}", c.relation, format_rational(&c.lhs), format_rational(&c.rhs)))
                    .collect();
                failed.push(format!("{name} crossing {id} (r={:?}, l={:?}): {}", r.r, r.l, why.join("; ")));
            }
        }
    }
    verdict(
        failed.is_empty(),
        if failed.is_empty() { format!("{} fixtures pass", fixtures.len()) } else { format!("failing: {}", failed.join(" | ")) },
    )
}

fn c12_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("walk.json");
    std::fs::write(&path, write_curve(&random_walk(16, 112).unwrap(), CurveFormat::Json)).unwrap();
    let p = path.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["wk", "--input", p, "--k", "2", "--samples", "3000"],
        vec!["wk", "--input", p, "--k", "3", "--samples", "3000"],
        vec!["sll", "--input", p, "--samples", "3000"],
        vec!["spectrum", "--input", p, "--samples", "3000"],
        vec!["scan", "--input", p, "--gaps", "0.3,0.1", "--relative", "--samples", "1000"],
        vec!["v2", "--input", p, "--samples", "50"],
    ];
    let mut differing = Vec::new();
    for args in &commands {
        let outs: Vec<Vec<u8>> = ["1", "2", "4"]
            .iter()
            .map(|t| {
                let o = Command::new(env!("CARGO_BIN_EXE_knotmeasure"))
                    .args(args)
                    .args(["--threads", t, "--format", "records"])
                    .output()
                    .unwrap();
                assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
                o.stdout
            })
            .collect();
        if outs.windows(2).any(|w| w[0] != w[1]) {
            differing.push(args[0]);
        }
    }
    verdict(
        differing.is_empty(),
        format!("{} commands at --threads 1, 2, 4; differing: {differing:?}", commands.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("bracket axioms", c1_bracket_axioms),
        ("skein identity", c2_skein),
        ("low-order Vassiliev values", c3_low_order),
        ("v2 from alternating pairs", c4_central_identity),
        ("crossing-switch law", c5_switch_law),
        ("direction independence (closed)", c6_direction_independence),
        ("SLL / v2 linkage", c7_sll_linkage),
        ("4-edge identity", c8_four_edge),
        ("exact-area oracles", c9_areas),
        ("convergence to closure", c10_convergence),
        ("knotoid skein relations", c11_knotoid_skein),
        ("determinism across threads", c12_determinism),
    ];
    let mut passed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = f();
        passed += v.pass as usize;
        println!(
            "criterion {:>2} {} {name} [{:.1}s]: {}",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed != criteria.len() {
        std::process::exit(1);
    }
}
