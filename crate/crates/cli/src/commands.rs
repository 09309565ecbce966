use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use knotmeasure::curves;
use knotmeasure::diagram::{extract_diagram_with_tol, Diagram};
use knotmeasure::geometry::{gauss_linking, project, Direction, Point3, PolygonalCurve, DEFAULT_TOL};
use knotmeasure::geomprob::four_edge_terms;
use knotmeasure::measures::{
    convergence_scan, knotoid_spectrum, sample_diagram, sll_estimate, w_k_estimate, with_endpoint_gap, MCEstimate,
    SampleConfig, ScanMeasure,
};
use knotmeasure::polynomial::{vassiliev_coefficient, DEFAULT_MAX_CROSSINGS};
use knotmeasure::vassiliev::{format_rational, v2_combinatorial, verify_knot_skein, verify_knotoid_skein, SkeinReport};
use knotmeasure::{Error, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::curve_io::{read_curve, write_curve, CurveFormat};

pub const DEFAULT_SEED: u64 = 12345;
pub const SCHEMA: &str = "knotmeasure.v1";

#[derive(Debug, Parser)]
#[command(name = "knotmeasure", version, about = "Knot invariants and Vassiliev measures of polygonal curves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output style: aligned text or one JSON record per line.
    #[arg(long, global = true, value_enum, default_value = "human")]
    pub format: OutputFormat,
    /// Print the Gauss code of each diagram used (v2, verify-skein).
    #[arg(long, global = true)]
    pub dump_gauss: bool,
    /// Relative genericity tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Worker threads for sampling; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Human,
    Records,
}

#[derive(Debug, Args)]
pub struct Sampling {
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Trefoil,
    RandomWalk,
    FourEdge,
    NearClosedTrefoil,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Wk,
    Sll,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gauss linking integral of two closed curves (give --input twice).
    Lk {
        #[arg(long, required = true, num_args = 1)]
        input: Vec<PathBuf>,
    },
    /// v2 of individual projections, by state sum and by alternating pairs.
    V2 {
        #[arg(long)]
        input: PathBuf,
        /// Projection direction `x,y,z`; otherwise sampled directions are used.
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Vassiliev measure w_k: the mean of v_k over projection directions.
    Wk {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Double alternating self-linking integral by Monte Carlo.
    Sll {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Knotoid classes of an open curve's projections, with probabilities.
    Spectrum {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Exact self-linking integral of an open 4-edge curve.
    SllExact4 {
        #[arg(long)]
        input: PathBuf,
    },
    /// Check the Vassiliev skein relations at crossings of a diagram.
    VerifySkein {
        /// Curve to project (with --direction, or the first generic sampled direction).
        #[arg(long, conflicts_with = "gauss")]
        input: Option<PathBuf>,
        /// Gauss code of one component, e.g. `O0 U1 O2 U0 O1 U2` or `open:O0 U1 U0 O1`; repeat per component.
        #[arg(long, requires = "signs")]
        gauss: Vec<String>,
        /// Crossing signs in crossing order, e.g. `+1,-1,+1`.
        #[arg(long, allow_hyphen_values = true)]
        signs: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Only this crossing; default all.
        #[arg(long)]
        crossing: Option<usize>,
        /// The knotoid is known to be knot-type; adds the specialised relations.
        #[arg(long)]
        knot_type: bool,
    },
    /// Estimates on an open curve with its endpoint gap set to each value.
    Scan {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        gaps: Vec<f64>,
        /// Read gaps as fractions of the curve's diameter.
        #[arg(long)]
        relative: bool,
        #[arg(long, value_enum, default_value = "wk")]
        measure: MeasureArg,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Write a generated curve.
    Generate {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Vertices (trefoils) or edges (random walk).
        #[arg(long)]
        n: Option<usize>,
        /// Endpoint distance for near-closed-trefoil.
        #[arg(long, default_value_t = 0.1)]
        gap: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        curve_format: CurveFormat,
    },
}

/// What a command produced: text for people, records for machines.
#[derive(Debug, Default)]
pub struct Outcome {
    pub human: String,
    pub records: Vec<Value>,
    /// A verification ran and did not hold.
    pub failed: bool,
}

impl Outcome {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Human => self.human.clone(),
            OutputFormat::Records => self.records.iter().map(|r| format!("{r}\n")).collect(),
        }
    }

    fn push(&mut self, kind: &str, body: impl Serialize) {
        let mut v = serde_json::to_value(body).expect("serialisable record");
        let obj = v.as_object_mut().expect("records are objects");
        obj.insert("schema".into(), SCHEMA.into());
        obj.insert("record".into(), kind.into());
        self.records.push(v);
    }
}

/// 2 input, 3 degenerate or non-generic, 4 resource, 5 arithmetic.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::Precondition(_) => 2,
        Error::Degenerate(_) | Error::NonGeneric(_) => 3,
        Error::Resource(_) => 4,
        Error::NotDivisible(_) => 5,
    }
}

fn parse_direction(s: &str) -> Result<Direction> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::InvalidInput(format!("direction {s:?}: {e}")))?;
    let [x, y, z] = parts[..] else {
        return Err(Error::InvalidInput(format!("direction {s:?} needs three components")));
    };
    Direction::new(Point3::new(x, y, z))
}

fn parse_signs(s: &str) -> Result<Vec<i8>> {
    s.split(',')
        .map(|x| match x.trim() {
            "+1" | "1" | "+" => Ok(1),
            "-1" | "-" => Ok(-1),
            other => Err(Error::InvalidInput(format!("crossing sign {other:?} is not ±1"))),
        })
        .collect()
}

fn config(cli: &Cli, s: &Sampling) -> SampleConfig {
    SampleConfig {
        n_samples: s.samples,
        seed: s.seed,
        threads: cli.threads,
        tol: cli.tol,
        max_crossings: DEFAULT_MAX_CROSSINGS,
    }
}

fn dir_vec(d: Direction) -> [f64; 3] {
    d.vector().into()
}

fn gauss_json(d: &Diagram) -> Value {
    json!({ "gauss": d.gauss_code(), "signs": d.signs() })
}

fn gauss_line(d: &Diagram) -> String {
    let signs: Vec<String> = d.signs().iter().map(|s| format!("{s:+}")).collect();
    format!("  gauss: {}  signs: {}\n", d.gauss_code().join(" | "), signs.join(","))
}

fn estimate_text(label: &str, e: &MCEstimate) -> String {
    format!(
        "{label} = {:.6} ± {:.6}  (exact mean {})\nsamples = {}  rejected = {}  seed = {}\n",
        e.mean,
        e.stderr,
        format_rational(&e.exact_mean),
        e.samples_used,
        e.samples_rejected,
        e.seed
    )
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let mut out = Outcome::default();
    match &cli.command {
        Command::Lk { input } => {
            if input.len() != 2 {
                return Err(Error::InvalidInput(format!("lk needs two --input curves, got {}", input.len())));
            }
            let (a, b) = (read_curve(&input[0])?, read_curve(&input[1])?);
            let lk = gauss_linking(&a, &b)?;
            out.human = format!("lk = {lk:.9}\n");
            out.push("lk", json!({ "lk": lk }));
        }
        Command::V2 { input, direction, samples, seed } => {
            let curve = read_curve(input)?;
            let projections: Vec<(Direction, Diagram)> = match direction {
                Some(s) => {
                    let dir = parse_direction(s)?;
                    vec![(dir, extract_diagram_with_tol(&project(&curve, dir), cli.tol)?)]
                }
                None => (0..*samples as u64)
                    .map(|i| sample_diagram(&curve, *seed, i, cli.tol).map(|(d, dir, _)| (dir, d)))
                    .collect::<Result<_>>()?,
            };
            out.human.push_str("index  crossings  v2 (state sum)  v2 (alternating pairs)  agree\n");
            for (i, (dir, d)) in projections.iter().enumerate() {
                let state = vassiliev_coefficient(d, 2)?;
                let comb = v2_combinatorial(d)?;
                let agree = state == comb;
                let _ = writeln!(
                    out.human,
                    "{i:>5}  {:>9}  {:>14}  {:>22}  {agree}",
                    d.crossing_count(),
                    format_rational(&state),
                    format_rational(&comb)
                );
                let mut rec = json!({
                    "index": i,
                    "direction": dir_vec(*dir),
                    "crossings": d.crossing_count(),
                    "v2_state_sum": format_rational(&state),
                    "v2_combinatorial": format_rational(&comb),
                    "agree": agree,
                });
                if cli.dump_gauss {
                    out.human.push_str(&gauss_line(d));
                    rec.as_object_mut().unwrap().extend(gauss_json(d).as_object().unwrap().clone());
                }
                out.push("projection", rec);
            }
        }
        Command::Wk { input, k, sampling } => {
            let e = w_k_estimate(&read_curve(input)?, *k, &config(cli, sampling))?;
            out.human = estimate_text(&format!("w_{k}"), &e);
            out.push("estimate", &e);
        }
        Command::Sll { input, sampling } => {
            let e = sll_estimate(&read_curve(input)?, &config(cli, sampling))?;
            out.human = estimate_text("SLL", &e);
            let _ = writeln!(
                out.human,
                "1/4 + 6·SLL = {:.6} ± {:.6}\n1/4 - 6·SLL = {:.6} ± {:.6}",
                0.25 + 6.0 * e.mean,
                6.0 * e.stderr,
                0.25 - 6.0 * e.mean,
                6.0 * e.stderr
            );
            out.push("estimate", &e);
        }
        Command::Spectrum { input, sampling } => {
            let sp = knotoid_spectrum(&read_curve(input)?, &config(cli, sampling))?;
            out.human.push_str("probability   count  v2        fingerprint\n");
            for e in &sp.entries {
                let _ = writeln!(
                    out.human,
                    "{:<12.6} {:>6}  {:<8}  {}",
                    e.probability,
                    e.count,
                    format_rational(&e.v2),
                    e.fingerprint
                );
            }
            let _ = writeln!(
                out.human,
                "samples = {}  rejected = {}  seed = {}",
                sp.samples_used, sp.samples_rejected, sp.seed
            );
            out.push("spectrum", &sp);
        }
        Command::SllExact4 { input } => {
            let t = four_edge_terms(&read_curve(input)?)?;
            let _ = writeln!(
                out.human,
                "SLL = {:.9}\n  edges 0-2 / 1-3: p = {:.9}  sign {:+}\n  edge 0 / 2,3:    p = {:.9}  sign {:+}\n  edge 3 / 0,1:    p = {:.9}  sign {:+}",
                t.sll(),
                t.quadruple,
                t.quadruple_sign,
                t.triple_front,
                t.triple_front_sign,
                t.triple_back,
                t.triple_back_sign
            );
            out.push("sll_exact4", json!({ "sll": t.sll(), "terms": t }));
        }
        Command::VerifySkein { input, gauss, signs, direction, seed, crossing, knot_type } => {
            let d = match input {
                Some(path) => {
                    let curve = read_curve(path)?;
                    match direction {
                        Some(s) => extract_diagram_with_tol(&project(&curve, parse_direction(s)?), cli.tol)?,
                        None => sample_diagram(&curve, *seed, 0, cli.tol)?.0,
                    }
                }
                None if !gauss.is_empty() => {
                    let codes: Vec<&str> = gauss.iter().map(String::as_str).collect();
                    Diagram::from_gauss_code(&codes, &parse_signs(signs.as_deref().unwrap_or(""))?)?
                }
                None => return Err(Error::InvalidInput("give --input or --gauss".into())),
            };
            if cli.dump_gauss {
                out.human.push_str(&gauss_line(&d));
                out.push("diagram", gauss_json(&d));
            }
            let ids: Vec<usize> = match crossing {
                Some(id) => vec![*id],
                None => (0..d.crossing_count()).collect(),
            };
            let closed = d.components().iter().all(|c| c.closed);
            for id in ids {
                let report = if closed { verify_knot_skein(&d, id)? } else { verify_knotoid_skein(&d, id, *knot_type)? };
                out.failed |= !report.pass();
                out.human.push_str(&report_text(&report));
                out.push("skein", json!({ "pass": report.pass(), "report": report }));
            }
        }
        Command::Scan { input, gaps, relative, measure, k, sampling } => {
            let curve = read_curve(input)?;
            let scale = if *relative { curve.diameter() } else { 1.0 };
            let abs: Vec<f64> = gaps.iter().map(|g| g * scale).collect();
            let m = match measure {
                MeasureArg::Wk => ScanMeasure::WK(*k),
                MeasureArg::Sll => ScanMeasure::Sll,
            };
            let rows = convergence_scan(|g| with_endpoint_gap(&curve, g), &abs, m, &config(cli, sampling))?;
            out.human.push_str("gap          mean          stderr\n");
            for r in &rows {
                let _ = writeln!(out.human, "{:<12.6} {:<13.6} {:.6}", r.gap, r.estimate.mean, r.estimate.stderr);
                out.push("scan", r);
            }
        }
        Command::Generate { kind, n, gap, seed, output, curve_format } => {
            let curve: PolygonalCurve = match kind {
                Kind::Trefoil => curves::trefoil(n.unwrap_or(24))?,
                Kind::NearClosedTrefoil => curves::near_closed_trefoil(n.unwrap_or(48), *gap)?,
                Kind::RandomWalk => curves::random_walk(n.unwrap_or(20), *seed)?,
                Kind::FourEdge => curves::random_four_edge(*seed)?,
            };
            let text = write_curve(&curve, *curve_format);
            match output {
                Some(path) => {
                    std::fs::write(path, text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
                }
                None => {
                    // The curve itself is the output in either format.
                    out.human = text.clone();
                    out.records.push(serde_json::from_str(&write_curve(&curve, CurveFormat::Json)).expect("valid JSON"));
                }
            }
        }
    }
    Ok(out)
}

fn report_text(r: &SkeinReport) -> String {
    let mut s = format!("crossing {}: {}", r.crossing, if r.pass() { "pass" } else { "FAIL" });
    if let (Some(rv), Some(lv)) = (r.r, r.l) {
        let _ = write!(s, "  (r = {rv}, l = {lv})");
    }
    s.push('\n');
    for c in &r.checks {
        let _ = writeln!(
            s,
            "  [{}] {}: {} vs {}",
            if c.pass { "ok" } else { "FAIL" },
            c.relation,
            format_rational(&c.lhs),
            format_rational(&c.rhs)
        );
    }
    s
}
