//! Monte Carlo averages over projection directions: Vassiliev measures w_k,
//! the double alternating self-linking integral, and knotoid spectra.
//!
//! Sample `i` uses the direction stream of `(seed, i)`; a non-generic
//! direction is redrawn from the same stream and counted as rejected. Every
//! per-sample value is an exact rational and the sums are exact, so results
//! do not depend on how samples are spread over threads.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::diagram::{extract_diagram_with_tol, Diagram};
use crate::error::{Error, Result};
use crate::geometry::{direction_at, project, Direction, Point3, PolygonalCurve, DEFAULT_TOL};
use crate::polynomial::{enhanced_jones_with_budget, vassiliev_from_polynomial, LaurentPolynomial, Rational, DEFAULT_MAX_CROSSINGS};
use crate::vassiliev::{alternating_sign_sum, serialize_rational};

/// Redraws allowed per sample before the stream is declared degenerate.
const MAX_ATTEMPTS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub tol: f64,
    pub max_crossings: usize,
}

impl SampleConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        SampleConfig {
            n_samples,
            seed,
            threads: None,
            tol: DEFAULT_TOL,
            max_crossings: DEFAULT_MAX_CROSSINGS,
        }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCEstimate {
    pub measure: String,
    pub k: Option<u32>,
    pub mean: f64,
    pub stderr: f64,
    pub samples_used: usize,
    pub samples_rejected: usize,
    pub seed: u64,
    /// The mean as an exact fraction of the sampled values.
    #[serde(serialize_with = "serialize_rational")]
    pub exact_mean: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub fingerprint: LaurentPolynomial,
    pub probability: f64,
    pub count: usize,
    #[serde(serialize_with = "serialize_rational")]
    pub v2: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub entries: Vec<SpectrumEntry>,
    pub samples_used: usize,
    pub samples_rejected: usize,
    pub seed: u64,
}

impl Spectrum {
    /// `Σ p(K_i) v_k(K_i)`, exactly.
    pub fn w_k(&self, k: u32) -> Rational {
        let total: Rational = self
            .entries
            .iter()
            .map(|e| vassiliev_from_polynomial(&e.fingerprint, k) * Rational::from_integer(BigInt::from(e.count)))
            .fold(Rational::zero(), |a, b| a + b);
        total / Rational::from_integer(BigInt::from(self.samples_used))
    }
}

/// The diagram of sample `index` and the number of rejected draws before it.
pub fn sample_diagram(curve: &PolygonalCurve, seed: u64, index: u64, tol: f64) -> Result<(Diagram, Direction, usize)> {
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let dir = direction_at(seed, index, attempt);
        match extract_diagram_with_tol(&project(curve, dir), tol) {
            Ok(d) => return Ok((d, dir, attempt as usize)),
            Err(Error::NonGeneric(e)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Degenerate(format!(
        "sample {index}: {MAX_ATTEMPTS} consecutive non-generic directions (last: {})",
        last.expect("at least one attempt")
    )))
}

fn run<T, F>(cfg: &SampleConfig, f: F) -> Result<Vec<(T, usize)>>
where
    T: Send,
    F: Fn(u64) -> Result<(T, usize)> + Sync + Send,
{
    if cfg.n_samples < 2 {
        return Err(Error::InvalidInput("at least 2 samples are needed".into()));
    }
    let work = || -> Result<Vec<(T, usize)>> { (0..cfg.n_samples as u64).into_par_iter().map(&f).collect() };
    let out = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Resource(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let rejected: usize = out.iter().map(|(_, r)| r).sum();
    if rejected > cfg.n_samples {
        return Err(Error::Degenerate(format!(
            "{rejected} of {} directions were non-generic",
            rejected + cfg.n_samples
        )));
    }
    Ok(out)
}

fn summarize(measure: &str, k: Option<u32>, cfg: &SampleConfig, values: Vec<(Rational, usize)>) -> MCEstimate {
    let n = values.len();
    let rejected = values.iter().map(|(_, r)| r).sum();
    let mut sum = Rational::zero();
    let mut sum_sq = Rational::zero();
    for (v, _) in &values {
        sum_sq += v * v;
        sum += v;
    }
    let nn = Rational::from_integer(BigInt::from(n));
    let mean = &sum / &nn;
    let var = (sum_sq - &mean * &sum) / (&nn - Rational::from_integer(BigInt::from(1)));
    let var = var.to_f64().unwrap_or(f64::NAN).max(0.0);
    MCEstimate {
        measure: measure.to_string(),
        k,
        mean: mean.to_f64().unwrap_or(f64::NAN),
        stderr: (var / n as f64).sqrt(),
        samples_used: n,
        samples_rejected: rejected,
        seed: cfg.seed,
        exact_mean: mean,
    }
}

/// Mean of `v_k` over projections of `curve`.
pub fn w_k_estimate(curve: &PolygonalCurve, k: u32, cfg: &SampleConfig) -> Result<MCEstimate> {
    let values = run(cfg, |i| {
        let (d, _, rej) = sample_diagram(curve, cfg.seed, i, cfg.tol)?;
        let j = enhanced_jones_with_budget(&d, cfg.max_crossings)?;
        Ok((vassiliev_from_polynomial(&j, k), rej))
    })?;
    Ok(summarize("w_k", Some(k), cfg, values))
}

/// Half the signed count of alternating crossing pairs in a diagram: the
/// integrand of the double alternating self-linking integral.
pub fn sll_sample(d: &Diagram) -> Result<Rational> {
    Ok(Rational::new(BigInt::from(alternating_sign_sum(d)?), BigInt::from(2)))
}

pub fn sll_estimate(curve: &PolygonalCurve, cfg: &SampleConfig) -> Result<MCEstimate> {
    let values = run(cfg, |i| {
        let (d, _, rej) = sample_diagram(curve, cfg.seed, i, cfg.tol)?;
        Ok((sll_sample(&d)?, rej))
    })?;
    Ok(summarize("sll", None, cfg, values))
}

/// Projection classes of an open curve, keyed by enhanced Jones polynomial,
/// ordered by decreasing frequency.
pub fn knotoid_spectrum(curve: &PolygonalCurve, cfg: &SampleConfig) -> Result<Spectrum> {
    if curve.is_closed() {
        return Err(Error::Precondition("knotoid spectrum needs an open curve".into()));
    }
    let values = run(cfg, |i| {
        let (d, _, rej) = sample_diagram(curve, cfg.seed, i, cfg.tol)?;
        Ok((enhanced_jones_with_budget(&d, cfg.max_crossings)?, rej))
    })?;
    let rejected = values.iter().map(|(_, r)| r).sum();
    let n = values.len();
    let mut counts: BTreeMap<LaurentPolynomial, usize> = BTreeMap::new();
    for (j, _) in values {
        *counts.entry(j).or_default() += 1;
    }
    let mut entries: Vec<SpectrumEntry> = counts
        .into_iter()
        .map(|(fingerprint, count)| SpectrumEntry {
            v2: vassiliev_from_polynomial(&fingerprint, 2),
            probability: count as f64 / n as f64,
            count,
            fingerprint,
        })
        .collect();
    entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.fingerprint.cmp(&b.fingerprint)));
    Ok(Spectrum {
        entries,
        samples_used: n,
        samples_rejected: rejected,
        seed: cfg.seed,
    })
}

/// The open curve with its end vertices moved symmetrically about their
/// midpoint to distance `gap`; `gap = 0` merges them into a closed curve.
pub fn with_endpoint_gap(curve: &PolygonalCurve, gap: f64) -> Result<PolygonalCurve> {
    if curve.is_closed() {
        return Err(Error::Precondition("endpoint gap needs an open curve".into()));
    }
    if !(gap >= 0.0 && gap.is_finite()) {
        return Err(Error::InvalidInput(format!("gap must be non-negative, got {gap}")));
    }
    let v = curve.vertices();
    let (first, last) = (v[0], v[v.len() - 1]);
    let offset = last - first;
    if offset.norm() == 0.0 {
        return Err(Error::Degenerate("endpoints coincide; gap direction undefined".into()));
    }
    let mid = (first + last) * 0.5;
    if gap == 0.0 {
        let mut vs = vec![mid];
        vs.extend_from_slice(&v[1..v.len() - 1]);
        return PolygonalCurve::closed(vs);
    }
    let half: Point3 = offset.normalized() * (gap / 2.0);
    let mut vs = v.to_vec();
    vs[0] = mid - half;
    let n = vs.len();
    vs[n - 1] = mid + half;
    PolygonalCurve::open(vs)
}

/// Which Monte Carlo measure a scan evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMeasure {
    WK(u32),
    Sll,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub gap: f64,
    pub estimate: MCEstimate,
}

/// Estimates the measure on `family(gap)` for each gap, typically a curve
/// whose endpoints approach each other as the gap shrinks.
pub fn convergence_scan<F>(family: F, gaps: &[f64], measure: ScanMeasure, cfg: &SampleConfig) -> Result<Vec<ScanRow>>
where
    F: Fn(f64) -> Result<PolygonalCurve>,
{
    gaps.iter()
        .map(|&gap| {
            let c = family(gap)?;
            let estimate = match measure {
                ScanMeasure::WK(k) => w_k_estimate(&c, k, cfg)?,
                ScanMeasure::Sll => sll_estimate(&c, cfg)?,
            };
            Ok(ScanRow { gap, estimate })
        })
        .collect()
}
