//! Exact bracket state sums, enhanced Jones polynomials and the Vassiliev
//! coefficients read off from them.
//!
//! The bracket satisfies `<X> = <A-smoothing> - q <B-smoothing>` with every
//! loop or open arc contributing `q + q^-1`. At a positive crossing the
//! A-smoothing is the orientation-respecting one; at a negative crossing it
//! is the other.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::diagram::{crossing_counts, Diagram, Segments, Strand};
use crate::error::{Error, Result};

/// Exact fraction used for all Vassiliev values.
pub type Rational = BigRational;

/// Default state-sum budget: `2^24` smoothing states.
pub const DEFAULT_MAX_CROSSINGS: usize = 24;

/// Integer Laurent polynomial in `q`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LaurentPolynomial {
    terms: BTreeMap<i64, BigInt>,
}

impl LaurentPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, 1)
    }

    pub fn monomial(exp: i64, coeff: impl Into<BigInt>) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, coeff.into());
        p
    }

    /// `q + q^-1`, the value of a lone loop.
    pub fn loop_value() -> Self {
        Self::from_pairs([(-1, 1), (1, 1)])
    }

    pub fn from_pairs<I, C>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (i64, C)>,
        C: Into<BigInt>,
    {
        let mut p = Self::zero();
        for (e, c) in pairs {
            p.add_term(e, c.into());
        }
        p
    }

    fn add_term(&mut self, exp: i64, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(exp).or_insert_with(BigInt::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&exp);
        }
    }

    /// `(exponent, coefficient)` pairs, exponents ascending.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigInt)> + '_ {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    pub fn coefficient(&self, exp: i64) -> BigInt {
        self.terms.get(&exp).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_exponent(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Multiplies by `q^k`.
    pub fn shifted(&self, k: i64) -> Self {
        LaurentPolynomial {
            terms: self.terms.iter().map(|(&e, c)| (e + k, c.clone())).collect(),
        }
    }

    pub fn scaled(&self, s: &BigInt) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        LaurentPolynomial {
            terms: self.terms.iter().map(|(&e, c)| (e, c * s)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Value at `q = 1`.
    pub fn at_one(&self) -> BigInt {
        self.terms.values().sum()
    }

    /// Exact quotient by `q + q^-1`, or `None` when it does not divide.
    pub fn div_loop_value(&self) -> Option<Self> {
        let Some(lo) = self.min_exponent() else {
            return Some(Self::zero());
        };
        // Work with an ordinary polynomial p(q) = q^-lo * self and divide by
        // q^2 + 1; the quotient carries the factor q^(lo + 1).
        let hi = self.max_exponent().unwrap();
        let deg = (hi - lo) as usize;
        let mut rem: Vec<BigInt> = (0..=deg).map(|k| self.coefficient(lo + k as i64)).collect();
        if deg < 2 {
            return None;
        }
        let mut quot = vec![BigInt::zero(); deg - 1];
        for k in (2..=deg).rev() {
            let c = rem[k].clone();
            if c.is_zero() {
                continue;
            }
            quot[k - 2] = c.clone();
            rem[k] = BigInt::zero();
            rem[k - 2] -= c;
        }
        if !rem[0].is_zero() || !rem[1].is_zero() {
            return None;
        }
        Some(Self::from_pairs(
            quot.into_iter().enumerate().map(|(k, c)| (lo + 1 + k as i64, c)),
        ))
    }
}

impl Add for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn add(self, o: &LaurentPolynomial) -> LaurentPolynomial {
        let mut p = self.clone();
        for (&e, c) in &o.terms {
            p.add_term(e, c.clone());
        }
        p
    }
}

impl Sub for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn sub(self, o: &LaurentPolynomial) -> LaurentPolynomial {
        let mut p = self.clone();
        for (&e, c) in &o.terms {
            p.add_term(e, -c.clone());
        }
        p
    }
}

impl Mul for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn mul(self, o: &LaurentPolynomial) -> LaurentPolynomial {
        let mut p = LaurentPolynomial::zero();
        for (&e1, c1) in &self.terms {
            for (&e2, c2) in &o.terms {
                p.add_term(e1 + e2, c1 * c2);
            }
        }
        p
    }
}

impl Neg for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn neg(self) -> LaurentPolynomial {
        LaurentPolynomial {
            terms: self.terms.iter().map(|(&e, c)| (e, -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for LaurentPolynomial {
            type Output = LaurentPolynomial;
            fn $m(self, o: LaurentPolynomial) -> LaurentPolynomial {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (&e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let unit = mag.is_one();
            match (e, unit) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "q")?,
                (1, false) => write!(f, "{mag}q")?,
                (_, true) => write!(f, "q^{e}")?,
                (_, false) => write!(f, "{mag}q^{e}")?,
            }
        }
        Ok(())
    }
}

/// Serialised as an ascending list of `[exponent, coefficient]` pairs;
/// coefficients too large for `i64` are written as decimal strings.
impl Serialize for LaurentPolynomial {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(serde::Serialize)]
        #[serde(untagged)]
        enum Coeff {
            Small(i64),
            Big(String),
        }
        let mut seq = ser.serialize_seq(Some(self.terms.len()))?;
        for (&e, c) in &self.terms {
            let coeff = c.to_i64().map_or_else(|| Coeff::Big(c.to_string()), Coeff::Small);
            seq.serialize_element(&(e, coeff))?;
        }
        seq.end()
    }
}

/// Number of smoothing states with a given B-count and loop count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateHistogram {
    /// `counts[i][l]` states with `i` B-smoothings and `l` loops plus arcs.
    pub counts: Vec<Vec<u64>>,
}

/// Union pairs for one crossing's two smoothings.
#[derive(Clone, Copy)]
struct CrossingJoins {
    oriented: [(u16, u16); 2],
    unoriented: [(u16, u16); 2],
    positive: bool,
}

fn crossing_joins(d: &Diagram, segs: &Segments) -> Vec<CrossingJoins> {
    d.crossings()
        .iter()
        .map(|c| {
            let o = segs.event_index(c.over.component, d.event_position(c.id, Strand::Over));
            let u = segs.event_index(c.under.component, d.event_position(c.id, Strand::Under));
            let (io, oo) = (segs.in_seg[o] as u16, segs.out_seg[o] as u16);
            let (iu, ou) = (segs.in_seg[u] as u16, segs.out_seg[u] as u16);
            CrossingJoins {
                oriented: [(io, ou), (iu, oo)],
                unoriented: [(io, iu), (oo, ou)],
                positive: c.sign > 0,
            }
        })
        .collect()
}

fn find(parent: &mut [u16], mut x: u16) -> u16 {
    while parent[x as usize] != x {
        let p = parent[x as usize];
        parent[x as usize] = parent[p as usize];
        x = p;
    }
    x
}

/// Loops plus arcs after smoothing every crossing per `mask` (bit set = B).
fn count_loops(joins: &[CrossingJoins], seg_count: usize, mask: u64, parent: &mut [u16]) -> u32 {
    for (k, p) in parent.iter_mut().enumerate().take(seg_count) {
        *p = k as u16;
    }
    let mut classes = seg_count as u32;
    for (k, j) in joins.iter().enumerate() {
        let b = (mask >> k) & 1 == 1;
        // A = oriented at positive crossings, unoriented at negative ones.
        let pairs = if b == j.positive { &j.unoriented } else { &j.oriented };
        for &(x, y) in pairs {
            let (rx, ry) = (find(parent, x), find(parent, y));
            if rx != ry {
                parent[rx as usize] = ry;
                classes -= 1;
            }
        }
    }
    classes
}

/// Tallies all `2^n` smoothing states by B-count and loop count.
pub fn state_histogram(d: &Diagram, max_crossings: usize) -> Result<StateHistogram> {
    let n = d.crossing_count();
    if n > max_crossings {
        return Err(Error::Resource(format!(
            "diagram has {n} crossings, state-sum budget is {max_crossings}"
        )));
    }
    let segs = Segments::new(d);
    let joins = crossing_joins(d, &segs);
    let seg_count = segs.count;
    let width = seg_count + 1;

    let tally = |lo: u64, hi: u64| -> Vec<u64> {
        let mut h = vec![0u64; (n + 1) * width];
        let mut parent = vec![0u16; seg_count];
        for mask in lo..hi {
            let loops = count_loops(&joins, seg_count, mask, &mut parent) as usize;
            h[mask.count_ones() as usize * width + loops] += 1;
        }
        h
    };

    let total: u64 = 1 << n;
    let flat = if n <= 12 {
        tally(0, total)
    } else {
        let blocks: u64 = 256;
        let step = total / blocks;
        (0..blocks)
            .into_par_iter()
            .map(|b| tally(b * step, (b + 1) * step))
            .reduce(
                || vec![0u64; (n + 1) * width],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            )
    };
    Ok(StateHistogram {
        counts: flat.chunks(width).map(|c| c.to_vec()).collect(),
    })
}

/// Bracket polynomial with the default crossing budget.
pub fn bracket(d: &Diagram) -> Result<LaurentPolynomial> {
    bracket_with_budget(d, DEFAULT_MAX_CROSSINGS)
}

pub fn bracket_with_budget(d: &Diagram, max_crossings: usize) -> Result<LaurentPolynomial> {
    let hist = state_histogram(d, max_crossings)?;
    let loop_value = LaurentPolynomial::loop_value();
    let max_loops = hist.counts.first().map_or(0, |r| r.len());
    let loop_powers: Vec<LaurentPolynomial> =
        (0..max_loops as u32).map(|l| loop_value.pow(l)).collect();
    let mut total = LaurentPolynomial::zero();
    for (i, row) in hist.counts.iter().enumerate() {
        let mut inner = LaurentPolynomial::zero();
        for (l, &count) in row.iter().enumerate() {
            if count > 0 {
                inner = &inner + &loop_powers[l].scaled(&BigInt::from(count));
            }
        }
        if inner.is_zero() {
            continue;
        }
        // (-q)^i
        let sign = if i % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        total = &total + &inner.shifted(i as i64).scaled(&sign);
    }
    Ok(total)
}

/// `q^(n+ - 2n-) (-1)^(n-) <d>`.
pub fn enhanced_jones(d: &Diagram) -> Result<LaurentPolynomial> {
    enhanced_jones_with_budget(d, DEFAULT_MAX_CROSSINGS)
}

pub fn enhanced_jones_with_budget(d: &Diagram, max_crossings: usize) -> Result<LaurentPolynomial> {
    let b = bracket_with_budget(d, max_crossings)?;
    let c = crossing_counts(d);
    let shift = c.n_plus as i64 - 2 * c.n_minus as i64;
    let sign = if c.n_minus % 2 == 0 { BigInt::one() } else { -BigInt::one() };
    Ok(b.shifted(shift).scaled(&sign))
}

/// Enhanced Jones polynomial divided by `q + q^-1`.
pub fn classical_jones(d: &Diagram) -> Result<LaurentPolynomial> {
    let j = enhanced_jones(d)?;
    j.div_loop_value().ok_or_else(|| Error::NotDivisible(j.to_string()))
}

/// `v_k = (1/k!) sum_m c_m (-m/2)^k` for `J = sum_m c_m q^m`: the `x^k`
/// coefficient of `J(e^(-x/2))`.
pub fn vassiliev_from_polynomial(j: &LaurentPolynomial, k: u32) -> Rational {
    let mut sum = BigInt::zero();
    for (m, c) in j.terms() {
        sum += c * Pow::pow(BigInt::from(-m), k);
    }
    let denom = Pow::pow(BigInt::from(2), k) * factorial(k);
    Rational::new(sum, denom)
}

fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, x| acc * BigInt::from(x))
}

pub fn vassiliev_coefficient(d: &Diagram, k: u32) -> Result<Rational> {
    Ok(vassiliev_from_polynomial(&enhanced_jones(d)?, k))
}

/// Direct enhanced-state evaluation of `v_k`: every smoothing state and
/// every sign assignment of its loops and arcs is enumerated individually.
///
/// Exponential in both crossings and loops, meant only as an independent
/// check of [`vassiliev_coefficient`] on small diagrams.
pub fn vassiliev_enhanced_state_sum(d: &Diagram, k: u32) -> Result<Rational> {
    let n = d.crossing_count();
    if n > 16 {
        return Err(Error::Resource(format!(
            "enhanced-state enumeration limited to 16 crossings, got {n}"
        )));
    }
    let counts = crossing_counts(d);
    let (n_plus, n_minus) = (counts.n_plus as i64, counts.n_minus as i64);
    let walk = SmoothingWalk::new(d);
    let mut sum = BigInt::zero();
    for mask in 0u64..(1 << n) {
        let i = mask.count_ones() as i64;
        let loops = walk.components(mask);
        for signs in 0u64..(1 << loops) {
            let positive = signs.count_ones() as i64;
            let lambda = positive - (loops as i64 - positive);
            let j = i + lambda;
            let exp = BigInt::from(j + n_plus - 2 * n_minus);
            let term = Pow::pow(exp, k);
            if (i + n_minus) % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
        }
    }
    let sign = if k % 2 == 0 { BigInt::one() } else { -BigInt::one() };
    let denom = Pow::pow(BigInt::from(2), k) * factorial(k);
    Ok(Rational::new(sign * sum, denom))
}

/// Counts loops of a smoothing by walking strand ends, without union-find.
struct SmoothingWalk {
    /// For every segment end `2*s` (start) / `2*s+1` (finish): the crossing
    /// passage it touches, if any.
    end_event: Vec<Option<usize>>,
    seg_count: usize,
    /// Per global event: (crossing index, is over, in segment, out segment).
    events: Vec<(usize, bool, usize, usize)>,
    signs: Vec<i8>,
    partner: Vec<usize>,
}

impl SmoothingWalk {
    fn new(d: &Diagram) -> Self {
        let segs = Segments::new(d);
        let mut end_event = vec![None; 2 * segs.count];
        let mut events = Vec::with_capacity(segs.events.len());
        for (e, &(cid, strand)) in segs.events.iter().enumerate() {
            let (i, o) = (segs.in_seg[e], segs.out_seg[e]);
            end_event[2 * i + 1] = Some(e);
            end_event[2 * o] = Some(e);
            events.push((cid, strand == Strand::Over, i, o));
        }
        let mut partner = vec![0; events.len()];
        for a in 0..events.len() {
            for b in 0..events.len() {
                if a != b && events[a].0 == events[b].0 {
                    partner[a] = b;
                }
            }
        }
        SmoothingWalk {
            end_event,
            seg_count: segs.count,
            events,
            signs: d.signs(),
            partner,
        }
    }

    /// Segment end reached when leaving crossing passage `e` from the side
    /// `arrived` (finish of in-segment or start of out-segment).
    fn across(&self, end: usize, mask: u64) -> Option<usize> {
        let e = self.end_event[end]?;
        let (cid, _, in_s, _) = self.events[e];
        let arrived_on_in = end == 2 * in_s + 1;
        let p = self.partner[e];
        let (_, _, p_in, p_out) = self.events[p];
        let b = (mask >> cid) & 1 == 1;
        let oriented = b != (self.signs[cid] > 0);
        Some(match (oriented, arrived_on_in) {
            // oriented: in -> partner out, out -> partner in
            (true, true) => 2 * p_out,
            (true, false) => 2 * p_in + 1,
            // unoriented: in <-> partner in, out <-> partner out
            (false, true) => 2 * p_in + 1,
            (false, false) => 2 * p_out,
        })
    }

    fn components(&self, mask: u64) -> u32 {
        let mut seen = vec![false; self.seg_count];
        let mut count = 0;
        for s0 in 0..self.seg_count {
            if seen[s0] {
                continue;
            }
            count += 1;
            // Walk in both directions from s0's two ends.
            let mut stack = vec![2 * s0, 2 * s0 + 1];
            seen[s0] = true;
            while let Some(end) = stack.pop() {
                if let Some(next) = self.across(end, mask) {
                    let s = next / 2;
                    if !seen[s] {
                        seen[s] = true;
                        stack.push(2 * s);
                        stack.push(2 * s + 1);
                    }
                }
            }
        }
        count
    }
}
