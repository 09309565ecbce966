//! Knot, knotoid and two-component link(oid) diagrams in Gauss-code form.
//!
//! A [`Diagram`] records, for every component, the ordered sequence of
//! crossing passages met while traversing it. Open components are traversed
//! from their leg (start point) to their head (end point); closed components
//! from a fixed basepoint.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{find_crossings, ProjectedCurve, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Strand {
    Over,
    Under,
}

impl Strand {
    pub fn flip(self) -> Strand {
        match self {
            Strand::Over => Strand::Under,
            Strand::Under => Strand::Over,
        }
    }

    fn letter(self) -> char {
        match self {
            Strand::Over => 'O',
            Strand::Under => 'U',
        }
    }
}

/// Where one strand of a crossing sits: component index and arc position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Site {
    pub component: usize,
    pub position: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub id: usize,
    /// `+1` when the over-strand turned counterclockwise by less than π
    /// aligns with the under-strand.
    pub sign: i8,
    pub over: Site,
    pub under: Site,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Component {
    pub closed: bool,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub crossing: usize,
    pub strand: Strand,
    pub position: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CrossingCounts {
    pub n_plus: usize,
    pub n_minus: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagram {
    crossings: Vec<Crossing>,
    components: Vec<Component>,
    traversals: Vec<Vec<Event>>,
}

impl Diagram {
    /// Builds a diagram from component traversals and crossing signs.
    ///
    /// Crossing ids must be `0..signs.len()`, each appearing exactly once as
    /// over and once as under. Positions must increase along each traversal.
    pub fn from_traversals(
        components: Vec<Component>,
        traversals: Vec<Vec<Event>>,
        signs: &[i8],
    ) -> Result<Self> {
        if components.len() != traversals.len() {
            return Err(Error::InvalidInput(
                "component and traversal counts differ".into(),
            ));
        }
        let n = signs.len();
        let mut over: Vec<Option<Site>> = vec![None; n];
        let mut under: Vec<Option<Site>> = vec![None; n];
        for (c, events) in traversals.iter().enumerate() {
            let mut last = f64::NEG_INFINITY;
            for e in events {
                if e.crossing >= n {
                    return Err(Error::InvalidInput(format!(
                        "crossing id {} out of range",
                        e.crossing
                    )));
                }
                if !(e.position > last) || e.position >= components[c].length || e.position < 0.0
                {
                    return Err(Error::InvalidInput(format!(
                        "positions along component {c} are not increasing within its length"
                    )));
                }
                last = e.position;
                let slot = match e.strand {
                    Strand::Over => &mut over[e.crossing],
                    Strand::Under => &mut under[e.crossing],
                };
                if slot.is_some() {
                    return Err(Error::InvalidInput(format!(
                        "crossing {} has two {:?} passages",
                        e.crossing, e.strand
                    )));
                }
                *slot = Some(Site { component: c, position: e.position });
            }
        }
        let mut crossings = Vec::with_capacity(n);
        for id in 0..n {
            let (Some(o), Some(u)) = (over[id], under[id]) else {
                return Err(Error::InvalidInput(format!(
                    "crossing {id} lacks an over or under passage"
                )));
            };
            if signs[id] != 1 && signs[id] != -1 {
                return Err(Error::InvalidInput(format!("crossing {id} has sign {}", signs[id])));
            }
            crossings.push(Crossing { id, sign: signs[id], over: o, under: u });
        }
        Ok(Diagram { crossings, components, traversals })
    }

    /// Builds a diagram from a textual Gauss code, one string per component.
    ///
    /// Each token is `O<id>` or `U<id>`; a component string prefixed with
    /// `open:` is an open arc, otherwise the component is closed. Positions
    /// are assigned as `1, 2, ...` along each component.
    ///
    /// ```
    /// use knotmeasure::diagram::Diagram;
    /// let trefoil = Diagram::from_gauss_code(&["O0 U1 O2 U0 O1 U2"], &[1, 1, 1]).unwrap();
    /// assert_eq!(trefoil.writhe(), 3);
    /// ```
    pub fn from_gauss_code(components: &[&str], signs: &[i8]) -> Result<Self> {
        let mut comps = Vec::new();
        let mut travs = Vec::new();
        for code in components {
            let (closed, body) = match code.trim().strip_prefix("open:") {
                Some(rest) => (false, rest),
                None => (true, code.trim()),
            };
            let mut events = Vec::new();
            for (k, tok) in body.split_whitespace().enumerate() {
                let strand = match tok.chars().next() {
                    Some('O') | Some('o') => Strand::Over,
                    Some('U') | Some('u') => Strand::Under,
                    _ => return Err(Error::InvalidInput(format!("bad Gauss token {tok:?}"))),
                };
                let crossing: usize = tok[1..]
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad Gauss token {tok:?}")))?;
                events.push(Event { crossing, strand, position: (k + 1) as f64 });
            }
            comps.push(Component { closed, length: (events.len() + 1) as f64 });
            travs.push(events);
        }
        Diagram::from_traversals(comps, travs, signs)
    }

    /// Same events with positions reassigned to `1, 2, ...`.
    fn renumbered(components: Vec<bool>, traversals: Vec<Vec<(usize, Strand)>>, signs: &[i8]) -> Diagram {
        let comps = components
            .iter()
            .zip(&traversals)
            .map(|(&closed, t)| Component { closed, length: (t.len() + 1) as f64 })
            .collect();
        let travs = traversals
            .into_iter()
            .map(|t| {
                t.into_iter()
                    .enumerate()
                    .map(|(k, (crossing, strand))| Event {
                        crossing,
                        strand,
                        position: (k + 1) as f64,
                    })
                    .collect()
            })
            .collect();
        Diagram::from_traversals(comps, travs, signs).expect("renumbered diagram is well formed")
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn crossing(&self, id: usize) -> &Crossing {
        &self.crossings[id]
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn traversals(&self) -> &[Vec<Event>] {
        &self.traversals
    }

    pub fn crossing_count(&self) -> usize {
        self.crossings.len()
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn signs(&self) -> Vec<i8> {
        self.crossings.iter().map(|c| c.sign).collect()
    }

    pub fn crossing_counts(&self) -> CrossingCounts {
        crossing_counts(self)
    }

    pub fn writhe(&self) -> i64 {
        writhe(self)
    }

    pub fn is_self_crossing(&self, id: usize) -> bool {
        let c = &self.crossings[id];
        c.over.component == c.under.component
    }

    /// The diagram with crossing `id` switched: over and under exchanged, sign
    /// negated.
    pub fn switched(&self, id: usize) -> Diagram {
        self.switched_many(&[id])
    }

    pub fn switched_many(&self, ids: &[usize]) -> Diagram {
        let mut d = self.clone();
        for &id in ids {
            let c = &mut d.crossings[id];
            c.sign = -c.sign;
            std::mem::swap(&mut c.over, &mut c.under);
        }
        for t in &mut d.traversals {
            for e in t.iter_mut() {
                if ids.contains(&e.crossing) {
                    e.strand = e.strand.flip();
                }
            }
        }
        d
    }

    /// Every crossing switched.
    pub fn mirrored(&self) -> Diagram {
        let all: Vec<usize> = (0..self.crossings.len()).collect();
        self.switched_many(&all)
    }

    /// Adds a closed component with no crossings.
    pub fn with_distant_circle(&self) -> Diagram {
        let mut d = self.clone();
        d.components.push(Component { closed: true, length: 1.0 });
        d.traversals.push(Vec::new());
        d
    }

    /// Inserts a Reidemeister-I kink on `component` just after traversal index
    /// `after` (or at the start when `after` is `None`). The kink's strand
    /// is met first as `first`, and the new crossing gets sign `sign`.
    pub fn with_kink(&self, component: usize, after: Option<usize>, first: Strand, sign: i8) -> Diagram {
        let id = self.crossings.len();
        let mut travs: Vec<Vec<(usize, Strand)>> = self
            .traversals
            .iter()
            .map(|t| t.iter().map(|e| (e.crossing, e.strand)).collect())
            .collect();
        let at = after.map_or(0, |k| k + 1);
        travs[component].insert(at, (id, first.flip()));
        travs[component].insert(at, (id, first));
        let mut signs = self.signs();
        signs.push(sign);
        let closed = self.components.iter().map(|c| c.closed).collect();
        Diagram::renumbered(closed, travs, &signs)
    }

    /// Cyclically rotates the traversal of a closed component so it starts at
    /// event `start`.
    pub fn rotated(&self, component: usize, start: usize) -> Result<Diagram> {
        if !self.components[component].closed {
            return Err(Error::Precondition("cannot move the leg of an open component".into()));
        }
        let mut travs = self.plain_traversals();
        travs[component].rotate_left(start);
        let closed = self.components.iter().map(|c| c.closed).collect();
        Ok(Diagram::renumbered(closed, travs, &self.signs()))
    }

    /// Cuts a closed one-component diagram just before traversal event
    /// `start`, giving a knot-type knotoid with the same crossings.
    pub fn cut(&self, start: usize) -> Result<Diagram> {
        if self.components.len() != 1 || !self.components[0].closed {
            return Err(Error::Precondition("cut needs a closed one-component diagram".into()));
        }
        let mut travs = self.plain_traversals();
        let m = travs[0].len();
        if m > 0 {
            travs[0].rotate_left(start % m);
        }
        Ok(Diagram::renumbered(vec![false], travs, &self.signs()))
    }

    fn plain_traversals(&self) -> Vec<Vec<(usize, Strand)>> {
        self.traversals
            .iter()
            .map(|t| t.iter().map(|e| (e.crossing, e.strand)).collect())
            .collect()
    }

    /// Oriented smoothing at crossing `id`: the crossing is removed and
    /// strands are reconnected respecting orientation. A self-crossing splits
    /// its component in two; a crossing between two components merges them.
    ///
    /// Open components are emitted first (leg to head, in leg order), then
    /// closed loops, each starting at its lowest-numbered segment.
    pub fn smoothed(&self, id: usize) -> Diagram {
        let segs = Segments::new(self);
        let c = &self.crossings[id];
        let o = segs.event_index(c.over.component, self.event_position(id, Strand::Over));
        let u = segs.event_index(c.under.component, self.event_position(id, Strand::Under));

        // next[s] = segment following segment s, None at a head.
        let next = |s: usize| -> Option<usize> {
            let end = segs.seg_end[s]?;
            Some(if end == o {
                segs.out_seg[u]
            } else if end == u {
                segs.out_seg[o]
            } else {
                segs.out_seg[end]
            })
        };
        let mut visited = vec![false; segs.count];
        let mut closed_flags = Vec::new();
        let mut travs: Vec<Vec<(usize, Strand)>> = Vec::new();

        let record = |s: usize, out: &mut Vec<(usize, Strand)>| {
            if let Some(e) = segs.seg_end[s] {
                if e != o && e != u {
                    let (cid, st) = segs.events[e];
                    out.push((cid, st));
                }
            }
        };

        for &leg in &segs.legs {
            let mut t = Vec::new();
            let mut s = leg;
            loop {
                visited[s] = true;
                record(s, &mut t);
                match next(s) {
                    Some(n) => s = n,
                    None => break,
                }
            }
            closed_flags.push(false);
            travs.push(t);
        }
        for start in 0..segs.count {
            if visited[start] {
                continue;
            }
            let mut t = Vec::new();
            let mut s = start;
            loop {
                visited[s] = true;
                record(s, &mut t);
                s = next(s).expect("closed loop has no head");
                if s == start {
                    break;
                }
            }
            closed_flags.push(true);
            travs.push(t);
        }

        // Re-index remaining crossings densely.
        let remap: HashMap<usize, usize> = (0..self.crossings.len())
            .filter(|&k| k != id)
            .enumerate()
            .map(|(new, old)| (old, new))
            .collect();
        let signs: Vec<i8> = (0..self.crossings.len())
            .filter(|&k| k != id)
            .map(|k| self.crossings[k].sign)
            .collect();
        let travs = travs
            .into_iter()
            .map(|t| t.into_iter().map(|(c, s)| (remap[&c], s)).collect())
            .collect();
        Diagram::renumbered(closed_flags, travs, &signs)
    }

    /// Traversal index of a crossing passage on its component.
    pub fn event_position(&self, id: usize, strand: Strand) -> usize {
        let site = match strand {
            Strand::Over => self.crossings[id].over,
            Strand::Under => self.crossings[id].under,
        };
        self.traversals[site.component]
            .iter()
            .position(|e| e.crossing == id && e.strand == strand)
            .expect("crossing present in traversal")
    }

    /// One line per traversal event: `component crossing O|U sign position`.
    pub fn dump_gauss(&self) -> String {
        let mut s = String::new();
        for (c, t) in self.traversals.iter().enumerate() {
            for e in t {
                s.push_str(&format!(
                    "{c} {} {} {:+} {}\n",
                    e.crossing,
                    e.strand.letter(),
                    self.crossings[e.crossing].sign,
                    e.position
                ));
            }
        }
        s
    }

    /// Compact Gauss code such as `O0 U1 O2 U0 O1 U2`, one entry per component.
    pub fn gauss_code(&self) -> Vec<String> {
        self.traversals
            .iter()
            .zip(&self.components)
            .map(|(t, c)| {
                let body = t
                    .iter()
                    .map(|e| format!("{}{}", e.strand.letter(), e.crossing))
                    .collect::<Vec<_>>()
                    .join(" ");
                if c.closed {
                    body
                } else {
                    format!("open:{body}")
                }
            })
            .collect()
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let code = self.gauss_code().join(" | ");
        let signs: String = self
            .crossings
            .iter()
            .map(|c| if c.sign > 0 { '+' } else { '-' })
            .collect();
        write!(f, "[{code}] signs {signs}")
    }
}

/// Strand segments between consecutive crossing passages, the carrier for
/// smoothing and state-sum loop counting.
///
/// Events are numbered globally across components. For event `e`, `in_seg[e]`
/// ends at `e` and `out_seg[e]` starts at `e`. A closed component with `m`
/// events has `m` segments (one loop segment if `m = 0`); an open component
/// has `m + 1`, the first starting at the leg and the last ending at the head.
#[derive(Debug, Clone)]
pub(crate) struct Segments {
    pub count: usize,
    pub events: Vec<(usize, Strand)>,
    pub in_seg: Vec<usize>,
    pub out_seg: Vec<usize>,
    pub seg_end: Vec<Option<usize>>,
    pub legs: Vec<usize>,
    pub event_base: Vec<usize>,
}

impl Segments {
    pub fn new(d: &Diagram) -> Self {
        let mut s = Segments {
            count: 0,
            events: Vec::new(),
            in_seg: Vec::new(),
            out_seg: Vec::new(),
            seg_end: Vec::new(),
            legs: Vec::new(),
            event_base: Vec::new(),
        };
        for (comp, t) in d.components.iter().zip(&d.traversals) {
            let m = t.len();
            let e0 = s.events.len();
            let s0 = s.count;
            s.event_base.push(e0);
            for e in t {
                s.events.push((e.crossing, e.strand));
            }
            if comp.closed {
                if m == 0 {
                    s.seg_end.push(None);
                    s.count += 1;
                    continue;
                }
                for k in 0..m {
                    // segment s0+k runs from event k to event k+1 (mod m)
                    s.seg_end.push(Some(e0 + (k + 1) % m));
                }
                for k in 0..m {
                    s.in_seg.push(s0 + (k + m - 1) % m);
                    s.out_seg.push(s0 + k);
                }
                s.count += m;
            } else {
                s.legs.push(s0);
                for k in 0..m {
                    s.seg_end.push(Some(e0 + k));
                }
                s.seg_end.push(None);
                for k in 0..m {
                    s.in_seg.push(s0 + k);
                    s.out_seg.push(s0 + k + 1);
                }
                s.count += m + 1;
            }
        }
        s
    }

    pub fn event_index(&self, component: usize, traversal_index: usize) -> usize {
        self.event_base[component] + traversal_index
    }
}

pub fn crossing_counts(d: &Diagram) -> CrossingCounts {
    let n_plus = d.crossings.iter().filter(|c| c.sign > 0).count();
    CrossingCounts { n_plus, n_minus: d.crossings.len() - n_plus }
}

pub fn writhe(d: &Diagram) -> i64 {
    let c = crossing_counts(d);
    c.n_plus as i64 - c.n_minus as i64
}

/// Whether the chords of two crossings on one component cross in the Gauss
/// diagram, i.e. their four arc positions alternate.
pub fn interleaved(c1: &Crossing, c2: &Crossing, _d: &Diagram) -> bool {
    if c1.id == c2.id {
        return false;
    }
    let (a1, b1) = ordered(c1.over.position, c1.under.position);
    let inside = |p: f64| a1 < p && p < b1;
    inside(c2.over.position) != inside(c2.under.position)
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Builds the diagram of a generic projection using the default tolerance.
pub fn extract_diagram(projected: &ProjectedCurve) -> Result<Diagram> {
    extract_link_diagram(&[projected], DEFAULT_TOL)
}

pub fn extract_diagram_with_tol(projected: &ProjectedCurve, tol: f64) -> Result<Diagram> {
    extract_link_diagram(&[projected], tol)
}

/// Diagram of several curves projected along the same direction. Crossings
/// are numbered in order of first passage along the traversal.
pub fn extract_link_diagram(parts: &[&ProjectedCurve], tol: f64) -> Result<Diagram> {
    let raw = find_crossings(parts, tol)?;

    struct Pass {
        component: usize,
        position: f64,
        raw: usize,
        strand: Strand,
    }
    let mut passes = Vec::with_capacity(raw.len() * 2);
    let mut signs_raw = Vec::with_capacity(raw.len());
    for (k, rc) in raw.iter().enumerate() {
        let (fc, fe) = rc.first;
        let (sc, se) = rc.second;
        let (a0, a1) = parts[fc].edge_points(fe);
        let (b0, b1) = parts[sc].edge_points(se);
        let ta = [a1[0] - a0[0], a1[1] - a0[1]];
        let tb = [b1[0] - b0[0], b1[1] - b0[1]];
        let first_over = rc.depth_gap > 0.0;
        let (t_over, t_under) = if first_over { (ta, tb) } else { (tb, ta) };
        let orient = t_over[0] * t_under[1] - t_over[1] * t_under[0];
        signs_raw.push(if orient > 0.0 { 1i8 } else { -1 });
        let pos = |c: usize, e: usize, t: f64| {
            let arc = &parts[c].arc;
            arc[e] + t * (arc[e + 1] - arc[e])
        };
        let (sf, ss) = if first_over {
            (Strand::Over, Strand::Under)
        } else {
            (Strand::Under, Strand::Over)
        };
        passes.push(Pass { component: fc, position: pos(fc, fe, rc.t_first), raw: k, strand: sf });
        passes.push(Pass { component: sc, position: pos(sc, se, rc.t_second), raw: k, strand: ss });
    }
    passes.sort_by(|a, b| {
        a.component
            .cmp(&b.component)
            .then(a.position.total_cmp(&b.position))
    });

    let mut id_of = vec![usize::MAX; raw.len()];
    let mut next_id = 0;
    for p in &passes {
        if id_of[p.raw] == usize::MAX {
            id_of[p.raw] = next_id;
            next_id += 1;
        }
    }
    let mut signs = vec![0i8; raw.len()];
    for (k, &s) in signs_raw.iter().enumerate() {
        signs[id_of[k]] = s;
    }
    let components: Vec<Component> = parts
        .iter()
        .map(|p| Component { closed: p.closed, length: p.total_length() })
        .collect();
    let mut traversals = vec![Vec::new(); parts.len()];
    for p in passes {
        traversals[p.component].push(Event {
            crossing: id_of[p.raw],
            strand: p.strand,
            position: p.position,
        });
    }
    Diagram::from_traversals(components, traversals, &signs)
}
