//! Orbits as walks through a lazily built successor graph.
//!
//! Every point that is visited is interned once and its image computed once,
//! so orbits that merge (common for collapsing or permuting maps) share work.
//! Eventually periodic orbits are recognized exactly.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::map::PLSelfMap;
use crate::rational::Rational;
use crate::tree::TreePoint;

pub type PointId = u32;

const UNSET: PointId = PointId::MAX;

/// Default bound on the size of orbit coordinates.
pub const PRECISION_BITS: u64 = 256;

/// Steps to enter the cycle and the cycle length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleInfo {
    pub preperiod: usize,
    pub period: usize,
}

pub struct Dynamics<'a> {
    f: &'a PLSelfMap,
    pts: Vec<TreePoint>,
    index: HashMap<TreePoint, PointId>,
    succ: Vec<PointId>,
    cycle: Vec<Option<CycleInfo>>,
    precision_bits: u64,
    overflow: bool,
    pair_pos: HashMap<(PointId, PointId), (u32, u32)>,
    pair_cycles: Vec<PairCycle>,
}

/// A periodic orbit of a point pair: its largest distance and, per position,
/// the number of steps to the next position attaining it.
struct PairCycle {
    max: Rational,
    next_max: Vec<u32>,
}

impl<'a> Dynamics<'a> {
    pub fn new(f: &'a PLSelfMap) -> Self {
        Dynamics { f, pts: Vec::new(), index: HashMap::new(), succ: Vec::new(), cycle: Vec::new(), precision_bits: PRECISION_BITS,
            overflow: false,
            pair_pos: HashMap::new(),
            pair_cycles: Vec::new(),
        }
    }

    /// Orbits whose coordinates outgrow `bits` are cut short and flagged.
    pub fn with_precision_bits(mut self, bits: u64) -> Self {
        self.precision_bits = bits;
        self
    }

    /// Resource error once some orbit exceeded the precision bound. Results
    /// computed after that point are not meaningful.
    pub fn precision_check(&self) -> Result<()> {
        if self.overflow {
            Err(Error::resource("orbit coordinate size in bits", self.precision_bits))
        } else {
            Ok(())
        }
    }

    pub fn map(&self) -> &'a PLSelfMap {
        self.f
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn intern(&mut self, p: &TreePoint) -> PointId {
        if let Some(&id) = self.index.get(p) {
            return id;
        }
        let id = self.pts.len() as PointId;
        self.pts.push(p.clone());
        self.index.insert(p.clone(), id);
        self.succ.push(UNSET);
        self.cycle.push(None);
        id
    }

    pub fn point(&self, id: PointId) -> &TreePoint {
        &self.pts[id as usize]
    }

    pub fn next(&mut self, id: PointId) -> PointId {
        let s = self.succ[id as usize];
        if s != UNSET {
            return s;
        }
        let img = self.f.apply(&self.pts[id as usize]);
        if let TreePoint::Edge { t, .. } = &img {
            if t.bits() > self.precision_bits {
                self.overflow = true;
                self.succ[id as usize] = id;
                return id;
            }
        }
        let s = self.intern(&img);
        self.succ[id as usize] = s;
        s
    }

    /// `f^n` of the point, shortcutting through a known cycle.
    pub fn step(&mut self, id: PointId, n: usize) -> PointId {
        let mut n = n;
        if let Some(c) = self.cycle[id as usize] {
            if n > c.preperiod + c.period {
                n = c.preperiod + (n - c.preperiod) % c.period;
            }
        }
        let mut x = id;
        for _ in 0..n {
            x = self.next(x);
        }
        x
    }

    /// Exact preperiod and period, if the orbit repeats within `limit` steps.
    pub fn cycle_info(&mut self, id: PointId, limit: usize) -> Option<CycleInfo> {
        if let Some(c) = self.cycle[id as usize] {
            return Some(c);
        }
        let mut path: Vec<PointId> = Vec::new();
        let mut pos: HashMap<PointId, usize> = HashMap::new();
        let mut x = id;
        loop {
            if let Some(c) = self.cycle[x as usize] {
                let len = path.len();
                for (i, &p) in path.iter().enumerate() {
                    self.cycle[p as usize] =
                        Some(CycleInfo { preperiod: len - i + c.preperiod, period: c.period });
                }
                break;
            }
            if let Some(&j) = pos.get(&x) {
                let len = path.len();
                let period = len - j;
                for (i, &p) in path.iter().enumerate() {
                    let preperiod = j.saturating_sub(i);
                    self.cycle[p as usize] = Some(CycleInfo { preperiod, period });
                }
                break;
            }
            if path.len() > limit {
                return None;
            }
            pos.insert(x, path.len());
            path.push(x);
            x = self.next(x);
        }
        self.cycle[id as usize]
    }

    /// Distinct points `f^n(x)` for `lo < n <= hi`, in order of first visit.
    pub fn window(&mut self, id: PointId, lo: usize, hi: usize, limit: usize) -> Vec<PointId> {
        if hi <= lo {
            return Vec::new();
        }
        let end = match self.cycle_info(id, limit) {
            // After the preperiod one full turn of the cycle covers everything.
            Some(c) => hi.min((lo + 1).max(c.preperiod) + c.period - 1),
            None => hi,
        };
        let mut out = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut x = self.step(id, lo + 1);
        for n in lo + 1..=end {
            if seen.insert(x) {
                out.push(x);
            }
            if n < end {
                x = self.next(x);
            }
        }
        out
    }

    /// `max_{1 <= n <= horizon} d(f^n x, f^n y)` with the first `n` attaining it.
    pub fn separation(&mut self, x: PointId, y: PointId, horizon: usize) -> (Rational, usize) {
        let tree = self.f.tree();
        let cx = self.cycle_info(x, horizon);
        let cy = self.cycle_info(y, horizon);
        // Beyond both preperiods the pair sequence repeats with the lcm period.
        let stop = match (cx, cy) {
            (Some(a), Some(b)) => {
                let l = num_integer::lcm(a.period, b.period);
                horizon.min(a.preperiod.max(b.preperiod) + l)
            }
            _ => horizon,
        };
        let mut best = (Rational::zero(), 0usize);
        let (mut a, mut b) = (x, y);
        // Walk the transient; a fully covered periodic tail comes from the pair-cycle table.
        let cycle_from = match (cx, cy) {
            (Some(p), Some(q)) => {
                let pre = p.preperiod.max(q.preperiod);
                (pre + num_integer::lcm(p.period, q.period) <= horizon).then_some(pre)
            }
            _ => None,
        };
        let walk = cycle_from.unwrap_or(stop);
        for n in 1..=walk {
            a = self.next(a);
            b = self.next(b);
            if a != b {
                let d = tree.distance(&self.pts[a as usize], &self.pts[b as usize]);
                if d > best.0 {
                    best = (d, n);
                }
            }
        }
        if let Some(pre) = cycle_from {
            if a != b {
                let (ci, pos) = self.pair_cycle(a, b);
                let c = &self.pair_cycles[ci as usize];
                if c.max > best.0 {
                    best = (c.max.clone(), pre + c.next_max[pos as usize] as usize);
                }
            }
        }
        best
    }

    /// Cycle index and position of a pair of periodic points.
    fn pair_cycle(&mut self, a: PointId, b: PointId) -> (u32, u32) {
        if let Some(&v) = self.pair_pos.get(&(a, b)) {
            return v;
        }
        let tree = self.f.tree();
        let ci = self.pair_cycles.len() as u32;
        let mut dists = Vec::new();
        let (mut u, mut v) = (a, b);
        loop {
            self.pair_pos.insert((u, v), (ci, dists.len() as u32));
            dists.push(tree.distance(&self.pts[u as usize], &self.pts[v as usize]));
            u = self.next(u);
            v = self.next(v);
            if (u, v) == (a, b) {
                break;
            }
        }
        let len = dists.len();
        let max = dists.iter().max().cloned().unwrap_or_else(Rational::zero);
        let mut next_max = vec![0u32; len];
        let mut nearest = 0;
        for i in (0..2 * len).rev() {
            if i < len {
                next_max[i] = (nearest - i) as u32;
            }
            if dists[i % len] == max {
                nearest = i;
            }
        }
        self.pair_cycles.push(PairCycle { max, next_max });
        self.pair_pos[&(a, b)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::EdgePlan;
    use crate::tree::MetricTree;
    use std::sync::Arc;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn tent() -> PLSelfMap {
        let t = Arc::new(MetricTree::from_edges(2, vec![(0, 1, r("1"))]).unwrap());
        PLSelfMap::new(
            t,
            vec![TreePoint::Vertex(0), TreePoint::Vertex(0)],
            vec![EdgePlan {
                breaks: vec![r("0"), r("1/2"), r("1")],
                images: vec![TreePoint::Vertex(0), TreePoint::Vertex(1), TreePoint::Vertex(0)],
            }],
        )
        .unwrap()
    }

    #[test]
    fn cycles_match_brute_force() {
        let f = tent();
        let mut dy = Dynamics::new(&f);
        for q in [5i64, 7, 9, 17, 20, 24, 100] {
            for k in 1..q {
                let p = TreePoint::on_edge(f.tree(), 0, Rational::new(k, q));
                let id = dy.intern(&p);
                let c = dy.cycle_info(id, 10_000).unwrap();
                // Brute force: first repeat in the plain orbit.
                let mut seen: Vec<TreePoint> = vec![p.clone()];
                let mut x = p.clone();
                let (pre, per) = loop {
                    x = f.apply(&x);
                    if let Some(j) = seen.iter().position(|s| *s == x) {
                        break (j, seen.len() - j);
                    }
                    seen.push(x.clone());
                };
                assert_eq!((c.preperiod, c.period), (pre, per), "{p}");
                for n in [0usize, 1, 3, 50, 1001] {
                    let got = dy.step(id, n);
                    assert_eq!(*dy.point(got), f.iterate(&p, n));
                }
            }
        }
    }

    #[test]
    fn window_and_separation() {
        let f = tent();
        let mut dy = Dynamics::new(&f);
        let x = dy.intern(&TreePoint::Edge { edge: 0, t: r("2/5") });
        let w = dy.window(x, 10, 20, 100);
        assert_eq!(w.len(), 2);
        let zero = dy.intern(&TreePoint::Vertex(0));
        let y = dy.intern(&TreePoint::Edge { edge: 0, t: r("1/1024") });
        let (d, n) = dy.separation(zero, y, 64);
        assert_eq!((d, n), (r("1"), 10));
        let (d, _) = dy.separation(zero, y, 9);
        assert_eq!(d, r("1/2"));
    }

    #[test]
    fn separation_matches_plain_orbits() {
        let f = tent();
        let mut dy = Dynamics::new(&f);
        let pts: Vec<TreePoint> =
            (0..=20).map(|k| TreePoint::on_edge(f.tree(), 0, Rational::new(k, 20))).chain((1..9).map(|k| TreePoint::on_edge(f.tree(), 0, Rational::new(k, 9)))).collect();
        for p in &pts {
            for q in &pts {
                for h in [1usize, 3, 7, 40] {
                    let (mut a, mut b) = (p.clone(), q.clone());
                    let mut want = (Rational::zero(), 0);
                    for n in 1..=h {
                        a = f.apply(&a);
                        b = f.apply(&b);
                        let d = f.tree().distance(&a, &b);
                        if d > want.0 {
                            want = (d, n);
                        }
                    }
                    let (x, y) = (dy.intern(p), dy.intern(q));
                    assert_eq!(dy.separation(x, y, h), want, "{p} {q} {h}");
                }
            }
        }
    }

    #[test]
    fn precision_cap_is_reported() {
        let t = Arc::new(MetricTree::from_edges(2, vec![(0, 1, r("1"))]).unwrap());
        let half = PLSelfMap::new(
            t,
            vec![TreePoint::Vertex(0), TreePoint::Edge { edge: 0, t: r("1/3") }],
            vec![EdgePlan { breaks: vec![r("0"), r("1")], images: vec![TreePoint::Vertex(0), TreePoint::Edge { edge: 0, t: r("1/3") }] }],
        )
        .unwrap();
        let mut dy = Dynamics::new(&half).with_precision_bits(64);
        let x = dy.intern(&TreePoint::Edge { edge: 0, t: r("1/7") });
        dy.step(x, 30);
        assert!(dy.precision_check().is_ok());
        dy.step(x, 100);
        assert!(dy.precision_check().unwrap_err().is_resource());
    }
}
