//! Closed subsets of a tree that are finite unions of segments and points.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::rational::Rational;
use crate::tree::{EdgeId, Leg, MetricTree, TreePoint, VertexId};

/// A closed finite union of edge segments and points.
///
/// Canonical form: per-edge intervals `[lo, hi] ⊆ [0, 1]` sorted and merged
/// (touching intervals merge), an interval reaching `0` or `1` marks the
/// corresponding endpoint vertex as a member, and single-point intervals at
/// `0` or `1` are stored only as vertex membership.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Region {
    verts: Vec<bool>,
    ivs: Vec<Vec<(Rational, Rational)>>,
}

/// A maximal piece of a region, for display and reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Piece {
    Point(TreePoint),
    Segment { edge: EdgeId, lo: Rational, hi: Rational },
}

/// A connected component of the complement of a region. The component is
/// the closure minus the boundary points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenComponent {
    pub closure: Region,
    pub boundary: Vec<TreePoint>,
}

/// Distance to a fixed nonempty region, answered per point.
#[derive(Debug, Clone)]
pub struct DistanceField {
    region: Region,
    dv: Vec<Rational>,
}

impl DistanceField {
    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn at(&self, tree: &MetricTree, p: &TreePoint) -> Rational {
        match p {
            TreePoint::Vertex(v) => self.dv[*v].clone(),
            TreePoint::Edge { edge, t } => self.region.edge_distance(tree, &self.dv, *edge, t),
        }
    }
}

pub type Subtree = Region;
pub type FixedSet = Region;

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn merge(mut v: Vec<(Rational, Rational)>) -> Vec<(Rational, Rational)> {
    v.sort();
    let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(v.len());
    for (lo, hi) in v {
        if let Some(last) = out.last_mut() {
            if lo <= last.1 {
                if hi > last.1 {
                    last.1 = hi;
                }
                continue;
            }
        }
        out.push((lo, hi));
    }
    out
}

impl Region {
    pub fn empty(tree: &MetricTree) -> Self {
        Region { verts: vec![false; tree.num_vertices()], ivs: vec![Vec::new(); tree.num_edges()] }
    }

    pub fn whole(tree: &MetricTree) -> Self {
        Region {
            verts: vec![true; tree.num_vertices()],
            ivs: vec![vec![(Rational::zero(), Rational::one())]; tree.num_edges()],
        }
    }

    pub fn point(tree: &MetricTree, p: &TreePoint) -> Self {
        let mut r = Region::empty(tree);
        r.add_point(tree, p);
        r
    }

    pub fn from_points<'a>(tree: &MetricTree, pts: impl IntoIterator<Item = &'a TreePoint>) -> Self {
        let mut r = Region::empty(tree);
        for p in pts {
            r.add_point(tree, p);
        }
        r
    }

    fn canonicalize_edge(&mut self, tree: &MetricTree, e: EdgeId) {
        let v = std::mem::take(&mut self.ivs[e]);
        let mut merged = merge(v);
        let edge = &tree.edges[e];
        if merged.first().is_some_and(|iv| iv.0.is_zero()) {
            self.verts[edge.a] = true;
        }
        if merged.last().is_some_and(|iv| iv.1 == Rational::one()) {
            self.verts[edge.b] = true;
        }
        merged.retain(|(lo, hi)| !(lo == hi && (lo.is_zero() || *lo == Rational::one())));
        self.ivs[e] = merged;
    }

    pub fn add_vertex(&mut self, v: VertexId) {
        self.verts[v] = true;
    }

    pub fn add_point(&mut self, tree: &MetricTree, p: &TreePoint) {
        match p {
            TreePoint::Vertex(v) => self.verts[*v] = true,
            TreePoint::Edge { edge, t } => self.add_interval(tree, *edge, t.clone(), t.clone()),
        }
    }

    /// Adds `[lo, hi]` of edge `e` (the two bounds may be given in either order).
    pub fn add_interval(&mut self, tree: &MetricTree, e: EdgeId, lo: Rational, hi: Rational) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let edge = &tree.edges[e];
        if hi.is_zero() {
            self.verts[edge.a] = true;
            return;
        }
        if lo == Rational::one() {
            self.verts[edge.b] = true;
            return;
        }
        if lo.is_zero() {
            self.verts[edge.a] = true;
        }
        if hi == Rational::one() {
            self.verts[edge.b] = true;
        }
        let ivs = &mut self.ivs[e];
        let i = ivs.partition_point(|iv| iv.1 < lo);
        let j = ivs.partition_point(|iv| iv.0 <= hi);
        if i == j {
            ivs.insert(i, (lo, hi));
        } else {
            let nlo = lo.min(ivs[i].0.clone());
            let nhi = hi.max(ivs[j - 1].1.clone());
            ivs.splice(i..j, std::iter::once((nlo, nhi)));
        }
    }

    pub fn add_leg(&mut self, tree: &MetricTree, leg: &Leg) {
        self.add_interval(tree, leg.edge, leg.t0.clone(), leg.t1.clone());
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.verts[v]
    }

    pub fn intervals(&self, e: EdgeId) -> &[(Rational, Rational)] {
        &self.ivs[e]
    }

    pub fn is_empty(&self) -> bool {
        !self.verts.iter().any(|&b| b) && self.ivs.iter().all(|v| v.is_empty())
    }

    pub fn contains(&self, p: &TreePoint) -> bool {
        match p {
            TreePoint::Vertex(v) => self.verts[*v],
            TreePoint::Edge { edge, t } => {
                let ivs = &self.ivs[*edge];
                let i = ivs.partition_point(|(lo, _)| lo <= t);
                i > 0 && ivs[i - 1].1 >= *t
            }
        }
    }

    pub fn union(&self, tree: &MetricTree, other: &Region) -> Region {
        let mut out = self.clone();
        for (v, &b) in other.verts.iter().enumerate() {
            out.verts[v] |= b;
        }
        for e in 0..out.ivs.len() {
            if !other.ivs[e].is_empty() {
                out.ivs[e].extend(other.ivs[e].iter().cloned());
                out.canonicalize_edge(tree, e);
            }
        }
        out
    }

    pub fn intersection(&self, tree: &MetricTree, other: &Region) -> Region {
        let mut out = Region::empty(tree);
        for v in 0..self.verts.len() {
            out.verts[v] = self.verts[v] && other.verts[v];
        }
        for e in 0..self.ivs.len() {
            let (a, b) = (&self.ivs[e], &other.ivs[e]);
            let (mut i, mut j) = (0, 0);
            while i < a.len() && j < b.len() {
                let lo = a[i].0.clone().max(b[j].0.clone());
                let hi = a[i].1.clone().min(b[j].1.clone());
                if lo <= hi {
                    out.ivs[e].push((lo, hi));
                }
                if a[i].1 < b[j].1 {
                    i += 1;
                } else {
                    j += 1;
                }
            }
            out.canonicalize_edge(tree, e);
        }
        out
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        if self.verts.iter().zip(&other.verts).any(|(&a, &b)| a && !b) {
            return false;
        }
        self.ivs.iter().zip(&other.ivs).all(|(a, b)| {
            a.iter().all(|(lo, hi)| {
                let k = b.partition_point(|(blo, _)| blo <= lo);
                k > 0 && b[k - 1].1 >= *hi
            })
        })
    }

    /// Total length of the segment part.
    pub fn length(&self, tree: &MetricTree) -> Rational {
        let mut acc = Rational::zero();
        for (e, ivs) in self.ivs.iter().enumerate() {
            for (lo, hi) in ivs {
                acc = &acc + &((hi - lo) * &tree.edges[e].len);
            }
        }
        acc
    }

    /// Isolated vertices, edge segments and isolated edge points, in
    /// canonical order: vertices that touch no segment first, then edges by id.
    pub fn pieces(&self, tree: &MetricTree) -> Vec<Piece> {
        let mut touched = vec![false; self.verts.len()];
        for (e, ivs) in self.ivs.iter().enumerate() {
            let edge = &tree.edges[e];
            if ivs.first().is_some_and(|iv| iv.0.is_zero()) {
                touched[edge.a] = true;
            }
            if ivs.last().is_some_and(|iv| iv.1 == Rational::one()) {
                touched[edge.b] = true;
            }
        }
        let mut out = Vec::new();
        for (v, &b) in self.verts.iter().enumerate() {
            if b && !touched[v] {
                out.push(Piece::Point(TreePoint::Vertex(v)));
            }
        }
        for (e, ivs) in self.ivs.iter().enumerate() {
            for (lo, hi) in ivs {
                if lo == hi {
                    out.push(Piece::Point(TreePoint::Edge { edge: e, t: lo.clone() }));
                } else {
                    out.push(Piece::Segment { edge: e, lo: lo.clone(), hi: hi.clone() });
                }
            }
        }
        out
    }

    /// If the region is a single point, that point.
    pub fn as_single_point(&self, tree: &MetricTree) -> Option<TreePoint> {
        match self.pieces(tree).as_slice() {
            [Piece::Point(p)] => Some(p.clone()),
            _ => None,
        }
    }

    /// Connected components, each as its own region, ordered by first atom.
    pub fn components(&self, tree: &MetricTree) -> Vec<Region> {
        let nv = self.verts.len();
        let mut atoms: Vec<(EdgeId, usize)> = Vec::new();
        for (e, ivs) in self.ivs.iter().enumerate() {
            for i in 0..ivs.len() {
                atoms.push((e, i));
            }
        }
        let mut dsu = Dsu::new(nv + atoms.len());
        for (k, &(e, i)) in atoms.iter().enumerate() {
            let (lo, hi) = &self.ivs[e][i];
            let edge = &tree.edges[e];
            if lo.is_zero() {
                dsu.union(nv + k, edge.a);
            }
            if *hi == Rational::one() {
                dsu.union(nv + k, edge.b);
            }
        }
        let mut order: Vec<usize> = Vec::new();
        let mut comps: std::collections::HashMap<usize, Region> = std::collections::HashMap::new();
        for v in 0..nv {
            if self.verts[v] {
                let root = dsu.find(v);
                let entry = comps.entry(root).or_insert_with(|| {
                    order.push(root);
                    Region::empty(tree)
                });
                entry.verts[v] = true;
            }
        }
        for (k, &(e, i)) in atoms.iter().enumerate() {
            let root = dsu.find(nv + k);
            let entry = comps.entry(root).or_insert_with(|| {
                order.push(root);
                Region::empty(tree)
            });
            let (lo, hi) = self.ivs[e][i].clone();
            entry.ivs[e].push((lo, hi));
        }
        order
            .into_iter()
            .map(|root| {
                let mut r = comps.remove(&root).unwrap();
                for e in 0..r.ivs.len() {
                    if !r.ivs[e].is_empty() {
                        r.canonicalize_edge(tree, e);
                    }
                }
                r
            })
            .collect()
    }

    /// `true` for the empty set and for any single component.
    pub fn is_connected(&self, tree: &MetricTree) -> bool {
        self.components(tree).len() <= 1
    }

    /// Components of `tree ∖ self`.
    pub fn complement_components(&self, tree: &MetricTree) -> Vec<OpenComponent> {
        let nv = self.verts.len();
        let one = Rational::one();
        // gaps: (edge, lo, hi); open except where an endpoint vertex is outside the region
        let mut gaps: Vec<(EdgeId, Rational, Rational)> = Vec::new();
        for (e, ivs) in self.ivs.iter().enumerate() {
            let mut cursor = Rational::zero();
            for (lo, hi) in ivs {
                if *lo > cursor {
                    gaps.push((e, cursor.clone(), lo.clone()));
                }
                cursor = hi.clone();
            }
            if cursor < one {
                gaps.push((e, cursor, one.clone()));
            }
        }
        let mut dsu = Dsu::new(nv + gaps.len());
        for (k, (e, lo, hi)) in gaps.iter().enumerate() {
            let edge = &tree.edges[*e];
            if lo.is_zero() && !self.verts[edge.a] {
                dsu.union(nv + k, edge.a);
            }
            if *hi == one && !self.verts[edge.b] {
                dsu.union(nv + k, edge.b);
            }
        }
        let mut order = Vec::new();
        let mut comps: std::collections::HashMap<usize, OpenComponent> = std::collections::HashMap::new();
        let mut entry = |root: usize, order: &mut Vec<usize>| -> usize {
            comps.entry(root).or_insert_with(|| {
                order.push(root);
                OpenComponent { closure: Region::empty(tree), boundary: Vec::new() }
            });
            root
        };
        for v in 0..nv {
            if !self.verts[v] {
                let root = dsu.find(v);
                entry(root, &mut order);
            }
        }
        for k in 0..gaps.len() {
            let root = dsu.find(nv + k);
            entry(root, &mut order);
        }
        for v in 0..nv {
            if !self.verts[v] {
                let root = dsu.find(v);
                comps.get_mut(&root).unwrap().closure.verts[v] = true;
            }
        }
        for (k, (e, lo, hi)) in gaps.iter().enumerate() {
            let root = dsu.find(nv + k);
            let c = comps.get_mut(&root).unwrap();
            c.closure.ivs[*e].push((lo.clone(), hi.clone()));
            for t in [lo, hi] {
                let p = TreePoint::on_edge(tree, *e, t.clone());
                if self.contains(&p) && !c.boundary.contains(&p) {
                    c.boundary.push(p);
                }
            }
        }
        order
            .into_iter()
            .map(|root| {
                let mut c = comps.remove(&root).unwrap();
                for e in 0..c.closure.ivs.len() {
                    if !c.closure.ivs[e].is_empty() {
                        c.closure.canonicalize_edge(tree, e);
                    }
                }
                c.boundary.sort();
                c
            })
            .collect()
    }

    /// Distance from every vertex to the region, or `None` when it is empty.
    fn vertex_distances(&self, tree: &MetricTree) -> Option<Vec<Rational>> {
        if self.is_empty() {
            return None;
        }
        let nv = self.verts.len();
        let mut best: Vec<Option<Rational>> = vec![None; nv];
        let offer = |best: &mut Vec<Option<Rational>>, v: usize, d: Rational| {
            if best[v].as_ref().is_none_or(|b| d < *b) {
                best[v] = Some(d);
            }
        };
        for v in 0..nv {
            if self.verts[v] {
                offer(&mut best, v, Rational::zero());
            }
        }
        for (e, ivs) in self.ivs.iter().enumerate() {
            let edge = &tree.edges[e];
            if let Some((lo, _)) = ivs.first() {
                offer(&mut best, edge.a, lo * &edge.len);
            }
            if let Some((_, hi)) = ivs.last() {
                offer(&mut best, edge.b, &(Rational::one() - hi) * &edge.len);
            }
        }
        let mut heap: BinaryHeap<Reverse<(Rational, usize)>> = BinaryHeap::new();
        for (v, d) in best.iter().enumerate() {
            if let Some(d) = d {
                heap.push(Reverse((d.clone(), v)));
            }
        }
        let mut done = vec![false; nv];
        while let Some(Reverse((d, v))) = heap.pop() {
            if done[v] {
                continue;
            }
            done[v] = true;
            for &(e, w) in tree.incident(v) {
                let nd = &d + &tree.edges[e].len;
                if best[w].as_ref().is_none_or(|b| nd < *b) {
                    best[w] = Some(nd.clone());
                    heap.push(Reverse((nd, w)));
                }
            }
        }
        Some(best.into_iter().map(Option::unwrap).collect())
    }

    /// Distance to the region along edge `e` at fraction `t`, given vertex distances.
    fn edge_distance(&self, tree: &MetricTree, dv: &[Rational], e: EdgeId, t: &Rational) -> Rational {
        let edge = &tree.edges[e];
        let mut best = &(t * &edge.len) + &dv[edge.a];
        let via_b = &(&(Rational::one() - t) * &edge.len) + &dv[edge.b];
        best = best.min(via_b);
        let ivs = &self.ivs[e];
        let k = ivs.partition_point(|(lo, _)| lo <= t);
        if k > 0 {
            let hi = &ivs[k - 1].1;
            if t <= hi {
                return Rational::zero();
            }
            best = best.min((t - hi) * &edge.len);
        }
        if k < ivs.len() {
            best = best.min((&ivs[k].0 - t) * &edge.len);
        }
        best
    }

    /// Precomputed distances for repeated queries against this region.
    pub fn distance_field(&self, tree: &MetricTree) -> Option<DistanceField> {
        let dv = self.vertex_distances(tree)?;
        Some(DistanceField { region: self.clone(), dv })
    }

    pub fn distance_to_point(&self, tree: &MetricTree, p: &TreePoint) -> Option<Rational> {
        let dv = self.vertex_distances(tree)?;
        Some(match p {
            TreePoint::Vertex(v) => dv[*v].clone(),
            TreePoint::Edge { edge, t } => self.edge_distance(tree, &dv, *edge, t),
        })
    }

    /// `sup_{a ∈ self} d(a, other)`, exact. `None` if either side is empty.
    pub fn directed_hausdorff(&self, tree: &MetricTree, other: &Region) -> Option<Rational> {
        if self.is_empty() {
            return None;
        }
        let dv = other.vertex_distances(tree)?;
        let mut worst = Rational::zero();
        for (v, &b) in self.verts.iter().enumerate() {
            if b && dv[v] > worst {
                worst = dv[v].clone();
            }
        }
        for (e, ivs) in self.ivs.iter().enumerate() {
            if ivs.is_empty() {
                continue;
            }
            let edge = &tree.edges[e];
            // The distance along the edge is the minimum of rising lines
            // L·t + c and falling lines −L·t + c; its maxima sit at interval
            // ends or at crossings of a rising and a falling line.
            let mut rising = vec![dv[edge.a].clone()];
            let mut falling = vec![&edge.len + &dv[edge.b]];
            for (lo, hi) in &other.ivs[e] {
                rising.push(-(hi * &edge.len));
                falling.push(lo * &edge.len);
            }
            let two_len = &edge.len + &edge.len;
            for (lo, hi) in ivs {
                let mut cands = vec![lo.clone(), hi.clone()];
                for c1 in &rising {
                    for c2 in &falling {
                        let t = &(c2 - c1) / &two_len;
                        if t > *lo && t < *hi {
                            cands.push(t);
                        }
                    }
                }
                for t in cands {
                    let d = other.edge_distance(tree, &dv, e, &t);
                    if d > worst {
                        worst = d;
                    }
                }
            }
        }
        Some(worst)
    }

    pub fn hausdorff(&self, tree: &MetricTree, other: &Region) -> Option<Rational> {
        let a = self.directed_hausdorff(tree, other)?;
        let b = other.directed_hausdorff(tree, self)?;
        Some(a.max(b))
    }

    /// Points of the region spaced at most `spacing` apart along each segment,
    /// vertices first.
    pub fn sample(&self, tree: &MetricTree, spacing: &Rational) -> Vec<TreePoint> {
        let mut out: Vec<TreePoint> =
            (0..self.verts.len()).filter(|&v| self.verts[v]).map(TreePoint::Vertex).collect();
        for (e, ivs) in self.ivs.iter().enumerate() {
            let len = &tree.edges[e].len;
            for (lo, hi) in ivs {
                let span = (hi - lo) * len;
                let count = (&span / spacing).ceil_int();
                let count = i64::try_from(count).unwrap_or(i64::MAX).max(1);
                for j in 0..=count {
                    let t = lo + &((hi - lo) * Rational::new(j, count));
                    if t.is_zero() || t == Rational::one() {
                        continue;
                    }
                    out.push(TreePoint::Edge { edge: e, t });
                    if lo == hi {
                        break;
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn y_tree() -> MetricTree {
        MetricTree::from_edges(4, vec![(0, 1, r("1")), (0, 2, r("1")), (0, 3, r("1"))]).unwrap()
    }

    fn seg(tree: &MetricTree, e: usize, lo: &str, hi: &str) -> Region {
        let mut reg = Region::empty(tree);
        reg.add_interval(tree, e, r(lo), r(hi));
        reg
    }

    /// Brute-force Hausdorff over a fine sample of both regions.
    fn sampled_hausdorff(tree: &MetricTree, a: &Region, b: &Region, spacing: &str) -> Rational {
        let sa = a.sample(tree, &r(spacing));
        let sb = b.sample(tree, &r(spacing));
        let directed = |x: &[TreePoint], y: &[TreePoint]| {
            x.iter()
                .map(|p| y.iter().map(|q| tree.distance(p, q)).min().unwrap())
                .max()
                .unwrap()
        };
        directed(&sa, &sb).max(directed(&sb, &sa))
    }

    #[test]
    fn canonical_form() {
        let y = y_tree();
        let mut a = seg(&y, 0, "0", "1/2");
        a.add_interval(&y, 0, r("1/2"), r("1"));
        assert_eq!(a, seg(&y, 0, "0", "1"));
        assert!(a.has_vertex(0) && a.has_vertex(1));
        let p = Region::point(&y, &TreePoint::Vertex(0));
        assert_eq!(seg(&y, 1, "0", "0"), p);
        assert_eq!(p.as_single_point(&y), Some(TreePoint::Vertex(0)));
    }

    #[test]
    fn components_and_connectivity() {
        let y = y_tree();
        let mut a = seg(&y, 0, "0", "1/2");
        a = a.union(&y, &seg(&y, 1, "0", "1/4"));
        assert!(a.is_connected(&y));
        a = a.union(&y, &seg(&y, 2, "1/2", "3/4"));
        assert_eq!(a.components(&y).len(), 2);
        a.add_point(&y, &TreePoint::Vertex(3));
        assert_eq!(a.components(&y).len(), 3);
        a.add_interval(&y, 2, r("3/4"), r("1"));
        assert_eq!(a.components(&y).len(), 2);
    }

    #[test]
    fn complement() {
        let y = y_tree();
        assert!(Region::whole(&y).complement_components(&y).is_empty());
        let hub = Region::point(&y, &TreePoint::Vertex(0));
        let comps = hub.complement_components(&y);
        assert_eq!(comps.len(), 3);
        for c in &comps {
            assert_eq!(c.boundary, vec![TreePoint::Vertex(0)]);
        }
        let mut mid = seg(&y, 0, "1/4", "1/2");
        mid.add_point(&y, &TreePoint::Edge { edge: 1, t: r("1/2") });
        let comps = mid.complement_components(&y);
        assert_eq!(comps.len(), 3);
    }

    #[test]
    fn set_algebra() {
        let y = y_tree();
        let a = seg(&y, 0, "0", "1/2");
        let b = seg(&y, 0, "1/2", "1");
        let i = a.intersection(&y, &b);
        assert_eq!(i.as_single_point(&y), Some(TreePoint::Edge { edge: 0, t: r("1/2") }));
        assert!(i.is_subset(&a) && i.is_subset(&b));
        assert!(!a.is_subset(&b));
        assert!(a.contains(&TreePoint::Vertex(0)));
        assert!(!b.contains(&TreePoint::Vertex(0)));
        let hub = seg(&y, 1, "0", "0");
        assert_eq!(a.intersection(&y, &hub), hub);
    }

    #[test]
    fn hausdorff_examples() {
        let t = MetricTree::from_edges(2, vec![(0, 1, r("1"))]).unwrap();
        let a = Region::point(&t, &TreePoint::Vertex(0));
        let b = Region::point(&t, &TreePoint::Vertex(1));
        assert_eq!(a.hausdorff(&t, &b), Some(r("1")));
        let whole = Region::whole(&t);
        assert_eq!(a.hausdorff(&t, &whole), Some(r("1")));
        let both = a.union(&t, &b);
        assert_eq!(both.hausdorff(&t, &whole), Some(r("1/2")));
        assert_eq!(Region::empty(&t).hausdorff(&t, &whole), None);
    }

    #[test]
    fn hausdorff_matches_sampling_oracle() {
        let y = y_tree();
        let a = seg(&y, 0, "1/8", "3/8").union(&y, &seg(&y, 2, "1/2", "1"));
        let b = seg(&y, 1, "0", "1/4").union(&y, &Region::point(&y, &TreePoint::Edge { edge: 0, t: r("7/8") }));
        let exact = a.hausdorff(&y, &b).unwrap();
        // Sampling at spacing 1/64 hits every optimum here since all data is dyadic.
        assert_eq!(exact, sampled_hausdorff(&y, &a, &b, "1/64"));
    }

    proptest::proptest! {
        #[test]
        fn hausdorff_is_metric_and_matches_oracle(
            pieces in proptest::collection::vec((0usize..3, 0i64..=16, 0i64..=16), 1..4),
            others in proptest::collection::vec((0usize..3, 0i64..=16, 0i64..=16), 1..4),
        ) {
            let y = y_tree();
            let build = |ps: &[(usize, i64, i64)]| {
                let mut reg = Region::empty(&y);
                for &(e, a, b) in ps {
                    reg.add_interval(&y, e, Rational::new(a, 16), Rational::new(b, 16));
                }
                reg
            };
            let a = build(&pieces);
            let b = build(&others);
            let hab = a.hausdorff(&y, &b).unwrap();
            proptest::prop_assert_eq!(hab.clone(), b.hausdorff(&y, &a).unwrap());
            proptest::prop_assert_eq!(a.hausdorff(&y, &a).unwrap(), Rational::zero());
            proptest::prop_assert_eq!(hab.is_zero(), a == b);
            // Breakpoints of the distance function lie on the 1/32 lattice.
            proptest::prop_assert_eq!(hab, sampled_hausdorff(&y, &a, &b, "1/32"));
        }

        #[test]
        fn incremental_insert_matches_batch_merge(
            ivs in proptest::collection::vec((0usize..3, 0i64..=12, 0i64..=12), 0..20),
        ) {
            let y = y_tree();
            let mut inc = Region::empty(&y);
            let mut batch = Region::empty(&y);
            for (e, a, b) in &ivs {
                let (lo, hi) = (Rational::new(*a, 12), Rational::new(*b, 12));
                inc.add_interval(&y, *e, lo.clone(), hi.clone());
                let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
                batch.ivs[*e].push((lo, hi));
            }
            for e in 0..3 {
                batch.canonicalize_edge(&y, e);
            }
            proptest::prop_assert_eq!(inc, batch);
        }
    }
}
