//! Neighbourhood queries on finite point sets: close pairs, spheres and nets.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::rational::Rational;
use crate::tree::{MetricTree, TreePoint, VertexId};

/// Vertices within distance `r` of `p`, with their distances.
pub fn near_vertices(tree: &MetricTree, p: &TreePoint, r: &Rational) -> Vec<(VertexId, Rational)> {
    let mut out: Vec<(VertexId, Rational)> = Vec::new();
    let mut stack: Vec<(VertexId, VertexId, Rational)> = Vec::new();
    match p {
        TreePoint::Vertex(v) => stack.push((*v, usize::MAX, Rational::zero())),
        TreePoint::Edge { edge, t } => {
            let e = &tree.edges[*edge];
            let da = t * &e.len;
            let db = &e.len - &da;
            if &da <= r {
                stack.push((e.a, e.b, da));
            }
            if &db <= r {
                stack.push((e.b, e.a, db));
            }
        }
    }
    while let Some((v, from, d)) = stack.pop() {
        for &(e, w) in tree.incident(v) {
            if w == from {
                continue;
            }
            let dw = &d + &tree.edges[e].len;
            if &dw <= r {
                stack.push((w, v, dw));
            }
        }
        out.push((v, d));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Points at distance exactly `r` from `c`, plus end points closer than `r`.
pub fn sphere(tree: &MetricTree, c: &TreePoint, r: &Rational) -> Vec<TreePoint> {
    let mut out: BTreeSet<TreePoint> = BTreeSet::new();
    if let TreePoint::Edge { edge, t } = c {
        let len = &tree.edges[*edge].len;
        let w = r / len;
        for s in [t - &w, t + &w] {
            if s.is_positive() && s < Rational::one() {
                out.insert(TreePoint::Edge { edge: *edge, t: s });
            }
        }
    }
    for (v, d) in near_vertices(tree, c, r) {
        if &d == r || (tree.degree(v) == 1 && &d < r) {
            out.insert(TreePoint::Vertex(v));
        }
        if &d >= r {
            continue;
        }
        let rest = r - &d;
        for &(e, _) in tree.incident(v) {
            let edge = &tree.edges[e];
            if rest >= edge.len {
                continue;
            }
            let f = &rest / &edge.len;
            let t = if edge.a == v { f } else { Rational::one() - f };
            let q = TreePoint::Edge { edge: e, t };
            if &tree.distance(c, &q) == r {
                out.insert(q);
            }
        }
    }
    out.into_iter().collect()
}

/// Sorted per-edge positions of a point list, for range scans.
struct EdgeIndex {
    by_edge: Vec<Vec<(Rational, usize)>>,
    vertex: HashMap<VertexId, usize>,
}

impl EdgeIndex {
    fn new(tree: &MetricTree, pts: &[TreePoint]) -> Self {
        let mut by_edge = vec![Vec::new(); tree.num_edges()];
        let mut vertex = HashMap::new();
        for (i, p) in pts.iter().enumerate() {
            match p {
                TreePoint::Vertex(v) => {
                    vertex.entry(*v).or_insert(i);
                }
                TreePoint::Edge { edge, t } => by_edge[*edge].push((t.clone(), i)),
            }
        }
        for l in &mut by_edge {
            l.sort();
        }
        EdgeIndex { by_edge, vertex }
    }

    /// Indices of points possibly within `r` of `p` (a superset; callers check).
    fn candidates(&self, tree: &MetricTree, p: &TreePoint, r: &Rational, out: &mut Vec<usize>) {
        if let TreePoint::Edge { edge, t } = p {
            let len = &tree.edges[*edge].len;
            let w = r / len;
            let (lo, hi) = (t - &w, t + &w);
            let l = &self.by_edge[*edge];
            let k = l.partition_point(|(s, _)| *s < lo);
            for (s, i) in &l[k..] {
                if *s > hi {
                    break;
                }
                out.push(*i);
            }
        }
        for (v, d) in near_vertices(tree, p, r) {
            if let Some(&i) = self.vertex.get(&v) {
                out.push(i);
            }
            let rest = r - &d;
            for &(e, _) in tree.incident(v) {
                let edge = &tree.edges[e];
                let f = &rest / &edge.len;
                let l = &self.by_edge[e];
                if edge.a == v {
                    for (s, i) in l {
                        if *s > f {
                            break;
                        }
                        out.push(*i);
                    }
                } else {
                    let lo = Rational::one() - f;
                    let k = l.partition_point(|(s, _)| *s < lo);
                    out.extend(l[k..].iter().map(|(_, i)| *i));
                }
            }
        }
    }
}

/// All unordered pairs `(i, j)`, `i < j`, of points at distance at most `r`.
pub fn close_pairs(tree: &MetricTree, pts: &[TreePoint], r: &Rational) -> Vec<(usize, usize, Rational)> {
    let idx = EdgeIndex::new(tree, pts);
    let mut out = Vec::new();
    let mut cand = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        cand.clear();
        idx.candidates(tree, p, r, &mut cand);
        cand.sort_unstable();
        cand.dedup();
        for &j in &cand {
            if j <= i {
                continue;
            }
            let d = tree.distance(p, &pts[j]);
            if &d <= r {
                out.push((i, j, d));
            }
        }
    }
    out
}

/// Greedy net: a point joins as a new representative unless some earlier
/// representative lies within the radius.
pub struct EpsNet {
    radius: Rational,
    reps: Vec<TreePoint>,
    on_edge: Vec<BTreeSet<Rational>>,
    nearest: Vec<Option<Rational>>,
}

impl EpsNet {
    pub fn new(tree: &MetricTree, radius: Rational) -> Self {
        EpsNet {
            radius,
            reps: Vec::new(),
            on_edge: vec![BTreeSet::new(); tree.num_edges()],
            nearest: vec![None; tree.num_vertices()],
        }
    }

    pub fn radius(&self) -> &Rational {
        &self.radius
    }

    pub fn reps(&self) -> &[TreePoint] {
        &self.reps
    }

    pub fn into_reps(self) -> Vec<TreePoint> {
        self.reps
    }

    fn vertex_within(&self, v: VertexId, r: &Rational) -> bool {
        matches!(&self.nearest[v], Some(d) if d <= r)
    }

    /// Whether some representative lies within `r` (which must not exceed the radius).
    pub fn within(&self, tree: &MetricTree, p: &TreePoint, r: &Rational) -> bool {
        debug_assert!(r <= &self.radius);
        match p {
            TreePoint::Vertex(v) => self.vertex_within(*v, r),
            TreePoint::Edge { edge, t } => {
                let e = &tree.edges[*edge];
                let w = r / &e.len;
                if self.on_edge[*edge].range(t - &w..=t + &w).next().is_some() {
                    return true;
                }
                let da = t * &e.len;
                if &da <= r && self.vertex_within(e.a, &(r - &da)) {
                    return true;
                }
                let db = &e.len - &da;
                &db <= r && self.vertex_within(e.b, &(r - &db))
            }
        }
    }

    /// Adds `p` unless it is already covered; returns whether it was added.
    pub fn offer(&mut self, tree: &MetricTree, p: &TreePoint) -> bool {
        let r = self.radius.clone();
        if self.within(tree, p, &r) {
            return false;
        }
        self.insert(tree, p);
        true
    }

    /// Adds `p` as a representative unconditionally.
    pub fn insert(&mut self, tree: &MetricTree, p: &TreePoint) {
        if let TreePoint::Edge { edge, t } = p {
            self.on_edge[*edge].insert(t.clone());
        }
        for (v, d) in near_vertices(tree, p, &self.radius) {
            let slot = &mut self.nearest[v];
            if slot.as_ref().is_none_or(|old| d < *old) {
                *slot = Some(d);
            }
        }
        self.reps.push(p.clone());
    }
}

/// Greedy net of a point sequence, keeping first-visited representatives.
pub fn eps_net<'a>(tree: &MetricTree, pts: impl IntoIterator<Item = &'a TreePoint>, eps: &Rational) -> Vec<TreePoint> {
    let mut net = EpsNet::new(tree, eps.clone());
    for p in pts {
        net.offer(tree, p);
    }
    net.into_reps()
}

/// Deduplicates while keeping first occurrences.
pub fn dedup_points(pts: impl IntoIterator<Item = TreePoint>) -> Vec<TreePoint> {
    let mut seen = HashSet::new();
    pts.into_iter().filter(|p| seen.insert(p.clone())).collect()
}

/// Point pairs on which pairwise quantities are maximized, ordered so that the
/// first maximizer is the lexicographically least pair.
#[derive(Debug, Clone, Default)]
pub struct PairSet {
    pub points: Vec<TreePoint>,
    pub pairs: Vec<(usize, usize, Rational)>,
    index: HashMap<TreePoint, usize>,
    seen: HashSet<(usize, usize)>,
}

impl PairSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// All pairs of `mesh` within `delta`.
    pub fn from_mesh(tree: &MetricTree, mesh: &[TreePoint], delta: &Rational) -> Self {
        let mut ps = PairSet::new();
        let ids: Vec<usize> = mesh.iter().map(|p| ps.intern(p)).collect();
        for (i, j, d) in close_pairs(tree, mesh, delta) {
            ps.push(ids[i], ids[j], d);
        }
        ps.sort();
        ps
    }

    pub fn intern(&mut self, p: &TreePoint) -> usize {
        if let Some(&i) = self.index.get(p) {
            return i;
        }
        self.points.push(p.clone());
        self.index.insert(p.clone(), self.points.len() - 1);
        self.points.len() - 1
    }

    fn push(&mut self, a: usize, b: usize, d: Rational) {
        if a == b {
            return;
        }
        let (a, b) = if self.points[a] <= self.points[b] { (a, b) } else { (b, a) };
        if self.seen.insert((a, b)) {
            self.pairs.push((a, b, d));
        }
    }

    pub fn add_pair(&mut self, tree: &MetricTree, p: &TreePoint, q: &TreePoint) {
        let d = tree.distance(p, q);
        let (a, b) = (self.intern(p), self.intern(q));
        self.push(a, b, d);
    }

    /// Pairs joining each center to its spheres of the given radii.
    pub fn add_spheres(&mut self, tree: &MetricTree, centers: &[TreePoint], radii: &[Rational]) {
        for c in centers {
            let a = self.intern(c);
            for r in radii {
                for q in sphere(tree, c, r) {
                    let d = tree.distance(c, &q);
                    let b = self.intern(&q);
                    self.push(a, b, d);
                }
            }
        }
    }

    pub fn sort(&mut self) {
        let pts = &self.points;
        self.pairs.sort_by(|x, y| (&pts[x.0], &pts[x.1]).cmp(&(&pts[y.0], &pts[y.1])));
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs at distance at most `delta`, in order.
    pub fn within<'s>(&'s self, delta: &'s Rational) -> impl Iterator<Item = (&'s TreePoint, &'s TreePoint, &'s Rational)> {
        self.pairs
            .iter()
            .filter(move |(_, _, d)| d <= delta)
            .map(move |(a, b, d)| (&self.points[*a], &self.points[*b], d))
    }
}

/// Radii `2^-i` and `(60/61)·2^-i`, `0 <= i <= max_exp`, not exceeding `delta`.
///
/// The second family keeps sample points off the dyadic lattice, which maps
/// such as the tent send onto a few short cycles.
pub fn sphere_radii(delta: &Rational, max_exp: u32) -> Vec<Rational> {
    let off = Rational::new(60, 61);
    (0..=max_exp)
        .flat_map(|i| {
            let r = Rational::new(1, 1i64 << i);
            [&r * &off, r]
        })
        .filter(|r| r <= delta)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn ytree() -> MetricTree {
        MetricTree::from_edges(4, vec![(0, 1, r("1")), (0, 2, r("1/2")), (0, 3, r("1/3"))]).unwrap()
    }

    #[test]
    fn sphere_around_center() {
        let t = ytree();
        let s = sphere(&t, &TreePoint::Vertex(0), &r("1/2"));
        assert_eq!(
            s,
            vec![TreePoint::Vertex(2), TreePoint::Vertex(3), TreePoint::Edge { edge: 0, t: r("1/2") }]
        );
        let s = sphere(&t, &TreePoint::Edge { edge: 0, t: r("1/4") }, &r("1/2"));
        assert_eq!(
            s,
            vec![
                TreePoint::Edge { edge: 0, t: r("3/4") },
                TreePoint::Edge { edge: 1, t: r("1/2") },
                TreePoint::Edge { edge: 2, t: r("3/4") },
            ]
        );
    }

    fn arb_points() -> impl Strategy<Value = Vec<TreePoint>> {
        prop::collection::vec((0usize..3, 0i64..=24), 1..40).prop_map(|v| {
            let t = ytree();
            v.into_iter().map(|(e, k)| TreePoint::on_edge(&t, e, Rational::new(k, 24))).collect()
        })
    }

    proptest! {
        #[test]
        fn close_pairs_match_brute_force(pts in arb_points(), k in 1i64..20) {
            let t = ytree();
            let pts = dedup_points(pts);
            let rad = Rational::new(k, 24);
            let mut got: Vec<(usize, usize)> = close_pairs(&t, &pts, &rad).into_iter().map(|(i, j, _)| (i, j)).collect();
            got.sort();
            let mut want = Vec::new();
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    if t.distance(&pts[i], &pts[j]) <= rad {
                        want.push((i, j));
                    }
                }
            }
            prop_assert_eq!(got, want);
        }

        #[test]
        fn net_covers_and_separates(pts in arb_points(), k in 1i64..20) {
            let t = ytree();
            let rad = Rational::new(k, 48);
            let reps = eps_net(&t, &pts, &rad);
            for p in &pts {
                prop_assert!(reps.iter().any(|q| t.distance(p, q) <= rad));
            }
            for i in 0..reps.len() {
                for j in 0..i {
                    prop_assert!(t.distance(&reps[i], &reps[j]) > rad);
                }
            }
            // Greedy order: the first point always leads.
            prop_assert_eq!(&reps[0], &pts[0]);
        }

        #[test]
        fn sphere_points_are_exact(c in arb_points(), k in 1i64..30) {
            let t = ytree();
            let rad = Rational::new(k, 24);
            for q in sphere(&t, &c[0], &rad) {
                let d = t.distance(&c[0], &q);
                prop_assert!(d == rad || (d < rad && q.as_vertex().is_some_and(|v| t.degree(v) == 1)));
            }
        }
    }
}
