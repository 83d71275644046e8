//! Finite metric trees with exact rational edge lengths.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::region::Region;

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
    pub len: Rational,
}

/// A location on a tree. Edge endpoints are always stored as vertices, so
/// structural equality is point equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreePoint {
    Vertex(VertexId),
    Edge { edge: EdgeId, t: Rational },
}

impl TreePoint {
    /// Canonical point at fraction `t` of `edge`; `t` must lie in `[0, 1]`.
    pub fn on_edge(tree: &MetricTree, edge: EdgeId, t: Rational) -> TreePoint {
        if t.is_zero() {
            TreePoint::Vertex(tree.edges[edge].a)
        } else if t == Rational::one() {
            TreePoint::Vertex(tree.edges[edge].b)
        } else {
            TreePoint::Edge { edge, t }
        }
    }

    pub fn as_vertex(&self) -> Option<VertexId> {
        match self {
            TreePoint::Vertex(v) => Some(*v),
            _ => None,
        }
    }
}

impl fmt::Display for TreePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreePoint::Vertex(v) => write!(f, "v{v}"),
            TreePoint::Edge { edge, t } => write!(f, "{edge}:{t}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    EndPoint,
    CutPoint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub kind: PointKind,
    pub degree: usize,
}

/// One straight traversal of part of an edge, from fraction `t0` to `t1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leg {
    pub edge: EdgeId,
    pub t0: Rational,
    pub t1: Rational,
}

impl Leg {
    pub fn length(&self, tree: &MetricTree) -> Rational {
        (&self.t1 - &self.t0).abs() * &tree.edges[self.edge].len
    }

    pub fn reversed(&self) -> Leg {
        Leg { edge: self.edge, t0: self.t1.clone(), t1: self.t0.clone() }
    }

    pub fn forward(&self) -> bool {
        self.t1 > self.t0
    }
}

/// A geodesic as a sequence of legs with cumulative arc length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub start: TreePoint,
    pub end: TreePoint,
    pub legs: Vec<Leg>,
    /// `offsets[i]` is the arc length at which leg `i` begins.
    pub offsets: Vec<Rational>,
    pub length: Rational,
}

impl Route {
    /// Point at arc length `s` (clamped to `[0, length]`) from the start.
    pub fn point_at(&self, tree: &MetricTree, s: &Rational) -> TreePoint {
        if !s.is_positive() || self.legs.is_empty() {
            return self.start.clone();
        }
        if *s >= self.length {
            return self.end.clone();
        }
        let i = match self.offsets.binary_search(s) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let leg = &self.legs[i];
        let frac = (s - &self.offsets[i]) / &tree.edges[leg.edge].len;
        let t = if leg.forward() { &leg.t0 + &frac } else { &leg.t0 - &frac };
        TreePoint::on_edge(tree, leg.edge, t)
    }

    pub fn reversed(&self) -> Route {
        let legs: Vec<Leg> = self.legs.iter().rev().map(Leg::reversed).collect();
        let mut offsets = Vec::with_capacity(legs.len());
        for i in (0..self.legs.len()).rev() {
            let end = self.offsets.get(i + 1).unwrap_or(&self.length);
            offsets.push(&self.length - end);
        }
        Route { start: self.end.clone(), end: self.start.clone(), legs, offsets, length: self.length.clone() }
    }
}

/// The unique arc between two points, as waypoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub waypoints: Vec<TreePoint>,
    pub length: Rational,
}

#[derive(Debug, Clone)]
pub struct MetricTree {
    pub labels: Vec<String>,
    pub edges: Vec<Edge>,
    adj: Vec<Vec<(EdgeId, VertexId)>>,
    parent: Vec<Option<(VertexId, EdgeId)>>,
    depth: Vec<usize>,
    root_dist: Vec<Rational>,
}

impl PartialEq for MetricTree {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.edges == other.edges
    }
}

impl Eq for MetricTree {}

impl MetricTree {
    /// Builds a tree from vertex labels and `(a, b, length)` edges.
    pub fn new(labels: Vec<String>, edges: Vec<(VertexId, VertexId, Rational)>) -> Result<Self> {
        let n = labels.len();
        if n < 2 {
            return Err(Error::InvalidTree("a tree needs at least two vertices".into()));
        }
        if edges.len() != n - 1 {
            return Err(Error::InvalidTree(format!(
                "{} vertices need exactly {} edges, found {}",
                n,
                n - 1,
                edges.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for (i, l) in labels.iter().enumerate() {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidTree(format!("duplicate vertex label `{l}` at index {i}")));
            }
        }
        let mut adj = vec![Vec::new(); n];
        let mut out = Vec::with_capacity(edges.len());
        let mut pairs = std::collections::HashSet::new();
        for (i, (a, b, len)) in edges.into_iter().enumerate() {
            if a >= n || b >= n {
                return Err(Error::InvalidTree(format!("edge {i} references an unknown vertex")));
            }
            if a == b {
                return Err(Error::InvalidTree(format!("edge {i} is a loop at `{}`", labels[a])));
            }
            if !len.is_positive() {
                return Err(Error::InvalidTree(format!("edge {i}: edge length must be positive")));
            }
            if !pairs.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidTree(format!(
                    "duplicate edge between `{}` and `{}`",
                    labels[a], labels[b]
                )));
            }
            adj[a].push((i, b));
            adj[b].push((i, a));
            out.push(Edge { a, b, len });
        }
        let mut parent = vec![None; n];
        let mut depth = vec![usize::MAX; n];
        let mut root_dist = vec![Rational::zero(); n];
        depth[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for &(e, w) in &adj[u] {
                if depth[w] == usize::MAX {
                    depth[w] = depth[u] + 1;
                    parent[w] = Some((u, e));
                    root_dist[w] = &root_dist[u] + &out[e].len;
                    queue.push_back(w);
                }
            }
        }
        if let Some(v) = depth.iter().position(|&d| d == usize::MAX) {
            return Err(Error::InvalidTree(format!(
                "tree is disconnected: `{}` is unreachable",
                labels[v]
            )));
        }
        Ok(MetricTree { labels, edges: out, adj, parent, depth, root_dist })
    }

    /// Convenience constructor with labels `v0, v1, ...`.
    pub fn from_edges(n: usize, edges: Vec<(VertexId, VertexId, Rational)>) -> Result<Self> {
        Self::new((0..n).map(|i| format!("v{i}")).collect(), edges)
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_by_label(&self, label: &str) -> Option<VertexId> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn incident(&self, v: VertexId) -> &[(EdgeId, VertexId)] {
        &self.adj[v]
    }

    pub fn total_length(&self) -> Rational {
        self.edges.iter().map(|e| e.len.clone()).sum()
    }

    pub fn validate_point(&self, p: &TreePoint) -> Result<()> {
        match p {
            TreePoint::Vertex(v) if *v < self.num_vertices() => Ok(()),
            TreePoint::Vertex(v) => Err(Error::InvalidPoint(format!("unknown vertex id {v}"))),
            TreePoint::Edge { edge, t } => {
                if *edge >= self.num_edges() {
                    Err(Error::InvalidPoint(format!("unknown edge id {edge}")))
                } else if !t.is_positive() || *t >= Rational::one() {
                    Err(Error::InvalidPoint(format!(
                        "edge fraction {t} must lie strictly between 0 and 1"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    fn lca(&self, mut u: VertexId, mut v: VertexId) -> VertexId {
        while self.depth[u] > self.depth[v] {
            u = self.parent[u].unwrap().0;
        }
        while self.depth[v] > self.depth[u] {
            v = self.parent[v].unwrap().0;
        }
        while u != v {
            u = self.parent[u].unwrap().0;
            v = self.parent[v].unwrap().0;
        }
        u
    }

    pub fn vertex_distance(&self, u: VertexId, v: VertexId) -> Rational {
        if u == v {
            return Rational::zero();
        }
        let w = self.lca(u, v);
        let two_w = &self.root_dist[w] + &self.root_dist[w];
        &(&self.root_dist[u] + &self.root_dist[v]) - &two_w
    }

    /// Vertices through which a geodesic can leave `p`, with the distance to each.
    fn exits(&self, p: &TreePoint) -> Vec<(VertexId, Rational)> {
        match p {
            TreePoint::Vertex(v) => vec![(*v, Rational::zero())],
            TreePoint::Edge { edge, t } => {
                let e = &self.edges[*edge];
                vec![(e.a, t * &e.len), (e.b, &(Rational::one() - t) * &e.len)]
            }
        }
    }

    /// Exact geodesic distance. Panics on invalid points; use
    /// [`MetricTree::checked_distance`] for untrusted input.
    pub fn distance(&self, p: &TreePoint, q: &TreePoint) -> Rational {
        if let (TreePoint::Edge { edge: e1, t: t1 }, TreePoint::Edge { edge: e2, t: t2 }) = (p, q) {
            if e1 == e2 {
                return (t1 - t2).abs() * &self.edges[*e1].len;
            }
        }
        if let (TreePoint::Vertex(u), TreePoint::Vertex(v)) = (p, q) {
            return self.vertex_distance(*u, *v);
        }
        let mut best: Option<Rational> = None;
        for (u, du) in self.exits(p) {
            for (v, dv) in self.exits(q) {
                let d = &(&du + &dv) + &self.vertex_distance(u, v);
                if best.as_ref().is_none_or(|b| d < *b) {
                    best = Some(d);
                }
            }
        }
        best.unwrap()
    }

    pub fn checked_distance(&self, p: &TreePoint, q: &TreePoint) -> Result<Rational> {
        self.validate_point(p)?;
        self.validate_point(q)?;
        Ok(self.distance(p, q))
    }

    /// Edges along the vertex path from `u` to `v`, as legs.
    fn vertex_path_legs(&self, u: VertexId, v: VertexId) -> Vec<Leg> {
        let w = self.lca(u, v);
        let mut up = Vec::new();
        let mut x = u;
        while x != w {
            let (p, e) = self.parent[x].unwrap();
            up.push(self.leg_between(e, x, p));
            x = p;
        }
        let mut down = Vec::new();
        let mut y = v;
        while y != w {
            let (p, e) = self.parent[y].unwrap();
            down.push(self.leg_between(e, p, y));
            y = p;
        }
        up.extend(down.into_iter().rev());
        up
    }

    fn leg_between(&self, e: EdgeId, from: VertexId, to: VertexId) -> Leg {
        let edge = &self.edges[e];
        debug_assert!((edge.a == from && edge.b == to) || (edge.a == to && edge.b == from));
        if edge.a == from {
            Leg { edge: e, t0: Rational::zero(), t1: Rational::one() }
        } else {
            Leg { edge: e, t0: Rational::one(), t1: Rational::zero() }
        }
    }

    /// The geodesic from `p` to `q` as a leg list.
    pub fn route(&self, p: &TreePoint, q: &TreePoint) -> Route {
        let mut legs = Vec::new();
        if p != q {
            match (p, q) {
                (TreePoint::Edge { edge: e1, t: t1 }, TreePoint::Edge { edge: e2, t: t2 }) if e1 == e2 => {
                    legs.push(Leg { edge: *e1, t0: t1.clone(), t1: t2.clone() });
                }
                _ => {
                    let mut best: Option<(Rational, VertexId, VertexId)> = None;
                    for (u, du) in self.exits(p) {
                        for (v, dv) in self.exits(q) {
                            let d = &(&du + &dv) + &self.vertex_distance(u, v);
                            if best.as_ref().is_none_or(|b| d < b.0) {
                                best = Some((d, u, v));
                            }
                        }
                    }
                    let (_, u, v) = best.unwrap();
                    if let TreePoint::Edge { edge, t } = p {
                        let end = if self.edges[*edge].a == u { Rational::zero() } else { Rational::one() };
                        legs.push(Leg { edge: *edge, t0: t.clone(), t1: end });
                    }
                    legs.extend(self.vertex_path_legs(u, v));
                    if let TreePoint::Edge { edge, t } = q {
                        let start = if self.edges[*edge].a == v { Rational::zero() } else { Rational::one() };
                        legs.push(Leg { edge: *edge, t0: start, t1: t.clone() });
                    }
                }
            }
        }
        let mut offsets = Vec::with_capacity(legs.len());
        let mut acc = Rational::zero();
        for leg in &legs {
            offsets.push(acc.clone());
            acc = &acc + &leg.length(self);
        }
        Route { start: p.clone(), end: q.clone(), legs, offsets, length: acc }
    }

    pub fn geodesic(&self, p: &TreePoint, q: &TreePoint) -> Result<Arc> {
        self.validate_point(p)?;
        self.validate_point(q)?;
        let route = self.route(p, q);
        let mut waypoints = vec![p.clone()];
        for leg in &route.legs {
            let end = TreePoint::on_edge(self, leg.edge, leg.t1.clone());
            if waypoints.last() != Some(&end) {
                waypoints.push(end);
            }
        }
        Ok(Arc { waypoints, length: route.length })
    }

    pub fn classify_point(&self, p: &TreePoint) -> Result<Classification> {
        self.validate_point(p)?;
        let degree = match p {
            TreePoint::Vertex(v) => self.degree(*v),
            TreePoint::Edge { .. } => 2,
        };
        let kind = if degree == 1 { PointKind::EndPoint } else { PointKind::CutPoint };
        Ok(Classification { kind, degree })
    }

    /// The closed ball of radius `r` about `p`.
    pub fn ball(&self, p: &TreePoint, r: &Rational) -> Result<Region> {
        self.validate_point(p)?;
        if !r.is_positive() {
            return Err(Error::InvalidParam(format!("ball radius {r} must be positive")));
        }
        let one = Rational::one();
        let mut region = Region::empty(self);
        for (i, e) in self.edges.iter().enumerate() {
            if let TreePoint::Edge { edge, t } = p {
                if *edge == i {
                    let w = r / &e.len;
                    let lo = (t - &w).max(Rational::zero());
                    let hi = (t + &w).min(one.clone());
                    region.add_interval(self, i, lo, hi);
                    continue;
                }
            }
            let da = self.distance(p, &TreePoint::Vertex(e.a));
            let db = self.distance(p, &TreePoint::Vertex(e.b));
            if da <= *r {
                let hi = (&(r - &da) / &e.len).min(one.clone());
                region.add_interval(self, i, Rational::zero(), hi);
            }
            if db <= *r {
                let lo = (&one - &(&(r - &db) / &e.len)).max(Rational::zero());
                region.add_interval(self, i, lo, one.clone());
            }
        }
        Ok(region)
    }

    /// Vertices first, then for each edge the interior points of a uniform
    /// subdivision into `ceil(len / δ)` parts.
    pub fn mesh(&self, delta: &Rational) -> Result<Vec<TreePoint>> {
        if !delta.is_positive() {
            return Err(Error::InvalidParam(format!("mesh resolution {delta} must be positive")));
        }
        let mut pts: Vec<TreePoint> = (0..self.num_vertices()).map(TreePoint::Vertex).collect();
        for (i, e) in self.edges.iter().enumerate() {
            let count = (&e.len / delta).ceil_int();
            let count: i64 = i64::try_from(count)
                .map_err(|_| Error::resource("mesh subdivision count", i64::MAX as u64))?;
            for j in 1..count {
                pts.push(TreePoint::Edge { edge: i, t: Rational::new(j, count) });
            }
        }
        Ok(pts)
    }

    /// Largest distance between two vertices; equals the diameter of the tree.
    pub fn diameter(&self) -> Rational {
        let far = |s: VertexId| -> (VertexId, Rational) {
            let mut best = (s, Rational::zero());
            for v in 0..self.num_vertices() {
                let d = self.vertex_distance(s, v);
                if d > best.1 {
                    best = (v, d);
                }
            }
            best
        };
        let (a, _) = far(0);
        far(a).1
    }

    /// A total order on points matching the report tie-break rule: edge
    /// points by `(edge, t)`, vertices before edges.
    pub fn point_order(a: &TreePoint, b: &TreePoint) -> Ordering {
        a.cmp(b)
    }
}
