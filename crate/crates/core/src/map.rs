//! Continuous piecewise-linear self-maps of metric trees.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::region::{FixedSet, Region, Subtree};
use crate::tree::{EdgeId, MetricTree, Route, TreePoint};

pub const DEFAULT_BREAKPOINT_CAP: usize = 1_000_000;

/// Breakpoints `0 = t_0 < ... < t_m = 1` of one edge with the image of each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgePlan {
    pub breaks: Vec<Rational>,
    pub images: Vec<TreePoint>,
}

impl EdgePlan {
    pub fn linear(from: TreePoint, to: TreePoint) -> Self {
        EdgePlan { breaks: vec![Rational::zero(), Rational::one()], images: vec![from, to] }
    }
}

#[derive(Debug, Clone)]
struct Piece {
    t0: Rational,
    t1: Rational,
    route: Route,
    /// Image arc length per unit of edge fraction.
    speed: Rational,
}

#[derive(Debug, Clone)]
pub struct PLSelfMap {
    tree: Arc<MetricTree>,
    vertex_images: Vec<TreePoint>,
    plans: Vec<EdgePlan>,
    pieces: Vec<Vec<Piece>>,
}

impl PartialEq for PLSelfMap {
    fn eq(&self, other: &Self) -> bool {
        *self.tree == *other.tree && self.vertex_images == other.vertex_images && self.plans == other.plans
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventualImage {
    pub j: Subtree,
    pub stabilized: bool,
    pub n_stable: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicPoints {
    pub set: FixedSet,
    pub connected: bool,
    pub max_period: usize,
    /// Exact fixed sets of `f^m` for `m = 1..=max_period`.
    pub by_period: Vec<FixedSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InjectivityReport {
    pub injective: bool,
    /// `(edge, t0, t1)` of domain pieces mapped to a single point.
    pub collapsed: Vec<(EdgeId, Rational, Rational)>,
    /// Edges on which the images of two pieces share interior points.
    pub interior_overlaps: Vec<(EdgeId, Rational, Rational)>,
    /// Image points reached from more than one domain point.
    pub boundary_overlaps: Vec<(TreePoint, Vec<TreePoint>)>,
}

impl PLSelfMap {
    /// Builds a map from vertex images and one plan per edge, checking
    /// continuity at every vertex.
    pub fn new(tree: Arc<MetricTree>, vertex_images: Vec<TreePoint>, plans: Vec<EdgePlan>) -> Result<Self> {
        if vertex_images.len() != tree.num_vertices() {
            return Err(Error::InvalidMap(format!(
                "expected {} vertex images, found {}",
                tree.num_vertices(),
                vertex_images.len()
            )));
        }
        if plans.len() != tree.num_edges() {
            return Err(Error::InvalidMap(format!(
                "expected {} edge plans, found {}",
                tree.num_edges(),
                plans.len()
            )));
        }
        for (v, img) in vertex_images.iter().enumerate() {
            tree.validate_point(img)
                .map_err(|e| Error::InvalidMap(format!("image of vertex `{}`: {e}", tree.labels[v])))?;
        }
        for (e, plan) in plans.iter().enumerate() {
            if plan.breaks.len() < 2 || plan.breaks.len() != plan.images.len() {
                return Err(Error::InvalidMap(format!(
                    "edge {e}: a plan needs at least two breakpoints, each with one image"
                )));
            }
            if !plan.breaks[0].is_zero() || *plan.breaks.last().unwrap() != Rational::one() {
                return Err(Error::InvalidMap(format!("edge {e}: breakpoints must start at 0 and end at 1")));
            }
            if plan.breaks.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidMap(format!("edge {e}: breakpoints must be strictly increasing")));
            }
            for img in &plan.images {
                tree.validate_point(img).map_err(|err| Error::InvalidMap(format!("edge {e}: {err}")))?;
            }
            let edge = &tree.edges[e];
            for (v, img) in [(edge.a, &plan.images[0]), (edge.b, plan.images.last().unwrap())] {
                if *img != vertex_images[v] {
                    return Err(Error::InvalidMap(format!(
                        "discontinuous at vertex `{}`: edge {e} sends it to {} but the vertex maps to {}",
                        tree.labels[v],
                        display_point(&tree, img),
                        display_point(&tree, &vertex_images[v])
                    )));
                }
            }
        }
        Ok(Self::assemble(tree, vertex_images, plans))
    }

    fn assemble(tree: Arc<MetricTree>, vertex_images: Vec<TreePoint>, plans: Vec<EdgePlan>) -> Self {
        let pieces = plans
            .iter()
            .map(|plan| {
                plan.breaks
                    .windows(2)
                    .zip(plan.images.windows(2))
                    .map(|(t, img)| {
                        let route = tree.route(&img[0], &img[1]);
                        let speed = &route.length / &(&t[1] - &t[0]);
                        Piece { t0: t[0].clone(), t1: t[1].clone(), route, speed }
                    })
                    .collect()
            })
            .collect();
        PLSelfMap { tree, vertex_images, plans, pieces }
    }

    pub fn identity(tree: Arc<MetricTree>) -> Self {
        let vertex_images = (0..tree.num_vertices()).map(TreePoint::Vertex).collect();
        let plans = tree
            .edges
            .iter()
            .map(|e| EdgePlan::linear(TreePoint::Vertex(e.a), TreePoint::Vertex(e.b)))
            .collect();
        Self::assemble(tree, vertex_images, plans)
    }

    pub fn tree(&self) -> &MetricTree {
        &self.tree
    }

    pub fn tree_arc(&self) -> &Arc<MetricTree> {
        &self.tree
    }

    pub fn vertex_images(&self) -> &[TreePoint] {
        &self.vertex_images
    }

    pub fn plans(&self) -> &[EdgePlan] {
        &self.plans
    }

    pub fn breakpoint_count(&self) -> usize {
        self.plans.iter().map(|p| p.breaks.len()).sum()
    }

    fn piece_index(&self, e: EdgeId, t: &Rational) -> usize {
        let ps = &self.pieces[e];
        ps.partition_point(|pc| pc.t1 < *t).min(ps.len() - 1)
    }

    /// Exact image of a valid point.
    pub fn apply(&self, p: &TreePoint) -> TreePoint {
        match p {
            TreePoint::Vertex(v) => self.vertex_images[*v].clone(),
            TreePoint::Edge { edge, t } => {
                let pc = &self.pieces[*edge][self.piece_index(*edge, t)];
                pc.route.point_at(&self.tree, &((t - &pc.t0) * &pc.speed))
            }
        }
    }

    pub fn checked_apply(&self, p: &TreePoint) -> Result<TreePoint> {
        self.tree.validate_point(p)?;
        Ok(self.apply(p))
    }

    /// `f^n(p)` by repeated application.
    pub fn iterate(&self, p: &TreePoint, n: usize) -> TreePoint {
        let mut x = p.clone();
        for _ in 0..n {
            x = self.apply(&x);
        }
        x
    }

    /// `self ∘ g`: first `g`, then `self`.
    pub fn compose_with_cap(&self, g: &PLSelfMap, cap: usize) -> Result<PLSelfMap> {
        if *self.tree != *g.tree {
            return Err(Error::InvalidMap("composed maps must share a tree".into()));
        }
        let tree = &*self.tree;
        let mut total = 0usize;
        let mut plans = Vec::with_capacity(tree.num_edges());
        for e in 0..tree.num_edges() {
            let mut breaks: Vec<Rational> = vec![Rational::zero()];
            for pc in &g.pieces[e] {
                if pc.route.legs.is_empty() {
                    breaks.push(pc.t1.clone());
                    continue;
                }
                for (li, leg) in pc.route.legs.iter().enumerate() {
                    let len = &tree.edges[leg.edge].len;
                    let fb = &self.plans[leg.edge].breaks;
                    let (lo, hi) = if leg.forward() { (&leg.t0, &leg.t1) } else { (&leg.t1, &leg.t0) };
                    let start = fb.partition_point(|b| b <= lo);
                    let end = fb.partition_point(|b| b < hi);
                    let inner = &fb[start..end.max(start)];
                    let to_t = |b: &Rational| -> Rational {
                        let s = &pc.route.offsets[li] + &((b - &leg.t0).abs() * len);
                        &pc.t0 + &(&s / &pc.speed)
                    };
                    if leg.forward() {
                        breaks.extend(inner.iter().map(to_t));
                    } else {
                        breaks.extend(inner.iter().rev().map(to_t));
                    }
                    if li + 1 < pc.route.legs.len() {
                        let s = &pc.route.offsets[li + 1];
                        breaks.push(&pc.t0 + &(s / &pc.speed));
                    }
                }
                breaks.push(pc.t1.clone());
                if total + breaks.len() > cap {
                    return Err(Error::resource("breakpoints in composed map", cap as u64));
                }
            }
            breaks.dedup();
            total += breaks.len();
            let images: Vec<TreePoint> = breaks
                .iter()
                .map(|t| self.apply(&g.apply(&TreePoint::on_edge(tree, e, t.clone()))))
                .collect();
            plans.push(simplify(tree, breaks, images));
        }
        let vertex_images = g.vertex_images.iter().map(|p| self.apply(p)).collect();
        Ok(Self::assemble(self.tree.clone(), vertex_images, plans))
    }

    pub fn compose(&self, g: &PLSelfMap) -> Result<PLSelfMap> {
        self.compose_with_cap(g, DEFAULT_BREAKPOINT_CAP)
    }

    /// `f^m` as an explicit plan.
    pub fn power_with_cap(&self, m: usize, cap: usize) -> Result<PLSelfMap> {
        if m == 0 {
            return Ok(Self::identity(self.tree.clone()));
        }
        let mut acc = self.clone();
        for i in 2..=m {
            acc = self.compose_with_cap(&acc, cap).map_err(|e| match e {
                Error::Resource { limit, .. } => {
                    Error::resource(format!("breakpoints in f^{i} (requested power {m})"), limit)
                }
                other => other,
            })?;
        }
        Ok(acc)
    }

    pub fn power(&self, m: usize) -> Result<PLSelfMap> {
        self.power_with_cap(m, DEFAULT_BREAKPOINT_CAP)
    }

    /// Exact image of a closed region.
    pub fn image(&self, s: &Region) -> Region {
        let tree = &*self.tree;
        let mut out = Region::empty(tree);
        for v in 0..tree.num_vertices() {
            if s.has_vertex(v) {
                out.add_point(tree, &self.vertex_images[v]);
            }
        }
        for e in 0..tree.num_edges() {
            for (lo, hi) in s.intervals(e) {
                let first = self.piece_index(e, lo);
                for pc in &self.pieces[e][first..] {
                    if pc.t0 > *hi {
                        break;
                    }
                    let a = lo.clone().max(pc.t0.clone());
                    let b = hi.clone().min(pc.t1.clone());
                    let s0 = (&a - &pc.t0) * &pc.speed;
                    let s1 = (&b - &pc.t0) * &pc.speed;
                    add_subroute(tree, &pc.route, &s0, &s1, &mut out);
                }
            }
        }
        out
    }

    pub fn image_subtree(&self, s: &Subtree) -> Subtree {
        self.image(s)
    }

    pub fn eventual_image(&self, max_iter: usize) -> Result<EventualImage> {
        if max_iter == 0 {
            return Err(Error::InvalidParam("max_iter must be at least 1".into()));
        }
        let mut cur = self.image(&Region::whole(&self.tree));
        for n in 1..=max_iter {
            let next = self.image(&cur);
            if next == cur {
                return Ok(EventualImage { j: cur, stabilized: true, n_stable: n });
            }
            cur = next;
            if n == max_iter {
                break;
            }
        }
        // `cur` is now f^{max_iter + 1}(X); report f^{max_iter}(X) as documented.
        let mut outer = Region::whole(&self.tree);
        for _ in 0..max_iter {
            outer = self.image(&outer);
        }
        Ok(EventualImage { j: outer, stabilized: false, n_stable: max_iter })
    }

    /// Exact solution set of `f(x) = x`.
    pub fn fixed_set(&self) -> FixedSet {
        let tree = &*self.tree;
        let mut out = Region::empty(tree);
        for v in 0..tree.num_vertices() {
            if self.vertex_images[v] == TreePoint::Vertex(v) {
                out.add_vertex(v);
            }
        }
        for e in 0..tree.num_edges() {
            let len = &tree.edges[e].len;
            for pc in &self.pieces[e] {
                if pc.speed.is_zero() {
                    // A collapsed piece fixes its constant image if it lies in the piece.
                    if let TreePoint::Edge { edge, t } = pc.route.point_at(tree, &Rational::zero()) {
                        if edge == e && t >= pc.t0 && t <= pc.t1 {
                            out.add_point(tree, &TreePoint::Edge { edge, t });
                        }
                    }
                    continue;
                }
                let Some(li) = pc.route.legs.iter().position(|l| l.edge == e) else {
                    continue;
                };
                let leg = &pc.route.legs[li];
                let o = &pc.route.offsets[li];
                let ell = leg.length(tree);
                // On this leg the image fraction is u0 + σ·(k(t − t0) − o)/L.
                let sigma = if leg.forward() { Rational::one() } else { -Rational::one() };
                let ratio = &(&sigma * &pc.speed) / len;
                let coeff = &Rational::one() - &ratio;
                let rhs = &leg.t0 - &(&(&sigma * &(&(&pc.speed * &pc.t0) + o)) / len);
                // Parameter range of the piece that lands on this leg.
                let lo = (&pc.t0 + &(o / &pc.speed)).max(pc.t0.clone());
                let hi = (&pc.t0 + &(&(o + &ell) / &pc.speed)).min(pc.t1.clone());
                if coeff.is_zero() {
                    if rhs.is_zero() {
                        out.add_interval(tree, e, lo, hi);
                    }
                } else {
                    let t = &rhs / &coeff;
                    if t >= lo && t <= hi {
                        let p = TreePoint::on_edge(tree, e, t);
                        debug_assert_eq!(self.apply(&p), p);
                        out.add_point(tree, &p);
                    }
                }
            }
        }
        out
    }

    pub fn fixed_points_with_cap(&self, m: usize, cap: usize) -> Result<FixedSet> {
        if m == 0 {
            return Err(Error::InvalidParam("period must be at least 1".into()));
        }
        Ok(self.power_with_cap(m, cap)?.fixed_set())
    }

    pub fn fixed_points(&self, m: usize) -> Result<FixedSet> {
        self.fixed_points_with_cap(m, DEFAULT_BREAKPOINT_CAP)
    }

    pub fn periodic_points_with_cap(&self, max_period: usize, cap: usize) -> Result<PeriodicPoints> {
        if max_period == 0 {
            return Err(Error::InvalidParam("max_period must be at least 1".into()));
        }
        let tree = &*self.tree;
        let mut set = Region::empty(tree);
        let mut by_period = Vec::with_capacity(max_period);
        let mut power = self.clone();
        for m in 1..=max_period {
            if m > 1 {
                power = self.compose_with_cap(&power, cap).map_err(|e| match e {
                    Error::Resource { limit, .. } => Error::resource(format!("breakpoints in f^{m}"), limit),
                    other => other,
                })?;
            }
            let fix = power.fixed_set();
            set = set.union(tree, &fix);
            by_period.push(fix);
        }
        let connected = set.is_connected(tree);
        Ok(PeriodicPoints { set, connected, max_period, by_period })
    }

    pub fn periodic_points(&self, max_period: usize) -> Result<PeriodicPoints> {
        self.periodic_points_with_cap(max_period, DEFAULT_BREAKPOINT_CAP)
    }

    /// Exact injectivity test: no collapsed piece, no two piece images sharing
    /// interior points, and no image point reached from two domain points.
    pub fn injectivity(&self) -> InjectivityReport {
        let tree = &*self.tree;
        let mut rep = InjectivityReport::default();
        let mut per_edge: Vec<Vec<(Rational, Rational)>> = vec![Vec::new(); tree.num_edges()];
        let mut preimages: HashMap<TreePoint, Vec<TreePoint>> = HashMap::new();
        let mut note = |img: TreePoint, pre: TreePoint| {
            let entry = preimages.entry(img).or_default();
            if !entry.contains(&pre) {
                entry.push(pre);
            }
        };
        for v in 0..tree.num_vertices() {
            note(self.vertex_images[v].clone(), TreePoint::Vertex(v));
        }
        for e in 0..tree.num_edges() {
            for pc in &self.pieces[e] {
                if pc.route.legs.is_empty() {
                    rep.collapsed.push((e, pc.t0.clone(), pc.t1.clone()));
                    continue;
                }
                for (li, leg) in pc.route.legs.iter().enumerate() {
                    let (lo, hi) =
                        if leg.forward() { (leg.t0.clone(), leg.t1.clone()) } else { (leg.t1.clone(), leg.t0.clone()) };
                    per_edge[leg.edge].push((lo, hi));
                    let s = &pc.route.offsets[li];
                    let pre = TreePoint::on_edge(tree, e, &pc.t0 + &(s / &pc.speed));
                    note(TreePoint::on_edge(tree, leg.edge, leg.t0.clone()), pre);
                }
                note(pc.route.end.clone(), TreePoint::on_edge(tree, e, pc.t1.clone()));
            }
        }
        for (e, mut ivs) in per_edge.into_iter().enumerate() {
            ivs.sort();
            let mut reach: Option<Rational> = None;
            for (lo, hi) in ivs {
                if let Some(r) = &reach {
                    if lo < *r {
                        rep.interior_overlaps.push((e, lo.clone(), r.clone().min(hi.clone())));
                    }
                }
                if reach.as_ref().is_none_or(|r| hi > *r) {
                    reach = Some(hi);
                }
            }
        }
        let mut multi: Vec<(TreePoint, Vec<TreePoint>)> =
            preimages.into_iter().filter(|(_, pre)| pre.len() > 1).collect();
        for (_, pre) in multi.iter_mut() {
            pre.sort();
        }
        multi.sort();
        rep.boundary_overlaps = multi;
        rep.injective =
            rep.collapsed.is_empty() && rep.interior_overlaps.is_empty() && rep.boundary_overlaps.is_empty();
        rep
    }
}

/// Adds the part of `route` between arc lengths `s0 <= s1` to `out`.
fn add_subroute(tree: &MetricTree, route: &Route, s0: &Rational, s1: &Rational, out: &mut Region) {
    if s0 == s1 || route.legs.is_empty() {
        out.add_point(tree, &route.point_at(tree, s0));
        return;
    }
    for (li, leg) in route.legs.iter().enumerate() {
        let start = &route.offsets[li];
        let end = route.offsets.get(li + 1).unwrap_or(&route.length);
        if end <= s0 || start >= s1 {
            continue;
        }
        let len = &tree.edges[leg.edge].len;
        let a = s0.clone().max(start.clone());
        let b = s1.clone().min(end.clone());
        let frac = |s: &Rational| {
            let d = (s - start) / len;
            if leg.forward() { &leg.t0 + &d } else { &leg.t0 - &d }
        };
        out.add_interval(tree, leg.edge, frac(&a), frac(&b));
    }
}

/// Drops breakpoints where the two neighbouring pieces run along one
/// geodesic at equal speed.
fn simplify(tree: &MetricTree, breaks: Vec<Rational>, images: Vec<TreePoint>) -> EdgePlan {
    let mut nb: Vec<Rational> = vec![breaks[0].clone()];
    let mut ni: Vec<TreePoint> = vec![images[0].clone()];
    for i in 1..breaks.len() {
        if nb.len() >= 2 {
            let k = nb.len();
            let (ta, tb, tc) = (&nb[k - 2], &nb[k - 1], &breaks[i]);
            let (a, b, c) = (&ni[k - 2], &ni[k - 1], &images[i]);
            let ab = tree.distance(a, b);
            let bc = tree.distance(b, c);
            let same_speed = &ab * &(tc - tb) == &bc * &(tb - ta);
            if same_speed && tree.distance(a, c) == &ab + &bc {
                nb[k - 1] = tc.clone();
                ni[k - 1] = c.clone();
                continue;
            }
        }
        nb.push(breaks[i].clone());
        ni.push(images[i].clone());
    }
    EdgePlan { breaks: nb, images: ni }
}

pub fn display_point(tree: &MetricTree, p: &TreePoint) -> String {
    match p {
        TreePoint::Vertex(v) => format!("@{}", tree.labels[*v]),
        TreePoint::Edge { edge, t } => format!("{edge}:{t}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn ep(e: usize, t: &str) -> TreePoint {
        TreePoint::Edge { edge: e, t: r(t) }
    }

    fn unit() -> Arc<MetricTree> {
        Arc::new(MetricTree::from_edges(2, vec![(0, 1, r("1"))]).unwrap())
    }

    fn tent() -> PLSelfMap {
        let t = unit();
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

    fn y_tree() -> Arc<MetricTree> {
        Arc::new(MetricTree::from_edges(4, vec![(0, 1, r("1")), (0, 2, r("1")), (0, 3, r("1"))]).unwrap())
    }

    fn rotation() -> PLSelfMap {
        let y = y_tree();
        let lin = |a, b| EdgePlan::linear(TreePoint::Vertex(a), TreePoint::Vertex(b));
        PLSelfMap::new(
            y,
            vec![TreePoint::Vertex(0), TreePoint::Vertex(2), TreePoint::Vertex(3), TreePoint::Vertex(1)],
            vec![lin(0, 2), lin(0, 3), lin(0, 1)],
        )
        .unwrap()
    }

    /// Tent map evaluated by its textbook formula on the unit interval.
    fn tent_formula(x: &Rational) -> Rational {
        let two = Rational::from_int(2);
        if *x <= r("1/2") { &two * x } else { &two * &(Rational::one() - x) }
    }

    fn as_t(p: &TreePoint) -> Rational {
        match p {
            TreePoint::Vertex(0) => Rational::zero(),
            TreePoint::Vertex(_) => Rational::one(),
            TreePoint::Edge { t, .. } => t.clone(),
        }
    }

    #[test]
    fn continuity_is_enforced() {
        let t = unit();
        let err = PLSelfMap::new(
            t,
            vec![TreePoint::Vertex(0), TreePoint::Vertex(1)],
            vec![EdgePlan::linear(TreePoint::Vertex(0), TreePoint::Vertex(0))],
        )
        .unwrap_err();
        assert!(err.to_string().contains("`v1`"), "{err}");
    }

    #[test]
    fn apply_examples() {
        let f = tent();
        assert_eq!(f.apply(&ep(0, "1/4")), ep(0, "1/2"));
        assert_eq!(f.iterate(&ep(0, "2/5"), 2), ep(0, "2/5"));
        let rot = rotation();
        assert_eq!(rot.apply(&TreePoint::Vertex(1)), TreePoint::Vertex(2));
        assert_eq!(rot.iterate(&TreePoint::Vertex(1), 3), TreePoint::Vertex(1));
        let id = PLSelfMap::identity(y_tree());
        for p in y_tree().mesh(&r("1/5")).unwrap() {
            assert_eq!(id.apply(&p), p);
            assert_eq!(id.iterate(&p, 7), p);
        }
    }

    #[test]
    fn tent_matches_formula_oracle() {
        let f = tent();
        for i in 0..=97 {
            let x = Rational::new(i, 97);
            let p = TreePoint::on_edge(f.tree(), 0, x.clone());
            assert_eq!(as_t(&f.apply(&p)), tent_formula(&x));
        }
    }

    #[test]
    fn powers_and_composition() {
        let f = tent();
        let f2 = f.power(2).unwrap();
        assert_eq!(f2.apply(&ep(0, "1/8")), ep(0, "1/2"));
        assert_eq!(f2.plans()[0].breaks.len(), 5);
        for i in 0..=64 {
            let p = TreePoint::on_edge(f.tree(), 0, Rational::new(i, 64));
            assert_eq!(f.power(5).unwrap().apply(&p), f.iterate(&p, 5));
        }
        let id = PLSelfMap::identity(y_tree());
        assert_eq!(id.power(5).unwrap(), id);
        let rot = rotation();
        let rot2 = rot.power(2).unwrap();
        assert_eq!(rot.compose(&rot2).unwrap(), id);
        assert!(matches!(f.power_with_cap(12, 100), Err(Error::Resource { .. })));
    }

    #[test]
    fn fixed_point_examples() {
        let f = tent();
        let fix = f.fixed_points(1).unwrap();
        assert_eq!(fix, Region::from_points(f.tree(), &[TreePoint::Vertex(0), ep(0, "2/3")]));
        let fix2 = f.fixed_points(2).unwrap();
        let expect = [TreePoint::Vertex(0), ep(0, "2/5"), ep(0, "2/3"), ep(0, "4/5")];
        assert_eq!(fix2, Region::from_points(f.tree(), &expect));
        assert_eq!(PLSelfMap::identity(y_tree()).fixed_points(1).unwrap(), Region::whole(&y_tree()));
        let per = rotation().periodic_points(3).unwrap();
        assert_eq!(per.set, Region::whole(&y_tree()));
        assert!(per.connected);
        assert_eq!(per.by_period[0], Region::point(&y_tree(), &TreePoint::Vertex(0)));
        let tp = f.periodic_points(2).unwrap();
        assert!(!tp.connected);
    }

    /// Counts sign changes of `f^m(x) − x` on a fine grid; each one brackets a
    /// fixed point of the interval map.
    #[test]
    fn tent_square_fixed_points_match_sign_change_oracle() {
        // 2999 is prime, so no fixed point lands on a grid node.
        let n = 2999i64;
        let g = |x: &Rational| tent_formula(&tent_formula(x));
        let mut roots = vec![Rational::zero()];
        let mut prev = g(&Rational::new(1, n)) - Rational::new(1, n);
        for i in 2..=n {
            let x = Rational::new(i, n);
            let cur = g(&x) - &x;
            if prev.signum() != cur.signum() {
                roots.push(Rational::new(2 * i - 1, 2 * n));
            }
            prev = cur;
        }
        let fix2 = tent().fixed_points(2).unwrap();
        let pts: Vec<Rational> = fix2
            .pieces(tent().tree())
            .iter()
            .map(|pc| match pc {
                crate::region::Piece::Point(p) => as_t(p),
                _ => panic!("unexpected segment"),
            })
            .collect();
        assert_eq!(pts.len(), roots.len());
        for (a, b) in pts.iter().zip(&roots) {
            assert!((a - b).abs() <= Rational::new(1, n));
        }
    }

    #[test]
    fn images_and_eventual_image() {
        let f = tent();
        let whole = Region::whole(f.tree());
        assert_eq!(f.image(&whole), whole);
        let ev = f.eventual_image(10).unwrap();
        assert!(ev.stabilized);
        assert_eq!((ev.j, ev.n_stable), (whole.clone(), 1));
        let y = y_tree();
        let lin = |a, b| EdgePlan::linear(TreePoint::Vertex(a), TreePoint::Vertex(b));
        let collapse = PLSelfMap::new(
            y.clone(),
            vec![TreePoint::Vertex(0), TreePoint::Vertex(1), TreePoint::Vertex(2), TreePoint::Vertex(0)],
            vec![lin(0, 1), lin(0, 2), lin(0, 0)],
        )
        .unwrap();
        let mut arm_c = Region::empty(&y);
        arm_c.add_interval(&y, 2, r("0"), r("1"));
        assert_eq!(collapse.image(&arm_c).as_single_point(&y), Some(TreePoint::Vertex(0)));
        assert!(!collapse.injectivity().injective);
        let half = PLSelfMap::new(
            unit(),
            vec![TreePoint::Vertex(0), ep(0, "1/2")],
            vec![EdgePlan::linear(TreePoint::Vertex(0), ep(0, "1/2"))],
        )
        .unwrap();
        let ev = half.eventual_image(50).unwrap();
        assert!(!ev.stabilized);
        assert_eq!(ev.j.intervals(0), &[(r("0"), Rational::new(1, 1 << 50))]);
    }

    #[test]
    fn injectivity() {
        assert!(rotation().injectivity().injective);
        assert!(PLSelfMap::identity(y_tree()).injectivity().injective);
        let rep = tent().injectivity();
        assert!(!rep.injective);
        assert!(!rep.interior_overlaps.is_empty());
        // Two arms folded onto the same third arm only touch at the hub image.
        let y = y_tree();
        let lin = |a, b| EdgePlan::linear(TreePoint::Vertex(a), TreePoint::Vertex(b));
        let fold = PLSelfMap::new(
            y,
            vec![TreePoint::Vertex(0), TreePoint::Vertex(1), TreePoint::Vertex(2), TreePoint::Vertex(2)],
            vec![lin(0, 1), lin(0, 2), lin(0, 2)],
        )
        .unwrap();
        assert!(!fold.injectivity().injective);
    }

    #[test]
    fn collapsed_piece_fixes_its_image() {
        let t = unit();
        let c = ep(0, "1/2");
        let f = PLSelfMap::new(
            t.clone(),
            vec![c.clone(), c.clone()],
            vec![EdgePlan { breaks: vec![r("0"), r("1/3"), r("1")], images: vec![c.clone(), c.clone(), c.clone()] }],
        )
        .unwrap();
        assert_eq!(f.fixed_set(), Region::point(&t, &c));
        let g = PLSelfMap::new(
            t.clone(),
            vec![ep(0, "1/4"), TreePoint::Vertex(1)],
            vec![EdgePlan { breaks: vec![r("0"), r("1/2"), r("3/4"), r("1")], images: vec![ep(0, "1/4"), ep(0, "1/4"), ep(0, "1/2"), TreePoint::Vertex(1)] }],
        )
        .unwrap();
        let fix = g.fixed_set();
        assert!(fix.contains(&ep(0, "1/4")));
        assert!(fix.contains(&TreePoint::Vertex(1)));
        assert_eq!(g.fixed_points(2).unwrap(), fix);
    }
}
