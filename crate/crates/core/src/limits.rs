//! Finite approximations of ω- and Ω-limit sets and probes of the map `x ↦ ω(x)`.

use std::collections::HashMap;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::grid::{dedup_points, eps_net, EpsNet, PairSet};
use crate::map::PLSelfMap;
use crate::orbit::{Dynamics, PointId};
use crate::rational::Rational;
use crate::region::{DistanceField, Region};
use crate::tree::{MetricTree, TreePoint};

/// Largest `T + W` accepted by the estimators.
pub const MAX_ITERATES: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitParams {
    pub transient: usize,
    pub window: usize,
    pub epsilon: Rational,
    pub delta_schedule: Vec<Rational>,
    pub samples_per_delta: usize,
}

impl Default for LimitParams {
    fn default() -> Self {
        LimitParams {
            transient: 512,
            window: 512,
            epsilon: Rational::new(1, 1000),
            delta_schedule: (3..=10).map(|i| Rational::new(1, 1 << i)).collect(),
            samples_per_delta: 32,
        }
    }
}

impl LimitParams {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::InvalidParam("window must be at least 1".into()));
        }
        if !self.epsilon.is_positive() {
            return Err(Error::InvalidParam(format!("epsilon {} must be positive", self.epsilon)));
        }
        if self.delta_schedule.is_empty() {
            return Err(Error::InvalidParam("delta schedule is empty".into()));
        }
        if self.delta_schedule.iter().any(|d| !d.is_positive()) {
            return Err(Error::InvalidParam("delta schedule entries must be positive".into()));
        }
        if self.delta_schedule.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidParam("delta schedule must be strictly decreasing".into()));
        }
        if self.samples_per_delta == 0 {
            return Err(Error::InvalidParam("samples per delta must be at least 1".into()));
        }
        if self.transient.saturating_add(self.window) > MAX_ITERATES {
            return Err(Error::resource("orbit iterates (transient + window)", MAX_ITERATES as u64));
        }
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        self.transient + self.window
    }
}

/// A finite point set standing in for a compact set, tagged with how it was made.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompactSetApprox {
    pub points: Vec<TreePoint>,
    pub resolution: Rational,
    pub provenance: String,
}

impl CompactSetApprox {
    pub fn sorted_points(&self) -> Vec<TreePoint> {
        let mut v = self.points.clone();
        v.sort();
        v
    }
}

/// Exact Hausdorff distance between finite point sets; `None` if either is empty.
pub fn point_hausdorff(tree: &MetricTree, a: &[TreePoint], b: &[TreePoint]) -> Option<Rational> {
    let fa = Region::from_points(tree, a).distance_field(tree)?;
    let fb = Region::from_points(tree, b).distance_field(tree)?;
    Some(field_hausdorff(tree, a, &fa, b, &fb))
}

fn field_hausdorff(tree: &MetricTree, a: &[TreePoint], fa: &DistanceField, b: &[TreePoint], fb: &DistanceField) -> Rational {
    let ab = a.iter().map(|p| fb.at(tree, p)).max().unwrap_or_else(Rational::zero);
    let ba = b.iter().map(|p| fa.at(tree, p)).max().unwrap_or_else(Rational::zero);
    ab.max(ba)
}

pub fn hausdorff(tree: &MetricTree, a: &CompactSetApprox, b: &CompactSetApprox) -> Result<Rational> {
    point_hausdorff(tree, &a.points, &b.points)
        .ok_or_else(|| Error::InvalidParam("hausdorff distance of an empty set".into()))
}

/// A cached ω-estimate with its distance field.
pub struct OmegaEst {
    pub points: Vec<TreePoint>,
    field: DistanceField,
}

impl OmegaEst {
    pub fn distance(&self, tree: &MetricTree, p: &TreePoint) -> Rational {
        self.field.at(tree, p)
    }

    pub fn hausdorff(&self, tree: &MetricTree, other: &OmegaEst) -> Rational {
        if self.points == other.points {
            return Rational::zero();
        }
        field_hausdorff(tree, &self.points, &self.field, &other.points, &other.field)
    }

    /// Largest distance from a point of `self` to `other`.
    pub fn directed(&self, tree: &MetricTree, other: &OmegaEst) -> Rational {
        self.points.iter().map(|p| other.distance(tree, p)).max().unwrap_or_else(Rational::zero)
    }
}

/// A far point seen at one scale of the Ω search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaWitness {
    pub sample: TreePoint,
    pub n: usize,
    pub image: TreePoint,
    pub distance: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaleTrace {
    pub delta: Rational,
    pub samples: usize,
    /// Largest distance from the ω-estimate among late iterates that recur across scales.
    pub witness_distance: Rational,
    pub witness: Option<OmegaWitness>,
    /// Largest distance from the ω-estimate over all iterates `1..=T+W` of the samples.
    pub transient_reach: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigOmegaEstimate {
    pub set: CompactSetApprox,
    pub scales: Vec<ScaleTrace>,
}

impl BigOmegaEstimate {
    pub fn final_distance(&self) -> Rational {
        self.scales.last().map(|s| s.witness_distance.clone()).unwrap_or_else(Rational::zero)
    }

    /// The finest-scale witness if it exceeds `threshold` and has not decayed by
    /// more than a quarter since the previous scale.
    pub fn confirmed(&self, threshold: &Rational) -> Option<&OmegaWitness> {
        let last = self.scales.last()?;
        if &last.witness_distance <= threshold {
            return None;
        }
        if self.scales.len() >= 2 {
            let prev = &self.scales[self.scales.len() - 2].witness_distance;
            if &last.witness_distance * Rational::new(4, 1) < prev * Rational::new(3, 1) {
                return None;
            }
        }
        last.witness.as_ref()
    }
}

/// Estimators sharing one orbit graph and a cache of ω-estimates.
pub struct Estimator<'a> {
    dy: Dynamics<'a>,
    params: LimitParams,
    omega: HashMap<PointId, Rc<OmegaEst>>,
}

impl<'a> Estimator<'a> {
    pub fn new(f: &'a PLSelfMap, params: LimitParams) -> Result<Self> {
        params.validate()?;
        Ok(Estimator { dy: Dynamics::new(f), params, omega: HashMap::new() })
    }

    pub fn params(&self) -> &LimitParams {
        &self.params
    }

    pub fn map(&self) -> &'a PLSelfMap {
        self.dy.map()
    }

    pub fn dynamics(&mut self) -> &mut Dynamics<'a> {
        &mut self.dy
    }

    fn tree(&self) -> &'a MetricTree {
        self.dy.map().tree()
    }

    pub fn omega(&mut self, x: &TreePoint) -> Rc<OmegaEst> {
        let id = self.dy.intern(x);
        self.omega_id(id)
    }

    fn omega_id(&mut self, id: PointId) -> Rc<OmegaEst> {
        if let Some(o) = self.omega.get(&id) {
            return o.clone();
        }
        let tree = self.tree();
        let (t, h) = (self.params.transient, self.params.horizon());
        let ids = self.dy.window(id, t, h, h);
        let pts: Vec<TreePoint> = ids.iter().map(|&i| self.dy.point(i).clone()).collect();
        let points = eps_net(tree, &pts, &self.params.epsilon);
        let field = Region::from_points(tree, &points).distance_field(tree).expect("tail window is nonempty");
        let est = Rc::new(OmegaEst { points, field });
        self.omega.insert(id, est.clone());
        est
    }

    pub fn omega_set(&mut self, x: &TreePoint) -> CompactSetApprox {
        let est = self.omega(x);
        CompactSetApprox {
            points: est.points.clone(),
            resolution: self.params.epsilon.clone(),
            provenance: format!(
                "omega: tail iterates {}..={}, net radius {}",
                self.params.transient + 1,
                self.params.horizon(),
                self.params.epsilon
            ),
        }
    }

    pub fn big_omega(&mut self, x: &TreePoint) -> Result<BigOmegaEstimate> {
        let tree = self.tree();
        let p = self.params.clone();
        let h = p.horizon();
        let x_id = self.dy.intern(x);
        let om = self.omega_id(x_id);
        let base = match self.dy.cycle_info(x_id, h) {
            Some(c) => c.preperiod.min(p.transient),
            None => p.transient,
        };
        let two_eps = &p.epsilon * Rational::from_int(2);
        let mut dist: HashMap<PointId, Rational> = HashMap::new();
        let mut nets: Vec<EpsNet> = Vec::new();
        let mut scales = Vec::new();
        let mut last: Vec<TreePoint> = Vec::new();
        for (j, delta) in p.delta_schedule.iter().enumerate() {
            let lo = (base + j).min(p.transient);
            let ball = tree.ball(x, delta)?;
            let spacing = delta / &Rational::from_int(p.samples_per_delta as i64);
            let samples = dedup_points(std::iter::once(x.clone()).chain(ball.sample(tree, &spacing)));
            let mut net = EpsNet::new(tree, two_eps.clone());
            let mut reach = Rational::zero();
            let mut best: Option<(usize, PointId, Rational)> = None;
            let mut recurring: Vec<TreePoint> = Vec::new();
            for (si, y) in samples.iter().enumerate() {
                let y_id = self.dy.intern(y);
                let full = self.dy.window(y_id, 0, h, h);
                for &z in &full {
                    let d = dist.entry(z).or_insert_with(|| om.distance(tree, self.dy.point(z))).clone();
                    if d > reach {
                        reach = d;
                    }
                }
                // Without a repeat the orbit points are distinct and `full[n-1] = f^n(y)`.
                let late = match self.dy.cycle_info(y_id, h) {
                    None => full[lo.min(full.len())..].to_vec(),
                    Some(_) => self.dy.window(y_id, lo, h, h),
                };
                for z in late {
                    let d = dist[&z].clone();
                    if d <= two_eps {
                        continue;
                    }
                    let zp = self.dy.point(z).clone();
                    if nets.iter().all(|n| n.within(tree, &zp, &two_eps)) {
                        if best.as_ref().is_none_or(|b| d > b.2) {
                            best = Some((si, z, d));
                        }
                        recurring.push(zp.clone());
                    }
                    net.offer(tree, &zp);
                }
            }
            let witness = best.map(|(si, z, d)| {
                let y_id = self.dy.intern(&samples[si]);
                let mut n = lo + 1;
                let mut cur = self.dy.step(y_id, n);
                while cur != z && n < h {
                    cur = self.dy.next(cur);
                    n += 1;
                }
                OmegaWitness { sample: samples[si].clone(), n, image: self.dy.point(z).clone(), distance: d }
            });
            scales.push(ScaleTrace {
                delta: delta.clone(),
                samples: samples.len(),
                witness_distance: witness.as_ref().map(|w| w.distance.clone()).unwrap_or_else(Rational::zero),
                witness,
                transient_reach: reach,
            });
            nets.push(net);
            last = recurring;
        }
        self.dy.precision_check()?;
        let points = eps_net(tree, om.points.iter().chain(last.iter()), &p.epsilon);
        Ok(BigOmegaEstimate {
            set: CompactSetApprox {
                points,
                resolution: p.epsilon.clone(),
                provenance: format!(
                    "big omega: ball samples at spacing delta/{} over {} scales, iterates up to {}, net radius {}",
                    p.samples_per_delta,
                    p.delta_schedule.len(),
                    h,
                    p.epsilon
                ),
            },
            scales,
        })
    }

    /// Largest Hausdorff distance between ω-estimates over pairs within `delta`.
    pub fn modulus(&mut self, pairs: &PairSet, delta: &Rational) -> ModulusReport {
        let tree = self.tree();
        let mut best = ModulusReport { pair_distance: delta.clone(), max_h: Rational::zero(), witness: None, pairs: 0 };
        for (a, b, _) in pairs.within(delta) {
            best.pairs += 1;
            let (oa, ob) = (self.omega(a), self.omega(b));
            let h = if Rc::ptr_eq(&oa, &ob) { Rational::zero() } else { oa.hausdorff(tree, &ob) };
            if h > best.max_h || best.witness.is_none() {
                best.max_h = h;
                best.witness = Some((a.clone(), b.clone()));
            }
        }
        best
    }

    pub fn recurrent_points(&mut self, grid: &[TreePoint]) -> Vec<TreePoint> {
        let tree = self.tree();
        let eps = self.params.epsilon.clone();
        grid.iter().filter(|x| self.omega(x).distance(tree, x) <= eps).cloned().collect()
    }

    pub fn semicontinuity_probe(&mut self, grid: &[TreePoint]) -> SemicontinuityReport {
        let tree = self.tree();
        let sched = &self.params.delta_schedule;
        let radii: Vec<Rational> = sched[sched.len().saturating_sub(2)..].to_vec();
        let tol = &self.params.epsilon * Rational::from_int(3);
        let mut report = SemicontinuityReport::default();
        for x in grid {
            let ox = self.omega(x);
            // Per radius: worst upper and lower deviation over the sphere.
            let mut upper: Vec<Option<(TreePoint, Rational)>> = Vec::new();
            let mut lower: Vec<Option<(TreePoint, Rational)>> = Vec::new();
            for r in &radii {
                let (mut u, mut l): (Option<(TreePoint, Rational)>, Option<(TreePoint, Rational)>) = (None, None);
                for y in crate::grid::sphere(tree, x, r) {
                    let oy = self.omega(&y);
                    let du = oy.directed(tree, &ox);
                    let dl = ox.directed(tree, &oy);
                    if u.as_ref().is_none_or(|b| du > b.1) {
                        u = Some((y.clone(), du));
                    }
                    if l.as_ref().is_none_or(|b| dl > b.1) {
                        l = Some((y, dl));
                    }
                }
                upper.push(u);
                lower.push(l);
            }
            for (dev, out) in [(upper, &mut report.usc_violations), (lower, &mut report.lsc_violations)] {
                if !dev.is_empty() && dev.iter().all(|d| matches!(d, Some((_, v)) if v > &tol)) {
                    let (y, v) = dev.last().cloned().flatten().expect("checked above");
                    out.push(SemicontinuityViolation { x: x.clone(), near: y, distance: v });
                }
            }
        }
        report
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModulusReport {
    pub pair_distance: Rational,
    pub max_h: Rational,
    pub witness: Option<(TreePoint, TreePoint)>,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemicontinuityViolation {
    pub x: TreePoint,
    pub near: TreePoint,
    pub distance: Rational,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SemicontinuityReport {
    pub usc_violations: Vec<SemicontinuityViolation>,
    pub lsc_violations: Vec<SemicontinuityViolation>,
}

pub fn omega_limit(f: &PLSelfMap, x: &TreePoint, params: &LimitParams) -> Result<CompactSetApprox> {
    f.tree().validate_point(x)?;
    let mut est = Estimator::new(f, params.clone())?;
    let set = est.omega_set(x);
    est.dy.precision_check()?;
    Ok(set)
}

pub fn big_omega_limit(f: &PLSelfMap, x: &TreePoint, params: &LimitParams) -> Result<BigOmegaEstimate> {
    f.tree().validate_point(x)?;
    Estimator::new(f, params.clone())?.big_omega(x)
}

pub fn omega_map_modulus(
    f: &PLSelfMap,
    grid_resolution: &Rational,
    pair_distance: &Rational,
    params: &LimitParams,
) -> Result<ModulusReport> {
    let mesh = f.tree().mesh(grid_resolution)?;
    let pairs = PairSet::from_mesh(f.tree(), &mesh, pair_distance);
    let mut est = Estimator::new(f, params.clone())?;
    let report = est.modulus(&pairs, pair_distance);
    est.dy.precision_check()?;
    Ok(report)
}

pub fn recurrent_points(f: &PLSelfMap, grid: &[TreePoint], params: &LimitParams) -> Result<Vec<TreePoint>> {
    let mut est = Estimator::new(f, params.clone())?;
    let pts = est.recurrent_points(grid);
    est.dy.precision_check()?;
    Ok(pts)
}

pub fn semicontinuity_probe(f: &PLSelfMap, grid: &[TreePoint], params: &LimitParams) -> Result<SemicontinuityReport> {
    let mut est = Estimator::new(f, params.clone())?;
    let report = est.semicontinuity_probe(grid);
    est.dy.precision_check()?;
    Ok(report)
}

/// Finite stand-in for total disconnectedness: chains of points linked at
/// distance `2ε` must stay shorter than `scale`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisconnectionCheck {
    pub totally_disconnected: bool,
    pub longest_chain: Rational,
    pub witness: Option<(TreePoint, TreePoint)>,
}

pub fn disconnection_check(tree: &MetricTree, set: &CompactSetApprox, scale: &Rational) -> DisconnectionCheck {
    let pts = &set.points;
    let link = &set.resolution * Rational::from_int(2);
    let mut parent: Vec<usize> = (0..pts.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for (i, j, _) in crate::grid::close_pairs(tree, pts, &link) {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..pts.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out = DisconnectionCheck { totally_disconnected: true, longest_chain: Rational::zero(), witness: None };
    let mut roots: Vec<usize> = groups.keys().copied().collect();
    roots.sort();
    for r in roots {
        let g = &groups[&r];
        if g.len() < 2 {
            continue;
        }
        // Two sweeps find a diameter of a finite subset of a tree.
        let far = |from: usize| {
            g.iter().copied().fold((from, Rational::zero()), |acc, k| {
                let d = tree.distance(&pts[from], &pts[k]);
                if d > acc.1 { (k, d) } else { acc }
            })
        };
        let (a, _) = far(g[0]);
        let (b, d) = far(a);
        if d > out.longest_chain {
            out.longest_chain = d;
            out.witness = Some((pts[a].clone(), pts[b].clone()));
        }
    }
    out.totally_disconnected = &out.longest_chain < scale;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::EdgePlan;
    use std::sync::Arc;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn unit() -> Arc<MetricTree> {
        Arc::new(MetricTree::from_edges(2, vec![(0, 1, r("1"))]).unwrap())
    }

    fn pt(s: &str) -> TreePoint {
        TreePoint::on_edge(&unit(), 0, r(s))
    }

    fn tent() -> PLSelfMap {
        PLSelfMap::new(
            unit(),
            vec![TreePoint::Vertex(0), TreePoint::Vertex(0)],
            vec![EdgePlan {
                breaks: vec![r("0"), r("1/2"), r("1")],
                images: vec![TreePoint::Vertex(0), TreePoint::Vertex(1), TreePoint::Vertex(0)],
            }],
        )
        .unwrap()
    }

    #[test]
    fn hausdorff_examples() {
        let t = unit();
        let set = |v: &[&str]| CompactSetApprox {
            points: v.iter().map(|s| pt(s)).collect(),
            resolution: r("1/1000"),
            provenance: String::new(),
        };
        assert_eq!(hausdorff(&t, &set(&["0"]), &set(&["1"])).unwrap(), r("1"));
        // Oracle: brute force over all pairs.
        let a = ["0", "2/3"];
        let b = ["0", "2/5", "2/3", "4/5"];
        let brute = |x: &[&str], y: &[&str]| {
            x.iter().map(|p| y.iter().map(|q| (r(p) - r(q)).abs()).min().unwrap()).max().unwrap()
        };
        let want = brute(&a, &b).max(brute(&b, &a));
        // 2/5 is 4/15 away from {0, 2/3}; the often-quoted 2/15 is only the 4/5 term.
        assert_eq!(want, r("4/15"));
        assert_eq!(hausdorff(&t, &set(&a), &set(&b)).unwrap(), want);
        let empty = CompactSetApprox { points: vec![], resolution: r("1"), provenance: String::new() };
        assert!(hausdorff(&t, &empty, &set(&a)).is_err());
    }

    #[test]
    fn tent_limits() {
        let f = tent();
        let p = LimitParams::default();
        let om = omega_limit(&f, &pt("2/5"), &p).unwrap();
        assert_eq!(om.sorted_points(), vec![pt("2/5"), pt("4/5")]);
        let big = big_omega_limit(&f, &pt("2/5"), &p).unwrap();
        assert!(big.set.points.starts_with(&om.points));
        assert!(big.confirmed(&(&p.epsilon * Rational::from_int(3))).is_some());
        let fixed = omega_limit(&f, &pt("2/3"), &p).unwrap();
        assert_eq!(fixed.points, vec![pt("2/3")]);
    }

    #[test]
    fn identity_limits() {
        let f = PLSelfMap::identity(unit());
        let p = LimitParams::default();
        let big = big_omega_limit(&f, &pt("1/3"), &p).unwrap();
        assert_eq!(big.set.points, vec![pt("1/3")]);
        assert!(big.final_distance().is_zero());
        assert!(big.confirmed(&p.epsilon).is_none());
        let m = omega_map_modulus(&f, &r("1/17"), &r("1/16"), &p).unwrap();
        assert!(m.max_h <= r("1/16"));
        let mesh = f.tree().mesh(&r("1/17")).unwrap();
        assert_eq!(recurrent_points(&f, &mesh, &p).unwrap(), mesh);
        let s = semicontinuity_probe(&f, &mesh, &p).unwrap();
        assert!(s.usc_violations.is_empty() && s.lsc_violations.is_empty());
    }

    #[test]
    fn tent_modulus_is_large() {
        let f = tent();
        let p = LimitParams::default();
        let m = omega_map_modulus(&f, &r("1/100"), &r("1/64"), &p).unwrap();
        assert!(m.max_h >= r("1/4"), "{}", m.max_h);
        // Re-evaluating the witness with a longer window gives the same picture.
        let (a, b) = m.witness.unwrap();
        let fine = LimitParams { transient: 2048, window: 2048, ..p };
        let oa = omega_limit(&f, &a, &fine).unwrap();
        let ob = omega_limit(&f, &b, &fine).unwrap();
        assert!(hausdorff(f.tree(), &oa, &ob).unwrap() >= r("1/4"));
        let rec = recurrent_points(&f, &f.tree().mesh(&r("1/5")).unwrap(), &LimitParams::default()).unwrap();
        for x in ["0", "2/5", "4/5"] {
            assert!(rec.contains(&pt(x)), "{x}");
        }
    }

    #[test]
    fn params_are_checked() {
        let bad = LimitParams { delta_schedule: vec![r("1/8"), r("1/4")], ..LimitParams::default() };
        assert!(bad.validate().is_err());
        let huge = LimitParams { window: MAX_ITERATES, ..LimitParams::default() };
        assert!(huge.validate().unwrap_err().is_resource());
    }

    #[test]
    fn chains_detect_segments() {
        let t = unit();
        let seg = CompactSetApprox {
            points: (0..=100).map(|k| TreePoint::on_edge(&t, 0, Rational::new(k, 1000))).collect(),
            resolution: r("1/1000"),
            provenance: String::new(),
        };
        let c = disconnection_check(&t, &seg, &r("1/17"));
        assert!(!c.totally_disconnected);
        assert_eq!(c.longest_chain, r("1/10"));
        let pts = CompactSetApprox { points: vec![pt("0"), pt("1/2")], ..seg };
        assert!(disconnection_check(&t, &pts, &r("1/17")).totally_disconnected);
    }
}
