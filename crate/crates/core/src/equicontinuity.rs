//! Orbit-separation defect, the interval criterion, wandering components and the
//! three-condition consistency checker.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::grid::{dedup_points, sphere_radii, PairSet};
use crate::limits::{disconnection_check, Estimator, LimitParams, ModulusReport, OmegaWitness};
use crate::map::{EventualImage, PLSelfMap};
use crate::orbit::Dynamics;
use crate::rational::Rational;
use crate::region::{FixedSet, Piece, Region};
use crate::tree::{MetricTree, TreePoint};

/// Largest number of point pairs a defect computation will evaluate.
pub const MAX_PAIRS: usize = 2_000_000;

/// Sphere radii around centers go down to `2^-SPHERE_EXP`.
pub const SPHERE_EXP: u32 = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefectReport {
    pub delta: Rational,
    pub horizon: usize,
    pub defect: Rational,
    /// `(x, y, n)` with `d(f^n x, f^n y)` equal to the defect.
    pub witness: Option<(TreePoint, TreePoint, usize)>,
    pub pairs: usize,
}

/// Pairs together with their orbit separations, evaluated once.
pub struct SeparationTable {
    pub pairs: PairSet,
    seps: Vec<(Rational, usize)>,
    horizon: usize,
}

impl SeparationTable {
    pub fn build(dy: &mut Dynamics<'_>, pairs: PairSet, horizon: usize) -> Result<Self> {
        if pairs.len() > MAX_PAIRS {
            return Err(Error::resource("defect pairs", MAX_PAIRS as u64));
        }
        let mut t = SeparationTable { pairs: PairSet::new(), seps: Vec::new(), horizon };
        t.extend(dy, pairs);
        dy.precision_check()?;
        Ok(t)
    }

    fn extend(&mut self, dy: &mut Dynamics<'_>, mut pairs: PairSet) {
        pairs.sort();
        self.seps = pairs
            .pairs
            .iter()
            .map(|(a, b, _)| {
                let (x, y) = (dy.intern(&pairs.points[*a]), dy.intern(&pairs.points[*b]));
                dy.separation(x, y, self.horizon)
            })
            .collect();
        self.pairs = pairs;
    }

    /// Adds pairs, re-sorting; separations of existing pairs are reused.
    pub fn add_pairs(&mut self, dy: &mut Dynamics<'_>, tree: &MetricTree, extra: &[(TreePoint, TreePoint)]) {
        let mut ps = self.pairs.clone();
        for (p, q) in extra {
            ps.add_pair(tree, p, q);
        }
        if ps.len() == self.pairs.len() {
            return;
        }
        let mut known = std::collections::HashMap::new();
        for ((a, b, _), s) in self.pairs.pairs.iter().zip(&self.seps) {
            known.insert((self.pairs.points[*a].clone(), self.pairs.points[*b].clone()), s.clone());
        }
        ps.sort();
        self.seps = ps
            .pairs
            .iter()
            .map(|(a, b, _)| {
                let key = (ps.points[*a].clone(), ps.points[*b].clone());
                known.get(&key).cloned().unwrap_or_else(|| {
                    let (x, y) = (dy.intern(&key.0), dy.intern(&key.1));
                    dy.separation(x, y, self.horizon)
                })
            })
            .collect();
        self.pairs = ps;
    }

    pub fn defect(&self, delta: &Rational) -> DefectReport {
        let mut rep =
            DefectReport { delta: delta.clone(), horizon: self.horizon, defect: Rational::zero(), witness: None, pairs: 0 };
        for ((a, b, d), (s, n)) in self.pairs.pairs.iter().zip(&self.seps) {
            if d > delta {
                continue;
            }
            rep.pairs += 1;
            if rep.witness.is_none() || s > &rep.defect {
                rep.defect = s.clone();
                rep.witness = Some((self.pairs.points[*a].clone(), self.pairs.points[*b].clone(), *n));
            }
        }
        if rep.defect.is_zero() {
            rep.witness = None;
        }
        rep
    }
}

/// Mesh pairs within `delta` plus spheres around every mesh point and center.
pub fn defect_pairs(tree: &MetricTree, mesh: &[TreePoint], centers: &[TreePoint], delta: &Rational) -> PairSet {
    let mut ps = PairSet::from_mesh(tree, mesh, delta);
    let radii = sphere_radii(delta, SPHERE_EXP);
    ps.add_spheres(tree, mesh, &radii);
    ps.add_spheres(tree, centers, &radii);
    ps.sort();
    ps
}

pub fn equicontinuity_defect(
    f: &PLSelfMap,
    delta: &Rational,
    horizon: usize,
    grid_resolution: &Rational,
) -> Result<DefectReport> {
    if !delta.is_positive() {
        return Err(Error::InvalidParam(format!("delta {delta} must be positive")));
    }
    if horizon == 0 {
        return Err(Error::InvalidParam("horizon must be at least 1".into()));
    }
    let mesh = f.tree().mesh(grid_resolution)?;
    let pairs = defect_pairs(f.tree(), &mesh, &[], delta);
    let mut dy = Dynamics::new(f);
    Ok(SeparationTable::build(&mut dy, pairs, horizon)?.defect(delta))
}

/// Defect at every scale of a schedule from one shared pair evaluation.
pub fn defect_curve(f: &PLSelfMap, schedule: &[Rational], horizon: usize, grid_resolution: &Rational) -> Result<Vec<DefectReport>> {
    let Some(max) = schedule.iter().max() else {
        return Err(Error::InvalidParam("delta schedule is empty".into()));
    };
    let mesh = f.tree().mesh(grid_resolution)?;
    let pairs = defect_pairs(f.tree(), &mesh, &[], max);
    let mut dy = Dynamics::new(f);
    let table = SeparationTable::build(&mut dy, pairs, horizon)?;
    Ok(schedule.iter().map(|d| table.defect(d)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalCriterion {
    pub fix_f2: FixedSet,
    pub fix_f2_connected: bool,
    pub eventual_image: EventualImage,
    /// Exact comparison, available when the eventual image stabilized.
    pub equals_eventual_image: Option<bool>,
    /// Hausdorff distance between the last computed image and `Fix(f²)`.
    pub residual: Option<Rational>,
}

pub fn interval_criterion(f: &PLSelfMap, max_iter: usize) -> Result<IntervalCriterion> {
    let tree = f.tree();
    if tree.num_edges() != 1 {
        return Err(Error::InvalidParam(format!(
            "interval criterion needs a single-edge tree, got {} edges",
            tree.num_edges()
        )));
    }
    let fix_f2 = f.fixed_points(2)?;
    let ev = f.eventual_image(max_iter)?;
    let equals = ev.stabilized.then(|| ev.j == fix_f2);
    let residual = ev.j.hausdorff(tree, &fix_f2);
    Ok(IntervalCriterion {
        fix_f2_connected: fix_f2.is_connected(tree),
        fix_f2,
        eventual_image: ev,
        equals_eventual_image: equals,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WanderingViolation {
    pub component: Region,
    pub m: usize,
    /// A point of `W ∩ f^m(W)`.
    pub point: TreePoint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WanderingReport {
    pub injective: bool,
    pub components: usize,
    pub violations: Vec<WanderingViolation>,
}

/// For each component `W` of the complement of `per_closure`, checks
/// `f^m(W) ∩ W = ∅` for `1 <= m <= n` using exact images of the closure.
pub fn wandering_component_check(f: &PLSelfMap, per_closure: &Region, n: usize) -> WanderingReport {
    let tree = f.tree();
    let comps = per_closure.complement_components(tree);
    let mut rep = WanderingReport { injective: f.injectivity().injective, components: comps.len(), violations: vec![] };
    for c in comps {
        let boundary: HashSet<&TreePoint> = c.boundary.iter().collect();
        let mut img = c.closure.clone();
        let mut bimg: Vec<TreePoint> = c.boundary.clone();
        for m in 1..=n {
            img = f.image(&img);
            bimg = bimg.iter().map(|b| f.apply(b)).collect();
            let meet = img.intersection(tree, &c.closure);
            let hit = meet.pieces(tree).into_iter().find_map(|pc| match pc {
                Piece::Segment { edge, lo, hi } => Some(TreePoint::on_edge(tree, edge, (lo + hi) * Rational::new(1, 2))),
                Piece::Point(p) => (!boundary.contains(&p) && !bimg.contains(&p)).then_some(p),
            });
            if let Some(point) = hit {
                rep.violations.push(WanderingViolation { component: c.closure.clone(), m, point });
                break;
            }
        }
    }
    rep
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Holds,
    Fails,
    Undetermined,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Holds => "holds",
            Status::Fails => "fails",
            Status::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckParams {
    pub limits: LimitParams,
    pub eps_eq: Rational,
    pub horizon: usize,
    pub max_period: usize,
    pub set_tolerance: Rational,
    pub mesh: Rational,
    pub max_iter: usize,
    pub breakpoint_cap: usize,
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams {
            limits: LimitParams::default(),
            eps_eq: Rational::new(1, 100),
            horizon: 1024,
            max_period: 64,
            set_tolerance: Rational::new(1, 256),
            mesh: Rational::new(1, 17),
            max_iter: 4096,
            breakpoint_cap: 100_000,
        }
    }
}

impl CheckParams {
    pub fn validate(&self) -> Result<()> {
        self.limits.validate()?;
        if !self.eps_eq.is_positive() || !self.set_tolerance.is_positive() || !self.mesh.is_positive() {
            return Err(Error::InvalidParam("tolerances and mesh must be positive".into()));
        }
        if self.horizon == 0 || self.max_period == 0 || self.max_iter == 0 {
            return Err(Error::InvalidParam("horizon, max_period and max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cond1 {
    pub status: Status,
    pub modulus_status: Status,
    pub modulus: Vec<ModulusReport>,
    pub per_closure_eq_j: Option<bool>,
    pub per_j_distance: Option<Rational>,
    pub per: Option<FixedSet>,
    /// Periods beyond `max_period` whose fixed sets were added from observed cycles.
    pub extra_periods: Vec<usize>,
    pub evidence: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cond2 {
    pub status: Status,
    pub omega_eq_omega_on_grid: bool,
    pub probes: usize,
    pub probes_scanned: usize,
    pub worst_distance: Rational,
    pub worst: Option<(TreePoint, OmegaWitness)>,
    pub confirmed: Option<(TreePoint, OmegaWitness)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cond3 {
    pub status: Status,
    pub curve: Vec<DefectReport>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaChecks {
    pub fixed_point_exists: bool,
    pub eventual_image_invariant: Option<bool>,
    /// `(m, Fix(f^m) connected)` for `m <= 4`, `None` when capped.
    pub fix_connected: Vec<(usize, Option<bool>)>,
    pub omega_totally_disconnected: Option<bool>,
    pub wandering: Option<WanderingReport>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremVerdict {
    pub cond1: Cond1,
    pub cond2: Cond2,
    pub cond3: Cond3,
    pub consistent: bool,
    pub contradictions: Vec<String>,
    pub eventual_image: EventualImage,
    pub lemmas: LemmaChecks,
    pub params: CheckParams,
    pub notes: Vec<String>,
}

impl TheoremVerdict {
    pub fn statuses(&self) -> [Status; 3] {
        [self.cond1.status, self.cond2.status, self.cond3.status]
    }
}

/// Decides a scale-stamped quantity: small at the finest scale holds; large and
/// not shrinking with the scale fails.
fn scale_status(finest: &Rational, previous: Option<&Rational>, hold: &Rational) -> Status {
    if finest <= hold {
        return Status::Holds;
    }
    let three = Rational::from_int(3);
    let fail = finest > &(hold * &three) && previous.is_none_or(|p| finest * &Rational::from_int(4) >= p * &three);
    if fail { Status::Fails } else { Status::Undetermined }
}

fn piece_points(tree: &MetricTree, set: &Region) -> Vec<TreePoint> {
    let mut out = Vec::new();
    for pc in set.pieces(tree) {
        match pc {
            Piece::Point(p) => out.push(p),
            Piece::Segment { edge, lo, hi } => {
                out.push(TreePoint::on_edge(tree, edge, lo));
                out.push(TreePoint::on_edge(tree, edge, hi));
            }
        }
    }
    out
}

pub fn theorem_check(f: &PLSelfMap, params: &CheckParams) -> Result<TheoremVerdict> {
    params.validate()?;
    let tree = f.tree();
    let lp = &params.limits;
    let schedule = &lp.delta_schedule;
    let eps = &lp.epsilon;
    let mut notes = Vec::new();
    if params.horizon < lp.horizon() {
        notes.push(format!(
            "defect horizon {} is shorter than the limit-set horizon {}; cross-condition bounds are weaker",
            params.horizon,
            lp.horizon()
        ));
    }

    // Exact sets.
    let ev = f.eventual_image(params.max_iter)?;
    let fix1 = f.fixed_set();
    let mut fix_connected = Vec::new();
    let mut fix2 = None;
    for m in 1..=4 {
        match f.fixed_points_with_cap(m, params.breakpoint_cap) {
            Ok(s) => {
                fix_connected.push((m, Some(s.is_connected(tree))));
                if m == 2 {
                    fix2 = Some(s);
                }
            }
            Err(e) if e.is_resource() => {
                notes.push(format!("Fix(f^{m}): {e}"));
                fix_connected.push((m, None));
            }
            Err(e) => return Err(e),
        }
    }
    let mut special = piece_points(tree, &fix1);
    if let Some(s) = &fix2 {
        special.extend(piece_points(tree, s));
    }
    let special = dedup_points(special);

    let mesh = tree.mesh(&params.mesh)?;
    let dmax = schedule[0].clone();
    let pairs = defect_pairs(tree, &mesh, &special, &dmax);
    let mut est = Estimator::new(f, lp.clone())?;
    let mut table = SeparationTable::build(est.dynamics(), pairs, params.horizon)?;

    let n = schedule.len();
    let prev = |v: &[Rational]| if n >= 2 { Some(v[n - 2].clone()) } else { None };

    // Condition (3): the defect curve.
    let curve: Vec<DefectReport> = schedule.iter().map(|d| table.defect(d)).collect();

    // Condition (1), first half: the ω modulus on the same pairs.
    let modulus: Vec<ModulusReport> = schedule.iter().map(|d| est.modulus(&table.pairs, d)).collect();
    est.dynamics().precision_check()?;

    // Condition (2): Ω witnesses at probe points, most suspicious first.
    let mut probes: Vec<TreePoint> = Vec::new();
    if let Some(w) = &curve[n - 1].witness {
        probes.push(w.0.clone());
        probes.push(w.1.clone());
    }
    if let Some(w) = &modulus[n - 1].witness {
        probes.push(w.0.clone());
        probes.push(w.1.clone());
    }
    probes.extend(special.iter().cloned());
    probes.extend(mesh.iter().cloned());
    let probes = dedup_points(probes);
    let defect_vals: Vec<Rational> = curve.iter().map(|r| r.defect.clone()).collect();
    let mod_vals: Vec<Rational> = modulus.iter().map(|r| r.max_h.clone()).collect();
    let pre3 = scale_status(&defect_vals[n - 1], prev(&defect_vals).as_ref(), &params.eps_eq);
    let pre_mod = scale_status(&mod_vals[n - 1], prev(&mod_vals).as_ref(), &params.eps_eq);
    // Only a Holds elsewhere makes a confirmed failure here matter.
    let need_full_scan = pre3 == Status::Holds || pre_mod == Status::Holds;
    let two_eps = eps * &Rational::from_int(2);
    let fail_threshold = (eps * &Rational::from_int(3)).max(&params.eps_eq + eps);
    let mut c2 = Cond2 {
        status: Status::Holds,
        omega_eq_omega_on_grid: true,
        probes: probes.len(),
        probes_scanned: 0,
        worst_distance: Rational::zero(),
        worst: None,
        confirmed: None,
    };
    for x in &probes {
        let big = est.big_omega(x)?;
        c2.probes_scanned += 1;
        let d = big.final_distance();
        if d > c2.worst_distance {
            c2.worst_distance = d.clone();
            c2.worst = big.scales.last().and_then(|s| s.witness.clone()).map(|w| (x.clone(), w));
        }
        if let Some(w) = big.confirmed(&fail_threshold) {
            c2.confirmed = Some((x.clone(), w.clone()));
            break;
        }
        if d > two_eps && !need_full_scan {
            break;
        }
    }
    c2.omega_eq_omega_on_grid = c2.worst_distance <= two_eps;
    c2.status = if c2.confirmed.is_some() {
        Status::Fails
    } else if c2.omega_eq_omega_on_grid && c2.probes_scanned == c2.probes {
        Status::Holds
    } else {
        Status::Undetermined
    };

    // A confirmed Ω witness is also a close pair for the defect and the modulus.
    let mut curve = curve;
    let mut modulus = modulus;
    if let Some((x, w)) = &c2.confirmed {
        table.add_pairs(est.dynamics(), tree, &[(x.clone(), w.sample.clone())]);
        curve = schedule.iter().map(|d| table.defect(d)).collect();
        modulus = schedule.iter().map(|d| est.modulus(&table.pairs, d)).collect();
        est.dynamics().precision_check()?;
    }
    let defect_vals: Vec<Rational> = curve.iter().map(|r| r.defect.clone()).collect();
    let mod_vals: Vec<Rational> = modulus.iter().map(|r| r.max_h.clone()).collect();
    let s3 = scale_status(&defect_vals[n - 1], prev(&defect_vals).as_ref(), &params.eps_eq);
    let s_mod = scale_status(&mod_vals[n - 1], prev(&mod_vals).as_ref(), &params.eps_eq);

    // Condition (1), second half: Per against J.
    let mut c1 = Cond1 {
        status: Status::Undetermined,
        modulus_status: s_mod,
        modulus,
        per_closure_eq_j: None,
        per_j_distance: None,
        per: None,
        extra_periods: Vec::new(),
        evidence: Vec::new(),
    };
    let mut per_status = Status::Undetermined;
    if s_mod == Status::Fails {
        c1.evidence.push(format!("omega modulus at finest scale is {}", mod_vals[n - 1]));
    } else if !ev.stabilized {
        c1.evidence.push(format!("eventual image did not stabilize within {} steps", params.max_iter));
    } else {
        match f.periodic_points_with_cap(params.max_period, params.breakpoint_cap) {
            Err(e) if e.is_resource() => c1.evidence.push(format!("periodic points: {e}")),
            Err(e) => return Err(e),
            Ok(pp) => {
                let mut per = pp.set;
                // Periods beyond the cap that are actually observed on J.
                let h = lp.horizon();
                let mut seen = HashSet::new();
                for p in ev.j.sample(tree, &params.mesh) {
                    let id = est.dynamics().intern(&p);
                    if let Some(c) = est.dynamics().cycle_info(id, h) {
                        if c.preperiod == 0 && c.period > params.max_period && seen.len() < 8 && seen.insert(c.period) {
                            match f.fixed_points_with_cap(c.period, params.breakpoint_cap) {
                                Ok(s) => {
                                    per = per.union(tree, &s);
                                    c1.extra_periods.push(c.period);
                                }
                                Err(e) if e.is_resource() => {
                                    c1.evidence.push(format!("Fix(f^{}): {e}", c.period));
                                }
                                Err(e) => return Err(e),
                            }
                        }
                    }
                }
                c1.extra_periods.sort();
                match per.hausdorff(tree, &ev.j) {
                    Some(hd) => {
                        let tol = &params.set_tolerance;
                        per_status = if &hd <= tol {
                            Status::Holds
                        } else if hd > tol * &Rational::from_int(3) {
                            Status::Fails
                        } else {
                            Status::Undetermined
                        };
                        c1.per_closure_eq_j = match per_status {
                            Status::Holds => Some(true),
                            Status::Fails => Some(false),
                            Status::Undetermined => None,
                        };
                        c1.per_j_distance = Some(hd);
                    }
                    None => c1.evidence.push("periodic set is empty".into()),
                }
                c1.per = Some(per);
            }
        }
    }
    c1.status = match (s_mod, per_status) {
        (Status::Fails, _) | (_, Status::Fails) => Status::Fails,
        (Status::Holds, Status::Holds) => Status::Holds,
        _ => Status::Undetermined,
    };
    let c3 = Cond3 { status: s3, curve };

    let mut contradictions = Vec::new();
    let named = [("(1)", c1.status), ("(2)", c2.status), ("(3)", c3.status)];
    for (a, sa) in named {
        for (b, sb) in named {
            if sa == Status::Holds && sb == Status::Fails {
                contradictions.push(format!("condition {a} holds but condition {b} fails"));
            }
        }
    }

    let omega_disc = if c2.status == Status::Holds {
        let mut all = true;
        for x in probes.iter().take(16) {
            let big = est.big_omega(x)?;
            all &= disconnection_check(tree, &big.set, &params.mesh).totally_disconnected;
        }
        Some(all)
    } else {
        None
    };
    let wandering = c1.per.as_ref().map(|per| wandering_component_check(f, per, params.max_period));
    let lemmas = LemmaChecks {
        fixed_point_exists: !fix1.is_empty(),
        eventual_image_invariant: ev.stabilized.then(|| f.image(&ev.j) == ev.j),
        fix_connected,
        omega_totally_disconnected: omega_disc,
        wandering,
    };
    Ok(TheoremVerdict {
        consistent: contradictions.is_empty(),
        cond1: c1,
        cond2: c2,
        cond3: c3,
        contradictions,
        eventual_image: ev,
        lemmas,
        params: params.clone(),
        notes,
    })
}
