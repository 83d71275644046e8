//! Named systems: finite truncations of classical dendrite examples, interval
//! maps, small star rotations and seeded random systems.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::sphere;
use crate::map::{EdgePlan, PLSelfMap};
use crate::rational::Rational;
use crate::tree::{MetricTree, TreePoint};

/// Largest word length for the odometer and fan families.
pub const MAX_ODOMETER_LEVEL: usize = 12;
/// Largest word length for the Nadler tree family.
pub const MAX_NADLER_LEVEL: usize = 10;

/// A built system with its provenance.
#[derive(Debug, Clone)]
pub struct System {
    pub name: String,
    pub level: u64,
    pub map: PLSelfMap,
    pub notes: Vec<String>,
    /// The three-condition equivalence is not claimed for this system.
    pub fan_mode: bool,
}

impl System {
    fn new(name: &str, level: u64, map: PLSelfMap, notes: &[&str]) -> Self {
        System { name: name.into(), level, map, notes: notes.iter().map(|s| s.to_string()).collect(), fan_mode: false }
    }

    pub fn tree(&self) -> &MetricTree {
        self.map.tree()
    }

    pub fn spec(&self) -> String {
        format!("example:{}:{}", self.name, self.level)
    }
}

/// A family of systems indexed by a level.
pub struct TruncationFamily {
    pub name: &'static str,
    pub notes: &'static str,
    pub min_level: u64,
    pub max_level: u64,
    pub build: fn(u64) -> Result<System>,
}

pub fn families() -> Vec<TruncationFamily> {
    vec![
        TruncationFamily {
            name: "shift_star",
            notes: "arm shift on a star whose top arm collapses to the center; non-equicontinuity appears only as the growth of the defect with the level",
            min_level: 1,
            max_level: 64,
            build: |k| make_shift_star(k as usize).map(|m| System::new("shift_star", k, m, SHIFT_NOTES)),
        },
        TruncationFamily {
            name: "odometer",
            notes: "adding machine acting on 2^k unit legs at a hub",
            min_level: 1,
            max_level: MAX_ODOMETER_LEVEL as u64,
            build: |k| make_odometer_path(k as usize).map(|m| System::new("odometer", k, m, ODOMETER_NOTES)),
        },
        TruncationFamily {
            name: "cantor_fan",
            notes: "leg rotation of a finite fan fixing the vertex v",
            min_level: 1,
            max_level: MAX_ODOMETER_LEVEL as u64,
            build: |k| {
                make_cantor_fan(k as usize).map(|m| {
                    let mut s = System::new("cantor_fan", k, m, FAN_NOTES);
                    s.fan_mode = true;
                    s
                })
            },
        },
        TruncationFamily {
            name: "nadler",
            notes: "binary height tree with the odometer acting on each level",
            min_level: 1,
            max_level: MAX_NADLER_LEVEL as u64,
            build: |k| make_nadler_tree(k as usize).map(|m| System::new("nadler", k, m, NADLER_NOTES)),
        },
        TruncationFamily {
            name: "random",
            notes: "seeded random system with 6 vertices and at most 4 breakpoints per edge; the level is the seed",
            min_level: 0,
            max_level: u64::MAX,
            build: |seed| random_system(seed, 6, 4).map(|m| System::new("random", seed, m, &[])),
        },
    ]
}

const SHIFT_NOTES: &[&str] = &[
    "finite level: the top arm collapses to p, so f is not injective and the eventual image is {p}",
    "the homeomorphism property and Omega(p) = X hold only in the limit; the defect at delta = 1/(k+1) grows to the unit arm length",
];
const ODOMETER_NOTES: &[&str] = &["every non-hub point has minimal period 2^k"];
const FAN_NOTES: &[&str] = &[
    "fan mode - theorem not claimed",
    "|Per(f)| = 1 holds only in the limit; at level k every point is periodic with period dividing 2^k",
];
const NADLER_NOTES: &[&str] = &[
    "level-n segments span heights 1/(n+2) to 1/(n+1), with length equal to the height difference",
    "every point is periodic with period dividing 2^k",
];

fn classic(name: &str) -> Option<PLSelfMap> {
    let t = Arc::new(MetricTree::new(vec!["0".into(), "1".into()], vec![(0, 1, Rational::one())]).ok()?);
    let at = |s: &str| TreePoint::on_edge(&t, 0, s.parse().expect("literal"));
    let plan = |pts: &[(&str, &str)]| EdgePlan {
        breaks: pts.iter().map(|(b, _)| b.parse().expect("literal")).collect(),
        images: pts.iter().map(|(_, i)| at(i)).collect(),
    };
    let (plan, v0, v1) = match name {
        "tent" => (plan(&[("0", "0"), ("1/2", "1"), ("1", "0")]), "0", "0"),
        "half" => (plan(&[("0", "0"), ("1", "1/2")]), "0", "1/2"),
        "identity" => (plan(&[("0", "0"), ("1", "1")]), "0", "1"),
        "bump" => (plan(&[("0", "0"), ("1/3", "2/3"), ("2/3", "2/3"), ("1", "1/3")]), "0", "1/3"),
        _ => return None,
    };
    PLSelfMap::new(t.clone(), vec![at(v0), at(v1)], vec![plan]).ok()
}

/// Tent, `x/2`, identity and a plateau bump on the unit interval.
pub fn make_interval_classics() -> Vec<(String, PLSelfMap)> {
    ["tent", "half", "identity", "bump"]
        .iter()
        .map(|n| (n.to_string(), classic(n).expect("classic maps are valid")))
        .collect()
}

fn star(center: &str, arms: Vec<(String, Rational)>) -> Result<Arc<MetricTree>> {
    let mut labels = vec![center.to_string()];
    let mut edges = Vec::new();
    for (i, (label, len)) in arms.into_iter().enumerate() {
        labels.push(label);
        edges.push((0, i + 1, len));
    }
    Ok(Arc::new(MetricTree::new(labels, edges)?))
}

/// Star with center `p` and arms `n = -k..=k`; arm `n` goes onto arm `n+1`
/// fraction by fraction and the top arm collapses to `p`.
pub fn make_shift_star(k: usize) -> Result<PLSelfMap> {
    if k == 0 {
        return Err(Error::InvalidParam("shift_star level must be at least 1".into()));
    }
    let k = k as i64;
    let arms = (-k..=k)
        .map(|n| {
            let len = if n >= 0 { Rational::new(1, n + 1) } else { Rational::new(1, 1 - n) };
            (format!("a{n}"), len)
        })
        .collect();
    let tree = star("p", arms)?;
    let tip = |n: i64| TreePoint::Vertex((n + k + 1) as usize);
    let p = TreePoint::Vertex(0);
    let mut vimg = vec![p.clone()];
    let mut plans = Vec::new();
    for n in -k..=k {
        let to = if n < k { tip(n + 1) } else { p.clone() };
        vimg.push(to.clone());
        plans.push(EdgePlan::linear(p.clone(), to));
    }
    PLSelfMap::new(tree, vimg, plans)
}

fn word(i: usize, k: usize) -> String {
    (0..k).map(|b| if i >> b & 1 == 1 { '1' } else { '0' }).collect()
}

fn leg_rotation(hub: &str, k: usize) -> Result<PLSelfMap> {
    if k == 0 {
        return Err(Error::InvalidParam("level must be at least 1".into()));
    }
    if k > MAX_ODOMETER_LEVEL {
        return Err(Error::resource("odometer level", MAX_ODOMETER_LEVEL as u64));
    }
    let m = 1usize << k;
    let tree = star(hub, (0..m).map(|i| (format!("w{}", word(i, k)), Rational::one())).collect())?;
    let h = TreePoint::Vertex(0);
    let next = |i: usize| TreePoint::Vertex((i + 1) % m + 1);
    let mut vimg = vec![h.clone()];
    let mut plans = Vec::new();
    for i in 0..m {
        vimg.push(next(i));
        plans.push(EdgePlan::linear(h.clone(), next(i)));
    }
    PLSelfMap::new(tree, vimg, plans)
}

/// Hub `h` with `2^k` unit legs labelled by words `w_1…w_k`; the map adds one
/// with carry (from `w_1`) and moves legs isometrically.
pub fn make_odometer_path(k: usize) -> Result<PLSelfMap> {
    leg_rotation("h", k)
}

/// The finite fan: same legs and rotation as the odometer, vertex `v`.
pub fn make_cantor_fan(k: usize) -> Result<PLSelfMap> {
    leg_rotation("v", k)
}

/// Binary tree of heights: trunk from `top` (height 1) to `root` (height 1/2),
/// then for each word `w` of length `n <= k` a segment from the node of its
/// prefix (height `1/(n+1)`) down to height `1/(n+2)`. The odometer acts on
/// words of every length at once.
pub fn make_nadler_tree(k: usize) -> Result<PLSelfMap> {
    if k == 0 {
        return Err(Error::InvalidParam("nadler level must be at least 1".into()));
    }
    if k > MAX_NADLER_LEVEL {
        return Err(Error::resource("nadler level", MAX_NADLER_LEVEL as u64));
    }
    // Vertex of the word of length n and value i: 2^n + i (root is 1, top is 0).
    let id = |n: usize, i: usize| (1usize << n) + i;
    let mut labels = vec!["top".to_string(), "root".to_string()];
    let mut edges = vec![(0, 1, Rational::new(1, 2))];
    for n in 1..=k {
        let len = Rational::new(1, ((n + 1) * (n + 2)) as i64);
        for i in 0..1usize << n {
            labels.push(format!("w{}", word(i, n)));
            edges.push((id(n - 1, i & ((1 << (n - 1)) - 1)), id(n, i), len.clone()));
        }
    }
    let tree = Arc::new(MetricTree::new(labels, edges.clone())?);
    let mut vimg = vec![TreePoint::Vertex(0), TreePoint::Vertex(1)];
    for n in 1..=k {
        for i in 0..1usize << n {
            vimg.push(TreePoint::Vertex(id(n, (i + 1) % (1 << n))));
        }
    }
    let plans = edges
        .iter()
        .map(|(a, b, _)| EdgePlan::linear(vimg[*a].clone(), vimg[*b].clone()))
        .collect();
    PLSelfMap::new(tree, vimg, plans)
}

fn y_star() -> Arc<MetricTree> {
    star("c", ["a", "b", "d"].iter().map(|s| (s.to_string(), Rational::one())).collect()).expect("valid star")
}

/// Rotation of three unit arms: every point is periodic.
pub fn make_y_rotation() -> PLSelfMap {
    let y = y_star();
    let v = TreePoint::Vertex;
    let lin = |a, b| EdgePlan::linear(v(a), v(b));
    PLSelfMap::new(y, vec![v(0), v(2), v(3), v(1)], vec![lin(0, 2), lin(0, 3), lin(0, 1)]).expect("valid map")
}

/// Two arms fixed, the third collapsed onto the center.
pub fn make_y_collapse() -> PLSelfMap {
    let y = y_star();
    let v = TreePoint::Vertex;
    let lin = |a, b| EdgePlan::linear(v(a), v(b));
    PLSelfMap::new(y, vec![v(0), v(1), v(2), v(0)], vec![lin(0, 1), lin(0, 2), lin(0, 0)]).expect("valid map")
}

/// Random tree by attachment with edge lengths in `{1/8, …, 1}` and a random
/// continuous map that sends the `1/8`-lattice to itself with integer slopes.
pub fn random_system(seed: u64, n_vertices: usize, max_breakpoints: usize) -> Result<PLSelfMap> {
    if n_vertices < 2 {
        return Err(Error::InvalidParam("random systems need at least 2 vertices".into()));
    }
    if max_breakpoints == 0 {
        return Err(Error::InvalidParam("max_breakpoints must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(n_vertices - 1);
    let mut cells = Vec::with_capacity(n_vertices - 1);
    for i in 1..n_vertices {
        let j = rng.gen_range(0..i);
        let c = rng.gen_range(1..=8i64);
        edges.push((j, i, Rational::new(c, 8)));
        cells.push(c);
    }
    let tree = Arc::new(MetricTree::from_edges(n_vertices, edges.clone())?);
    let mut lattice: Vec<TreePoint> = (0..n_vertices).map(TreePoint::Vertex).collect();
    for (e, &c) in cells.iter().enumerate() {
        lattice.extend((1..c).map(|j| TreePoint::Edge { edge: e, t: Rational::new(j, c) }));
    }
    let vimg: Vec<TreePoint> = (0..n_vertices).map(|_| lattice[rng.gen_range(0..lattice.len())].clone()).collect();
    let mut plans = Vec::with_capacity(edges.len());
    for (e, &(a, b, _)) in edges.iter().enumerate() {
        let c = cells[e];
        // The last cell is its own piece so the final slope is an integer too.
        let mut cuts: Vec<i64> = Vec::new();
        if c >= 2 {
            let free = (c - 2) as usize;
            let count = rng.gen_range(0..=free.min(max_breakpoints - 1));
            cuts.extend(sample(&mut rng, free, count).into_iter().map(|j| j as i64 + 1));
            cuts.push(c - 1);
            cuts.sort();
        }
        let mut breaks = vec![Rational::zero()];
        let mut images = vec![vimg[a].clone()];
        let mut prev = 0i64;
        for &cut in &cuts {
            let width = cut - prev;
            let cur = images.last().expect("nonempty").clone();
            let mut slope = if rng.gen_ratio(1, 3) { 0 } else { rng.gen_range(1..=3i64) };
            let next = loop {
                if slope == 0 {
                    break cur.clone();
                }
                let r = Rational::new(slope * width, 8);
                let ring: Vec<TreePoint> =
                    sphere(&tree, &cur, &r).into_iter().filter(|q| tree.distance(&cur, q) == r).collect();
                if !ring.is_empty() {
                    break ring[rng.gen_range(0..ring.len())].clone();
                }
                slope -= 1;
            };
            breaks.push(Rational::new(cut, c));
            images.push(next);
            prev = cut;
        }
        breaks.push(Rational::one());
        images.push(vimg[b].clone());
        plans.push(EdgePlan { breaks, images });
    }
    PLSelfMap::new(tree, vimg, plans)
}

/// Builds `name` at `level`; single systems ignore the level.
pub fn by_name(name: &str, level: u64) -> Result<System> {
    if let Some(fam) = families().into_iter().find(|f| f.name == name) {
        if level < fam.min_level {
            return Err(Error::InvalidParam(format!("level {level} is below {} for `{name}`", fam.min_level)));
        }
        if level > fam.max_level {
            return Err(Error::resource(format!("{name} level"), fam.max_level));
        }
        return (fam.build)(level);
    }
    let map = match name {
        "y_rotation" => make_y_rotation(),
        "y_collapse" => make_y_collapse(),
        other => classic(other).ok_or_else(|| Error::InvalidParam(format!("unknown example `{other}`")))?,
    };
    Ok(System::new(name, level, map, &[]))
}

/// Parses `example:<name>[:<level>]`.
pub fn parse_spec(spec: &str) -> Option<Result<System>> {
    let rest = spec.strip_prefix("example:")?;
    let mut it = rest.splitn(2, ':');
    let name = it.next().unwrap_or_default();
    let level = match it.next() {
        None => Ok(1),
        Some(l) => l.parse::<u64>().map_err(|_| Error::InvalidParam(format!("bad level `{l}` in `{spec}`"))),
    };
    Some(level.and_then(|l| by_name(name, l)))
}

pub fn names() -> Vec<&'static str> {
    let mut v: Vec<&'static str> = families().iter().map(|f| f.name).collect();
    v.extend(["tent", "half", "identity", "bump", "y_rotation", "y_collapse"]);
    v
}
