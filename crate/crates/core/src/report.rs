//! Canonical JSON reports.
//!
//! Keys are sorted, rationals are `"p/q"` strings and points are
//! `{"vertex": id}` or `{"edge": id, "t": "p/q"}`. The same inputs give the
//! same bytes once timings are left out.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::equicontinuity::{
    CheckParams, DefectReport, IntervalCriterion, Status, TheoremVerdict, WanderingReport,
};
use crate::error::{Error, Result};
use crate::limits::{BigOmegaEstimate, CompactSetApprox, ModulusReport, OmegaWitness, SemicontinuityReport};
use crate::map::{EventualImage, InjectivityReport, PeriodicPoints};
use crate::rational::Rational;
use crate::region::{Piece, Region};
use crate::tree::{MetricTree, TreePoint};

pub const VERSION: &str = concat!("dendrite ", env!("CARGO_PKG_VERSION"));

/// The JSON schema reports conform to.
pub const SCHEMA: &str = include_str!("../schema/report.schema.json");

pub fn rat(r: &Rational) -> Value {
    Value::String(r.to_string())
}

pub fn opt_rat(r: Option<&Rational>) -> Value {
    r.map(rat).unwrap_or(Value::Null)
}

pub fn point(p: &TreePoint) -> Value {
    match p {
        TreePoint::Vertex(v) => json!({ "vertex": v }),
        TreePoint::Edge { edge, t } => json!({ "edge": edge, "t": t.to_string() }),
    }
}

pub fn points<'a>(ps: impl IntoIterator<Item = &'a TreePoint>) -> Value {
    let mut v: Vec<&TreePoint> = ps.into_iter().collect();
    v.sort();
    Value::Array(v.into_iter().map(point).collect())
}

pub fn region(tree: &MetricTree, r: &Region) -> Value {
    let mut pts = Vec::new();
    let mut segs = Vec::new();
    for p in r.pieces(tree) {
        match p {
            Piece::Point(p) => pts.push(point(&p)),
            Piece::Segment { edge, lo, hi } => segs.push(json!({ "edge": edge, "lo": rat(&lo), "hi": rat(&hi) })),
        }
    }
    json!({ "points": pts, "segments": segs, "connected": r.is_connected(tree), "length": rat(&r.length(tree)) })
}

pub fn status(s: Status) -> Value {
    Value::String(s.as_str().into())
}

pub fn compact(set: &CompactSetApprox) -> Value {
    json!({
        "points": points(&set.points),
        "resolution": rat(&set.resolution),
        "provenance": set.provenance,
    })
}

pub fn defect(r: &DefectReport) -> Value {
    json!({
        "delta": rat(&r.delta),
        "horizon": r.horizon,
        "defect": rat(&r.defect),
        "pairs": r.pairs,
        "witness": r.witness.as_ref().map(|(x, y, n)| json!({ "x": point(x), "y": point(y), "n": n })),
    })
}

pub fn modulus(r: &ModulusReport) -> Value {
    json!({
        "pair_distance": rat(&r.pair_distance),
        "max_h": rat(&r.max_h),
        "pairs": r.pairs,
        "witness": r.witness.as_ref().map(|(x, y)| json!([point(x), point(y)])),
    })
}

fn omega_witness(w: &OmegaWitness) -> Value {
    json!({ "sample": point(&w.sample), "n": w.n, "image": point(&w.image), "distance": rat(&w.distance) })
}

pub fn big_omega(b: &BigOmegaEstimate) -> Value {
    json!({
        "set": compact(&b.set),
        "final_distance": rat(&b.final_distance()),
        "scales": b.scales.iter().map(|s| json!({
            "delta": rat(&s.delta),
            "samples": s.samples,
            "witness_distance": rat(&s.witness_distance),
            "witness": s.witness.as_ref().map(omega_witness),
            "transient_reach": rat(&s.transient_reach),
        })).collect::<Vec<_>>(),
    })
}

pub fn eventual(tree: &MetricTree, e: &EventualImage) -> Value {
    json!({ "j": region(tree, &e.j), "stabilized": e.stabilized, "n_stable": e.n_stable })
}

pub fn periodic(tree: &MetricTree, p: &PeriodicPoints) -> Value {
    json!({
        "max_period": p.max_period,
        "connected": p.connected,
        "set": region(tree, &p.set),
    })
}

pub fn injectivity(r: &InjectivityReport) -> Value {
    let seg = |(e, a, b): &(usize, Rational, Rational)| json!({ "edge": e, "lo": rat(a), "hi": rat(b) });
    json!({
        "injective": r.injective,
        "collapsed": r.collapsed.iter().map(seg).collect::<Vec<_>>(),
        "interior_overlaps": r.interior_overlaps.iter().map(seg).collect::<Vec<_>>(),
        "boundary_overlaps": r.boundary_overlaps.iter().map(|(p, pre)| json!({ "image": point(p), "preimages": points(pre) })).collect::<Vec<_>>(),
    })
}

pub fn interval(tree: &MetricTree, c: &IntervalCriterion) -> Value {
    json!({
        "fix_f2": region(tree, &c.fix_f2),
        "fix_f2_connected": c.fix_f2_connected,
        "eventual_image": eventual(tree, &c.eventual_image),
        "equals_eventual_image": c.equals_eventual_image,
        "residual": opt_rat(c.residual.as_ref()),
    })
}

pub fn wandering(tree: &MetricTree, w: &WanderingReport) -> Value {
    json!({
        "injective": w.injective,
        "components": w.components,
        "violations": w.violations.iter().map(|v| json!({
            "component": region(tree, &v.component),
            "m": v.m,
            "point": point(&v.point),
        })).collect::<Vec<_>>(),
    })
}

pub fn semicontinuity(r: &SemicontinuityReport) -> Value {
    let list = |v: &[crate::limits::SemicontinuityViolation]| {
        v.iter().map(|s| json!({ "x": point(&s.x), "near": point(&s.near), "distance": rat(&s.distance) })).collect::<Vec<_>>()
    };
    json!({ "usc_violations": list(&r.usc_violations), "lsc_violations": list(&r.lsc_violations) })
}

pub fn params(p: &CheckParams) -> Value {
    json!({
        "transient": p.limits.transient,
        "window": p.limits.window,
        "epsilon": rat(&p.limits.epsilon),
        "delta_schedule": p.limits.delta_schedule.iter().map(rat).collect::<Vec<_>>(),
        "samples_per_delta": p.limits.samples_per_delta,
        "eps_eq": rat(&p.eps_eq),
        "horizon": p.horizon,
        "max_period": p.max_period,
        "set_tolerance": rat(&p.set_tolerance),
        "mesh": rat(&p.mesh),
        "max_iter": p.max_iter,
        "breakpoint_cap": p.breakpoint_cap,
    })
}

pub fn verdict(tree: &MetricTree, v: &TheoremVerdict) -> Value {
    let c1 = &v.cond1;
    let c2 = &v.cond2;
    let l = &v.lemmas;
    let ow = |w: &Option<(TreePoint, OmegaWitness)>| {
        w.as_ref().map(|(x, w)| json!({ "x": point(x), "witness": omega_witness(w) }))
    };
    json!({
        "consistent": v.consistent,
        "contradictions": v.contradictions,
        "cond1": {
            "status": status(c1.status),
            "modulus_status": status(c1.modulus_status),
            "omega_f_modulus": c1.modulus.iter().map(modulus).collect::<Vec<_>>(),
            "per_closure_eq_j": c1.per_closure_eq_j,
            "per_j_distance": opt_rat(c1.per_j_distance.as_ref()),
            "per": c1.per.as_ref().map(|p| region(tree, p)),
            "extra_periods": c1.extra_periods,
            "evidence": c1.evidence,
        },
        "cond2": {
            "status": status(c2.status),
            "omega_eq_omega_on_grid": c2.omega_eq_omega_on_grid,
            "probes": c2.probes,
            "probes_scanned": c2.probes_scanned,
            "worst_distance": rat(&c2.worst_distance),
            "worst": ow(&c2.worst),
            "confirmed": ow(&c2.confirmed),
        },
        "cond3": {
            "status": status(v.cond3.status),
            "curve": v.cond3.curve.iter().map(defect).collect::<Vec<_>>(),
        },
        "eventual_image": eventual(tree, &v.eventual_image),
        "lemmas": {
            "fixed_point_exists": l.fixed_point_exists,
            "eventual_image_invariant": l.eventual_image_invariant,
            "fix_connected": l.fix_connected.iter().map(|(m, c)| json!({ "m": m, "connected": c })).collect::<Vec<_>>(),
            "omega_totally_disconnected": l.omega_totally_disconnected,
            "wandering": l.wandering.as_ref().map(|w| wandering(tree, w)),
        },
        "tolerances": params(&v.params),
        "notes": v.notes,
    })
}

/// A report under construction.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub system: Value,
    pub parameters: Value,
    pub results: BTreeMap<String, Value>,
    pub errors: BTreeMap<String, String>,
    pub status: String,
    /// Wall-clock microseconds per analysis.
    pub timings: BTreeMap<String, u64>,
}

impl Report {
    pub fn new(command: &str, system: Value, parameters: Value) -> Self {
        Report {
            command: command.into(),
            system,
            parameters,
            results: BTreeMap::new(),
            errors: BTreeMap::new(),
            status: "ok".into(),
            timings: BTreeMap::new(),
        }
    }

    pub fn to_value(&self, timings: bool) -> Value {
        let mut m = Map::new();
        m.insert("version".into(), Value::String(VERSION.into()));
        m.insert("command".into(), Value::String(self.command.clone()));
        m.insert("system".into(), self.system.clone());
        m.insert("parameters".into(), self.parameters.clone());
        m.insert("results".into(), Value::Object(self.results.clone().into_iter().collect()));
        m.insert(
            "errors".into(),
            Value::Object(self.errors.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect()),
        );
        m.insert("status".into(), Value::String(self.status.clone()));
        if timings {
            m.insert("timings_us".into(), Value::Object(self.timings.iter().map(|(k, v)| (k.clone(), json!(v))).collect()));
        }
        Value::Object(m)
    }

    /// Pretty-printed canonical JSON with a trailing newline.
    pub fn to_json(&self, timings: bool) -> String {
        to_canonical(&self.to_value(timings))
    }
}

pub fn to_canonical(v: &Value) -> String {
    // serde_json keeps object keys in a BTreeMap, so output order is sorted.
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

pub fn write_report(text: &str, path: &Path) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.display().to_string(), msg: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        assert_eq!(point(&TreePoint::Vertex(3)).to_string(), r#"{"vertex":3}"#);
        assert_eq!(point(&TreePoint::Edge { edge: 1, t: Rational::new(2, 4) }).to_string(), r#"{"edge":1,"t":"1/2"}"#);
        assert_eq!(rat(&Rational::from_int(2)), json!("2/1"));
        let r = Report::new("fixed", json!({"b": 1, "a": 2}), json!({}));
        let s = r.to_json(false);
        assert!(s.ends_with("}\n"));
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.find("\"command\"").unwrap() < s.find("\"errors\"").unwrap());
        assert!(!s.contains("timings_us"));
        assert!(r.to_json(true).contains("timings_us"));
    }

    #[test]
    fn schema_is_json() {
        let v: Value = serde_json::from_str(SCHEMA).unwrap();
        assert_eq!(v["type"], "object");
    }
}
