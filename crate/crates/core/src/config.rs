//! Plain-text system configuration.
//!
//! ```text
//! name = tent
//!
//! [tree]
//! vertices = a b
//! a b 1/1
//!
//! [map]
//! a -> @a
//! b -> @a
//! 0 : 0=@a, 1/2=@b, 1=@a
//!
//! [analysis]
//! epsilon = 1/1000
//! delta_schedule = 1/8, 1/16, 1/32
//! ```
//!
//! Points are written `@label` for a vertex or `edge:p/q` for an edge
//! fraction. Edges are numbered in the order they are listed. An edge
//! without a plan line maps linearly onto the geodesic between the images
//! of its endpoints.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::equicontinuity::CheckParams;
use crate::error::{Error, Result};
use crate::map::{display_point, EdgePlan, PLSelfMap};
use crate::rational::Rational;
use crate::tree::{MetricTree, TreePoint};

/// Analyses the `analyze` battery knows about.
pub const ANALYSES: [&str; 6] = ["fixed", "eventual_image", "interval", "defect", "limits", "theorem"];

/// Optional overrides from the `[analysis]` section.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnalysisConfig {
    pub transient: Option<usize>,
    pub window: Option<usize>,
    pub epsilon: Option<Rational>,
    pub delta_schedule: Option<Vec<Rational>>,
    pub samples_per_delta: Option<usize>,
    pub eps_eq: Option<Rational>,
    pub horizon: Option<usize>,
    pub max_period: Option<usize>,
    pub set_tolerance: Option<Rational>,
    pub mesh: Option<Rational>,
    pub max_iter: Option<usize>,
    pub breakpoint_cap: Option<usize>,
    pub seed: Option<u64>,
    pub analyses: Option<Vec<String>>,
}

impl AnalysisConfig {
    pub fn is_empty(&self) -> bool {
        *self == AnalysisConfig::default()
    }

    /// Overwrites the fields of `p` that are set here.
    pub fn apply(&self, p: &mut CheckParams) {
        if let Some(v) = self.transient {
            p.limits.transient = v;
        }
        if let Some(v) = self.window {
            p.limits.window = v;
        }
        if let Some(v) = &self.epsilon {
            p.limits.epsilon = v.clone();
        }
        if let Some(v) = &self.delta_schedule {
            p.limits.delta_schedule = v.clone();
        }
        if let Some(v) = self.samples_per_delta {
            p.limits.samples_per_delta = v;
        }
        if let Some(v) = &self.eps_eq {
            p.eps_eq = v.clone();
        }
        if let Some(v) = self.horizon {
            p.horizon = v;
        }
        if let Some(v) = self.max_period {
            p.max_period = v;
        }
        if let Some(v) = &self.set_tolerance {
            p.set_tolerance = v.clone();
        }
        if let Some(v) = &self.mesh {
            p.mesh = v.clone();
        }
        if let Some(v) = self.max_iter {
            p.max_iter = v;
        }
        if let Some(v) = self.breakpoint_cap {
            p.breakpoint_cap = v;
        }
    }

    /// Copies fields set in `other` over this one.
    pub fn merge(&mut self, other: &AnalysisConfig) {
        macro_rules! take {
            ($($f:ident),*) => {
                $(if other.$f.is_some() {
                    self.$f = other.$f.clone();
                })*
            };
        }
        take!(
            transient,
            window,
            epsilon,
            delta_schedule,
            samples_per_delta,
            eps_eq,
            horizon,
            max_period,
            set_tolerance,
            mesh,
            max_iter,
            breakpoint_cap,
            seed,
            analyses
        );
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub name: Option<String>,
    pub map: PLSelfMap,
    pub analysis: AnalysisConfig,
}

impl SystemConfig {
    pub fn tree(&self) -> &MetricTree {
        self.map.tree()
    }
}

fn perr(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col, msg: msg.into() }
}

/// A token with its 1-based column in the source line.
#[derive(Debug, Clone, Copy)]
struct Tok<'a> {
    text: &'a str,
    col: usize,
}

fn tokens(line: &str) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Tok { text: &line[s..i], col: line[..s].chars().count() + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Tok { text: &line[s..], col: line[..s].chars().count() + 1 });
    }
    out
}

fn col_of(line: &str, sub: &str) -> usize {
    let off = sub.as_ptr() as usize - line.as_ptr() as usize;
    line[..off].chars().count() + 1
}

fn valid_label(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || "@:=,#[]".contains(c)) && !s.contains("->")
}

fn parse_rational(s: &str, line: usize, col: usize) -> Result<Rational> {
    s.trim().parse::<Rational>().map_err(|e| perr(line, col, e.to_string()))
}

fn parse_usize(s: &str, line: usize, col: usize) -> Result<usize> {
    s.trim().parse::<usize>().map_err(|_| perr(line, col, format!("expected a nonnegative integer, found `{}`", s.trim())))
}

/// Parses `@label` or `edge:p/q` against the tree's labels and edge count.
pub fn parse_point(tree: &MetricTree, s: &str) -> std::result::Result<TreePoint, String> {
    let s = s.trim();
    if let Some(label) = s.strip_prefix('@') {
        return tree.vertex_by_label(label).map(TreePoint::Vertex).ok_or_else(|| format!("unknown vertex `{label}`"));
    }
    let (e, t) = s.split_once(':').ok_or_else(|| format!("expected `@vertex` or `edge:p/q`, found `{s}`"))?;
    let edge: usize = e.trim().parse().map_err(|_| format!("bad edge id `{}`", e.trim()))?;
    if edge >= tree.num_edges() {
        return Err(format!("unknown edge {edge}"));
    }
    let t: Rational = t.trim().parse().map_err(|e: crate::rational::ParseRationalError| e.to_string())?;
    if t.is_negative() || t > Rational::one() {
        return Err(format!("edge fraction {t} is outside [0, 1]"));
    }
    Ok(TreePoint::on_edge(tree, edge, t))
}

#[derive(PartialEq, Clone, Copy)]
enum Section {
    Top,
    Tree,
    Map,
    Analysis,
}

struct PendingPlan {
    line: usize,
    col: usize,
    breaks: Vec<(Rational, String, usize)>,
}

/// Parses configuration text into a validated system.
pub fn parse_config(text: &str) -> Result<SystemConfig> {
    let mut section = Section::Top;
    let mut seen_sections: Vec<&str> = Vec::new();
    let mut name = None;
    let mut labels: Option<(Vec<String>, usize)> = None;
    let mut edges: Vec<(usize, usize, Rational)> = Vec::new();
    let mut images: HashMap<usize, (String, usize, usize)> = HashMap::new();
    let mut plans: HashMap<usize, PendingPlan> = HashMap::new();
    let mut analysis = AnalysisConfig::default();

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        };
        let body = line.trim();
        if body.is_empty() {
            continue;
        }
        let indent = col_of(raw, body);
        if let Some(rest) = body.strip_prefix('[') {
            let Some(sec) = rest.strip_suffix(']') else {
                return Err(perr(ln, indent, "unterminated section header"));
            };
            let sec = sec.trim();
            section = match sec {
                "tree" => Section::Tree,
                "map" => Section::Map,
                "analysis" => Section::Analysis,
                other => return Err(perr(ln, indent, format!("unknown section `[{other}]`"))),
            };
            if seen_sections.contains(&sec) {
                return Err(perr(ln, indent, format!("section `[{sec}]` appears twice")));
            }
            if section == Section::Map && labels.is_none() {
                return Err(perr(ln, indent, "`[map]` must follow a `[tree]` section with vertices"));
            }
            seen_sections.push(sec);
            continue;
        }
        match section {
            Section::Top => {
                let (k, v) = body.split_once('=').ok_or_else(|| perr(ln, indent, "expected `name = ...` or a section header"))?;
                if k.trim() != "name" {
                    return Err(perr(ln, indent, format!("unknown key `{}` outside a section", k.trim())));
                }
                name = Some(v.trim().to_string());
            }
            Section::Tree => {
                if let Some((k, v)) = body.split_once('=') {
                    if k.trim() != "vertices" {
                        return Err(perr(ln, indent, format!("unknown key `{}` in [tree]", k.trim())));
                    }
                    if labels.is_some() {
                        return Err(perr(ln, indent, "vertices listed twice"));
                    }
                    let mut ls = Vec::new();
                    for t in tokens(v) {
                        let col = col_of(raw, v) + t.col - 1;
                        if !valid_label(t.text) {
                            return Err(perr(ln, col, format!("invalid vertex label `{}`", t.text)));
                        }
                        if ls.iter().any(|l| l == t.text) {
                            return Err(perr(ln, col, format!("duplicate vertex `{}`", t.text)));
                        }
                        ls.push(t.text.to_string());
                    }
                    labels = Some((ls, ln));
                    continue;
                }
                let Some((ls, _)) = &labels else {
                    return Err(perr(ln, indent, "edges must come after `vertices = ...`"));
                };
                let toks = tokens(line);
                if toks.len() != 3 {
                    return Err(perr(ln, indent, "expected an edge `u v length`"));
                }
                let find = |t: &Tok| {
                    ls.iter().position(|l| l == t.text).ok_or_else(|| perr(ln, t.col, format!("unknown vertex `{}`", t.text)))
                };
                let (a, b) = (find(&toks[0])?, find(&toks[1])?);
                let len = parse_rational(toks[2].text, ln, toks[2].col)?;
                if !len.is_positive() {
                    return Err(perr(ln, toks[2].col, "edge length must be positive"));
                }
                edges.push((a, b, len));
            }
            Section::Map => {
                let ls = &labels.as_ref().unwrap().0;
                if let Some((v, img)) = body.split_once("->") {
                    let v = v.trim();
                    let vi = ls.iter().position(|l| l == v).ok_or_else(|| perr(ln, indent, format!("unknown vertex `{v}`")))?;
                    if images.contains_key(&vi) {
                        return Err(perr(ln, indent, format!("vertex `{v}` has two images")));
                    }
                    images.insert(vi, (img.trim().to_string(), ln, col_of(raw, img.trim_start())));
                    continue;
                }
                let (e, rest) = body.split_once(':').ok_or_else(|| perr(ln, indent, "expected `vertex -> point` or `edge : t=point, ...`"))?;
                let edge = parse_usize(e, ln, indent)?;
                if plans.contains_key(&edge) {
                    return Err(perr(ln, indent, format!("edge {edge} has two plans")));
                }
                let mut breaks = Vec::new();
                for item in rest.split(',') {
                    let col = col_of(raw, item.trim_start());
                    let (t, p) = item.split_once('=').ok_or_else(|| perr(ln, col, "expected `t=point`"))?;
                    let t = parse_rational(t, ln, col)?;
                    breaks.push((t, p.trim().to_string(), col_of(raw, p.trim_start())));
                }
                plans.insert(edge, PendingPlan { line: ln, col: indent, breaks });
            }
            Section::Analysis => {
                let (k, v) = body.split_once('=').ok_or_else(|| perr(ln, indent, "expected `key = value`"))?;
                let key = k.trim();
                let vcol = col_of(raw, v.trim_start());
                let v = v.trim();
                match key {
                    "transient" => analysis.transient = Some(parse_usize(v, ln, vcol)?),
                    "window" => analysis.window = Some(parse_usize(v, ln, vcol)?),
                    "epsilon" => analysis.epsilon = Some(parse_rational(v, ln, vcol)?),
                    "delta_schedule" => {
                        analysis.delta_schedule = Some(
                            v.split(',').map(|d| parse_rational(d, ln, vcol)).collect::<Result<Vec<_>>>()?,
                        )
                    }
                    "samples_per_delta" => analysis.samples_per_delta = Some(parse_usize(v, ln, vcol)?),
                    "eps_eq" => analysis.eps_eq = Some(parse_rational(v, ln, vcol)?),
                    "horizon" => analysis.horizon = Some(parse_usize(v, ln, vcol)?),
                    "max_period" => analysis.max_period = Some(parse_usize(v, ln, vcol)?),
                    "set_tolerance" => analysis.set_tolerance = Some(parse_rational(v, ln, vcol)?),
                    "mesh" => analysis.mesh = Some(parse_rational(v, ln, vcol)?),
                    "max_iter" => analysis.max_iter = Some(parse_usize(v, ln, vcol)?),
                    "breakpoint_cap" => analysis.breakpoint_cap = Some(parse_usize(v, ln, vcol)?),
                    "seed" => {
                        analysis.seed =
                            Some(v.parse().map_err(|_| perr(ln, vcol, format!("expected an integer seed, found `{v}`")))?)
                    }
                    "analyses" => {
                        let list: Vec<String> =
                            v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
                        if let Some(bad) = list.iter().find(|a| !ANALYSES.contains(&a.as_str())) {
                            return Err(perr(ln, vcol, format!("unknown analysis `{bad}`")));
                        }
                        analysis.analyses = Some(list);
                    }
                    other => return Err(perr(ln, indent, format!("unknown key `{other}` in [analysis]"))),
                }
            }
        }
    }

    let Some((labels, _)) = labels else {
        return Err(perr(1, 1, "missing `[tree]` section with `vertices = ...`"));
    };
    if !seen_sections.contains(&"map") {
        return Err(perr(text.lines().count().max(1), 1, "missing `[map]` section"));
    }
    let tree = Arc::new(MetricTree::new(labels, edges)?);
    let mut vimg = Vec::with_capacity(tree.num_vertices());
    for v in 0..tree.num_vertices() {
        let Some((s, ln, col)) = images.get(&v) else {
            return Err(Error::InvalidMap(format!("vertex `{}` has no image", tree.labels[v])));
        };
        vimg.push(parse_point(&tree, s).map_err(|m| perr(*ln, *col, m))?);
    }
    if let Some(e) = plans.keys().copied().find(|&e| e >= tree.num_edges()) {
        let p = &plans[&e];
        return Err(perr(p.line, p.col, format!("unknown edge {e}")));
    }
    let mut eplans = Vec::with_capacity(tree.num_edges());
    for e in 0..tree.num_edges() {
        let edge = &tree.edges[e];
        match plans.remove(&e) {
            None => eplans.push(EdgePlan::linear(vimg[edge.a].clone(), vimg[edge.b].clone())),
            Some(p) => {
                let mut plan = EdgePlan { breaks: Vec::new(), images: Vec::new() };
                for (t, s, col) in p.breaks {
                    plan.images.push(parse_point(&tree, &s).map_err(|m| perr(p.line, col, m))?);
                    plan.breaks.push(t);
                }
                eplans.push(plan);
            }
        }
    }
    let map = PLSelfMap::new(tree, vimg, eplans)?;
    Ok(SystemConfig { name, map, analysis })
}

/// Writes a system (and optional analysis overrides) in the config format.
pub fn export_config(name: Option<&str>, map: &PLSelfMap, analysis: &AnalysisConfig) -> String {
    let tree = map.tree();
    let mut s = String::new();
    if let Some(n) = name {
        let _ = writeln!(s, "name = {n}\n");
    }
    let _ = writeln!(s, "[tree]");
    let _ = writeln!(s, "vertices = {}", tree.labels.join(" "));
    for e in &tree.edges {
        let _ = writeln!(s, "{} {} {}", tree.labels[e.a], tree.labels[e.b], e.len);
    }
    let _ = writeln!(s, "\n[map]");
    for (v, img) in map.vertex_images().iter().enumerate() {
        let _ = writeln!(s, "{} -> {}", tree.labels[v], display_point(tree, img));
    }
    for (e, plan) in map.plans().iter().enumerate() {
        let items: Vec<String> =
            plan.breaks.iter().zip(&plan.images).map(|(t, p)| format!("{t}={}", display_point(tree, p))).collect();
        let _ = writeln!(s, "{e} : {}", items.join(", "));
    }
    if !analysis.is_empty() {
        let _ = writeln!(s, "\n[analysis]");
        let a = analysis;
        let mut kv = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                let _ = writeln!(s, "{k} = {v}");
            }
        };
        let list = |v: &Option<Vec<Rational>>| v.as_ref().map(|v| v.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", "));
        kv("transient", a.transient.map(|v| v.to_string()));
        kv("window", a.window.map(|v| v.to_string()));
        kv("epsilon", a.epsilon.as_ref().map(|v| v.to_string()));
        kv("delta_schedule", list(&a.delta_schedule));
        kv("samples_per_delta", a.samples_per_delta.map(|v| v.to_string()));
        kv("eps_eq", a.eps_eq.as_ref().map(|v| v.to_string()));
        kv("horizon", a.horizon.map(|v| v.to_string()));
        kv("max_period", a.max_period.map(|v| v.to_string()));
        kv("set_tolerance", a.set_tolerance.as_ref().map(|v| v.to_string()));
        kv("mesh", a.mesh.as_ref().map(|v| v.to_string()));
        kv("max_iter", a.max_iter.map(|v| v.to_string()));
        kv("breakpoint_cap", a.breakpoint_cap.map(|v| v.to_string()));
        kv("seed", a.seed.map(|v| v.to_string()));
        kv("analyses", a.analyses.as_ref().map(|v| v.join(", ")));
    }
    s
}

/// SHA-256 of the exported tree and map, as lowercase hex.
pub fn content_hash(map: &PLSelfMap) -> String {
    let text = export_config(None, map, &AnalysisConfig::default());
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TENT: &str = "name = tent\n\n[tree]\nvertices = a b\na b 1\n\n[map]\na -> @a\nb -> @a\n0 : 0=@a, 1/2=@b, 1=@a\n";

    #[test]
    fn parses_and_round_trips() {
        let c = parse_config(TENT).unwrap();
        assert_eq!(c.name.as_deref(), Some("tent"));
        assert_eq!(c.map.apply(&TreePoint::Edge { edge: 0, t: "1/4".parse().unwrap() }), TreePoint::Edge { edge: 0, t: "1/2".parse().unwrap() });
        let out = export_config(c.name.as_deref(), &c.map, &c.analysis);
        let again = parse_config(&out).unwrap();
        assert_eq!(again, c);
        assert_eq!(export_config(again.name.as_deref(), &again.map, &again.analysis), out);
    }

    #[test]
    fn missing_plan_is_linear() {
        let c = parse_config("[tree]\nvertices = a b\na b 2\n[map]\na -> @b\nb -> @a\n").unwrap();
        assert_eq!(c.map.apply(&TreePoint::Edge { edge: 0, t: "1/3".parse().unwrap() }), TreePoint::Edge { edge: 0, t: "2/3".parse().unwrap() });
    }

    #[test]
    fn diagnostics_are_positioned() {
        let e = parse_config("[tree]\nvertices = a b\na b 0/1\n[map]\na -> @a\nb -> @a\n").unwrap_err();
        assert_eq!(e, Error::Parse { line: 3, col: 5, msg: "edge length must be positive".into() });
        let e = parse_config("[tree]\nvertices = a b\na b 1\n[map]\na -> @a\nb -> @b\n0 : 0=@a, 1=@a\n").unwrap_err();
        assert!(matches!(&e, Error::InvalidMap(m) if m.contains("vertex `b`")), "{e}");
        let e = parse_config("[tree]\nvertices = a b\na b 1\n[map]\na -> @a\nb -> @c\n").unwrap_err();
        assert_eq!(e, Error::Parse { line: 6, col: 6, msg: "unknown vertex `c`".into() });
        let e = parse_config("[tree]\nvertices = a b\nsize = 3\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, col: 1, .. }));
        let e = parse_config("[tree]\nvertices = a b\na b 1\n[map]\na -> @a\nb -> @a\n[analysis]\n  colour = red\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 8, col: 3, .. }));
        let e = parse_config("[tree]\nvertices = a b\na b 1\n[map]\na -> @a\nb -> @a\n[analysis]\nepsilon = x\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 8, col: 11, .. }));
    }

    #[test]
    fn analysis_section() {
        let text = format!("{TENT}\n[analysis]\nepsilon = 1/500\ndelta_schedule = 1/4, 1/8\nhorizon = 32\nanalyses = fixed, theorem\n");
        let c = parse_config(&text).unwrap();
        let mut p = CheckParams::default();
        c.analysis.apply(&mut p);
        assert_eq!(p.limits.epsilon, Rational::new(1, 500));
        assert_eq!(p.limits.delta_schedule.len(), 2);
        assert_eq!(p.horizon, 32);
        assert_eq!(c.analysis.analyses.as_deref(), Some(&["fixed".to_string(), "theorem".to_string()][..]));
        assert_eq!(parse_config(&export_config(c.name.as_deref(), &c.map, &c.analysis)).unwrap(), c);
    }

    #[test]
    fn hash_depends_on_content_only() {
        let a = parse_config(TENT).unwrap();
        let b = parse_config(&TENT.replace("name = tent", "name = other")).unwrap();
        assert_eq!(content_hash(&a.map), content_hash(&b.map));
        assert_eq!(content_hash(&a.map).len(), 64);
    }
}
