//! The `dendrite` command line: loading systems, running analyses and
//! writing reports.
//!
//! Exit codes: 0 success or consistent verdict, 1 input error, 2 confirmed
//! theorem inconsistency, 3 resource limit.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{content_hash, export_config, parse_config, parse_point, AnalysisConfig, ANALYSES};
use crate::equicontinuity::{defect_curve, interval_criterion, theorem_check, CheckParams, TheoremVerdict};
use crate::error::{Error, Result};
use crate::examples::{by_name, families, names, random_system};
use crate::grid::PairSet;
use crate::limits::Estimator;
use crate::map::PLSelfMap;
use crate::rational::Rational;
use crate::report::{self, write_report, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INCONSISTENT: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

fn parse_rational_arg(s: &str) -> std::result::Result<Rational, String> {
    s.parse::<Rational>().map_err(|e| e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "dendrite", version, about = "Exact PL dynamics on finite metric trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    /// Level of an `example:` system.
    #[arg(long)]
    pub level: Option<u64>,
    /// Burn-in iterates discarded before the ω window.
    #[arg(long)]
    pub transient: Option<usize>,
    /// Iterates recorded for ω after the transient.
    #[arg(long)]
    pub window: Option<usize>,
    /// Cluster tolerance for limit-set estimates.
    #[arg(long, value_parser = parse_rational_arg)]
    pub epsilon: Option<Rational>,
    /// Comma-separated decreasing radii, e.g. `1/8,1/16,1/32`.
    #[arg(long)]
    pub delta_schedule: Option<String>,
    /// Largest period searched exactly for periodic points.
    #[arg(long)]
    pub max_period: Option<usize>,
    /// Iterates used by the equicontinuity defect.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Grid spacing for pair sampling.
    #[arg(long, value_parser = parse_rational_arg)]
    pub mesh: Option<Rational>,
    /// Seed for `example:random`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Iteration cap for the eventual image.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Comma-separated subset of analyses for `analyze`.
    #[arg(long)]
    pub analyses: Option<String>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Leave wall-clock timings out of the report.
    #[arg(long)]
    pub no_timings: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the full battery of analyses.
    Analyze {
        /// Config file path or `example:<name>[:<level>]`.
        system: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Check the three equivalent conditions.
    Theorem {
        system: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Equicontinuity defect over the delta schedule or a single delta.
    Defect {
        system: String,
        #[arg(long, value_parser = parse_rational_arg)]
        delta: Option<Rational>,
        #[command(flatten)]
        flags: Flags,
    },
    /// ω and Ω estimates, recurrence, ω_f modulus and semicontinuity probes.
    Limits {
        system: String,
        /// Point to estimate (`@label` or `edge:p/q`); repeatable.
        #[arg(long = "point")]
        points: Vec<String>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Exact fixed and periodic sets, eventual image and injectivity.
    Fixed {
        system: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Theorem check over seeded random systems.
    Corpus {
        /// Inclusive seed range `a..b`.
        #[arg(long)]
        seeds: String,
        #[arg(long, default_value_t = 6)]
        vertices: usize,
        #[arg(long, default_value_t = 4)]
        breakpoints: usize,
        #[command(flatten)]
        flags: Flags,
    },
    /// Print a system in the config format.
    Export {
        system: String,
        #[arg(long)]
        level: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in examples.
    List,
}

/// A system ready for analysis.
pub struct Loaded {
    pub name: String,
    pub map: PLSelfMap,
    pub notes: Vec<String>,
    pub fan_mode: bool,
    pub analysis: AnalysisConfig,
}

/// Loads `example:<name>[:<level>]` or a config file.
pub fn load_system(spec: &str, level: Option<u64>, seed: Option<u64>) -> Result<Loaded> {
    if let Some(rest) = spec.strip_prefix("example:") {
        let mut it = rest.splitn(2, ':');
        let name = it.next().unwrap_or_default();
        let mut lv = match it.next() {
            Some(l) => l.parse::<u64>().map_err(|_| Error::InvalidParam(format!("bad level `{l}` in `{spec}`")))?,
            None => 1,
        };
        if let Some(l) = level {
            lv = l;
        }
        if name == "random" {
            if let Some(s) = seed {
                lv = s;
            }
        }
        let s = by_name(name, lv)?;
        let mut analysis = AnalysisConfig::default();
        if name == "random" {
            analysis.seed = Some(lv);
        }
        return Ok(Loaded { name: s.spec(), map: s.map, notes: s.notes, fan_mode: s.fan_mode, analysis });
    }
    let text = std::fs::read_to_string(spec).map_err(|e| Error::Io { path: spec.into(), msg: e.to_string() })?;
    let c = parse_config(&text)?;
    let name = c.name.clone().unwrap_or_else(|| {
        Path::new(spec).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| spec.into())
    });
    Ok(Loaded { name, map: c.map, notes: Vec::new(), fan_mode: false, analysis: c.analysis })
}

fn flag_overrides(flags: &Flags) -> Result<AnalysisConfig> {
    let schedule = match &flags.delta_schedule {
        None => None,
        Some(s) => Some(
            s.split(',')
                .map(|d| d.trim().parse::<Rational>().map_err(|e| Error::InvalidParam(format!("--delta-schedule: {e}"))))
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    let analyses = match &flags.analyses {
        None => None,
        Some(s) => {
            let list: Vec<String> = s.split(',').map(|a| a.trim().to_string()).filter(|a| !a.is_empty()).collect();
            if let Some(bad) = list.iter().find(|a| !ANALYSES.contains(&a.as_str())) {
                return Err(Error::InvalidParam(format!("unknown analysis `{bad}`")));
            }
            Some(list)
        }
    };
    Ok(AnalysisConfig {
        transient: flags.transient,
        window: flags.window,
        epsilon: flags.epsilon.clone(),
        delta_schedule: schedule,
        max_period: flags.max_period,
        horizon: flags.horizon,
        mesh: flags.mesh.clone(),
        max_iter: flags.max_iter,
        seed: flags.seed,
        analyses,
        ..AnalysisConfig::default()
    })
}

fn system_value(l: &Loaded) -> Value {
    let tree = l.map.tree();
    json!({
        "name": l.name,
        "hash": content_hash(&l.map),
        "vertices": tree.num_vertices(),
        "edges": tree.num_edges(),
        "breakpoints": l.map.breakpoint_count(),
        "fan_mode": l.fan_mode,
        "notes": l.notes,
    })
}

/// Outcome of one analysis run.
enum Step {
    Done(Value),
    Resource(String),
}

fn guard(r: Result<Value>) -> Result<Step> {
    match r {
        Ok(v) => Ok(Step::Done(v)),
        Err(e) if e.is_resource() => Ok(Step::Resource(e.to_string())),
        Err(e) => Err(e),
    }
}

fn fixed_value(f: &PLSelfMap, p: &CheckParams) -> Result<Value> {
    let tree = f.tree();
    let mut fix_m = Vec::new();
    for m in 1..=4 {
        match f.fixed_points_with_cap(m, p.breakpoint_cap) {
            Ok(s) => fix_m.push(json!({ "m": m, "set": report::region(tree, &s) })),
            Err(e) if e.is_resource() => fix_m.push(json!({ "m": m, "error": e.to_string() })),
            Err(e) => return Err(e),
        }
    }
    let mut v = json!({
        "fix": report::region(tree, &f.fixed_set()),
        "fix_m": fix_m,
        "injectivity": report::injectivity(&f.injectivity()),
    });
    match f.periodic_points_with_cap(p.max_period, p.breakpoint_cap) {
        Ok(pp) => v["periodic"] = report::periodic(tree, &pp),
        Err(e) if e.is_resource() => {
            v["periodic"] = Value::Null;
            v["periodic_error"] = Value::String(e.to_string());
        }
        Err(e) => return Err(e),
    }
    Ok(v)
}

fn limits_value(f: &PLSelfMap, p: &CheckParams, points: &[String]) -> Result<Value> {
    let tree = f.tree();
    let xs = if points.is_empty() {
        (0..tree.num_vertices().min(16)).map(crate::tree::TreePoint::Vertex).collect::<Vec<_>>()
    } else {
        points
            .iter()
            .map(|s| parse_point(tree, s).map_err(|m| Error::InvalidPoint(format!("--point {s}: {m}"))))
            .collect::<Result<Vec<_>>>()?
    };
    let mesh = tree.mesh(&p.mesh)?;
    let mut est = Estimator::new(f, p.limits.clone())?;
    let mut rows = Vec::new();
    for x in &xs {
        let om = est.omega_set(x);
        let big = est.big_omega(x)?;
        rows.push(json!({ "x": report::point(x), "omega": report::compact(&om), "big_omega": report::big_omega(&big) }));
    }
    let recurrent = est.recurrent_points(&mesh);
    let pairs = PairSet::from_mesh(tree, &mesh, &p.limits.delta_schedule[0]);
    let modulus: Vec<Value> = p.limits.delta_schedule.iter().map(|d| report::modulus(&est.modulus(&pairs, d))).collect();
    let semi = est.semicontinuity_probe(&mesh);
    est.dynamics().precision_check()?;
    Ok(json!({
        "points": rows,
        "recurrent": report::points(&recurrent),
        "modulus": modulus,
        "semicontinuity": report::semicontinuity(&semi),
    }))
}

/// Runs the named analyses on a loaded system.
pub fn run_analyses(
    command: &str,
    sys: &Loaded,
    params: &CheckParams,
    analyses: &[String],
    single_delta: Option<&Rational>,
    points: &[String],
) -> Result<Report> {
    if analyses.is_empty() {
        return Err(Error::InvalidParam("no analyses requested".into()));
    }
    params.validate()?;
    let f = &sys.map;
    let tree = f.tree();
    let mut rep = Report::new(command, system_value(sys), report::params(params));
    let start = Instant::now();
    let mut verdict: Option<TheoremVerdict> = None;
    for a in ANALYSES.iter().filter(|a| analyses.iter().any(|b| b == *a)) {
        let t = Instant::now();
        let step = match *a {
            "fixed" => guard(fixed_value(f, params))?,
            "eventual_image" => guard(f.eventual_image(params.max_iter).map(|e| report::eventual(tree, &e)))?,
            "interval" => guard(interval_criterion(f, params.max_iter).map(|c| report::interval(tree, &c)))?,
            "defect" => {
                let schedule = match single_delta {
                    Some(d) => vec![d.clone()],
                    None => params.limits.delta_schedule.clone(),
                };
                guard(defect_curve(f, &schedule, params.horizon, &params.mesh).map(|c| {
                    json!({ "curve": c.iter().map(report::defect).collect::<Vec<_>>(), "grid": report::rat(&params.mesh) })
                }))?
            }
            "limits" => guard(limits_value(f, params, points))?,
            "theorem" => guard(theorem_check(f, params).map(|v| {
                let out = report::verdict(tree, &v);
                verdict = Some(v);
                out
            }))?,
            _ => unreachable!("analysis names are validated"),
        };
        rep.timings.insert(a.to_string(), t.elapsed().as_micros() as u64);
        match step {
            Step::Done(v) => {
                rep.results.insert(a.to_string(), v);
            }
            Step::Resource(m) => {
                rep.errors.insert(a.to_string(), m);
            }
        }
    }
    rep.timings.insert("total".into(), start.elapsed().as_micros() as u64);
    rep.status = match &verdict {
        Some(v) if !v.consistent && !sys.fan_mode => "inconsistent",
        _ if !rep.errors.is_empty() => "resource_limit",
        Some(v) if v.consistent => "consistent",
        Some(_) => "undetermined",
        None => "ok",
    }
    .into();
    Ok(rep)
}

pub fn exit_code_for(status: &str) -> i32 {
    match status {
        "inconsistent" => EXIT_INCONSISTENT,
        "resource_limit" => EXIT_RESOURCE,
        _ => EXIT_OK,
    }
}

fn parse_seeds(s: &str) -> Result<(u64, u64)> {
    let bad = || Error::InvalidParam(format!("--seeds expects `a..b`, found `{s}`"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

/// Theorem check over `random_system(seed, vertices, breakpoints)` for each seed.
pub fn run_corpus(seeds: (u64, u64), vertices: usize, breakpoints: usize, params: &CheckParams) -> Result<Report> {
    params.validate()?;
    let start = Instant::now();
    let mut systems = Vec::new();
    let mut inconsistent = Vec::new();
    let mut limited = Vec::new();
    let mut counts = std::collections::BTreeMap::<String, u64>::new();
    let mut hasher = Sha256::new();
    for seed in seeds.0..=seeds.1 {
        let f = random_system(seed, vertices, breakpoints)?;
        let hash = content_hash(&f);
        hasher.update(hash.as_bytes());
        match theorem_check(&f, params) {
            Ok(v) => {
                let [s1, s2, s3] = v.statuses();
                *counts.entry(format!("{}/{}/{}", s1.as_str(), s2.as_str(), s3.as_str())).or_default() += 1;
                if !v.consistent {
                    inconsistent.push(seed);
                }
                systems.push(json!({
                    "seed": seed,
                    "hash": hash,
                    "cond1": report::status(s1),
                    "cond2": report::status(s2),
                    "cond3": report::status(s3),
                    "consistent": v.consistent,
                    "contradictions": v.contradictions,
                }));
            }
            Err(e) if e.is_resource() => {
                limited.push(seed);
                *counts.entry("resource_limit".into()).or_default() += 1;
                systems.push(json!({ "seed": seed, "hash": hash, "error": e.to_string() }));
            }
            Err(e) => return Err(e),
        }
    }
    let system = json!({
        "name": format!("random corpus {}..{}", seeds.0, seeds.1),
        "hash": hex::encode(hasher.finalize()),
        "vertices": vertices,
        "edges": vertices.saturating_sub(1),
        "breakpoints": breakpoints,
        "fan_mode": false,
        "notes": [],
    });
    let mut pv = report::params(params);
    pv["seeds"] = json!(format!("{}..{}", seeds.0, seeds.1));
    pv["vertices"] = json!(vertices);
    pv["breakpoints"] = json!(breakpoints);
    let mut rep = Report::new("corpus", system, pv);
    rep.status = if !inconsistent.is_empty() {
        "inconsistent"
    } else if !limited.is_empty() {
        "resource_limit"
    } else {
        "consistent"
    }
    .into();
    rep.results.insert(
        "corpus".into(),
        json!({ "systems": systems, "inconsistent": inconsistent, "resource_limited": limited, "counts": counts }),
    );
    rep.timings.insert("total".into(), start.elapsed().as_micros() as u64);
    Ok(rep)
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => write_report(text, p),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io { path: "<stdout>".into(), msg: e.to_string() }),
    }
}

fn params_for(sys_analysis: &AnalysisConfig, flags: &Flags) -> Result<(CheckParams, AnalysisConfig)> {
    let mut a = sys_analysis.clone();
    a.merge(&flag_overrides(flags)?);
    let mut p = CheckParams::default();
    a.apply(&mut p);
    Ok((p, a))
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32> {
    let (command, system, flags, delta, points) = match cli.command {
        Command::List => {
            let mut text = String::new();
            for fam in families() {
                text.push_str(&format!("{} (levels {}..={}): {}\n", fam.name, fam.min_level, fam.max_level, fam.notes));
            }
            for n in names().into_iter().skip(families().len()) {
                text.push_str(&format!("{n}\n"));
            }
            emit(&text, None, stdout)?;
            return Ok(EXIT_OK);
        }
        Command::Export { system, level, seed, out } => {
            let sys = load_system(&system, level, seed)?;
            let text = export_config(Some(&sys.name), &sys.map, &sys.analysis);
            emit(&text, out.as_deref(), stdout)?;
            return Ok(EXIT_OK);
        }
        Command::Corpus { seeds, vertices, breakpoints, flags } => {
            let (p, _) = params_for(&AnalysisConfig::default(), &flags)?;
            let rep = run_corpus(parse_seeds(&seeds)?, vertices, breakpoints, &p)?;
            emit(&rep.to_json(!flags.no_timings), flags.out.as_deref(), stdout)?;
            return Ok(exit_code_for(&rep.status));
        }
        Command::Analyze { system, flags } => ("analyze", system, flags, None, Vec::new()),
        Command::Theorem { system, flags } => ("theorem", system, flags, None, Vec::new()),
        Command::Defect { system, delta, flags } => ("defect", system, flags, delta, Vec::new()),
        Command::Limits { system, points, flags } => ("limits", system, flags, None, points),
        Command::Fixed { system, flags } => ("fixed", system, flags, None, Vec::new()),
    };
    let sys = load_system(&system, flags.level, flags.seed)?;
    let (params, merged) = params_for(&sys.analysis, &flags)?;
    let single_edge = sys.map.tree().num_edges() == 1;
    let analyses: Vec<String> = match command {
        "analyze" => merged.analyses.clone().unwrap_or_else(|| {
            ANALYSES.iter().filter(|a| **a != "interval" || single_edge).map(|a| a.to_string()).collect()
        }),
        "fixed" => {
            let mut v = vec!["fixed".to_string(), "eventual_image".to_string()];
            if single_edge {
                v.push("interval".into());
            }
            v
        }
        other => vec![other.to_string()],
    };
    let rep = run_analyses(command, &sys, &params, &analyses, delta.as_ref(), &points)?;
    emit(&rep.to_json(!flags.no_timings), flags.out.as_deref(), stdout)?;
    Ok(exit_code_for(&rep.status))
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
            } else {
                let _ = stdout.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_resource() {
                EXIT_RESOURCE
            } else {
                EXIT_INPUT
            }
        }
    }
}
