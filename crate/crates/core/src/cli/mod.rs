//! Batch driver: config in, deterministic JSON and DOT reports out.

pub mod config;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::chaingraph::{
    build_chain_graph, chain_components, reaches_recurrent, recurrent_cells, ChainGraph, ChainGraphError, ComponentPoset,
    EpsilonField, Grid,
};
use crate::lyapunov::{synthesize, verify, Certification, LyapunovAssignment, LyapunovError};
use crate::ordinal::Ordinal;
use crate::poset::{
    density_signature, minimal_elements, order_isomorphic, to_dot, PosetReport, RefinementTrace, Signature, TraceLevel,
};
use crate::rational::{format_rational, Rational};
use crate::systems::{anchor_points, conjugate, Body, PlHomeo, SystemError, SystemSpec, Variant};

pub use config::{AnalysisConfig, ConfigError, EpsConfig, SystemConfig, Task, MAX_CELLS};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Graph(#[from] ChainGraphError),
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
    #[error("`depths` applies only to cantor and dense_blocks systems")]
    DepthsUnsupported,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Builds the configured system, optionally at another construction depth.
pub fn build_system(cfg: &SystemConfig, depth: Option<u32>) -> Result<SystemSpec, CliError> {
    Ok(match cfg {
        SystemConfig::Identity | SystemConfig::Square | SystemConfig::Ordinal(_) if depth.is_some() => {
            return Err(CliError::DepthsUnsupported)
        }
        SystemConfig::Identity => SystemSpec::identity(),
        SystemConfig::Square => SystemSpec::square(),
        SystemConfig::Ordinal(l) => SystemSpec::ordinal_map(l.clone()),
        SystemConfig::Cantor { depth: d } => SystemSpec::cantor_example(depth.unwrap_or(*d))?,
        SystemConfig::DenseBlocks { depth: d, variant } => SystemSpec::dense_blocks(depth.unwrap_or(*d), *variant),
        SystemConfig::Conjugated { inner, homeo } => {
            let f = build_system(inner, depth)?;
            conjugate(&f, &PlHomeo::new(homeo.clone())?)?
        }
    })
}

fn rationals<S: serde::Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(format_rational))
}

/// The model's expected order type and component locations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Prediction {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_type: Option<String>,
    #[serde(serialize_with = "rationals")]
    pub representatives: Vec<Rational>,
}

fn ordinal_of(spec: &SystemSpec) -> Option<Ordinal> {
    match spec.body() {
        Body::Identity => Some(Ordinal::zero()),
        Body::Square => Some(Ordinal::one()),
        Body::OrdinalMap(l) => Some(l.clone()),
        Body::Conjugated { inner, .. } => ordinal_of(inner),
        _ => None,
    }
}

fn label_of(spec: &SystemSpec) -> (String, Option<String>) {
    if let Some(l) = ordinal_of(spec) {
        let t = l.succ();
        return (format!("well order of type {t}"), Some(t.to_string()));
    }
    match spec.body() {
        Body::DenseBlocks { variant, .. } => {
            let name = match variant {
                Variant::WithMax => "[0,1]∩Q",
                Variant::NoMax => "[0,1)∩Q",
                Variant::OpenInterval => "(0,1)∩Q",
            };
            (format!("{name} truncation"), None)
        }
        Body::CantorExample { depth, .. } => {
            ("Cantor truncation, linear and not dense".to_string(), Some((1u64 << depth).to_string()))
        }
        Body::Conjugated { inner, .. } => label_of(inner),
        _ => unreachable!("ordinal bodies handled above"),
    }
}

/// Expected model for `spec`; limit constructions are unfolded down to blocks of width `min_width`.
pub fn predict_system(spec: &SystemSpec, min_width: &Rational) -> Prediction {
    let (label, order_type) = label_of(spec);
    Prediction { label, order_type, representatives: anchor_points(spec, min_width) }
}

/// Prediction for the configured system at its finest resolution and deepest construction level.
pub fn predict(cfg: &AnalysisConfig) -> Result<Prediction, CliError> {
    let depth = cfg.depths.as_ref().and_then(|d| d.iter().max().copied());
    let spec = build_system(&cfg.system, depth)?;
    let finest = *cfg.resolutions.iter().max().expect("validated nonempty");
    let grid = Grid::for_system(&spec, finest);
    Ok(predict_system(&spec, grid.width()))
}

fn eps_for(cfg: &EpsConfig, grid: &Grid) -> Result<EpsilonField, ChainGraphError> {
    match cfg {
        EpsConfig::Auto => Ok(EpsilonField::auto(grid)),
        EpsConfig::Constant(e) => EpsilonField::constant(e.clone()),
        EpsConfig::Field(pts) => EpsilonField::piecewise(pts.clone()),
    }
}

fn eps_label(e: &EpsilonField) -> String {
    match e {
        EpsilonField::Constant(v) => format_rational(v),
        EpsilonField::PiecewiseLinear(pts) => {
            let parts: Vec<String> =
                pts.iter().map(|(x, v)| format!("({}, {})", format_rational(x), format_rational(v))).collect();
            format!("[{}]", parts.join(", "))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovReport {
    pub assignment: LyapunovAssignment,
    pub certification: Certification,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelReport {
    pub resolution: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    pub eps: String,
    pub mode: &'static str,
    #[serde(serialize_with = "rationals")]
    pub grid: Vec<Rational>,
    /// The grid covers only a closed core of an open domain.
    pub truncated_core: bool,
    pub edges: usize,
    pub recurrent_cells: usize,
    pub all_reach_recurrence: bool,
    pub poset: PosetReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<LyapunovReport>,
    #[serde(skip)]
    pub dot: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementReport {
    pub component_counts: Vec<usize>,
    pub matching: Vec<Vec<Option<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signature: Option<Signature>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signature_error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugacyReport {
    pub resolution: usize,
    pub components: usize,
    pub conjugate_components: usize,
    pub isomorphic: bool,
    pub exact: bool,
    /// Largest distance between a conjugate representative and the image of its partner, pairing by rank.
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "opt_rational")]
    pub max_representative_offset: Option<Rational>,
}

fn opt_rational<S: serde::Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_str(&format_rational(r)),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub levels_ms: Vec<u128>,
    pub total_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub system: &'static str,
    pub tasks: Vec<&'static str>,
    pub expected: Prediction,
    pub levels: Vec<LevelReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refinement: Option<RefinementReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub conjugacy: Vec<ConjugacyReport>,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Include wall-clock timings; they make reports differ between runs.
    pub timing: bool,
}

struct Level {
    spec: SystemSpec,
    graph: ChainGraph,
    poset: ComponentPoset,
}

fn analyze_level(cfg: &AnalysisConfig, k: usize) -> Result<Level, CliError> {
    let depth = cfg.depths.as_ref().map(|d| d[k]);
    let spec = build_system(&cfg.system, depth)?;
    let grid = Grid::for_system(&spec, cfg.resolutions[k]);
    let eps = eps_for(&cfg.eps, &grid)?;
    let graph = build_chain_graph(&spec, &grid, &eps, cfg.mode)?;
    let poset = chain_components(&graph);
    Ok(Level { spec, graph, poset })
}

/// Runs every configured task and collects the report.
pub fn run(cfg: &AnalysisConfig, opts: RunOptions) -> Result<AnalysisReport, CliError> {
    let start = Instant::now();
    let has = |t: Task| cfg.tasks.contains(&t);
    let mut checks = Vec::new();
    let mut push = |name: String, passed: bool| checks.push(CheckResult { name, passed });

    let mut levels = Vec::new();
    let mut reports = Vec::new();
    let mut levels_ms = Vec::new();
    for (k, &n) in cfg.resolutions.iter().enumerate() {
        let t0 = Instant::now();
        let level = analyze_level(cfg, k)?;
        let rec = recurrent_cells(&level.graph).len();
        let reach = reaches_recurrent(&level.graph).into_iter().all(|b| b);
        let mut poset_report = PosetReport::new(&level.poset);
        if has(Task::Components) {
            push(format!("recurrence_nonempty@{n}"), rec > 0);
            push(format!("reaches_recurrence@{n}"), reach);
            push(format!("minimal_nonempty@{n}"), !minimal_elements(&level.poset).is_empty());
        } else {
            poset_report.components.clear();
            poset_report.order_pairs.clear();
        }
        let lyapunov = if has(Task::Lyapunov) {
            let assignment = synthesize(&level.graph);
            let certification = verify(&assignment, &level.graph, &level.spec, cfg.samples)?;
            push(format!("lyapunov@{n}"), certification.passed());
            Some(LyapunovReport { assignment, certification })
        } else {
            None
        };
        let grid = level.graph.grid();
        reports.push(LevelReport {
            resolution: n,
            depth: cfg.depths.as_ref().map(|d| d[k]),
            eps: eps_label(level.graph.eps()),
            mode: cfg.mode.name(),
            grid: vec![grid.lo().clone(), grid.hi().clone()],
            truncated_core: !level.spec.domain().is_closed(),
            edges: level.graph.edge_count(),
            recurrent_cells: rec,
            all_reach_recurrence: reach,
            poset: poset_report,
            lyapunov,
            dot: to_dot(&level.poset, &format!("poset_{n}")),
        });
        levels.push(level);
        levels_ms.push(t0.elapsed().as_millis());
    }

    let refinement = if has(Task::Refine) || has(Task::Signature) {
        let trace_levels = levels
            .iter()
            .map(|l| TraceLevel {
                grid: l.graph.grid().clone(),
                eps: l.graph.eps().bounds().1,
                poset: l.poset.clone(),
            })
            .collect();
        let (matching, signature, error) = match RefinementTrace::new(trace_levels) {
            Ok(trace) => {
                let matching = (0..levels.len() - 1).map(|k| trace.matching(k).to_vec()).collect();
                if has(Task::Signature) {
                    match density_signature(&trace) {
                        Ok(s) => (matching, Some(s), None),
                        Err(e) => (matching, None, Some(e.to_string())),
                    }
                } else {
                    (matching, None, None)
                }
            }
            Err(e) => (Vec::new(), None, Some(e.to_string())),
        };
        push("refinement".into(), error.is_none());
        Some(RefinementReport {
            component_counts: levels.iter().map(|l| l.poset.len()).collect(),
            matching,
            signature,
            signature_error: error,
        })
    } else {
        None
    };

    let mut conjugacy = Vec::new();
    if has(Task::Conjugacy) {
        let h = PlHomeo::new(cfg.conjugacy_homeo.clone().expect("validated"))?;
        for (k, level) in levels.iter().enumerate() {
            let n = cfg.resolutions[k];
            let g = conjugate(&level.spec, &h)?;
            let grid = Grid::for_system(&g, n);
            let eps = eps_for(&cfg.eps, &grid)?;
            let pg = chain_components(&build_chain_graph(&g, &grid, &eps, cfg.mode)?);
            let verdict = order_isomorphic(&level.poset, &pg);
            let offset = (verdict.isomorphic && crate::poset::is_linear(&pg))
                .then(|| representative_offset(&level.poset, &pg, &h))
                .flatten();
            push(format!("conjugacy_isomorphic@{n}"), verdict.isomorphic);
            conjugacy.push(ConjugacyReport {
                resolution: n,
                components: level.poset.len(),
                conjugate_components: pg.len(),
                isomorphic: verdict.isomorphic,
                exact: verdict.exact,
                max_representative_offset: offset,
            });
        }
    }

    let passed = checks.iter().all(|c| c.passed);
    let expected = predict(cfg)?;
    let timing = opts.timing.then(|| Timing { levels_ms, total_ms: start.elapsed().as_millis() });
    Ok(AnalysisReport {
        system: levels[0].spec.kind_name(),
        tasks: cfg.tasks.iter().map(|t| t.name()).collect(),
        expected,
        levels: reports,
        refinement,
        conjugacy,
        checks,
        passed,
        timing,
    })
}

/// Pairs the chains of `p` and `q` by rank and returns the largest `|rep_q - h(rep_p)|`.
pub fn representative_offset(p: &ComponentPoset, q: &ComponentPoset, h: &PlHomeo) -> Option<Rational> {
    let cp = crate::poset::chain_order(p).ok()?;
    let cq = crate::poset::chain_order(q).ok()?;
    let mut cq = cq;
    if !h.is_increasing() {
        cq.reverse();
    }
    cp.iter()
        .zip(&cq)
        .map(|(&a, &b)| {
            let image = h.apply(&p.component(a).representative).ok()?;
            let d = &q.component(b).representative - image;
            Some(if d < Rational::default() { -d } else { d })
        })
        .try_fold(Rational::default(), |acc, d| d.map(|d| acc.max(d)))
}

/// Writes one DOT file per level into `dir`, returning the paths.
pub fn write_dots(report: &AnalysisReport, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut out = Vec::new();
    for l in &report.levels {
        let name = match l.depth {
            Some(d) => format!("poset_{}_depth{}.dot", l.resolution, d),
            None => format!("poset_{}.dot", l.resolution),
        };
        let path = dir.join(name);
        std::fs::write(&path, &l.dot).map_err(io_err(&path))?;
        out.push(path);
    }
    Ok(out)
}

pub fn write_json(report: &AnalysisReport, path: &Path) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    std::fs::write(path, report.to_json()).map_err(io_err(path))
}

pub fn load_config(path: &Path) -> Result<AnalysisConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(AnalysisConfig::parse(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn cfg(text: &str) -> AnalysisConfig {
        AnalysisConfig::parse(text).unwrap()
    }

    #[test]
    fn square_components() {
        let r = run(&cfg("system = ordinal\nlambda = 1\nresolutions = [1024]\neps = auto\ntasks = components"), RunOptions::default()).unwrap();
        let l = &r.levels[0];
        assert_eq!(l.poset.components.len(), 2);
        assert!(l.poset.linear);
        assert_eq!(l.poset.order_type, Some(2));
        assert!(r.passed);
        assert_eq!(r.expected.order_type.as_deref(), Some("2"));
    }

    #[test]
    fn predictions() {
        let p = predict(&cfg("system = ordinal\nlambda = 4\nresolutions = 1024\ntasks = components")).unwrap();
        assert_eq!(p.representatives, vec![int(0), rat(1, 8), rat(1, 4), rat(1, 2), int(1)]);
        assert_eq!(p.order_type.as_deref(), Some("5"));
        let p = predict(&cfg("system = dense_blocks\ndepth = 1\nvariant = with_max\nresolutions = 1024\ntasks = components")).unwrap();
        assert_eq!(p.representatives, vec![int(0), rat(3, 8), rat(3, 4)]);
        assert_eq!(p.label, "[0,1]∩Q truncation");
        let p = predict(&cfg("system = cantor\ndepth = 1\nresolutions = 1024\ntasks = components")).unwrap();
        for x in [int(0), rat(1, 3), rat(2, 3), int(1)] {
            assert!(p.representatives.contains(&x));
        }
        let p = predict(&cfg("system = ordinal\nlambda = w+1\nresolutions = 64\ntasks = components")).unwrap();
        assert_eq!(p.order_type.as_deref(), Some("w+2"));
    }

    #[test]
    fn depths_need_block_system() {
        let c = cfg("system = square\nresolutions = [8, 16]\ndepths = [1, 2]\ntasks = components");
        assert!(matches!(run(&c, RunOptions::default()), Err(CliError::DepthsUnsupported)));
    }

    #[test]
    fn deterministic_without_timing() {
        let c = cfg("system = ordinal\nlambda = 2\nresolutions = [64, 128]\ntasks = components, lyapunov, signature");
        let a = run(&c, RunOptions::default()).unwrap().to_json();
        let b = run(&c, RunOptions::default()).unwrap().to_json();
        assert_eq!(a, b);
        assert!(!a.contains("timing"));
        assert!(run(&c, RunOptions { timing: true }).unwrap().to_json().contains("total_ms"));
    }
}
