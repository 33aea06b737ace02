//! Line-based `key = value` analysis configs.
//!
//! ```text
//! # f_w over three resolutions
//! system = ordinal
//! lambda = w
//! resolutions = [256, 1024, 4096]
//! eps = auto
//! tasks = components, lyapunov
//! ```

use std::path::PathBuf;

use thiserror::Error;

use crate::chaingraph::Mode;
use crate::ordinal::Ordinal;
use crate::rational::{parse_rational, Rational};
use crate::systems::Variant;

/// Largest accepted cell count.
pub const MAX_CELLS: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("at least one resolution is required")]
    NoResolutions,
    #[error("at least one task is required")]
    NoTasks,
    #[error("resolution {0} exceeds the cap of {MAX_CELLS} cells")]
    TooManyCells(usize),
    #[error("{0} depths given for {1} resolutions")]
    DepthCount(usize, usize),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Task {
    Components,
    Lyapunov,
    Refine,
    Signature,
    Conjugacy,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Components => "components",
            Task::Lyapunov => "lyapunov",
            Task::Refine => "refine",
            Task::Signature => "signature",
            Task::Conjugacy => "conjugacy",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SystemConfig {
    Identity,
    Square,
    Ordinal(Ordinal),
    Cantor { depth: u32 },
    DenseBlocks { depth: u32, variant: Variant },
    Conjugated { inner: Box<SystemConfig>, homeo: Vec<(Rational, Rational)> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EpsConfig {
    Auto,
    Constant(Rational),
    Field(Vec<(Rational, Rational)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisConfig {
    pub system: SystemConfig,
    pub resolutions: Vec<usize>,
    /// Per-resolution construction depths for refinement traces.
    pub depths: Option<Vec<u32>>,
    pub eps: EpsConfig,
    pub mode: Mode,
    /// In execution order, without repeats.
    pub tasks: Vec<Task>,
    pub samples: usize,
    pub conjugacy_homeo: Option<Vec<(Rational, Rational)>>,
    pub json: Option<PathBuf>,
    pub dot_dir: Option<PathBuf>,
}

struct Entry<'a> {
    line: usize,
    col: usize,
    value: &'a str,
}

impl Entry<'_> {
    fn err(&self, offset: usize, msg: impl Into<String>) -> ConfigError {
        ConfigError::Syntax { line: self.line, col: self.col + offset, msg: msg.into() }
    }

    /// Comma-separated items, optionally inside one pair of brackets, with their column offsets.
    fn items(&self) -> Result<Vec<(usize, &str)>, ConfigError> {
        let v = self.value;
        let (body, base) = match (v.starts_with('['), v.ends_with(']')) {
            (true, true) => (&v[1..v.len() - 1], 1),
            (false, false) => (v, 0),
            (true, false) => return Err(self.err(v.len(), "missing `]`")),
            (false, true) => return Err(self.err(v.len() - 1, "unexpected `]`")),
        };
        let mut out = Vec::new();
        let mut start = 0;
        for (i, ch) in body.char_indices().chain(std::iter::once((body.len(), ','))) {
            if ch == ',' {
                let raw = &body[start..i];
                let trimmed = raw.trim_start();
                let lead = raw.len() - trimmed.len();
                let item = trimmed.trim_end();
                if item.is_empty() {
                    if i == body.len() && out.is_empty() {
                        break;
                    }
                    return Err(self.err(base + start + lead, "empty list item"));
                }
                out.push((base + start + lead, item));
                start = i + 1;
            }
        }
        Ok(out)
    }

    fn rational_at(&self, offset: usize, s: &str) -> Result<Rational, ConfigError> {
        parse_rational(s).map_err(|e| self.err(offset, e.to_string()))
    }

    fn integer<T: std::str::FromStr>(&self, offset: usize, s: &str) -> Result<T, ConfigError> {
        s.parse().map_err(|_| self.err(offset, format!("expected a non-negative integer, found `{s}`")))
    }

    /// `[(x, y), ...]` with rational coordinates.
    fn pairs(&self) -> Result<Vec<(Rational, Rational)>, ConfigError> {
        let v = self.value;
        if !v.starts_with('[') || !v.ends_with(']') {
            return Err(self.err(0, "expected a list of pairs like [(0,0), (1,1)]"));
        }
        let mut out = Vec::new();
        let mut rest = &v[1..v.len() - 1];
        let mut pos = 1;
        loop {
            let t = rest.trim_start();
            pos += rest.len() - t.len();
            rest = t;
            if rest.is_empty() {
                break;
            }
            if !rest.starts_with('(') {
                return Err(self.err(pos, "expected `(`"));
            }
            let close = rest.find(')').ok_or_else(|| self.err(pos, "missing `)`"))?;
            let inner = &rest[1..close];
            let comma = inner.find(',').ok_or_else(|| self.err(pos + 1, "expected `x, y`"))?;
            let (xs, ys) = (&inner[..comma], &inner[comma + 1..]);
            let x = self.rational_at(pos + 1 + (xs.len() - xs.trim_start().len()), xs.trim())?;
            let y = self.rational_at(pos + 2 + comma + (ys.len() - ys.trim_start().len()), ys.trim())?;
            out.push((x, y));
            rest = &rest[close + 1..];
            pos += close + 1;
            let t = rest.trim_start();
            pos += rest.len() - t.len();
            rest = t;
            if let Some(r) = rest.strip_prefix(',') {
                rest = r;
                pos += 1;
            } else if !rest.is_empty() {
                return Err(self.err(pos, "expected `,` between pairs"));
            }
        }
        if out.is_empty() {
            return Err(self.err(0, "empty pair list"));
        }
        Ok(out)
    }
}

const KEYS: &[&str] = &[
    "system", "lambda", "depth", "variant", "homeo", "inner", "resolutions", "depths", "eps", "mode", "tasks",
    "samples", "conjugacy_homeo", "json", "dot_dir",
];

fn parse_variant(e: &Entry) -> Result<Variant, ConfigError> {
    match e.value {
        "with_max" => Ok(Variant::WithMax),
        "no_max" => Ok(Variant::NoMax),
        "open_interval" => Ok(Variant::OpenInterval),
        other => Err(e.err(0, format!("unknown variant `{other}`; expected with_max, no_max or open_interval"))),
    }
}

impl AnalysisConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: Vec<(&str, Entry)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let Some(eq) = content.find('=') else {
                let col = content.len() - content.trim_start().len() + 1;
                return Err(ConfigError::Syntax { line, col, msg: "expected `key = value`".into() });
            };
            let key = content[..eq].trim();
            let key_col = content.len() - content.trim_start().len() + 1;
            if !KEYS.contains(&key) {
                return Err(ConfigError::Syntax { line, col: key_col, msg: format!("unknown key `{key}`") });
            }
            if entries.iter().any(|(k, _)| *k == key) {
                return Err(ConfigError::Syntax { line, col: key_col, msg: format!("duplicate key `{key}`") });
            }
            let after = &content[eq + 1..];
            let value = after.trim();
            let col = eq + 2 + (after.len() - after.trim_start().len());
            if value.is_empty() {
                return Err(ConfigError::Syntax { line, col, msg: format!("missing value for `{key}`") });
            }
            entries.push((key, Entry { line, col, value }));
        }
        let get = |k: &str| entries.iter().find(|(key, _)| *key == k).map(|(_, e)| e);
        let need = |k: &'static str| get(k).ok_or(ConfigError::Missing(k));

        let simple = |kind: &Entry| -> Result<SystemConfig, ConfigError> {
            Ok(match kind.value {
                "identity" => SystemConfig::Identity,
                "square" => SystemConfig::Square,
                "ordinal" => {
                    let e = need("lambda")?;
                    let l: Ordinal = e.value.parse().map_err(|err: crate::ordinal::OrdinalError| match err {
                        crate::ordinal::OrdinalError::Parse { col, msg } => e.err(col - 1, msg),
                        other => e.err(0, other.to_string()),
                    })?;
                    SystemConfig::Ordinal(l)
                }
                "cantor" => {
                    let e = need("depth")?;
                    let depth: u32 = e.integer(0, e.value)?;
                    if depth == 0 {
                        return Err(e.err(0, "cantor depth must be at least 1"));
                    }
                    SystemConfig::Cantor { depth }
                }
                "dense_blocks" => {
                    let e = need("depth")?;
                    SystemConfig::DenseBlocks { depth: e.integer(0, e.value)?, variant: parse_variant(need("variant")?)? }
                }
                other => {
                    return Err(kind.err(0, format!(
                        "unknown system `{other}`; expected identity, square, ordinal, cantor, dense_blocks or conjugated"
                    )))
                }
            })
        };
        let kind = need("system")?;
        let system = if kind.value == "conjugated" {
            let inner = need("inner")?;
            if inner.value == "conjugated" {
                return Err(inner.err(0, "inner system cannot itself be conjugated"));
            }
            SystemConfig::Conjugated { inner: Box::new(simple(inner)?), homeo: need("homeo")?.pairs()? }
        } else {
            simple(kind)?
        };

        let res = need("resolutions")?;
        let mut resolutions = Vec::new();
        for (off, item) in res.items()? {
            let n: usize = res.integer(off, item)?;
            if n == 0 {
                return Err(res.err(off, "resolution must be positive"));
            }
            if n > MAX_CELLS {
                return Err(ConfigError::TooManyCells(n));
            }
            resolutions.push(n);
        }
        if resolutions.is_empty() {
            return Err(ConfigError::NoResolutions);
        }

        let depths = match get("depths") {
            None => None,
            Some(e) => {
                let d = e.items()?.into_iter().map(|(off, s)| e.integer(off, s)).collect::<Result<Vec<u32>, _>>()?;
                if d.len() != resolutions.len() {
                    return Err(ConfigError::DepthCount(d.len(), resolutions.len()));
                }
                Some(d)
            }
        };

        let eps = match get("eps") {
            None => EpsConfig::Auto,
            Some(e) if e.value == "auto" => EpsConfig::Auto,
            Some(e) if e.value.starts_with('[') => {
                let pts = e.pairs()?;
                if pts.iter().any(|(_, v)| v <= &Rational::default()) {
                    return Err(e.err(0, "epsilon must be positive"));
                }
                EpsConfig::Field(pts)
            }
            Some(e) => {
                let v = e.rational_at(0, e.value)?;
                if v <= Rational::default() {
                    return Err(e.err(0, "epsilon must be positive"));
                }
                EpsConfig::Constant(v)
            }
        };

        let mode = match get("mode").map(|e| (e, e.value)) {
            None | Some((_, "enclosure")) => Mode::Enclosure,
            Some((_, "sampled")) => Mode::Sampled,
            Some((e, other)) => return Err(e.err(0, format!("unknown mode `{other}`; expected enclosure or sampled"))),
        };

        let t = need("tasks")?;
        let mut tasks = Vec::new();
        for (off, item) in t.items()? {
            let task = match item {
                "components" => Task::Components,
                "lyapunov" => Task::Lyapunov,
                "refine" => Task::Refine,
                "signature" => Task::Signature,
                "conjugacy" => Task::Conjugacy,
                other => return Err(t.err(off, format!("unknown task `{other}`"))),
            };
            tasks.push(task);
        }
        if tasks.is_empty() {
            return Err(ConfigError::NoTasks);
        }
        tasks.sort();
        tasks.dedup();

        let samples = match get("samples") {
            None => 10,
            Some(e) => match e.integer(0, e.value)? {
                0 => return Err(e.err(0, "samples must be positive")),
                s => s,
            },
        };
        let conjugacy_homeo = get("conjugacy_homeo").map(Entry::pairs).transpose()?;
        if tasks.contains(&Task::Conjugacy) && conjugacy_homeo.is_none() {
            return Err(ConfigError::Missing("conjugacy_homeo"));
        }
        if (tasks.contains(&Task::Refine) || tasks.contains(&Task::Signature)) && resolutions.len() < 2 {
            return Err(ConfigError::Invalid("refinement needs at least two resolutions".into()));
        }
        if !resolutions.windows(2).all(|w| w[0] < w[1]) && (tasks.contains(&Task::Refine) || tasks.contains(&Task::Signature)) {
            return Err(ConfigError::Invalid("refinement resolutions must strictly increase".into()));
        }

        Ok(AnalysisConfig {
            system,
            resolutions,
            depths,
            eps,
            mode,
            tasks,
            samples,
            conjugacy_homeo,
            json: get("json").map(|e| PathBuf::from(e.value)),
            dot_dir: get("dot_dir").map(|e| PathBuf::from(e.value)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn parses_full_config() {
        let c = AnalysisConfig::parse(
            "# comment\nsystem = conjugated\ninner = ordinal\nlambda = 2\nhomeo = [(0,0), (1/3, 1/2), (1,1)]\n\
             resolutions = [1024]\neps = 1/512\nmode = sampled\ntasks = conjugacy, components\n\
             conjugacy_homeo = [(0,0),(1/3,1/2),(1,1)]\n",
        )
        .unwrap();
        assert_eq!(c.tasks, vec![Task::Components, Task::Conjugacy]);
        assert_eq!(c.eps, EpsConfig::Constant(rat(1, 512)));
        assert_eq!(c.mode, Mode::Sampled);
        match c.system {
            SystemConfig::Conjugated { inner, homeo } => {
                assert_eq!(*inner, SystemConfig::Ordinal(Ordinal::finite(2)));
                assert_eq!(homeo[1], (rat(1, 3), rat(1, 2)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn defaults() {
        let c = AnalysisConfig::parse("system = square\nresolutions = 64\ntasks = components").unwrap();
        assert_eq!(c.eps, EpsConfig::Auto);
        assert_eq!(c.mode, Mode::Enclosure);
        assert_eq!(c.samples, 10);
    }

    #[test]
    fn empty_tasks_rejected() {
        assert_eq!(AnalysisConfig::parse("system = square\nresolutions = [8]\ntasks = []"), Err(ConfigError::NoTasks));
    }

    #[test]
    fn positioned_errors() {
        let e = AnalysisConfig::parse("system = square\nresolutions = [8, x]\ntasks = components").unwrap_err();
        assert_eq!(e, ConfigError::Syntax { line: 2, col: 19, msg: "expected a non-negative integer, found `x`".into() });
        let e = AnalysisConfig::parse("system = ordinal\nlambda = w^\nresolutions = 8\ntasks = components").unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 2, col: 12, .. }), "{e:?}");
        let e = AnalysisConfig::parse("sistem = square").unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 1, col: 1, .. }));
        let e = AnalysisConfig::parse("system = square\nresolutions = 8\ntasks = components\neps = -1").unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 4, col: 7, .. }));
    }

    #[test]
    fn caps_cells() {
        let e = AnalysisConfig::parse("system = square\nresolutions = 2000000\ntasks = components").unwrap_err();
        assert_eq!(e, ConfigError::TooManyCells(2_000_000));
    }

    #[test]
    fn eps_field() {
        let c = AnalysisConfig::parse("system = square\nresolutions = 8\ntasks = components\neps = [(0, 1/8), (1, 1/4)]").unwrap();
        assert_eq!(c.eps, EpsConfig::Field(vec![(rat(0, 1), rat(1, 8)), (rat(1, 1), rat(1, 4))]));
    }
}
