//! Run configuration: flat `key = value` text with `[section]` headers.
//!
//! ```ini
//! [run]
//! task = verify
//! statistics = relativistic
//! tol = 1e-12
//!
//! [spectrum]
//! kind = circle
//! radius = 1
//! mass_sq = 1
//!
//! [grid]
//! start = 0.02
//! stop = 0.2
//! count = 9
//! spacing = log
//!
//! [expansion]
//! order = 0
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;

use crate::asymptotics::TraceKind;
use crate::error::{Error, Result};
use crate::mellin::{ZetaMethod, ZrMethod};
use crate::spectra::Spectrum;
use crate::traces::TracePath;
use crate::Statistics;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Trace,
    Aq,
    Zeta,
    Expand,
    Verify,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Trace => "trace",
            Task::Aq => "aq",
            Task::Zeta => "zeta",
            Task::Expand => "expand",
            Task::Verify => "verify",
        }
    }
}

impl FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Task> {
        Ok(match s {
            "trace" => Task::Trace,
            "aq" => Task::Aq,
            "zeta" => Task::Zeta,
            "expand" => Task::Expand,
            "verify" => Task::Verify,
            _ => return Err(Error::Parse(format!("unknown task {s:?} (trace, aq, zeta, expand, verify)"))),
        })
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which trace (or zeta function) a run refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceStat {
    Classical,
    Relativistic,
    Bose,
    Fermi,
}

impl TraceStat {
    pub fn name(self) -> &'static str {
        match self {
            TraceStat::Classical => "classical",
            TraceStat::Relativistic => "relativistic",
            TraceStat::Bose => "bose",
            TraceStat::Fermi => "fermi",
        }
    }

    pub fn statistics(self) -> Option<Statistics> {
        match self {
            TraceStat::Bose => Some(Statistics::Bose),
            TraceStat::Fermi => Some(Statistics::Fermi),
            _ => None,
        }
    }

    pub fn trace_kind(self) -> Result<TraceKind> {
        match self {
            TraceStat::Relativistic => Ok(TraceKind::Relativistic),
            TraceStat::Bose => Ok(TraceKind::Bose),
            TraceStat::Fermi => Ok(TraceKind::Fermi),
            TraceStat::Classical => Err(Error::Unsupported(
                "no small-beta expansion for the classical trace; use relativistic, bose or fermi".into(),
            )),
        }
    }
}

impl FromStr for TraceStat {
    type Err = Error;
    fn from_str(s: &str) -> Result<TraceStat> {
        Ok(match s {
            "classical" => TraceStat::Classical,
            "relativistic" => TraceStat::Relativistic,
            "bose" => TraceStat::Bose,
            "fermi" => TraceStat::Fermi,
            _ => {
                return Err(Error::Parse(format!(
                    "unknown statistics {s:?} (classical, relativistic, bose, fermi)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumSpec {
    Circle { radius: f64, mass_sq: f64 },
    Torus { lengths: Vec<f64>, mass_sq: f64 },
    Sphere2 { radius: f64, mass_sq: f64 },
    /// Explicit spectrum file, optionally shifted by `mass_sq`.
    File { path: PathBuf, mass_sq: f64 },
}

impl SpectrumSpec {
    pub fn build(&self) -> Result<Spectrum> {
        match self {
            SpectrumSpec::Circle { radius, mass_sq } => Spectrum::circle(*radius, *mass_sq),
            SpectrumSpec::Torus { lengths, mass_sq } => Spectrum::flat_torus(lengths, *mass_sq),
            SpectrumSpec::Sphere2 { radius, mass_sq } => Spectrum::sphere2(*radius, *mass_sq),
            SpectrumSpec::File { path, mass_sq } => {
                let s = Spectrum::from_file(path)?;
                if *mass_sq != 0.0 {
                    s.with_mass_shift(*mass_sq)
                } else {
                    Ok(s)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize, log: bool },
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, count, log } => {
                if *count == 1 {
                    return vec![*start];
                }
                let last = (*count - 1) as f64;
                (0..*count)
                    .map(|i| {
                        let f = i as f64 / last;
                        if i + 1 == *count {
                            *stop
                        } else if *log {
                            (start.ln() + (stop.ln() - start.ln()) * f).exp()
                        } else {
                            start + (stop - start) * f
                        }
                    })
                    .collect()
            }
        }
    }
}

/// The chemical potential, either fixed or tied to `β` through `βμ = x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Chemical {
    Mu(f64),
    BetaMu(f64),
}

impl Chemical {
    pub fn at(self, beta: f64) -> f64 {
        match self {
            Chemical::Mu(m) => m,
            Chemical::BetaMu(x) => x / beta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationRule {
    Full,
    Optimal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub statistics: TraceStat,
    pub spectrum: SpectrumSpec,
    pub grid: Grid,
    pub chemical: Chemical,
    pub tol: f64,
    pub path: TracePath,
    pub output: Option<PathBuf>,
    /// Highest `k` kept in the infinite sums of an expansion.
    pub order: u32,
    pub truncation: TruncationRule,
    pub a_tol: f64,
    /// Per-point bound on the relative residual; `None` checks only the slope.
    pub residual_tol: Option<f64>,
    pub slope_tol: f64,
    pub zeta_method: ZetaMethod,
    pub zr_method: ZrMethod,
    pub quadrature_check: bool,
    /// The configuration text, echoed into the CSV metadata.
    pub source: String,
}

const KEYS: &[(&str, &[&str])] = &[
    ("run", &["task", "statistics", "mu", "beta_mu", "tol", "path", "output"]),
    ("spectrum", &["kind", "radius", "mass_sq", "lengths", "file"]),
    ("grid", &["values", "start", "stop", "count", "spacing"]),
    ("expansion", &["order", "truncation", "a_tol", "residual_tol", "slope_tol"]),
    ("zeta", &["method", "quadrature_check"]),
];

struct Raw<'a> {
    ini: &'a Ini,
}

impl<'a> Raw<'a> {
    fn get(&self, section: &str, key: &str) -> Option<&'a str> {
        self.ini.section(Some(section)).and_then(|p| p.get(key)).map(str::trim)
    }

    fn req(&self, section: &str, key: &str) -> Result<&'a str> {
        self.get(section, key)
            .ok_or_else(|| Error::Parse(format!("missing [{section}] {key}")))
    }

    fn parse<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::Parse(format!("[{section}] {key}: cannot parse {v:?}"))),
        }
    }

    fn float_list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.get(section, key) else { return Ok(None) };
        v.split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("[{section}] {key}: cannot parse {x:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

fn check_keys(ini: &Ini) -> Result<()> {
    for (sec, props) in ini.iter() {
        let Some(name) = sec else {
            if let Some((k, _)) = props.iter().next() {
                return Err(Error::Parse(format!("key {k:?} outside any section")));
            }
            continue;
        };
        let allowed = KEYS
            .iter()
            .find(|(s, _)| *s == name)
            .map(|(_, k)| *k)
            .ok_or_else(|| Error::Parse(format!("unknown section [{name}]")))?;
        for (k, _) in props.iter() {
            if !allowed.contains(&k) {
                return Err(Error::Parse(format!("unknown key {k:?} in [{name}]")));
            }
        }
    }
    Ok(())
}

impl RunConfig {
    /// Parses configuration text. `task` comes from the command line and
    /// must agree with `[run] task` when that is given. Relative paths are
    /// resolved against `base`.
    pub fn parse(text: &str, task: Option<Task>, base: &Path) -> Result<RunConfig> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        check_keys(&ini)?;
        let raw = Raw { ini: &ini };

        let task = match (task, raw.parse::<Task>("run", "task")?) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Parse(format!("task {a} on the command line, {b} in the config")))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(Error::Parse("missing [run] task".into())),
        };
        let statistics = match raw.parse::<TraceStat>("run", "statistics")? {
            Some(s) => s,
            None if task == Task::Aq => TraceStat::Classical,
            None => return Err(Error::Parse("missing [run] statistics".into())),
        };
        let chemical = match (raw.parse::<f64>("run", "mu")?, raw.parse::<f64>("run", "beta_mu")?) {
            (Some(_), Some(_)) => return Err(Error::Parse("give at most one of [run] mu and beta_mu".into())),
            (Some(m), None) => Chemical::Mu(m),
            (None, Some(x)) => Chemical::BetaMu(x),
            (None, None) => Chemical::Mu(0.0),
        };
        let tol = raw.parse::<f64>("run", "tol")?.unwrap_or(1e-12);
        let path = match raw.get("run", "path") {
            None | Some("direct") => TracePath::DirectSum,
            Some("reduction") => TracePath::ReductionIntegral,
            Some(v) => return Err(Error::Parse(format!("[run] path: {v:?} is not direct or reduction"))),
        };
        let output = raw.get("run", "output").map(|p| base.join(p));

        let mass_sq = raw.parse::<f64>("spectrum", "mass_sq")?.unwrap_or(0.0);
        let spectrum = match raw.req("spectrum", "kind")? {
            "circle" => SpectrumSpec::Circle { radius: raw.parse("spectrum", "radius")?.unwrap_or(1.0), mass_sq },
            "sphere2" => SpectrumSpec::Sphere2 { radius: raw.parse("spectrum", "radius")?.unwrap_or(1.0), mass_sq },
            "torus" => SpectrumSpec::Torus {
                lengths: raw
                    .float_list("spectrum", "lengths")?
                    .ok_or_else(|| Error::Parse("torus needs [spectrum] lengths".into()))?,
                mass_sq,
            },
            "explicit" => SpectrumSpec::File { path: base.join(raw.req("spectrum", "file")?), mass_sq },
            k => return Err(Error::Parse(format!("unknown spectrum kind {k:?} (circle, torus, sphere2, explicit)"))),
        };

        let grid = match raw.float_list("grid", "values")? {
            Some(v) => {
                if raw.get("grid", "start").is_some() || raw.get("grid", "stop").is_some() {
                    return Err(Error::Parse("[grid] takes either values or start/stop/count".into()));
                }
                Grid::List(v)
            }
            None => Grid::Range {
                start: raw.parse("grid", "start")?.ok_or_else(|| Error::Parse("missing [grid] values or start".into()))?,
                stop: raw.parse("grid", "stop")?.ok_or_else(|| Error::Parse("missing [grid] stop".into()))?,
                count: raw.parse("grid", "count")?.ok_or_else(|| Error::Parse("missing [grid] count".into()))?,
                log: match raw.get("grid", "spacing") {
                    None | Some("log") => true,
                    Some("linear") => false,
                    Some(v) => return Err(Error::Parse(format!("[grid] spacing: {v:?} is not log or linear"))),
                },
            },
        };

        let truncation = match raw.get("expansion", "truncation") {
            None | Some("full") => TruncationRule::Full,
            Some("optimal") => TruncationRule::Optimal,
            Some(v) => return Err(Error::Parse(format!("[expansion] truncation: {v:?} is not full or optimal"))),
        };
        let zeta_method = match raw.get("zeta", "method") {
            None | Some("direct") => (ZetaMethod::Direct, ZrMethod::Direct),
            Some("via_a") => (ZetaMethod::ViaA, ZrMethod::ClosedMu0),
            Some("mu_series") => (ZetaMethod::ViaA, ZrMethod::MuSeries),
            Some(v) => return Err(Error::Parse(format!("[zeta] method: {v:?} is not direct, via_a or mu_series"))),
        };

        let cfg = RunConfig {
            task,
            statistics,
            spectrum,
            grid,
            chemical,
            tol,
            path,
            output,
            order: raw.parse("expansion", "order")?.unwrap_or(0),
            truncation,
            a_tol: raw.parse("expansion", "a_tol")?.unwrap_or(1e-10),
            residual_tol: raw.parse("expansion", "residual_tol")?,
            slope_tol: raw.parse("expansion", "slope_tol")?.unwrap_or(0.3),
            zeta_method: zeta_method.0,
            zr_method: zeta_method.1,
            quadrature_check: raw.parse("zeta", "quadrature_check")?.unwrap_or(false),
            source: text.to_string(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, task: Option<Task>) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        RunConfig::parse(&text, task, base)
    }

    fn validate(&self) -> Result<()> {
        let pts = self.grid.points();
        if pts.is_empty() {
            return Err(Error::Parse("grid is empty".into()));
        }
        if let Grid::Range { start, stop, count, log } = self.grid {
            if count == 0 || !(start < stop) {
                return Err(Error::Parse("[grid] needs start < stop and count >= 1".into()));
            }
            if log && start <= 0.0 {
                return Err(Error::Parse("[grid] log spacing needs start > 0".into()));
            }
        }
        if pts.iter().any(|x| !x.is_finite()) {
            return Err(Error::Parse("grid values must be finite".into()));
        }
        // β and t grids are positive; q and s grids may be any real
        if matches!(self.task, Task::Trace | Task::Expand | Task::Verify) && pts.iter().any(|&x| x <= 0.0) {
            return Err(Error::Parse(format!("{} grid must be strictly positive", self.task)));
        }
        if matches!(self.task, Task::Expand | Task::Verify) {
            self.statistics.trace_kind()?;
        }
        if self.task == Task::Verify && pts.len() < 5 {
            return Err(Error::Parse(format!("verify needs at least 5 grid points, got {}", pts.len())));
        }
        for (name, v) in [("tol", self.tol), ("a_tol", self.a_tol)] {
            if !(v > 0.0 && v <= 1e-2) {
                return Err(Error::Parse(format!("{name} must lie in (0, 1e-2], got {v}")));
            }
        }
        if !(self.slope_tol > 0.0) {
            return Err(Error::Parse("slope_tol must be positive".into()));
        }
        if let Some(r) = self.residual_tol {
            if !(r > 0.0) {
                return Err(Error::Parse("residual_tol must be positive".into()));
            }
        }
        let mu_ok = match self.chemical {
            Chemical::Mu(m) | Chemical::BetaMu(m) => m.is_finite(),
        };
        if !mu_ok {
            return Err(Error::Parse("mu must be finite".into()));
        }
        Ok(())
    }
}
