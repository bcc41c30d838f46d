//! Batch front end: runs a configured task over a grid and renders a CSV
//! table with a `#`-prefixed metadata block.
//!
//! Grid points are evaluated in parallel on a pool capped by
//! `QHEAT_MAX_THREADS`; rows are written in grid order, and every reduction
//! underneath uses a fixed order, so the CSV body does not depend on the
//! thread count.

mod config;
mod report;

pub use config::{Chemical, Grid, RunConfig, SpectrumSpec, Task, TraceStat, TruncationRule};
pub use report::{fit_slope, SlopeFit, VerificationReport, VerifyRow, MIN_FIT_POINTS};

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::asymptotics::{build_expansion, evaluate_expansion, AValues, ExpansionSeries, MuRegime, Truncation};
use crate::error::{Error, Result};
use crate::mellin::{a_q, a_q_prime, z_quantum, z_quantum_checked, z_relativistic, zeta_h};
use crate::spectra::Spectrum;
use crate::traces::{theta_classical_estimate, theta_quantum_estimate, theta_relativistic_estimate};
use crate::Estimate;

pub const THREADS_ENV: &str = "QHEAT_MAX_THREADS";

/// Exit status for a run that completed and, if it verified, passed.
pub const EXIT_OK: i32 = 0;
/// Malformed input, unsupported combination or a failed computation.
pub const EXIT_INPUT: i32 = 1;
/// Verification completed but did not pass.
pub const EXIT_VERIFY_FAILED: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Cell {
    F(f64),
    U(u64),
    B(bool),
}

/// Shortest representation that parses back to the same double.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::F(x) => format_f64(x),
            Cell::U(u) => u.to_string(),
            Cell::B(b) => b.to_string(),
        }
    }
}

struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn check_finite(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                if let Cell::F(x) = cell {
                    if !x.is_finite() {
                        return Err(Error::Tolerance(format!(
                            "non-finite value {x} in column {} of row {}",
                            self.columns[c],
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Rendered output of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub csv: String,
    pub report: Option<VerificationReport>,
}

impl RunOutput {
    /// The CSV without its `#` lines.
    pub fn body(&self) -> String {
        csv_body(&self.csv)
    }

    pub fn exit_code(&self) -> i32 {
        match &self.report {
            Some(r) if !r.passed => EXIT_VERIFY_FAILED,
            _ => EXIT_OK,
        }
    }
}

pub fn csv_body(csv: &str) -> String {
    csv.lines().filter(|l| !l.starts_with('#')).fold(String::new(), |mut s, l| {
        s.push_str(l);
        s.push('\n');
        s
    })
}

/// Thread cap from `QHEAT_MAX_THREADS`; `None` when unset.
pub fn max_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::Parse(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

/// Runs `cfg` on a pool of at most `threads` workers.
pub fn run_with_threads(cfg: &RunConfig, threads: Option<usize>) -> Result<RunOutput> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?;
    pool.install(|| run_in_pool(cfg))
}

/// Runs `cfg` with the thread cap taken from the environment.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    run_with_threads(cfg, max_threads()?)
}

/// Parses the config at `config`, runs `task`, and writes the CSV to `out`
/// (or the configured output, or stdout). Returns the process exit status.
pub fn execute(task: Task, config: &Path, out: Option<&Path>) -> i32 {
    let result = RunConfig::from_file(config, Some(task)).and_then(|cfg| {
        let output = run(&cfg)?;
        match out.or(cfg.output.as_deref()) {
            Some(p) => std::fs::write(p, &output.csv)?,
            None => print!("{}", output.csv),
        }
        Ok(output)
    });
    match result {
        Ok(o) => {
            if let Some(r) = &o.report {
                eprintln!("{}", summary_line(r));
            }
            o.exit_code()
        }
        Err(e) => {
            eprintln!("qheat: {e}");
            EXIT_INPUT
        }
    }
}

fn summary_line(r: &VerificationReport) -> String {
    let slope = match r.fit {
        Some(f) => format!("{:.4} ± {:.4}", f.slope, f.half_width),
        None => "n/a".into(),
    };
    format!(
        "verify: {} (slope {slope}, predicted {}, tolerance {})",
        if r.passed { "pass" } else { "FAIL" },
        r.predicted_exponent,
        r.slope_tol
    )
}

/// Evaluates `f` at every grid point in parallel and returns rows in grid
/// order. The first failing point (in grid order) decides the error.
fn map_grid<F>(points: &[f64], f: F) -> Result<Vec<Vec<Cell>>>
where
    F: Fn(f64) -> Result<Vec<Cell>> + Sync,
{
    let rows: Vec<Result<Vec<Cell>>> = points.par_iter().map(|&x| f(x)).collect();
    rows.into_iter().collect()
}

fn est(e: Estimate) -> [Cell; 2] {
    [Cell::F(e.value), Cell::F(e.err)]
}

fn run_in_pool(cfg: &RunConfig) -> Result<RunOutput> {
    let spec = cfg.spectrum.build()?;
    let points = cfg.grid.points();
    let mut extra_meta: Vec<String> = Vec::new();
    let mut report = None;
    let table = match cfg.task {
        Task::Trace => trace_table(cfg, &spec, &points)?,
        Task::Aq => aq_table(cfg, &spec, &points)?,
        Task::Zeta => zeta_table(cfg, &spec, &points)?,
        Task::Expand => {
            let (series, a) = prepare_series(cfg, &spec, cfg.order)?;
            extra_meta.extend(series.to_string().lines().map(|l| format!("term: {l}")));
            expand_table(cfg, &series, &a, &points)?
        }
        Task::Verify => {
            let (series, a) = prepare_series(cfg, &spec, cfg.order)?;
            extra_meta.extend(series.to_string().lines().map(|l| format!("term: {l}")));
            let (table, rep) = verify_table(cfg, &spec, &series, &a, &points)?;
            report = Some(rep);
            table
        }
    };
    table.check_finite()?;
    let csv = render(cfg, &table, &extra_meta, report.as_ref());
    Ok(RunOutput { csv, report })
}

fn trace_table(cfg: &RunConfig, spec: &Spectrum, points: &[f64]) -> Result<Table> {
    let tol = cfg.tol;
    Ok(match cfg.statistics {
        config::TraceStat::Classical => Table {
            columns: vec!["t", "value", "err"],
            rows: map_grid(points, |t| {
                let e = theta_classical_estimate(spec, t, tol)?;
                Ok([vec![Cell::F(t)], est(e).to_vec()].concat())
            })?,
        },
        config::TraceStat::Relativistic => Table {
            columns: vec!["beta", "value", "err"],
            rows: map_grid(points, |b| {
                let e = theta_relativistic_estimate(spec, b, tol)?;
                Ok([vec![Cell::F(b)], est(e).to_vec()].concat())
            })?,
        },
        stat => {
            let st = stat.statistics().expect("quantum statistics");
            Table {
                columns: vec!["beta", "mu", "value", "err"],
                rows: map_grid(points, |b| {
                    let mu = cfg.chemical.at(b);
                    let e = theta_quantum_estimate(spec, b, mu, st, tol, cfg.path)?;
                    Ok([vec![Cell::F(b), Cell::F(mu)], est(e).to_vec()].concat())
                })?,
            }
        }
    })
}

fn aq_table(cfg: &RunConfig, spec: &Spectrum, points: &[f64]) -> Result<Table> {
    let tol = cfg.a_tol;
    Ok(Table {
        columns: vec!["q", "value", "err", "regularization_order", "derivative", "derivative_err"],
        rows: map_grid(points, |q| {
            let v = a_q(spec, q, tol)?;
            let d = a_q_prime(spec, q, tol)?;
            Ok(vec![
                Cell::F(q),
                Cell::F(v.value),
                Cell::F(v.err_estimate),
                Cell::U(v.regularization_order as u64),
                Cell::F(d.value),
                Cell::F(d.err_estimate),
            ])
        })?,
    })
}

fn fixed_mu(cfg: &RunConfig) -> Result<f64> {
    match cfg.chemical {
        Chemical::Mu(m) => Ok(m),
        Chemical::BetaMu(_) => Err(Error::Parse("zeta task needs a fixed [run] mu, not beta_mu".into())),
    }
}

fn zeta_table(cfg: &RunConfig, spec: &Spectrum, points: &[f64]) -> Result<Table> {
    let tol = cfg.tol;
    Ok(match cfg.statistics {
        config::TraceStat::Classical => Table {
            columns: vec!["s", "value", "err"],
            rows: map_grid(points, |s| {
                let e = zeta_h(spec, s, cfg.zeta_method, tol)?;
                Ok([vec![Cell::F(s)], est(e).to_vec()].concat())
            })?,
        },
        config::TraceStat::Relativistic => {
            let mu = fixed_mu(cfg)?;
            Table {
                columns: vec!["s", "mu", "value", "err"],
                rows: map_grid(points, |s| {
                    let e = z_relativistic(spec, s, mu, cfg.zr_method, tol)?;
                    Ok([vec![Cell::F(s), Cell::F(mu)], est(e).to_vec()].concat())
                })?,
            }
        }
        stat => {
            let st = stat.statistics().expect("quantum statistics");
            let mu = fixed_mu(cfg)?;
            if cfg.quadrature_check {
                Table {
                    columns: vec!["s", "mu", "value", "err", "quadrature", "quadrature_err"],
                    rows: map_grid(points, |s| {
                        let z = z_quantum_checked(spec, s, mu, st, tol)?;
                        Ok([vec![Cell::F(s), Cell::F(mu)], est(z.relation).to_vec(), est(z.quadrature).to_vec()].concat())
                    })?,
                }
            } else {
                Table {
                    columns: vec!["s", "mu", "value", "err"],
                    rows: map_grid(points, |s| {
                        let e = z_quantum(spec, s, mu, st, tol)?;
                        Ok([vec![Cell::F(s), Cell::F(mu)], est(e).to_vec()].concat())
                    })?,
                }
            }
        }
    })
}

fn regime(cfg: &RunConfig) -> Result<MuRegime> {
    match cfg.statistics {
        config::TraceStat::Relativistic => Ok(MuRegime::Zero),
        _ => MuRegime::of(match cfg.chemical {
            Chemical::Mu(m) | Chemical::BetaMu(m) => m,
        }),
    }
}

fn prepare_series(cfg: &RunConfig, spec: &Spectrum, order: u32) -> Result<(ExpansionSeries, AValues)> {
    let kind = cfg.statistics.trace_kind()?;
    let series = build_expansion(spec.dim(), kind, regime(cfg)?, order)?;
    let a = AValues::for_series(spec, &series, cfg.a_tol)?;
    Ok((series, a))
}

fn truncation(cfg: &RunConfig) -> Truncation {
    match cfg.truncation {
        TruncationRule::Full => Truncation::Full,
        TruncationRule::Optimal => Truncation::Optimal,
    }
}

fn expand_table(cfg: &RunConfig, series: &ExpansionSeries, a: &AValues, points: &[f64]) -> Result<Table> {
    Ok(Table {
        columns: vec!["beta", "mu", "value", "err"],
        rows: map_grid(points, |b| {
            let mu = cfg.chemical.at(b);
            let e = evaluate_expansion(series, a, b, mu, truncation(cfg))?;
            Ok([vec![Cell::F(b), Cell::F(mu)], est(e).to_vec()].concat())
        })?,
    })
}

/// First `β`-power of the order-`order + 1` series beyond the order-`order`
/// series.
pub fn next_exponent(series: &ExpansionSeries) -> Result<f64> {
    let top = series.powers().last().copied().unwrap_or(f64::NEG_INFINITY);
    let more = build_expansion(series.dim, series.trace_kind, series.mu_regime, series.truncation + 1)?;
    more.powers()
        .into_iter()
        .find(|&p| p > top + 1e-9)
        .ok_or_else(|| Error::Unsupported("series has no next order".into()))
}

fn verify_table(
    cfg: &RunConfig,
    spec: &Spectrum,
    series: &ExpansionSeries,
    a: &AValues,
    points: &[f64],
) -> Result<(Table, VerificationReport)> {
    let stat = cfg.statistics.statistics();
    let rows: Vec<Result<VerifyRow>> = points
        .par_iter()
        .map(|&b| {
            let mu = cfg.chemical.at(b);
            let direct = match stat {
                None => theta_relativistic_estimate(spec, b, cfg.tol)?,
                Some(st) => theta_quantum_estimate(spec, b, mu, st, cfg.tol, cfg.path)?,
            };
            let e = evaluate_expansion(series, a, b, mu, truncation(cfg))?;
            let abs_residual = (direct.value - e.value).abs();
            let rel_residual = abs_residual / direct.value.abs();
            Ok(VerifyRow {
                beta: b,
                mu,
                direct: direct.value,
                expansion: e.value,
                abs_residual,
                rel_residual,
                pass: cfg.residual_tol.is_none_or(|t| rel_residual <= t),
            })
        })
        .collect();
    let rows: Vec<VerifyRow> = rows.into_iter().collect::<Result<_>>()?;
    let report = VerificationReport::new(rows, next_exponent(series)?, cfg.slope_tol, cfg.residual_tol)?;
    let table = Table {
        columns: vec!["beta", "mu", "direct", "expansion", "abs_residual", "rel_residual", "pass"],
        rows: report
            .rows
            .iter()
            .map(|r| {
                vec![
                    Cell::F(r.beta),
                    Cell::F(r.mu),
                    Cell::F(r.direct),
                    Cell::F(r.expansion),
                    Cell::F(r.abs_residual),
                    Cell::F(r.rel_residual),
                    Cell::B(r.pass),
                ]
            })
            .collect(),
    };
    Ok((table, report))
}

fn render(cfg: &RunConfig, table: &Table, extra: &[String], report: Option<&VerificationReport>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# qheat {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# task: {}", cfg.task);
    let _ = writeln!(s, "# statistics: {}", cfg.statistics.name());
    let _ = writeln!(
        s,
        "# tolerances: tol={} a_tol={} residual_tol={} slope_tol={}",
        format_f64(cfg.tol),
        format_f64(cfg.a_tol),
        cfg.residual_tol.map_or("none".into(), format_f64),
        format_f64(cfg.slope_tol)
    );
    s.push_str("# config:\n");
    for line in cfg.source.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let _ = writeln!(s, "#   {line}");
    }
    for line in extra {
        let _ = writeln!(s, "# {line}");
    }
    let _ = writeln!(s, "{}", table.columns.join(","));
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|c| c.render()).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    if let Some(r) = report {
        let _ = writeln!(s, "# predicted_exponent: {}", format_f64(r.predicted_exponent));
        match r.fit {
            Some(f) => {
                let _ = writeln!(
                    s,
                    "# slope: {} half_width: {} points: {}",
                    format_f64(f.slope),
                    format_f64(f.half_width),
                    f.points
                );
            }
            None => s.push_str("# slope: none (fewer than 5 nonzero residuals)\n"),
        }
        let _ = writeln!(s, "# slope_pass: {}", r.slope_pass);
        let _ = writeln!(s, "# result: {}", if r.passed { "pass" } else { "fail" });
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::parse(text, None, Path::new(".")).unwrap()
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, 1.0, -2.5, std::f64::consts::TAU, 1e-20, 3.3e-7, 1.7976931348623157e308, 5e-324, 0.1 + 0.2] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_f64(1e-20), "1e-20");
        assert_eq!(format_f64(0.5), "0.5");
    }

    #[test]
    fn trace_task_rows_follow_grid() {
        let c = cfg("[run]\ntask=trace\nstatistics=fermi\nmu=0\n[spectrum]\nkind=circle\nradius=1\nmass_sq=1\n[grid]\nvalues=0.1,1,10\n");
        let out = run_with_threads(&c, Some(2)).unwrap();
        let body = out.body();
        let lines: Vec<&str> = body.lines().collect();
        assert_eq!(lines[0], "beta,mu,value,err");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0.1,0,"));
        assert!(lines[3].starts_with("10,0,"));
        assert_eq!(out.exit_code(), EXIT_OK);
    }

    #[test]
    fn metadata_echoes_config() {
        let c = cfg("[run]\ntask=aq\n[spectrum]\nkind=circle\nmass_sq=1\n[grid]\nvalues=0\n");
        let out = run_with_threads(&c, Some(1)).unwrap();
        assert!(out.csv.starts_with("# qheat "));
        assert!(out.csv.contains("#   kind=circle"));
        assert!(out.csv.contains("tol=1e-12"));
        let row = out.body().lines().nth(1).unwrap().to_string();
        let v: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!((v / (2.0 * std::f64::consts::PI) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn input_errors() {
        let base = "[spectrum]\nkind=circle\nmass_sq=1\n[grid]\nvalues=0.1,1\n";
        let bad = [
            format!("[run]\ntask=trace\nstatistics=bose\nmu=2\ncolour=red\n{base}"),
            format!("[run]\ntask=dance\nstatistics=bose\n{base}"),
            format!("[run]\ntask=trace\nstatistics=bose\nmu=1\nbeta_mu=1\n{base}"),
            format!("[run]\ntask=verify\nstatistics=relativistic\n{base}"),
            format!("[run]\ntask=expand\nstatistics=classical\n{base}"),
            "[run]\ntask=trace\nstatistics=fermi\n[spectrum]\nkind=circle\n[grid]\nvalues=0.1,-1\n".to_string(),
            "[run]\ntask=trace\nstatistics=fermi\n[spectrum]\nkind=circle\n[grid]\nstart=1\nstop=0.1\ncount=3\n".to_string(),
        ];
        for text in &bad {
            assert!(RunConfig::parse(text, None, Path::new(".")).is_err(), "{text}");
        }
        assert!(RunConfig::parse(&format!("[run]\ntask=aq\n{base}"), Some(Task::Trace), Path::new(".")).is_err());
    }

    #[test]
    fn bose_above_lowest_level_names_precondition() {
        let c = cfg("[run]\ntask=trace\nstatistics=bose\nmu=1.5\n[spectrum]\nkind=circle\nmass_sq=1\n[grid]\nvalues=1\n");
        let e = run_with_threads(&c, Some(1)).unwrap_err();
        assert!(matches!(e, Error::Precondition(_)));
        assert!(e.to_string().contains("omega_1"), "{e}");
    }

    #[test]
    fn inline_comments_are_ignored() {
        let c = cfg("[run]\ntask = trace ; the task\nstatistics = fermi # stats\n[spectrum]\nkind = circle\n[grid]\nvalues = 1, 2 ; two points\n");
        assert_eq!(c.statistics, TraceStat::Fermi);
        assert_eq!(c.grid.points(), vec![1.0, 2.0]);
    }

    #[test]
    fn log_grid_endpoints_exact() {
        let g = Grid::Range { start: 0.02, stop: 0.2, count: 9, log: true };
        let p = g.points();
        assert_eq!(p.len(), 9);
        assert_eq!(p[0], 0.02);
        assert_eq!(p[8], 0.2);
        assert!(p.windows(2).all(|w| w[1] > w[0]));
    }
}
