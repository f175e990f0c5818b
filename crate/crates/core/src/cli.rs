//! Command-line front end. Every flag has an `MOCV_*` environment variable
//! fallback; flags beat the `[run]` section of the scenario file, which
//! beats built-in defaults.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nalgebra::DVector;
use serde::Serialize;

use crate::bellman::{check_bellman, random_piecewise_arcs, BellmanConfig, BellmanReport};
use crate::config::{product_grid, GridSpec, ScenarioFile};
use crate::error::{Error, Hypothesis, Result};
use crate::hjb::{check_hjb, HjbConfig};
use crate::hopflax::ValueSurface;
use crate::oracle::{self, DirectMethodConfig};
use crate::problem::{HypothesisReport, Scenario};
use crate::report::{fmt, write_csv, write_json};

#[derive(Debug, Parser)]
#[command(name = "mocv", version, about = "Set-valued value functions with non-constant discount")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: RunOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Value thresholds on a (t, x) grid.
    ValueSurface,
    /// Direction-wise HJB residuals and finite-difference checks.
    HjbCheck,
    /// Bellman inclusion along random arcs and the infimizer identity.
    BellmanCheck,
    /// Direct method against the Hopf-Lax values.
    OracleCompare,
    /// Probe hypotheses h1 to h5.
    HypothesesCheck,
}

#[derive(Debug, Clone, Parser)]
pub struct RunOptions {
    /// Scenario file (TOML).
    #[arg(long, global = true, env = "MOCV_SCENARIO", default_value = "scenarios/standard.cfg")]
    pub scenario: PathBuf,
    /// Output directory.
    #[arg(long, global = true, env = "MOCV_OUT", default_value = "out")]
    pub out: PathBuf,
    /// Tolerance of the check being run.
    #[arg(long, global = true, env = "MOCV_TOL")]
    pub tol: Option<f64>,
    /// Time grid LO:HI:N, inside [0, T).
    #[arg(long, global = true, env = "MOCV_GRID_T", allow_hyphen_values = true)]
    pub grid_t: Option<GridSpec>,
    /// State grid LO:HI:N, once per state dimension.
    #[arg(long, global = true, env = "MOCV_GRID_X", value_delimiter = ',', allow_hyphen_values = true)]
    pub grid_x: Vec<GridSpec>,
    /// Seed for random arcs.
    #[arg(long, global = true, env = "MOCV_SEED")]
    pub seed: Option<u64>,
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true, env = "MOCV_JOBS")]
    pub jobs: Option<usize>,
    /// Base grid size K of the dual cone.
    #[arg(long = "k-grid", global = true, env = "MOCV_K_GRID")]
    pub k_grid: Option<usize>,
}

/// Result of a command: whether its check passed and a one-line summary.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

const DEFAULT_SEED: u64 = 1;
const DEFAULT_ARCS: usize = 100;

struct Context {
    file: ScenarioFile,
    opts: RunOptions,
}

impl Context {
    fn jobs(&self) -> usize {
        self.opts.jobs.or(self.file.run.jobs).unwrap_or(0)
    }

    fn seed(&self) -> u64 {
        self.opts.seed.or(self.file.run.seed).unwrap_or(DEFAULT_SEED)
    }

    fn tol(&self) -> Option<f64> {
        self.opts.tol.or(self.file.run.tol)
    }

    fn scenario(&self) -> Result<Scenario> {
        self.file.build(self.opts.k_grid, None)
    }

    fn grid_t(&self, scn: &Scenario) -> Result<Vec<f64>> {
        let spec = match self.opts.grid_t {
            Some(g) => g,
            None => match &self.file.run.grid_t {
                Some(s) => s.parse()?,
                None => GridSpec { lo: 0.0, hi: 0.0, n: 1 },
            },
        };
        let ts = spec.points();
        let horizon = scn.horizon();
        if let Some(t) = ts.iter().find(|&&t| !(t >= 0.0 && t < horizon)) {
            return Err(Error::Usage(format!("grid time {t} outside [0, {horizon})")));
        }
        Ok(ts)
    }

    fn grid_x(&self, scn: &Scenario) -> Result<Vec<DVector<f64>>> {
        let n = scn.state_dim();
        let specs: Vec<GridSpec> = if !self.opts.grid_x.is_empty() {
            self.opts.grid_x.clone()
        } else if let Some(list) = &self.file.run.grid_x {
            list.iter().map(|s| s.parse()).collect::<Result<_>>()?
        } else {
            vec![GridSpec { lo: 0.0, hi: 0.0, n: 1 }; n]
        };
        if specs.len() != n {
            return Err(Error::Usage(format!("{} state grids given for a state of dimension {n}", specs.len())));
        }
        Ok(product_grid(&specs))
    }

    fn create(&self, name: &str) -> Result<(BufWriter<File>, PathBuf)> {
        std::fs::create_dir_all(&self.opts.out)?;
        let path = self.opts.out.join(name);
        Ok((BufWriter::new(File::create(&path)?), path))
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let file = ScenarioFile::load(&cli.opts.scenario)?;
    let ctx = Context {
        file,
        opts: cli.opts.clone(),
    };
    match cli.command {
        Command::ValueSurface => value_surface(&ctx),
        Command::HjbCheck => hjb_check(&ctx),
        Command::BellmanCheck => bellman_check(&ctx),
        Command::OracleCompare => oracle_compare(&ctx),
        Command::HypothesesCheck => hypotheses_check(&ctx),
    }
}

fn value_surface(ctx: &Context) -> Result<Outcome> {
    let scn = ctx.scenario()?;
    let (ts, xs) = (ctx.grid_t(&scn)?, ctx.grid_x(&scn)?);
    let surface = ValueSurface::compute(&scn, &ts, &xs, ctx.jobs())?;
    let (csv, csv_path) = ctx.create("value_surface.csv")?;
    surface.write_csv(csv)?;
    let (json, json_path) = ctx.create("value_surface.json")?;
    surface.write_json(json)?;
    Ok(Outcome {
        passed: true,
        summary: format!("{} points, {} rows", surface.points.len(), surface.rows()),
        files: vec![csv_path, json_path],
    })
}

fn hjb_check(ctx: &Context) -> Result<Outcome> {
    let scn = ctx.scenario()?;
    let (ts, xs) = (ctx.grid_t(&scn)?, ctx.grid_x(&scn)?);
    let mut cfg = HjbConfig::for_scenario(&scn);
    if let Some(tol) = ctx.tol() {
        cfg.tol = tol;
    }
    cfg.jobs = ctx.jobs();
    let report = check_hjb(&scn, &ts, &xs, &cfg)?;
    let (json, json_path) = ctx.create("hjb_report.json")?;
    write_json(&report, json)?;
    let (csv, csv_path) = ctx.create("hjb_residuals.csv")?;
    report.write_csv(csv)?;
    Ok(Outcome {
        passed: report.passed,
        summary: format!(
            "max |residual| {:.3e} (tol {:.1e}), sup set {:.3e}, finite differences {:.3e} (tol {:.1e}){}",
            report.max_residual,
            report.tol,
            report.sup_residual,
            report.max_fd_error,
            report.fd_tol,
            report
                .worst
                .as_ref()
                .map(|(t, x, k)| format!(", worst at t = {t}, x = {x:?}, k = {k}"))
                .unwrap_or_default()
        ),
        files: vec![json_path, csv_path],
    })
}

#[derive(Serialize)]
struct BellmanRun {
    seed: u64,
    arcs: usize,
    points: Vec<BellmanReport>,
    min_slack: f64,
    max_infimizer_gap: f64,
    passed: bool,
}

fn bellman_check(ctx: &Context) -> Result<Outcome> {
    let scn = ctx.scenario()?;
    let (ts, xs) = (ctx.grid_t(&scn)?, ctx.grid_x(&scn)?);
    let seed = ctx.seed();
    let count = ctx.file.run.arcs.unwrap_or(DEFAULT_ARCS);
    let base = BellmanConfig {
        tol: ctx.tol().unwrap_or(1e-6),
        jobs: ctx.jobs(),
        ..BellmanConfig::default()
    };
    let taus = ctx.file.run.taus.clone().unwrap_or(base.taus.clone());
    let mut points = Vec::new();
    let mut i = 0u64;
    for &t in &ts {
        for x in &xs {
            let arcs = random_piecewise_arcs(&scn, t, x, count, 8, 3.0, seed.wrapping_add(i))?;
            i += 1;
            let cfg = BellmanConfig {
                taus: taus.iter().copied().filter(|&tau| tau >= t).collect(),
                ..base.clone()
            };
            points.push(check_bellman(&scn, t, x, &arcs, &cfg)?);
        }
    }
    let min_slack = points.iter().map(|p| p.min_slack).fold(f64::INFINITY, f64::min);
    let max_gap = points.iter().map(|p| p.max_infimizer_gap).fold(0.0, f64::max);
    let passed = points.iter().all(|p| p.passed);

    let n = scn.state_dim();
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|i| format!("x{i}")));
    for c in ["arc", "tau", "k", "lhs", "rhs", "slack"] {
        header.push(c.into());
    }
    let mut rows = Vec::new();
    for p in &points {
        for r in &p.slacks {
            let mut row = vec![fmt(p.t)];
            row.extend(p.x.iter().map(|v| fmt(*v)));
            row.extend([r.arc.to_string(), fmt(r.tau), r.k.to_string(), fmt(r.lhs), fmt(r.rhs), fmt(r.slack)]);
            rows.push(row);
        }
    }
    let (csv, csv_path) = ctx.create("bellman_slack.csv")?;
    write_csv(csv, &header, &rows)?;
    let run = BellmanRun {
        seed,
        arcs: count,
        points,
        min_slack,
        max_infimizer_gap: max_gap,
        passed,
    };
    let (json, json_path) = ctx.create("bellman_report.json")?;
    write_json(&run, json)?;
    Ok(Outcome {
        passed,
        summary: format!(
            "min slack {min_slack:.3e} (tol {:.1e}), infimizer gap {max_gap:.3e} (tol {:.1e})",
            base.tol, base.tol_infimizer
        ),
        files: vec![json_path, csv_path],
    })
}

fn oracle_compare(ctx: &Context) -> Result<Outcome> {
    let scn = ctx.scenario()?;
    let (ts, xs) = (ctx.grid_t(&scn)?, ctx.grid_x(&scn)?);
    let points: Vec<(f64, DVector<f64>)> = ts.iter().flat_map(|&t| xs.iter().map(move |x| (t, x.clone()))).collect();
    let cfg = DirectMethodConfig {
        nodes: ctx.file.run.oracle_nodes.unwrap_or(DirectMethodConfig::default().nodes),
        ..Default::default()
    };
    let tol = ctx.tol().unwrap_or(1e-3);
    let report = oracle::compare(&scn, &points, &cfg, tol, ctx.jobs())?;
    let (csv, csv_path) = ctx.create("oracle_compare.csv")?;
    report.write_csv(csv)?;
    Ok(Outcome {
        passed: report.passed,
        summary: format!(
            "max relative gap {:.3e} (tol {tol:.1e}), min excess {:.3e}",
            report.max_relative_gap, report.min_excess
        ),
        files: vec![csv_path],
    })
}

fn hypotheses_check(ctx: &Context) -> Result<Outcome> {
    let scn = ctx.file.build_unchecked(ctx.opts.k_grid, None)?;
    let report: &HypothesisReport = scn.hypotheses();
    let (json, json_path) = ctx.create("hypotheses.json")?;
    write_json(report, json)?;
    let lines: Vec<String> = Hypothesis::ALL
        .iter()
        .filter_map(|h| report.get(*h))
        .map(|c| format!("{} {} {}", c.hypothesis, if c.passed { "pass" } else { "FAIL" }, c.detail))
        .collect();
    Ok(Outcome {
        passed: report.all_passed(),
        summary: lines.join("\n"),
        files: vec![json_path],
    })
}

/// Exit status convention: 0 pass, 1 check violated, 2 error.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(o) if o.passed => 0,
        Ok(_) => 1,
        Err(_) => 2,
    }
}

/// Runs `args` and prints the outcome; returns the exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = run(&cli);
    match &result {
        Ok(o) => {
            println!("{}", o.summary);
            for f in &o.files {
                println!("wrote {}", display(f));
            }
            if !o.passed {
                eprintln!("check failed");
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    exit_code(&result)
}

fn display(p: &Path) -> String {
    p.display().to_string()
}
