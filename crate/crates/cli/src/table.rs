//! `table`: reference error tables. Rows run concurrently; each prints a
//! human-readable table and writes `table_<name>.csv` (no timings, so the
//! CSV is deterministic).

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use covswe::metrics_io::{self, ErrorReport};
use covswe::scenarios::{classical_swe_step_1d, scenario, ClassicalState, Scenario};
use covswe::solver::{Scheme, SchemeConfig, Solver1d, TimeStepper};
use covswe::MetricSpec;
use rayon::prelude::*;

use crate::run::{mesh_1d, mesh_2d, run_1d, run_2d, RunOutcome};
use crate::usage;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableName {
    /// 1D water at rest over a bump, three metrics.
    Wb1d,
    /// 2D water at rest over a bump, three metrics.
    Wb2d,
    /// 1D water at rest over noised bathymetries.
    Noise1d,
    /// 2D water at rest over an elliptical bathymetry.
    Ell2d,
    /// Convergence on a smooth steady flow.
    Conv,
    /// Cartesian metric against the classical system.
    CartesianEquiv,
}

impl TableName {
    fn file_stem(self) -> &'static str {
        match self {
            TableName::Wb1d => "wb1d",
            TableName::Wb2d => "wb2d",
            TableName::Noise1d => "noise1d",
            TableName::Ell2d => "ell2d",
            TableName::Conv => "conv",
            TableName::CartesianEquiv => "cartesian-equiv",
        }
    }
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[arg(value_enum)]
    pub name: TableName,
    /// Output directory for the CSV.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Override the final time of every row.
    #[arg(long)]
    pub t_end: Option<f64>,
}

/// One table row.
struct Case {
    label: String,
    scenario: Scenario,
    /// Cells in 1D, cells per axis in 2D.
    cells: usize,
    scheme: Scheme,
}

impl Case {
    fn new(name: &str, metric: Option<&str>, cells: usize) -> anyhow::Result<Self> {
        let mut s = scenario(name)?;
        if let Some(m) = metric {
            s = s.with_metric(MetricSpec::by_name(m)?)?;
        }
        Ok(Case {
            label: name.to_string(),
            scenario: s,
            cells,
            scheme: Scheme::WbRest,
        })
    }

    fn run(&self, t_end: Option<f64>) -> anyhow::Result<RunOutcome> {
        let s = &self.scenario;
        let dim = s.dimension();
        let config = SchemeConfig::new(self.scheme, t_end.unwrap_or(s.default_t_end), dim);
        if dim == 1 {
            run_1d(s, self.cells, config, None)
        } else {
            run_2d(s, mesh_2d(s, self.cells)?, config, None)
        }
    }
}

const METRICS: [&str; 3] = ["cartesian", "spherical", "elliptical"];

fn cases(name: TableName) -> anyhow::Result<Vec<Case>> {
    Ok(match name {
        TableName::Wb1d => METRICS
            .iter()
            .map(|m| Case::new("wr_bump_1d", Some(m), 20))
            .collect::<anyhow::Result<_>>()?,
        TableName::Wb2d => METRICS
            .iter()
            .map(|m| Case::new("wr_bump_2d", Some(m), 56))
            .collect::<anyhow::Result<_>>()?,
        TableName::Noise1d => vec![
            Case::new("noisy_linear_1d_cart", None, 200)?,
            Case::new("noisy_sine_1d_sph", None, 100)?,
        ],
        TableName::Ell2d => vec![Case::new("wr_ellbat_2d", None, 63)?],
        TableName::Conv => [50, 100, 200, 300, 400]
            .into_iter()
            .map(|n| Case::new("steady_conv_1d", None, n))
            .collect::<anyhow::Result<_>>()?,
        TableName::CartesianEquiv => Vec::new(),
    })
}

fn error_table(name: TableName, args: &TableArgs) -> anyhow::Result<String> {
    let rows = cases(name)?;
    let outcomes: Vec<RunOutcome> = rows
        .par_iter()
        .map(|c| c.run(args.t_end))
        .collect::<anyhow::Result<_>>()?;
    let reports: Vec<ErrorReport> = outcomes
        .iter()
        .map(|o| o.errors.expect("table scenarios have exact solutions"))
        .collect();
    if name == TableName::Conv {
        let axis = rows[0].scenario.axis();
        let orders = metrics_io::convergence_table(&reports, axis)?;
        println!("{:>11} {:>6} {:>12} {:>7} {:>12} {:>7}", "dx", "cells", "L2_h", "O_h", "L2_u", "O_u");
        for (i, r) in reports.iter().enumerate() {
            let (oh, ou) = match i {
                0 => ("-".to_string(), "-".to_string()),
                _ => (format!("{:.2}", orders[i - 1][0]), format!("{:.2}", orders[i - 1][1])),
            };
            println!(
                "{:>11.4e} {:>6} {:>12.4e} {oh:>7} {:>12.4e} {ou:>7}",
                r.mesh_size, r.cells, r.h, r.u[axis]
            );
        }
        return Ok(metrics_io::format_convergence_csv(&reports, axis)?);
    }
    println!(
        "{:<21} {:<10} {:>6} {:>11} {:>7} {:>11} {:>11} {:>11} {:>9}",
        "scenario", "metric", "cells", "mesh_size", "steps", "L2_h", "L2_u1", "L2_u2", "runtime"
    );
    let mut csv = String::from("scenario,metric,cells,mesh_size,t_end,steps,err_h,err_u1,err_u2\n");
    for ((c, o), r) in rows.iter().zip(&outcomes).zip(&reports) {
        let metric = c.scenario.metric.name();
        println!(
            "{:<21} {:<10} {:>6} {:>11.4e} {:>7} {:>11.4e} {:>11.4e} {:>11.4e} {:>8.2}s",
            c.label, metric, r.cells, r.mesh_size, o.state.step, r.h, r.u[0], r.u[1], o.seconds
        );
        let _ = writeln!(
            csv,
            "{},{metric},{},{:.16e},{},{},{:.16e},{:.16e},{:.16e}",
            c.label, r.cells, r.mesh_size, o.state.t, o.state.step, r.h, r.u[0], r.u[1]
        );
    }
    Ok(csv)
}

/// Steps the full solver and the classical two-variable scheme with
/// identical time steps and records the largest per-cell mismatch.
fn cartesian_equivalence(args: &TableArgs) -> anyhow::Result<String> {
    let s = scenario("riemann_flat_1d_cart")?;
    let t_end = args.t_end.unwrap_or(s.default_t_end);
    let n = s.default_cells;
    let mesh = mesh_1d(&s, n)?;
    let mut solver = Solver1d::new(mesh, s.clone(), SchemeConfig::new(Scheme::Standard, t_end, 1))?;
    let mut oracle: Vec<ClassicalState> = solver.state().averages.iter().map(|q| [q.h(), q.m1()]).collect();
    let flat = vec![0.0; n];
    let mut diff = [0.0_f64; 2];
    while solver.state().t < t_end {
        let dt = solver.timestep()?.min(t_end - solver.state().t);
        oracle = classical_swe_step_1d(&oracle, mesh.dx, dt, &flat)?;
        solver.step(dt)?;
        for (q, o) in solver.state().averages.iter().zip(&oracle) {
            diff[0] = diff[0].max((q.h() - o[0]).abs());
            diff[1] = diff[1].max((q.m1() - o[1]).abs());
        }
    }
    let steps = solver.state().step;
    println!("{:<21} {:>6} {:>7} {:>13} {:>13}", "scenario", "cells", "steps", "max|dh|", "max|dm|");
    println!("{:<21} {n:>6} {steps:>7} {:>13.4e} {:>13.4e}", s.name, diff[0], diff[1]);
    Ok(format!(
        "scenario,cells,t_end,steps,max_diff_h,max_diff_m\n{},{n},{t_end:.16e},{steps},{:.16e},{:.16e}\n",
        s.name, diff[0], diff[1]
    ))
}

pub fn table(args: TableArgs) -> anyhow::Result<()> {
    if let Some(t) = args.t_end {
        if !(t > 0.0 && t.is_finite()) {
            return usage(format!("--t-end {t} must be positive"));
        }
    }
    let t0 = Instant::now();
    let csv = match args.name {
        TableName::CartesianEquiv => cartesian_equivalence(&args)?,
        name => error_table(name, &args)?,
    };
    let path = args.out.join(format!("table_{}.csv", args.name.file_stem()));
    metrics_io::write_text(&path, &csv)?;
    println!("wrote {} ({:.1}s)", path.display(), t0.elapsed().as_secs_f64());
    Ok(())
}
