//! `run`: one simulation with CSV/VTK snapshots and an error report.

use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use covswe::mesh::{build_quad_grid, load_mesh, Mesh1D, PolyMesh};
use covswe::metrics_io::{self, ErrorReport};
use covswe::scenarios::{exact_errors_1d, exact_errors_2d, Scenario};
use covswe::solver::{SchemeConfig, SimulationState, Solver1d, Solver2d, TimeStepper};

use crate::config::{MeshSource, RunSettings};

/// Outcome of one simulation.
pub struct RunOutcome {
    pub state: SimulationState,
    pub errors: Option<ErrorReport>,
    pub mesh_size: f64,
    pub seconds: f64,
}

/// Output sink for snapshots; `None` runs silently.
pub struct Snapshots<'a> {
    pub dir: &'a Path,
    pub every: usize,
}

pub fn run_1d(
    scenario: &Scenario,
    n: usize,
    config: SchemeConfig,
    snapshots: Option<Snapshots>,
) -> anyhow::Result<RunOutcome> {
    let mesh = scenario.mesh_1d(n)?;
    let axis = scenario.axis();
    let t0 = Instant::now();
    let mut solver = Solver1d::new(mesh, scenario.clone(), config)?;
    match snapshots {
        Some(sink) => solver.run(sink.every, |st| {
            let path = sink.dir.join(format!("{}_{:07}.csv", scenario.name, st.step));
            metrics_io::write_csv_1d(&path, &mesh, &st.averages, axis)
        })?,
        None => solver.run(0, |_| Ok(()))?,
    }
    let seconds = t0.elapsed().as_secs_f64();
    let state = solver.into_state();
    let errors = match scenario.exact {
        Some(_) => Some(exact_errors_1d(&mesh, &state.averages, scenario, state.t)?),
        None => None,
    };
    Ok(RunOutcome {
        state,
        errors,
        mesh_size: mesh.dx,
        seconds,
    })
}

pub fn run_2d(
    scenario: &Scenario,
    mesh: PolyMesh,
    config: SchemeConfig,
    snapshots: Option<Snapshots>,
) -> anyhow::Result<RunOutcome> {
    let t0 = Instant::now();
    let mut solver = Solver2d::new(mesh.clone(), scenario.clone(), config)?;
    match snapshots {
        Some(sink) => solver.run(sink.every, |st| {
            let stem = sink.dir.join(format!("{}_{:07}", scenario.name, st.step));
            metrics_io::write_csv_2d(&stem.with_extension("csv"), &mesh, &st.averages)?;
            let title = format!("{} t={}", scenario.name, st.t);
            metrics_io::write_vtk_2d(&stem.with_extension("vtk"), &mesh, &st.averages, &scenario.metric, &title)
        })?,
        None => solver.run(0, |_| Ok(()))?,
    }
    let seconds = t0.elapsed().as_secs_f64();
    let state = solver.into_state();
    let errors = match scenario.exact {
        Some(_) => Some(exact_errors_2d(&mesh, &state.averages, scenario, state.t)?),
        None => None,
    };
    Ok(RunOutcome {
        state,
        errors,
        mesh_size: mesh.mean_incircle_diameter(),
        seconds,
    })
}

pub fn mesh_2d(scenario: &Scenario, per_axis: usize) -> anyhow::Result<PolyMesh> {
    Ok(build_quad_grid(scenario.bounds()?, per_axis, per_axis)?)
}

pub fn run(settings: RunSettings) -> anyhow::Result<()> {
    let RunSettings {
        scenario,
        mesh,
        config,
        out,
        output_every,
    } = settings;
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let scheme = config.scheme;
    let sink = Snapshots {
        dir: &out,
        every: output_every,
    };
    let outcome = if scenario.dimension() == 1 {
        let MeshSource::Cells(n) = mesh else {
            unreachable!("1D runs are resolved to a cell count")
        };
        run_1d(&scenario, n, config, Some(sink))?
    } else {
        let poly = match &mesh {
            MeshSource::Cells(n) => mesh_2d(&scenario, *n)?,
            MeshSource::File(path) => load_mesh(path).with_context(|| format!("loading mesh {}", path.display()))?,
        };
        run_2d(&scenario, poly, config, Some(sink))?
    };
    println!(
        "{} metric={} scheme={} cells={} mesh_size={:.4e} steps={} t={} runtime={:.2}s",
        scenario.name,
        scenario.metric.name(),
        scheme,
        outcome.state.averages.len(),
        outcome.mesh_size,
        outcome.state.step,
        outcome.state.t,
        outcome.seconds
    );
    if let Some(r) = outcome.errors {
        println!("L2_h = {:.4e}  L2_u1 = {:.4e}  L2_u2 = {:.4e}", r.h, r.u[0], r.u[1]);
        let body = format!(
            "time,cells,mesh_size,err_h,err_u1,err_u2\n{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.time, r.cells, r.mesh_size, r.h, r.u[0], r.u[1]
        );
        metrics_io::write_text(&out.join(format!("{}_errors.csv", scenario.name)), &body)?;
    }
    println!("output written to {}", out.display());
    Ok(())
}

/// 1D mesh of a scenario at `n` cells; used by the table drivers.
pub fn mesh_1d(scenario: &Scenario, n: usize) -> anyhow::Result<Mesh1D> {
    Ok(scenario.mesh_1d(n)?)
}
