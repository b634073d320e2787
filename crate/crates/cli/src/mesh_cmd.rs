//! `mesh`: generate a quad grid or Lloyd-relaxed Voronoi mesh and save it
//! in the plain-text polygon format.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use covswe::mesh::{build_quad_grid, build_voronoi, save_mesh, Bounds};

use crate::config::lookup_scenario;
use crate::usage;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MeshKind {
    Quad,
    Voronoi,
}

#[derive(Args, Debug)]
pub struct MeshArgs {
    #[arg(long, value_enum, default_value = "voronoi")]
    pub kind: MeshKind,
    /// Cells per axis (quad) or number of seeds (voronoi).
    #[arg(long)]
    pub n: usize,
    /// Take the bounds from this 2D scenario.
    #[arg(long, conflicts_with = "bounds")]
    pub scenario: Option<String>,
    /// `x1_lo,x1_hi,x2_lo,x2_hi`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_bounds)]
    pub bounds: Option<[f64; 4]>,
    /// Lloyd relaxation sweeps.
    #[arg(long, default_value_t = 20)]
    pub lloyd: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output mesh file.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_bounds(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| format!("`{t}` is not a number")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected 4 comma-separated values, got {}", v.len()))
}

pub fn mesh(args: MeshArgs) -> anyhow::Result<()> {
    let bounds = match (&args.scenario, &args.bounds) {
        (Some(name), _) => match lookup_scenario(name)?.bounds() {
            Ok(b) => b,
            Err(_) => return usage(format!("scenario `{name}` is not 2D")),
        },
        (None, Some(b)) => match Bounds::new([b[0], b[2]], [b[1], b[3]]) {
            Ok(b) => b,
            Err(e) => return usage(e.to_string()),
        },
        (None, None) => return usage("give --scenario or --bounds"),
    };
    if args.n == 0 {
        return usage("--n must be positive");
    }
    let mesh = match args.kind {
        MeshKind::Quad => build_quad_grid(bounds, args.n, args.n)?,
        MeshKind::Voronoi => build_voronoi(bounds, args.n, args.lloyd, args.seed)?,
    };
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    save_mesh(&mesh, &args.out)?;
    println!(
        "wrote {} cells to {} (mean incircle diameter {:.4e})",
        mesh.n_cells(),
        args.out.display(),
        mesh.mean_incircle_diameter()
    );
    Ok(())
}
