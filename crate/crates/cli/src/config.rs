//! Run flags, the flat `key = value` config file, and their resolution into
//! solver inputs. Flags override file entries.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use covswe::scenarios::{self, Noise, Scenario, DEFAULT_NOISE};
use covswe::solver::{Limiter, Scheme, SchemeConfig};
use covswe::MetricSpec;

use crate::{usage, UsageError};

#[derive(Args, Debug, Default, Clone)]
pub struct RunArgs {
    /// Flat `key = value` file; keys are the long flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub scenario: Option<String>,
    /// cartesian, spherical or elliptical.
    #[arg(long)]
    pub metric: Option<String>,
    /// Cells in 1D, cells per axis of a quad grid in 2D.
    #[arg(long, conflicts_with = "mesh_file")]
    pub n: Option<usize>,
    /// Polygonal mesh for 2D scenarios (see `covswe mesh`).
    #[arg(long)]
    pub mesh_file: Option<PathBuf>,
    /// standard, wb or wb-general.
    #[arg(long)]
    pub scheme: Option<String>,
    /// barth, minmod or none.
    #[arg(long)]
    pub limiter: Option<String>,
    /// Courant number; defaults to 0.9/d.
    #[arg(long)]
    pub cfl: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Bathymetry noise seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Bathymetry noise amplitude.
    #[arg(long)]
    pub noise_amp: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write a snapshot every K steps (0: initial and final only).
    #[arg(long)]
    pub output_every: Option<usize>,
    /// Use the analytic bathymetry gradient.
    #[arg(long)]
    pub exact_b_grad: bool,
}

const KEYS: [&str; 13] = [
    "scenario",
    "metric",
    "n",
    "mesh-file",
    "scheme",
    "limiter",
    "cfl",
    "t-end",
    "seed",
    "noise-amp",
    "out",
    "output-every",
    "exact-b-grad",
];

/// Parses `key = value` lines; `#` starts a comment, `_` and `-` are
/// interchangeable in keys.
pub fn parse_config(text: &str) -> anyhow::Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return usage(format!("config line {}: expected `key = value`", i + 1));
        };
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return usage(format!("config line {}: unknown key `{key}`", i + 1));
        }
        map.insert(key, value.trim().trim_matches('"').to_string());
    }
    Ok(map)
}

fn field<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> anyhow::Result<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => match v.parse() {
            Ok(x) => Ok(Some(x)),
            Err(_) => usage(format!("config key `{key}`: cannot parse `{v}`")),
        },
    }
}

impl RunArgs {
    /// Fills unset flags from the config file, if any.
    pub fn merge_config(mut self) -> anyhow::Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        let map = parse_config(&text)?;
        self.scenario = self.scenario.or(field(&map, "scenario")?);
        self.metric = self.metric.or(field(&map, "metric")?);
        if self.n.is_none() && self.mesh_file.is_none() {
            self.n = field(&map, "n")?;
            self.mesh_file = field(&map, "mesh-file")?;
        }
        self.scheme = self.scheme.or(field(&map, "scheme")?);
        self.limiter = self.limiter.or(field(&map, "limiter")?);
        self.cfl = self.cfl.or(field(&map, "cfl")?);
        self.t_end = self.t_end.or(field(&map, "t-end")?);
        self.seed = self.seed.or(field(&map, "seed")?);
        self.noise_amp = self.noise_amp.or(field(&map, "noise-amp")?);
        self.out = self.out.or(field(&map, "out")?);
        self.output_every = self.output_every.or(field(&map, "output-every")?);
        self.exact_b_grad |= field::<bool>(&map, "exact-b-grad")?.unwrap_or(false);
        Ok(self)
    }
}

/// Where the cells come from.
#[derive(Clone, Debug)]
pub enum MeshSource {
    Cells(usize),
    File(PathBuf),
}

/// Fully resolved inputs of one simulation.
#[derive(Clone, Debug)]
pub struct RunSettings {
    pub scenario: Scenario,
    pub mesh: MeshSource,
    pub config: SchemeConfig,
    pub out: PathBuf,
    pub output_every: usize,
}

/// Looks a scenario up, turning an unknown name into a usage error that
/// lists the catalog.
pub fn lookup_scenario(name: &str) -> anyhow::Result<Scenario> {
    scenarios::scenario(name).map_err(|_| {
        UsageError(format!(
            "unknown scenario `{name}`; available: {}",
            scenarios::names().join(", ")
        ))
        .into()
    })
}

fn bad<E: std::fmt::Display>(e: E) -> anyhow::Error {
    UsageError(e.to_string()).into()
}

impl RunSettings {
    pub fn resolve(args: RunArgs) -> anyhow::Result<Self> {
        let args = args.merge_config()?;
        let Some(name) = args.scenario.as_deref() else {
            return usage(format!(
                "--scenario is required; available: {}",
                scenarios::names().join(", ")
            ));
        };
        let mut scenario = lookup_scenario(name)?;
        if let Some(m) = &args.metric {
            let spec = MetricSpec::by_name(m).map_err(bad)?;
            scenario = scenario.with_metric(spec).map_err(bad)?;
        }
        if args.noise_amp.is_some() || (args.seed.is_some() && scenario.noise.is_some()) {
            let base = scenario.noise.unwrap_or(DEFAULT_NOISE);
            let noise = Noise {
                amplitude: args.noise_amp.unwrap_or(base.amplitude),
                seed: args.seed.unwrap_or(base.seed),
            };
            if !(noise.amplitude >= 0.0 && noise.amplitude.is_finite()) {
                return usage(format!("noise amplitude {} must be non-negative", noise.amplitude));
            }
            scenario = scenario.with_noise((noise.amplitude > 0.0).then_some(noise));
        }
        let dim = scenario.dimension();
        let mesh = match (&args.mesh_file, args.n) {
            (Some(_), _) if dim == 1 => return usage("--mesh-file applies to 2D scenarios only"),
            (Some(path), _) => MeshSource::File(path.clone()),
            (None, Some(0)) => return usage("--n must be positive"),
            (None, Some(n)) => MeshSource::Cells(n),
            (None, None) => MeshSource::Cells(scenario.default_cells),
        };
        let scheme = Scheme::from_name(args.scheme.as_deref().unwrap_or("wb")).map_err(bad)?;
        let mut config = SchemeConfig::new(scheme, args.t_end.unwrap_or(scenario.default_t_end), dim);
        if let Some(l) = &args.limiter {
            config = config.with_limiter(Limiter::from_name(l).map_err(bad)?);
        }
        if let Some(c) = args.cfl {
            config = config.with_cfl(c);
        }
        if args.exact_b_grad {
            if scenario.bathymetry_gradient.is_none() {
                return usage(format!("scenario `{name}` has no analytic bathymetry gradient"));
            }
            config.exact_bathymetry_gradient = true;
        }
        if scheme == Scheme::WbGeneral {
            let eq = scenario
                .equilibrium()
                .with_context(|| format!("building the equilibrium of `{name}`"))?;
            config = config.with_equilibrium(eq);
        }
        config.validate(dim).map_err(bad)?;
        Ok(RunSettings {
            scenario,
            mesh,
            config,
            out: args.out.unwrap_or_else(|| PathBuf::from("out")),
            output_every: args.output_every.unwrap_or(0),
        })
    }
}
