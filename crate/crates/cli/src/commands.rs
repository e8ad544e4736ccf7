//! Subcommands.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use nodegen::bench::{scale_generate, scale_modify, BenchConfig};
use nodegen::boundary::{candidate_params, sample_boundary, DEFAULT_TAU};
use nodegen::embedded::{embed, remove_embedded, Alpha, EmbedOptions, MembershipMap};
use nodegen::generator::{generate, ghost_nodes, refine_boundary, NodeClass, NodeSet};
use nodegen::io::{read_map, read_nodes, read_seeds, write_map, write_nodes};
use nodegen::metrics::{convergence_study, nn_histogram};
use nodegen::poisson::{SamplerConfig, DEFAULT_K_HAT};
use nodegen::sphere::{Manifold, ParametricNodeSet};
use nodegen::{Error, GeometricModel, Kernel, PointSet, ShapeSpec};

use crate::embed_spec;

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Input(String),
    Lib(Error),
}

impl CliError {
    pub fn context(self, what: &str) -> Self {
        match self {
            CliError::Io(m) => CliError::Io(format!("{what}: {m}")),
            CliError::Input(m) => CliError::Input(format!("{what}: {m}")),
            CliError::Lib(e) => match e {
                Error::Format(m) => CliError::Lib(Error::Format(format!("{what}: {m}"))),
                other => CliError::Lib(other),
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) | CliError::Input(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "nodegen",
    version,
    about = "Meshfree node generation for domains with parametric boundaries"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a geometric model to seed nodes and write it as JSON.
    Fit(FitArgs),
    /// Sample a model's boundary at spacing h.
    SampleBoundary(SampleArgs),
    /// Generate boundary and interior nodes.
    Generate(GenerateArgs),
    /// Embed closed objects into a node set.
    Modify(ModifyArgs),
    /// Remove a previously embedded object.
    Remove(RemoveArgs),
    /// Nearest-neighbour distance histogram of a node set.
    Histogram(HistogramArgs),
    /// Model error against a closed-form shape over a ladder of seed counts.
    Converge(ConvergeArgs),
    /// Wall-clock scaling of generation (and optionally modification).
    Bench(BenchArgs),
}

/// Seeds from a CSV file or from a named shape.
#[derive(Debug, Args)]
struct SeedSource {
    /// Seed CSV: x,y[,z] with optional lambda[,theta] columns.
    #[arg(long, conflicts_with_all = ["shape", "nd", "param"])]
    seeds: Option<PathBuf>,
    /// Closed-form shape to sample the seeds from.
    #[arg(long)]
    shape: Option<String>,
    /// Number of seeds taken from --shape.
    #[arg(long, requires = "shape")]
    nd: Option<usize>,
    /// Shape parameter override, e.g. --param a=0.5 (repeatable).
    #[arg(long, value_name = "NAME=VALUE", requires = "shape")]
    param: Vec<String>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    source: SeedSource,
    /// Kernel order (odd in 2D, even in 3D); defaults to 7 / 6.
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    h: f64,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Model JSON written by `fit`.
    #[arg(long, conflicts_with_all = ["seeds", "shape"])]
    model: Option<PathBuf>,
    #[command(flatten)]
    source: SeedSource,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    h: f64,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
    #[arg(long, default_value_t = DEFAULT_K_HAT)]
    khat: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Add ghost nodes at distance h outside the boundary.
    #[arg(long)]
    ghost: bool,
    /// Inward offsets of refined boundary layers, each in (0, h).
    #[arg(long, value_delimiter = ',')]
    refine: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write an all-zero membership map for later `modify` calls.
    #[arg(long)]
    zmap_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ModifyArgs {
    #[arg(long)]
    nodes: PathBuf,
    /// Membership map; a fresh one is assumed when omitted.
    #[arg(long)]
    zmap: Option<PathBuf>,
    /// TOML file with one [[boundary]] entry per object.
    #[arg(long)]
    embed: PathBuf,
    /// Embedded to domain boundary node ratio, or `auto`.
    #[arg(long, default_value = "auto")]
    alpha: String,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
    /// Node spacing; defaults to the value recorded in the node file.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    zmap_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RemoveArgs {
    #[arg(long)]
    nodes: PathBuf,
    #[arg(long)]
    zmap: PathBuf,
    #[arg(long)]
    id: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    zmap_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ClassFilter {
    Boundary,
    Interior,
    All,
}

#[derive(Debug, Args)]
struct HistogramArgs {
    #[arg(long)]
    nodes: PathBuf,
    #[arg(long, value_enum, default_value_t = ClassFilter::All)]
    class: ClassFilter,
    /// Defaults to h/4.
    #[arg(long)]
    binwidth: Option<f64>,
    /// Defaults to 4h.
    #[arg(long)]
    maxdist: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConvergeArgs {
    #[arg(long)]
    shape: String,
    #[arg(long, value_name = "NAME=VALUE")]
    param: Vec<String>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long, value_delimiter = ',', required = true)]
    nd_ladder: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_parser = ["2", "3"])]
    dim: String,
    /// Domain shape; defaults to `star` in 2D and `bumpy-sphere` in 3D.
    #[arg(long)]
    shape: Option<String>,
    #[arg(long)]
    nd: Option<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    h_ladder: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_K_HAT)]
    khat: usize,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    /// Embedding runs per spacing when --embed is given.
    #[arg(long, default_value_t = 10)]
    modify_repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also time embedding these objects (TOML, as for `modify`).
    #[arg(long)]
    embed: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(a) => fit(a),
        Command::SampleBoundary(a) => sample(a),
        Command::Generate(a) => generate_cmd(a),
        Command::Modify(a) => modify(a),
        Command::Remove(a) => remove(a),
        Command::Histogram(a) => histogram(a),
        Command::Converge(a) => converge(a),
        Command::Bench(a) => bench(a),
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

/// Seeds and their parameters; without parameter columns the rows are
/// assigned the candidate parameters (equispaced or spiral) in order.
pub fn seeds_with_params(path: &Path) -> Result<(PointSet, ParametricNodeSet)> {
    let (seeds, params) = read_seeds(&read_text(path)?)
        .map_err(|e| CliError::from(e).context(&path.display().to_string()))?;
    let params = match params {
        Some(p) => p,
        None => candidate_params(Manifold::for_dim(seeds.dim())?, seeds.len())?,
    };
    Ok((seeds, params))
}

fn shape_with(name: &str, overrides: &[String]) -> Result<ShapeSpec> {
    let mut shape = ShapeSpec::named(name)?;
    for kv in overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("expected NAME=VALUE, got `{kv}`")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("`{v}` is not a number")))?;
        shape.set(k.trim(), v)?;
    }
    Ok(shape)
}

impl SeedSource {
    fn load(&self) -> Result<(PointSet, ParametricNodeSet)> {
        match (&self.seeds, &self.shape) {
            (Some(path), None) => seeds_with_params(path),
            (None, Some(name)) => {
                let shape = shape_with(name, &self.param)?;
                let nd = self
                    .nd
                    .ok_or_else(|| CliError::Input("--shape needs --nd".into()))?;
                let params = candidate_params(shape.manifold(), nd)?;
                Ok((shape.sample(&params)?, params))
            }
            _ => Err(CliError::Input("give --seeds or --shape with --nd".into())),
        }
    }

    fn fit(&self, m: Option<u32>) -> Result<GeometricModel> {
        let (seeds, params) = self.load()?;
        let kernel = match m {
            Some(m) => Kernel::new(params.manifold(), m)?,
            None => Kernel::default_for(params.manifold()),
        };
        Ok(GeometricModel::fit(&seeds, &params, kernel)?)
    }
}

fn fit(a: FitArgs) -> Result<()> {
    let model = a.source.fit(a.m)?;
    emit(a.out.as_deref(), &model.to_json())
}

fn load_model(path: &Path) -> Result<GeometricModel> {
    GeometricModel::from_json(&read_text(path)?)
        .map_err(|e| CliError::from(e).context(&path.display().to_string()))
}

fn sample(a: SampleArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let b = sample_boundary(&model, a.h, a.tau)?;
    let mut nodes = NodeSet::new(model.dim(), a.h);
    nodes.extend_class(&b.points, Some(&b.normals), NodeClass::Boundary, 0);
    emit(a.out.as_deref(), &write_nodes(&nodes))
}

fn generate_cmd(a: GenerateArgs) -> Result<()> {
    let model = match &a.model {
        Some(p) => load_model(p)?,
        None => a.source.fit(a.m)?,
    };
    let cfg = SamplerConfig {
        h: a.h,
        k_hat: a.khat,
        seed: a.seed,
    };
    let mut nodes = generate(&model, a.tau, &cfg)?.nodes;
    let refined = refine_boundary(&nodes, &a.refine)?;
    if a.ghost {
        let ghosts = ghost_nodes(&nodes, a.h);
        nodes.extend_class(&ghosts, None, NodeClass::Ghost, 0);
    }
    nodes.extend_class(&refined, None, NodeClass::Refined, 0);
    emit(a.out.as_deref(), &write_nodes(&nodes))?;
    if let Some(p) = &a.zmap_out {
        emit(Some(p), &write_map(&MembershipMap::new(&nodes)))?;
    }
    Ok(())
}

fn load_nodes(path: &Path) -> Result<NodeSet> {
    read_nodes(&read_text(path)?)
        .map_err(|e| CliError::from(e).context(&path.display().to_string()))
}

fn load_map(path: &Path) -> Result<MembershipMap> {
    read_map(&read_text(path)?).map_err(|e| CliError::from(e).context(&path.display().to_string()))
}

fn parse_alpha(s: &str) -> Result<Alpha> {
    if s == "auto" {
        return Ok(Alpha::Auto);
    }
    s.parse::<f64>()
        .map(Alpha::Fixed)
        .map_err(|_| CliError::Input(format!("alpha must be a number or `auto`, got `{s}`")))
}

fn modify(a: ModifyArgs) -> Result<()> {
    let nodes = load_nodes(&a.nodes)?;
    let map = match &a.zmap {
        Some(p) => load_map(p)?,
        None => MembershipMap::new(&nodes),
    };
    let h = a.h.unwrap_or(nodes.h());
    let specs = embed_spec::load(&a.embed)?;
    let opts = EmbedOptions {
        h,
        alpha: parse_alpha(&a.alpha)?,
        tau: a.tau,
    };
    let e = embed(&nodes, &map, &specs, &opts)?;
    if e.collisions > 0 {
        eprintln!(
            "nodegen: warning: {} embedded boundary nodes lie within h/2 of the domain boundary",
            e.collisions
        );
    }
    emit(a.out.as_deref(), &write_nodes(&e.nodes))?;
    if let Some(p) = &a.zmap_out {
        emit(Some(p), &write_map(&e.map))?;
    }
    Ok(())
}

fn remove(a: RemoveArgs) -> Result<()> {
    let nodes = load_nodes(&a.nodes)?;
    let map = load_map(&a.zmap)?;
    let (nodes, map) = remove_embedded(&nodes, &map, a.id)?;
    emit(a.out.as_deref(), &write_nodes(&nodes))?;
    if let Some(p) = &a.zmap_out {
        emit(Some(p), &write_map(&map))?;
    }
    Ok(())
}

fn histogram(a: HistogramArgs) -> Result<()> {
    let nodes = load_nodes(&a.nodes)?;
    let points = match a.class {
        ClassFilter::Boundary => nodes.points_of(NodeClass::Boundary),
        ClassFilter::Interior => nodes.points_of(NodeClass::Interior),
        ClassFilter::All => nodes.points().clone(),
    };
    let h = nodes.h();
    let (w, max) = match (a.binwidth, a.maxdist) {
        (Some(w), Some(m)) => (w, m),
        _ if !(h > 0.0) => {
            return Err(CliError::Input(
                "node file has no spacing; pass --binwidth and --maxdist".into(),
            ))
        }
        (w, m) => (w.unwrap_or(h / 4.0), m.unwrap_or(4.0 * h)),
    };
    emit(a.out.as_deref(), &nn_histogram(&points, w, max)?.to_text())
}

fn converge(a: ConvergeArgs) -> Result<()> {
    let shape = shape_with(&a.shape, &a.param)?;
    let table = convergence_study(&shape, a.m, &a.nd_ladder)?;
    emit(a.out.as_deref(), &table.to_text())
}

fn bench(a: BenchArgs) -> Result<()> {
    let dim: usize = a.dim.parse().expect("validated by clap");
    let name = a
        .shape
        .clone()
        .unwrap_or_else(|| if dim == 2 { "star" } else { "bumpy-sphere" }.to_string());
    let shape = ShapeSpec::named(&name)?;
    if shape.dim() != dim {
        return Err(CliError::Input(format!(
            "shape `{name}` is not {dim}-dimensional"
        )));
    }
    let cfg = BenchConfig {
        n_d: a.nd.unwrap_or(if dim == 2 { 128 } else { 400 }),
        k_hat: a.khat,
        tau: a.tau,
        repeats: a.repeats,
        modify_repeats: a.modify_repeats,
        seed: a.seed,
    };
    let text = match &a.embed {
        None => scale_generate(&shape, &a.h_ladder, &cfg)?.to_csv(),
        Some(p) => {
            let objects = embed_spec::load(p)?;
            let t = scale_modify(&shape, &objects, &a.h_ladder, &cfg)?;
            format!("{}\n{}", t.generation.to_csv(), t.to_csv())
        }
    };
    emit(a.out.as_deref(), &text)
}
