use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nonarch::algebra::{
    poincare_pairing, pushforward_at_lifts, LinearMap, ProductEngine,
};
use nonarch::grassmann::enumerate;
use nonarch::interval::Interval;
use nonarch::linalg::rat_to_string;
use nonarch::ring::ChainRing;
use nonarch::transforms::{fourier_matrix, radon_matrix, DepthPolicy, RadonDirection};
use nonarch::valuation::{LevelValuation, LevelValuationJson, ValuationMeta};
use nonarch::{EquiScalar, FieldModel, LocalScalar, Matrix, MixedScalar};
use nonarch_verify::cache::Cache;
use nonarch_verify::checks::{cosine_operator, policy_for};
use nonarch_verify::config::Config;
use nonarch_verify::{Bench, CheckId, FieldKind, Grid, Params, RunOptions, Verdict};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "nonarch", version, about = "Exact checks for finite-level valuation spaces")]
struct Cli {
    /// Key-value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run checks over a parameter grid and emit a report.
    Verify(VerifyArgs),
    /// Operator matrices.
    Op {
        #[command(subcommand)]
        command: OpCommand,
    },
    /// Products of valuations.
    Product {
        #[command(subcommand)]
        command: ProductCommand,
    },
    /// Push a valuation forward along a linear map.
    Pushforward(PushforwardArgs),
    /// The pairing matrix between degrees i and n - i.
    Pairing(PairingArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Selection {
    All,
    Plancherel,
    RadonIso,
    KernelEquality,
    HardLefschetz,
    Poincare,
    Positivity,
    ProductLaws,
    FourierBoxtimes,
    PushforwardPaths,
    SubgroupDims,
}

impl Selection {
    fn checks(self) -> Vec<CheckId> {
        let one = match self {
            Selection::All => return CheckId::ALL.to_vec(),
            Selection::Plancherel => CheckId::Plancherel,
            Selection::RadonIso => CheckId::RadonIso,
            Selection::KernelEquality => CheckId::KernelEquality,
            Selection::HardLefschetz => CheckId::HardLefschetz,
            Selection::Poincare => CheckId::Poincare,
            Selection::Positivity => CheckId::Positivity,
            Selection::ProductLaws => CheckId::ProductLaws,
            Selection::FourierBoxtimes => CheckId::FourierBoxtimes,
            Selection::PushforwardPaths => CheckId::PushforwardPaths,
            Selection::SubgroupDims => CheckId::SubgroupDims,
        };
        vec![one]
    }
}

#[derive(Args)]
struct VerifyArgs {
    check: Selection,
    #[arg(long, value_delimiter = ',')]
    q: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    r: Vec<u32>,
    #[arg(long, value_delimiter = ',', value_enum)]
    field: Vec<FieldKind>,
    /// Extra quadrature depth beyond the level.
    #[arg(long)]
    depth: Option<u32>,
    /// Quadrature tolerance exponent: stop at width `q^-T`.
    #[arg(long, value_name = "T")]
    tol: Option<u32>,
    /// Also compare cosine matrices against Monte Carlo.
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock time per check.
    #[arg(long)]
    timings: bool,
}

#[derive(Subcommand)]
enum OpCommand {
    /// Print an operator matrix as JSON.
    Matrix(MatrixArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Transform {
    Cosine,
    Radon,
    Fourier,
}

#[derive(Args)]
struct MatrixArgs {
    #[arg(long, value_enum)]
    transform: Transform,
    #[arg(long)]
    q: u64,
    #[arg(long)]
    n: usize,
    /// Degree: `i` for the cosine operator, `p` for Radon, the source degree for Fourier.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    r: u32,
    /// Larger degree of the Radon transform.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_enum, default_value = "superset")]
    direction: Direction,
    /// Fourier from the dual side.
    #[arg(long)]
    dual: bool,
    #[arg(long, value_enum, default_value = "equi")]
    field: FieldKind,
    /// Quadrature depth for the cosine recursion.
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Superset,
    Subset,
}

#[derive(Subcommand)]
enum ProductCommand {
    /// Evaluate `phi · psi` on every level class.
    Eval(ProductArgs),
}

#[derive(Args)]
struct ProductArgs {
    #[arg(long)]
    phi: PathBuf,
    #[arg(long)]
    psi: PathBuf,
    #[arg(long)]
    level: u32,
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long, value_name = "T")]
    tol: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PushforwardArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    val: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PairingArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    i: usize,
    #[arg(long)]
    q: u64,
    #[arg(long, default_value_t = 1)]
    r: u32,
    #[arg(long, value_enum, default_value = "equi")]
    field: FieldKind,
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long, value_name = "T")]
    tol: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A linear map file: `matrix[row][col]` in the scalar syntax of `model`.
#[derive(Deserialize)]
struct MapJson {
    model: FieldModel,
    matrix: Vec<Vec<String>>,
}

#[derive(Serialize)]
struct IntervalValuationJson {
    meta: ValuationMeta,
    values: Vec<[String; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<Vec<String>>,
    certified: bool,
    depth: u32,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct PairingJson {
    n: usize,
    i: usize,
    q: u64,
    r: u32,
    entries: Vec<Vec<[String; 2]>>,
    determinant: Option<String>,
    certified: bool,
    verdict: nonarch::algebra::PairingVerdict,
    obstruction: Option<String>,
}

fn interval_pair(x: &Interval) -> [String; 2] {
    [rat_to_string(&x.lo), rat_to_string(&x.hi)]
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn open_cache(config: &Config) -> Result<Option<Cache>> {
    match &config.cache_dir {
        Some(d) => Ok(Some(Cache::open(d)?)),
        None => Ok(Cache::from_env()?),
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn verify(config: Config, args: VerifyArgs) -> Result<ExitCode> {
    let mut config = config;
    if let Some(s) = args.seed {
        config.seed = s;
    }
    let cache = open_cache(&config)?;
    let options = RunOptions { extra_depth: args.depth, tolerance_exp: args.tol, oracle: args.oracle, timings: args.timings };
    let bench = Bench::new(config, options, cache);
    let grid = Grid { fields: args.field, q: args.q, n: args.n, r: args.r };
    let report = bench.run(&args.check.checks(), &grid);
    for o in &report.outcomes {
        eprintln!("{}", o.line());
    }
    let json = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(p) => emit(Some(p), &json)?,
        None => println!("{json}"),
    }
    Ok(if report.worst() == Some(Verdict::Fail) { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn op_matrix(config: Config, a: MatrixArgs) -> Result<()> {
    let p = Params { field: a.field, q: a.q, n: a.n, r: a.r };
    let ring = p.ring()?;
    let op = match a.transform {
        Transform::Cosine => {
            let options = RunOptions { extra_depth: a.depth, ..RunOptions::default() };
            let bench = Bench::new(config.clone(), options, open_cache(&config)?);
            cosine_operator(&bench, &p, a.k)?
        }
        Transform::Radon => {
            let d = a.d.context("--d is required for the Radon transform")?;
            let dir = match a.direction {
                Direction::Superset => RadonDirection::Superset,
                Direction::Subset => RadonDirection::Subset,
            };
            radon_matrix(&ring, a.n, a.k, d, dir)?
        }
        Transform::Fourier => fourier_matrix(&ring, a.n, a.k, a.dual)?,
    };
    emit(a.out.as_deref(), &serde_json::to_string_pretty(&op.to_json())?)
}

fn policy(config: &Config, q: u64, depth: Option<u32>, tol: Option<u32>) -> DepthPolicy {
    policy_for(q, depth.unwrap_or(config.extra_depth), tol.unwrap_or(config.tolerance_exp))
}

fn product_eval(config: Config, a: ProductArgs) -> Result<()> {
    let phi = LevelValuation::from_json(&read_json::<LevelValuationJson>(&a.phi)?)?;
    let psi = LevelValuation::from_json(&read_json::<LevelValuationJson>(&a.psi)?)?;
    if phi.meta.r != a.level || psi.meta.r != a.level {
        bail!("inputs are at levels {} and {}, expected {}", phi.meta.r, psi.meta.r, a.level);
    }
    if phi.meta.model != psi.meta.model || phi.meta.n != psi.meta.n {
        bail!("inputs live on different spaces");
    }
    let ring = ChainRing::new(phi.meta.model, a.level)?;
    let engine = ProductEngine::new(ring, phi.meta.n, policy(&config, ring.q(), a.depth, a.tol));
    let p = engine.product_exact(&phi, &psi)?;
    let json = IntervalValuationJson {
        meta: p.value.meta,
        values: p.value.values.iter().map(interval_pair).collect(),
        exact: p.value.to_exact().map(|v| v.coeffs.iter().map(rat_to_string).collect()),
        certified: p.certified,
        depth: p.depth,
        warnings: p.warnings,
    };
    emit(a.out.as_deref(), &serde_json::to_string_pretty(&json)?)
}

fn pushforward_with<S: LocalScalar>(map: &MapJson, xi: &LevelValuation) -> Result<LevelValuation> {
    let model = map.model;
    let rows = map.matrix.len();
    let cols = map.matrix.first().map_or(0, Vec::len);
    if map.matrix.iter().any(|r| r.len() != cols) {
        bail!("ragged matrix");
    }
    let entries = map
        .matrix
        .iter()
        .map(|r| r.iter().map(|s| S::parse(model, s)).collect::<nonarch::Result<Vec<S>>>())
        .collect::<nonarch::Result<Vec<_>>>()?;
    let f = LinearMap::new(model, Matrix::from_fn(rows, cols, |i, j| entries[i][j].clone()));
    let ring = ChainRing::new(model, xi.meta.r)?;
    let index = enumerate(&ring, xi.meta.n, xi.meta.k, None)?;
    Ok(pushforward_at_lifts(&ring, &f, xi, &index)?)
}

fn pushforward(a: PushforwardArgs) -> Result<()> {
    let map: MapJson = read_json(&a.map)?;
    let xi = LevelValuation::from_json(&read_json::<LevelValuationJson>(&a.val)?)?;
    if xi.meta.model != map.model {
        bail!("map and valuation use different fields");
    }
    let out = match map.model {
        FieldModel::EquiChar { .. } => pushforward_with::<EquiScalar>(&map, &xi)?,
        FieldModel::MixedChar { .. } => pushforward_with::<MixedScalar>(&map, &xi)?,
    };
    emit(a.out.as_deref(), &serde_json::to_string_pretty(&out.to_json())?)
}

fn pairing(config: Config, a: PairingArgs) -> Result<()> {
    if a.i > a.n {
        bail!("i = {} exceeds n = {}", a.i, a.n);
    }
    let p = Params { field: a.field, q: a.q, n: a.n, r: a.r };
    let engine = ProductEngine::new(p.ring()?, a.n, policy(&config, a.q, a.depth, a.tol));
    let m = poincare_pairing(&engine, a.i)?;
    let json = PairingJson {
        n: a.n,
        i: a.i,
        q: a.q,
        r: a.r,
        entries: m.entries.iter().map(|row| row.iter().map(interval_pair).collect()).collect(),
        determinant: m.determinant.as_ref().map(rat_to_string),
        certified: m.certified,
        verdict: m.verdict,
        obstruction: m.obstruction,
    };
    emit(a.out.as_deref(), &serde_json::to_string_pretty(&json)?)
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Verify(a) => return verify(config, a),
        Command::Op { command: OpCommand::Matrix(a) } => op_matrix(config, a)?,
        Command::Product { command: ProductCommand::Eval(a) } => product_eval(config, a)?,
        Command::Pushforward(a) => pushforward(a)?,
        Command::Pairing(a) => pairing(config, a)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
