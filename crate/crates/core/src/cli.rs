//! The `symdistill` command line.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 data error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bench::{gen_heat, gen_pairwise, ForceKind, ForceLaw, DEFAULT_SOFTENING};
use crate::error::{Error, Result};
use crate::expr::{eval_batch, Op, OperatorSet};
use crate::harness::distill::FRONT_FILE;
use crate::harness::{
    apply_transforms, distill, get_importance, load_table, parse_transforms, read_bank,
    read_front, save_table, save_weights, FitResult, IOTable, LoadOptions,
};
use crate::matrix::Matrix;
use crate::pca::{load_pca, pca_fit, save_pca};
use crate::search::{scores, select_best, SRConfig};
use crate::slime::{build_locale, slime_fit, SlimeParams};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const MANIFEST_FILE: &str = "run_manifest.json";
pub const SCORE_CURVE_FILE: &str = "score_curve.csv";

#[derive(Parser, Debug)]
#[command(name = "symdistill", version, about = "Symbolic distillation of recorded input/output behaviour")]
pub struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true, env = "SYMDISTILL_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit one symbolic model per output dimension.
    Distill(DistillArgs),
    /// Fit a local symbolic surrogate around a point.
    Slime(SlimeArgs),
    /// Principal component analysis of a table's inputs or outputs.
    #[command(subcommand)]
    Pca(PcaCommand),
    /// Rank output dimensions by variance.
    Importance(ImportanceArgs),
    /// Generate a benchmark table.
    Gen(GenArgs),
    /// Evaluate an expression bank on a table.
    Eval(EvalArgs),
    /// Print fronts with scores and write score curves.
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SearchArgs {
    /// JSON file with SRConfig fields; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Operators, e.g. `+,*,inv,sin,exp`.
    #[arg(long, value_delimiter = ',')]
    pub ops: Option<Vec<String>>,
    /// Argument-complexity limit, e.g. `sin=3`.
    #[arg(long = "arg-limit")]
    pub arg_limits: Vec<String>,
    /// Operator complexity, e.g. `exp=3`.
    #[arg(long = "op-cost")]
    pub op_costs: Vec<String>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub parsimony: Option<f64>,
    #[arg(long = "max-size")]
    pub max_size: Option<u32>,
    #[arg(long)]
    pub populations: Option<usize>,
    #[arg(long = "population-size")]
    pub population_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DistillArgs {
    /// Table directory or CSV file.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Derived input column, `name=expr`.
    #[arg(long = "transform")]
    pub transforms: Vec<String>,
    /// Input column to drop after the transforms.
    #[arg(long = "drop")]
    pub drop: Vec<String>,
    #[arg(long, default_value = "block")]
    pub block: String,
    #[arg(long = "allow-nonfinite")]
    pub allow_nonfinite: bool,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SlimeArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Point of interest, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub at: Vec<f64>,
    #[arg(long)]
    pub neighbors: usize,
    #[arg(long, default_value_t = 0)]
    pub synthetic: usize,
    /// Weight of the neighbor rows.
    #[arg(long = "M", default_value_t = 1.0)]
    pub m: f64,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long = "kernel-sigma2")]
    pub kernel_sigma2: Option<f64>,
    /// Expression bank (one line per output) labelling synthetic points.
    #[arg(long)]
    pub surrogate: Option<PathBuf>,
    #[arg(long, default_value = "slime")]
    pub block: String,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Subcommand, Debug)]
pub enum PcaCommand {
    /// Fit a model on one side of a table.
    Fit(PcaFitArgs),
    /// Replace one side of a table by its principal coordinates.
    Apply(PcaApplyArgs),
    /// Map principal coordinates back to feature space.
    Reconstruct(PcaApplyArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Inputs,
    Outputs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PcaFitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub k: usize,
    /// Model directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Side::Inputs)]
    pub side: Side,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PcaApplyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Output table directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Side::Inputs)]
    pub side: Side,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ImportanceArgs {
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    Heat,
    Spring,
    #[value(name = "inv_r")]
    InvR,
    #[value(name = "inv_r2")]
    InvR2,
    Charge,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: Benchmark,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Diffusivity of the heat benchmark.
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    /// Distance softening of the force laws.
    #[arg(long, default_value_t = DEFAULT_SOFTENING)]
    pub softening: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EvalArgs {
    /// Expression bank: one expression per output dimension.
    #[arg(long)]
    pub expr: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Predictions CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ReportArgs {
    /// Run directory (searched recursively) or a single front CSV.
    #[arg(long)]
    pub run: PathBuf,
}

/// Everything needed to repeat an invocation.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a, P: Serialize> {
    pub subcommand: &'a str,
    pub tool_version: &'a str,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub output_dir: &'a Path,
    pub config: Option<&'a SRConfig>,
    pub arguments: &'a P,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_DATA
    }
}

fn execute(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        // a pool that is already initialized keeps its size; results do not depend on it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Distill(a) => cmd_distill(&a),
        Command::Slime(a) => cmd_slime(&a),
        Command::Pca(PcaCommand::Fit(a)) => cmd_pca_fit(&a),
        Command::Pca(PcaCommand::Apply(a)) => cmd_pca_map(&a, false),
        Command::Pca(PcaCommand::Reconstruct(a)) => cmd_pca_map(&a, true),
        Command::Importance(a) => cmd_importance(&a),
        Command::Gen(a) => cmd_gen(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Report(a) => cmd_report(&a),
    }
}

fn load(path: &Path, allow_nonfinite: bool) -> Result<IOTable> {
    load_table(path, LoadOptions { allow_nonfinite })
}

fn split_assignment(flag: &str, spec: &str) -> Result<(Op, u32)> {
    let (name, value) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("{flag} expects `op=value`, got `{spec}`")))?;
    let op: Op = name.trim().parse()?;
    let value = value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{flag}: `{value}` is not a nonnegative integer")))?;
    Ok((op, value))
}

/// Builds the effective search configuration from a config file and flags.
pub fn resolve_config(a: &SearchArgs) -> Result<SRConfig> {
    let mut config = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => SRConfig::default(),
    };
    if let Some(names) = &a.ops {
        config.ops = OperatorSet::from_names(names)?;
    }
    for spec in &a.op_costs {
        let (op, cost) = split_assignment("--op-cost", spec)?;
        config.ops.set_complexity(op, cost)?;
    }
    for spec in &a.arg_limits {
        let (op, limit) = split_assignment("--arg-limit", spec)?;
        config.ops.set_arg_limit(op, Some(limit))?;
    }
    if let Some(v) = a.iters {
        config.n_iterations = v;
    }
    if let Some(v) = a.parsimony {
        config.parsimony = v;
    }
    if let Some(v) = a.max_size {
        config.max_complexity = v;
    }
    if let Some(v) = a.populations {
        config.n_populations = v;
    }
    if let Some(v) = a.population_size {
        config.population_size = v;
    }
    if let Some(v) = a.seed {
        config.seed = v;
    }
    config.validate()?;
    Ok(config)
}

fn write_manifest<P: Serialize>(dir: &Path, manifest: &RunManifest<'_, P>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
}

fn write_fit_manifests<P: Serialize>(fit: &FitResult, out: &Path, manifest: &RunManifest<'_, P>) -> Result<()> {
    write_manifest(out, manifest)?;
    for dim in &fit.dims {
        if let Some(dir) = &dim.output_dir {
            write_manifest(dir, manifest)?;
        }
    }
    Ok(())
}

fn print_fit(fit: &FitResult) {
    println!("{:<4} {:<12} {:>10} {:>14} {:>10}  equation", "dim", "output", "complexity", "loss", "score");
    for (j, dim) in fit.dims.iter().enumerate() {
        let best = dim.best();
        let score = dim.front.scores()[dim.best_index];
        println!(
            "{:<4} {:<12} {:>10} {:>14.6e} {:>10.4}  {}",
            j,
            fit.output_names[j],
            best.complexity,
            best.loss,
            score,
            crate::expr::render_with_names(&best.expr, &fit.input_names)
        );
    }
}

fn cmd_distill(a: &DistillArgs) -> Result<()> {
    let config = resolve_config(&a.search)?;
    let table = load(&a.data, a.allow_nonfinite)?;
    let transforms = parse_transforms(&a.transforms, table.input_names())?;
    let table = apply_transforms(&table, &transforms, &a.drop, true)?;
    let fit = distill(&table, &config, Some(&a.out), &a.block)?;

    #[derive(Serialize)]
    struct Echo<'a> {
        #[serde(flatten)]
        args: &'a DistillArgs,
        input_columns: &'a [String],
    }
    let echo = Echo {
        args: a,
        input_columns: table.input_names(),
    };
    let manifest = RunManifest {
        subcommand: "distill",
        tool_version: env!("CARGO_PKG_VERSION"),
        seed: Some(config.seed),
        inputs: vec![a.data.clone()],
        output_dir: &a.out,
        config: Some(&config),
        arguments: &echo,
    };
    write_fit_manifests(&fit, &a.out, &manifest)?;
    print_fit(&fit);
    Ok(())
}

fn cmd_slime(a: &SlimeArgs) -> Result<()> {
    let config = resolve_config(&a.search)?;
    if a.neighbors == 0 {
        return Err(Error::Config("--neighbors must be at least 1".into()));
    }
    if a.synthetic > 0 && a.surrogate.is_none() {
        return Err(Error::Data(
            "--synthetic needs --surrogate to label the sampled points".into(),
        ));
    }
    let table = load(&a.data, false)?;
    if a.at.len() != table.n_inputs() {
        return Err(Error::Config(format!(
            "--at has {} values but the table has {} inputs",
            a.at.len(),
            table.n_inputs()
        )));
    }
    let bank = match &a.surrogate {
        Some(path) => {
            let bank = read_bank(path, table.input_names())?;
            if bank.len() != table.n_outputs() {
                return Err(Error::format(
                    path,
                    format!("{} expressions for {} outputs", bank.len(), table.n_outputs()),
                ));
            }
            bank
        }
        None => Vec::new(),
    };
    let surrogate = |z: &[f64]| -> Vec<f64> {
        bank.iter()
            .map(|e| crate::expr::eval_point(e, z).unwrap_or(f64::NAN))
            .collect()
    };
    let params = SlimeParams {
        x_star: a.at.clone(),
        neighbors: a.neighbors,
        n_synthetic: a.synthetic,
        sigma2: a.sigma2.map(|s| vec![s]),
        neighbor_weight: a.m,
        kernel_sigma2: a.kernel_sigma2.map(|s| vec![s]),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let callback: Option<&dyn Fn(&[f64]) -> Vec<f64>> = if bank.is_empty() {
        None
    } else {
        Some(&surrogate)
    };
    let locale = build_locale(&table, &params, callback, &mut rng)?;
    if !locale.table.is_finite() {
        return Err(Error::Data("surrogate produced non-finite values on the locale".into()));
    }
    let fit = slime_fit(&locale, &config, Some(&a.out), &a.block)?;
    let locale_dir = a.out.join("locale");
    save_table(&locale.table, &locale_dir)?;
    save_weights(&locale_dir, &locale.weights)?;

    let manifest = RunManifest {
        subcommand: "slime",
        tool_version: env!("CARGO_PKG_VERSION"),
        seed: Some(config.seed),
        inputs: std::iter::once(a.data.clone()).chain(a.surrogate.clone()).collect(),
        output_dir: &a.out,
        config: Some(&config),
        arguments: a,
    };
    write_fit_manifests(&fit, &a.out, &manifest)?;
    print_fit(&fit);
    Ok(())
}

fn side_of(table: &IOTable, side: Side) -> (&Matrix, &[String]) {
    match side {
        Side::Inputs => (table.inputs(), table.input_names()),
        Side::Outputs => (table.outputs(), table.output_names()),
    }
}

fn cmd_pca_fit(a: &PcaFitArgs) -> Result<()> {
    let table = load(&a.data, false)?;
    let (x, names) = side_of(&table, a.side);
    let mut model = pca_fit(x, a.k)?;
    model.feature_names = names.to_vec();
    save_pca(&model, &a.out)?;
    let manifest = RunManifest {
        subcommand: "pca fit",
        tool_version: env!("CARGO_PKG_VERSION"),
        seed: None,
        inputs: vec![a.data.clone()],
        output_dir: &a.out,
        config: None,
        arguments: a,
    };
    write_manifest(&a.out, &manifest)?;
    let ratios = model.explained_variance_ratio()?;
    println!("{:<10} {:>16} {:>10} {:>10}", "component", "variance", "ratio", "cumulative");
    let mut cumulative = 0.0;
    for (i, (v, r)) in model.explained_variance.iter().zip(&ratios).enumerate() {
        cumulative += r;
        println!("{i:<10} {v:>16.6e} {r:>10.6} {cumulative:>10.6}");
    }
    Ok(())
}

fn cmd_pca_map(a: &PcaApplyArgs, inverse: bool) -> Result<()> {
    let model = load_pca(&a.model)?;
    let table = load(&a.data, false)?;
    let (x, _) = side_of(&table, a.side);
    let (mapped, names) = if inverse {
        let names = if model.feature_names.is_empty() {
            (0..model.n_features()).map(|i| format!("f{i}")).collect()
        } else {
            model.feature_names.clone()
        };
        (model.reconstruct(x)?, names)
    } else {
        let names = (0..model.n_components()).map(|i| format!("pc{i}")).collect();
        (model.project(x)?, names)
    };
    let out = match a.side {
        Side::Inputs => IOTable::new(names, table.output_names().to_vec(), mapped, table.outputs().clone())?,
        Side::Outputs => IOTable::new(table.input_names().to_vec(), names, table.inputs().clone(), mapped)?,
    };
    save_table(&out, &a.out)?;
    let manifest = RunManifest {
        subcommand: if inverse { "pca reconstruct" } else { "pca apply" },
        tool_version: env!("CARGO_PKG_VERSION"),
        seed: None,
        inputs: vec![a.model.clone(), a.data.clone()],
        output_dir: &a.out,
        config: None,
        arguments: a,
    };
    write_manifest(&a.out, &manifest)?;
    println!("wrote {} rows x {} columns to {}", out.rows(), mapped_width(&out, a.side), a.out.display());
    Ok(())
}

fn mapped_width(table: &IOTable, side: Side) -> usize {
    match side {
        Side::Inputs => table.n_inputs(),
        Side::Outputs => table.n_outputs(),
    }
}

fn cmd_importance(a: &ImportanceArgs) -> Result<()> {
    let table = load(&a.data, false)?;
    let ranked = get_importance(&table)?;
    println!("{:<6} {:<6} {:<16} {:>16}", "rank", "dim", "output", "variance");
    for (rank, (dim, var)) in ranked.iter().enumerate() {
        println!("{:<6} {:<6} {:<16} {:>16.6e}", rank, dim, table.output_names()[*dim], var);
    }
    Ok(())
}

fn cmd_gen(a: &GenArgs) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let table = match a.kind {
        Benchmark::Heat => gen_heat(a.n, a.alpha, &mut rng)?,
        other => {
            let kind = match other {
                Benchmark::Spring => ForceKind::Spring,
                Benchmark::InvR => ForceKind::InvR,
                Benchmark::InvR2 => ForceKind::InvR2,
                _ => ForceKind::Charge,
            };
            let law = ForceLaw {
                kind,
                softening: a.softening,
            };
            gen_pairwise(law, a.n, &mut rng)?
        }
    };
    save_table(&table, &a.out)?;
    let manifest = RunManifest {
        subcommand: "gen",
        tool_version: env!("CARGO_PKG_VERSION"),
        seed: Some(a.seed),
        inputs: Vec::new(),
        output_dir: &a.out,
        config: None,
        arguments: a,
    };
    write_manifest(&a.out, &manifest)?;
    println!("wrote {} rows to {}", table.rows(), a.out.display());
    Ok(())
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let table = load(&a.data, false)?;
    let bank = read_bank(&a.expr, table.input_names())?;
    if bank.len() != table.n_outputs() {
        return Err(Error::format(
            &a.expr,
            format!("{} expressions for {} outputs", bank.len(), table.n_outputs()),
        ));
    }
    let preds: Vec<Vec<f64>> = bank
        .iter()
        .map(|e| eval_batch(e, table.inputs()))
        .collect::<Result<_>>()?;

    let mut w = csv::Writer::from_path(&a.out).map_err(|e| Error::format(&a.out, e.to_string()))?;
    let csv_err = |e: csv::Error| Error::format(&a.out, e.to_string());
    let mut header = Vec::new();
    for name in table.output_names() {
        header.push(format!("pred:{name}"));
        header.push(format!("resid:{name}"));
    }
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..table.rows() {
        let mut rec = Vec::with_capacity(2 * bank.len());
        for (j, p) in preds.iter().enumerate() {
            rec.push(p[i].to_string());
            rec.push((p[i] - table.outputs().get(i, j)).to_string());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(&a.out, e))?;

    println!("{:<12} {:>14} {:>14} {:>14} {:>8}", "output", "rmse", "mae", "max_abs", "nan");
    for (j, p) in preds.iter().enumerate() {
        let y = table.outputs().column(j);
        let resid: Vec<f64> = p.iter().zip(&y).map(|(a, b)| a - b).filter(|r| !r.is_nan()).collect();
        let nan = p.len() - resid.len();
        let n = resid.len().max(1) as f64;
        let rmse = (resid.iter().map(|r| r * r).sum::<f64>() / n).sqrt();
        let mae = resid.iter().map(|r| r.abs()).sum::<f64>() / n;
        let max = resid.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        println!("{:<12} {:>14.6e} {:>14.6e} {:>14.6e} {:>8}", table.output_names()[j], rmse, mae, max, nan);
    }
    Ok(())
}

fn find_fronts(root: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(root)
        .map_err(|e| Error::io(root, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(root, err)))
        .collect::<Result<_>>()?;
    entries.sort();
    for path in entries {
        if path.is_dir() {
            find_fronts(&path, out)?;
        } else if path.file_name().is_some_and(|n| n == FRONT_FILE) {
            out.push(path);
        }
    }
    Ok(())
}

fn cmd_report(a: &ReportArgs) -> Result<()> {
    let mut fronts = Vec::new();
    if a.run.is_dir() {
        find_fronts(&a.run, &mut fronts)?;
    } else {
        fronts.push(a.run.clone());
    }
    if fronts.is_empty() {
        return Err(Error::Data(format!("no {FRONT_FILE} under {}", a.run.display())));
    }
    for path in fronts {
        let rows = read_front(&path)?;
        if rows.is_empty() {
            return Err(Error::format(&path, "front is empty"));
        }
        let pairs: Vec<(u32, f64)> = rows.iter().map(|r| (r.complexity, r.loss)).collect();
        let score = scores(&pairs);
        let best = select_best(&pairs);

        println!("{}", path.display());
        println!("  {:>10} {:>14} {:>10}  equation", "complexity", "loss", "score");
        for (k, (row, s)) in rows.iter().zip(&score).enumerate() {
            let mark = if k == best { '*' } else { ' ' };
            println!("{mark} {:>10} {:>14.6e} {:>10.4}  {}", row.complexity, row.loss, s, row.equation);
        }

        let curve = path.with_file_name(SCORE_CURVE_FILE);
        let mut w = csv::Writer::from_path(&curve).map_err(|e| Error::format(&curve, e.to_string()))?;
        let csv_err = |e: csv::Error| Error::format(&curve, e.to_string());
        w.write_record(["complexity", "score", "best"]).map_err(csv_err)?;
        for (k, (row, s)) in rows.iter().zip(&score).enumerate() {
            w.write_record([row.complexity.to_string(), s.to_string(), u8::from(k == best).to_string()])
                .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(&curve, e))?;
    }
    Ok(())
}
