//! `dtc`: structured tensor factorization and dynamic tensor clustering
//! from the command line.
//!
//! Exit codes: 0 success, 2 configuration/validation error, 1 runtime
//! error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use dtc_core::cluster::{clustering_error, dtc_mode, gap_statistic};
use dtc_core::ingest::{import_matrix_csv, read_tensor, sliding_corr, write_tensor, WindowSpec};
use dtc_core::replicate::{run_replications, Design, HarnessConfig};
use dtc_core::simgen::{ClusterRatios, CovarianceSpec};
use dtc_core::stf::{stf_decompose, ConstraintSpec, StfReport};
use dtc_core::tensor::{DenseTensor, FactorSet};
use dtc_core::tuning::{select_model, TuneGrid};

#[derive(Parser)]
#[command(name = "dtc", version, about = "Structured tensor factorization and dynamic tensor clustering")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Factorize a tensor file into a rank-R structured CP model.
    Decompose(DecomposeArgs),
    /// Cluster the sample mode of a stacked tensor.
    Cluster(ClusterArgs),
    /// Run seeded replications of the synthetic benchmark designs.
    Simulate(SimulateArgs),
    /// Grid-search (R, s, lambda) by the selection criterion, then pick K
    /// with the gap statistic.
    Tune(TuneArgs),
    /// Build a sliding-window correlation tensor from time series, with
    /// optional symmetric decomposition and time clustering.
    Connect(ConnectArgs),
}

#[derive(Args, Clone)]
struct CommonOut {
    /// Directory for result files (created if missing).
    #[arg(long, default_value = "dtc-out")]
    output_dir: PathBuf,
    /// Output format for tabular results.
    #[arg(long, value_parser = ["csv", "json"], default_value = "csv")]
    emit: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Input tensor file (DTNS format).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    rank: usize,
    /// Per-mode sparsity, comma separated; one value is shared. Values in
    /// (0, 1) are fractions of the mode dimension.
    #[arg(long)]
    sparsity: Option<String>,
    /// Per-mode fusion weight, comma separated; one value is shared.
    #[arg(long)]
    lambda: Option<String>,
    /// Tied mode group as comma-separated indices; repeatable.
    #[arg(long = "tie-modes")]
    tie_modes: Vec<String>,
    #[command(flatten)]
    out: CommonOut,
}

#[derive(Args)]
struct ClusterArgs {
    /// Stacked tensor file; pass several files to stack samples instead.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    rank: usize,
    #[arg(long)]
    sparsity: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long = "tie-modes")]
    tie_modes: Vec<String>,
    /// CSV file of true labels (one per sample) to score against.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    out: CommonOut,
}

#[derive(Args)]
struct SimulateArgs {
    /// Benchmark design.
    #[arg(long, value_parser = ["2d", "3d"])]
    design: String,
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    d: usize,
    #[arg(long)]
    mu: f64,
    /// Noise covariance for the 2d design.
    #[arg(long, value_parser = ["identity", "ar", "exchangeable"], default_value = "identity")]
    cov: String,
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    /// Cluster size ratios, e.g. "1,2,3,4"; default equal.
    #[arg(long)]
    ratios: Option<String>,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 2)]
    rank: usize,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long)]
    sparsity: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[command(flatten)]
    out: CommonOut,
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long)]
    input: PathBuf,
    /// Rank candidates, comma separated.
    #[arg(long, default_value = "1,2,3")]
    ranks: String,
    /// Sparsity candidates (shared across modes), comma separated.
    #[arg(long, default_value = "0.25,0.5,1.0")]
    sparsity: String,
    /// Fusion-weight candidates, comma separated.
    #[arg(long, default_value = "0,0.02,0.1")]
    lambda: String,
    #[arg(long, default_value_t = 8)]
    kmax: usize,
    /// Reference datasets for the gap statistic.
    #[arg(long = "gap-b", default_value_t = 50)]
    gap_b: usize,
    #[command(flatten)]
    out: CommonOut,
}

#[derive(Args)]
struct ConnectArgs {
    /// CSV time-series matrix, one row per series.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 20)]
    width: usize,
    #[arg(long, default_value_t = 1)]
    step: usize,
    /// Also run the symmetric-tied decomposition at this rank.
    #[arg(long)]
    rank: Option<usize>,
    /// Cluster the window mode into K groups (requires --rank).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    lambda: Option<String>,
    #[command(flatten)]
    out: CommonOut,
}

enum CliError {
    Config(String),
    Runtime(String),
}

impl From<dtc_core::DtcError> for CliError {
    fn from(e: dtc_core::DtcError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("DTNS_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        } else {
            eprintln!("error: DTNS_THREADS must be an integer, got {:?}", v);
            return ExitCode::from(2);
        }
    }
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Decompose(a) => cmd_decompose(a),
        Cmd::Cluster(a) => cmd_cluster(a),
        Cmd::Simulate(a) => cmd_simulate(a),
        Cmd::Tune(a) => cmd_tune(a),
        Cmd::Connect(a) => cmd_connect(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(m)) => {
            eprintln!("error: {}", m);
            ExitCode::from(2)
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {}", m);
            ExitCode::from(1)
        }
    }
}

// ---------- shared plumbing ----------

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|c| {
            c.trim()
                .parse::<T>()
                .map_err(|_| config_err(format!("invalid {} entry {:?}", what, c.trim())))
        })
        .collect()
}

// Expand a shared-or-per-mode sparsity flag into absolute per-mode budgets.
fn resolve_sparsity(flag: &Option<String>, dims: &[usize]) -> Result<Vec<usize>, CliError> {
    let vals: Vec<f64> = match flag {
        None => return Ok(dims.to_vec()),
        Some(s) => parse_list(s, "sparsity")?,
    };
    let expanded: Vec<f64> = if vals.len() == 1 {
        vec![vals[0]; dims.len()]
    } else if vals.len() == dims.len() {
        vals
    } else {
        return Err(config_err(format!(
            "sparsity has {} entries for a {}-mode tensor",
            vals.len(),
            dims.len()
        )));
    };
    expanded
        .iter()
        .zip(dims)
        .enumerate()
        .map(|(j, (&v, &d))| {
            let s = if v > 0.0 && v < 1.0 {
                (v * d as f64).ceil() as usize
            } else if v >= 1.0 && v.fract() == 0.0 {
                v as usize
            } else {
                return Err(config_err(format!("invalid sparsity {} for mode {}", v, j)));
            };
            if s > d {
                return Err(config_err(format!(
                    "sparsity {} exceeds dimension {} in mode {}",
                    s, d, j
                )));
            }
            Ok(s)
        })
        .collect()
}

fn resolve_lambda(flag: &Option<String>, m: usize) -> Result<Vec<f64>, CliError> {
    let vals: Vec<f64> = match flag {
        None => return Ok(vec![0.0; m]),
        Some(s) => parse_list(s, "lambda")?,
    };
    let out = if vals.len() == 1 {
        vec![vals[0]; m]
    } else if vals.len() == m {
        vals
    } else {
        return Err(config_err(format!(
            "lambda has {} entries for a {}-mode tensor",
            vals.len(),
            m
        )));
    };
    if out.iter().any(|&l| l < 0.0 || !l.is_finite()) {
        return Err(config_err("lambda entries must be finite and nonnegative"));
    }
    Ok(out)
}

fn resolve_ties(groups: &[String], m: usize) -> Result<Vec<Vec<usize>>, CliError> {
    let mut out = Vec::new();
    for g in groups {
        let idx: Vec<usize> = parse_list(g, "tie-modes")?;
        if idx.iter().any(|&i| i >= m) {
            return Err(config_err(format!("tie-modes group {:?} names a mode >= {}", g, m)));
        }
        out.push(idx);
    }
    Ok(out)
}

fn require_input(path: &Path) -> Result<(), CliError> {
    if !path.exists() {
        return Err(config_err(format!("input path {} does not exist", path.display())));
    }
    Ok(())
}

fn prepare_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn write_sidecar<T: Serialize>(dir: &Path, config: &T) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(config)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::write(dir.join("config.json"), json)?;
    Ok(())
}

fn write_table(
    dir: &Path,
    name: &str,
    emit: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    if emit == "json" {
        let objs: Vec<serde_json::Value> = rows
            .iter()
            .map(|r| {
                header
                    .iter()
                    .zip(r)
                    .map(|(h, v)| {
                        let val = v
                            .parse::<f64>()
                            .map(|f| serde_json::json!(f))
                            .unwrap_or_else(|_| serde_json::json!(v));
                        ((*h).to_string(), val)
                    })
                    .collect::<serde_json::Map<_, _>>()
                    .into()
            })
            .collect();
        let json = serde_json::to_string_pretty(&objs)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        std::fs::write(dir.join(format!("{}.json", name)), json)?;
    } else {
        let mut text = header.join(",");
        text.push('\n');
        for r in rows {
            text.push_str(&r.join(","));
            text.push('\n');
        }
        std::fs::write(dir.join(format!("{}.csv", name)), text)?;
    }
    Ok(())
}

fn write_factors(dir: &Path, emit: &str, f: &FactorSet) -> Result<(), CliError> {
    let weight_rows: Vec<Vec<String>> = f
        .weights
        .iter()
        .enumerate()
        .map(|(r, w)| vec![(r + 1).to_string(), format!("{:.17e}", w)])
        .collect();
    write_table(dir, "weights", emit, &["rank", "weight"], &weight_rows)?;
    for (j, mode) in f.factors.iter().enumerate() {
        let d = mode[0].len();
        let rows: Vec<Vec<String>> = (0..d)
            .map(|i| mode.iter().map(|col| format!("{:.17e}", col[i])).collect())
            .collect();
        let header: Vec<String> = (1..=f.rank()).map(|r| format!("component_{}", r)).collect();
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        write_table(dir, &format!("factor_mode_{}", j + 1), emit, &header_refs, &rows)?;
    }
    Ok(())
}

fn write_report(dir: &Path, report: &StfReport) -> Result<(), CliError> {
    let json = serde_json::json!({
        "iterations": report.iterations,
        "restart_chosen": report.restart_chosen,
        "residual_norm": report.residual_norm,
        "objective": report.objective,
    });
    std::fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(&json).map_err(|e| CliError::Runtime(e.to_string()))?,
    )?;
    Ok(())
}

// ---------- subcommands ----------

fn cmd_decompose(a: DecomposeArgs) -> CliResult {
    require_input(&a.input)?;
    let t = read_tensor(&a.input).map_err(|e| CliError::Runtime(e.to_string()))?;
    let dims = t.dims().to_vec();
    let s = resolve_sparsity(&a.sparsity, &dims)?;
    let lambda = resolve_lambda(&a.lambda, dims.len())?;
    let ties = resolve_ties(&a.tie_modes, dims.len())?;
    if a.rank == 0 {
        return Err(config_err("rank must be >= 1"));
    }
    let mut spec = ConstraintSpec::uniform(&dims, 1, 0.0, a.out.seed).with_tied_modes(ties);
    spec.s = s;
    spec.lambda = lambda;
    spec.validate(&dims).map_err(|e| config_err(e.to_string()))?;

    prepare_out_dir(&a.out.output_dir)?;
    write_sidecar(
        &a.out.output_dir,
        &serde_json::json!({
            "subcommand": "decompose",
            "input": a.input,
            "rank": a.rank,
            "s": spec.s,
            "lambda": spec.lambda,
            "tied_modes": spec.tied_modes,
            "seed": a.out.seed,
            "emit": a.out.emit,
        }),
    )?;
    let (f, report) = stf_decompose(&t, a.rank, &spec)?;
    write_factors(&a.out.output_dir, &a.out.emit, &f)?;
    write_report(&a.out.output_dir, &report)?;
    println!(
        "decomposed {:?} at rank {}: residual norm {:.6}",
        dims, a.rank, report.residual_norm
    );
    Ok(())
}

fn read_truth(path: &Path, n: usize) -> Result<Vec<usize>, CliError> {
    let text = std::fs::read_to_string(path)?;
    let labels: Vec<usize> = text
        .split([',', '\n'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| config_err(format!("invalid truth label {:?}", s)))
        })
        .collect::<Result<_, _>>()?;
    if labels.len() != n {
        return Err(config_err(format!(
            "truth file has {} labels, expected {}",
            labels.len(),
            n
        )));
    }
    Ok(labels)
}

fn cmd_cluster(a: ClusterArgs) -> CliResult {
    for p in &a.input {
        require_input(p)?;
    }
    let stacked = if a.input.len() == 1 {
        read_tensor(&a.input[0]).map_err(|e| CliError::Runtime(e.to_string()))?
    } else {
        let samples: Vec<DenseTensor> = a
            .input
            .iter()
            .map(|p| read_tensor(p))
            .collect::<Result<_, _>>()
            .map_err(|e: dtc_core::DtcError| CliError::Runtime(e.to_string()))?;
        dtc_core::tensor::stack_samples(&samples)?
    };
    let dims = stacked.dims().to_vec();
    let n = *dims.last().unwrap();
    if a.k == 0 || a.k > n {
        return Err(config_err(format!("k = {} outside [1, {}]", a.k, n)));
    }
    let truth = a.truth.as_ref().map(|p| read_truth(p, n)).transpose()?;

    let s = resolve_sparsity(&a.sparsity, &dims)?;
    let lambda = resolve_lambda(&a.lambda, dims.len())?;
    let ties = resolve_ties(&a.tie_modes, dims.len())?;
    let mut spec = ConstraintSpec::uniform(&dims, 1, 0.0, a.out.seed).with_tied_modes(ties);
    spec.s = s;
    spec.lambda = lambda;
    spec.validate(&dims).map_err(|e| config_err(e.to_string()))?;

    prepare_out_dir(&a.out.output_dir)?;
    write_sidecar(
        &a.out.output_dir,
        &serde_json::json!({
            "subcommand": "cluster",
            "input": a.input,
            "rank": a.rank,
            "k": a.k,
            "s": spec.s,
            "lambda": spec.lambda,
            "seed": a.out.seed,
            "emit": a.out.emit,
        }),
    )?;
    let (clust, f) = dtc_mode(&stacked, a.k, a.rank, &spec, dims.len() - 1)?;
    let assign_rows: Vec<Vec<String>> = clust
        .assignment
        .iter()
        .enumerate()
        .map(|(i, &l)| vec![(i + 1).to_string(), l.to_string()])
        .collect();
    write_table(
        &a.out.output_dir,
        "assignment",
        &a.out.emit,
        &["sample", "cluster"],
        &assign_rows,
    )?;
    let center_rows: Vec<Vec<String>> = clust
        .centers
        .iter()
        .enumerate()
        .map(|(c, ctr)| {
            let mut row = vec![(c + 1).to_string()];
            row.extend(ctr.iter().map(|v| format!("{:.17e}", v)));
            row
        })
        .collect();
    let mut center_header = vec!["cluster".to_string()];
    center_header.extend((1..=f.rank()).map(|r| format!("component_{}", r)));
    let center_refs: Vec<&str> = center_header.iter().map(String::as_str).collect();
    write_table(&a.out.output_dir, "centers", &a.out.emit, &center_refs, &center_rows)?;

    let mut metrics = serde_json::json!({
        "k": clust.k,
        "within_dispersion": clust.within_dispersion,
    });
    if let Some(truth) = truth {
        let err = clustering_error(&clust.assignment, &truth)?;
        metrics["clustering_error"] = serde_json::json!(err);
        println!("clustering error vs truth: {:.3}", err);
    }
    std::fs::write(
        a.out.output_dir.join("metrics.json"),
        serde_json::to_string_pretty(&metrics).map_err(|e| CliError::Runtime(e.to_string()))?,
    )?;
    println!("clustered {} samples into {} groups", n, a.k);
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> CliResult {
    if a.mu <= 0.0 {
        return Err(config_err("mu must be positive"));
    }
    if a.reps == 0 {
        return Err(config_err("reps must be >= 1"));
    }
    let ratios = match &a.ratios {
        None => ClusterRatios::Equal,
        Some(r) => ClusterRatios::Ratios(parse_list(r, "ratios")?),
    };
    let design = match a.design.as_str() {
        "2d" => {
            let cov = match a.cov.as_str() {
                "identity" => CovarianceSpec::identity(a.d),
                "ar" => CovarianceSpec::ar(a.d, a.rho),
                "exchangeable" => CovarianceSpec::exchangeable(a.d, a.rho),
                _ => unreachable!(),
            };
            Design::TwoD {
                n: a.n,
                d: a.d,
                mu: a.mu,
                cov,
                ratios,
            }
        }
        "3d" => Design::ThreeD {
            n: a.n,
            d: a.d,
            mu: a.mu,
            ratios,
        },
        _ => unreachable!(),
    };
    let dims = design.stacked_dims();
    let mut cfg = HarnessConfig::new(design, a.reps, a.out.seed);
    cfg.rank = a.rank;
    cfg.k = a.k;
    if a.sparsity.is_some() {
        cfg.s = Some(resolve_sparsity(&a.sparsity, &dims)?);
    }
    if a.lambda.is_some() {
        cfg.lambda = Some(resolve_lambda(&a.lambda, dims.len())?);
    }
    prepare_out_dir(&a.out.output_dir)?;
    write_sidecar(
        &a.out.output_dir,
        &serde_json::json!({
            "subcommand": "simulate",
            "design": a.design,
            "n": a.n, "d": a.d, "mu": a.mu,
            "cov": a.cov, "rho": a.rho,
            "ratios": a.ratios,
            "reps": a.reps, "rank": a.rank, "k": a.k,
            "s": cfg.s, "lambda": cfg.lambda,
            "seed": a.out.seed, "emit": a.out.emit,
        }),
    )?;
    let s = run_replications(&cfg)?;
    let rows: Vec<Vec<String>> = s
        .rows
        .iter()
        .map(|r| {
            vec![
                r.rep.to_string(),
                format!("{:.6}", r.recovery),
                format!("{:.6}", r.clustering),
                format!("{:.3}", r.seconds),
            ]
        })
        .collect();
    write_table(
        &a.out.output_dir,
        "replications",
        &a.out.emit,
        &["rep", "recovery_error", "clustering_error", "seconds"],
        &rows,
    )?;
    let fmt_se = |v: f64| {
        if v.is_nan() {
            "NA".to_string()
        } else {
            format!("{:.6}", v)
        }
    };
    let summary = vec![
        vec![
            "recovery_error".to_string(),
            format!("{:.6}", s.mean_recovery),
            fmt_se(s.se_recovery),
        ],
        vec![
            "clustering_error".to_string(),
            format!("{:.6}", s.mean_clustering),
            fmt_se(s.se_clustering),
        ],
        vec![
            "seconds".to_string(),
            format!("{:.3}", s.mean_seconds),
            "NA".to_string(),
        ],
    ];
    write_table(
        &a.out.output_dir,
        "summary",
        &a.out.emit,
        &["metric", "mean", "se"],
        &summary,
    )?;
    println!(
        "{} reps: recovery {:.3} ({}), clustering {:.3} ({})",
        a.reps,
        s.mean_recovery,
        fmt_se(s.se_recovery),
        s.mean_clustering,
        fmt_se(s.se_clustering)
    );
    Ok(())
}

fn cmd_tune(a: TuneArgs) -> CliResult {
    require_input(&a.input)?;
    let t = read_tensor(&a.input).map_err(|e| CliError::Runtime(e.to_string()))?;
    let dims = t.dims().to_vec();
    let min_dim = *dims.iter().min().unwrap();
    let ranks: Vec<usize> = parse_list(&a.ranks, "ranks")?;
    let sp: Vec<f64> = parse_list(&a.sparsity, "sparsity")?;
    let sparsity: Vec<usize> = sp
        .iter()
        .map(|&v| {
            if v > 0.0 && v < 1.0 {
                ((v * min_dim as f64).ceil() as usize).max(1)
            } else {
                (v as usize).max(1)
            }
        })
        .collect();
    let lambdas: Vec<f64> = parse_list(&a.lambda, "lambda")?;
    let grid = TuneGrid {
        ranks,
        sparsity,
        lambdas,
    };
    grid.validate().map_err(|e| config_err(e.to_string()))?;
    let n = *dims.last().unwrap();
    if a.kmax == 0 || a.kmax > n {
        return Err(config_err(format!("kmax = {} outside [1, {}]", a.kmax, n)));
    }
    if a.gap_b == 0 {
        return Err(config_err("gap-b must be >= 1"));
    }

    prepare_out_dir(&a.out.output_dir)?;
    write_sidecar(
        &a.out.output_dir,
        &serde_json::json!({
            "subcommand": "tune",
            "input": a.input,
            "ranks": a.ranks, "sparsity": a.sparsity, "lambda": a.lambda,
            "kmax": a.kmax, "gap_b": a.gap_b,
            "seed": a.out.seed, "emit": a.out.emit,
        }),
    )?;
    let base = ConstraintSpec::uniform(&dims, 1, 0.0, a.out.seed);
    let (best, scores) = select_model(&t, &grid, &base)?;
    let rows: Vec<Vec<String>> = scores
        .iter()
        .map(|s| {
            vec![
                s.rank.to_string(),
                s.s.to_string(),
                format!("{}", s.lambda),
                format!("{:.6}", s.bic),
                s.df.to_string(),
                format!("{:.6}", s.rss),
            ]
        })
        .collect();
    write_table(
        &a.out.output_dir,
        "criterion_grid",
        &a.out.emit,
        &["rank", "s", "lambda", "score", "df", "rss"],
        &rows,
    )?;

    // refit at the chosen point, then pick K on the reduced sample-mode rows
    let mut spec = base.clone();
    for (sj, &dj) in spec.s.iter_mut().zip(&dims) {
        *sj = best.s.min(dj);
    }
    for l in spec.lambda.iter_mut() {
        *l = best.lambda;
    }
    let (f, _) = stf_decompose(&t, best.rank, &spec)?;
    let rows_reduced = f.mode_rows(dims.len() - 1);
    let gap = gap_statistic(&rows_reduced, a.kmax, a.gap_b, a.out.seed)?;
    let gap_rows: Vec<Vec<String>> = (1..=a.kmax)
        .map(|k| {
            vec![
                k.to_string(),
                format!("{:.6}", gap.gap[k - 1]),
                format!("{:.6}", gap.se[k - 1]),
                format!("{:.6}", gap.log_w[k - 1]),
            ]
        })
        .collect();
    write_table(
        &a.out.output_dir,
        "gap_curve",
        &a.out.emit,
        &["k", "gap", "se", "log_w"],
        &gap_rows,
    )?;
    let chosen = serde_json::json!({
        "rank": best.rank,
        "s": best.s,
        "lambda": best.lambda,
        "score": best.bic,
        "k": gap.chosen_k,
    });
    std::fs::write(
        a.out.output_dir.join("chosen.json"),
        serde_json::to_string_pretty(&chosen).map_err(|e| CliError::Runtime(e.to_string()))?,
    )?;
    println!(
        "chosen rank {}, s {}, lambda {}, K {}",
        best.rank, best.s, best.lambda, gap.chosen_k
    );
    Ok(())
}

fn cmd_connect(a: ConnectArgs) -> CliResult {
    require_input(&a.input)?;
    let ts = import_matrix_csv(&a.input).map_err(|e| CliError::Runtime(e.to_string()))?;
    if ts.len() < 2 {
        return Err(config_err("need at least two time series"));
    }
    let t_len = ts[0].len();
    let spec = WindowSpec::new(a.width, a.step);
    spec.count(t_len).map_err(|e| config_err(e.to_string()))?;
    if a.k.is_some() && a.rank.is_none() {
        return Err(config_err("--k requires --rank"));
    }

    prepare_out_dir(&a.out.output_dir)?;
    write_sidecar(
        &a.out.output_dir,
        &serde_json::json!({
            "subcommand": "connect",
            "input": a.input,
            "width": a.width, "step": a.step,
            "rank": a.rank, "k": a.k, "lambda": a.lambda,
            "seed": a.out.seed, "emit": a.out.emit,
        }),
    )?;
    let corr = sliding_corr(&ts, &spec)?;
    if corr.zero_variance_windows > 0 {
        eprintln!(
            "warning: {} windows contained a zero-variance series; their off-diagonal correlations were set to 0",
            corr.zero_variance_windows
        );
    }
    let tensor_path = a.out.output_dir.join("correlation.dtns");
    write_tensor(&corr.tensor, &tensor_path)?;
    let dims = corr.tensor.dims().to_vec();
    println!(
        "wrote correlation tensor {:?} to {}",
        dims,
        tensor_path.display()
    );

    if let Some(rank) = a.rank {
        if rank == 0 {
            return Err(config_err("rank must be >= 1"));
        }
        // symmetric in the two region modes; fusion smooths the window mode
        let lambda = resolve_lambda(&a.lambda, dims.len())?;
        let mut cspec = ConstraintSpec::uniform(&dims, 1, 0.0, a.out.seed)
            .with_tied_modes(vec![vec![0, 1]]);
        cspec.s = dims.clone();
        cspec.lambda = lambda;
        if let Some(k) = a.k {
            let t = dims[2];
            if k == 0 || k > t {
                return Err(config_err(format!("k = {} outside [1, {}]", k, t)));
            }
            let (clust, f) = dtc_mode(&corr.tensor, k, rank, &cspec, 2)?;
            let rows: Vec<Vec<String>> = clust
                .assignment
                .iter()
                .enumerate()
                .map(|(i, &l)| vec![(i + 1).to_string(), l.to_string()])
                .collect();
            write_table(
                &a.out.output_dir,
                "window_assignment",
                &a.out.emit,
                &["window", "cluster"],
                &rows,
            )?;
            write_factors(&a.out.output_dir, &a.out.emit, &f)?;
            println!("clustered {} windows into {} regimes", dims[2], k);
        } else {
            let (f, report) = stf_decompose(&corr.tensor, rank, &cspec)?;
            write_factors(&a.out.output_dir, &a.out.emit, &f)?;
            write_report(&a.out.output_dir, &report)?;
        }
    }
    Ok(())
}
