//! Command-line experiment runner.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use fpl_trix::decision_sets::DecisionSet;
use fpl_trix::environments::{read_loss_csv, LossSource};
use fpl_trix::harness::audits::{
    audit_estimate_bias, audit_loss_closeness, audit_quadratic_term, audit_top_m_exponentials,
    audit_truncation_tv, random_snapshot, AuditReport,
};
use fpl_trix::harness::{
    run_experiment, write_summary_json, write_trace_csv, ExperimentConfig, OutputFormat,
};
use fpl_trix::policy::{adaptive_regret_bound, first_order_bound, horizon_bound};
use fpl_trix::rng::{stream_rng, SALT_AUDIT};

#[derive(Parser)]
#[command(
    name = "fpl-trix",
    about = "Perturbed-leader semi-bandit experiments: runs, audits, and bound evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment and export traces and a summary.
    Run(RunArgs),
    /// Run the inequality audit suite and print one verdict per audit.
    Audit(AuditArgs),
    /// Compute the exact best-fixed-action loss of a loss file.
    Lstar(LstarArgs),
    /// Evaluate the closed-form regret bounds.
    Bound(BoundArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's replication count.
    #[arg(long)]
    replications: Option<u64>,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's output format (csv writes per-round traces too).
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        other => Err(format!("unknown format {other:?}, expected csv or json")),
    }
}

#[derive(Args)]
struct AuditArgs {
    /// Seed for the audit randomness.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo draws per frequency estimate.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Random snapshots per estimate-level audit.
    #[arg(long, default_value_t = 20)]
    snapshots: usize,
    /// Single-arm count for the truncation audit.
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Truncation bound for the truncation audit.
    #[arg(long, default_value_t = 2.0)]
    b: f64,
}

#[derive(Args)]
struct LstarArgs {
    /// Loss CSV (header `d=<d>[,set=<descriptor>]`, one row per round).
    #[arg(long)]
    losses: PathBuf,
    /// Decision set descriptor, e.g. `mab:d=3` or `mset:d=6:m=2`; defaults
    /// to the descriptor embedded in the loss file header.
    #[arg(long)]
    set: Option<String>,
}

#[derive(Args)]
struct BoundArgs {
    /// Ambient dimension.
    #[arg(long)]
    d: usize,
    /// Maximum action weight.
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Best fixed action's total loss (enables the first-order bound).
    #[arg(long)]
    lstar: Option<f64>,
    /// Horizon.
    #[arg(long)]
    horizon: u64,
    /// Additive constant in the first-order bound.
    #[arg(long, default_value_t = 9.0)]
    additive_const: f64,
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch() -> anyhow::Result<ExitCode> {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::Audit(args) => cmd_audit(args),
        Command::Lstar(args) => cmd_lstar(args),
        Command::Bound(args) => cmd_bound(args),
    }
}

fn cmd_run(args: RunArgs) -> anyhow::Result<ExitCode> {
    let mut cfg = ExperimentConfig::from_file(&args.config)
        .with_context(|| format!("loading {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        cfg.run.seed = seed;
    }
    if let Some(reps) = args.replications {
        cfg.run.replications = reps;
    }
    if let Some(out) = args.out {
        cfg.output.dir = out.display().to_string();
    }
    if let Some(format) = args.format {
        cfg.output.format = format;
    }
    let result = run_experiment(&cfg)?;

    let out_dir = Path::new(&cfg.output.dir);
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    if cfg.output.format == OutputFormat::Csv && cfg.output.write_trace {
        for outcome in &result.outcomes {
            let path = out_dir.join(format!("trace_rep{:03}.csv", outcome.replication));
            write_trace_csv(&path, outcome)?;
        }
    }
    let summary_path = out_dir.join("summary.json");
    write_summary_json(&summary_path, &result)?;

    println!(
        "policy {}  set {}  horizon {}  replications {}",
        result.outcomes[0].metrics.policy,
        cfg.build_set()?.descriptor(),
        cfg.run.horizon,
        cfg.run.replications
    );
    for outcome in &result.outcomes {
        let m = &outcome.metrics;
        println!(
            "rep {:3}  loss {:12.4}  lstar {:12.4}  regret {:12.4}  bound {:12.4}",
            outcome.replication, m.learner_loss, m.lstar, m.regret, m.bound_combined
        );
    }
    println!(
        "mean regret {:.4} (se {:.4})  mean bound {:.4}  -> {}",
        result.aggregate.mean_regret,
        result.aggregate.stderr_regret,
        result.aggregate.mean_bound_combined,
        summary_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_audit(args: AuditArgs) -> anyhow::Result<ExitCode> {
    let mut reports: Vec<AuditReport> = Vec::new();
    let mut rng = stream_rng(args.seed, &[SALT_AUDIT]);

    reports.push(audit_truncation_tv(args.d, args.b, args.samples, &mut rng)?);
    reports.push(audit_top_m_exponentials(10, 3, args.samples, &mut rng)?);

    // Loss-closeness on a short fresh adaptive run.
    let cfg = ExperimentConfig::from_toml_str(&format!(
        "
[set]
kind = \"mab\"
d = 5

[policy]
q_samples = 1000

[run]
horizon = 1000
seed = {}
",
        args.seed
    ))?;
    let set = cfg.build_set()?;
    let result = run_experiment(&cfg)?;
    reports.push(audit_loss_closeness(&result.outcomes[0], &set));

    // Estimate-level audits on random snapshots: exact on single arms,
    // Monte Carlo on a small m-set.
    let mab = DecisionSet::mab(3)?;
    let mset = DecisionSet::mset(4, 2)?;
    let mut worst_quadratic: Option<AuditReport> = None;
    let mut worst_bias: Option<AuditReport> = None;
    for _ in 0..args.snapshots {
        for set in [&mab, &mset] {
            let snap = random_snapshot(set, args.samples.min(50_000), &mut rng)?;
            let q = audit_quadratic_term(&snap, args.samples.min(50_000), &mut rng)?;
            let b = audit_estimate_bias(&snap, args.samples.min(50_000), &mut rng)?;
            if worst_quadratic.as_ref().map_or(true, |w| q.margin < w.margin) {
                worst_quadratic = Some(q);
            }
            if worst_bias.as_ref().map_or(true, |w| b.margin < w.margin) {
                worst_bias = Some(b);
            }
        }
    }
    reports.extend(worst_quadratic);
    reports.extend(worst_bias);

    let mut all_pass = true;
    for report in &reports {
        println!("{report}");
        all_pass &= report.pass;
    }
    if all_pass {
        println!("all {} audits passed", reports.len());
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("audit failure");
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_lstar(args: LstarArgs) -> anyhow::Result<ExitCode> {
    let (d, embedded, _) = read_loss_csv(&args.losses)?;
    let descriptor = args
        .set
        .or(embedded)
        .unwrap_or_else(|| format!("mab:d={d}"));
    let set = parse_set_descriptor(&descriptor)?;
    if set.dim() != d {
        bail!(
            "decision set {} has dimension {}, loss file has {d}",
            descriptor,
            set.dim()
        );
    }
    let source = LossSource::from_file(&args.losses)?;
    let lstar = source.oracle_lstar(&set)?;
    println!("{lstar}");
    Ok(ExitCode::SUCCESS)
}

/// Parses descriptors like `mab:d=5`, `mset:d=6:m=2`, `matching:n=3`,
/// `dagpath:nodes=4:source=0:sink=3:edges=0-1;1-3;0-3`.
fn parse_set_descriptor(desc: &str) -> anyhow::Result<DecisionSet> {
    let mut parts = desc.split(':');
    let kind = parts.next().unwrap_or_default();
    let mut fields = std::collections::HashMap::new();
    for part in parts {
        let (k, v) = part
            .split_once('=')
            .with_context(|| format!("bad descriptor field {part:?}"))?;
        fields.insert(k.to_string(), v.to_string());
    }
    let get_usize = |key: &str| -> anyhow::Result<usize> {
        fields
            .get(key)
            .with_context(|| format!("descriptor missing {key}"))?
            .parse()
            .with_context(|| format!("bad {key} in descriptor"))
    };
    let set = match kind {
        "mab" => DecisionSet::mab(get_usize("d")?)?,
        "mset" => DecisionSet::mset(get_usize("d")?, get_usize("m")?)?,
        "matching" => DecisionSet::matching(get_usize("n")?)?,
        "dagpath" => {
            let edges: Vec<(usize, usize)> = fields
                .get("edges")
                .context("descriptor missing edges")?
                .split(';')
                .map(|e| {
                    let (u, w) = e.split_once('-').context("edge must be u-w")?;
                    Ok((u.parse()?, w.parse()?))
                })
                .collect::<anyhow::Result<_>>()?;
            DecisionSet::dag_path(get_usize("nodes")?, edges, get_usize("source")?, get_usize("sink")?)?
        }
        other => bail!("unknown decision set kind {other:?}"),
    };
    Ok(set)
}

fn cmd_bound(args: BoundArgs) -> anyhow::Result<ExitCode> {
    let horizon_b = horizon_bound(args.d, args.m, args.horizon);
    match args.lstar {
        Some(lstar) => {
            let first = first_order_bound(args.d, args.m, lstar, args.horizon, args.additive_const);
            let combined =
                adaptive_regret_bound(args.d, args.m, lstar, args.horizon, args.additive_const);
            println!("first_order {first}");
            println!("horizon {horizon_b}");
            println!("combined {combined}");
        }
        None => {
            println!("horizon {horizon_b}");
        }
    }
    Ok(ExitCode::SUCCESS)
}
