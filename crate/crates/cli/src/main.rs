//! `dvbp`: statistics, compression, reduction, sweeps, verification,
//! exact solving, ILP export and trace ingestion from the command line.
//!
//! Exit codes: 0 success, 1 invalid input or failed verification,
//! 2 usage errors, unreadable files and solver refusals.

use std::fs::{self, File};
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dvbp::bounds::RemovalBudget;
use dvbp::exact::{DpLimits, ExactError, IlpOptions, DEFAULT_BRUTE_FORCE_LIMIT};
use dvbp::format::{
    certificate_from_json, certificate_to_json, instance_to_json, instance_to_text, packing_to_csv,
    packing_to_json, read_instance, read_packing,
};
use dvbp::ingest::{ingest_trace, TraceSchema};
use dvbp::packing::PriorityRule;
use dvbp::rational::{ceil, parse_rational};
use dvbp::report::{eps_grid, render_exact, sweep_row, sweep_to_csv, SweepRow};
use dvbp::{
    compress_time, compute_stats, export_ilp, lift_solution, lower_bound, priority_rule,
    priority_rules, reduce, solver, solvers, upper_bound_removable, verify_packing, Instance,
    Packing, Rational, ReductionOptions, SolverConfig, ValidateOptions,
};
use rayon::prelude::*;

#[derive(Parser)]
#[command(
    name = "dvbp",
    version,
    about = "Data reduction and exact solving for dynamic vector bin packing"
)]
struct Cli {
    /// Drop zero-duration requests instead of rejecting the instance.
    #[arg(long, global = true)]
    drop_empty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print instance statistics.
    Stats {
        instance: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Remap time to the smallest horizon with the same intersections.
    Compress {
        instance: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the `original,compressed` time map as CSV.
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Delete floor(eps * L) greedily filled bins.
    Reduce {
        instance: PathBuf,
        #[command(flatten)]
        reduction: ReductionArgs,
        #[arg(long)]
        epsilon: String,
        /// Directory for reduced.txt, certificate.json and metrics.csv.
        #[arg(long)]
        out: PathBuf,
        /// Record wall time in metrics.csv.
        #[arg(long)]
        timing: bool,
    },
    /// Turn a packing of a reduced instance into one of the original.
    Lift {
        /// The original instance.
        instance: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
        #[arg(long)]
        packing: PathBuf,
        #[command(flatten)]
        output: PackingOutput,
    },
    /// Reduce for a range of epsilon values and report one row per value.
    Sweep {
        instance: PathBuf,
        #[command(flatten)]
        reduction: ReductionArgs,
        #[arg(long, default_value = "0")]
        eps_from: String,
        #[arg(long, default_value = "0.2")]
        eps_to: String,
        #[arg(long, default_value = "0.01")]
        eps_step: String,
        /// Worker threads; 0 uses all cores.
        #[arg(long, env = "DVBP_THREADS", default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        timing: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the load lower bound and the removal upper bound.
    Bounds {
        instance: PathBuf,
        /// Bin count for the removal bound; defaults to floor(eps * L).
        #[arg(long)]
        k: Option<u64>,
        #[arg(long, default_value = "0")]
        epsilon: String,
        #[arg(long, default_value = "as-written")]
        budget: RemovalBudget,
    },
    /// Verify a packing against an instance.
    Check { instance: PathBuf, packing: PathBuf },
    /// Pack an instance with a registered solver.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value = "heuristic")]
        solver: String,
        #[arg(long, default_value = "f2")]
        mode: String,
        /// Request limit for the exhaustive search.
        #[arg(long, default_value_t = DEFAULT_BRUTE_FORCE_LIMIT)]
        limit: usize,
        /// Fixed bin budget for the dynamic program.
        #[arg(long)]
        bins: Option<u32>,
        #[arg(long, default_value_t = DpLimits::default().max_height)]
        max_height: usize,
        #[arg(long, default_value_t = DpLimits::default().max_bins)]
        max_bins: u32,
        #[command(flatten)]
        output: PackingOutput,
    },
    /// Write the ILP model of the time-compressed instance in LP format.
    ExportIlp {
        instance: PathBuf,
        #[arg(long)]
        bins: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// JSON map from variable names to type keys and bins.
        #[arg(long)]
        sidecar: Option<PathBuf>,
        /// One resource block per instant even when active sets repeat.
        #[arg(long)]
        no_dedup: bool,
    },
    /// Convert a VM trace into a canonical instance.
    Ingest {
        trace: PathBuf,
        /// Shipped schema: huawei or azure.
        #[arg(long, conflicts_with = "schema", required_unless_present = "schema")]
        preset: Option<String>,
        /// Schema file in JSON.
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// List registered priority rules and solvers.
    List,
}

#[derive(Args)]
struct ReductionArgs {
    /// Priority rule for greedy bin filling.
    #[arg(long, default_value = "f2")]
    mode: String,
    #[arg(long, default_value = "as-written")]
    budget: RemovalBudget,
    /// Keep the original time axis between deleted bins.
    #[arg(long)]
    no_recompress: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum PackingFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct PackingOutput {
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: PackingFormat,
}

enum Failure {
    /// Input is malformed or a verification failed.
    Invalid(anyhow::Error),
    Usage(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

type Outcome = Result<(), Failure>;

fn invalid(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Invalid(e.into())
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("cannot open {}", path.display()))
        .map_err(Failure::Usage)
}

fn load(path: &Path, options: ValidateOptions) -> Result<Instance, Failure> {
    let validated = read_instance(open(path)?, options)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Invalid)?;
    if validated.dropped_empty > 0 {
        eprintln!(
            "warning: dropped {} zero-duration requests",
            validated.dropped_empty
        );
    }
    Ok(validated.instance)
}

fn load_packing(path: &Path) -> Result<Packing, Failure> {
    read_packing(open(path)?)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Invalid)
}

fn write_output(path: Option<&Path>, contents: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, contents).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(contents.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn write_packing(packing: &Packing, out: &PackingOutput) -> anyhow::Result<()> {
    let text = match out.format {
        PackingFormat::Csv => packing_to_csv(packing),
        PackingFormat::Json => packing_to_json(packing),
    };
    write_output(out.output.as_deref(), &text)
}

fn rational(flag: &str, value: &str) -> anyhow::Result<Rational> {
    parse_rational(value).with_context(|| format!("--{flag}"))
}

fn rule(name: &str) -> anyhow::Result<&'static dyn PriorityRule> {
    priority_rule(name).ok_or_else(|| {
        let known: Vec<_> = priority_rules().iter().map(|r| r.name()).collect();
        anyhow!("unknown mode `{name}` (available: {})", known.join(", "))
    })
}

impl ReductionArgs {
    fn options(&self) -> ReductionOptions {
        ReductionOptions {
            recompress: !self.no_recompress,
            budget: self.budget,
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let validate = ValidateOptions {
        drop_empty: cli.drop_empty,
    };
    match cli.command {
        Command::Stats { instance, json } => {
            let inst = load(&instance, validate)?;
            let s = compute_stats(&inst);
            let lb = lower_bound(&inst);
            if json {
                let value = serde_json::json!({
                    "n": s.n, "d": s.d, "T": s.horizon, "h": s.height,
                    "phi": s.flavors, "tau": s.types, "L": lb.to_string(),
                });
                println!("{value}");
            } else {
                println!(
                    "n={} d={} T={} h={} phi={} tau={} L={}",
                    s.n, s.d, s.horizon, s.height, s.flavors, s.types, lb
                );
            }
        }
        Command::Compress {
            instance,
            output,
            map,
            json,
        } => {
            let inst = load(&instance, validate)?;
            let (compressed, time_map) = compress_time(&inst);
            if let Some(path) = map {
                let mut csv = String::from("original,compressed\n");
                for (o, c) in time_map.pairs() {
                    csv.push_str(&format!("{o},{c}\n"));
                }
                write_output(Some(&path), &csv)?;
            }
            let text = if json {
                instance_to_json(&compressed)
            } else {
                instance_to_text(&compressed)
            };
            write_output(output.as_deref(), &text)?;
        }
        Command::Reduce {
            instance,
            reduction,
            epsilon,
            out,
            timing,
        } => {
            let eps = rational("epsilon", &epsilon)?;
            let rule = rule(&reduction.mode)?;
            let inst = load(&instance, validate)?;
            let started = std::time::Instant::now();
            let red = reduce(&inst, eps, rule, reduction.options()).map_err(anyhow::Error::from)?;
            let seconds = if timing {
                started.elapsed().as_secs_f64()
            } else {
                0.0
            };
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            write_output(
                Some(&out.join("reduced.txt")),
                &instance_to_text(&red.instance),
            )?;
            write_output(
                Some(&out.join("certificate.json")),
                &certificate_to_json(&red.certificate),
            )?;
            let row = SweepRow::from_reduction(&red, seconds);
            write_output(Some(&out.join("metrics.csv")), &sweep_to_csv(&[row]))?;
            let c = &red.certificate;
            println!(
                "L={} k_del={} deleted={} in {} bins, n'={}",
                c.lower_bound,
                c.k_del,
                c.deleted_count(),
                c.deletion_bins.len(),
                red.instance.len()
            );
        }
        Command::Lift {
            instance,
            certificate,
            packing,
            output,
        } => {
            let inst = load(&instance, validate)?;
            let cert = certificate_from_json(open(&certificate)?)
                .with_context(|| format!("reading {}", certificate.display()))
                .map_err(Failure::Invalid)?;
            let reduced = load_packing(&packing)?;
            let lifted = lift_solution(&cert, &reduced, &inst).map_err(invalid)?;
            eprintln!("lifted to {} bins", lifted.bin_count());
            write_packing(&lifted, &output)?;
        }
        Command::Sweep {
            instance,
            reduction,
            eps_from,
            eps_to,
            eps_step,
            threads,
            timing,
            output,
        } => {
            let grid = eps_grid(
                rational("eps-from", &eps_from)?,
                rational("eps-to", &eps_to)?,
                rational("eps-step", &eps_step)?,
            );
            if grid.is_empty() {
                return Err(Failure::Usage(anyhow!("empty epsilon range")));
            }
            if grid[0] < Rational::from_integer(0) {
                return Err(Failure::Usage(anyhow!("epsilon must be non-negative")));
            }
            let rule = rule(&reduction.mode)?;
            let inst = load(&instance, validate)?;
            let options = reduction.options();
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .context("starting worker pool")?;
            let rows = pool.install(|| {
                grid.par_iter()
                    .map(|&eps| sweep_row(&inst, eps, rule, options, timing))
                    .collect::<Result<Vec<_>, _>>()
            });
            let rows = rows.map_err(anyhow::Error::from)?;
            write_output(output.as_deref(), &sweep_to_csv(&rows))?;
        }
        Command::Bounds {
            instance,
            k,
            epsilon,
            budget,
        } => {
            let eps = rational("epsilon", &epsilon)?;
            let inst = load(&instance, validate)?;
            let compressed = compress_time(&inst).0;
            let lb = lower_bound(&compressed);
            let k = k.unwrap_or_else(|| dvbp::rational::floor(&(eps * lb)).max(0) as u64);
            let u = upper_bound_removable(&compressed, k, budget);
            println!(
                "L={} ceil_L={} k={k} U={u} budget={budget}",
                render_exact(&lb),
                ceil(&lb)
            );
        }
        Command::Check { instance, packing } => {
            let inst = load(&instance, validate)?;
            let p = load_packing(&packing)?;
            let report = verify_packing(&inst, &p).map_err(invalid)?;
            for v in report.violations.iter().take(20) {
                eprintln!(
                    "bin {} at t={} dimension {}: load {} exceeds capacity {}",
                    v.bin, v.time, v.dimension, v.load, v.capacity
                );
            }
            if !report.unassigned.is_empty() {
                let shown: Vec<String> = report
                    .unassigned
                    .iter()
                    .take(20)
                    .map(|id| id.to_string())
                    .collect();
                eprintln!(
                    "{} requests unassigned: {}",
                    report.unassigned.len(),
                    shown.join(" ")
                );
            }
            if !report.is_feasible() {
                return Err(invalid(anyhow!(
                    "packing is infeasible ({} violations, {} unassigned)",
                    report.violations.len(),
                    report.unassigned.len()
                )));
            }
            println!("feasible bins={}", p.bin_count());
        }
        Command::Solve {
            instance,
            solver: name,
            mode,
            limit,
            bins,
            max_height,
            max_bins,
            output,
        } => {
            let chosen = solver(&name).ok_or_else(|| {
                let known: Vec<_> = solvers().iter().map(|s| s.name()).collect();
                anyhow!("unknown solver `{name}` (available: {})", known.join(", "))
            })?;
            let config = SolverConfig {
                priority_rule: rule(&mode)?,
                brute_force_limit: limit,
                dp_limits: DpLimits {
                    max_height,
                    max_bins,
                },
                bins,
            };
            let inst = load(&instance, validate)?;
            let solution = match chosen.solve(&inst, &config) {
                Ok(s) => s,
                Err(e @ ExactError::Infeasible(_)) => return Err(invalid(e)),
                Err(e) => return Err(Failure::Usage(e.into())),
            };
            eprintln!(
                "{}: {} bins{}",
                chosen.name(),
                solution.packing.bin_count(),
                if solution.optimal { " (optimal)" } else { "" }
            );
            write_packing(&solution.packing, &output)?;
        }
        Command::ExportIlp {
            instance,
            bins,
            output,
            sidecar,
            no_dedup,
        } => {
            let inst = load(&instance, validate)?;
            let compressed = compress_time(&inst).0;
            let options = IlpOptions {
                dedup_consecutive: !no_dedup,
            };
            let model = export_ilp(&compressed, bins, options).map_err(anyhow::Error::from)?;
            if let Some(path) = sidecar {
                write_output(Some(&path), &model.sidecar_json())?;
            }
            write_output(output.as_deref(), &model.lp)?;
        }
        Command::Ingest {
            trace,
            preset,
            schema,
            output,
            json,
        } => {
            let schema = match (preset, schema) {
                (Some(name), _) => TraceSchema::preset(&name).ok_or_else(|| {
                    let known: Vec<_> = TraceSchema::preset_names().collect();
                    anyhow!("unknown preset `{name}` (available: {})", known.join(", "))
                })?,
                (None, Some(path)) => {
                    let mut text = String::new();
                    open(&path)?
                        .read_to_string(&mut text)
                        .context("reading schema")?;
                    TraceSchema::from_json(&text)
                        .with_context(|| format!("parsing schema {}", path.display()))?
                }
                (None, None) => unreachable!("clap requires one of --preset and --schema"),
            };
            let (inst, report) = ingest_trace(open(&trace)?, &schema).map_err(invalid)?;
            eprintln!(
                "rows={} requests={} dropped_empty={} dropped_missing_end={} unmatched_deletes={} errors={}",
                report.rows,
                report.requests,
                report.dropped_empty,
                report.dropped_missing_end,
                report.unmatched_deletes,
                report.errors.len()
            );
            for e in report.errors.iter().take(10) {
                eprintln!("warning: {e}");
            }
            let text = if json {
                instance_to_json(&inst)
            } else {
                instance_to_text(&inst)
            };
            write_output(output.as_deref(), &text)?;
        }
        Command::List => {
            println!("priority rules:");
            for r in priority_rules() {
                println!("  {:<10} {}", r.name(), r.description());
            }
            println!("solvers:");
            for s in solvers() {
                println!("  {:<10} {}", s.name(), s.description());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
