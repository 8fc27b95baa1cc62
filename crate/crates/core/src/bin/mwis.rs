use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use mwis_core::bench::{guidance_ablation, scheduler_ablation, Family};
use mwis_core::generate::random_instance;
use mwis_core::io::{format_instance, read_instance, write_instance, write_solution};
use mwis_core::oracle::brute_force_mwis;
use mwis_core::{solve, Mode, MwisError, RunConfig, ScheduleConfig, Scheduler, Truncation};

#[derive(Parser)]
#[command(
    name = "mwis",
    version,
    about = "Maximum-weight independent set via smoothed dual coordinate descent"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file.
    Solve(SolveArgs),
    /// Write a random instance with a greedy clique cover.
    Generate(GenerateArgs),
    /// Check the cover invariants of an instance file.
    Validate { instance: PathBuf },
    /// Exact optimum by enumeration (at most 25 nodes).
    Brute {
        instance: PathBuf,
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Ablation reports.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "lp-exp")]
    mode: Mode,
    #[arg(long, value_enum, default_value = "gap")]
    scheduler: Scheduler,
    #[arg(long, value_enum, default_value = "none")]
    truncation: Truncation,
    /// Defaults to 1e30, or 10 under accurate truncation.
    #[arg(long)]
    tau_stab: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated starting duals, one per clique (after dropping
    /// non-positive-cost nodes).
    #[arg(long, value_delimiter = ',')]
    initial_dual: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1_000_000)]
    max_sweeps: u64,
    #[arg(long)]
    wall_seconds: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    target_gap: f64,
    #[arg(long, default_value_t = 1e-3)]
    primal_start_gap: f64,
    #[arg(long, default_value_t = 50)]
    primal_rounds: usize,
    #[arg(long, default_value_t = 1)]
    proposals_per_batch: usize,
    #[arg(long, default_value_t = 0.01)]
    initial_temperature: f64,
    #[arg(long, default_value_t = 50)]
    tau_batch: u64,
    #[arg(long, default_value_t = 0.5)]
    tau_drop: f64,
    #[arg(long, default_value_t = 0.01)]
    tau_feas: f64,
    #[arg(long, default_value_t = 0.5)]
    tau_gap: f64,
    #[arg(long, default_value_t = 1e-9)]
    temperature_floor: f64,
    /// JSON-lines trace, one record per batch.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    solution: Option<PathBuf>,
    /// Write zero wall times so repeated runs give identical traces.
    #[arg(long)]
    no_timing: bool,
    /// Run seeds `seed..seed+repeat` and report the spread.
    #[arg(long, default_value_t = 1)]
    repeat: u64,
}

impl SolveArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            mode: self.mode,
            scheduler: self.scheduler,
            truncation: self.truncation,
            schedule: ScheduleConfig {
                initial_temperature: self.initial_temperature,
                tau_batch: self.tau_batch,
                tau_drop: self.tau_drop,
                tau_feas: self.tau_feas,
                tau_gap: self.tau_gap,
                temperature_floor: self.temperature_floor,
            },
            tau_stab: self.tau_stab,
            seed: self.seed,
            initial_dual: self.initial_dual.clone(),
            max_sweeps: self.max_sweeps,
            wall_seconds: self.wall_seconds,
            target_gap: self.target_gap,
            primal_start_gap: self.primal_start_gap,
            primal_rounds: self.primal_rounds,
            proposals_per_batch: self.proposals_per_batch,
            record_timing: !self.no_timing,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    edge_density: f64,
    #[arg(long, default_value_t = 1.0)]
    cost_min: f64,
    #[arg(long, default_value_t = 10.0)]
    cost_max: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Sweeps to the target gap under both temperature schedulers.
    Schedulers {
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 0.005)]
        edge_density: f64,
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, default_value_t = 1e-2)]
        target_gap: f64,
        #[arg(long, default_value_t = 200_000)]
        sweep_cap: u64,
    },
    /// Heuristic incumbents driven by original versus reduced costs.
    Guidance {
        instance: PathBuf,
        #[arg(long, default_value_t = 50)]
        rounds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err {
                MwisError::Parse(_) => 2,
                MwisError::Inconsistency(_) => 3,
                _ => 1,
            })
        }
    }
}

fn run(command: Command) -> Result<ExitCode, MwisError> {
    match command {
        Command::Solve(args) => solve_command(&args),
        Command::Generate(args) => {
            let inst = random_instance(
                args.n,
                args.edge_density,
                (args.cost_min, args.cost_max),
                args.seed,
            );
            match args.output {
                Some(path) => write_instance(path, &inst)?,
                None => print!("{}", format_instance(&inst)),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { instance } => {
            let inst = read_instance(instance)?;
            let report = inst.validate();
            if report.is_valid() {
                println!(
                    "valid: {} nodes, {} cliques",
                    inst.node_count(),
                    inst.clique_count()
                );
                Ok(ExitCode::SUCCESS)
            } else {
                println!("{report}");
                Ok(ExitCode::from(1))
            }
        }
        Command::Brute { instance, solution } => {
            let inst = read_instance(instance)?;
            let best = brute_force_mwis(&inst)?;
            println!(
                "{}",
                json!({ "value": best.objective, "selected": best.selected })
            );
            if let Some(path) = solution {
                write_solution(path, best.objective, &best.selected)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench(BenchCommand::Schedulers {
            n,
            edge_density,
            seeds,
            target_gap,
            sweep_cap,
        }) => {
            let family = Family {
                n,
                edge_density,
                cost_range: (1.0, 10.0),
                seeds,
            };
            let report = scheduler_ablation(family, target_gap, sweep_cap)?;
            println!("{}", to_json(&report)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench(BenchCommand::Guidance {
            instance,
            rounds,
            seed,
        }) => {
            let inst = read_instance(instance)?;
            let report = guidance_ablation(&inst, rounds, seed)?;
            println!("{}", to_json(&report)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, MwisError> {
    serde_json::to_string(value).map_err(|e| MwisError::Io(e.into()))
}

fn solve_command(args: &SolveArgs) -> Result<ExitCode, MwisError> {
    let inst = read_instance(&args.instance)?;
    let base = args.config();
    let repeat = args.repeat.max(1);
    let mut duals = Vec::new();
    let mut integers = Vec::new();
    for k in 0..repeat {
        let cfg = RunConfig {
            seed: base.seed + k,
            ..base.clone()
        };
        let out = solve(&inst, &cfg)?;
        // With repeats, artifacts carry the seed as a suffix.
        let suffix = |p: &Path| {
            if repeat == 1 {
                p.to_path_buf()
            } else {
                with_suffix(p, cfg.seed)
            }
        };
        if let Some(path) = &args.trace {
            let mut w = BufWriter::new(File::create(suffix(path))?);
            for record in &out.trace {
                writeln!(w, "{}", to_json(record)?)?;
            }
            w.flush()?;
        }
        if let Some(path) = &args.solution {
            write_solution(suffix(path), out.solution.objective, &out.solution.selected)?;
        }
        println!(
            "{}",
            json!({
                "seed": cfg.seed,
                "status": out.status,
                "dual_bound": out.dual_bound,
                "primal_lp_bound": out.primal_lp_bound,
                "relative_gap": out.relative_gap,
                "integer_objective": out.solution.objective,
                "sweeps": out.sweeps,
            })
        );
        duals.push(out.dual_bound);
        integers.push(out.solution.objective);
    }
    if repeat > 1 {
        let spread = |v: &[f64]| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            json!({ "min": lo, "max": hi })
        };
        println!(
            "{}",
            json!({ "runs": repeat, "dual_bound": spread(&duals), "integer_objective": spread(&integers) })
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn with_suffix(path: &Path, seed: u64) -> PathBuf {
    let mut name = path.file_stem().unwrap_or_default().to_os_string();
    name.push(format!(".seed{seed}"));
    if let Some(ext) = path.extension() {
        name.push(".");
        name.push(ext);
    }
    path.with_file_name(name)
}
