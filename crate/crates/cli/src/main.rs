use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use epimit_cli::system_file::parse_system;
use epimit_cli::{run_config_file, RunError};
use epimit_core::dsir::{check_stability, gershgorin_margin, sigma_hat, DEFAULT_TOL, DEFAULT_T_MAX};
use epimit_core::graph::{build_hardness_instance, gen_er, gen_sbm, load_edge_list, write_edge_list};
use epimit_core::gsir::estimate_infections;
use epimit_core::{EdgeSet, Graph};

#[derive(Parser)]
#[command(name = "epimit", version, about = "Budgeted edge deletion against SIR epidemics")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, env = "EPIMIT_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write the result table as CSV.
    Run {
        config: PathBuf,
        /// Output file, `-` for stdout.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a random contact network as an edge list.
    #[command(subcommand)]
    Gen(Gen),
    /// Report the certified stability margin of a D-SIR system file.
    CheckStability { system: PathBuf },
    /// Evaluate a deletion set on a D-SIR system file under D-SIR and G-SIR.
    Simulate {
        system: PathBuf,
        /// Comma-separated edge ids to delete.
        #[arg(long, value_delimiter = ',')]
        delete: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build the bisection reduction instance from a 3-regular edge list.
    ReduceHardness {
        edgelist: PathBuf,
        /// Bisection size of the input graph.
        #[arg(long)]
        b: usize,
        /// Write the constructed graph here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated bisection side; checks the completeness deletion.
        #[arg(long, value_delimiter = ',')]
        side: Vec<usize>,
    },
}

#[derive(Subcommand)]
enum Gen {
    /// Erdős–Rényi G(n, p).
    Er {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Block model with one probability inside blocks and one across.
    Sbm {
        #[arg(long)]
        block_size: usize,
        #[arg(long)]
        kappa: usize,
        #[arg(long)]
        q_in: f64,
        #[arg(long)]
        q_out: f64,
        #[command(flatten)]
        common: GenCommon,
    },
}

#[derive(Args)]
struct GenCommon {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file, `-` for stdout.
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

fn config_error(msg: impl Into<String>) -> RunError {
    RunError::Config(vec![epimit_cli::ConfigIssue::new("input", msg)])
}

fn runtime(msg: impl ToString) -> RunError {
    RunError::Runtime(msg.to_string())
}

fn write_out(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    if path == Path::new("-") {
        io::stdout().write_all(bytes).map_err(runtime)
    } else {
        fs::write(path, bytes).map_err(|e| runtime(format!("{}: {e}", path.display())))
    }
}

fn write_graph(g: &Graph, path: &Path) -> Result<(), RunError> {
    let mut buf = Vec::new();
    write_edge_list(g, None, &mut buf).map_err(runtime)?;
    write_out(path, &buf)
}

fn read(path: &Path) -> Result<String, RunError> {
    fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

fn execute(command: Command) -> Result<(), RunError> {
    match command {
        Command::Run { config, out } => {
            let (rows, csv) = run_config_file(&config)?;
            write_out(&out, &csv)?;
            let failed: Vec<_> = rows.iter().filter(|r| r.failed()).collect();
            for r in &failed {
                eprintln!(
                    "{} k={} {}: {}",
                    r.algorithm,
                    r.k,
                    r.metric,
                    r.value.as_ref().unwrap_err()
                );
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(runtime(format!("{} of {} rows failed", failed.len(), rows.len())))
            }
        }
        Command::Gen(Gen::Er { n, p, common }) => {
            let g = gen_er(n, p, common.seed).map_err(|e| config_error(e.to_string()))?;
            write_graph(&g, &common.out)
        }
        Command::Gen(Gen::Sbm {
            block_size,
            kappa,
            q_in,
            q_out,
            common,
        }) => {
            let q: Vec<Vec<f64>> = (0..kappa)
                .map(|a| (0..kappa).map(|b| if a == b { q_in } else { q_out }).collect())
                .collect();
            let g = gen_sbm(block_size, kappa, &q, common.seed).map_err(|e| config_error(e.to_string()))?;
            write_graph(&g, &common.out)
        }
        Command::CheckStability { system } => {
            let loaded = parse_system(&read(&system)?).map_err(config_error)?;
            let sys = &loaded.system;
            let (margin, node) = gershgorin_margin(sys);
            match check_stability(sys) {
                Ok(eps) => println!("certified: margin {eps} (tightest row {node})"),
                Err(_) => println!("not certified: margin {margin} at node {node}"),
            }
            match sigma_hat(sys, &EdgeSet::new()) {
                Ok(v) => println!("sigma_hat {v}"),
                Err(e) => println!("sigma_hat unavailable: {e}"),
            }
            check_stability(sys).map(|_| ()).map_err(runtime)
        }
        Command::Simulate {
            system,
            delete,
            reps,
            seed,
        } => {
            let loaded = parse_system(&read(&system)?).map_err(config_error)?;
            let sys = &loaded.system;
            let p: EdgeSet = delete.into_iter().collect();
            sys.graph().mask(&p).map_err(|e| config_error(e.to_string()))?;
            let sigma = sys.simulate_sigma(&p, DEFAULT_TOL, DEFAULT_T_MAX).map_err(runtime)?;
            println!("dsir-sigma {sigma}");
            match sigma_hat(sys, &p) {
                Ok(v) => println!("dsir-sigma-hat {v}"),
                Err(e) => println!("dsir-sigma-hat unavailable: {e}"),
            }
            let params = loaded.gsir().map_err(config_error)?;
            let est = estimate_infections(&params, &p, reps, seed).map_err(runtime)?;
            println!("gsir-estimate {} +- {}", est.mean, est.half_width);
            Ok(())
        }
        Command::ReduceHardness { edgelist, b, out, side } => {
            let list = load_edge_list(&edgelist).map_err(|e| config_error(e.to_string()))?;
            let inst = build_hardness_instance(&list.graph, b).map_err(|e| config_error(e.to_string()))?;
            println!("seeds {:?}", inst.seeds);
            println!("budget {}", inst.budget);
            println!("threshold {}", inst.threshold);
            if let Some(path) = out {
                write_graph(&inst.graph, &path)?;
            }
            if !side.is_empty() {
                let p = inst.completeness_deletion(&side).map_err(|e| config_error(e.to_string()))?;
                let reached = inst.reachable_after(&p).map_err(runtime)?;
                println!("deleted {} reachable {reached}", p.len());
                if p.len() > inst.budget || reached > inst.threshold {
                    return Err(runtime("completeness deletion misses the budget or threshold"));
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
