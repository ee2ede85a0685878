use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use taskweave::harness::{
    env_checksum, generate_task, run_benchmark, run_episode, BenchmarkConfig, PlannerKind,
};
use taskweave::likelihood::FrequencyModel;
use taskweave::planner::PlannerConfig;
use taskweave::scltl::{Dfa, Formula};
use taskweave::world::{generate, Catalog, Environment, SizeClass};

#[derive(Parser)]
#[command(name = "taskweave", about = "Multi-robot temporal-logic task planning testbed")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a procedural home and write it as JSON.
    GenEnv {
        /// Generation seed; defaults to $TASKWEAVE_SEED or 0.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "medium")]
        size: SizeClass,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit object-location frequencies from a directory of environment files.
    TrainModel {
        #[arg(long)]
        envs_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one episode and write its trace.
    Run {
        #[arg(long)]
        env: PathBuf,
        /// Task string; omit to sample one from the home.
        #[arg(long)]
        task: Option<String>,
        #[arg(long, default_value = "mr-pouct")]
        planner: PlannerKind,
        #[arg(long, default_value_t = 2)]
        robots: usize,
        /// Episode seed; defaults to $TASKWEAVE_SEED or 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Trained likelihood model; omitted means uniform priors.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 2_000)]
        samples: usize,
        #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
        c: f64,
        #[arg(long, default_value_t = 30)]
        depth: usize,
        /// Replan budget; defaults to 10 × containers.
        #[arg(long)]
        budget: Option<usize>,
        /// Where to write the trace file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a benchmark campaign from a JSON config.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Compile a task formula and describe its automaton.
    Dfa {
        #[arg(long)]
        formula: String,
        /// Write the automaton as Graphviz dot.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
}

fn default_seed() -> u64 {
    std::env::var("TASKWEAVE_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0)
}

fn load_env(path: &Path) -> Result<Arc<Environment>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading environment {}", path.display()))?;
    Ok(Arc::new(Environment::load(&text)?))
}

fn load_model(path: Option<&Path>) -> Result<FrequencyModel> {
    match path {
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("reading model {}", p.display()))?;
            Ok(FrequencyModel::load(&text)?)
        }
        None => Ok(FrequencyModel::new(
            FrequencyModel::DEFAULT_ALPHA,
            FrequencyModel::DEFAULT_EPSILON,
        )),
    }
}

fn main() -> Result<()> {
    // Die quietly on a closed pipe (`taskweave dfa | head`) instead of
    // panicking; Rust installs SIG_IGN for SIGPIPE before main.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match Cli::parse().command {
        Command::GenEnv { seed, size, out } => {
            let seed = seed.unwrap_or_else(default_seed);
            let catalog = Catalog::bundled();
            let env = generate(seed, size, &catalog)?;
            fs::write(&out, env.save())
                .with_context(|| format!("writing {}", out.display()))?;
            println!(
                "wrote {} ({} containers, {} m², checksum {})",
                out.display(),
                env.containers().len(),
                env.map().area_m2(),
                env_checksum(&env)
            );
        }
        Command::TrainModel { envs_dir, out } => {
            let mut envs = Vec::new();
            let mut entries: Vec<PathBuf> = fs::read_dir(&envs_dir)
                .with_context(|| format!("listing {}", envs_dir.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            entries.sort();
            for path in &entries {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                envs.push(Environment::load(&text)?);
            }
            if envs.is_empty() {
                bail!("no .json environments under {}", envs_dir.display());
            }
            let model = FrequencyModel::train(&envs);
            fs::write(&out, model.save())
                .with_context(|| format!("writing {}", out.display()))?;
            println!("trained on {} homes → {}", envs.len(), out.display());
        }
        Command::Run {
            env,
            task,
            planner,
            robots,
            seed,
            model,
            samples,
            c,
            depth,
            budget,
            out,
        } => {
            let seed = seed.unwrap_or_else(default_seed);
            let env = load_env(&env)?;
            let model = load_model(model.as_deref())?;
            let task = match task {
                Some(t) => t,
                None => generate_task(&env, seed)?,
            };
            let config = PlannerConfig { samples, c, depth, seed };
            let result = run_episode(&env, &task, planner, robots, &model, &config, budget)?;
            let trace = result.render_trace(&task);
            match &out {
                Some(path) => {
                    fs::write(path, &trace)
                        .with_context(|| format!("writing {}", path.display()))?;
                    println!(
                        "{}: {} makespan={:.6} distance={:.6} → {}",
                        planner,
                        result.outcome,
                        result.makespan,
                        result.total_distance(),
                        path.display()
                    );
                }
                None => print!("{trace}"),
            }
        }
        Command::Bench { config, out_dir } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading config {}", config.display()))?;
            let config: BenchmarkConfig = serde_json::from_str(&text)?;
            let model = load_model(config.model.as_deref().map(Path::new))?;
            let catalog = Catalog::bundled();
            fs::create_dir_all(&out_dir)?;
            let mut print_row = |row: &taskweave::harness::TrialRow| {
                println!(
                    "{} {} robots={} trial={} time={:.2} [{}]",
                    row.planner, row.size, row.robots, row.trial, row.time, row.outcome
                );
            };
            let report = run_benchmark(&config, &model, &catalog, Some(&mut print_row))?;
            fs::write(out_dir.join("trials.csv"), report.trials_csv())?;
            fs::write(out_dir.join("aggregate.csv"), report.aggregate_csv())?;
            fs::write(out_dir.join("aggregate.txt"), report.aggregate_table())?;
            print!("{}", report.aggregate_table());
            for failure in &report.failures {
                eprintln!("failed: {failure}");
            }
            println!("wrote {}", out_dir.join("trials.csv").display());
        }
        Command::Dfa { formula, dot } => {
            let parsed = Formula::parse(&formula)?;
            let alphabet: Vec<_> = parsed.atoms().into_iter().collect();
            let dfa = Dfa::compile(&parsed, &alphabet)?;
            // Write the file before the listing so it survives a closed pipe.
            if let Some(path) = &dot {
                fs::write(path, dfa.to_dot())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            println!(
                "{} states ({} accepting, sink {}), alphabet {}",
                dfa.num_states(),
                (0..dfa.num_states()).filter(|&s| dfa.is_accepting(s)).count(),
                match dfa.sink() {
                    Some(s) => format!("state {s}"),
                    None => "none".into(),
                },
                dfa.alphabet()
                    .iter()
                    .map(|w| w.as_str())
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            for state in 0..dfa.num_states() {
                let words = dfa.relevant_words(state);
                println!(
                    "Z{state}{}: W = {{{}}}",
                    if dfa.is_accepting(state) {
                        " (accepting)"
                    } else if dfa.is_sink(state) {
                        " (sink)"
                    } else {
                        ""
                    },
                    words.iter().map(|w| w.as_str()).collect::<Vec<_>>().join(", ")
                );
            }
            if let Some(path) = dot {
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}
