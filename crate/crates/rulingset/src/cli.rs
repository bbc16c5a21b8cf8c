use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::Settings;
use crate::error::{CliError, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "rulingset", version, about = "Self-stabilizing ruling sets, colorings and LOCAL simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the ruling-set protocol until it is legitimate.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
        /// Scramble m nodes at a step, as `step:m`; repeatable.
        #[arg(long)]
        inject: Vec<String>,
        /// Independent runs with seeds seed, seed+1, ...
        #[arg(long)]
        runs: Option<u64>,
        /// Worker threads for multiple runs.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Check a configuration file for legitimacy (exit 0 iff legitimate).
    Check {
        #[command(flatten)]
        common: Common,
        /// Configuration JSON.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Exhaustively verify closure and convergence on a tiny instance.
    Modelcheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<u32>,
        /// Largest number of configurations to enumerate.
        #[arg(long)]
        budget: Option<u64>,
        /// closure, reachability or both.
        #[arg(long)]
        check: Option<String>,
        /// Reachability starts: all, or sample:m:seed.
        #[arg(long)]
        from: Option<String>,
        /// Write a counterexample trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Layered distance-K coloring.
    Color {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
        /// Number of layers; defaults to min(max_degree^k, layer cap).
        #[arg(long)]
        layers: Option<usize>,
        #[arg(long)]
        layer_cap: Option<usize>,
        /// Target distance K (below k, default k-1).
        #[arg(long = "K", alias = "big-k")]
        big_k: Option<usize>,
    },
    /// Solve a problem with the coloring, ball-map and evaluation stages.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
        /// mis or coloring.
        #[arg(long)]
        problem: Option<String>,
        #[arg(long)]
        layer_cap: Option<usize>,
    },
    /// Print a generated graph.
    Generate {
        #[command(flatten)]
        common: Common,
        /// edges or json.
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-execute a simulate trace and check every hash.
    Replay {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// key = value settings file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Edge-list or JSON graph file.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Generator: path, cycle, grid or random.
    #[arg(long)]
    pub gen: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long)]
    pub max_degree: Option<usize>,
    #[arg(long)]
    pub graph_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub k: Option<u32>,
    /// synchronous, central-random, subset-random, round-robin or scripted.
    #[arg(long)]
    pub daemon: Option<String>,
    /// Selection probability of subset-random.
    #[arg(long)]
    pub p: Option<f64>,
    /// Scripted selections, e.g. "0 1;2;3".
    #[arg(long)]
    pub script: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// random, uniform, or a configuration JSON file.
    #[arg(long)]
    pub init: Option<String>,
    /// JSONL trace output.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Result file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn put<T: ToString>(s: &mut Settings, key: &str, v: &Option<T>) {
    if let Some(v) = v {
        s.set(key, v.to_string());
    }
}

fn put_path(s: &mut Settings, key: &str, v: &Option<PathBuf>) {
    if let Some(v) = v {
        s.set(key, v.display());
    }
}

impl Common {
    fn settings(&self) -> Result<Settings, CliError> {
        let mut s = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::new(),
        };
        put_path(&mut s, "graph", &self.graph);
        put(&mut s, "gen", &self.gen);
        put(&mut s, "n", &self.n);
        put(&mut s, "rows", &self.rows);
        put(&mut s, "cols", &self.cols);
        put(&mut s, "max_degree", &self.max_degree);
        put(&mut s, "graph_seed", &self.graph_seed);
        Ok(s)
    }
}

impl RunArgs {
    fn apply(&self, s: &mut Settings) {
        put(s, "k", &self.k);
        put(s, "daemon", &self.daemon);
        put(s, "p", &self.p);
        put(s, "script", &self.script);
        put(s, "seed", &self.seed);
        put(s, "max_steps", &self.max_steps);
        put(s, "init", &self.init);
        put_path(s, "trace", &self.trace);
        put_path(s, "out", &self.out);
    }
}

pub fn dispatch(command: &Command, out: &mut dyn Write) -> Result<u8, CliError> {
    match command {
        Command::Simulate { common, run, inject, runs, jobs } => {
            let mut s = common.settings()?;
            run.apply(&mut s);
            if !inject.is_empty() {
                s.set("inject", inject.join(","));
            }
            put(&mut s, "runs", runs);
            put(&mut s, "jobs", jobs);
            commands::simulate(&s, out)
        }
        Command::Check { common, state } => {
            let mut s = common.settings()?;
            put_path(&mut s, "state", state);
            commands::check(&s, out)
        }
        Command::Modelcheck { common, k, budget, check, from, trace } => {
            let mut s = common.settings()?;
            put(&mut s, "k", k);
            put(&mut s, "budget", budget);
            put(&mut s, "check", check);
            put(&mut s, "from", from);
            put_path(&mut s, "trace", trace);
            commands::modelcheck(&s, out)
        }
        Command::Color { common, run, layers, layer_cap, big_k } => {
            let mut s = common.settings()?;
            run.apply(&mut s);
            put(&mut s, "layers", layers);
            put(&mut s, "layer_cap", layer_cap);
            put(&mut s, "big_k", big_k);
            commands::color(&s, out)
        }
        Command::Solve { common, run, problem, layer_cap } => {
            let mut s = common.settings()?;
            run.apply(&mut s);
            put(&mut s, "problem", problem);
            put(&mut s, "layer_cap", layer_cap);
            commands::solve(&s, out)
        }
        Command::Generate { common, format, out: path } => {
            let mut s = common.settings()?;
            put(&mut s, "format", format);
            put_path(&mut s, "out", path);
            commands::generate(&s, out)
        }
        Command::Replay { common, trace } => {
            let mut s = common.settings()?;
            put_path(&mut s, "trace", trace);
            commands::replay(&s, out)
        }
    }
}

/// Parses arguments, runs the command and returns the exit code. Errors go
/// to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
