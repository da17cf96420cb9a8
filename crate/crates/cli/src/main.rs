use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use toric_calabi_cli::commands::{fit_decay_command, presets_command, run_command, verify_command};
use toric_calabi_cli::{Exit, Failure, RunOptions, Scenario};

/// Calabi flow on toric polytopes with functional and estimate audits.
#[derive(Parser)]
#[command(name = "calabi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Integrate a scenario and write series, snapshots and audit reports.
    Run(RunArgs),
    /// Replay the estimates suite on stored snapshot files or run directories.
    Verify {
        #[arg(required = true)]
        snapshots: Vec<PathBuf>,
    },
    /// Fit exponential decay to the Calabi energy column of a CSV series.
    FitDecay { series: PathBuf },
    /// List the preset polytopes.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file of `key = value` lines; flags override it.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    name: Option<String>,
    #[arg(long, conflicts_with = "polytope_file")]
    preset: Option<String>,
    /// Facet file: one `n_1 ... n_n c` line per facet.
    #[arg(long)]
    polytope_file: Option<PathBuf>,
    /// Initial perturbation: none, bump or quadratic.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    amplitude: Option<String>,
    /// Grid spacing, decimal or `p/q`.
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    t_end: Option<String>,
    #[arg(long)]
    snapshot_every: Option<String>,
    #[arg(long)]
    cfl: Option<String>,
    /// Seed of the Sobolev probe family.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    no_audits: bool,
    /// Single-threaded, no wall-clock fields: byte-identical artifacts.
    #[arg(long)]
    deterministic: bool,
    #[arg(long, default_value = "calabi-out")]
    out_dir: PathBuf,
}

impl RunArgs {
    fn scenario(&self) -> Result<Scenario, String> {
        let mut s = match &self.scenario {
            Some(path) => Scenario::load(path)?,
            None => Scenario::default(),
        };
        let here = Path::new(".");
        let flags = [
            ("name", self.name.as_deref()),
            ("preset", self.preset.as_deref()),
            ("profile", self.profile.as_deref()),
            ("amplitude", self.amplitude.as_deref()),
            ("h", self.h.as_deref()),
            ("t_end", self.t_end.as_deref()),
            ("snapshot_every", self.snapshot_every.as_deref()),
            ("cfl", self.cfl.as_deref()),
            ("seed", self.seed.as_deref()),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                s.set(key, v, here)
                    .map_err(|e| format!("--{}: {e}", key.replace('_', "-")))?;
            }
        }
        if let Some(p) = &self.polytope_file {
            s.set("polytope_file", &p.to_string_lossy(), here)?;
        }
        if self.no_audits {
            s.flow.audits = false;
        }
        Ok(s)
    }
}

fn dispatch(cli: Cli, out: &mut impl Write) -> Result<Exit, Failure> {
    match cli.command {
        Command::Run(args) => {
            if args.deterministic {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(1)
                    .build_global()
                    .map_err(|e| Failure::config(e.to_string()))?;
            }
            let scenario = args.scenario().map_err(Failure::config)?;
            let opts = RunOptions {
                out_dir: args.out_dir,
                deterministic: args.deterministic,
            };
            run_command(&scenario, &opts, out)
        }
        Command::Verify { snapshots } => verify_command(&snapshots, out),
        Command::FitDecay { series } => fit_decay_command(&series, out),
        Command::Presets => presets_command(out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                Exit::Config as u8
            } else {
                0
            });
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = match dispatch(cli, &mut out) {
        Ok(exit) => exit,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.exit
        }
    };
    let _ = out.flush();
    ExitCode::from(code as u8)
}
