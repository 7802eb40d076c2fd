mod commands;
mod output;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use output::{input_digest, RunManifest, Writer};
use scenario::{resolve, Loaded, Scenario};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Model(#[from] hqp::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) | CliError::Model(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "hqp", version, about = "Hyperbolic resonator couplings and two-qubit gate simulation")]
struct Cli {
    /// Scenario file (TOML). Without it every command runs on the defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Prefix prepended to every output file name; overrides output.prefix.
    #[arg(long, global = true)]
    out_prefix: Option<String>,
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Recorded in the manifest; no command is stochastic yet.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Parse and check the scenario, print its digest, write nothing.
    #[arg(long, global = true)]
    validate: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Permittivity tensor over sweep.omega.
    Permittivity,
    /// Hyperbolic bands of the material.
    Bands,
    /// |E|² of a point dipole on a (ρ, z) grid.
    Fieldmap,
    /// Focal spacing and widths in a cylinder of radius geometry.radius.
    Foci,
    /// Coupling magnitude over (ω, d/R) plus the super-resonance locus.
    Resonance,
    /// Exchange and decay along the super-resonance as the radius varies.
    CouplingSweep,
    /// Loss length, critical spacer and the feasibility verdict.
    DesignWindow,
    /// Density-matrix trajectory for evolve.segments.
    Evolve,
    /// iSWAP fidelity; exit status 3 if below gate.threshold.
    Gate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Permittivity => "permittivity",
            Command::Bands => "bands",
            Command::Fieldmap => "fieldmap",
            Command::Foci => "foci",
            Command::Resonance => "resonance",
            Command::CouplingSweep => "coupling-sweep",
            Command::DesignWindow => "design-window",
            Command::Evolve => "evolve",
            Command::Gate => "gate",
        }
    }

    fn run(self, l: &Loaded, w: &mut Writer) -> Result<commands::Status, CliError> {
        match self {
            Command::Permittivity => commands::permittivity(l, w),
            Command::Bands => commands::bands(l, w),
            Command::Fieldmap => commands::fieldmap(l, w),
            Command::Foci => commands::foci(l, w),
            Command::Resonance => commands::resonance(l, w),
            Command::CouplingSweep => commands::coupling_sweep(l, w),
            Command::DesignWindow => commands::design_window_cmd(l, w),
            Command::Evolve => commands::evolve_cmd(l, w),
            Command::Gate => commands::gate(l, w),
        }
    }
}

fn run(cli: Cli) -> Result<commands::Status, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let loaded = Scenario::load(cli.config.as_deref())?;
    let name = cli.command.name();
    let resolved = serde_json::to_string(&loaded.scenario).map_err(|e| CliError::Io(e.to_string()))?;
    let digest = input_digest(name, &resolved, &loaded.sources);
    if cli.validate {
        if matches!(cli.command, Command::DesignWindow | Command::Evolve | Command::Gate) {
            commands::build_couplings(&loaded, &loaded.scenario.qubits_or_default())?;
            resolve(&loaded.scenario, &loaded.model)?;
        }
        println!("scenario ok ({name}), input digest {digest}");
        return Ok(0);
    }
    let prefix = cli.out_prefix.or_else(|| loaded.scenario.output.prefix.clone()).unwrap_or_default();
    let manifest = RunManifest {
        tool: "hqp".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: name.into(),
        input_digest: digest,
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        seed: cli.seed,
        threads: cli.threads,
        outputs: Vec::new(),
    };
    let mut w = Writer::new(prefix, manifest)?;
    let status = cli.command.run(&loaded, &mut w)?;
    w.finish()?;
    Ok(status)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("hqp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
