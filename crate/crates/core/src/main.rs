use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fairmac::cli::{self, Baseline};
use fairmac::{Error, Mode, Scenario};

#[derive(Parser)]
#[command(
    name = "fairmac",
    version,
    about = "Cooperative slotted-CSMA throughput/bit-cost analysis and simulation"
)]
struct Opts {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file describing the network and default parameters.
    #[arg(long)]
    scenario: PathBuf,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Slot {
    /// Slot length, normalised per one-bit packet.
    #[arg(long)]
    sigma: Option<f64>,
    /// Per-slot transmit probability.
    #[arg(long)]
    tau: Option<f64>,
    /// Use tau = COEFF * sqrt(sigma) instead of --tau.
    #[arg(long = "tau-coeff", value_name = "COEFF")]
    tau_coeff: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Direct,
    Coopmac,
    Fairmac,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineArg {
    RrDirect,
    CsmaDirect,
    None,
}

#[derive(Subcommand)]
enum Command {
    /// Helper classification and closed-form operating points.
    Analytic {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        slot: Slot,
    },
    /// Monte Carlo simulation of one protocol.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        slot: Slot,
        #[arg(long, value_enum)]
        protocol: ProtocolArg,
        /// Contention phases (successes and collisions) per run.
        #[arg(long)]
        phases: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// fairMAC pending-packet limit P (a count or `inf`).
        #[arg(long, value_parser = cli::parse_limit)]
        pending: Option<usize>,
        /// fairMAC forwarding limit Q (a count or `inf`).
        #[arg(long = "forward-max", value_parser = cli::parse_limit)]
        forward_max: Option<usize>,
        /// Independent runs with seeds seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        replicates: u64,
        #[arg(long, value_enum, default_value = "none")]
        baseline: BaselineArg,
    },
    /// Timesharing curve between CoopMAC (alpha = 1) and Direct Link (alpha = 0).
    Curve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        slot: Slot,
        #[arg(long = "alpha-steps", default_value_t = 13)]
        alpha_steps: usize,
    },
    /// CSMA operating points along tau = COEFF * sqrt(sigma) and their limit.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long = "tau-coeff", value_name = "COEFF")]
        tau_coeff: f64,
        /// Slot lengths to evaluate; defaults to 1e-2 down to 1e-8.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        sigma: Vec<f64>,
    },
    /// Checks closed-form phase expectations against exhaustive enumeration.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        slot: Slot,
    },
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn load(common: &Common) -> Result<Scenario, Failure> {
    let text = std::fs::read_to_string(&common.scenario)
        .map_err(|e| Failure::Validation(format!("{}: {e}", common.scenario.display())))?;
    Scenario::parse(&text)
        .map_err(|e| Failure::Validation(format!("{}: {e}", common.scenario.display())))
}

fn emit(common: &Common, csv: &str) -> Result<(), Failure> {
    match &common.out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Analytic { common, slot } => {
            let s = load(&common)?;
            let params = cli::resolve_params(&s, slot.sigma, slot.tau, slot.tau_coeff)?;
            emit(&common, &cli::cmd_analytic(&s, params)?)
        }
        Command::Simulate {
            common,
            slot,
            protocol,
            phases,
            seed,
            pending,
            forward_max,
            replicates,
            baseline,
        } => {
            let s = load(&common)?;
            let params = cli::resolve_params(&s, slot.sigma, slot.tau, slot.tau_coeff)?;
            let protocol = match protocol {
                ProtocolArg::Direct => "direct",
                ProtocolArg::Coopmac => "coopmac",
                ProtocolArg::Fairmac => "fairmac",
            };
            let baseline = match baseline {
                BaselineArg::RrDirect => Baseline::RoundRobinDirect,
                BaselineArg::CsmaDirect => Baseline::CsmaDirect,
                BaselineArg::None => Baseline::None,
            };
            let args = cli::resolve_simulate(
                &s,
                protocol,
                params,
                pending,
                forward_max,
                phases,
                seed,
                replicates,
                baseline,
            )?;
            emit(&common, &cli::cmd_simulate(&s, &args)?)
        }
        Command::Curve {
            common,
            slot,
            alpha_steps,
        } => {
            let s = load(&common)?;
            let params = cli::resolve_params(&s, slot.sigma, slot.tau, slot.tau_coeff)?;
            let csv = cli::cmd_curve(&s, Mode::Cooperative, Mode::Direct, params, alpha_steps)?;
            emit(&common, &csv)
        }
        Command::Converge {
            common,
            tau_coeff,
            sigma,
        } => {
            let s = load(&common)?;
            let sigmas = if sigma.is_empty() {
                (2..=8).map(|e| 10f64.powi(-e)).collect()
            } else {
                sigma
            };
            emit(&common, &cli::cmd_converge(&s, tau_coeff, &sigmas)?)
        }
        Command::Verify { common, slot } => {
            let s = load(&common)?;
            let params = cli::resolve_params(&s, slot.sigma, slot.tau, slot.tau_coeff)?;
            let (csv, ok) = cli::cmd_verify(&s, params)?;
            emit(&common, &csv)?;
            if ok {
                Ok(())
            } else {
                Err(Failure::Runtime(
                    "closed form and enumeration disagree".into(),
                ))
            }
        }
    }
}

fn main() -> ExitCode {
    let opts = Opts::parse();
    match execute(opts.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
