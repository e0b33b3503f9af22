mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::CliError;

#[derive(Parser, Debug)]
#[command(name = "paulipriv", version, about = "Private algebras of Pauli channels")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags accepted by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Tolerance override for the verdict being computed.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Leave the timestamp out of JSON output.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// Where to write the primary artifact.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pauli subgroup operations.
    Group {
        #[command(subcommand)]
        op: GroupOp,
    },
    /// Build, apply and compare channels.
    Channel {
        #[command(subcommand)]
        op: ChannelOp,
    },
    /// Quasiorthogonality and privacy certificates.
    Privacy {
        #[command(subcommand)]
        op: PrivacyOp,
    },
    /// Reproduce the worked examples.
    Demo {
        #[command(subcommand)]
        op: DemoOp,
    },
}

/// A subgroup given inline or by file.
#[derive(Args, Debug, Clone)]
pub struct GroupInput {
    /// Comma-separated generators, e.g. "ZI,IZ" or "X1Z0:X0Z1".
    #[arg(long)]
    pub gens: Option<String>,
    /// Subgroup file.
    #[arg(long = "in", conflicts_with = "gens")]
    pub input: Option<PathBuf>,
    /// Qudit dimension.
    #[arg(long, default_value_t = 2)]
    pub d: u32,
    /// Number of qudits (inferred from the generators when omitted).
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum GroupOp {
    /// Close a generator list into a subgroup.
    Close(GroupInput),
    /// Whether the subgroup is Abelian (exit 1 if not).
    Abelian(GroupInput),
    /// All classes commuting with the subgroup.
    Annihilator(GroupInput),
    /// Extend an Abelian subgroup to a maximal one.
    Extend(GroupInput),
    /// Commutation character matrix as CSV.
    Charmatrix {
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum ChannelOp {
    /// Uniform Pauli channel over an Abelian subgroup.
    FromGroup(GroupInput),
    /// Trace-preserving conditional expectation onto an algebra.
    Condexp {
        /// delta<N>, scalars, full, a Pauli list, or @algebra.json.
        #[arg(long)]
        algebra: String,
        #[arg(long, default_value_t = 2)]
        d: u32,
        /// Qudits, for scalars and full.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Apply a channel file to a state file.
    Apply {
        /// Channel JSON.
        #[arg(long = "in")]
        input: PathBuf,
        /// Operator JSON.
        #[arg(long)]
        state: PathBuf,
    },
    /// Compare two channels through their Choi matrices (exit 1 if different).
    ChoiEqual {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        other: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum PrivacyOp {
    /// Whether two algebras are quasiorthogonal (exit 1 if not).
    Quasiorth {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Certify that a channel privatizes an algebra (exit 1 on a false verdict).
    Certify {
        /// Abelian generators defining the channel.
        #[arg(long, conflicts_with = "channel")]
        group: Option<String>,
        /// Channel JSON, or "identity".
        #[arg(long)]
        channel: Option<String>,
        /// Build the private algebra from the group instead of taking --b.
        #[arg(long, requires = "group", conflicts_with = "b")]
        construct: bool,
        /// Target algebra.
        #[arg(long)]
        b: Option<String>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Certify a private subsystem `V(C^{dA} ⊗ C^{dB})`.
    Subsystem {
        #[arg(long, conflicts_with = "channel")]
        group: Option<String>,
        #[arg(long)]
        channel: Option<String>,
        /// Square operator JSON; its first dA·dB columns are the embedding.
        #[arg(long)]
        v: PathBuf,
        #[arg(long)]
        dim_a: usize,
        #[arg(long)]
        dim_b: usize,
        /// State on A (defaults to I/dA).
        #[arg(long)]
        sigma: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum DemoOp {
    /// Two-qubit phase-flip channel on random states.
    Phaseflip {
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Two-qutrit private qutrit.
    Qutrit {
        /// Use the wrong phase in the first conjugation identity.
        #[arg(long)]
        perturb: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Group { op } => commands::group(op, &cli.common),
        Command::Channel { op } => commands::channel(op, &cli.common),
        Command::Privacy { op } => commands::privacy(op, &cli.common),
        Command::Demo { op } => commands::demo(op, &cli.common),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl CliError {
    /// 2 for unreadable input, 3 for input that parses but breaks a precondition.
    fn exit_code(&self) -> u8 {
        use paulipriv_core::Error as E;
        match self {
            CliError::Io(..) | CliError::Json(..) | CliError::Usage(_) => 2,
            CliError::Core(E::Parse(_)) => 2,
            CliError::Core(_) => 3,
        }
    }
}
