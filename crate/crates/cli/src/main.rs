//! `graad`: key ceremony, membership management, protocol runs with fault
//! injection, tracing, ASR experiments and primitive benchmarks.
//!
//! Exit codes: 0 accepted / ok, 1 protocol or verification failure,
//! 2 usage error, 3 unreadable or inconsistent workspace.

mod commands;
mod workspace;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "graad", version, about = "Group-anonymous D2D key exchange toolkit")]
struct Cli {
    /// Workspace directory.
    #[arg(long, global = true, env = "GRAAD_WORKSPACE", default_value = "graad-ws")]
    workspace: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Security {
    Toy,
    Standard,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RunMode {
    Cn,
    Na,
}

#[derive(Subcommand)]
enum Command {
    /// Create the authorities, an empty directory and an empty CRL.
    Init {
        #[arg(long, value_enum, default_value = "toy")]
        security: Security,
        /// Number of groups.
        #[arg(long, short)]
        m: usize,
        /// Number of chunks; must divide m.
        #[arg(long, short)]
        w: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated group names (default group-0, group-1, ...).
        #[arg(long, value_delimiter = ',')]
        groups: Option<Vec<String>>,
        #[arg(long)]
        force: bool,
    },
    /// Enrol a device in a group.
    Register {
        name: String,
        #[arg(long, short)]
        group: String,
    },
    /// Revoke a device: list it on the CRL and drop it from the directory.
    Revoke { name: String },
    /// Print the directory.
    Directory,
    /// Run one session between two registered devices.
    Run {
        #[arg(value_enum)]
        mode: RunMode,
        ue_a: String,
        ue_b: String,
        /// Flip a byte of a message: stepN[.k]:byteK[:maskXX].
        #[arg(long)]
        tamper: Vec<String>,
        /// Drop a message: stepN[.k].
        #[arg(long)]
        drop: Vec<String>,
        /// Substitute a message from an earlier transcript: stepN[.k]:FILE.
        #[arg(long)]
        replay: Vec<String>,
        /// Transcript path (default: under the workspace).
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Open a network-absent session from its evidence file.
    Trace { file: PathBuf },
    /// Authentication success rate: closed form, simulation or a sweep.
    Asr(commands::AsrArgs),
    /// Time the primitives and assemble the per-protocol costs.
    Bench {
        #[arg(long, default_value_t = 20)]
        reps: u32,
        /// Backend when no workspace exists.
        #[arg(long, value_enum)]
        security: Option<Security>,
    },
}

/// An error carrying its exit code.
#[derive(Debug)]
pub struct Coded {
    pub code: u8,
    pub msg: String,
}

impl fmt::Display for Coded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl std::error::Error for Coded {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Coded { code: 2, msg: msg.into() }.into()
}

pub fn corrupt(msg: impl Into<String>) -> anyhow::Error {
    Coded { code: 3, msg: msg.into() }.into()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let ws = cli.workspace;
    let result = match cli.command {
        Command::Init {
            security,
            m,
            w,
            seed,
            groups,
            force,
        } => commands::init(&ws, security, m, w, seed, groups, force),
        Command::Register { name, group } => commands::register(&ws, &name, &group),
        Command::Revoke { name } => commands::revoke(&ws, &name),
        Command::Directory => commands::directory(&ws),
        Command::Run {
            mode,
            ue_a,
            ue_b,
            tamper,
            drop,
            replay,
            transcript,
        } => commands::run(&ws, mode, &ue_a, &ue_b, &tamper, &drop, &replay, transcript),
        Command::Trace { file } => commands::trace(&ws, &file),
        Command::Asr(args) => commands::asr(&args),
        Command::Bench { reps, security } => commands::bench(&ws, reps, security),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let code = e.downcast_ref::<Coded>().map_or(1, |c| c.code);
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
