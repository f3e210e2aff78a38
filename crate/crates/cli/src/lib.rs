//! Command-line experiments on slice-regular Fock spaces.
//!
//! Exit codes: 0 on success, 1 on malformed input, 2 when the function is
//! not in the requested space, 3 on numerical failure.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use slice_fock::config::{parse_quaternion_list, FunctionSpec, OperatorSpec, SliceSpec};
use slice_fock::exec::Exec;
use slice_fock::fock::Kind;
use slice_fock::FockError;

use crate::config::{Command, ExperimentConfig, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_NOT_IN_SPACE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "slice-fock", version, about = "Experiments on slice-regular Fock spaces")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Args)]
pub struct Global {
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// first | second
    #[arg(long, global = true)]
    pub kind: Option<String>,
    /// i | j | k | x,y,z | sup:M
    #[arg(long, global = true)]
    pub slice: Option<String>,
    #[arg(long, global = true)]
    pub quad_radial: Option<usize>,
    #[arg(long, global = true)]
    pub quad_angular: Option<usize>,
    #[arg(long, global = true)]
    pub quad_sphere: Option<usize>,
    /// parallel | sequential
    #[arg(long, global = true)]
    pub exec: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Print the canonical configuration instead of running it.
    #[arg(long, global = true)]
    pub print_config: bool,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Fock norm of a function.
    Norm {
        #[arg(long = "fn")]
        function: String,
    },
    /// Approximation error of an operator family over a sweep of n.
    Converge {
        #[arg(long = "fn")]
        function: String,
        /// taylor:N | fejer:N | vdp:N | jackson:N:M
        #[arg(long)]
        op: String,
        /// Comma-separated n values replacing the operator's own.
        #[arg(long)]
        n: Option<String>,
    },
    /// Multiplier table of an operator.
    Multipliers {
        #[arg(long)]
        op: Option<String>,
        /// taylor | fejer | vdp | jackson, combined with --n and --m.
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        n: Option<String>,
        #[arg(long, default_value_t = 0)]
        m: usize,
    },
    /// Moduli of smoothness over a list of step bounds.
    Smoothness {
        #[arg(long = "fn")]
        function: String,
        #[arg(long, default_value_t = 1)]
        order: usize,
        #[arg(long)]
        delta: Option<String>,
        #[arg(long, default_value_t = 8)]
        h_grid: usize,
    },
    /// Best polynomial approximation errors.
    Bestapprox {
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Order and type from the maximum modulus.
    Growth {
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        radii: Option<String>,
    },
    /// Least-squares fit by reproducing kernel sections.
    KernelFit {
        #[arg(long = "fn")]
        function: String,
        /// Quaternions "w,x,y,z" separated by ';'.
        #[arg(long, allow_hyphen_values = true)]
        centers: String,
    },
    /// Run a TOML configuration file.
    Run { config: PathBuf },
}

fn parse_err(msg: impl Into<String>) -> FockError {
    FockError::Parse(msg.into())
}

fn parse_list<T: std::str::FromStr>(what: &str, s: &str) -> Result<Vec<T>, FockError> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| parse_err(format!("invalid {what} list '{s}'"))))
        .collect()
}

fn fn_spec(s: &str) -> Result<FunctionSpec, FockError> {
    s.parse()
}

/// Builds the experiment configuration described by the command line.
pub fn build_config(cli: &Cli) -> Result<ExperimentConfig, FockError> {
    let mut c = match &cli.command {
        Cmd::Run { config } => {
            let text = std::fs::read_to_string(config)
                .map_err(|e| parse_err(format!("cannot read {}: {e}", config.display())))?;
            ExperimentConfig::from_toml(&text)?
        }
        Cmd::Norm { function } => ExperimentConfig {
            function: Some(fn_spec(function)?),
            ..ExperimentConfig::new(Command::Norm)
        },
        Cmd::Converge { function, op, n } => ExperimentConfig {
            function: Some(fn_spec(function)?),
            operator: Some(op.parse()?),
            n: n.as_deref().map(|s| parse_list("n", s)).transpose()?.unwrap_or_default(),
            ..ExperimentConfig::new(Command::Converge)
        },
        Cmd::Multipliers { op, family, n, m } => {
            let ns: Vec<usize> = n.as_deref().map(|s| parse_list("n", s)).transpose()?.unwrap_or_default();
            let operator: OperatorSpec = match (op, family) {
                (Some(op), None) => op.parse()?,
                (None, Some(fam)) => {
                    let first = *ns.first().ok_or_else(|| parse_err("--family needs --n"))?;
                    let s = if fam == "jackson" {
                        format!("{fam}:{first}:{m}")
                    } else {
                        format!("{fam}:{first}")
                    };
                    s.parse()?
                }
                _ => return Err(parse_err("give exactly one of --op and --family")),
            };
            ExperimentConfig {
                operator: Some(operator),
                n: ns,
                ..ExperimentConfig::new(Command::Multipliers)
            }
        }
        Cmd::Smoothness {
            function,
            order,
            delta,
            h_grid,
        } => ExperimentConfig {
            function: Some(fn_spec(function)?),
            order: *order,
            delta: delta.as_deref().map(|s| parse_list("delta", s)).transpose()?.unwrap_or_default(),
            h_grid: *h_grid,
            ..ExperimentConfig::new(Command::Smoothness)
        },
        Cmd::Bestapprox { function, n, tol } => {
            let mut c = ExperimentConfig {
                function: Some(fn_spec(function)?),
                n: n.as_deref().map(|s| parse_list("n", s)).transpose()?.unwrap_or_default(),
                ..ExperimentConfig::new(Command::Bestapprox)
            };
            if let Some(t) = tol {
                c.tol = *t;
            }
            c
        }
        Cmd::Growth { function, radii } => ExperimentConfig {
            function: Some(fn_spec(function)?),
            radii: radii.as_deref().map(|s| parse_list("radius", s)).transpose()?.unwrap_or_default(),
            ..ExperimentConfig::new(Command::Growth)
        },
        Cmd::KernelFit { function, centers } => ExperimentConfig {
            function: Some(fn_spec(function)?),
            centers: parse_quaternion_list(centers)?.into_iter().map(|q| q.to_array()).collect(),
            ..ExperimentConfig::new(Command::KernelFit)
        },
    };
    let g = &cli.global;
    if let Some(p) = g.p {
        c.p = p;
    }
    if let Some(a) = g.alpha {
        c.alpha = a;
    }
    if let Some(k) = &g.kind {
        c.kind = match k.as_str() {
            "first" => Kind::First,
            "second" => Kind::Second,
            _ => return Err(parse_err(format!("invalid kind '{k}': expected first or second"))),
        };
    }
    if let Some(s) = &g.slice {
        c.slice = s.parse::<SliceSpec>()?;
    }
    if let Some(v) = g.quad_radial {
        c.quad.radial = v;
    }
    if let Some(v) = g.quad_angular {
        c.quad.angular = v;
    }
    if let Some(v) = g.quad_sphere {
        c.quad.sphere = v;
    }
    if let Some(e) = &g.exec {
        c.exec = match e.as_str() {
            "parallel" => Exec::Parallel,
            "sequential" => Exec::Sequential,
            _ => return Err(parse_err(format!("invalid exec '{e}': expected parallel or sequential"))),
        };
    }
    if g.out.is_some() {
        c.out = g.out.clone();
    }
    if g.format.is_some() {
        c.format = g.format;
    }
    c.validate()?;
    Ok(c)
}

pub fn exit_code(e: &FockError) -> i32 {
    match e {
        FockError::Parse(_) | FockError::Domain(_) | FockError::Io(_) | FockError::NoTrigForm => EXIT_PARSE,
        FockError::NotInSpace(_) => EXIT_NOT_IN_SPACE,
        _ => EXIT_NUMERIC,
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), FockError> {
    let c = build_config(cli)?;
    let text = if cli.global.print_config {
        c.to_canonical()
    } else {
        let out = commands::run(&c)?;
        match c.format() {
            Format::Csv => out.to_csv()?,
            Format::Json => out.to_json(),
        }
    };
    match &c.out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
