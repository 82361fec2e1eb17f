use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use gross_tower::commands::{self, InstanceConfig, JsonReport};
use gross_tower::{Error, Result};

#[derive(Parser)]
#[command(name = "gross-tower", version, about = "Shimura sets, Heegner families and theta elements for definite quaternion algebras")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 2)]
    nminus: u64,
    #[arg(long, default_value_t = 1)]
    nplus: u64,
    #[arg(long, default_value_t = 5)]
    p: u64,
    #[arg(long, visible_alias = "m", default_value_t = 1)]
    mmax: u32,
    #[arg(long, allow_hyphen_values = true)]
    dk: Option<i128>,
    #[arg(long, default_value_t = 1)]
    c: i128,
    /// Overrides GROSS_TOWER_PRECISION (default 8).
    #[arg(long)]
    precision: Option<u32>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<String>,
    /// Add wall-clock timing to the report (makes output run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Class numbers, unit groups and mass checks for m ≤ m_max.
    Classset(Common),
    /// One Hecke matrix at level m_max with audits.
    Hecke {
        #[command(flatten)]
        common: Common,
        /// T, U, diamond or Tnn
        #[arg(long, default_value = "T")]
        op: String,
        #[arg(long, allow_hyphen_values = true)]
        param: Option<i128>,
    },
    /// The Heegner family P(c p^r, m) with certificates.
    Heegner {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        rmax: u32,
        /// Auxiliary inert primes ℓ for the conductors cℓ.
        #[arg(long, value_delimiter = ',')]
        ell: Vec<u64>,
    },
    /// Divisor identities: tower, euler, galois, all (comma separated; empty for none).
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        ell: Option<u64>,
    },
    /// Theta elements θ_n for n ≤ n_max and L_n = θ_n θ_n^*.
    Theta {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        nmax: u32,
        /// Target eigenvalues "l:a,..."; a target at p selects α_p as the unit root of X² - aX + p.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        eigensystem: String,
        /// Heegner family depth (default: the d(n_max) the layers need).
        #[arg(long)]
        rmax: Option<u32>,
    },
    /// Smoke tests.
    Selftest {
        #[arg(long)]
        out: Option<String>,
    },
}

fn config(c: &Common) -> Result<InstanceConfig> {
    let precision = match c.precision {
        Some(p) => p,
        None => commands::default_precision()?,
    };
    Ok(InstanceConfig { n_minus: c.nminus, n_plus: c.nplus, p: c.p, m_max: c.mmax, d_k: c.dk, c: c.c, precision })
}

fn run(cmd: &Cmd) -> Result<JsonReport> {
    match cmd {
        Cmd::Classset(c) => commands::cmd_classset(&config(c)?),
        Cmd::Hecke { common, op, param } => commands::cmd_hecke(&config(common)?, commands::parse_op(op, *param)?),
        Cmd::Heegner { common, rmax, ell } => commands::cmd_heegner(&config(common)?, *rmax, ell),
        Cmd::Verify { common, suite, ell } => commands::cmd_verify(&config(common)?, &commands::parse_suites(suite)?, *ell),
        Cmd::Theta { common, nmax, eigensystem, rmax } => commands::cmd_theta(&config(common)?, *nmax, &commands::parse_eigensystem(eigensystem)?, *rmax),
        Cmd::Selftest { .. } => commands::cmd_selftest(),
    }
}

fn name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Classset(_) => "classset",
        Cmd::Hecke { .. } => "hecke",
        Cmd::Heegner { .. } => "heegner",
        Cmd::Verify { .. } => "verify",
        Cmd::Theta { .. } => "theta",
        Cmd::Selftest { .. } => "selftest",
    }
}

fn emit(text: &str, out: Option<&String>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n")),
        None => {
            let mut so = std::io::stdout().lock();
            writeln!(so, "{text}")
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (out, timing) = match &cli.cmd {
        Cmd::Classset(c) | Cmd::Hecke { common: c, .. } | Cmd::Heegner { common: c, .. } | Cmd::Verify { common: c, .. } | Cmd::Theta { common: c, .. } => (c.out.clone(), c.timing),
        Cmd::Selftest { out } => (out.clone(), false),
    };
    let start = Instant::now();
    let (text, code) = match run(&cli.cmd) {
        Ok(mut r) => {
            if timing {
                r.timing = Some(json!({ "elapsed_ms": start.elapsed().as_millis() as u64 }));
            }
            // a failed identity or audit is an invariant violation
            let code = if r.ok { 0 } else { Error::Internal(String::new()).exit_code() };
            (r.to_json(), code)
        }
        Err(e) => {
            eprintln!("gross-tower {}: {e}", name(&cli.cmd));
            (commands::error_json(name(&cli.cmd), &e), e.exit_code())
        }
    };
    if let Err(e) = emit(&text, out.as_ref()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            return ExitCode::from(code as u8);
        }
        eprintln!("cannot write output: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code as u8)
}
