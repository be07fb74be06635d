use clap::{Args, Parser, Subcommand, ValueEnum};
use cms_core::{ChamberPoint, IntegratorConfig, RootKind, RootSystem};

use crate::manifest::OutputFormat;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "cms", version, about = "Freezing-limit dynamics of Calogero-Moser-Sutherland systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the ODE from a start in the closed chamber.
    Solve(SolveArgs),
    /// Print Hermite or Laguerre zeros, descending.
    Zeros(ZerosArgs),
    /// Run the built-in invariant suites.
    Verify(VerifyArgs),
    /// Monte Carlo freezing experiment for the finite-beta diffusion.
    Sde(SdeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "UPPER")]
pub enum SystemArg {
    #[value(alias = "a")]
    A,
    #[value(alias = "b")]
    B,
    #[value(alias = "d")]
    D,
}

impl From<SystemArg> for RootKind {
    fn from(s: SystemArg) -> Self {
        match s {
            SystemArg::A => RootKind::A,
            SystemArg::B => RootKind::B,
            SystemArg::D => RootKind::D,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct StartArgs {
    #[arg(long, value_enum)]
    pub system: SystemArg,
    /// Number of particles; defaults to the length of --x0.
    #[arg(long)]
    pub n: Option<usize>,
    /// Wall multiplicity, required for system B.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Start vector, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    /// Sort the start into the chamber instead of rejecting it.
    #[arg(long)]
    pub sorted: bool,
}

impl StartArgs {
    pub fn start(&self) -> Result<ChamberPoint, CliError> {
        let x0 = parse_list(&self.x0, "--x0")?;
        if x0.is_empty() {
            return Err(CliError::Usage("--x0 must not be empty".into()));
        }
        let sys = system(self.system, self.n.unwrap_or(x0.len()), self.nu)?;
        if x0.len() != sys.n() {
            return Err(CliError::Usage(format!("--x0 has {} entries but --n is {}", x0.len(), sys.n())));
        }
        let point = if self.sorted { ChamberPoint::sorted(x0, sys) } else { ChamberPoint::new(x0, sys) };
        point.map_err(|e| match e {
            cms_core::Error::OutsideChamber(_) => {
                CliError::Domain(format!("{e}; pass --sorted to sort it into the chamber"))
            }
            e => e.into(),
        })
    }
}

pub fn system(kind: SystemArg, n: usize, nu: Option<f64>) -> Result<RootSystem, CliError> {
    let nu = match (kind, nu) {
        (SystemArg::B, None) => return Err(CliError::Usage("--nu is required for system B".into())),
        (_, nu) => nu.unwrap_or(0.0),
    };
    RootSystem::new(kind.into(), n, nu).map_err(CliError::from)
}

/// Comma-separated reals; an empty or blank string is the empty list.
pub fn parse_list(s: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{flag}: cannot parse '{}' as a number", v.trim())))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Exact flow in symmetric coordinates.
    #[value(alias = "symmetric")]
    Sym,
    /// Adaptive Runge-Kutta; interior starts only.
    #[value(alias = "runge-kutta")]
    Rk,
    /// Symmetric bootstrap off the boundary, then Runge-Kutta.
    Hybrid,
}

#[derive(Debug, Clone, Args)]
pub struct IntegratorArgs {
    #[arg(long, default_value_t = IntegratorConfig::default().rel_tol)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = IntegratorConfig::default().abs_tol)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = IntegratorConfig::default().max_step)]
    pub max_step: f64,
    #[arg(long, default_value_t = IntegratorConfig::default().boundary_guard)]
    pub boundary_guard: f64,
    #[arg(long, default_value_t = IntegratorConfig::default().bootstrap_eps)]
    pub bootstrap_eps: f64,
}

impl IntegratorArgs {
    pub fn config(&self) -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            boundary_guard: self.boundary_guard,
            bootstrap_eps: self.bootstrap_eps,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub start: StartArgs,
    /// Sample times, comma separated; may be empty.
    #[arg(long = "t", allow_hyphen_values = true)]
    pub times: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Sym)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Also write the run manifest as JSON to this file.
    #[arg(long)]
    pub manifest: Option<std::path::PathBuf>,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Hermite,
    Laguerre,
}

#[derive(Debug, Clone, Args)]
pub struct ZerosArgs {
    #[arg(value_enum)]
    pub family: FamilyArg,
    pub degree: usize,
    /// Laguerre parameter, at least -1.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Append the max-norm of the electrostatic residual.
    #[arg(long)]
    pub residual: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Growth,
    Cross,
    Leading,
    Backward,
    All,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Restrict to one root system; all three by default.
    #[arg(long, value_enum)]
    pub system: Option<SystemArg>,
    /// Fixed particle count; random in 2..=8 by default.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,
    /// Largest N for the exact leading-coefficient check.
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    /// Start for the backward-extension suite.
    #[arg(long, allow_hyphen_values = true, default_value = "1,-1")]
    pub x0: String,
    #[arg(long, env = "CMS_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    /// Write a JSON report to this file.
    #[arg(long)]
    pub report: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SdeArgs {
    #[command(flatten)]
    pub start: StartArgs,
    /// Inverse temperatures, comma separated; `inf` switches the noise off.
    #[arg(long)]
    pub betas: String,
    #[arg(long, default_value_t = 1000)]
    pub paths: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, env = "CMS_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Run paths on one thread.
    #[arg(long)]
    pub sequential: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists() {
        assert_eq!(parse_list("", "--t").unwrap(), Vec::<f64>::new());
        assert_eq!(parse_list(" 1, -2.5 ,inf", "--t").unwrap(), vec![1.0, -2.5, f64::INFINITY]);
        assert!(matches!(parse_list("1,,2", "--t"), Err(CliError::Usage(_))));
    }

    #[test]
    fn b_needs_nu() {
        assert!(matches!(system(SystemArg::B, 2, None), Err(CliError::Usage(_))));
        assert_eq!(system(SystemArg::A, 3, None).unwrap(), RootSystem::a(3).unwrap());
    }
}
