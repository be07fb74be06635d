use std::io::Write;

use cms_core::{integrate, solve_hybrid, solve_trajectory, Trajectory};
use serde::Serialize;

use crate::args::{parse_list, MethodArg, SolveArgs};
use crate::format::{g17, write_row};
use crate::manifest::{OutputFormat, RunManifest};
use crate::CliError;

#[derive(Serialize)]
struct TrajectoryDocument<'a> {
    manifest: &'a RunManifest,
    times: &'a [f64],
    positions: Vec<&'a [f64]>,
}

pub fn run<W: Write>(args: &SolveArgs, out: &mut W) -> Result<(), CliError> {
    let x0 = args.start.start()?;
    let times = parse_list(&args.times, "--t")?;
    let cfg = args.integrator.config();
    let traj = match args.method {
        MethodArg::Sym => solve_trajectory(&x0, &times)?,
        MethodArg::Rk => integrate(&x0, &times, &cfg).map_err(|e| match e {
            cms_core::Error::NotInterior(_) => {
                CliError::Domain(format!("{e}; use --method hybrid or sym for boundary starts"))
            }
            e => e.into(),
        })?,
        MethodArg::Hybrid => solve_hybrid(&x0, &times, &cfg)?,
    };
    let sys = x0.system();
    let manifest = RunManifest {
        subcommand: "solve".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        system: sys.kind(),
        n: sys.n(),
        nu: sys.nu(),
        x0: x0.coords().to_vec(),
        times: times.clone(),
        method: traj.method,
        tolerances: traj.tolerances.clone(),
        seed: None,
        format: args.format,
        betas: None,
        paths: None,
        t_end: None,
    };
    if let Some(path) = &args.manifest {
        std::fs::write(path, serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n")?;
    }
    match args.format {
        OutputFormat::Csv => write_csv(&traj, out)?,
        OutputFormat::Json => {
            let doc = TrajectoryDocument {
                manifest: &manifest,
                times: &traj.times,
                positions: traj.points.iter().map(|p| p.coords()).collect(),
            };
            serde_json::to_writer(&mut *out, &doc).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn write_csv<W: Write>(traj: &Trajectory, out: &mut W) -> std::io::Result<()> {
    let n = traj.system.n();
    write_row(out, std::iter::once("t".to_string()).chain((1..=n).map(|i| format!("x{i}"))))?;
    for (t, p) in traj.iter() {
        write_row(out, std::iter::once(g17(t)).chain(p.coords().iter().map(|&v| g17(v))))?;
    }
    Ok(())
}
