use std::io::Write;

use cms_core::sde::{freezing_deviation, FreezingRow, SdeConfig};
use cms_core::{Execution, Method};
use serde_json::json;

use crate::args::{parse_list, SdeArgs};
use crate::format::{g17, write_row};
use crate::manifest::{betas::Beta, OutputFormat, RunManifest};
use crate::CliError;

pub fn run<W: Write>(args: &SdeArgs, out: &mut W) -> Result<(), CliError> {
    let x0 = args.start.start()?;
    let betas = parse_list(&args.betas, "--betas")?;
    if betas.is_empty() {
        return Err(CliError::Usage("--betas must list at least one value".into()));
    }
    let cfg = SdeConfig {
        beta: betas[0],
        n_paths: args.paths,
        dt: args.dt,
        seed: args.seed,
        execution: if args.sequential { Execution::Sequential } else { Execution::Parallel },
        ..Default::default()
    };
    cfg.validate()?;
    if !(args.t_end > 0.0 && args.t_end.is_finite()) {
        return Err(CliError::Usage(format!("--t-end must be positive, got {}", args.t_end)));
    }
    let rows = freezing_deviation(&x0, args.t_end, &betas, &cfg)?;
    for r in rows.iter().filter(|r| r.failed > 0) {
        eprintln!("warning: beta = {}: {} of {} paths exhausted sub-stepping and were dropped", g17(r.beta), r.failed, r.paths);
    }
    match args.format {
        OutputFormat::Csv => {
            write_row(out, ["beta", "mean_dev", "std_err", "reflect_rate"].map(String::from))?;
            for r in &rows {
                write_row(out, [r.beta, r.mean_dev, r.std_err, r.reflect_rate].map(g17))?;
            }
        }
        OutputFormat::Json => {
            let sys = x0.system();
            let manifest = RunManifest {
                subcommand: "sde".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                system: sys.kind(),
                n: sys.n(),
                nu: sys.nu(),
                x0: x0.coords().to_vec(),
                times: Vec::new(),
                method: Method::EulerMaruyama,
                tolerances: cfg.tolerances(),
                seed: Some(args.seed),
                format: args.format,
                betas: Some(betas),
                paths: Some(args.paths),
                t_end: Some(args.t_end),
            };
            let doc = json!({ "manifest": manifest, "rows": rows.iter().map(row_json).collect::<Vec<_>>() });
            serde_json::to_writer(&mut *out, &doc).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn row_json(r: &FreezingRow) -> serde_json::Value {
    json!({
        "beta": Beta::from(r.beta),
        "mean_dev": r.mean_dev,
        "std_err": r.std_err,
        "reflect_rate": r.reflect_rate,
        "paths": r.paths,
        "failed": r.failed,
        "mean_sq": r.mean_sq,
        "mean_sq_std_err": r.mean_sq_std_err,
        "mean_sq_expected": r.mean_sq_expected,
    })
}
