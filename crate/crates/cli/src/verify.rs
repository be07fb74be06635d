use std::io::Write;

use cms_core::symflow::exact;
use cms_core::{
    backward_extension_time, boundary_distance, integrate, solve_trajectory, ChamberPoint,
    RootKind, RootSystem,
};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::args::{self, parse_list, Suite, SystemArg, VerifyArgs};
use crate::format::g17;
use crate::CliError;

const GROWTH_TOL: f64 = 1e-9;
const CROSS_TOL: f64 = 1e-6;
const BOUNDARY_TOL: f64 = 1e-6;

#[derive(Debug, Serialize)]
struct SuiteResult {
    suite: &'static str,
    system: String,
    pass: bool,
    metric: &'static str,
    value: f64,
    threshold: f64,
    detail: String,
}

#[derive(Serialize)]
struct Report<'a> {
    seed: u64,
    pass: bool,
    results: &'a [SuiteResult],
}

pub fn run<W: Write>(args: &VerifyArgs, out: &mut W) -> Result<(), CliError> {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if !(args.t_max > 0.0 && args.t_max.is_finite()) {
        return Err(CliError::Usage(format!("--t-max must be positive, got {}", args.t_max)));
    }
    if args.n.is_some_and(|n| n < 2) {
        return Err(CliError::Usage("--n must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut results = Vec::new();
    let run_all = args.suite == Suite::All;
    if run_all || args.suite == Suite::Growth {
        for kind in kinds(args) {
            results.push(growth(args, kind, &mut rng)?);
        }
    }
    if run_all || args.suite == Suite::Cross {
        for kind in kinds(args) {
            results.push(cross(args, kind, &mut rng)?);
        }
    }
    if run_all || args.suite == Suite::Leading {
        results.push(leading(args, &mut rng));
    }
    if run_all || args.suite == Suite::Backward {
        results.push(backward(args)?);
    }

    writeln!(out, "{:<9} {:<15} {:<6} {:<22} {:>12} {:>10}", "suite", "system", "status", "metric", "value", "threshold")?;
    for r in &results {
        writeln!(
            out,
            "{:<9} {:<15} {:<6} {:<22} {:>12.4e} {:>10.0e}  {}",
            r.suite,
            r.system,
            if r.pass { "PASS" } else { "FAIL" },
            r.metric,
            r.value,
            r.threshold,
            r.detail
        )?;
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    if let Some(path) = &args.report {
        let report = Report { seed: args.seed, pass: failed == 0, results: &results };
        std::fs::write(path, serde_json::to_string_pretty(&report).expect("report serializes") + "\n")?;
    }
    if failed > 0 {
        return Err(CliError::Verification(format!("{failed} of {} checks failed", results.len())));
    }
    Ok(())
}

fn kinds(args: &VerifyArgs) -> Vec<SystemArg> {
    match args.system {
        Some(s) => vec![s],
        None => vec![SystemArg::A, SystemArg::B, SystemArg::D],
    }
}

fn random_system(args: &VerifyArgs, kind: SystemArg, rng: &mut ChaCha8Rng) -> Result<RootSystem, CliError> {
    let n = args.n.unwrap_or_else(|| rng.random_range(2..=8));
    args::system(kind, n, Some(args.nu))
}

/// Sorted Gaussian start, redrawn until it is clear of the walls.
fn random_start(sys: RootSystem, rng: &mut ChaCha8Rng) -> Result<ChamberPoint, CliError> {
    loop {
        let v = (0..sys.n()).map(|_| rng.sample(StandardNormal)).collect();
        let p = ChamberPoint::sorted(v, sys)?;
        if boundary_distance(&p) > 1e-2 {
            return Ok(p);
        }
    }
}

fn grid(t_max: f64, points: usize) -> Vec<f64> {
    (1..=points).map(|k| t_max * k as f64 / points as f64).collect()
}

fn label(kind: SystemArg, args: &VerifyArgs) -> String {
    match (kind, args.n) {
        (SystemArg::B, Some(n)) => format!("B{n}(nu={})", args.nu),
        (SystemArg::B, None) => format!("B(nu={})", args.nu),
        (k, Some(n)) => format!("{}{n}", RootKind::from(k)),
        (k, None) => RootKind::from(k).to_string(),
    }
}

fn growth(args: &VerifyArgs, kind: SystemArg, rng: &mut ChaCha8Rng) -> Result<SuiteResult, CliError> {
    let times = grid(args.t_max, 5);
    let cfg = args.integrator.config();
    let mut worst: f64 = 0.0;
    for _ in 0..args.trials {
        let sys = random_system(args, kind, rng)?;
        let x0 = random_start(sys, rng)?;
        let kappa = sys.growth_rate();
        for traj in [solve_trajectory(&x0, &times)?, integrate(&x0, &times, &cfg)?] {
            for (t, p) in traj.iter() {
                let sq = p.norm_sq();
                worst = worst.max((sq - x0.norm_sq() - kappa * t).abs() / (1.0 + sq));
            }
        }
    }
    Ok(SuiteResult {
        suite: "growth",
        system: label(kind, args),
        pass: worst < GROWTH_TOL,
        metric: "max relative defect",
        value: worst,
        threshold: GROWTH_TOL,
        detail: format!("{} starts, both engines, t <= {}", args.trials, g17(args.t_max)),
    })
}

fn cross(args: &VerifyArgs, kind: SystemArg, rng: &mut ChaCha8Rng) -> Result<SuiteResult, CliError> {
    let times = grid(args.t_max, 20);
    let cfg = args.integrator.config();
    let mut worst: f64 = 0.0;
    for _ in 0..args.trials {
        let sys = random_system(args, kind, rng)?;
        let x0 = random_start(sys, rng)?;
        let s = solve_trajectory(&x0, &times)?;
        let k = integrate(&x0, &times, &cfg)?;
        for (p, q) in s.points.iter().zip(&k.points) {
            let gap = p.coords().iter().zip(q.coords()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst = worst.max(gap);
        }
    }
    Ok(SuiteResult {
        suite: "cross",
        system: label(kind, args),
        pass: worst < CROSS_TOL,
        metric: "max engine gap",
        value: worst,
        threshold: CROSS_TOL,
        detail: format!("{} starts, t <= {}", args.trials, g17(args.t_max)),
    })
}

fn leading(args: &VerifyArgs, rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut checked = 0usize;
    let mut mismatches = Vec::new();
    let coefficient = |p: &[BigRational], d: usize| p.get(d).cloned().unwrap_or_else(|| exact::rational(0));
    for n in 1..=args.n_max {
        let x0: Vec<i64> = (0..n).map(|_| rng.random_range(-9..=9)).collect();
        let sum = exact::rational(x0.iter().sum());
        if n >= 2 {
            let polys = exact::propagate(&x0, RootKind::A, &exact::rational(0));
            for k in 1..=n {
                let d = k / 2;
                checked += 1;
                let p = &polys[k - 1];
                if p.len() > d + 1 || coefficient(p, d) != exact::a_leading_coefficient(n, k, &sum) {
                    mismatches.push(format!("A n={n} k={k}"));
                }
            }
        }
        for nu in 1..=3 {
            let nu = exact::rational(nu);
            let polys = exact::propagate(&x0, RootKind::B, &nu);
            for k in 1..=n {
                checked += 1;
                let p = &polys[k - 1];
                if p.len() != k + 1 || coefficient(p, k) != exact::b_leading_coefficient(n, k, &nu) {
                    mismatches.push(format!("B n={n} nu={nu} k={k}"));
                }
            }
        }
    }
    SuiteResult {
        suite: "leading",
        system: "A, B(nu=1,2,3)".into(),
        pass: mismatches.is_empty(),
        metric: "mismatches",
        value: mismatches.len() as f64,
        threshold: 0.0,
        detail: if mismatches.is_empty() {
            format!("{checked} exact coefficients, N <= {}", args.n_max)
        } else {
            mismatches.join("; ")
        },
    }
}

fn backward(args: &VerifyArgs) -> Result<SuiteResult, CliError> {
    let x0 = parse_list(&args.x0, "--x0")?;
    let kind = args.system.unwrap_or(SystemArg::A);
    let sys = args::system(kind, x0.len(), Some(args.nu))?;
    let x0 = ChamberPoint::new(x0, sys)?;
    let ext = backward_extension_time(&x0)?;
    let gap = boundary_distance(&ext.point);
    let pass = ext.lower_bound <= ext.t0 && ext.t0 < 0.0 && gap < BOUNDARY_TOL;
    Ok(SuiteResult {
        suite: "backward",
        system: sys.to_string(),
        pass,
        metric: "boundary distance",
        value: gap,
        threshold: BOUNDARY_TOL,
        detail: format!("t0 = {:.10}, bracket [{:.10}, 0)", ext.t0, ext.lower_bound),
    })
}
