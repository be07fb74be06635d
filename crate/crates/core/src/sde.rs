//! Euler–Maruyama simulation of the rescaled multivariate Bessel diffusion
//! `dX = β^{-1/2} dB + ½∇ln w(X) dt` and its freezing onto the ODE solution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::chamber::{
    drift_into, reflect_into_chamber, validate_times, ChamberPoint, Method, RootSystem, Tolerances,
    Trajectory,
};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::symflow;

pub const MAX_HALVINGS: u32 = 40;
const SUBSTEP_BUDGET: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    EulerMaruyama,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdeConfig {
    /// Inverse temperature; `f64::INFINITY` switches the noise off.
    pub beta: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub scheme: Scheme,
    #[serde(default)]
    pub execution: Execution,
}

impl Default for SdeConfig {
    fn default() -> Self {
        Self {
            beta: f64::INFINITY,
            n_paths: 1,
            dt: 1e-3,
            seed: 0,
            scheme: Scheme::EulerMaruyama,
            execution: Execution::default(),
        }
    }
}

impl SdeConfig {
    pub fn validate(&self) -> Result<()> {
        check_beta(self.beta)?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::OutOfRange(format!("dt must be positive, got {}", self.dt)));
        }
        if self.n_paths == 0 {
            return Err(Error::OutOfRange("n_paths must be at least 1".into()));
        }
        Ok(())
    }

    fn noise(&self) -> f64 {
        if self.beta.is_infinite() {
            0.0
        } else {
            self.beta.sqrt().recip()
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances { dt: Some(self.dt), ..Default::default() }
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("beta must be positive, got {beta}")))
    }
}

/// Deterministic generator for one path: the seed picks the key and the path
/// index picks the stream.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepCounts {
    pub steps: u64,
    pub substeps: u64,
    pub reflections: u64,
}

struct Walker<'a> {
    system: &'a RootSystem,
    sigma: f64,
    f: Vec<f64>,
    proposal: Vec<f64>,
    counts: StepCounts,
    budget: u64,
}

impl<'a> Walker<'a> {
    fn new(system: &'a RootSystem, sigma: f64) -> Self {
        let n = system.n();
        Self {
            system,
            sigma,
            f: vec![0.0; n],
            proposal: vec![0.0; n],
            counts: StepCounts::default(),
            budget: 0,
        }
    }

    fn step<R: Rng>(&mut self, y: &mut [f64], t: f64, h: f64, rng: &mut R) -> Result<()> {
        let dw: Vec<f64> = (0..y.len()).map(|_| h.sqrt() * rng.sample::<f64, _>(StandardNormal)).collect();
        self.counts.steps += 1;
        self.budget = 0;
        self.advance(y, t, h, &dw, 0, rng)
    }

    /// Euler step over `[t, t+h]` with Brownian increment `dw`. A proposal
    /// that leaves the open chamber is retried on both halves, with the
    /// midpoint drawn from the Brownian bridge.
    fn advance<R: Rng>(&mut self, y: &mut [f64], t: f64, h: f64, dw: &[f64], depth: u32, rng: &mut R) -> Result<()> {
        drift_into(y, self.system, &mut self.f)?;
        for i in 0..y.len() {
            self.proposal[i] = y[i] + self.f[i] * h + self.sigma * dw[i];
        }
        if ChamberPoint::new_unchecked(self.proposal.clone(), *self.system).is_interior() {
            y.copy_from_slice(&self.proposal);
            return Ok(());
        }
        self.budget += 1;
        if depth >= MAX_HALVINGS || self.budget > SUBSTEP_BUDGET {
            reflect_into_chamber(&mut self.proposal, self.system.kind());
            self.counts.reflections += 1;
            if !ChamberPoint::new_unchecked(self.proposal.clone(), *self.system).is_interior() {
                return Err(Error::SubstepExhausted { t });
            }
            y.copy_from_slice(&self.proposal);
            return Ok(());
        }
        let half = 0.5 * h;
        let spread = (0.25 * h).sqrt();
        let first: Vec<f64> = dw.iter().map(|w| 0.5 * w + spread * rng.sample::<f64, _>(StandardNormal)).collect();
        let second: Vec<f64> = dw.iter().zip(&first).map(|(w, a)| w - a).collect();
        self.counts.substeps += 2;
        self.advance(y, t, half, &first, depth + 1, rng)?;
        self.advance(y, t + half, half, &second, depth + 1, rng)
    }
}

fn require_interior(x0: &ChamberPoint) -> Result<()> {
    if x0.is_interior() {
        Ok(())
    } else {
        Err(Error::NotInterior(x0.coords().to_vec()))
    }
}

/// Runs one path and records its state at every entry of `times`. Base steps
/// have length `cfg.dt`, shortened where needed to land on the sample times.
pub fn simulate_path_with_counts(
    x0: &ChamberPoint,
    times: &[f64],
    cfg: &SdeConfig,
    path_index: u64,
) -> Result<(Trajectory, StepCounts)> {
    cfg.validate()?;
    require_interior(x0)?;
    validate_times(times, 0.0)?;
    let system = *x0.system();
    let mut rng = path_rng(cfg.seed, path_index);
    let mut walker = Walker::new(&system, cfg.noise());
    let mut y = x0.coords().to_vec();
    let mut t = 0.0;
    let mut traj = Trajectory::empty(system, Method::EulerMaruyama, cfg.tolerances());
    for &target in times {
        while t < target {
            let remaining = target - t;
            let (h, next) = if remaining <= cfg.dt * (1.0 + 1e-9) { (remaining, target) } else { (cfg.dt, t + cfg.dt) };
            walker.step(&mut y, t, h, &mut rng)?;
            t = next;
        }
        traj.times.push(target);
        traj.points.push(ChamberPoint::new_unchecked(y.clone(), system));
    }
    Ok((traj, walker.counts))
}

pub fn simulate_path(x0: &ChamberPoint, times: &[f64], cfg: &SdeConfig) -> Result<Trajectory> {
    simulate_path_with_counts(x0, times, cfg, 0).map(|(traj, _)| traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreezingRow {
    pub beta: f64,
    /// Mean over paths of `sup_t ‖X_t − x(t)‖∞`.
    pub mean_dev: f64,
    pub std_err: f64,
    /// Reflections per base step.
    pub reflect_rate: f64,
    pub paths: usize,
    pub failed: usize,
    /// Empirical `E‖X_T‖²` and its standard error.
    pub mean_sq: f64,
    pub mean_sq_std_err: f64,
    /// `‖x0‖² + (κ + N/β)·T`.
    pub mean_sq_expected: f64,
}

struct PathSummary {
    sup_dev: f64,
    end_norm_sq: f64,
    counts: StepCounts,
}

fn run_deviation_path(
    x0: &ChamberPoint,
    reference: &[f64],
    n_steps: usize,
    h: f64,
    sigma: f64,
    seed: u64,
    path_index: u64,
) -> Result<PathSummary> {
    let system = *x0.system();
    let n = system.n();
    let mut rng = path_rng(seed, path_index);
    let mut walker = Walker::new(&system, sigma);
    let mut y = x0.coords().to_vec();
    let mut sup_dev: f64 = 0.0;
    for k in 0..n_steps {
        walker.step(&mut y, k as f64 * h, h, &mut rng)?;
        let r = &reference[k * n..(k + 1) * n];
        let dev = y.iter().zip(r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        sup_dev = sup_dev.max(dev);
    }
    let end_norm_sq = y.iter().map(|v| v * v).sum();
    Ok(PathSummary { sup_dev, end_norm_sq, counts: walker.counts })
}

fn mean_and_std_err(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Monte Carlo estimate of the sup-norm distance to the ODE solution over
/// `[0, t_end]`, one row per β in ascending order. The same random streams
/// are reused for every β.
pub fn freezing_deviation(
    x0: &ChamberPoint,
    t_end: f64,
    betas: &[f64],
    cfg: &SdeConfig,
) -> Result<Vec<FreezingRow>> {
    cfg.validate()?;
    require_interior(x0)?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidTimes { start: 0.0 });
    }
    if betas.is_empty() {
        return Err(Error::OutOfRange("betas must be nonempty".into()));
    }
    for &b in betas {
        check_beta(b)?;
    }
    let mut betas = betas.to_vec();
    betas.sort_by(|a, b| a.total_cmp(b));

    let n_steps = ((t_end / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
    let h = t_end / n_steps as f64;
    let grid: Vec<f64> = (1..=n_steps).map(|k| if k == n_steps { t_end } else { k as f64 * h }).collect();
    let reference: Vec<f64> = symflow::solve_trajectory(x0, &grid)?
        .points
        .into_iter()
        .flat_map(ChamberPoint::into_coords)
        .collect();

    let system = x0.system();
    let n = system.n() as f64;
    let x0_sq = x0.norm_sq();
    let mut rows = Vec::with_capacity(betas.len());
    for beta in betas {
        let run = SdeConfig { beta, ..*cfg };
        let sigma = run.noise();
        let paths = if beta.is_infinite() { 1 } else { cfg.n_paths };
        let results = cfg.execution.map_indexed(paths, |i| {
            run_deviation_path(x0, &reference, n_steps, h, sigma, cfg.seed, i as u64)
        });
        let mut devs = Vec::with_capacity(paths);
        let mut squares = Vec::with_capacity(paths);
        let mut steps = 0u64;
        let mut reflections = 0u64;
        let mut failed = 0usize;
        for r in results {
            match r {
                Ok(s) => {
                    devs.push(s.sup_dev);
                    squares.push(s.end_norm_sq);
                    steps += s.counts.steps;
                    reflections += s.counts.reflections;
                }
                Err(Error::SubstepExhausted { .. }) => failed += 1,
                Err(e) => return Err(e),
            }
        }
        if devs.is_empty() {
            return Err(Error::SubstepExhausted { t: t_end });
        }
        let (mean_dev, std_err) = mean_and_std_err(&devs);
        let (mean_sq, mean_sq_std_err) = mean_and_std_err(&squares);
        let noise_rate = if beta.is_infinite() { 0.0 } else { n / beta };
        rows.push(FreezingRow {
            beta,
            mean_dev,
            std_err,
            reflect_rate: reflections as f64 / steps.max(1) as f64,
            paths,
            failed,
            mean_sq,
            mean_sq_std_err,
            mean_sq_expected: x0_sq + (system.growth_rate() + noise_rate) * t_end,
        });
    }
    Ok(rows)
}
