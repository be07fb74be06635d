//! Adaptive Dormand–Prince 5(4) integration of the raw singular drift.
//!
//! This engine never touches symmetric coordinates, so it serves as an
//! independent check on [`crate::symflow`].

use serde::{Deserialize, Serialize};

use crate::chamber::{
    boundary_distance, drift_into, validate_times, ChamberPoint, Method, Tolerances, Trajectory,
};
use crate::error::{Error, Result};
use crate::orthopoly::stationary_profile;
use crate::symflow;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Fraction of the boundary distance a single step may traverse.
    pub boundary_guard: f64,
    /// Hand-off time from the symmetric engine for boundary starts.
    pub bootstrap_eps: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_step: 1.0, boundary_guard: 0.5, bootstrap_eps: 1e-8 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.rel_tol, self.abs_tol, self.max_step, self.bootstrap_eps]
            .iter()
            .all(|v| *v > 0.0);
        if !positive || !(self.boundary_guard > 0.0 && self.boundary_guard < 1.0) {
            return Err(Error::OutOfRange(format!("invalid integrator configuration {self:?}")));
        }
        Ok(())
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            rel_tol: Some(self.rel_tol),
            abs_tol: Some(self.abs_tol),
            max_step: Some(self.max_step),
            boundary_guard: Some(self.boundary_guard),
            bootstrap_eps: Some(self.bootstrap_eps),
            ..Default::default()
        }
    }
}

const MIN_STEP: f64 = 1e-14;
/// Attempted steps per call, accepted or not.
pub const MAX_STEPS: usize = 5_000_000;

// Dormand–Prince tableau. The drift is autonomous, so the nodes are unused.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Stepper {
    system: crate::chamber::RootSystem,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
    err: Vec<f64>,
}

impl Stepper {
    fn new(system: crate::chamber::RootSystem) -> Self {
        let n = system.n();
        Self {
            system,
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            y_new: vec![0.0; n],
            err: vec![0.0; n],
        }
    }

    #[allow(clippy::needless_range_loop)]
    fn stage(&mut self, y: &[f64], h: f64, idx: usize, coeffs: &[(usize, f64)]) -> Result<()> {
        for i in 0..y.len() {
            let mut acc = y[i];
            for &(j, a) in coeffs {
                acc += h * a * self.k[j][i];
            }
            self.tmp[i] = acc;
        }
        drift_into(&self.tmp, &self.system, &mut self.k[idx])
    }

    /// One trial step from `y` (with `k[0] = f(y)` already set). Returns the
    /// scaled error norm; the proposal is in `y_new`, its slope in `k[6]`.
    #[allow(clippy::needless_range_loop)]
    fn try_step(&mut self, y: &[f64], h: f64, cfg: &IntegratorConfig) -> Result<f64> {
        self.stage(y, h, 1, &[(0, A21)])?;
        self.stage(y, h, 2, &[(0, A31), (1, A32)])?;
        self.stage(y, h, 3, &[(0, A41), (1, A42), (2, A43)])?;
        self.stage(y, h, 4, &[(0, A51), (1, A52), (2, A53), (3, A54)])?;
        self.stage(y, h, 5, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)])?;
        for i in 0..y.len() {
            self.y_new[i] = y[i]
                + h * (B1 * self.k[0][i]
                    + B3 * self.k[2][i]
                    + B4 * self.k[3][i]
                    + B5 * self.k[4][i]
                    + B6 * self.k[5][i]);
        }
        let y_new = self.y_new.clone();
        drift_into(&y_new, &self.system, &mut self.k[6])?;
        let mut sum = 0.0;
        for i in 0..y.len() {
            self.err[i] = h
                * (E1 * self.k[0][i]
                    + E3 * self.k[2][i]
                    + E4 * self.k[3][i]
                    + E5 * self.k[4][i]
                    + E6 * self.k[5][i]
                    + E7 * self.k[6][i]);
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(self.y_new[i].abs());
            sum += (self.err[i] / sc).powi(2);
        }
        Ok((sum / y.len() as f64).sqrt())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Integrates from `(t_start, y_start)` and records the state at each of `times`.
fn integrate_from(
    t_start: f64,
    y_start: &ChamberPoint,
    times: &[f64],
    cfg: &IntegratorConfig,
    traj: &mut Trajectory,
) -> Result<()> {
    let system = *y_start.system();
    let mut st = Stepper::new(system);
    let mut y = y_start.coords().to_vec();
    let mut t = t_start;
    drift_into(&y, &system, &mut st.k[0])?;
    let mut h = {
        let f = norm(&st.k[0]);
        let scale = cfg.abs_tol + cfg.rel_tol * norm(&y);
        (0.01 * (scale / cfg.rel_tol) / f.max(1e-300)).min(cfg.max_step).max(1e-10)
    };

    let mut attempts = 0usize;
    for &target in times {
        while t < target {
            attempts += 1;
            if attempts > MAX_STEPS {
                return Err(Error::StepBudget { t, steps: MAX_STEPS });
            }
            let guard = {
                let p = ChamberPoint::new_unchecked(y.clone(), system);
                cfg.boundary_guard * boundary_distance(&p) / norm(&st.k[0]).max(1e-300)
            };
            let mut step = h.min(cfg.max_step).min(guard);
            let last = target - t <= step * (1.0 + 1e-12);
            if last {
                step = target - t;
            }
            if step < MIN_STEP && !last {
                return Err(Error::StepUnderflow { t, h: step });
            }
            let outcome = st.try_step(&y, step, cfg);
            let accepted = match outcome {
                Ok(err) if err <= 1.0 => {
                    let interior = ChamberPoint::new_unchecked(st.y_new.clone(), system).is_interior();
                    if interior {
                        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                        if !last {
                            h = step * factor;
                        }
                        true
                    } else {
                        h = 0.25 * step;
                        false
                    }
                }
                Ok(err) => {
                    h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                    false
                }
                // A stage left the open chamber.
                Err(Error::Singular { .. }) => {
                    h = 0.25 * step;
                    false
                }
                Err(e) => return Err(e),
            };
            if accepted {
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut st.y_new);
                let (k0, k6) = {
                    let (a, b) = st.k.split_at_mut(6);
                    (&mut a[0], &mut b[0])
                };
                std::mem::swap(k0, k6);
            } else if h < MIN_STEP {
                return Err(Error::StepUnderflow { t, h });
            }
        }
        traj.times.push(target);
        traj.points.push(ChamberPoint::new_unchecked(y.clone(), system));
    }
    Ok(())
}

/// Adaptive Runge–Kutta solution from an interior start, sampled at `times`.
pub fn integrate(x0: &ChamberPoint, times: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if !x0.is_interior() {
        return Err(Error::NotInterior(x0.coords().to_vec()));
    }
    validate_times(times, 0.0)?;
    let mut traj = Trajectory::empty(*x0.system(), Method::RungeKutta, cfg.tolerances());
    integrate_from(0.0, x0, times, cfg, &mut traj)?;
    Ok(traj)
}

/// Solution from anywhere in the closed chamber: boundary starts take the
/// symmetric engine up to `bootstrap_eps` and continue with Runge–Kutta.
pub fn solve_hybrid(x0: &ChamberPoint, times: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if x0.is_interior() {
        return integrate(x0, times, cfg);
    }
    validate_times(times, 0.0)?;
    let eps = cfg.bootstrap_eps;
    let split = times.partition_point(|&t| t <= eps);
    let mut early = symflow::solve_trajectory(x0, &times[..split])?;
    let mut traj = Trajectory::empty(*x0.system(), Method::Hybrid, cfg.tolerances());
    traj.times.append(&mut early.times);
    traj.points.append(&mut early.points);
    if split < times.len() {
        let handoff = symflow::solve_at(x0, eps)?;
        integrate_from(eps, &handoff, &times[split..], cfg, &mut traj)?;
    }
    Ok(traj)
}

/// Distance of `x(t)/‖x(t)‖` from the stationary profile at each sample.
pub fn profile_convergence(traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    let profile = stationary_profile(&traj.system)?;
    traj.iter()
        .map(|(t, p)| {
            let r = p.norm_sq().sqrt();
            if r == 0.0 {
                return Err(Error::ZeroVector);
            }
            let dev = p
                .coords()
                .iter()
                .zip(&profile)
                .map(|(x, q)| (x / r - q).powi(2))
                .sum::<f64>()
                .sqrt();
            Ok((t, dev))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chamber::RootSystem;

    fn pt(c: &[f64], s: RootSystem) -> ChamberPoint {
        ChamberPoint::new(c.to_vec(), s).unwrap()
    }

    #[test]
    fn special_solution_a() {
        let cfg = IntegratorConfig::default();
        let traj = integrate(&pt(&[1.0, -1.0], RootSystem::a(2).unwrap()), &[1.0], &cfg).unwrap();
        let x = traj.points[0].coords();
        assert!((x[0] - 2f64.sqrt()).abs() < 1e-9 && (x[1] + 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn one_dimensional_b() {
        let cfg = IntegratorConfig::default();
        let traj = integrate(&pt(&[1.0], RootSystem::b(1, 1.0).unwrap()), &[4.0], &cfg).unwrap();
        assert!((traj.points[0].coords()[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn empty_grid() {
        let cfg = IntegratorConfig::default();
        let traj = integrate(&pt(&[1.0, -1.0], RootSystem::a(2).unwrap()), &[], &cfg).unwrap();
        assert!(traj.is_empty());
    }

    #[test]
    fn rejects_boundary_start_and_bad_config() {
        let cfg = IntegratorConfig::default();
        let a = RootSystem::a(2).unwrap();
        assert!(matches!(integrate(&pt(&[0.0, 0.0], a), &[1.0], &cfg), Err(Error::NotInterior(_))));
        let bad = IntegratorConfig { boundary_guard: 1.5, ..cfg };
        assert!(integrate(&pt(&[1.0, 0.0], a), &[1.0], &bad).is_err());
    }

    #[test]
    fn unreachable_target_exhausts_budget() {
        let cfg = IntegratorConfig::default();
        let r = integrate(&pt(&[1.0], RootSystem::b(1, 1.0).unwrap()), &[1e300], &cfg);
        assert!(matches!(r, Err(Error::StepBudget { .. })));
    }

    #[test]
    fn hybrid_from_origin() {
        let cfg = IntegratorConfig::default();
        let traj = solve_hybrid(&pt(&[0.0, 0.0], RootSystem::a(2).unwrap()), &[0.0, 0.5], &cfg).unwrap();
        assert_eq!(traj.points[0].coords(), &[0.0, 0.0]);
        let x = traj.points[1].coords();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((x[0] - h).abs() < 1e-6 && (x[1] + h).abs() < 1e-6);
    }

    #[test]
    fn hybrid_matches_symmetric_from_collision() {
        let cfg = IntegratorConfig::default();
        let x0 = pt(&[1.0, 1.0, -2.0], RootSystem::a(3).unwrap());
        let times = [0.1, 0.5, 1.0];
        let h = solve_hybrid(&x0, &times, &cfg).unwrap();
        let s = symflow::solve_trajectory(&x0, &times).unwrap();
        for (p, q) in h.points.iter().zip(&s.points) {
            assert!(p.is_interior());
            for (a, b) in p.coords().iter().zip(q.coords()) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn hybrid_d_keeps_zero_coordinate() {
        let cfg = IntegratorConfig::default();
        let x0 = pt(&[2.0, 1.0, 0.0], RootSystem::d(3).unwrap());
        let traj = solve_hybrid(&x0, &[0.5, 2.0], &cfg).unwrap();
        let b = symflow::solve_trajectory(&pt(&[2.0, 1.0], RootSystem::b(2, 2.0).unwrap()), &[0.5, 2.0])
            .unwrap();
        for (p, q) in traj.points.iter().zip(&b.points) {
            assert_eq!(p.coords()[2], 0.0);
            assert!((p.coords()[0] - q.coords()[0]).abs() < 1e-8);
            assert!((p.coords()[1] - q.coords()[1]).abs() < 1e-8);
        }
    }

    #[test]
    fn profile_deviation_examples() {
        let a = RootSystem::a(3).unwrap();
        let special: Vec<ChamberPoint> = [0.0, 1.0, 10.0]
            .iter()
            .map(|&t| crate::orthopoly::special_solution(&a, 1.0, t).unwrap())
            .collect();
        let traj = Trajectory {
            system: a,
            times: vec![0.0, 1.0, 10.0],
            points: special,
            method: Method::ClosedForm,
            tolerances: Tolerances::default(),
        };
        for (_, dev) in profile_convergence(&traj).unwrap() {
            assert!(dev < 1e-12);
        }

        let a2 = RootSystem::a(2).unwrap();
        let cfg = IntegratorConfig::default();
        let traj = integrate(&pt(&[2.0, 1.0], a2), &[1.0, 1e3], &cfg).unwrap();
        let dev = profile_convergence(&traj).unwrap();
        assert!(dev[1].1 < dev[0].1);
    }

    #[test]
    fn profile_single_point_is_definition() {
        let a = RootSystem::a(2).unwrap();
        let x0 = pt(&[0.8, -0.6], a);
        let traj = Trajectory {
            system: a,
            times: vec![0.0],
            points: vec![x0],
            method: Method::ClosedForm,
            tolerances: Tolerances::default(),
        };
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = ((0.8 - h).powi(2) + (-0.6 + h).powi(2)).sqrt();
        assert!((profile_convergence(&traj).unwrap()[0].1 - expected).abs() < 1e-15);

        let origin = Trajectory {
            system: a,
            times: vec![0.0],
            points: vec![pt(&[0.0, 0.0], a)],
            method: Method::ClosedForm,
            tolerances: Tolerances::default(),
        };
        assert_eq!(profile_convergence(&origin), Err(Error::ZeroVector));
    }
}
