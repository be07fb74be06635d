//! Hermite and Laguerre zeros, their electrostatic equilibrium relations, and
//! the self-similar solutions built from them.
//!
//! Zeros come from the symmetric tridiagonal Jacobi matrix of the monic
//! three-term recurrence, followed by a few Newton steps on the recurrence.

use serde::{Deserialize, Serialize};

use crate::chamber::{ChamberPoint, RootKind, RootSystem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Hermite,
    Laguerre,
}

/// Zeros of a Hermite or Laguerre polynomial, sorted strictly decreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    pub family: Family,
    pub n: usize,
    /// Laguerre parameter; 0 for Hermite.
    pub alpha: f64,
    pub zeros: Vec<f64>,
}

const NEWTON_STEPS: usize = 3;

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (`off[i]` couples rows `i` and `i + 1`), by implicit QL
/// with Wilkinson shifts.
pub(crate) fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d
}

/// Monic three-term recurrence `p_{k+1} = (x - a_k) p_k - b_k p_{k-1}`.
struct Recurrence {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Recurrence {
    fn hermite(n: usize) -> Self {
        Self { a: vec![0.0; n], b: (0..n).map(|k| k as f64 / 2.0).collect() }
    }

    fn laguerre(n: usize, alpha: f64) -> Self {
        Self {
            a: (0..n).map(|k| 2.0 * k as f64 + alpha + 1.0).collect(),
            b: (0..n).map(|k| k as f64 * (k as f64 + alpha)).collect(),
        }
    }

    /// Value and derivative of the degree-`n` monic polynomial at `x`.
    fn eval(&self, x: f64) -> (f64, f64) {
        let (mut p0, mut p1) = (0.0, 1.0);
        let (mut dp0, mut dp1) = (0.0, 0.0);
        for k in 0..self.a.len() {
            let p2 = (x - self.a[k]) * p1 - self.b[k] * p0;
            let dp2 = p1 + (x - self.a[k]) * dp1 - self.b[k] * dp0;
            p0 = p1;
            p1 = p2;
            dp0 = dp1;
            dp1 = dp2;
        }
        (p1, dp1)
    }

    fn zeros(&self) -> Vec<f64> {
        let off: Vec<f64> = self.b.iter().skip(1).map(|b| b.sqrt()).collect();
        let mut z = tridiagonal_eigenvalues(&self.a, &off);
        for zi in z.iter_mut() {
            for _ in 0..NEWTON_STEPS {
                let (p, dp) = self.eval(*zi);
                if dp == 0.0 || !p.is_finite() || !dp.is_finite() {
                    break;
                }
                let next = *zi - p / dp;
                if self.eval(next).0.abs() >= p.abs() {
                    break;
                }
                *zi = next;
            }
        }
        z.sort_by(|a, b| b.total_cmp(a));
        z
    }
}

/// Zeros of the physicists' Hermite polynomial `H_n`.
pub fn hermite_zeros(n: usize) -> Result<ZeroSet> {
    if n == 0 {
        return Err(Error::OutOfRange("Hermite degree must be >= 1".into()));
    }
    let mut zeros = Recurrence::hermite(n).zeros();
    // Enforce the exact reflection symmetry.
    for i in 0..n / 2 {
        let m = 0.5 * (zeros[i] - zeros[n - 1 - i]);
        zeros[i] = m;
        zeros[n - 1 - i] = -m;
    }
    if n % 2 == 1 {
        zeros[n / 2] = 0.0;
    }
    Ok(ZeroSet { family: Family::Hermite, n, alpha: 0.0, zeros })
}

/// Zeros of the Laguerre polynomial `L_n^{(α)}`, `α > -1` or `α = -1`.
///
/// For `α = -1` the identity `L_n^{(-1)}(x) = -(x/n) L_{n-1}^{(1)}(x)` is used:
/// the zeros are those of `L_{n-1}^{(1)}` together with an exact 0.
pub fn laguerre_zeros(n: usize, alpha: f64) -> Result<ZeroSet> {
    if n == 0 {
        return Err(Error::OutOfRange("Laguerre degree must be >= 1".into()));
    }
    if alpha.is_nan() || alpha < -1.0 {
        return Err(Error::OutOfRange(format!("Laguerre parameter alpha = {alpha} < -1")));
    }
    let zeros = if alpha == -1.0 {
        let mut z = if n > 1 { Recurrence::laguerre(n - 1, 1.0).zeros() } else { Vec::new() };
        z.push(0.0);
        z
    } else {
        Recurrence::laguerre(n, alpha).zeros()
    };
    Ok(ZeroSet { family: Family::Laguerre, n, alpha, zeros })
}

/// Per-zero defect of the electrostatic equilibrium equations.
///
/// * Hermite (system `A`): `r_i = Σ_{j≠i} 1/(z_i - z_j) - z_i`.
/// * Laguerre with `α = ν - 1` (system `B`, or `D` with `ν = 0`):
///   `r_i = 2 z_i Σ_{j≠i} 1/(z_i - z_j) + ν - z_i`.
pub fn stieltjes_residual(zeros: &ZeroSet, system: &RootSystem) -> Result<Vec<f64>> {
    let z = &zeros.zeros;
    if z.len() != system.n() {
        return Err(Error::DimensionMismatch { expected: system.n(), got: z.len() });
    }
    match (system.kind(), zeros.family) {
        (RootKind::A, Family::Hermite) => {}
        (RootKind::B, Family::Laguerre) | (RootKind::D, Family::Laguerre) => {
            let nu = system.nu();
            if (zeros.alpha - (nu - 1.0)).abs() > 1e-12 * (1.0 + nu.abs()) {
                return Err(Error::OutOfRange(format!(
                    "Laguerre parameter {} does not match nu - 1 = {}",
                    zeros.alpha,
                    nu - 1.0
                )));
            }
        }
        (kind, family) => {
            return Err(Error::OutOfRange(format!("{family:?} zeros do not belong to system {kind}")))
        }
    }
    zeros.residual()
}

impl ZeroSet {
    /// Electrostatic defect of these zeros for the parameter they were built
    /// with (`ν = α + 1` for Laguerre); see [`stieltjes_residual`].
    pub fn residual(&self) -> Result<Vec<f64>> {
        let z = &self.zeros;
        if z.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::RepeatedZeros(z.clone()));
        }
        let nu = (self.family == Family::Laguerre).then_some(self.alpha + 1.0);
        let residual = (0..z.len())
            .map(|i| {
                let s: f64 = (0..z.len()).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
                match nu {
                    None => s - z[i],
                    Some(nu) => 2.0 * z[i] * s + nu - z[i],
                }
            })
            .collect();
        Ok(residual)
    }
}

/// Direction vector of the self-similar solution: Hermite zeros for `A`, and
/// `y` with `y_i² = 2 z_i` for the Laguerre zeros `z` of `L_N^{(ν-1)}` (`B`)
/// or `L_N^{(-1)}` (`D`).
pub fn special_direction(system: &RootSystem) -> Result<Vec<f64>> {
    match system.kind() {
        RootKind::A => Ok(hermite_zeros(system.n())?.zeros),
        RootKind::B if system.nu() <= 0.0 => Err(Error::OutOfRange(
            "the self-similar solution of B requires nu > 0".into(),
        )),
        RootKind::B => Ok(squared_profile(&laguerre_zeros(system.n(), system.nu() - 1.0)?)),
        RootKind::D => Ok(squared_profile(&laguerre_zeros(system.n(), -1.0)?)),
    }
}

fn squared_profile(z: &ZeroSet) -> Vec<f64> {
    z.zeros.iter().map(|&zi| (2.0 * zi).max(0.0).sqrt()).collect()
}

/// Self-similar solution: `√(2t + c²)·z` for `A`, `√(t + c²)·y` for `B`/`D`.
pub fn special_solution(system: &RootSystem, c: f64, t: f64) -> Result<ChamberPoint> {
    if c.is_nan() || c < 0.0 || !t.is_finite() {
        return Err(Error::OutOfRange(format!("need c >= 0 and finite t, got c = {c}, t = {t}")));
    }
    let radius_sq = match system.kind() {
        RootKind::A => 2.0 * t + c * c,
        RootKind::B | RootKind::D => t + c * c,
    };
    if radius_sq < 0.0 {
        return Err(Error::OutOfRange(format!("t = {t} is before the start of the solution")));
    }
    let scale = radius_sq.sqrt();
    let v = special_direction(system)?;
    Ok(ChamberPoint::new_unchecked(v.into_iter().map(|v| scale * v).collect(), *system))
}

/// Unit vector that `x(t)/‖x(t)‖` approaches as `t → ∞`.
pub fn stationary_profile(system: &RootSystem) -> Result<Vec<f64>> {
    let v = special_direction(system)?;
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(v.into_iter().map(|x| x / norm).collect())
}
