//! Root systems, Weyl chambers and the singular drift fields.
//!
//! Each root system fixes a closed cone of ordered coordinate vectors and a
//! weight `w` on it. The freezing-limit dynamics is the gradient flow
//! `dx/dt = ½ ∇ ln w(x)` on the open chamber:
//!
//! * `A`: `w(x) = ∏_{i<j} (x_i - x_j)²`
//! * `B`: `w(x) = ∏_{i<j} (x_i² - x_j²)² · ∏_i x_i^{2ν}`
//! * `D`: `w(x) = ∏_{i<j} (x_i² - x_j²)²`

use std::f64::consts::SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative floor below which a drift denominator counts as a boundary hit.
pub const SINGULARITY_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RootKind {
    A,
    B,
    D,
}

impl fmt::Display for RootKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RootKind::A => "A",
            RootKind::B => "B",
            RootKind::D => "D",
        };
        f.write_str(s)
    }
}

/// A root system together with its particle count and (for `B`) the wall
/// multiplicity `ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootSystem {
    kind: RootKind,
    n: usize,
    nu: f64,
}

impl RootSystem {
    pub fn new(kind: RootKind, n: usize, nu: f64) -> Result<Self> {
        match kind {
            RootKind::A | RootKind::D if n < 2 => Err(Error::InvalidSystem(format!(
                "{kind} requires at least 2 particles, got {n}"
            ))),
            RootKind::B if n < 1 => Err(Error::InvalidSystem("B requires n >= 1".into())),
            RootKind::B if !(nu.is_finite() && nu >= 0.0) => Err(Error::InvalidSystem(format!(
                "B requires a finite multiplicity nu >= 0, got {nu}"
            ))),
            RootKind::B => Ok(Self { kind, n, nu }),
            _ => Ok(Self { kind, n, nu: 0.0 }),
        }
    }

    pub fn a(n: usize) -> Result<Self> {
        Self::new(RootKind::A, n, 0.0)
    }

    pub fn b(n: usize, nu: f64) -> Result<Self> {
        Self::new(RootKind::B, n, nu)
    }

    pub fn d(n: usize) -> Result<Self> {
        Self::new(RootKind::D, n, 0.0)
    }

    pub fn kind(&self) -> RootKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Wall multiplicity; always 0 for `A` and `D`.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Rate `κ` in the growth identity `‖x(t)‖² = ‖x(0)‖² + κ t`.
    pub fn growth_rate(&self) -> f64 {
        let n = self.n as f64;
        match self.kind {
            RootKind::A => n * (n - 1.0),
            RootKind::B => 2.0 * n * (n + self.nu - 1.0),
            RootKind::D => 2.0 * n * (n - 1.0),
        }
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok(())
    }

    /// Signed distances of `x` to the reflecting hyperplanes bounding the chamber.
    /// All are nonnegative iff `x` is in the closed chamber.
    fn facet_distances<'x>(&self, x: &'x [f64]) -> impl Iterator<Item = f64> + 'x {
        let n = x.len();
        let gaps = (0..n.saturating_sub(1)).map(move |i| (x[i] - x[i + 1]) / SQRT_2);
        let wall = match self.kind {
            RootKind::A => None,
            RootKind::B => Some(x[n - 1]),
            RootKind::D => Some((x[n - 2] + x[n - 1]) / SQRT_2),
        };
        gaps.chain(wall)
    }
}

impl fmt::Display for RootSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RootKind::B => write!(f, "B_{} (nu = {})", self.n, self.nu),
            RootKind::A => write!(f, "A_{}", self.n - 1),
            RootKind::D => write!(f, "D_{}", self.n),
        }
    }
}

/// Membership test for the closed (`strict = false`) or open chamber.
pub fn in_chamber(x: &[f64], system: &RootSystem, strict: bool) -> Result<bool> {
    system.check_len(x)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Ok(false);
    }
    Ok(system
        .facet_distances(x)
        .all(|d| if strict { d > 0.0 } else { d >= 0.0 }))
}

/// A vector in the closed Weyl chamber of its root system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChamberPoint {
    coords: Vec<f64>,
    system: RootSystem,
}

impl ChamberPoint {
    pub fn new(coords: Vec<f64>, system: RootSystem) -> Result<Self> {
        if !in_chamber(&coords, &system, false)? {
            return Err(Error::OutsideChamber(coords));
        }
        Ok(Self { coords, system })
    }

    /// Sorts `coords` into the chamber: descending for `A`; descending absolute
    /// values for `B`; for `D` descending absolute values with the sign of the
    /// product of the inputs carried by the last coordinate.
    pub fn sorted(mut coords: Vec<f64>, system: RootSystem) -> Result<Self> {
        system.check_len(&coords)?;
        reflect_into_chamber(&mut coords, system.kind);
        Self::new(coords, system)
    }

    pub(crate) fn new_unchecked(coords: Vec<f64>, system: RootSystem) -> Self {
        Self { coords, system }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn system(&self) -> &RootSystem {
        &self.system
    }

    pub fn is_interior(&self) -> bool {
        self.system.facet_distances(&self.coords).all(|d| d > 0.0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|v| v * v).sum()
    }
}

/// Maps an arbitrary vector into the closed chamber with a Weyl group element.
pub(crate) fn reflect_into_chamber(x: &mut [f64], kind: RootKind) {
    match kind {
        RootKind::A => x.sort_by(|a, b| b.total_cmp(a)),
        RootKind::B => {
            x.iter_mut().for_each(|v| *v = v.abs());
            x.sort_by(|a, b| b.total_cmp(a));
        }
        RootKind::D => {
            let negative = x.iter().filter(|v| v.is_sign_negative() && **v != 0.0).count() % 2 == 1;
            x.iter_mut().for_each(|v| *v = v.abs());
            x.sort_by(|a, b| b.total_cmp(a));
            if negative {
                if let Some(last) = x.last_mut() {
                    *last = -*last;
                }
            }
        }
    }
}

/// Euclidean distance to the chamber boundary, taken as the minimum over the
/// bounding hyperplanes.
pub fn boundary_distance(x: &ChamberPoint) -> f64 {
    x.system
        .facet_distances(&x.coords)
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
}

/// Smallest magnitude among the denominators appearing in the drift.
fn min_denominator(x: &[f64], system: &RootSystem) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            m = m.min((x[i] - x[j]).abs());
            if system.kind != RootKind::A {
                m = m.min((x[i] + x[j]).abs());
            }
        }
        if system.kind == RootKind::B && system.nu != 0.0 {
            m = m.min(x[i].abs());
        }
    }
    m
}

fn check_singular(x: &[f64], system: &RootSystem) -> Result<()> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let floor = SINGULARITY_FLOOR * (1.0 + norm);
    let denominator = min_denominator(x, system);
    if denominator.is_nan() || denominator < floor || !norm.is_finite() {
        return Err(Error::Singular { denominator, floor });
    }
    Ok(())
}

/// Right-hand side of the freezing-limit ODE, `½ ∇ ln w(x)`.
pub fn drift(x: &[f64], system: &RootSystem) -> Result<Vec<f64>> {
    let mut out = vec![0.0; x.len()];
    drift_into(x, system, &mut out)?;
    Ok(out)
}

/// Allocation-free variant of [`drift`].
pub fn drift_into(x: &[f64], system: &RootSystem, out: &mut [f64]) -> Result<()> {
    system.check_len(x)?;
    check_singular(x, system)?;
    out.iter_mut().for_each(|v| *v = 0.0);
    let n = x.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = 1.0 / (x[i] - x[j]);
            out[i] += d;
            out[j] -= d;
            if system.kind != RootKind::A {
                let s = 1.0 / (x[i] + x[j]);
                out[i] += s;
                out[j] += s;
            }
        }
    }
    if system.kind == RootKind::B && system.nu != 0.0 {
        for i in 0..n {
            out[i] += system.nu / x[i];
        }
    }
    Ok(())
}

/// `ln w(x)` for the weight whose half-gradient is [`drift`].
pub fn log_weight(x: &[f64], system: &RootSystem) -> Result<f64> {
    system.check_len(x)?;
    check_singular(x, system)?;
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            acc += match system.kind {
                RootKind::A => 2.0 * (x[i] - x[j]).abs().ln(),
                _ => 2.0 * ((x[i] - x[j]).abs().ln() + (x[i] + x[j]).abs().ln()),
            };
        }
    }
    if system.kind == RootKind::B && system.nu != 0.0 {
        acc += 2.0 * system.nu * x.iter().map(|v| v.abs().ln()).sum::<f64>();
    }
    Ok(acc)
}

/// Which engine produced a [`Trajectory`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Symmetric,
    RungeKutta,
    Hybrid,
    ClosedForm,
    EulerMaruyama,
}

/// Tolerances recorded alongside a trajectory; unused entries stay `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub abs_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub boundary_guard: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bootstrap_eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub root_imag: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dt: Option<f64>,
}

/// Sampled solution: strictly increasing times and one chamber point per time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub system: RootSystem,
    pub times: Vec<f64>,
    pub points: Vec<ChamberPoint>,
    pub method: Method,
    pub tolerances: Tolerances,
}

impl Trajectory {
    pub fn empty(system: RootSystem, method: Method, tolerances: Tolerances) -> Self {
        Self { system, times: Vec::new(), points: Vec::new(), method, tolerances }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &ChamberPoint)> {
        self.times.iter().copied().zip(self.points.iter())
    }
}

/// Checks that `times` is strictly increasing with every entry `>= start`.
pub(crate) fn validate_times(times: &[f64], start: f64) -> Result<()> {
    let ok = times.iter().all(|t| t.is_finite() && *t >= start)
        && times.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidTimes { start })
    }
}
