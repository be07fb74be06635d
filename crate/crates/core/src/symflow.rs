//! Exact solution engine in elementary symmetric coordinates.
//!
//! Along a solution the elementary symmetric polynomials of the positions
//! (`A`) or of the squared positions (`B`, `D`) satisfy a triangular linear
//! ODE with constant coefficients:
//!
//! * `A`: `e_1' = 0`, `e_k' = -½ (N-k+2)(N-k+1) e_{k-2}`
//! * `B`: `ẽ_k' = 2 (N-k+1)(N-k+ν) ẽ_{k-1}` with `ẽ_0 = 1`
//! * `D`: the `B` recursion with `ν = 0`, so `ẽ_N` is conserved
//!
//! so every coordinate is a polynomial in `t`. Positions are recovered as the
//! ordered real roots of the associated monic polynomial. The map is a
//! homeomorphism on the closed chamber, which makes starts on the boundary
//! well defined.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{FromPrimitive, One, Zero};
use serde::{Deserialize, Serialize};

use crate::chamber::{
    in_chamber, validate_times, ChamberPoint, Method, RootKind, RootSystem, Tolerances, Trajectory,
};
use crate::error::{Error, Result};
use crate::poly::{self, RootMode, IMAG_TOL};

/// Sign of the last coordinate, tracked separately for `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
    Zero,
}

impl Sign {
    fn of(x: f64) -> Self {
        if x > 0.0 {
            Sign::Plus
        } else if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Zero
        }
    }
}

/// Image of a chamber point under the (squared) elementary symmetric map.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricState {
    /// `e_1 … e_N` (`A`) or `ẽ_1 … ẽ_N` of the squared coordinates (`B`, `D`).
    pub values: Vec<f64>,
    /// `D` only: sign of `x_N`.
    pub sign_last: Option<Sign>,
    pub system: RootSystem,
}

impl SymmetricState {
    pub fn new(values: Vec<f64>, sign_last: Option<Sign>, system: RootSystem) -> Result<Self> {
        if values.len() != system.n() {
            return Err(Error::DimensionMismatch { expected: system.n(), got: values.len() });
        }
        let sign_last = match (system.kind(), sign_last) {
            (RootKind::D, Some(s)) => {
                if (s == Sign::Zero) != (values[values.len() - 1] == 0.0) {
                    return Err(Error::OutOfRange(
                        "sign of x_N must be zero exactly when the last coordinate vanishes".into(),
                    ));
                }
                Some(s)
            }
            (RootKind::D, None) => {
                Some(if values[values.len() - 1] == 0.0 { Sign::Zero } else { Sign::Plus })
            }
            _ => None,
        };
        Ok(Self { values, sign_last, system })
    }
}

/// Coordinates of the symmetric flow as polynomials in `t`, ascending coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePolynomialSet {
    /// `polys[k - 1]` is the `k`-th coordinate.
    pub polys: Vec<Vec<f64>>,
    pub system: RootSystem,
    pub sign_last: Option<Sign>,
}

impl TimePolynomialSet {
    /// Degree of the `k`-th coordinate (1-based), ignoring zero leading terms.
    pub fn degree(&self, k: usize) -> usize {
        let p = &self.polys[k - 1];
        p.iter().rposition(|c| *c != 0.0).unwrap_or(0)
    }
}

pub fn to_symmetric(x: &ChamberPoint) -> SymmetricState {
    let system = *x.system();
    let c = x.coords();
    match system.kind() {
        RootKind::A => SymmetricState {
            values: poly::elementary_symmetric(c),
            sign_last: None,
            system,
        },
        RootKind::B | RootKind::D => {
            let squares: Vec<f64> = c.iter().map(|v| v * v).collect();
            let mut values = poly::elementary_symmetric(&squares);
            let sign_last = (system.kind() == RootKind::D).then(|| Sign::of(c[c.len() - 1]));
            if sign_last == Some(Sign::Zero) {
                values[c.len() - 1] = 0.0;
            }
            SymmetricState { values, sign_last, system }
        }
    }
}

/// Clamp tolerance for squared coordinates that come out slightly negative.
fn square_clamp_tolerance(values: &[f64]) -> f64 {
    1e-10 * (1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

fn recover(s: &SymmetricState, mode: RootMode) -> Result<ChamberPoint> {
    let roots = poly::real_roots(&s.values, mode)?;
    let coords = match s.system.kind() {
        RootKind::A => roots,
        RootKind::B | RootKind::D => {
            let tau = square_clamp_tolerance(&s.values);
            let mut x = Vec::with_capacity(roots.len());
            for u in roots {
                if u < -tau {
                    return Err(Error::NegativeSquare { value: u, tolerance: tau });
                }
                x.push(u.max(0.0).sqrt());
            }
            let last = x.len() - 1;
            match s.sign_last {
                Some(Sign::Minus) => x[last] = -x[last],
                Some(Sign::Zero) => x[last] = 0.0,
                _ => {}
            }
            x
        }
    };
    Ok(ChamberPoint::new_unchecked(coords, s.system))
}

/// The chamber point whose symmetric image is `s`.
pub fn from_symmetric(s: &SymmetricState) -> Result<ChamberPoint> {
    recover(s, RootMode::Collapse)
}

/// Shared recursion for the float and exact paths. `values[k-1]` is the
/// initial value of coordinate `k`; returns ascending coefficient vectors.
pub(crate) fn propagate_generic<T>(values: &[T], kind: RootKind, nu: &T) -> Vec<Vec<T>>
where
    T: Clone
        + Zero
        + One
        + FromPrimitive
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
        + Neg<Output = T>,
{
    let n = values.len();
    let num = |v: usize| T::from_usize(v).expect("small integer");
    let mut polys: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    polys.push(vec![T::one()]);
    for k in 1..=n {
        let (source, factor) = match kind {
            RootKind::A if k == 1 => (None, T::zero()),
            RootKind::A => {
                let f = num((n - k + 2) * (n - k + 1)) / num(2);
                (Some(k - 2), -f)
            }
            RootKind::B | RootKind::D => {
                let nu = if kind == RootKind::D { T::zero() } else { nu.clone() };
                let f = num(2) * num(n - k + 1) * (num(n) - num(k) + nu);
                (Some(k - 1), f)
            }
        };
        let mut p = vec![values[k - 1].clone()];
        if let Some(src) = source {
            if !factor.is_zero() {
                for (j, c) in polys[src].iter().enumerate() {
                    let term = factor.clone() * c.clone() / num(j + 1);
                    if p.len() <= j + 1 {
                        p.resize(j + 2, T::zero());
                    }
                    p[j + 1] = p[j + 1].clone() + term;
                }
            }
        }
        polys.push(p);
    }
    polys.remove(0);
    polys
}

/// Exact polynomial solution of the symmetric-coordinate ODE started at `s0`.
pub fn propagate(s0: &SymmetricState) -> TimePolynomialSet {
    let polys = propagate_generic(&s0.values, s0.system.kind(), &s0.system.nu());
    TimePolynomialSet { polys, system: s0.system, sign_last: s0.sign_last }
}

pub fn evaluate_flow(p: &TimePolynomialSet, t: f64) -> SymmetricState {
    SymmetricState {
        values: p.polys.iter().map(|c| poly::horner(c, t)).collect(),
        sign_last: p.sign_last,
        system: p.system,
    }
}

/// Discriminant of the polynomial associated with `s` (in the squared
/// variables for `B`/`D`); zero iff it has a repeated root.
pub fn discriminant(s: &SymmetricState) -> f64 {
    poly::discriminant(&s.values)
}

fn reject_degenerate(x0: &ChamberPoint) -> Result<()> {
    let sys = x0.system();
    if sys.kind() == RootKind::B && sys.nu() == 0.0 && x0.coords()[sys.n() - 1] == 0.0 {
        return Err(Error::DegenerateNuZero);
    }
    Ok(())
}

/// Splits off the centre of mass for `A`; the flow commutes with translations.
fn centered(x0: &ChamberPoint) -> (f64, ChamberPoint) {
    if x0.system().kind() != RootKind::A {
        return (0.0, x0.clone());
    }
    let n = x0.coords().len() as f64;
    let mean = x0.coords().iter().sum::<f64>() / n;
    let c = x0.coords().iter().map(|v| v - mean).collect();
    (mean, ChamberPoint::new_unchecked(c, *x0.system()))
}

fn shifted(p: ChamberPoint, shift: f64) -> ChamberPoint {
    if shift == 0.0 {
        return p;
    }
    let sys = *p.system();
    ChamberPoint::new_unchecked(p.into_coords().into_iter().map(|v| v + shift).collect(), sys)
}

/// Solves from any point of the closed chamber by propagating the symmetric
/// coordinates and extracting roots. Points at `t > 0` are checked to lie in
/// the open chamber.
pub fn solve_trajectory(x0: &ChamberPoint, times: &[f64]) -> Result<Trajectory> {
    reject_degenerate(x0)?;
    validate_times(times, 0.0)?;
    let system = *x0.system();
    let (shift, start) = centered(x0);
    let flow = propagate(&to_symmetric(&start));
    let tolerances = Tolerances { root_imag: Some(IMAG_TOL), ..Default::default() };
    let mut traj = Trajectory::empty(system, Method::Symmetric, tolerances);
    for &t in times {
        let point = if t == 0.0 {
            x0.clone()
        } else {
            let p = shifted(from_symmetric(&evaluate_flow(&flow, t))?, shift);
            if !p.is_interior() {
                return Err(Error::BoundaryContact { t });
            }
            p
        };
        traj.times.push(t);
        traj.points.push(point);
    }
    Ok(traj)
}

/// Solution at a single time; see [`solve_trajectory`].
pub fn solve_at(x0: &ChamberPoint, t: f64) -> Result<ChamberPoint> {
    let mut traj = solve_trajectory(x0, &[t])?;
    Ok(traj.points.pop().expect("one sample"))
}

/// Time at which an interior solution, run backwards, first meets the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardExtension {
    pub t0: f64,
    pub point: ChamberPoint,
    /// Lower end of the search bracket, `-‖x0‖²/κ` (centred for `A`).
    pub lower_bound: f64,
}

fn strictly_interior_state(s: &SymmetricState) -> bool {
    let Ok(p) = recover(s, RootMode::Strict) else {
        return false;
    };
    if s.system.kind() != RootKind::A {
        // Reject squares that were clamped from below.
        let Ok(u) = poly::real_roots(&s.values, RootMode::Strict) else {
            return false;
        };
        let last = u[u.len() - 1];
        if last < 0.0 || (s.system.kind() == RootKind::B && last <= 0.0) {
            return false;
        }
    }
    in_chamber(p.coords(), &s.system, true).unwrap_or(false)
}

/// Finds the unique `t_0 < 0` with `x(t_0)` on the chamber boundary by
/// bisection on the interior predicate over `[-‖x0‖²/κ, 0]`.
pub fn backward_extension_time(x0: &ChamberPoint) -> Result<BackwardExtension> {
    if !x0.is_interior() {
        return Err(Error::NotInterior(x0.coords().to_vec()));
    }
    let system = *x0.system();
    let kappa = system.growth_rate();
    if kappa <= 0.0 {
        return Err(Error::BracketFailure(
            "growth rate is zero; the solution never reaches the boundary".into(),
        ));
    }
    let (shift, start) = centered(x0);
    let flow = propagate(&to_symmetric(&start));
    let lower_bound = -start.norm_sq() / kappa;

    let interior = |t: f64| strictly_interior_state(&evaluate_flow(&flow, t));
    // The solution reaches the origin at the lower bound, so rounding may
    // leave a tiny configuration there that still reads as interior.
    if interior(lower_bound) {
        let at_bound = from_symmetric(&evaluate_flow(&flow, lower_bound))?;
        if at_bound.norm_sq().sqrt() > 1e-6 * start.norm_sq().sqrt() {
            return Err(Error::BracketFailure(format!(
                "still interior at the lower bound t = {lower_bound}"
            )));
        }
    }
    let (mut lo, mut hi) = (lower_bound, 0.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if interior(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let point = shifted(from_symmetric(&evaluate_flow(&flow, hi))?, shift);
    Ok(BackwardExtension { t0: hi, point, lower_bound })
}

/// Exact rational arithmetic for the symmetric flow, used to check the
/// closed-form degrees and leading coefficients.
pub mod exact {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, Zero};

    use super::propagate_generic;
    use crate::chamber::RootKind;

    pub fn rational(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    pub fn elementary_symmetric(values: &[BigRational]) -> Vec<BigRational> {
        let mut e = vec![BigRational::zero(); values.len() + 1];
        e[0] = BigRational::one();
        for (m, v) in values.iter().enumerate() {
            for k in (1..=m + 1).rev() {
                let add = v * &e[k - 1];
                e[k] += add;
            }
        }
        e.remove(0);
        e
    }

    /// Exact flow polynomials from an integer start. For `B`/`D` the inputs are
    /// the coordinates, which get squared first.
    pub fn propagate(x0: &[i64], kind: RootKind, nu: &BigRational) -> Vec<Vec<BigRational>> {
        let coords: Vec<BigRational> = x0
            .iter()
            .map(|&v| match kind {
                RootKind::A => rational(v),
                _ => rational(v * v),
            })
            .collect();
        let values = elementary_symmetric(&coords);
        let mut polys = propagate_generic(&values, kind, nu);
        for p in polys.iter_mut() {
            while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
                p.pop();
            }
        }
        polys
    }

    fn factorial(n: usize) -> BigInt {
        (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
    }

    /// Coefficient of `t^{⌊k/2⌋}` in `e_k(x(t))` for `A`: for `k = 2l`,
    /// `(-1)^l N! / (2^l l! (N-2l)!)`; for `k = 2l+1`,
    /// `(-1)^l (N-1)! / (2^l l! (N-2l-1)!) · Σ x_{0,j}`.
    pub fn a_leading_coefficient(n: usize, k: usize, coordinate_sum: &BigRational) -> BigRational {
        let l = k / 2;
        let sign = if l % 2 == 1 { -BigRational::one() } else { BigRational::one() };
        let pow2 = BigInt::from(2).pow(l as u32);
        if k.is_multiple_of(2) {
            sign * BigRational::new(factorial(n), pow2 * factorial(l) * factorial(n - 2 * l))
        } else {
            sign * BigRational::new(
                factorial(n - 1),
                pow2 * factorial(l) * factorial(n - 2 * l - 1),
            ) * coordinate_sum
        }
    }

    /// Coefficient of `t^k` in `ẽ_k(x(t))` for `B`:
    /// `2^k (N+ν-1)(N+ν-2)⋯(N+ν-k) · C(N, k)`.
    pub fn b_leading_coefficient(n: usize, k: usize, nu: &BigRational) -> BigRational {
        let mut acc = rational(2).pow(k as i32);
        for j in 1..=k {
            acc *= rational(n as i64 - j as i64) + nu;
        }
        let binom = factorial(n) / (factorial(k) * factorial(n - k));
        acc * BigRational::from_integer(binom)
    }
}
