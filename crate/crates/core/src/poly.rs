//! Floating-point helpers for monic polynomials written in Vieta form
//! `P(z) = Σ_{j=0}^{N} (-1)^j e_j z^{N-j}` with `e_0 = 1`.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

/// Elementary symmetric polynomials `e_1 … e_N` of `values`, by expanding
/// `∏ (1 + v_i s)` one factor at a time.
pub fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for (m, &v) in values.iter().enumerate() {
        for k in (1..=m + 1).rev() {
            e[k] += v * e[k - 1];
        }
    }
    e.remove(0);
    e
}

/// Ascending coefficients `c_0 … c_N` of the monic Vieta polynomial of `e`.
pub fn vieta_coefficients(e: &[f64]) -> Vec<f64> {
    let n = e.len();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    for (j, &ej) in e.iter().enumerate() {
        let j = j + 1;
        c[n - j] = if j % 2 == 0 { ej } else { -ej };
    }
    c
}

pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn horner_with_derivative(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// How [`real_roots`] treats computed roots with a nonzero imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootMode {
    /// Any root with `|Im| > τ` is an error.
    Strict,
    /// Tight clusters that contain non-real roots are merged to their mean.
    /// Multiple real roots come out of the eigensolver as small complex
    /// clusters; their centroid is well conditioned.
    Collapse,
}

/// Cluster diameter, relative to the root scale, below which complex roots are merged.
const CLUSTER_TOL: f64 = 1e-4;
/// Imaginary-part tolerance, relative to `1 + root scale`.
pub const IMAG_TOL: f64 = 1e-8;
const NEWTON_STEPS: usize = 2;
const ABERTH_STEPS: usize = 50;

/// Real roots of the Vieta polynomial of `e`, sorted descending.
pub fn real_roots(e: &[f64], mode: RootMode) -> Result<Vec<f64>> {
    // Exact zero roots are split off before any floating-point work.
    let mut degree = e.len();
    while degree > 0 && e[degree - 1] == 0.0 {
        degree -= 1;
    }
    let zeros = e.len() - degree;
    let e = &e[..degree];

    let scale = e
        .iter()
        .enumerate()
        .map(|(j, v)| v.abs().powf(1.0 / (j + 1) as f64))
        .fold(0.0, f64::max);
    if !scale.is_finite() {
        return Err(Error::NonRealRoots { max_imag: f64::NAN, tolerance: 0.0 });
    }

    let mut roots = if degree == 0 {
        Vec::new()
    } else {
        let scaled: Vec<f64> = e
            .iter()
            .enumerate()
            .map(|(j, v)| v / scale.powi(j as i32 + 1))
            .collect();
        let coeffs = vieta_coefficients(&scaled);
        let tolerance = IMAG_TOL * (1.0 + scale) / scale;
        let eig = companion_eigenvalues(&coeffs)?;
        let mut w = accept_real(eig, tolerance, mode)?;
        if !aberth(&coeffs, &mut w) {
            polish(&coeffs, &mut w);
        }
        w.into_iter().map(|(w, _)| w * scale).collect()
    };
    roots.extend(std::iter::repeat_n(0.0, zeros));
    roots.sort_by(|a, b| b.total_cmp(a));
    Ok(roots)
}

fn accept_real(eig: Vec<Complex<f64>>, tolerance: f64, mode: RootMode) -> Result<Vec<(f64, bool)>> {
    let max_imag = eig.iter().fold(0.0, |m: f64, z| m.max(z.im.abs()));
    if max_imag <= tolerance {
        return Ok(eig.into_iter().map(|z| (z.re, true)).collect());
    }
    if mode == RootMode::Strict {
        return Err(Error::NonRealRoots { max_imag, tolerance });
    }
    // Single-linkage clustering in the complex plane.
    let n = eig.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (eig[i] - eig[j]).norm() <= CLUSTER_TOL {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a] = b;
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut label, i)).collect();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let members: Vec<usize> = (0..n).filter(|&j| roots[j] == roots[i]).collect();
        let needs_merge = members.iter().any(|&j| eig[j].im.abs() > tolerance);
        if !needs_merge {
            out.push((eig[i].re, true));
            continue;
        }
        let mean = members.iter().fold(Complex::new(0.0, 0.0), |acc, &j| acc + eig[j])
            / members.len() as f64;
        if members.len() < 2 || mean.im.abs() > tolerance {
            return Err(Error::NonRealRoots { max_imag, tolerance });
        }
        out.push((mean.re, false));
    }
    Ok(out)
}

/// Aberth–Ehrlich refinement of a full set of distinct real roots. The
/// mutual repulsion term keeps neighbours in a tight cluster from converging
/// to the same zero. Leaves `roots` untouched and returns false if any root
/// is a merged cluster or the iteration breaks down.
fn aberth(coeffs: &[f64], roots: &mut [(f64, bool)]) -> bool {
    if roots.len() < 2 || roots.iter().any(|r| !r.1) {
        return false;
    }
    let mut w: Vec<f64> = roots.iter().map(|r| r.0).collect();
    for _ in 0..ABERTH_STEPS {
        let mut converged = true;
        for i in 0..w.len() {
            let (p, dp) = horner_with_derivative(coeffs, w[i]);
            if p == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repel: f64 = (0..w.len()).filter(|&j| j != i).map(|j| 1.0 / (w[i] - w[j])).sum();
            let step = ratio / (1.0 - ratio * repel);
            if !step.is_finite() {
                return false;
            }
            w[i] -= step;
            if step.abs() > 4.0 * f64::EPSILON * (1.0 + w[i].abs()) {
                converged = false;
            }
        }
        if converged {
            break;
        }
    }
    let mut sorted = w.clone();
    sorted.sort_by(f64::total_cmp);
    if sorted.iter().any(|v| !v.is_finite()) || sorted.windows(2).any(|p| p[0] == p[1]) {
        return false;
    }
    for (r, v) in roots.iter_mut().zip(w) {
        r.0 = v;
    }
    true
}

/// Newton steps on isolated real roots; a step is kept only if it lowers
/// `|P|` and stays closer to its root than to any neighbour.
fn polish(coeffs: &[f64], roots: &mut [(f64, bool)]) {
    let values: Vec<f64> = roots.iter().map(|r| r.0).collect();
    for (i, (r, isolated)) in roots.iter_mut().enumerate() {
        if !*isolated {
            continue;
        }
        let spacing = values
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, v)| (v - *r).abs())
            .fold(f64::INFINITY, f64::min);
        let mut x = *r;
        for _ in 0..NEWTON_STEPS {
            let (p, dp) = horner_with_derivative(coeffs, x);
            if p == 0.0 || dp == 0.0 {
                break;
            }
            let next = x - p / dp;
            if (next - *r).abs() >= 0.5 * spacing || horner(coeffs, next).abs() >= p.abs() {
                break;
            }
            x = next;
        }
        *r = x;
    }
}

/// Eigenvalues of the balanced companion matrix of the monic polynomial with
/// ascending coefficients `coeffs`.
fn companion_eigenvalues(coeffs: &[f64]) -> Result<Vec<Complex<f64>>> {
    let n = coeffs.len() - 1;
    if n == 1 {
        return Ok(vec![Complex::new(-coeffs[0], 0.0)]);
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        m[(0, j)] = -coeffs[n - 1 - j];
    }
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    balance(&mut m);
    let schur = nalgebra::Schur::try_new(m, f64::EPSILON, 10_000)
        .ok_or(Error::NonRealRoots { max_imag: f64::NAN, tolerance: 0.0 })?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Parlett–Reinsch balancing by powers of two.
fn balance(m: &mut DMatrix<f64>) {
    const RADIX: f64 = 2.0;
    let n = m.nrows();
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

fn trim(p: &mut Vec<f64>, tol: f64) {
    while p.len() > 1 && p.last().is_some_and(|c| c.abs() <= tol) {
        p.pop();
    }
}

/// Remainder of `a` divided by `b` (ascending coefficients, `b` nonzero leading).
fn remainder(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead = b[db];
    while r.len() > db && !r.is_empty() {
        let q = r[r.len() - 1] / lead;
        let shift = r.len() - 1 - db;
        for (k, &bk) in b.iter().enumerate() {
            r[shift + k] -= q * bk;
        }
        r.pop();
    }
    if r.is_empty() {
        r.push(0.0);
    }
    r
}

/// Resultant of two polynomials (ascending coefficients) by the Euclidean
/// scheme `Res(A, B) = (-1)^{mn} lc(B)^{m - deg R} Res(B, R)`, `R = A mod B`.
/// Remainders below `1e-13` of the input scale count as zero.
pub fn resultant(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(0.0f64, |m, c| m.max(c.abs()));
    let tol = 1e-13 * scale;
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a, tol);
    trim(&mut b, tol);
    let mut acc = 1.0;
    loop {
        let m = a.len() - 1;
        let n = b.len() - 1;
        if n == 0 {
            let lb = b[0];
            if lb.abs() <= tol {
                return 0.0;
            }
            return acc * lb.powi(m as i32);
        }
        let mut r = remainder(&a, &b);
        trim(&mut r, tol);
        if r.len() == 1 && r[0].abs() <= tol {
            return 0.0;
        }
        let deg_r = r.len() - 1;
        if (m * n) % 2 == 1 {
            acc = -acc;
        }
        acc *= b[n].powi((m - deg_r) as i32);
        a = b;
        b = r;
    }
}

/// Discriminant of the monic Vieta polynomial of `e`, `∏_{i<j} (r_i - r_j)²`.
pub fn discriminant(e: &[f64]) -> f64 {
    let n = e.len();
    if n <= 1 {
        return 1.0;
    }
    let c = vieta_coefficients(e);
    let dc: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect();
    let sign = if (n * (n - 1) / 2) % 2 == 1 { -1.0 } else { 1.0 };
    sign * resultant(&c, &dc)
}
