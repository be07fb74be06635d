use cms_core::chamber::{drift, in_chamber, log_weight, ChamberPoint, RootKind, RootSystem};
use cms_core::integrator::{integrate, IntegratorConfig};
use cms_core::orthopoly::special_solution;
use cms_core::par::Execution;
use cms_core::Error;
use cms_core::sde::{freezing_deviation, SdeConfig};
use cms_core::symflow::{evaluate_flow, from_symmetric, propagate, solve_at, solve_trajectory, to_symmetric, Sign};
use proptest::prelude::*;

fn system_strategy(max_n: usize) -> impl Strategy<Value = RootSystem> {
    (0..3usize, 2..=max_n, prop_oneof![Just(0.5), Just(1.0), Just(3.0), 0.1..5.0f64]).prop_map(
        |(kind, n, nu)| match kind {
            0 => RootSystem::a(n).unwrap(),
            1 => RootSystem::b(n, nu).unwrap(),
            _ => RootSystem::d(n).unwrap(),
        },
    )
}

/// Interior point with every facet distance at least `min_gap`.
fn interior(sys: RootSystem, min_gap: f64) -> impl Strategy<Value = ChamberPoint> {
    let n = sys.n();
    let lead = match sys.kind() {
        RootKind::A => -3.0..3.0f64,
        RootKind::B => min_gap..2.0,
        RootKind::D => -1.0..1.0,
    };
    (lead, proptest::collection::vec(min_gap..1.5, n - 1)).prop_map(move |(last, gaps)| {
        // Build from the last coordinate upwards.
        let mut x = vec![0.0; n];
        x[n - 1] = last;
        for i in (0..n - 1).rev() {
            x[i] = x[i + 1] + gaps[i];
        }
        if sys.kind() == RootKind::D && x[n - 2] + x[n - 1] < min_gap {
            let shift = min_gap - (x[n - 2] + x[n - 1]);
            x[..n - 1].iter_mut().for_each(|v| *v += shift);
        }
        ChamberPoint::new(x, sys).unwrap()
    })
}

fn system_and_point(max_n: usize) -> impl Strategy<Value = ChamberPoint> {
    system_strategy(max_n).prop_flat_map(|sys| interior(sys, 0.05))
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
}

/// First-order error bound for recovering each coordinate from rounded
/// symmetric coordinates: a root `r` of `∏(z - r_j)` moves by at most
/// `ε ∏_j(|r| + |r_j|) / ∏_{j≠i}|r - r_j|` per unit relative perturbation of
/// the coefficients.
fn round_trip_bound(x: &ChamberPoint) -> Vec<f64> {
    let squared = x.system().kind() != RootKind::A;
    let roots: Vec<f64> = x.coords().iter().map(|v| if squared { v * v } else { *v }).collect();
    let n = roots.len();
    let slack = 8.0 * n as f64 * f64::EPSILON;
    let scale = x.coords().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (0..n)
        .map(|i| {
            let r = roots[i];
            let num: f64 = roots.iter().map(|q| r.abs() + q.abs()).product();
            let den: f64 = (0..n).filter(|&j| j != i).map(|j| (r - roots[j]).abs()).product();
            let du = slack * num / den;
            let dx = if squared { du / (x.coords()[i].abs() + du.sqrt()) } else { du };
            dx + 4.0 * f64::EPSILON * scale
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn drift_is_half_gradient_of_log_weight(x0 in system_and_point(6)) {
        let sys = *x0.system();
        let f = drift(x0.coords(), &sys).unwrap();
        let h = 1e-6;
        for i in 0..sys.n() {
            let mut up = x0.coords().to_vec();
            let mut down = up.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (log_weight(&up, &sys).unwrap() - log_weight(&down, &sys).unwrap()) / (4.0 * h);
            prop_assert!((fd - f[i]).abs() < 1e-5 * (1.0 + f[i].abs()), "{} vs {}", fd, f[i]);
        }
    }

    #[test]
    fn sorting_lands_in_closed_chamber(sys in system_strategy(8), v in proptest::collection::vec(-5.0..5.0f64, 8)) {
        let p = ChamberPoint::sorted(v[..sys.n()].to_vec(), sys).unwrap();
        prop_assert!(in_chamber(p.coords(), &sys, false).unwrap());
    }

    #[test]
    fn symmetric_round_trip_within_conditioning(x0 in system_strategy(12).prop_flat_map(|s| interior(s, 0.01))) {
        let bound = round_trip_bound(&x0);
        let back = match from_symmetric(&to_symmetric(&x0)) {
            Ok(back) => back,
            // Tight clusters can lose realness to rounding alone.
            Err(Error::NonRealRoots { max_imag, .. }) => {
                let worst = bound.iter().fold(0.0f64, |m, b| m.max(*b));
                prop_assert!(max_imag <= worst, "imaginary part {} beyond bound {}", max_imag, worst);
                return Ok(());
            }
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        for ((a, b), tol) in back.coords().iter().zip(x0.coords()).zip(&bound) {
            prop_assert!((a - b).abs() <= *tol, "{} vs {} (bound {})", a, b, tol);
        }
        prop_assert_eq!(to_symmetric(&back).sign_last, to_symmetric(&x0).sign_last);
    }

    #[test]
    fn first_or_last_symmetric_coordinate_is_conserved(x0 in system_and_point(8), t in 0.0..10.0f64) {
        let sys = *x0.system();
        let flow = propagate(&to_symmetric(&x0));
        let s0 = to_symmetric(&x0);
        let st = evaluate_flow(&flow, t);
        match sys.kind() {
            RootKind::A => prop_assert_eq!(st.values[0], s0.values[0]),
            RootKind::D => {
                prop_assert_eq!(st.values[sys.n() - 1], s0.values[sys.n() - 1]);
                prop_assert_eq!(st.sign_last, s0.sign_last);
            }
            RootKind::B => {}
        }
    }

    #[test]
    fn translation_covariance_for_a(x0 in interior(RootSystem::a(5).unwrap(), 0.05), c in -10.0..10.0f64, t in 0.01..5.0f64) {
        let moved = ChamberPoint::new(x0.coords().iter().map(|v| v + c).collect(), *x0.system()).unwrap();
        let a = solve_at(&x0, t).unwrap();
        let b = solve_at(&moved, t).unwrap();
        let shifted: Vec<f64> = a.coords().iter().map(|v| v + c).collect();
        prop_assert!(close(b.coords(), &shifted, 1e-9));
    }

    #[test]
    fn scaling_covariance(x0 in system_and_point(6), c in 0.1..10.0f64, t in 0.01..5.0f64) {
        let sys = *x0.system();
        let scaled = ChamberPoint::new(x0.coords().iter().map(|v| v / c.sqrt()).collect(), sys).unwrap();
        let big = solve_at(&x0, c * t).unwrap();
        let small = solve_at(&scaled, t).unwrap();
        let expected: Vec<f64> = big.coords().iter().map(|v| v / c.sqrt()).collect();
        prop_assert!(close(small.coords(), &expected, 1e-8));
    }

    #[test]
    fn special_solutions_grow_linearly(sys in system_strategy(10), c in 0.1..3.0f64, t in 0.0..10.0f64) {
        let p0 = special_solution(&sys, c, 0.0).unwrap();
        let pt = special_solution(&sys, c, t).unwrap();
        let defect = pt.norm_sq() - p0.norm_sq() - sys.growth_rate() * t;
        prop_assert!(defect.abs() < 1e-12 * (1.0 + pt.norm_sq()));
    }

    #[test]
    fn engines_agree_and_stay_interior(x0 in system_and_point(5)) {
        let times = [0.1, 0.5, 1.0];
        let s = solve_trajectory(&x0, &times).unwrap();
        let k = integrate(&x0, &times, &IntegratorConfig::default()).unwrap();
        for (p, q) in s.points.iter().zip(&k.points) {
            prop_assert!(p.is_interior() && q.is_interior());
            prop_assert!(close(p.coords(), q.coords(), 1e-7));
        }
    }

    #[test]
    fn d_sign_of_last_coordinate_is_kept(x0 in interior(RootSystem::d(4).unwrap(), 0.05), t in 0.01..5.0f64) {
        let p = solve_at(&x0, t).unwrap();
        let before = to_symmetric(&x0).sign_last;
        let after = to_symmetric(&p).sign_last;
        prop_assert_eq!(before, after);
        prop_assert!(before != Some(Sign::Zero) || p.coords()[3] == 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sde_results_ignore_scheduling(seed in any::<u64>(), beta in 5.0..500.0f64) {
        let x0 = ChamberPoint::new(vec![1.0, 0.0, -1.0], RootSystem::a(3).unwrap()).unwrap();
        let base = SdeConfig { n_paths: 8, dt: 1e-3, seed, ..Default::default() };
        let seq = freezing_deviation(&x0, 0.1, &[beta], &SdeConfig { execution: Execution::Sequential, ..base }).unwrap();
        let par = freezing_deviation(&x0, 0.1, &[beta], &SdeConfig { execution: Execution::Parallel, ..base }).unwrap();
        prop_assert_eq!(seq, par);
    }
}
