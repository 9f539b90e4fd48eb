//! Cross-validation of the closed-form references against adaptive
//! quadrature of the hazard along each example's exact flow. The quadrature
//! lives in `common` and shares nothing with the crate's integrator.

mod common;

use common::quad;
use pdmp_core::{
    chv_simulate, compare_to_oracle, example1_jump, example1_oracle, example2_jump, example2_oracle,
    example3, example3_rate, ChvOptions, CompareError, ExpStream, SolverConfig,
};

const QUAD_TOL: f64 = 1e-14;

#[test]
fn quadrature_is_exact_on_polynomials() {
    let i = quad(|t| 3.0 * t * t, 0.0, 1.0, QUAD_TOL);
    assert!((i - 1.0).abs() < 1e-14, "got {i}");
    let i = quad(|t| t.powi(10), 0.0, 2.0, QUAD_TOL);
    assert!((i - 2048.0 / 11.0).abs() < 1e-11, "got {i}");
}

#[test]
fn quadrature_matches_elementary_antiderivatives() {
    let i = quad(f64::exp, 0.0, 1.0, QUAD_TOL);
    assert!((i - (std::f64::consts::E - 1.0)).abs() < 1e-13, "got {i}");
    let i = quad(f64::sin, 0.0, std::f64::consts::PI, QUAD_TOL);
    assert!((i - 2.0).abs() < 1e-13, "got {i}");
    let i = quad(|t| 1.0 / (1.0 + t * t), 0.0, 10.0, QUAD_TOL);
    assert!((i - 10.0f64.atan()).abs() < 1e-13, "got {i}");
}

#[test]
fn quadrature_handles_oscillatory_integrands() {
    let i = quad(|t| (7.0 * t).sin(), 0.0, 20.0, QUAD_TOL);
    let exact = (1.0 - (140.0f64).cos()) / 7.0;
    assert!((i - exact).abs() < 1e-12, "got {i}, want {exact}");
}

#[test]
fn quadrature_respects_requested_tolerance() {
    for tol in [1e-6, 1e-9, 1e-12] {
        let i = quad(|t| (-t).exp() * (5.0 * t).cos(), 0.0, 4.0, tol);
        // Exact: Re 1/(1+5i) * (1 - e^{-4} e^{20i}) -> standard formula.
        let exact = (1.0 - (-4.0f64).exp() * ((20.0f64).cos() - 5.0 * (20.0f64).sin())) / 26.0;
        assert!((i - exact).abs() < tol, "tol {tol:e}: got {i}, want {exact}");
    }
}

/// The first-example jump formula must satisfy the defining integral
/// equation: integrating the rate along the exact flow from the segment
/// start up to `dt` recovers the drawn hazard mass.
#[test]
fn example1_jump_satisfies_integral_equation() {
    for &x in &[0.2, 1.0, 7.5, 51.0] {
        for &s in &[0.01, 0.3, 1.7] {
            for &even in &[true, false] {
                let a: f64 = if even { 100.0 } else { -100.0 };
                let Some((dt, x_new)) = example1_jump(x, even, s) else {
                    assert!(!even && 1.0 + a * s / x <= 0.0, "termination on a growing branch");
                    continue;
                };
                let mass = quad(|u| x * (a * u).exp(), 0.0, dt, 1e-14 * s.max(1.0));
                assert!((mass - s).abs() < 1e-12, "x={x} s={s} even={even}: mass {mass} != {s}");
                assert!((x_new - x * (a * dt).exp()).abs() < 1e-9 * x_new.abs());
            }
        }
    }
}

#[test]
fn example2_jump_satisfies_integral_equation() {
    for &x in &[0.05, 1.0, 11.0] {
        for &s in &[0.02, 0.5, 2.0] {
            let (dt, x_new) = example2_jump(x, true, s);
            let mass = quad(|u| x * (10.0 * u).exp(), 0.0, dt, 1e-14 * s.max(1.0));
            assert!((mass - s).abs() < 1e-12, "even x={x} s={s}: mass {mass}");
            assert!((x_new - x * (10.0 * dt).exp()).abs() < 1e-9 * x_new.abs());

            let (dt, x_new) = example2_jump(x, false, s);
            let mass = quad(|u| x / (1.0 + 3.0 * x * u), 0.0, dt, 1e-14 * s.max(1.0));
            assert!((mass - s).abs() < 1e-12, "odd x={x} s={s}: mass {mass}");
            assert!((x_new - x / (1.0 + 3.0 * x * dt)).abs() < 1e-9 * x_new.abs());
        }
    }
}

/// Every jump of a full oracle trajectory satisfies the integral equation
/// along the flow of the branch it was produced on.
#[test]
fn example1_oracle_is_self_consistent_under_quadrature() {
    let oracle = example1_oracle(&mut ExpStream::new(12), 60);
    assert!(!oracle.jumps.is_empty());
    let mut x_prev = 1.0;
    let mut t_prev = 0.0;
    for jump in &oracle.jumps {
        let a: f64 = if (jump.index - 1) % 2 == 0 { 100.0 } else { -100.0 };
        let x0 = x_prev;
        let dt = jump.time - t_prev;
        let mass = quad(|u| x0 * (a * u).exp(), 0.0, dt, 1e-14 * jump.s_draw.max(1.0));
        assert!(
            (mass - jump.s_draw).abs() < 1e-12,
            "jump {}: mass {mass} != draw {}",
            jump.index,
            jump.s_draw
        );
        x_prev = jump.x;
        t_prev = jump.time;
    }
}

#[test]
fn example2_oracle_is_self_consistent_under_quadrature() {
    let oracle = example2_oracle(&mut ExpStream::new(12), 40);
    assert_eq!(oracle.jumps.len(), 40);
    assert!(!oracle.terminated);
    let mut x_prev = 1.0;
    let mut t_prev = 0.0;
    for jump in &oracle.jumps {
        let even = (jump.index - 1) % 2 == 0;
        let x0 = x_prev;
        let dt = jump.time - t_prev;
        let rate = |u: f64| {
            if even {
                x0 * (10.0 * u).exp()
            } else {
                x0 / (1.0 + 3.0 * x0 * u)
            }
        };
        let mass = quad(rate, 0.0, dt, 1e-14 * jump.s_draw.max(1.0));
        assert!(
            (mass - jump.s_draw).abs() < 1e-12,
            "jump {}: mass {mass} != draw {}",
            jump.index,
            jump.s_draw
        );
        x_prev = jump.x;
        t_prev = jump.time;
    }
}

/// The sigmoid rate stays inside (0.1, 1.1) at every state a simulation
/// actually visits. In f64 the upper end saturates to exactly 1.1 once the
/// state is large (which is also what keeps the 1.1 thinning bound valid),
/// so only the lower end can be checked strictly.
#[test]
fn example3_rate_bounded_on_visited_states() {
    let model = example3();
    let mut stream = ExpStream::new(77);
    let config = SolverConfig::default();
    let traj = chv_simulate(&model, f64::INFINITY, 30, &mut stream, &config, &ChvOptions::default()).unwrap();
    assert_eq!(traj.n_true_jumps(), 30);
    for rec in &traj.records {
        for state in [&rec.state_before, &rec.state_after] {
            let r = example3_rate(&state.continuous, &state.discrete, rec.time);
            assert!(r > 0.1 && r <= 1.1, "rate {r} at t={} outside (0.1, 1.1]", rec.time);
        }
    }
}

/// A mismatched stream is detected rather than silently producing a bogus
/// error table.
#[test]
fn comparison_rejects_mismatched_streams() {
    let model = pdmp_core::builtin_model("example2").unwrap();
    let config = SolverConfig::default();
    let mut numeric_stream = ExpStream::new(3);
    let traj = chv_simulate(&model, f64::INFINITY, 10, &mut numeric_stream, &config, &ChvOptions::default()).unwrap();
    let oracle = example2_oracle(&mut ExpStream::new(4), 10);
    let err = compare_to_oracle(&traj, &oracle, &config).unwrap_err();
    assert!(matches!(err, CompareError::StreamMismatch { .. }), "got {err:?}");
}

/// Shared stream, matching model: the error table is populated and the
/// numeric times sit within solver accuracy of the closed form.
#[test]
fn chv_matches_example2_oracle_on_shared_stream() {
    let model = pdmp_core::builtin_model("example2").unwrap();
    let config = SolverConfig::with_tolerances(1e-12, 1e-12);
    let mut stream = ExpStream::new(3);
    let traj = chv_simulate(&model, f64::INFINITY, 20, &mut stream, &config, &ChvOptions::default()).unwrap();
    let oracle = example2_oracle(&mut ExpStream::new(3), 20);
    let table = compare_to_oracle(&traj, &oracle, &config).unwrap();
    assert_eq!(table.rows.len(), 20);
    assert!(table.max_err_t() < 1e-8, "max time error {}", table.max_err_t());
    assert!(table.max_err_x() < 1e-6, "max state error {}", table.max_err_x());
}
