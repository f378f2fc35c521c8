//! The dissipative classical action of the damped free particle.
//!
//! The action assigned to the connecting classical trajectory is
//!
//! ```text
//! S(q1, t1 | q0, t0) = ∫ (½ q̇² − κ p q) dt      along the classical path,
//! ```
//!
//! which has the closed form
//!
//! ```text
//! S = (κ/4)(q1 − q0) · [(q0 + 3q1)e^{−κt1} − (q1 + 3q0)e^{−κt0}] / (e^{−κt0} − e^{−κt1}).
//! ```
//!
//! The module evaluates it three ways that must agree: Simpson quadrature
//! along the trajectory ([`effective_action_quadrature`]), the closed form
//! above ([`closed_form_action`]) and the expanded quadratic form in the
//! endpoints ([`action_quadratic_form`]). The quadratic-form cross
//! coefficient is what normalizes the propagator.

use crate::dynamics::{Trajectory, SERIES_THRESHOLD};
use crate::error::{Error, Result};
use crate::quad::simpson_uniform;

/// The action as a quadratic form in the endpoints:
/// `S(q1, q0) = alpha·q1² + beta·q0·q1 + gamma·q0²`.
///
/// The coefficients depend on `(t0, t1)` only through `delta_t`, and
/// `|beta| = (κ/2)/tanh(κ·Δt/2)` is the cross second derivative
/// `∂²S/∂q0∂q1` that fixes the propagator prefactor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionForm {
    pub kappa: f64,
    pub delta_t: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl ActionForm {
    /// Evaluate `S(q1, q0)`. Note q1 first, matching the transition
    /// amplitude convention `A(q1, t1 | q0, t0)`.
    pub fn evaluate(&self, q1: f64, q0: f64) -> f64 {
        self.alpha * q1 * q1 + self.beta * q0 * q1 + self.gamma * q0 * q0
    }
}

/// Composite Simpson quadrature of `½ p² − κ p q` over a uniformly
/// sampled trajectory (unit mass, so `q̇ = p`). Error `O(h⁴)`.
pub fn effective_action_quadrature(traj: &Trajectory, kappa: f64) -> Result<f64> {
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::invalid("kappa must be finite and >= 0"));
    }
    if traj.len() < 3 {
        return Err(Error::invalid("action quadrature needs at least 3 samples"));
    }
    let t = traj.times();
    let spacing = t[1] - t[0];
    let uniform = t
        .windows(2)
        .all(|w| ((w[1] - w[0]) - spacing).abs() <= 1e-9 * spacing);
    if !uniform {
        return Err(Error::invalid(
            "action quadrature requires uniformly sampled trajectories",
        ));
    }
    let integrand: Vec<f64> = traj
        .positions()
        .iter()
        .zip(traj.momenta())
        .map(|(&q, &p)| 0.5 * p * p - kappa * p * q)
        .collect();
    simpson_uniform(&integrand, spacing)
}

/// The closed-form action, evaluated in the numerically stable variables
/// `x = κ·Δt` (so time-translation invariance is manifest):
///
/// ```text
/// S = (κ/4)(q1 − q0) · [(q0 + 3q1)e^{−x} − (q1 + 3q0)] / (−expm1(−x))
/// ```
///
/// with the frictionless expansion below [`SERIES_THRESHOLD`].
pub fn closed_form_action(kappa: f64, q0: f64, t0: f64, q1: f64, t1: f64) -> Result<f64> {
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::invalid("kappa must be finite and >= 0"));
    }
    if !(q0.is_finite() && q1.is_finite() && t0.is_finite() && t1.is_finite()) {
        return Err(Error::invalid("endpoints must be finite"));
    }
    if t1 <= t0 {
        return Err(Error::invalid("t1 must exceed t0"));
    }
    let delta_t = t1 - t0;
    let x = kappa * delta_t;
    let dq = q1 - q0;
    if x < SERIES_THRESHOLD {
        // free action plus the O(κ) and O(κ²) corrections
        return Ok(dq * dq / (2.0 * delta_t) - 0.5 * kappa * (q1 * q1 - q0 * q0)
            + kappa * x * dq * dq / 24.0);
    }
    let em = (-x).exp_m1();
    let bracket = (q0 + 3.0 * q1) * (-x).exp() - (q1 + 3.0 * q0);
    Ok(0.25 * kappa * dq * bracket / (-em))
}

/// Expanded quadratic-form coefficients of the closed-form action.
///
/// With `x = κ·Δt` and `em = expm1(−x)`:
///
/// ```text
/// alpha = (κ/4)(1 − 3e^{−x})/em,   beta = (κ/2)(1 + e^{−x})/em,
/// gamma = (κ/4)(e^{−x} − 3)/em,
/// ```
///
/// reducing to the free coefficients `(1/(2Δt), −1/Δt, 1/(2Δt))` as κ → 0.
pub fn action_quadratic_form(kappa: f64, t0: f64, t1: f64) -> Result<ActionForm> {
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::invalid("kappa must be finite and >= 0"));
    }
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::invalid("times must be finite"));
    }
    if t1 <= t0 {
        return Err(Error::invalid("t1 must exceed t0"));
    }
    let delta_t = t1 - t0;
    let x = kappa * delta_t;
    let (alpha, beta, gamma) = if x < SERIES_THRESHOLD {
        (
            0.5 / delta_t - 0.5 * kappa + kappa * x / 24.0,
            -1.0 / delta_t - kappa * x / 12.0,
            0.5 / delta_t + 0.5 * kappa + kappa * x / 24.0,
        )
    } else {
        let em = (-x).exp_m1();
        let ex = (-x).exp();
        (
            0.25 * kappa * (1.0 - 3.0 * ex) / em,
            0.5 * kappa * (1.0 + ex) / em,
            0.25 * kappa * (ex - 3.0) / em,
        )
    };
    Ok(ActionForm {
        kappa,
        delta_t,
        alpha,
        beta,
        gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::damped_free_trajectory;
    use approx::assert_abs_diff_eq;

    /// Independent oracle for κ = 1, (0,0) → (1,1): the integrand along the
    /// exact trajectory is (3/2)c²e^{−2t} − c²e^{−t} with c = 1/(1 − e⁻¹),
    /// whose integral over [0,1] is (3/4)c²(1 − e⁻²) − c.
    fn action_oracle_unit_case() -> f64 {
        let c = 1.0 / (-(-1.0f64).exp_m1());
        0.75 * c * c * (1.0 - (-2.0f64).exp()) - c
    }

    #[test]
    fn oracle_value_is_frozen() {
        assert_abs_diff_eq!(action_oracle_unit_case(), 0.040988353434663212, epsilon = 1e-16);
    }

    #[test]
    fn quadrature_free_case() {
        let traj = damped_free_trajectory(0.0, 0.0, 0.0, 1.0, 1.0, 101).unwrap();
        let s = effective_action_quadrature(&traj, 0.0).unwrap();
        assert_abs_diff_eq!(s, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn quadrature_matches_symbolic_oracle() {
        let traj = damped_free_trajectory(1.0, 0.0, 0.0, 1.0, 1.0, 201).unwrap();
        let s = effective_action_quadrature(&traj, 1.0).unwrap();
        assert_abs_diff_eq!(s, action_oracle_unit_case(), epsilon = 1e-10);
    }

    #[test]
    fn quadrature_fourth_order() {
        let run = |samples: usize| {
            let traj = damped_free_trajectory(1.3, -0.5, 0.0, 2.0, 1.7, samples).unwrap();
            effective_action_quadrature(&traj, 1.3).unwrap()
        };
        let exact = closed_form_action(1.3, -0.5, 0.0, 2.0, 1.7).unwrap();
        let e1 = (run(41) - exact).abs();
        let e2 = (run(81) - exact).abs();
        let ratio = e1 / e2;
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn closed_form_frozen_value() {
        let s = closed_form_action(1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(s, 0.040988353434663212, epsilon = 1e-15);
    }

    #[test]
    fn closed_form_frictionless_limit() {
        let s = closed_form_action(1e-12, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(s, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn closed_form_vanishes_for_equal_endpoints() {
        for kappa in [1e-12, 0.3, 1.0, 5.0] {
            for dt in [0.1, 1.0, 4.0] {
                let s = closed_form_action(kappa, 1.7, 0.0, 1.7, dt).unwrap();
                assert_abs_diff_eq!(s, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let traj = damped_free_trajectory(1.0, 0.0, 0.0, 1.0, 1.0, 401).unwrap();
        let quad = effective_action_quadrature(&traj, 1.0).unwrap();
        let closed = closed_form_action(1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(quad, closed, epsilon = 1e-8);
    }

    #[test]
    fn quadratic_form_frozen_beta() {
        let form = action_quadratic_form(1.0, 0.0, 1.0).unwrap();
        // |beta| = (1/2)(1 + e⁻¹)/(1 − e⁻¹) = (1/2)/tanh(1/2)
        assert_abs_diff_eq!(form.beta.abs(), 1.0819767068693264, epsilon = 1e-15);
        assert_abs_diff_eq!(form.beta.abs(), 0.5 / 0.5f64.tanh(), epsilon = 1e-15);
    }

    #[test]
    fn quadratic_form_free_limit() {
        let form = action_quadratic_form(1e-13, 0.0, 2.0).unwrap();
        assert_abs_diff_eq!(form.alpha, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(form.beta, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(form.gamma, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn quadratic_form_reconstructs_closed_form() {
        let form = action_quadratic_form(0.7, 0.3, 2.1).unwrap();
        let endpoints = [-2.5, -1.0, -0.1, 0.0, 0.4, 1.3, 2.9];
        for &q0 in &endpoints {
            for &q1 in &endpoints {
                let direct = closed_form_action(0.7, q0, 0.3, q1, 2.1).unwrap();
                assert_abs_diff_eq!(form.evaluate(q1, q0), direct, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn beta_matches_cross_finite_difference() {
        // centered cross difference of the closed form is exact for a quadratic
        let h = 1e-3;
        for (kappa, dt) in [(0.3, 0.5), (1.0, 1.0), (2.0, 3.7)] {
            let s = |q1: f64, q0: f64| closed_form_action(kappa, q0, 0.0, q1, dt).unwrap();
            let fd = (s(1.0 + h, 0.5 + h) - s(1.0 + h, 0.5 - h) - s(1.0 - h, 0.5 + h)
                + s(1.0 - h, 0.5 - h))
                / (4.0 * h * h);
            let form = action_quadratic_form(kappa, 0.0, dt).unwrap();
            assert_abs_diff_eq!(fd, form.beta, epsilon = 1e-6);
        }
    }

    #[test]
    fn time_translation_invariance() {
        for shift in [-5.0, 1.0, 17.3] {
            let a = closed_form_action(0.9, -0.4, 0.0, 1.2, 1.3).unwrap();
            let b = closed_form_action(0.9, -0.4, shift, 1.2, 1.3 + shift).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn dissipation_breaks_endpoint_swap_symmetry() {
        // at κ = 0 the action is symmetric under q0 ↔ q1; at κ = 1 it is not
        let fwd0 = closed_form_action(0.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        let rev0 = closed_form_action(0.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(fwd0, rev0, epsilon = 1e-15);
        let fwd1 = closed_form_action(1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        let rev1 = closed_form_action(1.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert!((fwd1 - rev1).abs() > 0.1, "swap left action unchanged");
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(closed_form_action(-1.0, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(closed_form_action(1.0, 0.0, 1.0, 1.0, 0.5).is_err());
        assert!(action_quadratic_form(1.0, 2.0, 2.0).is_err());
        let traj = damped_free_trajectory(1.0, 0.0, 0.0, 1.0, 1.0, 2).unwrap();
        assert!(effective_action_quadrature(&traj, 1.0).is_err());
    }
}
