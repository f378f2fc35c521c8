//! Classical trajectories: initial-value integration for any force field,
//! two-point boundary-value solving by shooting, and the exact solution of
//! the damped free particle `q̈ = -κ q̇`.

use crate::error::{Error, Result};
use crate::phase::{ExtendedPhasePoint, ForceField};

/// Threshold on `κ·Δt` below which closed forms switch to their
/// series limits to avoid 0/0 cancellation.
pub const SERIES_THRESHOLD: f64 = 1e-8;

/// A sampled classical trajectory `t ↦ (q(t), p(t))`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    t_samples: Vec<f64>,
    q_samples: Vec<f64>,
    p_samples: Vec<f64>,
    field_tag: String,
}

impl Trajectory {
    pub fn new(
        t_samples: Vec<f64>,
        q_samples: Vec<f64>,
        p_samples: Vec<f64>,
        field_tag: impl Into<String>,
    ) -> Result<Self> {
        let n = t_samples.len();
        if n < 2 {
            return Err(Error::invalid("trajectory needs at least 2 samples"));
        }
        if q_samples.len() != n || p_samples.len() != n {
            return Err(Error::invalid("trajectory arrays must have equal length"));
        }
        if t_samples.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("trajectory times must be strictly increasing"));
        }
        if t_samples
            .iter()
            .chain(&q_samples)
            .chain(&p_samples)
            .any(|v| !v.is_finite())
        {
            return Err(Error::invalid("trajectory samples must be finite"));
        }
        Ok(Trajectory {
            t_samples,
            q_samples,
            p_samples,
            field_tag: field_tag.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.t_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least 2 samples
    }

    pub fn times(&self) -> &[f64] {
        &self.t_samples
    }

    pub fn positions(&self) -> &[f64] {
        &self.q_samples
    }

    pub fn momenta(&self) -> &[f64] {
        &self.p_samples
    }

    pub fn field_tag(&self) -> &str {
        &self.field_tag
    }

    pub fn point(&self, i: usize) -> ExtendedPhasePoint {
        ExtendedPhasePoint {
            q: self.q_samples[i],
            p: self.p_samples[i],
            t: self.t_samples[i],
        }
    }

    pub fn start(&self) -> ExtendedPhasePoint {
        self.point(0)
    }

    pub fn end(&self) -> ExtendedPhasePoint {
        self.point(self.len() - 1)
    }

    /// Serialize as `t,q,p` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,q,p\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                self.t_samples[i], self.q_samples[i], self.p_samples[i]
            ));
        }
        out
    }
}

/// Fourth-order Runge-Kutta integration of `q̇ = T(q)·p`, `ṗ = F(q, p, t)`
/// from `start` to `t1` in `steps` uniform steps. Global error `O(steps⁻⁴)`.
pub fn integrate_ivp(
    field: &ForceField,
    start: ExtendedPhasePoint,
    t1: f64,
    steps: usize,
) -> Result<Trajectory> {
    if !t1.is_finite() || t1 <= start.t {
        return Err(Error::invalid("t1 must be finite and exceed the start time"));
    }
    if steps < 2 {
        return Err(Error::invalid("integration needs at least 2 steps"));
    }
    let h = (t1 - start.t) / steps as f64;
    let deriv = |q: f64, p: f64, t: f64| -> Result<(f64, f64)> {
        let metric = field.kinetic(q);
        if !metric.is_finite() || metric <= 0.0 {
            return Err(Error::invalid(format!(
                "kinetic metric must be positive and finite, got {metric} at q = {q}"
            )));
        }
        Ok((metric * p, field.force(q, p, t)))
    };

    let mut t_samples = Vec::with_capacity(steps + 1);
    let mut q_samples = Vec::with_capacity(steps + 1);
    let mut p_samples = Vec::with_capacity(steps + 1);
    let (mut q, mut p) = (start.q, start.p);
    t_samples.push(start.t);
    q_samples.push(q);
    p_samples.push(p);

    for k in 0..steps {
        let t = start.t + h * k as f64;
        let (k1q, k1p) = deriv(q, p, t)?;
        let (k2q, k2p) = deriv(q + 0.5 * h * k1q, p + 0.5 * h * k1p, t + 0.5 * h)?;
        let (k3q, k3p) = deriv(q + 0.5 * h * k2q, p + 0.5 * h * k2p, t + 0.5 * h)?;
        let (k4q, k4p) = deriv(q + h * k3q, p + h * k3p, t + h)?;
        q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        let t_next = if k + 1 == steps { t1 } else { start.t + h * (k + 1) as f64 };
        if !(q.is_finite() && p.is_finite()) {
            return Err(Error::Divergence { time: t_next });
        }
        t_samples.push(t_next);
        q_samples.push(q);
        p_samples.push(p);
    }
    Trajectory::new(t_samples, q_samples, p_samples, field.tag())
}

/// Two-point boundary-value solve by shooting on the initial momentum,
/// with secant updates on the endpoint mismatch `q(t1) − q1`.
///
/// Converges in two iterations when the endpoint map is affine in the
/// initial momentum (true for linear fields such as the damped one).
pub fn solve_bvp(
    field: &ForceField,
    q0: f64,
    t0: f64,
    q1: f64,
    t1: f64,
    steps: usize,
) -> Result<Trajectory> {
    if !(q0.is_finite() && q1.is_finite() && t0.is_finite() && t1.is_finite()) {
        return Err(Error::invalid("boundary data must be finite"));
    }
    if t1 <= t0 {
        return Err(Error::invalid("t1 must exceed t0"));
    }
    const TOL: f64 = 1e-10;
    const MAX_ITER: usize = 100;

    let shoot = |p0: f64| -> Result<(Trajectory, f64)> {
        let start = ExtendedPhasePoint { q: q0, p: p0, t: t0 };
        let traj = integrate_ivp(field, start, t1, steps)?;
        let mismatch = traj.end().q - q1;
        Ok((traj, mismatch))
    };

    // free-particle estimate, then a nearby second sample for the secant
    let mut p_prev = (q1 - q0) / (t1 - t0);
    let (traj, mut m_prev) = shoot(p_prev)?;
    if m_prev.abs() < TOL {
        return Ok(traj);
    }
    let mut p_curr = p_prev + (0.1 * p_prev.abs()).max(1e-3);
    let (traj, mut m_curr) = shoot(p_curr)?;
    if m_curr.abs() < TOL {
        return Ok(traj);
    }

    let give_up = |p_prev: f64, p_curr: f64, mismatch: f64| Error::Nonconvergence {
        iterations: MAX_ITER,
        bracket: (p_prev, p_curr),
        mismatch,
    };

    for _ in 2..MAX_ITER {
        let denom = m_curr - m_prev;
        if denom == 0.0 {
            // flat mismatch: the endpoint no longer responds to the momentum,
            // which signals a non-unique or degenerate connecting trajectory
            return Err(give_up(p_prev, p_curr, m_curr));
        }
        let mut p_next = p_curr - m_curr * (p_curr - p_prev) / denom;
        if !p_next.is_finite() {
            return Err(give_up(p_prev, p_curr, m_curr));
        }
        // a diverged probe backtracks toward the last good momentum
        let mut probe = None;
        for _ in 0..64 {
            match shoot(p_next) {
                Ok(result) => {
                    probe = Some(result);
                    break;
                }
                Err(Error::Divergence { .. }) => p_next = 0.5 * (p_next + p_curr),
                Err(other) => return Err(other),
            }
        }
        let Some((traj, m_next)) = probe else {
            return Err(give_up(p_prev, p_curr, m_curr));
        };
        if m_next.abs() < TOL {
            return Ok(traj);
        }
        p_prev = p_curr;
        m_prev = m_curr;
        p_curr = p_next;
        m_curr = m_next;
    }
    Err(give_up(p_prev, p_curr, m_curr))
}

/// Exact trajectory of the damped free particle through `(q0, t0)` and
/// `(q1, t1)`, sampled uniformly:
///
/// ```text
/// q(t) = q0 + (q1 − q0) · expm1(−κ(t − t0)) / expm1(−κ·Δt)
/// ```
///
/// evaluated via `expm1` so the frictionless limit is reached smoothly;
/// below [`SERIES_THRESHOLD`] on `κ·Δt` the straight-line limit with its
/// first-order κ correction is used instead.
pub fn damped_free_trajectory(
    kappa: f64,
    q0: f64,
    t0: f64,
    q1: f64,
    t1: f64,
    samples: usize,
) -> Result<Trajectory> {
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::invalid("kappa must be finite and >= 0"));
    }
    if !(q0.is_finite() && q1.is_finite() && t0.is_finite() && t1.is_finite()) {
        return Err(Error::invalid("boundary data must be finite"));
    }
    if t1 <= t0 {
        return Err(Error::invalid("t1 must exceed t0"));
    }
    if samples < 2 {
        return Err(Error::invalid("trajectory needs at least 2 samples"));
    }
    let delta_t = t1 - t0;
    let dq = q1 - q0;
    let x = kappa * delta_t;
    let mut t_samples = Vec::with_capacity(samples);
    let mut q_samples = Vec::with_capacity(samples);
    let mut p_samples = Vec::with_capacity(samples);
    let em = (-x).exp_m1();
    for i in 0..samples {
        let u = i as f64 / (samples - 1) as f64;
        let t = if i + 1 == samples { t1 } else { t0 + delta_t * u };
        let (q, p) = if x < SERIES_THRESHOLD {
            (
                q0 + dq * (u + 0.5 * x * u * (1.0 - u)),
                dq / delta_t * (1.0 + x * (0.5 - u)),
            )
        } else {
            let tau = t - t0;
            (
                q0 + dq * (-kappa * tau).exp_m1() / em,
                -dq * kappa * (-kappa * tau).exp() / em,
            )
        };
        t_samples.push(t);
        q_samples.push(q);
        p_samples.push(p);
    }
    // endpoints are exact in both branches
    q_samples[0] = q0;
    *q_samples.last_mut().unwrap() = q1;
    Trajectory::new(
        t_samples,
        q_samples,
        p_samples,
        format!("damped(kappa={kappa})"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn free_ivp_is_exact() {
        let field = ForceField::free();
        let start = ExtendedPhasePoint::new(0.0, 1.0, 0.0).unwrap();
        let traj = integrate_ivp(&field, start, 1.0, 16).unwrap();
        assert_abs_diff_eq!(traj.end().q, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(traj.end().p, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn damped_ivp_matches_exponential() {
        // q(t) = (1 − e^{−κt}) p0 / κ for start (0, 1, 0)
        let field = ForceField::damped(1.0).unwrap();
        let start = ExtendedPhasePoint::new(0.0, 1.0, 0.0).unwrap();
        let traj = integrate_ivp(&field, start, 1.0, 1000).unwrap();
        assert_abs_diff_eq!(traj.end().q, 0.63212055882855768, epsilon = 1e-10);
        assert_abs_diff_eq!(traj.end().p, 0.36787944117144232, epsilon = 1e-10);
    }

    #[test]
    fn harmonic_ivp_returns_after_a_period() {
        let field = ForceField::new("harmonic", |_| 1.0, |q, _, _| -q);
        let start = ExtendedPhasePoint::new(1.0, 0.0, 0.0).unwrap();
        let traj = integrate_ivp(&field, start, 2.0 * std::f64::consts::PI, 10_000).unwrap();
        assert_abs_diff_eq!(traj.end().q, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(traj.end().p, 0.0, epsilon = 1e-8);
    }

    #[test]
    fn divergence_reports_failing_time() {
        // runaway force blows up out of double range almost immediately
        let field = ForceField::new("runaway", |_| 1.0, |q, _, _| (q * q + 1.0) * 1e150);
        let start = ExtendedPhasePoint::new(1.0, 0.0, 0.0).unwrap();
        match integrate_ivp(&field, start, 1.0, 100) {
            Err(Error::Divergence { time }) => assert!(time > 0.0 && time <= 1.0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn bvp_free_is_straight_line() {
        let field = ForceField::free();
        let traj = solve_bvp(&field, 0.0, 0.0, 1.0, 1.0, 64).unwrap();
        for i in 0..traj.len() {
            assert_abs_diff_eq!(traj.positions()[i], traj.times()[i], epsilon = 1e-12);
            assert_abs_diff_eq!(traj.momenta()[i], 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bvp_damped_initial_momentum() {
        // p(0) = κ / (1 − e^{−κ}) for κ = 1, (0,0) → (1,1)
        let field = ForceField::damped(1.0).unwrap();
        let traj = solve_bvp(&field, 0.0, 0.0, 1.0, 1.0, 2000).unwrap();
        assert_abs_diff_eq!(traj.start().p, 1.5819767068693264, epsilon = 1e-9);
        assert_abs_diff_eq!(traj.end().q, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn bvp_mirror_symmetry() {
        // the ODE is linear, so swapping endpoint positions mirrors q
        let field = ForceField::damped(1.0).unwrap();
        let fwd = solve_bvp(&field, 0.0, 0.0, 1.0, 1.0, 500).unwrap();
        let rev = solve_bvp(&field, 1.0, 0.0, 0.0, 1.0, 500).unwrap();
        for i in 0..fwd.len() {
            assert_abs_diff_eq!(fwd.positions()[i], 1.0 - rev.positions()[i], epsilon = 1e-9);
        }
    }

    #[test]
    fn bvp_nonconvergence_carries_bracket() {
        // cubic damping caps the reach at sqrt(2 Δt): q(1; p0) < sqrt(2) for
        // every initial momentum, so the target q1 = 3 is unreachable
        let field = ForceField::new("cubic-damping", |_| 1.0, |_, p, _| -p * p * p);
        let result = solve_bvp(&field, 0.0, 0.0, 3.0, 1.0, 200);
        match result {
            Err(Error::Nonconvergence {
                bracket, mismatch, ..
            }) => {
                assert!(bracket.0.is_finite() && bracket.1.is_finite());
                assert!(mismatch < -1.0, "mismatch {mismatch}");
            }
            other => panic!("expected nonconvergence, got {other:?}"),
        }
    }

    #[test]
    fn damped_trajectory_frozen_values() {
        let traj = damped_free_trajectory(1.0, 0.0, 0.0, 1.0, 1.0, 3).unwrap();
        // q_cl(1/2) = (1 − e^{−1/2}) / (1 − e^{−1})
        assert_abs_diff_eq!(traj.positions()[1], 0.62245933120185456, epsilon = 1e-15);
        assert_abs_diff_eq!(traj.start().p, 1.5819767068693264, epsilon = 1e-15);
    }

    #[test]
    fn damped_trajectory_boundary_exact() {
        for kappa in [0.0, 1e-12, 0.3, 2.0] {
            let traj = damped_free_trajectory(kappa, -0.7, 0.5, 2.1, 3.0, 17).unwrap();
            assert_eq!(traj.start().q, -0.7);
            assert_eq!(traj.end().q, 2.1);
        }
    }

    #[test]
    fn damped_trajectory_frictionless_limit() {
        let traj = damped_free_trajectory(1e-13, 0.0, 0.0, 2.0, 4.0, 9).unwrap();
        for i in 0..traj.len() {
            let line = 0.5 * traj.times()[i];
            assert_abs_diff_eq!(traj.positions()[i], line, epsilon = 1e-12);
            assert_abs_diff_eq!(traj.momenta()[i], 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn bvp_agrees_with_exact_damped() {
        for (kappa, t1) in [(0.2, 0.6), (1.0, 1.0), (2.0, 3.0)] {
            let field = ForceField::damped(kappa).unwrap();
            let shot = solve_bvp(&field, -1.0, 0.0, 2.0, t1, 4000).unwrap();
            let exact = damped_free_trajectory(kappa, -1.0, 0.0, 2.0, t1, shot.len()).unwrap();
            for i in 0..shot.len() {
                assert_abs_diff_eq!(shot.positions()[i], exact.positions()[i], epsilon = 1e-8);
                assert_abs_diff_eq!(shot.momenta()[i], exact.momenta()[i], epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn momentum_consistency() {
        // p ≈ q̇ at interior nodes (unit mass), checked by central differences
        let traj = damped_free_trajectory(0.8, 0.0, 0.0, 1.5, 2.0, 401).unwrap();
        let h = traj.times()[1] - traj.times()[0];
        for i in 1..traj.len() - 1 {
            let qdot = (traj.positions()[i + 1] - traj.positions()[i - 1]) / (2.0 * h);
            assert_abs_diff_eq!(traj.momenta()[i], qdot, epsilon = h * h);
        }
    }

    #[test]
    fn trajectory_csv_header() {
        let traj = damped_free_trajectory(0.5, 0.0, 0.0, 1.0, 1.0, 4).unwrap();
        let csv = traj.to_csv();
        assert!(csv.starts_with("t,q,p\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(damped_free_trajectory(-0.1, 0.0, 0.0, 1.0, 1.0, 8).is_err());
        assert!(damped_free_trajectory(1.0, 0.0, 1.0, 1.0, 1.0, 8).is_err());
        assert!(damped_free_trajectory(1.0, 0.0, 0.0, 1.0, 1.0, 1).is_err());
        let field = ForceField::free();
        let start = ExtendedPhasePoint::new(0.0, 0.0, 0.0).unwrap();
        assert!(integrate_ivp(&field, start, 0.0, 10).is_err());
        assert!(integrate_ivp(&field, start, 1.0, 1).is_err());
    }
}
