//! The exact propagator of the damped free particle,
//!
//! ```text
//! A(q1, t1 | q0, t0) = sqrt(κ / (4π i ħ tanh(κΔt/2))) · e^{i S / ħ},
//! ```
//!
//! with `S` the closed-form dissipative action. The prefactor modulus is
//! fixed by probability conservation: `∫ dq1 A*(q1|q̃0) A(q1|q0)` must be a
//! unit-weight delta, which pins `|C| = sqrt(|∂²S/∂q0∂q1| / 2πħ)`
//! ([`prefactor_from_normalization`] rebuilds it from the action form and
//! must agree with the displayed tanh modulus). The phase of the complex
//! square root is taken on the branch continuous with the free-particle
//! propagator, an overall `e^{−iπ/4}` for Δt > 0.
//!
//! Two diagnostics probe the definition: the smeared-delta limit Δt → 0
//! ([`delta_limit_residual`]), and the Chapman-Kolmogorov composition
//! residual ([`chapman_kolmogorov_residual`]), which vanishes only at
//! κ = 0 — dissipative evolution is not Markovian.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

use crate::action::{action_quadratic_form, closed_form_action, ActionForm};
use crate::dynamics::SERIES_THRESHOLD;
use crate::error::{Error, Result};
use crate::grid::Range1D;
use crate::quad::simpson_uniform;

/// A complex transition amplitude with its ħ convention attached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitude {
    pub value: Complex64,
    pub hbar: f64,
}

impl Amplitude {
    pub fn new(value: Complex64, hbar: f64) -> Result<Self> {
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::invalid("amplitude must be finite"));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::invalid("hbar must be positive and finite"));
        }
        Ok(Amplitude { value, hbar })
    }

    pub fn modulus(&self) -> f64 {
        self.value.norm()
    }

    pub fn phase(&self) -> f64 {
        self.value.arg()
    }
}

/// Physical parameters of one propagation interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorSpec {
    pub kappa: f64,
    pub hbar: f64,
    pub t0: f64,
    pub t1: f64,
}

impl PropagatorSpec {
    pub fn new(kappa: f64, hbar: f64, t0: f64, t1: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::invalid("kappa must be finite and >= 0"));
        }
        if !hbar.is_finite() || hbar <= 0.0 {
            return Err(Error::invalid("hbar must be positive and finite"));
        }
        if !(t0.is_finite() && t1.is_finite()) {
            return Err(Error::invalid("times must be finite"));
        }
        if t1 <= t0 {
            return Err(Error::invalid("t1 must exceed t0"));
        }
        Ok(PropagatorSpec { kappa, hbar, t0, t1 })
    }

    pub fn delta_t(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn action_form(&self) -> ActionForm {
        action_quadratic_form(self.kappa, self.t0, self.t1)
            .expect("spec validation guarantees a valid action form")
    }

    /// `|C| = sqrt(κ / (4πħ tanh(κΔt/2)))`, continuous at κ = 0 where it
    /// equals `1/sqrt(2πħΔt)`.
    pub fn prefactor_modulus(&self) -> f64 {
        let delta_t = self.delta_t();
        let x = self.kappa * delta_t;
        let rate = if x < SERIES_THRESHOLD {
            2.0 / delta_t
        } else {
            self.kappa / (0.5 * x).tanh()
        };
        (rate / (4.0 * PI * self.hbar)).sqrt()
    }
}

/// Evaluate the exact propagator at a pair of endpoints.
pub fn analytic_propagator(spec: &PropagatorSpec, q0: f64, q1: f64) -> Result<Amplitude> {
    if !(q0.is_finite() && q1.is_finite()) {
        return Err(Error::invalid("endpoints must be finite"));
    }
    let action = closed_form_action(spec.kappa, q0, spec.t0, q1, spec.t1)?;
    let value = Complex64::from_polar(
        spec.prefactor_modulus(),
        action / spec.hbar - FRAC_PI_4,
    );
    Amplitude::new(value, spec.hbar)
}

/// The prefactor modulus forced by probability conservation.
///
/// In `∫ dq1 A*(q1, t1 | q̃0, t0) A(q1, t1 | q0, t0)` the `q1²` phases
/// cancel, leaving a Fourier kernel of frequency `beta`; a unit-weight
/// delta in `q̃0 − q0` requires exactly `|C| = sqrt(|beta| / 2πħ)`.
pub fn prefactor_from_normalization(form: &ActionForm, hbar: f64) -> Result<f64> {
    if !hbar.is_finite() || hbar <= 0.0 {
        return Err(Error::invalid("hbar must be positive and finite"));
    }
    if form.beta == 0.0 || !form.beta.is_finite() {
        return Err(Error::DegenerateKernel(
            "vanishing cross coefficient: the normalization integral has no delta limit".into(),
        ));
    }
    Ok((form.beta.abs() / (2.0 * PI * hbar)).sqrt())
}

/// Normalized Gaussian test function of standard deviation `width`.
fn gaussian_test_function(width: f64, center: f64, q: f64) -> f64 {
    let z = (q - center) / width;
    (-0.5 * z * z).exp() / (width * (2.0 * PI).sqrt())
}

/// `∫ dq0 A(q1, t1 | q0, t0) g(q0)` for a normalized Gaussian `g`, reduced
/// analytically: the integrand is a complex Gaussian in `q0`, so
///
/// ```text
/// ∫ exp(a q0² + b q0 + c) dq0 = sqrt(−π/a) · exp(c − b²/4a),   Re a < 0.
/// ```
pub fn smear_gaussian(
    spec: &PropagatorSpec,
    width: f64,
    center: f64,
    q1: f64,
) -> Result<Amplitude> {
    if !width.is_finite() || width <= 0.0 {
        return Err(Error::invalid("test width must be positive"));
    }
    if !(center.is_finite() && q1.is_finite()) {
        return Err(Error::invalid("positions must be finite"));
    }
    let form = spec.action_form();
    let hbar = spec.hbar;
    let prefactor = Complex64::from_polar(spec.prefactor_modulus(), -FRAC_PI_4);
    let a = Complex64::new(-0.5 / (width * width), form.gamma / hbar);
    let b = Complex64::new(center / (width * width), form.beta * q1 / hbar);
    let c = Complex64::new(-0.5 * center * center / (width * width), 0.0);
    let gauss_norm = 1.0 / (width * (2.0 * PI).sqrt());
    let integral = (-PI / a).sqrt() * (c - b * b / (4.0 * a)).exp();
    let chirp = Complex64::from_polar(1.0, form.alpha * q1 * q1 / hbar);
    Amplitude::new(prefactor * chirp * gauss_norm * integral, hbar)
}

/// Same smear evaluated by composite Simpson with a Nyquist guard of at
/// least 20 samples per kernel phase period. Cross-checks the analytic
/// reduction; fails with a [`Error::QuadratureFailure`] when the sample
/// budget cannot resolve the chirp.
pub fn smear_gaussian_quadrature(
    spec: &PropagatorSpec,
    width: f64,
    center: f64,
    q1: f64,
) -> Result<Amplitude> {
    const POINTS_PER_PERIOD: f64 = 20.0;
    const MAX_POINTS: usize = 4_000_001;
    if !width.is_finite() || width <= 0.0 {
        return Err(Error::invalid("test width must be positive"));
    }
    let form = spec.action_form();
    let hbar = spec.hbar;
    // the Gaussian tail beyond 8.6 widths is below 1e-16 of the peak
    let radius = 8.6 * width;
    let (lo, hi) = (center - radius, center + radius);
    let freq = |q0: f64| ((form.beta * q1 + 2.0 * form.gamma * q0) / hbar).abs();
    let max_freq = freq(lo).max(freq(hi));
    let chirp_spacing = 2.0 * PI / (POINTS_PER_PERIOD * max_freq.max(1e-12));
    let envelope_spacing = width / 8.0;
    let spacing = chirp_spacing.min(envelope_spacing);
    let intervals = ((hi - lo) / spacing).ceil() as usize;
    if intervals + 1 > MAX_POINTS {
        return Err(Error::QuadratureFailure {
            delta_t: spec.delta_t(),
            detail: format!(
                "resolving the kernel chirp needs {} samples (budget {MAX_POINTS})",
                intervals + 1
            ),
        });
    }
    let n = intervals.max(32) + 1;
    let h = (hi - lo) / (n - 1) as f64;
    let prefactor = Complex64::from_polar(spec.prefactor_modulus(), -FRAC_PI_4);
    let mut re = Vec::with_capacity(n);
    let mut im = Vec::with_capacity(n);
    for i in 0..n {
        let q0 = lo + h * i as f64;
        let phase = form.evaluate(q1, q0) / hbar;
        let value = prefactor
            * Complex64::from_polar(1.0, phase)
            * gaussian_test_function(width, center, q0);
        re.push(value.re);
        im.push(value.im);
    }
    let value = Complex64::new(simpson_uniform(&re, h)?, simpson_uniform(&im, h)?);
    Amplitude::new(value, hbar)
}

/// Default endpoint grid for the delta-limit and composition diagnostics.
pub fn default_q_grid() -> Range1D {
    Range1D {
        min: -3.0,
        max: 3.0,
        count: 41,
    }
}

/// Sup-norm distance between the smeared propagator and the test function
/// itself over the default endpoint grid. Tends to zero as Δt → 0: in that
/// limit the kernel acts as a delta and no evolution takes place.
pub fn delta_limit_residual(
    spec: &PropagatorSpec,
    test_width: f64,
    q_center: f64,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for q1 in default_q_grid().nodes() {
        let smeared = smear_gaussian(spec, test_width, q_center, q1)?;
        let target = gaussian_test_function(test_width, q_center, q1);
        worst = worst.max((smeared.value - target).norm());
    }
    Ok(worst)
}

/// Delta-limit residuals across a ladder of interval lengths.
pub fn delta_limit_ladder(
    kappa: f64,
    hbar: f64,
    test_width: f64,
    q_center: f64,
    delta_ts: &[f64],
) -> Result<Vec<f64>> {
    delta_ts
        .iter()
        .map(|&dt| {
            let spec = PropagatorSpec::new(kappa, hbar, 0.0, dt)?;
            delta_limit_residual(&spec, test_width, q_center)
        })
        .collect()
}

/// Relative sup-norm Chapman-Kolmogorov residual over an endpoint grid:
///
/// ```text
/// max |∫ dq A(q1|q, t_mid) A(q|q0, t_mid) − A(q1|q0)| / |A(q1|q0)|
/// ```
///
/// The middle integral is a complex Gaussian and is evaluated in closed
/// form from the two interval action forms. The free kernel composes
/// exactly; any κ > 0 leaves a finite residual — the evolution remembers.
pub fn chapman_kolmogorov_residual(
    spec: &PropagatorSpec,
    t_mid: f64,
    q_grid: Range1D,
) -> Result<f64> {
    if !(t_mid.is_finite() && spec.t0 < t_mid && t_mid < spec.t1) {
        return Err(Error::invalid("t_mid must lie strictly inside (t0, t1)"));
    }
    let first = PropagatorSpec::new(spec.kappa, spec.hbar, spec.t0, t_mid)?;
    let second = PropagatorSpec::new(spec.kappa, spec.hbar, t_mid, spec.t1)?;
    let mut worst: f64 = 0.0;
    for q0 in q_grid.nodes() {
        for q1 in q_grid.nodes() {
            let composed = compose_pair(&first, &second, q0, q1)?;
            let direct = analytic_propagator(spec, q0, q1)?;
            worst = worst.max((composed.value - direct.value).norm() / direct.modulus());
        }
    }
    Ok(worst)
}

/// Closed-form composition `∫ dq A_b(q1, q) A_a(q, q0)` of two Gaussian
/// kernels via the Fresnel integral
/// `∫ dq e^{(i/ħ)(u q² + v q)} = sqrt(πħ/|u|) e^{i sgn(u) π/4} e^{−i v²/(4uħ)}`.
pub fn compose_pair(
    first: &PropagatorSpec,
    second: &PropagatorSpec,
    q0: f64,
    q1: f64,
) -> Result<Amplitude> {
    if (first.hbar - second.hbar).abs() > 0.0 {
        return Err(Error::invalid("composition requires a common hbar"));
    }
    let hbar = first.hbar;
    let form_a = first.action_form();
    let form_b = second.action_form();
    let u = form_b.gamma + form_a.alpha;
    let scale = form_b.gamma.abs().max(form_a.alpha.abs()).max(1.0);
    if u.abs() < 1e-14 * scale {
        return Err(Error::DegenerateKernel(format!(
            "vanishing composed quadratic coefficient u = {u:.3e}"
        )));
    }
    let v = form_b.beta * q1 + form_a.beta * q0;
    let moduli = first.prefactor_modulus() * second.prefactor_modulus();
    let fresnel_modulus = (PI * hbar / u.abs()).sqrt();
    let phase = (form_b.alpha * q1 * q1 + form_a.gamma * q0 * q0 - v * v / (4.0 * u)) / hbar
        + u.signum() * FRAC_PI_4
        - 2.0 * FRAC_PI_4;
    Amplitude::new(
        Complex64::from_polar(moduli * fresnel_modulus, phase),
        hbar,
    )
}
