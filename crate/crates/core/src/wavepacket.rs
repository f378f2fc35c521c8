//! Grid wavefunctions evolved by the propagator kernel.
//!
//! States are immutable values on a uniform grid. Evolution applies the
//! kernel by trapezoid quadrature,
//!
//! ```text
//! ψ₁(q') = Σ_j w_j A(q', t1 | q_j, t0) ψ₀(q_j),
//! ```
//!
//! guarded two ways: the state must be negligible at the grid boundary
//! before and after (no silent truncation — support leaks corrupt the
//! composition-defect measurements), and the spacing must resolve the
//! kernel chirp across the state's support with at least four samples per
//! phase period, otherwise the apply aliases and an error names the
//! required spacing.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};
use crate::grid::Range1D;
use crate::propagator::PropagatorSpec;
use crate::quad::trapezoid_weights;

const BOUNDARY_THRESHOLD: f64 = 1e-8;
const SUPPORT_THRESHOLD: f64 = 1e-10;
const SAMPLES_PER_PERIOD: f64 = 4.0;

/// A complex wavefunction sampled on a uniform grid.
#[derive(Debug, Clone)]
pub struct WaveGrid {
    grid: Range1D,
    psi: Vec<Complex64>,
    hbar: f64,
}

impl WaveGrid {
    pub fn from_values(grid: Range1D, psi: Vec<Complex64>, hbar: f64) -> Result<Self> {
        if psi.len() != grid.count {
            return Err(Error::invalid(format!(
                "expected {} values, got {}",
                grid.count,
                psi.len()
            )));
        }
        if !hbar.is_finite() || hbar <= 0.0 {
            return Err(Error::invalid("hbar must be positive and finite"));
        }
        if psi.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid("wavefunction values must be finite"));
        }
        Ok(WaveGrid { grid, psi, hbar })
    }

    pub fn grid(&self) -> Range1D {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing()
    }

    /// Trapezoid L² norm.
    pub fn norm(&self) -> f64 {
        let w = trapezoid_weights(self.psi.len(), self.spacing());
        self.psi
            .iter()
            .zip(&w)
            .map(|(z, wi)| wi * z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Position expectation `∫ q |ψ|² / ∫ |ψ|²`.
    pub fn center(&self) -> f64 {
        let w = trapezoid_weights(self.psi.len(), self.spacing());
        let mut mass = 0.0;
        let mut first = 0.0;
        for (i, (z, wi)) in self.psi.iter().zip(&w).enumerate() {
            let d = wi * z.norm_sqr();
            mass += d;
            first += d * self.grid.node(i);
        }
        first / mass
    }

    /// Position standard deviation around [`WaveGrid::center`].
    pub fn width(&self) -> f64 {
        let c = self.center();
        let w = trapezoid_weights(self.psi.len(), self.spacing());
        let mut mass = 0.0;
        let mut second = 0.0;
        for (i, (z, wi)) in self.psi.iter().zip(&w).enumerate() {
            let d = wi * z.norm_sqr();
            mass += d;
            let dq = self.grid.node(i) - c;
            second += d * dq * dq;
        }
        (second / mass).sqrt()
    }

    /// Momentum expectation `ħ · Im ∫ ψ* ψ′ / ∫ |ψ|²` with the derivative
    /// taken by central differences on interior nodes.
    pub fn momentum_expectation(&self) -> f64 {
        let h = self.spacing();
        let w = trapezoid_weights(self.psi.len(), h);
        let mut mass = 0.0;
        let mut flux = 0.0;
        for (i, (z, wi)) in self.psi.iter().zip(&w).enumerate() {
            mass += wi * z.norm_sqr();
            if i > 0 && i + 1 < self.psi.len() {
                let derivative = (self.psi[i + 1] - self.psi[i - 1]) / (2.0 * h);
                flux += wi * (z.conj() * derivative).im;
            }
        }
        self.hbar * flux / mass
    }

    /// Trapezoid L² distance to another state on the same grid.
    pub fn distance(&self, other: &WaveGrid) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::invalid("states live on different grids"));
        }
        let w = trapezoid_weights(self.psi.len(), self.spacing());
        Ok(self
            .psi
            .iter()
            .zip(&other.psi)
            .zip(&w)
            .map(|((a, b), wi)| wi * (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Serialize as `q,re,im,abs2` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,re,im,abs2\n");
        for (i, z) in self.psi.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.grid.node(i),
                z.re,
                z.im,
                z.norm_sqr()
            ));
        }
        out
    }
}

/// A unit-norm Gaussian packet
/// `ψ(q) ∝ exp(−(q − center)²/(4σ²) + i·momentum·q/ħ)`
/// with position standard deviation σ = `width`.
pub fn gaussian_packet(
    center: f64,
    momentum: f64,
    width: f64,
    grid: Range1D,
    hbar: f64,
) -> Result<WaveGrid> {
    if !width.is_finite() || width <= 0.0 {
        return Err(Error::invalid("packet width must be positive"));
    }
    if !(center.is_finite() && momentum.is_finite()) {
        return Err(Error::invalid("packet parameters must be finite"));
    }
    if width < 2.0 * grid.spacing() {
        return Err(Error::Resolution(format!(
            "packet width {width} needs grid spacing below {}, got {}",
            width / 2.0,
            grid.spacing()
        )));
    }
    let psi: Vec<Complex64> = (0..grid.count)
        .map(|i| {
            let q = grid.node(i);
            let envelope = (-(q - center) * (q - center) / (4.0 * width * width)).exp();
            envelope * Complex64::from_polar(1.0, momentum * q / hbar)
        })
        .collect();
    let state = WaveGrid::from_values(grid, psi, hbar)?;
    let norm = state.norm();
    if !norm.is_finite() || norm == 0.0 {
        return Err(Error::invalid("packet has no support on the grid"));
    }
    let psi = state.psi.iter().map(|z| z / norm).collect();
    WaveGrid::from_values(grid, psi, hbar)
}

fn check_boundary(state: &WaveGrid, stage: &str) -> Result<()> {
    let first = state.psi[0].norm();
    let last = state.psi[state.psi.len() - 1].norm();
    if first > BOUNDARY_THRESHOLD || last > BOUNDARY_THRESHOLD {
        return Err(Error::invalid(format!(
            "wavefunction support reaches the grid boundary {stage} evolution \
             (|ψ| = {:.3e}); widen the grid instead of truncating",
            first.max(last)
        )));
    }
    Ok(())
}

/// Apply the propagator kernel to a state.
pub fn evolve(state: &WaveGrid, spec: &PropagatorSpec) -> Result<WaveGrid> {
    if state.hbar != spec.hbar {
        return Err(Error::invalid(format!(
            "state carries hbar = {}, spec has {}",
            state.hbar, spec.hbar
        )));
    }
    check_boundary(state, "before")?;

    let grid = state.grid;
    let form = spec.action_form();
    let hbar = spec.hbar;

    // support of the input state, for the chirp-resolution guard
    let peak = state.psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut support = (grid.max, grid.min);
    for (i, z) in state.psi.iter().enumerate() {
        if z.norm() > SUPPORT_THRESHOLD * peak {
            let q = grid.node(i);
            support.0 = support.0.min(q);
            support.1 = support.1.max(q);
        }
    }
    let phase_rate = |q1: f64, q0: f64| ((form.beta * q1 + 2.0 * form.gamma * q0) / hbar).abs();
    let max_rate = [
        phase_rate(grid.min, support.0),
        phase_rate(grid.min, support.1),
        phase_rate(grid.max, support.0),
        phase_rate(grid.max, support.1),
    ]
    .into_iter()
    .fold(0.0f64, f64::max);
    let required = 2.0 * std::f64::consts::PI / (SAMPLES_PER_PERIOD * max_rate.max(1e-12));
    let actual = grid.spacing();
    if actual > required {
        return Err(Error::Aliasing { required, actual });
    }

    let weights = trapezoid_weights(grid.count, actual);
    let prefactor = Complex64::from_polar(spec.prefactor_modulus(), -FRAC_PI_4);
    // fold the q0-only phase and the quadrature weight into the source
    let sources: Vec<Complex64> = (0..grid.count)
        .map(|j| {
            let q0 = grid.node(j);
            weights[j]
                * state.psi[j]
                * Complex64::from_polar(1.0, form.gamma * q0 * q0 / hbar)
        })
        .collect();
    let nodes = grid.nodes();
    let mut psi = Vec::with_capacity(grid.count);
    for &q1 in &nodes {
        let outer = prefactor * Complex64::from_polar(1.0, form.alpha * q1 * q1 / hbar);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, source) in sources.iter().enumerate() {
            let cross = Complex64::from_polar(1.0, form.beta * q1 * nodes[j] / hbar);
            acc += cross * source;
        }
        psi.push(outer * acc);
    }
    let evolved = WaveGrid::from_values(grid, psi, hbar)?;
    check_boundary(&evolved, "after")?;
    Ok(evolved)
}

/// Relative L² difference between direct evolution over `[t0, t1]` and the
/// two-step evolution through `t_mid`. Zero for the free kernel; strictly
/// positive once κ > 0.
pub fn composition_defect(state: &WaveGrid, spec: &PropagatorSpec, t_mid: f64) -> Result<f64> {
    if !(t_mid.is_finite() && spec.t0 < t_mid && t_mid < spec.t1) {
        return Err(Error::invalid("t_mid must lie strictly inside (t0, t1)"));
    }
    let first = PropagatorSpec::new(spec.kappa, spec.hbar, spec.t0, t_mid)?;
    let second = PropagatorSpec::new(spec.kappa, spec.hbar, t_mid, spec.t1)?;
    let direct = evolve(state, spec)?;
    let stepped = evolve(&evolve(state, &first)?, &second)?;
    Ok(stepped.distance(&direct)? / state.norm())
}
