//! Extended-phase-space geometry.
//!
//! Points live in `(q, p, t)` space with time as an explicit coordinate.
//! The central object is the canonical two-form
//!
//! ```text
//! Ω = dp ∧ dq − (T(q)·p·dp − F(q,p,t)·dq) ∧ dt
//! ```
//!
//! which generalizes `d(p dq − H dt)` to force fields that are not
//! potential-generated. Ω is closed exactly when the force comes from a
//! Hamiltonian; the failure of closedness is what [`closedness_defect`]
//! measures, and the equality of surface and contour integrals (Stokes)
//! is what [`stokes_residual`] checks.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A point `(q, p, t)` in extended phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedPhasePoint {
    pub q: f64,
    pub p: f64,
    pub t: f64,
}

impl ExtendedPhasePoint {
    pub fn new(q: f64, p: f64, t: f64) -> Result<Self> {
        if !(q.is_finite() && p.is_finite() && t.is_finite()) {
            return Err(Error::invalid("phase point components must be finite"));
        }
        Ok(ExtendedPhasePoint { q, p, t })
    }
}

type MetricFn = dyn Fn(f64) -> f64 + Send + Sync;
type ForceFn = dyn Fn(f64, f64, f64) -> f64 + Send + Sync;

/// Classical dynamics defined without any Lagrangian: a kinetic metric
/// `T(q)` (the inverse-mass factor in `T = ½ T p²`) plus a force
/// `F(q, p, t)`, so that `q̇ = T(q)·p` and `ṗ = F(q, p, t)`.
#[derive(Clone)]
pub struct ForceField {
    kinetic_metric: Arc<MetricFn>,
    force: Arc<ForceFn>,
    friction_kappa: Option<f64>,
    tag: String,
}

impl ForceField {
    /// Unit-mass free particle: `T = 1`, `F = 0`.
    pub fn free() -> Self {
        ForceField {
            kinetic_metric: Arc::new(|_| 1.0),
            force: Arc::new(|_, _, _| 0.0),
            friction_kappa: Some(0.0),
            tag: "free".to_string(),
        }
    }

    /// Unit-mass particle with linear friction: `T = 1`, `F = -κ p`.
    pub fn damped(kappa: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::invalid("friction kappa must be finite and >= 0"));
        }
        Ok(ForceField {
            kinetic_metric: Arc::new(|_| 1.0),
            force: Arc::new(move |_, p, _| -kappa * p),
            friction_kappa: Some(kappa),
            tag: format!("damped(kappa={kappa})"),
        })
    }

    /// A field from explicit metric and force closures.
    pub fn new<M, F>(tag: impl Into<String>, kinetic_metric: M, force: F) -> Self
    where
        M: Fn(f64) -> f64 + Send + Sync + 'static,
        F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        ForceField {
            kinetic_metric: Arc::new(kinetic_metric),
            force: Arc::new(force),
            friction_kappa: None,
            tag: tag.into(),
        }
    }

    /// The potential-generated field of a Hamiltonian `H(q, p, t)` with a
    /// kinetic term quadratic in `p`: `F = -∂H/∂q` and `T = ∂²H/∂p²` by
    /// central differences (exact for quadratic kinetic energy).
    pub fn from_hamiltonian<H>(tag: impl Into<String>, hamiltonian: H) -> Self
    where
        H: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        let h = Arc::new(hamiltonian);
        let hq = Arc::clone(&h);
        let hp = Arc::clone(&h);
        ForceField {
            kinetic_metric: Arc::new(move |q| {
                let step = 1e-4 * (1.0 + q.abs());
                (hp(q, step, 0.0) - 2.0 * hp(q, 0.0, 0.0) + hp(q, -step, 0.0)) / (step * step)
            }),
            force: Arc::new(move |q, p, t| {
                let step = f64::EPSILON.cbrt() * (1.0 + q.abs());
                -(hq(q + step, p, t) - hq(q - step, p, t)) / (2.0 * step)
            }),
            friction_kappa: None,
            tag: tag.into(),
        }
    }

    pub fn kinetic(&self, q: f64) -> f64 {
        (self.kinetic_metric)(q)
    }

    pub fn force(&self, q: f64, p: f64, t: f64) -> f64 {
        (self.force)(q, p, t)
    }

    pub fn friction_kappa(&self) -> Option<f64> {
        self.friction_kappa
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    fn checked_kinetic(&self, q: f64) -> Result<f64> {
        let t = self.kinetic(q);
        if !t.is_finite() || t <= 0.0 {
            return Err(Error::invalid(format!(
                "kinetic metric must be positive and finite, got {t} at q = {q}"
            )));
        }
        Ok(t)
    }
}

impl fmt::Debug for ForceField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ForceField")
            .field("tag", &self.tag)
            .field("friction_kappa", &self.friction_kappa)
            .finish()
    }
}

/// A discretized surface `Σ: [t0,t1] × [0,1] → (q, p, t)` with the time
/// coordinate never reparameterized: node `(i, j)` sits at time `t_i`.
///
/// Column `j = 0` samples the anchoring classical trajectory, column
/// `j = K` the sampled path; rows `i = 0` and `i = M` are momentum-only
/// connector curves, so `q` is constant along them.
#[derive(Debug, Clone)]
pub struct SurfaceGrid {
    t_nodes: Vec<f64>,
    s_nodes: Vec<f64>,
    /// Row-major `(M+1) x (K+1)` arrays.
    q_values: Vec<f64>,
    p_values: Vec<f64>,
}

impl SurfaceGrid {
    pub fn new(
        t_nodes: Vec<f64>,
        s_nodes: Vec<f64>,
        q_values: Vec<f64>,
        p_values: Vec<f64>,
    ) -> Result<Self> {
        if t_nodes.len() < 2 || s_nodes.len() < 2 {
            return Err(Error::invalid("surface needs at least 2 nodes per direction"));
        }
        if !strictly_increasing(&t_nodes) {
            return Err(Error::invalid("t nodes must be strictly increasing"));
        }
        if !strictly_increasing(&s_nodes) {
            return Err(Error::invalid("s nodes must be strictly increasing"));
        }
        if s_nodes[0] < 0.0 || *s_nodes.last().unwrap() > 1.0 {
            return Err(Error::invalid("s nodes must lie in [0, 1]"));
        }
        let expect = t_nodes.len() * s_nodes.len();
        if q_values.len() != expect || p_values.len() != expect {
            return Err(Error::invalid(format!(
                "value arrays must have {} entries, got q: {}, p: {}",
                expect,
                q_values.len(),
                p_values.len()
            )));
        }
        if q_values.iter().chain(p_values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("surface values must be finite"));
        }
        let grid = SurfaceGrid {
            t_nodes,
            s_nodes,
            q_values,
            p_values,
        };
        // λ-rows evolve only in momentum: q constant along the first and last row
        for i in [0, grid.t_count() - 1] {
            let q0 = grid.q_at(i, 0);
            for j in 0..grid.s_count() {
                if (grid.q_at(i, j) - q0).abs() > 1e-9 * (1.0 + q0.abs()) {
                    return Err(Error::invalid(format!(
                        "row {i} must have constant q (connector curves vary only in p)"
                    )));
                }
            }
        }
        Ok(grid)
    }

    /// The surface spanned between two trajectories sampled on the same
    /// time nodes, with linear interpolation in momentum. This is the
    /// simplest connector choice; nothing downstream depends on it.
    pub fn between(
        classical: &crate::dynamics::Trajectory,
        sampled: &crate::dynamics::Trajectory,
        s_count: usize,
    ) -> Result<Self> {
        if s_count < 2 {
            return Err(Error::invalid("surface needs at least 2 s nodes"));
        }
        let t_a = classical.times();
        let t_b = sampled.times();
        if t_a.len() != t_b.len() || t_a.iter().zip(t_b).any(|(a, b)| (a - b).abs() > 1e-12) {
            return Err(Error::invalid("trajectories must share time nodes"));
        }
        for idx in [0, t_a.len() - 1] {
            if (classical.positions()[idx] - sampled.positions()[idx]).abs() > 1e-9 {
                return Err(Error::invalid(
                    "trajectories must share endpoint positions to span a surface",
                ));
            }
        }
        let s_nodes: Vec<f64> = (0..s_count)
            .map(|j| j as f64 / (s_count - 1) as f64)
            .collect();
        let mut q_values = Vec::with_capacity(t_a.len() * s_count);
        let mut p_values = Vec::with_capacity(t_a.len() * s_count);
        for i in 0..t_a.len() {
            for &s in &s_nodes {
                q_values.push((1.0 - s) * classical.positions()[i] + s * sampled.positions()[i]);
                p_values.push((1.0 - s) * classical.momenta()[i] + s * sampled.momenta()[i]);
            }
        }
        SurfaceGrid::new(t_a.to_vec(), s_nodes, q_values, p_values)
    }

    /// A smoothly curved sheet over the straight line between the
    /// endpoints. The bumps carry a `τ(1−τ)` factor so they vanish at the
    /// time edges and the boundary rows keep constant q; useful as a
    /// nontrivial surface for Stokes checks.
    pub fn curved_sheet(
        t0: f64,
        t1: f64,
        q0: f64,
        q1: f64,
        t_cells: usize,
        s_cells: usize,
    ) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite() && q0.is_finite() && q1.is_finite()) {
            return Err(Error::invalid("sheet parameters must be finite"));
        }
        if t1 <= t0 {
            return Err(Error::invalid("t1 must exceed t0"));
        }
        if t_cells < 1 || s_cells < 1 {
            return Err(Error::invalid("sheet needs at least one cell per direction"));
        }
        let t_nodes: Vec<f64> = (0..=t_cells)
            .map(|i| t0 + (t1 - t0) * i as f64 / t_cells as f64)
            .collect();
        let s_nodes: Vec<f64> = (0..=s_cells)
            .map(|j| j as f64 / s_cells as f64)
            .collect();
        let slope = (q1 - q0) / (t1 - t0);
        let mut q_values = Vec::with_capacity(t_nodes.len() * s_nodes.len());
        let mut p_values = Vec::with_capacity(t_nodes.len() * s_nodes.len());
        for &t in &t_nodes {
            let tau = (t - t0) / (t1 - t0);
            for &s in &s_nodes {
                q_values
                    .push(q0 + (q1 - q0) * tau + 0.4 * tau * (1.0 - tau) * (PI * s + 0.7 * tau).sin());
                p_values.push(slope + 0.5 * (s * (1.0 - s) * (2.0 * tau + s).cos() + 0.3 * s));
            }
        }
        SurfaceGrid::new(t_nodes, s_nodes, q_values, p_values)
    }

    /// The same surface with an interior momentum bump that vanishes on all
    /// four edges, so the pair shares its boundary loop. For potential
    /// fields the two surface integrals agree; for κ > 0 they differ by
    /// −κ times the swept three-volume.
    pub fn with_momentum_bump(&self, amplitude: f64) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(Error::invalid("bump amplitude must be finite"));
        }
        let t0 = self.t_nodes[0];
        let t1 = *self.t_nodes.last().unwrap();
        let mut p_values = self.p_values.clone();
        for (i, &t) in self.t_nodes.iter().enumerate() {
            let tau = (t - t0) / (t1 - t0);
            for (j, &s) in self.s_nodes.iter().enumerate() {
                let shape = (PI * s).sin();
                p_values[i * self.s_count() + j] +=
                    amplitude * 4.0 * shape * shape * tau * (1.0 - tau);
            }
        }
        SurfaceGrid::new(
            self.t_nodes.clone(),
            self.s_nodes.clone(),
            self.q_values.clone(),
            p_values,
        )
    }

    pub fn t_count(&self) -> usize {
        self.t_nodes.len()
    }

    pub fn s_count(&self) -> usize {
        self.s_nodes.len()
    }

    pub fn t_nodes(&self) -> &[f64] {
        &self.t_nodes
    }

    pub fn s_nodes(&self) -> &[f64] {
        &self.s_nodes
    }

    pub fn q_at(&self, i: usize, j: usize) -> f64 {
        self.q_values[i * self.s_count() + j]
    }

    pub fn p_at(&self, i: usize, j: usize) -> f64 {
        self.p_values[i * self.s_count() + j]
    }

    /// Boundary of the surface as a closed loop, traversed counterclockwise
    /// in the `(t, s)` parameter rectangle: classical column forward in t,
    /// final connector forward in s, sampled column backward in t, initial
    /// connector backward in s.
    pub fn boundary_loop(&self) -> LoopPath {
        let m = self.t_count() - 1;
        let k = self.s_count() - 1;
        let mut points = Vec::with_capacity(2 * m + 2 * k + 1);
        let push = |points: &mut Vec<ExtendedPhasePoint>, i: usize, j: usize, s: &Self| {
            points.push(ExtendedPhasePoint {
                q: s.q_at(i, j),
                p: s.p_at(i, j),
                t: s.t_nodes[i],
            });
        };
        for i in 0..=m {
            push(&mut points, i, 0, self);
        }
        for j in 1..=k {
            push(&mut points, m, j, self);
        }
        for i in (0..m).rev() {
            push(&mut points, i, k, self);
        }
        for j in (0..k).rev() {
            push(&mut points, 0, j, self);
        }
        LoopPath::new(points).expect("surface boundary is closed by construction")
    }

    /// Serialize as `t,s,q,p` rows, row-major over `(i, j)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,s,q,p\n");
        for i in 0..self.t_count() {
            for j in 0..self.s_count() {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    self.t_nodes[i],
                    self.s_nodes[j],
                    self.q_at(i, j),
                    self.p_at(i, j)
                ));
            }
        }
        out
    }

    /// Parse the `t,s,q,p` format written by [`SurfaceGrid::to_csv`].
    /// Lines starting with `#` are ignored.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<[f64; 4]> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line == "t,s,q,p" {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Parse(format!(
                    "line {}: expected 4 fields, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let mut row = [0.0; 4];
            for (slot, field) in row.iter_mut().zip(&fields) {
                *slot = field
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            }
            rows.push(row);
        }
        if rows.len() < 4 {
            return Err(Error::Parse("surface table needs at least 4 rows".into()));
        }
        // s runs fastest: the first block (constant t) fixes the s nodes
        let mut s_nodes = vec![rows[0][1]];
        for row in &rows[1..] {
            if (row[0] - rows[0][0]).abs() > 0.0 && row[0] != rows[0][0] {
                break;
            }
            s_nodes.push(row[1]);
        }
        let k1 = s_nodes.len();
        if rows.len() % k1 != 0 {
            return Err(Error::Parse(format!(
                "row count {} is not a multiple of the s-block size {}",
                rows.len(),
                k1
            )));
        }
        let m1 = rows.len() / k1;
        let mut t_nodes = Vec::with_capacity(m1);
        let mut q_values = Vec::with_capacity(rows.len());
        let mut p_values = Vec::with_capacity(rows.len());
        for i in 0..m1 {
            t_nodes.push(rows[i * k1][0]);
            for j in 0..k1 {
                let row = &rows[i * k1 + j];
                if row[0] != t_nodes[i] || row[1] != s_nodes[j] {
                    return Err(Error::Parse(format!(
                        "row {} breaks the row-major (t, s) layout",
                        i * k1 + j + 1
                    )));
                }
                q_values.push(row[2]);
                p_values.push(row[3]);
            }
        }
        SurfaceGrid::new(t_nodes, s_nodes, q_values, p_values)
    }
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0]) && v.iter().all(|x| x.is_finite())
}

/// Traversal direction of a loop relative to its construction order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Forward,
    Reversed,
}

/// A closed polyline in extended phase space.
#[derive(Debug, Clone)]
pub struct LoopPath {
    points: Vec<ExtendedPhasePoint>,
    orientation: Orientation,
}

impl LoopPath {
    pub fn new(points: Vec<ExtendedPhasePoint>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("loop needs at least 2 points"));
        }
        let first = points[0];
        let last = *points.last().unwrap();
        let scale = 1.0 + first.q.abs() + first.p.abs() + first.t.abs();
        if (first.q - last.q).abs() + (first.p - last.p).abs() + (first.t - last.t).abs()
            > 1e-12 * scale
        {
            return Err(Error::invalid("polyline is not closed"));
        }
        Ok(LoopPath {
            points,
            orientation: Orientation::Forward,
        })
    }

    pub fn points(&self) -> &[ExtendedPhasePoint] {
        &self.points
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// The same loop walked in the opposite direction.
    pub fn reversed(&self) -> LoopPath {
        let mut points = self.points.clone();
        points.reverse();
        LoopPath {
            points,
            orientation: match self.orientation {
                Orientation::Forward => Orientation::Reversed,
                Orientation::Reversed => Orientation::Forward,
            },
        }
    }
}

/// Pullback density of Ω at the midpoint of cell `(i, j)`, by centered
/// differences of the grid arrays:
///
/// ```text
/// p_t q_s − p_s q_t + T(q)·p·p_s − F(q,p,t)·q_s
/// ```
pub fn omega_density(surface: &SurfaceGrid, field: &ForceField, cell: (usize, usize)) -> Result<f64> {
    let (i, j) = cell;
    if i + 1 >= surface.t_count() || j + 1 >= surface.s_count() {
        return Err(Error::invalid(format!(
            "cell ({i}, {j}) outside grid with {}x{} cells",
            surface.t_count() - 1,
            surface.s_count() - 1
        )));
    }
    let dt = surface.t_nodes()[i + 1] - surface.t_nodes()[i];
    let ds = surface.s_nodes()[j + 1] - surface.s_nodes()[j];
    let (q00, q10, q01, q11) = (
        surface.q_at(i, j),
        surface.q_at(i + 1, j),
        surface.q_at(i, j + 1),
        surface.q_at(i + 1, j + 1),
    );
    let (p00, p10, p01, p11) = (
        surface.p_at(i, j),
        surface.p_at(i + 1, j),
        surface.p_at(i, j + 1),
        surface.p_at(i + 1, j + 1),
    );
    let q_mid = 0.25 * (q00 + q10 + q01 + q11);
    let p_mid = 0.25 * (p00 + p10 + p01 + p11);
    let t_mid = 0.5 * (surface.t_nodes()[i] + surface.t_nodes()[i + 1]);
    let q_t = ((q10 - q00) + (q11 - q01)) / (2.0 * dt);
    let q_s = ((q01 - q00) + (q11 - q10)) / (2.0 * ds);
    let p_t = ((p10 - p00) + (p11 - p01)) / (2.0 * dt);
    let p_s = ((p01 - p00) + (p11 - p10)) / (2.0 * ds);
    let metric = field.checked_kinetic(q_mid)?;
    let force = field.force(q_mid, p_mid, t_mid);
    if !force.is_finite() {
        return Err(Error::invalid(format!(
            "force is not finite at (q={q_mid}, p={p_mid}, t={t_mid})"
        )));
    }
    Ok(p_t * q_s - p_s * q_t + metric * p_mid * p_s - force * q_s)
}

/// `∫_Σ Ω` by the midpoint rule over grid cells. Second order in the
/// grid spacings; deterministic.
pub fn integrate_omega(surface: &SurfaceGrid, field: &ForceField) -> Result<f64> {
    if surface.t_count() < 2 || surface.s_count() < 2 {
        return Err(Error::invalid("surface needs at least 2 nodes per direction"));
    }
    let mut total = 0.0;
    for i in 0..surface.t_count() - 1 {
        let dt = surface.t_nodes()[i + 1] - surface.t_nodes()[i];
        for j in 0..surface.s_count() - 1 {
            let ds = surface.s_nodes()[j + 1] - surface.s_nodes()[j];
            total += omega_density(surface, field, (i, j))? * dt * ds;
        }
    }
    Ok(total)
}

/// Trapezoid-rule line integral of `p dq − H dt` along a closed loop.
pub fn contour_integral<H>(loop_path: &LoopPath, hamiltonian: H) -> Result<f64>
where
    H: Fn(f64, f64, f64) -> f64,
{
    let pts = loop_path.points();
    let first = pts[0];
    let last = *pts.last().unwrap();
    if (first.q - last.q).abs() + (first.p - last.p).abs() + (first.t - last.t).abs() > 1e-9 {
        return Err(Error::invalid("polyline is not closed"));
    }
    let mut total = 0.0;
    for seg in pts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let h_a = hamiltonian(a.q, a.p, a.t);
        let h_b = hamiltonian(b.q, b.p, b.t);
        if !(h_a.is_finite() && h_b.is_finite()) {
            return Err(Error::invalid("hamiltonian is not finite on the loop"));
        }
        total += 0.5 * (a.p + b.p) * (b.q - a.q) - 0.5 * (h_a + h_b) * (b.t - a.t);
    }
    Ok(total)
}

/// `|∫_Σ Ω − ∮_∂Σ (p dq − H dt)|` for a surface built over the
/// potential-generated field of `hamiltonian`. Converges to zero under
/// refinement when the force really is potential-generated.
pub fn stokes_residual<H>(surface: &SurfaceGrid, hamiltonian: H) -> Result<f64>
where
    H: Fn(f64, f64, f64) -> f64 + Send + Sync + Clone + 'static,
{
    let field = ForceField::from_hamiltonian("potential", hamiltonian.clone());
    let surface_side = integrate_omega(surface, &field)?;
    let contour_side = contour_integral(&surface.boundary_loop(), hamiltonian)?;
    Ok((surface_side - contour_side).abs())
}

/// Numerical estimate of `dΩ` on the coordinate frame `(∂p, ∂q, ∂t)` at a
/// point: the boundary-sum of Ω over the six faces of a coordinate cube of
/// edge `scale`, divided by its volume.
///
/// Returns `≈ −κ` for the linear-friction field and `≈ 0` for
/// potential-generated fields; the error is `O(scale²)` in general and
/// vanishes identically when `dΩ` is constant.
pub fn closedness_defect(
    field: &ForceField,
    point: &ExtendedPhasePoint,
    scale: f64,
) -> Result<f64> {
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::invalid("scale must be positive"));
    }
    let h = 0.5 * scale;
    let area = scale * scale;
    let volume = area * scale;
    // Ω = A dp∧dq + B dp∧dt + C dq∧dt with A = 1, B = −T(q)p, C = F(q,p,t);
    // the flux field through ∂cube is (C, −B, A). The A-pair of faces
    // (normal ±∂t) cancels identically since A ≡ 1.
    let f_plus = field.force(point.q, point.p + h, point.t);
    let f_minus = field.force(point.q, point.p - h, point.t);
    let tq_plus = field.checked_kinetic(point.q + h)? * point.p;
    let tq_minus = field.checked_kinetic(point.q - h)? * point.p;
    if !(f_plus.is_finite() && f_minus.is_finite()) {
        return Err(Error::invalid("force is not finite near the probe point"));
    }
    let boundary_sum = (f_plus - f_minus) * area + (tq_plus - tq_minus) * area;
    Ok(boundary_sum / volume)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Fixed-q sheet: q(t,s) = q0, p(t,s) = s, over [0, Δt] × [0, 1].
    fn fixed_q_sheet(q0: f64, delta_t: f64, m: usize, k: usize) -> SurfaceGrid {
        let t_nodes: Vec<f64> = (0..=m).map(|i| delta_t * i as f64 / m as f64).collect();
        let s_nodes: Vec<f64> = (0..=k).map(|j| j as f64 / k as f64).collect();
        let mut q = Vec::new();
        let mut p = Vec::new();
        for _ in 0..=m {
            for &s in &s_nodes {
                q.push(q0);
                p.push(s);
            }
        }
        SurfaceGrid::new(t_nodes, s_nodes, q, p).unwrap()
    }

    #[test]
    fn density_vanishes_on_degenerate_surface() {
        // s-independent columns: q_s = p_s = 0 everywhere
        let t_nodes = vec![0.0, 0.5, 1.0];
        let s_nodes = vec![0.0, 0.5, 1.0];
        let mut q = Vec::new();
        let mut p = Vec::new();
        for i in 0..3 {
            for _ in 0..3 {
                q.push(1.0);
                p.push(0.3 * i as f64);
            }
        }
        let surface = SurfaceGrid::new(t_nodes, s_nodes, q, p).unwrap();
        let field = ForceField::free();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(omega_density(&surface, &field, (i, j)).unwrap(), 0.0);
            }
        }
        assert_eq!(integrate_omega(&surface, &field).unwrap(), 0.0);
    }

    #[test]
    fn density_on_fixed_q_sheet_is_s() {
        let surface = fixed_q_sheet(0.7, 1.0, 4, 8);
        let free = ForceField::free();
        let damped = ForceField::damped(0.5).unwrap();
        for j in 0..8 {
            let s_mid = 0.5 * (surface.s_nodes()[j] + surface.s_nodes()[j + 1]);
            for i in 0..4 {
                // q_s = 0 kills the force term, leaving T·p·p_s = s at the midpoint
                assert_abs_diff_eq!(
                    omega_density(&surface, &free, (i, j)).unwrap(),
                    s_mid,
                    epsilon = 1e-14
                );
                assert_abs_diff_eq!(
                    omega_density(&surface, &damped, (i, j)).unwrap(),
                    s_mid,
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn omega_integral_on_fixed_q_sheet() {
        // ∫₀¹∫₀¹ s ds dt = 1/2, exact under the midpoint rule
        let surface = fixed_q_sheet(0.0, 1.0, 8, 8);
        let value = integrate_omega(&surface, &ForceField::free()).unwrap();
        assert_abs_diff_eq!(value, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn omega_integral_second_order() {
        // a curved surface where the midpoint rule is not exact
        let build = |n: usize| {
            let t_nodes: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
            let s_nodes = t_nodes.clone();
            let mut q = Vec::new();
            let mut p = Vec::new();
            for &t in &t_nodes {
                for &s in &s_nodes {
                    q.push(t * (1.0 - t) * (s * s - s).sin());
                    p.push((2.0 * t + s * s).exp() * 0.1);
                }
            }
            SurfaceGrid::new(t_nodes, s_nodes, q, p).unwrap()
        };
        let field = ForceField::damped(0.8).unwrap();
        let coarse = integrate_omega(&build(32), &field).unwrap();
        let medium = integrate_omega(&build(64), &field).unwrap();
        let fine = integrate_omega(&build(128), &field).unwrap();
        let ratio = (coarse - medium) / (medium - fine);
        assert!((3.5..4.5).contains(&ratio), "Richardson ratio {ratio}");
    }

    #[test]
    fn contour_on_fixed_q_sheet_boundary() {
        // only the s = 1 edge contributes: −∫ H dt walked backwards = ½ Δt
        let surface = fixed_q_sheet(0.0, 1.0, 16, 16);
        let value = contour_integral(&surface.boundary_loop(), |_, p, _| 0.5 * p * p).unwrap();
        assert_abs_diff_eq!(value, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn contour_of_constant_loop_is_zero() {
        let pt = ExtendedPhasePoint::new(1.0, 2.0, 3.0).unwrap();
        let lp = LoopPath::new(vec![pt; 5]).unwrap();
        assert_eq!(contour_integral(&lp, |_, p, _| p * p).unwrap(), 0.0);
    }

    #[test]
    fn contour_reversal_negates() {
        let surface = fixed_q_sheet(0.2, 2.0, 6, 6);
        let lp = surface.boundary_loop();
        let h = |q: f64, p: f64, _t: f64| 0.5 * p * p + 0.3 * q;
        let forward = contour_integral(&lp, h).unwrap();
        let backward = contour_integral(&lp.reversed(), h).unwrap();
        assert_abs_diff_eq!(forward, -backward, epsilon = 1e-13);
        assert_eq!(lp.orientation(), Orientation::Forward);
        assert_eq!(lp.reversed().orientation(), Orientation::Reversed);
    }

    #[test]
    fn open_polyline_rejected() {
        let a = ExtendedPhasePoint::new(0.0, 0.0, 0.0).unwrap();
        let b = ExtendedPhasePoint::new(1.0, 0.0, 1.0).unwrap();
        assert!(LoopPath::new(vec![a, b]).is_err());
    }

    #[test]
    fn stokes_residual_free_sheet() {
        let surface = fixed_q_sheet(0.0, 1.0, 64, 64);
        let residual = stokes_residual(&surface, |_, p, _| 0.5 * p * p).unwrap();
        assert!(residual < 1e-6, "residual {residual}");
    }

    #[test]
    fn stokes_residual_degenerate_surface() {
        let t_nodes = vec![0.0, 1.0];
        let s_nodes = vec![0.0, 1.0];
        let surface =
            SurfaceGrid::new(t_nodes, s_nodes, vec![0.5; 4], vec![0.25; 4]).unwrap();
        let residual = stokes_residual(&surface, |q, p, _| 0.5 * p * p + 0.5 * q * q).unwrap();
        assert_abs_diff_eq!(residual, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn closedness_defect_free_field() {
        let point = ExtendedPhasePoint::new(0.3, -1.2, 0.7).unwrap();
        let defect = closedness_defect(&ForceField::free(), &point, 0.1).unwrap();
        assert_abs_diff_eq!(defect, 0.0, epsilon = 1e-8);
    }

    #[test]
    fn closedness_defect_damped_field() {
        let point = ExtendedPhasePoint::new(1.0, 2.0, 0.0).unwrap();
        for kappa in [0.25, 0.5, 1.0] {
            let field = ForceField::damped(kappa).unwrap();
            let defect = closedness_defect(&field, &point, 0.05).unwrap();
            // dΩ = −κ dp∧dq∧dt is constant, so the face sum is exact here
            assert_abs_diff_eq!(defect, -kappa, epsilon = 1e-12);
        }
    }

    #[test]
    fn closedness_defect_convergence_order() {
        // cubic friction has varying dΩ = −3κp² dp∧dq∧dt, exposing the O(scale²) error
        let kappa = 1.0;
        let field = ForceField::new("cubic-friction", |_| 1.0, move |_, p, _| -kappa * p * p * p);
        let point = ExtendedPhasePoint::new(0.0, 1.3, 0.0).unwrap();
        let exact = -3.0 * kappa * point.p * point.p;
        let err = |scale: f64| (closedness_defect(&field, &point, scale).unwrap() - exact).abs();
        let ratio = err(0.2) / err(0.1);
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn closedness_defect_rejects_bad_scale() {
        let point = ExtendedPhasePoint::new(0.0, 0.0, 0.0).unwrap();
        assert!(closedness_defect(&ForceField::free(), &point, 0.0).is_err());
        assert!(closedness_defect(&ForceField::free(), &point, -1.0).is_err());
    }

    #[test]
    fn damped_field_force_is_exact() {
        let field = ForceField::damped(0.75).unwrap();
        for p in [-2.0, -0.5, 0.0, 1.0, 3.5] {
            assert_eq!(field.force(0.3, p, 1.7), -0.75 * p);
        }
        assert_eq!(field.friction_kappa(), Some(0.75));
    }

    #[test]
    fn hamiltonian_field_recovers_metric_and_force() {
        let field = ForceField::from_hamiltonian("harmonic", |q, p, _| 0.5 * p * p + 0.5 * q * q);
        assert_abs_diff_eq!(field.kinetic(0.4), 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(field.force(0.4, 0.0, 0.0), -0.4, epsilon = 1e-9);
    }

    #[test]
    fn surface_rejects_varying_boundary_q() {
        let t_nodes = vec![0.0, 1.0];
        let s_nodes = vec![0.0, 1.0];
        let q = vec![0.0, 0.5, 0.0, 0.0];
        let p = vec![0.0; 4];
        assert!(SurfaceGrid::new(t_nodes, s_nodes, q, p).is_err());
    }

    #[test]
    fn surface_csv_round_trip() {
        let surface = fixed_q_sheet(0.25, 1.5, 3, 4);
        let csv = surface.to_csv();
        assert!(csv.starts_with("t,s,q,p\n"));
        let parsed = SurfaceGrid::from_csv(&csv).unwrap();
        assert_eq!(parsed.t_count(), surface.t_count());
        assert_eq!(parsed.s_count(), surface.s_count());
        for i in 0..surface.t_count() {
            for j in 0..surface.s_count() {
                assert_eq!(parsed.q_at(i, j), surface.q_at(i, j));
                assert_eq!(parsed.p_at(i, j), surface.p_at(i, j));
            }
        }
    }

    #[test]
    fn surface_csv_skips_comments() {
        let surface = fixed_q_sheet(0.0, 1.0, 2, 2);
        let csv = format!("# config abc123\n{}", surface.to_csv());
        assert!(SurfaceGrid::from_csv(&csv).is_ok());
    }
}
