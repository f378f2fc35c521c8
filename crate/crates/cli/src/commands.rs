//! Subcommand implementations.

use clap::Args;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

use dissiprop::action::{action_quadratic_form, closed_form_action, effective_action_quadrature};
use dissiprop::dynamics::damped_free_trajectory;
use dissiprop::lattice::{convergence_rows, ConvergenceRow};
use dissiprop::phase::{
    closedness_defect, stokes_residual, ExtendedPhasePoint, ForceField, SurfaceGrid,
};
use dissiprop::propagator::{analytic_propagator, chapman_kolmogorov_residual, PropagatorSpec};
use dissiprop::verify;
use dissiprop::wavepacket::{evolve, gaussian_packet};
use dissiprop::Range1D;

use crate::config::RunConfig;
use crate::CliError;

/// A successful run: JSON summary plus process exit code.
pub struct RunOutput {
    pub summary: Value,
    pub code: u8,
}

impl RunOutput {
    fn ok(summary: Value) -> Result<RunOutput, CliError> {
        Ok(RunOutput { summary, code: 0 })
    }
}

fn write_artifact(path: &Path, hash: &str, body: &str) -> Result<(), CliError> {
    let content = format!("# config {hash}\n{body}");
    std::fs::write(path, content).map_err(|e| CliError {
        code: 2,
        message: format!("cannot write {}: {e}", path.display()),
        context: Value::Null,
    })
}

#[derive(Args)]
pub struct ActionArgs {
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t1: Option<f64>,
    /// Trajectory samples for the Simpson cross-check
    #[arg(long)]
    samples: Option<usize>,
}

pub fn run_action(config: Option<&Path>, args: &ActionArgs) -> Result<RunOutput, CliError> {
    let mut cfg = RunConfig::load(config, "action")?;
    let kappa = cfg.f64("kappa", args.kappa, 1.0)?;
    let q0 = cfg.f64("q0", args.q0, 0.0)?;
    let t0 = cfg.f64("t0", args.t0, 0.0)?;
    let q1 = cfg.f64("q1", args.q1, 1.0)?;
    let t1 = cfg.f64("t1", args.t1, 1.0)?;
    let samples = cfg.usize("samples", args.samples, 2001)?;

    let closed = closed_form_action(kappa, q0, t0, q1, t1)?;
    let traj = damped_free_trajectory(kappa, q0, t0, q1, t1, samples)?;
    let quadrature = effective_action_quadrature(&traj, kappa)?;
    let form = action_quadratic_form(kappa, t0, t1)?;
    RunOutput::ok(json!({
        "command": "action",
        "config_hash": cfg.hash(),
        "config": cfg.resolved_json(),
        "closed_form": closed,
        "quadrature": quadrature,
        "difference": (closed - quadrature).abs(),
        "form": {
            "kappa": form.kappa,
            "delta_t": form.delta_t,
            "alpha": form.alpha,
            "beta": form.beta,
            "gamma": form.gamma,
        },
    }))
}

#[derive(Args)]
pub struct PropagatorArgs {
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    hbar: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    qmin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    qmax: Option<f64>,
    #[arg(long)]
    qcount: Option<usize>,
    /// Amplitude table destination (CSV: q0,q1,re,im)
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run_propagator(config: Option<&Path>, args: &PropagatorArgs) -> Result<RunOutput, CliError> {
    let mut cfg = RunConfig::load(config, "propagator")?;
    let kappa = cfg.f64("kappa", args.kappa, 1.0)?;
    let hbar = cfg.f64("hbar", args.hbar, 1.0)?;
    let t0 = cfg.f64("t0", args.t0, 0.0)?;
    let t1 = cfg.f64("t1", args.t1, 1.0)?;
    let qmin = cfg.f64("qmin", args.qmin, -3.0)?;
    let qmax = cfg.f64("qmax", args.qmax, 3.0)?;
    let qcount = cfg.usize("qcount", args.qcount, 41)?;

    let spec = PropagatorSpec::new(kappa, hbar, t0, t1)?;
    let grid = Range1D::new(qmin, qmax, qcount)?;
    let nodes = grid.nodes();
    let mut body = String::from("q0,q1,re,im\n");
    for &q0 in &nodes {
        for &q1 in &nodes {
            let amp = analytic_propagator(&spec, q0, q1)?;
            body.push_str(&format!("{q0},{q1},{},{}\n", amp.value.re, amp.value.im));
        }
    }
    let hash = cfg.hash();
    if let Some(path) = &args.out {
        write_artifact(path, &hash, &body)?;
    }
    RunOutput::ok(json!({
        "command": "propagator",
        "config_hash": hash,
        "config": cfg.resolved_json(),
        "modulus": spec.prefactor_modulus(),
        "rows": qcount * qcount,
        "out": args.out.as_ref().map(|p| p.display().to_string()),
    }))
}

#[derive(Args)]
pub struct CktestArgs {
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    hbar: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tmid: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    qmin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    qmax: Option<f64>,
    #[arg(long)]
    qcount: Option<usize>,
}

pub fn run_cktest(config: Option<&Path>, args: &CktestArgs) -> Result<RunOutput, CliError> {
    let mut cfg = RunConfig::load(config, "cktest")?;
    let kappa = cfg.f64("kappa", args.kappa, 1.0)?;
    let hbar = cfg.f64("hbar", args.hbar, 1.0)?;
    let t0 = cfg.f64("t0", args.t0, 0.0)?;
    let tmid = cfg.f64("tmid", args.tmid, 0.5)?;
    let t1 = cfg.f64("t1", args.t1, 1.0)?;
    let qmin = cfg.f64("qmin", args.qmin, -3.0)?;
    let qmax = cfg.f64("qmax", args.qmax, 3.0)?;
    let qcount = cfg.usize("qcount", args.qcount, 41)?;

    let spec = PropagatorSpec::new(kappa, hbar, t0, t1)?;
    let grid = Range1D::new(qmin, qmax, qcount)?;
    let residual = chapman_kolmogorov_residual(&spec, tmid, grid)?;
    let status = if residual < 1e-10 {
        "markovian"
    } else {
        "non_markovian"
    };
    RunOutput::ok(json!({
        "command": "cktest",
        "config_hash": cfg.hash(),
        "config": cfg.resolved_json(),
        "residual": residual,
        "status": status,
    }))
}

#[derive(Args)]
pub struct LatticeArgs {
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    hbar: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t1: Option<f64>,
    /// Slice-count ladder, e.g. --n-ladder 32,64,128
    #[arg(long = "n-ladder", value_delimiter = ',')]
    n_ladder: Option<Vec<usize>>,
    /// Convergence report destination (CSV: N,S_N,abs_err,ratio)
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run_lattice(config: Option<&Path>, args: &LatticeArgs) -> Result<RunOutput, CliError> {
    let mut cfg = RunConfig::load(config, "lattice")?;
    let kappa = cfg.f64("kappa", args.kappa, 1.0)?;
    let hbar = cfg.f64("hbar", args.hbar, 1.0)?;
    let q0 = cfg.f64("q0", args.q0, 0.0)?;
    let t0 = cfg.f64("t0", args.t0, 0.0)?;
    let q1 = cfg.f64("q1", args.q1, 1.0)?;
    let t1 = cfg.f64("t1", args.t1, 1.0)?;
    let ladder = cfg.usize_list("n_ladder", args.n_ladder.as_deref(), &[32, 64, 128])?;

    let rows = convergence_rows(kappa, hbar, q0, t0, q1, t1, &ladder)?;
    let closed = closed_form_action(kappa, q0, t0, q1, t1)?;
    let mut body = String::from("N,S_N,abs_err,ratio\n");
    for row in &rows {
        let ratio = row.ratio.map(|r| r.to_string()).unwrap_or_default();
        body.push_str(&format!(
            "{},{},{},{ratio}\n",
            row.n_slices, row.action, row.abs_err
        ));
    }
    let hash = cfg.hash();
    if let Some(path) = &args.out {
        write_artifact(path, &hash, &body)?;
    }
    let row_json = |row: &ConvergenceRow| {
        json!({
            "n": row.n_slices,
            "action": row.action,
            "abs_err": row.abs_err,
            "ratio": row.ratio,
        })
    };
    RunOutput::ok(json!({
        "command": "lattice",
        "config_hash": hash,
        "config": cfg.resolved_json(),
        "closed_form": closed,
        "rows": rows.iter().map(row_json).collect::<Vec<_>>(),
        "out": args.out.as_ref().map(|p| p.display().to_string()),
    }))
}

#[derive(Args)]
pub struct SurfaceArgs {
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q1: Option<f64>,
    /// Grid cells per direction for the generated surface
    #[arg(long)]
    cells: Option<usize>,
    /// Cube edge for the closedness-defect probe
    #[arg(long, allow_negative_numbers = true)]
    scale: Option<f64>,
    /// Load a surface from CSV (t,s,q,p) instead of generating one
    #[arg(long)]
    input: Option<PathBuf>,
    /// Write the surface that was checked (CSV: t,s,q,p)
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run_surface(config: Option<&Path>, args: &SurfaceArgs) -> Result<RunOutput, CliError> {
    let mut cfg = RunConfig::load(config, "surface")?;
    let kappa = cfg.f64("kappa", args.kappa, 1.0)?;
    let t0 = cfg.f64("t0", args.t0, 0.0)?;
    let t1 = cfg.f64("t1", args.t1, 1.0)?;
    let q0 = cfg.f64("q0", args.q0, -0.3)?;
    let q1 = cfg.f64("q1", args.q1, 0.9)?;
    let cells = cfg.usize("cells", args.cells, 64)?;
    let scale = cfg.f64("scale", args.scale, 0.05)?;
    let source = cfg.string(
        "input",
        args.input.as_ref().map(|p| p.to_str().unwrap_or_default()),
        "",
    )?;

    let surface = if source.is_empty() {
        SurfaceGrid::curved_sheet(t0, t1, q0, q1, cells, cells)?
    } else {
        let text = std::fs::read_to_string(&source).map_err(|e| CliError {
            code: 2,
            message: format!("cannot read surface {source}: {e}"),
            context: Value::Null,
        })?;
        SurfaceGrid::from_csv(&text)?
    };

    let stokes_free = stokes_residual(&surface, |_, p, _| 0.5 * p * p)?;
    let stokes_harmonic = stokes_residual(&surface, |q, p, _| 0.5 * p * p + 0.5 * q * q)?;
    // probe the closedness defect at the surface's central node
    let mid_i = (surface.t_count() - 1) / 2;
    let mid_j = (surface.s_count() - 1) / 2;
    let probe = ExtendedPhasePoint::new(
        surface.q_at(mid_i, mid_j),
        surface.p_at(mid_i, mid_j),
        surface.t_nodes()[mid_i],
    )?;
    let damped = ForceField::damped(kappa)?;
    let defect_damped = closedness_defect(&damped, &probe, scale)?;
    let defect_free = closedness_defect(&ForceField::free(), &probe, scale)?;

    let hash = cfg.hash();
    if let Some(path) = &args.out {
        write_artifact(path, &hash, &surface.to_csv())?;
    }
    RunOutput::ok(json!({
        "command": "surface",
        "config_hash": hash,
        "config": cfg.resolved_json(),
        "t_nodes": surface.t_count(),
        "s_nodes": surface.s_count(),
        "stokes_residual_free": stokes_free,
        "stokes_residual_harmonic": stokes_harmonic,
        "closedness_defect_damped": defect_damped,
        "closedness_defect_free": defect_free,
        "probe": { "q": probe.q, "p": probe.p, "t": probe.t },
        "out": args.out.as_ref().map(|p| p.display().to_string()),
    }))
}

#[derive(Args)]
pub struct EvolveArgs {
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    hbar: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    center: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    momentum: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    qmin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    qmax: Option<f64>,
    #[arg(long)]
    qcount: Option<usize>,
    /// Number of equal time slices to evolve through
    #[arg(long)]
    steps: Option<usize>,
    /// Final wavefunction destination (CSV: q,re,im,abs2)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-step report destination (CSV: step,t,norm,center,width)
    #[arg(long)]
    report_out: Option<PathBuf>,
}

pub fn run_evolve(config: Option<&Path>, args: &EvolveArgs) -> Result<RunOutput, CliError> {
    let mut cfg = RunConfig::load(config, "evolve")?;
    let kappa = cfg.f64("kappa", args.kappa, 1.0)?;
    let hbar = cfg.f64("hbar", args.hbar, 1.0)?;
    let t0 = cfg.f64("t0", args.t0, 0.0)?;
    let t1 = cfg.f64("t1", args.t1, 1.0)?;
    let center = cfg.f64("center", args.center, 0.0)?;
    let momentum = cfg.f64("momentum", args.momentum, 0.0)?;
    let sigma = cfg.f64("sigma", args.sigma, 1.0)?;
    let qmin = cfg.f64("qmin", args.qmin, -18.0)?;
    let qmax = cfg.f64("qmax", args.qmax, 18.0)?;
    let qcount = cfg.usize("qcount", args.qcount, 2001)?;
    let steps = cfg.usize("steps", args.steps, 1)?;
    if steps == 0 {
        return Err(CliError::invalid_config("steps must be at least 1".into()));
    }

    let grid = Range1D::new(qmin, qmax, qcount)?;
    let mut state = gaussian_packet(center, momentum, sigma, grid, hbar)?;
    let mut report_rows = vec![json!({
        "step": 0,
        "t": t0,
        "norm": state.norm(),
        "center": state.center(),
        "width": state.width(),
    })];
    let mut body = String::from("step,t,norm,center,width\n");
    body.push_str(&format!(
        "0,{t0},{},{},{}\n",
        state.norm(),
        state.center(),
        state.width()
    ));
    let slice_width = (t1 - t0) / steps as f64;
    for step in 1..=steps {
        let slice_start = t0 + slice_width * (step - 1) as f64;
        let slice_end = if step == steps {
            t1
        } else {
            t0 + slice_width * step as f64
        };
        let spec = PropagatorSpec::new(kappa, hbar, slice_start, slice_end)?;
        state = evolve(&state, &spec)?;
        report_rows.push(json!({
            "step": step,
            "t": slice_end,
            "norm": state.norm(),
            "center": state.center(),
            "width": state.width(),
        }));
        body.push_str(&format!(
            "{step},{slice_end},{},{},{}\n",
            state.norm(),
            state.center(),
            state.width()
        ));
    }
    let hash = cfg.hash();
    if let Some(path) = &args.out {
        write_artifact(path, &hash, &state.to_csv())?;
    }
    if let Some(path) = &args.report_out {
        write_artifact(path, &hash, &body)?;
    }
    RunOutput::ok(json!({
        "command": "evolve",
        "config_hash": hash,
        "config": cfg.resolved_json(),
        "steps": report_rows,
        "out": args.out.as_ref().map(|p| p.display().to_string()),
        "report_out": args.report_out.as_ref().map(|p| p.display().to_string()),
    }))
}

#[derive(Args)]
pub struct VerifyArgs {}

pub fn run_verify(config: Option<&Path>, _args: &VerifyArgs) -> Result<RunOutput, CliError> {
    let cfg = RunConfig::load(config, "verify")?;
    let reports = verify::run_all();
    for report in &reports {
        eprintln!("{}", report.summary_line());
    }
    let all_passed = verify::all_passed(&reports);
    let criteria: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "id": r.id,
                "name": r.name,
                "passed": r.passed,
                "details": r.details,
            })
        })
        .collect();
    Ok(RunOutput {
        summary: json!({
            "command": "verify",
            "config_hash": cfg.hash(),
            "all_passed": all_passed,
            "criteria": criteria,
        }),
        code: if all_passed { 0 } else { 4 },
    })
}
