//! The four subcommands. Each returns a summary on success and a
//! [`CliError`] carrying its exit code otherwise.

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::thread;

use gdm_obstacle::diagnostics::{BoundaryMode, ConsistencyOptions, Diagnostics, DiagnosticsError, PowerOptions};
use gdm_obstacle::stepper::EvolutionError;
use gdm_obstacle::{
    solve_active_set_oracle, solve_evolution, solve_psor, DiagnosticsReport, EnergyReport, GradientDiscretisation,
    Stepper, Trajectory,
};
use thiserror::Error;

use crate::config::{ConfigError, FieldPreset, RunConfig};
use crate::output::{self, Check};
use crate::study::{self, LevelErrors, ERROR_NAMES};

/// Largest accepted gap between PSOR and the enumeration oracle.
pub const ORACLE_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("solver did not converge: {0}")]
    Solver(String),
    #[error("acceptance checks failed: {}", .0.join("; "))]
    Acceptance(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Io { .. } => 1,
            Self::Solver(_) => 3,
            Self::Acceptance(_) => 4,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub levels: Option<usize>,
    pub seed: Option<u64>,
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(out) = &overrides.out {
        cfg.out_dir = out.clone();
    }
    if let Some(levels) = overrides.levels {
        cfg.levels = levels;
    }
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn prepare_dir(cfg: &RunConfig) -> Result<&Path, CliError> {
    fs::create_dir_all(&cfg.out_dir).map_err(io_err(&cfg.out_dir))?;
    Ok(&cfg.out_dir)
}

fn solve(cfg: &RunConfig, gd: &GradientDiscretisation<f64>) -> Result<Trajectory<f64>, EvolutionError<f64>> {
    solve_evolution(&cfg.problem(), gd, &cfg.step_options())
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: usize,
    pub snapshots: usize,
    pub max_residual_sign: f64,
    pub max_residual_complementarity: f64,
    pub energy: EnergyReport<f64>,
}

/// One evolution on the base level: snapshots, residual log, energy report
/// and manifest. On solver failure the levels computed so far are still
/// written and the manifest records the failure.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let gd = cfg.discretisation(0)?;
    let dir = prepare_dir(cfg)?;
    let times = gd.time_grid().times();
    let (traj, failure) = match solve(cfg, &gd) {
        Ok(t) => (t, None),
        Err(e) => {
            let partial = e.partial.clone().unwrap_or(Trajectory { a: vec![], b: vec![], reports: vec![] });
            (partial, Some(e))
        }
    };

    let last = traj.a.len().saturating_sub(1);
    let mut snapshots = 0;
    for n in 0..traj.a.len() {
        let keep = n == 0 || n == last || (cfg.snapshot_every > 0 && n % cfg.snapshot_every == 0);
        if keep {
            output::write_snapshot(dir, &format!("snapshot_{n:05}"), &gd, &traj.a[n], &traj.b[n], times[n])
                .map_err(io_err(dir))?;
            snapshots += 1;
        }
    }
    let residuals = dir.join("residuals.csv");
    output::write_residual_log(&residuals, times, &traj.reports).map_err(io_err(&residuals))?;

    if let Some(e) = failure {
        let status = [
            ("complete", "false".to_string()),
            ("failed_step", e.step.to_string()),
            ("levels_written", traj.a.len().to_string()),
            ("error", e.to_string()),
        ];
        output::write_manifest(dir, "run", &cfg.to_ini(), &status).map_err(io_err(dir))?;
        return Err(CliError::Solver(e.to_string()));
    }

    let diag = Diagnostics::new(&gd).map_err(|e| CliError::Solver(e.to_string()))?;
    let energy = diag.energy_report(&traj).map_err(|e| CliError::Solver(e.to_string()))?;
    let report = DiagnosticsReport { energy: Some(energy), ..Default::default() };
    let path = dir.join("energy.csv");
    let mut out = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
    report.write_csv(&mut out, 0, true).and_then(|_| out.flush()).map_err(io_err(&path))?;

    let status = [
        ("complete", "true".to_string()),
        ("steps", traj.num_steps().to_string()),
        ("max_residual_sign", format!("{:e}", traj.max_residual_sign())),
        ("max_residual_complementarity", format!("{:e}", traj.max_residual_complementarity())),
    ];
    output::write_manifest(dir, "run", &cfg.to_ini(), &status).map_err(io_err(dir))?;
    Ok(RunSummary {
        steps: traj.num_steps(),
        snapshots,
        max_residual_sign: traj.max_residual_sign(),
        max_residual_complementarity: traj.max_residual_complementarity(),
        energy,
    })
}

/// Runs `f` on every level in its own thread and returns the results in
/// level order.
fn per_level<R: Send>(levels: usize, f: impl Fn(usize) -> R + Sync) -> Vec<R> {
    thread::scope(|s| {
        let handles: Vec<_> = (0..levels).map(|l| { let f = &f; s.spawn(move || f(l)) }).collect();
        handles.into_iter().map(|h| h.join().expect("level worker panicked")).collect()
    })
}

fn require_levels(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.levels < 3 {
        return Err(ConfigError::new(format!("this command needs at least 3 levels, got {}", cfg.levels)).into());
    }
    Ok(())
}

fn finish_checks(dir: &Path, checks: &[Check]) -> Result<(), CliError> {
    let path = dir.join("checks.csv");
    output::write_checks(&path, checks).map_err(io_err(&path))?;
    let failed: Vec<String> = checks.iter().filter(|c| c.status() == "fail").map(|c| c.name.clone()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Acceptance(failed))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub n: usize,
    pub steps: usize,
    pub errors: LevelErrors,
    pub max_residual_sign: f64,
    pub max_residual_complementarity: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergeSummary {
    pub rows: Vec<ConvergenceRow>,
    pub checks: Vec<Check>,
}

/// Self-convergence study: levels `0..L` against the reference level `L`.
pub fn cmd_converge(cfg: &RunConfig) -> Result<ConvergeSummary, CliError> {
    require_levels(cfg)?;
    let dir = prepare_dir(cfg)?;
    let count = cfg.levels + 1;
    let gds = (0..count).map(|l| cfg.discretisation(l)).collect::<Result<Vec<_>, _>>()?;
    let solved = per_level(count, |l| solve(cfg, &gds[l]));
    let mut trajs = Vec::with_capacity(count);
    for (l, r) in solved.into_iter().enumerate() {
        match r {
            Ok(t) => trajs.push(t),
            Err(e) => {
                let msg = format!("level {l}: {e}");
                let status = [("complete", "false".to_string()), ("error", msg.clone())];
                output::write_manifest(dir, "converge", &cfg.to_ini(), &status).map_err(io_err(dir))?;
                return Err(CliError::Solver(msg));
            }
        }
    }
    for (l, (gd, t)) in gds.iter().zip(&trajs).enumerate() {
        let path = dir.join(format!("residuals_level{l}.csv"));
        output::write_residual_log(&path, gd.time_grid().times(), &t.reports).map_err(io_err(&path))?;
    }

    let (reference, ref_traj) = (&gds[cfg.levels], &trajs[cfg.levels]);
    let errors = per_level(cfg.levels, |l| study::level_errors(&gds[l], &trajs[l], reference, ref_traj));
    let mut rows = Vec::with_capacity(count);
    for l in 0..count {
        let (n, steps) = cfg.level_size(l);
        let errors = if l < cfg.levels {
            errors[l].ok_or_else(|| CliError::Solver(format!("level {l} mesh is not nested in the reference mesh")))?
        } else {
            LevelErrors::default()
        };
        rows.push(ConvergenceRow {
            level: l,
            n,
            steps,
            errors,
            max_residual_sign: trajs[l].max_residual_sign(),
            max_residual_complementarity: trajs[l].max_residual_complementarity(),
        });
    }

    let path = dir.join("convergence.csv");
    write_convergence(&path, cfg, &rows).map_err(io_err(&path))?;

    let studied = &rows[..cfg.levels];
    let mut checks = Vec::new();
    for (k, name) in ERROR_NAMES.iter().enumerate() {
        let e: Vec<f64> = studied.iter().map(|r| r.errors.as_array()[k]).collect();
        let worst_ratio = e.windows(2).map(|w| if w[0] == 0.0 && w[1] == 0.0 { 0.0 } else { w[1] / w[0] }).fold(0.0, f64::max);
        checks.push(Check {
            name: format!("{name}_strictly_decreasing"),
            measured: worst_ratio,
            threshold: 1.0,
            passed: study::strictly_decreasing(&e),
            soft: false,
        });
    }
    for k in [0, 2] {
        let orders: Vec<f64> = studied
            .windows(2)
            .filter_map(|w| study::empirical_order(w[0].errors.as_array()[k], w[1].errors.as_array()[k]))
            .collect();
        if let Some(min) = orders.iter().copied().reduce(f64::min) {
            checks.push(Check {
                name: format!("{}_order", ERROR_NAMES[k]),
                measured: min,
                threshold: cfg.checks.min_order,
                passed: min >= cfg.checks.min_order,
                soft: true,
            });
        }
    }
    let worst = rows.iter().map(|r| r.max_residual_sign.max(r.max_residual_complementarity)).fold(0.0, f64::max);
    checks.push(Check {
        name: "complementarity_all_levels".into(),
        measured: worst,
        threshold: cfg.checks.complementarity_tol,
        passed: worst <= cfg.checks.complementarity_tol,
        soft: false,
    });

    let status = [("complete", "true".to_string()), ("levels", count.to_string())];
    output::write_manifest(dir, "converge", &cfg.to_ini(), &status).map_err(io_err(dir))?;
    finish_checks(dir, &checks)?;
    Ok(ConvergeSummary { rows, checks })
}

fn write_convergence(path: &Path, cfg: &RunConfig, rows: &[ConvergenceRow]) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "level,n,steps,h,dt")?;
    for name in ERROR_NAMES {
        write!(out, ",err_{name}")?;
    }
    for name in ERROR_NAMES {
        write!(out, ",order_{name}")?;
    }
    writeln!(out, ",max_residual_sign,max_residual_complementarity")?;
    for (i, r) in rows.iter().enumerate() {
        let h = 2f64.sqrt() / r.n as f64;
        let dt = cfg.horizon / r.steps as f64;
        write!(out, "{},{},{},{:.12e},{:.12e}", r.level, r.n, r.steps, h, dt)?;
        let reference = r.level == cfg.levels;
        for e in r.errors.as_array() {
            if reference {
                write!(out, ",")?;
            } else {
                write!(out, ",{e:.12e}")?;
            }
        }
        for k in 0..4 {
            let order = (i > 0 && !reference)
                .then(|| study::empirical_order(rows[i - 1].errors.as_array()[k], r.errors.as_array()[k]))
                .flatten();
            match order {
                Some(o) => write!(out, ",{o:.6}")?,
                None => write!(out, ",")?,
            }
        }
        writeln!(out, ",{:.6e},{:.6e}", r.max_residual_sign, r.max_residual_complementarity)?;
    }
    out.flush()
}

/// Obstacle used by the constrained consistency battery; the bubble
/// `¼·16x(1-x)y(1-y)` touches it at the centre of the square.
const BATTERY_OBSTACLE: FieldPreset = FieldPreset::Paraboloid { base: 0.25, curvature: 1.0 };

fn sine(p: [f64; 2]) -> f64 {
    (PI * p[0]).sin() * (PI * p[1]).sin()
}

fn sine_grad(p: [f64; 2]) -> [f64; 2] {
    [PI * (PI * p[0]).cos() * (PI * p[1]).sin(), PI * (PI * p[0]).sin() * (PI * p[1]).cos()]
}

fn bubble(p: [f64; 2]) -> f64 {
    4.0 * p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1])
}

fn bubble_grad(p: [f64; 2]) -> [f64; 2] {
    [4.0 * (1.0 - 2.0 * p[0]) * p[1] * (1.0 - p[1]), 4.0 * p[0] * (1.0 - p[0]) * (1.0 - 2.0 * p[1])]
}

/// Consistency entries whose name starts with `affine` are exactness checks;
/// all others are decay checks.
fn consistency_battery(d: &Diagnostics<'_, f64>) -> Result<Vec<(String, f64)>, DiagnosticsError> {
    let free = ConsistencyOptions { boundary: BoundaryMode::Free, ..Default::default() };
    let free_c = ConsistencyOptions { constrained: true, ..free };
    let hom = ConsistencyOptions::default();
    let hom_c = ConsistencyOptions { constrained: true, ..hom };
    Ok(vec![
        ("affine.unconstrained".into(), d.consistency(|p| 1.0 + 2.0 * p[0] - 3.0 * p[1], |_| [2.0, -3.0], &free)?.value),
        ("affine.constrained".into(), d.consistency(|p| 0.1 + 0.05 * p[0] - 0.05 * p[1], |_| [0.05, -0.05], &free_c)?.value),
        ("sine.unconstrained".into(), d.consistency(sine, sine_grad, &hom)?.value),
        ("bubble.unconstrained".into(), d.consistency(bubble, bubble_grad, &hom)?.value),
        ("sine.constrained".into(), d.consistency(|p| 0.2 * sine(p), |p| sine_grad(p).map(|g| 0.2 * g), &hom_c)?.value),
        ("bubble.constrained".into(), d.consistency(|p| 0.25 * bubble(p), |p| bubble_grad(p).map(|g| 0.25 * g), &hom_c)?.value),
    ])
}

fn limit_conformity_battery(d: &Diagnostics<'_, f64>) -> Result<Vec<(String, f64)>, DiagnosticsError> {
    Ok(vec![
        ("gradient_sine".into(), d.limit_conformity(sine_grad, |p| -2.0 * PI * PI * sine(p))?),
        ("polynomial".into(), d.limit_conformity(|p| [p[0] * p[0] * p[1], p[0] * p[1] * p[1]], |p| 4.0 * p[0] * p[1])?),
        (
            "rotational".into(),
            d.limit_conformity(|p| [p[0] * (PI * p[1]).sin(), p[1] * (PI * p[0]).cos()], |p| {
                (PI * p[1]).sin() + (PI * p[0]).cos()
            })?,
        ),
    ])
}

/// Diagnostics of one level: property estimators on the fixed battery and
/// the energy report of the configured problem.
pub fn diagnose_level(cfg: &RunConfig, gd: &GradientDiscretisation<f64>) -> Result<DiagnosticsReport<f64>, CliError> {
    let diag_err = |e: DiagnosticsError| CliError::Solver(e.to_string());
    let battery_gd = GradientDiscretisation::crouzeix_raviart(gd.mesh_arc().clone(), gd.time_grid().clone(), |p| {
        BATTERY_OBSTACLE.eval(p)
    })
    .map_err(|e| CliError::Solver(e.to_string()))?;
    let d = Diagnostics::new(&battery_gd).map_err(diag_err)?;
    let c = d.coercivity(&PowerOptions::default()).map_err(diag_err)?;
    if !c.converged {
        return Err(CliError::Solver(format!("coercivity power iteration stagnated at {:e}", c.value)));
    }
    let consistency = consistency_battery(&d).map_err(diag_err)?;
    let limit_conformity = limit_conformity_battery(&d).map_err(diag_err)?;
    let traj = solve(cfg, gd).map_err(|e| CliError::Solver(e.to_string()))?;
    let energy = Diagnostics::new(gd).and_then(|d| d.energy_report(&traj)).map_err(diag_err)?;
    Ok(DiagnosticsReport { coercivity: Some(c.value), consistency, limit_conformity, energy: Some(energy) })
}

#[derive(Debug, Clone)]
pub struct DiagnoseSummary {
    pub reports: Vec<DiagnosticsReport<f64>>,
    pub checks: Vec<Check>,
}

pub fn cmd_diagnose(cfg: &RunConfig) -> Result<DiagnoseSummary, CliError> {
    require_levels(cfg)?;
    let dir = prepare_dir(cfg)?;
    let gds = (0..cfg.levels).map(|l| cfg.discretisation(l)).collect::<Result<Vec<_>, _>>()?;
    let reports = per_level(cfg.levels, |l| diagnose_level(cfg, &gds[l])).into_iter().collect::<Result<Vec<_>, _>>()?;

    for (l, r) in reports.iter().enumerate() {
        let path = dir.join(format!("diagnostics_level{l}.csv"));
        let mut out = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
        r.write_csv(&mut out, l, true).and_then(|_| out.flush()).map_err(io_err(&path))?;
    }
    let rows: Vec<Vec<(String, f64)>> = reports.iter().map(|r| r.rows()).collect();
    let path = dir.join("diagnostics_trend.csv");
    write_trend(&path, &rows).map_err(io_err(&path))?;

    let column = |name: &str| -> Vec<f64> {
        rows.iter().map(|r| r.iter().find(|(k, _)| k == name).map(|(_, v)| *v).unwrap_or(f64::NAN)).collect()
    };
    let ck = &cfg.checks;
    let mut checks = Vec::new();
    let cd = column("coercivity.C_D");
    let var = study::relative_variation(&cd);
    checks.push(Check {
        name: "coercivity.C_D_variation".into(),
        measured: var,
        threshold: ck.coercivity_variation,
        passed: var < ck.coercivity_variation,
        soft: false,
    });
    for (name, _) in &rows[0] {
        let values = column(name);
        if name.starts_with("consistency.affine") {
            let worst = values.iter().copied().fold(0.0, f64::max);
            checks.push(Check {
                name: format!("{name}_exact"),
                measured: worst,
                threshold: ck.affine_tol,
                passed: worst <= ck.affine_tol,
                soft: false,
            });
        } else if name.starts_with("consistency.") || name.starts_with("limit_conformity.") {
            let worst = values.windows(2).map(|w| w[0] / w[1]).fold(f64::INFINITY, f64::min);
            checks.push(Check {
                name: format!("{name}_decay"),
                measured: worst,
                threshold: ck.decay_factor,
                passed: worst >= ck.decay_factor,
                soft: false,
            });
        } else if name.starts_with("energy.") || name.starts_with("dual.") {
            let var = study::relative_variation(&values);
            checks.push(Check {
                name: format!("{name}_variation"),
                measured: var,
                threshold: ck.energy_variation,
                passed: var < ck.energy_variation,
                soft: false,
            });
        } else if name.starts_with("complementarity.") {
            let worst = values.iter().copied().fold(0.0, f64::max);
            checks.push(Check {
                name: name.clone(),
                measured: worst,
                threshold: ck.complementarity_tol,
                passed: worst <= ck.complementarity_tol,
                soft: false,
            });
        }
    }

    let status = [("complete", "true".to_string()), ("levels", cfg.levels.to_string())];
    output::write_manifest(dir, "diagnose", &cfg.to_ini(), &status).map_err(io_err(dir))?;
    finish_checks(dir, &checks)?;
    Ok(DiagnoseSummary { reports, checks })
}

fn write_trend(path: &Path, rows: &[Vec<(String, f64)>]) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "quantity,level,value_nondimensional,ratio_previous_over_current")?;
    for (k, (name, _)) in rows[0].iter().enumerate() {
        for (l, r) in rows.iter().enumerate() {
            let v = r[k].1;
            if l == 0 || v == 0.0 {
                writeln!(out, "{name},{l},{v:.12e},")?;
            } else {
                writeln!(out, "{name},{l},{v:.12e},{:.6}", rows[l - 1][k].1 / v)?;
            }
        }
    }
    out.flush()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub psor: Vec<f64>,
    pub oracle: Vec<f64>,
    /// `A^{n+1}` returned by the time stepper.
    pub stepper: Vec<f64>,
    /// `max |psor - oracle|`.
    pub discrepancy: f64,
    /// `max |stepper - oracle|`.
    pub stepper_discrepancy: f64,
}

/// First implicit step of the configured problem on the base level. The
/// obstacle subproblem at the converged Picard iterate is solved by PSOR and
/// by active-set enumeration.
pub fn oracle_step(cfg: &RunConfig) -> Result<OracleReport, CliError> {
    let gd = cfg.discretisation(0)?;
    if gd.num_dofs() > 15 {
        return Err(ConfigError::new(format!(
            "oracle needs at most 15 interior DOFs, mesh n = {} has {}",
            cfg.mesh_n,
            gd.num_dofs()
        ))
        .into());
    }
    let spec = cfg.problem();
    let a0 = gd.interpolate(|p| (spec.a_ini)(p), true);
    let b0 = gd.interpolate(|p| (spec.b_ini)(p), false);
    let dt = gd.time_grid().step(0);
    let solver = |e: String| CliError::Solver(e);
    let mut stepper = Stepper::new(&gd, &spec, cfg.step_options()).map_err(|e| solver(e.to_string()))?;
    let out = stepper.advance(&a0, &b0, dt).map_err(|e| solver(e.to_string()))?;
    let lcp = stepper.obstacle_problem(&a0, &out.a, &out.b, dt).map_err(|e| solver(e.to_string()))?;
    let psor = solve_psor(&lcp, &a0, &cfg.step_options().psor).map_err(|e| solver(e.to_string()))?;
    if !psor.converged {
        return Err(solver(format!("PSOR stopped after {} sweeps", psor.iterations)));
    }
    let oracle = solve_active_set_oracle(&lcp).map_err(|e| solver(e.to_string()))?;
    let gap = |x: &[f64]| x.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(OracleReport {
        discrepancy: gap(&psor.x),
        stepper_discrepancy: gap(&out.a),
        psor: psor.x,
        stepper: out.a.values,
        oracle,
    })
}

pub fn cmd_oracle(cfg: &RunConfig) -> Result<OracleReport, CliError> {
    let report = oracle_step(cfg)?;
    let dir = prepare_dir(cfg)?;
    let path = dir.join("oracle.csv");
    let write = || -> io::Result<()> {
        let mut out = BufWriter::new(File::create(&path)?);
        writeln!(out, "dof,A_psor,A_oracle,A_stepper,abs_difference_psor_oracle")?;
        for i in 0..report.oracle.len() {
            writeln!(
                out,
                "{i},{:.15e},{:.15e},{:.15e},{:.6e}",
                report.psor[i],
                report.oracle[i],
                report.stepper[i],
                (report.psor[i] - report.oracle[i]).abs()
            )?;
        }
        out.flush()
    };
    write().map_err(io_err(&path))?;
    let status = [
        ("complete", "true".to_string()),
        ("discrepancy", format!("{:e}", report.discrepancy)),
        ("stepper_discrepancy", format!("{:e}", report.stepper_discrepancy)),
    ];
    output::write_manifest(dir, "oracle", &cfg.to_ini(), &status).map_err(io_err(dir))?;
    let check = Check {
        name: "psor_vs_oracle".into(),
        measured: report.discrepancy,
        threshold: ORACLE_TOL,
        passed: report.discrepancy <= ORACLE_TOL,
        soft: false,
    };
    finish_checks(dir, &[check])?;
    Ok(report)
}
