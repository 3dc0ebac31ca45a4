//! INI-style run configuration.
//!
//! ```text
//! [mesh]
//! n = 8
//! levels = 3
//!
//! [time]
//! horizon = 0.5
//! steps = 16
//!
//! [problem]
//! reaction = linear alpha=1 beta=0.5 gamma=0.5 delta=1 source=2
//! obstacle = constant value=0.1
//! ```
//!
//! Every key is optional; unknown sections, keys and preset parameters are
//! rejected with the offending line number.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use gdm_obstacle::problem::ProblemError;
use gdm_obstacle::{
    field, presets, GradientDiscretisation, Mesh, ProblemSpec, PsorOptions, Reaction, ScalarField, StepOptions,
    TensorField, TimeGrid, ValidationOptions,
};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "config line {l}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self { line: Some(line), message: message.into() }
    }

    pub fn new(message: impl Into<String>) -> Self {
        Self { line: None, message: message.into() }
    }
}

/// `name key=value ...` with a fixed parameter list and defaults.
fn parse_params<'a>(
    words: impl Iterator<Item = &'a str>,
    allowed: &[(&str, f64)],
    line: usize,
    preset: &str,
) -> Result<Vec<f64>, ConfigError> {
    let mut values: Vec<f64> = allowed.iter().map(|(_, d)| *d).collect();
    let mut seen = vec![false; allowed.len()];
    for word in words {
        let (k, v) = word
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, format!("preset parameter `{word}` is not of the form key=value")))?;
        let idx = allowed.iter().position(|(name, _)| *name == k).ok_or_else(|| {
            let names: Vec<&str> = allowed.iter().map(|(n, _)| *n).collect();
            ConfigError::at(line, format!("unknown parameter `{k}` for preset `{preset}` (expected one of {names:?})"))
        })?;
        if seen[idx] {
            return Err(ConfigError::at(line, format!("parameter `{k}` given twice")));
        }
        seen[idx] = true;
        values[idx] = parse_f64(v, line, k)?;
    }
    Ok(values)
}

fn parse_f64(v: &str, line: usize, key: &str) -> Result<f64, ConfigError> {
    match v.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(ConfigError::at(line, format!("`{key}` expects a finite number, got `{v}`"))),
    }
}

fn parse_usize(v: &str, line: usize, key: &str) -> Result<usize, ConfigError> {
    v.trim().parse::<usize>().map_err(|_| ConfigError::at(line, format!("`{key}` expects a nonnegative integer, got `{v}`")))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TensorPreset {
    Identity,
    Isotropic { value: f64 },
    Constant { d11: f64, d12: f64, d22: f64 },
}

impl TensorPreset {
    fn parse(s: &str, line: usize) -> Result<Self, ConfigError> {
        let mut words = s.split_whitespace();
        let name = words.next().unwrap_or("");
        Ok(match name {
            "identity" => {
                parse_params(words, &[], line, name)?;
                Self::Identity
            }
            "isotropic" => {
                let v = parse_params(words, &[("value", 1.0)], line, name)?;
                Self::Isotropic { value: v[0] }
            }
            "constant" => {
                let v = parse_params(words, &[("d11", 1.0), ("d12", 0.0), ("d22", 1.0)], line, name)?;
                Self::Constant { d11: v[0], d12: v[1], d22: v[2] }
            }
            _ => return Err(ConfigError::at(line, format!("unknown tensor preset `{name}` (identity, isotropic, constant)"))),
        })
    }

    pub fn build(&self) -> Result<TensorField<f64>, ConfigError> {
        let t = match *self {
            Self::Identity => Ok(TensorField::identity()),
            Self::Isotropic { value } => TensorField::isotropic(value),
            Self::Constant { d11, d12, d22 } => TensorField::constant([[d11, d12], [d12, d22]]),
        };
        t.map_err(|e| ConfigError::new(format!("diffusion tensor: {e}")))
    }
}

impl fmt::Display for TensorPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => write!(f, "identity"),
            Self::Isotropic { value } => write!(f, "isotropic value={value}"),
            Self::Constant { d11, d12, d22 } => write!(f, "constant d11={d11} d12={d12} d22={d22}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldPreset {
    Zero,
    Constant { value: f64 },
    /// `amplitude · sin(πx) sin(πy)`.
    Sine { amplitude: f64 },
    /// `amplitude · 16 x(1-x) y(1-y)`.
    Bubble { amplitude: f64 },
    /// `base + curvature · ((x-½)² + (y-½)²)`.
    Paraboloid { base: f64, curvature: f64 },
}

impl FieldPreset {
    fn parse(s: &str, line: usize) -> Result<Self, ConfigError> {
        let mut words = s.split_whitespace();
        let name = words.next().unwrap_or("");
        Ok(match name {
            "zero" => {
                parse_params(words, &[], line, name)?;
                Self::Zero
            }
            "constant" => Self::Constant { value: parse_params(words, &[("value", 0.0)], line, name)?[0] },
            "sine" => Self::Sine { amplitude: parse_params(words, &[("amplitude", 1.0)], line, name)?[0] },
            "bubble" => Self::Bubble { amplitude: parse_params(words, &[("amplitude", 1.0)], line, name)?[0] },
            "paraboloid" => {
                let v = parse_params(words, &[("base", 0.25), ("curvature", 1.0)], line, name)?;
                Self::Paraboloid { base: v[0], curvature: v[1] }
            }
            _ => {
                return Err(ConfigError::at(
                    line,
                    format!("unknown field preset `{name}` (zero, constant, sine, bubble, paraboloid)"),
                ))
            }
        })
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        let [x, y] = p;
        match *self {
            Self::Zero => 0.0,
            Self::Constant { value } => value,
            Self::Sine { amplitude } => amplitude * (PI * x).sin() * (PI * y).sin(),
            Self::Bubble { amplitude } => amplitude * 16.0 * x * (1.0 - x) * y * (1.0 - y),
            Self::Paraboloid { base, curvature } => base + curvature * ((x - 0.5).powi(2) + (y - 0.5).powi(2)),
        }
    }

    pub fn build(&self) -> ScalarField<f64> {
        let me = *self;
        field(move |p| me.eval(p))
    }
}

impl fmt::Display for FieldPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "zero"),
            Self::Constant { value } => write!(f, "constant value={value}"),
            Self::Sine { amplitude } => write!(f, "sine amplitude={amplitude}"),
            Self::Bubble { amplitude } => write!(f, "bubble amplitude={amplitude}"),
            Self::Paraboloid { base, curvature } => write!(f, "paraboloid base={base} curvature={curvature}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReactionPreset {
    Zero,
    /// `F = source + alpha·b - beta·a`, `G = gamma·a - delta·b`.
    Linear { alpha: f64, beta: f64, gamma: f64, delta: f64, source: f64 },
    ClampedMonod { mu: f64, k: f64, lambda: f64, nu: f64, cap: f64 },
}

impl ReactionPreset {
    fn parse(s: &str, line: usize) -> Result<Self, ConfigError> {
        let mut words = s.split_whitespace();
        let name = words.next().unwrap_or("");
        Ok(match name {
            "zero" => {
                parse_params(words, &[], line, name)?;
                Self::Zero
            }
            "linear" => {
                let v = parse_params(
                    words,
                    &[("alpha", 0.0), ("beta", 0.0), ("gamma", 0.0), ("delta", 0.0), ("source", 0.0)],
                    line,
                    name,
                )?;
                Self::Linear { alpha: v[0], beta: v[1], gamma: v[2], delta: v[3], source: v[4] }
            }
            "clamped-monod" => {
                let v = parse_params(
                    words,
                    &[("mu", 1.0), ("k", 0.5), ("lambda", 0.0), ("nu", 1.0), ("cap", 2.0)],
                    line,
                    name,
                )?;
                if !(v[1] > 0.0 && v[4] > 0.0) {
                    return Err(ConfigError::at(line, "clamped-monod needs k > 0 and cap > 0"));
                }
                Self::ClampedMonod { mu: v[0], k: v[1], lambda: v[2], nu: v[3], cap: v[4] }
            }
            _ => return Err(ConfigError::at(line, format!("unknown reaction preset `{name}` (zero, linear, clamped-monod)"))),
        })
    }

    pub fn build(&self) -> (Reaction<f64>, Reaction<f64>) {
        match *self {
            Self::Zero => (Reaction::zero(), Reaction::zero()),
            Self::Linear { alpha, beta, gamma, delta, source } => presets::linear(alpha, beta, gamma, delta, source),
            Self::ClampedMonod { mu, k, lambda, nu, cap } => presets::clamped_monod(mu, k, lambda, nu, cap),
        }
    }
}

impl fmt::Display for ReactionPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "zero"),
            Self::Linear { alpha, beta, gamma, delta, source } => {
                write!(f, "linear alpha={alpha} beta={beta} gamma={gamma} delta={delta} source={source}")
            }
            Self::ClampedMonod { mu, k, lambda, nu, cap } => {
                write!(f, "clamped-monod mu={mu} k={k} lambda={lambda} nu={nu} cap={cap}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub picard_tol: f64,
    pub picard_max: usize,
    pub damping: f64,
    pub psor_omega: f64,
    pub psor_tol: f64,
    pub psor_max: usize,
    pub cg_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            picard_tol: 1e-10,
            picard_max: 50,
            damping: 1.0,
            psor_omega: 1.5,
            psor_tol: 1e-10,
            psor_max: 100_000,
            cg_tol: 1e-12,
        }
    }
}

/// Thresholds of the pass/fail checks made by `converge` and `diagnose`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub complementarity_tol: f64,
    /// Logged only; a lower empirical order never fails a run.
    pub min_order: f64,
    pub energy_variation: f64,
    pub coercivity_variation: f64,
    pub decay_factor: f64,
    pub affine_tol: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            complementarity_tol: 1e-8,
            min_order: 0.8,
            energy_variation: 0.25,
            coercivity_variation: 0.2,
            decay_factor: 1.5,
            affine_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mesh_n: usize,
    pub levels: usize,
    pub horizon: f64,
    pub steps: usize,
    pub diffusion_a: TensorPreset,
    pub diffusion_b: TensorPreset,
    pub reaction: ReactionPreset,
    pub obstacle: FieldPreset,
    pub a_ini: FieldPreset,
    pub b_ini: FieldPreset,
    pub solver: SolverConfig,
    pub checks: CheckConfig,
    pub out_dir: PathBuf,
    /// Write a snapshot every this many steps; 0 keeps only the first and
    /// last level.
    pub snapshot_every: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mesh_n: 8,
            levels: 3,
            horizon: 0.5,
            steps: 16,
            diffusion_a: TensorPreset::Identity,
            diffusion_b: TensorPreset::Identity,
            reaction: ReactionPreset::Zero,
            obstacle: FieldPreset::Constant { value: 1e6 },
            a_ini: FieldPreset::Zero,
            b_ini: FieldPreset::Zero,
            solver: SolverConfig::default(),
            checks: CheckConfig::default(),
            out_dir: PathBuf::from("out"),
            snapshot_every: 1,
            seed: 0,
        }
    }
}

impl RunConfig {
    /// Parses and validates a configuration file body.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut section: Option<String> = None;
        let mut seen: BTreeMap<(String, String), usize> = BTreeMap::new();
        let mut dt: Option<(f64, usize)> = None;
        let mut steps_line: Option<usize> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split(['#', ';']).next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::at(line, "unterminated section header"))?
                    .trim();
                if !["mesh", "time", "problem", "solver", "checks", "output", "run"].contains(&name) {
                    return Err(ConfigError::at(line, format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| ConfigError::at(line, format!("expected `key = value`, got `{content}`")))?;
            let sec = section.as_deref().ok_or_else(|| ConfigError::at(line, format!("key `{key}` outside any section")))?;
            if let Some(prev) = seen.insert((sec.to_string(), key.to_string()), line) {
                return Err(ConfigError::at(line, format!("[{sec}] {key} already set on line {prev}")));
            }
            let s = &mut cfg.solver;
            let c = &mut cfg.checks;
            match (sec, key) {
                ("mesh", "n") => cfg.mesh_n = parse_usize(value, line, key)?,
                ("mesh", "levels") => cfg.levels = parse_usize(value, line, key)?,
                ("time", "horizon") => cfg.horizon = parse_f64(value, line, key)?,
                ("time", "steps") => {
                    cfg.steps = parse_usize(value, line, key)?;
                    steps_line = Some(line);
                }
                ("time", "dt") => dt = Some((parse_f64(value, line, key)?, line)),
                ("problem", "diffusion_a") => cfg.diffusion_a = TensorPreset::parse(value, line)?,
                ("problem", "diffusion_b") => cfg.diffusion_b = TensorPreset::parse(value, line)?,
                ("problem", "reaction") => cfg.reaction = ReactionPreset::parse(value, line)?,
                ("problem", "obstacle") => cfg.obstacle = FieldPreset::parse(value, line)?,
                ("problem", "a_ini") => cfg.a_ini = FieldPreset::parse(value, line)?,
                ("problem", "b_ini") => cfg.b_ini = FieldPreset::parse(value, line)?,
                ("solver", "picard_tol") => s.picard_tol = parse_f64(value, line, key)?,
                ("solver", "picard_max") => s.picard_max = parse_usize(value, line, key)?,
                ("solver", "damping") => s.damping = parse_f64(value, line, key)?,
                ("solver", "psor_omega") => s.psor_omega = parse_f64(value, line, key)?,
                ("solver", "psor_tol") => s.psor_tol = parse_f64(value, line, key)?,
                ("solver", "psor_max") => s.psor_max = parse_usize(value, line, key)?,
                ("solver", "cg_tol") => s.cg_tol = parse_f64(value, line, key)?,
                ("checks", "complementarity_tol") => c.complementarity_tol = parse_f64(value, line, key)?,
                ("checks", "min_order") => c.min_order = parse_f64(value, line, key)?,
                ("checks", "energy_variation") => c.energy_variation = parse_f64(value, line, key)?,
                ("checks", "coercivity_variation") => c.coercivity_variation = parse_f64(value, line, key)?,
                ("checks", "decay_factor") => c.decay_factor = parse_f64(value, line, key)?,
                ("checks", "affine_tol") => c.affine_tol = parse_f64(value, line, key)?,
                ("output", "dir") => cfg.out_dir = PathBuf::from(value),
                ("output", "snapshot_every") => cfg.snapshot_every = parse_usize(value, line, key)?,
                ("run", "seed") => {
                    cfg.seed = value.parse().map_err(|_| ConfigError::at(line, format!("`seed` expects an integer, got `{value}`")))?
                }
                _ => return Err(ConfigError::at(line, format!("unknown key `{key}` in section [{sec}]"))),
            }
        }
        if let Some((dt, line)) = dt {
            if let Some(sl) = steps_line {
                return Err(ConfigError::at(line, format!("give either `steps` (line {sl}) or `dt`, not both")));
            }
            if !(dt > 0.0) {
                return Err(ConfigError::at(line, "`dt` must be positive"));
            }
            let steps = (cfg.horizon / dt).round();
            if steps < 1.0 || ((steps * dt - cfg.horizon).abs() > 1e-9 * cfg.horizon) {
                return Err(ConfigError::at(line, format!("dt = {dt} does not divide the horizon {}", cfg.horizon)));
            }
            cfg.steps = steps as usize;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks the invariants that do not need a mesh.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::new(format!("`{name}` must be positive, got {v}")))
            }
        };
        if self.mesh_n == 0 {
            return Err(ConfigError::new("`mesh.n` must be at least 1"));
        }
        if self.steps == 0 {
            return Err(ConfigError::new("`time.steps` must be at least 1"));
        }
        positive("time.horizon", self.horizon)?;
        let s = &self.solver;
        positive("solver.picard_tol", s.picard_tol)?;
        positive("solver.psor_tol", s.psor_tol)?;
        positive("solver.cg_tol", s.cg_tol)?;
        if s.picard_max == 0 || s.psor_max == 0 {
            return Err(ConfigError::new("`solver.picard_max` and `solver.psor_max` must be at least 1"));
        }
        if !(s.damping > 0.0 && s.damping <= 1.0) {
            return Err(ConfigError::new(format!("`solver.damping` must lie in (0, 1], got {}", s.damping)));
        }
        if !(s.psor_omega > 0.0 && s.psor_omega < 2.0) {
            return Err(ConfigError::new(format!("`solver.psor_omega` must lie in (0, 2), got {}", s.psor_omega)));
        }
        let c = &self.checks;
        positive("checks.complementarity_tol", c.complementarity_tol)?;
        positive("checks.energy_variation", c.energy_variation)?;
        positive("checks.coercivity_variation", c.coercivity_variation)?;
        positive("checks.decay_factor", c.decay_factor)?;
        positive("checks.affine_tol", c.affine_tol)?;
        self.diffusion_a.build()?;
        self.diffusion_b.build()?;
        let spec = self.problem();
        let dt = self.horizon / self.steps as f64;
        let limit = spec.max_time_step();
        if !(dt < limit) {
            return Err(ConfigError::new(format!(
                "time step dt = {dt} violates the step restriction dt < 1/(2M) = {limit} (M = {}) required by the energy estimate",
                spec.lipschitz_constant()
            )));
        }
        Ok(())
    }

    /// Mesh resolution and step count of refinement level `l`; the step
    /// doubles with the resolution so that `dt ∝ h`.
    pub fn level_size(&self, l: usize) -> (usize, usize) {
        (self.mesh_n << l, self.steps << l)
    }

    pub fn problem(&self) -> ProblemSpec<f64> {
        let (reaction_f, reaction_g) = self.reaction.build();
        ProblemSpec {
            horizon: self.horizon,
            diff_a: self.diffusion_a.build().expect("validated tensor"),
            diff_b: self.diffusion_b.build().expect("validated tensor"),
            reaction_f,
            reaction_g,
            obstacle: self.obstacle.build(),
            a_ini: self.a_ini.build(),
            b_ini: self.b_ini.build(),
        }
    }

    pub fn step_options(&self) -> StepOptions<f64> {
        let s = &self.solver;
        StepOptions {
            picard_tol: s.picard_tol,
            picard_max: s.picard_max,
            psor: PsorOptions { omega: s.psor_omega, tol: s.psor_tol, max_iter: s.psor_max },
            cg_tol: s.cg_tol,
            damping: s.damping,
        }
    }

    /// Discretisation of level `l`, after checking the reaction Lipschitz
    /// constants (seeded sampling) and the initial datum against the obstacle.
    pub fn discretisation(&self, l: usize) -> Result<GradientDiscretisation<f64>, ConfigError> {
        let (n, steps) = self.level_size(l);
        let mesh = Arc::new(Mesh::unit_square(n).map_err(|e| ConfigError::new(e.to_string()))?);
        let grid = TimeGrid::uniform(self.horizon, steps).map_err(|e| ConfigError::new(e.to_string()))?;
        let obstacle = self.obstacle;
        let gd = GradientDiscretisation::crouzeix_raviart(mesh, grid, move |p| obstacle.eval(p))
            .map_err(|e| ConfigError::new(format!("obstacle: {e}")))?;
        let opts = ValidationOptions { seed: self.seed, ..Default::default() };
        self.problem().validate(&gd, &opts).map_err(|e: ProblemError| ConfigError::new(e.to_string()))?;
        Ok(gd)
    }

    /// Fully resolved configuration in the input format.
    pub fn to_ini(&self) -> String {
        let s = &self.solver;
        let c = &self.checks;
        format!(
            "[mesh]\nn = {}\nlevels = {}\n\n[time]\nhorizon = {}\nsteps = {}\n\n[problem]\ndiffusion_a = {}\ndiffusion_b = {}\nreaction = {}\nobstacle = {}\na_ini = {}\nb_ini = {}\n\n[solver]\npicard_tol = {}\npicard_max = {}\ndamping = {}\npsor_omega = {}\npsor_tol = {}\npsor_max = {}\ncg_tol = {}\n\n[checks]\ncomplementarity_tol = {}\nmin_order = {}\nenergy_variation = {}\ncoercivity_variation = {}\ndecay_factor = {}\naffine_tol = {}\n\n[output]\ndir = {}\nsnapshot_every = {}\n\n[run]\nseed = {}\n",
            self.mesh_n,
            self.levels,
            self.horizon,
            self.steps,
            self.diffusion_a,
            self.diffusion_b,
            self.reaction,
            self.obstacle,
            self.a_ini,
            self.b_ini,
            s.picard_tol,
            s.picard_max,
            s.damping,
            s.psor_omega,
            s.psor_tol,
            s.psor_max,
            s.cg_tol,
            c.complementarity_tol,
            c.min_order,
            c.energy_variation,
            c.coercivity_variation,
            c.decay_factor,
            c.affine_tol,
            self.out_dir.display(),
            self.snapshot_every,
            self.seed,
        )
    }
}
