//! Scenario file loading and validation.
//!
//! Files are TOML. Complex scalars are `[re, im]` pairs, matrices are arrays
//! of row arrays (row-major), complex matrices are rows of `[re, im]` pairs.
//! `load_config` either returns a fully built scenario (core model objects
//! included) or the complete list of schema errors, each prefixed with the
//! key path it refers to.

use std::fmt;
use std::path::{Path, PathBuf};

use entroflux::classical_ou::{GaussianDensity, OuModel};
use entroflux::gaussian_gds::{GaussianState, GdsModel};
use entroflux::lindblad_core::LindbladModel;
use entroflux::{C64, CMat, CVec, RMat, RVec};
use toml::value::{Table, Value};

/// Which runner a scenario drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    FiniteLindblad,
    Gds,
    ClassicalOu,
    CrossValidate,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::FiniteLindblad => "finite_lindblad",
            Kind::Gds => "gds",
            Kind::ClassicalOu => "classical_ou",
            Kind::CrossValidate => "cross_validate",
        };
        f.write_str(s)
    }
}

/// Uniform time grid, inclusive of both endpoints.
#[derive(Debug, Clone, Copy)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_points: usize,
}

impl TimeGrid {
    pub fn points(&self) -> Vec<f64> {
        if self.n_points == 1 {
            return vec![self.t_start];
        }
        let span = self.t_end - self.t_start;
        (0..self.n_points)
            .map(|i| self.t_start + span * i as f64 / (self.n_points - 1) as f64)
            .collect()
    }
}

/// Optional Monte Carlo moment check for classical scenarios.
#[derive(Debug, Clone, Copy)]
pub struct McSpec {
    pub n_paths: usize,
    pub step: f64,
    /// Time at which sample and analytic moments are compared; defaults to
    /// the end of the grid.
    pub at: Option<f64>,
}

/// Kind-specific model and initial state, already built into core types.
#[derive(Debug, Clone)]
pub enum Payload {
    FiniteLindblad {
        model: LindbladModel,
        rho0: CMat,
    },
    Gds {
        model: GdsModel,
        state0: GaussianState,
    },
    ClassicalOu {
        model: OuModel,
        density0: GaussianDensity,
        monte_carlo: Option<McSpec>,
    },
    CrossValidate {
        model: GdsModel,
        state0: GaussianState,
    },
}

/// A loaded, validated scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    /// File stem, used to label reports.
    pub name: String,
    pub kind: Kind,
    pub hbar: f64,
    /// Finite-difference step for rate checks; `None` means kind default.
    pub fd_step: Option<f64>,
    pub seed: u64,
    /// Per-mode Fock cutoff for cross-validation runs.
    pub cutoff: usize,
    /// CSV destination; the text report lands next to it.
    pub output_path: PathBuf,
    pub grid: TimeGrid,
    pub payload: Payload,
}

/// Command-line overrides applied on top of the file contents.
#[derive(Debug, Clone, Copy, Default)]
pub struct CliOverrides {
    pub strict: bool,
    pub fd_step: Option<f64>,
    pub cutoff: Option<usize>,
    pub seed: Option<u64>,
}

/// All schema problems found in one file.
#[derive(Debug)]
pub struct ConfigErrors {
    pub path: PathBuf,
    pub errors: Vec<String>,
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {} config error(s)", self.path.display(), self.errors.len())?;
        for e in &self.errors {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const DEFAULT_CUTOFF: usize = 40;

struct Ctx {
    errors: Vec<String>,
    strict: bool,
}

impl Ctx {
    fn err(&mut self, path: &str, msg: impl fmt::Display) {
        self.errors.push(format!("{path}: {msg}"));
    }

    fn check_keys(&mut self, table: &Table, prefix: &str, known: &[&str]) {
        if !self.strict {
            return;
        }
        for key in table.keys() {
            if !known.contains(&key.as_str()) {
                let path = if prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{prefix}.{key}")
                };
                self.err(&path, "unknown key");
            }
        }
    }
}

fn as_finite(v: &Value) -> Option<f64> {
    let x = match v {
        Value::Float(x) => *x,
        Value::Integer(i) => *i as f64,
        _ => return None,
    };
    x.is_finite().then_some(x)
}

fn req_table<'a>(ctx: &mut Ctx, root: &'a Table, key: &str) -> Option<&'a Table> {
    match root.get(key) {
        Some(Value::Table(t)) => Some(t),
        Some(_) => {
            ctx.err(key, "expected a table");
            None
        }
        None => {
            ctx.err(key, "missing required table");
            None
        }
    }
}

fn opt_f64(ctx: &mut Ctx, t: &Table, prefix: &str, key: &str) -> Option<f64> {
    let v = t.get(key)?;
    match as_finite(v) {
        Some(x) => Some(x),
        None => {
            ctx.err(&join(prefix, key), "expected a finite number");
            None
        }
    }
}

fn req_f64(ctx: &mut Ctx, t: &Table, prefix: &str, key: &str) -> Option<f64> {
    if !t.contains_key(key) {
        ctx.err(&join(prefix, key), "missing required number");
        return None;
    }
    opt_f64(ctx, t, prefix, key)
}

fn req_usize(ctx: &mut Ctx, t: &Table, prefix: &str, key: &str) -> Option<usize> {
    match t.get(key) {
        Some(Value::Integer(i)) if *i >= 0 => Some(*i as usize),
        Some(_) => {
            ctx.err(&join(prefix, key), "expected a nonnegative integer");
            None
        }
        None => {
            ctx.err(&join(prefix, key), "missing required integer");
            None
        }
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn parse_real_vector(ctx: &mut Ctx, v: &Value, path: &str, len: usize) -> Option<RVec> {
    let arr = match v {
        Value::Array(a) => a,
        _ => {
            ctx.err(path, "expected an array of numbers");
            return None;
        }
    };
    if arr.len() != len {
        ctx.err(path, format!("expected {len} entries, got {}", arr.len()));
        return None;
    }
    let mut out = RVec::zeros(len);
    for (i, e) in arr.iter().enumerate() {
        match as_finite(e) {
            Some(x) => out[i] = x,
            None => {
                ctx.err(&format!("{path}[{i}]"), "expected a finite number");
                return None;
            }
        }
    }
    Some(out)
}

fn parse_real_matrix(
    ctx: &mut Ctx,
    v: &Value,
    path: &str,
    rows: usize,
    cols: usize,
) -> Option<RMat> {
    let arr = match v {
        Value::Array(a) => a,
        _ => {
            ctx.err(path, "expected an array of row arrays");
            return None;
        }
    };
    if arr.len() != rows {
        ctx.err(path, format!("expected {rows} rows, got {}", arr.len()));
        return None;
    }
    let mut out = RMat::zeros(rows, cols);
    for (r, row) in arr.iter().enumerate() {
        let row_path = format!("{path}[{r}]");
        let entries = match row {
            Value::Array(a) => a,
            _ => {
                ctx.err(&row_path, "expected a row array");
                return None;
            }
        };
        if entries.len() != cols {
            ctx.err(&row_path, format!("expected {cols} entries, got {}", entries.len()));
            return None;
        }
        for (c, e) in entries.iter().enumerate() {
            match as_finite(e) {
                Some(x) => out[(r, c)] = x,
                None => {
                    ctx.err(&format!("{row_path}[{c}]"), "expected a finite number");
                    return None;
                }
            }
        }
    }
    Some(out)
}

fn parse_complex(ctx: &mut Ctx, v: &Value, path: &str) -> Option<C64> {
    let pair = match v {
        Value::Array(a) if a.len() == 2 => a,
        _ => {
            ctx.err(path, "expected a complex [re, im] pair");
            return None;
        }
    };
    match (as_finite(&pair[0]), as_finite(&pair[1])) {
        (Some(re), Some(im)) => Some(C64::new(re, im)),
        _ => {
            ctx.err(path, "expected two finite numbers in the [re, im] pair");
            None
        }
    }
}

fn parse_complex_vector(ctx: &mut Ctx, v: &Value, path: &str, len: usize) -> Option<CVec> {
    let arr = match v {
        Value::Array(a) => a,
        _ => {
            ctx.err(path, "expected an array of [re, im] pairs");
            return None;
        }
    };
    if arr.len() != len {
        ctx.err(path, format!("expected {len} entries, got {}", arr.len()));
        return None;
    }
    let mut out = CVec::zeros(len);
    for (i, e) in arr.iter().enumerate() {
        out[i] = parse_complex(ctx, e, &format!("{path}[{i}]"))?;
    }
    Some(out)
}

fn parse_complex_matrix(ctx: &mut Ctx, v: &Value, path: &str, dim: usize) -> Option<CMat> {
    let arr = match v {
        Value::Array(a) => a,
        _ => {
            ctx.err(path, "expected an array of row arrays");
            return None;
        }
    };
    if arr.len() != dim {
        ctx.err(path, format!("expected {dim} rows, got {}", arr.len()));
        return None;
    }
    let mut out = CMat::zeros(dim, dim);
    for (r, row) in arr.iter().enumerate() {
        let row_path = format!("{path}[{r}]");
        let entries = match row {
            Value::Array(a) => a,
            _ => {
                ctx.err(&row_path, "expected a row array");
                return None;
            }
        };
        if entries.len() != dim {
            ctx.err(&row_path, format!("expected {dim} entries, got {}", entries.len()));
            return None;
        }
        for (c, e) in entries.iter().enumerate() {
            out[(r, c)] = parse_complex(ctx, e, &format!("{row_path}[{c}]"))?;
        }
    }
    Some(out)
}

fn parse_kind(ctx: &mut Ctx, root: &Table) -> Option<Kind> {
    match root.get("kind") {
        Some(Value::String(s)) => match s.as_str() {
            "finite_lindblad" => Some(Kind::FiniteLindblad),
            "gds" => Some(Kind::Gds),
            "classical_ou" => Some(Kind::ClassicalOu),
            "cross_validate" => Some(Kind::CrossValidate),
            other => {
                ctx.err("kind", format!(
                    "unknown kind {other:?} (expected finite_lindblad, gds, classical_ou, or cross_validate)"
                ));
                None
            }
        },
        Some(_) => {
            ctx.err("kind", "expected a string");
            None
        }
        None => {
            ctx.err("kind", "missing required key");
            None
        }
    }
}

fn parse_grid(ctx: &mut Ctx, root: &Table) -> Option<TimeGrid> {
    let t = req_table(ctx, root, "time_grid")?;
    ctx.check_keys(t, "time_grid", &["t_start", "t_end", "n_points"]);
    let t_start = req_f64(ctx, t, "time_grid", "t_start")?;
    let t_end = req_f64(ctx, t, "time_grid", "t_end")?;
    let n_points = req_usize(ctx, t, "time_grid", "n_points")?;
    if t_start < 0.0 {
        ctx.err("time_grid.t_start", "must be nonnegative");
        return None;
    }
    if n_points == 0 {
        ctx.err("time_grid.n_points", "must be at least 1");
        return None;
    }
    if n_points > 1 && t_end <= t_start {
        ctx.err("time_grid.t_end", "grid must be strictly increasing (t_end > t_start)");
        return None;
    }
    Some(TimeGrid {
        t_start,
        t_end,
        n_points,
    })
}

fn symmetric_psd_check(ctx: &mut Ctx, m: &RMat, path: &str) {
    let asym = (m - m.transpose()).norm();
    if asym > 1e-10 * (1.0 + m.norm()) {
        ctx.err(path, format!("must be symmetric (asymmetry {asym:.3e})"));
        return;
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    let min = eig.eigenvalues.min();
    if min < -1e-10 * (1.0 + m.norm()) {
        ctx.err(path, format!("must be positive semidefinite (min eigenvalue {min:.3e})"));
    }
}

fn build_gds(
    ctx: &mut Ctx,
    root: &Table,
    hbar: f64,
) -> Option<(GdsModel, GaussianState)> {
    let m = req_table(ctx, root, "model")?;
    ctx.check_keys(m, "model", &["n_modes", "b_matrix", "xi", "lindblad_vectors"]);
    let n_modes = req_usize(ctx, m, "model", "n_modes")?;
    if n_modes == 0 {
        ctx.err("model.n_modes", "must be at least 1");
        return None;
    }
    let d = 2 * n_modes;
    let b = m
        .get("b_matrix")
        .map(|v| parse_real_matrix(ctx, v, "model.b_matrix", d, d))
        .unwrap_or_else(|| {
            ctx.err("model.b_matrix", "missing required matrix");
            None
        })?;
    symmetric_psd_check(ctx, &b, "model.b_matrix");
    let xi = m
        .get("xi")
        .map(|v| parse_real_vector(ctx, v, "model.xi", d))
        .unwrap_or_else(|| {
            ctx.err("model.xi", "missing required vector");
            None
        })?;
    let lv = match m.get("lindblad_vectors") {
        Some(Value::Array(a)) if !a.is_empty() => {
            let mut out = Vec::with_capacity(a.len());
            for (k, e) in a.iter().enumerate() {
                out.push(parse_complex_vector(
                    ctx,
                    e,
                    &format!("model.lindblad_vectors[{k}]"),
                    d,
                )?);
            }
            out
        }
        Some(Value::Array(_)) => {
            ctx.err("model.lindblad_vectors", "need at least one vector");
            return None;
        }
        _ => {
            ctx.err("model.lindblad_vectors", "missing required array of complex vectors");
            return None;
        }
    };

    let s = req_table(ctx, root, "initial_state")?;
    ctx.check_keys(s, "initial_state", &["mean", "covariance", "nu"]);
    let mean = match s.get("mean") {
        Some(v) => parse_real_vector(ctx, v, "initial_state.mean", d)?,
        None => RVec::zeros(d),
    };
    let state = match (s.get("covariance"), s.get("nu")) {
        (Some(_), Some(_)) => {
            ctx.err("initial_state", "give either covariance or nu, not both");
            return None;
        }
        (Some(v), None) => {
            let cov = parse_real_matrix(ctx, v, "initial_state.covariance", d, d)?;
            match GaussianState::new(mean, cov) {
                Ok(st) => st,
                Err(e) => {
                    ctx.err("initial_state.covariance", e);
                    return None;
                }
            }
        }
        (None, Some(v)) => {
            let nu = match as_finite(v) {
                Some(x) => x,
                None => {
                    ctx.err("initial_state.nu", "expected a finite number");
                    return None;
                }
            };
            match GaussianState::isotropic(n_modes, nu) {
                Ok(st) if mean.norm() == 0.0 => st,
                Ok(st) => match GaussianState::new(mean, st.covariance().clone()) {
                    Ok(shifted) => shifted,
                    Err(e) => {
                        ctx.err("initial_state", e);
                        return None;
                    }
                },
                Err(e) => {
                    ctx.err("initial_state.nu", e);
                    return None;
                }
            }
        }
        (None, None) => {
            ctx.err("initial_state", "missing covariance (or isotropic nu)");
            return None;
        }
    };

    match GdsModel::new(n_modes, hbar, b, xi, lv) {
        Ok(model) => Some((model, state)),
        Err(e) => {
            ctx.err("model", e);
            None
        }
    }
}

fn build_finite(ctx: &mut Ctx, root: &Table, hbar: f64) -> Option<(LindbladModel, CMat)> {
    let m = req_table(ctx, root, "model")?;
    ctx.check_keys(m, "model", &["dim", "hamiltonian", "lindblads"]);
    let dim = req_usize(ctx, m, "model", "dim")?;
    if dim < 2 {
        ctx.err("model.dim", "must be at least 2");
        return None;
    }
    let h = m
        .get("hamiltonian")
        .map(|v| parse_complex_matrix(ctx, v, "model.hamiltonian", dim))
        .unwrap_or_else(|| {
            ctx.err("model.hamiltonian", "missing required matrix");
            None
        })?;
    let ls = match m.get("lindblads") {
        Some(Value::Array(a)) if !a.is_empty() => {
            let mut out = Vec::with_capacity(a.len());
            for (k, e) in a.iter().enumerate() {
                out.push(parse_complex_matrix(
                    ctx,
                    e,
                    &format!("model.lindblads[{k}]"),
                    dim,
                )?);
            }
            out
        }
        Some(Value::Array(_)) => {
            ctx.err("model.lindblads", "need at least one jump operator");
            return None;
        }
        _ => {
            ctx.err("model.lindblads", "missing required array of complex matrices");
            return None;
        }
    };

    let s = req_table(ctx, root, "initial_state")?;
    ctx.check_keys(s, "initial_state", &["density"]);
    let rho_raw = s
        .get("density")
        .map(|v| parse_complex_matrix(ctx, v, "initial_state.density", dim))
        .unwrap_or_else(|| {
            ctx.err("initial_state.density", "missing required matrix");
            None
        })?;
    // Validate, then snap the last digits: hermitize and renormalize the
    // trace so downstream density checks never trip on config rounding.
    let herm_gap = (&rho_raw - rho_raw.adjoint()).norm();
    if herm_gap > 1e-10 * (1.0 + rho_raw.norm()) {
        ctx.err("initial_state.density", format!("must be Hermitian (gap {herm_gap:.3e})"));
        return None;
    }
    let tr = rho_raw.trace().re;
    if (tr - 1.0).abs() > 1e-8 || rho_raw.trace().im.abs() > 1e-10 {
        ctx.err("initial_state.density", format!("trace must be 1, got {tr:.12}"));
        return None;
    }
    let rho = (&rho_raw + rho_raw.adjoint()) * C64::new(0.5 / tr, 0.0);
    if let Ok((vals, _)) = entroflux::matrix_kernel::herm_eig(&rho) {
        if vals.min() < -1e-10 {
            ctx.err(
                "initial_state.density",
                format!("must be positive semidefinite (min eigenvalue {:.3e})", vals.min()),
            );
            return None;
        }
    }

    match LindbladModel::new(hbar, h, ls) {
        Ok(model) => Some((model, rho)),
        Err(e) => {
            ctx.err("model", e);
            None
        }
    }
}

fn build_ou(
    ctx: &mut Ctx,
    root: &Table,
) -> Option<(OuModel, GaussianDensity, Option<McSpec>)> {
    let m = req_table(ctx, root, "model")?;
    ctx.check_keys(m, "model", &["dim", "drift", "noise", "offset"]);
    let dim = req_usize(ctx, m, "model", "dim")?;
    if dim == 0 {
        ctx.err("model.dim", "must be at least 1");
        return None;
    }
    let drift = m
        .get("drift")
        .map(|v| parse_real_matrix(ctx, v, "model.drift", dim, dim))
        .unwrap_or_else(|| {
            ctx.err("model.drift", "missing required matrix");
            None
        })?;
    let noise = match m.get("noise") {
        Some(Value::Array(rows)) if !rows.is_empty() => {
            let cols = match rows[0].as_array() {
                Some(r) if !r.is_empty() => r.len(),
                _ => {
                    ctx.err("model.noise[0]", "expected a nonempty row array");
                    return None;
                }
            };
            parse_real_matrix(ctx, m.get("noise").unwrap(), "model.noise", dim, cols)?
        }
        _ => {
            ctx.err("model.noise", "missing required matrix");
            return None;
        }
    };
    let offset = m
        .get("offset")
        .map(|v| parse_real_vector(ctx, v, "model.offset", dim))
        .unwrap_or_else(|| {
            ctx.err("model.offset", "missing required vector");
            None
        })?;

    let s = req_table(ctx, root, "initial_state")?;
    ctx.check_keys(s, "initial_state", &["mean", "covariance"]);
    let mean = s
        .get("mean")
        .map(|v| parse_real_vector(ctx, v, "initial_state.mean", dim))
        .unwrap_or_else(|| {
            ctx.err("initial_state.mean", "missing required vector");
            None
        })?;
    let cov = s
        .get("covariance")
        .map(|v| parse_real_matrix(ctx, v, "initial_state.covariance", dim, dim))
        .unwrap_or_else(|| {
            ctx.err("initial_state.covariance", "missing required matrix");
            None
        })?;

    let mc = match root.get("monte_carlo") {
        Some(Value::Table(t)) => {
            ctx.check_keys(t, "monte_carlo", &["n_paths", "step", "at"]);
            let n_paths = req_usize(ctx, t, "monte_carlo", "n_paths")?;
            let step = req_f64(ctx, t, "monte_carlo", "step")?;
            if n_paths < 100 {
                ctx.err("monte_carlo.n_paths", "must be at least 100");
                return None;
            }
            if step <= 0.0 {
                ctx.err("monte_carlo.step", "must be positive");
                return None;
            }
            let at = opt_f64(ctx, t, "monte_carlo", "at");
            Some(McSpec { n_paths, step, at })
        }
        Some(_) => {
            ctx.err("monte_carlo", "expected a table");
            None
        }
        None => None,
    };

    let model = match OuModel::new(drift, noise, offset) {
        Ok(model) => model,
        Err(e) => {
            ctx.err("model", e);
            return None;
        }
    };
    let density = match GaussianDensity::new(mean, cov) {
        Ok(g) => g,
        Err(e) => {
            ctx.err("initial_state", e);
            return None;
        }
    };
    Some((model, density, mc))
}

/// Parse and validate one scenario file, applying CLI overrides.
pub fn load_config(path: &Path, ov: &CliOverrides) -> Result<ScenarioConfig, ConfigErrors> {
    let fail = |errors: Vec<String>| ConfigErrors {
        path: path.to_path_buf(),
        errors,
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(vec![format!("cannot read file: {e}")]))?;
    let root: Value = text
        .parse()
        .map_err(|e| fail(vec![format!("parse error: {e}")]))?;
    let root = match root {
        Value::Table(t) => t,
        _ => return Err(fail(vec!["top level must be a table".into()])),
    };

    let mut ctx = Ctx {
        errors: Vec::new(),
        strict: ov.strict,
    };
    ctx.check_keys(
        &root,
        "",
        &[
            "kind",
            "hbar",
            "fd_step",
            "seed",
            "cutoff",
            "output_path",
            "time_grid",
            "model",
            "initial_state",
            "monte_carlo",
        ],
    );

    let kind = parse_kind(&mut ctx, &root);
    let grid = parse_grid(&mut ctx, &root);

    let hbar = match (kind, root.contains_key("hbar")) {
        (Some(Kind::ClassicalOu), true) => {
            ctx.err("hbar", "not meaningful for classical_ou scenarios");
            1.0
        }
        (_, true) => {
            let h = opt_f64(&mut ctx, &root, "", "hbar").unwrap_or(1.0);
            if h <= 0.0 {
                ctx.err("hbar", "must be positive");
            }
            h
        }
        (_, false) => 1.0,
    };

    let fd_step = match root.contains_key("fd_step") {
        true => {
            let v = opt_f64(&mut ctx, &root, "", "fd_step");
            if let Some(x) = v {
                if x <= 0.0 {
                    ctx.err("fd_step", "must be positive");
                }
            }
            v
        }
        false => None,
    };
    let fd_step = ov.fd_step.or(fd_step);

    let seed = match root.get("seed") {
        Some(Value::Integer(i)) if *i >= 0 => *i as u64,
        Some(_) => {
            ctx.err("seed", "expected a nonnegative integer");
            0
        }
        None => 0,
    };
    let seed = ov.seed.unwrap_or(seed);

    let cutoff = match (kind, root.get("cutoff")) {
        (Some(k), Some(_)) if k != Kind::CrossValidate => {
            ctx.err("cutoff", "only meaningful for cross_validate scenarios");
            DEFAULT_CUTOFF
        }
        (_, Some(Value::Integer(i))) if *i >= 3 => *i as usize,
        (_, Some(_)) => {
            ctx.err("cutoff", "expected an integer of at least 3");
            DEFAULT_CUTOFF
        }
        (_, None) => DEFAULT_CUTOFF,
    };
    let cutoff = ov.cutoff.unwrap_or(cutoff);

    if root.contains_key("monte_carlo") && kind.is_some() && kind != Some(Kind::ClassicalOu) {
        ctx.err("monte_carlo", "only meaningful for classical_ou scenarios");
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_string());

    let output_path = match root.get("output_path") {
        Some(Value::String(s)) if !s.is_empty() => PathBuf::from(s),
        Some(_) => {
            ctx.err("output_path", "expected a nonempty string");
            PathBuf::from(format!("{name}.csv"))
        }
        None => PathBuf::from(format!("{name}.csv")),
    };

    let payload = match kind {
        Some(Kind::Gds) => build_gds(&mut ctx, &root, hbar)
            .map(|(model, state0)| Payload::Gds { model, state0 }),
        Some(Kind::CrossValidate) => build_gds(&mut ctx, &root, hbar)
            .map(|(model, state0)| Payload::CrossValidate { model, state0 }),
        Some(Kind::FiniteLindblad) => build_finite(&mut ctx, &root, hbar)
            .map(|(model, rho0)| Payload::FiniteLindblad { model, rho0 }),
        Some(Kind::ClassicalOu) => {
            build_ou(&mut ctx, &root).map(|(model, density0, monte_carlo)| Payload::ClassicalOu {
                model,
                density0,
                monte_carlo,
            })
        }
        None => None,
    };

    match (payload, grid, kind) {
        (Some(payload), Some(grid), Some(kind)) if ctx.errors.is_empty() => Ok(ScenarioConfig {
            name,
            kind,
            hbar,
            fd_step,
            seed,
            cutoff,
            output_path,
            grid,
            payload,
        }),
        _ => {
            if ctx.errors.is_empty() {
                ctx.errors.push("config did not validate".into());
            }
            Err(fail(ctx.errors))
        }
    }
}
