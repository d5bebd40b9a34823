//! Run configuration and the CSV-producing commands behind the binary.
//!
//! Configuration files hold one `key = value` per line; `#` starts a
//! comment. Every command returns its CSV as a string so callers decide
//! where it goes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::dynamics;
use crate::error::Error;
use crate::fock::{self, EvolveOptions, PairBasisState};
use crate::gain::{self, AngularGrid};
use crate::model::{CondensateGeometry, ModelParams};
use crate::quasi_spin::{self, EprState};

/// Process exit codes, one per failure class.
pub mod exit {
    pub const CONFIG: i32 = 1;
    pub const CLOSED_CHANNEL: i32 = 2;
    pub const NON_CONVERGENT: i32 = 3;
    pub const OVERFLOW: i32 = 4;
    pub const ODD_ATOM_NUMBER: i32 = 5;
    pub const NON_UNITARY: i32 = 6;
    pub const NOT_NORMALIZED: i32 = 7;
    pub const ALL_ZERO_SCAN: i32 = 8;
}

/// A failed command: exit code plus a one-line diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandError {
    pub code: i32,
    pub message: String,
}

impl CommandError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: exit::CONFIG,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CommandError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CommandError {}

impl From<Error> for CommandError {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::ClosedChannel { .. } => exit::CLOSED_CHANNEL,
            Error::NonConvergent { .. } | Error::ImaginaryResidual(_) => exit::NON_CONVERGENT,
            Error::Overflow { .. } => exit::OVERFLOW,
            Error::OddAtomNumber(_) => exit::ODD_ATOM_NUMBER,
            Error::NonUnitary { .. } => exit::NON_UNITARY,
            Error::NotNormalized { .. } => exit::NOT_NORMALIZED,
            Error::AllZeroScan => exit::ALL_ZERO_SCAN,
            Error::InvalidParameter { .. } | Error::InvalidCoefficients { .. } => exit::CONFIG,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

type CmdResult<T> = std::result::Result<T, CommandError>;

/// Parsed `key = value` configuration. Unset keys fall back to the
/// per-command defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub sigma_z: Option<f64>,
    pub sigma_perp: Option<f64>,
    pub n0: Option<u64>,
    pub q_mag: Option<f64>,
    pub detuning: Option<f64>,
    pub rate_ref: Option<f64>,
    pub chi: Option<f64>,
    pub t_max: Option<f64>,
    pub n_times: Option<usize>,
    /// Degrees.
    pub theta_min: Option<f64>,
    /// Degrees.
    pub theta_max: Option<f64>,
    pub n_theta: Option<usize>,
    pub angular_nodes: Option<usize>,
    pub output_path: Option<PathBuf>,
    pub convention_factor: Option<f64>,
    pub norm_tolerance: Option<f64>,
    pub fock_detuning: Option<f64>,
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> CmdResult<T> {
    value
        .parse()
        .map_err(|_| CommandError::config(format!("config key `{key}`: cannot parse `{value}`")))
}

impl RunConfig {
    /// Parses configuration text.
    pub fn parse(text: &str) -> CmdResult<Self> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CommandError::config(format!("config line {}: expected `key = value`", idx + 1))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> CmdResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CommandError::config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> CmdResult<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| {
            CommandError::config(format!("override `{assignment}`: expected key=value"))
        })?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> CmdResult<()> {
        match key {
            "sigma_z" => self.sigma_z = Some(parse_num(key, value)?),
            "sigma_perp" => self.sigma_perp = Some(parse_num(key, value)?),
            "n0" => self.n0 = Some(parse_num(key, value)?),
            "q_mag" => self.q_mag = Some(parse_num(key, value)?),
            "detuning" => self.detuning = Some(parse_num(key, value)?),
            "rate_ref" => self.rate_ref = Some(parse_num(key, value)?),
            "chi" => self.chi = Some(parse_num(key, value)?),
            "t_max" => self.t_max = Some(parse_num(key, value)?),
            "n_times" => self.n_times = Some(parse_num(key, value)?),
            "theta_min" => self.theta_min = Some(parse_num(key, value)?),
            "theta_max" => self.theta_max = Some(parse_num(key, value)?),
            "n_theta" => self.n_theta = Some(parse_num(key, value)?),
            "angular_nodes" => self.angular_nodes = Some(parse_num(key, value)?),
            "output_path" => self.output_path = Some(PathBuf::from(value)),
            "convention_factor" => self.convention_factor = Some(parse_num(key, value)?),
            "norm_tolerance" => self.norm_tolerance = Some(parse_num(key, value)?),
            "fock_detuning" => self.fock_detuning = Some(parse_num(key, value)?),
            _ => return Err(CommandError::config(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }
}

fn require<T: Copy>(value: Option<T>, key: &str) -> CmdResult<T> {
    value.ok_or_else(|| CommandError::config(format!("missing config key `{key}`")))
}

/// Wraps a parameter error so the diagnostic names the config key.
fn keyed(key: &str) -> impl Fn(Error) -> CommandError + '_ {
    move |err| match err {
        Error::InvalidParameter { reason, .. } => {
            CommandError::config(format!("config key `{key}`: {reason}"))
        }
        other => other.into(),
    }
}

/// Maps a parameter error whose name matches its config key.
fn named(err: Error) -> CommandError {
    match err {
        Error::InvalidParameter { name, reason } => {
            CommandError::config(format!("config key `{name}`: {reason}"))
        }
        other => other.into(),
    }
}

/// Formats a float with 17 significant digits; negative zero prints as zero.
pub fn fmt_f64(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn row(out: &mut String, values: &[f64]) {
    let cells: Vec<String> = values.iter().map(|v| fmt_f64(*v)).collect();
    out.push_str(&cells.join(","));
    out.push('\n');
}

fn time_grid(cfg: &RunConfig) -> CmdResult<Vec<f64>> {
    let t_max = require(cfg.t_max, "t_max")?;
    let n = require(cfg.n_times, "n_times")?;
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(CommandError::config(
            "config key `t_max`: must be finite and >= 0",
        ));
    }
    if n < 2 {
        return Err(CommandError::config(
            "config key `n_times`: need at least 2 output times",
        ));
    }
    Ok((0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect())
}

fn rate_ref(cfg: &RunConfig) -> f64 {
    cfg.rate_ref.unwrap_or(1.0)
}

/// `gain-scan`: ĝ versus θ at fixed |q|.
pub fn cmd_gain_scan(cfg: &RunConfig) -> CmdResult<String> {
    let sigma_z = require(cfg.sigma_z, "sigma_z")?;
    let sigma_perp = cfg.sigma_perp.unwrap_or(1.0);
    let q_mag = require(cfg.q_mag, "q_mag")?;
    let geom = CondensateGeometry::new(sigma_z, sigma_perp, cfg.n0.unwrap_or(2)).map_err(named)?;
    let detuning = cfg.detuning.unwrap_or(q_mag * q_mag / 2.0);
    let params = ModelParams::new(detuning, rate_ref(cfg)).map_err(named)?;

    let theta_min = cfg.theta_min.unwrap_or(0.0);
    let theta_max = cfg.theta_max.unwrap_or(90.0);
    let n_theta = cfg.n_theta.unwrap_or(91);
    if n_theta == 0 {
        return Err(CommandError::config("config key `n_theta`: must be >= 1"));
    }
    if !(0.0..=180.0).contains(&theta_min)
        || !(0.0..=180.0).contains(&theta_max)
        || theta_max < theta_min
    {
        return Err(CommandError::config(
            "config keys `theta_min`/`theta_max`: need 0 <= theta_min <= theta_max <= 180",
        ));
    }
    let degrees: Vec<f64> = if n_theta == 1 {
        vec![theta_min]
    } else {
        (0..n_theta)
            .map(|i| theta_min + (theta_max - theta_min) * i as f64 / (n_theta - 1) as f64)
            .collect()
    };
    let thetas: Vec<f64> = degrees.iter().map(|d| d.to_radians()).collect();
    let nodes = cfg.angular_nodes.unwrap_or(256);
    let grid = AngularGrid {
        polar_nodes: nodes,
        azimuth_nodes: nodes,
        ..AngularGrid::default()
    };
    let scan = gain::gain_scan_theta(&geom, &params, q_mag, &thetas, &grid)
        .map_err(keyed("angular_nodes"))?;

    let mut out = String::from("theta_deg,g_raw,g_normalized\n");
    for (deg, point) in degrees.iter().zip(&scan.points) {
        row(&mut out, &[*deg, point.g_raw, point.g_normalized]);
    }
    Ok(out)
}

/// `dynamics`: populations and on-shell pair correlation of the reference mode.
pub fn cmd_dynamics(cfg: &RunConfig) -> CmdResult<String> {
    let times = time_grid(cfg)?;
    let rate = rate_ref(cfg);
    let detuning = cfg
        .detuning
        .or(cfg.q_mag.map(|q| q * q / 2.0))
        .unwrap_or(1.0);
    let params = ModelParams::new(detuning, rate).map_err(named)?;
    let mut out =
        String::from("t,n_plus,n_minus,c_onshell_re,c_onshell_im,c_onshell_abs2_over_nn1\n");
    for &t in &times {
        let pop = dynamics::mode_population(rate, t)?;
        let c = dynamics::onshell_correlation(&params, t)?;
        let ratio = dynamics::onshell_correlation_ratio(&params, t)?;
        row(&mut out, &[t, pop.n_plus, pop.n_minus, c.re, c.im, ratio]);
    }
    Ok(out)
}

/// `fock`: exact pair-basis evolution from the full pump.
pub fn cmd_fock(cfg: &RunConfig) -> CmdResult<String> {
    let n0 = require(cfg.n0, "n0")?;
    let chi = require(cfg.chi, "chi")?;
    let times = time_grid(cfg)?;
    let h = fock::build_hamiltonian_detuned(n0, chi, cfg.fock_detuning.unwrap_or(0.0))
        .map_err(keyed("n0"))?;
    let options = EvolveOptions {
        norm_budget: cfg
            .norm_tolerance
            .unwrap_or(EvolveOptions::default().norm_budget),
        ..EvolveOptions::default()
    };
    let evolution = fock::evolve_with(&h, PairBasisState::all_pump(n0), &times, &options)?;
    let mut out = String::from("t,n0_mean,n_pair_mean,var_lz,norm_drift\n");
    for obs in fock::observables(&evolution) {
        row(
            &mut out,
            &[
                obs.t,
                obs.n0_mean,
                obs.n_pair_mean,
                obs.var_lz,
                (obs.norm - 1.0).abs(),
            ],
        );
    }
    Ok(out)
}

/// `spin-stats`: quasi-spin moments of the two-trap state.
pub fn cmd_spin_stats(cfg: &RunConfig, coeff_file: Option<&Path>) -> CmdResult<String> {
    let n = require(cfg.n0, "n0")?;
    let f = cfg.convention_factor.unwrap_or(1.0);
    if !(f.is_finite() && f > 0.0) {
        return Err(CommandError::config(
            "config key `convention_factor`: must be finite and > 0",
        ));
    }
    let state = match coeff_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CommandError::config(format!("cannot read coefficients {}: {e}", path.display()))
            })?;
            EprState::parse(n, &text)?
        }
        None => EprState::binomial(n)?,
    };
    let stats = state.lz_stats(f)?;
    let product = quasi_spin::product_state_variance(n, f);
    let ratio = stats.var_total / product;

    let mut out = String::from(
        "N,mean_l,var_l,mean_r,var_r,mean_total,var_total,product_var,squeezing_ratio\n",
    );
    write!(out, "{n},").expect("writing to String");
    row(
        &mut out,
        &[
            stats.mean_l,
            stats.var_l,
            stats.mean_r,
            stats.var_r,
            stats.mean_total,
            stats.var_total,
            product,
            ratio,
        ],
    );
    Ok(out)
}
