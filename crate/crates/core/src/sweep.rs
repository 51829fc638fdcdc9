//! Parameter sweeps and experiment drivers producing self-describing tables.
//!
//! Every table starts with `#` comment lines holding the tool version, the
//! full configuration as JSON and the seeds, followed by CSV rows (or a single
//! JSON object with the same content). Cells run on the rayon pool; rows come
//! out in grid order.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::effdim::{effective_dim, FeatureMatrix, SpectrumReport, DEFAULT_THRESHOLD};
use crate::error::{Error, Result};
use crate::loss::{LossKind, LossModel};
use crate::risk::ClassRisks;
use crate::sim::{evaluate, fit_weighted_general, fit_weighted_square, generate};
use crate::solver::{
    compare_weighted_unweighted, rho_tilde, solve_downsampled, solve_equal_error_square, solve_general, solve_square,
    solve_unweighted_square, AsymptoticSolution, ProblemSpec,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    DeltaSweep,
    RhoSweep,
    PiSweep,
    DsCompare,
    Simulate,
    Solve,
    RhoTilde,
    Effdim,
    CompareSep,
}

/// The scalar a grid runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    S,
    #[serde(alias = "pi_plus")]
    Pi,
    Delta,
    Rho,
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s" => Ok(Param::S),
            "pi" | "pi_plus" | "pi-plus" => Ok(Param::Pi),
            "delta" => Ok(Param::Delta),
            "rho" => Ok(Param::Rho),
            other => Err(Error::Config(format!("unknown parameter `{other}` (expected s|pi|delta|rho)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format `{other}` (expected csv|json)"))),
        }
    }
}

/// `start:stop:points[:log]`, inclusive of both ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub log: bool,
}

impl Grid {
    pub fn linear(start: f64, stop: f64, points: usize) -> Self {
        Grid { start, stop, points, log: false }
    }

    pub fn log(start: f64, stop: f64, points: usize) -> Self {
        Grid { start, stop, points, log: true }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                if i + 1 == self.points {
                    self.stop
                } else if self.log {
                    (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + t * (self.stop - self.start)
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("grid `{s}` is not start:stop:points[:log]"));
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(bad());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let points: usize = parts[2].trim().parse().map_err(|_| bad())?;
        let log = match parts.get(3).map(|p| p.trim()) {
            None | Some("lin") | Some("linear") => false,
            Some("log") => true,
            Some(_) => return Err(bad()),
        };
        if points == 0 || !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        if log && !(start > 0.0 && stop > 0.0) {
            return Err(Error::Config(format!("log grid `{s}` needs positive bounds")));
        }
        Ok(Grid { start, stop, points, log })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.points)?;
        if self.log {
            f.write_str(":log")?;
        }
        Ok(())
    }
}

impl Serialize for Grid {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn default_s() -> f64 {
    2.0
}
fn default_pi_plus() -> f64 {
    0.2
}
fn default_delta() -> f64 {
    0.2
}
fn default_rho() -> f64 {
    1.0
}
fn default_loss() -> LossKind {
    LossKind::Square
}
fn default_n() -> usize {
    4000
}
fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}
fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

/// One experiment. Unset fields take the headline regime `s = 2`,
/// `pi_plus = 0.2`, `delta = 0.2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub mode: Mode,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "default_pi_plus")]
    pub pi_plus: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_loss")]
    pub loss: LossKind,
    /// Defaults to a mode-specific grid when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    /// Parameter swept by `simulate`; without a grid a single point is run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vary: Option<Param>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels_col: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

impl SweepConfig {
    pub fn new(mode: Mode) -> Self {
        SweepConfig {
            mode,
            s: default_s(),
            pi_plus: default_pi_plus(),
            delta: default_delta(),
            rho: default_rho(),
            loss: default_loss(),
            grid: None,
            vary: None,
            n: default_n(),
            seeds: default_seeds(),
            input: None,
            threshold: default_threshold(),
            labels_col: None,
            out: None,
            format: Format::Csv,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&text)
    }

    /// The fixed-parameter problem, validated.
    pub fn spec(&self) -> Result<ProblemSpec> {
        ProblemSpec::new(self.s, self.pi_plus, self.delta, self.rho, LossModel::from_kind(self.loss)?)
    }

    /// Parameter the grid runs over in this mode, if any.
    pub fn swept(&self) -> Option<Param> {
        match self.mode {
            Mode::DeltaSweep | Mode::DsCompare => Some(Param::Delta),
            Mode::RhoSweep => Some(Param::Rho),
            Mode::PiSweep => Some(Param::Pi),
            Mode::CompareSep => Some(Param::S),
            Mode::Simulate => self.grid.map(|_| self.vary.unwrap_or(Param::Rho)),
            Mode::Solve | Mode::RhoTilde | Mode::Effdim => None,
        }
    }

    fn default_grid(&self) -> Option<Grid> {
        match self.mode {
            Mode::DeltaSweep => Some(Grid::linear(0.05, 0.9, 35)),
            Mode::RhoSweep => Some(Grid::linear(1.0, 14.0, 53)),
            Mode::PiSweep => Some(Grid::linear(0.05, 0.5, 46)),
            Mode::DsCompare => Some(Grid::linear(0.01 * self.pi_plus, 1.95 * self.pi_plus, 40)),
            Mode::CompareSep => Some(Grid::linear(0.5, 6.0, 40)),
            _ => None,
        }
    }

    /// Grid values, checked against the swept parameter's domain.
    pub fn grid_values(&self) -> Result<Vec<f64>> {
        let Some(param) = self.swept() else {
            return Ok(Vec::new());
        };
        let grid =
            self.grid.or_else(|| self.default_grid()).ok_or_else(|| Error::Config("this mode needs a grid".into()))?;
        let values = grid.values();
        for &v in &values {
            let ok = match param {
                Param::S => v > 0.0,
                Param::Pi => v > 0.0 && v <= 0.5,
                Param::Delta => v > 0.0 && v < 1.0,
                Param::Rho => v > 0.0,
            };
            if !ok {
                return Err(Error::domain(format!("grid value {v} outside the domain of {param:?}")));
            }
        }
        Ok(values)
    }

    fn at(&self, param: Param, v: f64) -> Result<ProblemSpec> {
        let base = self.spec_unchecked_param(param)?;
        match param {
            Param::S => base.with_s(v),
            Param::Pi => base.with_pi_plus(v),
            Param::Delta => base.with_delta(v),
            Param::Rho => base.with_rho(v),
        }
    }

    /// Base spec, tolerating an out-of-domain fixed value for the parameter
    /// that the grid overrides anyway.
    fn spec_unchecked_param(&self, param: Param) -> Result<ProblemSpec> {
        let mut c = self.clone();
        match param {
            Param::S => c.s = default_s(),
            Param::Pi => c.pi_plus = default_pi_plus(),
            Param::Delta => c.delta = default_delta(),
            Param::Rho => c.rho = default_rho(),
        }
        c.spec()
    }
}

/// One output row. Optional cells are empty in CSV when not applicable.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepRow {
    /// Role of the row: `theory`, `rho_tilde`, `prior_ratio`, `werm`,
    /// `downsampled`, `seed`, `mean`, `std` or `compare`.
    pub kind: String,
    pub s: f64,
    pub pi_plus: f64,
    pub delta: f64,
    pub rho: f64,
    pub loss: String,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub b: Option<f64>,
    pub lambda: Option<f64>,
    pub risk_plus: Option<f64>,
    pub risk_minus: Option<f64>,
    pub wce: Option<f64>,
    pub residual_norm: Option<f64>,
    pub feasible: bool,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub realized_delta: Option<f64>,
    pub delta_tilde: Option<f64>,
    pub threshold_s_squared: Option<f64>,
    pub weighted_wins: Option<bool>,
    pub wce_unweighted: Option<f64>,
    /// Error message when the row could not be computed.
    pub note: String,
}

impl SweepRow {
    pub fn new(kind: &str, spec: &ProblemSpec) -> Self {
        SweepRow {
            kind: kind.to_owned(),
            s: spec.s(),
            pi_plus: spec.pi_plus(),
            delta: spec.delta(),
            rho: spec.rho(),
            loss: spec.loss().name().to_owned(),
            feasible: true,
            ..SweepRow::default()
        }
    }

    fn with_solution(mut self, sol: &AsymptoticSolution) -> Self {
        self.alpha = Some(sol.alpha);
        self.gamma = Some(sol.gamma);
        self.b = Some(sol.b);
        self.lambda = Some(sol.lambda);
        self.residual_norm = Some(sol.residual_norm());
        match sol.risks(self.s) {
            Ok(r) => self.with_risks(&r),
            Err(e) => self.flagged(&e),
        }
    }

    fn with_risks(mut self, r: &ClassRisks) -> Self {
        self.risk_plus = Some(r.risk_plus);
        self.risk_minus = Some(r.risk_minus);
        self.wce = Some(r.wce);
        self
    }

    fn flagged(mut self, e: &Error) -> Self {
        self.feasible = false;
        self.note = e.to_string();
        self
    }

    fn from_result(kind: &str, spec: &ProblemSpec, sol: Result<AsymptoticSolution>) -> Self {
        let row = SweepRow::new(kind, spec);
        match sol {
            Ok(sol) => row.with_solution(&sol),
            Err(e) => row.flagged(&e),
        }
    }
}

/// Square loss through the explicit solver, anything else through the
/// general one.
pub fn solve(spec: &ProblemSpec) -> Result<AsymptoticSolution> {
    if spec.loss().is_square() {
        solve_square(spec)
    } else {
        solve_general(spec)
    }
}

fn solve_grid(config: &SweepConfig, param: Param, kind: &str) -> Result<Vec<SweepRow>> {
    let values = config.grid_values()?;
    let specs = values.iter().map(|&v| config.at(param, v)).collect::<Result<Vec<_>>>()?;
    Ok(specs.par_iter().map(|spec| SweepRow::from_result(kind, spec, solve(spec))).collect())
}

/// Per-class risks against `delta` at `rho = 1`.
pub fn run_delta_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let mut c = config.clone();
    c.rho = 1.0;
    let values = c.grid_values()?;
    let specs = values.iter().map(|&v| c.at(Param::Delta, v)).collect::<Result<Vec<_>>>()?;
    Ok(specs
        .par_iter()
        .map(|spec| {
            let sol = if spec.loss().is_square() { solve_unweighted_square(spec) } else { solve_general(spec) };
            SweepRow::from_result("theory", spec, sol)
        })
        .collect())
}

/// Per-class risks against `rho`, followed by one row at the equal-error
/// weight (flagged when it does not exist) and one at the prior ratio.
pub fn run_rho_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let mut rows = solve_grid(config, Param::Rho, "theory")?;
    let base = config.spec_unchecked_param(Param::Rho)?;
    match rho_tilde(base.s(), base.pi_plus(), base.delta()) {
        Ok(rt) => {
            let spec = base.with_rho(rt)?;
            rows.push(SweepRow::from_result("rho_tilde", &spec, solve(&spec)));
        }
        Err(e) => rows.push(SweepRow::new("rho_tilde", &base).flagged(&e)),
    }
    let spec = base.with_rho(base.pi_minus() / base.pi_plus())?;
    rows.push(SweepRow::from_result("prior_ratio", &spec, solve(&spec)));
    Ok(rows)
}

/// Per-class risks of unweighted training against the minority prior.
pub fn run_pi_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let mut c = config.clone();
    c.rho = 1.0;
    solve_grid(&c, Param::Pi, "theory")
}

/// Paired rows per `delta`: equal-error weighting, then downsampling.
pub fn run_ds_compare(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let values = config.grid_values()?;
    let limit = 2.0 * config.pi_plus;
    if let Some(&v) = values.iter().find(|&&v| v >= limit) {
        return Err(Error::domain(format!(
            "delta = {v} is not below 2 pi_plus = {limit}; the equal-error weight does not exist"
        )));
    }
    let mut c = config.clone();
    c.loss = LossKind::Square;
    let specs = values.iter().map(|&v| c.at(Param::Delta, v)).collect::<Result<Vec<_>>>()?;
    let pairs: Vec<[SweepRow; 2]> = specs
        .par_iter()
        .map(|spec| {
            let werm = match solve_equal_error_square(spec) {
                Ok(ee) => {
                    let mut row = SweepRow::new("werm", &spec.with_rho(ee.rho_tilde).expect("positive weight"))
                        .with_solution(&ee.solution);
                    row.wce = Some(ee.wce);
                    row
                }
                Err(e) => SweepRow::new("werm", spec).flagged(&e),
            };
            let ds = match solve_downsampled(spec) {
                Ok(ds) => {
                    let mut row = SweepRow::new("downsampled", spec).with_solution(&ds.solution);
                    row.delta_tilde = Some(ds.delta_tilde);
                    row
                }
                Err(e) => SweepRow::new("downsampled", spec).flagged(&e),
            };
            [werm, ds]
        })
        .collect();
    Ok(pairs.into_iter().flatten().collect())
}

/// Monte-Carlo cells over the grid (or the single fixed point) and seeds.
/// Each grid point yields a `theory` row, one `seed` row per seed, then
/// `mean` and `std` rows over the seeds that succeeded.
pub fn run_simulate(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    if config.seeds.is_empty() {
        return Err(Error::Config("simulate needs at least one seed".into()));
    }
    let specs = match config.swept() {
        Some(param) => config.grid_values()?.iter().map(|&v| config.at(param, v)).collect::<Result<Vec<_>>>()?,
        None => vec![config.spec()?],
    };
    let cells: Vec<(usize, u64)> =
        (0..specs.len()).flat_map(|i| config.seeds.iter().map(move |&seed| (i, seed))).collect();
    let seed_rows: Vec<SweepRow> =
        cells.par_iter().map(|&(i, seed)| simulate_cell(&specs[i], config.n, seed)).collect();

    let mut rows = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        rows.push(SweepRow::from_result("theory", spec, solve(spec)));
        let chunk = &seed_rows[i * config.seeds.len()..(i + 1) * config.seeds.len()];
        rows.extend(chunk.iter().cloned());
        let (mean, std) = aggregate(spec, chunk, config.n);
        rows.push(mean);
        rows.push(std);
    }
    Ok(rows)
}

fn simulate_cell(spec: &ProblemSpec, n: usize, seed: u64) -> SweepRow {
    let mut row = SweepRow::new("seed", spec);
    row.seed = Some(seed);
    row.n = Some(n);
    let data = match generate(spec, n, seed) {
        Ok(d) => d,
        Err(e) => return row.flagged(&e),
    };
    row.realized_delta = Some(data.realized_delta());
    let fit = if spec.loss().is_square() {
        fit_weighted_square(&data, spec.rho())
    } else {
        fit_weighted_general(&data, spec.rho(), spec.loss())
    };
    let fit = match fit {
        Ok(f) => f,
        Err(e) => return row.flagged(&e),
    };
    row.alpha = Some(fit.alpha_hat);
    row.gamma = Some(fit.gamma_hat);
    row.b = Some(fit.bias);
    match evaluate(&fit, data.mu()) {
        Ok(r) => row.with_risks(&r),
        Err(e) => row.flagged(&e),
    }
}

fn aggregate(spec: &ProblemSpec, rows: &[SweepRow], n: usize) -> (SweepRow, SweepRow) {
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.feasible).collect();
    let mut mean = SweepRow::new("mean", spec);
    let mut std = SweepRow::new("std", spec);
    mean.n = Some(n);
    std.n = Some(n);
    mean.realized_delta = rows.iter().find_map(|r| r.realized_delta);
    std.realized_delta = mean.realized_delta;
    if ok.is_empty() {
        let e = Error::Degenerate("every seed failed".into());
        return (mean.flagged(&e), std.flagged(&e));
    }
    if ok.len() < rows.len() {
        let note = format!("{} of {} seeds failed", rows.len() - ok.len(), rows.len());
        mean.note = note.clone();
        std.note = note;
    }
    let stats = |get: fn(&SweepRow) -> Option<f64>| -> (Option<f64>, Option<f64>) {
        let v: Vec<f64> = ok.iter().filter_map(|r| get(r)).collect();
        if v.is_empty() {
            return (None, None);
        }
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let sd = if v.len() > 1 {
            (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
        } else {
            0.0
        };
        (Some(m), Some(sd))
    };
    (mean.alpha, std.alpha) = stats(|r| r.alpha);
    (mean.gamma, std.gamma) = stats(|r| r.gamma);
    (mean.b, std.b) = stats(|r| r.b);
    (mean.risk_plus, std.risk_plus) = stats(|r| r.risk_plus);
    (mean.risk_minus, std.risk_minus) = stats(|r| r.risk_minus);
    (mean.wce, std.wce) = stats(|r| r.wce);
    (mean, std)
}

/// Single solve at the fixed parameters.
pub fn run_solve(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let spec = config.spec()?;
    Ok(vec![SweepRow::new("theory", &spec).with_solution(&solve(&spec)?)])
}

/// The equal-error weight and the solution there; a flagged row when it
/// does not exist.
pub fn run_rho_tilde(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let spec = config.spec()?;
    let row = match rho_tilde(spec.s(), spec.pi_plus(), spec.delta()) {
        Ok(rt) => {
            let at = spec.with_rho(rt)?;
            SweepRow::new("rho_tilde", &at).with_solution(&solve(&at)?)
        }
        Err(e @ Error::Infeasible(_)) => SweepRow::new("rho_tilde", &spec).flagged(&e),
        Err(e) => return Err(e),
    };
    Ok(vec![row])
}

/// Weighted-versus-unweighted verdicts along the `s` grid. The weight-ratio
/// column carries the equal-error weight, `wce` the weighted error.
pub fn run_compare_sep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let mut c = config.clone();
    c.loss = LossKind::Square;
    let values = c.grid_values()?;
    let specs = values.iter().map(|&v| c.at(Param::S, v)).collect::<Result<Vec<_>>>()?;
    specs
        .par_iter()
        .map(|spec| {
            let v = compare_weighted_unweighted(spec)?;
            let rt = rho_tilde(spec.s(), spec.pi_plus(), spec.delta())?;
            let mut row = SweepRow::new("compare", &spec.with_rho(rt)?);
            row.wce = Some(v.wce_weighted);
            row.wce_unweighted = Some(v.wce_unweighted);
            row.threshold_s_squared = Some(v.threshold_s_squared);
            row.weighted_wins = Some(v.weighted_wins);
            Ok(row)
        })
        .collect()
}

pub fn run_effdim(config: &SweepConfig) -> Result<SpectrumReport> {
    let input = config.input.as_deref().ok_or_else(|| Error::Config("effdim needs an input file".into()))?;
    let features = FeatureMatrix::from_path(input, config.labels_col.as_deref())?;
    effective_dim(&features, config.threshold)
}

/// Result of [`run`].
#[derive(Clone, Debug)]
pub enum Table {
    Rows(Vec<SweepRow>),
    Spectrum(SpectrumReport),
}

pub fn run(config: &SweepConfig) -> Result<Table> {
    let rows = match config.mode {
        Mode::DeltaSweep => run_delta_sweep(config)?,
        Mode::RhoSweep => run_rho_sweep(config)?,
        Mode::PiSweep => run_pi_sweep(config)?,
        Mode::DsCompare => run_ds_compare(config)?,
        Mode::Simulate => run_simulate(config)?,
        Mode::Solve => run_solve(config)?,
        Mode::RhoTilde => run_rho_tilde(config)?,
        Mode::CompareSep => run_compare_sep(config)?,
        Mode::Effdim => return Ok(Table::Spectrum(run_effdim(config)?)),
    };
    Ok(Table::Rows(rows))
}

#[derive(Serialize)]
struct SpectrumRow {
    k: usize,
    eigenvalue: f64,
    cumulative_variance_fraction: f64,
}

/// Writes the table with its metadata header.
pub fn write_table<W: Write>(config: &SweepConfig, table: &Table, format: Format, mut out: W) -> Result<()> {
    let io = |source| Error::Io { path: config.out.clone().unwrap_or_else(|| PathBuf::from("<output>")), source };
    match format {
        Format::Json => {
            let body = match table {
                Table::Rows(rows) => serde_json::to_value(rows)?,
                Table::Spectrum(report) => serde_json::to_value(report)?,
            };
            let doc = serde_json::json!({
                "version": VERSION,
                "config": config,
                "seeds": config.seeds,
                "rows": body,
            });
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out).map_err(io)?;
        }
        Format::Csv => {
            writeln!(out, "# werm {VERSION}").map_err(io)?;
            writeln!(out, "# config: {}", serde_json::to_string(config)?).map_err(io)?;
            writeln!(out, "# seeds: {}", serde_json::to_string(&config.seeds)?).map_err(io)?;
            if let Table::Spectrum(report) = table {
                writeln!(
                    out,
                    "# effective_dim: {} (threshold {}, n {})",
                    report.effective_dim, report.threshold, report.n
                )
                .map_err(io)?;
            }
            let mut w = csv::Writer::from_writer(&mut out);
            match table {
                Table::Rows(rows) => {
                    for row in rows {
                        w.serialize(row)?;
                    }
                }
                Table::Spectrum(report) => {
                    for (k, (&eigenvalue, &cumulative_variance_fraction)) in
                        report.eigenvalues.iter().zip(&report.cumulative_variance_fraction).enumerate()
                    {
                        w.serialize(SpectrumRow { k: k + 1, eigenvalue, cumulative_variance_fraction })?;
                    }
                }
            }
            w.flush().map_err(io)?;
        }
    }
    Ok(())
}

/// Reads back the configuration echoed in a CSV table header.
pub fn config_from_header(text: &str) -> Result<SweepConfig> {
    let line = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.strip_prefix("# config: "))
        .ok_or_else(|| Error::Config("no `# config:` line in table header".into()))?;
    Ok(serde_json::from_str(line)?)
}
