//! Scenario files: one JSON document naming a task and its inputs, and the
//! JSON/CSV reports produced by running it.
//!
//! Output numbers are rounded to [`SIG_DIGITS`] significant digits, so equal
//! scenarios with equal seeds give byte-identical output.

use crate::decide::{self, DecideOptions, TransferVerdict, Verdict};
use crate::density::{self, DensityReport, DiscreteSet, Slope};
use crate::geometry::{ConvexBody, TOL_GEOM};
use crate::trajectory::{BBox, LowerLength, Trajectory, UpperLength};
use crate::uniqueness::{self, AlphaEstimate, UniquenessFamily, UniquenessQuery, UniquenessVerdict};
use crate::verify::{self, ProbeReport, Resolution};
use crate::Error;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fmt;
use std::path::{Path, PathBuf};

pub const DEFAULT_N: usize = 256;
pub const DEFAULT_PERIOD: f64 = 16.0;
pub const DEFAULT_TRIALS: usize = 32;
pub const DEFAULT_SAMPLES: usize = 1_000_000;
/// Ball radius for the length conditions checked before a transfer.
pub const DEFAULT_CONDITION_RADIUS: f64 = 1.0;
pub const SIG_DIGITS: usize = 12;
/// Vertices used when writing a disk outline.
pub const OUTLINE_DISK_POINTS: usize = 360;

pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const SPECTRUM_CSV: &str = "spectrum.csv";
pub const DIFFERENCE_CSV: &str = "difference.csv";
pub const PROFILE_CSV: &str = "profile.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Decide,
    Verify,
    Density,
    Uniqueness,
    Emit,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Task::Decide => "decide",
            Task::Verify => "verify",
            Task::Density => "density",
            Task::Uniqueness => "uniqueness",
            Task::Emit => "emit",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<ConvexBody>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Trajectory>,
    /// Discrete set for `density`, or the set whose slope gives `B`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<DiscreteSet>,
    #[serde(rename = "N", alias = "n", alias = "grid", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "L", alias = "period", default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Requests a Paley–Wiener transfer of a `decide` verdict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Adversarial search iterations for `verify`; zero skips the search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iters: Option<usize>,
    /// Monte-Carlo samples for `uniqueness`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<UniquenessFamily>,
    #[serde(rename = "type_A", alias = "type_a", default, skip_serializing_if = "Option::is_none")]
    pub type_a: Option<f64>,
    #[serde(rename = "slope_B", alias = "slope_b", default, skip_serializing_if = "Option::is_none")]
    pub slope_b: Option<Slope>,
    /// Counting radius for `density`; ball radius of the length checks for
    /// `decide`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Region sampled by `emit`; the fundamental cell `[0, L)²` by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<BBox>,
}

/// A scenario that does not match the schema.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaError {
    /// Dotted path of the offending field (`.` for the document itself).
    pub field: String,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "schema error at `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for SchemaError {}

fn schema(field: &str, message: impl Into<String>) -> SchemaError {
    SchemaError {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug)]
pub enum RunError {
    Schema(SchemaError),
    Module(Error),
    Io(std::io::Error),
}

impl RunError {
    /// Process exit status: 2 for schema errors, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Schema(_) => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Schema(e) => e.fmt(f),
            RunError::Module(e) => write!(f, "error: {e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<SchemaError> for RunError {
    fn from(e: SchemaError) -> Self {
        RunError::Schema(e)
    }
}

impl<E: Into<Error>> From<E> for RunError {
    fn from(e: E) -> Self {
        RunError::Module(e.into())
    }
}

fn io(e: impl Into<std::io::Error>) -> RunError {
    RunError::Io(e.into())
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, SchemaError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    finish(serde_path_to_error::deserialize(de))
}

pub fn parse_scenario_value(v: Value) -> Result<Scenario, SchemaError> {
    finish(serde_path_to_error::deserialize(v))
}

fn finish<E: fmt::Display>(r: Result<Scenario, serde_path_to_error::Error<E>>) -> Result<Scenario, SchemaError> {
    let s = r.map_err(|e| schema(&e.path().to_string(), e.inner().to_string()))?;
    s.validate()?;
    Ok(s)
}

fn positive(field: &str, v: Option<f64>) -> Result<(), SchemaError> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(schema(field, format!("must be positive, got {x}"))),
        _ => Ok(()),
    }
}

impl Scenario {
    pub fn new(task: Task) -> Self {
        Scenario {
            task,
            spectrum: None,
            trajectory: None,
            set: None,
            n: None,
            period: None,
            eta: None,
            trials: None,
            seed: None,
            tol: None,
            epsilon: None,
            p: None,
            iters: None,
            samples: None,
            family: None,
            type_a: None,
            slope_b: None,
            radius: None,
            window: None,
        }
    }

    /// Task-specific required fields and numeric ranges.
    pub fn validate(&self) -> Result<(), SchemaError> {
        let need = |present: bool, field: &str| {
            if present {
                Ok(())
            } else {
                Err(schema(field, format!("missing field `{field}` required by task {}", self.task)))
            }
        };
        match self.task {
            Task::Decide => {
                need(self.spectrum.is_some(), "spectrum")?;
                need(self.trajectory.is_some(), "trajectory")?;
            }
            Task::Verify => {
                need(self.spectrum.is_some(), "spectrum")?;
                need(self.trajectory.is_some(), "trajectory")?;
                need(self.seed.is_some(), "seed")?;
            }
            Task::Density => need(self.set.is_some(), "set")?,
            Task::Uniqueness => {
                need(self.family.is_some(), "family")?;
                need(self.type_a.is_some(), "type_A")?;
                need(self.slope_b.is_some() || self.set.is_some(), "slope_B")?;
                if self.slope_b.is_some() && self.set.is_some() {
                    return Err(schema("set", "give either `slope_B` or `set`, not both"));
                }
                if self.family == Some(UniquenessFamily::DilatedCircles) {
                    need(self.seed.is_some(), "seed")?;
                }
            }
            Task::Emit => need(self.trajectory.is_some(), "trajectory")?,
        }
        if let Some(n) = self.n {
            if !(n >= 4 && n.is_power_of_two()) {
                return Err(schema("N", format!("must be a power of two ≥ 4, got {n}")));
            }
        }
        positive("L", self.period)?;
        positive("eta", self.eta)?;
        positive("tol", self.tol)?;
        positive("radius", self.radius)?;
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e < 1.0) {
                return Err(schema("epsilon", format!("must lie in (0, 1), got {e}")));
            }
        }
        if let Some(p) = self.p {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(schema("p", format!("must satisfy 1 ≤ p < ∞, got {p}")));
            }
        }
        if self.trials == Some(0) {
            return Err(schema("trials", "must be at least 1"));
        }
        if let Some(s) = self.samples {
            if s < uniqueness::MIN_SAMPLES {
                return Err(schema("samples", format!("must be at least {}", uniqueness::MIN_SAMPLES)));
            }
        }
        if let Some(a) = self.type_a {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(schema("type_A", format!("must be finite and ≥ 0, got {a}")));
            }
        }
        if let Some(Slope::Finite(b)) = self.slope_b {
            if !(b >= 0.0) {
                return Err(schema("slope_B", format!("must be ≥ 0, got {b}")));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> usize {
        self.n.unwrap_or(DEFAULT_N)
    }

    pub fn period(&self) -> f64 {
        self.period.unwrap_or(DEFAULT_PERIOD)
    }

    /// `L/N` unless given.
    pub fn eta(&self) -> f64 {
        self.eta.unwrap_or(self.period() / self.grid() as f64)
    }

    fn window(&self) -> BBox {
        self.window.unwrap_or_else(|| verify::torus_bbox(self.period()))
    }
}

/// Length conditions checked before a transfer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conditions {
    pub radius: f64,
    pub upper: UpperLength,
    pub lower: LowerLength,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transfer {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub conditions: Conditions,
    pub verdict: TransferVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecideReport {
    #[serde(flatten)]
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transfer: Option<Transfer>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub resolution: Resolution,
    pub mask_size: usize,
    /// Largest bicubic interpolation error bound over the mask.
    pub interpolation_budget: f64,
    /// Minimum ratios over random fields.
    pub random: ProbeReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversarial: Option<ProbeReport>,
    /// Probe of the explicit line witness, when one exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<ProbeReport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingValue {
    pub radius: f64,
    pub value: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityOutput {
    pub dim: u8,
    pub density: DensityReport,
    pub separation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counting: Option<CountingValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    #[serde(flatten)]
    pub verdict: UniquenessVerdict,
    /// Whether `B` was given or computed from `set`.
    pub slope_source: SlopeSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaEstimate>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeSource {
    Given,
    Set,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmittedFile {
    pub name: String,
    pub rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmitReport {
    pub eta: f64,
    pub window: BBox,
    pub files: Vec<EmittedFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum Report {
    Decide(DecideReport),
    Verify(VerifyReport),
    Density(DensityOutput),
    Uniqueness(UniquenessReport),
    Emit(EmitReport),
}

/// Runs a validated scenario. `out_dir` receives the CSV files of `emit`.
pub fn run(s: &Scenario, out_dir: &Path) -> Result<Report, RunError> {
    s.validate()?;
    Ok(match s.task {
        Task::Decide => Report::Decide(run_decide(s)?),
        Task::Verify => Report::Verify(run_verify(s)?),
        Task::Density => Report::Density(run_density(s)?),
        Task::Uniqueness => Report::Uniqueness(run_uniqueness(s)?),
        Task::Emit => Report::Emit(emit_plot_data(s, out_dir)?),
    })
}

// `validate` guarantees the presence of the fields unwrapped below.

fn run_decide(s: &Scenario) -> Result<DecideReport, RunError> {
    let (omega, p) = (s.spectrum.as_ref().unwrap(), s.trajectory.as_ref().unwrap());
    let opts = DecideOptions {
        tol: s.tol.unwrap_or(TOL_GEOM),
        windows: None,
    };
    let verdict = decide::decide(p, omega, &opts)?;
    let transfer = match s.epsilon {
        None => None,
        Some(eps) => {
            let radius = s.radius.unwrap_or(DEFAULT_CONDITION_RADIUS);
            let conditions = Conditions {
                radius,
                upper: p.check_upper_length_condition(radius)?,
                lower: p.check_local_lower_length(radius)?,
            };
            let tv = decide::transfer_to_paley_wiener(
                &verdict,
                omega,
                eps,
                conditions.lower.holds(),
                conditions.upper.holds(),
            )?;
            Some(Transfer {
                p: s.p,
                conditions,
                verdict: tv,
            })
        }
    };
    Ok(DecideReport { verdict, transfer })
}

fn run_verify(s: &Scenario) -> Result<VerifyReport, RunError> {
    let (omega, p) = (s.spectrum.as_ref().unwrap(), s.trajectory.as_ref().unwrap());
    let (n, period, eta, seed) = (s.grid(), s.period(), s.eta(), s.seed.unwrap());
    let mask = verify::spectrum_mask(omega, period, n)?;
    let budget = mask
        .iter()
        .map(|k| verify::interpolation_budget(*k, period, n))
        .fold(0.0, f64::max);
    let random = verify::estimate_lower_frame_ratio(omega, p, s.trials.unwrap_or(DEFAULT_TRIALS), n, period, eta, seed)?;
    let adversarial = match s.iters.unwrap_or(0) {
        0 => None,
        it => Some(verify::adversarial_minimize(omega, p, n, period, eta, it, seed)?),
    };
    let witness = match p.family_name() {
        "parallel_lines" => match verify::witness_lines(omega, n, period) {
            Ok(f) => Some(verify::probe(p, &f, eta)?),
            Err(_) => None,
        },
        _ => None,
    };
    Ok(VerifyReport {
        resolution: Resolution { n, period, eta },
        mask_size: mask.len(),
        interpolation_budget: budget,
        random,
        adversarial,
        witness,
    })
}

fn run_density(s: &Scenario) -> Result<DensityOutput, RunError> {
    let set = s.set.as_ref().unwrap();
    let density = density::lower_uniform_density(set, &density::default_windows(set))?;
    let counting = match s.radius {
        Some(t) => Some(CountingValue {
            radius: t,
            value: density::counting(set, t)?,
        }),
        None => None,
    };
    Ok(DensityOutput {
        dim: set.dim(),
        density,
        separation: density::separation(set)?,
        counting,
    })
}

fn run_uniqueness(s: &Scenario) -> Result<UniquenessReport, RunError> {
    let family = s.family.unwrap();
    let (slope, slope_source) = match (&s.slope_b, &s.set) {
        (Some(b), _) => (*b, SlopeSource::Given),
        (None, Some(set)) => (
            density::liminf_slope(set, &density::default_slope_schedule(set))?,
            SlopeSource::Set,
        ),
        (None, None) => unreachable!("validated"),
    };
    let q = UniquenessQuery::new(family, s.type_a.unwrap(), slope)?;
    let alpha = match family {
        UniquenessFamily::DilatedCircles => Some(uniqueness::estimate_alpha(
            s.samples.unwrap_or(DEFAULT_SAMPLES),
            s.seed.unwrap(),
        )?),
        _ => None,
    };
    let verdict = uniqueness::threshold(&q, alpha.as_ref())?;
    Ok(UniquenessReport {
        verdict,
        slope_source,
        alpha,
    })
}

/// Writes plot data to `dir`:
///
/// - `trajectory.csv`: `x,y,component_id,arclength_param`, one row per
///   discretized path sample inside the window;
/// - `spectrum.csv`, `difference.csv`: `x,y` outlines of `Ω` and `Ω−Ω`;
/// - `profile.csv`: `component_id,arclength_param,magnitude`, the modulus of
///   the seeded random field at each path sample (needs `spectrum` and `seed`).
pub fn emit_plot_data(s: &Scenario, dir: &Path) -> Result<EmitReport, RunError> {
    let p = s.trajectory.as_ref().unwrap();
    let (eta, window) = (s.eta(), s.window());
    let samples = p.discretize(eta, &window)?;
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut files = Vec::new();

    let mut w = csv_writer(dir, TRAJECTORY_CSV)?;
    w.write_record(["x", "y", "component_id", "arclength_param"]).map_err(io)?;
    for q in &samples {
        w.write_record([
            fmt_num(q.point.x),
            fmt_num(q.point.y),
            q.component.to_string(),
            fmt_num(q.arclength),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(io)?;
    files.push(EmittedFile {
        name: TRAJECTORY_CSV.into(),
        rows: samples.len(),
    });

    if let Some(omega) = &s.spectrum {
        for (name, body) in [(SPECTRUM_CSV, omega.clone()), (DIFFERENCE_CSV, omega.minkowski_self_difference())] {
            let pts = body.outline(OUTLINE_DISK_POINTS);
            let mut w = csv_writer(dir, name)?;
            w.write_record(["x", "y"]).map_err(io)?;
            for v in &pts {
                w.write_record([fmt_num(v.x), fmt_num(v.y)]).map_err(io)?;
            }
            w.flush().map_err(io)?;
            files.push(EmittedFile {
                name: name.into(),
                rows: pts.len(),
            });
        }
        if let Some(seed) = s.seed {
            let f = verify::synth_random(omega, s.grid(), s.period(), seed)?;
            let mut w = csv_writer(dir, PROFILE_CSV)?;
            w.write_record(["component_id", "arclength_param", "magnitude"]).map_err(io)?;
            for q in &samples {
                w.write_record([
                    q.component.to_string(),
                    fmt_num(q.arclength),
                    fmt_num(f.interpolate(q.point).norm()),
                ])
                .map_err(io)?;
            }
            w.flush().map_err(io)?;
            files.push(EmittedFile {
                name: PROFILE_CSV.into(),
                rows: samples.len(),
            });
        }
    }
    Ok(EmitReport { eta, window, files })
}

fn csv_writer(dir: &Path, name: &str) -> Result<csv::Writer<std::fs::File>, RunError> {
    let path: PathBuf = dir.join(name);
    csv::Writer::from_path(path).map_err(io)
}

/// Rounds to [`SIG_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Shortest decimal form of `round_sig(x)`.
pub fn fmt_num(x: f64) -> String {
    format!("{}", round_sig(x))
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round_sig(x))) {
                *n = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(m) => m.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Serializes any report with floats rounded to [`SIG_DIGITS`] digits.
pub fn to_json<T: Serialize>(r: &T) -> String {
    let mut v = serde_json::to_value(r).expect("reports serialize to JSON");
    round_value(&mut v);
    v.to_string()
}
