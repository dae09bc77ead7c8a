//! `cavity-filter` command-line front end.
//!
//! Subcommands `filter`, `evolve`, `sweep-q` and `widths`. Every option can
//! be given as a flag or in a JSON file passed with `--config`; flags win.
//! Outputs are CSV (17 significant digits, `#` comment header) or JSON and
//! embed the merged configuration, so any output can be regenerated by
//! feeding its `config` record back through `--config`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::analysis::{self, linspace, FilterApprox, SweepTable, DEFAULT_GRID_POINTS};
use crate::error::{Error, Result};
use crate::field::PhotonDistribution;
use crate::filtering::{
    apply_sequence, required_families, AtomInjectionCase, FilterTable, FilteredState,
    MeasurementSequence,
};
use crate::propagator::{
    lz_lower_filter_numeric, numeric_transfer_matrix, propagate_family, FamilyAmplitudes,
    IntegrationConfig, LzReadout,
};
use crate::pulses::{case_a_filter, DKParams, PulseModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "cavity-filter",
    version,
    about = "Photon-number filtering by swept two-level atoms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter-function tables, or the distribution left by a recorded sequence.
    Filter(RunArgs),
    /// Integrate each photon family and compare with the closed-form filter.
    Evolve(RunArgs),
    /// Mandel Q against peak coupling g0.
    SweepQ(RunArgs),
    /// Sharpening or low-pass widths against atom number.
    Widths(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Filter(_) => "filter",
            Command::Evolve(_) => "evolve",
            Command::SweepQ(_) => "sweep-q",
            Command::Widths(_) => "widths",
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Filter(a) | Command::Evolve(a) | Command::SweepQ(a) | Command::Widths(a) => a,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Coherent,
    Thermal,
    Fock,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum WidthKind {
    Sharpening,
    Lowpass,
}

/// Flags shared by all subcommands. Unset flags fall back to the config
/// file, then to per-command defaults.
#[derive(Clone, Debug, Default, Args)]
pub struct RunArgs {
    /// Pulse model: lz, dk or tabulated (tabulated needs --config).
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub g0: Option<f64>,
    #[arg(long = "A0")]
    pub a0: Option<f64>,
    #[arg(long = "T")]
    pub t: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Initial-state parameter: mean photon number (photon number for fock).
    #[arg(long)]
    pub nbar: Option<f64>,
    /// Initial state kind.
    #[arg(long, value_enum)]
    pub state: Option<StateKind>,
    /// Recorded outcomes, e.g. "--+-" or "m25".
    #[arg(long, allow_hyphen_values = true)]
    pub sequence: Option<String>,
    /// Atom counts, comma separated. For `widths` a single value M means 1..=M.
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<u32>>,
    /// Injection level: a (lower) or b (upper).
    #[arg(long)]
    pub case: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sweep grid start:stop:count.
    #[arg(long)]
    pub grid: Option<String>,
    /// Integration half-window in units of T (Demkov-Kunike) or the endpoint
    /// sweep phase lambda*tau^2 (Landau-Zener).
    #[arg(long)]
    pub window: Option<f64>,
    /// Largest photon number / family in tables.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Width analysis for `widths`.
    #[arg(long, value_enum)]
    pub kind: Option<WidthKind>,
    /// Use the non-adiabatic cos^2 filter instead of the exact one.
    #[arg(long)]
    pub approx: bool,
    /// Landau-Zener finite-window readout for `evolve`.
    #[arg(long, value_enum)]
    pub lz_readout: Option<LzReadoutArg>,
    /// Relative tolerance of the integrator.
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LzReadoutArg {
    Raw,
    AverageEnd,
    AverageBoth,
}

impl From<LzReadoutArg> for LzReadout {
    fn from(a: LzReadoutArg) -> Self {
        match a {
            LzReadoutArg::Raw => LzReadout::Raw,
            LzReadoutArg::AverageEnd => LzReadout::AverageEnd,
            LzReadoutArg::AverageBoth => LzReadout::AverageBoth,
        }
    }
}

/// Initial cavity state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    pub kind: StateKind,
    pub parameter: f64,
}

impl StateSpec {
    pub fn build(&self) -> Result<PhotonDistribution> {
        match self.kind {
            StateKind::Coherent => PhotonDistribution::coherent(self.parameter, None),
            StateKind::Thermal => PhotonDistribution::thermal(self.parameter),
            StateKind::Fock => {
                if self.parameter < 0.0 || self.parameter.fract() != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "fock state needs a whole photon number (got {})",
                        self.parameter
                    )));
                }
                Ok(PhotonDistribution::fock(self.parameter as usize))
            }
        }
    }
}

/// Sweep grid `start:stop:count`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.count)
    }
}

impl FromStr for Grid {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Parse(format!("grid `{s}` is not start:stop[:count]"));
        let (start, stop, count) = match parts.as_slice() {
            [a, b] => (a, b, None),
            [a, b, c] => (a, b, Some(c)),
            _ => return Err(bad()),
        };
        let start: f64 = start.trim().parse().map_err(|_| bad())?;
        let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
        let count = match count {
            Some(c) => c.trim().parse().map_err(|_| bad())?,
            None => DEFAULT_GRID_POINTS,
        };
        if !(start.is_finite() && stop.is_finite() && start <= stop) || count == 0 {
            return Err(Error::InvalidParameter(format!(
                "grid `{s}` needs start <= stop and count >= 1"
            )));
        }
        Ok(Self { start, stop, count })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

/// Everything a run needs, as read from `--config` and merged with flags.
/// This is also the record embedded in every output.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    /// Pulse model in its JSON form (`type`, `g0`, `lambda` | `A0`, `T` | `samples`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Map<String, Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<WidthKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approx: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lz_readout: Option<LzReadout>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

fn model_type(flag: &str) -> Result<&'static str> {
    match flag.trim().to_ascii_lowercase().as_str() {
        "lz" | "landau-zener" => Ok("landau-zener"),
        "dk" | "demkov-kunike" => Ok("demkov-kunike"),
        "tabulated" => Ok("tabulated"),
        other => Err(Error::InvalidParameter(format!(
            "unknown model `{other}` (expected lz, dk or tabulated)"
        ))),
    }
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    /// Overlays `args` (flags win) on `self`.
    pub fn merge_flags(mut self, command: &str, args: &RunArgs) -> Result<Self> {
        if let Some(c) = &self.command {
            if c != command {
                return Err(Error::InvalidParameter(format!(
                    "config is for `{c}`, not `{command}`"
                )));
            }
        }
        self.command = Some(command.to_string());

        let mut model = self.model.take().unwrap_or_default();
        if let Some(m) = &args.model {
            let ty = model_type(m)?;
            if model.get("type").and_then(Value::as_str) != Some(ty) {
                model.clear();
            }
            model.insert("type".into(), Value::from(ty));
        }
        for (key, val) in [
            ("g0", args.g0),
            ("A0", args.a0),
            ("T", args.t),
            ("lambda", args.lambda),
        ] {
            if let Some(v) = val {
                model.insert(key.into(), Value::from(v));
            }
        }
        self.model = (!model.is_empty()).then_some(model);

        if args.state.is_some() || args.nbar.is_some() {
            let kind = args
                .state
                .or(self.state.map(|s| s.kind))
                .unwrap_or(StateKind::Coherent);
            let parameter = args
                .nbar
                .or(self.state.map(|s| s.parameter))
                .ok_or_else(|| {
                    Error::InvalidParameter(
                        "--state needs --nbar (mean or exact photon number)".into(),
                    )
                })?;
            self.state = Some(StateSpec { kind, parameter });
        }
        macro_rules! overlay {
            ($($field:ident),*) => { $( if args.$field.is_some() { self.$field = args.$field.clone(); } )* };
        }
        overlay!(sequence, m, case, grid, window, n_max, kind, rel_tol, out, format);
        if args.approx {
            self.approx = Some(true);
        }
        if let Some(r) = args.lz_readout {
            self.lz_readout = Some(r.into());
        }
        Ok(self)
    }

    pub fn pulse_model(&self) -> Result<Option<PulseModel>> {
        self.model
            .as_ref()
            .map(|m| {
                serde_json::from_value(Value::Object(m.clone()))
                    .map_err(|e| Error::InvalidParameter(format!("model: {e}")))
            })
            .transpose()
    }

    fn require_model(&self) -> Result<PulseModel> {
        self.pulse_model()?
            .ok_or_else(|| Error::InvalidParameter("a pulse model is required (--model)".into()))
    }

    fn require_dk(&self) -> Result<DKParams> {
        match self.require_model()? {
            PulseModel::DemkovKunike(p) => Ok(p),
            other => Err(Error::InvalidParameter(format!(
                "this command needs the dk model, not {}",
                other.name()
            ))),
        }
    }

    fn initial_state(&self) -> Result<Option<PhotonDistribution>> {
        self.state.map(|s| s.build()).transpose()
    }

    fn injection_case(&self) -> Result<AtomInjectionCase> {
        self.case
            .as_deref()
            .map(str::parse)
            .transpose()
            .map(Option::unwrap_or_default)
    }

    fn atom_counts(&self, default: &[u32]) -> Vec<u32> {
        self.m.clone().unwrap_or_else(|| default.to_vec())
    }

    fn grid(&self) -> Result<Option<Grid>> {
        self.grid.as_deref().map(str::parse).transpose()
    }

    fn rel_tol(&self) -> Result<f64> {
        let r = self.rel_tol.unwrap_or(IntegrationConfig::DEFAULT_REL_TOL);
        if r > 0.0 && r < 1.0 {
            Ok(r)
        } else {
            Err(Error::InvalidParameter(format!(
                "rel_tol must lie in (0, 1) (got {r})"
            )))
        }
    }

    /// Copy for embedding in outputs: the output location is not part of
    /// the record, so re-running to another path reproduces the same bytes.
    fn record(&self) -> RunConfig {
        RunConfig {
            out: None,
            ..self.clone()
        }
    }
}

/// Payload of a run.
#[derive(Clone, Debug, PartialEq)]
pub enum OutputBody {
    Table(SweepTable),
    State(FilteredState),
}

/// Result of a subcommand, ready to render.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub config: RunConfig,
    pub body: OutputBody,
    /// Per-item numeric failures that did not abort the run.
    pub failures: Vec<String>,
}

#[derive(Serialize)]
struct JsonOutput<'a> {
    version: &'static str,
    config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    table: Option<&'a SweepTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<JsonState<'a>>,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    failures: &'a [String],
}

#[derive(Serialize)]
struct JsonState<'a> {
    steps: usize,
    log_success_prob: f64,
    distribution: &'a PhotonDistribution,
}

impl RunOutput {
    pub fn render(&self, format: Format) -> String {
        let record = self.config.record();
        match format {
            Format::Csv => {
                let config = serde_json::to_string(&record).expect("config serializes");
                match &self.body {
                    OutputBody::Table(t) => {
                        let mut t = t.clone();
                        let mut fixed = vec![("config".to_string(), config)];
                        fixed.extend(
                            self.failures
                                .iter()
                                .map(|f| ("failure".to_string(), f.clone())),
                        );
                        fixed.append(&mut t.fixed);
                        t.fixed = fixed;
                        t.to_csv()
                    }
                    OutputBody::State(s) => {
                        format!(
                            "# cavity-filter {}\n# config = {config}\n{}",
                            crate::VERSION,
                            s.to_csv()
                        )
                    }
                }
            }
            Format::Json => {
                let (table, state) = match &self.body {
                    OutputBody::Table(t) => (Some(t), None),
                    OutputBody::State(s) => (
                        None,
                        Some(JsonState {
                            steps: s.steps,
                            log_success_prob: s.log_success_prob,
                            distribution: &s.dist,
                        }),
                    ),
                };
                let doc = JsonOutput {
                    version: crate::VERSION,
                    config: record,
                    table,
                    state,
                    failures: &self.failures,
                };
                let mut s = serde_json::to_string_pretty(&doc).expect("output serializes");
                s.push('\n');
                s
            }
        }
    }
}

/// `filter`: with `--sequence`, the distribution after the recorded
/// outcomes; otherwise a table over `n` of `|a-(n)|^{2m}` and
/// `prod_{k=1..m} |a+(n+k)|^2` for each `m`, plus all-lower-level
/// distributions when an initial state is given.
pub fn cmd_filter(cfg: &RunConfig) -> Result<RunOutput> {
    let model = cfg.require_model()?;
    let state = cfg.initial_state()?;
    let table_for = |max_family: usize| -> Result<FilterTable> {
        match (&model, cfg.approx.unwrap_or(false)) {
            (PulseModel::DemkovKunike(p), true) => Ok(FilterTable::dk_non_adiabatic(p, max_family)),
            (PulseModel::Tabulated(_), _) => {
                FilterTable::numeric(&model, max_family, &integration_config(cfg, &model)?)
            }
            _ => FilterTable::for_model(&model, max_family),
        }
    };

    if let Some(seq) = &cfg.sequence {
        let seq: MeasurementSequence = seq.parse()?;
        let initial = state.ok_or_else(|| {
            Error::InvalidParameter("--sequence needs an initial state (--nbar)".into())
        })?;
        let case = cfg.injection_case()?;
        let table = table_for(required_families(&initial, &seq, case))?;
        let out = apply_sequence(&initial, &table, &seq, case)?;
        return Ok(RunOutput {
            config: cfg.clone(),
            body: OutputBody::State(out),
            failures: vec![],
        });
    }

    let ms = cfg.atom_counts(&[1]);
    if ms.is_empty() {
        return Err(Error::InvalidParameter(
            "--m needs at least one atom count".into(),
        ));
    }
    let n_max = cfg
        .n_max
        .or(state.as_ref().map(PhotonDistribution::n_max))
        .unwrap_or(60);
    let max_m = *ms.iter().max().unwrap() as usize;
    let table = table_for(n_max + max_m)?;
    let axis: Vec<f64> = (0..=n_max).map(|n| n as f64).collect();
    let mut t = SweepTable::new("n", axis);
    for &m in &ms {
        t.push_column(
            format!("lower_m{m}"),
            (0..=n_max).map(|n| table.lower_power(n, m)).collect(),
        )?;
    }
    for &m in &ms {
        t.push_column(
            format!("upper_m{m}"),
            (0..=n_max)
                .map(|n| table.upper_product(n, m as usize))
                .collect(),
        )?;
    }
    if let Some(initial) = &state {
        let pad = |d: &PhotonDistribution| -> Vec<f64> {
            (0..=n_max)
                .map(|n| d.probs().get(n).copied().unwrap_or(0.0))
                .collect()
        };
        t.push_column("p_initial", pad(initial))?;
        for &m in &ms {
            let out = apply_sequence(
                initial,
                &table,
                &MeasurementSequence::all_minus(m as usize),
                AtomInjectionCase::CaseA,
            )?;
            t.push_column(format!("p_m{m}"), pad(&out.dist))?;
        }
    }
    t.fix("model", model.name());
    Ok(RunOutput {
        config: cfg.clone(),
        body: OutputBody::Table(t),
        failures: vec![],
    })
}

fn integration_config(cfg: &RunConfig, model: &PulseModel) -> Result<IntegrationConfig> {
    let base = match (model, cfg.window) {
        (PulseModel::DemkovKunike(p), Some(w)) => IntegrationConfig::symmetric(w * p.t())?,
        (PulseModel::LandauZener(p), Some(w)) => IntegrationConfig::lz_window(p, w)?,
        _ => IntegrationConfig::for_model(model)?,
    };
    base.with_tolerances(cfg.rel_tol()?, IntegrationConfig::DEFAULT_ABS_TOL)
}

/// Acceptance threshold for `|numeric - closed form|` in `evolve`.
pub fn evolve_tolerance(model: &PulseModel) -> f64 {
    match model {
        PulseModel::LandauZener(_) => 5e-3,
        _ => 1e-6,
    }
}

/// `evolve`: integrates families `1..=n_max` (default 30) and tabulates the
/// numeric case-A lower-level population against the closed form.
#[allow(clippy::type_complexity)]
pub fn cmd_evolve(cfg: &RunConfig) -> Result<RunOutput> {
    let model = cfg.require_model()?;
    let icfg = integration_config(cfg, &model)?;
    let n_max = cfg.n_max.unwrap_or(30);
    if n_max == 0 {
        return Err(Error::InvalidParameter("--n-max must be >= 1".into()));
    }
    let readout = cfg.lz_readout.unwrap_or(LzReadout::AverageBoth);
    let tol = evolve_tolerance(&model);

    // (family, Ok((lower, transfer w, phase)))
    let rows: Vec<(u64, Result<(f64, f64, f64)>)> = (1..=n_max as u64)
        .into_par_iter()
        .map(|n| {
            let r = (|| {
                let lower = match &model {
                    PulseModel::LandauZener(p) => lz_lower_filter_numeric(n, p, &icfg, readout)?,
                    _ => propagate_family(n, &model, FamilyAmplitudes::CASE_A, &icfg)?.lower(),
                };
                let tm = numeric_transfer_matrix(n, &model, &icfg)?;
                Ok((lower, tm.w, tm.phi))
            })();
            (n, r)
        })
        .collect();

    let mut failures = Vec::new();
    let (mut numeric, mut analytic, mut err, mut running, mut flagged, mut w, mut phi, mut failed) = (
        vec![],
        vec![],
        vec![],
        vec![],
        vec![],
        vec![],
        vec![],
        vec![],
    );
    let mut max_err = 0.0f64;
    for (n, r) in &rows {
        let exact = if model.is_analytic() {
            case_a_filter(*n, &model)?.0
        } else {
            f64::NAN
        };
        match r {
            Ok((lower, wn, ph)) => {
                let e = (lower - exact).abs();
                if e.is_finite() {
                    max_err = max_err.max(e);
                }
                numeric.push(*lower);
                err.push(e);
                flagged.push(if e > tol { 1.0 } else { 0.0 });
                w.push(*wn);
                phi.push(*ph);
                failed.push(0.0);
            }
            Err(e) => {
                failures.push(format!("n={n}: {e}"));
                numeric.push(f64::NAN);
                err.push(f64::NAN);
                flagged.push(1.0);
                w.push(f64::NAN);
                phi.push(f64::NAN);
                failed.push(1.0);
            }
        }
        analytic.push(exact);
        running.push(if model.is_analytic() {
            max_err
        } else {
            f64::NAN
        });
    }
    let mut t = SweepTable::new("n", rows.iter().map(|(n, _)| *n as f64).collect());
    t.push_column("numeric_lower", numeric)?;
    t.push_column("analytic_lower", analytic)?;
    t.push_column("abs_error", err)?;
    t.push_column("max_abs_error", running)?;
    t.push_column("flagged", flagged)?;
    t.push_column("transfer_w", w)?;
    t.push_column("phase", phi)?;
    t.push_column("failed", failed)?;
    t.fix("model", model.name());
    t.fix("t_start", icfg.t_start);
    t.fix("t_end", icfg.t_end);
    t.fix("rel_tol", icfg.rel_tol);
    t.fix("abs_tol", icfg.abs_tol);
    if let PulseModel::LandauZener(_) = model {
        t.fix("lz_readout", format!("{readout:?}"));
    }
    t.fix("tolerance", tol);
    if model.is_analytic() {
        t.fix("max_abs_error", max_err);
    }
    Ok(RunOutput {
        config: cfg.clone(),
        body: OutputBody::Table(t),
        failures,
    })
}

/// `sweep-q`: Mandel Q after `m` (default 25) lower-level detections on a
/// coherent state, over a grid of `g0` (default `0.03:6:200`).
pub fn cmd_sweep_q(cfg: &RunConfig) -> Result<RunOutput> {
    let mut template = cfg.model.clone().unwrap_or_default();
    // g0 is swept; any placeholder satisfies validation
    template.entry("g0").or_insert(Value::from(1.0));
    let template = RunConfig {
        model: Some(template),
        ..cfg.clone()
    }
    .require_dk()?;
    let nbar = match cfg.state {
        Some(StateSpec {
            kind: StateKind::Coherent,
            parameter,
        }) => parameter,
        Some(_) => {
            return Err(Error::InvalidParameter(
                "sweep-q starts from a coherent state".into(),
            ))
        }
        None => return Err(Error::InvalidParameter("sweep-q needs --nbar".into())),
    };
    let m = match cfg.atom_counts(&[25]).as_slice() {
        [m] => *m,
        _ => {
            return Err(Error::InvalidParameter(
                "sweep-q takes a single atom count --m".into(),
            ))
        }
    };
    let grid = cfg.grid()?.unwrap_or(Grid {
        start: 0.03,
        stop: 6.0,
        count: DEFAULT_GRID_POINTS,
    });
    if grid.start <= 0.0 {
        return Err(Error::InvalidParameter("g0 grid must be > 0".into()));
    }
    let approx = if cfg.approx.unwrap_or(false) {
        FilterApprox::NonAdiabatic
    } else {
        FilterApprox::Exact
    };
    let mut t = analysis::q_sweep(nbar, m, &template, &grid.values(), approx)?;
    t.fix("grid", grid);
    Ok(RunOutput {
        config: cfg.clone(),
        body: OutputBody::Table(t),
        failures: vec![],
    })
}

/// `widths`: analytic against numeric width for each atom count. A single
/// `--m M` sweeps `1..=M`.
pub fn cmd_widths(cfg: &RunConfig) -> Result<RunOutput> {
    let params = cfg.require_dk()?;
    let ms = match cfg.atom_counts(&[25]).as_slice() {
        [m] => (1..=*m).collect::<Vec<_>>(),
        list => list.to_vec(),
    };
    if ms.is_empty() || ms.contains(&0) {
        return Err(Error::InvalidParameter(
            "widths needs atom counts m >= 1".into(),
        ));
    }
    let t = match cfg.kind.unwrap_or(WidthKind::Sharpening) {
        WidthKind::Sharpening => {
            let nbar = match cfg.state {
                Some(StateSpec {
                    kind: StateKind::Coherent,
                    parameter,
                }) => parameter,
                _ => {
                    return Err(Error::InvalidParameter(
                        "sharpening widths need a coherent --nbar".into(),
                    ))
                }
            };
            analysis::sharpening_sweep(nbar, &params, &ms)?
        }
        WidthKind::Lowpass => analysis::lowpass_sweep(&params, &ms)?,
    };
    Ok(RunOutput {
        config: cfg.clone(),
        body: OutputBody::Table(t),
        failures: vec![],
    })
}

/// Parses nothing; resolves the config of an already parsed command.
pub fn resolve(command: &Command) -> Result<RunConfig> {
    let args = command.args();
    let base = match &args.config {
        Some(path) => RunConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    base.merge_flags(command.name(), args)
}

pub fn execute(command: &Command, cfg: &RunConfig) -> Result<RunOutput> {
    match command {
        Command::Filter(_) => cmd_filter(cfg),
        Command::Evolve(_) => cmd_evolve(cfg),
        Command::SweepQ(_) => cmd_sweep_q(cfg),
        Command::Widths(_) => cmd_widths(cfg),
    }
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        e if e.is_numeric() => EXIT_NUMERIC,
        _ => EXIT_VALIDATION,
    }
}

/// Runs a parsed command end to end: resolve, execute, write. Returns the
/// process exit code; messages go to stderr.
pub fn run(cli: &Cli) -> i32 {
    let result = resolve(&cli.command).and_then(|cfg| {
        let out = execute(&cli.command, &cfg)?;
        let text = out.render(cfg.format.unwrap_or(Format::Csv));
        match &cfg.out {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(out.failures)
    });
    match result {
        Ok(failures) if failures.is_empty() => EXIT_OK,
        Ok(failures) => {
            for f in failures {
                eprintln!("numeric failure: {f}");
            }
            EXIT_NUMERIC
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
