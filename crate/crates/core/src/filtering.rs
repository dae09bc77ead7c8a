//! Measurement projections of the cavity field.
//!
//! An atom entering in the lower level (case A) and detected in the lower
//! level multiplies `p(n)` by `|a-(n)|^2`. Detected in the upper level, it
//! has absorbed a photon: `p'(n) ~ |a+(n+1)|^2 p(n+1)`. An atom entering in
//! the upper level (case B) swaps the two filters and, when detected in the
//! lower level, has emitted a photon: `p'(n+1) ~ |a+(n+1)|^2 p(n)`.
//!
//! Each projection is renormalized; the mass removed is the probability of
//! the recorded outcome. No phases are tracked: every atom is prepared in a
//! level eigenstate and projected onto one after leaving the cavity.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PhotonDistribution;
use crate::propagator::{propagate_family, FamilyAmplitudes, IntegrationConfig};
use crate::pulses::{case_a_filter, DKParams, PulseModel};

/// Detected atomic level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Minus,
    Plus,
}

/// Level in which each atom enters the cavity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AtomInjectionCase {
    /// Lower level.
    #[default]
    CaseA,
    /// Upper level.
    CaseB,
}

impl FromStr for AtomInjectionCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" | "case-a" | "lower" => Ok(Self::CaseA),
            "b" | "case-b" | "upper" => Ok(Self::CaseB),
            other => Err(Error::Parse(format!(
                "unknown injection case `{other}` (expected a or b)"
            ))),
        }
    }
}

/// Ordered record of detected outcomes.
///
/// Parses from a compact string: `+` for an upper-level detection, `-` (or
/// the Unicode minus `−`) for a lower-level one, and run-length tokens
/// `m<k>` / `p<k>` for `k` repeated outcomes. Whitespace and commas are
/// ignored, so `"m25"`, `"--+-"` and `"m2 + p3"` are all valid.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementSequence(pub Vec<Outcome>);

impl MeasurementSequence {
    pub fn all_minus(m: usize) -> Self {
        Self(vec![Outcome::Minus; m])
    }

    pub fn all_plus(m: usize) -> Self {
        Self(vec![Outcome::Plus; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self, outcome: Outcome) -> usize {
        self.0.iter().filter(|&&o| o == outcome).count()
    }
}

impl FromStr for MeasurementSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = Vec::new();
        let mut chars = s.chars().peekable();
        while let Some(c) = chars.next() {
            let outcome = match c {
                '+' => {
                    out.push(Outcome::Plus);
                    continue;
                }
                '-' | '\u{2212}' => {
                    out.push(Outcome::Minus);
                    continue;
                }
                c if c.is_whitespace() || c == ',' => continue,
                'm' | 'M' => Outcome::Minus,
                'p' | 'P' => Outcome::Plus,
                other => {
                    return Err(Error::Parse(format!(
                        "unexpected `{other}` in measurement sequence"
                    )))
                }
            };
            let mut digits = String::new();
            while let Some(d) = chars.peek().copied().filter(char::is_ascii_digit) {
                digits.push(d);
                chars.next();
            }
            let k: usize = digits
                .parse()
                .map_err(|_| Error::Parse(format!("`{c}` must be followed by a count")))?;
            out.extend(std::iter::repeat_n(outcome, k));
        }
        Ok(Self(out))
    }
}

impl fmt::Display for MeasurementSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.0 {
            f.write_str(match o {
                Outcome::Minus => "-",
                Outcome::Plus => "+",
            })?;
        }
        Ok(())
    }
}

/// Case-A filter functions `|a-(n)|^2`, `|a+(n)|^2` for families
/// `0..=max_family`, evaluated once and reused across a sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterTable {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl FilterTable {
    /// Builds from lower-level filter values indexed by family; index 0
    /// must be 1 (the uncoupled family).
    pub fn from_lower(lower: Vec<f64>) -> Result<Self> {
        if lower.first() != Some(&1.0) {
            return Err(Error::InvalidParameter(
                "family 0 must have lower filter 1".into(),
            ));
        }
        if let Some((n, f)) = lower
            .iter()
            .enumerate()
            .find(|(_, f)| !(0.0..=1.0).contains(*f))
        {
            return Err(Error::InvalidParameter(format!(
                "filter value {f} at family {n} outside [0, 1]"
            )));
        }
        let upper = lower.iter().map(|f| 1.0 - f).collect();
        Ok(Self { lower, upper })
    }

    /// Closed-form filters of an analytic model.
    pub fn for_model(model: &PulseModel, max_family: usize) -> Result<Self> {
        let lower = (0..=max_family as u64)
            .map(|n| case_a_filter(n, model).map(|(lo, _)| lo))
            .collect::<Result<Vec<_>>>()?;
        Self::from_lower(lower)
    }

    /// Non-adiabatic Demkov-Kunike limit `cos^2(pi T g0 sqrt(n))`, for
    /// comparison with the exact filter.
    pub fn dk_non_adiabatic(params: &DKParams, max_family: usize) -> Self {
        let k = std::f64::consts::PI * params.t() * params.g0();
        let lower = (0..=max_family)
            .map(|n| (k * (n as f64).sqrt()).cos().powi(2))
            .collect();
        Self::from_lower(lower).expect("cos^2 lies in [0, 1] and is 1 at n = 0")
    }

    /// Filters obtained by integrating every family with the propagator.
    /// Works for any model, including tabulated pulses.
    pub fn numeric(model: &PulseModel, max_family: usize, cfg: &IntegrationConfig) -> Result<Self> {
        let tail = (1..=max_family as u64)
            .into_par_iter()
            .map(|n| {
                propagate_family(n, model, FamilyAmplitudes::CASE_A, cfg)
                    .map(|y| y.lower().clamp(0.0, 1.0))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut lower = Vec::with_capacity(max_family + 1);
        lower.push(1.0);
        lower.extend(tail);
        Self::from_lower(lower)
    }

    pub fn max_family(&self) -> usize {
        self.lower.len() - 1
    }

    pub fn lower(&self, n: usize) -> f64 {
        self.lower[n]
    }

    pub fn upper(&self, n: usize) -> f64 {
        self.upper[n]
    }

    /// `|a-(n)|^{2m}`: the filter after `m` lower-level detections.
    pub fn lower_power(&self, n: usize, m: u32) -> f64 {
        self.lower[n].powi(m as i32)
    }

    /// `prod_{k=1..m} |a+(n+k)|^2`: the filter after `m` upper-level
    /// detections, indexed by the final photon number.
    pub fn upper_product(&self, n: usize, m: usize) -> f64 {
        (1..=m).map(|k| self.upper[n + k]).product()
    }

    fn require(&self, family: usize) -> Result<()> {
        if family > self.max_family() {
            return Err(Error::InvalidParameter(format!(
                "filter table covers families up to {}, need {family}",
                self.max_family()
            )));
        }
        Ok(())
    }
}

/// Field state after a recorded sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct FilteredState {
    pub dist: PhotonDistribution,
    /// Natural log of the probability of the recorded sequence.
    pub log_success_prob: f64,
    pub steps: usize,
}

#[derive(Serialize)]
struct FilteredHeader {
    steps: usize,
    log_success_prob: f64,
}

impl FilteredState {
    pub fn new(dist: PhotonDistribution) -> Self {
        Self {
            dist,
            log_success_prob: 0.0,
            steps: 0,
        }
    }

    pub fn success_prob(&self) -> f64 {
        self.log_success_prob.exp()
    }

    /// `{"steps": .., "log_success_prob": ..}`.
    pub fn header_json(&self) -> String {
        serde_json::to_string(&FilteredHeader {
            steps: self.steps,
            log_success_prob: self.log_success_prob,
        })
        .expect("header always serializes")
    }

    /// Distribution CSV preceded by a `# {json header}` comment line.
    pub fn to_csv(&self) -> String {
        format!("# {}\n{}", self.header_json(), self.dist.to_csv())
    }
}

const MIN_STEP_PROB: f64 = 1e-300;

fn project(
    dist: &PhotonDistribution,
    table: &FilterTable,
    outcome: Outcome,
    case: AtomInjectionCase,
    step: usize,
) -> Result<(PhotonDistribution, f64)> {
    let p = dist.probs();
    let n_max = dist.n_max();
    let probs: Vec<f64> = match (case, outcome) {
        (AtomInjectionCase::CaseA, Outcome::Minus) => {
            table.require(n_max)?;
            p.iter()
                .enumerate()
                .map(|(n, &pn)| table.lower(n) * pn)
                .collect()
        }
        (AtomInjectionCase::CaseA, Outcome::Plus) => {
            table.require(n_max)?;
            if n_max == 0 {
                return Err(Error::ImpossibleOutcome { step, prob: 0.0 });
            }
            (0..n_max).map(|n| table.upper(n + 1) * p[n + 1]).collect()
        }
        (AtomInjectionCase::CaseB, Outcome::Plus) => {
            table.require(n_max + 1)?;
            p.iter()
                .enumerate()
                .map(|(n, &pn)| table.lower(n + 1) * pn)
                .collect()
        }
        (AtomInjectionCase::CaseB, Outcome::Minus) => {
            table.require(n_max + 1)?;
            std::iter::once(0.0)
                .chain(p.iter().enumerate().map(|(n, &pn)| table.upper(n + 1) * pn))
                .collect()
        }
    };
    let mass: f64 = probs.iter().sum();
    if !(mass >= MIN_STEP_PROB) {
        return Err(Error::ImpossibleOutcome { step, prob: mass });
    }
    let tail = (dist.tail_mass_bound() / mass).min(1.0);
    let mut out = PhotonDistribution::from_probs(probs, tail)?;
    out.normalize();
    Ok((out, mass))
}

/// Projects `dist` on one detected outcome. Returns the renormalized
/// distribution and the probability of the outcome.
///
/// The table must cover family `n_max` (case A) or `n_max + 1` (case B).
pub fn apply_outcome(
    dist: &PhotonDistribution,
    table: &FilterTable,
    outcome: Outcome,
    case: AtomInjectionCase,
) -> Result<(PhotonDistribution, f64)> {
    project(dist, table, outcome, case, 0)
}

/// Applies a whole record, accumulating the log-probability of the
/// sequence.
pub fn apply_sequence(
    dist: &PhotonDistribution,
    table: &FilterTable,
    outcomes: &MeasurementSequence,
    case: AtomInjectionCase,
) -> Result<FilteredState> {
    outcomes
        .0
        .iter()
        .enumerate()
        .try_fold(FilteredState::new(dist.clone()), |state, (i, &o)| {
            let (dist, prob) = project(&state.dist, table, o, case, i)?;
            Ok(FilteredState {
                dist,
                log_success_prob: state.log_success_prob + prob.ln(),
                steps: state.steps + 1,
            })
        })
}

/// Largest family a sequence can touch when started from `dist`.
pub fn required_families(
    dist: &PhotonDistribution,
    outcomes: &MeasurementSequence,
    case: AtomInjectionCase,
) -> usize {
    match case {
        AtomInjectionCase::CaseA => dist.n_max(),
        AtomInjectionCase::CaseB => dist.n_max() + 1 + outcomes.count(Outcome::Minus),
    }
}

/// [`apply_sequence`] with a filter table built from an analytic model.
pub fn apply_sequence_model(
    dist: &PhotonDistribution,
    model: &PulseModel,
    outcomes: &MeasurementSequence,
    case: AtomInjectionCase,
) -> Result<FilteredState> {
    let table = FilterTable::for_model(model, required_families(dist, outcomes, case))?;
    apply_sequence(dist, &table, outcomes, case)
}

/// Landau-Zener, `m` lower-level detections on a coherent state: again
/// coherent, with mean `nbar exp(-v m)`.
pub fn lz_minus_closed_form(nbar: f64, v: f64, m: u32) -> Result<PhotonDistribution> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidParameter(format!("v must be > 0 (got {v})")));
    }
    PhotonDistribution::coherent(nbar * (-v * m as f64).exp(), None)
}

/// Landau-Zener mean photon number after one upper-level detection on a
/// coherent state:
/// `<n>+ = nbar [1 - exp(nbar(e^-v - 1) - v)] / [1 - exp(nbar(e^-v - 1))] - 1`.
pub fn lz_upper_mean(nbar: f64, v: f64) -> Result<f64> {
    if !(nbar.is_finite() && nbar > 0.0 && v.is_finite() && v > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need nbar > 0 and v > 0 (got {nbar}, {v})"
        )));
    }
    let x = nbar * (-v).exp_m1();
    Ok(nbar * (-(x - v).exp_m1()) / (-x.exp_m1()) - 1.0)
}
