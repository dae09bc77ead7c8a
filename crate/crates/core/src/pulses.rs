//! Time-dependent Jaynes-Cummings parameters and their exact asymptotic
//! filters.
//!
//! A pulse is the pair `(delta_omega(t), g(t))` entering the family
//! Hamiltonian `[[dw/2, g sqrt(n)], [g sqrt(n), -dw/2]]`. Two sweeps have
//! closed-form scattering data:
//!
//! * Landau-Zener: `g = g0`, `dw = 2 lambda t`.
//! * Demkov-Kunike: `g = g0 sech(t/T)`, `dw = 2 A0 tanh(t/T)`.
//!
//! Anything else goes through [`PulseModel::Tabulated`] and the
//! [`propagator`](crate::propagator).

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{cosh_ratio, sech};

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite and > 0 (got {x})"
        )))
    }
}

/// Landau-Zener sweep: constant coupling, linear detuning chirp.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LzRaw")]
pub struct LZParams {
    g0: f64,
    lambda: f64,
}

#[derive(Deserialize)]
struct LzRaw {
    g0: f64,
    lambda: f64,
}

impl TryFrom<LzRaw> for LZParams {
    type Error = Error;
    fn try_from(raw: LzRaw) -> Result<Self> {
        LZParams::new(raw.g0, raw.lambda)
    }
}

impl LZParams {
    pub fn new(g0: f64, lambda: f64) -> Result<Self> {
        check_positive("g0", g0)?;
        check_positive("lambda", lambda)?;
        Ok(Self { g0, lambda })
    }

    /// Parameters with the given adiabaticity exponent `v = pi g0^2 / lambda`
    /// at sweep rate `lambda`.
    pub fn from_v(v: f64, lambda: f64) -> Result<Self> {
        check_positive("v", v)?;
        check_positive("lambda", lambda)?;
        Self::new((v * lambda / PI).sqrt(), lambda)
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `v = pi g0^2 / lambda`.
    pub fn v(&self) -> f64 {
        PI * self.g0 * self.g0 / self.lambda
    }
}

/// Demkov-Kunike sweep: sech-shaped coupling, tanh-shaped detuning.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DkRaw")]
pub struct DKParams {
    g0: f64,
    #[serde(rename = "A0")]
    a0: f64,
    #[serde(rename = "T")]
    t: f64,
}

#[derive(Deserialize)]
struct DkRaw {
    g0: f64,
    #[serde(rename = "A0")]
    a0: f64,
    #[serde(rename = "T")]
    t: f64,
}

impl TryFrom<DkRaw> for DKParams {
    type Error = Error;
    fn try_from(raw: DkRaw) -> Result<Self> {
        DKParams::new(raw.g0, raw.a0, raw.t)
    }
}

impl DKParams {
    /// `A0 = 0` is allowed and gives the resonant sech pulse.
    pub fn new(g0: f64, a0: f64, t: f64) -> Result<Self> {
        check_positive("g0", g0)?;
        check_positive("T", t)?;
        if !(a0.is_finite() && a0 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "A0 must be finite and >= 0 (got {a0})"
            )));
        }
        Ok(Self { g0, a0, t })
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Adiabaticity `A0 T`.
    pub fn adiabaticity(&self) -> f64 {
        self.a0 * self.t
    }

    /// Same pulse with a different peak coupling.
    pub fn with_g0(&self, g0: f64) -> Result<Self> {
        Self::new(g0, self.a0, self.t)
    }
}

/// One sample of a tabulated pulse.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSample {
    pub t: f64,
    pub delta_omega: f64,
    pub g: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    #[default]
    Linear,
}

/// Sampled `(delta_omega(t), g(t))`, linearly interpolated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TabulatedRaw")]
pub struct TabulatedPulse {
    samples: Vec<PulseSample>,
    #[serde(default)]
    interpolation: Interpolation,
}

#[derive(Deserialize)]
struct TabulatedRaw {
    samples: Vec<PulseSample>,
    #[serde(default)]
    interpolation: Interpolation,
}

impl TryFrom<TabulatedRaw> for TabulatedPulse {
    type Error = Error;
    fn try_from(raw: TabulatedRaw) -> Result<Self> {
        let mut p = TabulatedPulse::new(raw.samples)?;
        p.interpolation = raw.interpolation;
        Ok(p)
    }
}

impl TabulatedPulse {
    /// Samples must be finite, strictly increasing in `t`, with `g >= 0`.
    pub fn new(samples: Vec<PulseSample>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidParameter(
                "a tabulated pulse needs at least two samples".into(),
            ));
        }
        for s in &samples {
            if !(s.t.is_finite() && s.delta_omega.is_finite() && s.g.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "non-finite sample at t = {}",
                    s.t
                )));
            }
            if s.g < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "negative coupling at t = {}",
                    s.t
                )));
            }
        }
        if samples.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::InvalidParameter(
                "sample times must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            samples,
            interpolation: Interpolation::Linear,
        })
    }

    /// Samples `f(t) -> (delta_omega, g)` on `count` evenly spaced points.
    pub fn from_fn(
        start: f64,
        end: f64,
        count: usize,
        f: impl Fn(f64) -> (f64, f64),
    ) -> Result<Self> {
        if count < 2 || !(start < end) {
            return Err(Error::InvalidParameter(
                "need start < end and at least two samples".into(),
            ));
        }
        let step = (end - start) / (count - 1) as f64;
        let samples = (0..count)
            .map(|i| {
                let t = if i + 1 == count {
                    end
                } else {
                    start + step * i as f64
                };
                let (delta_omega, g) = f(t);
                PulseSample { t, delta_omega, g }
            })
            .collect();
        Self::new(samples)
    }

    pub fn samples(&self) -> &[PulseSample] {
        &self.samples
    }

    pub fn window(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }

    fn sample(&self, t: f64) -> Result<(f64, f64)> {
        let (start, end) = self.window();
        if !(t >= start && t <= end) {
            return Err(Error::OutOfWindow { t, start, end });
        }
        Ok(self.sample_clamped(t))
    }

    /// Linear interpolation with `t` clamped into the sampled window.
    pub(crate) fn sample_clamped(&self, t: f64) -> (f64, f64) {
        let (start, end) = self.window();
        let t = t.clamp(start, end);
        // index of the first sample with time > t
        let hi = self
            .samples
            .partition_point(|s| s.t <= t)
            .min(self.samples.len() - 1);
        let (a, b) = (&self.samples[hi - 1], &self.samples[hi]);
        let u = (t - a.t) / (b.t - a.t);
        (
            a.delta_omega + u * (b.delta_omega - a.delta_omega),
            a.g + u * (b.g - a.g),
        )
    }
}

/// The pulse applied to every atom of a sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum PulseModel {
    LandauZener(LZParams),
    DemkovKunike(DKParams),
    Tabulated(TabulatedPulse),
}

impl PulseModel {
    pub fn name(&self) -> &'static str {
        match self {
            PulseModel::LandauZener(_) => "landau-zener",
            PulseModel::DemkovKunike(_) => "demkov-kunike",
            PulseModel::Tabulated(_) => "tabulated",
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("pulse models always serialize")
    }

    /// True when [`case_a_filter`] has a closed form for this model.
    pub fn is_analytic(&self) -> bool {
        !matches!(self, PulseModel::Tabulated(_))
    }
}

/// Asymptotic two-level scattering data of one family.
///
/// `w` is the probability of leaving the entry level (case-(a) transfer
/// `|a+|^2`), `phi` the phase of the off-diagonal element relative to the
/// diagonal one. The implied matrix
/// `[[sqrt(1-w), e^{-i phi} sqrt(w)], [-e^{i phi} sqrt(w), sqrt(1-w)]]`
/// is unitary for any valid `(w, phi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub w: f64,
    pub phi: f64,
}

impl TransferMatrix {
    pub fn new(w: f64, phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidParameter(format!(
                "transfer probability {w} outside [0, 1]"
            )));
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParameter("phase must be finite".into()));
        }
        Ok(Self {
            w,
            phi: phi.rem_euclid(2.0 * PI),
        })
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        let d = C64::new((1.0 - self.w).sqrt(), 0.0);
        let o = self.w.sqrt();
        [
            [d, C64::from_polar(o, -self.phi)],
            [-C64::from_polar(o, self.phi), d],
        ]
    }
}

/// Landau-Zener diagonal weight `exp(-v n)`: the probability that an atom
/// leaves family `n` in the level it entered.
pub fn lz_transfer_prob(n: u64, params: &LZParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::ZeroFamily);
    }
    Ok((-params.v() * n as f64).exp())
}

/// Demkov-Kunike lower-level filter `|a-(n)|^2` for an atom entering in the
/// lower level.
///
/// Oscillatory `cos^2(pi T sqrt(g0^2 n - A0^2)) sech^2(pi T A0)` above the
/// branch point `g0^2 n = A0^2`, hyperbolic
/// `cosh^2(pi T sqrt(A0^2 - g0^2 n)) / cosh^2(pi T A0)` below it.
pub fn dk_lower_filter(n: u64, params: &DKParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::ZeroFamily);
    }
    Ok(dk_lower_filter_real(n as f64, params))
}

/// [`dk_lower_filter`] for real-valued `n >= 0`.
pub(crate) fn dk_lower_filter_real(n: f64, p: &DKParams) -> f64 {
    let pt = PI * p.t;
    let d = p.g0 * p.g0 * n - p.a0 * p.a0;
    if d >= 0.0 {
        let c = (pt * d.sqrt()).cos();
        let s = sech(pt * p.a0);
        (c * s) * (c * s)
    } else {
        let r = cosh_ratio(pt * (-d).sqrt(), pt * p.a0);
        r * r
    }
}

/// Case-(a) filters `(|a-(n)|^2, |a+(n)|^2)`. Family 0 is uncoupled and
/// returns `(1, 0)`. The pair always sums to one.
pub fn case_a_filter(n: u64, model: &PulseModel) -> Result<(f64, f64)> {
    if n == 0 {
        return Ok((1.0, 0.0));
    }
    let lower = match model {
        PulseModel::LandauZener(p) => lz_transfer_prob(n, p)?,
        PulseModel::DemkovKunike(p) => dk_lower_filter(n, p)?,
        PulseModel::Tabulated(_) => return Err(Error::NoClosedForm("tabulated")),
    };
    Ok((lower, 1.0 - lower))
}

/// `(delta_omega(t), g(t))` of the model.
pub fn sample_pulse(model: &PulseModel, t: f64) -> Result<(f64, f64)> {
    match model {
        PulseModel::LandauZener(p) => Ok((2.0 * p.lambda * t, p.g0)),
        PulseModel::DemkovKunike(p) => {
            let x = t / p.t;
            Ok((2.0 * p.a0 * x.tanh(), p.g0 * sech(x)))
        }
        PulseModel::Tabulated(tab) => tab.sample(t),
    }
}
