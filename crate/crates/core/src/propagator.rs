//! Direct integration of a single photon family.
//!
//! Family `n` evolves under
//!
//! ```text
//! i d/dt (a+, a-) = [[dw(t)/2, g(t) sqrt(n)], [g(t) sqrt(n), -dw(t)/2]] (a+, a-)
//! ```
//!
//! integrated with an adaptive Dormand-Prince 5(4) pair. The closed-form
//! filters in [`pulses`](crate::pulses) are asymptotic (`t -> +-inf`); here a
//! finite window stands in for the infinite one, see
//! [`IntegrationConfig::for_model`].

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulses::{sample_pulse, LZParams, PulseModel, TransferMatrix};

/// Amplitudes `(a+, a-)` of the pair `|n-1, +>, |n, ->`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyAmplitudes {
    pub a_plus: C64,
    pub a_minus: C64,
}

impl FamilyAmplitudes {
    /// Atom enters in the lower level.
    pub const CASE_A: Self = Self {
        a_plus: C64::new(0.0, 0.0),
        a_minus: C64::new(1.0, 0.0),
    };
    /// Atom enters in the upper level.
    pub const CASE_B: Self = Self {
        a_plus: C64::new(1.0, 0.0),
        a_minus: C64::new(0.0, 0.0),
    };

    pub fn new(a_plus: C64, a_minus: C64) -> Self {
        Self { a_plus, a_minus }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a_plus.norm_sqr() + self.a_minus.norm_sqr()
    }

    /// Lower-level population `|a-|^2`.
    pub fn lower(&self) -> f64 {
        self.a_minus.norm_sqr()
    }

    /// Upper-level population `|a+|^2`.
    pub fn upper(&self) -> f64 {
        self.a_plus.norm_sqr()
    }

    fn to_array(self) -> [C64; 2] {
        [self.a_plus, self.a_minus]
    }

    fn from_array(y: [C64; 2]) -> Self {
        Self {
            a_plus: y[0],
            a_minus: y[1],
        }
    }
}

/// Window and tolerances of one integration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
}

impl IntegrationConfig {
    pub const DEFAULT_REL_TOL: f64 = 1e-9;
    pub const DEFAULT_ABS_TOL: f64 = 1e-12;
    /// Demkov-Kunike half-window in units of `T`.
    pub const DK_WINDOW: f64 = 20.0;
    /// Landau-Zener endpoint sweep phase `lambda tau^2`.
    pub const LZ_LAMBDA_TAU_SQ: f64 = 400.0;

    /// Window `[t_start, t_end]` with default tolerances and a step cap of
    /// one fiftieth of the window.
    pub fn new(t_start: f64, t_end: f64) -> Result<Self> {
        Self {
            t_start,
            t_end,
            rel_tol: Self::DEFAULT_REL_TOL,
            abs_tol: Self::DEFAULT_ABS_TOL,
            max_step: (t_end - t_start) / 50.0,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = self.t_start.is_finite()
            && self.t_end.is_finite()
            && self.t_start < self.t_end
            && self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.max_step > 0.0;
        if ok {
            Ok(self)
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid integration config {self:?}"
            )))
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Result<Self> {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self.validated()
    }

    /// Symmetric window `+-half_width`.
    pub fn symmetric(half_width: f64) -> Result<Self> {
        Self::new(-half_width, half_width)
    }

    /// Landau-Zener window `+-tau` with `lambda tau^2 = lambda_tau_sq`.
    pub fn lz_window(params: &LZParams, lambda_tau_sq: f64) -> Result<Self> {
        Self::symmetric((lambda_tau_sq / params.lambda()).sqrt())
    }

    /// Default window of a model: `+-20 T` for Demkov-Kunike,
    /// `lambda tau^2 = 400` for Landau-Zener, the sampled range for a
    /// tabulated pulse.
    pub fn for_model(model: &PulseModel) -> Result<Self> {
        match model {
            PulseModel::DemkovKunike(p) => Self::symmetric(Self::DK_WINDOW * p.t()),
            PulseModel::LandauZener(p) => Self::lz_window(p, Self::LZ_LAMBDA_TAU_SQ),
            PulseModel::Tabulated(tab) => {
                let (a, b) = tab.window();
                Self::new(a, b)
            }
        }
    }
}

/// Right-hand side `-i H(t) a` of one family.
struct Family<'a> {
    model: &'a PulseModel,
    sqrt_n: f64,
}

impl Family<'_> {
    fn new(n: u64, model: &PulseModel) -> Result<Family<'_>> {
        if n == 0 {
            return Err(Error::ZeroFamily);
        }
        Ok(Family {
            model,
            sqrt_n: (n as f64).sqrt(),
        })
    }

    #[inline]
    fn coefficients(&self, t: f64) -> (f64, f64) {
        let (dw, g) = match self.model {
            PulseModel::Tabulated(tab) => tab.sample_clamped(t),
            m => sample_pulse(m, t).expect("analytic pulses sample everywhere"),
        };
        (0.5 * dw, g * self.sqrt_n)
    }

    #[inline]
    fn rhs(&self, t: f64, y: &[C64; 2]) -> [C64; 2] {
        let (d, c) = self.coefficients(t);
        let mi = C64::new(0.0, -1.0);
        [mi * (y[0] * d + y[1] * c), mi * (y[0] * c - y[1] * d)]
    }

    fn check_window(&self, cfg: &IntegrationConfig) -> Result<()> {
        if let PulseModel::Tabulated(tab) = self.model {
            let (start, end) = tab.window();
            for t in [cfg.t_start, cfg.t_end] {
                if t < start || t > end {
                    return Err(Error::OutOfWindow { t, start, end });
                }
            }
        }
        Ok(())
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 50_000_000;

// Per-step tolerances are this fraction of the requested ones. Local errors
// add up over the ~1e4 steps of a long Landau-Zener window, and the final
// norm has to stay within 10 * rel_tol.
const LOCAL_TOL_FACTOR: f64 = 1e-2;

#[inline]
fn comb(y: &[C64; 2], h: f64, terms: &[(f64, &[C64; 2])]) -> [C64; 2] {
    let mut out = *y;
    for &(a, k) in terms {
        out[0] += k[0] * (h * a);
        out[1] += k[1] * (h * a);
    }
    out
}

/// Step statistics of one integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrates `y` from `t0` to `t1`, returning the state and the last
/// accepted step size (useful to warm-start the next segment).
fn integrate(
    fam: &Family<'_>,
    y0: [C64; 2],
    t0: f64,
    t1: f64,
    cfg: &IntegrationConfig,
    h_init: Option<f64>,
    stats: &mut StepStats,
) -> Result<([C64; 2], f64)> {
    let mut t = t0;
    let mut y = y0;
    if t1 <= t0 {
        return Ok((y, h_init.unwrap_or(cfg.max_step)));
    }
    let span = t1 - t0;
    let mut k1 = fam.rhs(t, &y);
    let mut h = match h_init {
        Some(h) => h,
        None => {
            let slope = k1[0].norm().max(k1[1].norm());
            let guess = if slope > 0.0 { 0.01 / slope } else { span };
            guess.max(1e-6 * span)
        }
    }
    .min(cfg.max_step)
    .min(span);
    let mut last_ok = h;
    let mut rejected_last = false;

    while t < t1 {
        if stats.accepted + stats.rejected > MAX_STEPS {
            return Err(Error::IntegrationFailure {
                t,
                reason: "step budget exhausted".into(),
            });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(span) {
            return Err(Error::IntegrationFailure {
                t,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }

        let k2 = fam.rhs(t + C2 * h, &comb(&y, h, &[(A21, &k1)]));
        let k3 = fam.rhs(t + C3 * h, &comb(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = fam.rhs(
            t + C4 * h,
            &comb(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = fam.rhs(
            t + C5 * h,
            &comb(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = fam.rhs(
            t + h,
            &comb(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = comb(
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let t_new = if last { t1 } else { t + h };
        let k7 = fam.rhs(t_new, &y_new);

        let mut err_sq = 0.0;
        for i in 0..2 {
            let e =
                (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let scale =
                LOCAL_TOL_FACTOR * (cfg.abs_tol + cfg.rel_tol * y[i].norm().max(y_new[i].norm()));
            err_sq += (e.norm() / scale).powi(2);
        }
        let err = (err_sq / 2.0).sqrt();
        if !err.is_finite() {
            return Err(Error::IntegrationFailure {
                t,
                reason: "non-finite error estimate".into(),
            });
        }

        if err <= 1.0 {
            stats.accepted += 1;
            t = t_new;
            y = y_new;
            k1 = k7;
            last_ok = h;
            let grow = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            let grow = if rejected_last { grow.min(1.0) } else { grow };
            h = (h * grow).min(cfg.max_step);
            rejected_last = false;
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            rejected_last = true;
        }
    }
    Ok((y, last_ok))
}

fn check_init(init: &FamilyAmplitudes) -> Result<()> {
    if (init.norm_sqr() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "initial amplitudes must be normalized (norm^2 = {})",
            init.norm_sqr()
        )));
    }
    Ok(())
}

fn check_drift(y: &FamilyAmplitudes, cfg: &IntegrationConfig) -> Result<()> {
    let drift = (y.norm_sqr() - 1.0).abs();
    if drift >= 10.0 * cfg.rel_tol {
        return Err(Error::IntegrationFailure {
            t: cfg.t_end,
            reason: format!("norm drifted by {drift:e}"),
        });
    }
    Ok(())
}

/// Propagates family `n` from `cfg.t_start` to `cfg.t_end`.
///
/// Fails if the step size underflows or if the final norm deviates from one
/// by `10 * rel_tol` or more.
pub fn propagate_family(
    n: u64,
    model: &PulseModel,
    init: FamilyAmplitudes,
    cfg: &IntegrationConfig,
) -> Result<FamilyAmplitudes> {
    propagate_family_with_stats(n, model, init, cfg).map(|(y, _)| y)
}

/// [`propagate_family`] also returning step statistics.
pub fn propagate_family_with_stats(
    n: u64,
    model: &PulseModel,
    init: FamilyAmplitudes,
    cfg: &IntegrationConfig,
) -> Result<(FamilyAmplitudes, StepStats)> {
    let cfg = cfg.validated()?;
    check_init(&init)?;
    let fam = Family::new(n, model)?;
    fam.check_window(&cfg)?;
    let mut stats = StepStats::default();
    let (y, _) = integrate(
        &fam,
        init.to_array(),
        cfg.t_start,
        cfg.t_end,
        &cfg,
        None,
        &mut stats,
    )?;
    let y = FamilyAmplitudes::from_array(y);
    check_drift(&y, &cfg)?;
    Ok((y, stats))
}

/// Amplitudes at each of `times` (ascending, inside the window), starting
/// from `init` at `cfg.t_start`.
pub fn propagate_family_path(
    n: u64,
    model: &PulseModel,
    init: FamilyAmplitudes,
    cfg: &IntegrationConfig,
    times: &[f64],
) -> Result<Vec<FamilyAmplitudes>> {
    let cfg = cfg.validated()?;
    check_init(&init)?;
    let fam = Family::new(n, model)?;
    fam.check_window(&cfg)?;
    if times.windows(2).any(|w| w[1] < w[0])
        || times.iter().any(|&t| t < cfg.t_start || t > cfg.t_end)
    {
        return Err(Error::InvalidParameter(
            "output times must be ascending and inside the window".into(),
        ));
    }
    let mut stats = StepStats::default();
    let mut y = init.to_array();
    let mut t = cfg.t_start;
    let mut h = None;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let (y_next, h_next) = integrate(&fam, y, t, target, &cfg, h, &mut stats)?;
        y = y_next;
        t = target;
        h = Some(h_next);
        let amp = FamilyAmplitudes::from_array(y);
        check_drift(&amp, &cfg)?;
        out.push(amp);
    }
    Ok(out)
}

/// Full 2x2 scattering matrix of family `n`: column 0 evolves from the upper
/// level, column 1 from the lower level.
pub fn numeric_unitary(
    n: u64,
    model: &PulseModel,
    cfg: &IntegrationConfig,
) -> Result<[[C64; 2]; 2]> {
    let from_upper = propagate_family(n, model, FamilyAmplitudes::CASE_B, cfg)?;
    let from_lower = propagate_family(n, model, FamilyAmplitudes::CASE_A, cfg)?;
    Ok([
        [from_upper.a_plus, from_lower.a_plus],
        [from_upper.a_minus, from_lower.a_minus],
    ])
}

/// Transfer probability and phase of family `n`, extracted from the two
/// phase-free initial conditions.
///
/// `w = |a+|^2` after entering in the lower level; `phi` is the phase of
/// the diagonal element relative to the off-diagonal one in the first row,
/// and is reported as 0 when either element vanishes.
pub fn numeric_transfer_matrix(
    n: u64,
    model: &PulseModel,
    cfg: &IntegrationConfig,
) -> Result<TransferMatrix> {
    let u = numeric_unitary(n, model, cfg)?;
    let w = u[0][1].norm_sqr().clamp(0.0, 1.0);
    let phi = if u[0][0].norm() > 1e-12 && u[0][1].norm() > 1e-12 {
        u[0][0].arg() - u[0][1].arg()
    } else {
        0.0
    };
    TransferMatrix::new(w, phi)
}

/// How the finite Landau-Zener window is read out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LzReadout {
    /// `|a-|^2` at `t_end`.
    Raw,
    /// Mean of `|a-|^2` over the last local detuning period.
    AverageEnd,
    /// Additionally averaged over start times spread across one period
    /// before `t_start`; removes the interference left by switching the
    /// coupling on abruptly.
    AverageBoth,
}

const LZ_AVERAGE_SAMPLES: usize = 16;

/// Case-(a) lower-level population of a Landau-Zener family read out from a
/// finite window, an estimate of `exp(-v n)`.
pub fn lz_lower_filter_numeric(
    n: u64,
    params: &LZParams,
    cfg: &IntegrationConfig,
    readout: LzReadout,
) -> Result<f64> {
    let model = PulseModel::LandauZener(*params);
    if readout == LzReadout::Raw {
        return Ok(propagate_family(n, &model, FamilyAmplitudes::CASE_A, cfg)?.lower());
    }
    let cfg = cfg.validated()?;
    // local adiabatic splitting sqrt(dw^2 + 4 g^2 n)
    let period = |t: f64| {
        let dw = 2.0 * params.lambda() * t;
        2.0 * PI / (dw * dw + 4.0 * params.g0() * params.g0() * n as f64).sqrt()
    };
    let p_end = period(cfg.t_end);
    let ends: Vec<f64> = (1..=LZ_AVERAGE_SAMPLES)
        .map(|j| cfg.t_end - p_end + p_end * j as f64 / LZ_AVERAGE_SAMPLES as f64)
        .collect();
    let starts: Vec<f64> = match readout {
        LzReadout::AverageBoth => {
            let p_start = period(cfg.t_start);
            (0..LZ_AVERAGE_SAMPLES)
                .map(|k| cfg.t_start - p_start * k as f64 / LZ_AVERAGE_SAMPLES as f64)
                .collect()
        }
        _ => vec![cfg.t_start],
    };
    let mut total = 0.0;
    for &t0 in &starts {
        let run = IntegrationConfig { t_start: t0, ..cfg };
        let path = propagate_family_path(n, &model, FamilyAmplitudes::CASE_A, &run, &ends)?;
        total += path.iter().map(FamilyAmplitudes::lower).sum::<f64>() / ends.len() as f64;
    }
    Ok(total / starts.len() as f64)
}
