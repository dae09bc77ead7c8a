//! Structural predictions for the Demkov-Kunike filter and the sweeps that
//! exercise them.
//!
//! In the non-adiabatic regime (small `A0 T`) the lower-level filter is
//! close to `cos^2(pi T g0 sqrt(n))`: maxima at `n = k^2 / (T g0)^2`, zeros
//! at `(k + 1/2)^2 / (T g0)^2`. Repeated detections raise it to the power
//! `m` and narrow the photon distribution around a chosen maximum. In the
//! adiabatic weak-coupling regime (`g0 < A0`, large `A0 T`) the hyperbolic
//! branch acts as a low-pass filter of width `~ A0 / (pi g0^2 T m)`.

use std::f64::consts::{LN_2, PI};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PhotonDistribution;
use crate::filtering::{apply_sequence, AtomInjectionCase, FilterTable, MeasurementSequence};
use crate::numerics::{acosh_from_ln, fmt_f64, ln_cosh, sech};
use crate::pulses::{DKParams, PulseModel};

/// Default number of points in a sweep grid.
pub const DEFAULT_GRID_POINTS: usize = 200;

/// Width quantities of the sharpening regime.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthEstimate {
    /// Filter maximum the distribution is centred on.
    pub n_m: f64,
    /// FWHM of the `m`-fold filter around `n_m`.
    pub delta_n_a: f64,
    /// FWHM of a Poisson distribution centred on `n_m`.
    pub delta_n_p: f64,
    /// Combined FWHM of the filtered distribution.
    pub delta_n: f64,
    pub x_m: f64,
}

/// First maximum of the exact filter, `(1 + T^2 A0^2) / (T^2 g0^2)`.
pub fn dk_first_maximum(params: &DKParams) -> f64 {
    let (t, a, g) = (params.t(), params.a0(), params.g0());
    (1.0 + t * t * a * a) / (t * t * g * g)
}

/// Maximum `k` of the non-adiabatic filter, `k^2 / (T g0)^2`.
pub fn dk_maxima(k: u32, params: &DKParams) -> f64 {
    let tg = params.t() * params.g0();
    (k as f64).powi(2) / (tg * tg)
}

/// Zero `k` of the non-adiabatic filter, `(k + 1/2)^2 / (T g0)^2`.
pub fn dk_zeros(k: u32, params: &DKParams) -> f64 {
    let tg = params.t() * params.g0();
    (k as f64 + 0.5).powi(2) / (tg * tg)
}

fn check_m(m: u32) -> Result<()> {
    if m == 0 {
        Err(Error::InvalidParameter("atom count m must be >= 1".into()))
    } else {
        Ok(())
    }
}

/// Half-maximum angle of `cos^{2m}`: `arccos(0.5^(1/(2m)))`.
pub fn x_m(m: u32) -> Result<f64> {
    check_m(m)?;
    Ok(0.5f64.powf(1.0 / (2.0 * m as f64)).acos())
}

/// Sharpening-regime widths after `m` lower-level detections on a
/// distribution centred at the filter maximum `n_m`.
pub fn sharpening_width(m: u32, params: &DKParams, n_m: f64) -> Result<WidthEstimate> {
    if !(n_m.is_finite() && n_m >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "n_M must be >= 0 (got {n_m})"
        )));
    }
    let x = x_m(m)?;
    let tg = params.t() * params.g0();
    let delta_n_a = 4.0 * x * n_m.sqrt() / (PI * tg);
    let delta_n_p = (8.0 * n_m * LN_2).sqrt();
    let delta_n = (16.0 * x * x * n_m * LN_2 / (PI * PI * tg * tg * LN_2 + 2.0 * x * x)).sqrt();
    Ok(WidthEstimate {
        n_m,
        delta_n_a,
        delta_n_p,
        delta_n,
        x_m: x,
    })
}

/// Width at `1/e` of the `m`-fold low-pass filter: the root `dn` of
/// `cosh^{2m}(pi T sqrt(A0^2 - g0^2 dn)) sech^{2m}(pi T A0) = e^-1`,
/// solved in closed form.
///
/// Fails when `cosh(pi T A0) e^{-1/(2m)} < 1`, i.e. the filter never drops
/// to `1/e` on its hyperbolic branch.
pub fn lowpass_width_exact(m: u32, params: &DKParams) -> Result<f64> {
    check_m(m)?;
    let pt = PI * params.t();
    let ln_y = ln_cosh(pt * params.a0()) - 1.0 / (2.0 * m as f64);
    if ln_y < 0.0 {
        return Err(Error::NoSolution(format!(
            "cosh(pi T A0) exp(-1/(2m)) < 1 for A0 T = {}, m = {m}; not in the low-pass regime",
            params.adiabaticity()
        )));
    }
    let s = acosh_from_ln(ln_y) / pt;
    let a = params.a0();
    Ok(((a * a - s * s) / (params.g0() * params.g0())).max(0.0))
}

/// Left-hand side of the low-pass width equation at `dn`, for
/// back-substitution.
pub fn lowpass_filter_value(m: u32, params: &DKParams, dn: f64) -> f64 {
    let pt = PI * params.t();
    let a = params.a0();
    let inner = (a * a - params.g0() * params.g0() * dn).max(0.0).sqrt();
    (2.0 * m as f64 * (ln_cosh(pt * inner) - ln_cosh(pt * a))).exp()
}

/// Adiabatic low-pass width `A0 / (pi g0^2 T m)`.
pub fn lowpass_width_approx(m: u32, params: &DKParams) -> Result<f64> {
    check_m(m)?;
    Ok(params.a0() / (PI * params.g0().powi(2) * params.t() * m as f64))
}

/// Oscillation amplitude of the filter, `sech^2(pi T A0)`, with its
/// large-`A0 T` estimate `4 exp(-2 pi T A0)`.
pub fn adiabatic_amplitude(params: &DKParams) -> (f64, f64) {
    let x = PI * params.adiabaticity();
    let s = sech(x);
    (s * s, 4.0 * (-2.0 * x).exp())
}

/// Which lower-level filter a sweep uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterApprox {
    /// Exact Demkov-Kunike filter.
    #[default]
    Exact,
    /// `cos^2(pi T g0 sqrt(n))`.
    NonAdiabatic,
}

impl FilterApprox {
    pub fn table(self, params: &DKParams, max_family: usize) -> Result<FilterTable> {
        match self {
            FilterApprox::Exact => {
                FilterTable::for_model(&PulseModel::DemkovKunike(*params), max_family)
            }
            FilterApprox::NonAdiabatic => Ok(FilterTable::dk_non_adiabatic(params, max_family)),
        }
    }
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|i| {
                    if i + 1 == count {
                        stop
                    } else {
                        start + step * i as f64
                    }
                })
                .collect()
        }
    }
}

/// Columnar results of a one-parameter sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis_name: String,
    pub axis: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
    /// Everything held fixed, as `(name, value)` pairs.
    pub fixed: Vec<(String, String)>,
}

impl SweepTable {
    pub fn new(axis_name: impl Into<String>, axis: Vec<f64>) -> Self {
        Self {
            axis_name: axis_name.into(),
            axis,
            columns: Vec::new(),
            fixed: Vec::new(),
        }
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        if values.len() != self.axis.len() {
            return Err(Error::InvalidParameter(format!(
                "column has {} values for an axis of {}",
                values.len(),
                self.axis.len()
            )));
        }
        self.columns.push((name.into(), values));
        Ok(())
    }

    pub fn fix(&mut self, name: impl Into<String>, value: impl ToString) {
        self.fixed.push((name.into(), value.to_string()));
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// CSV with `# key = value` header lines for the version and every fixed
    /// parameter, then one row per axis value.
    pub fn to_csv(&self) -> String {
        let mut s = format!("# cavity-filter {}\n", crate::VERSION);
        for (k, v) in &self.fixed {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s.push_str(&self.axis_name);
        for (name, _) in &self.columns {
            s.push(',');
            s.push_str(name);
        }
        s.push('\n');
        for (i, x) in self.axis.iter().enumerate() {
            s.push_str(&fmt_f64(*x));
            for (_, col) in &self.columns {
                s.push(',');
                s.push_str(&fmt_f64(col[i]));
            }
            s.push('\n');
        }
        s
    }
}

/// Mandel Q after `m` lower-level detections (case A) on `coherent(nbar)`,
/// one row per `g0`. `A0` and `T` come from `template`.
pub fn q_sweep(
    nbar: f64,
    m: u32,
    template: &DKParams,
    g0_values: &[f64],
    approx: FilterApprox,
) -> Result<SweepTable> {
    let initial = PhotonDistribution::coherent(nbar, None)?;
    let seq = MeasurementSequence::all_minus(m as usize);
    let rows = g0_values
        .par_iter()
        .map(|&g0| {
            let params = template.with_g0(g0)?;
            let table = approx.table(&params, initial.n_max())?;
            let state = apply_sequence(&initial, &table, &seq, AtomInjectionCase::CaseA)?;
            Ok((
                state.dist.q_parameter()?,
                state.dist.mean(),
                state.log_success_prob,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut t = SweepTable::new("g0", g0_values.to_vec());
    t.push_column("q", rows.iter().map(|r| r.0).collect())?;
    t.push_column("mean", rows.iter().map(|r| r.1).collect())?;
    t.push_column("log_success_prob", rows.iter().map(|r| r.2).collect())?;
    t.push_column("success_prob", rows.iter().map(|r| r.2.exp()).collect())?;
    t.fix("sweep", "q");
    t.fix("nbar", nbar);
    t.fix("m", m);
    t.fix("A0", template.a0());
    t.fix("T", template.t());
    t.fix("filter", format!("{approx:?}"));
    Ok(t)
}

/// Analytic sharpening width against the interpolated FWHM of the actual
/// filtered distribution, for each `m`. The filter maximum is taken at
/// `n_M = nbar`.
pub fn sharpening_sweep(nbar: f64, params: &DKParams, ms: &[u32]) -> Result<SweepTable> {
    let initial = PhotonDistribution::coherent(nbar, None)?;
    let table = FilterTable::for_model(&PulseModel::DemkovKunike(*params), initial.n_max())?;
    let rows = ms
        .par_iter()
        .map(|&m| {
            let w = sharpening_width(m, params, nbar)?;
            let state = apply_sequence(
                &initial,
                &table,
                &MeasurementSequence::all_minus(m as usize),
                AtomInjectionCase::CaseA,
            )?;
            let fwhm = state.dist.fwhm_numeric();
            Ok((w, fwhm.width, if fwhm.multimodal { 1.0 } else { 0.0 }))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut t = SweepTable::new("m", ms.iter().map(|&m| m as f64).collect());
    t.push_column("x_m", rows.iter().map(|r| r.0.x_m).collect())?;
    t.push_column("delta_n_a", rows.iter().map(|r| r.0.delta_n_a).collect())?;
    t.push_column("delta_n_p", rows.iter().map(|r| r.0.delta_n_p).collect())?;
    t.push_column("delta_n", rows.iter().map(|r| r.0.delta_n).collect())?;
    t.push_column("fwhm_numeric", rows.iter().map(|r| r.1).collect())?;
    t.push_column(
        "rel_diff",
        rows.iter().map(|r| (r.0.delta_n - r.1) / r.1).collect(),
    )?;
    t.push_column("multimodal", rows.iter().map(|r| r.2).collect())?;
    t.fix("sweep", "sharpening-width");
    t.fix("nbar", nbar);
    t.fix("n_M", nbar);
    t.fix("g0", params.g0());
    t.fix("A0", params.a0());
    t.fix("T", params.t());
    Ok(t)
}

/// Exact and approximate low-pass widths for each `m`, with the
/// back-substitution residual of the exact root.
pub fn lowpass_sweep(params: &DKParams, ms: &[u32]) -> Result<SweepTable> {
    let rows = ms
        .iter()
        .map(|&m| {
            let exact = lowpass_width_exact(m, params)?;
            let approx = lowpass_width_approx(m, params)?;
            let residual = lowpass_filter_value(m, params, exact) - (-1.0f64).exp();
            Ok((exact, approx, residual))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = SweepTable::new("m", ms.iter().map(|&m| m as f64).collect());
    t.push_column("exact", rows.iter().map(|r| r.0).collect())?;
    t.push_column("approx", rows.iter().map(|r| r.1).collect())?;
    t.push_column("rel_diff", rows.iter().map(|r| (r.1 - r.0) / r.0).collect())?;
    t.push_column("residual", rows.iter().map(|r| r.2).collect())?;
    t.fix("sweep", "lowpass-width");
    t.fix("g0", params.g0());
    t.fix("A0", params.a0());
    t.fix("T", params.t());
    Ok(t)
}
