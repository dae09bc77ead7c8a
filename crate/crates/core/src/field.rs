//! Photon-number distributions of the cavity mode.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::fmt_f64;

/// Truncated probability vector over photon numbers `0..=n_max`.
///
/// `tail_mass_bound` bounds the probability that was discarded above
/// `n_max` (relative to the stored, normalized vector).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonDistribution {
    n_max: usize,
    probs: Vec<f64>,
    tail_mass_bound: f64,
}

/// Default truncation `ceil(nbar + 12 sqrt(nbar + 1) + 20)`.
pub fn default_cutoff(nbar: f64) -> usize {
    (nbar + 12.0 * (nbar + 1.0).sqrt() + 20.0).ceil() as usize
}

fn check_nbar(nbar: f64) -> Result<()> {
    if nbar.is_finite() && nbar >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "mean photon number must be finite and >= 0 (got {nbar})"
        )))
    }
}

impl PhotonDistribution {
    /// Wraps raw probabilities; they must be finite and non-negative but
    /// need not be normalized.
    pub fn from_probs(probs: Vec<f64>, tail_mass_bound: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter(
                "distribution must have at least one bin".into(),
            ));
        }
        if let Some((n, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p >= 0.0))
        {
            return Err(Error::InvalidParameter(format!(
                "probability {p} at n = {n}"
            )));
        }
        if !(tail_mass_bound.is_finite() && tail_mass_bound >= 0.0) {
            return Err(Error::InvalidParameter(
                "tail mass bound must be >= 0".into(),
            ));
        }
        Ok(Self {
            n_max: probs.len() - 1,
            probs,
            tail_mass_bound,
        })
    }

    /// Number state `|n>`.
    pub fn fock(n: usize) -> Self {
        let mut probs = vec![0.0; n + 1];
        probs[n] = 1.0;
        Self {
            n_max: n,
            probs,
            tail_mass_bound: 0.0,
        }
    }

    pub fn vacuum() -> Self {
        Self::fock(0)
    }

    /// Poisson distribution of a coherent state, truncated at `n_max`
    /// (default [`default_cutoff`]).
    ///
    /// Bins are generated by the ratio recurrence `p(n+1)/p(n) = nbar/(n+1)`
    /// outward from the mode, so no factorial or `exp(-nbar)` is formed.
    pub fn coherent(nbar: f64, n_max: Option<usize>) -> Result<Self> {
        check_nbar(nbar)?;
        if nbar == 0.0 {
            return Ok(Self::vacuum());
        }
        let n_max = n_max.unwrap_or_else(|| default_cutoff(nbar));
        let mode = (nbar.floor() as usize).min(n_max);
        let mut probs = vec![0.0; n_max + 1];
        probs[mode] = 1.0;
        for n in mode..n_max {
            probs[n + 1] = probs[n] * nbar / (n + 1) as f64;
        }
        for n in (1..=mode).rev() {
            probs[n - 1] = probs[n] * n as f64 / nbar;
        }
        // Poisson tail above n_max, in log space:
        // sum_{k>N} p_k <= p_{N+1} / (1 - nbar/(N+2))
        let ln_p_top = -nbar + (n_max + 1) as f64 * nbar.ln()
            - (1..=n_max + 1).map(|k| (k as f64).ln()).sum::<f64>();
        let ratio = nbar / (n_max + 2) as f64;
        let tail = if ratio < 1.0 {
            (ln_p_top - (1.0 - ratio).ln()).exp()
        } else {
            1.0
        };
        let mut d = Self {
            n_max,
            probs,
            tail_mass_bound: tail.min(1.0),
        };
        d.normalize();
        Ok(d)
    }

    /// Bose-Einstein (thermal) distribution `p(n) ~ (nbar/(1+nbar))^n`.
    ///
    /// Truncated at the larger of [`default_cutoff`] and the first `N` with
    /// geometric tail `r^(N+1) < 1e-16`.
    pub fn thermal(nbar: f64) -> Result<Self> {
        check_nbar(nbar)?;
        if nbar == 0.0 {
            return Ok(Self::vacuum());
        }
        let r = nbar / (1.0 + nbar);
        let geometric = ((1e-16f64).ln() / r.ln()).ceil() as usize;
        let n_max = default_cutoff(nbar).max(geometric);
        let mut probs = Vec::with_capacity(n_max + 1);
        let mut p = 1.0 - r;
        for _ in 0..=n_max {
            probs.push(p);
            p *= r;
        }
        let tail = r.powi(n_max as i32 + 1);
        let mut d = Self {
            n_max,
            probs,
            tail_mass_bound: tail,
        };
        d.normalize();
        Ok(d)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail_mass_bound(&self) -> f64 {
        self.tail_mass_bound
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Rescales to unit total mass and returns the mass before rescaling.
    pub fn normalize(&mut self) -> f64 {
        let total = self.total();
        if total > 0.0 {
            self.probs.iter_mut().for_each(|p| *p /= total);
        }
        total
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// Central second moment, summed as `sum (n - mean)^2 p_n`.
    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| {
                let d = n as f64 - mu;
                d * d * p
            })
            .sum()
    }

    /// Mandel `Q = (variance - mean) / mean`. Zero for coherent light,
    /// `-1` for number states, negative means sub-Poissonian.
    pub fn q_parameter(&self) -> Result<f64> {
        let mu = self.mean();
        if mu <= 0.0 {
            return Err(Error::UndefinedQ);
        }
        Ok((self.variance() - mu) / mu)
    }

    /// Index of the most probable photon number (first one on ties).
    pub fn argmax(&self) -> usize {
        self.probs
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (n, &p)| {
                if p > best.1 {
                    (n, p)
                } else {
                    best
                }
            })
            .0
    }

    /// Full width at half maximum, with each half-maximum crossing located by
    /// linear interpolation between neighbouring bins. Bins outside
    /// `0..=n_max` count as zero.
    pub fn fwhm_numeric(&self) -> Fwhm {
        let peak = self.argmax();
        let half = 0.5 * self.probs[peak];
        let at = |i: isize| -> f64 {
            if i < 0 || i as usize > self.n_max {
                0.0
            } else {
                self.probs[i as usize]
            }
        };
        let mut j = peak as isize;
        while at(j - 1) > half {
            j -= 1;
        }
        // crossing between j-1 (<= half) and j (> half)
        let left = (j - 1) as f64 + (half - at(j - 1)) / (at(j) - at(j - 1));
        let mut k = peak as isize;
        while at(k + 1) > half {
            k += 1;
        }
        let right = k as f64 + (at(k) - half) / (at(k) - at(k + 1));
        let (lo, hi) = ((j - 1).max(0) as usize, (k + 1) as usize);
        let multimodal = self
            .probs
            .iter()
            .enumerate()
            .any(|(n, &p)| (n < lo || n > hi) && p > half);
        Fwhm {
            width: right - left,
            left,
            right,
            multimodal,
        }
    }

    /// `n,p_n` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,p_n\n");
        for (n, p) in self.probs.iter().enumerate() {
            let _ = writeln!(s, "{n},{}", fmt_f64(*p));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("distributions always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            n_max: usize,
            probs: Vec<f64>,
            tail_mass_bound: f64,
        }
        let raw: Raw = serde_json::from_str(s)?;
        if raw.probs.len() != raw.n_max + 1 {
            return Err(Error::Parse(format!(
                "n_max = {} but {} probabilities given",
                raw.n_max,
                raw.probs.len()
            )));
        }
        Self::from_probs(raw.probs, raw.tail_mass_bound)
    }
}

/// Result of [`PhotonDistribution::fwhm_numeric`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fwhm {
    pub width: f64,
    /// Interpolated left half-maximum crossing.
    pub left: f64,
    /// Interpolated right half-maximum crossing.
    pub right: f64,
    /// Another bin outside the bracketing crossings exceeds half maximum.
    pub multimodal: bool,
}
