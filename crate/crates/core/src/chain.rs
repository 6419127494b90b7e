//! Physical parameters, dispersion relation, finite-chain spectrum and band
//! classification.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative width of the window around a normal frequency inside which a
/// driving frequency counts as resonant: `|ω² − ω_j²| < RESONANCE_TOL · max(1, ω_j²)`.
pub const RESONANCE_TOL: f64 = 1e-9;

/// A pinned harmonic chain on the sites `0..=n`, thermostatted at both ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n: usize,
    pub omega0: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub t_minus: f64,
    pub t_plus: f64,
}

impl ChainParams {
    pub fn new(n: usize, omega0: f64, gamma_minus: f64, gamma_plus: f64, t_minus: f64, t_plus: f64) -> Result<Self> {
        let p = ChainParams {
            n,
            omega0,
            gamma_minus,
            gamma_plus,
            t_minus,
            t_plus,
        };
        p.validate()?;
        Ok(p)
    }

    /// Chain at zero temperature; only the mechanical sector is non-trivial.
    pub fn cold(n: usize, omega0: f64, gamma_minus: f64, gamma_plus: f64) -> Result<Self> {
        Self::new(n, omega0, gamma_minus, gamma_plus, 0.0, 0.0)
    }

    pub fn with_temperatures(mut self, t_minus: f64, t_plus: f64) -> Result<Self> {
        self.t_minus = t_minus;
        self.t_plus = t_plus;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::config("n must be at least 1"));
        }
        let reals = [
            ("omega0", self.omega0),
            ("gamma_minus", self.gamma_minus),
            ("gamma_plus", self.gamma_plus),
            ("t_minus", self.t_minus),
            ("t_plus", self.t_plus),
        ];
        for (name, v) in reals {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// A periodic steady state exists only if at least one end is damped.
    pub fn require_damping(&self) -> Result<()> {
        if self.gamma_minus + self.gamma_plus > 0.0 {
            Ok(())
        } else {
            Err(Error::config(
                "gamma_minus = gamma_plus = 0: the periodic stationary state does not exist",
            ))
        }
    }

    /// Number of sites, `n + 1`.
    pub fn sites(&self) -> usize {
        self.n + 1
    }

    /// `ω_j² − ω²`, evaluated without forming `ω_j²` to keep precision near resonance.
    pub fn mode_gap(&self, j: usize, omega: f64) -> f64 {
        let s = (PI * j as f64 / (2.0 * self.sites() as f64)).sin();
        (self.omega0 * self.omega0 - omega * omega) + 4.0 * s * s
    }

    pub fn mode_frequency(&self, j: usize) -> f64 {
        dispersion_unchecked(j as f64 / self.sites() as f64, self.omega0)
    }

    /// Lower and upper edge of the phonon band.
    pub fn band(&self) -> (f64, f64) {
        band_edges(self.omega0)
    }
}

/// A θ-periodic boundary force `Σ_ℓ F_ℓ cos(ℓ ω t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceSpec {
    pub omega: f64,
    pub modes: Vec<(usize, f64)>,
}

impl ForceSpec {
    pub fn new(omega: f64, modes: Vec<(usize, f64)>) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::config(format!("force frequency must be > 0, got {omega}")));
        }
        if modes.is_empty() {
            return Err(Error::config("force needs at least one mode"));
        }
        for &(ell, amp) in &modes {
            if ell == 0 {
                return Err(Error::config("mode index must be >= 1 (the force has zero mean)"));
            }
            if !amp.is_finite() {
                return Err(Error::config(format!("mode {ell} amplitude is not finite")));
            }
        }
        Ok(ForceSpec { omega, modes })
    }

    pub fn single(omega: f64, amplitude: f64) -> Result<Self> {
        Self::new(omega, vec![(1, amplitude)])
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn max_harmonic(&self) -> usize {
        self.modes.iter().map(|&(ell, _)| ell).max().unwrap_or(1)
    }

    /// All amplitudes vanish: the chain is only thermally driven.
    pub fn is_null(&self) -> bool {
        self.modes.iter().all(|&(_, a)| a == 0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.modes
            .iter()
            .map(|&(ell, amp)| amp * (ell as f64 * self.omega * t).cos())
            .sum()
    }
}

/// Where a driving frequency sits relative to the spectrum of the chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BandLocation {
    BelowBand,
    InBand { r: f64 },
    AboveBand,
    OnFiniteResonance { j: usize },
}

impl BandLocation {
    pub fn tag(&self) -> &'static str {
        match self {
            BandLocation::BelowBand => "below",
            BandLocation::InBand { .. } => "in_band",
            BandLocation::AboveBand => "above",
            BandLocation::OnFiniteResonance { .. } => "resonance",
        }
    }

    pub fn is_resonant(&self) -> bool {
        matches!(self, BandLocation::OnFiniteResonance { .. })
    }
}

pub fn band_edges(omega0: f64) -> (f64, f64) {
    (omega0, (omega0 * omega0 + 4.0).sqrt())
}

/// `ω(r) = √(ω₀² + 4 sin²(πr/2))` for `r ∈ [0, 1]`.
pub fn dispersion(r: f64, omega0: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::domain(format!("r = {r} outside [0, 1]")));
    }
    Ok(dispersion_unchecked(r, omega0))
}

pub(crate) fn dispersion_unchecked(r: f64, omega0: f64) -> f64 {
    let s = (PI * r / 2.0).sin();
    (omega0 * omega0 + 4.0 * s * s).sqrt()
}

/// Inverse of [`dispersion`] on the closed band `[ω₀, √(ω₀²+4)]`.
pub fn inverse_dispersion(omega: f64, omega0: f64) -> Result<f64> {
    let (lo, hi) = band_edges(omega0);
    if !(omega >= lo && omega <= hi) {
        return Err(Error::domain(format!("omega = {omega} outside the band [{lo}, {hi}]")));
    }
    Ok(inverse_dispersion_unchecked(omega, omega0))
}

pub(crate) fn inverse_dispersion_unchecked(omega: f64, omega0: f64) -> f64 {
    let x = (0.5 * (omega * omega - omega0 * omega0).max(0.0).sqrt()).min(1.0);
    2.0 / PI * x.asin()
}

/// Normal frequencies `ω_j = ω(j/(n+1))`, `j = 0..=n`, in increasing order.
pub fn spectrum(params: &ChainParams) -> Vec<f64> {
    (0..=params.n).map(|j| params.mode_frequency(j)).collect()
}

/// The mode whose `ω_j²` is closest to `ω²`, with the signed gap `ω_j² − ω²`.
pub fn nearest_mode(omega: f64, params: &ChainParams) -> (usize, f64) {
    let n = params.n;
    let w2 = omega * omega;
    let w02 = params.omega0 * params.omega0;
    let guess = if w2 <= w02 {
        0
    } else if w2 >= w02 + 4.0 {
        n
    } else {
        let r = inverse_dispersion_unchecked(omega.abs(), params.omega0);
        ((r * params.sites() as f64).round() as usize).min(n)
    };
    let lo = guess.saturating_sub(1);
    let hi = (guess + 1).min(n);
    (lo..=hi)
        .map(|j| (j, params.mode_gap(j, omega)))
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("non-empty mode window")
}

/// Resonance takes priority over band membership; band comparison is strict.
pub fn classify(omega: f64, params: &ChainParams) -> BandLocation {
    let omega = omega.abs();
    let (j, gap) = nearest_mode(omega, params);
    let wj = params.mode_frequency(j);
    if gap.abs() < RESONANCE_TOL * (wj * wj).max(1.0) {
        return BandLocation::OnFiniteResonance { j };
    }
    let (lo, hi) = params.band();
    if omega < lo {
        BandLocation::BelowBand
    } else if omega > hi {
        BandLocation::AboveBand
    } else if omega == lo || omega == hi {
        // band edges are mode frequencies only in the limit; treat as outside
        if omega == lo {
            BandLocation::BelowBand
        } else {
            BandLocation::AboveBand
        }
    } else {
        BandLocation::InBand {
            r: inverse_dispersion_unchecked(omega, params.omega0),
        }
    }
}
