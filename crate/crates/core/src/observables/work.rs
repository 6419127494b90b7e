//! Period-averaged work `W = ⟨F(t) p̄ₙ(t)⟩` and its split into the heat
//! absorbed by the left (`W⁻`) and right (`W⁺`) reservoirs.

use serde::Serialize;

use crate::chain::{classify, BandLocation, ChainParams, ForceSpec};
use crate::error::{Error, Result};
use crate::greens::{endpoint_split, regularized_endpoints, EndpointSplit};
use crate::response::{multimode_amplitudes, superposed_means};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WorkReport {
    pub omega: f64,
    pub work: f64,
    pub work_minus: f64,
    pub work_plus: f64,
    /// `W = (ωF)² N/D`. Close to a resonance both are rescaled by the same
    /// factor `(ω_j² − ω²)²/w_j²` (the squared inverse pole), so on a
    /// resonance they stay finite.
    pub numerator: f64,
    pub denominator: f64,
    pub regime: BandLocation,
}

/// Evaluates `N`, `D` and `W⁻` from pole-split endpoint functions.
///
/// With `κ` the inverse pole (capped at 1) every term is multiplied through
/// by `κ²`, which turns the `0/0` at a resonance into a regular limit.
pub fn work_at_split(
    split: &EndpointSplit,
    omega: f64,
    force_amp: f64,
    params: &ChainParams,
    regime: BandLocation,
) -> WorkReport {
    let (gm, gp) = (params.gamma_minus, params.gamma_plus);
    let z = split.inv_pole;
    let (kappa, kp) = if z.abs() < 1.0 { (z, 1.0) } else { (1.0, 1.0 / z) };
    let kg0 = kp + split.rest0 * kappa;
    let kg1 = split.sign * kp + split.rest1 * kappa;
    let kq = 2.0 * kp * split.s() + (split.rest0.powi(2) - split.rest1.powi(2)) * kappa;
    let w2 = omega * omega;
    let numerator = gm * kg1 * kg1 + gp * kg0 * kg0 + 4.0 * gm * gm * gp * w2 * kq * kq;
    let denominator = kappa * kappa
        + 8.0 * gm * gp * w2 * kg1 * kg1
        + 4.0 * w2 * (gm * gm + gp * gp) * kg0 * kg0
        + 16.0 * gm * gm * gp * gp * w2 * w2 * kq * kq;
    let of2 = (omega * force_amp).powi(2);
    let work = of2 * numerator / denominator;
    let work_minus = gm * of2 * kg1 * kg1 / denominator;
    WorkReport {
        omega,
        work,
        work_minus,
        work_plus: work - work_minus,
        numerator,
        denominator,
        regime,
    }
}

/// Work at an off-resonance frequency.
pub fn work(omega: f64, force_amp: f64, params: &ChainParams) -> Result<WorkReport> {
    params.validate()?;
    params.require_damping()?;
    let regime = classify(omega, params);
    if let BandLocation::OnFiniteResonance { j } = regime {
        return Err(Error::Resonance { omega, mode: j });
    }
    let split = endpoint_split(omega, params);
    Ok(work_at_split(&split, omega, force_amp, params, regime))
}

/// Work at the normal frequency `ω_j`, through the regularized endpoint sums.
pub fn work_resonant(j: usize, force_amp: f64, params: &ChainParams) -> Result<WorkReport> {
    params.validate()?;
    params.require_damping()?;
    let split = regularized_endpoints(j, params)?.as_split();
    let omega = params.mode_frequency(j);
    Ok(work_at_split(
        &split,
        omega,
        force_amp,
        params,
        BandLocation::OnFiniteResonance { j },
    ))
}

/// [`work`] off resonance, [`work_resonant`] on one.
pub fn work_or_resonant(omega: f64, force_amp: f64, params: &ChainParams) -> Result<WorkReport> {
    match classify(omega, params) {
        BandLocation::OnFiniteResonance { j } => work_resonant(j, force_amp, params),
        _ => work(omega, force_amp, params),
    }
}

/// `(ωF)²/4 · (1/γ₋ + 1/γ₊)`.
pub fn work_bound(omega: f64, force_amp: f64, params: &ChainParams) -> f64 {
    (omega * force_amp).powi(2) / 4.0 * (1.0 / params.gamma_minus + 1.0 / params.gamma_plus)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultimodeWork {
    pub omega: f64,
    pub work: f64,
    pub work_minus: f64,
    pub work_plus: f64,
    pub modes: Vec<(usize, WorkReport)>,
}

/// Harmonics of a periodic force do not interfere in the average: the work is
/// the sum of the single-mode works at `ℓω` with amplitude `F_ℓ`.
pub fn work_multimode(force: &ForceSpec, params: &ChainParams) -> Result<MultimodeWork> {
    let modes = force
        .modes
        .iter()
        .map(|&(ell, f)| {
            work_or_resonant(ell as f64 * force.omega, f, params)
                .map(|r| (ell, r))
                .map_err(|e| e.in_mode(ell))
        })
        .collect::<Result<Vec<_>>>()?;
    let sum = |f: fn(&WorkReport) -> f64| modes.iter().map(|(_, r)| f(r)).sum();
    Ok(MultimodeWork {
        omega: force.omega,
        work: sum(|r| r.work),
        work_minus: sum(|r| r.work_minus),
        work_plus: sum(|r| r.work_plus),
        modes,
    })
}

/// `(1/θ)∫₀^θ F(t) p̄ₙ(t) dt` by the periodic trapezoid rule on `samples` points.
pub fn work_quadrature(force: &ForceSpec, params: &ChainParams, samples: usize) -> Result<f64> {
    if samples < 4 * force.max_harmonic() {
        return Err(Error::config(format!(
            "need at least {} samples for harmonic {}",
            4 * force.max_harmonic(),
            force.max_harmonic()
        )));
    }
    params.require_damping()?;
    let modes = multimode_amplitudes(force, params)?;
    let theta = force.period();
    let n = params.n;
    let total: f64 = (0..samples)
        .map(|k| {
            let t = theta * k as f64 / samples as f64;
            let (_, p) = superposed_means(&modes, t);
            force.eval(t) * p[n]
        })
        .sum();
    Ok(total / samples as f64)
}

/// Default sample count for [`work_quadrature`].
pub fn default_samples(force: &ForceSpec) -> usize {
    16 * force.max_harmonic()
}
