//! Period-averaged mechanical energy of the phase-locked means and the
//! mechanical energy current.
//!
//! Site energies are `eₓ = ½p̄ₓ² + ½ω₀²q̄ₓ² + ½(q̄ₓ − q̄ₓ₋₁)²` with
//! `q̄₋₁ := q̄₀`, so every bond is counted once, at its right end.

use serde::Serialize;

use crate::chain::{classify, BandLocation, ChainParams};
use crate::error::{Error, Result};
use crate::greens::{endpoint_derivatives, greens_table};
use crate::response::{amplitudes, amplitudes_from_table, periodic_means, ResponseAmplitudes};

use super::work::work_or_resonant;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MechanicalEnergy {
    pub omega: f64,
    /// `⟨eₓ⟩` for `x = 0..=n`.
    pub site: Vec<f64>,
    /// Closed form through `d/dω²` of the endpoint sums.
    pub total: f64,
}

impl MechanicalEnergy {
    pub fn site_sum(&self) -> f64 {
        self.site.iter().sum()
    }
}

/// `∇*fₓ = fₓ − fₓ₋₁`, `f₋₁ = f₀`.
fn backward_gradient(f: &[f64], x: usize) -> f64 {
    if x == 0 {
        0.0
    } else {
        f[x] - f[x - 1]
    }
}

/// Mechanical energy profile and total at an off-resonance frequency.
///
/// Per site, `⟨eₓ⟩ = F²Mₓ/(4D)` with
/// `Mₓ = (ω²+ω₀²)[G¹ₓ² + (2ωγ₋)²𝒢ₓ²] + (∇*G¹ₓ)² + (2ωγ₋)²(∇*𝒢ₓ)²`,
/// `𝒢ₓ = G⁰G¹ₓ − G¹G⁰ₓ`. The total is
/// `E = F²/4 [(|a|²+|b|²)((ω²+ω₀²)I₀ + J₀) + 2Re(a b̄)((ω²+ω₀²)I₁ + J₁)]`.
pub fn mech_energy(omega: f64, force_amp: f64, params: &ChainParams) -> Result<MechanicalEnergy> {
    params.validate()?;
    let table = greens_table(omega, params)?;
    let (g0, g1) = (table.g0, table.g1);
    let (gm, gp) = (params.gamma_minus, params.gamma_plus);
    let w2 = omega * omega;
    let q = g0 * g0 - g1 * g1;
    let d = 1.0
        + 8.0 * gm * gp * w2 * g1 * g1
        + 4.0 * w2 * (gm * gm + gp * gp) * g0 * g0
        + 16.0 * gm * gm * gp * gp * w2 * w2 * q * q;
    let c = (2.0 * omega * gm).powi(2);
    let mixed: Vec<f64> = (0..=params.n)
        .map(|x| g0 * table.g1_site[x] - g1 * table.g0_site[x])
        .collect();
    let pot = w2 + params.omega0 * params.omega0;
    let f2 = force_amp * force_amp;
    let site = (0..=params.n)
        .map(|x| {
            let m = pot * (table.g1_site[x].powi(2) + c * mixed[x].powi(2))
                + backward_gradient(&table.g1_site, x).powi(2)
                + c * backward_gradient(&mixed, x).powi(2);
            f2 * m / (4.0 * d)
        })
        .collect();

    let amps = amplitudes_from_table(omega, force_amp, &table, params);
    let (a, b) = (amps.a.unwrap(), amps.b.unwrap());
    let der = endpoint_derivatives(omega, params)?;
    let diag = a.norm_sqr() + b.norm_sqr();
    let cross = 2.0 * (a * b.conj()).re;
    let total = f2 / 4.0 * (diag * (pot * der.i0 + der.j0) + cross * (pot * der.i1 + der.j1));
    Ok(MechanicalEnergy { omega, site, total })
}

/// `⟨eₓ⟩` straight from the amplitudes: `¼[|p̃ₓ|² + ω₀²|q̃ₓ|² + |q̃ₓ − q̃ₓ₋₁|²]`.
pub fn site_energies(amps: &ResponseAmplitudes, params: &ChainParams) -> Vec<f64> {
    let q = &amps.q_tilde;
    (0..q.len())
        .map(|x| {
            let grad = if x == 0 { 0.0 } else { (q[x] - q[x - 1]).norm_sqr() };
            0.25 * (amps.p_tilde[x].norm_sqr() + params.omega0.powi(2) * q[x].norm_sqr() + grad)
        })
        .collect()
}

/// Mechanical energy at any frequency of a damped chain, resonances
/// included, from the amplitudes.
pub fn mech_energy_any(omega: f64, force_amp: f64, params: &ChainParams) -> Result<f64> {
    match classify(omega, params) {
        BandLocation::OnFiniteResonance { .. } => {
            params.require_damping()?;
            Ok(site_energies(&amplitudes(omega, force_amp, params)?, params)
                .iter()
                .sum())
        }
        _ => Ok(mech_energy(omega, force_amp, params)?.total),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MechCurrents {
    /// `J = −W⁻`, the same across every bond.
    pub current: f64,
    /// `⟨−p̄ₓ(q̄ₓ₊₁ − q̄ₓ)⟩` for `x = 0..n`, by quadrature over one period.
    pub profile: Vec<f64>,
}

impl MechCurrents {
    pub fn max_deviation(&self) -> f64 {
        self.profile.iter().fold(0.0f64, |m, j| m.max((j - self.current).abs()))
    }

    pub fn is_flat(&self, tolerance: f64) -> bool {
        self.max_deviation() <= tolerance
    }
}

const PROFILE_SAMPLES: usize = 64;

pub fn mech_currents(omega: f64, force_amp: f64, params: &ChainParams) -> Result<MechCurrents> {
    params.require_damping()?;
    let report = work_or_resonant(omega, force_amp, params)?;
    let amps = amplitudes(omega, force_amp, params)?;
    let theta = 2.0 * std::f64::consts::PI / omega;
    let n = params.n;
    let mut profile = vec![0.0; n];
    for k in 0..PROFILE_SAMPLES {
        let (q, p) = periodic_means(&amps, theta * k as f64 / PROFILE_SAMPLES as f64);
        for x in 0..n {
            profile[x] -= p[x] * (q[x + 1] - q[x]) / PROFILE_SAMPLES as f64;
        }
    }
    if profile.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite current profile".into()));
    }
    Ok(MechCurrents {
        current: -report.work_minus,
        profile,
    })
}
