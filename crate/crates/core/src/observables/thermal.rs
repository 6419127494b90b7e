//! Stationary Gaussian fluctuations of the unforced chain: the covariance,
//! temperature and energy profiles, and the heat current.
//!
//! The state `x = (q, p)` obeys `dx = −A x dt + noise` with
//! `A = [[0, −I], [L, Γ]]`, `L = −Δ_N + ω₀²`, `Γ = diag(2γ₋, 0, …, 0, 2γ₊)`
//! and noise intensity `4γ±T±` on `p₀`, `pₙ`. Its covariance solves
//! `AΣ + ΣAᵀ = Q`.
//!
//! Without pinning `L` has a zero mode and positions do not have a
//! stationary law; the chain is then described by the bond stretches
//! `rₓ = qₓ₊₁ − qₓ` and the momenta.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::chain::ChainParams;
use crate::error::{Error, Result};
use crate::linalg::lyapunov;

const TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Coordinates {
    /// `(q₀..qₙ, p₀..pₙ)`.
    Positions,
    /// `(r₀..rₙ₋₁, p₀..pₙ)`; unpinned chains only.
    Bonds,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThermalState {
    pub coordinates: Coordinates,
    pub covariance: DMatrix<f64>,
    /// `Tₓ = ⟨pₓ²⟩`.
    pub temperatures: Vec<f64>,
    /// `⟨eₓ⟩` with the bond `(x−1, x)` counted at `x`.
    pub energies: Vec<f64>,
    /// `⟨jₓ,ₓ₊₁⟩ = −⟨pₓ(qₓ₊₁ − qₓ)⟩` for `x = 0..n`.
    pub currents: Vec<f64>,
}

impl ThermalState {
    pub fn total_energy(&self) -> f64 {
        self.energies.iter().sum()
    }

    /// The current through the middle bond.
    pub fn current(&self) -> f64 {
        self.currents[self.currents.len() / 2]
    }
}

fn damping(params: &ChainParams, x: usize) -> f64 {
    if x == 0 {
        params.gamma_minus
    } else if x == params.n {
        params.gamma_plus
    } else {
        0.0
    }
}

/// `A` in position coordinates.
pub fn drift_matrix(params: &ChainParams) -> DMatrix<f64> {
    let s = params.sites();
    let mut a = DMatrix::zeros(2 * s, 2 * s);
    let w02 = params.omega0 * params.omega0;
    for x in 0..s {
        a[(x, s + x)] = -1.0;
        let degree = if x == 0 || x == params.n { 1.0 } else { 2.0 };
        a[(s + x, x)] = degree + w02;
        if x > 0 {
            a[(s + x, x - 1)] = -1.0;
        }
        if x < params.n {
            a[(s + x, x + 1)] = -1.0;
        }
    }
    a[(s, s)] += 2.0 * params.gamma_minus;
    a[(2 * s - 1, 2 * s - 1)] += 2.0 * params.gamma_plus;
    a
}

/// Noise covariance rate `Q` in position coordinates.
pub fn noise_matrix(params: &ChainParams) -> DMatrix<f64> {
    let s = params.sites();
    let mut q = DMatrix::zeros(2 * s, 2 * s);
    q[(s, s)] += 4.0 * params.gamma_minus * params.t_minus;
    q[(2 * s - 1, 2 * s - 1)] += 4.0 * params.gamma_plus * params.t_plus;
    q
}

fn bond_system(params: &ChainParams) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = params.n;
    let dim = 2 * n + 1;
    let p = |x: usize| n + x;
    let mut a = DMatrix::zeros(dim, dim);
    for x in 0..n {
        // drₓ = (pₓ₊₁ − pₓ) dt
        a[(x, p(x + 1))] = -1.0;
        a[(x, p(x))] = 1.0;
    }
    for x in 0..=n {
        // dpₓ = (rₓ − rₓ₋₁ − 2γₓpₓ) dt + noise
        if x < n {
            a[(p(x), x)] = -1.0;
        }
        if x > 0 {
            a[(p(x), x - 1)] = 1.0;
        }
        a[(p(x), p(x))] = 2.0 * damping(params, x);
    }
    let mut q = DMatrix::zeros(dim, dim);
    q[(p(0), p(0))] += 4.0 * params.gamma_minus * params.t_minus;
    q[(p(n), p(n))] += 4.0 * params.gamma_plus * params.t_plus;
    (a, q)
}

/// Position coordinates when pinned, bond coordinates otherwise.
pub fn thermal_state(params: &ChainParams) -> Result<ThermalState> {
    let coords = if params.omega0 > 0.0 {
        Coordinates::Positions
    } else {
        Coordinates::Bonds
    };
    thermal_state_in(params, coords)
}

pub fn thermal_state_in(params: &ChainParams, coordinates: Coordinates) -> Result<ThermalState> {
    params.validate()?;
    params.require_damping()?;
    let n = params.n;
    let w02 = params.omega0 * params.omega0;
    match coordinates {
        Coordinates::Positions => {
            if params.omega0 == 0.0 {
                return Err(Error::config(
                    "an unpinned chain has no stationary position law; use bond coordinates",
                ));
            }
            let sigma = lyapunov(&drift_matrix(params), &noise_matrix(params), TOLERANCE)?;
            let s = n + 1;
            let temperatures: Vec<f64> = (0..s).map(|x| sigma[(s + x, s + x)]).collect();
            let energies = (0..s)
                .map(|x| {
                    let bond = if x == 0 {
                        0.0
                    } else {
                        sigma[(x, x)] + sigma[(x - 1, x - 1)] - 2.0 * sigma[(x, x - 1)]
                    };
                    0.5 * (temperatures[x] + w02 * sigma[(x, x)] + bond)
                })
                .collect();
            let currents = (0..n).map(|x| -(sigma[(s + x, x + 1)] - sigma[(s + x, x)])).collect();
            Ok(ThermalState {
                coordinates,
                covariance: sigma,
                temperatures,
                energies,
                currents,
            })
        }
        Coordinates::Bonds => {
            if params.omega0 != 0.0 {
                return Err(Error::config("bond coordinates require omega0 = 0"));
            }
            let (a, q) = bond_system(params);
            let sigma = lyapunov(&a, &q, TOLERANCE)?;
            let temperatures: Vec<f64> = (0..=n).map(|x| sigma[(n + x, n + x)]).collect();
            let energies = (0..=n)
                .map(|x| {
                    let bond = if x == 0 { 0.0 } else { sigma[(x - 1, x - 1)] };
                    0.5 * (temperatures[x] + bond)
                })
                .collect();
            let currents = (0..n).map(|x| -sigma[(n + x, x)]).collect();
            Ok(ThermalState {
                coordinates,
                covariance: sigma,
                temperatures,
                energies,
                currents,
            })
        }
    }
}

/// Heat current coefficient `c` of the infinite chain with equal dampings,
/// `J = c(T₋ − T₊)`.
pub fn thermal_current_closed(gamma: f64, omega0: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) || !(omega0 >= 0.0 && omega0.is_finite()) {
        return Err(Error::domain(format!(
            "need gamma > 0, omega0 >= 0; got {gamma}, {omega0}"
        )));
    }
    let go = gamma * omega0;
    let root = (1.0 + 4.0 * gamma * gamma + go * go).sqrt();
    Ok(gamma / (1.0 + 4.0 * gamma * gamma + 2.0 * go * (go + root)))
}
