//! Fourier amplitudes of the periodic means `q̄ₓ(t) = Re(q̃ₓ e^{iωt})` under a
//! boundary force `F cos(ωt)` at site `n`.
//!
//! The amplitudes solve `(Δ_N + ω² − ω₀² − 2iωγₓ) q̃ = −F δ_{·,n}`, with
//! damping only at the two ends. [`amplitudes_via_greens`] expresses the
//! solution through the undamped Green's functions; [`amplitudes_via_solve`]
//! eliminates the tridiagonal system directly and serves as its oracle.

use num_complex::Complex64;

use crate::chain::{ChainParams, ForceSpec};
use crate::error::{Error, Result};
use crate::greens::{endpoint_greens, greens_table, GreensTable};

#[derive(Clone, Debug, PartialEq)]
pub struct ResponseAmplitudes {
    pub omega: f64,
    pub force_amp: f64,
    pub q_tilde: Vec<Complex64>,
    pub p_tilde: Vec<Complex64>,
    /// Coefficients of `q̃ₓ = F(a G¹ₓ + b G⁰ₓ)`; `None` on a resonance,
    /// where the Green's functions do not exist.
    pub a: Option<Complex64>,
    pub b: Option<Complex64>,
    pub n_tilde: Option<Complex64>,
    pub d_tilde: Option<Complex64>,
}

impl ResponseAmplitudes {
    fn zero_like(omega: f64, force_amp: f64, sites: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); sites];
        ResponseAmplitudes {
            omega,
            force_amp,
            q_tilde: z.clone(),
            p_tilde: z,
            a: None,
            b: None,
            n_tilde: None,
            d_tilde: None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Coefficients {
    a: Complex64,
    b: Complex64,
    n_tilde: Complex64,
    d_tilde: Complex64,
}

fn coefficients(omega: f64, g0: f64, g1: f64, params: &ChainParams) -> Coefficients {
    let i = Complex64::i();
    let (gm, gp) = (params.gamma_minus, params.gamma_plus);
    let q = g0 * g0 - g1 * g1;
    let d_tilde = 1.0 - 4.0 * gp * gm * omega * omega * q + 2.0 * i * omega * (gp + gm) * g0;
    Coefficients {
        a: (1.0 + 2.0 * i * omega * gm * g0) / d_tilde,
        b: -2.0 * i * omega * gm * g1 / d_tilde,
        n_tilde: g0 + 2.0 * i * omega * gm * q,
        d_tilde,
    }
}

fn with_momenta(omega: f64, q_tilde: Vec<Complex64>) -> (Vec<Complex64>, Vec<Complex64>) {
    let p = q_tilde.iter().map(|q| Complex64::i() * omega * q).collect();
    (q_tilde, p)
}

/// `q̃ₓ = F(a G¹ₓ + b G⁰ₓ)`. Negative `ω` gives the complex conjugate response.
pub fn amplitudes_via_greens(omega: f64, force_amp: f64, params: &ChainParams) -> Result<ResponseAmplitudes> {
    params.validate()?;
    let table = greens_table(omega.abs(), params)?;
    Ok(amplitudes_from_table(omega, force_amp, &table, params))
}

/// As [`amplitudes_via_greens`], reusing a table computed at `|ω|`.
pub fn amplitudes_from_table(
    omega: f64,
    force_amp: f64,
    table: &GreensTable,
    params: &ChainParams,
) -> ResponseAmplitudes {
    let c = coefficients(omega, table.g0, table.g1, params);
    let q = table
        .g1_site
        .iter()
        .zip(&table.g0_site)
        .map(|(&g1x, &g0x)| force_amp * (c.a * g1x + c.b * g0x))
        .collect();
    let (q_tilde, p_tilde) = with_momenta(omega, q);
    ResponseAmplitudes {
        omega,
        force_amp,
        q_tilde,
        p_tilde,
        a: Some(c.a),
        b: Some(c.b),
        n_tilde: Some(c.n_tilde),
        d_tilde: Some(c.d_tilde),
    }
}

/// Complex Thomas elimination of the damped Neumann system. Works on a
/// resonance as long as some damping is present.
pub fn amplitudes_via_solve(omega: f64, force_amp: f64, params: &ChainParams) -> Result<ResponseAmplitudes> {
    params.validate()?;
    let n = params.n;
    let shift = omega * omega - params.omega0 * params.omega0;
    let diag = |x: usize| {
        let gamma = if x == 0 {
            params.gamma_minus
        } else if x == n {
            params.gamma_plus
        } else {
            0.0
        };
        let degree = if x == 0 || x == n { 1.0 } else { 2.0 };
        Complex64::new(shift - degree, -2.0 * omega * gamma)
    };
    // unit off-diagonals; c[x] is the modified super-diagonal
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut d = vec![Complex64::new(0.0, 0.0); n + 1];
    let rhs = |x: usize| if x == n { -force_amp } else { 0.0 };
    let mut prev_c = Complex64::new(0.0, 0.0);
    let mut prev_d = Complex64::new(0.0, 0.0);
    for x in 0..=n {
        let pivot = if x == 0 { diag(0) } else { diag(x) - prev_c };
        let scale = diag(x).norm() + 2.0;
        if pivot.norm() <= 1e-13 * scale {
            return Err(Error::SingularSystem {
                row: x,
                pivot: pivot.norm(),
            });
        }
        c[x] = if x < n { 1.0 / pivot } else { Complex64::new(0.0, 0.0) };
        d[x] = (rhs(x) - if x == 0 { Complex64::new(0.0, 0.0) } else { prev_d }) / pivot;
        prev_c = c[x];
        prev_d = d[x];
    }
    let mut q = vec![Complex64::new(0.0, 0.0); n + 1];
    q[n] = d[n];
    for x in (0..n).rev() {
        q[x] = d[x] - c[x] * q[x + 1];
    }
    let (q_tilde, p_tilde) = with_momenta(omega, q);
    let mut amps = ResponseAmplitudes {
        q_tilde,
        p_tilde,
        ..ResponseAmplitudes::zero_like(omega, force_amp, 0)
    };
    if let Ok((g0, g1)) = endpoint_greens(omega.abs(), params) {
        let c = coefficients(omega, g0, g1, params);
        amps.a = Some(c.a);
        amps.b = Some(c.b);
        amps.n_tilde = Some(c.n_tilde);
        amps.d_tilde = Some(c.d_tilde);
    }
    Ok(amps)
}

/// Green's-function route off resonance, the direct solve on one.
pub fn amplitudes(omega: f64, force_amp: f64, params: &ChainParams) -> Result<ResponseAmplitudes> {
    match amplitudes_via_greens(omega, force_amp, params) {
        Err(Error::Resonance { .. }) if params.gamma_minus + params.gamma_plus > 0.0 => {
            amplitudes_via_solve(omega, force_amp, params)
        }
        r => r,
    }
}

/// `(q̄(t), p̄(t))`.
pub fn periodic_means(amps: &ResponseAmplitudes, t: f64) -> (Vec<f64>, Vec<f64>) {
    let phase = Complex64::from_polar(1.0, amps.omega * t);
    let re = |v: &[Complex64]| v.iter().map(|z| (z * phase).re).collect();
    (re(&amps.q_tilde), re(&amps.p_tilde))
}

/// One response per Fourier mode `ℓ`, at frequency `ℓω` and amplitude `F_ℓ`.
pub fn multimode_amplitudes(force: &ForceSpec, params: &ChainParams) -> Result<Vec<ResponseAmplitudes>> {
    force
        .modes
        .iter()
        .map(|&(ell, f)| amplitudes(ell as f64 * force.omega, f, params).map_err(|e| e.in_mode(ell)))
        .collect()
}

/// Means of a multimode force at time `t`, by superposition.
pub fn superposed_means(modes: &[ResponseAmplitudes], t: f64) -> (Vec<f64>, Vec<f64>) {
    let sites = modes.first().map_or(0, |m| m.q_tilde.len());
    let (mut q, mut p) = (vec![0.0; sites], vec![0.0; sites]);
    for m in modes {
        let (qm, pm) = periodic_means(m, t);
        for x in 0..sites {
            q[x] += qm[x];
            p[x] += pm[x];
        }
    }
    (q, p)
}
