//! Large-chain limits.
//!
//! Outside the band the endpoint Green's functions converge and the work and
//! energy per chain have ordinary limits. Inside the band `G⁰`, `G¹`
//! oscillate in `n`: along `ω = ω(r)` they follow functions of `r` and the
//! fast coordinate `u = (n+1)r`, and `W(ω(r), n)` has a Young-measure limit
//! given by the law of `W̄(r, u)` with `u` uniform on `(0, 1)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::chain::{dispersion, ChainParams};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::greens::lattice_root;
use crate::observables::work_or_resonant;

/// Distance from an integer below which `u` counts as a pole.
pub const POLE_TOL: f64 = 1e-9;

/// `(Ḡ⁰(ω), Ḡ¹(ω)) = (λ/(1−λ), 0)` with `λ` the decaying lattice root.
pub fn limit_green_outside(omega: f64, omega0: f64) -> Result<(f64, f64)> {
    let lambda = lattice_root(omega, omega0)?;
    Ok((lambda / (1.0 - lambda), 0.0))
}

fn outside_work_from_h(h: f64, force_amp: f64, params: &ChainParams) -> f64 {
    let (gm, gp) = (params.gamma_minus, params.gamma_plus);
    let h2 = h * h;
    gp * force_amp * force_amp * h2 * (1.0 + 4.0 * gm * gm * h2)
        / (1.0 + 4.0 * (gp * gp + gm * gm) * h2 + 16.0 * (gp * gm * h2).powi(2))
}

/// `W̄(ω)` for `ω` strictly outside the band; all of it goes to the right
/// reservoir.
pub fn limit_work_outside(omega: f64, force_amp: f64, params: &ChainParams) -> Result<f64> {
    let (g0, _) = limit_green_outside(omega, params.omega0)?;
    Ok(outside_work_from_h(omega * g0, force_amp, params))
}

/// `W̄` at the lower and upper band edge, approached from outside.
pub fn limit_work_edges(force_amp: f64, params: &ChainParams) -> (f64, f64) {
    let lower = if params.gamma_plus > 0.0 {
        force_amp * force_amp / (4.0 * params.gamma_plus)
    } else {
        0.0
    };
    // λ → −1 at the upper edge, so Ḡ⁰ → −½
    let top = (params.omega0 * params.omega0 + 4.0).sqrt();
    (lower, outside_work_from_h(-0.5 * top, force_amp, params))
}

/// `K₀ = dḠ⁰/dω²` and `K₁ = d(Γ₀ − Γ₂)/dω²` outside the band.
pub fn outside_derivatives(omega: f64, omega0: f64) -> Result<(f64, f64)> {
    let lambda = lattice_root(omega, omega0)?;
    let m = omega0 * omega0 - omega * omega;
    let k0 = (m / (m + 4.0)).sqrt() / (m * m);
    let k1 = lambda * lambda / (1.0 - lambda * lambda);
    Ok((k0, k1))
}

/// Limit of the mechanical energy `E_mech(ω, n)` outside the band:
/// `F²/(4(1 + 4γ₊²H²)) · [K₀(ω² + ω₀²) + K₁]`, `H = ωḠ⁰`.
pub fn limit_energy_outside(omega: f64, force_amp: f64, params: &ChainParams) -> Result<f64> {
    let (g0, _) = limit_green_outside(omega, params.omega0)?;
    let (k0, k1) = outside_derivatives(omega, params.omega0)?;
    let h = omega * g0;
    let pot = omega * omega + params.omega0 * params.omega0;
    Ok(force_amp * force_amp / (4.0 * (1.0 + 4.0 * (params.gamma_plus * h).powi(2))) * (k0 * pot + k1))
}

/// `u` split into its fractional part and the parity of its floor.
#[derive(Clone, Copy, Debug)]
struct Reduced {
    f: f64,
    odd: bool,
}

impl Reduced {
    fn new(u: f64) -> Self {
        let fl = u.floor();
        Reduced {
            f: u - fl,
            odd: (fl as i64).rem_euclid(2) == 1,
        }
    }

    fn sign(&self) -> f64 {
        if self.odd {
            -1.0
        } else {
            1.0
        }
    }

    fn pole_distance(&self) -> f64 {
        self.f.min(1.0 - self.f)
    }
}

fn check_r(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("r = {r} outside (0, 1)")))
    }
}

/// The scaling coordinates `(r, u) = (r(ω), (n+1) r(ω))` of an in-band frequency.
pub fn scaling_coordinates(omega: f64, params: &ChainParams) -> Result<(f64, f64)> {
    let r = crate::chain::inverse_dispersion(omega, params.omega0)?;
    Ok((r, params.sites() as f64 * r))
}

/// Endpoint limits multiplied through by `κ = sin(πf)`, all finite at the poles.
#[derive(Clone, Copy, Debug)]
struct Scaled {
    kappa: f64,
    kg0: f64,
    kg1: f64,
    kq: f64,
}

fn scaled_limits(r: f64, red: Reduced) -> Scaled {
    let c = (PI * r / 2.0).cos() / (PI * r / 2.0).sin();
    let pf = PI * red.f;
    let kappa = pf.sin();
    let kg0 = -0.5 * (c * pf.cos() + kappa);
    let kg1 = -red.sign() * 0.5 * c;
    // Ḡ⁰² − Ḡ¹² = A_f B_f; only B_f has a pole
    let a_f = -0.5 + 0.5 * c * (pf / 2.0).tan();
    let kb_f = -0.5 * kappa - c * (pf / 2.0).cos().powi(2);
    Scaled {
        kappa,
        kg0,
        kg1,
        kq: a_f * kb_f,
    }
}

/// `(W̄(r,u), W̄⁻(r,u))`, evaluated in a form that stays finite at integer `u`.
pub fn scaling_work(r: f64, u: f64, force_amp: f64, params: &ChainParams) -> Result<(f64, f64)> {
    check_r(r)?;
    let omega = dispersion(r, params.omega0)?;
    let s = scaled_limits(r, Reduced::new(u));
    let (gm, gp) = (params.gamma_minus, params.gamma_plus);
    let w2 = omega * omega;
    let num = gm * s.kg1 * s.kg1 + gp * s.kg0 * s.kg0 + 4.0 * gm * gm * gp * w2 * s.kq * s.kq;
    let den = s.kappa * s.kappa
        + 8.0 * gm * gp * w2 * s.kg1 * s.kg1
        + 4.0 * w2 * (gm * gm + gp * gp) * s.kg0 * s.kg0
        + 16.0 * gm * gm * gp * gp * w2 * w2 * s.kq * s.kq;
    let of2 = w2 * force_amp * force_amp;
    Ok((of2 * num / den, gm * of2 * s.kg1 * s.kg1 / den))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub r: f64,
    pub u: f64,
    pub gbar0: f64,
    pub gbar1: f64,
    pub hbar: f64,
    pub wbar: f64,
    pub wbar_minus: f64,
    /// Limit of `E_mech(ω(r), n)/n`.
    pub ebar: f64,
}

pub fn scaling_point(r: f64, u: f64, force_amp: f64, params: &ChainParams) -> Result<ScalingPoint> {
    check_r(r)?;
    let red = Reduced::new(u);
    if red.pole_distance() < POLE_TOL {
        return Err(Error::Pole { u, tolerance: POLE_TOL });
    }
    let omega = dispersion(r, params.omega0)?;
    let c = (PI * r / 2.0).cos() / (PI * r / 2.0).sin();
    let pf = PI * red.f;
    let gbar0 = -0.5 * (c * pf.cos() / pf.sin() + 1.0);
    let gbar1 = -red.sign() * c / (2.0 * pf.sin());
    let a_f = -0.5 + 0.5 * c * (pf / 2.0).tan();
    let b_f = -0.5 - 0.5 * c / (pf / 2.0).tan();
    let hbar = 0.5 * if red.odd { a_f } else { b_f };
    let (wbar, wbar_minus) = scaling_work(r, u, force_amp, params)?;

    let i = Complex64::i();
    let (gm, gp) = (params.gamma_minus, params.gamma_plus);
    let q = a_f * b_f;
    let d_tilde = 1.0 - 4.0 * gp * gm * omega * omega * q + 2.0 * i * omega * (gp + gm) * gbar0;
    let a = (1.0 + 2.0 * i * omega * gm * gbar0) / d_tilde;
    let b = -2.0 * i * omega * gm * gbar1 / d_tilde;
    let s2 = (PI * r / 2.0).sin().powi(2);
    let sin2 = pf.sin().powi(2);
    let i0 = 1.0 / (8.0 * s2 * sin2);
    let i1 = red.sign() * pf.cos() / (8.0 * s2 * sin2);
    let j0 = 1.0 / (2.0 * sin2);
    let j1 = red.sign() * pf.cos() / (2.0 * sin2);
    let diag = a.norm_sqr() + b.norm_sqr();
    let cross = 2.0 * (a * b.conj()).re;
    let pot = omega * omega + params.omega0 * params.omega0;
    let ebar = force_amp * force_amp / 4.0 * (pot * (diag * i0 + cross * i1) + diag * j0 + cross * j1);
    Ok(ScalingPoint {
        r,
        u,
        gbar0,
        gbar1,
        hbar,
        wbar,
        wbar_minus,
        ebar,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct YoungHistogram {
    pub r: f64,
    pub bin_edges: Vec<f64>,
    pub masses: Vec<f64>,
    pub u_samples: usize,
    /// `∫₀¹ W̄(r,u) du` on the same midpoint grid.
    pub mean: f64,
}

/// Law of `W̄(r, u)` for `u` uniform on `(0,1)`, from a midpoint grid in `u`
/// (which never touches the poles at the integers). Bins span `[0, W_max]`
/// with `W_max = F²/4 (1/γ₋ + 1/γ₊)`, or the sample maximum when one end is
/// undamped.
pub fn young_histogram(
    r: f64,
    force_amp: f64,
    params: &ChainParams,
    u_samples: usize,
    bins: usize,
) -> Result<YoungHistogram> {
    young_histogram_with(r, force_amp, params, u_samples, bins, Exec::default())
}

pub fn young_histogram_with(
    r: f64,
    force_amp: f64,
    params: &ChainParams,
    u_samples: usize,
    bins: usize,
    exec: Exec,
) -> Result<YoungHistogram> {
    if u_samples < 1000 || bins < 16 {
        return Err(Error::config("need u_samples >= 1000 and bins >= 16"));
    }
    params.require_damping()?;
    check_r(r)?;
    let values = exec
        .map_range(0..u_samples, |k| {
            scaling_work(r, (k as f64 + 0.5) / u_samples as f64, force_amp, params).map(|w| w.0)
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let bound = force_amp * force_amp / 4.0 * (1.0 / params.gamma_minus + 1.0 / params.gamma_plus);
    let top = if bound.is_finite() {
        bound
    } else {
        values.iter().cloned().fold(0.0, f64::max)
    };
    let width = top / bins as f64;
    let bin_edges = (0..=bins).map(|k| k as f64 * width).collect();
    let mut masses = vec![0.0; bins];
    let unit = 1.0 / u_samples as f64;
    for &v in &values {
        let k = if width > 0.0 {
            ((v / width) as usize).min(bins - 1)
        } else {
            0
        };
        masses[k] += unit;
    }
    let mean = values.iter().sum::<f64>() * unit;
    Ok(YoungHistogram {
        r,
        bin_edges,
        masses,
        u_samples,
        mean,
    })
}

/// `(1/2δ)∫_{r−δ}^{r+δ} W(ω(s), n) ds` on a grid of `per_mode` points per
/// mode spacing `1/(n+1)`.
pub fn finite_window_average(
    r: f64,
    half_width: f64,
    force_amp: f64,
    params: &ChainParams,
    per_mode: usize,
) -> Result<f64> {
    check_window(r, half_width)?;
    let points = ((2.0 * half_width * params.sites() as f64) * per_mode as f64).ceil() as usize;
    let vals = Exec::default().map_range(0..points, |k| {
        let s = r - half_width + 2.0 * half_width * (k as f64 + 0.5) / points as f64;
        work_or_resonant(dispersion(s, params.omega0)?, force_amp, params).map(|w| w.work)
    });
    let total = vals.into_iter().sum::<Result<f64>>()?;
    Ok(total / points as f64)
}

/// `(1/2δ)∫_{r−δ}^{r+δ} ∫₀¹ W̄(s, u) du ds`.
pub fn limit_window_average(
    r: f64,
    half_width: f64,
    force_amp: f64,
    params: &ChainParams,
    r_points: usize,
    u_samples: usize,
) -> Result<f64> {
    check_window(r, half_width)?;
    let vals = Exec::default().map_range(0..r_points, |k| {
        let s = r - half_width + 2.0 * half_width * (k as f64 + 0.5) / r_points as f64;
        let mut acc = 0.0;
        for m in 0..u_samples {
            acc += scaling_work(s, (m as f64 + 0.5) / u_samples as f64, force_amp, params)?.0;
        }
        Ok(acc / u_samples as f64)
    });
    Ok(vals.into_iter().sum::<Result<f64>>()? / r_points as f64)
}

fn check_window(r: f64, half_width: f64) -> Result<()> {
    if half_width > 0.0 && r - half_width > 0.0 && r + half_width < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("window {r} ± {half_width} leaves (0, 1)")))
    }
}
