//! Frequency scans and their serialization.
//!
//! Every scan evaluates its grid under an [`Exec`] policy and returns rows in
//! grid order. Rows carry the regime tag of their frequency. Work and energy
//! scans also insert a row at every normal frequency inside the grid range,
//! evaluated through the regularized path.

use std::io::Write;

use serde::Serialize;

use crate::asymptotics::{
    limit_energy_outside, limit_work_outside, scaling_coordinates, scaling_point, young_histogram_with, YoungHistogram,
};
use crate::chain::{classify, BandLocation, ChainParams};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::observables::{mech_currents, mech_energy_any, thermal_state, work_or_resonant, work_resonant};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum OmegaGrid {
    Range { min: f64, max: f64, count: usize },
    List(Vec<f64>),
}

impl OmegaGrid {
    pub fn validate(&self) -> Result<()> {
        match self {
            OmegaGrid::Range { min, max, count } => {
                if *count < 2 || !min.is_finite() || !max.is_finite() || min >= max {
                    return Err(Error::config(format!(
                        "grid needs count >= 2 and min < max, got {min}..{max} x {count}"
                    )));
                }
            }
            OmegaGrid::List(v) => {
                if v.is_empty() || v.iter().any(|w| !w.is_finite()) {
                    return Err(Error::config("grid list must be non-empty and finite"));
                }
            }
        }
        Ok(())
    }

    /// Points in order, endpoints included.
    pub fn points(&self) -> Vec<f64> {
        match self {
            OmegaGrid::Range { min, max, count } => (0..*count)
                .map(|k| min + (max - min) * k as f64 / (*count - 1) as f64)
                .collect(),
            OmegaGrid::List(v) => v.clone(),
        }
    }

    fn span(&self) -> (f64, f64) {
        let p = self.points();
        let lo = p.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// Normal frequencies in `[lo, hi]` that the grid itself misses.
fn extra_resonances(grid: &[f64], lo: f64, hi: f64, params: &ChainParams) -> Vec<usize> {
    let hit: Vec<usize> = grid
        .iter()
        .filter_map(|&w| match classify(w, params) {
            BandLocation::OnFiniteResonance { j } => Some(j),
            _ => None,
        })
        .collect();
    (0..=params.n)
        .filter(|&j| {
            let w = params.mode_frequency(j);
            w >= lo && w <= hi && !hit.contains(&j)
        })
        .collect()
}

/// Grid points merged with the missing resonant frequencies, sorted by omega.
fn merged(grid: &OmegaGrid, params: &ChainParams) -> Vec<f64> {
    let pts = grid.points();
    let (lo, hi) = grid.span();
    let mut all = pts.clone();
    all.extend(
        extra_resonances(&pts, lo, hi, params)
            .into_iter()
            .map(|j| params.mode_frequency(j)),
    );
    all.sort_by(f64::total_cmp);
    all
}

fn mode_of(regime: BandLocation) -> Option<usize> {
    match regime {
        BandLocation::OnFiniteResonance { j } => Some(j),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorkRow {
    pub omega: f64,
    #[serde(rename = "W")]
    pub work: f64,
    #[serde(rename = "W_minus")]
    pub work_minus: f64,
    #[serde(rename = "W_plus")]
    pub work_plus: f64,
    pub regime: &'static str,
    pub mode: Option<usize>,
    #[serde(rename = "N")]
    pub numerator: f64,
    #[serde(rename = "D")]
    pub denominator: f64,
}

pub fn work_scan(grid: &OmegaGrid, force_amp: f64, params: &ChainParams, exec: Exec) -> Result<Vec<WorkRow>> {
    grid.validate()?;
    params.validate()?;
    params.require_damping()?;
    let omegas = merged(grid, params);
    exec.map(&omegas, |&w| {
        let r = match classify(w, params) {
            BandLocation::OnFiniteResonance { j } => work_resonant(j, force_amp, params)?,
            _ => work_or_resonant(w, force_amp, params)?,
        };
        Ok(WorkRow {
            // resonance rows report the exact normal frequency
            omega: if r.regime.is_resonant() { r.omega } else { w },
            work: r.work,
            work_minus: r.work_minus,
            work_plus: r.work_plus,
            regime: r.regime.tag(),
            mode: mode_of(r.regime),
            numerator: r.numerator,
            denominator: r.denominator,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyRow {
    pub omega: f64,
    pub e_mech: f64,
    /// `E_mech / n`.
    pub e_mech_per_site: f64,
    /// `ē(r, (n+1)r)` inside the band, away from the poles in `u`.
    pub e_scaled: Option<f64>,
    /// `lim E_mech` outside the band.
    pub e_limit: Option<f64>,
    pub regime: &'static str,
    pub mode: Option<usize>,
}

pub fn energy_scan(grid: &OmegaGrid, force_amp: f64, params: &ChainParams, exec: Exec) -> Result<Vec<EnergyRow>> {
    grid.validate()?;
    params.validate()?;
    params.require_damping()?;
    let omegas = merged(grid, params);
    exec.map(&omegas, |&w| {
        let regime = classify(w, params);
        let e = mech_energy_any(w, force_amp, params)?;
        let (e_scaled, e_limit) = match regime {
            BandLocation::BelowBand | BandLocation::AboveBand => {
                (None, limit_energy_outside(w, force_amp, params).ok())
            }
            _ => {
                let scaled = scaling_coordinates(w, params)
                    .and_then(|(r, u)| scaling_point(r, u, force_amp, params))
                    .ok()
                    .map(|s| s.ebar);
                (scaled, None)
            }
        };
        Ok(EnergyRow {
            omega: w,
            e_mech: e,
            e_mech_per_site: e / params.n as f64,
            e_scaled,
            e_limit,
            regime: regime.tag(),
            mode: mode_of(regime),
        })
    })
    .into_iter()
    .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurrentRow {
    pub omega: f64,
    /// Mechanical current `−W⁻`.
    pub j_mech: f64,
    /// Thermal current, independent of the force.
    pub j_th: f64,
    pub j_total: f64,
    /// Largest deviation of the bond-resolved mechanical current from `j_mech`.
    pub profile_deviation: f64,
    pub regime: &'static str,
}

pub fn current_scan(grid: &OmegaGrid, force_amp: f64, params: &ChainParams, exec: Exec) -> Result<Vec<CurrentRow>> {
    grid.validate()?;
    params.validate()?;
    params.require_damping()?;
    let j_th = thermal_state(params)?.current();
    let omegas = grid.points();
    exec.map(&omegas, |&w| {
        let m = mech_currents(w, force_amp, params)?;
        Ok(CurrentRow {
            omega: w,
            j_mech: m.current,
            j_th,
            j_total: m.current + j_th,
            profile_deviation: m.max_deviation(),
            regime: classify(w, params).tag(),
        })
    })
    .into_iter()
    .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitRow {
    pub omega: f64,
    #[serde(rename = "W")]
    pub work: f64,
    /// `W̄(ω)` outside the band, `W̄(r, (n+1)r)` inside.
    #[serde(rename = "W_limit")]
    pub work_limit: Option<f64>,
    pub e_mech: f64,
    /// `lim E_mech` outside the band, `n·ē(r, (n+1)r)` inside.
    pub e_limit: Option<f64>,
    pub regime: &'static str,
}

/// Finite-`n` values next to their large-`n` counterparts.
pub fn limit_scan(grid: &OmegaGrid, force_amp: f64, params: &ChainParams, exec: Exec) -> Result<Vec<LimitRow>> {
    grid.validate()?;
    params.validate()?;
    params.require_damping()?;
    let omegas = grid.points();
    exec.map(&omegas, |&w| {
        let regime = classify(w, params);
        let finite = work_or_resonant(w, force_amp, params)?;
        let e = mech_energy_any(w, force_amp, params)?;
        let (wl, el) = match regime {
            BandLocation::BelowBand | BandLocation::AboveBand => (
                limit_work_outside(w, force_amp, params).ok(),
                limit_energy_outside(w, force_amp, params).ok(),
            ),
            _ => match scaling_coordinates(w, params).and_then(|(r, u)| scaling_point(r, u, force_amp, params)) {
                Ok(s) => (Some(s.wbar), Some(s.ebar * params.n as f64)),
                Err(_) => (None, None),
            },
        };
        Ok(LimitRow {
            omega: w,
            work: finite.work,
            work_limit: wl,
            e_mech: e,
            e_limit: el,
            regime: regime.tag(),
        })
    })
    .into_iter()
    .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct YoungRow {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub mass: f64,
}

pub fn young_rows(
    r: f64,
    force_amp: f64,
    params: &ChainParams,
    u_samples: usize,
    bins: usize,
    exec: Exec,
) -> Result<(YoungHistogram, Vec<YoungRow>)> {
    let h = young_histogram_with(r, force_amp, params, u_samples, bins, exec)?;
    let rows = h
        .masses
        .iter()
        .enumerate()
        .map(|(k, &mass)| YoungRow {
            bin_lo: h.bin_edges[k],
            bin_hi: h.bin_edges[k + 1],
            mass,
        })
        .collect();
    Ok((h, rows))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Header row plus one record per row; floats in shortest round-trip form,
/// absent values as empty fields.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `{"meta": …, "rows": […]}`.
pub fn write_json<T: Serialize, M: Serialize, W: Write>(meta: &M, rows: &[T], mut out: W) -> Result<()> {
    #[derive(Serialize)]
    struct Doc<'a, M, T> {
        meta: &'a M,
        rows: &'a [T],
    }
    serde_json::to_writer_pretty(&mut out, &Doc { meta, rows })?;
    writeln!(out)?;
    Ok(())
}

pub fn write_rows<T: Serialize, M: Serialize, W: Write>(format: Format, meta: &M, rows: &[T], out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(rows, out),
        Format::Json => write_json(meta, rows, out),
    }
}

/// A gnuplot script plotting columns `ys` against column `x` of a CSV file,
/// with resonance rows as separate red points when the file has a `regime`
/// column.
pub fn gnuplot_script(csv_path: &str, header: &[&str], x: &str, ys: &[&str], output: &str) -> Result<String> {
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .map(|i| i + 1)
            .ok_or_else(|| Error::config(format!("no column {name}")))
    };
    let xc = col(x)?;
    let regime = header.iter().position(|h| *h == "regime").map(|i| i + 1);
    let mut s = String::new();
    s.push_str("set datafile separator ','\nset key autotitle columnhead\n");
    s.push_str(&format!(
        "set terminal pngcairo size 900,600\nset output '{output}'\nset xlabel '{x}'\n"
    ));
    let mut plots = Vec::new();
    for y in ys {
        let yc = col(y)?;
        plots.push(format!("'{csv_path}' using {xc}:{yc} with lines title '{y}'"));
        if let Some(rc) = regime {
            plots.push(format!(
                "'{csv_path}' using {xc}:(strcol({rc}) eq 'resonance' ? ${yc} : 1/0) with points pt 7 lc rgb 'red' title '{y} at resonance'"
            ));
        }
    }
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    Ok(s)
}

/// Column names of a row type, in CSV order.
pub fn header_of<T: Serialize>(row: &T) -> Result<Vec<String>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.serialize(row)?;
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let text = String::from_utf8_lossy(&bytes);
    Ok(text
        .lines()
        .next()
        .unwrap_or("")
        .split(',')
        .map(str::to_owned)
        .collect())
}
