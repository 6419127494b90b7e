use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

use forced_chain::chain::{dispersion, inverse_dispersion};
use forced_chain::observables::{thermal_state, work_multimode};
use forced_chain::scan::{
    current_scan, energy_scan, gnuplot_script, header_of, limit_scan, work_scan, write_rows, young_rows, OmegaGrid,
};
use forced_chain::selftest::run_selftest;
use forced_chain::simulate::{run, SimConfig};
use forced_chain::{ChainParams, Exec};

use crate::args::{
    load_file, resolve, usage, Command, FileConfig, Resolved, ScanArgs, SelftestArgs, SimArgs, YoungArgs,
};

/// Maps library errors on bad input to usage errors.
fn lib<T>(r: forced_chain::Result<T>) -> anyhow::Result<T> {
    r.map_err(|e| match e {
        forced_chain::Error::Config(_) | forced_chain::Error::Domain(_) => usage(e.to_string()),
        other => other.into(),
    })
}

fn exec_for(threads: Option<usize>) -> anyhow::Result<Exec> {
    match threads {
        Some(0) => Err(usage("--threads must be at least 1")),
        Some(1) => Ok(Exec::Sequential),
        #[cfg(feature = "parallel")]
        Some(t) => {
            // the global pool can be set once; a second call in-process keeps the first
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            Ok(Exec::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(Exec::Sequential),
        None => Ok(Exec::default()),
    }
}

fn sink(r: &Resolved) -> anyhow::Result<Box<dyn Write>> {
    Ok(match &r.out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

#[derive(Serialize)]
struct Meta<'a, E: Serialize> {
    command: &'a str,
    params: ChainParams,
    force_amp: f64,
    grid: Option<&'a OmegaGrid>,
    #[serde(flatten)]
    extra: E,
}

fn emit<T: Serialize, E: Serialize>(
    command: &str,
    r: &Resolved,
    grid: Option<&OmegaGrid>,
    extra: E,
    rows: &[T],
) -> anyhow::Result<()> {
    let meta = Meta {
        command,
        params: r.params,
        force_amp: r.force_amp,
        grid,
        extra,
    };
    let mut out = sink(r)?;
    lib(write_rows(r.format, &meta, rows, &mut out))?;
    out.flush()?;
    Ok(())
}

fn write_gnuplot<T: Serialize>(out: &Path, first: &T, x: &str, ys: &[&str]) -> anyhow::Result<()> {
    let header = lib(header_of(first))?;
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    let csv = out.to_string_lossy();
    let png = out.with_extension("png");
    let script = lib(gnuplot_script(&csv, &h, x, ys, &png.to_string_lossy()))?;
    let path = out.with_extension("gp");
    std::fs::write(&path, script).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn scan<T: Serialize>(
    name: &str,
    a: &ScanArgs,
    f: impl Fn(&OmegaGrid, f64, &ChainParams, Exec) -> forced_chain::Result<Vec<T>>,
    ys: &[&str],
) -> anyhow::Result<()> {
    let file = load_file(&a.common.config)?;
    let r = resolve(&a.common, &file)?;
    if r.modes.is_some() {
        return Err(usage("--modes applies to simulate only"));
    }
    let exec = exec_for(r.threads)?;
    let rows = lib(f(&r.grid, r.force_amp, &r.params, exec))?;
    emit(name, &r, Some(&r.grid), (), &rows)?;
    if a.gnuplot {
        if let (Some(out), Some(first)) = (&r.out, rows.first()) {
            write_gnuplot(out, first, "omega", ys)?;
        }
    }
    Ok(())
}

fn young(a: &YoungArgs) -> anyhow::Result<()> {
    let file = load_file(&a.common.config)?;
    let r = resolve(&a.common, &file)?;
    let exec = exec_for(r.threads)?;
    let point = match (a.r.or(file.r), r.omega) {
        (Some(x), _) => x,
        (None, Some(w)) => lib(inverse_dispersion(w, r.params.omega0))?,
        (None, None) => 0.66,
    };
    let u_samples = a.u_samples.or(file.u_samples).unwrap_or(20_000);
    let bins = a.bins.or(file.bins).unwrap_or(50);
    let (h, rows) = lib(young_rows(point, r.force_amp, &r.params, u_samples, bins, exec))?;
    #[derive(Serialize)]
    struct Extra {
        r: f64,
        omega: f64,
        mean: f64,
        bound: f64,
        u_samples: usize,
    }
    let omega = lib(dispersion(point, r.params.omega0))?;
    let extra = Extra {
        r: point,
        omega,
        mean: h.mean,
        bound: r.force_amp * r.force_amp / 4.0 * (1.0 / r.params.gamma_minus + 1.0 / r.params.gamma_plus),
        u_samples,
    };
    emit("young", &r, None, extra, &rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct SimRow {
    pub quantity: &'static str,
    pub site: Option<usize>,
    pub estimate: f64,
    pub stderr: f64,
    pub expected: f64,
    pub z: f64,
}

fn simulate(a: &SimArgs) -> anyhow::Result<()> {
    let file = load_file(&a.common.config)?;
    let r = resolve(&a.common, &file)?;
    let force = r.force()?;
    let defaults = SimConfig::new(r.params, force.clone());
    let cfg = SimConfig {
        steps_per_period: a
            .steps_per_period
            .or(file.steps_per_period)
            .unwrap_or(defaults.steps_per_period),
        burn_in_periods: a.burn_in.or(file.burn_in).unwrap_or(defaults.burn_in_periods),
        measure_periods: a.periods.or(file.periods).unwrap_or(defaults.measure_periods),
        batches: a.batches.or(file.batches).unwrap_or(defaults.batches),
        trajectories: a.trajectories.or(file.trajectories).unwrap_or(4),
        integrator: a.integrator.or(file.integrator).map(Into::into).unwrap_or_default(),
        seed: r.seed,
        exec: exec_for(r.threads)?,
        ..defaults
    };
    let stats = lib(run(&cfg))?;
    let params = &cfg.params;
    let w = lib(work_multimode(&force, params))?;
    let th = lib(thermal_state(params))?;
    let boundary = th.current() - w.work_minus;

    let row = |quantity, site, e: forced_chain::simulate::Estimate, expected: f64| SimRow {
        quantity,
        site,
        estimate: e.mean,
        stderr: e.stderr,
        expected,
        z: e.z_score(expected),
    };
    let mut rows = vec![
        row("work", None, stats.work, w.work),
        row("current_left", None, stats.current_left, boundary),
        row("current_right", None, stats.current_right, boundary),
    ];
    for (x, t) in stats.temperatures.iter().enumerate() {
        rows.push(row("temperature", Some(x), *t, th.temperatures[x]));
    }
    // the thermal current plus the mechanical one, the same on every bond
    for (x, j) in stats.bond_currents.iter().enumerate() {
        rows.push(row("bond_current", Some(x), *j, th.currents[x] - w.work_minus));
    }
    #[derive(Serialize)]
    struct Extra {
        omega: f64,
        steps_per_period: usize,
        burn_in_periods: usize,
        measure_periods: usize,
        batches: usize,
        trajectories: usize,
        seed: u64,
    }
    let extra = Extra {
        omega: force.omega,
        steps_per_period: cfg.steps_per_period,
        burn_in_periods: cfg.burn_in_periods,
        measure_periods: cfg.measure_periods,
        batches: cfg.batches,
        trajectories: cfg.trajectories,
        seed: cfg.seed,
    };
    emit("simulate", &r, None, extra, &rows)
}

/// Returns whether every check passed.
fn selftest(a: &SelftestArgs) -> anyhow::Result<bool> {
    let file: FileConfig = load_file(&a.common.config)?;
    let r = resolve(&a.common, &file)?;
    let checks = run_selftest(exec_for(r.threads)?);
    let mut out = io::stdout().lock();
    for c in &checks {
        writeln!(
            out,
            "{} {:<34} measured {:.3e}  tolerance {:.1e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.tolerance
        )?;
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    writeln!(out, "{passed}/{} checks passed", checks.len())?;
    Ok(passed == checks.len())
}

/// Runs a command; `Ok(false)` is a clean run whose checks failed.
pub fn dispatch(cmd: &Command) -> anyhow::Result<bool> {
    match cmd {
        Command::WorkScan(a) => scan("work-scan", a, work_scan, &["W", "W_minus", "W_plus"]),
        Command::EnergyScan(a) => scan("energy-scan", a, energy_scan, &["e_mech", "e_limit"]),
        Command::Currents(a) => scan("currents", a, current_scan, &["j_mech", "j_th", "j_total"]),
        Command::Limits(a) => scan("limits", a, limit_scan, &["W", "W_limit"]),
        Command::Young(a) => young(a),
        Command::Simulate(a) => simulate(a),
        Command::Selftest(a) => return selftest(a),
    }?;
    Ok(true)
}
