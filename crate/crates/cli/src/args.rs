//! Flags, the config file, and their merge (flags win over the file, the
//! file over the defaults).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use forced_chain::scan::{Format, OmegaGrid};
use forced_chain::simulate::Integrator;
use forced_chain::{ChainParams, ForceSpec};

#[derive(Debug, Parser)]
#[command(
    name = "forced-chain",
    version,
    about = "Periodically forced harmonic chain between two heat baths"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// W, W⁻, W⁺ over a frequency grid, with a row at every normal frequency.
    WorkScan(ScanArgs),
    /// Mechanical energy over a frequency grid, with its large-n counterparts.
    EnergyScan(ScanArgs),
    /// Mechanical and thermal currents over a frequency grid.
    Currents(ScanArgs),
    /// Finite-n work and energy next to their large-n limits.
    Limits(ScanArgs),
    /// Histogram of the limiting work distribution at a point of the band.
    Young(YoungArgs),
    /// Stochastic simulation against the closed forms.
    Simulate(SimArgs),
    /// Run the consistency suite; exit 0 iff every check passes.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorArg {
    Exact,
    EulerMaruyama,
}

impl From<IntegratorArg> for Integrator {
    fn from(i: IntegratorArg) -> Self {
        match i {
            IntegratorArg::Exact => Integrator::Exact,
            IntegratorArg::EulerMaruyama => Integrator::EulerMaruyama,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Flat `key = value` file; keys are the long flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub omega0: Option<f64>,
    #[arg(long)]
    pub gamma_minus: Option<f64>,
    #[arg(long)]
    pub gamma_plus: Option<f64>,
    #[arg(long)]
    pub t_minus: Option<f64>,
    #[arg(long)]
    pub t_plus: Option<f64>,
    #[arg(long)]
    pub force_amp: Option<f64>,
    /// A single driving frequency.
    #[arg(long, conflicts_with = "omega_grid")]
    pub omega: Option<f64>,
    /// `min:max:count`, or a comma-separated list.
    #[arg(long)]
    pub omega_grid: Option<String>,
    /// Harmonics of the force as `l:amp,l:amp`; the fundamental is `--omega`.
    #[arg(long)]
    pub modes: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    /// Also write a gnuplot script next to `--out`.
    #[arg(long, requires = "out")]
    pub gnuplot: bool,
}

#[derive(Debug, Clone, Args)]
pub struct YoungArgs {
    #[command(flatten)]
    pub common: Common,
    /// Point of the band, `ω = ω(r)`; `--omega` is accepted instead.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub u_samples: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub steps_per_period: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub periods: Option<usize>,
    #[arg(long)]
    pub batches: Option<usize>,
    #[arg(long)]
    pub trajectories: Option<usize>,
    #[arg(long, value_enum)]
    pub integrator: Option<IntegratorArg>,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    #[command(flatten)]
    pub common: Common,
}

/// Keys accepted in the config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub n: Option<usize>,
    pub omega0: Option<f64>,
    pub gamma_minus: Option<f64>,
    pub gamma_plus: Option<f64>,
    pub t_minus: Option<f64>,
    pub t_plus: Option<f64>,
    pub force_amp: Option<f64>,
    pub omega: Option<f64>,
    pub omega_grid: Option<String>,
    pub modes: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<FormatArg>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub r: Option<f64>,
    pub u_samples: Option<usize>,
    pub bins: Option<usize>,
    pub steps_per_period: Option<usize>,
    pub burn_in: Option<usize>,
    pub periods: Option<usize>,
    pub batches: Option<usize>,
    pub trajectories: Option<usize>,
    pub integrator: Option<IntegratorArg>,
}

/// Bad input: reported with exit code 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

pub fn load_file(path: &Option<PathBuf>) -> anyhow::Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    // keys may be spelled with underscores or hyphens
    let normalized: String = text
        .lines()
        .map(|l| match l.split_once('=') {
            Some((k, v)) if !l.trim_start().starts_with('#') => format!("{} ={v}\n", k.trim().replace('_', "-")),
            _ => format!("{l}\n"),
        })
        .collect();
    toml::from_str(&normalized).map_err(|e| usage(format!("config {}: {e}", path.display())))
}

/// Flags and file merged over the defaults.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: ChainParams,
    pub force_amp: f64,
    pub omega: Option<f64>,
    pub grid: OmegaGrid,
    pub modes: Option<Vec<(usize, f64)>>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub threads: Option<usize>,
}

pub fn parse_grid(s: &str) -> anyhow::Result<OmegaGrid> {
    let bad = || usage(format!("bad omega grid '{s}': expected min:max:count or a comma list"));
    if s.trim().is_empty() {
        return Err(usage("empty omega grid"));
    }
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let min = parts[0].trim().parse().map_err(|_| bad())?;
        let max = parts[1].trim().parse().map_err(|_| bad())?;
        let count = parts[2].trim().parse().map_err(|_| bad())?;
        let g = OmegaGrid::Range { min, max, count };
        g.validate().map_err(|e| usage(e.to_string()))?;
        Ok(g)
    } else {
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        let g = OmegaGrid::List(v);
        g.validate().map_err(|e| usage(e.to_string()))?;
        Ok(g)
    }
}

pub fn parse_modes(s: &str) -> anyhow::Result<Vec<(usize, f64)>> {
    let bad = || usage(format!("bad modes '{s}': expected l:amp,l:amp"));
    s.split(',')
        .map(|t| {
            let (l, a) = t.split_once(':').ok_or_else(bad)?;
            Ok((
                l.trim().parse().map_err(|_| bad())?,
                a.trim().parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

pub fn resolve(c: &Common, file: &FileConfig) -> anyhow::Result<Resolved> {
    let n = c.n.or(file.n).unwrap_or(50);
    let params = ChainParams::new(
        n,
        c.omega0.or(file.omega0).unwrap_or(1.0),
        c.gamma_minus.or(file.gamma_minus).unwrap_or(1.0),
        c.gamma_plus.or(file.gamma_plus).unwrap_or(1.0),
        c.t_minus.or(file.t_minus).unwrap_or(0.0),
        c.t_plus.or(file.t_plus).unwrap_or(0.0),
    )
    .map_err(|e| usage(e.to_string()))?;
    // a flag on either spelling overrides the file on both
    let (omega, grid_str) = if c.omega.is_some() || c.omega_grid.is_some() {
        (c.omega, c.omega_grid.clone())
    } else {
        (file.omega, file.omega_grid.clone())
    };
    let grid = match (&grid_str, omega) {
        (Some(g), _) => parse_grid(g)?,
        (None, Some(w)) => OmegaGrid::List(vec![w]),
        (None, None) => OmegaGrid::Range {
            min: 0.5,
            max: 3.0,
            count: 500,
        },
    };
    let modes = match c.modes.as_ref().or(file.modes.as_ref()) {
        Some(m) => Some(parse_modes(m)?),
        None => None,
    };
    Ok(Resolved {
        params,
        force_amp: c.force_amp.or(file.force_amp).unwrap_or(1.0),
        omega,
        grid,
        modes,
        out: c.out.clone().or(file.out.clone()),
        format: c.format.or(file.format).unwrap_or(FormatArg::Csv).into(),
        seed: c.seed.or(file.seed).unwrap_or(0),
        threads: c.threads.or(file.threads),
    })
}

impl Resolved {
    /// The force of a simulation: `--modes` over the fundamental `--omega`,
    /// or a single harmonic of amplitude `--force-amp`.
    pub fn force(&self) -> anyhow::Result<ForceSpec> {
        let omega = self.omega.ok_or_else(|| usage("this command needs --omega"))?;
        let f = match &self.modes {
            Some(m) => ForceSpec::new(omega, m.clone()),
            None => ForceSpec::single(omega, self.force_amp),
        };
        f.map_err(|e| usage(e.to_string()))
    }
}
