//! Stochastic simulation of the forced, thermostatted chain.
//!
//! Trajectories are independent: trajectory `i` draws from ChaCha8 seeded
//! with `seed` on stream `i`, so results do not depend on the execution
//! policy or thread count. Per-trajectory statistics are reduced in
//! trajectory order.
//!
//! Standard errors come from batch means: each trajectory's measurement
//! window is cut into `batches` equal runs of whole periods.

mod step;

pub use step::{Integrator, StepOperator};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::chain::{ChainParams, ForceSpec};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::observables::{thermal_current_closed, thermal_state};

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub params: ChainParams,
    pub force: ForceSpec,
    /// `θ/dt`.
    pub steps_per_period: usize,
    pub burn_in_periods: usize,
    pub measure_periods: usize,
    pub batches: usize,
    pub seed: u64,
    pub trajectories: usize,
    pub integrator: Integrator,
    pub exec: Exec,
}

impl SimConfig {
    pub fn new(params: ChainParams, force: ForceSpec) -> Self {
        SimConfig {
            params,
            force,
            steps_per_period: 32,
            burn_in_periods: 200,
            measure_periods: 2000,
            batches: 20,
            seed: 0,
            trajectories: 1,
            integrator: Integrator::Exact,
            exec: Exec::default(),
        }
    }

    pub fn dt(&self) -> f64 {
        self.force.period() / self.steps_per_period as f64
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.steps_per_period < 32 {
            return Err(Error::config("steps_per_period must be >= 32"));
        }
        if self.measure_periods < 1 || self.trajectories < 1 {
            return Err(Error::config("need measure_periods >= 1 and trajectories >= 1"));
        }
        if self.batches < 1 || self.batches > self.measure_periods {
            return Err(Error::config("batches must lie in 1..=measure_periods"));
        }
        if self.batches * self.trajectories < 2 {
            return Err(Error::config("need at least two batches in total for error bars"));
        }
        Ok(())
    }
}

/// A mean with its standard error.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    fn from_batches(values: &[f64]) -> Self {
        let b = values.len() as f64;
        let mean = values.iter().sum::<f64>() / b;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1.0);
        Estimate {
            mean,
            stderr: (var / b).sqrt(),
        }
    }

    /// `|mean − target| ≤ k·stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }

    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target) / self.stderr
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryStats {
    /// `⟨F(t) pₙ(t)⟩`.
    pub work: Estimate,
    /// `⟨2γ₋(T₋ − p₀²)⟩`, the energy entering at the left end.
    pub current_left: Estimate,
    /// `⟨−2γ₊(T₊ − pₙ²) − F(t)pₙ⟩`: the energy leaving at the right end,
    /// net of the work. Both ends carry the same current in the steady state.
    pub current_right: Estimate,
    /// `⟨−pₓ(qₓ₊₁ − qₓ)⟩`, `x = 0..n`.
    pub bond_currents: Vec<Estimate>,
    /// `⟨pₓ²⟩` minus the squared phase-locked mean.
    pub temperatures: Vec<Estimate>,
    /// Phase-locked means, indexed `[phase][site]`.
    pub mean_q: Vec<Vec<f64>>,
    pub mean_p: Vec<Vec<f64>>,
    /// Standard errors of the phase-locked means.
    pub mean_q_stderr: Vec<Vec<f64>>,
    pub samples: usize,
}

/// Sums over one batch of one trajectory.
#[derive(Clone, Debug)]
struct Batch {
    work: f64,
    left: f64,
    right: f64,
    bonds: Vec<f64>,
    p2: Vec<f64>,
    count: usize,
}

#[derive(Clone, Debug)]
struct TrajectoryRun {
    batches: Vec<Batch>,
    /// `[phase][site]` sums over all measured periods.
    sum_q: Vec<f64>,
    sum_p: Vec<f64>,
    /// Per-batch phase sums of `q`, for the error bars of the means.
    batch_q: Vec<Vec<f64>>,
}

fn trajectory(config: &SimConfig, op: &StepOperator, id: usize) -> TrajectoryRun {
    let p = &config.params;
    let n = p.n;
    let s = p.sites();
    let dim = op.dim;
    let m = config.steps_per_period;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(id as u64);
    let mut x = vec![0.0; dim];
    let mut y = vec![0.0; dim];
    let mut xi = vec![0.0; op.rank()];
    let mut advance = |x: &mut Vec<f64>, y: &mut Vec<f64>, phase: usize, rng: &mut ChaCha8Rng| {
        for v in xi.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        op.step(x, phase, &xi, y);
        std::mem::swap(x, y);
    };
    for _ in 0..config.burn_in_periods {
        for k in 0..m {
            advance(&mut x, &mut y, k, &mut rng);
        }
    }

    let periods_per_batch = config.measure_periods / config.batches;
    let mut sum_q = vec![0.0; m * s];
    let mut sum_p = vec![0.0; m * s];
    let mut batch_q = Vec::with_capacity(config.batches);
    let mut batches = Vec::with_capacity(config.batches);
    let (gm, gp) = (p.gamma_minus, p.gamma_plus);
    let forces: Vec<f64> = (0..m).map(|k| config.force.eval(k as f64 * op.dt)).collect();
    for _ in 0..config.batches {
        let mut b = Batch {
            work: 0.0,
            left: 0.0,
            right: 0.0,
            bonds: vec![0.0; n],
            p2: vec![0.0; s],
            count: 0,
        };
        let mut bq = vec![0.0; m * s];
        for _ in 0..periods_per_batch {
            for k in 0..m {
                let (q, pm) = x.split_at(s);
                let f = forces[k];
                b.work += f * pm[n];
                b.left += 2.0 * gm * (p.t_minus - pm[0] * pm[0]);
                b.right += -2.0 * gp * (p.t_plus - pm[n] * pm[n]) - f * pm[n];
                for i in 0..n {
                    b.bonds[i] -= pm[i] * (q[i + 1] - q[i]);
                }
                for i in 0..s {
                    b.p2[i] += pm[i] * pm[i];
                    sum_q[k * s + i] += q[i];
                    sum_p[k * s + i] += pm[i];
                    bq[k * s + i] += q[i];
                }
                b.count += 1;
                advance(&mut x, &mut y, k, &mut rng);
            }
        }
        batches.push(b);
        batch_q.push(bq);
    }
    TrajectoryRun {
        batches,
        sum_q,
        sum_p,
        batch_q,
    }
}

/// Integrates `trajectories` independent copies and estimates work, boundary
/// and bond currents, temperatures and the phase-locked means.
pub fn run(config: &SimConfig) -> Result<TrajectoryStats> {
    config.validate()?;
    let op = StepOperator::with_integrator(
        &config.params,
        &config.force,
        config.steps_per_period,
        config.integrator,
    )?;
    let runs = config
        .exec
        .map_range(0..config.trajectories, |id| trajectory(config, &op, id));

    let s = config.params.sites();
    let n = config.params.n;
    let m = config.steps_per_period;
    let batches: Vec<&Batch> = runs.iter().flat_map(|r| r.batches.iter()).collect();
    let total_periods = (config.measure_periods / config.batches * config.batches * config.trajectories) as f64;
    let per_batch_periods = (config.measure_periods / config.batches) as f64;

    let mut sum_q = vec![0.0; m * s];
    let mut sum_p = vec![0.0; m * s];
    for r in &runs {
        for i in 0..m * s {
            sum_q[i] += r.sum_q[i];
            sum_p[i] += r.sum_p[i];
        }
    }
    let mean_q_flat: Vec<f64> = sum_q.iter().map(|v| v / total_periods).collect();
    let mean_p_flat: Vec<f64> = sum_p.iter().map(|v| v / total_periods).collect();
    // phase average of the squared mean momentum
    let mean_p2: Vec<f64> = (0..s)
        .map(|i| (0..m).map(|k| mean_p_flat[k * s + i].powi(2)).sum::<f64>() / m as f64)
        .collect();

    let scalar = |f: &dyn Fn(&Batch) -> f64| {
        let v: Vec<f64> = batches.iter().map(|b| f(b) / b.count as f64).collect();
        Estimate::from_batches(&v)
    };
    let work = scalar(&|b| b.work);
    let current_left = scalar(&|b| b.left);
    let current_right = scalar(&|b| b.right);
    let bond_currents = (0..n).map(|i| scalar(&|b| b.bonds[i])).collect();
    let temperatures = (0..s)
        .map(|i| {
            let e = scalar(&|b| b.p2[i]);
            Estimate {
                mean: e.mean - mean_p2[i],
                stderr: e.stderr,
            }
        })
        .collect();

    let batch_q: Vec<&Vec<f64>> = runs.iter().flat_map(|r| r.batch_q.iter()).collect();
    let mut mean_q = Vec::with_capacity(m);
    let mut mean_p = Vec::with_capacity(m);
    let mut mean_q_stderr = Vec::with_capacity(m);
    for k in 0..m {
        mean_q.push(mean_q_flat[k * s..(k + 1) * s].to_vec());
        mean_p.push(mean_p_flat[k * s..(k + 1) * s].to_vec());
        mean_q_stderr.push(
            (0..s)
                .map(|i| {
                    let v: Vec<f64> = batch_q.iter().map(|bq| bq[k * s + i] / per_batch_periods).collect();
                    Estimate::from_batches(&v).stderr
                })
                .collect(),
        );
    }

    Ok(TrajectoryStats {
        work,
        current_left,
        current_right,
        bond_currents,
        temperatures,
        mean_q,
        mean_p,
        mean_q_stderr,
        samples: batches.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurrentCheck {
    pub bond_currents: Vec<Estimate>,
    /// Stationary current of the finite chain from the covariance.
    pub expected: f64,
    /// `c(γ, ω₀)(T₋ − T₊)`, when both ends have the same damping.
    pub expected_closed: Option<f64>,
    /// Largest `|z|` of a bond current against `expected`.
    pub max_z: f64,
}

impl CurrentCheck {
    pub fn passes(&self, k: f64) -> bool {
        self.max_z <= k
    }
}

/// Simulated bond currents against the stationary heat current. The force is
/// ignored: only the thermal part is checked.
pub fn steady_current_check(config: &SimConfig) -> Result<CurrentCheck> {
    let mut cfg = config.clone();
    cfg.force = ForceSpec::new(
        config.force.omega,
        config.force.modes.iter().map(|&(l, _)| (l, 0.0)).collect(),
    )?;
    let stats = run(&cfg)?;
    let p = &cfg.params;
    let expected = thermal_state(p)?.current();
    let expected_closed = if p.gamma_minus == p.gamma_plus && p.gamma_minus > 0.0 {
        Some(thermal_current_closed(p.gamma_minus, p.omega0)? * (p.t_minus - p.t_plus))
    } else {
        None
    };
    let max_z = stats
        .bond_currents
        .iter()
        .map(|e| e.z_score(expected).abs())
        .fold(0.0, f64::max);
    Ok(CurrentCheck {
        bond_currents: stats.bond_currents,
        expected,
        expected_closed,
        max_z,
    })
}
