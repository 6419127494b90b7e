//! One-step transition of the forced Langevin chain over `h = θ/M`.
//!
//! The state `x = (q, p)` solves the linear SDE
//! `dx = (−A x + F(t) e_{pₙ}) dt + dB`, `Cov(dB) = Q dt`, whose transition
//! over `h` is exactly Gaussian:
//!
//! `x_{k+1} = Φ x_k + c_k + ξ_k`, `Φ = e^{−Ah}`, `ξ_k ~ N(0, Σ_h)`,
//! `Σ_h = ∫₀^h e^{−As} Q e^{−Aᵀs} ds`.
//!
//! The forcing term `c_k` depends only on the phase `k mod M`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::chain::{ChainParams, ForceSpec};
use crate::error::{Error, Result};
use crate::observables::{drift_matrix, noise_matrix};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Integrator {
    /// Exact Gaussian transition.
    #[default]
    Exact,
    /// First-order Euler–Maruyama, for cross-checks only. Explicit, so it
    /// drifts on weakly damped modes over long runs.
    EulerMaruyama,
}

/// Precomputed transition. Matrices are stored row-major in flat buffers.
#[derive(Clone, Debug)]
pub struct StepOperator {
    pub dim: usize,
    pub dt: f64,
    pub steps_per_period: usize,
    pub integrator: Integrator,
    propagator: Vec<f64>,
    /// `steps_per_period × dim` forcing increments.
    forcing: Vec<f64>,
    /// `dim × rank` factor with `L Lᵀ = Σ_h`.
    noise: Vec<f64>,
    rank: usize,
    step_covariance: DMatrix<f64>,
}

/// Symmetrizes, clips roundoff-scale negative eigenvalues and returns a
/// factor `L` (columns for the positive eigenvalues only).
fn psd_factor(cov: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let sym = (cov + cov.transpose()) * 0.5;
    let eig = sym.clone().symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let mut cols = Vec::new();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda < -1e-12 * scale.max(1.0) {
            return Err(Error::Numerical(format!("step covariance has eigenvalue {lambda:e}")));
        }
        if lambda > 0.0 {
            cols.push(eig.eigenvectors.column(k) * lambda.sqrt());
        }
    }
    let dim = cov.nrows();
    let factor = if cols.is_empty() {
        DMatrix::zeros(dim, 0)
    } else {
        DMatrix::from_columns(&cols)
    };
    Ok((sym, factor))
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

impl StepOperator {
    pub fn new(params: &ChainParams, force: &ForceSpec, steps_per_period: usize) -> Result<Self> {
        Self::with_integrator(params, force, steps_per_period, Integrator::Exact)
    }

    pub fn with_integrator(
        params: &ChainParams,
        force: &ForceSpec,
        steps_per_period: usize,
        integrator: Integrator,
    ) -> Result<Self> {
        params.validate()?;
        if steps_per_period < 32 {
            return Err(Error::config("need at least 32 steps per period"));
        }
        let a = drift_matrix(params);
        let q = noise_matrix(params);
        let dim = a.nrows();
        let h = force.period() / steps_per_period as f64;
        let pn = dim - 1;

        let (phi, step_cov) = match integrator {
            Integrator::Exact => {
                let phi = (&a * -h).exp();
                let mut m = DMatrix::zeros(2 * dim, 2 * dim);
                m.view_mut((0, 0), (dim, dim)).copy_from(&(-&a));
                m.view_mut((0, dim), (dim, dim)).copy_from(&q);
                m.view_mut((dim, dim), (dim, dim)).copy_from(&a.transpose());
                let e = (m * h).exp();
                let g = e.view((0, dim), (dim, dim)).into_owned();
                (phi.clone(), g * phi.transpose())
            }
            Integrator::EulerMaruyama => (DMatrix::identity(dim, dim) - &a * h, &q * h),
        };
        let (step_covariance, factor) = psd_factor(&step_cov)?;

        let mut forcing = vec![0.0; steps_per_period * dim];
        match integrator {
            Integrator::Exact => {
                // ∫₀^h e^{−A(h−s)} e^{iωs} ds = (A + iω)⁻¹ (e^{iωh} − Φ)
                let ac = a.map(|v| Complex64::new(v, 0.0));
                for &(ell, amp) in &force.modes {
                    if amp == 0.0 {
                        continue;
                    }
                    let w = ell as f64 * force.omega;
                    let rot = Complex64::from_polar(1.0, w * h);
                    let rhs = DVector::from_fn(dim, |i, _| {
                        let e = if i == pn { rot } else { Complex64::new(0.0, 0.0) };
                        e - Complex64::new(phi[(i, pn)], 0.0)
                    });
                    let shifted = &ac + DMatrix::from_diagonal_element(dim, dim, Complex64::new(0.0, w));
                    let inc = shifted
                        .lu()
                        .solve(&rhs)
                        .ok_or(Error::SingularSystem { row: 0, pivot: 0.0 })?;
                    for k in 0..steps_per_period {
                        let phase = Complex64::from_polar(amp, w * h * k as f64);
                        for i in 0..dim {
                            forcing[k * dim + i] += (phase * inc[i]).re;
                        }
                    }
                }
            }
            Integrator::EulerMaruyama => {
                for k in 0..steps_per_period {
                    forcing[k * dim + pn] = force.eval(h * k as f64) * h;
                }
            }
        }

        Ok(StepOperator {
            dim,
            dt: h,
            steps_per_period,
            integrator,
            propagator: row_major(&phi),
            forcing,
            rank: factor.ncols(),
            noise: row_major(&factor),
            step_covariance,
        })
    }

    /// Number of standard normals consumed per step.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn step_covariance(&self) -> &DMatrix<f64> {
        &self.step_covariance
    }

    /// `out = Φ x + c_phase + L ξ`.
    pub fn step(&self, x: &[f64], phase: usize, xi: &[f64], out: &mut [f64]) {
        let d = self.dim;
        let c = &self.forcing[phase * d..(phase + 1) * d];
        for i in 0..d {
            let row = &self.propagator[i * d..(i + 1) * d];
            let mut acc = c[i];
            for j in 0..d {
                acc += row[j] * x[j];
            }
            let nrow = &self.noise[i * self.rank..(i + 1) * self.rank];
            for j in 0..self.rank {
                acc += nrow[j] * xi[j];
            }
            out[i] = acc;
        }
    }

    /// The noise increment `L ξ` alone.
    pub fn noise_increment(&self, xi: &[f64], out: &mut [f64]) {
        if self.rank == 0 {
            out.fill(0.0);
            return;
        }
        for (o, nrow) in out.iter_mut().zip(self.noise.chunks_exact(self.rank)) {
            *o = nrow.iter().zip(xi).map(|(a, b)| a * b).sum();
        }
    }
}
