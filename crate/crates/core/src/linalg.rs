//! Dense helpers shared by the thermal sector and the simulator.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Solves `A Σ + Σ Aᵀ = Q` for a real `A` whose spectrum lies in the open
/// right half-plane (Bartels–Stewart on the complex Schur form).
///
/// The residual `‖AΣ + ΣAᵀ − Q‖_max` is checked against
/// `tolerance · (‖A‖‖Σ‖ + ‖Q‖)`.
pub fn lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>, tolerance: f64) -> Result<DMatrix<f64>> {
    let dim = a.nrows();
    if a.ncols() != dim || q.shape() != (dim, dim) {
        return Err(Error::domain("lyapunov: shape mismatch"));
    }
    let ac = a.map(|v| Complex64::new(v, 0.0));
    let schur = ac
        .try_schur(f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let (u, t) = schur.unpack();
    let c = u.adjoint() * q.map(|v| Complex64::new(v, 0.0)) * &u;

    let mut y = DMatrix::<Complex64>::zeros(dim, dim);
    for i in (0..dim).rev() {
        for j in (0..dim).rev() {
            let mut rhs = c[(i, j)];
            for k in i + 1..dim {
                rhs -= t[(i, k)] * y[(k, j)];
            }
            for k in j + 1..dim {
                rhs -= y[(i, k)] * t[(j, k)].conj();
            }
            let denom = t[(i, i)] + t[(j, j)].conj();
            if denom.norm() < 1e-300 {
                return Err(Error::Numerical("drift has eigenvalues on the imaginary axis".into()));
            }
            y[(i, j)] = rhs / denom;
        }
    }
    let sigma = (&u * y * u.adjoint()).map(|z| z.re);
    let sigma = (&sigma + sigma.transpose()) * 0.5;

    let residual = (a * &sigma + &sigma * a.transpose() - q).amax();
    let scale = a.amax() * sigma.amax() + q.amax();
    if residual > tolerance * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Solve {
            residual: residual / scale,
            tolerance,
        });
    }
    Ok(sigma)
}
