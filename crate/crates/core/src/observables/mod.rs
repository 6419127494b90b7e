//! Work, mechanical energy and currents of the periodic state, and the
//! thermal sector of the fluctuations around it.

mod energy;
mod thermal;
mod work;

pub use energy::{mech_currents, mech_energy, mech_energy_any, site_energies, MechCurrents, MechanicalEnergy};
pub use thermal::{
    drift_matrix, noise_matrix, thermal_current_closed, thermal_state, thermal_state_in, Coordinates, ThermalState,
};
pub use work::{
    default_samples, work, work_at_split, work_bound, work_multimode, work_or_resonant, work_quadrature, work_resonant,
    MultimodeWork, WorkReport,
};

use serde::Serialize;

use crate::chain::ChainParams;
use crate::error::Result;

/// The full energy balance at one driving frequency: the mechanical part
/// depends only on the force, the thermal part only on the temperatures.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    pub e_mech_site: Vec<f64>,
    pub e_mech: f64,
    pub e_th_site: Vec<f64>,
    pub e_th: f64,
    pub j_th: f64,
    pub j_mech: f64,
}

pub fn energy_report(omega: f64, force_amp: f64, params: &ChainParams) -> Result<EnergyReport> {
    let mech = mech_energy(omega, force_amp, params)?;
    let th = thermal_state(params)?;
    let w = work(omega, force_amp, params)?;
    Ok(EnergyReport {
        e_mech: mech.total,
        e_mech_site: mech.site,
        e_th: th.total_energy(),
        j_th: th.current(),
        e_th_site: th.energies,
        j_mech: -w.work_minus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_is_consistent() {
        let p = ChainParams::new(10, 1.0, 1.0, 0.5, 2.0, 1.0).unwrap();
        let r = energy_report(1.5, 1.0, &p).unwrap();
        assert!(r.e_mech_site.iter().all(|&v| v >= 0.0));
        let sum: f64 = r.e_mech_site.iter().sum();
        assert!((sum - r.e_mech).abs() < 1e-10 * r.e_mech);
        assert!(r.j_mech <= 0.0 && r.j_th > 0.0);
    }
}
