//! Residuals of the governing equations for every preset and boundary
//! condition at half the frequency bound.

use sphscat::verify::{residuals, Sampling};
use sphscat::{presets, BoundaryCondition};
use std::f64::consts::PI;

fn main() -> sphscat::Result<()> {
    println!(
        "{:10} {:5} {:>5} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "preset", "bc", "N", "helmholtz", "navier_r", "navier_t", "disp_bc", "pres_bc"
    );
    for name in presets::NAMES {
        for bc in BoundaryCondition::ALL {
            let p = presets::by_name(name, Some(bc))?;
            let omega = PI * p.model.frequency_bound();
            let r = residuals(&p.model, &p.incident, omega, &Sampling::default())?;
            println!(
                "{name:10} {:5} {:5} {:10.2e} {:10.2e} {:10.2e} {:10.2e} {:10.2e}",
                bc.name(),
                r.n_used,
                r.helmholtz,
                r.navier_r,
                r.navier_theta,
                r.displacement_bc,
                r.pressure_bc
            );
        }
    }
    Ok(())
}
