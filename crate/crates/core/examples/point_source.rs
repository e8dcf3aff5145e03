//! A point source close to the scatterer and one far away; the distant one
//! approaches the plane-wave result once its 1/r decay and phase are removed.

use num_complex::Complex64;
use sphscat::farfield::farfield_pattern;
use sphscat::{presets, IncidentField};
use std::f64::consts::PI;

fn main() -> sphscat::Result<()> {
    let p = presets::by_name("s5", None)?;
    let omega = 2.0 * PI * 300.0;
    let k = p.model.exterior().wavenumber(omega);
    let angles: Vec<(f64, f64)> = (0..=4).map(|i| (PI * i as f64 / 4.0, 0.0)).collect();
    let plane = farfield_pattern(&p.model, &IncidentField::along_z(), omega, &angles, f64::EPSILON)?;
    for rs in [10.0, 100.0, 1e4] {
        let inc = IncidentField::point_source(rs, PI, 0.0);
        let ps = farfield_pattern(&p.model, &inc, omega, &angles, f64::EPSILON)?;
        let unphase = Complex64::new(0.0, -k * rs).exp();
        let gap = ps
            .iter()
            .zip(&plane)
            .map(|(a, b)| (a.value * unphase - b.value).norm() / b.value.norm())
            .fold(0.0, f64::max);
        println!("r_s = {rs:8}: max relative gap to plane wave {gap:.3e}");
    }
    Ok(())
}
