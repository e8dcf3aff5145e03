//! Bistatic pattern of the Fender shell for a source at 30° elevation.

use sphscat::farfield::{farfield_pattern, target_strength};
use sphscat::{presets, IncidentField};
use std::f64::consts::PI;

fn main() -> sphscat::Result<()> {
    let p = presets::by_name("fender", None)?;
    let omega = 2.0 * PI * 1000.0;
    let inc = IncidentField::from_aspect(0.0, 30f64.to_radians());
    let angles: Vec<(f64, f64)> = (0..=12).map(|i| (PI * i as f64 / 12.0, 0.0)).collect();
    let p0 = farfield_pattern(&p.model, &inc, omega, &angles, f64::EPSILON)?;
    println!("k1R = {:.2}, N = {}", p.model.exterior().wavenumber(omega) * p.model.outer_radius(), p0[0].n_used);
    for s in &p0 {
        println!("theta = {:5.1}°  TS = {:8.3} dB", s.theta.to_degrees(), target_strength(s.value, inc.amplitude));
    }
    Ok(())
}
