//! Rigid sphere: surface pressure and far-field pattern against the classic
//! single-equation series.

use num_complex::Complex64;
use sphscat::farfield::{farfield_pattern, target_strength};
use sphscat::fieldeval::{evaluate, EvalRequest, Quantity};
use sphscat::{presets, BoundaryCondition, IncidentField};
use std::f64::consts::PI;

fn main() -> sphscat::Result<()> {
    let model = presets::s5(Some(BoundaryCondition::Shbc))?;
    let inc = IncidentField::along_z();
    let a = model.outer_radius();
    let ka = 5.0;
    let omega = ka / a * model.exterior().sound_speed;

    let thetas: Vec<f64> = (0..=6).map(|i| PI * i as f64 / 6.0).collect();
    let pts: Vec<[f64; 3]> = thetas.iter().map(|t| [a * t.sin(), 0.0, a * t.cos()]).collect();
    let surface = evaluate(&model, &inc, omega, &EvalRequest::new(pts, &[Quantity::TotalPressure]))?;
    let far =
        farfield_pattern(&model, &inc, omega, &thetas.iter().map(|&t| (t, 0.0)).collect::<Vec<_>>(), f64::EPSILON)?;

    println!("kR = {ka}, N = {}", surface[0].n_used);
    println!("{:>8} {:>12} {:>12} {:>10}", "theta", "|p_tot(R)|", "|p0|", "TS [dB]");
    for ((t, s), f) in thetas.iter().zip(&surface).zip(&far) {
        let p: Complex64 = s.total_pressure.unwrap();
        println!(
            "{:8.1} {:12.6} {:12.6} {:10.3}",
            t.to_degrees(),
            p.norm(),
            f.value.norm(),
            target_strength(f.value, inc.amplitude)
        );
    }
    Ok(())
}
