//! Number of modes needed at machine precision for the Chang shell, and how
//! the series error falls off with the truncation index.

use sphscat::fieldeval::{evaluate, EvalRequest, Quantity};
use sphscat::presets;
use std::f64::consts::PI;

fn main() -> sphscat::Result<()> {
    let p = presets::by_name("chang", None)?;
    let r0 = p.model.outer_radius();
    let pts: Vec<[f64; 3]> =
        (0..400).map(|i| PI * i as f64 / 399.0).map(|t| [r0 * t.sin(), 0.0, r0 * t.cos()]).collect();
    for k in [15.0, 20.0] {
        let omega = k * p.model.exterior().sound_speed;
        let q = [Quantity::ScatteredPressure];
        let conv = evaluate(&p.model, &p.incident, omega, &EvalRequest::new(pts.clone(), &q))?;
        let n_eps = conv[0].n_used;
        println!("k1 = {k}: N_eps = {n_eps}");
        let reference =
            evaluate(&p.model, &p.incident, omega, &EvalRequest::new(pts.clone(), &q).fixed_modes(n_eps + 30))?;
        let scale = reference.iter().map(|s| s.scattered_pressure.unwrap().norm()).fold(0.0, f64::max);
        for n in (0..=n_eps).step_by(8).chain([n_eps]) {
            let s = evaluate(&p.model, &p.incident, omega, &EvalRequest::new(pts.clone(), &q).fixed_modes(n))?;
            let err = s
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a.scattered_pressure.unwrap() - b.scattered_pressure.unwrap()).norm())
                .fold(0.0, f64::max);
            println!("  N = {n:3}  relative error {:.2e}", err / scale);
        }
    }
    Ok(())
}
