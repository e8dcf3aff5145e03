//! Backscatter target strength of the Ihlenburg shell over its band.

use sphscat::farfield::{sweep, SweepQuantity};
use sphscat::presets;
use std::f64::consts::PI;

fn main() -> sphscat::Result<()> {
    let p = presets::by_name("ihlenburg", None)?;
    let c = p.model.exterior().sound_speed;
    let r0 = p.model.outer_radius();
    // k1·R from 0.1 to 10
    let freqs: Vec<f64> = (1..=100).map(|i| 0.1 * i as f64 * c / (2.0 * PI * r0)).collect();
    let r = sweep(&p.model, &p.incident, &freqs, &[(PI, 0.0)], SweepQuantity::TargetStrength, f64::EPSILON)?;
    println!("{:>8} {:>10} {:>5}", "k1R", "TS [dB]", "N");
    for (i, f) in r.frequencies.iter().enumerate().step_by(5) {
        println!("{:8.2} {:10.3} {:5}", 2.0 * PI * f / c * r0, r.values[i][0].re, r.status[i].n_used);
    }
    Ok(())
}
