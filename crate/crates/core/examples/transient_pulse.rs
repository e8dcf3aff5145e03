//! Transient response of S1 to the two-cycle wavelet: total pressure in front
//! of the shell and the von Mises stress inside it.
//!
//! Nothing in the model dissipates energy, and the subsonic flexural modes of
//! the shell radiate very little, so the stress keeps ringing long after the
//! pressure pulse has passed.

use sphscat::fieldeval::Quantity;
use sphscat::timesynth::{transient_field, SynthesisPlan, TransientOptions};
use sphscat::{presets, Wavelet};

fn main() -> sphscat::Result<()> {
    let p = presets::by_name("s1", None)?;
    let fc = 1500.0;
    let plan = SynthesisPlan::new(120.0 / fc, 1024)?;
    let opts = TransientOptions {
        quantities: vec![Quantity::TotalPressure, Quantity::Stress],
        delay: 2e-3,
        ..Default::default()
    };
    let points = [[0.0, 0.0, -2.0], [0.0, 0.0, -0.975]];
    let r = transient_field(&p.model, &p.incident, &Wavelet::new(fc)?, &points, &plan, &opts)?;
    println!("dt = {:.3e} s, up to {} modes, {} flagged frequencies", plan.dt(), r.max_modes, r.flagged.len());
    let pressure = r.series[0].channel("p").unwrap();
    let vm = r.series[1].channel("von_mises").unwrap();
    for m in (0..120).step_by(4) {
        println!("t = {:7.3} ms  p = {:9.5}  von Mises = {:12.4e}", 1e3 * r.times[m], pressure[m], vm[m]);
    }
    Ok(())
}
