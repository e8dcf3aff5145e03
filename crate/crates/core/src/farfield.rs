//! Far-field pattern, target strength and frequency sweeps.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldeval::{self, spherical, Channel, Domain, Probe, SeriesOptions, Truncation};
use crate::incident::IncidentField;
use crate::media::ScattererModel;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarFieldSample {
    /// Physical polar angle.
    pub theta: f64,
    /// Physical azimuth.
    pub phi: f64,
    pub value: Complex64,
    pub n_used: usize,
    pub converged: bool,
}

/// Unit vector for `(ϑ, φ)`.
pub fn direction(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// `p₀(ϑ, φ)` with `p₁ ≈ p₀ e^{ik₁r}/r` for large `r`.
pub fn farfield_pattern(
    model: &ScattererModel,
    incident: &IncidentField,
    omega: f64,
    angles: &[(f64, f64)],
    epsilon: f64,
) -> Result<Vec<FarFieldSample>> {
    if !(omega > 0.0) {
        return Ok(angles
            .iter()
            .map(|&(theta, phi)| FarFieldSample {
                theta,
                phi,
                value: Complex64::new(0.0, 0.0),
                n_used: 0,
                converged: true,
            })
            .collect());
    }
    let frame = incident.frame();
    let probes: Vec<Probe> = angles
        .iter()
        .map(|&(t, p)| Probe {
            r: f64::INFINITY,
            theta: spherical(frame.to_canonical(direction(t, p))).1,
            domain: Domain::Fluid(0),
            channels: vec![Channel::FarField],
        })
        .collect();
    let opts = SeriesOptions { epsilon, truncation: Truncation::Joint, ..Default::default() };
    let (sums, _) = fieldeval::sum_series(model, incident, omega, &probes, &opts)?;
    Ok(angles
        .iter()
        .zip(sums)
        .map(|(&(theta, phi), s)| FarFieldSample {
            theta,
            phi,
            value: s.sums[0],
            n_used: s.n_used,
            converged: s.converged,
        })
        .collect())
}

/// `20 log₁₀(|p₀| / |P_inc|)` in dB; `-∞` when `p₀ = 0`.
pub fn target_strength(p0: Complex64, p_inc: Complex64) -> f64 {
    let a = p0.norm();
    if a == 0.0 {
        return f64::NEG_INFINITY;
    }
    20.0 * (a / p_inc.norm()).log10()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepQuantity {
    TargetStrength,
    FarField,
    /// Total pressure on the outer surface.
    SurfacePressure,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrequencyStatus {
    pub n_used: usize,
    pub converged: bool,
    pub overflow: bool,
    pub singular_modes: Vec<usize>,
    pub resonance_suspect: Vec<usize>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Hz.
    pub frequencies: Vec<f64>,
    /// Physical `(ϑ, φ)` in radians.
    pub angles: Vec<(f64, f64)>,
    pub quantity: SweepQuantity,
    /// `values[f][a]`; for TS the dB value sits in the real part.
    pub values: Vec<Vec<Complex64>>,
    pub status: Vec<FrequencyStatus>,
}

impl SweepResult {
    pub fn n_used(&self) -> Vec<usize> {
        self.status.iter().map(|s| s.n_used).collect()
    }
}

fn one_frequency(
    model: &ScattererModel,
    incident: &IncidentField,
    f: f64,
    angles: &[(f64, f64)],
    quantity: SweepQuantity,
    epsilon: f64,
) -> Result<(Vec<Complex64>, FrequencyStatus)> {
    if !(f > 0.0 && f.is_finite()) {
        return Err(Error::Domain(format!("frequency {f} must be positive")));
    }
    let omega = 2.0 * std::f64::consts::PI * f;
    let frame = incident.frame();
    let r0 = model.outer_radius();
    let probes: Vec<Probe> = angles
        .iter()
        .map(|&(t, p)| {
            let theta = spherical(frame.to_canonical(direction(t, p))).1;
            match quantity {
                SweepQuantity::SurfacePressure => {
                    Probe { r: r0, theta, domain: Domain::Fluid(0), channels: vec![Channel::P] }
                }
                _ => Probe { r: f64::INFINITY, theta, domain: Domain::Fluid(0), channels: vec![Channel::FarField] },
            }
        })
        .collect();
    let opts = SeriesOptions { epsilon, ..Default::default() };
    let (sums, stats) = fieldeval::sum_series(model, incident, omega, &probes, &opts)?;
    let k1 = model.exterior().wavenumber(omega);
    let values = angles
        .iter()
        .zip(&sums)
        .map(|(&(t, p), s)| match quantity {
            SweepQuantity::TargetStrength => Complex64::new(target_strength(s.sums[0], incident.amplitude), 0.0),
            SweepQuantity::FarField => s.sums[0],
            SweepQuantity::SurfacePressure => {
                let x = direction(t, p).map(|c| c * r0);
                s.sums[0] + incident.pressure_and_gradient(k1, frame.to_canonical(x)).0
            }
        })
        .collect();
    let status = FrequencyStatus {
        n_used: stats.n_used,
        converged: stats.converged,
        overflow: stats.overflow,
        singular_modes: stats.singular_modes,
        resonance_suspect: stats.resonance_suspect,
        error: None,
    };
    Ok((values, status))
}

/// Evaluate `quantity` at every (frequency, angle) pair. A failing frequency
/// is recorded in its status and filled with NaN; the sweep continues.
pub fn sweep(
    model: &ScattererModel,
    incident: &IncidentField,
    frequencies: &[f64],
    angles: &[(f64, f64)],
    quantity: SweepQuantity,
    epsilon: f64,
) -> Result<SweepResult> {
    if frequencies.is_empty() || angles.is_empty() {
        return Err(Error::InvalidRequest("sweep needs at least one frequency and one angle".into()));
    }
    let rows: Vec<(Vec<Complex64>, FrequencyStatus)> = frequencies
        .par_iter()
        .map(|&f| {
            one_frequency(model, incident, f, angles, quantity, epsilon).unwrap_or_else(|e| {
                let nan = Complex64::new(f64::NAN, f64::NAN);
                (vec![nan; angles.len()], FrequencyStatus { error: Some(e.to_string()), ..Default::default() })
            })
        })
        .collect();
    let (values, status) = rows.into_iter().unzip();
    Ok(SweepResult { frequencies: frequencies.to_vec(), angles: angles.to_vec(), quantity, values, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use std::f64::consts::PI;

    #[test]
    fn ts_examples() {
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(target_strength(one, one), 0.0);
        assert!((target_strength(one * 10.0, one) - 20.0).abs() < 1e-12);
        let (p, q) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
        assert!((target_strength(p * 7.3, q * 7.3) - target_strength(p, q)).abs() < 1e-12);
        assert_eq!(target_strength(Complex64::new(0.0, 0.0), one), f64::NEG_INFINITY);
    }

    #[test]
    fn zero_frequency_pattern() {
        let p = presets::by_name("s1", None).unwrap();
        let out = farfield_pattern(&p.model, &p.incident, 0.0, &[(0.0, 0.0)], f64::EPSILON).unwrap();
        assert_eq!(out[0].value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn one_frequency_grid() {
        let p = presets::by_name("s1", Some(crate::BoundaryCondition::Shbc)).unwrap();
        let r = sweep(
            &p.model,
            &p.incident,
            &[500.0],
            &[(PI, 0.0), (PI / 2.0, 0.0)],
            SweepQuantity::TargetStrength,
            f64::EPSILON,
        )
        .unwrap();
        assert_eq!(r.values.len(), 1);
        assert_eq!(r.values[0].len(), 2);
        assert!(r.status[0].converged && r.values[0][0].re.is_finite());
    }

    #[test]
    fn bad_frequency_is_recorded() {
        let p = presets::by_name("s1", None).unwrap();
        let r =
            sweep(&p.model, &p.incident, &[-1.0, 500.0], &[(PI, 0.0)], SweepQuantity::FarField, f64::EPSILON).unwrap();
        assert!(r.status[0].error.is_some());
        assert!(r.status[1].error.is_none());
    }
}
