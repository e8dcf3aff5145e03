//! Relative residuals of the governing equations and coupling conditions.
//!
//! Each residual is the infinity norm of the equation's left-hand side over
//! the sample points, divided by the infinity norm of its leading term,
//! maximised over domains or interfaces.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldeval::{sum_series, Channel, Domain, Probe, SeriesOptions};
use crate::incident::IncidentField;
use crate::media::{BoundaryCondition, ScattererModel};
use crate::modal::FrequencyContext;

type C = Complex64;

/// Reference magnitudes below this count as a trivial field.
const TRIVIAL: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub points_per_domain: usize,
    pub innermost_points: usize,
    /// Points per side of each interface.
    pub interface_points: usize,
    /// The exterior is sampled on `[R₀,₁, factor·R₀,₁]`.
    pub exterior_factor: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { points_per_domain: 32, innermost_points: 25, interface_points: 32, exterior_factor: 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub helmholtz: f64,
    pub navier_r: f64,
    pub navier_theta: f64,
    pub displacement_bc: f64,
    pub pressure_bc: f64,
    pub omega: f64,
    pub n_used: usize,
    pub converged: bool,
    pub overflow: bool,
    pub sampling: Sampling,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        [self.helmholtz, self.navier_r, self.navier_theta, self.displacement_bc, self.pressure_bc]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den < TRIVIAL {
        0.0
    } else {
        num / den
    }
}

/// `i`-th of `n` angles in `(0, π)` and `[0, 2π)`; a fixed low-discrepancy walk.
fn angles(i: usize, n: usize) -> (f64, f64) {
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let theta = PI * (i as f64 + 0.5) / n as f64;
    let phi = 2.0 * PI * ((i as f64 * golden) % 1.0);
    (theta, phi)
}

const FLUID_VOLUME: [Channel; 2] = [Channel::P, Channel::LapP];
const SOLID_VOLUME: [Channel; 10] = [
    Channel::Ur,
    Channel::Ut,
    Channel::Srr,
    Channel::Stt,
    Channel::Spp,
    Channel::Srt,
    Channel::DrSrr,
    Channel::DtSrt,
    Channel::SrtCot,
    Channel::SttSppCot,
];
const SOLID_NAVIER_T: [Channel; 2] = [Channel::DrSrt, Channel::DtStt];

enum Role {
    Volume,
    /// Solid and fluid sides of interface `id`.
    Interface {
        id: usize,
        solid: bool,
    },
    /// SHBC or SSBC inner surface.
    Surface,
}

struct Site {
    probe: Probe,
    role: Role,
    phi: f64,
}

fn build_sites(model: &ScattererModel, s: &Sampling) -> Vec<Site> {
    let bc = model.innermost_condition();
    let shells = model.shells();
    let m_count = shells.len();
    let mut sites = Vec::new();
    let volume = |sites: &mut Vec<Site>, domain: Domain, r0: f64, r1: f64, n: usize| {
        let channels: Vec<Channel> = match domain {
            Domain::Fluid(_) => FLUID_VOLUME.to_vec(),
            _ => SOLID_VOLUME.iter().chain(SOLID_NAVIER_T.iter()).copied().collect(),
        };
        for i in 0..n {
            let r = r0 + (r1 - r0) * (i as f64 + 0.5) / n as f64;
            let (theta, phi) = angles(i, n);
            sites.push(Site { probe: Probe { r, theta, domain, channels: channels.clone() }, role: Role::Volume, phi });
        }
    };

    let r01 = model.outer_radius();
    volume(&mut sites, Domain::Fluid(0), r01, s.exterior_factor * r01, s.points_per_domain);
    for (m, sh) in shells.iter().enumerate() {
        let last = m + 1 == m_count;
        if last && bc == BoundaryCondition::Shbc {
            break;
        }
        let r1 = sh.inner_radius.unwrap_or(0.0);
        let n = if last && bc != BoundaryCondition::Nnbc { s.innermost_points } else { s.points_per_domain };
        volume(&mut sites, Domain::Solid(m), r1, sh.outer_radius, n);
        if !last {
            volume(&mut sites, Domain::Fluid(m + 1), shells[m + 1].outer_radius, r1, s.points_per_domain);
        } else if bc == BoundaryCondition::Nnbc {
            volume(&mut sites, Domain::Fluid(m + 1), 0.0, r1, s.innermost_points);
        }
    }

    let interface = |sites: &mut Vec<Site>, id: usize, r: f64, fluid: usize, solid: usize| {
        for i in 0..s.interface_points {
            let (theta, phi) = angles(i, s.interface_points);
            sites.push(Site {
                probe: Probe { r, theta, domain: Domain::Fluid(fluid), channels: vec![Channel::P, Channel::DrP] },
                role: Role::Interface { id, solid: false },
                phi,
            });
            sites.push(Site {
                probe: Probe { r, theta, domain: Domain::Solid(solid), channels: vec![Channel::Ur, Channel::Srr] },
                role: Role::Interface { id, solid: true },
                phi,
            });
        }
    };
    let mut id = 0;
    for (m, sh) in shells.iter().enumerate() {
        let last = m + 1 == m_count;
        if last && bc == BoundaryCondition::Shbc {
            for i in 0..s.interface_points {
                let (theta, phi) = angles(i, s.interface_points);
                sites.push(Site {
                    probe: Probe {
                        r: sh.outer_radius,
                        theta,
                        domain: Domain::Fluid(m),
                        channels: vec![Channel::P, Channel::DrP],
                    },
                    role: Role::Surface,
                    phi,
                });
            }
            break;
        }
        interface(&mut sites, id, sh.outer_radius, m, m);
        id += 1;
        match (last, bc, sh.inner_radius) {
            (false, _, Some(r1)) | (true, BoundaryCondition::Nnbc, Some(r1)) => {
                interface(&mut sites, id, r1, m + 1, m);
                id += 1;
            }
            (true, BoundaryCondition::Ssbc, Some(r1)) => {
                for i in 0..s.interface_points {
                    let (theta, phi) = angles(i, s.interface_points);
                    sites.push(Site {
                        probe: Probe {
                            r: r1,
                            theta,
                            domain: Domain::Solid(m),
                            channels: vec![Channel::Srr, Channel::Stt, Channel::Spp],
                        },
                        role: Role::Surface,
                        phi,
                    });
                }
            }
            _ => {}
        }
    }
    sites
}

#[derive(Default, Clone, Copy)]
struct Norms {
    num: f64,
    den: f64,
}

impl Norms {
    fn add(&mut self, num: C, den: C) {
        self.num = self.num.max(num.norm());
        self.den = self.den.max(den.norm());
    }
    fn value(&self) -> f64 {
        ratio(self.num, self.den)
    }
}

/// The five relative residuals at angular frequency `omega`.
pub fn residuals(
    model: &ScattererModel,
    incident: &IncidentField,
    omega: f64,
    sampling: &Sampling,
) -> Result<ResidualReport> {
    if !omega.is_finite() || omega < 0.0 {
        return Err(Error::Domain(format!("angular frequency {omega} must be finite and non-negative")));
    }
    if sampling.points_per_domain == 0 || sampling.innermost_points == 0 || sampling.interface_points == 0 {
        return Err(Error::InvalidRequest("sampling must be nonempty in every domain".into()));
    }
    let zero = ResidualReport {
        helmholtz: 0.0,
        navier_r: 0.0,
        navier_theta: 0.0,
        displacement_bc: 0.0,
        pressure_bc: 0.0,
        omega,
        n_used: 0,
        converged: true,
        overflow: false,
        sampling: *sampling,
    };
    if omega == 0.0 || incident.amplitude.norm() == 0.0 {
        return Ok(zero);
    }
    let sites = build_sites(model, sampling);
    let probes: Vec<Probe> = sites.iter().map(|s| s.probe.clone()).collect();
    let (sums, stats) = sum_series(model, incident, omega, &probes, &SeriesOptions::default())?;
    let ctx = FrequencyContext::new(model, omega);
    let frame_k = ctx.fluids[0].0;

    let n_domains = model.fluids().len() + model.shell_count();
    let mut helm = vec![Norms::default(); n_domains];
    let mut nav_r = vec![Norms::default(); model.shell_count()];
    let mut nav_t = vec![Norms::default(); model.shell_count()];
    let n_if = 2 * model.shell_count();
    let mut disp = vec![Norms::default(); n_if + 1];
    let mut press = vec![Norms::default(); n_if + 1];
    // fluid side values of each interface sample, matched with the solid side that follows
    let mut pending: Option<(C, C, f64)> = None;

    for (site, ps) in sites.iter().zip(&sums) {
        let ch = &site.probe.channels;
        let get = |c: Channel| ch.iter().position(|&v| v == c).map(|i| ps.sums[i]).unwrap_or_default();
        let (r, theta) = (site.probe.r, site.probe.theta);
        let total = |p: C, dp: C| -> (C, C) {
            if site.probe.domain == Domain::Fluid(0) {
                let x = [r * theta.sin() * site.phi.cos(), r * theta.sin() * site.phi.sin(), r * theta.cos()];
                let (pi, g) = incident.pressure_and_gradient(frame_k, x);
                let er = [x[0] / r, x[1] / r, x[2] / r];
                (p + pi, dp + g[0] * er[0] + g[1] * er[1] + g[2] * er[2])
            } else {
                (p, dp)
            }
        };
        match (&site.role, site.probe.domain) {
            (Role::Volume, Domain::Fluid(f)) => {
                let k = ctx.fluids[f].0;
                let p = get(Channel::P);
                helm[f].add(get(Channel::LapP) + p * (k * k), p * (k * k));
            }
            (Role::Volume, Domain::Solid(m)) => {
                let rho_w2 = ctx.shells[m].density * omega * omega;
                let (srr, stt, spp, srt) = (get(Channel::Srr), get(Channel::Stt), get(Channel::Spp), get(Channel::Srt));
                let ur = get(Channel::Ur) * rho_w2;
                let ut = get(Channel::Ut) * rho_w2;
                let lhs_r = get(Channel::DrSrr)
                    + get(Channel::DtSrt) / r
                    + (srr * 2.0 - stt - spp + get(Channel::SrtCot)) / r
                    + ur;
                let lhs_t =
                    get(Channel::DrSrt) + get(Channel::DtStt) / r + (get(Channel::SttSppCot) + srt * 3.0) / r + ut;
                nav_r[m].add(lhs_r, ur);
                nav_t[m].add(lhs_t, ut);
            }
            (Role::Interface { solid: false, .. }, Domain::Fluid(f)) => {
                let (p, dp) = total(get(Channel::P), get(Channel::DrP));
                pending = Some((p, dp, ctx.fluids[f].1));
            }
            (Role::Interface { id, solid: true }, _) => {
                let (p, dp, rho_f) = pending.take().expect("fluid side precedes solid side");
                let ur = get(Channel::Ur);
                disp[*id].add(ur * (rho_f * omega * omega) - dp, dp);
                press[*id].add(get(Channel::Srr) + p, p);
            }
            (Role::Surface, Domain::Fluid(f)) => {
                // rigid surface: ∂p/∂r = 0, measured against k|p|
                let (p, dp) = total(get(Channel::P), get(Channel::DrP));
                disp[n_if].add(dp, p * ctx.fluids[f].0);
            }
            (Role::Surface, Domain::Solid(_)) => {
                // free surface: σ_rr = 0, measured against the tangential stresses
                let scale = get(Channel::Stt).norm().max(get(Channel::Spp).norm());
                press[n_if].add(get(Channel::Srr), C::new(scale, 0.0));
            }
            _ => {}
        }
    }

    let worst = |v: &[Norms]| v.iter().map(Norms::value).fold(0.0, f64::max);
    Ok(ResidualReport {
        helmholtz: worst(&helm),
        navier_r: worst(&nav_r),
        navier_theta: worst(&nav_t),
        displacement_bc: worst(&disp),
        pressure_bc: worst(&press),
        omega,
        n_used: stats.n_used,
        converged: stats.converged,
        overflow: stats.overflow,
        sampling: *sampling,
    })
}
