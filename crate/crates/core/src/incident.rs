//! Incident fields, their modal forcing coefficients and the transient wavelet.
//!
//! All modal work happens in a canonical frame where the incident wave
//! travels along +x3. [`Frame`] maps physical points into that frame and
//! vectors and tensors back out of it.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureOptions};
use crate::specfun::BesselTable;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IncidentKind {
    PlaneWave,
    PointSource { source_radius: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncidentField {
    pub kind: IncidentKind,
    /// `P_inc` in Pa.
    pub amplitude: Complex64,
    /// `ϑ_s`: polar angle of the source position.
    pub source_polar: f64,
    /// `φ_s`: azimuth of the source position.
    pub source_azimuth: f64,
}

impl IncidentField {
    /// Unit-amplitude plane wave whose source sits at `(ϑ_s, φ_s)`.
    pub fn plane_wave(source_polar: f64, source_azimuth: f64) -> Self {
        IncidentField {
            kind: IncidentKind::PlaneWave,
            amplitude: Complex64::new(1.0, 0.0),
            source_polar,
            source_azimuth,
        }
    }

    /// Plane wave travelling along +x3.
    pub fn along_z() -> Self {
        Self::plane_wave(PI, 0.0)
    }

    pub fn point_source(source_radius: f64, source_polar: f64, source_azimuth: f64) -> Self {
        IncidentField {
            kind: IncidentKind::PointSource { source_radius },
            amplitude: Complex64::new(1.0, 0.0),
            source_polar,
            source_azimuth,
        }
    }

    /// Aspect angle α and elevation β in radians: `φ_s = α`, `ϑ_s = π/2 − β`.
    pub fn from_aspect(alpha: f64, beta: f64) -> Self {
        Self::plane_wave(PI / 2.0 - beta, alpha)
    }

    pub fn with_amplitude(mut self, amplitude: Complex64) -> Self {
        self.amplitude = amplitude;
        self
    }

    /// Propagation direction `d_s`.
    pub fn direction(&self) -> Vec3 {
        let (st, ct) = self.source_polar.sin_cos();
        let (sp, cp) = self.source_azimuth.sin_cos();
        [-st * cp, -st * sp, -ct]
    }

    pub fn validate(&self, outer_radius: f64) -> Result<()> {
        if !self.source_polar.is_finite() || !self.source_azimuth.is_finite() || !self.amplitude.is_finite() {
            return Err(Error::InvalidIncident("non-finite incident parameters".into()));
        }
        if let IncidentKind::PointSource { source_radius } = self.kind {
            if !(source_radius > outer_radius && source_radius.is_finite()) {
                return Err(Error::InvalidIncident(format!(
                    "source radius {source_radius} must exceed the outer radius {outer_radius}"
                )));
            }
        }
        Ok(())
    }

    /// Incident pressure and its gradient at a canonical-frame point.
    pub fn pressure_and_gradient(&self, k: f64, x: Vec3) -> (Complex64, [Complex64; 3]) {
        let p0 = self.amplitude;
        match self.kind {
            IncidentKind::PlaneWave => {
                let p = p0 * Complex64::new(0.0, k * x[2]).exp();
                let g = p * Complex64::new(0.0, k);
                (p, [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), g])
            }
            IncidentKind::PointSource { source_radius: rs } => {
                let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                let d = (r2 + 2.0 * rs * x[2] + rs * rs).sqrt();
                let excess = (r2 + 2.0 * rs * x[2]) / (d + rs);
                let phase = Complex64::new(0.0, k * rs).exp() * Complex64::new(0.0, k * excess).exp();
                let p = p0 * phase * (rs / d);
                let radial = p * (Complex64::new(0.0, k * d) - 1.0) / d;
                let rel = [x[0], x[1], x[2] + rs];
                (p, [radial * (rel[0] / d), radial * (rel[1] / d), radial * (rel[2] / d)])
            }
        }
    }

    pub fn frame(&self) -> Frame {
        Frame::new(self.direction())
    }
}

/// Rotation taking the propagation direction onto +x3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    /// Rows are the canonical axes expressed in physical coordinates.
    pub rot: Mat3,
}

impl Frame {
    pub fn new(d: Vec3) -> Self {
        let flip = d[2] < 0.0;
        let d = if flip { [d[0], -d[1], -d[2]] } else { d };
        // Rodrigues rotation taking d to e3, well conditioned for d3 >= 0.
        let v = [d[1], -d[0], 0.0];
        let c = d[2];
        let f = 1.0 / (1.0 + c);
        let vx = [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]];
        let mut r = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut vx2 = 0.0;
                for k in 0..3 {
                    vx2 += vx[i][k] * vx[k][j];
                }
                r[i][j] = if i == j { 1.0 } else { 0.0 } + vx[i][j] + f * vx2;
            }
        }
        if flip {
            // apply diag(1, -1, -1) first
            for row in r.iter_mut() {
                row[1] = -row[1];
                row[2] = -row[2];
            }
        }
        Frame { rot: r }
    }

    pub fn identity() -> Self {
        Frame { rot: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] }
    }

    pub fn to_canonical(&self, x: Vec3) -> Vec3 {
        mat_vec(&self.rot, x)
    }

    pub fn vector_to_physical<T>(&self, v: [T; 3]) -> [T; 3]
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let r = &self.rot;
        let col = |j: usize| v[0] * r[0][j] + v[1] * r[1][j] + v[2] * r[2][j];
        [col(0), col(1), col(2)]
    }

    pub fn tensor_to_physical<T>(&self, s: [[T; 3]; 3]) -> [[T; 3]; 3]
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let r = &self.rot;
        let mut out = s;
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = s[0][0] * 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        acc = acc + s[k][l] * (r[k][i] * r[l][j]);
                    }
                }
                out[i][j] = acc;
            }
        }
        out
    }
}

fn mat_vec(m: &Mat3, x: Vec3) -> Vec3 {
    [
        m[0][0] * x[0] + m[0][1] * x[1] + m[0][2] * x[2],
        m[1][0] * x[0] + m[1][1] * x[1] + m[1][2] * x[2],
        m[2][0] * x[0] + m[2][1] * x[1] + m[2][2] * x[2],
    ]
}

fn i_pow(n: usize) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Plane-wave forcing from `j_n(k R)` and `j_{n+1}(k R)`.
pub fn plane_wave_from_values(
    n: usize,
    k: f64,
    r: f64,
    jn: f64,
    jn1: f64,
    amplitude: Complex64,
) -> (Complex64, Complex64) {
    let c = amplitude * i_pow(n) * (2 * n + 1) as f64;
    let zeta = k * r;
    let djn = n as f64 / zeta * jn - jn1;
    (c * jn, c * (k * djn))
}

pub fn plane_wave_coeffs(n: usize, k1: f64, r01: f64, amplitude: Complex64) -> Result<(Complex64, Complex64)> {
    if !(k1 > 0.0 && r01 > 0.0) {
        return Err(Error::Domain(format!("plane-wave coefficients need k1, R01 > 0, got {k1}, {r01}")));
    }
    let mut t = BesselTable::new(k1 * r01, false)?;
    t.ensure(n + 1);
    Ok(plane_wave_from_values(n, k1, r01, t.j(n), t.j(n + 1), amplitude))
}

/// Point-source forcing for every order in `orders`, integrated jointly.
pub fn point_source_block(
    orders: std::ops::Range<usize>,
    k1: f64,
    r01: f64,
    rs: f64,
    amplitude: Complex64,
    opts: &QuadratureOptions,
) -> Result<Vec<(Complex64, Complex64)>> {
    if !(rs > r01) || !(k1 >= 0.0) || !(r01 > 0.0) {
        return Err(Error::InvalidIncident(format!("point source needs r_s > R01 > 0, got r_s = {rs}, R01 = {r01}")));
    }
    let n_hi = orders.end;
    let start = orders.start;
    let dim = 2 * (n_hi - start);
    let integrand = |v: f64, out: &mut [Complex64]| {
        let q2_minus = r01 * r01 + 2.0 * rs * r01 * v;
        let q = (q2_minus + rs * rs).sqrt();
        let e = Complex64::new(0.0, k1 * (q2_minus / (q + rs))).exp();
        let f1 = e / q;
        let f2 = e * (Complex64::new(0.0, k1 * q) - 1.0) * ((r01 + rs * v) / (q * q * q));
        let (mut p0, mut p1) = (1.0, v);
        for n in 0..n_hi {
            let p = match n {
                0 => 1.0,
                1 => v,
                _ => {
                    let p2 = ((2 * n - 1) as f64 * v * p1 - (n - 1) as f64 * p0) / n as f64;
                    p0 = p1;
                    p1 = p2;
                    p2
                }
            };
            if n >= start {
                let i = 2 * (n - start);
                out[i] = f1 * p;
                out[i + 1] = f2 * p;
            }
        }
    };
    let vals = integrate(integrand, -1.0, 1.0, dim, opts)?;
    let phase = Complex64::new(0.0, k1 * rs).exp();
    Ok((start..n_hi)
        .map(|n| {
            let c = amplitude * phase * ((2 * n + 1) as f64 / 2.0 * rs);
            let i = 2 * (n - start);
            (c * vals[i], c * vals[i + 1])
        })
        .collect())
}

pub fn point_source_coeffs(
    n: usize,
    k1: f64,
    r01: f64,
    rs: f64,
    amplitude: Complex64,
    tol: f64,
) -> Result<(Complex64, Complex64)> {
    if !(tol > 0.0) {
        return Err(Error::Domain("quadrature tolerance must be positive".into()));
    }
    let opts = QuadratureOptions { tol, ..Default::default() };
    Ok(point_source_block(n..n + 1, k1, r01, rs, amplitude, &opts)?[0])
}

/// Closed form of the zeroth point-source coefficient.
pub fn point_source_f0(k1: f64, r01: f64, rs: f64, amplitude: Complex64) -> Complex64 {
    let z = k1 * r01;
    let sinc = if z == 0.0 { 1.0 } else { z.sin() / z };
    amplitude * sinc * Complex64::new(0.0, k1 * rs).exp()
}

/// Lazily computed forcing coefficients for one frequency.
#[derive(Clone, Debug)]
pub struct Forcing {
    field: IncidentField,
    k1: f64,
    r01: f64,
    opts: QuadratureOptions,
    cache: Vec<(Complex64, Complex64)>,
}

/// Orders integrated together for point sources.
const BLOCK: usize = 32;

impl Forcing {
    pub fn new(field: IncidentField, k1: f64, r01: f64) -> Self {
        Forcing { field, k1, r01, opts: QuadratureOptions::default(), cache: Vec::new() }
    }

    pub fn with_quadrature(mut self, opts: QuadratureOptions) -> Self {
        self.opts = opts;
        self
    }

    /// `(F1, F2)` at order `n`; `exterior` must hold `j_n(k1 R01)` up to `n + 1`.
    pub fn get(&mut self, n: usize, exterior: &BesselTable) -> Result<(Complex64, Complex64)> {
        match self.field.kind {
            IncidentKind::PlaneWave => {
                Ok(plane_wave_from_values(n, self.k1, self.r01, exterior.j(n), exterior.j(n + 1), self.field.amplitude))
            }
            IncidentKind::PointSource { source_radius } => {
                while self.cache.len() <= n {
                    let lo = self.cache.len();
                    let block = point_source_block(
                        lo..lo + BLOCK,
                        self.k1,
                        self.r01,
                        source_radius,
                        self.field.amplitude,
                        &self.opts,
                    )?;
                    self.cache.extend(block);
                }
                Ok(self.cache[n])
            }
        }
    }
}

/// The two-cycle wavelet of centre frequency `f_c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wavelet {
    pub center_frequency: f64,
}

impl Wavelet {
    pub fn new(center_frequency: f64) -> Result<Self> {
        if !(center_frequency > 0.0 && center_frequency.is_finite()) {
            return Err(Error::Domain(format!("centre frequency {center_frequency} must be positive")));
        }
        Ok(Wavelet { center_frequency })
    }

    pub fn omega_c(&self) -> f64 {
        2.0 * PI * self.center_frequency
    }

    pub fn time(&self, t: f64) -> f64 {
        wavelet_time(t, self.center_frequency)
    }

    pub fn spectrum(&self, omega: f64) -> Complex64 {
        wavelet_spectrum(omega, self.center_frequency)
    }
}

pub fn wavelet_time(t: f64, fc: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 / fc {
        return 0.0;
    }
    let wc = 2.0 * PI * fc;
    4.0 / (3.0 * 3f64.sqrt()) * ((wc * t).sin() - 0.5 * (2.0 * wc * t).sin())
}

/// Spectrum `∫ P(t) e^{iωt} dt` of [`wavelet_time`].
///
/// Evaluated in factored form around the nearest of `0, ±ω_c, ±2ω_c`, so the
/// removable singularities reduce to their limits without a separate branch.
pub fn wavelet_spectrum(omega: f64, fc: f64) -> Complex64 {
    let wc = 2.0 * PI * fc;
    let m = (omega / wc).round().clamp(-2.0, 2.0);
    let u = (omega - m * wc) / wc;
    let factors = [omega - wc, omega + wc, omega - 2.0 * wc, omega + 2.0 * wc];
    let skip = match m as i32 {
        1 => Some(0),
        -1 => Some(1),
        2 => Some(2),
        -2 => Some(3),
        _ => None,
    };
    // 1 - e^{2πiω/ω_c} = -2i sin(πu) e^{iπu}
    let phase = Complex64::new(0.0, PI * u).exp() * Complex64::new(0.0, -2.0);
    let mut denom = 1.0;
    for (i, f) in factors.iter().enumerate() {
        if Some(i) != skip {
            denom *= f;
        }
    }
    let num = match skip {
        // sin(πu) / (u ω_c)
        Some(_) => {
            let x = PI * u;
            let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
            PI / wc * sinc
        }
        None => (PI * u).sin(),
    };
    phase * (4.0 / 3f64.sqrt() * wc.powi(3) * num / denom)
}
