//! Spherical Bessel and Hankel functions, Legendre polynomials with their
//! first three derivatives, and the angular functions Q0..Q3.
//!
//! Bessel values live in append-only tables whose chunk boundaries depend
//! only on the argument, so a value `Z_n(x)` is bit-identical no matter how
//! far the table was grown before it was read.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Magnitude above which `y_n` is treated as overflowed.
pub const OVERFLOW_LIMIT: f64 = 1e290;

/// Below this argument `j_n` comes from its two leading series terms.
const SMALL_ARGUMENT: f64 = 1e-8;

/// From this argument on, orders below `x/2` use the forward recurrence,
/// which is stable there and avoids a Miller start near `x`.
const FORWARD_ARGUMENT: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RadialKind {
    /// `j_n`
    First,
    /// `y_n`
    Second,
    /// `h_n = j_n + i y_n`
    Hankel,
}

/// Growable table of `j_n(x)` and optionally `y_n(x)`.
#[derive(Clone, Debug)]
pub struct BesselTable {
    x: f64,
    /// `j_n = m·2^e`
    j: Vec<(f64, i32)>,
    y: Vec<f64>,
    with_y: bool,
    y_overflow: Option<usize>,
    base: usize,
}

impl BesselTable {
    pub fn new(x: f64, with_y: bool) -> Result<Self> {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::Domain(format!("Bessel argument {x} must be finite and non-negative")));
        }
        if with_y && x == 0.0 {
            return Err(Error::Pole("y_n is singular at zero".into()));
        }
        let base = ((x.ceil() as usize) + 16).next_power_of_two().max(32);
        let mut t = BesselTable { x, j: Vec::new(), y: Vec::new(), with_y, y_overflow: None, base };
        t.ensure(1);
        Ok(t)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    /// Grow the table so that orders `0..=n_max` are available.
    pub fn ensure(&mut self, n_max: usize) {
        let forward = if self.x >= FORWARD_ARGUMENT { (self.x / 2.0) as usize } else { 0 };
        while self.j.len() <= n_max && self.j.len() <= forward && forward > 0 {
            if self.j.is_empty() {
                let (s, c) = self.x.sin_cos();
                let j0 = s / self.x;
                self.j.push(frexp(j0));
                self.j.push(frexp((j0 - c) / self.x));
                continue;
            }
            let k = self.j.len() - 1;
            let next = (2 * k + 1) as f64 / self.x * self.j(k) - self.j(k - 1);
            self.j.push(frexp(next));
        }
        while self.j.len() <= n_max {
            let cap = if self.j.is_empty() { self.base } else { 2 * (self.j.len() - 1) };
            let fresh = miller_j(self.x, cap);
            let start = self.j.len();
            self.j.extend_from_slice(&fresh[start..]);
        }
        if self.with_y && self.y_overflow.is_none() {
            self.extend_y(n_max);
        }
    }

    fn extend_y(&mut self, n_max: usize) {
        let x = self.x;
        if self.y.is_empty() {
            let (s, c) = x.sin_cos();
            self.y.push(-c / x);
            self.y.push(-c / (x * x) - s / x);
            for (i, v) in self.y.clone().iter().enumerate() {
                if !(v.abs() <= OVERFLOW_LIMIT) {
                    self.y_overflow = Some(i);
                    self.y.truncate(i + 1);
                    return;
                }
            }
        }
        while self.y.len() <= n_max {
            let k = self.y.len() - 1;
            let next = (2 * k + 1) as f64 / x * self.y[k] - self.y[k - 1];
            self.y.push(next);
            if !(next.abs() <= OVERFLOW_LIMIT) {
                self.y_overflow = Some(k + 1);
                return;
            }
        }
    }

    pub fn j(&self, n: usize) -> f64 {
        let (m, e) = self.j[n];
        ldexp(m, e)
    }

    /// `j_n` as `(m, e)` with `j_n = m·2^e`; exact even where `j_n` underflows.
    pub fn j_parts(&self, n: usize) -> (f64, i32) {
        self.j[n]
    }

    /// Binary exponent of `j_n`.
    pub fn j_exponent(&self, n: usize) -> i32 {
        self.j[n].1
    }

    /// `Z_n · 2^{-e}`; the shift applies to the first kind only.
    pub fn value_scaled(&self, kind: RadialKind, n: usize, e: i32) -> Complex64 {
        match kind {
            RadialKind::First => {
                let (m, je) = self.j[n];
                Complex64::new(ldexp(m, je - e), 0.0)
            }
            _ => self.value(kind, n),
        }
    }

    /// `y_n(x)`; infinite once past the overflow guard.
    pub fn y(&self, n: usize) -> f64 {
        match self.y_overflow {
            Some(k) if n >= k => f64::INFINITY,
            _ => self.y[n],
        }
    }

    /// First order whose `|y_n|` exceeds [`OVERFLOW_LIMIT`].
    pub fn overflow_at(&self) -> Option<usize> {
        self.y_overflow
    }

    /// True when every kind held by the table is finite and guarded at order `n`.
    pub fn usable(&self, n: usize) -> bool {
        !self.with_y || self.y_overflow.map_or(true, |k| n < k)
    }

    pub fn value(&self, kind: RadialKind, n: usize) -> Complex64 {
        match kind {
            RadialKind::First => Complex64::new(self.j(n), 0.0),
            RadialKind::Second => Complex64::new(self.y(n), 0.0),
            RadialKind::Hankel => Complex64::new(self.j(n), self.y(n)),
        }
    }

    /// Real-valued `j_n` or `y_n`.
    pub fn real(&self, kind: RadialKind, n: usize) -> f64 {
        match kind {
            RadialKind::First => self.j(n),
            RadialKind::Second => self.y(n),
            RadialKind::Hankel => panic!("Hankel values are complex"),
        }
    }
}

/// `(m, e)` with `v = m·2^e` and `|m|` in `[0.5, 1)`; zero and non-finite values pass through.
pub fn frexp(v: f64) -> (f64, i32) {
    if v == 0.0 || !v.is_finite() {
        return (v, 0);
    }
    let (v, shift) = if v.abs() < f64::MIN_POSITIVE { (v * 2f64.powi(64), -64) } else { (v, 0) };
    let bits = v.to_bits();
    let e = ((bits >> 52) & 0x7ff) as i32 - 1022;
    let m = f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52));
    (m, e + shift)
}

/// `m·2^e` without intermediate overflow or premature underflow.
pub fn ldexp(m: f64, e: i32) -> f64 {
    let mut v = m;
    let mut e = e;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
        if v == 0.0 {
            return v;
        }
    }
    v * 2f64.powi(e)
}

const RESCALE_EXP: i32 = 830;

/// `j_0..=j_{n_max}` as mantissa/exponent pairs, by Miller's backward
/// recurrence normalised on `j_0` or `j_1`. Rescaling uses exact powers of
/// two, so values far below the double range keep full precision.
fn miller_j(x: f64, n_max: usize) -> Vec<(f64, i32)> {
    let mut out = vec![(0.0, 0); n_max + 1];
    if x == 0.0 {
        out[0] = (0.5, 1);
        return out;
    }
    if x < SMALL_ARGUMENT {
        let (mut lead, mut le) = (0.5, 1);
        for (n, v) in out.iter_mut().enumerate() {
            if n > 0 {
                let (m, e) = frexp(lead * (x / (2 * n + 1) as f64));
                lead = m;
                le += e;
            }
            let (m, e) = frexp(lead * (1.0 - x * x / (2.0 * (2 * n + 3) as f64)));
            *v = (m, le + e);
        }
        return out;
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = (j0 - c) / x;

    let keep = n_max.max(1);
    // raw f_k and the number of rescalings applied before it was stored
    let mut raw = vec![(0.0, 0i32); keep + 1];
    let top = keep.max(x.ceil() as usize);
    let start = top + (160.0 * top as f64).sqrt().ceil() as usize + 16;
    let down = 2f64.powi(-RESCALE_EXP);
    let mut count = 0i32;
    let mut f_next = 0.0;
    let mut f = 1.0;
    for k in (1..=start).rev() {
        if k <= keep {
            raw[k] = (f, count);
        }
        let f_prev = (2 * k + 1) as f64 / x * f - f_next;
        f_next = f;
        f = f_prev;
        if f.abs() > 1e250 {
            f *= down;
            f_next *= down;
            count += 1;
        }
    }
    raw[0] = (f, count);
    let (fn_ref, c_ref, j_ref) = if j0.abs() >= j1.abs() { (raw[0].0, raw[0].1, j0) } else { (raw[1].0, raw[1].1, j1) };
    let (sm, se) = frexp(j_ref / fn_ref);
    let mut scaled: Vec<(f64, i32)> = raw
        .iter()
        .map(|&(v, ck)| {
            let (m, e) = frexp(v * sm);
            // later rescalings shrank the reference scale by 2^{-830} each
            (m, e + se - RESCALE_EXP * (c_ref - ck))
        })
        .collect();
    scaled.truncate(n_max + 1);
    scaled
}

/// Radial basis values `Z_n(ζ)` for `n = 0..=n_max+1`.
#[derive(Clone, Debug)]
pub struct RadialBasis {
    pub kind: RadialKind,
    pub zeta: f64,
    pub values: Vec<Complex64>,
    pub overflow_flag: bool,
    pub first_overflow: Option<usize>,
}

pub fn radial_basis(zeta: f64, kind: RadialKind, n_max: usize) -> Result<RadialBasis> {
    if zeta == 0.0 && kind != RadialKind::First {
        return Err(Error::Pole(format!("{kind:?} radial function at zero")));
    }
    let mut t = BesselTable::new(zeta, kind != RadialKind::First)?;
    t.ensure(n_max + 1);
    let first_overflow = if kind == RadialKind::First { None } else { t.overflow_at() };
    let values = (0..=n_max + 1).map(|n| t.value(kind, n)).collect();
    Ok(RadialBasis {
        kind,
        zeta,
        values,
        overflow_flag: first_overflow.map_or(false, |k| k <= n_max + 1),
        first_overflow,
    })
}

/// First or second derivative of `Z_n` at `ζ`.
pub fn radial_derivative(order: u8, n: usize, zeta: f64, kind: RadialKind) -> Result<Complex64> {
    if order == 0 || order > 2 {
        return Err(Error::Domain(format!("derivative order {order} not supported")));
    }
    if zeta == 0.0 {
        if kind != RadialKind::First {
            return Err(Error::Pole(format!("{kind:?} radial derivative at zero")));
        }
        let v = match (order, n) {
            (1, 1) => 1.0 / 3.0,
            (2, 0) => -1.0 / 3.0,
            (2, 2) => 2.0 / 15.0,
            _ => 0.0,
        };
        return Ok(Complex64::new(v, 0.0));
    }
    let mut t = BesselTable::new(zeta, kind != RadialKind::First)?;
    t.ensure(n + 1);
    let z = t.value(kind, n);
    let z1 = t.value(kind, n + 1);
    Ok(derivatives(n, zeta, z, z1)[order as usize - 1])
}

/// `[Z'_n, Z''_n]` from `Z_n` and `Z_{n+1}`.
pub fn derivatives(n: usize, zeta: f64, z: Complex64, z1: Complex64) -> [Complex64; 2] {
    let nf = n as f64;
    let d1 = z * (nf / zeta) - z1;
    let d2 = z * (nf * (nf - 1.0) / (zeta * zeta) - 1.0) + z1 * (2.0 / zeta);
    [d1, d2]
}

/// Legendre polynomials and their first three derivatives at a fixed `x`.
#[derive(Clone, Debug)]
pub struct LegendreTable {
    pub x: f64,
    pub p: Vec<f64>,
    pub dp: Vec<f64>,
    pub d2p: Vec<f64>,
    pub d3p: Vec<f64>,
}

impl LegendreTable {
    pub fn new(x: f64, n_max: usize) -> Result<Self> {
        if !(-1.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("Legendre argument {x} outside [-1, 1]")));
        }
        let mut t = LegendreTable { x, p: vec![1.0, x], dp: vec![0.0, 1.0], d2p: vec![0.0, 0.0], d3p: vec![0.0, 0.0] };
        t.extend(n_max);
        Ok(t)
    }

    pub fn extend(&mut self, n_max: usize) {
        let x = self.x;
        while self.p.len() <= n_max {
            let n = self.p.len() - 1;
            let (a, b, c) = ((2 * n + 1) as f64, n as f64, (n + 1) as f64);
            let p = (a * x * self.p[n] - b * self.p[n - 1]) / c;
            let dp = (a * (self.p[n] + x * self.dp[n]) - b * self.dp[n - 1]) / c;
            let d2p = (a * (2.0 * self.dp[n] + x * self.d2p[n]) - b * self.d2p[n - 1]) / c;
            let d3p = (a * (3.0 * self.d2p[n] + x * self.d3p[n]) - b * self.d3p[n - 1]) / c;
            self.p.push(p);
            self.dp.push(dp);
            self.d2p.push(d2p);
            self.d3p.push(d3p);
        }
    }
}

/// Angular functions for one mode at one polar angle.
#[derive(Clone, Copy, Debug, Default)]
pub struct Angular {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    /// `Q1 cot θ`
    pub q1_cot: f64,
    /// `Q2 + Q1 cot θ`, the angular part of the Laplacian
    pub lap: f64,
    /// `(Q2 - Q1 cot θ) cot θ`
    pub shear_cot: f64,
}

/// Growable angular table for one polar angle.
#[derive(Clone, Debug)]
pub struct AngularTable {
    pub theta: f64,
    cos: f64,
    sin: f64,
    leg: LegendreTable,
}

impl AngularTable {
    pub fn new(theta: f64, n_max: usize) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::Domain("polar angle must be finite".into()));
        }
        let (sin, cos) = theta.sin_cos();
        let leg = LegendreTable::new(cos.clamp(-1.0, 1.0), n_max)?;
        Ok(AngularTable { theta, cos, sin, leg })
    }

    pub fn extend(&mut self, n_max: usize) {
        self.leg.extend(n_max);
    }

    pub fn get(&mut self, n: usize) -> Angular {
        self.leg.extend(n);
        let (c, s) = (self.cos, self.sin);
        let (p, dp, d2p, d3p) = (self.leg.p[n], self.leg.dp[n], self.leg.d2p[n], self.leg.d3p[n]);
        Angular {
            q0: p,
            q1: -dp * s,
            q2: -dp * c + d2p * s * s,
            q3: dp * s + 3.0 * d2p * s * c - d3p * s * s * s,
            q1_cot: -dp * c,
            lap: d2p * s * s - 2.0 * dp * c,
            shear_cot: d2p * s * c,
        }
    }
}

/// `Q0..Q3` and `Q1 cot θ` for `n = 0..=n_max`.
#[derive(Clone, Debug)]
pub struct QFunctions {
    pub theta: f64,
    pub q0: Vec<f64>,
    pub q1: Vec<f64>,
    pub q2: Vec<f64>,
    pub q3: Vec<f64>,
    pub q1_cot: Vec<f64>,
}

pub fn q_functions(theta: f64, n_max: usize) -> Result<QFunctions> {
    let mut t = AngularTable::new(theta, n_max)?;
    let mut q = QFunctions {
        theta,
        q0: Vec::with_capacity(n_max + 1),
        q1: Vec::with_capacity(n_max + 1),
        q2: Vec::with_capacity(n_max + 1),
        q3: Vec::with_capacity(n_max + 1),
        q1_cot: Vec::with_capacity(n_max + 1),
    };
    for n in 0..=n_max {
        let a = t.get(n);
        q.q0.push(a.q0);
        q.q1.push(a.q1);
        q.q2.push(a.q2);
        q.q3.push(a.q3);
        q.q1_cot.push(a.q1_cot);
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    // Reference values from 40-digit arithmetic.
    const J_REF: &[(usize, f64, f64)] = &[
        (0, 1.0, 0.8414709848078965),
        (3, 1.0, 0.009006581117112515),
        (10, 1.0, 7.116552640047314e-11),
        (40, 15.0, 4.313498407228663e-15),
        (5, 30.0, -0.020504008736827492),
        (200, 10.0, 4.3594330496210814e-237),
        (100, 1000.0, -0.00025326311230945817),
        (2, 1e-3, 6.666666190476204e-08),
        (60, 5.0, 9.285901110341092e-60),
        (500, 450.5, 2.616110368539586e-10),
        (20, 1e-9, 7.625979004892143e-206),
    ];
    const Y_REF: &[(usize, f64, f64)] = &[
        (0, 1.0, -0.5403023058681398),
        (3, 1.0, -16.643314540123807),
        (10, 15.0, 0.07846168984964258),
        (30, 15.0, -73377.98398033707),
        (100, 1000.0, -0.0009700239000654441),
        (250, 80.0, -2.9243732989239983e+91),
    ];

    #[test]
    fn deep_underflow_keeps_exponent() {
        // log2 j_n(x) from mpmath
        let cases = [
            (622, 141.0, -1078.8391628056255),
            (300, 5.0, -1649.0195948608253),
            (1000, 2.0, -8534.5571296476964),
            (80, 1e-3, -1275.4315525785602),
        ];
        for (n, x, l2) in cases {
            let mut t = BesselTable::new(x, false).unwrap();
            t.ensure(n);
            let (m, e) = t.j_parts(n);
            assert!(m > 0.0);
            assert!((m.log2() + e as f64 - l2).abs() < 1e-12 * l2.abs(), "j_{n}({x})");
        }
        assert_eq!(ldexp(0.75, -1100), 0.0);
        assert_eq!(frexp(ldexp(0.75, -1060)), (0.75, -1060));
    }

    #[test]
    fn bessel_reference_values() {
        for &(n, x, v) in J_REF {
            let mut t = BesselTable::new(x, false).unwrap();
            t.ensure(n);
            assert!(rel(t.j(n), v) < 1e-13, "j_{n}({x}) = {} vs {v}", t.j(n));
        }
        for &(n, x, v) in Y_REF {
            let mut t = BesselTable::new(x, true).unwrap();
            t.ensure(n);
            assert!(rel(t.y(n), v) < 1e-13, "y_{n}({x}) = {} vs {v}", t.y(n));
        }
    }

    #[test]
    fn forward_branch_agrees_with_miller() {
        for x in [100.0, 517.3, 4.0e4] {
            let mut t = BesselTable::new(x, false).unwrap();
            t.ensure((x / 2.0) as usize);
            let m = miller_j(x, (x / 2.0) as usize);
            for (n, &(mm, me)) in m.iter().enumerate() {
                let (a, b) = (t.j(n), ldexp(mm, me));
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0 / x), "x={x} n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn table_values_do_not_depend_on_growth() {
        let x = 37.25;
        let mut a = BesselTable::new(x, true).unwrap();
        a.ensure(500);
        let mut b = BesselTable::new(x, true).unwrap();
        for n in 0..=500 {
            b.ensure(n);
            assert_eq!(a.j(n).to_bits(), b.j(n).to_bits());
            assert_eq!(a.y(n).to_bits(), b.y(n).to_bits());
        }
    }

    #[test]
    fn j_at_zero() {
        let b = radial_basis(0.0, RadialKind::First, 3).unwrap();
        assert_eq!(b.values[0].re, 1.0);
        assert!(b.values[1..].iter().all(|v| v.norm() == 0.0));
        assert!(matches!(radial_basis(0.0, RadialKind::Second, 3), Err(Error::Pole(_))));
        assert!(matches!(radial_basis(-1.0, RadialKind::First, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn overflow_flag_trips() {
        let b = radial_basis(0.1, RadialKind::Second, 400).unwrap();
        assert!(b.overflow_flag);
        let k = b.first_overflow.unwrap();
        assert!(b.values[k - 1].re.abs() <= OVERFLOW_LIMIT);
        let ok = radial_basis(1.0, RadialKind::Hankel, 20).unwrap();
        assert!(!ok.overflow_flag);
    }

    #[test]
    fn hankel_spec_example() {
        let z = 1.0e4;
        let b = radial_basis(z, RadialKind::Hankel, 3).unwrap();
        let lim = Complex64::i().powi(-4);
        let v = b.values[3] * Complex64::new(0.0, -z).exp() * z;
        assert!((v - lim).norm() < 1e-3);
    }

    #[test]
    fn derivative_identities_agree() {
        for &(n, x) in &[(1usize, 0.7), (5, 3.0), (12, 20.0), (30, 12.5)] {
            for kind in [RadialKind::First, RadialKind::Second] {
                let mut t = BesselTable::new(x, true).unwrap();
                t.ensure(n + 1);
                let d = radial_derivative(1, n, x, kind).unwrap().re;
                let alt = t.real(kind, n - 1) - (n + 1) as f64 / x * t.real(kind, n);
                assert!((d - alt).abs() <= 1e-12 * alt.abs().max(t.real(kind, n).abs()), "{n} {x}");
                // Z'' from differentiating Z' = (n/x) Z - Z_{n+1}
                let d2 = radial_derivative(2, n, x, kind).unwrap().re;
                let zp1 = radial_derivative(1, n + 1, x, kind).unwrap().re;
                let alt2 = -(n as f64) / (x * x) * t.real(kind, n) + n as f64 / x * d - zp1;
                assert!((d2 - alt2).abs() <= 1e-11 * alt2.abs().max(t.real(kind, n).abs()));
            }
        }
        assert_eq!(radial_derivative(1, 1, 0.0, RadialKind::First).unwrap().re, 1.0 / 3.0);
    }

    #[test]
    fn legendre_seeds() {
        let x = 0.37;
        let t = LegendreTable::new(x, 5).unwrap();
        assert!((t.dp[2] - 3.0 * x).abs() < 1e-15);
        assert!((t.d2p[3] - 15.0 * x).abs() < 1e-14);
        assert!((t.d3p[3] - 15.0).abs() < 1e-14);
        assert!((t.d3p[4] - 105.0 * x).abs() < 1e-13);
        assert!((t.p[2] - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-15);
        assert!(LegendreTable::new(1.5, 2).is_err());
    }

    #[test]
    fn legendre_at_endpoints() {
        let t = LegendreTable::new(1.0, 30).unwrap();
        for n in 0..=30 {
            let nf = n as f64;
            assert!(rel(t.p[n], 1.0) < 1e-14);
            if n > 0 {
                assert!(rel(t.dp[n], nf * (nf + 1.0) / 2.0) < 1e-13);
            }
        }
    }

    #[test]
    fn q_functions_at_pole() {
        let q = q_functions(0.0, 6).unwrap();
        for n in 0..=6 {
            assert_eq!(q.q0[n], 1.0);
            assert_eq!(q.q1[n], 0.0);
        }
        assert!(q_functions(f64::NAN, 2).is_err());
    }

    proptest! {
        #[test]
        fn q2_identity(theta in 0.0f64..std::f64::consts::PI, n in 0usize..60) {
            let mut t = AngularTable::new(theta, n).unwrap();
            let a = t.get(n);
            let nf = n as f64;
            let rhs = -a.q1_cot - nf * (nf + 1.0) * a.q0;
            let scale = 1.0 + nf * nf * (a.q0.abs() + a.q1.abs() + a.q2.abs());
            prop_assert!((a.q2 - rhs).abs() <= 1e-12 * scale);
        }

        #[test]
        fn q3_identity(theta in 0.05f64..3.09, n in 0usize..60) {
            let mut t = AngularTable::new(theta, n).unwrap();
            let a = t.get(n);
            let nf = n as f64;
            let cot = theta.cos() / theta.sin();
            let rhs = -a.q2 * cot + a.q1 * cot * cot + (-nf * nf - nf + 1.0) * a.q1;
            let scale = 1.0 + (1.0 + cot * cot) * nf * nf * (a.q1.abs() + a.q2.abs() + a.q3.abs());
            prop_assert!((a.q3 - rhs).abs() <= 1e-11 * scale);
        }

        #[test]
        fn wronskian(x in 0.1f64..100.0, n in 0usize..40) {
            let mut t = BesselTable::new(x, true).unwrap();
            t.ensure(n + 1);
            if t.usable(n + 1) {
                let w = t.j(n + 1) * t.y(n) - t.j(n) * t.y(n + 1);
                let expect = 1.0 / (x * x);
                let scale = expect.max(t.j(n + 1).abs() * t.y(n).abs());
                prop_assert!((w - expect).abs() <= 1e-10 * scale);
            }
        }

        #[test]
        fn hankel_is_j_plus_iy(x in 0.1f64..50.0, n in 0usize..30) {
            let mut t = BesselTable::new(x, true).unwrap();
            t.ensure(n);
            let h = t.value(RadialKind::Hankel, n);
            prop_assert_eq!(h.re, t.j(n));
            prop_assert_eq!(h.im, t.y(n));
        }
    }
}
