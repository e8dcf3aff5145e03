//! Adaptive Gauss–Kronrod (10/21) integration of vector-valued complex
//! integrands, and Gauss–Legendre rules.

use num_complex::Complex64;

use crate::error::{Error, Result};

// 21-point Kronrod abscissae; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208896270190,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadratureOptions {
    /// Relative tolerance per component.
    pub tol: f64,
    pub max_panels: usize,
    pub initial_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { tol: 1e-12, max_panels: 2000, initial_panels: 4 }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<Complex64>,
    error: Vec<f64>,
    l1: Vec<f64>,
}

fn panel<F>(f: &F, a: f64, b: f64, dim: usize, buf: &mut [Complex64]) -> Panel
where
    F: Fn(f64, &mut [Complex64]),
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![Complex64::new(0.0, 0.0); dim];
    let mut g = vec![Complex64::new(0.0, 0.0); dim];
    let mut l1 = vec![0.0; dim];
    let mut add = |x: f64, wk: f64, wg: f64, buf: &mut [Complex64]| {
        f(x, buf);
        for i in 0..dim {
            k[i] += buf[i] * wk;
            g[i] += buf[i] * wg;
            l1[i] += buf[i].norm() * wk;
        }
    };
    add(c, WGK[10], 0.0, buf);
    for j in 0..10 {
        let wg = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
        add(c - h * XGK[j], WGK[j], wg, buf);
        add(c + h * XGK[j], WGK[j], wg, buf);
    }
    let error = k.iter().zip(&g).map(|(a, b)| ((a - b) * h).norm()).collect();
    Panel {
        a,
        b,
        value: k.into_iter().map(|v| v * h).collect(),
        error,
        l1: l1.into_iter().map(|v| v * h.abs()).collect(),
    }
}

/// Integrate the `dim`-component integrand `f(x, out)` over `[a, b]`.
///
/// Each component converges once its error estimate falls below
/// `tol·|I|` or below the round-off floor `64·ε·∫|f|`.
pub fn integrate<F>(f: F, a: f64, b: f64, dim: usize, opts: &QuadratureOptions) -> Result<Vec<Complex64>>
where
    F: Fn(f64, &mut [Complex64]),
{
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    let n0 = opts.initial_panels.max(1);
    let mut panels: Vec<Panel> = (0..n0)
        .map(|i| {
            let lo = a + (b - a) * i as f64 / n0 as f64;
            let hi = if i + 1 == n0 { b } else { a + (b - a) * (i + 1) as f64 / n0 as f64 };
            panel(&f, lo, hi, dim, &mut buf)
        })
        .collect();
    loop {
        let mut total = vec![Complex64::new(0.0, 0.0); dim];
        let mut err = vec![0.0; dim];
        let mut l1 = vec![0.0; dim];
        for p in &panels {
            for i in 0..dim {
                total[i] += p.value[i];
                err[i] += p.error[i];
                l1[i] += p.l1[i];
            }
        }
        let allowed: Vec<f64> = (0..dim)
            .map(|i| (opts.tol * total[i].norm()).max(64.0 * f64::EPSILON * l1[i]).max(f64::MIN_POSITIVE))
            .collect();
        if (0..dim).all(|i| err[i] <= allowed[i]) {
            return Ok(total);
        }
        if panels.len() >= opts.max_panels {
            return Err(Error::QuadratureFailure(format!("no convergence with {} panels on [{a}, {b}]", panels.len())));
        }
        let worst = panels
            .iter()
            .enumerate()
            .map(|(j, p)| (j, (0..dim).map(|i| p.error[i] / allowed[i]).fold(0.0, f64::max)))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
            .0;
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        panels.push(panel(&f, p.a, mid, dim, &mut buf));
        panels.push(panel(&f, mid, p.b, dim, &mut buf));
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 1..n {
                let p2 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p0) / (k + 1) as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let k: f64 = WGK[10] + 2.0 * WGK[..10].iter().sum::<f64>();
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15 && (g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials() {
        let opts = QuadratureOptions { initial_panels: 1, ..Default::default() };
        let r = integrate(|x, out| out[0] = Complex64::new(x.powi(30), x.powi(29)), -1.0, 1.0, 1, &opts).unwrap();
        assert!((r[0].re - 2.0 / 31.0).abs() < 1e-15 && r[0].im.abs() < 1e-15);
    }

    #[test]
    fn oscillatory_integrand() {
        let k = 200.0;
        let opts = QuadratureOptions::default();
        let r = integrate(|x, out| out[0] = Complex64::new(0.0, k * x).exp(), -1.0, 1.0, 1, &opts).unwrap();
        let exact = 2.0 * (k as f64).sin() / k;
        assert!((r[0].re - exact).abs() < 1e-12 * exact.abs().max(1e-3), "{} {exact}", r[0].re);
        assert!(r[0].im.abs() < 1e-13);
    }

    #[test]
    fn failure_is_reported() {
        let opts = QuadratureOptions { tol: 1e-14, max_panels: 8, initial_panels: 1 };
        let r = integrate(|x, out| out[0] = Complex64::new(x.abs().sqrt(), 0.0), -1.0, 1.0, 1, &opts);
        assert!(matches!(r, Err(Error::QuadratureFailure(_))));
    }

    #[test]
    fn gauss_legendre_moments() {
        let (x, w) = gauss_legendre(20);
        for p in 0..40 {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((s - exact).abs() < 1e-14, "{p}");
        }
    }
}
