//! Test-only reference implementations.

#![allow(dead_code)]

/// Standalone rigid-sphere series; shares no code with the library.
pub mod rigid {
    use num_complex::Complex64 as C;

    /// `j_n` and `y_n` for `n = 0..=n_max`.
    pub fn bessel(x: f64, n_max: usize) -> (Vec<f64>, Vec<f64>) {
        let top = n_max + 60 + x as usize;
        let mut j = vec![0.0; top + 2];
        j[top] = 1e-300;
        for n in (1..=top).rev() {
            j[n - 1] = (2 * n + 1) as f64 / x * j[n] - j[n + 1];
            if j[n - 1].abs() > 1e200 {
                for v in j.iter_mut().skip(n - 1) {
                    *v *= 1e-200;
                }
            }
        }
        let s = (x.sin() / x) / j[0];
        let j: Vec<f64> = j[..=n_max + 1].iter().map(|v| v * s).collect();
        let mut y = vec![-x.cos() / x, -x.cos() / (x * x) - x.sin() / x];
        for n in 1..=n_max {
            y.push((2 * n + 1) as f64 / x * y[n] - y[n - 1]);
        }
        (j, y)
    }

    pub fn legendre(c: f64, n_max: usize) -> Vec<f64> {
        let mut p = vec![1.0, c];
        for n in 1..n_max {
            p.push(((2 * n + 1) as f64 * c * p[n] - n as f64 * p[n - 1]) / (n + 1) as f64);
        }
        p
    }

    pub fn derivs(x: f64, n_max: usize) -> (Vec<f64>, Vec<C>) {
        let (j, y) = bessel(x, n_max + 1);
        let h = |n: usize| C::new(j[n], y[n]);
        let dj = (0..=n_max).map(|n| n as f64 / x * j[n] - j[n + 1]).collect();
        let dh = (0..=n_max).map(|n| h(n) * (n as f64 / x) - h(n + 1)).collect();
        (dj, dh)
    }

    /// Total pressure on the surface of a rigid sphere of radius `a`, unit
    /// plane wave along +z.
    pub fn surface(k: f64, a: f64, theta: f64) -> C {
        let x = k * a;
        let n_max = x as usize + 50;
        let (_, dh) = derivs(x, n_max);
        let p = legendre(theta.cos(), n_max);
        let mut s = C::new(0.0, 0.0);
        for n in 0..=n_max {
            s += C::i().powu(n as u32 + 1) * ((2 * n + 1) as f64 * p[n]) / (dh[n] * x * x);
        }
        s
    }

    /// Far-field pattern `p₀` of the same problem.
    pub fn far(k: f64, a: f64, theta: f64) -> C {
        let x = k * a;
        let n_max = x as usize + 50;
        let (dj, dh) = derivs(x, n_max);
        let p = legendre(theta.cos(), n_max);
        let mut s = C::new(0.0, 0.0);
        for n in 0..=n_max {
            s += ((2 * n + 1) as f64 * dj[n] * p[n]) / dh[n];
        }
        s * C::i() / k
    }

    /// Exterior coefficient of mode `n` for unit amplitude, from the single
    /// boundary equation `∂p/∂r = 0`.
    pub fn coefficient(n: usize, x: f64) -> C {
        let (dj, dh) = derivs(x, n);
        -C::i().powu(n as u32) * ((2 * n + 1) as f64 * dj[n]) / dh[n]
    }
}
