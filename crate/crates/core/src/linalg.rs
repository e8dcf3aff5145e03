//! Dense complex LU with partial pivoting for the small modal systems.

use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j) * x[j]).sum()).collect()
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self.get(i, j).norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn column_max(&self, j: usize) -> f64 {
        (0..self.rows).map(|i| self.get(i, j).norm()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    /// `max |U| / max |A|`
    pub growth: f64,
}

impl Lu {
    /// Factor a square matrix; `None` when a pivot vanishes.
    pub fn factor(a: &Matrix) -> Option<Lu> {
        let n = a.rows;
        assert_eq!(n, a.cols, "LU needs a square matrix");
        let amax = a.data.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pv) =
                (k..n).map(|i| (i, lu.get(i, k).norm())).fold((k, -1.0), |b, c| if c.1 > b.1 { c } else { b });
            if !(pv > 0.0) || !pv.is_finite() {
                return None;
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu.get(k, k);
            for i in k + 1..n {
                let l = lu.get(i, k) / pivot;
                lu.set(i, k, l);
                if l.norm() != 0.0 {
                    for j in k + 1..n {
                        let v = lu.get(i, j) - l * lu.get(k, j);
                        lu.set(i, j, v);
                    }
                }
            }
        }
        let umax =
            (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).map(|(i, j)| lu.get(i, j).norm()).fold(0.0, f64::max);
        Some(Lu { lu, perm, growth: if amax > 0.0 { umax / amax } else { 0.0 } })
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.rows;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu.get(i, j);
                x[i] = x[i] - l * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] = x[i] - self.lu.get(i, j) * x[j];
            }
            x[i] /= self.lu.get(i, i);
        }
        x
    }

    /// Exact `‖A⁻¹‖₁` from the factorisation.
    pub fn inverse_norm1(&self) -> f64 {
        let n = self.lu.rows;
        let mut best = 0.0_f64;
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.solve(&e);
            best = best.max(col.iter().map(|v| v.norm()).sum());
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let mut a = Matrix::zeros(3, 3);
        let vals = [[1.0, 2.0, 0.5], [0.0, 1e-3, 4.0], [3.0, -1.0, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                a.set(i, j, Complex64::new(vals[i][j], 0.1 * (i + j) as f64));
            }
        }
        let x = vec![Complex64::new(1.0, -1.0), Complex64::new(0.5, 2.0), Complex64::new(-3.0, 0.0)];
        let b = a.mul_vec(&x);
        let lu = Lu::factor(&a).unwrap();
        let y = lu.solve(&b);
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).norm() < 1e-13);
        }
        assert!(lu.inverse_norm1() * a.norm1() >= 1.0);
    }

    #[test]
    fn singular_detected() {
        let mut a = Matrix::zeros(2, 2);
        a.set(0, 0, Complex64::new(1.0, 0.0));
        a.set(1, 0, Complex64::new(2.0, 0.0));
        assert!(Lu::factor(&a).is_none());
    }
}
