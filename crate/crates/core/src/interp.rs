//! Interpolation of sampled positive-axis functions in `ln x`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A complex function sampled at increasing `x > 0`, interpolated with a
/// natural cubic spline in `ln x` (real and imaginary parts separately).
/// Outside the sampled range the magnitude is extrapolated as a power law
/// fitted to the two outermost samples and the phase is held.
#[derive(Debug, Clone, PartialEq)]
pub struct LogTable {
    log_x: Vec<f64>,
    values: Vec<Complex64>,
    second: Vec<Complex64>,
    lower_exponent: f64,
    upper_exponent: f64,
}

impl LogTable {
    pub fn new(x: &[f64], values: &[Complex64]) -> Result<Self> {
        if x.len() != values.len() {
            return Err(Error::Parameter("abscissae and values differ in length".into()));
        }
        if x.len() < 2 {
            return Err(Error::Parameter("need at least two samples".into()));
        }
        if x.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::Domain("sample abscissae must be positive and finite".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("sample abscissae must be strictly increasing".into()));
        }
        let log_x: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let second = natural_spline_second_derivatives(&log_x, values);
        let n = x.len();
        let lower_exponent = edge_exponent(&log_x[..2], &values[..2], true);
        let upper_exponent = edge_exponent(&log_x[n - 2..], &values[n - 2..], false);
        Ok(Self {
            log_x,
            values: values.to_vec(),
            second,
            lower_exponent,
            upper_exponent,
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.log_x[0].exp(), self.log_x[self.log_x.len() - 1].exp())
    }

    /// Power-law exponents `(β₀, β∞)` used for extrapolation: `|F| ∝ x^{β₀}`
    /// below the table and `x^{β∞}` above it. An edge whose two outermost
    /// samples are zero reports ±∞.
    pub fn edge_exponents(&self) -> (f64, f64) {
        (self.lower_exponent, self.upper_exponent)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        if !(x > 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        let lx = x.ln();
        let n = self.log_x.len();
        if lx <= self.log_x[0] {
            return extrapolate(self.values[0], lx - self.log_x[0], self.lower_exponent);
        }
        if lx >= self.log_x[n - 1] {
            return extrapolate(self.values[n - 1], lx - self.log_x[n - 1], self.upper_exponent);
        }
        let i = match self.log_x.binary_search_by(|v| v.total_cmp(&lx)) {
            Ok(i) => return self.values[i],
            Err(i) => i - 1,
        };
        let h = self.log_x[i + 1] - self.log_x[i];
        let a = (self.log_x[i + 1] - lx) / h;
        let b = 1.0 - a;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * (h * h / 6.0)
    }
}

fn extrapolate(edge: Complex64, dlog: f64, exponent: f64) -> Complex64 {
    if edge.norm() == 0.0 || exponent.is_infinite() {
        return Complex64::new(0.0, 0.0);
    }
    edge * (exponent * dlog).exp()
}

fn edge_exponent(log_x: &[f64], v: &[Complex64], lower: bool) -> f64 {
    let (a, b) = (v[0].norm(), v[1].norm());
    if a == 0.0 && b == 0.0 {
        // compact support at this edge
        return if lower { f64::INFINITY } else { f64::NEG_INFINITY };
    }
    (b / a).ln() / (log_x[1] - log_x[0])
}

fn natural_spline_second_derivatives(x: &[f64], y: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut m = vec![zero; n];
    if n < 3 {
        return m;
    }
    // tridiagonal solve (Thomas algorithm)
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![zero; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let a = h0 / 6.0;
        let b = (h0 + h1) / 3.0;
        let c = h1 / 6.0;
        let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        let denom = b - a * c_prime[i - 1];
        c_prime[i] = c / denom;
        d_prime[i] = (d - a * d_prime[i - 1]) / denom;
    }
    for i in (1..n - 1).rev() {
        m[i] = d_prime[i] - c_prime[i] * m[i + 1];
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_and_smooth_functions() {
        let xs: Vec<f64> = (0..200).map(|k| 2f64.powf(-6.0 + k as f64 / 16.0)).collect();
        let f = |x: f64| Complex64::new(x * (-x).exp(), x.sqrt());
        let vals: Vec<Complex64> = xs.iter().map(|&x| f(x)).collect();
        let t = LogTable::new(&xs, &vals).unwrap();
        for (x, v) in xs.iter().zip(&vals) {
            assert!((t.eval(*x) - v).norm() < 1e-14);
        }
        for k in 0..100 {
            let x = 2f64.powf(-4.0 + k as f64 * 0.071);
            assert!((t.eval(x) - f(x)).norm() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn power_law_extrapolation() {
        let xs = [1.0, 2.0, 4.0];
        let vals: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(x * x, 0.0)).collect();
        let t = LogTable::new(&xs, &vals).unwrap();
        let (lo, hi) = t.edge_exponents();
        assert!((lo - 2.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
        assert!((t.eval(0.25).re - 0.0625).abs() < 1e-14);
        assert!((t.eval(16.0).re - 256.0).abs() < 1e-10);
    }

    #[test]
    fn zero_edges_mean_compact_support() {
        let xs = [0.5, 1.0, 2.0, 4.0];
        let z = Complex64::new(0.0, 0.0);
        let vals = [z, z, Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)];
        let t = LogTable::new(&xs, &vals).unwrap();
        assert_eq!(t.eval(0.1), z);
        assert!(t.edge_exponents().0.is_infinite());
    }

    #[test]
    fn rejects_bad_abscissae() {
        let v = [Complex64::new(1.0, 0.0); 2];
        assert!(LogTable::new(&[0.0, 1.0], &v).is_err());
        assert!(LogTable::new(&[2.0, 1.0], &v).is_err());
    }
}
