//! One-pass mean and variance accumulators.

use num_complex::Complex64;
use serde::Serialize;

/// Welford accumulator for real samples.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RealAccumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RealAccumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// sqrt(var/n).
    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        (self.variance() / self.n as f64).sqrt()
    }

    pub fn summary(&self) -> Summary<f64> {
        Summary {
            mean: self.mean(),
            variance: self.variance(),
            stderr: self.stderr(),
            count: self.n,
        }
    }
}

/// Welford accumulator for complex samples; the variance is the scalar E|z − ⟨z⟩|².
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComplexAccumulator {
    n: u64,
    mean: Complex64,
    m2: f64,
}

impl ComplexAccumulator {
    pub fn push(&mut self, z: Complex64) {
        self.n += 1;
        let delta = z - self.mean;
        self.mean += delta / self.n as f64;
        let after = z - self.mean;
        self.m2 += delta.re * after.re + delta.im * after.im;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> Complex64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        (self.variance() / self.n as f64).sqrt()
    }

    pub fn summary(&self) -> Summary<Complex64> {
        Summary {
            mean: self.mean(),
            variance: self.variance(),
            stderr: self.stderr(),
            count: self.n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary<T> {
    pub mean: T,
    pub variance: f64,
    pub stderr: f64,
    pub count: u64,
}

/// Weighted least squares of `y = a + b·x`; returns `(a, b, stderr of b)`.
pub fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> Option<(f64, f64, f64)> {
    let sw: f64 = w.iter().sum();
    if x.len() < 2 || sw <= 0.0 {
        return None;
    }
    let xm = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let ym = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(a, b)| b * (a - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((a, c), b)| b * (a - xm) * (c - ym)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((ym - slope * xm, slope, (1.0 / sxx).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_samples_have_zero_variance() {
        let mut a = RealAccumulator::default();
        a.push(3.5);
        a.push(3.5);
        assert_eq!(a.variance(), 0.0);
        assert_eq!(a.mean(), 3.5);
    }

    #[test]
    fn exact_fit() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 1.5 - 2.0 * v).collect();
        let (a, b, _) = weighted_line_fit(&x, &y, &[1.0, 2.0, 1.0, 0.5]).unwrap();
        assert!((a - 1.5).abs() < 1e-12 && (b + 2.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn matches_two_pass(xs in prop::collection::vec(-1e3f64..1e3, 2..60), ys in prop::collection::vec(-1e3f64..1e3, 60)) {
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let mut acc = RealAccumulator::default();
            xs.iter().for_each(|&x| acc.push(x));
            prop_assert!((acc.mean() - mean).abs() <= 1e-9 * (1.0 + mean.abs()));
            prop_assert!((acc.variance() - var).abs() <= 1e-8 * (1.0 + var));
            prop_assert!((acc.stderr() - (var / n).sqrt()).abs() <= 1e-8 * (1.0 + var));

            let zs: Vec<Complex64> = xs.iter().zip(&ys).map(|(&a, &b)| Complex64::new(a, b)).collect();
            let zm = zs.iter().sum::<Complex64>() / n;
            let zv = zs.iter().map(|z| (z - zm).norm_sqr()).sum::<f64>() / (n - 1.0);
            let mut cacc = ComplexAccumulator::default();
            zs.iter().for_each(|&z| cacc.push(z));
            prop_assert!((cacc.mean() - zm).norm() <= 1e-9 * (1.0 + zm.norm()));
            prop_assert!((cacc.variance() - zv).abs() <= 1e-8 * (1.0 + zv));
        }
    }
}
