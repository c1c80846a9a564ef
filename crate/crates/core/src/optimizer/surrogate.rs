//! Gaussian-process regression over the unit cube and the expected-improvement criterion.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

pub type Point = [f64; 3];

/// Length scales tried when fitting; the one with the highest marginal likelihood wins.
const LENGTH_SCALES: [f64; 6] = [0.08, 0.15, 0.25, 0.4, 0.7, 1.2];
const NOISE: f64 = 1e-6;

/// Squared-exponential GP on standardized targets.
pub struct GaussianProcess {
    xs: Vec<Point>,
    chol: Vec<f64>,
    alpha: Vec<f64>,
    length_scale: f64,
    y_mean: f64,
    y_std: f64,
}

fn kernel(a: &Point, b: &Point, ls: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    math::exp(-0.5 * d2 / (ls * ls))
}

/// Lower-triangular Cholesky factor (row-major `n×n`), or `None` if not positive definite.
fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * n + i] = math::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn forward_sub(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

fn backward_sub(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

impl GaussianProcess {
    /// Fits on `(x, y)` pairs; `None` for an empty data set.
    pub fn fit(data: &[(Point, f64)]) -> Option<Self> {
        let n = data.len();
        if n == 0 {
            return None;
        }
        let y_mean = data.iter().map(|d| d.1).sum::<f64>() / n as f64;
        let var = data.iter().map(|d| (d.1 - y_mean) * (d.1 - y_mean)).sum::<f64>() / n as f64;
        let y_std = if var > 1e-24 { math::sqrt(var) } else { 1.0 };
        let ys: Vec<f64> = data.iter().map(|d| (d.1 - y_mean) / y_std).collect();
        let xs: Vec<Point> = data.iter().map(|d| d.0).collect();

        let mut best: Option<(f64, Self)> = None;
        for &ls in &LENGTH_SCALES {
            let mut k = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    k[i * n + j] = kernel(&xs[i], &xs[j], ls) + if i == j { NOISE } else { 0.0 };
                }
            }
            let Some(chol) = cholesky(&k, n) else { continue };
            let alpha = backward_sub(&chol, n, &forward_sub(&chol, n, &ys));
            let fit: f64 = ys.iter().zip(&alpha).map(|(a, b)| a * b).sum();
            let logdet: f64 = (0..n).map(|i| math::ln(chol[i * n + i])).sum();
            let lml = -0.5 * fit - logdet;
            if best.as_ref().is_none_or(|b| lml > b.0) {
                best = Some((
                    lml,
                    Self { xs: xs.clone(), chol, alpha, length_scale: ls, y_mean, y_std },
                ));
            }
        }
        best.map(|b| b.1)
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    /// Posterior mean and standard deviation in the original target units.
    pub fn predict(&self, x: &Point) -> (f64, f64) {
        let n = self.xs.len();
        let ks: Vec<f64> = self.xs.iter().map(|xi| kernel(xi, x, self.length_scale)).collect();
        let mean: f64 = ks.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        let v = forward_sub(&self.chol, n, &ks);
        let var = (1.0 - v.iter().map(|a| a * a).sum::<f64>()).max(0.0);
        (self.y_mean + self.y_std * mean, self.y_std * math::sqrt(var))
    }
}

fn normal_pdf(z: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * math::exp(-0.5 * z * z)
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + math::erf(z / core::f64::consts::SQRT_2))
}

/// Expected improvement over `best` for a maximization problem.
pub fn expected_improvement(mean: f64, std: f64, best: f64, xi: f64) -> f64 {
    let gain = mean - best - xi;
    if std <= 1e-12 {
        return gain.max(0.0);
    }
    let z = gain / std;
    gain * normal_cdf(z) + std * normal_pdf(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_training_points() {
        let data: Vec<(Point, f64)> = (0..6)
            .map(|i| {
                let t = i as f64 / 5.0;
                ([t, 0.5, 0.5], libm::sin(3.0 * t))
            })
            .collect();
        let gp = GaussianProcess::fit(&data).unwrap();
        for (x, y) in &data {
            let (m, s) = gp.predict(x);
            assert!((m - y).abs() < 1e-3, "{m} vs {y}");
            assert!(s < 1e-2);
        }
        let (_, far) = gp.predict(&[0.5, 0.0, 0.0]);
        assert!(far > 1e-2);
    }

    #[test]
    fn ei_properties() {
        assert_eq!(expected_improvement(1.0, 0.0, 0.5, 0.0), 0.5);
        assert_eq!(expected_improvement(0.2, 0.0, 0.5, 0.0), 0.0);
        let lo = expected_improvement(0.5, 0.1, 0.5, 0.0);
        let hi = expected_improvement(0.5, 0.3, 0.5, 0.0);
        assert!(hi > lo && lo > 0.0);
        // at mean == best, EI = sigma * pdf(0)
        assert!((lo - 0.1 * normal_pdf(0.0)).abs() < 1e-15);
    }

    #[test]
    fn cdf_sanity() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959_963_985) - 0.975).abs() < 1e-9);
    }

    #[test]
    fn constant_targets_fit() {
        let data = [([0.1, 0.1, 0.1], 2.0), ([0.9, 0.9, 0.9], 2.0)];
        let gp = GaussianProcess::fit(&data).unwrap();
        let (m, _) = gp.predict(&[0.5, 0.5, 0.5]);
        assert!((m - 2.0).abs() < 1e-9);
    }
}
