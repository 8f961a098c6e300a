use serde::{Deserialize, Serialize};

use super::{HarnessError, RngStream};
use crate::quadrature;
use crate::tolerances;

/// Density of the environmental velocity kick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum NoiseDistribution {
    Gaussian { mu: f64, sigma: f64 },
    Uniform { a: f64, b: f64 },
    /// Piecewise-linear density through `(x[i], density[i])`, zero outside
    /// the grid.
    Tabulated { x: Vec<f64>, density: Vec<f64> },
}

impl NoiseDistribution {
    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self, HarnessError> {
        let d = Self::Gaussian { mu, sigma };
        d.validate()?;
        Ok(d)
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self, HarnessError> {
        let d = Self::Uniform { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn tabulated(x: Vec<f64>, density: Vec<f64>) -> Result<Self, HarnessError> {
        let d = Self::Tabulated { x, density };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        match self {
            Self::Gaussian { mu, sigma } => {
                if !mu.is_finite() || !sigma.is_finite() || *sigma <= 0.0 {
                    return Err(HarnessError::InvalidNoise(format!(
                        "gaussian needs finite mu and sigma > 0 (got mu={mu}, sigma={sigma})"
                    )));
                }
            }
            Self::Uniform { a, b } => {
                if !a.is_finite() || !b.is_finite() || a >= b {
                    return Err(HarnessError::InvalidNoise(format!(
                        "uniform needs finite a < b (got a={a}, b={b})"
                    )));
                }
            }
            Self::Tabulated { x, density } => {
                if x.len() < 2 || x.len() != density.len() {
                    return Err(HarnessError::InvalidNoise(
                        "tabulated density needs at least two grid points and one density per point".into(),
                    ));
                }
                if x.iter().chain(density).any(|v| !v.is_finite()) {
                    return Err(HarnessError::InvalidNoise("tabulated density has non-finite values".into()));
                }
                if x.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(HarnessError::InvalidNoise("tabulated grid must be strictly increasing".into()));
                }
                if density.iter().any(|&p| p < 0.0) {
                    return Err(HarnessError::InvalidNoise("tabulated density must be non-negative".into()));
                }
                let mass = trapezoid(x, density);
                if (mass - 1.0).abs() > tolerances::DENSITY_NORMALIZATION {
                    return Err(HarnessError::NotNormalized(mass));
                }
            }
        }
        Ok(())
    }

    pub fn density(&self, x: f64) -> f64 {
        match self {
            Self::Gaussian { mu, sigma } => {
                let z = (x - mu) / sigma;
                (-0.5 * z * z).exp() / (sigma * (std::f64::consts::TAU).sqrt())
            }
            Self::Uniform { a, b } => {
                if x >= *a && x <= *b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            Self::Tabulated { x: grid, density } => {
                let n = grid.len();
                if x < grid[0] || x > grid[n - 1] {
                    return 0.0;
                }
                let i = grid.partition_point(|&g| g <= x).clamp(1, n - 1);
                let (x0, x1) = (grid[i - 1], grid[i]);
                let (f0, f1) = (density[i - 1], density[i]);
                f0 + (f1 - f0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// Interval carrying the mass; Gaussian tails are cut at ±12σ.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Gaussian { mu, sigma } => (
                mu - tolerances::GAUSSIAN_TAIL_SIGMAS * sigma,
                mu + tolerances::GAUSSIAN_TAIL_SIGMAS * sigma,
            ),
            Self::Uniform { a, b } => (*a, *b),
            Self::Tabulated { x, .. } => (x[0], x[x.len() - 1]),
        }
    }

    /// Points where the density may have a kink, including the support ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Gaussian { mu, .. } => {
                let (lo, hi) = self.support();
                vec![lo, *mu, hi]
            }
            Self::Uniform { a, b } => vec![*a, *b],
            Self::Tabulated { x, .. } => x.clone(),
        }
    }

    /// Whether the density is symmetric about zero.
    pub fn is_symmetric(&self) -> bool {
        match self {
            Self::Gaussian { mu, .. } => *mu == 0.0,
            Self::Uniform { a, b } => *a == -*b,
            Self::Tabulated { x, density } => {
                let n = x.len();
                (0..n).all(|i| x[i] == -x[n - 1 - i] && density[i] == density[n - 1 - i])
            }
        }
    }

    /// Mass of the density over its support by adaptive quadrature.
    pub fn total_mass(&self) -> Result<f64, HarnessError> {
        self.mass_between(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// `∫_lo^hi p(x) dx` by adaptive Simpson, clipped to the support.
    pub fn mass_between(&self, lo: f64, hi: f64) -> Result<f64, HarnessError> {
        let (s_lo, s_hi) = self.support();
        let lo = lo.max(s_lo);
        let hi = hi.min(s_hi);
        if lo >= hi {
            return Ok(0.0);
        }
        let mut points: Vec<f64> = vec![lo];
        points.extend(self.breakpoints().into_iter().filter(|&p| p > lo && p < hi));
        points.push(hi);
        quadrature::integrate_piecewise(&|x| self.density(x), &points, tolerances::QUADRATURE)
            .map_err(HarnessError::from)
    }

    /// One draw: Box–Muller for the Gaussian, affine map for the uniform,
    /// exact inverse CDF of the piecewise-linear density for tabulated data.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match self {
            Self::Gaussian { mu, sigma } => mu + sigma * rng.standard_normal(),
            Self::Uniform { a, b } => a + (b - a) * rng.uniform(),
            Self::Tabulated { x, density } => sample_tabulated(x, density, rng.uniform()),
        }
    }
}

fn trapezoid(x: &[f64], density: &[f64]) -> f64 {
    x.windows(2)
        .zip(density.windows(2))
        .map(|(xs, fs)| 0.5 * (xs[1] - xs[0]) * (fs[0] + fs[1]))
        .sum()
}

fn sample_tabulated(x: &[f64], density: &[f64], u: f64) -> f64 {
    let masses: Vec<f64> = x
        .windows(2)
        .zip(density.windows(2))
        .map(|(xs, fs)| 0.5 * (xs[1] - xs[0]) * (fs[0] + fs[1]))
        .collect();
    let total: f64 = masses.iter().sum();
    let mut remaining = u * total;
    for (i, &m) in masses.iter().enumerate() {
        if remaining < m || i == masses.len() - 1 {
            let h = x[i + 1] - x[i];
            let (f0, f1) = (density[i], density[i + 1]);
            let r = remaining.min(m);
            // solve f0·s + (f1 − f0)·s²/(2h) = r for s in [0, h]
            let a = (f1 - f0) / (2.0 * h);
            let disc = (f0 * f0 + 4.0 * a * r).max(0.0);
            let denom = f0 + disc.sqrt();
            let s = if denom > 0.0 { 2.0 * r / denom } else { 0.0 };
            return x[i] + s.clamp(0.0, h);
        }
        remaining -= m;
    }
    x[x.len() - 1]
}
