//! Radial profiles m(r): the strength function behind every diffusion kernel
//! and Fourier symbol. Power laws give the fractional Laplacian; log and
//! log-log corrections give the slightly supercritical operators.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Closed-form family or sampled table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum ProfileFamily {
    /// m(r) = r^alpha
    Power,
    /// m(r) = r^alpha / (log(lambda + r))^mu
    PowerLog { mu: f64, lambda: f64 },
    /// m(r) = r^alpha / (log(lambda + r) * (log log(lambda2 + r))^mu)
    PowerLogLog { mu: f64, lambda: f64, lambda2: f64 },
    /// Sampled (r, m) pairs, interpolated linearly in log-log coordinates.
    Table { samples: Vec<(f64, f64)> },
}

/// Radial profile with its structural exponents.
///
/// `alpha` in (0,1] is the growth exponent, `sigma` in [0,alpha) the declared
/// slack in the differential inequality (alpha-sigma) m/r <= m' <= alpha m/r,
/// and `c0` the length-scale cutoff below whose inverse the inequality is
/// claimed (None encodes the no-cutoff case valid on all of r > 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub family: ProfileFamily,
    pub alpha: f64,
    pub sigma: f64,
    pub c0: Option<f64>,
}

impl RadialProfile {
    pub fn power(alpha: f64) -> Self {
        RadialProfile {
            family: ProfileFamily::Power,
            alpha,
            sigma: 0.0,
            c0: None,
        }
    }

    pub fn power_log(alpha: f64, mu: f64, lambda: f64, sigma: f64, c0: Option<f64>) -> Self {
        RadialProfile {
            family: ProfileFamily::PowerLog { mu, lambda },
            alpha,
            sigma,
            c0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha = {} must lie in (0, 1]",
                self.alpha
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma < self.alpha) {
            return Err(Error::InvalidArgument(format!(
                "sigma = {} must lie in [0, alpha)",
                self.sigma
            )));
        }
        if let Some(c0) = self.c0 {
            if c0 <= 0.0 {
                return Err(Error::InvalidArgument("c0 must be positive".into()));
            }
        }
        if let ProfileFamily::Table { samples } = &self.family {
            if samples.len() < 2 {
                return Err(Error::InsufficientData(
                    "table profile needs at least two samples".into(),
                ));
            }
            for w in samples.windows(2) {
                if w[1].0 <= w[0].0 {
                    return Err(Error::InvalidArgument(
                        "table radii must be strictly increasing".into(),
                    ));
                }
            }
            if samples.iter().any(|&(r, m)| r <= 0.0 || m < 0.0) {
                return Err(Error::InvalidArgument(
                    "table samples must have r > 0 and m >= 0".into(),
                ));
            }
        }
        Ok(())
    }

    /// Smallest radius where the differential inequality is declared to hold.
    pub fn validity_floor(&self) -> f64 {
        match self.c0 {
            Some(c0) => 1.0 / c0,
            None => 0.0,
        }
    }

    /// Evaluate m(r). r = 0 returns 0 by the m(0) = 0 convention; negative r
    /// is an argument error, table lookups outside the sampled range are
    /// out-of-range errors.
    pub fn eval_m(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::InvalidArgument(format!("radius {r} is negative")));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        match &self.family {
            ProfileFamily::Power => Ok(r.powf(self.alpha)),
            ProfileFamily::PowerLog { mu, lambda } => {
                let l = (lambda + r).ln();
                Ok(r.powf(self.alpha) / l.powf(*mu))
            }
            ProfileFamily::PowerLogLog { mu, lambda, lambda2 } => {
                let l1 = (lambda + r).ln();
                let l2 = (lambda2 + r).ln().ln();
                Ok(r.powf(self.alpha) / (l1 * l2.powf(*mu)))
            }
            ProfileFamily::Table { samples } => {
                let lo = samples.first().unwrap().0;
                let hi = samples.last().unwrap().0;
                if r < lo || r > hi {
                    return Err(Error::OutOfRange {
                        value: r,
                        lo,
                        hi,
                    });
                }
                let pos = samples.partition_point(|&(rs, _)| rs <= r);
                if pos == 0 {
                    return Ok(samples[0].1);
                }
                if pos == samples.len() {
                    return Ok(samples[samples.len() - 1].1);
                }
                let (r0, m0) = samples[pos - 1];
                let (r1, m1) = samples[pos];
                if m0 <= 0.0 || m1 <= 0.0 {
                    // linear fallback where the log-log chart degenerates
                    let t = (r - r0) / (r1 - r0);
                    return Ok(m0 + t * (m1 - m0));
                }
                let t = (r.ln() - r0.ln()) / (r1.ln() - r0.ln());
                Ok((m0.ln() + t * (m1.ln() - m0.ln())).exp())
            }
        }
    }

    /// m(r) where the caller guarantees r >= 0 and in-range.
    pub fn m(&self, r: f64) -> f64 {
        self.eval_m(r).expect("profile evaluation failed")
    }

    /// Central finite-difference slope with relative step 1e-4.
    pub fn m_prime_fd(&self, r: f64) -> Result<f64> {
        let step = 1e-4 * r;
        let hi = self.eval_m(r + step)?;
        let lo = self.eval_m(r - step)?;
        Ok((hi - lo) / (2.0 * step))
    }
}

/// Margin report for structural checks on a grid of radii.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub pass: bool,
    /// Most negative normalized margin found (>= -tolerance when passing).
    pub worst_margin: f64,
    /// Radius achieving the worst margin.
    pub worst_r: f64,
    pub tolerance: f64,
}

/// Verify (alpha - sigma) m(r)/r <= m'(r) <= alpha m(r)/r on the grid by
/// central differences. Margins are normalized by m(r)/r; tolerance 1e-6.
pub fn check_mdec(profile: &RadialProfile, r_grid: &[f64]) -> Result<CheckReport> {
    if r_grid.len() < 3 {
        return Err(Error::InsufficientData(
            "differential-inequality check needs at least 3 radii".into(),
        ));
    }
    if r_grid.windows(2).any(|w| w[1] <= w[0]) || r_grid[0] <= 0.0 {
        return Err(Error::InvalidArgument(
            "radius grid must be positive and sorted".into(),
        ));
    }
    let tolerance = 1e-6;
    let mut worst_margin = f64::INFINITY;
    let mut worst_r = r_grid[0];
    for &r in r_grid {
        let m = profile.eval_m(r)?;
        let mp = profile.m_prime_fd(r)?;
        let scale = m / r;
        if scale == 0.0 {
            continue;
        }
        let lower = (mp - (profile.alpha - profile.sigma) * scale) / scale;
        let upper = (profile.alpha * scale - mp) / scale;
        let margin = lower.min(upper);
        if margin < worst_margin {
            worst_margin = margin;
            worst_r = r;
        }
    }
    Ok(CheckReport {
        pass: worst_margin >= -tolerance,
        worst_margin,
        worst_r,
        tolerance,
    })
}

/// Verify that r -> r^{beta1} m(1/r) is nondecreasing and
/// r -> r^{beta2} m(1/r) is nonincreasing on the grid.
pub fn monotone_maps_check(
    profile: &RadialProfile,
    beta1: f64,
    beta2: f64,
    r_grid: &[f64],
) -> Result<CheckReport> {
    if beta1 < profile.alpha {
        return Err(Error::InvalidArgument(format!(
            "beta1 = {beta1} must be >= alpha = {}",
            profile.alpha
        )));
    }
    if beta2 > profile.alpha - profile.sigma {
        return Err(Error::InvalidArgument(format!(
            "beta2 = {beta2} must be <= alpha - sigma = {}",
            profile.alpha - profile.sigma
        )));
    }
    if r_grid.len() < 2 {
        return Err(Error::InsufficientData("need at least 2 radii".into()));
    }
    let tolerance = 1e-9;
    let mut worst_margin = f64::INFINITY;
    let mut worst_r = r_grid[0];
    let f1 = |r: f64| -> Result<f64> { Ok(r.powf(beta1) * profile.eval_m(1.0 / r)?) };
    let f2 = |r: f64| -> Result<f64> { Ok(r.powf(beta2) * profile.eval_m(1.0 / r)?) };
    for w in r_grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let inc = (f1(b)? - f1(a)?) / f1(a)?.abs().max(f64::MIN_POSITIVE);
        let dec = (f2(a)? - f2(b)?) / f2(a)?.abs().max(f64::MIN_POSITIVE);
        let margin = inc.min(dec);
        if margin < worst_margin {
            worst_margin = margin;
            worst_r = b;
        }
    }
    Ok(CheckReport {
        pass: worst_margin >= -tolerance,
        worst_margin,
        worst_r,
        tolerance,
    })
}

/// Log-spaced grid of n points on [lo, hi].
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let step = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|i| lo * (step * i as f64).exp()).collect()
}
