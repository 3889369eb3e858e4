//! Weighted dispersive-decay measurements.
//!
//! The weight w(x) = sum_j (1 + 1/|x - y_j|) absorbs the center
//! singularities of the evolved field; the decay statement under test is
//! sup_x w(x)^{-1} |(U(t) P_ac f)(x)| <= C t^{-3/2} ||w f||_1, degrading to
//! t^{-1/2} in the resonant single-center case. The sup is taken over a
//! deterministic grid (radial shells around every center plus a far-field
//! box) so runs are reproducible; rates come from a least-squares fit of
//! log-norm against log-time.

use crate::error::{EngineError, Result};
use crate::gamma::InteractionConfig;
use crate::geom::{self, Point};
use crate::propagator::{self, EvolveOptions};
use crate::resolvent::{GaussianSum, COINCIDENCE_EPS};
use crate::Complex64;

/// Weight w(x) = sum_j (1 + 1/|x - y_j|).
pub fn weight(config: &InteractionConfig, x: Point) -> Result<f64> {
    let mut s = 0.0;
    for j in 0..config.n() {
        let d = geom::dist(x, config.center(j));
        if d < COINCIDENCE_EPS {
            return Err(EngineError::CenterCoincidence {
                what: "weight evaluated on a center",
                threshold: COINCIDENCE_EPS,
            });
        }
        s += 1.0 + 1.0 / d;
    }
    Ok(s)
}

/// Deterministic sampling grid: log-spaced radial shells in 26 lattice
/// directions around every center, plus a cubic far-field lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub radial_count: usize,
    pub box_halfwidth: f64,
    pub box_per_axis: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { r_min: 1e-3, r_max: 50.0, radial_count: 32, box_halfwidth: 40.0, box_per_axis: 5 }
    }
}

impl GridSpec {
    /// The refinement used by grid-stability checks.
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            radial_count: self.radial_count * 3 / 2,
            box_per_axis: self.box_per_axis + 2,
            ..*self
        }
    }

    /// All sample points, in a fixed deterministic order.
    pub fn points(&self, config: &InteractionConfig) -> Vec<Point> {
        let mut dirs: Vec<Point> = Vec::with_capacity(26);
        for i in -1i32..=1 {
            for j in -1i32..=1 {
                for k in -1i32..=1 {
                    if i == 0 && j == 0 && k == 0 {
                        continue;
                    }
                    let v = [i as f64, j as f64, k as f64];
                    dirs.push(geom::scale(v, 1.0 / geom::norm(v)));
                }
            }
        }
        let mut pts = Vec::new();
        let ratio = self.r_max / self.r_min;
        for c in config.centers() {
            for ir in 0..self.radial_count {
                let r = self.r_min
                    * ratio.powf(ir as f64 / (self.radial_count.max(2) - 1) as f64);
                for d in &dirs {
                    pts.push(geom::add(*c, geom::scale(*d, r)));
                }
            }
        }
        let nb = self.box_per_axis.max(2);
        let coord = |m: usize| {
            -self.box_halfwidth + 2.0 * self.box_halfwidth * m as f64 / (nb - 1) as f64
        };
        for i in 0..nb {
            for j in 0..nb {
                for k in 0..nb {
                    pts.push([coord(i), coord(j), coord(k)]);
                }
            }
        }
        // drop anything that collides with a center
        pts.retain(|p| {
            config
                .centers()
                .iter()
                .all(|c| geom::dist(*p, *c) > 10.0 * COINCIDENCE_EPS)
        });
        pts
    }
}

/// max over the grid of w(x)^{-1} |field(x)|.
pub fn weighted_sup<F: Fn(Point) -> Result<Complex64>>(
    config: &InteractionConfig,
    field: F,
    points: &[Point],
) -> Result<f64> {
    let mut sup = 0.0f64;
    for &p in points {
        let w = weight(config, p)?;
        let v = field(p)?;
        sup = sup.max(v.norm() / w);
    }
    Ok(sup)
}

/// Result of a decay-rate fit: log norms against log times.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DecayRecord {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// fitted exponent p in norm ~ constant * t^p
    pub slope: f64,
    pub constant: f64,
    pub r2: f64,
}

/// Least-squares fit of log(norm) = log(constant) + slope * log(t).
pub fn decay_fit(times: &[f64], norms: &[f64]) -> Result<DecayRecord> {
    if times.len() != norms.len() {
        return Err(EngineError::Domain("times and norms length mismatch".into()));
    }
    if times.len() < 8 {
        return Err(EngineError::Domain(format!(
            "decay fit needs at least 8 samples, got {}",
            times.len()
        )));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) || times[0] <= 0.0 {
        return Err(EngineError::Domain("times must be positive and strictly increasing".into()));
    }
    let decades = (times[times.len() - 1] / times[0]).log10();
    if decades < 1.5 {
        return Err(EngineError::Domain(format!(
            "decay fit needs >= 1.5 decades of time, got {decades:.2}"
        )));
    }
    if norms.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(EngineError::DegenerateFit("vanishing or non-finite norm sample".into()));
    }
    let xs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(DecayRecord {
        times: times.to_vec(),
        norms: norms.to_vec(),
        slope,
        constant: intercept.exp(),
        r2,
    })
}

/// Full decay measurement together with the fitted constant of the weighted
/// estimate, C = max_t norm(t) t^{3/2} / ||w f||_1.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DecayScan {
    pub record: DecayRecord,
    pub weighted_l1: f64,
    pub c_theorem: f64,
}

/// Evolve f over the time grid, measure the weighted sup on the sample grid
/// and fit the decay rate. Evolution honors opts.continuous_only.
pub fn decay_scan(
    config: &InteractionConfig,
    f: &GaussianSum,
    times: &[f64],
    grid: &GridSpec,
    opts: &EvolveOptions,
) -> Result<DecayScan> {
    let points = grid.points(config);
    let mut norms = Vec::with_capacity(times.len());
    for &t in times {
        let values = propagator::evolve_grid(config, f, &points, t, opts)?;
        let mut sup = 0.0f64;
        for (p, v) in points.iter().zip(&values) {
            sup = sup.max(v.norm() / weight(config, *p)?);
        }
        norms.push(sup);
    }
    let record = decay_fit(times, &norms)?;
    let weighted_l1 = f.weighted_l1_bound(config);
    let c_theorem = times
        .iter()
        .zip(&norms)
        .map(|(t, n)| n * t.powf(1.5) / weighted_l1)
        .fold(0.0f64, f64::max);
    Ok(DecayScan { record, weighted_l1, c_theorem })
}

/// Default 16-point log-spaced time grid on [1, 200].
pub fn default_times() -> Vec<f64> {
    let (lo, hi, n) = (1.0f64, 200.0f64, 16);
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}
