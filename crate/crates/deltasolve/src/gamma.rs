//! The N x N coupling matrix Gamma_{alpha,Y}(z) of the point-interaction
//! operator, its determinant, inverse coefficients and their closed-form
//! derivative.
//!
//! Conventions: diagonal entries alpha_j - iz/(4 pi); off-diagonal entries
//! -e^{iz d}/(4 pi d) with d the center distance. The eigenvalue criterion is
//! det Gamma(i kappa) = 0 with energy E = -kappa^2. Inverse coefficients come
//! in two normalizations: the raw inverse [Gamma^{-1}]_{jl} (used by the
//! resolvent correction and by the asymptotic split), and the scaled
//! c_{jl} = (4 pi)^{-2} [Gamma^{-1}]_{jl}.

use nalgebra::DMatrix;

use crate::error::{EngineError, Result};
use crate::geom::{self, Point};
use crate::Complex64;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Condition-number cap above which Gamma counts as singular.
pub const DEFAULT_COND_CAP: f64 = 1e12;

/// Maximum number of centers the direct dense solvers are sized for.
pub const MAX_CENTERS: usize = 64;

/// Centers and strengths of the point-interaction operator.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionConfig {
    centers: Vec<Point>,
    alphas: Vec<f64>,
}

impl InteractionConfig {
    pub fn new(centers: Vec<Point>, alphas: Vec<f64>) -> Result<Self> {
        if centers.is_empty() {
            return Err(EngineError::Invalid("at least one center required".into()));
        }
        if centers.len() != alphas.len() {
            return Err(EngineError::Invalid(format!(
                "{} centers but {} strengths",
                centers.len(),
                alphas.len()
            )));
        }
        if centers.len() > MAX_CENTERS {
            return Err(EngineError::Invalid(format!(
                "{} centers exceeds the supported maximum {}",
                centers.len(),
                MAX_CENTERS
            )));
        }
        if !centers.iter().all(|c| geom::is_finite(*c)) || !alphas.iter().all(|a| a.is_finite()) {
            return Err(EngineError::Invalid("non-finite center or strength".into()));
        }
        for j in 0..centers.len() {
            for l in (j + 1)..centers.len() {
                let d = geom::dist(centers[j], centers[l]);
                if d <= 1e-12 {
                    return Err(EngineError::Invalid(format!(
                        "centers {j} and {l} coincide (distance {d:.3e})"
                    )));
                }
            }
        }
        Ok(Self { centers, alphas })
    }

    pub fn n(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn center(&self, j: usize) -> Point {
        self.centers[j]
    }

    pub fn alpha(&self, j: usize) -> f64 {
        self.alphas[j]
    }

    /// Minimum pairwise center distance; infinity for a single center.
    pub fn min_pair_distance(&self) -> f64 {
        let mut d = f64::INFINITY;
        for j in 0..self.n() {
            for l in (j + 1)..self.n() {
                d = d.min(geom::dist(self.centers[j], self.centers[l]));
            }
        }
        d
    }
}

/// Gamma_{alpha,Y}(z) together with the argument it was built at.
#[derive(Debug, Clone)]
pub struct GammaMatrix {
    pub z: Complex64,
    mat: DMatrix<Complex64>,
}

impl GammaMatrix {
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn entry(&self, j: usize, l: usize) -> Complex64 {
        self.mat[(j, l)]
    }

    pub fn n(&self) -> usize {
        self.mat.nrows()
    }
}

/// Build Gamma(z): diagonal alpha_j - iz/4pi, off-diagonal -e^{iz d}/(4 pi d).
pub fn build_gamma(config: &InteractionConfig, z: Complex64) -> GammaMatrix {
    let n = config.n();
    let mut mat = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for j in 0..n {
        mat[(j, j)] = Complex64::new(config.alpha(j), 0.0) - Complex64::new(0.0, 1.0) * z / FOUR_PI;
        for l in (j + 1)..n {
            let d = geom::dist(config.center(j), config.center(l));
            let v = -(Complex64::new(0.0, d) * z).exp() / (FOUR_PI * d);
            mat[(j, l)] = v;
            mat[(l, j)] = v;
        }
    }
    GammaMatrix { z, mat }
}

/// det Gamma(z); zeros on the positive imaginary axis locate bound states.
pub fn det_gamma(config: &InteractionConfig, z: Complex64) -> Complex64 {
    build_gamma(config, z).mat.lu().determinant()
}

/// Invert Gamma(z) by LU with partial pivoting, reporting an infinity-norm
/// condition estimate. The small dense sizes here make the direct solve both
/// exact enough and cheap.
pub(crate) fn invert_gamma(
    config: &InteractionConfig,
    z: Complex64,
    cond_cap: f64,
) -> Result<(DMatrix<Complex64>, f64)> {
    let g = build_gamma(config, z);
    let norm_g = inf_norm(&g.mat);
    let inv = g.mat.clone().lu().try_inverse().ok_or(EngineError::SingularGamma {
        mu: z.re,
        cond: f64::INFINITY,
    })?;
    let cond = norm_g * inf_norm(&inv);
    if !cond.is_finite() || cond > cond_cap {
        return Err(EngineError::SingularGamma { mu: z.re, cond });
    }
    Ok((inv, cond))
}

fn inf_norm(m: &DMatrix<Complex64>) -> f64 {
    (0..m.nrows())
        .map(|j| (0..m.ncols()).map(|l| m[(j, l)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// <mu> = (1 + mu^2)^{1/2}.
pub fn japanese_bracket(mu: f64) -> f64 {
    (1.0 + mu * mu).sqrt()
}

/// Inverse coefficients of Gamma(mu) at a real spectral parameter mu >= 0,
/// plus the remainders of the two asymptotic splits of the raw inverse:
/// d_{jl} = [Gamma^{-1}]_{jl} - 4 pi i delta_{jl} <mu>^{-1} and the odd
/// variant with mu <mu>^{-2}.
#[derive(Debug, Clone)]
pub struct CoeffMatrix {
    pub mu: f64,
    raw_inv: DMatrix<Complex64>,
    pub cond: f64,
}

impl CoeffMatrix {
    /// Scaled coefficients c_{jl}(mu) = (4 pi)^{-2} [Gamma(mu)^{-1}]_{jl}.
    pub fn c(&self) -> DMatrix<Complex64> {
        self.raw_inv.map(|v| v / (FOUR_PI * FOUR_PI))
    }

    pub fn c_entry(&self, j: usize, l: usize) -> Complex64 {
        self.raw_inv[(j, l)] / (FOUR_PI * FOUR_PI)
    }

    /// Raw inverse [Gamma(mu)^{-1}].
    pub fn raw_inverse(&self) -> &DMatrix<Complex64> {
        &self.raw_inv
    }

    /// Even-split remainder d_{jl}(mu) = [Gamma^{-1}]_{jl} - 4 pi i delta_{jl} <mu>^{-1}.
    pub fn d_even(&self) -> DMatrix<Complex64> {
        let mut m = self.raw_inv.clone();
        let lead = Complex64::new(0.0, FOUR_PI / japanese_bracket(self.mu));
        for j in 0..m.nrows() {
            m[(j, j)] -= lead;
        }
        m
    }

    /// Odd-split remainder with leading term 4 pi i mu <mu>^{-2}.
    pub fn d_odd(&self) -> DMatrix<Complex64> {
        let mut m = self.raw_inv.clone();
        let br = japanese_bracket(self.mu);
        let lead = Complex64::new(0.0, FOUR_PI * self.mu / (br * br));
        for j in 0..m.nrows() {
            m[(j, j)] -= lead;
        }
        m
    }
}

/// Invert Gamma(mu) for mu >= 0 under the default condition cap.
pub fn inv_coeffs(config: &InteractionConfig, mu: f64) -> Result<CoeffMatrix> {
    inv_coeffs_capped(config, mu, DEFAULT_COND_CAP)
}

pub fn inv_coeffs_capped(config: &InteractionConfig, mu: f64, cond_cap: f64) -> Result<CoeffMatrix> {
    if !(mu >= 0.0) {
        return Err(EngineError::Domain(format!("inv_coeffs requires mu >= 0, got {mu}")));
    }
    let (raw_inv, cond) = invert_gamma(config, Complex64::new(mu, 0.0), cond_cap)?;
    Ok(CoeffMatrix { mu, raw_inv, cond })
}

/// Closed-form derivative of the inverse coefficients.
///
/// From d/dmu Gamma = -(i/4pi) E(mu) with E_{jl} = e^{i mu |y_j - y_l|} and
/// d/dmu Gamma^{-1} = -Gamma^{-1} (d Gamma) Gamma^{-1}, the raw-inverse
/// derivative is +(i/4pi) Gamma^{-1} E Gamma^{-1}.
#[derive(Debug, Clone)]
pub struct CoeffDerivative {
    pub mu: f64,
    raw: DMatrix<Complex64>,
}

impl CoeffDerivative {
    /// d/dmu of the raw inverse [Gamma^{-1}].
    pub fn raw(&self) -> &DMatrix<Complex64> {
        &self.raw
    }

    /// d/dmu of the scaled coefficients c = (4 pi)^{-2} Gamma^{-1}.
    pub fn c_prime(&self) -> DMatrix<Complex64> {
        self.raw.map(|v| v / (FOUR_PI * FOUR_PI))
    }

    pub fn c_prime_entry(&self, j: usize, l: usize) -> Complex64 {
        self.raw[(j, l)] / (FOUR_PI * FOUR_PI)
    }
}

pub fn coeff_derivative(config: &InteractionConfig, mu: f64) -> Result<CoeffDerivative> {
    let coeffs = inv_coeffs(config, mu)?;
    Ok(coeff_derivative_from(config, &coeffs))
}

/// Derivative reusing an already-computed inverse (hot path in quadratures).
pub fn coeff_derivative_from(config: &InteractionConfig, coeffs: &CoeffMatrix) -> CoeffDerivative {
    let n = config.n();
    let mu = coeffs.mu;
    let mut e = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for j in 0..n {
        for l in 0..n {
            let d = if j == l {
                0.0
            } else {
                geom::dist(config.center(j), config.center(l))
            };
            e[(j, l)] = Complex64::new(0.0, mu * d).exp();
        }
    }
    let inv = &coeffs.raw_inv;
    let raw = inv * e * inv * Complex64::new(0.0, 1.0 / FOUR_PI);
    CoeffDerivative { mu, raw }
}
