//! Point spectrum of the point-interaction operator.
//!
//! On the positive imaginary axis z = i kappa the coupling matrix is real
//! symmetric with diagonal alpha_j + kappa/(4 pi) and off-diagonal
//! -e^{-kappa d}/(4 pi d), and every eigenvalue branch is strictly increasing
//! in kappa (the derivative matrix (e^{-kappa d_{jl}})/(4 pi) is positive
//! definite). Bound-state energies E = -kappa^2 therefore correspond to the
//! single upward zero crossing of each branch, located by a scan plus
//! bisection. Eigenfunctions are combinations of Yukawa functions
//! e^{-kappa |x - y_j|}/(4 pi |x - y_j|) with null-vector coefficients,
//! normalized through the closed-form Yukawa overlap Gram matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::{EngineError, Result};
use crate::gamma::InteractionConfig;
use crate::geom::{self, Point};
use crate::resolvent::GaussianSum;
use crate::specialfn::erfcx;
use crate::Complex64;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;
const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Number of scan points across (0, kappa_max].
const SCAN_POINTS: usize = 2048;
/// Roots closer than this (relative) are merged into one degenerate root.
const MERGE_TOL: f64 = 1e-9;

/// One negative eigenvalue E = -kappa^2 with its Gamma(i kappa) null space.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub kappa: f64,
    pub energy: f64,
    pub multiplicity: usize,
    /// Null vectors of Gamma(i kappa), orthonormalized in the Yukawa-overlap
    /// inner product so each column yields an L2-normalized eigenfunction.
    pub nullvecs: Vec<Vec<f64>>,
    /// Smallest |eigenvalue| of Gamma(i kappa) relative to its norm
    /// (root certification).
    pub residual: f64,
}

/// Gamma(i kappa) as a real symmetric matrix.
fn gamma_real(config: &InteractionConfig, kappa: f64) -> DMatrix<f64> {
    let n = config.n();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = config.alpha(j) + kappa / FOUR_PI;
        for l in (j + 1)..n {
            let d = geom::dist(config.center(j), config.center(l));
            let v = -(-kappa * d).exp() / (FOUR_PI * d);
            m[(j, l)] = v;
            m[(l, j)] = v;
        }
    }
    m
}

fn sorted_eigenvalues(config: &InteractionConfig, kappa: f64) -> Vec<f64> {
    let mut ev: Vec<f64> = gamma_real(config, kappa)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Default scan ceiling: a Gershgorin-style bound plus margin, beyond which
/// no eigenvalue branch can still be negative.
pub fn default_kappa_max(config: &InteractionConfig) -> f64 {
    let amax = config.alphas().iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let dmin = config.min_pair_distance();
    let coupling = if dmin.is_finite() { 1.0 / (FOUR_PI * dmin) } else { 0.0 };
    FOUR_PI * (amax + coupling) + 10.0
}

/// All bound states with kappa in (0, kappa_max]: scan each sorted
/// eigenvalue branch of Gamma(i kappa) on a log grid, bracket the upward
/// zero crossings and refine by bisection.
pub fn find_eigenvalues(config: &InteractionConfig, kappa_max: f64) -> Vec<Eigenpair> {
    assert!(kappa_max > 0.0, "kappa_max must be positive");
    let n = config.n();
    let lo = kappa_max * 1e-9;
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| lo * (kappa_max / lo).powf(i as f64 / (SCAN_POINTS - 1) as f64))
        .collect();
    let evals: Vec<Vec<f64>> = grid.iter().map(|&k| sorted_eigenvalues(config, k)).collect();

    let mut roots: Vec<f64> = Vec::new();
    for branch in 0..n {
        for i in 0..grid.len() - 1 {
            let (a, b) = (evals[i][branch], evals[i + 1][branch]);
            if a == 0.0 {
                roots.push(grid[i]);
            } else if a < 0.0 && b >= 0.0 {
                // bisection on the sorted branch
                let (mut ka, mut kb) = (grid[i], grid[i + 1]);
                for _ in 0..200 {
                    let mid = 0.5 * (ka + kb);
                    let v = sorted_eigenvalues(config, mid)[branch];
                    if v < 0.0 {
                        ka = mid;
                    } else {
                        kb = mid;
                    }
                    if kb - ka <= 1e-13 * kb.max(1.0) {
                        break;
                    }
                }
                roots.push(0.5 * (ka + kb));
            }
        }
        // a branch still negative at kappa_max has its root beyond the scan
        // ceiling; with the default Gershgorin ceiling this cannot happen.
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // merge degenerate roots
    let mut pairs: Vec<Eigenpair> = Vec::new();
    let mut i = 0;
    while i < roots.len() {
        let mut j = i + 1;
        while j < roots.len() && (roots[j] - roots[i]).abs() <= MERGE_TOL * roots[i].max(1.0) {
            j += 1;
        }
        let kappa = roots[i..j].iter().sum::<f64>() / (j - i) as f64;
        if let Some(pair) = certify_root(config, kappa, j - i) {
            pairs.push(pair);
        }
        i = j;
    }
    pairs
}

/// Build the Eigenpair at a located root: extract the null space, verify the
/// root quality and orthonormalize the null vectors in the Gram inner
/// product of the Yukawa basis.
fn certify_root(config: &InteractionConfig, kappa: f64, mult_hint: usize) -> Option<Eigenpair> {
    let n = config.n();
    let gm = gamma_real(config, kappa);
    // entry scale of Gamma(i kappa); the spectral norm itself vanishes at a
    // root when N = 1, so certify against the size of the matrix entries
    let norm = gm
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(kappa / FOUR_PI, f64::max);
    let eig = gm.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .abs()
            .partial_cmp(&eig.eigenvalues[b].abs())
            .unwrap()
    });
    let mult = mult_hint.min(n);
    let residual = eig.eigenvalues[idx[mult - 1]].abs() / norm.max(f64::MIN_POSITIVE);
    if residual > 1e-8 {
        return None;
    }
    let raw: Vec<DVector<f64>> = idx[..mult]
        .iter()
        .map(|&k| eig.eigenvectors.column(k).into_owned())
        .collect();

    // Gram matrix of the Yukawa basis at this kappa
    let mut gram = DMatrix::zeros(n, n);
    for j in 0..n {
        for l in 0..n {
            let d = if j == l { 0.0 } else { geom::dist(config.center(j), config.center(l)) };
            gram[(j, l)] = yukawa_overlap(kappa, d);
        }
    }
    // orthonormalize the null vectors against a^T G b
    let mut ortho: Vec<DVector<f64>> = Vec::new();
    for mut v in raw {
        for u in &ortho {
            let proj = (u.transpose() * &gram * &v)[(0, 0)];
            v -= u * proj;
        }
        let norm2 = (v.transpose() * &gram * &v)[(0, 0)];
        if norm2 <= 0.0 {
            continue;
        }
        ortho.push(v / norm2.sqrt());
    }
    Some(Eigenpair {
        kappa,
        energy: -kappa * kappa,
        multiplicity: ortho.len(),
        nullvecs: ortho.iter().map(|v| v.iter().copied().collect()).collect(),
        residual,
    })
}

/// L2 overlap of two Yukawa functions e^{-kappa r}/(4 pi r) at distance d:
/// e^{-kappa d} / (8 pi kappa).
pub fn yukawa_overlap(kappa: f64, d: f64) -> f64 {
    assert!(kappa > 0.0, "yukawa_overlap requires kappa > 0");
    assert!(d >= 0.0);
    (-kappa * d).exp() / (8.0 * std::f64::consts::PI * kappa)
}

/// Overlap of a Yukawa function e^{-kappa|x-a|}/(4 pi |x-a|) with a unit
/// Gaussian e^{-|x-c|^2/sigma^2}, rho = |a - c|. Closed erfcx form, stable
/// for all rho.
pub fn yukawa_gauss_overlap(kappa: f64, rho: f64, sigma: f64) -> f64 {
    assert!(kappa > 0.0 && sigma > 0.0 && rho >= 0.0);
    if rho < 1e-5 * sigma {
        return sigma * sigma * (0.5 - SQRT_PI * kappa * sigma / 4.0 * erfcx(kappa * sigma / 2.0));
    }
    let half_line = |s: f64| -> f64 {
        // \int_0^inf e^{-kappa r - (r - s rho)^2/sigma^2} dr
        let m = s * rho - kappa * sigma * sigma / 2.0;
        let v = -m / sigma;
        let gauss = (-rho * rho / (sigma * sigma)).exp();
        if v >= 0.0 {
            sigma * SQRT_PI / 2.0 * erfcx(v) * gauss
        } else {
            sigma * SQRT_PI / 2.0
                * (2.0 * (-s * kappa * rho + kappa * kappa * sigma * sigma / 4.0).exp()
                    - erfcx(-v) * gauss)
        }
    };
    sigma * sigma / (4.0 * rho) * (half_line(1.0) - half_line(-1.0))
}

/// Evaluator of one normalized bound-state eigenfunction.
#[derive(Debug, Clone)]
pub struct Eigenfunction {
    pub kappa: f64,
    pub energy: f64,
    coeffs: Vec<f64>,
    centers: Vec<Point>,
}

impl Eigenfunction {
    /// phi(x) = sum_j a_j e^{-kappa |x - y_j|} / (4 pi |x - y_j|); real.
    pub fn eval(&self, x: Point) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.centers)
            .map(|(a, y)| {
                let r = geom::dist(x, *y);
                a * (-self.kappa * r).exp() / (FOUR_PI * r)
            })
            .sum()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// <phi, f> for a Gaussian sum, via closed Yukawa-Gaussian overlaps
    /// (phi is real, so no conjugation is involved).
    pub fn project(&self, f: &GaussianSum) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in f.terms() {
            for (a, y) in self.coeffs.iter().zip(&self.centers) {
                let rho = geom::dist(t.center, *y);
                acc += t.amplitude * *a * yukawa_gauss_overlap(self.kappa, rho, t.sigma);
            }
        }
        acc
    }
}

/// The `which`-th normalized eigenfunction of a (possibly degenerate) pair.
pub fn eigenfunction(config: &InteractionConfig, pair: &Eigenpair, which: usize) -> Result<Eigenfunction> {
    if which >= pair.multiplicity {
        return Err(EngineError::Domain(format!(
            "eigenfunction index {which} out of range (multiplicity {})",
            pair.multiplicity
        )));
    }
    Ok(Eigenfunction {
        kappa: pair.kappa,
        energy: pair.energy,
        coeffs: pair.nullvecs[which].clone(),
        centers: config.centers().to_vec(),
    })
}

/// Projection of f on the whole point spectrum: for every bound state and
/// every eigenfunction in its null space, the coefficient <phi, f>.
pub fn project_point_spectrum(
    config: &InteractionConfig,
    f: &GaussianSum,
) -> Vec<(Eigenpair, Vec<Complex64>)> {
    let pairs = find_eigenvalues(config, default_kappa_max(config));
    pairs
        .into_iter()
        .map(|pair| {
            let coeffs = (0..pair.multiplicity)
                .map(|w| eigenfunction(config, &pair, w).expect("index in range").project(f))
                .collect();
            (pair, coeffs)
        })
        .collect()
}
