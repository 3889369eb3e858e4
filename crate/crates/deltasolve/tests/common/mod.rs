//! Independent oracles shared by the integration suites: series and
//! continued-fraction routes for the Faddeeva function, brute-force
//! quadratures for resolvent actions, and small helpers.

#![allow(dead_code)]

use deltasolve::geom::{self, Point};
use deltasolve::quad::{adaptive_gl, gauss_legendre};
use deltasolve::resolvent::GaussianSum;
use deltasolve::Complex64;

pub const SQRT_PI: f64 = 1.772_453_850_905_516;
pub const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;
pub const PI: f64 = std::f64::consts::PI;

/// Maclaurin series w(z) = sum (iz)^n / Gamma(n/2+1), |z| <= 2.8.
pub fn w_series(z: Complex64) -> Complex64 {
    const N: usize = 120;
    let iz = Complex64::new(0.0, 1.0) * z;
    let mut gamma_half = vec![0.0f64; N];
    let mut even = 1.0;
    let mut odd = SQRT_PI / 2.0;
    for n in 0..N {
        if n % 2 == 0 {
            gamma_half[n] = even;
            even *= n as f64 / 2.0 + 1.0;
        } else {
            gamma_half[n] = odd;
            odd *= n as f64 / 2.0 + 1.0;
        }
    }
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..N {
        sum += term / gamma_half[n];
        term *= iz;
    }
    sum
}

/// Laplace continued fraction by modified Lentz.
pub fn w_cf(z: Complex64) -> Complex64 {
    let tiny = Complex64::new(1e-300, 0.0);
    let mut f = if z.norm_sqr() == 0.0 { tiny } else { z };
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for j in 1..30000 {
        let aj = -(j as f64) / 2.0;
        d = z + aj * d;
        if d.norm_sqr() == 0.0 {
            d = tiny;
        }
        c = z + aj / c;
        if c.norm_sqr() == 0.0 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    Complex64::new(0.0, 1.0 / SQRT_PI) / f
}

/// Dawson function by Rybicki's sampling identity.
pub fn dawson(x: f64) -> f64 {
    let h = 0.2;
    let n0 = (x / h).round() as i64;
    let n0 = if n0 % 2 == 0 { n0 + 1 } else { n0 };
    let mut sum = 0.0;
    for k in (-60i64..=60).step_by(2) {
        let n = n0 + k;
        let t = x - n as f64 * h;
        sum += (-t * t).exp() / n as f64;
    }
    sum / SQRT_PI
}

/// Exact real-axis value: Re w(x) = e^{-x^2}, Im w(x) = 2 D(x)/sqrt(pi).
pub fn w_real_axis(x: f64) -> Complex64 {
    Complex64::new((-x * x).exp(), 2.0 / SQRT_PI * dawson(x))
}

/// Oracle value where one of the independent routes applies.
pub fn w_oracle(z: Complex64) -> Option<Complex64> {
    if z.im == 0.0 {
        return Some(w_real_axis(z.re));
    }
    if z.norm() <= 2.8 {
        return Some(w_series(z));
    }
    if z.im >= 0.3 || z.norm() >= 6.0 {
        return Some(w_cf(z));
    }
    None
}

/// Deterministic 200-point verification grid inside |z| <= 10 covered by the
/// oracles.
pub fn w_oracle_grid() -> Vec<Complex64> {
    let radii = [
        0.3, 0.5, 0.7, 0.9, 1.2, 1.6, 2.0, 2.5, 3.0, 4.5, 5.2, 6.0, 7.0, 8.0, 9.0, 10.0,
    ];
    let mut pts = Vec::new();
    'outer: for &r in &radii {
        for k in 0..=16 {
            let th = PI * k as f64 / 16.0;
            let z = Complex64::new(r * th.cos(), r * th.sin());
            if w_oracle(z).is_some() {
                pts.push(z);
                if pts.len() == 197 {
                    break 'outer;
                }
            }
        }
    }
    pts.push(Complex64::new(0.0, 0.0));
    pts.push(Complex64::new(0.0, 1.0));
    pts.push(Complex64::new(0.4, 1e-9));
    assert_eq!(pts.len(), 200);
    pts
}

/// Brute-force (R_0(z^2) f)(x) by spherical product Gauss-Legendre around x
/// (the r-Jacobian removes the kernel singularity).
pub fn free_resolvent_brute(f: &GaussianSum, x: Point, z: Complex64) -> Complex64 {
    // radial extent: cover every Gaussian
    let rmax = f
        .terms()
        .iter()
        .map(|t| geom::dist(x, t.center) + 10.0 * t.sigma)
        .fold(0.0f64, f64::max);
    let (tn, tw) = gauss_legendre(64).clone();
    let mut acc = Complex64::new(0.0, 0.0);
    // composite GL in r
    let nseg = 24;
    for seg in 0..nseg {
        let lo = rmax * seg as f64 / nseg as f64;
        let hi = rmax * (seg + 1) as f64 / nseg as f64;
        let (rn, rw) = gauss_legendre(16);
        for (rr, rwt) in rn.iter().zip(rw) {
            let r = 0.5 * (lo + hi) + 0.5 * (hi - lo) * rr;
            let jac_r = 0.5 * (hi - lo) * rwt;
            // angular integral over the sphere of radius r about x
            let mut ang = Complex64::new(0.0, 0.0);
            for (ct, wt) in tn.iter().zip(&tw) {
                let st = (1.0 - ct * ct).sqrt();
                // phi integral: 24 equally spaced points
                let nphi = 64;
                let mut phi_acc = Complex64::new(0.0, 0.0);
                for ip in 0..nphi {
                    let ph = 2.0 * PI * ip as f64 / nphi as f64;
                    let y = [
                        x[0] + r * ct,
                        x[1] + r * st * ph.cos(),
                        x[2] + r * st * ph.sin(),
                    ];
                    phi_acc += f.eval(y);
                }
                ang += wt * phi_acc * (2.0 * PI / nphi as f64);
            }
            // kernel e^{izr}/(4 pi r) times r^2 Jacobian
            acc += jac_r * ang * (Complex64::new(0.0, r) * z).exp() * r / FOUR_PI;
        }
    }
    acc
}

/// Composite adaptive quadrature of a complex function over [a, b].
pub fn integrate(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    adaptive_gl(&|x| f(x), a, b, tol)
}

/// Simple deterministic xorshift for reproducible random configurations
/// without pulling rand into every suite.
pub struct XorShift(u64);

impl XorShift {
    pub fn new(seed: u64) -> Self {
        Self(seed.max(1))
    }
    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }
    /// uniform in [lo, hi)
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }
}
