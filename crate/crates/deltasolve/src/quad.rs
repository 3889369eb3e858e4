//! Quadrature building blocks: closed-form Fresnel moments for quadratic
//! phases and Gauss-Legendre rules.
//!
//! The oscillatory integrals in this crate all reduce to panels of the form
//! \int g(mu) e^{i(A mu^2 + B mu)} dmu with g slowly varying. Interpolating g
//! by a parabola per panel and integrating the phase exactly requires the
//! moments \int_{-w}^{w} u^k e^{i(A u^2 + Bt u)} du, k = 0,1,2, centered at
//! the panel midpoint. Two evaluation paths cover all parameter regimes:
//!
//! * quadratic-phase dominated (|A| w^2 large enough): complete the square,
//!   express the k=0 moment through erf along the rotated ray via the
//!   Faddeeva function, and obtain k=1,2 by exact recurrences;
//! * small quadratic phase: expand e^{iA u^2} in a short Taylor series and
//!   integrate u^n e^{iB u} term by term (series in B for small |B| w,
//!   upward recurrence otherwise), subdividing internally so |B| w stays
//!   moderate.

use crate::Complex64;
use crate::specialfn::faddeeva;

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Centered Fresnel moments M_k = \int_{-w}^{w} u^k e^{i(A u^2 + B u)} du
/// for k = 0, 1, 2. Valid for any real A, B and w > 0.
pub fn fresnel_moments(a: f64, b: f64, w: f64) -> [Complex64; 3] {
    if a.abs() * w * w >= 0.01 {
        fresnel_moments_exact(a, b, w)
    } else {
        // keep |B| w moderate for the series path; moments are additive
        let need = (b.abs() * w / 6.0).ceil().max(1.0) as usize;
        if need == 1 {
            fresnel_moments_series(a, b, w)
        } else {
            let mut m = [Complex64::new(0.0, 0.0); 3];
            let h = 2.0 * w / need as f64;
            for i in 0..need {
                let c = -w + (i as f64 + 0.5) * h; // sub-midpoint relative to panel center
                // shift: u = c + v, phase A u^2 + B u = (A c^2 + B c) + (2Ac + B) v + A v^2
                let ph = Complex64::new(0.0, a * c * c + b * c).exp();
                let bs = 2.0 * a * c + b;
                let sub = fresnel_moments(a, bs, h / 2.0);
                // map back: u^0 = 1, u^1 = c + v, u^2 = c^2 + 2cv + v^2
                m[0] += ph * sub[0];
                m[1] += ph * (c * sub[0] + sub[1]);
                m[2] += ph * (c * c * sub[0] + 2.0 * c * sub[1] + sub[2]);
            }
            m
        }
    }
}

/// erf(eta x) for real x and eta = sqrt(-iA), computed through the Faddeeva
/// function so that the result stays accurate for large |eta x|:
/// erf(v) = 1 - e^{-v^2} w(iv), and e^{-v^2} = e^{iAx^2} is unimodular.
fn erf_rotated(eta: Complex64, x: f64) -> Complex64 {
    let s = x.signum();
    let v = eta * x.abs();
    let iv = Complex64::new(0.0, 1.0) * v;
    s * (Complex64::new(1.0, 0.0) - (-v * v).exp() * faddeeva(iv))
}

fn fresnel_moments_exact(a: f64, b: f64, w: f64) -> [Complex64; 3] {
    let eta = Complex64::new(0.0, -a).sqrt(); // principal sqrt(-iA), Re > 0
    let m = -b / (2.0 * a); // stationary point
    // M0 = e^{-iB^2/4A} * sqrt(pi)/(2 eta) * [erf(eta (w - m)) - erf(eta (-w - m))]
    let phase0 = Complex64::new(0.0, -b * b / (4.0 * a)).exp();
    let erf_hi = erf_rotated(eta, w - m);
    let erf_lo = erf_rotated(eta, -w - m);
    let m0 = phase0 * SQRT_PI / (2.0 * eta) * (erf_hi - erf_lo);

    let e_hi = Complex64::new(0.0, a * w * w + b * w).exp();
    let e_lo = Complex64::new(0.0, a * w * w - b * w).exp(); // phase at u = -w
    let two_ia = Complex64::new(0.0, 2.0 * a);
    let m1 = m * m0 + (e_hi - e_lo) / two_ia;
    let m2 = m * m1 + (w * e_hi + w * e_lo - m0) / two_ia;
    [m0, m1, m2]
}

/// \int_{-w}^{w} u^n e^{iBu} du for n = 0..=nmax, |B| w <= ~6.
fn linear_moments(b: f64, w: f64, nmax: usize) -> Vec<Complex64> {
    let bw = b * w;
    let mut res = vec![Complex64::new(0.0, 0.0); nmax + 1];
    if bw.abs() <= 6.0 {
        // series: I_n = sum_{m, n+m even} (iB)^m/m! * 2 w^{n+m+1}/(n+m+1)
        for (n, slot) in res.iter_mut().enumerate() {
            let mut term = Complex64::new(1.0, 0.0); // (iB)^m / m!
            let mut sum = Complex64::new(0.0, 0.0);
            let mut wpow = w.powi(n as i32 + 1);
            for mm in 0..60 {
                if (n + mm) % 2 == 0 {
                    sum += term * 2.0 * wpow / (n + mm + 1) as f64;
                }
                term *= Complex64::new(0.0, b) / (mm as f64 + 1.0);
                wpow *= w;
                if term.norm_sqr() * wpow * wpow < 1e-64 {
                    break;
                }
            }
            *slot = sum;
        }
    } else {
        // upward recurrence, stable since |B| w > n on our call sites
        let ib = Complex64::new(0.0, b);
        let e_hi = Complex64::new(0.0, bw).exp();
        let e_lo = Complex64::new(0.0, -bw).exp();
        res[0] = (e_hi - e_lo) / ib;
        let mut wp = 1.0;
        for n in 1..=nmax {
            wp *= w;
            // [u^n e^{iBu}] from -w to w: w^n (e_hi - (-1)^n e_lo)
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let boundary = wp * (e_hi - sign * e_lo);
            res[n] = (boundary - n as f64 * res[n - 1]) / ib;
        }
    }
    res
}

fn fresnel_moments_series(a: f64, b: f64, w: f64) -> [Complex64; 3] {
    // e^{iAu^2} = sum_j (iA)^j u^{2j} / j!, |A| w^2 < 0.01 so 5 terms reach 1e-18
    let base = linear_moments(b, w, 10);
    let mut m = [Complex64::new(0.0, 0.0); 3];
    let ia = Complex64::new(0.0, a);
    for (k, slot) in m.iter_mut().enumerate() {
        let mut coef = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for j in 0..=4 {
            sum += coef * base[2 * j + k];
            coef *= ia / (j as f64 + 1.0);
        }
        *slot = sum;
    }
    m
}

/// Integral over [p, q] of a parabola through the samples (g_p, g_mid, g_q)
/// times e^{i(A mu^2 + B mu)}, using exact phase moments.
pub fn filon_panel(
    a: f64,
    b: f64,
    p: f64,
    q: f64,
    g_p: Complex64,
    g_mid: Complex64,
    g_q: Complex64,
) -> Complex64 {
    let c = 0.5 * (p + q);
    let w = 0.5 * (q - p);
    let bt = 2.0 * a * c + b;
    let m = fresnel_moments(a, bt, w);
    let phc = Complex64::new(0.0, a * c * c + b * c).exp();
    let a0 = g_mid;
    let a1 = (g_q - g_p) / (2.0 * w);
    let a2 = (g_q - 2.0 * g_mid + g_p) / (2.0 * w * w);
    phc * (a0 * m[0] + a1 * m[1] + a2 * m[2])
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration and cached.
pub fn gauss_legendre(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    use std::collections::HashMap;
    use std::sync::{Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    if let Some(v) = guard.get(&n) {
        return v;
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    let leaked: &'static (Vec<f64>, Vec<f64>) = Box::leak(Box::new((nodes, weights)));
    guard.insert(n, leaked);
    leaked
}

/// Adaptive Gauss-Legendre integration of a complex-valued function on
/// [a, b]: 15-point panels, bisected until the two-half refinement agrees.
pub fn adaptive_gl<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64) -> Complex64 {
    fn gl15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Complex64 {
        let (nodes, weights) = gauss_legendre(15);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut s = Complex64::new(0.0, 0.0);
        for (x, w) in nodes.iter().zip(weights) {
            s += *w * f(mid + half * x);
        }
        s * half
    }
    fn rec<F: Fn(f64) -> Complex64>(
        f: &F,
        a: f64,
        b: f64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> Complex64 {
        let mid = 0.5 * (a + b);
        let left = gl15(f, a, mid);
        let right = gl15(f, mid, b);
        let delta = (left + right - whole).norm();
        if delta < tol || depth >= 24 {
            left + right
        } else {
            rec(f, a, mid, left, tol / 2.0, depth + 1) + rec(f, mid, b, right, tol / 2.0, depth + 1)
        }
    }
    let whole = gl15(f, a, b);
    rec(f, a, b, whole, tol, 0)
}
