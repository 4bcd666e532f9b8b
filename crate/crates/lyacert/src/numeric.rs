//! Shared numerical kernels: quadrature rules, cyclic tridiagonal solves,
//! Gauss–Legendre nodes, root bracketing, and L^p norms of sampled data.

use crate::exponent::PExponent;

/// Composite trapezoid rule on a uniform closed grid (`samples.len() = N+1`
/// covering both endpoints), spacing `h`.
pub fn trapezoid(h: f64, samples: &[f64]) -> f64 {
    let n = samples.len();
    assert!(n >= 2, "trapezoid needs at least two samples");
    let mut s = 0.5 * (samples[0] + samples[n - 1]);
    for v in &samples[1..n - 1] {
        s += v;
    }
    s * h
}

/// Composite Simpson rule on a uniform closed grid. Handles an odd panel
/// count by finishing with a 3/8 rule on the last three panels.
pub fn simpson(h: f64, samples: &[f64]) -> f64 {
    let n = samples.len() - 1;
    assert!(n >= 2, "simpson needs at least two panels");
    let (simpson_panels, tail) = if n % 2 == 0 { (n, 0) } else { (n - 3, 3) };
    let mut s = 0.0;
    if simpson_panels > 0 {
        s += samples[0] + samples[simpson_panels];
        for j in 1..simpson_panels {
            s += if j % 2 == 1 { 4.0 } else { 2.0 } * samples[j];
        }
        s *= h / 3.0;
    }
    if tail == 3 {
        let j = n - 3;
        s += 3.0 * h / 8.0
            * (samples[j] + 3.0 * samples[j + 1] + 3.0 * samples[j + 2] + samples[j + 3]);
    }
    s
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson_rule<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson_rule(f, a, fa, m, fm);
        let (right, rm, frm) = simpson_rule(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson_rule(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
///
/// Nodes are roots of the Legendre polynomial P_n found by Newton iteration
/// from the Chebyshev initial guess; exact for polynomials of degree 2n−1.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        // map (-1,1) -> (0,1); weight picks up the Jacobian 1/2
        nodes[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Solves a cyclic tridiagonal system: diagonal `d`, constant sub/super
/// diagonal `off`, and wrap-around entries `corner` at positions (0, n−1)
/// and (n−1, 0). Uses the Thomas algorithm plus a Sherman–Morrison
/// correction for the corners.
pub fn cyclic_tridiagonal_solve(d: &[f64], off: f64, corner: f64, rhs: &[f64]) -> Vec<f64> {
    let n = d.len();
    assert!(n >= 3);
    assert_eq!(rhs.len(), n);
    // A = T + corner * (e0 e_{n-1}^T + e_{n-1} e0^T); write the rank-one
    // update as u v^T with u = (alpha, 0, .., corner), v = (1, 0, .., corner/alpha)
    let alpha = -d[0].abs().max(1.0);
    let mut dd = d.to_vec();
    dd[0] -= alpha;
    dd[n - 1] -= corner * corner / alpha;
    let x = tridiagonal_solve(&dd, off, rhs);
    let mut u = vec![0.0; n];
    u[0] = alpha;
    u[n - 1] = corner;
    let z = tridiagonal_solve(&dd, off, &u);
    let vx = x[0] + corner / alpha * x[n - 1];
    let vz = z[0] + corner / alpha * z[n - 1];
    let factor = vx / (1.0 + vz);
    x.iter().zip(&z).map(|(xi, zi)| xi - factor * zi).collect()
}

/// Thomas algorithm for a tridiagonal system with constant off-diagonal.
fn tridiagonal_solve(d: &[f64], off: f64, rhs: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    c[0] = off / d[0];
    x[0] = rhs[0] / d[0];
    for i in 1..n {
        let m = d[i] - off * c[i - 1];
        c[i] = off / m;
        x[i] = (rhs[i] - off * x[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

/// Bisection for a root of `f` in `[a, b]`, assuming a sign change.
/// Returns the midpoint of the final bracket of relative width `rel_tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, rel_tol: f64) -> f64 {
    let mut fa = f(a);
    let fb = f(b);
    assert!(
        fa * fb <= 0.0,
        "bisect requires a sign change: f({a}) = {fa}, f({b}) = {fb}"
    );
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= rel_tol * m.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// ‖f⁺‖_p of a sampled scalar function on a uniform closed grid, by
/// composite Simpson for finite p and the sample max for p = ∞.
pub fn lp_norm_positive_part(h: f64, samples: &[f64], p: &PExponent) -> f64 {
    match p {
        PExponent::Infinity => samples.iter().fold(0.0f64, |m, &v| m.max(v.max(0.0))),
        PExponent::One => {
            let pos: Vec<f64> = samples.iter().map(|&v| v.max(0.0)).collect();
            simpson(h, &pos)
        }
        PExponent::Finite(p) => {
            let pow: Vec<f64> = samples.iter().map(|&v| v.max(0.0).powf(*p)).collect();
            simpson(h, &pow).max(0.0).powf(1.0 / p)
        }
    }
}
