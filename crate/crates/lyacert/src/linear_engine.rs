//! Floquet analysis, antiperiodic weighted eigenvalues, and periodic
//! solves for u'' + Q(t)u = g(t).
//!
//! Everything runs through one fixed-step RK4 propagator for the first
//! order system y' = S(t)y, S = [[0, I], [-Q, 0]]. The weighted
//! eigenvalue lambda_1 (smallest mu > 0 making u'' + mu P(t) u = 0 admit
//! an antiperiodic solution) is located on det(M(mu) + I): by bisection
//! at a sign change, and at sign-definite touch points (closed gaps) by
//! intersecting the two lines of the multiplier-angle kink.

use nalgebra::{Complex, DMatrix, DVector};
use serde::Serialize;

use crate::error::{LyacertError, ScanDiagnostics};
use crate::matrixfn::{MatrixFunction, VectorFunction};
use crate::numeric;
use crate::resonant::PeriodicSolution;

pub const DEFAULT_STEPS: usize = 4096;

/// Step count per period: the LYACERT_STEPS environment variable when
/// set, otherwise 4096.
pub fn default_steps() -> Result<usize, LyacertError> {
    match std::env::var("LYACERT_STEPS") {
        Err(_) => Ok(DEFAULT_STEPS),
        Ok(raw) => {
            let parsed: usize = raw
                .trim()
                .parse()
                .map_err(|_| LyacertError::Usage(format!("LYACERT_STEPS must be a positive integer, got {raw:?}")))?;
            if !(16..=10_000_000).contains(&parsed) {
                return Err(LyacertError::Usage(format!(
                    "LYACERT_STEPS must lie in [16, 10000000], got {parsed}"
                )));
            }
            Ok(parsed)
        }
    }
}

/// d/dt [u; u'] for u'' + Q u = 0, applied to a block of columns.
fn apply_system(q: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let n = q.nrows();
    let cols = y.ncols();
    let mut out = DMatrix::zeros(2 * n, cols);
    out.rows_mut(0, n).copy_from(&y.rows(n, n));
    let force = -q * y.rows(0, n);
    out.rows_mut(n, n).copy_from(&force);
    out
}

fn check_finite(y: &DMatrix<f64>, t: f64) -> Result<(), LyacertError> {
    let m = y.amax();
    if !m.is_finite() || m > 1e150 {
        return Err(LyacertError::Overflow(format!(
            "state norm {m:.3e} at t = {t:.6}; the system is blowing up"
        )));
    }
    Ok(())
}

/// RK4 flow of y' = S(t)y from t0 to t1, acting on the columns of y0.
pub fn propagate(
    q: &MatrixFunction,
    t0: f64,
    t1: f64,
    steps: usize,
    y0: &DMatrix<f64>,
) -> Result<DMatrix<f64>, LyacertError> {
    if steps == 0 {
        return Err(LyacertError::Domain("steps must be positive".into()));
    }
    if !(t1 > t0) {
        return Err(LyacertError::Domain(format!(
            "need t1 > t0, got [{t0}, {t1}]"
        )));
    }
    let n = q.dim();
    if y0.nrows() != 2 * n {
        return Err(LyacertError::Domain(format!(
            "state has {} rows, expected {}",
            y0.nrows(),
            2 * n
        )));
    }
    propagate_with(&|t| q.eval(t), t0, t1, steps, y0)
}

fn propagate_with(
    q_at: &dyn Fn(f64) -> DMatrix<f64>,
    t0: f64,
    t1: f64,
    steps: usize,
    y0: &DMatrix<f64>,
) -> Result<DMatrix<f64>, LyacertError> {
    let h = (t1 - t0) / steps as f64;
    let mut y = y0.clone();
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let qa = q_at(t);
        let qm = q_at(t + 0.5 * h);
        let qb = q_at(t + h);
        let k1 = apply_system(&qa, &y);
        let k2 = apply_system(&qm, &(&y + &k1 * (0.5 * h)));
        let k3 = apply_system(&qm, &(&y + &k2 * (0.5 * h)));
        let k4 = apply_system(&qb, &(&y + &k3 * h));
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if k % 64 == 0 {
            check_finite(&y, t + h)?;
        }
    }
    check_finite(&y, t1)?;
    Ok(y)
}

/// Monodromy matrix over one period.
pub fn monodromy(q: &MatrixFunction, steps: usize) -> Result<DMatrix<f64>, LyacertError> {
    let id = DMatrix::identity(2 * q.dim(), 2 * q.dim());
    propagate(q, 0.0, q.period(), steps, &id)
}

fn monodromy_scaled(p: &MatrixFunction, mu: f64, steps: usize) -> Result<DMatrix<f64>, LyacertError> {
    let id = DMatrix::identity(2 * p.dim(), 2 * p.dim());
    propagate_with(&|t| p.eval(t) * mu, 0.0, p.period(), steps, &id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StabilityVerdict {
    BoundedStable,
    Marginal,
    Unbounded,
}

impl std::fmt::Display for StabilityVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StabilityVerdict::BoundedStable => "BOUNDED_STABLE",
            StabilityVerdict::Marginal => "MARGINAL",
            StabilityVerdict::Unbounded => "UNBOUNDED",
        };
        f.write_str(s)
    }
}

pub const TOL_MAG: f64 = 1e-6;
pub const TOL_SEP: f64 = 1e-6;

/// Floquet multiplier analysis of u'' + Q(t)u = 0 over one period.
#[derive(Debug, Clone, Serialize)]
pub struct FloquetReport {
    pub dim: usize,
    pub period: f64,
    pub steps: usize,
    /// Eigenvalues of the monodromy matrix as (re, im) pairs.
    pub multipliers: Vec<(f64, f64)>,
    pub determinant: f64,
    pub determinant_defect: f64,
    /// max over multipliers of ||lambda| - 1|.
    pub unit_circle_margin: f64,
    pub min_pairwise_separation: f64,
    pub verdict: StabilityVerdict,
}

pub fn floquet(q: &MatrixFunction, steps: usize) -> Result<FloquetReport, LyacertError> {
    let m = monodromy(q, steps)?;
    let det = m.determinant();
    let defect = (det - 1.0).abs();
    if defect > 1e-6 {
        return Err(LyacertError::Degenerate(format!(
            "monodromy determinant {det:.12} is not symplectic (defect {defect:.3e}); increase the step count"
        )));
    }
    let eigs: Vec<Complex<f64>> = m.complex_eigenvalues().iter().cloned().collect();

    let pair_defect = |map: &dyn Fn(Complex<f64>) -> Complex<f64>| -> f64 {
        eigs.iter()
            .map(|&l| {
                let target = map(l);
                let d = eigs
                    .iter()
                    .map(|&m| (m - target).norm())
                    .fold(f64::INFINITY, f64::min);
                d / target.norm().max(1.0)
            })
            .fold(0.0f64, f64::max)
    };
    let conj_defect = pair_defect(&|l: Complex<f64>| l.conj());
    let recip_defect = pair_defect(&|l: Complex<f64>| l.inv());
    if conj_defect > 1e-6 || recip_defect > 1e-6 {
        return Err(LyacertError::Degenerate(format!(
            "multipliers are not closed under conjugation/reciprocal (defects {conj_defect:.3e}, {recip_defect:.3e})"
        )));
    }

    let unit_circle_margin = eigs
        .iter()
        .map(|l| (l.norm() - 1.0).abs())
        .fold(0.0f64, f64::max);
    let mut min_sep = f64::INFINITY;
    for i in 0..eigs.len() {
        for j in (i + 1)..eigs.len() {
            min_sep = min_sep.min((eigs[i] - eigs[j]).norm());
        }
    }
    let any_outside = eigs.iter().any(|l| l.norm() > 1.0 + TOL_MAG);
    let verdict = if any_outside {
        StabilityVerdict::Unbounded
    } else if unit_circle_margin <= TOL_MAG && min_sep > TOL_SEP {
        StabilityVerdict::BoundedStable
    } else {
        StabilityVerdict::Marginal
    };

    Ok(FloquetReport {
        dim: q.dim(),
        period: q.period(),
        steps,
        multipliers: eigs.iter().map(|l| (l.re, l.im)).collect(),
        determinant: det,
        determinant_defect: defect,
        unit_circle_margin,
        min_pairwise_separation: min_sep,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Lambda1Resolution {
    SignChange,
    Touch,
}

/// Location of the first antiperiodic eigenvalue of u'' + mu P(t) u = 0.
#[derive(Debug, Clone, Serialize)]
pub struct EigenReport {
    pub lambda1: f64,
    pub bracketing_interval: (f64, f64),
    /// Scanned (mu, det(M(mu) + I)) pairs.
    pub shooting_determinant_values: Vec<(f64, f64)>,
    pub rayleigh_estimate: Option<f64>,
    pub resolution: Lambda1Resolution,
    pub steps: usize,
}

fn det_m_plus_i(p: &MatrixFunction, mu: f64, steps: usize) -> Result<f64, LyacertError> {
    let m = monodromy_scaled(p, mu, steps)?;
    // det(M + I) as the eigenvalue product prod (1 + lambda_i): the LU
    // determinant cancels catastrophically once the system turns
    // hyperbolic and entries reach e^(sqrt(mu) T)
    let eigs = m.complex_eigenvalues();
    if m.amax() < 1e12 {
        let mut value = nalgebra::Complex::new(1.0, 0.0);
        for l in eigs.iter() {
            value *= *l + 1.0;
        }
        Ok(value.re)
    } else {
        // deep hyperbolic regime: each real pair (l, 1/l) contributes
        // (1 + l)(1 + 1/l) = 2 + l + 1/l whose sign follows the large
        // member, and complex pairs contribute positive factors. Only
        // eigenvalues of modulus comparable to the matrix norm carry a
        // trustworthy sign (absolute eigenvalue error scales with the
        // norm), so the reciprocal partners and roundoff spawn are both
        // excluded
        let trust = 1e-6 * m.amax();
        let mut sign = 1.0f64;
        let mut magnitude = 1.0f64;
        for l in eigs.iter() {
            let modulus = l.norm();
            if modulus >= trust {
                magnitude = (magnitude * modulus).min(f64::MAX);
                if l.im.abs() <= 1e-8 * modulus && l.re < 0.0 {
                    sign = -sign;
                }
            }
        }
        Ok(sign * magnitude)
    }
}

/// Largest multiplier angle |arg lambda| of M(mu); pi means a multiplier
/// sits at -1.
fn theta_max(p: &MatrixFunction, mu: f64, steps: usize) -> Result<f64, LyacertError> {
    let m = monodromy_scaled(p, mu, steps)?;
    Ok(m
        .complex_eigenvalues()
        .iter()
        .map(|l| l.im.atan2(l.re).abs())
        .fold(0.0f64, f64::max))
}

/// Intersection of the line through (x1,y1),(x2,y2) with the line through
/// (x3,y3),(x4,y4).
fn two_line_vertex(pts: &[(f64, f64); 4]) -> Option<f64> {
    let [(x1, y1), (x2, y2), (x3, y3), (x4, y4)] = *pts;
    let s_left = (y2 - y1) / (x2 - x1);
    let s_right = (y4 - y3) / (x4 - x3);
    if !s_left.is_finite() || !s_right.is_finite() || (s_left - s_right).abs() < 1e-300 {
        return None;
    }
    let b_left = y1 - s_left * x1;
    let b_right = y3 - s_right * x3;
    let x = (b_right - b_left) / (s_left - s_right);
    if s_left >= 0.0 {
        return None;
    }
    Some(x)
}

/// Resolves a sign-definite touch of det(M(mu) + I) near the candidate by
/// the multiplier-angle kink; returns the refined eigenvalue if the kink
/// closes to pi.
fn resolve_touch(p: &MatrixFunction, candidate: f64, steps: usize) -> Result<Option<f64>, LyacertError> {
    let mut v = candidate;
    for d_rel in [1e-2, 1e-3, 1e-4] {
        let d = d_rel * v;
        let xs = [v - 2.0 * d, v - d, v + d, v + 2.0 * d];
        if xs[0] <= 0.0 {
            return Ok(None);
        }
        let mut pts = [(0.0, 0.0); 4];
        for (i, &x) in xs.iter().enumerate() {
            pts[i] = (x, std::f64::consts::PI - theta_max(p, x, steps)?);
        }
        match two_line_vertex(&pts) {
            Some(x) if x > 0.0 && (x - v).abs() <= 4.0 * d => v = x,
            _ => return Ok(None),
        }
    }
    let gap = std::f64::consts::PI - theta_max(p, v, steps)?;
    if gap.abs() <= 5e-6 {
        Ok(Some(v))
    } else {
        Ok(None)
    }
}

fn bisect_root(
    p: &MatrixFunction,
    mut lo: f64,
    mut f_lo: f64,
    mut hi: f64,
    steps: usize,
) -> Result<(f64, f64, f64), LyacertError> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-12 * mid {
            return Ok((mid, lo, hi));
        }
        let f_mid = det_m_plus_i(p, mid, steps)?;
        if f_mid == 0.0 {
            return Ok((mid, lo, hi));
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), lo, hi))
}

fn scan_grid(mu_lo: f64, mu_hi: f64, points: usize) -> Vec<f64> {
    let ratio = (mu_hi / mu_lo).ln();
    (0..points)
        .map(|i| mu_lo * (ratio * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Smallest mu > 0 for which u'' + mu P(t) u = 0 has a nontrivial
/// antiperiodic solution, by shooting on det(M(mu) + I).
pub fn lambda1_shooting(p: &MatrixFunction, steps: usize) -> Result<EigenReport, LyacertError> {
    let period = p.period();
    let rayleigh = rayleigh_lambda1(p, 1024).ok();

    let mean = p.mean(256);
    let mean_eig_max = mean
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let pi = std::f64::consts::PI;
    let mut mu_lo: f64 = 1e-4;
    let mut mu_hi = if mean_eig_max > 0.0 {
        8.0 * pi * pi / (period * period * mean_eig_max)
    } else {
        1e4
    };
    if let Some(r) = rayleigh {
        mu_hi = mu_hi.max(4.0 * r);
        mu_lo = mu_lo.min(r / 16.0);
    }
    mu_hi = mu_hi.max(mu_lo * 100.0);

    let mut best_diag = ScanDiagnostics {
        mu_lo,
        mu_hi,
        points: 0,
        min_abs_det: f64::INFINITY,
        all_same_sign: true,
    };

    for points in [96usize, 384] {
        let grid = scan_grid(mu_lo, mu_hi, points);
        let mut values = Vec::with_capacity(points);
        for &mu in &grid {
            values.push(det_m_plus_i(p, mu, steps)?);
        }
        let scanned: Vec<(f64, f64)> = grid.iter().cloned().zip(values.iter().cloned()).collect();

        let first_sign_change = (0..points - 1)
            .find(|&i| values[i] != 0.0 && values[i + 1] != 0.0 && (values[i] > 0.0) != (values[i + 1] > 0.0));

        // interior sign-definite dips that may hide an even-multiplicity root
        let mut touch_candidates: Vec<f64> = Vec::new();
        let scale = values.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
        let cutoff = first_sign_change.map(|i| i + 1).unwrap_or(points);
        for i in 1..cutoff.saturating_sub(1) {
            let dip = values[i].abs() <= values[i - 1].abs() && values[i].abs() <= values[i + 1].abs();
            if dip && values[i].abs() <= 1e-2 * scale {
                let (x0, y0) = (grid[i - 1], values[i - 1]);
                let (x1, y1) = (grid[i], values[i]);
                let (x2, y2) = (grid[i + 1], values[i + 1]);
                // parabola vertex through the three dip points
                let d1 = (y1 - y0) / (x1 - x0);
                let d2 = (y2 - y1) / (x2 - x1);
                let curv = (d2 - d1) / (x2 - x0);
                if curv.abs() > 0.0 {
                    let vertex = 0.5 * (x0 + x1) - d1 / (2.0 * curv);
                    let v = if vertex.is_finite() && vertex > grid[i - 1] && vertex < grid[i + 1] {
                        vertex
                    } else {
                        x1
                    };
                    touch_candidates.push(v);
                }
            }
        }

        let mut resolved_touch: Option<f64> = None;
        for cand in touch_candidates {
            if let Some(root) = resolve_touch(p, cand, steps)? {
                resolved_touch = match resolved_touch {
                    Some(r) if r <= root => Some(r),
                    _ => Some(root),
                };
            }
        }

        let sign_root = match first_sign_change {
            Some(i) => {
                let (root, lo, hi) = bisect_root(p, grid[i], values[i], grid[i + 1], steps)?;
                Some((root, lo, hi))
            }
            None => None,
        };

        let chosen = match (sign_root, resolved_touch) {
            (Some((r, lo, hi)), Some(t)) => {
                if t < r {
                    Some((t, t * (1.0 - 1e-4), t * (1.0 + 1e-4), Lambda1Resolution::Touch))
                } else {
                    Some((r, lo, hi, Lambda1Resolution::SignChange))
                }
            }
            (Some((r, lo, hi)), None) => Some((r, lo, hi, Lambda1Resolution::SignChange)),
            (None, Some(t)) => Some((t, t * (1.0 - 1e-4), t * (1.0 + 1e-4), Lambda1Resolution::Touch)),
            (None, None) => None,
        };

        if let Some((lambda1, lo, hi, resolution)) = chosen {
            return Ok(EigenReport {
                lambda1,
                bracketing_interval: (lo, hi),
                shooting_determinant_values: scanned,
                rayleigh_estimate: rayleigh,
                resolution,
                steps,
            });
        }

        best_diag = ScanDiagnostics {
            mu_lo,
            mu_hi,
            points,
            min_abs_det: values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min),
            all_same_sign: values.iter().all(|v| *v > 0.0) || values.iter().all(|v| *v < 0.0),
        };
    }

    Err(LyacertError::Lambda1NotFound(best_diag))
}

/// Variational estimate of lambda_1 by lumped linear finite elements on
/// the antiperiodic grid and shifted power iteration on K^{-1}B.
pub fn rayleigh_lambda1(p: &MatrixFunction, n: usize) -> Result<f64, LyacertError> {
    if n < 64 {
        return Err(LyacertError::Domain("rayleigh grid needs at least 64 cells".into()));
    }
    let dim = p.dim();
    let period = p.period();
    let h = period / n as f64;
    let blocks: Vec<DMatrix<f64>> = (0..n).map(|j| p.eval(j as f64 * h)).collect();

    // Gershgorin bound on max_t rho(P(t)) for the spectral shift
    let rho_max = blocks
        .iter()
        .map(|b| {
            (0..dim)
                .map(|i| (0..dim).map(|k| b[(i, k)].abs()).sum::<f64>())
                .fold(0.0f64, f64::max)
        })
        .fold(0.0f64, f64::max);
    if rho_max == 0.0 {
        return Err(LyacertError::Degenerate("weight function is identically zero".into()));
    }
    let shift = period * period * rho_max / (std::f64::consts::PI * std::f64::consts::PI);

    let k_diag = vec![2.0 / h; n];
    let apply_b = |u: &[f64], out: &mut [f64]| {
        for j in 0..n {
            let b = &blocks[j];
            for i in 0..dim {
                let mut s = 0.0;
                for k in 0..dim {
                    s += b[(i, k)] * u[j * dim + k];
                }
                out[j * dim + i] = h * s;
            }
        }
    };
    let k_energy = |u: &[f64]| -> f64 {
        let mut e = 0.0;
        for j in 0..n {
            for c in 0..dim {
                let next = if j + 1 == n { -u[c] } else { u[(j + 1) * dim + c] };
                let d = next - u[j * dim + c];
                e += d * d;
            }
        }
        e / h
    };
    let solve_k = |rhs: &[f64], out: &mut [f64]| {
        for c in 0..dim {
            let comp: Vec<f64> = (0..n).map(|j| rhs[j * dim + c]).collect();
            let sol = numeric::cyclic_tridiagonal_solve(&k_diag, -1.0 / h, 1.0 / h, &comp);
            for j in 0..n {
                out[j * dim + c] = sol[j];
            }
        }
    };

    let mean = p.mean(256);
    let mean_eigen = mean.symmetric_eigen();
    let (top_idx, _) = mean_eigen
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let dir = mean_eigen.eigenvectors.column(top_idx);

    let mut u = vec![0.0; n * dim];
    for j in 0..n {
        let t = j as f64 * h;
        let envelope = (std::f64::consts::PI * t / period).cos();
        for c in 0..dim {
            u[j * dim + c] = envelope * dir[c] + 1e-3 * ((j * dim + c) as f64).sin();
        }
    }

    let mut bu = vec![0.0; n * dim];
    let mut kinv = vec![0.0; n * dim];
    let mut nu_prev = f64::NAN;
    let mut nu = f64::NAN;
    for iter in 0..20_000 {
        apply_b(&u, &mut bu);
        let num: f64 = u.iter().zip(&bu).map(|(a, b)| a * b).sum();
        let den = k_energy(&u);
        nu = num / den;
        if iter > 8 && (nu - nu_prev).abs() <= 1e-13 * nu.abs().max(1e-300) {
            break;
        }
        nu_prev = nu;
        solve_k(&bu, &mut kinv);
        let max_abs = u
            .iter()
            .zip(&kinv)
            .map(|(ui, ki)| (ki + shift * ui).abs())
            .fold(0.0f64, f64::max);
        for (ui, ki) in u.iter_mut().zip(&kinv) {
            *ui = (*ki + shift * *ui) / max_abs;
        }
    }
    if !(nu > 0.0) {
        return Err(LyacertError::Degenerate(format!(
            "antiperiodic Rayleigh quotient has no positive direction (nu = {nu:.3e})"
        )));
    }
    Ok(1.0 / nu)
}

/// Unique periodic solution of u'' + C(t)u = g(t), or RESONANT_LINEAR
/// when I - M is singular.
pub fn solve_linear_periodic(
    c: &MatrixFunction,
    g: &VectorFunction,
    steps: usize,
) -> Result<PeriodicSolution, LyacertError> {
    let n = c.dim();
    if g.dim() != n {
        return Err(LyacertError::Domain(format!(
            "forcing has dimension {}, coefficient has {}",
            g.dim(),
            n
        )));
    }
    if (g.period() - c.period()).abs() > 1e-12 * c.period() {
        return Err(LyacertError::Domain(
            "coefficient and forcing periods differ".into(),
        ));
    }
    let period = c.period();
    let h = period / steps as f64;
    let two_n = 2 * n;

    // propagate [basis | particular] with the forcing on the last column
    let mut state = DMatrix::zeros(two_n, two_n + 1);
    state.view_mut((0, 0), (two_n, two_n)).copy_from(&DMatrix::identity(two_n, two_n));
    let rhs = |t: f64, y: &DMatrix<f64>| -> DMatrix<f64> {
        let mut out = apply_system(&c.eval(t), y);
        let f = g.eval(t);
        for i in 0..n {
            out[(n + i, two_n)] += f[i];
        }
        out
    };
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = rhs(t, &state);
        let k2 = rhs(t + 0.5 * h, &(&state + &k1 * (0.5 * h)));
        let k3 = rhs(t + 0.5 * h, &(&state + &k2 * (0.5 * h)));
        let k4 = rhs(t + h, &(&state + &k3 * h));
        state += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if k % 64 == 0 {
            check_finite(&state, t + h)?;
        }
    }
    check_finite(&state, period)?;

    let m = state.view((0, 0), (two_n, two_n)).clone_owned();
    let v = state.column(two_n).clone_owned();
    let a = DMatrix::identity(two_n, two_n) - &m;
    let svd = a.clone().svd(true, true);
    let sigma_min = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = svd.singular_values.iter().cloned().fold(0.0f64, f64::max).max(1.0);
    if sigma_min < 1e-10 * scale {
        return Err(LyacertError::ResonantLinear {
            sigma_min,
            context: "direct periodic solve".into(),
        });
    }
    let y0 = svd
        .solve(&v, 0.0)
        .map_err(|e| LyacertError::Degenerate(format!("periodicity solve failed: {e}")))?;

    // re-run storing the trajectory
    let mut y = DMatrix::from_column_slice(two_n, 1, y0.as_slice());
    let mut times = Vec::with_capacity(steps + 1);
    let mut samples = Vec::with_capacity(steps + 1);
    let mut derivative_samples = Vec::with_capacity(steps + 1);
    let push = |y: &DMatrix<f64>, samples: &mut Vec<DVector<f64>>, derivs: &mut Vec<DVector<f64>>| {
        samples.push(DVector::from_fn(n, |i, _| y[(i, 0)]));
        derivs.push(DVector::from_fn(n, |i, _| y[(n + i, 0)]));
    };
    times.push(0.0);
    push(&y, &mut samples, &mut derivative_samples);
    let rhs1 = |t: f64, y: &DMatrix<f64>| -> DMatrix<f64> {
        let mut out = apply_system(&c.eval(t), y);
        let f = g.eval(t);
        for i in 0..n {
            out[(n + i, 0)] += f[i];
        }
        out
    };
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = rhs1(t, &y);
        let k2 = rhs1(t + 0.5 * h, &(&y + &k1 * (0.5 * h)));
        let k3 = rhs1(t + 0.5 * h, &(&y + &k2 * (0.5 * h)));
        let k4 = rhs1(t + h, &(&y + &k3 * h));
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        times.push((k + 1) as f64 * h);
        push(&y, &mut samples, &mut derivative_samples);
    }

    let bc_mismatch = {
        let du = (&samples[steps] - &samples[0]).amax();
        let dv = (&derivative_samples[steps] - &derivative_samples[0]).amax();
        du.max(dv)
    };

    // independent residual by fourth order centered differences on the
    // periodic grid
    let wrap = |j: isize| -> usize { j.rem_euclid(steps as isize) as usize };
    let mut residual_sup = 0.0f64;
    for j in 0..steps {
        let i = j as isize;
        let t = times[j];
        let upp = (-&samples[wrap(i - 2)] + &samples[wrap(i - 1)] * 16.0
            - &samples[j] * 30.0
            + &samples[wrap(i + 1)] * 16.0
            - &samples[wrap(i + 2)])
            / (12.0 * h * h);
        let res = (upp + c.eval(t) * &samples[j] - g.eval(t)).amax();
        residual_sup = residual_sup.max(res);
    }

    Ok(PeriodicSolution {
        period,
        times,
        samples,
        derivative_samples,
        residual_sup,
        bc_mismatch,
    })
}
