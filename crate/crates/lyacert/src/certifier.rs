//! Stable-boundedness certificates and optimality witnesses.
//!
//! Three certificate routes: the diagonal-majorant route through the
//! antiperiodic Lyapunov constants, the Krein route through the first
//! weighted antiperiodic eigenvalue, and the specialized 2x2 coupling
//! construction. Certificates are sufficient evidence only: a failed
//! check yields INCONCLUSIVE, never a claim of instability. Instability
//! and resonance claims come from explicit witnesses checked against the
//! Floquet oracle.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::constants::{lyapunov_constant, Bc};
use crate::error::LyacertError;
use crate::exponent::PExponent;
use crate::linear_engine::{self, FloquetReport, StabilityVerdict};
use crate::matrixfn::{MatrixFunction, VectorFunction};
use crate::numeric;

const NORM_GRID: usize = 4096;
const SAMPLE_GRID: usize = 512;

/// Membership evidence for the admissible class: symmetric, mean positive
/// semidefinite, and no nontrivial constant solutions.
#[derive(Debug, Clone, Serialize)]
pub struct LambdaMembership {
    pub symmetric_ok: bool,
    pub mean_psd_ok: bool,
    pub no_constant_solutions_ok: bool,
    pub common_kernel_dim: usize,
    pub mean_min_eigenvalue: f64,
}

impl LambdaMembership {
    pub fn member(&self) -> bool {
        self.symmetric_ok && self.mean_psd_ok && self.no_constant_solutions_ok
    }
}

pub fn check_lambda_membership(q: &MatrixFunction, sample_count: usize, tol: f64) -> LambdaMembership {
    let n = q.dim();
    let t = q.period();
    let count = sample_count.max(16);
    let h = t / count as f64;

    let mut sym_defect = 0.0f64;
    let mut scale = 0.0f64;
    let mut stack = DMatrix::zeros(count * n, n);
    for k in 0..count {
        let raw = q.eval_raw(k as f64 * h);
        scale = scale.max(raw.amax());
        sym_defect = sym_defect.max((&raw - raw.transpose()).amax());
        stack.view_mut((k * n, 0), (n, n)).copy_from(&q.eval(k as f64 * h));
    }
    let symmetric_ok = sym_defect <= tol * scale.max(1.0);

    let mean = q.mean(count);
    let mean_min_eigenvalue = mean
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let mean_psd_ok = mean_min_eigenvalue >= -1e-10;

    // u = k constant solves iff Q(t)k = 0 for every sample time
    let svd = stack.svd(false, false);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let common_kernel_dim = svd
        .singular_values
        .iter()
        .filter(|s| **s < tol * sigma_max.max(1.0))
        .count()
        + n.saturating_sub(svd.singular_values.len());

    LambdaMembership {
        symmetric_ok,
        mean_psd_ok,
        no_constant_solutions_ok: common_kernel_dim == 0,
        common_kernel_dim,
        mean_min_eigenvalue,
    }
}

/// Diagonal pointwise dominator B(t) with b_ii = q_ii + sum_{j != i} |q_ij|.
pub fn gershgorin_majorant(q: &MatrixFunction) -> MatrixFunction {
    let n = q.dim();
    let inner = q.clone();
    MatrixFunction::from_fn(n, q.period(), move |t| {
        let m = inner.eval(t);
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                let off: f64 = (0..n).filter(|k| *k != i).map(|k| m[(i, k)].abs()).sum();
                m[(i, i)] + off
            } else {
                0.0
            }
        })
    })
    .expect("majorant inherits a valid period and dimension")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertificateMethod {
    LpMajorant,
    KreinLambda1,
    Example2d,
}

impl std::fmt::Display for CertificateMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CertificateMethod::LpMajorant => "LP_MAJORANT",
            CertificateMethod::KreinLambda1 => "KREIN_LAMBDA1",
            CertificateMethod::Example2d => "EXAMPLE_2D",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertificateVerdict {
    CertifiedStablyBounded,
    Inconclusive,
}

impl std::fmt::Display for CertificateVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CertificateVerdict::CertifiedStablyBounded => "CERTIFIED_STABLY_BOUNDED",
            CertificateVerdict::Inconclusive => "INCONCLUSIVE",
        };
        f.write_str(s)
    }
}

/// Outcome of a certification attempt. A certificate never asserts
/// instability; INCONCLUSIVE means exactly that.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub method: CertificateMethod,
    pub verdict: CertificateVerdict,
    pub majorant: Option<MatrixFunction>,
    pub exponents: Vec<PExponent>,
    pub norms: Vec<f64>,
    pub constants: Vec<f64>,
    pub margins: Vec<f64>,
    pub lambda1: Option<f64>,
    pub gamma: Option<f64>,
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn certified(&self) -> bool {
        self.verdict == CertificateVerdict::CertifiedStablyBounded
    }
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

fn require_membership(q: &MatrixFunction) -> Result<(), LyacertError> {
    let mem = check_lambda_membership(q, SAMPLE_GRID, 1e-9);
    if !mem.member() {
        return Err(LyacertError::Precondition(format!(
            "coefficient is not admissible: symmetric_ok={}, mean_psd_ok={} (min eig {:.3e}), common_kernel_dim={}",
            mem.symmetric_ok, mem.mean_psd_ok, mem.mean_min_eigenvalue, mem.common_kernel_dim
        )));
    }
    Ok(())
}

fn check_majorant(p: &MatrixFunction, b: &MatrixFunction) -> Result<(), LyacertError> {
    let t = p.period();
    for k in 0..SAMPLE_GRID {
        let tk = t * k as f64 / SAMPLE_GRID as f64;
        let defect = min_eigenvalue(&(b.eval(tk) - p.eval(tk)));
        if defect < -1e-10 {
            return Err(LyacertError::MajorantInvalid { t: tk, defect });
        }
    }
    Ok(())
}

fn require_diagonal(b: &MatrixFunction) -> Result<(), LyacertError> {
    let t = b.period();
    for k in 0..SAMPLE_GRID {
        let raw = b.eval_raw(t * k as f64 / SAMPLE_GRID as f64);
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                if i != j && raw[(i, j)].abs() > 1e-12 {
                    return Err(LyacertError::Domain(format!(
                        "majorant must be diagonal; entry ({i},{j}) is {:.3e}",
                        raw[(i, j)]
                    )));
                }
            }
        }
    }
    Ok(())
}

fn sampled_norm<F: Fn(f64) -> f64>(f: F, period: f64, p: &PExponent) -> f64 {
    let h = period / NORM_GRID as f64;
    let samples: Vec<f64> = (0..=NORM_GRID).map(|k| f(k as f64 * h)).collect();
    numeric::lp_norm_positive_part(h, &samples, p)
}

/// Picks the exponent minimizing ||b+||_p / beta_p^ant over the fixed grid
/// {1, 1.25, 1.5, 2, 3, 5, 10, inf}; ties break toward smaller p.
pub fn choose_exponents<F: Fn(f64) -> f64>(b: F, period: f64) -> Result<PExponent, LyacertError> {
    let grid = [
        PExponent::One,
        PExponent::Finite(1.25),
        PExponent::Finite(1.5),
        PExponent::Finite(2.0),
        PExponent::Finite(3.0),
        PExponent::Finite(5.0),
        PExponent::Finite(10.0),
        PExponent::Infinity,
    ];
    let mut best = grid[0];
    let mut best_ratio = f64::INFINITY;
    for p in grid {
        let beta = lyapunov_constant(Bc::Antiperiodic, &p, period)?.value;
        let ratio = sampled_norm(&b, period, &p) / beta;
        if ratio < best_ratio {
            best_ratio = ratio;
            best = p;
        }
    }
    if best_ratio == f64::INFINITY {
        best = PExponent::One;
    }
    Ok(best)
}

fn strictness_verdict(p: &PExponent, margin: f64, beta: f64, notes: &mut Vec<String>, component: usize) -> bool {
    match p {
        PExponent::One => {
            let ok = margin >= -1e-12 * beta;
            if ok && margin <= 1e-9 * beta {
                notes.push(format!(
                    "component {component}: p = 1 boundary case (margin {margin:.3e}); accepted non-strictly"
                ));
            }
            ok
        }
        _ => margin > 1e-9 * beta,
    }
}

/// Certificate through a diagonal majorant and per-component norm bounds
/// against the antiperiodic Lyapunov constants; strict inequalities for
/// p in (1, inf], non-strict at p = 1.
pub fn certify_thm41(
    p: &MatrixFunction,
    b: Option<&MatrixFunction>,
    exponents: Option<&[PExponent]>,
) -> Result<Certificate, LyacertError> {
    require_membership(p)?;
    let n = p.dim();
    let period = p.period();
    let majorant = match b {
        Some(user) => {
            if user.dim() != n || (user.period() - period).abs() > 1e-12 * period {
                return Err(LyacertError::Domain("majorant shape or period mismatch".into()));
            }
            require_diagonal(user)?;
            user.clone()
        }
        None => gershgorin_majorant(p),
    };
    check_majorant(p, &majorant)?;

    let exps: Vec<PExponent> = match exponents {
        Some(list) => {
            if list.len() != n {
                return Err(LyacertError::Domain(format!(
                    "need {n} exponents, got {}",
                    list.len()
                )));
            }
            list.to_vec()
        }
        None => (0..n)
            .map(|i| {
                let m = majorant.clone();
                choose_exponents(move |t| m.eval(t)[(i, i)], period)
            })
            .collect::<Result<_, _>>()?,
    };

    let mut norms = Vec::with_capacity(n);
    let mut constants = Vec::with_capacity(n);
    let mut margins = Vec::with_capacity(n);
    let mut notes = Vec::new();
    let mut all_ok = true;
    for (i, pe) in exps.iter().enumerate() {
        let m = majorant.clone();
        let norm = sampled_norm(move |t| m.eval(t)[(i, i)], period, pe);
        let beta = lyapunov_constant(Bc::Antiperiodic, pe, period)?.value;
        let margin = beta - norm;
        all_ok &= strictness_verdict(pe, margin, beta, &mut notes, i);
        norms.push(norm);
        constants.push(beta);
        margins.push(margin);
    }

    Ok(Certificate {
        method: CertificateMethod::LpMajorant,
        verdict: if all_ok {
            CertificateVerdict::CertifiedStablyBounded
        } else {
            CertificateVerdict::Inconclusive
        },
        majorant: Some(majorant),
        exponents: exps,
        norms,
        constants,
        margins,
        lambda1: None,
        gamma: None,
        notes,
    })
}

/// Certificate through the first antiperiodic weighted eigenvalue:
/// certified iff lambda_1 > 1 + 1e-6.
pub fn certify_krein(q: &MatrixFunction, steps: usize) -> Result<Certificate, LyacertError> {
    require_membership(q)?;
    let report = linear_engine::lambda1_shooting(q, steps)?;
    let certified = report.lambda1 > 1.0 + 1e-6;
    let mut notes = vec![format!(
        "lambda1 bracketed in [{:.12e}, {:.12e}]",
        report.bracketing_interval.0, report.bracketing_interval.1
    )];
    if let Some(r) = report.rayleigh_estimate {
        notes.push(format!("independent Rayleigh estimate {r:.9e}"));
    }
    Ok(Certificate {
        method: CertificateMethod::KreinLambda1,
        verdict: if certified {
            CertificateVerdict::CertifiedStablyBounded
        } else {
            CertificateVerdict::Inconclusive
        },
        majorant: None,
        exponents: vec![],
        norms: vec![],
        constants: vec![],
        margins: vec![],
        lambda1: Some(report.lambda1),
        gamma: None,
        notes,
    })
}

/// 2x2 certificate via the coupling construction b_11 = p_11 + gamma,
/// b_22 = p_22 + p_12^2 / gamma, with gamma picked by golden-section
/// maximin over the two certificate margins.
pub fn certify_2d_example(
    p: &MatrixFunction,
    p1: &PExponent,
    p2: &PExponent,
) -> Result<Certificate, LyacertError> {
    if p.dim() != 2 {
        return Err(LyacertError::Domain(format!("expected a 2x2 coefficient, got {}x{0}", p.dim())));
    }
    for (name, pe) in [("p1", p1), ("p2", p2)] {
        if matches!(pe, PExponent::One) {
            return Err(LyacertError::Domain(format!(
                "{name} must satisfy p > 1 (finite or infinite)"
            )));
        }
    }
    let period = p.period();

    // [H1]: nonnegative diagonal, nonnegative determinant, det not identically zero
    let h = period / SAMPLE_GRID as f64;
    let mut det_max = 0.0f64;
    for k in 0..SAMPLE_GRID {
        let tk = k as f64 * h;
        let m = p.eval(tk);
        let scale = m.amax().max(1.0);
        if m[(0, 0)] < -1e-12 * scale {
            return Err(LyacertError::Precondition(format!(
                "[H1] fails: p11({tk:.6}) = {:.6e} < 0",
                m[(0, 0)]
            )));
        }
        if m[(1, 1)] < -1e-12 * scale {
            return Err(LyacertError::Precondition(format!(
                "[H1] fails: p22({tk:.6}) = {:.6e} < 0",
                m[(1, 1)]
            )));
        }
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        if det < -1e-12 * scale * scale {
            return Err(LyacertError::Precondition(format!(
                "[H1] fails: det P({tk:.6}) = {det:.6e} < 0"
            )));
        }
        det_max = det_max.max(det);
    }
    if det_max <= 0.0 {
        return Err(LyacertError::Precondition(
            "[H1] fails: det P is identically zero".into(),
        ));
    }

    let beta1 = lyapunov_constant(Bc::Antiperiodic, p1, period)?.value;
    let beta2 = lyapunov_constant(Bc::Antiperiodic, p2, period)?.value;
    let pc = p.clone();
    let p11 = move |t: f64| pc.eval(t)[(0, 0)];
    let pc = p.clone();
    let p22 = move |t: f64| pc.eval(t)[(1, 1)];
    let pc = p.clone();
    let p12sq = move |t: f64| {
        let m = pc.eval(t);
        m[(0, 1)] * m[(0, 1)]
    };

    let norm_p11 = sampled_norm(&p11, period, p1);
    let slack1 = beta1 - norm_p11;
    let mut notes = Vec::new();
    let inconclusive = |notes: Vec<String>| Certificate {
        method: CertificateMethod::Example2d,
        verdict: CertificateVerdict::Inconclusive,
        majorant: None,
        exponents: vec![*p1, *p2],
        norms: vec![],
        constants: vec![beta1, beta2],
        margins: vec![],
        lambda1: None,
        gamma: None,
        notes,
    };
    if slack1 <= 1e-9 * beta1 {
        notes.push(format!(
            "first coupling inequality fails: ||p11||_{p1} = {norm_p11:.6e} vs beta = {beta1:.6e}"
        ));
        return Ok(inconclusive(notes));
    }
    let limit_b22 = {
        let f = |t: f64| p22(t) + p12sq(t) / slack1;
        sampled_norm(f, period, p2)
    };
    if beta2 - limit_b22 <= 1e-9 * beta2 {
        notes.push(format!(
            "second coupling inequality fails: limiting ||p22 + p12^2/slack||_{p2} = {limit_b22:.6e} vs beta = {beta2:.6e}"
        ));
        return Ok(inconclusive(notes));
    }

    // maximin golden-section in gamma over (0, slack1)
    let margin1 = |gamma: f64| {
        let f = |t: f64| p11(t) + gamma;
        beta1 - sampled_norm(f, period, p1)
    };
    let margin2 = |gamma: f64| {
        let f = |t: f64| p22(t) + p12sq(t) / gamma;
        beta2 - sampled_norm(f, period, p2)
    };
    let objective = |gamma: f64| margin1(gamma).min(margin2(gamma));
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut lo = 1e-9 * slack1;
    let mut hi = (1.0 - 1e-9) * slack1;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = objective(x1);
    let mut f2 = objective(x2);
    for _ in 0..70 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = objective(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = objective(x1);
        }
    }
    let gamma = 0.5 * (lo + hi);

    let pc = p.clone();
    let majorant = MatrixFunction::from_fn(2, period, move |t| {
        let m = pc.eval(t);
        DMatrix::from_row_slice(
            2,
            2,
            &[m[(0, 0)] + gamma, 0.0, 0.0, m[(1, 1)] + m[(0, 1)] * m[(0, 1)] / gamma],
        )
    })?;
    check_majorant(p, &majorant)?;

    let norm1 = sampled_norm(|t| p11(t) + gamma, period, p1);
    let norm2 = sampled_norm(|t| p22(t) + p12sq(t) / gamma, period, p2);
    let m1 = beta1 - norm1;
    let m2 = beta2 - norm2;
    let ok = m1 > 1e-9 * beta1 && m2 > 1e-9 * beta2;
    if !ok {
        notes.push(format!(
            "gamma search could not clear both margins (m1 = {m1:.3e}, m2 = {m2:.3e})"
        ));
    }
    Ok(Certificate {
        method: CertificateMethod::Example2d,
        verdict: if ok {
            CertificateVerdict::CertifiedStablyBounded
        } else {
            CertificateVerdict::Inconclusive
        },
        majorant: Some(majorant),
        exponents: vec![*p1, *p2],
        norms: vec![norm1, norm2],
        constants: vec![beta1, beta2],
        margins: vec![m1, m2],
        lambda1: None,
        gamma: Some(gamma),
        notes,
    })
}

#[derive(Debug, Clone, Copy)]
enum BumpFamily {
    /// Plateau of height c on [0, s] with cosine ramps of width 0.15 s.
    Single { s: f64 },
    /// Two plateaus of height c at [0, s] and [T/2, T/2 + s].
    Double { s: f64 },
    /// c + eps cos(2 pi t / T).
    ConstPlusCos { eps: f64 },
}

fn plateau(t: f64, c: f64, s: f64) -> f64 {
    if t < 0.0 || t > s {
        return 0.0;
    }
    let r = 0.15 * s;
    if t < r {
        c * 0.5 * (1.0 - (std::f64::consts::PI * t / r).cos())
    } else if t > s - r {
        c * 0.5 * (1.0 - (std::f64::consts::PI * (s - t) / r).cos())
    } else {
        c
    }
}

fn family_value(fam: BumpFamily, t: f64, c: f64, period: f64) -> f64 {
    match fam {
        BumpFamily::Single { s } => plateau(t, c, s),
        BumpFamily::Double { s } => plateau(t, c, s) + plateau(t - period / 2.0, c, s),
        BumpFamily::ConstPlusCos { eps } => c + eps * (2.0 * std::f64::consts::PI * t / period).cos(),
    }
}

fn family_potential(fam: BumpFamily, c: f64, period: f64) -> MatrixFunction {
    MatrixFunction::scalar(period, move |t| family_value(fam, t, c, period))
        .expect("scalar bump potential is well formed")
}

fn family_norm(fam: BumpFamily, c: f64, period: f64, p: &PExponent) -> f64 {
    sampled_norm(|t| family_value(fam, t, c, period), period, p)
}

fn scalar_trace(fam: BumpFamily, c: f64, period: f64, steps: usize) -> Result<f64, LyacertError> {
    let q = family_potential(fam, c, period);
    let m = linear_engine::monodromy(&q, steps)?;
    Ok(m[(0, 0)] + m[(1, 1)])
}

fn witness_delta(gammas: &[f64]) -> f64 {
    let min_gamma = gammas.iter().cloned().fold(f64::INFINITY, f64::min);
    (min_gamma / 10.0).min(1e-3)
}

fn assemble_diagonal(
    n: usize,
    j: usize,
    period: f64,
    fam: BumpFamily,
    c: f64,
    delta: f64,
) -> MatrixFunction {
    MatrixFunction::from_fn(n, period, move |t| {
        DMatrix::from_fn(n, n, |i, k| {
            if i != k {
                0.0
            } else if i == j {
                family_value(fam, t, c, period)
            } else {
                delta
            }
        })
    })
    .expect("diagonal witness assembly is well formed")
}

fn witness_preconditions(gammas: &[f64], j: usize, bound: f64, bound_name: &str) -> Result<(), LyacertError> {
    if j >= gammas.len() {
        return Err(LyacertError::Domain(format!(
            "index {j} out of range for {} gammas",
            gammas.len()
        )));
    }
    if gammas.iter().any(|g| !(*g > 0.0)) {
        return Err(LyacertError::Precondition("all gammas must be positive".into()));
    }
    if gammas[j] <= bound {
        return Err(LyacertError::Precondition(format!(
            "gamma_{j} = {} must exceed {bound_name} = {bound}",
            gammas[j]
        )));
    }
    Ok(())
}

/// Diagonal potential with ||p+||_{p_j} < gamma_j whose scalar block is
/// Floquet-unstable, witnessing that the norm threshold cannot be
/// improved beyond the antiperiodic Lyapunov constant.
pub fn instability_witness(
    gammas: &[f64],
    j: usize,
    p_j: &PExponent,
    period: f64,
) -> Result<(MatrixFunction, FloquetReport), LyacertError> {
    let beta = lyapunov_constant(Bc::Antiperiodic, p_j, period)?.value;
    witness_preconditions(gammas, j, beta, "beta_ant")?;
    let gamma = gammas[j];
    let n = gammas.len();
    let delta = witness_delta(gammas);
    let search_steps = 1024;

    let mut families: Vec<BumpFamily> = vec![
        BumpFamily::ConstPlusCos { eps: 0.02 * gamma },
        BumpFamily::ConstPlusCos { eps: 0.05 * gamma },
        BumpFamily::ConstPlusCos { eps: 0.10 * gamma },
    ];
    for k in 1..=24 {
        families.push(BumpFamily::Single {
            s: period * k as f64 / 24.0,
        });
    }

    for fam in families {
        let unit = family_norm(fam, 1.0, period, p_j);
        let extra = match fam {
            BumpFamily::ConstPlusCos { eps } => eps,
            _ => 0.0,
        };
        if unit <= 0.0 {
            continue;
        }
        // norm is affine in the height: c*unit (+ eps effects already inside)
        let c_max = match fam {
            BumpFamily::ConstPlusCos { .. } => (gamma * (1.0 - 1e-6) - extra).max(0.0),
            _ => gamma * (1.0 - 1e-6) / unit,
        };
        if c_max <= 0.0 {
            continue;
        }
        for step in 1..=48 {
            let c = c_max * step as f64 / 48.0;
            if matches!(fam, BumpFamily::ConstPlusCos { .. }) && c <= extra {
                continue;
            }
            if family_norm(fam, c, period, p_j) >= gamma {
                continue;
            }
            let tr = scalar_trace(fam, c, period, search_steps)?;
            if tr.abs() > 2.0 + 1e-3 {
                let tr_fine = scalar_trace(fam, c, period, linear_engine::DEFAULT_STEPS)?;
                if tr_fine.abs() <= 2.0 + 1e-3 {
                    continue;
                }
                let p = assemble_diagonal(n, j, period, fam, c, delta);
                let report = linear_engine::floquet(&p, linear_engine::DEFAULT_STEPS)?;
                if report.verdict == StabilityVerdict::Unbounded {
                    return Ok((p, report));
                }
            }
        }
    }
    Err(LyacertError::WitnessNotFound(format!(
        "no admissible unstable bump with ||p+||_{p_j} < {gamma} over the search grid (T = {period}); \
         this is a search failure, not a disproof"
    )))
}

/// Diagnostics attached to a resonance witness.
#[derive(Debug, Clone, Serialize)]
pub struct ResonanceDiagnostics {
    pub trace_minus_two: f64,
    pub height: f64,
    pub norm: f64,
    pub norm_bound: f64,
    /// int w^2 dt: nonzero means the forcing is not orthogonal to the
    /// kernel, so the inhomogeneous problem genuinely has no solution.
    pub fredholm_integral: f64,
    pub solve_reports_resonant: bool,
}

/// Diagonal potential with multiplier 1 (periodic resonance) in slot j
/// under the norm budget gamma_j, plus a forcing aligned with the kernel
/// eigenfunction, witnessing nonexistence for the linear problem.
pub fn resonance_witness(
    gammas: &[f64],
    j: usize,
    p_j: &PExponent,
    period: f64,
) -> Result<(MatrixFunction, VectorFunction, ResonanceDiagnostics), LyacertError> {
    let beta = lyapunov_constant(Bc::Periodic, p_j, period)?.value;
    witness_preconditions(gammas, j, beta, "beta_per")?;
    let gamma = gammas[j];
    let n = gammas.len();
    let delta = witness_delta(gammas);
    let scan_steps = 1024;
    let fine_steps = linear_engine::DEFAULT_STEPS;

    let mut families: Vec<BumpFamily> = vec![
        BumpFamily::ConstPlusCos { eps: 0.02 * gamma },
        BumpFamily::ConstPlusCos { eps: 0.05 * gamma },
    ];
    for k in (4..=20).rev() {
        families.push(BumpFamily::Single {
            s: period * k as f64 / 20.0,
        });
    }
    for k in (2..=9).rev() {
        families.push(BumpFamily::Double {
            s: period * k as f64 / 20.0,
        });
    }

    for fam in families {
        let unit = family_norm(fam, 1.0, period, p_j);
        if unit <= 0.0 {
            continue;
        }
        let c_cap = match fam {
            BumpFamily::ConstPlusCos { eps } => 4.0 * (gamma - eps).max(0.0),
            _ => 4.0 * gamma / unit,
        };
        if c_cap <= 0.0 {
            continue;
        }
        // bracket the return of the trace to +2 (second periodic eigenvalue)
        let grid = 96;
        let mut bracket = None;
        let mut prev = (0.0f64, 2.0f64);
        for step in 1..=grid {
            let c = c_cap * step as f64 / grid as f64;
            let tr = scalar_trace(fam, c, period, scan_steps)?;
            if prev.1 < 2.0 - 1e-9 && tr > 2.0 + 1e-9 {
                bracket = Some((prev.0, c));
                break;
            }
            prev = (c, tr);
        }
        let Some((mut lo, mut hi)) = bracket else { continue };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let tr = scalar_trace(fam, mid, period, fine_steps)?;
            if (tr - 2.0).abs() <= 1e-12 || hi - lo <= f64::EPSILON * mid.abs() {
                lo = mid;
                hi = mid;
                break;
            }
            if tr < 2.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c_star = 0.5 * (lo + hi);
        let tr_star = scalar_trace(fam, c_star, period, fine_steps)?;
        if (tr_star - 2.0).abs() > 1e-8 {
            continue;
        }
        let norm = family_norm(fam, c_star, period, p_j);
        if norm >= gamma * (1.0 - 1e-9) {
            continue;
        }

        // kernel eigenfunction from the monodromy null vector
        let q = family_potential(fam, c_star, period);
        let m = linear_engine::monodromy(&q, fine_steps)?;
        let a = &m - DMatrix::identity(2, 2);
        let svd = a.svd(false, true);
        let v_t = svd.v_t.as_ref().expect("svd requested v_t");
        let y0 = DMatrix::from_column_slice(2, 1, &[v_t[(1, 0)], v_t[(1, 1)]]);
        let h = period / fine_steps as f64;
        let mut w_samples = Vec::with_capacity(fine_steps);
        let mut y = y0;
        w_samples.push(y[(0, 0)]);
        for k in 0..fine_steps - 1 {
            let t0 = k as f64 * h;
            y = linear_engine::propagate(&q, t0, t0 + h, 1, &y)?;
            w_samples.push(y[(0, 0)]);
        }
        let w_sup = w_samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for w in &mut w_samples {
            *w /= w_sup;
        }
        let fredholm = {
            let sq: Vec<f64> = w_samples.iter().map(|w| w * w).chain([w_samples[0] * w_samples[0]]).collect();
            numeric::simpson(h, &sq)
        };

        let a_matrix = assemble_diagonal(n, j, period, fam, c_star, delta);
        let forcing_samples: Vec<DVector<f64>> = w_samples
            .iter()
            .map(|w| DVector::from_fn(n, |i, _| if i == j { *w } else { 0.0 }))
            .collect();
        let forcing = VectorFunction::from_samples(period, &forcing_samples)?;

        let solve_reports_resonant = matches!(
            linear_engine::solve_linear_periodic(&a_matrix, &forcing, fine_steps),
            Err(LyacertError::ResonantLinear { .. })
        );

        return Ok((
            a_matrix,
            forcing,
            ResonanceDiagnostics {
                trace_minus_two: tr_star - 2.0,
                height: c_star,
                norm,
                norm_bound: gamma,
                fredholm_integral: fredholm,
                solve_reports_resonant,
            },
        ));
    }
    Err(LyacertError::WitnessNotFound(format!(
        "no admissible potential with multiplier 1 and ||a+||_{p_j} < {gamma} over the search grid (T = {period}); \
         this is a search failure, not a disproof"
    )))
}
