//! Nonlinear resonant periodic problems u'' + G_u(t,u) = h(t).
//!
//! The existence argument rests on the averaged Hessian
//! D(t,z) = int_0^1 G_uu(t, theta z) dtheta, which turns the equation into
//! the fixed point of y -> u_y, where u_y is the periodic solution of the
//! linear problem u'' + D(t, y(t)) u = h - G_u(t, 0). The solver iterates
//! that operator with damping; if it stalls, a Newton phase linearizes
//! about the current iterate instead. Convergence is always judged by the
//! grid residual, never by iteration counts.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{lyapunov_constant, Bc};
use crate::error::LyacertError;
use crate::exponent::PExponent;
use crate::linear_engine;
use crate::matrixfn::{MatrixFunction, VectorFunction};
use crate::numeric;

type GradFn = Arc<dyn Fn(f64, &DVector<f64>) -> DVector<f64> + Send + Sync>;
type HessFn = Arc<dyn Fn(f64, &DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// The data of u'' + G_u(t,u) = h: gradient and Hessian rules plus the
/// optional sandwich bounds A(t) <= G_uu(t,u) <= B(t) and norm exponents.
#[derive(Clone)]
pub struct NonlinearProblem {
    dim: usize,
    period: f64,
    grad: GradFn,
    hess: HessFn,
    bounds: Option<(MatrixFunction, MatrixFunction)>,
    exponents: Option<Vec<PExponent>>,
}

impl std::fmt::Debug for NonlinearProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "NonlinearProblem {{ dim: {}, period: {}, bounds: {}, exponents: {:?} }}",
            self.dim,
            self.period,
            self.bounds.is_some(),
            self.exponents
        )
    }
}

impl NonlinearProblem {
    /// Validates the rules at a handful of probe points: Hessian symmetry
    /// to 1e-10 and gradient/Hessian consistency by central differences.
    pub fn new<G, H>(dim: usize, period: f64, grad: G, hess: H) -> Result<NonlinearProblem, LyacertError>
    where
        G: Fn(f64, &DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        H: Fn(f64, &DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(LyacertError::Domain("dimension must be positive".into()));
        }
        if !(period > 0.0) || !period.is_finite() {
            return Err(LyacertError::Domain(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        let prob = NonlinearProblem {
            dim,
            period,
            grad: Arc::new(grad),
            hess: Arc::new(hess),
            bounds: None,
            exponents: None,
        };

        let mut probes = vec![DVector::zeros(dim)];
        for i in 0..dim {
            let mut e = DVector::zeros(dim);
            e[i] = 1.0;
            probes.push(e.clone());
            probes.push(e * -0.5);
        }
        for &t in &[0.0, 0.37 * period] {
            for u in &probes {
                let h = (prob.hess)(t, u);
                if h.nrows() != dim || h.ncols() != dim {
                    return Err(LyacertError::Domain("hess rule returns wrong shape".into()));
                }
                let scale = h.amax().max(1.0);
                let sym = (&h - h.transpose()).amax();
                if sym > 1e-10 * scale {
                    return Err(LyacertError::Domain(format!(
                        "hess(t={t}, ...) is not symmetric (defect {sym:.3e})"
                    )));
                }
                let eps = 1e-5;
                for j in 0..dim {
                    let mut up = u.clone();
                    let mut dn = u.clone();
                    up[j] += eps;
                    dn[j] -= eps;
                    let col = ((prob.grad)(t, &up) - (prob.grad)(t, &dn)) / (2.0 * eps);
                    let defect = (&col - h.column(j)).amax();
                    if defect > 1e-4 * scale {
                        return Err(LyacertError::Domain(format!(
                            "grad is inconsistent with hess at t={t}, column {j} (defect {defect:.3e})"
                        )));
                    }
                }
            }
        }
        Ok(prob)
    }

    pub fn with_bounds(mut self, a: MatrixFunction, b: MatrixFunction) -> Result<NonlinearProblem, LyacertError> {
        for (name, m) in [("A", &a), ("B", &b)] {
            if m.dim() != self.dim {
                return Err(LyacertError::Domain(format!(
                    "bound {name} has dimension {}, problem has {}",
                    m.dim(),
                    self.dim
                )));
            }
            if (m.period() - self.period).abs() > 1e-12 * self.period {
                return Err(LyacertError::Domain(format!("bound {name} has a different period")));
            }
        }
        self.bounds = Some((a, b));
        Ok(self)
    }

    pub fn with_exponents(mut self, exponents: Vec<PExponent>) -> Result<NonlinearProblem, LyacertError> {
        if exponents.len() != self.dim {
            return Err(LyacertError::Domain(format!(
                "need {} exponents, got {}",
                self.dim,
                exponents.len()
            )));
        }
        self.exponents = Some(exponents);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn grad_at(&self, t: f64, u: &DVector<f64>) -> DVector<f64> {
        (self.grad)(t, u)
    }

    pub fn hess_at(&self, t: f64, u: &DVector<f64>) -> DMatrix<f64> {
        (self.hess)(t, u)
    }

    pub fn bounds(&self) -> Option<&(MatrixFunction, MatrixFunction)> {
        self.bounds.as_ref()
    }

    pub fn exponents(&self) -> Option<&[PExponent]> {
        self.exponents.as_deref()
    }
}

/// A T-periodic vector function sampled on the uniform closed grid.
#[derive(Debug, Clone)]
pub struct PeriodicSolution {
    pub period: f64,
    pub times: Vec<f64>,
    pub samples: Vec<DVector<f64>>,
    pub derivative_samples: Vec<DVector<f64>>,
    pub residual_sup: f64,
    pub bc_mismatch: f64,
}

impl PeriodicSolution {
    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|v| v.amax()).fold(0.0f64, f64::max)
    }

    pub fn sup_distance(&self, other: &PeriodicSolution) -> f64 {
        assert_eq!(self.samples.len(), other.samples.len());
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).amax())
            .fold(0.0f64, f64::max)
    }

    /// Resamples onto a grid with `n` cells by componentwise periodic
    /// spline interpolation.
    pub fn resample(&self, n: usize) -> Result<PeriodicSolution, LyacertError> {
        let old_n = self.samples.len() - 1;
        let f = VectorFunction::from_samples(self.period, &self.samples[..old_n])?;
        let fd = VectorFunction::from_samples(self.period, &self.derivative_samples[..old_n])?;
        let h = self.period / n as f64;
        let times: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
        Ok(PeriodicSolution {
            period: self.period,
            samples: times.iter().map(|&t| f.eval(t)).collect(),
            derivative_samples: times.iter().map(|&t| fd.eval(t)).collect(),
            times,
            residual_sup: self.residual_sup,
            bc_mismatch: self.bc_mismatch,
        })
    }
}

/// Probe grid for the sampled hypothesis checks.
#[derive(Debug, Clone, Copy)]
pub struct ProbePlan {
    pub t_points: usize,
    pub u_points: usize,
    pub u_radius: f64,
}

impl Default for ProbePlan {
    fn default() -> Self {
        ProbePlan {
            t_points: 33,
            u_points: 16,
            u_radius: 4.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentNormCheck {
    pub component: usize,
    pub p: PExponent,
    pub norm: f64,
    pub beta: f64,
    pub margin: f64,
    pub strict: bool,
    pub ok: bool,
}

/// Sampled evidence for the existence hypotheses; `note` spells out
/// that probing is not a proof.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub sandwich_min_margin: f64,
    pub sandwich_ok: bool,
    pub mean_a_min_eigenvalue: f64,
    pub mean_positive_ok: bool,
    pub b_diagonal_defect: f64,
    pub b_diagonal_ok: bool,
    pub norm_checks: Vec<ComponentNormCheck>,
    pub norms_ok: bool,
    pub passed: bool,
    pub note: String,
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Checks A(t) <= G_uu(t,u) <= B(t) on a probe grid, positivity of the
/// mean of A, and the component norm bounds against the periodic
/// Lyapunov constants (strict for p in (1, inf], non-strict at p = 1).
pub fn check_t1_hypotheses(prob: &NonlinearProblem, plan: &ProbePlan) -> Result<HypothesisReport, LyacertError> {
    let (a, b) = prob
        .bounds()
        .ok_or_else(|| LyacertError::Precondition("hypothesis check needs sandwich bounds".into()))?;
    let exponents = prob
        .exponents()
        .ok_or_else(|| LyacertError::Precondition("hypothesis check needs norm exponents".into()))?;
    let n = prob.dim();
    let t = prob.period();

    let mut rng = ChaCha8Rng::seed_from_u64(0xa11c_e5ed);
    let mut u_probes = vec![DVector::zeros(n)];
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = plan.u_radius;
        u_probes.push(e);
    }
    while u_probes.len() < plan.u_points.max(2) {
        u_probes.push(DVector::from_fn(n, |_, _| rng.gen_range(-plan.u_radius..plan.u_radius)));
    }

    let mut sandwich_min_margin = f64::INFINITY;
    let mut b_diagonal_defect = 0.0f64;
    for k in 0..plan.t_points.max(2) {
        let tk = t * k as f64 / plan.t_points.max(2) as f64;
        let ak = a.eval(tk);
        let bk = b.eval(tk);
        let braw = b.eval_raw(tk);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    b_diagonal_defect = b_diagonal_defect.max(braw[(i, j)].abs());
                }
            }
        }
        for u in &u_probes {
            let h = prob.hess_at(tk, u);
            sandwich_min_margin = sandwich_min_margin
                .min(min_eigenvalue(&(&h - &ak)))
                .min(min_eigenvalue(&(&bk - &h)));
        }
    }
    let sandwich_ok = sandwich_min_margin >= -1e-9;
    let b_diagonal_ok = b_diagonal_defect <= 1e-12;

    let mean_a = a.mean(512);
    let mean_a_min_eigenvalue = min_eigenvalue(&mean_a);
    let mean_positive_ok = mean_a_min_eigenvalue > 1e-10;

    let grid = 4096usize;
    let h_grid = t / grid as f64;
    let mut norm_checks = Vec::with_capacity(n);
    for (i, p) in exponents.iter().enumerate() {
        let samples: Vec<f64> = (0..=grid).map(|k| b.eval(k as f64 * h_grid)[(i, i)]).collect();
        let norm = numeric::lp_norm_positive_part(h_grid, &samples, p);
        let beta = lyapunov_constant(Bc::Periodic, p, t)?.value;
        let margin = beta - norm;
        let strict = !matches!(p, PExponent::One);
        let ok = if strict {
            margin > 0.0
        } else {
            margin >= -1e-12 * beta
        };
        norm_checks.push(ComponentNormCheck {
            component: i,
            p: *p,
            norm,
            beta,
            margin,
            strict,
            ok,
        });
    }
    let norms_ok = norm_checks.iter().all(|c| c.ok);

    Ok(HypothesisReport {
        sandwich_min_margin,
        sandwich_ok,
        mean_a_min_eigenvalue,
        mean_positive_ok,
        b_diagonal_defect,
        b_diagonal_ok,
        norm_checks,
        norms_ok,
        passed: sandwich_ok && b_diagonal_ok && mean_positive_ok && norms_ok,
        note: "hypothesis checks are sampled evidence on a probe grid, not a proof".into(),
    })
}

/// D(t,z) = int_0^1 G_uu(t, theta z) dtheta by Gauss-Legendre in theta.
pub fn averaged_hessian(
    prob: &NonlinearProblem,
    t: f64,
    z: &DVector<f64>,
    quad_points: usize,
) -> Result<DMatrix<f64>, LyacertError> {
    if quad_points < 4 {
        return Err(LyacertError::Domain("averaged Hessian needs at least 4 quadrature points".into()));
    }
    let (nodes, weights) = numeric::gauss_legendre_unit(quad_points);
    let n = prob.dim();
    let mut acc = DMatrix::zeros(n, n);
    for (x, w) in nodes.iter().zip(&weights) {
        acc += prob.hess_at(t, &(z * *x)) * *w;
    }
    Ok(acc)
}

/// Grid residual sup_j |u''(t_j) + G_u(t_j, u_j) - h(t_j)| by centered
/// second differences with periodic wrap (a seam mismatch shows up in the
/// wrapped stencil).
pub fn residual(prob: &NonlinearProblem, forcing: &VectorFunction, u: &PeriodicSolution) -> f64 {
    let n_cells = u.samples.len() - 1;
    let h = u.period / n_cells as f64;
    let wrap = |j: isize| -> usize { j.rem_euclid(n_cells as isize) as usize };
    let mut sup = 0.0f64;
    for j in 0..n_cells {
        let i = j as isize;
        let t = u.times[j];
        // fourth order five point stencil so the estimator floor sits well
        // below the convergence tolerance
        let upp = (-&u.samples[wrap(i - 2)] + &u.samples[wrap(i - 1)] * 16.0
            - &u.samples[j] * 30.0
            + &u.samples[wrap(i + 1)] * 16.0
            - &u.samples[wrap(i + 2)])
            / (12.0 * h * h);
        let r = (upp + prob.grad_at(t, &u.samples[j]) - forcing.eval(t)).amax();
        sup = sup.max(r);
    }
    sup
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolvePhase {
    Picard,
    Newton,
}

/// Converged output of [`solve_resonant`], with the phase that finished
/// and the residual history.
#[derive(Debug, Clone)]
pub struct ResonantSolve {
    pub solution: PeriodicSolution,
    pub phase: SolvePhase,
    pub outer_iterations: usize,
    pub residual_history: Vec<f64>,
    /// Smallest eigenvalue margin of B - D and D - A seen along the
    /// iteration (negative means the sandwich was violated en route).
    pub sandwich_min_margin: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct ResonantOptions {
    pub tol: f64,
    pub max_outer: usize,
    pub steps: usize,
    pub quad_points: usize,
    /// Skip the hypothesis precondition; the result then carries a warning.
    pub skip_hypothesis_check: bool,
}

impl Default for ResonantOptions {
    fn default() -> Self {
        ResonantOptions {
            tol: 1e-6,
            max_outer: 40,
            steps: 2048,
            quad_points: 8,
            skip_hypothesis_check: false,
        }
    }
}

struct Iterate {
    samples: Vec<DVector<f64>>,
    derivative_samples: Vec<DVector<f64>>,
}

fn blend(a: &Iterate, b: &PeriodicSolution, rho: f64) -> Iterate {
    Iterate {
        samples: a
            .samples
            .iter()
            .zip(&b.samples)
            .map(|(x, y)| x * (1.0 - rho) + y * rho)
            .collect(),
        derivative_samples: a
            .derivative_samples
            .iter()
            .zip(&b.derivative_samples)
            .map(|(x, y)| x * (1.0 - rho) + y * rho)
            .collect(),
    }
}

fn iterate_residual(prob: &NonlinearProblem, forcing: &VectorFunction, it: &Iterate, times: &[f64]) -> f64 {
    let sol = PeriodicSolution {
        period: prob.period(),
        times: times.to_vec(),
        samples: it.samples.clone(),
        derivative_samples: it.derivative_samples.clone(),
        residual_sup: 0.0,
        bc_mismatch: 0.0,
    };
    residual(prob, forcing, &sol)
}

fn sup_step(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).amax()).fold(0.0f64, f64::max)
}

/// Solves u'' + G_u(t,u) = h by damped averaged-Hessian iteration with a
/// Newton fallback.
pub fn solve_resonant(
    prob: &NonlinearProblem,
    forcing: &VectorFunction,
    init: Option<&PeriodicSolution>,
    opts: &ResonantOptions,
) -> Result<ResonantSolve, LyacertError> {
    let n = prob.dim();
    let period = prob.period();
    if forcing.dim() != n {
        return Err(LyacertError::Domain(format!(
            "forcing has dimension {}, problem has {n}",
            forcing.dim()
        )));
    }
    if (forcing.period() - period).abs() > 1e-12 * period {
        return Err(LyacertError::Domain("forcing period differs from the problem period".into()));
    }

    let mut warnings = Vec::new();
    if opts.skip_hypothesis_check {
        warnings.push("hypothesis check skipped by caller; convergence is not guaranteed".into());
    } else {
        let report = check_t1_hypotheses(prob, &ProbePlan::default())?;
        if !report.passed {
            return Err(LyacertError::Precondition(format!(
                "hypothesis check failed (sandwich_ok={}, mean_positive_ok={}, b_diagonal_ok={}, norms_ok={})",
                report.sandwich_ok, report.mean_positive_ok, report.b_diagonal_ok, report.norms_ok
            )));
        }
    }

    let steps = opts.steps;
    let h_grid = period / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * h_grid).collect();
    let forcing_sup = (0..steps).map(|k| forcing.eval(times[k]).amax()).fold(0.0f64, f64::max);
    let bound_cap = 1e3 * (1.0 + forcing_sup);

    let grad0 = {
        let zero = DVector::zeros(n);
        let g = prob.clone();
        let f = forcing.clone();
        VectorFunction::from_fn(n, period, move |t| f.eval(t) - g.grad_at(t, &zero))?
    };

    let mut current = match init {
        Some(guess) => {
            let g = if guess.samples.len() - 1 == steps {
                guess.clone()
            } else {
                guess.resample(steps)?
            };
            Iterate {
                samples: g.samples,
                derivative_samples: g.derivative_samples,
            }
        }
        None => Iterate {
            samples: vec![DVector::zeros(n); steps + 1],
            derivative_samples: vec![DVector::zeros(n); steps + 1],
        },
    };
    let mut current_res = iterate_residual(prob, forcing, &current, &times);
    let mut history = vec![current_res];
    let mut sandwich_margin: Option<f64> = None;
    let mut rho = 1.0f64;
    let mut stagnation = 0usize;

    // averaged-Hessian phase
    let mut converged: Option<SolvePhase> = None;
    let mut outer = 0usize;
    while outer < opts.max_outer {
        outer += 1;
        let c_samples: Vec<DMatrix<f64>> = (0..steps)
            .into_par_iter()
            .map(|j| averaged_hessian(prob, times[j], &current.samples[j], opts.quad_points))
            .collect::<Result<_, _>>()?;
        if let Some((a, b)) = prob.bounds() {
            let m = c_samples
                .par_iter()
                .enumerate()
                .step_by(16)
                .map(|(j, d)| {
                    let tj = times[j];
                    min_eigenvalue(&(d - a.eval(tj))).min(min_eigenvalue(&(b.eval(tj) - d)))
                })
                .reduce(|| f64::INFINITY, f64::min);
            sandwich_margin = Some(sandwich_margin.map_or(m, |old| old.min(m)));
        }
        let c = MatrixFunction::from_samples(period, &c_samples)?;
        let fixed = linear_engine::solve_linear_periodic(&c, &grad0, steps).map_err(|e| match e {
            LyacertError::ResonantLinear { sigma_min, .. } => LyacertError::ResonantLinear {
                sigma_min,
                context: format!("averaged-Hessian iteration {outer}"),
            },
            other => other,
        })?;

        let mut trial = blend(&current, &fixed, rho);
        let mut trial_res = iterate_residual(prob, forcing, &trial, &times);
        while trial_res > current_res && rho > 1.0 / 16.0 + 1e-12 {
            rho = (rho / 2.0).max(1.0 / 16.0);
            trial = blend(&current, &fixed, rho);
            trial_res = iterate_residual(prob, forcing, &trial, &times);
        }
        let step = sup_step(&trial.samples, &current.samples);
        if trial_res > current_res {
            stagnation += 1;
        } else {
            stagnation = 0;
        }
        current = trial;
        current_res = trial_res;
        history.push(current_res);
        rho = (rho * 2.0).min(1.0);

        let iterate_sup = current.samples.iter().map(|v| v.amax()).fold(0.0f64, f64::max);
        if iterate_sup > bound_cap {
            return Err(LyacertError::NonConverged {
                context: format!("averaged-Hessian iterates unbounded (sup {iterate_sup:.3e})"),
                tail: history.iter().rev().take(8).cloned().collect(),
            });
        }
        if step < opts.tol && current_res < 10.0 * opts.tol {
            converged = Some(SolvePhase::Picard);
            break;
        }
        if stagnation >= 3 {
            break;
        }
    }

    // Newton phase on stagnation or exhaustion
    if converged.is_none() {
        for _ in 0..opts.max_outer {
            outer += 1;
            let c_samples: Vec<DMatrix<f64>> = (0..steps)
                .into_par_iter()
                .map(|j| {
                    let m = prob.hess_at(times[j], &current.samples[j]);
                    (&m + m.transpose()) * 0.5
                })
                .collect();
            let g_samples: Vec<DVector<f64>> = (0..steps)
                .map(|j| {
                    let tj = times[j];
                    forcing.eval(tj) - prob.grad_at(tj, &current.samples[j])
                        + &c_samples[j] * &current.samples[j]
                })
                .collect();
            let c = MatrixFunction::from_samples(period, &c_samples)?;
            let g = VectorFunction::from_samples(period, &g_samples)?;
            let proposal = linear_engine::solve_linear_periodic(&c, &g, steps).map_err(|e| match e {
                LyacertError::ResonantLinear { sigma_min, .. } => LyacertError::ResonantLinear {
                    sigma_min,
                    context: format!("Newton iteration {outer}"),
                },
                other => other,
            })?;

            let mut sigma = 1.0f64;
            let mut trial = blend(&current, &proposal, sigma);
            let mut trial_res = iterate_residual(prob, forcing, &trial, &times);
            for _ in 0..6 {
                if trial_res <= current_res {
                    break;
                }
                sigma *= 0.5;
                trial = blend(&current, &proposal, sigma);
                trial_res = iterate_residual(prob, forcing, &trial, &times);
            }
            let step = sup_step(&trial.samples, &current.samples);
            current = trial;
            current_res = trial_res;
            history.push(current_res);
            if step < opts.tol && current_res < 10.0 * opts.tol {
                converged = Some(SolvePhase::Newton);
                break;
            }
        }
    }

    let phase = converged.ok_or_else(|| LyacertError::NonConverged {
        context: format!("resonant solver stalled after {outer} outer iterations"),
        tail: history.iter().rev().take(8).cloned().collect(),
    })?;

    let bc_mismatch = {
        let du = (&current.samples[steps] - &current.samples[0]).amax();
        let dv = (&current.derivative_samples[steps] - &current.derivative_samples[0]).amax();
        du.max(dv)
    };
    let solution = PeriodicSolution {
        period,
        times,
        residual_sup: current_res,
        bc_mismatch,
        samples: current.samples,
        derivative_samples: current.derivative_samples,
    };
    Ok(ResonantSolve {
        solution,
        phase,
        outer_iterations: outer,
        residual_history: history,
        sandwich_min_margin: sandwich_margin,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const PI: f64 = std::f64::consts::PI;

    fn scalar_linear_problem(c: f64, period: f64) -> NonlinearProblem {
        NonlinearProblem::new(
            1,
            period,
            move |_t, u: &DVector<f64>| u * c,
            move |_t, _u: &DVector<f64>| DMatrix::from_element(1, 1, c),
        )
        .unwrap()
        .with_bounds(
            MatrixFunction::scalar(period, move |_| c).unwrap(),
            MatrixFunction::scalar(period, move |_| c).unwrap(),
        )
        .unwrap()
        .with_exponents(vec![PExponent::Infinity])
        .unwrap()
    }

    fn cos_forcing(period: f64) -> VectorFunction {
        VectorFunction::from_fn(1, period, |t| DVector::from_vec(vec![t.cos()])).unwrap()
    }

    #[test]
    fn averaged_hessian_constant_is_identity_map() {
        let prob = scalar_linear_problem(0.7, 2.0 * PI);
        let d = averaged_hessian(&prob, 0.3, &DVector::from_vec(vec![2.0]), 4).unwrap();
        assert_relative_eq!(d[(0, 0)], 0.7, max_relative = 1e-14);
    }

    #[test]
    fn averaged_hessian_cubic_gradient() {
        // G_u = u^3, G_uu = 3u^2: D(z) = z^2
        let prob = NonlinearProblem::new(
            1,
            1.0,
            |_t, u: &DVector<f64>| DVector::from_vec(vec![u[0].powi(3)]),
            |_t, u: &DVector<f64>| DMatrix::from_element(1, 1, 3.0 * u[0] * u[0]),
        )
        .unwrap();
        let z = DVector::from_vec(vec![1.7]);
        let d = averaged_hessian(&prob, 0.0, &z, 4).unwrap();
        assert_relative_eq!(d[(0, 0)], 1.7 * 1.7, max_relative = 1e-13);
    }

    #[test]
    fn averaged_hessian_ray_identity() {
        // D(t,z)z = G_u(t,z) - G_u(t,0) for a transcendental nonlinearity
        let prob = NonlinearProblem::new(
            2,
            1.0,
            |t: f64, u: &DVector<f64>| {
                DVector::from_vec(vec![u[0].tanh() + 0.3 * u[1] + t.cos(), 0.3 * u[0] + u[1].sin()])
            },
            |_t, u: &DVector<f64>| {
                DMatrix::from_row_slice(
                    2,
                    2,
                    &[1.0 / u[0].cosh().powi(2), 0.3, 0.3, u[1].cos()],
                )
            },
        )
        .unwrap();
        let z = DVector::from_vec(vec![0.8, -1.1]);
        let d = averaged_hessian(&prob, 0.4, &z, 16).unwrap();
        let lhs = &d * &z;
        let rhs = prob.grad_at(0.4, &z) - prob.grad_at(0.4, &DVector::zeros(2));
        assert!((lhs - rhs).amax() <= 1e-8);
    }

    #[test]
    fn problem_validation_rejects_inconsistent_gradient() {
        let bad = NonlinearProblem::new(
            1,
            1.0,
            |_t, u: &DVector<f64>| u * 2.0,
            |_t, _u: &DVector<f64>| DMatrix::from_element(1, 1, 3.0),
        );
        assert!(bad.is_err());
    }

    #[test]
    fn hypothesis_check_passes_classical_band() {
        // constant M with spectrum inside (0, 4 pi^2 / T^2), p = inf
        let t = 2.0 * PI;
        let prob = scalar_linear_problem(0.5, t);
        let report = check_t1_hypotheses(&prob, &ProbePlan::default()).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.norm_checks[0].strict);
    }

    #[test]
    fn hypothesis_check_fails_at_exact_boundary() {
        let t = 2.0 * PI;
        let beta = 4.0 * PI * PI / (t * t);
        let prob = scalar_linear_problem(beta, t);
        let report = check_t1_hypotheses(&prob, &ProbePlan::default()).unwrap();
        assert!(!report.passed);
        assert!(!report.norm_checks[0].ok);
    }

    #[test]
    fn hypothesis_check_requires_bounds() {
        let prob = NonlinearProblem::new(
            1,
            1.0,
            |_t, u: &DVector<f64>| u.clone(),
            |_t, _u: &DVector<f64>| DMatrix::identity(1, 1),
        )
        .unwrap();
        assert!(matches!(
            check_t1_hypotheses(&prob, &ProbePlan::default()),
            Err(LyacertError::Precondition(_))
        ));
    }

    #[test]
    fn residual_of_perturbed_solution_jumps() {
        let t = 2.0 * PI;
        let prob = scalar_linear_problem(0.5, t);
        let forcing = cos_forcing(t);
        let n = 256;
        let h = t / n as f64;
        let times: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
        let mut sol = PeriodicSolution {
            period: t,
            samples: times.iter().map(|&s| DVector::from_vec(vec![-2.0 * s.cos()])).collect(),
            derivative_samples: times.iter().map(|&s| DVector::from_vec(vec![2.0 * s.sin()])).collect(),
            times,
            residual_sup: 0.0,
            bc_mismatch: 0.0,
        };
        let base = residual(&prob, &forcing, &sol);
        assert!(base <= 1e-3, "discretization residual {base}");
        sol.samples[77][0] += 1e-3;
        let bumped = residual(&prob, &forcing, &sol);
        assert!(bumped > 0.5 * 1e-3 / (h * h));
    }

    #[test]
    fn solve_matches_closed_form_scalar() {
        let t = 2.0 * PI;
        let prob = scalar_linear_problem(0.5, t);
        let out = solve_resonant(&prob, &cos_forcing(t), None, &ResonantOptions::default()).unwrap();
        let sup_err = out
            .solution
            .times
            .iter()
            .zip(&out.solution.samples)
            .map(|(s, u)| (u[0] + 2.0 * s.cos()).abs())
            .fold(0.0f64, f64::max);
        assert!(sup_err < 1e-6, "sup error {sup_err}");
        assert!(out.solution.bc_mismatch <= 1e-6);
    }

    #[test]
    fn linear_case_converges_immediately() {
        let t = 2.0 * PI;
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.3]);
        let mc = m.clone();
        let prob = NonlinearProblem::new(
            2,
            t,
            move |_t, u: &DVector<f64>| &m * u,
            move |_t, _u: &DVector<f64>| mc.clone(),
        )
        .unwrap()
        .with_bounds(
            MatrixFunction::constant(t, DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.3])).unwrap(),
            MatrixFunction::constant(t, DMatrix::from_diagonal_element(2, 2, 0.61)).unwrap(),
        )
        .unwrap()
        .with_exponents(vec![PExponent::Infinity, PExponent::Infinity])
        .unwrap();
        let forcing = VectorFunction::from_fn(2, t, |s| DVector::from_vec(vec![s.cos(), (2.0 * s).sin()])).unwrap();
        let out = solve_resonant(&prob, &forcing, None, &ResonantOptions::default()).unwrap();
        assert!(out.outer_iterations <= 3);
        assert_eq!(out.phase, SolvePhase::Picard);

        let c = MatrixFunction::constant(t, DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.3])).unwrap();
        let direct = linear_engine::solve_linear_periodic(&c, &forcing, 2048).unwrap();
        assert!(out.solution.sup_distance(&direct) <= 1e-8);
    }

    fn bump_weight(t: f64) -> f64 {
        3.0 * (-((t - PI) / 0.25).powi(2)).exp()
    }

    fn example33_problem() -> NonlinearProblem {
        // G_u(t,u) = m(t) * 0.9 * (u + 0.1 sin u) / 1.1: sup of G_uu crosses
        // several antiperiodic eigenvalues but the L^1 norm stays small
        let t = 2.0 * PI;
        NonlinearProblem::new(
            1,
            t,
            |s: f64, u: &DVector<f64>| {
                DVector::from_vec(vec![bump_weight(s) * 0.9 * (u[0] + 0.1 * u[0].sin()) / 1.1])
            },
            |s: f64, u: &DVector<f64>| {
                DMatrix::from_element(1, 1, bump_weight(s) * 0.9 * (1.0 + 0.1 * u[0].cos()) / 1.1)
            },
        )
        .unwrap()
        .with_bounds(
            MatrixFunction::scalar(t, |s| bump_weight(s) * 0.9 * 0.9 / 1.1).unwrap(),
            MatrixFunction::scalar(t, |s| bump_weight(s) * 0.9).unwrap(),
        )
        .unwrap()
        .with_exponents(vec![PExponent::One])
        .unwrap()
    }

    fn sin_forcing(period: f64) -> VectorFunction {
        VectorFunction::from_fn(1, period, |t| DVector::from_vec(vec![t.sin()])).unwrap()
    }

    fn random_guess(period: f64, steps: usize, seed: u64) -> PeriodicSolution {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs: Vec<(f64, f64)> = (1..=3).map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
        let h = period / steps as f64;
        let times: Vec<f64> = (0..=steps).map(|k| k as f64 * h).collect();
        let omega = 2.0 * PI / period;
        let value = |t: f64| -> f64 {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let w = omega * (k as f64 + 1.0);
                    a * (w * t).cos() + b * (w * t).sin()
                })
                .sum()
        };
        let deriv = |t: f64| -> f64 {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let w = omega * (k as f64 + 1.0);
                    -a * w * (w * t).sin() + b * w * (w * t).cos()
                })
                .sum()
        };
        PeriodicSolution {
            period,
            samples: times.iter().map(|&t| DVector::from_vec(vec![value(t)])).collect(),
            derivative_samples: times.iter().map(|&t| DVector::from_vec(vec![deriv(t)])).collect(),
            times,
            residual_sup: f64::NAN,
            bc_mismatch: 0.0,
        }
    }

    #[test]
    fn example33_hypotheses_pass_and_solver_is_unique() {
        let prob = example33_problem();
        let t = prob.period();
        let b_sup = 0.9 * 3.0;
        assert!(b_sup > 0.25 && b_sup > 2.25, "sup must cross several antiperiodic eigenvalues");
        let report = check_t1_hypotheses(&prob, &ProbePlan::default()).unwrap();
        assert!(report.passed, "{report:?}");

        let forcing = sin_forcing(t);
        let opts = ResonantOptions::default();
        let base = solve_resonant(&prob, &forcing, None, &opts).unwrap();
        assert!(base.solution.residual_sup < 10.0 * opts.tol);
        assert!(base.sandwich_min_margin.unwrap() >= -1e-9);

        for seed in [7u64, 99] {
            let guess = random_guess(t, opts.steps, seed);
            let other = solve_resonant(&prob, &forcing, Some(&guess), &opts).unwrap();
            let d = base.solution.sup_distance(&other.solution);
            assert!(d < 1e-8, "solutions differ by {d} from seed {seed}");
        }
    }

    #[test]
    fn fixed_point_consistency_at_convergence() {
        let prob = example33_problem();
        let t = prob.period();
        let forcing = sin_forcing(t);
        let opts = ResonantOptions::default();
        let out = solve_resonant(&prob, &forcing, None, &opts).unwrap();

        // apply H once more at the converged iterate
        let steps = opts.steps;
        let h = t / steps as f64;
        let c_samples: Vec<DMatrix<f64>> = (0..steps)
            .map(|j| averaged_hessian(&prob, j as f64 * h, &out.solution.samples[j], opts.quad_points).unwrap())
            .collect();
        let c = MatrixFunction::from_samples(t, &c_samples).unwrap();
        let zero = DVector::zeros(1);
        let fclone = forcing.clone();
        let pclone = prob.clone();
        let g = VectorFunction::from_fn(1, t, move |s| fclone.eval(s) - pclone.grad_at(s, &zero)).unwrap();
        let fixed = linear_engine::solve_linear_periodic(&c, &g, steps).unwrap();
        assert!(out.solution.sup_distance(&fixed) <= 10.0 * opts.tol);
    }

    #[test]
    fn skipping_hypotheses_warns() {
        let t = 2.0 * PI;
        let prob = NonlinearProblem::new(
            1,
            t,
            |_t, u: &DVector<f64>| u * 0.5,
            |_t, _u: &DVector<f64>| DMatrix::from_element(1, 1, 0.5),
        )
        .unwrap();
        let opts = ResonantOptions {
            skip_hypothesis_check: true,
            ..ResonantOptions::default()
        };
        let out = solve_resonant(&prob, &cos_forcing(t), None, &opts).unwrap();
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn resonant_inner_solve_is_reported() {
        // G_uu = 1 is resonant at T = 2 pi; hypotheses rightly fail, so skip
        let t = 2.0 * PI;
        let prob = NonlinearProblem::new(
            1,
            t,
            |_t, u: &DVector<f64>| u.clone(),
            |_t, _u: &DVector<f64>| DMatrix::identity(1, 1),
        )
        .unwrap();
        let opts = ResonantOptions {
            skip_hypothesis_check: true,
            ..ResonantOptions::default()
        };
        match solve_resonant(&prob, &cos_forcing(t), None, &opts) {
            Err(LyacertError::ResonantLinear { context, .. }) => {
                assert!(context.contains("iteration"));
            }
            other => panic!("expected ResonantLinear, got {other:?}"),
        }
    }
}
