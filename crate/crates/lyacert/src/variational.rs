//! Direct minimization of the Lyapunov quotient functionals over
//! discretized constraint sets, reproducing the closed-form constants
//! independently.
//!
//! Functions live on a uniform closed grid x_j = jT/N with a periodic or
//! antiperiodic endpoint identification, interpreted as piecewise linear.
//! The Dirichlet energy uses forward differences on cells, which makes the
//! p = 1 triangle-wave value exact; all integrals are composite trapezoid
//! pinned to the same grid.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::Bc;
use crate::error::LyacertError;
use crate::exponent::PExponent;
use crate::numeric;

/// Endpoint identification of a grid function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryTag {
    Periodic,
    Antiperiodic,
}

impl BoundaryTag {
    /// Sign σ in the identification v(T) = σ·v(0).
    pub fn sigma(&self) -> f64 {
        match self {
            BoundaryTag::Periodic => 1.0,
            BoundaryTag::Antiperiodic => -1.0,
        }
    }

    pub fn matches(&self, bc: Bc) -> bool {
        matches!(
            (self, bc),
            (BoundaryTag::Periodic, Bc::Periodic) | (BoundaryTag::Antiperiodic, Bc::Antiperiodic)
        )
    }
}

/// A sampled function on the uniform closed grid over [0, T].
#[derive(Debug, Clone, Serialize)]
pub struct GridFunction {
    period: f64,
    samples: Vec<f64>,
    tag: BoundaryTag,
}

impl GridFunction {
    /// Wraps samples of length N+1. The endpoint pair must already satisfy
    /// the tag's identification up to roundoff; it is then snapped exact.
    pub fn new(period: f64, mut samples: Vec<f64>, tag: BoundaryTag) -> Result<Self, LyacertError> {
        if !(period > 0.0) {
            return Err(LyacertError::Domain(format!(
                "period must be positive, got {period}"
            )));
        }
        if samples.len() < 9 {
            return Err(LyacertError::Domain(
                "grid function needs at least 8 cells".into(),
            ));
        }
        let n = samples.len() - 1;
        let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let mismatch = (samples[n] - tag.sigma() * samples[0]).abs();
        if mismatch > 1e-6 * scale {
            return Err(LyacertError::Domain(format!(
                "samples violate the {tag:?} endpoint identification (mismatch {mismatch:.3e})"
            )));
        }
        samples[n] = tag.sigma() * samples[0];
        Ok(GridFunction {
            period,
            samples,
            tag,
        })
    }

    /// Builds the closed grid from the N free values v_0..v_{N-1}.
    pub fn from_free(period: f64, free: Vec<f64>, tag: BoundaryTag) -> Result<Self, LyacertError> {
        let mut samples = free;
        let wrap = tag.sigma() * samples[0];
        samples.push(wrap);
        GridFunction::new(period, samples, tag)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn tag(&self) -> BoundaryTag {
        self.tag
    }

    /// Closed sample vector of length N+1.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn n_cells(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn h(&self) -> f64 {
        self.period / self.n_cells() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn is_zero(&self) -> bool {
        self.max_abs() == 0.0
    }

    fn shifted(&self, k: f64) -> GridFunction {
        let samples = self.samples.iter().map(|v| v + k).collect();
        GridFunction {
            period: self.period,
            samples,
            tag: self.tag,
        }
    }
}

/// Outcome of one functional minimization.
#[derive(Debug, Clone, Serialize)]
pub struct MinimizationResult {
    pub value: f64,
    pub minimizer: GridFunction,
    pub iterations: usize,
    /// Scaled residual of the p-dependent membership constraint.
    pub constraint_residual: f64,
    pub converged: bool,
}

/// The quotient functional I_p: Dirichlet energy over the p-dependent
/// denominator ‖v‖_∞² (p = 1), ‖v‖²_{L^q} with q = 2p/(p−1) (1 < p < ∞),
/// or ∫v² (p = ∞).
pub fn functional_ip(bc: Bc, p: &PExponent, v: &GridFunction) -> Result<f64, LyacertError> {
    if !v.tag().matches(bc) {
        return Err(LyacertError::Domain(format!(
            "grid function tag {:?} does not match boundary condition {bc}",
            v.tag()
        )));
    }
    if v.is_zero() {
        return Err(LyacertError::UndefinedQuotient(
            "functional evaluated on the zero function".into(),
        ));
    }
    let den = denominator(p, v);
    if den == 0.0 {
        return Err(LyacertError::UndefinedQuotient(
            "denominator vanished on a nonzero function".into(),
        ));
    }
    Ok(dirichlet_energy(v) / den)
}

fn dirichlet_energy(v: &GridFunction) -> f64 {
    let s = v.samples();
    let mut e = 0.0;
    for j in 0..v.n_cells() {
        let d = s[j + 1] - s[j];
        e += d * d;
    }
    e / v.h()
}

fn denominator(p: &PExponent, v: &GridFunction) -> f64 {
    match p {
        PExponent::One => {
            let m = v.max_abs();
            m * m
        }
        PExponent::Infinity => {
            let sq: Vec<f64> = v.samples().iter().map(|x| x * x).collect();
            numeric::trapezoid(v.h(), &sq)
        }
        PExponent::Finite(p) => {
            let q = 2.0 * p / (p - 1.0);
            let pow: Vec<f64> = v.samples().iter().map(|x| x.abs().powf(q)).collect();
            numeric::trapezoid(v.h(), &pow).powf(2.0 / q)
        }
    }
}

/// Shifts a periodic grid function by the constant putting it in X_p:
/// max + min = 0 for p = 1, zero mean for p = ∞, and the root of the
/// strictly increasing map k ↦ ∫|v+k|^{2/(p−1)}(v+k) for finite p, found
/// inside the bracket [−max v, −min v] to 1e−12 (scaled) on the integral.
pub fn project_to_xp(p: &PExponent, v: &GridFunction) -> Result<GridFunction, LyacertError> {
    if v.tag() != BoundaryTag::Periodic {
        return Err(LyacertError::Domain(
            "projection applies to periodic grid functions only".into(),
        ));
    }
    let s = v.samples();
    let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if max - min <= 1e-14 * max.abs().max(min.abs()).max(1e-300) {
        return Err(LyacertError::Degenerate(
            "cannot project an identically constant function".into(),
        ));
    }
    let k = match p {
        PExponent::One => -(max + min) / 2.0,
        PExponent::Infinity => {
            let mean = numeric::trapezoid(v.h(), s) / v.period();
            -mean
        }
        PExponent::Finite(p) => find_constraint_shift(*p, v, -max, -min)?,
    };
    Ok(v.shifted(k))
}

/// Signed constraint integral ∫|v+k|^{2/(p−1)}(v+k) and the even companion
/// ∫|v+k|^{2/(p−1)+1} used as its natural scale.
fn constraint_integrals(p: f64, v: &GridFunction, k: f64) -> (f64, f64) {
    let e = 2.0 / (p - 1.0);
    let odd: Vec<f64> = v
        .samples()
        .iter()
        .map(|x| {
            let y = x + k;
            y.abs().powf(e) * y
        })
        .collect();
    let even: Vec<f64> = v
        .samples()
        .iter()
        .map(|x| (x + k).abs().powf(e + 1.0))
        .collect();
    (
        numeric::trapezoid(v.h(), &odd),
        numeric::trapezoid(v.h(), &even),
    )
}

/// Root of the constraint map by bisection, accelerated with safeguarded
/// Newton steps (the derivative is (2/(p−1)+1)·∫|v+k|^{2/(p−1)} > 0).
fn find_constraint_shift(p: f64, v: &GridFunction, mut lo: f64, mut hi: f64) -> Result<f64, LyacertError> {
    let e = 2.0 / (p - 1.0);
    let mut k = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (g, scale) = constraint_integrals(p, v, k);
        if g.abs() <= 1e-12 * scale.max(1e-300) {
            return Ok(k);
        }
        if g > 0.0 {
            hi = k;
        } else {
            lo = k;
        }
        let dg: f64 = (e + 1.0)
            * numeric::trapezoid(
                v.h(),
                &v.samples()
                    .iter()
                    .map(|x| (x + k).abs().powf(e))
                    .collect::<Vec<_>>(),
            );
        let newton = k - g / dg;
        k = if dg.is_finite() && dg > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(k)
}

fn normalize_denominator(p: &PExponent, v: &GridFunction) -> GridFunction {
    let scale = match p {
        PExponent::One => v.max_abs(),
        PExponent::Infinity => denominator(p, v).sqrt(),
        PExponent::Finite(_) => denominator(p, v).sqrt(),
    };
    let samples = v.samples().iter().map(|x| x / scale).collect();
    GridFunction {
        period: v.period(),
        samples,
        tag: v.tag(),
    }
}

fn enforce_constraints(bc: Bc, p: &PExponent, v: &GridFunction) -> Result<GridFunction, LyacertError> {
    let projected = match bc {
        Bc::Periodic => project_to_xp(p, v)?,
        Bc::Antiperiodic => v.clone(),
    };
    Ok(normalize_denominator(p, &projected))
}

/// Subgradient of the denominator with respect to the free values.
fn denominator_gradient(p: &PExponent, v: &GridFunction) -> Vec<f64> {
    let n = v.n_cells();
    let s = &v.samples()[..n];
    let h = v.h();
    match p {
        PExponent::One => {
            let m = v.max_abs();
            let cutoff = m * (1.0 - 1e-6);
            let active: Vec<usize> = (0..n).filter(|&j| s[j].abs() >= cutoff).collect();
            let w = 2.0 * m / active.len() as f64;
            let mut g = vec![0.0; n];
            for j in active {
                g[j] = w * s[j].signum();
            }
            g
        }
        PExponent::Infinity => s.iter().map(|x| 2.0 * h * x).collect(),
        PExponent::Finite(p) => {
            let q = 2.0 * p / (p - 1.0);
            let lq = denominator(&PExponent::Finite(*p), v).powf(1.0 - q / 2.0);
            // d/dv_j (int |v|^q)^(2/q) = 2 h |v_j|^(q-1) sign(v_j) * (int)^(2/q - 1)
            s.iter()
                .map(|x| 2.0 * h * x.abs().powf(q - 1.0) * x.signum() * lq)
                .collect()
        }
    }
}

fn energy_gradient(v: &GridFunction) -> Vec<f64> {
    let n = v.n_cells();
    let s = &v.samples()[..n];
    let sigma = v.tag().sigma();
    let h = v.h();
    let mut g = vec![0.0; n];
    for j in 0..n {
        let prev = if j == 0 { sigma * s[n - 1] } else { s[j - 1] };
        let next = if j == n - 1 { sigma * s[0] } else { s[j + 1] };
        g[j] = 2.0 / h * (2.0 * s[j] - prev - next);
    }
    g
}

/// One projected, preconditioned descent run from a given start.
fn descend(
    bc: Bc,
    p: &PExponent,
    start: GridFunction,
    max_iters: usize,
) -> Result<MinimizationResult, LyacertError> {
    let n = start.n_cells();
    let sigma = start.tag().sigma();
    let mut v = enforce_constraints(bc, p, &start)?;
    let mut value = functional_ip(bc, p, &v)?;
    let mut alpha = 1e-2;
    let mut history = vec![value];
    let mut iterations = 0;
    let delta = if sigma > 0.0 { 1e-8 } else { 1e-12 };
    let diag = vec![2.0 + delta; n];

    while iterations < max_iters {
        iterations += 1;
        let ge = energy_gradient(&v);
        let gd = denominator_gradient(p, &v);
        let den = denominator(p, &v);
        let mut grad: Vec<f64> = ge
            .iter()
            .zip(&gd)
            .map(|(e, d)| (e - value * d) / den)
            .collect();
        if sigma > 0.0 {
            let mean = grad.iter().sum::<f64>() / n as f64;
            for g in &mut grad {
                *g -= mean;
            }
        }
        let precond = numeric::cyclic_tridiagonal_solve(&diag, -1.0, -sigma, &grad);

        let mut improved = false;
        'directions: for dir in [&precond, &grad] {
            let mut a = alpha * 4.0;
            for _ in 0..50 {
                let free: Vec<f64> = v.samples()[..n]
                    .iter()
                    .zip(dir.iter())
                    .map(|(x, d)| x - a * d)
                    .collect();
                if let Ok(candidate) = GridFunction::from_free(v.period(), free, v.tag())
                    .and_then(|c| enforce_constraints(bc, p, &c))
                {
                    if let Ok(cand_value) = functional_ip(bc, p, &candidate) {
                        if cand_value < value {
                            v = candidate;
                            value = cand_value;
                            alpha = a;
                            improved = true;
                            break 'directions;
                        }
                    }
                }
                a *= 0.5;
            }
        }
        history.push(value);
        if history.len() > 50 {
            let old = history[history.len() - 51];
            if old - value < 1e-10 * value {
                break;
            }
        }
        if !improved {
            break;
        }
    }

    let last = history.len().min(51);
    let settled =
        iterations < max_iters || history[history.len() - last] - value < 1e-8 * value;
    let constraint_residual = match (bc, p) {
        (Bc::Antiperiodic, _) => 0.0,
        (Bc::Periodic, PExponent::One) => {
            let s = v.samples();
            let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
            (max + min).abs() / v.max_abs()
        }
        (Bc::Periodic, PExponent::Infinity) => {
            let mean = numeric::trapezoid(v.h(), v.samples()) / v.period();
            mean.abs() / v.max_abs()
        }
        (Bc::Periodic, PExponent::Finite(p)) => {
            let (g, scale) = constraint_integrals(*p, &v, 0.0);
            g.abs() / scale.max(1e-300)
        }
    };
    Ok(MinimizationResult {
        value,
        minimizer: v,
        iterations,
        constraint_residual,
        converged: settled,
    })
}

fn deterministic_seed(bc: Bc, period: f64, n: usize) -> GridFunction {
    let h = period / n as f64;
    let (tag, omega) = match bc {
        Bc::Periodic => (BoundaryTag::Periodic, 2.0 * std::f64::consts::PI / period),
        Bc::Antiperiodic => (BoundaryTag::Antiperiodic, std::f64::consts::PI / period),
    };
    let samples: Vec<f64> = (0..=n).map(|j| (omega * j as f64 * h).cos()).collect();
    GridFunction::new(period, samples, tag).expect("cosine seed is tag-consistent")
}

fn random_seed(bc: Bc, period: f64, n: usize, index: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4c59_0000 ^ index);
    let h = period / n as f64;
    let pi = std::f64::consts::PI;
    let coeffs: Vec<(f64, f64)> = (0..4).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let (tag, freq): (BoundaryTag, Box<dyn Fn(usize) -> f64>) = match bc {
        Bc::Periodic => (
            BoundaryTag::Periodic,
            Box::new(move |k| 2.0 * pi * (k as f64 + 1.0) / period),
        ),
        // odd harmonics only, so every term is antiperiodic
        Bc::Antiperiodic => (
            BoundaryTag::Antiperiodic,
            Box::new(move |k| (2.0 * k as f64 + 1.0) * pi / period),
        ),
    };
    let samples: Vec<f64> = (0..=n)
        .map(|j| {
            let x = j as f64 * h;
            coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let w = freq(k);
                    a * (w * x).cos() + b * (w * x).sin()
                })
                .sum()
        })
        .collect();
    GridFunction::new(period, samples, tag).expect("trigonometric seed is tag-consistent")
}

/// Minimizes I_p over the discretized constraint set by multi-start
/// projected descent: the deterministic cosine seed plus `seeds` random
/// trigonometric starts, reduced by best value (ties to the lower start
/// index).
pub fn minimize_ip(
    bc: Bc,
    p: &PExponent,
    period: f64,
    n: usize,
    seeds: usize,
) -> Result<MinimizationResult, LyacertError> {
    if n < 64 {
        return Err(LyacertError::Domain(format!(
            "minimization grid needs at least 64 cells, got {n}"
        )));
    }
    if seeds < 1 {
        return Err(LyacertError::Domain("seeds must be at least 1".into()));
    }
    if !(period > 0.0) {
        return Err(LyacertError::Domain(format!(
            "period must be positive, got {period}"
        )));
    }
    let starts: Vec<GridFunction> = std::iter::once(deterministic_seed(bc, period, n))
        .chain((0..seeds).map(|i| random_seed(bc, period, n, i as u64)))
        .collect();
    let runs: Vec<(usize, Result<MinimizationResult, LyacertError>)> = starts
        .into_par_iter()
        .enumerate()
        .map(|(i, s)| (i, descend(bc, p, s, 100_000)))
        .collect();
    let mut best: Option<(usize, MinimizationResult)> = None;
    for (i, run) in runs {
        let run = run?;
        best = match best {
            None => Some((i, run)),
            Some((bi, b)) => {
                if run.value < b.value {
                    Some((i, run))
                } else {
                    Some((bi, b))
                }
            }
        };
    }
    Ok(best.expect("at least one start").1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{extremal_function, lyapunov_constant};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const PI: f64 = std::f64::consts::PI;

    fn beta(bc: Bc, p: PExponent, t: f64) -> f64 {
        lyapunov_constant(bc, &p, t).unwrap().value
    }

    fn cosine(period: f64, n: usize, freq: f64, phase: f64, offset: f64, tag: BoundaryTag) -> GridFunction {
        let h = period / n as f64;
        let samples = (0..=n)
            .map(|j| (freq * j as f64 * h + phase).cos() + offset)
            .collect();
        GridFunction::new(period, samples, tag).unwrap()
    }

    #[test]
    fn functional_on_triangle_wave_is_exact() {
        let w = extremal_function(Bc::Periodic, &PExponent::One, 4.0, 512).unwrap();
        assert_relative_eq!(
            functional_ip(Bc::Periodic, &PExponent::One, &w).unwrap(),
            4.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn functional_on_antiperiodic_cosine() {
        let t = 1.0;
        let v = cosine(t, 2048, PI / t, 0.0, 0.0, BoundaryTag::Antiperiodic);
        let val = functional_ip(Bc::Antiperiodic, &PExponent::Infinity, &v).unwrap();
        assert_relative_eq!(val, PI * PI, max_relative = 1e-4);
    }

    #[test]
    fn functional_rejects_zero_and_mismatched_tag() {
        let z = GridFunction::new(1.0, vec![0.0; 65], BoundaryTag::Periodic).unwrap();
        assert!(matches!(
            functional_ip(Bc::Periodic, &PExponent::One, &z),
            Err(LyacertError::UndefinedQuotient(_))
        ));
        let v = cosine(1.0, 64, 2.0 * PI, 0.0, 0.0, BoundaryTag::Periodic);
        assert!(functional_ip(Bc::Antiperiodic, &PExponent::One, &v).is_err());
    }

    #[test]
    fn projection_shifts() {
        let t = 1.0;
        // p = inf: mean removal
        let v = cosine(t, 512, 2.0 * PI, 0.3, 5.0, BoundaryTag::Periodic);
        let proj = project_to_xp(&PExponent::Infinity, &v).unwrap();
        let mean = numeric::trapezoid(proj.h(), proj.samples()) / t;
        assert!(mean.abs() < 1e-12);

        // p = 1: max + min = 0
        let h = t / 512.0;
        let samples: Vec<f64> = (0..=512)
            .map(|j| 2.0 + (2.0 * PI * j as f64 * h).sin())
            .collect();
        let v = GridFunction::new(t, samples, BoundaryTag::Periodic).unwrap();
        let proj = project_to_xp(&PExponent::One, &v).unwrap();
        let max = proj.samples().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = proj.samples().iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((max + min).abs() < 1e-12);
    }

    #[test]
    fn projection_solves_cubic_constraint() {
        // sign-asymmetric bump; verify the constraint integral directly
        let t = 1.0;
        let n = 1024;
        let h = t / n as f64;
        let samples: Vec<f64> = (0..=n)
            .map(|j| {
                let x = j as f64 * h;
                (2.0 * PI * x).sin() + 0.6 * (4.0 * PI * x).cos()
            })
            .collect();
        let v = GridFunction::new(t, samples, BoundaryTag::Periodic).unwrap();
        let proj = project_to_xp(&PExponent::Finite(2.0), &v).unwrap();
        let (g, scale) = constraint_integrals(2.0, &proj, 0.0);
        assert!(g.abs() <= 1e-10 * scale, "constraint residual {g:.3e} vs scale {scale:.3e}");
    }

    #[test]
    fn projection_rejects_constant() {
        let v = GridFunction::new(1.0, vec![2.0; 65], BoundaryTag::Periodic).unwrap();
        assert!(matches!(
            project_to_xp(&PExponent::One, &v),
            Err(LyacertError::Degenerate(_))
        ));
    }

    #[test]
    fn lower_bound_soundness_shifted_cosine() {
        let t = 1.0;
        let n = 2048;
        let v = cosine(t, n, 2.0 * PI / t, 0.0, 0.3, BoundaryTag::Periodic);
        let proj = project_to_xp(&PExponent::Finite(2.0), &v).unwrap();
        let val = functional_ip(Bc::Periodic, &PExponent::Finite(2.0), &proj).unwrap();
        let target = beta(Bc::Periodic, PExponent::Finite(2.0), t);
        assert!(val >= target * (1.0 - 2.0 / n as f64), "{val} vs {target}");
    }

    fn check_minimize(bc: Bc, p: PExponent, t: f64, n: usize, seeds: usize, rel_tol: f64) {
        let result = minimize_ip(bc, &p, t, n, seeds).unwrap();
        let target = beta(bc, p, t);
        assert!(
            (result.value - target).abs() <= rel_tol * target,
            "bc={bc} p={p} T={t}: got {} want {target} ({} iters, converged={})",
            result.value,
            result.iterations,
            result.converged
        );
        assert!(result.value > 0.0);
        assert!(result.constraint_residual <= 1e-8);
    }

    #[test]
    fn minimize_periodic_p1() {
        check_minimize(Bc::Periodic, PExponent::One, 4.0, 512, 2, 0.02);
    }

    #[test]
    fn minimize_antiperiodic_pinf() {
        check_minimize(Bc::Antiperiodic, PExponent::Infinity, 1.0, 512, 2, 0.01);
    }

    #[test]
    fn minimize_periodic_p2() {
        check_minimize(Bc::Periodic, PExponent::Finite(2.0), 1.0, 512, 2, 0.01);
    }

    #[test]
    fn minimize_antiperiodic_p2() {
        check_minimize(Bc::Antiperiodic, PExponent::Finite(2.0), 1.0, 512, 2, 0.01);
    }

    #[test]
    fn euler_equation_residual_p2() {
        // u'' + A_p |u|^{2/(p-1)} u = 0 with A_p = m_p under unit L^q mass
        let n = 512;
        let t = 1.0;
        let result = minimize_ip(Bc::Periodic, &PExponent::Finite(2.0), t, n, 2).unwrap();
        let u = result.minimizer.samples();
        let h = result.minimizer.h();
        let a_p = result.value; // normalization keeps int |u|^q = 1
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 1..n {
            let upp = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (h * h);
            let term = a_p * u[j].abs().powf(2.0) * u[j];
            num += (upp + term) * (upp + term);
            den += upp * upp;
        }
        let rel = (num / den).sqrt();
        assert!(rel <= 50.0 / n as f64, "relative Euler residual {rel}");
    }

    #[test]
    fn euler_equation_residual_pinf() {
        let n = 512;
        let t = 1.0;
        let result = minimize_ip(Bc::Antiperiodic, &PExponent::Infinity, t, n, 2).unwrap();
        let u = result.minimizer.samples();
        let h = result.minimizer.h();
        let lambda = result.value;
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 1..n {
            let upp = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (h * h);
            num += (upp + lambda * u[j]) * (upp + lambda * u[j]);
            den += upp * upp;
        }
        let rel = (num / den).sqrt();
        assert!(rel <= 50.0 / n as f64, "relative Euler residual {rel}");
    }

    /// Best cyclic-shift/sign/scale alignment distance to a reference family.
    fn family_distance(v: &GridFunction, family: impl Fn(usize) -> Vec<f64>) -> f64 {
        let n = v.n_cells();
        let scale = v.max_abs();
        let mut best = f64::INFINITY;
        for shift in 0..n {
            let w = family(shift);
            for sign in [1.0, -1.0] {
                let d = (0..n)
                    .map(|j| (sign * v.samples()[j] / scale - w[j]).abs())
                    .fold(0.0f64, f64::max);
                best = best.min(d);
            }
        }
        best
    }

    #[test]
    fn minimizer_rigidity_p1_periodic() {
        let n = 256;
        let t = 4.0;
        let result = minimize_ip(Bc::Periodic, &PExponent::One, t, n, 2).unwrap();
        let h = t / n as f64;
        let triangle = |shift: usize| -> Vec<f64> {
            (0..n)
                .map(|j| {
                    let x = (((j + shift) % n) as f64) * h;
                    let w = if x <= t / 4.0 {
                        x
                    } else if x <= 3.0 * t / 4.0 {
                        t / 2.0 - x
                    } else {
                        x - t
                    };
                    w / (t / 4.0)
                })
                .collect()
        };
        let dist = family_distance(&result.minimizer, triangle);
        assert!(dist <= 10.0 / n as f64, "distance to triangle family: {dist}");
    }

    #[test]
    fn minimizer_rigidity_p1_antiperiodic() {
        let n = 256;
        let t = 2.0;
        let result = minimize_ip(Bc::Antiperiodic, &PExponent::One, t, n, 2).unwrap();
        let h = t / n as f64;
        // the family c(T/2 - |x - x0|) continued antiperiodically
        let tent = |shift: usize| -> Vec<f64> {
            (0..n)
                .map(|j| {
                    let x = (((j + shift) % (2 * n)) as f64) * h;
                    let xm = x.rem_euclid(2.0 * t);
                    let w = if xm <= t {
                        t / 2.0 - xm
                    } else {
                        xm - 3.0 * t / 2.0
                    };
                    w / (t / 2.0)
                })
                .collect()
        };
        let n2 = 2 * n;
        let mut best = f64::INFINITY;
        let scale = result.minimizer.max_abs();
        for shift in 0..n2 {
            let w = tent(shift);
            let d = (0..n)
                .map(|j| (result.minimizer.samples()[j] / scale - w[j]).abs())
                .fold(0.0f64, f64::max);
            best = best.min(d);
        }
        assert!(best <= 10.0 / n as f64, "distance to tent family: {best}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn functional_is_zero_homogeneous(
            c in prop_oneof![(-100.0f64..-0.01), (0.01f64..100.0)],
            phase in 0.0f64..6.28,
            p in prop_oneof![
                Just(PExponent::One),
                Just(PExponent::Finite(2.0)),
                Just(PExponent::Finite(3.5)),
                Just(PExponent::Infinity)
            ],
        ) {
            let t = 1.0;
            let v = cosine(t, 256, 2.0 * PI, phase, 0.0, BoundaryTag::Periodic);
            let scaled_samples: Vec<f64> = v.samples().iter().map(|x| c * x).collect();
            let scaled = GridFunction::new(t, scaled_samples, BoundaryTag::Periodic).unwrap();
            let a = functional_ip(Bc::Periodic, &p, &v).unwrap();
            let b = functional_ip(Bc::Periodic, &p, &scaled).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs());
        }
    }
}
