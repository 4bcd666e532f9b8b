//! End-to-end acceptance checks, one test per criterion. Each prints a
//! single PASS line with its timing; tolerances are asserted, not logged.

use lyacert::certifier::{
    certify_2d_example, certify_krein, certify_thm41, check_lambda_membership,
    instability_witness, resonance_witness, CertificateMethod,
};
use lyacert::constants::{extremal_function, lyapunov_constant, Bc};
use lyacert::linear_engine::{
    self, floquet, lambda1_shooting, monodromy, rayleigh_lambda1, solve_linear_periodic,
    StabilityVerdict,
};
use lyacert::matrixfn::{MatrixFunction, VectorFunction};
use lyacert::problem::ProblemSpec;
use lyacert::resonant::{
    check_t1_hypotheses, solve_resonant, NonlinearProblem, PeriodicSolution, ProbePlan,
    ResonantOptions,
};
use lyacert::variational::{functional_ip, minimize_ip};
use lyacert::{LyacertError, PExponent};
use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::time::Instant;

const PI: f64 = std::f64::consts::PI;

fn spec_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/specs")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn finish(criterion: &str, budget_s: f64, start: Instant) {
    let elapsed = start.elapsed().as_secs_f64();
    println!("criterion {criterion}: PASS in {elapsed:.2}s (budget {budget_s}s)");
    assert!(
        elapsed <= budget_s,
        "criterion {criterion} exceeded its {budget_s}s budget: {elapsed:.2}s"
    );
}

#[test]
fn criterion_01_closed_form_constants() {
    let start = Instant::now();
    for t in [0.5, 1.0, 2.0 * PI] {
        let cases = [
            (Bc::Periodic, PExponent::One, 16.0 / t),
            (Bc::Periodic, PExponent::Infinity, 4.0 * PI * PI / (t * t)),
            (Bc::Antiperiodic, PExponent::One, 4.0 / t),
            (Bc::Antiperiodic, PExponent::Infinity, PI * PI / (t * t)),
        ];
        for (bc, p, want) in cases {
            let got = lyapunov_constant(bc, &p, t).unwrap().value;
            assert!(
                rel(got, want) <= 1e-12,
                "beta({bc:?}, {p}, T={t}) = {got}, want {want}"
            );
        }
    }
    finish("01 closed-form constants", 1.0, start);
}

#[test]
fn criterion_02_quarter_and_scaling_laws() {
    let start = Instant::now();
    let exponents: Vec<PExponent> = ["1", "1.5", "2", "3", "10", "inf"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let t = 1.3;
    let c = 2.0;
    for p in &exponents {
        let per = lyapunov_constant(Bc::Periodic, p, t).unwrap().value;
        let ant = lyapunov_constant(Bc::Antiperiodic, p, t).unwrap().value;
        assert!(rel(ant, per / 4.0) <= 1e-12, "quarter law fails at p = {p}");
        for bc in [Bc::Periodic, Bc::Antiperiodic] {
            let base = lyapunov_constant(bc, p, t).unwrap().value;
            let scaled = lyapunov_constant(bc, p, c * t).unwrap().value;
            let want = c.powf(p.one_over_p() - 2.0) * base;
            assert!(
                rel(scaled, want) <= 1e-12,
                "scaling law fails at bc = {bc:?}, p = {p}"
            );
        }
    }
    finish("02 quarter and scaling laws", 1.0, start);
}

#[test]
fn criterion_03_variational_reproduction() {
    let start = Instant::now();
    for bc in [Bc::Periodic, Bc::Antiperiodic] {
        for s in ["1", "2", "inf"] {
            let p: PExponent = s.parse().unwrap();
            let closed = lyapunov_constant(bc, &p, 1.0).unwrap().value;
            let run = minimize_ip(bc, &p, 1.0, 2048, 2).unwrap();
            assert!(
                rel(run.value, closed) <= 1e-2,
                "minimization off by more than 1% at bc = {bc:?}, p = {s}: {} vs {closed}",
                run.value
            );
        }
    }
    finish("03 variational reproduction", 120.0, start);
}

#[test]
fn criterion_04_extremal_exactness() {
    let start = Instant::now();
    let t = 2.0 * PI;
    let tri = extremal_function(Bc::Periodic, &PExponent::One, t, 1024).unwrap();
    let got = functional_ip(Bc::Periodic, &PExponent::One, &tri).unwrap();
    assert!(rel(got, 16.0 / t) <= 1e-12, "I_1_per(triangle) = {got}");
    let lin = extremal_function(Bc::Antiperiodic, &PExponent::One, t, 1024).unwrap();
    let got = functional_ip(Bc::Antiperiodic, &PExponent::One, &lin).unwrap();
    assert!(rel(got, 4.0 / t) <= 1e-12, "I_1_ant(T/2 - x) = {got}");
    finish("04 extremal exactness", 1.0, start);
}

#[test]
fn criterion_05_lambda1_analytic() {
    let start = Instant::now();
    let c = 2.2;
    let t = 1.7;
    let want = PI * PI / (c * t * t);
    for n in [1usize, 2, 3] {
        let q = MatrixFunction::constant(t, DMatrix::from_diagonal_element(n, n, c)).unwrap();
        let report = lambda1_shooting(&q, 4096).unwrap();
        assert!(
            rel(report.lambda1, want) <= 1e-8,
            "shooting lambda1 = {} at n = {n}, want {want}",
            report.lambda1
        );
        let rayleigh = rayleigh_lambda1(&q, 512).unwrap();
        assert!(
            rel(1.0 / rayleigh, 1.0 / want) <= 1e-3,
            "rayleigh 1/lambda1 = {} at n = {n}, want {}",
            1.0 / rayleigh,
            1.0 / want
        );
    }
    finish("05 lambda1 analytic", 30.0, start);
}

fn corpus_potential(rng: &mut ChaCha8Rng, index: usize) -> MatrixFunction {
    let n = 1 + index % 3;
    let period = [1.0, 2.0 * PI, 3.4][index % 3];
    let kind = (index / 3) % 3;
    let sym = |amp: f64, rng: &mut ChaCha8Rng| -> DMatrix<f64> {
        let raw = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-amp..amp));
        (&raw + raw.transpose()) * 0.5
    };
    match kind {
        0 => {
            let base = sym(0.8, rng) + DMatrix::identity(n, n) * rng.gen_range(0.1..0.8);
            MatrixFunction::constant(period, base).unwrap()
        }
        1 => {
            let base = sym(0.5, rng) + DMatrix::identity(n, n) * rng.gen_range(0.1..0.6);
            let c1 = sym(0.4, rng);
            let s1 = sym(0.4, rng);
            let c2 = sym(0.2, rng);
            let w = 2.0 * PI / period;
            MatrixFunction::from_fn(n, period, move |t| {
                &base + &c1 * (w * t).cos() + &s1 * (w * t).sin() + &c2 * (2.0 * w * t).cos()
            })
            .unwrap()
        }
        _ => {
            let base = sym(0.3, rng) + DMatrix::identity(n, n) * rng.gen_range(0.05..0.5);
            let bump = sym(0.8, rng);
            let center = rng.gen_range(0.3..0.7) * period;
            let width = rng.gen_range(0.05..0.15) * period;
            MatrixFunction::from_fn(n, period, move |t| {
                // periodized gaussian bump, three images are plenty at these widths
                let mut g = 0.0;
                for k in [-1.0f64, 0.0, 1.0] {
                    let d = (t - center + k * period) / width;
                    g += (-d * d).exp();
                }
                &base + &bump * g
            })
            .unwrap()
        }
    }
}

#[test]
fn criterion_06_monodromy_invariants() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d6f6e6f);
    for index in 0..50 {
        let q = corpus_potential(&mut rng, index);
        let m = monodromy(&q, 4096).unwrap();
        let det = m.determinant();
        assert!(
            (det - 1.0).abs() <= 1e-8,
            "monodromy determinant defect {:.3e} at corpus index {index}",
            (det - 1.0).abs()
        );
        let eigs: Vec<Complex<f64>> = m.complex_eigenvalues().iter().cloned().collect();
        for &l in &eigs {
            let target = l.inv();
            let nearest = eigs
                .iter()
                .map(|&m| (m - target).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(
                nearest / target.norm().max(1.0) <= 1e-6,
                "multiplier {l} lacks a reciprocal partner at corpus index {index}"
            );
        }
    }
    finish("06 monodromy invariants", 120.0, start);
}

fn random_lambda_member(rng: &mut ChaCha8Rng) -> MatrixFunction {
    loop {
        let period = if rng.gen_bool(0.5) { 1.0 } else { 2.0 * PI };
        let sym = |amp: f64, rng: &mut ChaCha8Rng| -> DMatrix<f64> {
            let raw = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-amp..amp));
            (&raw + raw.transpose()) * 0.5
        };
        let scale = 1.0 / (period * period);
        let base = sym(0.4 * scale, rng) + DMatrix::identity(2, 2) * rng.gen_range(0.05..1.2) * scale;
        let c1 = sym(0.6 * scale, rng);
        let s1 = sym(0.6 * scale, rng);
        let w = 2.0 * PI / period;
        let q = MatrixFunction::from_fn(2, period, move |t| {
            &base + &c1 * (w * t).cos() + &s1 * (w * t).sin()
        })
        .unwrap();
        if check_lambda_membership(&q, 256, 1e-9).member() {
            return q;
        }
    }
}

#[test]
fn criterion_07_certifier_soundness_sweep() {
    let start = Instant::now();
    let mut instances: Vec<(String, MatrixFunction)> = Vec::new();
    let t = 2.0 * PI;
    for i in 0..20 {
        for j in 0..20 {
            let delta = 0.02 + 0.58 * i as f64 / 19.0;
            let epsilon = 0.57 * j as f64 / 19.0;
            let q = MatrixFunction::from_fn(1, t, move |s| {
                DMatrix::from_element(1, 1, delta + epsilon * s.cos())
            })
            .unwrap();
            instances.push((format!("mathieu d={delta:.3} e={epsilon:.3}"), q));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x736f756e);
    for k in 0..30 {
        instances.push((format!("random 2x2 #{k}"), random_lambda_member(&mut rng)));
    }

    let mut certified = 0usize;
    let mut majorant_certified = 0usize;
    for (name, q) in &instances {
        if !check_lambda_membership(q, 256, 1e-9).member() {
            continue;
        }
        let mut certs = vec![certify_thm41(q, None, None).unwrap()];
        if q.dim() == 2 {
            if let Ok(c) = certify_2d_example(q, &PExponent::Infinity, &PExponent::Infinity) {
                certs.push(c);
            }
        }
        certs.push(certify_krein(q, 1024).unwrap());
        let any_certified = certs.iter().any(|c| c.certified());
        if any_certified {
            certified += 1;
            let verdict = floquet(q, 4096).unwrap().verdict;
            assert!(
                verdict == StabilityVerdict::BoundedStable,
                "{name}: certified but Floquet verdict is {verdict}"
            );
        }
        for c in &certs {
            if c.certified() && c.method == CertificateMethod::LpMajorant {
                majorant_certified += 1;
                let lambda1 = lambda1_shooting(q, 2048).unwrap().lambda1;
                assert!(
                    lambda1 > 1.0 + 1e-8,
                    "{name}: LP_MAJORANT certified but lambda1 = {lambda1}"
                );
                break;
            }
        }
    }
    assert!(certified >= 40, "sweep too degenerate: only {certified} certified instances");
    assert!(majorant_certified >= 20, "only {majorant_certified} majorant certificates");
    finish("07 certifier soundness sweep", 300.0, start);
}

#[test]
fn criterion_08_resonant_analytic_and_linear() {
    let start = Instant::now();

    let spec = ProblemSpec::from_path(&spec_dir().join("resonant_cosine.json")).unwrap();
    let prob = spec.nonlinear().unwrap();
    let h = spec.forcing_vector().unwrap();
    let opts = ResonantOptions { tol: 1e-9, ..ResonantOptions::default() };
    let run = solve_resonant(&prob, &h, None, &opts).unwrap();
    let mut err = 0.0f64;
    for (t, u) in run.solution.times.iter().zip(&run.solution.samples) {
        err = err.max((u[0] + 2.0 * t.cos()).abs());
    }
    assert!(err < 1e-6, "analytic case sup error {err:.3e}");

    // linear SPD case through the nonlinear iteration vs the direct solve
    let t = 1.0;
    let w = 2.0 * PI;
    let q = MatrixFunction::from_fn(2, t, move |s| {
        DMatrix::from_row_slice(
            2,
            2,
            &[
                0.6 + 0.2 * (w * s).cos(),
                0.1 * (w * s).sin(),
                0.1 * (w * s).sin(),
                0.5 + 0.15 * (w * s).sin(),
            ],
        )
    })
    .unwrap();
    let h = VectorFunction::from_fn(2, t, move |s| {
        DVector::from_vec(vec![(w * s).cos(), 0.3 - 0.2 * (w * s).sin()])
    })
    .unwrap();
    let steps = 2048;
    let direct = solve_linear_periodic(&q, &h, steps).unwrap();
    let ql = q.clone();
    let qh = q.clone();
    let prob = NonlinearProblem::new(
        2,
        t,
        move |s, u: &DVector<f64>| ql.eval(s) * u,
        move |s, _u: &DVector<f64>| qh.eval(s),
    )
    .unwrap();
    let opts = ResonantOptions {
        tol: 1e-9,
        steps,
        skip_hypothesis_check: true,
        ..ResonantOptions::default()
    };
    let run = solve_resonant(&prob, &h, None, &opts).unwrap();
    let gap = run.solution.sup_distance(&direct);
    assert!(gap <= 1e-8, "nonlinear path disagrees with direct solve by {gap:.3e}");

    finish("08 resonant analytic and linear", 10.0, start);
}

fn random_start(dim: usize, period: f64, steps: usize, amplitude: f64, seed: u64) -> PeriodicSolution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = period / steps as f64;
    let coeffs: Vec<[f64; 4]> = (0..dim)
        .map(|_| {
            [
                rng.gen_range(-amplitude..amplitude),
                rng.gen_range(-amplitude..amplitude),
                rng.gen_range(-amplitude..amplitude),
                rng.gen_range(-amplitude..amplitude),
            ]
        })
        .collect();
    let w = 2.0 * PI / period;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * h).collect();
    let samples: Vec<DVector<f64>> = times
        .iter()
        .map(|&t| {
            DVector::from_fn(dim, |i, _| {
                let c = &coeffs[i];
                c[0] + c[1] * (w * t).cos() + c[2] * (w * t).sin() + c[3] * (2.0 * w * t).cos()
            })
        })
        .collect();
    PeriodicSolution {
        period,
        times,
        derivative_samples: vec![DVector::zeros(dim); steps + 1],
        samples,
        residual_sup: f64::INFINITY,
        bc_mismatch: 0.0,
    }
}

fn uniqueness_case(prob: &NonlinearProblem, h: &VectorFunction, opts: &ResonantOptions, name: &str) {
    let hyp = check_t1_hypotheses(prob, &ProbePlan::default()).unwrap();
    assert!(hyp.passed, "{name}: hypotheses should pass");
    let mut solutions = Vec::new();
    for seed in 0..5u64 {
        let init = random_start(prob.dim(), prob.period(), opts.steps, 2.5, 1000 + seed);
        let run = solve_resonant(prob, h, Some(&init), opts).unwrap();
        solutions.push(run.solution);
    }
    for i in 0..solutions.len() {
        for j in i + 1..solutions.len() {
            let gap = solutions[i].sup_distance(&solutions[j]);
            assert!(
                gap <= 1e-6,
                "{name}: starts {i} and {j} disagree by {gap:.3e}"
            );
        }
    }
}

#[test]
fn criterion_09_uniqueness_probe() {
    let start = Instant::now();
    let opts = ResonantOptions { tol: 1e-9, ..ResonantOptions::default() };

    for file in ["bump_crossing.json", "resonant_cosine.json"] {
        let spec = ProblemSpec::from_path(&spec_dir().join(file)).unwrap();
        let prob = spec.nonlinear().unwrap();
        let h = spec.forcing_vector().unwrap();
        if file == "bump_crossing.json" {
            // the shipped bump must straddle the eigenvalues 0, 1, 4 of the
            // T = 2pi string in sup norm while its L1 budget passes
            let (_, hi) = prob.bounds().expect("bump spec carries bounds");
            let sup = measured_norm(hi, 0, &PExponent::Infinity, 4096);
            let l1 = measured_norm(hi, 0, &PExponent::One, 4096);
            assert!(sup > 4.0, "bump sup {sup:.3} should exceed 4");
            assert!(l1 < 16.0 / prob.period(), "bump L1 {l1:.3} should clear the budget");
        }
        uniqueness_case(&prob, &h, &opts, file);
    }

    // saturating nonlinearity under a trig weight
    let t = 2.0 * PI;
    let weight = |s: f64| 0.3 + 0.2 * s.cos();
    let prob = NonlinearProblem::new(
        1,
        t,
        move |s, u: &DVector<f64>| {
            DVector::from_vec(vec![weight(s) * 0.8 * (u[0] + 0.3 * u[0].sin()) / 1.3])
        },
        move |s, u: &DVector<f64>| {
            DMatrix::from_element(1, 1, weight(s) * 0.8 * (1.0 + 0.3 * u[0].cos()) / 1.3)
        },
    )
    .unwrap()
    .with_bounds(
        MatrixFunction::from_fn(1, t, move |s| {
            DMatrix::from_element(1, 1, weight(s) * 0.8 * 0.7 / 1.3)
        })
        .unwrap(),
        MatrixFunction::from_fn(1, t, move |s| DMatrix::from_element(1, 1, weight(s) * 0.8)).unwrap(),
    )
    .unwrap()
    .with_exponents(vec![PExponent::Infinity])
    .unwrap();
    let h = VectorFunction::from_fn(1, t, |s| DVector::from_vec(vec![0.4 * s.cos() + 0.1])).unwrap();
    uniqueness_case(&prob, &h, &opts, "saturating sine, trig weight");

    // two bumps inside one period
    let two_bump = move |s: f64| {
        let d1 = (s - 0.25 * t) / 0.3;
        let d2 = (s - 0.7 * t) / 0.25;
        2.8 * (-d1 * d1).exp() + 2.2 * (-d2 * d2).exp()
    };
    let prob = NonlinearProblem::new(
        1,
        t,
        move |s, u: &DVector<f64>| {
            DVector::from_vec(vec![two_bump(s) * 0.95 * (u[0] + 0.05 * u[0].sin()) / 1.05])
        },
        move |s, u: &DVector<f64>| {
            DMatrix::from_element(1, 1, two_bump(s) * 0.95 * (1.0 + 0.05 * u[0].cos()) / 1.05)
        },
    )
    .unwrap()
    .with_bounds(
        MatrixFunction::from_fn(1, t, move |s| {
            DMatrix::from_element(1, 1, two_bump(s) * 0.95 * 0.9 / 1.05)
        })
        .unwrap(),
        MatrixFunction::from_fn(1, t, move |s| DMatrix::from_element(1, 1, two_bump(s) * 0.95)).unwrap(),
    )
    .unwrap()
    .with_exponents(vec![PExponent::One])
    .unwrap();
    let h = VectorFunction::from_fn(1, t, |s| DVector::from_vec(vec![0.2 * (2.0 * s).sin()])).unwrap();
    uniqueness_case(&prob, &h, &opts, "two bumps, p = 1");

    // weakly coupled planar system
    let t2 = 1.0;
    let w = 2.0 * PI;
    let qfun = move |s: f64| {
        DMatrix::from_row_slice(
            2,
            2,
            &[
                0.8 + 0.3 * (w * s).cos(),
                0.05,
                0.05,
                0.6 + 0.2 * (w * s).sin(),
            ],
        )
    };
    let eps = 0.05;
    let prob = NonlinearProblem::new(
        2,
        t2,
        move |s, u: &DVector<f64>| {
            qfun(s) * u + DVector::from_vec(vec![eps * u[0].sin(), eps * u[1].sin()])
        },
        move |s, u: &DVector<f64>| {
            qfun(s) + DMatrix::from_diagonal(&DVector::from_vec(vec![
                eps * u[0].cos(),
                eps * u[1].cos(),
            ]))
        },
    )
    .unwrap()
    .with_bounds(
        // surplus 0.06 on each diagonal entry dominates the 0.05 coupling,
        // keeping both sandwich gaps positive semidefinite
        MatrixFunction::from_fn(2, t2, move |s| {
            let q = qfun(s);
            DMatrix::from_diagonal(&DVector::from_vec(vec![
                q[(0, 0)] - eps - 0.06,
                q[(1, 1)] - eps - 0.06,
            ]))
        })
        .unwrap(),
        MatrixFunction::from_fn(2, t2, move |s| {
            let q = qfun(s);
            DMatrix::from_diagonal(&DVector::from_vec(vec![
                q[(0, 0)] + eps + 0.06,
                q[(1, 1)] + eps + 0.06,
            ]))
        })
        .unwrap(),
    )
    .unwrap()
    .with_exponents(vec![PExponent::Infinity, PExponent::Infinity])
    .unwrap();
    let h = VectorFunction::from_fn(2, t2, move |s| {
        DVector::from_vec(vec![0.5 * (w * s).cos(), 0.2 * (w * s).sin() - 0.1])
    })
    .unwrap();
    uniqueness_case(&prob, &h, &opts, "coupled planar system");

    finish("09 uniqueness probe", 180.0, start);
}

fn measured_norm(q: &MatrixFunction, component: usize, p: &PExponent, samples: usize) -> f64 {
    let t = q.period();
    let h = t / samples as f64;
    match p {
        PExponent::Infinity => (0..samples)
            .map(|k| q.eval(k as f64 * h)[(component, component)].max(0.0))
            .fold(0.0f64, f64::max),
        PExponent::One => {
            // trapezoid on the positive part
            (0..samples)
                .map(|k| {
                    let a = q.eval(k as f64 * h)[(component, component)].max(0.0);
                    let b = q.eval((k + 1) as f64 * h)[(component, component)].max(0.0);
                    0.5 * (a + b) * h
                })
                .sum()
        }
        PExponent::Finite(pv) => (0..samples)
            .map(|k| {
                let a = q.eval(k as f64 * h)[(component, component)].max(0.0).powf(*pv);
                let b = q
                    .eval((k + 1) as f64 * h)[(component, component)]
                    .max(0.0)
                    .powf(*pv);
                0.5 * (a + b) * h
            })
            .sum::<f64>()
            .powf(1.0 / pv),
    }
}

#[test]
fn criterion_10_witness_closed_loops() {
    let start = Instant::now();

    // instability witnesses: p = 1 scalar, p = inf scalar, and a 2d budget
    let cases: Vec<(Vec<f64>, usize, PExponent, f64)> = vec![
        (vec![5.0], 0, PExponent::One, 1.0),
        (vec![1.2 * PI * PI], 0, PExponent::Infinity, 1.0),
        (vec![5.5, 4.8], 1, PExponent::One, 1.0),
    ];
    for (gammas, j, p, period) in cases {
        let (q, report) = instability_witness(&gammas, j, &p, period).unwrap();
        assert_eq!(report.verdict, StabilityVerdict::Unbounded);
        let top = report
            .multipliers
            .iter()
            .map(|(re, im)| (re * re + im * im).sqrt())
            .fold(0.0f64, f64::max);
        assert!(top - 1.0 > 1e-3, "multiplier margin {:.3e} too small", top - 1.0);
        for (i, g) in gammas.iter().enumerate() {
            let norm = measured_norm(&q, i, &p, 16384);
            assert!(
                norm < *g,
                "component {i}: re-measured norm {norm} not below gamma {g}"
            );
        }
    }

    // resonance witnesses: the emitted pair defeats the inner linear solver
    for (gammas, j, p) in [
        (vec![20.0], 0usize, PExponent::One),
        (vec![1.3 * 4.0 * PI * PI], 0, PExponent::Infinity),
    ] {
        let (q, h, diag) = resonance_witness(&gammas, j, &p, 1.0).unwrap();
        assert!(diag.solve_reports_resonant);
        let norm = measured_norm(&q, j, &p, 16384);
        assert!(norm < gammas[j], "re-measured norm {norm} not below {}", gammas[j]);
        match solve_linear_periodic(&q, &h, linear_engine::DEFAULT_STEPS) {
            Err(LyacertError::ResonantLinear { .. }) => {}
            other => panic!("expected ResonantLinear from the inner solver, got {other:?}"),
        }
    }

    finish("10 witness closed loops", 120.0, start);
}
