//! Command-line surface. Every capability has a subcommand; reports are
//! deterministic for fixed inputs, machine output is CSV, and exit codes
//! follow the convention 0 success/certified, 1 inconclusive or
//! hypothesis failure, 2 numerically unstable, 64 usage error.

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::certifier::{self, Certificate, CertificateVerdict};
use crate::constants::{lyapunov_constant, Bc};
use crate::error::LyacertError;
use crate::exponent::PExponent;
use crate::linear_engine::{self, FloquetReport, StabilityVerdict};
use crate::matrixfn::MatrixFunction;
use crate::problem::{ProblemKind, ProblemSpec};
use crate::report::{fmt_float, Csv, Report};
use crate::resonant::{self, PeriodicSolution, ResonantOptions};
use crate::variational;

#[derive(Parser)]
#[command(
    name = "lyacert",
    version,
    about = "Best Lyapunov constants, stable-boundedness certificates, and resonant periodic solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate Lyapunov constants with quarter-law and scaling checks
    Constants(ConstantsArgs),
    /// Certify stable boundedness of a linear periodic system
    Certify(CertifyArgs),
    /// First antiperiodic weighted eigenvalue, shooting vs Rayleigh
    Eig(SpecArgs),
    /// Floquet multipliers and stability verdict
    Floquet(SpecArgs),
    /// Solve a resonant nonlinear periodic problem
    Solve(SolveArgs),
    /// Emit an optimality witness as a runnable problem file
    Witness(WitnessArgs),
    /// Evaluate a parameter grid of problems concurrently
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ConstantsArgs {
    /// Comma-separated exponents, e.g. "1,2,inf"
    #[arg(long, short)]
    p: String,
    /// Period T
    #[arg(long, short = 'T', default_value_t = 1.0)]
    period: f64,
    /// Comma-separated boundary conditions from {per, ant}
    #[arg(long, default_value = "per,ant")]
    bc: String,
    /// Cross-check each row against the direct variational minimizer (slow)
    #[arg(long)]
    variational: bool,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpecArgs {
    /// Problem file (JSON)
    spec: PathBuf,
    /// Emit the report as JSON instead of text
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CertifyArgs {
    /// Problem file (JSON), kind linear_system
    spec: PathBuf,
    /// Certificate route
    #[arg(long, default_value = "auto")]
    method: String,
    /// Cross-check the verdict against the Floquet oracle
    #[arg(long)]
    floquet_check: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SolveArgs {
    /// Problem file (JSON), kind nonlinear_system
    spec: PathBuf,
    /// Proceed despite a failing hypothesis check (flagged in the report)
    #[arg(long)]
    force: bool,
    /// Where to write the solution CSV
    #[arg(long, default_value = "solution.csv")]
    out: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct WitnessArgs {
    /// Witness kind: instability | resonance
    #[arg(long)]
    kind: Option<String>,
    /// Comma-separated norm budgets, one per component
    #[arg(long)]
    gammas: Option<String>,
    /// 1-based component index carrying the witness
    #[arg(long, default_value_t = 1)]
    component: usize,
    /// Exponent for the witnessed component
    #[arg(long)]
    p: Option<String>,
    /// Period T
    #[arg(long, short = 'T')]
    period: Option<f64>,
    /// Read kind/gammas/component/p/period from a witness_query file instead
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Where to write the generated problem file
    #[arg(long, default_value = "witness.json")]
    out: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Template problem file with {name} placeholders
    #[arg(long)]
    template: PathBuf,
    /// Repeatable grid axis "name=start:stop:count" (inclusive linspace)
    #[arg(long = "param")]
    params: Vec<String>,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprint!("{e}");
            return 64;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<i32, LyacertError> {
    match cli.command {
        Command::Constants(args) => cmd_constants(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Eig(args) => cmd_eig(args),
        Command::Floquet(args) => cmd_floquet(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Witness(args) => cmd_witness(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn parse_list<T, F>(text: &str, what: &str, parse: F) -> Result<Vec<T>, LyacertError>
where
    F: Fn(&str) -> Result<T, LyacertError>,
{
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(LyacertError::Usage(format!("empty {what} list")));
    }
    items.into_iter().map(parse).collect()
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), LyacertError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn spec_steps(spec: &ProblemSpec) -> Result<usize, LyacertError> {
    match spec.tolerances.as_ref().and_then(|t| t.steps) {
        Some(s) => Ok(s),
        None => linear_engine::default_steps(),
    }
}

fn load_kind(path: &Path, kind: ProblemKind) -> Result<ProblemSpec, LyacertError> {
    let spec = ProblemSpec::from_path(path)?;
    if spec.kind != kind {
        return Err(LyacertError::Usage(format!(
            "{} has kind {}, expected {}",
            path.display(),
            spec.kind,
            kind
        )));
    }
    Ok(spec)
}

fn cmd_constants(args: ConstantsArgs) -> Result<i32, LyacertError> {
    let ps = parse_list(&args.p, "exponent", |s| s.parse::<PExponent>())?;
    let bcs = parse_list(&args.bc, "boundary condition", |s| s.parse::<Bc>())?;
    if !(args.period > 0.0) {
        return Err(LyacertError::Usage(format!("period must be positive, got {}", args.period)));
    }
    let t = args.period;
    let mut csv = Csv::new(&[
        "bc",
        "p",
        "T",
        "beta",
        "per_ant_ratio",
        "scaling_defect",
        "beta_variational",
        "rel_diff",
    ]);
    for p in &ps {
        for bc in &bcs {
            let beta = lyapunov_constant(*bc, p, t)?.value;
            let ratio = lyapunov_constant(Bc::Periodic, p, t)?.value
                / lyapunov_constant(Bc::Antiperiodic, p, t)?.value;
            // the T-scaling law checked against a doubled period
            let scaled = lyapunov_constant(*bc, p, 2.0 * t)?.value;
            let predicted = 2.0f64.powf(p.one_over_p() - 2.0) * beta;
            let scaling_defect = (scaled - predicted).abs() / beta;
            let (bvar, rel) = if args.variational {
                let r = variational::minimize_ip(*bc, p, t, 1024, 2)?;
                (fmt_float(r.value), fmt_float((r.value - beta).abs() / beta))
            } else {
                (String::new(), String::new())
            };
            csv.push_row(vec![
                bc.to_string(),
                p.to_string(),
                fmt_float(t),
                fmt_float(beta),
                fmt_float(ratio),
                fmt_float(scaling_defect),
                bvar,
                rel,
            ]);
        }
    }
    emit(args.out.as_deref(), &csv.finish())?;
    Ok(0)
}

fn echo_input(report: &mut Report, path: &Path, spec: &ProblemSpec) {
    report.section("input");
    report.field("file", path.display());
    report.field("kind", spec.kind.to_string());
    if let Some(n) = spec.dim {
        report.field("dim", n);
    }
    if let Some(t) = spec.period {
        report.float("period", t);
    }
    if let Some(c) = &spec.comment {
        report.field("comment", c);
    }
}

fn render_membership(report: &mut Report, mem: &certifier::LambdaMembership) {
    report.section("admissibility");
    report.field("symmetric_ok", mem.symmetric_ok);
    report.field("mean_psd_ok", mem.mean_psd_ok);
    report.float("mean_min_eigenvalue", mem.mean_min_eigenvalue);
    report.field("no_constant_solutions_ok", mem.no_constant_solutions_ok);
    report.field("common_kernel_dim", mem.common_kernel_dim);
}

fn render_certificate(report: &mut Report, cert: &Certificate) {
    report.section(&format!("certificate ({})", cert.method));
    report.field("verdict", cert.verdict);
    for (i, p) in cert.exponents.iter().enumerate() {
        report.field(&format!("exponent_{}", i + 1), p);
    }
    for (i, v) in cert.norms.iter().enumerate() {
        report.float(&format!("norm_{}", i + 1), *v);
    }
    for (i, v) in cert.constants.iter().enumerate() {
        report.float(&format!("beta_ant_{}", i + 1), *v);
    }
    for (i, v) in cert.margins.iter().enumerate() {
        report.float(&format!("margin_{}", i + 1), *v);
    }
    if let Some(l) = cert.lambda1 {
        report.float("lambda1", l);
    }
    if let Some(g) = cert.gamma {
        report.float("gamma", g);
    }
    for note in &cert.notes {
        report.line(format!("note: {note}"));
    }
}

fn render_floquet(report: &mut Report, fr: &FloquetReport) {
    report.section("floquet");
    report.field("steps", fr.steps);
    report.float("determinant", fr.determinant);
    report.float("determinant_defect", fr.determinant_defect);
    report.float("unit_circle_margin", fr.unit_circle_margin);
    report.float("min_pairwise_separation", fr.min_pairwise_separation);
    for (i, (re, im)) in fr.multipliers.iter().enumerate() {
        report.field(
            &format!("multiplier_{}", i + 1),
            format!("{} {:+}i  |.| = {}", fmt_float(*re), im, fmt_float((re * re + im * im).sqrt())),
        );
    }
    report.field("verdict", fr.verdict);
}

fn print_report(report: &Report, json: bool) {
    if json {
        println!("{}", report.to_json());
    } else {
        print!("{report}");
    }
}

fn cmd_certify(args: CertifyArgs) -> Result<i32, LyacertError> {
    let spec = load_kind(&args.spec, ProblemKind::LinearSystem)?;
    let q = spec.matrix()?;
    let steps = spec_steps(&spec)?;
    let mut report = Report::new("lyacert certify");
    echo_input(&mut report, &args.spec, &spec);

    let mem = certifier::check_lambda_membership(&q, 512, 1e-9);
    render_membership(&mut report, &mem);

    let exponents = spec.exponents.clone();
    let mut attempts: Vec<Certificate> = Vec::new();
    let run_method = |method: &str, attempts: &mut Vec<Certificate>| -> Result<(), LyacertError> {
        let outcome = match method {
            "example2d" => {
                let (p1, p2) = match exponents.as_deref() {
                    Some([a, b]) => (*a, *b),
                    _ => (PExponent::Infinity, PExponent::Infinity),
                };
                certifier::certify_2d_example(&q, &p1, &p2)
            }
            "thm41" => certifier::certify_thm41(&q, None, exponents.as_deref()),
            "krein" => certifier::certify_krein(&q, steps),
            other => Err(LyacertError::Usage(format!(
                "unknown method '{other}' (auto | thm41 | krein | example2d)"
            ))),
        };
        match outcome {
            Ok(cert) => {
                attempts.push(cert);
                Ok(())
            }
            Err(LyacertError::Usage(u)) => Err(LyacertError::Usage(u)),
            Err(e) => {
                attempts.push(Certificate {
                    method: match method {
                        "example2d" => certifier::CertificateMethod::Example2d,
                        "krein" => certifier::CertificateMethod::KreinLambda1,
                        _ => certifier::CertificateMethod::LpMajorant,
                    },
                    verdict: CertificateVerdict::Inconclusive,
                    majorant: None,
                    exponents: vec![],
                    norms: vec![],
                    constants: vec![],
                    margins: vec![],
                    lambda1: None,
                    gamma: None,
                    notes: vec![format!("route unavailable: {e}")],
                });
                Ok(())
            }
        }
    };

    match args.method.as_str() {
        "auto" => {
            if q.dim() == 2 {
                run_method("example2d", &mut attempts)?;
            }
            if !attempts.last().is_some_and(Certificate::certified) {
                run_method("thm41", &mut attempts)?;
            }
            if !attempts.last().is_some_and(Certificate::certified) {
                run_method("krein", &mut attempts)?;
            }
        }
        m => run_method(m, &mut attempts)?,
    }

    for cert in &attempts {
        render_certificate(&mut report, cert);
    }
    let certified = attempts.iter().any(Certificate::certified);

    let mut exit = if certified { 0 } else { 1 };
    if args.floquet_check {
        let fr = linear_engine::floquet(&q, steps)?;
        render_floquet(&mut report, &fr);
        report.section("cross-check");
        if fr.verdict == StabilityVerdict::Unbounded {
            report.line("Floquet verdict UNBOUNDED overrides the certificate outcome");
            exit = 2;
        } else if certified && fr.verdict == StabilityVerdict::BoundedStable {
            report.line("certificate and Floquet oracle agree: stably bounded");
        } else {
            report.line(format!(
                "certificate {} with Floquet verdict {}",
                if certified { "CERTIFIED" } else { "inconclusive" },
                fr.verdict
            ));
        }
    }
    report.section("outcome");
    report.field(
        "verdict",
        if exit == 0 {
            "CERTIFIED_STABLY_BOUNDED"
        } else if exit == 2 {
            "UNBOUNDED_BY_FLOQUET"
        } else {
            "INCONCLUSIVE"
        },
    );
    report.field("exit_code", exit);
    print_report(&report, args.json);
    Ok(exit)
}

fn cmd_eig(args: SpecArgs) -> Result<i32, LyacertError> {
    let spec = load_kind(&args.spec, ProblemKind::LinearSystem)?;
    let q = spec.matrix()?;
    let steps = spec_steps(&spec)?;
    let mut report = Report::new("lyacert eig");
    echo_input(&mut report, &args.spec, &spec);
    let mem = certifier::check_lambda_membership(&q, 512, 1e-9);
    render_membership(&mut report, &mem);
    if !mem.member() {
        report.section("outcome");
        report.line("coefficient is outside the admissible class; refusing the eigenvalue query");
        print_report(&report, args.json);
        return Ok(1);
    }
    let er = linear_engine::lambda1_shooting(&q, steps)?;
    report.section("first antiperiodic eigenvalue");
    report.float("lambda1_shooting", er.lambda1);
    report.field("resolution", format!("{:?}", er.resolution));
    report.float("bracket_lo", er.bracketing_interval.0);
    report.float("bracket_hi", er.bracketing_interval.1);
    report.field("steps", er.steps);
    report.field("scan_points", er.shooting_determinant_values.len());
    if let Some(r) = er.rayleigh_estimate {
        report.float("lambda1_rayleigh", r);
        report.float("one_over_lambda1_rayleigh", 1.0 / r);
        report.float("agreement_rel", (er.lambda1 - r).abs() / er.lambda1);
    }
    print_report(&report, args.json);
    Ok(0)
}

fn cmd_floquet(args: SpecArgs) -> Result<i32, LyacertError> {
    let spec = load_kind(&args.spec, ProblemKind::LinearSystem)?;
    let q = spec.matrix()?;
    let steps = spec_steps(&spec)?;
    let fr = linear_engine::floquet(&q, steps)?;
    let mut report = Report::new("lyacert floquet");
    echo_input(&mut report, &args.spec, &spec);
    render_floquet(&mut report, &fr);
    print_report(&report, args.json);
    Ok(0)
}

fn random_init(
    dim: usize,
    period: f64,
    steps: usize,
    amplitude: f64,
    seed: u64,
) -> PeriodicSolution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let times: Vec<f64> = (0..=steps).map(|k| period * k as f64 / steps as f64).collect();
    let mut samples: Vec<DVector<f64>> = (0..steps)
        .map(|_| DVector::from_fn(dim, |_, _| rng.gen_range(-amplitude..amplitude)))
        .collect();
    samples.push(samples[0].clone());
    let zeros = vec![DVector::zeros(dim); steps + 1];
    PeriodicSolution {
        period,
        times,
        samples,
        derivative_samples: zeros,
        residual_sup: f64::INFINITY,
        bc_mismatch: 0.0,
    }
}

fn write_solution_csv(
    path: &Path,
    sol: &resonant::PeriodicSolution,
    dim: usize,
) -> Result<(), LyacertError> {
    let mut header: Vec<String> = vec!["t".into()];
    for i in 1..=dim {
        header.push(format!("u_{i}"));
    }
    for i in 1..=dim {
        header.push(format!("du_{i}"));
    }
    let mut csv = Csv::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    for (k, t) in sol.times.iter().enumerate() {
        let mut row = vec![fmt_float(*t)];
        for i in 0..dim {
            row.push(fmt_float(sol.samples[k][i]));
        }
        for i in 0..dim {
            row.push(fmt_float(sol.derivative_samples[k][i]));
        }
        csv.push_row(row);
    }
    std::fs::write(path, csv.finish())?;
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<i32, LyacertError> {
    let spec = ProblemSpec::from_path(&args.spec)?;
    match spec.kind {
        ProblemKind::LinearSystem => cmd_solve_linear(args, spec),
        ProblemKind::NonlinearSystem => cmd_solve_nonlinear(args, spec),
        other => Err(LyacertError::Usage(format!(
            "{} has kind {other}, solve expects linear_system or nonlinear_system",
            args.spec.display()
        ))),
    }
}

fn cmd_solve_linear(args: SolveArgs, spec: ProblemSpec) -> Result<i32, LyacertError> {
    let q = spec.matrix()?;
    if spec.forcing.is_empty() {
        return Err(LyacertError::Usage(
            "linear solve needs at least one forcing component h_i".into(),
        ));
    }
    let h = spec.forcing_vector()?;
    let steps = spec_steps(&spec)?;

    let mut report = Report::new("lyacert solve");
    echo_input(&mut report, &args.spec, &spec);

    let sol = linear_engine::solve_linear_periodic(&q, &h, steps)?;
    report.section("linear periodic solve");
    report.field("steps", steps);
    report.float("residual_sup", sol.residual_sup);
    report.float("bc_mismatch", sol.bc_mismatch);
    report.float("sup_norm", sol.sup_norm());

    write_solution_csv(&args.out, &sol, q.dim())?;
    report.section("outcome");
    report.field("solution_csv", args.out.display());
    report.field("exit_code", 0);
    print_report(&report, args.json);
    Ok(0)
}

fn cmd_solve_nonlinear(args: SolveArgs, spec: ProblemSpec) -> Result<i32, LyacertError> {
    let prob = spec.nonlinear()?;
    let h = spec.forcing_vector()?;
    let mut opts = ResonantOptions::default();
    if let Some(tols) = &spec.tolerances {
        if let Some(tol) = tols.tol {
            opts.tol = tol;
        }
        if let Some(m) = tols.max_outer {
            opts.max_outer = m;
        }
        if let Some(s) = tols.steps {
            opts.steps = s;
        }
        if let Some(qp) = tols.quad_points {
            opts.quad_points = qp;
        }
    }

    let mut report = Report::new("lyacert solve");
    echo_input(&mut report, &args.spec, &spec);

    if prob.bounds().is_some() && prob.exponents().is_some() {
        let hyp = resonant::check_t1_hypotheses(&prob, &resonant::ProbePlan::default())?;
        report.section("hypothesis check");
        report.field("passed", hyp.passed);
        report.float("sandwich_min_margin", hyp.sandwich_min_margin);
        report.float("mean_a_min_eigenvalue", hyp.mean_a_min_eigenvalue);
        report.field("b_diagonal_ok", hyp.b_diagonal_ok);
        for check in &hyp.norm_checks {
            report.field(
                &format!("norm_check_{}", check.component + 1),
                format!(
                    "p = {}, ||b+||_p = {} vs beta_per = {} (margin {}, {})",
                    check.p,
                    fmt_float(check.norm),
                    fmt_float(check.beta),
                    fmt_float(check.margin),
                    if check.ok { "ok" } else { "FAIL" }
                ),
            );
        }
        if !hyp.note.is_empty() {
            report.line(format!("note: {}", hyp.note));
        }
        if !hyp.passed && !args.force {
            report.section("outcome");
            report.line("hypotheses fail; rerun with --force to attempt the solve anyway");
            report.field("exit_code", 1);
            print_report(&report, args.json);
            return Ok(1);
        }
        opts.skip_hypothesis_check = args.force;
    } else {
        report.section("hypothesis check");
        report.line("bounds or exponents absent in the problem file; nothing to check");
        if !args.force {
            report.line("pass --force to solve without the existence hypotheses");
            report.section("outcome");
            report.field("exit_code", 1);
            print_report(&report, args.json);
            return Ok(1);
        }
        opts.skip_hypothesis_check = true;
    }

    let solve = resonant::solve_resonant(&prob, &h, None, &opts)?;
    report.section("solve");
    report.field("phase", format!("{:?}", solve.phase));
    report.field("outer_iterations", solve.outer_iterations);
    report.float("residual_sup", solve.solution.residual_sup);
    report.float("bc_mismatch", solve.solution.bc_mismatch);
    report.float("sup_norm", solve.solution.sup_norm());
    if let Some(m) = solve.sandwich_min_margin {
        report.float("sandwich_min_margin", m);
    }
    if solve.outer_iterations <= 1 {
        report.line("note: converged in one outer iteration (linear problem)");
    }
    for w in &solve.warnings {
        report.line(format!("warning: {w}"));
    }

    // uniqueness probe across seeded random starts
    if let Some(seeds) = spec.seeds.as_ref().filter(|s| s.len() >= 2) {
        let amplitude = 1.0 + solve.solution.sup_norm();
        let mut solutions = vec![solve.solution.clone()];
        for seed in seeds {
            let init = random_init(prob.dim(), prob.period(), opts.steps, amplitude, *seed);
            let alt = resonant::solve_resonant(&prob, &h, Some(&init), &opts)?;
            solutions.push(alt.solution);
        }
        let mut max_gap = 0.0f64;
        for i in 0..solutions.len() {
            for j in i + 1..solutions.len() {
                max_gap = max_gap.max(solutions[i].sup_distance(&solutions[j]));
            }
        }
        report.section("uniqueness probe");
        report.field("starts", solutions.len());
        report.float("max_pairwise_sup_distance", max_gap);
    }

    write_solution_csv(&args.out, &solve.solution, prob.dim())?;
    report.section("outcome");
    report.field("solution_csv", args.out.display());
    report.field("exit_code", 0);
    print_report(&report, args.json);
    Ok(0)
}

/// Rescales the witnessed diagonal entry so the emitted sampled spec
/// reproduces trace 2 exactly through its own spline representation.
fn retune_resonance_spec(
    spec: &mut ProblemSpec,
    j: usize,
    steps: usize,
) -> Result<f64, LyacertError> {
    let key = format!("q_{}_{}", j + 1, j + 1);
    let q = spec.matrix()?;
    let period = spec.required_period()?;
    let inner = q.clone();
    let trace_at = |kappa: f64| -> Result<f64, LyacertError> {
        let scaled = MatrixFunction::scalar(period, {
            let inner = inner.clone();
            move |t| kappa * inner.eval(t)[(j, j)]
        })?;
        let m = linear_engine::monodromy(&scaled, steps)?;
        Ok(m[(0, 0)] + m[(1, 1)] - 2.0)
    };
    let mut width = 2e-5;
    let (mut lo, mut hi) = loop {
        let (a, b) = (1.0 - width, 1.0 + width);
        if trace_at(a)?.signum() != trace_at(b)?.signum() {
            break (a, b);
        }
        width *= 10.0;
        if width > 2e-2 {
            return Err(LyacertError::Degenerate(
                "could not re-bracket the resonance after sampling".into(),
            ));
        }
    };
    let increasing = trace_at(hi)? > 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let f = trace_at(mid)?;
        if f.abs() <= 1e-12 {
            lo = mid;
            hi = mid;
            break;
        }
        if (f > 0.0) == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let kappa = 0.5 * (lo + hi);
    let entry = spec
        .entries
        .get_mut(&key)
        .expect("witness spec carries its own diagonal entry");
    if let Some(samples) = entry.samples.as_mut() {
        for v in samples {
            *v *= kappa;
        }
    }
    Ok(kappa)
}

fn cmd_witness(args: WitnessArgs) -> Result<i32, LyacertError> {
    let (kind, gammas, component, p, period) = if let Some(path) = &args.spec {
        let spec = load_kind(path, ProblemKind::WitnessQuery)?;
        let wq = spec.witness_query.clone().expect("validated");
        (wq.witness, wq.gammas, wq.component, wq.p, spec.required_period()?)
    } else {
        let kind = args
            .kind
            .clone()
            .ok_or_else(|| LyacertError::Usage("missing --kind (or --spec)".into()))?;
        let gammas = parse_list(
            &args
                .gammas
                .clone()
                .ok_or_else(|| LyacertError::Usage("missing --gammas".into()))?,
            "gamma",
            |s| {
                s.parse::<f64>()
                    .map_err(|_| LyacertError::Usage(format!("cannot parse gamma '{s}'")))
            },
        )?;
        let p: PExponent = args
            .p
            .clone()
            .ok_or_else(|| LyacertError::Usage("missing --p".into()))?
            .parse()?;
        let period = args
            .period
            .ok_or_else(|| LyacertError::Usage("missing --period".into()))?;
        (kind, gammas, args.component, p, period)
    };
    if component == 0 || component > gammas.len() {
        return Err(LyacertError::Usage(format!(
            "--component {component} out of range for {} gammas (1-based)",
            gammas.len()
        )));
    }
    let j = component - 1;

    let mut report = Report::new("lyacert witness");
    report.section("request");
    report.field("kind", &kind);
    for (i, g) in gammas.iter().enumerate() {
        report.float(&format!("gamma_{}", i + 1), *g);
    }
    report.field("component", component);
    report.field("p", p);
    report.float("period", period);

    let sample_count = 2048;
    let outcome = match kind.as_str() {
        "instability" => certifier::instability_witness(&gammas, j, &p, period).map(|(q, fr)| {
            let spec = ProblemSpec::from_sampled_system(
                &q,
                None,
                sample_count,
                "generated instability witness; expect Floquet verdict UNBOUNDED",
            );
            (spec, Some(fr), None)
        }),
        "resonance" => certifier::resonance_witness(&gammas, j, &p, period).map(|(a, h, diag)| {
            let spec = ProblemSpec::from_sampled_system(
                &a,
                Some(&h),
                sample_count,
                "generated resonance witness; the forced periodic solve must report RESONANT_LINEAR",
            );
            (spec, None, Some(diag))
        }),
        other => Err(LyacertError::Usage(format!(
            "unknown witness kind '{other}' (instability | resonance)"
        ))),
    };
    let (mut spec, floquet_report, diagnostics) = match outcome {
        Ok(v) => v,
        // a gamma below the sharp constant is a usage error at the CLI surface
        Err(LyacertError::Precondition(msg)) => return Err(LyacertError::Usage(msg)),
        Err(e) => return Err(e),
    };

    if let Some(fr) = &floquet_report {
        render_floquet(&mut report, fr);
    }
    if let Some(diag) = &diagnostics {
        let kappa = retune_resonance_spec(&mut spec, j, 4096)?;
        report.section("resonance diagnostics");
        report.float("trace_minus_two", diag.trace_minus_two);
        report.float("height", diag.height);
        report.float("norm", diag.norm);
        report.float("norm_bound", diag.norm_bound);
        report.float("fredholm_integral", diag.fredholm_integral);
        report.field("solve_reports_resonant", diag.solve_reports_resonant);
        report.float("sampled_retune_factor", kappa);
    }
    spec.to_path(&args.out)?;
    report.section("outcome");
    report.field("spec_file", args.out.display());
    report.field("exit_code", 0);
    print_report(&report, args.json);
    Ok(0)
}

struct SweepAxis {
    name: String,
    values: Vec<f64>,
}

fn parse_axis(text: &str) -> Result<SweepAxis, LyacertError> {
    let usage = || {
        LyacertError::Usage(format!(
            "cannot parse --param '{text}' (expected name=start:stop:count)"
        ))
    };
    let (name, range) = text.split_once('=').ok_or_else(usage)?;
    let parts: Vec<&str> = range.split(':').collect();
    let [start, stop, count] = parts[..] else {
        return Err(usage());
    };
    let start: f64 = start.parse().map_err(|_| usage())?;
    let stop: f64 = stop.parse().map_err(|_| usage())?;
    let count: usize = count.parse().map_err(|_| usage())?;
    let values = match count {
        0 => vec![],
        1 => vec![start],
        _ => (0..count)
            .map(|k| start + (stop - start) * k as f64 / (count - 1) as f64)
            .collect(),
    };
    Ok(SweepAxis {
        name: name.trim().to_string(),
        values,
    })
}

fn cmd_sweep(args: SweepArgs) -> Result<i32, LyacertError> {
    let template = std::fs::read_to_string(&args.template)?;
    let axes: Vec<SweepAxis> = args.params.iter().map(|s| parse_axis(s)).collect::<Result<_, _>>()?;

    let mut header: Vec<String> = axes.iter().map(|a| a.name.clone()).collect();
    header.extend(
        ["certificate", "floquet", "lambda1", "margin_min", "margins"]
            .iter()
            .map(|s| s.to_string()),
    );
    let mut csv = Csv::new(&header.iter().map(String::as_str).collect::<Vec<_>>());

    let total: usize = axes.iter().map(|a| a.values.len()).product();
    if axes.iter().any(|a| a.values.is_empty()) {
        emit(args.out.as_deref(), &csv.finish())?;
        return Ok(0);
    }

    let assignments: Vec<Vec<f64>> = (0..total)
        .map(|mut idx| {
            let mut point = vec![0.0; axes.len()];
            for (k, axis) in axes.iter().enumerate().rev() {
                point[k] = axis.values[idx % axis.values.len()];
                idx /= axis.values.len();
            }
            point
        })
        .collect();

    let rows: Vec<Result<Vec<String>, LyacertError>> = assignments
        .par_iter()
        .map(|point| {
            let mut text = template.clone();
            for (axis, value) in axes.iter().zip(point) {
                text = text.replace(&format!("{{{}}}", axis.name), &fmt_float(*value));
            }
            let spec: ProblemSpec = serde_json::from_str(&text)?;
            spec.validate()?;
            let q = spec.matrix()?;
            let steps = 1024;

            let mut row: Vec<String> = point.iter().map(|v| fmt_float(*v)).collect();
            let mem = certifier::check_lambda_membership(&q, 256, 1e-9);
            let floquet_cell = match linear_engine::floquet(&q, steps) {
                Ok(fr) => fr.verdict.to_string(),
                Err(e) => format!("error: {e}"),
            };
            if !mem.member() {
                row.extend([
                    "NOT_IN_LAMBDA".to_string(),
                    floquet_cell,
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
                return Ok(row);
            }

            let cert = certifier::certify_thm41(&q, None, spec.exponents.as_deref())?;
            let lambda1 = linear_engine::lambda1_shooting(&q, steps).map(|er| er.lambda1).ok();
            let mut verdict = cert.verdict;
            if verdict == CertificateVerdict::Inconclusive {
                if let Some(l) = lambda1 {
                    if l > 1.0 + 1e-6 {
                        verdict = CertificateVerdict::CertifiedStablyBounded;
                    }
                }
            }
            let margin_min = cert.margins.iter().cloned().fold(f64::INFINITY, f64::min);
            row.extend([
                verdict.to_string(),
                floquet_cell,
                lambda1.map(fmt_float).unwrap_or_default(),
                if margin_min.is_finite() { fmt_float(margin_min) } else { String::new() },
                cert.margins.iter().map(|m| fmt_float(*m)).collect::<Vec<_>>().join(";"),
            ]);
            Ok(row)
        })
        .collect();

    for row in rows {
        csv.push_row(row?);
    }
    emit(args.out.as_deref(), &csv.finish())?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        let axis = parse_axis("delta=0:1:5").unwrap();
        assert_eq!(axis.name, "delta");
        assert_eq!(axis.values.len(), 5);
        assert_eq!(axis.values[0], 0.0);
        assert_eq!(axis.values[4], 1.0);
        assert!(parse_axis("delta=0:1").is_err());
        assert_eq!(parse_axis("e=2:3:1").unwrap().values, vec![2.0]);
        assert!(parse_axis("e=2:3:0").unwrap().values.is_empty());
    }

    #[test]
    fn list_parsing_rejects_empty() {
        assert!(parse_list::<PExponent, _>("", "exponent", |s| s.parse()).is_err());
        let ps = parse_list("1, 2, inf", "exponent", |s| s.parse::<PExponent>()).unwrap();
        assert_eq!(ps.len(), 3);
    }
}
