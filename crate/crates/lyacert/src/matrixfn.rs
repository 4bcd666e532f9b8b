//! Periodic matrix- and vector-valued coefficient functions.
//!
//! A coefficient is either a closure evaluated on demand or a uniform
//! sample set interpolated by a periodic cubic spline. Evaluation always
//! reduces the argument modulo the period, and symmetric consumers read
//! matrices through [`MatrixFunction::eval`], which symmetrizes; the raw
//! interpolant stays available through `eval_raw`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::LyacertError;
use crate::numeric;

type MatrixClosure = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;
type VectorClosure = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;

/// Periodic cubic spline through values at t_j = jh, j = 0..n-1, h = T/n.
#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    values: Vec<f64>,
    second: Vec<f64>,
    h: f64,
}

impl PeriodicSpline {
    pub fn new(period: f64, values: Vec<f64>) -> PeriodicSpline {
        let n = values.len();
        let h = period / n as f64;
        let rhs: Vec<f64> = (0..n)
            .map(|j| {
                let prev = values[(j + n - 1) % n];
                let next = values[(j + 1) % n];
                6.0 * (next - 2.0 * values[j] + prev) / (h * h)
            })
            .collect();
        let diag = vec![4.0; n];
        let second = numeric::cyclic_tridiagonal_solve(&diag, 1.0, 1.0, &rhs);
        PeriodicSpline { values, second, h }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.values.len();
        let period = self.h * n as f64;
        let tm = t.rem_euclid(period);
        let j = ((tm / self.h) as usize).min(n - 1);
        let u = (tm - j as f64 * self.h) / self.h;
        let jn = (j + 1) % n;
        let (y0, y1) = (self.values[j], self.values[jn]);
        let (m0, m1) = (self.second[j], self.second[jn]);
        let a = 1.0 - u;
        y0 * a + y1 * u
            + self.h * self.h / 6.0 * ((a * a * a - a) * m0 + (u * u * u - u) * m1)
    }
}

#[derive(Clone)]
enum MatrixSource {
    Closure(MatrixClosure),
    Spline(Vec<PeriodicSpline>),
}

/// A T-periodic matrix-valued function of time.
#[derive(Clone)]
pub struct MatrixFunction {
    dim: usize,
    period: f64,
    source: MatrixSource,
}

impl std::fmt::Debug for MatrixFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.source {
            MatrixSource::Closure(_) => "closure",
            MatrixSource::Spline(_) => "spline",
        };
        write!(
            f,
            "MatrixFunction {{ dim: {}, period: {}, source: {kind} }}",
            self.dim, self.period
        )
    }
}

fn check_period(period: f64) -> Result<(), LyacertError> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(LyacertError::Domain(format!(
            "period must be positive and finite, got {period}"
        )));
    }
    Ok(())
}

impl MatrixFunction {
    pub fn from_fn<F>(dim: usize, period: f64, f: F) -> Result<MatrixFunction, LyacertError>
    where
        F: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        check_period(period)?;
        if dim == 0 {
            return Err(LyacertError::Domain("dimension must be positive".into()));
        }
        let probe = f(0.0);
        if probe.nrows() != dim || probe.ncols() != dim {
            return Err(LyacertError::Domain(format!(
                "closure returns {}x{}, expected {dim}x{dim}",
                probe.nrows(),
                probe.ncols()
            )));
        }
        Ok(MatrixFunction {
            dim,
            period,
            source: MatrixSource::Closure(Arc::new(f)),
        })
    }

    /// Values at the uniform nodes jT/n, j = 0..n-1 (endpoint excluded),
    /// interpolated by a periodic cubic spline entrywise.
    pub fn from_samples(period: f64, samples: &[DMatrix<f64>]) -> Result<MatrixFunction, LyacertError> {
        check_period(period)?;
        if samples.len() < 4 {
            return Err(LyacertError::Domain(format!(
                "need at least 4 samples per period, got {}",
                samples.len()
            )));
        }
        let dim = samples[0].nrows();
        if dim == 0 || samples[0].ncols() != dim {
            return Err(LyacertError::Domain("samples must be square and nonempty".into()));
        }
        if samples.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(LyacertError::Domain("all samples must share one shape".into()));
        }
        let mut splines = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let values: Vec<f64> = samples.iter().map(|m| m[(i, j)]).collect();
                splines.push(PeriodicSpline::new(period, values));
            }
        }
        Ok(MatrixFunction {
            dim,
            period,
            source: MatrixSource::Spline(splines),
        })
    }

    pub fn constant(period: f64, value: DMatrix<f64>) -> Result<MatrixFunction, LyacertError> {
        check_period(period)?;
        let dim = value.nrows();
        if dim == 0 || value.ncols() != dim {
            return Err(LyacertError::Domain("constant matrix must be square and nonempty".into()));
        }
        MatrixFunction::from_fn(dim, period, move |_| value.clone())
    }

    pub fn scalar<F>(period: f64, f: F) -> Result<MatrixFunction, LyacertError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        MatrixFunction::from_fn(1, period, move |t| DMatrix::from_element(1, 1, f(t)))
    }

    pub fn diagonal(
        period: f64,
        entries: Vec<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
    ) -> Result<MatrixFunction, LyacertError> {
        let dim = entries.len();
        MatrixFunction::from_fn(dim, period, move |t| {
            DMatrix::from_fn(dim, dim, |i, j| if i == j { entries[i](t) } else { 0.0 })
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Evaluates at t reduced modulo the period, without symmetrizing.
    pub fn eval_raw(&self, t: f64) -> DMatrix<f64> {
        let tm = t.rem_euclid(self.period);
        match &self.source {
            MatrixSource::Closure(f) => f(tm),
            MatrixSource::Spline(splines) => DMatrix::from_fn(self.dim, self.dim, |i, j| {
                splines[i * self.dim + j].eval(tm)
            }),
        }
    }

    /// Evaluates and symmetrizes: (Q + Qᵀ)/2.
    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        let m = self.eval_raw(t);
        let mt = m.transpose();
        (m + mt) * 0.5
    }

    /// Entrywise Simpson average over one period.
    pub fn mean(&self, panels: usize) -> DMatrix<f64> {
        let n = 2 * panels.max(64);
        let h = self.period / n as f64;
        let mut sums = DMatrix::zeros(self.dim, self.dim);
        let samples: Vec<DMatrix<f64>> = (0..=n).map(|k| self.eval(k as f64 * h)).collect();
        for i in 0..self.dim {
            for j in 0..self.dim {
                let column: Vec<f64> = samples.iter().map(|m| m[(i, j)]).collect();
                sums[(i, j)] = numeric::simpson(h, &column) / self.period;
            }
        }
        sums
    }
}

#[derive(Clone)]
enum VectorSource {
    Closure(VectorClosure),
    Spline(Vec<PeriodicSpline>),
}

/// A T-periodic vector-valued function of time, e.g. a forcing term.
#[derive(Clone)]
pub struct VectorFunction {
    dim: usize,
    period: f64,
    source: VectorSource,
}

impl std::fmt::Debug for VectorFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "VectorFunction {{ dim: {}, period: {} }}", self.dim, self.period)
    }
}

impl VectorFunction {
    pub fn from_fn<F>(dim: usize, period: f64, f: F) -> Result<VectorFunction, LyacertError>
    where
        F: Fn(f64) -> DVector<f64> + Send + Sync + 'static,
    {
        check_period(period)?;
        if dim == 0 {
            return Err(LyacertError::Domain("dimension must be positive".into()));
        }
        let probe = f(0.0);
        if probe.len() != dim {
            return Err(LyacertError::Domain(format!(
                "closure returns length {}, expected {dim}",
                probe.len()
            )));
        }
        Ok(VectorFunction {
            dim,
            period,
            source: VectorSource::Closure(Arc::new(f)),
        })
    }

    pub fn from_samples(period: f64, samples: &[DVector<f64>]) -> Result<VectorFunction, LyacertError> {
        check_period(period)?;
        if samples.len() < 4 {
            return Err(LyacertError::Domain(format!(
                "need at least 4 samples per period, got {}",
                samples.len()
            )));
        }
        let dim = samples[0].len();
        if dim == 0 || samples.iter().any(|v| v.len() != dim) {
            return Err(LyacertError::Domain("all samples must share one nonzero length".into()));
        }
        let splines = (0..dim)
            .map(|i| PeriodicSpline::new(period, samples.iter().map(|v| v[i]).collect()))
            .collect();
        Ok(VectorFunction {
            dim,
            period,
            source: VectorSource::Spline(splines),
        })
    }

    pub fn zero(dim: usize, period: f64) -> Result<VectorFunction, LyacertError> {
        VectorFunction::from_fn(dim, period, move |_| DVector::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn eval(&self, t: f64) -> DVector<f64> {
        let tm = t.rem_euclid(self.period);
        match &self.source {
            VectorSource::Closure(f) => f(tm),
            VectorSource::Spline(splines) => {
                DVector::from_fn(self.dim, |i, _| splines[i].eval(tm))
            }
        }
    }
}
