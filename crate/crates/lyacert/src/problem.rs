//! JSON problem files: parsing, validation, and conversion to the
//! runtime types, plus emission for generated witness specs.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::constants::Bc;
use crate::error::LyacertError;
use crate::exponent::PExponent;
use crate::matrixfn::{MatrixFunction, PeriodicSpline, VectorFunction};
use crate::resonant::NonlinearProblem;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    LinearSystem,
    NonlinearSystem,
    ConstantsQuery,
    WitnessQuery,
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ProblemKind::LinearSystem => "linear_system",
            ProblemKind::NonlinearSystem => "nonlinear_system",
            ProblemKind::ConstantsQuery => "constants_query",
            ProblemKind::WitnessQuery => "witness_query",
        };
        f.write_str(s)
    }
}

/// One scalar T-periodic coefficient, either a truncated Fourier series
/// or periodic samples interpolated by a cubic spline.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntrySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fourier: Option<Vec<FourierTerm>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interpolation: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
    pub harmonic: u32,
}

impl EntrySpec {
    pub fn from_constant(c: f64) -> Self {
        EntrySpec {
            constant: Some(c),
            ..Default::default()
        }
    }

    pub fn from_samples(samples: Vec<f64>) -> Self {
        EntrySpec {
            samples: Some(samples),
            interpolation: Some("spline".into()),
            ..Default::default()
        }
    }

    /// Compiles to a T-periodic scalar closure.
    pub fn compile(&self, period: f64, name: &str) -> Result<Arc<dyn Fn(f64) -> f64 + Send + Sync>, LyacertError> {
        if let Some(interp) = &self.interpolation {
            if interp != "spline" {
                return Err(LyacertError::Usage(format!(
                    "entry {name}: unsupported interpolation '{interp}' (only 'spline')"
                )));
            }
        }
        let base = self.constant.unwrap_or(0.0);
        match (&self.fourier, &self.samples) {
            (Some(_), Some(_)) => Err(LyacertError::Usage(format!(
                "entry {name}: give either 'fourier' or 'samples', not both"
            ))),
            (Some(terms), None) => {
                let terms = terms.clone();
                let omega = 2.0 * std::f64::consts::PI / period;
                Ok(Arc::new(move |t: f64| {
                    let mut v = base;
                    for term in &terms {
                        let w = omega * term.harmonic as f64 * t;
                        v += term.cos * w.cos() + term.sin * w.sin();
                    }
                    v
                }))
            }
            (None, Some(samples)) => {
                if samples.len() < 4 {
                    return Err(LyacertError::Usage(format!(
                        "entry {name}: need at least 4 samples, got {}",
                        samples.len()
                    )));
                }
                let spline = PeriodicSpline::new(period, samples.clone());
                Ok(Arc::new(move |t: f64| base + spline.eval(t)))
            }
            (None, None) => Ok(Arc::new(move |_| base)),
        }
    }
}

/// Nonlinearity registry for nonlinear problem files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearitySpec {
    /// G_u(t, u) = Q(t) u with Q taken from the `entries` map.
    Linear,
    /// Scalar G_u(t, u) = weight(t) * slope * (u + wobble * sin u) / (1 + wobble).
    SaturatingSine {
        weight: EntrySpec,
        slope: f64,
        #[serde(default)]
        wobble: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_outer: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_points: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessQuerySpec {
    pub witness: String,
    pub gammas: Vec<f64>,
    /// 1-based component index.
    pub component: usize,
    pub p: PExponent,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub schema_version: u32,
    pub kind: ProblemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    /// Matrix coefficients keyed "q_{i}_{j}", 1-based, upper triangle only.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub entries: BTreeMap<String, EntrySpec>,
    /// Forcing components keyed "h_{i}", 1-based.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub forcing: BTreeMap<String, EntrySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonlinearity: Option<NonlinearitySpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bounds_lower: BTreeMap<String, EntrySpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bounds_upper: BTreeMap<String, EntrySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<PExponent>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bcs: Option<Vec<Bc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_query: Option<WitnessQuerySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

fn parse_key(key: &str, prefix: &str) -> Option<Vec<usize>> {
    let rest = key.strip_prefix(prefix)?.strip_prefix('_')?;
    let mut out = Vec::new();
    for part in rest.split('_') {
        out.push(part.parse::<usize>().ok()?);
    }
    Some(out)
}

impl ProblemSpec {
    pub fn from_path(path: &Path) -> Result<Self, LyacertError> {
        let text = std::fs::read_to_string(path)?;
        let spec: ProblemSpec = serde_json::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_path(&self, path: &Path) -> Result<(), LyacertError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), LyacertError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(LyacertError::Usage(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        match self.kind {
            ProblemKind::LinearSystem | ProblemKind::NonlinearSystem => {
                let t = self.required_period()?;
                if !(t > 0.0) || !t.is_finite() {
                    return Err(LyacertError::Usage(format!("period must be positive, got {t}")));
                }
                let n = self.required_dim()?;
                for key in self.entries.keys() {
                    let Some(idx) = parse_key(key, "q") else {
                        return Err(LyacertError::Usage(format!(
                            "unrecognized entry key '{key}' (expected q_i_j)"
                        )));
                    };
                    let [i, j] = idx[..] else {
                        return Err(LyacertError::Usage(format!(
                            "entry key '{key}' must carry two indices"
                        )));
                    };
                    if i == 0 || j == 0 || i > n || j > n {
                        return Err(LyacertError::Usage(format!(
                            "entry key '{key}' out of range for dim {n} (indices are 1-based)"
                        )));
                    }
                    if i > j {
                        return Err(LyacertError::Usage(format!(
                            "entry key '{key}' addresses the lower triangle; symmetry is taken from the upper triangle"
                        )));
                    }
                }
                for key in self.forcing.keys() {
                    let Some(idx) = parse_key(key, "h") else {
                        return Err(LyacertError::Usage(format!(
                            "unrecognized forcing key '{key}' (expected h_i)"
                        )));
                    };
                    let [i] = idx[..] else {
                        return Err(LyacertError::Usage(format!(
                            "forcing key '{key}' must carry one index"
                        )));
                    };
                    if i == 0 || i > n {
                        return Err(LyacertError::Usage(format!(
                            "forcing key '{key}' out of range for dim {n}"
                        )));
                    }
                }
                if let Some(exps) = &self.exponents {
                    if exps.len() != n {
                        return Err(LyacertError::Usage(format!(
                            "exponents list has {} entries for dim {n}",
                            exps.len()
                        )));
                    }
                }
                if self.kind == ProblemKind::NonlinearSystem && self.nonlinearity.is_none() {
                    return Err(LyacertError::Usage(
                        "nonlinear_system requires a 'nonlinearity' block".into(),
                    ));
                }
            }
            ProblemKind::ConstantsQuery => {
                let t = self.required_period()?;
                if !(t > 0.0) {
                    return Err(LyacertError::Usage(format!("period must be positive, got {t}")));
                }
                if self.exponents.as_ref().map_or(true, |e| e.is_empty()) {
                    return Err(LyacertError::Usage("constants_query requires a nonempty exponents list".into()));
                }
            }
            ProblemKind::WitnessQuery => {
                let Some(wq) = &self.witness_query else {
                    return Err(LyacertError::Usage("witness_query requires a 'witness_query' block".into()));
                };
                if wq.witness != "instability" && wq.witness != "resonance" {
                    return Err(LyacertError::Usage(format!(
                        "unknown witness kind '{}' (instability | resonance)",
                        wq.witness
                    )));
                }
                if wq.component == 0 || wq.component > wq.gammas.len() {
                    return Err(LyacertError::Usage(format!(
                        "witness component {} out of range for {} gammas (1-based)",
                        wq.component,
                        wq.gammas.len()
                    )));
                }
                let t = self.required_period()?;
                if !(t > 0.0) {
                    return Err(LyacertError::Usage(format!("period must be positive, got {t}")));
                }
            }
        }
        Ok(())
    }

    pub fn required_dim(&self) -> Result<usize, LyacertError> {
        match self.dim {
            Some(n) if n >= 1 => Ok(n),
            Some(n) => Err(LyacertError::Usage(format!("dim must be at least 1, got {n}"))),
            None => Err(LyacertError::Usage("missing 'dim'".into())),
        }
    }

    pub fn required_period(&self) -> Result<f64, LyacertError> {
        self.period.ok_or_else(|| LyacertError::Usage("missing 'period'".into()))
    }

    /// Assembles the symmetric coefficient matrix from the upper-triangle
    /// entry map; absent entries are zero.
    pub fn matrix(&self) -> Result<MatrixFunction, LyacertError> {
        let n = self.required_dim()?;
        let t = self.required_period()?;
        let mut compiled: Vec<Vec<Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>>> = vec![vec![None; n]; n];
        for (key, entry) in &self.entries {
            let idx = parse_key(key, "q").expect("validated");
            let (i, j) = (idx[0] - 1, idx[1] - 1);
            compiled[i][j] = Some(entry.compile(t, key)?);
        }
        MatrixFunction::from_fn(n, t, move |time| {
            DMatrix::from_fn(n, n, |i, j| {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                compiled[a][b].as_ref().map_or(0.0, |f| f(time))
            })
        })
    }

    pub fn forcing_vector(&self) -> Result<VectorFunction, LyacertError> {
        let n = self.required_dim()?;
        let t = self.required_period()?;
        if self.forcing.is_empty() {
            return VectorFunction::zero(n, t);
        }
        let mut compiled: Vec<Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>> = vec![None; n];
        for (key, entry) in &self.forcing {
            let idx = parse_key(key, "h").expect("validated");
            compiled[idx[0] - 1] = Some(entry.compile(t, key)?);
        }
        VectorFunction::from_fn(n, t, move |time| {
            DVector::from_fn(n, |i, _| compiled[i].as_ref().map_or(0.0, |f| f(time)))
        })
    }

    fn bounds_pair(&self) -> Result<Option<(MatrixFunction, MatrixFunction)>, LyacertError> {
        if self.bounds_lower.is_empty() && self.bounds_upper.is_empty() {
            return Ok(None);
        }
        let n = self.required_dim()?;
        let t = self.required_period()?;
        let build = |map: &BTreeMap<String, EntrySpec>| -> Result<MatrixFunction, LyacertError> {
            let mut compiled: Vec<Vec<Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>>> = vec![vec![None; n]; n];
            for (key, entry) in map {
                let Some(idx) = parse_key(key, "q") else {
                    return Err(LyacertError::Usage(format!(
                        "unrecognized bound key '{key}' (expected q_i_j)"
                    )));
                };
                if idx.len() != 2 || idx[0] == 0 || idx[1] == 0 || idx[0] > n || idx[1] > n || idx[0] > idx[1] {
                    return Err(LyacertError::Usage(format!("bound key '{key}' out of range")));
                }
                compiled[idx[0] - 1][idx[1] - 1] = Some(entry.compile(t, key)?);
            }
            MatrixFunction::from_fn(n, t, move |time| {
                DMatrix::from_fn(n, n, |i, j| {
                    let (a, b) = if i <= j { (i, j) } else { (j, i) };
                    compiled[a][b].as_ref().map_or(0.0, |f| f(time))
                })
            })
        };
        Ok(Some((build(&self.bounds_lower)?, build(&self.bounds_upper)?)))
    }

    /// Builds the nonlinear problem for `nonlinear_system` files, wiring
    /// bounds and exponents into the hypothesis checker when present.
    pub fn nonlinear(&self) -> Result<NonlinearProblem, LyacertError> {
        if self.kind != ProblemKind::NonlinearSystem {
            return Err(LyacertError::Usage(format!(
                "expected kind nonlinear_system, got {:?}",
                self.kind
            )));
        }
        let n = self.required_dim()?;
        let t = self.required_period()?;
        let mut prob = match self.nonlinearity.as_ref().expect("validated") {
            NonlinearitySpec::Linear => {
                let q = self.matrix()?;
                let qg = q.clone();
                let qh = q.clone();
                NonlinearProblem::new(
                    n,
                    t,
                    move |time, u: &DVector<f64>| qg.eval(time) * u,
                    move |time, _u: &DVector<f64>| qh.eval(time),
                )?
            }
            NonlinearitySpec::SaturatingSine { weight, slope, wobble } => {
                if n != 1 {
                    return Err(LyacertError::Usage(
                        "saturating_sine nonlinearity is scalar (dim = 1)".into(),
                    ));
                }
                let w = weight.compile(t, "weight")?;
                let (slope, wobble) = (*slope, *wobble);
                let wg = w.clone();
                let grad = move |time: f64, u: &DVector<f64>| {
                    let x = u[0];
                    DVector::from_element(1, wg(time) * slope * (x + wobble * x.sin()) / (1.0 + wobble))
                };
                let hess = move |time: f64, u: &DVector<f64>| {
                    let x = u[0];
                    DMatrix::from_element(1, 1, w(time) * slope * (1.0 + wobble * x.cos()) / (1.0 + wobble))
                };
                NonlinearProblem::new(n, t, grad, hess)?
            }
        };
        if let Some((lo, hi)) = self.bounds_pair()? {
            prob = prob.with_bounds(lo, hi)?;
        }
        if let Some(exps) = &self.exponents {
            prob = prob.with_exponents(exps.clone())?;
        }
        Ok(prob)
    }

    /// Snapshot of a matrix coefficient as a sampled linear-system spec;
    /// used by the witness generator so its output round-trips.
    pub fn from_sampled_system(
        q: &MatrixFunction,
        forcing: Option<&VectorFunction>,
        sample_count: usize,
        comment: &str,
    ) -> Self {
        let n = q.dim();
        let t = q.period();
        let h = t / sample_count as f64;
        let mut entries = BTreeMap::new();
        for i in 0..n {
            for j in i..n {
                let samples: Vec<f64> = (0..sample_count).map(|k| q.eval(k as f64 * h)[(i, j)]).collect();
                if samples.iter().any(|v| v.abs() > 0.0) {
                    entries.insert(format!("q_{}_{}", i + 1, j + 1), EntrySpec::from_samples(samples));
                }
            }
        }
        let mut forcing_map = BTreeMap::new();
        if let Some(hf) = forcing {
            for i in 0..n {
                let samples: Vec<f64> = (0..sample_count).map(|k| hf.eval(k as f64 * h)[i]).collect();
                if samples.iter().any(|v| v.abs() > 0.0) {
                    forcing_map.insert(format!("h_{}", i + 1), EntrySpec::from_samples(samples));
                }
            }
        }
        ProblemSpec {
            schema_version: SCHEMA_VERSION,
            kind: ProblemKind::LinearSystem,
            dim: Some(n),
            period: Some(t),
            entries,
            forcing: forcing_map,
            nonlinearity: None,
            bounds_lower: BTreeMap::new(),
            bounds_upper: BTreeMap::new(),
            exponents: None,
            bcs: None,
            tolerances: None,
            seeds: None,
            witness_query: None,
            comment: Some(comment.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn minimal_linear(extra: &str) -> String {
        format!(
            r#"{{
              "schema_version": 1,
              "kind": "linear_system",
              "dim": 2,
              "period": 1.0,
              "entries": {{
                "q_1_1": {{"constant": 0.5, "fourier": [{{"cos": 0.25, "harmonic": 1}}]}},
                "q_1_2": {{"fourier": [{{"sin": 0.1, "harmonic": 2}}]}}
              }}{extra}
            }}"#
        )
    }

    #[test]
    fn parses_and_assembles_symmetric_matrix() {
        let spec: ProblemSpec = serde_json::from_str(&minimal_linear("")).unwrap();
        spec.validate().unwrap();
        let q = spec.matrix().unwrap();
        let t = 0.3;
        let m = q.eval(t);
        let w = 2.0 * std::f64::consts::PI * t;
        assert_relative_eq!(m[(0, 0)], 0.5 + 0.25 * w.cos(), max_relative = 1e-14);
        assert_relative_eq!(m[(0, 1)], 0.1 * (2.0 * w).sin(), max_relative = 1e-14);
        assert_eq!(m[(0, 1)], m[(1, 0)]);
        assert_eq!(m[(1, 1)], 0.0);
    }

    #[test]
    fn rejects_wrong_schema_version() {
        let text = minimal_linear("").replace("\"schema_version\": 1", "\"schema_version\": 7");
        let spec: ProblemSpec = serde_json::from_str(&text).unwrap();
        assert!(matches!(spec.validate(), Err(LyacertError::Usage(_))));
    }

    #[test]
    fn rejects_lower_triangle_keys() {
        let text = minimal_linear("").replace("q_1_2", "q_2_1");
        let spec: ProblemSpec = serde_json::from_str(&text).unwrap();
        let err = spec.validate().unwrap_err();
        assert!(err.to_string().contains("upper triangle"), "{err}");
    }

    #[test]
    fn rejects_nonpositive_period() {
        let text = minimal_linear("").replace("\"period\": 1.0", "\"period\": -2.0");
        let spec: ProblemSpec = serde_json::from_str(&text).unwrap();
        assert!(matches!(spec.validate(), Err(LyacertError::Usage(_))));
    }

    #[test]
    fn sampled_entries_round_trip_through_spline() {
        let n = 64;
        let samples: Vec<f64> = (0..n)
            .map(|k| (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
            .collect();
        let entry = EntrySpec::from_samples(samples);
        let f = entry.compile(1.0, "q_1_1").unwrap();
        for k in 0..100 {
            let t = k as f64 / 100.0;
            assert_relative_eq!(
                f(t),
                (2.0 * std::f64::consts::PI * t).cos(),
                epsilon = 1e-5
            );
        }
    }

    #[test]
    fn nonlinear_saturating_sine_builds() {
        let text = r#"{
          "schema_version": 1,
          "kind": "nonlinear_system",
          "dim": 1,
          "period": 6.283185307179586,
          "nonlinearity": {"form": "saturating_sine", "weight": {"constant": 1.0}, "slope": 0.5, "wobble": 0.0},
          "forcing": {"h_1": {"fourier": [{"cos": 1.0, "harmonic": 1}]}}
        }"#;
        let spec: ProblemSpec = serde_json::from_str(text).unwrap();
        spec.validate().unwrap();
        let prob = spec.nonlinear().unwrap();
        let g = prob.grad_at(0.0, &DVector::from_element(1, 2.0));
        assert_relative_eq!(g[0], 1.0, max_relative = 1e-14);
        let h = spec.forcing_vector().unwrap();
        assert_relative_eq!(h.eval(0.0)[0], 1.0, max_relative = 1e-14);
    }

    #[test]
    fn witness_query_block_validates() {
        let text = r#"{
          "schema_version": 1,
          "kind": "witness_query",
          "period": 6.283185307179586,
          "witness_query": {"witness": "instability", "gammas": [1.0], "component": 1, "p": "1"}
        }"#;
        let spec: ProblemSpec = serde_json::from_str(text).unwrap();
        spec.validate().unwrap();
        let bad = text.replace("\"component\": 1", "\"component\": 3");
        let spec: ProblemSpec = serde_json::from_str(&bad).unwrap();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn emitted_sampled_system_parses_back() {
        let q = MatrixFunction::scalar(2.0, |t| 1.0 + (std::f64::consts::PI * t).sin()).unwrap();
        let spec = ProblemSpec::from_sampled_system(&q, None, 128, "round trip");
        spec.validate().unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        let back: ProblemSpec = serde_json::from_str(&json).unwrap();
        let qb = back.matrix().unwrap();
        for k in 0..50 {
            let t = 2.0 * k as f64 / 50.0;
            assert_relative_eq!(qb.eval(t)[(0, 0)], q.eval(t)[(0, 0)], epsilon = 1e-4);
        }
    }
}
