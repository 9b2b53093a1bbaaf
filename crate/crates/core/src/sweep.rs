//! Parameter sweeps over the master-equation steady state.
//!
//! A sweep is described by a JSON document:
//!
//! ```json
//! {
//!   "model": "kerr",
//!   "params": { "u": 20, "delta": 40 },
//!   "axes": [ { "param": "phi", "start": 0, "stop": 6.283185307179586, "points": 201 } ],
//!   "links": [ { "param": "delta", "source": "u", "factor": 2 } ],
//!   "cutoff": 4
//! }
//! ```
//!
//! Unset parameters take the model defaults. `links` derive a parameter as
//! `factor * source + offset` after the axes are applied. For the JC model,
//! `delta_a` follows `delta1` unless it is set explicitly. Grid points that
//! share all physical parameters (everything but `phi`) share one solve.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouville::{build_liouvillian, solve_steady_state, SteadyState};
use crate::model::{JcParams, KerrParams, ModelKind, ModelParams};
use crate::observables::{CorrelationReport, Correlator, Moments};

pub const DEFAULT_CUTOFF: usize = 5;
pub const CONVERGENCE_TOL: f64 = 1e-3;
pub const UNDEFINED: &str = "undefined";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl Axis {
    pub fn linear(param: &str, start: f64, stop: f64, points: usize) -> Self {
        Self { param: param.into(), start, stop, points, scale: Scale::Linear }
    }

    pub fn log(param: &str, start: f64, stop: f64, points: usize) -> Self {
        Self { param: param.into(), start, stop, points, scale: Scale::Log }
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.start + (self.stop - self.start) * t,
                    Scale::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

/// `param = factor * source + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Link {
    pub param: String,
    pub source: String,
    pub factor: f64,
    #[serde(default)]
    pub offset: f64,
}

impl Link {
    pub fn new(param: &str, source: &str, factor: f64) -> Self {
        Self { param: param.into(), source: source.into(), factor, offset: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    N1,
    N2,
    NOut,
    G2_1,
    G2_2,
    G2Out,
}

impl Observable {
    pub const ALL: [Observable; 6] =
        [Observable::N1, Observable::N2, Observable::NOut, Observable::G2_1, Observable::G2_2, Observable::G2Out];

    pub fn name(self) -> &'static str {
        match self {
            Observable::N1 => "n1",
            Observable::N2 => "n2",
            Observable::NOut => "n_out",
            Observable::G2_1 => "g2_1",
            Observable::G2_2 => "g2_2",
            Observable::G2Out => "g2_out",
        }
    }

    pub fn is_correlation(self) -> bool {
        matches!(self, Observable::G2_1 | Observable::G2_2 | Observable::G2Out)
    }

    pub fn extract(self, r: &CorrelationReport) -> Option<f64> {
        match self {
            Observable::N1 => Some(r.n1),
            Observable::N2 => Some(r.n2),
            Observable::NOut => Some(r.n_out),
            Observable::G2_1 => r.g2_1,
            Observable::G2_2 => r.g2_2,
            Observable::G2Out => r.g2_out,
        }
    }
}

fn default_cutoff() -> usize {
    DEFAULT_CUTOFF
}

fn default_outputs() -> Vec<Observable> {
    Observable::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub model: ModelKind,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub links: Vec<Link>,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<Observable>,
    /// Optional CSV destination used by the CLI.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl SweepSpec {
    pub fn new(model: ModelKind) -> Self {
        Self {
            model,
            params: BTreeMap::new(),
            axes: Vec::new(),
            links: Vec::new(),
            cutoff: DEFAULT_CUTOFF,
            outputs: default_outputs(),
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&text)
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.into(), value);
        self
    }

    pub fn axis(mut self, axis: Axis) -> Self {
        self.axes.push(axis);
        self
    }

    pub fn link(mut self, link: Link) -> Self {
        self.links.push(link);
        self
    }

    pub fn cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.cutoff < 1 {
            return bad("cutoff must be >= 1".into());
        }
        if self.axes.len() > 2 {
            return bad(format!("at most two axes are supported, got {}", self.axes.len()));
        }
        if self.outputs.is_empty() {
            return bad("outputs must not be empty".into());
        }
        let names = param_names(self.model);
        let known = |n: &str| names.contains(&n);
        for name in self.params.keys() {
            if !known(name) {
                return bad(format!("unknown {} parameter {name:?}", self.model.as_str()));
            }
        }
        for (i, axis) in self.axes.iter().enumerate() {
            if !known(&axis.param) {
                return bad(format!("unknown axis parameter {:?}", axis.param));
            }
            if self.axes[..i].iter().any(|a| a.param == axis.param) {
                return bad(format!("axis {:?} appears twice", axis.param));
            }
            if axis.points < 2 {
                return bad(format!("axis {:?} needs at least 2 points", axis.param));
            }
            if !axis.start.is_finite() || !axis.stop.is_finite() {
                return bad(format!("axis {:?} has non-finite endpoints", axis.param));
            }
            if axis.scale == Scale::Log && !(axis.start > 0.0 && axis.stop > 0.0) {
                return bad(format!("log axis {:?} needs positive endpoints", axis.param));
            }
        }
        for link in &self.links {
            if !known(&link.param) || !known(&link.source) {
                return bad(format!("unknown parameter in link {link:?}"));
            }
            if !link.factor.is_finite() || !link.offset.is_finite() {
                return bad(format!("non-finite link {link:?}"));
            }
        }
        // The fixed parameters alone must form a valid model.
        self.resolve(&[]).map(|_| ()).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn grid_size(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    /// Axis coordinates of grid point `index`, first axis outermost.
    pub fn coordinates(&self, index: usize) -> Vec<f64> {
        let mut rem = index;
        let mut coords = vec![0.0; self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            let i = rem % axis.points;
            rem /= axis.points;
            coords[k] = axis.values()[i];
        }
        coords
    }

    /// Parameters at the given axis coordinates, with links applied.
    pub fn resolve(&self, coords: &[f64]) -> Result<ModelParams> {
        let mut assigned: BTreeMap<&str, f64> = self.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        for (axis, &v) in self.axes.iter().zip(coords) {
            assigned.insert(&axis.param, v);
        }
        let base = self.apply(&assigned)?;
        for link in &self.links {
            let source = match assigned.get(link.source.as_str()) {
                Some(&v) => v,
                None => get_param(&self.apply(&assigned)?, &link.source)?,
            };
            assigned.insert(&link.param, link.factor * source + link.offset);
        }
        let params = if self.links.is_empty() { base } else { self.apply(&assigned)? };
        params.validate()?;
        Ok(params)
    }

    fn apply(&self, assigned: &BTreeMap<&str, f64>) -> Result<ModelParams> {
        let mut params = match self.model {
            ModelKind::Kerr => ModelParams::Kerr(KerrParams::default()),
            ModelKind::Jc => ModelParams::Jc(JcParams::default()),
        };
        for (&name, &value) in assigned.iter().filter(|(n, _)| **n != "delta") {
            set_param(&mut params, name, value)?;
        }
        if let Some(&delta) = assigned.get("delta") {
            set_param(&mut params, "delta", delta)?;
        }
        if let ModelParams::Jc(p) = &mut params {
            if !assigned.contains_key("delta_a") {
                p.delta_a = p.delta1;
            }
        }
        Ok(params)
    }

    /// Columns written before the observables: axes, then linked parameters.
    pub fn parameter_columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = self.axes.iter().map(|a| a.param.clone()).collect();
        for link in &self.links {
            if !cols.contains(&link.param) {
                cols.push(link.param.clone());
            }
        }
        cols
    }
}

const KERR_PARAMS: [&str; 9] = ["delta1", "delta2", "delta", "u", "eps", "kappa", "kappa1", "kappa2", "phi"];
const JC_PARAMS: [&str; 10] =
    ["delta1", "delta_a", "delta2", "g", "eps", "kappa", "kappa1", "kappa2", "kappa_a", "phi"];

pub fn param_names(kind: ModelKind) -> &'static [&'static str] {
    match kind {
        ModelKind::Kerr => &KERR_PARAMS,
        ModelKind::Jc => &JC_PARAMS,
    }
}

/// Set one named parameter. `kappa` sets both cavity rates; `delta` sets
/// `delta2 = delta1 + delta` (Kerr only).
pub fn set_param(params: &mut ModelParams, name: &str, value: f64) -> Result<()> {
    let unknown = || Err(Error::InvalidConfig(format!("unknown parameter {name:?}")));
    match params {
        ModelParams::Kerr(p) => match name {
            "delta1" => p.delta1 = value,
            "delta2" => p.delta2 = value,
            "delta" => p.set_delta(value),
            "u" => p.u = value,
            "eps" => p.eps = value,
            "kappa" => (p.kappa1, p.kappa2) = (value, value),
            "kappa1" => p.kappa1 = value,
            "kappa2" => p.kappa2 = value,
            "phi" => p.phi = value,
            _ => return unknown(),
        },
        ModelParams::Jc(p) => match name {
            "delta1" => p.delta1 = value,
            "delta_a" => p.delta_a = value,
            "delta2" => p.delta2 = value,
            "g" => p.g = value,
            "eps" => p.eps = value,
            "kappa" => (p.kappa1, p.kappa2) = (value, value),
            "kappa1" => p.kappa1 = value,
            "kappa2" => p.kappa2 = value,
            "kappa_a" => p.kappa_a = value,
            "phi" => p.phi = value,
            _ => return unknown(),
        },
    }
    Ok(())
}

pub fn get_param(params: &ModelParams, name: &str) -> Result<f64> {
    let v = match (params, name) {
        (ModelParams::Kerr(p), "delta1") => p.delta1,
        (ModelParams::Kerr(p), "delta2") => p.delta2,
        (ModelParams::Kerr(p), "delta") => p.delta(),
        (ModelParams::Kerr(p), "u") => p.u,
        (ModelParams::Kerr(p), "eps") => p.eps,
        (ModelParams::Kerr(p), "kappa" | "kappa1") => p.kappa1,
        (ModelParams::Kerr(p), "kappa2") => p.kappa2,
        (ModelParams::Kerr(p), "phi") => p.phi,
        (ModelParams::Jc(p), "delta1") => p.delta1,
        (ModelParams::Jc(p), "delta_a") => p.delta_a,
        (ModelParams::Jc(p), "delta2") => p.delta2,
        (ModelParams::Jc(p), "g") => p.g,
        (ModelParams::Jc(p), "eps") => p.eps,
        (ModelParams::Jc(p), "kappa" | "kappa1") => p.kappa1,
        (ModelParams::Jc(p), "kappa2") => p.kappa2,
        (ModelParams::Jc(p), "kappa_a") => p.kappa_a,
        (ModelParams::Jc(p), "phi") => p.phi,
        _ => return Err(Error::InvalidConfig(format!("unknown parameter {name:?}"))),
    };
    Ok(v)
}

/// Steady state and statistics of one parameter point.
#[derive(Debug, Clone)]
pub struct PointReport {
    pub report: CorrelationReport,
    pub residual: f64,
}

/// Solve the master equation at `params` and evaluate all observables.
pub fn evaluate_point(params: &ModelParams, cutoff: usize) -> Result<PointReport> {
    let (space, steady) = solve_point(params, cutoff)?;
    let report = Correlator::new(&space)?.report(&steady.rho, &params.output_mix())?;
    Ok(PointReport { report, residual: steady.residual })
}

pub fn solve_point(params: &ModelParams, cutoff: usize) -> Result<(crate::hilbert::CompositeSpace, SteadyState)> {
    let space = params.space(cutoff)?;
    let l = build_liouvillian(&params.hamiltonian(&space)?, &params.channels(&space)?)?;
    Ok((space, solve_steady_state(&l)?))
}

/// Everything except the output phase, bitwise, as a cache key.
fn physics_key(params: &ModelParams) -> Vec<u64> {
    match params {
        ModelParams::Kerr(p) => {
            vec![0, p.delta1.to_bits(), p.delta2.to_bits(), p.u.to_bits(), p.eps.to_bits(), p.kappa1.to_bits(), p.kappa2.to_bits()]
        }
        ModelParams::Jc(p) => vec![
            1,
            p.delta1.to_bits(),
            p.delta_a.to_bits(),
            p.delta2.to_bits(),
            p.g.to_bits(),
            p.eps.to_bits(),
            p.kappa1.to_bits(),
            p.kappa2.to_bits(),
            p.kappa_a.to_bits(),
        ],
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub index: usize,
    /// Values of [`SweepSpec::parameter_columns`].
    pub params: Vec<f64>,
    pub outcome: std::result::Result<PointReport, String>,
}

impl SweepRow {
    pub fn status(&self, outputs: &[Observable]) -> String {
        match &self.outcome {
            Err(kind) => format!("failed:{kind}"),
            Ok(p) if outputs.iter().any(|o| o.extract(&p.report).is_none()) => UNDEFINED.to_string(),
            Ok(_) => "ok".to_string(),
        }
    }

    pub fn value(&self, observable: Observable) -> Option<f64> {
        self.outcome.as_ref().ok().and_then(|p| observable.extract(&p.report))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepMetadata {
    pub spec: SweepSpec,
    pub rows: usize,
    pub failed: usize,
    pub undefined: usize,
    pub solves: usize,
    pub max_residual: f64,
    pub residual_tolerance: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
    pub metadata: SweepMetadata,
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let started = Instant::now();
    let columns = spec.parameter_columns();
    let n = spec.grid_size();

    let points: Vec<(Vec<f64>, Result<ModelParams>)> = (0..n)
        .map(|i| {
            let coords = spec.coordinates(i);
            let params = spec.resolve(&coords);
            (coords, params)
        })
        .collect();

    // One steady-state solve per distinct physical point, in first-seen order.
    let mut groups: Vec<(Vec<u64>, ModelParams)> = Vec::new();
    let mut group_of: Vec<Option<usize>> = Vec::with_capacity(n);
    let mut lookup: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    for (_, params) in &points {
        group_of.push(params.as_ref().ok().map(|p| {
            let key = physics_key(p);
            *lookup.entry(key.clone()).or_insert_with(|| {
                groups.push((key, *p));
                groups.len() - 1
            })
        }));
    }
    let solved: Vec<Result<(Moments, f64)>> = groups
        .par_iter()
        .map(|(_, p)| {
            let (space, steady) = solve_point(p, spec.cutoff)?;
            Ok((Correlator::new(&space)?.moments(&steady.rho)?, steady.residual))
        })
        .collect();

    let rows: Vec<SweepRow> = points
        .into_iter()
        .enumerate()
        .map(|(index, (_, params))| {
            let outcome = match (params, group_of[index]) {
                (Ok(p), Some(g)) => match &solved[g] {
                    Ok((moments, residual)) => moments
                        .report(&p.output_mix())
                        .map(|report| PointReport { report, residual: *residual })
                        .map_err(|e| e.kind().to_string()),
                    Err(e) => Err(e.kind().to_string()),
                },
                (Err(e), _) => Err(e.kind().to_string()),
                (Ok(_), None) => unreachable!("valid points always have a group"),
            };
            let values = match &params_for_columns(spec, index) {
                Ok(v) => v.clone(),
                Err(_) => vec![f64::NAN; columns.len()],
            };
            SweepRow { index, params: values, outcome }
        })
        .collect();

    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    if failed == rows.len() {
        let first = rows.first().and_then(|r| r.outcome.as_ref().err()).cloned().unwrap_or_default();
        return Err(Error::Sweep(format!("all {failed} grid points failed (first: {first})")));
    }
    let undefined = rows.iter().filter(|r| r.status(&spec.outputs) == UNDEFINED).count();
    let max_residual = rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().map(|p| p.residual))
        .fold(0.0, f64::max);
    let metadata = SweepMetadata {
        spec: spec.clone(),
        rows: rows.len(),
        failed,
        undefined,
        solves: groups.len(),
        max_residual,
        residual_tolerance: crate::liouville::STEADY_RESIDUAL_TOL,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    Ok(SweepResult { spec: spec.clone(), columns, rows, metadata })
}

fn params_for_columns(spec: &SweepSpec, index: usize) -> Result<Vec<f64>> {
    let coords = spec.coordinates(index);
    let params = spec.resolve(&coords)?;
    let mut values = coords;
    for link in &spec.links {
        if !spec.axes.iter().any(|a| a.param == link.param) {
            values.push(get_param(&params, &link.param)?);
        }
    }
    Ok(values)
}

pub fn metadata_path(csv_path: &Path) -> std::path::PathBuf {
    csv_path.with_extension("meta.json")
}

/// Twelve significant digits; never NaN or infinite in the output.
pub fn format_value(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.11e}"),
        _ => UNDEFINED.to_string(),
    }
}

impl SweepResult {
    pub fn header(&self) -> Vec<String> {
        let mut header = self.columns.clone();
        header.extend(self.spec.outputs.iter().map(|o| o.name().to_string()));
        header.push("residual".into());
        header.push("status".into());
        header
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for row in &self.rows {
            let mut record: Vec<String> = row.params.iter().map(|&v| format_value(Some(v))).collect();
            record.extend(self.spec.outputs.iter().map(|&o| format_value(row.value(o))));
            record.push(format_value(row.outcome.as_ref().ok().map(|p| p.residual)));
            record.push(row.status(&self.spec.outputs));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn metadata_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.metadata)?)
    }

    /// Writes the CSV and its metadata as `<stem>.meta.json` alongside.
    pub fn save(&self, csv_path: impl AsRef<Path>) -> Result<()> {
        let csv_path = csv_path.as_ref();
        self.write_csv(std::fs::File::create(csv_path)?)?;
        std::fs::write(metadata_path(csv_path), self.metadata_json()?)?;
        Ok(())
    }

    /// `(x, y)` pairs where both are defined, from a parameter column and an observable.
    pub fn series(&self, x: &str, y: Observable) -> Result<Vec<(f64, f64)>> {
        let col = self
            .columns
            .iter()
            .position(|c| c == x)
            .ok_or_else(|| Error::Fit(format!("no parameter column {x:?}")))?;
        Ok(self.rows.iter().filter_map(|r| r.value(y).map(|v| (r.params[col], v))).collect())
    }
}

/// Least-squares line through `(log10 x, log10 y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub points: usize,
}

pub fn fit_loglog(points: &[(f64, f64)]) -> Result<SlopeFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let n = logs.len();
    if n < 4 {
        return Err(Error::Fit(format!("need at least 4 positive points, got {n}")));
    }
    let nf = n as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("x values are all equal".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (sse / (nf - 2.0) / sxx).sqrt();
    Ok(SlopeFit { slope, intercept, stderr, points: n })
}

/// Log-log slope of observable `y` against parameter column `x`.
pub fn fit_slope(result: &SweepResult, x: &str, y: Observable) -> Result<SlopeFit> {
    fit_loglog(&result.series(x, y)?)
}

/// Log-log slope between two columns of a CSV written by [`SweepResult::write_csv`].
pub fn fit_slope_csv(path: impl AsRef<Path>, x: &str, y: &str) -> Result<SlopeFit> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Fit(format!("no column {name:?}")))
    };
    let (xi, yi) = (find(x)?, find(y)?);
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record?;
        if let (Ok(xv), Ok(yv)) = (record[xi].parse::<f64>(), record[yi].parse::<f64>()) {
            points.push((xv, yv));
        }
    }
    fit_loglog(&points)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub cutoff: usize,
    pub sampled: Vec<usize>,
    /// Largest relative change per observable between `cutoff` and `cutoff + 1`.
    pub max_relative_change: BTreeMap<String, f64>,
    pub threshold: f64,
    pub converged: bool,
}

fn relative_change(a: Option<f64>, b: Option<f64>) -> f64 {
    match (a, b) {
        (None, None) => 0.0,
        (Some(x), Some(y)) if x == y => 0.0,
        (Some(x), Some(y)) => (x - y).abs() / x.abs().max(y.abs()),
        _ => f64::INFINITY,
    }
}

/// Re-solve up to five evenly spread grid points at `cutoff + 1`.
pub fn convergence_check(spec: &SweepSpec) -> Result<ConvergenceReport> {
    spec.validate()?;
    let n = spec.grid_size();
    let mut sampled: Vec<usize> = (0..5).map(|k| k * (n - 1) / 4).collect();
    sampled.dedup();
    let mut worst: BTreeMap<String, f64> = spec.outputs.iter().map(|o| (o.name().to_string(), 0.0)).collect();
    for &index in &sampled {
        let params = spec.resolve(&spec.coordinates(index))?;
        let coarse = evaluate_point(&params, spec.cutoff)?;
        let fine = evaluate_point(&params, spec.cutoff + 1)?;
        for &o in &spec.outputs {
            let change = relative_change(o.extract(&coarse.report), o.extract(&fine.report));
            let entry = worst.get_mut(o.name()).expect("initialized");
            *entry = entry.max(change);
        }
    }
    let converged = worst.values().all(|&c| c < CONVERGENCE_TOL);
    Ok(ConvergenceReport { cutoff: spec.cutoff, sampled, max_relative_change: worst, threshold: CONVERGENCE_TOL, converged })
}

/// Golden-section minimum of `f` on `[lo, hi]`.
pub fn golden_minimum(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// Empirical minimum of one observable along a single-axis sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Minimum {
    pub position: f64,
    pub value: f64,
}

/// Grid argmin of `observable`, refined by golden section between the
/// neighbouring grid points.
pub fn locate_minimum(result: &SweepResult, observable: Observable) -> Result<Minimum> {
    let spec = &result.spec;
    if spec.axes.len() != 1 {
        return Err(Error::InvalidArgument("minimum search needs a single-axis sweep".into()));
    }
    let axis = &spec.axes[0];
    let values = axis.values();
    let (best, _) = result
        .rows
        .iter()
        .filter_map(|r| r.value(observable).map(|v| (r.index, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::InvalidArgument(format!("{} is undefined everywhere", observable.name())))?;
    let lo = values[best.saturating_sub(1)];
    let hi = values[(best + 1).min(values.len() - 1)];
    let eval = |x: f64| -> Result<f64> {
        let params = spec.resolve(&[x])?;
        let point = evaluate_point(&params, spec.cutoff)?;
        observable
            .extract(&point.report)
            .ok_or_else(|| Error::UndefinedCorrelation(format!("{} undefined at {x}", observable.name())))
    };
    let tol = 1e-6 * (hi - lo).abs().max(f64::MIN_POSITIVE);
    let (position, value) = golden_minimum(eval, lo.min(hi), lo.max(hi), tol)?;
    Ok(Minimum { position, value })
}

/// Axis positions where `a` and `b` cross, by linear interpolation of
/// `log10(a / b)` between grid points.
pub fn crossings(result: &SweepResult, a: Observable, b: Observable) -> Result<Vec<f64>> {
    if result.spec.axes.len() != 1 {
        return Err(Error::InvalidArgument("crossing search needs a single-axis sweep".into()));
    }
    let values = result.spec.axes[0].values();
    let log_ratio: Vec<Option<f64>> = result
        .rows
        .iter()
        .map(|r| match (r.value(a), r.value(b)) {
            (Some(x), Some(y)) if x > 0.0 && y > 0.0 => Some((x / y).log10()),
            _ => None,
        })
        .collect();
    let mut out = Vec::new();
    for i in 1..values.len() {
        if let (Some(l0), Some(l1)) = (log_ratio[i - 1], log_ratio[i]) {
            if (l0 < 0.0) != (l1 < 0.0) {
                let t = l0 / (l0 - l1);
                out.push(values[i - 1] + t * (values[i] - values[i - 1]));
            }
        }
    }
    Ok(out)
}
