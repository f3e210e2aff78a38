//! Command implementations. Each returns a table and, for single reports, a
//! JSON document.

use serde_json::{json, Map, Value};
use slice_fock::approx::{
    best_approx, best_approx_first, best_approx_lp, best_approx_second, modulus, vdp_constant, BestApproxResult,
    ModulusQuery,
};
use slice_fock::config::OperatorSpec;
use slice_fock::fock::{default_radii, norm, norm_value, order_type, Kind, NormSpec};
use slice_fock::kernel::fit_with_sections;
use slice_fock::{FockError, Result, SliceSeries};

use crate::config::{Command, ExperimentConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(usize),
    Num(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(v) => json!(v.to_string()),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<Option<usize>> for Cell {
    fn from(v: Option<usize>) -> Self {
        v.map_or(Cell::Empty, Cell::Int)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub document: Option<Value>,
}

impl Output {
    fn table(header: Vec<&'static str>) -> Self {
        Output {
            header,
            rows: Vec::new(),
            document: None,
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| FockError::Io(std::io::Error::other(e));
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| FockError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> String {
        let doc = self.document.clone().unwrap_or_else(|| {
            Value::Array(
                self.rows
                    .iter()
                    .map(|row| {
                        let m: Map<String, Value> = self
                            .header
                            .iter()
                            .zip(row)
                            .map(|(h, c)| (h.to_string(), c.to_json()))
                            .collect();
                        Value::Object(m)
                    })
                    .collect(),
            )
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
        s.push('\n');
        s
    }
}

fn function(c: &ExperimentConfig) -> Result<SliceSeries> {
    c.function
        .as_ref()
        .ok_or_else(|| FockError::Parse("missing function".into()))?
        .build()
}

fn norm_spec(c: &ExperimentConfig) -> Result<NormSpec> {
    let spec = NormSpec {
        kind: c.kind,
        p: c.p,
        alpha: c.alpha,
        slice: c.slice.choice()?,
        quad: c.quad_settings(),
    };
    spec.validate()?;
    Ok(spec)
}

pub fn run(c: &ExperimentConfig) -> Result<Output> {
    c.validate()?;
    match c.command {
        Command::Norm => cmd_norm(c),
        Command::Converge => cmd_converge(c),
        Command::Multipliers => cmd_multipliers(c),
        Command::Smoothness => cmd_smoothness(c),
        Command::Bestapprox => cmd_bestapprox(c),
        Command::Growth => cmd_growth(c),
        Command::KernelFit => cmd_kernel_fit(c),
    }
}

fn cmd_norm(c: &ExperimentConfig) -> Result<Output> {
    let f = function(c)?;
    let r = norm(&f, &norm_spec(c)?)?;
    let mut out = Output::table(vec![
        "kind", "p", "alpha", "slice", "value", "tail_bound", "radial", "angular", "sphere",
    ]);
    out.rows.push(vec![
        Cell::Text(r.kind.to_string()),
        r.p.into(),
        r.alpha.into(),
        Cell::Text(r.slice.clone()),
        r.value.into(),
        r.tail_bound.into(),
        r.grid.radial.into(),
        r.grid.angular.into(),
        r.grid.sphere.into(),
    ]);
    out.document = Some(serde_json::to_value(&r).expect("report serializes"));
    Ok(out)
}

fn sweep(c: &ExperimentConfig, op: &OperatorSpec) -> Vec<usize> {
    if c.n.is_empty() {
        vec![op.n()]
    } else {
        c.n.clone()
    }
}

fn cmd_converge(c: &ExperimentConfig) -> Result<Output> {
    let f = function(c)?;
    let spec = norm_spec(c)?;
    let unit = c.slice.unit()?;
    let base = c.operator.expect("validated");
    let mut out = Output::table(vec!["n", "error", "bound", "slack", "ratio"]);
    for n in sweep(c, &base) {
        let os = base.with_n(n);
        let op = os.build(c.p)?;
        let error = norm_value(&op.apply(&f).sub(&f)?, &spec)?;
        let second = c.kind == Kind::Second;
        let (bound, slack, ratio) = match os {
            OperatorSpec::Vdp(_) if second => {
                let e = best_approx(&f, n, c.p, c.alpha, unit, &spec.quad)?.value;
                let b = vdp_constant(c.p) * e;
                (Some(b), Some(b - error), None)
            }
            OperatorSpec::Taylor(_) if second && c.p == 2.0 => {
                let b = best_approx_second(&f, n, c.alpha)?.value;
                (Some(b), Some(b - error), None)
            }
            OperatorSpec::Jackson { m, .. } if second => {
                let q = ModulusQuery {
                    h_grid: c.h_grid,
                    quad: spec.quad,
                    ..ModulusQuery::new(m + 1, 1.0 / n as f64, c.p, c.alpha, unit)
                };
                let w = modulus(&f, &q)?;
                (Some(w), None, (w > 0.0).then(|| error / w))
            }
            _ => (None, None, None),
        };
        out.rows.push(vec![n.into(), error.into(), bound.into(), slack.into(), ratio.into()]);
    }
    Ok(out)
}

fn cmd_multipliers(c: &ExperimentConfig) -> Result<Output> {
    let base = c.operator.expect("validated");
    let mut out = Output::table(vec!["k", "rho_k", "family", "n", "m", "r"]);
    for n in sweep(c, &base) {
        let op = base.with_n(n).build(c.p)?;
        let pv = op.provenance;
        for (k, rho) in op.rho.iter().enumerate() {
            out.rows.push(vec![
                k.into(),
                (*rho).into(),
                pv.family().into(),
                pv.n().into(),
                pv.m().into(),
                pv.r().into(),
            ]);
        }
    }
    Ok(out)
}

/// Step bounds used when none are given.
const DEFAULT_DELTAS: [f64; 5] = [0.05, 0.1, 0.2, 0.4, 0.8];

fn cmd_smoothness(c: &ExperimentConfig) -> Result<Output> {
    let f = function(c)?;
    let unit = c.slice.unit()?;
    let deltas = if c.delta.is_empty() { DEFAULT_DELTAS.to_vec() } else { c.delta.clone() };
    let mut out = Output::table(vec!["delta", "omega", "order", "h_grid"]);
    for d in deltas {
        let q = ModulusQuery {
            h_grid: c.h_grid,
            quad: c.quad_settings(),
            ..ModulusQuery::new(c.order, d, c.p, c.alpha, unit)
        };
        out.rows.push(vec![d.into(), modulus(&f, &q)?.into(), c.order.into(), c.h_grid.into()]);
    }
    Ok(out)
}

fn cmd_bestapprox(c: &ExperimentConfig) -> Result<Output> {
    let f = function(c)?;
    let unit = c.slice.unit()?;
    let quad = c.quad_settings();
    let ns = if c.n.is_empty() { vec![0, 1, 2, 4, 8] } else { c.n.clone() };
    let mut out = Output::table(vec!["n", "value", "method", "iterations"]);
    for n in ns {
        let r: BestApproxResult = match (c.kind, c.p == 2.0) {
            (Kind::First, true) => best_approx_first(&f, n, c.alpha, &quad)?,
            (Kind::First, false) => {
                return Err(FockError::Domain("first-kind best approximation needs p = 2".into()))
            }
            (Kind::Second, true) => best_approx_second(&f, n, c.alpha)?,
            (Kind::Second, false) => best_approx_lp(&f, n, c.p, c.alpha, unit, c.tol, &quad)?,
        };
        let method = serde_json::to_value(r.method).expect("method serializes");
        out.rows.push(vec![
            n.into(),
            r.value.into(),
            Cell::Text(method.as_str().unwrap_or_default().to_owned()),
            r.iterations.into(),
        ]);
    }
    Ok(out)
}

fn cmd_growth(c: &ExperimentConfig) -> Result<Output> {
    let f = function(c)?;
    let radii = if c.radii.is_empty() { default_radii() } else { c.radii.clone() };
    let r = order_type(&f, &radii)?;
    let mut out = Output::table(vec!["radius", "ln_max_modulus", "order", "type"]);
    for (rad, lm) in r.radii.iter().zip(&r.ln_max_modulus) {
        out.rows.push(vec![(*rad).into(), (*lm).into(), r.order.into(), r.type_estimate.into()]);
    }
    out.document = Some(serde_json::to_value(&r).expect("report serializes"));
    Ok(out)
}

fn cmd_kernel_fit(c: &ExperimentConfig) -> Result<Output> {
    let f = function(c)?;
    let centers = c.center_quaternions();
    let mut out = Output::table(vec!["centers", "residual"]);
    let mut last = None;
    for k in 1..=centers.len() {
        let fit = fit_with_sections(&f, &centers[..k], c.alpha)?;
        out.rows.push(vec![k.into(), fit.residual.into()]);
        last = Some(fit);
    }
    out.document = last.map(|fit| serde_json::to_value(&fit).expect("fit serializes"));
    Ok(out)
}
