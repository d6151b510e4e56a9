use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::ValueEnum;
use grandamalgam::{
    acn_tail, amalgam_norm, control_curve, dual_amalgam_upper, grand_norm, grand_seq_norm, phi,
    run_suite, small_norm_upper, tally, vanishing_functional, CheckReport, Decomposition, Error, EvalPath,
    FunctionExpr, GrandExponent, LocalNorm, MeasureSpace, NormValue, Verdict, Window,
};
use log::info;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::error::{CliError, CliResult};
use crate::output::{file_stem, fmt_f64, fmt_norm, fmt_opt, write_json, Table};

/// Settings shared by all verbs.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: ExperimentConfig,
    pub out: PathBuf,
    pub require_finite: bool,
}

impl Context {
    pub fn new(config: ExperimentConfig, out: Option<PathBuf>, require_finite: bool) -> Self {
        let out = out.unwrap_or_else(|| config.out.clone());
        Self { config, out, require_finite }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn finite_or_fail(&self, what: &str, infinite: bool) -> CliResult<()> {
        if self.require_finite && infinite {
            Err(CliError::Divergent(what.to_string()))
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Space {
    Grand,
    Sequence,
    Amalgam,
    SmallUpper,
    DualUpper,
}

/// Command-line replacements for the configured exponents.
#[derive(Debug, Clone, Copy, Default)]
pub struct Exponents {
    pub p: Option<f64>,
    pub theta: Option<f64>,
    pub q: Option<f64>,
    pub theta2: Option<f64>,
}

impl Exponents {
    fn resolve(&self, cfg: &ExperimentConfig) -> CliResult<(GrandExponent, GrandExponent)> {
        let (l, o) = (cfg.suite.local, cfg.suite.outer);
        let local = GrandExponent::new(self.p.unwrap_or(l.p), self.theta.unwrap_or(l.theta))
            .map_err(|e| CliError::config(e.to_string()))?;
        let outer = GrandExponent::new(self.q.unwrap_or(o.p), self.theta2.unwrap_or(o.theta))
            .map_err(|e| CliError::config(e.to_string()))?;
        Ok((local, outer))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormRecord {
    pub schema_version: u32,
    pub function: String,
    pub space: Space,
    pub local: GrandExponent,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer: Option<GrandExponent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    pub omega: MeasureSpace,
    pub value: NormValue,
    pub argmax_eps: Option<f64>,
    pub error_estimate: Option<f64>,
    pub path: Option<EvalPath>,
}

/// An upper bound that cannot be formed for unbounded data is `+∞`.
fn bound_or_inf(r: grandamalgam::Result<f64>) -> CliResult<f64> {
    match r {
        Ok(v) => Ok(v),
        Err(Error::UnboundedIntegrand(_) | Error::DivergentIntegral { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e.into()),
    }
}

pub fn norm(ctx: &Context, name: &str, space: Space, exps: Exponents) -> CliResult<NormRecord> {
    let cfg = &ctx.config;
    let suite = &cfg.suite;
    let (local, outer) = exps.resolve(cfg)?;
    let opts = &suite.options;
    let mut rec = NormRecord {
        schema_version: SCHEMA_VERSION,
        function: name.to_string(),
        space,
        local,
        outer: None,
        window: None,
        omega: suite.omega,
        value: NormValue::Finite(0.0),
        argmax_eps: None,
        error_estimate: None,
        path: None,
    };
    let set = |rec: &mut NormRecord, o: grandamalgam::NormOutcome| {
        rec.value = o.value;
        rec.argmax_eps = o.argmax_eps;
        rec.error_estimate = Some(o.error_estimate);
        rec.path = Some(o.path);
    };
    match space {
        Space::Sequence => {
            let u = cfg.sequence(name)?;
            set(&mut rec, grand_seq_norm(u, &local, &opts.norm.sweep)?);
        }
        Space::Grand => {
            let f = cfg.function(name)?;
            set(&mut rec, grand_norm(f, &local, &suite.omega.region(), &opts.norm)?);
        }
        Space::Amalgam => {
            let f = cfg.function(name)?;
            rec.outer = Some(outer);
            rec.window = Some(suite.window);
            set(&mut rec, amalgam_norm(f, &local, &outer, &suite.window, &suite.omega, opts)?.outcome);
        }
        Space::SmallUpper => {
            let f = cfg.function(name)?;
            let d = Decomposition::single(f);
            rec.value = NormValue::from_f64(bound_or_inf(small_norm_upper(&local, &suite.omega.region(), &d, &opts.norm))?);
        }
        Space::DualUpper => {
            let f = cfg.function(name)?;
            rec.outer = Some(outer);
            rec.window = Some(suite.window);
            rec.value = NormValue::from_f64(bound_or_inf(dual_amalgam_upper(
                f,
                &local,
                &outer,
                &suite.window,
                &suite.omega,
                opts,
            ))?);
        }
    }
    let label = space.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    write_json(&ctx.path(&format!("norm-{}-{label}.json", file_stem(name))), &rec)?;
    Ok(rec)
}

/// The `--require-finite` check of a norm record.
pub fn require_finite_norm(ctx: &Context, rec: &NormRecord) -> CliResult<()> {
    ctx.finite_or_fail(&format!("norm of {} is +inf", rec.function), !rec.value.is_finite())
}

/// Text printed by the `norm` verb.
pub fn render_norm(rec: &NormRecord) -> String {
    let path = match rec.path {
        Some(EvalPath::ClosedForm) => "closed_form",
        Some(EvalPath::Quadrature) => "quadrature",
        None => "",
    };
    format!(
        "value {}\nargmax_eps {}\nerror_estimate {}\npath {}\n",
        fmt_norm(rec.value),
        fmt_opt(rec.argmax_eps),
        fmt_opt(rec.error_estimate),
        path
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub schema_version: u32,
    pub claims: Option<Vec<String>>,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
    pub reports: Vec<CheckReport>,
}

pub const VERIFY_JSON: &str = "verify.json";
pub const VERIFY_CSV: &str = "verify.csv";

/// Runs the claim suite and writes `verify.json` and `verify.csv`.
pub fn verify(ctx: &Context, claims: Option<Vec<String>>) -> CliResult<VerifySummary> {
    let claims = claims.or_else(|| ctx.config.claims.clone());
    if let Some(c) = &claims {
        crate::config::check_claims(c)?;
    }
    let reports = run_suite(&ctx.config.suite, claims.as_deref())?;
    let (passed, failed, inconclusive) = tally(&reports);
    info!("verify: {passed} passed, {failed} failed, {inconclusive} inconclusive");

    let mut table = Table::new(&["claim", "subject", "verdict", "margin"]);
    for r in &reports {
        table.push(vec![r.claim.clone(), r.subject.clone(), r.verdict.to_string(), fmt_opt(r.margin)]);
    }
    let summary = VerifySummary { schema_version: SCHEMA_VERSION, claims, passed, failed, inconclusive, reports };
    write_json(&ctx.path(VERIFY_JSON), &summary)?;
    table.write(&ctx.path(VERIFY_CSV))?;
    Ok(summary)
}

pub fn render_verify(s: &VerifySummary) -> String {
    let mut out = String::new();
    for r in &s.reports {
        out.push_str(&format!("{:<6} {:<13} {:<24} {}", r.verdict, r.claim, r.subject, fmt_opt(r.margin)));
        if let (Verdict::Fail | Verdict::Inconclusive, Some(note)) = (r.verdict, &r.note) {
            out.push_str(&format!("  ({note})"));
        }
        out.push('\n');
    }
    out.push_str(&format!("passed {} failed {} inconclusive {}\n", s.passed, s.failed, s.inconclusive));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    P,
    Q,
    Theta,
    A,
    Eps,
    WindowWidth,
}

impl Axis {
    pub fn column(&self) -> &'static str {
        match self {
            Axis::P => "p",
            Axis::Q => "q",
            Axis::Theta => "theta",
            Axis::A => "a",
            Axis::Eps => "eps",
            Axis::WindowWidth => "window_width",
        }
    }

    /// Quantities computed at each grid point.
    pub fn quantities(&self) -> &'static [&'static str] {
        match self {
            Axis::P | Axis::Theta => &["grand", "amalgam"],
            Axis::Q | Axis::WindowWidth => &["amalgam"],
            Axis::A => &["tail"],
            Axis::Eps => &["phi", "vanish"],
        }
    }

    fn grid<'a>(&self, cfg: &'a ExperimentConfig) -> &'a [f64] {
        let g = &cfg.sweep;
        match self {
            Axis::P => &g.p,
            Axis::Q => &g.q,
            Axis::Theta => &g.theta,
            Axis::A => &g.a,
            Axis::Eps => &g.eps,
            Axis::WindowWidth => &g.window_width,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    /// Quantities that evaluated.
    pub quantities: BTreeMap<String, NormValue>,
    /// Messages of the quantities that failed.
    pub errors: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub schema_version: u32,
    pub axis: Axis,
    pub function: String,
    pub rows: Vec<SweepRow>,
}

fn sweep_point(cfg: &ExperimentConfig, f: &FunctionExpr, axis: Axis, v: f64) -> Vec<grandamalgam::Result<NormValue>> {
    let s = &cfg.suite;
    let opts = &s.options;
    let region = s.omega.region();
    let amalgam = |local: GrandExponent, outer: GrandExponent, window: &Window| {
        amalgam_norm(f, &local, &outer, window, &s.omega, opts).map(|o| o.value())
    };
    match axis {
        Axis::P => {
            let local = GrandExponent::new(v, s.local.theta);
            vec![
                local.clone().and_then(|g| grand_norm(f, &g, &region, &opts.norm).map(|o| o.value)),
                local.and_then(|g| amalgam(g, s.outer, &s.window)),
            ]
        }
        Axis::Q => vec![GrandExponent::new(v, s.outer.theta).and_then(|g| amalgam(s.local, g, &s.window))],
        Axis::Theta => {
            let local = GrandExponent::new(s.local.p, v);
            let outer = GrandExponent::new(s.outer.p, v);
            vec![
                local.clone().and_then(|g| grand_norm(f, &g, &region, &opts.norm).map(|o| o.value)),
                local.and_then(|l| outer.and_then(|o| amalgam(l, o, &s.window))),
            ]
        }
        Axis::A => vec![acn_tail(f, &s.local, &s.outer, &s.omega, &[v], s.window.mode, opts).map(|t| t[0].1)],
        Axis::Eps => vec![
            phi(f, &s.local, &region, v, &opts.norm),
            vanishing_functional(f, &s.local, &s.outer, &s.window, &s.omega, &[v], opts).map(|t| t[0].1),
        ],
        Axis::WindowWidth => {
            vec![Window::new(s.window.offset, v, s.window.mode).and_then(|w| amalgam(s.local, s.outer, &w))]
        }
    }
}

/// One row per grid point, in grid order. Failures are recorded per cell and
/// never stop the sweep.
pub fn sweep(ctx: &Context, axis: Axis, function: Option<&str>) -> CliResult<SweepRecord> {
    let cfg = &ctx.config;
    let name = function.unwrap_or(&cfg.sweep.function);
    let f = cfg.function(name)?;
    let grid = axis.grid(cfg);
    info!("sweep {}: {} points for {name}", axis.column(), grid.len());
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&v| {
            let mut row = SweepRow { value: v, quantities: BTreeMap::new(), errors: BTreeMap::new() };
            for (q, r) in axis.quantities().iter().zip(sweep_point(cfg, f, axis, v)) {
                match r {
                    Ok(x) => {
                        row.quantities.insert(q.to_string(), x);
                    }
                    Err(e) => {
                        row.errors.insert(q.to_string(), e.to_string());
                    }
                }
            }
            row
        })
        .collect();

    let mut columns = vec![axis.column().to_string()];
    for q in axis.quantities() {
        columns.push(q.to_string());
        columns.push(format!("{q}_error"));
    }
    let mut table = Table::new(&columns);
    for row in &rows {
        let mut cells = vec![fmt_f64(row.value)];
        for q in axis.quantities() {
            cells.push(row.quantities.get(*q).map(|v| fmt_norm(*v)).unwrap_or_default());
            cells.push(row.errors.get(*q).cloned().unwrap_or_default());
        }
        table.push(cells);
    }
    let stem = format!("sweep-{}-{}", axis.column(), file_stem(name));
    let record = SweepRecord { schema_version: SCHEMA_VERSION, axis, function: name.to_string(), rows };
    table.write(&ctx.path(&format!("{stem}.csv")))?;
    write_json(&ctx.path(&format!("{stem}.json")), &record)?;
    let infinite = record.rows.iter().flat_map(|r| r.quantities.values()).any(|v| !v.is_finite());
    ctx.finite_or_fail(&format!("sweep over {} has +inf entries", axis.column()), infinite)?;
    Ok(record)
}

/// Writes the control function `x, F(x), argmax ε` of `name` as CSV and
/// returns the file path.
pub fn export_curve(ctx: &Context, name: &str) -> CliResult<PathBuf> {
    let cfg = &ctx.config;
    let s = &cfg.suite;
    let f = cfg.function(name)?;
    let curve = control_curve(f, &LocalNorm::grand(s.local), &s.window, &s.omega, s.options.x_points, &s.options.norm)?;
    let mut table = Table::new(&["x", "F", "argmax_eps"]);
    for (x, o) in curve.x.iter().zip(&curve.samples) {
        table.push(vec![fmt_f64(*x), fmt_norm(o.value), fmt_opt(o.argmax_eps)]);
    }
    let path = ctx.path(&format!("curve-{}.csv", file_stem(name)));
    table.write(&path)?;
    let infinite = curve.samples.iter().any(|o| !o.value.is_finite());
    ctx.finite_or_fail(&format!("control function of {name} takes the value +inf"), infinite)?;
    Ok(path)
}
