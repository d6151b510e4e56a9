//! Claim-keyed verification suite.
//!
//! Every check computes both sides of an inequality, or the quantities behind
//! a dichotomy, and records the gap as a margin normalized by
//! `max(1, right side)`. A report passes when its margin is at least
//! `-TOLERANCE`; a missing margin never passes.

use std::collections::BTreeMap;

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::amalgam::{amalgam_norm, amalgam_norm_with, amalgam_norms, diagonal_ratio, AmalgamOptions, LocalNorm};
use crate::error::{Error, Result};
use crate::expr::{FunctionExpr, Side};
use crate::grandnorm::{conjugate, grand_norm, lebesgue_norm, GrandExponent, NormOptions, NormValue};
use crate::optimize::log_grid;
use crate::smalldual::{associate_upper_bound, pairing_integral};
use crate::space::{MeasureSpace, Region, Subinterval, Window, WindowMode};

/// Accepted normalized margin deficit.
pub const TOLERANCE: f64 = 1e-6;

/// Relative distance allowed between the top truncation rung and the norm.
pub const LADDER_TOLERANCE: f64 = 1e-4;

/// The last rung of the truncation ladder: the pointwise limit itself.
const LADDER_TOP: f64 = f64::INFINITY;

const DEFINITENESS_SAMPLES: usize = 10_000;

/// Upper threshold for `V(ε_min)` of bounded functions.
const VANISH_BOUNDED: f64 = 1e-2;

/// Lower threshold for `V(ε_min)` of the critical power.
const VANISH_WITNESS: f64 = 0.5;

/// Every claim id, in report order.
pub const CLAIMS: &[&str] = &[
    "C1.mono",
    "P1.chain",
    "P1.embed",
    "P1.eq5",
    "P1.strict",
    "P4.product",
    "P5.diag",
    "P6.vanish",
    "T10.acn",
    "T11.sandwich",
    "T2.window",
    "T3.P1",
    "T3.P2",
    "T3.P3",
    "T3.P4",
    "T3.P5",
    "T3.P6",
    "T3.P7",
    "T3.P8",
    "T7.holder",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub claim: String,
    /// What the claim was instantiated on, e.g. a corpus function name.
    pub subject: String,
    /// SHA-256 of the canonical JSON of the inputs.
    pub inputs_digest: String,
    pub quantities: BTreeMap<String, NormValue>,
    pub margin: Option<f64>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedFunction {
    pub name: String,
    pub expr: FunctionExpr,
}

impl NamedFunction {
    pub fn new(name: impl Into<String>, expr: FunctionExpr) -> Self {
        Self { name: name.into(), expr }
    }
}

/// The twelve-function corpus on `omega`; singularities sit at the left end.
pub fn default_corpus(omega: &MeasureSpace) -> Vec<NamedFunction> {
    let (a, b) = (omega.lower, omega.upper);
    let len = omega.mass();
    let mid = a + 0.5 * len;
    let ramp = FunctionExpr::power(1.0 / len, a, 1.0);
    vec![
        NamedFunction::new("zero", FunctionExpr::zero()),
        NamedFunction::new("one", FunctionExpr::one()),
        NamedFunction::new("ramp", ramp.clone()),
        NamedFunction::new("ramp-down", FunctionExpr::power(1.0 / len, b, 1.0)),
        NamedFunction::new("left-half", FunctionExpr::indicator(a, mid)),
        NamedFunction::new("right-half", FunctionExpr::indicator(mid, b)),
        NamedFunction::new("singular-half", FunctionExpr::power(1.0, a, -0.5)),
        NamedFunction::new("singular-third", FunctionExpr::power(1.0, a, -1.0 / 3.0)),
        NamedFunction::new(
            "truncated",
            FunctionExpr::truncate_above(1.0, FunctionExpr::scale(0.5, FunctionExpr::power(1.0, a, -0.5))),
        ),
        NamedFunction::new(
            "blend",
            FunctionExpr::sum(vec![
                FunctionExpr::scale(0.5, ramp),
                FunctionExpr::scale(0.5, FunctionExpr::indicator(mid, b)),
            ]),
        ),
        NamedFunction::new(
            "hump",
            FunctionExpr::product(vec![
                FunctionExpr::power(2.0 / len, a, 1.0),
                FunctionExpr::power(2.0 / len, b, 1.0),
            ]),
        ),
        NamedFunction::new(
            "spike",
            FunctionExpr::sum(vec![
                FunctionExpr::scale(0.5, FunctionExpr::power(1.0, a, -0.25)),
                FunctionExpr::constant(0.5),
            ]),
        ),
    ]
}

/// `{1, t, 1 − t, χ_left, χ_right, t^{−1/(2p)}}` on `omega`.
pub fn default_probes(omega: &MeasureSpace, p: f64) -> Vec<NamedFunction> {
    let (a, b) = (omega.lower, omega.upper);
    let len = omega.mass();
    let mid = a + 0.5 * len;
    vec![
        NamedFunction::new("one", FunctionExpr::one()),
        NamedFunction::new("ramp", FunctionExpr::power(1.0 / len, a, 1.0)),
        NamedFunction::new("ramp-down", FunctionExpr::power(1.0 / len, b, 1.0)),
        NamedFunction::new("left-half", FunctionExpr::indicator(a, mid)),
        NamedFunction::new("right-half", FunctionExpr::indicator(mid, b)),
        NamedFunction::new("root-singular", FunctionExpr::power(1.0, a, -1.0 / (2.0 * p))),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub omega: MeasureSpace,
    pub window: Window,
    /// Inner exponent `(p, θ₁)`.
    pub local: GrandExponent,
    /// Outer exponent `(q, θ₂)`.
    pub outer: GrandExponent,
    pub corpus: Vec<NamedFunction>,
    pub probes: Vec<NamedFunction>,
    pub options: AmalgamOptions,
    /// `λ` of the homogeneity check.
    pub scale_factor: f64,
    /// Finite truncation levels of the monotone-convergence ladder.
    pub ladder: Vec<f64>,
    /// Points per axis of the `(ε, η)` grid.
    pub chain_points: usize,
    pub eq5_p: Vec<f64>,
    pub eq5_theta: Vec<f64>,
    /// `(p, q, θ)` triples.
    pub strictness: Vec<[f64; 3]>,
    pub diagonal: Vec<GrandExponent>,
    /// Inner and outer exponents `[p₁, q₁]` of both factors in the product
    /// check; the product is measured at `[p₁/2, q₁/2]`.
    pub product_exponents: [f64; 2],
    /// Window widths as fractions of `|Ω|`.
    pub window_fractions: Vec<f64>,
    /// Descending.
    pub vanish_eps: Vec<f64>,
    /// Descending, in `(0, 1)`.
    pub acn_a: Vec<f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        let omega = MeasureSpace::unit();
        let g = GrandExponent { p: 2.0, theta: 1.0 };
        Self {
            omega,
            window: Window { offset: 0.0, width: 0.5, mode: WindowMode::Periodic },
            local: g,
            outer: g,
            corpus: default_corpus(&omega),
            probes: default_probes(&omega, g.p),
            options: AmalgamOptions::default(),
            scale_factor: 2.5,
            ladder: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            chain_points: 10,
            eq5_p: vec![1.5, 2.0, 3.0, 5.0],
            eq5_theta: vec![1.0, 2.0],
            strictness: vec![[2.0, 2.0, 1.0], [2.0, 1.5, 1.0], [2.0, 2.0, 2.0]],
            diagonal: vec![GrandExponent { p: 2.0, theta: 1.0 }, GrandExponent { p: 3.0, theta: 1.0 }],
            product_exponents: [2.5, 2.5],
            window_fractions: vec![0.25, 0.5, 1.0],
            vanish_eps: vec![1.0, 1e-1, 1e-2, 1e-3, 1e-4],
            acn_a: vec![0.1, 0.01, 0.001],
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        self.omega.validate()?;
        self.window.validate(&self.omega)?;
        self.local.validate()?;
        self.outer.validate()?;
        self.options.validate()?;
        if self.corpus.is_empty() {
            return Err(invalid("corpus is empty"));
        }
        for list in [&self.corpus, &self.probes] {
            let mut names: Vec<&str> = list.iter().map(|f| f.name.as_str()).collect();
            names.sort_unstable();
            if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
                return Err(invalid(format!("duplicate function name {:?}", w[0])));
            }
            for f in list {
                f.expr.validate(&self.omega)?;
            }
        }
        if !(self.scale_factor >= 0.0 && self.scale_factor.is_finite()) {
            return Err(invalid("scale_factor must be finite and nonnegative"));
        }
        if self.ladder.is_empty()
            || self.ladder.iter().any(|&n| !(n > 0.0 && n.is_finite()))
            || self.ladder.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(invalid("ladder must be a nonempty increasing list of positive levels"));
        }
        if self.chain_points < 2 {
            return Err(invalid("chain_points must be at least 2"));
        }
        for &p in &self.eq5_p {
            GrandExponent::new(p, 1.0)?;
        }
        for &theta in &self.eq5_theta {
            GrandExponent::new(2.0, theta)?;
        }
        for &[p, q, theta] in &self.strictness {
            GrandExponent::new(p, theta)?;
            GrandExponent::new(q, theta)?;
        }
        for g in &self.diagonal {
            g.validate()?;
        }
        if self.product_exponents.iter().any(|&r| !(r >= 2.0 && r.is_finite())) {
            return Err(invalid("product exponents must be finite and at least 2"));
        }
        if self.window_fractions.iter().any(|&w| !(w > 0.0 && w <= 1.0)) {
            return Err(invalid("window fractions must lie in (0, 1]"));
        }
        let eps_max = self.local.p.min(self.outer.p) - 1.0;
        if self.vanish_eps.is_empty()
            || self.vanish_eps.iter().any(|&e| !(e > 0.0 && e <= eps_max))
            || self.vanish_eps.windows(2).any(|w| w[0] <= w[1])
        {
            return Err(invalid(format!("vanish_eps must be descending in (0, {eps_max}]")));
        }
        if self.acn_a.is_empty()
            || self.acn_a.iter().any(|&a| !(a > 0.0 && a < 1.0))
            || self.acn_a.windows(2).any(|w| w[0] <= w[1])
        {
            return Err(invalid("acn_a must be descending in (0, 1)"));
        }
        Ok(())
    }
}

/// Whether `claim` is selected by `filter`: an item selects the claim with
/// that id and every claim below it (`"T3"` selects `"T3.P1"`).
pub fn claim_selected(claim: &str, filter: Option<&[String]>) -> bool {
    match filter {
        None => true,
        Some(items) => items.iter().any(|item| {
            claim == item || (claim.starts_with(item.as_str()) && claim[item.len()..].starts_with('.'))
        }),
    }
}

fn digest(value: &Value) -> String {
    let canonical = serde_json::to_string(value).expect("JSON values always serialize");
    format!("{:x}", Sha256::digest(canonical.as_bytes()))
}

fn leq(lhs: f64, rhs: f64) -> f64 {
    (rhs - lhs) / rhs.abs().max(1.0)
}

/// A report under construction.
struct Check {
    claim: &'static str,
    subject: String,
    inputs: Value,
    quantities: BTreeMap<String, NormValue>,
    note: Option<String>,
}

impl Check {
    fn new(claim: &'static str, subject: impl Into<String>, inputs: Value) -> Self {
        Self { claim, subject: subject.into(), inputs, quantities: BTreeMap::new(), note: None }
    }

    fn set(&mut self, key: impl Into<String>, v: f64) {
        self.quantities.insert(key.into(), NormValue::from_f64(v));
    }

    /// Records `v` and returns it when finite.
    fn need(&mut self, key: &str, v: NormValue) -> Option<f64> {
        self.quantities.insert(key.to_string(), v);
        if v.finite().is_none() {
            self.note = Some(format!("{key} is +inf"));
        }
        v.finite()
    }

    fn finish(self, outcome: Result<Option<f64>>) -> CheckReport {
        let mut note = self.note;
        let (margin, verdict) = match outcome {
            Ok(Some(m)) if m.is_finite() => (Some(m), if m >= -TOLERANCE { Verdict::Pass } else { Verdict::Fail }),
            Ok(Some(m)) if m == f64::NEG_INFINITY => {
                note.get_or_insert_with(|| "left side is +inf, right side finite".into());
                (None, Verdict::Fail)
            }
            Ok(Some(_)) => {
                note.get_or_insert_with(|| "right side is +inf".into());
                (None, Verdict::Inconclusive)
            }
            Ok(None) => (None, Verdict::Inconclusive),
            Err(e) => {
                note = Some(e.to_string());
                (None, Verdict::Inconclusive)
            }
        };
        let inputs_digest = digest(&json!({
            "claim": self.claim,
            "subject": self.subject,
            "inputs": self.inputs,
        }));
        CheckReport {
            claim: self.claim.to_string(),
            subject: self.subject,
            inputs_digest,
            quantities: self.quantities,
            margin,
            verdict,
            note,
        }
    }
}

fn run(mut check: Check, body: impl FnOnce(&mut Check) -> Result<Option<f64>>) -> CheckReport {
    let outcome = body(&mut check);
    debug!("{} [{}] done", check.claim, check.subject);
    check.finish(outcome)
}

fn bounded(f: &FunctionExpr, omega: &MeasureSpace) -> bool {
    f.bounded_on(&omega.interval()).is_ok()
}

/// The window restricted to the unit interval: the configured one when it
/// fits, otherwise all of it.
fn unit_window(window: &Window) -> Window {
    let unit = MeasureSpace::unit();
    if window.validate(&unit).is_ok() {
        *window
    } else {
        Window::whole(&unit, window.mode)
    }
}

fn subject(name: &str) -> String {
    name.to_string()
}

/// Shared norms computed once per suite.
struct Cache {
    base: Vec<Result<NormValue>>,
    probes: Vec<Result<NormValue>>,
    duals: Vec<Option<Result<f64>>>,
}

struct Suite<'a> {
    cfg: &'a SuiteConfig,
    cache: Cache,
}

impl<'a> Suite<'a> {
    fn amalgam(&self, f: &FunctionExpr) -> Result<NormValue> {
        let c = self.cfg;
        Ok(amalgam_norm(f, &c.local, &c.outer, &c.window, &c.omega, &c.options)?.value())
    }

    fn classical(&self, f: &FunctionExpr, r: f64, s: f64, q: &Window, omega: &MeasureSpace) -> Result<NormValue> {
        let c = self.cfg;
        Ok(amalgam_norm_with(f, &LocalNorm::lebesgue(r), &LocalNorm::lebesgue(s), q, omega, &c.options)?.value())
    }

    fn base_inputs(&self, f: &FunctionExpr) -> Value {
        let c = self.cfg;
        json!({
            "f": f,
            "local": c.local,
            "outer": c.outer,
            "window": c.window,
            "omega": c.omega,
            "options": c.options,
            "tolerance": TOLERANCE,
        })
    }

    fn base(&self, i: usize) -> Result<NormValue> {
        self.cache.base[i].clone()
    }

    // ---- Banach function space properties ----

    fn nonnegativity(&self, i: usize) -> CheckReport {
        let f = &self.cfg.corpus[i];
        run(Check::new("T3.P1", subject(&f.name), self.base_inputs(&f.expr)), |c| {
            let Some(n) = c.need("norm", self.base(i)?) else { return Ok(None) };
            Ok(Some(leq(0.0, n)))
        })
    }

    fn definiteness(&self, i: usize) -> CheckReport {
        let f = &self.cfg.corpus[i];
        let omega = self.cfg.omega;
        let mut inputs = self.base_inputs(&f.expr);
        inputs["samples"] = json!(DEFINITENESS_SAMPLES);
        run(Check::new("T3.P2", subject(&f.name), inputs), |c| {
            let Some(n) = c.need("norm", self.base(i)?) else { return Ok(None) };
            let h = omega.mass() / DEFINITENESS_SAMPLES as f64;
            let mut max = 0.0f64;
            for k in 0..DEFINITENESS_SAMPLES {
                let t = omega.lower + (k as f64 + 0.5) * h;
                max = max.max(match f.expr.evaluate(t) {
                    Ok(v) => v.abs(),
                    Err(Error::SingularPoint(_)) => f64::INFINITY,
                    Err(e) => return Err(e),
                });
            }
            c.set("sample_max", max);
            // a function that is nonzero on the sample needs a norm of at least TOLERANCE
            Ok(Some(if max > 0.0 { n - 2.0 * TOLERANCE } else { -n }))
        })
    }

    fn homogeneity(&self, i: usize) -> CheckReport {
        let f = &self.cfg.corpus[i];
        let lambda = self.cfg.scale_factor;
        let mut inputs = self.base_inputs(&f.expr);
        inputs["lambda"] = json!(lambda);
        run(Check::new("T3.P3", subject(&f.name), inputs), |c| {
            let Some(n) = c.need("norm", self.base(i)?) else { return Ok(None) };
            let Some(scaled) = c.need("scaled_norm", self.amalgam(&FunctionExpr::scale(lambda, f.expr.clone()))?)
            else {
                return Ok(None);
            };
            c.set("lambda_times_norm", lambda * n);
            Ok(Some(-(scaled - lambda * n).abs() / (lambda * n).max(1.0)))
        })
    }

    fn triangle(&self, i: usize) -> CheckReport {
        let corpus = &self.cfg.corpus;
        let j = (i + 1) % corpus.len();
        let (f, g) = (&corpus[i], &corpus[j]);
        let sum = FunctionExpr::sum(vec![f.expr.clone(), g.expr.clone()]);
        let mut inputs = self.base_inputs(&f.expr);
        inputs["g"] = json!(g.expr);
        run(Check::new("T3.P4", format!("{}+{}", f.name, g.name), inputs), |c| {
            let Some(nf) = c.need("norm_f", self.base(i)?) else { return Ok(None) };
            let Some(ng) = c.need("norm_g", self.base(j)?) else { return Ok(None) };
            let nsum = self.amalgam(&sum)?;
            c.set("norm_sum", nsum.as_f64());
            Ok(Some(leq(nsum.as_f64(), nf + ng)))
        })
    }

    fn solidity(&self, i: usize) -> CheckReport {
        let f = &self.cfg.corpus[i];
        let omega = self.cfg.omega;
        let len = omega.mass();
        let cut = FunctionExpr::indicator(omega.lower + 0.25 * len, omega.lower + 0.75 * len);
        let h = FunctionExpr::product(vec![f.expr.clone(), cut]);
        let mut inputs = self.base_inputs(&f.expr);
        inputs["h"] = json!(h);
        run(Check::new("T3.P5", subject(&f.name), inputs), |c| {
            let Some(n) = c.need("norm", self.base(i)?) else { return Ok(None) };
            let nh = self.amalgam(&h)?;
            c.set("norm_minorant", nh.as_f64());
            Ok(Some(leq(nh.as_f64(), n)))
        })
    }

    fn ladder(&self, i: usize) -> CheckReport {
        let f = &self.cfg.corpus[i];
        let levels = &self.cfg.ladder;
        let mut inputs = self.base_inputs(&f.expr);
        inputs["levels"] = json!(levels);
        inputs["top"] = json!("inf");
        run(Check::new("T3.P6", subject(&f.name), inputs), |c| {
            let Some(n) = c.need("norm", self.base(i)?) else { return Ok(None) };
            let mut rungs = Vec::with_capacity(levels.len() + 1);
            for &level in levels.iter().chain(std::iter::once(&LADDER_TOP)) {
                let v = self.amalgam(&FunctionExpr::truncate_above(level, f.expr.clone()))?;
                let key = if level == LADDER_TOP { "level_inf".to_string() } else { format!("level_{level}") };
                let Some(v) = c.need(&key, v) else { return Ok(None) };
                rungs.push(v);
            }
            let top = *rungs.last().expect("ladder is nonempty");
            let monotone = rungs.windows(2).map(|w| leq(w[0], w[1])).fold(f64::INFINITY, f64::min);
            let below = leq(top, n);
            let converged = (LADDER_TOLERANCE * n - (top - n).abs()) / n.max(1.0);
            Ok(Some(monotone.min(below).min(converged)))
        })
    }

    fn indicator_bound(&self, scale: f64) -> CheckReport {
        let c = self.cfg;
        let omega = MeasureSpace { lower: c.omega.lower, upper: c.omega.lower + scale * c.omega.mass() };
        let half = 0.5 * omega.mass();
        let e = FunctionExpr::indicator(omega.lower, omega.lower + half);
        let q = Window { offset: omega.lower, width: half, mode: c.window.mode };
        let inputs = json!({
            "f": e, "local": c.local, "outer": c.outer, "window": q, "omega": omega,
            "options": c.options, "tolerance": TOLERANCE,
        });
        let label = format!("E=[{}, {}) in ({}, {})", omega.lower, omega.lower + half, omega.lower, omega.upper);
        run(Check::new("T3.P7", label, inputs), |chk| {
            let v = amalgam_norm(&e, &c.local, &c.outer, &q, &omega, &c.options)?.value();
            let Some(v) = chk.need("norm_indicator", v) else { return Ok(None) };
            let (p, q_) = (c.local.p, c.outer.p);
            let mu = omega.mass();
            let bound = (p - 1.0).powf(c.local.theta)
                * (q_ - 1.0).powf(c.outer.theta)
                * mu.powf(1.0 / p + 1.0 / q_).max(mu * mu);
            chk.set("bound", bound);
            Ok(Some(leq(v, bound)))
        })
    }

    /// `C` with `∫_E |f| ≤ C ‖f‖_W` for `E` the left half of `Ω`.
    fn local_integrability_constant(&self) -> Result<(f64, f64)> {
        let c = self.cfg;
        let (p, q) = (c.local.p, c.outer.p);
        let eps = p.min(q) - 1.0;
        let e = FunctionExpr::indicator(c.omega.lower, c.omega.lower + 0.5 * c.omega.mass());
        let dual = self.classical(&e, conjugate(p - eps), conjugate(q - eps), &c.window, &c.omega)?.as_f64();
        let weight = (-c.local.theta * eps.ln() / (p - eps) - c.outer.theta * eps.ln() / (q - eps)).exp();
        Ok((eps, weight * dual / c.window.measure()))
    }

    fn local_integrability(&self, i: usize, constant: &Result<(f64, f64)>) -> CheckReport {
        let c = self.cfg;
        let f = &c.corpus[i];
        let half = Subinterval { lo: c.omega.lower, hi: c.omega.lower + 0.5 * c.omega.mass() };
        let mut inputs = self.base_inputs(&f.expr);
        inputs["set"] = json!(half);
        run(Check::new("T3.P8", subject(&f.name), inputs), |chk| {
            let (eps, constant) = constant.clone()?;
            chk.set("eps", eps);
            chk.set("constant", constant);
            let Some(n) = chk.need("norm", self.base(i)?) else { return Ok(None) };
            let lhs = lebesgue_norm(&f.expr, 1.0, &Region::from(half), &c.options.norm)?.value;
            let Some(lhs) = chk.need("integral", lhs) else { return Ok(None) };
            Ok(Some(leq(lhs, constant * n)))
        })
    }

    // ---- inclusions and exponent relations ----

    fn chain(&self, i: usize) -> CheckReport {
        let c = self.cfg;
        let f = &c.corpus[i];
        let (p, q) = (c.local.p, c.outer.p);
        let eps_grid = log_grid(p - 1.0, c.chain_points, 1e-3);
        let eta_grid = log_grid(q - 1.0, c.chain_points, 1e-3);
        let mut inputs = self.base_inputs(&f.expr);
        inputs["eps"] = json!(eps_grid);
        inputs["eta"] = json!(eta_grid);
        run(Check::new("P1.chain", subject(&f.name), inputs), |chk| {
            let Some(n) = chk.need("norm", self.base(i)?) else { return Ok(None) };
            let outers: Vec<LocalNorm> = eta_grid.iter().map(|&eta| LocalNorm::lebesgue(q - eta)).collect();
            let mut worst = f64::INFINITY;
            let mut largest = 0.0f64;
            for &eps in &eps_grid {
                let (_, norms) =
                    amalgam_norms(&f.expr, &LocalNorm::lebesgue(p - eps), &outers, &c.window, &c.omega, &c.options)?;
                for (&eta, norm) in eta_grid.iter().zip(&norms) {
                    let w = c.local.weight(eps) * c.outer.weight(eta);
                    let lhs = if w == 0.0 { 0.0 } else { w * norm.value.as_f64() };
                    largest = largest.max(lhs);
                    worst = worst.min(leq(lhs, n));
                }
            }
            chk.set("largest_scaled_norm", largest);
            Ok(Some(worst))
        })
    }

    fn embedding(&self, i: usize) -> CheckReport {
        let c = self.cfg;
        let f = &c.corpus[i];
        run(Check::new("P1.embed", subject(&f.name), self.base_inputs(&f.expr)), |chk| {
            if c.omega.mass() > 1.0 {
                chk.note = Some("needs |Ω| ≤ 1".into());
                return Ok(None);
            }
            let Some(n) = chk.need("norm", self.base(i)?) else { return Ok(None) };
            let classical = self.classical(&f.expr, c.local.p, c.outer.p, &c.window, &c.omega)?;
            let Some(classical) = chk.need("classical_norm", classical) else { return Ok(None) };
            let bound = (c.local.p - 1.0).powf(c.local.theta) * (c.outer.p - 1.0).powf(c.outer.theta) * classical;
            chk.set("bound", bound);
            Ok(Some(leq(n, bound)))
        })
    }

    fn monotone_exponents(&self, i: usize) -> CheckReport {
        let c = self.cfg;
        let f = &c.corpus[i];
        let big_local = GrandExponent { p: c.local.p + 1.0, theta: c.local.theta };
        let big_outer = GrandExponent { p: c.outer.p + 1.0, theta: c.outer.theta };
        let mut inputs = self.base_inputs(&f.expr);
        inputs["local_large"] = json!(big_local);
        inputs["outer_large"] = json!(big_outer);
        run(Check::new("C1.mono", subject(&f.name), inputs), |chk| {
            let large = amalgam_norm(&f.expr, &big_local, &big_outer, &c.window, &c.omega, &c.options)?.value();
            let Some(large) = chk.need("norm_large", large) else { return Ok(None) };
            let small = self.base(i)?;
            chk.set("norm", small.as_f64());
            if let (NormValue::Finite(s), true) = (small, large > 0.0) {
                chk.set("ratio", s / large);
            }
            Ok(Some(leq(small.as_f64(), large)))
        })
    }

    fn product(&self, i: usize) -> CheckReport {
        let c = self.cfg;
        let corpus = &c.corpus;
        let j = (i + 1) % corpus.len();
        let (f, g) = (&corpus[i], &corpus[j]);
        let [p1, q1] = c.product_exponents;
        let (p3, q3) = (0.5 * p1, 0.5 * q1);
        let fg = FunctionExpr::product(vec![f.expr.clone(), g.expr.clone()]);
        let inputs = json!({
            "f": f.expr, "g": g.expr, "p": [p1, p1, p3], "q": [q1, q1, q3],
            "window": c.window, "omega": c.omega, "options": c.options, "tolerance": TOLERANCE,
        });
        run(Check::new("P4.product", format!("{}*{}", f.name, g.name), inputs), |chk| {
            let nf = self.classical(&f.expr, p1, q1, &c.window, &c.omega)?;
            let ng = self.classical(&g.expr, p1, q1, &c.window, &c.omega)?;
            let Some(nf) = chk.need("norm_f", nf) else { return Ok(None) };
            let Some(ng) = chk.need("norm_g", ng) else { return Ok(None) };
            let nfg = self.classical(&fg, p3, q3, &c.window, &c.omega)?;
            chk.set("norm_product", nfg.as_f64());
            Ok(Some(leq(nfg.as_f64(), nf * ng)))
        })
    }

    fn window_change(&self, i: usize) -> CheckReport {
        let c = self.cfg;
        let f = &c.corpus[i];
        let outer = GrandExponent { p: c.outer.p, theta: 0.0 };
        let windows: Vec<Window> = c
            .window_fractions
            .iter()
            .map(|&w| Window { offset: c.omega.lower, width: w * c.omega.mass(), mode: c.window.mode })
            .collect();
        let mut inputs = self.base_inputs(&f.expr);
        inputs["outer"] = json!(outer);
        inputs["window"] = json!(windows);
        run(Check::new("T2.window", subject(&f.name), inputs), |chk| {
            let mut norms = Vec::with_capacity(windows.len());
            for w in &windows {
                let v = amalgam_norm(&f.expr, &c.local, &outer, w, &c.omega, &c.options)?.value();
                let Some(v) = chk.need(&format!("width_{}", w.width), v) else { return Ok(None) };
                norms.push((w.width, v));
            }
            let mut margin = f64::INFINITY;
            for (a, &(wa, na)) in norms.iter().enumerate() {
                for &(wb, nb) in &norms[a + 1..] {
                    let (small, large, ns, nl) = if wa <= wb { (wa, wb, na, nb) } else { (wb, wa, nb, na) };
                    // nested windows give ns ≤ nl; on the circle ⌈large/small⌉ translates cover
                    margin = margin.min(leq(ns, nl));
                    if c.window.mode == WindowMode::Periodic {
                        let k = (large / small - 1e-12).ceil();
                        margin = margin.min(leq(nl, k * ns));
                    }
                }
            }
            Ok(Some(if margin.is_infinite() { 0.0 } else { margin }))
        })
    }

    // ---- claims pinned to the unit interval ----

    fn eq5(&self, p: f64, theta: f64) -> CheckReport {
        let c = self.cfg;
        let omega = MeasureSpace::unit();
        let f = FunctionExpr::power(1.0, 0.0, -1.0 / p);
        let g = GrandExponent { p, theta };
        let inputs = json!({ "f": f, "local": g, "omega": omega, "options": c.options.norm, "tolerance": TOLERANCE });
        run(Check::new("P1.eq5", format!("p={p} theta={theta}"), inputs), |chk| {
            let v = grand_norm(&f, &g, &omega.region(), &c.options.norm)?.value;
            let Some(v) = chk.need("norm", v) else { return Ok(None) };
            let bound = (p - 1.0).powf(theta - 1.0) * p;
            chk.set("bound", bound);
            Ok(Some(leq(v, bound)))
        })
    }

    fn eq5_oracle(&self) -> CheckReport {
        let c = self.cfg;
        let omega = MeasureSpace::unit();
        let f = FunctionExpr::power(1.0, 0.0, -0.5);
        let g = GrandExponent { p: 2.0, theta: 1.0 };
        let forced = NormOptions { force_quadrature: true, ..c.options.norm };
        let inputs = json!({ "f": f, "local": g, "omega": omega, "options": c.options.norm });
        run(Check::new("P1.eq5", "oracle p=2 theta=1", inputs), |chk| {
            let exact = grand_norm(&f, &g, &omega.region(), &c.options.norm)?.value;
            let quad = grand_norm(&f, &g, &omega.region(), &forced)?.value;
            let Some(exact) = chk.need("closed_form", exact) else { return Ok(None) };
            let Some(quad) = chk.need("quadrature", quad) else { return Ok(None) };
            chk.set("expected", 2.0);
            // deviations measured in units of their own tolerances
            Ok(Some((1.0 - (exact - 2.0).abs() / 1e-6).min(1.0 - (quad - 2.0).abs() / 1e-4)))
        })
    }

    fn strictness(&self, [p, q, theta]: [f64; 3]) -> CheckReport {
        let c = self.cfg;
        let window = unit_window(&c.window);
        match check_strictness(p, q, theta, &window, &c.options) {
            Ok(r) => r,
            Err(e) => {
                let inputs = json!({ "p": p, "q": q, "theta": theta, "window": window, "options": c.options });
                run(Check::new("P1.strict", format!("p={p} q={q} theta={theta}"), inputs), |_| Err(e))
            }
        }
    }

    fn diagonal(&self, g: GrandExponent) -> CheckReport {
        let c = self.cfg;
        let omega = MeasureSpace::unit();
        let window = Window::whole(&omega, c.window.mode);
        let corpus: Vec<&FunctionExpr> = c.corpus.iter().map(|f| &f.expr).collect();
        let inputs = json!({ "corpus": corpus, "g": g, "window": window, "omega": omega, "options": c.options });
        run(Check::new("P5.diag", format!("p={} theta={}", g.p, g.theta), inputs), |chk| {
            let ratios: Vec<Result<Option<f64>>> = c
                .corpus
                .par_iter()
                .map(|f| diagonal_ratio(&f.expr, &g, &window, &omega, &c.options))
                .collect();
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for (f, r) in c.corpus.iter().zip(ratios) {
                if let Some(r) = r? {
                    chk.set(format!("ratio_{}", f.name), r);
                    lo = lo.min(r);
                    hi = hi.max(r);
                }
            }
            if lo.is_infinite() {
                chk.note = Some("no function with finite nonzero norm".into());
                return Ok(None);
            }
            chk.set("r_lo", lo);
            chk.set("r_hi", hi);
            let bound = (g.p - 1.0).powf(g.theta) * (1.0 + 1e-6);
            chk.set("bound", bound);
            Ok(Some(leq(hi, bound).min((10.0 - hi / lo) / 10.0)))
        })
    }

    fn vanishing(&self, i: usize) -> CheckReport {
        let c = self.cfg;
        let f = &c.corpus[i];
        let omega = MeasureSpace::unit();
        let window = Window::whole(&omega, c.window.mode);
        let inputs = json!({
            "f": f.expr, "local": c.local, "outer": c.outer, "window": window, "omega": omega,
            "eps": c.vanish_eps, "options": c.options, "tolerance": TOLERANCE,
        });
        run(Check::new("P6.vanish", subject(&f.name), inputs), |chk| {
            let series = vanishing_functional(&f.expr, &c.local, &c.outer, &window, &omega, &c.vanish_eps, &c.options)?;
            for &(eps, v) in &series {
                chk.quantities.insert(format!("V({eps:e})"), v);
            }
            let &(_, last) = series.last().expect("vanish_eps is nonempty");
            let Some(last) = chk.need("V_min_eps", last) else { return Ok(None) };
            if bounded(&f.expr, &omega) {
                Ok(Some(leq(last, VANISH_BOUNDED)))
            } else if critical_at(&f.expr, &omega, c.local.p) {
                Ok(Some(leq(VANISH_WITNESS, last)))
            } else {
                chk.note = Some("neither bounded nor critical for L^p".into());
                Ok(None)
            }
        })
    }

    fn acn(&self, name: &str, f: &FunctionExpr, witness: bool) -> CheckReport {
        let c = self.cfg;
        let omega = MeasureSpace::unit();
        let (p, q) = (c.local.p, c.outer.p);
        let threshold = 0.25 * (p - 1.0).powf(c.local.theta - 1.0) * p * (q - 1.0).powf(c.outer.theta);
        let inputs = json!({
            "f": f, "local": c.local, "outer": c.outer, "omega": omega, "mode": c.window.mode,
            "a": c.acn_a, "options": c.options, "tolerance": TOLERANCE,
        });
        run(Check::new("T10.acn", subject(name), inputs), |chk| {
            let tail = acn_tail(f, &c.local, &c.outer, &omega, &c.acn_a, c.window.mode, &c.options)?;
            let mut values = Vec::with_capacity(tail.len());
            for &(a, t) in &tail {
                let Some(t) = chk.need(&format!("T({a})"), t) else { return Ok(None) };
                values.push(t);
            }
            if witness {
                chk.set("threshold", threshold);
                let min = values.iter().copied().fold(f64::INFINITY, f64::min);
                Ok(Some(leq(threshold, min)))
            } else {
                let first = values[0];
                let last = *values.last().expect("acn_a is nonempty");
                Ok(Some(leq(last, 1e-2 * first)))
            }
        })
    }

    // ---- associate space ----

    fn holder(&self, gi: usize, fi: usize) -> CheckReport {
        let c = self.cfg;
        let (g, f) = (&c.corpus[gi], &c.probes[fi]);
        let inputs = json!({
            "f": f.expr, "g": g.expr, "local": c.local, "outer": c.outer, "window": c.window,
            "omega": c.omega, "options": c.options, "tolerance": TOLERANCE,
        });
        run(Check::new("T7.holder", format!("{}|{}", f.name, g.name), inputs), |chk| {
            let integral = match pairing_integral(&f.expr, &g.expr, &c.omega, &c.options.norm) {
                Ok(v) => v,
                Err(Error::DivergentPairing(at)) => {
                    chk.note = Some(format!("pairing diverges at {at}"));
                    return Ok(None);
                }
                Err(e) => return Err(e),
            };
            chk.set("integral", integral);
            let Some(left) = chk.need("norm_f", self.cache.probes[fi].clone()?) else { return Ok(None) };
            let right = self.dual(gi)?;
            chk.set("associate_upper_g", right);
            Ok(Some(leq(integral, left * right)))
        })
    }

    fn dual(&self, gi: usize) -> Result<f64> {
        self.cache.duals[gi].clone().expect("dual bounds are cached for bounded functions")
    }

    fn sandwich(&self, gi: usize) -> CheckReport {
        let c = self.cfg;
        let g = &c.corpus[gi];
        let probes: Vec<&FunctionExpr> = c.probes.iter().map(|f| &f.expr).collect();
        let inputs = json!({
            "g": g.expr, "probes": probes, "local": c.local, "outer": c.outer, "window": c.window,
            "omega": c.omega, "options": c.options, "tolerance": TOLERANCE,
        });
        run(Check::new("T11.sandwich", subject(&g.name), inputs), |chk| {
            let mut lower = 0.0f64;
            for (fi, f) in c.probes.iter().enumerate() {
                let norm = match self.cache.probes[fi].clone()? {
                    NormValue::Finite(n) if n > 0.0 => n,
                    _ => continue,
                };
                match pairing_integral(&f.expr, &g.expr, &c.omega, &c.options.norm) {
                    Ok(v) => lower = lower.max(v / norm),
                    Err(Error::DivergentPairing(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
            let upper = self.dual(gi)?;
            chk.set("lower", lower);
            chk.set("upper", upper);
            if lower > 0.0 {
                chk.set("width_ratio", upper / lower);
            }
            Ok(Some(leq(lower, upper)))
        })
    }
}

/// Whether the leading order of `f` at a singular end of `omega` is exactly
/// `−1/p`, the borderline where `|f|^p` stops being integrable.
fn critical_at(f: &FunctionExpr, omega: &MeasureSpace, p: f64) -> bool {
    [(omega.lower, Side::Right), (omega.upper, Side::Left)].iter().any(|&(c, side)| {
        let l = f.leading(c, side);
        !l.is_zero() && (l.order * p + 1.0).abs() < 1e-12
    })
}

/// Strictness witness on the unit interval: `t^{−1/p}` has a finite grand
/// amalgam norm no larger than `(q−1)^θ p^θ` while its classical
/// `W(L^p, L^q)` norm is infinite.
pub fn check_strictness(p: f64, q: f64, theta: f64, window: &Window, opts: &AmalgamOptions) -> Result<CheckReport> {
    let omega = MeasureSpace::unit();
    window.validate(&omega)?;
    let local = GrandExponent::new(p, theta)?;
    let outer = GrandExponent::new(q, theta)?;
    let f = FunctionExpr::power(1.0, 0.0, -1.0 / p);
    let inputs = json!({
        "f": f, "local": local, "outer": outer, "window": window, "omega": omega,
        "options": opts, "tolerance": TOLERANCE,
    });
    let check = Check::new("P1.strict", format!("p={p} q={q} theta={theta}"), inputs);
    Ok(run(check, |chk| {
        if q > p || theta < 1.0 {
            chk.note = Some("needs q ≤ p and θ ≥ 1".into());
            return Ok(None);
        }
        let grand = amalgam_norm(&f, &local, &outer, window, &omega, opts)?.value();
        let classical =
            amalgam_norm_with(&f, &LocalNorm::lebesgue(p), &LocalNorm::lebesgue(q), window, &omega, opts)?.value();
        chk.quantities.insert("classical_norm".into(), classical);
        let Some(grand) = chk.need("norm", grand) else {
            return Ok(Some(f64::NEG_INFINITY));
        };
        let bound = (q - 1.0).powf(theta) * p.powf(theta);
        chk.set("bound", bound);
        if classical.is_finite() {
            chk.note = Some("classical norm is finite".into());
            return Ok(Some(-1.0));
        }
        Ok(Some(leq(grand, bound)))
    }))
}

/// `V(ε) = ε^{θ₁/(p−ε)} ‖f‖_{W(L^{p−ε}, L^{q−ε})}` for each `ε` of the grid, in
/// the grid's order.
pub fn vanishing_functional(
    f: &FunctionExpr,
    local: &GrandExponent,
    outer: &GrandExponent,
    q: &Window,
    omega: &MeasureSpace,
    eps_grid: &[f64],
    opts: &AmalgamOptions,
) -> Result<Vec<(f64, NormValue)>> {
    let eps_max = local.p.min(outer.p) - 1.0;
    if let Some(&e) = eps_grid.iter().find(|&&e| !(e > 0.0 && e <= eps_max)) {
        return Err(invalid(format!("ε = {e} is outside (0, {eps_max}]")));
    }
    eps_grid
        .iter()
        .map(|&eps| {
            let norm = amalgam_norm_with(
                f,
                &LocalNorm::lebesgue(local.p - eps),
                &LocalNorm::lebesgue(outer.p - eps),
                q,
                omega,
                opts,
            )?
            .value();
            let v = match norm {
                NormValue::Finite(0.0) => NormValue::Finite(0.0),
                NormValue::Finite(n) => NormValue::Finite(local.weight(eps) * n),
                NormValue::Infinite => NormValue::Infinite,
            };
            Ok((eps, v))
        })
        .collect()
}

/// `T(a)`: grand amalgam norm of `f·χ_{(c, c+a)}` with window `Q = [c, c+a)`,
/// `c` the left end of `omega`, for each `a` in order.
pub fn acn_tail(
    f: &FunctionExpr,
    local: &GrandExponent,
    outer: &GrandExponent,
    omega: &MeasureSpace,
    a_list: &[f64],
    mode: WindowMode,
    opts: &AmalgamOptions,
) -> Result<Vec<(f64, NormValue)>> {
    a_list
        .iter()
        .map(|&a| {
            let cut = FunctionExpr::product(vec![f.clone(), FunctionExpr::indicator(omega.lower, omega.lower + a)]);
            let q = Window::new(omega.lower, a, mode)?;
            Ok((a, amalgam_norm(&cut, local, outer, &q, omega, opts)?.value()))
        })
        .collect()
}

impl<'a> Suite<'a> {
    fn new(cfg: &'a SuiteConfig, filter: Option<&[String]>) -> Self {
        let wants = |ids: &[&str]| ids.iter().any(|id| claim_selected(id, filter));
        let need_base = wants(&[
            "T3.P1", "T3.P2", "T3.P3", "T3.P4", "T3.P5", "T3.P6", "T3.P8", "P1.chain", "P1.embed", "C1.mono",
        ]);
        let need_pairing = wants(&["T7.holder", "T11.sandwich"]);
        let skipped = || Err(invalid("not computed"));
        let base: Vec<Result<NormValue>> = if need_base {
            cfg.corpus
                .par_iter()
                .map(|f| Ok(amalgam_norm(&f.expr, &cfg.local, &cfg.outer, &cfg.window, &cfg.omega, &cfg.options)?.value()))
                .collect()
        } else {
            cfg.corpus.iter().map(|_| skipped()).collect()
        };
        let probes: Vec<Result<NormValue>> = if need_pairing {
            cfg.probes
                .par_iter()
                .map(|f| Ok(amalgam_norm(&f.expr, &cfg.local, &cfg.outer, &cfg.window, &cfg.omega, &cfg.options)?.value()))
                .collect()
        } else {
            cfg.probes.iter().map(|_| skipped()).collect()
        };
        let duals: Vec<Option<Result<f64>>> = cfg
            .corpus
            .par_iter()
            .map(|g| {
                (need_pairing && bounded(&g.expr, &cfg.omega)).then(|| {
                    associate_upper_bound(&g.expr, &cfg.local, &cfg.outer, &cfg.window, &cfg.omega, &cfg.options)
                })
            })
            .collect();
        Suite { cfg, cache: Cache { base, probes, duals } }
    }
}

type Job<'s> = Box<dyn Fn() -> Vec<CheckReport> + Send + Sync + 's>;

/// Runs every selected claim and returns the reports in claim-id order.
pub fn run_suite(cfg: &SuiteConfig, filter: Option<&[String]>) -> Result<Vec<CheckReport>> {
    cfg.validate()?;
    if let Some(items) = filter {
        if let Some(bad) = items.iter().find(|i| !CLAIMS.iter().any(|c| claim_selected(c, Some(&[i.to_string()])))) {
            return Err(invalid(format!("unknown claim {bad:?}")));
        }
    }
    info!("verify: preparing shared norms");
    let suite = Suite::new(cfg, filter);
    let suite = &suite;
    let n = cfg.corpus.len();
    let bounded_corpus: Vec<usize> = (0..n).filter(|&i| bounded(&cfg.corpus[i].expr, &cfg.omega)).collect();
    let p8 = if claim_selected("T3.P8", filter) { Some(suite.local_integrability_constant()) } else { None };
    let p8 = &p8;

    let mut jobs: Vec<(&str, Job)> = Vec::new();
    macro_rules! per_function {
        ($claim:expr, $jobs:expr, $method:path) => {
            for i in 0..n {
                $jobs.push(($claim, Box::new(move || vec![$method(suite, i)])));
            }
        };
    }
    per_function!("C1.mono", jobs, Suite::monotone_exponents);
    per_function!("P1.chain", jobs, Suite::chain);
    per_function!("P1.embed", jobs, Suite::embedding);
    jobs.push(("P1.eq5", Box::new(move || vec![suite.eq5_oracle()])));
    for &p in &cfg.eq5_p {
        for &theta in &cfg.eq5_theta {
            jobs.push(("P1.eq5", Box::new(move || vec![suite.eq5(p, theta)])));
        }
    }
    for &triple in &cfg.strictness {
        jobs.push(("P1.strict", Box::new(move || vec![suite.strictness(triple)])));
    }
    per_function!("P4.product", jobs, Suite::product);
    for &g in &cfg.diagonal {
        jobs.push(("P5.diag", Box::new(move || vec![suite.diagonal(g)])));
    }
    per_function!("P6.vanish", jobs, Suite::vanishing);
    {
        let p = cfg.local.p;
        jobs.push((
            "T10.acn",
            Box::new(move || vec![suite.acn("witness", &FunctionExpr::power(1.0, 0.0, -1.0 / p), true)]),
        ));
        let unit = MeasureSpace::unit();
        for f in cfg.corpus.iter().filter(|f| f.expr.validate(&unit).is_ok() && bounded(&f.expr, &unit)) {
            jobs.push(("T10.acn", Box::new(move || vec![suite.acn(&f.name, &f.expr, false)])));
        }
    }
    for &gi in &bounded_corpus {
        jobs.push(("T11.sandwich", Box::new(move || vec![suite.sandwich(gi)])));
    }
    per_function!("T2.window", jobs, Suite::window_change);
    per_function!("T3.P1", jobs, Suite::nonnegativity);
    per_function!("T3.P2", jobs, Suite::definiteness);
    per_function!("T3.P3", jobs, Suite::homogeneity);
    per_function!("T3.P4", jobs, Suite::triangle);
    per_function!("T3.P5", jobs, Suite::solidity);
    per_function!("T3.P6", jobs, Suite::ladder);
    for scale in [1.0, 0.5, 2.0] {
        jobs.push(("T3.P7", Box::new(move || vec![suite.indicator_bound(scale)])));
    }
    for i in 0..n {
        jobs.push(("T3.P8", Box::new(move || vec![suite.local_integrability(i, p8.as_ref().expect("selected"))])));
    }
    for &gi in &bounded_corpus {
        for fi in 0..cfg.probes.len() {
            jobs.push(("T7.holder", Box::new(move || vec![suite.holder(gi, fi)])));
        }
    }

    jobs.retain(|(claim, _)| claim_selected(claim, filter));
    info!("verify: {} checks", jobs.len());
    let mut reports: Vec<CheckReport> = jobs.par_iter().flat_map_iter(|(_, job)| job()).collect();
    reports.sort_by_key(|r| CLAIMS.iter().position(|c| *c == r.claim).unwrap_or(CLAIMS.len()));
    Ok(reports)
}

/// Property checks 1–8 over a corpus.
pub fn check_bf_properties(
    corpus: &[NamedFunction],
    local: &GrandExponent,
    outer: &GrandExponent,
    q: &Window,
    omega: &MeasureSpace,
    opts: &AmalgamOptions,
) -> Result<Vec<CheckReport>> {
    let cfg = SuiteConfig {
        omega: *omega,
        window: *q,
        local: *local,
        outer: *outer,
        corpus: corpus.to_vec(),
        options: *opts,
        ..SuiteConfig::default()
    };
    run_suite(&cfg, Some(&["T3".to_string()]))
}

/// `(pass, fail, inconclusive)` counts.
pub fn tally(reports: &[CheckReport]) -> (usize, usize, usize) {
    reports.iter().fold((0, 0, 0), |(p, f, i), r| match r.verdict {
        Verdict::Pass => (p + 1, f, i),
        Verdict::Fail => (p, f + 1, i),
        Verdict::Inconclusive => (p, f, i + 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_opts() -> AmalgamOptions {
        AmalgamOptions { x_points: 65, x_points_max: 129, ..AmalgamOptions::default() }
    }

    fn tiny_config() -> SuiteConfig {
        let omega = MeasureSpace::unit();
        let corpus = default_corpus(&omega)
            .into_iter()
            .filter(|f| ["zero", "one", "singular-half"].contains(&f.name.as_str()))
            .collect();
        SuiteConfig { corpus, options: small_opts(), ..SuiteConfig::default() }
    }

    #[test]
    fn default_config_is_valid() {
        let cfg = SuiteConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.corpus.len(), 12);
        assert_eq!(cfg.probes.len(), 6);
    }

    #[test]
    fn claim_filter() {
        let t10 = ["T10".to_string()];
        assert!(claim_selected("T10.acn", Some(&t10)));
        assert!(!claim_selected("T11.sandwich", Some(&t10)));
        let t3 = ["T3".to_string()];
        assert!(claim_selected("T3.P6", Some(&t3)));
        assert!(!claim_selected("T3.P6", Some(&["T3.P".to_string()])));
        assert!(claim_selected("anything", None));
    }

    #[test]
    fn unknown_claim_is_rejected() {
        let cfg = tiny_config();
        assert!(run_suite(&cfg, Some(&["T99".to_string()])).is_err());
    }

    #[test]
    fn margins_and_verdicts() {
        let pass = Check::new("T3.P1", "x", json!({})).finish(Ok(Some(-0.5e-6)));
        assert_eq!(pass.verdict, Verdict::Pass);
        let fail = Check::new("T3.P1", "x", json!({})).finish(Ok(Some(-2e-6)));
        assert_eq!(fail.verdict, Verdict::Fail);
        let inf = Check::new("T3.P1", "x", json!({})).finish(Ok(Some(f64::NEG_INFINITY)));
        assert_eq!((inf.verdict, inf.margin), (Verdict::Fail, None));
        let err = Check::new("T3.P1", "x", json!({})).finish(Err(Error::SingularPoint(0.0)));
        assert_eq!(err.verdict, Verdict::Inconclusive);
        assert!(err.note.is_some());
    }

    #[test]
    fn digest_depends_on_inputs_only() {
        let a = Check::new("T3.P1", "x", json!({"p": 2.0})).finish(Ok(Some(0.0)));
        let b = Check::new("T3.P1", "x", json!({"p": 2.0})).finish(Ok(Some(1.0)));
        let c = Check::new("T3.P1", "x", json!({"p": 3.0})).finish(Ok(Some(0.0)));
        assert_eq!(a.inputs_digest, b.inputs_digest);
        assert_ne!(a.inputs_digest, c.inputs_digest);
        assert_eq!(a.inputs_digest.len(), 64);
    }

    #[test]
    fn strictness_examples() {
        let window = Window::whole(&MeasureSpace::unit(), WindowMode::Periodic);
        for (p, q, theta, bound) in [(2.0, 2.0, 1.0, 2.0), (2.0, 1.5, 1.0, 1.0), (2.0, 2.0, 2.0, 4.0)] {
            let r = check_strictness(p, q, theta, &window, &small_opts()).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
            assert_eq!(r.quantities["classical_norm"], NormValue::Infinite);
            assert!(r.quantities["norm"].as_f64() <= bound + 1e-6);
        }
        let r = check_strictness(2.0, 2.0, 0.5, &window, &small_opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn vanishing_functional_examples() {
        let omega = MeasureSpace::unit();
        let q = Window::whole(&omega, WindowMode::Periodic);
        let g = GrandExponent { p: 2.0, theta: 1.0 };
        let eps = [1.0, 1e-2, 1e-4];
        let zero = vanishing_functional(&FunctionExpr::zero(), &g, &g, &q, &omega, &eps, &small_opts()).unwrap();
        assert!(zero.iter().all(|&(_, v)| v == NormValue::Finite(0.0)));
        let one = vanishing_functional(&FunctionExpr::one(), &g, &g, &q, &omega, &eps, &small_opts()).unwrap();
        // ε^{1/(2−ε)} · 1
        for &(e, v) in &one {
            assert!((v.as_f64() - e.powf(1.0 / (2.0 - e))).abs() < 1e-9);
        }
        let sing =
            vanishing_functional(&FunctionExpr::power(1.0, 0.0, -0.5), &g, &g, &q, &omega, &eps, &small_opts()).unwrap();
        // ε^{1/(2−ε)} (2/ε)^{1/(2−ε)} = 2^{1/(2−ε)}
        for &(e, v) in &sing {
            assert!((v.as_f64() - 2f64.powf(1.0 / (2.0 - e))).abs() < 1e-8, "{e}: {v}");
        }
        assert!(vanishing_functional(&FunctionExpr::one(), &g, &g, &q, &omega, &[1.5], &small_opts()).is_err());
    }

    #[test]
    fn acn_tail_of_zero_and_one() {
        let omega = MeasureSpace::unit();
        let g = GrandExponent { p: 2.0, theta: 1.0 };
        let a = [0.1, 0.001];
        let opts = AmalgamOptions::default();
        let zero = acn_tail(&FunctionExpr::zero(), &g, &g, &omega, &a, WindowMode::Periodic, &opts).unwrap();
        assert!(zero.iter().all(|&(_, t)| t == NormValue::Finite(0.0)));
        let one = acn_tail(&FunctionExpr::one(), &g, &g, &omega, &a, WindowMode::Periodic, &opts).unwrap();
        assert!(one[1].1.as_f64() < 1e-2 * one[0].1.as_f64());
    }

    #[test]
    fn tiny_suite_runs_in_claim_order() {
        let cfg = tiny_config();
        let filter = ["T3.P1".to_string(), "T3.P2".to_string(), "P1.eq5".to_string()];
        let reports = run_suite(&cfg, Some(&filter)).unwrap();
        let claims: Vec<&str> = reports.iter().map(|r| r.claim.as_str()).collect();
        assert_eq!(claims.iter().filter(|c| **c == "P1.eq5").count(), 9);
        assert_eq!(claims.iter().filter(|c| **c == "T3.P1").count(), 3);
        let mut sorted = claims.clone();
        sorted.sort_by_key(|c| CLAIMS.iter().position(|x| x == c));
        assert_eq!(claims, sorted);
        assert_eq!(tally(&reports), (reports.len(), 0, 0), "{reports:#?}");
    }

    #[test]
    fn zero_function_passes_every_property() {
        let omega = MeasureSpace::unit();
        let corpus = vec![NamedFunction::new("zero", FunctionExpr::zero())];
        let g = GrandExponent { p: 2.0, theta: 1.0 };
        let q = Window { offset: 0.0, width: 0.5, mode: WindowMode::Periodic };
        let reports = check_bf_properties(&corpus, &g, &g, &q, &omega, &small_opts()).unwrap();
        assert_eq!(reports.len(), 7 + 3);
        assert!(reports.iter().all(|r| r.verdict == Verdict::Pass), "{reports:#?}");
    }
}
