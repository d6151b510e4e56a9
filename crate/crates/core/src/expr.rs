//! Closed-form function expressions and finite sequences.

use serde::{Deserialize, Serialize};

use crate::closed_form;
use crate::error::{Error, Result};
use crate::space::{MeasureSpace, Subinterval};

/// A function on the measure space built from a small set of closed-form nodes.
///
/// Serialized as a tagged tree, e.g.
/// `{"kind": "power", "coeff": 1.0, "center": 0.0, "exponent": -0.5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionExpr {
    Constant { value: f64 },
    /// `coeff · |t − center|^exponent`
    Power { coeff: f64, center: f64, exponent: f64 },
    /// Characteristic function of `[lo, hi)`.
    Indicator { lo: f64, hi: f64 },
    Sum { terms: Vec<FunctionExpr> },
    Product { factors: Vec<FunctionExpr> },
    Scale { factor: f64, expr: Box<FunctionExpr> },
    /// `min(|expr|, level)`
    TruncateAbove { level: f64, expr: Box<FunctionExpr> },
}

/// Which side of a point an asymptotic expansion is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// One-sided leading behaviour `f(c ± δ) ≈ coeff · δ^order` as `δ → 0+`.
///
/// `coeff == 0` means the function vanishes identically near the point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leading {
    pub order: f64,
    pub coeff: f64,
}

impl Leading {
    const ZERO: Leading = Leading { order: 0.0, coeff: 0.0 };

    fn constant(v: f64) -> Self {
        Leading { order: 0.0, coeff: v }
    }

    pub fn is_zero(&self) -> bool {
        self.coeff == 0.0
    }
}

impl FunctionExpr {
    pub fn constant(value: f64) -> Self {
        FunctionExpr::Constant { value }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn power(coeff: f64, center: f64, exponent: f64) -> Self {
        FunctionExpr::Power { coeff, center, exponent }
    }

    pub fn indicator(lo: f64, hi: f64) -> Self {
        FunctionExpr::Indicator { lo, hi }
    }

    pub fn sum(terms: Vec<FunctionExpr>) -> Self {
        FunctionExpr::Sum { terms }
    }

    pub fn product(factors: Vec<FunctionExpr>) -> Self {
        FunctionExpr::Product { factors }
    }

    pub fn scale(factor: f64, expr: FunctionExpr) -> Self {
        FunctionExpr::Scale { factor, expr: Box::new(expr) }
    }

    pub fn truncate_above(level: f64, expr: FunctionExpr) -> Self {
        FunctionExpr::TruncateAbove { level, expr: Box::new(expr) }
    }

    /// Checks parameters against `space`: finite numbers, ordered indicator
    /// ends, nonnegative truncation levels and no singular power centered
    /// strictly inside the interval.
    pub fn validate(&self, space: &MeasureSpace) -> Result<()> {
        match self {
            FunctionExpr::Constant { value } => finite("constant value", *value),
            FunctionExpr::Power { coeff, center, exponent } => {
                finite("power coefficient", *coeff)?;
                finite("power center", *center)?;
                finite("power exponent", *exponent)?;
                if *exponent < 0.0 && *coeff != 0.0 && space.lower < *center && *center < space.upper
                {
                    return Err(Error::InteriorSingularity { center: *center, exponent: *exponent });
                }
                Ok(())
            }
            FunctionExpr::Indicator { lo, hi } => {
                finite("indicator end", *lo)?;
                finite("indicator end", *hi)?;
                if lo > hi {
                    return Err(Error::InvalidInterval { lower: *lo, upper: *hi });
                }
                Ok(())
            }
            FunctionExpr::Sum { terms } => terms.iter().try_for_each(|t| t.validate(space)),
            FunctionExpr::Product { factors } => factors.iter().try_for_each(|t| t.validate(space)),
            FunctionExpr::Scale { factor, expr } => {
                finite("scale factor", *factor)?;
                expr.validate(space)
            }
            FunctionExpr::TruncateAbove { level, expr } => {
                if level.is_nan() || *level < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "truncation level must be nonnegative, got {level}"
                    )));
                }
                expr.validate(space)
            }
        }
    }

    /// Pointwise value at `t`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        self.eval_offset(t, 0.0)
    }

    /// Value at `anchor + offset`, keeping full precision in distances to
    /// `anchor` when `offset` is far below the spacing of floats near it.
    ///
    /// Indicator membership at a point that rounds onto `anchor` is decided
    /// from the sign of `offset`.
    pub fn eval_offset(&self, anchor: f64, offset: f64) -> Result<f64> {
        let t = anchor + offset;
        Ok(match self {
            FunctionExpr::Constant { value } => *value,
            FunctionExpr::Power { coeff, center, exponent } => {
                if *coeff == 0.0 {
                    return Ok(0.0);
                }
                if *exponent == 0.0 {
                    return Ok(*coeff);
                }
                let dist = if *center == anchor { offset.abs() } else { (t - center).abs() };
                if dist == 0.0 && *exponent < 0.0 {
                    return Err(Error::SingularPoint(t));
                }
                coeff * dist.powf(*exponent)
            }
            FunctionExpr::Indicator { lo, hi } => {
                let inside = if t == anchor && offset != 0.0 {
                    if offset > 0.0 {
                        *lo <= anchor && anchor < *hi
                    } else {
                        *lo < anchor && anchor <= *hi
                    }
                } else {
                    *lo <= t && t < *hi
                };
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            FunctionExpr::Sum { terms } => {
                let mut acc = 0.0;
                for term in terms {
                    acc += term.eval_offset(anchor, offset)?;
                }
                acc
            }
            FunctionExpr::Product { factors } => {
                let mut acc = 1.0;
                for factor in factors {
                    acc *= factor.eval_offset(anchor, offset)?;
                    if acc == 0.0 {
                        break;
                    }
                }
                acc
            }
            FunctionExpr::Scale { factor, expr } => {
                if *factor == 0.0 {
                    0.0
                } else {
                    factor * expr.eval_offset(anchor, offset)?
                }
            }
            FunctionExpr::TruncateAbove { level, expr } => match expr.eval_offset(anchor, offset) {
                Ok(v) => v.abs().min(*level),
                Err(Error::SingularPoint(_)) => *level,
                Err(e) => return Err(e),
            },
        })
    }

    /// One-sided leading term of the expansion at `c`.
    pub fn leading(&self, c: f64, side: Side) -> Leading {
        match self {
            FunctionExpr::Constant { value } => Leading::constant(*value),
            FunctionExpr::Power { coeff, center, exponent } => {
                if *coeff == 0.0 {
                    Leading::ZERO
                } else if *center == c && *exponent != 0.0 {
                    Leading { order: *exponent, coeff: *coeff }
                } else if *exponent == 0.0 {
                    Leading::constant(*coeff)
                } else {
                    Leading::constant(coeff * (c - center).abs().powf(*exponent))
                }
            }
            FunctionExpr::Indicator { lo, hi } => {
                let inside = match side {
                    Side::Right => *lo <= c && c < *hi,
                    Side::Left => *lo < c && c <= *hi,
                };
                Leading::constant(if inside { 1.0 } else { 0.0 })
            }
            FunctionExpr::Sum { terms } => {
                let mut parts: Vec<Leading> = terms
                    .iter()
                    .map(|t| t.leading(c, side))
                    .filter(|l| !l.is_zero())
                    .collect();
                while !parts.is_empty() {
                    let order = parts.iter().map(|l| l.order).fold(f64::INFINITY, f64::min);
                    let same = |l: &Leading| (l.order - order).abs() <= 1e-12;
                    let coeff: f64 = parts.iter().filter(|l| same(l)).map(|l| l.coeff).sum();
                    if coeff != 0.0 {
                        return Leading { order, coeff };
                    }
                    parts.retain(|l| !same(l));
                }
                Leading::ZERO
            }
            FunctionExpr::Product { factors } => {
                let mut acc = Leading::constant(1.0);
                for factor in factors {
                    let l = factor.leading(c, side);
                    if l.is_zero() {
                        return Leading::ZERO;
                    }
                    acc = Leading { order: acc.order + l.order, coeff: acc.coeff * l.coeff };
                }
                acc
            }
            FunctionExpr::Scale { factor, expr } => {
                if *factor == 0.0 {
                    return Leading::ZERO;
                }
                let l = expr.leading(c, side);
                Leading { order: l.order, coeff: l.coeff * factor }
            }
            FunctionExpr::TruncateAbove { level, expr } => {
                let l = expr.leading(c, side);
                if l.is_zero() || *level == 0.0 {
                    Leading::ZERO
                } else if level.is_infinite() {
                    Leading { order: l.order, coeff: l.coeff.abs() }
                } else if l.order < 0.0 {
                    Leading::constant(*level)
                } else if l.order == 0.0 {
                    Leading::constant(l.coeff.abs().min(*level))
                } else {
                    Leading { order: l.order, coeff: l.coeff.abs() }
                }
            }
        }
    }

    /// Points inside `window` where the expression may fail to be smooth,
    /// sorted and deduplicated, window ends excluded.
    pub fn breakpoints(&self, window: &Subinterval) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_breakpoints(&mut out);
        self.collect_crossings(window, &mut out);
        out.retain(|&b| window.contains_interior(b));
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn collect_breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            FunctionExpr::Constant { .. } => {}
            FunctionExpr::Power { coeff, center, exponent } => {
                if *coeff != 0.0 && *exponent != 0.0 {
                    out.push(*center);
                }
            }
            FunctionExpr::Indicator { lo, hi } => {
                out.push(*lo);
                out.push(*hi);
            }
            FunctionExpr::Sum { terms } => terms.iter().for_each(|t| t.collect_breakpoints(out)),
            FunctionExpr::Product { factors } => {
                factors.iter().for_each(|t| t.collect_breakpoints(out))
            }
            FunctionExpr::Scale { expr, .. } => expr.collect_breakpoints(out),
            FunctionExpr::TruncateAbove { level, expr } => {
                expr.collect_breakpoints(out);
                if let Some(m) = closed_form::as_monomial(expr) {
                    if m.exponent != 0.0 && m.coeff != 0.0 && level.is_finite() && *level > 0.0 {
                        let tau = (level / m.coeff.abs()).powf(1.0 / m.exponent);
                        out.push(m.center - tau);
                        out.push(m.center + tau);
                    }
                }
            }
        }
    }

    /// Points of `window` where `|inner| = level` for a finite truncation of
    /// a non-monomial expression, found by scanning and bisection.
    fn collect_crossings(&self, window: &Subinterval, out: &mut Vec<f64>) {
        match self {
            FunctionExpr::Sum { terms } => terms.iter().for_each(|t| t.collect_crossings(window, out)),
            FunctionExpr::Product { factors } => {
                factors.iter().for_each(|t| t.collect_crossings(window, out))
            }
            FunctionExpr::Scale { expr, .. } => expr.collect_crossings(window, out),
            FunctionExpr::TruncateAbove { level, expr } => {
                expr.collect_crossings(window, out);
                if level.is_finite() && closed_form::as_monomial(expr).is_none() {
                    let mut cuts = vec![window.lo, window.hi];
                    expr.collect_breakpoints(&mut cuts);
                    cuts.extend(expr.singular_centers());
                    cuts.retain(|&c| c >= window.lo && c <= window.hi);
                    cuts.sort_by(f64::total_cmp);
                    cuts.dedup();
                    for seg in cuts.windows(2) {
                        scan_crossings(expr, *level, seg[0], seg[1], out);
                    }
                }
            }
            _ => {}
        }
    }

    /// Candidate singular points of the expression: centers of powers with
    /// negative exponent.
    pub fn singular_centers(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_singular(&mut out);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn collect_singular(&self, out: &mut Vec<f64>) {
        match self {
            FunctionExpr::Power { coeff, center, exponent } => {
                if *coeff != 0.0 && *exponent < 0.0 {
                    out.push(*center);
                }
            }
            FunctionExpr::Sum { terms } => terms.iter().for_each(|t| t.collect_singular(out)),
            FunctionExpr::Product { factors } => factors.iter().for_each(|t| t.collect_singular(out)),
            FunctionExpr::Scale { expr, .. } => expr.collect_singular(out),
            FunctionExpr::TruncateAbove { level, expr } => {
                if level.is_infinite() {
                    expr.collect_singular(out)
                }
            }
            FunctionExpr::Constant { .. } | FunctionExpr::Indicator { .. } => {}
        }
    }

    /// `true` if `|f|` is bounded near both ends of `window`.
    pub fn bounded_on(&self, window: &Subinterval) -> std::result::Result<(), f64> {
        for (c, side) in [(window.lo, Side::Right), (window.hi, Side::Left)] {
            let l = self.leading(c, side);
            if !l.is_zero() && l.order < 0.0 {
                return Err(c);
            }
        }
        Ok(())
    }
}

const SCAN_UNIFORM: usize = 32;
const SCAN_GEOMETRIC: i32 = 40;

/// Sign changes of `|e| − level` on the open interval `(u, v)`. Samples are
/// uniform in the middle and geometric toward both ends.
fn scan_crossings(e: &FunctionExpr, level: f64, u: f64, v: f64, out: &mut Vec<f64>) {
    let h = v - u;
    if !(h > 0.0) {
        return;
    }
    let mut s: Vec<f64> = (1..SCAN_UNIFORM).map(|i| i as f64 / SCAN_UNIFORM as f64).collect();
    for k in 6..SCAN_GEOMETRIC {
        let d = 0.5f64.powi(k);
        s.push(d);
        s.push(1.0 - d);
    }
    s.sort_by(f64::total_cmp);
    s.dedup();
    let g = |t: f64| e.evaluate(t).ok().map(|x| x.abs() - level);
    let mut prev: Option<(f64, f64)> = None;
    for &si in &s {
        let t = u + h * si;
        if !(t > u && t < v) {
            continue;
        }
        let Some(gt) = g(t) else {
            prev = None;
            continue;
        };
        if let Some((tp, gp)) = prev {
            if (gp > 0.0) != (gt > 0.0) {
                let (mut a, mut b, ga) = (tp, t, gp);
                for _ in 0..100 {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    match g(m) {
                        Some(gm) if (gm > 0.0) == (ga > 0.0) => a = m,
                        Some(_) => b = m,
                        None => break,
                    }
                }
                out.push(0.5 * (a + b));
            }
        }
        prev = Some((t, gt));
    }
}

fn finite(what: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} must be finite, got {v}")))
    }
}

/// A finite sequence `(u_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SequenceData {
    entries: Vec<f64>,
}

impl SequenceData {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("sequence must have at least one entry".into()));
        }
        if let Some(bad) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("sequence entry {bad} is not finite")));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
