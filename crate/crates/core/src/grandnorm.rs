//! Grand Lebesgue norms, grand sequence norms and the small-norm inner
//! infimum, all built on the ε-sweep of [`crate::optimize`].
//!
//! For an exponent pair `(p, θ)` and `0 < ε ≤ p − 1` the weighted map is
//! `φ(ε) = ε^{θ/(p−ε)} ‖f‖_{p−ε}` and the grand norm is its supremum.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::closed_form::{self, Piece};
use crate::error::{Error, Result};
use crate::expr::{FunctionExpr, SequenceData, Side};
use crate::optimize::{extremize, Goal, SweepOptions};
use crate::quadrature::{integrate_region, QuadratureOptions};
use crate::space::Region;

/// Exponent pair `(p, θ)` with `1 < p < ∞` and `θ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrandExponent {
    pub p: f64,
    pub theta: f64,
}

impl GrandExponent {
    pub fn new(p: f64, theta: f64) -> Result<Self> {
        let g = Self { p, theta };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidExponent(format!("p must satisfy 1 < p < ∞, got {}", self.p)));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(Error::InvalidExponent(format!("θ must be finite and ≥ 0, got {}", self.theta)));
        }
        Ok(())
    }

    /// Upper end of the admissible range `(0, p − 1]`.
    pub fn eps_max(&self) -> f64 {
        self.p - 1.0
    }

    pub fn check_eps(&self, eps: f64) -> Result<()> {
        if eps > 0.0 && eps <= self.eps_max() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("ε = {eps} outside (0, {}]", self.eps_max())))
        }
    }

    /// `p' = p/(p − 1)`.
    pub fn conjugate(&self) -> f64 {
        conjugate(self.p)
    }

    /// `(p − ε)'`, infinite at `ε = p − 1`.
    pub fn conjugate_at(&self, eps: f64) -> f64 {
        conjugate(self.p - eps)
    }

    /// `ε^{θ/(p−ε)}`.
    pub fn weight(&self, eps: f64) -> f64 {
        if self.theta == 0.0 {
            1.0
        } else {
            (self.theta * eps.ln() / (self.p - eps)).exp()
        }
    }
}

/// Hölder conjugate `r/(r − 1)`; `1 ↦ ∞`.
pub fn conjugate(r: f64) -> f64 {
    if r <= 1.0 {
        f64::INFINITY
    } else {
        r / (r - 1.0)
    }
}

/// A nonnegative extended real.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum NormValue {
    Finite(f64),
    Infinite,
}

impl NormValue {
    pub fn from_f64(v: f64) -> Self {
        if v.is_infinite() {
            NormValue::Infinite
        } else {
            NormValue::Finite(v)
        }
    }

    /// The value with `+∞` mapped to `f64::INFINITY`.
    pub fn as_f64(&self) -> f64 {
        match *self {
            NormValue::Finite(v) => v,
            NormValue::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            NormValue::Finite(v) => Some(v),
            NormValue::Infinite => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, NormValue::Finite(_))
    }
}

impl fmt::Display for NormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormValue::Finite(v) => write!(f, "{v}"),
            NormValue::Infinite => f.write_str("+inf"),
        }
    }
}

impl Serialize for NormValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NormValue::Finite(v) => s.serialize_f64(*v),
            NormValue::Infinite => s.serialize_str("+inf"),
        }
    }
}

impl<'de> Deserialize<'de> for NormValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(NormValue::Finite(v)),
            Repr::Text(t) if t == "+inf" || t == "inf" => Ok(NormValue::Infinite),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"+inf\", got {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalPath {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormOutcome {
    pub value: NormValue,
    /// Extremizing ε; absent for classical norms and when every ε diverged.
    pub argmax_eps: Option<f64>,
    pub error_estimate: f64,
    pub path: EvalPath,
}

impl NormOutcome {
    pub(crate) fn exact(value: f64) -> Self {
        NormOutcome {
            value: NormValue::from_f64(value),
            argmax_eps: None,
            error_estimate: 0.0,
            path: EvalPath::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormOptions {
    pub quadrature: QuadratureOptions,
    pub sweep: SweepOptions,
    /// Skip closed forms even when available.
    pub force_quadrature: bool,
    /// Conjugate exponents above this use the sup-norm surrogate.
    pub r_cap: f64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            quadrature: QuadratureOptions::default(),
            sweep: SweepOptions::default(),
            force_quadrature: false,
            r_cap: 64.0,
        }
    }
}

impl NormOptions {
    pub fn validate(&self) -> Result<()> {
        self.quadrature.validate()?;
        self.sweep.validate()?;
        if !(self.r_cap >= 1.0) {
            return Err(Error::InvalidArgument(format!("r_cap must be ≥ 1, got {}", self.r_cap)));
        }
        Ok(())
    }
}

/// `f` restricted to a region, prepared for repeated `∫|f|^r` evaluations.
pub(crate) enum Evaluator<'a> {
    Pieces(Vec<Piece>),
    Quadrature { f: &'a FunctionExpr, region: Region, opts: QuadratureOptions },
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(f: &'a FunctionExpr, region: &Region, opts: &NormOptions) -> Self {
        if !opts.force_quadrature {
            let mut all = Vec::new();
            let mut ok = true;
            for part in region.parts() {
                match closed_form::pieces(f, part) {
                    Some(p) => all.extend(p),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Evaluator::Pieces(all);
            }
        }
        Evaluator::Quadrature { f, region: region.clone(), opts: opts.quadrature }
    }

    pub(crate) fn path(&self) -> EvalPath {
        match self {
            Evaluator::Pieces(_) => EvalPath::ClosedForm,
            Evaluator::Quadrature { .. } => EvalPath::Quadrature,
        }
    }

    pub(crate) fn is_zero(&self) -> bool {
        match self {
            Evaluator::Pieces(p) => p.iter().all(|p| p.mono.coeff == 0.0),
            Evaluator::Quadrature { region, .. } => region.is_empty(),
        }
    }

    /// `(∫|f|^r, absolute error)`; divergence gives `+∞`.
    pub(crate) fn integral(&self, r: f64) -> Result<(f64, f64)> {
        match self {
            Evaluator::Pieces(p) => Ok((closed_form::pieces_integral(p, r), 0.0)),
            Evaluator::Quadrature { f, region, opts } => match integrate_region(f, r, region, opts) {
                Ok(q) => Ok((q.value, q.abs_error)),
                Err(Error::DivergentIntegral { .. }) => Ok((f64::INFINITY, 0.0)),
                Err(e) => Err(e),
            },
        }
    }

    /// `(‖f‖_r, absolute error)` for `r ∈ (0, ∞]`.
    pub(crate) fn rnorm(&self, r: f64) -> Result<(f64, f64)> {
        if r.is_infinite() {
            return Ok((self.sup()?, 0.0));
        }
        let (i, err) = self.integral(r)?;
        if i == 0.0 || i.is_infinite() {
            return Ok((i, 0.0));
        }
        let v = i.powf(1.0 / r);
        Ok((v, v * err / (r * i)))
    }

    /// `sup |f|` over the region; exact for piecewise monomials, otherwise
    /// the largest of a dense sample and the one-sided limits at panel ends.
    pub(crate) fn sup(&self) -> Result<f64> {
        match self {
            Evaluator::Pieces(p) => Ok(closed_form::pieces_sup(p)),
            Evaluator::Quadrature { f, region, .. } => {
                let mut best: f64 = 0.0;
                for part in region.parts() {
                    let mut cuts = vec![part.lo];
                    cuts.extend(f.breakpoints(part));
                    cuts.push(part.hi);
                    for pair in cuts.windows(2) {
                        let (a, b) = (pair[0], pair[1]);
                        for (c, side) in [(a, Side::Right), (b, Side::Left)] {
                            let l = f.leading(c, side);
                            if !l.is_zero() {
                                if l.order < 0.0 {
                                    return Ok(f64::INFINITY);
                                }
                                if l.order == 0.0 {
                                    best = best.max(l.coeff.abs());
                                }
                            }
                        }
                        const SAMPLES: usize = 512;
                        for i in 1..SAMPLES {
                            let t = a + (b - a) * i as f64 / SAMPLES as f64;
                            best = best.max(f.evaluate(t)?.abs());
                        }
                    }
                }
                Ok(best)
            }
        }
    }
}

/// Classical `‖f‖_r` over `region`, `r = ∞` included.
pub fn lebesgue_norm(f: &FunctionExpr, r: f64, region: &Region, opts: &NormOptions) -> Result<NormOutcome> {
    if !(r >= 1.0) {
        return Err(Error::InvalidExponent(format!("r must be ≥ 1, got {r}")));
    }
    opts.validate()?;
    let ev = Evaluator::new(f, region, opts);
    let (value, err) = ev.rnorm(r)?;
    Ok(NormOutcome {
        value: NormValue::from_f64(value),
        argmax_eps: None,
        error_estimate: err,
        path: ev.path(),
    })
}

fn weighted(g: &GrandExponent, eps: f64, norm: f64) -> f64 {
    if norm == 0.0 {
        0.0
    } else {
        g.weight(eps) * norm
    }
}

/// `φ(ε) = ε^{θ/(p−ε)} ‖f χ_region‖_{p−ε}`.
pub fn phi(
    f: &FunctionExpr,
    g: &GrandExponent,
    region: &Region,
    eps: f64,
    opts: &NormOptions,
) -> Result<NormValue> {
    g.validate()?;
    g.check_eps(eps)?;
    let ev = Evaluator::new(f, region, opts);
    let (n, _) = ev.rnorm(g.p - eps)?;
    Ok(NormValue::from_f64(weighted(g, eps, n)))
}

/// `‖f χ_region‖_{p),θ}`; `θ = 0` returns the classical `p`-norm.
pub fn grand_norm(f: &FunctionExpr, g: &GrandExponent, region: &Region, opts: &NormOptions) -> Result<NormOutcome> {
    g.validate()?;
    opts.validate()?;
    let ev = Evaluator::new(f, region, opts);
    grand_norm_prepared(&ev, g, opts)
}

pub(crate) fn grand_norm_prepared(ev: &Evaluator<'_>, g: &GrandExponent, opts: &NormOptions) -> Result<NormOutcome> {
    if g.theta == 0.0 {
        let (value, err) = ev.rnorm(g.p)?;
        return Ok(NormOutcome {
            value: NormValue::from_f64(value),
            argmax_eps: None,
            error_estimate: err,
            path: ev.path(),
        });
    }
    if ev.is_zero() {
        return Ok(NormOutcome {
            value: NormValue::Finite(0.0),
            argmax_eps: Some(g.eps_max()),
            error_estimate: 0.0,
            path: ev.path(),
        });
    }
    let ext = extremize(
        |eps| Ok(weighted(g, eps, ev.rnorm(g.p - eps)?.0)),
        g.eps_max(),
        Goal::Maximize,
        &opts.sweep,
    )?;
    let error_estimate = match (ext.arg, ext.value.is_finite()) {
        (Some(eps), true) => g.weight(eps) * ev.rnorm(g.p - eps)?.1,
        _ => 0.0,
    };
    Ok(NormOutcome {
        value: NormValue::from_f64(ext.value),
        argmax_eps: ext.arg,
        error_estimate,
        path: ev.path(),
    })
}

/// `‖u‖_{ℓ^{p),θ}} = sup_ε (ε^θ Σ|u_k|^{p−ε})^{1/(p−ε)}`.
pub fn grand_seq_norm(u: &SequenceData, g: &GrandExponent, sweep: &SweepOptions) -> Result<NormOutcome> {
    g.validate()?;
    let max = u.entries().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return Ok(NormOutcome::exact(0.0));
    }
    let lp = |r: f64| -> f64 {
        let s: f64 = u.entries().iter().map(|v| (v.abs() / max).powf(r)).sum();
        max * s.powf(1.0 / r)
    };
    if g.theta == 0.0 {
        return Ok(NormOutcome::exact(lp(g.p)));
    }
    let ext = extremize(|eps| Ok(weighted(g, eps, lp(g.p - eps))), g.eps_max(), Goal::Maximize, sweep)?;
    Ok(NormOutcome {
        value: NormValue::from_f64(ext.value),
        argmax_eps: ext.arg,
        error_estimate: 0.0,
        path: EvalPath::ClosedForm,
    })
}

/// Upper bound on `inf_ε ε^{−θ/(p−ε)} ‖g χ_region‖_{(p−ε)'}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallBound {
    pub value: NormValue,
    pub argmin_eps: Option<f64>,
    /// The best ε used the sup-norm surrogate for a conjugate exponent above
    /// the cap.
    pub surrogate: bool,
}

/// Inner infimum of the small Lebesgue norm for a single bounded part.
///
/// Conjugate exponents `r' > r_cap` are replaced by `sup|g| · |region|^{1/r'}`,
/// which dominates `‖g‖_{r'}`, so the result stays an upper bound.
pub fn eps_inf_conjugate(g: &FunctionExpr, e: &GrandExponent, region: &Region, opts: &NormOptions) -> Result<SmallBound> {
    e.validate()?;
    opts.validate()?;
    for part in region.parts() {
        g.bounded_on(part).map_err(Error::UnboundedIntegrand)?;
    }
    let ev = Evaluator::new(g, region, opts);
    small_bound_prepared(&ev, e, region.measure(), opts)
}

pub(crate) fn small_bound_prepared(
    ev: &Evaluator<'_>,
    e: &GrandExponent,
    measure: f64,
    opts: &NormOptions,
) -> Result<SmallBound> {
    if ev.is_zero() {
        return Ok(SmallBound { value: NormValue::Finite(0.0), argmin_eps: Some(e.eps_max()), surrogate: false });
    }
    let sup = std::sync::OnceLock::new();
    let norm_at = |eps: f64| -> Result<f64> {
        let r = e.conjugate_at(eps);
        if r > opts.r_cap {
            let s = match sup.get() {
                Some(s) => *s,
                None => {
                    let s = ev.sup()?;
                    let _ = sup.set(s);
                    s
                }
            };
            Ok(if r.is_infinite() { s } else { s * measure.powf(1.0 / r) })
        } else {
            Ok(ev.rnorm(r)?.0)
        }
    };
    let inv = |eps: f64| -> f64 {
        if e.theta == 0.0 {
            1.0
        } else {
            (-e.theta * eps.ln() / (e.p - eps)).exp()
        }
    };
    let ext = extremize(
        |eps| {
            let n = norm_at(eps)?;
            Ok(if n == 0.0 { 0.0 } else { inv(eps) * n })
        },
        e.eps_max(),
        Goal::Minimize,
        &opts.sweep,
    )?;
    let surrogate = ext.arg.is_some_and(|eps| e.conjugate_at(eps) > opts.r_cap);
    Ok(SmallBound { value: NormValue::from_f64(ext.value), argmin_eps: ext.arg, surrogate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::MeasureSpace;

    fn unit() -> Region {
        MeasureSpace::unit().region()
    }

    fn singular() -> FunctionExpr {
        FunctionExpr::power(1.0, 0.0, -0.5)
    }

    fn ge(p: f64, theta: f64) -> GrandExponent {
        GrandExponent::new(p, theta).unwrap()
    }

    #[test]
    fn exponent_validation() {
        assert!(GrandExponent::new(1.0, 1.0).is_err());
        assert!(GrandExponent::new(2.0, -0.1).is_err());
        let g = ge(3.0, 1.0);
        assert_eq!(g.conjugate(), 1.5);
        assert_eq!(g.conjugate_at(2.0), f64::INFINITY);
        assert!(g.check_eps(0.0).is_err());
        assert!(g.check_eps(2.0).is_ok());
    }

    #[test]
    fn phi_examples() {
        let o = NormOptions::default();
        let v = phi(&singular(), &ge(2.0, 1.0), &unit(), 1.0, &o).unwrap();
        assert!((v.as_f64() - 2.0).abs() < 1e-14);
        let v = phi(&FunctionExpr::one(), &ge(2.0, 1.0), &unit(), 0.5, &o).unwrap();
        assert!((v.as_f64() - 0.5f64.powf(1.0 / 1.5)).abs() < 1e-15);
        let v = phi(&FunctionExpr::zero(), &ge(2.0, 1.0), &unit(), 0.3, &o).unwrap();
        assert_eq!(v, NormValue::Finite(0.0));
    }

    #[test]
    fn grand_norm_examples() {
        let o = NormOptions::default();
        let out = grand_norm(&singular(), &ge(2.0, 1.0), &unit(), &o).unwrap();
        assert!((out.value.as_f64() - 2.0).abs() < 1e-12);
        assert_eq!(out.argmax_eps, Some(1.0));
        assert_eq!(out.path, EvalPath::ClosedForm);
        let out = grand_norm(&FunctionExpr::one(), &ge(3.0, 1.0), &unit(), &o).unwrap();
        assert!((out.value.as_f64() - 2.0).abs() < 1e-12);
        let out = grand_norm(&FunctionExpr::zero(), &ge(2.5, 0.7), &unit(), &o).unwrap();
        assert_eq!(out.value, NormValue::Finite(0.0));
        let out = grand_norm(&singular(), &ge(2.0, 2.0), &unit(), &o).unwrap();
        assert!(out.value.as_f64() < 4.0);
    }

    #[test]
    fn forced_quadrature_agrees() {
        let o = NormOptions { force_quadrature: true, ..NormOptions::default() };
        let out = grand_norm(&singular(), &ge(2.0, 1.0), &unit(), &o).unwrap();
        assert_eq!(out.path, EvalPath::Quadrature);
        assert!((out.value.as_f64() - 2.0).abs() < 1e-6, "{out:?}");
    }

    #[test]
    fn theta_zero_is_classical() {
        let o = NormOptions::default();
        let out = grand_norm(&singular(), &ge(2.0, 0.0), &unit(), &o).unwrap();
        assert_eq!(out.value, NormValue::Infinite);
        assert_eq!(out.argmax_eps, None);
        let ramp = FunctionExpr::power(1.0, 0.0, 1.0);
        let out = grand_norm(&ramp, &ge(2.0, 0.0), &unit(), &o).unwrap();
        assert!((out.value.as_f64() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sequence_examples() {
        let s = SweepOptions::default();
        let g = ge(2.0, 1.0);
        let one = grand_seq_norm(&SequenceData::new(vec![1.0]).unwrap(), &g, &s).unwrap();
        assert!((one.value.as_f64() - 1.0).abs() < 1e-15);
        let three = grand_seq_norm(&SequenceData::new(vec![3.0]).unwrap(), &g, &s).unwrap();
        assert!((three.value.as_f64() - 3.0).abs() < 1e-14);
        let zero = grand_seq_norm(&SequenceData::new(vec![0.0; 3]).unwrap(), &g, &s).unwrap();
        assert_eq!(zero.value, NormValue::Finite(0.0));
    }

    #[test]
    fn small_bound_examples() {
        let o = NormOptions::default();
        let g = ge(2.0, 1.0);
        let b = eps_inf_conjugate(&FunctionExpr::one(), &g, &unit(), &o).unwrap();
        assert!((b.value.as_f64() - 1.0).abs() < 1e-12, "{b:?}");
        let b = eps_inf_conjugate(&FunctionExpr::constant(2.0), &g, &unit(), &o).unwrap();
        assert!((b.value.as_f64() - 2.0).abs() < 1e-12);
        let b = eps_inf_conjugate(&FunctionExpr::zero(), &g, &unit(), &o).unwrap();
        assert_eq!(b.value, NormValue::Finite(0.0));
        assert_eq!(
            eps_inf_conjugate(&singular(), &g, &unit(), &o),
            Err(Error::UnboundedIntegrand(0.0))
        );
    }

    #[test]
    fn norm_value_serde() {
        assert_eq!(serde_json::to_string(&NormValue::Infinite).unwrap(), "\"+inf\"");
        assert_eq!(serde_json::to_string(&NormValue::Finite(2.0)).unwrap(), "2.0");
        let v: NormValue = serde_json::from_str("\"+inf\"").unwrap();
        assert_eq!(v, NormValue::Infinite);
        let v: NormValue = serde_json::from_str("1.5").unwrap();
        assert_eq!(v, NormValue::Finite(1.5));
        assert!(serde_json::from_str::<NormValue>("\"huge\"").is_err());
    }
}
