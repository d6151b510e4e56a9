//! Exact `∫ |f|^r` for expressions that reduce to piecewise monomials
//! `k·|t − c|^α`.

use crate::expr::FunctionExpr;
use crate::grandnorm::{EvalPath, NormOutcome, NormValue};
use crate::space::Subinterval;

/// `coeff · |t − center|^exponent`; `exponent == 0` is the constant `coeff`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub center: f64,
    pub exponent: f64,
}

impl Monomial {
    fn constant(coeff: f64) -> Self {
        Monomial { coeff, center: 0.0, exponent: 0.0 }
    }

    fn scaled(self, k: f64) -> Self {
        Monomial { coeff: self.coeff * k, ..self }
    }

    fn abs(self) -> Self {
        Monomial { coeff: self.coeff.abs(), ..self }
    }

    fn times(self, other: Monomial) -> Option<Monomial> {
        if self.coeff == 0.0 || other.coeff == 0.0 {
            return Some(Monomial::constant(0.0));
        }
        if self.exponent == 0.0 {
            return Some(other.scaled(self.coeff));
        }
        if other.exponent == 0.0 {
            return Some(self.scaled(other.coeff));
        }
        (self.center == other.center).then_some(Monomial {
            coeff: self.coeff * other.coeff,
            center: self.center,
            exponent: self.exponent + other.exponent,
        })
    }

    fn same_shape(&self, other: &Monomial) -> bool {
        self.exponent == other.exponent && (self.exponent == 0.0 || self.center == other.center)
    }

    fn value(&self, t: f64) -> f64 {
        if self.exponent == 0.0 {
            self.coeff
        } else {
            self.coeff * (t - self.center).abs().powf(self.exponent)
        }
    }
}

/// The expression as a single monomial on the whole line, if it is one.
pub fn as_monomial(f: &FunctionExpr) -> Option<Monomial> {
    match f {
        FunctionExpr::Constant { value } => Some(Monomial::constant(*value)),
        FunctionExpr::Power { coeff, center, exponent } => {
            if *exponent == 0.0 {
                Some(Monomial::constant(*coeff))
            } else {
                Some(Monomial { coeff: *coeff, center: *center, exponent: *exponent })
            }
        }
        FunctionExpr::Scale { factor, expr } => as_monomial(expr).map(|m| m.scaled(*factor)),
        FunctionExpr::Product { factors } => factors
            .iter()
            .try_fold(Monomial::constant(1.0), |acc, f| acc.times(as_monomial(f)?)),
        FunctionExpr::Sum { terms } if terms.len() == 1 => as_monomial(&terms[0]),
        _ => None,
    }
}

/// A monomial restricted to `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub mono: Monomial,
}

/// Decomposes `f` on `window` into monomial pieces with disjoint interiors.
/// The function is zero off the union of the pieces. Returns `None` when some
/// subexpression is not piecewise monomial.
pub fn pieces(f: &FunctionExpr, window: &Subinterval) -> Option<Vec<Piece>> {
    let whole = |mono| Some(vec![Piece { lo: window.lo, hi: window.hi, mono }]);
    match f {
        FunctionExpr::Constant { .. } | FunctionExpr::Power { .. } => whole(as_monomial(f)?),
        FunctionExpr::Indicator { lo, hi } => Some(
            window
                .intersect(&Subinterval { lo: *lo, hi: *hi })
                .map(|iv| Piece { lo: iv.lo, hi: iv.hi, mono: Monomial::constant(1.0) })
                .into_iter()
                .collect(),
        ),
        FunctionExpr::Scale { factor, expr } => Some(
            pieces(expr, window)?
                .into_iter()
                .map(|p| Piece { mono: p.mono.scaled(*factor), ..p })
                .collect(),
        ),
        FunctionExpr::Product { factors } => {
            let mut acc = vec![Piece { lo: window.lo, hi: window.hi, mono: Monomial::constant(1.0) }];
            for factor in factors {
                let next = pieces(factor, window)?;
                let mut merged = Vec::new();
                for a in &acc {
                    for b in &next {
                        let lo = a.lo.max(b.lo);
                        let hi = a.hi.min(b.hi);
                        if lo < hi {
                            merged.push(Piece { lo, hi, mono: a.mono.times(b.mono)? });
                        }
                    }
                }
                merged.sort_by(|x, y| x.lo.total_cmp(&y.lo));
                acc = merged;
            }
            Some(acc)
        }
        FunctionExpr::Sum { terms } => {
            let lists: Vec<Vec<Piece>> =
                terms.iter().map(|t| pieces(t, window)).collect::<Option<_>>()?;
            sum_pieces(&lists, window)
        }
        FunctionExpr::TruncateAbove { level, expr } => {
            let mut out = Vec::new();
            for p in pieces(expr, window)? {
                truncate_piece(p, *level, &mut out);
            }
            Some(out)
        }
    }
}

fn sum_pieces(lists: &[Vec<Piece>], window: &Subinterval) -> Option<Vec<Piece>> {
    let mut cuts: Vec<f64> = vec![window.lo, window.hi];
    for p in lists.iter().flatten() {
        cuts.push(p.lo);
        cuts.push(p.hi);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out: Vec<Piece> = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if lo >= hi {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let mut acc: Option<Monomial> = None;
        for p in lists.iter().flatten().filter(|p| p.lo <= mid && mid <= p.hi) {
            if p.mono.coeff == 0.0 {
                continue;
            }
            acc = Some(match acc {
                None => p.mono,
                Some(m) if m.same_shape(&p.mono) => Monomial { coeff: m.coeff + p.mono.coeff, ..m },
                Some(_) => return None,
            });
        }
        if let Some(mono) = acc {
            out.push(Piece { lo, hi, mono });
        }
    }
    Some(out)
}

fn truncate_piece(p: Piece, level: f64, out: &mut Vec<Piece>) {
    let m = p.mono.abs();
    if m.coeff == 0.0 || level == 0.0 {
        return;
    }
    if level.is_infinite() {
        out.push(Piece { mono: m, ..p });
        return;
    }
    if m.exponent == 0.0 {
        out.push(Piece { mono: Monomial::constant(m.coeff.min(level)), ..p });
        return;
    }
    let tau = (level / m.coeff).powf(1.0 / m.exponent);
    let mut cuts = vec![p.lo, p.hi];
    for c in [m.center - tau, m.center + tau] {
        if p.lo < c && c < p.hi {
            cuts.push(c);
        }
    }
    cuts.sort_by(f64::total_cmp);
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if lo >= hi {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let mono = if m.value(mid) > level { Monomial::constant(level) } else { m };
        out.push(Piece { lo, hi, mono });
    }
}

/// `∫_{ua}^{ub} u^β du` for `0 ≤ ua ≤ ub`.
fn monomial_integral(ua: f64, ub: f64, beta: f64) -> f64 {
    if ub <= ua {
        return 0.0;
    }
    if beta == 0.0 {
        return ub - ua;
    }
    let s = beta + 1.0;
    if ua == 0.0 {
        return if s <= 0.0 { f64::INFINITY } else { ub.powf(s) / s };
    }
    let log_ratio = ((ub - ua) / ua).ln_1p();
    if s.abs() < 1e-14 {
        return log_ratio;
    }
    let x = s * log_ratio;
    if x.abs() <= 1.0 {
        ua.powf(s) * x.exp_m1() / s
    } else {
        (ub.powf(s) - ua.powf(s)) / s
    }
}

/// `∫_lo^hi |t − c|^β dt`.
pub fn abs_power_integral(lo: f64, hi: f64, c: f64, beta: f64) -> f64 {
    if c <= lo {
        monomial_integral(lo - c, hi - c, beta)
    } else if c >= hi {
        monomial_integral(c - hi, c - lo, beta)
    } else {
        monomial_integral(0.0, c - lo, beta) + monomial_integral(0.0, hi - c, beta)
    }
}

fn piece_integral(p: &Piece, r: f64) -> f64 {
    let k = p.mono.coeff.abs();
    if k == 0.0 {
        return 0.0;
    }
    let beta = if p.mono.exponent == 0.0 { 0.0 } else { p.mono.exponent * r };
    k.powf(r) * abs_power_integral(p.lo, p.hi, p.mono.center, beta)
}

fn piece_sup(p: &Piece) -> f64 {
    let m = p.mono;
    if m.coeff == 0.0 {
        return 0.0;
    }
    if m.exponent == 0.0 {
        return m.coeff.abs();
    }
    let (near, far) = if m.center <= p.lo {
        (p.lo - m.center, p.hi - m.center)
    } else if m.center >= p.hi {
        (m.center - p.hi, m.center - p.lo)
    } else {
        (0.0, (m.center - p.lo).max(p.hi - m.center))
    };
    let d = if m.exponent > 0.0 { far } else { near };
    if d == 0.0 && m.exponent < 0.0 {
        f64::INFINITY
    } else {
        m.coeff.abs() * d.powf(m.exponent)
    }
}

/// `∫ |f|^r` over a piece list.
pub fn pieces_integral(pieces: &[Piece], r: f64) -> f64 {
    pieces.iter().map(|p| piece_integral(p, r)).sum()
}

/// `sup |f|` over a piece list.
pub fn pieces_sup(pieces: &[Piece]) -> f64 {
    pieces.iter().map(piece_sup).fold(0.0, f64::max)
}

/// Exact `∫_window |f|^r dt` (possibly `+∞`), or `None` when `f` is not
/// piecewise monomial on `window`.
pub fn integral_abs_pow(f: &FunctionExpr, r: f64, window: &Subinterval) -> Option<f64> {
    Some(pieces_integral(&pieces(f, window)?, r))
}

/// Exact `sup_window |f|`, or `None` when `f` is not piecewise monomial.
pub fn sup_abs(f: &FunctionExpr, window: &Subinterval) -> Option<f64> {
    Some(pieces_sup(&pieces(f, window)?))
}

/// `‖f·χ_window‖_r` in closed form, `r = ∞` included.
pub fn closed_form_rnorm(f: &FunctionExpr, r: f64, window: &Subinterval) -> Option<NormOutcome> {
    let value = if r.is_infinite() {
        sup_abs(f, window)?
    } else {
        integral_abs_pow(f, r, window)?.powf(1.0 / r)
    };
    Some(NormOutcome {
        value: NormValue::from_f64(value),
        argmax_eps: None,
        error_estimate: 0.0,
        path: EvalPath::ClosedForm,
    })
}
