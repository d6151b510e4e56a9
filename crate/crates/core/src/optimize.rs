//! Sup/inf of a scalar map over the exponent range `(0, ε_max]`.
//!
//! The range is probed on a logarithmic grid; the best local extrema are then
//! refined by golden-section search inside the bracket formed by their grid
//! neighbours. The reported value is the best probed value, so for a maximum
//! it is a certified lower bound on the true supremum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    /// Points of the coarse logarithmic grid.
    pub grid_points: usize,
    /// Width of the final golden-section bracket.
    pub resolution: f64,
    /// The grid starts at `min_fraction · ε_max`.
    pub min_fraction: f64,
    /// How many of the best local extrema are refined.
    pub refine: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { grid_points: 200, resolution: 1e-8, min_fraction: 1e-6, refine: 2 }
    }
}

impl SweepOptions {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 2 {
            return Err(Error::InvalidArgument(format!(
                "sweep needs at least 2 grid points, got {}",
                self.grid_points
            )));
        }
        if !(self.resolution > 0.0) {
            return Err(Error::InvalidArgument("sweep resolution must be positive".into()));
        }
        if !(self.min_fraction > 0.0 && self.min_fraction < 1.0) {
            return Err(Error::InvalidArgument("sweep min_fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Best probed value of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Extremum {
    /// May be `+∞`.
    pub value: f64,
    /// Where `value` was attained; `None` when every probe was `+∞`.
    pub arg: Option<f64>,
    /// Every `(ε, value)` pair evaluated, grid first.
    pub probes: Vec<(f64, f64)>,
}

/// `n` log-spaced points from `min_fraction · hi` to exactly `hi`.
pub fn log_grid(hi: f64, n: usize, min_fraction: f64) -> Vec<f64> {
    let lo = min_fraction * hi;
    let ratio = (hi / lo).ln();
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo * (ratio * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Extremizes `f` over `(0, hi]`. `f` may return `+∞`.
///
/// Maximizing: any infinite probe makes the value infinite. Minimizing:
/// infinite probes are ignored unless all are infinite.
pub fn extremize<F>(f: F, hi: f64, goal: Goal, opts: &SweepOptions) -> Result<Extremum>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    opts.validate()?;
    if !(hi > 0.0 && hi.is_finite()) {
        return Err(Error::InvalidArgument(format!("sweep range (0, {hi}] is empty")));
    }
    let grid = log_grid(hi, opts.grid_points, opts.min_fraction);
    let evaluated: Vec<Result<f64>> = grid.par_iter().map(|&e| f(e)).collect();
    let mut values = Vec::with_capacity(grid.len());
    for v in evaluated {
        values.push(v?);
    }
    let mut probes: Vec<(f64, f64)> = grid.iter().copied().zip(values.iter().copied()).collect();

    if goal == Goal::Maximize {
        if let Some(&(e, _)) = probes.iter().find(|(_, v)| v.is_infinite()) {
            let all = probes.iter().all(|(_, v)| v.is_infinite());
            return Ok(Extremum { value: f64::INFINITY, arg: (!all).then_some(e), probes });
        }
    }

    // work with a score that is maximized in both modes
    let score = |v: f64| match goal {
        Goal::Maximize => v,
        Goal::Minimize => {
            if v.is_infinite() {
                f64::NEG_INFINITY
            } else {
                -v
            }
        }
    };
    let scores: Vec<f64> = values.iter().map(|&v| score(v)).collect();
    let flat = scores.windows(2).all(|w| w[0] == w[1]);
    if !flat {
        for i in peaks(&scores, opts.refine) {
            let a = grid[i.saturating_sub(1)];
            let b = grid[(i + 1).min(grid.len() - 1)];
            golden(&f, a, b, opts.resolution, &score, &mut probes)?;
            if goal == Goal::Maximize && probes.iter().any(|(_, v)| v.is_infinite()) {
                let e = probes.iter().find(|(_, v)| v.is_infinite()).map(|p| p.0);
                return Ok(Extremum { value: f64::INFINITY, arg: e, probes });
            }
        }
    }

    let mut best: Option<(f64, f64)> = None;
    for &(e, v) in &probes {
        let s = score(v);
        if s == f64::NEG_INFINITY {
            continue;
        }
        if best.is_none_or(|(_, bv)| s > score(bv)) {
            best = Some((e, v));
        }
    }
    Ok(match best {
        Some((e, v)) => Extremum { value: v, arg: Some(e), probes },
        None => Extremum { value: f64::INFINITY, arg: None, probes },
    })
}

/// Indices of the `k` highest local maxima, ties broken by index.
fn peaks(scores: &[f64], k: usize) -> Vec<usize> {
    let n = scores.len();
    let mut idx: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = i == 0 || scores[i] >= scores[i - 1];
            let right = i + 1 == n || scores[i] >= scores[i + 1];
            left && right && scores[i] > f64::NEG_INFINITY
        })
        .collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

fn golden<F, S>(f: &F, mut a: f64, mut b: f64, tol: f64, score: &S, probes: &mut Vec<(f64, f64)>) -> Result<()>
where
    F: Fn(f64) -> Result<f64>,
    S: Fn(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let eval = |x: f64, probes: &mut Vec<(f64, f64)>| -> Result<f64> {
        let v = f(x)?;
        probes.push((x, v));
        Ok(score(v))
    };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c, probes)?;
    let mut fd = eval(d, probes)?;
    for _ in 0..200 {
        if b - a <= tol.max(1e-13 * b) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c, probes)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d, probes)?;
        }
        if fc == f64::INFINITY || fd == f64::INFINITY {
            break;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_ends() {
        let g = log_grid(1.0, 200, 1e-6);
        assert_eq!(g.len(), 200);
        assert!((g[0] - 1e-6).abs() < 1e-20);
        assert_eq!(g[199], 1.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn interior_maximum_is_refined() {
        let f = |e: f64| Ok(-(e - 0.3137).powi(2));
        let ext = extremize(f, 1.0, Goal::Maximize, &SweepOptions::default()).unwrap();
        assert!((ext.arg.unwrap() - 0.3137).abs() < 1e-8);
        assert!(ext.value <= 0.0);
    }

    #[test]
    fn endpoint_maximum() {
        // ε^{1/(3-ε)} is increasing on (0, 2]
        let f = |e: f64| Ok(e.powf(1.0 / (3.0 - e)));
        let ext = extremize(f, 2.0, Goal::Maximize, &SweepOptions::default()).unwrap();
        assert_eq!(ext.arg, Some(2.0));
        assert_eq!(ext.value, 2.0);
    }

    #[test]
    fn minimum_ignores_infinite_probes() {
        let f = |e: f64| Ok(if e > 0.5 { f64::INFINITY } else { 1.0 + (e - 0.2).powi(2) });
        let ext = extremize(f, 1.0, Goal::Minimize, &SweepOptions::default()).unwrap();
        assert!((ext.arg.unwrap() - 0.2).abs() < 1e-8);
        assert!((ext.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn any_infinite_probe_makes_sup_infinite() {
        let f = |e: f64| Ok(if e < 1e-3 { f64::INFINITY } else { 1.0 });
        let ext = extremize(f, 1.0, Goal::Maximize, &SweepOptions::default()).unwrap();
        assert_eq!(ext.value, f64::INFINITY);
        assert!(ext.arg.is_some());
        let all = extremize(|_| Ok(f64::INFINITY), 1.0, Goal::Maximize, &SweepOptions::default())
            .unwrap();
        assert_eq!(all.arg, None);
    }

    #[test]
    fn best_value_dominates_every_probe() {
        let f = |e: f64| Ok((5.0 * e).sin() * e);
        let ext = extremize(f, 3.0, Goal::Maximize, &SweepOptions::default()).unwrap();
        assert!(ext.probes.iter().all(|&(_, v)| v <= ext.value));
    }

    #[test]
    fn errors_propagate() {
        let f = |e: f64| if e > 0.5 { Err(Error::SingularPoint(e)) } else { Ok(e) };
        assert!(extremize(f, 1.0, Goal::Maximize, &SweepOptions::default()).is_err());
    }
}
