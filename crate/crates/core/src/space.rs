//! Measure space, subintervals and translated windows.
//!
//! The measure space is a finite interval with Lebesgue measure. Windows are
//! translates `Q + x` of a base interval `Q = [offset, offset + width)`; how a
//! translate that leaves the interval is brought back is set by [`WindowMode`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to snap computed window ends onto the interval ends.
const SNAP: f64 = 1e-13;

/// A finite interval `(lower, upper)` with Lebesgue measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpace {
    pub lower: f64,
    pub upper: f64,
}

impl MeasureSpace {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        let space = Self { lower, upper };
        space.validate()?;
        Ok(space)
    }

    pub fn unit() -> Self {
        Self { lower: 0.0, upper: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.is_finite() && self.upper.is_finite() && self.lower < self.upper {
            Ok(())
        } else {
            Err(Error::InvalidInterval { lower: self.lower, upper: self.upper })
        }
    }

    /// Total mass `μ(Ω) = upper − lower`.
    pub fn mass(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn interval(&self) -> Subinterval {
        Subinterval { lo: self.lower, hi: self.upper }
    }

    pub fn region(&self) -> Region {
        Region::from(self.interval())
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lower <= t && t <= self.upper
    }

    /// `m` equally spaced points from `lower` to `upper`, both included.
    pub fn uniform_grid(&self, m: usize) -> Vec<f64> {
        let h = self.mass() / (m - 1) as f64;
        (0..m)
            .map(|i| if i + 1 == m { self.upper } else { self.lower + i as f64 * h })
            .collect()
    }
}

/// A closed interval `[lo, hi]`; the endpoints have measure zero so openness
/// never matters for the norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subinterval {
    pub lo: f64,
    pub hi: f64,
}

impl Subinterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidInterval { lower: lo, upper: hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn intersect(&self, other: &Subinterval) -> Option<Subinterval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Subinterval { lo, hi })
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }

    pub fn contains_interior(&self, t: f64) -> bool {
        self.lo < t && t < self.hi
    }
}

/// A finite union of disjoint subintervals, sorted by left endpoint.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Region {
    parts: Vec<Subinterval>,
}

impl Region {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a region from possibly unsorted pieces; empty pieces are dropped.
    /// Pieces are assumed not to overlap.
    pub fn from_parts(parts: impl IntoIterator<Item = Subinterval>) -> Self {
        let mut parts: Vec<Subinterval> = parts.into_iter().filter(|p| !p.is_empty()).collect();
        parts.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        Self { parts }
    }

    pub fn parts(&self) -> &[Subinterval] {
        &self.parts
    }

    pub fn measure(&self) -> f64 {
        self.parts.iter().map(Subinterval::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn intersect(&self, iv: &Subinterval) -> Region {
        Region::from_parts(self.parts.iter().filter_map(|p| p.intersect(iv)))
    }
}

impl From<Subinterval> for Region {
    fn from(iv: Subinterval) -> Self {
        Region::from_parts([iv])
    }
}

/// How a translated window is mapped back into the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowMode {
    /// Translation on the circle obtained by identifying the two ends of the
    /// interval; every point is covered by windows for a set of `x` of
    /// measure `|Q|`.
    #[default]
    Periodic,
    /// `Q + x` intersected with the interval; points near the left end are
    /// covered by fewer windows.
    Clipped,
}

/// The base window `Q = [offset, offset + width)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub offset: f64,
    pub width: f64,
    #[serde(default)]
    pub mode: WindowMode,
}

impl Window {
    pub fn new(offset: f64, width: f64, mode: WindowMode) -> Result<Self> {
        if !(width > 0.0 && width.is_finite() && offset.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "window needs finite offset and positive width, got [{offset}, {offset}+{width})"
            )));
        }
        Ok(Self { offset, width, mode })
    }

    /// The window covering the whole space.
    pub fn whole(space: &MeasureSpace, mode: WindowMode) -> Self {
        Self { offset: space.lower, width: space.mass(), mode }
    }

    /// Checks `Q ⊂ Ω` with nonempty interior.
    pub fn validate(&self, space: &MeasureSpace) -> Result<()> {
        let tol = SNAP * space.mass();
        if !(self.width > 0.0)
            || self.offset < space.lower - tol
            || self.offset + self.width > space.upper + tol
        {
            return Err(Error::InvalidArgument(format!(
                "window [{}, {}) is not inside ({}, {})",
                self.offset,
                self.offset + self.width,
                space.lower,
                space.upper
            )));
        }
        Ok(())
    }

    /// `|Q|`.
    pub fn measure(&self) -> f64 {
        self.width
    }

    /// The translate `Q + x` brought back into `space`.
    pub fn region_at(&self, x: f64, space: &MeasureSpace) -> Region {
        let len = space.mass();
        let tol = SNAP * len;
        match self.mode {
            WindowMode::Clipped => {
                let lo = (self.offset + x).max(space.lower);
                let mut hi = (self.offset + x + self.width).min(space.upper);
                if (space.upper - hi).abs() <= tol {
                    hi = space.upper;
                }
                if hi - lo <= tol {
                    Region::empty()
                } else {
                    Region::from(Subinterval { lo, hi })
                }
            }
            WindowMode::Periodic => {
                if self.width >= len - tol {
                    return space.region();
                }
                let mut start = space.lower + (self.offset + x - space.lower).rem_euclid(len);
                if start >= space.upper - tol || (start - space.lower).abs() <= tol {
                    start = space.lower;
                }
                let end = start + self.width;
                if end <= space.upper + tol {
                    let hi = if (end - space.upper).abs() <= tol { space.upper } else { end };
                    Region::from(Subinterval { lo: start, hi })
                } else {
                    let wrapped = space.lower + (end - space.upper);
                    Region::from_parts([
                        Subinterval { lo: start, hi: space.upper },
                        Subinterval { lo: space.lower, hi: wrapped },
                    ])
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_space() {
        assert!(MeasureSpace::new(1.0, 1.0).is_err());
        assert!(MeasureSpace::new(0.0, f64::INFINITY).is_err());
        assert_eq!(MeasureSpace::new(0.0, 2.0).unwrap().mass(), 2.0);
    }

    #[test]
    fn clipped_window_is_truncated() {
        let space = MeasureSpace::unit();
        let q = Window::new(0.0, 1.0, WindowMode::Clipped).unwrap();
        let r = q.region_at(0.25, &space);
        assert_eq!(r.parts(), &[Subinterval { lo: 0.25, hi: 1.0 }]);
        assert!(q.region_at(1.0, &space).is_empty());
    }

    #[test]
    fn periodic_window_wraps() {
        let space = MeasureSpace::unit();
        let q = Window::new(0.0, 0.5, WindowMode::Periodic).unwrap();
        let r = q.region_at(0.75, &space);
        assert_eq!(
            r.parts(),
            &[Subinterval { lo: 0.0, hi: 0.25 }, Subinterval { lo: 0.75, hi: 1.0 }]
        );
        assert!((r.measure() - 0.5).abs() < 1e-15);
        // x = upper is the same window as x = lower
        assert_eq!(q.region_at(1.0, &space), q.region_at(0.0, &space));
    }

    #[test]
    fn full_width_periodic_window_is_the_space() {
        let space = MeasureSpace::new(0.0, 2.0).unwrap();
        let q = Window::whole(&space, WindowMode::Periodic);
        for x in [0.0, 0.3, 1.7, 2.0] {
            assert_eq!(q.region_at(x, &space), space.region());
        }
    }

    #[test]
    fn window_must_fit() {
        let space = MeasureSpace::unit();
        assert!(Window::new(0.6, 0.5, WindowMode::Periodic).unwrap().validate(&space).is_err());
        assert!(Window::new(0.0, 0.0, WindowMode::Periodic).is_err());
        assert!(Window::new(0.5, 0.5, WindowMode::Clipped).unwrap().validate(&space).is_ok());
    }

    #[test]
    fn uniform_grid_hits_both_ends() {
        let g = MeasureSpace::unit().uniform_grid(257);
        assert_eq!(g.len(), 257);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[128], 0.5);
        assert_eq!(g[256], 1.0);
    }
}
