use rand::Rng;

use crate::error::{GeomError, Result};
use crate::metric_core::jet::MAX_VARS;

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn unbounded() -> Self {
        Interval::new(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn positive() -> Self {
        Interval::new(0.0, f64::INFINITY)
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    /// Sub-interval used for random sampling: finite ends are pulled in by a
    /// margin, infinite ends are capped at `±2` around the other end (or 0).
    pub fn sampling_window(&self) -> (f64, f64) {
        let (lo, hi) = match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => (self.lo, self.hi),
            (true, false) => (self.lo, self.lo.max(0.0) + 2.0),
            (false, true) => (self.hi.min(0.0) - 2.0, self.hi),
            (false, false) => (-2.0, 2.0),
        };
        let margin = 0.1 * (hi - lo);
        let lo = if self.lo.is_finite() { lo + margin } else { lo };
        let hi = if self.hi.is_finite() { hi - margin } else { hi };
        (lo, hi)
    }
}

/// A single coordinate chart with an open box domain.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateChart {
    names: Vec<String>,
    domain: Vec<Interval>,
}

impl CoordinateChart {
    pub fn new<S: Into<String>>(names: Vec<S>, domain: Vec<Interval>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(GeomError::InvalidInput("chart needs at least one coordinate".into()));
        }
        if names.len() != domain.len() {
            return Err(GeomError::DimensionMismatch {
                expected: names.len(),
                got: domain.len(),
            });
        }
        if names.len() > MAX_VARS {
            return Err(GeomError::DimensionTooLarge {
                dim: names.len(),
                max: MAX_VARS,
            });
        }
        if let Some(i) = domain.iter().position(Interval::is_empty) {
            return Err(GeomError::InvalidInput(format!(
                "empty interval for coordinate `{}`",
                names[i]
            )));
        }
        Ok(CoordinateChart { names, domain })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn domain(&self) -> &[Interval] {
        &self.domain
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.domain)
                .all(|(v, iv)| v.is_finite() && iv.contains(*v))
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        for (i, (v, iv)) in x.iter().zip(&self.domain).enumerate() {
            if !(v.is_finite() && iv.contains(*v)) {
                return Err(GeomError::OutOfDomain {
                    coords: x.to_vec(),
                    coord: self.names[i].clone(),
                });
            }
        }
        Ok(())
    }

    /// Chart of the product `self × other`, coordinates concatenated.
    pub fn product(&self, other: &CoordinateChart) -> Result<CoordinateChart> {
        let mut names = self.names.clone();
        names.extend(other.names.iter().cloned());
        let mut domain = self.domain.clone();
        domain.extend(other.domain.iter().copied());
        CoordinateChart::new(names, domain)
    }

    /// Chart with one extra coordinate prepended.
    pub fn prepend(&self, name: &str, interval: Interval) -> Result<CoordinateChart> {
        let head = CoordinateChart::new(vec![name.to_string()], vec![interval])?;
        head.product(self)
    }

    pub fn with_domain(&self, index: usize, interval: Interval) -> Result<CoordinateChart> {
        let mut domain = self.domain.clone();
        domain[index] = interval;
        CoordinateChart::new(self.names.clone(), domain)
    }

    /// Uniform sample inside the sampling windows of each coordinate.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.domain
            .iter()
            .map(|iv| {
                let (lo, hi) = iv.sampling_window();
                rng.gen_range(lo..hi)
            })
            .collect()
    }
}
