//! Uniform time grids.

use crate::{Error, Result};

/// Grid points `t0 + k * dt` for `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeGrid {
    t0: f64,
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, n_steps: usize) -> Result<Self> {
        if !t0.is_finite() {
            return Err(Error::InvalidGrid("t0 must be finite"));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidGrid("dt must be positive and finite"));
        }
        if n_steps == 0 {
            return Err(Error::InvalidGrid("n_steps must be at least 1"));
        }
        Ok(Self { t0, dt, n_steps })
    }

    /// Grid covering `[t0, t_end]`; the step count is `(t_end - t0) / dt`
    /// rounded to the nearest integer, so the last point may differ from
    /// `t_end` by rounding.
    pub fn spanning(t0: f64, t_end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidGrid("dt must be positive and finite"));
        }
        if !(t_end > t0) {
            return Err(Error::InvalidGrid("t_end must exceed t0"));
        }
        let n = libm::round((t_end - t0) / dt);
        if n < 1.0 || n > usize::MAX as f64 {
            return Err(Error::InvalidGrid("horizon is shorter than one step"));
        }
        Self::new(t0, dt, n as usize)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of grid points, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.n_steps)
    }

    pub fn horizon(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_steps + 1).map(move |k| self.t(k))
    }

    /// The same interval with each step split into `factor` sub-steps.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidGrid("refinement factor must be positive"));
        }
        Self::new(self.t0, self.dt / factor as f64, self.n_steps * factor)
    }

    /// If `coarse` steps are integer multiples of this grid's steps and its
    /// points fall on this grid, returns `(offset, stride)` such that coarse
    /// point `k` is fine point `offset + k * stride`.
    pub fn embedding_of(&self, coarse: &TimeGrid) -> Result<(usize, usize)> {
        let ratio = coarse.dt / self.dt;
        let stride = libm::round(ratio);
        if stride < 1.0 || libm::fabs(ratio - stride) > 1e-9 * ratio {
            return Err(Error::NoiseMismatch(
                "step is not an integer multiple of the noise step",
            ));
        }
        let shift = (coarse.t0 - self.t0) / self.dt;
        let offset = libm::round(shift);
        if offset < 0.0 || libm::fabs(shift - offset) > 1e-9 * (1.0 + libm::fabs(shift)) {
            return Err(Error::NoiseMismatch("grid start is not a noise grid point"));
        }
        let (offset, stride) = (offset as usize, stride as usize);
        if offset + coarse.n_steps * stride > self.n_steps {
            return Err(Error::NoiseMismatch(
                "noise path is shorter than the integration horizon",
            ));
        }
        Ok((offset, stride))
    }

    /// Whether `other` lies inside this grid's time span (up to rounding).
    pub fn covers(&self, other: &TimeGrid) -> bool {
        let slack = 1e-9 * self.dt;
        other.t0 >= self.t0 - slack && other.t_end() <= self.t_end() + slack
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_steps() {
        assert!(TimeGrid::new(0.0, 0.0, 10).is_err());
        assert!(TimeGrid::new(0.0, -1e-3, 10).is_err());
        assert!(TimeGrid::new(0.0, 1e-3, 0).is_err());
        assert!(TimeGrid::new(0.0, f64::NAN, 10).is_err());
    }

    #[test]
    fn spanning_rounds_step_count() {
        let g = TimeGrid::spanning(0.0, 20.0, 1e-3).unwrap();
        assert_eq!(g.n_steps(), 20_000);
        assert_eq!(g.len(), 20_001);
        assert!((g.t_end() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn embedding() {
        let fine = TimeGrid::new(0.0, 5e-4, 40).unwrap();
        let coarse = TimeGrid::new(0.0, 1e-3, 20).unwrap();
        assert_eq!(fine.embedding_of(&coarse).unwrap(), (0, 2));
        let too_long = TimeGrid::new(0.0, 1e-3, 21).unwrap();
        assert!(fine.embedding_of(&too_long).is_err());
        let misaligned = TimeGrid::new(0.0, 7.5e-4, 10).unwrap();
        assert!(fine.embedding_of(&misaligned).is_err());
    }
}
