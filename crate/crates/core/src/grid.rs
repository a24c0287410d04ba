use crate::error::{Error, Result};

/// Uniform time grid `t_k = k · end / steps`, `k = 0..=steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    end: f64,
    steps: usize,
}

const UNIFORMITY_TOLERANCE: f64 = 1e-9;

impl TimeGrid {
    pub fn new(end: f64, steps: usize) -> Result<Self> {
        if !(end.is_finite() && end > 0.0) {
            return Err(Error::InvalidGrid(format!("end time {end}")));
        }
        if steps == 0 {
            return Err(Error::InvalidGrid("zero steps".into()));
        }
        Ok(TimeGrid { end, steps })
    }

    /// Accepts explicit times; they must start at 0 and be uniformly spaced.
    pub fn from_times(times: &[f64]) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidGrid("need at least two times".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidGrid("grid must start at t = 0".into()));
        }
        let steps = times.len() - 1;
        let grid = Self::new(times[steps], steps)?;
        let h = grid.step();
        let uniform = times
            .iter()
            .enumerate()
            .all(|(k, &t)| (t - grid.time(k)).abs() <= UNIFORMITY_TOLERANCE * h);
        if !uniform {
            return Err(Error::NonUniformGrid);
        }
        Ok(grid)
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.end / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.end
        } else {
            self.end * k as f64 / self.steps as f64
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(|k| self.time(k))
    }

    /// Index of grid point `t`, if `t` lies on the grid.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = t / self.step();
        let k = x.round();
        if !(k >= 0.0 && k <= self.steps as f64) || (x - k).abs() > UNIFORMITY_TOLERANCE {
            return Err(Error::OffGrid(t));
        }
        Ok(k as usize)
    }
}
