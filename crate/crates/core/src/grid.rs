use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform axis sampled at cell centers: `min + (i + 0.5)(max - min)/cells`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub cells: usize,
}

impl GridAxis {
    pub fn new(min: f64, max: f64, cells: usize) -> Result<Self> {
        let axis = GridAxis { min, max, cells };
        axis.validate("axis")?;
        Ok(axis)
    }

    /// Single cell centered on `value`.
    pub fn point(value: f64) -> Self {
        GridAxis {
            min: value,
            max: value,
            cells: 1,
        }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if self.cells == 0 {
            return Err(Error::invalid(name, "cell count must be >= 1"));
        }
        if !self.min.is_finite() || !self.max.is_finite() || self.max < self.min {
            return Err(Error::invalid(
                name,
                format!("range [{}, {}] must be finite and ordered", self.min, self.max),
            ));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        (self.max - self.min) / self.cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * self.width()
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.cells).map(move |i| self.center(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centers_avoid_edges() {
        let a = GridAxis::new(0.0, 2.0, 4).unwrap();
        let c: Vec<f64> = a.centers().collect();
        assert_eq!(c, vec![0.25, 0.75, 1.25, 1.75]);
        assert_eq!(GridAxis::point(3.5).center(0), 3.5);
        assert!(GridAxis::new(1.0, 0.0, 3).is_err());
        assert!(GridAxis::new(0.0, 1.0, 0).is_err());
        assert!(GridAxis::new(0.0, f64::INFINITY, 2).is_err());
    }
}
