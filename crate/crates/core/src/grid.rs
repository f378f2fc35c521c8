//! Uniform one-dimensional grids.

use crate::error::{Error, Result};

/// A closed interval sampled at `count` uniformly spaced nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range1D {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Range1D {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::invalid("range bounds must be finite"));
        }
        if max <= min {
            return Err(Error::invalid(format!(
                "range max {max} must exceed min {min}"
            )));
        }
        if count < 2 {
            return Err(Error::invalid("range needs at least 2 nodes"));
        }
        Ok(Range1D { min, max, count })
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.min + self.spacing() * i as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.node(i)).collect()
    }
}
