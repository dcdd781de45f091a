//! Spacetime grids and beable expectation-value fields on them.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::par;

/// A regular (t, x) grid. Both axes include their endpoints; a single-point
/// axis sits at its minimum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub nt: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, nx: usize, t_min: f64, t_max: f64, nt: usize) -> Result<Self> {
        let g = Self { x_min, x_max, nx, t_min, t_max, nt };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, lo, hi, n) in [("x", self.x_min, self.x_max, self.nx), ("t", self.t_min, self.t_max, self.nt)] {
            if n == 0 {
                return Err(Error::validation(format!("grid.n{name}"), "must be at least 1"));
            }
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::validation(format!("grid.{name}_min/{name}_max"), "must be finite"));
            }
            if n > 1 && hi <= lo {
                return Err(Error::validation(format!("grid.{name}_max"), format!("must exceed {name}_min")));
            }
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        if self.nx > 1 {
            (self.x_max - self.x_min) / (self.nx - 1) as f64
        } else {
            0.0
        }
    }

    pub fn dt(&self) -> f64 {
        if self.nt > 1 {
            (self.t_max - self.t_min) / (self.nt - 1) as f64
        } else {
            0.0
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx && self.nx > 1 {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    pub fn t(&self, j: usize) -> f64 {
        if j + 1 == self.nt && self.nt > 1 {
            self.t_max
        } else {
            self.t_min + j as f64 * self.dt()
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// ⟨ρ(x; t)⟩ sampled on a grid, stored row-major with t outer and x inner.
#[derive(Clone, Debug, PartialEq)]
pub struct BeableField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl BeableField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        if let Some(k) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::validation(format!("field.values[{k}]"), format!("{} is not a nonnegative number", values[k])));
        }
        Ok(Self { grid, values })
    }

    /// Evaluates `f(t, x)` at every grid point, in parallel when available.
    pub fn try_from_fn<F>(grid: GridSpec, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<f64> + Sync + Send,
    {
        grid.validate()?;
        let nx = grid.nx;
        let values = par::map_indices(grid.len(), |k| f(grid.t(k / nx), grid.x(k % nx)));
        Self::new(grid, values.into_iter().collect::<Result<Vec<f64>>>()?)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, ti: usize, xi: usize) -> f64 {
        self.values[ti * self.grid.nx + xi]
    }

    /// The spatial slice at time index `ti`.
    pub fn row(&self, ti: usize) -> &[f64] {
        let nx = self.grid.nx;
        &self.values[ti * nx..(ti + 1) * nx]
    }

    /// Trapezoid-rule integral of the slice at time index `ti`.
    pub fn slice_integral(&self, ti: usize) -> f64 {
        trapezoid(self.row(ti), self.grid.dx())
    }

    /// Plain sum of the slice (lattice total).
    pub fn slice_sum(&self, ti: usize) -> f64 {
        self.row(ti).iter().sum()
    }
}

pub fn trapezoid(samples: &[f64], dx: f64) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = samples[1..n - 1].iter().sum();
            dx * (inner + 0.5 * (samples[0] + samples[n - 1]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn grid_endpoints_are_exact() {
        let g = GridSpec::new(-1.3, 2.9, 7, 0.0, 0.1, 3).unwrap();
        assert_eq!(g.x(0), -1.3);
        assert_eq!(g.x(6), 2.9);
        assert_eq!(g.t(2), 0.1);
    }

    #[test]
    fn invalid_grids() {
        assert!(GridSpec::new(0.0, 1.0, 0, 0.0, 1.0, 2).is_err());
        assert!(GridSpec::new(1.0, 1.0, 2, 0.0, 1.0, 2).is_err());
        assert!(GridSpec::new(f64::NAN, 1.0, 2, 0.0, 1.0, 2).is_err());
        assert!(GridSpec::new(1.0, 1.0, 1, 0.0, 0.0, 1).is_ok());
    }

    #[test]
    fn field_layout_is_t_major() {
        let g = GridSpec::new(0.0, 1.0, 2, 0.0, 1.0, 3).unwrap();
        let f = BeableField::try_from_fn(g, |t, x| Ok(10.0 * t + x)).unwrap();
        assert_eq!(f.values(), &[0.0, 1.0, 5.0, 6.0, 10.0, 11.0]);
        assert_eq!(f.row(1), &[5.0, 6.0]);
    }

    #[test]
    fn negative_values_rejected() {
        let g = GridSpec::new(0.0, 1.0, 2, 0.0, 0.0, 1).unwrap();
        assert!(BeableField::new(g, vec![0.0, -1.0]).is_err());
        assert!(BeableField::new(g, vec![0.0]).is_err());
    }

    #[test]
    fn trapezoid_is_exact_for_linear() {
        assert!((trapezoid(&[0.0, 1.0, 2.0, 3.0], 1.0) - 4.5).abs() < 1e-15);
    }
}
