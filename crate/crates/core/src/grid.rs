use crate::error::{Error, Result};

/// Strictly increasing, non-negative time points.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least two points, got {}",
                points.len()
            )));
        }
        if points[0].is_nan() || points[0] < 0.0 {
            return Err(Error::InvalidGrid(format!(
                "first point {} is negative",
                points[0]
            )));
        }
        for w in points.windows(2) {
            if w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater) || !w[1].is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "points not strictly increasing at {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { points })
    }

    /// `cells` equal steps on [start, end].
    pub fn uniform(start: f64, end: f64, cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidGrid("zero cells".into()));
        }
        let h = (end - start) / cells as f64;
        let mut points: Vec<f64> = (0..cells).map(|i| start + h * i as f64).collect();
        points.push(end);
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn start(&self) -> f64 {
        self.points[0]
    }

    pub fn end(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn cells(&self) -> usize {
        self.points.len() - 1
    }
}

/// Values of one path on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl PathSample {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Trapezoidal ∫ g(X_u) du along the grid.
    pub fn trapezoid<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        let t = self.grid.points();
        let mut acc = 0.0;
        let mut prev = g(self.values[0]);
        for i in 1..t.len() {
            let cur = g(self.values[i]);
            acc += 0.5 * (prev + cur) * (t[i] - t[i - 1]);
            prev = cur;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(TimeGrid::new(vec![0.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![-1.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, f64::NAN]).is_err());
        assert!(TimeGrid::uniform(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn uniform_hits_endpoint_exactly() {
        let g = TimeGrid::uniform(0.5, 2.0, 3).unwrap();
        assert_eq!(g.points(), &[0.5, 1.0, 1.5, 2.0]);
        assert_eq!(g.cells(), 3);
    }

    #[test]
    fn path_length_must_match() {
        let g = TimeGrid::uniform(0.0, 1.0, 2).unwrap();
        assert!(PathSample::new(g.clone(), vec![0.0; 2]).is_err());
        let p = PathSample::new(g, vec![0.0, 1.0, 2.0]).unwrap();
        assert!((p.trapezoid(|x| x) - 1.0).abs() < 1e-15);
    }
}
