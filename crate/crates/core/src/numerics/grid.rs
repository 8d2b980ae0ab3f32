use crate::error::{Error, Result};

/// A uniformly spaced axis `min, min + step, ..., max` with both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    min: f64,
    max: f64,
    n_points: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::BadGrid(format!("need at least 2 points, got {n_points}")));
        }
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(Error::BadGrid(format!("need finite min < max, got [{min}, {max}]")));
        }
        Ok(Self { min, max, n_points })
    }

    /// The FFT-centred axis `x_j = (j − n/2)·step`, j = 0..n.
    pub fn centered(n_points: usize, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::BadGrid(format!("step must be positive, got {step}")));
        }
        let half = (n_points / 2) as f64;
        Self::new(-half * step, (n_points as f64 - 1.0 - half) * step, n_points)
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.n_points - 1) as f64
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    pub fn point(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.point(i))
    }

    /// Whether this axis has the layout produced by [`Axis::centered`].
    pub fn is_centered(&self) -> bool {
        let expected = -((self.n_points / 2) as f64) * self.step();
        (self.min - expected).abs() <= 1e-9 * self.step()
    }

    pub fn is_power_of_two(&self) -> bool {
        self.n_points.is_power_of_two()
    }

    /// Conjugate (Fourier) axis with step 2π/(n·step), centred.
    pub fn conjugate(&self) -> Result<Self> {
        let dk = 2.0 * std::f64::consts::PI / (self.n_points as f64 * self.step());
        Self::centered(self.n_points, dk)
    }
}

/// Samples of some quantity on a uniform [`Axis`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D<T> {
    axis: Axis,
    values: Vec<T>,
}

impl<T> Grid1D<T> {
    pub fn new(axis: Axis, values: Vec<T>) -> Result<Self> {
        if values.len() != axis.n_points() {
            return Err(Error::BadGrid(format!(
                "{} values for a {}-point axis",
                values.len(),
                axis.n_points()
            )));
        }
        Ok(Self { axis, values })
    }

    pub fn from_fn(axis: Axis, f: impl Fn(f64) -> T) -> Self {
        let values = axis.points().map(f).collect();
        Self { axis, values }
    }

    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn min(&self) -> f64 {
        self.axis.min()
    }

    pub fn max(&self) -> f64 {
        self.axis.max()
    }

    pub fn n_points(&self) -> usize {
        self.axis.n_points()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &T)> + '_ {
        self.axis.points().zip(self.values.iter())
    }
}

impl Grid1D<f64> {
    /// Plain Riemann sum Σ v_j·step.
    pub fn riemann_sum(&self) -> f64 {
        crate::exec::neumaier_sum(self.values.iter().copied()) * self.axis.step()
    }

    pub fn trapezoid(&self) -> f64 {
        let v = &self.values;
        let inner = crate::exec::neumaier_sum(v[1..v.len() - 1].iter().copied());
        (inner + 0.5 * (v[0] + v[v.len() - 1])) * self.axis.step()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_axes() {
        assert!(Axis::new(0.0, 1.0, 1).is_err());
        assert!(Axis::new(1.0, 1.0, 10).is_err());
        assert!(Axis::new(0.0, f64::INFINITY, 10).is_err());
        assert!(Grid1D::new(Axis::new(0.0, 1.0, 3).unwrap(), vec![1.0; 4]).is_err());
    }

    #[test]
    fn centered_layout() {
        let ax = Axis::centered(8, 0.5).unwrap();
        assert_eq!(ax.min(), -2.0);
        assert_eq!(ax.max(), 1.5);
        assert_eq!(ax.point(4), 0.0);
        assert!(ax.is_centered());
        assert!(!Axis::new(-1.0, 1.0, 8).unwrap().is_centered());
        let k = ax.conjugate().unwrap();
        assert!((k.step() - 2.0 * std::f64::consts::PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn sums() {
        let g = Grid1D::from_fn(Axis::new(0.0, 1.0, 101).unwrap(), |x| x);
        assert!((g.trapezoid() - 0.5).abs() < 1e-14);
    }
}
