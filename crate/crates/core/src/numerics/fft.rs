//! Centred, unitary discrete Fourier transforms.
//!
//! The discrete transform is
//! `y_m = n^{-1/2} Σ_j v_j exp(∓2πi (j − n/2)(m − n/2)/n)` with `−` for the
//! forward direction, so both the input and the output are laid out with the
//! origin at index n/2. Forward and inverse are exact inverses of each other.
//!
//! [`fourier_transform`] rescales this into an approximation of the unitary
//! continuous transform `ψ̃(k) = (2π)^{-1/2} ∫ e^{−ikx} ψ(x) dx`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{Axis, Grid1D};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// A reusable centred transform of fixed length; cheap to share across threads.
#[derive(Clone)]
pub struct CenteredFft {
    fft: Arc<dyn Fft<f64>>,
    n: usize,
}

impl CenteredFft {
    pub fn new(n: usize, direction: Direction) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::BadGrid(format!("transform length {n} is not a power of two")));
        }
        let mut planner = FftPlanner::new();
        let fft = match direction {
            Direction::Forward => planner.plan_fft_forward(n),
            Direction::Inverse => planner.plan_fft_inverse(n),
        };
        Ok(Self { fft, n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn scratch_len(&self) -> usize {
        self.fft.get_inplace_scratch_len()
    }

    /// Transforms `buf` in place; `buf.len()` must equal `self.len()`.
    pub fn process(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        checkerboard(buf);
        self.fft.process_with_scratch(buf, scratch);
        // (−1)^{n/2} from the constant term of the centred exponent.
        let sign = if (self.n / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let scale = sign / (self.n as f64).sqrt();
        for (m, v) in buf.iter_mut().enumerate() {
            *v *= if m % 2 == 0 { scale } else { -scale };
        }
    }

    pub fn process_vec(&self, buf: &mut [Complex64]) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.scratch_len()];
        self.process(buf, &mut scratch);
    }
}

fn checkerboard(buf: &mut [Complex64]) {
    for v in buf.iter_mut().skip(1).step_by(2) {
        *v = -*v;
    }
}

/// Centred unitary DFT of the samples; the output lives on the conjugate axis.
pub fn dft_1d(samples: &Grid1D<Complex64>, direction: Direction) -> Result<Grid1D<Complex64>> {
    let axis = samples.axis();
    if !axis.is_power_of_two() {
        return Err(Error::BadGrid(format!("{} points is not a power of two", axis.n_points())));
    }
    let plan = CenteredFft::new(axis.n_points(), direction)?;
    let mut buf = samples.values().to_vec();
    plan.process_vec(&mut buf);
    Grid1D::new(axis.conjugate()?, buf)
}

/// Approximates the unitary continuous Fourier transform from samples on a
/// centred axis (see [`Axis::centered`]).
pub fn fourier_transform(samples: &Grid1D<Complex64>, direction: Direction) -> Result<Grid1D<Complex64>> {
    let axis: &Axis = samples.axis();
    if !axis.is_centered() {
        return Err(Error::BadGrid("continuous transform needs a centred axis".into()));
    }
    let out = dft_1d(samples, direction)?;
    let scale = continuum_scale(axis);
    let conj = *out.axis();
    let values = out.into_values().into_iter().map(|v| v * scale).collect();
    Grid1D::new(conj, values)
}

/// Factor converting the centred unitary DFT into the continuous transform:
/// step·√n/√(2π).
pub fn continuum_scale(axis: &Axis) -> f64 {
    axis.step() * (axis.n_points() as f64).sqrt() / (2.0 * std::f64::consts::PI).sqrt()
}
