//! Paraxial free-space propagation of the Double-Gaussian state.
//!
//! Each photon carries half the pump frequency, so its transfer function,
//! with the common on-axis phase removed, is exp(−i·z·k²/k_p). Only
//! intensity-level quantities are computed: the joint density and its
//! Pearson coefficient. The relative phase that builds up between the planes
//! is deliberately not exposed.
//!
//! Negative z is allowed and means back-propagation.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{neumaier_sum, Execution};
use crate::gaussfit::DoubleGaussian;
use crate::numerics::fft::{continuum_scale, CenteredFft, Direction};
use crate::numerics::grid::Axis;

/// exp(−i·z·k_x²/k_p).
pub fn transfer_phase(z: f64, kx: f64, k_p: f64) -> Complex64 {
    Complex64::from_polar(1.0, -z * kx * kx / k_p)
}

/// Widths after both photons travel the same distance z:
/// σ̃± = √(σ±² + (z/(σ±·k_p))²).
pub fn propagate_equal(dg: &DoubleGaussian, z: f64, k_p: f64) -> Result<DoubleGaussian> {
    let spread = |s: f64| (s * s + (z / (s * k_p)).powi(2)).sqrt();
    DoubleGaussian::new(spread(dg.sigma_plus()), spread(dg.sigma_minus()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationPlanes {
    pub z1: f64,
    pub z2: f64,
    pub k_p: f64,
}

impl PropagationPlanes {
    pub fn new(z1: f64, z2: f64, k_p: f64) -> Result<Self> {
        if !(z1.is_finite() && z2.is_finite()) {
            return Err(Error::InvalidParameter("propagation distances must be finite".into()));
        }
        if !(k_p > 0.0 && k_p.is_finite()) {
            return Err(Error::InvalidParameter(format!("k_p must be positive, got {k_p}")));
        }
        Ok(Self { z1, z2, k_p })
    }

    /// Planes at reduced distances z̄ᵢ = zᵢ/(k_p·σ₊·σ₋).
    pub fn from_reduced(dg: &DoubleGaussian, zbar1: f64, zbar2: f64, k_p: f64) -> Result<Self> {
        let unit = k_p * dg.sigma_plus() * dg.sigma_minus();
        Self::new(zbar1 * unit, zbar2 * unit, k_p)
    }

    pub fn reduced(&self, dg: &DoubleGaussian) -> (f64, f64) {
        let unit = self.k_p * dg.sigma_plus() * dg.sigma_minus();
        (self.z1 / unit, self.z2 / unit)
    }
}

/// Density ∝ exp(−(a·x₁² + 2b·x₁x₂ + c·x₂²)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateGaussian {
    pub coeff_a: f64,
    pub coeff_b: f64,
    pub coeff_c: f64,
}

impl BivariateGaussian {
    pub fn new(coeff_a: f64, coeff_b: f64, coeff_c: f64) -> Result<Self> {
        if !(coeff_a > 0.0 && coeff_c > 0.0 && coeff_a * coeff_c - coeff_b * coeff_b > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "quadratic form (a, b, c) = ({coeff_a:e}, {coeff_b:e}, {coeff_c:e}) is not positive definite"
            )));
        }
        Ok(Self {
            coeff_a,
            coeff_b,
            coeff_c,
        })
    }

    pub fn determinant(&self) -> f64 {
        self.coeff_a * self.coeff_c - self.coeff_b * self.coeff_b
    }

    /// (Var x₁, Cov(x₁, x₂), Var x₂).
    pub fn covariance(&self) -> (f64, f64, f64) {
        let s = 0.5 / self.determinant();
        (s * self.coeff_c, -s * self.coeff_b, s * self.coeff_a)
    }

    pub fn pearson_r(&self) -> f64 {
        -self.coeff_b / (self.coeff_a * self.coeff_c).sqrt()
    }

    pub fn density(&self, x1: f64, x2: f64) -> f64 {
        let q = self.coeff_a * x1 * x1 + 2.0 * self.coeff_b * x1 * x2 + self.coeff_c * x2 * x2;
        self.determinant().sqrt() / PI * (-q).exp()
    }
}

/// Joint density at independent planes z₁ (signal) and z₂ (idler).
pub fn propagate_general(dg: &DoubleGaussian, planes: &PropagationPlanes) -> Result<BivariateGaussian> {
    let (p2, m2) = (dg.sigma_plus().powi(2), dg.sigma_minus().powi(2));
    let (z1, z2, k) = (planes.z1, planes.z2, planes.k_p);
    let k2 = k * k;
    let (sum, diff, prod) = (p2 + m2, p2 - m2, p2 * m2);
    let d = k2 * (z1 * z1 + z2 * z2) * sum * sum
        + 2.0 * k2 * z1 * z2 * diff * diff
        + 4.0 * z1 * z1 * z2 * z2
        + 4.0 * k2 * k2 * prod * prod;
    BivariateGaussian::new(
        k2 * sum * (z2 * z2 + k2 * prod) / d,
        k2 * diff * (z1 * z2 - k2 * prod) / d,
        k2 * sum * (z1 * z1 + k2 * prod) / d,
    )
}

/// r(z₁, z₂) = r₀(1 − z̄₁z̄₂)/√((z̄₁² + 1)(z̄₂² + 1)).
pub fn pearson_propagated(dg: &DoubleGaussian, planes: &PropagationPlanes) -> f64 {
    let (p2, m2) = (dg.sigma_plus().powi(2), dg.sigma_minus().powi(2));
    let r0 = (p2 - m2) / (p2 + m2);
    let (a, b) = planes.reduced(dg);
    r0 * (1.0 - a * b) / ((a * a + 1.0) * (b * b + 1.0)).sqrt()
}

/// Sampled |ψ(x₁, x₂)|² on a square grid, row-major with x₁ along rows.
#[derive(Debug, Clone)]
pub struct JointDensity {
    axis: Axis,
    values: Vec<f64>,
}

/// Second moments of a sampled joint density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointMoments {
    pub mass: f64,
    pub var_x1: f64,
    pub var_x2: f64,
    pub cov: f64,
}

impl JointMoments {
    pub fn pearson_r(&self) -> f64 {
        self.cov / (self.var_x1 * self.var_x2).sqrt()
    }

    /// (Var x₊, Var x₋, Cov(x₊, x₋)).
    pub fn rotated(&self) -> (f64, f64, f64) {
        let plus = 0.5 * (self.var_x1 + self.var_x2) + self.cov;
        let minus = 0.5 * (self.var_x1 + self.var_x2) - self.cov;
        (plus, minus, 0.5 * (self.var_x1 - self.var_x2))
    }
}

impl JointDensity {
    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axis.n_points() + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Riemann-sum moments about the origin.
    pub fn moments(&self) -> JointMoments {
        let n = self.axis.n_points();
        let dx = self.axis.step();
        let xs: Vec<f64> = self.axis.points().collect();
        let mut m = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
        for (i, &x1) in xs.iter().enumerate() {
            let row = &self.values[i * n..(i + 1) * n];
            let r0 = neumaier_sum(row.iter().copied());
            let r1 = neumaier_sum(row.iter().zip(&xs).map(|(v, x2)| v * x2));
            let r2 = neumaier_sum(row.iter().zip(&xs).map(|(v, x2)| v * x2 * x2));
            m[0].push(r0);
            m[1].push(x1 * x1 * r0);
            m[2].push(r2);
            m[3].push(x1 * r1);
        }
        let area = dx * dx;
        let [m0, m11, m22, m12] = m.map(|v| neumaier_sum(v) * area);
        JointMoments {
            mass: m0,
            var_x1: m11 / m0,
            var_x2: m22 / m0,
            cov: m12 / m0,
        }
    }
}

/// Joint density at planes (z₁, z₂) by explicit Fresnel propagation: the
/// momentum-space Double-Gaussian is multiplied by both transfer phases and
/// inverse-transformed on an n×n grid.
///
/// Independent of the closed forms in this module. The grid must be centred
/// with a power-of-two length of at least 1024, span eight of the widest
/// propagated widths, resolve the momentum amplitude, and keep the transfer
/// phase increment per momentum sample at or below π.
pub fn fft_propagate_oracle(
    dg: &DoubleGaussian,
    planes: &PropagationPlanes,
    axis: &Axis,
    exec: Execution,
) -> Result<JointDensity> {
    check_oracle_grid(dg, planes, axis)?;
    let n = axis.n_points();
    let k_axis = axis.conjugate()?;
    let ks: Vec<f64> = k_axis.points().collect();
    let (sp, sm) = (dg.sigma_plus(), dg.sigma_minus());
    let norm = (2.0 * sp * sp / PI).powf(0.25) * (2.0 * sm * sm / PI).powf(0.25);
    let ph1: Vec<Complex64> = ks.iter().map(|&k| transfer_phase(planes.z1, k, planes.k_p)).collect();
    let ph2: Vec<Complex64> = ks.iter().map(|&k| transfer_phase(planes.z2, k, planes.k_p)).collect();

    let mut field = vec![Complex64::new(0.0, 0.0); n * n];
    exec.for_each_chunk_mut(&mut field, n, |i, row| {
        let k1 = ks[i];
        for (j, v) in row.iter_mut().enumerate() {
            let kp = (k1 + ks[j]) / SQRT_2;
            let km = (k1 - ks[j]) / SQRT_2;
            let g = norm * (-sp * sp * kp * kp - sm * sm * km * km).exp();
            *v = ph1[i] * ph2[j] * g;
        }
    });

    let plan = CenteredFft::new(n, Direction::Inverse)?;
    transform_rows(&plan, &mut field, exec);
    let mut field = transpose(&field, n);
    transform_rows(&plan, &mut field, exec);
    let field = transpose(&field, n);

    // One continuum factor per transformed axis on the amplitude.
    let density_scale = continuum_scale(&k_axis).powi(4);
    let values = field.iter().map(|z| z.norm_sqr() * density_scale).collect();
    Ok(JointDensity { axis: *axis, values })
}

/// Smallest grid accepted by [`fft_propagate_oracle`].
pub const ORACLE_MIN_POINTS: usize = 1024;

fn check_oracle_grid(dg: &DoubleGaussian, planes: &PropagationPlanes, axis: &Axis) -> Result<()> {
    let n = axis.n_points();
    if !axis.is_centered() || !axis.is_power_of_two() || n < ORACLE_MIN_POINTS {
        return Err(Error::BadGrid(format!(
            "oracle needs a centred power-of-two axis with at least {ORACLE_MIN_POINTS} points"
        )));
    }
    let widest = [planes.z1, planes.z2]
        .iter()
        .map(|&z| {
            let p = propagate_equal(dg, z, planes.k_p).expect("propagated widths stay positive");
            p.sigma_plus().max(p.sigma_minus())
        })
        .fold(0.0, f64::max);
    if axis.span() < 8.0 * widest {
        return Err(Error::BadGrid(format!(
            "span {:e} is below eight propagated widths ({:e})",
            axis.span(),
            8.0 * widest
        )));
    }
    let k_max = PI / axis.step();
    let dk = 2.0 * PI / axis.span();
    if k_max * dg.sigma_plus().min(dg.sigma_minus()) < 6.0 {
        return Err(Error::BadGrid("step too coarse to hold the momentum amplitude".into()));
    }
    let z = planes.z1.abs().max(planes.z2.abs());
    if 2.0 * z * k_max * dk / planes.k_p > PI {
        return Err(Error::BadGrid("transfer phase aliases at the momentum grid edge".into()));
    }
    Ok(())
}

fn transform_rows(plan: &CenteredFft, data: &mut [Complex64], exec: Execution) {
    let n = plan.len();
    exec.for_each_chunk_mut(data, n, |_, row| {
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.scratch_len()];
        plan.process(row, &mut scratch);
    });
}

fn transpose(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    const BLOCK: usize = 32;
    for ib in (0..n).step_by(BLOCK) {
        for jb in (0..n).step_by(BLOCK) {
            for i in ib..(ib + BLOCK).min(n) {
                for j in jb..(jb + BLOCK).min(n) {
                    out[j * n + i] = data[i * n + j];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn oracle_dg() -> DoubleGaussian {
        DoubleGaussian::new(1.0, 0.25).unwrap()
    }

    fn oracle_axis() -> Axis {
        Axis::centered(1024, 96.0 / 1024.0).unwrap()
    }

    #[test]
    fn transfer_phase_basics() {
        assert_eq!(transfer_phase(0.0, 3.0, 2.0), Complex64::new(1.0, 0.0));
        assert_eq!(transfer_phase(5.0, 0.0, 2.0), Complex64::new(1.0, 0.0));
        assert_relative_eq!(transfer_phase(0.3, 7.0, 1.1).norm(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn equal_plane_widths() {
        let dg = DoubleGaussian::new(1e-3, 10e-6).unwrap();
        assert_eq!(propagate_equal(&dg, 0.0, 1.0).unwrap(), dg);
        let k_p = 2.0 * PI / 390e-9;
        let p = propagate_equal(&dg, 50e-3, k_p).unwrap();
        let expected = ((10e-6f64).powi(2) + (50e-3 / (10e-6 * k_p)).powi(2)).sqrt();
        assert_relative_eq!(p.sigma_minus(), expected, max_relative = 1e-14);
        let far = propagate_equal(&dg, 1e6, k_p).unwrap();
        assert_relative_eq!(far.sigma_minus(), 1e6 / (10e-6 * k_p), max_relative = 1e-9);
    }

    #[test]
    fn unpropagated_coefficients() {
        let dg = DoubleGaussian::new(1.7, 0.3).unwrap();
        let (p2, m2) = (1.7f64.powi(2), 0.3f64.powi(2));
        let bg = propagate_general(&dg, &PropagationPlanes::new(0.0, 0.0, 3.0).unwrap()).unwrap();
        assert_relative_eq!(bg.coeff_a, (p2 + m2) / (4.0 * p2 * m2), max_relative = 1e-14);
        assert_relative_eq!(bg.coeff_c, (p2 + m2) / (4.0 * p2 * m2), max_relative = 1e-14);
        assert_relative_eq!(bg.coeff_b, (m2 - p2) / (4.0 * p2 * m2), max_relative = 1e-14);
        // Sign convention: the quadratic form reproduces the Double-Gaussian density.
        for (x1, x2) in [(0.1, 0.2), (-1.0, 0.7), (2.0, 1.9)] {
            assert_relative_eq!(bg.density(x1, x2), dg.density(x1, x2), max_relative = 1e-12);
        }
    }

    #[test]
    fn general_reduces_to_equal_planes() {
        let dg = DoubleGaussian::new(2e-3, 8e-6).unwrap();
        let k_p = 2.0 * PI / 405e-9;
        for z in [0.0, 1e-3, 0.05, 2.0] {
            let bg = propagate_general(&dg, &PropagationPlanes::new(z, z, k_p).unwrap()).unwrap();
            let eq = propagate_equal(&dg, z, k_p).unwrap();
            let (v1, _, v2) = bg.covariance();
            let want = 0.5 * (eq.sigma_plus().powi(2) + eq.sigma_minus().powi(2));
            assert_relative_eq!(v1, want, max_relative = 1e-10);
            assert_relative_eq!(v2, want, max_relative = 1e-10);
        }
    }

    #[test]
    fn pearson_limits() {
        let dg = oracle_dg();
        let r0 = (1.0 - 0.0625) / (1.0 + 0.0625);
        let at = |a: f64, b: f64| pearson_propagated(&dg, &PropagationPlanes::from_reduced(&dg, a, b, 2.0).unwrap());
        assert_relative_eq!(at(0.0, 0.0), r0, max_relative = 1e-15);
        assert!(at(0.5, 2.0).abs() < 1e-15);
        assert!((at(1e3, 1e3) + r0).abs() < 1e-5);
    }

    #[test]
    fn rejects_non_definite_form() {
        assert!(BivariateGaussian::new(1.0, 1.0, 1.0).is_err());
        assert!(BivariateGaussian::new(-1.0, 0.0, 1.0).is_err());
        assert!(PropagationPlanes::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn oracle_at_source_plane() {
        let dg = oracle_dg();
        let axis = oracle_axis();
        let planes = PropagationPlanes::new(0.0, 0.0, 1.0).unwrap();
        let rho = fft_propagate_oracle(&dg, &planes, &axis, Execution::Parallel).unwrap();
        let n = axis.n_points();
        let mut worst = 0.0f64;
        for i in (0..n).step_by(7) {
            for j in (0..n).step_by(5) {
                let d = rho.at(i, j) - dg.density(axis.point(i), axis.point(j));
                worst = worst.max(d.abs());
            }
        }
        assert!(worst < 1e-6, "max deviation {worst:e}");
    }

    #[test]
    fn oracle_matches_closed_forms() {
        let dg = oracle_dg();
        let axis = oracle_axis();
        for zbar in [0.0, 0.5, 1.0, 2.0] {
            let planes = PropagationPlanes::from_reduced(&dg, zbar, zbar, 1.0).unwrap();
            let m = fft_propagate_oracle(&dg, &planes, &axis, Execution::Parallel).unwrap().moments();
            assert!((m.mass - 1.0).abs() < 1e-4);
            assert!((m.pearson_r() - pearson_propagated(&dg, &planes)).abs() < 1e-3);
            let eq = propagate_equal(&dg, planes.z1, 1.0).unwrap();
            let (vp, vm, cross) = m.rotated();
            assert!((vp.sqrt() / eq.sigma_plus() - 1.0).abs() < 0.005);
            assert!((vm.sqrt() / eq.sigma_minus() - 1.0).abs() < 0.005);
            assert!(cross.abs() < 1e-6);
        }
    }

    #[test]
    fn oracle_unequal_planes() {
        let dg = oracle_dg();
        let planes = PropagationPlanes::from_reduced(&dg, 0.5, 2.0, 1.0).unwrap();
        let m = fft_propagate_oracle(&dg, &planes, &oracle_axis(), Execution::Sequential).unwrap().moments();
        assert!(m.pearson_r().abs() < 1e-3);
        let (v1, c, v2) = propagate_general(&dg, &planes).unwrap().covariance();
        assert_relative_eq!(m.var_x1, v1, max_relative = 1e-3);
        assert_relative_eq!(m.var_x2, v2, max_relative = 1e-3);
        assert!((m.cov - c).abs() < 1e-3);
    }

    #[test]
    fn oracle_is_policy_independent() {
        let dg = oracle_dg();
        let planes = PropagationPlanes::from_reduced(&dg, 1.0, 0.3, 1.0).unwrap();
        let a = fft_propagate_oracle(&dg, &planes, &oracle_axis(), Execution::Sequential).unwrap();
        let b = fft_propagate_oracle(&dg, &planes, &oracle_axis(), Execution::Parallel).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn oracle_rejects_bad_grids() {
        let dg = oracle_dg();
        let near = PropagationPlanes::new(0.0, 0.0, 1.0).unwrap();
        let small = Axis::centered(512, 0.1).unwrap();
        assert!(matches!(fft_propagate_oracle(&dg, &near, &small, Execution::Sequential), Err(Error::BadGrid(_))));
        let narrow = Axis::centered(1024, 0.005).unwrap();
        assert!(matches!(fft_propagate_oracle(&dg, &near, &narrow, Execution::Sequential), Err(Error::BadGrid(_))));
        let far = PropagationPlanes::new(5.0, 5.0, 1.0).unwrap();
        let wide = Axis::centered(1024, 0.2).unwrap();
        assert!(matches!(fft_propagate_oracle(&dg, &far, &wide, Execution::Sequential), Err(Error::BadGrid(_))));
    }

    proptest! {
        #[test]
        fn pearson_closed_form_matches_coefficients(
            sp in 0.1f64..10.0, ratio in 0.01f64..1.0,
            z1 in -50.0f64..50.0, z2 in -50.0f64..50.0, k_p in 0.1f64..10.0,
        ) {
            let dg = DoubleGaussian::new(sp, sp * ratio).unwrap();
            let planes = PropagationPlanes::new(z1, z2, k_p).unwrap();
            let bg = propagate_general(&dg, &planes).unwrap();
            let r = pearson_propagated(&dg, &planes);
            prop_assert!(bg.determinant() > 0.0);
            prop_assert!((bg.pearson_r() - r).abs() <= 1e-10 * r.abs().max(1e-3));
        }

        #[test]
        fn monotone_decorrelation(ratio in 0.01f64..0.99, z in 0.0f64..100.0, dz in 1e-3f64..10.0) {
            let dg = DoubleGaussian::new(1.0, ratio).unwrap();
            let r = |zb: f64| pearson_propagated(&dg, &PropagationPlanes::from_reduced(&dg, zb, zb, 1.0).unwrap());
            prop_assert!(r(z + dz) < r(z));
        }
    }
}
