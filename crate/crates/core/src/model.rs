//! The two-photon state at the crystal plane.
//!
//! Coordinates: x± = (x₁ ± x₂)/√2 and k± = (k₁ ± k₂)/√2, one transverse axis at
//! a time. In these coordinates the sinc-Gaussian amplitude separates into a
//! Gaussian in k₊ and sinc(a·k₋²) in k₋, with a = L_z·λ_p/(4π).
//!
//! Closed forms for the difference coordinate:
//!
//! ```text
//! ρ(k₋) = (3/4)·√(a/π)·sinc²(a k₋²)
//! ρ(x₋) = 3/(16√(πa³)) · | x₋√(2π)(S(u) − C(u)) + 2√a(cos θ + sin θ) |²,
//!         u = x₋/√(2πa),  θ = x₋²/(4a)
//! ```
//!
//! For large |x₋| the two terms inside the modulus cancel to leading order;
//! we evaluate that regime through the Fresnel auxiliary correction so the
//! x₋⁻⁴ tail keeps full relative precision.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numerics::fft::{fourier_transform, Direction};
use crate::numerics::grid::{Axis, Grid1D};
use crate::numerics::quadrature::{integrate, integrate_panels};
use crate::numerics::special::{fresnel, fresnel_auxiliary, fresnel_correction, sinc};

/// Above this |q|/k_p the small-angle phase mismatch is no longer trustworthy.
pub const PARAXIAL_LIMIT: f64 = 0.1;

const PANEL_TOL: f64 = 1e-13;
// Number of half-period panels integrated numerically before switching to
// the analytic tail of ρ(x₋).
const X_PANELS: usize = 8192;
const K_PANELS: usize = 512;
const AUX_BRANCH: f64 = 1.5;

/// Pump and crystal parameters. All lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdcConfig {
    /// Pump wavelength λ_p.
    pub lambda_p: f64,
    /// Crystal length L_z along the optic axis.
    pub crystal_length: f64,
    /// Pump radius σ_p: standard deviation of (x₁+x₂)/2.
    pub sigma_p: f64,
    /// Effective nonlinearity in m/V, only needed for brightness ratios.
    pub d_eff: Option<f64>,
    /// Pump power in W, only needed for brightness ratios.
    pub pump_power: Option<f64>,
}

impl SpdcConfig {
    pub fn new(lambda_p: f64, crystal_length: f64, sigma_p: f64) -> Result<Self> {
        for (name, v) in [
            ("lambda_p", lambda_p),
            ("crystal_length", crystal_length),
            ("sigma_p", sigma_p),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self {
            lambda_p,
            crystal_length,
            sigma_p,
            d_eff: None,
            pump_power: None,
        })
    }

    pub fn with_brightness(mut self, d_eff: f64, pump_power: f64) -> Result<Self> {
        if !(d_eff.is_finite() && pump_power.is_finite() && pump_power >= 0.0) {
            return Err(Error::InvalidParameter("d_eff and pump_power must be finite, power ≥ 0".into()));
        }
        self.d_eff = Some(d_eff);
        self.pump_power = Some(pump_power);
        Ok(self)
    }

    /// Scale parameter a = L_z·λ_p/(4π), in m².
    pub fn a(&self) -> f64 {
        self.crystal_length * self.lambda_p / (4.0 * PI)
    }

    /// Pump wavenumber k_p = 2π/λ_p.
    pub fn k_p(&self) -> f64 {
        2.0 * PI / self.lambda_p
    }
}

/// Transverse wavevectors of signal and idler (rad/m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseMomentumPair {
    pub q1: [f64; 2],
    pub q2: [f64; 2],
}

impl TransverseMomentumPair {
    pub fn new(q1: [f64; 2], q2: [f64; 2]) -> Result<Self> {
        if q1.iter().chain(&q2).all(|v| v.is_finite()) {
            Ok(Self { q1, q2 })
        } else {
            Err(Error::InvalidParameter("transverse wavevector components must be finite".into()))
        }
    }

    pub fn difference_sq(&self) -> f64 {
        norm_sq([self.q1[0] - self.q2[0], self.q1[1] - self.q2[1]])
    }

    pub fn sum_sq(&self) -> f64 {
        norm_sq([self.q1[0] + self.q2[0], self.q1[1] + self.q2[1]])
    }

    /// False (and logs a warning) when either photon leaves the small-angle regime.
    pub fn check_paraxial(&self, k_p: f64) -> bool {
        let q = norm_sq(self.q1).max(norm_sq(self.q2)).sqrt();
        let ok = q / k_p <= PARAXIAL_LIMIT;
        if !ok {
            log::warn!("|q|/k_p = {:.3} exceeds the paraxial limit {PARAXIAL_LIMIT}", q / k_p);
        }
        ok
    }
}

fn norm_sq(v: [f64; 2]) -> f64 {
    v[0] * v[0] + v[1] * v[1]
}

/// Longitudinal phase mismatch −|q₁−q₂|²/(2k_p) in the small-angle limit.
pub fn delta_kz(pair: &TransverseMomentumPair, config: &SpdcConfig) -> f64 {
    pair.check_paraxial(config.k_p());
    -pair.difference_sq() / (2.0 * config.k_p())
}

/// Normalized sinc-Gaussian biphoton amplitude over both transverse planes.
///
/// The normalization is computed once at construction, so a built value is
/// immutable and can be shared freely between threads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SincGaussianAmplitude {
    config: SpdcConfig,
    norm: f64,
}

impl SincGaussianAmplitude {
    pub fn new(config: SpdcConfig) -> Result<Self> {
        let a = config.a();
        // In rotated 2-D coordinates the |amplitude|² integral factorizes:
        //   ∫exp(−4σ_p²|q₊|²) d²q₊ = π/(4σ_p²)
        //   ∫sinc²(a|q₋|²) d²q₋  = (π/a)·∫₀^∞ sinc²(u) du
        let radial = sinc_sq_half_line()?;
        let mass = PI / (4.0 * config.sigma_p * config.sigma_p) * (PI / a) * radial;
        Ok(Self {
            config,
            norm: mass.sqrt().recip(),
        })
    }

    pub fn config(&self) -> &SpdcConfig {
        &self.config
    }

    /// Normalization constant, which is also the global maximum at q₁ = q₂ = 0.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn eval(&self, pair: &TransverseMomentumPair) -> f64 {
        let c = &self.config;
        pair.check_paraxial(c.k_p());
        let arg = c.crystal_length * c.lambda_p * pair.difference_sq() / (8.0 * PI);
        self.norm * sinc(arg) * (-c.sigma_p * c.sigma_p * pair.sum_sq()).exp()
    }
}

// ∫₀^∞ sin²(u)/u² du: lobes between zeros, then the tail
// ∫_U^∞ sin²u/u² = 1/(2U) − 1/(4U³) + O(U⁻⁵) at U = mπ.
fn sinc_sq_half_line() -> Result<f64> {
    const LOBES: usize = 2000;
    let breaks: Vec<f64> = (0..=LOBES).map(|j| j as f64 * PI).collect();
    let body = integrate_panels(|u| sinc(u).powi(2), &breaks, PANEL_TOL, Execution::Sequential)?;
    let u = LOBES as f64 * PI;
    Ok(body + 1.0 / (2.0 * u) - 1.0 / (4.0 * u * u * u))
}

/// ρ(k₋) = (3/4)√(a/π)·sinc²(a k₋²).
pub fn k_minus_density(k_minus: f64, a: f64) -> f64 {
    0.75 * (a / PI).sqrt() * sinc(a * k_minus * k_minus).powi(2)
}

/// Signed momentum-difference amplitude whose square is [`k_minus_density`].
pub fn k_minus_amplitude(k_minus: f64, a: f64) -> f64 {
    (0.75 * (a / PI).sqrt()).sqrt() * sinc(a * k_minus * k_minus)
}

/// ρ(x₋), the exact position-difference density at the crystal plane.
pub fn x_minus_density(x_minus: f64, a: f64) -> f64 {
    let v = x_minus_field(x_minus.abs(), a);
    3.0 / (16.0 * (PI * a * a * a).sqrt()) * v * v
}

// The real quantity inside the modulus, for x ≥ 0.
fn x_minus_field(x: f64, a: f64) -> f64 {
    let u = x / (2.0 * PI * a).sqrt();
    let theta = x * x / (4.0 * a);
    let phase = Complex64::from_polar(1.0, theta);
    if u <= AUX_BRANCH {
        let (c, s) = fresnel(u);
        x * (2.0 * PI).sqrt() * (s - c) + 2.0 * a.sqrt() * (theta.cos() + theta.sin())
    } else {
        // S − C = Re(e^{iθ}G) − Im(e^{iθ}G) with G = i(1+E)/(πu); the "1" part
        // cancels the cos + sin term exactly.
        let w = phase * Complex64::i() * fresnel_correction(u);
        2.0 * a.sqrt() * (w.re - w.im)
    }
}

/// Smallest step allowed by [`x_minus_density_oracle`] for `n` points.
///
/// The momentum amplitude sinc(a k²) chirps with local frequency 2a|k| in k;
/// at the grid edge k = π/dx it must stay below the Nyquist limit π/dk,
/// which gives dx² ≥ 4πa/n. This step also places the momentum window edge
/// exactly on a node of the chirp.
pub fn oracle_step(a: f64, n: usize) -> f64 {
    (4.0 * PI * a / n as f64).sqrt()
}

/// Position axis matched to the chirp of the momentum amplitude.
pub fn oracle_axis(a: f64, n: usize) -> Result<Axis> {
    Axis::centered(n, oracle_step(a, n))
}

/// ρ(x₋) obtained by numerically Fourier-transforming the signed sinc
/// amplitude in k₋, sampled on `axis`.
///
/// Independent of the Fresnel closed form, and used to validate it. The axis
/// must be centred, have a power-of-two length, resolve the chirp of the
/// momentum amplitude (see [`oracle_step`]) and cover ±5√a.
pub fn x_minus_density_oracle(a: f64, axis: &Axis) -> Result<Grid1D<f64>> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("a must be positive, got {a}")));
    }
    if !axis.is_centered() {
        return Err(Error::BadGrid("oracle axis must be centred on zero".into()));
    }
    let n = axis.n_points();
    let dx = axis.step();
    let min_step = oracle_step(a, n);
    if dx < min_step * (1.0 - 1e-9) {
        return Err(Error::BadGrid(format!(
            "step {dx:e} under-samples the momentum chirp; need at least {min_step:e}"
        )));
    }
    if axis.min() > -5.0 * a.sqrt() || axis.max() < 5.0 * a.sqrt() {
        return Err(Error::BadGrid("grid does not cover ±5√a".into()));
    }
    let k_axis = axis.conjugate()?;
    let amp = Grid1D::from_fn(k_axis, |k| Complex64::new(k_minus_amplitude(k, a), 0.0));
    let psi = fourier_transform(&amp, Direction::Inverse)?;
    let density = psi.values().iter().map(|z| z.norm_sqr()).collect();
    Grid1D::new(*axis, density)
}

/// Relative brightness R/R_ref with R ∝ d_eff²·P_p·L_z².
pub fn pair_rate_scaling(config: &SpdcConfig, reference: &SpdcConfig) -> Result<f64> {
    let brightness = |c: &SpdcConfig| -> Result<f64> {
        let d = c.d_eff.ok_or(Error::MissingField("d_eff"))?;
        let p = c.pump_power.ok_or(Error::MissingField("pump_power"))?;
        Ok(d * d * p * c.crystal_length * c.crystal_length)
    };
    let r = brightness(reference)?;
    if r == 0.0 {
        return Err(Error::InvalidParameter("reference brightness is zero".into()));
    }
    Ok(brightness(config)? / r)
}

/// Mass and second moment of a symmetric density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mass: f64,
    pub second: f64,
}

// ∫_K^∞ cos(ck²) dk and ∫_K^∞ sin(ck²) dk, free of cancellation.
fn chirp_tails(c: f64, k: f64) -> (f64, f64) {
    let scale = (PI / (2.0 * c)).sqrt();
    let t = k / scale;
    let w = Complex64::from_polar(1.0, 0.5 * PI * t * t) * fresnel_auxiliary(t);
    (scale * w.re, scale * w.im)
}

// ∫_K^∞ cos(ck²)/k² dk and ∫_K^∞ sin(ck²)/k² dk, by parts onto chirp_tails.
fn chirp_tails_inv2(c: f64, k: f64) -> (f64, f64) {
    let (ic, is) = chirp_tails(c, k);
    let ph = c * k * k;
    (ph.cos() / k - 2.0 * c * is, ph.sin() / k + 2.0 * c * ic)
}

// ∫_K^∞ cos(ck²)/k⁴ dk and ∫_K^∞ sin(ck²)/k⁴ dk.
fn chirp_tails_inv4(c: f64, k: f64) -> (f64, f64) {
    let (jc, js) = chirp_tails_inv2(c, k);
    let ph = c * k * k;
    let k3 = 3.0 * k * k * k;
    (ph.cos() / k3 - 2.0 * c / 3.0 * js, ph.sin() / k3 + 2.0 * c / 3.0 * jc)
}

/// Mass and ⟨k₋²⟩ of ρ(k₋) by quadrature.
///
/// Lobes between consecutive zeros of sinc(a k²) are integrated numerically;
/// beyond the last one, sinc² = (1 − cos(2ak²))/(2a²k⁴) is integrated in
/// closed form through Fresnel integrals.
pub fn k_minus_moments(a: f64, exec: Execution) -> Result<Moments> {
    let breaks: Vec<f64> = (0..=K_PANELS).map(|j| (j as f64 * PI / a).sqrt()).collect();
    let mass = integrate_panels(|k| k_minus_density(k, a), &breaks, PANEL_TOL, exec)?;
    let second = integrate_panels(|k| k * k * k_minus_density(k, a), &breaks, PANEL_TOL, exec)?;
    let k = breaks[K_PANELS];
    let c = 2.0 * a;
    let pref = 0.75 * (a / PI).sqrt() / (2.0 * a * a);
    let (c4, _) = chirp_tails_inv4(c, k);
    let (c2, _) = chirp_tails_inv2(c, k);
    let tail0 = pref * (1.0 / (3.0 * k * k * k) - c4);
    let tail2 = pref * (1.0 / k - c2);
    Ok(Moments {
        mass: 2.0 * (mass + tail0),
        second: 2.0 * (second + tail2),
    })
}

/// Mass and ⟨x₋²⟩ of ρ(x₋) by quadrature.
///
/// Numerical panels cover half-periods of the oscillating tail out to
/// X ≈ 230√a; beyond that the asymptotic form
/// ρ ≈ 3a^{3/2}/(√π x⁴)·(1 − sin(x²/(2a))) is integrated analytically.
pub fn x_minus_moments(a: f64, exec: Execution) -> Result<Moments> {
    x_minus_moments_with(|x| x_minus_density(x, a), a, X_PANELS, exec)
}

/// As [`x_minus_moments`] for an arbitrary candidate density and panel count;
/// used to check convergence in the cut-off and to test mutated densities.
pub fn x_minus_moments_with(
    density: impl Fn(f64) -> f64 + Sync + Send,
    a: f64,
    panels: usize,
    exec: Execution,
) -> Result<Moments> {
    let breaks: Vec<f64> = (0..=panels).map(|j| (2.0 * PI * a * j as f64).sqrt()).collect();
    let mass = integrate_panels(&density, &breaks, PANEL_TOL, exec)?;
    let second = integrate_panels(|x| x * x * density(x), &breaks, PANEL_TOL, exec)?;
    let x = breaks[panels];
    let c = 1.0 / (2.0 * a);
    let amp = 3.0 * a.powf(1.5) / PI.sqrt();
    let (_, s4) = chirp_tails_inv4(c, x);
    let (_, s2) = chirp_tails_inv2(c, x);
    let tail0 = amp * (1.0 / (3.0 * x * x * x) - s4);
    let tail2 = amp * (1.0 / x - s2);
    Ok(Moments {
        mass: 2.0 * (mass + tail0),
        second: 2.0 * (second + tail2),
    })
}

/// Probability that |x₋| ≤ half_width under ρ(x₋).
pub fn x_minus_mass_within(a: f64, half_width: f64) -> Result<f64> {
    let h = half_width.abs();
    let period = (2.0 * PI * a).sqrt();
    let mut breaks = vec![0.0];
    let mut j = 1usize;
    loop {
        let b = period * (j as f64).sqrt();
        if b >= h {
            break;
        }
        breaks.push(b);
        j += 1;
    }
    breaks.push(h);
    Ok(2.0 * integrate_panels(|x| x_minus_density(x, a), &breaks, PANEL_TOL, Execution::Sequential)?)
}

/// Tabulated cumulative distribution of ρ(x₋).
#[derive(Debug, Clone)]
pub struct XMinusCdf {
    a: f64,
    step: f64,
    // cumulative[i] = ∫₀^{i·step} ρ
    cumulative: Vec<f64>,
}

impl XMinusCdf {
    const CELLS: usize = 24_000;
    const REACH: f64 = 60.0;

    pub fn new(a: f64, exec: Execution) -> Result<Self> {
        let step = Self::REACH * a.sqrt() / Self::CELLS as f64;
        let cells = exec.map_range(Self::CELLS, |i| {
            let lo = i as f64 * step;
            integrate(|x| x_minus_density(x, a), lo, lo + step, 1e-12)
        });
        let mut cumulative = Vec::with_capacity(Self::CELLS + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        let mut comp = 0.0;
        for cell in cells {
            // Kahan running sum keeps the table monotone to rounding.
            let y = cell? - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
            cumulative.push(acc);
        }
        Ok(Self { a, step, cumulative })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let ax = x.abs();
        let half = self.half_mass(ax);
        if x >= 0.0 {
            0.5 + half
        } else {
            0.5 - half
        }
    }

    // ∫₀^{ax} ρ, with the smooth part of the asymptotic tail past the table.
    fn half_mass(&self, ax: f64) -> f64 {
        let pos = ax / self.step;
        let i = pos.floor() as usize;
        if i >= Self::CELLS {
            let amp = 3.0 * self.a.powf(1.5) / PI.sqrt();
            return 0.5 - amp / (3.0 * ax * ax * ax);
        }
        let lo = i as f64 * self.step;
        let f = ax - lo;
        // Trapezoid within the cell, anchored at the exact cell integrals.
        let (r0, r1) = (x_minus_density(lo, self.a), x_minus_density(ax, self.a));
        self.cumulative[i] + 0.5 * f * (r0 + r1)
    }
}

/// Closed-form ⟨x₋²⟩ = 9a/5.
pub fn x_minus_variance(a: f64) -> f64 {
    9.0 * a / 5.0
}

/// Closed-form ⟨k₋²⟩ = 3/(4a).
pub fn k_minus_variance(a: f64) -> f64 {
    3.0 / (4.0 * a)
}

/// Standard deviation of x₁ − x₂ implied by a given σ_x₋.
pub fn difference_width(sigma_minus: f64) -> f64 {
    SQRT_2 * sigma_minus
}
