//! Double-Gaussian approximation of the crystal-plane state.
//!
//! The joint position density is modelled as independent Gaussians in
//! x₊ = (x₁+x₂)/√2 and x₋ = (x₁−x₂)/√2 with standard deviations σ₊ and σ₋.
//! σ₊ = √2·σ_p always comes from the pump. σ₋ comes from one of three named
//! estimators, and none of them is a default:
//!
//! | estimator        | σ₋         | matches                          |
//! |------------------|------------|----------------------------------|
//! | `MomentMatch`    | √(a/3)     | ⟨k₋²⟩ through σ_x σ_k = 1/2      |
//! | `PeakMatch`      | √(8a/9)    | the peak value ρ(x₋ = 0)         |
//! | `ExactVariance`  | √(9a/5)    | ⟨x₋²⟩ of the exact density       |

use std::f64::consts::{E, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{x_minus_density, SpdcConfig};
use crate::numerics::roots::full_width_at_fraction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleGaussian {
    sigma_plus: f64,
    sigma_minus: f64,
}

impl DoubleGaussian {
    pub fn new(sigma_plus: f64, sigma_minus: f64) -> Result<Self> {
        if !(sigma_plus > 0.0 && sigma_plus.is_finite() && sigma_minus > 0.0 && sigma_minus.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "widths must be positive and finite (σ₊ = {sigma_plus}, σ₋ = {sigma_minus})"
            )));
        }
        if sigma_plus < sigma_minus {
            log::warn!("σ₊ = {sigma_plus:e} < σ₋ = {sigma_minus:e}: not a typical down-conversion state");
        }
        Ok(Self {
            sigma_plus,
            sigma_minus,
        })
    }

    pub fn sigma_plus(&self) -> f64 {
        self.sigma_plus
    }

    pub fn sigma_minus(&self) -> f64 {
        self.sigma_minus
    }

    /// Widths of the conjugate momentum Double-Gaussian, (σ_k₊, σ_k₋) = (1/(2σ₊), 1/(2σ₋)).
    pub fn momentum_widths(&self) -> (f64, f64) {
        (0.5 / self.sigma_plus, 0.5 / self.sigma_minus)
    }

    /// Momentum-space Double-Gaussian, with the roles of the coordinates swapped.
    pub fn momentum_space(&self) -> Self {
        let (kp, km) = self.momentum_widths();
        Self {
            sigma_plus: kp,
            sigma_minus: km,
        }
    }

    /// Density in (x₁, x₂).
    pub fn density(&self, x1: f64, x2: f64) -> f64 {
        let xp = (x1 + x2) / SQRT_2;
        let xm = (x1 - x2) / SQRT_2;
        gaussian_density(xp, self.sigma_plus) * gaussian_density(xm, self.sigma_minus)
    }
}

/// Zero-mean normal density.
pub fn gaussian_density(x: f64, sigma: f64) -> f64 {
    (-0.5 * (x / sigma).powi(2)).exp() / ((2.0 * PI).sqrt() * sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Estimator {
    MomentMatch,
    PeakMatch,
    ExactVariance,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::MomentMatch, Estimator::PeakMatch, Estimator::ExactVariance];

    /// σ₋ for scale parameter `a`.
    pub fn sigma_minus(self, a: f64) -> f64 {
        match self {
            Estimator::MomentMatch => (a / 3.0).sqrt(),
            Estimator::PeakMatch => (8.0 * a / 9.0).sqrt(),
            Estimator::ExactVariance => (9.0 * a / 5.0).sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Estimator::MomentMatch => "moment_match",
            Estimator::PeakMatch => "peak_match",
            Estimator::ExactVariance => "exact_variance",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "moment" | "moment_match" => Ok(Estimator::MomentMatch),
            "peak" | "peak_match" => Ok(Estimator::PeakMatch),
            "exact" | "exact_variance" => Ok(Estimator::ExactVariance),
            other => Err(Error::InvalidParameter(format!("unknown estimator `{other}`"))),
        }
    }
}

pub fn fit(config: &SpdcConfig, estimator: Estimator) -> DoubleGaussian {
    DoubleGaussian {
        sigma_plus: SQRT_2 * config.sigma_p,
        sigma_minus: estimator.sigma_minus(config.a()),
    }
}

pub fn fit_moment_match(config: &SpdcConfig) -> DoubleGaussian {
    fit(config, Estimator::MomentMatch)
}

pub fn fit_peak_match(config: &SpdcConfig) -> DoubleGaussian {
    fit(config, Estimator::PeakMatch)
}

pub fn fit_exact_variance(config: &SpdcConfig) -> DoubleGaussian {
    fit(config, Estimator::ExactVariance)
}

/// σ_(x₁−x₂) = √2·σ₋.
pub fn correlation_width(dg: &DoubleGaussian) -> f64 {
    SQRT_2 * dg.sigma_minus
}

/// Logarithm base for entropies. Base 2 is the default so that information
/// is in bits; Table-style closed forms hold in either base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LogBase {
    #[default]
    Two,
    E,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::E => x.ln(),
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            LogBase::Two => "bit",
            LogBase::E => "nat",
        }
    }
}

impl FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2" => Ok(LogBase::Two),
            "e" => Ok(LogBase::E),
            other => Err(Error::InvalidParameter(format!("log base must be `2` or `e`, got `{other}`"))),
        }
    }
}

/// Summary statistics of a Double-Gaussian in (x₁, x₂).
///
/// Entropies are differential entropies of densities over meters, so their
/// absolute values depend on the length unit; the mutual information does not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianStats {
    pub marginal_variance: f64,
    pub conditional_variance: f64,
    pub covariance: f64,
    pub pearson_r: f64,
    pub joint_entropy: f64,
    pub marginal_entropy: f64,
    pub mutual_information: f64,
    /// σ_x₁/σ_(x₁|x₂).
    pub fedorov_ratio: f64,
    pub log_base: LogBase,
}

pub fn stats(dg: &DoubleGaussian, base: LogBase) -> GaussianStats {
    let p2 = dg.sigma_plus * dg.sigma_plus;
    let m2 = dg.sigma_minus * dg.sigma_minus;
    let sum = p2 + m2;
    let marginal_variance = sum / 2.0;
    let conditional_variance = 2.0 * p2 * m2 / sum;
    GaussianStats {
        marginal_variance,
        conditional_variance,
        covariance: (p2 - m2) / 2.0,
        pearson_r: (p2 - m2) / sum,
        joint_entropy: base.log(2.0 * PI * E * dg.sigma_plus * dg.sigma_minus),
        marginal_entropy: 0.5 * base.log(PI * E * sum),
        mutual_information: base.log(sum / (2.0 * dg.sigma_plus * dg.sigma_minus)),
        fedorov_ratio: (marginal_variance / conditional_variance).sqrt(),
        log_base: base,
    }
}

/// ⟨x₂ | x₁ = x_given⟩ = r·x_given.
pub fn conditional_mean(dg: &DoubleGaussian, x_given: f64) -> f64 {
    stats(dg, LogBase::E).pearson_r * x_given
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisenbergProducts {
    /// σ_x₊·σ_k₊
    pub plus: f64,
    /// σ_x₋·σ_k₋
    pub minus: f64,
    /// σ_x₁·σ_(k₁|k₂)
    pub position_marginal_momentum_conditional: f64,
    /// σ_k₁·σ_(x₁|x₂)
    pub momentum_marginal_position_conditional: f64,
}

pub fn heisenberg_products(dg: &DoubleGaussian) -> HeisenbergProducts {
    let k = dg.momentum_space();
    let sx = stats(dg, LogBase::E);
    let sk = stats(&k, LogBase::E);
    HeisenbergProducts {
        plus: dg.sigma_plus * k.sigma_plus,
        minus: dg.sigma_minus * k.sigma_minus,
        position_marginal_momentum_conditional: (sx.marginal_variance * sk.conditional_variance).sqrt(),
        momentum_marginal_position_conditional: (sk.marginal_variance * sx.conditional_variance).sqrt(),
    }
}

/// Full width of ρ(x₋) at `fraction` of its peak, found by bisection.
pub fn exact_width_at_fraction(a: f64, fraction: f64) -> Result<f64> {
    exact_width_at_fraction_with(|x| x_minus_density(x, a), a, fraction)
}

/// As [`exact_width_at_fraction`] for an arbitrary candidate density of scale `a`.
pub fn exact_width_at_fraction_with(density: impl Fn(f64) -> f64, a: f64, fraction: f64) -> Result<f64> {
    // The central lobe ends near 2.2√a; the sidebands stay below 5% of the peak.
    let reach = 3.0 * a.sqrt();
    full_width_at_fraction(density, fraction, (-reach, reach))
}

/// Full width at `fraction` of the peak of a Gaussian with standard deviation σ,
/// found numerically by the same root search as [`exact_width_at_fraction`].
pub fn gaussian_width_at_fraction(sigma: f64, fraction: f64) -> Result<f64> {
    let reach = 10.0 * sigma;
    full_width_at_fraction(|x| gaussian_density(x, sigma), fraction, (-reach, reach))
}
