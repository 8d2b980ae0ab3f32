//! Entanglement and coherence of the Double-Gaussian state.
//!
//! Everything here is a function of the birth-zone number N = σ₊/σ₋, the
//! ratio of the pump width Δ_p = √2·σ₊ to the birth-zone width Δ_BZ = √2·σ₋.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::gaussfit::DoubleGaussian;
use crate::model::SpdcConfig;
use crate::numerics::quadrature::integrate;
use crate::numerics::roots::bisect;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BirthZoneGeometry {
    pub delta_p: f64,
    pub delta_bz: f64,
    pub n: f64,
}

pub fn birth_zone_number(dg: &DoubleGaussian) -> BirthZoneGeometry {
    let delta_p = std::f64::consts::SQRT_2 * dg.sigma_plus();
    let delta_bz = std::f64::consts::SQRT_2 * dg.sigma_minus();
    BirthZoneGeometry {
        delta_p,
        delta_bz,
        n: dg.sigma_plus() / dg.sigma_minus(),
    }
}

/// N from a measured pump FWHM, using the peak-matched birth zone:
/// N = FWHM_p/√((8 ln 2/(9π))·L_z·λ_p).
pub fn birth_zone_number_from_fwhm(fwhm_p: f64, config: &SpdcConfig) -> Result<f64> {
    if !(fwhm_p > 0.0 && fwhm_p.is_finite()) {
        return Err(Error::InvalidParameter(format!("pump FWHM must be positive, got {fwhm_p}")));
    }
    Ok(fwhm_p / (8.0 * LN_2 / (9.0 * PI) * config.crystal_length * config.lambda_p).sqrt())
}

/// Truncated Schmidt spectrum λ_n = (1 − q)·qⁿ with q = ((N−1)/(N+1))².
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    pub eigenvalues: Vec<f64>,
    pub birth_zone_number: f64,
    pub schmidt_number: f64,
    /// Exact mass of the discarded modes, 1 − Σ retained λ_n.
    pub truncation_mass: f64,
}

impl SchmidtSpectrum {
    /// 1/Σλ_n² over the retained modes.
    pub fn participation_number(&self) -> f64 {
        1.0 / self.eigenvalues.iter().map(|l| l * l).sum::<f64>()
    }

    /// Entanglement entropy −Σλ log λ of the retained modes.
    pub fn entropy(&self, base: crate::gaussfit::LogBase) -> f64 {
        -self.eigenvalues.iter().filter(|&&l| l > 0.0).map(|&l| l * base.log(l)).sum::<f64>()
    }
}

fn ratio(n: f64) -> f64 {
    ((n - 1.0) / (n + 1.0)).powi(2)
}

fn check_n(n: f64) -> Result<()> {
    if n >= 1.0 && n.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("birth-zone number must be ≥ 1, got {n}")))
    }
}

/// Highest mode index kept by default: enough that q^(n_max+1) < e⁻⁶⁰.
pub fn default_n_max(n: f64) -> usize {
    if n <= 1.0 {
        return 0;
    }
    (60.0 / (1.0 / ratio(n)).ln()).ceil() as usize
}

/// Eigenvalues λ_0 … λ_{n_max}. At N = 1 the state is separable and only λ₀ = 1 is returned.
pub fn schmidt_eigenvalues(n: f64, n_max: usize) -> Result<SchmidtSpectrum> {
    check_n(n)?;
    let q = ratio(n);
    let lead = 4.0 * n / ((n + 1.0) * (n + 1.0));
    let mut eigenvalues = Vec::with_capacity(n_max + 1);
    let mut l = lead;
    for _ in 0..=n_max {
        if l <= 0.0 {
            break;
        }
        eigenvalues.push(l);
        l *= q;
    }
    let kept = eigenvalues.len() as i32;
    Ok(SchmidtSpectrum {
        eigenvalues,
        birth_zone_number: n,
        schmidt_number: schmidt_number(n),
        truncation_mass: if q == 0.0 { 0.0 } else { q.powi(kept) },
    })
}

/// K = (N + 1/N)/2.
pub fn schmidt_number(n: f64) -> f64 {
    0.5 * (n + 1.0 / n)
}

/// log₂K for the state's birth-zone number.
pub fn mutual_information_bits(dg: &DoubleGaussian) -> f64 {
    schmidt_number(birth_zone_number(dg).n).log2()
}

/// log₂N − 1, the large-N form of [`mutual_information_bits`].
pub fn mutual_information_bits_large_n(n: f64) -> f64 {
    n.log2() - 1.0
}

/// Normalized g⁽¹⁾(x, −x).
pub fn g1_symmetric(dg: &DoubleGaussian, x: f64) -> f64 {
    let bz = birth_zone_number(dg);
    let n2 = bz.n * bz.n;
    (-(x * x) / (2.0 * bz.delta_p * bz.delta_p) * (n2 - 1.0).powi(2) / (n2 + 1.0)).exp()
}

/// Normalized g⁽²⁾(x, −x).
pub fn g2_symmetric(dg: &DoubleGaussian, x: f64) -> f64 {
    let bz = birth_zone_number(dg);
    let n2 = bz.n * bz.n;
    let w = bz.delta_p / (2.0 * bz.n);
    (n2 + 1.0) / (2.0 * bz.n) * (-(x * x) / (2.0 * w * w) * (n2 - 1.0) / (n2 + 1.0)).exp()
}

// Amplitude with |ψ|² = exp(−x₊²/(2σ₊²) − x₋²/(2σ₋²)), unnormalized.
fn amplitude(dg: &DoubleGaussian, x1: f64, x2: f64) -> f64 {
    let (sp, sm) = (dg.sigma_plus(), dg.sigma_minus());
    (-(x1 - x2).powi(2) / (8.0 * sm * sm) - (x1 + x2).powi(2) / (8.0 * sp * sp)).exp()
}

fn conditional_integral(dg: &DoubleGaussian, f: impl Fn(f64) -> f64, centers: &[f64]) -> Result<f64> {
    // Split at the ridge positions so the narrow peaks are never straddled.
    let mut cuts: Vec<f64> = centers.to_vec();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let reach = 40.0 * dg.sigma_plus().max(dg.sigma_minus());
    let mut total = integrate(&f, f64::NEG_INFINITY, cuts[0] - reach, 1e-13)?;
    let mut lo = cuts[0] - reach;
    for &c in &cuts {
        total += integrate(&f, lo, c, 1e-13)?;
        lo = c;
    }
    total += integrate(&f, lo, lo + reach, 1e-13)?;
    total += integrate(&f, lo + reach, f64::INFINITY, 1e-13)?;
    Ok(total)
}

fn marginal(dg: &DoubleGaussian, x: f64) -> Result<f64> {
    conditional_integral(dg, |y| amplitude(dg, x, y).powi(2), &[x, -x, 0.0])
}

/// g⁽¹⁾(x, −x) from its defining overlap ∫ψ*(x, x₂)ψ(−x, x₂)dx₂ by quadrature.
pub fn g1_quadrature(dg: &DoubleGaussian, x: f64) -> Result<f64> {
    let overlap = conditional_integral(dg, |y| amplitude(dg, x, y) * amplitude(dg, -x, y), &[x, -x, 0.0])?;
    Ok(overlap / (marginal(dg, x)? * marginal(dg, -x)?).sqrt())
}

/// g⁽²⁾(x, −x) = ρ(x, −x)/(ρ₁(x)ρ₁(−x)) by quadrature.
pub fn g2_quadrature(dg: &DoubleGaussian, x: f64) -> Result<f64> {
    // ∫∫|ψ|² for the unnormalized amplitude: the rotation has unit Jacobian.
    let mass = 2.0 * PI * dg.sigma_plus() * dg.sigma_minus();
    Ok(amplitude(dg, x, -x).powi(2) * mass / (marginal(dg, x)? * marginal(dg, -x)?))
}

fn require_entangled(dg: &DoubleGaussian) -> Result<BirthZoneGeometry> {
    let bz = birth_zone_number(dg);
    if bz.n <= 1.0 {
        return Err(Error::DegenerateState(format!(
            "N = {} ≤ 1: the coherence functions never cross their width thresholds",
            bz.n
        )));
    }
    Ok(bz)
}

/// Half-width where g⁽¹⁾ falls to 1/√e: Δ_p·√(N²+1)/(N²−1).
pub fn g1_width(dg: &DoubleGaussian) -> Result<f64> {
    let bz = require_entangled(dg)?;
    let n2 = bz.n * bz.n;
    Ok(bz.delta_p * (n2 + 1.0).sqrt() / (n2 - 1.0))
}

/// Position where g⁽²⁾ falls to 1.
pub fn g2_width(dg: &DoubleGaussian) -> Result<f64> {
    let bz = require_entangled(dg)?;
    let n2 = bz.n * bz.n;
    Ok(bz.delta_p / bz.n * (0.5 * (n2 + 1.0) / (n2 - 1.0) * ((n2 + 1.0) / (2.0 * bz.n)).ln()).sqrt())
}

/// Large-N form of [`g1_width`]: Δ_p/N = Δ_BZ.
pub fn g1_width_large_n(dg: &DoubleGaussian) -> f64 {
    let bz = birth_zone_number(dg);
    bz.delta_p / bz.n
}

/// Large-N form of [`g2_width`]: (Δ_p/N)·√(½ ln(N/2)).
pub fn g2_width_large_n(dg: &DoubleGaussian) -> f64 {
    let bz = birth_zone_number(dg);
    bz.delta_p / bz.n * (0.5 * (bz.n / 2.0).ln()).sqrt()
}

/// g⁽¹⁾ width located by bisection on the coherence function itself.
pub fn g1_width_by_root(dg: &DoubleGaussian) -> Result<f64> {
    let bz = require_entangled(dg)?;
    let target = (-0.5f64).exp();
    let hi = expand_bracket(|x| g1_symmetric(dg, x) - target, bz.delta_bz)?;
    bisect(|x| g1_symmetric(dg, x) - target, 0.0, hi, 1e-14 * hi)
}

/// g⁽²⁾ width located by bisection, bracketing outward from x = 0 where g⁽²⁾ > 1.
pub fn g2_width_by_root(dg: &DoubleGaussian) -> Result<f64> {
    let bz = require_entangled(dg)?;
    let hi = expand_bracket(|x| g2_symmetric(dg, x) - 1.0, bz.delta_bz)?;
    bisect(|x| g2_symmetric(dg, x) - 1.0, 0.0, hi, 1e-14 * hi)
}

fn expand_bracket(f: impl Fn(f64) -> f64, start: f64) -> Result<f64> {
    let mut hi = start;
    for _ in 0..200 {
        if f(hi) < 0.0 {
            return Ok(hi);
        }
        hi *= 2.0;
    }
    Err(Error::NoCrossing { threshold: 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coherence {
    First,
    Second,
}

/// Relative error |approx/exact − 1| of the large-N width formula at N.
pub fn large_n_error(which: Coherence, n: f64) -> Result<f64> {
    let dg = DoubleGaussian::new(n, 1.0)?;
    let (exact, approx) = match which {
        Coherence::First => (g1_width(&dg)?, g1_width_large_n(&dg)),
        Coherence::Second => (g2_width(&dg)?, g2_width_large_n(&dg)),
    };
    Ok((approx / exact - 1.0).abs())
}

/// Smallest N above which the large-N width formula is within `threshold`.
///
/// The error decreases monotonically over the searched range [2, 10⁴], so
/// bisection on error − threshold finds the unique crossing.
pub fn large_n_threshold(which: Coherence, threshold: f64) -> Result<f64> {
    let f = |n: f64| large_n_error(which, n).map(|e| e - threshold).unwrap_or(f64::NAN);
    bisect(f, 2.0, 1e4, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussfit::{fit_peak_match, stats, LogBase};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn with_n(n: f64) -> DoubleGaussian {
        DoubleGaussian::new(n * 0.01, 0.01).unwrap()
    }

    #[test]
    fn birth_zone_geometry() {
        assert_eq!(birth_zone_number(&with_n(1.0)).n, 1.0);
        let bz = birth_zone_number(&DoubleGaussian::new(1.0, 0.075).unwrap());
        assert!((bz.n - 13.333).abs() < 1e-3);
        assert_relative_eq!(bz.n, bz.delta_p / bz.delta_bz, max_relative = 1e-12);
        assert_relative_eq!(birth_zone_number(&with_n(10.0)).n, 10.0, max_relative = 1e-14);
    }

    #[test]
    fn fwhm_route_matches_peak_match() {
        let c = SpdcConfig::new(390e-9, 2e-3, 1e-3).unwrap();
        let fwhm = 2.0 * (2.0 * LN_2).sqrt() * c.sigma_p;
        let direct = birth_zone_number(&fit_peak_match(&c)).n;
        assert_relative_eq!(birth_zone_number_from_fwhm(fwhm, &c).unwrap(), direct, max_relative = 1e-12);
        assert_relative_eq!(
            birth_zone_number_from_fwhm(2e-3, &c).unwrap(),
            2.0 * birth_zone_number_from_fwhm(1e-3, &c).unwrap(),
            max_relative = 1e-15
        );
        let by_hand = 1e-3 / (8.0 * LN_2 * 2e-3 * 390e-9 / (9.0 * PI)).sqrt();
        assert_relative_eq!(birth_zone_number_from_fwhm(1e-3, &c).unwrap(), by_hand, max_relative = 1e-15);
        assert!(birth_zone_number_from_fwhm(0.0, &c).is_err());
    }

    #[test]
    fn separable_spectrum() {
        let s = schmidt_eigenvalues(1.0, 50).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0]);
        assert_eq!(s.truncation_mass, 0.0);
        assert_eq!(s.schmidt_number, 1.0);
        assert!(matches!(schmidt_eigenvalues(0.5, 5), Err(Error::Domain(_))));
    }

    #[test]
    fn spectrum_sums() {
        for n in [1.5, 5.0, 13.333, 100.0] {
            let s = schmidt_eigenvalues(n, default_n_max(n)).unwrap();
            assert!(s.truncation_mass < 1e-12);
            let sum: f64 = s.eigenvalues.iter().sum();
            assert!((sum + s.truncation_mass - 1.0).abs() < 1e-12);
            assert_relative_eq!(s.participation_number(), schmidt_number(n), max_relative = 1e-10);
            let q = ratio(n);
            for w in s.eigenvalues.windows(2) {
                assert!(w[1] < w[0]);
                assert_relative_eq!(w[1] / w[0], q, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn truncation_mass_is_the_missing_tail() {
        let s = schmidt_eigenvalues(3.0, 4).unwrap();
        let sum: f64 = s.eigenvalues.iter().sum();
        assert_relative_eq!(1.0 - sum, s.truncation_mass, max_relative = 1e-12);
    }

    #[test]
    fn schmidt_number_values() {
        assert_eq!(schmidt_number(1.0), 1.0);
        assert!((schmidt_number(13.333) - 6.704).abs() < 1e-3);
        assert_relative_eq!(schmidt_number(7.0), schmidt_number(1.0 / 7.0), max_relative = 1e-15);
    }

    #[test]
    fn information_in_bits() {
        assert_eq!(mutual_information_bits(&with_n(1.0)), 0.0);
        let dg = with_n(100.0);
        let exact = mutual_information_bits(&dg);
        assert!((exact - 50.005f64.log2()).abs() < 1e-12);
        assert!((exact - mutual_information_bits_large_n(100.0)).abs() < 0.015);
        assert!((exact - stats(&dg, LogBase::Two).mutual_information).abs() < 1e-12);
        let s = schmidt_eigenvalues(100.0, default_n_max(100.0)).unwrap();
        assert!(s.entropy(LogBase::Two) > exact);
    }

    #[test]
    fn coherence_limits() {
        let dg = with_n(10.0);
        assert_eq!(g1_symmetric(&dg, 0.0), 1.0);
        assert_relative_eq!(g2_symmetric(&dg, 0.0), 101.0 / 20.0, max_relative = 1e-15);
        let flat = with_n(1.0);
        for x in [0.0, 0.3, 10.0] {
            assert_eq!(g1_symmetric(&flat, x), 1.0);
            assert_eq!(g2_symmetric(&flat, x), 1.0);
        }
    }

    #[test]
    fn closed_forms_match_defining_integrals() {
        for n in [2.0, 10.0, 100.0] {
            let dg = with_n(n);
            let bz = birth_zone_number(&dg);
            for x in [0.0, bz.delta_bz, bz.delta_p] {
                let g1 = g1_quadrature(&dg, x).unwrap();
                let g2 = g2_quadrature(&dg, x).unwrap();
                assert!((g1 - g1_symmetric(&dg, x)).abs() < 1e-8, "g1 N={n} x={x}: {g1}");
                assert!((g2 - g2_symmetric(&dg, x)).abs() < 1e-8 * g2_symmetric(&dg, 0.0), "g2 N={n} x={x}: {g2}");
            }
        }
    }

    #[test]
    fn widths_by_root_search() {
        for n in [1.1, 2.0, 12.0, 300.0] {
            let dg = with_n(n);
            assert_relative_eq!(g1_width_by_root(&dg).unwrap(), g1_width(&dg).unwrap(), max_relative = 1e-10);
            assert_relative_eq!(g2_width_by_root(&dg).unwrap(), g2_width(&dg).unwrap(), max_relative = 1e-10);
        }
        assert!(matches!(g1_width(&with_n(1.0)), Err(Error::DegenerateState(_))));
        assert!(matches!(g2_width(&with_n(1.0)), Err(Error::DegenerateState(_))));
    }

    #[test]
    fn large_n_limits() {
        let dg = with_n(1e5);
        assert_relative_eq!(g1_width(&dg).unwrap() / birth_zone_number(&dg).delta_bz, 1.0, max_relative = 1e-9);
        let n1 = large_n_threshold(Coherence::First, 0.01).unwrap();
        let n2 = large_n_threshold(Coherence::Second, 0.01).unwrap();
        assert!((n1 - 12.3).abs() <= 0.2, "g1 threshold {n1}");
        assert!((n2 - 11.4).abs() <= 0.2, "g2 threshold {n2}");
    }

    proptest! {
        #[test]
        fn information_width_tradeoff(n in 1.01f64..1e3, step in 1.001f64..3.0) {
            let (a, b) = (with_n(n), with_n(n * step));
            // Width trend is taken at a fixed pump width.
            let fixed_pump = |m: f64| DoubleGaussian::new(1.0, 1.0 / m).unwrap();
            prop_assert!(mutual_information_bits(&b) > mutual_information_bits(&a));
            prop_assert!(g1_width(&fixed_pump(n * step)).unwrap() < g1_width(&fixed_pump(n)).unwrap());
        }

        #[test]
        fn geometric_spectrum(n in 1.01f64..500.0) {
            let s = schmidt_eigenvalues(n, default_n_max(n)).unwrap();
            prop_assert!(s.eigenvalues.iter().all(|&l| l > 0.0 && l <= 1.0));
            prop_assert!(s.truncation_mass < 1e-12);
        }
    }
}
