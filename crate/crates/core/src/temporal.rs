//! Temporal correlation widths of photon pairs.
//!
//! Type-II pairs walk off in time by a fixed lag, giving a top-hat
//! time-difference distribution of full width W. Type-I pairs have a
//! sinc²-shaped spectrum in the frequency difference that is structurally the
//! transverse problem over again. The dispersion scale a' = L_z·|κ₁|/4 plays
//! the role of the transverse a, so σ = √2·σ₋(a') for each estimator.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gaussfit::Estimator;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// s²/m per fs²/mm.
pub const FS2_PER_MM: f64 = 1e-27;

/// The shipped fixture table.
pub const FIXTURE_TABLE: &str = include_str!("../data/materials.dat");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialDispersion {
    pub n_g_signal: f64,
    pub n_g_idler: f64,
    /// Group-velocity dispersion d²k/dω² at half the pump frequency, s²/m.
    pub kappa1: f64,
}

impl MaterialDispersion {
    pub fn new(n_g_signal: f64, n_g_idler: f64, kappa1: f64) -> Result<Self> {
        if !(n_g_signal >= 1.0 && n_g_idler >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "group indices must be ≥ 1, got {n_g_signal} and {n_g_idler}"
            )));
        }
        if !kappa1.is_finite() {
            return Err(Error::InvalidParameter("kappa1 must be finite".into()));
        }
        Ok(Self {
            n_g_signal,
            n_g_idler,
            kappa1,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralFilter {
    pub center_wavelength: f64,
    /// Full width of the passband in wavelength, m.
    pub bandwidth_fwhm: f64,
}

impl SpectralFilter {
    pub fn new(center_wavelength: f64, bandwidth_fwhm: f64) -> Result<Self> {
        if !(center_wavelength > 0.0 && bandwidth_fwhm > 0.0 && bandwidth_fwhm < center_wavelength) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < bandwidth ({bandwidth_fwhm:e}) < center wavelength ({center_wavelength:e})"
            )));
        }
        Ok(Self {
            center_wavelength,
            bandwidth_fwhm,
        })
    }
}

/// Full width W = L_z·|n_g,s − n_g,i|/c of the Type-II top-hat, in seconds.
/// This is a full width, not a standard deviation.
pub fn type2_width(crystal_length: f64, disp: &MaterialDispersion) -> f64 {
    crystal_length * (disp.n_g_signal - disp.n_g_idler).abs() / SPEED_OF_LIGHT
}

/// Type-I σ_(t₁−t₂): √(9L_z|κ₁|/10) for exact variance, √(4L_z|κ₁|/9) for peak matching.
pub fn type1_sigma(crystal_length: f64, disp: &MaterialDispersion, estimator: Estimator) -> Result<f64> {
    if disp.kappa1 == 0.0 {
        return Err(Error::Domain("Type-I width needs nonzero group-velocity dispersion".into()));
    }
    if !(crystal_length > 0.0) {
        return Err(Error::InvalidParameter(format!("crystal length must be positive, got {crystal_length}")));
    }
    let a_time = crystal_length * disp.kappa1.abs() / 4.0;
    Ok(std::f64::consts::SQRT_2 * estimator.sigma_minus(a_time))
}

/// Angular-frequency σ of a filter, taken as half its full angular width:
/// σ_ω = π·c·Δλ/λ².
pub fn filter_sigma_omega(filter: &SpectralFilter) -> f64 {
    0.5 * 2.0 * PI * SPEED_OF_LIGHT * filter.bandwidth_fwhm / filter.center_wavelength.powi(2)
}

/// Smallest resolvable σ_(t₁−t₂) = 1/(2σ_ω).
pub fn time_correlation_floor(sigma_omega: f64) -> Result<f64> {
    if !(sigma_omega > 0.0) {
        return Err(Error::InvalidParameter(format!("σ_ω must be positive, got {sigma_omega}")));
    }
    Ok(0.5 / sigma_omega)
}

/// σ_(t₁+t₂)/σ_(t₁−t₂) for a user-supplied pump coherence time. No default
/// pump linewidth is assumed.
pub fn sum_difference_ratio(pump_coherence_time: f64, sigma_difference: f64) -> Result<f64> {
    if !(pump_coherence_time > 0.0 && sigma_difference > 0.0) {
        return Err(Error::InvalidParameter("both times must be positive".into()));
    }
    Ok(pump_coherence_time / sigma_difference)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialRecord {
    pub crystal: String,
    pub center_wavelength_nm: f64,
    pub dispersion: MaterialDispersion,
}

/// Material records keyed by (crystal, center wavelength).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaterialTable {
    records: BTreeMap<(String, u64), MaterialRecord>,
}

impl MaterialTable {
    pub fn fixtures() -> Self {
        FIXTURE_TABLE.parse().expect("shipped fixture table parses")
    }

    pub fn get(&self, crystal: &str, center_wavelength_nm: f64) -> Option<&MaterialRecord> {
        self.records.get(&(crystal.to_string(), center_wavelength_nm.to_bits()))
    }

    /// The single record for `crystal`, if its name is unambiguous.
    pub fn by_name(&self, crystal: &str) -> Option<&MaterialRecord> {
        let mut it = self.records.values().filter(|r| r.crystal == crystal);
        match (it.next(), it.next()) {
            (Some(r), None) => Some(r),
            _ => None,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &MaterialRecord> {
        self.records.values()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl FromStr for MaterialTable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut records = BTreeMap::new();
        for (lineno, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| Error::InvalidParameter(format!("material table line {}: {msg}", lineno + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(bad(&format!("expected 5 columns, found {}", fields.len())));
            }
            let num = |i: usize| fields[i].parse::<f64>().map_err(|_| bad(&format!("`{}` is not a number", fields[i])));
            let wl = num(1)?;
            let dispersion = MaterialDispersion::new(num(2)?, num(3)?, num(4)? * FS2_PER_MM).map_err(|e| bad(&e.to_string()))?;
            let key = (fields[0].to_string(), wl.to_bits());
            if records.contains_key(&key) {
                return Err(bad("duplicate (crystal, wavelength) entry"));
            }
            records.insert(
                key,
                MaterialRecord {
                    crystal: fields[0].to_string(),
                    center_wavelength_nm: wl,
                    dispersion,
                },
            );
        }
        Ok(Self { records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn fixtures_parse() {
        let t = MaterialTable::fixtures();
        assert_eq!(t.len(), 2);
        let bibo = t.get("bibo_type1_fixture", 1550.0).unwrap();
        assert_relative_eq!(bibo.dispersion.kappa1, 3.0e-27, max_relative = 1e-15);
        assert!(t.by_name("bbo_type2_fixture").is_some());
        assert!(t.get("bbo_type2_fixture", 700.0).is_none());
    }

    #[test]
    fn table_errors() {
        assert!("x 1 2".parse::<MaterialTable>().is_err());
        assert!("x 800 1.5 1.5 abc".parse::<MaterialTable>().is_err());
        assert!("x 800 0.5 1.5 1".parse::<MaterialTable>().is_err());
        assert!("x 800 1.5 1.5 1\nx 800 1.6 1.6 1".parse::<MaterialTable>().is_err());
    }

    #[test]
    fn type2_walkoff() {
        let t = MaterialTable::fixtures();
        let bbo = t.by_name("bbo_type2_fixture").unwrap().dispersion;
        let w = type2_width(0.5e-3, &bbo);
        assert!((w * 1e15 - 125.0).abs() < 0.5, "W = {} fs", w * 1e15);
        assert_relative_eq!(type2_width(1e-3, &bbo), 2.0 * w, max_relative = 1e-15);
        let same = MaterialDispersion::new(1.7, 1.7, 0.0).unwrap();
        assert_eq!(type2_width(1e-3, &same), 0.0);
    }

    #[test]
    fn type1_widths() {
        let t = MaterialTable::fixtures();
        let bibo = t.by_name("bibo_type1_fixture").unwrap().dispersion;
        let pm = type1_sigma(3e-3, &bibo, Estimator::PeakMatch).unwrap();
        let ex = type1_sigma(3e-3, &bibo, Estimator::ExactVariance).unwrap();
        assert_relative_eq!(pm, (4.0 * 3e-3 * 3.0e-27 / 9.0f64).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(ex, (9.0 * 3e-3 * 3.0e-27 / 10.0f64).sqrt(), max_relative = 1e-14);
        assert!((pm * 1e15 - 2.0).abs() < 0.005);
        assert_relative_eq!(ex / pm, (81.0f64 / 40.0).sqrt(), max_relative = 1e-12);
        let neg = MaterialDispersion { kappa1: -bibo.kappa1, ..bibo };
        assert_eq!(type1_sigma(3e-3, &neg, Estimator::PeakMatch).unwrap(), pm);
        let flat = MaterialDispersion::new(1.5, 1.5, 0.0).unwrap();
        assert!(matches!(type1_sigma(3e-3, &flat, Estimator::PeakMatch), Err(Error::Domain(_))));
    }

    #[test]
    fn filter_conversion() {
        let f = SpectralFilter::new(1550e-9, 2e-9).unwrap();
        let s = filter_sigma_omega(&f);
        assert!((s / 7.85e11 - 1.0).abs() < 0.01);
        let half = SpectralFilter::new(1550e-9, 1e-9).unwrap();
        assert_relative_eq!(filter_sigma_omega(&half), s / 2.0, max_relative = 1e-15);
        let f775 = SpectralFilter::new(775e-9, 1e-9).unwrap();
        assert!((filter_sigma_omega(&f775) / 1.57e12 - 1.0).abs() < 0.01);
        assert!(SpectralFilter::new(1e-6, 2e-6).is_err());
    }

    #[test]
    fn heisenberg_floor() {
        let floor = time_correlation_floor(7.8e11).unwrap();
        assert!((floor * 1e15 - 641.0).abs() < 1.0);
        assert!((floor * 1e15 / 600.0 - 1.0).abs() < 0.1);
        let broad = time_correlation_floor(2e14).unwrap();
        assert_relative_eq!(broad, 2.5e-15, max_relative = 1e-12);
        // "Of the order of 4 fs": same order of magnitude.
        assert!((broad / 4e-15).log10().abs() < 0.5);
        assert_relative_eq!(time_correlation_floor(2.0 * 7.8e11).unwrap(), floor / 2.0, max_relative = 1e-15);
        assert!(time_correlation_floor(0.0).is_err());
    }

    #[test]
    fn filtering_penalty_and_type_contrast() {
        let t = MaterialTable::fixtures();
        let pm = type1_sigma(3e-3, &t.by_name("bibo_type1_fixture").unwrap().dispersion, Estimator::PeakMatch).unwrap();
        let floor = time_correlation_floor(filter_sigma_omega(&SpectralFilter::new(1550e-9, 2e-9).unwrap())).unwrap();
        assert!(floor / pm > 100.0);
        let w = type2_width(0.5e-3, &t.by_name("bbo_type2_fixture").unwrap().dispersion);
        assert!(w / pm > 50.0 && w / pm < 100.0);
        assert_relative_eq!(sum_difference_ratio(1e-6, 1e-15).unwrap(), 1e9, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn estimator_ratio(l in 1e-5f64..1e-1, k in -1e-24f64..1e-24) {
            prop_assume!(k != 0.0);
            let d = MaterialDispersion::new(1.5, 1.5, k).unwrap();
            let r = type1_sigma(l, &d, Estimator::ExactVariance).unwrap() / type1_sigma(l, &d, Estimator::PeakMatch).unwrap();
            prop_assert!((r - (81.0f64 / 40.0).sqrt()).abs() < 1e-12);
            let r4 = type1_sigma(4.0 * l, &d, Estimator::PeakMatch).unwrap() / type1_sigma(l, &d, Estimator::PeakMatch).unwrap();
            prop_assert!((r4 - 2.0).abs() < 1e-12);
        }
    }
}
