//! Subcommand bodies. Each returns the complete output text.
//!
//! CSV outputs start with the effective config echoed as `# ` lines, followed
//! by `# ## ` notes (comments once the echo is re-parsed), the header row,
//! and then the data. Column headers carry SI units.

use std::fmt::Write as _;

use biphoton::coherence::{
    birth_zone_number, default_n_max, g1_width, g2_width, mutual_information_bits, schmidt_eigenvalues,
    schmidt_number,
};
use biphoton::experiment::{estimate_conditional_width, simulate_slit_scan, JointModel, ModelKind};
use biphoton::gaussfit::{correlation_width, fit, gaussian_density, stats, Estimator};
use biphoton::model::{k_minus_density, x_minus_density};
use biphoton::propagation::{pearson_propagated, propagate_equal, PropagationPlanes};
use biphoton::temporal::{
    filter_sigma_omega, sum_difference_ratio, time_correlation_floor, type1_sigma, type2_width, MaterialRecord,
    MaterialTable, SpectralFilter,
};
use biphoton::Execution;

use crate::config::{ConfigError, DensityKind, EstimatorChoice, Format, PlaneSet, RunConfig};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

/// Measured widths from the literature, shown next to the theory. They are
/// comparison lines only: the setups are not specified well enough to simulate.
pub const LITERATURE: [(&str, &str); 3] = [
    ("slit scan, 390 nm pump, 2 mm crystal, 40 µm slits", "13.5 µm (error > 10%)"),
    ("slit scan, same laser and crystal", "17 ± 7 µm"),
    ("camera imaging, 355 nm pump, 5 mm crystal", "10.9 ± 0.7 µm"),
];

fn estimators(cfg: &RunConfig) -> Vec<Estimator> {
    cfg.output.estimator.unwrap_or(EstimatorChoice::All).estimators()
}

fn csv_preamble(cfg: &RunConfig, command: &str, notes: &[String]) -> String {
    let mut s = format!("# ## biphoton {} {command}\n", env!("CARGO_PKG_VERSION"));
    s.push_str(&cfg.echo());
    for n in notes {
        let _ = writeln!(s, "# ## {n}");
    }
    s
}

fn um(x: f64) -> String {
    format!("{:.4e} m ({:.2} µm)", x, x * 1e6)
}

fn fs(x: f64) -> String {
    format!("{:.4e} s ({:.1} fs)", x, x * 1e15)
}

/// One significant figure in the form "6×10²".
pub fn order_of_magnitude(x: f64) -> String {
    const SUP: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    let mut exp = x.abs().log10().floor() as i32;
    let mut lead = (x.abs() / 10f64.powi(exp)).round();
    if lead >= 10.0 {
        lead = 1.0;
        exp += 1;
    }
    let mut e = String::new();
    if exp < 0 {
        e.push('⁻');
    }
    for d in exp.unsigned_abs().to_string().chars() {
        e.push(SUP[d.to_digit(10).unwrap() as usize]);
    }
    format!("{}{}×10{e}", if x < 0.0 { "-" } else { "" }, lead)
}

pub fn analyze(cfg: &RunConfig) -> Result<String> {
    let spdc = cfg.spdc()?;
    let a = spdc.a();
    let base = cfg.output.log_base;
    let mut rows: Vec<(String, &str, f64, &str)> = vec![("-".into(), "a", a, "m^2")];
    for est in estimators(cfg) {
        let dg = fit(spdc, est);
        let bz = birth_zone_number(&dg);
        let st = stats(&dg, base);
        let name = est.name().to_string();
        let mut push = |q: &'static str, v: f64, unit: &'static str| rows.push((name.clone(), q, v, unit));
        push("sigma_difference", correlation_width(&dg), "m");
        push("sigma_minus", dg.sigma_minus(), "m");
        push("sigma_plus", dg.sigma_plus(), "m");
        push("sigma_conditional", st.conditional_variance.sqrt(), "m");
        push("pearson_r", st.pearson_r, "1");
        push("birth_zone_number", bz.n, "1");
        push("schmidt_number", schmidt_number(bz.n), "1");
        push("mutual_information", mutual_information_bits(&dg), "bit");
        push("mutual_information_nats", mutual_information_bits(&dg) * std::f64::consts::LN_2, "nat");
        push("fedorov_ratio", st.fedorov_ratio, "1");
        push("delta_bz", bz.delta_bz, "m");
        push("delta_p", bz.delta_p, "m");
        push("g1_width", g1_width(&dg)?, "m");
        push("g2_width", g2_width(&dg)?, "m");
    }
    Ok(match cfg.output.format {
        Format::Csv => {
            let notes: Vec<String> = LITERATURE.iter().map(|(s, v)| format!("literature: {s}: {v}")).collect();
            let mut s = csv_preamble(cfg, "analyze", &notes);
            s.push_str("estimator,quantity,value,unit\n");
            for (e, q, v, u) in rows {
                let _ = writeln!(s, "{e},{q},{v:e},{u}");
            }
            s
        }
        Format::Report => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "SPDC transverse correlations: λ_p = {:.4e} m, L_z = {:.4e} m, σ_p = {:.4e} m",
                spdc.lambda_p, spdc.crystal_length, spdc.sigma_p
            );
            let _ = writeln!(s, "a = L_z·λ_p/(4π) = {a:.6e} m^2\n");
            let mut current = String::new();
            for (e, q, v, u) in rows.into_iter().skip(1) {
                if e != current {
                    let _ = writeln!(s, "[{e}]");
                    current = e;
                }
                let shown = match u {
                    "m" => um(v),
                    "bit" | "nat" => format!("{v:.6} {u}s"),
                    _ => format!("{v:.6}"),
                };
                let _ = writeln!(s, "  {q:<26}{shown}");
            }
            let _ = writeln!(s, "\nLiterature comparison (measured σ_(x₁−x₂); not simulated):");
            for (setup, value) in LITERATURE {
                let _ = writeln!(s, "  {setup}: {value}");
            }
            let _ = writeln!(s, "\nEntropies use log base {}.", crate::config::log_base_name(base));
            s
        }
    })
}

pub fn density(cfg: &RunConfig) -> Result<String> {
    let sec = cfg
        .density
        .ok_or_else(|| ConfigError::plain("density needs a [density] section"))?;
    let a = match sec.a {
        Some(a) => a,
        None => cfg.spdc()?.a(),
    };
    let mut s = csv_preamble(cfg, "density", &[format!("a = {a:e} m^2")]);
    let sigmas: Vec<f64> = Estimator::ALL.iter().map(|e| e.sigma_minus(a)).collect();
    match sec.which {
        DensityKind::Fits => {
            s.push_str("estimator,sigma_minus_m,sigma_difference_m,sigma_k_minus_per_m\n");
            for (e, sm) in Estimator::ALL.iter().zip(&sigmas) {
                let _ = writeln!(s, "{},{sm:e},{:e},{:e}", e.name(), std::f64::consts::SQRT_2 * sm, 0.5 / sm);
            }
        }
        which => {
            let (lo, hi, n) = sec.grid.expect("grid is required for sampled densities");
            let (coord, unit, exact): (&str, &str, fn(f64, f64) -> f64) = match which {
                DensityKind::KMinus => ("k_minus_per_m", "m", k_minus_density),
                _ => ("x_minus_m", "per_m", x_minus_density),
            };
            let _ = writeln!(
                s,
                "{coord},exact_density_{unit},moment_match_gaussian_{unit},peak_match_gaussian_{unit},exact_variance_gaussian_{unit}"
            );
            let widths: Vec<f64> = match which {
                DensityKind::KMinus => sigmas.iter().map(|sm| 0.5 / sm).collect(),
                _ => sigmas,
            };
            for i in 0..n {
                let x = if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
                let _ = write!(s, "{x:e},{:e}", exact(x, a));
                for w in &widths {
                    let _ = write!(s, ",{:e}", gaussian_density(x, *w));
                }
                s.push('\n');
            }
        }
    }
    Ok(s)
}

pub fn propagate(cfg: &RunConfig) -> Result<String> {
    let spdc = cfg.spdc()?;
    let sec = cfg
        .propagate
        .as_ref()
        .ok_or_else(|| ConfigError::plain("propagate needs a [propagate] section"))?;
    let k_p = spdc.k_p();
    let pairs: Vec<(f64, f64)> = match &sec.planes {
        PlaneSet::Diagonal(z) => z.iter().map(|&z| (z, z)).collect(),
        PlaneSet::Grid(z1, z2) => z1.iter().flat_map(|&a| z2.iter().map(move |&b| (a, b))).collect(),
    };
    let mut s = csv_preamble(cfg, "propagate", &[format!("k_p = {k_p:e} 1/m")]);
    s.push_str("estimator,z1_m,z2_m,zbar1,zbar2,r,sigma_tilde_plus_m,sigma_tilde_minus_m\n");
    for est in estimators(cfg) {
        let dg = fit(spdc, est);
        for &(z1, z2) in &pairs {
            let planes = if sec.reduced {
                PropagationPlanes::from_reduced(&dg, z1, z2, k_p)?
            } else {
                PropagationPlanes::new(z1, z2, k_p)?
            };
            let (zb1, zb2) = planes.reduced(&dg);
            let r = pearson_propagated(&dg, &planes);
            let _ = write!(s, "{},{:e},{:e},{zb1:e},{zb2:e},{r:e},", est.name(), planes.z1, planes.z2);
            if planes.z1 == planes.z2 {
                let p = propagate_equal(&dg, planes.z1, k_p)?;
                let _ = writeln!(s, "{:e},{:e}", p.sigma_plus(), p.sigma_minus());
            } else {
                s.push_str(",\n");
            }
        }
    }
    Ok(s)
}

pub fn schmidt(cfg: &RunConfig) -> Result<String> {
    let sec = cfg.schmidt.unwrap_or_default();
    let cases: Vec<(String, f64)> = match sec.birth_zone_number {
        Some(n) => vec![("-".into(), n)],
        None => {
            let spdc = cfg.spdc()?;
            estimators(cfg)
                .into_iter()
                .map(|e| (e.name().to_string(), birth_zone_number(&fit(spdc, e)).n))
                .collect()
        }
    };
    let base = cfg.output.log_base;
    let mut spectra = Vec::new();
    for (name, n) in cases {
        let n_max = sec.n_max.unwrap_or_else(|| default_n_max(n));
        spectra.push((name, schmidt_eigenvalues(n, n_max)?));
    }
    Ok(match cfg.output.format {
        Format::Csv => {
            let notes: Vec<String> = spectra
                .iter()
                .map(|(name, sp)| {
                    format!(
                        "{name}: N = {:e}, K = {:e}, participation = {:e}, truncation_mass = {:e}",
                        sp.birth_zone_number,
                        sp.schmidt_number,
                        sp.participation_number(),
                        sp.truncation_mass
                    )
                })
                .collect();
            let mut s = csv_preamble(cfg, "schmidt", &notes);
            s.push_str("estimator,birth_zone_number,n,lambda_n\n");
            for (name, sp) in &spectra {
                for (i, l) in sp.eigenvalues.iter().enumerate() {
                    let _ = writeln!(s, "{name},{:e},{i},{l:e}", sp.birth_zone_number);
                }
            }
            s
        }
        Format::Report => {
            let mut s = String::new();
            for (name, sp) in &spectra {
                let _ = writeln!(s, "[{name}]");
                let _ = writeln!(s, "  birth-zone number N      {:.6}", sp.birth_zone_number);
                let _ = writeln!(s, "  Schmidt number K         {:.6}", sp.schmidt_number);
                let _ = writeln!(s, "  1/Σλ²                    {:.6}", sp.participation_number());
                let _ = writeln!(s, "  entropy                  {:.6} {}", sp.entropy(base), base.unit());
                let _ = writeln!(s, "  modes kept               {}", sp.eigenvalues.len());
                let _ = writeln!(s, "  discarded mass           {:.3e}", sp.truncation_mass);
                for (i, l) in sp.eigenvalues.iter().take(8).enumerate() {
                    let _ = writeln!(s, "  λ_{i:<3} {l:.10}");
                }
            }
            s
        }
    })
}

fn find_material<'t>(table: &'t MaterialTable, name: &str, center: Option<f64>) -> Result<&'t MaterialRecord> {
    let matches: Vec<&MaterialRecord> = table
        .iter()
        .filter(|r| r.crystal == name)
        .filter(|r| center.is_none_or(|c| (r.center_wavelength_nm - c * 1e9).abs() < 1e-6))
        .collect();
    match matches.as_slice() {
        [one] => Ok(one),
        [] => Err(ConfigError::plain(format!("no material `{name}` at the requested wavelength in the table")).into()),
        _ => Err(ConfigError::plain(format!("material `{name}` is ambiguous; set center_wavelength")).into()),
    }
}

pub fn temporal(cfg: &RunConfig) -> Result<String> {
    let sec = cfg
        .temporal
        .as_ref()
        .ok_or_else(|| ConfigError::plain("temporal needs a [temporal] section"))?;
    let table = match &sec.material_table {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| ConfigError::plain(format!("cannot read material table `{path}`: {e}")))?
            .parse::<MaterialTable>()?,
        None => MaterialTable::fixtures(),
    };
    let record = find_material(&table, &sec.material, sec.center_wavelength)?;
    let disp = record.dispersion;
    let length = match sec.crystal_length {
        Some(l) => l,
        None => cfg.spdc()?.crystal_length,
    };

    let mut rows: Vec<(&str, String, f64, &str)> = Vec::new();
    let mut differences = Vec::new();
    let w = type2_width(length, &disp);
    if w > 0.0 {
        rows.push(("type2_full_width", "-".into(), w, "s"));
        differences.push(("type2_full_width".to_string(), w));
    }
    if disp.kappa1 != 0.0 {
        for est in estimators(cfg) {
            let sig = type1_sigma(length, &disp, est)?;
            rows.push(("type1_sigma_difference", est.name().into(), sig, "s"));
            differences.push((format!("type1_sigma_difference/{}", est.name()), sig));
        }
    }
    let mut floor = None;
    if let Some((center, width)) = sec.filter {
        let so = filter_sigma_omega(&SpectralFilter::new(center, width)?);
        let f = time_correlation_floor(so)?;
        rows.push(("filter_sigma_omega", "-".into(), so, "rad/s"));
        rows.push(("time_correlation_floor", "-".into(), f, "s"));
        floor = Some(f);
    }
    let mut ratios = Vec::new();
    if let Some(tc) = sec.pump_coherence_time {
        for (what, d) in &differences {
            ratios.push((what.clone(), sum_difference_ratio(tc, *d)?));
        }
    }

    Ok(match cfg.output.format {
        Format::Csv => {
            let notes = [
                format!(
                    "material {} at {} nm (fixture values are back-derived, not measured)",
                    record.crystal, record.center_wavelength_nm
                ),
                format!("crystal_length = {length:e} m"),
            ];
            let mut s = csv_preamble(cfg, "temporal", &notes);
            s.push_str("quantity,estimator,value,unit\n");
            for (q, e, v, u) in &rows {
                let _ = writeln!(s, "{q},{e},{v:e},{u}");
            }
            for (what, r) in &ratios {
                let _ = writeln!(s, "sum_difference_ratio,{what},{r:e},1");
            }
            s
        }
        Format::Report => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "Temporal correlations: {} ({} nm), L_z = {length:.4e} m",
                record.crystal, record.center_wavelength_nm
            );
            if record.crystal.contains("fixture") {
                let _ = writeln!(s, "  (fixture dispersion values, back-derived from published widths)");
            }
            for (q, e, v, u) in &rows {
                let label = if e == "-" { q.to_string() } else { format!("{q} [{e}]") };
                let shown = match *u {
                    "s" => fs(*v),
                    _ => format!("{v:.4e} {u}"),
                };
                let _ = writeln!(s, "  {label:<46}{shown}");
            }
            if let Some(f) = floor {
                let _ = writeln!(s, "  filtered resolution floor ≈ {} fs", order_of_magnitude(f * 1e15));
            }
            for (what, r) in &ratios {
                let _ = writeln!(s, "  σ_(t₁+t₂)/σ_(t₁−t₂) [{what}]{:>10}{r:.4e}", "");
            }
            s
        }
    })
}

pub fn slit_scan(cfg: &RunConfig) -> Result<String> {
    let spdc = cfg.spdc()?;
    let scan = cfg.slit_scan.unwrap_or_default();
    let estimator = match (scan.model, cfg.output.estimator) {
        (ModelKind::DoubleGaussian, Some(EstimatorChoice::One(e))) => e,
        (ModelKind::DoubleGaussian, _) => {
            return Err(ConfigError::plain(
                "slit-scan with the double_gaussian model needs one estimator (--estimator moment|peak|exact)",
            )
            .into())
        }
        // σ₊ does not depend on the estimator.
        (ModelKind::SincExact, _) => Estimator::ExactVariance,
    };
    let model = JointModel::from_config(spdc, scan.model, estimator);
    let hist = simulate_slit_scan(&scan, &model, Execution::default())?;
    let est = estimate_conditional_width(&hist)?;
    let truth = model.conditional_width();
    Ok(match cfg.output.format {
        Format::Csv => {
            let notes = [
                format!("coincidences = {} of {} emitted pairs", hist.total_counts(), hist.total_pairs),
                format!("raw_std_m = {:e}", est.raw_std),
                format!("deconvolved_sigma_conditional_m = {:e}", est.width),
                format!("bootstrap_std_error_m = {:e}", est.std_error),
                format!("bootstrap_95_interval_m = {:e}, {:e}", est.interval.0, est.interval.1),
                format!("analytic_sigma_conditional_m = {truth:e}"),
            ];
            let mut s = csv_preamble(cfg, "slit-scan", &notes);
            s.push_str("scan_position_m,counts\n");
            for (x, c) in hist.bin_centers.iter().zip(&hist.counts) {
                let _ = writeln!(s, "{x:e},{c}");
            }
            s
        }
        Format::Report => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "Slit scan: {} model, {:.1} µm slits, {} positions, seed {}",
                scan.model,
                scan.slit_width * 1e6,
                scan.scan_steps,
                scan.rng_seed
            );
            let _ = writeln!(s, "  coincidences               {} of {} pairs", hist.total_counts(), hist.total_pairs);
            let _ = writeln!(s, "  raw histogram std          {}", um(est.raw_std));
            let _ = writeln!(s, "  deconvolved σ_(x₁|x₂)      {} ± {:.2} µm", um(est.width), est.std_error * 1e6);
            let _ = writeln!(s, "  analytic σ_(x₁|x₂)         {}", um(truth));
            let _ = writeln!(s, "  deviation                  {:+.2}%", 100.0 * (est.width / truth - 1.0));
            let _ = writeln!(s, "Literature comparison (measured; not simulation targets):");
            for (setup, value) in LITERATURE {
                let _ = writeln!(s, "  {setup}: {value}");
            }
            let peak = hist.counts.iter().copied().max().unwrap_or(0).max(1);
            for (x, c) in hist.bin_centers.iter().zip(&hist.counts) {
                let bar = "#".repeat((40 * c / peak) as usize);
                let _ = writeln!(s, "  {:>8.1} µm {c:>9} {bar}", x * 1e6);
            }
            s
        }
    })
}
