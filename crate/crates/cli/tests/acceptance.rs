//! Release acceptance: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p biphoton-cli --test acceptance -- --nocapture`
//! to see the lines. The test fails if any criterion fails.

use std::f64::consts::PI;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use biphoton::coherence::{
    default_n_max, g1_quadrature, g1_symmetric, g2_quadrature, g2_symmetric, large_n_threshold,
    mutual_information_bits, schmidt_eigenvalues, schmidt_number, Coherence,
};
use biphoton::experiment::{
    estimate_conditional_width, ks_critical_1pct, ks_distance, sample_pairs, simulate_slit_scan, x_minus_of,
    JointModel, ModelKind, SlitScanConfig,
};
use biphoton::gaussfit::{
    correlation_width, exact_width_at_fraction, fit, gaussian_width_at_fraction, stats, DoubleGaussian, Estimator,
    LogBase,
};
use biphoton::model::{
    k_minus_moments, oracle_axis, x_minus_density, x_minus_density_oracle, x_minus_mass_within, x_minus_moments,
    SpdcConfig, XMinusCdf,
};
use biphoton::numerics::grid::Axis;
use biphoton::propagation::{fft_propagate_oracle, pearson_propagated, propagate_equal, propagate_general, PropagationPlanes};
use biphoton::temporal::{filter_sigma_omega, time_correlation_floor, type1_sigma, type2_width, MaterialTable, SpectralFilter};
use biphoton::Execution;
use biphoton_cli::commands::order_of_magnitude;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn c1_widths() -> Outcome {
    let c390 = SpdcConfig::new(390e-9, 2e-3, 1e-3).unwrap();
    let c355 = SpdcConfig::new(355e-9, 5e-3, 1e-3).unwrap();
    let got = [
        correlation_width(&fit(&c390, Estimator::ExactVariance)) * 1e6,
        correlation_width(&fit(&c355, Estimator::ExactVariance)) * 1e6,
        correlation_width(&fit(&c355, Estimator::PeakMatch)) * 1e6,
    ];
    let want = [14.9, 22.5, 15.8];
    let ok = got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 0.05);
    outcome(ok, format!("{:.3} / {:.3} / {:.3} µm vs 14.9 / 22.5 / 15.8 µm (±0.05)", got[0], got[1], got[2]))
}

fn c2_moments() -> Outcome {
    let mut worst = 0.0f64;
    for a in [0.5, 2.0, 10.0] {
        let k = k_minus_moments(a, Execution::Parallel).unwrap();
        let x = x_minus_moments(a, Execution::Parallel).unwrap();
        for (g, w) in [(k.mass, 1.0), (k.second, 0.75 / a), (x.mass, 1.0), (x.second, 1.8 * a)] {
            worst = worst.max((g / w - 1.0).abs());
        }
    }
    outcome(worst < 1e-6, format!("worst relative error {worst:.2e} (< 1e-6)"))
}

fn c3_fourier() -> Outcome {
    let mut worst = 0.0f64;
    for a in [0.5, 2.0, 10.0] {
        let axis = oracle_axis(a, 4096).unwrap();
        let grid = x_minus_density_oracle(a, &axis).unwrap();
        for (x, v) in grid.iter().filter(|(x, _)| x.abs() <= 5.0 * a.sqrt()) {
            worst = worst.max((x_minus_density(x, a) - v).abs());
        }
    }
    outcome(worst < 1e-4, format!("max |Δρ| = {worst:.2e} on ±5√a, 4096 points (< 1e-4)"))
}

fn c4_fwhm() -> Outcome {
    let a = 1.0;
    let s = Estimator::PeakMatch.sigma_minus(a);
    let shortfall = 1.0 - gaussian_width_at_fraction(s, 0.5).unwrap() / exact_width_at_fraction(a, 0.5).unwrap();
    let at48 = gaussian_width_at_fraction(s, 0.482).unwrap() / exact_width_at_fraction(a, 0.482).unwrap() - 1.0;
    outcome(
        (0.0..=0.0035).contains(&shortfall) && at48.abs() < 0.01,
        format!("PM FWHM {:.3}% smaller (≤ 0.35%); 48.2%-level widths differ {:.3}% (< 1%)", 100.0 * shortfall, 100.0 * at48),
    )
}

fn c5_cdf() -> Outcome {
    let a = 1.0;
    let mass = x_minus_mass_within(a, Estimator::PeakMatch.sigma_minus(a)).unwrap();
    outcome((mass - 0.690).abs() <= 0.002, format!("mass within ±σ₋(PM) = {:.3}% (69.0 ± 0.2%)", 100.0 * mass))
}

fn c6_ratio() -> Outcome {
    let target = (81.0f64 / 40.0).sqrt();
    let t = Estimator::ExactVariance.sigma_minus(6.2e-11) / Estimator::PeakMatch.sigma_minus(6.2e-11);
    let disp = MaterialTable::fixtures().by_name("bibo_type1_fixture").unwrap().dispersion;
    let temporal = type1_sigma(3e-3, &disp, Estimator::ExactVariance).unwrap()
        / type1_sigma(3e-3, &disp, Estimator::PeakMatch).unwrap();
    let dev = (t - target).abs().max((temporal - target).abs());
    outcome(dev <= 1e-10, format!("transverse {t:.12}, temporal {temporal:.12} vs 1.42302 (dev {dev:.1e})"))
}

fn c7_propagation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let sm = rng.random_range(1e-6..1e-4);
        let dg = DoubleGaussian::new(sm * rng.random_range(1.0..300.0), sm).unwrap();
        let k_p = 2.0 * PI / rng.random_range(300e-9..1000e-9);
        let planes = PropagationPlanes::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), k_p).unwrap();
        let g = propagate_general(&dg, &planes).unwrap();
        worst = worst.max((-g.coeff_b / (g.coeff_a * g.coeff_c).sqrt() - pearson_propagated(&dg, &planes)).abs());
    }
    let dg = DoubleGaussian::new(1.0, 0.25).unwrap();
    let axis = Axis::centered(1024, 96.0 / 1024.0).unwrap();
    let (mut dr, mut dw) = (0.0f64, 0.0f64);
    for zbar in [0.0, 0.5, 1.0, 2.0] {
        let planes = PropagationPlanes::from_reduced(&dg, zbar, zbar, 1.0).unwrap();
        let m = fft_propagate_oracle(&dg, &planes, &axis, Execution::Parallel).unwrap().moments();
        dr = dr.max((m.pearson_r() - pearson_propagated(&dg, &planes)).abs());
        let eq = propagate_equal(&dg, planes.z1, 1.0).unwrap();
        let (vp, vm, _) = m.rotated();
        dw = dw.max((vp.sqrt() / eq.sigma_plus() - 1.0).abs()).max((vm.sqrt() / eq.sigma_minus() - 1.0).abs());
    }
    outcome(
        worst <= 1e-10 && dr <= 1e-3 && dw <= 5e-3,
        format!("closed form vs −b/√(ac): {worst:.1e} over 100 random tuples; FFT oracle |Δr| {dr:.1e}, |Δσ̃/σ̃| {dw:.1e}"),
    )
}

fn c8_schmidt() -> Outcome {
    let mut worst = 0.0f64;
    let mut trunc = 0.0f64;
    for n in [1.2, 2.0, 5.0, 20.0, 100.0] {
        let sp = schmidt_eigenvalues(n, default_n_max(n)).unwrap();
        trunc = trunc.max(sp.truncation_mass);
        worst = worst.max((sp.eigenvalues.iter().sum::<f64>() - 1.0).abs());
        worst = worst.max((1.0 / sp.eigenvalues.iter().map(|l| l * l).sum::<f64>() - 0.5 * (n + 1.0 / n)).abs());
        let dg = DoubleGaussian::new(n * 1e-5, 1e-5).unwrap();
        worst = worst.max((mutual_information_bits(&dg) - stats(&dg, LogBase::Two).mutual_information).abs());
    }
    let gap = (schmidt_number(100.0).log2() - (100f64.log2() - 1.0)).abs();
    outcome(
        worst <= 1e-10 && trunc < 1e-12 && gap < 0.015,
        format!("sum/participation/MI worst {worst:.1e}; truncation {trunc:.1e}; large-N gap at N=100 {gap:.5} bit"),
    )
}

fn c9_coherence() -> Outcome {
    let mut worst = 0.0f64;
    for n in [2.0, 5.0, 15.0] {
        let dg = DoubleGaussian::new(n * 0.1, 0.1).unwrap();
        for x in [0.0, 0.01, 0.05, 0.1] {
            worst = worst.max((g1_quadrature(&dg, x).unwrap() - g1_symmetric(&dg, x)).abs());
            worst = worst.max((g2_quadrature(&dg, x).unwrap() / g2_symmetric(&dg, x) - 1.0).abs());
        }
    }
    let t1 = large_n_threshold(Coherence::First, 0.01).unwrap();
    let t2 = large_n_threshold(Coherence::Second, 0.01).unwrap();
    outcome(
        worst <= 1e-8 && (t1 - 12.3).abs() <= 0.2 && (t2 - 11.4).abs() <= 0.2,
        format!("closed vs quadrature {worst:.1e}; 1% crossings N = {t1:.2} (g¹, 12.3), {t2:.2} (g², 11.4)"),
    )
}

fn c10_temporal() -> Outcome {
    let t = MaterialTable::fixtures();
    let w = type2_width(0.5e-3, &t.by_name("bbo_type2_fixture").unwrap().dispersion) * 1e15;
    let pm = type1_sigma(3e-3, &t.by_name("bibo_type1_fixture").unwrap().dispersion, Estimator::PeakMatch).unwrap() * 1e15;
    let so = filter_sigma_omega(&SpectralFilter::new(1550e-9, 2e-9).unwrap());
    // The quoted 641 fs uses the rounded σ_ω ≈ 7.8e11 rad/s.
    let floor_quoted = time_correlation_floor(7.8e11).unwrap() * 1e15;
    let floor = time_correlation_floor(so).unwrap() * 1e15;
    let shown = order_of_magnitude(floor);
    outcome(
        (w - 125.0).abs() < 0.5
            && (pm - 2.0).abs() < 0.05
            && (so / 7.85e11 - 1.0).abs() < 0.01
            && (floor_quoted - 641.0).abs() < 1.0
            && shown == "6×10²",
        format!(
            "W = {w:.2} fs, σ_PM = {pm:.3} fs, σ_ω = {so:.4e} rad/s, floor {floor_quoted:.0} fs at 7.8e11 ({floor:.0} fs exact) shown as {shown} fs; fixtures back-derived"
        ),
    )
}

fn c11_slit_scan() -> Outcome {
    let start = std::time::Instant::now();
    let config = SpdcConfig::new(390e-9, 2e-3, 1e-3).unwrap();
    let model = JointModel::from_config(&config, ModelKind::DoubleGaussian, Estimator::ExactVariance);
    let cfg = SlitScanConfig::default();
    let hist = simulate_slit_scan(&cfg, &model, Execution::Parallel).unwrap();
    let est = estimate_conditional_width(&hist).unwrap();
    let dev = est.width / model.conditional_width() - 1.0;
    let repeat = simulate_slit_scan(&cfg, &model, Execution::Parallel).unwrap() == hist;

    let a = config.a();
    let sinc = JointModel::from_config(&config, ModelKind::SincExact, Estimator::ExactVariance);
    let xs = x_minus_of(&sample_pairs(&sinc, 100_000, cfg.rng_seed, Execution::Parallel).unwrap());
    let cdf = XMinusCdf::new(a, Execution::Parallel).unwrap();
    let d = ks_distance(&xs, |x| cdf.cdf(x));
    let crit = ks_critical_1pct(xs.len());
    let secs = start.elapsed().as_secs_f64();
    outcome(
        dev.abs() < 0.05 && repeat && d < crit && secs < 60.0,
        format!(
            "σ_(x₁|x₂) = {:.3} ± {:.3} µm vs {:.3} µm ({:+.2}%); deterministic {repeat}; KS D = {d:.4} < {crit:.4}; {secs:.1} s. \
             Literature lines (not targets): 13.5 µm, 17 ± 7 µm, 10.9 ± 0.7 µm",
            est.width * 1e6,
            est.std_error * 1e6,
            model.conditional_width() * 1e6,
            100.0 * dev
        ),
    )
}

fn c12_verify() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_biphoton")).arg("verify").output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    outcome(
        out.status.code() == Some(0),
        format!("exit code {:?}; {}", out.status.code(), text.lines().last().unwrap_or("")),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("width formulas", c1_widths),
        ("moment identities", c2_moments),
        ("Fourier consistency", c3_fourier),
        ("FWHM claim", c4_fwhm),
        ("CDF claim", c5_cdf),
        ("estimator ratio", c6_ratio),
        ("propagation", c7_propagation),
        ("Schmidt / entanglement", c8_schmidt),
        ("coherence widths", c9_coherence),
        ("temporal", c10_temporal),
        ("Monte Carlo slit scan", c11_slit_scan),
        ("verify suite", c12_verify),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        println!("criterion {:>2} {} {name}: {}", i + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
