//! End-to-end runs of the `biphoton` binary.

use std::io::Write;
use std::process::{Command, Output};

use biphoton::model::x_minus_density;
use biphoton::numerics::special::fresnel;
use biphoton_cli::config::RunConfig;
use biphoton_cli::verify::{check_fourier_consistency, fresnel_unit_argument, x_minus_density_from};

const SPDC_390: &str = "[spdc]\nlambda_p = 3.9e-7\ncrystal_length = 2e-3\nsigma_p = 1e-3\n";

fn config_file(text: &str) -> tempfile_path::Path {
    tempfile_path::Path::new(text)
}

// Minimal self-cleaning temp file, keyed by content hash and process id.
mod tempfile_path {
    use std::hash::{DefaultHasher, Hash, Hasher};

    pub struct Path(pub std::path::PathBuf);

    impl Path {
        pub fn new(text: &str) -> Self {
            let mut h = DefaultHasher::new();
            text.hash(&mut h);
            let p = std::env::temp_dir().join(format!("biphoton-{}-{:x}.cfg", std::process::id(), h.finish()));
            let mut f = std::fs::File::create(&p).unwrap();
            super::Write::write_all(&mut f, text.as_bytes()).unwrap();
            Self(p)
        }

        pub fn as_str(&self) -> &str {
            self.0.to_str().unwrap()
        }
    }

    impl Drop for Path {
        fn drop(&mut self) {
            let _ = std::fs::remove_file(&self.0);
        }
    }
}

fn biphoton(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biphoton")).args(args).output().unwrap()
}

#[test]
fn slit_scan_csv_is_bit_identical_and_round_trips() {
    let cfg = config_file(&format!("{SPDC_390}[slit_scan]\npairs_per_step = 50000\n"));
    let args = ["slit-scan", "--config", cfg.as_str(), "--format", "csv", "--estimator", "exact", "--seed", "17"];
    let a = biphoton(&args);
    let b = biphoton(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let echoed = RunConfig::from_echo(&text).unwrap();
    assert_eq!(echoed.slit_scan.unwrap().rng_seed, 17);
    // Re-running from the echoed header reproduces the file exactly.
    let again = config_file(&echoed.to_text());
    let c = biphoton(&["slit-scan", "--config", again.as_str()]);
    assert_eq!(String::from_utf8(c.stdout).unwrap(), text);
    assert!(text.contains("\nscan_position_m,counts\n"));
}

#[test]
fn exit_codes() {
    let bad = config_file(&format!("{SPDC_390}[output]\ncolour = red\n"));
    let out = biphoton(&["analyze", "--config", bad.as_str()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 6, key `colour`"), "{err}");

    // Slits wider than the scan window: the deconvolved variance goes negative.
    let wide = config_file(&format!(
        "{SPDC_390}[slit_scan]\nslit_width = 1e-3\nscan_min = -1e-4\nscan_max = 1e-4\nscan_steps = 9\npairs_per_step = 20000\n"
    ));
    let out = biphoton(&["slit-scan", "--config", wide.as_str(), "--estimator", "exact"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    let out = biphoton(&["analyze"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn analyze_is_deterministic_and_lists_literature() {
    let cfg = config_file(SPDC_390);
    let a = biphoton(&["analyze", "--config", cfg.as_str()]);
    let b = biphoton(&["analyze", "--config", cfg.as_str()]);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    for needle in ["[moment_match]", "[peak_match]", "[exact_variance]", "(14.95 µm)", "17 ± 7 µm"] {
        assert!(text.contains(needle), "missing {needle}");
    }
    let csv = biphoton(&["analyze", "--config", cfg.as_str(), "--format", "csv", "--log-base", "e"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.contains("# log_base = e"));
    assert!(text.contains("estimator,quantity,value,unit"));
}

#[test]
fn temporal_and_schmidt_commands() {
    let cfg = config_file("[temporal]\nmaterial = bbo_type2_fixture\ncrystal_length = 5e-4\n");
    let out = String::from_utf8(biphoton(&["temporal", "--config", cfg.as_str()]).stdout).unwrap();
    assert!(out.contains("(125.1 fs)"), "{out}");
    let cfg = config_file("[schmidt]\nbirth_zone_number = 1\n");
    let out = String::from_utf8(biphoton(&["schmidt", "--config", cfg.as_str(), "--format", "csv"]).stdout).unwrap();
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, ["estimator,birth_zone_number,n,lambda_n", "-,1e0,0,1e0"]);
}

#[test]
fn verify_passes_and_reports_fwhm_figure() {
    let out = biphoton(&["verify"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("0.28% smaller"), "{text}");
    assert!(text.contains("0 failed"));
}

#[test]
fn fourier_check_catches_wrong_fresnel_convention() {
    // Mutation: build ρ(x₋) from ∫cos(t²), ∫sin(t²) instead of the π/2 form.
    let mutated = check_fourier_consistency(|x, a| x_minus_density_from(x, a, fresnel_unit_argument));
    assert!(!mutated.passed, "mutated convention slipped through: {mutated:?}");
    assert!(mutated.deviation > 1e-2);
    let direct = check_fourier_consistency(|x, a| x_minus_density_from(x, a, fresnel));
    assert!(direct.passed, "{direct:?}");
    assert!(check_fourier_consistency(x_minus_density).passed);
}
