//! Monte Carlo slit-scan coincidence experiment.
//!
//! Pairs are drawn from either the Double-Gaussian or the exact sinc model.
//! A narrow slit is held fixed in the signal arm while an identical slit
//! scans the idler arm, and coincidences are counted at each position.
//! The conditional width is recovered from the coincidence histogram by
//! variance subtraction.
//!
//! Every work item (a chunk of samples or one scan position) owns a ChaCha8
//! stream keyed by `(seed, item index)`. Results are therefore bit-identical
//! for any thread count and for the sequential build.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal, StudentT};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gaussfit::{fit, stats, DoubleGaussian, Estimator, LogBase};
use crate::model::{x_minus_density, x_minus_variance, SpdcConfig};

const SAMPLE_CHUNK: usize = 1 << 16;
const BOOTSTRAP_STREAM: u64 = u64::MAX;
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Which joint density pairs are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    DoubleGaussian,
    SincExact,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::DoubleGaussian => "double_gaussian",
            ModelKind::SincExact => "sinc_exact",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "double_gaussian" => Ok(ModelKind::DoubleGaussian),
            "sinc_exact" => Ok(ModelKind::SincExact),
            other => Err(Error::InvalidParameter(format!(
                "unknown model `{other}` (expected double_gaussian or sinc_exact)"
            ))),
        }
    }
}

/// A sampleable joint position density at the crystal plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JointModel {
    DoubleGaussian(DoubleGaussian),
    /// Gaussian x₊ of width σ₊, x₋ from the exact ρ(x₋) with scale `a`.
    SincExact { sigma_plus: f64, a: f64 },
}

impl JointModel {
    pub fn from_config(config: &SpdcConfig, kind: ModelKind, estimator: Estimator) -> Self {
        let dg = fit(config, estimator);
        match kind {
            ModelKind::DoubleGaussian => JointModel::DoubleGaussian(dg),
            ModelKind::SincExact => JointModel::SincExact {
                sigma_plus: dg.sigma_plus(),
                a: config.a(),
            },
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            JointModel::DoubleGaussian(_) => ModelKind::DoubleGaussian,
            JointModel::SincExact { .. } => ModelKind::SincExact,
        }
    }

    pub fn sigma_plus(&self) -> f64 {
        match self {
            JointModel::DoubleGaussian(dg) => dg.sigma_plus(),
            JointModel::SincExact { sigma_plus, .. } => *sigma_plus,
        }
    }

    /// Standard deviation of x₋ = (x₁ − x₂)/√2.
    pub fn sigma_minus(&self) -> f64 {
        match self {
            JointModel::DoubleGaussian(dg) => dg.sigma_minus(),
            JointModel::SincExact { a, .. } => x_minus_variance(*a).sqrt(),
        }
    }

    /// σ_(x₁|x₂) = √(2σ₊²σ₋²/(σ₊² + σ₋²)).
    ///
    /// For the sinc model this uses the exact ⟨x₋²⟩. That value is the
    /// Gaussian conditional width only when σ₊ ≫ σ₋.
    pub fn conditional_width(&self) -> f64 {
        let (p2, m2) = (self.sigma_plus().powi(2), self.sigma_minus().powi(2));
        (2.0 * p2 * m2 / (p2 + m2)).sqrt()
    }

    fn sampler(&self) -> Result<PairSampler> {
        let plus = Normal::new(0.0, self.sigma_plus())
            .map_err(|e| Error::InvalidParameter(format!("σ₊: {e}")))?;
        let minus = match *self {
            JointModel::DoubleGaussian(dg) => MinusSampler::Gaussian(
                Normal::new(0.0, dg.sigma_minus()).map_err(|e| Error::InvalidParameter(format!("σ₋: {e}")))?,
            ),
            JointModel::SincExact { a, .. } => MinusSampler::Sinc(SincRejection::new(a)?),
        };
        Ok(PairSampler { plus, minus })
    }
}

/// Rejection sampler for ρ(x₋).
///
/// The proposal is a Student-t with three degrees of freedom and scale √a.
/// Its x⁻⁴ tails dominate those of ρ(x₋). A Gaussian proposal would not
/// bound ρ in the wings.
#[derive(Debug, Clone, Copy)]
pub struct SincRejection {
    a: f64,
    scale: f64,
    bound: f64,
    proposal: StudentT<f64>,
}

impl SincRejection {
    /// Envelope = proposal scaled to 1.5× the density peak.
    pub const SAFETY: f64 = 1.5;

    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!("a must be positive, got {a}")));
        }
        let scale = a.sqrt();
        let mut s = Self {
            a,
            scale,
            bound: 1.0,
            proposal: StudentT::new(3.0).expect("3 dof is valid"),
        };
        s.bound = Self::SAFETY * x_minus_density(0.0, a) / s.proposal_pdf(0.0);
        Ok(s)
    }

    fn proposal_pdf(&self, x: f64) -> f64 {
        let t = x / self.scale;
        2.0 / (PI * 3f64.sqrt() * self.scale) / (1.0 + t * t / 3.0).powi(2)
    }

    /// Expected acceptance probability, 1/M.
    pub fn acceptance(&self) -> f64 {
        1.0 / self.bound
    }

    /// ρ(x)/(M·f(x)); must never exceed 1.
    pub fn envelope_ratio(&self, x: f64) -> f64 {
        x_minus_density(x, self.a) / (self.bound * self.proposal_pdf(x))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        loop {
            let x = self.scale * self.proposal.sample(rng);
            let ratio = self.envelope_ratio(x);
            if ratio > 1.0 {
                return Err(Error::EnvelopeViolation { x, ratio });
            }
            if rng.random::<f64>() < ratio {
                return Ok(x);
            }
        }
    }
}

enum MinusSampler {
    Gaussian(Normal<f64>),
    Sinc(SincRejection),
}

struct PairSampler {
    plus: Normal<f64>,
    minus: MinusSampler,
}

impl PairSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, f64)> {
        let xp = self.plus.sample(rng);
        let xm = match &self.minus {
            MinusSampler::Gaussian(n) => n.sample(rng),
            MinusSampler::Sinc(s) => s.sample(rng)?,
        };
        Ok((FRAC_1_SQRT_2 * (xp + xm), FRAC_1_SQRT_2 * (xp - xm)))
    }
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws `n` pairs (x₁, x₂). Chunk k of 2¹⁶ samples uses stream k of `seed`.
pub fn sample_pairs(model: &JointModel, n: usize, seed: u64, exec: Execution) -> Result<Vec<(f64, f64)>> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one pair".into()));
    }
    let sampler = model.sampler()?;
    let chunks = n.div_ceil(SAMPLE_CHUNK);
    let parts = exec.map_range(chunks, |k| {
        let len = SAMPLE_CHUNK.min(n - k * SAMPLE_CHUNK);
        let mut rng = stream(seed, k as u64);
        (0..len).map(|_| sampler.sample(&mut rng)).collect::<Result<Vec<_>>>()
    });
    let mut out = Vec::with_capacity(n);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// How many pairs the source emits during a scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairBudget {
    /// The same number of emitted pairs at every scan position.
    PerStep(u64),
    /// Split as evenly as possible over the positions; earlier positions take the remainder.
    Total(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitScanConfig {
    pub slit_width: f64,
    pub fixed_slit_position: f64,
    pub scan_min: f64,
    pub scan_max: f64,
    pub scan_steps: usize,
    pub budget: PairBudget,
    pub rng_seed: u64,
    pub model: ModelKind,
}

impl Default for SlitScanConfig {
    /// 40 µm slits, ±110 µm scan in 5 µm steps, 10⁶ pairs per position.
    fn default() -> Self {
        Self {
            slit_width: 40e-6,
            fixed_slit_position: 0.0,
            scan_min: -110e-6,
            scan_max: 110e-6,
            scan_steps: 45,
            budget: PairBudget::PerStep(1_000_000),
            rng_seed: 0,
            model: ModelKind::DoubleGaussian,
        }
    }
}

impl SlitScanConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.slit_width > 0.0) {
            return bad(format!("slit_width must be positive, got {}", self.slit_width));
        }
        if !(self.scan_max > self.scan_min) || !self.scan_min.is_finite() || !self.scan_max.is_finite() {
            return bad(format!("need scan_min < scan_max, got {} and {}", self.scan_min, self.scan_max));
        }
        if !self.fixed_slit_position.is_finite() {
            return bad("fixed_slit_position must be finite".into());
        }
        if self.scan_steps < 3 {
            return bad(format!("scan_steps must be at least 3, got {}", self.scan_steps));
        }
        match self.budget {
            PairBudget::PerStep(0) | PairBudget::Total(0) => bad("pair budget must be positive".into()),
            PairBudget::Total(t) if t < self.scan_steps as u64 => {
                bad(format!("total_pairs {t} is smaller than scan_steps {}", self.scan_steps))
            }
            _ => Ok(()),
        }
    }

    pub fn step(&self) -> f64 {
        (self.scan_max - self.scan_min) / (self.scan_steps - 1) as f64
    }

    pub fn positions(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.scan_steps)
            .map(|i| if i + 1 == self.scan_steps { self.scan_max } else { self.scan_min + i as f64 * h })
            .collect()
    }

    pub fn pairs_at(&self, step: usize) -> u64 {
        match self.budget {
            PairBudget::PerStep(p) => p,
            PairBudget::Total(t) => {
                let n = self.scan_steps as u64;
                t / n + u64::from((step as u64) < t % n)
            }
        }
    }

    pub fn total_pairs(&self) -> u64 {
        (0..self.scan_steps).map(|i| self.pairs_at(i)).sum()
    }

    /// `key = value` lines, in a fixed order, for echoing into output headers.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        let mut v = vec![
            ("slit_width", format!("{:e}", self.slit_width)),
            ("fixed_slit_position", format!("{:e}", self.fixed_slit_position)),
            ("scan_min", format!("{:e}", self.scan_min)),
            ("scan_max", format!("{:e}", self.scan_max)),
            ("scan_steps", self.scan_steps.to_string()),
        ];
        v.push(match self.budget {
            PairBudget::PerStep(p) => ("pairs_per_step", p.to_string()),
            PairBudget::Total(t) => ("total_pairs", t.to_string()),
        });
        v.push(("rng_seed", self.rng_seed.to_string()));
        v.push(("model", self.model.to_string()));
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceHistogram {
    pub bin_centers: Vec<f64>,
    pub counts: Vec<u64>,
    /// Pairs emitted over the whole scan.
    pub total_pairs: u64,
    pub config_echo: SlitScanConfig,
}

impl CoincidenceHistogram {
    pub fn total_counts(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn nonempty_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Count-weighted mean and variance of the scan positions.
    pub fn raw_moments(&self) -> (f64, f64) {
        weighted_moments(&self.bin_centers, &self.counts)
    }

    /// '#'-prefixed config echo, then `scan_position_m,counts` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.config_echo.echo() {
            s.push_str(&format!("# {k} = {v}\n"));
        }
        s.push_str("scan_position_m,counts\n");
        for (x, c) in self.bin_centers.iter().zip(&self.counts) {
            s.push_str(&format!("{x:e},{c}\n"));
        }
        s
    }
}

fn weighted_moments(x: &[f64], w: &[u64]) -> (f64, f64) {
    let total: f64 = w.iter().map(|&c| c as f64).sum();
    let mean = x.iter().zip(w).map(|(x, &c)| x * c as f64).sum::<f64>() / total;
    let var = x.iter().zip(w).map(|(x, &c)| (x - mean).powi(2) * c as f64).sum::<f64>() / total;
    (mean, var)
}

/// Counts coincidences at each scan position. Position i draws its pairs from stream i.
pub fn simulate_slit_scan(cfg: &SlitScanConfig, model: &JointModel, exec: Execution) -> Result<CoincidenceHistogram> {
    cfg.validate()?;
    if cfg.model != model.kind() {
        return Err(Error::InvalidParameter(format!(
            "scan configured for {} but given a {} model",
            cfg.model,
            model.kind()
        )));
    }
    let sampler = model.sampler()?;
    let half = 0.5 * cfg.slit_width;
    let positions = cfg.positions();
    let counts = exec.map_range(positions.len(), |i| -> Result<u64> {
        let mut rng = stream(cfg.rng_seed, i as u64);
        let mut hits = 0;
        for _ in 0..cfg.pairs_at(i) {
            let (x1, x2) = sampler.sample(&mut rng)?;
            if (x1 - cfg.fixed_slit_position).abs() <= half && (x2 - positions[i]).abs() <= half {
                hits += 1;
            }
        }
        Ok(hits)
    });
    Ok(CoincidenceHistogram {
        bin_centers: positions,
        counts: counts.into_iter().collect::<Result<_>>()?,
        total_pairs: cfg.total_pairs(),
        config_echo: *cfg,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthEstimate {
    /// Deconvolved σ_(x₁|x₂), m.
    pub width: f64,
    /// Standard deviation of the bootstrap replicates, m.
    pub std_error: f64,
    /// Central 95% percentile interval of the bootstrap replicates, m.
    pub interval: (f64, f64),
    /// Histogram standard deviation before deconvolution, m.
    pub raw_std: f64,
    pub mean: f64,
}

impl WidthEstimate {
    pub fn covers(&self, truth: f64) -> bool {
        self.interval.0 <= truth && truth <= self.interval.1
    }
}

/// Deconvolved conditional width with a bootstrap error bar.
///
/// The variance of two slit rectangles, 2w²/12, is subtracted from the
/// histogram variance. The scan step is not subtracted: each bin is a point
/// sample of the smooth convolved profile, not an average over the step.
pub fn estimate_conditional_width(hist: &CoincidenceHistogram) -> Result<WidthEstimate> {
    let total = hist.total_counts();
    if total < 100 || hist.nonempty_bins() < 5 {
        return Err(Error::InsufficientData(format!(
            "{total} counts in {} nonempty bins; need ≥ 100 counts and ≥ 5 bins",
            hist.nonempty_bins()
        )));
    }
    let slit_var = 2.0 * hist.config_echo.slit_width.powi(2) / 12.0;
    let (mean, raw_var) = hist.raw_moments();
    let var = raw_var - slit_var;
    if var <= 0.0 {
        return Err(Error::NegativeVariance(var));
    }

    // Multinomial resampling of the counts as a chain of binomials.
    let mut rng = stream(hist.config_echo.rng_seed, BOOTSTRAP_STREAM);
    let mut replicates = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut resampled = vec![0u64; hist.counts.len()];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let mut left = total;
        let mut mass_left = total;
        for (slot, &c) in resampled.iter_mut().zip(&hist.counts) {
            *slot = if left == 0 || c == 0 {
                0
            } else if c == mass_left {
                left
            } else {
                Binomial::new(left, c as f64 / mass_left as f64)
                    .expect("probability in [0, 1]")
                    .sample(&mut rng)
            };
            left -= *slot;
            mass_left -= c;
        }
        let (_, v) = weighted_moments(&hist.bin_centers, &resampled);
        // A replicate falling below the slit variance counts as zero width.
        replicates.push((v - slit_var).max(0.0).sqrt());
    }
    let m = replicates.iter().sum::<f64>() / replicates.len() as f64;
    let std_error = (replicates.iter().map(|r| (r - m).powi(2)).sum::<f64>() / (replicates.len() - 1) as f64).sqrt();
    replicates.sort_by(f64::total_cmp);
    let pick = |q: f64| replicates[((q * (replicates.len() - 1) as f64).round()) as usize];
    Ok(WidthEstimate {
        width: var.sqrt(),
        std_error,
        interval: (pick(0.025), pick(0.975)),
        raw_std: raw_var.sqrt(),
        mean,
    })
}

/// Sample Pearson correlation of the pairs.
pub fn pearson(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let (m1, m2) = pairs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (m1, m2) = (m1 / n, m2 / n);
    let (mut s11, mut s22, mut s12) = (0.0, 0.0, 0.0);
    for (x, y) in pairs {
        let (dx, dy) = (x - m1, y - m2);
        s11 += dx * dx;
        s22 += dy * dy;
        s12 += dx * dy;
    }
    s12 / (s11 * s22).sqrt()
}

/// Sample standard deviation (divisor n − 1).
pub fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Non-excess kurtosis m₄/m₂²; 3 for a Gaussian.
pub fn kurtosis(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let (m2, m4) = xs.iter().fold((0.0, 0.0), |(a, b), x| {
        let d2 = (x - m) * (x - m);
        (a + d2, b + d2 * d2)
    });
    (m4 / n) / (m2 / n).powi(2)
}

/// Kolmogorov–Smirnov distance sup|F_n − F|.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |d: f64, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// x₋ = (x₁ − x₂)/√2 for each pair.
pub fn x_minus_of(pairs: &[(f64, f64)]) -> Vec<f64> {
    pairs.iter().map(|(a, b)| FRAC_1_SQRT_2 * (a - b)).collect()
}

/// Pearson r the Double-Gaussian model predicts.
pub fn model_pearson(dg: &DoubleGaussian) -> f64 {
    stats(dg, LogBase::E).pearson_r
}
