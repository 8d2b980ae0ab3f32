//! Adaptive Gauss–Kronrod (10/21-point) quadrature.
//!
//! Infinite limits are handled by mapping onto a finite interval:
//! `[lo, ∞)` uses x = lo + t/(1 − t), `(−∞, hi]` uses x = hi − t/(1 − t), and
//! `(−∞, ∞)` uses x = t/(1 − t²). Kronrod nodes never touch the mapped
//! endpoints, so the integrand is never evaluated at infinity.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::exec::{neumaier_sum, Execution};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl QuadratureOptions {
    pub fn relative(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol: 0.0,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Integral of `f` over `[lo, hi]` (either limit may be infinite) to relative
/// tolerance `rel_tol`.
pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, rel_tol: f64) -> Result<f64> {
    integrate_with(f, lo, hi, &QuadratureOptions::relative(rel_tol)).map(|e| e.value)
}

pub fn integrate_with(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    opts: &QuadratureOptions,
) -> Result<Estimate> {
    if !(opts.rel_tol > 0.0 || opts.abs_tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    if lo.is_nan() || hi.is_nan() {
        return Err(Error::InvalidParameter("NaN integration limit".into()));
    }
    if lo == hi {
        return Ok(Estimate { value: 0.0, error: 0.0, intervals: 0 });
    }
    if lo > hi {
        return integrate_with(f, hi, lo, opts).map(|e| Estimate { value: -e.value, ..e });
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => adaptive(&f, lo, hi, opts),
        (true, false) => adaptive(
            &|t: f64| {
                let s = 1.0 - t;
                f(lo + t / s) / (s * s)
            },
            0.0,
            1.0,
            opts,
        ),
        (false, true) => adaptive(
            &|t: f64| {
                let s = 1.0 - t;
                f(hi - t / s) / (s * s)
            },
            0.0,
            1.0,
            opts,
        ),
        (false, false) => adaptive(
            &|t: f64| {
                let s = 1.0 - t * t;
                f(t / s) * (1.0 + t * t) / (s * s)
            },
            -1.0,
            1.0,
            opts,
        ),
    }
}

/// Sum of integrals over consecutive panels `[b_i, b_{i+1}]`.
///
/// Used for oscillatory integrands where the panel edges can be placed at the
/// zeros or half-periods, so each panel holds a single smooth lobe.
pub fn integrate_panels(
    f: impl Fn(f64) -> f64 + Sync + Send,
    breaks: &[f64],
    rel_tol: f64,
    exec: Execution,
) -> Result<f64> {
    if breaks.len() < 2 {
        return Ok(0.0);
    }
    let opts = QuadratureOptions::relative(rel_tol);
    let parts = exec.map_range(breaks.len() - 1, |i| {
        integrate_with(&f, breaks[i], breaks[i + 1], &opts).map(|e| e.value)
    });
    let values: Result<Vec<f64>> = parts.into_iter().collect();
    Ok(neumaier_sum(values?))
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn adaptive(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, opts: &QuadratureOptions) -> Result<Estimate> {
    let first = gauss_kronrod(f, lo, hi)?;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut value = first.value;
    let mut error = first.error;
    let mut abs_value = first.abs_value;
    loop {
        let tolerance = opts.abs_tol.max(opts.rel_tol * value.abs());
        // Per-panel errors are floored at 50ε·∫|f|; below twice that nothing more is resolvable.
        if error <= tolerance || error <= 100.0 * f64::EPSILON * abs_value {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::NonConvergence {
                intervals: heap.len(),
                error,
                tolerance,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Interval cannot be split further in floating point.
            return Err(Error::NonConvergence {
                intervals: heap.len() + 1,
                error,
                tolerance,
            });
        }
        let left = gauss_kronrod(f, worst.lo, mid)?;
        let right = gauss_kronrod(f, mid, worst.hi)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        abs_value += left.abs_value + right.abs_value - worst.abs_value;
        heap.push(left);
        heap.push(right);
    }
    let segments = heap.into_vec();
    Ok(Estimate {
        value: neumaier_sum(segments.iter().map(|s| s.value)),
        error: segments.iter().map(|s| s.error).sum(),
        intervals: segments.len(),
    })
}

// One 21-point Kronrod panel with the QUADPACK error heuristic.
fn gauss_kronrod(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Segment> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = eval(f, center)?;
    let mut res_g = 0.0;
    let mut res_k = fc * WGK[10];
    let mut res_abs = (fc * WGK[10]).abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(f, center - dx)?;
        let f2 = eval(f, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment {
        lo,
        hi,
        value,
        error,
        abs_value: res_abs,
    })
}

fn eval(f: &dyn Fn(f64) -> f64, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::Domain(format!("integrand is not finite at x = {x:e}")))
    }
}
