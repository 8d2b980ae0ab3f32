use crate::error::{Error, Result};

const SAMPLES: usize = 4096;

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, x_tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoCrossing { threshold: 0.0 });
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= x_tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Distance between the two points where `f` crosses `fraction × max f`
/// around its peak inside `bracket`.
///
/// The peak is located on a dense sample and refined by golden-section
/// search; each crossing is then bisected to 1e-10 relative precision.
pub fn full_width_at_fraction(
    f: impl Fn(f64) -> f64,
    fraction: f64,
    bracket: (f64, f64),
) -> Result<f64> {
    let (lo, hi) = bracket;
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!("fraction must lie in (0, 1), got {fraction}")));
    }
    if !(hi > lo) {
        return Err(Error::InvalidParameter(format!("empty bracket [{lo}, {hi}]")));
    }
    let h = (hi - lo) / SAMPLES as f64;
    let xs: Vec<f64> = (0..=SAMPLES).map(|i| lo + i as f64 * h).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let ipk = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);

    let (peak_x, peak) = golden_max(&f, xs[ipk.saturating_sub(1)], xs[(ipk + 1).min(SAMPLES)]);
    let (peak_x, peak) = if peak >= ys[ipk] { (peak_x, peak) } else { (xs[ipk], ys[ipk]) };
    let threshold = fraction * peak;
    let g = |x: f64| f(x) - threshold;
    let x_tol = 1e-10 * (hi - lo).abs().max(f64::MIN_POSITIVE) * 1e-2;

    let right = (ipk + 1..=SAMPLES)
        .find(|&i| ys[i] < threshold)
        .ok_or(Error::NoCrossing { threshold })?;
    let left = (0..ipk)
        .rev()
        .find(|&i| ys[i] < threshold)
        .ok_or(Error::NoCrossing { threshold })?;

    let xr = bisect(g, xs[right - 1].max(peak_x), xs[right], x_tol)?;
    let xl = bisect(g, xs[left], xs[left + 1].min(peak_x), x_tol)?;
    Ok(xr - xl)
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-14 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
