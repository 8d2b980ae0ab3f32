//! Special functions: `sinc` and the Fresnel integrals.
//!
//! Fresnel convention: C(x) = ∫₀ˣ cos(πt²/2) dt and S(x) = ∫₀ˣ sin(πt²/2) dt.
//! Both tend to 1/2 as x → +∞. Other conventions (argument t² without the
//! π/2) rescale the argument by √(2/π) and silently change any density built
//! on them, so every caller in this crate uses this one.
//!
//! For |x| ≤ 1.5 the power series is summed directly. Beyond that we use the
//! continued fraction for the complementary error function along the
//! diagonal, and keep its pieces separate so that callers can obtain the
//! auxiliary function
//!
//! ```text
//! C(x) + i S(x) = (1 + i)/2 − e^{iπx²/2} G(x),    G(x) = i (1 + E(x)) / (πx)
//! ```
//!
//! together with the small correction E(x) without cancellation.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

const SERIES_LIMIT: f64 = 1.5;
const MAX_ITER: usize = 500;
const TINY: f64 = 1.0e-300;

/// sin(x)/x with the removable singularity at 0 filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1.0e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Both Fresnel integrals, returned as `(C(x), S(x))`.
pub fn fresnel(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (c, s) = if ax <= SERIES_LIMIT {
        fresnel_series(ax)
    } else {
        let g = continued_fraction(ax).g;
        let z = Complex64::new(0.5, 0.5) - phase(ax) * g;
        (z.re, z.im)
    };
    if x < 0.0 {
        (-c, -s)
    } else {
        (c, s)
    }
}

pub fn fresnel_c(x: f64) -> f64 {
    fresnel(x).0
}

pub fn fresnel_s(x: f64) -> f64 {
    fresnel(x).1
}

/// Auxiliary function G(x) for x ≥ 0, defined by
/// C(x) + iS(x) = (1+i)/2 − e^{iπx²/2} G(x).
///
/// Gives 1/2 − C and 1/2 − S without cancellation for large x.
pub fn fresnel_auxiliary(x: f64) -> Complex64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        let (c, s) = fresnel_series(ax);
        (Complex64::new(0.5 - c, 0.5 - s)) * phase(ax).conj()
    } else {
        continued_fraction(ax).g
    }
}

/// Relative correction E(x) in G(x) = i (1 + E(x)) / (πx), for x > 0.
///
/// E(x) = O(1/(πx²)) for large x and is computed directly from the tail of
/// the continued fraction, never as a difference of nearly equal numbers.
pub fn fresnel_correction(x: f64) -> Complex64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        let g = fresnel_auxiliary(ax);
        -Complex64::i() * PI * ax * g - 1.0
    } else {
        continued_fraction(ax).correction
    }
}

fn phase(x: f64) -> Complex64 {
    let theta = FRAC_PI_2 * x * x;
    Complex64::new(theta.cos(), theta.sin())
}

fn fresnel_series(x: f64) -> (f64, f64) {
    let t = FRAC_PI_2 * x * x;
    let mut term = x;
    let mut c = x;
    let mut s = 0.0;
    for k in 1..MAX_ITER {
        term *= t / k as f64;
        let contrib = term / (2 * k + 1) as f64;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            c += sign * contrib;
        } else {
            s += sign * contrib;
        }
        if contrib < f64::EPSILON * 0.25 * c.abs().max(s.abs()).max(TINY) {
            break;
        }
    }
    (c, s)
}

struct ContinuedFraction {
    g: Complex64,
    correction: Complex64,
}

// erfc-type continued fraction in the form
//   h = 1/(b0 + a1/(b1 + a2/(b2 + ...))),  b_n = 1 + 4n − iπx²,  a_n = −(2n−1)(2n)
// with G = x·h. The tail T = a1/(b1 + ...) is evaluated on its own so that
// E = −(1 + T)·h carries full relative precision.
fn continued_fraction(x: f64) -> ContinuedFraction {
    let pix2 = PI * x * x;
    let b = |n: usize| Complex64::new(1.0 + 4.0 * n as f64, -pix2);
    let a = |n: usize| -(((2 * n - 1) * (2 * n)) as f64);
    let tiny = Complex64::new(TINY, 0.0);

    // Modified Lentz for U = b1 + a2/(b2 + a3/(b3 + ...)).
    let mut f = b(1);
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for n in 2..MAX_ITER {
        d = b(n) + a(n) * d;
        if d.norm() == 0.0 {
            d = tiny;
        }
        d = d.inv();
        c = b(n) + a(n) / c;
        if c.norm() == 0.0 {
            c = tiny;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < f64::EPSILON {
            break;
        }
    }
    let tail = a(1) / f;
    let h = (b(0) + tail).inv();
    ContinuedFraction {
        g: h * x,
        correction: -(tail + 1.0) * h,
    }
}
