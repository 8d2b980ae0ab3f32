//! Special functions and generic numerical machinery shared by the physics
//! modules and by the validation oracles.

pub mod fft;
pub mod grid;
pub mod quadrature;
pub mod roots;
pub mod special;

pub use fft::{dft_1d, fourier_transform, CenteredFft, Direction};
pub use grid::{Axis, Grid1D};
pub use quadrature::{integrate, integrate_panels, integrate_with, QuadratureOptions};
pub use roots::{bisect, full_width_at_fraction};
pub use special::{fresnel, fresnel_auxiliary, fresnel_c, fresnel_correction, fresnel_s, sinc};
