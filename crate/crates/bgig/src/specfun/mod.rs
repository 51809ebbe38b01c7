//! Special functions: Bessel K, J, Y, the Hankel modulus, the Jaeger integral,
//! erfc and Gamma functions.

mod bessel_jy;
mod bessel_k;
mod elementary;
mod jaeger;

pub use bessel_jy::{bessel_jy, hankel_abs_sq};
pub use bessel_k::{
    bessel_k, bessel_k_complex_order, bessel_k_ratio, bessel_k_real, ln_bessel_k, ln_bessel_k_real,
};
pub use elementary::{erfc, gamma, gamma_complex, ln_gamma, ln_gamma_complex, upper_incomplete_gamma};
pub use jaeger::{jaeger, jaeger_large_x, jaeger_small_x, JaegerConfig, JaegerTable};

pub use num_complex::Complex64;
