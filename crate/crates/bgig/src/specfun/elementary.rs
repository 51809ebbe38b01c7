//! Error function, real and complex Gamma, incomplete Gamma.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Gamma function of a real argument.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// ln |Gamma(x)| for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Upper incomplete Gamma function Gamma(s, x) = int_x^inf t^{s-1} e^{-t} dt, s > 0, x >= 0.
pub fn upper_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    statrs::function::gamma::checked_gamma_ui(s, x)
        .map_err(|e| Error::Domain(format!("Gamma({s}, {x}): {e}")))
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Gamma(z) for complex z, on some branch (only its exponential is meaningful).
pub fn ln_gamma_complex(z: C64) -> C64 {
    let pi = std::f64::consts::PI;
    if z.re < 0.5 {
        // Reflection, with ln sin(pi z) written to avoid overflow for large |Im z|.
        let w = pi * z;
        let ln_sin = if z.im >= 0.0 {
            -C64::i() * w + C64::new(0.5f64.ln(), pi / 2.0) + (1.0 - (2.0 * C64::i() * w).exp()).ln()
        } else {
            C64::i() * w + C64::new(0.5f64.ln(), -pi / 2.0) + (1.0 - (-2.0 * C64::i() * w).exp()).ln()
        };
        return C64::new(pi.ln(), 0.0) - ln_sin - ln_gamma_complex(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * pi).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// Gamma(z) for complex z away from the poles.
pub fn gamma_complex(z: C64) -> C64 {
    ln_gamma_complex(z).exp()
}
