//! Density of the BGIG law from the double Mellin-Barnes representation
//!
//! f(x) = (1/4pi^2) int int M+(s1) M-(s2) G(s1+s2-1) G(1-s2) / G(s1) x^{1-s1-s2} dtau1 dtau2
//!
//! with s1 = c1 + i tau1, s2 = c2 + i tau2 and M the one-sided Mellin transforms.
//! Used as an independent check of the Fourier inversion.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::gig::gig_mellin;
use super::params::BgigParams;
use crate::error::{Error, Result};
use crate::quad;
use crate::specfun::{gamma_complex, ln_gamma_complex};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MellinConfig {
    pub c1: f64,
    pub c2: f64,
    pub tau_max: f64,
    /// Gauss-Legendre panels (16 nodes each) per unit of tau.
    pub panels_per_unit: usize,
}

impl Default for MellinConfig {
    fn default() -> Self {
        MellinConfig { c1: 1.0, c2: 0.5, tau_max: 30.0, panels_per_unit: 1 }
    }
}

impl MellinConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c1 > 0.0 && self.c2 < 1.0 && self.c1 + self.c2 > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "contour ({}, {}) outside Re s1 > 0, Re s2 < 1, Re(s1 + s2) > 1",
                self.c1, self.c2
            )));
        }
        if !(self.tau_max > 0.0 && self.panels_per_unit >= 1) {
            return Err(Error::InvalidParameter("Mellin truncation must be positive".into()));
        }
        Ok(())
    }
}

/// BGIG density at x != 0 by the Mellin-Barnes double integral.
pub fn bgig_pdf_mellin(params: &BgigParams, x: f64, cfg: &MellinConfig) -> Result<f64> {
    params.validate()?;
    cfg.validate()?;
    if x == 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("Mellin representation needs finite x != 0, got {x}")));
    }
    if x < 0.0 {
        return bgig_pdf_mellin(&params.swap(), -x, cfg);
    }
    let panels = (2.0 * cfg.tau_max * cfg.panels_per_unit as f64).ceil() as usize;
    let (tau, w) = quad::panel_nodes(-cfg.tau_max, cfg.tau_max, panels);
    let lx = x.ln();

    // Row factors: w1 M+(s1) x^{1-s1} / G(s1); column factors: w2 M-(s2) G(1-s2) x^{-s2}.
    let row: Result<Vec<C64>> = tau
        .par_iter()
        .zip(w.par_iter())
        .map(|(&t, &wt)| {
            let s = C64::new(cfg.c1, t);
            let m = gig_mellin(&params.plus, s)?;
            Ok(m * ((1.0 - s) * lx - ln_gamma_complex(s)).exp() * wt)
        })
        .collect();
    let col: Result<Vec<C64>> = tau
        .par_iter()
        .zip(w.par_iter())
        .map(|(&t, &wt)| {
            let s = C64::new(cfg.c2, t);
            let m = gig_mellin(&params.minus, s)?;
            Ok(m * (ln_gamma_complex(1.0 - s) - s * lx).exp() * wt)
        })
        .collect();
    let (row, col) = (row?, col?);

    let n = tau.len();
    let rows: Vec<(f64, f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = C64::new(0.0, 0.0);
            let mut edge = 0.0f64;
            let mut peak = 0.0f64;
            for j in 0..n {
                let g = gamma_complex(C64::new(cfg.c1 + cfg.c2 - 1.0, tau[i] + tau[j]));
                let v = row[i] * col[j] * g;
                s += v;
                let a = v.norm() / (w[i] * w[j]);
                peak = peak.max(a);
                if i == 0 || i == n - 1 || j == 0 || j == n - 1 {
                    edge = edge.max(a);
                }
            }
            (s.re, edge, peak)
        })
        .collect();
    let total: f64 = rows.iter().map(|r| r.0).sum();
    let edge = rows.iter().fold(0.0f64, |m, r| m.max(r.1));
    let peak = rows.iter().fold(0.0f64, |m, r| m.max(r.2));
    if edge > 1e-8 * peak {
        return Err(Error::Convergence(format!(
            "Mellin integrand not negligible at the truncation edge ({edge:e} vs peak {peak:e})"
        )));
    }
    Ok(total / (4.0 * std::f64::consts::PI * std::f64::consts::PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::bgig_pdf;

    #[test]
    fn agrees_with_fourier_inversion() {
        let p = BgigParams::new(1.0, 2.0, 1.0, 3.0, 4.0, 5.0).unwrap();
        let cfg = MellinConfig::default();
        for &x in &[0.5, 1.0, -0.7] {
            let m = bgig_pdf_mellin(&p, x, &cfg).unwrap();
            let f = bgig_pdf(&p, x).unwrap();
            assert!((m / f - 1.0).abs() < 1e-3, "x={x}: {m} vs {f}");
        }
    }

    #[test]
    fn rejects_bad_contour_and_origin() {
        let p = BgigParams::new(1.0, 2.0, 1.0, 3.0, 4.0, 5.0).unwrap();
        let bad = MellinConfig { c2: 1.2, ..Default::default() };
        assert!(bgig_pdf_mellin(&p, 1.0, &bad).is_err());
        assert!(bgig_pdf_mellin(&p, 0.0, &MellinConfig::default()).is_err());
        let short = MellinConfig { tau_max: 2.0, ..Default::default() };
        assert!(bgig_pdf_mellin(&p, 1.0, &short).is_err());
    }
}
