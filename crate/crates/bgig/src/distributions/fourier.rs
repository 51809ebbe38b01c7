//! Density, derivative and distribution function of a law given by its
//! characteristic function, by inversion on Gauss-Legendre panels.
//!
//! f(x)  = (1/pi) int_0^U Re[exp(-iu(x-c)) psi(u)] du,  psi(u) = exp(-iuc) Phi(u)
//! F(x)  = 1/2 - (1/pi) int_0^U Im[exp(-iu(x-c)) psi(u)] / u du
//!
//! The centre c is the mean, which removes the linear phase drift of Phi.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionConfig {
    /// Absolute error target for the density.
    pub tol: f64,
    /// Half width of the x-window, measured from the centre, that must be resolved.
    pub half_width: f64,
    /// Budget on the number of quadrature nodes.
    pub max_nodes: usize,
    /// When the budget is too small for the chf decay, damp the integrand with a
    /// Gaussian instead of failing. The result is then the law convolved with a
    /// normal kernel of standard deviation `smoothing_width()`.
    pub allow_smoothing: bool,
}

impl InversionConfig {
    pub fn new(half_width: f64) -> Self {
        InversionConfig { tol: 1e-11, half_width, max_nodes: 4_000_000, allow_smoothing: false }
    }
}

#[derive(Debug)]
pub struct FourierInverter {
    center: f64,
    half_width: f64,
    u: Vec<f64>,
    /// w_j psi(u_j) / pi
    psi: Vec<C64>,
    smoothing: f64,
    clamped: AtomicUsize,
}

impl Clone for FourierInverter {
    fn clone(&self) -> Self {
        FourierInverter {
            center: self.center,
            half_width: self.half_width,
            u: self.u.clone(),
            psi: self.psi.clone(),
            smoothing: self.smoothing,
            clamped: AtomicUsize::new(self.clamped.load(Ordering::Relaxed)),
        }
    }
}

impl FourierInverter {
    /// `ln_chf` is ln Phi(u) for u >= 0; `scale` is the standard deviation of the
    /// law; `decay` is the rate c in |Phi(u)| ~ exp(-c sqrt(u)).
    pub fn new<F>(ln_chf: F, center: f64, scale: f64, decay: f64, cfg: &InversionConfig) -> Result<Self>
    where
        F: Fn(f64) -> Result<C64> + Sync,
    {
        if !(scale > 0.0 && scale.is_finite() && decay > 0.0 && cfg.half_width > 0.0 && cfg.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "inversion setup: scale {scale}, decay {decay}, half width {}, tol {}",
                cfg.half_width, cfg.tol
            )));
        }
        // Truncation: bound the neglected tail of int |Phi| (1 + u) du.
        let target = 0.1 * std::f64::consts::PI * cfg.tol;
        let tail = |u: f64, m: f64| m * (2.0 * u.sqrt() / decay + 2.0 / (decay * decay)) * (1.0 + u);
        let mut u = 1.0 / scale;
        let mut hits = 0;
        let mut steps = 0;
        while hits < 3 {
            let m = ln_chf(u)?.re.exp();
            if tail(u, m) < target {
                hits += 1;
            } else {
                hits = 0;
            }
            u *= 1.1;
            steps += 1;
            if steps > 2000 {
                return Err(Error::Convergence("characteristic function does not decay".into()));
            }
        }
        let mut u_max = u;
        let h = (8.0 / cfg.half_width).min(0.5 / scale);
        let mut smoothing = 0.0;
        let mut panels = (u_max / h).ceil() as usize;
        if 16 * panels > cfg.max_nodes {
            if !cfg.allow_smoothing {
                return Err(Error::Convergence(format!(
                    "inversion needs {} nodes, budget {}",
                    16 * panels,
                    cfg.max_nodes
                )));
            }
            panels = cfg.max_nodes / 16;
            u_max = panels as f64 * h;
            // Damping exp(-(u/ud)^2 / 2) is below tol at u_max.
            let ud = u_max / (2.0 * (1.0 / cfg.tol).ln()).sqrt();
            smoothing = 1.0 / ud;
        }
        let (nodes, weights) = quad::panel_nodes(0.0, u_max, panels);
        let damp = smoothing;
        let psi: Result<Vec<C64>> = nodes
            .par_iter()
            .zip(weights.par_iter())
            .map(|(&u, &w)| {
                let l = ln_chf(u)? - C64::new(0.0, u * center);
                let d = if damp > 0.0 { -0.5 * (u * damp).powi(2) } else { 0.0 };
                Ok((l + d).exp() * (w / std::f64::consts::PI))
            })
            .collect();
        Ok(FourierInverter {
            center,
            half_width: cfg.half_width,
            u: nodes,
            psi: psi?,
            smoothing,
            clamped: AtomicUsize::new(0),
        })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// The x-interval on which the inversion is resolved.
    pub fn window(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    /// Standard deviation of the Gaussian smoothing kernel, 0 when exact.
    pub fn smoothing_width(&self) -> f64 {
        self.smoothing
    }

    pub fn node_count(&self) -> usize {
        self.u.len()
    }

    /// Number of negative density values clamped to zero so far.
    pub fn clamped_count(&self) -> usize {
        self.clamped.load(Ordering::Relaxed)
    }

    /// Density without clamping.
    pub fn pdf_raw(&self, x: f64) -> f64 {
        let d = x - self.center;
        let mut s = 0.0;
        for (u, p) in self.u.iter().zip(&self.psi) {
            let (sn, cs) = (u * d).sin_cos();
            // Re[(cos - i sin)(p.re + i p.im)]
            s += cs * p.re + sn * p.im;
        }
        s
    }

    /// Density, with negative ringing clamped to zero and counted.
    pub fn pdf(&self, x: f64) -> f64 {
        let v = self.pdf_raw(x);
        if v < 0.0 {
            self.clamped.fetch_add(1, Ordering::Relaxed);
            0.0
        } else {
            v
        }
    }

    /// Derivative of the density.
    pub fn pdf_derivative(&self, x: f64) -> f64 {
        let d = x - self.center;
        let mut s = 0.0;
        for (u, p) in self.u.iter().zip(&self.psi) {
            let (sn, cs) = (u * d).sin_cos();
            // Re[-iu e^{-iud} p] = u Im[e^{-iud} p]
            s += u * (cs * p.im - sn * p.re);
        }
        s
    }

    /// Distribution function by the Gil-Pelaez formula.
    pub fn cdf(&self, x: f64) -> f64 {
        let d = x - self.center;
        let mut s = 0.0;
        for (u, p) in self.u.iter().zip(&self.psi) {
            let (sn, cs) = (u * d).sin_cos();
            s += (cs * p.im - sn * p.re) / u;
        }
        0.5 - s
    }

    /// Raw density and distribution function on the uniform grid x0 + k dx,
    /// k < n, using phasor recurrences instead of per-point trigonometry.
    pub fn grid(&self, x0: f64, dx: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        const BLOCK: usize = 256;
        let blocks: Vec<(Vec<f64>, Vec<f64>)> = (0..n.div_ceil(BLOCK))
            .into_par_iter()
            .map(|b| {
                let k0 = b * BLOCK;
                let m = BLOCK.min(n - k0);
                let mut pdf = vec![0.0; m];
                let mut cdf_im = vec![0.0; m];
                let d0 = x0 + k0 as f64 * dx - self.center;
                for (u, p) in self.u.iter().zip(&self.psi) {
                    let mut z = C64::from_polar(1.0, -u * d0) * p;
                    let step = C64::from_polar(1.0, -u * dx);
                    let inv_u = 1.0 / u;
                    for k in 0..m {
                        pdf[k] += z.re;
                        cdf_im[k] += z.im * inv_u;
                        z *= step;
                    }
                }
                let cdf = cdf_im.into_iter().map(|v| 0.5 - v).collect();
                (pdf, cdf)
            })
            .collect();
        let mut pdf = Vec::with_capacity(n);
        let mut cdf = Vec::with_capacity(n);
        for (p, c) in blocks {
            pdf.extend(p);
            cdf.extend(c);
        }
        (pdf, cdf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal_inverter(mu: f64, s: f64) -> FourierInverter {
        // A normal law decays faster than any exp(-c sqrt(u)); decay = 1 is conservative.
        FourierInverter::new(
            |u| Ok(C64::new(-0.5 * s * s * u * u, mu * u)),
            mu,
            s,
            1.0,
            &InversionConfig::new(40.0 * s),
        )
        .unwrap()
    }

    #[test]
    fn normal_density_and_cdf() {
        let inv = normal_inverter(0.3, 1.7);
        for &x in &[-4.0, -1.0, 0.3, 2.0, 6.0] {
            let z: f64 = (x - 0.3) / 1.7;
            let f = (-0.5 * z * z).exp() / (1.7 * (2.0 * std::f64::consts::PI).sqrt());
            assert!((inv.pdf(x) - f).abs() < 1e-12, "x={x}");
            let cdf = 0.5 * crate::specfun::erfc(-z / 2f64.sqrt());
            assert!((inv.cdf(x) - cdf).abs() < 1e-11, "x={x} {} {cdf}", inv.cdf(x));
            let fd = -z / 1.7 * f;
            assert!((inv.pdf_derivative(x) - fd).abs() < 1e-11);
        }
    }

    #[test]
    fn grid_matches_pointwise() {
        let inv = normal_inverter(0.0, 1.0);
        let (p, c) = inv.grid(-3.0, 0.37, 20);
        for k in 0..20 {
            let x = -3.0 + 0.37 * k as f64;
            assert!((p[k] - inv.pdf_raw(x)).abs() < 1e-13);
            assert!((c[k] - inv.cdf(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn node_budget() {
        let mut cfg = InversionConfig::new(10.0);
        cfg.max_nodes = 64;
        let slow = |u: f64| Ok(C64::new(-0.01 * u.sqrt(), 0.0));
        assert!(FourierInverter::new(slow, 0.0, 1.0, 0.01, &cfg).is_err());
        cfg.allow_smoothing = true;
        let inv = FourierInverter::new(slow, 0.0, 1.0, 0.01, &cfg).unwrap();
        assert!(inv.smoothing_width() > 0.0);
    }
}
