//! The Jaeger integral
//!
//! I(x, p) = (2/pi^2) int_0^inf exp(-x y^2) / (y |H_{|p|}(y)|^2) dy.
//!
//! After y = e^t the weight 1/|H(e^t)|^2 does not depend on x, so it is
//! tabulated once on Gauss-Legendre panels and reused for every x
//! ([`JaegerTable`]). Below y0 the integral is replaced by its small-argument
//! closed form.

use serde::{Deserialize, Serialize};

use super::bessel_jy::hankel_abs_sq;
use super::elementary::ln_gamma;
use crate::error::{Error, Result};
use crate::quad;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JaegerConfig {
    pub rel_tol: f64,
    pub small_x_cutoff: f64,
    pub large_x_cutoff: f64,
    /// Upper bound on the number of quadrature panels.
    pub max_subdivisions: usize,
}

impl Default for JaegerConfig {
    fn default() -> Self {
        JaegerConfig { rel_tol: 1e-10, small_x_cutoff: 1e-8, large_x_cutoff: 1e6, max_subdivisions: 4096 }
    }
}

impl JaegerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidParameter(format!("rel_tol {} not in (0, 1)", self.rel_tol)));
        }
        if !(self.small_x_cutoff > 0.0 && self.small_x_cutoff < self.large_x_cutoff) {
            return Err(Error::InvalidParameter(format!(
                "cutoffs must satisfy 0 < {} < {}",
                self.small_x_cutoff, self.large_x_cutoff
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParameter("max_subdivisions must be positive".into()));
        }
        Ok(())
    }
}

/// Small-x expansion 1/(2 sqrt(pi x)) + (1 - 2|p|)/4.
pub fn jaeger_small_x(x: f64, p: f64) -> f64 {
    0.5 / (std::f64::consts::PI * x).sqrt() + (1.0 - 2.0 * p.abs()) / 4.0
}

/// Large-x leading term x^{-|p|} / (4^{|p|} Gamma(|p|)), |p| > 0.
pub fn jaeger_large_x(x: f64, p: f64) -> f64 {
    let nu = p.abs();
    (-nu * x.ln() - nu * 4f64.ln() - ln_gamma(nu)).exp()
}

/// (2/pi^2) int_0^{y0} dy / (y |H_nu(y)|^2) with J_nu and J_{-nu} replaced by
/// their leading terms, which makes the integrand rational in y^{2 nu}.
fn small_y_tail(nu: f64, y0: f64) -> f64 {
    let pi = std::f64::consts::PI;
    if nu < 1e-8 {
        let l = (2.0 / y0).ln();
        return (0.5 * pi / (l - EULER_GAMMA)).atan() / pi;
    }
    if nu < 0.5 {
        let ln_rho = 2.0 * nu * (0.5 * y0).ln() + ln_gamma(1.0 - nu) - ln_gamma(1.0 + nu);
        let rho = ln_rho.exp();
        let s = (nu * pi).sin();
        let one_minus_rho_c = -ln_rho.exp_m1() + 2.0 * rho * (0.5 * nu * pi).sin().powi(2);
        return (rho * s).atan2(one_minus_rho_c) / pi;
    }
    (2.0 * nu * (0.5 * y0).ln() - nu.ln() - 2.0 * ln_gamma(nu)).exp()
}

/// Tabulated quadrature for I(x, p) on a fixed range of x.
#[derive(Debug, Clone)]
pub struct JaegerTable {
    nu: f64,
    x_min: f64,
    x_max: f64,
    y2: Vec<f64>,
    weight: Vec<f64>,
    tail: f64,
}

impl JaegerTable {
    /// Builds the table accurate for x in [x_min, x_max].
    pub fn new(p: f64, x_min: f64, x_max: f64, cfg: &JaegerConfig) -> Result<Self> {
        cfg.validate()?;
        if !(x_min > 0.0 && x_min <= x_max && x_max.is_finite()) {
            return Err(Error::Domain(format!("Jaeger table range [{x_min}, {x_max}]")));
        }
        if !p.is_finite() {
            return Err(Error::Domain(format!("Jaeger order {p}")));
        }
        let nu = p.abs();
        let tol = cfg.rel_tol;
        let l_tol = (1.0 / tol).ln();
        let l0 = if nu > 0.0 { ((l_tol + 10.0) / (2.0 * nu)).clamp(5.0, 700.0) } else { 700.0 };
        // e^{-x y^2} is 1 to within tol on the analytic tail.
        let t_lo = (-l0).min(0.5 * (tol / x_max).ln());
        let y_hi2 = (l_tol + (-0.5 * x_min.ln()).max(0.0) + 5.0) / x_min;
        let t_hi = 0.5 * y_hi2.ln();
        let t_a = (-6.0f64).min(0.5 * (1e-4 / x_max).ln()).min(t_hi - 1.0).max(t_lo);

        let mut edges = Vec::new();
        let n_uniform = ((t_hi - t_a) / 0.125).ceil().max(1.0) as usize;
        let h = (t_hi - t_a) / n_uniform as f64;
        for k in (0..=n_uniform).rev() {
            edges.push(t_a + k as f64 * h);
        }
        let mut width = 1.0;
        let mut t = t_a;
        while t > t_lo {
            t = (t - width).max(t_lo);
            edges.push(t);
            width *= 2.0;
        }
        edges.reverse();
        if edges.len() - 1 > cfg.max_subdivisions {
            return Err(Error::Convergence(format!(
                "Jaeger quadrature needs {} panels, limit {}",
                edges.len() - 1,
                cfg.max_subdivisions
            )));
        }

        let (gx, gw) = quad::gl16();
        let mut y2 = Vec::with_capacity(16 * edges.len());
        let mut weight = Vec::with_capacity(16 * edges.len());
        for win in edges.windows(2) {
            let (a, b) = (win[0], win[1]);
            let c = 0.5 * (a + b);
            let hw = 0.5 * (b - a);
            for (xi, wi) in gx.iter().zip(gw) {
                let t = c + hw * xi;
                let y = t.exp();
                let hs = hankel_abs_sq(nu, y)?;
                if hs.is_infinite() {
                    continue;
                }
                y2.push(y * y);
                weight.push(hw * wi / hs);
            }
        }
        let tail = small_y_tail(nu, t_lo.exp());
        Ok(JaegerTable { nu, x_min, x_max, y2, weight, tail })
    }

    pub fn order(&self) -> f64 {
        self.nu
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x_min, self.x_max)
    }

    /// I(x, p) for x in the table range.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= self.x_min * (1.0 - 1e-12) && x <= self.x_max * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!(
                "x = {x} outside Jaeger table range [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        let mut s = 0.0;
        for (y2, w) in self.y2.iter().zip(&self.weight) {
            let e = x * y2;
            if e > 745.0 {
                continue;
            }
            s += w * (-e).exp();
        }
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        Ok(2.0 / pi2 * s + self.tail)
    }
}

/// The Jaeger integral I(x, p), depending on p only through |p|.
pub fn jaeger(x: f64, p: f64, cfg: &JaegerConfig) -> Result<f64> {
    cfg.validate()?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("Jaeger integral requires x > 0, got {x}")));
    }
    let nu = p.abs();
    if x < cfg.small_x_cutoff {
        return Ok(jaeger_small_x(x, nu));
    }
    if x > cfg.large_x_cutoff && nu > 0.0 {
        return Ok(jaeger_large_x(x, nu));
    }
    JaegerTable::new(nu, x, x, cfg)?.eval(x)
}
