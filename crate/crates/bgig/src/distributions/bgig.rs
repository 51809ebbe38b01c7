//! Bilateral GIG law: X = X+ - X-.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::fourier::{FourierInverter, InversionConfig};
use super::gig::{gig_cumulants, gig_ln_chf_analytic, gig_raw_moment};
use super::params::{BgigParams, GigParams};
use crate::error::{Error, Result};
use crate::quad;
use crate::specfun::{jaeger, jaeger_large_x, jaeger_small_x, ln_bessel_k_real, JaegerConfig, JaegerTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantSet {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailConstants {
    pub z_plus: f64,
    pub z_minus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeSide {
    Positive,
    Negative,
    Zero,
}

/// ln Phi(z) on the strip Re(a+ - 2iz) > 0, Re(a- + 2iz) > 0.
pub fn bgig_ln_chf_analytic(params: &BgigParams, z: C64) -> Result<C64> {
    Ok(gig_ln_chf_analytic(&params.plus, z)? + gig_ln_chf_analytic(&params.minus, -z)?)
}

/// Analytic continuation of the characteristic function into its strip.
pub fn bgig_chf_analytic(params: &BgigParams, z: C64) -> Result<C64> {
    params.validate()?;
    if z == C64::new(0.0, 0.0) {
        return Ok(C64::new(1.0, 0.0));
    }
    Ok(bgig_ln_chf_analytic(params, z)?.exp())
}

/// Characteristic function E[exp(iuX)].
pub fn bgig_chf(params: &BgigParams, u: f64) -> Result<C64> {
    bgig_chf_analytic(params, C64::new(u, 0.0))
}

/// Cumulants of the unit-time law, kappa_n = kappa_n^+ + (-1)^n kappa_n^-.
pub fn bgig_cumulants(params: &BgigParams) -> Result<CumulantSet> {
    params.validate()?;
    let kp = gig_cumulants(&params.plus)?;
    let km = gig_cumulants(&params.minus)?;
    Ok(CumulantSet { k1: kp[0] - km[0], k2: kp[1] + km[1], k3: kp[2] - km[2], k4: kp[3] + km[3] })
}

/// Raw moment E[X^n] by the binomial expansion over the two sides.
pub fn bgig_moment(params: &BgigParams, n: u32) -> Result<f64> {
    params.validate()?;
    let mut s = 0.0;
    let mut binom = 1.0;
    for k in 0..=n {
        let mp = gig_raw_moment(&params.plus, k as f64)?;
        let mm = gig_raw_moment(&params.minus, (n - k) as f64)?;
        let sign = if (n - k).is_multiple_of(2) { 1.0 } else { -1.0 };
        s += binom * sign * mp * mm;
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    Ok(s)
}

fn side_levy(g: &GigParams, x: f64, jaeger_value: f64) -> f64 {
    (-0.5 * g.a * x).exp() / x * (jaeger_value + g.p.max(0.0))
}

/// Levy density of the BGIG law at x != 0.
pub fn bgig_levy_density(params: &BgigParams, x: f64) -> Result<f64> {
    params.validate()?;
    if x == 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("Levy density needs finite x != 0, got {x}")));
    }
    let g = if x > 0.0 { &params.plus } else { &params.minus };
    let ax = x.abs();
    let j = jaeger(ax / (2.0 * g.b), g.p, &JaegerConfig::default())?;
    Ok(side_levy(g, ax, j))
}

/// Levy density with tabulated Jaeger integrals, for repeated evaluation
/// with |x| in [x_min, x_max].
#[derive(Debug, Clone)]
pub struct LevyDensity {
    params: BgigParams,
    cfg: JaegerConfig,
    plus: Option<JaegerTable>,
    minus: Option<JaegerTable>,
}

impl LevyDensity {
    pub fn new(params: &BgigParams, x_min: f64, x_max: f64) -> Result<Self> {
        params.validate()?;
        if !(x_min > 0.0 && x_min < x_max) {
            return Err(Error::Domain(format!("Levy density range [{x_min}, {x_max}]")));
        }
        let cfg = JaegerConfig::default();
        let table = |g: &GigParams| -> Result<Option<JaegerTable>> {
            let lo = (x_min / (2.0 * g.b)).max(cfg.small_x_cutoff);
            let hi = (x_max / (2.0 * g.b)).min(cfg.large_x_cutoff);
            if lo >= hi {
                return Ok(None);
            }
            Ok(Some(JaegerTable::new(g.p, lo, hi, &cfg)?))
        };
        Ok(LevyDensity { params: *params, cfg, plus: table(&params.plus)?, minus: table(&params.minus)? })
    }

    pub fn params(&self) -> &BgigParams {
        &self.params
    }

    /// Density at x != 0.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x == 0.0 || !x.is_finite() {
            return Err(Error::Domain(format!("Levy density needs finite x != 0, got {x}")));
        }
        let (g, table) = if x > 0.0 { (&self.params.plus, &self.plus) } else { (&self.params.minus, &self.minus) };
        let ax = x.abs();
        let arg = ax / (2.0 * g.b);
        let j = if arg < self.cfg.small_x_cutoff {
            jaeger_small_x(arg, g.p)
        } else if arg > self.cfg.large_x_cutoff && g.p != 0.0 {
            jaeger_large_x(arg, g.p)
        } else {
            match table {
                Some(t) => t.eval(arg)?,
                None => jaeger(arg, g.p, &self.cfg)?,
            }
        };
        Ok(side_levy(g, ax, j))
    }

    /// int_{lo}^{hi} w(x) pi(dx) over a positive interval of one side, with
    /// quadrature in log x. `side` is +1 or -1.
    pub fn integrate_side<W: Fn(f64) -> f64>(&self, side: f64, lo: f64, hi: f64, weight: W) -> Result<f64> {
        let n = (((hi / lo).ln() / 0.25).ceil() as usize).max(1);
        let (ts, ws) = quad::panel_nodes(lo.ln(), hi.ln(), n);
        let mut s = 0.0;
        for (t, w) in ts.iter().zip(&ws) {
            let x = t.exp();
            s += w * x * weight(x) * self.eval(side * x)?;
        }
        Ok(s)
    }
}

/// Tail constants Z+, Z- in f(x) ~ Z+ x^{p+ - 1} exp(-a+ x / 2) as x -> +inf
/// and f(x) ~ Z- |x|^{p- - 1} exp(-a- |x| / 2) as x -> -inf.
pub fn tail_constants(params: &BgigParams) -> Result<TailConstants> {
    params.validate()?;
    let z = |g: &GigParams, o: &GigParams| -> Result<f64> {
        let ln_c = 0.5 * g.p * (g.a / g.b).ln() - std::f64::consts::LN_2 - ln_bessel_k_real(g.p, g.omega())?;
        let ln_mgf = 0.5 * o.p * (o.a / (g.a + o.a)).ln() + ln_bessel_k_real(o.p, ((g.a + o.a) * o.b).sqrt())?
            - ln_bessel_k_real(o.p, o.omega())?;
        Ok((ln_c + ln_mgf).exp())
    };
    Ok(TailConstants { z_plus: z(&params.plus, &params.minus)?, z_minus: z(&params.minus, &params.plus)? })
}

/// Side of the mode from the sign of f'(0), which is proportional to
/// (p+ - 1) I(s-2) - (a+/2) I(s-1) + (b+/2) I(s-3) with
/// I(t) = 2 (B/A)^{t/2} K_t(sqrt(AB)), A = a+ + a-, B = b+ + b-, s = p+ + p-.
/// `rel_tol` is the relative size of the bracket below which Zero is returned.
pub fn mode_side(params: &BgigParams, rel_tol: f64) -> Result<ModeSide> {
    params.validate()?;
    let (pl, mi) = (&params.plus, &params.minus);
    let a = pl.a + mi.a;
    let b = pl.b + mi.b;
    let s = pl.p + mi.p;
    let w = (a * b).sqrt();
    let ln_i = |t: f64| -> Result<f64> { Ok(0.5 * t * (b / a).ln() + ln_bessel_k_real(t, w)?) };
    let l2 = ln_i(s - 2.0)?;
    let l1 = ln_i(s - 1.0)?;
    let l3 = ln_i(s - 3.0)?;
    let m = l1.max(l2).max(l3);
    let t2 = (pl.p - 1.0) * (l2 - m).exp();
    let t1 = -0.5 * pl.a * (l1 - m).exp();
    let t3 = 0.5 * pl.b * (l3 - m).exp();
    let g = t1 + t2 + t3;
    let scale = t1.abs() + t2.abs() + t3.abs();
    if g.abs() <= rel_tol * scale {
        Ok(ModeSide::Zero)
    } else if g > 0.0 {
        Ok(ModeSide::Positive)
    } else {
        Ok(ModeSide::Negative)
    }
}

/// Density of a BGIG law by Fourier inversion, set up once for many evaluations.
#[derive(Debug, Clone)]
pub struct BgigDensity {
    params: BgigParams,
    cumulants: CumulantSet,
    inv: FourierInverter,
}

impl BgigDensity {
    /// Resolved on mean +/- 40 standard deviations.
    pub fn new(params: &BgigParams) -> Result<Self> {
        let c = bgig_cumulants(params)?;
        Self::with_half_width(params, 40.0 * c.k2.sqrt())
    }

    pub fn with_half_width(params: &BgigParams, half_width: f64) -> Result<Self> {
        let c = bgig_cumulants(params)?;
        let p = *params;
        let inv = FourierInverter::new(
            move |u| bgig_ln_chf_analytic(&p, C64::new(u, 0.0)),
            c.k1,
            c.k2.sqrt(),
            params.chf_decay_rate(),
            &InversionConfig::new(half_width),
        )?;
        Ok(BgigDensity { params: *params, cumulants: c, inv })
    }

    pub fn params(&self) -> &BgigParams {
        &self.params
    }

    pub fn cumulants(&self) -> &CumulantSet {
        &self.cumulants
    }

    pub fn inverter(&self) -> &FourierInverter {
        &self.inv
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.inv.pdf(x)
    }

    pub fn pdf_derivative(&self, x: f64) -> f64 {
        self.inv.pdf_derivative(x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.inv.cdf(x)
    }
}

/// Density of the BGIG law at x (one-off evaluation).
pub fn bgig_pdf(params: &BgigParams, x: f64) -> Result<f64> {
    let c = bgig_cumulants(params)?;
    let hw = (40.0 * c.k2.sqrt()).max(1.25 * (x - c.k1).abs());
    Ok(BgigDensity::with_half_width(params, hw)?.pdf(x))
}

/// Location of the maximum of the density.
pub fn mode(params: &BgigParams) -> Result<f64> {
    let d = BgigDensity::new(params)?;
    mode_of(&d)
}

/// Mode for an already constructed density.
pub fn mode_of(d: &BgigDensity) -> Result<f64> {
    let c = d.cumulants();
    let sd = c.k2.sqrt();
    let (lo, hi) = (c.k1 - 10.0 * sd, c.k1 + 10.0 * sd);
    let (x0, f0) = quad::golden_max(|x| d.pdf(x), lo, hi, 1e-6 * sd);
    if !(f0 > d.pdf(lo) && f0 > d.pdf(hi)) || (x0 - lo) < 1e-3 * sd || (hi - x0) < 1e-3 * sd {
        return Err(Error::Convergence(format!("no interior maximum of the density on [{lo}, {hi}]")));
    }
    // Bisection on the sign of f' around the golden-section estimate.
    let mut delta = 1e-4 * sd;
    let (mut a, mut b);
    loop {
        a = x0 - delta;
        b = x0 + delta;
        if d.pdf_derivative(a) > 0.0 && d.pdf_derivative(b) < 0.0 {
            break;
        }
        delta *= 2.0;
        if delta > sd {
            return Err(Error::Convergence("density derivative does not change sign near the maximum".into()));
        }
    }
    while b - a > 1e-10 {
        let m = 0.5 * (a + b);
        if d.pdf_derivative(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p123() -> BgigParams {
        BgigParams::new(1.0, 2.0, 1.0, 3.0, 4.0, 5.0).unwrap()
    }

    #[test]
    fn chf_basics() {
        let p = p123();
        assert_eq!(bgig_chf(&p, 0.0).unwrap(), C64::new(1.0, 0.0));
        for &u in &[0.3, 1.0, 5.0, 50.0] {
            let a = bgig_chf(&p, u).unwrap();
            let b = bgig_chf(&p, -u).unwrap();
            assert!((a - b.conj()).norm() < 1e-15);
            assert!(a.norm() <= 1.0);
        }
        let sym = BgigParams::new(2.0, 1.5, 0.7, 2.0, 1.5, 0.7).unwrap();
        for &u in &[0.5, 2.0, 9.0] {
            assert!(bgig_chf(&sym, u).unwrap().im.abs() < 1e-15);
        }
    }

    #[test]
    fn chf_factorises() {
        let p = p123();
        let u = 2.0;
        let plus = crate::distributions::gig_chf(&p.plus, u).unwrap();
        let minus = crate::distributions::gig_chf(&p.minus, -u).unwrap();
        let v = bgig_chf(&p, u).unwrap();
        assert!((v - plus * minus).norm() < 1e-15);
    }

    #[test]
    fn analytic_strip() {
        let p = BgigParams::new(4.0, 2.0, 1.0, 3.0, 4.0, 5.0).unwrap();
        let m = bgig_chf_analytic(&p, C64::new(0.0, -1.0)).unwrap();
        assert!(m.im.abs() < 1e-15 && m.re > 0.0);
        assert!(bgig_chf_analytic(&p, C64::new(0.0, -2.5)).is_err());
        assert!(bgig_chf_analytic(&p, C64::new(0.0, 1.6)).is_err());
    }

    #[test]
    fn levy_density_closed_form_and_reflection() {
        let p = BgigParams::new(1.3, 0.7, -0.5, 3.0, 4.0, 5.0).unwrap();
        for &x in &[1e-3, 0.1, 1.0, 4.0] {
            let v = bgig_levy_density(&p, x).unwrap();
            let e = (0.7 / (2.0 * std::f64::consts::PI * x.powi(3))).sqrt() * (-0.65 * x).exp();
            assert!((v / e - 1.0).abs() < 1e-9, "x={x}");
            let r = bgig_levy_density(&p.swap(), -x).unwrap();
            assert_eq!(v, r);
        }
        assert!(bgig_levy_density(&p, 0.0).is_err());
    }

    #[test]
    fn tabulated_levy_density_matches() {
        let p = p123();
        let l = LevyDensity::new(&p, 1e-9, 50.0).unwrap();
        for &x in &[1e-9, 1e-5, 0.01, 0.7, 3.0, 49.0, -1e-7, -0.2, -12.0] {
            let a = l.eval(x).unwrap();
            let b = bgig_levy_density(&p, x).unwrap();
            assert!((a / b - 1.0).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn symmetric_cumulants_and_moments() {
        let sym = BgigParams::new(2.0, 1.5, 0.7, 2.0, 1.5, 0.7).unwrap();
        let c = bgig_cumulants(&sym).unwrap();
        assert!(c.k1.abs() < 1e-15 && c.k3.abs() < 1e-14);
        let p = p123();
        assert_eq!(bgig_moment(&p, 0).unwrap(), 1.0);
        let c = bgig_cumulants(&p).unwrap();
        assert!((bgig_moment(&p, 1).unwrap() - c.k1).abs() < 1e-13);
        let m2 = bgig_moment(&p, 2).unwrap();
        assert!((m2 - c.k1 * c.k1 - c.k2).abs() < 1e-12);
    }

    #[test]
    fn tail_constants_swap() {
        let p = p123();
        let t = tail_constants(&p).unwrap();
        let s = tail_constants(&p.swap()).unwrap();
        assert_eq!(t.z_plus, s.z_minus);
        assert_eq!(t.z_minus, s.z_plus);
        assert!(t.z_plus > 0.0 && t.z_minus > 0.0);
    }

    #[test]
    fn mode_side_symmetry() {
        let sym = BgigParams::new(2.0, 1.5, 0.7, 2.0, 1.5, 0.7).unwrap();
        assert_eq!(mode_side(&sym, 1e-12).unwrap(), ModeSide::Zero);
        let p = p123();
        let s = mode_side(&p, 1e-12).unwrap();
        let t = mode_side(&p.swap(), 1e-12).unwrap();
        assert_eq!(s, ModeSide::Negative);
        assert_eq!(t, ModeSide::Positive);
    }

    #[test]
    fn density_mass_and_mode() {
        let p = p123();
        let d = BgigDensity::new(&p).unwrap();
        let c = d.cumulants();
        let sd = c.k2.sqrt();
        let mass = quad::integrate_panels(|x| d.pdf(x), c.k1 - 20.0 * sd, c.k1 + 20.0 * sd, 120);
        assert!((mass - 1.0).abs() < 1e-7, "mass {mass}");
        let m = mode_of(&d).unwrap();
        assert!((m - (-1.2428248)).abs() < 1e-6, "mode {m}");
        assert!(d.pdf(m) >= d.pdf(m + 0.01) && d.pdf(m) >= d.pdf(m - 0.01));
    }
}
