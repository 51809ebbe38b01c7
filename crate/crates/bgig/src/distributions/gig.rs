//! One-sided GIG law.

use num_complex::Complex64 as C64;

use super::params::GigParams;
use crate::error::{Error, Result};
use crate::specfun::{bessel_k_complex_order, ln_bessel_k, ln_bessel_k_real};

/// ln of the normalising constant (a/b)^{p/2} / (2 K_p(sqrt(ab))).
pub fn gig_ln_norm(g: &GigParams) -> Result<f64> {
    Ok(0.5 * g.p * (g.a / g.b).ln() - std::f64::consts::LN_2 - ln_bessel_k_real(g.p, g.omega())?)
}

/// Density of GIG(a, b, p); zero for x <= 0.
pub fn gig_pdf(g: &GigParams, x: f64) -> Result<f64> {
    g.validate()?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    let ln_c = gig_ln_norm(g)?;
    Ok((ln_c + (g.p - 1.0) * x.ln() - 0.5 * (g.a * x + g.b / x)).exp())
}

/// ln E[exp(i z X)] for complex z with Re(a - 2 i z) > 0, on a branch continuous in z.
pub fn gig_ln_chf_analytic(g: &GigParams, z: C64) -> Result<C64> {
    let w = g.a - 2.0 * C64::i() * z;
    if !(w.re > 0.0) {
        return Err(Error::Domain(format!(
            "GIG characteristic function needs Re(a - 2iz) > 0; a = {}, z = {z}",
            g.a
        )));
    }
    let arg = (g.b * w).sqrt();
    let ln_ratio = 0.5 * g.p * (g.a.ln() - w.ln());
    Ok(ln_ratio + ln_bessel_k(g.p, arg)? - ln_bessel_k_real(g.p, g.omega())?)
}

/// Characteristic function E[exp(i u X)].
pub fn gig_chf(g: &GigParams, u: f64) -> Result<C64> {
    g.validate()?;
    if u == 0.0 {
        return Ok(C64::new(1.0, 0.0));
    }
    Ok(gig_ln_chf_analytic(g, C64::new(u, 0.0))?.exp())
}

/// Mellin transform E[X^{s-1}] = (a/b)^{(1-s)/2} K_{s+p-1}(omega) / K_p(omega).
pub fn gig_mellin(g: &GigParams, s: C64) -> Result<C64> {
    g.validate()?;
    let w = g.omega();
    let ln_pre = 0.5 * (1.0 - s) * (g.a / g.b).ln();
    let ln_kp = ln_bessel_k_real(g.p, w)?;
    if s.im == 0.0 {
        let ln_k = ln_bessel_k_real(s.re + g.p - 1.0, w)?;
        return Ok((ln_pre + ln_k - ln_kp).exp());
    }
    let k = bessel_k_complex_order(s + g.p - 1.0, w)?;
    Ok(ln_pre.exp() * k / ln_kp.exp())
}

/// Raw moment E[X^k] = (b/a)^{k/2} K_{p+k}(omega) / K_p(omega), any real k.
pub fn gig_raw_moment(g: &GigParams, k: f64) -> Result<f64> {
    let w = g.omega();
    Ok((0.5 * k * (g.b / g.a).ln() + ln_bessel_k_real(g.p + k, w)? - ln_bessel_k_real(g.p, w)?).exp())
}

/// Unscaled cumulant polynomials W_1..W_4 in R = K_{p+1}(omega)/K_p(omega);
/// the n-th cumulant is W_n * (b/a)^{n/2}.
pub fn cumulant_polynomials(p: f64, omega: f64, r: f64) -> [f64; 4] {
    let w = omega;
    let w1 = r;
    let w2 = -r * r + 2.0 * (p + 1.0) / w * r + 1.0;
    let w3 = 2.0 * r.powi(3) - 6.0 * (p + 1.0) / w * r * r
        + (4.0 * (p + 1.0) * (p + 2.0) / (w * w) - 2.0) * r
        + 2.0 * (p + 2.0) / w;
    let w4 = -6.0 * r.powi(4) + 24.0 * (p + 1.0) / w * r.powi(3)
        + (8.0 - 4.0 * (p + 1.0) * (7.0 * p + 11.0) / (w * w)) * r * r
        + (8.0 * (p + 1.0) * (p + 2.0) * (p + 3.0) / w.powi(3) - 4.0 * (4.0 * p + 5.0) / w) * r
        - 2.0
        + 4.0 * (p + 2.0) * (p + 3.0) / (w * w);
    [w1, w2, w3, w4]
}

/// First four cumulants of GIG(a, b, p).
pub fn gig_cumulants(g: &GigParams) -> Result<[f64; 4]> {
    let w = g.omega();
    let r = (ln_bessel_k_real(g.p + 1.0, w)? - ln_bessel_k_real(g.p, w)?).exp();
    let wn = cumulant_polynomials(g.p, w, r);
    let eta = g.eta();
    Ok([wn[0] * eta, wn[1] * eta * eta, wn[2] * eta.powi(3), wn[3] * eta.powi(4)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_adaptive;

    fn g121() -> GigParams {
        GigParams::new(1.0, 2.0, 1.0).unwrap()
    }

    fn integrate<F: FnMut(f64) -> f64>(f: F) -> f64 {
        integrate_adaptive(f, 0.0, 200.0, 1e-15, 1e-13, 100_000).unwrap()
    }

    #[test]
    fn pdf_support_and_normalisation() {
        let g = g121();
        assert_eq!(gig_pdf(&g, -1.0).unwrap(), 0.0);
        assert_eq!(gig_pdf(&g, 0.0).unwrap(), 0.0);
        let mass = integrate(|x| gig_pdf(&g, x).unwrap());
        assert!((mass - 1.0).abs() < 1e-10);
        let mean = integrate(|x| x * gig_pdf(&g, x).unwrap());
        let expected = gig_raw_moment(&g, 1.0).unwrap();
        assert!((mean - expected).abs() < 1e-10);
        assert!((gig_cumulants(&g).unwrap()[0] - expected).abs() < 1e-13);
    }

    #[test]
    fn chf_matches_quadrature() {
        let g = g121();
        assert_eq!(gig_chf(&g, 0.0).unwrap(), C64::new(1.0, 0.0));
        let re = integrate(|x| (x).cos() * gig_pdf(&g, x).unwrap());
        let im = integrate(|x| (x).sin() * gig_pdf(&g, x).unwrap());
        let v = gig_chf(&g, 1.0).unwrap();
        assert!((v - C64::new(re, im)).norm() < 1e-8 * v.norm());
        let m = gig_chf(&g, -1.0).unwrap();
        assert!((m - v.conj()).norm() < 1e-15);
        for &u in &[0.1, 1.0, 10.0, 1e3] {
            assert!(gig_chf(&g, u).unwrap().norm() <= 1.0);
        }
    }

    #[test]
    fn mellin_transform() {
        let g = g121();
        let one = gig_mellin(&g, C64::new(1.0, 0.0)).unwrap();
        assert!((one.re - 1.0).abs() < 1e-14 && one.im == 0.0);
        let m2 = gig_mellin(&g, C64::new(2.0, 0.0)).unwrap();
        let mean = integrate(|x| x * gig_pdf(&g, x).unwrap());
        assert!((m2.re - mean).abs() < 1e-10);
        let h = GigParams::new(3.0, 4.0, 5.0).unwrap();
        let s = C64::new(1.5, 0.5);
        let m = gig_mellin(&h, s).unwrap();
        let re = integrate(|x| (C64::new(x, 0.0).powc(s - 1.0) * gig_pdf(&h, x).unwrap()).re);
        let im = integrate(|x| (C64::new(x, 0.0).powc(s - 1.0) * gig_pdf(&h, x).unwrap()).im);
        assert!((m - C64::new(re, im)).norm() < 1e-9 * m.norm());
    }

    #[test]
    fn cumulants_match_central_moments() {
        for g in [g121(), GigParams::new(3.0, 0.5, -2.2).unwrap(), GigParams::new(0.2, 7.0, 0.4).unwrap()] {
            let m: Vec<f64> = (1..=4).map(|k| gig_raw_moment(&g, k as f64).unwrap()).collect();
            let c2 = m[1] - m[0] * m[0];
            let c3 = m[2] - 3.0 * m[0] * m[1] + 2.0 * m[0].powi(3);
            let c4c = m[3] - 4.0 * m[0] * m[2] + 6.0 * m[0] * m[0] * m[1] - 3.0 * m[0].powi(4);
            let k = gig_cumulants(&g).unwrap();
            assert!((k[1] - c2).abs() < 1e-10 * c2.abs());
            assert!((k[2] - c3).abs() < 1e-9 * c3.abs().max(c2.powf(1.5)));
            assert!((k[3] - (c4c - 3.0 * c2 * c2)).abs() < 1e-8 * c2 * c2);
        }
    }
}
