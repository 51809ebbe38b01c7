//! GIG and BGIG random variates.
//!
//! The GIG generator is the one of Hörmann and Leydold (2014) with the
//! regime selection of the GIGrvg package: ratio-of-uniforms with mode shift
//! for lambda > 2 or omega > 3, without shift for moderate parameters, and a
//! three-part hat for small omega and lambda < 1.

use rand::Rng;

use super::params::{BgigParams, GigParams};
use crate::error::{Error, Result};
use crate::rng::open01;

const MAX_ITER: usize = 1_000_000;

fn gig_mode(lambda: f64, omega: f64) -> f64 {
    if lambda >= 1.0 {
        (((lambda - 1.0) * (lambda - 1.0) + omega * omega).sqrt() + (lambda - 1.0)) / omega
    } else {
        omega / (((1.0 - lambda) * (1.0 - lambda) + omega * omega).sqrt() + (1.0 - lambda))
    }
}

fn cap_error(lambda: f64, omega: f64) -> Error {
    Error::Sampling(format!("GIG rejection loop exceeded {MAX_ITER} iterations (lambda {lambda}, omega {omega})"))
}

/// Standardised GIG(lambda, omega) with density proportional to
/// x^{lambda-1} exp(-omega (x + 1/x) / 2), lambda >= 0.
fn rou_shift<R: Rng + ?Sized>(lambda: f64, omega: f64, rng: &mut R) -> Result<f64> {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = gig_mode(lambda, omega);
    let nc = t * xm.ln() - s * (xm + 1.0 / xm);

    // Roots of the cubic locating the extremes of the shifted bounding rectangle.
    let a = -(2.0 * (lambda + 1.0) / omega + xm);
    let b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
    let c = xm;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let fi = (-q / (2.0 * (-(p * p * p) / 27.0).sqrt())).acos();
    let fak = 2.0 * (-p / 3.0).sqrt();
    let y1 = fak * (fi / 3.0).cos() - a / 3.0;
    let y2 = fak * (fi / 3.0 + 4.0 / 3.0 * std::f64::consts::PI).cos() - a / 3.0;
    let uplus = (y1 - xm) * (t * y1.ln() - s * (y1 + 1.0 / y1) - nc).exp();
    let uminus = (y2 - xm) * (t * y2.ln() - s * (y2 + 1.0 / y2) - nc).exp();

    for _ in 0..MAX_ITER {
        let u = uminus + open01(rng) * (uplus - uminus);
        let v = open01(rng);
        let x = u / v + xm;
        if x > 0.0 && v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
            return Ok(x);
        }
    }
    Err(cap_error(lambda, omega))
}

fn rou_noshift<R: Rng + ?Sized>(lambda: f64, omega: f64, rng: &mut R) -> Result<f64> {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = gig_mode(lambda, omega);
    let nc = t * xm.ln() - s * (xm + 1.0 / xm);
    let ym = ((lambda + 1.0) + ((lambda + 1.0) * (lambda + 1.0) + omega * omega).sqrt()) / omega;
    let um = (0.5 * (lambda + 1.0) * ym.ln() - s * (ym + 1.0 / ym) - nc).exp();
    for _ in 0..MAX_ITER {
        let u = um * open01(rng);
        let v = open01(rng);
        let x = u / v;
        if v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
            return Ok(x);
        }
    }
    Err(cap_error(lambda, omega))
}

/// Three-part hat: constant on (0, x0), power on (x0, 2/omega), exponential beyond.
/// Requires lambda < 1 and omega <= 1.
fn three_part_hat<R: Rng + ?Sized>(lambda: f64, omega: f64, rng: &mut R) -> Result<f64> {
    let xm = gig_mode(lambda, omega);
    let x0 = omega / (1.0 - lambda);
    let k0 = ((lambda - 1.0) * xm.ln() - 0.5 * omega * (xm + 1.0 / xm)).exp();
    let a1 = k0 * x0;
    let (k1, a2, k2, a3);
    if x0 >= 2.0 / omega {
        k1 = 0.0;
        a2 = 0.0;
        k2 = x0.powf(lambda - 1.0);
        a3 = k2 * 2.0 * (-omega * x0 / 2.0).exp() / omega;
    } else {
        k1 = (-omega).exp();
        a2 = if lambda == 0.0 {
            k1 * (2.0 / (omega * omega)).ln()
        } else {
            k1 / lambda * ((2.0 / omega).powf(lambda) - x0.powf(lambda))
        };
        k2 = (2.0 / omega).powf(lambda - 1.0);
        a3 = k2 * 2.0 * (-1.0f64).exp() / omega;
    }
    let total = a1 + a2 + a3;
    for _ in 0..MAX_ITER {
        let mut v = total * open01(rng);
        let (x, hx);
        if v <= a1 {
            x = x0 * v / a1;
            hx = k0;
        } else {
            v -= a1;
            if v <= a2 {
                if lambda == 0.0 {
                    x = omega * (omega.exp() * v).exp();
                    hx = k1 / x;
                } else {
                    x = (x0.powf(lambda) + lambda / k1 * v).powf(1.0 / lambda);
                    hx = k1 * x.powf(lambda - 1.0);
                }
            } else {
                v -= a2;
                let a = x0.max(2.0 / omega);
                x = -2.0 / omega * ((-omega / 2.0 * a).exp() - omega / (2.0 * k2) * v).ln();
                hx = k2 * (-omega / 2.0 * x).exp();
            }
        }
        let u = open01(rng) * hx;
        if u.ln() <= (lambda - 1.0) * x.ln() - omega / 2.0 * (x + 1.0 / x) {
            return Ok(x);
        }
    }
    Err(cap_error(lambda, omega))
}

/// One GIG(a, b, p) variate.
pub fn gig_sample<R: Rng + ?Sized>(g: &GigParams, rng: &mut R) -> Result<f64> {
    g.validate()?;
    let lambda = g.p.abs();
    let omega = g.omega();
    let alpha = g.eta();
    let x = if lambda > 2.0 || omega > 3.0 {
        rou_shift(lambda, omega, rng)?
    } else if lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2 {
        rou_noshift(lambda, omega, rng)?
    } else {
        three_part_hat(lambda, omega, rng)?
    };
    // GIG(lambda) and 1/GIG(-lambda) coincide in the standardised form.
    let v = if g.p < 0.0 { alpha / x } else { alpha * x };
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Sampling(format!("GIG variate {v} out of range for {g:?}")));
    }
    Ok(v)
}

/// One BGIG variate, the difference of independent one-sided variates.
pub fn bgig_sample<R: Rng + ?Sized>(params: &BgigParams, rng: &mut R) -> Result<f64> {
    let xp = gig_sample(&params.plus, rng)?;
    let xm = gig_sample(&params.minus, rng)?;
    Ok(xp - xm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{gig_cumulants, gig_raw_moment};
    use crate::rng::substream;

    fn check_moments(g: GigParams, seed: u64) {
        let mut rng = substream(seed, 0);
        let n = 100_000;
        let mut s1 = 0.0;
        for _ in 0..n {
            let x = gig_sample(&g, &mut rng).unwrap();
            assert!(x > 0.0);
            s1 += x;
        }
        let mean = s1 / n as f64;
        let k = gig_cumulants(&g).unwrap();
        let se = (k[1] / n as f64).sqrt();
        assert!((mean - k[0]).abs() < 4.0 * se, "{g:?}: mean {mean} vs {}", k[0]);
    }

    #[test]
    fn each_regime_has_the_right_mean() {
        // shifted ROU
        check_moments(GigParams::new(1.0, 2.0, 3.5).unwrap(), 1);
        check_moments(GigParams::new(20.0, 3.0, -0.4).unwrap(), 2);
        // ROU without shift
        check_moments(GigParams::new(1.0, 2.0, 1.0).unwrap(), 3);
        check_moments(GigParams::new(0.5, 0.5, -1.5).unwrap(), 4);
        // three-part hat, including lambda = 0
        check_moments(GigParams::new(0.1, 0.1, 0.3).unwrap(), 5);
        check_moments(GigParams::new(0.02, 0.5, 0.0).unwrap(), 6);
        check_moments(GigParams::new(0.05, 0.05, -0.6).unwrap(), 7);
    }

    #[test]
    fn second_moment_in_the_shifted_regime() {
        let g = GigParams::new(558.753, 0.0443139, 2.53084).unwrap();
        let mut rng = substream(11, 0);
        let n = 100_000;
        let mut s2 = 0.0;
        for _ in 0..n {
            let x = gig_sample(&g, &mut rng).unwrap();
            s2 += x * x;
        }
        let m2 = gig_raw_moment(&g, 2.0).unwrap();
        let m4 = gig_raw_moment(&g, 4.0).unwrap();
        let se = ((m4 - m2 * m2) / n as f64).sqrt();
        assert!((s2 / n as f64 - m2).abs() < 4.0 * se);
    }

    #[test]
    fn seeded_streams_reproduce() {
        let p = BgigParams::new(1.0, 2.0, 1.0, 3.0, 4.0, 5.0).unwrap();
        let a: Vec<f64> = {
            let mut r = substream(5, 9);
            (0..10).map(|_| bgig_sample(&p, &mut r).unwrap()).collect()
        };
        let b: Vec<f64> = {
            let mut r = substream(5, 9);
            (0..10).map(|_| bgig_sample(&p, &mut r).unwrap()).collect()
        };
        assert_eq!(a, b);
    }
}
