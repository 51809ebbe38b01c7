//! Bessel functions J and Y of real order and positive real argument, and the
//! squared modulus of the Hankel function.
//!
//! Steed/Temme scheme: CF1 for J'/J, Temme series (x < 2) or the complex
//! continued fraction CF2 (x >= 2) at the reduced order, upward recurrence for Y.

use super::bessel_k::temme_gammas;
use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAX_ITER: usize = 100_000;
const XMIN: f64 = 2.0;

/// (J_nu(x), Y_nu(x)) for nu >= 0, x > 0. Y may be -inf when it overflows.
pub fn bessel_jy(nu: f64, x: f64) -> Result<(f64, f64)> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!("J/Y require x > 0, got {x}")));
    }
    if nu.is_nan() || nu < 0.0 {
        return Err(Error::Domain(format!("J/Y require nu >= 0, got {nu}")));
    }
    let pi = std::f64::consts::PI;
    let nl = if x < XMIN {
        (nu + 0.5).floor() as usize
    } else {
        (nu - x + 1.5).floor().max(0.0) as usize
    };
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / pi;

    // CF1: J'_nu / J_nu by modified Lentz.
    let mut isign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..MAX_ITER {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence(format!("CF1 for J_{nu}({x})")));
    }

    // Downward recurrence to the reduced order, rescaling to avoid overflow.
    let mut rjl = isign * 1e-30;
    let mut rjpl = h * rjl;
    let mut rjl1 = rjl;
    let mut fact = nu * xi;
    for _ in (1..=nl).rev() {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
        if rjl.abs() > 1e250 {
            rjl *= 1e-250;
            rjpl *= 1e-250;
            rjl1 *= 1e-250;
        }
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    let (rjmu, mut rymu, mut ry1);
    if x < XMIN {
        let x2 = 0.5 * x;
        let pimu = pi * xmu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d0 = -x2.ln();
        let e = xmu * d0;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
        let mut ff = 2.0 / pi * fact * (gam1 * e.cosh() + gam2 * fact2 * d0);
        let ee = e.exp();
        let mut p = ee / (gampl * pi);
        let mut q = 1.0 / (ee * pi * gammi);
        let pimu2 = 0.5 * pimu;
        let fact3 = if pimu2.abs() < EPS { 1.0 } else { pimu2.sin() / pimu2 };
        let r = pi * pimu2 * fact3 * fact3;
        let mut cc = 1.0;
        let dd = -x2 * x2;
        let mut sum = ff + r * q;
        let mut sum1 = p;
        let mut ok = false;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            cc *= dd / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = cc * (ff + r * q);
            sum += del;
            let del1 = cc * p - fi * del;
            sum1 += del1;
            if del.abs() < (1.0 + sum.abs()) * EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Convergence(format!("Temme series for Y_{nu}({x})")));
        }
        rymu = -sum;
        ry1 = -sum1 * xi2;
        let rymup = xmu * xi * rymu - ry1;
        rjmu = w / (rymup - f * rymu);
    } else {
        let mut a = 0.25 - xmu2;
        let mut p = -0.5 * xi;
        let mut q = 1.0;
        let br = 2.0 * x;
        let mut bi = 2.0;
        let mut fact = a * xi / (p * p + q * q);
        let mut cr = br + q * fact;
        let mut ci = bi + p * fact;
        let mut den = br * br + bi * bi;
        let mut dr = br / den;
        let mut di = -bi / den;
        let mut dlr = cr * dr - ci * di;
        let mut dli = cr * di + ci * dr;
        let mut temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        let mut ok = false;
        for i in 2..MAX_ITER {
            a += 2.0 * (i - 1) as f64;
            bi += 2.0;
            dr = a * dr + br;
            di = a * di + bi;
            if dr.abs() + di.abs() < FPMIN {
                dr = FPMIN;
            }
            fact = a / (cr * cr + ci * ci);
            cr = br + cr * fact;
            ci = bi - ci * fact;
            if cr.abs() + ci.abs() < FPMIN {
                cr = FPMIN;
            }
            den = dr * dr + di * di;
            dr /= den;
            di /= -den;
            dlr = cr * dr - ci * di;
            dli = cr * di + ci * dr;
            temp = p * dlr - q * dli;
            q = p * dli + q * dlr;
            p = temp;
            if (dlr - 1.0).abs() + dli.abs() < EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Convergence(format!("CF2 for J/Y_{nu}({x})")));
        }
        let gam = (p - f) / q;
        let mut rj = (w / ((p - f) * gam + q)).sqrt();
        rj = rj.copysign(rjl);
        rjmu = rj;
        rymu = rjmu * gam;
        let rymup = rymu * (p + q / gam);
        ry1 = xmu * xi * rymu - rymup;
    }
    let scale = rjmu / rjl;
    let j = rjl1 * scale;
    for i in 1..=nl {
        let rytemp = (xmu + i as f64) * xi2 * ry1 - rymu;
        rymu = ry1;
        ry1 = rytemp;
        if !rymu.is_finite() || rymu.abs() > 1e300 {
            return Ok((j, f64::NEG_INFINITY));
        }
    }
    Ok((j, rymu))
}

/// |H^(1)_p(y)|^2 = J_p(y)^2 + Y_p(y)^2 for p >= 0, y > 0. Returns +inf
/// when the modulus exceeds the f64 range (small y, large p).
pub fn hankel_abs_sq(p: f64, y: f64) -> Result<f64> {
    if y.is_nan() || y <= 0.0 {
        return Err(Error::Domain(format!("Hankel modulus requires y > 0, got {y}")));
    }
    if p.is_nan() || p < 0.0 {
        return Err(Error::Domain(format!("Hankel modulus requires p >= 0, got {p}")));
    }
    if y > (2.0 * p * p).max(20.0) {
        return Ok(hankel_abs_sq_asymptotic(p, y));
    }
    let (j, yv) = bessel_jy(p, y)?;
    if !yv.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(j * j + yv * yv)
}

/// Large-argument series 2/(pi y) * sum_k t_k with
/// t_k = t_{k-1} (2k-1)/(2k) (4p^2 - (2k-1)^2)/(2y)^2.
fn hankel_abs_sq_asymptotic(p: f64, y: f64) -> f64 {
    let mu = 4.0 * p * p;
    let z = 1.0 / (4.0 * y * y);
    let mut t = 1.0;
    let mut s = 1.0;
    for k in 1..60 {
        let k2 = (2 * k - 1) as f64;
        let next = t * (k2 / (2 * k) as f64) * (mu - k2 * k2) * z;
        if next.abs() >= t.abs() {
            break;
        }
        t = next;
        s += t;
        if t.abs() < 1e-17 * s.abs() {
            break;
        }
    }
    2.0 / (std::f64::consts::PI * y) * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    // Integral representations used as an independent check:
    // J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt
    // Y_0(x) = (4/pi^2) int_0^{pi/2} cos(x cos t) (gamma + ln(2 x sin^2 t)) dt
    fn j_int(n: f64, x: f64) -> f64 {
        quad::integrate_panels(|t| (n * t - x * t.sin()).cos(), 0.0, std::f64::consts::PI, 200)
            / std::f64::consts::PI
    }

    fn y0_int(x: f64) -> f64 {
        let g = 0.5772156649015329;
        let pi = std::f64::consts::PI;
        quad::integrate_adaptive(
            |t| (x * t.cos()).cos() * (g + (2.0 * x * t.sin() * t.sin()).ln()),
            0.0,
            pi / 2.0,
            1e-15,
            1e-14,
            100_000,
        )
        .unwrap()
            * 4.0
            / (pi * pi)
    }

    #[test]
    fn half_order_modulus_is_exact() {
        let v = hankel_abs_sq(0.5, 3.0).unwrap();
        assert!((v - 2.0 / (3.0 * std::f64::consts::PI)).abs() < 1e-15);
        for &y in &[0.01, 0.5, 1.9, 2.1, 7.0, 19.0, 25.0, 400.0] {
            let v = hankel_abs_sq(0.5, y).unwrap();
            let e = 2.0 / (std::f64::consts::PI * y);
            assert!((v - e).abs() / e < 1e-13, "y={y}");
        }
    }

    #[test]
    fn order_zero_at_one_matches_integrals() {
        let (j, y) = bessel_jy(0.0, 1.0).unwrap();
        assert!((j - j_int(0.0, 1.0)).abs() < 1e-14);
        assert!((y - y0_int(1.0)).abs() < 1e-12);
        let h = hankel_abs_sq(0.0, 1.0).unwrap();
        assert!((h - (j * j + y * y)).abs() < 1e-15);
    }

    #[test]
    fn integer_order_j_matches_integral() {
        for &n in &[1.0, 2.0, 5.0] {
            for &x in &[0.3, 1.5, 2.5, 9.0, 18.0] {
                let (j, _) = bessel_jy(n, x).unwrap();
                assert!((j - j_int(n, x)).abs() < 1e-13, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn large_argument_modulus_and_continuity() {
        let v = hankel_abs_sq(2.0, 50.0).unwrap();
        let e = 2.0 / (std::f64::consts::PI * 50.0);
        assert!((v - e).abs() / e < 0.01);
        for &p in &[0.0, 1.0, 2.53084, 3.0] {
            let t = f64::max(2.0 * p * p, 20.0);
            let (j, y) = bessel_jy(p, t * (1.0 + 1e-12)).unwrap();
            let a = hankel_abs_sq(p, t * (1.0 + 1e-12)).unwrap();
            assert!((a - (j * j + y * y)).abs() / a < 1e-13, "p={p}");
        }
    }

    #[test]
    fn modulus_decreases_in_y() {
        for &p in &[0.0, 0.3, 1.0, 2.5, 6.0] {
            let mut prev = f64::INFINITY;
            for k in 0..200 {
                let y = 0.01 * 1.05f64.powi(k);
                let v = hankel_abs_sq(p, y).unwrap();
                assert!(v > 0.0 && v < prev, "p={p} y={y}");
                prev = v;
            }
        }
    }
}
