//! Quadrature rules and scalar solvers shared by the numerical modules.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// The 16-point rule used for panel quadrature throughout the crate.
pub fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Nodes and weights of the 16-point rule mapped onto `n` equal panels of [a, b].
pub fn panel_nodes(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gl16();
    let h = (b - a) / n as f64;
    let mut xs = Vec::with_capacity(16 * n);
    let mut ws = Vec::with_capacity(16 * n);
    for k in 0..n {
        let c = a + (k as f64 + 0.5) * h;
        for (x, w) in gx.iter().zip(gw) {
            xs.push(c + 0.5 * h * x);
            ws.push(0.5 * h * w);
        }
    }
    (xs, ws)
}

/// Composite 16-point Gauss-Legendre over `n` equal panels.
pub fn integrate_panels<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let (gx, gw) = gl16();
    let h = (b - a) / n as f64;
    let mut s = 0.0;
    for k in 0..n {
        let c = a + (k as f64 + 0.5) * h;
        let mut ps = 0.0;
        for (x, w) in gx.iter().zip(gw) {
            ps += w * f(c + 0.5 * h * x);
        }
        s += 0.5 * h * ps;
    }
    s
}

fn gl16_once<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let (gx, gw) = gl16();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in gx.iter().zip(gw) {
        s += w * f(c + h * x);
    }
    s * h
}

/// Adaptive bisection with the 16-point rule; each interval is accepted when
/// its two halves agree with the whole to `abs_tol + rel_tol * |whole|`.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<f64> {
    let mut stack = vec![(a, b, gl16_once(&mut f, a, b), 0u32)];
    let mut total = 0.0;
    let mut count = 0usize;
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = gl16_once(&mut f, lo, mid);
        let right = gl16_once(&mut f, mid, hi);
        let both = left + right;
        let scale = (b - a).abs().max(f64::MIN_POSITIVE);
        let share = (hi - lo).abs() / scale;
        if (both - whole).abs() <= (abs_tol * share).max(rel_tol * both.abs()) || depth >= 50 {
            total += both;
            continue;
        }
        count += 1;
        if count > max_intervals {
            return Err(Error::Convergence(format!(
                "adaptive quadrature on [{a}, {b}] exceeded {max_intervals} subdivisions"
            )));
        }
        stack.push((lo, mid, left, depth + 1));
        stack.push((mid, hi, right, depth + 1));
    }
    Ok(total)
}

/// Brent's method on a bracketing interval.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoRoot(format!("[{a}, {b}] does not bracket a root")));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(Error::Convergence(format!("Brent did not converge in {max_iter} iterations")))
}

/// Golden-section search for the maximum of a unimodal function on [a, b].
/// Returns (argmax, max).
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (a, b);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
