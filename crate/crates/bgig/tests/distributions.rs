use bgig::distributions::{
    bgig_chf, bgig_cumulants, bgig_levy_density, bgig_ln_chf_analytic, bgig_pdf, gig_ln_chf_analytic, BgigParams,
    LevyDensity,
};
use bgig::specfun::{jaeger, JaegerConfig};
use num_complex::Complex64 as C64;

fn p123() -> BgigParams {
    BgigParams::new(1.0, 2.0, 1.0, 3.0, 4.0, 5.0).unwrap()
}

#[test]
fn chf_modulus_decay_rate() {
    for p in [p123(), BgigParams::new(5.0, 0.3, -1.2, 2.0, 1.5, 0.4).unwrap()] {
        let pbar = p.plus.p + p.minus.p;
        let bbar = p.plus.b.sqrt() + p.minus.b.sqrt();
        let scaled: Vec<f64> = (0..=20)
            .map(|k| {
                let u = 10f64.powf(3.0 + 2.0 * k as f64 / 20.0);
                let ln_mod = bgig_ln_chf_analytic(&p, C64::new(u, 0.0)).unwrap().re;
                (ln_mod + 0.5 * (1.0 + pbar) * u.ln() + u.sqrt() * bbar).exp()
            })
            .collect();
        let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = scaled.iter().cloned().fold(0.0, f64::max);
        assert!(lo > 0.0 && hi.is_finite());
        assert!(hi / lo < 1.5, "{lo} {hi}");
    }
}

#[test]
fn reflection_of_the_density() {
    let p = p123();
    for x in [-3.0, -1.2, -0.1, 0.4, 2.5] {
        let a = bgig_pdf(&p, x).unwrap();
        let b = bgig_pdf(&p.swap(), -x).unwrap();
        assert!((a - b).abs() <= 1e-10 * a.max(1e-3), "x={x} {a} {b}");
    }
}

#[test]
fn variance_gamma_limit() {
    let (ap, am, p) = (3.0, 5.0, 1.7);
    let params = BgigParams::new(ap, 1e-6, p, am, 1e-6, p).unwrap();
    let (sigma2, theta, nu) = (8.0 * p / (ap * am), 2.0 * p * (1.0 / ap - 1.0 / am), 1.0 / p);
    for k in 0..=40 {
        let u = -5.0 + 0.25 * k as f64;
        let vg = C64::new(1.0 + 0.5 * sigma2 * nu * u * u, -theta * nu * u).powf(-1.0 / nu);
        let c = bgig_chf(&params, u).unwrap();
        assert!((c - vg).norm() <= 1e-3 * vg.norm(), "u={u}");
    }
}

#[test]
fn cumulants_split_by_side() {
    let p = BgigParams::new(4.0, 1.3, 0.6, 2.5, 0.7, -1.4).unwrap();
    let c = bgig_cumulants(&p).unwrap();
    // Fourth-order central differences of each one-sided log chf.
    let h = 0.02;
    let side = |g: &bgig::distributions::GigParams, sign: f64| -> [f64; 4] {
        let f = |u: f64| gig_ln_chf_analytic(g, C64::new(sign * u, 0.0)).unwrap();
        let d1 = (-f(2.0 * h) + f(h) * 8.0 - f(-h) * 8.0 + f(-2.0 * h)) / (12.0 * h);
        let d2 = (-f(2.0 * h) + f(h) * 16.0 - f(0.0) * 30.0 + f(-h) * 16.0 - f(-2.0 * h)) / (12.0 * h * h);
        let d3 = (-f(3.0 * h) + f(2.0 * h) * 8.0 - f(h) * 13.0 + f(-h) * 13.0 - f(-2.0 * h) * 8.0 + f(-3.0 * h))
            / (8.0 * h.powi(3));
        let d4 = (-f(3.0 * h) + f(2.0 * h) * 12.0 - f(h) * 39.0 + f(0.0) * 56.0 - f(-h) * 39.0 + f(-2.0 * h) * 12.0
            - f(-3.0 * h))
            / (6.0 * h.powi(4));
        // kappa_n = (-i)^n d^n/du^n log Phi at 0.
        [d1.im, -d2.re, -d3.im, d4.re]
    };
    let plus = side(&p.plus, 1.0);
    let minus_reflected = side(&p.minus, -1.0);
    let total = [c.k1, c.k2, c.k3, c.k4];
    for n in 0..4 {
        let sum = plus[n] + minus_reflected[n];
        assert!((sum - total[n]).abs() <= 1e-5 * total[n].abs().max(1.0), "n={} {sum} {}", n + 1, total[n]);
    }
}

#[test]
fn jaeger_is_even_in_p() {
    let cfg = JaegerConfig::default();
    for p in [0.3, 1.0, 2.5] {
        for x in [1e-3, 0.1, 3.0, 80.0] {
            assert_eq!(jaeger(x, p, &cfg).unwrap(), jaeger(x, -p, &cfg).unwrap());
        }
    }
}

#[test]
fn small_jump_constant() {
    let p = p123();
    let x: f64 = 1e-8;
    let c = x.powf(1.5) * bgig_levy_density(&p, x).unwrap();
    let target = (p.plus.b / (2.0 * std::f64::consts::PI)).sqrt();
    assert!((c / target - 1.0).abs() <= 0.01, "{c} {target}");
    let cm = x.powf(1.5) * bgig_levy_density(&p, -x).unwrap();
    let tm = (p.minus.b / (2.0 * std::f64::consts::PI)).sqrt();
    assert!((cm / tm - 1.0).abs() <= 0.01);
}

#[test]
fn finite_variation_and_infinite_activity() {
    let levy = LevyDensity::new(&p123(), 1e-13, 1.0).unwrap();
    let first_moment = |eps: f64| {
        levy.integrate_side(1.0, eps, 1.0, |x| x).unwrap() + levy.integrate_side(-1.0, eps, 1.0, |x| x).unwrap()
    };
    let (a, b) = (first_moment(1e-10), first_moment(1e-12));
    assert!((a - b).abs() <= 1e-4 * b, "{a} {b}");
    let mass = |eps: f64| {
        levy.integrate_side(1.0, eps, 1.0, |_| 1.0).unwrap() + levy.integrate_side(-1.0, eps, 1.0, |_| 1.0).unwrap()
    };
    let s = (mass(1e-6) / mass(1e-2)).ln() / (1e-6f64 / 1e-2).ln();
    assert!((s + 0.5).abs() <= 0.05, "{s}");
}
