//! European options under the risk-neutral exp-BGIG model, S_T = S_0 exp(X_T).

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{bgig_ln_chf_analytic, bgig_sample, BgigParams};
use crate::error::{Error, Result};
use crate::process::TransitionSampler;
use crate::quad;
use crate::risk_neutral::martingale_gap;
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptionKind {
    Call,
    Put,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    pub spot: f64,
    pub strike: f64,
    /// In time units of the generating law.
    pub maturity: f64,
    /// Continuously compounded rate per unit time.
    pub rate: f64,
    pub kind: OptionKind,
}

impl OptionSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("spot", self.spot), ("strike", self.strike), ("maturity", self.maturity)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !self.rate.is_finite() {
            return Err(Error::InvalidParameter(format!("rate must be finite, got {}", self.rate)));
        }
        Ok(())
    }

    pub fn discount(&self) -> f64 {
        (-self.rate * self.maturity).exp()
    }

    /// Call - Put = S_0 - K exp(-rT).
    pub fn parity_gap(&self) -> f64 {
        self.spot - self.strike * self.discount()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PricingMethod {
    MonteCarlo,
    LewisLipton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceResult {
    pub value: f64,
    pub method: PricingMethod,
    pub std_error: Option<f64>,
    pub n_paths: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LewisConfig {
    /// Imaginary part of the integration contour, > 1.
    pub v1: f64,
    /// Absolute accuracy target of the call value per unit strike.
    pub tol: f64,
}

impl Default for LewisConfig {
    fn default() -> Self {
        LewisConfig { v1: 1.1, tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_paths: usize,
    pub seed: u64,
}

/// v1 actually used: the requested one if the contour lies in the strip of
/// Phi*(-z), otherwise halfway between 1 and a+*/2.
pub fn lewis_contour(rn: &BgigParams, v1: f64) -> Result<f64> {
    if !(v1 > 1.0) {
        return Err(Error::Domain(format!("contour needs Im z > 1, got {v1}")));
    }
    let limit = 0.5 * rn.plus.a;
    if v1 < limit {
        return Ok(v1);
    }
    if limit > 1.0 + 2e-6 {
        return Ok((0.5 * (1.0 + limit)).max(1.0 + 1e-6));
    }
    Err(Error::Domain(format!("no contour 1 < Im z < a+*/2 = {limit}")))
}

/// Call by the Lewis-Lipton contour integral
/// C = -K e^{-rT} / (2 pi) int e^{-izk} Phi~(-z, T) / (z^2 - iz) dz on Im z = v1,
/// with k = ln(S_0/K) + rT and Phi~ the chf of X_T - rT; put by parity.
pub fn price_lewis(rn: &BgigParams, opt: &OptionSpec, cfg: &LewisConfig) -> Result<PriceResult> {
    rn.validate()?;
    opt.validate()?;
    let v = lewis_contour(rn, cfg.v1)?;
    let t = opt.maturity;
    let k = (opt.spot / opt.strike).ln() + opt.rate * t;
    let integrand = |x: f64| -> Result<C64> {
        let z = C64::new(x, v);
        let w = -z;
        let ln_phi = bgig_ln_chf_analytic(rn, w)? * t - C64::i() * w * (opt.rate * t);
        Ok((-C64::i() * z * k + ln_phi).exp() / (z * z - C64::i() * z))
    };
    // Truncate where the remaining tail, bounded by |f(x)| x, is negligible.
    let mut x_max = 1.0;
    let mut hits = 0;
    let mut steps = 0;
    while hits < 3 {
        if integrand(x_max)?.norm() * x_max < 0.01 * cfg.tol {
            hits += 1;
        } else {
            hits = 0;
        }
        x_max *= 1.2;
        steps += 1;
        if steps > 400 {
            return Err(Error::Convergence("Lewis integrand does not decay".into()));
        }
    }
    let mut panels = ((x_max * (1.0 + k.abs())).ceil() as usize).max(16);
    let eval = |n: usize| -> Result<f64> {
        let (xs, ws) = quad::panel_nodes(0.0, x_max, n);
        let vals: Vec<Result<f64>> = xs.par_iter().zip(ws.par_iter()).map(|(&x, &w)| Ok(w * integrand(x)?.re)).collect();
        vals.into_iter().sum()
    };
    let mut prev = eval(panels)?;
    let integral = loop {
        panels *= 2;
        let cur = eval(panels)?;
        if (cur - prev).abs() <= cfg.tol {
            break cur;
        }
        if panels > 1 << 16 {
            return Err(Error::Convergence(format!("Lewis quadrature not settled: {prev} vs {cur}")));
        }
        prev = cur;
    };
    let call = -opt.strike * opt.discount() / std::f64::consts::PI * integral;
    let value = match opt.kind {
        OptionKind::Call => call,
        OptionKind::Put => call - opt.parity_gap(),
    };
    Ok(PriceResult { value: value.max(0.0), method: PricingMethod::LewisLipton, std_error: None, n_paths: None })
}

fn check_risk_neutral(rn: &BgigParams, rate: f64) -> Result<()> {
    let gap = martingale_gap(rn, rate)?;
    if !(gap.abs() <= 1e-8) {
        return Err(Error::Precondition(format!("parameters are not risk-neutral at rate {rate}: gap {gap:e}")));
    }
    Ok(())
}

/// Draws of X_T, path i from substream (seed, i). Integer T sums unit-time
/// variates; other T use the tabulated transition law.
pub fn terminal_draws(rn: &BgigParams, maturity: f64, n_paths: usize, seed: u64) -> Result<Vec<f64>> {
    if !(maturity > 0.0) {
        return Err(Error::InvalidParameter(format!("maturity must be positive, got {maturity}")));
    }
    if maturity.fract() == 0.0 {
        let steps = maturity as usize;
        (0..n_paths)
            .into_par_iter()
            .map(|i| {
                let mut rng = substream(seed, i as u64);
                let mut x = 0.0;
                for _ in 0..steps {
                    x += bgig_sample(rn, &mut rng)?;
                }
                Ok(x)
            })
            .collect()
    } else {
        let s = TransitionSampler::new(rn, maturity)?;
        Ok((0..n_paths).into_par_iter().map(|i| s.sample(&mut substream(seed, i as u64))).collect())
    }
}

fn payoff(kind: OptionKind, s: f64, k: f64) -> f64 {
    match kind {
        OptionKind::Call => (s - k).max(0.0),
        OptionKind::Put => (k - s).max(0.0),
    }
}

fn mc_from_draws(draws: &[f64], opt: &OptionSpec) -> PriceResult {
    let n = draws.len() as f64;
    let d = opt.discount();
    let (mut s1, mut s2) = (0.0, 0.0);
    for x in draws {
        let v = d * payoff(opt.kind, opt.spot * x.exp(), opt.strike);
        s1 += v;
        s2 += v * v;
    }
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    PriceResult {
        value: mean,
        method: PricingMethod::MonteCarlo,
        std_error: Some((var / n).sqrt()),
        n_paths: Some(draws.len()),
    }
}

/// Discounted Monte Carlo mean of the payoff.
pub fn price_mc(rn: &BgigParams, opt: &OptionSpec, n_paths: usize, seed: u64) -> Result<PriceResult> {
    opt.validate()?;
    if n_paths < 100 {
        return Err(Error::InvalidParameter(format!("need at least 100 paths, got {n_paths}")));
    }
    check_risk_neutral(rn, opt.rate)?;
    Ok(mc_from_draws(&terminal_draws(rn, opt.maturity, n_paths, seed)?, opt))
}

/// Lewis and Monte Carlo price per option, each option with its own seed
/// stream so that duplicates give independent estimates.
pub fn price_table(
    rn: &BgigParams,
    opts: &[OptionSpec],
    mc: &McConfig,
    lewis: &LewisConfig,
) -> Result<Vec<(PriceResult, PriceResult)>> {
    opts.iter()
        .enumerate()
        .map(|(j, o)| {
            let seed = mc.seed ^ (j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            Ok((price_lewis(rn, o, lewis)?, price_mc(rn, o, mc.n_paths, seed)?))
        })
        .collect()
}

/// |MC - Lewis| / std_error for each pair of `price_table`.
pub fn discrepancy(pairs: &[(PriceResult, PriceResult)]) -> Vec<f64> {
    pairs
        .iter()
        .map(|(l, m)| (m.value - l.value).abs() / m.std_error.unwrap_or(f64::NAN))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableMethod {
    Mc,
    Lewis,
    Both,
}

/// One row of a price table; absent methods are None.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceRow {
    pub strike: f64,
    pub call_lewis: Option<f64>,
    pub call_mc: Option<f64>,
    pub call_mc_se: Option<f64>,
    pub put_lewis: Option<f64>,
    pub put_mc: Option<f64>,
    pub put_mc_se: Option<f64>,
}

/// Calls and puts over a strike grid. Monte Carlo uses one set of terminal
/// draws for all strikes.
#[allow(clippy::too_many_arguments)]
pub fn price_rows(
    rn: &BgigParams,
    spot: f64,
    strikes: &[f64],
    maturity: f64,
    rate: f64,
    method: TableMethod,
    mc: &McConfig,
    lewis: &LewisConfig,
) -> Result<Vec<PriceRow>> {
    let spec = |strike: f64, kind: OptionKind| OptionSpec { spot, strike, maturity, rate, kind };
    for &k in strikes {
        spec(k, OptionKind::Call).validate()?;
    }
    let draws = if method != TableMethod::Lewis && !strikes.is_empty() {
        if mc.n_paths < 100 {
            return Err(Error::InvalidParameter(format!("need at least 100 paths, got {}", mc.n_paths)));
        }
        check_risk_neutral(rn, rate)?;
        Some(terminal_draws(rn, maturity, mc.n_paths, mc.seed)?)
    } else {
        None
    };
    strikes
        .iter()
        .map(|&k| {
            let mut row = PriceRow {
                strike: k,
                call_lewis: None,
                call_mc: None,
                call_mc_se: None,
                put_lewis: None,
                put_mc: None,
                put_mc_se: None,
            };
            if method != TableMethod::Mc {
                row.call_lewis = Some(price_lewis(rn, &spec(k, OptionKind::Call), lewis)?.value);
                row.put_lewis = Some(price_lewis(rn, &spec(k, OptionKind::Put), lewis)?.value);
            }
            if let Some(d) = &draws {
                let c = mc_from_draws(d, &spec(k, OptionKind::Call));
                let p = mc_from_draws(d, &spec(k, OptionKind::Put));
                row.call_mc = Some(c.value);
                row.call_mc_se = c.std_error;
                row.put_mc = Some(p.value);
                row.put_mc_se = p.std_error;
            }
            Ok(row)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk_neutral::solve_esscher;

    fn rn() -> BgigParams {
        let p = BgigParams::new(558.753, 0.0443139, 2.53084, 439.902, 0.0242973, 2.26669).unwrap();
        solve_esscher(&p, 0.0, 1e-12).unwrap().rn_params
    }

    fn opt(strike: f64, kind: OptionKind) -> OptionSpec {
        OptionSpec { spot: 1.0, strike, maturity: 252.0, rate: 0.0, kind }
    }

    #[test]
    fn at_the_money_parity_and_known_values() {
        let rn = rn();
        let c = price_lewis(&rn, &opt(1.0, OptionKind::Call), &LewisConfig::default()).unwrap();
        let p = price_lewis(&rn, &opt(1.0, OptionKind::Put), &LewisConfig::default()).unwrap();
        assert!((c.value - p.value).abs() < 1e-14);
        // Independent quadrature of E[(e^X - 1)^+] for these parameters.
        assert!((c.value - 0.0612288).abs() < 5e-7, "{}", c.value);
        let deep = price_lewis(&rn, &opt(0.5, OptionKind::Call), &LewisConfig::default()).unwrap();
        assert!((deep.value - 0.5).abs() < 1e-6);
    }

    #[test]
    fn contour_choice() {
        let rn = rn();
        assert_eq!(lewis_contour(&rn, 1.1).unwrap(), 1.1);
        assert!(lewis_contour(&rn, 1.0).is_err());
        let tight = BgigParams::new(2.1, 1.0, 1.0, 3.0, 1.0, 1.0).unwrap();
        let v = lewis_contour(&tight, 1.1).unwrap();
        assert!(v > 1.0 && v < 1.05);
        let none = BgigParams::new(1.5, 1.0, 1.0, 3.0, 1.0, 1.0).unwrap();
        assert!(lewis_contour(&none, 1.1).is_err());
    }

    #[test]
    fn rate_enters_consistently() {
        let p = BgigParams::new(558.753, 0.0443139, 2.53084, 439.902, 0.0242973, 2.26669).unwrap();
        let r = 2e-4;
        let rn = solve_esscher(&p, r, 1e-12).unwrap().rn_params;
        let o = OptionSpec { spot: 1.0, strike: 1.05, maturity: 100.0, rate: r, kind: OptionKind::Call };
        let l = price_lewis(&rn, &o, &LewisConfig::default()).unwrap();
        let m = price_mc(&rn, &o, 20_000, 3).unwrap();
        assert!((l.value - m.value).abs() < 3.0 * m.std_error.unwrap(), "{} vs {}", l.value, m.value);
    }

    #[test]
    fn mc_requires_risk_neutral_parameters() {
        let p = BgigParams::new(558.753, 0.0443139, 2.53084, 439.902, 0.0242973, 2.26669).unwrap();
        assert!(matches!(price_mc(&p, &opt(1.0, OptionKind::Call), 1000, 1), Err(Error::Precondition(_))));
        assert!(price_mc(&rn(), &opt(1.0, OptionKind::Call), 10, 1).is_err());
    }

    #[test]
    fn fractional_maturity_uses_the_tabulated_law() {
        let rn = rn();
        let o = OptionSpec { spot: 1.0, strike: 1.0, maturity: 10.5, rate: 0.0, kind: OptionKind::Call };
        let l = price_lewis(&rn, &o, &LewisConfig::default()).unwrap();
        let m = price_mc(&rn, &o, 20_000, 9).unwrap();
        assert!((l.value - m.value).abs() < 3.0 * m.std_error.unwrap());
    }

    #[test]
    fn empty_and_duplicate_tables() {
        let rn = rn();
        let mc = McConfig { n_paths: 200, seed: 1 };
        assert!(price_table(&rn, &[], &mc, &LewisConfig::default()).unwrap().is_empty());
        let o = OptionSpec { maturity: 5.0, ..opt(1.0, OptionKind::Call) };
        let t = price_table(&rn, &[o, o], &mc, &LewisConfig::default()).unwrap();
        assert_eq!(t[0].0, t[1].0);
        assert_ne!(t[0].1.value, t[1].1.value);
    }
}
