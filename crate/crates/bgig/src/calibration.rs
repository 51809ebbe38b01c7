//! Two-stage calibration from a price series: tail rates a+- from the sample
//! extremes, then (b+-, p+-) by matching the first four moments.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::{Matrix3, Owned, Vector3, U3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{bgig_cumulants, gig_cumulants, BgigParams, CumulantSet, GigParams};
use crate::error::{Error, Result};
use crate::quad;
use crate::risk_neutral::{solve_esscher, EsscherSolution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub values: Vec<f64>,
    pub delta: f64,
}

impl ReturnSeries {
    pub fn new(values: Vec<f64>, delta: f64) -> Result<Self> {
        let s = ReturnSeries { values, delta };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Degenerate("return series is empty".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("return series contains non-finite values".into()));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("spacing must be positive, got {}", self.delta)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Mean, variance, standardised skewness and kurtosis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentTargets {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl MomentTargets {
    pub fn to_array(&self) -> [f64; 4] {
        [self.m1, self.m2, self.m3, self.m4]
    }

    pub fn validate(&self) -> Result<()> {
        if !self.to_array().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite moment targets {self:?}")));
        }
        if !(self.m2 > 0.0) {
            return Err(Error::Degenerate(format!("variance target must be positive, got {}", self.m2)));
        }
        Ok(())
    }

    /// Moments of the increment over delta from unit-time cumulants.
    pub fn from_cumulants(c: &CumulantSet, delta: f64) -> Self {
        MomentTargets {
            m1: delta * c.k1,
            m2: delta * c.k2,
            m3: c.k3 / (c.k2.powf(1.5) * delta.sqrt()),
            m4: 3.0 + c.k4 / (c.k2 * c.k2 * delta),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub params: BgigParams,
    pub targets: MomentTargets,
    pub fitted: MomentTargets,
    pub residual_norm: f64,
    pub n_used: usize,
    pub trimmed: usize,
}

/// values[k] = ln(prices[k+1] / prices[k]).
pub fn log_returns(prices: &[f64], delta: f64) -> Result<ReturnSeries> {
    if prices.len() < 2 {
        return Err(Error::Degenerate(format!("need at least 2 prices, got {}", prices.len())));
    }
    if let Some(p) = prices.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return Err(Error::Domain(format!("prices must be positive and finite, got {p}")));
    }
    ReturnSeries::new(prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect(), delta)
}

/// Drops the floor(q n) largest and floor(q n) smallest values, keeping order.
pub fn trim_outliers(s: &ReturnSeries, q: f64) -> Result<ReturnSeries> {
    s.validate()?;
    if !(0.0..0.5).contains(&q) {
        return Err(Error::InvalidParameter(format!("trim fraction must lie in [0, 0.5), got {q}")));
    }
    let n = s.len();
    let k = (q * n as f64).floor() as usize;
    if 2 * k >= n {
        return Err(Error::Degenerate(format!("trimming {k} per side leaves nothing of {n} values")));
    }
    if k == 0 {
        return Ok(s.clone());
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| s.values[i].total_cmp(&s.values[j]).then(i.cmp(&j)));
    let mut keep = vec![true; n];
    for &i in idx[..k].iter().chain(&idx[n - k..]) {
        keep[i] = false;
    }
    let values = s.values.iter().zip(&keep).filter(|(_, k)| **k).map(|(v, _)| *v).collect();
    ReturnSeries::new(values, s.delta)
}

/// a+ = 2 ln n / max, a- = -2 ln n / min, for unit spacing.
pub fn estimate_a(s: &ReturnSeries) -> Result<(f64, f64)> {
    if s.delta != 1.0 {
        return Err(Error::Precondition(format!(
            "the extreme-value estimator assumes unit spacing, got {}; use estimate_a_any_spacing to override",
            s.delta
        )));
    }
    estimate_a_any_spacing(s)
}

/// The extreme-value estimator applied to the raw returns whatever their spacing.
pub fn estimate_a_any_spacing(s: &ReturnSeries) -> Result<(f64, f64)> {
    s.validate()?;
    let n = s.len();
    if n < 2 {
        return Err(Error::Degenerate("need at least 2 returns".into()));
    }
    let max = s.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = s.values.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || !(min < 0.0) {
        return Err(Error::Degenerate(format!("need a positive maximum and a negative minimum, got {max}, {min}")));
    }
    let l = 2.0 * (n as f64).ln();
    Ok((l / max, -l / min))
}

/// Sample mean, variance, skewness and kurtosis with divisor n.
pub fn moment_targets(s: &ReturnSeries) -> Result<MomentTargets> {
    s.validate()?;
    let n = s.len();
    if n < 4 {
        return Err(Error::Degenerate(format!("need at least 4 returns, got {n}")));
    }
    let nf = n as f64;
    let m1 = s.values.iter().sum::<f64>() / nf;
    let (mut c2, mut c3, mut c4) = (0.0, 0.0, 0.0);
    for v in &s.values {
        let d = v - m1;
        let d2 = d * d;
        c2 += d2;
        c3 += d2 * d;
        c4 += d2 * d2;
    }
    let (c2, c3, c4) = (c2 / nf, c3 / nf, c4 / nf);
    // Rounding leaves a variance of order (eps * |x|)^2 in a constant series.
    let scale = s.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(c2.sqrt() > 64.0 * f64::EPSILON * scale) {
        return Err(Error::Degenerate("returns have zero variance".into()));
    }
    Ok(MomentTargets { m1, m2: c2, m3: c3 / c2.powf(1.5), m4: c4 / (c2 * c2) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Largest acceptable Euclidean norm of the relative residuals.
    pub residual_ceiling: f64,
    pub max_simplex_iters: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { residual_ceiling: 1e-2, max_simplex_iters: 5000 }
    }
}

/// Moment equations in the reduced coordinates y = (ln mu+, p+, p-), where
/// mu+ is the mean of the positive side. The mean equation fixes the negative
/// side mean to mu+ - m1/delta and each b solves its side mean, so only the
/// variance, skewness and kurtosis equations are left to the optimiser.
struct MomentSystem {
    targets: MomentTargets,
    a_plus: f64,
    a_minus: f64,
    delta: f64,
}

impl MomentSystem {
    fn side_mean(a: f64, ln_b: f64, p: f64) -> f64 {
        gig_cumulants(&GigParams { a, b: ln_b.exp(), p }).map(|c| c[0]).unwrap_or(f64::NAN)
    }

    /// ln b giving the side mean mu; the mean increases with b.
    fn solve_b(a: f64, p: f64, mu: f64) -> Option<f64> {
        if !(mu > 0.0) {
            return None;
        }
        let f = |lb: f64| Self::side_mean(a, lb, p).ln() - mu.ln();
        let (lo, hi) = (-60.0, 60.0);
        if !(f(lo) < 0.0 && f(hi) > 0.0) {
            return None;
        }
        quad::brent(f, lo, hi, 1e-15, 300).ok()
    }

    fn params(&self, y: &[f64; 3]) -> Option<BgigParams> {
        let mu = y[0].exp();
        let lbp = Self::solve_b(self.a_plus, y[1], mu)?;
        let lbm = Self::solve_b(self.a_minus, y[2], mu - self.targets.m1 / self.delta)?;
        BgigParams::new(self.a_plus, lbp.exp(), y[1], self.a_minus, lbm.exp(), y[2]).ok()
    }

    fn fitted(&self, p: &BgigParams) -> Option<MomentTargets> {
        let c = bgig_cumulants(p).ok()?;
        let m = MomentTargets::from_cumulants(&c, self.delta);
        m.to_array().iter().all(|v| v.is_finite()).then_some(m)
    }

    fn relative(&self, m: &MomentTargets) -> [f64; 4] {
        let t = self.targets.to_array();
        let f = m.to_array();
        std::array::from_fn(|i| (f[i] - t[i]) / t[i].abs().max(1e-12))
    }

    fn reduced_residuals(&self, y: &[f64; 3]) -> Option<[f64; 3]> {
        let r = self.relative(&self.fitted(&self.params(y)?)?);
        Some([r[1], r[2], r[3]])
    }

    fn seeds(&self) -> Vec<[f64; 3]> {
        // Bilateral gamma limit (b -> 0): mean 2p/a and variance 4p/a^2 per side.
        let (ap, am) = (self.a_plus, self.a_minus);
        let k1 = self.targets.m1 / self.delta;
        let k2 = self.targets.m2 / self.delta;
        // p+/ap - p-/am = k1/2, p+/ap^2 + p-/am^2 = k2/4
        let det = 1.0 / (ap * am * am) + 1.0 / (am * ap * ap);
        let pp = (0.5 * k1 / (am * am) + 0.25 * k2 / am) / det;
        let pm = (0.25 * k2 / ap - 0.5 * k1 / (ap * ap)) / det;
        let (pp, pm) = (pp.max(0.5), pm.max(0.5));
        let sd = k2.sqrt();
        let seed = |p: f64, q: f64| -> [f64; 3] {
            // The bilateral gamma means are lower bounds on the side means when p > 0.
            let mu = (1.1 * 2.0 * p.max(0.0) / ap)
                .max(1.1 * 2.0 * q.max(0.0) / am + k1)
                .max(sd)
                .max(k1 + sd);
            [mu.ln(), p, q]
        };
        vec![
            seed(pp, pm),
            seed(2.0 * pp, 2.0 * pm),
            seed(0.5 * pp, 0.5 * pm),
            seed(pp - 5.0, pm - 5.0),
            seed(-5.0, -5.0),
            seed(-50.0, -20.0),
            seed(0.5, 0.5),
            seed(pp + 5.0, pm + 5.0),
        ]
    }
}

impl CostFunction for &MomentSystem {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, y: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self
            .reduced_residuals(&[y[0], y[1], y[2]])
            .map(|r| r.iter().map(|v| v * v).sum())
            .unwrap_or(1e10))
    }
}

struct Polish<'a> {
    sys: &'a MomentSystem,
    y: Vector3<f64>,
}

impl LeastSquaresProblem<f64, U3, U3> for Polish<'_> {
    type ResidualStorage = Owned<f64, U3>;
    type JacobianStorage = Owned<f64, U3, U3>;
    type ParameterStorage = Owned<f64, U3>;

    fn set_params(&mut self, y: &Vector3<f64>) {
        self.y = *y;
    }

    fn params(&self) -> Vector3<f64> {
        self.y
    }

    fn residuals(&self) -> Option<Vector3<f64>> {
        self.sys.reduced_residuals(&[self.y[0], self.y[1], self.y[2]]).map(Vector3::from)
    }

    fn jacobian(&self) -> Option<Matrix3<f64>> {
        let mut j = Matrix3::zeros();
        for c in 0..3 {
            let h = 1e-6 * self.y[c].abs().max(1.0);
            let mut yp = [self.y[0], self.y[1], self.y[2]];
            let mut ym = yp;
            yp[c] += h;
            ym[c] -= h;
            let (rp, rm) = (self.sys.reduced_residuals(&yp)?, self.sys.reduced_residuals(&ym)?);
            for r in 0..3 {
                j[(r, c)] = (rp[r] - rm[r]) / (2.0 * h);
            }
        }
        Some(j)
    }
}

struct Candidate {
    params: BgigParams,
    fitted: MomentTargets,
    norm: f64,
}

fn fit_from(sys: &MomentSystem, y0: [f64; 3], cfg: &FitConfig) -> Option<Candidate> {
    let start = y0.to_vec();
    let mut simplex = vec![start.clone()];
    for i in 0..3 {
        let mut v = start.clone();
        v[i] += if i == 0 { 0.5 } else { 2.0 };
        simplex.push(v);
    }
    let nm = NelderMead::new(simplex).with_sd_tolerance(1e-16).ok()?;
    let res = Executor::new(sys, nm).configure(|s| s.max_iters(cfg.max_simplex_iters)).run().ok()?;
    let y = res.state().get_best_param()?.clone();
    let (polished, _) =
        LevenbergMarquardt::new().minimize(Polish { sys, y: Vector3::new(y[0], y[1], y[2]) });
    let best = [&[polished.y[0], polished.y[1], polished.y[2]], &[y[0], y[1], y[2]]]
        .into_iter()
        .filter_map(|y| {
            let params = sys.params(y)?;
            let fitted = sys.fitted(&params)?;
            let norm = sys.relative(&fitted).iter().map(|v| v * v).sum::<f64>().sqrt();
            norm.is_finite().then_some(Candidate { params, fitted, norm })
        })
        .min_by(|a, b| a.norm.total_cmp(&b.norm))?;
    Some(best)
}

/// Least squares on the relative residuals of the four moment equations with
/// a+- fixed, multi-started from eight deterministic seeds.
pub fn fit_moments(
    targets: &MomentTargets,
    a_hat: (f64, f64),
    delta: f64,
    init: Option<&BgigParams>,
    cfg: &FitConfig,
) -> Result<CalibrationResult> {
    targets.validate()?;
    if !(a_hat.0 > 0.0 && a_hat.1 > 0.0) {
        return Err(Error::InvalidParameter(format!("tail rates must be positive, got {a_hat:?}")));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("spacing must be positive, got {delta}")));
    }
    if targets.m4 < 1.0 + targets.m3 * targets.m3 {
        return Err(Error::Infeasible(format!(
            "kurtosis {} below the bound 1 + skewness^2 = {}",
            targets.m4,
            1.0 + targets.m3 * targets.m3
        )));
    }
    let sys = MomentSystem { targets: *targets, a_plus: a_hat.0, a_minus: a_hat.1, delta };
    let mut seeds = sys.seeds();
    if let Some(p) = init {
        if let Ok(c) = gig_cumulants(&p.plus) {
            seeds.insert(0, [c[0].ln(), p.plus.p, p.minus.p]);
        }
    }
    let candidates: Vec<Option<Candidate>> = seeds.par_iter().map(|y| fit_from(&sys, *y, cfg)).collect();
    let best = candidates
        .into_iter()
        .flatten()
        .min_by(|a, b| {
            a.norm.total_cmp(&b.norm).then_with(|| {
                let (x, y) = (a.params.to_array(), b.params.to_array());
                x.iter().zip(&y).map(|(u, v)| u.total_cmp(v)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
            })
        })
        .ok_or_else(|| Error::Infeasible("no start point produced a valid parameter set".into()))?;
    if !(best.norm <= cfg.residual_ceiling) {
        return Err(Error::Infeasible(format!(
            "best moment fit has residual norm {:e} above {:e}",
            best.norm, cfg.residual_ceiling
        )));
    }
    Ok(CalibrationResult {
        params: best.params,
        targets: *targets,
        fitted: best.fitted,
        residual_norm: best.norm,
        n_used: 0,
        trimmed: 0,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    /// Estimate a+- on the untrimmed returns.
    pub untrimmed_extremes: bool,
    /// Apply the extreme-value estimator when the spacing is not 1.
    pub allow_nonunit_delta: bool,
    pub fit: FitConfig,
}

/// Prices to physical and risk-neutral parameters.
pub fn calibrate(prices: &[f64], delta: f64, trim_q: f64, r: f64) -> Result<(CalibrationResult, EsscherSolution)> {
    calibrate_with(prices, delta, trim_q, r, &CalibrationOptions::default())
}

pub fn calibrate_with(
    prices: &[f64],
    delta: f64,
    trim_q: f64,
    r: f64,
    opts: &CalibrationOptions,
) -> Result<(CalibrationResult, EsscherSolution)> {
    if prices.len() < 5 {
        return Err(Error::Degenerate(format!("need at least 5 prices, got {}", prices.len())));
    }
    let raw = log_returns(prices, delta)?;
    let trimmed = trim_outliers(&raw, trim_q)?;
    let extremes = if opts.untrimmed_extremes { &raw } else { &trimmed };
    let a_hat = if opts.allow_nonunit_delta { estimate_a_any_spacing(extremes)? } else { estimate_a(extremes)? };
    let targets = moment_targets(&trimmed)?;
    let mut fit = fit_moments(&targets, a_hat, delta, None, &opts.fit)?;
    fit.n_used = trimmed.len();
    fit.trimmed = raw.len() - trimmed.len();
    let ess = solve_esscher(&fit.params, r, 1e-12)?;
    Ok((fit, ess))
}

/// Flat record of a calibration run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub a_plus: f64,
    pub b_plus: f64,
    pub p_plus: f64,
    pub a_minus: f64,
    pub b_minus: f64,
    pub p_minus: f64,
    pub theta_star: f64,
    pub rn_a_plus: f64,
    pub rn_a_minus: f64,
    pub residual_norm: f64,
    pub n_used: usize,
    pub trimmed: usize,
}

impl CalibrationReport {
    pub fn new(cal: &CalibrationResult, ess: &EsscherSolution) -> Self {
        let (p, m) = (cal.params.plus, cal.params.minus);
        CalibrationReport {
            a_plus: p.a,
            b_plus: p.b,
            p_plus: p.p,
            a_minus: m.a,
            b_minus: m.b,
            p_minus: m.p,
            theta_star: ess.theta_star,
            rn_a_plus: ess.rn_params.plus.a,
            rn_a_minus: ess.rn_params.minus.a,
            residual_norm: cal.residual_norm,
            n_used: cal.n_used,
            trimmed: cal.trimmed,
        }
    }

    pub fn params(&self) -> Result<BgigParams> {
        BgigParams::new(self.a_plus, self.b_plus, self.p_plus, self.a_minus, self.b_minus, self.p_minus)
    }

    pub fn rn_params(&self) -> Result<BgigParams> {
        BgigParams::new(self.rn_a_plus, self.b_plus, self.p_plus, self.rn_a_minus, self.b_minus, self.p_minus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_returns_basics() {
        let s = log_returns(&[2.0, 2.0, 2.0], 1.0).unwrap();
        assert_eq!(s.values, vec![0.0, 0.0]);
        let e = std::f64::consts::E;
        let s = log_returns(&[1.0, e, e * e], 1.0).unwrap();
        assert!((s.values[0] - 1.0).abs() < 1e-15 && (s.values[1] - 1.0).abs() < 1e-15);
        assert!(log_returns(&[1.0, 0.0, 2.0], 1.0).is_err());
        assert!(log_returns(&[1.0], 1.0).is_err());
    }

    #[test]
    fn trimming_counts_and_order() {
        let v: Vec<f64> = (0..200).map(|k| ((k * 37) % 200) as f64 - 100.0).collect();
        let s = ReturnSeries::new(v.clone(), 1.0).unwrap();
        assert_eq!(trim_outliers(&s, 0.0).unwrap(), s);
        let t = trim_outliers(&s, 0.01).unwrap();
        assert_eq!(t.len(), 196);
        let kept: Vec<f64> = v.iter().cloned().filter(|x| *x > -99.0 && *x < 98.0).collect();
        assert_eq!(t.values, kept);
        assert!(trim_outliers(&s, 0.5).is_err());
        let t = trim_outliers(&s, 0.499).unwrap();
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn extreme_value_estimator() {
        let s = ReturnSeries::new(vec![0.01, -0.02, 0.005, 0.03, -0.01], 1.0).unwrap();
        let (ap, am) = estimate_a(&s).unwrap();
        let l = 2.0 * 5f64.ln();
        assert!((ap - l / 0.03).abs() < 1e-12 && (am - l / 0.02).abs() < 1e-12);
        let neg = ReturnSeries::new(s.values.iter().map(|v| -v).collect(), 1.0).unwrap();
        let (bp, bm) = estimate_a(&neg).unwrap();
        assert!((bp - am).abs() < 1e-12 && (bm - ap).abs() < 1e-12);
        let pos = ReturnSeries::new(vec![0.1, 0.2, 0.3], 1.0).unwrap();
        assert!(matches!(estimate_a(&pos), Err(Error::Degenerate(_))));
        let spaced = ReturnSeries::new(s.values.clone(), 0.5).unwrap();
        assert!(estimate_a(&spaced).is_err());
        assert!(estimate_a_any_spacing(&spaced).is_ok());
    }

    #[test]
    fn sample_moments() {
        let s = ReturnSeries::new(vec![0.3, -0.3, 0.3, -0.3], 1.0).unwrap();
        let m = moment_targets(&s).unwrap();
        assert!(m.m1.abs() < 1e-15 && m.m3.abs() < 1e-12 && (m.m4 - 1.0).abs() < 1e-12);
        let c = ReturnSeries::new(vec![0.1; 6], 1.0).unwrap();
        assert!(moment_targets(&c).is_err());
    }

    #[test]
    fn round_trip_from_known_parameters() {
        let p = BgigParams::new(150.0, 0.02, 1.5, 120.0, 0.05, 0.8).unwrap();
        let t = MomentTargets::from_cumulants(&bgig_cumulants(&p).unwrap(), 1.0);
        let fit = fit_moments(&t, (150.0, 120.0), 1.0, None, &FitConfig::default()).unwrap();
        for (f, g) in fit.fitted.to_array().iter().zip(t.to_array()) {
            assert!((f / g - 1.0).abs() < 1e-6, "{f} vs {g}");
        }
        let again = MomentTargets::from_cumulants(&bgig_cumulants(&fit.params).unwrap(), 1.0);
        assert_eq!(again, fit.fitted);
    }

    #[test]
    fn infeasible_targets_fail() {
        let t = MomentTargets { m1: 1e-4, m2: 1e-4, m3: -2.0, m4: 1.0001 };
        assert!(matches!(
            fit_moments(&t, (500.0, 400.0), 1.0, None, &FitConfig::default()),
            Err(Error::Infeasible(_))
        ));
    }
}
