//! The BGIG Lévy process: transition laws, path simulation and jumps.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{
    bgig_cumulants, bgig_ln_chf_analytic, bgig_sample, BgigParams, FourierInverter, InversionConfig, LevyDensity,
};
use crate::error::{Error, Result};
use crate::quad;
use crate::rng::{open01, substream};

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time must be positive and finite, got {t}")));
    }
    Ok(())
}

/// Phi(u)^t on the continuous branch of ln Phi.
pub fn transition_chf(params: &BgigParams, u: f64, t: f64) -> Result<C64> {
    params.validate()?;
    check_time(t)?;
    if u == 0.0 {
        return Ok(C64::new(1.0, 0.0));
    }
    Ok((bgig_ln_chf_analytic(params, C64::new(u, 0.0))? * t).exp())
}

/// Density of X_t, set up once for many evaluations.
#[derive(Debug, Clone)]
pub struct TransitionDensity {
    t: f64,
    mean: f64,
    sd: f64,
    inv: FourierInverter,
}

impl TransitionDensity {
    /// Resolved on mean +/- 40 standard deviations.
    pub fn new(params: &BgigParams, t: f64) -> Result<Self> {
        let c = bgig_cumulants(params)?;
        Self::with_config(params, t, &InversionConfig::new(40.0 * (t * c.k2).sqrt()))
    }

    pub fn with_config(params: &BgigParams, t: f64, cfg: &InversionConfig) -> Result<Self> {
        check_time(t)?;
        let c = bgig_cumulants(params)?;
        let (mean, sd) = (t * c.k1, (t * c.k2).sqrt());
        let p = *params;
        let inv = FourierInverter::new(
            move |u| Ok(bgig_ln_chf_analytic(&p, C64::new(u, 0.0))? * t),
            mean,
            sd,
            t * params.chf_decay_rate(),
            cfg,
        )?;
        Ok(TransitionDensity { t, mean, sd, inv })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    pub fn inverter(&self) -> &FourierInverter {
        &self.inv
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.inv.pdf(x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.inv.cdf(x)
    }
}

/// Density of X_t at x (one-off evaluation).
pub fn transition_pdf(params: &BgigParams, x: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let c = bgig_cumulants(params)?;
    let (mean, sd) = (t * c.k1, (t * c.k2).sqrt());
    let hw = (40.0 * sd).max(1.25 * (x - mean).abs());
    Ok(TransitionDensity::with_config(params, t, &InversionConfig::new(hw))?.pdf(x))
}

const TAB_NODES: usize = 4096;
const TAB_HALF_WIDTH_SD: f64 = 12.0;
const TAB_MAX_FOURIER_NODES: usize = 1 << 19;

/// Inverse-transform sampler for X_dt from its tabulated distribution function:
/// 4096 nodes on mean +/- 12 sd, monotone cubic Hermite interpolation with the
/// density as node slopes, exponential extrapolation beyond the table.
#[derive(Debug, Clone)]
pub struct TransitionSampler {
    x0: f64,
    dx: f64,
    cdf: Vec<f64>,
    slope: Vec<f64>,
    smoothing: f64,
}

impl TransitionSampler {
    pub fn new(params: &BgigParams, dt: f64) -> Result<Self> {
        check_time(dt)?;
        let c = bgig_cumulants(params)?;
        let (mean, sd) = (dt * c.k1, (dt * c.k2).sqrt());
        let hw = TAB_HALF_WIDTH_SD * sd;
        let dx = 2.0 * hw / (TAB_NODES - 1) as f64;
        let cfg = InversionConfig {
            tol: 1e-11,
            half_width: hw,
            max_nodes: TAB_MAX_FOURIER_NODES,
            allow_smoothing: true,
        };
        let dens = TransitionDensity::with_config(params, dt, &cfg)?;
        let smoothing = dens.inverter().smoothing_width();
        if smoothing > 0.1 * dx {
            return Err(Error::Tabulation(format!(
                "smoothing width {smoothing:e} exceeds a tenth of the grid spacing {dx:e} at dt = {dt}"
            )));
        }
        let x0 = mean - hw;
        let (pdf, mut cdf) = dens.inverter().grid(x0, dx, TAB_NODES);

        let total: f64 = pdf.iter().map(|v| v.abs()).sum::<f64>() * dx;
        let negative: f64 = pdf.iter().filter(|v| **v < 0.0).map(|v| -v).sum::<f64>() * dx;
        if negative > 1e-3 * total {
            return Err(Error::Tabulation(format!("clamped mass {negative:e} exceeds 0.1% at dt = {dt}")));
        }
        for k in 0..TAB_NODES {
            cdf[k] = cdf[k].clamp(0.0, 1.0);
            if k > 0 {
                if cdf[k] < cdf[k - 1] - 1e-8 {
                    return Err(Error::Tabulation(format!(
                        "distribution function decreases by {:e} at x = {}",
                        cdf[k - 1] - cdf[k],
                        x0 + k as f64 * dx
                    )));
                }
                cdf[k] = cdf[k].max(cdf[k - 1]);
            }
        }
        // Fritsch-Carlson limiting keeps the Hermite interpolant monotone.
        let mut slope: Vec<f64> = pdf.iter().map(|v| v.max(0.0)).collect();
        for k in 0..TAB_NODES - 1 {
            let sec = (cdf[k + 1] - cdf[k]) / dx;
            if sec <= 0.0 {
                slope[k] = 0.0;
                slope[k + 1] = 0.0;
                continue;
            }
            let (a, b) = (slope[k] / sec, slope[k + 1] / sec);
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                slope[k] = tau * a * sec;
                slope[k + 1] = tau * b * sec;
            }
        }
        Ok(TransitionSampler { x0, dx, cdf, slope, smoothing })
    }

    pub fn smoothing_width(&self) -> f64 {
        self.smoothing
    }

    /// Interpolated distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.cdf.len();
        let last = self.x0 + (n - 1) as f64 * self.dx;
        if x <= self.x0 {
            let (c, d) = (self.cdf[0], self.slope[0]);
            return if c > 0.0 && d > 0.0 { c * ((x - self.x0) * d / c).exp() } else { 0.0 };
        }
        if x >= last {
            let (c, d) = (1.0 - self.cdf[n - 1], self.slope[n - 1]);
            return if c > 0.0 && d > 0.0 { 1.0 - c * (-(x - last) * d / c).exp() } else { 1.0 };
        }
        let s = (x - self.x0) / self.dx;
        let k = (s.floor() as usize).min(n - 2);
        self.hermite(k, s - k as f64)
    }

    fn hermite(&self, k: usize, s: f64) -> f64 {
        let (c0, c1) = (self.cdf[k], self.cdf[k + 1]);
        let (m0, m1) = (self.slope[k] * self.dx, self.slope[k + 1] * self.dx);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * c0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * c1 + (s3 - s2) * m1
    }

    /// Quantile for u in (0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.cdf.len();
        if u <= self.cdf[0] {
            let (c, d) = (self.cdf[0], self.slope[0]);
            return if c > 0.0 && d > 0.0 { self.x0 + (u / c).ln() * c / d } else { self.x0 };
        }
        if u >= self.cdf[n - 1] {
            let last = self.x0 + (n - 1) as f64 * self.dx;
            let (c, d) = (1.0 - self.cdf[n - 1], self.slope[n - 1]);
            return if c > 0.0 && d > 0.0 { last - ((1.0 - u) / c).ln() * c / d } else { last };
        }
        // Last k with cdf[k] <= u.
        let k = self.cdf.partition_point(|&c| c <= u) - 1;
        let k = k.min(n - 2);
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.hermite(k, mid) <= u {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 {
                break;
            }
        }
        self.x0 + (k as f64 + 0.5 * (lo + hi)) * self.dx
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(open01(rng))
    }
}

/// Values of one path at increasing times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathGrid {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl PathGrid {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn terminal(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidParameter("time grid is empty".into()));
    }
    if !(times[0] >= 0.0) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("times must be finite and start at t >= 0".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("times must be strictly increasing".into()));
    }
    Ok(())
}

/// X_0 = 0, X_k = sum of k independent BGIG variates, k = 1..=horizon.
pub fn simulate_integer_grid<R: Rng + ?Sized>(params: &BgigParams, horizon: usize, rng: &mut R) -> Result<PathGrid> {
    if horizon < 1 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let mut values = Vec::with_capacity(horizon + 1);
    let mut x = 0.0;
    values.push(x);
    for _ in 0..horizon {
        x += bgig_sample(params, rng)?;
        values.push(x);
    }
    Ok(PathGrid { times: (0..=horizon).map(|k| k as f64).collect(), values })
}

/// Path simulator on an arbitrary grid, with one tabulated sampler per
/// distinct time step. X is 0 at time 0; a first time t0 > 0 gets the increment over [0, t0].
#[derive(Debug, Clone)]
pub struct GridSimulator {
    times: Vec<f64>,
    steps: Vec<Option<Arc<TransitionSampler>>>,
}

impl GridSimulator {
    pub fn new(params: &BgigParams, times: &[f64]) -> Result<Self> {
        params.validate()?;
        check_times(times)?;
        let mut cache: HashMap<String, Arc<TransitionSampler>> = HashMap::new();
        let mut steps = Vec::with_capacity(times.len());
        let mut prev = 0.0;
        for (i, &t) in times.iter().enumerate() {
            if i == 0 && t == 0.0 {
                steps.push(None);
                continue;
            }
            let dt = t - prev;
            prev = t;
            // Steps equal to 12 significant digits share a table.
            let key = format!("{dt:.11e}");
            let s = match cache.get(&key) {
                Some(s) => s.clone(),
                None => {
                    let s = Arc::new(TransitionSampler::new(params, dt)?);
                    cache.insert(key, s.clone());
                    s
                }
            };
            steps.push(Some(s));
        }
        Ok(GridSimulator { times: times.to_vec(), steps })
    }

    pub fn path<R: Rng + ?Sized>(&self, rng: &mut R) -> PathGrid {
        let mut x = 0.0;
        let values = self
            .steps
            .iter()
            .map(|s| {
                if let Some(s) = s {
                    x += s.sample(rng);
                }
                x
            })
            .collect();
        PathGrid { times: self.times.clone(), values }
    }
}

/// One path on an arbitrary increasing time grid.
pub fn simulate_grid<R: Rng + ?Sized>(params: &BgigParams, times: &[f64], rng: &mut R) -> Result<PathGrid> {
    Ok(GridSimulator::new(params, times)?.path(rng))
}

/// `n_paths` integer-grid paths; path i uses substream (seed, i).
pub fn simulate_integer_paths(params: &BgigParams, horizon: usize, n_paths: usize, seed: u64) -> Result<Vec<PathGrid>> {
    (0..n_paths)
        .into_par_iter()
        .map(|i| simulate_integer_grid(params, horizon, &mut substream(seed, i as u64)))
        .collect()
}

/// `n_paths` paths on an arbitrary grid; path i uses substream (seed, i).
pub fn simulate_grid_paths(params: &BgigParams, times: &[f64], n_paths: usize, seed: u64) -> Result<Vec<PathGrid>> {
    let sim = GridSimulator::new(params, times)?;
    Ok((0..n_paths).into_par_iter().map(|i| sim.path(&mut substream(seed, i as u64))).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpRecord {
    pub time: f64,
    pub size: f64,
}

/// Jumps of size |x| >= eps on [0, horizon], sorted by time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpPath {
    pub horizon: f64,
    pub eps: f64,
    pub jumps: Vec<JumpRecord>,
}

/// Tail measure N(x) = pi([x, inf)) of one side on log-spaced panels.
#[derive(Debug, Clone)]
struct SideTable {
    ln_x: Vec<f64>,
    tail: Vec<f64>,
}

impl SideTable {
    fn new(levy: &LevyDensity, side: f64, eps: f64, x_hi: f64) -> Result<Self> {
        const PANEL: f64 = 0.02;
        let (l0, l1) = (eps.ln(), x_hi.ln());
        let n = ((l1 - l0) / PANEL).ceil() as usize;
        let h = (l1 - l0) / n as f64;
        let (gx, gw) = quad::gl16();
        let mut pieces = vec![0.0; n];
        for (k, piece) in pieces.iter_mut().enumerate() {
            let c = l0 + (k as f64 + 0.5) * h;
            let mut s = 0.0;
            for (x, w) in gx.iter().zip(gw) {
                let t = c + 0.5 * h * x;
                let v = t.exp();
                s += 0.5 * h * w * v * levy.eval(side * v)?;
            }
            *piece = s;
        }
        let mut tail = vec![0.0; n + 1];
        for k in (0..n).rev() {
            tail[k] = tail[k + 1] + pieces[k];
        }
        let ln_x = (0..=n).map(|k| l0 + k as f64 * h).collect();
        Ok(SideTable { ln_x, tail })
    }

    fn mass(&self) -> f64 {
        self.tail[0]
    }

    /// x with N(x) = v for v in (0, mass].
    fn invert(&self, v: f64) -> f64 {
        let n = self.tail.len();
        // tail is decreasing: first index with tail < v, minus one.
        let k = self.tail.partition_point(|&t| t >= v).clamp(1, n - 1) - 1;
        let (t0, t1) = (self.tail[k], self.tail[k + 1]);
        let (a, b) = (self.ln_x[k], self.ln_x[k + 1]);
        let w = if t1 > 0.0 {
            (t0.ln() - v.ln()) / (t0.ln() - t1.ln())
        } else {
            (t0 - v) / (t0 - t1)
        };
        (a + w.clamp(0.0, 1.0) * (b - a)).exp()
    }
}

/// Sampler for the jumps of size at least eps, reusable across horizons.
#[derive(Debug, Clone)]
pub struct JumpSampler {
    eps: f64,
    plus: SideTable,
    minus: SideTable,
}

impl JumpSampler {
    pub fn new(params: &BgigParams, eps: f64) -> Result<Self> {
        params.validate()?;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("jump threshold must be positive, got {eps}")));
        }
        // Beyond eps + 80/a the measure is below e^{-40} of its value at eps.
        let hi_p = eps + 80.0 / params.plus.a;
        let hi_m = eps + 80.0 / params.minus.a;
        let levy = LevyDensity::new(params, eps, hi_p.max(hi_m))?;
        Ok(JumpSampler {
            eps,
            plus: SideTable::new(&levy, 1.0, eps, hi_p)?,
            minus: SideTable::new(&levy, -1.0, eps, hi_m)?,
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// (pi([eps, inf)), pi((-inf, -eps])).
    pub fn masses(&self) -> (f64, f64) {
        (self.plus.mass(), self.minus.mass())
    }

    pub fn sample<R: Rng + ?Sized>(&self, horizon: f64, rng: &mut R) -> Result<JumpPath> {
        check_time(horizon)?;
        let mut jumps = Vec::new();
        for (table, sign) in [(&self.plus, 1.0), (&self.minus, -1.0)] {
            let mean = horizon * table.mass();
            if !(mean > 0.0) {
                continue;
            }
            let count = Poisson::new(mean)
                .map_err(|e| Error::Sampling(format!("Poisson mean {mean}: {e}")))?
                .sample(rng) as u64;
            for _ in 0..count {
                let size = table.invert(open01(rng) * table.mass()).max(self.eps);
                jumps.push(JumpRecord { time: horizon * open01(rng), size: sign * size });
            }
        }
        jumps.sort_by(|a, b| a.time.total_cmp(&b.time));
        Ok(JumpPath { horizon, eps: self.eps, jumps })
    }
}

/// Jumps of size at least eps over [0, horizon].
pub fn sample_levy_jumps<R: Rng + ?Sized>(params: &BgigParams, horizon: f64, eps: f64, rng: &mut R) -> Result<JumpPath> {
    JumpSampler::new(params, eps)?.sample(horizon, rng)
}

/// U_n^+ = #{jumps >= n^-2} / (n T) and U_n^- = #{jumps <= -n^-2} / (n T).
pub fn jump_count_estimator(path: &JumpPath, n: u32) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let thr = 1.0 / (n as f64 * n as f64);
    if path.eps > thr {
        return Err(Error::Precondition(format!(
            "jumps were truncated at {} > n^-2 = {thr}",
            path.eps
        )));
    }
    let up = path.jumps.iter().filter(|j| j.size >= thr).count();
    let down = path.jumps.iter().filter(|j| j.size <= -thr).count();
    let norm = n as f64 * path.horizon;
    Ok((up as f64 / norm, down as f64 / norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::bgig_chf;

    fn p123() -> BgigParams {
        BgigParams::new(1.0, 2.0, 1.0, 3.0, 4.0, 5.0).unwrap()
    }

    #[test]
    fn chf_exponent_laws() {
        let p = p123();
        let one = bgig_chf(&p, 1.0).unwrap();
        assert!((transition_chf(&p, 1.0, 1.0).unwrap() - one).norm() < 1e-15);
        assert!((transition_chf(&p, 1.0, 2.0).unwrap() - one * one).norm() < 1e-14);
        let half = transition_chf(&p, 1.0, 0.5).unwrap();
        assert!((half.norm_sqr() - one.norm()).abs() < 1e-14);
        assert!(transition_chf(&p, 1.0, 0.0).is_err());
    }

    #[test]
    fn transition_mass_and_mean() {
        let p = p123();
        let k1 = bgig_cumulants(&p).unwrap().k1;
        for &t in &[0.5, 2.0] {
            let d = TransitionDensity::new(&p, t).unwrap();
            let (lo, hi) = (d.mean() - 25.0 * d.sd(), d.mean() + 25.0 * d.sd());
            let mass = quad::integrate_panels(|x| d.pdf(x), lo, hi, 100);
            let mean = quad::integrate_panels(|x| x * d.pdf(x), lo, hi, 100);
            assert!((mass - 1.0).abs() < 1e-6, "t={t} mass {mass}");
            assert!((mean / (t * k1) - 1.0).abs() < 1e-5, "t={t} mean {mean}");
        }
        let a = transition_pdf(&p, 0.3, 1.0).unwrap();
        let b = crate::distributions::bgig_pdf(&p, 0.3).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn tabulated_quantile_inverts_cdf() {
        let p = p123();
        let s = TransitionSampler::new(&p, 0.5).unwrap();
        let d = TransitionDensity::new(&p, 0.5).unwrap();
        for &u in &[1e-6, 0.01, 0.3, 0.5, 0.9, 0.999] {
            let x = s.quantile(u);
            assert!((s.cdf(x) - u).abs() < 1e-9, "u={u}");
            assert!((d.cdf(x) - u).abs() < 1e-6, "u={u}: {}", d.cdf(x));
        }
    }

    #[test]
    fn grid_paths_are_reproducible_and_start_at_zero() {
        let p = p123();
        let times = [0.0, 0.25, 0.5, 1.5];
        let a = simulate_grid_paths(&p, &times, 8, 42).unwrap();
        let b = simulate_grid_paths(&p, &times, 8, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|g| g.values[0] == 0.0));
        assert!(simulate_grid(&p, &[0.0, 1.0, 1.0], &mut substream(1, 0)).is_err());
        let g = simulate_integer_grid(&p, 5, &mut substream(1, 0)).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g.values[0], 0.0);
    }

    #[test]
    fn jumps_respect_threshold_and_estimator_precondition() {
        let p = p123();
        let path = sample_levy_jumps(&p, 5.0, 1e-3, &mut substream(3, 0)).unwrap();
        assert!(!path.jumps.is_empty());
        assert!(path.jumps.iter().all(|j| j.size.abs() >= 1e-3 && j.time >= 0.0 && j.time <= 5.0));
        assert!(path.jumps.windows(2).all(|w| w[0].time <= w[1].time));
        assert!(jump_count_estimator(&path, 10).is_ok());
        assert!(jump_count_estimator(&path, 100).is_err());
        let empty = JumpPath { horizon: 1.0, eps: 1e-6, jumps: vec![] };
        assert_eq!(jump_count_estimator(&empty, 10).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn jump_table_inverts_tail_measure() {
        let p = p123();
        let s = JumpSampler::new(&p, 1e-4).unwrap();
        let (m, _) = s.masses();
        let levy = LevyDensity::new(&p, 1e-4, 100.0).unwrap();
        let direct = levy.integrate_side(1.0, 1e-4, 81.0, |_| 1.0).unwrap();
        assert!((m / direct - 1.0).abs() < 1e-8);
        let x = s.plus.invert(0.5 * m);
        let upper = levy.integrate_side(1.0, x, 81.0, |_| 1.0).unwrap();
        assert!((upper / (0.5 * m) - 1.0).abs() < 1e-4);
    }
}
