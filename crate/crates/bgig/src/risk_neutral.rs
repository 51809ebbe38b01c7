//! Martingale condition and the Esscher transform.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::distributions::{bgig_chf_analytic, bgig_ln_chf_analytic, BgigParams, GigParams};
use crate::error::{Error, Result};
use crate::quad;

const SCAN_POINTS: usize = 64;
const EDGE_SHRINK: f64 = 1e-9;
const THETA_TOL: f64 = 1e-12;

/// E[exp(X_1)] - exp(r); zero when the discounted exp-BGIG price is a martingale.
pub fn martingale_gap(params: &BgigParams, r: f64) -> Result<f64> {
    params.validate()?;
    if !(params.plus.a > 2.0) {
        return Err(Error::Domain(format!("martingale condition needs a+ > 2, got {}", params.plus.a)));
    }
    Ok(bgig_chf_analytic(params, C64::new(0.0, -1.0))?.re - r.exp())
}

/// Esscher parameter, the risk-neutral law it induces, and the residual of
/// ln Phi(-i(theta+1)) - ln Phi(-i theta) - r at the solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "EsscherRecord", into = "EsscherRecord")]
pub struct EsscherSolution {
    pub theta_star: f64,
    pub rn_params: BgigParams,
    pub residual: f64,
}

#[derive(Serialize, Deserialize)]
struct EsscherRecord {
    theta_star: f64,
    rn_a_plus: f64,
    rn_b_plus: f64,
    rn_p_plus: f64,
    rn_a_minus: f64,
    rn_b_minus: f64,
    rn_p_minus: f64,
    residual: f64,
}

impl From<EsscherSolution> for EsscherRecord {
    fn from(s: EsscherSolution) -> Self {
        let (p, m) = (s.rn_params.plus, s.rn_params.minus);
        EsscherRecord {
            theta_star: s.theta_star,
            rn_a_plus: p.a,
            rn_b_plus: p.b,
            rn_p_plus: p.p,
            rn_a_minus: m.a,
            rn_b_minus: m.b,
            rn_p_minus: m.p,
            residual: s.residual,
        }
    }
}

impl From<EsscherRecord> for EsscherSolution {
    fn from(r: EsscherRecord) -> Self {
        EsscherSolution {
            theta_star: r.theta_star,
            rn_params: BgigParams {
                plus: GigParams { a: r.rn_a_plus, b: r.rn_b_plus, p: r.rn_p_plus },
                minus: GigParams { a: r.rn_a_minus, b: r.rn_b_minus, p: r.rn_p_minus },
            },
            residual: r.residual,
        }
    }
}

impl EsscherSolution {
    /// True when a+* > 2, so that `martingale_gap` can be evaluated under the
    /// risk-neutral law.
    pub fn martingale_checkable(&self) -> bool {
        self.rn_params.plus.a > 2.0
    }
}

/// The admissible interval (-a-/2, a+/2 - 1) for theta.
pub fn esscher_interval(params: &BgigParams) -> Result<(f64, f64)> {
    let lo = -0.5 * params.minus.a;
    let hi = 0.5 * params.plus.a - 1.0;
    if !(hi > lo) {
        return Err(Error::Domain(format!("Esscher interval ({lo}, {hi}) is empty")));
    }
    Ok((lo, hi))
}

/// ln Phi(-i(theta+1)) - ln Phi(-i theta) - r.
pub fn esscher_equation(params: &BgigParams, theta: f64, r: f64) -> Result<f64> {
    let a = bgig_ln_chf_analytic(params, C64::new(0.0, -(theta + 1.0)))?;
    let b = bgig_ln_chf_analytic(params, C64::new(0.0, -theta))?;
    Ok(a.re - b.re - r)
}

/// Risk-neutral parameters (a+ - 2 theta, b+, p+, a- + 2 theta, b-, p-).
pub fn esscher_params(params: &BgigParams, theta: f64) -> Result<BgigParams> {
    let rn = BgigParams {
        plus: GigParams { a: params.plus.a - 2.0 * theta, ..params.plus },
        minus: GigParams { a: params.minus.a + 2.0 * theta, ..params.minus },
    };
    rn.validate()?;
    Ok(rn)
}

/// theta* from a 64-point sign scan of the open admissible interval and Brent
/// refinement. More than one sign change is an error.
pub fn solve_esscher(params: &BgigParams, r: f64, tol: f64) -> Result<EsscherSolution> {
    params.validate()?;
    let (lo, hi) = esscher_interval(params)?;
    let (lo, hi) = (lo + EDGE_SHRINK, hi - EDGE_SHRINK);
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|k| lo + (hi - lo) * k as f64 / (SCAN_POINTS - 1) as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&t| esscher_equation(params, t, r)).collect::<Result<_>>()?;
    let mut brackets = Vec::new();
    for k in 0..SCAN_POINTS - 1 {
        if vals[k] == 0.0 {
            brackets.push((grid[k], grid[k]));
        } else if vals[k] * vals[k + 1] < 0.0 {
            brackets.push((grid[k], grid[k + 1]));
        }
    }
    if vals[SCAN_POINTS - 1] == 0.0 {
        brackets.push((grid[SCAN_POINTS - 1], grid[SCAN_POINTS - 1]));
    }
    let (a, b) = match brackets.as_slice() {
        [] => return Err(Error::NoRoot(format!("Esscher equation has no sign change on ({lo}, {hi})"))),
        [one] => *one,
        many => {
            return Err(Error::MultipleRoots(format!("Esscher equation changes sign in {} brackets: {many:?}", many.len())))
        }
    };
    let theta = if a == b {
        a
    } else {
        let mut f = |t: f64| esscher_equation(params, t, r).unwrap_or(f64::NAN);
        quad::brent(&mut f, a, b, THETA_TOL, 200)?
    };
    let residual = esscher_equation(params, theta, r)?;
    if !(residual.abs() <= tol) {
        return Err(Error::Convergence(format!("Esscher residual {residual:e} above tolerance {tol:e}")));
    }
    Ok(EsscherSolution { theta_star: theta, rn_params: esscher_params(params, theta)?, residual })
}

/// [Phi(u - i theta*) / Phi(-i theta*)]^t.
pub fn esscher_chf(sol: &EsscherSolution, params: &BgigParams, u: f64, t: f64) -> Result<C64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
    }
    let th = sol.theta_star;
    let num = bgig_ln_chf_analytic(params, C64::new(u, -th))?;
    let den = bgig_ln_chf_analytic(params, C64::new(0.0, -th))?;
    Ok(((num - den) * t).exp())
}
