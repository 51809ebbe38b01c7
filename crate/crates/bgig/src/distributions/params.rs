use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One-sided GIG parameters: density proportional to x^{p-1} exp(-(a x + b / x) / 2) on x > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GigParams {
    pub a: f64,
    pub b: f64,
    pub p: f64,
}

impl GigParams {
    pub fn new(a: f64, b: f64, p: f64) -> Result<Self> {
        let g = GigParams { a, b, p };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidParameter(format!("GIG a must be > 0, got {}", self.a)));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::InvalidParameter(format!("GIG b must be > 0, got {}", self.b)));
        }
        if !self.p.is_finite() {
            return Err(Error::InvalidParameter(format!("GIG p must be finite, got {}", self.p)));
        }
        Ok(())
    }

    /// sqrt(a b)
    pub fn omega(&self) -> f64 {
        (self.a * self.b).sqrt()
    }

    /// Scale sqrt(b / a).
    pub fn eta(&self) -> f64 {
        (self.b / self.a).sqrt()
    }
}

/// Bilateral parameters: X = X+ - X- with X+ ~ GIG(plus) and X- ~ GIG(minus) independent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BgigParams {
    pub plus: GigParams,
    pub minus: GigParams,
}

impl BgigParams {
    pub fn new(a_plus: f64, b_plus: f64, p_plus: f64, a_minus: f64, b_minus: f64, p_minus: f64) -> Result<Self> {
        Ok(BgigParams {
            plus: GigParams::new(a_plus, b_plus, p_plus)?,
            minus: GigParams::new(a_minus, b_minus, p_minus)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.plus.validate()?;
        self.minus.validate()
    }

    /// Parameters of -X.
    pub fn swap(&self) -> Self {
        BgigParams { plus: self.minus, minus: self.plus }
    }

    /// (a+, b+, p+, a-, b-, p-)
    pub fn to_array(&self) -> [f64; 6] {
        [self.plus.a, self.plus.b, self.plus.p, self.minus.a, self.minus.b, self.minus.p]
    }

    pub fn from_array(v: [f64; 6]) -> Result<Self> {
        Self::new(v[0], v[1], v[2], v[3], v[4], v[5])
    }

    /// sqrt(b+) + sqrt(b-), the stretched-exponential decay rate of |Phi(u)| in sqrt(u).
    pub fn chf_decay_rate(&self) -> f64 {
        self.plus.b.sqrt() + self.minus.b.sqrt()
    }
}
