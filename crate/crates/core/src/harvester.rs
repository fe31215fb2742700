//! Energy-harvesting transfer functions.
//!
//! All powers are in mW; dBm appears only in the conversion helpers.

use crate::error::{Error, Result};

/// Maps incident RF power to harvested DC power.
pub trait TransferFunction: Send + Sync {
    /// Caller guarantees `x >= 0`.
    fn apply(&self, x: f64) -> f64;
}

/// Sigmoid-based non-linear harvester with saturation level `g_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EhCurve {
    pub g_max: f64,
    pub a: f64,
    pub b: f64,
    /// Outage threshold on RF power.
    pub xi0: f64,
}

impl EhCurve {
    pub fn new(g_max: f64, a: f64, b: f64, xi0: f64) -> Result<Self> {
        let curve = EhCurve { g_max, a, b, xi0 };
        curve.validate()?;
        Ok(curve)
    }

    /// 2 mW saturation, `a = 0.56`, `b = 3.5`, threshold -2 dBm.
    pub fn standard() -> Self {
        EhCurve {
            g_max: 2.0,
            a: 0.56,
            b: 3.5,
            xi0: dbm_to_mw(-2.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::OutOfRange { name, value: v })
            }
        };
        positive("g_max", self.g_max)?;
        positive("a", self.a)?;
        positive("b", self.b)?;
        if !(self.xi0 >= 0.0) || !self.xi0.is_finite() {
            return Err(Error::OutOfRange {
                name: "xi0",
                value: self.xi0,
            });
        }
        Ok(())
    }

    /// Harvested power at RF input `x`.
    pub fn harvest(&self, x: f64) -> Result<f64> {
        if x < 0.0 || x.is_nan() {
            return Err(Error::NegativeInput(x));
        }
        Ok(self.eval(x))
    }

    /// Unchecked evaluation; `x` must be non-negative.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let eab = (self.a * self.b).exp();
        let sigmoid = (1.0 + eab) / (1.0 + (-self.a * (x - self.b)).exp());
        (self.g_max * (sigmoid - 1.0) / eab).clamp(0.0, self.g_max)
    }

    /// RF power needed to harvest `y`, for `0 <= y < g_max`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !(0.0..self.g_max).contains(&y) {
            return Err(Error::OutOfRange {
                name: "harvested power",
                value: y,
            });
        }
        let eab = (self.a * self.b).exp();
        let inner = (1.0 + eab) / (1.0 + y * eab / self.g_max) - 1.0;
        Ok((self.b - inner.ln() / self.a).max(0.0))
    }

    /// `dg/dx`.
    pub fn derivative(&self, x: f64) -> f64 {
        let eab = (self.a * self.b).exp();
        let e = (-self.a * (x - self.b)).exp();
        self.g_max * (1.0 + eab) / eab * self.a * e / ((1.0 + e) * (1.0 + e))
    }

    /// RF power where the curve switches from convex to concave.
    pub fn inflection(&self) -> f64 {
        self.b
    }
}

impl TransferFunction for EhCurve {
    fn apply(&self, x: f64) -> f64 {
        self.eval(x)
    }
}

/// Ideal harvester with constant efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearEh {
    pub eta: f64,
}

impl LinearEh {
    pub fn new(eta: f64) -> Result<Self> {
        if eta > 0.0 && eta <= 1.0 {
            Ok(LinearEh { eta })
        } else {
            Err(Error::OutOfRange {
                name: "eta",
                value: eta,
            })
        }
    }

    pub fn harvest(&self, x: f64) -> Result<f64> {
        if x < 0.0 || x.is_nan() {
            return Err(Error::NegativeInput(x));
        }
        Ok(self.eta * x)
    }
}

impl TransferFunction for LinearEh {
    fn apply(&self, x: f64) -> f64 {
        self.eta * x
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> Result<f64> {
    if mw > 0.0 {
        Ok(10.0 * mw.log10())
    } else {
        Err(Error::NonPositive(mw))
    }
}
