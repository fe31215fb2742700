//! CSI-free transmission schemes and their per-realization energies.
//!
//! - AA-SS: every antenna sends the same signal with power `beta / M`.
//! - AA-IS: every antenna sends an independent signal with power `beta / M`.
//! - SA: one antenna at full power per sub-block, `M` equal sub-blocks.

use std::fmt;
use std::str::FromStr;

use crate::channel::{ChannelSample, PhaseShift};
use crate::error::{Error, Result};
use crate::harvester::TransferFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    AaSs,
    AaIs,
    Sa,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::AaSs, Scheme::AaIs, Scheme::Sa];

    pub fn label(&self) -> &'static str {
        match self {
            Scheme::AaSs => "AA-SS",
            Scheme::AaIs => "AA-IS",
            Scheme::Sa => "SA",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "aass" => Ok(Scheme::AaSs),
            "aais" => Ok(Scheme::AaIs),
            "sa" => Ok(Scheme::Sa),
            _ => Err(Error::InvalidInput(format!("unknown scheme '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    /// Average single-antenna RF power at the device, mW.
    pub beta: f64,
    pub shift: PhaseShift,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, beta: f64, shift: PhaseShift) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::OutOfRange {
                name: "beta",
                value: beta,
            });
        }
        Ok(SchemeConfig { scheme, beta, shift })
    }

    /// RF power that counts toward outage: the combined power for AA
    /// schemes and the block-average power for SA.
    pub fn rf(&self, sample: &ChannelSample) -> f64 {
        match self.scheme {
            Scheme::AaSs => rf_aa_ss(sample, self.beta),
            Scheme::AaIs | Scheme::Sa => rf_aa_is(sample, self.beta),
        }
    }
}

pub fn rf_aa_ss(sample: &ChannelSample, beta: f64) -> f64 {
    let sx: f64 = sample.hx.iter().sum();
    let sy: f64 = sample.hy.iter().sum();
    beta / sample.antennas() as f64 * (sx * sx + sy * sy)
}

pub fn rf_aa_is(sample: &ChannelSample, beta: f64) -> f64 {
    beta / sample.antennas() as f64 * sample.gains().sum::<f64>()
}

/// Incident RF power during each antenna's sub-block.
pub fn rf_sa_subblocks(sample: &ChannelSample, beta: f64) -> Vec<f64> {
    sample.gains().map(|g| beta * g).collect()
}

/// Harvested power averaged over the coherence block.
pub fn harvested<T: TransferFunction + ?Sized>(config: &SchemeConfig, curve: &T, sample: &ChannelSample) -> f64 {
    match config.scheme {
        Scheme::AaSs => curve.apply(rf_aa_ss(sample, config.beta)),
        Scheme::AaIs => curve.apply(rf_aa_is(sample, config.beta)),
        Scheme::Sa => {
            let m = sample.antennas() as f64;
            sample.gains().map(|g| curve.apply(config.beta * g)).sum::<f64>() / m
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JensenOrder {
    SaDominates,
    AaIsDominates,
    Indeterminate,
}

/// Which of SA and AA-IS harvests more, decided from the curvature of the
/// harvester alone: all sub-block powers on the convex side favour SA, all on
/// the concave side favour AA-IS. A sample exactly at the inflection point
/// satisfies both and is labelled `AaIsDominates`.
pub fn jensen_order(sample: &ChannelSample, beta: f64, inflection: f64) -> JensenOrder {
    let (lo, hi) = sample
        .gains()
        .map(|g| beta * g)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if lo >= inflection {
        JensenOrder::AaIsDominates
    } else if hi <= inflection {
        JensenOrder::SaDominates
    } else {
        JensenOrder::Indeterminate
    }
}
