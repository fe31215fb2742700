//! Chunked, stream-keyed ensemble simulation.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use super::histogram::{histogram_estimate, Histogram};
use crate::channel::{ArrayConfig, ChannelSample, ChannelSampler, SampleBuffer};
use crate::error::{Error, Result};
use crate::harvester::EhCurve;
use crate::rng::{stream_rng, StreamRng};
use crate::schemes::{harvested, SchemeConfig};

/// Samples per RNG stream. Fixed so that results do not depend on how many
/// workers share the chunks.
pub const CHUNK: usize = 8192;

/// Draws `n` values, chunk `c` from stream `c` of `seed`, in chunk order.
///
/// `init` builds per-chunk scratch state, `draw` produces one value.
pub fn parallel_draws<S, I, D>(n: usize, seed: u64, init: I, draw: D) -> Vec<f64>
where
    I: Fn() -> S + Sync,
    D: Fn(&mut S, &mut StreamRng) -> f64 + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(n - c * CHUNK);
            let mut rng = stream_rng(seed, c as u64);
            let mut state = init();
            (0..len).map(|_| draw(&mut state, &mut rng)).collect()
        })
        .collect();
    parts.concat()
}

/// Mean and unbiased variance by chunk-wise pairwise merging in a fixed
/// order.
pub fn mean_variance(xs: &[f64]) -> (f64, f64) {
    let partials: Vec<(f64, f64, f64)> = xs
        .chunks(CHUNK)
        .map(|c| {
            let n = c.len() as f64;
            let mean = c.iter().sum::<f64>() / n;
            let m2 = c.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
            (n, mean, m2)
        })
        .collect();
    let (n, mean, m2) = merge_moments(&partials);
    if n < 2.0 {
        (mean, 0.0)
    } else {
        (mean, m2 / (n - 1.0))
    }
}

fn merge_moments(parts: &[(f64, f64, f64)]) -> (f64, f64, f64) {
    match parts {
        [] => (0.0, f64::NAN, 0.0),
        [one] => *one,
        _ => {
            let (l, r) = parts.split_at(parts.len() / 2);
            let (na, ma, sa) = merge_moments(l);
            let (nb, mb, sb) = merge_moments(r);
            let n = na + nb;
            let delta = mb - ma;
            (n, ma + delta * nb / n, sa + sb + delta * delta * na * nb / n)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiPolicy {
    Fixed(f64),
    UniformRandomPerSample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutageBasis {
    /// Incident RF power below the threshold.
    #[default]
    Rf,
    /// Harvested power below the harvested equivalent of the threshold.
    Harvested,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSpec {
    pub bins: usize,
    pub rf_range: (f64, f64),
    pub harvested_range: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub array: ArrayConfig,
    pub scheme: SchemeConfig,
    pub curve: EhCurve,
    pub samples: usize,
    pub seed: u64,
    pub phi_policy: PhiPolicy,
    pub outage_basis: OutageBasis,
    pub histogram: Option<HistogramSpec>,
}

impl ExperimentSpec {
    pub fn new(array: ArrayConfig, scheme: SchemeConfig, curve: EhCurve, samples: usize, seed: u64) -> Self {
        ExperimentSpec {
            phi_policy: PhiPolicy::Fixed(array.phi),
            array,
            scheme,
            curve,
            samples,
            seed,
            outage_basis: OutageBasis::Rf,
            histogram: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidInput("samples must be at least 1".into()));
        }
        self.array.validate()?;
        self.curve.validate()?;
        if self.scheme.shift.len() != self.array.m {
            return Err(Error::DimensionMismatch {
                expected: self.array.m,
                actual: self.scheme.shift.len(),
            });
        }
        if let PhiPolicy::Fixed(phi) = self.phi_policy {
            if !(0.0..=2.0 * PI).contains(&phi) {
                return Err(Error::OutOfRange {
                    name: "phi",
                    value: phi,
                });
            }
        }
        Ok(())
    }
}

/// Per-sample RF and harvested power.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSamples {
    pub rf: Vec<f64>,
    pub harvested: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub samples: usize,
    pub rf_mean: f64,
    pub rf_variance: f64,
    pub harvested_mean: f64,
    pub harvested_variance: f64,
    pub outage: f64,
    pub rf_histogram: Option<Histogram>,
    pub harvested_histogram: Option<Histogram>,
}

/// Draws the ensemble sample by sample.
pub fn simulate(spec: &ExperimentSpec) -> Result<EnsembleSamples> {
    spec.validate()?;
    let array = match spec.phi_policy {
        PhiPolicy::Fixed(phi) => spec.array.clone().with_phi(phi),
        PhiPolicy::UniformRandomPerSample => spec.array.clone(),
    };
    let sampler = ChannelSampler::new(&array, &spec.scheme.shift)?;
    let m = array.m;
    let random_phi = spec.phi_policy == PhiPolicy::UniformRandomPerSample;
    let draw = |buf: &mut SampleBuffer, rng: &mut StreamRng| -> (f64, f64) {
        let phi = random_phi.then(|| rng.random_range(0.0..2.0 * PI));
        let s = sampler.draw_into(phi, rng, buf);
        (spec.scheme.rf(s), harvested(&spec.scheme, &spec.curve, s))
    };
    let chunks = spec.samples.div_ceil(CHUNK);
    let parts: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(spec.samples - c * CHUNK);
            let mut rng = stream_rng(spec.seed, c as u64);
            let mut buf = SampleBuffer::new(m);
            (0..len).map(|_| draw(&mut buf, &mut rng)).unzip()
        })
        .collect();
    let mut rf = Vec::with_capacity(spec.samples);
    let mut hv = Vec::with_capacity(spec.samples);
    for (a, b) in parts {
        rf.extend(a);
        hv.extend(b);
    }
    Ok(EnsembleSamples { rf, harvested: hv })
}

/// Summary statistics of one experiment.
pub fn run(spec: &ExperimentSpec) -> Result<EnsembleStats> {
    let ens = simulate(spec)?;
    summarize(spec, &ens)
}

pub fn summarize(spec: &ExperimentSpec, ens: &EnsembleSamples) -> Result<EnsembleStats> {
    let (rf_mean, rf_variance) = mean_variance(&ens.rf);
    let (harvested_mean, harvested_variance) = mean_variance(&ens.harvested);
    let below = match spec.outage_basis {
        OutageBasis::Rf => ens.rf.iter().filter(|&&x| x < spec.curve.xi0).count(),
        OutageBasis::Harvested => {
            let threshold = spec.curve.eval(spec.curve.xi0);
            ens.harvested.iter().filter(|&&x| x < threshold).count()
        }
    };
    let (rf_histogram, harvested_histogram) = match &spec.histogram {
        None => (None, None),
        Some(h) => (
            Some(histogram_estimate(&ens.rf, h.bins, h.rf_range.0, h.rf_range.1)?),
            Some(histogram_estimate(
                &ens.harvested,
                h.bins,
                h.harvested_range.0,
                h.harvested_range.1,
            )?),
        ),
    };
    Ok(EnsembleStats {
        samples: ens.rf.len(),
        rf_mean,
        rf_variance,
        harvested_mean,
        harvested_variance,
        outage: below as f64 / ens.rf.len() as f64,
        rf_histogram,
        harvested_histogram,
    })
}

/// Convenience for tests and callers that only need a channel stream.
pub fn draw_channels(sampler: &ChannelSampler, n: usize, seed: u64) -> Vec<ChannelSample> {
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(n - c * CHUNK);
            let mut rng = stream_rng(seed, c as u64);
            (0..len).map(|_| sampler.sample(&mut rng)).collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .concat()
}
