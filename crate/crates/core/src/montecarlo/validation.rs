//! Checks how well the `R_sum`-only AA-IS distribution describes arrays with
//! arbitrary correlation.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::engine::parallel_draws;
use super::histogram::{bhattacharyya, histogram_estimate};
use crate::analytic::{dist_aa_is, PhaseInputs};
use crate::channel::{
    min_eigenvalue, r_sum, uniform_correlation, uniform_rho_for_r_sum, ArrayConfig, ChannelSampler, CorrelationModel,
    PhaseShift, SampleBuffer, PSD_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream_rng};
use crate::schemes::rf_aa_is;

const MAX_RETRIES: usize = 100;

/// Random correlation matrix whose entries sum to `target`.
///
/// A random Gram correlation `G` (unit vectors in `R^{M+1}`) is blended
/// convexly with whichever extreme of the attainable range lies beyond the
/// target: the all-ones matrix (`R_sum = M^2`) or the most negative uniform
/// matrix (`R_sum = 0`). Both endpoints are PSD with unit diagonal, so the
/// blend is too, and `R_sum` is linear in the weight.
pub fn random_correlation_matched(m: usize, target: f64, seed: u64) -> Result<DMatrix<f64>> {
    if m == 0 {
        return Err(Error::OutOfRange { name: "M", value: 0.0 });
    }
    let mf = m as f64;
    if !(0.0..=mf * mf).contains(&target) {
        return Err(Error::OutOfRange {
            name: "R_sum",
            value: target,
        });
    }
    if m == 1 || target == mf * mf {
        return Ok(DMatrix::from_element(m, m, 1.0));
    }
    let mut rng = stream_rng(seed, 0);
    for _ in 0..MAX_RETRIES {
        let g = random_gram(m, &mut rng);
        let rg = r_sum(&g);
        let (extreme, re) = if target >= rg {
            (DMatrix::from_element(m, m, 1.0), mf * mf)
        } else {
            (uniform_correlation(-1.0 / (mf - 1.0), m), 0.0)
        };
        if (re - rg).abs() < f64::EPSILON * mf * mf {
            continue;
        }
        let w = ((target - rg) / (re - rg)).clamp(0.0, 1.0);
        let mut r = &g * (1.0 - w) + &extreme * w;
        r.fill_diagonal(1.0);
        r = (&r + r.transpose()) * 0.5;
        if (r_sum(&r) - target).abs() <= 1e-9 * mf * mf && min_eigenvalue(&r) >= -PSD_TOLERANCE {
            return Ok(r);
        }
    }
    Err(Error::Infeasible {
        target,
        retries: MAX_RETRIES,
    })
}

/// Correlation matrix of `m` independent isotropic directions in `R^{m+1}`.
fn random_gram<R: Rng + ?Sized>(m: usize, rng: &mut R) -> DMatrix<f64> {
    let dim = m + 1;
    let mut v = DMatrix::<f64>::from_fn(m, dim, |_, _| rng.sample(StandardNormal));
    for mut row in v.row_iter_mut() {
        let n = row.norm();
        row /= n;
    }
    let mut g = &v * v.transpose();
    g.fill_diagonal(1.0);
    g
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    pub trials: usize,
    pub samples: usize,
    pub bins: usize,
    pub range: (f64, f64),
    pub beta: f64,
    pub seed: u64,
}

impl ValidationOptions {
    /// 1000 trials of 2e5 samples, 240 bins on `[0, 6]`, unit power.
    pub fn paper_defaults() -> Self {
        ValidationOptions {
            trials: 1000,
            samples: 200_000,
            bins: 240,
            range: (0.0, 6.0),
            beta: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationTrial {
    pub r_sum: f64,
    /// Against samples of the analytic distribution.
    pub analytic: f64,
    /// Against a simulation under the uniform matrix with the same `R_sum`.
    pub simulated: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub mean_analytic: f64,
    pub mean_simulated: f64,
    pub trials: Vec<ValidationTrial>,
}

/// Mean Bhattacharyya distance between AA-IS RF energy under random matched
/// correlation and the uniform-correlation reference.
pub fn validate_equal_sum(
    m: usize,
    kappa: f64,
    phi: f64,
    psi: &PhaseShift,
    options: &ValidationOptions,
) -> Result<ValidationReport> {
    if options.trials == 0 || options.samples == 0 {
        return Err(Error::InvalidInput("trials and samples must be at least 1".into()));
    }
    if psi.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: psi.len(),
        });
    }
    let mf = m as f64;
    let base = ArrayConfig::new(m, kappa, phi, CorrelationModel::Uniform { rho: 0.0 })?;
    let trials: Vec<ValidationTrial> = (0..options.trials)
        .into_par_iter()
        .map(|t| {
            let key = derive_seed(options.seed, t as u64);
            let target = stream_rng(key, 0).random_range(0.0..=mf * mf);
            let r_star = random_correlation_matched(m, target, derive_seed(key, 1))?;
            let simulate = |r: &DMatrix<f64>, seed: u64| -> Result<Vec<f64>> {
                let sampler = ChannelSampler::with_matrix(&base, psi, r)?;
                Ok(parallel_draws(
                    options.samples,
                    seed,
                    || SampleBuffer::new(m),
                    |buf, rng| rf_aa_is(sampler.draw_into(None, rng, buf), options.beta),
                ))
            };
            let hist = |xs: &[f64]| histogram_estimate(xs, options.bins, options.range.0, options.range.1);
            let p2 = hist(&simulate(&r_star, derive_seed(key, 2))?)?;

            let dist = dist_aa_is(options.beta, &PhaseInputs::new(psi.clone(), phi, kappa, target)?)?;
            let analytic = parallel_draws(options.samples, derive_seed(key, 3), || (), |_, rng| dist.sample(rng));
            let d_analytic = bhattacharyya(&hist(&analytic)?, &p2)?.distance;

            let rho = uniform_rho_for_r_sum(target, m);
            let uniform = uniform_correlation(rho.max(-1.0 / (mf - 1.0)), m);
            let d_simulated = bhattacharyya(&hist(&simulate(&uniform, derive_seed(key, 4))?)?, &p2)?.distance;
            Ok(ValidationTrial {
                r_sum: target,
                analytic: d_analytic,
                simulated: d_simulated,
            })
        })
        .collect::<Result<_>>()?;
    let n = trials.len() as f64;
    Ok(ValidationReport {
        mean_analytic: trials.iter().map(|t| t.analytic).sum::<f64>() / n,
        mean_simulated: trials.iter().map(|t| t.simulated).sum::<f64>() / n,
        trials,
    })
}
