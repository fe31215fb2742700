//! Fixed-bin histograms and the Bhattacharyya distance between them.

use crate::error::{Error, Result};

/// Distances are capped here when the supports do not overlap.
pub const DISJOINT_DISTANCE: f64 = 1e9;

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    edges: Vec<f64>,
    mass: Vec<f64>,
}

impl Histogram {
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn bins(&self) -> usize {
        self.mass.len()
    }
}

fn uniform_edges(m: usize, lo: f64, hi: f64) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::InvalidInput("histogram needs at least one bin".into()));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!("histogram range [{lo}, {hi}] is empty")));
    }
    let w = (hi - lo) / m as f64;
    let mut edges: Vec<f64> = (0..=m).map(|i| lo + w * i as f64).collect();
    edges[m] = hi;
    Ok(edges)
}

/// Uniform bins on `[lo, hi]`; samples outside the range are counted in the
/// nearest end bin so that the masses always sum to one.
pub fn histogram_estimate(samples: &[f64], m: usize, lo: f64, hi: f64) -> Result<Histogram> {
    let edges = uniform_edges(m, lo, hi)?;
    if samples.is_empty() {
        return Err(Error::InvalidInput("histogram needs at least one sample".into()));
    }
    let mut counts = vec![0u64; m];
    let scale = m as f64 / (hi - lo);
    for &x in samples {
        let idx = ((x - lo) * scale).floor();
        let idx = if idx.is_nan() || idx < 0.0 {
            0
        } else {
            (idx as usize).min(m - 1)
        };
        counts[idx] += 1;
    }
    let n = samples.len() as f64;
    let mass = counts.into_iter().map(|c| c as f64 / n).collect();
    Ok(Histogram { edges, mass })
}

/// Bin masses of a distribution given by its CDF, with the tails folded
/// into the end bins to match [`histogram_estimate`].
pub fn histogram_from_cdf<F>(cdf: F, m: usize, lo: f64, hi: f64) -> Result<Histogram>
where
    F: Fn(f64) -> Result<f64>,
{
    let edges = uniform_edges(m, lo, hi)?;
    let mut values = Vec::with_capacity(m + 1);
    values.push(0.0);
    // running maximum absorbs rounding wiggles so the masses telescope to 1
    let mut last = 0.0f64;
    for e in &edges[1..m] {
        last = last.max(cdf(*e)?.min(1.0));
        values.push(last);
    }
    values.push(1.0);
    let mass = values.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(Histogram { edges, mass })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bhattacharyya {
    /// `-ln sum_i sqrt(p_i q_i)`, saturated at [`DISJOINT_DISTANCE`].
    pub distance: f64,
    /// Set when the supports do not overlap and the distance is infinite.
    pub disjoint: bool,
}

pub fn bhattacharyya(p: &Histogram, q: &Histogram) -> Result<Bhattacharyya> {
    if p.edges != q.edges {
        return Err(Error::EdgeMismatch);
    }
    let coefficient: f64 = p.mass.iter().zip(&q.mass).map(|(a, b)| (a * b).sqrt()).sum();
    if coefficient <= 0.0 {
        return Ok(Bhattacharyya {
            distance: DISJOINT_DISTANCE,
            disjoint: true,
        });
    }
    Ok(Bhattacharyya {
        // rounding can push the coefficient a hair above 1
        distance: (-coefficient.ln()).max(0.0),
        disjoint: false,
    })
}

/// Kolmogorov-Smirnov statistic of `samples` against a reference CDF.
pub fn ks_statistic<F>(samples: &[f64], cdf: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let c = cdf(*x)?;
        d = d.max(c - i as f64 / n).max((i + 1) as f64 / n - c);
    }
    Ok(d)
}

/// Asymptotic one-sample KS critical value at level `alpha`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(0.5 * alpha).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist(mass: &[f64]) -> Histogram {
        Histogram {
            edges: (0..=mass.len()).map(|i| i as f64).collect(),
            mass: mass.to_vec(),
        }
    }

    #[test]
    fn estimate_examples() {
        let h = histogram_estimate(&[2.5; 10], 240, 0.0, 6.0).unwrap();
        assert_eq!(h.mass().iter().filter(|&&m| m > 0.0).count(), 1);
        assert_eq!(h.mass()[100], 1.0);
        let h = histogram_estimate(&[0.5, 3.5], 4, 0.0, 4.0).unwrap();
        assert_eq!(h.mass(), &[0.5, 0.0, 0.0, 0.5]);
        assert_eq!(h.edges().len(), 5);
    }

    #[test]
    fn out_of_range_samples_are_clipped() {
        let h = histogram_estimate(&[-1.0, 10.0, 6.0, 1.0], 6, 0.0, 6.0).unwrap();
        assert_eq!(h.mass(), &[0.25, 0.25, 0.0, 0.0, 0.0, 0.5]);
        assert!((h.mass().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_histograms_are_rejected() {
        assert!(histogram_estimate(&[1.0], 0, 0.0, 1.0).is_err());
        assert!(histogram_estimate(&[1.0], 3, 1.0, 1.0).is_err());
    }

    #[test]
    fn distance_examples() {
        let p = hist(&[0.5, 0.5]);
        let q = hist(&[0.25, 0.75]);
        let d = bhattacharyya(&p, &p).unwrap();
        assert_eq!(d.distance, 0.0);
        let d = bhattacharyya(&p, &q).unwrap();
        let expected = -(0.125f64.sqrt() + 0.375f64.sqrt()).ln();
        assert!((d.distance - expected).abs() < 1e-15);
        // cos(pi/12) is the coefficient, so the distance is -ln(0.96593)
        assert!((d.distance - 0.034668).abs() < 1e-6);
        let d = bhattacharyya(&hist(&[1.0, 0.0]), &hist(&[0.0, 1.0])).unwrap();
        assert!(d.disjoint);
        assert_eq!(d.distance, DISJOINT_DISTANCE);
        let wide = Histogram {
            edges: vec![0.0, 2.0, 4.0],
            mass: vec![0.5, 0.5],
        };
        assert_eq!(bhattacharyya(&p, &wide), Err(Error::EdgeMismatch));
    }

    #[test]
    fn cdf_histogram_folds_tails() {
        let h = histogram_from_cdf(|x| Ok(1.0 - (-x).exp()), 3, 1.0, 4.0).unwrap();
        assert!((h.mass().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((h.mass()[0] - (1.0 - (-2.0f64).exp())).abs() < 1e-15);
        assert!((h.mass()[2] - (-3.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn ks_against_exact_grid() {
        let n = 1000;
        let samples: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&samples, |x| Ok(x.clamp(0.0, 1.0))).unwrap();
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
        assert!((ks_critical(10_000, 0.01) - 1.6276 / 100.0).abs() < 1e-4);
    }
}
