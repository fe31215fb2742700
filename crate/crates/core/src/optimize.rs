//! Preventive phase-shift selection.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use crate::analytic::{f_averaged, f_tilde_averaged};
use crate::channel::PhaseShift;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream_rng};

/// Largest array the grid search accepts.
pub const MAX_SEARCH_ANTENNAS: usize = 32;

/// `psi_t = (t mod 2) pi`: maximizes the azimuth-averaged AA-SS energy.
pub fn max_energy_shift(m: usize) -> PhaseShift {
    PhaseShift::alternating(m)
}

/// No shift: near-minimal AA-SS energy dispersion.
pub fn min_var_shift(m: usize) -> PhaseShift {
    PhaseShift::zeros(m)
}

/// Variance-minimizing AA-IS shift: none when antennas are positively
/// correlated on aggregate (`R_sum >= M`), alternating otherwise.
pub fn aa_is_shift(m: usize, r_sum: f64) -> Result<PhaseShift> {
    let mf = m as f64;
    if !(r_sum >= 0.0 && r_sum <= mf * mf) {
        return Err(Error::OutOfRange {
            name: "R_sum",
            value: r_sum,
        });
    }
    Ok(if r_sum < mf {
        max_energy_shift(m)
    } else {
        min_var_shift(m)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    MaxFAvg,
    MinFAvg,
    MaxFTildeAvg,
}

impl Objective {
    fn value(&self, psi: &PhaseShift) -> f64 {
        match self {
            Objective::MaxFAvg | Objective::MinFAvg => f_averaged(psi),
            Objective::MaxFTildeAvg => f_tilde_averaged(psi),
        }
    }

    /// Orients values so that larger is always better.
    fn score(&self, value: f64) -> f64 {
        match self {
            Objective::MinFAvg => -value,
            _ => value,
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "maxfavg" => Ok(Objective::MaxFAvg),
            "minfavg" => Ok(Objective::MinFAvg),
            "maxftildeavg" => Ok(Objective::MaxFTildeAvg),
            _ => Err(Error::InvalidInput(format!("unknown objective '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub restarts: usize,
    /// Grid points per coordinate on `[0, 2 pi)`.
    pub grid: usize,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            restarts: 16,
            grid: 720,
            max_sweeps: 500,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartTrace {
    pub start: PhaseShift,
    /// Objective value after each completed sweep, starting with the initial
    /// point.
    pub history: Vec<f64>,
    pub shift: PhaseShift,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub shift: PhaseShift,
    pub value: f64,
    pub best_restart: usize,
    pub traces: Vec<RestartTrace>,
}

/// Multi-start cyclic coordinate descent over a uniform phase grid.
///
/// Restart 0 starts from the zero shift; the rest start from uniform random
/// shifts keyed by `(seed, restart)`.
pub fn search_phase(objective: Objective, m: usize, options: &SearchOptions) -> Result<SearchResult> {
    if m == 0 || m > MAX_SEARCH_ANTENNAS {
        return Err(Error::OutOfRange {
            name: "M",
            value: m as f64,
        });
    }
    if options.restarts == 0 {
        return Err(Error::InvalidInput("at least one restart is required".into()));
    }
    if options.grid < 3 {
        return Err(Error::InvalidInput("phase grid needs at least 3 points".into()));
    }
    let traces: Vec<RestartTrace> = (0..options.restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                PhaseShift::zeros(m)
            } else {
                let mut rng = stream_rng(derive_seed(options.seed, r as u64), 0);
                let mut v: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
                v[0] = 0.0;
                PhaseShift::new(v).expect("reference phase is zero")
            };
            descend(objective, start, options)
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, t) in traces.iter().enumerate().skip(1) {
        if objective.score(t.value) > objective.score(traces[best].value) {
            best = i;
        }
    }
    Ok(SearchResult {
        shift: traces[best].shift.clone(),
        value: traces[best].value,
        best_restart: best,
        traces,
    })
}

fn descend(objective: Objective, start: PhaseShift, options: &SearchOptions) -> Result<RestartTrace> {
    let m = start.len();
    let mut psi = start.as_slice().to_vec();
    let mut value = objective.value(&start);
    let mut history = vec![value];
    let step = 2.0 * PI / options.grid as f64;
    for _ in 0..options.max_sweeps {
        let before = objective.score(value);
        for t in 1..m {
            // every objective is a + b cos(psi_t) + c sin(psi_t) in one coordinate
            let current = psi[t];
            let mut probe = |x: f64| {
                psi[t] = x;
                objective.score(objective.value(&PhaseShift::new(psi.clone()).expect("psi[0] is 0")))
            };
            let s0 = probe(0.0);
            let s_half = probe(0.5 * PI);
            let s_pi = probe(PI);
            let a = 0.5 * (s0 + s_pi);
            let b = 0.5 * (s0 - s_pi);
            let c = s_half - a;
            let model = |x: f64| a + b * x.cos() + c * x.sin();
            let mut best_x = current;
            let mut best_s = model(current);
            for k in 0..options.grid {
                let x = k as f64 * step;
                let s = model(x);
                if s > best_s + 1e-12 * best_s.abs().max(1.0) {
                    best_x = x;
                    best_s = s;
                }
            }
            psi[t] = best_x;
        }
        value = objective.value(&PhaseShift::new(psi.clone()).expect("psi[0] is 0"));
        history.push(value);
        if objective.score(value) <= before + 1e-12 * before.abs().max(1.0) {
            let shift = PhaseShift::new(psi).expect("psi[0] is 0");
            return Ok(RestartTrace {
                start,
                history,
                shift,
                value,
            });
        }
    }
    Err(Error::BudgetExceeded {
        sweeps: options.max_sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::f_averaged_upper_bound;
    use crate::channel::CorrelationModel;

    #[test]
    fn closed_form_shifts() {
        assert_eq!(max_energy_shift(4).as_slice(), &[0.0, PI, 0.0, PI]);
        assert_eq!(max_energy_shift(1).as_slice(), &[0.0]);
        assert!(min_var_shift(7).as_slice().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn max_energy_beats_random_shifts() {
        let mut rng = stream_rng(30, 0);
        for m in [2usize, 4, 8] {
            let best = f_averaged(&max_energy_shift(m));
            for _ in 0..1000 {
                let mut v: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
                v[0] = 0.0;
                assert!(f_averaged(&PhaseShift::new(v).unwrap()) <= best + 1e-12);
            }
        }
        for m in 1..=32 {
            assert!((f_averaged(&max_energy_shift(m)) - f_averaged_upper_bound(m)).abs() < 1e-9);
        }
    }

    #[test]
    fn two_antenna_min_variance_by_calculus() {
        // f = 2 + 2 J0(pi) cos(psi_1) and J0(pi) < 0, so the minimum is at 0
        let j0pi = crate::analytic::bessel_j0(PI);
        assert!(j0pi < 0.0);
        let f = |x: f64| f_averaged(&PhaseShift::new(vec![0.0, x]).unwrap());
        assert!((f(0.0) - (2.0 + 2.0 * j0pi)).abs() < 1e-14);
        for k in 1..100 {
            assert!(f(0.0) <= f(2.0 * PI * k as f64 / 100.0));
        }
    }

    #[test]
    fn aa_is_rule() {
        let r = CorrelationModel::Exponential { tau: 0.3 }.r_sum(8).unwrap();
        assert!(aa_is_shift(8, r).unwrap().as_slice().iter().all(|&p| p == 0.0));
        let r = CorrelationModel::Uniform { rho: -1.0 / 3.0 }.r_sum(4).unwrap();
        assert_eq!(aa_is_shift(4, r.max(0.0)).unwrap().as_slice(), &[0.0, PI, 0.0, PI]);
        assert!(aa_is_shift(4, 4.0).unwrap().as_slice().iter().all(|&p| p == 0.0));
        assert!(aa_is_shift(4, 17.0).is_err());
    }

    #[test]
    fn search_finds_max_energy_optimum() {
        let opts = SearchOptions {
            restarts: 4,
            ..Default::default()
        };
        let res = search_phase(Objective::MaxFAvg, 4, &opts).unwrap();
        let target = f_averaged(&max_energy_shift(4));
        assert!((res.value / target - 1.0).abs() < 1e-3);
    }

    #[test]
    fn search_min_variance_is_close_to_zero_shift() {
        let opts = SearchOptions {
            restarts: 8,
            ..Default::default()
        };
        for m in [2usize, 4, 8, 12, 16] {
            let res = search_phase(Objective::MinFAvg, m, &opts).unwrap();
            let zero = f_averaged(&min_var_shift(m));
            assert!(res.value <= zero + 1e-12);
            assert!(zero <= res.value * 1.02, "m={m} zero={zero} found={}", res.value);
            for t in &res.traces {
                assert!(zero <= t.value * 1.02);
            }
        }
    }

    #[test]
    fn search_f_tilde_stays_negligible() {
        let opts = SearchOptions {
            restarts: 4,
            ..Default::default()
        };
        let res = search_phase(Objective::MaxFTildeAvg, 8, &opts).unwrap();
        assert!(res.value.abs() / 64.0 < 0.05);
    }

    #[test]
    fn history_is_monotone_and_deterministic() {
        let opts = SearchOptions {
            restarts: 6,
            seed: 9,
            ..Default::default()
        };
        for obj in [Objective::MaxFAvg, Objective::MinFAvg] {
            let a = search_phase(obj, 6, &opts).unwrap();
            let b = search_phase(obj, 6, &opts).unwrap();
            assert_eq!(a, b);
            for t in &a.traces {
                for w in t.history.windows(2) {
                    let (s0, s1) = (obj.score(w[0]), obj.score(w[1]));
                    assert!(s1 >= s0 - 1e-12 * s0.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn search_limits() {
        let opts = SearchOptions::default();
        assert!(matches!(
            search_phase(Objective::MaxFAvg, 33, &opts),
            Err(Error::OutOfRange { .. })
        ));
        let tight = SearchOptions {
            max_sweeps: 1,
            restarts: 2,
            ..Default::default()
        };
        assert!(matches!(
            search_phase(Objective::MaxFAvg, 8, &tight),
            Err(Error::BudgetExceeded { sweeps: 1 })
        ));
        let one = search_phase(Objective::MaxFAvg, 1, &opts).unwrap();
        assert_eq!(one.shift.as_slice(), &[0.0]);
    }
}
