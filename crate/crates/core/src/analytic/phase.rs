//! Phase functions that set the non-centralities of the energy distributions.
//!
//! `a_t = psi_t + Phi_t` is the total mean phase of antenna `t` relative to
//! antenna 0, so `a_0 = 0` always.

use std::f64::consts::PI;

use super::special::bessel_j0;
use crate::channel::{los_phases, PhaseShift};

fn total_phases(psi: &PhaseShift, phi: f64) -> Vec<f64> {
    let phases = los_phases(psi.len(), phi);
    psi.as_slice().iter().zip(phases).map(|(p, q)| p + q).collect()
}

/// Squared magnitude of the phased LOS sum, `|sum_t exp(i a_t)|^2`.
pub fn f_phase(psi: &PhaseShift, phi: f64) -> f64 {
    let a = total_phases(psi, phi);
    let (v1, v2) = a.iter().fold((0.0, 0.0), |(c, s), x| {
        let (sx, cx) = x.sin_cos();
        (c + cx, s + sx)
    });
    v1 * v1 + v2 * v2
}

/// Same quantity written as `M + 2 sum cos a_t + 2 sum_{t<l} cos(a_t - a_l)`.
pub fn f_phase_expanded(psi: &PhaseShift, phi: f64) -> f64 {
    let a = total_phases(psi, phi);
    let m = a.len();
    let mut f = m as f64;
    for t in 1..m {
        f += 2.0 * a[t].cos();
        for l in t + 1..m {
            f += 2.0 * (a[t] - a[l]).cos();
        }
    }
    f
}

/// `f_phase` averaged over an azimuth uniform on `[0, 2 pi)`.
pub fn f_averaged(psi: &PhaseShift) -> f64 {
    let s = psi.as_slice();
    let m = s.len();
    let mut f = m as f64;
    for t in 1..m {
        f += 2.0 * bessel_j0(t as f64 * PI) * s[t].cos();
        for l in t + 1..m {
            f += 2.0 * bessel_j0((l - t) as f64 * PI) * (s[t] - s[l]).cos();
        }
    }
    f
}

/// Largest value `f_averaged` can take for `m` antennas.
pub fn f_averaged_upper_bound(m: usize) -> f64 {
    let mut f = m as f64;
    for t in 1..m {
        f += 2.0 * bessel_j0(t as f64 * PI).abs();
        for l in t + 1..m {
            f += 2.0 * bessel_j0((l - t) as f64 * PI).abs();
        }
    }
    f
}

/// LOS energy left in the `M - 1` eigen-directions orthogonal to the
/// all-ones vector, for uniform correlation.
pub fn v_tilde(psi: &PhaseShift, phi: f64) -> f64 {
    let a = total_phases(psi, phi);
    let m = a.len();
    if m < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for j in 1..m {
        let pivot = m - j;
        let tail = pivot + 1..m;
        let mut inner: f64 = tail.clone().map(|t| a[t].cos()).sum();
        for t in tail.clone() {
            for l in t + 1..m {
                inner += (a[t] - a[l]).cos();
            }
        }
        let jf = j as f64;
        inner -= jf * a[pivot].cos();
        inner -= jf * tail.map(|t| (a[pivot] - a[t]).cos()).sum::<f64>();
        acc += inner / (jf * (jf + 1.0));
    }
    m as f64 - 1.0 + 2.0 * acc
}

/// Mean perturbation of AA-IS energy, `f + M v_tilde - M^2`.
pub fn f_tilde(psi: &PhaseShift, phi: f64) -> f64 {
    let m = psi.len() as f64;
    f_phase(psi, phi) + m * v_tilde(psi, phi) - m * m
}

/// `f_tilde` averaged over an azimuth uniform on `[0, 2 pi)`.
pub fn f_tilde_averaged(psi: &PhaseShift) -> f64 {
    let s = psi.as_slice();
    let m = s.len();
    if m < 2 {
        return 0.0;
    }
    let j0 = |k: usize| bessel_j0(k as f64 * PI);
    let mf = m as f64;
    let mut acc = 0.0;
    for j in 1..m {
        let pivot = m - j;
        let tail = pivot + 1..m;
        let mut inner: f64 = tail.clone().map(|t| j0(t) * s[t].cos()).sum();
        for t in tail.clone() {
            for l in t + 1..m {
                inner += j0(l - t) * (s[t] - s[l]).cos();
            }
        }
        let jf = j as f64;
        inner -= jf * tail.map(|t| j0(t - pivot) * (s[pivot] - s[t]).cos()).sum::<f64>();
        inner -= jf * j0(pivot) * s[pivot].cos();
        acc += 2.0 * mf / (jf * (jf + 1.0)) * inner;
    }
    f_averaged(psi) - mf + acc
}
