//! Ordered infinite-range model `H = S²/N`, `S = Σ_i σ^z_i`.
//!
//! Tracing all but `k` spins out of `e^{−iHt}|+⟩^⊗N` factorizes over the
//! traced spins. With `a = Σ s`, `a' = Σ s'` over the kept spins:
//!
//! ```text
//! ⟨s|ρ|s'⟩ = 2^{−k} e^{−it(a² − a'²)/N} cos(2t(a − a')/N)^{N−k}
//! ```
//!
//! Dropping the `i = j` terms shifts `H` by the constant `1`, a global phase.
//! The pair LN is even in `t` and periodic with period `πN/4`: bursts of
//! entanglement collapse on a time scale `~√N` and revive every `~N`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{self, CMatrix, Cut, DensityMatrix, C64};
use crate::series::{linspace, LnTimeSeries};
use crate::stats::{linear_fit, log_log_fit, LinearFit};

/// Grid points the signal must stay below threshold to count as collapsed.
pub const COLLAPSE_WINDOW: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectiveModel {
    n_spins: usize,
}

impl CollectiveModel {
    pub fn new(n_spins: usize) -> Result<Self> {
        if n_spins < 3 {
            return Err(Error::Domain(format!("collective model needs N >= 3, got {n_spins}")));
        }
        Ok(Self { n_spins })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    /// Revival period `πN/4` of the pair LN.
    pub fn revival_period(&self) -> f64 {
        std::f64::consts::PI * self.n_spins as f64 / 4.0
    }
}

fn magnetization(index: usize, k: usize) -> i32 {
    let down = index.count_ones() as i32;
    debug_assert!(index < 1 << k);
    k as i32 - 2 * down
}

/// Reduced state of any `k` spins of the `N`-spin collective model.
pub fn lro_reduced_state(n: usize, k: usize, t: f64) -> Result<DensityMatrix> {
    if k == 0 || n <= k {
        return Err(Error::Domain(format!("need 1 <= k < N, got k={k}, N={n}")));
    }
    let dim = 1usize << k;
    let nf = n as f64;
    let exponent = (n - k) as i32;
    let norm = 1.0 / dim as f64;
    let m = CMatrix::from_fn(dim, |i, j| {
        let a = magnetization(i, k);
        let b = magnetization(j, k);
        let phase = -t * f64::from(a * a - b * b) / nf;
        let envelope = (2.0 * t * f64::from(a - b) / nf).cos().powi(exponent);
        C64::from_polar(norm * envelope, phase)
    });
    DensityMatrix::new(m, vec![2; k])
}

pub fn lro_pair_state(n: usize, t: f64) -> Result<DensityMatrix> {
    CollectiveModel::new(n)?;
    lro_reduced_state(n, 2, t)
}

pub fn lro_triple_state(n: usize, t: f64) -> Result<DensityMatrix> {
    if n < 4 {
        return Err(Error::Domain(format!("triple state needs N >= 4, got {n}")));
    }
    lro_reduced_state(n, 3, t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LroCut {
    /// Spins 1|2 of the pair state.
    Pair,
    /// Spin 1 against spins 2,3 of the triple state.
    Triple1v23,
}

pub fn lro_ln(n: usize, t: f64, cut: LroCut) -> Result<f64> {
    match cut {
        LroCut::Pair => qmat::log_negativity(&lro_pair_state(n, t)?, &Cut::first(2)?),
        LroCut::Triple1v23 => qmat::log_negativity(&lro_triple_state(n, t)?, &Cut::new(vec![0], 3)?),
    }
}

pub fn lro_ln_series(n: usize, times: &[f64], cut: LroCut) -> Result<LnTimeSeries> {
    let values = times
        .par_iter()
        .map(|&t| lro_ln(n, t, cut))
        .collect::<Result<Vec<f64>>>()?;
    Ok(LnTimeSeries::deterministic(times.to_vec(), values))
}

/// Times at which the pair is PPT (`LN ≤ tol`) while the 1|23 cut of the
/// triple carries `LN > tol`.
pub fn triple_beyond_pair(n: usize, times: &[f64], tol: f64) -> Result<Vec<f64>> {
    let flags = times
        .par_iter()
        .map(|&t| Ok(lro_ln(n, t, LroCut::Pair)? <= tol && lro_ln(n, t, LroCut::Triple1v23)? > tol))
        .collect::<Result<Vec<bool>>>()?;
    Ok(times.iter().zip(flags).filter(|(_, f)| *f).map(|(t, _)| *t).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Threshold {
    Absolute(f64),
    /// Fraction of the series maximum.
    RelativeToPeak(f64),
}

impl Threshold {
    pub const DEFAULT: Threshold = Threshold::Absolute(1e-4);

    fn level(self, values: &[f64]) -> f64 {
        match self {
            Threshold::Absolute(x) => x,
            Threshold::RelativeToPeak(f) => f * values.iter().cloned().fold(0.0, f64::max),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseRevivalReport {
    pub threshold: f64,
    pub collapse_time: f64,
    /// Upward threshold crossings after the collapse.
    pub revival_times: Vec<f64>,
    /// Midpoints of the revival bursts followed by at least `window` points
    /// below threshold inside the series.
    pub revival_centers: Vec<f64>,
    /// Mean spacing of the burst centers, counting the initial burst at `t = 0`.
    pub revival_period: Option<f64>,
}

fn crossing(t0: f64, v0: f64, t1: f64, v1: f64, level: f64) -> f64 {
    if v1 == v0 {
        t1
    } else {
        t0 + (t1 - t0) * (level - v0) / (v1 - v0)
    }
}

/// Collapse time and revivals of an LN series.
///
/// Grid points above the threshold form bursts; bursts separated by fewer
/// than `window` points below threshold are merged. The collapse is the end
/// of the first burst, which must be followed by at least `window` points
/// below threshold; every later burst is a revival. Crossing times are
/// linearly interpolated between grid points. The LN is even in `t` for every
/// model here, so the initial burst is centered on `t = 0`.
pub fn detect_collapse_revival(
    series: &LnTimeSeries,
    threshold: Threshold,
    window: usize,
) -> Result<CollapseRevivalReport> {
    let t = &series.times;
    let v = &series.mean_ln;
    let n = v.len();
    let level = threshold.level(v);
    if !(level > 0.0) {
        return Err(Error::Inconclusive("threshold is not positive".into()));
    }
    let mut bursts: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        if v[i] > level {
            let start = i;
            while i < n && v[i] > level {
                i += 1;
            }
            match bursts.last_mut() {
                Some(last) if start - last.1 < window => last.1 = i,
                _ => bursts.push((start, i)),
            }
        } else {
            i += 1;
        }
    }
    let (first, rest) = bursts
        .split_first()
        .ok_or_else(|| Error::Inconclusive("series never exceeds the threshold".into()))?;
    if first.1 + window > n {
        return Err(Error::Inconclusive("no sustained collapse inside the series".into()));
    }
    let down = |e: usize| crossing(t[e - 1], v[e - 1], t[e], v[e], level);
    let up = |s: usize| if s == 0 { t[0] } else { crossing(t[s - 1], v[s - 1], t[s], v[s], level) };
    let collapse_time = down(first.1);
    let revival_times: Vec<f64> = rest.iter().map(|b| up(b.0)).collect();
    let revival_centers: Vec<f64> = rest
        .iter()
        .filter(|b| b.1 + window <= n)
        .map(|b| 0.5 * (up(b.0) + down(b.1)))
        .collect();
    let revival_period = revival_centers.last().map(|&c| c / revival_centers.len() as f64);
    Ok(CollapseRevivalReport {
        threshold: level,
        collapse_time,
        revival_times,
        revival_centers,
        revival_period,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub ns: Vec<usize>,
    pub collapse_times: Vec<f64>,
    pub revival_periods: Vec<f64>,
    /// `log τ_C` against `log N`.
    pub collapse_fit: LinearFit,
    /// `τ_R` against `N`.
    pub revival_fit: LinearFit,
}

/// Pair-LN collapse and revival times over several `N`, each on
/// `points` grid points spanning `periods` revival periods.
pub fn scaling_study(ns: &[usize], threshold: Threshold, points: usize, periods: f64) -> Result<ScalingReport> {
    if ns.len() < 2 {
        return Err(Error::Domain("scaling fit needs at least two sizes".into()));
    }
    let mut collapse_times = Vec::with_capacity(ns.len());
    let mut revival_periods = Vec::with_capacity(ns.len());
    for &n in ns {
        let model = CollectiveModel::new(n)?;
        let times = linspace(0.0, periods * model.revival_period(), points);
        let report = detect_collapse_revival(&lro_ln_series(n, &times, LroCut::Pair)?, threshold, COLLAPSE_WINDOW)?;
        collapse_times.push(report.collapse_time);
        revival_periods.push(
            report
                .revival_period
                .ok_or_else(|| Error::Inconclusive(format!("no complete revival for N={n}")))?,
        );
    }
    let nf: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    Ok(ScalingReport {
        collapse_fit: log_log_fit(&nf, &collapse_times),
        revival_fit: linear_fit(&nf, &revival_periods),
        ns: ns.to_vec(),
        collapse_times,
        revival_periods,
    })
}
