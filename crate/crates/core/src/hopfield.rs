//! Hopfield-network Ising model
//! `H = (1/N) Σ_μ (Σ_i ξ_μ^i σ^z_i)² / λ_μ²` with random `±1` patterns.
//!
//! For the pair (1, 2) every coherence of the reduced state is a phase times
//! a product over the traced spins `i` of `cos(4t u_i/N)`, where `u_i` is one
//! of four pattern overlaps:
//!
//! | coherence    | phase              | `u_i`                 |
//! |--------------|--------------------|-----------------------|
//! | `⟨00|ρ|01⟩`  | `e^{−4itm₁₂/N}`    | `ξ^i·ξ^2`             |
//! | `⟨00|ρ|10⟩`  | `e^{−4itm₁₂/N}`    | `ξ^i·ξ^1`             |
//! | `⟨00|ρ|11⟩`  | 1                  | `ξ^i·(ξ^1 + ξ^2)`     |
//! | `⟨01|ρ|10⟩`  | 1                  | `ξ^i·(ξ^1 − ξ^2)`     |
//! | `⟨01|ρ|11⟩`  | `e^{+4itm₁₂/N}`    | `ξ^i·ξ^1`             |
//! | `⟨10|ρ|11⟩`  | `e^{+4itm₁₂/N}`    | `ξ^i·ξ^2`             |
//!
//! with `m₁₂ = ξ^1·ξ^2`, dot products running over patterns weighted by
//! `1/λ_μ²`, and all diagonal entries `¼`. Overlaps take few distinct values,
//! so the products are evaluated from a histogram.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lro::{detect_collapse_revival, CollapseRevivalReport, Threshold, COLLAPSE_WINDOW};
use crate::qmat::{self, CMatrix, Cut, DensityMatrix, C64};
use crate::sampling::{sample_moments, sample_stream, sample_sum};
use crate::series::{linspace, LnTimeSeries};
use crate::stats::{log_log_fit, LinearFit};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternSet {
    p: usize,
    n: usize,
    xi: Vec<i8>,
    lambda: Option<Vec<f64>>,
}

impl PatternSet {
    pub fn from_rows(rows: Vec<Vec<i8>>, lambda: Option<Vec<f64>>) -> Result<Self> {
        let p = rows.len();
        if p == 0 {
            return Err(Error::Domain("need at least one pattern".into()));
        }
        let n = rows[0].len();
        if n < 3 {
            return Err(Error::Domain(format!("patterns need N >= 3 entries, got {n}")));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: rows.iter().map(Vec::len).find(|&l| l != n).unwrap_or(n),
            });
        }
        if rows.iter().flatten().any(|&x| x != 1 && x != -1) {
            return Err(Error::Domain("pattern entries must be +1 or -1".into()));
        }
        if let Some(l) = &lambda {
            if l.len() != p {
                return Err(Error::DimensionMismatch { expected: p, got: l.len() });
            }
            if l.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
                return Err(Error::Domain("mode weights must be positive".into()));
            }
        }
        Ok(Self {
            p,
            n,
            xi: rows.concat(),
            lambda,
        })
    }

    /// i.i.d. fair `±1` entries, row by row.
    pub fn random<R: Rng + ?Sized>(p: usize, n: usize, rng: &mut R) -> Result<Self> {
        if p == 0 || n < 3 {
            return Err(Error::Domain(format!("need p >= 1 and N >= 3, got p={p}, N={n}")));
        }
        let xi = (0..p * n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        Ok(Self { p, n, xi, lambda: None })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_spins(&self) -> usize {
        self.n
    }

    pub fn row(&self, mu: usize) -> &[i8] {
        &self.xi[mu * self.n..(mu + 1) * self.n]
    }

    /// `λ_μ` (1 when no weights are given).
    pub fn weight(&self, mu: usize) -> f64 {
        self.lambda.as_ref().map_or(1.0, |l| l[mu])
    }

    pub fn is_weighted(&self) -> bool {
        self.lambda.is_some()
    }

    /// `J_ij = (1/N) Σ_μ ξ_μ^i ξ_μ^j / λ_μ²`
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.weighted_dot(i, j) / self.n as f64
    }

    fn weighted_dot(&self, i: usize, j: usize) -> f64 {
        (0..self.p)
            .map(|mu| f64::from(self.row(mu)[i] * self.row(mu)[j]) / self.weight(mu).powi(2))
            .sum()
    }

    pub fn negate_row(&mut self, mu: usize) {
        let n = self.n;
        self.xi[mu * n..(mu + 1) * n].iter_mut().for_each(|x| *x = -*x);
    }

    /// Relabels sites: new site `k` is old site `perm[k]`.
    pub fn permute_sites(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n];
        if perm.len() != self.n || perm.iter().any(|&k| k >= self.n || std::mem::replace(&mut seen[k], true)) {
            return Err(Error::Domain("not a permutation of the sites".into()));
        }
        let rows = (0..self.p)
            .map(|mu| perm.iter().map(|&k| self.row(mu)[k]).collect())
            .collect();
        Self::from_rows(rows, self.lambda.clone())
    }
}

pub fn sample_patterns(p: usize, n: usize, master_seed: u64) -> Result<PatternSet> {
    PatternSet::random(p, n, &mut sample_stream(master_seed, 0))
}

/// Overlap histograms of the pair (1, 2), reusable across times.
#[derive(Clone, Debug, PartialEq)]
pub struct PairOverlaps {
    n: usize,
    m12: f64,
    /// `(u, multiplicity)` for the overlaps with `ξ^2`, `ξ^1`, `ξ^1 + ξ^2`, `ξ^1 − ξ^2`.
    classes: [Vec<(f64, i32)>; 4],
}

fn histogram(mut values: Vec<f64>) -> Vec<(f64, i32)> {
    values.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, i32)> = Vec::new();
    for v in values {
        match out.last_mut() {
            Some((u, c)) if *u == v => *c += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

impl PairOverlaps {
    pub fn new(ps: &PatternSet) -> Self {
        let u2: Vec<f64> = (2..ps.n).map(|i| ps.weighted_dot(i, 1)).collect();
        let u1: Vec<f64> = (2..ps.n).map(|i| ps.weighted_dot(i, 0)).collect();
        let sum = u1.iter().zip(&u2).map(|(a, b)| a + b).collect();
        let diff = u1.iter().zip(&u2).map(|(a, b)| a - b).collect();
        Self {
            n: ps.n,
            m12: ps.weighted_dot(0, 1),
            classes: [histogram(u2), histogram(u1), histogram(sum), histogram(diff)],
        }
    }

    fn product(&self, class: usize, t: f64) -> f64 {
        let k = 4.0 * t / self.n as f64;
        self.classes[class]
            .iter()
            .map(|&(u, c)| (k * u).cos().powi(c))
            .product()
    }

    /// `Π_{i≠1,2} cos(4t ξ^i·ξ^2/N)`
    pub fn cos_product(&self, t: f64) -> f64 {
        self.product(0, t)
    }

    pub fn state(&self, t: f64) -> DensityMatrix {
        let [c2, c1, cs, cd] = [0, 1, 2, 3].map(|k| self.product(k, t));
        let e = C64::from_polar(0.25, -4.0 * t * self.m12 / self.n as f64);
        let mut m = CMatrix::identity(4).scale(0.25);
        let upper = [
            (0, 1, e * c2),
            (0, 2, e * c1),
            (0, 3, C64::new(0.25 * cs, 0.0)),
            (1, 2, C64::new(0.25 * cd, 0.0)),
            (1, 3, e.conj() * c1),
            (2, 3, e.conj() * c2),
        ];
        for (i, j, v) in upper {
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
        DensityMatrix::new(m, vec![2, 2]).expect("pair state is Hermitian with unit trace")
    }

    pub fn ln(&self, t: f64) -> f64 {
        let cut = Cut::first(2).expect("two-qubit cut");
        qmat::log_negativity(&self.state(t), &cut).expect("4x4 Hermitian eigenvalues converge")
    }
}

/// Reduced state of spins 1 and 2.
pub fn nn_pair_state(ps: &PatternSet, t: f64) -> DensityMatrix {
    PairOverlaps::new(ps).state(t)
}

/// Pair LN of one pattern realization on a time grid.
pub fn nn_ln_series(ps: &PatternSet, times: &[f64]) -> LnTimeSeries {
    let ov = PairOverlaps::new(ps);
    LnTimeSeries::deterministic(times.to_vec(), times.iter().map(|&t| ov.ln(t)).collect())
}

/// Quenched pair LN; sample `i` draws its patterns from stream `(master_seed, i)`.
pub fn quenched_nn_ln_series(
    p: usize,
    n: usize,
    times: &[f64],
    n_samples: usize,
    master_seed: u64,
) -> Result<LnTimeSeries> {
    if n_samples == 0 {
        return Err(Error::Domain("n_samples must be at least 1".into()));
    }
    PatternSet::random(p, n, &mut sample_stream(master_seed, 0))?;
    let m = sample_moments(n_samples, times.len(), |i| {
        let ps = PatternSet::random(p, n, &mut sample_stream(master_seed, i as u64)).expect("validated sizes");
        let ov = PairOverlaps::new(&ps);
        times.iter().map(|&t| ov.ln(t)).collect()
    });
    Ok(LnTimeSeries::from_moments(times.to_vec(), &m))
}

/// `exp(−8t²p/N)`
pub fn self_averaging_law(p: usize, n: usize, t: f64) -> f64 {
    (-8.0 * t * t * p as f64 / n as f64).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfAveragingReport {
    pub times: Vec<f64>,
    pub empirical_product: Vec<f64>,
    pub law_value: Vec<f64>,
    pub max_rel_dev: f64,
    /// Set when `N < 100` or `t/N > 0.1` somewhere on the grid.
    pub regime_warning: bool,
}

/// Quenched mean of `Π_{i≠1,2} cos(4t ξ^i·ξ^2/N)` against `exp(−8t²p/N)`.
pub fn self_averaging_check(
    p: usize,
    n: usize,
    times: &[f64],
    n_samples: usize,
    master_seed: u64,
) -> Result<SelfAveragingReport> {
    if n_samples == 0 {
        return Err(Error::Domain("n_samples must be at least 1".into()));
    }
    PatternSet::random(p, n, &mut sample_stream(master_seed, 0))?;
    let sums = sample_sum(n_samples, times.len(), |i| {
        let ps = PatternSet::random(p, n, &mut sample_stream(master_seed, i as u64)).expect("validated sizes");
        let ov = PairOverlaps::new(&ps);
        times.iter().map(|&t| ov.cos_product(t)).collect()
    });
    let empirical_product: Vec<f64> = sums.iter().map(|s| s / n_samples as f64).collect();
    let law_value: Vec<f64> = times.iter().map(|&t| self_averaging_law(p, n, t)).collect();
    let max_rel_dev = empirical_product
        .iter()
        .zip(&law_value)
        .map(|(e, l)| (e - l).abs() / l)
        .fold(0.0, f64::max);
    let regime_warning = n < 100 || times.iter().any(|&t| t / n as f64 > 0.1);
    Ok(SelfAveragingReport {
        times: times.to_vec(),
        empirical_product,
        law_value,
        max_rel_dev,
        regime_warning,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseStudy {
    pub n: usize,
    pub ps: Vec<usize>,
    pub collapse_times: Vec<f64>,
    /// `log τ_C` against `log p`.
    pub fit: LinearFit,
}

/// Collapse of the quenched pair LN for several `p` at fixed `N`. Each `p`
/// uses the grid `[0, 4√(N/p)]` with `points` points and its own seed offset.
pub fn collapse_study(
    n: usize,
    ps: &[usize],
    n_samples: usize,
    master_seed: u64,
    points: usize,
    threshold: Threshold,
) -> Result<CollapseStudy> {
    if ps.len() < 2 {
        return Err(Error::Domain("scaling fit needs at least two pattern counts".into()));
    }
    let mut collapse_times = Vec::with_capacity(ps.len());
    for (k, &p) in ps.iter().enumerate() {
        let times = linspace(0.0, 4.0 * (n as f64 / p as f64).sqrt(), points);
        let s = quenched_nn_ln_series(p, n, &times, n_samples, master_seed.wrapping_add(k as u64))?;
        collapse_times.push(detect_collapse_revival(&s, threshold, COLLAPSE_WINDOW)?.collapse_time);
    }
    let pf: Vec<f64> = ps.iter().map(|&p| p as f64).collect();
    Ok(CollapseStudy {
        n,
        ps: ps.to_vec(),
        fit: log_log_fit(&pf, &collapse_times),
        collapse_times,
    })
}

/// Collapse and revivals of one realization over `[0, t_max]`.
pub fn realization_revivals(
    ps: &PatternSet,
    t_max: f64,
    points: usize,
    threshold: Threshold,
) -> Result<CollapseRevivalReport> {
    detect_collapse_revival(&nn_ln_series(ps, &linspace(0.0, t_max, points)), threshold, COLLAPSE_WINDOW)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RevivalEstimate {
    pub p: usize,
    pub n: usize,
    /// Revival period of each realization that entangles, collapses and revives.
    pub periods: Vec<f64>,
    /// Realizations without a complete collapse/revival cycle (for example
    /// pattern sets whose pair never entangles).
    pub inconclusive: usize,
    pub median: f64,
}

/// Per-realization revival periods over `[0, t_max]` for `n_realizations`
/// pattern sets drawn from streams `(master_seed, i)`.
pub fn revival_estimate(
    p: usize,
    n: usize,
    n_realizations: usize,
    master_seed: u64,
    t_max: f64,
    points: usize,
    threshold: Threshold,
) -> Result<RevivalEstimate> {
    let mut periods = Vec::new();
    let mut inconclusive = 0;
    for i in 0..n_realizations {
        let ps = PatternSet::random(p, n, &mut sample_stream(master_seed, i as u64))?;
        match realization_revivals(&ps, t_max, points, threshold) {
            Ok(CollapseRevivalReport {
                revival_period: Some(period),
                ..
            }) => periods.push(period),
            Ok(_) | Err(Error::Inconclusive(_)) => inconclusive += 1,
            Err(e) => return Err(e),
        }
    }
    if periods.is_empty() {
        return Err(Error::Inconclusive(format!("no realization revives for p={p}, N={n}")));
    }
    let mut sorted = periods.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };
    Ok(RevivalEstimate {
        p,
        n,
        periods,
        inconclusive,
        median,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lro::lro_pair_state;
    use crate::oracle::{evolve_plus_state, reduced_state, DiagonalHamiltonian};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn oracle_pair(ps: &PatternSet, t: f64) -> DensityMatrix {
        let h = DiagonalHamiltonian::hopfield(ps).unwrap();
        reduced_state(&evolve_plus_state(&h, t), &[0, 1]).unwrap()
    }

    #[test]
    fn uniform_pattern_gives_uniform_couplings() {
        let ps = PatternSet::from_rows(vec![vec![1; 5]], None).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(ps.coupling(i, j), 0.2);
            }
        }
    }

    #[test]
    fn initial_state_is_plus() {
        let ps = sample_patterns(3, 9, 1).unwrap();
        let expect = CMatrix::from_fn(4, |_, _| C64::new(0.25, 0.0));
        assert!(nn_pair_state(&ps, 0.0).matrix().max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn single_uniform_pattern_is_the_collective_model() {
        for n in [5, 8, 12] {
            let ps = PatternSet::from_rows(vec![vec![1; n]], None).unwrap();
            for t in [0.3, 1.1, 6.0] {
                let a = nn_pair_state(&ps, t);
                assert!(a.matrix().max_abs_diff(lro_pair_state(n, t).unwrap().matrix()) < 1e-13);
                assert!(a.matrix().max_abs_diff(oracle_pair(&ps, t).matrix()) < 1e-12);
            }
        }
    }

    #[test]
    fn random_patterns_match_oracle() {
        let ps = sample_patterns(2, 10, 77).unwrap();
        assert!(nn_pair_state(&ps, 0.7).matrix().max_abs_diff(oracle_pair(&ps, 0.7).matrix()) < 1e-10);
        for (p, n) in [(1, 9), (3, 11)] {
            let ps = sample_patterns(p, n, 5).unwrap();
            for t in [0.2, 1.3, 4.0, 9.5] {
                assert!(nn_pair_state(&ps, t).matrix().max_abs_diff(oracle_pair(&ps, t).matrix()) < 1e-10);
            }
        }
    }

    #[test]
    fn weighted_patterns_match_oracle() {
        let base = sample_patterns(2, 9, 12).unwrap();
        let rows = (0..2).map(|mu| base.row(mu).to_vec()).collect();
        let ps = PatternSet::from_rows(rows, Some(vec![0.8, 1.7])).unwrap();
        for t in [0.4, 2.5] {
            assert!(nn_pair_state(&ps, t).matrix().max_abs_diff(oracle_pair(&ps, t).matrix()) < 1e-10);
        }
    }

    #[test]
    fn fair_coin_entries() {
        let ps = sample_patterns(1000, 1000, 2024).unwrap();
        let mean = (0..1000).flat_map(|mu| ps.row(mu).iter().map(|&x| f64::from(x))).sum::<f64>() / 1e6;
        assert!(mean.abs() <= 4e-3, "{mean}");
        assert_eq!(sample_patterns(3, 20, 9).unwrap(), sample_patterns(3, 20, 9).unwrap());
    }

    #[test]
    fn row_sign_leaves_couplings() {
        let ps = sample_patterns(3, 8, 3).unwrap();
        let mut flipped = ps.clone();
        flipped.negate_row(1);
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(ps.coupling(i, j), flipped.coupling(i, j));
            }
        }
    }

    #[test]
    fn invalid_patterns_rejected() {
        assert!(PatternSet::from_rows(vec![], None).is_err());
        assert!(PatternSet::from_rows(vec![vec![1, -1]], None).is_err());
        assert!(PatternSet::from_rows(vec![vec![1, 0, 1]], None).is_err());
        assert!(PatternSet::from_rows(vec![vec![1, 1, 1], vec![1, 1]], None).is_err());
        assert!(PatternSet::from_rows(vec![vec![1, 1, 1]], Some(vec![1.0, 2.0])).is_err());
        assert!(PatternSet::from_rows(vec![vec![1, 1, 1]], Some(vec![0.0])).is_err());
        assert!(sample_patterns(0, 5, 1).is_err());
    }

    #[test]
    fn matrix_elements_periodic_in_pi_n_over_2() {
        for (p, n) in [(1, 30), (2, 31), (3, 40)] {
            let ps = sample_patterns(p, n, 8).unwrap();
            let period = PI * n as f64 / 2.0;
            for t in [0.3, 2.0, 7.7] {
                let a = nn_pair_state(&ps, t);
                let b = nn_pair_state(&ps, t + period);
                assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-10);
            }
        }
    }

    #[test]
    fn ln_revival_periods_by_parity() {
        // the LN repeats every πN/4 for odd p and every πN/8 for even p
        let n = 60;
        for p in 1..=4 {
            let ps = sample_patterns(p, n, 21 + p as u64).unwrap();
            let period = PI * n as f64 / if p % 2 == 1 { 4.0 } else { 8.0 };
            let ov = PairOverlaps::new(&ps);
            for t in [0.5, 1.5, 3.0] {
                assert!((ov.ln(t) - ov.ln(t + period)).abs() < 1e-9, "p={p} t={t}");
            }
        }
    }

    #[test]
    fn oracle_ln_periods_by_parity() {
        let cut = Cut::first(2).unwrap();
        for n in [8, 10, 12] {
            for p in 1..=3 {
                let ps = sample_patterns(p, n, 40 + (n * p) as u64).unwrap();
                let h = DiagonalHamiltonian::hopfield(&ps).unwrap();
                let ln = |t: f64| {
                    let rho = reduced_state(&evolve_plus_state(&h, t), &[0, 1]).unwrap();
                    qmat::log_negativity(&rho, &cut).unwrap()
                };
                let period = PI * n as f64 / if p % 2 == 1 { 4.0 } else { 8.0 };
                for t in [0.4, 1.3] {
                    assert!((ln(t) - ln(t + period)).abs() < 1e-9, "n={n} p={p} t={t}");
                }
            }
        }
    }

    #[test]
    fn self_averaging_at_zero_and_small_n() {
        let r = self_averaging_check(3, 500, &[0.0], 10, 1).unwrap();
        assert_eq!(r.empirical_product, vec![1.0]);
        assert_eq!(r.law_value, vec![1.0]);
        assert!(!r.regime_warning);
        let r = self_averaging_check(2, 20, &linspace(0.0, 3.0, 5), 100, 1).unwrap();
        assert!(r.regime_warning);
    }

    #[test]
    fn quenched_series_is_seed_deterministic() {
        let times = linspace(0.0, 5.0, 9);
        let a = quenched_nn_ln_series(2, 30, &times, 300, 4).unwrap();
        let b = quenched_nn_ln_series(2, 30, &times, 300, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mean_ln[0], 0.0);
        assert!(a.mean_ln[2] > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn gauge_invariance(seed in 0u64..10_000, p in 1usize..5, n in 4usize..40, mu in 0usize..4, t in 0.0f64..30.0) {
            let ps = sample_patterns(p, n, seed).unwrap();
            let mut flipped = ps.clone();
            flipped.negate_row(mu % p);
            let d = nn_pair_state(&ps, t).matrix().max_abs_diff(nn_pair_state(&flipped, t).matrix());
            prop_assert!(d <= 1e-12);
        }

        #[test]
        fn traced_site_relabeling(seed in 0u64..10_000, p in 1usize..5, n in 4usize..40, t in 0.0f64..30.0) {
            let ps = sample_patterns(p, n, seed).unwrap();
            let mut perm: Vec<usize> = (0..n).collect();
            perm[2..].reverse();
            perm[2..].rotate_left((seed as usize) % (n - 2));
            let moved = ps.permute_sites(&perm).unwrap();
            prop_assert_eq!(nn_pair_state(&ps, t), nn_pair_state(&moved, t));
        }

        #[test]
        fn coherences_bounded(seed in 0u64..10_000, p in 1usize..6, n in 4usize..60, t in 0.0f64..50.0) {
            let rho = nn_pair_state(&sample_patterns(p, n, seed).unwrap(), t);
            prop_assert!(rho.matrix().as_slice().iter().all(|x| x.norm() <= 0.25 + 1e-15));
        }
    }
}
