//! Edwards-Anderson glass `H = −¼ Σ_⟨ij⟩ J_ij σ^z_i σ^z_j` with i.i.d.
//! Gaussian couplings, quenched from `|+⟩^⊗N`.
//!
//! The nearest-neighbor pair state depends only on the pair coupling `J₁₂`
//! and on the couplings of each member to its exterior neighbors. With
//! `c₁ = Π_k cos(J_{1k} t/2)`, `c₂ = Π_k cos(J_{2k} t/2)` and `e = e^{iJ₁₂t/2}`:
//!
//! ```text
//! 4ρ = I + e(c₂|00⟩⟨01| + c₁|00⟩⟨10|) + e*(c₁|01⟩⟨11| + c₂|10⟩⟨11|)
//!        + c₁c₂(|00⟩⟨11| + |01⟩⟨10|) + h.c.
//! ```

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{sample_pair_neighborhood, FiniteLattice, Geometry, PairNeighborhood};
use crate::oracle::{evolve_plus_state, reduced_state, DiagonalHamiltonian};
use crate::qmat::{self, CMatrix, Cut, DensityMatrix, C64};
use crate::sampling::{sample_moments, sample_stream, sample_sum};
use crate::series::{linspace, LnTimeSeries};

/// PPT tolerance for sample-averaged states (statistical noise allowance).
pub const MEAN_STATE_PPT_TOL: f64 = 1e-7;

/// Window over which the long-time quenched value is averaged.
pub const TAIL_WINDOW: (f64, f64) = (40.0, 50.0);
pub const TAIL_POINTS: usize = 11;
pub const DEFAULT_SAMPLES: usize = 200_000;

/// Gaussian couplings with mean `J` and variance `σ²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingDistribution {
    mean: f64,
    variance: f64,
}

impl CouplingDistribution {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance >= 0.0) || !variance.is_finite() || !mean.is_finite() {
            return Err(Error::Domain(format!(
                "coupling distribution needs finite mean and variance >= 0, got ({mean}, {variance})"
            )));
        }
        Ok(Self { mean, variance })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.mean + self.std_dev() * z
    }
}

fn cos_product(couplings: &[f64], t: f64) -> f64 {
    couplings.iter().map(|j| (j * t / 2.0).cos()).product()
}

/// Reduced state of a nearest-neighbor pair at time `t`.
pub fn pair_state(pn: &PairNeighborhood, t: f64) -> DensityMatrix {
    let c1 = cos_product(&pn.nbrs1, t);
    let c2 = cos_product(&pn.nbrs2, t);
    let e = C64::from_polar(0.25, pn.j12 * t / 2.0);
    let mut m = CMatrix::identity(4).scale(0.25);
    let upper = [
        (0, 1, e * c2),
        (0, 2, e * c1),
        (1, 3, e.conj() * c1),
        (2, 3, e.conj() * c2),
        (0, 3, C64::new(0.25 * c1 * c2, 0.0)),
        (1, 2, C64::new(0.25 * c1 * c2, 0.0)),
    ];
    for (i, j, v) in upper {
        m[(i, j)] = v;
        m[(j, i)] = v.conj();
    }
    DensityMatrix::new(m, vec![2, 2]).expect("pair state is Hermitian with unit trace")
}

/// Logarithmic negativity of [`pair_state`] across the 1|2 cut.
pub fn pair_ln(pn: &PairNeighborhood, t: f64) -> f64 {
    let cut = Cut::first(2).expect("two-qubit cut");
    qmat::log_negativity(&pair_state(pn, t), &cut).expect("4x4 Hermitian eigenvalues converge")
}

/// Quenched average of the pair LN: per time, mean/std/sem over `n_samples`
/// independent neighborhoods. Sample `i` draws from stream `(master_seed, i)`.
pub fn quenched_ln_series(
    g: Geometry,
    dist: &CouplingDistribution,
    times: &[f64],
    n_samples: usize,
    master_seed: u64,
) -> Result<LnTimeSeries> {
    if n_samples == 0 {
        return Err(Error::Domain("n_samples must be at least 1".into()));
    }
    let m = sample_moments(n_samples, times.len(), |i| {
        let mut rng = sample_stream(master_seed, i as u64);
        let pn = sample_pair_neighborhood(g, dist, &mut rng);
        times.iter().map(|&t| pair_ln(&pn, t)).collect()
    });
    Ok(LnTimeSeries::from_moments(times.to_vec(), &m))
}

/// Long-time quenched LN from the tail window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    /// Mean LN over samples and window times.
    pub mean: f64,
    /// Per-time standard deviation over samples, averaged over the window.
    pub std: f64,
    /// Standard error of `mean` (spread of per-sample window averages).
    pub sem: f64,
    pub n_samples: usize,
    pub window: (f64, f64),
    pub points: usize,
}

/// Averages the quenched LN over [`TAIL_POINTS`] times spanning [`TAIL_WINDOW`].
pub fn long_time_estimate(
    g: Geometry,
    dist: &CouplingDistribution,
    n_samples: usize,
    master_seed: u64,
) -> Result<TailEstimate> {
    if n_samples == 0 {
        return Err(Error::Domain("n_samples must be at least 1".into()));
    }
    let times = linspace(TAIL_WINDOW.0, TAIL_WINDOW.1, TAIL_POINTS);
    let k = times.len();
    let m = sample_moments(n_samples, k + 1, |i| {
        let mut rng = sample_stream(master_seed, i as u64);
        let pn = sample_pair_neighborhood(g, dist, &mut rng);
        let mut v: Vec<f64> = times.iter().map(|&t| pair_ln(&pn, t)).collect();
        v.push(v.iter().sum::<f64>() / k as f64);
        v
    });
    let std = m.std();
    let sem = m.sem();
    Ok(TailEstimate {
        mean: m.mean[k],
        std: std[..k].iter().sum::<f64>() / k as f64,
        sem: sem[k],
        n_samples,
        window: TAIL_WINDOW,
        points: k,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeanStatePoint {
    pub t: f64,
    pub state: DensityMatrix,
    pub min_pt_eigenvalue: f64,
    pub is_ppt: bool,
}

/// Sample-averaged pair state per time, with its PPT status
/// (tolerance [`MEAN_STATE_PPT_TOL`]).
pub fn mean_state_series(
    g: Geometry,
    dist: &CouplingDistribution,
    times: &[f64],
    n_samples: usize,
    master_seed: u64,
) -> Result<Vec<MeanStatePoint>> {
    if n_samples == 0 {
        return Err(Error::Domain("n_samples must be at least 1".into()));
    }
    let per_time = 32;
    let sums = sample_sum(n_samples, per_time * times.len(), |i| {
        let mut rng = sample_stream(master_seed, i as u64);
        let pn = sample_pair_neighborhood(g, dist, &mut rng);
        let mut v = Vec::with_capacity(per_time * times.len());
        for &t in times {
            for z in pair_state(&pn, t).matrix().as_slice() {
                v.push(z.re);
                v.push(z.im);
            }
        }
        v
    });
    let cut = Cut::first(2)?;
    times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let chunk = &sums[k * per_time..(k + 1) * per_time];
            let entries = chunk
                .chunks(2)
                .map(|c| C64::new(c[0], c[1]) / n_samples as f64)
                .collect();
            let state = DensityMatrix::new(CMatrix::from_vec(entries)?, vec![2, 2])?;
            let min_pt_eigenvalue = qmat::min_pt_eigenvalue(&state, &cut)?;
            Ok(MeanStatePoint {
                t,
                is_ppt: min_pt_eigenvalue >= -MEAN_STATE_PPT_TOL,
                state,
                min_pt_eigenvalue,
            })
        })
        .collect()
}

/// LN of the oracle-reduced state of sites `a` and `b`, which must be at
/// graph distance 2.
pub fn nnn_ln_pair(lattice: &FiniteLattice, a: usize, b: usize, t: f64) -> Result<f64> {
    if a >= lattice.n_sites || b >= lattice.n_sites {
        return Err(Error::Lattice(format!("site out of range: ({a}, {b})")));
    }
    if lattice.distances_from(a)[b] != Some(2) {
        return Err(Error::Lattice(format!(
            "sites {a} and {b} are not next-nearest neighbors"
        )));
    }
    let h = DiagonalHamiltonian::edwards_anderson(lattice)?;
    let rho = reduced_state(&evolve_plus_state(&h, t), &[a, b])?;
    qmat::log_negativity(&rho, &Cut::first(2)?)
}

/// [`nnn_ln_pair`] for site 0 and its lowest-index next-nearest partner.
pub fn nnn_ln(lattice: &FiniteLattice, t: f64) -> Result<f64> {
    let b = lattice
        .next_nearest_partner()
        .ok_or_else(|| Error::Lattice("no site at distance 2 from site 0".into()))?;
    nnn_ln_pair(lattice, 0, b, t)
}
