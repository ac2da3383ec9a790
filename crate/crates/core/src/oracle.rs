//! Brute-force state-vector evolution for Hamiltonians diagonal in `σ^z`.
//!
//! The initial state is `|+⟩^⊗N`, so after time `t` the amplitude of basis
//! state `k` is `2^{−N/2} e^{−i t E_k}`. Reduced states follow from an exact
//! partial trace. This is the reference every closed form is checked against.

use serde::{Deserialize, Serialize};

use crate::ea::{pair_state, CouplingDistribution};
use crate::error::{Error, Result};
use crate::hopfield::{nn_pair_state, sample_patterns, PatternSet};
use crate::lattice::{build_finite_lattice, FiniteLattice, Geometry, MAX_ORACLE_SITES};
use crate::lro::{lro_pair_state, lro_triple_state};
use crate::qmat::{CMatrix, DensityMatrix, C64};
use crate::sampling::sample_stream;

/// Largest subsystem [`reduced_state`] returns.
pub const MAX_KEEP: usize = 4;

/// Prefactor conventions of the Hamiltonians built here, for run manifests.
pub const CONVENTIONS: &str = "edwards_anderson: H = -(1/4) sum_<ij> J_ij sz_i sz_j over lattice bonds; \
collective: H = (1/N) S^2 with S = sum_i sz_i, i = j terms included; \
hopfield: H = (1/N) sum_{i,j} sum_mu xi_mu^i xi_mu^j / lambda_mu^2 sz_i sz_j, i = j terms included; \
spin value +1 for |0>, -1 for |1>; evolution exp(-i H t)";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    EdwardsAnderson,
    Collective { include_self_terms: bool },
    Hopfield,
}

/// Energy of every computational basis state.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalHamiltonian {
    n_spins: usize,
    energy: Vec<f64>,
    convention: Convention,
}

/// `+1` for `|0⟩`, `−1` for `|1⟩`; site 0 is the most significant bit.
#[inline]
pub fn spin(basis: usize, site: usize, n: usize) -> f64 {
    if (basis >> (n - 1 - site)) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_ORACLE_SITES {
        Err(Error::TooLarge {
            n_sites: n,
            cap: MAX_ORACLE_SITES,
        })
    } else if n == 0 {
        Err(Error::Domain("at least one spin is required".into()))
    } else {
        Ok(())
    }
}

impl DiagonalHamiltonian {
    pub fn from_table(energy: Vec<f64>, convention: Convention) -> Result<Self> {
        let n = energy.len().trailing_zeros() as usize;
        if 1usize << n != energy.len() {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                got: energy.len(),
            });
        }
        check_size(n)?;
        Ok(Self {
            n_spins: n,
            energy,
            convention,
        })
    }

    fn tabulate(n: usize, convention: Convention, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        check_size(n)?;
        let mut spins = vec![0.0; n];
        let energy = (0..1usize << n)
            .map(|k| {
                for (i, s) in spins.iter_mut().enumerate() {
                    *s = spin(k, i, n);
                }
                f(&spins)
            })
            .collect();
        Ok(Self {
            n_spins: n,
            energy,
            convention,
        })
    }

    /// `−¼ Σ_bonds J_ab σ^z_a σ^z_b`
    pub fn edwards_anderson(lattice: &FiniteLattice) -> Result<Self> {
        Self::tabulate(lattice.n_sites, Convention::EdwardsAnderson, |s| {
            -0.25
                * lattice
                    .edges
                    .iter()
                    .map(|e| e.coupling * s[e.a] * s[e.b])
                    .sum::<f64>()
        })
    }

    /// `S²/N`, or `(S² − N)/N` without the `i = j` terms.
    pub fn collective(n: usize, include_self_terms: bool) -> Result<Self> {
        let nf = n as f64;
        Self::tabulate(n, Convention::Collective { include_self_terms }, |s| {
            let total: f64 = s.iter().sum();
            if include_self_terms {
                total * total / nf
            } else {
                (total * total - nf) / nf
            }
        })
    }

    /// `(1/N) Σ_μ (Σ_i ξ_μ^i σ^z_i)² / λ_μ²`
    pub fn hopfield(patterns: &PatternSet) -> Result<Self> {
        let n = patterns.n_spins();
        let nf = n as f64;
        Self::tabulate(n, Convention::Hopfield, |s| {
            (0..patterns.p())
                .map(|mu| {
                    let overlap: f64 = patterns
                        .row(mu)
                        .iter()
                        .zip(s)
                        .map(|(&x, &si)| f64::from(x) * si)
                        .sum();
                    overlap * overlap / patterns.weight(mu).powi(2)
                })
                .sum::<f64>()
                / nf
        })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn energies(&self) -> &[f64] {
        &self.energy
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }
}

/// `e^{−iHt} |+⟩^⊗N`
pub fn evolve_plus_state(h: &DiagonalHamiltonian, t: f64) -> Vec<C64> {
    let amp = (0.5f64).powf(h.n_spins as f64 / 2.0);
    h.energy
        .iter()
        .map(|&e| C64::from_polar(amp, -t * e))
        .collect()
}

/// Exact partial trace of `|ψ⟩⟨ψ|` onto the ordered sites `keep`
/// (the first kept site becomes the most significant qubit).
pub fn reduced_state(psi: &[C64], keep: &[usize]) -> Result<DensityMatrix> {
    let n = psi.len().trailing_zeros() as usize;
    if 1usize << n != psi.len() {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            got: psi.len(),
        });
    }
    if keep.is_empty() || keep.len() > MAX_KEEP {
        return Err(Error::Domain(format!(
            "can keep between 1 and {MAX_KEEP} sites, got {}",
            keep.len()
        )));
    }
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() || sorted.iter().any(|&k| k >= n) {
        return Err(Error::Domain(format!("invalid site subset {keep:?} for {n} sites")));
    }

    let k = keep.len();
    let rest: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
    let (dk, dr) = (1usize << k, 1usize << rest.len());
    let mut block = vec![C64::new(0.0, 0.0); dk * dr];
    for (basis, &amp) in psi.iter().enumerate() {
        let bit = |site: usize| (basis >> (n - 1 - site)) & 1;
        let a = keep.iter().fold(0, |acc, &s| (acc << 1) | bit(s));
        let r = rest.iter().fold(0, |acc, &s| (acc << 1) | bit(s));
        block[a * dr + r] = amp;
    }
    let mut rho = CMatrix::zeros(dk);
    for a in 0..dk {
        for b in a..dk {
            let v: C64 = (0..dr)
                .map(|r| block[a * dr + r] * block[b * dr + r].conj())
                .sum();
            rho[(a, b)] = v;
            rho[(b, a)] = v.conj();
        }
        rho[(a, a)].im = 0.0;
    }
    DensityMatrix::qubits(rho)
}

/// One closed-form-versus-oracle comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationCase {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CertificationCase {
    fn new(name: String, max_deviation: f64, tolerance: f64) -> Self {
        Self {
            name,
            pass: max_deviation <= tolerance,
            max_deviation,
            tolerance,
        }
    }
}

/// Max-entry tolerance of every certification case.
pub const CERTIFICATION_TOL: f64 = 1e-10;

/// Runs every closed form against the oracle on random instances:
/// E-A pair states on chain, square and honeycomb cells, the collective pair
/// and triple states, and Hopfield pair states.
pub fn certification_suite(seed: u64) -> Result<Vec<CertificationCase>> {
    let times = [0.3, 1.0, 3.0, 10.0];
    let mut cases = Vec::new();

    let ea_cells: [(Geometry, &[usize]); 4] = [
        (Geometry::Chain1d, &[8]),
        (Geometry::Chain1d, &[16]),
        (Geometry::Square2d, &[4, 3]),
        (Geometry::Honeycomb2d, &[2, 2]),
    ];
    let dist = CouplingDistribution::new(0.5, 1.0)?;
    for (idx, (g, extent)) in ea_cells.iter().enumerate() {
        let mut rng = sample_stream(seed, idx as u64);
        let lattice = build_finite_lattice(*g, extent, &dist, &mut rng)?;
        let h = DiagonalHamiltonian::edwards_anderson(&lattice)?;
        let pn = lattice.pair_neighborhood(0, 1)?;
        let mut worst = 0.0f64;
        for &t in &times {
            let oracle = reduced_state(&evolve_plus_state(&h, t), &[0, 1])?;
            worst = worst.max(pair_state(&pn, t).matrix().max_abs_diff(oracle.matrix()));
        }
        cases.push(CertificationCase::new(
            format!("ea_pair/{g}/{extent:?}"),
            worst,
            CERTIFICATION_TOL,
        ));
    }

    let lro_times = [0.1, 1.0, 5.0, 10.0];
    for n in [4usize, 8, 10, 12] {
        let h = DiagonalHamiltonian::collective(n, true)?;
        let (mut pair_dev, mut triple_dev) = (0.0f64, 0.0f64);
        for &t in &lro_times {
            let psi = evolve_plus_state(&h, t);
            let pair = reduced_state(&psi, &[0, 1])?;
            let triple = reduced_state(&psi, &[0, 1, 2])?;
            pair_dev = pair_dev.max(lro_pair_state(n, t)?.matrix().max_abs_diff(pair.matrix()));
            triple_dev =
                triple_dev.max(lro_triple_state(n, t)?.matrix().max_abs_diff(triple.matrix()));
        }
        cases.push(CertificationCase::new(format!("lro_pair/N={n}"), pair_dev, CERTIFICATION_TOL));
        cases.push(CertificationCase::new(
            format!("lro_triple/N={n}"),
            triple_dev,
            CERTIFICATION_TOL,
        ));
    }

    let nn_times = [0.2, 0.7, 2.0, 6.0];
    for (idx, (p, n)) in [(1usize, 8usize), (2, 10), (3, 12), (2, 12)].iter().enumerate() {
        let ps = sample_patterns(*p, *n, seed.wrapping_add(1000 + idx as u64))?;
        let h = DiagonalHamiltonian::hopfield(&ps)?;
        let mut worst = 0.0f64;
        for &t in &nn_times {
            let oracle = reduced_state(&evolve_plus_state(&h, t), &[0, 1])?;
            worst = worst.max(nn_pair_state(&ps, t).matrix().max_abs_diff(oracle.matrix()));
        }
        cases.push(CertificationCase::new(
            format!("hopfield_pair/p={p}/N={n}"),
            worst,
            CERTIFICATION_TOL,
        ));
    }
    Ok(cases)
}
