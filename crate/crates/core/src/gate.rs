//! Measurement-based Hadamard gate on two coupled spins.
//!
//! Particle 1 holds the input `a|0⟩ + b|1⟩`, particle 2 starts in `|+⟩`. The
//! pair evolves under `−¼ j σ^z σ^z` for a hold time `t*`, i.e. under
//! `exp(iθ σ^z σ^z)` with `θ = j t*/4`, which leaves particle 2 in
//! `(e^{iθs}|0⟩ + e^{−iθs}|1⟩)/√2` on the branch where particle 1 has spin `s`.
//! At the nominal angle `θ₀ = J_ref t*/4` the protocol rotates particle 2 by
//! `diag(1, e^{2iθ₀})`, measures particle 1 in the equatorial basis
//! `(|0⟩ ± e^{iφ}|1⟩)/√2` with `φ = −2θ₀` and applies `X` on outcome `−`.
//! For `j = J_ref` and `θ₀ = π/4` particle 2 ends in `a|+⟩ + b|−⟩` exactly.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::ea::CouplingDistribution;
use crate::error::{Error, Result};
use crate::qmat::{self, CMatrix, DensityMatrix, C64};
use crate::sampling::{sample_moments, sample_stream};
use crate::series::linspace;

pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Relative half-width of the hold-time search around `π/J_ref`.
pub const HOLD_TIME_SPAN: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputQubit {
    pub a: C64,
    pub b: C64,
}

impl InputQubit {
    pub fn new(a: C64, b: C64) -> Result<Self> {
        let norm = a.norm_sqr() + b.norm_sqr();
        if (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Domain(format!("input qubit has norm² {norm}")));
        }
        Ok(Self { a, b })
    }

    /// `|0⟩, |1⟩, |±⟩, |±i⟩`
    pub fn pauli_eigenstates() -> [InputQubit; 6] {
        let r = FRAC_1_SQRT_2;
        let c = |re: f64, im: f64| C64::new(re, im);
        [
            (c(1.0, 0.0), c(0.0, 0.0)),
            (c(0.0, 0.0), c(1.0, 0.0)),
            (c(r, 0.0), c(r, 0.0)),
            (c(r, 0.0), c(-r, 0.0)),
            (c(r, 0.0), c(0.0, r)),
            (c(r, 0.0), c(0.0, -r)),
        ]
        .map(|(a, b)| InputQubit { a, b })
    }

    /// Hadamard image `a|+⟩ + b|−⟩`.
    pub fn target(&self) -> [C64; 2] {
        [(self.a + self.b) * FRAC_1_SQRT_2, (self.a - self.b) * FRAC_1_SQRT_2]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn apply(self, v: [C64; 2]) -> [C64; 2] {
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::I => v,
            Pauli::X => [v[1], v[0]],
            Pauli::Y => [-i * v[1], i * v[0]],
            Pauli::Z => [v[0], -v[1]],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

/// Unit Bloch vector `(sin ϑ cos φ, sin ϑ sin φ, cos ϑ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub polar: f64,
    pub azimuth: f64,
}

impl BlochVector {
    pub fn equatorial(azimuth: f64) -> Self {
        Self { polar: PI / 2.0, azimuth }
    }

    pub fn cartesian(&self) -> [f64; 3] {
        let s = self.polar.sin();
        [s * self.azimuth.cos(), s * self.azimuth.sin(), self.polar.cos()]
    }

    /// Eigenvectors of `n·σ` for eigenvalues `+1` and `−1`.
    pub fn basis(&self) -> [[C64; 2]; 2] {
        let (c, s) = ((self.polar / 2.0).cos(), (self.polar / 2.0).sin());
        let e = C64::from_polar(1.0, self.azimuth);
        [[C64::new(c, 0.0), e * s], [C64::new(-s, 0.0), e * c]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateProtocol {
    pub hold_time: f64,
    /// Phase of the `diag(1, e^{iα})` rotation applied to particle 2.
    pub frame_phase: f64,
    pub measurement_basis: BlochVector,
    /// Pauli applied to particle 2 after outcome `+` and `−`.
    pub correction: [Pauli; 2],
}

impl GateProtocol {
    /// Protocol tuned to the coupling `j_ref` at the given hold time.
    pub fn tuned(j_ref: f64, hold_time: f64) -> Self {
        let theta0 = j_ref * hold_time / 4.0;
        Self {
            hold_time,
            frame_phase: 2.0 * theta0,
            measurement_basis: BlochVector::equatorial(-2.0 * theta0),
            correction: [Pauli::I, Pauli::X],
        }
    }

    /// Hold time `π/j_ref`.
    pub fn nominal(j_ref: f64) -> Result<Self> {
        if j_ref == 0.0 || !j_ref.is_finite() {
            return Err(Error::Domain("reference coupling must be finite and non-zero".into()));
        }
        Ok(Self::tuned(j_ref, PI / j_ref))
    }
}

/// `J` when the mean coupling is non-zero, the spread `σ` otherwise.
pub fn reference_coupling(dist: &CouplingDistribution) -> f64 {
    if dist.mean() != 0.0 {
        dist.mean()
    } else {
        dist.std_dev()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub outcome: Outcome,
    pub probability: f64,
    pub state: DensityMatrix,
    pub fidelity: f64,
}

/// Both measurement branches, with corrected output states.
pub fn gate_branches(input: &InputQubit, j12: f64, protocol: &GateProtocol) -> Result<[Branch; 2]> {
    let theta = j12 * protocol.hold_time / 4.0;
    let frame = C64::from_polar(1.0, protocol.frame_phase);
    let particle2 = |s: f64| {
        [
            C64::from_polar(FRAC_1_SQRT_2, theta * s),
            C64::from_polar(FRAC_1_SQRT_2, -theta * s) * frame,
        ]
    };
    let branches = [(input.a, particle2(1.0)), (input.b, particle2(-1.0))];
    let basis = protocol.measurement_basis.basis();
    let target = input.target();
    let build = |k: usize, outcome: Outcome| -> Result<Branch> {
        let mut out = [C64::new(0.0, 0.0); 2];
        for (m, (amp, q)) in branches.iter().enumerate() {
            let w = basis[k][m].conj() * amp;
            out[0] += w * q[0];
            out[1] += w * q[1];
        }
        let out = protocol.correction[k].apply(out);
        let probability = out[0].norm_sqr() + out[1].norm_sqr();
        let state = if probability > 0.0 {
            let r = probability.sqrt();
            DensityMatrix::from_pure(&[out[0] / r, out[1] / r], vec![2])?
        } else {
            DensityMatrix::maximally_mixed(vec![2])
        };
        let fidelity = qmat::fidelity_pure(&state, &target)?;
        Ok(Branch {
            outcome,
            probability,
            state,
            fidelity,
        })
    };
    Ok([build(0, Outcome::Plus)?, build(1, Outcome::Minus)?])
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateRun {
    pub outcome: Outcome,
    pub state: DensityMatrix,
    pub fidelity: f64,
}

/// One shot: the outcome is drawn with its Born probability.
pub fn run_gate_once<R: Rng + ?Sized>(
    input: &InputQubit,
    j12: f64,
    protocol: &GateProtocol,
    rng: &mut R,
) -> Result<GateRun> {
    let [plus, minus] = gate_branches(input, j12, protocol)?;
    let pick = if rng.random::<f64>() < plus.probability { plus } else { minus };
    Ok(GateRun {
        outcome: pick.outcome,
        state: pick.state,
        fidelity: pick.fidelity,
    })
}

/// Born-weighted fidelity over both outcomes.
pub fn outcome_averaged_fidelity(input: &InputQubit, j12: f64, protocol: &GateProtocol) -> Result<f64> {
    Ok(gate_branches(input, j12, protocol)?
        .iter()
        .map(|b| b.probability * b.fidelity)
        .sum())
}

/// Outcome-averaged output of the protocol as a 2×2 state, mixed over outcomes.
pub fn averaged_output(input: &InputQubit, j12: f64, protocol: &GateProtocol) -> Result<DensityMatrix> {
    let mut m = CMatrix::zeros(2);
    for b in gate_branches(input, j12, protocol)? {
        m.add_assign_scaled(b.state.matrix(), b.probability);
    }
    DensityMatrix::new(m, vec![2])
}

pub fn ensemble_fidelity(inputs: &[InputQubit], j12: f64, protocol: &GateProtocol) -> Result<f64> {
    let mut total = 0.0;
    for input in inputs {
        total += outcome_averaged_fidelity(input, j12, protocol)?;
    }
    Ok(total / inputs.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateFidelity {
    pub mean: f64,
    pub std: f64,
    pub sem: f64,
    pub n_samples: usize,
}

/// Quenched fidelity: sample `i` draws `j₁₂` from stream `(master_seed, i)`.
pub fn quenched_gate_fidelity(
    dist: &CouplingDistribution,
    protocol: &GateProtocol,
    inputs: &[InputQubit],
    n_samples: usize,
    master_seed: u64,
) -> Result<GateFidelity> {
    if n_samples == 0 || inputs.is_empty() {
        return Err(Error::Domain("need at least one sample and one input".into()));
    }
    ensemble_fidelity(inputs, dist.mean(), protocol)?;
    let m = sample_moments(n_samples, 1, |i| {
        let j = dist.sample(&mut sample_stream(master_seed, i as u64));
        vec![ensemble_fidelity(inputs, j, protocol).expect("normalized inputs")]
    });
    Ok(GateFidelity {
        mean: m.mean[0],
        std: m.std()[0],
        sem: m.sem()[0],
        n_samples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoldTimeScan {
    pub reference_coupling: f64,
    pub best: GateProtocol,
    pub best_fidelity: GateFidelity,
    /// `(t*, mean fidelity)` over the grid.
    pub grid: Vec<(f64, f64)>,
}

/// Grid search of `t*` over `±20%` around `π/J_ref`; every grid point reuses
/// the same coupling draws.
pub fn optimize_hold_time(
    dist: &CouplingDistribution,
    inputs: &[InputQubit],
    grid_points: usize,
    n_samples: usize,
    master_seed: u64,
) -> Result<HoldTimeScan> {
    let j_ref = reference_coupling(dist);
    let nominal = GateProtocol::nominal(j_ref)?;
    let mut best: Option<(GateProtocol, GateFidelity)> = None;
    let mut grid = Vec::with_capacity(grid_points);
    for scale in linspace(1.0 - HOLD_TIME_SPAN, 1.0 + HOLD_TIME_SPAN, grid_points.max(1)) {
        let protocol = GateProtocol::tuned(j_ref, nominal.hold_time * scale);
        let f = quenched_gate_fidelity(dist, &protocol, inputs, n_samples, master_seed)?;
        grid.push((protocol.hold_time, f.mean));
        if best.is_none_or(|(_, b)| f.mean > b.mean) {
            best = Some((protocol, f));
        }
    }
    let (best, best_fidelity) = best.expect("non-empty grid");
    Ok(HoldTimeScan {
        reference_coupling: j_ref,
        best,
        best_fidelity,
        grid,
    })
}

/// Optimal measure-and-prepare fidelity for an unknown qubit.
pub fn classical_benchmark() -> f64 {
    2.0 / 3.0
}

/// Ensemble fidelity of `protocol` with the coupling phase `θ = j t*/4`
/// uniform on `[0, 2π)`, by `points`-point midpoint quadrature (exact for
/// `points ≥ 3`, the integrand being a trigonometric polynomial of degree 2).
pub fn dephased_fidelity(inputs: &[InputQubit], protocol: &GateProtocol, points: usize) -> Result<f64> {
    let mut total = 0.0;
    for k in 0..points {
        let theta = 2.0 * PI * (k as f64 + 0.5) / points as f64;
        total += ensemble_fidelity(inputs, 4.0 * theta / protocol.hold_time, protocol)?;
    }
    Ok(total / points as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn six() -> [InputQubit; 6] {
        InputQubit::pauli_eigenstates()
    }

    #[test]
    fn exact_coupling_gives_hadamard() {
        for j in [5.0, -2.0, 0.7] {
            let protocol = GateProtocol::nominal(j).unwrap();
            for input in six() {
                for b in gate_branches(&input, j, &protocol).unwrap() {
                    assert!((b.probability - 0.5).abs() < 1e-12);
                    assert!((b.fidelity - 1.0).abs() < 1e-10);
                }
            }
        }
        let dist = CouplingDistribution::new(5.0, 0.0).unwrap();
        let f = quenched_gate_fidelity(&dist, &GateProtocol::nominal(5.0).unwrap(), &six(), 50, 1).unwrap();
        assert!((f.mean - 1.0).abs() < 1e-10 && f.std < 1e-10);
    }

    #[test]
    fn two_qubit_brute_force() {
        // U = exp(iθ σzσz), then measure particle 1 by projector, correct, compare.
        let (j, t) = (3.3, 0.71);
        let protocol = GateProtocol::tuned(2.9, t);
        let theta = j * t / 4.0;
        let zz = [1.0, -1.0, -1.0, 1.0];
        let u = CMatrix::from_fn(4, |r, c| if r == c { C64::from_polar(1.0, theta * zz[r]) } else { C64::new(0.0, 0.0) });
        let frame = CMatrix::from_fn(4, |r, c| {
            if r != c {
                C64::new(0.0, 0.0)
            } else if r % 2 == 1 {
                C64::from_polar(1.0, protocol.frame_phase)
            } else {
                C64::new(1.0, 0.0)
            }
        });
        for input in six() {
            let r = FRAC_1_SQRT_2;
            let psi0 = [input.a * r, input.a * r, input.b * r, input.b * r];
            let rho = CMatrix::outer(&psi0);
            let rho = frame.matmul(&u).matmul(&rho).matmul(&u.adjoint()).matmul(&frame.adjoint());
            let branches = gate_branches(&input, j, &protocol).unwrap();
            for (k, br) in branches.iter().enumerate() {
                let v = protocol.measurement_basis.basis()[k];
                let proj = CMatrix::from_fn(2, |a, b| v[a] * v[b].conj()).kron(&CMatrix::identity(2));
                let post = proj.matmul(&rho).matmul(&proj);
                let p = post.trace().re;
                assert!((p - br.probability).abs() < 1e-12);
                let reduced = CMatrix::from_fn(2, |a, b| (0..2).map(|m| post[(2 * m + a, 2 * m + b)]).sum::<C64>() / p);
                let x = CMatrix::from_fn(2, |a, b| C64::new(if a != b { 1.0 } else { 0.0 }, 0.0));
                let out = if k == 1 { x.matmul(&reduced).matmul(&x) } else { reduced };
                assert!(out.max_abs_diff(br.state.matrix()) < 1e-12);
            }
        }
    }

    #[test]
    fn born_probabilities_sum_to_one() {
        let mut rng = sample_stream(5, 0);
        for _ in 0..200 {
            let j: f64 = rng.random_range(-10.0..10.0);
            let protocol = GateProtocol {
                hold_time: rng.random_range(0.1..2.0),
                frame_phase: rng.random_range(0.0..6.0),
                measurement_basis: BlochVector {
                    polar: rng.random_range(0.0..PI),
                    azimuth: rng.random_range(0.0..6.0),
                },
                correction: [Pauli::Z, Pauli::Y],
            };
            let (x, y): (f64, f64) = (rng.random(), rng.random());
            let n = (x * x + y * y).sqrt();
            let input = InputQubit::new(C64::new(x / n, 0.0), C64::new(0.0, y / n)).unwrap();
            let br = gate_branches(&input, j, &protocol).unwrap();
            assert!((br[0].probability + br[1].probability - 1.0).abs() < 1e-12);
            for b in &br {
                assert!(b.state.matrix().hermiticity_error() < 1e-14);
                assert!((0.0..=1.0).contains(&b.fidelity));
            }
            assert!(averaged_output(&input, j, &protocol).unwrap().min_eigenvalue().unwrap() > -1e-12);
        }
    }

    #[test]
    fn computational_input_closed_form() {
        let zero = six()[0];
        let protocol = GateProtocol::nominal(5.0).unwrap();
        let theta0 = PI / 4.0;
        for j in [5.0, 4.0, 2.5, 0.0, -5.0, 9.0] {
            let theta = j * protocol.hold_time / 4.0;
            let f = outcome_averaged_fidelity(&zero, j, &protocol).unwrap();
            assert!((f - (theta - theta0).cos().powi(2)).abs() < 1e-12, "j={j}");
        }
        assert!(outcome_averaged_fidelity(&zero, -5.0, &protocol).unwrap() < 1e-12);
    }

    #[test]
    fn disorder_degrades_fidelity() {
        let dist = CouplingDistribution::new(5.0, 1.0).unwrap();
        let scan = optimize_hold_time(&dist, &six(), 9, 4000, 3).unwrap();
        assert!(scan.best_fidelity.mean < 1.0);
        assert!(scan.best_fidelity.mean > 0.95);
        let random = CouplingDistribution::new(0.0, 1.0).unwrap();
        let r = optimize_hold_time(&random, &six(), 9, 4000, 3).unwrap();
        assert!(r.best_fidelity.mean < scan.best_fidelity.mean - 0.2);
        assert!(scan.grid.len() == 9 && scan.grid.iter().all(|&(_, f)| f <= scan.best_fidelity.mean));
    }

    #[test]
    fn dephased_limit() {
        let protocol = GateProtocol::nominal(1.0).unwrap();
        let f = dephased_fidelity(&six(), &protocol, 64).unwrap();
        assert!((f - 2.0 / 3.0).abs() < 1e-12);
        assert!((dephased_fidelity(&six(), &protocol, 5).unwrap() - f).abs() < 1e-12);
        assert_eq!(classical_benchmark(), 2.0 / 3.0);
    }

    #[test]
    fn coupling_sign_with_mirrored_protocol() {
        let mut rng = sample_stream(9, 0);
        for _ in 0..100 {
            let j: f64 = rng.random_range(-8.0..8.0);
            let j_ref: f64 = rng.random_range(0.5..6.0);
            let t = rng.random_range(0.2..1.5);
            let a = ensemble_fidelity(&six(), j, &GateProtocol::tuned(j_ref, t)).unwrap();
            let b = ensemble_fidelity(&six(), -j, &GateProtocol::tuned(-j_ref, t)).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        let plus = CouplingDistribution::new(5.0, 1.0).unwrap();
        let minus = CouplingDistribution::new(-5.0, 1.0).unwrap();
        let fp = quenched_gate_fidelity(&plus, &GateProtocol::nominal(5.0).unwrap(), &six(), 2000, 4).unwrap();
        let fm = quenched_gate_fidelity(&minus, &GateProtocol::nominal(-5.0).unwrap(), &six(), 2000, 4).unwrap();
        assert!((fp.mean - fm.mean).abs() < 1e-12);
    }

    #[test]
    fn single_shots_follow_born_rule() {
        let input = six()[4];
        let protocol = GateProtocol::tuned(5.0, 0.5);
        let plus = gate_branches(&input, 4.2, &protocol).unwrap()[0].probability;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let n = 20_000;
        let hits = (0..n)
            .filter(|_| run_gate_once(&input, 4.2, &protocol, &mut rng).unwrap().outcome == Outcome::Plus)
            .count();
        let sigma = (plus * (1.0 - plus) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - plus).abs() < 4.0 * sigma);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(InputQubit::new(C64::new(1.0, 0.0), C64::new(0.1, 0.0)).is_err());
        assert!(GateProtocol::nominal(0.0).is_err());
    }
}
