//! Lattice geometries, random pair neighborhoods and small periodic lattices.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ea::CouplingDistribution;
use crate::error::{Error, Result};

/// Largest lattice the state-vector oracle accepts.
pub const MAX_ORACLE_SITES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Chain1d,
    Honeycomb2d,
    Square2d,
    Cube3d,
}

impl Geometry {
    pub const ALL: [Geometry; 4] = [
        Geometry::Chain1d,
        Geometry::Honeycomb2d,
        Geometry::Square2d,
        Geometry::Cube3d,
    ];

    /// Coordination number `z`.
    pub fn coordination(self) -> usize {
        match self {
            Geometry::Chain1d => 2,
            Geometry::Honeycomb2d => 3,
            Geometry::Square2d => 4,
            Geometry::Cube3d => 6,
        }
    }

    /// Number of sites outside a nearest-neighbor pair coupled to it: `2(z − 1)`.
    pub fn pair_exterior_degree(self) -> usize {
        2 * (self.coordination() - 1)
    }

    /// Number of lattice axes expected in an extent.
    pub fn axes(self) -> usize {
        match self {
            Geometry::Chain1d => 1,
            Geometry::Honeycomb2d | Geometry::Square2d => 2,
            Geometry::Cube3d => 3,
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geometry::Chain1d => "chain",
            Geometry::Honeycomb2d => "honeycomb",
            Geometry::Square2d => "square",
            Geometry::Cube3d => "cube",
        })
    }
}

impl FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "chain" | "chain_1d" | "1d" => Ok(Geometry::Chain1d),
            "honeycomb" | "honeycomb_2d" => Ok(Geometry::Honeycomb2d),
            "square" | "square_2d" | "2d" => Ok(Geometry::Square2d),
            "cube" | "cube_3d" | "3d" => Ok(Geometry::Cube3d),
            other => Err(Error::Lattice(format!("unknown geometry `{other}`"))),
        }
    }
}

/// A nearest-neighbor pair (1, 2), its own coupling and the couplings from
/// each member to its `z − 1` exterior neighbors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairNeighborhood {
    pub j12: f64,
    pub nbrs1: Vec<f64>,
    pub nbrs2: Vec<f64>,
}

impl PairNeighborhood {
    pub fn uniform(g: Geometry, j: f64) -> Self {
        let k = g.coordination() - 1;
        Self {
            j12: j,
            nbrs1: vec![j; k],
            nbrs2: vec![j; k],
        }
    }
}

/// Draws `j12`, then `nbrs1`, then `nbrs2`, each i.i.d. from `dist`.
pub fn sample_pair_neighborhood<R: Rng + ?Sized>(
    g: Geometry,
    dist: &CouplingDistribution,
    rng: &mut R,
) -> PairNeighborhood {
    let k = g.coordination() - 1;
    let j12 = dist.sample(rng);
    let nbrs1 = (0..k).map(|_| dist.sample(rng)).collect();
    let nbrs2 = (0..k).map(|_| dist.sample(rng)).collect();
    PairNeighborhood { j12, nbrs1, nbrs2 }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub coupling: f64,
}

/// A small periodic lattice with one coupling per bond.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteLattice {
    pub geometry: Geometry,
    pub extent: Vec<usize>,
    pub n_sites: usize,
    pub edges: Vec<Edge>,
}

impl FiniteLattice {
    /// Same bonds, every coupling replaced by `j`.
    pub fn with_uniform_coupling(mut self, j: f64) -> Self {
        for e in &mut self.edges {
            e.coupling = j;
        }
        self
    }

    pub fn neighbors(&self, site: usize) -> Vec<(usize, f64)> {
        self.edges
            .iter()
            .filter_map(|e| {
                if e.a == site {
                    Some((e.b, e.coupling))
                } else if e.b == site {
                    Some((e.a, e.coupling))
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn coupling(&self, a: usize, b: usize) -> Option<f64> {
        self.edges
            .iter()
            .find(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a))
            .map(|e| e.coupling)
    }

    /// Exterior couplings of the bonded pair `(a, b)`. Fails when the two
    /// exterior neighbor sets overlap, since the pair formula needs them disjoint.
    pub fn pair_neighborhood(&self, a: usize, b: usize) -> Result<PairNeighborhood> {
        let j12 = self
            .coupling(a, b)
            .ok_or_else(|| Error::Lattice(format!("sites {a} and {b} are not bonded")))?;
        let ext = |s: usize, other: usize| -> Vec<(usize, f64)> {
            self.neighbors(s)
                .into_iter()
                .filter(|&(n, _)| n != other)
                .collect()
        };
        let (e1, e2) = (ext(a, b), ext(b, a));
        let s1: BTreeSet<usize> = e1.iter().map(|p| p.0).collect();
        let s2: BTreeSet<usize> = e2.iter().map(|p| p.0).collect();
        if s1.len() != e1.len() || s2.len() != e2.len() || !s1.is_disjoint(&s2) {
            return Err(Error::Lattice(format!(
                "pair ({a}, {b}) has shared or repeated exterior neighbors"
            )));
        }
        Ok(PairNeighborhood {
            j12,
            nbrs1: e1.into_iter().map(|p| p.1).collect(),
            nbrs2: e2.into_iter().map(|p| p.1).collect(),
        })
    }

    /// Breadth-first graph distances from `source`.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n_sites];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(s) = queue.pop_front() {
            let d = dist[s].unwrap_or(0);
            for (n, _) in self.neighbors(s) {
                if dist[n].is_none() {
                    dist[n] = Some(d + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    /// Lowest-index site at graph distance 2 from site 0.
    pub fn next_nearest_partner(&self) -> Option<usize> {
        self.distances_from(0).iter().position(|d| *d == Some(2))
    }
}

/// Builds a periodic lattice with i.i.d. couplings drawn in edge order.
///
/// Site 0 and site 1 are always bonded. Layouts:
/// - chain `[L]`: site `x`, bonds `x–(x+1)`;
/// - square `[Lx, Ly]`: site `x + Lx·y`, bonds along `+x` and `+y`;
/// - honeycomb `[Lx, Ly]` (two-site basis on a triangular Bravais lattice):
///   `A(x,y) = 2(x + Lx·y)`, `B(x,y) = A(x,y) + 1`, bonds `A(x,y)` to
///   `B(x,y)`, `B(x−1,y)` and `B(x,y−1)`;
/// - cube `[Lx, Ly, Lz]`: site `x + Lx(y + Ly·z)`, bonds along each axis.
pub fn build_finite_lattice<R: Rng + ?Sized>(
    g: Geometry,
    extent: &[usize],
    dist: &CouplingDistribution,
    rng: &mut R,
) -> Result<FiniteLattice> {
    if extent.len() != g.axes() {
        return Err(Error::Lattice(format!(
            "{g} needs {} extents, got {}",
            g.axes(),
            extent.len()
        )));
    }
    let min_extent = if g == Geometry::Honeycomb2d { 2 } else { 3 };
    if let Some(&e) = extent.iter().find(|&&e| e < min_extent) {
        return Err(Error::Lattice(format!(
            "{g} extent {e} is below {min_extent}; periodic bonds would repeat"
        )));
    }
    let cells: usize = extent.iter().product();
    let n_sites = if g == Geometry::Honeycomb2d { 2 * cells } else { cells };
    if n_sites > MAX_ORACLE_SITES {
        return Err(Error::TooLarge {
            n_sites,
            cap: MAX_ORACLE_SITES,
        });
    }

    let mut bonds: Vec<(usize, usize)> = Vec::new();
    match g {
        Geometry::Chain1d => {
            let l = extent[0];
            bonds.extend((0..l).map(|x| (x, (x + 1) % l)));
        }
        Geometry::Square2d => {
            let (lx, ly) = (extent[0], extent[1]);
            let site = |x: usize, y: usize| x % lx + lx * (y % ly);
            for y in 0..ly {
                for x in 0..lx {
                    bonds.push((site(x, y), site(x + 1, y)));
                    bonds.push((site(x, y), site(x, y + 1)));
                }
            }
        }
        Geometry::Honeycomb2d => {
            let (lx, ly) = (extent[0], extent[1]);
            let a = |x: usize, y: usize| 2 * (x % lx + lx * (y % ly));
            for y in 0..ly {
                for x in 0..lx {
                    bonds.push((a(x, y), a(x, y) + 1));
                    bonds.push((a(x, y), a(x + lx - 1, y) + 1));
                    bonds.push((a(x, y), a(x, y + ly - 1) + 1));
                }
            }
        }
        Geometry::Cube3d => {
            let (lx, ly, lz) = (extent[0], extent[1], extent[2]);
            let site = |x: usize, y: usize, z: usize| x % lx + lx * (y % ly + ly * (z % lz));
            for z in 0..lz {
                for y in 0..ly {
                    for x in 0..lx {
                        bonds.push((site(x, y, z), site(x + 1, y, z)));
                        bonds.push((site(x, y, z), site(x, y + 1, z)));
                        bonds.push((site(x, y, z), site(x, y, z + 1)));
                    }
                }
            }
        }
    }

    let mut seen = BTreeSet::new();
    for &(a, b) in &bonds {
        if a == b || !seen.insert((a.min(b), a.max(b))) {
            return Err(Error::Lattice(format!("duplicate or self bond ({a}, {b})")));
        }
    }
    let edges = bonds
        .into_iter()
        .map(|(a, b)| Edge {
            a,
            b,
            coupling: dist.sample(rng),
        })
        .collect();
    Ok(FiniteLattice {
        geometry: g,
        extent: extent.to_vec(),
        n_sites,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::sample_stream;

    fn dist(mean: f64, variance: f64) -> CouplingDistribution {
        CouplingDistribution::new(mean, variance).unwrap()
    }

    #[test]
    fn exterior_degrees() {
        let d: Vec<usize> = Geometry::ALL.iter().map(|g| g.pair_exterior_degree()).collect();
        assert_eq!(d, vec![2, 4, 6, 10]);
        for g in Geometry::ALL {
            assert_eq!(g.pair_exterior_degree(), 2 * (g.coordination() - 1));
            assert_eq!(g.to_string().parse::<Geometry>().unwrap(), g);
        }
    }

    #[test]
    fn degenerate_distribution_is_exact() {
        let mut rng = sample_stream(1, 0);
        let pn = sample_pair_neighborhood(Geometry::Square2d, &dist(5.0, 0.0), &mut rng);
        assert_eq!(pn.j12, 5.0);
        assert_eq!(pn.nbrs1, vec![5.0; 3]);
        assert_eq!(pn.nbrs2, vec![5.0; 3]);
        let pn = sample_pair_neighborhood(Geometry::Chain1d, &dist(0.0, 1.0), &mut rng);
        assert_eq!((pn.nbrs1.len(), pn.nbrs2.len()), (1, 1));
    }

    #[test]
    fn coupling_moments() {
        let n = 200_000;
        let d = dist(0.0, 1.0);
        let mut rng = sample_stream(3, 0);
        let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() <= 4.0 / (n as f64).sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() <= 0.1, "variance {var}");
    }

    #[test]
    fn chain_and_square_shapes() {
        let mut rng = sample_stream(2, 0);
        let chain = build_finite_lattice(Geometry::Chain1d, &[8], &dist(0.0, 1.0), &mut rng).unwrap();
        assert_eq!((chain.n_sites, chain.edges.len()), (8, 8));
        let sq = build_finite_lattice(Geometry::Square2d, &[4, 3], &dist(0.0, 1.0), &mut rng).unwrap();
        assert_eq!((sq.n_sites, sq.edges.len()), (12, 24));
        for s in 0..sq.n_sites {
            assert_eq!(sq.neighbors(s).len(), 4);
        }
        let pn = sq.pair_neighborhood(0, 1).unwrap();
        assert_eq!((pn.nbrs1.len(), pn.nbrs2.len()), (3, 3));
        assert_eq!(chain.next_nearest_partner(), Some(2));
    }

    #[test]
    fn honeycomb_minimal_cell() {
        // 2×2 cells of the two-site basis: A sites 0,2,4,6 and B sites 1,3,5,7.
        // A(0,0)=0 bonds B(0,0)=1, B(1,0)=3, B(0,1)=5.
        let mut rng = sample_stream(4, 0);
        let hc = build_finite_lattice(Geometry::Honeycomb2d, &[2, 2], &dist(1.0, 0.0), &mut rng)
            .unwrap();
        assert_eq!((hc.n_sites, hc.edges.len()), (8, 12));
        for s in 0..8 {
            let nbrs: Vec<usize> = hc.neighbors(s).into_iter().map(|p| p.0).collect();
            assert_eq!(nbrs.len(), 3);
            // bipartite: A sites only bond B sites
            assert!(nbrs.iter().all(|n| n % 2 != s % 2));
        }
        let mut n0: Vec<usize> = hc.neighbors(0).into_iter().map(|p| p.0).collect();
        n0.sort();
        assert_eq!(n0, vec![1, 3, 5]);
        let pn = hc.pair_neighborhood(0, 1).unwrap();
        assert_eq!((pn.nbrs1.len(), pn.nbrs2.len()), (2, 2));
    }

    #[test]
    fn size_and_shape_errors() {
        let mut rng = sample_stream(5, 0);
        let d = dist(0.0, 1.0);
        assert!(matches!(
            build_finite_lattice(Geometry::Cube3d, &[3, 3, 3], &d, &mut rng),
            Err(Error::TooLarge { n_sites: 27, .. })
        ));
        assert!(matches!(
            build_finite_lattice(Geometry::Chain1d, &[21], &d, &mut rng),
            Err(Error::TooLarge { .. })
        ));
        assert!(build_finite_lattice(Geometry::Square2d, &[4], &d, &mut rng).is_err());
        assert!(build_finite_lattice(Geometry::Square2d, &[4, 2], &d, &mut rng).is_err());
        assert!(build_finite_lattice(Geometry::Honeycomb2d, &[2, 1], &d, &mut rng).is_err());
    }
}
