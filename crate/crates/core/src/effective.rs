//! Lower-polariton-branch effective description.
//!
//! Under the rotating-wave conditions only `⊗_i |n_i,->` states with fixed
//! total `N` are populated. Moving one polariton from site `i` to a
//! neighbour `j`, `(.., n_i, .., n_j, ..) -> (.., n_i - 1, .., n_j + 1, ..)`,
//! has amplitude `-J t_{n_i}^{--} t_{n_j+1}^{--}`.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::lattice::LatticeGraph;
use crate::operator::OperatorMatrix;
use crate::polariton::{dimer_hopping_product, lower_energy, lower_hopping, rwa_report, JcParams, RwaReport};
use crate::subspace::Subspace;

/// All occupation tuples of `num_sites` sites holding `total` polaritons,
/// in descending lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBranchBasis {
    num_sites: usize,
    total: u32,
    states: Vec<Vec<u32>>,
}

impl LowerBranchBasis {
    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Vec<u32>] {
        &self.states
    }

    pub fn index_of(&self, occupation: &[u32]) -> Option<usize> {
        self.states.iter().position(|s| s == occupation)
    }

    pub fn subspace(&self) -> Subspace {
        Subspace::lower_branch(self.num_sites, self.total, &self.states)
    }
}

/// `(N + L - 1)! / (N! (L - 1)!)` evaluated as a binomial coefficient.
pub fn effective_dimension(num_sites: usize, total: u32) -> u128 {
    let n = total as u128;
    let k = (num_sites as u128).saturating_sub(1);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (n + i) / i;
    }
    acc
}

pub fn lower_branch_basis(num_sites: usize, total: u32) -> Result<LowerBranchBasis> {
    if num_sites == 0 {
        return Err(Error::EmptyLattice);
    }
    fn fill(prefix: &mut Vec<u32>, remaining: u32, sites_left: usize, out: &mut Vec<Vec<u32>>) {
        if sites_left == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for n in (0..=remaining).rev() {
            prefix.push(n);
            fill(prefix, remaining - n, sites_left - 1, out);
            prefix.pop();
        }
    }
    let mut states = Vec::new();
    fill(&mut Vec::with_capacity(num_sites), total, num_sites, &mut states);
    Ok(LowerBranchBasis { num_sites, total, states })
}

/// Lower-branch Hamiltonian together with its validity report.
#[derive(Clone, Debug)]
pub struct EffectiveHamiltonian {
    pub basis: LowerBranchBasis,
    pub matrix: OperatorMatrix,
    pub rwa: RwaReport,
    /// Set when the rotating-wave conditions fail; the matrix is then only indicative.
    pub advisory: bool,
}

pub fn polariton_hamiltonian(
    graph: &LatticeGraph,
    p: &JcParams,
    hopping: f64,
    basis: &LowerBranchBasis,
    rwa_threshold: f64,
) -> Result<EffectiveHamiltonian> {
    if graph.num_sites() != basis.num_sites() {
        return Err(Error::DimensionMismatch { expected: graph.num_sites(), got: basis.num_sites() });
    }
    let n_cap = basis.total().max(2);
    let energies: Vec<f64> = (0..=n_cap).map(|n| lower_energy(n, p)).collect();
    let t: Vec<f64> = (0..=n_cap).map(|n| if n == 0 { 0.0 } else { lower_hopping(n, p) }).collect();
    let mut trip = Vec::new();
    for (k, occ) in basis.states().iter().enumerate() {
        trip.push((k, k, occ.iter().map(|&n| energies[n as usize]).sum::<f64>()));
        if hopping == 0.0 {
            continue;
        }
        for &(i, j) in graph.edges() {
            for (from, to) in [(i, j), (j, i)] {
                if occ[from] == 0 {
                    continue;
                }
                let mut next = occ.clone();
                next[from] -= 1;
                next[to] += 1;
                let target = basis.index_of(&next).expect("moves stay in the sector");
                let amp = -hopping * t[occ[from] as usize] * t[next[to] as usize];
                trip.push((target, k, amp));
            }
        }
    }
    let matrix = OperatorMatrix::from_real_triplets(basis.dim(), trip);
    let rwa = rwa_report(p, hopping, n_cap, rwa_threshold)?;
    let advisory = !rwa.passes();
    if advisory {
        log::warn!(
            "lower-branch model outside its validity range at Δ/g = {:.4}: {:?}",
            p.delta_over_g(),
            rwa.flagged_labels()
        );
    }
    Ok(EffectiveHamiltonian { basis: basis.clone(), matrix, rwa, advisory })
}

/// Closed-form dimer Hamiltonian in the basis `{|1-,1->, |2-,0->, |0-,2->}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveDimerHamiltonian {
    /// `2 E_1^-`
    pub a: f64,
    /// `-J t_1^{--} t_2^{--}`
    pub b: f64,
    /// `E_2^-`
    pub c: f64,
}

impl EffectiveDimerHamiltonian {
    pub fn matrix(&self) -> Matrix3<f64> {
        let (a, b, c) = (self.a, self.b, self.c);
        Matrix3::new(a, b, b, b, c, 0.0, b, 0.0, c)
    }
}

pub fn dimer_effective(p: &JcParams, hopping: f64) -> EffectiveDimerHamiltonian {
    EffectiveDimerHamiltonian {
        a: 2.0 * lower_energy(1, p),
        b: -hopping * dimer_hopping_product(p),
        c: lower_energy(2, p),
    }
}
