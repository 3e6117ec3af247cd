//! State spaces that trajectories live in.
//!
//! A [`Subspace`] is a list of product states, each described by one local
//! label per site. It covers both a selection of the full Fock product basis
//! (for instance a fixed-excitation sector) and the lower-branch polariton
//! basis, where the local label of a site is its polariton number.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockspace::{ProductBasis, SiteSpace};
use crate::operator::{C64, ZERO};
use crate::polariton::{Branch, JcParams};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum SubspaceKind {
    /// Members of a product basis, with their flat indices.
    Fock { site: SiteSpace, flat_indices: Vec<usize> },
    /// Products of lower-branch polaritons `⊗_i |n_i,->`.
    LowerBranch,
}

#[derive(Clone, Debug)]
pub struct Subspace {
    num_sites: usize,
    local_dim: usize,
    kind: SubspaceKind,
    labels: Vec<Vec<usize>>,
    occupations: Vec<Vec<u32>>,
    lookup: HashMap<Vec<usize>, usize>,
    // per site: groups of (local label, member) sharing the labels of every other site
    groups: Vec<Vec<Vec<(usize, usize)>>>,
}

impl Subspace {
    fn assemble(num_sites: usize, local_dim: usize, kind: SubspaceKind, labels: Vec<Vec<usize>>, occupations: Vec<Vec<u32>>) -> Self {
        let lookup = labels.iter().enumerate().map(|(k, l)| (l.clone(), k)).collect();
        let groups = (0..num_sites)
            .map(|site| {
                let mut by_rest: HashMap<Vec<usize>, Vec<(usize, usize)>> = HashMap::new();
                let mut order = Vec::new();
                for (k, l) in labels.iter().enumerate() {
                    let mut rest = l.clone();
                    rest.remove(site);
                    let e = by_rest.entry(rest.clone()).or_default();
                    if e.is_empty() {
                        order.push(rest);
                    }
                    e.push((l[site], k));
                }
                order.into_iter().map(|r| by_rest.remove(&r).unwrap()).collect()
            })
            .collect();
        Self { num_sites, local_dim, kind, labels, occupations, lookup, groups }
    }

    /// Selection of product-basis states given by flat index.
    pub fn fock(basis: &ProductBasis, flat_indices: Vec<usize>) -> Self {
        let site = basis.site_space();
        let labels: Vec<Vec<usize>> = flat_indices.iter().map(|&f| basis.local_indices(f)).collect();
        let occupations = labels
            .iter()
            .map(|l| l.iter().map(|&x| site.decode(x).excitations() as u32).collect())
            .collect();
        Self::assemble(
            basis.num_sites(),
            site.local_dim(),
            SubspaceKind::Fock { site, flat_indices },
            labels,
            occupations,
        )
    }

    /// Lower-branch basis from polariton-number tuples.
    pub fn lower_branch(num_sites: usize, max_occupation: u32, states: &[Vec<u32>]) -> Self {
        let labels = states.iter().map(|s| s.iter().map(|&n| n as usize).collect()).collect();
        Self::assemble(
            num_sites,
            max_occupation as usize + 1,
            SubspaceKind::LowerBranch,
            labels,
            states.to_vec(),
        )
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn kind(&self) -> &SubspaceKind {
        &self.kind
    }

    pub fn labels(&self, k: usize) -> &[usize] {
        &self.labels[k]
    }

    pub fn position(&self, labels: &[usize]) -> Option<usize> {
        self.lookup.get(labels).copied()
    }

    /// Polariton number `n_i = a_i†a_i + σ_i⁺σ_i⁻` of member `k`.
    pub fn occupation(&self, k: usize, site: usize) -> u32 {
        self.occupations[k][site]
    }

    pub fn total_occupation(&self, k: usize) -> u32 {
        self.occupations[k].iter().sum()
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.num_sites {
            return Err(Error::SiteOutOfRange { index: site, num_sites: self.num_sites });
        }
        Ok(())
    }

    /// Reduced density matrix of `site` for a pure state.
    pub fn reduce_pure(&self, psi: &DVector<C64>, site: usize) -> Result<DMatrix<C64>> {
        self.check_site(site)?;
        let mut rho = DMatrix::zeros(self.local_dim, self.local_dim);
        for group in &self.groups[site] {
            for &(a, ka) in group {
                for &(b, kb) in group {
                    rho[(a, b)] += psi[ka] * psi[kb].conj();
                }
            }
        }
        Ok(rho)
    }

    /// Reduced density matrix of `site` for a density matrix on this subspace.
    pub fn reduce_mixed(&self, rho: &DMatrix<C64>, site: usize) -> Result<DMatrix<C64>> {
        self.check_site(site)?;
        let mut out = DMatrix::zeros(self.local_dim, self.local_dim);
        for group in &self.groups[site] {
            for &(a, ka) in group {
                for &(b, kb) in group {
                    out[(a, b)] += rho[(ka, kb)];
                }
            }
        }
        Ok(out)
    }

    /// Product state `⊗_i v_i` restricted to this subspace.
    pub fn product_vector(&self, locals: &[Vec<C64>]) -> DVector<C64> {
        DVector::from_iterator(
            self.dim(),
            self.labels.iter().map(|l| l.iter().enumerate().map(|(s, &x)| locals[s][x]).product::<C64>()),
        )
    }

    /// Product of dressed states `⊗_i |n_i, α_i>`. In the lower-branch basis
    /// any upper-branch factor gives the zero vector.
    pub fn dressed_product(&self, p: &JcParams, factors: &[(u32, Branch)]) -> Result<DVector<C64>> {
        if factors.len() != self.num_sites {
            return Err(Error::DimensionMismatch { expected: self.num_sites, got: factors.len() });
        }
        let locals: Vec<Vec<C64>> = match &self.kind {
            SubspaceKind::Fock { site, .. } => {
                factors.iter().map(|&(n, b)| site.dressed_vector(n, b, p)).collect::<Result<_>>()?
            }
            SubspaceKind::LowerBranch => factors
                .iter()
                .map(|&(n, b)| {
                    let mut v = vec![ZERO; self.local_dim];
                    if b == Branch::Lower && (n as usize) < self.local_dim {
                        v[n as usize] = C64::new(1.0, 0.0);
                    }
                    v
                })
                .collect(),
        };
        Ok(self.product_vector(&locals))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::build_basis;
    use crate::lattice::LatticeGraph;

    #[test]
    fn partial_trace_of_product_state() {
        let b = build_basis(&LatticeGraph::chain(2).unwrap(), 3, false).unwrap();
        let sub = Subspace::fock(&b, (0..b.dim()).collect());
        let mut u = vec![ZERO; 6];
        u[1] = C64::new(0.6, 0.0);
        u[3] = C64::new(0.0, 0.8);
        let mut v = vec![ZERO; 6];
        v[0] = C64::new(1.0, 0.0);
        let psi = sub.product_vector(&[u.clone(), v]);
        let rho = sub.reduce_pure(&psi, 0).unwrap();
        for r in 0..6 {
            for c in 0..6 {
                assert!((rho[(r, c)] - u[r] * u[c].conj()).norm() < 1e-15);
            }
        }
        let full = &psi * psi.adjoint();
        assert!((sub.reduce_mixed(&full, 0).unwrap() - rho).norm() < 1e-15);
        assert!(sub.reduce_pure(&psi, 2).is_err());
    }

    #[test]
    fn occupations_follow_excitations() {
        let b = build_basis(&LatticeGraph::chain(2).unwrap(), 3, false).unwrap();
        let sector = b.sector_indices(2, false);
        let sub = Subspace::fock(&b, sector);
        for k in 0..sub.dim() {
            assert_eq!(sub.total_occupation(k), 2);
        }
    }
}
