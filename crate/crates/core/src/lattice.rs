//! Finite lattice graphs and their hopping pattern.
//!
//! Edges are undirected, stored canonically as `(i, j)` with `i < j`. Every
//! edge carries the same hopping amplitude `J`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeGraph {
    num_sites: usize,
    edges: Vec<(usize, usize)>,
}

impl LatticeGraph {
    /// Builds a graph from an explicit edge list.
    pub fn new(num_sites: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if num_sites == 0 {
            return Err(Error::EmptyLattice);
        }
        let mut canonical = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b || a >= num_sites || b >= num_sites {
                return Err(Error::InvalidEdge(a, b));
            }
            let e = (a.min(b), a.max(b));
            if canonical.contains(&e) {
                return Err(Error::DuplicateEdge(e.0, e.1));
            }
            canonical.push(e);
        }
        canonical.sort_unstable();
        Ok(Self { num_sites, edges: canonical })
    }

    /// Open chain with nearest-neighbour edges `(i, i+1)`.
    pub fn chain(num_sites: usize) -> Result<Self> {
        let edges: Vec<_> = (1..num_sites).map(|i| (i - 1, i)).collect();
        Self::new(num_sites, &edges)
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Number of edges incident on site `i`.
    pub fn connectivity(&self, i: usize) -> Result<usize> {
        if i >= self.num_sites {
            return Err(Error::SiteOutOfRange { index: i, num_sites: self.num_sites });
        }
        Ok(self.edges.iter().filter(|&&(a, b)| a == i || b == i).count())
    }

    pub fn connectivities(&self) -> Vec<usize> {
        let mut nu = vec![0; self.num_sites];
        for &(a, b) in &self.edges {
            nu[a] += 1;
            nu[b] += 1;
        }
        nu
    }

    /// Global coupling parameter `J * (sum_j nu_j) / L`.
    pub fn coupling_parameter(&self, hopping: f64) -> f64 {
        let total: usize = self.connectivities().iter().sum();
        hopping * total as f64 / self.num_sites as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn chains() {
        assert_eq!(LatticeGraph::chain(2).unwrap().edges(), &[(0, 1)]);
        assert_eq!(LatticeGraph::chain(3).unwrap().edges(), &[(0, 1), (1, 2)]);
        assert_eq!(LatticeGraph::chain(4).unwrap().edges(), &[(0, 1), (1, 2), (2, 3)]);
        assert!(LatticeGraph::chain(1).unwrap().edges().is_empty());
        assert!(matches!(LatticeGraph::chain(0), Err(Error::EmptyLattice)));
    }

    #[test]
    fn connectivity_of_chain_sites() {
        let g = LatticeGraph::chain(4).unwrap();
        assert_eq!(g.connectivity(0).unwrap(), 1);
        assert_eq!(g.connectivity(1).unwrap(), 2);
        assert_eq!(LatticeGraph::chain(2).unwrap().connectivity(1).unwrap(), 1);
        assert!(g.connectivity(4).is_err());
    }

    #[test]
    fn coupling_parameter_values() {
        assert_eq!(LatticeGraph::chain(2).unwrap().coupling_parameter(1.0), 1.0);
        let k = LatticeGraph::chain(3).unwrap().coupling_parameter(1.0);
        assert!((k - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(LatticeGraph::chain(5).unwrap().coupling_parameter(0.0), 0.0);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(LatticeGraph::new(3, &[(1, 1)]), Err(Error::InvalidEdge(1, 1))));
        assert!(matches!(LatticeGraph::new(3, &[(0, 3)]), Err(Error::InvalidEdge(0, 3))));
        assert!(matches!(
            LatticeGraph::new(3, &[(0, 1), (1, 0)]),
            Err(Error::DuplicateEdge(0, 1))
        ));
    }

    proptest! {
        #[test]
        fn degree_sum_is_twice_edge_count(n in 2usize..8, raw in proptest::collection::vec((0usize..8, 0usize..8), 0..20)) {
            let mut edges = Vec::new();
            for (a, b) in raw {
                let (a, b) = (a % n, b % n);
                if a != b && !edges.contains(&(a.min(b), a.max(b))) {
                    edges.push((a.min(b), a.max(b)));
                }
            }
            let g = LatticeGraph::new(n, &edges).unwrap();
            let total: usize = g.connectivities().iter().sum();
            prop_assert_eq!(total, 2 * g.edges().len());
            for i in 0..n {
                prop_assert_eq!(g.connectivity(i).unwrap(), g.connectivities()[i]);
            }
        }

        #[test]
        fn chain_has_two_ends(n in 2usize..30) {
            let nu = LatticeGraph::chain(n).unwrap().connectivities();
            prop_assert_eq!(nu.iter().filter(|&&v| v == 1).count(), 2);
            prop_assert_eq!(nu.iter().filter(|&&v| v == 2).count(), n - 2);
        }
    }
}
