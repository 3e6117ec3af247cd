//! Truncated Fock ⊗ TLS (⊗ ancilla TLS) product space and bare operators.
//!
//! Local index of a site state is `(ancilla * 2 + sigma) * n_max + n`, where
//! `n` is the photon number, `sigma` the TLS state (0 = ↓, 1 = ↑) and
//! `ancilla` the ancilla TLS state. Flat indices are mixed-radix with site 0
//! the slowest-varying factor.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeGraph;
use crate::operator::{OperatorMatrix, C64};
use crate::polariton::{coefficients, Branch, JcParams};

/// Largest product-space dimension built unless a larger budget is passed.
pub const DEFAULT_DIMENSION_BUDGET: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteSpace {
    n_max: usize,
    has_ancilla: bool,
}

/// Decoded local state of one site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LocalState {
    pub photons: usize,
    pub tls_up: bool,
    pub ancilla_up: bool,
}

impl LocalState {
    pub fn excitations(&self) -> usize {
        self.photons + self.tls_up as usize
    }
}

impl SiteSpace {
    pub fn new(n_max: usize, has_ancilla: bool) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::InvalidParameter(format!("n_max must be >= 2, got {n_max}")));
        }
        Ok(Self { n_max, has_ancilla })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn has_ancilla(&self) -> bool {
        self.has_ancilla
    }

    pub fn local_dim(&self) -> usize {
        if self.has_ancilla { 4 * self.n_max } else { 2 * self.n_max }
    }

    pub fn decode(&self, idx: usize) -> LocalState {
        LocalState {
            photons: idx % self.n_max,
            tls_up: (idx / self.n_max) % 2 == 1,
            ancilla_up: idx / (2 * self.n_max) == 1,
        }
    }

    pub fn encode(&self, s: LocalState) -> Option<usize> {
        if s.photons >= self.n_max || (s.ancilla_up && !self.has_ancilla) {
            return None;
        }
        Some(((s.ancilla_up as usize) * 2 + s.tls_up as usize) * self.n_max + s.photons)
    }

    /// Local amplitudes of the dressed state `|n,±>` with the ancilla in ↓.
    pub fn dressed_vector(&self, n: u32, branch: Branch, p: &JcParams) -> Result<Vec<C64>> {
        if n == 0 && branch == Branch::Upper {
            return Err(Error::UnphysicalState);
        }
        let c = coefficients(n, p);
        let (gamma, rho) = c.branch(branch);
        let mut v = vec![C64::new(0.0, 0.0); self.local_dim()];
        let n = n as usize;
        let down = self.encode(LocalState { photons: n, tls_up: false, ancilla_up: false });
        let up = if n >= 1 {
            self.encode(LocalState { photons: n - 1, tls_up: true, ancilla_up: false })
        } else {
            None
        };
        if gamma != 0.0 {
            let k = down.ok_or_else(|| truncated(n, self.n_max))?;
            v[k] = C64::new(gamma, 0.0);
        }
        if rho != 0.0 {
            let k = up.ok_or_else(|| truncated(n, self.n_max))?;
            v[k] = C64::new(rho, 0.0);
        }
        Ok(v)
    }
}

fn truncated(n: usize, n_max: usize) -> Error {
    Error::InvalidParameter(format!("dressed state with n = {n} does not fit in n_max = {n_max}"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductBasis {
    num_sites: usize,
    site: SiteSpace,
    dim: usize,
}

impl ProductBasis {
    pub fn new(num_sites: usize, site: SiteSpace, budget: usize) -> Result<Self> {
        if num_sites == 0 {
            return Err(Error::EmptyLattice);
        }
        let mut dim: usize = 1;
        for _ in 0..num_sites {
            dim = dim
                .checked_mul(site.local_dim())
                .filter(|&d| d <= budget)
                .ok_or(Error::DimensionBudget { budget })?;
        }
        Ok(Self { num_sites, site, dim })
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn site_space(&self) -> SiteSpace {
        self.site
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn stride(&self, site: usize) -> usize {
        self.site.local_dim().pow((self.num_sites - 1 - site) as u32)
    }

    pub fn local_index(&self, flat: usize, site: usize) -> usize {
        (flat / self.stride(site)) % self.site.local_dim()
    }

    pub fn local_indices(&self, flat: usize) -> Vec<usize> {
        (0..self.num_sites).map(|s| self.local_index(flat, s)).collect()
    }

    pub fn flat_index(&self, locals: &[usize]) -> usize {
        locals.iter().fold(0, |acc, &l| acc * self.site.local_dim() + l)
    }

    pub fn local_state(&self, flat: usize, site: usize) -> LocalState {
        self.site.decode(self.local_index(flat, site))
    }

    /// Total excitations `Σ_i (n_i + σ_i)`, plus ancillas when requested.
    pub fn excitations(&self, flat: usize, include_ancilla: bool) -> usize {
        (0..self.num_sites)
            .map(|s| {
                let l = self.local_state(flat, s);
                l.excitations() + if include_ancilla { l.ancilla_up as usize } else { 0 }
            })
            .sum()
    }

    /// Flat indices of the states with exactly `n` excitations.
    pub fn sector_indices(&self, n: usize, include_ancilla: bool) -> Vec<usize> {
        (0..self.dim).filter(|&f| self.excitations(f, include_ancilla) == n).collect()
    }

    /// Flat indices of the states with at most `n` excitations.
    pub fn indices_up_to(&self, n: usize, include_ancilla: bool) -> Vec<usize> {
        (0..self.dim).filter(|&f| self.excitations(f, include_ancilla) <= n).collect()
    }

    /// Flat-index lookup for a set of members.
    pub fn position_map(indices: &[usize]) -> HashMap<usize, usize> {
        indices.iter().enumerate().map(|(k, &f)| (f, k)).collect()
    }
}

pub fn build_basis(graph: &LatticeGraph, n_max: usize, with_ancilla: bool) -> Result<ProductBasis> {
    ProductBasis::new(graph.num_sites(), SiteSpace::new(n_max, with_ancilla)?, DEFAULT_DIMENSION_BUDGET)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SiteOperatorKind {
    Annihilate,
    Create,
    Number,
    SigmaMinus,
    SigmaPlus,
    SigmaZ,
    /// `a†a + σ⁺σ⁻`
    PolaritonNumber,
    AncillaSigmaMinus,
    AncillaSigmaPlus,
    AncillaSigmaZ,
}

impl SiteOperatorKind {
    fn needs_ancilla(self) -> Option<&'static str> {
        match self {
            Self::AncillaSigmaMinus => Some("ancilla_sigma_minus"),
            Self::AncillaSigmaPlus => Some("ancilla_sigma_plus"),
            Self::AncillaSigmaZ => Some("ancilla_sigma_z"),
            _ => None,
        }
    }

    /// Image of one local state: `(target, amplitude)`, or `None` if annihilated.
    fn act(self, site: &SiteSpace, s: LocalState) -> Option<(LocalState, f64)> {
        let mut t = s;
        match self {
            Self::Annihilate => {
                if s.photons == 0 {
                    return None;
                }
                t.photons -= 1;
                Some((t, (s.photons as f64).sqrt()))
            }
            Self::Create => {
                if s.photons + 1 >= site.n_max() {
                    return None;
                }
                t.photons += 1;
                Some((t, ((s.photons + 1) as f64).sqrt()))
            }
            Self::Number => (s.photons > 0).then_some((s, s.photons as f64)),
            Self::SigmaMinus => s.tls_up.then(|| {
                t.tls_up = false;
                (t, 1.0)
            }),
            Self::SigmaPlus => (!s.tls_up).then(|| {
                t.tls_up = true;
                (t, 1.0)
            }),
            Self::SigmaZ => Some((s, if s.tls_up { 1.0 } else { -1.0 })),
            Self::PolaritonNumber => (s.excitations() > 0).then_some((s, s.excitations() as f64)),
            Self::AncillaSigmaMinus => s.ancilla_up.then(|| {
                t.ancilla_up = false;
                (t, 1.0)
            }),
            Self::AncillaSigmaPlus => (!s.ancilla_up).then(|| {
                t.ancilla_up = true;
                (t, 1.0)
            }),
            Self::AncillaSigmaZ => Some((s, if s.ancilla_up { 1.0 } else { -1.0 })),
        }
    }
}

/// Single-site operator embedded with identities on every other factor.
pub fn site_operator(b: &ProductBasis, kind: SiteOperatorKind, i: usize) -> Result<OperatorMatrix> {
    if i >= b.num_sites() {
        return Err(Error::SiteOutOfRange { index: i, num_sites: b.num_sites() });
    }
    if let Some(name) = kind.needs_ancilla() {
        if !b.site_space().has_ancilla() {
            return Err(Error::AncillaRequired(name));
        }
    }
    let site = b.site_space();
    let stride = b.stride(i) as isize;
    let trip = (0..b.dim()).filter_map(|f| {
        let li = b.local_index(f, i);
        kind.act(&site, site.decode(li)).map(|(t, amp)| {
            let lt = site.encode(t).expect("operator images stay in the site space") as isize;
            let target = (f as isize + (lt - li as isize) * stride) as usize;
            (target, f, amp)
        })
    });
    Ok(OperatorMatrix::from_real_triplets(b.dim(), trip.collect::<Vec<_>>()))
}

/// Full JCH Hamiltonian
/// `Σ_i [ω a†a + ω₀ σ⁺σ⁻ + g(σ⁺a + σ⁻a†)] - J Σ_<ij> (a_i†a_j + a_j†a_i)`.
/// Ancilla factors, if present, are left untouched.
pub fn jch_hamiltonian(g: &LatticeGraph, p: &JcParams, hopping: f64, b: &ProductBasis) -> Result<OperatorMatrix> {
    if g.num_sites() != b.num_sites() {
        return Err(Error::DimensionMismatch { expected: g.num_sites(), got: b.num_sites() });
    }
    let site = b.site_space();
    let mut trip: Vec<(usize, usize, f64)> = Vec::new();
    for f in 0..b.dim() {
        let locals: Vec<LocalState> = (0..b.num_sites()).map(|s| b.local_state(f, s)).collect();
        let diag: f64 = locals
            .iter()
            .map(|l| p.omega() * l.photons as f64 + if l.tls_up { p.omega0() } else { 0.0 })
            .sum();
        if diag != 0.0 {
            trip.push((f, f, diag));
        }
        for (s, l) in locals.iter().enumerate() {
            // σ⁺a : |↓,n> -> √n |↑,n-1>, plus its Hermitian partner
            if !l.tls_up && l.photons > 0 {
                let t = LocalState { photons: l.photons - 1, tls_up: true, ..*l };
                let target = shift(b, f, s, *l, t);
                let amp = p.g() * (l.photons as f64).sqrt();
                trip.push((target, f, amp));
                trip.push((f, target, amp));
            }
        }
        if hopping != 0.0 {
            for &(i, j) in g.edges() {
                for (from, to) in [(i, j), (j, i)] {
                    // a_to† a_from
                    let lf = locals[from];
                    let lt = locals[to];
                    if lf.photons == 0 || lt.photons + 1 >= site.n_max() {
                        continue;
                    }
                    let amp = -hopping * ((lf.photons * (lt.photons + 1)) as f64).sqrt();
                    let mid = shift(b, f, from, lf, LocalState { photons: lf.photons - 1, ..lf });
                    let target = shift(b, mid, to, lt, LocalState { photons: lt.photons + 1, ..lt });
                    trip.push((target, f, amp));
                }
            }
        }
    }
    Ok(OperatorMatrix::from_real_triplets(b.dim(), trip))
}

fn shift(b: &ProductBasis, flat: usize, site: usize, from: LocalState, to: LocalState) -> usize {
    let s = b.site_space();
    let d = s.encode(to).expect("in range") as isize - s.encode(from).expect("in range") as isize;
    (flat as isize + d * b.stride(site) as isize) as usize
}

/// Total excitation number `Σ_i (a_i†a_i + σ_i⁺σ_i⁻)`, optionally counting ancillas.
pub fn total_excitations(b: &ProductBasis, include_ancilla: bool) -> OperatorMatrix {
    OperatorMatrix::from_real_triplets(
        b.dim(),
        (0..b.dim()).map(|f| (f, f, b.excitations(f, include_ancilla) as f64)).collect::<Vec<_>>(),
    )
}

/// Single site with an ancilla TLS:
/// `H^JC + ω_A σ_A⁺σ_A⁻ + g_A(σ_A⁺a + σ_A⁻a†)`.
pub fn ancilla_site_hamiltonian(p: &JcParams, omega_a: f64, g_a: f64, n_max: usize) -> Result<(ProductBasis, OperatorMatrix)> {
    let basis = ProductBasis::new(1, SiteSpace::new(n_max, true)?, DEFAULT_DIMENSION_BUDGET)?;
    let graph = LatticeGraph::chain(1)?;
    let h_jc = jch_hamiltonian(&graph, p, 0.0, &basis)?;
    let sp = site_operator(&basis, SiteOperatorKind::AncillaSigmaPlus, 0)?;
    let sm = site_operator(&basis, SiteOperatorKind::AncillaSigmaMinus, 0)?;
    let a = site_operator(&basis, SiteOperatorKind::Annihilate, 0)?;
    let ad = site_operator(&basis, SiteOperatorKind::Create, 0)?;
    let h = h_jc
        .add(&sp.matmul(&sm).scale(C64::new(omega_a, 0.0)))
        .add(&sp.matmul(&a).add(&sm.matmul(&ad)).scale(C64::new(g_a, 0.0)));
    Ok((basis, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polariton::{chi, lower_hopping, polariton_energy};
    use nalgebra::{DMatrix, SymmetricEigen};

    fn real_eigenvalues(m: &OperatorMatrix) -> Vec<f64> {
        let d = m.to_dense();
        let mut ev: Vec<f64> = SymmetricEigen::new(d).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    #[test]
    fn basis_dimensions() {
        assert_eq!(build_basis(&LatticeGraph::chain(2).unwrap(), 5, false).unwrap().dim(), 100);
        assert_eq!(build_basis(&LatticeGraph::chain(3).unwrap(), 5, false).unwrap().dim(), 1000);
        assert_eq!(build_basis(&LatticeGraph::chain(3).unwrap(), 4, true).unwrap().dim(), 4096);
        let site = SiteSpace::new(5, false).unwrap();
        assert!(matches!(ProductBasis::new(8, site, 1000), Err(Error::DimensionBudget { .. })));
        assert!(SiteSpace::new(1, false).is_err());
    }

    #[test]
    fn indexing_is_bijective_and_site_zero_slowest() {
        let b = build_basis(&LatticeGraph::chain(3).unwrap(), 2, true).unwrap();
        for f in 0..b.dim() {
            assert_eq!(b.flat_index(&b.local_indices(f)), f);
        }
        assert_eq!(b.local_indices(1), vec![0, 0, 1]);
        assert_eq!(b.local_indices(b.dim() - 1), vec![7, 7, 7]);
    }

    #[test]
    fn ladder_and_sigma_operators() {
        let b = build_basis(&LatticeGraph::chain(1).unwrap(), 5, false).unwrap();
        let a = site_operator(&b, SiteOperatorKind::Annihilate, 0).unwrap();
        assert!((a.get(1, 2).re - 2f64.sqrt()).abs() < 1e-15);
        let ad = site_operator(&b, SiteOperatorKind::Create, 0).unwrap();
        assert_eq!(ad, a.adjoint());
        let num = ad.matmul(&a);
        assert!((num.get(4, 4).re - 4.0).abs() < 1e-14);
        assert!(num.sub(&site_operator(&b, SiteOperatorKind::Number, 0).unwrap()).max_abs() < 1e-14);
        let sp = site_operator(&b, SiteOperatorKind::SigmaPlus, 0).unwrap();
        let sm = site_operator(&b, SiteOperatorKind::SigmaMinus, 0).unwrap();
        let ev = real_eigenvalues(&sp.matmul(&sm));
        assert!(ev.iter().all(|&x| x.abs() < 1e-14 || (x - 1.0).abs() < 1e-14));
        assert!(site_operator(&b, SiteOperatorKind::AncillaSigmaMinus, 0).is_err());
        assert!(site_operator(&b, SiteOperatorKind::SigmaZ, 1).is_err());
    }

    #[test]
    fn hamiltonian_matches_operator_algebra() {
        let g = LatticeGraph::chain(3).unwrap();
        let b = build_basis(&g, 3, false).unwrap();
        let p = JcParams::from_ratio(1.0, 1.7, 0.05).unwrap();
        let j = 0.01;
        let h = jch_hamiltonian(&g, &p, j, &b).unwrap();
        let op = |k, i| site_operator(&b, k, i).unwrap();
        use SiteOperatorKind::*;
        let mut reference = OperatorMatrix::zeros(b.dim());
        for i in 0..3 {
            let term = op(Create, i)
                .matmul(&op(Annihilate, i))
                .scale(C64::new(p.omega(), 0.0))
                .add(&op(SigmaPlus, i).matmul(&op(SigmaMinus, i)).scale(C64::new(p.omega0(), 0.0)))
                .add(
                    &op(SigmaPlus, i)
                        .matmul(&op(Annihilate, i))
                        .add(&op(SigmaMinus, i).matmul(&op(Create, i)))
                        .scale(C64::new(p.g(), 0.0)),
                );
            reference = reference.add(&term);
        }
        for &(i, k) in g.edges() {
            let hop = op(Create, i).matmul(&op(Annihilate, k)).add(&op(Create, k).matmul(&op(Annihilate, i)));
            reference = reference.sub(&hop.scale(C64::new(j, 0.0)));
        }
        assert!(h.sub(&reference).max_abs() < 1e-14);
        assert!(h.is_hermitian(1e-12));
        let n = total_excitations(&b, false);
        assert!(h.commutator(&n).max_abs() < 1e-12);
    }

    #[test]
    fn single_site_reduces_to_jc_model() {
        let p = JcParams::from_ratio(1.0, 0.8, 0.02).unwrap();
        let g = LatticeGraph::chain(1).unwrap();
        let b = build_basis(&g, 5, false).unwrap();
        let h = jch_hamiltonian(&g, &p, 0.0, &b).unwrap();
        let ev = real_eigenvalues(&h.restrict(&b.sector_indices(1, false)));
        let e1m = polariton_energy(1, Branch::Lower, &p).unwrap();
        let e1p = polariton_energy(1, Branch::Upper, &p).unwrap();
        assert!((ev[0] - e1m).abs() < 1e-13 && (ev[1] - e1p).abs() < 1e-13);
        assert!((e1p - e1m - 2.0 * chi(1, &p).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn uncoupled_dimer_spectrum_is_direct_sum() {
        let p = JcParams::from_ratio(1.0, 0.0, 0.01).unwrap();
        let one = LatticeGraph::chain(1).unwrap();
        let two = LatticeGraph::chain(2).unwrap();
        let b1 = build_basis(&one, 4, false).unwrap();
        let b2 = build_basis(&two, 4, false).unwrap();
        let single = real_eigenvalues(&jch_hamiltonian(&one, &p, 0.0, &b1).unwrap());
        let mut sums: Vec<f64> = single.iter().flat_map(|a| single.iter().map(move |b| a + b)).collect();
        sums.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pair = real_eigenvalues(&jch_hamiltonian(&two, &p, 0.0, &b2).unwrap());
        for (x, y) in sums.iter().zip(&pair) {
            assert!((x - y).abs() < 1e-12);
        }
        // lowest two-excitation state at J = 0 is |1,-> ⊗ |1,->
        let sector = b2.sector_indices(2, false);
        let ev = real_eigenvalues(&jch_hamiltonian(&two, &p, 0.0, &b2).unwrap().restrict(&sector));
        assert!((ev[0] - 2.0 * (1.0 - 0.01)).abs() < 1e-13);
    }

    #[test]
    fn two_excitation_dimer_states_at_zero_hopping() {
        let p = JcParams::from_ratio(1.0, 3.0, 0.01).unwrap();
        let two = LatticeGraph::chain(2).unwrap();
        let b = build_basis(&two, 5, false).unwrap();
        let sector = b.sector_indices(2, false);
        let ev = real_eigenvalues(&jch_hamiltonian(&two, &p, 0.0, &b).unwrap().restrict(&sector));
        let e = |n, br| polariton_energy(n, br, &p).unwrap();
        use Branch::{Lower as L, Upper as U};
        // |1-1->, |2±,0->, |0-,2±>, |1+1->, |1-1+>, |1+1+>
        let mut expected = vec![
            2.0 * e(1, L),
            e(2, L),
            e(2, L),
            e(2, U),
            e(2, U),
            e(1, U) + e(1, L),
            e(1, U) + e(1, L),
            2.0 * e(1, U),
        ];
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(ev.len(), expected.len());
        for (x, y) in ev.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn block_structure_in_excitation_number() {
        let g = LatticeGraph::chain(3).unwrap();
        let b = build_basis(&g, 4, false).unwrap();
        let p = JcParams::from_ratio(1.0, 2.0, 0.01).unwrap();
        let h = jch_hamiltonian(&g, &p, 1e-3, &b).unwrap();
        let mut order: Vec<usize> = (0..b.dim()).collect();
        order.sort_by_key(|&f| b.excitations(f, false));
        let permuted = h.restrict(&order);
        for (r, c, v) in permuted.triplets() {
            if v.norm() > 0.0 {
                assert_eq!(b.excitations(order[r], false), b.excitations(order[c], false));
            }
        }
    }

    #[test]
    fn ancilla_site_spectrum_and_avoided_crossing() {
        let p = JcParams::from_ratio(1.0, 2.5, 0.04).unwrap();
        let n_max = 4;
        let (b, h0) = ancilla_site_hamiltonian(&p, 0.7, 0.0, n_max).unwrap();
        assert!(h0.is_hermitian(1e-12));
        let jc_b = build_basis(&LatticeGraph::chain(1).unwrap(), n_max, false).unwrap();
        let jc = real_eigenvalues(&jch_hamiltonian(&LatticeGraph::chain(1).unwrap(), &p, 0.0, &jc_b).unwrap());
        let mut expected: Vec<f64> = jc.iter().copied().chain(jc.iter().map(|e| e + 0.7)).collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, y) in real_eigenvalues(&h0).iter().zip(&expected) {
            assert!((x - y).abs() < 1e-12);
        }

        let e1m = polariton_energy(1, Branch::Lower, &p).unwrap();
        let g_a = 1e-4;
        let (_, h) = ancilla_site_hamiltonian(&p, e1m, g_a, n_max).unwrap();
        let n_all = total_excitations(&b, true);
        assert!(h.commutator(&n_all).max_abs() < 1e-14);
        let ev = real_eigenvalues(&h.restrict(&b.sector_indices(1, true)));
        // the two states near E1- split by 2 g_A t1--
        let mut near: Vec<f64> = ev.iter().copied().filter(|e| (e - e1m).abs() < 1e-2).collect();
        near.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(near.len(), 2);
        let split = near[1] - near[0];
        let expected = 2.0 * g_a * lower_hopping(1, &p);
        assert!((split - expected).abs() < 1e-3 * expected, "{split} vs {expected}");
    }

    #[test]
    fn dressed_vectors_are_eigenvectors() {
        let p = JcParams::from_ratio(1.0, -0.6, 0.03).unwrap();
        let g = LatticeGraph::chain(1).unwrap();
        let b = build_basis(&g, 5, false).unwrap();
        let h = jch_hamiltonian(&g, &p, 0.0, &b).unwrap().to_dense();
        for n in 0..5u32 {
            for br in [Branch::Lower, Branch::Upper] {
                if n == 0 && br == Branch::Upper {
                    assert!(b.site_space().dressed_vector(0, br, &p).is_err());
                    continue;
                }
                let v = nalgebra::DVector::from_vec(b.site_space().dressed_vector(n, br, &p).unwrap());
                let e = polariton_energy(n, br, &p).unwrap();
                let r = &h * &v - v.clone() * C64::new(e, 0.0);
                assert!(r.norm() < 1e-12, "n={n} {br:?}");
            }
        }
        let _ = DMatrix::<f64>::zeros(1, 1);
    }
}
