//! Time propagation: closed unitary evolution, Lindblad master equation and
//! the sudden hopping quench.

use std::cell::RefCell;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::effective::{lower_branch_basis, polariton_hamiltonian};
use crate::error::{Error, Result};
use crate::fockspace::{build_basis, jch_hamiltonian, site_operator, total_excitations, ProductBasis, SiteOperatorKind};
use crate::lattice::LatticeGraph;
use crate::ode::{self, OdeOptions};
use crate::operator::{OperatorMatrix, C64, I, ZERO};
use crate::polariton::{Branch, JcParams, RwaReport, DEFAULT_RWA_THRESHOLD};
use crate::subspace::{Subspace, SubspaceKind};

/// Closed runs diagonalize exactly up to this dimension and use Lanczos above.
pub const EXACT_DIAGONALIZATION_LIMIT: usize = 1024;
/// Population of the highest retained Fock level above which truncation is suspect.
pub const TRUNCATION_LEAK_THRESHOLD: f64 = 1e-4;
pub const DEFAULT_TIME_SAMPLES: usize = 2000;

#[derive(Clone, Debug)]
pub struct QuantumState {
    subspace: Arc<Subspace>,
    amplitudes: DVector<C64>,
}

impl QuantumState {
    pub fn new(subspace: Arc<Subspace>, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != subspace.dim() {
            return Err(Error::DimensionMismatch { expected: subspace.dim(), got: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { subspace, amplitudes })
    }

    pub fn subspace(&self) -> &Arc<Subspace> {
        &self.subspace
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    subspace: Arc<Subspace>,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Checks Hermiticity (1e-10), unit trace (1e-8) and positivity (-1e-8).
    pub fn new(subspace: Arc<Subspace>, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != subspace.dim() || matrix.ncols() != subspace.dim() {
            return Err(Error::DimensionMismatch { expected: subspace.dim(), got: matrix.nrows() });
        }
        let rho = Self { subspace, matrix };
        let herm = rho.hermiticity_defect();
        if herm > 1e-10 {
            return Err(Error::NotHermitian(herm));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidParameter(format!("density matrix trace {tr} differs from 1")));
        }
        let min = rho.min_eigenvalue();
        if min < -1e-8 {
            return Err(Error::InvalidParameter(format!("density matrix eigenvalue {min} is negative")));
        }
        Ok(rho)
    }

    pub fn from_pure(psi: &QuantumState) -> Self {
        let v = psi.amplitudes();
        Self { subspace: psi.subspace.clone(), matrix: v * v.adjoint() }
    }

    pub fn subspace(&self) -> &Arc<Subspace> {
        &self.subspace
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }
}

fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(sym).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LindbladRates {
    /// TLS relaxation, collapse operator `σ⁻`.
    pub gamma: f64,
    /// TLS dephasing, collapse operator `σ_z`.
    pub gamma_phi: f64,
    /// Photon loss, collapse operator `a`.
    pub kappa: f64,
}

impl LindbladRates {
    pub fn new(gamma: f64, gamma_phi: f64, kappa: f64) -> Result<Self> {
        let r = Self { gamma, gamma_phi, kappa };
        r.validate()?;
        Ok(r)
    }

    pub fn zero() -> Self {
        Self { gamma: 0.0, gamma_phi: 0.0, kappa: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("gamma", self.gamma), ("gamma_phi", self.gamma_phi), ("kappa", self.kappa)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be a finite non-negative rate, got {v}")));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.gamma == 0.0 && self.gamma_phi == 0.0 && self.kappa == 0.0
    }
}

/// What a trajectory keeps at each sample time.
#[derive(Clone, Debug)]
pub enum Samples {
    Pure(Vec<DVector<C64>>),
    Mixed(Vec<DMatrix<C64>>),
    /// Basis populations and single-site reduced states only.
    Compact { populations: Vec<Vec<f64>>, reduced: Vec<Vec<DMatrix<C64>>> },
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    subspace: Arc<Subspace>,
    times: Vec<f64>,
    samples: Samples,
}

impl Trajectory {
    pub fn new(subspace: Arc<Subspace>, times: Vec<f64>, samples: Samples) -> Result<Self> {
        let n = match &samples {
            Samples::Pure(v) => v.len(),
            Samples::Mixed(v) => v.len(),
            Samples::Compact { populations, reduced } => {
                if reduced.len() != populations.len() {
                    return Err(Error::DimensionMismatch { expected: populations.len(), got: reduced.len() });
                }
                populations.len()
            }
        };
        if n != times.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), got: n });
        }
        ode::check_grid(&times)?;
        Ok(Self { subspace, times, samples })
    }

    pub fn subspace(&self) -> &Arc<Subspace> {
        &self.subspace
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn samples(&self) -> &Samples {
        &self.samples
    }

    pub fn state(&self, k: usize) -> Option<&DVector<C64>> {
        match &self.samples {
            Samples::Pure(v) => v.get(k),
            _ => None,
        }
    }

    /// Probabilities of each basis member at sample `k`.
    pub fn populations(&self, k: usize) -> Vec<f64> {
        match &self.samples {
            Samples::Pure(v) => v[k].iter().map(|z| z.norm_sqr()).collect(),
            Samples::Mixed(v) => v[k].diagonal().iter().map(|z| z.re).collect(),
            Samples::Compact { populations, .. } => populations[k].clone(),
        }
    }

    pub fn reduced(&self, k: usize, site: usize) -> Result<DMatrix<C64>> {
        match &self.samples {
            Samples::Pure(v) => self.subspace.reduce_pure(&v[k], site),
            Samples::Mixed(v) => self.subspace.reduce_mixed(&v[k], site),
            Samples::Compact { reduced, .. } => {
                self.subspace.check_site(site)?;
                Ok(reduced[k][site].clone())
            }
        }
    }

    /// `<φ|ρ(t_k)|φ>` or `|<φ|ψ(t_k)>|²`.
    pub fn probability(&self, k: usize, phi: &DVector<C64>) -> Result<f64> {
        match &self.samples {
            Samples::Pure(v) => Ok(phi.dotc(&v[k]).norm_sqr()),
            Samples::Mixed(v) => Ok(phi.dotc(&(&v[k] * phi)).re),
            Samples::Compact { .. } => Err(Error::MissingData("full states")),
        }
    }
}

/// Uniform grid of `samples` points over `[0, t_end]`, endpoints included.
pub fn uniform_grid(t_end: f64, samples: usize) -> Result<Vec<f64>> {
    if !(t_end > 0.0 && t_end.is_finite()) || samples < 2 {
        return Err(Error::InvalidTimeGrid);
    }
    let h = t_end / (samples - 1) as f64;
    let mut g: Vec<f64> = (0..samples).map(|k| k as f64 * h).collect();
    g[samples - 1] = t_end;
    Ok(g)
}

/// `⊗_i |1,->` at the detuning in `p`.
pub fn mott_initial_state(subspace: &Arc<Subspace>, p: &JcParams) -> Result<QuantumState> {
    let factors = vec![(1, Branch::Lower); subspace.num_sites()];
    let v = subspace.dressed_product(p, &factors)?;
    let norm = v.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "the Mott state has weight {norm} inside the chosen subspace"
        )));
    }
    QuantumState::new(subspace.clone(), v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Propagator {
    /// Exact diagonalization up to [`EXACT_DIAGONALIZATION_LIMIT`], Lanczos above.
    Auto,
    Eigen,
    Krylov { krylov_dim: usize, tolerance: f64 },
}

impl Propagator {
    pub const DEFAULT_KRYLOV: Propagator = Propagator::Krylov { krylov_dim: 30, tolerance: 1e-10 };
}

/// `ψ(t) = e^{-iHt} ψ₀` on every grid point.
pub fn evolve_closed(h: &OperatorMatrix, psi0: &QuantumState, t_grid: &[f64]) -> Result<Trajectory> {
    evolve_closed_with(h, psi0, t_grid, Propagator::Auto)
}

pub fn evolve_closed_with(h: &OperatorMatrix, psi0: &QuantumState, t_grid: &[f64], method: Propagator) -> Result<Trajectory> {
    if h.dim() != psi0.subspace.dim() {
        return Err(Error::DimensionMismatch { expected: psi0.subspace.dim(), got: h.dim() });
    }
    h.ensure_hermitian(1e-12)?;
    ode::check_grid(t_grid)?;
    let method = match method {
        Propagator::Auto if h.dim() <= EXACT_DIAGONALIZATION_LIMIT => Propagator::Eigen,
        Propagator::Auto => Propagator::DEFAULT_KRYLOV,
        m => m,
    };
    let states = match method {
        Propagator::Eigen => propagate_eigen(h, psi0.amplitudes(), t_grid),
        Propagator::Krylov { krylov_dim, tolerance } => {
            propagate_krylov(h, psi0.amplitudes(), t_grid, krylov_dim.max(2), tolerance)?
        }
        Propagator::Auto => unreachable!(),
    };
    Trajectory::new(psi0.subspace.clone(), t_grid.to_vec(), Samples::Pure(states))
}

fn propagate_eigen(h: &OperatorMatrix, psi0: &DVector<C64>, t_grid: &[f64]) -> Vec<DVector<C64>> {
    let eig = SymmetricEigen::new(h.to_dense());
    let v = eig.eigenvectors;
    let coeffs = v.adjoint() * psi0;
    t_grid
        .iter()
        .map(|&t| {
            let phased = DVector::from_iterator(
                coeffs.len(),
                coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, &e)| c * C64::from_polar(1.0, -e * t)),
            );
            &v * phased
        })
        .collect()
}

struct LanczosBasis {
    vectors: Vec<DVector<C64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    residual: f64,
}

fn lanczos(h: &OperatorMatrix, shift: f64, v: &DVector<C64>, m: usize) -> LanczosBasis {
    let norm0 = v.norm();
    let mut vectors = vec![v / C64::new(norm0, 0.0)];
    let mut alpha = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    let scale = h.max_abs().max(shift.abs()).max(f64::MIN_POSITIVE);
    let mut residual = 0.0;
    for j in 0..m {
        let mut w = h.apply(&vectors[j]) - &vectors[j] * C64::new(shift, 0.0);
        let a = vectors[j].dotc(&w).re;
        alpha.push(a);
        for q in &vectors {
            let proj = q.dotc(&w);
            w -= q * proj;
        }
        let b = w.norm();
        residual = b;
        if b <= 1e-13 * scale || j + 1 == m {
            break;
        }
        beta.push(b);
        vectors.push(w / C64::new(b, 0.0));
    }
    LanczosBasis { vectors, alpha, beta, residual }
}

/// `e^{-iTdt} e₁` for the tridiagonal Lanczos matrix.
fn tridiagonal_exp(alpha: &[f64], beta: &[f64], dt: f64) -> DVector<C64> {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let s = eig.eigenvectors;
    DVector::from_iterator(
        m,
        (0..m).map(|r| (0..m).map(|k| C64::from_polar(s[(r, k)] * s[(0, k)], -eig.eigenvalues[k] * dt)).sum()),
    )
}

fn propagate_krylov(h: &OperatorMatrix, psi0: &DVector<C64>, t_grid: &[f64], m: usize, tol: f64) -> Result<Vec<DVector<C64>>> {
    // a constant shift only changes the global phase by e^{-i shift t}
    let diag = h.diagonal();
    let shift = diag.iter().map(|z| z.re).sum::<f64>() / diag.len().max(1) as f64;
    let mut out = Vec::with_capacity(t_grid.len());
    let mut psi = psi0.clone();
    out.push(psi.clone());
    let mut t = 0.0;
    let mut dt_guess = f64::INFINITY;
    for &target in &t_grid[1..] {
        while t < target {
            let basis = lanczos(h, shift, &psi, m);
            let happy = basis.vectors.len() < m || basis.residual <= 1e-13;
            let mut dt = (target - t).min(dt_guess);
            let coeffs = loop {
                let c = tridiagonal_exp(&basis.alpha, &basis.beta, dt);
                let err = if happy { 0.0 } else { basis.residual * c[c.len() - 1].norm() };
                if err <= tol {
                    break c;
                }
                dt *= 0.5;
                if dt < 1e-300 {
                    return Err(Error::StepSizeFailure { last_good_time: t });
                }
            };
            let norm = psi.norm();
            let mut next = DVector::zeros(psi.len());
            for (q, c) in basis.vectors.iter().zip(coeffs.iter()) {
                next += q * (c * norm);
            }
            psi = next;
            if t + dt >= target {
                t = target;
            } else {
                t += dt;
                dt_guess = dt * 1.5;
            }
        }
        out.push(psi.clone() * C64::from_polar(1.0, -shift * t));
    }
    Ok(out)
}

/// Lindblad generator `-i[H,ρ] + Σ_c (c ρ c† - ½{c†c, ρ})`.
#[derive(Clone, Debug)]
pub struct LindbladModel {
    h: OperatorMatrix,
    jumps: Vec<OperatorMatrix>,
    h_eff: OperatorMatrix,
}

impl LindbladModel {
    /// Collapse operators enter already scaled by the square root of their rate.
    pub fn new(h: OperatorMatrix, jumps: Vec<OperatorMatrix>) -> Result<Self> {
        h.ensure_hermitian(1e-12)?;
        for c in &jumps {
            if c.dim() != h.dim() {
                return Err(Error::DimensionMismatch { expected: h.dim(), got: c.dim() });
            }
        }
        let mut h_eff = h.clone();
        for c in &jumps {
            h_eff = h_eff.sub(&c.adjoint().matmul(c).scale(C64::new(0.0, 0.5)));
        }
        Ok(Self { h, jumps, h_eff })
    }

    /// `σ_i⁻` (γ), `σ_i^z` (γ_φ) and `a_i` (κ) on every lattice site, restricted to `indices`.
    pub fn lattice(basis: &ProductBasis, indices: &[usize], h: OperatorMatrix, rates: &LindbladRates) -> Result<Self> {
        rates.validate()?;
        let mut jumps = Vec::new();
        for i in 0..basis.num_sites() {
            for (kind, rate) in [
                (SiteOperatorKind::SigmaMinus, rates.gamma),
                (SiteOperatorKind::SigmaZ, rates.gamma_phi),
                (SiteOperatorKind::Annihilate, rates.kappa),
            ] {
                if rate > 0.0 {
                    let op = site_operator(basis, kind, i)?.restrict(indices);
                    jumps.push(op.scale(C64::new(rate.sqrt(), 0.0)));
                }
            }
        }
        Self::new(h, jumps)
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.h
    }

    pub fn jumps(&self) -> &[OperatorMatrix] {
        &self.jumps
    }

    /// `out = L ρ`, optionally with an extra Hamiltonian term `f V`.
    pub fn apply(&self, rho: &DMatrix<C64>, out: &mut DMatrix<C64>, scratch: &mut LindbladScratch, extra: Option<(f64, &OperatorMatrix)>) {
        let LindbladScratch { x, y, z } = scratch;
        self.h_eff.mul_dense_into(rho, x);
        if let Some((f, v)) = extra {
            if f != 0.0 {
                v.mul_dense_into(rho, y);
                *x += &*y * C64::new(f, 0.0);
            }
        }
        *x *= -I;
        x.adjoint_to(out);
        *out += &*x;
        for c in &self.jumps {
            c.mul_dense_into(rho, y);
            y.adjoint_to(z);
            c.mul_dense_into(z, y);
            *out += &*y;
        }
    }

    pub fn scratch(&self) -> LindbladScratch {
        let n = self.dim();
        LindbladScratch { x: DMatrix::zeros(n, n), y: DMatrix::zeros(n, n), z: DMatrix::zeros(n, n) }
    }
}

pub struct LindbladScratch {
    x: DMatrix<C64>,
    y: DMatrix<C64>,
    z: DMatrix<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpenOptions {
    pub ode: OdeOptions,
    /// Check positivity on every `positivity_stride`-th sample (0 disables).
    pub positivity_stride: usize,
}

impl Default for OpenOptions {
    fn default() -> Self {
        Self { ode: OdeOptions::default(), positivity_stride: 20 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct OpenDiagnostics {
    pub max_trace_deviation: f64,
    pub max_hermiticity_defect: f64,
    /// Smallest eigenvalue seen at the checked samples.
    pub min_eigenvalue: f64,
}

/// Integrates the master equation and hands every sampled `ρ` to `observe`.
pub fn evolve_lindblad_observed<O>(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    opts: &OpenOptions,
    mut observe: O,
) -> Result<OpenDiagnostics>
where
    O: FnMut(usize, f64, &DMatrix<C64>) -> Result<()>,
{
    if model.dim() != rho0.subspace.dim() {
        return Err(Error::DimensionMismatch { expected: rho0.subspace.dim(), got: model.dim() });
    }
    let scratch = RefCell::new(model.scratch());
    let mut diag = OpenDiagnostics { min_eigenvalue: f64::INFINITY, ..Default::default() };
    ode::integrate(
        |_, rho, out| model.apply(rho, out, &mut scratch.borrow_mut(), None),
        rho0.matrix.clone(),
        t_grid,
        &opts.ode,
        |k, t, rho| {
            diag.max_trace_deviation = diag.max_trace_deviation.max((rho.trace().re - 1.0).abs());
            diag.max_hermiticity_defect = diag.max_hermiticity_defect.max(hermiticity_defect(rho));
            if opts.positivity_stride > 0 && (k % opts.positivity_stride == 0 || k + 1 == t_grid.len()) {
                diag.min_eigenvalue = diag.min_eigenvalue.min(min_eigenvalue(rho));
            }
            observe(k, t, rho)
        },
    )?;
    Ok(diag)
}

/// Full density-matrix trajectory of the master equation.
pub fn evolve_lindblad(model: &LindbladModel, rho0: &DensityMatrix, t_grid: &[f64]) -> Result<(Trajectory, OpenDiagnostics)> {
    let mut states = Vec::with_capacity(t_grid.len());
    let diag = evolve_lindblad_observed(model, rho0, t_grid, &OpenOptions::default(), |_, _, rho| {
        states.push(rho.clone());
        Ok(())
    })?;
    Ok((Trajectory::new(rho0.subspace.clone(), t_grid.to_vec(), Samples::Mixed(states))?, diag))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    FullFock,
    Effective,
}

#[derive(Clone, Debug)]
pub struct QuenchConfig {
    pub lattice: LatticeGraph,
    pub params: JcParams,
    pub j_final: f64,
    /// Defaults to `τ = 1/J_f`.
    pub t_end: Option<f64>,
    pub n_time_samples: usize,
    pub representation: Representation,
    /// Fock states per resonator in the full representation.
    pub n_max: usize,
    pub rwa_threshold: f64,
}

impl QuenchConfig {
    pub fn new(lattice: LatticeGraph, params: JcParams, j_final: f64) -> Self {
        Self {
            lattice,
            params,
            j_final,
            t_end: None,
            n_time_samples: DEFAULT_TIME_SAMPLES,
            representation: Representation::FullFock,
            n_max: 5,
            rwa_threshold: DEFAULT_RWA_THRESHOLD,
        }
    }

    pub fn horizon(&self) -> Result<f64> {
        if !(self.j_final >= 0.0 && self.j_final.is_finite()) {
            return Err(Error::InvalidParameter(format!("J_f must be non-negative, got {}", self.j_final)));
        }
        match self.t_end {
            Some(t) if t > 0.0 && t.is_finite() => Ok(t),
            Some(t) => Err(Error::InvalidParameter(format!("t_end must be positive, got {t}"))),
            None if self.j_final > 0.0 => Ok(1.0 / self.j_final),
            None => Err(Error::InvalidParameter("J_f = 0 needs an explicit t_end".into())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuenchRun {
    pub trajectory: Trajectory,
    pub hamiltonian: OperatorMatrix,
    pub t_end: f64,
    pub rwa: Option<RwaReport>,
    /// Effective model used outside its validity range.
    pub advisory: bool,
    /// Largest population of the highest retained Fock level.
    pub truncation_leak: f64,
    pub warnings: Vec<String>,
}

/// Closed-system subspace and Hamiltonian used by a quench.
pub fn quench_model(cfg: &QuenchConfig) -> Result<(Arc<Subspace>, OperatorMatrix, Option<RwaReport>, bool)> {
    let l = cfg.lattice.num_sites();
    match cfg.representation {
        Representation::FullFock => {
            let basis = build_basis(&cfg.lattice, cfg.n_max, false)?;
            let sector = basis.sector_indices(l, false);
            let h = jch_hamiltonian(&cfg.lattice, &cfg.params, cfg.j_final, &basis)?.restrict(&sector);
            Ok((Arc::new(Subspace::fock(&basis, sector)), h, None, false))
        }
        Representation::Effective => {
            let basis = lower_branch_basis(l, l as u32)?;
            let eff = polariton_hamiltonian(&cfg.lattice, &cfg.params, cfg.j_final, &basis, cfg.rwa_threshold)?;
            Ok((Arc::new(basis.subspace()), eff.matrix, Some(eff.rwa), eff.advisory))
        }
    }
}

/// Sudden quench `J: 0 -> J_f` from the Mott state, sampled on `[0, t_end]`.
pub fn quench(cfg: &QuenchConfig) -> Result<QuenchRun> {
    let t_end = cfg.horizon()?;
    let grid = uniform_grid(t_end, cfg.n_time_samples)?;
    let (subspace, h, rwa, advisory) = quench_model(cfg)?;
    let psi0 = mott_initial_state(&subspace, &cfg.params)?;
    let trajectory = evolve_closed(&h, &psi0, &grid)?;
    let truncation_leak = truncation_leak(&trajectory);
    let mut warnings = Vec::new();
    if truncation_leak > TRUNCATION_LEAK_THRESHOLD {
        let msg = format!(
            "highest Fock level reaches population {truncation_leak:.3e}; increase n_max (Δ/g = {:.4})",
            cfg.params.delta_over_g()
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    if advisory {
        warnings.push(format!("effective model advisory at Δ/g = {:.4}", cfg.params.delta_over_g()));
    }
    Ok(QuenchRun { trajectory, hamiltonian: h, t_end, rwa, advisory, truncation_leak, warnings })
}

/// Largest total population, over time, of states with a photon number at the cutoff.
pub fn truncation_leak(traj: &Trajectory) -> f64 {
    let sub = traj.subspace();
    let SubspaceKind::Fock { site, .. } = sub.kind() else { return 0.0 };
    let top: Vec<usize> = (0..sub.dim())
        .filter(|&k| sub.labels(k).iter().any(|&x| site.decode(x).photons + 1 == site.n_max()))
        .collect();
    if top.is_empty() {
        return 0.0;
    }
    (0..traj.len())
        .map(|k| {
            let pops = traj.populations(k);
            top.iter().map(|&i| pops[i]).sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Initial condition of an open-system run.
#[derive(Clone, Debug)]
pub enum OpenInitialState {
    /// `⊗_i |1,-><1,-|`.
    IdealMott,
    /// The same single-site state on every site, in the local basis of a site without ancilla.
    Product(DMatrix<C64>),
}

#[derive(Clone, Debug)]
pub struct OpenQuenchConfig {
    pub lattice: LatticeGraph,
    pub params: JcParams,
    pub j_final: f64,
    pub rates: LindbladRates,
    pub t_end: Option<f64>,
    pub n_time_samples: usize,
    pub n_max: usize,
    pub initial: OpenInitialState,
    pub options: OpenOptions,
}

impl OpenQuenchConfig {
    pub fn new(lattice: LatticeGraph, params: JcParams, j_final: f64, rates: LindbladRates) -> Self {
        Self {
            lattice,
            params,
            j_final,
            rates,
            t_end: None,
            n_time_samples: DEFAULT_TIME_SAMPLES,
            n_max: 4,
            initial: OpenInitialState::IdealMott,
            options: OpenOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OpenQuenchRun {
    pub trajectory: Trajectory,
    pub diagnostics: OpenDiagnostics,
    pub t_end: f64,
    /// Weight of the initial product state beyond the propagated excitation cap.
    pub discarded_weight: f64,
}

/// Open-system quench. Loss channels only lower the excitation number, so
/// the states with at most `L` excitations form an invariant subspace and
/// the run is restricted to it. The Hamiltonian is taken in the frame
/// rotating at `ω N`, which leaves every collapse term unchanged.
pub fn open_quench(cfg: &OpenQuenchConfig) -> Result<OpenQuenchRun> {
    let t_end = QuenchConfig { t_end: cfg.t_end, ..QuenchConfig::new(cfg.lattice.clone(), cfg.params, cfg.j_final) }.horizon()?;
    let grid = uniform_grid(t_end, cfg.n_time_samples)?;
    let l = cfg.lattice.num_sites();
    let basis = build_basis(&cfg.lattice, cfg.n_max, false)?;
    let keep = basis.indices_up_to(l, false);
    let n_op = total_excitations(&basis, false);
    let h = jch_hamiltonian(&cfg.lattice, &cfg.params, cfg.j_final, &basis)?
        .sub(&n_op.scale(C64::new(cfg.params.omega(), 0.0)))
        .restrict(&keep);
    let subspace = Arc::new(Subspace::fock(&basis, keep.clone()));
    let model = LindbladModel::lattice(&basis, &keep, h, &cfg.rates)?;

    let (rho0, discarded_weight) = match &cfg.initial {
        OpenInitialState::IdealMott => (DensityMatrix::from_pure(&mott_initial_state(&subspace, &cfg.params)?), 0.0),
        OpenInitialState::Product(site) => product_density(&subspace, site)?,
    };

    let mut populations = Vec::with_capacity(grid.len());
    let mut reduced = Vec::with_capacity(grid.len());
    let diagnostics = evolve_lindblad_observed(&model, &rho0, &grid, &cfg.options, |_, _, rho| {
        populations.push(rho.diagonal().iter().map(|z| z.re).collect());
        reduced.push((0..l).map(|s| subspace.reduce_mixed(rho, s)).collect::<Result<Vec<_>>>()?);
        Ok(())
    })?;
    let trajectory = Trajectory::new(subspace, grid, Samples::Compact { populations, reduced })?;
    Ok(OpenQuenchRun { trajectory, diagnostics, t_end, discarded_weight })
}

/// `⊗_i ρ_site` restricted to `subspace` and renormalized.
pub fn product_density(subspace: &Arc<Subspace>, site: &DMatrix<C64>) -> Result<(DensityMatrix, f64)> {
    if site.nrows() != subspace.local_dim() || site.ncols() != subspace.local_dim() {
        return Err(Error::DimensionMismatch { expected: subspace.local_dim(), got: site.nrows() });
    }
    let n = subspace.dim();
    let mut m = DMatrix::from_element(n, n, ZERO);
    for r in 0..n {
        let lr = subspace.labels(r);
        for c in 0..n {
            let lc = subspace.labels(c);
            m[(r, c)] = lr.iter().zip(lc).map(|(&a, &b)| site[(a, b)]).product();
        }
    }
    let kept = m.trace().re;
    let full = site.trace().re.powi(subspace.num_sites() as i32);
    if kept <= 0.0 {
        return Err(Error::InvalidParameter("initial state has no weight in the propagated subspace".into()));
    }
    m /= C64::new(kept, 0.0);
    let rho = DensityMatrix::new(subspace.clone(), m)?;
    Ok((rho, (full - kept).max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic_dimer::amplitudes;
    use crate::effective::dimer_effective;
    use crate::fockspace::{SiteSpace, DEFAULT_DIMENSION_BUDGET};

    fn effective_dimer(r: f64) -> (Arc<Subspace>, OperatorMatrix, JcParams) {
        let p = JcParams::from_ratio(1.0, r, 1e-2).unwrap();
        let cfg = QuenchConfig { representation: Representation::Effective, ..QuenchConfig::new(LatticeGraph::chain(2).unwrap(), p, 1e-4) };
        let (s, h, _, _) = quench_model(&cfg).unwrap();
        (s, h, p)
    }

    #[test]
    fn mott_state_conventions() {
        let p = JcParams::new(1.0, 0.0, 1e-2).unwrap();
        let basis = build_basis(&LatticeGraph::chain(1).unwrap(), 3, false).unwrap();
        let sub = Arc::new(Subspace::fock(&basis, (0..basis.dim()).collect()));
        let psi = mott_initial_state(&sub, &p).unwrap();
        let site = basis.site_space();
        let down1 = site.encode(crate::fockspace::LocalState { photons: 1, tls_up: false, ancilla_up: false }).unwrap();
        let up0 = site.encode(crate::fockspace::LocalState { photons: 0, tls_up: true, ancilla_up: false }).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((psi.amplitudes()[down1] - C64::new(h, 0.0)).norm() < 1e-14);
        assert!((psi.amplitudes()[up0] - C64::new(-h, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn mott_state_energy_and_number() {
        let p = JcParams::from_ratio(1.0, 3.0, 1e-2).unwrap();
        let cfg = QuenchConfig::new(LatticeGraph::chain(3).unwrap(), p, 0.0);
        let (sub, h, _, _) = quench_model(&cfg).unwrap();
        let psi = mott_initial_state(&sub, &p).unwrap();
        let e = h.expectation(psi.amplitudes()).re;
        assert!((e - 3.0 * crate::polariton::lower_energy(1, &p)).abs() < 1e-12);
        let n: f64 = psi.amplitudes().iter().enumerate().map(|(k, a)| a.norm_sqr() * sub.total_occupation(k) as f64).sum();
        assert!((n - 3.0).abs() < 1e-12);
    }

    #[test]
    fn closed_matches_dimer_amplitudes() {
        for r in [0.5, 2.43, 10.0, 50.0] {
            let (sub, h, p) = effective_dimer(r);
            let psi0 = mott_initial_state(&sub, &p).unwrap();
            let grid = uniform_grid(1e4, 101).unwrap();
            let traj = evolve_closed(&h, &psi0, &grid).unwrap();
            let dh = dimer_effective(&p, 1e-4);
            let i0 = sub.position(&[1, 1]).unwrap();
            let i2 = sub.position(&[2, 0]).unwrap();
            for (k, &t) in grid.iter().enumerate() {
                let (c0, c2) = amplitudes(t, &dh);
                let s = traj.state(k).unwrap();
                assert!((s[i0] - c0).norm() < 1e-9, "c0 at Δ/g={r}, t={t}");
                assert!((s[i2] - c2).norm() < 1e-9, "c2 at Δ/g={r}, t={t}");
            }
        }
    }

    #[test]
    fn krylov_agrees_with_diagonalization() {
        let p = JcParams::from_ratio(1.0, 2.5, 1e-2).unwrap();
        let cfg = QuenchConfig::new(LatticeGraph::chain(3).unwrap(), p, 1e-4);
        let (sub, h, _, _) = quench_model(&cfg).unwrap();
        let psi0 = mott_initial_state(&sub, &p).unwrap();
        let grid = uniform_grid(1e4, 41).unwrap();
        let exact = evolve_closed_with(&h, &psi0, &grid, Propagator::Eigen).unwrap();
        let kry = evolve_closed_with(&h, &psi0, &grid, Propagator::DEFAULT_KRYLOV).unwrap();
        for k in 0..grid.len() {
            let d = (exact.state(k).unwrap() - kry.state(k).unwrap()).norm();
            assert!(d < 1e-8, "sample {k}: {d}");
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let (sub, _, p) = effective_dimer(1.0);
        let psi0 = mott_initial_state(&sub, &p).unwrap();
        let bad = OperatorMatrix::from_triplets(3, [(0, 1, C64::new(1.0, 0.0))]);
        assert!(matches!(evolve_closed(&bad, &psi0, &[0.0, 1.0]), Err(Error::NotHermitian(_))));
        let h = OperatorMatrix::identity(3);
        assert!(matches!(evolve_closed(&h, &psi0, &[0.5, 1.0]), Err(Error::InvalidTimeGrid)));
    }

    fn single_site(n_max: usize) -> (ProductBasis, Arc<Subspace>) {
        let b = ProductBasis::new(1, SiteSpace::new(n_max, false).unwrap(), DEFAULT_DIMENSION_BUDGET).unwrap();
        let sub = Arc::new(Subspace::fock(&b, (0..b.dim()).collect()));
        (b, sub)
    }

    #[test]
    fn cavity_decay_is_exponential() {
        let (b, sub) = single_site(3);
        let kappa = 0.3;
        let model = LindbladModel::lattice(&b, &(0..b.dim()).collect::<Vec<_>>(), OperatorMatrix::zeros(b.dim()), &LindbladRates::new(0.0, 0.0, kappa).unwrap()).unwrap();
        let one = b.site_space().encode(crate::fockspace::LocalState { photons: 1, tls_up: false, ancilla_up: false }).unwrap();
        let mut m = DMatrix::zeros(b.dim(), b.dim());
        m[(one, one)] = C64::new(1.0, 0.0);
        let rho0 = DensityMatrix::new(sub, m).unwrap();
        let grid = uniform_grid(5.0, 21).unwrap();
        let (traj, diag) = evolve_lindblad(&model, &rho0, &grid).unwrap();
        for (k, &t) in grid.iter().enumerate() {
            assert!((traj.populations(k)[one] - (-kappa * t).exp()).abs() < 1e-7);
        }
        assert!(diag.max_trace_deviation < 1e-10);
        assert!(diag.min_eigenvalue > -1e-8);
    }

    #[test]
    fn pure_dephasing() {
        let (b, sub) = single_site(2);
        let gphi = 0.2;
        let model = LindbladModel::lattice(&b, &(0..b.dim()).collect::<Vec<_>>(), OperatorMatrix::zeros(b.dim()), &LindbladRates::new(0.0, gphi, 0.0).unwrap()).unwrap();
        let site = b.site_space();
        let dn = site.encode(crate::fockspace::LocalState { photons: 0, tls_up: false, ancilla_up: false }).unwrap();
        let up = site.encode(crate::fockspace::LocalState { photons: 0, tls_up: true, ancilla_up: false }).unwrap();
        let mut m = DMatrix::zeros(b.dim(), b.dim());
        for (r, c) in [(dn, dn), (up, up), (dn, up), (up, dn)] {
            m[(r, c)] = C64::new(0.5, 0.0);
        }
        let rho0 = DensityMatrix::new(sub, m).unwrap();
        let grid = uniform_grid(4.0, 9).unwrap();
        let (traj, _) = evolve_lindblad(&model, &rho0, &grid).unwrap();
        let Samples::Mixed(states) = traj.samples() else { panic!() };
        for (rho, &t) in states.iter().zip(&grid) {
            // L[σz] damps coherences as e^{-2γ_φ t}
            assert!((rho[(dn, up)].re - 0.5 * (-2.0 * gphi * t).exp()).abs() < 1e-8);
            assert!((rho[(dn, dn)].re - 0.5).abs() < 1e-10);
            assert!((rho[(up, up)].re - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn lossless_lindblad_matches_unitary() {
        let (sub, h, p) = effective_dimer(3.0);
        let psi0 = mott_initial_state(&sub, &p).unwrap();
        let grid = uniform_grid(1e4, 51).unwrap();
        let closed = evolve_closed(&h, &psi0, &grid).unwrap();
        let model = LindbladModel::new(h, vec![]).unwrap();
        let (open, _) = evolve_lindblad(&model, &DensityMatrix::from_pure(&psi0), &grid).unwrap();
        let Samples::Mixed(states) = open.samples() else { panic!() };
        for (k, rho) in states.iter().enumerate() {
            let psi = closed.state(k).unwrap();
            assert!((rho - psi * psi.adjoint()).norm() < 1e-7);
        }
    }

    #[test]
    fn zero_hopping_quench_is_stationary() {
        let p = JcParams::from_ratio(1.0, 4.0, 1e-2).unwrap();
        let cfg = QuenchConfig { t_end: Some(1e4), n_time_samples: 11, ..QuenchConfig::new(LatticeGraph::chain(2).unwrap(), p, 0.0) };
        let run = quench(&cfg).unwrap();
        let p0 = run.trajectory.populations(0);
        for k in 0..run.trajectory.len() {
            for (a, b) in run.trajectory.populations(k).iter().zip(&p0) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        let cfg = QuenchConfig { t_end: None, ..cfg };
        assert!(quench(&cfg).is_err());
    }

    #[test]
    fn open_trimer_invariants() {
        let p = JcParams::from_ratio(5000.0, 2.5, 200.0).unwrap();
        let mut cfg = OpenQuenchConfig::new(LatticeGraph::chain(3).unwrap(), p, 2.0, LindbladRates::new(0.035, 0.045, 0.225).unwrap());
        cfg.n_time_samples = 101;
        cfg.options.positivity_stride = 10;
        let run = open_quench(&cfg).unwrap();
        assert_eq!(run.trajectory.subspace().dim(), 63);
        assert!(run.diagnostics.max_trace_deviation <= 1e-6);
        assert!(run.diagnostics.min_eigenvalue >= -1e-6);
    }
}
