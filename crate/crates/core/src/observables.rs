//! Measurements on trajectories and their time averages over `[0, τ]`.

use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::polariton::{Branch, JcParams};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), got: values.len() });
        }
        crate::ode::check_grid(&times)?;
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(1/τ) ∫_0^τ f dt` by the trapezoid rule, interpolating linearly at `τ`.
    pub fn time_average(&self, tau: f64) -> Result<f64> {
        time_average(&self.times, &self.values, tau)
    }
}

pub fn time_average(times: &[f64], values: &[f64], tau: f64) -> Result<f64> {
    let covered = times.last().copied().unwrap_or(0.0);
    if !(tau > 0.0) || covered < tau * (1.0 - 1e-12) {
        return Err(Error::TrajectoryTooShort { covered, needed: tau });
    }
    let mut acc = 0.0;
    for k in 1..times.len() {
        let (t0, t1) = (times[k - 1], times[k]);
        if t0 >= tau {
            break;
        }
        let (v0, mut v1, mut end) = (values[k - 1], values[k], t1);
        if t1 > tau {
            v1 = v0 + (values[k] - v0) * (tau - t0) / (t1 - t0);
            end = tau;
        }
        acc += 0.5 * (v0 + v1) * (end - t0);
    }
    Ok(acc / tau)
}

fn occupations(traj: &Trajectory, site: usize) -> Result<Vec<f64>> {
    let sub = traj.subspace();
    sub.check_site(site)?;
    Ok((0..sub.dim()).map(|k| sub.occupation(k, site) as f64).collect())
}

fn series(traj: &Trajectory, f: impl Fn(usize) -> Result<f64>) -> Result<TimeSeries> {
    let values = (0..traj.len()).map(f).collect::<Result<Vec<_>>>()?;
    TimeSeries::new(traj.times().to_vec(), values)
}

/// `<n_i>(t)` with `n_i = a_i†a_i + σ_i⁺σ_i⁻`.
pub fn polariton_number_series(traj: &Trajectory, i: usize) -> Result<TimeSeries> {
    let n = occupations(traj, i)?;
    series(traj, |k| Ok(traj.populations(k).iter().zip(&n).map(|(p, x)| p * x).sum()))
}

/// `<n_i²> - <n_i>²` at each sample.
pub fn variance_series(traj: &Trajectory, i: usize) -> Result<TimeSeries> {
    let n = occupations(traj, i)?;
    series(traj, |k| {
        let pops = traj.populations(k);
        let m1: f64 = pops.iter().zip(&n).map(|(p, x)| p * x).sum();
        let m2: f64 = pops.iter().zip(&n).map(|(p, x)| p * x * x).sum();
        Ok(m2 - m1 * m1)
    })
}

pub fn variance_time_avg_numeric(traj: &Trajectory, i: usize, tau: f64) -> Result<f64> {
    variance_series(traj, i)?.time_average(tau)
}

/// `S(t) = 1 - Tr ρ_i²` of the reduced state of site `i`.
pub fn linear_entropy_series(traj: &Trajectory, i: usize) -> Result<TimeSeries> {
    series(traj, |k| {
        let rho = traj.reduced(k, i)?;
        Ok(1.0 - rho.iter().map(|z| z.norm_sqr()).sum::<f64>())
    })
}

pub fn linear_entropy_time_avg(traj: &Trajectory, i: usize, tau: f64) -> Result<f64> {
    linear_entropy_series(traj, i)?.time_average(tau)
}

/// `<n_i n_j> - <n_i><n_j>` at each sample.
pub fn correlation_series(traj: &Trajectory, i: usize, j: usize) -> Result<TimeSeries> {
    if i == j {
        return Err(Error::InvalidParameter("two-point correlation needs distinct sites".into()));
    }
    let ni = occupations(traj, i)?;
    let nj = occupations(traj, j)?;
    series(traj, |k| {
        let pops = traj.populations(k);
        let mut mi = 0.0;
        let mut mj = 0.0;
        let mut mij = 0.0;
        for ((p, a), b) in pops.iter().zip(&ni).zip(&nj) {
            mi += p * a;
            mj += p * b;
            mij += p * a * b;
        }
        Ok(mij - mi * mj)
    })
}

/// Signed, time-averaged connected correlator `C_ij`.
pub fn two_point_correlation(traj: &Trajectory, i: usize, j: usize, tau: f64) -> Result<f64> {
    correlation_series(traj, i, j)?.time_average(tau)
}

/// Dressed product state named by `label`.
///
/// Dimer names: `psi0`, `psi2-_i`, `psi2+_i`, `psi2-_j`, `psi2+_j`,
/// `psi1+_i`, `psi1+_j`, `psi1+_ij`. Trimer names: `psi0`, `psi3i`,
/// `psi3j`, `psi3k`, `psi2i1j`, `psi1j2k`, `psi1i2j`, `psi2j1k`, `psi2i1k`,
/// `psi1i2k`. Any lattice also accepts an explicit list such as `2-,0-,1+`.
pub fn label_factors(label: &str, num_sites: usize) -> Result<Vec<(u32, Branch)>> {
    use Branch::{Lower as M, Upper as P};
    let unknown = || Error::UnknownLabel(label.to_string());
    if label.contains(',') || (num_sites == 1 && (label.ends_with('-') || label.ends_with('+'))) {
        let parts: Vec<&str> = label.split(',').map(str::trim).collect();
        if parts.len() != num_sites {
            return Err(unknown());
        }
        return parts
            .iter()
            .map(|s| {
                let (n, b) = s.split_at(s.len().saturating_sub(1));
                let branch = match b {
                    "-" => M,
                    "+" => P,
                    _ => return Err(unknown()),
                };
                Ok((n.parse::<u32>().map_err(|_| unknown())?, branch))
            })
            .collect();
    }
    let f: Vec<(u32, Branch)> = match (num_sites, label) {
        (_, "psi0") => vec![(1, M); num_sites],
        (2, "psi2-_i") => vec![(2, M), (0, M)],
        (2, "psi2+_i") => vec![(2, P), (0, M)],
        (2, "psi2-_j") => vec![(0, M), (2, M)],
        (2, "psi2+_j") => vec![(0, M), (2, P)],
        (2, "psi1+_i") => vec![(1, P), (1, M)],
        (2, "psi1+_j") => vec![(1, M), (1, P)],
        (2, "psi1+_ij") => vec![(1, P), (1, P)],
        (3, "psi3i") => vec![(3, M), (0, M), (0, M)],
        (3, "psi3j") => vec![(0, M), (3, M), (0, M)],
        (3, "psi3k") => vec![(0, M), (0, M), (3, M)],
        (3, "psi2i1j") => vec![(2, M), (1, M), (0, M)],
        (3, "psi1j2k") => vec![(0, M), (1, M), (2, M)],
        (3, "psi1i2j") => vec![(1, M), (2, M), (0, M)],
        (3, "psi2j1k") => vec![(0, M), (2, M), (1, M)],
        (3, "psi2i1k") => vec![(2, M), (0, M), (1, M)],
        (3, "psi1i2k") => vec![(1, M), (0, M), (2, M)],
        _ => return Err(unknown()),
    };
    Ok(f)
}

pub const DIMER_LABELS: [&str; 8] = ["psi0", "psi2-_i", "psi2+_i", "psi2-_j", "psi2+_j", "psi1+_i", "psi1+_j", "psi1+_ij"];
pub const TRIMER_LABELS: [&str; 10] =
    ["psi0", "psi3i", "psi3j", "psi3k", "psi2i1j", "psi1j2k", "psi1i2j", "psi2j1k", "psi2i1k", "psi1i2k"];

/// `P_label(t) = |<label|ψ(t)>|²` for each requested label.
pub fn labeled_populations(traj: &Trajectory, p: &JcParams, labels: &[&str]) -> Result<Vec<(String, TimeSeries)>> {
    let sub = traj.subspace();
    labels
        .iter()
        .map(|&label| {
            let factors = label_factors(label, sub.num_sites())?;
            let phi = sub.dressed_product(p, &factors)?;
            Ok((label.to_string(), series(traj, |k| traj.probability(k, &phi))?))
        })
        .collect()
}
