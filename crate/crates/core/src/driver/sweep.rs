//! Detuning sweeps and their CSV layout.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Config, Mode};
use crate::analytic_dimer::{entropy_time_avg, variance_time_avg, DimerSpectralData};
use crate::dynamics::{open_quench, quench, OpenInitialState, OpenQuenchConfig, QuenchConfig, Trajectory};
use crate::effective::dimer_effective;
use crate::error::{Error, Result};
use crate::observables::{linear_entropy_time_avg, two_point_correlation, variance_time_avg_numeric};
use crate::polariton::{rwa_report, JcParams};
use crate::preparation::initialize_with_ancilla;

/// `i, j, k, l, ...` for sites `0, 1, 2, 3, ...`.
pub fn site_letter(i: usize) -> String {
    let letters = b"ijklmnopqrstuvwxyz";
    match letters.get(i) {
        Some(&c) => (c as char).to_string(),
        None => format!("s{i}"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub delta_over_g: f64,
    pub var_dimer_analytic: f64,
    pub entropy_dimer_analytic: f64,
    pub var_numeric: f64,
    pub entropy_numeric: f64,
    /// Signed `C_{0j}` for `j = 1..L`.
    pub correlations: Vec<f64>,
    pub rwa_pass: bool,
    pub advisory: bool,
    pub truncation_leak: f64,
    pub preparation_fidelity: Option<f64>,
    pub trace_deviation: Option<f64>,
    pub min_eigenvalue: Option<f64>,
    pub time_samples: usize,
    pub warnings: Vec<String>,
    /// `None` on success, otherwise the failure message.
    pub failure: Option<String>,
}

impl SweepRecord {
    fn failed(delta_over_g: f64, pairs: usize, msg: String) -> Self {
        Self {
            delta_over_g,
            var_dimer_analytic: f64::NAN,
            entropy_dimer_analytic: f64::NAN,
            var_numeric: f64::NAN,
            entropy_numeric: f64::NAN,
            correlations: vec![f64::NAN; pairs],
            rwa_pass: false,
            advisory: false,
            truncation_leak: f64::NAN,
            preparation_fidelity: None,
            trace_deviation: None,
            min_eigenvalue: None,
            time_samples: 0,
            warnings: Vec::new(),
            failure: Some(msg),
        }
    }

    /// `|C_{0j}| / Var_dimer`.
    pub fn ratios(&self) -> Vec<f64> {
        self.correlations.iter().map(|c| c.abs() / self.var_dimer_analytic).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub mode: Mode,
    pub num_sites: usize,
    /// `ij`, `ik`, ... for the pairs `(0, j)`.
    pub pair_labels: Vec<String>,
    pub records: Vec<SweepRecord>,
}

impl SweepResult {
    pub fn grid(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.delta_over_g).collect()
    }

    /// Ratio curves named `ratio_ij`, `ratio_ik`, ...
    pub fn ratio_curves(&self) -> Curves {
        self.pair_labels
            .iter()
            .enumerate()
            .map(|(p, label)| (format!("ratio_{label}"), self.records.iter().map(|r| r.ratios()[p]).collect()))
            .collect()
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["delta_over_g".to_string(), "var_dimer_analytic".to_string()];
        h.extend(self.pair_labels.iter().map(|l| format!("c_{l}")));
        h.extend(self.pair_labels.iter().map(|l| format!("ratio_{l}")));
        h.extend(["entropy_dimer_analytic", "var_numeric", "entropy_numeric"].map(String::from));
        h.extend(self.pair_labels.iter().map(|l| format!("c_{l}_signed")));
        h.extend(
            ["rwa_pass", "advisory", "truncation_leak", "preparation_fidelity", "trace_deviation", "min_eigenvalue", "time_samples", "status"]
                .map(String::from),
        );
        h
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.header())?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.records {
            let mut row = vec![r.delta_over_g.to_string(), r.var_dimer_analytic.to_string()];
            row.extend(r.correlations.iter().map(|c| c.abs().to_string()));
            row.extend(r.ratios().iter().map(|c| c.to_string()));
            row.extend([r.entropy_dimer_analytic, r.var_numeric, r.entropy_numeric].map(|x| x.to_string()));
            row.extend(r.correlations.iter().map(|c| c.to_string()));
            row.push(r.rwa_pass.to_string());
            row.push(r.advisory.to_string());
            row.push(r.truncation_leak.to_string());
            row.push(opt(r.preparation_fidelity));
            row.push(opt(r.trace_deviation));
            row.push(opt(r.min_eigenvalue));
            row.push(r.time_samples.to_string());
            row.push(match &r.failure {
                None => "ok".to_string(),
                Some(m) => format!("failed: {m}"),
            });
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Named curves sampled on a common grid.
pub type Curves = Vec<(String, Vec<f64>)>;

/// Reads `delta_over_g` and every `ratio_*` column of a sweep CSV.
pub fn read_ratio_csv<R: Read>(r: R) -> Result<(Vec<f64>, Curves)> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    let x_col = header.iter().position(|h| h == "delta_over_g").ok_or(Error::MissingData("a delta_over_g column"))?;
    let cols: Vec<(usize, String)> =
        header.iter().enumerate().filter(|(_, h)| h.starts_with("ratio_")).map(|(i, h)| (i, h.to_string())).collect();
    if cols.is_empty() {
        return Err(Error::MissingData("ratio_* columns"));
    }
    let mut x = Vec::new();
    let mut curves: Vec<(String, Vec<f64>)> = cols.iter().map(|(_, h)| (h.clone(), Vec::new())).collect();
    for rec in rdr.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            let s = rec.get(i).unwrap_or("");
            if s.is_empty() {
                return Ok(f64::NAN);
            }
            s.parse::<f64>().map_err(|_| Error::InvalidParameter(format!("cannot parse `{s}` in column {}", &header[i])))
        };
        x.push(parse(x_col)?);
        for (c, (i, _)) in cols.iter().enumerate() {
            curves[c].1.push(parse(*i)?);
        }
    }
    Ok((x, curves))
}

/// Time samples needed to resolve the dimer frequency `Ω₀` over `t_end`.
pub fn time_samples(cfg: &Config, p: &JcParams, t_end: f64) -> usize {
    let h = dimer_effective(p, cfg.quench.j_final);
    let needed = DimerSpectralData::new(&h)
        .map(|s| (cfg.quench.samples_per_period * s.omega0 * t_end / (2.0 * std::f64::consts::PI)).ceil() as usize + 1)
        .unwrap_or(0);
    cfg.quench.n_time_samples.max(needed)
}

fn observe(cfg: &Config, traj: &Trajectory, t_end: f64, rec: &mut SweepRecord) -> Result<()> {
    rec.var_numeric = variance_time_avg_numeric(traj, 0, t_end)?;
    rec.entropy_numeric = linear_entropy_time_avg(traj, 0, t_end)?;
    let l = cfg.lattice_graph()?.num_sites();
    rec.correlations = (1..l).map(|j| two_point_correlation(traj, 0, j, t_end)).collect::<Result<_>>()?;
    Ok(())
}

/// One grid point of the sweep.
pub fn sweep_point(cfg: &Config, delta_over_g: f64) -> Result<SweepRecord> {
    run_point(cfg, delta_over_g).map(|(rec, _)| rec)
}

/// One grid point together with its trajectory.
pub fn run_point(cfg: &Config, delta_over_g: f64) -> Result<(SweepRecord, Trajectory)> {
    let graph = cfg.lattice_graph()?;
    let l = graph.num_sites();
    let p = cfg.params(delta_over_g)?;
    let j = cfg.quench.j_final;
    let h = dimer_effective(&p, j);
    let mut rec = SweepRecord::failed(delta_over_g, l.saturating_sub(1), String::new());
    rec.failure = None;
    rec.var_dimer_analytic = variance_time_avg(&h, j);
    rec.entropy_dimer_analytic = entropy_time_avg(&h, j);
    rec.rwa_pass = rwa_report(&p, j, (l as u32).max(2), cfg.quench.rwa_threshold)?.passes();
    let t_end = cfg.quench.t_end.unwrap_or(1.0 / j);
    let samples = time_samples(cfg, &p, t_end);
    rec.time_samples = samples;
    match cfg.sweep.mode {
        Mode::Closed => {
            let qc = QuenchConfig {
                lattice: graph,
                params: p,
                j_final: j,
                t_end: Some(t_end),
                n_time_samples: samples,
                representation: cfg.quench.representation,
                n_max: cfg.quench.n_max,
                rwa_threshold: cfg.quench.rwa_threshold,
            };
            let run = quench(&qc)?;
            rec.advisory = run.advisory;
            rec.truncation_leak = run.truncation_leak;
            rec.warnings = run.warnings.clone();
            observe(cfg, &run.trajectory, t_end, &mut rec)?;
            Ok((rec, run.trajectory))
        }
        Mode::Open => {
            let mut oc = OpenQuenchConfig::new(graph, p, j, cfg.rates());
            oc.t_end = Some(t_end);
            oc.n_time_samples = samples;
            oc.n_max = cfg.quench.n_max;
            if cfg.dissipation.preparation.enabled {
                let prep = initialize_with_ancilla(&p, &cfg.preparation_spec())?;
                rec.preparation_fidelity = Some(prep.fidelity);
                rec.warnings.extend(prep.warnings.iter().cloned());
                oc.initial = OpenInitialState::Product(prep.site_state);
            }
            let run = open_quench(&oc)?;
            rec.trace_deviation = Some(run.diagnostics.max_trace_deviation);
            rec.min_eigenvalue = Some(run.diagnostics.min_eigenvalue);
            rec.truncation_leak = crate::dynamics::truncation_leak(&run.trajectory);
            if run.discarded_weight > 1e-6 {
                rec.warnings.push(format!("initial state weight {:.3e} beyond the excitation cap", run.discarded_weight));
            }
            observe(cfg, &run.trajectory, t_end, &mut rec)?;
            Ok((rec, run.trajectory))
        }
    }
}

/// Runs every grid point; failed points are recorded and the sweep continues.
pub fn sweep(cfg: &Config) -> Result<SweepResult> {
    cfg.validate()?;
    let graph = cfg.lattice_graph()?;
    let l = graph.num_sites();
    let grid = cfg.grid();
    let run = || -> Vec<SweepRecord> {
        grid.par_iter()
            .map(|&x| {
                sweep_point(cfg, x).unwrap_or_else(|e| {
                    log::warn!("sweep point Δ/g = {x} failed: {e}");
                    SweepRecord::failed(x, l.saturating_sub(1), e.to_string())
                })
            })
            .collect()
    };
    let records = match cfg.sweep.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    Ok(SweepResult {
        mode: cfg.sweep.mode,
        num_sites: l,
        pair_labels: (1..l).map(|j| format!("{}{}", site_letter(0), site_letter(j))).collect(),
        records,
    })
}
