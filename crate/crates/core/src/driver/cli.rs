//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use super::config::Config;
use super::resonance::{detect_in_curves, detect_resonances, DetectionOptions};
use super::sweep::{read_ratio_csv, run_point, site_letter, sweep};
use crate::analytic_dimer::{entropy_time_avg, variance_time_avg};
use crate::effective::dimer_effective;
use crate::error::{Error, Result};
use crate::observables::{
    correlation_series, labeled_populations, linear_entropy_series, polariton_number_series, variance_series, DIMER_LABELS,
    TRIMER_LABELS,
};
use crate::preparation::initialize_with_ancilla;

#[derive(Parser, Debug)]
#[command(name = "jchsim", version, about = "Quench dynamics of Jaynes-Cummings-Hubbard lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Time-averaged dimer variance and linear entropy in closed form.
    DimerAnalytic(Common),
    /// Single quench at `physics.delta_over_g`; writes the trajectory.
    Quench(Common),
    /// Detuning sweep in the mode given by `sweep.mode`.
    Sweep(Common),
    /// Detuning sweep with dissipation (`sweep.mode = "open"`).
    OpenSweep(Common),
    /// Single-site preparation of `|1,->` with an ancilla.
    InitProtocol(Common),
    /// Resonances and anti-resonances of the ratio columns of a sweep CSV.
    Detect(DetectArgs),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// lattice.shape
    #[arg(long)]
    lattice: Option<String>,
    /// lattice.sites
    #[arg(long)]
    sites: Option<usize>,
    /// lattice.edges, as `0-1,1-2`
    #[arg(long)]
    edges: Option<String>,
    /// physics.omega
    #[arg(long)]
    omega: Option<f64>,
    /// physics.g
    #[arg(long)]
    g: Option<f64>,
    /// physics.delta_over_g
    #[arg(long, allow_negative_numbers = true)]
    delta_over_g: Option<f64>,
    /// quench.j_final
    #[arg(long)]
    j: Option<f64>,
    /// quench.t_end
    #[arg(long)]
    t_end: Option<f64>,
    /// quench.n_time_samples
    #[arg(long)]
    samples: Option<i64>,
    /// quench.representation (`full_fock` or `effective`)
    #[arg(long)]
    representation: Option<String>,
    /// quench.n_max
    #[arg(long)]
    n_max: Option<i64>,
    /// quench.rwa_threshold
    #[arg(long)]
    rwa_threshold: Option<f64>,
    /// dissipation.gamma
    #[arg(long)]
    gamma: Option<f64>,
    /// dissipation.gamma_phi
    #[arg(long)]
    gamma_phi: Option<f64>,
    /// dissipation.kappa
    #[arg(long)]
    kappa: Option<f64>,
    /// dissipation.preparation.enabled
    #[arg(long)]
    preparation: Option<bool>,
    /// dissipation.preparation.g_a
    #[arg(long)]
    g_a: Option<f64>,
    /// dissipation.preparation.pulse (`ideal` or `gaussian`)
    #[arg(long)]
    pulse: Option<String>,
    /// dissipation.preparation.fidelity_floor
    #[arg(long)]
    fidelity_floor: Option<f64>,
    /// sweep.mode (`closed` or `open`)
    #[arg(long)]
    mode: Option<String>,
    /// sweep.min
    #[arg(long)]
    min: Option<f64>,
    /// sweep.max
    #[arg(long)]
    max: Option<f64>,
    /// sweep.points
    #[arg(long)]
    points: Option<i64>,
    /// sweep.spacing (`log` or `linear`)
    #[arg(long)]
    spacing: Option<String>,
    /// sweep.prominence
    #[arg(long)]
    prominence: Option<f64>,
    /// sweep.threads
    #[arg(long)]
    threads: Option<i64>,
    /// output.csv
    #[arg(long)]
    csv: Option<PathBuf>,
    /// output.json
    #[arg(long)]
    json: Option<PathBuf>,
    /// output.log
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DetectArgs {
    /// Sweep CSV with `delta_over_g` and `ratio_*` columns.
    #[arg(long)]
    input: PathBuf,
    /// Minimum prominence as a fraction of the curve range.
    #[arg(long, default_value_t = 0.1)]
    prominence: f64,
    /// Relative tolerance for minima shared across curves.
    #[arg(long, default_value_t = 0.05)]
    anti_resonance_tolerance: f64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Result<Vec<(String, toml::Value)>> {
        use toml::Value as V;
        let mut o: Vec<(String, V)> = Vec::new();
        let mut put = |k: &str, v: Option<V>| {
            if let Some(v) = v {
                o.push((k.to_string(), v));
            }
        };
        let f = |x: Option<f64>| x.map(V::Float);
        let i = |x: Option<i64>| x.map(V::Integer);
        let s = |x: &Option<String>| x.clone().map(V::String);
        let p = |x: &Option<PathBuf>| x.as_ref().map(|p| V::String(p.to_string_lossy().into_owned()));
        put("lattice.shape", s(&self.lattice));
        put("lattice.sites", self.sites.map(|n| V::Integer(n as i64)));
        put("lattice.edges", self.edges.as_deref().map(parse_edges).transpose()?);
        put("physics.omega", f(self.omega));
        put("physics.g", f(self.g));
        put("physics.delta_over_g", f(self.delta_over_g));
        put("quench.j_final", f(self.j));
        put("quench.t_end", f(self.t_end));
        put("quench.n_time_samples", i(self.samples));
        put("quench.representation", s(&self.representation));
        put("quench.n_max", i(self.n_max));
        put("quench.rwa_threshold", f(self.rwa_threshold));
        put("dissipation.gamma", f(self.gamma));
        put("dissipation.gamma_phi", f(self.gamma_phi));
        put("dissipation.kappa", f(self.kappa));
        put("dissipation.preparation.enabled", self.preparation.map(V::Boolean));
        put("dissipation.preparation.g_a", f(self.g_a));
        put("dissipation.preparation.pulse", s(&self.pulse));
        put("dissipation.preparation.fidelity_floor", f(self.fidelity_floor));
        put("sweep.mode", s(&self.mode));
        put("sweep.min", f(self.min));
        put("sweep.max", f(self.max));
        put("sweep.points", i(self.points));
        put("sweep.spacing", s(&self.spacing));
        put("sweep.prominence", f(self.prominence));
        put("sweep.threads", i(self.threads));
        put("output.csv", p(&self.csv));
        put("output.json", p(&self.json));
        put("output.log", p(&self.log));
        Ok(o)
    }

    fn load(&self, extra: &[(String, toml::Value)]) -> Result<Config> {
        let text = match &self.config {
            Some(path) => Some(std::fs::read_to_string(path).map_err(|e| Error::Config {
                key: "<file>".into(),
                message: format!("cannot read {}: {e}", path.display()),
            })?),
            None => None,
        };
        let mut o = self.overrides()?;
        o.extend_from_slice(extra);
        Config::load(text.as_deref(), &o)
    }
}

fn parse_edges(s: &str) -> Result<toml::Value> {
    let bad = || Error::Config { key: "lattice.edges".into(), message: format!("expected `a-b,c-d`, got `{s}`") };
    let edges = s
        .split(',')
        .map(|e| {
            let (a, b) = e.trim().split_once('-').ok_or_else(bad)?;
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            Ok(toml::Value::Array(vec![toml::Value::Integer(a), toml::Value::Integer(b)]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(toml::Value::Array(edges))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("cannot write {}: {e}", path.display()))))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn versions() -> serde_json::Value {
    json!({ "jchsim": env!("CARGO_PKG_VERSION") })
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => 2,
        Error::Io(_) | Error::Csv(_) => 3,
        _ => 1,
    }
}

/// Parses `args` (program name first) and runs the command, writing results
/// to `out` and diagnostics to `err`. Returns the process exit status.
pub fn run_cli_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// [`run_cli_with`] on the process streams.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(args, &mut stdout.lock(), &mut stderr.lock())
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::DimerAnalytic(c) => dimer_analytic(&c.load(&[])?, out),
        Command::Quench(c) => single_quench(&c.load(&[])?, out),
        Command::Sweep(c) => run_sweep(&c.load(&[])?, out),
        Command::OpenSweep(c) => run_sweep(&c.load(&[("sweep.mode".into(), toml::Value::String("open".into()))])?, out),
        Command::InitProtocol(c) => init_protocol(&c.load(&[("sweep.mode".into(), toml::Value::String("open".into()))])?, out),
        Command::Detect(d) => detect(&d, out),
    }
}

fn dimer_analytic(cfg: &Config, out: &mut dyn Write) -> Result<()> {
    let x = cfg.physics.delta_over_g;
    let p = cfg.params(x)?;
    let j = cfg.quench.j_final;
    let h = dimer_effective(&p, j);
    let var = variance_time_avg(&h, j);
    let e = entropy_time_avg(&h, j);
    writeln!(out, "Var = {var:.6}")?;
    writeln!(out, "E = {e:.6}")?;
    if let Some(path) = &cfg.output.json {
        let doc = json!({
            "delta_over_g": x, "var": var, "entropy": e,
            "parameters": cfg, "versions": versions(),
        });
        write_text(path, &serde_json::to_string_pretty(&doc)?)?;
    }
    Ok(())
}

fn single_quench(cfg: &Config, out: &mut dyn Write) -> Result<()> {
    let x = cfg.physics.delta_over_g;
    let p = cfg.params(x)?;
    let (rec, traj) = run_point(cfg, x)?;
    let l = traj.subspace().num_sites();
    let mut cols: Vec<(String, Vec<f64>)> = Vec::new();
    for i in 0..l {
        let s = site_letter(i);
        cols.push((format!("n_{s}"), polariton_number_series(&traj, i)?.values().to_vec()));
        cols.push((format!("var_{s}"), variance_series(&traj, i)?.values().to_vec()));
        cols.push((format!("entropy_{s}"), linear_entropy_series(&traj, i)?.values().to_vec()));
    }
    for j in 1..l {
        cols.push((format!("c_{}{}", site_letter(0), site_letter(j)), correlation_series(&traj, 0, j)?.values().to_vec()));
    }
    let labels: &[&str] = match l {
        2 => &DIMER_LABELS,
        3 => &TRIMER_LABELS,
        _ => &["psi0"],
    };
    if traj.state(0).is_some() {
        for (name, series) in labeled_populations(&traj, &p, labels)? {
            cols.push((format!("p_{name}"), series.values().to_vec()));
        }
    }
    let write_rows = |w: &mut dyn Write| -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        let mut header = vec!["time".to_string()];
        header.extend(cols.iter().map(|(n, _)| n.clone()));
        csv.write_record(&header)?;
        for (k, t) in traj.times().iter().enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(cols.iter().map(|(_, v)| v[k].to_string()));
            csv.write_record(&row)?;
        }
        csv.flush()?;
        Ok(())
    };
    match &cfg.output.csv {
        Some(path) => write_rows(&mut create(path)?)?,
        None => write_rows(out)?,
    }
    let summary = json!({ "record": rec, "parameters": cfg, "versions": versions() });
    if let Some(path) = &cfg.output.json {
        write_text(path, &serde_json::to_string_pretty(&summary)?)?;
    }
    if let Some(path) = &cfg.output.log {
        let mut log = format!("quench at delta_over_g = {x}\n");
        for w in &rec.warnings {
            let _ = writeln!(log, "warning: {w}");
        }
        write_text(path, &log)?;
    }
    for w in &rec.warnings {
        log::warn!("{w}");
    }
    Ok(())
}

fn run_sweep(cfg: &Config, out: &mut dyn Write) -> Result<()> {
    // Fail on unwritable outputs before any work is done.
    let mut csv_file = cfg.output.csv.as_deref().map(create).transpose()?;
    let json_file = cfg.output.json.as_deref().map(create).transpose()?;
    let log_file = cfg.output.log.as_deref().map(create).transpose()?;

    let started = std::time::Instant::now();
    let result = sweep(cfg)?;
    let opts = DetectionOptions { prominence_fraction: cfg.sweep.prominence, anti_resonance_tolerance: cfg.sweep.anti_resonance_tolerance };
    let report = detect_resonances(&result, &opts);

    match csv_file.as_mut() {
        Some(w) => {
            result.write_csv(&mut *w)?;
            w.flush()?;
        }
        None => result.write_csv(&mut *out)?,
    }
    if let Some(mut w) = json_file {
        let doc = json!({
            "resonances": report.resonances,
            "anti_resonances": report.anti_resonances,
            "warnings": report.warnings,
            "failed_points": result.records.iter().filter(|r| r.failure.is_some()).count(),
            "parameters": cfg,
            "versions": versions(),
        });
        serde_json::to_writer_pretty(&mut w, &doc)?;
        w.flush()?;
    }
    let mut log = String::new();
    let _ = writeln!(log, "jchsim {} {:?} sweep, {} points", env!("CARGO_PKG_VERSION"), result.mode, result.records.len());
    let _ = writeln!(log, "lattice {} ({} sites)", cfg.lattice.shape, result.num_sites);
    for r in &result.records {
        match &r.failure {
            None => {
                let _ = writeln!(log, "delta_over_g {:.6}: ok, {} samples", r.delta_over_g, r.time_samples);
            }
            Some(m) => {
                let _ = writeln!(log, "delta_over_g {:.6}: failed: {m}", r.delta_over_g);
            }
        }
        for w in &r.warnings {
            let _ = writeln!(log, "  warning: {w}");
        }
    }
    for p in &report.resonances {
        let _ = writeln!(log, "resonance {} at {:.4} (grid {:.4}, prominence {:.4})", p.curve, p.position, p.grid_position, p.prominence);
    }
    for a in &report.anti_resonances {
        let _ = writeln!(log, "anti-resonance at {:.4}", a.position);
    }
    for w in &report.warnings {
        let _ = writeln!(log, "warning: {w}");
        log::warn!("{w}");
    }
    let _ = writeln!(log, "elapsed {:.2} s", started.elapsed().as_secs_f64());
    if let Some(mut w) = log_file {
        w.write_all(log.as_bytes())?;
        w.flush()?;
    }
    Ok(())
}

fn init_protocol(cfg: &Config, out: &mut dyn Write) -> Result<()> {
    let p = cfg.params(cfg.physics.delta_over_g)?;
    let report = initialize_with_ancilla(&p, &cfg.preparation_spec())?;
    let doc = json!({ "report": report, "parameters": cfg, "versions": versions() });
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    if let Some(path) = &cfg.output.json {
        write_text(path, &serde_json::to_string_pretty(&doc)?)?;
    }
    for w in &report.warnings {
        log::warn!("{w}");
    }
    Ok(())
}

fn detect(d: &DetectArgs, out: &mut dyn Write) -> Result<()> {
    let file = File::open(&d.input)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("cannot read {}: {e}", d.input.display()))))?;
    let (x, curves) = read_ratio_csv(file)?;
    let opts = DetectionOptions { prominence_fraction: d.prominence, anti_resonance_tolerance: d.anti_resonance_tolerance };
    let report = detect_in_curves(&x, &curves, &opts);
    for w in &report.warnings {
        log::warn!("{w}");
    }
    let text = serde_json::to_string_pretty(&json!({
        "resonances": report.resonances,
        "anti_resonances": report.anti_resonances,
    }))?;
    match &d.json {
        Some(path) => write_text(path, &text),
        None => Ok(writeln!(out, "{text}")?),
    }
}
