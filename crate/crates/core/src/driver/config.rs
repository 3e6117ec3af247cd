//! Run configuration: a TOML file with sections `lattice`, `physics`,
//! `quench`, `dissipation`, `sweep` and `output`. Missing keys take the
//! defaults of the selected mode; command-line flags override single keys.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dynamics::{LindbladRates, Representation, DEFAULT_TIME_SAMPLES};
use crate::error::{Error, Result};
use crate::lattice::LatticeGraph;
use crate::polariton::{JcParams, DEFAULT_RWA_THRESHOLD};
use crate::preparation::{PreparationSpec, PulseShape, DEFAULT_FIDELITY_FLOOR};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Closed,
    Open,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseKind {
    Ideal,
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    /// `dimer`, `trimer`, `tetramer`, `chain` or `custom`.
    pub shape: String,
    pub sites: Option<usize>,
    pub edges: Option<Vec<[usize; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    pub omega: f64,
    pub g: f64,
    /// Detuning of single-point commands.
    pub delta_over_g: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuenchSection {
    pub j_final: f64,
    pub t_end: Option<f64>,
    pub n_time_samples: usize,
    /// Lower bound on samples per period of the fastest dimer frequency.
    pub samples_per_period: f64,
    pub representation: Representation,
    pub n_max: usize,
    pub rwa_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreparationSection {
    pub enabled: bool,
    pub g_a: f64,
    pub pulse: PulseKind,
    pub sigma: Option<f64>,
    pub truncation: f64,
    pub omega_a_park: Option<f64>,
    pub swap_duration: Option<f64>,
    pub fidelity_floor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipationSection {
    pub gamma: f64,
    pub gamma_phi: f64,
    pub kappa: f64,
    pub preparation: PreparationSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub mode: Mode,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
    /// Minimum peak prominence as a fraction of the curve range.
    pub prominence: f64,
    /// Relative distance within which minima of different curves count as shared.
    pub anti_resonance_tolerance: f64,
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub log: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub lattice: LatticeSection,
    pub physics: PhysicsSection,
    pub quench: QuenchSection,
    pub dissipation: DissipationSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

impl Config {
    /// Closed: `g = 10⁻²ω`, `J_f = 10⁻⁴ω`, 5 Fock states.
    /// Open: `ω = 5000`, `g = 200`, `J_f = 2`, `κ = 0.225`, `γ = 0.035`,
    /// `γ_φ = 0.045` (MHz), 4 Fock states.
    pub fn defaults(mode: Mode) -> Self {
        let open = mode == Mode::Open;
        Self {
            lattice: LatticeSection { shape: "trimer".into(), sites: None, edges: None },
            physics: PhysicsSection {
                omega: if open { 5000.0 } else { 1.0 },
                g: if open { 200.0 } else { 1e-2 },
                delta_over_g: 2.43,
            },
            quench: QuenchSection {
                j_final: if open { 2.0 } else { 1e-4 },
                t_end: None,
                n_time_samples: DEFAULT_TIME_SAMPLES,
                samples_per_period: 20.0,
                representation: Representation::FullFock,
                n_max: if open { 4 } else { 5 },
                rwa_threshold: DEFAULT_RWA_THRESHOLD,
            },
            dissipation: DissipationSection {
                gamma: if open { 0.035 } else { 0.0 },
                gamma_phi: if open { 0.045 } else { 0.0 },
                kappa: if open { 0.225 } else { 0.0 },
                preparation: PreparationSection {
                    enabled: open,
                    g_a: if open { 50.0 } else { 1e-3 },
                    pulse: PulseKind::Gaussian,
                    sigma: None,
                    truncation: 4.0,
                    omega_a_park: None,
                    swap_duration: None,
                    fidelity_floor: DEFAULT_FIDELITY_FLOOR,
                },
            },
            sweep: SweepSection {
                mode,
                min: if open { 1.0 } else { 0.1 },
                max: if open { 10.0 } else { 100.0 },
                points: 120,
                spacing: Spacing::Log,
                prominence: 0.1,
                anti_resonance_tolerance: 0.05,
                threads: None,
            },
            output: OutputSection::default(),
        }
    }

    /// Parses `text` (if any), applies `overrides` (`section.key`, value) and
    /// fills the rest from the defaults of the resulting mode.
    pub fn load(text: Option<&str>, overrides: &[(String, toml::Value)]) -> Result<Self> {
        let mut user = match text {
            Some(t) => t.parse::<toml::Table>().map_err(|e| Error::Config { key: "<file>".into(), message: e.to_string() })?,
            None => toml::Table::new(),
        };
        for (key, value) in overrides {
            set_key(&mut user, key, value.clone())?;
        }
        let mode = match user.get("sweep").and_then(|s| s.get("mode")) {
            Some(v) => Mode::deserialize(v.clone()).map_err(|e| Error::Config { key: "sweep.mode".into(), message: e.to_string() })?,
            None => Mode::Closed,
        };
        let mut merged = toml::Table::try_from(Self::defaults(mode)).expect("defaults serialize");
        merge(&mut merged, user);
        let cfg: Self = serde_path_to_error::deserialize(toml::Value::Table(merged)).map_err(|e| {
            let mut key = e.path().to_string();
            let message = e.inner().to_string();
            if let Some(rest) = message.strip_prefix("unknown field `") {
                if let Some(field) = rest.split('`').next() {
                    if key == "." {
                        key = field.to_string();
                    } else if !key.ends_with(field) {
                        key = format!("{key}.{field}");
                    }
                }
            }
            Error::Config { key, message }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Copy with one key replaced. `literal` is a TOML value; a bare word is
    /// read as a string.
    pub fn with_value(&self, key: &str, literal: &str) -> Result<Self> {
        let value = match format!("v = {literal}").parse::<toml::Table>() {
            Ok(mut t) => t.remove("v").expect("parsed key"),
            Err(_) => toml::Value::String(literal.to_string()),
        };
        Self::load(Some(&self.to_toml()), &[(key.to_string(), value)])
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| Err(Error::Config { key: key.into(), message });
        let positive = [
            ("physics.omega", self.physics.omega),
            ("physics.g", self.physics.g),
            ("quench.samples_per_period", self.quench.samples_per_period),
            ("quench.rwa_threshold", self.quench.rwa_threshold),
            ("dissipation.preparation.g_a", self.dissipation.preparation.g_a),
            ("dissipation.preparation.truncation", self.dissipation.preparation.truncation),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(key, format!("must be positive, got {v}"));
            }
        }
        for (key, v) in [
            ("quench.j_final", self.quench.j_final),
            ("dissipation.gamma", self.dissipation.gamma),
            ("dissipation.gamma_phi", self.dissipation.gamma_phi),
            ("dissipation.kappa", self.dissipation.kappa),
            ("sweep.prominence", self.sweep.prominence),
            ("sweep.anti_resonance_tolerance", self.sweep.anti_resonance_tolerance),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(key, format!("must be non-negative, got {v}"));
            }
        }
        if !self.physics.delta_over_g.is_finite() {
            return bad("physics.delta_over_g", "must be finite".into());
        }
        if let Some(t) = self.quench.t_end {
            if !(t > 0.0 && t.is_finite()) {
                return bad("quench.t_end", format!("must be positive, got {t}"));
            }
        }
        if self.quench.t_end.is_none() && self.quench.j_final == 0.0 {
            return bad("quench.t_end", "required when quench.j_final is 0".into());
        }
        if self.quench.n_time_samples < 2 {
            return bad("quench.n_time_samples", "needs at least 2 samples".into());
        }
        if self.quench.n_max < 2 {
            return bad("quench.n_max", "needs at least 2 Fock states".into());
        }
        if self.sweep.points < 2 {
            return bad("sweep.points", "needs at least 2 points".into());
        }
        if !(self.sweep.min < self.sweep.max) || !self.sweep.min.is_finite() || !self.sweep.max.is_finite() {
            return bad("sweep.min", format!("need min < max, got [{}, {}]", self.sweep.min, self.sweep.max));
        }
        if self.sweep.spacing == Spacing::Log && self.sweep.min <= 0.0 {
            return bad("sweep.min", "log spacing needs a positive lower bound".into());
        }
        if self.sweep.threads == Some(0) {
            return bad("sweep.threads", "must be at least 1".into());
        }
        self.lattice_graph()?;
        Ok(())
    }

    pub fn lattice_graph(&self) -> Result<LatticeGraph> {
        let l = &self.lattice;
        let err = |message: String| Error::Config { key: "lattice.shape".into(), message };
        match l.shape.as_str() {
            "dimer" => LatticeGraph::chain(2),
            "trimer" => LatticeGraph::chain(3),
            "tetramer" => LatticeGraph::chain(4),
            "chain" => LatticeGraph::chain(l.sites.ok_or_else(|| err("chain needs lattice.sites".into()))?),
            "custom" => {
                let n = l.sites.ok_or_else(|| err("custom lattice needs lattice.sites".into()))?;
                let edges: Vec<(usize, usize)> =
                    l.edges.as_ref().ok_or_else(|| err("custom lattice needs lattice.edges".into()))?.iter().map(|e| (e[0], e[1])).collect();
                LatticeGraph::new(n, &edges)
            }
            other => Err(err(format!("unknown shape `{other}`"))),
        }
        .map_err(|e| match e {
            Error::Config { .. } => e,
            other => Error::Config { key: "lattice".into(), message: other.to_string() },
        })
    }

    pub fn params(&self, delta_over_g: f64) -> Result<JcParams> {
        JcParams::from_ratio(self.physics.omega, delta_over_g, self.physics.g)
    }

    pub fn rates(&self) -> LindbladRates {
        LindbladRates { gamma: self.dissipation.gamma, gamma_phi: self.dissipation.gamma_phi, kappa: self.dissipation.kappa }
    }

    pub fn preparation_spec(&self) -> PreparationSpec {
        let p = &self.dissipation.preparation;
        PreparationSpec {
            g_a: p.g_a,
            omega_a_park: p.omega_a_park,
            pulse: match p.pulse {
                PulseKind::Ideal => PulseShape::Ideal,
                PulseKind::Gaussian => PulseShape::Gaussian { sigma: p.sigma, truncation: p.truncation },
            },
            swap_duration: p.swap_duration,
            rates: self.rates(),
            n_max: self.quench.n_max,
            fidelity_floor: p.fidelity_floor,
        }
    }

    /// Detuning grid `Δ/g`, strictly increasing.
    pub fn grid(&self) -> Vec<f64> {
        let s = &self.sweep;
        let n = s.points;
        (0..n)
            .map(|k| {
                let f = k as f64 / (n - 1) as f64;
                match s.spacing {
                    Spacing::Log => 10f64.powf(s.min.log10() + f * (s.max.log10() - s.min.log10())),
                    Spacing::Linear => s.min + f * (s.max - s.min),
                }
            })
            .collect()
    }
}

fn set_key(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config { key: key.into(), message: format!("`{part}` is not a table") })?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_by_mode() {
        let c = Config::load(None, &[]).unwrap();
        assert_eq!(c, Config::defaults(Mode::Closed));
        let o = Config::load(Some("[sweep]\nmode = \"open\"\n"), &[]).unwrap();
        assert_eq!(o.physics.g, 200.0);
        assert_eq!(o.quench.n_max, 4);
        assert!(o.dissipation.preparation.enabled);
    }

    #[test]
    fn file_and_overrides() {
        let text = "[physics]\ng = 0.02\n[lattice]\nshape = \"dimer\"\n";
        let c = Config::load(Some(text), &[("quench.j_final".into(), toml::Value::Float(2e-4))]).unwrap();
        assert_eq!(c.physics.g, 0.02);
        assert_eq!(c.quench.j_final, 2e-4);
        assert_eq!(c.lattice_graph().unwrap().num_sites(), 2);
        assert_eq!(c.physics.omega, 1.0);
    }

    #[test]
    fn schema_errors_name_the_key() {
        match Config::load(Some("[quench]\nj_finall = 1.0\n"), &[]) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "quench.j_finall"),
            other => panic!("{other:?}"),
        }
        match Config::load(Some("[physics]\ng = \"big\"\n"), &[]) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "physics.g"),
            other => panic!("{other:?}"),
        }
        match Config::load(Some("[sweep]\npoints = 1\n"), &[]) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "sweep.points"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(Config::load(Some("[lattice]\nshape = \"ring\"\n"), &[]), Err(Error::Config { .. })));
        assert!(matches!(Config::load(Some("not toml ["), &[]), Err(Error::Config { .. })));
    }

    #[test]
    fn grids() {
        let mut c = Config::defaults(Mode::Closed);
        c.sweep.min = 1.0;
        c.sweep.max = 100.0;
        c.sweep.points = 3;
        let g = c.grid();
        assert!((g[1] - 10.0).abs() < 1e-12 && (g[2] - 100.0).abs() < 1e-12);
        c.sweep.spacing = Spacing::Linear;
        assert_eq!(c.grid(), vec![1.0, 50.5, 100.0]);
    }

    #[test]
    fn single_key_updates() {
        let c = Config::defaults(Mode::Closed);
        let d = c.with_value("lattice.shape", "dimer").unwrap().with_value("physics.g", "0.02").unwrap();
        assert_eq!(d.lattice.shape, "dimer");
        assert_eq!(d.physics.g, 0.02);
        assert_eq!(Config::load(Some(&d.to_toml()), &[]).unwrap(), d);
        let o = c.with_value("sweep.mode", "\"open\"").unwrap();
        assert_eq!(o.sweep.mode, Mode::Open);
        assert!(matches!(c.with_value("physics.gg", "1.0"), Err(Error::Config { .. })));
    }

    #[test]
    fn custom_lattice() {
        let text = "[lattice]\nshape = \"custom\"\nsites = 3\nedges = [[0, 1], [1, 2], [0, 2]]\n";
        let c = Config::load(Some(text), &[]).unwrap();
        assert_eq!(c.lattice_graph().unwrap().connectivities(), vec![2, 2, 2]);
    }
}
