//! Peaks and shared dips of the ratio curves `|C| / Var_dimer`.

use serde::Serialize;

use super::sweep::SweepResult;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DetectionOptions {
    /// Minimum prominence as a fraction of the curve range.
    pub prominence_fraction: f64,
    /// Minima of different curves closer than this fraction of `Δ/g` are shared.
    pub anti_resonance_tolerance: f64,
}

impl Default for DetectionOptions {
    fn default() -> Self {
        Self { prominence_fraction: 0.1, anti_resonance_tolerance: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Peak {
    pub curve: String,
    /// Vertex of the parabola through the extremum and its neighbours.
    pub position: f64,
    pub grid_position: f64,
    pub value: f64,
    pub prominence: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AntiResonance {
    pub position: f64,
    pub members: Vec<Peak>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ResonanceReport {
    pub resonances: Vec<Peak>,
    pub anti_resonances: Vec<AntiResonance>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ResonanceReport {
    /// Most prominent resonance of `curve` with position inside `[lo, hi]`.
    pub fn strongest(&self, curve: &str, lo: f64, hi: f64) -> Option<&Peak> {
        self.resonances
            .iter()
            .filter(|p| p.curve == curve && p.position >= lo && p.position <= hi)
            .max_by(|a, b| a.prominence.total_cmp(&b.prominence))
    }

    /// Most prominent shared dip inside `[lo, hi]`.
    pub fn strongest_anti_resonance(&self, lo: f64, hi: f64) -> Option<&AntiResonance> {
        let weight = |a: &AntiResonance| a.members.iter().map(|m| m.prominence).fold(f64::INFINITY, f64::min);
        self.anti_resonances
            .iter()
            .filter(|a| a.position >= lo && a.position <= hi)
            .max_by(|a, b| weight(a).total_cmp(&weight(b)))
    }
}

pub fn detect_resonances(r: &SweepResult, opts: &DetectionOptions) -> ResonanceReport {
    detect_in_curves(&r.grid(), &r.ratio_curves(), opts)
}

/// Intermediate-detuning points needed for a trustworthy report.
pub const MIN_WINDOW_POINTS: usize = 20;

pub fn detect_in_curves(x: &[f64], curves: &[(String, Vec<f64>)], opts: &DetectionOptions) -> ResonanceReport {
    let mut report = ResonanceReport::default();
    let in_window = x.iter().filter(|&&v| v > 1.0 && v < 10.0).count();
    if in_window < MIN_WINDOW_POINTS {
        report.warnings.push(format!(
            "only {in_window} grid points in 1 < Δ/g < 10; at least {MIN_WINDOW_POINTS} are needed"
        ));
    }
    let mut minima: Vec<Vec<Peak>> = Vec::new();
    for (name, y) in curves {
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            x.iter().zip(y).filter(|(a, b)| a.is_finite() && b.is_finite()).map(|(a, b)| (*a, *b)).unzip();
        report.resonances.extend(extrema(name, &xs, &ys, opts.prominence_fraction, false));
        minima.push(extrema(name, &xs, &ys, opts.prominence_fraction, true));
    }
    if let Some((first, rest)) = minima.split_first() {
        for m in first {
            let mut members = vec![m.clone()];
            for other in rest {
                let close = other
                    .iter()
                    .filter(|o| (o.position - m.position).abs() <= opts.anti_resonance_tolerance * m.position.abs())
                    .min_by(|a, b| (a.position - m.position).abs().total_cmp(&(b.position - m.position).abs()));
                match close {
                    Some(o) => members.push(o.clone()),
                    None => break,
                }
            }
            if members.len() == curves.len() {
                let position = members.iter().map(|p| p.position).sum::<f64>() / members.len() as f64;
                report.anti_resonances.push(AntiResonance { position, members });
            }
        }
    }
    report
}

/// Interior local maxima (or minima) with enough prominence.
fn extrema(name: &str, x: &[f64], y: &[f64], fraction: f64, minima: bool) -> Vec<Peak> {
    let n = y.len();
    if n < 3 {
        return Vec::new();
    }
    let s = if minima { -1.0 } else { 1.0 };
    let v: Vec<f64> = y.iter().map(|a| s * a).collect();
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &a| (l.min(a), h.max(a)));
    let range = hi - lo;
    if !(range > 1e-12 * hi.abs().max(lo.abs())) {
        return Vec::new();
    }
    let mut out = Vec::new();
    for k in 1..n - 1 {
        if !(v[k] > v[k - 1] && v[k] >= v[k + 1]) {
            continue;
        }
        let mut left = v[k];
        for i in (0..k).rev() {
            if v[i] > v[k] {
                break;
            }
            left = left.min(v[i]);
        }
        let mut right = v[k];
        for &vi in &v[k + 1..] {
            if vi > v[k] {
                break;
            }
            right = right.min(vi);
        }
        let prominence = v[k] - left.max(right);
        if prominence < fraction * range {
            continue;
        }
        let (position, value) = refine(&x[k - 1..=k + 1], &v[k - 1..=k + 1]);
        out.push(Peak { curve: name.to_string(), position, grid_position: x[k], value: s * value, prominence });
    }
    out
}

/// Vertex of the parabola through three points, fitted in `ln x` when all
/// abscissae are positive.
fn refine(x: &[f64], y: &[f64]) -> (f64, f64) {
    let log = x.iter().all(|&a| a > 0.0);
    let u: Vec<f64> = x.iter().map(|&a| if log { a.ln() } else { a }).collect();
    let (u0, u1, u2) = (u[0], u[1], u[2]);
    let (y0, y1, y2) = (y[0], y[1], y[2]);
    let denom = (u0 - u1) * (u0 - u2) * (u1 - u2);
    let a = (u2 * (y1 - y0) + u1 * (y0 - y2) + u0 * (y2 - y1)) / denom;
    let b = (u2 * u2 * (y0 - y1) + u1 * u1 * (y2 - y0) + u0 * u0 * (y1 - y2)) / denom;
    let c = (u1 * u2 * (u1 - u2) * y0 + u2 * u0 * (u2 - u0) * y1 + u0 * u1 * (u0 - u1) * y2) / denom;
    if !(a < 0.0) || !denom.is_finite() {
        return (x[1], y[1]);
    }
    let uv = (-b / (2.0 * a)).clamp(u0, u2);
    let value = a * uv * uv + b * uv + c;
    (if log { uv.exp() } else { uv }, value)
}
