//! Single-site Jaynes-Cummings eigenstructure.
//!
//! Dressed states are `|n,±> = γ_{n±}|↓,n> + ρ_{n±}|↑,n-1>` with energies
//! `E_n^± = nω + Δ/2 ± χ(n)`. The vacuum is `|0,-> = |↓,0>`; the upper
//! vacuum `|0,+>` is unphysical and is represented by zero coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical knobs of a Jaynes-Cummings site (ħ = 1). The TLS frequency is
/// derived from `omega + delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JcParams {
    omega: f64,
    delta: f64,
    g: f64,
}

impl JcParams {
    pub fn new(omega: f64, delta: f64, g: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::InvalidParameter(format!("g must be positive, got {g}")));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParameter("delta must be finite".into()));
        }
        Ok(Self { omega, delta, g })
    }

    /// Parameters specified through the ratio `Δ/g`.
    pub fn from_ratio(omega: f64, delta_over_g: f64, g: f64) -> Result<Self> {
        Self::new(omega, delta_over_g * g, g)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn omega0(&self) -> f64 {
        self.omega + self.delta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn delta_over_g(&self) -> f64 {
        self.delta / self.g
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Upper,
    Lower,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Upper => 1.0,
            Branch::Lower => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Branch::Upper => '+',
            Branch::Lower => '-',
        }
    }
}

/// Dressed-state coefficients for excitation number `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolaritonCoeffs {
    pub n: u32,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub rho_plus: f64,
    pub rho_minus: f64,
}

impl PolaritonCoeffs {
    /// `(γ, ρ)` of the requested branch.
    pub fn branch(&self, branch: Branch) -> (f64, f64) {
        match branch {
            Branch::Upper => (self.gamma_plus, self.rho_plus),
            Branch::Lower => (self.gamma_minus, self.rho_minus),
        }
    }
}

/// `χ(n) = sqrt(Δ²/4 + g² n)`.
pub fn chi(n: u32, p: &JcParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("chi(n) requires n >= 1".into()));
    }
    Ok((p.delta * p.delta / 4.0 + p.g * p.g * n as f64).sqrt())
}

pub fn polariton_energy(n: u32, branch: Branch, p: &JcParams) -> Result<f64> {
    if n == 0 {
        return match branch {
            Branch::Lower => Ok(0.0),
            Branch::Upper => Err(Error::UnphysicalState),
        };
    }
    Ok(n as f64 * p.omega + p.delta / 2.0 + branch.sign() * chi(n, p)?)
}

/// Lower-branch energy, with `E_0^- = 0`.
pub fn lower_energy(n: u32, p: &JcParams) -> f64 {
    polariton_energy(n, Branch::Lower, p).expect("lower branch is defined for every n")
}

/// `θ_n = atan2(2g√n, Δ)`, in `(0, π)`.
pub fn mixing_angle(n: u32, p: &JcParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("mixing angle requires n >= 1".into()));
    }
    Ok((2.0 * p.g * (n as f64).sqrt()).atan2(p.delta))
}

pub fn coefficients(n: u32, p: &JcParams) -> PolaritonCoeffs {
    if n == 0 {
        return PolaritonCoeffs { n, gamma_plus: 0.0, gamma_minus: 1.0, rho_plus: 0.0, rho_minus: 0.0 };
    }
    let half = mixing_angle(n, p).expect("n >= 1") / 2.0;
    let (s, c) = half.sin_cos();
    PolaritonCoeffs { n, gamma_plus: s, gamma_minus: c, rho_plus: c, rho_minus: -s }
}

/// `t_n^{αα'} = <n-1,α| a |n,α'>`.
pub fn hopping_element(n: u32, alpha: Branch, alpha_prime: Branch, p: &JcParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("hopping element requires n >= 1".into()));
    }
    let (g_prev, r_prev) = coefficients(n - 1, p).branch(alpha);
    let (g_cur, r_cur) = coefficients(n, p).branch(alpha_prime);
    let nf = n as f64;
    Ok(nf.sqrt() * g_prev * g_cur + (nf - 1.0).sqrt() * r_prev * r_cur)
}

/// Lower-branch hopping element `t_n^{--}`.
pub fn lower_hopping(n: u32, p: &JcParams) -> f64 {
    hopping_element(n, Branch::Lower, Branch::Lower, p).expect("n >= 1")
}

/// Product `t_1^{--} t_2^{--}` written out in mixing angles.
pub fn dimer_hopping_product(p: &JcParams) -> f64 {
    let h1 = mixing_angle(1, p).expect("n = 1") / 2.0;
    let h2 = mixing_angle(2, p).expect("n = 2") / 2.0;
    h1.cos() * (2f64.sqrt() * h1.cos() * h2.cos() + h1.sin() * h2.sin())
}

/// One gap condition of the lower-branch restriction, as a multiple of `J`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapEntry {
    pub label: String,
    pub gap: f64,
    pub ratio: f64,
    pub flagged: bool,
}

/// Validity of the rotating-wave / lower-branch treatment at one operating point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RwaReport {
    pub threshold: f64,
    /// Gaps that suppress interchange of polariton species.
    pub interchange_gaps: Vec<GapEntry>,
    /// `|E_2^- - 2E_1^-| / J`; small values mark the lower-branch resonance.
    pub lower_resonance: GapEntry,
    /// `g√n / (J n)` for `n = 1..=n_max`.
    pub hopping_ratios: Vec<f64>,
    /// `ω n / (g√n)` for `n = 1..=n_max`.
    pub frequency_ratios: Vec<f64>,
}

impl RwaReport {
    /// True when every interchange gap and regime ratio clears the threshold.
    pub fn passes(&self) -> bool {
        self.interchange_gaps.iter().all(|e| !e.flagged)
            && self.hopping_ratios.iter().all(|&r| r >= self.threshold)
            && self.frequency_ratios.iter().all(|&r| r >= self.threshold)
    }

    pub fn near_lower_resonance(&self) -> bool {
        self.lower_resonance.flagged
    }

    pub fn flagged_labels(&self) -> Vec<String> {
        let mut out: Vec<String> =
            self.interchange_gaps.iter().filter(|e| e.flagged).map(|e| e.label.clone()).collect();
        for (k, &r) in self.hopping_ratios.iter().enumerate() {
            if r < self.threshold {
                out.push(format!("g*sqrt({n})/(J*{n})", n = k + 1));
            }
        }
        for (k, &r) in self.frequency_ratios.iter().enumerate() {
            if r < self.threshold {
                out.push(format!("omega*{n}/(g*sqrt({n}))", n = k + 1));
            }
        }
        out
    }
}

pub const DEFAULT_RWA_THRESHOLD: f64 = 10.0;

pub fn rwa_report(p: &JcParams, hopping: f64, n_max: u32, threshold: f64) -> Result<RwaReport> {
    if n_max < 2 {
        return Err(Error::InvalidParameter("rwa_report needs n_max >= 2".into()));
    }
    let e = |n: u32, b: Branch| polariton_energy(n, b, p).expect("n >= 1");
    use Branch::{Lower as L, Upper as U};
    let raw = [
        ("|E2+ - 2E1-|", e(2, U) - 2.0 * e(1, L)),
        ("|2E1+ - E2-|", 2.0 * e(1, U) - e(2, L)),
        ("|E1+ + E1- - E2-|", e(1, U) + e(1, L) - e(2, L)),
        ("|E1+ - E1-|", e(1, U) - e(1, L)),
        ("|E3+ - E2- - E1-|", e(3, U) - e(2, L) - e(1, L)),
        ("|E2+ - E2-|", e(2, U) - e(2, L)),
        ("|E2+ + E1+ - E2- - E1-|", e(2, U) + e(1, U) - e(2, L) - e(1, L)),
    ];
    let entry = |label: &str, gap: f64| {
        let gap = gap.abs();
        let ratio = if hopping > 0.0 { gap / hopping } else { f64::INFINITY };
        GapEntry { label: label.to_string(), gap, ratio, flagged: ratio < threshold }
    };
    let interchange_gaps = raw.iter().map(|(l, g)| entry(l, *g)).collect();
    let lower_resonance = entry("|E2- - 2E1-|", e(2, L) - 2.0 * e(1, L));
    let hopping_ratios = (1..=n_max)
        .map(|n| {
            let nf = n as f64;
            if hopping > 0.0 { p.g * nf.sqrt() / (hopping * nf) } else { f64::INFINITY }
        })
        .collect();
    let frequency_ratios = (1..=n_max)
        .map(|n| {
            let nf = n as f64;
            p.omega * nf / (p.g * nf.sqrt())
        })
        .collect();
    Ok(RwaReport { threshold, interchange_gaps, lower_resonance, hopping_ratios, frequency_ratios })
}
