//! Closed-form quench dynamics of the lower-branch dimer.
//!
//! From `|1-,1->` the state stays `c0 |1-,1-> + c2 (|2-,0-> + |0-,2->)`; the
//! time averages over `τ = 1/J` of the site variance and the single-site
//! linear entropy have closed forms in `a`, `b`, `c`.

use nalgebra::Matrix3;

use crate::effective::EffectiveDimerHamiltonian;
use crate::operator::C64;

/// `Var(n_i)` in the dispersive limit, `½(1 - ¼ sin 4)`.
pub fn variance_asymptote() -> f64 {
    0.5 * (1.0 - 0.25 * 4f64.sin())
}

/// Linear entropy in the dispersive limit (`a = c`, `|b| = √2 J`).
pub fn entropy_asymptote() -> f64 {
    let h = EffectiveDimerHamiltonian { a: 0.0, b: -2f64.sqrt(), c: 0.0 };
    entropy_time_avg(&h, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimerSpectralData {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub omega0: f64,
    pub omega1: f64,
    pub omega2: f64,
}

impl DimerSpectralData {
    /// `None` when `b = 0`, where `α±` diverge.
    pub fn new(h: &EffectiveDimerHamiltonian) -> Option<Self> {
        let (a, b, c) = (h.a, h.b, h.c);
        let d = a - c;
        let omega0 = (8.0 * b * b + d * d).sqrt();
        let omega1 = (7.0 * b * b + 2.0 * d * d).sqrt();
        let omega2 = (2.0 * b * b + d * d).sqrt();
        if b == 0.0 {
            return None;
        }
        // α₊α₋ = -2; take the root without cancellation and derive the other
        let (alpha_plus, alpha_minus) = if d >= 0.0 {
            let ap = (d + omega0) / (2.0 * b);
            (ap, -2.0 / ap)
        } else {
            let am = (d - omega0) / (2.0 * b);
            (-2.0 / am, am)
        };
        Some(Self {
            lambda_plus: (a + c + omega0) / 2.0,
            lambda_minus: (a + c - omega0) / 2.0,
            alpha_plus,
            alpha_minus,
            omega0,
            omega1,
            omega2,
        })
    }
}

/// `(c0(t), c2(t))`, with `c2` the amplitude of each of `|2-,0->`, `|0-,2->`.
pub fn amplitudes(t: f64, h: &EffectiveDimerHamiltonian) -> (C64, C64) {
    let Some(s) = DimerSpectralData::new(h) else {
        return (C64::from_polar(1.0, -h.a * t), C64::new(0.0, 0.0));
    };
    let ep = C64::from_polar(1.0, -s.lambda_plus * t);
    let em = C64::from_polar(1.0, -s.lambda_minus * t);
    let norm = s.alpha_plus - s.alpha_minus;
    ((ep * s.alpha_plus - em * s.alpha_minus) / norm, (ep - em) / norm)
}

/// `(4b²/Ω₀²) [1 - (J/Ω₀) sin(Ω₀/J)]`, the variance averaged over `τ = 1/J`.
pub fn variance_time_avg(h: &EffectiveDimerHamiltonian, hopping: f64) -> f64 {
    let Some(s) = DimerSpectralData::new(h) else { return 0.0 };
    let x = s.omega0 / hopping;
    4.0 * h.b * h.b / (s.omega0 * s.omega0) * (1.0 - x.sin() / x)
}

/// `(2b²/Ω₀⁵) [2Ω₀Ω₁² - 4JΩ₂² sin(Ω₀/J) - 3b²J sin(2Ω₀/J)]`.
pub fn entropy_time_avg(h: &EffectiveDimerHamiltonian, hopping: f64) -> f64 {
    let Some(s) = DimerSpectralData::new(h) else { return 0.0 };
    let b2 = h.b * h.b;
    let x = s.omega0 / hopping;
    2.0 * b2 / s.omega0.powi(5)
        * (2.0 * s.omega0 * s.omega1.powi(2)
            - 4.0 * hopping * s.omega2.powi(2) * x.sin()
            - 3.0 * b2 * hopping * (2.0 * x).sin())
}

/// Reduced state of one dimer site in the basis `{|0,->, |1,->, |2,->}`.
pub fn reduced_density_matrix(t: f64, h: &EffectiveDimerHamiltonian) -> Matrix3<f64> {
    let (c0, c2) = amplitudes(t, h);
    Matrix3::from_diagonal(&nalgebra::Vector3::new(c2.norm_sqr(), c0.norm_sqr(), c2.norm_sqr()))
}

/// `S(t) = 1 - (|c0|⁴ + 2|c2|⁴)`.
pub fn linear_entropy(t: f64, h: &EffectiveDimerHamiltonian) -> f64 {
    let (c0, c2) = amplitudes(t, h);
    1.0 - (c0.norm_sqr().powi(2) + 2.0 * c2.norm_sqr().powi(2))
}

/// Instantaneous `Var(n_i) = 2|c2|²`.
pub fn variance(t: f64, h: &EffectiveDimerHamiltonian) -> f64 {
    2.0 * amplitudes(t, h).1.norm_sqr()
}
