//! Adaptive Dormand–Prince 5(4) integrator for complex matrix ODEs.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest step, relative to the span of the time grid.
    pub min_step_fraction: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, min_step_fraction: 1e-14, max_steps: 50_000_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine(out: &mut DMatrix<C64>, y: &DMatrix<C64>, h: f64, terms: &[(f64, &DMatrix<C64>)]) {
    let o = out.as_mut_slice();
    o.copy_from_slice(y.as_slice());
    for &(c, k) in terms {
        if c == 0.0 {
            continue;
        }
        let s = h * c;
        for (x, kv) in o.iter_mut().zip(k.as_slice()) {
            *x += kv * s;
        }
    }
}

fn rms(m: &DMatrix<C64>) -> f64 {
    let s = m.as_slice();
    (s.iter().map(|z| z.norm_sqr()).sum::<f64>() / s.len().max(1) as f64).sqrt()
}

/// Integrates `dy/dt = f(t, y)` across `t_grid`, calling `observe(k, t_k, y)`
/// at every grid point, including the first. Steps are shortened to land on
/// each grid point exactly.
pub fn integrate<F, O>(mut f: F, y0: DMatrix<C64>, t_grid: &[f64], opts: &OdeOptions, mut observe: O) -> Result<DMatrix<C64>>
where
    F: FnMut(f64, &DMatrix<C64>, &mut DMatrix<C64>),
    O: FnMut(usize, f64, &DMatrix<C64>) -> Result<()>,
{
    check_grid(t_grid)?;
    let (r, c) = y0.shape();
    let mut y = y0;
    observe(0, t_grid[0], &y)?;
    if t_grid.len() == 1 {
        return Ok(y);
    }
    let span = t_grid[t_grid.len() - 1] - t_grid[0];
    let h_min = span * opts.min_step_fraction;
    let z = || DMatrix::<C64>::zeros(r, c);
    let (mut k1, mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (z(), z(), z(), z(), z(), z(), z());
    let (mut tmp, mut y_new) = (z(), z());

    let mut t = t_grid[0];
    f(t, &y, &mut k1);
    let d0 = rms(&y);
    let d1 = rms(&k1);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    h = h.min(span).max(h_min);
    let mut steps = 0usize;

    for (k, &target) in t_grid.iter().enumerate().skip(1) {
        while t < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepSizeFailure { last_good_time: t });
            }
            let remaining = target - t;
            let clamped = h >= remaining;
            let step = if clamped { remaining } else { h };

            combine(&mut tmp, &y, step, &[(A21, &k1)]);
            f(t + C2 * step, &tmp, &mut k2);
            combine(&mut tmp, &y, step, &[(A31, &k1), (A32, &k2)]);
            f(t + C3 * step, &tmp, &mut k3);
            combine(&mut tmp, &y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
            f(t + C4 * step, &tmp, &mut k4);
            combine(&mut tmp, &y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
            f(t + C5 * step, &tmp, &mut k5);
            combine(&mut tmp, &y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
            f(t + step, &tmp, &mut k6);
            combine(&mut y_new, &y, step, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            f(t + step, &y_new, &mut k7);

            let mut err_sq = 0.0;
            let n = y.len();
            for i in 0..n {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * step;
                let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                err_sq += (e.norm() / sc).powi(2);
            }
            let err = (err_sq / n as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::StepSizeFailure { last_good_time: t });
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                t = if clamped { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                // a clamped step says nothing about the natural step size
                if !clamped || factor < 1.0 {
                    h = step * factor;
                }
            } else {
                h = step * factor.min(1.0);
                if h < h_min {
                    return Err(Error::StepSizeFailure { last_good_time: t });
                }
            }
        }
        observe(k, t, &y)?;
    }
    Ok(y)
}

pub(crate) fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() || t_grid[0] != 0.0 || t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidTimeGrid);
    }
    Ok(())
}
