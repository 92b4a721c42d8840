//! Scalar special functions of the model: cut integrals, field kernels,
//! dispersion phases and the self-energy on the three Riemann sheets.

use crate::error::{BicError, Result};
use crate::params::{EmitterArrayParams, Sheet, Tolerances};
use crate::quad::{integrate, QuadOptions};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const TAIL: f64 = 1e-17;

pub(crate) fn quad_options(tol: &Tolerances) -> QuadOptions {
    QuadOptions {
        abs_tol: tol.quad_abs,
        rel_tol: tol.quad_rel,
        max_subdivisions: tol.max_subdivisions,
        initial_panels: 8,
    }
}

/// √(z−1)·√(z+1) with principal roots: cut on [−1, 1], positive for real z > 1.
pub fn sqrt_z2m1(z: C64) -> C64 {
    (z - 1.0).sqrt() * (z + 1.0).sqrt()
}

/// Root of k² = z² − 1 with non-negative imaginary part (physical sheet).
/// On the real axis above threshold this is the +i0 limit.
pub fn physical_root(z: C64) -> C64 {
    let s = sqrt_z2m1(z);
    if z.im >= 0.0 {
        s
    } else {
        -s
    }
}

/// Interemitter phase θ(z) = d√(z²−1).
pub fn theta(z: C64, d: f64) -> C64 {
    d * sqrt_z2m1(z)
}

pub fn theta_real(e: f64, d: f64) -> f64 {
    d * (e * e - 1.0).max(0.0).sqrt()
}

/// Closed form of the zeroth cut integral, −log(E − √(E²−1))/π.
pub fn b0_closed(e: f64) -> Result<f64> {
    if !(e >= 1.0) {
        return Err(BicError::Domain(format!("E = {e} lies below the continuum threshold")));
    }
    Ok(e.acosh() / PI)
}

fn check_path(z: C64) -> Result<()> {
    let z2 = z * z;
    if !(z.re > 0.0) || (z2.im == 0.0 && z2.re <= 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(BicError::Continuation { re: z.re, im: z.im });
    }
    Ok(())
}

fn tail_length(z: C64, kd_min: f64) -> f64 {
    let zz = (z * z - 1.0).norm();
    let mut t: f64 = 0.5;
    loop {
        let c = t.cosh();
        if c * c >= 2.0 * zz + 2.0 {
            let env = (-kd_min * (c - 1.0)).exp() * 2.0 * z.norm() / (c * c);
            if env <= TAIL {
                return t;
            }
        }
        t += 0.25;
        if t > 200.0 {
            return t;
        }
    }
}

/// J_k(z) = (1/π)∫₀^∞ e^{−kd cosh t} z/(z²−1+cosh²t) dt for k in `ks`,
/// optionally together with dJ_k/dz.
fn cut_raw(z: C64, d: f64, ks: &[usize], deriv: bool, tol: &Tolerances) -> Result<(Vec<C64>, Vec<C64>)> {
    check_path(z)?;
    if ks.is_empty() {
        return Ok((vec![], vec![]));
    }
    let kmin = *ks.iter().min().unwrap();
    let t_max = tail_length(z, kmin as f64 * d);
    let m = ks.len();
    let blocks = if deriv { 2 } else { 1 };
    let dim = 2 * m * blocks;
    let z2m1 = z * z - 1.0;
    let opts = quad_options(tol);
    let vals = integrate(
        |t, out: &mut [f64]| {
            let c = t.cosh();
            let den = z2m1 + c * c;
            let f = z / den / PI;
            let ed = (-d * (c - 1.0)).exp();
            let fd = if deriv { (c * c - 1.0 - z * z) / (den * den) / PI } else { C64::new(0.0, 0.0) };
            for (i, &k) in ks.iter().enumerate() {
                let w = ed.powi(k as i32);
                let v = f * w;
                out[2 * i] = v.re;
                out[2 * i + 1] = v.im;
                if deriv {
                    let v = fd * w;
                    out[2 * m + 2 * i] = v.re;
                    out[2 * m + 2 * i + 1] = v.im;
                }
            }
        },
        0.0,
        t_max,
        dim,
        &opts,
    )?;
    let mut j = Vec::with_capacity(m);
    let mut dj = Vec::new();
    for (i, &k) in ks.iter().enumerate() {
        let scale = (-(k as f64) * d).exp();
        j.push(C64::new(vals[2 * i], vals[2 * i + 1]) * scale);
        if deriv {
            dj.push(C64::new(vals[2 * m + 2 * i], vals[2 * m + 2 * i + 1]) * scale);
        }
    }
    Ok((j, dj))
}

/// Cut integral b_j(z) = √(z²−1)·J_j(z), by quadrature along λ = cosh t.
pub fn cut_term(j: usize, z: C64, d: f64, tol: &Tolerances) -> Result<C64> {
    let (v, _) = cut_raw(z, d, &[j], false, tol)?;
    Ok(sqrt_z2m1(z) * v[0])
}

/// Cut integrals b_0..b_{n−1} at a real energy above threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutVector {
    pub energy: f64,
    /// `values[j]` is b_j(E); index 0 holds the closed form.
    pub values: Vec<f64>,
}

pub fn cut_vector(e: f64, d: f64, n: usize, tol: &Tolerances) -> Result<CutVector> {
    let b0 = b0_closed(e)?;
    if e <= 1.0 {
        return Err(BicError::Domain(format!("E = {e} must exceed 1")));
    }
    let ks: Vec<usize> = (1..n).collect();
    let (j, _) = cut_raw(C64::new(e, 0.0), d, &ks, false, tol)?;
    let s = (e * e - 1.0).sqrt();
    let mut values = vec![b0];
    values.extend(j.iter().map(|v| s * v.re));
    Ok(CutVector { energy: e, values })
}

/// J_k(E) and dJ_k/dE for k = 0..n−1 at real E.
pub fn cut_primitive_with_derivative(e: f64, d: f64, n: usize, tol: &Tolerances) -> Result<(Vec<f64>, Vec<f64>)> {
    let ks: Vec<usize> = (0..n).collect();
    let (j, dj) = cut_raw(C64::new(e, 0.0), d, &ks, true, tol)?;
    Ok((j.iter().map(|v| v.re).collect(), dj.iter().map(|v| v.re).collect()))
}

/// Cut part of the single-emitter field kernel.
pub fn eta(x: f64, e: f64, tol: &Tolerances) -> Result<f64> {
    if !(e > 1.0) {
        return Err(BicError::Domain(format!("E = {e} must exceed 1")));
    }
    let ax = x.abs();
    let f = |t: f64| -> f64 {
        let sh = t.sinh();
        let c = t.cosh();
        (-ax * (c - 1.0)).exp() * sh.sqrt() * (sh - e) / (e * e - 1.0 + c * c)
    };
    let mut t_max: f64 = 1.0;
    let t_min = e.asinh() + 2.0;
    while t_max < t_min || 2.0 * f(t_max).abs() > TAIL {
        t_max += 0.5;
        if t_max > 400.0 {
            break;
        }
    }
    let opts = quad_options(tol);
    // t = v² removes the √t behaviour at the origin
    let v = integrate(
        |v, out: &mut [f64]| out[0] = 2.0 * v * f(v * v),
        0.0,
        t_max.sqrt(),
        1,
        &opts,
    )?[0];
    let s2 = e * e - 1.0;
    Ok((s2 / (2.0 * e)).sqrt() / PI * (-ax).exp() * v)
}

/// Single-emitter field kernel √(γE/(E²−1))·(sin(|x|√(E²−1)) − η(x)).
pub fn xi1(x: f64, e: f64, gamma: f64, tol: &Tolerances) -> Result<f64> {
    if !(e > 1.0) {
        return Err(BicError::Domain(format!("E = {e} must exceed 1")));
    }
    let s = (e * e - 1.0).sqrt();
    Ok((gamma * e).sqrt() / s * ((x.abs() * s).sin() - eta(x, e, tol)?))
}

/// Kernel with the cut part dropped (large-spacing approximation).
pub fn xi1_markov(x: f64, e: f64, gamma: f64) -> Result<f64> {
    if !(e > 1.0) {
        return Err(BicError::Domain(format!("E = {e} must exceed 1")));
    }
    let s = (e * e - 1.0).sqrt();
    Ok((gamma * e).sqrt() / s * (x.abs() * s).sin())
}

/// χ(E) = (ε−E)√(E²−1)/γ + b₀(E).
pub fn chi(e: f64, params: &EmitterArrayParams) -> Result<f64> {
    let s = (e * e - 1.0).sqrt();
    Ok((params.epsilon - e) * s / params.gamma + b0_closed(e)?)
}

/// Inverse of [`chi`] at fixed (E, γ).
pub fn chi_to_epsilon(chi: f64, e: f64, params: &EmitterArrayParams) -> Result<f64> {
    epsilon_from_chi(chi, e, params.gamma)
}

pub fn epsilon_from_chi(chi: f64, e: f64, gamma: f64) -> Result<f64> {
    if !(e > 1.0) {
        return Err(BicError::Domain(format!("E = {e} must exceed 1")));
    }
    let s = (e * e - 1.0).sqrt();
    Ok(e + gamma * (chi - b0_closed(e)?) / s)
}

/// Toeplitz-symmetric self-energy, stored by its first row.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfEnergyMatrix {
    pub z: C64,
    pub sheet: Sheet,
    pub row: Vec<C64>,
}

impl SelfEnergyMatrix {
    pub fn entry(&self, j: usize, l: usize) -> C64 {
        self.row[j.abs_diff(l)]
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        let n = self.row.len();
        DMatrix::from_fn(n, n, |j, l| self.entry(j, l))
    }
}

fn row_with_root(q: C64, j: &[C64], d: f64, gamma: f64) -> Vec<C64> {
    j.iter()
        .enumerate()
        .map(|(k, jk)| I * gamma * (I * (k as f64) * d * q).exp() / q - gamma * jk)
        .collect()
}

/// Σ(z) on the requested sheet.
///
/// Sheets II and III are Σ ± 2iγ cos(kθ)/√(z²−1); sheet II is the continuation
/// through the cut from above and sheet III from below. On the real axis each
/// of them takes the limit from its own half-plane.
pub fn self_energy(z: C64, params: &EmitterArrayParams, sheet: Sheet, tol: &Tolerances) -> Result<SelfEnergyMatrix> {
    let n = params.n;
    let ks: Vec<usize> = (0..n).collect();
    let (j, _) = cut_raw(z, params.d, &ks, false, tol)?;
    let s = sqrt_z2m1(z);
    if s.norm() == 0.0 {
        return Err(BicError::Continuation { re: z.re, im: z.im });
    }
    let g = params.gamma;
    let d = params.d;
    let row = match sheet {
        Sheet::First => row_with_root(physical_root(z), &j, d, g),
        Sheet::Second if z.im <= 0.0 => row_with_root(s, &j, d, g),
        Sheet::Third if z.im >= 0.0 => row_with_root(-s, &j, d, g),
        Sheet::Second | Sheet::Third => {
            let sign = if sheet == Sheet::Second { 1.0 } else { -1.0 };
            let base = row_with_root(physical_root(z), &j, d, g);
            base.iter()
                .enumerate()
                .map(|(k, v)| v + sign * 2.0 * I * g * ((k as f64) * d * s).cos() / s)
                .collect()
        }
    };
    Ok(SelfEnergyMatrix { z, sheet, row })
}

/// Discontinuity 2iγcos(kθ(z))/√(z²−1) separating the sheets.
pub fn sheet_discontinuity(z: C64, k: usize, params: &EmitterArrayParams) -> C64 {
    let s = sqrt_z2m1(z);
    2.0 * I * params.gamma * ((k as f64) * params.d * s).cos() / s
}
