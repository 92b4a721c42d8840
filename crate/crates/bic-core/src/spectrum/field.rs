//! Field wavefunction of a bound state and its norm.

use super::{BoundStateInContinuum, SolveMode};
use crate::error::{BicError, Result};
use crate::params::Tolerances;
use crate::quad::gauss_legendre;
use crate::specfun::{cut_primitive_with_derivative, xi1, xi1_markov};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const TAIL_LENGTH: f64 = 30.0;
const GL_ORDER: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub x: Vec<f64>,
    pub values: Vec<C64>,
    pub mode: SolveMode,
}

impl FieldSample {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn kernel(x: f64, st: &BoundStateInContinuum, tol: &Tolerances) -> Result<f64> {
    match st.mode {
        SolveMode::Full => xi1(x, st.energy, st.gamma, tol),
        SolveMode::LargeSpacing => xi1_markov(x, st.energy, st.gamma),
    }
}

/// ξ(x) = Σ_ℓ a_ℓ ξ₁(x − ℓd) on the given grid.
pub fn field_wavefunction(st: &BoundStateInContinuum, grid: &[f64], tol: &Tolerances) -> Result<FieldSample> {
    let values: Vec<Result<C64>> = grid
        .par_iter()
        .map(|&x| {
            let mut v = C64::new(0.0, 0.0);
            for (l, a) in st.amplitudes.iter().enumerate() {
                v += a * kernel(x - l as f64 * st.d, st, tol)?;
            }
            Ok(v)
        })
        .collect();
    Ok(FieldSample { x: grid.to_vec(), values: values.into_iter().collect::<Result<_>>()?, mode: st.mode })
}

/// Nodes and weights on [0, len] graded like u²(3−2u) at both ends.
fn graded_rule(len: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(GL_ORDER);
    let mut xs = Vec::with_capacity(panels * GL_ORDER);
    let mut ws = Vec::with_capacity(panels * GL_ORDER);
    for p in 0..panels {
        let (a, b) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
        for (x, w) in gx.iter().zip(&gw) {
            let u = 0.5 * (a + b) + 0.5 * (b - a) * x;
            xs.push(len * u * u * (3.0 - 2.0 * u));
            ws.push(len * 6.0 * u * (1.0 - u) * 0.5 * (b - a) * w);
        }
    }
    (xs, ws)
}

/// Tail rule on [0, TAIL_LENGTH], graded at the emitter and coarse far out.
fn tail_rule() -> (Vec<f64>, Vec<f64>) {
    let cuts = [0.0, 0.5, 1.5, 4.0, 9.0, 17.0, TAIL_LENGTH];
    let mut xs = vec![];
    let mut ws = vec![];
    for k in 0..cuts.len() - 1 {
        let (x, w) = graded_rule(cuts[k + 1] - cuts[k], 2);
        xs.extend(x.iter().map(|v| v + cuts[k]));
        ws.extend(w);
    }
    (xs, ws)
}

/// ∫|ξ|² over the whole line.
///
/// Interior cells between neighbouring emitters use a graded composite
/// Gauss rule that absorbs the √|x| behaviour of the kernel at the sites;
/// outside the array the field decays like e^{−|x|}, so the tails are cut
/// at a distance where the neglected part is below 1e−24.
pub fn field_norm(st: &BoundStateInContinuum, tol: &Tolerances) -> Result<f64> {
    let n = st.n;
    let d = st.d;
    let e = st.energy;
    if !(e > 1.0) {
        return Err(BicError::Domain(format!("E = {e} must exceed 1")));
    }
    let s = (e * e - 1.0).sqrt();
    let panels = ((s * d / std::f64::consts::PI) * 3.0).ceil().max(4.0) as usize;
    let (ti, wi) = graded_rule(d, panels);
    let (tt, wt) = tail_rule();
    // kernel at distances m·d + t; both rule sets are symmetric under t → len − t
    let table = |ts: &[f64]| -> Result<Vec<Vec<f64>>> {
        (0..n)
            .into_par_iter()
            .map(|m| ts.iter().map(|&t| kernel(m as f64 * d + t, st, tol)).collect::<Result<Vec<f64>>>())
            .collect()
    };
    let ki = if n > 1 { table(&ti)? } else { vec![] };
    let kt = table(&tt)?;
    let a = &st.amplitudes;
    let mut total = 0.0;
    for cell in 0..n.saturating_sub(1) {
        for (k, w) in wi.iter().enumerate() {
            let mut v = C64::new(0.0, 0.0);
            for (l, al) in a.iter().enumerate() {
                // distance from x = cell·d + t to site l
                let val = if l <= cell {
                    ki[cell - l][k]
                } else {
                    ki[l - cell - 1][ti.len() - 1 - k]
                };
                v += al * val;
            }
            total += w * v.norm_sqr();
        }
    }
    for (k, w) in wt.iter().enumerate() {
        let mut left = C64::new(0.0, 0.0);
        let mut right = C64::new(0.0, 0.0);
        for (l, al) in a.iter().enumerate() {
            left += al * kt[l][k];
            right += al * kt[n - 1 - l][k];
        }
        total += w * (left.norm_sqr() + right.norm_sqr());
    }
    Ok(total)
}

/// Field norm from the energy derivative of the self-energy,
/// Re a†Σ′(E + i0)a, independent of any position-space quadrature.
pub fn field_norm_spectral(st: &BoundStateInContinuum, tol: &Tolerances) -> Result<f64> {
    let e = st.energy;
    let d = st.d;
    let g = st.gamma;
    let n = st.n;
    if !(e > 1.0) {
        return Err(BicError::Domain(format!("E = {e} must exceed 1")));
    }
    let s = (e * e - 1.0).sqrt();
    let (_, dj) = match st.mode {
        SolveMode::Full => cut_primitive_with_derivative(e, d, n, tol)?,
        SolveMode::LargeSpacing => (vec![0.0; n], vec![0.0; n]),
    };
    let i = C64::new(0.0, 1.0);
    let row: Vec<C64> = (0..n)
        .map(|k| {
            let kd = k as f64 * d;
            let ph = (i * kd * s).exp();
            i * g * ph * (i * kd * e / s) / s - i * g * ph * e / (s * s * s) - g * dj[k]
        })
        .collect();
    let a = &st.amplitudes;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        for l in 0..n {
            acc += a[j].conj() * row[j.abs_diff(l)] * a[l];
        }
    }
    Ok(acc.re)
}
