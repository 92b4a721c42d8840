//! Brute-force check: the single-excitation Hamiltonian with the field
//! discretized in a periodic box.
//!
//! The matrix has arrowhead form, emitters coupled to diagonal box modes, so
//! eigenvalues in a window are located exactly by Sylvester inertia counts of
//! the n×n Schur complement and bisection. A dense path is kept for small
//! boxes.

use crate::error::{BicError, Result};
use crate::params::EmitterArrayParams;
use crate::quad::{integrate_scalar, QuadOptions};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct DiscretizedModel {
    pub params: EmitterArrayParams,
    pub length: f64,
    pub modes: usize,
    /// k_q = 2πq/L for q = −M/2 … M/2 − 1
    pub k: Vec<f64>,
    pub omega: Vec<f64>,
    /// emitter positions, array centred at the origin
    pub positions: Vec<f64>,
    /// n × M coupling block √(γ/(Lω_q))·e^{ik_q x_j}
    pub coupling: DMatrix<C64>,
    /// emitter block contribution of the modes beyond the cutoff
    pub tail: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleState {
    pub energy: f64,
    pub atomic_weight: f64,
    /// share of the field probability inside the padded array interval
    pub confinement: f64,
    pub amplitudes: Vec<C64>,
}

/// Pads the array interval on both sides when measuring confinement.
pub const CONFINEMENT_PAD: f64 = 2.0;

/// Builds the box model. `e_max` is the top of the intended energy window
/// and sets the minimum momentum cutoff.
pub fn build_hamiltonian(params: &EmitterArrayParams, length: f64, modes: usize, e_max: f64) -> Result<DiscretizedModel> {
    let n = params.n;
    let span = (n as f64 - 1.0) * params.d;
    if modes == 0 || modes % 2 == 1 {
        return Err(BicError::Config(format!("mode count must be even and positive, got {modes}")));
    }
    if !(length > span + 4.0 * CONFINEMENT_PAD) {
        return Err(BicError::Config(format!("box length {length} too short for an array of extent {span}")));
    }
    let cutoff = PI * modes as f64 / length;
    let k_max = (e_max * e_max - 1.0).max(0.0).sqrt();
    if cutoff < 10.0 * k_max.max(1.0) {
        return Err(BicError::Config(format!("momentum cutoff {cutoff} too low for energies up to {e_max}")));
    }
    let half = (modes / 2) as i64;
    let k: Vec<f64> = (-half..half).map(|q| 2.0 * PI * q as f64 / length).collect();
    let omega: Vec<f64> = k.iter().map(|k| (1.0 + k * k).sqrt()).collect();
    let positions: Vec<f64> = (0..n).map(|j| (j as f64 - 0.5 * (n as f64 - 1.0)) * params.d).collect();
    let coupling = DMatrix::from_fn(n, modes, |j, q| {
        let amp = (params.gamma / (length * omega[q])).sqrt();
        if q == 0 {
            // the unpaired mode k = −K is cos(Kx) on the grid; keeps H parity symmetric
            C64::new(amp * (k[q] * positions[j]).cos(), 0.0)
        } else {
            C64::from_polar(amp, k[q] * positions[j])
        }
    });
    let tail = cutoff_tail(params, &positions, k[0].abs(), e_max)?;
    Ok(DiscretizedModel { params: *params, length, modes, k, omega, positions, coupling, tail })
}

/// (γ/2π)∫_{|k|>K} e^{ik(x_j−x_l)}/(ω(E−ω)) dk at E = e_ref.
///
/// The diagonal is integrated along k = sinh t; off-diagonal entries keep
/// the leading boundary term of one integration by parts.
fn cutoff_tail(params: &EmitterArrayParams, positions: &[f64], cutoff: f64, e_ref: f64) -> Result<DMatrix<f64>> {
    let t0 = cutoff.asinh();
    let opts = QuadOptions { abs_tol: 1e-16, rel_tol: 1e-12, max_subdivisions: 200, initial_panels: 4 };
    let diag = integrate_scalar(|t| 1.0 / (e_ref - t.cosh()), t0, t0 + 40.0, &opts)?;
    let w = (1.0 + cutoff * cutoff).sqrt();
    let f_k = 1.0 / (w * (e_ref - w));
    let g = params.gamma / PI;
    let n = positions.len();
    Ok(DMatrix::from_fn(n, n, |j, l| {
        let x = (positions[j] - positions[l]).abs();
        if j == l {
            g * diag
        } else {
            -g * (cutoff * x).sin() * f_k / x
        }
    }))
}

impl DiscretizedModel {
    /// Full (n+M)×(n+M) Hermitian matrix; practical only for small M.
    pub fn dense_hamiltonian(&self) -> DMatrix<C64> {
        let n = self.params.n;
        let m = self.modes;
        let mut h = DMatrix::zeros(n + m, n + m);
        for j in 0..n {
            for l in 0..n {
                h[(j, l)] = C64::new(self.tail[(j, l)], 0.0);
            }
            h[(j, j)] += C64::new(self.params.epsilon, 0.0);
            for q in 0..m {
                h[(j, n + q)] = self.coupling[(j, q)];
                h[(n + q, j)] = self.coupling[(j, q)].conj();
            }
        }
        for q in 0..m {
            h[(n + q, n + q)] = C64::new(self.omega[q], 0.0);
        }
        h
    }

    /// Schur complement Λ(E) = (ε − E)𝟙 + T − Σ_q c_q c_q†/(ω_q − E).
    pub fn schur_complement(&self, e: f64) -> DMatrix<C64> {
        self.schur_complement_excluding(e, &[])
    }

    fn schur_complement_excluding(&self, e: f64, skip: &[usize]) -> DMatrix<C64> {
        let n = self.params.n;
        let mut lam = DMatrix::from_fn(n, n, |j, l| C64::new(self.tail[(j, l)], 0.0));
        for j in 0..n {
            lam[(j, j)] += self.params.epsilon - e;
        }
        for q in 0..self.modes {
            if skip.contains(&q) {
                continue;
            }
            let w = 1.0 / (self.omega[q] - e);
            let c = self.coupling.column(q);
            for j in 0..n {
                let cj = c[j] * w;
                for l in 0..n {
                    lam[(j, l)] -= cj * c[l].conj();
                }
            }
        }
        lam
    }

    /// Number of eigenvalues of H strictly below E.
    pub fn count_below(&self, e: f64) -> usize {
        let field = self.omega.iter().filter(|&&w| w < e).count();
        let lam = SymmetricEigen::new(self.schur_complement(e));
        field + lam.eigenvalues.iter().filter(|&&v| v < 0.0).count()
    }

    /// Eigenvalues of H in [lo, hi], each located to `xtol` by bisection on
    /// the inertia count.
    pub fn eigenvalues_in(&self, lo: f64, hi: f64, xtol: f64) -> Vec<f64> {
        let c0 = self.count_below(lo);
        let c1 = self.count_below(hi);
        (c0..c1)
            .into_par_iter()
            .map(|idx| {
                let (mut a, mut b) = (lo, hi);
                while b - a > xtol {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    if self.count_below(m) > idx {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                0.5 * (a + b)
            })
            .collect()
    }

    /// Eigenvector at an eigenvalue E: emitter part from the null vector of
    /// Λ(E), field part ξ_q = c_q†a/(E − ω_q).
    ///
    /// When E coincides with box modes, those modes are removed from Λ and
    /// their amplitudes join the null-vector problem of the bordered matrix
    /// [[Λ′, C₀], [C₀†, 0]]. None for pure field states.
    pub fn state_at(&self, e: f64) -> Option<OracleState> {
        let n = self.params.n;
        let on_shell: Vec<usize> = (0..self.modes).filter(|&q| (self.omega[q] - e).abs() <= 1e-8 * e).collect();
        let mut lam = self.schur_complement_excluding(e, &on_shell);
        let k0 = on_shell.len();
        if k0 > 0 {
            let mut b = DMatrix::zeros(n + k0, n + k0);
            b.view_mut((0, 0), (n, n)).copy_from(&lam);
            for (i, &q) in on_shell.iter().enumerate() {
                for j in 0..n {
                    b[(j, n + i)] = self.coupling[(j, q)];
                    b[(n + i, j)] = self.coupling[(j, q)].conj();
                }
            }
            lam = b;
        }
        let eig = SymmetricEigen::new(lam);
        let imin = eig.eigenvalues.iamin();
        let null: Vec<usize> = (0..eig.eigenvalues.len())
            .filter(|&i| i == imin || eig.eigenvalues[i].abs() <= 1e-10)
            .collect();
        let v: DVector<C64> = if null.len() == 1 {
            eig.eigenvectors.column(imin).into_owned()
        } else {
            // degenerate with free field modes: keep the direction of largest emitter content
            let basis = DMatrix::from_columns(&null.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
            let svd = basis.rows(0, n).into_owned().svd(false, true);
            let top = svd.singular_values.imax();
            let c: DVector<C64> = svd.v_t.expect("requested").row(top).adjoint();
            basis * c
        };
        let a: DVector<C64> = v.rows(0, n).into_owned();
        if a.norm() <= 1e-12 * v.norm() {
            return None;
        }
        let mut xi: Vec<C64> = (0..self.modes)
            .map(|q| if on_shell.contains(&q) { C64::new(0.0, 0.0) } else { self.coupling.column(q).dotc(&a) / (e - self.omega[q]) })
            .collect();
        for (i, &q) in on_shell.iter().enumerate() {
            xi[q] = -v[n + i];
        }
        let atomic: f64 = a.norm_squared();
        let field: f64 = xi.iter().map(|v| v.norm_sqr()).sum();
        let total = atomic + field;
        let scale = 1.0 / total.sqrt();
        let confinement = self.confinement(&xi);
        let mut amps: Vec<C64> = a.iter().map(|v| v * scale).collect();
        let big = amps.iter().cloned().fold(C64::new(0.0, 0.0), |m, v| if v.norm() > m.norm() { v } else { m });
        if big.norm() > 0.0 {
            let ph = big.conj() / big.norm();
            amps.iter_mut().for_each(|v| *v *= ph);
        }
        Some(OracleState { energy: e, atomic_weight: atomic / total, confinement, amplitudes: amps })
    }

    /// Share of Σ|ξ_q|² carried by the field on the padded array interval,
    /// from the box wavefunction sampled by an inverse FFT.
    pub fn confinement(&self, xi: &[C64]) -> f64 {
        let m = self.modes;
        let half = m / 2;
        let mut buf = vec![C64::new(0.0, 0.0); m];
        for (idx, v) in xi.iter().enumerate() {
            let q = idx as i64 - half as i64;
            // x_i = −L/2 + iL/M puts a factor (−1)^q on each mode
            let sign = if q.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            buf[q.rem_euclid(m as i64) as usize] = v * sign;
        }
        let fft = FftPlanner::new().plan_fft_inverse(m);
        fft.process(&mut buf);
        let lo = self.positions[0] - CONFINEMENT_PAD;
        let hi = self.positions[self.params.n - 1] + CONFINEMENT_PAD;
        let dx = self.length / m as f64;
        let (mut inside, mut total) = (0.0, 0.0);
        for (i, v) in buf.iter().enumerate() {
            let x = -0.5 * self.length + i as f64 * dx;
            let p = v.norm_sqr();
            total += p;
            if x >= lo && x <= hi {
                inside += p;
            }
        }
        if total > 0.0 {
            inside / total
        } else {
            1.0
        }
    }
}

/// Eigenstates in the window whose field confinement exceeds `threshold`.
pub fn find_bic_candidates(model: &DiscretizedModel, window: (f64, f64), threshold: f64) -> Vec<OracleState> {
    let xtol = 1e-13 * window.1.abs().max(1.0);
    let mut energies = model.eigenvalues_in(window.0, window.1, xtol);
    energies.dedup_by(|a, b| (*a - *b).abs() <= 10.0 * xtol);
    let mut out: Vec<OracleState> = energies
        .par_iter()
        .filter_map(|&e| model.state_at(e))
        .filter(|s| s.confinement > threshold)
        .collect();
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    out
}

/// Candidates confirmed in a box of twice the length (and twice the modes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfirmedCandidate {
    pub coarse: OracleState,
    pub fine: OracleState,
}

/// Runs the box at L and 2L and keeps candidates whose energies agree within
/// `c_over_l / L`.
pub fn confirmed_candidates(
    params: &EmitterArrayParams,
    length: f64,
    modes: usize,
    window: (f64, f64),
    threshold: f64,
    c_over_l: f64,
) -> Result<Vec<ConfirmedCandidate>> {
    let cutoff = modes as f64 * PI / length;
    let length = detuned_length(params.d, length, window);
    let modes = modes_for_cutoff(length, cutoff);
    let models: Vec<Result<DiscretizedModel>> = [(length, modes), (2.0 * length, 2 * modes)]
        .par_iter()
        .map(|&(l, m)| build_hamiltonian(params, l, m, window.1))
        .collect();
    let mut models = models.into_iter();
    let coarse = models.next().expect("two models")?;
    let fine = models.next().expect("two models")?;
    let (a, b) = rayon::join(|| find_bic_candidates(&coarse, window, threshold), || find_bic_candidates(&fine, window, threshold));
    let tol = c_over_l / length;
    let mut out = vec![];
    for c in a {
        if let Some(f) = b
            .iter()
            .filter(|f| (f.energy - c.energy).abs() <= tol)
            .min_by(|x, y| (x.energy - c.energy).abs().total_cmp(&(y.energy - c.energy).abs()))
        {
            out.push(ConfirmedCandidate { coarse: c, fine: f.clone() });
        }
    }
    Ok(out)
}

/// Smallest box length ≥ `length` (in steps of 1e−3·length) keeping every
/// resonance E_ν in the window away from the box momenta at L and 2L.
///
/// A resonance that coincides with a box mode is degenerate with it, and the
/// discrete eigenvector no longer separates bound from extended states.
pub fn detuned_length(d: f64, length: f64, window: (f64, f64)) -> f64 {
    let ks: Vec<f64> = (1..)
        .map(|nu| nu as f64 * PI / d)
        .take_while(|k| (1.0 + k * k).sqrt() <= window.1)
        .filter(|k| (1.0 + k * k).sqrt() >= window.0)
        .collect();
    let off = |x: f64| (x - x.round()).abs();
    for j in 0..1000 {
        let l = length * (1.0 + 1e-3 * j as f64);
        if ks.iter().all(|k| off(k * l / (2.0 * PI)) >= 0.1 && off(k * l / PI) >= 0.1) {
            return l;
        }
    }
    length
}

/// Mode count giving a momentum cutoff of about `cutoff` at box length L.
pub fn modes_for_cutoff(length: f64, cutoff: f64) -> usize {
    let m = (cutoff * length / PI).ceil() as usize;
    m + m % 2
}
