//! Bound states in the continuum: resonant families, the full-self-energy
//! solver, the large-spacing solver, probabilities, fields and spectral lines.

pub mod field;
pub mod leak;
pub mod lines;
pub mod prob;

use crate::error::{BicError, Result};
use crate::params::{EmitterArrayParams, ParitySector, Tolerances};
use crate::parity::{build_a_real, embed_to_local, null_vector, phase_fix, sector_rows};
use crate::specfun::{b0_closed, cut_vector, epsilon_from_chi, theta_real};
use leak::{is_resonant_sector, scan, sector_point, theta_grid, track};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub use field::{field_norm, field_norm_spectral, field_wavefunction, FieldSample};
pub use lines::{spectral_lines, LinePoint, LinesReport};
pub use prob::{atomic_probability, class_state, probability_approximant, ProbabilityClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMode {
    Full,
    LargeSpacing,
}

impl std::str::FromStr for SolveMode {
    type Err = BicError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(SolveMode::Full),
            "markov" | "large-spacing" => Ok(SolveMode::LargeSpacing),
            _ => Err(BicError::Label(format!("unknown mode {s}"))),
        }
    }
}

/// A normalizable eigenstate with real energy above threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundStateInContinuum {
    pub n: usize,
    pub d: f64,
    pub gamma: f64,
    pub energy: f64,
    pub epsilon: f64,
    pub chi: f64,
    pub nu_nearest: u32,
    /// `None` when the state has no definite parity
    pub sector: Option<ParitySector>,
    pub amplitudes: Vec<C64>,
    pub p: f64,
    pub field_norm: f64,
    pub constraint_residual: f64,
    pub sigma_ratio: f64,
    pub exact_resonance: bool,
    pub mode: SolveMode,
}

impl BoundStateInContinuum {
    pub fn params(&self) -> EmitterArrayParams {
        EmitterArrayParams { n: self.n, epsilon: self.epsilon, d: self.d, gamma: self.gamma }
    }

    pub fn amplitude_norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedDiagnostic {
    pub energy: f64,
    pub sector: Option<ParitySector>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub states: Vec<BoundStateInContinuum>,
    pub unconverged: Vec<SeedDiagnostic>,
    pub rejected: Vec<SeedDiagnostic>,
}

/// A root of the sector singularity condition before normalization.
#[derive(Debug, Clone)]
pub struct SectorRoot {
    pub energy: f64,
    pub chi: f64,
    pub sector: ParitySector,
    /// real unit vector in the sector basis
    pub vector: DVector<f64>,
    pub sigma_ratio: f64,
    pub exact_resonance: bool,
}

impl SectorRoot {
    pub fn local_amplitudes(&self, n: usize) -> Vec<C64> {
        let v = self.vector.map(|x| C64::new(x, 0.0));
        let mut a = embed_to_local(&v, self.sector, n).expect("sector size matches");
        phase_fix(&mut a);
        a.iter().cloned().collect()
    }
}

/// E_ν(d) = √(1 + ν²π²/d²).
pub fn resonant_energy(nu: u32, d: f64) -> Result<f64> {
    if nu == 0 {
        return Err(BicError::Domain("ν = 0 is the band edge, not a bound state".into()));
    }
    if !(d > 0.0) {
        return Err(BicError::Domain(format!("spacing must be positive, got {d}")));
    }
    let x = nu as f64 * PI / d;
    Ok((1.0 + x * x).sqrt())
}

/// Excitation energy compatible with E_ν(d) when cut terms are neglected,
/// i.e. the root of χ(E_ν) = 0: ε = E_ν + (γd/νπ²)·log(E_ν − νπ/d).
pub fn epsilon_constraint(nu: u32, d: f64, gamma: f64) -> Result<f64> {
    let e = resonant_energy(nu, d)?;
    let arg = e - nu as f64 * PI / d;
    assert!(arg > 0.0, "E_ν − νπ/d must be positive");
    Ok(e + gamma * d / (nu as f64 * PI * PI) * arg.ln())
}

/// Nearest resonance index, ties toward the lower ν.
pub fn nu_nearest(e: f64, d: f64) -> u32 {
    let x = theta_real(e, d) / PI;
    let lo = (x.floor() as u32).max(1);
    let hi = lo + 1;
    let elo = resonant_energy(lo, d).unwrap();
    let ehi = resonant_energy(hi, d).unwrap();
    if (e - elo).abs() <= (ehi - e).abs() {
        lo
    } else {
        hi
    }
}

/// Largest ν with E_ν(d) ≤ e_max.
pub fn max_nu(e_max: f64, d: f64) -> u32 {
    (e_max * d / PI).ceil() as u32
}

/// Full sector block A_σ(θ(E), χ, b(E)).
pub fn sector_block(e: f64, chi: f64, b: &[f64], d: f64, sector: ParitySector) -> DMatrix<C64> {
    let a = build_a_real(theta_real(e, d), chi, b);
    let r = sector_rows(b.len(), sector).map(|x| C64::new(x, 0.0));
    &r * a.entries * r.transpose()
}

fn validate_window(e_min: f64, e_max: f64) -> Result<(f64, f64)> {
    if !(e_max > 1.0) || !(e_max > e_min) || !e_max.is_finite() {
        return Err(BicError::Domain(format!("energy window [{e_min}, {e_max}] must lie above the threshold E = 1")));
    }
    Ok((e_min.max(1.0 + 1e-9), e_max))
}

/// Roots of det A_σ(θ(E), χ, b(E)) = 0 in the window, as (E, χ, vector).
///
/// Exact resonances are added analytically in the sectors where they exist;
/// all other roots come from sign changes and refined extrema of the leak.
pub fn sector_roots(
    n: usize,
    d: f64,
    sector: ParitySector,
    window: (f64, f64),
    seeds: &[f64],
    tol: &Tolerances,
) -> Result<(Vec<SectorRoot>, Vec<SeedDiagnostic>)> {
    let (lo, hi) = validate_window(window.0, window.1)?;
    let mut diags = Vec::new();
    let mut roots = Vec::new();
    for nu in 1..=max_nu(hi, d) {
        let e = resonant_energy(nu, d)?;
        if e < lo || e > hi || !is_resonant_sector(n, nu, sector) {
            continue;
        }
        let p = sector_point(e, d, n, sector, tol)?;
        for i in 0..p.kappa.len() {
            let v = p.vecs.column(i).into_owned();
            roots.push((e, -p.kappa[i], v, true, p.b.clone()));
        }
    }
    let nodes = theta_grid(lo, hi, d, tol.grid_points, seeds);
    let pts = track(&nodes, d, n, sector, tol)?;
    let sc = scan(&pts, d, n, sector, tol, true);
    for (e, msg) in sc.failures {
        diags.push(SeedDiagnostic { energy: e, sector: Some(sector), reason: msg });
    }
    for r in sc.roots {
        // near a resonance the eigenbasis turns fast in E; restore v ⟂ leak exactly
        let mut v = r.point.vecs.column(r.branch).into_owned();
        let l = &r.point.leak;
        let ll = l.norm_squared();
        if ll > 0.0 {
            v -= l * (v.dot(l) / ll);
            v /= v.norm();
        }
        roots.push((r.e, -r.point.kappa[r.branch], v, false, r.point.b.clone()));
    }
    let mut out: Vec<SectorRoot> = Vec::new();
    roots.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.3.cmp(&a.3)));
    for (e, chi, v, exact, b) in roots {
        let dup = out.iter().any(|o| {
            (o.energy - e).abs() <= 1e-9 * e && (o.chi - chi).abs() <= 1e-6 * (1.0 + chi.abs()) && o.vector.dot(&v).abs() > 0.99
        });
        if dup {
            continue;
        }
        let blk = sector_block(e, chi, &b, d, sector);
        let nv = null_vector(&blk);
        let ratio = singular_ratio(nv.sigma_min, nv.sigma_max);
        if ratio > tol.singular {
            diags.push(SeedDiagnostic { energy: e, sector: Some(sector), reason: format!("rejected: σ_min/σ_max = {ratio:e}") });
            continue;
        }
        out.push(SectorRoot { energy: e, chi, sector, vector: v, sigma_ratio: ratio, exact_resonance: exact });
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.chi.total_cmp(&b.chi)));
    Ok((out, diags))
}

/// σ_min relative to the block scale; entries of A_σ are O(1), so a 1×1
/// block is measured against 1 rather than against itself.
pub fn singular_ratio(sigma_min: f64, sigma_max: f64) -> f64 {
    sigma_min / sigma_max.max(1.0)
}

/// max over ± of |Σ_ℓ a_ℓ e^{±i(ℓ−1)θ}|.
pub fn constraint_residual(a: &[C64], theta: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for sign in [1.0, -1.0] {
        let s: C64 = a.iter().enumerate().map(|(l, x)| x * C64::new(0.0, sign * l as f64 * theta).exp()).sum();
        worst = worst.max(s.norm());
    }
    worst
}

/// Builds a normalized state from a unit amplitude direction.
pub fn normalize_state(
    n: usize,
    d: f64,
    gamma: f64,
    energy: f64,
    chi: f64,
    unit: Vec<C64>,
    sector: Option<ParitySector>,
    sigma_ratio: f64,
    exact_resonance: bool,
    mode: SolveMode,
    tol: &Tolerances,
) -> Result<BoundStateInContinuum> {
    let norm: f64 = unit.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let unit: Vec<C64> = unit.iter().map(|a| a / norm).collect();
    let epsilon = epsilon_from_chi(chi, energy, gamma)?;
    let mut st = BoundStateInContinuum {
        n,
        d,
        gamma,
        energy,
        epsilon,
        chi,
        nu_nearest: nu_nearest(energy, d),
        sector,
        amplitudes: unit,
        p: 1.0,
        field_norm: 0.0,
        constraint_residual: 0.0,
        sigma_ratio,
        exact_resonance,
        mode,
    };
    let f_unit = field_norm(&st, tol)?;
    let scale = 1.0 / (1.0 + f_unit).sqrt();
    for a in st.amplitudes.iter_mut() {
        *a *= scale;
    }
    st.p = atomic_probability(&st);
    st.field_norm = f_unit * scale * scale;
    st.constraint_residual = constraint_residual(&st.amplitudes, theta_real(energy, d));
    Ok(st)
}

/// Bound states in the continuum in an energy window.
///
/// `sector = None` searches both parity sectors. Seeds are extra scan
/// nodes; seeds outside the window are reported as unconverged.
pub fn solve_bic(
    params: &EmitterArrayParams,
    sector: Option<ParitySector>,
    mode: SolveMode,
    window: (f64, f64),
    seeds: &[f64],
    tol: &Tolerances,
) -> Result<SolveReport> {
    let (lo, hi) = validate_window(window.0, window.1)?;
    let sectors: Vec<ParitySector> = match sector {
        Some(s) => vec![s],
        None => ParitySector::both().to_vec(),
    };
    let mut report = SolveReport { states: vec![], unconverged: vec![], rejected: vec![] };
    for &s in seeds {
        if !(s >= lo && s <= hi) {
            report.unconverged.push(SeedDiagnostic { energy: s, sector, reason: "seed outside the energy window".into() });
        }
    }
    let n = params.n;
    let d = params.d;
    for &sec in &sectors {
        match mode {
            SolveMode::Full => {
                let (roots, diags) = sector_roots(n, d, sec, (lo, hi), seeds, tol)?;
                for dg in diags {
                    if dg.reason.starts_with("rejected") {
                        report.rejected.push(dg);
                    } else {
                        report.unconverged.push(dg);
                    }
                }
                for r in roots {
                    let a = r.local_amplitudes(n);
                    report.states.push(normalize_state(
                        n, d, params.gamma, r.energy, r.chi, a, Some(sec), r.sigma_ratio, r.exact_resonance, mode, tol,
                    )?);
                }
            }
            SolveMode::LargeSpacing => {
                for nu in 1..=max_nu(hi, d) {
                    let e = resonant_energy(nu, d)?;
                    if e < lo || e > hi {
                        continue;
                    }
                    for v in large_spacing_basis(n, nu, d, sec) {
                        report.states.push(normalize_state(n, d, params.gamma, e, 0.0, v, Some(sec), 0.0, true, mode, tol)?);
                    }
                }
            }
        }
    }
    report.states.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.chi.total_cmp(&b.chi)));
    Ok(report)
}

/// Orthonormal basis (local amplitudes) of the resonant eigenspace of
/// A_n(νπ, 0, 0) restricted to one sector.
pub fn large_spacing_basis(n: usize, nu: u32, d: f64, sector: ParitySector) -> Vec<Vec<C64>> {
    let _ = d;
    let th = nu as f64 * PI;
    let r = sector_rows(n, sector);
    let mid = 0.5 * (n as f64 - 1.0);
    let raw = DVector::from_fn(n, |j, _| {
        let x = (j as f64 - mid) * th;
        match sector {
            ParitySector::Symmetric => x.cos(),
            ParitySector::Antisymmetric => x.sin(),
        }
    });
    let leak = &r * raw;
    let m = r.nrows();
    let basis: Vec<DVector<f64>> = if leak.norm() < 1e-12 {
        (0..m).map(|i| DVector::from_fn(m, |k, _| if k == i { 1.0 } else { 0.0 })).collect()
    } else {
        let u = &leak / leak.norm();
        let proj = DMatrix::<f64>::identity(m, m) - &u * u.transpose();
        let eig = SymmetricEigen::new(proj);
        let mut cols: Vec<(f64, DVector<f64>)> = (0..m).map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned())).collect();
        cols.sort_by(|a, b| b.0.total_cmp(&a.0));
        cols.into_iter().filter(|c| c.0 > 0.5).map(|c| c.1).collect()
    };
    basis
        .into_iter()
        .map(|v| {
            let mut a = embed_to_local(&v.map(|x| C64::new(x, 0.0)), sector, n).expect("sector size");
            phase_fix(&mut a);
            a.iter().cloned().collect()
        })
        .collect()
}

/// χ values, compatible ε and amplitudes for exact persistence of E_ν(d).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonantSector {
    pub sector: ParitySector,
    pub hermitian: bool,
    pub energy: f64,
    /// real admissible ε (Hermitian sector only)
    pub epsilons: Vec<f64>,
    pub chis: Vec<f64>,
    pub amplitudes: Vec<Vec<C64>>,
    /// eigenvalues of the non-Hermitian ε-matrix (complementary sector only)
    pub complex_epsilons: Vec<C64>,
}

pub fn exact_resonant_epsilons(n: usize, nu: u32, d: f64, gamma: f64, tol: &Tolerances) -> Result<Vec<ResonantSector>> {
    let e = resonant_energy(nu, d)?;
    let s = (e * e - 1.0).sqrt();
    let b0 = b0_closed(e)?;
    let b = cut_vector(e, d, n, tol)?.values;
    let mut out = Vec::new();
    for sector in ParitySector::both() {
        if sector.block_size(n) == 0 {
            continue;
        }
        let r = sector_rows(n, sector);
        // K at θ = νπ exactly: only cut terms survive off the diagonal
        let k = DMatrix::from_fn(n, n, |j, l| {
            let m = j.abs_diff(l);
            if m == 0 {
                0.0
            } else {
                b[m]
            }
        });
        let ks = &r * k * r.transpose();
        if is_resonant_sector(n, nu, sector) {
            let eig = SymmetricEigen::new(ks);
            let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
            idx.sort_by(|&x, &y| (-eig.eigenvalues[x]).total_cmp(&(-eig.eigenvalues[y])));
            let mut chis = vec![];
            let mut eps = vec![];
            let mut amps = vec![];
            for i in idx {
                let chi = -eig.eigenvalues[i];
                chis.push(chi);
                eps.push(e + gamma * (chi - b0) / s);
                let v = eig.eigenvectors.column(i).map(|x| C64::new(x, 0.0));
                let mut a = embed_to_local(&v, sector, n)?;
                phase_fix(&mut a);
                amps.push(a.iter().cloned().collect());
            }
            out.push(ResonantSector { sector, hermitian: true, energy: e, epsilons: eps, chis, amplitudes: amps, complex_epsilons: vec![] });
        } else {
            let th = nu as f64 * PI;
            let pmat = DMatrix::from_fn(n, n, |j, l| ((j.abs_diff(l)) as f64 * th).cos());
            let ps = &r * pmat * r.transpose();
            // det(P + i(K + χ)) = 0  ⇔  χ is an eigenvalue of −K + iP
            let m = ks.map(|x| C64::new(-x, 0.0)) + ps.map(|x| C64::new(0.0, x));
            let chis = complex_eigenvalues(&m);
            let ceps = chis.iter().map(|c| C64::new(e, 0.0) + gamma * (c - b0) / s).collect();
            out.push(ResonantSector {
                sector,
                hermitian: false,
                energy: e,
                epsilons: vec![],
                chis: vec![],
                amplitudes: vec![],
                complex_epsilons: ceps,
            });
        }
    }
    Ok(out)
}

fn complex_eigenvalues(m: &DMatrix<C64>) -> Vec<C64> {
    let n = m.nrows();
    if n == 1 {
        return vec![m[(0, 0)]];
    }
    let schur = m.clone().schur();
    let (_, t) = schur.unpack();
    let mut ev: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    ev
}
