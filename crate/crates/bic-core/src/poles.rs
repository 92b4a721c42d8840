//! Resolvent poles on the unphysical sheets, their closed-form
//! approximants and the critical spacing of nonperturbative pairs.

use crate::error::{BicError, Result};
use crate::params::{EmitterArrayParams, ParitySector, Sheet, Tolerances};
use crate::parity::{sector_block_from_row, sector_rows};
use crate::specfun::{cut_vector, epsilon_from_chi, self_energy};
use crate::spectrum::leak::{scan, theta_grid, track};
use crate::spectrum::resonant_energy;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleResult {
    /// E_p − iγ_p/2
    pub z: C64,
    pub sector: ParitySector,
    pub sheet: Sheet,
    /// |det| relative to a cancellation-free magnitude of the block
    pub residual: f64,
    pub decay_rate: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PoleBranch {
    Plus,
    Minus,
}

impl std::str::FromStr for PoleBranch {
    type Err = BicError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" | "upper" => Ok(PoleBranch::Plus),
            "-" | "minus" | "lower" => Ok(PoleBranch::Minus),
            _ => Err(BicError::Label(format!("unknown pole branch {s}"))),
        }
    }
}

/// Sector block and the product of the column norms of its term
/// magnitudes, a cancellation-free scale for |det|.
fn block(z: C64, params: &EmitterArrayParams, sector: ParitySector, sheet: Sheet, tol: &Tolerances) -> Result<(DMatrix<C64>, f64)> {
    let sigma = self_energy(z, params, sheet, tol)?;
    let mut row = sigma.row;
    let n = row.len();
    let mut mag: Vec<f64> = row.iter().map(|v| v.norm()).collect();
    row[0] += z - params.epsilon;
    mag[0] += (z - params.epsilon).norm();
    let r = sector_rows(n, sector).map(f64::abs);
    let a = DMatrix::from_fn(n, n, |j, l| mag[j.abs_diff(l)]);
    let m = &r * a * r.transpose();
    let scale = m.column_iter().map(|c| c.norm()).product::<f64>().max(f64::MIN_POSITIVE);
    Ok((sector_block_from_row(&row, sector), scale))
}

/// det of the sector block of (z − ε)𝟙 + Σ^{sheet}(z); its zeros are the
/// poles of the resolvent continued to `sheet`.
pub fn det_on_sheet(z: C64, params: &EmitterArrayParams, sector: ParitySector, sheet: Sheet, tol: &Tolerances) -> Result<C64> {
    if sector.block_size(params.n) == 0 {
        return Err(BicError::SizeMismatch { expected: 1, got: 0 });
    }
    Ok(block(z, params, sector, sheet, tol)?.0.determinant())
}

fn det_and_scale(z: C64, params: &EmitterArrayParams, sector: ParitySector, sheet: Sheet, tol: &Tolerances) -> Result<(C64, f64)> {
    let (b, s) = block(z, params, sector, sheet, tol)?;
    Ok((b.determinant(), s))
}

/// Damped complex Newton on det_on_sheet with a central-difference derivative.
pub fn find_pole(z0: C64, params: &EmitterArrayParams, sector: ParitySector, sheet: Sheet, tol: &Tolerances) -> Result<PoleResult> {
    let f = |z: C64| det_and_scale(z, params, sector, sheet, tol);
    let mut z = z0;
    let (mut fz, mut scale) = f(z)?;
    let mut trajectory = vec![[z.re, z.im]];
    for it in 0..tol.newton_max_iter {
        let h = 1e-7 * (1.0 + z.norm());
        let df = (f(z + h)?.0 - f(z - h)?.0) / (2.0 * h);
        if df.norm() == 0.0 || !df.is_finite() {
            break;
        }
        let step = fz / df;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let zn = z - lambda * step;
            if let Ok((fzn, sn)) = f(zn) {
                // the Newton direction is a descent direction for |det|, not for |det|/scale
                if fzn.norm() <= fz.norm() || lambda < 1e-6 {
                    accepted = Some((zn, fzn, sn));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((zn, fzn, sn)) = accepted else { break };
        let full_step = lambda == 1.0;
        let moved = (zn - z).norm();
        z = zn;
        fz = fzn;
        scale = sn;
        trajectory.push([z.re, z.im]);
        let done = moved <= 1e-14 * (1.0 + z.norm()) && (full_step || fz.norm() / scale <= 1e-10);
        if done || fz.norm() == 0.0 {
            return Ok(PoleResult {
                z,
                sector,
                sheet,
                residual: fz.norm() / scale,
                decay_rate: -2.0 * z.im,
                iterations: it + 1,
            });
        }
    }
    let residual = fz.norm() / scale;
    if residual <= 1e-12 {
        return Ok(PoleResult { z, sector, sheet, residual, decay_rate: -2.0 * z.im, iterations: tol.newton_max_iter });
    }
    Err(BicError::NoConvergence { message: format!("pole search stalled at residual {residual:e}"), trajectory })
}

/// Sector block of m_k = i e^{ikθ} − b_k at real E, so that
/// (z − ε)𝟙 + Σ ≈ (z − ε)𝟙 + (γ/√(E²−1))·m.
fn m_block(e: f64, params: &EmitterArrayParams, sector: ParitySector, tol: &Tolerances) -> Result<DMatrix<C64>> {
    let s = (e * e - 1.0).sqrt();
    let b = cut_vector(e, params.d, params.n, tol)?.values;
    let row: Vec<C64> = (0..params.n)
        .map(|k| I * C64::new(0.0, k as f64 * params.d * s).exp() - b[k])
        .collect();
    Ok(sector_block_from_row(&row, sector))
}

fn eigen_2x2(m: &DMatrix<C64>, branch: PoleBranch) -> C64 {
    let half = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let diff = 0.5 * (m[(0, 0)] - m[(1, 1)]);
    let root = (diff * diff + m[(0, 1)] * m[(1, 0)]).sqrt();
    match branch {
        PoleBranch::Plus => half + root,
        PoleBranch::Minus => half - root,
    }
}

fn pole_from_mu(e: f64, mu: C64, params: &EmitterArrayParams) -> C64 {
    let s = (e * e - 1.0).sqrt();
    params.epsilon - params.gamma / s * mu
}

/// Closed-form pole of a one- or two-dimensional sector block.
///
/// The right-hand side is evaluated at E = ε, then once more at the
/// updated Re z_p.
fn approx_pole_small(params: &EmitterArrayParams, sector: ParitySector, branch: PoleBranch, tol: &Tolerances) -> Result<C64> {
    if !(params.epsilon > 1.0) {
        return Err(BicError::Domain(format!("ε = {} must lie above threshold", params.epsilon)));
    }
    let m = sector.block_size(params.n);
    let mu = |e: f64| -> Result<C64> {
        let b = m_block(e, params, sector, tol)?;
        Ok(match m {
            1 => b[(0, 0)],
            2 => eigen_2x2(&b, branch),
            _ => unreachable!(),
        })
    };
    if m == 1 && branch == PoleBranch::Minus {
        return Err(BicError::Label("a one-dimensional sector has only the + branch".into()));
    }
    let z1 = pole_from_mu(params.epsilon, mu(params.epsilon)?, params);
    if !(z1.re > 1.0) {
        return Err(BicError::Domain(format!("first pass gives Re z = {} below threshold", z1.re)));
    }
    Ok(pole_from_mu(z1.re, mu(z1.re)?, params))
}

pub fn approx_pole_n3(params: &EmitterArrayParams, sector: ParitySector, branch: PoleBranch, tol: &Tolerances) -> Result<C64> {
    if params.n != 3 {
        return Err(BicError::SizeMismatch { expected: 3, got: params.n });
    }
    approx_pole_small(params, sector, branch, tol)
}

pub fn approx_pole_n4(params: &EmitterArrayParams, sector: ParitySector, branch: PoleBranch, tol: &Tolerances) -> Result<C64> {
    if params.n != 4 {
        return Err(BicError::SizeMismatch { expected: 4, got: params.n });
    }
    approx_pole_small(params, sector, branch, tol)
}

/// Same construction for any n: eigenvalue `index` (ordered by real part at
/// E = ε) of the sector m-block, followed by the nearest eigenvalue at the
/// updated energy.
pub fn approx_pole(params: &EmitterArrayParams, sector: ParitySector, index: usize, tol: &Tolerances) -> Result<C64> {
    if !(params.epsilon > 1.0) {
        return Err(BicError::Domain(format!("ε = {} must lie above threshold", params.epsilon)));
    }
    let size = sector.block_size(params.n);
    if index >= size {
        return Err(BicError::Label(format!("branch {index} out of range for a block of size {size}")));
    }
    let ev = |e: f64| -> Result<Vec<C64>> {
        let b = m_block(e, params, sector, tol)?;
        let mut v: Vec<C64> = b.eigenvalues().map(|x| x.iter().cloned().collect()).unwrap_or_else(|| {
            let (_, t) = b.clone().schur().unpack();
            (0..size).map(|i| t[(i, i)]).collect()
        });
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(v)
    };
    let mu1 = ev(params.epsilon)?[index];
    let z1 = pole_from_mu(params.epsilon, mu1, params);
    if !(z1.re > 1.0) {
        return Err(BicError::Domain(format!("first pass gives Re z = {} below threshold", z1.re)));
    }
    let mu2 = ev(z1.re)?
        .into_iter()
        .min_by(|a, b| (a - mu1).norm().total_cmp(&(b - mu1).norm()))
        .expect("non-empty block");
    Ok(pole_from_mu(z1.re, mu2, params))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    Epsilon,
    Spacing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub parameter: f64,
    pub pole: PoleResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleTrajectory {
    pub points: Vec<TrajectoryPoint>,
    /// parameter values where Im z_p reaches the real axis
    pub touchings: Vec<f64>,
    /// parameter values where continuation restarted from the approximant
    pub restarts: Vec<f64>,
    /// parameter values without a converged pole
    pub failures: Vec<f64>,
}

/// Continues one pole along a sweep of ε or d, seeding each step with a
/// linear extrapolation of the previous two poles.
pub fn pole_trajectory(
    base: &EmitterArrayParams,
    sector: ParitySector,
    sheet: Sheet,
    branch: usize,
    parameter: SweepParameter,
    values: &[f64],
    touch_tol: f64,
    tol: &Tolerances,
) -> Result<PoleTrajectory> {
    let mut out = PoleTrajectory { points: vec![], touchings: vec![], restarts: vec![], failures: vec![] };
    for &v in values {
        let p = match parameter {
            SweepParameter::Epsilon => base.with_epsilon(v)?,
            SweepParameter::Spacing => base.with_d(v)?,
        };
        let k = out.points.len();
        // z − ε barely moves along an ε sweep, so continuation runs in that frame
        let shift = |x: f64| match parameter {
            SweepParameter::Epsilon => x,
            SweepParameter::Spacing => 0.0,
        };
        let seed = match k {
            0 => None,
            1 => Some(out.points[0].pole.z - shift(out.points[0].parameter) + shift(v)),
            _ => {
                let (a, b) = (&out.points[k - 2], &out.points[k - 1]);
                let t = (v - b.parameter) / (b.parameter - a.parameter);
                let (ua, ub) = (a.pole.z - shift(a.parameter), b.pole.z - shift(b.parameter));
                Some(ub + t * (ub - ua) + shift(v))
            }
        };
        let approx: Vec<C64> = (0..sector.block_size(p.n)).filter_map(|i| approx_pole(&p, sector, i, tol).ok()).collect();
        let guess = seed.or_else(|| approx_pole(&p, sector, branch, tol).ok());
        // a converged pole is kept only if it is clearly closer to the guess
        // than the neighbouring poles are to each other
        let target = guess.and_then(|g| approx.iter().cloned().min_by(|a, b| (a - g).norm().total_cmp(&(b - g).norm())));
        let spacing = target.map(|t| {
            approx
                .iter()
                .filter(|a| (*a - t).norm() > 0.0)
                .map(|a| (a - t).norm())
                .fold(f64::INFINITY, f64::min)
        });
        let radius = spacing.filter(|r| r.is_finite()).map(|r| 0.5 * r).unwrap_or(f64::INFINITY);
        let from_seed = seed.and_then(|z| find_pole(z, &p, sector, sheet, tol).ok()).filter(|r| {
            let last = out.points.last().map(|q| q.pole.z).unwrap_or(r.z);
            (r.z - last).norm() <= 0.05 * (1.0 + last.norm()) && seed.map_or(true, |z| (r.z - z).norm() < radius)
        });
        let res = match from_seed {
            Some(r) => Some(r),
            None => {
                if k > 0 {
                    out.restarts.push(v);
                }
                let start = if k > 0 { target } else { approx_pole(&p, sector, branch, tol).ok() };
                start.and_then(|z| find_pole(z, &p, sector, sheet, tol).ok())
            }
        };
        match res {
            Some(pole) => out.points.push(TrajectoryPoint { parameter: v, pole }),
            None => out.failures.push(v),
        }
    }
    let im: Vec<f64> = out.points.iter().map(|p| p.pole.z.im).collect();
    for k in 0..im.len() {
        let left = if k > 0 { im[k - 1] } else { f64::NEG_INFINITY };
        let right = if k + 1 < im.len() { im[k + 1] } else { f64::NEG_INFINITY };
        if im[k] >= left && im[k] >= right && im[k] > -touch_tol {
            out.touchings.push(out.points[k].parameter);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub n: usize,
    pub d_c: f64,
    pub e_c: f64,
    pub nu_window: (u32, u32),
    pub chi_c: f64,
    pub epsilon_c: f64,
    /// sheet-II pole polished at (d_c, ε_c)
    pub pole_second: Option<PoleResult>,
    /// sheet-III pole polished at (d_c, ε_c)
    pub pole_third: Option<PoleResult>,
    /// |z_II − z_III|
    pub merge_gap: Option<f64>,
}

/// A symmetric-sector eigenvalue pair strictly between two resonances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealPair {
    pub d: f64,
    pub energies: (f64, f64),
    pub chis: (f64, f64),
}

/// The closest pair of neighbouring symmetric-sector roots inside
/// (E_ν, E_μ), if there are at least two.
///
/// Branch labels are not compared: near an avoided crossing of the leak
/// eigenvalues the two roots of one pair can sit on different labels.
pub fn symmetric_pair(n: usize, d: f64, nu: u32, mu: u32, tol: &Tolerances) -> Result<Option<RealPair>> {
    let lo = resonant_energy(nu, d)? * (1.0 + 1e-6);
    let hi = resonant_energy(mu, d)? * (1.0 - 1e-6);
    let sector = ParitySector::Symmetric;
    let nodes = theta_grid(lo, hi, d, tol.grid_points, &[]);
    let pts = track(&nodes, d, n, sector, tol)?;
    let sc = scan(&pts, d, n, sector, tol, true);
    let mut rs: Vec<(f64, f64)> = sc.roots.iter().map(|r| (r.e, -r.point.kappa[r.branch])).collect();
    rs.sort_by(|a, b| a.0.total_cmp(&b.0));
    rs.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-12 * b.0);
    let best = rs
        .windows(2)
        .min_by(|a, b| (a[1].0 - a[0].0).total_cmp(&(b[1].0 - b[0].0)))
        .map(|w| RealPair { d, energies: (w[0].0, w[1].0), chis: (w[0].1, w[1].1) });
    Ok(best)
}

/// Largest spacing below which a nonperturbative symmetric pair exists
/// between E_ν(d) and E_{ν+1}(d).
///
/// d is scanned down from 1 in steps of 5% until a pair appears, then
/// bisected to 1e−7. The sheet-II and sheet-III poles are polished at the
/// critical point as a cross-check.
pub fn critical_distance(n: usize, gamma: f64, nu: u32, tol: &Tolerances) -> Result<CriticalPoint> {
    if n < 3 {
        return Err(BicError::Domain(format!("critical spacing needs n ≥ 3, got {n}")));
    }
    let mut last_err = None;
    for mu in [nu + 1, nu + 2] {
        let mut hi = 1.0;
        if symmetric_pair(n, hi, nu, mu, tol)?.is_some() {
            return Err(BicError::Domain("a pair already exists at d = 1".into()));
        }
        let mut lo = hi;
        let mut found = None;
        while lo > 1e-3 {
            lo *= 0.95;
            if let Some(p) = symmetric_pair(n, lo, nu, mu, tol)? {
                found = Some(p);
                break;
            }
            hi = lo;
        }
        let Some(mut pair) = found else {
            last_err = Some(BicError::NoConvergence { message: format!("no pair between E_{nu} and E_{mu}"), trajectory: vec![] });
            continue;
        };
        while hi - lo > 1e-7 {
            let mid = 0.5 * (lo + hi);
            match symmetric_pair(n, mid, nu, mu, tol)? {
                Some(p) => {
                    lo = mid;
                    pair = p;
                }
                None => hi = mid,
            }
        }
        let e_c = 0.5 * (pair.energies.0 + pair.energies.1);
        let chi_c = 0.5 * (pair.chis.0 + pair.chis.1);
        let epsilon_c = epsilon_from_chi(chi_c, e_c, gamma)?;
        let d_c = lo;
        let params = EmitterArrayParams::new(n, epsilon_c, d_c, gamma)?;
        let small = 1e-9 * e_c;
        let sym = ParitySector::Symmetric;
        let p2 = find_pole(C64::new(e_c, -small), &params, sym, Sheet::Second, tol).ok();
        let p3 = find_pole(C64::new(e_c, small), &params, sym, Sheet::Third, tol).ok();
        let merge_gap = match (&p2, &p3) {
            (Some(a), Some(b)) => Some((a.z - b.z).norm()),
            _ => None,
        };
        return Ok(CriticalPoint {
            n,
            d_c,
            e_c,
            nu_window: (nu, mu),
            chi_c,
            epsilon_c,
            pole_second: p2,
            pole_third: p3,
            merge_gap,
        });
    }
    Err(last_err.expect("loop ran"))
}
