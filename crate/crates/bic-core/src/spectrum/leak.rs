//! Real reformulation of the sector singularity condition.
//!
//! At real E the sector block splits as A_σ = r rᵀ + i(K_σ + χ), with K_σ real
//! symmetric and r the leak vector. A_σ is singular iff some eigenvector of
//! K_σ is orthogonal to r, and then χ is minus its eigenvalue.

use crate::error::Result;
use crate::params::{ParitySector, Tolerances};
use crate::parity::sector_rows;
use crate::roots::{brent, minimize};
use crate::specfun::{cut_vector, theta_real};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct SectorPoint {
    pub e: f64,
    pub theta: f64,
    /// eigenvalues of K_σ, ascending
    pub kappa: Vec<f64>,
    /// matching eigenvectors as columns
    pub vecs: DMatrix<f64>,
    pub leak: DVector<f64>,
    /// factor vanishing at the resonances where the whole leak vector vanishes
    pub w: f64,
    pub b: Vec<f64>,
}

impl SectorPoint {
    /// Leak of branch i with the exact-resonance zeros divided out.
    pub fn g(&self, i: usize) -> f64 {
        let raw = self.leak.dot(&self.vecs.column(i));
        if self.w == 0.0 {
            raw
        } else {
            raw / self.w
        }
    }

    pub fn raw_leak(&self, i: usize) -> f64 {
        self.leak.dot(&self.vecs.column(i))
    }
}

/// Whether the whole leak vector of `sector` vanishes at θ = νπ.
pub fn is_resonant_sector(n: usize, nu: u32, sector: ParitySector) -> bool {
    if n % 2 == 1 {
        sector == ParitySector::Antisymmetric
    } else if nu % 2 == 1 {
        sector == ParitySector::Symmetric
    } else {
        sector == ParitySector::Antisymmetric
    }
}

/// Smooth factor with simple zeros exactly at the resonances of `sector`.
pub fn resonance_factor(theta: f64, n: usize, sector: ParitySector) -> f64 {
    match (n % 2, sector) {
        (1, ParitySector::Antisymmetric) => theta.sin(),
        (1, ParitySector::Symmetric) => 1.0,
        (_, ParitySector::Symmetric) => (0.5 * theta).cos(),
        (_, ParitySector::Antisymmetric) => (0.5 * theta).sin(),
    }
}

/// K_σ, its eigen-decomposition and the leak vector at real E.
pub fn sector_point(e: f64, d: f64, n: usize, sector: ParitySector, tol: &Tolerances) -> Result<SectorPoint> {
    let b = cut_vector(e, d, n, tol)?.values;
    let th = theta_real(e, d);
    let k = DMatrix::from_fn(n, n, |j, l| {
        let m = j.abs_diff(l);
        if m == 0 {
            0.0
        } else {
            (m as f64 * th).sin() + b[m]
        }
    });
    let r = sector_rows(n, sector);
    let ks = &r * k * r.transpose();
    let mid = 0.5 * (n as f64 - 1.0);
    let raw = DVector::from_fn(n, |j, _| {
        let x = (j as f64 - mid) * th;
        match sector {
            ParitySector::Symmetric => x.cos(),
            ParitySector::Antisymmetric => x.sin(),
        }
    });
    let leak = &r * raw;
    let eig = SymmetricEigen::new(ks);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let kappa = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let m = order.len();
    let vecs = DMatrix::from_fn(m, m, |row, col| eig.eigenvectors[(row, order[col])]);
    let w = resonance_factor(th, n, sector);
    Ok(SectorPoint { e, theta: th, kappa, vecs, leak, w, b })
}

/// Flips eigenvector signs to follow `prev`; returns the smallest |overlap|.
fn align(p: &mut SectorPoint, prev: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 1.0;
    for i in 0..p.vecs.ncols() {
        let dot = p.vecs.column(i).dot(&prev.column(i));
        worst = worst.min(dot.abs());
        if dot < 0.0 {
            let mut c = p.vecs.column_mut(i);
            c.neg_mut();
        }
    }
    worst
}

/// Evaluates the sector system along `nodes` (ascending) with continuous
/// eigenvector signs, bisecting steps where the eigenbasis rotates too fast.
pub fn track(nodes: &[f64], d: f64, n: usize, sector: ParitySector, tol: &Tolerances) -> Result<Vec<SectorPoint>> {
    let pts: Vec<Result<SectorPoint>> = nodes.par_iter().map(|&e| sector_point(e, d, n, sector, tol)).collect();
    let mut pending: Vec<SectorPoint> = pts.into_iter().collect::<Result<Vec<_>>>()?;
    pending.reverse();
    let mut out: Vec<SectorPoint> = Vec::with_capacity(nodes.len());
    while let Some(mut p) = pending.pop() {
        if let Some(prev) = out.last() {
            let mut trial = p.clone();
            let worst = align(&mut trial, &prev.vecs);
            if worst < 0.9 && trial.e - prev.e > 1e-12 * trial.e {
                let mid = 0.5 * (prev.e + trial.e);
                pending.push(p);
                pending.push(sector_point(mid, d, n, sector, tol)?);
                continue;
            }
            p = trial;
        } else {
            // deterministic initial orientation: largest component positive
            for i in 0..p.vecs.ncols() {
                let col = p.vecs.column(i);
                let imax = col.iamax();
                if col[imax] < 0.0 {
                    p.vecs.column_mut(i).neg_mut();
                }
            }
        }
        out.push(p);
    }
    Ok(out)
}

/// Signed leak of branch i at E, oriented along `reference`.
pub fn leak_at(e: f64, i: usize, reference: &DVector<f64>, d: f64, n: usize, sector: ParitySector, tol: &Tolerances) -> Result<(f64, SectorPoint)> {
    let p = sector_point(e, d, n, sector, tol)?;
    let col = p.vecs.column(i);
    let s = if col.dot(reference) < 0.0 { -1.0 } else { 1.0 };
    Ok((s * p.g(i), p))
}

#[derive(Debug, Clone)]
pub struct LeakRoot {
    pub e: f64,
    pub branch: usize,
    pub point: SectorPoint,
}

#[derive(Debug, Clone, Copy)]
pub struct LeakExtremum {
    pub e: f64,
    pub branch: usize,
    /// signed depth: negative means the branch crosses zero twice nearby
    pub depth: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Default)]
pub struct LeakScan {
    pub roots: Vec<LeakRoot>,
    pub extrema: Vec<LeakExtremum>,
    pub failures: Vec<(f64, String)>,
}

fn refine_root(lo: f64, hi: f64, i: usize, reference: &DVector<f64>, d: f64, n: usize, sector: ParitySector, tol: &Tolerances) -> Result<LeakRoot> {
    let e = brent(
        |e| Ok(leak_at(e, i, reference, d, n, sector, tol)?.0),
        lo,
        hi,
        tol.root_tol * hi,
        200,
    )?;
    let (_, point) = leak_at(e, i, reference, d, n, sector, tol)?;
    let mut point = point;
    if point.vecs.column(i).dot(reference) < 0.0 {
        point.vecs.column_mut(i).neg_mut();
    }
    Ok(LeakRoot { e, branch: i, point })
}

/// All sign changes of the tracked leak functions, plus refined local
/// extrema of |g| that do not change sign on the grid.
pub fn scan(pts: &[SectorPoint], d: f64, n: usize, sector: ParitySector, tol: &Tolerances, extrema: bool) -> LeakScan {
    let mut out = LeakScan::default();
    if pts.len() < 2 {
        return out;
    }
    let m = pts[0].vecs.ncols();
    for i in 0..m {
        let g: Vec<f64> = pts.iter().map(|p| p.g(i)).collect();
        for k in 0..pts.len() - 1 {
            if g[k] == 0.0 {
                out.roots.push(LeakRoot { e: pts[k].e, branch: i, point: pts[k].clone() });
                continue;
            }
            if g[k] * g[k + 1] < 0.0 {
                let reference = pts[k].vecs.column(i).into_owned();
                match refine_root(pts[k].e, pts[k + 1].e, i, &reference, d, n, sector, tol) {
                    Ok(r) => out.roots.push(r),
                    Err(e) => out.failures.push((pts[k].e, e.to_string())),
                }
            }
        }
        if !extrema {
            continue;
        }
        for k in 1..pts.len() - 1 {
            let a = g[k].abs();
            if !(a <= g[k - 1].abs() && a <= g[k + 1].abs()) {
                continue;
            }
            if g[k - 1] * g[k] <= 0.0 || g[k] * g[k + 1] <= 0.0 {
                continue;
            }
            let sgn = g[k].signum();
            let reference = pts[k].vecs.column(i).into_owned();
            let (lo, hi) = (pts[k - 1].e, pts[k + 1].e);
            let res = minimize(
                |e| Ok(sgn * leak_at(e, i, &reference, d, n, sector, tol)?.0),
                lo,
                hi,
                1e-13 * hi,
                200,
            );
            match res {
                Ok((emin, hmin)) => {
                    let kappa = sector_point(emin, d, n, sector, tol).map(|p| p.kappa[i]).unwrap_or(f64::NAN);
                    out.extrema.push(LeakExtremum { e: emin, branch: i, depth: hmin, kappa });
                    if hmin < 0.0 {
                        for (a, b) in [(lo, emin), (emin, hi)] {
                            match refine_root(a, b, i, &reference, d, n, sector, tol) {
                                Ok(r) => out.roots.push(r),
                                Err(e) => out.failures.push((a, e.to_string())),
                            }
                        }
                    }
                }
                Err(e) => out.failures.push((pts[k].e, e.to_string())),
            }
        }
    }
    out
}

/// Grid uniform in θ over [e_lo, e_hi] with at least `min_points` nodes and
/// at least 20 nodes per π of phase.
pub fn theta_grid(e_lo: f64, e_hi: f64, d: f64, min_points: usize, extra: &[f64]) -> Vec<f64> {
    let t0 = theta_real(e_lo, d);
    let t1 = theta_real(e_hi, d);
    let per_pi = ((t1 - t0) / std::f64::consts::PI * 20.0).ceil() as usize;
    let np = min_points.max(per_pi).max(2);
    let mut nodes: Vec<f64> = (0..np)
        .map(|k| {
            let t = t0 + (t1 - t0) * k as f64 / (np - 1) as f64;
            (1.0 + (t / d).powi(2)).sqrt()
        })
        .collect();
    nodes[0] = e_lo;
    nodes[np - 1] = e_hi;
    for &x in extra {
        if x > e_lo && x < e_hi {
            nodes.push(x);
        }
    }
    nodes.sort_by(f64::total_cmp);
    nodes.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
    nodes
}
