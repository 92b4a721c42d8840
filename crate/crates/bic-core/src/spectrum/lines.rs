//! Spectral lines in the (E, d) plane.

use super::{nu_nearest, sector_roots, SectorRoot};
use crate::error::{BicError, Result};
use crate::params::{ParitySector, Tolerances};
use crate::specfun::epsilon_from_chi;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinePoint {
    pub d: f64,
    pub energy: f64,
    pub chi: f64,
    pub epsilon: f64,
    pub sector: ParitySector,
    pub nu: u32,
    /// `<sector><ν>.<k>`, k ordering the roots of one (sector, ν) group by χ
    pub branch: String,
    pub exact_resonance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchGap {
    pub branch: String,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinesReport {
    pub points: Vec<LinePoint>,
    pub gaps: Vec<BranchGap>,
}

impl LinesReport {
    /// Points of one branch ordered by d.
    pub fn branch(&self, label: &str) -> Vec<&LinePoint> {
        let mut v: Vec<&LinePoint> = self.points.iter().filter(|p| p.branch == label).collect();
        v.sort_by(|a, b| a.d.total_cmp(&b.d));
        v
    }

    pub fn labels(&self) -> Vec<String> {
        let mut v: Vec<String> = self.points.iter().map(|p| p.branch.clone()).collect();
        v.sort();
        v.dedup();
        v
    }
}

fn label_points(d: f64, gamma: f64, roots: &[SectorRoot]) -> Result<Vec<LinePoint>> {
    let mut groups: BTreeMap<(u8, u32), Vec<&SectorRoot>> = BTreeMap::new();
    for r in roots {
        let key = (if r.sector == ParitySector::Symmetric { 1 } else { 0 }, nu_nearest(r.energy, d));
        groups.entry(key).or_default().push(r);
    }
    let mut out = vec![];
    for ((_, nu), mut rs) in groups {
        rs.sort_by(|a, b| a.chi.total_cmp(&b.chi));
        for (k, r) in rs.iter().enumerate() {
            out.push(LinePoint {
                d,
                energy: r.energy,
                chi: r.chi,
                epsilon: epsilon_from_chi(r.chi, r.energy, gamma)?,
                sector: r.sector,
                nu,
                branch: format!("{}{}.{}", r.sector.label(), nu, k),
                exact_resonance: r.exact_resonance,
            });
        }
    }
    Ok(out)
}

/// Roots of both sectors at every d of a uniform grid, labelled into branches.
///
/// A branch seen on both neighbours of a grid point but not at the point
/// itself triggers a seeded rescan there; if it is still missing a gap is
/// recorded.
pub fn spectral_lines(
    n: usize,
    gamma: f64,
    d_range: (f64, f64),
    steps: usize,
    window: (f64, f64),
    tol: &Tolerances,
) -> Result<LinesReport> {
    let (d0, d1) = d_range;
    if !(d0 > 0.0 && d1 >= d0) || steps == 0 {
        return Err(BicError::Domain(format!("invalid spacing range [{d0}, {d1}] with {steps} steps")));
    }
    let ds: Vec<f64> = (0..=steps).map(|k| d0 + (d1 - d0) * k as f64 / steps as f64).collect();
    let solve = |d: f64, seeds: &[f64]| -> Result<Vec<LinePoint>> {
        let mut all = vec![];
        for sector in ParitySector::both() {
            if sector.block_size(n) == 0 {
                continue;
            }
            all.extend(sector_roots(n, d, sector, window, seeds, tol)?.0);
        }
        label_points(d, gamma, &all)
    };
    let mut rows: Vec<Vec<LinePoint>> = ds.par_iter().map(|&d| solve(d, &[])).collect::<Result<_>>()?;
    let mut gaps = vec![];
    for k in 1..ds.len().saturating_sub(1) {
        let has = |row: &Vec<LinePoint>, l: &str| row.iter().any(|p| p.branch == l);
        let missing: Vec<String> = rows[k - 1]
            .iter()
            .map(|p| p.branch.clone())
            .filter(|l| has(&rows[k + 1], l) && !has(&rows[k], l))
            .collect();
        if missing.is_empty() {
            continue;
        }
        let seeds: Vec<f64> = rows[k - 1].iter().chain(rows[k + 1].iter()).map(|p| p.energy).collect();
        rows[k] = solve(ds[k], &seeds)?;
        for l in missing {
            if !has(&rows[k], &l) {
                gaps.push(BranchGap { branch: l, d: ds[k] });
            }
        }
    }
    let mut points: Vec<LinePoint> = rows.into_iter().flatten().collect();
    points.sort_by(|a, b| a.d.total_cmp(&b.d).then(a.energy.total_cmp(&b.energy)));
    Ok(LinesReport { points, gaps })
}
