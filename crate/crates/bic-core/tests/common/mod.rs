#![allow(dead_code)]

use bic_core::spectrum::{resonant_energy, solve_bic, BoundStateInContinuum, SolveMode};
use bic_core::specfun::cut_vector;
use bic_core::oracle::{confirmed_candidates, modes_for_cutoff, ConfirmedCandidate};
use bic_core::{EmitterArrayParams, ParitySector, Tolerances, C64};

pub fn tol() -> Tolerances {
    Tolerances::default()
}

/// Window between the midpoints to the neighbouring resonances.
pub fn window_around(nu: u32, d: f64) -> (f64, f64) {
    let e = resonant_energy(nu, d).unwrap();
    let lo = if nu > 1 { 0.5 * (resonant_energy(nu - 1, d).unwrap() + e) } else { 1.0 + 1e-9 };
    let hi = 0.5 * (e + resonant_energy(nu + 1, d).unwrap());
    (lo, hi)
}

pub fn solve(n: usize, d: f64, gamma: f64, sector: Option<ParitySector>, window: (f64, f64)) -> Vec<BoundStateInContinuum> {
    let p = EmitterArrayParams::new(n, 1.5, d, gamma).unwrap();
    solve_bic(&p, sector, SolveMode::Full, window, &[], &tol()).unwrap().states
}

pub fn closest(states: &[BoundStateInContinuum], e: f64) -> Option<&BoundStateInContinuum> {
    states.iter().min_by(|a, b| (a.energy - e).abs().total_cmp(&(b.energy - e).abs()))
}

pub fn ratio(st: &BoundStateInContinuum, j: usize, l: usize) -> f64 {
    let r = st.amplitudes[j] / st.amplitudes[l];
    assert!(r.im.abs() < 1e-9 * (1.0 + r.re.abs()));
    r.re
}

/// (measured E − E₁, predicted first-order shift) for the n = 3 symmetric state.
pub fn n3_symmetric_shift(d: f64) -> (f64, f64) {
    let e1 = resonant_energy(1, d).unwrap();
    let st = solve(3, d, 0.01, Some(ParitySector::Symmetric), window_around(1, d));
    let st = closest(&st, e1).expect("symmetric state near E₁");
    let b1 = cut_vector(e1, d, 2, &tol()).unwrap().values[1];
    let predicted = -((e1 * e1 - 1.0).sqrt() / (d * e1)) * b1;
    (st.energy - e1, predicted)
}

/// a₁/a₂ of the exact-resonance states at E_ν, for n = 4 and the given sector.
pub fn n4_golden_ratios(nu: u32, d: f64, sector: ParitySector) -> Vec<f64> {
    let e = resonant_energy(nu, d).unwrap();
    let st = solve(4, d, 0.01, Some(sector), window_around(nu, d));
    st.iter().filter(|s| s.exact_resonance && (s.energy - e).abs() <= 1e-12 * e).map(|s| ratio(s, 0, 1)).collect()
}

/// a₁/a₂ of the lowest n = 4 symmetric state below E₁.
pub fn n4_numerical_ratio(d: f64) -> Option<f64> {
    let e1 = resonant_energy(1, d).unwrap();
    let st = solve(4, d, 0.01, Some(ParitySector::Symmetric), window_around(1, d));
    st.iter().filter(|s| s.energy < e1 * (1.0 - 1e-12)).max_by(|a, b| a.energy.total_cmp(&b.energy)).map(|s| ratio(s, 0, 1))
}

pub fn golden() -> (f64, f64) {
    let r5 = 5f64.sqrt();
    (-(1.0 + r5) / 2.0, -(1.0 - r5) / 2.0)
}

/// Confirmed box candidate within `de` of the state's energy whose emitter
/// amplitudes overlap it most.
pub fn best_match<'a>(cands: &'a [ConfirmedCandidate], st: &BoundStateInContinuum, de: f64) -> Option<&'a ConfirmedCandidate> {
    let overlap = |c: &ConfirmedCandidate| {
        let a = &c.fine.amplitudes;
        let dot: C64 = a.iter().zip(&st.amplitudes).map(|(x, y)| x.conj() * y).sum();
        let na: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        dot.norm() / (na * st.amplitude_norm())
    };
    cands.iter().filter(|c| (c.fine.energy - st.energy).abs() <= de).max_by(|a, b| overlap(a).total_cmp(&overlap(b)))
}

pub fn box_candidates(p: &EmitterArrayParams, window: (f64, f64)) -> Vec<ConfirmedCandidate> {
    confirmed_candidates(p, 400.0, modes_for_cutoff(400.0, 100.0), window, 0.99, 2.0).unwrap()
}
