mod common;

use bic_core::specfun::{b0_closed, cut_vector, theta_real};
use bic_core::spectrum::*;
use bic_core::{BicError, EmitterArrayParams, ParitySector, C64};
use common::*;
use std::f64::consts::PI;

#[test]
fn resonant_energy_values() {
    assert!((resonant_energy(1, PI).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    let mut prev = f64::INFINITY;
    for k in 1..40 {
        let e = resonant_energy(2, 0.5 * k as f64).unwrap();
        assert!(e < prev && e > 1.0);
        prev = e;
    }
    assert!(resonant_energy(0, 1.0).is_err());
    assert!(resonant_energy(1, 0.0).is_err());
}

#[test]
fn epsilon_constraint_values() {
    assert_eq!(epsilon_constraint(2, 3.0, 0.0).unwrap(), resonant_energy(2, 3.0).unwrap());
    let want = 2f64.sqrt() + 0.01 * (2f64.sqrt() - 1.0).ln() / PI;
    assert!((epsilon_constraint(1, PI, 0.01).unwrap() - want).abs() < 1e-14);
    assert!((epsilon_constraint(1, PI, 0.01).unwrap() - 1.411408).abs() < 1e-6);
}

#[test]
fn epsilon_constraint_is_chi_zero() {
    for &(nu, d, g) in &[(1u32, 4.0, 0.02), (2, 7.0, 0.01), (3, 2.5, 0.05)] {
        let e = resonant_energy(nu, d).unwrap();
        let eps = epsilon_constraint(nu, d, g).unwrap();
        let p = EmitterArrayParams::new(3, eps, d, g).unwrap();
        assert!(bic_core::specfun::chi(e, &p).unwrap().abs() < 1e-10);
    }
}

#[test]
fn nu_assignment_prefers_lower_on_ties() {
    let d = 3.0;
    let (e1, e2) = (resonant_energy(1, d).unwrap(), resonant_energy(2, d).unwrap());
    assert_eq!(nu_nearest(0.5 * (e1 + e2), d), 1);
    assert_eq!(nu_nearest(e2 * 0.999 + e1 * 0.001, d), 2);
    assert_eq!(nu_nearest(1.0001, d), 1);
}

#[test]
fn window_below_threshold_is_a_domain_error() {
    let p = EmitterArrayParams::new(3, 1.1, 7.0, 0.01).unwrap();
    let r = solve_bic(&p, None, SolveMode::Full, (0.5, 0.9), &[], &tol());
    assert!(matches!(r, Err(BicError::Domain(_))));
    let r = solve_bic(&p, None, SolveMode::Full, (1.3, 1.2), &[], &tol());
    assert!(matches!(r, Err(BicError::Domain(_))));
}

#[test]
fn seeds_outside_window_are_reported() {
    let p = EmitterArrayParams::new(3, 1.1, 7.0, 0.01).unwrap();
    let r = solve_bic(&p, None, SolveMode::Full, (1.0, 1.3), &[1.5], &tol()).unwrap();
    assert_eq!(r.unconverged.len(), 1);
    assert_eq!(r.unconverged[0].energy, 1.5);
}

#[test]
fn n3_antisymmetric_state_is_exactly_resonant() {
    let d = 7.0;
    let e1 = resonant_energy(1, d).unwrap();
    let st = solve(3, d, 0.01, Some(ParitySector::Antisymmetric), (1.0, 1.3));
    assert_eq!(st.len(), 1);
    let s = &st[0];
    assert!((s.energy - e1).abs() <= 1e-10);
    let b = cut_vector(e1, d, 3, &tol()).unwrap().values;
    assert!((s.chi - b[2]).abs() < 1e-12);
    let norm = s.amplitude_norm();
    let want = [1.0, 0.0, -1.0].map(|x| x / 2f64.sqrt());
    for (a, w) in s.amplitudes.iter().zip(want) {
        assert!((a / norm - C64::new(w, 0.0)).norm() < 1e-8);
    }
    let eps = exact_resonant_epsilons(3, 1, d, 0.01, &tol()).unwrap();
    let anti = eps.iter().find(|r| r.sector == ParitySector::Antisymmetric).unwrap();
    assert!(anti.hermitian);
    assert_eq!(anti.epsilons.len(), 1);
    assert!((anti.epsilons[0] - s.epsilon).abs() < 1e-12);
}

#[test]
fn n3_symmetric_shift_is_first_order() {
    for d in [4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0] {
        let (got, want) = n3_symmetric_shift(d);
        assert!(got < 0.0, "ν = 1 symmetric state must sit below E₁");
        assert!((got - want).abs() <= 10.0 * (-2.0 * d).exp(), "d={d}: {got} vs {want}");
    }
}

#[test]
fn n3_symmetric_amplitudes_near_two() {
    let d = 7.0;
    let st = solve(3, d, 0.01, Some(ParitySector::Symmetric), window_around(1, d));
    let s = closest(&st, resonant_energy(1, d).unwrap()).unwrap();
    // ν odd: a ∝ (1, 2, 1)
    assert!((ratio(s, 1, 0) - 2.0).abs() < 1e-2);
}

#[test]
fn n4_golden_ratios_odd_and_even() {
    let (gp, gm) = golden();
    for d in [5.0, 7.0, 10.0] {
        let bound = 5.0 * (-d as f64).exp();
        // odd ν symmetric: a₁/a₂ = −φ±; even ν antisymmetric: a₁/a₂ = +φ±
        for (nu, sector, sign) in [(1, ParitySector::Symmetric, 1.0), (2, ParitySector::Antisymmetric, -1.0)] {
            let mut r: Vec<f64> = n4_golden_ratios(nu, d, sector).iter().map(|x| sign * x).collect();
            r.sort_by(f64::total_cmp);
            assert_eq!(r.len(), 2, "d={d} ν={nu}");
            assert!((r[0] - gp).abs() <= bound, "d={d} ν={nu}: {} vs {gp}", r[0]);
            assert!((r[1] - gm).abs() <= bound, "d={d} ν={nu}: {} vs {gm}", r[1]);
        }
    }
}

#[test]
fn n4_approximants_track_exact_probability() {
    for &(d, g) in &[(4.0, 0.05), (7.0, 0.01), (9.0, 0.02)] {
        for nu in [1u32, 2] {
            let st = solve(4, d, g, None, window_around(nu, d));
            let mut seen = std::collections::HashSet::new();
            for s in st.iter().filter(|s| s.nu_nearest == nu) {
                let c = class_state(s).unwrap();
                seen.insert(c);
                let approx = probability_approximant(c, nu, d, g).unwrap();
                assert!((s.p - approx).abs() < 5e-3, "d={d} ν={nu} {c}: {} vs {approx}", s.p);
            }
            assert!(seen.len() >= 3, "d={d} ν={nu}: {seen:?}");
        }
    }
}

#[test]
fn n4_numerical_class_ratio() {
    for d in [2.0, 3.0, 4.0, 5.0, 6.0] {
        let r = n4_numerical_ratio(d).expect("state below E₁");
        assert!((0.25..=0.40).contains(&r), "d={d}: a₁/a₂ = {r}");
    }
}

#[test]
fn n2_resonance_holds_in_the_parity_sector() {
    for d in [1.5, 3.0, 6.0] {
        for nu in 1..=3u32 {
            let e = resonant_energy(nu, d).unwrap();
            let sector = if nu % 2 == 1 { ParitySector::Symmetric } else { ParitySector::Antisymmetric };
            let st = solve(2, d, 0.02, None, window_around(nu, d));
            let s = closest(&st, e).unwrap();
            assert!((s.energy - e).abs() < 1e-12 * e);
            assert_eq!(s.sector, Some(sector));
        }
    }
}

#[test]
fn resonant_epsilons_hermitian_sector_is_real() {
    for &(n, nu, d) in &[(3usize, 1u32, 3.0), (4, 1, 2.0), (4, 2, 2.0), (5, 2, 1.5), (6, 1, 2.5)] {
        let out = exact_resonant_epsilons(n, nu, d, 0.02, &tol()).unwrap();
        let herm: Vec<_> = out.iter().filter(|r| r.hermitian).collect();
        assert_eq!(herm.len(), 1);
        let h = herm[0];
        assert_eq!(h.epsilons.len(), h.sector.block_size(n));
        assert!(h.epsilons.iter().all(|e| e.is_finite()));
        let e = resonant_energy(nu, d).unwrap();
        for (chi, a) in h.chis.iter().zip(&h.amplitudes) {
            let b = cut_vector(e, d, n, &tol()).unwrap().values;
            let blk = sector_block(e, *chi, &b, d, h.sector);
            let nv = bic_core::parity::null_vector(&blk);
            assert!(nv.sigma_min < 1e-12, "n={n} ν={nu}");
            assert!(constraint_residual(a, theta_real(e, d)) < 1e-12);
        }
        for c in out.iter().filter(|r| !r.hermitian) {
            assert!(c.complex_epsilons.iter().any(|z| z.im.abs() > 1e-6), "n={n} ν={nu}");
        }
    }
}

#[test]
fn resonant_epsilons_collapse_at_large_spacing() {
    let (nu, d, g) = (1, 30.0, 0.01);
    let want = epsilon_constraint(nu, d, g).unwrap();
    for n in [3usize, 4, 5] {
        let out = exact_resonant_epsilons(n, nu, d, g, &tol()).unwrap();
        for r in out.iter().filter(|r| r.hermitian) {
            for e in &r.epsilons {
                assert!((e - want).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn large_spacing_eigenspace() {
    for n in 2..7usize {
        for nu in 1..4u32 {
            let d = 5.0;
            let p = EmitterArrayParams::new(n, 1.1, d, 0.01).unwrap();
            let e = resonant_energy(nu, d).unwrap();
            let r = solve_bic(&p, None, SolveMode::LargeSpacing, window_around(nu, d), &[], &tol()).unwrap();
            let st: Vec<_> = r.states.iter().filter(|s| s.energy == e).collect();
            assert_eq!(st.len(), n - 1, "n={n} ν={nu}");
            for s in &st {
                let sum: C64 = s.amplitudes.iter().enumerate().map(|(j, a)| if nu % 2 == 1 && j % 2 == 1 { -a } else { *a }).sum();
                assert!(sum.norm() <= 1e-10, "n={n} ν={nu}");
                assert!((s.p + s.field_norm - 1.0).abs() < 1e-6);
                assert!(s.constraint_residual <= 1e-10);
            }
            // distinct states are orthogonal within the atomic sector
            for i in 0..st.len() {
                for j in 0..i {
                    let ov: C64 = st[i].amplitudes.iter().zip(&st[j].amplitudes).map(|(a, b)| a.conj() * b).sum();
                    assert!(ov.norm() < 1e-10 * st[i].p);
                }
            }
        }
    }
}

#[test]
fn large_spacing_field_is_confined() {
    let (n, d) = (4usize, 6.0);
    let p = EmitterArrayParams::new(n, 1.1, d, 0.02).unwrap();
    let r = solve_bic(&p, None, SolveMode::LargeSpacing, (1.0, 1.6), &[], &tol()).unwrap();
    assert!(!r.states.is_empty());
    let span = (n - 1) as f64 * d;
    let grid: Vec<f64> = (0..=400).map(|k| -10.0 + (span + 20.0) * k as f64 / 400.0).collect();
    for s in &r.states {
        let f = field_wavefunction(s, &grid, &tol()).unwrap();
        let m = f.max_abs();
        for (x, v) in f.x.iter().zip(&f.values) {
            if *x < 0.0 || *x > span {
                assert!(v.norm() <= 1e-10 * m, "x={x}");
            }
        }
    }
}

#[test]
fn n3_antisymmetric_field_nodes() {
    let d = 7.0;
    let st = solve(3, d, 0.01, Some(ParitySector::Antisymmetric), (1.0, 1.3));
    let s = &st[0];
    let f = field_wavefunction(s, &[0.0, d, 2.0 * d, 0.5 * d, 1.5 * d], &tol()).unwrap();
    let peak = f.values[3].norm();
    assert!(peak > 0.0);
    assert!((f.values[3] + f.values[4]).norm() < 1e-12 * peak);
    assert!(f.values[1].norm() < 1e-12 * peak);
    // the evanescent part leaves a small cusp at the outer emitters
    assert!(f.values[0].norm() < 0.06 * peak);
    assert!(f.values[2].norm() < 0.06 * peak);
    let outside = field_wavefunction(s, &[-3.0, 2.0 * d + 3.0], &tol()).unwrap();
    for v in &outside.values {
        assert!(v.norm() < 1e-3 * peak);
    }
}

#[test]
fn approximants_approach_one_as_coupling_vanishes() {
    for class in [ProbabilityClass::N3Symmetric, ProbabilityClass::N3Antisymmetric, ProbabilityClass::N4Persistent] {
        let p = probability_approximant(class, 1, 4.0, 1e-9).unwrap();
        assert!((p - 1.0).abs() < 1e-7);
    }
    assert!("bogus".parse::<ProbabilityClass>().is_err());
}

#[test]
fn b0_is_what_the_threshold_formula_says() {
    let e = 1.3;
    assert!((b0_closed(e).unwrap() + (e - (e * e - 1.0f64).sqrt()).ln() / PI).abs() < 1e-15);
}

#[test]
fn lines_n3_symmetric_below_antisymmetric_at_small_spacing() {
    let r = spectral_lines(3, 0.01, (1.0, 2.0), 10, (1.0 + 1e-6, 5.0), &tol()).unwrap();
    for d in [1.0, 1.5, 2.0] {
        let e1 = resonant_energy(1, d).unwrap();
        let at: Vec<&LinePoint> = r.points.iter().filter(|p| (p.d - d).abs() < 1e-12 && p.nu == 1).collect();
        let a = at.iter().find(|p| p.sector == ParitySector::Antisymmetric).expect("antisymmetric ν=1");
        let s = at.iter().filter(|p| p.sector == ParitySector::Symmetric).min_by(|x, y| (x.energy - e1).abs().total_cmp(&(y.energy - e1).abs())).unwrap();
        assert!(s.energy < a.energy, "d={d}");
        assert!((a.energy - e1).abs() < 1e-12 * e1);
    }
}

#[test]
fn lines_n4_lowest_branch_is_numerical_symmetric_state() {
    let r = spectral_lines(4, 0.01, (1.0, 2.0), 4, (1.0 + 1e-6, 6.0), &tol()).unwrap();
    for k in 0..=4 {
        let d = 1.0 + 0.25 * k as f64;
        let low = r.points.iter().filter(|p| (p.d - d).abs() < 1e-12).min_by(|a, b| a.energy.total_cmp(&b.energy)).unwrap();
        assert_eq!(low.sector, ParitySector::Symmetric, "d={d}");
        assert!(low.energy < resonant_energy(1, d).unwrap());
    }
}

#[test]
fn lines_branches_converge_to_resonances() {
    for n in [3usize, 4] {
        let r = spectral_lines(n, 0.01, (4.0, 10.0), 24, (1.0 + 1e-6, 1.6), &tol()).unwrap();
        assert!(r.gaps.is_empty(), "{:?}", r.gaps);
        for label in r.labels() {
            let pts = r.branch(&label);
            let dev: Vec<f64> = pts.iter().map(|p| (p.energy - resonant_energy(p.nu, p.d).unwrap()).abs()).collect();
            if dev.iter().all(|&x| x <= 1e-13) {
                continue;
            }
            for w in dev.windows(2) {
                assert!(w[1] <= w[0], "n={n} branch {label}: {dev:?}");
            }
            for (p, x) in pts.iter().zip(&dev) {
                assert!(*x <= 2.0 * (-p.d).exp(), "n={n} branch {label} d={}", p.d);
            }
        }
    }
}

#[test]
fn lines_reject_bad_range() {
    assert!(spectral_lines(3, 0.01, (0.0, 2.0), 4, (1.0, 2.0), &tol()).is_err());
    assert!(spectral_lines(3, 0.01, (2.0, 1.0), 4, (1.0, 2.0), &tol()).is_err());
}
