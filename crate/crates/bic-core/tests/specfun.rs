use bic_core::specfun::*;
use bic_core::spectrum::{field_norm, field_norm_spectral, solve_bic, SolveMode};
use bic_core::{EmitterArrayParams, ParitySector, Sheet, Tolerances, C64};
use std::f64::consts::PI;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const PHI: f64 = 0.4;

/// Trapezoid rule on the line Im w = PHI; the integrands are analytic and
/// decay exponentially, so the rule converges geometrically.
fn shifted_line<F: Fn(C64) -> C64>(f: F) -> C64 {
    let h = 0.005;
    let u_max = 45.0;
    let m = (2.0 * u_max / h) as i64;
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..=m {
        let u = -u_max + h * k as f64;
        acc += f(C64::new(u, PHI));
    }
    acc * h
}

/// Σ_m(E + i0) from (γ/2π)∫dk e^{ikx}/(ω(ω − E − i0)), x = m·d, with
/// k = sinh w and the pole at w = acosh E picked up as a residue.
fn sigma_reference(m: usize, e: f64, d: f64, gamma: f64) -> C64 {
    let x = m as f64 * d;
    let s = (e * e - 1.0).sqrt();
    let line = shifted_line(|w| (I * x * w.sinh()).exp() / (w.cosh() - e));
    gamma / (2.0 * PI) * (line + 2.0 * PI * I * (I * x * s).exp() / s)
}

/// (√γ/2π) PV∫dk e^{ikx}/(√ω (E − ω)), as the mean of the ±i0 prescriptions.
fn xi1_reference(x: f64, e: f64, gamma: f64) -> f64 {
    let x = x.abs();
    let s = (e * e - 1.0).sqrt();
    let line = shifted_line(|w| (I * x * w.sinh()).exp() * w.cosh().sqrt() / (e - w.cosh()));
    let v = gamma.sqrt() / (2.0 * PI) * (line + 2.0 * PI * e.sqrt() * (x * s).sin() / s);
    assert!(v.im.abs() < 1e-9, "principal value should be real, got {v}");
    v.re
}

#[test]
fn b0_closed_form_matches_quadrature() {
    let tol = Tolerances::default();
    for k in 0..40 {
        let e = 1.0 + 1e-4 * 10f64.powf(k as f64 * 6.0 / 39.0);
        let q = cut_term(0, C64::new(e, 0.0), 3.0, &tol).unwrap();
        let c = b0_closed(e).unwrap();
        assert!((q.re - c).abs() <= 1e-10 * c.abs().max(1e-3), "E={e}: {} vs {c}", q.re);
        assert!(q.im.abs() < 1e-14);
    }
}

#[test]
fn b0_closed_rejects_subthreshold() {
    assert!(b0_closed(0.9).is_err());
    assert!(b0_closed(f64::NAN).is_err());
}

#[test]
fn cut_terms_are_real_and_bounded() {
    let tol = Tolerances::default();
    for &(e, d) in &[(1.05, 2.0), (1.3, 5.0), (3.0, 0.5), (20.0, 0.1)] {
        let v = cut_vector(e, d, 6, &tol).unwrap().values;
        let b0 = v[0];
        for (j, bj) in v.iter().enumerate().skip(1) {
            assert!(bj.is_finite());
            assert!(bj.abs() <= (-(j as f64) * d).exp() * b0.abs() + 1e-15, "E={e} d={d} j={j}: {bj} vs b0={b0}");
        }
        for j in 1..6 {
            let c = cut_term(j, C64::new(e, 0.0), d, &tol).unwrap();
            assert!((c.re - v[j]).abs() <= 1e-10 * v[j].abs().max(1e-300) + 1e-300);
        }
    }
}

#[test]
fn self_energy_matches_contour_integral() {
    let tol = Tolerances::default();
    for &(e, d, n) in &[(1.2, 3.0, 3usize), (1.05, 7.0, 3), (2.5, 1.0, 4), (1.6, 0.4, 5)] {
        let p = EmitterArrayParams::new(n, 1.1, d, 0.03).unwrap();
        let sig = self_energy(C64::new(e, 0.0), &p, Sheet::First, &tol).unwrap();
        for m in 0..n {
            let r = sigma_reference(m, e, d, 0.03);
            let got = sig.row[m];
            assert!((got - r).norm() <= 1e-9 * (1.0 + r.norm()), "E={e} d={d} m={m}: {got} vs {r}");
        }
    }
}

#[test]
fn self_energy_schwarz_reflection() {
    let tol = Tolerances::default();
    let p = EmitterArrayParams::new(4, 1.2, 2.0, 0.02).unwrap();
    for &z in &[C64::new(1.3, 0.2), C64::new(2.0, 0.05), C64::new(5.0, 1.0)] {
        let up = self_energy(z, &p, Sheet::First, &tol).unwrap();
        let dn = self_energy(z.conj(), &p, Sheet::First, &tol).unwrap();
        for k in 0..4 {
            assert!((up.row[k].conj() - dn.row[k]).norm() <= 1e-11 * (1.0 + up.row[k].norm()));
        }
    }
}

#[test]
fn sheets_continue_across_the_cut() {
    let tol = Tolerances::default();
    let p = EmitterArrayParams::new(3, 1.2, 4.0, 0.02).unwrap();
    for &e in &[1.01, 1.2, 1.7, 3.0] {
        let above = self_energy(C64::new(e, 1e-13), &p, Sheet::First, &tol).unwrap();
        let below2 = self_energy(C64::new(e, -1e-13), &p, Sheet::Second, &tol).unwrap();
        let below = self_energy(C64::new(e, -1e-13), &p, Sheet::First, &tol).unwrap();
        let above3 = self_energy(C64::new(e, 1e-13), &p, Sheet::Third, &tol).unwrap();
        for k in 0..3 {
            assert!((above.row[k] - below2.row[k]).norm() <= 1e-9);
            assert!((below.row[k] - above3.row[k]).norm() <= 1e-9);
        }
    }
}

#[test]
fn sheet_discontinuities_are_opposite() {
    let tol = Tolerances::default();
    let p = EmitterArrayParams::new(4, 1.2, 3.0, 0.01).unwrap();
    for &z in &[C64::new(1.3, -0.1), C64::new(1.3, 0.1), C64::new(2.2, -0.01)] {
        let s1 = self_energy(z, &p, Sheet::First, &tol).unwrap();
        let s2 = self_energy(z, &p, Sheet::Second, &tol).unwrap();
        let s3 = self_energy(z, &p, Sheet::Third, &tol).unwrap();
        for k in 0..4 {
            let a = s2.row[k] - s1.row[k];
            let b = s3.row[k] - s1.row[k];
            assert!((a + b).norm() <= 1e-10 * (1.0 + a.norm()), "z={z} k={k}: {a} {b}");
            assert!((a - sheet_discontinuity(z, k, &p)).norm() <= 1e-10 * (1.0 + a.norm()));
        }
    }
}

#[test]
fn field_kernel_matches_principal_value() {
    let tol = Tolerances::default();
    for &e in &[1.05, 1.4, 3.0] {
        for &x in &[0.0, 0.3, 1.0, 2.5, 6.0] {
            let got = xi1(x, e, 0.02, &tol).unwrap();
            let want = xi1_reference(x, e, 0.02);
            assert!((got - want).abs() <= 1e-8 * (1.0 + want.abs()), "E={e} x={x}: {got} vs {want}");
        }
    }
}

#[test]
fn field_kernel_is_even_and_tends_to_markov_form() {
    let tol = Tolerances::default();
    let e = 1.2;
    for &x in &[0.5, 2.0, 4.0] {
        assert_eq!(xi1(x, e, 0.01, &tol).unwrap(), xi1(-x, e, 0.01, &tol).unwrap());
    }
    let far = xi1(30.0, e, 0.01, &tol).unwrap() - xi1_markov(30.0, e, 0.01).unwrap();
    assert!(far.abs() < 1e-12);
}

#[test]
fn chi_and_epsilon_are_inverse() {
    let p = EmitterArrayParams::new(3, 1.37, 2.0, 0.04).unwrap();
    for &e in &[1.01, 1.2, 2.0, 9.0] {
        let c = chi(e, &p).unwrap();
        let eps = chi_to_epsilon(c, e, &p).unwrap();
        assert!((eps - 1.37).abs() < 1e-13);
    }
}

#[test]
fn spectral_and_position_field_norms_agree() {
    let tol = Tolerances::default();
    for &(n, d, g) in &[(3usize, 7.0, 0.01), (4, 5.0, 0.03), (2, 3.0, 0.05)] {
        let p = EmitterArrayParams::new(n, 1.1, d, g).unwrap();
        let r = solve_bic(&p, None, SolveMode::Full, (1.0 + 1e-6, 2.0), &[], &tol).unwrap();
        assert!(!r.states.is_empty());
        for st in &r.states {
            let a = field_norm(st, &tol).unwrap();
            let b = field_norm_spectral(st, &tol).unwrap();
            assert!((a - b).abs() <= 1e-7 * (1.0 + a), "n={n} d={d} E={}: {a} vs {b}", st.energy);
        }
    }
}

#[test]
fn sector_label_round_trip() {
    for s in ParitySector::both() {
        assert_eq!(s.label().parse::<ParitySector>().unwrap(), s);
    }
}
