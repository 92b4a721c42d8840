//! The A_n matrix, the reflection transform and its parity blocks.

use crate::error::{BicError, Result};
use crate::params::ParitySector;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use std::f64::consts::FRAC_1_SQRT_2;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// [A_n]_{jl} = e^{i|j−l|θ} + iβ_{|j−l|}, with β₀ on the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMatrix {
    pub entries: DMatrix<C64>,
    pub theta: C64,
    pub beta0: C64,
    pub betas: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorBlock {
    pub sector: ParitySector,
    pub matrix: DMatrix<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullVector {
    pub vector: DVector<C64>,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

pub fn build_a(theta: C64, beta0: C64, betas: &[C64], n: usize) -> Result<ModelMatrix> {
    if betas.len() + 1 != n {
        return Err(BicError::SizeMismatch { expected: n - 1, got: betas.len() });
    }
    let row: Vec<C64> = (0..n)
        .map(|k| {
            let beta = if k == 0 { beta0 } else { betas[k - 1] };
            (I * theta * k as f64).exp() + I * beta
        })
        .collect();
    Ok(ModelMatrix {
        entries: DMatrix::from_fn(n, n, |j, l| row[j.abs_diff(l)]),
        theta,
        beta0,
        betas: betas.to_vec(),
    })
}

/// Real-argument convenience for [`build_a`].
pub fn build_a_real(theta: f64, chi: f64, b: &[f64]) -> ModelMatrix {
    let betas: Vec<C64> = b.iter().skip(1).map(|&v| C64::new(v, 0.0)).collect();
    build_a(C64::new(theta, 0.0), C64::new(chi, 0.0), &betas, b.len()).expect("length fixed by b")
}

/// Orthogonal reflection transform; rows ordered (antisymmetric, symmetric).
///
/// Antisymmetric rows are (e_i − e_{n+1−i})/√2 from the outermost pair
/// inwards. Symmetric rows start with the middle site for odd n and then
/// run over pairs (e_i + e_{n+1−i})/√2 from the innermost pair outwards.
pub fn parity_transform(n: usize) -> DMatrix<f64> {
    let h = n / 2;
    let mut u = DMatrix::zeros(n, n);
    let mut r = 0;
    for i in 0..h {
        u[(r, i)] = FRAC_1_SQRT_2;
        u[(r, n - 1 - i)] = -FRAC_1_SQRT_2;
        r += 1;
    }
    if n % 2 == 1 {
        u[(r, h)] = 1.0;
        r += 1;
    }
    for i in (0..h).rev() {
        u[(r, i)] = FRAC_1_SQRT_2;
        u[(r, n - 1 - i)] = FRAC_1_SQRT_2;
        r += 1;
    }
    u
}

/// Rows of the reflection transform spanning one sector.
pub fn sector_rows(n: usize, sector: ParitySector) -> DMatrix<f64> {
    let u = parity_transform(n);
    let h = n / 2;
    match sector {
        ParitySector::Antisymmetric => u.rows(0, h).into_owned(),
        ParitySector::Symmetric => u.rows(h, n - h).into_owned(),
    }
}

fn conjugate(a: &DMatrix<C64>) -> DMatrix<C64> {
    let u = parity_transform(a.nrows()).map(|v| C64::new(v, 0.0));
    &u * a * u.transpose()
}

/// U A Uᵀ split into (antisymmetric, symmetric) blocks.
pub fn block_decompose(a: &ModelMatrix) -> Result<(PropagatorBlock, PropagatorBlock)> {
    let n = a.entries.nrows();
    let h = n / 2;
    let c = conjugate(&a.entries);
    let norm = a.entries.norm().max(f64::MIN_POSITIVE);
    let mut off: f64 = 0.0;
    for j in 0..h {
        for l in h..n {
            off = off.max(c[(j, l)].norm()).max(c[(l, j)].norm());
        }
    }
    if off > 1e-12 * norm {
        return Err(BicError::Decomposition(off / norm));
    }
    Ok((
        PropagatorBlock { sector: ParitySector::Antisymmetric, matrix: c.view((0, 0), (h, h)).into_owned() },
        PropagatorBlock { sector: ParitySector::Symmetric, matrix: c.view((h, h), (n - h, n - h)).into_owned() },
    ))
}

/// One sector block of a Toeplitz-symmetric matrix given by its first row.
pub fn sector_block_from_row(row: &[C64], sector: ParitySector) -> DMatrix<C64> {
    let n = row.len();
    let a = DMatrix::from_fn(n, n, |j, l| row[j.abs_diff(l)]);
    let r = sector_rows(n, sector).map(|v| C64::new(v, 0.0));
    &r * a * r.transpose()
}

/// Right singular vector of the smallest singular value, phased so that its
/// largest-magnitude entry is real and positive.
pub fn null_vector(b: &DMatrix<C64>) -> NullVector {
    let m = b.ncols();
    if m == 0 {
        return NullVector { vector: DVector::zeros(0), sigma_min: 0.0, sigma_max: 0.0 };
    }
    let svd = b.clone().svd(false, true);
    let sv = &svd.singular_values;
    let (imin, _) = sv.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let sigma_max = sv.iter().cloned().fold(0.0, f64::max);
    let vt = svd.v_t.expect("requested right singular vectors");
    let mut v: DVector<C64> = vt.row(imin).adjoint();
    phase_fix(&mut v);
    NullVector { vector: v, sigma_min: sv[imin], sigma_max }
}

/// Scales a vector so its largest-magnitude component is real positive.
pub fn phase_fix(v: &mut DVector<C64>) {
    let mut best = 0;
    for i in 0..v.len() {
        if v[i].norm() > v[best].norm() * (1.0 + 1e-12) {
            best = i;
        }
    }
    let p = v[best];
    if p.norm() > 0.0 {
        let ph = p.conj() / p.norm();
        for x in v.iter_mut() {
            *x *= ph;
        }
    }
}

/// Maps a sector vector back to local emitter amplitudes (a = U_σᵀ v).
pub fn embed_to_local(v: &DVector<C64>, sector: ParitySector, n: usize) -> Result<DVector<C64>> {
    let size = sector.block_size(n);
    if v.len() != size {
        return Err(BicError::SizeMismatch { expected: size, got: v.len() });
    }
    let r = sector_rows(n, sector).map(|x| C64::new(x, 0.0));
    Ok(r.transpose() * v)
}
