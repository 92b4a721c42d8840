//! Adaptive Gauss–Kronrod quadrature for vector-valued integrands.

use crate::error::{BicError, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub initial_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-11, rel_tol: 1e-12, max_subdivisions: 4000, initial_panels: 8 }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    err: Vec<f64>,
    worst: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.worst == other.worst
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.worst.total_cmp(&other.worst)
    }
}

fn gk15<F: FnMut(f64, &mut [f64])>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [f64], buf2: &mut [f64]) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    f(c, buf);
    for i in 0..dim {
        k[i] = WGK[7] * buf[i];
        g[i] = WG[3] * buf[i];
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        f(c - dx, buf);
        f(c + dx, buf2);
        for i in 0..dim {
            let s = buf[i] + buf2[i];
            k[i] += WGK[j] * s;
            if j % 2 == 1 {
                g[i] += WG[j / 2] * s;
            }
        }
    }
    let mut err = vec![0.0; dim];
    let mut worst: f64 = 0.0;
    for i in 0..dim {
        k[i] *= h;
        g[i] *= h;
        err[i] = (k[i] - g[i]).abs();
        worst = worst.max(err[i]);
    }
    Panel { a, b, value: k, err, worst }
}

/// Integrates a `dim`-component integrand over [a, b].
///
/// Each component must satisfy err ≤ max(abs_tol, rel_tol·|I|).
pub fn integrate<F: FnMut(f64, &mut [f64])>(mut f: F, a: f64, b: f64, dim: usize, opts: &QuadOptions) -> Result<Vec<f64>> {
    let mut buf = vec![0.0; dim];
    let mut buf2 = vec![0.0; dim];
    let mut heap = BinaryHeap::new();
    let np = opts.initial_panels.max(1);
    let w = (b - a) / np as f64;
    for p in 0..np {
        let lo = a + w * p as f64;
        let hi = if p + 1 == np { b } else { lo + w };
        heap.push(gk15(&mut f, lo, hi, dim, &mut buf, &mut buf2));
    }
    let mut total = vec![0.0; dim];
    let mut errs = vec![0.0; dim];
    for p in heap.iter() {
        for i in 0..dim {
            total[i] += p.value[i];
            errs[i] += p.err[i];
        }
    }
    let mut splits = 0;
    loop {
        let mut ok = true;
        let mut worst_ratio: f64 = 0.0;
        let mut worst_err: f64 = 0.0;
        let mut worst_req: f64 = 0.0;
        for i in 0..dim {
            let req = opts.abs_tol.max(opts.rel_tol * total[i].abs());
            if errs[i] > req {
                ok = false;
                if errs[i] / req > worst_ratio {
                    worst_ratio = errs[i] / req;
                    worst_err = errs[i];
                    worst_req = req;
                }
            }
        }
        if ok {
            return Ok(total);
        }
        if splits >= opts.max_subdivisions {
            return Err(BicError::Accuracy { achieved: worst_err, requested: worst_req });
        }
        let p = heap.pop().expect("non-empty panel heap");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            return Err(BicError::Accuracy { achieved: worst_err, requested: worst_req });
        }
        let l = gk15(&mut f, p.a, m, dim, &mut buf, &mut buf2);
        let r = gk15(&mut f, m, p.b, dim, &mut buf, &mut buf2);
        for i in 0..dim {
            total[i] += l.value[i] + r.value[i] - p.value[i];
            errs[i] = (errs[i] + l.err[i] + r.err[i] - p.err[i]).max(0.0);
        }
        heap.push(l);
        heap.push(r);
        splits += 1;
    }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<f64> {
    integrate(|t, out: &mut [f64]| out[0] = f(t), a, b, 1, opts).map(|v| v[0])
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss–Laguerre nodes and weights for ∫₀^∞ e^{-x} f(x) dx.
pub fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z: f64 = 0.0;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - x[i - 2])
            }
        };
        let mut pp = 0.0;
        let mut p2 = 0.0;
        for _ in 0..200 {
            let mut p1 = 1.0;
            p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0 - z) * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (p1 - p2) / z;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        w[i] = -1.0 / (pp * nf * p2);
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_polynomial_and_exponential() {
        let o = QuadOptions::default();
        let v = integrate_scalar(|x| x * x, 0.0, 3.0, &o).unwrap();
        assert!((v - 9.0).abs() < 1e-13);
        let v = integrate_scalar(|x| (-x).exp(), 0.0, 40.0, &o).unwrap();
        assert!((v - (1.0 - (-40f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn gk_vector_components() {
        let o = QuadOptions::default();
        let v = integrate(|x, out: &mut [f64]| { out[0] = x.cos(); out[1] = x.sin(); }, 0.0, 1.0, 2, &o).unwrap();
        assert!((v[0] - 1f64.sin()).abs() < 1e-14);
        assert!((v[1] - (1.0 - 1f64.cos())).abs() < 1e-14);
    }

    #[test]
    fn legendre_and_laguerre_rules() {
        let (x, w) = gauss_legendre(20);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(6)).sum();
        assert!((s - 2.0 / 7.0).abs() < 1e-14);
        let (x, w) = gauss_laguerre(30);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(3)).sum();
        assert!((s - 6.0).abs() < 1e-10, "{s}");
    }
}
