//! Double-precision quadrature: Gauss–Legendre rules and adaptive
//! Gauss–Kronrod (7/15) integration with tail truncation on infinite
//! intervals.

use alloc::vec::Vec;

use crate::error::{OpxError, Result};

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    let pi = core::f64::consts::PI;
    for i in 0..(n + 1) / 2 {
        let mut z = libm::cos(pi * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if libm::fabs(dz) < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (x.iter().map(|t| c + h * t).collect(), w.iter().map(|v| v * h).collect())
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, libm::fabs((kron - gauss) * h))
}

/// Adaptive Gauss–Kronrod on a finite interval. Returns (value, error estimate).
pub fn integrate_finite<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let mut parts: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(&mut f, a, b);
    parts.push((a, b, v, e));
    for _ in 0..4000 {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= tol.max(tol * libm::fabs(total)) || err < 1e-15 * libm::fabs(total) {
            return Ok((total, err));
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(OpxError::QuadratureFailure { achieved: err });
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    let err: f64 = parts.iter().map(|p| p.3).sum();
    Err(OpxError::QuadratureFailure { achieved: err })
}

/// Distance from `a` beyond which |f| stays below 1e-16 of its peak seen so far.
fn tail_extent<F: FnMut(f64) -> f64>(f: &mut F, a: f64, dir: f64) -> f64 {
    let mut peak = libm::fabs(f(a));
    let mut s = 0.25;
    let mut quiet = 0;
    while s < 1e6 {
        let v = libm::fabs(f(a + dir * s));
        peak = peak.max(v);
        if v <= 1e-16 * peak || v < 1e-300 {
            quiet += 1;
            if quiet == 2 {
                return s;
            }
        } else {
            quiet = 0;
        }
        s *= 1.5;
    }
    s
}

/// Integrates over [a, b] where either endpoint may be infinite; infinite
/// tails are truncated where the integrand falls below 1e-16 of its peak.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => integrate_finite(f, a, b, tol).map(|r| r.0),
        (true, false) => {
            let s = tail_extent(&mut f, a, 1.0);
            integrate_finite(f, a, a + s, tol).map(|r| r.0)
        }
        (false, true) => {
            let s = tail_extent(&mut f, b, -1.0);
            integrate_finite(f, b - s, b, tol).map(|r| r.0)
        }
        (false, false) => {
            let s1 = tail_extent(&mut f, 0.0, 1.0);
            let s2 = tail_extent(&mut f, 0.0, -1.0);
            let left = integrate_finite(&mut f, -s2, 0.0, tol * 0.5)?.0;
            let right = integrate_finite(&mut f, 0.0, s1, tol * 0.5)?.0;
            Ok(left + right)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(7);
        for k in 0..14 {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * libm::pow(*xi, k as f64)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k + 1) as f64 };
            assert!((q - exact).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn gaussian_over_real_line() {
        let v = integrate(|x| libm::exp(-x * x), f64::NEG_INFINITY, f64::INFINITY, 1e-13).unwrap();
        assert!((v - core::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        let v = integrate(|x| 1.0 / libm::sqrt(x), 0.0, 1.0, 1e-10).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn half_line_gamma() {
        let v = integrate(|x| x * x * x * libm::exp(-x), 0.0, f64::INFINITY, 1e-13).unwrap();
        assert!((v - 6.0).abs() < 1e-11);
    }
}
