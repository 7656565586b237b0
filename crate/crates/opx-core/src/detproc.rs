//! Determinantal point processes driven by Christoffel–Darboux kernels:
//! correlation functions, joint densities, expected counts, Fredholm gap
//! probabilities and non-intersecting Brownian-motion kernels.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, OpxError, Result};
use crate::linalg;
use crate::mop::{solve_type_i, solve_type_ii, MOPSystem, MopWeight, MultiIndex, SystemClass};
use crate::opcore::{cd_kernel, KernelMode, KernelOperator, RecurrenceCoefficients};
use crate::quad;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorrelationResult {
    pub k: usize,
    pub points: Vec<f64>,
    pub value: f64,
}

fn weighted_matrix(kernel: &KernelOperator, points: &[f64]) -> Result<Vec<Vec<f64>>> {
    let k = kernel.with_mode(KernelMode::Weighted);
    points.iter().map(|&x| points.iter().map(|&y| cd_kernel(&k, x, y)).collect()).collect()
}

/// ρ_k(x_1, ..., x_k) = det(K(x_i, x_j)) with the weighted kernel.
pub fn correlation_k(kernel: &KernelOperator, points: &[f64]) -> Result<CorrelationResult> {
    if points.len() > kernel.n {
        return Err(invalid(format!("k = {} exceeds n = {}", points.len(), kernel.n)));
    }
    let value = if points.is_empty() { 1.0 } else { linalg::det(weighted_matrix(kernel, points)?) };
    Ok(CorrelationResult { k: points.len(), points: points.to_vec(), value })
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn check_size(kernel: &KernelOperator, points: &[f64]) -> Result<()> {
    if points.len() != kernel.n {
        return Err(invalid(format!("expected {} points, got {}", kernel.n, points.len())));
    }
    Ok(())
}

/// (1/n!) det(K(x_i, x_j)).
pub fn joint_density(kernel: &KernelOperator, points: &[f64]) -> Result<f64> {
    check_size(kernel, points)?;
    Ok(linalg::det(weighted_matrix(kernel, points)?) / factorial(kernel.n))
}

/// D_n = Π_{k<n} h_k with h_k = m0 a_1² ⋯ a_k².
pub fn hankel_from_recurrence(rec: &RecurrenceCoefficients<f64>, n: usize) -> f64 {
    let mut h = rec.m0;
    let mut d = 1.0;
    for k in 0..n {
        if k > 0 {
            h *= rec.a_sq[k - 1];
        }
        d *= h;
    }
    d
}

/// Δ(x)² Π w(x_i) / (n! D_n).
pub fn joint_density_vandermonde(kernel: &KernelOperator, points: &[f64]) -> Result<f64> {
    check_size(kernel, points)?;
    let mut w = 1.0;
    for &x in points {
        if !kernel.weight.contains(x) {
            return Err(OpxError::OutsideDomain { x });
        }
        w *= kernel.weight.density(x);
    }
    let v = crate::opcore::vandermonde(points);
    Ok(v * v * w / (factorial(kernel.n) * hankel_from_recurrence(&kernel.recurrence, kernel.n)))
}

fn check_interval(kernel: &KernelOperator, a: f64, b: f64) -> Result<()> {
    let (lo, hi) = kernel.weight.domain;
    if a.is_nan() || b.is_nan() || a > b {
        return Err(invalid(format!("invalid interval [{a}, {b}]")));
    }
    for v in [a, b] {
        if v < lo || v > hi {
            return Err(OpxError::OutsideDomain { x: v });
        }
    }
    Ok(())
}

/// E N([a, b]) = ∫_a^b K_n(x, x) w(x) dx.
pub fn expected_count(kernel: &KernelOperator, a: f64, b: f64) -> Result<f64> {
    check_interval(kernel, a, b)?;
    let k = kernel.with_mode(KernelMode::Weighted);
    let f = |x: f64| k.sum_form(x, x).unwrap_or(0.0);
    quad::integrate(f, a, b, 1e-12)
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GapQuery {
    pub interval: (f64, f64),
    pub quad_order: usize,
    pub result: f64,
    pub order_sequence: Vec<usize>,
    pub values: Vec<f64>,
    pub converged: bool,
}

pub const GAP_TOL: f64 = 1e-8;
const GAP_DOUBLINGS: usize = 4;

/// det(I - K_A) on an m-point Gauss–Legendre discretization of [a, b].
pub fn fredholm_det(kernel: &KernelOperator, a: f64, b: f64, m: usize) -> Result<f64> {
    let (x, w) = quad::gauss_legendre_on(m, a, b);
    let k = weighted_matrix(kernel, &x)?;
    let mat: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let v = -libm::sqrt(w[i] * w[j]) * k[i][j];
                    if i == j {
                        1.0 + v
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    Ok(linalg::det(mat))
}

/// Probability of no points in [a, b], doubling the order until two
/// successive values agree to 1e-8.
pub fn gap_probability(kernel: &KernelOperator, a: f64, b: f64, quad_order: usize) -> Result<GapQuery> {
    if quad_order < 10 {
        return Err(invalid("quadrature order must be at least 10"));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(invalid("gap intervals must be finite"));
    }
    check_interval(kernel, a, b)?;
    if a == b {
        return Ok(GapQuery {
            interval: (a, b),
            quad_order,
            result: 1.0,
            order_sequence: vec![quad_order],
            values: vec![1.0],
            converged: true,
        });
    }
    let mut orders = vec![quad_order];
    let mut values = vec![fredholm_det(kernel, a, b, quad_order)?];
    let mut m = quad_order;
    for _ in 0..GAP_DOUBLINGS {
        m *= 2;
        let v = fredholm_det(kernel, a, b, m)?;
        let prev = values[values.len() - 1];
        orders.push(m);
        values.push(v);
        if (v - prev).abs() < GAP_TOL {
            return Ok(GapQuery { interval: (a, b), quad_order: m, result: v, order_sequence: orders, values, converged: true });
        }
    }
    let n = values.len();
    Err(OpxError::NoConvergence { iterations: GAP_DOUBLINGS, last_change: (values[n - 1] - values[n - 2]).abs() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Endpoints {
    /// All paths end at 0.
    Single,
    /// Half the paths end at -b, half at +b.
    Double { b: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NibmKernelSpec {
    pub n: usize,
    pub t: f64,
    pub endpoints: Endpoints,
}

/// Precomputed NIBM kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct NibmKernel {
    pub spec: NibmKernelSpec,
    inner: NibmInner,
}

#[derive(Clone, Debug, PartialEq)]
enum NibmInner {
    Single(RecurrenceCoefficients<f64>),
    /// Pairs (P_{n_k}, A_{n_{k+1}}) along the step-line path, plus the shifts
    /// c_j and the normalization factor.
    Double { terms: Vec<(Vec<f64>, Vec<Vec<f64>>)>, c: [f64; 2], scale: f64 },
}

fn orthonormal_hermite(rec: &RecurrenceCoefficients<f64>, n: usize, x: f64) -> Vec<f64> {
    crate::opcore::eval_poly(rec, n, &x, crate::opcore::Normalization::Orthonormal).unwrap_or_else(|_| vec![f64::NAN; n + 1])
}

impl NibmKernel {
    pub fn new(spec: NibmKernelSpec) -> Result<Self> {
        if !(spec.t > 0.0 && spec.t < 1.0) {
            return Err(invalid(format!("t = {} is not in (0, 1)", spec.t)));
        }
        if spec.n == 0 {
            return Err(invalid("at least one path is required"));
        }
        let inner = match spec.endpoints {
            Endpoints::Single => NibmInner::Single(RecurrenceCoefficients::hermite(spec.n)),
            Endpoints::Double { b } => {
                if spec.n % 2 != 0 {
                    return Err(invalid("double endpoints need an even number of paths"));
                }
                if !(b.is_finite() && b != 0.0) {
                    return Err(invalid("double endpoints need b ≠ 0"));
                }
                let c = [-2.0 * b, 2.0 * b];
                let weights = c.iter().map(|&c| MopWeight::GaussShift { c }).collect();
                let bits = 128 + 16 * spec.n;
                let system = MOPSystem::new(weights, SystemClass::AtSystem, 2 * spec.n + 4, bits)?;
                let mut terms = Vec::with_capacity(spec.n);
                let mut cur = MultiIndex::zero(2);
                for k in 0..spec.n {
                    let next = cur.plus(k % 2);
                    let p = solve_type_ii(&system, &cur)?.coeffs_f64();
                    let q = solve_type_i(&system, &next)?;
                    let a = q.a.iter().map(|v| v.iter().map(|z| z.to_f64()).collect()).collect();
                    terms.push((p, a));
                    cur = next;
                }
                let mut kern = NibmKernel { spec, inner: NibmInner::Double { terms, c, scale: 1.0 } };
                let mass = quad::integrate(|x| kern.eval(x, x), f64::NEG_INFINITY, f64::INFINITY, 1e-13)?;
                if !(mass > 0.0) {
                    return Err(invalid(format!("kernel trace {mass} is not positive")));
                }
                if let NibmInner::Double { scale, .. } = &mut kern.inner {
                    *scale = spec.n as f64 / mass;
                }
                return Ok(kern);
            }
        };
        Ok(NibmKernel { spec, inner })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let t = self.spec.t;
        let u = x / libm::sqrt(2.0 * t);
        let v = y / libm::sqrt(2.0 * (1.0 - t));
        let pref = libm::exp(-x * x / (4.0 * t) - y * y / (4.0 * (1.0 - t)));
        match &self.inner {
            NibmInner::Single(rec) => {
                let n = self.spec.n;
                let pu = orthonormal_hermite(rec, n - 1, u);
                let pv = orthonormal_hermite(rec, n - 1, v);
                pref * pu.iter().zip(&pv).map(|(a, b)| a * b).sum::<f64>()
            }
            NibmInner::Double { terms, c, scale } => {
                let e = [libm::exp(c[0] * v), libm::exp(c[1] * v)];
                let mut s = 0.0;
                for (p, a) in terms {
                    let q: f64 = a.iter().zip(&e).map(|(aj, ej)| crate::poly::eval_f64(aj, v) * ej).sum();
                    s += crate::poly::eval_f64(p, u) * q;
                }
                scale * pref * s
            }
        }
    }
}

pub fn nibm_kernel(spec: NibmKernelSpec, x: f64, y: f64) -> Result<f64> {
    Ok(NibmKernel::new(spec)?.eval(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::Weight;

    fn hermite(n: usize) -> KernelOperator {
        KernelOperator::new(Weight::hermite(), n, KernelMode::Weighted).unwrap()
    }

    #[test]
    fn correlation_examples() {
        let k = hermite(1);
        let x = 0.7;
        let r = correlation_k(&k, &[x]).unwrap().value;
        let pi = core::f64::consts::PI;
        assert!((r - libm::exp(-x * x) / libm::sqrt(pi)).abs() < 1e-15);
        assert_eq!(correlation_k(&k, &[]).unwrap().value, 1.0);
        assert!(correlation_k(&k, &[0.0, 1.0]).is_err());
        let k2 = hermite(2);
        assert!(correlation_k(&k2, &[0.3, 0.3]).unwrap().value.abs() < 1e-15);
    }

    #[test]
    fn joint_density_routes_agree() {
        for n in 1..=5 {
            let k = hermite(n);
            let pts: Vec<f64> = (0..n).map(|i| 0.37 * i as f64 - 0.5).collect();
            let a = joint_density(&k, &pts).unwrap();
            let b = joint_density_vandermonde(&k, &pts).unwrap();
            assert!((a - b).abs() <= 1e-10 * b.abs(), "{n}: {a} {b}");
        }
        let k = hermite(2);
        assert!(joint_density(&k, &[0.5, 0.5]).unwrap().abs() < 1e-15);
        assert!(joint_density(&k, &[0.5]).is_err());
        let l = KernelOperator::new(Weight::laguerre(0.5).unwrap(), 3, KernelMode::Plain).unwrap();
        let pts = [0.3, 1.2, 4.0];
        let a = joint_density(&l, &pts).unwrap();
        let b = joint_density_vandermonde(&l, &pts).unwrap();
        assert!((a - b).abs() <= 1e-10 * b.abs());
    }

    #[test]
    fn expected_counts() {
        let inf = f64::INFINITY;
        assert!((expected_count(&hermite(5), -inf, inf).unwrap() - 5.0).abs() < 1e-10);
        assert!((expected_count(&hermite(1), 0.0, inf).unwrap() - 0.5).abs() < 1e-10);
        let l = KernelOperator::new(Weight::laguerre(0.0).unwrap(), 1, KernelMode::Plain).unwrap();
        assert!(expected_count(&l, -1.0, 1.0).is_err());
    }

    #[test]
    fn gap_examples() {
        let g = gap_probability(&hermite(1), 0.0, 6.0, 20).unwrap();
        assert!(g.converged && (g.result - 0.5).abs() < 1e-8);
        assert_eq!(gap_probability(&hermite(3), 0.2, 0.2, 10).unwrap().result, 1.0);
        assert!(gap_probability(&hermite(3), 0.0, 1.0, 5).is_err());
    }

    #[test]
    fn nibm_single_one_term() {
        let spec = NibmKernelSpec { n: 1, t: 0.5, endpoints: Endpoints::Single };
        let (x, y) = (0.4, -1.1);
        let v = nibm_kernel(spec, x, y).unwrap();
        let h0sq = 1.0 / libm::sqrt(core::f64::consts::PI);
        assert!((v - libm::exp(-(x * x + y * y) / 2.0) * h0sq).abs() < 1e-15);
        assert!(nibm_kernel(NibmKernelSpec { t: 1.0, ..spec }, x, y).is_err());
        assert!(nibm_kernel(NibmKernelSpec { n: 3, t: 0.5, endpoints: Endpoints::Double { b: 1.0 } }, x, y).is_err());
    }

    #[test]
    fn nibm_double_normalized() {
        let spec = NibmKernelSpec { n: 2, t: 0.5, endpoints: Endpoints::Double { b: 1.0 } };
        let k = NibmKernel::new(spec).unwrap();
        assert!(k.eval(0.0, 0.0) >= 0.0);
        let mass = quad::integrate(|x| k.eval(x, x), f64::NEG_INFINITY, f64::INFINITY, 1e-12).unwrap();
        assert!((mass - 2.0).abs() < 1e-9);
    }
}
