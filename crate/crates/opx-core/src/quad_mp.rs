//! Multiprecision double-exponential quadrature.
//!
//! Finite intervals use the tanh-sinh map, [a, ∞) the exp-sinh map and the
//! real line the sinh-sinh map. Each level halves the step and reuses the
//! previous nodes; the loop stops once two successive levels agree to three
//! quarters of the working precision.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, OpxError, Result};
use crate::mp::Mp;

#[derive(Clone, Debug)]
pub enum DeDomain {
    Finite { a: Mp, b: Mp },
    HalfLine { a: Mp },
    RealLine,
}

/// A node of the double-exponential map: abscissa, distances to the finite
/// endpoints (when present) and the Jacobian.
pub struct DeNode {
    pub x: Mp,
    /// x - a (finite and half-line domains).
    pub from_lo: Mp,
    /// b - x (finite domains only; equals x otherwise).
    pub to_hi: Mp,
    pub jac: Mp,
}

fn node(domain: &DeDomain, u: &Mp, half_pi: &Mp) -> DeNode {
    let s = half_pi * u.sinh();
    let dsdu = half_pi * u.cosh();
    match domain {
        DeDomain::Finite { a, b } => {
            let hw = (b - a).ldexp(-1);
            let e2 = s.ldexp(1).exp();
            let one = u.int(1);
            let from_lo = hw.ldexp(1) * &e2 / (&one + &e2);
            let to_hi = hw.ldexp(1) / (&one + &e2);
            let x = a + &from_lo;
            let c = s.cosh();
            let jac = hw * dsdu / (&c * &c);
            DeNode { x, from_lo, to_hi, jac }
        }
        DeDomain::HalfLine { a } => {
            let e = s.exp();
            let x = a + &e;
            let jac = dsdu * &e;
            DeNode { x: x.clone(), from_lo: e, to_hi: x, jac }
        }
        DeDomain::RealLine => {
            let x = s.sinh();
            let jac = dsdu * s.cosh();
            DeNode { x: x.clone(), from_lo: x.clone(), to_hi: x, jac }
        }
    }
}

/// Result of a double-exponential integration.
#[derive(Clone, Debug)]
pub struct DeResult {
    pub values: Vec<Mp>,
    /// Largest relative change between the last two levels.
    pub achieved: f64,
    pub levels: usize,
}

/// Integrates a vector-valued integrand of length `dim` at `bits` precision.
///
/// Fails with the achieved error when two levels never agree to
/// 2^(-bits/2).
pub fn de_integrate<F>(domain: &DeDomain, dim: usize, bits: usize, mut f: F) -> Result<DeResult>
where
    F: FnMut(&DeNode) -> Vec<Mp>,
{
    if dim == 0 {
        return Err(invalid("integrand dimension must be positive"));
    }
    let half_pi = Mp::pi(bits).ldexp(-1);
    let tiny = libm::ldexp(1.0, -(bits as i32) - 8);
    let target_loose = libm::ldexp(1.0, -(bits as i32) / 2);
    let target_tight = libm::ldexp(1.0, -(3 * bits as i32) / 4);
    let max_level = 10usize;
    let u_max = 9.0;

    let mut raw = vec![Mp::zero(bits); dim];
    let mut mass = vec![0.0f64; dim];
    let mut prev: Option<Vec<Mp>> = None;
    let mut achieved = f64::INFINITY;

    for level in 0..=max_level {
        let h = libm::ldexp(1.0, -(level as i32));
        let mut add_node = |j: i64, raw: &mut Vec<Mp>, mass: &mut Vec<f64>| -> bool {
            let u = Mp::from_f64(j as f64 * h, bits);
            let nd = node(domain, &u, &half_pi);
            if !nd.jac.is_finite() || nd.jac.is_zero() || !nd.x.is_finite() {
                return true;
            }
            let vals = f(&nd);
            let mut negligible = true;
            for (c, v) in vals.into_iter().enumerate().take(dim) {
                let term = v * &nd.jac;
                let tf = term.to_f64().abs();
                if !(tf <= tiny * mass[c]) {
                    negligible = false;
                }
                mass[c] += tf;
                raw[c] += term;
            }
            negligible
        };
        if level == 0 {
            add_node(0, &mut raw, &mut mass);
        }
        let step = if level == 0 { 1 } else { 2 };
        for dir in [1i64, -1] {
            let mut quiet = 0;
            let mut j = 1;
            while (j as f64) * h <= u_max {
                if add_node(dir * j, &mut raw, &mut mass) {
                    quiet += 1;
                    if quiet >= 2 {
                        break;
                    }
                } else {
                    quiet = 0;
                }
                j += step;
            }
        }
        let hm = Mp::from_f64(h, bits);
        let current: Vec<Mp> = raw.iter().map(|r| r * &hm).collect();
        if let Some(p) = &prev {
            achieved = 0.0;
            for c in 0..dim {
                let scale = (mass[c] * h).max(f64::MIN_POSITIVE);
                let d = (&current[c] - &p[c]).to_f64().abs() / scale;
                achieved = achieved.max(d);
            }
            if level >= 3 && achieved <= target_tight {
                return Ok(DeResult { values: current, achieved, levels: level + 1 });
            }
        }
        prev = Some(current);
    }
    if achieved <= target_loose {
        return Ok(DeResult { values: prev.unwrap_or_default(), achieved, levels: max_level + 1 });
    }
    Err(OpxError::QuadratureFailure { achieved })
}

/// Moments ∫ x^k w(x) dx for k < count with the weight given pointwise.
pub fn de_moments<W>(domain: &DeDomain, count: usize, bits: usize, mut weight: W) -> Result<DeResult>
where
    W: FnMut(&DeNode) -> Mp,
{
    de_integrate(domain, count, bits, |nd| {
        let w = weight(nd);
        let mut out = Vec::with_capacity(count);
        let mut p = w;
        for _ in 0..count {
            out.push(p.clone());
            p = p * &nd.x;
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments_on_real_line() {
        let bits = 192;
        let r = de_moments(&DeDomain::RealLine, 5, bits, |nd| (-(&nd.x * &nd.x)).exp()).unwrap();
        let sp = Mp::pi(bits).sqrt();
        let m2 = sp.clone().ldexp(-1);
        let m4 = &sp * Mp::ratio(3, 4, bits);
        assert!((&r.values[0] - &sp).abs() < sp.ldexp(-140));
        assert!((&r.values[2] - &m2).abs() < m2.ldexp(-140));
        assert!((&r.values[4] - &m4).abs() < m4.ldexp(-140));
        assert!(r.values[1].abs() < sp.ldexp(-140));
    }

    #[test]
    fn jacobi_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} (1-x)^{1/2} dx = B(1/2, 3/2) = π/2
        let bits = 128;
        let dom = DeDomain::Finite { a: Mp::zero(bits), b: Mp::one(bits) };
        let half = Mp::ratio(1, 2, bits);
        let r = de_moments(&dom, 1, bits, |nd| nd.to_hi.powf(&half) / nd.from_lo.powf(&half)).unwrap();
        let exact = Mp::pi(bits).ldexp(-1);
        assert!((&r.values[0] - &exact).abs() < exact.ldexp(-90));
    }

    #[test]
    fn half_line_factorials() {
        let bits = 128;
        let dom = DeDomain::HalfLine { a: Mp::zero(bits) };
        let r = de_moments(&dom, 6, bits, |nd| (-&nd.x).exp()).unwrap();
        let mut f = Mp::one(bits);
        for (k, v) in r.values.iter().enumerate() {
            if k > 0 {
                f = f * Mp::from_i64(k as i64, bits);
            }
            assert!((v - &f).abs() < f.ldexp(-90), "k={k}");
        }
    }
}
