//! Special functions: Gamma at double and multiple precision, Pochhammer
//! symbols, modified Bessel functions of integer order.

use crate::error::{invalid, Result};
use crate::mp::Mp;

/// Γ(x) in double precision.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// ln Γ(x) in double precision, x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// Γ(x) for x > 0 at the precision of `x`, by Spouge's approximation.
///
/// The parameter `a` is sized so the truncation error is below 2^-bits; the
/// alternating coefficient sum cancels roughly `bits` bits, so it is summed
/// at twice the target precision.
pub fn gamma_mp(x: &Mp) -> Result<Mp> {
    if !(x.to_f64() > 0.0) || !x.is_finite() {
        return Err(invalid("gamma_mp requires x > 0"));
    }
    let bits = x.bits();
    let a = ((bits as f64) * core::f64::consts::LN_2 / libm::log(2.0 * core::f64::consts::PI)).ceil() as i64 + 3;
    let wp = 2 * bits + 64;
    let z = x.with_bits(wp) - Mp::one(wp);
    let two_pi = Mp::pi(wp).ldexp(1);
    let mut sum = two_pi.sqrt();
    let mut inv_fact = Mp::one(wp);
    let half = Mp::ratio(1, 2, wp);
    for k in 1..a {
        if k > 1 {
            inv_fact = inv_fact / Mp::from_i64(k - 1, wp);
        }
        let ak = Mp::from_i64(a - k, wp);
        let mag = ((Mp::from_i64(k, wp) - &half) * ak.ln() + &ak).exp();
        let mut c = mag * &inv_fact;
        if k % 2 == 0 {
            c = -c;
        }
        sum += c / (&z + Mp::from_i64(k, wp));
    }
    let za = &z + Mp::from_i64(a, wp);
    let lead = ((&z + &half) * za.ln() - za).exp();
    Ok((lead * sum).with_bits(bits))
}

/// Pochhammer symbol (x)_k = x(x+1)...(x+k-1).
pub fn rising<T: crate::Real>(x: &T, k: usize) -> T {
    let mut acc = x.one_like();
    for i in 0..k {
        acc = acc * (x.clone() + x.cst(i as f64));
    }
    acc
}

/// Generalized binomial coefficient C(a, k) = a(a-1)...(a-k+1)/k!.
pub fn binomial<T: crate::Real>(a: &T, k: usize) -> T {
    let mut acc = a.one_like();
    for i in 0..k {
        acc = acc * (a.clone() - a.cst(i as f64)) / a.cst((i + 1) as f64);
    }
    acc
}

/// Integer binomial coefficient as f64.
pub fn binomial_int(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut acc = 1.0;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// k! at the requested precision.
pub fn factorial_mp(k: usize, bits: usize) -> Mp {
    let mut acc = Mp::one(bits);
    for i in 2..=k {
        acc *= Mp::from_i64(i as i64, bits);
    }
    acc
}

/// Modified Bessel function I_n(t) of integer order from its ascending
/// series, summed until terms drop below the working precision.
pub fn bessel_i(n: usize, t: &Mp) -> Mp {
    let bits = t.bits();
    let half = t.clone().ldexp(-1);
    let q = &half * &half;
    let mut term = half.powi(n as i64) / factorial_mp(n, bits);
    let mut sum = term.clone();
    let tiny = Mp::one(bits).ldexp(-(bits as i32) - 8);
    let mut k = 1usize;
    loop {
        term = term * &q / Mp::from_i64((k * (k + n)) as i64, bits);
        sum += &term;
        if term.abs() <= (sum.abs() * &tiny) || term.is_zero() {
            break;
        }
        k += 1;
    }
    sum
}
