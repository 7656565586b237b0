//! Dense polynomials as ascending coefficient vectors.

use alloc::vec;
use alloc::vec::Vec;

use crate::real::Real;

pub fn eval<T: Real>(c: &[T], x: &T) -> T {
    let mut acc = x.zero_like();
    for v in c.iter().rev() {
        acc = acc * x.clone() + v.clone();
    }
    acc
}

pub fn eval_f64(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

pub fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(u), Some(v)) => u.clone() + v.clone(),
            (Some(u), None) => u.clone(),
            (None, Some(v)) => v.clone(),
            (None, None) => unreachable!(),
        })
        .collect()
}

pub fn scale<T: Real>(a: &[T], s: &T) -> Vec<T> {
    a.iter().map(|v| v.clone() * s.clone()).collect()
}

pub fn mul<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let z = a[0].zero_like();
    let mut out = vec![z; a.len() + b.len() - 1];
    for (i, u) in a.iter().enumerate() {
        for (j, v) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + u.clone() * v.clone();
        }
    }
    out
}

/// Multiplies by (x - r).
pub fn mul_linear<T: Real>(a: &[T], r: &T) -> Vec<T> {
    let mut out = vec![r.zero_like(); a.len() + 1];
    for (i, v) in a.iter().enumerate() {
        out[i + 1] = out[i + 1].clone() + v.clone();
        out[i] = out[i].clone() - v.clone() * r.clone();
    }
    out
}

pub fn derivative<T: Real>(a: &[T]) -> Vec<T> {
    a.iter().enumerate().skip(1).map(|(k, v)| v.clone() * v.cst(k as f64)).collect()
}

/// Largest absolute coefficient.
pub fn max_abs<T: Real>(a: &[T]) -> f64 {
    a.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max)
}

/// Number of sign changes of `f` sampled on a uniform grid over [a, b].
pub fn sign_changes<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, points: usize) -> usize {
    let mut count = 0;
    let mut last = 0.0f64;
    for i in 0..=points {
        let x = a + (b - a) * i as f64 / points as f64;
        let v = f(x);
        if v != 0.0 {
            if last != 0.0 && (v > 0.0) != (last > 0.0) {
                count += 1;
            }
            last = v;
        }
    }
    count
}

/// Root of `f` in [lo, hi] by bisection, given a sign change.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let p = mul_linear(&mul_linear(&[1.0], &1.0), &-2.0);
        assert_eq!(p, vec![-2.0, 1.0, 1.0]);
        assert_eq!(eval(&p, &1.0), 0.0);
        assert_eq!(derivative(&p), vec![1.0, 2.0]);
        assert_eq!(mul(&[1.0, 1.0], &[1.0, -1.0]), vec![1.0, 0.0, -1.0]);
        assert_eq!(add(&[1.0], &[0.0, 2.0]), vec![1.0, 2.0]);
    }

    #[test]
    fn bisection_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0);
        assert!((r - core::f64::consts::SQRT_2).abs() < 1e-15);
        assert_eq!(sign_changes(|x| x * x - 0.25, -1.0, 1.0, 101), 2);
    }
}
