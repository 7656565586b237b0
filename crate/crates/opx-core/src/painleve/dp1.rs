use alloc::vec;
use alloc::vec::Vec;

use super::family::{working_bits, SemiclassicalFamily};
use crate::error::{invalid, OpxError, Result};
use crate::mp::Mp;

/// Extra unknowns beyond N whose values absorb the truncation.
pub const DP1_BUFFER: usize = 30;
pub const DP1_MAX_SWEEPS: usize = 20_000;

/// The positive solution x_n = a_n² of 4x_n(x_{n+1} + x_n + x_{n-1} - t/2) = n
/// with x_0 = 0.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DP1Solution {
    pub t: f64,
    pub n: usize,
    /// x_1..x_N.
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Largest relative defect |4x_n(...)/n - 1| over n ≤ N.
    pub residual: f64,
    /// Sup-norm change of every sweep.
    pub history: Vec<f64>,
}

impl DP1Solution {
    /// x_n for 0 ≤ n ≤ N.
    pub fn get(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.x[n - 1]
        }
    }
}

/// Large-n root of 4x(3x - t/2) = n.
pub fn dp1_tail(t: f64, n: usize) -> f64 {
    t / 12.0 + libm::sqrt(t * t / 144.0 + n as f64 / 12.0)
}

fn dp1_defect(x: &[f64], t: f64, n: usize) -> f64 {
    let v = 4.0 * x[n] * (x[n + 1] + x[n] + x[n - 1] - t / 2.0);
    (v / n as f64 - 1.0).abs()
}

/// Under-relaxed sweeps x_n ← ½x_n + ½ n/(4(x_{n-1} + x_n + x_{n+1} - t/2))
/// from the tail seed, with x_{N+buffer+1} held at the tail value.
pub fn dp1_positive_solution(t: f64, n: usize, tol: f64) -> Result<DP1Solution> {
    if n < 4 {
        return Err(OpxError::Insufficient { needed: 4, available: n });
    }
    if !(tol >= 1e-14) || !t.is_finite() {
        return Err(invalid("tolerance must be at least 1e-14 and t finite"));
    }
    let m = n + DP1_BUFFER;
    let mut x: Vec<f64> = (0..=m + 1).map(|k| if k == 0 { 0.0 } else { dp1_tail(t, k) }).collect();
    let mut next = x.clone();
    let mut history = Vec::new();
    for sweep in 1..=DP1_MAX_SWEEPS {
        let mut change = 0.0f64;
        for k in 1..=m {
            let denom = 4.0 * (x[k - 1] + x[k] + x[k + 1] - t / 2.0);
            let v = 0.5 * x[k] + 0.5 * k as f64 / denom;
            change = change.max((v - x[k]).abs());
            next[k] = v;
        }
        core::mem::swap(&mut x, &mut next);
        history.push(change);
        if !change.is_finite() {
            break;
        }
        if change < tol {
            let residual = (1..=n).map(|k| dp1_defect(&x, t, k)).fold(0.0, f64::max);
            if residual <= tol {
                if let Some(k) = (1..=n).find(|&k| !(x[k] > 0.0)) {
                    return Err(OpxError::Nonpositive { index: k });
                }
                return Ok(DP1Solution { t, n, x: x[1..=n].to_vec(), iterations: sweep, residual, history });
            }
        }
    }
    Err(OpxError::NoConvergence {
        iterations: history.len(),
        last_change: history.last().copied().unwrap_or(f64::NAN),
    })
}

/// Runs the raw forward map x_{n+1} = n/(4x_n) - x_n - x_{n-1} + t/2 from
/// x_0 = 0 and the given x_1; returns the first n ≤ steps with x_n ≤ 0.
pub fn dp1_forward_escape(t: f64, x1: f64, steps: usize) -> Option<usize> {
    let (mut prev, mut cur) = (0.0f64, x1);
    if !(cur > 0.0) {
        return Some(1);
    }
    for k in 1..steps {
        let next = k as f64 / (4.0 * cur) - cur - prev + t / 2.0;
        if !(next > 0.0) {
            return Some(k + 1);
        }
        prev = cur;
        cur = next;
    }
    None
}

/// Coefficient matching for P_n' = A_n P_{n-1} + C_n P_{n-3} with the monic
/// Freud polynomials.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StructureRelation {
    pub n: usize,
    pub a_n: f64,
    pub c_n: f64,
    /// Largest coefficient of P_n' - A_n P_{n-1} - C_n P_{n-3}.
    pub residual: f64,
}

fn monic_coeffs(a_sq: &[Mp], b: &[Mp], n: usize, bits: usize) -> Vec<Vec<Mp>> {
    let mut p: Vec<Vec<Mp>> = vec![vec![Mp::one(bits)]];
    for k in 0..n {
        let mut next = vec![Mp::zero(bits); k + 2];
        for (j, c) in p[k].iter().enumerate() {
            next[j + 1] += c;
            next[j] -= &b[k] * c;
        }
        if k >= 1 {
            for (j, c) in p[k - 1].iter().enumerate() {
                next[j] -= &a_sq[k - 1] * c;
            }
        }
        p.push(next);
    }
    p
}

pub fn structure_relation_check(t: f64, n: usize) -> Result<StructureRelation> {
    if n == 0 {
        return Err(invalid("structure relation needs n ≥ 1"));
    }
    let bits = working_bits(n);
    let rec = SemiclassicalFamily::Freud.recurrence(&Mp::from_f64(t, bits), n, bits)?;
    let p = monic_coeffs(&rec.a_sq, &rec.b, n, bits);
    let mut diff: Vec<Mp> = (1..=n).map(|j| &p[n][j] * Mp::from_i64(j as i64, bits)).collect();
    let a_n = Mp::from_i64(n as i64, bits);
    for (j, c) in p[n - 1].iter().enumerate() {
        diff[j] -= &a_n * c;
    }
    let mut c_n = Mp::zero(bits);
    if n >= 3 {
        c_n = diff[n - 3].clone();
        for (j, c) in p[n - 3].iter().enumerate() {
            diff[j] -= &c_n * c;
        }
    }
    let residual = diff.iter().map(|d| d.to_f64().abs()).fold(0.0, f64::max);
    Ok(StructureRelation { n, a_n: n as f64, c_n: c_n.to_f64(), residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;

    #[test]
    fn first_coefficient_is_moment_ratio() {
        let s = dp1_positive_solution(0.0, 10, 1e-13).unwrap();
        let oracle = gamma(0.75) / gamma(0.25);
        assert!((s.get(1) - oracle).abs() < 1e-8);
        assert!((4.0 * s.get(1) * (s.get(2) + s.get(1)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn asymptotics_at_large_n() {
        let s = dp1_positive_solution(0.0, 2000, 1e-12).unwrap();
        assert!((s.get(2000) / (2000.0f64 / 12.0).sqrt() - 1.0).abs() < 1e-2);
        assert!(s.x.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn matches_moment_route_at_positive_t() {
        let t = 0.7;
        let s = dp1_positive_solution(t, 8, 1e-13).unwrap();
        let bits = working_bits(8);
        let rec = SemiclassicalFamily::Freud.recurrence(&Mp::from_f64(t, bits), 8, bits).unwrap();
        for k in 1..=8 {
            assert!((s.get(k) - rec.a_sq[k - 1].to_f64()).abs() < 1e-10, "n={k}");
        }
    }

    #[test]
    fn raw_map_escapes() {
        let s = dp1_positive_solution(0.0, 60, 1e-13).unwrap();
        for d in [1e-6, -1e-6] {
            assert!(dp1_forward_escape(0.0, s.get(1) + d, 50).is_some());
        }
    }

    #[test]
    fn small_n_rejected() {
        assert!(matches!(dp1_positive_solution(0.0, 3, 1e-12), Err(OpxError::Insufficient { .. })));
    }

    #[test]
    fn structure_relation_cases() {
        let r1 = structure_relation_check(0.0, 1).unwrap();
        assert_eq!(r1.c_n, 0.0);
        assert!(r1.residual < 1e-30);
        let r3 = structure_relation_check(0.0, 3).unwrap();
        assert!(r3.residual < 1e-10);
        let r5 = structure_relation_check(1.0, 5).unwrap();
        assert!(r5.residual < 1e-9);
        // C_n = 4 a_n² a_{n-1}² a_{n-2}².
        let s = dp1_positive_solution(0.0, 10, 1e-13).unwrap();
        let c = 4.0 * s.get(3) * s.get(2) * s.get(1);
        assert!((r3.c_n - c).abs() < 1e-10);
    }
}
