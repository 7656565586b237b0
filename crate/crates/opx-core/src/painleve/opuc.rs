use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, OpxError, Result};
use crate::linalg::solve;
use crate::mp::Mp;
use crate::special::bessel_i;

/// Relative agreement the two routes must reach.
pub const ROUTE_AGREEMENT: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum VerblunskySource {
    MomentDeterminant,
    SzegoRecurrence,
}

/// α_0..α_N for the weight e^{t cos θ} on the unit circle, with the
/// convention α_n = -Φ_{n+1}(0) and α_{-1} = -1.
///
/// In the d-PII display the unknown x_n is α_{n-1}.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerblunskySequence {
    pub t: f64,
    pub alphas: Vec<f64>,
    pub source: VerblunskySource,
    /// Largest relative gap to the other route.
    pub route_gap: f64,
}

impl VerblunskySequence {
    /// α_n for n ≥ -1.
    pub fn alpha(&self, n: isize) -> f64 {
        if n < 0 {
            -1.0
        } else {
            self.alphas[n as usize]
        }
    }

    pub fn all_negative(&self) -> bool {
        self.alphas.iter().all(|&a| a < 0.0)
    }
}

pub fn verblunsky_bits(n: usize) -> usize {
    192 + 16 * n
}

fn trig_moments(t: &Mp, count: usize) -> Vec<Mp> {
    (0..count).map(|k| bessel_i(k, t)).collect()
}

/// α_n = -Φ_{n+1}(0) with Φ_{n+1} from the Toeplitz system
/// Σ_j p_j c_{|j-k|} = -c_{n+1-k}, k ≤ n.
fn by_determinants(c: &[Mp], n: usize) -> Result<Vec<Mp>> {
    let mut out = Vec::with_capacity(n + 1);
    for deg in 1..=n + 1 {
        let a: Vec<Vec<Mp>> =
            (0..deg).map(|k| (0..deg).map(|j| c[j.abs_diff(k)].clone()).collect()).collect();
        let rhs: Vec<Mp> = (0..deg).map(|k| -c[deg - k].clone()).collect();
        let p = solve(a, &rhs, 0.0)?;
        out.push(-p[0].clone());
    }
    Ok(out)
}

/// Φ_{n+1} = zΦ_n - α_n Φ_n* with α_n chosen so that Φ_{n+1} ⊥ 1.
fn by_szego(c: &[Mp], n: usize) -> Result<Vec<Mp>> {
    let bits = c[0].bits();
    let mut phi = vec![Mp::one(bits)];
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let num = phi.iter().enumerate().fold(Mp::zero(bits), |s, (j, p)| s + p * &c[j + 1]);
        let den = phi.iter().enumerate().fold(Mp::zero(bits), |s, (j, p)| s + p * &c[k - j]);
        if den.is_zero() {
            return Err(OpxError::DivisionByZero { step: k });
        }
        let alpha = num / den;
        let mut next = vec![Mp::zero(bits); k + 2];
        for (j, p) in phi.iter().enumerate() {
            next[j + 1] += p;
            next[k - j] -= &alpha * p;
        }
        phi = next;
        out.push(alpha);
    }
    Ok(out)
}

/// Both routes at the given precision, as multiprecision values.
pub fn verblunsky_pair(t: &Mp, n: usize) -> Result<(Vec<Mp>, Vec<Mp>)> {
    if t.is_zero() || !t.is_finite() {
        return Err(invalid("the circle family needs t ≠ 0"));
    }
    let c = trig_moments(t, n + 2);
    Ok((by_determinants(&c, n)?, by_szego(&c, n)?))
}

pub fn verblunsky_sequence(t: f64, n: usize) -> Result<VerblunskySequence> {
    verblunsky_sequence_at(t, n, verblunsky_bits(n))
}

/// As [`verblunsky_sequence`] with an explicit precision.
pub fn verblunsky_sequence_at(t: f64, n: usize, bits: usize) -> Result<VerblunskySequence> {
    let (det, sz) = verblunsky_pair(&Mp::from_f64(t, bits), n)?;
    let mut route_gap = 0.0f64;
    for k in 0..=n {
        let gap = ((&det[k] - &sz[k]) / &det[k]).to_f64().abs();
        if !(gap <= ROUTE_AGREEMENT) {
            return Err(OpxError::PrecisionExhausted { last_good: k.saturating_sub(1) });
        }
        route_gap = route_gap.max(gap);
    }
    let alphas: Vec<f64> = det.iter().map(Mp::to_f64).collect();
    if let Some(a) = alphas.iter().find(|a| !(a.abs() < 1.0)) {
        return Err(OpxError::OutsideDomain { x: *a });
    }
    Ok(VerblunskySequence { t, alphas, source: VerblunskySource::MomentDeterminant, route_gap })
}

/// |α_{n+1} + α_{n-1} + (2/t)(n+1)α_n/(1-α_n²)| for n = 0..N-1.
pub fn dp2_residuals(seq: &VerblunskySequence) -> Result<Vec<f64>> {
    let n = seq.alphas.len();
    if n < 3 {
        return Err(OpxError::Insufficient { needed: 3, available: n });
    }
    if let Some(a) = seq.alphas.iter().find(|a| !(a.abs() < 1.0)) {
        return Err(OpxError::OutsideDomain { x: *a });
    }
    Ok((0..n - 1)
        .map(|k| {
            let a = seq.alpha(k as isize);
            let lhs = seq.alpha(k as isize + 1) + seq.alpha(k as isize - 1);
            (lhs + 2.0 / seq.t * (k as f64 + 1.0) * a / (1.0 - a * a)).abs()
        })
        .collect())
}

pub fn dp2_residual(seq: &VerblunskySequence) -> Result<f64> {
    Ok(dp2_residuals(seq)?.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_coefficient_is_bessel_ratio() {
        let s = verblunsky_sequence(1.0, 4).unwrap();
        assert!((s.alphas[0] - 0.446_389_965_896_535).abs() < 1e-12);
        let s = verblunsky_sequence(1e-6, 2).unwrap();
        assert!((s.alphas[0] / 5e-7 - 1.0).abs() < 1e-6);
        assert_eq!(s.alpha(-1), -1.0);
    }

    #[test]
    fn dp2_holds() {
        for (t, n) in [(1.0, 15), (2.0, 10), (-2.0, 12)] {
            let s = verblunsky_sequence(t, n).unwrap();
            assert!(dp2_residual(&s).unwrap() < 1e-8, "t={t}");
            assert!(s.route_gap < 1e-10);
        }
    }

    #[test]
    fn negative_for_negative_t() {
        let s = verblunsky_sequence(-2.0, 15).unwrap();
        assert!(s.all_negative());
    }

    #[test]
    fn zero_sequence_breaks_at_boundary() {
        let s = VerblunskySequence {
            t: 1.0,
            alphas: vec![0.0; 5],
            source: VerblunskySource::MomentDeterminant,
            route_gap: 0.0,
        };
        let r = dp2_residuals(&s).unwrap();
        assert_eq!(r[0], 1.0);
        assert!(r[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn precision_exhaustion_reported() {
        let err = verblunsky_sequence_at(1.0, 20, 64).unwrap_err();
        assert!(matches!(err, OpxError::PrecisionExhausted { .. }));
    }
}
