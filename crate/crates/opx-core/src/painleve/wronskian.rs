use alloc::vec;
use alloc::vec::Vec;

use super::family::{working_bits, FreudSeries, SemiclassicalFamily};
use crate::error::{invalid, OpxError, Result};
use crate::linalg::{det, lu};
use crate::mp::Mp;
use crate::opcore::{recurrence_from_moments, MomentSequence, RecurrenceCoefficients};
use crate::quad_mp::{de_integrate, DeDomain};
use crate::special::gamma_mp;

/// Precision of the finite-difference route.
pub const WRONSKIAN_BITS: usize = 512;

/// Base weights whose deformation makes the moments derivatives of m_0(t).
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum WronskianBase {
    /// e^{-x² + xt}: m_k = m_0^{(k)}.
    Gaussian,
    /// x^α e^{-x + xt}: m_k = m_0^{(k)}.
    Laguerre { alpha: f64 },
    /// e^{-x⁴ + tx²}: m_{2k} = m_0^{(k)}, odd moments vanish.
    Freud,
}

/// m_0(t) with the t-independent constants computed once.
enum M0Eval {
    Gaussian,
    Laguerre { alpha: Mp, g: Mp },
    Freud(FreudSeries),
}

impl M0Eval {
    fn eval(&self, t: &Mp) -> Result<Mp> {
        let bits = t.bits();
        match self {
            M0Eval::Gaussian => Ok(Mp::pi(bits).sqrt() * (t * t).ldexp(-2).exp()),
            M0Eval::Laguerre { alpha, g } => {
                let e = alpha + Mp::one(bits);
                Ok(g / (Mp::one(bits) - t).powf(&e))
            }
            M0Eval::Freud(series) => Ok(series.moments(t, 1)?.swap_remove(0).with_bits(bits)),
        }
    }
}

impl WronskianBase {
    fn m0_eval(&self, t_bound: f64, bits: usize) -> Result<M0Eval> {
        Ok(match *self {
            WronskianBase::Gaussian => M0Eval::Gaussian,
            WronskianBase::Laguerre { alpha } => {
                let a = Mp::from_f64(alpha, bits);
                M0Eval::Laguerre { g: gamma_mp(&(&a + Mp::one(bits)))?, alpha: a }
            }
            WronskianBase::Freud => M0Eval::Freud(FreudSeries::new(t_bound, 1, bits + 32)?),
        })
    }

    /// Highest derivative of m_0 needed for moments up to m_{top}.
    fn order_for(&self, top: usize) -> usize {
        match self {
            WronskianBase::Freud => top / 2,
            _ => top,
        }
    }

    fn moment_from_derivs(&self, j: usize, d: &[Mp]) -> Mp {
        match self {
            WronskianBase::Freud if j % 2 == 1 => Mp::zero(d[0].bits()),
            WronskianBase::Freud => d[j / 2].clone(),
            _ => d[j].clone(),
        }
    }

    fn direct(&self, t: &Mp, n: usize, bits: usize) -> Result<RecurrenceCoefficients<Mp>> {
        match *self {
            WronskianBase::Gaussian => {
                // m_{k+1} = (t/2) m_k + (k/2) m_{k-1}.
                let mut m = vec![self.m0_eval(0.0, bits)?.eval(t)?];
                let half_t = t.ldexp(-1);
                for k in 0..2 * n {
                    let prev = if k == 0 { Mp::zero(bits) } else { m[k - 1].clone() };
                    m.push(&half_t * &m[k] + Mp::ratio(k as i64, 2, bits) * prev);
                }
                let seq = MomentSequence { values: m, precision_bits: bits, weight_tag: "gaussian_shift".into(), quadrature_error: None };
                recurrence_from_moments(&seq, n)
            }
            WronskianBase::Laguerre { alpha } => SemiclassicalFamily::ExpLaguerre { alpha }.recurrence(t, n, bits),
            WronskianBase::Freud => SemiclassicalFamily::Freud.recurrence(t, n, bits),
        }
    }
}

/// Both routes for a_1²..a_n² and b_0..b_{n-1}.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WronskianIdentities {
    pub t: f64,
    pub n: usize,
    pub h: f64,
    /// D_0..D_{n+1} built from derivatives of m_0; D_0 = 1.
    pub d: Vec<f64>,
    /// D_{k+1}D_{k-1}/D_k².
    pub a_sq: Vec<f64>,
    /// (log D_{k+1})' - (log D_k)'.
    pub b: Vec<f64>,
    pub direct_a_sq: Vec<f64>,
    pub direct_b: Vec<f64>,
    /// Largest relative gap between the routes.
    pub gap: f64,
}

/// Weights c_j with f^{(k)}(t) ≈ Σ_j c_j f(t + jh)/h^k, j = -m..m, for
/// every k ≤ order.
fn central_weights(m: usize, order: usize, bits: usize) -> Result<Vec<Vec<Mp>>> {
    let size = 2 * m + 1;
    let offs: Vec<Mp> = (0..size).map(|j| Mp::from_i64(j as i64 - m as i64, bits)).collect();
    let a: Vec<Vec<Mp>> = (0..size).map(|p| offs.iter().map(|o| o.powi(p as i64)).collect()).collect();
    let f = lu(a);
    let mut fact = Mp::one(bits);
    let mut out = Vec::with_capacity(order + 1);
    for k in 0..=order {
        if k > 0 {
            fact = fact * Mp::from_i64(k as i64, bits);
        }
        let mut rhs = vec![Mp::zero(bits); size];
        rhs[k] = fact.clone();
        out.push(f.solve(&rhs)?);
    }
    Ok(out)
}

/// m_0^{(k)}(t) for k ≤ order from a central stencil of spacing h.
pub fn m0_derivatives(base: WronskianBase, t: f64, order: usize, h: f64, bits: usize) -> Result<Vec<Mp>> {
    if !(h > 0.0) {
        return Err(invalid("stencil spacing must be positive"));
    }
    let m = order + 12;
    let w = central_weights(m, order, bits)?;
    let tm = Mp::from_f64(t, bits);
    let hm = Mp::from_f64(h, bits);
    let m0 = base.m0_eval(t.abs() + h * m as f64, bits)?;
    let vals: Vec<Mp> = (0..2 * m + 1)
        .map(|j| m0.eval(&(&tm + &hm * Mp::from_i64(j as i64 - m as i64, bits))))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(order + 1);
    let mut hk = Mp::one(bits);
    for (k, wk) in w.iter().enumerate() {
        if k > 0 {
            hk = hk * &hm;
        }
        let s = wk.iter().zip(&vals).fold(Mp::zero(bits), |acc, (c, v)| acc + c * v);
        out.push(s / &hk);
    }
    Ok(out)
}

fn hankel(m: &[Mp], k: usize, shift_last: bool) -> Mp {
    if k == 0 {
        return if shift_last { Mp::zero(m[0].bits()) } else { Mp::one(m[0].bits()) };
    }
    let a: Vec<Vec<Mp>> = (0..k)
        .map(|i| (0..k).map(|j| m[i + j + usize::from(shift_last && j == k - 1)].clone()).collect())
        .collect();
    det(a)
}

/// Recurrence coefficients from Hankel determinants of derivatives of
/// m_0, compared with the moment route.
pub fn wronskian_identities(base: WronskianBase, t: f64, n: usize, h: f64) -> Result<WronskianIdentities> {
    if n == 0 {
        return Err(invalid("need n ≥ 1"));
    }
    if let WronskianBase::Laguerre { alpha } = base {
        SemiclassicalFamily::ExpLaguerre { alpha }.validate_time(t + 40.0 * h * n as f64)?;
    }
    let bits = WRONSKIAN_BITS.max(working_bits(n + 1));
    let top = 2 * n + 1;
    let derivs = m0_derivatives(base, t, base.order_for(top), h, bits)?;
    let m: Vec<Mp> = (0..=top).map(|j| base.moment_from_derivs(j, &derivs)).collect();
    let d: Vec<Mp> = (0..=n + 1).map(|k| hankel(&m, k, false)).collect();
    if let Some(k) = d.iter().position(|v| v.is_zero() || v.is_negative()) {
        return Err(OpxError::PrecisionExhausted { last_good: k.saturating_sub(1) });
    }
    let dt: Vec<Mp> = (0..=n).map(|k| hankel(&m, k, true)).collect();
    let a_sq: Vec<Mp> = (1..=n).map(|k| &d[k + 1] * &d[k - 1] / (&d[k] * &d[k])).collect();
    let b: Vec<Mp> = (0..n).map(|k| &dt[k + 1] / &d[k + 1] - &dt[k] / &d[k]).collect();

    let rec = base.direct(&Mp::from_f64(t, bits), n, bits)?;
    let mut gap = 0.0f64;
    for (u, v) in a_sq.iter().zip(&rec.a_sq).chain(b.iter().zip(&rec.b)) {
        let scale = v.to_f64().abs().max(1.0);
        gap = gap.max((u - v).to_f64().abs() / scale);
    }
    let f = |v: &[Mp]| v.iter().map(Mp::to_f64).collect::<Vec<f64>>();
    Ok(WronskianIdentities {
        t,
        n,
        h,
        d: f(&d),
        a_sq: f(&a_sq),
        b: f(&b),
        direct_a_sq: f(&rec.a_sq),
        direct_b: f(&rec.b),
        gap,
    })
}

/// ∫ e^{-x⁴+tx²} dx = 2^{-1/4}√π e^{t²/8} D_{-1/2}(-t/√2), with the
/// parabolic cylinder function from
/// D_{-1/2}(y) = e^{-y²/4}/√π ∫_0^∞ s^{-1/2} e^{-ys - s²/2} ds.
pub fn freud_m0_parabolic(t: f64, bits: usize) -> Result<Mp> {
    let wp = bits + 32;
    let tm = Mp::from_f64(t, wp);
    let z = &tm / Mp::from_i64(2, wp).sqrt();
    let half = Mp::ratio(1, 2, wp);
    let res = de_integrate(&DeDomain::HalfLine { a: Mp::zero(wp) }, 1, wp, |nd| {
        let s = &nd.from_lo;
        if s.is_zero() {
            return vec![Mp::zero(wp)];
        }
        vec![(&z * s - (s * s).ldexp(-1) - &half * s.ln()).exp()]
    })?;
    let pref = Mp::from_i64(2, wp).powf(&Mp::ratio(-1, 4, wp));
    Ok((pref * &res.values[0]).with_bits(bits))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_shift_mean() {
        let w = wronskian_identities(WronskianBase::Gaussian, 0.6, 1, 1.0 / 64.0).unwrap();
        assert!((w.b[0] - 0.3).abs() < 1e-12);
        assert!((w.a_sq[0] - 0.5).abs() < 1e-12);
        assert_eq!(w.d[0], 1.0);
    }

    #[test]
    fn freud_matches_moment_route() {
        let w = wronskian_identities(WronskianBase::Freud, 0.2, 2, 1.0 / 64.0).unwrap();
        assert!(w.gap < 1e-8, "{}", w.gap);
        assert!(w.b.iter().all(|b| b.abs() < 1e-12));
    }

    #[test]
    fn laguerre_up_to_four() {
        let w = wronskian_identities(WronskianBase::Laguerre { alpha: 0.5 }, 0.1, 4, 1.0 / 256.0).unwrap();
        assert!(w.gap < 1e-8, "{}", w.gap);
    }

    #[test]
    fn parabolic_cylinder_form() {
        for t in [0.0, 0.5, 1.0] {
            let series = SemiclassicalFamily::Freud.moments(&Mp::from_f64(t, 128), 1, 128).unwrap().values[0].to_f64();
            let closed = freud_m0_parabolic(t, 128).unwrap().to_f64();
            assert!((series - closed).abs() < 1e-10 * series, "t={t}");
        }
    }
}
