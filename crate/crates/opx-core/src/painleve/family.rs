use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, OpxError, Result};
use crate::mp::Mp;
use crate::opcore::{quarter_gammas, recurrence_from_moments, MomentSequence, RecurrenceCoefficients};
use crate::quad_mp::{de_moments, DeDomain};
use crate::special::{bessel_i, gamma_mp};

/// Weights whose recurrence coefficients obey a discrete Painlevé system.
///
/// Each family is deformed by a real parameter `t`; see the variant docs for
/// how `t` enters the weight.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SemiclassicalFamily {
    /// e^{-x⁴ + t x²} on ℝ.
    Freud,
    /// c(t)^k / ((β)_k k!) on ℕ with c(t) = c e^t.
    GenCharlier { beta: f64, c: f64 },
    /// (γ)_k a(t)^k / ((β)_k k!) on ℕ with a(t) = a e^t.
    GenMeixner { gamma: f64, beta: f64, a: f64 },
    /// x^α e^{-x - t/x} on (0, ∞), t > 0.
    ChenIts { alpha: f64 },
    /// (1-x)^α (1+x)^β e^{-tx} on [-1, 1].
    Bce { alpha: f64, beta: f64 },
    /// e^{t cos θ} on the unit circle.
    OpucBessel,
    /// x^α e^{-(1-t)x} on (0, ∞), t < 1.
    ExpLaguerre { alpha: f64 },
}

impl SemiclassicalFamily {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64, cond: bool, what: &str| {
            if v.is_finite() && cond {
                Ok(())
            } else {
                Err(invalid(format!("{what} out of range: {v}")))
            }
        };
        match *self {
            SemiclassicalFamily::Freud | SemiclassicalFamily::OpucBessel => Ok(()),
            SemiclassicalFamily::GenCharlier { beta, c } => {
                ok(beta, beta > 0.0, "beta")?;
                ok(c, c > 0.0, "c")
            }
            SemiclassicalFamily::GenMeixner { gamma, beta, a } => {
                ok(gamma, gamma > 0.0, "gamma")?;
                ok(beta, beta > 0.0, "beta")?;
                ok(a, a > 0.0, "a")
            }
            SemiclassicalFamily::ChenIts { alpha } | SemiclassicalFamily::ExpLaguerre { alpha } => {
                ok(alpha, alpha > -1.0, "alpha")
            }
            SemiclassicalFamily::Bce { alpha, beta } => {
                ok(alpha, alpha > -1.0, "alpha")?;
                ok(beta, beta > -1.0, "beta")
            }
        }
    }

    /// Checks that `t` lies where the weight has finite moments.
    pub fn validate_time(&self, t: f64) -> Result<()> {
        self.validate()?;
        let bad = !t.is_finite()
            || match self {
                SemiclassicalFamily::ChenIts { .. } => t <= 0.0,
                SemiclassicalFamily::ExpLaguerre { .. } => t >= 1.0,
                SemiclassicalFamily::OpucBessel => t == 0.0,
                _ => false,
            };
        if bad {
            return Err(invalid(format!("deformation parameter {t} outside the family's range")));
        }
        Ok(())
    }

    pub fn tag(&self) -> String {
        match self {
            SemiclassicalFamily::Freud => "freud".into(),
            SemiclassicalFamily::GenCharlier { beta, c } => format!("gen_charlier(beta={beta},c={c})"),
            SemiclassicalFamily::GenMeixner { gamma, beta, a } => {
                format!("gen_meixner(gamma={gamma},beta={beta},a={a})")
            }
            SemiclassicalFamily::ChenIts { alpha } => format!("chen_its(alpha={alpha})"),
            SemiclassicalFamily::Bce { alpha, beta } => format!("bce_jacobi(alpha={alpha},beta={beta})"),
            SemiclassicalFamily::OpucBessel => "opuc_bessel".into(),
            SemiclassicalFamily::ExpLaguerre { alpha } => format!("exp_laguerre(alpha={alpha})"),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(self, SemiclassicalFamily::Freud)
    }

    pub fn on_circle(&self) -> bool {
        matches!(self, SemiclassicalFamily::OpucBessel)
    }

    /// Moments m_0..m_{count-1} at parameter `t`. For the circle family these
    /// are the trigonometric moments I_k(t).
    pub fn moments(&self, t: &Mp, count: usize, bits: usize) -> Result<MomentSequence> {
        self.validate_time(t.to_f64())?;
        if count == 0 {
            return Err(invalid("at least one moment is required"));
        }
        let wp = bits + 64;
        let t = t.with_bits(wp);
        let mut quadrature_error = None;
        let values = match *self {
            SemiclassicalFamily::Freud => freud_moments(&t, count, wp)?,
            SemiclassicalFamily::GenCharlier { beta, c } => {
                let c = Mp::from_f64(c, wp) * t.exp();
                let beta = Mp::from_f64(beta, wp);
                series_moments(count, wp, |k| {
                    let k1 = Mp::from_i64(k as i64 + 1, wp);
                    &c / ((&beta + Mp::from_i64(k as i64, wp)) * k1)
                })?
            }
            SemiclassicalFamily::GenMeixner { gamma, beta, a } => {
                let a = Mp::from_f64(a, wp) * t.exp();
                let (g, beta) = (Mp::from_f64(gamma, wp), Mp::from_f64(beta, wp));
                series_moments(count, wp, |k| {
                    let km = Mp::from_i64(k as i64, wp);
                    (&g + &km) * &a / ((&beta + &km) * (km + Mp::one(wp)))
                })?
            }
            SemiclassicalFamily::ChenIts { alpha } => {
                let (v, err) = chen_its_moments(alpha, &t, count, wp)?;
                quadrature_error = Some(err);
                v
            }
            SemiclassicalFamily::Bce { alpha, beta } => {
                let a = Mp::from_f64(alpha, wp);
                let b = Mp::from_f64(beta, wp);
                let dom = DeDomain::Finite { a: Mp::from_i64(-1, wp), b: Mp::one(wp) };
                let res = de_moments(&dom, count, wp, |nd| {
                    if nd.from_lo.is_zero() || nd.to_hi.is_zero() {
                        return Mp::zero(wp);
                    }
                    (&a * nd.to_hi.ln() + &b * nd.from_lo.ln() - &t * &nd.x).exp()
                })?;
                quadrature_error = Some(res.achieved);
                res.values
            }
            SemiclassicalFamily::OpucBessel => (0..count).map(|k| bessel_i(k, &t)).collect(),
            SemiclassicalFamily::ExpLaguerre { alpha } => {
                let a = Mp::from_f64(alpha, wp);
                let rate = Mp::one(wp) - &t;
                let mut m = gamma_mp(&(&a + Mp::one(wp)))? / rate.powf(&(&a + Mp::one(wp)));
                let mut out = Vec::with_capacity(count);
                for k in 0..count {
                    out.push(m.clone());
                    m = m * (&a + Mp::from_i64(k as i64 + 1, wp)) / &rate;
                }
                out
            }
        };
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(OpxError::DivergentMoment { order: k });
        }
        Ok(MomentSequence {
            values: values.into_iter().map(|v| v.with_bits(bits)).collect(),
            precision_bits: bits,
            weight_tag: self.tag(),
            quadrature_error,
        })
    }

    /// a_1²..a_n² and b_0..b_{n-1} at parameter `t` from a Hankel solve at
    /// `bits` precision. Not available for the circle family.
    pub fn recurrence(&self, t: &Mp, n: usize, bits: usize) -> Result<RecurrenceCoefficients<Mp>> {
        if self.on_circle() {
            return Err(invalid("the circle family has Verblunsky coefficients, not a three-term recurrence"));
        }
        let m = self.moments(t, 2 * n + 1, bits)?;
        recurrence_from_moments(&m, n)
    }
}

/// Precision that keeps n Hankel steps comfortably accurate.
pub fn working_bits(n: usize) -> usize {
    192 + 24 * n
}

/// Even moments from ½ Σ_j t^j/j! Γ((2k+2j+1)/4); odd moments vanish. The
/// Gamma table is built once for a bound on |t|.
pub(crate) struct FreudSeries {
    gammas: Vec<Mp>,
    max_terms: usize,
    wp: usize,
}

impl FreudSeries {
    pub(crate) fn new(t_bound: f64, count: usize, wp: usize) -> Result<Self> {
        let max_terms = 64 + (12.0 * t_bound * t_bound) as usize + wp;
        let gammas = quarter_gammas(count.div_ceil(2) + max_terms + 1, wp)?;
        Ok(FreudSeries { gammas, max_terms, wp })
    }

    pub(crate) fn moments(&self, t: &Mp, count: usize) -> Result<Vec<Mp>> {
        let wp = self.wp;
        let tf = t.to_f64().abs();
        let tiny = Mp::one(wp).ldexp(-(wp as i32));
        let mut out = Vec::with_capacity(count);
        for m in 0..count {
            if m % 2 == 1 {
                out.push(Mp::zero(wp));
                continue;
            }
            let k = m / 2;
            let mut coef = Mp::one(wp);
            let mut sum = Mp::zero(wp);
            let mut converged = t.is_zero();
            let terms = if t.is_zero() { 1 } else { self.max_terms };
            for j in 0..terms.min(self.gammas.len() - k) {
                if j > 0 {
                    coef = coef * t / Mp::from_i64(j as i64, wp);
                }
                let term = &coef * &self.gammas[k + j];
                sum += &term;
                if j as f64 > tf * tf && term.abs() <= sum.abs() * &tiny {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(OpxError::NoConvergence { iterations: self.max_terms, last_change: 0.0 });
            }
            out.push(sum.ldexp(-1));
        }
        Ok(out)
    }
}

fn freud_moments(t: &Mp, count: usize, wp: usize) -> Result<Vec<Mp>> {
    FreudSeries::new(t.to_f64().abs(), count, wp)?.moments(t, count)
}

/// Σ_k k^j w_k with w_0 = 1 and w_{k+1} = w_k · ratio(k), summed until the
/// highest-order term drops below 2^{-wp} of its partial sum on a
/// decreasing tail.
fn series_moments<R: FnMut(usize) -> Mp>(count: usize, wp: usize, mut ratio: R) -> Result<Vec<Mp>> {
    const MAX_TERMS: usize = 200_000;
    let tiny = Mp::one(wp).ldexp(-(wp as i32));
    let mut sums = alloc::vec![Mp::zero(wp); count];
    let mut w = Mp::one(wp);
    for k in 0..MAX_TERMS {
        let km = Mp::from_i64(k as i64, wp);
        let mut p = w.clone();
        for s in sums.iter_mut() {
            *s += &p;
            p = p * &km;
        }
        let r = ratio(k);
        if k >= 1 {
            let top = if count > 1 { &w * km.powi(count as i64 - 1) } else { w.clone() };
            let growth = (k as f64 + 1.0) / k as f64;
            let shrink = r.to_f64() * libm::pow(growth, (count - 1) as f64);
            if shrink < 0.5 && top <= &sums[count - 1] * &tiny {
                return Ok(sums);
            }
        }
        w = w * r;
    }
    Err(OpxError::NoConvergence { iterations: MAX_TERMS, last_change: 0.0 })
}

/// m_0 and m_1 by quadrature, the rest from
/// m_{k+1} = (α+k+1) m_k + t m_{k-1}, which integration by parts gives.
fn chen_its_moments(alpha: f64, t: &Mp, count: usize, wp: usize) -> Result<(Vec<Mp>, f64)> {
    let a = Mp::from_f64(alpha, wp);
    let dom = DeDomain::HalfLine { a: Mp::zero(wp) };
    let cutoff = Mp::from_f64(1e6, wp);
    let res = de_moments(&dom, 2, wp, |nd| {
        if nd.from_lo.is_zero() {
            return Mp::zero(wp);
        }
        let inv = t / &nd.from_lo;
        if inv > cutoff || nd.from_lo > cutoff {
            return Mp::zero(wp);
        }
        (&a * nd.from_lo.ln() - &nd.from_lo - inv).exp()
    })?;
    let mut out = res.values;
    out.truncate(count);
    while out.len() < count {
        let k = out.len() - 1;
        let next = (&a + Mp::from_i64(k as i64 + 1, wp)) * &out[k] + t * &out[k - 1];
        out.push(next);
    }
    Ok((out, res.achieved))
}
