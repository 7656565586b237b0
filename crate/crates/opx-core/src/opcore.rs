//! Moments, Hankel determinants, recurrence coefficients, polynomial
//! evaluation and Christoffel–Darboux kernels for a single measure.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal, Uniform};

use crate::error::{invalid, OpxError, Result};
use crate::linalg;
use crate::mc;
use crate::mp::Mp;
use crate::quad_mp::{de_moments, DeDomain, DeNode};
use crate::real::Real;
use crate::special::{gamma, gamma_mp};

/// Jacobi weights live on [0, 1] as x^α (1-x)^β or on [-1, 1] as
/// (1-x)^α (1+x)^β.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum JacobiInterval {
    Unit,
    Symmetric,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Family {
    /// e^{-x²} on ℝ.
    Hermite,
    /// x^α e^{-x} on [0, ∞).
    Laguerre { alpha: f64 },
    Jacobi { alpha: f64, beta: f64, interval: JacobiInterval },
    /// e^{-x⁴ + t x²} on ℝ.
    Freud { t: f64 },
    /// Piecewise-linear density through the table points (x_i, w_i).
    Custom { table: Vec<(f64, f64)> },
}

/// Polynomial pair (σ, τ) with (σw)' = τw, ascending coefficients.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Pearson {
    pub sigma: Vec<f64>,
    pub tau: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Weight {
    pub family: Family,
    pub domain: (f64, f64),
    pub pearson: Option<Pearson>,
}

impl Weight {
    pub fn hermite() -> Self {
        Weight {
            family: Family::Hermite,
            domain: (f64::NEG_INFINITY, f64::INFINITY),
            pearson: Some(Pearson { sigma: vec![1.0], tau: vec![0.0, -2.0] }),
        }
    }

    pub fn laguerre(alpha: f64) -> Result<Self> {
        if !(alpha > -1.0) {
            return Err(invalid("Laguerre parameter must exceed -1"));
        }
        Ok(Weight {
            family: Family::Laguerre { alpha },
            domain: (0.0, f64::INFINITY),
            pearson: Some(Pearson { sigma: vec![0.0, 1.0], tau: vec![alpha + 1.0, -1.0] }),
        })
    }

    pub fn jacobi(alpha: f64, beta: f64, interval: JacobiInterval) -> Result<Self> {
        if !(alpha > -1.0 && beta > -1.0) {
            return Err(invalid("Jacobi parameters must exceed -1"));
        }
        let (domain, pearson) = match interval {
            JacobiInterval::Unit => (
                (0.0, 1.0),
                Pearson { sigma: vec![0.0, 1.0, -1.0], tau: vec![alpha + 1.0, -(alpha + beta + 2.0)] },
            ),
            JacobiInterval::Symmetric => (
                (-1.0, 1.0),
                Pearson { sigma: vec![1.0, 0.0, -1.0], tau: vec![beta - alpha, -(alpha + beta + 2.0)] },
            ),
        };
        Ok(Weight { family: Family::Jacobi { alpha, beta, interval }, domain, pearson: Some(pearson) })
    }

    pub fn freud(t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(invalid("Freud parameter must be finite"));
        }
        Ok(Weight {
            family: Family::Freud { t },
            domain: (f64::NEG_INFINITY, f64::INFINITY),
            pearson: Some(Pearson { sigma: vec![1.0], tau: vec![0.0, 2.0 * t, 0.0, -4.0] }),
        })
    }

    /// A tabulated density; abscissae strictly increasing, values nonnegative
    /// and not all zero.
    pub fn custom(table: Vec<(f64, f64)>) -> Result<Self> {
        if table.len() < 2 {
            return Err(OpxError::Insufficient { needed: 2, available: table.len() });
        }
        if table.windows(2).any(|w| !(w[1].0 > w[0].0)) || table.iter().any(|p| !(p.1 >= 0.0) || !p.0.is_finite()) {
            return Err(invalid("custom table needs increasing abscissae and nonnegative finite values"));
        }
        if table.iter().all(|p| p.1 == 0.0) {
            return Err(invalid("custom density vanishes identically"));
        }
        let domain = (table[0].0, table[table.len() - 1].0);
        Ok(Weight { family: Family::Custom { table }, domain, pearson: None })
    }

    /// Short identifier used in serialized moment tables.
    pub fn tag(&self) -> String {
        match &self.family {
            Family::Hermite => String::from("hermite"),
            Family::Laguerre { alpha } => format!("laguerre(alpha={alpha})"),
            Family::Jacobi { alpha, beta, interval } => {
                let iv = if *interval == JacobiInterval::Unit { "[0,1]" } else { "[-1,1]" };
                format!("jacobi(alpha={alpha},beta={beta},{iv})")
            }
            Family::Freud { t } => format!("freud(t={t})"),
            Family::Custom { table } => format!("custom({} points)", table.len()),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match &self.family {
            Family::Hermite | Family::Freud { .. } => true,
            Family::Jacobi { alpha, beta, interval: JacobiInterval::Symmetric } => alpha == beta,
            _ => false,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.domain.0 && x <= self.domain.1
    }

    /// Density at `x`, zero outside the domain.
    pub fn density(&self, x: f64) -> f64 {
        if !self.contains(x) {
            return 0.0;
        }
        match &self.family {
            Family::Hermite => libm::exp(-x * x),
            Family::Laguerre { alpha } => libm::pow(x, *alpha) * libm::exp(-x),
            Family::Jacobi { alpha, beta, interval: JacobiInterval::Unit } => {
                libm::pow(x, *alpha) * libm::pow(1.0 - x, *beta)
            }
            Family::Jacobi { alpha, beta, interval: JacobiInterval::Symmetric } => {
                libm::pow(1.0 - x, *alpha) * libm::pow(1.0 + x, *beta)
            }
            Family::Freud { t } => libm::exp(-x * x * x * x + t * x * x),
            Family::Custom { table } => interpolate(table, x),
        }
    }

    fn density_mp(&self, nd: &DeNode) -> Mp {
        let x = &nd.x;
        match &self.family {
            Family::Hermite => (-(x * x)).exp(),
            Family::Laguerre { alpha } => pow_or_one(&nd.from_lo, *alpha) * (-x).exp(),
            Family::Jacobi { alpha, beta, interval: JacobiInterval::Unit } => {
                pow_or_one(&nd.from_lo, *alpha) * pow_or_one(&nd.to_hi, *beta)
            }
            Family::Jacobi { alpha, beta, interval: JacobiInterval::Symmetric } => {
                pow_or_one(&nd.to_hi, *alpha) * pow_or_one(&nd.from_lo, *beta)
            }
            Family::Freud { t } => {
                let x2 = x * x;
                (&x2 * x.cst(*t) - &x2 * &x2).exp()
            }
            Family::Custom { table } => {
                // Panels are integrated separately, so only the enclosing
                // panel is ever needed.
                let xf = x.to_f64();
                let i = table.partition_point(|p| p.0 <= xf).clamp(1, table.len() - 1);
                let (x0, w0) = table[i - 1];
                let (x1, w1) = table[i];
                let s = (x - x.cst(x0)) / x.cst(x1 - x0);
                x.cst(w0) + s * x.cst(w1 - w0)
            }
        }
    }

    /// One draw from the normalized weight.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match &self.family {
            Family::Hermite => Normal::new(0.0, core::f64::consts::FRAC_1_SQRT_2).map(|d| d.sample(rng)).unwrap_or(0.0),
            Family::Laguerre { alpha } => Gamma::new(alpha + 1.0, 1.0).map(|d| d.sample(rng)).unwrap_or(0.0),
            Family::Jacobi { alpha, beta, interval: JacobiInterval::Unit } => {
                Beta::new(alpha + 1.0, beta + 1.0).map(|d| d.sample(rng)).unwrap_or(0.5)
            }
            Family::Jacobi { alpha, beta, interval: JacobiInterval::Symmetric } => {
                2.0 * Beta::new(beta + 1.0, alpha + 1.0).map(|d| d.sample(rng)).unwrap_or(0.5) - 1.0
            }
            Family::Freud { t } => {
                // Rejection against N(0,1): e^{-x⁴+(t+1/2)x²} is bounded by e^M.
                let s = t + 0.5;
                let m = if s > 0.0 { s * s / 4.0 } else { 0.0 };
                let normal = Normal::new(0.0, 1.0).unwrap_or_else(|_| unreachable!());
                let unit = Uniform::new(0.0, 1.0);
                loop {
                    let x: f64 = normal.sample(rng);
                    let x2 = x * x;
                    if unit.sample(rng) < libm::exp(-x2 * x2 + s * x2 - m) {
                        return x;
                    }
                }
            }
            Family::Custom { table } => {
                let top = table.iter().map(|p| p.1).fold(0.0, f64::max);
                let ux = Uniform::new_inclusive(self.domain.0, self.domain.1);
                let uy = Uniform::new(0.0, top);
                loop {
                    let x = ux.sample(rng);
                    if uy.sample(rng) < interpolate(table, x) {
                        return x;
                    }
                }
            }
        }
    }
}

fn pow_or_one(base: &Mp, e: f64) -> Mp {
    if e == 0.0 {
        Mp::one(base.bits())
    } else {
        base.powf(&Mp::from_f64(e, base.bits()))
    }
}

fn interpolate(table: &[(f64, f64)], x: f64) -> f64 {
    let i = table.partition_point(|p| p.0 <= x).clamp(1, table.len() - 1);
    let (x0, w0) = table[i - 1];
    let (x1, w1) = table[i];
    w0 + (x - x0) / (x1 - x0) * (w1 - w0)
}

/// Moments m_0..m_{K} of a weight at a fixed precision.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentSequence {
    pub values: Vec<Mp>,
    pub precision_bits: usize,
    pub weight_tag: String,
    /// Relative quadrature error when the moments were integrated numerically.
    pub quadrature_error: Option<f64>,
}

impl MomentSequence {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Moments from the closed-form registry, falling back to quadrature for
/// tabulated densities.
pub fn compute_moments(weight: &Weight, count: usize, precision_bits: usize) -> Result<MomentSequence> {
    if count == 0 {
        return Err(invalid("at least one moment is required"));
    }
    if precision_bits < 53 {
        return Err(invalid("precision must be at least 53 bits"));
    }
    let bits = precision_bits;
    let values = match &weight.family {
        Family::Hermite => hermite_moments(count, bits),
        Family::Laguerre { alpha } => {
            let a = Mp::from_f64(*alpha, bits + 32);
            let mut m = gamma_mp(&(&a + Mp::one(bits + 32)))?;
            let mut out = Vec::with_capacity(count);
            for k in 0..count {
                if k > 0 {
                    m = m * (&a + Mp::from_i64(k as i64, bits + 32));
                }
                out.push(m.with_bits(bits));
            }
            out
        }
        Family::Jacobi { alpha, beta, interval: JacobiInterval::Unit } => {
            beta_ratio_sequence(*alpha, *beta, count, bits + 32)?.into_iter().map(|v| v.with_bits(bits)).collect()
        }
        Family::Jacobi { alpha, beta, interval: JacobiInterval::Symmetric } => {
            // (1-x)^α(1+x)^β with x = 2u - 1 becomes 2^{α+β+1} u^β (1-u)^α.
            let wp = bits + 2 * count + 32;
            let betas = beta_ratio_sequence(*beta, *alpha, count, wp)?;
            let pref = Mp::from_i64(2, wp).powf(&Mp::from_f64(alpha + beta + 1.0, wp));
            (0..count)
                .map(|k| {
                    let mut s = Mp::zero(wp);
                    let mut binom = Mp::one(wp);
                    for j in 0..=k {
                        if j > 0 {
                            binom = binom * Mp::from_i64((k + 1 - j) as i64, wp) / Mp::from_i64(j as i64, wp);
                        }
                        let term = &binom * betas[j].ldexp(j as i32);
                        if (k - j) % 2 == 1 {
                            s -= term;
                        } else {
                            s += term;
                        }
                    }
                    (s * &pref).with_bits(bits)
                })
                .collect()
        }
        Family::Freud { t } => freud_moments(*t, count, bits)?,
        Family::Custom { .. } => return moments_by_quadrature(weight, count, precision_bits),
    };
    Ok(MomentSequence { values, precision_bits, weight_tag: weight.tag(), quadrature_error: None })
}

fn hermite_moments(count: usize, bits: usize) -> Vec<Mp> {
    let mut even = Mp::pi(bits).sqrt();
    let half = Mp::ratio(1, 2, bits);
    (0..count)
        .map(|k| {
            if k % 2 == 1 {
                Mp::zero(bits)
            } else {
                let v = even.clone();
                even *= Mp::from_i64((k / 2) as i64, bits) + &half;
                v
            }
        })
        .collect()
}

/// B(p+k+1, q+1) for k < count.
fn beta_ratio_sequence(p: f64, q: f64, count: usize, wp: usize) -> Result<Vec<Mp>> {
    let pm = Mp::from_f64(p, wp);
    let qm = Mp::from_f64(q, wp);
    let one = Mp::one(wp);
    let mut b = gamma_mp(&(&pm + &one))? * gamma_mp(&(&qm + &one))? / gamma_mp(&(&pm + &qm + Mp::from_i64(2, wp)))?;
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        if k > 0 {
            let kk = Mp::from_i64(k as i64, wp);
            b = b * (&pm + &kk) / (&pm + &qm + &kk + &one);
        }
        out.push(b.clone());
    }
    Ok(out)
}

/// Γ(1/4 + i/2) for i < count, from Γ(1/4) and the reflection value
/// Γ(3/4) = π√2 / Γ(1/4).
pub(crate) fn quarter_gammas(count: usize, wp: usize) -> Result<Vec<Mp>> {
    let g14 = gamma_mp(&Mp::ratio(1, 4, wp))?;
    let g34 = Mp::pi(wp) * Mp::from_i64(2, wp).sqrt() / &g14;
    let mut out = Vec::with_capacity(count);
    let (mut a, mut b) = (g14, g34);
    for i in 0..count {
        if i % 2 == 0 {
            out.push(a.clone());
            a = a * Mp::ratio(1 + 4 * (i / 2) as i64, 4, wp);
        } else {
            out.push(b.clone());
            b = b * Mp::ratio(3 + 4 * (i / 2) as i64, 4, wp);
        }
    }
    Ok(out)
}

/// ∫ x^{2k} e^{-x⁴+tx²} dx = ½ Σ_j t^j/j! Γ(1/4 + (k+j)/2).
fn freud_moments(t: f64, count: usize, bits: usize) -> Result<Vec<Mp>> {
    let guard = 64 + (t * t) as usize;
    let wp = bits + guard;
    let half_count = count.div_ceil(2);
    let max_terms = if t == 0.0 { 1 } else { 64 + (12.0 * t * t + 4.0 * bits as f64 / 8.0) as usize };
    let gammas = quarter_gammas(half_count + max_terms + 1, wp)?;
    let tm = Mp::from_f64(t, wp);
    let tiny = Mp::one(wp).ldexp(-(wp as i32));
    let mut out = Vec::with_capacity(count);
    for m in 0..count {
        if m % 2 == 1 {
            out.push(Mp::zero(bits));
            continue;
        }
        let k = m / 2;
        let mut coef = Mp::one(wp);
        let mut sum = Mp::zero(wp);
        let mut converged = t == 0.0;
        for j in 0..max_terms {
            if j > 0 {
                coef = coef * &tm / Mp::from_i64(j as i64, wp);
            }
            let term = &coef * &gammas[k + j];
            sum += &term;
            if j as f64 > t.abs() * t.abs() && term.abs() <= sum.abs() * &tiny {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(OpxError::NoConvergence { iterations: max_terms, last_change: 0.0 });
        }
        out.push(sum.ldexp(-1).with_bits(bits));
    }
    Ok(out)
}

/// Moments by double-exponential quadrature at the requested precision.
pub fn moments_by_quadrature(weight: &Weight, count: usize, precision_bits: usize) -> Result<MomentSequence> {
    let bits = precision_bits;
    let wp = bits + 32;
    let panels: Vec<DeDomain> = match &weight.family {
        Family::Hermite | Family::Freud { .. } => vec![DeDomain::RealLine],
        Family::Laguerre { .. } => vec![DeDomain::HalfLine { a: Mp::zero(wp) }],
        Family::Jacobi { .. } => vec![DeDomain::Finite {
            a: Mp::from_f64(weight.domain.0, wp),
            b: Mp::from_f64(weight.domain.1, wp),
        }],
        Family::Custom { table } => table
            .windows(2)
            .map(|w| DeDomain::Finite { a: Mp::from_f64(w[0].0, wp), b: Mp::from_f64(w[1].0, wp) })
            .collect(),
    };
    let mut totals = vec![Mp::zero(wp); count];
    let mut achieved = 0.0f64;
    for dom in &panels {
        let r = de_moments(dom, count, wp, |nd| weight.density_mp(nd))?;
        achieved = achieved.max(r.achieved);
        for (t, v) in totals.iter_mut().zip(r.values) {
            *t += v;
        }
    }
    if let Some(k) = totals.iter().position(|v| !v.is_finite()) {
        return Err(OpxError::DivergentMoment { order: k });
    }
    Ok(MomentSequence {
        values: totals.into_iter().map(|v| v.with_bits(bits)).collect(),
        precision_bits,
        weight_tag: weight.tag(),
        quadrature_error: Some(achieved),
    })
}

/// Hankel determinant D_n = det(m_{i+j})_{i,j<n}, with D_0 = 1.
pub fn hankel_det(moments: &MomentSequence, n: usize) -> Result<Mp> {
    let bits = moments.precision_bits;
    if n == 0 {
        return Ok(Mp::one(bits));
    }
    if moments.len() < 2 * n - 1 {
        return Err(OpxError::Insufficient { needed: 2 * n - 1, available: moments.len() });
    }
    let h: Vec<Vec<Mp>> = (0..n).map(|i| (0..n).map(|j| moments.values[i + j].clone()).collect()).collect();
    Ok(linalg::det(h))
}

/// Three-term recurrence data: x P_n = P_{n+1} + b_n P_n + a_n² P_{n-1}.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RecurrenceCoefficients<T> {
    /// a_sq[k] holds a_{k+1}².
    pub a_sq: Vec<T>,
    pub b: Vec<T>,
    pub m0: T,
}

impl<T: Real> RecurrenceCoefficients<T> {
    /// a_n² for n ≥ 1; a_0² = 0 by convention.
    pub fn a2(&self, n: usize) -> T {
        if n == 0 {
            self.m0.zero_like()
        } else {
            self.a_sq[n - 1].clone()
        }
    }

    /// γ_n² = 1 / (m0 Π_{k≤n} a_k²), the squared leading coefficient of p_n.
    pub fn gamma_sq(&self, n: usize) -> Result<T> {
        if n > self.a_sq.len() {
            return Err(OpxError::Insufficient { needed: n, available: self.a_sq.len() });
        }
        let mut d = self.m0.clone();
        for k in 0..n {
            d = d * self.a_sq[k].clone();
        }
        Ok(d.one_like() / d)
    }

    pub fn to_f64(&self) -> RecurrenceCoefficients<f64> {
        RecurrenceCoefficients {
            a_sq: self.a_sq.iter().map(Real::to_f64).collect(),
            b: self.b.iter().map(Real::to_f64).collect(),
            m0: self.m0.to_f64(),
        }
    }
}

impl RecurrenceCoefficients<f64> {
    /// Exact coefficients for e^{-x²}: b_n = 0, a_n² = n/2.
    pub fn hermite(n: usize) -> Self {
        RecurrenceCoefficients {
            a_sq: (1..=n).map(|k| k as f64 / 2.0).collect(),
            b: vec![0.0; n],
            m0: libm::sqrt(core::f64::consts::PI),
        }
    }

    /// Exact coefficients for x^α e^{-x}: b_n = 2n+α+1, a_n² = n(n+α).
    pub fn laguerre(alpha: f64, n: usize) -> Self {
        RecurrenceCoefficients {
            a_sq: (1..=n).map(|k| k as f64 * (k as f64 + alpha)).collect(),
            b: (0..n).map(|k| 2.0 * k as f64 + alpha + 1.0).collect(),
            m0: gamma(alpha + 1.0),
        }
    }
}

/// a_1..a_N and b_0..b_{N-1} from m_0..m_{2N} by one elimination pass on
/// the Hankel matrix: row k of the reduced matrix holds ∫ P_k x^j dμ.
pub fn recurrence_from_moments(moments: &MomentSequence, n: usize) -> Result<RecurrenceCoefficients<Mp>> {
    if moments.len() < 2 * n + 1 {
        return Err(OpxError::Insufficient { needed: 2 * n + 1, available: moments.len() });
    }
    let bits = moments.precision_bits;
    let m = &moments.values;
    if !(m[0].to_f64() > 0.0) {
        return Err(OpxError::VanishingHankel { index: 1 });
    }
    let size = n + 1;
    let mut u: Vec<Vec<Mp>> = (0..size).map(|i| (0..size).map(|j| m[i + j].clone()).collect()).collect();
    let threshold = libm::ldexp(1.0, -(bits as i32) + 16);
    for k in 0..size {
        let row_mag = (0..size).map(|j| moments.values[k + j].to_f64().abs()).fold(0.0, f64::max);
        if !(u[k][k].to_f64().abs() > threshold * row_mag) || u[k][k].is_negative() {
            return Err(OpxError::VanishingHankel { index: k + 1 });
        }
        for i in k + 1..size {
            let f = &u[i][k] / &u[k][k];
            for j in k..size {
                let t = &f * &u[k][j];
                u[i][j] -= t;
            }
        }
    }
    let delta = |k: usize| -> Mp {
        if k == 0 {
            Mp::zero(bits)
        } else {
            -(&u[k - 1][k] / &u[k - 1][k - 1])
        }
    };
    let b = (0..n).map(|k| delta(k) - delta(k + 1)).collect();
    let a_sq = (1..=n).map(|k| &u[k][k] / &u[k - 1][k - 1]).collect();
    Ok(RecurrenceCoefficients { a_sq, b, m0: m[0].clone() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    Monic,
    Orthonormal,
}

/// P_0(x)..P_n(x) (or p_0..p_n) by the forward recurrence.
pub fn eval_poly<T: Real>(rec: &RecurrenceCoefficients<T>, n: usize, x: &T, norm: Normalization) -> Result<Vec<T>> {
    let need_a = if norm == Normalization::Orthonormal { n } else { n.saturating_sub(1) };
    if rec.b.len() < n || rec.a_sq.len() < need_a {
        return Err(OpxError::Insufficient { needed: n, available: rec.b.len().min(rec.a_sq.len() + 1) });
    }
    let mut out = Vec::with_capacity(n + 1);
    match norm {
        Normalization::Monic => {
            out.push(x.one_like());
            if n >= 1 {
                out.push(x.clone() - rec.b[0].clone());
            }
            for k in 1..n {
                let v = (x.clone() - rec.b[k].clone()) * out[k].clone() - rec.a_sq[k - 1].clone() * out[k - 1].clone();
                out.push(v);
            }
        }
        Normalization::Orthonormal => {
            out.push(rec.m0.sqrt().one_like() / rec.m0.sqrt());
            for k in 0..n {
                let a_next = rec.a_sq[k].sqrt();
                let mut v = (x.clone() - rec.b[k].clone()) * out[k].clone();
                if k > 0 {
                    v = v - rec.a_sq[k - 1].sqrt() * out[k - 1].clone();
                }
                out.push(v / a_next);
            }
        }
    }
    Ok(out)
}

/// Orthonormal values and derivatives p_k, p_k' for k ≤ n.
fn orthonormal_with_derivative(rec: &RecurrenceCoefficients<f64>, n: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; n + 1];
    let mut d = vec![0.0; n + 1];
    p[0] = 1.0 / libm::sqrt(rec.m0);
    for k in 0..n {
        let a_next = libm::sqrt(rec.a_sq[k]);
        let a_prev = if k > 0 { libm::sqrt(rec.a_sq[k - 1]) } else { 0.0 };
        let pm = if k > 0 { p[k - 1] } else { 0.0 };
        let dm = if k > 0 { d[k - 1] } else { 0.0 };
        p[k + 1] = ((x - rec.b[k]) * p[k] - a_prev * pm) / a_next;
        d[k + 1] = (p[k] + (x - rec.b[k]) * d[k] - a_prev * dm) / a_next;
    }
    (p, d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum KernelMode {
    /// K_n(x, y) = Σ_{k<n} p_k(x) p_k(y).
    Plain,
    /// K_n(x, y) √(w(x) w(y)).
    Weighted,
}

/// Christoffel–Darboux kernel of degree cutoff n.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelOperator {
    pub n: usize,
    pub recurrence: RecurrenceCoefficients<f64>,
    pub weight: Weight,
    pub mode: KernelMode,
}

/// |x - y| below which the confluent form is used, relative to 1 + |x|.
pub const CONFLUENT_SWITCH: f64 = 1e-6;

impl KernelOperator {
    /// Builds the kernel, taking recurrence coefficients from exact formulas
    /// where known and from high-precision moments otherwise.
    pub fn new(weight: Weight, n: usize, mode: KernelMode) -> Result<Self> {
        if n == 0 {
            return Err(invalid("kernel degree must be at least 1"));
        }
        let recurrence = match &weight.family {
            Family::Hermite => RecurrenceCoefficients::hermite(n),
            Family::Laguerre { alpha } => RecurrenceCoefficients::laguerre(*alpha, n),
            _ => {
                let bits = 256.max(24 * n);
                let m = compute_moments(&weight, 2 * n + 1, bits)?;
                recurrence_from_moments(&m, n)?.to_f64()
            }
        };
        Ok(KernelOperator { n, recurrence, weight, mode })
    }

    pub fn with_recurrence(weight: Weight, recurrence: RecurrenceCoefficients<f64>, n: usize, mode: KernelMode) -> Result<Self> {
        if n == 0 || recurrence.a_sq.len() < n || recurrence.b.len() < n {
            return Err(OpxError::Insufficient { needed: n, available: recurrence.a_sq.len().min(recurrence.b.len()) });
        }
        Ok(KernelOperator { n, recurrence, weight, mode })
    }

    pub fn with_mode(&self, mode: KernelMode) -> Self {
        KernelOperator { mode, ..self.clone() }
    }

    fn weight_factor(&self, x: f64, y: f64) -> Result<f64> {
        match self.mode {
            KernelMode::Plain => Ok(1.0),
            KernelMode::Weighted => {
                for v in [x, y] {
                    if !self.weight.contains(v) {
                        return Err(OpxError::OutsideDomain { x: v });
                    }
                }
                Ok(libm::sqrt(self.weight.density(x) * self.weight.density(y)))
            }
        }
    }

    /// Σ_{k<n} p_k(x) p_k(y), times the weight factor in weighted mode.
    pub fn sum_form(&self, x: f64, y: f64) -> Result<f64> {
        let f = self.weight_factor(x, y)?;
        let (px, _) = orthonormal_with_derivative(&self.recurrence, self.n - 1, x);
        let (py, _) = orthonormal_with_derivative(&self.recurrence, self.n - 1, y);
        Ok(f * px.iter().zip(&py).map(|(a, b)| a * b).sum::<f64>())
    }
}

/// Christoffel–Darboux closed form, switching to the confluent form when
/// x and y nearly coincide.
pub fn cd_kernel(kernel: &KernelOperator, x: f64, y: f64) -> Result<f64> {
    let f = kernel.weight_factor(x, y)?;
    let n = kernel.n;
    let rec = &kernel.recurrence;
    let an = libm::sqrt(rec.a_sq[n - 1]);
    let (px, dx) = orthonormal_with_derivative(rec, n, x);
    let v = if (x - y).abs() < CONFLUENT_SWITCH * (1.0 + x.abs()) {
        an * (dx[n] * px[n - 1] - dx[n - 1] * px[n])
    } else {
        let (py, _) = orthonormal_with_derivative(rec, n, y);
        an * (px[n] * py[n - 1] - px[n - 1] * py[n]) / (x - y)
    };
    Ok(f * v)
}

/// Gauss rule with n nodes from the Jacobi matrix (Golub–Welsch).
pub fn gauss_rule(rec: &RecurrenceCoefficients<f64>, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if rec.b.len() < n || rec.a_sq.len() + 1 < n {
        return Err(OpxError::Insufficient { needed: n, available: rec.b.len() });
    }
    let off: Vec<f64> = rec.a_sq[..n.saturating_sub(1)].iter().map(|v| libm::sqrt(*v)).collect();
    let (x, v) = linalg::tridiagonal_eigen(&rec.b[..n], &off)?;
    Ok((x, v.iter().map(|z| rec.m0 * z * z).collect()))
}

/// Zeros of P_n, ascending, by bisection inside the interlacing brackets
/// formed by the zeros of P_{n-1}.
pub fn zeros(rec: &RecurrenceCoefficients<f64>, n: usize) -> Result<Vec<f64>> {
    if rec.b.len() < n || rec.a_sq.len() + 1 < n {
        return Err(OpxError::Insufficient { needed: n, available: rec.b.len() });
    }
    let mut bound = 0.0f64;
    for k in 0..n {
        let lo = if k > 0 { libm::sqrt(rec.a_sq[k - 1]) } else { 0.0 };
        let hi = if k + 1 < n { libm::sqrt(rec.a_sq[k]) } else { 0.0 };
        bound = bound.max(rec.b[k].abs() + lo + hi);
    }
    let bound = bound * (1.0 + 1e-12) + 1e-300;
    let p = |k: usize, x: f64| -> f64 {
        eval_poly(rec, k, &x, Normalization::Monic).map(|v| v[k]).unwrap_or(f64::NAN)
    };
    let mut prev: Vec<f64> = Vec::new();
    for k in 1..=n {
        let mut edges = vec![-bound];
        edges.extend_from_slice(&prev);
        edges.push(bound);
        let mut cur = Vec::with_capacity(k);
        for w in edges.windows(2) {
            cur.push(crate::poly::bisect(|x| p(k, x), w[0], w[1]));
        }
        prev = cur;
    }
    Ok(prev)
}

/// Δ(x) = Π_{i<j} (x_j - x_i).
pub fn vandermonde(points: &[f64]) -> f64 {
    let mut v = 1.0;
    for j in 0..points.len() {
        for i in 0..j {
            v *= points[j] - points[i];
        }
    }
    v
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HeineMode {
    /// Estimate D_n.
    Det,
    /// Estimate P_n(x).
    Poly(f64),
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Number of observables per Heine draw.
pub fn heine_dim(mode: HeineMode) -> usize {
    match mode {
        HeineMode::Det => 1,
        HeineMode::Poly(_) => 2,
    }
}

/// One Heine observation: Δ² and, in polynomial mode, Π(x - x_i) Δ².
pub fn heine_draw(weight: &Weight, n: usize, mode: HeineMode, rng: &mut ChaCha8Rng, out: &mut [f64], pts: &mut Vec<f64>) {
    pts.clear();
    for _ in 0..n {
        pts.push(weight.sample(rng));
    }
    let d2 = {
        let v = vandermonde(pts);
        v * v
    };
    match mode {
        HeineMode::Det => out[0] = d2,
        HeineMode::Poly(x) => {
            out[0] = pts.iter().map(|p| x - p).product::<f64>() * d2;
            out[1] = d2;
        }
    }
}

/// Turns merged Heine sums into an estimate.
pub fn heine_finish(weight_mass: f64, n: usize, mode: HeineMode, acc: &mc::Accumulator) -> MonteCarloEstimate {
    let samples = acc.count as usize;
    match mode {
        HeineMode::Det => {
            let mut f = 1.0;
            for k in 1..=n {
                f *= weight_mass / k as f64;
            }
            MonteCarloEstimate { value: f * acc.mean(0), stderr: f * acc.stderr(0), samples }
        }
        HeineMode::Poly(_) => {
            let (p, d) = (acc.mean(0), acc.mean(1));
            let r = p / d;
            let var = acc.cov(0, 0) - 2.0 * r * acc.cov(0, 1) + r * r * acc.cov(1, 1);
            let stderr = libm::sqrt(var.max(0.0) / samples as f64) / d.abs();
            MonteCarloEstimate { value: r, stderr, samples }
        }
    }
}

/// Monte Carlo evaluation of the Heine integrals with points drawn from the
/// normalized weight.
pub fn heine_monte_carlo(weight: &Weight, n: usize, samples: usize, mode: HeineMode, seed: u64) -> Result<MonteCarloEstimate> {
    if n == 0 {
        return Err(invalid("Heine integrals need n ≥ 1"));
    }
    if samples < 1000 {
        return Err(invalid("at least 1000 samples are required"));
    }
    let m0 = compute_moments(weight, 1, 128)?.values[0].to_f64();
    if !(m0 > 0.0 && m0.is_finite()) {
        return Err(invalid("weight is not normalizable"));
    }
    let mut pts = Vec::with_capacity(n);
    let acc = mc::run(samples, seed, heine_dim(mode), |rng, out| heine_draw(weight, n, mode, rng, out, &mut pts));
    Ok(heine_finish(m0, n, mode, &acc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn hermite_moments_closed_form() {
        let m = compute_moments(&Weight::hermite(), 3, 128).unwrap();
        let sp = core::f64::consts::PI.sqrt();
        assert!(close(m.values[0].to_f64(), sp, 1e-15));
        assert!(m.values[1].is_zero());
        assert!(close(m.values[2].to_f64(), sp / 2.0, 1e-15));
    }

    #[test]
    fn freud_moments_against_gamma() {
        let m = compute_moments(&Weight::freud(0.0).unwrap(), 3, 128).unwrap();
        assert!(close(m.values[0].to_f64(), gamma(0.25) / 2.0, 1e-14));
        assert!(close(m.values[2].to_f64(), gamma(0.75) / 2.0, 1e-14));
        assert!((m.values[0].to_f64() - 1.81280495).abs() < 1e-8);
        assert!((m.values[2].to_f64() - 0.612_708_351_232_588_8).abs() < 1e-15);
    }

    #[test]
    fn freud_series_matches_quadrature() {
        for t in [-1.5, 0.7, 2.0] {
            let w = Weight::freud(t).unwrap();
            let a = compute_moments(&w, 7, 160).unwrap();
            let b = moments_by_quadrature(&w, 7, 160).unwrap();
            for k in 0..7 {
                let d = (&a.values[k] - &b.values[k]).abs();
                assert!(d <= a.values[0].abs().ldexp(-100), "t={t} k={k}");
            }
        }
    }

    #[test]
    fn laguerre_and_jacobi_closed_forms_match_quadrature() {
        let ws = [
            Weight::laguerre(0.5).unwrap(),
            Weight::jacobi(0.5, -0.3, JacobiInterval::Unit).unwrap(),
            Weight::jacobi(1.5, 0.25, JacobiInterval::Symmetric).unwrap(),
        ];
        for w in ws {
            let a = compute_moments(&w, 6, 128).unwrap();
            let b = moments_by_quadrature(&w, 6, 128).unwrap();
            for k in 0..6 {
                let rel = ((&a.values[k] - &b.values[k]).abs() / a.values[0].abs()).to_f64();
                assert!(rel < 1e-25, "{} k={k} rel={rel:e}", w.tag());
            }
        }
    }

    #[test]
    fn laguerre_factorials_and_hankel() {
        let m = compute_moments(&Weight::laguerre(0.0).unwrap(), 5, 128).unwrap();
        let v: Vec<f64> = m.values.iter().map(|x| x.to_f64()).collect();
        assert_eq!(&v[..4], &[1.0, 1.0, 2.0, 6.0]);
        assert!(close(hankel_det(&m, 3).unwrap().to_f64(), 4.0, 1e-30));
        assert_eq!(hankel_det(&m, 0).unwrap().to_f64(), 1.0);
        assert!(hankel_det(&m, 4).is_err());
    }

    #[test]
    fn hermite_hankel() {
        let m = compute_moments(&Weight::hermite(), 5, 128).unwrap();
        let pi = core::f64::consts::PI;
        assert!(close(hankel_det(&m, 1).unwrap().to_f64(), pi.sqrt(), 1e-15));
        assert!(close(hankel_det(&m, 2).unwrap().to_f64(), pi / 2.0, 1e-15));
    }

    #[test]
    fn recurrence_examples() {
        let m = compute_moments(&Weight::hermite(), 7, 256).unwrap();
        let r = recurrence_from_moments(&m, 3).unwrap().to_f64();
        assert_eq!(r.a_sq.len(), 3);
        for (k, a) in r.a_sq.iter().enumerate() {
            assert!(close(*a, (k + 1) as f64 / 2.0, 1e-15));
        }
        assert!(r.b.iter().all(|b| b.abs() < 1e-30));

        let m = compute_moments(&Weight::laguerre(0.0).unwrap(), 5, 256).unwrap();
        let r = recurrence_from_moments(&m, 2).unwrap().to_f64();
        assert!(close(r.b[0], 1.0, 1e-15) && close(r.a_sq[0], 1.0, 1e-15) && close(r.b[1], 3.0, 1e-15));

        let m = compute_moments(&Weight::freud(0.0).unwrap(), 3, 256).unwrap();
        let r = recurrence_from_moments(&m, 1).unwrap().to_f64();
        assert!((r.a_sq[0] - gamma(0.75) / gamma(0.25)).abs() < 1e-15);
        assert!((r.a_sq[0] - 0.337_989_120_033_642_4).abs() < 1e-15);
    }

    #[test]
    fn finite_support_detected() {
        // Two-point measure at ±1: D_3 = 0.
        let bits = 128;
        let values = (0..7).map(|k| if k % 2 == 0 { Mp::from_i64(2, bits) } else { Mp::zero(bits) }).collect();
        let m = MomentSequence { values, precision_bits: bits, weight_tag: String::from("two-point"), quadrature_error: None };
        assert_eq!(recurrence_from_moments(&m, 3), Err(OpxError::VanishingHankel { index: 3 }));
    }

    #[test]
    fn poly_examples() {
        let h = RecurrenceCoefficients::hermite(3);
        assert_eq!(eval_poly(&h, 2, &0.0, Normalization::Monic).unwrap(), vec![1.0, 0.0, -0.5]);
        assert_eq!(eval_poly(&h, 0, &5.0, Normalization::Monic).unwrap(), vec![1.0]);
        let l = RecurrenceCoefficients::laguerre(0.0, 2);
        assert_eq!(eval_poly(&l, 1, &1.0, Normalization::Monic).unwrap(), vec![1.0, 0.0]);
        let p = eval_poly(&h, 2, &0.3, Normalization::Orthonormal).unwrap();
        let g2 = h.gamma_sq(2).unwrap();
        let mp = eval_poly(&h, 2, &0.3, Normalization::Monic).unwrap();
        assert!(close(p[2], libm::sqrt(g2) * mp[2], 1e-15));
        assert!(eval_poly(&h, 5, &0.0, Normalization::Monic).is_err());
    }

    #[test]
    fn kernel_examples() {
        let sp = core::f64::consts::PI.sqrt();
        let k1 = KernelOperator::new(Weight::hermite(), 1, KernelMode::Plain).unwrap();
        assert!(close(cd_kernel(&k1, 0.3, -1.2).unwrap(), 1.0 / sp, 1e-15));
        let k2 = KernelOperator::new(Weight::hermite(), 2, KernelMode::Plain).unwrap();
        assert!(close(cd_kernel(&k2, 0.0, 0.0).unwrap(), 1.0 / sp, 1e-15));
        let k3 = KernelOperator::new(Weight::hermite(), 3, KernelMode::Plain).unwrap();
        let a = cd_kernel(&k3, 0.3, 0.7).unwrap();
        assert!((a - k3.sum_form(0.3, 0.7).unwrap()).abs() < 1e-12);
        let lag = KernelOperator::new(Weight::laguerre(0.0).unwrap(), 2, KernelMode::Weighted).unwrap();
        assert!(matches!(cd_kernel(&lag, -1.0, 1.0), Err(OpxError::OutsideDomain { .. })));
    }

    #[test]
    fn gauss_rule_and_zeros_agree() {
        let h = RecurrenceCoefficients::hermite(6);
        let (x, w) = gauss_rule(&h, 6).unwrap();
        let z = zeros(&h, 6).unwrap();
        for i in 0..6 {
            assert!((x[i] - z[i]).abs() < 1e-12);
        }
        let mass: f64 = w.iter().sum();
        assert!(close(mass, core::f64::consts::PI.sqrt(), 1e-14));
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!(close(m4, 0.75 * core::f64::consts::PI.sqrt(), 1e-13));
    }

    #[test]
    fn heine_det_and_poly() {
        let w = Weight::hermite();
        let d1 = heine_monte_carlo(&w, 1, 2000, HeineMode::Det, 1).unwrap();
        assert!(close(d1.value, core::f64::consts::PI.sqrt(), 1e-12));
        let d2 = heine_monte_carlo(&w, 2, 100_000, HeineMode::Det, 3).unwrap();
        assert!((d2.value - core::f64::consts::PI / 2.0).abs() < 4.0 * d2.stderr);
        let p2 = heine_monte_carlo(&w, 2, 100_000, HeineMode::Poly(0.0), 3).unwrap();
        assert!((p2.value + 0.5).abs() < 4.0 * p2.stderr);
        let again = heine_monte_carlo(&w, 2, 100_000, HeineMode::Poly(0.0), 3).unwrap();
        assert_eq!(p2, again);
        assert!(heine_monte_carlo(&w, 2, 10, HeineMode::Det, 3).is_err());
    }

    #[test]
    fn freud_sampler_matches_second_moment() {
        let w = Weight::freud(1.0).unwrap();
        let m = compute_moments(&w, 3, 128).unwrap();
        let want = m.values[2].to_f64() / m.values[0].to_f64();
        let acc = mc::run(50_000, 5, 1, |rng, out| {
            let x = w.sample(rng);
            out[0] = x * x;
        });
        assert!((acc.mean(0) - want).abs() < 4.0 * acc.stderr(0));
    }

    #[test]
    fn custom_density_reports_error() {
        let w = Weight::custom(vec![(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]).unwrap();
        let m = compute_moments(&w, 3, 128).unwrap();
        assert!(close(m.values[0].to_f64(), 0.5, 1e-20));
        assert!(close(m.values[1].to_f64(), 0.25, 1e-20));
        assert!(m.quadrature_error.is_some());
        assert!(Weight::custom(vec![(0.0, 1.0)]).is_err());
    }
}
