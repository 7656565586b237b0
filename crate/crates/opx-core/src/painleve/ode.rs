use alloc::vec::Vec;

use super::family::{working_bits, SemiclassicalFamily};
use super::opuc::{verblunsky_bits, verblunsky_pair};
use crate::error::{invalid, OpxError, Result};
use crate::mp::Mp;

/// Recurrence-coefficient quantities that satisfy a Painlevé equation in the
/// deformation parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum OdeQuantity {
    /// x = a_n² for e^{-x⁴+tx²}:
    /// x'' = x'²/(2x) + 3x³/2 - tx² + x(n/4 + t²/8) - n²/(32x).
    P4Freud,
    /// y = 1 - c/a_n² for c^k/((β)_k k!), as a function of c:
    /// y'' = (1/(2y) + 1/(y-1))y'² - y'/c + (1-y)²/c² (n²y/2 - (β-1)²/(2y)) - 2y/c.
    P5Charlier { beta: f64 },
    /// α_n for e^{t cos θ}:
    /// α'' = -α α'²/(1-α²) - α'/t - α(1-α²) + (n+1)²α/(t²(1-α²)).
    P5Opuc,
    /// c = b_n - 2n - α - 1 for x^α e^{-x-t/x}:
    /// c'' = c'²/c - c'/t + (2n+α+1)c²/t² + c³/t² + α/t - 1/c.
    P3ChenIts { alpha: f64 },
    /// y = 1 + t/R_n with R_n = (2n+1+α+β - t - t b_n)/2 for
    /// (1-x)^α(1+x)^β e^{-tx}:
    /// y'' = (3y-1)y'²/(2y(y-1)) - y'/t + 2(2n+1+α+β)y/t - 2y(y+1)/(y-1)
    ///       + (y-1)²/t² (α²y/2 - β²/(2y)).
    P5Bce { alpha: f64, beta: f64 },
}

impl OdeQuantity {
    pub fn name(&self) -> &'static str {
        match self {
            OdeQuantity::P4Freud => "p4_freud",
            OdeQuantity::P5Charlier { .. } => "p5_charlier",
            OdeQuantity::P5Opuc => "p5_opuc",
            OdeQuantity::P3ChenIts { .. } => "p3_chen_its",
            OdeQuantity::P5Bce { .. } => "p5_bce",
        }
    }

    pub fn family(&self) -> SemiclassicalFamily {
        match *self {
            OdeQuantity::P4Freud => SemiclassicalFamily::Freud,
            OdeQuantity::P5Charlier { beta } => SemiclassicalFamily::GenCharlier { beta, c: 1.0 },
            OdeQuantity::P5Opuc => SemiclassicalFamily::OpucBessel,
            OdeQuantity::P3ChenIts { alpha } => SemiclassicalFamily::ChenIts { alpha },
            OdeQuantity::P5Bce { alpha, beta } => SemiclassicalFamily::Bce { alpha, beta },
        }
    }

    fn bits(&self, n: usize) -> usize {
        match self {
            OdeQuantity::P5Opuc => verblunsky_bits(n + 1),
            _ => working_bits(n + 1),
        }
    }

    /// The transformed variable at parameter `s` (c for the Charlier case).
    /// Returns the value and the quantities whose zeros are poles.
    fn variable(&self, n: usize, s: &Mp, bits: usize) -> Result<(Mp, Vec<Mp>)> {
        let fam = self.family();
        let one = Mp::one(bits);
        Ok(match *self {
            OdeQuantity::P4Freud => {
                let x = fam.recurrence(s, n, bits)?.a_sq[n - 1].clone();
                (x.clone(), alloc::vec![x])
            }
            OdeQuantity::P5Charlier { .. } => {
                if !(s.to_f64() > 0.0) {
                    return Err(OpxError::Pole { t: s.to_f64() });
                }
                let a2 = fam.recurrence(&s.ln(), n, bits)?.a_sq[n - 1].clone();
                let y = &one - s / a2;
                (y.clone(), alloc::vec![y.clone(), y - one, s.clone()])
            }
            OdeQuantity::P5Opuc => {
                let (det, _) = verblunsky_pair(s, n)?;
                let a = det[n].clone();
                (a.clone(), alloc::vec![&one - &a * &a, s.clone()])
            }
            OdeQuantity::P3ChenIts { alpha } => {
                let b = fam.recurrence(s, n + 1, bits)?.b[n].clone();
                let c = b - Mp::from_f64(2.0 * n as f64 + alpha + 1.0, bits);
                (c.clone(), alloc::vec![c, s.clone()])
            }
            OdeQuantity::P5Bce { alpha, beta } => {
                let b = fam.recurrence(s, n + 1, bits)?.b[n].clone();
                let k = Mp::from_f64(2.0 * n as f64 + 1.0 + alpha + beta, bits);
                let r = (k - s - s * b).ldexp(-1);
                if r.is_zero() {
                    return Err(OpxError::Pole { t: s.to_f64() });
                }
                let y = &one + s / &r;
                (y.clone(), alloc::vec![y.clone(), y - one, s.clone(), r])
            }
        })
    }

    fn rhs(&self, n: usize, s: &Mp, y: &Mp, y1: &Mp) -> Mp {
        let bits = y.bits();
        let c = |v: f64| Mp::from_f64(v, bits);
        let nf = n as f64;
        let one = Mp::one(bits);
        match *self {
            OdeQuantity::P4Freud => {
                let x = y;
                y1 * y1 / x.ldexp(1) + c(1.5) * x * x * x - s * x * x
                    + x * (c(nf / 4.0) + s * s / c(8.0))
                    - c(nf * nf / 32.0) / x
            }
            OdeQuantity::P5Charlier { beta } => {
                let ym1 = y - &one;
                let bracket = c(nf * nf / 2.0) * y - c((beta - 1.0) * (beta - 1.0) / 2.0) / y;
                (y.ldexp(1).recip() + ym1.recip()) * y1 * y1 - y1 / s + &ym1 * &ym1 / (s * s) * bracket
                    - y.ldexp(1) / s
            }
            OdeQuantity::P5Opuc => {
                let q = &one - y * y;
                -(y * y1 * y1 / &q) - y1 / s - y * &q + c((nf + 1.0) * (nf + 1.0)) * y / (s * s * &q)
            }
            OdeQuantity::P3ChenIts { alpha } => {
                let t2 = s * s;
                y1 * y1 / y - y1 / s + c(2.0 * nf + alpha + 1.0) * y * y / &t2 + y * y * y / &t2 + c(alpha) / s
                    - y.recip()
            }
            OdeQuantity::P5Bce { alpha, beta } => {
                let ym1 = y - &one;
                let k = c(2.0 * nf + 1.0 + alpha + beta);
                (c(3.0) * y - &one) * y1 * y1 / (y.ldexp(1) * &ym1) - y1 / s + k.ldexp(1) * y / s
                    - y.ldexp(1) * (y + &one) / &ym1
                    + &ym1 * &ym1 / (s * s) * (c(alpha * alpha / 2.0) * y - c(beta * beta / 2.0) / y)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OdeResidual {
    pub quantity: OdeQuantity,
    pub n: usize,
    pub t: f64,
    pub h: f64,
    pub value: f64,
    pub derivative: f64,
    pub second_derivative: f64,
    pub residual: f64,
}

/// Spacing (unit roundoff)^{1/3} scaled by |t| + 1.
pub fn default_ode_step(t: f64, bits: usize) -> f64 {
    libm::ldexp(1.0, -(bits as i32) / 3) * (t.abs() + 1.0)
}

/// |y'' - RHS(y, y')| with y', y'' from second-order central differences on
/// the stencil t-h, t, t+h. For `P5Charlier` the parameter `t` is c.
pub fn painleve_ode_residual(quantity: OdeQuantity, n: usize, t: f64, h: f64) -> Result<OdeResidual> {
    let min_n = if matches!(quantity, OdeQuantity::P4Freud | OdeQuantity::P5Charlier { .. }) { 1 } else { 0 };
    if n < min_n {
        return Err(invalid("n too small for this quantity"));
    }
    if !(h > 0.0) || !t.is_finite() {
        return Err(invalid("step must be positive and t finite"));
    }
    quantity.family().validate()?;
    if quantity != OdeQuantity::P4Freud && (t - h) * (t + h) <= 0.0 {
        return Err(OpxError::Pole { t });
    }
    let bits = quantity.bits(n);
    let tm = Mp::from_f64(t, bits);
    let hm = Mp::from_f64(h, bits);
    let mut vals = Vec::with_capacity(3);
    let mut signs: Option<Vec<bool>> = None;
    for s in [&tm - &hm, tm.clone(), &tm + &hm] {
        let (y, poles) = quantity.variable(n, &s, bits)?;
        if !y.is_finite() || poles.iter().any(Mp::is_zero) {
            return Err(OpxError::Pole { t });
        }
        let sg: Vec<bool> = poles.iter().map(Mp::is_negative).collect();
        match &signs {
            Some(prev) if *prev != sg => return Err(OpxError::Pole { t }),
            _ => signs = Some(sg),
        }
        vals.push(y);
    }
    let d1 = (&vals[2] - &vals[0]) / hm.ldexp(1);
    let d2 = (&vals[2] - vals[1].ldexp(1) + &vals[0]) / (&hm * &hm);
    let rhs = quantity.rhs(n, &tm, &vals[1], &d1);
    Ok(OdeResidual {
        quantity,
        n,
        t,
        h,
        value: vals[1].to_f64(),
        derivative: d1.to_f64(),
        second_derivative: d2.to_f64(),
        residual: (d2 - rhs).to_f64().abs(),
    })
}
