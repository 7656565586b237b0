use alloc::string::String;
use alloc::vec::Vec;

use super::family::{working_bits, SemiclassicalFamily};
use super::opuc::{dp2_residuals, verblunsky_sequence};
use crate::error::{invalid, OpxError, Result};
use crate::mp::Mp;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SystemRow {
    pub n: usize,
    pub equation: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SystemResidual {
    pub family: String,
    pub t: f64,
    pub rows: Vec<SystemRow>,
}

impl SystemResidual {
    pub fn max(&self) -> f64 {
        self.rows.iter().map(|r| r.value).fold(0.0, f64::max)
    }
}

/// Defects of the family's discrete Painlevé system for n < N at
/// deformation time `t`.
///
/// - freud: 4x_n(x_{n+1} + x_n + x_{n-1} - t/2) = n.
/// - gen_charlier: b_n + b_{n-1} - n + β = cn/a_n² and
///   (a_{n+1}² - c)(a_n² - c) = c(b_n - n)(b_n - n + β - 1).
/// - gen_meixner: with u_n = (na - a_n²)/(γ-1), v_n = (n + γ - β + a - b_n)a/(γ-1),
///   (u_n + v_n)(u_{n+1} + v_n) = (γ-1)/a² v_n(v_n - a)(v_n - a(γ-β)/(γ-1)) and
///   (u_n + v_n)(u_n + v_{n-1}) = u_n/(u_n - an/(γ-1)) (u_n + a)(u_n + a(γ-β)/(γ-1)).
/// - chen_its: with x_n = 1/(b_n - 2n - α - 1), y_n = a_n² - n(n+α) - Σ_{j<n} 1/x_j,
///   x_n + x_{n-1} = (nt - (2n+α)y_n)/(y_n(y_n - t)) and
///   y_n + y_{n+1} = t - (2n+α+1)/x_n - 1/x_n².
/// - bce_jacobi: with R_n = (2n+1+α+β - t - tb_n)/2 and r_n the root of
///   (t/R_n) r² + (2n+α+β + tα/R_n) r + t(t+R_n)a_n² - n(n+β) = 0 vanishing at n = 0,
///   n(n+β) - (2n+α+β)r_n = r_n(r_n+α)(t²/(R_nR_{n-1}) + t/R_n + t/R_{n-1}) and
///   2t(r_{n+1} + r_n) = 4R_n² - 2R_n(2n+1+α+β-2t) - 2αt.
/// - opuc_bessel: the d-PII defects of the Verblunsky coefficients.
pub fn semiclassical_system_residual(family: &SemiclassicalFamily, t: f64, n: usize) -> Result<SystemResidual> {
    if n < 2 {
        return Err(OpxError::Insufficient { needed: 2, available: n });
    }
    family.validate_time(t)?;
    let mut rows = Vec::new();
    let mut push = |k: usize, equation: &'static str, v: Mp| rows.push(SystemRow { n: k, equation: equation.into(), value: v.to_f64().abs() });
    let bits = working_bits(n + 1);
    let tm = Mp::from_f64(t, bits);
    let c = |v: f64| Mp::from_f64(v, bits);
    let int = |k: usize| Mp::from_i64(k as i64, bits);
    match *family {
        SemiclassicalFamily::Freud => {
            let rec = family.recurrence(&tm, n, bits)?;
            for k in 1..n {
                let s = rec.a2(k + 1) + rec.a2(k) + rec.a2(k - 1) - tm.ldexp(-1);
                push(k, "dpI", rec.a2(k) * s.ldexp(2) - int(k));
            }
        }
        SemiclassicalFamily::GenCharlier { beta, c: c0 } => {
            let rec = family.recurrence(&tm, n, bits)?;
            let cc = c(c0) * tm.exp();
            let be = c(beta);
            for k in 0..n {
                if k >= 1 {
                    let lhs = &rec.b[k] + &rec.b[k - 1] - int(k) + &be;
                    push(k, "e1", lhs - &cc * int(k) / rec.a2(k));
                }
                let d = &rec.b[k] - int(k);
                let lhs = (rec.a2(k + 1) - &cc) * (rec.a2(k) - &cc);
                push(k, "e2", lhs - &cc * &d * (&d + &be - c(1.0)));
            }
        }
        SemiclassicalFamily::GenMeixner { gamma, beta, a } => {
            if (gamma - 1.0).abs() < 1e-12 {
                return Err(invalid("the (u, v) substitution needs γ ≠ 1"));
            }
            let rec = family.recurrence(&tm, n, bits)?;
            let am = c(a) * tm.exp();
            let g1 = c(gamma - 1.0);
            let gb = &am * c(gamma - beta) / &g1;
            let u = |k: usize| (int(k) * &am - rec.a2(k)) / &g1;
            let v = |k: usize| (int(k) + c(gamma - beta) + &am - &rec.b[k]) * &am / &g1;
            for k in 0..n {
                let (uk, vk) = (u(k), v(k));
                let lhs = (&uk + &vk) * (u(k + 1) + &vk);
                let rhs = &g1 / (&am * &am) * &vk * (&vk - &am) * (&vk - &gb);
                push(k, "e1", lhs - rhs);
                if k >= 1 {
                    let lhs = (&uk + &vk) * (&uk + v(k - 1));
                    let rhs = &uk / (&uk - &am * int(k) / &g1) * (&uk + &am) * (&uk + &gb);
                    push(k, "e2", lhs - rhs);
                }
            }
        }
        SemiclassicalFamily::ChenIts { alpha } => {
            let rec = family.recurrence(&tm, n, bits)?;
            let al = c(alpha);
            let cs: Vec<Mp> = (0..n).map(|k| &rec.b[k] - int(2 * k + 1) - &al).collect();
            let x = |k: usize| cs[k].recip();
            let mut y = Vec::with_capacity(n + 1);
            let mut sum = Mp::zero(bits);
            for k in 0..=n {
                y.push(rec.a2(k) - int(k) * (int(k) + &al) - &sum);
                if k < n {
                    sum += &cs[k];
                }
            }
            for k in 0..n {
                if k >= 1 {
                    let rhs = (int(k) * &tm - (int(2 * k) + &al) * &y[k]) / (&y[k] * (&y[k] - &tm));
                    push(k, "r1", x(k) + x(k - 1) - rhs);
                }
                let xk = x(k);
                let rhs = &tm - (int(2 * k + 1) + &al) / &xk - (&xk * &xk).recip();
                push(k, "r2", &y[k] + &y[k + 1] - rhs);
            }
        }
        SemiclassicalFamily::Bce { alpha, beta } => {
            let rec = family.recurrence(&tm, n + 1, bits)?;
            let (al, be) = (c(alpha), c(beta));
            let big_r: Vec<Mp> = (0..=n)
                .map(|k| (int(2 * k + 1) + &al + &be - &tm - &tm * &rec.b[k]).ldexp(-1))
                .collect();
            let mut r = Vec::with_capacity(n + 1);
            for k in 0..=n {
                r.push(bce_r(k, &tm, &big_r[k], &rec.a2(k), &al, &be)?);
            }
            for k in 0..n {
                if k >= 1 {
                    let lhs = int(k) * (int(k) + &be) - (int(2 * k) + &al + &be) * &r[k];
                    let f = &tm * &tm / (&big_r[k] * &big_r[k - 1]) + &tm / &big_r[k] + &tm / &big_r[k - 1];
                    push(k, "e2", lhs - &r[k] * (&r[k] + &al) * f);
                }
                let rk = &big_r[k];
                let rhs = rk * rk * c(4.0) - rk.ldexp(1) * (int(2 * k + 1) + &al + &be - tm.ldexp(1)) - (&al * &tm).ldexp(1);
                push(k, "e3", (&r[k + 1] + &r[k]) * tm.ldexp(1) - rhs);
            }
        }
        SemiclassicalFamily::OpucBessel => {
            let seq = verblunsky_sequence(t, n)?;
            for (k, v) in dp2_residuals(&seq)?.into_iter().enumerate() {
                rows.push(SystemRow { n: k, equation: "dpII".into(), value: v });
            }
        }
        SemiclassicalFamily::ExpLaguerre { .. } => {
            return Err(OpxError::NoPrediction(family.tag()));
        }
    }
    Ok(SystemResidual { family: family.tag(), t, rows })
}

fn bce_r(n: usize, t: &Mp, big_r: &Mp, a2: &Mp, al: &Mp, be: &Mp) -> Result<Mp> {
    let bits = t.bits();
    if n == 0 {
        return Ok(Mp::zero(bits));
    }
    let nn = Mp::from_i64(n as i64, bits);
    let b = Mp::from_i64(2 * n as i64, bits) + al + be + t * al / big_r;
    let cc = t * (t + big_r) * a2 - &nn * (&nn + be);
    if t.is_zero() {
        return Ok(-(cc / b));
    }
    let a = t / big_r;
    let disc = &b * &b - (&a * &cc).ldexp(2);
    if disc.is_negative() {
        return Err(OpxError::NoPrediction("complex r_n root".into()));
    }
    Ok((disc.sqrt() - b) / a.ldexp(1))
}
