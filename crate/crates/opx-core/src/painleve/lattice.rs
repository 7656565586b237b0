use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::family::{working_bits, SemiclassicalFamily};
use super::opuc::{verblunsky_bits, verblunsky_pair};
use crate::error::{invalid, OpxError, Result};
use crate::mp::Mp;

/// Extra chain sites carried by the integrated route beyond N.
pub const LATTICE_BUFFER: usize = 16;
/// Classical RK4 steps per grid interval.
pub const RK4_SUBSTEPS: usize = 8;
/// Central-difference spacing for the derivative residuals.
pub const FD_STEP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Lattice {
    Toda,
    Langmuir,
    AblowitzLadik,
}

impl Lattice {
    pub fn name(self) -> &'static str {
        match self {
            Lattice::Toda => "toda",
            Lattice::Langmuir => "langmuir",
            Lattice::AblowitzLadik => "ablowitz_ladik",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LatticeEquation {
    /// (a_n²)' = ±a_n²(b_n - b_{n-1}).
    TodaA,
    /// b_n' = ±(a_{n+1}² - a_n²).
    TodaB,
    /// x_n' = x_n(x_{n+1} - x_{n-1}).
    Langmuir,
    /// 2α_n' = (1 - α_n²)(α_{n+1} - α_{n-1}).
    AblowitzLadik,
}

impl LatticeEquation {
    pub fn name(self) -> &'static str {
        match self {
            LatticeEquation::TodaA => "toda_a",
            LatticeEquation::TodaB => "toda_b",
            LatticeEquation::Langmuir => "langmuir",
            LatticeEquation::AblowitzLadik => "ablowitz_ladik",
        }
    }
}

/// Recurrence data of a family at one deformation time.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LatticeState {
    pub t: f64,
    /// a_1²..a_N².
    pub a_sq: Vec<f64>,
    /// b_0..b_{N-1}; zero for symmetric families.
    pub b: Vec<f64>,
    /// α_0..α_{N-1} for the circle family, empty otherwise.
    pub alpha: Vec<f64>,
    pub family: SemiclassicalFamily,
}

impl LatticeState {
    /// The Toda auxiliary C_n(t) = -a_n²(t), n = 1..N.
    pub fn toda_c(&self) -> Vec<f64> {
        self.a_sq.iter().map(|a| -a).collect()
    }

    fn flat(&self) -> Vec<f64> {
        let mut v = self.a_sq.clone();
        v.extend_from_slice(&self.b);
        v.extend_from_slice(&self.alpha);
        v
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LatticeResidual {
    pub t: f64,
    pub n: usize,
    pub equation: LatticeEquation,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LatticeFlow {
    pub lattice: Lattice,
    /// Coefficients from moment solves on the grid.
    pub direct: Vec<LatticeState>,
    /// RK4 integration of the lattice from the t0 data.
    pub integrated: Vec<LatticeState>,
    /// Sup-norm gap between the two routes.
    pub discrepancy: f64,
    /// Central-difference defects of the lattice equations on the direct route.
    pub residuals: Vec<LatticeResidual>,
}

impl LatticeFlow {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.value).fold(0.0, f64::max)
    }
}

/// +1 when the weight carries e^{tx}, -1 for e^{-tx}.
fn toda_sign(family: &SemiclassicalFamily) -> Option<f64> {
    match family {
        SemiclassicalFamily::GenCharlier { .. }
        | SemiclassicalFamily::GenMeixner { .. }
        | SemiclassicalFamily::ExpLaguerre { .. } => Some(1.0),
        SemiclassicalFamily::Bce { .. } => Some(-1.0),
        _ => None,
    }
}

fn check_compatible(family: &SemiclassicalFamily, lattice: Lattice) -> Result<()> {
    let ok = match lattice {
        Lattice::Toda => toda_sign(family).is_some(),
        Lattice::Langmuir => family.is_symmetric(),
        Lattice::AblowitzLadik => family.on_circle(),
    };
    if ok {
        Ok(())
    } else {
        Err(invalid(format!("{} does not evolve by the {} lattice", family.tag(), lattice.name())))
    }
}

/// Multiprecision coefficients with `size` entries each: (a_1²..., b_0..., α_0...).
struct Coeffs {
    a_sq: Vec<Mp>,
    b: Vec<Mp>,
    alpha: Vec<Mp>,
}

fn direct(family: &SemiclassicalFamily, t: &Mp, size: usize, bits: usize) -> Result<Coeffs> {
    if family.on_circle() {
        let (alpha, _) = verblunsky_pair(t, size - 1)?;
        return Ok(Coeffs { a_sq: Vec::new(), b: Vec::new(), alpha });
    }
    let rec = family.recurrence(t, size, bits)?;
    let b = if family.is_symmetric() { Vec::new() } else { rec.b };
    Ok(Coeffs { a_sq: rec.a_sq, b, alpha: Vec::new() })
}

fn state_of(c: &Coeffs, t: f64, n: usize, family: &SemiclassicalFamily) -> LatticeState {
    let take = |v: &[Mp]| v.iter().take(n).map(Mp::to_f64).collect::<Vec<f64>>();
    let b = if family.on_circle() {
        Vec::new()
    } else if family.is_symmetric() {
        vec![0.0; n]
    } else {
        take(&c.b)
    };
    LatticeState { t, a_sq: take(&c.a_sq), b, alpha: take(&c.alpha), family: family.clone() }
}

/// Right-hand side of the truncated chain. Layout: Toda [a_1²..a_{M-1}², b_0..b_{M-1}]
/// with a_M² = 0; Langmuir [x_1..x_M] with x_0 = x_{M+1} = 0; Ablowitz-Ladik
/// [α_0..α_M] with α_{-1} = -1, α_{M+1} = 0.
fn chain_rhs(lattice: Lattice, sign: f64, m: usize, y: &[f64], out: &mut [f64]) {
    match lattice {
        Lattice::Toda => {
            let a = |k: usize| if k == 0 || k >= m { 0.0 } else { y[k - 1] };
            let b = |k: usize| y[m - 1 + k];
            for k in 1..m {
                out[k - 1] = sign * a(k) * (b(k) - b(k - 1));
            }
            for k in 0..m {
                out[m - 1 + k] = sign * (a(k + 1) - a(k));
            }
        }
        Lattice::Langmuir => {
            let x = |k: usize| if k == 0 || k > m { 0.0 } else { y[k - 1] };
            for k in 1..=m {
                out[k - 1] = x(k) * (x(k + 1) - x(k - 1));
            }
        }
        Lattice::AblowitzLadik => {
            let al = |k: isize| {
                if k < 0 {
                    -1.0
                } else if k as usize > m {
                    0.0
                } else {
                    y[k as usize]
                }
            };
            for k in 0..=m {
                let a = y[k];
                out[k] = 0.5 * (1.0 - a * a) * (al(k as isize + 1) - al(k as isize - 1));
            }
        }
    }
}

fn rk4_step(lattice: Lattice, sign: f64, m: usize, y: &mut [f64], dt: f64) {
    let len = y.len();
    let f = |x: &[f64]| {
        let mut out = vec![0.0; len];
        chain_rhs(lattice, sign, m, x, &mut out);
        out
    };
    let shifted = |k: &[f64], frac: f64| y.iter().zip(k).map(|(a, b)| a + frac * dt * b).collect::<Vec<f64>>();
    let k1 = f(y);
    let k2 = f(&shifted(&k1, 0.5));
    let k3 = f(&shifted(&k2, 0.5));
    let k4 = f(&shifted(&k3, 1.0));
    for i in 0..len {
        y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

fn chain_from(c: &Coeffs, lattice: Lattice, m: usize) -> Vec<f64> {
    let f = |v: &[Mp], len: usize| v.iter().take(len).map(Mp::to_f64).collect::<Vec<f64>>();
    match lattice {
        Lattice::Toda => {
            let mut y = f(&c.a_sq, m - 1);
            y.extend(f(&c.b, m));
            y
        }
        Lattice::Langmuir => f(&c.a_sq, m),
        Lattice::AblowitzLadik => f(&c.alpha, m + 1),
    }
}

fn state_from_chain(y: &[f64], lattice: Lattice, m: usize, n: usize, t: f64, family: &SemiclassicalFamily) -> LatticeState {
    let (a_sq, b, alpha) = match lattice {
        Lattice::Toda => (y[..n].to_vec(), y[m - 1..m - 1 + n].to_vec(), Vec::new()),
        Lattice::Langmuir => (y[..n].to_vec(), vec![0.0; n], Vec::new()),
        Lattice::AblowitzLadik => (Vec::new(), Vec::new(), y[..n].to_vec()),
    };
    LatticeState { t, a_sq, b, alpha, family: family.clone() }
}

fn fd_residuals(
    family: &SemiclassicalFamily,
    lattice: Lattice,
    t: &Mp,
    n: usize,
    bits: usize,
    out: &mut Vec<LatticeResidual>,
) -> Result<()> {
    let h = Mp::from_f64(FD_STEP, bits);
    let size = n + 1;
    let c0 = direct(family, t, size, bits)?;
    let cp = direct(family, &(t + &h), size, bits)?;
    let cm = direct(family, &(t - &h), size, bits)?;
    let two_h = h.ldexp(1);
    let d = |p: &Mp, m: &Mp| (p - m) / &two_h;
    let tf = t.to_f64();
    let mut push = |k: usize, equation, v: Mp| out.push(LatticeResidual { t: tf, n: k, equation, value: v.to_f64().abs() });
    let zero = Mp::zero(bits);
    match lattice {
        Lattice::Toda => {
            let s = Mp::from_f64(toda_sign(family).unwrap_or(1.0), bits);
            let a = |k: usize| if k == 0 { zero.clone() } else { c0.a_sq[k - 1].clone() };
            for k in 1..n {
                let lhs = d(&cp.a_sq[k - 1], &cm.a_sq[k - 1]);
                push(k, LatticeEquation::TodaA, lhs - &s * a(k) * (&c0.b[k] - &c0.b[k - 1]));
            }
            for k in 0..n {
                let lhs = d(&cp.b[k], &cm.b[k]);
                push(k, LatticeEquation::TodaB, lhs - &s * (a(k + 1) - a(k)));
            }
        }
        Lattice::Langmuir => {
            let x = |k: usize| if k == 0 { zero.clone() } else { c0.a_sq[k - 1].clone() };
            for k in 1..n {
                let lhs = d(&cp.a_sq[k - 1], &cm.a_sq[k - 1]);
                push(k, LatticeEquation::Langmuir, lhs - x(k) * (x(k + 1) - x(k - 1)));
            }
        }
        Lattice::AblowitzLadik => {
            let al = |k: isize| if k < 0 { -Mp::one(bits) } else { c0.alpha[k as usize].clone() };
            for k in 0..n {
                let lhs = d(&cp.alpha[k], &cm.alpha[k]).ldexp(1);
                let a = al(k as isize);
                let rhs = (Mp::one(bits) - &a * &a) * (al(k as isize + 1) - al(k as isize - 1));
                push(k, LatticeEquation::AblowitzLadik, lhs - rhs);
            }
        }
    }
    Ok(())
}

/// Evolves the recurrence data of `family` from t0 to t1 by two routes on a
/// grid of `steps` intervals: moment solves at every grid time, and RK4
/// integration of the lattice from the t0 data. For the Charlier and Meixner
/// families the time is the logarithm of the scale of c or a.
pub fn lattice_flow(
    family: &SemiclassicalFamily,
    lattice: Lattice,
    t0: f64,
    t1: f64,
    n: usize,
    steps: usize,
) -> Result<LatticeFlow> {
    check_compatible(family, lattice)?;
    if n < 2 || steps == 0 {
        return Err(invalid("lattice flow needs N ≥ 2 and at least one step"));
    }
    if !(t1 > t0) {
        return Err(invalid("lattice flow needs t0 < t1"));
    }
    family.validate_time(t0)?;
    family.validate_time(t1)?;
    let m = n + LATTICE_BUFFER;
    let sign = toda_sign(family).unwrap_or(1.0);
    let bits_n = if family.on_circle() { verblunsky_bits(n + 1) } else { working_bits(n + 1) };
    let bits_m = if family.on_circle() { verblunsky_bits(m + 1) } else { working_bits(m + 1) };

    let chain_size = match lattice {
        Lattice::AblowitzLadik => m + 1,
        _ => m,
    };
    let init = direct(family, &Mp::from_f64(t0, bits_m), chain_size, bits_m)?;
    let mut y = chain_from(&init, lattice, m);

    let dt = (t1 - t0) / steps as f64;
    let mut direct_states = Vec::with_capacity(steps + 1);
    let mut integrated = Vec::with_capacity(steps + 1);
    let mut residuals = Vec::new();
    let mut discrepancy = 0.0f64;
    for step in 0..=steps {
        let t = t0 + dt * step as f64;
        if step > 0 {
            for _ in 0..RK4_SUBSTEPS {
                rk4_step(lattice, sign, m, &mut y, dt / RK4_SUBSTEPS as f64);
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(OpxError::NoConvergence { iterations: step, last_change: f64::NAN });
            }
        }
        let tm = Mp::from_f64(t, bits_n);
        let c = direct(family, &tm, n + 1, bits_n)?;
        let ds = state_of(&c, t, n, family);
        let is = state_from_chain(&y, lattice, m, n, t, family);
        for (u, v) in ds.flat().iter().zip(is.flat()) {
            discrepancy = discrepancy.max((u - v).abs());
        }
        fd_residuals(family, lattice, &tm, n, bits_n, &mut residuals)?;
        direct_states.push(ds);
        integrated.push(is);
    }
    Ok(LatticeFlow { lattice, direct: direct_states, integrated, discrepancy, residuals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn langmuir_for_freud() {
        let f = lattice_flow(&SemiclassicalFamily::Freud, Lattice::Langmuir, 0.0, 0.5, 6, 5).unwrap();
        assert!(f.max_residual() < 1e-6, "{}", f.max_residual());
        assert!(f.discrepancy < 1e-5, "{}", f.discrepancy);
        assert!(f.direct.iter().all(|s| s.b.iter().all(|&b| b == 0.0)));
    }

    #[test]
    fn toda_first_step_for_laguerre() {
        let fam = SemiclassicalFamily::ExpLaguerre { alpha: 0.5 };
        let f = lattice_flow(&fam, Lattice::Toda, 0.0, 0.1, 4, 2).unwrap();
        let b0 = f
            .residuals
            .iter()
            .filter(|r| r.equation == LatticeEquation::TodaB && r.n == 0)
            .map(|r| r.value)
            .fold(0.0, f64::max);
        assert!(b0 < 1e-7, "{b0}");
    }

    #[test]
    fn ablowitz_ladik_for_bessel() {
        let f = lattice_flow(&SemiclassicalFamily::OpucBessel, Lattice::AblowitzLadik, 0.5, 1.0, 8, 5).unwrap();
        assert!(f.max_residual() < 1e-6, "{}", f.max_residual());
        assert!(f.discrepancy < 1e-5, "{}", f.discrepancy);
    }

    #[test]
    fn incompatible_pair_rejected() {
        assert!(lattice_flow(&SemiclassicalFamily::Freud, Lattice::Toda, 0.0, 0.5, 4, 2).is_err());
        assert!(lattice_flow(&SemiclassicalFamily::ChenIts { alpha: 0.0 }, Lattice::Toda, 0.5, 1.0, 4, 2).is_err());
    }

    #[test]
    fn toda_c_is_negated() {
        let s = LatticeState { t: 0.0, a_sq: vec![1.0, 2.0], b: vec![0.0, 0.0], alpha: vec![], family: SemiclassicalFamily::Freud };
        assert_eq!(s.toda_c(), vec![-1.0, -2.0]);
    }
}
