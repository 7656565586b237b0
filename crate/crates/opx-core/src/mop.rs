//! Multiple orthogonal polynomials: type I and II solves from joint
//! moments, nearest-neighbor recurrence coefficients and their
//! compatibility relations, the mixed Christoffel–Darboux kernel,
//! Hermite–Padé errors and the classical closed-form families.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{invalid, OpxError, Result};
use crate::linalg;
use crate::mp::Mp;
use crate::quad;
use crate::special::gamma_mp;

/// Multi-index (n_1, ..., n_r).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn new(n: Vec<usize>) -> Result<Self> {
        if n.is_empty() {
            return Err(invalid("a multi-index needs at least one component"));
        }
        Ok(MultiIndex(n))
    }

    pub fn zero(r: usize) -> Self {
        MultiIndex(vec![0; r])
    }

    pub fn r(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn get(&self, j: usize) -> usize {
        self.0[j]
    }

    pub fn plus(&self, k: usize) -> Self {
        let mut v = self.0.clone();
        v[k] += 1;
        MultiIndex(v)
    }

    pub fn minus(&self, k: usize) -> Result<Self> {
        if self.0[k] == 0 {
            return Err(invalid(format!("cannot decrement component {} of {self}", k + 1)));
        }
        let mut v = self.0.clone();
        v[k] -= 1;
        Ok(MultiIndex(v))
    }

    /// Componentwise n ≤ m.
    pub fn le(&self, m: &MultiIndex) -> bool {
        self.0.iter().zip(&m.0).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// One weight of a multiple orthogonality system.
#[derive(Clone, Debug, PartialEq)]
pub enum MopWeight {
    /// e^{-x² + c x} on ℝ.
    GaussShift { c: f64 },
    /// x^α e^{-c x} on [0, ∞).
    LaguerreRate { alpha: f64, c: f64 },
    /// x^α (1-x)^β on [0, 1].
    JacobiUnit { alpha: f64, beta: f64 },
    /// Unit weight on [a, b].
    Interval { a: f64, b: f64 },
}

impl MopWeight {
    pub fn domain(&self) -> (f64, f64) {
        match self {
            MopWeight::GaussShift { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            MopWeight::LaguerreRate { .. } => (0.0, f64::INFINITY),
            MopWeight::JacobiUnit { .. } => (0.0, 1.0),
            MopWeight::Interval { a, b } => (*a, *b),
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        if x < lo || x > hi {
            return 0.0;
        }
        match self {
            MopWeight::GaussShift { c } => libm::exp(-x * x + c * x),
            MopWeight::LaguerreRate { alpha, c } => libm::pow(x, *alpha) * libm::exp(-c * x),
            MopWeight::JacobiUnit { alpha, beta } => libm::pow(x, *alpha) * libm::pow(1.0 - x, *beta),
            MopWeight::Interval { .. } => 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            MopWeight::GaussShift { c } => c.is_finite(),
            MopWeight::LaguerreRate { alpha, c } => *alpha > -1.0 && *c > 0.0,
            MopWeight::JacobiUnit { alpha, beta } => *alpha > -1.0 && *beta > -1.0,
            MopWeight::Interval { a, b } => a.is_finite() && b.is_finite() && a < b,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid weight parameters {self:?}")))
        }
    }

    /// Closed-form moments m_0..m_{count-1}.
    pub fn moments(&self, count: usize, bits: usize) -> Result<Vec<Mp>> {
        self.validate()?;
        let wp = bits + 2 * count + 32;
        let one = Mp::one(wp);
        let out: Vec<Mp> = match self {
            MopWeight::GaussShift { c } => {
                // ∫ x^k e^{-x²+cx} = √π e^{c²/4} Σ_i C(k,i) (c/2)^{k-i} E[Z^i], Z ~ N(0, 1/2).
                let cm = Mp::from_f64(*c, wp);
                let half_c = cm.ldexp(-1);
                let pref = Mp::pi(wp).sqrt() * (&half_c * &half_c).exp();
                let mut ez = Vec::with_capacity(count);
                let mut e = one.clone();
                for i in 0..count {
                    if i % 2 == 1 {
                        ez.push(Mp::zero(wp));
                    } else {
                        ez.push(e.clone());
                        e = e * Mp::ratio((i + 1) as i64, 2, wp);
                    }
                }
                (0..count)
                    .map(|k| {
                        let mut s = Mp::zero(wp);
                        let mut binom = one.clone();
                        for i in 0..=k {
                            if i > 0 {
                                binom = binom * Mp::from_i64((k + 1 - i) as i64, wp) / Mp::from_i64(i as i64, wp);
                            }
                            if i % 2 == 0 {
                                s += &binom * half_c.powi((k - i) as i64) * &ez[i];
                            }
                        }
                        s * &pref
                    })
                    .collect()
            }
            MopWeight::LaguerreRate { alpha, c } => {
                let a = Mp::from_f64(*alpha, wp);
                let cm = Mp::from_f64(*c, wp);
                let mut m = gamma_mp(&(&a + &one))? / cm.powf(&(&a + &one));
                let mut out = Vec::with_capacity(count);
                for k in 0..count {
                    if k > 0 {
                        m = m * (&a + Mp::from_i64(k as i64, wp)) / &cm;
                    }
                    out.push(m.clone());
                }
                out
            }
            MopWeight::JacobiUnit { alpha, beta } => {
                let a = Mp::from_f64(*alpha, wp);
                let b = Mp::from_f64(*beta, wp);
                let mut m = gamma_mp(&(&a + &one))? * gamma_mp(&(&b + &one))? / gamma_mp(&(&a + &b + Mp::from_i64(2, wp)))?;
                let mut out = Vec::with_capacity(count);
                for k in 0..count {
                    if k > 0 {
                        let kk = Mp::from_i64(k as i64, wp);
                        m = m * (&a + &kk) / (&a + &b + &kk + &one);
                    }
                    out.push(m.clone());
                }
                out
            }
            MopWeight::Interval { a, b } => {
                let am = Mp::from_f64(*a, wp);
                let bm = Mp::from_f64(*b, wp);
                (0..count)
                    .map(|k| (bm.powi(k as i64 + 1) - am.powi(k as i64 + 1)) / Mp::from_i64(k as i64 + 1, wp))
                    .collect()
            }
        };
        Ok(out.into_iter().map(|v| v.with_bits(bits)).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemClass {
    Angelesco,
    AtSystem,
    Nikishin,
    Generic,
}

/// r weights with their joint moment table.
#[derive(Clone, Debug, PartialEq)]
pub struct MOPSystem {
    pub weights: Vec<MopWeight>,
    /// moments[j][k] = ∫ x^k w_j(x) dx.
    pub moments: Vec<Vec<Mp>>,
    pub class: SystemClass,
    pub bits: usize,
}

/// Normality threshold on |det| relative to the product of row norms.
pub const NORMALITY_TOL: f64 = 1e-30;

impl MOPSystem {
    /// Builds the system with moments of orders below `moment_count`.
    pub fn new(weights: Vec<MopWeight>, class: SystemClass, moment_count: usize, bits: usize) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("at least one weight is required"));
        }
        if class == SystemClass::Angelesco {
            for i in 0..weights.len() {
                for j in i + 1..weights.len() {
                    let (a0, a1) = weights[i].domain();
                    let (b0, b1) = weights[j].domain();
                    if a1 > b0 && b1 > a0 {
                        return Err(invalid("Angelesco weights need pairwise disjoint supports"));
                    }
                }
            }
        }
        let moments = weights.iter().map(|w| w.moments(moment_count, bits)).collect::<Result<Vec<_>>>()?;
        Ok(MOPSystem { weights, moments, class, bits })
    }

    pub fn r(&self) -> usize {
        self.weights.len()
    }

    fn check(&self, n: &MultiIndex, extra: usize) -> Result<()> {
        if n.r() != self.r() {
            return Err(invalid(format!("multi-index {n} does not match r = {}", self.r())));
        }
        let need = (0..self.r()).filter(|&j| n.get(j) > 0).map(|j| n.get(j) + n.total() + extra).max().unwrap_or(0);
        let have = self.moments[0].len();
        if need > have {
            return Err(OpxError::Insufficient { needed: need, available: have });
        }
        Ok(())
    }

    /// Rows x^i against w_j for i < n_j, columns x^k for k < |n|.
    fn block_matrix(&self, n: &MultiIndex) -> Vec<Vec<Mp>> {
        let size = n.total();
        let mut rows = Vec::with_capacity(size);
        for j in 0..self.r() {
            for i in 0..n.get(j) {
                rows.push((0..size).map(|k| self.moments[j][i + k].clone()).collect());
            }
        }
        rows
    }

    fn normal_matrix(&self, n: &MultiIndex) -> Result<Vec<Vec<Mp>>> {
        let m = self.block_matrix(n);
        let d = linalg::det(m.clone());
        let mut norms = Mp::one(self.bits);
        for row in &m {
            let s = row.iter().fold(Mp::zero(self.bits), |acc, v| acc + v * v);
            norms = norms * s.sqrt();
        }
        if !((d.abs() / norms).to_f64() > NORMALITY_TOL) {
            return Err(OpxError::Singular(format!("{n}")));
        }
        Ok(m)
    }
}

/// Determinant of the stacked moment matrix; nonzero exactly for normal indices.
pub fn normality_det(system: &MOPSystem, n: &MultiIndex) -> Result<Mp> {
    system.check(n, 0)?;
    if n.total() == 0 {
        return Ok(Mp::one(system.bits));
    }
    Ok(linalg::det(system.block_matrix(n)))
}

/// Monic type II polynomial, ascending coefficients.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TypeIIPoly {
    pub index: MultiIndex,
    pub coeffs: Vec<Mp>,
}

impl TypeIIPoly {
    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(Mp::to_f64).collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        crate::poly::eval_f64(&self.coeffs_f64(), x)
    }
}

/// Type I vector (A_1, ..., A_r), deg A_j < n_j.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TypeIVector {
    pub index: MultiIndex,
    pub a: Vec<Vec<Mp>>,
}

impl TypeIVector {
    /// Q_n(x) = Σ A_j(x) w_j(x).
    pub fn eval(&self, system: &MOPSystem, x: f64) -> f64 {
        self.a
            .iter()
            .zip(&system.weights)
            .map(|(c, w)| {
                let cf: Vec<f64> = c.iter().map(Mp::to_f64).collect();
                crate::poly::eval_f64(&cf, x) * w.density(x)
            })
            .sum()
    }
}

pub fn solve_type_ii(system: &MOPSystem, n: &MultiIndex) -> Result<TypeIIPoly> {
    system.check(n, 1)?;
    let size = n.total();
    let bits = system.bits;
    if size == 0 {
        return Ok(TypeIIPoly { index: n.clone(), coeffs: vec![Mp::one(bits)] });
    }
    let m = system.normal_matrix(n)?;
    let mut rhs = Vec::with_capacity(size);
    for j in 0..system.r() {
        for i in 0..n.get(j) {
            rhs.push(-system.moments[j][i + size].clone());
        }
    }
    let mut c = linalg::solve(m, &rhs, 0.0)?;
    c.push(Mp::one(bits));
    Ok(TypeIIPoly { index: n.clone(), coeffs: c })
}

pub fn solve_type_i(system: &MOPSystem, n: &MultiIndex) -> Result<TypeIVector> {
    system.check(n, 0)?;
    let size = n.total();
    if size == 0 {
        return Err(invalid("type I functions need |n| ≥ 1"));
    }
    let m = system.normal_matrix(n)?;
    // The conditions ∫ x^k Q dμ = δ_{k,|n|-1} use the transpose.
    let mt: Vec<Vec<Mp>> = (0..size).map(|k| (0..size).map(|i| m[i][k].clone()).collect()).collect();
    let mut rhs = vec![Mp::zero(system.bits); size];
    rhs[size - 1] = Mp::one(system.bits);
    let sol = linalg::solve(mt, &rhs, 0.0)?;
    let mut a = Vec::with_capacity(system.r());
    let mut pos = 0;
    for j in 0..system.r() {
        a.push(sol[pos..pos + n.get(j)].to_vec());
        pos += n.get(j);
    }
    Ok(TypeIVector { index: n.clone(), a })
}

/// ∫ P_n Q_m dμ from the moment table.
pub fn biorthogonality(system: &MOPSystem, n: &MultiIndex, m: &MultiIndex) -> Result<Mp> {
    let p = solve_type_ii(system, n)?;
    let q = solve_type_i(system, m)?;
    let mut s = Mp::zero(system.bits);
    for (j, aj) in q.a.iter().enumerate() {
        for (i, ai) in aj.iter().enumerate() {
            for (k, pk) in p.coeffs.iter().enumerate() {
                let mom = system.moments[j].get(i + k).ok_or(OpxError::Insufficient { needed: i + k + 1, available: system.moments[j].len() })?;
                s += ai * pk * mom;
            }
        }
    }
    Ok(s)
}

/// The value ∫ P_n Q_m dμ must take, where it is determined.
pub fn biorthogonality_expected(n: &MultiIndex, m: &MultiIndex) -> Option<f64> {
    if m.total() == 0 {
        return None;
    }
    if m.le(n) || n.total() + 2 <= m.total() {
        Some(0.0)
    } else if n.total() + 1 == m.total() {
        Some(1.0)
    } else {
        None
    }
}

/// Nearest-neighbor recurrence data at one multi-index:
/// x P_n = P_{n+e_k} + b_{n,k} P_n + Σ_j a_{n,j} P_{n-e_j}.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NNRRCoefficients {
    pub index: MultiIndex,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Anything that yields recurrence coefficients at a multi-index.
pub trait NnrrField {
    fn r(&self) -> usize;
    fn at(&self, n: &MultiIndex) -> Result<NNRRCoefficients>;
}

/// Exact-arithmetic variant used internally.
struct NnrrMp {
    a: Vec<Mp>,
    b: Vec<Mp>,
}

fn functional(system: &MOPSystem, j: usize, power: usize, p: &TypeIIPoly) -> Mp {
    p.coeffs.iter().enumerate().fold(Mp::zero(system.bits), |acc, (k, c)| acc + c * &system.moments[j][power + k])
}

fn nnrr_mp(system: &MOPSystem, n: &MultiIndex) -> Result<NnrrMp> {
    system.check(n, 2)?;
    let p = solve_type_ii(system, n)?;
    let top = n.total();
    let sub = if top == 0 { Mp::zero(system.bits) } else { p.coeffs[top - 1].clone() };
    let mut b = Vec::with_capacity(system.r());
    for k in 0..system.r() {
        let q = solve_type_ii(system, &n.plus(k))?;
        b.push(&sub - &q.coeffs[top]);
    }
    let mut a = Vec::with_capacity(system.r());
    for j in 0..system.r() {
        if n.get(j) == 0 {
            a.push(Mp::zero(system.bits));
            continue;
        }
        let lower = solve_type_ii(system, &n.minus(j)?)?;
        let num = functional(system, j, n.get(j), &p);
        let den = functional(system, j, n.get(j) - 1, &lower);
        a.push(num / den);
    }
    Ok(NnrrMp { a, b })
}

/// Coefficients by applying the functionals ∫ x^k dμ_j to both sides of the
/// recurrence.
pub fn nnrr_coefficients(system: &MOPSystem, n: &MultiIndex) -> Result<NNRRCoefficients> {
    let c = nnrr_mp(system, n)?;
    Ok(NNRRCoefficients {
        index: n.clone(),
        a: c.a.iter().map(Mp::to_f64).collect(),
        b: c.b.iter().map(Mp::to_f64).collect(),
    })
}

/// Largest coefficient of x P_n - P_{n+e_k} - b_{n,k} P_n - Σ a_{n,j} P_{n-e_j}
/// over all k, relative to the largest coefficient of x P_n.
pub fn nnrr_residual(system: &MOPSystem, n: &MultiIndex) -> Result<f64> {
    let c = nnrr_mp(system, n)?;
    let p = solve_type_ii(system, n)?;
    let mut xp = vec![Mp::zero(system.bits)];
    xp.extend(p.coeffs.iter().cloned());
    let scale = crate::poly::max_abs(&xp).max(1.0);
    let mut worst = 0.0f64;
    for k in 0..system.r() {
        let up = solve_type_ii(system, &n.plus(k))?;
        let mut r = crate::poly::add(&xp, &crate::poly::scale(&up.coeffs, &Mp::from_i64(-1, system.bits)));
        r = crate::poly::add(&r, &crate::poly::scale(&p.coeffs, &-c.b[k].clone()));
        for j in 0..system.r() {
            if n.get(j) > 0 {
                let low = solve_type_ii(system, &n.minus(j)?)?;
                r = crate::poly::add(&r, &crate::poly::scale(&low.coeffs, &-c.a[j].clone()));
            }
        }
        worst = worst.max(crate::poly::max_abs(&r) / scale);
    }
    Ok(worst)
}

impl NnrrField for MOPSystem {
    fn r(&self) -> usize {
        self.weights.len()
    }
    fn at(&self, n: &MultiIndex) -> Result<NNRRCoefficients> {
        nnrr_coefficients(self, n)
    }
}

fn box_indices(dims: &[usize]) -> Vec<MultiIndex> {
    let mut out = vec![MultiIndex(Vec::new())];
    for &d in dims {
        let mut next = Vec::with_capacity(out.len() * d);
        for n in &out {
            for v in 0..d {
                let mut m = n.0.clone();
                m.push(v);
                next.push(MultiIndex(m));
            }
        }
        out = next;
    }
    out
}

/// Residuals of the three compatibility relations, for i ≠ j:
/// b_{n+e_i,j} - b_{n,j} = b_{n+e_j,i} - b_{n,i};
/// Σ_k a_{n+e_j,k} - Σ_k a_{n+e_i,k} = b_{n+e_j,i} b_{n,j} - b_{n+e_i,j} b_{n,i};
/// a_{n,i} (b_{n,j} - b_{n,i}) = a_{n+e_j,i} (b_{n-e_i,j} - b_{n-e_i,i}) when n_i ≥ 1.
/// The box holds all n with 0 ≤ n_j < dims[j].
pub fn compatibility_residual<F: NnrrField + ?Sized>(field: &F, dims: &[usize]) -> Result<f64> {
    let r = field.r();
    if dims.len() != r {
        return Err(invalid("box dimension does not match r"));
    }
    let mut cache: alloc::collections::BTreeMap<MultiIndex, NNRRCoefficients> = alloc::collections::BTreeMap::new();
    let mut get = |n: &MultiIndex| -> Result<NNRRCoefficients> {
        if let Some(c) = cache.get(n) {
            return Ok(c.clone());
        }
        let c = field.at(n)?;
        cache.insert(n.clone(), c.clone());
        Ok(c)
    };
    let mut worst = 0.0f64;
    for n in box_indices(dims) {
        let c = get(&n)?;
        for i in 0..r {
            for j in 0..r {
                if i == j {
                    continue;
                }
                let ci = get(&n.plus(i))?;
                let cj = get(&n.plus(j))?;
                let r1 = (ci.b[j] - c.b[j]) - (cj.b[i] - c.b[i]);
                let sa_j: f64 = cj.a.iter().sum();
                let sa_i: f64 = ci.a.iter().sum();
                let r2 = (sa_j - sa_i) - (cj.b[i] * c.b[j] - ci.b[j] * c.b[i]);
                worst = worst.max(r1.abs()).max(r2.abs());
                if n.get(i) >= 1 {
                    let cm = get(&n.minus(i)?)?;
                    let r3 = c.a[i] * (c.b[j] - c.b[i]) - cj.a[i] * (cm.b[j] - cm.b[i]);
                    worst = worst.max(r3.abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Multi-indices visited by a path of unit steps from the origin.
pub fn path_indices(r: usize, path: &[usize]) -> Result<Vec<MultiIndex>> {
    let mut cur = MultiIndex::zero(r);
    let mut out = vec![cur.clone()];
    for &k in path {
        if k >= r {
            return Err(invalid(format!("path step {k} exceeds r = {r}")));
        }
        cur = cur.plus(k);
        out.push(cur.clone());
    }
    Ok(out)
}

/// Σ_{k<N} P_{n_k}(x) Q_{n_{k+1}}(y) along the path ending at n.
pub fn mop_cd_kernel(system: &MOPSystem, n: &MultiIndex, path: &[usize], x: f64, y: f64) -> Result<f64> {
    let idx = path_indices(system.r(), path)?;
    if idx.last() != Some(n) {
        return Err(invalid(format!("path does not end at {n}")));
    }
    let mut s = 0.0;
    for w in idx.windows(2) {
        let p = solve_type_ii(system, &w[0])?;
        let q = solve_type_i(system, &w[1])?;
        s += p.eval(x) * q.eval(system, y);
    }
    Ok(s)
}

/// (P_n(x) Q_n(y) - Σ_j a_{n,j} P_{n-e_j}(x) Q_{n+e_j}(y)) / (x - y).
pub fn mop_cd_closed_form(system: &MOPSystem, n: &MultiIndex, x: f64, y: f64) -> Result<f64> {
    if n.total() == 0 {
        return Ok(0.0);
    }
    let c = nnrr_coefficients(system, n)?;
    let mut v = solve_type_ii(system, n)?.eval(x) * solve_type_i(system, n)?.eval(system, y);
    for j in 0..system.r() {
        if n.get(j) == 0 {
            continue;
        }
        let p = solve_type_ii(system, &n.minus(j)?)?;
        let q = solve_type_i(system, &n.plus(j))?;
        v -= c.a[j] * p.eval(x) * q.eval(system, y);
    }
    Ok(v / (x - y))
}

/// Classical families with explicit formulas.
#[derive(Clone, Debug, PartialEq)]
pub enum MopFamily {
    /// Weights e^{-x² + c_j x}.
    MultipleHermite { c: Vec<f64> },
    /// Weights x^{α_j} e^{-x}.
    MultipleLaguerre1 { alpha: Vec<f64> },
    /// Weights x^α e^{-c_j x}.
    MultipleLaguerre2 { alpha: f64, c: Vec<f64> },
    /// Weights x^{α_j} (1-x)^β on [0, 1].
    JacobiPineiro { alpha: Vec<f64>, beta: f64 },
}

fn distinct(v: &[f64]) -> bool {
    (0..v.len()).all(|i| (i + 1..v.len()).all(|j| v[i] != v[j]))
}

fn non_integer_gaps(v: &[f64]) -> bool {
    (0..v.len()).all(|i| (i + 1..v.len()).all(|j| {
        let d = v[i] - v[j];
        (d - libm::round(d)).abs() > 1e-12
    }))
}

impl MopFamily {
    pub fn r(&self) -> usize {
        match self {
            MopFamily::MultipleHermite { c } | MopFamily::MultipleLaguerre2 { c, .. } => c.len(),
            MopFamily::MultipleLaguerre1 { alpha } | MopFamily::JacobiPineiro { alpha, .. } => alpha.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            MopFamily::MultipleHermite { c } => !c.is_empty() && distinct(c),
            MopFamily::MultipleLaguerre1 { alpha } => {
                !alpha.is_empty() && alpha.iter().all(|a| *a > -1.0) && non_integer_gaps(alpha)
            }
            MopFamily::MultipleLaguerre2 { alpha, c } => {
                !c.is_empty() && *alpha > -1.0 && c.iter().all(|v| *v > 0.0) && distinct(c)
            }
            MopFamily::JacobiPineiro { alpha, beta } => {
                !alpha.is_empty() && *beta > -1.0 && alpha.iter().all(|a| *a > -1.0) && non_integer_gaps(alpha)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("degenerate family parameters {self:?}")))
        }
    }

    pub fn weights(&self) -> Vec<MopWeight> {
        match self {
            MopFamily::MultipleHermite { c } => c.iter().map(|&c| MopWeight::GaussShift { c }).collect(),
            MopFamily::MultipleLaguerre1 { alpha } => {
                alpha.iter().map(|&a| MopWeight::LaguerreRate { alpha: a, c: 1.0 }).collect()
            }
            MopFamily::MultipleLaguerre2 { alpha, c } => {
                c.iter().map(|&c| MopWeight::LaguerreRate { alpha: *alpha, c }).collect()
            }
            MopFamily::JacobiPineiro { alpha, beta } => {
                alpha.iter().map(|&a| MopWeight::JacobiUnit { alpha: a, beta: *beta }).collect()
            }
        }
    }

    /// The moment system of the family (an AT system in every case here).
    pub fn system(&self, moment_count: usize, bits: usize) -> Result<MOPSystem> {
        self.validate()?;
        MOPSystem::new(self.weights(), SystemClass::AtSystem, moment_count, bits)
    }

    /// Explicit recurrence coefficients, where the family has them.
    pub fn nnrr_closed(&self, n: &MultiIndex) -> Result<NNRRCoefficients> {
        self.validate()?;
        if n.r() != self.r() {
            return Err(invalid("multi-index does not match the family"));
        }
        let r = self.r();
        let nt = n.total() as f64;
        let nj = |j: usize| n.get(j) as f64;
        let (a, b): (Vec<f64>, Vec<f64>) = match self {
            MopFamily::MultipleHermite { c } => ((0..r).map(|j| nj(j) / 2.0).collect(), c.iter().map(|v| v / 2.0).collect()),
            MopFamily::MultipleLaguerre1 { alpha } => {
                let a = (0..r)
                    .map(|j| {
                        if n.get(j) == 0 {
                            return 0.0;
                        }
                        let mut v = nj(j) * (nj(j) + alpha[j]);
                        for i in 0..r {
                            if i != j {
                                v *= (nj(j) + alpha[j] - alpha[i]) / (nj(j) - nj(i) + alpha[j] - alpha[i]);
                            }
                        }
                        v
                    })
                    .collect();
                (a, (0..r).map(|k| nt + nj(k) + alpha[k] + 1.0).collect())
            }
            MopFamily::MultipleLaguerre2 { alpha, c } => {
                let s: f64 = (0..r).map(|j| nj(j) / c[j]).sum();
                (
                    (0..r).map(|j| nj(j) * (nt + alpha) / (c[j] * c[j])).collect(),
                    (0..r).map(|k| (nt + alpha + 1.0) / c[k] + s).collect(),
                )
            }
            MopFamily::JacobiPineiro { .. } => {
                return Err(OpxError::NoPrediction(String::from("Jacobi–Piñeiro recurrence coefficients")))
            }
        };
        Ok(NNRRCoefficients { index: n.clone(), a, b })
    }
}

impl NnrrField for MopFamily {
    fn r(&self) -> usize {
        MopFamily::r(self)
    }
    fn at(&self, n: &MultiIndex) -> Result<NNRRCoefficients> {
        self.nnrr_closed(n)
    }
}

/// All k with 0 ≤ k_j ≤ n_j.
fn sub_indices(n: &MultiIndex) -> Vec<Vec<usize>> {
    box_indices(&n.0.iter().map(|v| v + 1).collect::<Vec<_>>()).into_iter().map(|m| m.0).collect()
}

fn binom_mp(a: &Mp, k: usize) -> Mp {
    let mut acc = Mp::one(a.bits());
    for i in 0..k {
        acc = acc * (a - Mp::from_i64(i as i64, a.bits())) / Mp::from_i64(i as i64 + 1, a.bits());
    }
    acc
}

fn factorial(k: usize, bits: usize) -> Mp {
    crate::special::factorial_mp(k, bits)
}

/// Physicists' Hermite polynomials H_0..H_m, ascending coefficients.
fn hermite_h(m: usize, bits: usize) -> Vec<Vec<Mp>> {
    let mut out: Vec<Vec<Mp>> = vec![vec![Mp::one(bits)]];
    if m >= 1 {
        out.push(vec![Mp::zero(bits), Mp::from_i64(2, bits)]);
    }
    for k in 1..m {
        let mut next = vec![Mp::zero(bits); k + 2];
        for (i, c) in out[k].iter().enumerate() {
            next[i + 1] += c.ldexp(1);
        }
        for (i, c) in out[k - 1].iter().enumerate() {
            next[i] -= c * Mp::from_i64(2 * k as i64, bits);
        }
        out.push(next);
    }
    out
}

/// Type II polynomial from the family's explicit finite sum.
pub fn family_closed_form(family: &MopFamily, n: &MultiIndex, bits: usize) -> Result<TypeIIPoly> {
    family.validate()?;
    if n.r() != family.r() {
        return Err(invalid("multi-index does not match the family"));
    }
    let wp = bits + 64;
    let big_n = n.total();
    let mut c = vec![Mp::zero(wp); big_n + 1];
    match family {
        MopFamily::MultipleHermite { c: cs } => {
            let h = hermite_h(big_n, wp);
            for k in sub_indices(n) {
                let kt: usize = k.iter().sum();
                let mut f = Mp::one(wp);
                for j in 0..n.r() {
                    f = f * binom_mp(&Mp::from_i64(n.get(j) as i64, wp), k[j]) * Mp::from_f64(cs[j], wp).powi((n.get(j) - k[j]) as i64);
                }
                if (kt + big_n) % 2 == 1 {
                    f = -f;
                }
                for (i, hc) in h[kt].iter().enumerate() {
                    c[i] += &f * hc;
                }
            }
            for v in c.iter_mut() {
                *v = v.ldexp(-(big_n as i32));
            }
        }
        MopFamily::MultipleLaguerre1 { alpha } => {
            let r = n.r();
            for k in sub_indices(n) {
                let kt: usize = k.iter().sum();
                let mut f = Mp::one(wp);
                for j in 0..r {
                    let upper: usize = (j..r).map(|i| n.get(i)).sum::<usize>() - (j + 1..r).map(|i| k[i]).sum::<usize>();
                    let top = Mp::from_i64(upper as i64, wp) + Mp::from_f64(alpha[j], wp);
                    f = f * binom_mp(&top, k[j]) * factorial(n.get(j), wp) / factorial(n.get(j) - k[j], wp);
                }
                if kt % 2 == 1 {
                    f = -f;
                }
                c[big_n - kt] += f;
            }
        }
        MopFamily::MultipleLaguerre2 { alpha, c: cs } => {
            let na = Mp::from_i64(big_n as i64, wp) + Mp::from_f64(*alpha, wp);
            for k in sub_indices(n) {
                let kt: usize = k.iter().sum();
                let mut f = binom_mp(&na, kt) * factorial(kt, wp);
                for j in 0..n.r() {
                    f = f * binom_mp(&Mp::from_i64(n.get(j) as i64, wp), k[j]) / Mp::from_f64(cs[j], wp).powi(k[j] as i64);
                }
                if kt % 2 == 1 {
                    f = -f;
                }
                c[big_n - kt] += f;
            }
        }
        MopFamily::JacobiPineiro { alpha, beta } => {
            let nb = Mp::from_i64(big_n as i64, wp) + Mp::from_f64(*beta, wp);
            for k in sub_indices(n) {
                let kt: usize = k.iter().sum();
                let mut f = binom_mp(&nb, kt) * factorial(kt, wp);
                let mut before = 0usize;
                for j in 0..n.r() {
                    let top = Mp::from_i64((n.get(j) + before) as i64, wp) + Mp::from_f64(alpha[j], wp);
                    f = f * binom_mp(&top, n.get(j) - k[j]) / factorial(k[j], wp);
                    before += k[j];
                }
                if kt % 2 == 1 {
                    f = -f;
                }
                // x^K (1-x)^{N-K}
                let rest = big_n - kt;
                let mut bin = Mp::one(wp);
                for i in 0..=rest {
                    if i > 0 {
                        bin = bin * Mp::from_i64((rest + 1 - i) as i64, wp) / Mp::from_i64(i as i64, wp);
                    }
                    let term = &f * &bin;
                    if i % 2 == 1 {
                        c[kt + i] -= term;
                    } else {
                        c[kt + i] += term;
                    }
                }
            }
            let lead = c[big_n].clone();
            if lead.is_zero() {
                return Err(OpxError::Singular(format!("{n}")));
            }
            for v in c.iter_mut() {
                *v = &*v / &lead;
            }
        }
    }
    Ok(TypeIIPoly { index: n.clone(), coeffs: c.into_iter().map(|v| v.with_bits(bits)).collect() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PadeType {
    I,
    II,
}

/// Markov function f_j(z) = ∫ w_j(x) / (z - x) dx by quadrature.
fn markov(w: &MopWeight, z: Complex64) -> Result<Complex64> {
    let (lo, hi) = w.domain();
    let re = quad::integrate(|x| w.density(x) * (z.re - x) / ((z.re - x) * (z.re - x) + z.im * z.im), lo, hi, 1e-15)?;
    let im = quad::integrate(|x| -w.density(x) * z.im / ((z.re - x) * (z.re - x) + z.im * z.im), lo, hi, 1e-15)?;
    Ok(Complex64::new(re, im))
}

fn eval_c(c: &[f64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, v| acc * z + v)
}

/// ∫ (A(z) - A(x)) / (z - x) w_j(x) dx from the moments.
fn divided_difference(system: &MOPSystem, j: usize, coeffs: &[f64], z: Complex64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for (k, ck) in coeffs.iter().enumerate() {
        let mut zi = Complex64::new(1.0, 0.0);
        for i in 0..k {
            s += ck * zi * system.moments[j][k - 1 - i].to_f64();
            zi *= z;
        }
    }
    s
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Fitted decay exponents of the Hermite–Padé errors at the points z.
///
/// Type II returns one slope per weight for P_n f_j - Q_{n,j}; type I returns
/// a single slope for Σ A_j f_j - B.
pub fn hermite_pade_residual(system: &MOPSystem, n: &MultiIndex, kind: PadeType, z_list: &[Complex64]) -> Result<Vec<f64>> {
    if z_list.len() < 2 {
        return Err(OpxError::Insufficient { needed: 2, available: z_list.len() });
    }
    match kind {
        PadeType::II => {
            let p = solve_type_ii(system, n)?.coeffs_f64();
            (0..system.r())
                .map(|j| {
                    let mut pts = Vec::with_capacity(z_list.len());
                    for &z in z_list {
                        let err = eval_c(&p, z) * markov(&system.weights[j], z)? - divided_difference(system, j, &p, z);
                        pts.push((libm::log(z.norm()), libm::log(err.norm())));
                    }
                    Ok(slope(&pts))
                })
                .collect()
        }
        PadeType::I => {
            let q = solve_type_i(system, n)?;
            let mut pts = Vec::with_capacity(z_list.len());
            for &z in z_list {
                let mut err = Complex64::new(0.0, 0.0);
                for (j, aj) in q.a.iter().enumerate() {
                    let af: Vec<f64> = aj.iter().map(Mp::to_f64).collect();
                    err += eval_c(&af, z) * markov(&system.weights[j], z)? - divided_difference(system, j, &af, z);
                }
                pts.push((libm::log(z.norm()), libm::log(err.norm())));
            }
            Ok(vec![slope(&pts)])
        }
    }
}
