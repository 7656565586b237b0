//! Random-matrix ensembles and Monte Carlo estimates of their average
//! characteristic polynomials.
//!
//! The external-source ensemble has density ∝ exp(-Tr(M² - AM)). Completing
//! the square gives Tr(M² - AM) = Tr((M - A/2)²) - Tr(A²)/4, so M = A/2 + G
//! with G distributed as exp(-Tr G²): diagonal entries N(0, 1/2), real and
//! imaginary parts of off-diagonal entries N(0, 1/4). No rejection step is
//! needed.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, OpxError, Result};
use crate::linalg;
use crate::mc;
use crate::mop::{family_closed_form, MopFamily, MultiIndex};
use crate::opcore::{KernelMode, KernelOperator, RecurrenceCoefficients, Weight};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EnsembleSpec {
    /// Density ∝ exp(-n Tr M²).
    Gue { n: usize },
    /// Hermitian with independent entries of variance σ² per real component.
    Wigner { n: usize, sigma: f64 },
    /// M M* with M an n×m matrix of entries X + iY, X, Y standard normal.
    Wishart { n: usize, m: usize },
    /// V*V with V the m×n upper-left corner of a Haar unitary of order m+k.
    TruncatedUnitary { m: usize, n: usize, k: usize },
    /// Density ∝ exp(-Tr(M² - AM)) with A = diag(a).
    ExternalSource { a: Vec<f64> },
}

impl EnsembleSpec {
    pub fn dim(&self) -> usize {
        match self {
            EnsembleSpec::Gue { n }
            | EnsembleSpec::Wigner { n, .. }
            | EnsembleSpec::Wishart { n, .. }
            | EnsembleSpec::TruncatedUnitary { n, .. } => *n,
            EnsembleSpec::ExternalSource { a } => a.len(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnsembleSpec::Gue { .. } => "gue",
            EnsembleSpec::Wigner { .. } => "wigner",
            EnsembleSpec::Wishart { .. } => "wishart",
            EnsembleSpec::TruncatedUnitary { .. } => "truncated_unitary",
            EnsembleSpec::ExternalSource { .. } => "external_source",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(invalid("matrix dimension must be at least 1"));
        }
        match self {
            EnsembleSpec::Wigner { sigma, .. } if !(*sigma > 0.0 && sigma.is_finite()) => {
                Err(invalid(format!("σ = {sigma} must be positive")))
            }
            EnsembleSpec::Wishart { n, m } if m < n => Err(invalid(format!("wishart needs m ≥ n, got m = {m}, n = {n}"))),
            EnsembleSpec::TruncatedUnitary { m, n, k } if m < n || *k == 0 => {
                Err(invalid(format!("truncated unitary needs m ≥ n and k ≥ 1, got m = {m}, n = {n}, k = {k}")))
            }
            EnsembleSpec::ExternalSource { a } if a.iter().any(|v| !v.is_finite()) => {
                Err(invalid("external source eigenvalues must be finite"))
            }
            _ => Ok(()),
        }
    }
}

/// One draw. `matrix` is the Hermitian matrix whose spectrum is studied;
/// `factor` holds M (wishart) or V (truncated unitary).
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSample {
    pub matrix: Vec<Vec<Complex64>>,
    pub factor: Option<Vec<Vec<Complex64>>>,
}

type CMatrix = Vec<Vec<Complex64>>;

fn normal(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    sd * z
}

/// Hermitian matrix with diagonal N(0, d²) and off-diagonal real and
/// imaginary parts N(0, o²).
fn hermitian(rng: &mut ChaCha8Rng, n: usize, d: f64, o: f64) -> CMatrix {
    let mut h = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        h[i][i] = Complex64::new(normal(rng, d), 0.0);
        for j in i + 1..n {
            let z = Complex64::new(normal(rng, o), normal(rng, o));
            h[i][j] = z;
            h[j][i] = z.conj();
        }
    }
    h
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, sd: f64) -> CMatrix {
    (0..rows).map(|_| (0..cols).map(|_| Complex64::new(normal(rng, sd), normal(rng, sd))).collect()).collect()
}

/// A A*, or A* A when `adjoint_first`.
fn gram(a: &CMatrix, adjoint_first: bool) -> CMatrix {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    if adjoint_first {
        (0..cols)
            .map(|i| (0..cols).map(|j| (0..rows).map(|r| a[r][i].conj() * a[r][j]).sum()).collect())
            .collect()
    } else {
        (0..rows)
            .map(|i| (0..rows).map(|j| (0..cols).map(|c| a[i][c] * a[j][c].conj()).sum()).collect())
            .collect()
    }
}

pub fn sample_with(spec: &EnsembleSpec, rng: &mut ChaCha8Rng) -> Result<EnsembleSample> {
    spec.validate()?;
    let sample = match spec {
        EnsembleSpec::Gue { n } => {
            let nf = *n as f64;
            EnsembleSample { matrix: hermitian(rng, *n, libm::sqrt(0.5 / nf), libm::sqrt(0.25 / nf)), factor: None }
        }
        EnsembleSpec::Wigner { n, sigma } => EnsembleSample { matrix: hermitian(rng, *n, *sigma, *sigma), factor: None },
        EnsembleSpec::Wishart { n, m } => {
            let x = gaussian_matrix(rng, *n, *m, 1.0);
            EnsembleSample { matrix: gram(&x, false), factor: Some(x) }
        }
        EnsembleSpec::TruncatedUnitary { m, n, k } => {
            let size = m + k;
            let z = gaussian_matrix(rng, size, size, 1.0);
            let u = linalg::complex_qr_q(&z)?;
            let v: CMatrix = u[..*m].iter().map(|row| row[..*n].to_vec()).collect();
            EnsembleSample { matrix: gram(&v, true), factor: Some(v) }
        }
        EnsembleSpec::ExternalSource { a } => {
            let mut h = hermitian(rng, a.len(), libm::sqrt(0.5), 0.5);
            for (i, ai) in a.iter().enumerate() {
                h[i][i].re += ai / 2.0;
            }
            EnsembleSample { matrix: h, factor: None }
        }
    };
    Ok(sample)
}

pub fn sample_ensemble(spec: &EnsembleSpec, seed: u64) -> Result<EnsembleSample> {
    sample_with(spec, &mut mc::chunk_rng(seed, 0))
}

pub fn eigenvalues(sample: &EnsembleSample) -> Result<Vec<f64>> {
    linalg::hermitian_eigenvalues(&sample.matrix)
}

/// Monic polynomial with the given roots, ascending coefficients.
pub fn poly_from_roots(roots: &[f64]) -> Vec<f64> {
    roots.iter().fold(vec![1.0], |p, r| crate::poly::mul_linear(&p, r))
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CharPolyEstimate {
    pub degree: usize,
    /// Ascending; the leading entry is exactly 1.
    pub coeff_means: Vec<f64>,
    pub coeff_stderrs: Vec<f64>,
    pub samples: usize,
}

pub const MIN_SAMPLES: usize = 1000;

/// Writes the non-leading characteristic-polynomial coefficients of one draw.
pub fn char_poly_observation(spec: &EnsembleSpec, rng: &mut ChaCha8Rng, out: &mut [f64]) -> Result<()> {
    let ev = eigenvalues(&sample_with(spec, rng)?)?;
    let p = poly_from_roots(&ev);
    out.copy_from_slice(&p[..ev.len()]);
    Ok(())
}

pub fn char_poly_estimate(spec: &EnsembleSpec, acc: &mc::Accumulator) -> CharPolyEstimate {
    let n = spec.dim();
    let mut means: Vec<f64> = (0..n).map(|i| acc.mean(i)).collect();
    let mut errs: Vec<f64> = (0..n).map(|i| acc.stderr(i)).collect();
    means.push(1.0);
    errs.push(0.0);
    CharPolyEstimate { degree: n, coeff_means: means, coeff_stderrs: errs, samples: acc.count as usize }
}

pub fn avg_char_poly_mc(spec: &EnsembleSpec, samples: usize, seed: u64) -> Result<CharPolyEstimate> {
    spec.validate()?;
    if samples < MIN_SAMPLES {
        return Err(invalid(format!("at least {MIN_SAMPLES} samples are required")));
    }
    let mut failure = None;
    let acc = mc::run(samples, seed, spec.dim(), |rng, out| {
        if let Err(e) = char_poly_observation(spec, rng, out) {
            failure.get_or_insert(e);
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(char_poly_estimate(spec, &acc)),
    }
}

fn monic_from_recurrence(rec: &RecurrenceCoefficients<f64>, n: usize) -> Result<Vec<f64>> {
    if rec.b.len() < n || rec.a_sq.len() + 1 < n {
        return Err(OpxError::Insufficient { needed: n, available: rec.b.len() });
    }
    let mut p = vec![1.0];
    let mut prev: Vec<f64> = Vec::new();
    for k in 0..n {
        let mut next = crate::poly::mul_linear(&p, &rec.b[k]);
        if k > 0 {
            next = crate::poly::add(&next, &crate::poly::scale(&prev, &-rec.a_sq[k - 1]));
        }
        prev = p;
        p = next;
    }
    Ok(p)
}

/// p(x) ↦ s^n p(x / s) for a monic p of degree n.
fn rescale(p: &[f64], s: f64) -> Vec<f64> {
    let n = p.len() - 1;
    p.iter().enumerate().map(|(k, c)| c * libm::pow(s, (n - k) as f64)).collect()
}

fn monic_laguerre(alpha: f64, n: usize) -> Result<Vec<f64>> {
    if alpha <= -1.0 {
        return Err(invalid(format!("laguerre parameter {alpha} must exceed -1")));
    }
    monic_from_recurrence(&RecurrenceCoefficients::laguerre(alpha, n), n)
}

/// Monic Jacobi on [0, 1] for x^α (1-x)^β.
fn monic_jacobi_unit(alpha: f64, beta: f64, n: usize) -> Result<Vec<f64>> {
    let w = Weight::jacobi(alpha, beta, crate::opcore::JacobiInterval::Unit)?;
    let k = KernelOperator::new(w, n, KernelMode::Plain)?;
    monic_from_recurrence(&k.recurrence, n)
}

/// Distinct values of `a` with their multiplicities, in first-seen order.
fn group(a: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut c: Vec<f64> = Vec::new();
    let mut m: Vec<usize> = Vec::new();
    for &v in a {
        match c.iter().position(|u| *u == v) {
            Some(i) => m[i] += 1,
            None => {
                c.push(v);
                m.push(1);
            }
        }
    }
    (c, m)
}

/// Predicted E det(xI - M), ascending and monic.
///
/// Wishart follows the stated Laguerre parameter (m-n-1)/2 with weight
/// x^α e^{-x}; see [`wishart_complex_avg_char_poly`] for the value the
/// sampler actually reproduces.
pub fn exact_avg_char_poly(spec: &EnsembleSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    match spec {
        EnsembleSpec::Gue { n } => {
            let h = monic_from_recurrence(&RecurrenceCoefficients::hermite(*n), *n)?;
            Ok(rescale(&h, 1.0 / libm::sqrt(*n as f64)))
        }
        EnsembleSpec::Wigner { n, sigma } => {
            let mut p0 = vec![1.0];
            let mut p1 = vec![0.0, 1.0];
            if *n == 0 {
                return Ok(p0);
            }
            for k in 2..=*n {
                let mut next = vec![0.0];
                next.extend_from_slice(&p1);
                next = crate::poly::add(&next, &crate::poly::scale(&p0, &(-2.0 * (k - 1) as f64 * sigma * sigma)));
                p0 = p1;
                p1 = next;
            }
            Ok(p1)
        }
        EnsembleSpec::Wishart { n, m } => monic_laguerre((*m as f64 - *n as f64 - 1.0) / 2.0, *n),
        EnsembleSpec::TruncatedUnitary { m, n, k } => {
            if k < n {
                return Err(OpxError::NoPrediction(format!("truncated unitary with k = {k} < n = {n}")));
            }
            monic_jacobi_unit((m - n) as f64, (k - n) as f64, *n)
        }
        EnsembleSpec::ExternalSource { a } => {
            let (c, mult) = group(a);
            let p = family_closed_form(&MopFamily::MultipleHermite { c }, &MultiIndex(mult), 256)?;
            Ok(p.coeffs_f64())
        }
    }
}

/// E det(xI - MM*) for the sampled complex Wishart ensemble: the monic
/// Laguerre polynomial with α = m - n for the weight x^α e^{-x/2}.
pub fn wishart_complex_avg_char_poly(n: usize, m: usize) -> Result<Vec<f64>> {
    EnsembleSpec::Wishart { n, m }.validate()?;
    Ok(rescale(&monic_laguerre((m - n) as f64, n)?, 2.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bins {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Bins {
    pub fn edges(&self) -> Vec<f64> {
        (0..=self.count).map(|i| self.lo + (self.hi - self.lo) * i as f64 / self.count as f64).collect()
    }

    pub fn index(&self, x: f64) -> Option<usize> {
        if x < self.lo || x >= self.hi {
            return None;
        }
        Some((((x - self.lo) / (self.hi - self.lo) * self.count as f64) as usize).min(self.count - 1))
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EigenvalueStats {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Determinantal prediction per bin, in eigenvalue counts.
    pub expected: Vec<f64>,
    pub total: u64,
    pub samples: usize,
    /// Σ (count - expected)² / expected over bins with positive expectation.
    pub chi_square: f64,
}

/// Expected number of eigenvalues per bin for one matrix draw.
pub fn expected_bin_counts(spec: &EnsembleSpec, bins: &Bins) -> Result<Vec<f64>> {
    let edges = bins.edges();
    let (kernel, scale, lo) = match spec {
        EnsembleSpec::Gue { n } => (KernelOperator::new(Weight::hermite(), *n, KernelMode::Weighted)?, libm::sqrt(*n as f64), f64::NEG_INFINITY),
        EnsembleSpec::Wishart { n, m } => {
            (KernelOperator::new(Weight::laguerre((m - n) as f64)?, *n, KernelMode::Weighted)?, 0.5, 0.0)
        }
        _ => return Err(OpxError::NoPrediction(format!("eigenvalue density of {}", spec.name()))),
    };
    edges
        .windows(2)
        .map(|w| {
            let a = (w[0] * scale).max(lo);
            let b = (w[1] * scale).max(lo);
            if a >= b {
                Ok(0.0)
            } else {
                crate::detproc::expected_count(&kernel, a, b)
            }
        })
        .collect()
}

pub fn eigenvalue_stats(spec: &EnsembleSpec, samples: usize, bins: &Bins, seed: u64) -> Result<EigenvalueStats> {
    spec.validate()?;
    if bins.count == 0 || !(bins.lo < bins.hi) {
        return Err(invalid("histogram needs at least one bin and lo < hi"));
    }
    if samples * spec.dim() < 10_000 {
        return Err(invalid("samples × n must be at least 10⁴"));
    }
    let per_draw = expected_bin_counts(spec, bins)?;
    let mut counts = vec![0u64; bins.count];
    let mut total = 0u64;
    for chunk in 0..mc::chunk_count(samples) {
        let mut rng = mc::chunk_rng(seed, chunk);
        let len = mc::CHUNK_SIZE.min(samples - chunk * mc::CHUNK_SIZE);
        for _ in 0..len {
            for x in eigenvalues(&sample_with(spec, &mut rng)?)? {
                total += 1;
                if let Some(i) = bins.index(x) {
                    counts[i] += 1;
                }
            }
        }
    }
    let expected: Vec<f64> = per_draw.iter().map(|e| e * samples as f64).collect();
    let chi_square = counts
        .iter()
        .zip(&expected)
        .filter(|(_, e)| **e > 0.0)
        .map(|(c, e)| (*c as f64 - e) * (*c as f64 - e) / e)
        .sum();
    Ok(EigenvalueStats { edges: bins.edges(), counts, expected, total, samples, chi_square })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_have_expected_shape() {
        let s = sample_ensemble(&EnsembleSpec::Gue { n: 1 }, 3).unwrap();
        assert_eq!(s.matrix.len(), 1);
        assert_eq!(s.matrix[0][0].im, 0.0);
        let w = sample_ensemble(&EnsembleSpec::Wishart { n: 2, m: 3 }, 3).unwrap();
        assert!(eigenvalues(&w).unwrap().iter().all(|v| *v >= -1e-12));
        assert!((w.matrix[0][1] - w.matrix[1][0].conj()).norm() < 1e-14);
        let t = sample_ensemble(&EnsembleSpec::TruncatedUnitary { m: 3, n: 2, k: 1 }, 3).unwrap();
        for v in eigenvalues(&t).unwrap() {
            assert!((-1e-12..=1.0 + 1e-12).contains(&v));
        }
        assert!(sample_ensemble(&EnsembleSpec::Wishart { n: 3, m: 2 }, 0).is_err());
        assert!(sample_ensemble(&EnsembleSpec::TruncatedUnitary { m: 3, n: 2, k: 0 }, 0).is_err());
    }

    #[test]
    fn exact_predictions() {
        assert_eq!(exact_avg_char_poly(&EnsembleSpec::Gue { n: 1 }).unwrap(), vec![0.0, 1.0]);
        let g2 = exact_avg_char_poly(&EnsembleSpec::Gue { n: 2 }).unwrap();
        assert!((g2[0] + 0.25).abs() < 1e-15 && g2[1].abs() < 1e-15);
        let s = 0.7;
        let w3 = exact_avg_char_poly(&EnsembleSpec::Wigner { n: 3, sigma: s }).unwrap();
        assert!((w3[1] + 6.0 * s * s).abs() < 1e-14 && w3[0] == 0.0 && w3[2] == 0.0);
        let e = exact_avg_char_poly(&EnsembleSpec::ExternalSource { a: vec![0.8, 0.8, 0.8] }).unwrap();
        let r1 = family_closed_form(&MopFamily::MultipleHermite { c: vec![0.8] }, &MultiIndex(vec![3]), 256).unwrap().coeffs_f64();
        assert_eq!(e, r1);
        assert!(exact_avg_char_poly(&EnsembleSpec::TruncatedUnitary { m: 3, n: 2, k: 1 }).is_err());
        let w = wishart_complex_avg_char_poly(1, 3).unwrap();
        assert_eq!(w, vec![-6.0, 1.0]);
    }

    #[test]
    fn gue_two_by_two_average() {
        let est = avg_char_poly_mc(&EnsembleSpec::Gue { n: 2 }, 20_000, 11).unwrap();
        assert_eq!(est.coeff_means[2], 1.0);
        assert!((est.coeff_means[0] + 0.25).abs() < 4.0 * est.coeff_stderrs[0]);
        assert!(est.coeff_means[1].abs() < 4.0 * est.coeff_stderrs[1]);
        assert!(avg_char_poly_mc(&EnsembleSpec::Gue { n: 2 }, 10, 11).is_err());
    }
}
