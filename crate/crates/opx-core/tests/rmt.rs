use opx_core::rmt::{
    avg_char_poly_mc, eigenvalue_stats, eigenvalues, exact_avg_char_poly, sample_ensemble,
    wishart_complex_avg_char_poly, Bins, EnsembleSpec,
};
use opx_core::OpxError;

#[test]
fn estimates_are_monic_and_reproducible() {
    let spec = EnsembleSpec::Wigner { n: 3, sigma: 0.5 };
    let a = avg_char_poly_mc(&spec, 4000, 7).unwrap();
    let b = avg_char_poly_mc(&spec, 4000, 7).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.coeff_means[3], 1.0);
    assert_eq!(a.coeff_stderrs[3], 0.0);
    assert_ne!(a, avg_char_poly_mc(&spec, 4000, 8).unwrap());
}

#[test]
fn gue_odd_coefficients_vanish() {
    for n in [2, 3, 4] {
        let e = avg_char_poly_mc(&EnsembleSpec::Gue { n }, 50_000, 3).unwrap();
        for k in (0..n).filter(|k| (n - k) % 2 == 1) {
            assert!(e.coeff_means[k].abs() <= 4.0 * e.coeff_stderrs[k], "n={n} k={k}");
        }
    }
}

#[test]
fn spectra_respect_supports() {
    for seed in 0..50 {
        let w = sample_ensemble(&EnsembleSpec::Wishart { n: 3, m: 5 }, seed).unwrap();
        assert!(eigenvalues(&w).unwrap().iter().all(|&v| v > -1e-12));
        let t = sample_ensemble(&EnsembleSpec::TruncatedUnitary { m: 4, n: 3, k: 2 }, seed).unwrap();
        for v in eigenvalues(&t).unwrap() {
            assert!((-1e-12..=1.0 + 1e-12).contains(&v), "{v}");
        }
    }
}

#[test]
fn monte_carlo_agrees_with_predictions() {
    let specs = [
        EnsembleSpec::Gue { n: 2 },
        EnsembleSpec::Gue { n: 4 },
        EnsembleSpec::Wigner { n: 3, sigma: 0.7 },
        EnsembleSpec::TruncatedUnitary { m: 4, n: 2, k: 2 },
        EnsembleSpec::ExternalSource { a: vec![0.5, -1.0, 1.5] },
        EnsembleSpec::Wishart { n: 2, m: 3 },
    ];
    let (mut inside, mut total) = (0, 0);
    for spec in &specs {
        let want = match spec {
            EnsembleSpec::Wishart { n, m } => wishart_complex_avg_char_poly(*n, *m).unwrap(),
            _ => exact_avg_char_poly(spec).unwrap(),
        };
        for seed in [1, 2] {
            let e = avg_char_poly_mc(spec, 100_000, seed).unwrap();
            for k in 0..e.degree {
                total += 1;
                if (e.coeff_means[k] - want[k]).abs() <= 4.0 * e.coeff_stderrs[k] {
                    inside += 1;
                }
            }
        }
    }
    assert!(inside as f64 >= 0.95 * total as f64, "{inside}/{total}");
}

#[test]
fn truncated_unitary_without_prediction() {
    let spec = EnsembleSpec::TruncatedUnitary { m: 4, n: 3, k: 1 };
    assert!(matches!(exact_avg_char_poly(&spec), Err(OpxError::NoPrediction(_))));
}

#[test]
fn gue_histogram_matches_density() {
    let s = eigenvalue_stats(&EnsembleSpec::Gue { n: 3 }, 20_000, &Bins { lo: -2.5, hi: 2.5, count: 10 }, 4).unwrap();
    assert_eq!(s.total, 60_000);
    // 10 bins: the 99.9% point of χ²₁₀ is 29.6.
    assert!(s.chi_square < 29.6, "{}", s.chi_square);
    let counted: u64 = s.counts.iter().sum();
    let expected: f64 = s.expected.iter().sum();
    assert!((counted as f64 - expected).abs() < 0.01 * expected);
}
