use opx_core::opcore::{
    compute_moments, eval_poly, gauss_rule, hankel_det, heine_monte_carlo, recurrence_from_moments, zeros,
    HeineMode, JacobiInterval, KernelMode, KernelOperator, MomentSequence, Normalization, RecurrenceCoefficients,
    Weight,
};
use opx_core::Mp;

const BITS: usize = 256;

fn weights() -> Vec<Weight> {
    vec![
        Weight::hermite(),
        Weight::laguerre(0.5).unwrap(),
        Weight::laguerre(-0.4).unwrap(),
        Weight::jacobi(0.5, -0.3, JacobiInterval::Unit).unwrap(),
        Weight::jacobi(1.5, 0.25, JacobiInterval::Symmetric).unwrap(),
        Weight::freud(0.7).unwrap(),
        Weight::freud(-1.0).unwrap(),
    ]
}

fn inner(p: &[Mp], q: &[Mp], m: &MomentSequence) -> Mp {
    let mut s = Mp::zero(BITS);
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            s += a * b * &m.values[i + j];
        }
    }
    s
}

/// Monic orthogonal polynomials by modified Gram–Schmidt on the monomials,
/// returning (a_k², b_k) for k < n.
fn gram_schmidt(m: &MomentSequence, n: usize) -> (Vec<Mp>, Vec<Mp>) {
    let mut basis: Vec<Vec<Mp>> = Vec::new();
    let mut norms: Vec<Mp> = Vec::new();
    for k in 0..=n {
        let mut v: Vec<Mp> = (0..=k).map(|i| if i == k { Mp::one(BITS) } else { Mp::zero(BITS) }).collect();
        for (p, nrm) in basis.iter().zip(&norms) {
            let c = inner(&v, p, m) / nrm.clone();
            for (i, pc) in p.iter().enumerate() {
                v[i] = v[i].clone() - c.clone() * pc;
            }
        }
        norms.push(inner(&v, &v, m));
        basis.push(v);
    }
    let mut a_sq = Vec::new();
    let mut b = Vec::new();
    for k in 0..n {
        let mut xp = vec![Mp::zero(BITS)];
        xp.extend(basis[k].iter().cloned());
        b.push(inner(&xp, &basis[k], m) / norms[k].clone());
        a_sq.push(norms[k + 1].clone() / norms[k].clone());
    }
    (a_sq, b)
}

fn rel(a: &Mp, b: &Mp) -> f64 {
    let scale = b.abs().to_f64().max(1e-300);
    (a.clone() - b.clone()).abs().to_f64() / scale
}

#[test]
fn hankel_determinants_positive() {
    for w in weights() {
        let m = compute_moments(&w, 41, BITS).unwrap();
        for n in 1..=20 {
            let d = hankel_det(&m, n).unwrap();
            assert!(d > Mp::zero(BITS), "{} D_{n} = {}", w.tag(), d.to_f64());
        }
    }
}

#[test]
fn recurrence_matches_gram_schmidt() {
    for w in weights() {
        let n = 12;
        let m = compute_moments(&w, 2 * n + 1, BITS).unwrap();
        let rec = recurrence_from_moments(&m, n).unwrap();
        let (a_sq, b) = gram_schmidt(&m, n);
        for k in 0..n {
            assert!(rel(&rec.a_sq[k], &a_sq[k]) < 1e-20, "{} a_{}²", w.tag(), k + 1);
            let scale = a_sq[k].abs().to_f64().sqrt();
            let db = (rec.b[k].clone() - b[k].clone()).abs().to_f64();
            assert!(db < 1e-20 * scale.max(1.0), "{} b_{k}", w.tag());
        }
    }
}

#[test]
fn jacobi_and_laguerre_closed_forms() {
    let (al, be) = (0.7, -0.2);
    let w = Weight::jacobi(al, be, JacobiInterval::Symmetric).unwrap();
    let rec = recurrence_from_moments(&compute_moments(&w, 17, BITS).unwrap(), 8).unwrap().to_f64();
    for n in 0..8 {
        let s = 2.0 * n as f64 + al + be;
        let b = (be * be - al * al) / (s * (s + 2.0));
        assert!((rec.b[n] - b).abs() < 1e-14, "b_{n}");
        let k = (n + 1) as f64;
        let s = 2.0 * k + al + be;
        let a = 4.0 * k * (k + al) * (k + be) * (k + al + be) / (s * s * (s + 1.0) * (s - 1.0));
        assert!((rec.a_sq[n] - a).abs() < 1e-14, "a_{}²", n + 1);
    }
    let w = Weight::laguerre(1.25).unwrap();
    let rec = recurrence_from_moments(&compute_moments(&w, 17, BITS).unwrap(), 8).unwrap().to_f64();
    let exact = RecurrenceCoefficients::laguerre(1.25, 8);
    for n in 0..8 {
        assert!((rec.b[n] - exact.b[n]).abs() < 1e-12);
        assert!((rec.a_sq[n] - exact.a_sq[n]).abs() < 1e-12);
    }
}

#[test]
fn zeros_are_real_simple_and_inside() {
    for w in weights() {
        let n = 9;
        let rec = recurrence_from_moments(&compute_moments(&w, 2 * n + 1, BITS).unwrap(), n).unwrap().to_f64();
        let z = zeros(&rec, n).unwrap();
        assert_eq!(z.len(), n);
        for i in 0..n {
            assert!(w.contains(z[i]), "{} zero {} outside", w.tag(), z[i]);
            if i > 0 {
                assert!(z[i] - z[i - 1] > 1e-8, "{} zeros not simple", w.tag());
            }
            let p = eval_poly(&rec, n, &z[i], Normalization::Orthonormal).unwrap();
            assert!(p[n].abs() < 1e-8, "{} P_n(zero) = {}", w.tag(), p[n]);
        }
        for i in 1..n {
            let mid = 0.5 * (z[i] + z[i - 1]);
            let left = eval_poly(&rec, n, &(z[i - 1] - 1e-9), Normalization::Monic).unwrap()[n];
            let right = eval_poly(&rec, n, &mid, Normalization::Monic).unwrap()[n];
            assert!(left * right <= 0.0 || left.abs() < 1e-12);
        }
    }
}

#[test]
fn gauss_rule_exact_to_degree_2n_minus_1() {
    for w in weights() {
        let n = 6;
        let m = compute_moments(&w, 2 * n + 1, BITS).unwrap();
        let rec = recurrence_from_moments(&m, n).unwrap().to_f64();
        let (x, wt) = gauss_rule(&rec, n).unwrap();
        for k in 0..2 * n {
            let q: f64 = x.iter().zip(&wt).map(|(x, w)| w * x.powi(k as i32)).sum();
            let exact = m.values[k].to_f64();
            assert!((q - exact).abs() < 1e-10 * (1.0 + exact.abs()), "{} k={k}", w.tag());
        }
    }
}

#[test]
fn kernel_is_reproducing_on_laguerre() {
    let w = Weight::laguerre(0.5).unwrap();
    let n = 5;
    let k = KernelOperator::new(w, n, KernelMode::Plain).unwrap();
    let (y, wt) = gauss_rule(&RecurrenceCoefficients::laguerre(0.5, n + 2), n + 2).unwrap();
    let q = |t: f64| 0.3 - 1.2 * t + 0.25 * t * t - 0.05 * t.powi(4);
    for x in [0.2, 1.7, 4.0] {
        let v: f64 = y.iter().zip(&wt).map(|(y, w)| w * k.sum_form(x, *y).unwrap() * q(*y)).sum();
        assert!((v - q(x)).abs() < 1e-10, "x={x}: {v} vs {}", q(x));
    }
}

#[test]
fn heine_estimates_cover_exact_values() {
    let w = Weight::hermite();
    let d2 = std::f64::consts::PI / 2.0;
    let mut inside = 0;
    let runs = 20;
    for seed in 0..runs {
        let e = heine_monte_carlo(&w, 2, 20_000, HeineMode::Det, seed).unwrap();
        if (e.value - d2).abs() <= 4.0 * e.stderr {
            inside += 1;
        }
    }
    assert!(inside as f64 >= 0.95 * runs as f64, "{inside}/{runs}");
}
