use opx_core::mop::{
    family_closed_form, mop_cd_kernel, nnrr_coefficients, solve_type_i, solve_type_ii, MOPSystem, MopFamily,
    MopWeight, MultiIndex, SystemClass,
};

const BITS: usize = 256;

fn mi(v: &[usize]) -> MultiIndex {
    MultiIndex(v.to_vec())
}

fn sign_changes(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> usize {
    let mut prev = f(a);
    let mut count = 0;
    for i in 1..=steps {
        let v = f(a + (b - a) * i as f64 / steps as f64);
        if v != 0.0 && prev != 0.0 && (v > 0.0) != (prev > 0.0) {
            count += 1;
        }
        if v != 0.0 {
            prev = v;
        }
    }
    count
}

#[test]
fn angelesco_zeros_split_between_intervals() {
    let weights = vec![MopWeight::Interval { a: -1.0, b: 0.0 }, MopWeight::Interval { a: 0.0, b: 1.0 }];
    let sys = MOPSystem::new(weights, SystemClass::Angelesco, 16, BITS).unwrap();
    for n in [mi(&[1, 1]), mi(&[2, 1]), mi(&[3, 2]), mi(&[1, 3])] {
        let p = solve_type_ii(&sys, &n).unwrap();
        assert_eq!(sign_changes(|x| p.eval(x), -1.0, 0.0, 20_000), n.get(0), "{n} on [-1, 0]");
        assert_eq!(sign_changes(|x| p.eval(x), 0.0, 1.0, 20_000), n.get(1), "{n} on [0, 1]");
    }
}

#[test]
fn at_system_sign_changes() {
    let fam = MopFamily::MultipleHermite { c: vec![-1.0, 1.0] };
    let sys = fam.system(24, BITS).unwrap();
    for n in [mi(&[1, 1]), mi(&[2, 1]), mi(&[2, 2]), mi(&[1, 3])] {
        let q = solve_type_i(&sys, &n).unwrap();
        assert_eq!(sign_changes(|x| q.eval(&sys, x), -8.0, 8.0, 40_000), n.total() - 1, "Q_{n}");
        let p = solve_type_ii(&sys, &n).unwrap();
        assert_eq!(sign_changes(|x| p.eval(x), -8.0, 8.0, 40_000), n.total(), "P_{n}");
    }
}

#[test]
fn multiple_hermite_lowering_operator() {
    let fam = MopFamily::MultipleHermite { c: vec![-0.8, 1.3] };
    for total in 1..=5 {
        for i in 0..=total {
            let n = mi(&[i, total - i]);
            let h = family_closed_form(&fam, &n, BITS).unwrap().coeffs_f64();
            let deriv: Vec<f64> = (1..h.len()).map(|k| k as f64 * h[k]).collect();
            let mut rhs = vec![0.0; total];
            for j in 0..2 {
                if n.get(j) == 0 {
                    continue;
                }
                let lower = family_closed_form(&fam, &n.minus(j).unwrap(), BITS).unwrap().coeffs_f64();
                for (k, c) in lower.iter().enumerate() {
                    rhs[k] += n.get(j) as f64 * c;
                }
            }
            for (a, b) in deriv.iter().zip(&rhs) {
                assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()), "{n}: {deriv:?} vs {rhs:?}");
            }
        }
    }
}

#[test]
fn nnrr_holds_as_polynomial_identity() {
    let fams = [
        MopFamily::MultipleLaguerre1 { alpha: vec![0.3, -0.45] },
        MopFamily::JacobiPineiro { alpha: vec![1.0 / 3.0, -0.25], beta: 0.5 },
        MopFamily::MultipleHermite { c: vec![-0.7, 1.2] },
    ];
    for fam in &fams {
        let sys = fam.system(24, BITS).unwrap();
        for n in [mi(&[1, 1]), mi(&[2, 1]), mi(&[1, 3]), mi(&[2, 2])] {
            let rec = nnrr_coefficients(&sys, &n).unwrap();
            let p = solve_type_ii(&sys, &n).unwrap().coeffs_f64();
            for k in 0..2 {
                let up = solve_type_ii(&sys, &n.plus(k)).unwrap().coeffs_f64();
                let mut r: Vec<f64> = vec![0.0; up.len()];
                for (i, c) in p.iter().enumerate() {
                    r[i + 1] += c;
                    r[i] -= rec.b[k] * c;
                }
                for (i, c) in up.iter().enumerate() {
                    r[i] -= c;
                }
                for j in 0..2 {
                    if n.get(j) > 0 {
                        for (i, c) in solve_type_ii(&sys, &n.minus(j).unwrap()).unwrap().coeffs_f64().iter().enumerate() {
                            r[i] -= rec.a[j] * c;
                        }
                    }
                }
                let scale = up.iter().fold(1.0f64, |m, c| m.max(c.abs()));
                assert!(r.iter().all(|v| v.abs() < 1e-10 * scale), "{fam:?} {n} k={k}: {r:?}");
            }
        }
    }
}

fn monotone_paths(n: &MultiIndex) -> Vec<Vec<usize>> {
    fn go(left: [usize; 2], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == [0, 0] {
            out.push(cur.clone());
            return;
        }
        for j in 0..2 {
            if left[j] > 0 {
                let mut l = left;
                l[j] -= 1;
                cur.push(j);
                go(l, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go([n.get(0), n.get(1)], &mut Vec::new(), &mut out);
    out
}

#[test]
fn cd_kernel_is_path_independent() {
    let sys = MopFamily::MultipleHermite { c: vec![-1.0, 1.0] }.system(24, BITS).unwrap();
    for total in 1..=4 {
        for i in 0..=total {
            let n = mi(&[i, total - i]);
            let paths = monotone_paths(&n);
            for (x, y) in [(0.3, -0.8), (-1.2, 0.6)] {
                let first = mop_cd_kernel(&sys, &n, &paths[0], x, y).unwrap();
                for p in &paths[1..] {
                    let v = mop_cd_kernel(&sys, &n, p, x, y).unwrap();
                    assert!((v - first).abs() < 1e-12, "{n} {p:?}");
                }
            }
        }
    }
}
