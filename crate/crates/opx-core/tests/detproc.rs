use opx_core::detproc::{correlation_k, expected_count, fredholm_det, gap_probability, joint_density};
use opx_core::opcore::{cd_kernel, JacobiInterval, KernelMode, KernelOperator, Weight};

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn hermite(n: usize) -> KernelOperator {
    KernelOperator::new(Weight::hermite(), n, KernelMode::Weighted).unwrap()
}

#[test]
fn joint_density_marginalizes_to_pair_correlation() {
    let k = hermite(3);
    let pairs = [(0.1, -0.7), (1.2, 0.4), (-1.5, 2.0), (0.0, 0.9)];
    for (x1, x2) in pairs {
        let marginal = simpson(|x3| joint_density(&k, &[x1, x2, x3]).unwrap(), -9.0, 9.0, 3000);
        let rho2 = correlation_k(&k, &[x1, x2]).unwrap().value;
        assert!((6.0 * marginal - rho2).abs() < 1e-8, "({x1}, {x2}): {} vs {rho2}", 6.0 * marginal);
    }
}

#[test]
fn weighted_kernel_is_a_projection() {
    for n in [1, 3, 8] {
        let k = hermite(n);
        for (x, y) in [(0.3, -0.2), (1.1, 1.9), (-2.0, 0.5)] {
            let v = simpson(|s| cd_kernel(&k, x, s).unwrap() * cd_kernel(&k, s, y).unwrap(), -12.0, 12.0, 6000);
            let want = cd_kernel(&k, x, y).unwrap();
            assert!((v - want).abs() < 1e-9, "n={n} ({x},{y})");
        }
    }
}

#[test]
fn one_point_function_integrates_to_n() {
    let ws = [
        (Weight::laguerre(0.5).unwrap(), 0.0, f64::INFINITY),
        (Weight::jacobi(0.5, 1.5, JacobiInterval::Symmetric).unwrap(), -1.0, 1.0),
        (Weight::jacobi(-0.3, 0.2, JacobiInterval::Unit).unwrap(), 0.0, 1.0),
    ];
    for (w, a, b) in ws {
        for n in [1, 4, 10] {
            let k = KernelOperator::new(w.clone(), n, KernelMode::Plain).unwrap();
            let c = expected_count(&k, a, b).unwrap();
            assert!((c - n as f64).abs() < 1e-9, "{} n={n}: {c}", w.tag());
        }
    }
}

#[test]
fn single_point_gap_plus_tails_is_one() {
    let k = hermite(1);
    for l in [0.5, 1.5, 3.0] {
        let g = gap_probability(&k, -l, l, 16).unwrap();
        let tail = 0.5 * libm::erfc(l);
        let inside = expected_count(&k, -l, l).unwrap();
        assert!((g.result - 2.0 * tail).abs() < 1e-8, "L={l}: {}", g.result);
        assert!((g.result + inside - 1.0).abs() < 1e-8);
    }
}

#[test]
fn gap_order_doubling_converges() {
    let k = hermite(4);
    let g = gap_probability(&k, -0.5, 1.0, 10).unwrap();
    assert!(g.converged);
    assert_eq!(g.order_sequence.len(), g.values.len());
    let direct = fredholm_det(&k, -0.5, 1.0, 64).unwrap();
    assert!((g.result - direct).abs() < 1e-8);
    assert!((0.0..=1.0).contains(&g.result));
}
