use crate::error::{invalid, OpxError, Result};
use crate::mp::Mp;

/// Iterates of x_{k+1} = k/(4x_k) - x_k - x_{k-1} started from
/// (x_{n-1}, x_n = ε), with the leading-order comparisons.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SingularityProbe {
    pub n: usize,
    pub x_prev: f64,
    pub eps: f64,
    /// x_{n+1}..x_{n+4}.
    pub values: [f64; 4],
    /// x_{n+3} + ε and x_{n+4} - x_{n-1} - (2 - 8x_{n-1}²)ε/n.
    pub stated: [f64; 2],
    /// The same comparisons against the expansion of the index-dependent map:
    /// x_{n+3} = -(n+3)ε/n + O(ε²) and
    /// x_{n+4} = n x_{n-1}/(n+3) + 2(n³ - 4n²u² + 6n² - 6nu² + 13n + 12)ε/(n(n+3)²) + O(ε²)
    /// with u = x_{n-1}.
    pub corrected: [f64; 2],
}

pub fn singularity_probe(n: usize, x_prev: f64, eps: f64, bits: usize) -> Result<SingularityProbe> {
    if eps == 0.0 {
        return Err(OpxError::DivisionByZero { step: 0 });
    }
    if n == 0 || !x_prev.is_finite() {
        return Err(invalid("probe needs n ≥ 1 and a finite x_{n-1}"));
    }
    if !(1e-10..=1e-2).contains(&eps.abs()) {
        return Err(invalid("eps must lie in [1e-10, 1e-2]"));
    }
    let (mut prev, mut cur) = (Mp::from_f64(x_prev, bits), Mp::from_f64(eps, bits));
    let mut xs = [Mp::zero(bits), Mp::zero(bits), Mp::zero(bits), Mp::zero(bits)];
    for (k, slot) in xs.iter_mut().enumerate() {
        if cur.is_zero() {
            return Err(OpxError::DivisionByZero { step: k });
        }
        let idx = Mp::from_i64((n + k) as i64, bits);
        let next = idx / cur.ldexp(2) - &cur - &prev;
        if !next.is_finite() {
            return Err(OpxError::PrecisionExhausted { last_good: n + k });
        }
        *slot = next.clone();
        prev = cur;
        cur = next;
    }
    let e = Mp::from_f64(eps, bits);
    let u = Mp::from_f64(x_prev, bits);
    let nm = Mp::from_i64(n as i64, bits);
    let n3 = Mp::from_i64(n as i64 + 3, bits);
    let stated3 = &xs[2] + &e;
    let stated4 = &xs[3] - &u - (Mp::from_i64(2, bits) - (&u * &u).ldexp(3)) * &e / &nm;
    let corrected3 = &xs[2] + &n3 * &e / &nm;
    let nf = n as f64;
    let u2 = &u * &u;
    let poly = Mp::from_f64(nf * nf * nf + 6.0 * nf * nf + 13.0 * nf + 12.0, bits) - &u2 * Mp::from_f64(4.0 * nf * nf + 6.0 * nf, bits);
    let lin = poly.ldexp(1) / (&nm * &n3 * &n3);
    let corrected4 = &xs[3] - &nm * &u / &n3 - lin * &e;
    Ok(SingularityProbe {
        n,
        x_prev,
        eps,
        values: [xs[0].to_f64(), xs[1].to_f64(), xs[2].to_f64(), xs[3].to_f64()],
        stated: [stated3.to_f64(), stated4.to_f64()],
        corrected: [corrected3.to_f64(), corrected4.to_f64()],
    })
}

/// Observed orders p in |residual| ~ ε^p from ε, ε/2, ε/4.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfinementOrders {
    pub stated: [f64; 2],
    pub corrected: [f64; 2],
}

impl ConfinementOrders {
    /// Whether both stated comparisons are O(ε²) within ±0.2.
    pub fn stated_quadratic(&self) -> bool {
        self.stated.iter().all(|p| (p - 2.0).abs() <= 0.2)
    }

    pub fn corrected_quadratic(&self) -> bool {
        self.corrected.iter().all(|p| (p - 2.0).abs() <= 0.2)
    }
}

pub fn confinement_orders(n: usize, x_prev: f64, eps: f64, bits: usize) -> Result<ConfinementOrders> {
    let probes = [
        singularity_probe(n, x_prev, eps, bits)?,
        singularity_probe(n, x_prev, eps / 2.0, bits)?,
        singularity_probe(n, x_prev, eps / 4.0, bits)?,
    ];
    let order = |f: &dyn Fn(&SingularityProbe) -> f64| {
        let r: [f64; 3] = [f(&probes[0]).abs(), f(&probes[1]).abs(), f(&probes[2]).abs()];
        0.5 * (libm::log2(r[0] / r[1]) + libm::log2(r[1] / r[2]))
    };
    Ok(ConfinementOrders {
        stated: [order(&|p| p.stated[0]), order(&|p| p.stated[1])],
        corrected: [order(&|p| p.corrected[0]), order(&|p| p.corrected[1])],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_iterate_blows_up_like_n_over_4eps() {
        let p = singularity_probe(5, 0.7, 1e-3, 256).unwrap();
        let lead = 5.0 / 4e-3;
        assert!((p.values[0] - lead).abs() / lead < 1e-3);
    }

    #[test]
    fn zero_eps_is_division_by_zero() {
        assert!(matches!(singularity_probe(5, 0.7, 0.0, 256), Err(OpxError::DivisionByZero { .. })));
    }

    #[test]
    fn corrected_expansion_is_second_order() {
        let o = confinement_orders(5, 0.7, 1e-4, 256).unwrap();
        assert!(o.corrected_quadratic(), "{o:?}");
    }

    #[test]
    fn stated_expansion_misses_index_shift() {
        let o = confinement_orders(5, 0.7, 1e-4, 256).unwrap();
        assert!((o.stated[0] - 1.0).abs() < 0.1, "{o:?}");
        assert!(o.stated[1].abs() < 0.1, "{o:?}");
        let p = singularity_probe(5, 0.7, 1e-4, 256).unwrap();
        assert!((p.values[3] - 5.0 * 0.7 / 8.0).abs() < 1e-3);
    }
}
