//! Subcommand execution.

use opx_core::detproc::gap_probability;
use opx_core::mop::{
    nnrr_coefficients, nnrr_residual, solve_type_ii, MopFamily, MultiIndex, NNRRCoefficients, TypeIIPoly,
};
use opx_core::opcore::{
    cd_kernel, compute_moments, moments_by_quadrature, recurrence_from_moments, JacobiInterval, KernelMode, KernelOperator,
    Weight,
};
use opx_core::painleve::{
    confinement_orders, dp1_positive_solution, dp2_residuals, freud_m0_parabolic, lattice_flow,
    painleve_ode_residual, semiclassical_system_residual, singularity_probe, verblunsky_sequence,
    wronskian_identities, ConfinementOrders, Lattice, OdeQuantity, SemiclassicalFamily, SingularityProbe,
    VerblunskySequence, WronskianBase,
};
use opx_core::rmt::{
    char_poly_estimate, char_poly_observation, eigenvalue_stats, exact_avg_char_poly,
    wishart_complex_avg_char_poly, Bins, CharPolyEstimate, EnsembleSpec, MIN_SAMPLES,
};
use opx_core::OpxError;
use serde::Serialize;
use std::sync::Mutex;

use crate::args::*;
use crate::parallel::{default_threads, run_parallel};
use crate::report::{num, Report};
use crate::CliError;

pub struct Context {
    pub bits: usize,
    pub seed: u64,
    pub threads: usize,
}

pub fn execute(cmd: &Command, ctx: &Context) -> Result<Report, CliError> {
    match cmd {
        Command::Moments(a) => moments(a, ctx),
        Command::Recurrence(a) => recurrence(a, ctx),
        Command::Kernel(a) => kernel(a),
        Command::Gap(a) => gap(a),
        Command::Rmt(RmtCommand::AvgChar(a)) => avg_char(a, ctx),
        Command::Rmt(RmtCommand::EigenStats(a)) => eigen_stats(a, ctx),
        Command::Mop(a) => mop(a, ctx),
        Command::Dp1(a) => dp1(a),
        Command::Dp2(a) => dp2(a),
        Command::Lattice(a) => lattice(a),
        Command::Ode(a) => ode(a),
        Command::Probe(a) => probe(a, ctx),
        Command::Wronskian(a) => wronskian(a, ctx),
        Command::System(a) => system(a),
    }
}

pub fn echo_args(cmd: &Command, report: &mut Report) -> Result<(), CliError> {
    match cmd {
        Command::Moments(a) => report.echo(a),
        Command::Recurrence(a) => report.echo(a),
        Command::Kernel(a) => report.echo(a),
        Command::Gap(a) => report.echo(a),
        Command::Rmt(RmtCommand::AvgChar(a)) => report.echo(a),
        Command::Rmt(RmtCommand::EigenStats(a)) => report.echo(a),
        Command::Mop(a) => report.echo(a),
        Command::Dp1(a) => report.echo(a),
        Command::Dp2(a) => report.echo(a),
        Command::Lattice(a) => report.echo(a),
        Command::Ode(a) => report.echo(a),
        Command::Probe(a) => report.echo(a),
        Command::Wronskian(a) => report.echo(a),
        Command::System(a) => report.echo(a),
    }
}

fn weight(a: &WeightArgs) -> Result<Weight, OpxError> {
    match a.family {
        WeightFamily::Hermite => Ok(Weight::hermite()),
        WeightFamily::Laguerre => Weight::laguerre(a.alpha),
        WeightFamily::Jacobi => {
            let interval = match a.interval {
                Interval::Unit => JacobiInterval::Unit,
                Interval::Symmetric => JacobiInterval::Symmetric,
            };
            Weight::jacobi(a.alpha, a.beta, interval)
        }
        WeightFamily::Freud => Weight::freud(a.t),
    }
}

fn moments(a: &MomentsArgs, ctx: &Context) -> Result<Report, CliError> {
    let w = weight(&a.weight)?;
    let seq = if a.quadrature {
        moments_by_quadrature(&w, a.count, ctx.bits)?
    } else {
        compute_moments(&w, a.count, ctx.bits)?
    };
    let mut r = Report::new("moments", &seq)?.columns(&["k", "m_k"]);
    r.summary("weight", &seq.weight_tag);
    if let Some(e) = seq.quadrature_error {
        r.summary("quadrature_error", e);
    }
    for (k, m) in seq.values.iter().enumerate() {
        r.row(vec![k.to_string(), m.to_decimal()]);
    }
    Ok(r)
}

fn recurrence(a: &RecurrenceArgs, ctx: &Context) -> Result<Report, CliError> {
    let w = weight(&a.weight)?;
    let seq = compute_moments(&w, 2 * a.n + 1, ctx.bits)?;
    let rec = recurrence_from_moments(&seq, a.n)?;
    let mut r = Report::new("recurrence", &rec)?.columns(&["n", "a_sq", "b"]);
    r.summary("weight", &seq.weight_tag);
    for k in 0..a.n {
        r.row(vec![k.to_string(), rec.a2(k).to_decimal(), rec.b[k].to_decimal()]);
    }
    Ok(r)
}

#[derive(Serialize)]
struct KernelValue {
    x: f64,
    y: f64,
    cd: f64,
    sum: f64,
}

fn kernel(a: &KernelArgs) -> Result<Report, CliError> {
    let mode = match a.mode {
        KernelModeArg::Plain => KernelMode::Plain,
        KernelModeArg::Weighted => KernelMode::Weighted,
    };
    let k = KernelOperator::new(weight(&a.weight)?, a.n, mode)?;
    let v = KernelValue { x: a.x, y: a.y, cd: cd_kernel(&k, a.x, a.y)?, sum: k.sum_form(a.x, a.y)? };
    let mut r = Report::new("kernel", &v)?.columns(&["x", "y", "cd", "sum"]);
    r.summary("difference", (v.cd - v.sum).abs());
    r.row(vec![num(v.x), num(v.y), num(v.cd), num(v.sum)]);
    Ok(r)
}

fn gap(a: &GapArgs) -> Result<Report, CliError> {
    let k = KernelOperator::new(weight(&a.weight)?, a.n, KernelMode::Weighted)?;
    let q = gap_probability(&k, a.a, a.b, a.order)?;
    let mut r = Report::new("gap", &q)?.columns(&["order", "value"]);
    r.summary("result", q.result);
    r.summary("converged", q.converged);
    for (m, v) in q.order_sequence.iter().zip(&q.values) {
        r.row(vec![m.to_string(), num(*v)]);
    }
    Ok(r)
}

fn ensemble(a: &EnsembleArgs) -> EnsembleSpec {
    let m = a.m.unwrap_or(a.n);
    match a.ensemble {
        EnsembleKind::Gue => EnsembleSpec::Gue { n: a.n },
        EnsembleKind::Wigner => EnsembleSpec::Wigner { n: a.n, sigma: a.sigma },
        EnsembleKind::Wishart => EnsembleSpec::Wishart { n: a.n, m },
        EnsembleKind::TruncatedUnitary => EnsembleSpec::TruncatedUnitary { m, n: a.n, k: a.k },
        EnsembleKind::ExternalSource => EnsembleSpec::ExternalSource { a: a.a.clone() },
    }
}

fn prediction(spec: &EnsembleSpec) -> Result<Option<Vec<f64>>, OpxError> {
    match exact_avg_char_poly(spec) {
        Ok(p) => Ok(Some(p)),
        Err(OpxError::NoPrediction(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Monte Carlo estimate of the average characteristic polynomial on
/// `threads` workers; identical to the sequential estimate for any count.
pub fn avg_char_poly_parallel(
    spec: &EnsembleSpec,
    samples: usize,
    seed: u64,
    threads: usize,
) -> Result<CharPolyEstimate, OpxError> {
    spec.validate()?;
    if samples < MIN_SAMPLES {
        return Err(OpxError::InvalidParameter(format!("at least {MIN_SAMPLES} samples are required")));
    }
    let failure = Mutex::new(None);
    let acc = run_parallel(samples, seed, spec.dim(), threads, |rng, out| {
        if let Err(e) = char_poly_observation(spec, rng, out) {
            failure.lock().expect("poisoned").get_or_insert(e);
        }
    });
    match failure.into_inner().expect("poisoned") {
        Some(e) => Err(e),
        None => Ok(char_poly_estimate(spec, &acc)),
    }
}

#[derive(Serialize)]
struct AvgChar {
    estimate: CharPolyEstimate,
    prediction: Option<Vec<f64>>,
    complex_wishart: Option<Vec<f64>>,
}

fn avg_char(a: &AvgCharArgs, ctx: &Context) -> Result<Report, CliError> {
    let spec = ensemble(&a.ensemble);
    let est = avg_char_poly_parallel(&spec, a.samples, ctx.seed, ctx.threads)?;
    let pred = prediction(&spec)?;
    let complex = match spec {
        EnsembleSpec::Wishart { n, m } => Some(wishart_complex_avg_char_poly(n, m)?),
        _ => None,
    };
    let mut cols = vec!["k", "mean", "stderr", "prediction", "z"];
    if complex.is_some() {
        cols.push("complex_wishart");
    }
    let mut r = Report::new("rmt avg-char", ())?.columns(&cols);
    let mut max_z: f64 = 0.0;
    for k in 0..=est.degree {
        let (m, s) = (est.coeff_means[k], est.coeff_stderrs[k]);
        let p = pred.as_ref().map(|p| p[k]);
        let z = match p {
            Some(p) if s > 0.0 => (m - p) / s,
            _ => 0.0,
        };
        max_z = max_z.max(z.abs());
        let mut row = vec![k.to_string(), num(m), num(s), p.map(num).unwrap_or_default(), num(z)];
        if let Some(c) = &complex {
            row.push(num(c[k]));
        }
        r.row(row);
    }
    r.summary("ensemble", spec.name());
    if pred.is_some() {
        r.summary("max_abs_z", max_z);
    }
    r.result = serde_json::to_value(AvgChar { estimate: est, prediction: pred, complex_wishart: complex })?;
    Ok(r)
}

fn eigen_stats(a: &EigenStatsArgs, ctx: &Context) -> Result<Report, CliError> {
    let spec = ensemble(&a.ensemble);
    let bins = Bins { lo: a.lo, hi: a.hi, count: a.bins };
    let s = eigenvalue_stats(&spec, a.samples, &bins, ctx.seed)?;
    let mut r = Report::new("rmt eigen-stats", &s)?.columns(&["bin_lo", "bin_hi", "count", "expected"]);
    r.summary("ensemble", spec.name());
    r.summary("total", s.total);
    r.summary("chi_square", s.chi_square);
    for i in 0..bins.count {
        r.row(vec![num(s.edges[i]), num(s.edges[i + 1]), s.counts[i].to_string(), num(s.expected[i])]);
    }
    Ok(r)
}

fn mop_family(a: &MopArgs) -> MopFamily {
    let or = |v: &Vec<f64>, d: &[f64]| if v.is_empty() { d.to_vec() } else { v.clone() };
    match a.family {
        MopFamilyKind::MultipleHermite => MopFamily::MultipleHermite { c: or(&a.c, &[-1.0, 1.0]) },
        MopFamilyKind::MultipleLaguerre1 => MopFamily::MultipleLaguerre1 { alpha: or(&a.alpha, &[0.0, 0.5]) },
        MopFamilyKind::MultipleLaguerre2 => {
            MopFamily::MultipleLaguerre2 { alpha: a.alpha.first().copied().unwrap_or(0.0), c: or(&a.c, &[1.0, 2.0]) }
        }
        MopFamilyKind::JacobiPineiro => MopFamily::JacobiPineiro { alpha: or(&a.alpha, &[0.0, 0.5]), beta: a.beta },
    }
}

#[derive(Serialize)]
struct MopResult {
    type_ii: TypeIIPoly,
    nnrr: NNRRCoefficients,
    nnrr_closed: Option<NNRRCoefficients>,
    nnrr_residual: f64,
}

fn mop(a: &MopArgs, ctx: &Context) -> Result<Report, CliError> {
    let fam = mop_family(a);
    fam.validate()?;
    let idx = MultiIndex::new(a.index.clone())?;
    if idx.r() != fam.r() {
        return Err(OpxError::InvalidParameter(format!(
            "index has {} entries but the family has {} weights",
            idx.r(),
            fam.r()
        ))
        .into());
    }
    let sys = fam.system(a.moments.unwrap_or(2 * idx.total() + 8), ctx.bits)?;
    let type_ii = solve_type_ii(&sys, &idx)?;
    let nnrr = nnrr_coefficients(&sys, &idx)?;
    let closed = fam.nnrr_closed(&idx).ok();
    let residual = nnrr_residual(&sys, &idx)?;
    let mut r = Report::new("mop", ())?.columns(&["power", "coefficient"]);
    r.summary("index", idx.to_string());
    r.summary("a", &nnrr.a);
    r.summary("b", &nnrr.b);
    if let Some(c) = &closed {
        r.summary("a_closed", &c.a);
        r.summary("b_closed", &c.b);
    }
    r.summary("nnrr_residual", residual);
    for (p, c) in type_ii.coeffs.iter().enumerate() {
        r.row(vec![p.to_string(), c.to_decimal()]);
    }
    r.result = serde_json::to_value(MopResult { type_ii, nnrr, nnrr_closed: closed, nnrr_residual: residual })?;
    Ok(r)
}

fn dp1(a: &Dp1Args) -> Result<Report, CliError> {
    let s = dp1_positive_solution(a.t, a.n, a.tol)?;
    let mut r = Report::new("dp1", &s)?.columns(&["n", "x_n", "a_n", "a_n/n^(1/4)"]);
    r.summary("iterations", s.iterations);
    r.summary("residual", s.residual);
    for (i, x) in s.x.iter().enumerate() {
        let n = (i + 1) as f64;
        let an = x.sqrt();
        r.row(vec![(i + 1).to_string(), num(*x), num(an), num(an / n.powf(0.25))]);
    }
    Ok(r)
}

#[derive(Serialize)]
struct Dp2Result {
    sequence: VerblunskySequence,
    residuals: Vec<f64>,
}

fn dp2(a: &Dp2Args) -> Result<Report, CliError> {
    let seq = verblunsky_sequence(a.t, a.n)?;
    let res = dp2_residuals(&seq)?;
    let mut r = Report::new("dp2", ())?.columns(&["n", "alpha_n", "residual"]);
    r.summary("max_residual", res.iter().copied().fold(0.0, f64::max));
    r.summary("route_gap", seq.route_gap);
    for (n, al) in seq.alphas.iter().enumerate() {
        r.row(vec![n.to_string(), num(*al), res.get(n).map(|v| num(*v)).unwrap_or_default()]);
    }
    r.result = serde_json::to_value(Dp2Result { sequence: seq, residuals: res })?;
    Ok(r)
}

fn semi(a: &SemiArgs) -> SemiclassicalFamily {
    match a.family {
        SemiKind::Freud => SemiclassicalFamily::Freud,
        SemiKind::GenCharlier => SemiclassicalFamily::GenCharlier { beta: a.beta, c: a.c },
        SemiKind::GenMeixner => SemiclassicalFamily::GenMeixner { gamma: a.gamma, beta: a.beta, a: a.a },
        SemiKind::ChenIts => SemiclassicalFamily::ChenIts { alpha: a.alpha },
        SemiKind::Bce => SemiclassicalFamily::Bce { alpha: a.alpha, beta: a.beta },
        SemiKind::OpucBessel => SemiclassicalFamily::OpucBessel,
        SemiKind::ExpLaguerre => SemiclassicalFamily::ExpLaguerre { alpha: a.alpha },
    }
}

fn lattice(a: &LatticeArgs) -> Result<Report, CliError> {
    let [t0, t1] = a.span[..] else {
        return Err(OpxError::InvalidParameter("--span takes exactly two times t0,t1".into()).into());
    };
    let kind = match a.lattice {
        LatticeKind::Toda => Lattice::Toda,
        LatticeKind::Langmuir => Lattice::Langmuir,
        LatticeKind::AblowitzLadik => Lattice::AblowitzLadik,
    };
    let flow = lattice_flow(&semi(&a.family), kind, t0, t1, a.n, a.steps)?;
    let mut r = Report::new("lattice", &flow)?.columns(&["t", "n", "equation", "residual"]);
    r.summary("lattice", kind.name());
    r.summary("discrepancy", flow.discrepancy);
    r.summary("max_residual", flow.max_residual());
    for res in &flow.residuals {
        r.row(vec![num(res.t), res.n.to_string(), res.equation.name().into(), num(res.value)]);
    }
    Ok(r)
}

fn ode(a: &OdeArgs) -> Result<Report, CliError> {
    let q = match a.quantity {
        QuantityKind::P4Freud => OdeQuantity::P4Freud,
        QuantityKind::P5Charlier => OdeQuantity::P5Charlier { beta: a.beta },
        QuantityKind::P5Opuc => OdeQuantity::P5Opuc,
        QuantityKind::P3ChenIts => OdeQuantity::P3ChenIts { alpha: a.alpha },
        QuantityKind::P5Bce => OdeQuantity::P5Bce { alpha: a.alpha, beta: a.beta },
    };
    let res = painleve_ode_residual(q, a.n, a.t, a.h)?;
    let mut r = Report::new("ode", &res)?.columns(&["quantity", "n", "t", "h", "value", "residual"]);
    r.summary("residual", res.residual);
    r.row(vec![q.name().into(), a.n.to_string(), num(a.t), num(a.h), num(res.value), num(res.residual)]);
    Ok(r)
}

#[derive(Serialize)]
struct ProbeResult {
    probe: SingularityProbe,
    orders: ConfinementOrders,
}

fn probe(a: &ProbeArgs, ctx: &Context) -> Result<Report, CliError> {
    let p = singularity_probe(a.n, a.x_prev, a.eps, ctx.bits)?;
    let o = confinement_orders(a.n, a.x_prev, a.eps, ctx.bits)?;
    let mut r = Report::new("probe", ())?.columns(&["step", "x"]);
    r.summary("stated_orders", o.stated);
    r.summary("corrected_orders", o.corrected);
    r.summary("stated_quadratic", o.stated_quadratic());
    r.summary("corrected_quadratic", o.corrected_quadratic());
    for (i, v) in p.values.iter().enumerate() {
        r.row(vec![format!("n+{}", i + 1), num(*v)]);
    }
    r.result = serde_json::to_value(ProbeResult { probe: p, orders: o })?;
    Ok(r)
}

fn wronskian(a: &WronskianArgs, ctx: &Context) -> Result<Report, CliError> {
    let base = match a.base {
        BaseKind::Gaussian => WronskianBase::Gaussian,
        BaseKind::Laguerre => WronskianBase::Laguerre { alpha: a.alpha },
        BaseKind::Freud => WronskianBase::Freud,
    };
    let w = wronskian_identities(base, a.t, a.n, a.h)?;
    let mut r = Report::new("wronskian", &w)?.columns(&["k", "a_sq", "direct_a_sq", "b", "direct_b"]);
    r.summary("gap", w.gap);
    if matches!(base, WronskianBase::Freud) {
        r.summary("m0_parabolic", freud_m0_parabolic(a.t, ctx.bits)?.to_decimal());
    }
    for k in 0..w.a_sq.len().max(w.b.len()) {
        let cell = |v: &Vec<f64>| v.get(k).map(|x| num(*x)).unwrap_or_default();
        r.row(vec![k.to_string(), cell(&w.a_sq), cell(&w.direct_a_sq), cell(&w.b), cell(&w.direct_b)]);
    }
    Ok(r)
}

fn system(a: &SystemArgs) -> Result<Report, CliError> {
    let s = semiclassical_system_residual(&semi(&a.family), a.t, a.n)?;
    let mut r = Report::new("system", &s)?.columns(&["n", "equation", "residual"]);
    r.summary("family", &s.family);
    r.summary("max_residual", s.max());
    for row in &s.rows {
        r.row(vec![row.n.to_string(), row.equation.clone(), num(row.value)]);
    }
    Ok(r)
}

pub fn threads(requested: Option<usize>) -> usize {
    requested.unwrap_or_else(default_threads).max(1)
}
