//! Invariant battery behind `qmpemba validate`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::closed_form;
use crate::dynamics;
use crate::error::Result;
use crate::linalg::{self, re, CMatrix, C64};
use crate::metrics::{self, Metric};
use crate::relaxation::{self, BathParams, Coupling, Fault, LiouvillianOptions, Superoperator, SystemParams};
use crate::spectral;
use crate::state::{DensityMatrix, PopulationVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub epsilon: f64,
    pub coupling: Coupling,
    pub fault: Option<Fault>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { epsilon: 1e-5, coupling: Coupling::Ising, fault: None, trials: 100, seed: 7 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Not applicable to the chosen options; counts as passed.
    pub skipped: bool,
    /// Worst observed value against its bound.
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match (self.skipped, self.passed) {
            (true, _) => "SKIP",
            (false, true) => "PASS",
            (false, false) => "FAIL",
        };
        write!(f, "{status}  {:<28} {}", self.name, self.detail)
    }
}

fn bounded(name: &'static str, value: f64, bound: f64) -> Check {
    Check { name, passed: value.is_finite() && value <= bound, skipped: false, detail: format!("{value:.3e} <= {bound:.1e}") }
}

fn failed(name: &'static str, err: impl fmt::Display) -> Check {
    Check { name, passed: false, skipped: false, detail: format!("error: {err}") }
}

fn skipped(name: &'static str, reason: &str) -> Check {
    Check { name, passed: true, skipped: true, detail: reason.to_string() }
}

/// Experiment parameters in units of K0 (K0 = 1).
pub fn suite_params(epsilon: f64) -> (SystemParams, BathParams) {
    let p = SystemParams { epsilon, ..SystemParams::experiment() };
    let (p, bp, _) = relaxation::to_dimensionless(&p, &BathParams::experiment()).expect("experiment K0 is positive");
    (p, bp)
}

/// Random full-rank density matrix.
pub fn random_state(rng: &mut impl Rng, n: usize) -> DensityMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let m = &g * g.adjoint() + linalg::identity(n) * re(1e-3);
    let tr = m.trace();
    DensityMatrix::new(m / tr).expect("Gram matrix is a state")
}

/// Random populations `p_th + δ` with `|δ| ≲ ε`-scale deviations obeying
/// `p00 + p11 = p01 + p10`, diagonal and therefore free of coherences.
pub fn random_compliant_populations(rng: &mut impl Rng, eps: f64) -> PopulationVector {
    let th = closed_form::thermal_populations(eps);
    let scale = eps.abs().max(1e-3);
    // p00 + p11 = p01 + p10 and unit trace
    let (a, b) = (rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
    let d = [a, b, -b, -a];
    PopulationVector::new(th.iter().zip(&d).map(|(a, b)| a + b).collect()).expect("small deviation keeps populations valid")
}

fn worst<I: IntoIterator<Item = Result<f64>>>(it: I) -> Result<f64> {
    it.into_iter().try_fold(0.0_f64, |m, x| Ok(m.max(x?)))
}

/// Run the full battery.
pub fn validate_suite(opts: &SuiteOptions) -> Vec<Check> {
    let (p, bp) = suite_params(opts.epsilon);
    let lopts = LiouvillianOptions { coupling: opts.coupling, fault: opts.fault, ..Default::default() };
    let l = match relaxation::build_liouvillian(&p, &bp, &lopts) {
        Ok(l) => l,
        Err(e) => return vec![failed("build_liouvillian", e)],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let eps = p.epsilon;
    let scale = linalg::max_abs(l.matrix()).max(1.0);
    let ctx = Ctx { l: &l, p: &p, eps, trials: opts.trials };

    let mut out = Vec::new();
    let mut push = |name: &'static str, r: Result<Check>| out.push(r.unwrap_or_else(|e| failed(name, e)));

    push("block_structure", spectral::off_block_norm(&l).map(|v| bounded("block_structure", v, 1e-12)));
    push("trace_preservation", Ok(bounded("trace_preservation", trace_defect(&l), 1e-12 * scale)));
    push("hermiticity_preservation", hermiticity(&ctx, &mut rng, scale));
    push("thermal_fixed_point", thermal_fixed_point(&ctx));
    push("detailed_balance", detailed_balance(&ctx));
    push("population_spectrum", population_spectrum(&ctx));
    // flip-flop J couples p01 − p10 to the zero-quantum coherence at O(J/Δ)
    let ising = opts.coupling == Coupling::Ising;
    let ising_only = |name| skipped(name, "ising coupling only");
    if ising {
        push("closed_form_generators", closed_form_generators(&ctx));
    } else {
        push("closed_form_generators", Ok(ising_only("closed_form_generators")));
    }
    push("strong_certificate", strong_certificate(&ctx));
    push("semigroup", semigroup(&ctx, &mut rng));
    push("positivity", positivity(&ctx, &mut rng));
    if ising {
        push("mode_equivalence", mode_equivalence(&ctx, &mut rng));
    } else {
        push("mode_equivalence", Ok(ising_only("mode_equivalence")));
    }
    push("pfg_idempotence", pfg_idempotence(&ctx, &mut rng));
    push("trace_distance_monotone", monotone(&ctx, &mut rng, Metric::TraceDistance));
    push("relative_entropy_monotone", monotone(&ctx, &mut rng, Metric::RelativeEntropy));
    if ising {
        push("coherence_suppression", coherence_suppression(&ctx, &mut rng));
    } else {
        push("coherence_suppression", Ok(ising_only("coherence_suppression")));
    }
    push("two_qubit_decomposition", two_qubit(&ctx));
    out
}

struct Ctx<'a> {
    l: &'a Superoperator,
    p: &'a SystemParams,
    eps: f64,
    trials: usize,
}

/// `max_j |Σ_k L[kk, j]|`: the adjoint must annihilate the identity.
pub fn trace_defect(l: &Superoperator) -> f64 {
    let id = linalg::identity(l.operator_dim().unwrap_or(1));
    linalg::max_abs(&l.apply_adjoint(&id))
}

fn hermiticity(ctx: &Ctx, rng: &mut ChaCha8Rng, scale: f64) -> Result<Check> {
    let w = worst((0..ctx.trials).map(|_| {
        let x = random_state(rng, 4);
        let y = ctx.l.apply(x.matrix());
        Ok(linalg::max_abs(&(&y - y.adjoint())))
    }))?;
    Ok(bounded("hermiticity_preservation", w, 1e-12 * scale))
}

fn thermal_fixed_point(ctx: &Ctx) -> Result<Check> {
    let ss = spectral::stationary_state(ctx.l)?;
    let d = metrics::trace_distance(&ss, &relaxation::thermal_state(ctx.p))?;
    Ok(bounded("thermal_fixed_point", d, (10.0 * ctx.eps * ctx.eps).max(1e-10)))
}

fn detailed_balance(ctx: &Ctx) -> Result<Check> {
    let lp = spectral::population_generator(ctx.l)?;
    let m = lp.matrix();
    let (sq_up, sq_dn) = closed_form::single_quantum_rates(1.0, ctx.eps);
    let (dq_up, dq_dn) = closed_form::double_quantum_rates(1.0, ctx.eps);
    // (target, source, expected)
    let table = [
        (1, 0, sq_up),
        (2, 0, sq_up),
        (3, 1, sq_up),
        (3, 2, sq_up),
        (0, 1, sq_dn),
        (0, 2, sq_dn),
        (1, 3, sq_dn),
        (2, 3, sq_dn),
        (3, 0, dq_up),
        (0, 3, dq_dn),
    ];
    let w = table.iter().fold(0.0_f64, |acc, &(i, j, r)| acc.max((m[(i, j)].re - r).abs()));
    Ok(bounded("detailed_balance", w, (10.0 * ctx.eps * ctx.eps).max(1e-12)))
}

fn population_spectrum(ctx: &Ctx) -> Result<Check> {
    let md = spectral::eigendecompose(&spectral::population_generator(ctx.l)?)?;
    let expected = [0.0, -5.0 / 24.0, -0.25, -5.0 / 8.0];
    let w = md.eigenvalues().iter().zip(expected).fold(0.0_f64, |acc, (z, e)| acc.max((z - re(e)).norm()));
    let bound = if ctx.eps == 0.0 { 1e-12 } else { 1e-6 };
    Ok(bounded("population_spectrum", w, bound))
}

fn closed_form_generators(ctx: &Ctx) -> Result<Check> {
    let lp = spectral::population_generator(ctx.l)?;
    let expected = closed_form::population_generator(1.0, ctx.eps);
    let mut w = lp.matrix().iter().zip(expected.iter()).fold(0.0_f64, |acc, (a, b)| acc.max((a - re(*b)).norm()));
    let l0 = spectral::zero_quantum_block(ctx.l)?;
    let expected0 = closed_form::zero_quantum_generator(1.0, ctx.eps, ctx.p.delta_offset);
    w = w.max(linalg::max_abs_diff(l0.matrix(), &expected0));
    Ok(bounded("closed_form_generators", w, (10.0 * ctx.eps * ctx.eps).max(1e-12)))
}

fn strong_certificate(ctx: &Ctx) -> Result<Check> {
    let md = spectral::eigendecompose(&spectral::population_generator(ctx.l)?)?;
    let slow = md.slowest_decay_index().unwrap_or(1);
    let a = spectral::overlaps(&md, &dynamics::far_state(ctx.p).populations())?;
    Ok(bounded("strong_certificate", a[slow].norm(), 1e-12))
}

fn semigroup(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<Check> {
    let w = worst((0..ctx.trials).map(|_| {
        let rho = random_state(rng, 4);
        let t1 = rng.gen_range(0.0..10.0);
        let t2 = rng.gen_range(0.0..10.0);
        let direct = dynamics::propagate(ctx.l, &rho, &[t1 + t2])?;
        let mid = dynamics::propagate(ctx.l, &rho, &[t1])?;
        let two = dynamics::propagate(ctx.l, mid.last().expect("one snapshot"), &[t2])?;
        Ok(linalg::max_abs_diff(direct.states()[0].matrix(), two.states()[0].matrix()))
    }))?;
    Ok(bounded("semigroup", w, 1e-10))
}

fn log_grid() -> Vec<f64> {
    dynamics::time_grid(1e-3, 20.0, 40, dynamics::Spacing::Logarithmic).expect("valid grid")
}

fn positivity(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<Check> {
    let grid = log_grid();
    let mut lowest = f64::INFINITY;
    for _ in 0..ctx.trials {
        let traj = dynamics::propagate(ctx.l, &random_state(rng, 4), &grid)?;
        for s in traj.states() {
            lowest = lowest.min(s.min_eigenvalue());
        }
    }
    Ok(Check {
        name: "positivity",
        passed: lowest >= -1e-12,
        skipped: false,
        detail: format!("min eigenvalue {lowest:.3e} >= -1e-12"),
    })
}

fn mode_equivalence(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<Check> {
    let lp = spectral::population_generator(ctx.l)?;
    let md = spectral::eigendecompose(&lp)?;
    let grid = log_grid();
    let w = worst((0..ctx.trials).map(|_| {
        let p0 = random_compliant_populations(rng, ctx.eps);
        let by_modes = dynamics::propagate_by_modes(&md, &p0, &grid)?;
        let full = dynamics::propagate(ctx.l, &DensityMatrix::from_populations(&p0), &grid)?;
        let mut m = 0.0_f64;
        for (a, b) in by_modes.populations().iter().zip(full.populations()) {
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                m = m.max((x - y).abs());
            }
        }
        Ok(m)
    }))?;
    Ok(bounded("mode_equivalence", w, 1e-9))
}

fn pfg_idempotence(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut ok = true;
    for k in 0..ctx.trials {
        let rho = random_state(rng, 4);
        let zero_zq = k % 2 == 0;
        let once = dynamics::pfg_dephase(&rho, zero_zq);
        ok &= dynamics::pfg_dephase(&once, zero_zq) == once;
    }
    Ok(Check { name: "pfg_idempotence", passed: ok, skipped: false, detail: "exact equality".into() })
}

fn monotone(ctx: &Ctx, rng: &mut ChaCha8Rng, metric: Metric) -> Result<Check> {
    let name = match metric {
        Metric::TraceDistance => "trace_distance_monotone",
        Metric::RelativeEntropy => "relative_entropy_monotone",
    };
    let reference = relaxation::thermal_state(ctx.p);
    let grid = log_grid();
    let mut rise = 0.0_f64;
    for k in 0..ctx.trials {
        // alternate generic states with ε-scale ones
        let rho = if k % 2 == 0 {
            random_state(rng, 4)
        } else {
            DensityMatrix::from_populations(&random_compliant_populations(rng, ctx.eps))
        };
        let traj = dynamics::propagate(ctx.l, &rho, &grid)?;
        let series = metrics::metric_series(&traj, metric, &reference)?;
        for w in series.windows(2) {
            rise = rise.max(w[1] - w[0]);
        }
    }
    Ok(bounded(name, rise, 1e-10))
}

fn coherence_suppression(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<Check> {
    let g = spectral::zero_quantum_block(ctx.l)?;
    let grid = dynamics::time_grid(1e-3, 20.0, 200, dynamics::Spacing::Linear)?;
    let w = worst((0..ctx.trials).map(|_| {
        let p0 = random_compliant_populations(rng, ctx.eps);
        let mut x0 = crate::linalg::CVector::zeros(6);
        for (k, v) in p0.as_slice().iter().enumerate() {
            x0[k] = re(*v);
        }
        let xs = dynamics::propagate_vector(&g, &x0, &grid)?;
        Ok(xs.iter().fold(0.0_f64, |m, x| m.max(x[4].norm())))
    }))?;
    let bound = if ctx.eps == 0.0 { 1e-12 } else { 10.0 * ctx.eps.abs() / ctx.p.delta_offset.abs() };
    Ok(bounded("coherence_suppression", w, bound))
}

/// With `p01 = p10 = 1/4` the inner levels stay frozen and `(p00, p11)`
/// follows the affine two-level model fed by the double-quantum rates and by
/// single-quantum exchange with the frozen inner pair.
fn two_qubit(ctx: &Ctx) -> Result<Check> {
    let e = ctx.eps;
    // inner levels drift at O(ε·d); keep d on the thermal scale
    let d = if e == 0.0 { 3e-4 } else { 0.3 * e.abs() };
    let p0 = PopulationVector::new(vec![0.25 + e / 2.0 + d, 0.25, 0.25, 0.25 - e / 2.0 - d])?;
    let grid = log_grid();
    let full = dynamics::propagate(ctx.l, &DensityMatrix::from_populations(&p0), &grid)?;
    let (s_up, s_dn) = closed_form::single_quantum_rates(1.0, e);
    let (d_up, d_dn) = closed_form::double_quantum_rates(1.0, e);
    // (p00, p11, 1)
    #[rustfmt::skip]
    let g = CMatrix::from_row_slice(3, 3, &[
        re(-2.0 * s_up - d_up), re(d_dn), re(s_dn / 2.0),
        re(d_up), re(-2.0 * s_dn - d_dn), re(s_up / 2.0),
        re(0.0), re(0.0), re(0.0),
    ]);
    let x0 = crate::linalg::CVector::from_vec(vec![re(p0.as_slice()[0]), re(p0.as_slice()[3]), re(1.0)]);
    let xs = dynamics::propagate_vector(&Superoperator::from_matrix(g)?, &x0, &grid)?;
    let mut w = 0.0_f64;
    for (p, x) in full.populations().iter().zip(&xs) {
        let s = p.as_slice();
        w = w.max((s[0] - x[0].re).abs()).max((s[3] - x[1].re).abs());
        w = w.max((s[1] - 0.25).abs()).max((s[2] - 0.25).abs());
    }
    Ok(bounded("two_qubit_decomposition", w, 1e-10))
}
