//! Distances to equilibrium, crossing detection and Mpemba classification.

use std::fmt;
use std::str::FromStr;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::linalg::{self, re, CMatrix, C64};
use crate::spectral::{self, ModeDecomposition};
use crate::state::{DensityMatrix, PopulationVector, STATE_TOL};

/// Eigenvalues below this are clipped before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-300;
/// Relative time resolution of crossing bisection.
pub const CROSSING_RTOL: f64 = 1e-9;
/// `|a1| ≤ STRONG_TOL·‖p(0)‖` counts as zero overlap.
pub const STRONG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    TraceDistance,
    RelativeEntropy,
}

impl Metric {
    /// Evaluate `metric(ρ, σ)`.
    pub fn evaluate(self, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
        match self {
            Metric::TraceDistance => trace_distance(rho, sigma),
            Metric::RelativeEntropy => relative_entropy(rho, sigma),
        }
    }

    /// Display factor `1/(2ε)` or `1/(2ε)²`.
    pub fn rescale_factor(self, eps: f64) -> f64 {
        if eps == 0.0 {
            return 1.0;
        }
        let s = 1.0 / (2.0 * eps.abs());
        match self {
            Metric::TraceDistance => s,
            Metric::RelativeEntropy => s * s,
        }
    }

    /// Short column prefix, `D` or `d`.
    pub fn symbol(self) -> &'static str {
        match self {
            Metric::TraceDistance => "D",
            Metric::RelativeEntropy => "d",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::TraceDistance => "trace_distance",
            Metric::RelativeEntropy => "relative_entropy",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trace_distance" => Ok(Metric::TraceDistance),
            "relative_entropy" => Ok(Metric::RelativeEntropy),
            other => Err(Error::Config(format!("unknown metric '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    None,
    Weak,
    Strong,
    Genuine,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::None => "none",
            Classification::Weak => "weak",
            Classification::Strong => "strong",
            Classification::Genuine => "genuine",
        })
    }
}

/// A sign change of `metric_far − metric_near` between two grid points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub time: f64,
    pub bracket: (f64, f64),
}

/// Slowest-mode overlaps `a1` of the two competing states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowOverlaps {
    pub far: C64,
    pub near: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpembaReport {
    pub metric: Metric,
    /// First crossing, present only if the far curve starts above and stays
    /// below after it on the whole grid.
    pub crossing_time: Option<f64>,
    pub crossings: Vec<Crossing>,
    /// `metric_far(0) − metric_near(0)`.
    pub initial_gap: f64,
    pub slow_overlaps: Option<SlowOverlaps>,
    pub classification: Classification,
}

fn check_dims(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Usage(format!("states of dimension {} and {} cannot be compared", a.dim(), b.dim())));
    }
    Ok(())
}

/// `‖ρ − σ‖₁ / 2` from the eigenvalues of the Hermitian difference.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    let diff = rho.matrix() - sigma.matrix();
    let herm = (&diff + diff.adjoint()) * re(0.5);
    Ok(0.5 * linalg::hermitian_eigenvalues(&herm).iter().map(|x| x.abs()).sum::<f64>())
}

/// `ρ − 𝟙/n` with the rounding-level trace removed; a trace defect would
/// otherwise enter the relative entropy at first order.
fn traceless_deviation(rho: &DensityMatrix) -> CMatrix {
    let d = rho.deviation();
    let n = rho.dim();
    let shift = d.trace().re / n as f64;
    let d = (&d + d.adjoint()) * re(0.5);
    d - linalg::identity(n) * re(shift)
}

/// Spectral data of `ρ = 𝟙/n + Δ`: eigenvalues of `Δ` and eigenvectors.
struct Shifted {
    dev: Vec<f64>,
    vecs: CMatrix,
    n: f64,
}

impl Shifted {
    fn new(rho: &DensityMatrix) -> Self {
        let (dev, vecs) = linalg::hermitian_eigen(&traceless_deviation(rho));
        Self { dev, vecs, n: rho.dim() as f64 }
    }

    fn eigenvalue(&self, k: usize) -> f64 {
        1.0 / self.n + self.dev[k]
    }

    /// `log(n λ_k)` computed as `log1p(n Δ_k)`, with λ clipped at the floor.
    fn log_scaled(&self, k: usize, what: &str) -> f64 {
        let lam = self.eigenvalue(k);
        if lam <= LOG_FLOOR {
            log::warn!("{what} eigenvalue {lam:.3e} clipped to {LOG_FLOOR:e} before the logarithm");
            (self.n * LOG_FLOOR).ln()
        } else {
            (self.n * self.dev[k]).ln_1p()
        }
    }
}

/// `tr ρ(log ρ − log σ) ≥ 0`.
///
/// Both logarithms are shifted by `log(1/n)`, which cancels, and evaluated
/// as `log1p(n Δ)` so that values of order `‖Δ‖²` keep their relative
/// precision.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    let r = Shifted::new(rho);
    let s = Shifted::new(sigma);
    let dim = rho.dim();

    // tr ρ log(nρ)
    let mut self_term = 0.0;
    for k in 0..dim {
        let lam = r.eigenvalue(k);
        if lam > LOG_FLOOR {
            self_term += lam * (r.n * r.dev[k]).ln_1p();
        }
    }

    // tr ρ log(nσ) = Σ_j ⟨s_j|ρ|s_j⟩ log(n μ_j)
    let mut cross_term = 0.0;
    let rho_dev = traceless_deviation(rho);
    for j in 0..dim {
        let v = s.vecs.column(j);
        let weight_dev = (v.adjoint() * &rho_dev * v)[(0, 0)].re;
        let weight = 1.0 / s.n + weight_dev;
        if s.eigenvalue(j) <= LOG_FLOOR && weight > STATE_TOL {
            return Err(Error::Domain(format!(
                "reference state is singular on the support of the first argument (weight {weight:.3e})"
            )));
        }
        let log_mu = s.log_scaled(j, "reference state");
        // split 1/n part from the deviation part for accuracy
        cross_term += log_mu / s.n + weight_dev * log_mu;
    }
    let d = self_term - cross_term;
    if !d.is_finite() {
        return Err(Error::Numerical("relative entropy is not finite".into()));
    }
    Ok(d.max(0.0))
}

/// `metric(state(t), ρ_ref)` along a trajectory.
pub fn metric_series(traj: &Trajectory, metric: Metric, reference: &DensityMatrix) -> Result<Vec<f64>> {
    traj.states().iter().map(|s| metric.evaluate(s, reference)).collect()
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::Usage("interpolation needs at least two matched points".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Usage("interpolation nodes must be strictly increasing".into()));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut slopes = vec![0.0; n];
        for k in 1..n - 1 {
            if delta[k - 1] * delta[k] > 0.0 {
                // weighted harmonic mean for nonuniform spacing
                let w1 = 2.0 * h[k] + h[k - 1];
                let w2 = h[k] + 2.0 * h[k - 1];
                slopes[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
            }
        }
        slopes[0] = end_slope(h[0], h.get(1).copied(), delta[0], delta.get(1).copied());
        slopes[n - 1] = end_slope(h[n - 2], (n > 2).then(|| h[n - 3]), delta[n - 2], (n > 2).then(|| delta[n - 3]));
        Ok(Self { x: x.to_vec(), y: y.to_vec(), slopes })
    }

    /// Value at `t`, clamped to the node range.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let t = t.clamp(self.x[0], self.x[n - 1]);
        let k = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            p => (p - 1).min(n - 2),
        };
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[k] + h10 * h * self.slopes[k] + h01 * self.y[k + 1] + h11 * h * self.slopes[k + 1]
    }
}

/// Three-point end slope, limited to keep the interpolant monotone.
fn end_slope(h0: f64, h1: Option<f64>, d0: f64, d1: Option<f64>) -> f64 {
    let (Some(h1), Some(d1)) = (h1, d1) else {
        return d0;
    };
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

/// Root of `f` in `[a, b]` given `f(a)`, `f(b)` of opposite sign.
pub fn bisect<F>(mut f: F, mut a: f64, mut b: f64, rtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut fa = f(a)?;
    let fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Numerical(format!("no sign change on [{a}, {b}]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a) <= rtol * mid.abs().max(f64::MIN_POSITIVE) {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Crossings of `gap = far − near` sampled on `times`.
pub fn find_crossings(times: &[f64], gap: &[f64]) -> Result<Vec<Crossing>> {
    let interp = MonotoneCubic::new(times, gap)?;
    let mut out = Vec::new();
    let mut last_sign = 0.0;
    let mut last_index = 0usize;
    for (k, &g) in gap.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        let sign = g.signum();
        if last_sign != 0.0 && sign != last_sign {
            let (a, b) = (times[last_index], times[k]);
            let t = bisect(|t| Ok(interp.eval(t)), a, b, CROSSING_RTOL)?;
            out.push(Crossing { time: t, bracket: (a, b) });
        }
        last_sign = sign;
        last_index = k;
    }
    Ok(out)
}

fn canonical_crossing(gap: &[f64], times: &[f64], crossings: &[Crossing]) -> Option<f64> {
    let first = crossings.first()?;
    if gap.first().copied().unwrap_or(0.0) <= 0.0 {
        return None;
    }
    let after_ok = times.iter().zip(gap).filter(|(t, _)| **t > first.time).all(|(_, g)| *g < 0.0);
    after_ok.then_some(first.time)
}

/// Compare the far and near trajectories under `metric` against `reference`.
pub fn detect_crossing(
    traj_far: &Trajectory,
    traj_near: &Trajectory,
    metric: Metric,
    reference: &DensityMatrix,
) -> Result<MpembaReport> {
    if traj_far.times() != traj_near.times() {
        return Err(Error::Usage("far and near trajectories use different time grids".into()));
    }
    if traj_far.is_empty() {
        return Err(Error::Usage("empty trajectories".into()));
    }
    let far = metric_series(traj_far, metric, reference)?;
    let near = metric_series(traj_near, metric, reference)?;
    let gap: Vec<f64> = far.iter().zip(&near).map(|(a, b)| a - b).collect();
    let times = traj_far.times();
    let crossings = if times.len() >= 2 { find_crossings(times, &gap)? } else { Vec::new() };
    let crossing_time = canonical_crossing(&gap, times, &crossings);
    Ok(MpembaReport {
        metric,
        crossing_time,
        crossings,
        initial_gap: gap[0],
        slow_overlaps: None,
        classification: Classification::None,
    })
}

/// Re-locate every crossing by bisection on an exact gap function instead
/// of the interpolant, inside the bracket found on the grid.
pub fn refine_crossings<F>(report: &mut MpembaReport, mut gap: F) -> Result<()>
where
    F: FnMut(f64) -> Result<f64>,
{
    for c in &mut report.crossings {
        c.time = bisect(&mut gap, c.bracket.0, c.bracket.1, CROSSING_RTOL)?;
    }
    if report.crossing_time.is_some() {
        report.crossing_time = report.crossings.first().map(|c| c.time);
    }
    Ok(())
}

/// Fill in slowest-mode overlaps and upgrade the classification.
pub fn classify(
    md: &ModeDecomposition,
    p_far: &PopulationVector,
    p_near: &PopulationVector,
    report: MpembaReport,
) -> Result<MpembaReport> {
    let slow = md.slowest_decay_index().ok_or_else(|| Error::Usage("decomposition has no decaying mode".into()))?;
    let a_far = spectral::overlaps(md, p_far)?[slow];
    let a_near = spectral::overlaps(md, p_near)?[slow];
    let far_zero = a_far.norm() <= STRONG_TOL * p_far.norm();
    let near_zero = a_near.norm() <= STRONG_TOL * p_near.norm();

    let classification = match (report.crossing_time, report.metric) {
        (None, _) => Classification::None,
        (Some(_), Metric::RelativeEntropy) => Classification::Genuine,
        (Some(_), Metric::TraceDistance) if far_zero && !near_zero => Classification::Strong,
        (Some(_), Metric::TraceDistance) if !far_zero => Classification::Weak,
        // both states avoid the slowest mode: no exponential advantage to claim
        (Some(_), Metric::TraceDistance) => Classification::Weak,
    };
    Ok(MpembaReport { slow_overlaps: Some(SlowOverlaps { far: a_far, near: a_near }), classification, ..report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_algebra::{self as sa, Axis, Spin};

    fn diag(p: [f64; 4]) -> DensityMatrix {
        DensityMatrix::from_populations(&PopulationVector::new(p.to_vec()).unwrap())
    }

    #[test]
    fn trace_distance_examples() {
        let eps = 1e-5;
        let th = diag([0.25 + eps / 2.0, 0.25, 0.25, 0.25 - eps / 2.0]);
        let far = diag([0.25 - eps / 2.0, 0.25, 0.25, 0.25 + eps / 2.0]);
        assert_eq!(trace_distance(&th, &th).unwrap(), 0.0);
        assert!((trace_distance(&far, &th).unwrap() - eps).abs() < 1e-15);
        let a = diag([1.0, 0.0, 0.0, 0.0]);
        let b = diag([0.0, 1.0, 0.0, 0.0]);
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn relative_entropy_examples() {
        let rho = diag([0.4, 0.3, 0.2, 0.1]);
        assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-16);
        let sigma = DensityMatrix::maximally_mixed(4);
        let oracle: f64 = [0.4_f64, 0.3, 0.2, 0.1].iter().map(|p| p * (p / 0.25).ln()).sum();
        assert!((relative_entropy(&rho, &sigma).unwrap() - oracle).abs() < 1e-15);
        // second-order expansion Σ δp²/(2p) for a tiny deviation
        let eps = 1e-6;
        let near = diag([0.25 + eps, 0.25 - eps, 0.25, 0.25]);
        let approx = 2.0 * eps * eps / (2.0 * 0.25);
        let d = relative_entropy(&near, &sigma).unwrap();
        assert!((d - approx).abs() < 1e-6 * approx, "{d:e} vs {approx:e}");
    }

    #[test]
    fn relative_entropy_support_errors() {
        let pure = diag([1.0, 0.0, 0.0, 0.0]);
        let other = diag([0.0, 0.5, 0.5, 0.0]);
        assert!(matches!(relative_entropy(&other, &pure), Err(Error::Domain(_))));
        // zero eigenvalues of ρ are fine
        let d = relative_entropy(&pure, &DensityMatrix::maximally_mixed(4)).unwrap();
        assert!((d - 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn relative_entropy_off_diagonal() {
        let x = sa::spin_operator(Spin::First, Axis::X);
        let rho = DensityMatrix::new(linalg::identity(4) * re(0.25) + x * re(0.2)).unwrap();
        let sigma = diag([0.3, 0.2, 0.3, 0.2]);
        // brute force with naive logarithms
        let (rv, rvec) = linalg::hermitian_eigen(rho.matrix());
        let (sv, svec) = linalg::hermitian_eigen(sigma.matrix());
        let log_of = |vals: &[f64], vecs: &CMatrix| {
            let d = CMatrix::from_diagonal(&crate::linalg::CVector::from_iterator(4, vals.iter().map(|v| re(v.ln()))));
            vecs * d * vecs.adjoint()
        };
        let oracle = (rho.matrix() * (log_of(&rv, &rvec) - log_of(&sv, &svec))).trace().re;
        assert!((relative_entropy(&rho, &sigma).unwrap() - oracle).abs() < 1e-13);
    }

    #[test]
    fn interpolant_hits_nodes_and_stays_monotone() {
        let x: Vec<f64> = (0..20).map(|k| (k as f64 * 0.3).powf(1.3)).collect();
        let y: Vec<f64> = x.iter().map(|t| (-t).exp()).collect();
        let m = MonotoneCubic::new(&x, &y).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((m.eval(*a) - b).abs() < 1e-15);
        }
        let mut prev = f64::INFINITY;
        for k in 0..2000 {
            let t = x[19] * k as f64 / 1999.0;
            let v = m.eval(t);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect(|t| Ok(t * t - 2.0), 0.0, 3.0, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
        assert!(bisect(|t| Ok(t * t + 1.0), 0.0, 1.0, 1e-9).is_err());
    }

    #[test]
    fn crossing_of_two_exponentials() {
        let times: Vec<f64> = (0..=400).map(|k| k as f64 * 0.05).collect();
        let gap: Vec<f64> = times.iter().map(|t| (-t).exp() - 0.5 * (-0.2 * t).exp()).collect();
        let c = find_crossings(&times, &gap).unwrap();
        assert_eq!(c.len(), 1);
        let exact = 2f64.ln() / 0.8;
        assert!((c[0].time - exact).abs() < 1e-5);
        assert_eq!(canonical_crossing(&gap, &times, &c), Some(c[0].time));
        let flat = vec![1.0; times.len()];
        assert!(find_crossings(&times, &flat).unwrap().is_empty());
    }

    #[test]
    fn recrossing_has_no_canonical_time() {
        let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();
        let gap: Vec<f64> = times.iter().map(|t| (t - 3.0) * (t - 6.0)).collect();
        let c = find_crossings(&times, &gap).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(canonical_crossing(&gap, &times, &c), None);
    }

    #[test]
    fn metric_parsing() {
        for m in [Metric::TraceDistance, Metric::RelativeEntropy] {
            assert_eq!(m.to_string().parse::<Metric>().unwrap(), m);
        }
        assert!("fidelity".parse::<Metric>().is_err());
        assert_eq!(Metric::RelativeEntropy.rescale_factor(0.5), 1.0);
    }
}
