//! State preparation, gradient dephasing and time propagation.

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::linalg::{self, re, CMatrix, CVector, C64};
use crate::relaxation::{self, Coupling, Frame, Superoperator, SystemParams};
use crate::spectral::ModeDecomposition;
use crate::spin_algebra::{self as sa, Axis, PulseAxis, PulseTarget, Spin};
use crate::state::{DensityMatrix, PopulationVector};

/// Options for the (θ)_y – delay – (θ)_{−x} preparation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PreparationOptions {
    /// Evolve the delay under the full Hamiltonian including `J`.
    pub include_j_during_delay: bool,
    pub coupling: Coupling,
}

/// Deviation operator `2(ρ − 𝟙/4)/ε`.
pub fn deviation_operator(rho: &CMatrix, eps: f64) -> CMatrix {
    (rho - linalg::identity(rho.nrows()) * re(0.25)) * re(2.0 / eps)
}

/// Delay that rotates the two offsets ±Δ/2 by ∓π/2: `π/|Δ|` seconds
/// (half a period of the offset difference Δ/2π in Hz).
pub fn preparation_delay(p: &SystemParams) -> Result<f64> {
    if p.delta_offset == 0.0 {
        return Err(Error::Domain("state preparation needs a nonzero resonance offset".into()));
    }
    Ok(PI / p.delta_offset.abs())
}

/// Thermal state after each preparation step: the (θ)_y pulse, the free
/// delay, and the (θ)_{−x} pulse.
pub fn preparation_stages(theta: f64, p: &SystemParams, opts: &PreparationOptions) -> Result<[CMatrix; 3]> {
    let rho_th = relaxation::thermal_state(p);
    let pulse_y = sa::rotation_pulse(theta, PulseAxis::Y, PulseTarget::Both);
    let after_pulse = sa::conjugate(&pulse_y, rho_th.matrix());

    let delay = preparation_delay(p)?;
    let free = if opts.include_j_during_delay {
        relaxation::hamiltonian(p, Frame::Interaction, opts.coupling)
    } else {
        let no_j = SystemParams { j_coupling_hz: 0.0, ..*p };
        relaxation::hamiltonian(&no_j, Frame::Interaction, Coupling::Ising)
    };
    let u_free = linalg::expm(&(free * re(-delay) * linalg::I))?;
    let after_delay = sa::conjugate(&u_free, &after_pulse);

    let pulse_mx = sa::rotation_pulse(theta, PulseAxis::MinusX, PulseTarget::Both);
    let after_second = sa::conjugate(&pulse_mx, &after_delay);
    Ok([after_pulse, after_delay, after_second])
}

/// ρ(θ) prepared from the thermal state by the pulse sequence.
pub fn prepare_theta_state(theta: f64, p: &SystemParams) -> Result<DensityMatrix> {
    prepare_theta_state_with(theta, p, &PreparationOptions::default())
}

pub fn prepare_theta_state_with(theta: f64, p: &SystemParams, opts: &PreparationOptions) -> Result<DensityMatrix> {
    if !(theta > 0.0 && theta < PI / 2.0) {
        return Err(Error::Domain(format!("θ = {theta} rad outside (0, π/2)")));
    }
    let [_, _, rho] = preparation_stages(theta, p, opts)?;
    DensityMatrix::new(rho)
}

/// Instantaneous gradient dephasing: removes every coherence of order ±1, ±2
/// and optionally the zero-quantum pair `|01⟩⟨10|`, `|10⟩⟨01|`.
pub fn pfg_dephase(rho: &DensityMatrix, zero_zq_coherences: bool) -> DensityMatrix {
    let m = rho.matrix();
    let out = CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
        let keep = sa::coherence_order(r, c) == 0 && (!zero_zq_coherences || r == c);
        if keep {
            m[(r, c)]
        } else {
            linalg::ZERO
        }
    });
    DensityMatrix::from_matrix_unchecked(out)
}

/// Dephased near state ρⁿ(θ).
pub fn near_state(theta: f64, p: &SystemParams) -> Result<DensityMatrix> {
    Ok(pfg_dephase(&prepare_theta_state(theta, p)?, false))
}

/// `𝟙/4 − ε(I1z + I2z)/2`.
pub fn far_state(p: &SystemParams) -> DensityMatrix {
    let m = linalg::identity(4) * re(0.25) - sa::total_z() * re(p.epsilon / 2.0);
    DensityMatrix::from_matrix_unchecked(m)
}

/// `𝟙/4 + ε(I1z − I2z)/2`.
pub fn near_state_genuine(p: &SystemParams) -> DensityMatrix {
    let dz = sa::spin_operator(Spin::First, Axis::Z) - sa::spin_operator(Spin::Second, Axis::Z);
    let m = linalg::identity(4) * re(0.25) + dz * re(p.epsilon / 2.0);
    DensityMatrix::from_matrix_unchecked(m)
}

/// Provenance attached to a trajectory.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryMetadata {
    pub generator_fingerprint: u64,
    pub parameters: String,
}

/// Snapshots of a state on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<DensityMatrix>,
    pub metadata: TrajectoryMetadata,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        check_grid(&times)?;
        if times.len() != states.len() {
            return Err(Error::Usage("times and states differ in length".into()));
        }
        Ok(Self { times, states, metadata: TrajectoryMetadata::default() })
    }

    pub fn with_parameters(mut self, parameters: impl Into<String>) -> Self {
        self.metadata.parameters = parameters.into();
        self
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&DensityMatrix> {
        self.states.last()
    }

    pub fn populations(&self) -> Vec<PopulationVector> {
        self.states.iter().map(DensityMatrix::populations).collect()
    }
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::Usage("times must be finite and nonnegative".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Usage("times must be strictly increasing".into()));
    }
    Ok(())
}

/// Hash of the generator entries.
pub fn fingerprint(l: &Superoperator) -> u64 {
    let mut h = DefaultHasher::new();
    l.dim().hash(&mut h);
    for z in l.matrix().iter() {
        z.re.to_bits().hash(&mut h);
        z.im.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Largest `‖V‖·‖V⁻¹‖` (Frobenius) accepted for the spectral route.
pub const PROPAGATOR_COND_LIMIT: f64 = 1e6;

#[derive(Debug, Clone)]
enum Route {
    /// `V e^{Λt} V⁻¹` with the zero mode snapped to exactly zero.
    Spectral { values: Vec<C64>, v: CMatrix, w: CMatrix },
    /// Padé scaling and squaring at every time.
    Pade { g: CMatrix },
}

/// `exp(G t)` for a fixed generator and many `t`.
///
/// Generators of precessing spins carry frequencies far above their decay
/// rates; scaling and squaring then loses about `log2(‖G t‖)` bits in every
/// entry, while the eigen route confines rounding to the mode amplitudes.
/// The spectral route is used whenever the eigenvector basis is well
/// conditioned and reproduces `G`.
#[derive(Debug, Clone)]
pub struct Propagator {
    route: Route,
    dim: usize,
}

impl Propagator {
    pub fn new(g: &Superoperator) -> Result<Self> {
        let m = g.matrix();
        let dim = m.nrows();
        if !linalg::is_finite(m) {
            return Err(Error::Numerical("generator has non-finite entries".into()));
        }
        match Self::spectral(m) {
            Some(route) => Ok(Self { route, dim }),
            None => {
                log::debug!("ill-conditioned eigenbasis; propagating by scaling and squaring");
                Ok(Self { route: Route::Pade { g: m.clone() }, dim })
            }
        }
    }

    /// Padé route regardless of conditioning.
    pub fn pade(g: &Superoperator) -> Self {
        Self { route: Route::Pade { g: g.matrix().clone() }, dim: g.dim() }
    }

    fn spectral(m: &CMatrix) -> Option<Route> {
        let scale = linalg::max_abs(m).max(f64::MIN_POSITIVE);
        let (mut values, v) = linalg::general_eigen(m).ok()?;
        let w = v.clone().try_inverse()?;
        let cond = v.norm() * w.norm();
        if !(cond.is_finite() && cond <= PROPAGATOR_COND_LIMIT) {
            return None;
        }
        for z in &mut values {
            if z.norm() <= crate::spectral::STATIONARY_TOL * scale {
                *z = linalg::ZERO;
            }
        }
        let lam = CMatrix::from_diagonal(&CVector::from_vec(values.clone()));
        let residual = linalg::max_abs_diff(&(&v * lam * &w), m);
        if residual > 1e-12 * scale * cond {
            return None;
        }
        Some(Route::Spectral { values, v, w })
    }

    pub fn is_spectral(&self) -> bool {
        matches!(self.route, Route::Spectral { .. })
    }

    /// `exp(G t)`.
    pub fn matrix_at(&self, t: f64) -> Result<CMatrix> {
        match &self.route {
            Route::Spectral { values, v, w } => {
                let e = CVector::from_iterator(self.dim, values.iter().map(|z| (z * t).exp()));
                Ok(v * CMatrix::from_diagonal(&e) * w)
            }
            Route::Pade { g } => linalg::expm(&(g * re(t))),
        }
    }

    /// `exp(G t) x0`.
    pub fn apply(&self, x0: &CVector, t: f64) -> Result<CVector> {
        if t == 0.0 {
            return Ok(x0.clone());
        }
        let x = match &self.route {
            Route::Spectral { values, v, w } => {
                let mut a = w * x0;
                for (ak, z) in a.iter_mut().zip(values) {
                    *ak *= (z * t).exp();
                }
                v * a
            }
            Route::Pade { g } => linalg::expm(&(g * re(t)))? * x0,
        };
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical(format!("non-finite state at t = {t}")));
        }
        Ok(x)
    }
}

/// `exp(G t) x0` for every `t` in `times`.
pub fn propagate_vector(g: &Superoperator, x0: &CVector, times: &[f64]) -> Result<Vec<CVector>> {
    check_grid(times)?;
    if x0.len() != g.dim() {
        return Err(Error::Usage("initial vector does not match generator dimension".into()));
    }
    let prop = Propagator::new(g)?;
    times.iter().map(|&t| prop.apply(x0, t)).collect()
}

/// Largest Hermiticity or trace defect removed by [`project_state`].
pub const PROJECTION_TOL: f64 = 1e-9;

/// Fast coherences accumulate phase error of order `ε_mach |λ| t`; restore
/// Hermiticity and unit trace when the defect is below [`PROJECTION_TOL`].
fn project_state(m: CMatrix, t: f64) -> Result<CMatrix> {
    let herm = linalg::max_abs_diff(&m, &m.adjoint());
    let tr = m.trace();
    let trace_defect = (tr - re(1.0)).norm();
    if herm > PROJECTION_TOL || trace_defect > PROJECTION_TOL {
        return Err(Error::Numerical(format!("propagation defect at t = {t}: hermiticity {herm:e}, trace {trace_defect:e}")));
    }
    let mut h = (&m + m.adjoint()) * re(0.5);
    h /= re(tr.re);
    Ok(h)
}

/// `ρ(t) = exp(L t) ρ0` on the grid.
pub fn propagate(l: &Superoperator, rho0: &DensityMatrix, times: &[f64]) -> Result<Trajectory> {
    let n = l
        .operator_dim()
        .filter(|&n| n == rho0.dim())
        .ok_or_else(|| Error::Usage("state dimension does not match generator".into()))?;
    let xs = propagate_vector(l, &linalg::vectorize(rho0.matrix()), times)?;
    let states = xs
        .iter()
        .zip(times)
        .map(|(x, t)| {
            project_state(linalg::unvectorize(x, n), *t)
                .and_then(DensityMatrix::new)
                .map_err(|e| Error::Numerical(format!("state at t = {t} left the state space: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut traj = Trajectory::new(times.to_vec(), states)?;
    traj.metadata.generator_fingerprint = fingerprint(l);
    Ok(traj)
}

/// `p(t) = Σ a_n e^{λ_n t} v_n` on the grid (population sector). Refuses
/// near-degenerate decompositions.
pub fn propagate_by_modes(md: &ModeDecomposition, p0: &PopulationVector, times: &[f64]) -> Result<Trajectory> {
    if md.is_degenerate() {
        return Err(Error::Degenerate(format!(
            "near-degenerate modes {:?}; use matrix-exponential propagation",
            md.near_degenerate_pairs()
        )));
    }
    check_grid(times)?;
    let a = crate::spectral::overlaps(md, p0)?;
    let states = times
        .iter()
        .map(|&t| {
            let x = md.evolve(&a, t);
            let values: Vec<f64> = x.iter().map(|z| z.re).collect();
            let imag = x.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
            if imag > 1e-9 || values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!("mode reconstruction is not real at t = {t} (|Im| = {imag:.2e})")));
            }
            Ok(DensityMatrix::from_populations(&PopulationVector::from_vec_unchecked(values)))
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(times.to_vec(), states)
}

/// Time grid kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spacing {
    Linear,
    Logarithmic,
}

/// `{0} ∪ points` samples over `[min, max]`.
pub fn time_grid(min: f64, max: f64, points: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min && points >= 2) {
        return Err(Error::Usage("time grid needs 0 < min < max and at least two points".into()));
    }
    let mut grid = Vec::with_capacity(points + 1);
    grid.push(0.0);
    let last = (points - 1) as f64;
    for k in 0..points {
        let f = k as f64 / last;
        let t = match spacing {
            Spacing::Linear => min + (max - min) * f,
            Spacing::Logarithmic => (min.ln() + (max.ln() - min.ln()) * f).exp(),
        };
        grid.push(t);
    }
    // exact endpoints
    grid[1] = min;
    grid[points] = max;
    Ok(grid)
}
