//! Coherent Hamiltonian, thermal state, spectral densities and the
//! dipolar-relaxation Liouvillian of two homonuclear spins.
//!
//! All frequencies and rates are angular (rad/s) except the scalar coupling
//! `J`, which is kept in Hz and multiplied by `2π` where it enters the
//! Hamiltonian. The generator is assembled in the frame rotating at `ω0`:
//!
//! ```text
//! L = −i[H̃, ·] + Σ_m 𝒦(mω0) Γ[T_2m, T_2m†]  (+ optional CSA / cross terms)
//! Γ[A, B](ρ) = A ρ B − ½{B A, ρ}
//! ```

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, re, CMatrix, C64};
use crate::spin_algebra::{self as sa, Axis, Spin};
use crate::state::DensityMatrix;

/// Reduced Planck constant over Boltzmann constant, K·s.
pub const HBAR_OVER_KB: f64 = 7.638_232_577_577_646e-12;

/// Largest |ε| accepted by the first-order (high-temperature) treatment.
pub const MAX_POLARIZATION: f64 = 1e-3;

/// Coherent spin parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Larmor frequency ω0, rad/s.
    pub omega0: f64,
    /// Resonance offset Δ between the two spins, rad/s.
    pub delta_offset: f64,
    /// Scalar coupling J, Hz.
    pub j_coupling_hz: f64,
    /// Signed polarization ε = −ω0ħ/(2k_B T).
    pub epsilon: f64,
}

impl SystemParams {
    /// ω0/2π = 500.02 MHz, Δ/2π = 89 Hz, J = 3.24 Hz, ε = 1e-5.
    pub fn experiment() -> Self {
        Self { omega0: 2.0 * PI * 500.02e6, delta_offset: 2.0 * PI * 89.0, j_coupling_hz: 3.24, epsilon: 1e-5 }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega0, self.delta_offset, self.j_coupling_hz, self.epsilon].iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::Config("system parameters must be finite".into()));
        }
        if self.epsilon.abs() >= MAX_POLARIZATION {
            return Err(Error::Config(format!(
                "|epsilon| = {:e} outside the high-temperature regime (< {MAX_POLARIZATION:e})",
                self.epsilon.abs()
            )));
        }
        Ok(())
    }

    /// ε = −ω0ħ/(2k_B T).
    pub fn epsilon_from_temperature(omega0: f64, temperature_k: f64) -> f64 {
        -omega0 * HBAR_OVER_KB / (2.0 * temperature_k)
    }
}

/// Bath constants of the relaxation model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    /// Dipolar coupling constant b, rad/s.
    pub b_dipolar: f64,
    /// Bath correlation time τc, s.
    pub tau_c: f64,
    /// CSA constant d, rad/s; zero disables the CSA channels.
    pub csa_d: f64,
    pub include_cross_correlation: bool,
    /// Threshold on ω0·τc below which extreme narrowing is assumed.
    pub narrowing_threshold: f64,
}

impl BathParams {
    /// τc = 2.1 ps and b = 2π × 5.903 kHz.
    pub fn experiment() -> Self {
        Self {
            b_dipolar: 2.0 * PI * 5903.0,
            tau_c: 2.1e-12,
            csa_d: 0.0,
            include_cross_correlation: false,
            narrowing_threshold: 1e-2,
        }
    }

    /// Dipolar-only bath with a prescribed K0 (b solved from K0 = 12b²τc/5).
    pub fn with_k0(k0: f64, tau_c: f64) -> Self {
        Self { b_dipolar: (5.0 * k0 / (12.0 * tau_c)).sqrt(), tau_c, ..Self::experiment() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_c > 0.0 && self.tau_c.is_finite()) {
            return Err(Error::Config("tau_c must be positive".into()));
        }
        if !(self.b_dipolar >= 0.0 && self.b_dipolar.is_finite()) {
            return Err(Error::Config("b must be nonnegative".into()));
        }
        if !self.csa_d.is_finite() {
            return Err(Error::Config("CSA constant must be finite".into()));
        }
        Ok(())
    }

    /// K0 = 12 b² τc / 5.
    pub fn k0(&self) -> f64 {
        12.0 * self.b_dipolar * self.b_dipolar * self.tau_c / 5.0
    }

    /// ω0·τc, the extreme-narrowing diagnostic.
    pub fn narrowing_product(&self, omega0: f64) -> f64 {
        (omega0 * self.tau_c).abs()
    }

    pub fn is_extreme_narrowing(&self, omega0: f64) -> bool {
        self.narrowing_product(omega0) < self.narrowing_threshold
    }
}

/// Rescale all parameters so that K0 = 1 and time is measured in 1/K0.
/// Returns the scaled parameters and the original K0.
pub fn to_dimensionless(p: &SystemParams, bp: &BathParams) -> Result<(SystemParams, BathParams, f64)> {
    let k0 = bp.k0();
    if !(k0 > 0.0 && k0.is_finite()) {
        return Err(Error::Config("dimensionless units need K0 > 0".into()));
    }
    let sp = SystemParams {
        omega0: p.omega0 / k0,
        delta_offset: p.delta_offset / k0,
        j_coupling_hz: p.j_coupling_hz / k0,
        epsilon: p.epsilon,
    };
    let sb = BathParams { b_dipolar: bp.b_dipolar / k0, tau_c: bp.tau_c * k0, csa_d: bp.csa_d / k0, ..*bp };
    Ok((sp, sb, k0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    Lab,
    Interaction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Coupling {
    /// 2πJ I1z I2z
    #[default]
    Ising,
    /// 2πJ I⃗1·I⃗2
    FullScalar,
}

/// How 𝒦(mω0) is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SpectralMode {
    /// K0(1 + mε): extreme narrowing, first order in ε.
    #[default]
    Linearized,
    /// K(mω0)·e^{mε}: full Lorentzian with exponential correction.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Channels {
    pub dipolar: bool,
    pub csa: bool,
    pub cross: bool,
}

impl Default for Channels {
    fn default() -> Self {
        Self { dipolar: true, csa: false, cross: false }
    }
}

/// Deliberate generator corruptions used to check that the validation
/// battery detects broken models.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fault {
    /// Uses `T_2m` where `T_2m†` belongs, mixing coherence orders.
    MissingAdjoint,
    /// Flips the sign of the anticommutator term.
    AnticommutatorSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LiouvillianOptions {
    pub coupling: Coupling,
    pub spectral_mode: SpectralMode,
    pub channels: Channels,
    #[doc(hidden)]
    pub fault: Option<Fault>,
}

/// Linear map on vectorized operators (column stacking).
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    matrix: CMatrix,
}

impl Superoperator {
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Usage("superoperator must be square".into()));
        }
        Ok(Self { matrix })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: CMatrix::zeros(dim, dim) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Operator dimension `n` with `dim = n²`, if the superoperator acts on
    /// full operators.
    pub fn operator_dim(&self) -> Option<usize> {
        let n = (self.dim() as f64).sqrt().round() as usize;
        (n * n == self.dim()).then_some(n)
    }

    /// Applies the map to an operator.
    pub fn apply(&self, op: &CMatrix) -> CMatrix {
        let n = op.nrows();
        assert_eq!(n * n, self.dim(), "operator dimension does not match superoperator");
        linalg::unvectorize(&(&self.matrix * linalg::vectorize(op)), n)
    }

    /// Adjoint (Heisenberg-picture) action on an operator.
    pub fn apply_adjoint(&self, op: &CMatrix) -> CMatrix {
        let n = op.nrows();
        assert_eq!(n * n, self.dim(), "operator dimension does not match superoperator");
        // ⟨X, L(ρ)⟩ = ⟨L†(X), ρ⟩ with the Hilbert–Schmidt product
        linalg::unvectorize(&(self.matrix.adjoint() * linalg::vectorize(op)), n)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { matrix: &self.matrix * re(s) }
    }
}

impl std::ops::Add for Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: Self) -> Self {
        Self { matrix: self.matrix + rhs.matrix }
    }
}

impl std::ops::AddAssign<&Superoperator> for Superoperator {
    fn add_assign(&mut self, rhs: &Superoperator) {
        self.matrix += &rhs.matrix;
    }
}

/// Spin Hamiltonian in angular units.
pub fn hamiltonian(p: &SystemParams, frame: Frame, coupling: Coupling) -> CMatrix {
    let z1 = sa::spin_operator(Spin::First, Axis::Z);
    let z2 = sa::spin_operator(Spin::Second, Axis::Z);
    let carrier = match frame {
        Frame::Lab => p.omega0,
        Frame::Interaction => 0.0,
    };
    let zeeman = &z1 * re(carrier - p.delta_offset / 2.0) + &z2 * re(carrier + p.delta_offset / 2.0);
    let scalar = match coupling {
        Coupling::Ising => z1 * z2,
        Coupling::FullScalar => sa::scalar_product(),
    };
    zeeman + scalar * re(2.0 * PI * p.j_coupling_hz)
}

/// First-order thermal state `[𝟙 + 2ε(I1z + I2z)]/4`.
pub fn thermal_state(p: &SystemParams) -> DensityMatrix {
    let m = (linalg::identity(4) + sa::total_z() * re(2.0 * p.epsilon)) * re(0.25);
    DensityMatrix::from_matrix_unchecked(m)
}

/// `exp(−H/k_BT)/Z` for the lab-frame Hamiltonian, with `1/k_BT` expressed
/// through ε: `−H/k_BT = 2ε·H/ω0`.
pub fn exact_thermal_state(p: &SystemParams, coupling: Coupling) -> Result<DensityMatrix> {
    if p.omega0 == 0.0 {
        return Err(Error::Domain("exact thermal state needs ω0 ≠ 0".into()));
    }
    let h = hamiltonian(p, Frame::Lab, coupling);
    let g = linalg::expm(&(h * re(2.0 * p.epsilon / p.omega0)))?;
    let z = g.trace();
    DensityMatrix::new(g / z)
}

/// Lorentzian spectral density `12 s² τc / (5(1 + x²τc²))` for coupling
/// strength `s` (b for dipolar, d for CSA).
fn lorentzian(strength_sq: f64, x: f64, tau_c: f64) -> f64 {
    12.0 * strength_sq * tau_c / (5.0 * (1.0 + x * x * tau_c * tau_c))
}

/// Detailed-balance factor `e^{xε/ω0}`; unity when ω0 = 0.
fn temperature_correction(x: f64, p: &SystemParams) -> f64 {
    if p.omega0 == 0.0 {
        1.0
    } else {
        (x * p.epsilon / p.omega0).exp()
    }
}

/// Dipolar spectral density K(x), optionally with the temperature correction.
pub fn spectral_density(x: f64, bp: &BathParams, p: &SystemParams, corrected: bool) -> f64 {
    let k = lorentzian(bp.b_dipolar * bp.b_dipolar, x, bp.tau_c);
    if corrected {
        k * temperature_correction(x, p)
    } else {
        k
    }
}

/// Extreme-narrowing, first-order rate K0(1 + mε).
pub fn narrowed_rate(m: i32, bp: &BathParams, p: &SystemParams) -> f64 {
    bp.k0() * (1.0 + m as f64 * p.epsilon)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mechanism {
    Dipolar,
    Csa,
    Cross,
}

/// 𝒦 for channel `mech` at `m·ω0` in the chosen spectral mode.
fn channel_rate(mech: Mechanism, m: i32, bp: &BathParams, p: &SystemParams, mode: SpectralMode) -> f64 {
    let strength_sq = match mech {
        Mechanism::Dipolar => bp.b_dipolar * bp.b_dipolar,
        Mechanism::Csa => bp.csa_d * bp.csa_d,
        Mechanism::Cross => -bp.b_dipolar * bp.csa_d,
    };
    match mode {
        SpectralMode::Linearized => lorentzian(strength_sq, 0.0, bp.tau_c) * (1.0 + m as f64 * p.epsilon),
        SpectralMode::Exact => {
            let x = m as f64 * p.omega0;
            lorentzian(strength_sq, x, bp.tau_c) * (m as f64 * p.epsilon).exp()
        }
    }
}

/// Dipolar 𝒦(mω0) as used by [`build_liouvillian`].
pub fn dipolar_rate(m: i32, bp: &BathParams, p: &SystemParams, mode: SpectralMode) -> f64 {
    channel_rate(Mechanism::Dipolar, m, bp, p, mode)
}

/// Superoperator of `ρ ↦ A ρ B − ½{B A, ρ}`.
pub fn dissipator(a: &CMatrix, b: &CMatrix) -> Superoperator {
    dissipator_signed(a, b, 1.0)
}

fn dissipator_signed(a: &CMatrix, b: &CMatrix, anticomm_sign: f64) -> Superoperator {
    let ba = b * a;
    let sandwich = linalg::left_multiplication(a) * linalg::right_multiplication(b);
    let anti = linalg::left_multiplication(&ba) + linalg::right_multiplication(&ba);
    Superoperator { matrix: sandwich - anti * re(0.5 * anticomm_sign) }
}

/// Superoperator of `ρ ↦ −i[H, ρ]`.
pub fn hamiltonian_superoperator(h: &CMatrix) -> Superoperator {
    let comm = linalg::left_multiplication(h) - linalg::right_multiplication(h);
    Superoperator { matrix: comm * C64::new(0.0, -1.0) }
}

/// Full 16×16 generator in the frame rotating at ω0.
pub fn build_liouvillian(p: &SystemParams, bp: &BathParams, opts: &LiouvillianOptions) -> Result<Superoperator> {
    p.validate()?;
    bp.validate()?;
    let ch = opts.channels;
    if (ch.csa || ch.cross) && bp.csa_d == 0.0 {
        return Err(Error::Config("CSA or cross-correlation channels requested with csa_d = 0".into()));
    }
    if ch.cross && !ch.csa {
        log::debug!("cross-correlation enabled without auto-correlated CSA");
    }
    if opts.spectral_mode == SpectralMode::Linearized && !bp.is_extreme_narrowing(p.omega0) {
        log::warn!(
            "ω0·τc = {:.3e} exceeds the extreme-narrowing threshold {:.1e}; linearized rates may be inaccurate",
            bp.narrowing_product(p.omega0),
            bp.narrowing_threshold
        );
    }

    let (anti_sign, keep_adjoint) = match opts.fault {
        Some(Fault::AnticommutatorSign) => (-1.0, true),
        Some(Fault::MissingAdjoint) => (1.0, false),
        None => (1.0, true),
    };
    let partner = |t: &CMatrix| if keep_adjoint { t.adjoint() } else { t.clone() };
    let gamma = |a: &CMatrix, b: &CMatrix| dissipator_signed(a, b, anti_sign);

    let h = hamiltonian(p, Frame::Interaction, opts.coupling);
    let mut l = hamiltonian_superoperator(&h);

    let spins = [Spin::First, Spin::Second];
    for m in -2..=2 {
        let t_dd = sa::spherical_tensor(m)?;
        if ch.dipolar {
            let k = channel_rate(Mechanism::Dipolar, m, bp, p, opts.spectral_mode);
            l += &gamma(&t_dd, &partner(&t_dd)).scale(k);
        }
        if m.abs() > 1 {
            continue;
        }
        if ch.csa {
            let k = channel_rate(Mechanism::Csa, m, bp, p, opts.spectral_mode);
            for sj in spins {
                for sk in spins {
                    let tj = sa::field_spin_tensor(m, sj)?;
                    let tk = sa::field_spin_tensor(m, sk)?;
                    l += &gamma(&tj, &partner(&tk)).scale(k);
                }
            }
        }
        if ch.cross {
            let k = channel_rate(Mechanism::Cross, m, bp, p, opts.spectral_mode);
            for sj in spins {
                let tj = sa::field_spin_tensor(m, sj)?;
                l += &gamma(&t_dd, &partner(&tj)).scale(k);
                l += &gamma(&tj, &partner(&t_dd)).scale(k);
            }
        }
    }
    if !linalg::is_finite(&l.matrix) {
        return Err(Error::Numerical("Liouvillian has non-finite entries".into()));
    }
    Ok(l)
}
