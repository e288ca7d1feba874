//! C ABI for `qmpemba`.
//!
//! Density matrices cross the boundary as 32 doubles: the 4×4 matrix in
//! row-major order with real and imaginary parts interleaved. Every entry
//! point returns a [`QmStatus`]; on failure [`qm_last_error`] describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qmpemba::dynamics::{self, Trajectory};
use qmpemba::linalg::{CMatrix, C64};
use qmpemba::metrics::{self, Classification, Metric};
use qmpemba::relaxation::{self, BathParams, Coupling, LiouvillianOptions, Superoperator, SystemParams};
use qmpemba::{spectral, DensityMatrix, Error};

/// Doubles per density matrix.
pub const QM_STATE_LEN: usize = 32;
/// Modes of the population generator.
pub const QM_POPULATION_MODES: usize = 4;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmStatus {
    Ok = 0,
    NullPointer = 1,
    Usage = 2,
    Domain = 3,
    Config = 4,
    Numerical = 5,
    Degenerate = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmCoupling {
    Ising = 0,
    FullScalar = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmMetric {
    TraceDistance = 0,
    RelativeEntropy = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmClassification {
    None = 0,
    Weak = 1,
    Strong = 2,
    Genuine = 3,
}

/// Coherent parameters; frequencies in rad/s, J in Hz.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QmSystemParams {
    pub omega0: f64,
    pub delta_offset: f64,
    pub j_coupling_hz: f64,
    pub epsilon: f64,
}

/// Dipolar bath; b in rad/s, τc in s.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QmBathParams {
    pub b_dipolar: f64,
    pub tau_c: f64,
}

/// Result of a far/near comparison.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QmCrossing {
    /// Nonzero when a persistent crossing exists.
    pub found: i32,
    /// First crossing time; NaN when `found` is zero.
    pub time: f64,
    /// Sign changes of the gap on the grid.
    pub count: usize,
    /// `metric_far(0) − metric_near(0)`.
    pub initial_gap: f64,
    pub classification: QmClassification,
}

/// Relaxation generator together with the parameters it was built from.
pub struct QmLiouvillian {
    generator: Superoperator,
    system: SystemParams,
}

/// States on a time grid.
pub struct QmTrajectory {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QmStatus {
    match e {
        Error::Usage(_) => QmStatus::Usage,
        Error::Domain(_) => QmStatus::Domain,
        Error::Config(_) => QmStatus::Config,
        Error::Numerical(_) => QmStatus::Numerical,
        Error::Degenerate(_) => QmStatus::Degenerate,
        Error::Io(_) => QmStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(), Failure>;

/// Run `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Outcome) -> QmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QmStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("null pointer: {name}"));
            QmStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            QmStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    // SAFETY: caller guarantees `p` is null or valid for reads.
    unsafe { p.as_ref() }.ok_or(Failure::Null(name))
}

fn out_mut<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    // SAFETY: caller guarantees `p` is null or valid for writes.
    unsafe { p.as_mut() }.ok_or(Failure::Null(name))
}

fn slice<'a>(p: *const f64, len: usize, name: &'static str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    // SAFETY: caller guarantees `len` readable doubles at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn slice_mut<'a>(p: *mut f64, len: usize, name: &'static str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    // SAFETY: caller guarantees `len` writable doubles at `p`.
    Ok(unsafe { std::slice::from_raw_parts_mut(p, len) })
}

fn read_state(p: *const f64, name: &'static str) -> Result<DensityMatrix, Failure> {
    let v = slice(p, QM_STATE_LEN, name)?;
    let m = CMatrix::from_fn(4, 4, |r, c| C64::new(v[2 * (4 * r + c)], v[2 * (4 * r + c) + 1]));
    Ok(DensityMatrix::new(m)?)
}

fn write_state(rho: &DensityMatrix, p: *mut f64, name: &'static str) -> Outcome {
    let out = slice_mut(p, QM_STATE_LEN, name)?;
    let m = rho.matrix();
    for r in 0..4 {
        for c in 0..4 {
            out[2 * (4 * r + c)] = m[(r, c)].re;
            out[2 * (4 * r + c) + 1] = m[(r, c)].im;
        }
    }
    Ok(())
}

fn system_from(p: &QmSystemParams) -> SystemParams {
    SystemParams { omega0: p.omega0, delta_offset: p.delta_offset, j_coupling_hz: p.j_coupling_hz, epsilon: p.epsilon }
}

fn bath_from(b: &QmBathParams) -> BathParams {
    BathParams { b_dipolar: b.b_dipolar, tau_c: b.tau_c, ..BathParams::experiment() }
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parameters of the reference experiment.
///
/// # Safety
/// Pointers must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qm_experiment_params(system: *mut QmSystemParams, bath: *mut QmBathParams) -> QmStatus {
    guard(|| {
        let s = SystemParams::experiment();
        let b = BathParams::experiment();
        *out_mut(system, "system")? =
            QmSystemParams { omega0: s.omega0, delta_offset: s.delta_offset, j_coupling_hz: s.j_coupling_hz, epsilon: s.epsilon };
        *out_mut(bath, "bath")? = QmBathParams { b_dipolar: b.b_dipolar, tau_c: b.tau_c };
        Ok(())
    })
}

/// Build the dipolar Liouvillian. With `dimensionless` nonzero all rates are
/// divided by K0 so that time is measured in 1/K0.
///
/// # Safety
/// Pointers must be null or valid; `*out` receives a handle to release with
/// [`qm_liouvillian_free`].
#[no_mangle]
pub unsafe extern "C" fn qm_liouvillian_new(
    system: *const QmSystemParams,
    bath: *const QmBathParams,
    coupling: QmCoupling,
    dimensionless: i32,
    out: *mut *mut QmLiouvillian,
) -> QmStatus {
    guard(|| {
        let slot = out_mut(out, "out")?;
        *slot = ptr::null_mut();
        let mut p = system_from(non_null(system, "system")?);
        let mut bp = bath_from(non_null(bath, "bath")?);
        if dimensionless != 0 {
            let (sp, sb, _) = relaxation::to_dimensionless(&p, &bp)?;
            p = sp;
            bp = sb;
        }
        let coupling = match coupling {
            QmCoupling::Ising => Coupling::Ising,
            QmCoupling::FullScalar => Coupling::FullScalar,
        };
        let opts = LiouvillianOptions { coupling, ..Default::default() };
        let generator = relaxation::build_liouvillian(&p, &bp, &opts)?;
        *slot = Box::into_raw(Box::new(QmLiouvillian { generator, system: p }));
        Ok(())
    })
}

/// # Safety
/// `l` must be null or a handle from [`qm_liouvillian_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qm_liouvillian_free(l: *mut QmLiouvillian) {
    if !l.is_null() {
        drop(Box::from_raw(l));
    }
}

/// Eigenvalues of the population generator, sorted by decreasing real
/// part, into `re`/`im` arrays of length [`QM_POPULATION_MODES`].
///
/// # Safety
/// Pointers must be null or valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn qm_population_eigenvalues(l: *const QmLiouvillian, re: *mut f64, im: *mut f64) -> QmStatus {
    guard(|| {
        let l = non_null(l, "liouvillian")?;
        let md = spectral::eigendecompose(&spectral::population_generator(&l.generator)?)?;
        let re = slice_mut(re, QM_POPULATION_MODES, "re")?;
        let im = slice_mut(im, QM_POPULATION_MODES, "im")?;
        for (k, z) in md.eigenvalues().iter().enumerate() {
            re[k] = z.re;
            im[k] = z.im;
        }
        Ok(())
    })
}

/// Thermal reference state `(𝟙 + 2εΣz)/4`.
///
/// # Safety
/// `rho` must hold [`QM_STATE_LEN`] doubles.
#[no_mangle]
pub unsafe extern "C" fn qm_thermal_state(l: *const QmLiouvillian, rho: *mut f64) -> QmStatus {
    guard(|| write_state(&relaxation::thermal_state(&non_null(l, "liouvillian")?.system), rho, "rho"))
}

/// Far state `𝟙/4 − εΣz/2`.
///
/// # Safety
/// `rho` must hold [`QM_STATE_LEN`] doubles.
#[no_mangle]
pub unsafe extern "C" fn qm_far_state(l: *const QmLiouvillian, rho: *mut f64) -> QmStatus {
    guard(|| write_state(&dynamics::far_state(&non_null(l, "liouvillian")?.system), rho, "rho"))
}

/// Near state prepared with pulse angle `theta` (radians, in (0, π/2)) and
/// dephased by a field gradient.
///
/// # Safety
/// `rho` must hold [`QM_STATE_LEN`] doubles.
#[no_mangle]
pub unsafe extern "C" fn qm_near_state(l: *const QmLiouvillian, theta: f64, rho: *mut f64) -> QmStatus {
    guard(|| write_state(&dynamics::near_state(theta, &non_null(l, "liouvillian")?.system)?, rho, "rho"))
}

/// Near state `𝟙/4 + ε(I1z − I2z)/2` used for relative-entropy crossings.
///
/// # Safety
/// `rho` must hold [`QM_STATE_LEN`] doubles.
#[no_mangle]
pub unsafe extern "C" fn qm_near_state_genuine(l: *const QmLiouvillian, rho: *mut f64) -> QmStatus {
    guard(|| write_state(&dynamics::near_state_genuine(&non_null(l, "liouvillian")?.system), rho, "rho"))
}

/// Propagate `rho0` to every time in `times` (nondecreasing, starting at or
/// after zero).
///
/// # Safety
/// `rho0` holds [`QM_STATE_LEN`] doubles, `times` holds `n` doubles; `*out`
/// receives a handle to release with [`qm_trajectory_free`].
#[no_mangle]
pub unsafe extern "C" fn qm_propagate(
    l: *const QmLiouvillian,
    rho0: *const f64,
    times: *const f64,
    n: usize,
    out: *mut *mut QmTrajectory,
) -> QmStatus {
    guard(|| {
        let slot = out_mut(out, "out")?;
        *slot = ptr::null_mut();
        let l = non_null(l, "liouvillian")?;
        let rho0 = read_state(rho0, "rho0")?;
        let times = slice(times, n, "times")?;
        let inner = dynamics::propagate(&l.generator, &rho0, times)?;
        *slot = Box::into_raw(Box::new(QmTrajectory { inner }));
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a handle from [`qm_propagate`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qm_trajectory_free(t: *mut QmTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of snapshots; zero for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qm_trajectory_len(t: *const QmTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.inner.len())
}

/// Snapshot `index` and its time.
///
/// # Safety
/// `rho` must hold [`QM_STATE_LEN`] doubles; `time` may be null.
#[no_mangle]
pub unsafe extern "C" fn qm_trajectory_state(t: *const QmTrajectory, index: usize, time: *mut f64, rho: *mut f64) -> QmStatus {
    guard(|| {
        let t = &non_null(t, "trajectory")?.inner;
        let state =
            t.states().get(index).ok_or_else(|| Error::Usage(format!("index {index} out of range for {} snapshots", t.len())))?;
        if let Some(slot) = time.as_mut() {
            *slot = t.times()[index];
        }
        write_state(state, rho, "rho")
    })
}

fn metric_of(m: QmMetric) -> Metric {
    match m {
        QmMetric::TraceDistance => Metric::TraceDistance,
        QmMetric::RelativeEntropy => Metric::RelativeEntropy,
    }
}

/// `metric(rho, sigma)`.
///
/// # Safety
/// `rho` and `sigma` hold [`QM_STATE_LEN`] doubles; `out` is valid.
#[no_mangle]
pub unsafe extern "C" fn qm_metric(metric: QmMetric, rho: *const f64, sigma: *const f64, out: *mut f64) -> QmStatus {
    guard(|| {
        let v = metric_of(metric).evaluate(&read_state(rho, "rho")?, &read_state(sigma, "sigma")?)?;
        *out_mut(out, "out")? = v;
        Ok(())
    })
}

/// Propagate the two states over `times`, locate where the far state's
/// distance to the thermal state drops below the near state's, and classify
/// the crossing.
///
/// # Safety
/// `far` and `near` hold [`QM_STATE_LEN`] doubles, `times` holds `n`
/// doubles; `out` is valid.
#[no_mangle]
pub unsafe extern "C" fn qm_mpemba_crossing(
    l: *const QmLiouvillian,
    metric: QmMetric,
    far: *const f64,
    near: *const f64,
    times: *const f64,
    n: usize,
    out: *mut QmCrossing,
) -> QmStatus {
    guard(|| {
        let l = non_null(l, "liouvillian")?;
        let out = out_mut(out, "out")?;
        let far = read_state(far, "far")?;
        let near = read_state(near, "near")?;
        let times = slice(times, n, "times")?;
        let metric = metric_of(metric);
        let reference = relaxation::thermal_state(&l.system);
        let tf = dynamics::propagate(&l.generator, &far, times)?;
        let tn = dynamics::propagate(&l.generator, &near, times)?;
        let mut report = metrics::detect_crossing(&tf, &tn, metric, &reference)?;
        metrics::refine_crossings(&mut report, |t| {
            let f = dynamics::propagate(&l.generator, &far, &[t])?;
            let g = dynamics::propagate(&l.generator, &near, &[t])?;
            Ok(metric.evaluate(&f.states()[0], &reference)? - metric.evaluate(&g.states()[0], &reference)?)
        })?;
        let md = spectral::eigendecompose(&spectral::population_generator(&l.generator)?)?;
        let report = metrics::classify(&md, &far.populations(), &near.populations(), report)?;
        *out = QmCrossing {
            found: i32::from(report.crossing_time.is_some()),
            time: report.crossing_time.unwrap_or(f64::NAN),
            count: report.crossings.len(),
            initial_gap: report.initial_gap,
            classification: match report.classification {
                Classification::None => QmClassification::None,
                Classification::Weak => QmClassification::Weak,
                Classification::Strong => QmClassification::Strong,
                Classification::Genuine => QmClassification::Genuine,
            },
        };
        Ok(())
    })
}
