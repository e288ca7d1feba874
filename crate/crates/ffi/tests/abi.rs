//! Exercises the C ABI through its Rust declarations.

use std::ffi::CStr;
use std::ptr;

use qmpemba_ffi::*;

fn experiment_generator(dimensionless: i32) -> *mut QmLiouvillian {
    let mut sys = QmSystemParams { omega0: 0.0, delta_offset: 0.0, j_coupling_hz: 0.0, epsilon: 0.0 };
    let mut bath = QmBathParams { b_dipolar: 0.0, tau_c: 0.0 };
    assert_eq!(unsafe { qm_experiment_params(&mut sys, &mut bath) }, QmStatus::Ok);
    let mut l = ptr::null_mut();
    let st = unsafe { qm_liouvillian_new(&sys, &bath, QmCoupling::Ising, dimensionless, &mut l) };
    assert_eq!(st, QmStatus::Ok);
    assert!(!l.is_null());
    l
}

fn last_error() -> String {
    let p = qm_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn population_spectrum_in_k0_units() {
    let l = experiment_generator(1);
    let (mut re, mut im) = ([0.0; QM_POPULATION_MODES], [0.0; QM_POPULATION_MODES]);
    assert_eq!(unsafe { qm_population_eigenvalues(l, re.as_mut_ptr(), im.as_mut_ptr()) }, QmStatus::Ok);
    for (got, want) in re.iter().zip([0.0, -5.0 / 24.0, -0.25, -5.0 / 8.0]) {
        assert!((got - want).abs() < 1e-6, "{re:?}");
    }
    assert!(im.iter().all(|x| x.abs() < 1e-9));
    unsafe { qm_liouvillian_free(l) };
}

#[test]
fn propagation_relaxes_to_thermal() {
    let l = experiment_generator(1);
    let (mut far, mut th) = ([0.0; QM_STATE_LEN], [0.0; QM_STATE_LEN]);
    unsafe {
        assert_eq!(qm_far_state(l, far.as_mut_ptr()), QmStatus::Ok);
        assert_eq!(qm_thermal_state(l, th.as_mut_ptr()), QmStatus::Ok);
    }
    let times = [0.0, 1.0, 40.0];
    let mut traj = ptr::null_mut();
    assert_eq!(unsafe { qm_propagate(l, far.as_ptr(), times.as_ptr(), times.len(), &mut traj) }, QmStatus::Ok);
    assert_eq!(unsafe { qm_trajectory_len(traj) }, 3);

    let mut rho = [0.0; QM_STATE_LEN];
    let mut t = 0.0;
    let mut d = [0.0; 3];
    for (k, dk) in d.iter_mut().enumerate() {
        assert_eq!(unsafe { qm_trajectory_state(traj, k, &mut t, rho.as_mut_ptr()) }, QmStatus::Ok);
        assert_eq!(t, times[k]);
        assert_eq!(unsafe { qm_metric(QmMetric::TraceDistance, rho.as_ptr(), th.as_ptr(), dk) }, QmStatus::Ok);
    }
    // |ε| e^{−5t/8}, to O(ε²) since the fixed point sits ε²/2 from the reference
    let tol = 10.0 * 1e-10;
    assert!((d[0] - 1e-5).abs() < 1e-15);
    assert!((d[1] - 1e-5 * (-0.625_f64).exp()).abs() < tol);
    assert!(d[2] < tol);

    assert_eq!(unsafe { qm_trajectory_state(traj, 3, ptr::null_mut(), rho.as_mut_ptr()) }, QmStatus::Usage);
    assert!(last_error().contains("out of range"));
    unsafe {
        qm_trajectory_free(traj);
        qm_liouvillian_free(l);
    }
}

#[test]
fn crossings_are_classified() {
    let l = experiment_generator(1);
    let times: Vec<f64> = std::iter::once(0.0).chain((0..200).map(|k| 1e-3 * (2e4_f64).powf(k as f64 / 199.0))).collect();
    let (mut far, mut near, mut gen) = ([0.0; QM_STATE_LEN], [0.0; QM_STATE_LEN], [0.0; QM_STATE_LEN]);
    unsafe {
        assert_eq!(qm_far_state(l, far.as_mut_ptr()), QmStatus::Ok);
        assert_eq!(qm_near_state(l, 70f64.to_radians(), near.as_mut_ptr()), QmStatus::Ok);
        assert_eq!(qm_near_state_genuine(l, gen.as_mut_ptr()), QmStatus::Ok);
    }
    let mut c = QmCrossing { found: 0, time: 0.0, count: 0, initial_gap: 0.0, classification: QmClassification::None };
    let st = unsafe {
        qm_mpemba_crossing(l, QmMetric::TraceDistance, far.as_ptr(), near.as_ptr(), times.as_ptr(), times.len(), &mut c)
    };
    assert_eq!(st, QmStatus::Ok);
    assert_eq!(c.found, 1);
    assert_eq!(c.classification, QmClassification::Strong);
    assert!((c.time - 0.564077).abs() < 1e-5, "{}", c.time);

    let st = unsafe {
        qm_mpemba_crossing(l, QmMetric::RelativeEntropy, far.as_ptr(), gen.as_ptr(), times.as_ptr(), times.len(), &mut c)
    };
    assert_eq!(st, QmStatus::Ok);
    assert_eq!(c.classification, QmClassification::Genuine);
    assert!((c.time - 1.2 * 3f64.ln()).abs() < 1e-5, "{}", c.time);
    unsafe { qm_liouvillian_free(l) };
}

#[test]
fn errors_map_to_status_codes() {
    let mut out = ptr::null_mut();
    let bath = QmBathParams { b_dipolar: 1.0, tau_c: 1e-12 };
    assert_eq!(unsafe { qm_liouvillian_new(ptr::null(), &bath, QmCoupling::Ising, 0, &mut out) }, QmStatus::NullPointer);
    assert!(out.is_null());
    assert!(last_error().contains("system"));

    let sys = QmSystemParams { omega0: 1e9, delta_offset: 500.0, j_coupling_hz: 3.0, epsilon: 0.5 };
    assert_eq!(unsafe { qm_liouvillian_new(&sys, &bath, QmCoupling::FullScalar, 0, &mut out) }, QmStatus::Config);
    assert!(out.is_null());

    let l = experiment_generator(1);
    let mut rho = [0.0; QM_STATE_LEN];
    assert_eq!(unsafe { qm_near_state(l, 2.0, rho.as_mut_ptr()) }, QmStatus::Domain);

    // not a state: trace 2
    let mut bad = [0.0; QM_STATE_LEN];
    for k in 0..4 {
        bad[2 * (4 * k + k)] = 0.5;
    }
    let mut d = 0.0;
    assert_eq!(unsafe { qm_metric(QmMetric::TraceDistance, bad.as_ptr(), bad.as_ptr(), &mut d) }, QmStatus::Domain);
    unsafe {
        qm_liouvillian_free(l);
        qm_liouvillian_free(ptr::null_mut());
        qm_trajectory_free(ptr::null_mut());
    }
    assert_eq!(unsafe { qm_trajectory_len(ptr::null()) }, 0);
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(qm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
