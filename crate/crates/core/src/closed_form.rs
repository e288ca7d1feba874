//! Closed-form results for the dipolar two-spin model, written out entry by
//! entry so they can serve as independent references for the assembled
//! generators and the numerical propagation.
//!
//! Everything here is first order in ε and assumes extreme narrowing
//! (𝒦(mω0) = K0(1 + mε)). Vectors are ordered `(p00, p01, p10, p11)` and the
//! zero-quantum block appends `(c, c*)` with `c` the coefficient of `|01⟩⟨10|`.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{re, CMatrix, C64};

/// Single-quantum rates `(η₊, η₋) = K0(1 ∓ ε)/16`.
pub fn single_quantum_rates(k0: f64, eps: f64) -> (f64, f64) {
    (k0 * (1.0 - eps) / 16.0, k0 * (1.0 + eps) / 16.0)
}

/// Double-quantum rates `(η₊, η₋) = K0(1 ∓ 2ε)/4`.
pub fn double_quantum_rates(k0: f64, eps: f64) -> (f64, f64) {
    (k0 * (1.0 - 2.0 * eps) / 4.0, k0 * (1.0 + 2.0 * eps) / 4.0)
}

/// Zero-quantum flip rate `K0/24`.
pub fn zero_quantum_rate(k0: f64) -> f64 {
    k0 / 24.0
}

/// Population generator L_p, 4×4, in closed form.
pub fn population_generator(k0: f64, eps: f64) -> DMatrix<f64> {
    let k = k0;
    let e = eps;
    let inner = -k / 24.0 - k * (1.0 + e) / 16.0 - k * (1.0 - e) / 16.0;
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        -k * (1.0 - e) / 8.0 - k * (1.0 - 2.0 * e) / 4.0, k * (1.0 + e) / 16.0, k * (1.0 + e) / 16.0, k * (1.0 + 2.0 * e) / 4.0,
        k * (1.0 - e) / 16.0, inner, k / 24.0, k * (1.0 + e) / 16.0,
        k * (1.0 - e) / 16.0, k / 24.0, inner, k * (1.0 + e) / 16.0,
        k * (1.0 - 2.0 * e) / 4.0, k * (1.0 - e) / 16.0, k * (1.0 - e) / 16.0, -k * (1.0 + 2.0 * e) / 4.0 - k * (1.0 + e) / 8.0,
    ]);
    m
}

/// Zero-quantum generator L₀ = (A B; C D), 6×6, in closed form.
pub fn zero_quantum_generator(k0: f64, eps: f64, delta: f64) -> CMatrix {
    let k = k0;
    let e = eps;
    let inner = -k / 24.0 - k * (1.0 + e) / 16.0 - k * (1.0 - e) / 16.0;
    let q = -k * (1.0 + e) / 32.0 - k * (1.0 - e) / 32.0;
    let up = k * (1.0 + e) / 16.0;
    let dn = k * (1.0 - e) / 16.0;
    let r = re;
    let i = C64::new(0.0, delta);
    #[rustfmt::skip]
    let m = CMatrix::from_row_slice(6, 6, &[
        // A | B
        r(-k * (1.0 - e) / 8.0 - k * (1.0 - 2.0 * e) / 4.0), r(up), r(up), r(k * (1.0 + 2.0 * e) / 4.0), r(up), r(up),
        r(dn), r(inner), r(k / 24.0), r(up), r(q), r(q),
        r(dn), r(k / 24.0), r(inner), r(up), r(q), r(q),
        // C | D
        r(k * (1.0 - 2.0 * e) / 4.0), r(dn), r(dn), r(-k * (1.0 + 2.0 * e) / 4.0 - k * (1.0 + e) / 8.0), r(dn), r(dn),
        r(dn), r(q), r(q), r(up), i + r(inner), r(k / 24.0),
        r(dn), r(q), r(q), r(up), r(k / 24.0), -i + r(inner),
    ]);
    m
}

/// Generator of `(X1, X2, X3)` at ε = 0 with `X1 = p00 + p11 − p01 − p10`,
/// `X2 = c + c*`, `X3 = c − c*`.
pub fn x_subsystem_generator(k0: f64, delta: f64) -> CMatrix {
    let r = re;
    let i = C64::new(0.0, delta);
    #[rustfmt::skip]
    let m = CMatrix::from_row_slice(3, 3, &[
        r(-k0 / 4.0), r(k0 / 4.0), r(0.0),
        r(k0 / 8.0), r(-k0 / 8.0), i,
        r(0.0), i, r(-5.0 * k0 / 24.0),
    ]);
    m
}

/// Nonzero decay rates `(λ1, λ2, λ3) = −(K0/24)(5, 6, 15)`.
pub fn decay_rates(k0: f64) -> [f64; 3] {
    [-5.0 * k0 / 24.0, -k0 / 4.0, -5.0 * k0 / 8.0]
}

/// Right eigenvectors `v0..v3` of L_p (first order in ε).
pub fn right_eigenvectors(eps: f64) -> [DVector<f64>; 4] {
    let e = eps;
    let n2 = (4.0 + 8.0 / 3.0 * e * (5.0 + 4.0 * e)).sqrt();
    let n3 = (2.0 / 3.0 * (1.0 - e) * (3.0 - 5.0 * e)).sqrt();
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    [
        DVector::from_vec(vec![1.0 + 2.0 * e, 1.0, 1.0, 1.0 - 2.0 * e]) / 4.0,
        DVector::from_vec(vec![0.0, -s2, s2, 0.0]),
        DVector::from_vec(vec![1.0 + 16.0 / 3.0 * e, -1.0 - 8.0 / 3.0 * e, -1.0 - 8.0 / 3.0 * e, 1.0]) / n2,
        DVector::from_vec(vec![-1.0 + 2.0 / 3.0 * e, -e / 3.0, -e / 3.0, 1.0]) / n3,
    ]
}

/// Left eigenvectors `w0..w3` of L_p (first order in ε).
pub fn left_eigenvectors(eps: f64) -> [DVector<f64>; 4] {
    let e = eps;
    let n2 = (4.0 + 8.0 / 3.0 * e * (5.0 + 4.0 * e)).sqrt();
    let n3 = (2.0 / 3.0 * (1.0 - e) * (3.0 - 5.0 * e)).sqrt();
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    [
        DVector::from_vec(vec![1.0, 1.0, 1.0, 1.0]),
        DVector::from_vec(vec![0.0, -s2, s2, 0.0]),
        DVector::from_vec(vec![1.0 + 4.0 / 3.0 * e, -1.0 - 2.0 / 3.0 * e, -1.0 - 2.0 / 3.0 * e, 1.0]) / n2,
        DVector::from_vec(vec![-1.0 + 14.0 / 3.0 * e, -e / 3.0, -e / 3.0, 1.0]) / n3,
    ]
}

/// Thermal populations `(1 + 2ε, 1, 1, 1 − 2ε)/4`.
pub fn thermal_populations(eps: f64) -> [f64; 4] {
    [(1.0 + 2.0 * eps) / 4.0, 0.25, 0.25, (1.0 - 2.0 * eps) / 4.0]
}

/// Populations of `𝟙/4 − ε(I1z + cos2θ I2z)`, a deviation inverted with
/// respect to the thermal state `(1 + 2ε, 1, 1, 1 − 2ε)/4`.
pub fn inverted_initial_populations(theta: f64, eps: f64) -> [f64; 4] {
    let s = -eps;
    let c = (2.0 * theta).cos();
    [0.25 + (1.0 + c) * s / 2.0, 0.25 + (1.0 - c) * s / 2.0, 0.25 + (-1.0 + c) * s / 2.0, 0.25 + (-1.0 - c) * s / 2.0]
}

/// Analytic populations `ρ11..ρ44` at time `t` (units of 1/K0 when
/// `k0 = 1`) starting from [`inverted_initial_populations`].
pub fn inverted_populations(theta: f64, eps: f64, k0: f64, t: f64) -> [f64; 4] {
    let s = -eps;
    let c = (2.0 * theta).cos();
    let fast = (-5.0 * k0 * t / 8.0).exp();
    let slow = (-5.0 * k0 * t / 24.0).exp();
    [
        0.25 + (-0.5 + (2.0 + c) / 2.0 * fast) * s,
        0.25 - 0.5 * (-1.0 + c) * slow * s,
        0.25 + 0.5 * (-1.0 + c) * slow * s,
        0.25 + (0.5 - (2.0 + c) / 2.0 * fast) * s,
    ]
}

/// Populations of the dephased near state `𝟙/4 + 2ε(I1z + cos2θ I2z)/4`
/// relaxing toward `p_th` (first order in ε).
pub fn near_state_populations(theta: f64, eps: f64, k0: f64, t: f64) -> [f64; 4] {
    let g = eps * ((2.0 * theta).cos() - 1.0) / 4.0;
    let fast = (-5.0 * k0 * t / 8.0).exp();
    let slow = (-5.0 * k0 * t / 24.0).exp();
    let th = thermal_populations(eps);
    [th[0] + g * fast, th[1] - g * slow, th[2] + g * slow, th[3] - g * fast]
}

/// Populations of the far state `𝟙/4 − ε(I1z + I2z)/2` relaxing toward
/// `p_th`; only the fast double-quantum mode is involved.
pub fn far_state_populations(eps: f64, k0: f64, t: f64) -> [f64; 4] {
    let fast = (-5.0 * k0 * t / 8.0).exp();
    [0.25 + eps / 2.0 - eps * fast, 0.25, 0.25, 0.25 - eps / 2.0 + eps * fast]
}

/// Trace distance of the far state from `ρ_th`: `|ε| e^{−5K0t/8}`.
pub fn far_trace_distance(eps: f64, k0: f64, t: f64) -> f64 {
    eps.abs() * (-5.0 * k0 * t / 8.0).exp()
}

/// Trace distance of the dephased near state from `ρ_th`:
/// `(|ε|(1 − cos2θ)/4)(e^{−5K0t/8} + e^{−5K0t/24})`.
pub fn near_trace_distance(theta: f64, eps: f64, k0: f64, t: f64) -> f64 {
    let g = (eps * (1.0 - (2.0 * theta).cos()) / 4.0).abs();
    g * ((-5.0 * k0 * t / 8.0).exp() + (-5.0 * k0 * t / 24.0).exp())
}

/// `𝟙/4 + 2ε[cos²θ(I1z + I2z) + sin²θ(I1z − I2z) + sin2θ I2y]/4`.
pub fn theta_state(theta: f64, eps: f64) -> CMatrix {
    use crate::spin_algebra::{spin_operator, Axis, Spin};
    let z1 = spin_operator(Spin::First, Axis::Z);
    let z2 = spin_operator(Spin::Second, Axis::Z);
    let y2 = spin_operator(Spin::Second, Axis::Y);
    let (s, c) = theta.sin_cos();
    let dev = (&z1 + &z2) * re(c * c) + (&z1 - &z2) * re(s * s) + y2 * re((2.0 * theta).sin());
    CMatrix::identity(4, 4) * re(0.25) + dev * re(2.0 * eps / 4.0)
}

/// Dephased state `𝟙/4 + 2ε(I1z + cos2θ I2z)/4`.
pub fn near_state(theta: f64, eps: f64) -> CMatrix {
    use crate::spin_algebra::{spin_operator, Axis, Spin};
    let z1 = spin_operator(Spin::First, Axis::Z);
    let z2 = spin_operator(Spin::Second, Axis::Z);
    CMatrix::identity(4, 4) * re(0.25) + (z1 + z2 * re((2.0 * theta).cos())) * re(2.0 * eps / 4.0)
}

/// Fixed point of L_p: each spin at polarization ε,
/// `((1 + ε)², 1 − ε², 1 − ε², (1 − ε)²)/4`. Agrees with
/// [`thermal_populations`] to first order.
pub fn stationary_populations(eps: f64) -> [f64; 4] {
    let (u, d) = (1.0 + eps, 1.0 - eps);
    [u * u / 4.0, u * d / 4.0, u * d / 4.0, d * d / 4.0]
}

/// Populations from the first-order eigenpairs of L_p:
/// `p(t) = p_ss + Σ_k (w_k·(p0 − p_ss)) / (w_k·v_k) v_k e^{λ_k t}`.
///
/// Projecting the deviation from the exact fixed point keeps the error at
/// O(ε²) relative to the O(ε) signal.
pub fn spectral_populations(p0: &[f64; 4], eps: f64, k0: f64, t: f64) -> [f64; 4] {
    let th = stationary_populations(eps);
    let dev = DVector::from_iterator(4, p0.iter().zip(&th).map(|(a, b)| a - b));
    let v = right_eigenvectors(eps);
    let w = left_eigenvectors(eps);
    let rates = decay_rates(k0);
    let mut p = DVector::from_row_slice(&th);
    for k in 1..4 {
        let a = w[k].dot(&dev) / w[k].dot(&v[k]);
        p += &v[k] * (a * (rates[k - 1] * t).exp());
    }
    [p[0], p[1], p[2], p[3]]
}
