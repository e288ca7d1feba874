//! Fixed operators of two spin-1/2 nuclei.
//!
//! Basis ordering is `|00⟩, |01⟩, |10⟩, |11⟩` where `|0⟩` is the `+1`
//! eigenstate of `σz` (so `Iz|0⟩ = +½|0⟩`). The first tensor factor is spin 1.
//!
//! Coherence order follows `[I1z + I2z, ξ] = s·m·ξ` with `s = +1`
//! ([`COHERENCE_SIGN`]): the element `|ab⟩⟨cd|` has order `M(ab) − M(cd)`
//! where `M` is the total magnetic quantum number. With this choice
//! `spherical_tensor(m)` has coherence order `m`.

use crate::error::{Error, Result};
use crate::linalg::{self, re, CMatrix, C64, I, ONE, ZERO};

/// Global sign `s` in `[I1z + I2z, ξ⁽ᵐ⁾] = s·m·ξ⁽ᵐ⁾`.
pub const COHERENCE_SIGN: i32 = 1;

pub const DIM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PulseAxis {
    X,
    Y,
    MinusX,
    MinusY,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PulseTarget {
    First,
    Second,
    Both,
}

/// One coherence-order slice of a 4×4 operator.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceComponent {
    pub order: i32,
    pub component: CMatrix,
}

fn single_spin(axis: Axis) -> CMatrix {
    let h = 0.5;
    let (a, b, c, d) = match axis {
        Axis::X => (ZERO, re(h), re(h), ZERO),
        Axis::Y => (ZERO, C64::new(0.0, -h), C64::new(0.0, h), ZERO),
        Axis::Z => (re(h), ZERO, ZERO, re(-h)),
        // raising maps |1⟩ (m = −½) to |0⟩ (m = +½)
        Axis::Plus => (ZERO, ONE, ZERO, ZERO),
        Axis::Minus => (ZERO, ZERO, ONE, ZERO),
    };
    CMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

/// `I_{k,axis}` embedded in the two-spin space.
pub fn spin_operator(spin: Spin, axis: Axis) -> CMatrix {
    let op = single_spin(axis);
    let id = linalg::identity(2);
    match spin {
        Spin::First => linalg::kron(&op, &id),
        Spin::Second => linalg::kron(&id, &op),
    }
}

/// `I1z + I2z`.
pub fn total_z() -> CMatrix {
    spin_operator(Spin::First, Axis::Z) + spin_operator(Spin::Second, Axis::Z)
}

/// `I⃗1 · I⃗2`.
pub fn scalar_product() -> CMatrix {
    [Axis::X, Axis::Y, Axis::Z]
        .iter()
        .map(|&a| spin_operator(Spin::First, a) * spin_operator(Spin::Second, a))
        .fold(CMatrix::zeros(DIM, DIM), |acc, m| acc + m)
}

/// Rank-2 irreducible spherical tensor `T_{2m}(I⃗1, I⃗2)`.
pub fn spherical_tensor(m: i32) -> Result<CMatrix> {
    use Axis::*;
    use Spin::*;
    let s = spin_operator;
    Ok(match m {
        0 => (s(First, Z) * s(Second, Z) * re(3.0) - scalar_product()) * re(1.0 / 6f64.sqrt()),
        1 => (s(First, Plus) * s(Second, Z) + s(First, Z) * s(Second, Plus)) * re(-0.5),
        -1 => (s(First, Minus) * s(Second, Z) + s(First, Z) * s(Second, Minus)) * re(0.5),
        2 => s(First, Plus) * s(Second, Plus) * re(0.5),
        -2 => s(First, Minus) * s(Second, Minus) * re(0.5),
        _ => return Err(Error::Domain(format!("spherical tensor order m = {m} outside −2..=2"))),
    })
}

/// Rank-2 tensor `T_{2m}(ẑ, I⃗_spin)` coupling the static field direction to
/// one spin (chemical-shift anisotropy). The field is the unit vector along
/// `z`, so `|m| = 2` vanishes.
pub fn field_spin_tensor(m: i32, spin: Spin) -> Result<CMatrix> {
    Ok(match m {
        0 => spin_operator(spin, Axis::Z) * re(2.0 / 6f64.sqrt()),
        1 => spin_operator(spin, Axis::Plus) * re(-0.5),
        -1 => spin_operator(spin, Axis::Minus) * re(0.5),
        2 | -2 => CMatrix::zeros(DIM, DIM),
        _ => return Err(Error::Domain(format!("spherical tensor order m = {m} outside −2..=2"))),
    })
}

fn pulse_generator(axis: PulseAxis, target: PulseTarget) -> CMatrix {
    let (base, sign) = match axis {
        PulseAxis::X => (Axis::X, 1.0),
        PulseAxis::Y => (Axis::Y, 1.0),
        PulseAxis::MinusX => (Axis::X, -1.0),
        PulseAxis::MinusY => (Axis::Y, -1.0),
    };
    let op = match target {
        PulseTarget::First => spin_operator(Spin::First, base),
        PulseTarget::Second => spin_operator(Spin::Second, base),
        PulseTarget::Both => spin_operator(Spin::First, base) + spin_operator(Spin::Second, base),
    };
    op * re(sign)
}

/// Hard pulse `exp(−i·angle·I_axis)` on the chosen spin(s).
pub fn rotation_pulse(angle: f64, axis: PulseAxis, target: PulseTarget) -> CMatrix {
    // generator has eigenvalues in {−1, −½, 0, ½, 1}; diagonalize instead of Padé
    let g = pulse_generator(axis, target);
    let (vals, vecs) = linalg::hermitian_eigen(&g);
    let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(DIM, vals.iter().map(|&v| (-I * angle * v).exp())));
    &vecs * phases * vecs.adjoint()
}

/// `U ρ U†`.
pub fn conjugate(u: &CMatrix, rho: &CMatrix) -> CMatrix {
    u * rho * u.adjoint()
}

/// Total magnetic quantum number of basis state `index` (bits `ab`).
pub fn magnetic_number(index: usize) -> i32 {
    let a = ((index >> 1) & 1) as i32;
    let b = (index & 1) as i32;
    1 - a - b
}

/// Coherence order of the matrix element `|row⟩⟨col|`.
pub fn coherence_order(row: usize, col: usize) -> i32 {
    COHERENCE_SIGN * (magnetic_number(row) - magnetic_number(col))
}

/// Split a 4×4 operator into its coherence-order components, orders −2..=2
/// in ascending order. The components sum to the input.
pub fn coherence_decompose(m: &CMatrix) -> Vec<CoherenceComponent> {
    assert_eq!(m.shape(), (DIM, DIM), "coherence decomposition expects a 4×4 operator");
    (-2..=2)
        .map(|order| CoherenceComponent {
            order,
            component: CMatrix::from_fn(DIM, DIM, |r, c| if coherence_order(r, c) == order { m[(r, c)] } else { ZERO }),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{approx_eq, commutator, max_abs, OPERATOR_TOL};
    use std::f64::consts::PI;

    fn basis_ket(i: usize) -> nalgebra::DVector<C64> {
        let mut v = nalgebra::DVector::zeros(DIM);
        v[i] = ONE;
        v
    }

    #[test]
    fn iz_first_spin_is_diag() {
        let expected = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![re(0.5), re(0.5), re(-0.5), re(-0.5)]));
        assert_eq!(spin_operator(Spin::First, Axis::Z), expected);
    }

    #[test]
    fn su2_commutation() {
        for spin in [Spin::First, Spin::Second] {
            let x = spin_operator(spin, Axis::X);
            let y = spin_operator(spin, Axis::Y);
            let z = spin_operator(spin, Axis::Z);
            assert!(approx_eq(&commutator(&x, &y), &(z.clone() * I), OPERATOR_TOL));
            assert!(approx_eq(&commutator(&y, &z), &(x.clone() * I), OPERATOR_TOL));
            assert!(approx_eq(&commutator(&z, &x), &(y * I), OPERATOR_TOL));
        }
    }

    #[test]
    fn second_spin_raising_columns() {
        // oracle: elementwise Kronecker expansion of 𝟙 ⊗ [[0,1],[0,0]]
        let p = spin_operator(Spin::Second, Axis::Plus);
        let mut oracle = CMatrix::zeros(4, 4);
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        let id = if a == c { 1.0 } else { 0.0 };
                        let raise = if b == 0 && d == 1 { 1.0 } else { 0.0 };
                        oracle[(2 * a + b, 2 * c + d)] = re(id * raise);
                    }
                }
            }
        }
        assert_eq!(p, oracle);
        assert_eq!(&p * basis_ket(1), basis_ket(0));
        assert_eq!(&p * basis_ket(3), basis_ket(2));
        assert_eq!((&p * basis_ket(0)).norm(), 0.0);
        assert_eq!((&p * basis_ket(2)).norm(), 0.0);
    }

    #[test]
    fn t0_matches_literal_closed_form() {
        let t0 = spherical_tensor(0).unwrap();
        let z1 = spin_operator(Spin::First, Axis::Z);
        let z2 = spin_operator(Spin::Second, Axis::Z);
        let mut dot = CMatrix::zeros(4, 4);
        for a in [Axis::X, Axis::Y, Axis::Z] {
            dot += spin_operator(Spin::First, a) * spin_operator(Spin::Second, a);
        }
        let oracle = (z1 * z2 * re(3.0) - dot) / re(6f64.sqrt());
        assert!(approx_eq(&t0, &oracle, OPERATOR_TOL));
        // ⟨00|T0|00⟩ = (3/4 − 1/4)/√6
        assert!((t0[(0, 0)] - re(0.5 / 6f64.sqrt())).norm() < 1e-15);
        // flip-flop ⟨01|T0|10⟩ = −(1/2)/√6
        assert!((t0[(1, 2)] - re(-0.5 / 6f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn t2_single_entry() {
        let t2 = spherical_tensor(2).unwrap();
        let nonzero: Vec<_> = t2.iter().filter(|z| z.norm() > 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(t2[(0, 3)], re(0.5));
    }

    #[test]
    fn adjoint_relations() {
        let t = |m| spherical_tensor(m).unwrap();
        assert!(approx_eq(&t(0), &t(0).adjoint(), OPERATOR_TOL));
        assert!(approx_eq(&t(2), &t(-2).adjoint(), OPERATOR_TOL));
        assert!(approx_eq(&t(1), &(t(-1).adjoint() * re(-1.0)), OPERATOR_TOL));
        assert!(matches!(spherical_tensor(3), Err(Error::Domain(_))));
        assert!(matches!(field_spin_tensor(-3, Spin::First), Err(Error::Domain(_))));
    }

    #[test]
    fn tensors_carry_their_coherence_order() {
        let fz = total_z();
        for m in -2..=2 {
            let t = spherical_tensor(m).unwrap();
            let lhs = commutator(&fz, &t);
            assert!(approx_eq(&lhs, &(t.clone() * re((COHERENCE_SIGN * m) as f64)), 0.0));
            let comps = coherence_decompose(&t);
            for c in comps {
                let expect_nonzero = c.order == m;
                assert_eq!(max_abs(&c.component) > 0.0, expect_nonzero, "m = {m}, order {}", c.order);
            }
        }
    }

    #[test]
    fn tensors_are_trace_orthogonal() {
        for m in -2..=2 {
            for k in -2..=2 {
                if m == k {
                    continue;
                }
                let a = spherical_tensor(m).unwrap();
                let b = spherical_tensor(k).unwrap();
                assert!((a.adjoint() * b).trace().norm() < 1e-12);
            }
        }
    }

    #[test]
    fn pulses() {
        let id = rotation_pulse(0.0, PulseAxis::X, PulseTarget::Both);
        assert!(approx_eq(&id, &linalg::identity(4), OPERATOR_TOL));

        let u = rotation_pulse(PI, PulseAxis::X, PulseTarget::First);
        let z1 = spin_operator(Spin::First, Axis::Z);
        assert!(approx_eq(&conjugate(&u, &z1), &(z1.clone() * re(-1.0)), OPERATOR_TOL));

        let theta = 0.37;
        let u = rotation_pulse(theta, PulseAxis::Y, PulseTarget::Both);
        let x = spin_operator(Spin::First, Axis::X) + spin_operator(Spin::Second, Axis::X);
        let expected = total_z() * re(theta.cos()) + x * re(theta.sin());
        assert!(approx_eq(&conjugate(&u, &total_z()), &expected, OPERATOR_TOL));
    }

    #[test]
    fn decomposition_examples() {
        let comps = coherence_decompose(&total_z());
        for c in &comps {
            assert_eq!(max_abs(&c.component) > 0.0, c.order == 0);
        }
        // I2y has four nonzero entries, (0,1),(1,0),(2,3),(3,2); rows with the
        // second spin up minus rows with it down give orders ±1
        let y2 = spin_operator(Spin::Second, Axis::Y);
        let comps = coherence_decompose(&y2);
        for c in &comps {
            let nz = c.component.iter().filter(|z| z.norm() > 0.0).count();
            let expected = match c.order {
                1 | -1 => 2,
                _ => 0,
            };
            assert_eq!(nz, expected, "order {}", c.order);
        }
        assert_eq!(coherence_order(0, 1), 1);
        assert_eq!(coherence_order(1, 0), -1);
        assert_eq!(coherence_order(0, 3), 2);
        assert_eq!(coherence_order(1, 2), 0);
    }
}
