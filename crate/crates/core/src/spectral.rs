//! Coherence-sector restrictions of the Liouvillian and biorthogonal mode
//! decompositions of non-Hermitian generators.

use crate::error::{Error, Result};
use crate::linalg::{self, re, CMatrix, CVector, C64, ZERO};
use crate::relaxation::Superoperator;
use crate::spin_algebra::{coherence_order, DIM};
use crate::state::{DensityMatrix, PopulationVector};

/// Relative threshold (in units of the generator scale) for the λ = 0 mode.
pub const STATIONARY_TOL: f64 = 1e-10;
/// Relative eigenvalue gap below which a pair is flagged as near-degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;

/// Vector indices of `|00⟩⟨00|, |01⟩⟨01|, |10⟩⟨10|, |11⟩⟨11|`.
pub fn population_indices() -> [usize; 4] {
    [0, 1, 2, 3].map(|k| linalg::vec_index(k, k, DIM))
}

/// Population indices followed by `|01⟩⟨10|` (c) and `|10⟩⟨01|` (c*).
pub fn zero_quantum_indices() -> [usize; 6] {
    let p = population_indices();
    [p[0], p[1], p[2], p[3], linalg::vec_index(1, 2, DIM), linalg::vec_index(2, 1, DIM)]
}

/// Vector indices of all elements with the given coherence order.
pub fn coherence_sector_indices(order: i32) -> Vec<usize> {
    let mut idx = Vec::new();
    for c in 0..DIM {
        for r in 0..DIM {
            if coherence_order(r, c) == order {
                idx.push(linalg::vec_index(r, c, DIM));
            }
        }
    }
    idx
}

/// Principal submatrix on `indices`.
pub fn restrict(l: &Superoperator, indices: &[usize]) -> Result<Superoperator> {
    let m = l.matrix();
    if indices.iter().any(|&i| i >= m.nrows()) {
        return Err(Error::Usage("restriction index out of range".into()));
    }
    Superoperator::from_matrix(CMatrix::from_fn(indices.len(), indices.len(), |a, b| m[(indices[a], indices[b])]))
}

fn require_full(l: &Superoperator) -> Result<()> {
    if l.dim() != DIM * DIM {
        return Err(Error::Usage(format!("expected a 16×16 generator, got {}×{}", l.dim(), l.dim())));
    }
    Ok(())
}

/// Restriction of the full generator to the four populations.
pub fn population_generator(l: &Superoperator) -> Result<Superoperator> {
    require_full(l)?;
    restrict(l, &population_indices())
}

/// Restriction to `(p00, p01, p10, p11, c, c*)`.
pub fn zero_quantum_block(l: &Superoperator) -> Result<Superoperator> {
    require_full(l)?;
    restrict(l, &zero_quantum_indices())
}

/// Largest |entry| of `L` coupling different coherence orders. Zero for a
/// generator with the Redfield-kite block structure.
pub fn off_block_norm(l: &Superoperator) -> Result<f64> {
    require_full(l)?;
    let m = l.matrix();
    let order_of = |idx: usize| coherence_order(idx % DIM, idx / DIM);
    let mut worst = 0.0_f64;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if order_of(r) != order_of(c) {
                worst = worst.max(m[(r, c)].norm());
            }
        }
    }
    Ok(worst)
}

/// Eigenvalues with biorthonormal right (`v_n`) and left (`w_n`) vectors,
/// `w_m · v_n = δ_mn` (plain bilinear product), sorted by descending real
/// part.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecomposition {
    eigenvalues: Vec<C64>,
    right: Vec<CVector>,
    left: Vec<CVector>,
    stationary_index: Option<usize>,
    near_degenerate: Vec<(usize, usize)>,
    scale: f64,
}

impl ModeDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn right_vectors(&self) -> &[CVector] {
        &self.right
    }

    pub fn left_vectors(&self) -> &[CVector] {
        &self.left
    }

    /// Index of the λ = 0 mode, if exactly one exists.
    pub fn stationary_index(&self) -> Option<usize> {
        self.stationary_index
    }

    /// Index of the slowest decaying (non-stationary) mode.
    pub fn slowest_decay_index(&self) -> Option<usize> {
        (0..self.dim()).find(|&k| Some(k) != self.stationary_index)
    }

    /// Pairs of modes whose eigenvalues lie closer than the degeneracy gap.
    pub fn near_degenerate_pairs(&self) -> &[(usize, usize)] {
        &self.near_degenerate
    }

    pub fn is_degenerate(&self) -> bool {
        !self.near_degenerate.is_empty()
    }

    /// Magnitude used for the relative thresholds (largest |entry| of G).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `Σ_n v_n (w_n · x)`.
    pub fn reconstruct(&self, x: &CVector) -> CVector {
        self.right.iter().zip(&self.left).fold(CVector::zeros(x.len()), |acc, (v, w)| acc + v * w.dot(x))
    }

    /// `Σ_n a_n e^{λ_n t} v_n`.
    pub fn evolve(&self, coefficients: &[C64], t: f64) -> CVector {
        let n = self.dim();
        self.right
            .iter()
            .zip(coefficients)
            .zip(&self.eigenvalues)
            .fold(CVector::zeros(n), |acc, ((v, a), lam)| acc + v * (a * (lam * t).exp()))
    }
}

fn normalize_phase(v: &mut CVector) {
    let norm = v.norm();
    let threshold = 1e-12 * norm;
    let pivot = v.iter().copied().find(|z| z.norm() > threshold).unwrap_or(ZERO);
    if pivot.norm() > 0.0 {
        let phase = pivot.conj() / pivot.norm();
        *v *= phase;
    }
    // snap the pivot to the real axis exactly
    if let Some(z) = v.iter_mut().find(|z| z.norm() > threshold) {
        z.im = 0.0;
    }
    let norm = v.norm();
    *v /= re(norm);
}

/// Complete biorthonormal spectrum of a square generator.
pub fn eigendecompose(g: &Superoperator) -> Result<ModeDecomposition> {
    let m = g.matrix();
    let n = m.nrows();
    let (vals, vecs) = linalg::general_eigen(m)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].re.total_cmp(&vals[a].re).then(vals[b].im.total_cmp(&vals[a].im)));
    let eigenvalues: Vec<C64> = order.iter().map(|&k| vals[k]).collect();
    let mut vmat = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut v = vecs.column(src).into_owned();
        normalize_phase(&mut v);
        vmat.set_column(dst, &v);
    }
    let wmat = vmat
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("right eigenvector matrix is singular (defective generator)".into()))?;
    if !linalg::is_finite(&wmat) {
        return Err(Error::Degenerate("left eigenvectors are not finite".into()));
    }

    let scale = linalg::max_abs(m).max(f64::MIN_POSITIVE);
    let zero_modes: Vec<usize> = (0..n).filter(|&k| eigenvalues[k].norm() <= STATIONARY_TOL * scale).collect();
    let stationary_index = (zero_modes.len() == 1).then(|| zero_modes[0]);

    let mut near_degenerate = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if (eigenvalues[a] - eigenvalues[b]).norm() < DEGENERACY_GAP * scale {
                near_degenerate.push((a, b));
            }
        }
    }
    if !near_degenerate.is_empty() {
        log::warn!("near-degenerate eigenvalue pairs: {near_degenerate:?}");
    }

    let right = (0..n).map(|k| vmat.column(k).into_owned()).collect();
    let left = (0..n).map(|k| wmat.row(k).transpose()).collect();
    Ok(ModeDecomposition { eigenvalues, right, left, stationary_index, near_degenerate, scale })
}

/// Overlaps `a_n = w_n · p(0)`.
pub fn overlaps(md: &ModeDecomposition, p0: &PopulationVector) -> Result<Vec<C64>> {
    if md.dim() != p0.len() {
        return Err(Error::Usage(format!(
            "decomposition of dimension {} cannot weigh a {}-component population",
            md.dim(),
            p0.len()
        )));
    }
    let x = p0.to_cvector();
    Ok(md.left.iter().map(|w| w.dot(&x)).collect())
}

/// Null vector of the full generator as a trace-one Hermitian state.
pub fn stationary_state(l: &Superoperator) -> Result<DensityMatrix> {
    let n = l.operator_dim().ok_or_else(|| Error::Usage("generator does not act on square operators".into()))?;
    let svd = l.matrix().clone().svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Numerical("SVD did not return right singular vectors".into()))?;
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .ok_or_else(|| Error::Numerical("empty spectrum".into()))?;
    let v = v_t.row(k).adjoint();
    let rho = linalg::unvectorize(&v, n);
    let tr = rho.trace();
    if tr.norm() < 1e-300 {
        return Err(Error::Numerical("null vector is traceless".into()));
    }
    let rho = rho / tr;
    let rho = (&rho + rho.adjoint()) * re(0.5);
    DensityMatrix::new(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_index_sets_partition_the_space() {
        let mut all: Vec<usize> = (-2..=2).flat_map(coherence_sector_indices).collect();
        all.sort_unstable();
        assert_eq!(all, (0..16).collect::<Vec<_>>());
        assert_eq!(coherence_sector_indices(0).len(), 6);
        assert_eq!(coherence_sector_indices(1).len(), 4);
        assert_eq!(coherence_sector_indices(2).len(), 1);
        let zq = zero_quantum_indices();
        assert_eq!(zq[4], 9);
        assert_eq!(zq[5], 6);
    }

    #[test]
    fn defective_matrix_flagged() {
        // Jordan block
        let m = CMatrix::from_row_slice(2, 2, &[re(-1.0), re(1.0), ZERO, re(-1.0)]);
        let g = Superoperator::from_matrix(m).unwrap();
        match eigendecompose(&g) {
            Ok(md) => assert!(md.is_degenerate()),
            Err(e) => assert!(matches!(e, Error::Degenerate(_))),
        }
    }

    #[test]
    fn overlaps_dimension_mismatch() {
        let g = Superoperator::from_matrix(CMatrix::from_row_slice(2, 2, &[re(-1.0), re(1.0), re(1.0), re(-1.0)])).unwrap();
        let md = eigendecompose(&g).unwrap();
        let p = PopulationVector::new(vec![0.25; 4]).unwrap();
        assert!(matches!(overlaps(&md, &p), Err(Error::Usage(_))));
        assert_eq!(md.stationary_index(), Some(0));
    }
}
