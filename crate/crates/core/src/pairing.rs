//! The Roe cocycle `zeta(A, B) = 1/4 Tr(chi [chi, A] [chi, B])`, the index
//! `ind(P u P) = -zeta(u^-1, u)` and the pairing
//! `(1/8 pi i) sum_{i,j} zeta((u^-1)_{ji}, u_{ij})`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::cylinder::{spectral_model, CylinderWindow};
use crate::error::{IndexError, Result};
use crate::hardy::toeplitz_index;
use crate::kron::{kron_inverse_defect, kron_two_trace, kron_zeta, Entry, Interior, KronOperator};
use crate::lattice::{lattice_model, Lattice};
use crate::numerics::{
    converge_index, diag_commutator, diag_matrix, integer_residual, CMat, GrowthPolicy, OperatorBlock,
    TruncationWindow,
};
use crate::symbols::FourierMatrixSeries;

fn check_chi(a: &CMat, b: &CMat, chi: &[f64]) -> Result<()> {
    let n = chi.len();
    if a.shape() != (n, n) || b.shape() != (n, n) {
        return Err(IndexError::Dimension(format!(
            "cut of length {n} against {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// `zeta(A, B)` via `-sum_{i+, j-} A_ij B_ji + sum_{i-, j+} A_ij B_ji`.
pub fn zeta_dense(a: &CMat, b: &CMat, chi: &[f64]) -> Result<C64> {
    check_chi(a, b, chi)?;
    Ok(crate::kron::cross_zeta(a, b, chi))
}

/// `zeta(A, B)` evaluated literally as `1/4 Tr(chi [chi, A] [chi, B])`.
pub fn zeta_commutator_form(a: &CMat, b: &CMat, chi: &[f64]) -> Result<C64> {
    check_chi(a, b, chi)?;
    let ca = diag_commutator(a, chi)?;
    let cb = diag_commutator(b, chi)?;
    Ok((diag_matrix(chi) * ca * cb).trace() / 4.0)
}

pub fn zeta(a: &OperatorBlock, b: &OperatorBlock, chi: &[f64]) -> Result<C64> {
    if a.window != b.window {
        return Err(IndexError::WindowMismatch(format!("{:?} vs {:?}", a.window, b.window)));
    }
    zeta_dense(&a.mat, &b.mat, chi)
}

#[derive(Clone, Debug, Serialize)]
pub struct CocycleReport {
    /// `|zeta(A, B) + zeta(B, A)|`
    pub antisymmetry: f64,
    /// `|zeta(AB, C) - zeta(A, BC) + zeta(CA, B)|`
    pub hochschild: f64,
}

pub fn cocycle_identity_check(a: &OperatorBlock, b: &OperatorBlock, c: &OperatorBlock, chi: &[f64]) -> Result<CocycleReport> {
    let ab = a.compose(b)?;
    let bc = b.compose(c)?;
    let ca = c.compose(a)?;
    let antisymmetry = (zeta(a, b, chi)? + zeta(b, a, chi)?).norm();
    let hochschild = (zeta(&ab, c, chi)? - zeta(a, &bc, chi)? + zeta(&ca, b, chi)?).norm();
    Ok(CocycleReport { antisymmetry, hochschild })
}

/// Operators on which the cut traces can be evaluated.
pub trait CutOperator: Sized {
    type Interior;
    fn zeta_with(&self, other: &Self, chi: &[f64]) -> Result<C64>;
    /// `Tr(P - P self P a P) - Tr(P - P a P self P)` over interior rows.
    fn two_trace_with(&self, a: &Self, chi: &[f64], interior: &Self::Interior) -> Result<C64>;
    /// Largest entry of `self a - 1` over interior rows and columns.
    fn inverse_defect(&self, a: &Self, interior: &Self::Interior) -> Result<f64>;
    fn components(&self) -> usize;
    fn component(&self, i: usize, j: usize) -> Self;
    /// The cut seen by a single component.
    fn component_chi(&self, chi: &[f64]) -> Vec<f64>;
}

impl CutOperator for OperatorBlock {
    type Interior = Vec<bool>;

    fn zeta_with(&self, other: &Self, chi: &[f64]) -> Result<C64> {
        zeta(self, other, chi)
    }

    fn two_trace_with(&self, a: &Self, chi: &[f64], interior: &Vec<bool>) -> Result<C64> {
        if self.window != a.window {
            return Err(IndexError::WindowMismatch(format!("{:?} vs {:?}", self.window, a.window)));
        }
        check_chi(&self.mat, &a.mat, chi)?;
        let pos: Vec<usize> = (0..chi.len()).filter(|&i| chi[i] > 0.0).collect();
        let half = |x: &CMat, y: &CMat| {
            let mut acc = C64::new(0.0, 0.0);
            for &i in pos.iter().filter(|&&i| interior[i]) {
                let mut s = C64::new(0.0, 0.0);
                for &j in &pos {
                    s += x[(i, j)] * y[(j, i)];
                }
                acc += 1.0 - s;
            }
            acc
        };
        Ok(half(&self.mat, &a.mat) - half(&a.mat, &self.mat))
    }

    fn inverse_defect(&self, a: &Self, interior: &Vec<bool>) -> Result<f64> {
        let p = self.compose(a)?;
        let n = p.dim();
        let mut worst: f64 = 0.0;
        for i in (0..n).filter(|&i| interior[i]) {
            for j in (0..n).filter(|&j| interior[j]) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p.mat[(i, j)] - target).norm());
            }
        }
        Ok(worst)
    }

    fn components(&self) -> usize {
        self.window.components
    }

    fn component(&self, i: usize, j: usize) -> Self {
        let w = TruncationWindow { components: 1, ..self.window.clone() };
        let l = self.window.components;
        let m = w.modes();
        let mat = CMat::from_fn(m, m, |r, c| self.mat[(r * l + i, c * l + j)]);
        OperatorBlock { window: w, mat }
    }

    fn component_chi(&self, chi: &[f64]) -> Vec<f64> {
        chi.iter().step_by(self.window.components).copied().collect()
    }
}

impl<S: Entry> CutOperator for KronOperator<S> {
    type Interior = Interior;

    fn zeta_with(&self, other: &Self, chi: &[f64]) -> Result<C64> {
        kron_zeta(self, other, chi)
    }

    fn two_trace_with(&self, a: &Self, chi: &[f64], interior: &Interior) -> Result<C64> {
        kron_two_trace(self, a, chi, interior)
    }

    fn inverse_defect(&self, a: &Self, interior: &Interior) -> Result<f64> {
        kron_inverse_defect(self, a, interior)
    }

    fn components(&self) -> usize {
        self.components
    }

    fn component(&self, i: usize, j: usize) -> Self {
        KronOperator::component(self, i, j)
    }

    fn component_chi(&self, chi: &[f64]) -> Vec<f64> {
        chi.to_vec()
    }
}

/// An invertible operator, its (truncated) inverse and a cut.
/// For operator blocks `chi` covers the whole window; for Kronecker operators
/// it is the spatial cut.
#[derive(Clone, Debug)]
pub struct PartitionedOperatorModel<Op: CutOperator> {
    pub u: Op,
    pub u_inv: Op,
    pub chi: Vec<f64>,
    pub interior: Op::Interior,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZetaIndex {
    /// `-zeta(u^-1, u)`
    pub raw: [f64; 2],
    /// Fedosov two-trace form on the interior.
    pub two_trace: [f64; 2],
    pub agreement: f64,
}

impl ZetaIndex {
    pub fn raw_c(&self) -> C64 {
        C64::new(self.raw[0], self.raw[1])
    }
}

/// `ind(P u P) = -zeta(u^-1, u)`, cross-checked against the two-trace form.
pub fn index_from_zeta<Op: CutOperator>(model: &PartitionedOperatorModel<Op>, tol_agree: f64) -> Result<ZetaIndex> {
    let raw = -model.u_inv.zeta_with(&model.u, &model.chi)?;
    let tt = model.u_inv.two_trace_with(&model.u, &model.chi, &model.interior)?;
    let agreement = (raw - tt).norm();
    if agreement > tol_agree {
        return Err(IndexError::EdgeContamination(format!(
            "cocycle {raw:.9} vs two-trace {tt:.9}; grow the window"
        )));
    }
    Ok(ZetaIndex { raw: [raw.re, raw.im], two_trace: [tt.re, tt.im], agreement })
}

/// `(1/8 pi i) sum_{i,j} zeta((u^-1)_{ji}, u_{ij})` over symbol components.
pub fn pairing<Op: CutOperator>(model: &PartitionedOperatorModel<Op>) -> Result<C64> {
    let l = model.u.components();
    let chi = model.u.component_chi(&model.chi);
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..l {
        for j in 0..l {
            acc += model.u_inv.component(j, i).zeta_with(&model.u.component(i, j), &chi)?;
        }
    }
    Ok(acc / C64::new(0.0, 8.0 * PI))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Spectral,
    Lattice,
}

#[derive(Clone, Debug)]
pub struct PairingConfig {
    pub toeplitz_window: TruncationWindow,
    pub grid: usize,
    pub cylinder: CylinderWindow,
    pub lattice: Lattice,
    pub cut: f64,
    pub policy: GrowthPolicy,
}

impl PairingConfig {
    pub fn for_symbol(phi: &FourierMatrixSeries) -> Result<Self> {
        Ok(Self {
            toeplitz_window: TruncationWindow::symmetric(32, phi.size())?,
            grid: crate::symbols::DEFAULT_GRID,
            cylinder: CylinderWindow::default_for(phi.size()),
            lattice: Lattice::default(),
            cut: 0.0,
            policy: GrowthPolicy::default(),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BackendPairing {
    pub backend: Backend,
    pub pairing: [f64; 2],
    /// `8 pi i * pairing`
    pub scaled: [f64; 2],
    /// `|8 pi i pairing + ind(T_phi)|`
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MainTheoremReport {
    pub toeplitz_index: i64,
    pub backends: Vec<BackendPairing>,
    pub pass: bool,
}

/// Compares `8 pi i <[phi], u_phi>` with `-ind(T_phi)` on each backend.
pub fn main_theorem_check(
    phi: &FourierMatrixSeries,
    backends: &[Backend],
    config: &PairingConfig,
) -> Result<MainTheoremReport> {
    let t = toeplitz_index(phi, &config.toeplitz_window, config.grid, &config.policy)?.rounded;
    let target = C64::new(-(t as f64), 0.0);
    let phi_inv = phi.inverse(config.grid)?;
    let mut out = Vec::new();
    for &b in backends {
        let scaled = match b {
            Backend::Spectral => {
                let model = spectral_model(phi, &phi_inv, &config.cylinder)?;
                pairing(&model)? * C64::new(0.0, 8.0 * PI)
            }
            Backend::Lattice => {
                let report = converge_index(config.lattice.clone(), &config.policy, |lat| {
                    let model = lattice_model(phi, &phi_inv, lat, config.cut)?;
                    Ok(pairing(&model)? * C64::new(0.0, 8.0 * PI))
                })?;
                report.raw_c()
            }
        };
        let residual = (scaled - target).norm();
        let p = scaled / C64::new(0.0, 8.0 * PI);
        out.push(BackendPairing {
            backend: b,
            pairing: [p.re, p.im],
            scaled: [scaled.re, scaled.im],
            residual,
            pass: residual < config.policy.tol_integer && integer_residual(scaled) < config.policy.tol_integer,
        });
    }
    let pass = out.iter().all(|b| b.pass);
    Ok(MainTheoremReport { toeplitz_index: t, backends: out, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardy::laurent_block;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn banded(rng: &mut ChaCha8Rng, w: &TruncationWindow, band: usize) -> OperatorBlock {
        let n = w.dim();
        let mat = CMat::from_fn(n, n, |i, j| {
            if i.abs_diff(j) <= band {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            } else {
                C64::new(0.0, 0.0)
            }
        });
        OperatorBlock::new(w.clone(), mat).unwrap()
    }

    #[test]
    fn fast_and_literal_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = TruncationWindow::symmetric(6, 1).unwrap();
        let a = banded(&mut rng, &w, 3);
        let b = banded(&mut rng, &w, 2);
        let chi = w.chi(0);
        let f = zeta_dense(&a.mat, &b.mat, &chi).unwrap();
        let l = zeta_commutator_form(&a.mat, &b.mat, &chi).unwrap();
        assert!((f - l).norm() < 1e-12);
    }

    #[test]
    fn shift_cocycle_is_one() {
        let w = TruncationWindow::symmetric(5, 1).unwrap();
        let z = laurent_block(&FourierMatrixSeries::monomial(1), &w).unwrap();
        let zi = laurent_block(&FourierMatrixSeries::monomial(-1), &w).unwrap();
        let v = zeta(&zi, &z, &w.chi(0)).unwrap();
        assert!((v - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn identity_pairs_to_zero() {
        let w = TruncationWindow::symmetric(5, 1).unwrap();
        let id = OperatorBlock::identity(w.clone());
        let c = cocycle_identity_check(&id, &id, &id, &w.chi(0)).unwrap();
        assert!(c.antisymmetry < 1e-15 && c.hochschild < 1e-15);
        assert_eq!(zeta(&id, &id, &w.chi(0)).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn window_mismatch_is_rejected() {
        let a = OperatorBlock::identity(TruncationWindow::symmetric(2, 1).unwrap());
        let b = OperatorBlock::identity(TruncationWindow::symmetric(3, 1).unwrap());
        assert!(matches!(zeta(&a, &b, &[1.0; 5]), Err(IndexError::WindowMismatch(_))));
    }

    #[test]
    fn two_trace_form_matches_on_interior() {
        let phi = FourierMatrixSeries::perturbed_monomial(2, 0.3, 1);
        let inv = phi.inverse(256).unwrap();
        let w = TruncationWindow::symmetric(64, 1).unwrap();
        let interior: Vec<bool> = (0..w.dim()).map(|i| w.mode_of(i).abs() <= 32).collect();
        let model = PartitionedOperatorModel {
            u: laurent_block(&phi, &w).unwrap(),
            u_inv: laurent_block(&inv, &w).unwrap(),
            chi: w.chi(0),
            interior,
        };
        let z = index_from_zeta(&model, 1e-6).unwrap();
        assert!((z.raw_c() - C64::new(-2.0, 0.0)).norm() < 1e-8);
        assert!(model.u.inverse_defect(&model.u_inv, &model.interior).unwrap() < 1e-12);
    }

    #[test]
    fn full_window_two_trace_sees_the_edges() {
        let w = TruncationWindow::symmetric(8, 1).unwrap();
        let model = PartitionedOperatorModel {
            u: laurent_block(&FourierMatrixSeries::monomial(1), &w).unwrap(),
            u_inv: laurent_block(&FourierMatrixSeries::monomial(-1), &w).unwrap(),
            chi: w.chi(0),
            interior: vec![true; w.dim()],
        };
        assert!(matches!(index_from_zeta(&model, 1e-6), Err(IndexError::EdgeContamination(_))));
    }

    #[test]
    fn matrix_pairing_sums_components() {
        let phi = FourierMatrixSeries::diagonal_monomials(&[2, -1]);
        let inv = FourierMatrixSeries::diagonal_monomials(&[-2, 1]);
        let w = TruncationWindow::symmetric(10, 2).unwrap();
        let model = PartitionedOperatorModel {
            u: laurent_block(&phi, &w).unwrap(),
            u_inv: laurent_block(&inv, &w).unwrap(),
            chi: w.chi(0),
            interior: vec![true; w.dim()],
        };
        let p = pairing(&model).unwrap() * C64::new(0.0, 8.0 * PI);
        let full = model.u_inv.zeta_with(&model.u, &model.chi).unwrap();
        assert!((p - full).norm() < 1e-12);
        assert!((p - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn cocycle_identities_on_banded_triples(seed in any::<u64>(), n in 3i64..12, band in 0usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = TruncationWindow::symmetric(n, 1).unwrap();
            let (a, b, c) = (banded(&mut rng, &w, band), banded(&mut rng, &w, band), banded(&mut rng, &w, band));
            let r = cocycle_identity_check(&a, &b, &c, &w.chi(0)).unwrap();
            prop_assert!(r.antisymmetry < 1e-8 && r.hochschild < 1e-8, "{:?}", r);
        }
    }
}
