//! The Hardy space of the circle in the Fourier basis: the projection onto
//! nonnegative modes, Laurent blocks and the Toeplitz index.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{IndexError, Result};
use crate::numerics::{
    converge_index, diag_matrix, kernel_dim_mat, GrowthPolicy, IndexReport, OperatorBlock, TruncationWindow, CMat,
};
use crate::pairing::zeta_dense;
use crate::symbols::{winding_number, FourierMatrixSeries};

/// `P`: projection onto modes `n >= 0`.
pub fn hardy_projector(window: &TruncationWindow) -> OperatorBlock {
    let d: Vec<f64> = window.chi(0).iter().map(|&c| if c > 0.0 { 1.0 } else { 0.0 }).collect();
    OperatorBlock { window: window.clone(), mat: diag_matrix(&d) }
}

/// The finite section of the Laurent operator of `phi`: block `(m, n)` is
/// `phi_hat(m - n)`. Fails when the series does not fit inside the window.
pub fn laurent_block(series: &FourierMatrixSeries, window: &TruncationWindow) -> Result<OperatorBlock> {
    if series.size() != window.components {
        return Err(IndexError::Dimension(format!(
            "size-{} symbol on a {}-component window",
            series.size(),
            window.components
        )));
    }
    if series.bandwidth() >= window.span() {
        return Err(IndexError::Range(format!(
            "symbol bandwidth {} does not fit a window of span {}",
            series.bandwidth(),
            window.span()
        )));
    }
    let l = window.components;
    let mut mat = CMat::zeros(window.dim(), window.dim());
    for m in window.mode_lo..=window.mode_hi {
        for (mu, c) in series.modes() {
            let n = m - mu;
            if !window.contains(n) {
                continue;
            }
            let (r0, c0) = (window.index(m, 0), window.index(n, 0));
            mat.view_mut((r0, c0), (l, l)).copy_from(c);
        }
    }
    Ok(OperatorBlock { window: window.clone(), mat })
}

/// `-zeta(L(phi^-1), L(phi))` with `chi = 2P - 1` on one window.
pub fn toeplitz_index_raw(
    phi: &FourierMatrixSeries,
    phi_inv: &FourierMatrixSeries,
    window: &TruncationWindow,
) -> Result<C64> {
    let a = laurent_block(phi, window)?;
    let b = laurent_block(phi_inv, window)?;
    Ok(-zeta_dense(&b.mat, &a.mat, &window.chi(0))?)
}

/// Index of the Toeplitz operator `P phi P` by the cocycle trace formula,
/// refining from `window` (widened to at least 8 bandwidths) until stable.
pub fn toeplitz_index(
    phi: &FourierMatrixSeries,
    window: &TruncationWindow,
    grid: usize,
    policy: &GrowthPolicy,
) -> Result<IndexReport> {
    let phi_inv = phi.inverse(grid)?;
    let band = phi.bandwidth().max(phi_inv.bandwidth()).max(1);
    let mut start = window.clone();
    while start.mode_hi < 8 * band || -start.mode_lo < 8 * band {
        start = start.doubled();
    }
    converge_index(start, policy, |w| toeplitz_index_raw(phi, &phi_inv, w))
}

#[derive(Clone, Debug, Serialize)]
pub struct GohbergKrein {
    pub winding: i64,
    pub index: i64,
    pub kernel: usize,
    pub cokernel: usize,
}

/// Rectangular section of `P phi P`: modes `0..n` into `0..n + band`, which
/// has the kernel of the full operator for banded symbols.
fn toeplitz_section(phi: &FourierMatrixSeries, n: i64) -> Result<CMat> {
    let (lo, hi) = phi.mode_range();
    if lo < -n || hi > n {
        return Err(IndexError::Range("section too small for the symbol".into()));
    }
    let l = phi.size();
    let rows = (n + hi.max(0)) as usize;
    let mut m = CMat::zeros(rows * l, n as usize * l);
    for col in 0..n {
        for (mu, c) in phi.modes() {
            let row = col + mu;
            if row < 0 || row as usize >= rows {
                continue;
            }
            m.view_mut((row as usize * l, col as usize * l), (l, l)).copy_from(c);
        }
    }
    Ok(m)
}

fn adjoint_series(phi: &FourierMatrixSeries) -> FourierMatrixSeries {
    let mut s = FourierMatrixSeries::new(phi.size());
    for (mu, c) in phi.modes() {
        s.insert(-mu, c.adjoint()).expect("same size");
    }
    s
}

/// Checks `ind(T_phi) = -winding(det phi)` three ways: the cocycle trace
/// formula, the winding number and kernel dimensions of the compression.
pub fn gohberg_krein_check(
    phi: &FourierMatrixSeries,
    window: &TruncationWindow,
    grid: usize,
    policy: &GrowthPolicy,
    tol_rank: f64,
) -> Result<GohbergKrein> {
    let winding = winding_number(&phi.sample(grid))?;
    let index = toeplitz_index(phi, window, grid, policy)?.rounded;
    let n = window.mode_hi.max(8 * phi.bandwidth()).max(64);
    let kernel = kernel_dim_mat(&toeplitz_section(phi, n)?, tol_rank);
    let cokernel = kernel_dim_mat(&toeplitz_section(&adjoint_series(phi), n)?, tol_rank);
    if index != -winding || kernel as i64 - cokernel as i64 != index {
        return Err(IndexError::Falsified(format!(
            "trace formula {index}, winding {winding}, kernel {kernel}, cokernel {cokernel}"
        )));
    }
    if phi.size() == 1 && kernel > 0 && cokernel > 0 {
        return Err(IndexError::Falsified(format!(
            "scalar Toeplitz operator with kernel {kernel} and cokernel {cokernel}"
        )));
    }
    Ok(GohbergKrein { winding, index, kernel, cokernel })
}
