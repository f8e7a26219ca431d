//! Wiener-Hopf operators `P-hat f P-hat` for rational symbols
//! `(t + i beta)/(t + i alpha)` on the line.

use num_complex::Complex64 as C64;

use crate::error::{IndexError, Result};
use crate::line::{mult_matrix, RationalSymbol};
use crate::numerics::{converge_index, CMat, GrowthPolicy, IndexReport, OperatorBlock, TruncationWindow};
use crate::pairing::zeta_dense;

pub type RationalLineSymbol = RationalSymbol;

/// Compression of `mult_matrix(sym)` onto the modes `n >= 0` of `window`.
pub fn wh_block(sym: &RationalSymbol, window: &TruncationWindow) -> Result<OperatorBlock> {
    let full = mult_matrix(sym, window)?;
    let lo = window.mode_lo.max(0);
    if lo > window.mode_hi {
        return Err(IndexError::Range("window has no nonnegative modes".into()));
    }
    let w = TruncationWindow::new(lo, window.mode_hi, 1)?;
    let off = window.index(lo, 0);
    let n = w.dim();
    let mat = CMat::from_fn(n, n, |i, j| full.mat[(off + i, off + j)]);
    OperatorBlock::new(w, mat)
}

/// `-zeta(mult(1/sym), mult(sym))` with the cut at `n = 0`.
pub fn wh_index_raw(sym: &RationalSymbol, window: &TruncationWindow) -> Result<C64> {
    let a = mult_matrix(sym, window)?;
    let b = mult_matrix(&sym.reciprocal(), window)?;
    Ok(-zeta_dense(&b.mat, &a.mat, &window.chi(0))?)
}

pub fn wh_index(sym: &RationalSymbol, window: &TruncationWindow, policy: &GrowthPolicy) -> Result<IndexReport> {
    converge_index(window.clone(), policy, |w| wh_index_raw(sym, w))
}

/// The sign table under test for a single factor: `0` when `alpha beta > 0`,
/// `-1` for `alpha > 0 > beta`, `+1` for `alpha < 0 < beta`.
pub fn stated_wh_index(alpha: f64, beta: f64) -> i64 {
    if alpha * beta > 0.0 {
        0
    } else if alpha > 0.0 {
        -1
    } else {
        1
    }
}

/// Straight-line path in `(alpha, beta)`; fails if either parameter would pass
/// through zero, where the factor stops being invertible.
pub fn wh_homotopy_path(from: (f64, f64), to: (f64, f64), samples: usize) -> Result<Vec<RationalSymbol>> {
    if samples < 2 {
        return Err(IndexError::InvalidParameter("a path needs at least two samples".into()));
    }
    if from.0 * to.0 <= 0.0 || from.1 * to.1 <= 0.0 {
        return Err(IndexError::Homotopy(format!(
            "({}, {}) -> ({}, {}) crosses a zero of alpha or beta",
            from.0, from.1, to.0, to.1
        )));
    }
    (0..samples)
        .map(|j| {
            let s = j as f64 / (samples - 1) as f64;
            RationalSymbol::factor(from.0 + s * (to.0 - from.0), from.1 + s * (to.1 - from.1))
        })
        .collect()
}

/// Indices along a homotopy path; fails as a falsification if they vary.
pub fn wh_homotopy_constancy(
    from: (f64, f64),
    to: (f64, f64),
    samples: usize,
    window: &TruncationWindow,
    policy: &GrowthPolicy,
) -> Result<Vec<i64>> {
    let path = wh_homotopy_path(from, to, samples)?;
    let idx: Vec<i64> = path
        .iter()
        .map(|s| wh_index(s, window, policy).map(|r| r.rounded))
        .collect::<Result<_>>()?;
    if idx.windows(2).any(|w| w[0] != w[1]) {
        return Err(IndexError::Falsified(format!("index varies along the homotopy: {idx:?}")));
    }
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{kernel_dim, TOL_RANK};
    use proptest::prelude::*;

    fn w() -> TruncationWindow {
        TruncationWindow::new(-32, 31, 1).unwrap()
    }

    #[test]
    fn shift_compression_has_one_dimensional_cokernel() {
        let b = wh_block(&RationalSymbol::factor(1.0, -1.0).unwrap(), &w()).unwrap();
        assert_eq!(kernel_dim(&b.adjoint(), TOL_RANK), 1);
        let b = wh_block(&RationalSymbol::factor(-1.0, 1.0).unwrap(), &w()).unwrap();
        assert_eq!(kernel_dim(&b, TOL_RANK), 1);
    }

    #[test]
    fn table_cases() {
        let pol = GrowthPolicy::default();
        for (a, b, want) in [(1.0, -1.0, -1), (-1.0, 1.0, 1), (2.0, 3.0, 0), (-0.5, -4.0, 0)] {
            let sym = RationalSymbol::factor(a, b).unwrap();
            let r = wh_index(&sym, &w(), &pol).unwrap();
            assert_eq!(r.rounded, want, "({a}, {b})");
            assert_eq!(stated_wh_index(a, b), want);
        }
    }

    #[test]
    fn path_through_zero_is_rejected() {
        assert!(matches!(wh_homotopy_path((1.0, -1.0), (-1.0, -1.0), 5), Err(IndexError::Homotopy(_))));
        let idx = wh_homotopy_constancy((1.0, -1.0), (3.0, -0.5), 5, &w(), &GrowthPolicy::default()).unwrap();
        assert_eq!(idx, vec![-1; 5]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn index_matches_table(a in 0.2f64..4.0, b in 0.2f64..4.0, sa in any::<bool>(), sb in any::<bool>()) {
            let (a, b) = (if sa { a } else { -a }, if sb { b } else { -b });
            let sym = RationalSymbol::factor(a, b).unwrap();
            let r = wh_index(&sym, &w(), &GrowthPolicy::default()).unwrap();
            prop_assert_eq!(r.rounded, stated_wh_index(a, b));
        }
    }
}
