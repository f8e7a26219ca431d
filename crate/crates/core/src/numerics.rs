//! Truncated operators and the shared numerical toolkit: kernel dimensions,
//! integer rounding and the window-doubling convergence driver.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{IndexError, Result};

pub type CMat = DMatrix<C64>;

/// Default tolerance for rounding trace-formula values to integers.
pub const TOL_INTEGER: f64 = 1e-2;
/// Tolerance for computations that are exact up to rounding.
pub const TOL_EXACT: f64 = 1e-6;
/// Relative singular-value threshold for numerical rank.
pub const TOL_RANK: f64 = 1e-10;

/// A finite set of Fourier modes `mode_lo..=mode_hi`, each carrying
/// `components` symbol components. Basis vectors are ordered mode-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TruncationWindow {
    pub mode_lo: i64,
    pub mode_hi: i64,
    pub components: usize,
}

impl TruncationWindow {
    pub fn new(mode_lo: i64, mode_hi: i64, components: usize) -> Result<Self> {
        if mode_hi < mode_lo {
            return Err(IndexError::InvalidParameter(format!(
                "empty mode range {mode_lo}..={mode_hi}"
            )));
        }
        if components == 0 {
            return Err(IndexError::InvalidParameter("zero components".into()));
        }
        Ok(Self { mode_lo, mode_hi, components })
    }

    /// Modes `-n..=n`.
    pub fn symmetric(n: i64, components: usize) -> Result<Self> {
        Self::new(-n, n, components)
    }

    pub fn modes(&self) -> usize {
        (self.mode_hi - self.mode_lo + 1) as usize
    }

    pub fn dim(&self) -> usize {
        self.modes() * self.components
    }

    pub fn contains(&self, mode: i64) -> bool {
        (self.mode_lo..=self.mode_hi).contains(&mode)
    }

    pub fn index(&self, mode: i64, component: usize) -> usize {
        (mode - self.mode_lo) as usize * self.components + component
    }

    pub fn mode_of(&self, index: usize) -> i64 {
        self.mode_lo + (index / self.components) as i64
    }

    /// Largest mode difference representable inside the window.
    pub fn span(&self) -> i64 {
        self.mode_hi - self.mode_lo
    }

    /// Sign vector of `2P - 1` where `P` projects onto modes `>= cut`.
    pub fn chi(&self, cut: i64) -> Vec<f64> {
        (0..self.dim())
            .map(|i| if self.mode_of(i) >= cut { 1.0 } else { -1.0 })
            .collect()
    }

    /// Doubles the number of modes on each side of zero.
    pub fn doubled(&self) -> Self {
        let lo = if self.mode_lo < 0 { 2 * self.mode_lo } else { self.mode_lo };
        let hi = if self.mode_hi >= 0 { 2 * self.mode_hi + 1 } else { self.mode_hi };
        Self { mode_lo: lo, mode_hi: hi, components: self.components }
    }
}

/// A complex matrix acting on the span of a truncation window.
#[derive(Clone, Debug)]
pub struct OperatorBlock {
    pub window: TruncationWindow,
    pub mat: CMat,
}

impl OperatorBlock {
    pub fn new(window: TruncationWindow, mat: CMat) -> Result<Self> {
        let n = window.dim();
        if mat.nrows() != n || mat.ncols() != n {
            return Err(IndexError::Dimension(format!(
                "{}x{} matrix on a {n}-dimensional window",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { window, mat })
    }

    pub fn identity(window: TruncationWindow) -> Self {
        let n = window.dim();
        Self { window, mat: CMat::identity(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    fn same_window(&self, other: &Self) -> Result<()> {
        if self.window != other.window {
            return Err(IndexError::WindowMismatch(format!(
                "{:?} vs {:?}",
                self.window, other.window
            )));
        }
        Ok(())
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.same_window(other)?;
        Ok(Self { window: self.window.clone(), mat: &self.mat * &other.mat })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_window(other)?;
        Ok(Self { window: self.window.clone(), mat: &self.mat + &other.mat })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_window(other)?;
        Ok(Self { window: self.window.clone(), mat: &self.mat - &other.mat })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { window: self.window.clone(), mat: &self.mat * c }
    }

    pub fn adjoint(&self) -> Self {
        Self { window: self.window.clone(), mat: self.mat.adjoint() }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// `[D, A]` for the diagonal operator `D = diag(d)`.
    pub fn diag_commutator(&self, d: &[f64]) -> Result<Self> {
        Ok(Self { window: self.window.clone(), mat: diag_commutator(&self.mat, d)? })
    }

    /// Largest singular value.
    pub fn norm(&self) -> f64 {
        spectral_norm(&self.mat)
    }
}

/// `[diag(d), A]`.
pub fn diag_commutator(a: &CMat, d: &[f64]) -> Result<CMat> {
    if a.nrows() != d.len() || a.ncols() != d.len() {
        return Err(IndexError::Dimension(format!(
            "diagonal of length {} against {}x{}",
            d.len(),
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(CMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * (d[i] - d[j])))
}

pub fn diag_matrix(d: &[f64]) -> CMat {
    CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        d.len(),
        d.iter().map(|&x| C64::new(x, 0.0)),
    ))
}

/// Largest singular value of a dense matrix.
pub fn spectral_norm(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

/// Singular values in descending order.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Dimension of the numerical kernel of a (possibly rectangular) matrix:
/// columns minus the number of singular values above `rel_tol * sigma_max`.
pub fn kernel_dim_mat(a: &CMat, rel_tol: f64) -> usize {
    if a.ncols() == 0 {
        return 0;
    }
    if a.nrows() == 0 {
        return a.ncols();
    }
    let s = singular_values(a);
    let smax = s[0];
    if smax == 0.0 {
        return a.ncols();
    }
    let rank = s.iter().filter(|&&x| x > rel_tol * smax).count();
    a.ncols() - rank
}

pub fn kernel_dim(a: &OperatorBlock, rel_tol: f64) -> usize {
    kernel_dim_mat(&a.mat, rel_tol)
}

/// Rounds `x` to the nearest integer, failing when the distance (including the
/// imaginary part) exceeds `tol`.
pub fn round_to_integer(x: C64, tol: f64) -> Result<i64> {
    let n = x.re.round();
    let residual = (x - C64::new(n, 0.0)).norm();
    if !residual.is_finite() || residual > tol {
        return Err(IndexError::NonInteger { value: x.re, residual, tol });
    }
    Ok(n as i64)
}

/// Distance from `x` to the nearest integer.
pub fn integer_residual(x: C64) -> f64 {
    (x - C64::new(x.re.round(), 0.0)).norm()
}

/// A truncation parameter that can be refined.
pub trait Refine: Clone {
    fn refined(&self) -> Self;
    fn describe(&self) -> String;
}

impl Refine for TruncationWindow {
    fn refined(&self) -> Self {
        self.doubled()
    }

    fn describe(&self) -> String {
        format!("modes {}..={} x {}", self.mode_lo, self.mode_hi, self.components)
    }
}

#[derive(Clone, Debug)]
pub struct GrowthPolicy {
    pub max_refinements: usize,
    pub tol_integer: f64,
}

impl Default for GrowthPolicy {
    fn default() -> Self {
        Self { max_refinements: 4, tol_integer: TOL_INTEGER }
    }
}

/// Outcome of an index computation.
#[derive(Clone, Debug, Serialize)]
pub struct IndexReport {
    pub raw: [f64; 2],
    pub rounded: i64,
    pub residual: f64,
    pub window: String,
    pub converged: bool,
    pub history: Vec<(String, [f64; 2])>,
}

impl IndexReport {
    pub fn raw_c(&self) -> C64 {
        C64::new(self.raw[0], self.raw[1])
    }

    /// Report for a single evaluation that is exact up to rounding.
    pub fn exact(raw: C64, window: String, tol: f64) -> Result<Self> {
        let rounded = round_to_integer(raw, tol)?;
        Ok(Self {
            raw: [raw.re, raw.im],
            rounded,
            residual: integer_residual(raw),
            history: vec![(window.clone(), [raw.re, raw.im])],
            window,
            converged: true,
        })
    }
}

/// Evaluates `f` on successively refined windows until two successive values
/// round to the same integer within tolerance.
pub fn converge_index<W, F>(initial: W, policy: &GrowthPolicy, mut f: F) -> Result<IndexReport>
where
    W: Refine,
    F: FnMut(&W) -> Result<C64>,
{
    let mut window = initial;
    let mut history = Vec::new();
    let mut prev: Option<i64> = None;
    for step in 0..=policy.max_refinements + 1 {
        if step > 0 {
            window = window.refined();
        }
        let raw = f(&window)?;
        history.push((window.describe(), [raw.re, raw.im]));
        let current = round_to_integer(raw, policy.tol_integer).ok();
        if let (Some(p), Some(c)) = (prev, current) {
            if p == c {
                return Ok(IndexReport {
                    raw: [raw.re, raw.im],
                    rounded: c,
                    residual: integer_residual(raw),
                    window: window.describe(),
                    converged: true,
                    history,
                });
            }
        }
        prev = current;
    }
    let trail: Vec<String> = history
        .iter()
        .map(|(w, v)| format!("{w}: {:.6}{:+.6}i", v[0], v[1]))
        .collect();
    Err(IndexError::NonConvergence(trail.join("; ")))
}
