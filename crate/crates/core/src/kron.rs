//! Block-sparse operators on `l^2(blocks) (x) C^l (x) C^m` whose blocks are sums
//! of Kronecker products `coeff (x) spatial`, with `coeff` an `l x l` symbol
//! coefficient and `spatial` an `m x m` matrix shared between blocks.
//!
//! The cut `chi` acts on the spatial factor only, so cocycle traces factor as
//! `Tr(coeff_a coeff_b) * (spatial cross trace)`.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{IndexError, Result};
use crate::numerics::CMat;

/// Matrix entries that embed into the complex numbers.
pub trait Entry: nalgebra::Scalar + Copy {
    fn c(self) -> C64;
}

impl Entry for f64 {
    #[inline]
    fn c(self) -> C64 {
        C64::new(self, 0.0)
    }
}

impl Entry for C64 {
    #[inline]
    fn c(self) -> C64 {
        self
    }
}

#[derive(Clone, Debug)]
pub struct KronTerm<S: Entry> {
    pub row: i64,
    pub col: i64,
    pub coeff: CMat,
    pub spatial: Arc<DMatrix<S>>,
}

#[derive(Clone, Debug)]
pub struct KronOperator<S: Entry> {
    pub block_lo: i64,
    pub block_hi: i64,
    pub components: usize,
    pub spatial_dim: usize,
    pub terms: Vec<KronTerm<S>>,
}

/// Rows kept when evaluating a trace on an interior sub-window.
#[derive(Clone, Debug)]
pub struct Interior {
    pub block_lo: i64,
    pub block_hi: i64,
    pub spatial: Vec<bool>,
}

impl<S: Entry> KronOperator<S> {
    pub fn new(block_lo: i64, block_hi: i64, components: usize, spatial_dim: usize) -> Self {
        Self { block_lo, block_hi, components, spatial_dim, terms: Vec::new() }
    }

    pub fn blocks(&self) -> usize {
        (self.block_hi - self.block_lo + 1) as usize
    }

    pub fn dim(&self) -> usize {
        self.blocks() * self.components * self.spatial_dim
    }

    pub fn contains_block(&self, b: i64) -> bool {
        (self.block_lo..=self.block_hi).contains(&b)
    }

    pub fn push(&mut self, row: i64, col: i64, coeff: CMat, spatial: Arc<DMatrix<S>>) -> Result<()> {
        if !self.contains_block(row) || !self.contains_block(col) {
            return Err(IndexError::Range(format!(
                "block ({row}, {col}) outside {}..={}",
                self.block_lo, self.block_hi
            )));
        }
        if coeff.nrows() != self.components || coeff.ncols() != self.components {
            return Err(IndexError::Dimension(format!(
                "coefficient {}x{} for {} components",
                coeff.nrows(),
                coeff.ncols(),
                self.components
            )));
        }
        if spatial.nrows() != self.spatial_dim || spatial.ncols() != self.spatial_dim {
            return Err(IndexError::Dimension(format!(
                "spatial block {}x{} for dimension {}",
                spatial.nrows(),
                spatial.ncols(),
                self.spatial_dim
            )));
        }
        self.terms.push(KronTerm { row, col, coeff, spatial });
        Ok(())
    }

    pub fn index(&self, block: i64, comp: usize, s: usize) -> usize {
        ((block - self.block_lo) as usize * self.components + comp) * self.spatial_dim + s
    }

    /// The full cut vector obtained by repeating `spatial_chi` over blocks and components.
    pub fn expand_chi(&self, spatial_chi: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for _ in 0..self.blocks() * self.components {
            out.extend_from_slice(spatial_chi);
        }
        out
    }

    pub fn to_dense(&self) -> CMat {
        let n = self.dim();
        let mut m = CMat::zeros(n, n);
        let sd = self.spatial_dim;
        for t in &self.terms {
            for ci in 0..self.components {
                for cj in 0..self.components {
                    let c = t.coeff[(ci, cj)];
                    if c == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let r0 = self.index(t.row, ci, 0);
                    let c0 = self.index(t.col, cj, 0);
                    for i in 0..sd {
                        for j in 0..sd {
                            m[(r0 + i, c0 + j)] += c * t.spatial[(i, j)].c();
                        }
                    }
                }
            }
        }
        m
    }

    /// The `(i, j)` symbol component as a single-component operator.
    pub fn component(&self, i: usize, j: usize) -> Self {
        let mut out = Self::new(self.block_lo, self.block_hi, 1, self.spatial_dim);
        for t in &self.terms {
            let c = t.coeff[(i, j)];
            if c.norm() > 0.0 {
                out.terms.push(KronTerm {
                    row: t.row,
                    col: t.col,
                    coeff: CMat::from_element(1, 1, c),
                    spatial: t.spatial.clone(),
                });
            }
        }
        out
    }

    fn by_position(&self) -> HashMap<(i64, i64), Vec<usize>> {
        let mut map: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (k, t) in self.terms.iter().enumerate() {
            map.entry((t.row, t.col)).or_default().push(k);
        }
        map
    }

    fn check_compatible<T: Entry>(&self, other: &KronOperator<T>, chi: &[f64]) -> Result<()> {
        if self.block_lo != other.block_lo
            || self.block_hi != other.block_hi
            || self.components != other.components
            || self.spatial_dim != other.spatial_dim
        {
            return Err(IndexError::WindowMismatch(format!(
                "blocks {}..={} x {} x {} vs {}..={} x {} x {}",
                self.block_lo,
                self.block_hi,
                self.components,
                self.spatial_dim,
                other.block_lo,
                other.block_hi,
                other.components,
                other.spatial_dim
            )));
        }
        if chi.len() != self.spatial_dim {
            return Err(IndexError::Dimension(format!(
                "cut of length {} on spatial dimension {}",
                chi.len(),
                self.spatial_dim
            )));
        }
        Ok(())
    }
}

/// `zeta(X, Y) = -sum_{i+, j-} X_ij Y_ji + sum_{i-, j+} X_ij Y_ji`, which equals
/// `1/4 Tr(chi [chi, X] [chi, Y])`.
pub fn cross_zeta<S: Entry, T: Entry>(x: &DMatrix<S>, y: &DMatrix<T>, chi: &[f64]) -> C64 {
    let pos: Vec<usize> = (0..chi.len()).filter(|&i| chi[i] > 0.0).collect();
    let neg: Vec<usize> = (0..chi.len()).filter(|&i| chi[i] < 0.0).collect();
    let mut acc = C64::new(0.0, 0.0);
    for &i in &pos {
        for &j in &neg {
            acc -= x[(i, j)].c() * y[(j, i)].c();
        }
    }
    for &i in &neg {
        for &j in &pos {
            acc += x[(i, j)].c() * y[(j, i)].c();
        }
    }
    acc
}

fn coeff_trace(a: &CMat, b: &CMat) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// The cocycle `zeta(A, B)` for block-sparse Kronecker operators.
pub fn kron_zeta<S: Entry, T: Entry>(a: &KronOperator<S>, b: &KronOperator<T>, spatial_chi: &[f64]) -> Result<C64> {
    a.check_compatible(b, spatial_chi)?;
    let b_pos = b.by_position();
    let mut acc = C64::new(0.0, 0.0);
    for ta in &a.terms {
        let Some(list) = b_pos.get(&(ta.col, ta.row)) else { continue };
        for &k in list {
            let tb = &b.terms[k];
            let c = coeff_trace(&ta.coeff, &tb.coeff);
            if c.norm() == 0.0 {
                continue;
            }
            acc += c * cross_zeta(&ta.spatial, &tb.spatial, spatial_chi);
        }
    }
    Ok(acc)
}

/// `Tr_I(P - P A P B P)` over the rows in `interior`, `P` the positive part of the cut.
fn half_two_trace<S: Entry, T: Entry>(
    a: &KronOperator<S>,
    b: &KronOperator<T>,
    spatial_chi: &[f64],
    interior: &Interior,
) -> C64 {
    let pos: Vec<usize> = (0..spatial_chi.len()).filter(|&i| spatial_chi[i] > 0.0).collect();
    let rows: Vec<usize> = pos.iter().copied().filter(|&i| interior.spatial[i]).collect();
    let b_pos = b.by_position();
    let mut acc = C64::new(0.0, 0.0);
    let nblocks = (interior.block_lo..=interior.block_hi).count();
    acc += C64::new((nblocks * a.components * rows.len()) as f64, 0.0);
    for ta in &a.terms {
        if ta.row < interior.block_lo || ta.row > interior.block_hi {
            continue;
        }
        let Some(list) = b_pos.get(&(ta.col, ta.row)) else { continue };
        for &k in list {
            let tb = &b.terms[k];
            let c = coeff_trace(&ta.coeff, &tb.coeff);
            if c.norm() == 0.0 {
                continue;
            }
            let mut s = C64::new(0.0, 0.0);
            for &i in &rows {
                for &j in &pos {
                    s += ta.spatial[(i, j)].c() * tb.spatial[(j, i)].c();
                }
            }
            acc -= c * s;
        }
    }
    acc
}

/// `Tr(P - P B P A P) - Tr(P - P A P B P)` restricted to interior rows.
/// For `B = u^-1`, `A = u` this is the Fedosov form of `ind(P u P)`.
pub fn kron_two_trace<S: Entry, T: Entry>(
    b: &KronOperator<S>,
    a: &KronOperator<T>,
    spatial_chi: &[f64],
    interior: &Interior,
) -> Result<C64> {
    a.check_compatible(b, spatial_chi)?;
    if interior.spatial.len() != a.spatial_dim {
        return Err(IndexError::Dimension("interior mask length".into()));
    }
    Ok(half_two_trace(b, a, spatial_chi, interior) - half_two_trace(a, b, spatial_chi, interior))
}

/// Largest entry of `A B - 1` over interior diagonal blocks.
pub fn kron_inverse_defect<S: Entry, T: Entry>(
    a: &KronOperator<S>,
    b: &KronOperator<T>,
    interior: &Interior,
) -> Result<f64> {
    let b_pos = b.by_position();
    let l = a.components;
    let m = a.spatial_dim;
    let mut worst: f64 = 0.0;
    for r in interior.block_lo..=interior.block_hi {
        let mut prod = CMat::zeros(l * m, l * m);
        for ta in a.terms.iter().filter(|t| t.row == r) {
            let Some(list) = b_pos.get(&(ta.col, r)) else { continue };
            for &k in list {
                let tb = &b.terms[k];
                let c = &ta.coeff * &tb.coeff;
                let xa = ta.spatial.map(|v| v.c());
                let xb = tb.spatial.map(|v| v.c());
                let s = &xa * &xb;
                for ci in 0..l {
                    for cj in 0..l {
                        let cc = c[(ci, cj)];
                        if cc.norm() == 0.0 {
                            continue;
                        }
                        for i in 0..m {
                            for j in 0..m {
                                prod[(ci * m + i, cj * m + j)] += cc * s[(i, j)];
                            }
                        }
                    }
                }
            }
        }
        for ci in 0..l {
            for i in 0..m {
                if !interior.spatial[i] {
                    continue;
                }
                for cj in 0..l {
                    for j in 0..m {
                        if !interior.spatial[j] {
                            continue;
                        }
                        let target = if ci == cj && i == j { 1.0 } else { 0.0 };
                        worst = worst.max((prod[(ci * m + i, cj * m + j)] - target).norm());
                    }
                }
            }
        }
    }
    Ok(worst)
}
