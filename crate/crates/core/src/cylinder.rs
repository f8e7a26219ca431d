//! Spectral model of the cylinder operator. After Fourier transform in `t`
//! and Fourier series in `x`, the homotopy endpoint of `u_phi` acts on mode
//! `lambda` as `phi_hat(mu)` times multiplication by
//! `(t + i(lambda + 1/2)) / (t + i(lambda + mu + 1/2))`, landing in mode
//! `lambda + mu`. Each such block is a Wiener-Hopf symbol in the rho basis.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{IndexError, Result};
use crate::kron::{Interior, KronOperator};
use crate::line::{mult_matrix, pole_coefficients, RationalSymbol};
use crate::numerics::{round_to_integer, singular_values, spectral_norm, CMat, Refine, TruncationWindow, TOL_EXACT};
use crate::pairing::{index_from_zeta, PartitionedOperatorModel, ZetaIndex};
use crate::symbols::FourierMatrixSeries;
use crate::wiener_hopf::{stated_wh_index, wh_index_raw};

/// Modes `lambda` in `x` and rho-modes `n` in `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CylinderWindow {
    pub lambda_lo: i64,
    pub lambda_hi: i64,
    pub n_lo: i64,
    pub n_hi: i64,
}

impl CylinderWindow {
    pub fn new(lambda_lo: i64, lambda_hi: i64, n_lo: i64, n_hi: i64) -> Result<Self> {
        if lambda_hi < lambda_lo || n_hi < n_lo || n_lo > 0 || n_hi < 0 {
            return Err(IndexError::InvalidParameter(format!(
                "cylinder window lambda {lambda_lo}..={lambda_hi}, n {n_lo}..={n_hi}"
            )));
        }
        Ok(Self { lambda_lo, lambda_hi, n_lo, n_hi })
    }

    /// `lambda, n` in `-64..=63`.
    pub fn default_for(_components: usize) -> Self {
        Self { lambda_lo: -64, lambda_hi: 63, n_lo: -64, n_hi: 63 }
    }

    pub fn n_window(&self) -> TruncationWindow {
        TruncationWindow { mode_lo: self.n_lo, mode_hi: self.n_hi, components: 1 }
    }

    pub fn n_count(&self) -> usize {
        (self.n_hi - self.n_lo + 1) as usize
    }

    pub fn contains_lambda(&self, l: i64) -> bool {
        (self.lambda_lo..=self.lambda_hi).contains(&l)
    }

    /// Cut vector on the rho-modes: `+1` for `n >= 0`.
    pub fn spatial_chi(&self) -> Vec<f64> {
        (self.n_lo..=self.n_hi).map(|n| if n >= 0 { 1.0 } else { -1.0 }).collect()
    }
}

impl Default for CylinderWindow {
    fn default() -> Self {
        Self::default_for(1)
    }
}

impl Refine for CylinderWindow {
    fn refined(&self) -> Self {
        Self {
            lambda_lo: 2 * self.lambda_lo,
            lambda_hi: 2 * self.lambda_hi + 1,
            n_lo: 2 * self.n_lo,
            n_hi: 2 * self.n_hi + 1,
        }
    }

    fn describe(&self) -> String {
        format!("lambda {}..={}, n {}..={}", self.lambda_lo, self.lambda_hi, self.n_lo, self.n_hi)
    }
}

/// Symbol of the `(lambda + mu <- lambda)` block:
/// `alpha = lambda + mu + 1/2`, `beta = lambda + 1/2`.
pub fn block_symbol(lambda: i64, mu: i64) -> RationalSymbol {
    RationalSymbol::factor(lambda as f64 + mu as f64 + 0.5, lambda as f64 + 0.5).expect("half-integers are nonzero")
}

/// The `lambda` whose block for `phi_k` has a nonzero Wiener-Hopf index.
pub fn contributing_lambdas(k: i64, window: &CylinderWindow) -> Vec<i64> {
    (window.lambda_lo..=window.lambda_hi)
        .filter(|&l| window.contains_lambda(l + k))
        .filter(|&l| (l as f64 + 0.5) * ((l + k) as f64 + 0.5) < 0.0)
        .collect()
}

fn assemble(
    phi: &FourierMatrixSeries,
    window: &CylinderWindow,
    compress: bool,
) -> Result<KronOperator<C64>> {
    let nw = window.n_window();
    let off = if compress { (0 - window.n_lo) as usize } else { 0 };
    let dim = window.n_count() - off;
    let mut op = KronOperator::new(window.lambda_lo, window.lambda_hi, phi.size(), dim);
    let mut cache: HashMap<(i64, i64), Arc<DMatrix<C64>>> = HashMap::new();
    for lambda in window.lambda_lo..=window.lambda_hi {
        for (mu, c) in phi.modes() {
            let target = lambda + mu;
            if !window.contains_lambda(target) || c.iter().all(|v| v.norm() == 0.0) {
                continue;
            }
            let sp = match cache.get(&(lambda, mu)) {
                Some(s) => s.clone(),
                None => {
                    let m = mult_matrix(&block_symbol(lambda, mu), &nw)?.mat;
                    let m = if compress { m.view((off, off), (dim, dim)).into_owned() } else { m };
                    let s = Arc::new(m);
                    cache.insert((lambda, mu), s.clone());
                    s
                }
            };
            op.push(target, lambda, c.clone(), sp)?;
        }
    }
    Ok(op)
}

/// The homotopy endpoint of `u_phi` on the window.
pub fn spectral_u(phi: &FourierMatrixSeries, window: &CylinderWindow) -> Result<KronOperator<C64>> {
    assemble(phi, window, false)
}

/// `T-hat = P-hat U P-hat` on the rho-modes `n >= 0`.
pub fn assemble_that(phi: &FourierMatrixSeries, window: &CylinderWindow) -> Result<KronOperator<C64>> {
    assemble(phi, window, true)
}

/// `u_phi`, `u_phi^-1 = u_{phi^-1}` and the cut `n >= 0`, with an interior a
/// quarter of the rho-window and one symbol bandwidth in `lambda` away from the edges.
pub fn spectral_model(
    phi: &FourierMatrixSeries,
    phi_inv: &FourierMatrixSeries,
    window: &CylinderWindow,
) -> Result<PartitionedOperatorModel<KronOperator<C64>>> {
    let band = phi.bandwidth().max(phi_inv.bandwidth());
    let margin = (window.n_hi - window.n_lo + 1) / 4;
    let interior = Interior {
        block_lo: window.lambda_lo + band,
        block_hi: window.lambda_hi - band,
        spatial: (window.n_lo..=window.n_hi)
            .map(|n| n >= window.n_lo + margin && n <= window.n_hi - margin)
            .collect(),
    };
    Ok(PartitionedOperatorModel {
        u: spectral_u(phi, window)?,
        u_inv: spectral_u(phi_inv, window)?,
        chi: window.spatial_chi(),
        interior,
    })
}

/// `ind(T-hat)` for a general symbol by the cocycle on the assembled operator.
pub fn cylinder_index(
    phi: &FourierMatrixSeries,
    phi_inv: &FourierMatrixSeries,
    window: &CylinderWindow,
) -> Result<ZetaIndex> {
    index_from_zeta(&spectral_model(phi, phi_inv, window)?, TOL_EXACT)
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaIndex {
    pub lambda: i64,
    pub alpha: f64,
    pub beta: f64,
    pub index: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhikReport {
    pub k: i64,
    pub index: i64,
    /// Cocycle on the assembled operator.
    pub raw: [f64; 2],
    pub contributing: Vec<i64>,
    pub per_lambda: Vec<LambdaIndex>,
}

/// `ind(T-hat_{phi_k})` for `phi_k = e^{ikx}`: per-lambda Wiener-Hopf indices,
/// their sum, and the cocycle on the assembled operator, which must all agree.
pub fn phik_index(k: i64, window: &CylinderWindow) -> Result<PhikReport> {
    let nw = window.n_window();
    let mut per_lambda = Vec::new();
    let mut total = 0;
    for lambda in window.lambda_lo..=window.lambda_hi {
        if !window.contains_lambda(lambda + k) || k == 0 {
            continue;
        }
        let sym = block_symbol(lambda, k);
        let (alpha, beta) = sym.factors[0];
        let idx = round_to_integer(wh_index_raw(&sym, &nw)?, TOL_EXACT)?;
        if idx != stated_wh_index(alpha, beta) {
            return Err(IndexError::Falsified(format!(
                "lambda {lambda}: Wiener-Hopf index {idx}, table {}",
                stated_wh_index(alpha, beta)
            )));
        }
        total += idx;
        if idx != 0 {
            per_lambda.push(LambdaIndex { lambda, alpha, beta, index: idx });
        }
    }
    let phi = FourierMatrixSeries::monomial(k);
    let z = cylinder_index(&phi, &FourierMatrixSeries::monomial(-k), window)?;
    let global = round_to_integer(z.raw_c(), TOL_EXACT)?;
    if global != total {
        return Err(IndexError::Falsified(format!(
            "sum of per-lambda indices {total} but cocycle on the assembled operator {global}"
        )));
    }
    Ok(PhikReport {
        k,
        index: total,
        raw: z.raw,
        contributing: contributing_lambdas(k, window),
        per_lambda,
    })
}

/// One plane-wave component `e^{i xi t} e^{i lambda x} (a, b)` of a trial function.
#[derive(Clone, Debug)]
pub struct TrialMode {
    pub xi: f64,
    pub lambda: i64,
    pub spinor: [C64; 2],
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub s: f64,
    pub min_ratio: f64,
    pub bound: f64,
}

/// `||D_s f|| >= (s/2) ||f||` on trial functions, using the symbol
/// `[[0, -i xi + s/2 + lambda], [i xi + s/2 + lambda, 0]]` of `D_s`.
pub fn ds_gap_check(s: f64, trials: &[Vec<TrialMode>]) -> Result<GapReport> {
    if !(0.0..=1.0).contains(&s) {
        return Err(IndexError::InvalidParameter(format!("s = {s} outside [0, 1]")));
    }
    let bound = s / 2.0;
    let mut min_ratio = f64::INFINITY;
    for trial in trials {
        let mut merged: Vec<TrialMode> = Vec::new();
        for m in trial {
            match merged.iter_mut().find(|x| x.xi == m.xi && x.lambda == m.lambda) {
                Some(x) => {
                    x.spinor[0] += m.spinor[0];
                    x.spinor[1] += m.spinor[1];
                }
                None => merged.push(m.clone()),
            }
        }
        let (mut num, mut den) = (0.0, 0.0);
        for m in &merged {
            let mm = m.lambda as f64 + s / 2.0;
            let up = C64::new(mm, -m.xi) * m.spinor[1];
            let lo = C64::new(mm, m.xi) * m.spinor[0];
            num += up.norm_sqr() + lo.norm_sqr();
            den += m.spinor[0].norm_sqr() + m.spinor[1].norm_sqr();
        }
        if den > 0.0 {
            min_ratio = min_ratio.min((num / den).sqrt());
        }
    }
    if min_ratio < bound * (1.0 - 1e-12) {
        return Err(IndexError::Falsified(format!(
            "||D_s f|| / ||f|| = {min_ratio} below s/2 = {bound} at s = {s}"
        )));
    }
    Ok(GapReport { s, min_ratio, bound })
}

pub const F_BOUND: f64 = 2.5;
pub const G_BOUND: f64 = 1.25;
pub const RESOLVENT_BOUND: f64 = 3.75;
pub const ENDPOINT_RESOLVENT_BOUND: f64 = 2.0;

#[derive(Clone, Debug, Serialize)]
pub struct ResolventRow {
    pub s: f64,
    /// `sup |x / (x^2 + (1-s)^2)|` over `|x| >= s/2`
    pub sup_f: f64,
    /// `sup 1 / (x^2 + (1-s)^2)` over `|x| >= s/2`
    pub sup_g: f64,
    /// `||(D_s + (1-s) eps)^-1||` from the 2x2 blocks on each eigenpair `+-x` of `D_s`
    pub resolvent: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResolventReport {
    pub rows: Vec<ResolventRow>,
    pub violations: Vec<String>,
}

impl ResolventReport {
    pub fn falsified(&self) -> bool {
        !self.violations.is_empty()
    }

    pub fn max_f(&self) -> f64 {
        self.rows.iter().map(|r| r.sup_f).fold(0.0, f64::max)
    }

    pub fn max_g(&self) -> f64 {
        self.rows.iter().map(|r| r.sup_g).fold(0.0, f64::max)
    }

    pub fn max_resolvent(&self) -> f64 {
        self.rows.iter().map(|r| r.resolvent).fold(0.0, f64::max)
    }
}

/// `n` evenly spaced points in `[0, 1]`.
pub fn s_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| j as f64 / (n - 1).max(1) as f64).collect()
}

/// Points `|x|` in `[s/2, 1e3]`: the endpoints, the critical point `1 - s`,
/// a fine linear grid near the origin and a logarithmic grid beyond.
pub fn x_grid(s: f64) -> Vec<f64> {
    let lo = s / 2.0;
    let mut xs = vec![lo, 1e3];
    if 1.0 - s >= lo {
        xs.push(1.0 - s);
    }
    for j in 0..=4000 {
        xs.push(lo + (4.0 - lo) * j as f64 / 4000.0);
    }
    let start = lo.max(1e-3);
    for j in 0..=2000 {
        xs.push(start * (1e3 / start).powf(j as f64 / 2000.0));
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Evaluates the resolvent bounds on the grids and lists every violation.
pub fn resolvent_bound_check(s_values: &[f64]) -> ResolventReport {
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for &s in s_values {
        let c = 1.0 - s;
        let (mut sf, mut sg, mut sr) = (0.0f64, 0.0f64, 0.0f64);
        for x in x_grid(s) {
            let den = x * x + c * c;
            if den == 0.0 {
                continue;
            }
            sf = sf.max((x / den).abs());
            sg = sg.max(1.0 / den);
            let block = CMat::from_row_slice(2, 2, &[C64::new(c, 0.0), C64::new(x, 0.0), C64::new(x, 0.0), C64::new(-c, 0.0)]);
            let sv = singular_values(&block);
            sr = sr.max(1.0 / sv[1]);
        }
        if sf > F_BOUND {
            violations.push(format!("s = {s:.2}: sup f_s = {sf:.6} > {F_BOUND}"));
        }
        if sg > G_BOUND {
            violations.push(format!("s = {s:.2}: sup g_s = {sg:.6} > {G_BOUND}"));
        }
        if sr > RESOLVENT_BOUND {
            violations.push(format!("s = {s:.2}: resolvent norm {sr:.6} > {RESOLVENT_BOUND}"));
        }
        if s == 0.0 && sr > ENDPOINT_RESOLVENT_BOUND {
            violations.push(format!("s = 0: ||(D + eps)^-1|| = {sr:.6} > {ENDPOINT_RESOLVENT_BOUND}"));
        }
        rows.push(ResolventRow { s, sup_f: sf, sup_g: sg, resolvent: sr });
    }
    ResolventReport { rows, violations }
}

/// Dense truncation of `u_{phi,s} = diag(1, phi) + (D_s + (1-s) eps)^-1 V_s`,
/// `V_s = [[(1-s)(phi-1), i phi'], [0, (1-s)(phi-1)]]`, on `lambda x spinor x component x n`.
pub fn u_phi_s(phi: &FourierMatrixSeries, s: f64, window: &CylinderWindow) -> Result<CMat> {
    let l = phi.size();
    let nl = (window.lambda_hi - window.lambda_lo + 1) as usize;
    let nn = window.n_count();
    let dim = nl * 2 * l * nn;
    let span = window.n_hi - window.n_lo;
    let idx = |lam: i64, sg: usize, c: usize, n: usize| (((lam - window.lambda_lo) as usize * 2 + sg) * l + c) * nn + n;
    let c = 1.0 - s;
    let mut u = CMat::zeros(dim, dim);
    // resolvent entries per lambda, as rho-basis Laurent sections
    let mut k_of = HashMap::new();
    for lam in window.lambda_lo..=window.lambda_hi {
        let m = lam as f64 + s / 2.0;
        let a = (m * m + c * c).sqrt();
        let pp = pole_coefficients(C64::new(0.0, a), -span, span)?;
        let pm = pole_coefficients(C64::new(0.0, -a), -span, span)?;
        let inv_sq: Vec<C64> = pp.iter().zip(&pm).map(|(p, q)| (p - q) / C64::new(0.0, 2.0 * a)).collect();
        let xi_sq: Vec<C64> = pp.iter().zip(&pm).map(|(p, q)| (p + q) / 2.0).collect();
        let i = C64::new(0.0, 1.0);
        let e00: Vec<C64> = inv_sq.iter().map(|v| v * c).collect();
        let e11: Vec<C64> = inv_sq.iter().map(|v| -v * c).collect();
        let e01: Vec<C64> = inv_sq.iter().zip(&xi_sq).map(|(g, x)| -i * x + g * m).collect();
        let e10: Vec<C64> = inv_sq.iter().zip(&xi_sq).map(|(g, x)| i * x + g * m).collect();
        k_of.insert(lam, [[e00, e01], [e10, e11]]);
    }
    for lam in window.lambda_lo..=window.lambda_hi {
        for c0 in 0..l {
            for n in 0..nn {
                let d = idx(lam, 0, c0, n);
                u[(d, d)] += C64::new(1.0, 0.0);
            }
        }
        for (mu, coeff) in phi.modes() {
            let target = lam + mu;
            if !window.contains_lambda(target) {
                continue;
            }
            let delta = if mu == 0 { CMat::identity(l, l) } else { CMat::zeros(l, l) };
            let v_diag = (coeff - &delta) * C64::new(c, 0.0);
            let v_off = coeff * C64::new(-(mu as f64), 0.0);
            // V(mu) as a 2x2 spinor matrix of l x l coefficients
            let v = [[Some(&v_diag), Some(&v_off)], [None, Some(&v_diag)]];
            let kt = &k_of[&target];
            for ci in 0..l {
                for cj in 0..l {
                    for n in 0..nn {
                        u[(idx(target, 1, ci, n), idx(lam, 1, cj, n))] += coeff[(ci, cj)];
                    }
                }
            }
            for sg in 0..2 {
                for tau in 0..2 {
                    for sp in 0..2 {
                        let Some(vm) = v[sp][tau] else { continue };
                        let kern = &kt[sg][sp];
                        for ci in 0..l {
                            for cj in 0..l {
                                let cc = vm[(ci, cj)];
                                if cc.norm() == 0.0 {
                                    continue;
                                }
                                for r in 0..nn {
                                    for q in 0..nn {
                                        let kv = kern[(r as i64 - q as i64 + span) as usize];
                                        u[(idx(target, sg, ci, r), idx(lam, tau, cj, q))] += kv * cc;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(u)
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuityReport {
    pub s: f64,
    pub s2: f64,
    pub difference: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

/// `||u_{phi,s} - u_{phi,s'}|| <= 32 |s - s'|` on the truncation, with slack
/// `0.05 ||u||` for truncation error.
pub fn homotopy_continuity_check(
    phi: &FourierMatrixSeries,
    s: f64,
    s2: f64,
    window: &CylinderWindow,
) -> Result<ContinuityReport> {
    let a = u_phi_s(phi, s, window)?;
    let b = u_phi_s(phi, s2, window)?;
    let difference = spectral_norm(&(&a - &b));
    let slack = 0.05 * spectral_norm(&a).max(spectral_norm(&b));
    let bound = 32.0 * (s - s2).abs();
    Ok(ContinuityReport { s, s2, difference, bound, slack, pass: difference <= bound + slack })
}
