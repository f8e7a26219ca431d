//! `L^2(R)` in the orthogonal basis `rho_n(t) = (t - i)^n / (t + i)^(n+1)`,
//! which the Cayley transform `c(t) = (t - i)/(t + i)` carries onto
//! `e^{inx}` on the circle (norms squared are `pi`).
//!
//! Multiplication by a bounded function `f` on the line is, in this basis,
//! the Laurent operator of `f o c^-1`; rational symbols have closed-form
//! pullback coefficients.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::error::{IndexError, Result};
use crate::numerics::{CMat, OperatorBlock, TruncationWindow};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn legendre(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = x;
            nodes[n - 1 - i] = -x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> C64>(&self, a: f64, b: f64, mut f: F) -> C64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc = C64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * *w;
        }
        acc * half
    }
}

fn rule20() -> &'static GaussRule {
    static R: OnceLock<GaussRule> = OnceLock::new();
    R.get_or_init(|| GaussRule::legendre(20))
}

fn rule40() -> &'static GaussRule {
    static R: OnceLock<GaussRule> = OnceLock::new();
    R.get_or_init(|| GaussRule::legendre(40))
}

/// Quadrature settings for integrals over the line.
#[derive(Clone, Debug)]
pub struct QuadratureParams {
    /// Panels cover `|y| <= cutoff`; beyond it the tail is mapped onto `(0, 1]`.
    pub cutoff: f64,
    /// Principal values: nodes closer than this to the singularity use the limit value.
    pub exclusion_radius: f64,
    /// Maximum disagreement of the tail between two rules before giving up.
    pub tail_tol: f64,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        Self { cutoff: 1e3, exclusion_radius: 1e-4, tail_tol: 1e-9 }
    }
}

/// Breakpoints on `[a, b]`: quarter-unit panels inside `fine`, doubling outside.
fn breakpoints(a: f64, b: f64, fine: (f64, f64)) -> Vec<f64> {
    let mut pts = vec![a, b];
    let (flo, fhi) = fine;
    let mut x = flo.max(a);
    while x < fhi.min(b) {
        pts.push(x);
        x += 0.25;
    }
    let mut x = 1.0;
    while x < b {
        if x > a {
            pts.push(x);
        }
        x *= 2.0;
    }
    pts.retain(|p| *p >= a && *p <= b);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|p, q| (*p - *q).abs() < 1e-12);
    pts
}

/// `int_T^inf g(d) dd` by `d = T / v`, checked against a higher-order rule.
fn tail<F: FnMut(f64) -> C64>(t_cut: f64, mut g: F, tol: f64) -> Result<C64> {
    let mut mapped = |v: f64| g(t_cut / v) * (t_cut / (v * v));
    let mut lo = C64::new(0.0, 0.0);
    let mut hi = C64::new(0.0, 0.0);
    for (a, b) in [(0.0, 0.25), (0.25, 0.5), (0.5, 1.0)] {
        lo += rule20().integrate(a, b, &mut mapped);
        hi += rule40().integrate(a, b, &mut mapped);
    }
    if (hi - lo).norm() > tol {
        return Err(IndexError::Quadrature(format!(
            "tail beyond {t_cut} unresolved: {:e} between rules",
            (hi - lo).norm()
        )));
    }
    Ok(hi)
}

/// `int_R g(y) dy` for integrands decaying like `1/y^2`.
pub fn integrate_line<F: FnMut(f64) -> C64>(mut g: F, params: &QuadratureParams) -> Result<C64> {
    let t_cut = params.cutoff;
    let pts = breakpoints(0.0, t_cut, (0.0, 8.0));
    let mut sym = |y: f64| g(y) + g(-y);
    let mut acc = C64::new(0.0, 0.0);
    for w in pts.windows(2) {
        acc += rule20().integrate(w[0], w[1], &mut sym);
    }
    Ok(acc + tail(t_cut, sym, params.tail_tol)?)
}

pub fn cayley(t: f64) -> C64 {
    (C64::new(t, -1.0)) / C64::new(t, 1.0)
}

pub fn cayley_inv(z: C64) -> C64 {
    I * (1.0 + z) / (1.0 - z)
}

pub fn rho(n: i64, t: f64) -> C64 {
    cayley(t).powi(n as i32) / C64::new(t, 1.0)
}

/// `<rho_m, rho_n> = int conj(rho_m) rho_n dt`.
pub fn rho_inner(m: i64, n: i64, params: &QuadratureParams) -> Result<C64> {
    integrate_line(|t| rho(m, t).conj() * rho(n, t), params)
}

/// `scale * prod (t + i beta_j) / (t + i alpha_j)` with real, nonzero `alpha_j, beta_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalSymbol {
    pub scale: C64,
    pub factors: Vec<(f64, f64)>,
}

impl RationalSymbol {
    /// `(t + i beta) / (t + i alpha)`.
    pub fn factor(alpha: f64, beta: f64) -> Result<Self> {
        if alpha == 0.0 || beta == 0.0 || !alpha.is_finite() || !beta.is_finite() {
            return Err(IndexError::InvalidParameter(format!(
                "(t + i{beta})/(t + i{alpha}) is not invertible on the line"
            )));
        }
        Ok(Self { scale: C64::new(1.0, 0.0), factors: vec![(alpha, beta)] })
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.factors
            .iter()
            .fold(self.scale, |acc, &(a, b)| acc * C64::new(t, b) / C64::new(t, a))
    }

    pub fn reciprocal(&self) -> Self {
        Self { scale: 1.0 / self.scale, factors: self.factors.iter().map(|&(a, b)| (b, a)).collect() }
    }

    pub fn product(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Self { scale: self.scale * other.scale, factors }
    }

    /// Mobius data `(a, b, c, d)` of the pullback `(a + b z)/(c + d z)` of each factor.
    fn mobius(&self) -> Vec<(C64, C64, C64, C64)> {
        self.factors
            .iter()
            .map(|&(al, be)| {
                (
                    C64::new(1.0 + be, 0.0),
                    C64::new(1.0 - be, 0.0),
                    C64::new(1.0 + al, 0.0),
                    C64::new(1.0 - al, 0.0),
                )
            })
            .collect()
    }

    /// `f o c^-1` evaluated on the circle.
    pub fn pullback(&self, z: C64) -> C64 {
        self.mobius()
            .into_iter()
            .fold(self.scale, |acc, (a, b, c, d)| acc * (a + b * z) / (c + d * z))
    }

    /// Fourier coefficients of the pullback on modes `lo..=hi`.
    pub fn coefficients(&self, lo: i64, hi: i64) -> Result<Vec<C64>> {
        let mob = self.mobius();
        match mob.len() {
            0 => Ok((lo..=hi).map(|k| if k == 0 { self.scale } else { C64::new(0.0, 0.0) }).collect()),
            1 => {
                let (a, b, c, d) = mob[0];
                Ok(mobius_coefficients(a, b, c, d, lo, hi)?.into_iter().map(|x| x * self.scale).collect())
            }
            _ => {
                let worst = mob
                    .iter()
                    .map(|(_, _, c, d)| c.norm().min(d.norm()) / c.norm().max(d.norm()))
                    .fold(0.0, f64::max);
                sampled_coefficients(|z| self.pullback(z), worst, lo, hi)
            }
        }
    }
}

/// Laurent coefficients on `|z| = 1` of `(a + b z)/(c + d z)` on modes `lo..=hi`.
pub fn mobius_coefficients(a: C64, b: C64, c: C64, d: C64, lo: i64, hi: i64) -> Result<Vec<C64>> {
    let zero = C64::new(0.0, 0.0);
    if (c.norm() - d.norm()).abs() <= 1e-14 * c.norm().max(d.norm()) {
        return Err(IndexError::InvalidParameter("pole on the unit circle".into()));
    }
    let pow = |q: C64, n: i64| -> C64 { if n == 0 { C64::new(1.0, 0.0) } else { q.powi(n as i32) } };
    let out = (lo..=hi)
        .map(|k| {
            if c.norm() > d.norm() {
                // 1/(c + dz) = sum_n (1/c) q^n z^n, q = -d/c
                let q = -d / c;
                match k {
                    k if k < 0 => zero,
                    0 => a / c,
                    k => (a * pow(q, k) + b * pow(q, k - 1)) / c,
                }
            } else {
                // 1/(c + dz) = sum_n (1/d) r^n z^(-n-1), r = -c/d
                let r = -c / d;
                match k {
                    k if k > 0 => zero,
                    0 => b / d,
                    k => (a * pow(r, -k - 1) + b * pow(r, -k)) / d,
                }
            }
        })
        .collect();
    Ok(out)
}

/// Pullback of `1/(t - w)` for `w` off the real line: `(1 - z)/((i - w) + (i + w) z)`.
pub fn pole_coefficients(w: C64, lo: i64, hi: i64) -> Result<Vec<C64>> {
    if w.im == 0.0 {
        return Err(IndexError::InvalidParameter("pole on the real line".into()));
    }
    mobius_coefficients(C64::new(1.0, 0.0), C64::new(-1.0, 0.0), I - w, I + w, lo, hi)
}

/// Coefficients from samples of `g` on a grid fine enough for decay rate `ratio`.
fn sampled_coefficients<F: Fn(C64) -> C64>(g: F, ratio: f64, lo: i64, hi: i64) -> Result<Vec<C64>> {
    let span = (hi - lo + 1).max(1) as usize;
    let decay = if ratio > 0.0 { (-17.0 / ratio.log10().min(-1e-6)) as usize } else { 0 };
    let n = (4 * span).max(2 * decay + 64).next_power_of_two();
    if n > 1 << 22 {
        return Err(IndexError::InvalidParameter(format!(
            "pullback decays too slowly (ratio {ratio}) for sampling"
        )));
    }
    let mut buf: Vec<C64> = (0..n)
        .map(|j| g(C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64)))
        .collect();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    Ok((lo..=hi)
        .map(|k| buf[k.rem_euclid(n as i64) as usize] / n as f64)
        .collect())
}

/// Finite section on `window` of multiplication by `f` in the rho basis:
/// entry `(m, n)` is `hat(f o c^-1)(m - n)`, which equals `<rho_m, f rho_n> / pi`.
pub fn mult_matrix(f: &RationalSymbol, window: &TruncationWindow) -> Result<OperatorBlock> {
    if window.components != 1 {
        return Err(IndexError::Dimension("mult_matrix acts on scalar windows".into()));
    }
    let span = window.span();
    let coeffs = f.coefficients(-span, span)?;
    let n = window.dim();
    let mat = CMat::from_fn(n, n, |i, j| coeffs[(i as i64 - j as i64 + span) as usize]);
    Ok(OperatorBlock { window: window.clone(), mat })
}

/// `P-hat`: projection onto the span of `rho_n`, `n >= 0`.
pub fn projector_phat(window: &TruncationWindow) -> OperatorBlock {
    crate::hardy::hardy_projector(window)
}

/// A function on the line that can be evaluated pointwise.
#[derive(Clone, Debug)]
pub enum LineFunction {
    Rho(i64),
    Rational(RationalSymbol),
    Hilbert(Box<LineFunction>),
}

impl LineFunction {
    pub fn eval(&self, t: f64, params: &QuadratureParams) -> Result<C64> {
        match self {
            LineFunction::Rho(n) => Ok(rho(*n, t)),
            LineFunction::Rational(r) => Ok(r.eval(t)),
            LineFunction::Hilbert(inner) => hilbert_apply(inner, t, params),
        }
    }
}

/// `(H f)(t) = (i/pi) p.v. int f(y) / (t - y) dy`.
///
/// Near `t` the singularity is subtracted, `int (f(y) - f(t))/(t - y)` over
/// `|y - t| <= 1`; farther out the two sides are paired as
/// `int (f(t - d) - f(t + d)) / d dd`.
pub fn hilbert_apply(f: &LineFunction, t: f64, params: &QuadratureParams) -> Result<C64> {
    let ft = f.eval(t, params)?;
    let h = 1e-5;
    let deriv = (f.eval(t + h, params)? - f.eval(t - h, params)?) / (2.0 * h);
    let mut err = None;
    let mut near_integrand = |y: f64| {
        if (y - t).abs() < params.exclusion_radius {
            return -deriv;
        }
        match f.eval(y, params) {
            Ok(v) => (v - ft) / (t - y),
            Err(e) => {
                err.get_or_insert(e);
                C64::new(0.0, 0.0)
            }
        }
    };
    let mut near = C64::new(0.0, 0.0);
    for k in -4..4 {
        let a = t + 0.25 * k as f64;
        near += rule20().integrate(a, a + 0.25, &mut near_integrand);
    }
    if let Some(e) = err.take() {
        return Err(e);
    }
    let t_cut = params.cutoff.max(4.0 * (t.abs() + 8.0));
    let pts = breakpoints(1.0, t_cut, (t.abs() - 8.0, t.abs() + 8.0));
    let mut far_integrand = |d: f64| match (f.eval(t - d, params), f.eval(t + d, params)) {
        (Ok(a), Ok(b)) => (a - b) / d,
        (Err(e), _) | (_, Err(e)) => {
            err.get_or_insert(e);
            C64::new(0.0, 0.0)
        }
    };
    let mut far = C64::new(0.0, 0.0);
    for w in pts.windows(2) {
        far += rule20().integrate(w[0], w[1], &mut far_integrand);
    }
    // inner quadrature noise e becomes e/v in the mapped tail of a nested transform
    let tail_tol = match f {
        LineFunction::Hilbert(_) => params.tail_tol.max(1e-6),
        _ => params.tail_tol,
    };
    far += tail(t_cut, &mut far_integrand, tail_tol)?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(I / PI * (near + far))
}

/// The eigenvalue assignment under test: `H rho_n = +rho_n` for `n < 0` and
/// `-rho_n` for `n >= 0`.
pub fn stated_hilbert_sign(n: i64) -> f64 {
    if n < 0 {
        1.0
    } else {
        -1.0
    }
}

/// `max_t |(H rho_n)(t) - sign * rho_n(t)|` over the sample points.
pub fn hilbert_residual(n: i64, sign: f64, ts: &[f64], params: &QuadratureParams) -> Result<f64> {
    let f = LineFunction::Rho(n);
    let mut worst: f64 = 0.0;
    for &t in ts {
        worst = worst.max((hilbert_apply(&f, t, params)? - rho(n, t) * sign).norm());
    }
    Ok(worst)
}

/// `max_t |(H H rho_n)(t) - rho_n(t)|`.
pub fn hilbert_square_residual(n: i64, ts: &[f64], params: &QuadratureParams) -> Result<f64> {
    let f = LineFunction::Hilbert(Box::new(LineFunction::Rho(n)));
    let mut worst: f64 = 0.0;
    for &t in ts {
        worst = worst.max((hilbert_apply(&f, t, params)? - rho(n, t)).norm());
    }
    Ok(worst)
}

/// Least-squares eigenvalue `<H rho_n, rho_n> / <rho_n, rho_n>` over the sample points.
pub fn measured_hilbert_eigenvalue(n: i64, ts: &[f64], params: &QuadratureParams) -> Result<C64> {
    let f = LineFunction::Rho(n);
    let (mut num, mut den) = (C64::new(0.0, 0.0), 0.0);
    for &t in ts {
        let r = rho(n, t);
        num += r.conj() * hilbert_apply(&f, t, params)?;
        den += r.norm_sqr();
    }
    Ok(num / den)
}

/// Nodes and weights of the composite rule behind [`integrate_line`], with
/// the tail taken from the higher-order rule.
pub fn line_nodes(params: &QuadratureParams) -> Vec<(f64, f64)> {
    let t_cut = params.cutoff;
    let mut out = Vec::new();
    let mut push = |y: f64, w: f64| {
        out.push((y, w));
        out.push((-y, w));
    };
    for win in breakpoints(0.0, t_cut, (0.0, 8.0)).windows(2) {
        let (mid, half) = (0.5 * (win[0] + win[1]), 0.5 * (win[1] - win[0]));
        for (x, w) in rule20().nodes.iter().zip(&rule20().weights) {
            push(mid + half * x, w * half);
        }
    }
    for (a, b) in [(0.0, 0.25), (0.25, 0.5), (0.5, 1.0)] {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, w) in rule40().nodes.iter().zip(&rule40().weights) {
            let v = mid + half * x;
            push(t_cut / v, w * half * t_cut / (v * v));
        }
    }
    out
}

/// `<rho_m, H rho_n> / pi` for `|m|, |n| <= nmax`, by quadrature.
pub fn hilbert_basis_matrix(nmax: i64, params: &QuadratureParams) -> Result<CMat> {
    let size = (2 * nmax + 1) as usize;
    let nodes = line_nodes(params);
    let mut out = CMat::zeros(size, size);
    for n in -nmax..=nmax {
        let f = LineFunction::Rho(n);
        let hv: Vec<C64> = nodes
            .iter()
            .map(|&(t, _)| hilbert_apply(&f, t, params))
            .collect::<Result<_>>()?;
        for m in -nmax..=nmax {
            let v: C64 = nodes
                .iter()
                .zip(&hv)
                .map(|(&(t, w), h)| rho(m, t).conj() * h * w)
                .sum();
            out[((m + nmax) as usize, (n + nmax) as usize)] = v / PI;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn gauss_rule_is_exact_for_polynomials() {
        let g = GaussRule::legendre(10);
        let v = g.integrate(0.0, 2.0, |x| c(x.powi(19), 0.0));
        assert!((v.re - 2f64.powi(20) / 20.0).abs() < 1e-8);
        let w: f64 = g.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rho_norms_and_orthogonality() {
        let p = QuadratureParams::default();
        assert!((rho_inner(0, 0, &p).unwrap() - c(PI, 0.0)).norm() < 1e-9);
        assert!((rho_inner(1, 1, &p).unwrap() - c(PI, 0.0)).norm() < 1e-9);
        assert!(rho_inner(0, 1, &p).unwrap().norm() < 1e-9);
        assert!(rho_inner(-3, 5, &p).unwrap().norm() < 1e-9);
    }

    #[test]
    fn cayley_maps_line_to_circle() {
        for t in [-30.0, -1.0, 0.0, 0.5, 7.0] {
            let z = cayley(t);
            assert!((z.norm() - 1.0).abs() < 1e-14);
            assert!((cayley_inv(z) - c(t, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn shift_symbol_pulls_back_to_z() {
        // (t - i)/(t + i) is alpha = 1, beta = -1.
        let f = RationalSymbol::factor(1.0, -1.0).unwrap();
        let co = f.coefficients(-3, 3).unwrap();
        for (k, v) in (-3..=3).zip(co) {
            let want = if k == 1 { 1.0 } else { 0.0 };
            assert!((v - c(want, 0.0)).norm() < 1e-15, "mode {k}: {v}");
        }
    }

    #[test]
    fn closed_form_matches_sampled_coefficients() {
        let f = RationalSymbol::factor(-0.5, 2.5).unwrap();
        let exact = f.coefficients(-12, 12).unwrap();
        let sampled = sampled_coefficients(|z| f.pullback(z), 0.6, -12, 12).unwrap();
        for (a, b) in exact.iter().zip(&sampled) {
            assert!((a - b).norm() < 1e-13);
        }
        let two = f.product(&RationalSymbol::factor(1.5, 0.5).unwrap());
        let co = two.coefficients(-12, 12).unwrap();
        let direct = sampled_coefficients(|z| two.pullback(z), 0.6, -12, 12).unwrap();
        for (a, b) in co.iter().zip(&direct) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn pullback_of_rho_is_fourier_mode() {
        // f rho_m expanded in rho_n: <rho_n, f rho_m>/pi = mult_matrix(f)[n, m]
        let p = QuadratureParams::default();
        let f = RationalSymbol::factor(0.5, -1.5).unwrap();
        let w = TruncationWindow::new(-3, 3, 1).unwrap();
        let m = mult_matrix(&f, &w).unwrap();
        for (n, k) in [(0, 0), (1, 0), (-1, 2), (2, -1)] {
            let q = integrate_line(|t| rho(n, t).conj() * f.eval(t) * rho(k, t), &p).unwrap() / PI;
            let e = m.mat[(w.index(n, 0), w.index(k, 0))];
            assert!((q - e).norm() < 1e-8, "({n}, {k}): {q} vs {e}");
        }
    }

    #[test]
    fn pole_on_circle_is_rejected() {
        assert!(RationalSymbol::factor(0.0, 1.0).is_err());
        assert!(mobius_coefficients(c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), 0, 1).is_err());
    }

    #[test]
    fn pole_coefficients_match_samples() {
        let w = c(0.3, 1.7);
        let exact = pole_coefficients(w, -8, 8).unwrap();
        // 1/(c^-1(z) - w) with the removable point z = 1 filled in
        let s = sampled_coefficients(|z| (1.0 - z) / ((I - w) + (I + w) * z), 0.5, -8, 8).unwrap();
        let z = C64::from_polar(1.0, 0.4);
        assert!(((1.0 - z) / ((I - w) + (I + w) * z) - 1.0 / (cayley_inv(z) - w)).norm() < 1e-14);
        for (a, b) in exact.iter().zip(&s) {
            assert!((a - b).norm() < 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn hilbert_of_rho_zero_is_rho_zero() {
        let p = QuadratureParams::default();
        for t in [-3.0, 0.0, 0.7, 4.0] {
            let h = hilbert_apply(&LineFunction::Rho(0), t, &p).unwrap();
            assert!((h - rho(0, t)).norm() < 1e-7, "t = {t}: {h}");
        }
    }

    #[test]
    fn hilbert_of_rho_minus_one_is_minus_rho() {
        let p = QuadratureParams::default();
        let h = hilbert_apply(&LineFunction::Rho(-1), 1.3, &p).unwrap();
        assert!((h + rho(-1, 1.3)).norm() < 1e-7);
    }

    #[test]
    fn stated_sign_table_disagrees_with_quadrature() {
        let p = QuadratureParams::default();
        let ts = [-2.0, -0.5, 0.3, 1.7];
        for n in -2..=2 {
            let measured = measured_hilbert_eigenvalue(n, &ts, &p).unwrap();
            assert!((measured.re + stated_hilbert_sign(n)).abs() < 1e-6, "n = {n}: {measured}");
        }
    }

    #[test]
    fn line_nodes_integrate_like_integrate_line() {
        let p = QuadratureParams::default();
        let a = integrate_line(|t| rho(2, t).conj() * rho(2, t), &p).unwrap();
        let b: C64 = line_nodes(&p).iter().map(|&(t, w)| rho(2, t).norm_sqr() * w).map(|x| c(x, 0.0)).sum();
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn hilbert_squares_to_one() {
        let p = QuadratureParams::default();
        let r = hilbert_square_residual(0, &[-1.0, 0.5], &p).unwrap();
        assert!(r < 1e-5, "{r}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn mult_matrix_is_multiplicative(a1 in 0.2f64..3.0, b1 in -3.0f64..-0.2, a2 in -3.0f64..-0.2, b2 in 0.2f64..3.0) {
            let f = RationalSymbol::factor(a1, b1).unwrap();
            let g = RationalSymbol::factor(a2, b2).unwrap();
            let w = TruncationWindow::new(-60, 60, 1).unwrap();
            let fg = mult_matrix(&f.product(&g), &w).unwrap();
            let prod = mult_matrix(&f, &w).unwrap().compose(&mult_matrix(&g, &w).unwrap()).unwrap();
            let worst = (-10..=10)
                .flat_map(|i| (-10..=10).map(move |j| (i, j)))
                .map(|(i, j)| (fg.mat[(w.index(i, 0), w.index(j, 0))] - prod.mat[(w.index(i, 0), w.index(j, 0))]).norm())
                .fold(0.0, f64::max);
            prop_assert!(worst < 1e-8, "{}", worst);
        }
    }
}
