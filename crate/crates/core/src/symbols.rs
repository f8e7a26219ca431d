//! Matrix-valued symbols on the circle: finite Fourier series, sampled
//! symbols, winding numbers and the named presets.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde_json::Value;

use crate::error::{IndexError, Result};
use crate::numerics::{singular_values, CMat};

/// Coefficients below this magnitude (relative to the largest) are dropped
/// when a series is computed from samples.
pub const COEFF_CUTOFF: f64 = 1e-14;

/// Default number of samples on the circle.
pub const DEFAULT_GRID: usize = 256;

/// `phi(x) = sum_mu coeff(mu) e^{i mu x}` with `l x l` coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierMatrixSeries {
    size: usize,
    coeffs: BTreeMap<i64, CMat>,
}

impl FourierMatrixSeries {
    pub fn new(size: usize) -> Self {
        Self { size, coeffs: BTreeMap::new() }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn insert(&mut self, mode: i64, m: CMat) -> Result<()> {
        if m.nrows() != self.size || m.ncols() != self.size {
            return Err(IndexError::Dimension(format!(
                "{}x{} coefficient in a size-{} series",
                m.nrows(),
                m.ncols(),
                self.size
            )));
        }
        self.coeffs.insert(mode, m);
        Ok(())
    }

    pub fn coeff(&self, mode: i64) -> CMat {
        self.coeffs
            .get(&mode)
            .cloned()
            .unwrap_or_else(|| CMat::zeros(self.size, self.size))
    }

    pub fn coeff_ref(&self, mode: i64) -> Option<&CMat> {
        self.coeffs.get(&mode)
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, &CMat)> {
        self.coeffs.iter().map(|(&k, v)| (k, v))
    }

    /// Smallest and largest mode with a stored coefficient.
    pub fn mode_range(&self) -> (i64, i64) {
        match (self.coeffs.keys().next(), self.coeffs.keys().next_back()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => (0, 0),
        }
    }

    /// Largest `|mu|` with a stored coefficient.
    pub fn bandwidth(&self) -> i64 {
        let (lo, hi) = self.mode_range();
        lo.abs().max(hi.abs())
    }

    pub fn eval(&self, x: f64) -> CMat {
        let mut m = CMat::zeros(self.size, self.size);
        for (&k, c) in &self.coeffs {
            m += c * C64::from_polar(1.0, k as f64 * x);
        }
        m
    }

    pub fn sample(&self, grid: usize) -> SampledSymbol {
        let values = (0..grid).map(|j| self.eval(grid_point(j, grid))).collect();
        SampledSymbol { size: self.size, values }
    }

    /// Fourier series of the pointwise inverse, computed from `grid` samples.
    pub fn inverse(&self, grid: usize) -> Result<Self> {
        self.sample(grid).inverse()?.fourier_series()
    }

    /// Scalar `e^{i k x}`.
    pub fn monomial(k: i64) -> Self {
        let mut s = Self::new(1);
        s.coeffs.insert(k, CMat::from_element(1, 1, C64::new(1.0, 0.0)));
        s
    }

    /// `diag(e^{i k_1 x}, ..., e^{i k_l x})`.
    pub fn diagonal_monomials(ks: &[i64]) -> Self {
        let l = ks.len();
        let mut s = Self::new(l);
        for (i, &k) in ks.iter().enumerate() {
            let e = s.coeffs.entry(k).or_insert_with(|| CMat::zeros(l, l));
            e[(i, i)] = C64::new(1.0, 0.0);
        }
        s
    }

    pub fn constant(c: C64, size: usize) -> Self {
        let mut s = Self::new(size);
        s.coeffs.insert(0, CMat::identity(size, size) * c);
        s
    }

    /// `diag(e^{i k x}, 1, ..., 1)`.
    pub fn degree_preset(k: i64, size: usize) -> Self {
        let mut ks = vec![0; size.max(1)];
        ks[0] = k;
        Self::diagonal_monomials(&ks)
    }

    /// `e^{i k x} (1 + eps e^{i x})` in the first entry, `1` elsewhere.
    pub fn perturbed_monomial(k: i64, eps: f64, size: usize) -> Self {
        let size = size.max(1);
        let mut s = Self::degree_preset(k, size);
        let e = s.coeffs.entry(k + 1).or_insert_with(|| CMat::zeros(size, size));
        e[(0, 0)] += C64::new(eps, 0.0);
        s
    }

    /// Parses a coefficient table: a JSON object mapping each mode to an
    /// `l x l` matrix of `[re, im]` pairs.
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| IndexError::InvalidParameter("coefficient table must be an object".into()))?;
        let mut series: Option<Self> = None;
        for (key, mat) in obj {
            let mode: i64 = key
                .trim()
                .parse()
                .map_err(|_| IndexError::InvalidParameter(format!("mode key {key:?}")))?;
            let rows = mat
                .as_array()
                .ok_or_else(|| IndexError::InvalidParameter(format!("mode {mode}: expected rows")))?;
            let l = rows.len();
            let mut m = CMat::zeros(l, l);
            for (i, row) in rows.iter().enumerate() {
                let entries = row
                    .as_array()
                    .filter(|r| r.len() == l)
                    .ok_or_else(|| IndexError::InvalidParameter(format!("mode {mode}: row {i} is not length {l}")))?;
                for (j, e) in entries.iter().enumerate() {
                    let pair = e.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
                        IndexError::InvalidParameter(format!("mode {mode}: entry ({i},{j}) is not [re, im]"))
                    })?;
                    let re = pair[0].as_f64();
                    let im = pair[1].as_f64();
                    match (re, im) {
                        (Some(re), Some(im)) => m[(i, j)] = C64::new(re, im),
                        _ => {
                            return Err(IndexError::InvalidParameter(format!(
                                "mode {mode}: entry ({i},{j}) is not numeric"
                            )))
                        }
                    }
                }
            }
            let s = series.get_or_insert_with(|| Self::new(l));
            s.insert(mode, m)?;
        }
        series.ok_or_else(|| IndexError::InvalidParameter("empty coefficient table".into()))
    }

    pub fn to_json(&self) -> Value {
        let mut obj = serde_json::Map::new();
        for (k, m) in &self.coeffs {
            let rows: Vec<Value> = (0..self.size)
                .map(|i| {
                    Value::Array(
                        (0..self.size)
                            .map(|j| serde_json::json!([m[(i, j)].re, m[(i, j)].im]))
                            .collect(),
                    )
                })
                .collect();
            obj.insert(k.to_string(), Value::Array(rows));
        }
        Value::Object(obj)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&serde_json::from_str(&text)?)
    }

    /// Parses `name:key=value,...` presets or `table:PATH`.
    pub fn parse_spec(spec: &str) -> Result<Self> {
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        if name == "table" {
            return Self::from_json_file(Path::new(rest));
        }
        let mut params: BTreeMap<&str, &str> = BTreeMap::new();
        for kv in rest.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| IndexError::InvalidParameter(format!("parameter {kv:?} is not key=value")))?;
            params.insert(k.trim(), v.trim());
        }
        let int = |k: &str, d: i64| -> Result<i64> {
            params
                .get(k)
                .map(|v| v.parse().map_err(|_| IndexError::InvalidParameter(format!("{k}={v}"))))
                .unwrap_or(Ok(d))
        };
        let float = |k: &str, d: f64| -> Result<f64> {
            params
                .get(k)
                .map(|v| v.parse().map_err(|_| IndexError::InvalidParameter(format!("{k}={v}"))))
                .unwrap_or(Ok(d))
        };
        match name {
            "monomial" => {
                let l = int("l", 1)?.max(1) as usize;
                let k = int("k", 1)?;
                Ok(Self::diagonal_monomials(&vec![k; l]))
            }
            "constant" => {
                let l = int("l", 1)?.max(1) as usize;
                let c = C64::new(float("c", float("re", 1.0)?)?, float("im", 0.0)?);
                Ok(Self::constant(c, l))
            }
            "degree_preset" => Ok(Self::degree_preset(int("k", 1)?, int("l", 2)?.max(1) as usize)),
            "perturbed_monomial" => Ok(Self::perturbed_monomial(
                int("k", 1)?,
                float("eps", 0.25)?,
                int("l", 1)?.max(1) as usize,
            )),
            "diagonal" => {
                let ks = params
                    .get("ks")
                    .ok_or_else(|| IndexError::InvalidParameter("diagonal needs ks=k1;k2;...".into()))?;
                let parsed: std::result::Result<Vec<i64>, _> = ks.split(';').map(|s| s.trim().parse()).collect();
                let ks = parsed.map_err(|_| IndexError::InvalidParameter(format!("ks={ks:?}")))?;
                Ok(Self::diagonal_monomials(&ks))
            }
            other => Err(IndexError::InvalidParameter(format!("unknown symbol preset {other:?}"))),
        }
    }
}

pub fn grid_point(j: usize, n: usize) -> f64 {
    2.0 * PI * j as f64 / n as f64
}

/// Values of a matrix symbol at `x_j = 2 pi j / N`.
#[derive(Clone, Debug)]
pub struct SampledSymbol {
    pub size: usize,
    pub values: Vec<CMat>,
}

impl SampledSymbol {
    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    /// Pointwise inverse; fails where a sample is numerically singular.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.grid_size();
        let mut values = Vec::with_capacity(n);
        for (j, v) in self.values.iter().enumerate() {
            let s = singular_values(v);
            let (smax, smin) = (s[0], *s.last().unwrap());
            if !(smin > 1e-12 * smax.max(1e-300)) {
                return Err(IndexError::NotInvertible { x: grid_point(j, n), sigma: smin });
            }
            values.push(v.clone().try_inverse().ok_or(IndexError::NotInvertible {
                x: grid_point(j, n),
                sigma: smin,
            })?);
        }
        Ok(Self { size: self.size, values })
    }

    fn entry_spectra(&self) -> Vec<Vec<C64>> {
        let n = self.grid_size();
        let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
        let mut out = Vec::with_capacity(self.size * self.size);
        for i in 0..self.size {
            for j in 0..self.size {
                let mut buf: Vec<C64> = self.values.iter().map(|m| m[(i, j)]).collect();
                fft.process(&mut buf);
                for b in buf.iter_mut() {
                    *b /= n as f64;
                }
                out.push(buf);
            }
        }
        out
    }

    /// Fourier coefficients on modes `-N/2..N/2-1`, dropping those below
    /// `COEFF_CUTOFF` relative to the largest.
    pub fn fourier_series(&self) -> Result<FourierMatrixSeries> {
        let n = self.grid_size();
        let l = self.size;
        let spectra = self.entry_spectra();
        let mut all: BTreeMap<i64, CMat> = BTreeMap::new();
        for k in 0..n {
            let mode = if k < n / 2 { k as i64 } else { k as i64 - n as i64 };
            let m = CMat::from_fn(l, l, |i, j| spectra[i * l + j][k]);
            all.insert(mode, m);
        }
        let biggest = all.values().map(|m| m.iter().map(|c| c.norm()).fold(0.0, f64::max)).fold(0.0, f64::max);
        let mut s = FourierMatrixSeries::new(l);
        for (k, m) in all {
            let mag = m.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if mag > COEFF_CUTOFF * biggest {
                s.insert(k, m)?;
            }
        }
        Ok(s)
    }

    /// Samples of the derivative via spectral differentiation.
    pub fn derivative(&self) -> Self {
        let n = self.grid_size();
        let l = self.size;
        let mut spectra = self.entry_spectra();
        let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n);
        for buf in spectra.iter_mut() {
            for (k, b) in buf.iter_mut().enumerate() {
                let mode = if k < n / 2 { k as i64 } else { k as i64 - n as i64 };
                *b *= if n.is_multiple_of(2) && k == n / 2 { C64::new(0.0, 0.0) } else { C64::new(0.0, mode as f64) };
            }
            ifft.process(buf);
        }
        let values = (0..n).map(|j| CMat::from_fn(l, l, |a, b| spectra[a * l + b][j])).collect();
        Self { size: l, values }
    }
}

/// Degree of `det(phi)` by nearest-branch phase unwrapping over the grid.
/// A phase step of magnitude `pi` or more means the grid cannot resolve the
/// symbol and is reported instead of guessed.
pub fn winding_number(s: &SampledSymbol) -> Result<i64> {
    let n = s.grid_size();
    if n < 2 {
        return Err(IndexError::InvalidParameter("at least two samples are needed".into()));
    }
    let dets: Vec<C64> = s.values.iter().map(|m| m.determinant()).collect();
    for (j, d) in dets.iter().enumerate() {
        if d.norm() == 0.0 || !d.norm().is_finite() {
            return Err(IndexError::NotInvertible { x: grid_point(j, n), sigma: 0.0 });
        }
    }
    let mut total = 0.0;
    for j in 0..n {
        let next = (j + 1) % n;
        let step = (dets[next] / dets[j]).arg();
        if step.abs() >= PI {
            return Err(IndexError::GridTooCoarse { index: j, next, step });
        }
        total += step;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolBounds {
    pub sup_norm: f64,
    pub sup_inverse_norm: f64,
    pub sup_derivative_norm: f64,
}

/// Sampled `sup ||phi||`, `sup ||phi^-1||` and `sup ||phi'||` (operator norms).
pub fn verify_bounds(s: &SampledSymbol) -> Result<SymbolBounds> {
    let inv = s.inverse()?;
    let d = s.derivative();
    let sup = |v: &[CMat]| v.iter().map(|m| singular_values(m)[0]).fold(0.0, f64::max);
    Ok(SymbolBounds {
        sup_norm: sup(&s.values),
        sup_inverse_norm: sup(&inv.values),
        sup_derivative_norm: sup(&d.values),
    })
}

/// Whether the straight line from `phi` to `psi` stays invertible by the
/// perturbation criterion `sup ||phi - psi|| < 1 / sup ||phi^-1||`.
pub fn perturbation_homotopy_valid(phi: &SampledSymbol, psi: &SampledSymbol) -> Result<bool> {
    if phi.grid_size() != psi.grid_size() || phi.size != psi.size {
        return Err(IndexError::Dimension("symbols sampled on different grids".into()));
    }
    let inv_norm = verify_bounds(phi)?.sup_inverse_norm;
    let dist = phi
        .values
        .iter()
        .zip(&psi.values)
        .map(|(a, b)| singular_values(&(a - b))[0])
        .fold(0.0, f64::max);
    Ok(dist < 1.0 / inv_norm)
}
