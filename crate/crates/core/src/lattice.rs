//! Finite-difference model of the partitioned cylinder. The `t` direction is
//! a zero-padded lattice on `[-L, L]` with a forward difference `d`; the
//! circle direction is kept in Fourier modes `lambda`, where `-i d/dx` is
//! exactly `lambda`. Per mode, `D+ = d + lambda`, `D- = (D+)^T` and
//! `D + eps = [[1, D-], [D+, -1]]`, so `u_phi = (D + eps)^-1 diag(phi, 1) (D + eps)`
//! is a block-sparse operator in `lambda` with real spatial blocks.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{IndexError, Result};
use crate::kron::{kron_zeta, Interior, KronOperator};
use crate::numerics::{converge_index, round_to_integer, CMat, GrowthPolicy, IndexReport, Refine};
use crate::pairing::PartitionedOperatorModel;
use crate::symbols::FourierMatrixSeries;

type RMat = DMatrix<f64>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lattice {
    /// `t` ranges over `[-L, L]`.
    pub half_length: f64,
    pub nt: usize,
    pub lambda_lo: i64,
    pub lambda_hi: i64,
}

impl Default for Lattice {
    fn default() -> Self {
        Self { half_length: 4.0, nt: 128, lambda_lo: -16, lambda_hi: 15 }
    }
}

impl Lattice {
    /// `modes` circle modes `-modes/2 ..= modes/2 - 1`.
    pub fn new(half_length: f64, nt: usize, modes: usize) -> Result<Self> {
        if !(half_length > 0.0) || nt < 8 || modes < 2 || !modes.is_multiple_of(2) {
            return Err(IndexError::InvalidParameter(format!(
                "lattice L = {half_length}, nt = {nt}, modes = {modes} (need L > 0, nt >= 8, even modes >= 2)"
            )));
        }
        let m = (modes / 2) as i64;
        Ok(Self { half_length, nt, lambda_lo: -m, lambda_hi: m - 1 })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_length / self.nt as f64
    }

    pub fn t(&self, j: usize) -> f64 {
        -self.half_length + self.h() * (j as f64 + 0.5)
    }

    pub fn modes(&self) -> usize {
        (self.lambda_hi - self.lambda_lo + 1) as usize
    }

    /// Sites times spinor components.
    pub fn spatial_dim(&self) -> usize {
        2 * self.nt
    }

    pub fn contains_lambda(&self, l: i64) -> bool {
        (self.lambda_lo..=self.lambda_hi).contains(&l)
    }
}

impl Refine for Lattice {
    fn refined(&self) -> Self {
        Self {
            half_length: self.half_length,
            nt: 2 * self.nt,
            lambda_lo: 2 * self.lambda_lo,
            lambda_hi: 2 * self.lambda_hi + 1,
        }
    }

    fn describe(&self) -> String {
        format!("L {}, nt {}, lambda {}..={}", self.half_length, self.nt, self.lambda_lo, self.lambda_hi)
    }
}

/// Forward difference `(f_{j+1} - f_j) / h`, zero past the last site.
pub fn forward_difference(lat: &Lattice) -> RMat {
    let n = lat.nt;
    let h = lat.h();
    RMat::from_fn(n, n, |i, j| {
        if i == j {
            -1.0 / h
        } else if j == i + 1 {
            1.0 / h
        } else {
            0.0
        }
    })
}

/// `D_lambda = [[0, D-], [D+, 0]]` and the grading `eps = diag(1, -1)`.
pub fn build_dirac(lat: &Lattice, lambda: i64) -> (RMat, RMat) {
    let n = lat.nt;
    let dp = forward_difference(lat) + RMat::identity(n, n) * lambda as f64;
    let mut d = RMat::zeros(2 * n, 2 * n);
    d.view_mut((0, n), (n, n)).copy_from(&dp.transpose());
    d.view_mut((n, 0), (n, n)).copy_from(&dp);
    let mut eps = RMat::identity(2 * n, 2 * n);
    eps.view_mut((n, n), (n, n)).fill_with_identity();
    eps.view_mut((n, n), (n, n)).scale_mut(-1.0);
    (d, eps)
}

/// `D + eps` and its inverse for every mode of the lattice.
pub struct DiracSystem {
    pub lattice: Lattice,
    r: HashMap<i64, RMat>,
    r_inv: HashMap<i64, RMat>,
}

impl DiracSystem {
    pub fn new(lat: &Lattice) -> Result<Self> {
        let mut r = HashMap::new();
        let mut r_inv = HashMap::new();
        for lambda in lat.lambda_lo..=lat.lambda_hi {
            let (d, eps) = build_dirac(lat, lambda);
            let m = d + eps;
            let inv = m.clone().try_inverse().ok_or(IndexError::Singular(0.0))?;
            r.insert(lambda, m);
            r_inv.insert(lambda, inv);
        }
        Ok(Self { lattice: lat.clone(), r, r_inv })
    }

    pub fn r(&self, lambda: i64) -> &RMat {
        &self.r[&lambda]
    }

    pub fn r_inv(&self, lambda: i64) -> &RMat {
        &self.r_inv[&lambda]
    }

    /// `R_b^-1 Pi_up R_a`: the upper spinor carries `phi`.
    fn up(&self, b: i64, a: i64) -> RMat {
        let n = self.lattice.nt;
        self.r_inv(b).columns(0, n) * self.r(a).rows(0, n)
    }

    /// `R_a^-1 Pi_lo R_a`.
    fn lo(&self, a: i64) -> RMat {
        let n = self.lattice.nt;
        self.r_inv(a).columns(n, n) * self.r(a).rows(n, n)
    }

    /// Remainder form of the `phi` part: `Pi_lo + R_b^-1 [[1, -mu], [0, 1]]`, `mu = b - a`.
    fn up_remainder(&self, b: i64, a: i64) -> RMat {
        let n = self.lattice.nt;
        let mu = (b - a) as f64;
        let mut v = RMat::identity(2 * n, 2 * n);
        v.view_mut((0, n), (n, n)).fill_diagonal(-mu);
        let mut out = self.r_inv(b) * v;
        for j in n..2 * n {
            out[(j, j)] += 1.0;
        }
        out
    }

    /// Remainder form of the identity part: `Pi_up - R_a^-1`.
    fn lo_remainder(&self, a: i64) -> RMat {
        let n = self.lattice.nt;
        let mut out = -self.r_inv(a);
        for j in 0..n {
            out[(j, j)] += 1.0;
        }
        out
    }
}

/// `u_phi = (D + eps)^-1 diag(phi, 1) (D + eps)` on the lattice.
pub fn build_u_phi(phi: &FourierMatrixSeries, sys: &DiracSystem) -> Result<KronOperator<f64>> {
    let lat = &sys.lattice;
    let l = phi.size();
    let mut op = KronOperator::new(lat.lambda_lo, lat.lambda_hi, l, lat.spatial_dim());
    for a in lat.lambda_lo..=lat.lambda_hi {
        op.push(a, a, CMat::identity(l, l), Arc::new(sys.lo(a)))?;
        for (mu, c) in phi.modes() {
            let b = a + mu;
            if lat.contains_lambda(b) && c.iter().any(|v| v.norm() > 0.0) {
                op.push(b, a, c.clone(), Arc::new(sys.up(b, a)))?;
            }
        }
    }
    Ok(op)
}

/// Largest entry difference between the conjugation form of `u_phi` and the
/// remainder form `diag(1, phi) + (D + eps)^-1 [[phi - 1, -c(grad phi)-], [0, phi - 1]]`,
/// compared block by block for the modes of `phi`.
pub fn remainder_agreement(phi: &FourierMatrixSeries, sys: &DiracSystem) -> f64 {
    let lat = &sys.lattice;
    let mut worst: f64 = 0.0;
    for a in lat.lambda_lo..=lat.lambda_hi {
        worst = worst.max((sys.lo(a) - sys.lo_remainder(a)).amax());
        for (mu, _) in phi.modes() {
            let b = a + mu;
            if lat.contains_lambda(b) {
                worst = worst.max((sys.up(b, a) - sys.up_remainder(b, a)).amax());
            }
        }
    }
    worst
}

/// The projection onto sites with `t >= cut`, on both spinor components.
pub fn partition_projector(lat: &Lattice, cut: f64) -> Result<Vec<f64>> {
    if cut.abs() > lat.half_length / 2.0 {
        return Err(IndexError::Range(format!(
            "cut {cut} outside the safe region |a| <= {}",
            lat.half_length / 2.0
        )));
    }
    let half: Vec<f64> = (0..lat.nt).map(|j| if lat.t(j) >= cut { 1.0 } else { 0.0 }).collect();
    Ok([half.clone(), half].concat())
}

pub fn partition_chi(lat: &Lattice, cut: f64) -> Result<Vec<f64>> {
    Ok(partition_projector(lat, cut)?.iter().map(|p| 2.0 * p - 1.0).collect())
}

/// `u_phi`, `u_{phi^-1}` and the cut on the lattice. The interior drops one
/// symbol bandwidth of modes at each end and keeps every site.
pub fn lattice_model(
    phi: &FourierMatrixSeries,
    phi_inv: &FourierMatrixSeries,
    lat: &Lattice,
    cut: f64,
) -> Result<PartitionedOperatorModel<KronOperator<f64>>> {
    let chi = partition_chi(lat, cut)?;
    let sys = DiracSystem::new(lat)?;
    let band = phi.bandwidth().max(phi_inv.bandwidth());
    Ok(PartitionedOperatorModel {
        u: build_u_phi(phi, &sys)?,
        u_inv: build_u_phi(phi_inv, &sys)?,
        chi,
        interior: Interior {
            block_lo: lat.lambda_lo + band,
            block_hi: lat.lambda_hi - band,
            spatial: vec![true; lat.spatial_dim()],
        },
    })
}

/// `-zeta(u^-1, u)` for one lattice.
pub fn lattice_index_raw(phi: &FourierMatrixSeries, phi_inv: &FourierMatrixSeries, lat: &Lattice, cut: f64) -> Result<C64> {
    let m = lattice_model(phi, phi_inv, lat, cut)?;
    Ok(-kron_zeta(&m.u_inv, &m.u, &m.chi)?)
}

/// The lattice index, refining the lattice until two successive values round alike.
pub fn lattice_index(
    phi: &FourierMatrixSeries,
    phi_inv: &FourierMatrixSeries,
    lat: &Lattice,
    cut: f64,
    policy: &GrowthPolicy,
) -> Result<IndexReport> {
    converge_index(lat.clone(), policy, |l| lattice_index_raw(phi, phi_inv, l, cut))
}

#[derive(Clone, Debug, Serialize)]
pub struct CobordismReport {
    pub cuts: [f64; 2],
    pub indices: [i64; 2],
    pub raw: [[f64; 2]; 2],
    pub equal: bool,
}

/// The lattice index for two cuts; they must agree.
pub fn cobordism_shift_test(
    phi: &FourierMatrixSeries,
    phi_inv: &FourierMatrixSeries,
    lat: &Lattice,
    a1: f64,
    a2: f64,
    policy: &GrowthPolicy,
) -> Result<CobordismReport> {
    let r1 = lattice_index(phi, phi_inv, lat, a1, policy)?;
    let r2 = lattice_index(phi, phi_inv, lat, a2, policy)?;
    Ok(CobordismReport {
        cuts: [a1, a2],
        indices: [r1.rounded, r2.rounded],
        raw: [r1.raw, r2.raw],
        equal: r1.rounded == r2.rounded,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DiracChecks {
    /// `max |(D + eps)^2 - D^2 - 1|`
    pub square_defect: f64,
    /// `max |eps D + D eps|`
    pub anticommutator: f64,
    /// `max |D - D^T|`
    pub asymmetry: f64,
    /// smallest singular value of `D + eps` over all modes
    pub sigma_min: f64,
}

pub fn dirac_checks(lat: &Lattice) -> DiracChecks {
    let mut out = DiracChecks { square_defect: 0.0, anticommutator: 0.0, asymmetry: 0.0, sigma_min: f64::INFINITY };
    for lambda in lat.lambda_lo..=lat.lambda_hi {
        let (d, eps) = build_dirac(lat, lambda);
        let r = &d + &eps;
        let n = d.nrows();
        let sq = &r * &r - &d * &d - RMat::identity(n, n);
        out.square_defect = out.square_defect.max(sq.amax());
        out.anticommutator = out.anticommutator.max((&eps * &d + &d * &eps).amax());
        out.asymmetry = out.asymmetry.max((&d - d.transpose()).amax());
        // R is symmetric, so its singular values are the absolute eigenvalues
        let ev = SymmetricEigen::new(r).eigenvalues;
        out.sigma_min = out.sigma_min.min(ev.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min));
    }
    out
}

/// `||u||` by power iteration on `u^* u`.
pub fn operator_norm(u: &KronOperator<f64>, iterations: usize) -> f64 {
    let dim = u.dim();
    let mut x: Vec<C64> = (0..dim).map(|i| C64::new(1.0 + (i % 7) as f64 * 0.1, 0.0)).collect();
    let mut est = 0.0;
    for _ in 0..iterations {
        let nx = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= nx);
        let y = apply(u, &x, false);
        est = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        x = apply(u, &y, true);
    }
    est
}

fn apply(u: &KronOperator<f64>, x: &[C64], adjoint: bool) -> Vec<C64> {
    let (l, m) = (u.components, u.spatial_dim);
    let mut y = vec![C64::new(0.0, 0.0); x.len()];
    for term in &u.terms {
        let (row, col) = if adjoint { (term.col, term.row) } else { (term.row, term.col) };
        for ci in 0..l {
            for cj in 0..l {
                let c = if adjoint { term.coeff[(cj, ci)].conj() } else { term.coeff[(ci, cj)] };
                if c.norm() == 0.0 {
                    continue;
                }
                let xs = DVector::from_fn(m, |s, _| x[u.index(col, cj, s)]);
                let sp = term.spatial.map(|v| C64::new(v, 0.0));
                let ys = if adjoint { sp.transpose() * xs } else { sp * xs };
                for s in 0..m {
                    y[u.index(row, ci, s)] += c * ys[s];
                }
            }
        }
    }
    y
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayProfile {
    /// `(distance from the cut, largest |[chi, u]| entry at that distance)`
    pub profile: Vec<(f64, f64)>,
    /// fitted `C r^d`
    pub c: f64,
    pub r: f64,
}

/// Entries of `[chi, u]` by the distance of the farther site from the cut,
/// with a least-squares fit of `log |entry|` against distance.
pub fn commutator_decay(u: &KronOperator<f64>, lat: &Lattice, cut: f64) -> Result<DecayProfile> {
    let chi = partition_chi(lat, cut)?;
    let n = lat.nt;
    let h = lat.h();
    let mut best: HashMap<usize, f64> = HashMap::new();
    for term in &u.terms {
        let scale = term.coeff.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let sp = &term.spatial;
        for i in 0..sp.nrows() {
            for j in 0..sp.ncols() {
                if chi[i] == chi[j] {
                    continue;
                }
                let d = (lat.t(i % n) - cut).abs().max((lat.t(j % n) - cut).abs());
                let bin = (d / h).floor() as usize;
                let v = 2.0 * sp[(i, j)].abs() * scale;
                let e = best.entry(bin).or_insert(0.0);
                *e = e.max(v);
            }
        }
    }
    let mut profile: Vec<(f64, f64)> = best.into_iter().map(|(b, v)| ((b as f64 + 0.5) * h, v)).collect();
    profile.sort_by(|a, b| a.0.total_cmp(&b.0));
    let pts: Vec<(f64, f64)> = profile.iter().filter(|p| p.1 > 1e-13).map(|&(d, v)| (d, v.ln())).collect();
    if pts.len() < 2 {
        return Err(IndexError::InvalidParameter("too few nonzero commutator entries to fit".into()));
    }
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let (mx, my) = (sx / k, sy / k);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(DecayProfile { profile, c: (my - slope * mx).exp(), r: slope.exp() })
}

/// Index for the monomial `e^{ikx}` on the lattice.
pub fn monomial_lattice_index(k: i64, lat: &Lattice, cut: f64, policy: &GrowthPolicy) -> Result<IndexReport> {
    lattice_index(&FourierMatrixSeries::monomial(k), &FourierMatrixSeries::monomial(-k), lat, cut, policy)
}

/// Rounded single-lattice index, for quick checks.
pub fn lattice_index_rounded(k: i64, lat: &Lattice, cut: f64, tol: f64) -> Result<i64> {
    round_to_integer(
        lattice_index_raw(&FourierMatrixSeries::monomial(k), &FourierMatrixSeries::monomial(-k), lat, cut)?,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::TOL_INTEGER;

    fn small() -> Lattice {
        Lattice::new(4.0, 64, 16).unwrap()
    }

    #[test]
    fn structural_identities() {
        let c = dirac_checks(&small());
        assert!(c.square_defect < 1e-9, "{c:?}");
        assert_eq!(c.anticommutator, 0.0);
        assert_eq!(c.asymmetry, 0.0);
        // (D + eps)^2 = D^2 + 1 >= 1
        assert!(c.sigma_min >= 1.0 - 1e-12, "{c:?}");
    }

    #[test]
    fn projector_and_cut_range() {
        let lat = small();
        let p = partition_projector(&lat, 0.0).unwrap();
        assert_eq!(p.iter().sum::<f64>() as usize, lat.nt);
        let q = partition_projector(&lat, 2.0).unwrap();
        assert_eq!(q.iter().sum::<f64>() as usize, lat.nt / 2);
        assert!(matches!(partition_projector(&lat, 2.5), Err(IndexError::Range(_))));
    }

    #[test]
    fn identity_symbol_gives_identity() {
        let sys = DiracSystem::new(&small()).unwrap();
        let one = FourierMatrixSeries::constant(C64::new(1.0, 0.0), 1);
        let u = build_u_phi(&one, &sys).unwrap();
        let d = u.to_dense();
        let eye = CMat::identity(d.nrows(), d.ncols());
        assert!((d - eye).camax() < 1e-10);
    }

    #[test]
    fn remainder_forms_agree() {
        let sys = DiracSystem::new(&small()).unwrap();
        for phi in [FourierMatrixSeries::monomial(1), FourierMatrixSeries::constant(C64::new(2.0, 1.0), 1)] {
            assert!(remainder_agreement(&phi, &sys) < 1e-8);
        }
    }

    #[test]
    fn norm_estimate_for_phi_one() {
        let lat = Lattice::new(4.0, 32, 8).unwrap();
        let sys = DiracSystem::new(&lat).unwrap();
        let u = build_u_phi(&FourierMatrixSeries::monomial(1), &sys).unwrap();
        let n = operator_norm(&u, 60);
        assert!(n <= 9.0, "{n}");
    }

    // The contributing half-line problem for k = 1 is the lambda = -1 block,
    // whose compression has kernel e^{-t/2} and no cokernel: the index is +k.
    #[test]
    fn lattice_gives_plus_k() {
        let lat = Lattice::new(4.0, 64, 16).unwrap();
        assert_eq!(lattice_index_rounded(0, &lat, 0.0, TOL_INTEGER).unwrap(), 0);
        for k in [1, -1] {
            let raw = lattice_index_raw(&FourierMatrixSeries::monomial(k), &FourierMatrixSeries::monomial(-k), &lat, 0.0)
                .unwrap();
            assert!((raw.re - k as f64).abs() < 0.05, "k = {k}: {raw}");
        }
    }

    #[test]
    fn cut_position_does_not_matter() {
        let lat = Lattice::new(4.0, 64, 16).unwrap();
        let phi = FourierMatrixSeries::monomial(1);
        let a = lattice_index_raw(&phi, &FourierMatrixSeries::monomial(-1), &lat, 0.0).unwrap();
        let b = lattice_index_raw(&phi, &FourierMatrixSeries::monomial(-1), &lat, 2.0).unwrap();
        assert!((a - b).norm() < 1e-2, "{a} {b}");
    }

    #[test]
    fn commutator_decays_away_from_cut() {
        let lat = Lattice::new(4.0, 64, 8).unwrap();
        let sys = DiracSystem::new(&lat).unwrap();
        let u = build_u_phi(&FourierMatrixSeries::monomial(1), &sys).unwrap();
        let p = commutator_decay(&u, &lat, 0.0).unwrap();
        assert!(p.r < 1.0, "{p:?}");
    }
}
