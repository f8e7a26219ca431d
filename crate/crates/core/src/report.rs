//! Command line driver: runs module pipelines and writes a JSON report.
//!
//! Exit codes: 0 when every check passes, 2 for usage errors, 3 when a
//! computation does not converge, 4 when a stated identity or bound fails.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::cylinder::{
    cylinder_index, ds_gap_check, homotopy_continuity_check, phik_index, resolvent_bound_check, s_grid,
    CylinderWindow, TrialMode, ENDPOINT_RESOLVENT_BOUND, F_BOUND, G_BOUND, RESOLVENT_BOUND,
};
use crate::error::{IndexError, Result};
use crate::hardy::{gohberg_krein_check, toeplitz_index};
use crate::lattice::{cobordism_shift_test, dirac_checks, lattice_index, remainder_agreement, DiracSystem, Lattice};
use crate::line::{
    hilbert_residual, hilbert_square_residual, measured_hilbert_eigenvalue, rho_inner, stated_hilbert_sign,
    QuadratureParams, RationalSymbol,
};
use crate::numerics::{integer_residual, GrowthPolicy, IndexReport, TruncationWindow};
use crate::pairing::{main_theorem_check, Backend, PairingConfig};
use crate::symbols::{verify_bounds, winding_number, FourierMatrixSeries};
use crate::wiener_hopf::{stated_wh_index, wh_homotopy_constancy, wh_index};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_FALSIFIED: i32 = 4;

/// Largest dense dimension a run may request.
pub const MAX_DENSE_DIM: i64 = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    Spectral,
    Lattice,
    Both,
}

impl BackendChoice {
    pub fn backends(self) -> Vec<Backend> {
        match self {
            BackendChoice::Spectral => vec![Backend::Spectral],
            BackendChoice::Lattice => vec![Backend::Lattice],
            BackendChoice::Both => vec![Backend::Spectral, Backend::Lattice],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Degree of det(phi) and sampled symbol bounds
    Winding,
    /// Toeplitz index by the cocycle, the winding number and kernel counts
    Toeplitz,
    /// Orthonormality of the rho basis and the Hilbert transform eigenrelation
    BasisVerify,
    /// Index of the Wiener-Hopf operator with symbol (t + i beta)/(t + i alpha)
    WienerHopf,
    /// Spectral cylinder index and the homotopy bounds
    Cylinder,
    /// Lattice index, cobordism invariance and lattice identities
    Lattice,
    /// 8 pi i times the pairing against the Toeplitz index
    Pairing,
    /// Every check above
    All,
}

/// Run parameters. A JSON config file may set any subset; flags override it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub symbol: String,
    pub grid: usize,
    /// Toeplitz window half-width.
    pub modes: i64,
    pub lambda_range: [i64; 2],
    pub n_range: [i64; 2],
    /// `[L, nt, circle modes]`
    pub lattice: [f64; 3],
    pub cut: f64,
    pub tol_integer: f64,
    pub tol_rank: f64,
    pub max_refinements: usize,
    pub backend: BackendChoice,
    pub alpha: f64,
    pub beta: f64,
    /// Rho-basis checks cover `|m|, |n| <= basis_max`.
    pub basis_max: i64,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let cyl = CylinderWindow::default();
        let lat = Lattice::default();
        Self {
            command: None,
            symbol: "monomial:k=1".into(),
            grid: crate::symbols::DEFAULT_GRID,
            modes: 32,
            lambda_range: [cyl.lambda_lo, cyl.lambda_hi],
            n_range: [cyl.n_lo, cyl.n_hi],
            lattice: [lat.half_length, lat.nt as f64, lat.modes() as f64],
            cut: 0.0,
            tol_integer: crate::numerics::TOL_INTEGER,
            tol_rank: crate::numerics::TOL_RANK,
            max_refinements: 4,
            backend: BackendChoice::Both,
            alpha: 2.0,
            beta: -1.0,
            basis_max: 8,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(IndexError::InvalidParameter(m));
        if !(self.tol_integer > 0.0 && self.tol_integer < 0.5) {
            return bad(format!("tol-integer {} must lie in (0, 0.5)", self.tol_integer));
        }
        if !(self.tol_rank > 0.0) {
            return bad(format!("tol-rank {} must be positive", self.tol_rank));
        }
        if self.grid < 8 {
            return bad(format!("grid {} too small", self.grid));
        }
        if self.modes < 1 || 2 * self.modes + 1 > MAX_DENSE_DIM {
            return bad(format!("modes {} outside 1..={}", self.modes, (MAX_DENSE_DIM - 1) / 2));
        }
        if self.basis_max < 0 || self.basis_max > 32 {
            return bad(format!("basis-max {} outside 0..=32", self.basis_max));
        }
        self.cylinder()?;
        self.lattice()?;
        if self.alpha == 0.0 || self.beta == 0.0 {
            return bad("alpha and beta must be nonzero".into());
        }
        Ok(())
    }

    pub fn cylinder(&self) -> Result<CylinderWindow> {
        let w = CylinderWindow::new(self.lambda_range[0], self.lambda_range[1], self.n_range[0], self.n_range[1])?;
        if w.n_count() as i64 > MAX_DENSE_DIM {
            return Err(IndexError::InvalidParameter(format!("rho-window {} exceeds {MAX_DENSE_DIM}", w.n_count())));
        }
        Ok(w)
    }

    pub fn lattice(&self) -> Result<Lattice> {
        let [l, nt, modes] = self.lattice;
        if nt.fract() != 0.0 || modes.fract() != 0.0 || nt < 0.0 || modes < 0.0 {
            return Err(IndexError::InvalidParameter(format!("lattice {:?}: nt and modes must be integers", self.lattice)));
        }
        let lat = Lattice::new(l, nt as usize, modes as usize)?;
        if lat.spatial_dim() as i64 > MAX_DENSE_DIM {
            return Err(IndexError::InvalidParameter(format!("lattice spinor dimension {} exceeds {MAX_DENSE_DIM}", lat.spatial_dim())));
        }
        Ok(lat)
    }

    pub fn policy(&self) -> GrowthPolicy {
        GrowthPolicy { max_refinements: self.max_refinements, tol_integer: self.tol_integer }
    }

    pub fn phi(&self) -> Result<FourierMatrixSeries> {
        FourierMatrixSeries::parse_spec(&self.symbol)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub raw: [f64; 2],
    pub rounded: Option<i64>,
    pub residual: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn value(name: impl Into<String>, raw: f64, residual: f64, pass: bool) -> Self {
        Self { name: name.into(), raw: [raw, 0.0], rounded: None, residual, pass, detail: None }
    }

    pub fn integer(name: impl Into<String>, raw: C64, rounded: i64, expected: i64) -> Self {
        Self {
            name: name.into(),
            raw: [raw.re, raw.im],
            rounded: Some(rounded),
            residual: integer_residual(raw),
            pass: rounded == expected,
            detail: None,
        }
    }

    pub fn from_index(name: impl Into<String>, r: &IndexReport, expected: i64) -> Self {
        let mut c = Self::integer(name, r.raw_c(), r.rounded, expected);
        c.detail = Some(format!("expected {expected}; {}", r.window));
        c
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub elapsed_ms: u64,
    pub version: String,
}

impl RunReport {
    /// Pretty JSON with sorted keys.
    pub fn to_json(&self) -> Result<String> {
        let v = serde_json::to_value(self)?;
        Ok(serde_json::to_string_pretty(&v)?)
    }
}

/// Collects checks and the exit code they imply.
pub struct Runner {
    pub config: RunConfig,
    pub checks: Vec<Check>,
    code: i32,
}

fn code_for(e: &IndexError) -> i32 {
    match e {
        IndexError::Falsified(_) => EXIT_FALSIFIED,
        IndexError::InvalidParameter(_) | IndexError::Json(_) | IndexError::Io(_) => EXIT_USAGE,
        _ => EXIT_NONCONVERGENCE,
    }
}

fn worse(a: i32, b: i32) -> i32 {
    let rank = |c| match c {
        EXIT_USAGE => 3,
        EXIT_FALSIFIED => 2,
        EXIT_NONCONVERGENCE => 1,
        _ => 0,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

impl Runner {
    pub fn new(config: RunConfig) -> Self {
        Self { config, checks: Vec::new(), code: EXIT_OK }
    }

    pub fn exit_code(&self) -> i32 {
        self.code
    }

    pub fn push(&mut self, c: Check) {
        if !c.pass {
            self.code = worse(self.code, EXIT_FALSIFIED);
        }
        self.checks.push(c);
    }

    /// Records the checks of a stage, or a failed check naming the error.
    pub fn stage(&mut self, name: &str, f: impl FnOnce(&RunConfig) -> Result<Vec<Check>>) {
        match f(&self.config) {
            Ok(cs) => cs.into_iter().for_each(|c| self.push(c)),
            Err(e) => {
                self.code = worse(self.code, code_for(&e));
                // JSON has no NaN; the detail carries the error
                self.checks.push(Check {
                    name: name.into(),
                    raw: [0.0, 0.0],
                    rounded: None,
                    residual: 0.0,
                    pass: false,
                    detail: Some(e.to_string()),
                });
            }
        }
    }

    pub fn run(&mut self, command: Command) {
        match command {
            Command::Winding => self.stage("winding", winding_checks),
            Command::Toeplitz => self.stage("toeplitz", toeplitz_checks),
            Command::BasisVerify => self.stage("basis", basis_checks),
            Command::WienerHopf => self.stage("wiener_hopf", wiener_hopf_checks),
            Command::Cylinder => {
                self.stage("cylinder_index", cylinder_index_checks);
                self.stage("cylinder_bounds", cylinder_bound_checks);
            }
            Command::Lattice => self.stage("lattice", lattice_checks),
            Command::Pairing => self.stage("pairing", pairing_checks),
            Command::All => {
                for c in [
                    Command::Winding,
                    Command::Toeplitz,
                    Command::BasisVerify,
                    Command::WienerHopf,
                    Command::Cylinder,
                    Command::Lattice,
                    Command::Pairing,
                ] {
                    self.run(c);
                }
            }
        }
    }
}

/// `-deg det(phi)`, the value every index route should reproduce.
fn expected_index(cfg: &RunConfig, phi: &FourierMatrixSeries) -> Result<i64> {
    Ok(-winding_number(&phi.sample(cfg.grid))?)
}

pub fn winding_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let phi = cfg.phi()?;
    let s = phi.sample(cfg.grid);
    let w = winding_number(&s)?;
    let b = verify_bounds(&s)?;
    Ok(vec![
        Check::integer("winding", C64::new(w as f64, 0.0), w, w),
        Check {
            name: "symbol_bounds".into(),
            raw: [b.sup_norm, b.sup_inverse_norm],
            rounded: None,
            residual: 0.0,
            pass: b.sup_norm.is_finite() && b.sup_inverse_norm.is_finite(),
            detail: Some(format!("sup |phi'| = {:.6}", b.sup_derivative_norm)),
        },
    ])
}

pub fn toeplitz_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let phi = cfg.phi()?;
    let want = expected_index(cfg, &phi)?;
    let w = TruncationWindow::symmetric(cfg.modes, phi.size())?;
    let r = toeplitz_index(&phi, &w, cfg.grid, &cfg.policy())?;
    let mut out = vec![Check::from_index("toeplitz_index", &r, want)];
    out.push(match gohberg_krein_check(&phi, &w, cfg.grid, &cfg.policy(), cfg.tol_rank) {
        Ok(g) => {
            let diff = g.kernel as i64 - g.cokernel as i64;
            Check::integer("toeplitz_kernel_cokernel", C64::new(diff as f64, 0.0), diff, want)
                .with_detail(format!("kernel {}, cokernel {}, winding {}", g.kernel, g.cokernel, g.winding))
        }
        Err(IndexError::Falsified(m)) => Check::value("toeplitz_kernel_cokernel", 0.0, 0.0, false).with_detail(m),
        Err(e) => return Err(e),
    });
    Ok(out)
}

/// Sample points for pointwise Hilbert transform checks.
pub fn hilbert_points(n: usize) -> Vec<f64> {
    (0..n).map(|j| -4.75 + 9.5 * j as f64 / (n - 1).max(1) as f64).collect()
}

pub const ORTHO_TOL: f64 = 1e-6;
pub const HILBERT_TOL: f64 = 1e-3;
pub const HILBERT_SQUARE_TOL: f64 = 2e-3;

pub fn basis_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let p = QuadratureParams::default();
    let nmax = cfg.basis_max;
    let mut worst: f64 = 0.0;
    for m in -nmax..=nmax {
        for n in -nmax..=nmax {
            let want = if m == n { std::f64::consts::PI } else { 0.0 };
            worst = worst.max((rho_inner(m, n, &p)? - C64::new(want, 0.0)).norm());
        }
    }
    let mut out = vec![Check::value("rho_orthonormality", worst, worst, worst < ORTHO_TOL)];
    let ts = hilbert_points(20);
    for n in -3..=3 {
        let r = hilbert_residual(n, stated_hilbert_sign(n), &ts, &p)?;
        let ev = measured_hilbert_eigenvalue(n, &ts, &p)?;
        out.push(
            Check::value(format!("hilbert_eigenrelation_n{n}"), r, r, r < HILBERT_TOL)
                .with_detail(format!("stated sign {:+}, measured eigenvalue {:.6}{:+.6}i", stated_hilbert_sign(n), ev.re, ev.im)),
        );
        let r2 = hilbert_square_residual(n, &ts, &p)?;
        out.push(Check::value(format!("hilbert_square_n{n}"), r2, r2, r2 < HILBERT_SQUARE_TOL));
    }
    Ok(out)
}

pub fn wiener_hopf_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let (a, b) = (cfg.alpha, cfg.beta);
    let sym = RationalSymbol::factor(a, b)?;
    let w = TruncationWindow::new(-32, 31, 1)?;
    let r = wh_index(&sym, &w, &cfg.policy())?;
    let want = stated_wh_index(a, b);
    let path = wh_homotopy_constancy((a, b), (2.0 * a, 0.5 * b), 5, &w, &cfg.policy())?;
    Ok(vec![
        Check::from_index("wiener_hopf_index", &r, want),
        Check::integer("wiener_hopf_homotopy", C64::new(path[4] as f64, 0.0), path[4], want),
    ])
}

fn monomial_degree(phi: &FourierMatrixSeries) -> Option<i64> {
    let modes: Vec<_> = phi.modes().collect();
    match modes.as_slice() {
        [(k, c)] if phi.size() == 1 && (c[(0, 0)] - C64::new(1.0, 0.0)).norm() == 0.0 => Some(*k),
        _ => None,
    }
}

pub fn cylinder_index_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let phi = cfg.phi()?;
    let want = expected_index(cfg, &phi)?;
    let w = cfg.cylinder()?;
    if let Some(k) = monomial_degree(&phi) {
        let r = phik_index(k, &w)?;
        let raw = C64::new(r.raw[0], r.raw[1]);
        return Ok(vec![Check::integer("cylinder_phik_index", raw, r.index, want)
            .with_detail(format!("contributing lambda {:?}", r.contributing))]);
    }
    let z = cylinder_index(&phi, &phi.inverse(cfg.grid)?, &w)?;
    let raw = z.raw_c();
    let rounded = crate::numerics::round_to_integer(raw, cfg.tol_integer)?;
    Ok(vec![Check::integer("cylinder_index", raw, rounded, want)])
}

fn gap_trials() -> Vec<Vec<TrialMode>> {
    let c = |re: f64, im: f64| C64::new(re, im);
    let mut out = Vec::new();
    for lambda in -3..=3 {
        for xi in [-2.0, -0.5, 0.0, 0.25, 1.0] {
            out.push(vec![TrialMode { xi, lambda, spinor: [c(1.0, 0.0), c(0.0, -0.5)] }]);
        }
    }
    out.push(vec![
        TrialMode { xi: 0.1, lambda: 0, spinor: [c(1.0, 1.0), c(0.0, 0.0)] },
        TrialMode { xi: -1.5, lambda: -1, spinor: [c(0.0, 0.0), c(2.0, -1.0)] },
    ]);
    out
}

pub fn cylinder_bound_checks(_cfg: &RunConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let trials = gap_trials();
    let mut worst_gap = f64::INFINITY;
    for s in s_grid(11) {
        let g = ds_gap_check(s, &trials)?;
        worst_gap = worst_gap.min(g.min_ratio - g.bound);
    }
    out.push(Check::value("ds_gap", worst_gap, 0.0, worst_gap >= -1e-12));
    let r = resolvent_bound_check(&s_grid(21));
    let f = r.max_f();
    let g = r.max_g();
    let res = r.max_resolvent();
    let endpoint = r.rows[0].resolvent;
    out.push(Check::value("resolvent_sup_f", f, (f - F_BOUND).max(0.0), f <= F_BOUND));
    out.push(Check::value("resolvent_sup_g", g, (g - G_BOUND).max(0.0), g <= G_BOUND));
    out.push(Check::value("resolvent_norm", res, (res - RESOLVENT_BOUND).max(0.0), res <= RESOLVENT_BOUND));
    out.push(Check::value(
        "resolvent_endpoint",
        endpoint,
        (endpoint - ENDPOINT_RESOLVENT_BOUND).max(0.0),
        endpoint <= ENDPOINT_RESOLVENT_BOUND,
    ));
    let w = CylinderWindow::new(-3, 3, -8, 7)?;
    let phi = FourierMatrixSeries::monomial(1);
    // raw is the largest ratio of the difference to the allowed bound plus slack
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for (s, s2) in [(0.0, 0.1), (0.45, 0.55), (0.9, 1.0)] {
        let c = homotopy_continuity_check(&phi, s, s2, &w)?;
        worst = worst.max(c.difference / (c.bound + c.slack));
        pass &= c.pass;
    }
    out.push(Check::value("homotopy_continuity", worst, (worst - 1.0).max(0.0), pass));
    Ok(out)
}

pub fn lattice_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let phi = cfg.phi()?;
    let want = expected_index(cfg, &phi)?;
    let phi_inv = phi.inverse(cfg.grid)?;
    let lat = cfg.lattice()?;
    let dc = dirac_checks(&lat);
    let mut out = vec![Check::value(
        "lattice_dirac_identities",
        dc.sigma_min,
        dc.square_defect.max(dc.anticommutator).max(dc.asymmetry),
        dc.square_defect < 1e-9 && dc.anticommutator == 0.0 && dc.asymmetry == 0.0 && dc.sigma_min >= 1.0 - 1e-12,
    )];
    let sys = DiracSystem::new(&lat)?;
    let ra = remainder_agreement(&phi, &sys);
    out.push(Check::value("lattice_remainder_forms", ra, ra, ra < 1e-8));
    let r = lattice_index(&phi, &phi_inv, &lat, cfg.cut, &cfg.policy())?;
    out.push(Check::from_index("lattice_index", &r, want));
    let a2 = if cfg.cut + 2.0 <= lat.half_length / 2.0 { cfg.cut + 2.0 } else { cfg.cut - 2.0 };
    let c = cobordism_shift_test(&phi, &phi_inv, &lat, cfg.cut, a2, &cfg.policy())?;
    out.push(Check {
        name: "lattice_cobordism".into(),
        raw: [c.raw[1][0], c.raw[1][1]],
        rounded: Some(c.indices[1]),
        residual: (c.indices[0] - c.indices[1]).abs() as f64,
        pass: c.equal,
        detail: Some(format!("cuts {:?}: indices {:?}", c.cuts, c.indices)),
    });
    Ok(out)
}

pub fn pairing_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let phi = cfg.phi()?;
    let mut pc = PairingConfig::for_symbol(&phi)?;
    pc.toeplitz_window = TruncationWindow::symmetric(cfg.modes, phi.size())?;
    pc.grid = cfg.grid;
    pc.cylinder = cfg.cylinder()?;
    pc.lattice = cfg.lattice()?;
    pc.cut = cfg.cut;
    pc.policy = cfg.policy();
    let r = main_theorem_check(&phi, &cfg.backend.backends(), &pc)?;
    Ok(r
        .backends
        .iter()
        .map(|b| {
            let name = match b.backend {
                Backend::Spectral => "pairing_spectral",
                Backend::Lattice => "pairing_lattice",
            };
            Check {
                name: name.into(),
                raw: b.scaled,
                rounded: Some(b.scaled[0].round() as i64),
                residual: b.residual,
                pass: b.pass,
                detail: Some(format!("8 pi i pairing vs -ind(T_phi) = {}", -r.toeplitz_index)),
            }
        })
        .collect())
}

#[derive(Parser, Debug)]
#[command(name = "roe-index", version, about = "Index computations on the circle, the line and the cylinder")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(clap::Args, Debug, Default)]
struct Opts {
    /// Symbol spec, e.g. monomial:k=2, diagonal:ks=2;-1, table:FILE
    #[arg(long, global = true)]
    symbol: Option<String>,
    /// Sampling grid on the circle
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Toeplitz window half-width
    #[arg(long, global = true)]
    modes: Option<i64>,
    /// Cylinder circle modes as "lo,hi"
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda_range: Option<String>,
    /// Lattice as "L,nt,modes"
    #[arg(long, global = true)]
    lattice: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    cut: Option<f64>,
    #[arg(long, global = true)]
    tol_integer: Option<f64>,
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    #[arg(long, global = true)]
    backend: Option<BackendChoice>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// JSON report path; stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON config file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

fn parse_list<const N: usize>(s: &str, what: &str) -> Result<[f64; N]> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| IndexError::InvalidParameter(format!("{what}: cannot parse {s:?}")))?;
    v.try_into()
        .map_err(|_| IndexError::InvalidParameter(format!("{what}: expected {N} comma-separated numbers, got {s:?}")))
}

fn build_config(cli: &Cli) -> Result<RunConfig> {
    let o = &cli.opts;
    let mut cfg = match &o.config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => RunConfig::default(),
    };
    cfg.command = Some(cli.command);
    if let Some(v) = &o.symbol {
        cfg.symbol = v.clone();
    }
    if let Some(v) = o.grid {
        cfg.grid = v;
    }
    if let Some(v) = o.modes {
        cfg.modes = v;
    }
    if let Some(v) = &o.lambda_range {
        let [lo, hi] = parse_list::<2>(v, "--lambda-range")?;
        cfg.lambda_range = [lo as i64, hi as i64];
    }
    if let Some(v) = &o.lattice {
        cfg.lattice = parse_list::<3>(v, "--lattice")?;
    }
    if let Some(v) = o.cut {
        cfg.cut = v;
    }
    if let Some(v) = o.tol_integer {
        cfg.tol_integer = v;
    }
    if let Some(v) = o.tol_rank {
        cfg.tol_rank = v;
    }
    if let Some(v) = o.backend {
        cfg.backend = v;
    }
    if let Some(v) = o.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = o.beta {
        cfg.beta = v;
    }
    if let Some(v) = &o.out {
        cfg.out = Some(v.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs the configured checks and returns the report with its exit code.
pub fn execute(config: RunConfig) -> (RunReport, i32) {
    let start = Instant::now();
    let command = config.command.unwrap_or(Command::All);
    let mut runner = Runner::new(config);
    runner.run(command);
    let code = runner.exit_code();
    let report = RunReport {
        config: runner.config,
        checks: runner.checks,
        elapsed_ms: start.elapsed().as_millis() as u64,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    (report, code)
}

/// Parses `argv` (including the program name), runs, writes the report and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let config = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let (report, code) = execute(config);
    for c in &report.checks {
        eprintln!(
            "{} {:<32} raw {:>12.6}{:+.6}i{}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.raw[0],
            c.raw[1],
            c.detail.as_deref().map(|d| format!("  ({d})")).unwrap_or_default()
        );
    }
    let json = match report.to_json() {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NONCONVERGENCE;
        }
    };
    match &report.config.out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, json + "\n") {
                eprintln!("error: cannot write {}: {e}", p.display());
                return EXIT_USAGE;
            }
        }
        None => println!("{json}"),
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("roe-index-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.json");
        std::fs::write(&path, r#"{"symbol": "monomial:k=2", "grid": 128}"#).unwrap();
        let cli = Cli::try_parse_from(["roe-index", "winding", "--config", path.to_str().unwrap(), "--grid", "64"]).unwrap();
        let cfg = build_config(&cli).unwrap();
        assert_eq!(cfg.symbol, "monomial:k=2");
        assert_eq!(cfg.grid, 64);
        assert_eq!(cfg.command, Some(Command::Winding));
    }

    #[test]
    fn negative_values_parse() {
        let cli = Cli::try_parse_from(["roe-index", "wiener-hopf", "--alpha", "2", "--beta", "-1"]).unwrap();
        let cfg = build_config(&cli).unwrap();
        assert_eq!((cfg.alpha, cfg.beta), (2.0, -1.0));
    }

    #[test]
    fn bad_tolerance_is_usage_error() {
        assert_eq!(run(["roe-index", "winding", "--tol-integer", "0"]), EXIT_USAGE);
        assert_eq!(run(["roe-index", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["roe-index", "lattice", "--lattice", "4,128"]), EXIT_USAGE);
    }

    #[test]
    fn report_round_trips() {
        let cfg = RunConfig { command: Some(Command::Winding), ..RunConfig::default() };
        let (r, code) = execute(cfg);
        assert_eq!(code, EXIT_OK);
        let json = r.to_json().unwrap();
        let back: RunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn exit_code_precedence() {
        assert_eq!(worse(EXIT_NONCONVERGENCE, EXIT_FALSIFIED), EXIT_FALSIFIED);
        assert_eq!(worse(EXIT_FALSIFIED, EXIT_NONCONVERGENCE), EXIT_FALSIFIED);
        assert_eq!(worse(EXIT_OK, EXIT_NONCONVERGENCE), EXIT_NONCONVERGENCE);
    }
}
