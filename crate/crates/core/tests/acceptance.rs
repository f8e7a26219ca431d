//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//! Each criterion also has a runtime budget that counts toward its verdict.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use roe_index::cylinder::{
    contributing_lambdas, phik_index, resolvent_bound_check, s_grid, CylinderWindow, ENDPOINT_RESOLVENT_BOUND, F_BOUND,
    G_BOUND, RESOLVENT_BOUND,
};
use roe_index::hardy::toeplitz_index_raw;
use roe_index::lattice::{cobordism_shift_test, monomial_lattice_index, Lattice};
use roe_index::line::{hilbert_residual, hilbert_square_residual, rho_inner, stated_hilbert_sign, QuadratureParams, RationalSymbol};
use roe_index::numerics::{integer_residual, round_to_integer, CMat, GrowthPolicy, OperatorBlock, TruncationWindow};
use roe_index::pairing::{cocycle_identity_check, main_theorem_check, Backend, PairingConfig};
use roe_index::report::hilbert_points;
use roe_index::symbols::FourierMatrixSeries;
use roe_index::wiener_hopf::{stated_wh_index, wh_homotopy_constancy, wh_index};
use roe_index::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn criterion(n: u32, title: &str, budget_s: u64, f: impl FnOnce() -> Result<Outcome>) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= Duration::from_secs(budget_s);
    let (pass, detail) = match out {
        Ok(o) => (o.pass && in_time, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let timing = if in_time {
        format!("{:.1}s", elapsed.as_secs_f64())
    } else {
        format!("{:.1}s over the {budget_s}s budget", elapsed.as_secs_f64())
    };
    println!("{} criterion {n:>2}: {title} [{timing}] {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn toeplitz() -> Result<Outcome> {
    let w = TruncationWindow::new(-128, 128, 1)?;
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for k in -5..=5 {
        let raw = toeplitz_index_raw(&FourierMatrixSeries::monomial(k), &FourierMatrixSeries::monomial(-k), &w)?;
        let r = round_to_integer(raw, 1e-3)?;
        worst = worst.max(integer_residual(raw));
        pass &= r == -k && integer_residual(raw) < 1e-3;
    }
    Ok(Outcome { pass, detail: format!("ind(T_phi_k) = -k for |k| <= 5, worst residual {worst:.2e}") })
}

fn orthonormality() -> Result<Outcome> {
    let p = QuadratureParams::default();
    let mut worst: f64 = 0.0;
    for m in -8..=8 {
        for n in -8..=8 {
            let want = if m == n { PI } else { 0.0 };
            worst = worst.max((rho_inner(m, n, &p)? - C64::new(want, 0.0)).norm());
        }
    }
    Ok(Outcome { pass: worst < 1e-6, detail: format!("max |<rho_m, rho_n> - pi delta| = {worst:.2e}") })
}

fn hilbert() -> Result<Outcome> {
    let p = QuadratureParams::default();
    let ts = hilbert_points(20);
    let (mut eig, mut sq): (f64, f64) = (0.0, 0.0);
    for n in -3..=3 {
        eig = eig.max(hilbert_residual(n, stated_hilbert_sign(n), &ts, &p)?);
        sq = sq.max(hilbert_square_residual(n, &ts, &p)?);
    }
    Ok(Outcome {
        pass: eig < 1e-3 && sq < 2e-3,
        detail: format!("stated eigenrelation residual {eig:.3e} (tol 1e-3), H^2 residual {sq:.3e} (tol 2e-3)"),
    })
}

fn wiener_hopf() -> Result<Outcome> {
    let w = TruncationWindow::new(-32, 31, 1)?;
    let policy = GrowthPolicy::default();
    let mags = [0.5, 1.0, 2.5];
    let mut cases = 0;
    let mut bad = Vec::new();
    for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        for &ma in &mags {
            for &mb in &mags {
                let (a, b) = (sa * ma, sb * mb);
                let want = stated_wh_index(a, b);
                let got = wh_index(&RationalSymbol::factor(a, b)?, &w, &policy)?.rounded;
                let path = wh_homotopy_constancy((a, b), (1.5 * a, 0.5 * b), 5, &w, &policy)?;
                cases += 1;
                if got != want || path.iter().any(|&v| v != want) {
                    bad.push(format!("({a}, {b}): {got} vs {want}"));
                }
            }
        }
    }
    Ok(Outcome {
        pass: bad.is_empty(),
        detail: format!("{cases} cases with 5-sample homotopy paths, mismatches {bad:?}"),
    })
}

fn phik() -> Result<Outcome> {
    let w = CylinderWindow::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for k in -3..=3 {
        let r = phik_index(k, &w)?;
        let lambdas: Vec<i64> = r.per_lambda.iter().map(|b| b.lambda).collect();
        pass &= r.index == -k && lambdas == contributing_lambdas(k, &w) && r.contributing.len() == k.unsigned_abs() as usize;
        parts.push(format!("{k}:{}", r.index));
    }
    Ok(Outcome { pass, detail: format!("k:index {}", parts.join(" ")) })
}

fn bounds() -> Result<Outcome> {
    let r = resolvent_bound_check(&s_grid(21));
    let endpoint = r.rows[0].resolvent;
    let pass = r.max_f() <= F_BOUND && r.max_g() <= G_BOUND && r.max_resolvent() <= RESOLVENT_BOUND && endpoint <= ENDPOINT_RESOLVENT_BOUND;
    Ok(Outcome {
        pass,
        detail: format!(
            "sup f {:.4} (<= {F_BOUND}), sup g {:.4} (<= {G_BOUND}), resolvent {:.4} (<= {RESOLVENT_BOUND}), s=0 resolvent {:.4} (<= {ENDPOINT_RESOLVENT_BOUND}); {} violations",
            r.max_f(),
            r.max_g(),
            r.max_resolvent(),
            endpoint,
            r.violations.len()
        ),
    })
}

fn main_theorem() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for phi in [
        FourierMatrixSeries::monomial(1),
        FourierMatrixSeries::monomial(-2),
        FourierMatrixSeries::diagonal_monomials(&[2, -1]),
    ] {
        let r = main_theorem_check(&phi, &[Backend::Spectral], &PairingConfig::for_symbol(&phi)?)?;
        let b = &r.backends[0];
        pass &= r.pass && b.residual < 1e-2;
        parts.push(format!("{:.6} vs {}", b.scaled[0], -r.toeplitz_index));
    }
    let phi = FourierMatrixSeries::degree_preset(2, 2);
    let r = main_theorem_check(&phi, &[Backend::Spectral], &PairingConfig::for_symbol(&phi)?)?;
    let nonzero = C64::new(r.backends[0].pairing[0], r.backends[0].pairing[1]).norm() > 1e-3;
    pass &= r.pass && nonzero;
    parts.push(format!("degree preset pairing nonzero: {nonzero}"));
    Ok(Outcome { pass, detail: format!("8 pi i pairing: {}", parts.join(", ")) })
}

fn cross_backend() -> Result<Outcome> {
    let lat = Lattice::default();
    let w = CylinderWindow::default();
    let policy = GrowthPolicy::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for k in -2..=2 {
        let l = monomial_lattice_index(k, &lat, 0.0, &policy)?;
        let s = phik_index(k, &w)?.index;
        pass &= l.rounded == s;
        parts.push(format!("k={k}: lattice {} ({:.4}), spectral {s}", l.rounded, l.raw[0]));
    }
    Ok(Outcome { pass, detail: parts.join("; ") })
}

fn cobordism() -> Result<Outcome> {
    let lat = Lattice::default();
    let policy = GrowthPolicy::default();
    let (phi, inv) = (FourierMatrixSeries::monomial(1), FourierMatrixSeries::monomial(-1));
    let mut pass = true;
    let mut parts = Vec::new();
    for a2 in [2.0, -2.0] {
        let r = cobordism_shift_test(&phi, &inv, &lat, 0.0, a2, &policy)?;
        pass &= r.equal && r.indices == [-1, -1];
        parts.push(format!("cuts (0, {a2}): {:?}, equal {}", r.indices, r.equal));
    }
    Ok(Outcome { pass, detail: format!("{} (expected -1)", parts.join("; ")) })
}

fn banded(rng: &mut ChaCha8Rng, w: &TruncationWindow, band: usize) -> Result<OperatorBlock> {
    let n = w.dim();
    let mat = CMat::from_fn(n, n, |i, j| {
        if i.abs_diff(j) <= band {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        } else {
            C64::new(0.0, 0.0)
        }
    });
    OperatorBlock::new(w.clone(), mat)
}

fn cocycle() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(20261016);
    let (mut anti, mut hoch): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let n = rng.gen_range(4..=24);
        let band = rng.gen_range(0..=4);
        let w = TruncationWindow::symmetric(n, 1)?;
        let (a, b, c) = (banded(&mut rng, &w, band)?, banded(&mut rng, &w, band)?, banded(&mut rng, &w, band)?);
        let r = cocycle_identity_check(&a, &b, &c, &w.chi(0))?;
        anti = anti.max(r.antisymmetry);
        hoch = hoch.max(r.hochschild);
    }
    Ok(Outcome {
        pass: anti < 1e-8 && hoch < 1e-8,
        detail: format!("100 triples: antisymmetry {anti:.2e}, Hochschild {hoch:.2e}"),
    })
}

fn main() {
    let results = [
        criterion(1, "Toeplitz index of monomials", 10, toeplitz),
        criterion(2, "rho basis orthonormality", 30, orthonormality),
        criterion(3, "Hilbert transform eigenrelation and H^2 = 1", 60, hilbert),
        criterion(4, "Wiener-Hopf index table and homotopy constancy", 60, wiener_hopf),
        criterion(5, "cylinder index of e^{ikx} with per-lambda breakdown", 120, phik),
        criterion(6, "homotopy resolvent bounds", 10, bounds),
        criterion(7, "pairing equals minus the Toeplitz index (spectral)", 180, main_theorem),
        criterion(8, "lattice index equals spectral index", 300, cross_backend),
        criterion(9, "cobordism invariance on the lattice", 300, cobordism),
        criterion(10, "cocycle antisymmetry and Hochschild identity", 30, cocycle),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
