//! Named self-checks of the library's invariants, run as one suite.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::asymptotics::{heisenberg_ratio, isotropic_params, rms_predictions, separate_optima, uncertainty_product_ratio};
use crate::distribution::{
    density_at, group_average_closed_form, group_average_sandwich, normalization_check, scan, Window, MODULAR_SIGN,
};
use crate::error::{Error, Result};
use crate::grid::{
    half_line_moment, inner_product, make_coherent, make_displaced_squeezed, make_gaussian_monomial, QuadratureGrid,
    Sector, StateVector,
};
use crate::group::{act, compose, inverse, left_haar_weight, GroupElement};
use crate::povm::{build_ml_seed, build_srm_seed, optimal_likelihood, srm_likelihood};
use crate::two_mode::{hermite_functions, make_pointer, make_truncated_pointer, raw_coefficients, PointerSign};

/// Grid and tolerance settings for [`run_validation`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    /// Half-width of the grid the suite's states live on.
    pub y_max: f64,
    /// Node count of that grid.
    pub grid_nodes: usize,
    /// Largest relative change allowed when the grid is doubled.
    pub convergence_tolerance: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self { y_max: 10.0, grid_nodes: 4096, convergence_tolerance: 1e-5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Ctx {
    grid: QuadratureGrid,
    tol: f64,
}

type Outcome = Result<(bool, String)>;

type Check = (&'static str, fn(&Ctx) -> Outcome);

const CHECKS: &[Check] = &[
    ("affine-composition", affine_composition),
    ("representation-homomorphism", representation_homomorphism),
    ("left-haar-invariance", left_haar_invariance),
    ("unitarity", unitarity),
    ("quadrature-convergence", quadrature_convergence),
    ("divergence-detection", divergence_detection),
    ("seed-certificates", seed_certificates),
    ("likelihood-closed-form", likelihood_closed_form),
    ("likelihood-covariance", likelihood_covariance),
    ("srm-suboptimality", srm_suboptimality),
    ("scan-covariance", scan_covariance),
    ("density-map-sanity", density_map_sanity),
    ("povm-normalization", povm_normalization),
    ("group-average-oracle", group_average_oracle),
    ("modular-covariance", modular_covariance),
    ("uncertainty-product", uncertainty_product),
    ("heisenberg-saturation", heisenberg_saturation),
    ("isotropic-root", isotropic_root),
    ("hermite-orthonormality", hermite_orthonormality),
    ("pointer-selection-rules", pointer_selection_rules),
    ("pointer-energy-monotone", pointer_energy_monotone),
];

/// Names of the checks in execution order.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

/// Runs every check; a check that errors counts as failed.
pub fn run_validation(config: &ValidationConfig) -> Result<ValidationReport> {
    let grid = QuadratureGrid::new(config.y_max, config.grid_nodes)?;
    if !(config.convergence_tolerance > 0.0) {
        return Err(Error::InvalidArgument("convergence tolerance must be positive".into()));
    }
    let ctx = Ctx { grid, tol: config.convergence_tolerance };
    let checks = CHECKS
        .iter()
        .map(|(name, f)| {
            let start = Instant::now();
            let (passed, detail) = match f(&ctx) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckResult { name, passed, detail, seconds: secs(start.elapsed()) }
        })
        .collect();
    Ok(ValidationReport { checks })
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn elements() -> [GroupElement; 4] {
    [
        GroupElement::new(0.3, 0.2),
        GroupElement::new(-1.1, -0.5),
        GroupElement::new(0.7, 0.9),
        GroupElement::new(0.0, -1.3),
    ]
}

fn affine_composition(_: &Ctx) -> Outcome {
    let mut worst: f64 = 0.0;
    for g1 in elements() {
        for g2 in elements() {
            for t in [-2.0, 0.0, 1.5] {
                worst = worst.max((compose(&g1, &g2).apply(t) - g1.apply(g2.apply(t))).abs());
            }
            let e = compose(&g1, &inverse(&g1));
            worst = worst.max(e.x.abs()).max(e.r.abs());
            let a = compose(&compose(&g1, &g2), &g1);
            let b = compose(&g1, &compose(&g2, &g1));
            worst = worst.max((a.x - b.x).abs()).max((a.r - b.r).abs());
        }
    }
    Ok((worst < 1e-12, format!("max deviation {worst:.2e}")))
}

/// `U_{g1} U_{g2} ψ = U_{g1 g2} ψ` on interpolated (non-analytic) samples.
fn representation_homomorphism(ctx: &Ctx) -> Outcome {
    let exact = make_coherent(1.0, ctx.grid)?;
    let sampled = StateVector::from_samples(ctx.grid, exact.amplitudes().to_vec())?;
    let mut worst: f64 = 0.0;
    for (g1, g2) in [(elements()[0], elements()[1]), (elements()[2], elements()[0])] {
        let lhs = act(&g1, &act(&g2, &sampled)?)?.resample(&ctx.grid);
        let rhs = act(&compose(&g1, &g2), &exact)?.resample(&ctx.grid);
        worst = worst.max(1.0 - inner_product(&lhs, &rhs)?.norm());
    }
    Ok((worst < 1e-6, format!("max 1 - |overlap| = {worst:.2e}")))
}

fn left_haar_invariance(_: &Ctx) -> Outcome {
    let f = |x: f64, r: f64| (-(x - 0.3).powi(2) - 2.0 * (r + 0.2).powi(2)).exp();
    let integral = |h: GroupElement| {
        let n = 600;
        let (hx, hr) = (40.0 / n as f64, 12.0 / n as f64);
        let mut s = 0.0;
        for i in 0..=n {
            for j in 0..=n {
                let g = GroupElement::new(-20.0 + hx * i as f64, -6.0 + hr * j as f64);
                let w = if i == 0 || i == n { 0.5 } else { 1.0 } * if j == 0 || j == n { 0.5 } else { 1.0 };
                let hg = compose(&h, &g);
                s += w * f(hg.x, hg.r) * left_haar_weight(&g);
            }
        }
        s * hx * hr
    };
    let base = integral(GroupElement::IDENTITY);
    let moved = integral(GroupElement::new(0.8, 0.6));
    let rel = (moved - base).abs() / base;
    Ok((rel < 1e-4, format!("relative change {rel:.2e}")))
}

fn unitarity(ctx: &Ctx) -> Outcome {
    let psi = make_coherent(1.0, ctx.grid)?;
    let phi = make_displaced_squeezed(-0.5, 0.3, ctx.grid)?;
    let before = inner_product(&phi, &psi)?;
    let mut worst: f64 = 0.0;
    for g in elements() {
        let a = act(&g, &psi)?;
        let b = act(&g, &phi)?.resample(a.grid());
        worst = worst.max((a.norm_certificate() - 1.0).abs());
        worst = worst.max((inner_product(&b, &a)? - before).norm());
    }
    Ok((worst < 1e-8, format!("max deviation {worst:.2e}")))
}

/// Doubling the grid must not move the sector weights or the likelihood.
fn quadrature_convergence(ctx: &Ctx) -> Outcome {
    let mut worst: f64 = 0.0;
    for a in [0.0, 1.0] {
        let coarse = make_coherent(a, ctx.grid)?;
        let fine = make_coherent(a, ctx.grid.refined())?;
        let w0 = half_line_moment(&coarse, Sector::Plus, 1)?;
        let w1 = half_line_moment(&fine, Sector::Plus, 1)?;
        let l0 = optimal_likelihood(&coarse)?;
        let l1 = optimal_likelihood(&fine)?;
        worst = worst.max((w1 - w0).abs() / w1).max((l1 - l0).abs() / l1);
    }
    Ok((worst <= ctx.tol, format!("max relative change {worst:.2e} (tolerance {:.1e})", ctx.tol)))
}

fn divergence_detection(ctx: &Ctx) -> Outcome {
    let vac = make_coherent(0.0, ctx.grid)?;
    let diverges = matches!(half_line_moment(&vac, Sector::Plus, -1), Err(Error::DivergenceDetected { .. }));
    let odd = make_gaussian_monomial(1, 0.0, 0.0, ctx.grid)?;
    let finite = half_line_moment(&odd, Sector::Plus, -1)?;
    let err = (finite - (2.0 / PI).sqrt()).abs();
    Ok((diverges && err < 1e-6, format!("vacuum divergent: {diverges}; odd-state half-line ⟨1/|Y|⟩ error {err:.2e}")))
}

fn seed_certificates(ctx: &Ctx) -> Outcome {
    let mut worst: f64 = 0.0;
    for psi in [
        make_coherent(0.0, ctx.grid)?,
        make_coherent(2.0, ctx.grid)?,
        make_gaussian_monomial(1, 0.4, 0.2, ctx.grid)?,
    ] {
        for c in build_ml_seed(&psi)?.certificates().into_iter().flatten() {
            worst = worst.max((c - 1.0).abs());
        }
    }
    Ok((worst < 1e-6, format!("max |⟨η|D|η⟩ - 1| = {worst:.2e}")))
}

fn likelihood_closed_form(ctx: &Ctx) -> Outcome {
    let vac = make_coherent(0.0, ctx.grid)?;
    let seed = build_ml_seed(&vac)?;
    let oracle = (2.0 / PI).sqrt() / PI;
    let err = (seed.likelihood() - oracle).abs();
    let at_identity = (density_at(&seed, &vac, &GroupElement::IDENTITY)? - seed.likelihood()).abs();
    Ok((
        err < 1e-4 && at_identity < 1e-10,
        format!("vacuum L = {:.6} (oracle {oracle:.6}); p(e) - L = {at_identity:.1e}", seed.likelihood()),
    ))
}

/// `L(U_{x,0} ψ) = L(ψ)` and `L(U_{0,r} ψ) = e^{-r} L(ψ)`.
fn likelihood_covariance(ctx: &Ctx) -> Outcome {
    let psi = make_coherent(1.5, ctx.grid)?;
    let l = optimal_likelihood(&psi)?;
    let shifted = optimal_likelihood(&act(&GroupElement::translation(0.8), &psi)?)?;
    let r = 0.4;
    let dilated = optimal_likelihood(&act(&GroupElement::dilation(r), &psi)?)?;
    let e1 = (shifted - l).abs() / l;
    let e2 = (dilated - (-r).exp() * l).abs() / l;
    let worst = e1.max(e2);
    Ok((worst < 1e-6, format!("translation {e1:.1e}, dilation {e2:.1e}")))
}

fn srm_suboptimality(ctx: &Ctx) -> Outcome {
    let states = [
        make_coherent(4.0, QuadratureGrid::covering(4.0, 0.5))?,
        make_gaussian_monomial(1, 0.0, 0.0, ctx.grid)?,
        make_gaussian_monomial(2, 0.5, 0.3, ctx.grid)?,
    ];
    let mut ok = true;
    let mut ratios = Vec::new();
    for psi in &states {
        let ratio = srm_likelihood(psi)? / optimal_likelihood(psi)?;
        ok &= ratio <= 1.0 + 1e-12;
        ratios.push(format!("{ratio:.4}"));
    }
    let vac = make_coherent(0.0, ctx.grid)?;
    let rejected = matches!(build_srm_seed(&vac), Err(Error::DomainViolation(_)));
    Ok((ok && rejected, format!("L_srm/L_opt = [{}]; vacuum rejected: {rejected}", ratios.join(", "))))
}

/// `p_{U_h ψ}(g) = p_ψ(h^{-1} g)`.
fn scan_covariance(ctx: &Ctx) -> Outcome {
    let psi = make_coherent(1.0, ctx.grid)?;
    let seed = build_ml_seed(&psi)?;
    let h = GroupElement::new(0.4, 0.3);
    let moved = act(&h, &psi)?.resample(&ctx.grid);
    let mut worst: f64 = 0.0;
    for g in elements() {
        let lhs = density_at(&seed, &moved, &g)?;
        let rhs = density_at(&seed, &psi, &compose(&inverse(&h), &g))?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok((worst < 1e-6, format!("max |p' - p∘h^-1| = {worst:.2e}")))
}

fn density_map_sanity(ctx: &Ctx) -> Outcome {
    let psi = make_coherent(2.0, ctx.grid)?;
    let seed = build_ml_seed(&psi)?;
    let small = scan(&seed, &psi, &Window::symmetric(1.0, 0.5)?, (32, 32))?;
    let large = scan(&seed, &psi, &Window::symmetric(5.0, 2.0)?, (96, 96))?;
    let sane = [&small, &large].iter().all(|m| m.values().iter().all(|v| v.is_finite() && *v >= 0.0));
    let ok = sane && small.mass() <= large.mass() && large.mass() <= 1.0 + 1e-3;
    Ok((ok, format!("masses {:.5} ⊆ {:.5}", small.mass(), large.mass())))
}

fn povm_normalization(ctx: &Ctx) -> Outcome {
    let psi = make_coherent(2.0, ctx.grid)?;
    let seed = build_ml_seed(&psi)?;
    let mass = normalization_check(&seed, &psi, &Window::new(-6.0, 6.0, -2.5, 2.5)?)?;
    Ok(((mass - 1.0).abs() < 1e-2, format!("∫ p d_L g = {mass:.5}")))
}

fn group_average_oracle(ctx: &Ctx) -> Outcome {
    let odd = make_gaussian_monomial(1, 0.0, 0.0, ctx.grid)?;
    let closed = group_average_closed_form(&odd, &odd, &odd, &odd)?;
    let brute = group_average_sandwich(&odd, &odd, &odd, &odd, &Window::new(-30.0, 30.0, -6.0, 2.5)?, (240, 100))?;
    let rel = (brute - closed).norm() / closed.norm();
    Ok((rel < 1e-2, format!("brute {:.5} vs closed {:.5} (rel {rel:.1e})", brute.re, closed.re)))
}

fn modular_covariance(ctx: &Ctx) -> Outcome {
    let psi = make_gaussian_monomial(1, 0.2, 0.0, ctx.grid)?;
    let phi = make_gaussian_monomial(2, -0.3, 0.1, ctx.grid)?;
    let u = make_gaussian_monomial(1, 0.5, -0.2, ctx.grid)?;
    let h = GroupElement::new(0.2, 0.5);
    let before = group_average_closed_form(&psi, &phi, &u, &u)?;
    let after = group_average_closed_form(
        &act(&h, &psi)?.resample(&ctx.grid),
        &act(&h, &phi)?.resample(&ctx.grid),
        &u,
        &u,
    )?;
    let ratio = after / before;
    let expected = (MODULAR_SIGN * h.r).exp();
    let err = (ratio.re - expected).abs() / expected + ratio.im.abs();
    Ok((err < 1e-6, format!("ratio {:.6} vs e^(s r_h) = {expected:.6}", ratio.re)))
}

fn uncertainty_product(_: &Ctx) -> Outcome {
    let mut worst: f64 = 0.0;
    for (a, z) in [(10.0, 0.0), (3.0, -0.7), (50.0, 0.4)] {
        worst = worst.max((uncertainty_product_ratio(a, z) - 2.0).abs());
        let (dx, dr) = rms_predictions(a, z);
        let (ox, or) = separate_optima(a, z);
        worst = worst.max((dx / ox - 2f64.sqrt()).abs()).max((dr / or - 2f64.sqrt()).abs());
    }
    Ok((worst < 1e-12, format!("max deviation {worst:.1e}")))
}

fn heisenberg_saturation(_: &Ctx) -> Outcome {
    let psi = make_displaced_squeezed(50.0, 0.0, QuadratureGrid::covering(50.0, 0.5))?;
    let ratio = heisenberg_ratio(&psi, 50.0)?;
    Ok(((ratio - 1.0).abs() < 0.02 && ratio >= 1.0, format!("ratio {ratio:.5}")))
}

fn isotropic_root(_: &Ctx) -> Outcome {
    let p = isotropic_params(100.0)?;
    let q = isotropic_params(400.0)?;
    let residual = (p.a * p.a + p.z.sinh().powi(2) - 100.0).abs();
    let iso = (p.a - (-2.0 * p.z).exp()).abs();
    let ok = residual < 1e-9 && iso < 1e-12 && q.a > p.a && q.z < p.z;
    Ok((ok, format!("n̄=100: a = {:.5}, z = {:.5}", p.a, p.z)))
}

fn hermite_orthonormality(_: &Ctx) -> Outcome {
    let n = 6000;
    let y_max = 12.0;
    let dy = 2.0 * y_max / n as f64;
    let ys: Vec<f64> = (0..n).map(|k| -y_max + dy * (k as f64 + 0.5)).collect();
    let h = hermite_functions(60, &ys);
    let mut worst: f64 = 0.0;
    for a in 0..=60 {
        for b in a..=60 {
            let s: f64 = h[a].iter().zip(&h[b]).map(|(u, v)| u * v).sum::<f64>() * dy;
            worst = worst.max((s - if a == b { 1.0 } else { 0.0 }).abs());
        }
    }
    Ok((worst < 1e-8, format!("max Gram deviation {worst:.1e}")))
}

fn pointer_selection_rules(_: &Ctx) -> Outcome {
    let n_max = 60;
    let dim = n_max + 1;
    let plus = raw_coefficients(PointerSign::Plus, n_max);
    let minus = raw_coefficients(PointerSign::Minus, n_max);
    let mut ok = true;
    for n in 0..dim {
        for m in 0..dim - n {
            let (p, q) = (plus[n * dim + m], minus[n * dim + m]);
            ok &= (n + m) % 2 == 0 || p == 0.0;
            ok &= p == plus[m * dim + n];
            ok &= q == if m % 2 == 0 { p } else { -p };
        }
    }
    let mut norm_err: f64 = 0.0;
    for lambda in [0.9, 0.95, 0.99] {
        let p = make_truncated_pointer(lambda, PointerSign::Plus, n_max)?;
        norm_err = norm_err.max((p.coeffs().iter().map(|c| c * c).sum::<f64>() - 1.0).abs());
    }
    let strict = make_pointer(0.9, PointerSign::Plus, n_max).is_ok();
    Ok((ok && norm_err < 1e-8 && strict, format!("rules hold: {ok}; normalization error {norm_err:.1e}")))
}

fn pointer_energy_monotone(_: &Ctx) -> Outcome {
    let energies = [0.9, 0.95, 0.99]
        .iter()
        .map(|l| Ok(make_truncated_pointer(*l, PointerSign::Plus, 60)?.mean_energy()))
        .collect::<Result<Vec<f64>>>()?;
    let ok = energies.windows(2).all(|w| w[0] < w[1]);
    Ok((ok, format!("⟨N⟩ = {energies:.3?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let report = run_validation(&ValidationConfig::default()).unwrap();
        for c in &report.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
        assert!(report.checks.len() >= 12);
        assert_eq!(check_names().len(), report.checks.len());
    }

    #[test]
    fn coarse_grid_fails_convergence() {
        let config = ValidationConfig { grid_nodes: 64, ..ValidationConfig::default() };
        let report = run_validation(&config).unwrap();
        let conv = report.checks.iter().find(|c| c.name == "quadrature-convergence").unwrap();
        assert!(!conv.passed, "{}", conv.detail);
        assert!(!report.all_passed());
    }

    #[test]
    fn invalid_config() {
        assert!(run_validation(&ValidationConfig { grid_nodes: 63, ..Default::default() }).is_err());
    }
}
