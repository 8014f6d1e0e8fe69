//! Acceptance criteria 1–11, one pass/fail line each.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use affine_estimation::asymptotics::{
    heisenberg_ratio, log_y_spread, rms_predictions, separate_optima, uncertainty_product_ratio, x_spread,
};
use affine_estimation::distribution::{
    argmax, density_at, group_average_closed_form, group_average_sandwich, moments, normalization_check, scan, Window,
};
use affine_estimation::error::{Error, Result};
use affine_estimation::grid::{
    make_coherent, make_displaced_squeezed, make_gaussian_monomial, GaussianStateParams, QuadratureGrid, Sector,
    StateVector,
};
use affine_estimation::group::GroupElement;
use affine_estimation::povm::{build_ml_seed, build_srm_seed, dmc_apply, optimal_likelihood, srm_likelihood};
use affine_estimation::two_mode::{concentration_profile, make_truncated_pointer, raw_coefficients, PointerSign};
use affine_estimation::validation::{run_validation, ValidationConfig};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn coherent(a: f64) -> Result<StateVector> {
    make_coherent(a, QuadratureGrid::covering(a, 0.5))
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn vacuum_likelihood() -> Result<Outcome> {
    let start = Instant::now();
    let vac = make_coherent(0.0, QuadratureGrid::new(10.0, 4096)?)?;
    let l = optimal_likelihood(&vac)?;
    let w = (2.0 / PI).sqrt() / 4.0;
    let oracle = 4.0 * w / PI;
    let t = start.elapsed();
    let err = (l - oracle).abs();
    outcome(err < 1e-4 && within(t, 1.0), format!("L_opt = {l:.6}, oracle {oracle:.6}, |Δ| = {err:.1e}, {t:.2?}"))
}

fn coherent_likelihood_and_density() -> Result<Outcome> {
    let start = Instant::now();
    let psi = coherent(10.0)?;
    let seed = build_ml_seed(&psi)?;
    let l = seed.likelihood();
    let l_err = (l / (10.0 / PI) - 1.0).abs();
    // Lebesgue density p e^{-r} against the Gaussian law
    let r = 0.1;
    let p = density_at(&seed, &psi, &GroupElement::new(0.0, r))? * (-r).exp();
    let target = 10.0 / PI * (-1.0f64).exp();
    let p_err = (p / target - 1.0).abs();
    let t = start.elapsed();
    outcome(
        l_err < 1e-3 && p_err < 0.05 && within(t, 10.0),
        format!("L_opt·π/10 - 1 = {l_err:.1e}; p(0,0.1)e^-0.1 = {p:.4} vs {target:.4} ({:.1}%), {t:.2?}", 100.0 * p_err),
    )
}

fn coherent_moments() -> Result<Outcome> {
    let start = Instant::now();
    let psi = coherent(10.0)?;
    let seed = build_ml_seed(&psi)?;
    let map = scan(&seed, &psi, &Window::symmetric(4.0, 0.6)?, (128, 128))?;
    let s = moments(&map)?;
    let t = start.elapsed();
    let (ex, er) = (1.0 / 2f64.sqrt(), 1.0 / 200f64.sqrt());
    let (dx, dr) = ((s.delta_x / ex - 1.0).abs(), (s.delta_r / er - 1.0).abs());
    outcome(
        dx < 0.05 && dr < 0.05 && within(t, 120.0),
        format!("Δx = {:.4} ({:.1}%), Δr = {:.5} ({:.1}%), {t:.2?}", s.delta_x, 100.0 * dx, s.delta_r, 100.0 * dr),
    )
}

fn uncertainty_relations() -> Result<Outcome> {
    let closed = [(10.0, 0.0), (7.0, -0.6), (40.0, 0.5)]
        .iter()
        .map(|(a, z)| (uncertainty_product_ratio(*a, *z) - 2.0).abs())
        .fold(0.0, f64::max);
    let psi = coherent(10.0)?;
    let seed = build_ml_seed(&psi)?;
    let s = moments(&scan(&seed, &psi, &Window::symmetric(4.0, 0.6)?, (128, 128))?)?;
    // separate optima measured on the state: ΔX and Δln(|Y|/a)
    let sampled = StateVector::from_samples(*psi.grid(), psi.amplitudes().to_vec())?;
    let (ox, or) = (x_spread(&sampled), log_y_spread(&sampled, 10.0));
    let numeric = s.delta_x * s.delta_r / (ox * or);
    let (fx, fr) = separate_optima(10.0, 0.0);
    let (px, pr) = rms_predictions(10.0, 0.0);
    outcome(
        closed < 1e-12 && (numeric / 2.0 - 1.0).abs() < 0.1,
        format!(
            "closed-form ratio error {closed:.1e}; numeric ΔxΔr/(Δx_opt Δr_opt) = {numeric:.4} \
             (Δx_opt {ox:.4} vs {fx}, Δr_opt {or:.5} vs {fr}; Δx {:.4} vs {px:.4}, Δr {:.5} vs {pr:.5})",
            s.delta_x, s.delta_r
        ),
    )
}

fn srm_suboptimality() -> Result<Outcome> {
    let g = QuadratureGrid::new(12.0, 8192)?;
    let narrow = make_displaced_squeezed(2.0, 3.0, QuadratureGrid::covering(2.0, 0.5 * (-3.0f64).exp()))?;
    let suite = [
        ("y³ Gaussian a=0.3 z=0.1", make_gaussian_monomial(3, 0.3, 0.1, g)?),
        ("y e^{-y²}", make_gaussian_monomial(1, 0.0, 0.0, g)?),
        ("y² Gaussian a=0.5 z=0.3", make_gaussian_monomial(2, 0.5, 0.3, g)?),
        ("y Gaussian a=1 z=-0.3", make_gaussian_monomial(1, 1.0, -0.3, g)?),
        ("squeezed a=2 z=3", narrow),
    ];
    let mut all_le = true;
    let mut strict = 0;
    let mut parts = Vec::new();
    for (name, psi) in &suite {
        let ratio = srm_likelihood(psi)? / optimal_likelihood(psi)?;
        all_le &= ratio <= 1.0 + 1e-12;
        if ratio < 0.99 {
            strict += 1;
        }
        parts.push(format!("{name}: {ratio:.4}"));
    }
    let vac = make_coherent(0.0, g)?;
    let rejected = matches!(build_srm_seed(&vac), Err(Error::DomainViolation(_)));
    outcome(
        all_le && strict >= 4 && rejected,
        format!("L_srm/L_opt [{}]; {strict}/5 strict; vacuum DomainViolation: {rejected}", parts.join(", ")),
    )
}

fn most_likely_vs_true() -> Result<Outcome> {
    let vac = make_coherent(0.0, QuadratureGrid::new(10.0, 4096)?)?;
    let seed = build_ml_seed(&vac)?;
    let (vx, vr, _) = argmax(&scan(&seed, &vac, &Window::vacuum_default(), (128, 128))?);
    let dist = vx.hypot(vr);
    let psi = coherent(10.0)?;
    let seed = build_ml_seed(&psi)?;
    let (cx, cr, _) = argmax(&scan(&seed, &psi, &Window::symmetric(3.0, 0.5)?, (128, 128))?);
    outcome(
        dist > 0.1 && cx.abs() < 0.05 && cr.abs() < 0.01,
        format!("vacuum argmax ({vx:.4}, {vr:.4}) at distance {dist:.3}; coh(10) argmax ({cx:.4}, {cr:.4})"),
    )
}

fn povm_normalization() -> Result<Outcome> {
    let vac = make_coherent(0.0, QuadratureGrid::new(10.0, 4096)?)?;
    let mv = normalization_check(&build_ml_seed(&vac)?, &vac, &Window::new(-500.0, 500.0, -3.0, 6.0)?)?;
    let c2 = coherent(2.0)?;
    let mc = normalization_check(&build_ml_seed(&c2)?, &c2, &Window::new(-6.0, 6.0, -2.5, 2.5)?)?;
    outcome(
        (mv - 1.0).abs() < 1e-2 && (mc - 1.0).abs() < 1e-2,
        format!("vacuum {mv:.5} on x∈[-500,500], r∈[-3,6]; coh(2) {mc:.5} on x∈[-6,6], r∈[-2.5,2.5]"),
    )
}

fn group_average_oracle() -> Result<Outcome> {
    let g = QuadratureGrid::new(10.0, 4096)?;
    let complex = |a: f64, z: f64, c: f64, k: u32| {
        let p = GaussianStateParams { linear_phase: c, global_phase: 0.4 * c, power: k, ..GaussianStateParams::displaced_squeezed(a, z) };
        StateVector::from_params(p, g)
    };
    let odd = make_gaussian_monomial(1, 0.0, 0.0, g)?;
    let k2 = make_gaussian_monomial(2, 0.3, 0.2, g)?;
    let k1s = complex(0.8, -0.3, 0.5, 1)?;
    let k3 = complex(-0.5, 0.1, -0.3, 3)?;
    let plus = dmc_apply(&k2, Sector::Plus, 0.0);
    let minus = dmc_apply(&k2, Sector::Minus, 0.0);
    let window = Window::new(-40.0, 40.0, -6.0, 2.5)?;
    let cases: [(&str, [&StateVector; 4]); 5] = [
        ("odd", [&odd, &odd, &odd, &odd]),
        ("mixed", [&k2, &k1s, &k3, &odd]),
        ("complex", [&k1s, &k3, &k2, &k1s]),
        ("cubic", [&k3, &k3, &k2, &k2]),
        ("cross-sector", [&odd, &odd, &plus, &minus]),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, [psi, phi, u, v]) in cases {
        let closed = group_average_closed_form(psi, phi, u, v)?;
        let brute = group_average_sandwich(psi, phi, u, v, &window, (400, 160))?;
        if closed.norm() == 0.0 {
            ok &= brute.norm() < 1e-6;
            parts.push(format!("{name}: |brute| = {:.1e}", brute.norm()));
        } else {
            let rel = (brute - closed).norm() / closed.norm();
            ok &= rel < 1e-2;
            parts.push(format!("{name}: rel {rel:.1e}"));
        }
    }
    outcome(ok, parts.join("; "))
}

fn heisenberg_saturation() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, z) in [(50.0f64, 0.0f64), (100.0, -0.5), (60.0, 0.4)] {
        let psi = make_displaced_squeezed(a, z, QuadratureGrid::covering(a, 0.5 * (-z).exp()))?;
        let ratio = heisenberg_ratio(&psi, a)?;
        ok &= (ratio - 1.0).abs() < 0.02;
        parts.push(format!("a={a}, z={z} (a e^z = {:.1}): {ratio:.5}", a * z.exp()));
    }
    outcome(ok, parts.join("; "))
}

fn two_mode_concentration() -> Result<Outcome> {
    let start = Instant::now();
    let n_max = 60;
    let dim = n_max + 1;
    let plus = raw_coefficients(PointerSign::Plus, n_max);
    let parity = (0..dim * dim).all(|i| (i / dim + i % dim) % 2 == 0 || plus[i] == 0.0);
    let window = Window::symmetric(3.0, 1.5)?;
    let mut widths = Vec::new();
    let mut norm_err: f64 = 0.0;
    let mut tails = Vec::new();
    for lambda in [0.9, 0.95, 0.99] {
        let p = make_truncated_pointer(lambda, PointerSign::Plus, n_max)?;
        norm_err = norm_err.max((p.coeffs().iter().map(|c| c * c).sum::<f64>() - 1.0).abs());
        let prof = concentration_profile(lambda, n_max, &window, (49, 49))?;
        widths.push((prof.width_x, prof.width_r));
        tails.push(format!("{:.1e}", prof.tail));
    }
    let t = start.elapsed();
    let decreasing = widths.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 < w[0].1);
    outcome(
        decreasing && parity && norm_err < 1e-8 && within(t, 300.0),
        format!(
            "widths (x, r) {widths:.4?}; parity exact: {parity}; normalization error {norm_err:.1e}; \
             cutoff tails [{}]; {t:.2?}",
            tails.join(", ")
        ),
    )
}

fn property_suite() -> Result<Outcome> {
    let start = Instant::now();
    let report = run_validation(&ValidationConfig::default())?;
    let t = start.elapsed();
    let failed: Vec<&str> = report.failures().map(|c| c.name).collect();
    outcome(
        report.all_passed() && within(t, 900.0),
        format!("{} checks, failures {failed:?}, {t:.2?}", report.checks.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 11] = [
        ("vacuum optimal likelihood", vacuum_likelihood),
        ("coherent a=10 likelihood and density", coherent_likelihood_and_density),
        ("coherent a=10 scan moments", coherent_moments),
        ("uncertainty relations", uncertainty_relations),
        ("square-root measurement suboptimality", srm_suboptimality),
        ("most likely value differs from true value", most_likely_vs_true),
        ("POVM normalization", povm_normalization),
        ("group-average oracle", group_average_oracle),
        ("Heisenberg-Robertson saturation", heisenberg_saturation),
        ("two-mode concentration", two_mode_concentration),
        ("property suite", property_suite),
    ];
    let mut failures = 0;
    for (i, (label, f)) in criteria.iter().enumerate() {
        let (passed, detail) = match f() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!("criterion {:>2}: {} {label} — {detail}", i + 1, if passed { "PASS" } else { "FAIL" });
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
