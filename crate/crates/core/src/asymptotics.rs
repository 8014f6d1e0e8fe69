//! Large-amplitude Gaussian limits of the estimation density, r.m.s. error
//! laws, separate-measurement optima and the Heisenberg-Robertson check.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{sector_sum, Sector, StateVector};

/// `a e^z` from which the Gaussian limit is treated as reliable.
pub const ASYMPTOTIC_THRESHOLD: f64 = 10.0;

/// Largest mass on `y < 0` tolerated by [`heisenberg_ratio`].
pub const NEGATIVE_MASS_LIMIT: f64 = 1e-4;

/// Leading-order density `(a/π) e^{-(a e^z r)²} e^{-(x e^{-z})²}` for a
/// displaced-squeezed input with amplitude `a` and squeezing `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticModel {
    pub a: f64,
    pub z: f64,
}

impl AsymptoticModel {
    pub fn new(a: f64, z: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && z.is_finite()) {
            return Err(Error::InvalidArgument(format!("model needs a > 0 and finite z, got a={a}, z={z}")));
        }
        Ok(Self { a, z })
    }

    pub fn coherent(a: f64) -> Result<Self> {
        Self::new(a, 0.0)
    }

    pub fn in_asymptotic_regime(&self) -> bool {
        self.a * self.z.exp() >= ASYMPTOTIC_THRESHOLD
    }

    pub fn density(&self, x: f64, r: f64) -> f64 {
        model_density(self, x, r)
    }
}

pub fn model_density(m: &AsymptoticModel, x: f64, r: f64) -> f64 {
    let u = m.a * m.z.exp() * r;
    let v = x * (-m.z).exp();
    m.a / PI * (-u * u - v * v).exp()
}

/// `(Δx, Δr) = (e^z/√2, 1/(√2 a e^z))`.
pub fn rms_predictions(a: f64, z: f64) -> (f64, f64) {
    (z.exp() / SQRT_2, 1.0 / (SQRT_2 * a * z.exp()))
}

/// Optimal separate estimation errors `(e^z/2, 1/(2 a e^z))`.
pub fn separate_optima(a: f64, z: f64) -> (f64, f64) {
    (0.5 * z.exp(), 0.5 / (a * z.exp()))
}

/// `Δx Δr / (Δx_opt Δr_opt)`.
pub fn uncertainty_product_ratio(a: f64, z: f64) -> f64 {
    let (dx, dr) = rms_predictions(a, z);
    let (ox, or) = separate_optima(a, z);
    (dx * dr) / (ox * or)
}

fn norm_sqr(psi: &StateVector) -> f64 {
    psi.amplitudes().iter().map(|c| c.norm_sqr()).sum::<f64>() * psi.grid().spacing()
}

/// `dψ/dy` on the grid: analytic for Gaussian-family states, fourth-order
/// central differences otherwise.
fn derivative(psi: &StateVector) -> Vec<C64> {
    let g = psi.grid();
    if let Some(params) = psi.evaluator() {
        let p = params.prepare();
        return (0..g.len()).map(|k| p.derivative(g.node(k))).collect();
    }
    let a = psi.amplitudes();
    let n = a.len();
    let at = |k: isize| if k < 0 || k as usize >= n { C64::new(0.0, 0.0) } else { a[k as usize] };
    let h = g.spacing();
    (0..n as isize)
        .map(|k| (-at(k + 2) + at(k + 1) * 8.0 - at(k - 1) * 8.0 + at(k - 2)) / (12.0 * h))
        .collect()
}

/// `ΔX` with `X = (i/2) d/dy`.
///
/// Plain displaced-squeezed Gaussians saturate `ΔX ΔY = 1/4`, so their
/// spread is `e^z/2` exactly; everything else is integrated from `ψ'`.
pub fn x_spread(psi: &StateVector) -> f64 {
    if let Some(p) = psi.evaluator() {
        if p.power == 0 {
            return 0.5 * p.log_width.exp();
        }
    }
    let d = derivative(psi);
    let h = psi.grid().spacing();
    let n2 = norm_sqr(psi);
    // ⟨X⟩ = (i/2)⟨ψ|ψ'⟩, ⟨X²⟩ = ‖ψ'‖²/4
    let overlap: C64 = psi.amplitudes().iter().zip(&d).map(|(a, b)| a.conj() * b).sum::<C64>() * h;
    let mean = (C64::new(0.0, 0.5) * overlap).re / n2;
    let second = 0.25 * d.iter().map(|c| c.norm_sqr()).sum::<f64>() * h / n2;
    (second - mean * mean).max(0.0).sqrt()
}

/// `Δ ln(|Y|/a)`; the spread does not depend on `a`.
pub fn log_y_spread(psi: &StateVector, a: f64) -> f64 {
    let g = psi.grid();
    let n2 = norm_sqr(psi);
    let both = |f: &dyn Fn(f64) -> f64| {
        Sector::BOTH
            .iter()
            .map(|s| sector_sum(g, *s, |k, y| psi.amplitudes()[k].norm_sqr() * f(y)))
            .sum::<f64>()
            / n2
    };
    let mean = both(&|y| (y.abs() / a).ln());
    let second = both(&|y| (y.abs() / a).ln().powi(2));
    (second - mean * mean).max(0.0).sqrt()
}

/// `ΔX · Δln(|Y|/a) / |⟨1/(4Y)⟩|`, which is `≥ 1` and tends to 1 for
/// displaced-squeezed states as `a e^z` grows.
///
/// The state must live on `y > 0` up to [`NEGATIVE_MASS_LIMIT`].
pub fn heisenberg_ratio(psi: &StateVector, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::InvalidArgument(format!("reference amplitude must be positive, got {a}")));
    }
    let g = psi.grid();
    let n2 = norm_sqr(psi);
    let negative = sector_sum(g, Sector::Minus, |k, _| psi.amplitudes()[k].norm_sqr()) / n2;
    if negative > NEGATIVE_MASS_LIMIT {
        return Err(Error::SupportViolation { mass: negative, limit: NEGATIVE_MASS_LIMIT });
    }
    // symmetric nodes make the y → 0 contributions cancel pairwise
    let inv: f64 = Sector::BOTH
        .iter()
        .map(|s| sector_sum(g, *s, |k, y| psi.amplitudes()[k].norm_sqr() / (4.0 * y)))
        .sum::<f64>()
        / n2;
    Ok(x_spread(psi) * log_y_spread(psi, a) / inv.abs())
}

/// Parameters with equal r.m.s. errors in `x` and `r` at a given photon number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsotropicParams {
    pub n_bar: f64,
    /// Root of `a = e^{-2z}`, `a² + sinh²z = n̄`.
    pub a: f64,
    pub z: f64,
    /// Split `a² = n̄ - √n̄`, `sinh²z = √n̄`, reported for comparison only.
    pub split_a: f64,
    pub split_z: f64,
}

/// Solves the isotropy system by bisection in `z < 0`.
pub fn isotropic_params(n_bar: f64) -> Result<IsotropicParams> {
    if !(n_bar > 1.0 && n_bar.is_finite()) {
        return Err(Error::InvalidArgument(format!("mean photon number must exceed 1, got {n_bar}")));
    }
    let f = |z: f64| (-4.0 * z).exp() + z.sinh().powi(2) - n_bar;
    let (mut lo, mut hi) = (-1.0, 0.0);
    while f(lo) <= 0.0 {
        lo *= 2.0;
        if lo < -1e3 {
            return Err(Error::NoConvergence(format!("no bracket for the isotropic root at n̄={n_bar}")));
        }
    }
    let mut iterations = 0;
    while hi - lo > 1e-15 * lo.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
        if iterations > 200 {
            return Err(Error::NoConvergence(format!("isotropic bisection stalled at n̄={n_bar}")));
        }
    }
    let z = 0.5 * (lo + hi);
    let root = n_bar.sqrt();
    Ok(IsotropicParams {
        n_bar,
        a: (-2.0 * z).exp(),
        z,
        split_a: (n_bar - root).sqrt(),
        split_z: -root.sqrt().asinh(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_displaced_squeezed, make_gaussian_monomial, GaussianStateParams, QuadratureGrid};
    use approx::assert_relative_eq;

    #[test]
    fn model_values() {
        let m = AsymptoticModel::coherent(10.0).unwrap();
        assert_relative_eq!(m.density(0.0, 0.0), 3.18310, epsilon = 1e-5);
        assert_relative_eq!(m.density(1.0, 0.0), 10.0 / PI * (-1.0f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(m.density(0.0, 0.1), 10.0 / PI * (-1.0f64).exp(), max_relative = 1e-14);
        let m = AsymptoticModel::new(7.0, -0.4).unwrap();
        assert_eq!(m.density(0.3, -0.02), m.density(-0.3, 0.02));
        assert!(AsymptoticModel::new(0.0, 0.0).is_err());
        assert!(m.in_asymptotic_regime() == false && AsymptoticModel::coherent(50.0).unwrap().in_asymptotic_regime());
    }

    #[test]
    fn model_integrates_to_one() {
        let m = AsymptoticModel::new(12.0, 0.3).unwrap();
        let (dx, dr) = rms_predictions(m.a, m.z);
        let n = 600;
        let (hx, hr) = (12.0 * dx / n as f64, 12.0 * dr / n as f64);
        let mut s = 0.0;
        for i in 0..=n {
            for j in 0..=n {
                let w = if i == 0 || i == n { 0.5 } else { 1.0 } * if j == 0 || j == n { 0.5 } else { 1.0 };
                s += w * m.density(-6.0 * dx + hx * i as f64, -6.0 * dr + hr * j as f64);
            }
        }
        assert_relative_eq!(s * hx * hr, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn rms_and_separate_optima() {
        let (dx, dr) = rms_predictions(10.0, 0.0);
        assert_relative_eq!(dx, 0.70711, epsilon = 1e-5);
        assert_relative_eq!(dr, 0.07071, epsilon = 1e-5);
        assert_eq!(separate_optima(10.0, 0.0), (0.5, 0.05));
        assert_eq!(rms_predictions(20.0, 0.3).0, rms_predictions(10.0, 0.3).0);
        assert_relative_eq!(rms_predictions(20.0, 0.3).1, 0.5 * rms_predictions(10.0, 0.3).1, max_relative = 1e-15);
        let z: f64 = -0.7;
        let a = (-2.0 * z).exp();
        let (dx, dr) = rms_predictions(a, z);
        assert_relative_eq!(dx, dr, max_relative = 1e-14);
        assert_relative_eq!(uncertainty_product_ratio(3.0, 0.25), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn x_spread_of_gaussians() {
        let psi = make_displaced_squeezed(3.0, -0.4, QuadratureGrid::covering(3.0, 0.5 * 0.4f64.exp())).unwrap();
        assert_relative_eq!(x_spread(&psi), 0.5 * (-0.4f64).exp(), max_relative = 1e-15);
        // sampled copy through finite differences
        let sampled = StateVector::from_samples(*psi.grid(), psi.amplitudes().to_vec()).unwrap();
        assert_relative_eq!(x_spread(&sampled), 0.5 * (-0.4f64).exp(), max_relative = 1e-6);
        // linear phase shifts ⟨X⟩ but not ΔX
        let params = GaussianStateParams { linear_phase: 1.3, power: 1, ..GaussianStateParams::displaced_squeezed(0.0, 0.0) };
        let g = QuadratureGrid::new(10.0, 4096).unwrap();
        let odd = StateVector::from_params(params, g).unwrap();
        let plain = make_gaussian_monomial(1, 0.0, 0.0, g).unwrap();
        assert_relative_eq!(x_spread(&odd), x_spread(&plain), max_relative = 1e-10);
        // y e^{-y²}: ⟨X²⟩ = ‖ψ'‖²/4 = 3/4
        assert_relative_eq!(x_spread(&plain), 0.75f64.sqrt(), max_relative = 1e-8);
    }

    #[test]
    fn heisenberg_saturation() {
        for (a, z) in [(50.0f64, 0.0f64), (50.0, -0.5)] {
            let psi = make_displaced_squeezed(a, z, QuadratureGrid::covering(a, 0.5 * (-z).exp())).unwrap();
            let ratio = heisenberg_ratio(&psi, a).unwrap();
            assert!((ratio - 1.0).abs() < 0.02, "a={a} z={z} ratio={ratio}");
            assert!(ratio >= 1.0);
        }
        let psi = make_displaced_squeezed(2.0, 0.0, QuadratureGrid::covering(2.0, 0.5)).unwrap();
        assert!(heisenberg_ratio(&psi, 2.0).unwrap() > 1.0);
        let vac = make_displaced_squeezed(0.0, 0.0, QuadratureGrid::new(10.0, 4096).unwrap()).unwrap();
        assert!(matches!(heisenberg_ratio(&vac, 1.0), Err(Error::SupportViolation { .. })));
    }

    #[test]
    fn isotropic_root() {
        let p = isotropic_params(100.0).unwrap();
        assert_relative_eq!(p.a, (-2.0 * p.z).exp(), max_relative = 1e-14);
        assert_relative_eq!(p.a * p.a + p.z.sinh().powi(2), 100.0, max_relative = 1e-12);
        // leading-order root of a² + a/4 = n̄
        let approx = (-0.25 + (0.0625 + 400.0f64).sqrt()) / 2.0;
        assert_relative_eq!(approx, 9.876, epsilon = 1e-3);
        assert!((p.a - approx).abs() / approx < 5e-3);
        let q = isotropic_params(4000.0).unwrap();
        assert_relative_eq!(q.split_a.powi(2), 4000.0 - 4000.0f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(q.split_z.sinh().powi(2), 4000.0f64.sqrt(), max_relative = 1e-12);
        assert!(q.a > p.a && q.z < p.z);
        assert!(isotropic_params(1.0).is_err());
    }
}
