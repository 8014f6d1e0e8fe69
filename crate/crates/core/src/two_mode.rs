//! λ-regularized two-mode pointer states `|Φ_s(λ)⟩ = N_λ λ^{a†a+b†b} |Φ_s⟩`
//! in a truncated Fock basis, and their overlaps under `U_g ⊗ 1`.
//!
//! The ideal pointers have Fock coefficients
//! `c_{nm} = (1/√π) ∫ √|y| h_n(y) h_m(s y) dy` and satisfy
//! `⟨Φ_s|U_g ⊗ 1|Φ_{s'}⟩ = δ(x) δ(r) δ_{ss'}`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::distribution::{DensityMap, MeasureConvention, Window};
use crate::error::{Error, Result};
use crate::group::GroupElement;

/// Smallest supported Fock cutoff.
pub const MIN_CUTOFF: usize = 20;

/// Largest dropped weight accepted by [`make_pointer`].
pub const TAIL_TOLERANCE: f64 = 1e-4;

/// Nodes of the `t` grid (`y = t²`) for the coefficient integrals.
const COEFF_NODES: usize = 8000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PointerSign {
    Plus,
    Minus,
}

impl PointerSign {
    pub fn value(self) -> f64 {
        match self {
            PointerSign::Plus => 1.0,
            PointerSign::Minus => -1.0,
        }
    }
}

/// Oscillator eigenfunctions `h_0 … h_{n_max}` at `ys`, with
/// `h_0(y) = (2/π)^{1/4} e^{-y²}`; row `n` holds `h_n`.
pub fn hermite_functions(n_max: usize, ys: &[f64]) -> Vec<Vec<f64>> {
    let mut h = vec![vec![0.0; ys.len()]; n_max + 1];
    let c0 = (2.0 / PI).powf(0.25);
    for (k, &y) in ys.iter().enumerate() {
        let mut prev = 0.0;
        let mut cur = c0 * (-y * y).exp();
        h[0][k] = cur;
        for n in 0..n_max {
            let next = (2.0 * y * cur - (n as f64).sqrt() * prev) / ((n + 1) as f64).sqrt();
            prev = cur;
            cur = next;
            h[n + 1][k] = cur;
        }
    }
    h
}

/// Turning point of `h_{n_max}` plus a margin for the Gaussian tail.
fn support_radius(n_max: usize) -> f64 {
    ((2 * n_max + 1) as f64).sqrt() / std::f64::consts::SQRT_2 + 4.0
}

/// Unregularized coefficients `c_{nm}` for `n + m ≤ n_max`, row-major
/// `(n_max+1)²`, zero outside the triangle.
pub fn raw_coefficients(sign: PointerSign, n_max: usize) -> Vec<f64> {
    let dim = n_max + 1;
    // ∫_0^∞ √y h_n h_m dy = ∫_0^T 2t² h_n(t²) h_m(t²) dt, smooth in t
    let t_max = support_radius(n_max).sqrt();
    let n = COEFF_NODES;
    let ht = t_max / n as f64;
    let ts: Vec<f64> = (0..=n).map(|i| ht * i as f64).collect();
    let ys: Vec<f64> = ts.iter().map(|t| t * t).collect();
    let h = hermite_functions(n_max, &ys);
    let w: Vec<f64> = (0..=n)
        .map(|i| {
            let s = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            s * ht / 3.0 * 2.0 * ts[i] * ts[i]
        })
        .collect();
    let pre = 2.0 / PI.sqrt();
    let mut c = vec![0.0; dim * dim];
    for a in 0..dim {
        for b in (a..dim - a).step_by(2) {
            let v = pre * (0..=n).map(|i| w[i] * h[a][i] * h[b][i]).sum::<f64>();
            c[a * dim + b] = v;
            c[b * dim + a] = v;
        }
    }
    if sign == PointerSign::Minus {
        for a in 0..dim {
            for b in (1..dim).step_by(2) {
                c[a * dim + b] = -c[a * dim + b];
            }
        }
    }
    c
}

/// Normalized, truncated regularized pointer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoModePointer {
    lambda: f64,
    sign: PointerSign,
    n_max: usize,
    /// `N_λ λ^{n+m} c_{nm}`, row-major `(n_max+1)²`.
    coeffs: Vec<f64>,
    norm: f64,
    /// Estimated weight beyond `n + m = n_max`, relative to the kept weight.
    tail: f64,
}

impl TwoModePointer {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sign(&self) -> PointerSign {
        self.sign
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize, m: usize) -> f64 {
        self.coeffs[n * (self.n_max + 1) + m]
    }

    /// `N_λ`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// `⟨a†a + b†b⟩`.
    pub fn mean_energy(&self) -> f64 {
        let dim = self.n_max + 1;
        self.coeffs.iter().enumerate().map(|(i, c)| ((i / dim + i % dim) as f64) * c * c).sum()
    }
}

fn check_pointer_args(lambda: f64, n_max: usize) -> Result<()> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidArgument(format!("λ must lie in (0, 1), got {lambda}")));
    }
    if n_max < MIN_CUTOFF {
        return Err(Error::InvalidArgument(format!("Fock cutoff {n_max} is below {MIN_CUTOFF}")));
    }
    Ok(())
}

/// Pointer without the tail requirement; the estimated tail is still recorded.
pub fn make_truncated_pointer(lambda: f64, sign: PointerSign, n_max: usize) -> Result<TwoModePointer> {
    check_pointer_args(lambda, n_max)?;
    let dim = n_max + 1;
    let mut coeffs = raw_coefficients(sign, n_max);
    let mut shells = vec![0.0; n_max + 1];
    for (i, c) in coeffs.iter_mut().enumerate() {
        let shell = i / dim + i % dim;
        if shell <= n_max {
            *c *= lambda.powi(shell as i32);
            shells[shell] += *c * *c;
        }
    }
    let kept: f64 = shells.iter().sum();
    // shells with odd n+m vanish; extrapolate the even ones geometrically
    let top = n_max - n_max % 2;
    let q = shells[top] / shells[top - 2];
    let tail = if q < 1.0 { shells[top] * q / (1.0 - q) / kept } else { f64::INFINITY };
    let norm = 1.0 / kept.sqrt();
    for c in &mut coeffs {
        *c *= norm;
    }
    Ok(TwoModePointer { lambda, sign, n_max, coeffs, norm, tail })
}

/// Pointer whose dropped tail is below [`TAIL_TOLERANCE`].
pub fn make_pointer(lambda: f64, sign: PointerSign, n_max: usize) -> Result<TwoModePointer> {
    let p = make_truncated_pointer(lambda, sign, n_max)?;
    if p.tail > TAIL_TOLERANCE {
        return Err(Error::CutoffTooSmall { tail: p.tail, tolerance: TAIL_TOLERANCE });
    }
    Ok(p)
}

/// Mode-1 grid resolving `h_{n_max}` dilated by up to `e^{r_max}` and
/// phases up to `|x| = x_max`.
fn synthesis_grid(n_max: usize, x_max: f64, r_max: f64) -> (f64, usize) {
    let y_max = support_radius(n_max);
    let k_max = 2.0 * ((2 * n_max + 1) as f64).sqrt() * r_max.max(0.0).exp() + 2.0 * x_max;
    let dy = (PI / (4.0 * k_max)).min(0.02);
    let mut n = (2.0 * y_max / dy).ceil() as usize;
    n += n % 2;
    (y_max, n)
}

fn midpoint_nodes(y_max: f64, n: usize) -> Vec<f64> {
    let h = 2.0 * y_max / n as f64;
    (0..n).map(|k| -y_max + h * (k as f64 + 0.5)).collect()
}

/// `Σ_m e_m(y) f_m(y)` style synthesis: row `m` holds `Σ_n C_{nm} h_n(y)`.
fn synthesize(p: &TwoModePointer, h: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dim = p.n_max + 1;
    let len = h[0].len();
    (0..dim)
        .map(|m| {
            let mut row = vec![0.0; len];
            for n in 0..dim - m {
                let c = p.coeff(n, m);
                if c != 0.0 {
                    for (o, v) in row.iter_mut().zip(&h[n]) {
                        *o += c * v;
                    }
                }
            }
            row
        })
        .collect()
}

/// Per-dilation kernel `F(y) = e^{r/2} Σ_m e_m(y) f_m(e^r y)` so that the
/// overlap at translation `x` is `Δ Σ_k F_k e^{-2ixy_k}`.
struct OverlapRow {
    ys: Vec<f64>,
    dy: f64,
    f: Vec<f64>,
}

impl OverlapRow {
    fn new(bra: &[Vec<f64>], ket: &TwoModePointer, ys: &[f64], dy: f64, r: f64) -> Self {
        let dil: Vec<f64> = ys.iter().map(|y| r.exp() * y).collect();
        let ket_rows = synthesize(ket, &hermite_functions(ket.n_max, &dil));
        let pre = (0.5 * r).exp();
        let f = (0..ys.len()).map(|k| pre * bra.iter().zip(&ket_rows).map(|(e, g)| e[k] * g[k]).sum::<f64>()).collect();
        Self { ys: ys.to_vec(), dy, f }
    }

    fn at(&self, x: f64) -> C64 {
        self.ys.iter().zip(&self.f).map(|(y, f)| C64::from_polar(*f, -2.0 * x * y)).sum::<C64>() * self.dy
    }
}

fn check_pair(p1: &TwoModePointer, p2: &TwoModePointer) -> Result<()> {
    if p1.n_max != p2.n_max {
        return Err(Error::InvalidArgument(format!(
            "pointers have different cutoffs {} and {}",
            p1.n_max, p2.n_max
        )));
    }
    Ok(())
}

/// `⟨Φ_1(λ_1)|U_g ⊗ 1|Φ_2(λ_2)⟩`, contracting mode 2 in the Fock basis and
/// integrating mode 1 on a grid.
pub fn pointer_overlap(p1: &TwoModePointer, g: &GroupElement, p2: &TwoModePointer) -> Result<C64> {
    check_pair(p1, p2)?;
    if !(g.x.is_finite() && g.r.is_finite()) {
        return Err(Error::InvalidArgument("non-finite group element".into()));
    }
    let (y_max, n) = synthesis_grid(p1.n_max, g.x.abs(), g.r);
    let ys = midpoint_nodes(y_max, n);
    let bra = synthesize(p1, &hermite_functions(p1.n_max, &ys));
    Ok(OverlapRow::new(&bra, p2, &ys, 2.0 * y_max / n as f64, g.r).at(g.x))
}

/// Self-overlap profile of the `+` pointer and its effective widths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationProfile {
    pub lambda: f64,
    pub n_max: usize,
    /// `Σ_s |⟨Φ_s(λ)|U_g ⊗ 1|Φ_+(λ)⟩|²` with respect to `dx dr`.
    pub map: DensityMap,
    /// Second-moment widths about the origin.
    pub width_x: f64,
    pub width_r: f64,
    pub tail: f64,
}

/// Tabulates `Σ_s |⟨Φ_s(λ)|U_g ⊗ 1|Φ_+(λ)⟩|²` over the window.
///
/// Uses truncated pointers, so the cutoff tail is reported rather than enforced.
pub fn concentration_profile(
    lambda: f64,
    n_max: usize,
    window: &Window,
    resolution: (usize, usize),
) -> Result<ConcentrationProfile> {
    window.validate()?;
    let plus = make_truncated_pointer(lambda, PointerSign::Plus, n_max)?;
    let minus = make_truncated_pointer(lambda, PointerSign::Minus, n_max)?;
    let (y_max, n) = synthesis_grid(n_max, window.max_abs_x(), window.r_lo.abs().max(window.r_hi.abs()));
    let ys = midpoint_nodes(y_max, n);
    let dy = 2.0 * y_max / n as f64;
    let h = hermite_functions(n_max, &ys);
    let bras = [synthesize(&plus, &h), synthesize(&minus, &h)];

    let (nx, nr) = resolution;
    if nx < 2 || nr < 2 {
        return Err(Error::InvalidArgument("profile resolution must be at least 2 per axis".into()));
    }
    let xs: Vec<f64> = (0..nx).map(|i| window.x_lo + (window.x_hi - window.x_lo) * i as f64 / (nx - 1) as f64).collect();
    let rs: Vec<f64> = (0..nr).map(|i| window.r_lo + (window.r_hi - window.r_lo) * i as f64 / (nr - 1) as f64).collect();
    let rows: Vec<Vec<f64>> = rs
        .par_iter()
        .map(|&r| {
            let kernels: Vec<OverlapRow> = bras.iter().map(|b| OverlapRow::new(b, &plus, &ys, dy, r)).collect();
            xs.iter().map(|&x| kernels.iter().map(|k| k.at(x).norm_sqr()).sum()).collect()
        })
        .collect();
    let values = (0..nx * nr).map(|i| rows[i % nr][i / nr]).collect();
    let map = DensityMap::from_values(*window, resolution, values, MeasureConvention::Lebesgue)?;

    let total: f64 = map.points().map(|(_, _, v)| v).sum();
    let width_x = (map.points().map(|(x, _, v)| x * x * v).sum::<f64>() / total).sqrt();
    let width_r = (map.points().map(|(_, r, v)| r * r * v).sum::<f64>() / total).sqrt();
    Ok(ConcentrationProfile { lambda, n_max, map, width_x, width_r, tail: plus.tail() })
}
