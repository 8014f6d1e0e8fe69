//! Estimation densities over the group, density scans and their statistics,
//! and quadrature oracles for POVM normalization and group averages.
//!
//! For a seed `η` the outcome density of the covariant POVM
//! `M(ĝ) = U_ĝ |η⟩⟨η| U_ĝ†` on input `ψ` is
//! `p(ĝ) = ⟨ψ|M(ĝ)|ψ⟩ = |⟨η|U_{ĝ^{-1}} ψ⟩|²`, a density with respect to the
//! left Haar measure `d_L ĝ = e^{-r̂} dx̂ dr̂`.

use std::borrow::Cow;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{half_line_moment, QuadratureGrid, Sector, StateVector, MAX_NODES};
use crate::group::{parity_act, ExtendedElement, GroupElement};
use crate::povm::PovmSeed;

/// Window mass below which moments are refused.
pub const MIN_MOMENT_MASS: f64 = 0.9;

/// Smallest scan resolution per axis.
pub const MIN_RESOLUTION: usize = 16;

/// Sign `s` in `avg(U_h A U_h†) = e^{s r_h} avg(A)` for left-Haar group averages.
pub const MODULAR_SIGN: f64 = 1.0;

/// Kernel entries below this fraction of the peak are trimmed.
const KERNEL_TRIM: f64 = 1e-17;

/// Rectangular region of the `(x, r)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_lo: f64,
    pub x_hi: f64,
    pub r_lo: f64,
    pub r_hi: f64,
}

impl Window {
    pub fn new(x_lo: f64, x_hi: f64, r_lo: f64, r_hi: f64) -> Result<Self> {
        let w = Self { x_lo, x_hi, r_lo, r_hi };
        w.validate()?;
        Ok(w)
    }

    /// `|x| ≤ x`, `|r| ≤ r`.
    pub fn symmetric(x: f64, r: f64) -> Result<Self> {
        Self::new(-x, x, -r, r)
    }

    /// `x ∈ [-4, 4]`, `r ∈ ±6/max(a, 1)`.
    pub fn coherent_default(a: f64) -> Self {
        let r = 6.0 / a.abs().max(1.0);
        Self { x_lo: -4.0, x_hi: 4.0, r_lo: -r, r_hi: r }
    }

    pub fn vacuum_default() -> Self {
        Self { x_lo: -3.0, x_hi: 3.0, r_lo: -3.0, r_hi: 3.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let v = [self.x_lo, self.x_hi, self.r_lo, self.r_hi];
        if v.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("window bounds must be finite".into()));
        }
        if self.x_lo >= self.x_hi || self.r_lo >= self.r_hi {
            return Err(Error::InvalidArgument(format!(
                "empty window x ∈ [{}, {}], r ∈ [{}, {}]",
                self.x_lo, self.x_hi, self.r_lo, self.r_hi
            )));
        }
        Ok(())
    }

    pub fn contains(&self, other: &Window) -> bool {
        self.x_lo <= other.x_lo && other.x_hi <= self.x_hi && self.r_lo <= other.r_lo && other.r_hi <= self.r_hi
    }

    pub fn max_abs_x(&self) -> f64 {
        self.x_lo.abs().max(self.x_hi.abs())
    }
}

/// Measure with respect to which a map's values are densities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureConvention {
    /// `d_L g = e^{-r} dx dr`.
    LeftHaar,
    /// `dx dr`.
    Lebesgue,
}

impl MeasureConvention {
    /// Factor turning a value into a Lebesgue density.
    pub fn weight(self, r: f64) -> f64 {
        match self {
            MeasureConvention::LeftHaar => (-r).exp(),
            MeasureConvention::Lebesgue => 1.0,
        }
    }
}

/// Density sampled on an inclusive tensor grid over a window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityMap {
    x_nodes: Vec<f64>,
    r_nodes: Vec<f64>,
    /// Index `ix * r_nodes.len() + ir`.
    values: Vec<f64>,
    convention: MeasureConvention,
    window: Window,
    /// Trapezoid integral of the Lebesgue density over the window.
    mass: f64,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { hi } else { lo + h * i as f64 }).collect()
}

fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { nodes[i] - nodes[i - 1] } else { 0.0 };
            let right = if i + 1 < n { nodes[i + 1] - nodes[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

fn check_resolution(resolution: (usize, usize)) -> Result<()> {
    if resolution.0 < MIN_RESOLUTION || resolution.1 < MIN_RESOLUTION {
        return Err(Error::InvalidArgument(format!(
            "resolution {}x{} is below the minimum {MIN_RESOLUTION} per axis",
            resolution.0, resolution.1
        )));
    }
    Ok(())
}

impl DensityMap {
    /// Builds a map from values laid out as `ix * nr + ir`.
    pub fn from_values(
        window: Window,
        resolution: (usize, usize),
        values: Vec<f64>,
        convention: MeasureConvention,
    ) -> Result<Self> {
        window.validate()?;
        check_resolution(resolution)?;
        let (nx, nr) = resolution;
        if values.len() != nx * nr {
            return Err(Error::InvalidArgument(format!("expected {} values, got {}", nx * nr, values.len())));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument("density values must be finite and non-negative".into()));
        }
        let x_nodes = linspace(window.x_lo, window.x_hi, nx);
        let r_nodes = linspace(window.r_lo, window.r_hi, nr);
        let mut map = Self { x_nodes, r_nodes, values, convention, window, mass: 0.0 };
        map.mass = map.lebesgue_integral(|_, _| 1.0);
        Ok(map)
    }

    /// Evaluates `f(x, r)` on every node, in parallel.
    pub fn tabulate(
        window: Window,
        resolution: (usize, usize),
        convention: MeasureConvention,
        f: impl Fn(f64, f64) -> Result<f64> + Sync,
    ) -> Result<Self> {
        window.validate()?;
        check_resolution(resolution)?;
        let (nx, nr) = resolution;
        let xs = linspace(window.x_lo, window.x_hi, nx);
        let rs = linspace(window.r_lo, window.r_hi, nr);
        let values = (0..nx * nr)
            .into_par_iter()
            .map(|i| f(xs[i / nr], rs[i % nr]))
            .collect::<Result<Vec<f64>>>()?;
        Self::from_values(window, resolution, values, convention)
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.x_nodes
    }

    pub fn r_nodes(&self) -> &[f64] {
        &self.r_nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, ix: usize, ir: usize) -> f64 {
        self.values[ix * self.r_nodes.len() + ir]
    }

    pub fn convention(&self) -> MeasureConvention {
        self.convention
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// `∫ p dμ` over the window.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `(x, r, value)` in storage order.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let nr = self.r_nodes.len();
        self.values.iter().enumerate().map(move |(i, v)| (self.x_nodes[i / nr], self.r_nodes[i % nr], *v))
    }

    /// The same density expressed with respect to `dx dr`.
    pub fn to_lebesgue(&self) -> DensityMap {
        let nr = self.r_nodes.len();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.convention.weight(self.r_nodes[i % nr]))
            .collect();
        DensityMap { values, convention: MeasureConvention::Lebesgue, ..self.clone() }
    }

    /// Trapezoid integral of `f(x, r) · p` with respect to `dx dr`.
    fn lebesgue_integral(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let wx = trapezoid_weights(&self.x_nodes);
        let wr = trapezoid_weights(&self.r_nodes);
        let nr = self.r_nodes.len();
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let (x, r) = (self.x_nodes[i / nr], self.r_nodes[i % nr]);
                wx[i / nr] * wr[i % nr] * v * self.convention.weight(r) * f(x, r)
            })
            .sum()
    }
}

/// Moments of a map under its own measure, normalized over the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStats {
    pub mean_x: f64,
    pub mean_r: f64,
    pub delta_x: f64,
    pub delta_r: f64,
    pub argmax_x: f64,
    pub argmax_r: f64,
    pub peak_value: f64,
}

/// `Δ Σ_k F_k e^{-2iν y_k}` for one dilation row.
///
/// A matrix element `⟨a|U_{x,r} b⟩` is `amplitude(x · nu_per_x)`: for `r ≤ 0`
/// the sum runs over the bra's nodes with the ket contracted, otherwise the
/// variable is changed so that the bra is dilated instead and the sum runs
/// over the ket's nodes. Either way the evaluated factor is the widened one.
#[derive(Debug, Clone)]
struct RowKernel {
    y0: f64,
    dy: f64,
    f: Vec<C64>,
    nu_per_x: f64,
}

impl RowKernel {
    fn new(
        grid: &QuadratureGrid,
        bra: (&[C64], &(dyn Fn(f64) -> C64 + Sync)),
        ket: (&[C64], &(dyn Fn(f64) -> C64 + Sync)),
        r: f64,
    ) -> Self {
        let n = grid.len();
        let (f, nu_per_x): (Vec<C64>, f64) = if r <= 0.0 {
            let (pre, dil) = ((0.5 * r).exp(), r.exp());
            ((0..n).map(|k| bra.0[k].conj() * ket.1(dil * grid.node(k)) * pre).collect(), 1.0)
        } else {
            let (pre, dil) = ((-0.5 * r).exp(), (-r).exp());
            ((0..n).map(|k| bra.1(dil * grid.node(k)).conj() * ket.0[k] * pre).collect(), dil)
        };
        let peak = f.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let keep = |c: &C64| c.norm() > KERNEL_TRIM * peak;
        let (first, last) = match (f.iter().position(keep), f.iter().rposition(keep)) {
            (Some(a), Some(b)) => (a, b),
            _ => (0, 0),
        };
        let f = if peak > 0.0 { f[first..=last].to_vec() } else { Vec::new() };
        Self { y0: grid.node(first), dy: grid.spacing(), f, nu_per_x }
    }

    fn amplitude(&self, nu: f64) -> C64 {
        const RESEED: usize = 1024;
        let step = C64::from_polar(1.0, -2.0 * nu * self.dy);
        let mut acc = C64::new(0.0, 0.0);
        for (b, block) in self.f.chunks(RESEED).enumerate() {
            let mut phase = C64::from_polar(1.0, -2.0 * nu * (self.y0 + (b * RESEED) as f64 * self.dy));
            for c in block {
                acc += c * phase;
                phase *= step;
            }
        }
        acc * self.dy
    }

    /// Largest `|y|` in the trimmed support.
    fn extent(&self) -> f64 {
        let last = self.y0 + self.dy * self.f.len().saturating_sub(1) as f64;
        self.y0.abs().max(last.abs())
    }

    /// `∫ |amplitude(ν)|² dν` over the whole line.
    fn parseval(&self) -> f64 {
        PI * self.dy * self.f.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Centre of `|amplitude|²` in `ν`.
    fn centroid(&self) -> f64 {
        let m = self.f.len();
        if m < 3 {
            return 0.0;
        }
        let mut num = 0.0;
        for k in 1..m - 1 {
            num += (self.f[k].conj() * (self.f[k + 1] - self.f[k - 1])).im / (2.0 * self.dy);
        }
        let den: f64 = self.f.iter().map(|c| c.norm_sqr()).sum();
        if den > 0.0 {
            0.5 * num / den
        } else {
            0.0
        }
    }
}

fn seed_kernel(seed: &PovmSeed, psi: &StateVector, r_hat: f64) -> RowKernel {
    let eta = seed.eta_sampler();
    let sampler = psi.sampler();
    let ket = move |y: f64| sampler.eval(y);
    RowKernel::new(psi.grid(), (seed.eta().amplitudes(), &eta), (psi.amplitudes(), &ket), -r_hat)
}

/// Grid spacing needed to resolve phases `e^{-2iνy}` up to `|ν| = nu_max`.
fn required_spacing(nu_max: f64) -> f64 {
    if nu_max > 0.0 {
        PI / (8.0 * nu_max)
    } else {
        f64::INFINITY
    }
}

fn resolved_grid(grid: &QuadratureGrid, nu_max: f64) -> Result<QuadratureGrid> {
    let need = required_spacing(nu_max);
    let mut g = *grid;
    while g.spacing() > need {
        if g.len() * 2 > MAX_NODES {
            return Err(Error::GridTooCoarse { spacing: g.spacing(), width: need });
        }
        g = g.refined();
    }
    Ok(g)
}

/// Seed and state on a common grid fine enough for phases up to `nu_max`.
fn resolved<'a>(
    seed: &'a PovmSeed,
    psi: &'a StateVector,
    nu_max: f64,
) -> Result<(Cow<'a, PovmSeed>, Cow<'a, StateVector>)> {
    if seed.grid() != psi.grid() {
        return Err(Error::GridMismatch);
    }
    let g = resolved_grid(psi.grid(), nu_max)?;
    if g == *psi.grid() {
        Ok((Cow::Borrowed(seed), Cow::Borrowed(psi)))
    } else {
        Ok((Cow::Owned(seed.on_grid(&g)?), Cow::Owned(psi.resample(&g))))
    }
}

/// `p(ĝ) = |⟨η|U_{ĝ^{-1}} ψ⟩|²`, a density with respect to `d_L ĝ`.
pub fn density_at(seed: &PovmSeed, psi: &StateVector, g: &GroupElement) -> Result<f64> {
    if !(g.x.is_finite() && g.r.is_finite()) {
        return Err(Error::InvalidArgument("non-finite group element".into()));
    }
    let (seed, psi) = resolved(seed, psi, g.x.abs())?;
    let kernel = seed_kernel(&seed, &psi, g.r);
    Ok(row_density(&kernel, g.x, g.r))
}

fn row_density(kernel: &RowKernel, x_hat: f64, r_hat: f64) -> f64 {
    let x_inv = -(-r_hat).exp() * x_hat;
    kernel.amplitude(x_inv * kernel.nu_per_x).norm_sqr()
}

/// Density of the outcome `P^ε U_g` for the parity-extended group,
/// `|⟨η|U_{g^{-1}} P^ε ψ⟩|²`.
pub fn density_at_extended(seed: &PovmSeed, psi: &StateVector, e: &ExtendedElement) -> Result<f64> {
    if e.parity {
        density_at(seed, &parity_act(psi), &e.g)
    } else {
        density_at(seed, psi, &e.g)
    }
}

/// Tabulates `p` over `window` at `resolution = (nx, nr)` inclusive nodes.
///
/// The state grid is refined first if it cannot resolve the phase gradients
/// reached inside the window.
pub fn scan(seed: &PovmSeed, psi: &StateVector, window: &Window, resolution: (usize, usize)) -> Result<DensityMap> {
    window.validate()?;
    check_resolution(resolution)?;
    let (seed, psi) = resolved(seed, psi, window.max_abs_x())?;
    let (nx, nr) = resolution;
    let xs = linspace(window.x_lo, window.x_hi, nx);
    let rs = linspace(window.r_lo, window.r_hi, nr);
    let rows: Vec<Vec<f64>> = rs
        .par_iter()
        .map(|&r| {
            let kernel = seed_kernel(&seed, &psi, r);
            xs.iter().map(|&x| row_density(&kernel, x, r)).collect()
        })
        .collect();
    let values = (0..nx * nr).map(|i| rows[i % nr][i / nr]).collect();
    DensityMap::from_values(*window, resolution, values, MeasureConvention::LeftHaar)
}

/// Grid argmax refined by a least-squares quadratic fit on the 3×3
/// neighbourhood; ties go to the lexicographically smallest `(x, r)`.
///
/// Peaks on the window edge, or neighbourhoods whose fit is not a proper
/// maximum inside the cell, keep the grid point.
pub fn argmax(map: &DensityMap) -> (f64, f64, f64) {
    let (nx, nr) = (map.x_nodes.len(), map.r_nodes.len());
    let (mut bx, mut br, mut best) = (0, 0, f64::NEG_INFINITY);
    for ix in 0..nx {
        for ir in 0..nr {
            let v = map.value(ix, ir);
            if v > best {
                (bx, br, best) = (ix, ir, v);
            }
        }
    }
    let (x0, r0) = (map.x_nodes[bx], map.r_nodes[br]);
    if bx == 0 || br == 0 || bx + 1 == nx || br + 1 == nr {
        return (x0, r0, best);
    }
    // f ≈ c0 + c1 u + c2 v + c3 u² + c4 uv + c5 v², offsets in index units
    let mut ata = [[0.0; 6]; 6];
    let mut atb = [0.0; 6];
    for du in -1i32..=1 {
        for dv in -1i32..=1 {
            let (u, v) = (du as f64, dv as f64);
            let row = [1.0, u, v, u * u, u * v, v * v];
            let f = map.value((bx as i32 + du) as usize, (br as i32 + dv) as usize);
            for i in 0..6 {
                atb[i] += row[i] * f;
                for j in 0..6 {
                    ata[i][j] += row[i] * row[j];
                }
            }
        }
    }
    let Some(c) = solve6(ata, atb) else {
        return (x0, r0, best);
    };
    // gradient zero: [2c3 c4; c4 2c5] [u v]ᵀ = -[c1 c2]ᵀ
    let (a, b, d) = (2.0 * c[3], c[4], 2.0 * c[5]);
    let det = a * d - b * b;
    if !(a < 0.0 && det > 0.0) {
        return (x0, r0, best);
    }
    let u = (-c[1] * d + c[2] * b) / det;
    let v = (-c[2] * a + c[1] * b) / det;
    if u.abs() > 1.0 || v.abs() > 1.0 {
        return (x0, r0, best);
    }
    let value = c[0] + c[1] * u + c[2] * v + c[3] * u * u + c[4] * u * v + c[5] * v * v;
    let hx = map.x_nodes[bx + 1] - x0;
    let hr = map.r_nodes[br + 1] - r0;
    (x0 + u * hx, r0 + v * hr, value.max(best))
}

fn solve6(mut a: [[f64; 6]; 6], mut b: [f64; 6]) -> Option<[f64; 6]> {
    for col in 0..6 {
        let piv = (col..6).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..6 {
            let m = a[row][col] / a[col][col];
            for k in col..6 {
                a[row][k] -= m * a[col][k];
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = [0.0; 6];
    for row in (0..6).rev() {
        let s: f64 = (row + 1..6).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Means and r.m.s. spreads under the map's measure, normalized over the window.
///
/// Refused when the window holds less than [`MIN_MOMENT_MASS`].
pub fn moments(map: &DensityMap) -> Result<SummaryStats> {
    if !(map.mass > MIN_MOMENT_MASS) {
        return Err(Error::InsufficientMass { mass: map.mass, required: MIN_MOMENT_MASS });
    }
    weighted_moments(map)
}

/// [`moments`] without the mass requirement.
pub fn weighted_moments(map: &DensityMap) -> Result<SummaryStats> {
    let m = map.mass;
    if !(m > 0.0) {
        return Err(Error::EmptySupport);
    }
    let mean_x = map.lebesgue_integral(|x, _| x) / m;
    let mean_r = map.lebesgue_integral(|_, r| r) / m;
    let var_x = map.lebesgue_integral(|x, _| (x - mean_x).powi(2)) / m;
    let var_r = map.lebesgue_integral(|_, r| (r - mean_r).powi(2)) / m;
    let (argmax_x, argmax_r, peak_value) = argmax(map);
    Ok(SummaryStats {
        mean_x,
        mean_r,
        delta_x: var_x.max(0.0).sqrt(),
        delta_r: var_r.max(0.0).sqrt(),
        argmax_x,
        argmax_r,
        peak_value,
    })
}

/// `∫ |⟨η|U_{ĝ^{-1}} ψ⟩|² e^{-r̂} dx̂ dr̂` over the window.
///
/// Rows in `r̂` use composite Simpson with a step tied to the state's own
/// dilation scale; along each row the integral runs over the window in the
/// row's natural frequency variable and stops once the remaining
/// full-line mass (known exactly from Parseval) is negligible.
pub fn normalization_check(seed: &PovmSeed, psi: &StateVector, window: &Window) -> Result<f64> {
    window.validate()?;
    if seed.grid() != psi.grid() {
        return Err(Error::GridMismatch);
    }
    let dr = (0.1 * dilation_scale(psi)).min(0.05);
    let mut n = ((window.r_hi - window.r_lo) / dr).ceil() as usize;
    n = n.max(64);
    n += n % 2;
    let h = (window.r_hi - window.r_lo) / n as f64;
    let rows: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let r = if i == n { window.r_hi } else { window.r_lo + h * i as f64 };
            let kernel = seed_kernel(seed, psi, r);
            row_mass(&kernel, window, r)
        })
        .collect();
    Ok(simpson(&rows, h))
}

/// Rough r.m.s. width in `r` of an estimation density for `ψ`: `√2 σ_Y / ⟨Y²⟩^{1/2}`.
fn dilation_scale(psi: &StateVector) -> f64 {
    let mean = crate::grid::signed_moment(psi, 1);
    let second = crate::grid::signed_moment(psi, 2);
    let var = (second - mean * mean).max(0.0);
    if second > 0.0 {
        (2.0 * var / second).sqrt()
    } else {
        1.0
    }
}

fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len() - 1;
    let inner: f64 = (1..n).map(|i| if i % 2 == 1 { 4.0 * f[i] } else { 2.0 * f[i] }).sum();
    h / 3.0 * (f[0] + f[n] + inner)
}

/// `∫_{x_lo}^{x_hi} p(x̂, r̂) e^{-r̂} dx̂` for one row.
fn row_mass(kernel: &RowKernel, window: &Window, r_hat: f64) -> f64 {
    const BLOCK: usize = 128;
    const REMAINDER: f64 = 1e-10;
    let total = kernel.parseval();
    if total == 0.0 {
        return 0.0;
    }
    // ν = a x̂, so e^{-r̂} dx̂ = e^{-r̂} dν / |a|
    let a = -(-r_hat).exp() * kernel.nu_per_x;
    let jac = (-r_hat).exp() / a.abs();
    let cap = PI / (8.0 * kernel.dy);
    let (e1, e2) = (a * window.x_lo, a * window.x_hi);
    let lo = e1.min(e2).max(-cap);
    let hi = e1.max(e2).min(cap);
    if lo >= hi {
        return 0.0;
    }
    let h_target = PI / (16.0 * kernel.extent().max(1e-3));
    let n = ((hi - lo) / h_target).ceil().max(2.0) as usize;
    let h = (hi - lo) / n as f64;
    let node = |j: usize| if j == n { hi } else { lo + h * j as f64 };
    let weight = |j: usize| if j == 0 || j == n { 0.5 * h } else { h };
    let start = (((kernel.centroid() - lo) / h).round().max(0.0) as usize).min(n);

    let mut acc = kernel.amplitude(node(start)).norm_sqr() * weight(start);
    let (mut left, mut right) = (start, start);
    while left > 0 || right < n {
        for _ in 0..BLOCK {
            if left == 0 {
                break;
            }
            left -= 1;
            acc += kernel.amplitude(node(left)).norm_sqr() * weight(left);
        }
        for _ in 0..BLOCK {
            if right == n {
                break;
            }
            right += 1;
            acc += kernel.amplitude(node(right)).norm_sqr() * weight(right);
        }
        if acc >= (1.0 - REMAINDER) * total {
            break;
        }
    }
    acc * jac
}

fn check_common_grid(states: &[&StateVector]) -> Result<QuadratureGrid> {
    let g = *states[0].grid();
    if states.iter().any(|s| *s.grid() != g) {
        return Err(Error::GridMismatch);
    }
    Ok(g)
}

/// `⟨φ|θ(±Y)/|Y||ψ⟩` by midpoint quadrature; both states are first checked
/// to lie in the domain of `|Y|^{-1/2}` on the sector.
fn inverse_y_cross(phi: &StateVector, psi: &StateVector, sector: Sector) -> Result<C64> {
    half_line_moment(psi, sector, -1)?;
    half_line_moment(phi, sector, -1)?;
    let g = psi.grid();
    let d = g.spacing();
    Ok(g.sector_range(sector)
        .map(|k| phi.amplitudes()[k].conj() * psi.amplitudes()[k] / g.node(k).abs())
        .sum::<C64>()
        * d)
}

/// `Σ_± π ⟨φ|θ(±Y)|Y|^{-1}|ψ⟩ ⟨u|θ(±Y)|v⟩`, the group average
/// `∫ ⟨u|U_g|ψ⟩⟨φ|U_g†|v⟩ d_L g` in closed form.
pub fn group_average_closed_form(
    psi: &StateVector,
    phi: &StateVector,
    u: &StateVector,
    v: &StateVector,
) -> Result<C64> {
    let g = check_common_grid(&[psi, phi, u, v])?;
    let d = g.spacing();
    let mut total = C64::new(0.0, 0.0);
    for s in Sector::BOTH {
        let cross = inverse_y_cross(phi, psi, s)?;
        let proj: C64 = g.sector_range(s).map(|k| u.amplitudes()[k].conj() * v.amplitudes()[k]).sum::<C64>() * d;
        total += PI * cross * proj;
    }
    Ok(total)
}

/// Brute-force `∫ ⟨u|U_g|ψ⟩⟨φ|U_g†|v⟩ e^{-r} dx dr` over the window by
/// composite Simpson with `resolution = (nx, nr)` intervals (rounded up to even).
///
/// ψ and φ must be admissible; [`Error::DivergenceDetected`] otherwise.
pub fn group_average_sandwich(
    psi: &StateVector,
    phi: &StateVector,
    u: &StateVector,
    v: &StateVector,
    window: &Window,
    resolution: (usize, usize),
) -> Result<C64> {
    window.validate()?;
    check_resolution(resolution)?;
    check_common_grid(&[psi, phi, u, v])?;
    for s in Sector::BOTH {
        half_line_moment(psi, s, -1)?;
        half_line_moment(phi, s, -1)?;
    }
    let g = resolved_grid(psi.grid(), window.max_abs_x())?;
    let states: Vec<StateVector> = [psi, phi, u, v].iter().map(|s| s.resample(&g)).collect();
    let [psi, phi, u, v] = [&states[0], &states[1], &states[2], &states[3]];

    let even = |n: usize| n + n % 2;
    let (nx, nr) = (even(resolution.0), even(resolution.1));
    let hx = (window.x_hi - window.x_lo) / nx as f64;
    let hr = (window.r_hi - window.r_lo) / nr as f64;
    let simpson_w = |i: usize, n: usize| if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };

    let (sp, sf, su, sv) = (psi.sampler(), phi.sampler(), u.sampler(), v.sampler());
    let (ep, ef) = (|y: f64| sp.eval(y), |y: f64| sf.eval(y));
    let (eu, ev) = (|y: f64| su.eval(y), |y: f64| sv.eval(y));
    let rows: Vec<C64> = (0..=nr)
        .into_par_iter()
        .map(|ir| {
            let r = window.r_lo + hr * ir as f64;
            let k1 = RowKernel::new(&g, (u.amplitudes(), &eu), (psi.amplitudes(), &ep), r);
            let k2 = RowKernel::new(&g, (v.amplitudes(), &ev), (phi.amplitudes(), &ef), r);
            let row: C64 = (0..=nx)
                .map(|ix| {
                    let x = window.x_lo + hx * ix as f64;
                    k1.amplitude(x * k1.nu_per_x) * k2.amplitude(x * k2.nu_per_x).conj() * simpson_w(ix, nx)
                })
                .sum();
            row * (hx / 3.0) * (-r).exp() * simpson_w(ir, nr)
        })
        .collect();
    Ok(rows.into_iter().sum::<C64>() * (hr / 3.0))
}
