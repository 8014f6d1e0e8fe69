//! Quadrature grids and single-mode states in the Y-quadrature representation.
//!
//! Wavefunctions are sampled on a midpoint-offset grid that never contains
//! `y = 0`, so weights such as `1/|y|` are finite at every node. States from
//! the Gaussian family also carry their closed-form parameters, which lets
//! the group action and grid refinement run without interpolation.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Hard cap on the number of nodes used by adaptive refinement.
pub const MAX_NODES: usize = 1 << 20;

/// Minimum node count for default grids.
pub const DEFAULT_NODES: usize = 4096;

/// Uniform midpoint grid on `[-y_max, y_max]` with an even number of nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureGrid {
    y_max: f64,
    n: usize,
}

impl QuadratureGrid {
    pub fn new(y_max: f64, n: usize) -> Result<Self> {
        if !(y_max.is_finite() && y_max > 0.0) {
            return Err(Error::InvalidArgument(format!("y_max must be positive, got {y_max}")));
        }
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidArgument(format!("node count must be even and >= 2, got {n}")));
        }
        Ok(Self { y_max, n })
    }

    /// Default grid for a state centered at `center` whose probability density
    /// has spread `spread`: `y_max = |center| + 10 max(spread, 1)` and at least
    /// 16 nodes per spread.
    pub fn covering(center: f64, spread: f64) -> Self {
        let y_max = center.abs() + 10.0 * spread.max(1.0);
        let wanted = (2.0 * y_max * 16.0 / spread).ceil() as usize;
        let n = even_at_least(wanted.max(DEFAULT_NODES)).min(MAX_NODES);
        Self { y_max, n }
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.y_max / self.n as f64
    }

    /// Node `k`; built outward from zero so that `node(k) == -node(n-1-k)` exactly.
    #[inline]
    pub fn node(&self, k: usize) -> f64 {
        let half = self.n / 2;
        let d = self.spacing();
        if k >= half {
            ((k - half) as f64 + 0.5) * d
        } else {
            -(((half - 1 - k) as f64 + 0.5) * d)
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.node(k)).collect()
    }

    /// Same window, twice the nodes.
    pub fn refined(&self) -> Self {
        Self { y_max: self.y_max, n: 2 * self.n }
    }

    /// Index range of nodes in the given half-line sector.
    pub fn sector_range(&self, sector: Sector) -> std::ops::Range<usize> {
        match sector {
            Sector::Plus => self.n / 2..self.n,
            Sector::Minus => 0..self.n / 2,
        }
    }
}

fn even_at_least(n: usize) -> usize {
    n + (n % 2)
}

/// The two half-line sectors `y > 0` and `y < 0` (the irreducible subspaces).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sector {
    Plus,
    Minus,
}

impl Sector {
    pub const BOTH: [Sector; 2] = [Sector::Plus, Sector::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Sector::Plus => 1.0,
            Sector::Minus => -1.0,
        }
    }

    /// Step function `θ(±y)`.
    #[inline]
    pub fn contains(self, y: f64) -> bool {
        match self {
            Sector::Plus => y >= 0.0,
            Sector::Minus => y < 0.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Sector::Plus => 0,
            Sector::Minus => 1,
        }
    }
}

/// Closed-form parameters of the family
/// `A e^{iφ} e^{-2icy} y^k exp(-(y-a)² e^{2z})`.
///
/// With `k = 0` this is the displaced squeezed state `|ia, z⟩` (coherent for
/// `z = 0`). The family is closed under the affine action, the parity and
/// complex phases, so every transformed state keeps an exact evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianStateParams {
    /// Mean of the Gaussian factor (the coherent amplitude is `α = i a`).
    pub center: f64,
    /// Squeezing parameter `z`.
    pub log_width: f64,
    /// Coefficient `c` of the phase `e^{-2icy}`; equals `⟨X⟩` for real envelopes.
    pub linear_phase: f64,
    pub global_phase: f64,
    /// Power `k` of the monomial prefactor `y^k`.
    pub power: u32,
}

impl GaussianStateParams {
    pub fn displaced_squeezed(center: f64, log_width: f64) -> Self {
        Self { center, log_width, linear_phase: 0.0, global_phase: 0.0, power: 0 }
    }

    /// Standard deviation of the Gaussian factor of `|ψ|²`, `e^{-z}/2`.
    pub fn prob_std(&self) -> f64 {
        0.5 * (-self.log_width).exp()
    }

    /// Rough spread of `|ψ|²` used for grid sizing.
    pub fn spread(&self) -> f64 {
        self.prob_std() * (2.0 * self.power as f64 + 1.0).sqrt()
    }

    /// Support bound `|a| + 6·spread` (plus the monomial lobe for `k > 0`).
    pub fn support_radius(&self) -> f64 {
        let lobe = if self.power > 0 { self.spread() } else { 0.0 };
        self.center.abs() + 6.0 * self.spread() + lobe
    }

    /// `∫ y^{2k} exp(-2(y-a)² e^{2z}) dy`.
    fn envelope_mass(&self) -> f64 {
        let s = self.prob_std();
        let k = self.power as usize;
        let a = self.center;
        // E[(a + sT)^{2k}] for standard normal T
        let mut moment = 0.0;
        let mut binom = 1.0; // C(2k, j)
        for j in 0..=2 * k {
            if j > 0 {
                binom *= (2 * k + 1 - j) as f64 / j as f64;
            }
            if j % 2 == 0 {
                let dfact: f64 = (1..j).step_by(2).map(|i| i as f64).product();
                moment += binom * a.powi((2 * k - j) as i32) * s.powi(j as i32) * dfact;
            }
        }
        s * (2.0 * PI).sqrt() * moment
    }

    pub fn prepare(&self) -> PreparedGaussian {
        PreparedGaussian {
            params: *self,
            amplitude: self.envelope_mass().powf(-0.5),
            inv_width2: (2.0 * self.log_width).exp(),
        }
    }

    /// Parameters of `U_{x,r} ψ`, i.e. of `e^{r/2} e^{-2ixy} ψ(e^r y)`.
    pub fn acted(&self, x: f64, r: f64) -> Self {
        Self {
            center: (-r).exp() * self.center,
            log_width: self.log_width + r,
            linear_phase: r.exp() * self.linear_phase + x,
            global_phase: self.global_phase,
            power: self.power,
        }
    }

    /// Parameters of `ψ(-y)`.
    pub fn reflected(&self) -> Self {
        let flip = if self.power % 2 == 1 { PI } else { 0.0 };
        Self {
            center: -self.center,
            linear_phase: -self.linear_phase,
            global_phase: self.global_phase + flip,
            ..*self
        }
    }
}

/// A [`GaussianStateParams`] with its normalization constant cached.
#[derive(Debug, Clone, Copy)]
pub struct PreparedGaussian {
    params: GaussianStateParams,
    amplitude: f64,
    inv_width2: f64,
}

impl PreparedGaussian {
    #[inline]
    pub fn eval(&self, y: f64) -> C64 {
        let p = &self.params;
        let d = y - p.center;
        let env = self.amplitude * y.powi(p.power as i32) * (-d * d * self.inv_width2).exp();
        if env == 0.0 {
            return C64::new(0.0, 0.0);
        }
        C64::from_polar(env, p.global_phase - 2.0 * p.linear_phase * y)
    }

    /// `dψ/dy` in closed form.
    #[inline]
    pub fn derivative(&self, y: f64) -> C64 {
        let p = &self.params;
        let d = y - p.center;
        let mut log_der = C64::new(-2.0 * d * self.inv_width2, -2.0 * p.linear_phase);
        let value = self.eval(y);
        if p.power > 0 {
            // k y^{k-1} term, written without dividing by y
            let env = self.amplitude
                * p.power as f64
                * y.powi(p.power as i32 - 1)
                * (-d * d * self.inv_width2).exp();
            let phase = C64::from_polar(1.0, p.global_phase - 2.0 * p.linear_phase * y);
            return value * log_der + phase * env;
        }
        log_der *= value;
        log_der
    }
}

/// A single-mode pure state sampled on a [`QuadratureGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    grid: QuadratureGrid,
    amplitudes: Vec<C64>,
    evaluator: Option<GaussianStateParams>,
    norm_certificate: f64,
}

impl StateVector {
    /// Samples a Gaussian-family state on `grid`, checking support and resolution.
    pub fn from_params(params: GaussianStateParams, grid: QuadratureGrid) -> Result<Self> {
        check_fits(&params, &grid)?;
        let prepared = params.prepare();
        let amplitudes = (0..grid.len()).map(|k| prepared.eval(grid.node(k))).collect();
        Ok(Self::assemble(grid, amplitudes, Some(params)))
    }

    /// Samples a Gaussian-family state on its default grid.
    pub fn from_params_default_grid(params: GaussianStateParams) -> Result<Self> {
        let grid = QuadratureGrid::covering(params.center, params.spread());
        Self::from_params(params, grid)
    }

    /// Wraps raw samples. No normalization is applied.
    pub fn from_samples(grid: QuadratureGrid, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes for a grid of {} nodes",
                amplitudes.len(),
                grid.len()
            )));
        }
        if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::InvalidArgument("non-finite amplitude".into()));
        }
        Ok(Self::assemble(grid, amplitudes, None))
    }

    fn assemble(grid: QuadratureGrid, amplitudes: Vec<C64>, evaluator: Option<GaussianStateParams>) -> Self {
        let norm_certificate = (amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.spacing()).sqrt();
        Self { grid, amplitudes, evaluator, norm_certificate }
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn evaluator(&self) -> Option<&GaussianStateParams> {
        self.evaluator.as_ref()
    }

    /// Quadrature norm `‖ψ‖` computed when the samples were set.
    pub fn norm_certificate(&self) -> f64 {
        self.norm_certificate
    }

    /// Rescales a sampled vector to unit quadrature norm.
    pub fn normalized(self) -> Result<Self> {
        if self.norm_certificate == 0.0 {
            return Err(Error::EmptySupport);
        }
        if self.evaluator.is_some() {
            return Ok(self);
        }
        let s = 1.0 / self.norm_certificate;
        let amps = self.amplitudes.iter().map(|a| a * s).collect();
        Ok(Self::assemble(self.grid, amps, None))
    }

    /// Returns an evaluation closure: exact for Gaussian-family states,
    /// cubic interpolation (zero outside the grid) otherwise.
    pub fn sampler(&self) -> Sampler<'_> {
        match &self.evaluator {
            Some(p) => Sampler::Exact(p.prepare()),
            None => Sampler::Interpolated(self),
        }
    }

    pub fn eval(&self, y: f64) -> C64 {
        self.sampler().eval(y)
    }

    /// Re-samples onto another grid.
    pub fn resample(&self, grid: &QuadratureGrid) -> Self {
        if *grid == self.grid {
            return self.clone();
        }
        let s = self.sampler();
        let amps = (0..grid.len()).map(|k| s.eval(grid.node(k))).collect();
        Self::assemble(*grid, amps, self.evaluator)
    }

    /// `|ψ(y_k)|²` at every node.
    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        self.amplitudes.iter().map(|a| a.norm_sqr())
    }

    fn cubic(&self, y: f64) -> C64 {
        let d = self.grid.spacing();
        let u = (y - self.grid.node(0)) / d;
        let i = u.floor();
        if !(i >= -2.0 && i <= self.grid.len() as f64) {
            return C64::new(0.0, 0.0);
        }
        let t = u - i;
        let i = i as isize;
        let at = |j: isize| -> C64 {
            if j < 0 || j >= self.amplitudes.len() as isize {
                C64::new(0.0, 0.0)
            } else {
                self.amplitudes[j as usize]
            }
        };
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        // Catmull-Rom
        let t2 = t * t;
        let t3 = t2 * t;
        (p1 * 2.0
            + (p2 - p0) * t
            + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * t2
            + (p1 * 3.0 - p0 - p2 * 3.0 + p3) * t3)
            * 0.5
    }
}

/// Point evaluator returned by [`StateVector::sampler`].
pub enum Sampler<'a> {
    Exact(PreparedGaussian),
    Interpolated(&'a StateVector),
}

impl Sampler<'_> {
    #[inline]
    pub fn eval(&self, y: f64) -> C64 {
        match self {
            Sampler::Exact(p) => p.eval(y),
            Sampler::Interpolated(s) => s.cubic(y),
        }
    }
}

fn check_fits(params: &GaussianStateParams, grid: &QuadratureGrid) -> Result<()> {
    let required = params.support_radius();
    if required > grid.y_max() {
        return Err(Error::GridTooNarrow { required, y_max: grid.y_max() });
    }
    let width = params.prob_std();
    if grid.spacing() > width {
        return Err(Error::GridTooCoarse { spacing: grid.spacing(), width });
    }
    Ok(())
}

/// Coherent state `|ia⟩`, wavefunction `(2/π)^{1/4} e^{-(y-a)²}`.
pub fn make_coherent(a: f64, grid: QuadratureGrid) -> Result<StateVector> {
    make_displaced_squeezed(a, 0.0, grid)
}

/// Displaced squeezed state `|ia, z⟩`, wavefunction `(2e^{2z}/π)^{1/4} e^{-(y-a)² e^{2z}}`.
pub fn make_displaced_squeezed(a: f64, z: f64, grid: QuadratureGrid) -> Result<StateVector> {
    if !(a.is_finite() && z.is_finite()) {
        return Err(Error::InvalidArgument("non-finite state parameter".into()));
    }
    StateVector::from_params(GaussianStateParams::displaced_squeezed(a, z), grid)
}

/// Normalized `y^k exp(-(y-a)² e^{2z})`. For `k >= 1` the wavefunction vanishes
/// at `y = 0`, which makes the state admissible (finite `⟨1/|Y|⟩`).
pub fn make_gaussian_monomial(power: u32, a: f64, z: f64, grid: QuadratureGrid) -> Result<StateVector> {
    let params = GaussianStateParams { power, ..GaussianStateParams::displaced_squeezed(a, z) };
    StateVector::from_params(params, grid)
}

/// `⟨φ|ψ⟩` by midpoint quadrature.
pub fn inner_product(phi: &StateVector, psi: &StateVector) -> Result<C64> {
    if phi.grid != psi.grid {
        return Err(Error::GridMismatch);
    }
    let sum: C64 = phi.amplitudes.iter().zip(&psi.amplitudes).map(|(a, b)| a.conj() * b).sum();
    Ok(sum * phi.grid.spacing())
}

/// Controls for refinement-based quadrature of singular integrands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// A value that grows by more than this factor over two successive
    /// doublings is reported as divergent.
    pub growth_factor: f64,
    pub rel_tol: f64,
    pub max_nodes: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self { growth_factor: 1.05, rel_tol: 1e-9, max_nodes: MAX_NODES }
    }
}

/// `∫_{sector} |y|^power |ψ(y)|² dy`.
///
/// Non-negative powers are summed on the state's own grid. Negative powers
/// are singular at `y = 0` and go through [`refine_singular`].
pub fn half_line_moment(psi: &StateVector, sector: Sector, power: i32) -> Result<f64> {
    half_line_moment_with(psi, sector, power, &QuadratureSettings::default())
}

pub fn half_line_moment_with(
    psi: &StateVector,
    sector: Sector,
    power: i32,
    settings: &QuadratureSettings,
) -> Result<f64> {
    if power >= 0 {
        return Ok(sector_sum(&psi.grid, sector, |k, y| psi.amplitudes[k].norm_sqr() * y.abs().powi(power)));
    }
    let label = format!("|y|^{power} moment on sector {sector:?}");
    refine_singular(psi, settings, &label, |grid, sampler| {
        sector_sum(grid, sector, |_, y| sampler.eval(y).norm_sqr() * y.abs().powi(power))
    })
}

/// Midpoint sum of `f(k, y_k)` over the nodes of a sector.
pub fn sector_sum(grid: &QuadratureGrid, sector: Sector, f: impl Fn(usize, f64) -> f64) -> f64 {
    let d = grid.spacing();
    grid.sector_range(sector).map(|k| f(k, grid.node(k))).sum::<f64>() * d
}

/// Evaluates `quantity` on the state's grid and on successive doublings.
///
/// Reports [`Error::DivergenceDetected`] when the first two doublings both
/// grow the value by more than the configured factor; otherwise refines
/// until two successive values agree to `rel_tol` or the node cap is hit.
pub fn refine_singular(
    psi: &StateVector,
    settings: &QuadratureSettings,
    label: &str,
    quantity: impl Fn(&QuadratureGrid, &Sampler<'_>) -> f64,
) -> Result<f64> {
    let sampler = psi.sampler();
    let mut grid = psi.grid;
    let mut values = vec![quantity(&grid, &sampler)];
    while grid.len() * 2 <= settings.max_nodes {
        grid = grid.refined();
        let v = quantity(&grid, &sampler);
        values.push(v);
        let m = values.len();
        if m == 3 {
            let growth = [growth(values[0], values[1]), growth(values[1], values[2])];
            if growth.iter().all(|g| *g > settings.growth_factor) {
                return Err(Error::DivergenceDetected { quantity: label.to_string(), growth });
            }
        }
        if (values[m - 1] - values[m - 2]).abs() <= settings.rel_tol * values[m - 1].abs() {
            return Ok(v);
        }
    }
    Ok(*values.last().unwrap())
}

fn growth(prev: f64, next: f64) -> f64 {
    if prev > 0.0 {
        next / prev
    } else if next > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// `∫ |y|^power |ψ(y)|² dy` on the state's grid (`power >= 0`).
pub fn absolute_moment(psi: &StateVector, power: i32) -> f64 {
    let d = psi.grid.spacing();
    (0..psi.grid.len())
        .map(|k| psi.amplitudes[k].norm_sqr() * psi.grid.node(k).abs().powi(power))
        .sum::<f64>()
        * d
}

/// `∫ y^power |ψ(y)|² dy` on the state's grid.
pub fn signed_moment(psi: &StateVector, power: i32) -> f64 {
    let d = psi.grid.spacing();
    (0..psi.grid.len())
        .map(|k| psi.amplitudes[k].norm_sqr() * psi.grid.node(k).powi(power))
        .sum::<f64>()
        * d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> QuadratureGrid {
        QuadratureGrid::new(12.0, 4096).unwrap()
    }

    #[test]
    fn nodes_are_symmetric_and_avoid_zero() {
        let g = QuadratureGrid::new(7.3, 1000).unwrap();
        for k in 0..g.len() {
            assert_eq!(g.node(k), -g.node(g.len() - 1 - k));
            assert!(g.node(k) != 0.0);
            if k > 0 {
                assert!(g.node(k) > g.node(k - 1));
            }
        }
        assert!(QuadratureGrid::new(1.0, 7).is_err());
        assert!(QuadratureGrid::new(-1.0, 8).is_err());
    }

    #[test]
    fn coherent_at_origin() {
        let psi = make_coherent(0.0, grid()).unwrap();
        assert_relative_eq!(psi.eval(0.0).re, (2.0 / PI).powf(0.25), epsilon = 1e-15);
        assert_relative_eq!(psi.eval(0.0).re, 0.893244, epsilon = 1e-6);
    }

    #[test]
    fn coherent_norm_and_mean() {
        let psi = make_coherent(3.0, grid()).unwrap();
        assert!((psi.norm_certificate() - 1.0).abs() < 1e-10);
        let psi = make_coherent(5.0, grid()).unwrap();
        assert!((signed_moment(&psi, 1) - 5.0).abs() < 1e-10);
    }

    #[test]
    fn coherent_requires_room() {
        let narrow = QuadratureGrid::new(6.0, 4096).unwrap();
        assert!(matches!(make_coherent(3.5, narrow), Err(Error::GridTooNarrow { .. })));
        assert!(make_coherent(2.9, narrow).is_ok());
    }

    #[test]
    fn squeezed_reduces_to_coherent() {
        let a = make_displaced_squeezed(1.3, 0.0, grid()).unwrap();
        let b = make_coherent(1.3, grid()).unwrap();
        assert_eq!(a.amplitudes(), b.amplitudes());
    }

    #[test]
    fn squeezed_variance() {
        let psi = make_displaced_squeezed(0.0, 0.5, grid()).unwrap();
        // oracle: ∫ y² |ψ|² dy for a Gaussian of std e^{-z}/2
        let oracle = (-1.0f64).exp() / 4.0;
        assert_relative_eq!(signed_moment(&psi, 2), oracle, max_relative = 1e-10);
        assert_relative_eq!(oracle, 0.09197, epsilon = 1e-5);
        let psi = make_displaced_squeezed(2.0, -1.0, QuadratureGrid::covering(2.0, 1.36)).unwrap();
        assert!((psi.norm_certificate() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn monomial_states_are_normalized() {
        for (k, a, z) in [(1, 0.0, 0.0), (2, 0.0, 0.3), (1, 1.5, -0.4), (3, -0.7, 0.2)] {
            let psi = make_gaussian_monomial(k, a, z, grid()).unwrap();
            assert!((psi.norm_certificate() - 1.0).abs() < 1e-10, "k={k} a={a} z={z}");
        }
    }

    #[test]
    fn overlaps() {
        let c0 = make_coherent(0.0, grid()).unwrap();
        let c1 = make_coherent(1.0, grid()).unwrap();
        let cm = make_coherent(-1.0, grid()).unwrap();
        let o = inner_product(&c0, &c1).unwrap();
        assert_relative_eq!(o.re, (-0.5f64).exp(), max_relative = 1e-12);
        assert!(o.im.abs() < 1e-15);
        let o2 = inner_product(&c0, &cm).unwrap();
        assert_relative_eq!(o.re, o2.re, max_relative = 1e-13);
        assert_relative_eq!(inner_product(&c1, &c1).unwrap().re, 1.0, epsilon = 1e-12);
        let other = make_coherent(0.0, QuadratureGrid::new(12.0, 2048).unwrap()).unwrap();
        assert_eq!(inner_product(&c0, &other), Err(Error::GridMismatch));
    }

    #[test]
    fn vacuum_half_line_moments() {
        let psi = make_coherent(0.0, grid()).unwrap();
        let wp = half_line_moment(&psi, Sector::Plus, 1).unwrap();
        let wm = half_line_moment(&psi, Sector::Minus, 1).unwrap();
        let oracle = (2.0 / PI).sqrt() / 4.0;
        assert_relative_eq!(wp, oracle, max_relative = 1e-5);
        assert_relative_eq!(wp, wm, max_relative = 1e-14);
    }

    #[test]
    fn far_coherent_half_line_moments() {
        let psi = make_coherent(10.0, QuadratureGrid::covering(10.0, 0.5)).unwrap();
        let wp = half_line_moment(&psi, Sector::Plus, 1).unwrap();
        let wm = half_line_moment(&psi, Sector::Minus, 1).unwrap();
        assert!((wp - 10.0).abs() < 1e-3);
        assert!(wm < 1e-12);
    }

    #[test]
    fn inverse_moment_divergence() {
        let vac = make_coherent(0.0, grid()).unwrap();
        assert!(matches!(
            half_line_moment(&vac, Sector::Plus, -1),
            Err(Error::DivergenceDetected { .. })
        ));
        let odd = make_gaussian_monomial(1, 0.0, 0.0, grid()).unwrap();
        // ∫_0^∞ y A² e^{-2y²} dy with A² = 4√(2/π)
        let oracle = 4.0 * (2.0 / PI).sqrt() / 4.0;
        let v = half_line_moment(&odd, Sector::Plus, -1).unwrap();
        assert_relative_eq!(v, oracle, max_relative = 1e-8);
    }

    #[test]
    fn interpolation_tracks_exact_values() {
        let psi = make_displaced_squeezed(0.4, 0.2, grid()).unwrap();
        let raw = StateVector::from_samples(*psi.grid(), psi.amplitudes().to_vec()).unwrap();
        for y in [-1.234, 0.0, 0.3337, 2.1] {
            assert!((raw.eval(y) - psi.eval(y)).norm() < 1e-8);
        }
        assert_eq!(raw.eval(100.0), C64::new(0.0, 0.0));
    }

    #[test]
    fn closed_form_derivative() {
        let p = GaussianStateParams { power: 2, linear_phase: 0.3, ..GaussianStateParams::displaced_squeezed(0.5, 0.1) }
            .prepare();
        for y in [-1.0, 0.2, 0.9] {
            let h = 1e-5;
            let fd = (p.eval(y + h) - p.eval(y - h)) / (2.0 * h);
            assert!((fd - p.derivative(y)).norm() < 1e-8);
        }
    }
}
