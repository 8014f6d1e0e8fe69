//! The affine group of maps `t -> e^r t + x`, its Haar weights and its
//! unitary action `U_{x,r} = D(x) S(r)` on Y-representation wavefunctions:
//!
//! `(U_{x,r} ψ)(y) = e^{r/2} e^{-2ixy} ψ(e^r y)`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{QuadratureGrid, StateVector, MAX_NODES};

/// Largest dilation applied to a sampled state in one interpolation step.
const MAX_SAMPLED_STEP: f64 = 3.0;

/// A point `(x, r)` of the affine group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupElement {
    pub x: f64,
    pub r: f64,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement { x: 0.0, r: 0.0 };

    pub fn new(x: f64, r: f64) -> Self {
        Self { x, r }
    }

    pub fn translation(x: f64) -> Self {
        Self { x, r: 0.0 }
    }

    pub fn dilation(r: f64) -> Self {
        Self { x: 0.0, r }
    }

    /// `self ∘ other`, matching `U_self U_other = U_{self∘other}`.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        compose(self, other)
    }

    pub fn inverse(&self) -> GroupElement {
        inverse(self)
    }

    /// Image of `t` under the affine map `t -> e^r t + x`.
    pub fn apply(&self, t: f64) -> f64 {
        self.r.exp() * t + self.x
    }
}

pub fn compose(g1: &GroupElement, g2: &GroupElement) -> GroupElement {
    GroupElement { x: g1.x + g1.r.exp() * g2.x, r: g1.r + g2.r }
}

pub fn inverse(g: &GroupElement) -> GroupElement {
    GroupElement { x: -(-g.r).exp() * g.x, r: -g.r }
}

/// Density of the left-invariant measure `d_L g = e^{-r} dr dx`.
pub fn left_haar_weight(g: &GroupElement) -> f64 {
    (-g.r).exp()
}

/// Density of the right-invariant measure `d_R g = dr dx`.
pub fn right_haar_weight(_g: &GroupElement) -> f64 {
    1.0
}

/// Element `P^ε U_{x,r}` of the group extended by the parity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtendedElement {
    pub parity: bool,
    pub g: GroupElement,
}

/// `U_g ψ`.
///
/// Gaussian-family states are transformed in closed form and keep their
/// grid whenever it still covers the result; otherwise a default grid for
/// the new parameters is used. Sampled states are interpolated onto a grid
/// widened (or refined) by `e^{|r|}`.
pub fn act(g: &GroupElement, psi: &StateVector) -> Result<StateVector> {
    if !(g.x.is_finite() && g.r.is_finite()) {
        return Err(Error::InvalidArgument("non-finite group element".into()));
    }
    if let Some(params) = psi.evaluator() {
        let moved = params.acted(g.x, g.r);
        return match StateVector::from_params(moved, *psi.grid()) {
            Ok(s) => Ok(s),
            Err(Error::GridTooNarrow { .. } | Error::GridTooCoarse { .. }) => {
                StateVector::from_params_default_grid(moved)
            }
            Err(e) => Err(e),
        };
    }
    // sampled: split large dilations so each interpolation step stays moderate
    let steps = (g.r.abs() / MAX_SAMPLED_STEP).ceil().max(1.0) as usize;
    let dr = g.r / steps as f64;
    let mut state = psi.clone();
    for i in 0..steps {
        let x = if i + 1 == steps { g.x } else { 0.0 };
        state = act_sampled(x, dr, &state)?;
    }
    Ok(state)
}

fn act_sampled(x: f64, r: f64, psi: &StateVector) -> Result<StateVector> {
    let grid = psi.grid();
    let scale = r.abs().exp();
    let y_max = if r < 0.0 { grid.y_max() * scale } else { grid.y_max() };
    let spacing = if r > 0.0 { grid.spacing() / scale } else { grid.spacing() };
    let mut n = (2.0 * y_max / spacing).ceil() as usize;
    n += n % 2;
    if n > MAX_NODES {
        let required = y_max;
        return Err(Error::GridTooNarrow { required, y_max: grid.y_max() });
    }
    let out = QuadratureGrid::new(y_max, n)?;
    let sampler = psi.sampler();
    let pre = (0.5 * r).exp();
    let dil = r.exp();
    let amps = (0..out.len())
        .map(|k| {
            let y = out.node(k);
            sampler.eval(dil * y) * C64::from_polar(pre, -2.0 * x * y)
        })
        .collect();
    StateVector::from_samples(out, amps)
}

/// `P ψ`, i.e. `ψ(y) -> ψ(-y)`.
pub fn parity_act(psi: &StateVector) -> StateVector {
    if let Some(params) = psi.evaluator() {
        if let Ok(s) = StateVector::from_params(params.reflected(), *psi.grid()) {
            return s;
        }
    }
    // node set is symmetric, so reflection is an index reversal
    let mut amps = psi.amplitudes().to_vec();
    amps.reverse();
    StateVector::from_samples(*psi.grid(), amps).expect("reversal preserves length")
}

/// `P^ε U_g ψ`.
pub fn act_extended(e: &ExtendedElement, psi: &StateVector) -> Result<StateVector> {
    let moved = act(&e.g, psi)?;
    Ok(if e.parity { parity_act(&moved) } else { moved })
}
