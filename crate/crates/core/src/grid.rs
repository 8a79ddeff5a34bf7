//! Discrete price and time-slot allocation sets.
//!
//! Allocations are carried as integer step counts `m` so that grid
//! membership is exact: `ξ = ξ_init − m·δ`, `β = max(β_init − m·ϵ, 0)`.

use serde::{Deserialize, Serialize};

use crate::params::ScenarioParams;

const SNAP: f64 = 1e-12;
const MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OfferGrid {
    pub xi_init: f64,
    pub delta: f64,
    pub beta_init: f64,
    pub epsilon: f64,
}

fn max_steps(init: f64, step: f64) -> u32 {
    ((init / step) + MATCH_TOL).floor() as u32
}

fn value(init: f64, step: f64, m: u32) -> f64 {
    let v = init - f64::from(m) * step;
    if v.abs() < SNAP || v < 0.0 {
        0.0
    } else {
        v
    }
}

impl OfferGrid {
    pub fn new(xi_init: f64, delta: f64, beta_init: f64, epsilon: f64) -> Self {
        Self {
            xi_init,
            delta,
            beta_init,
            epsilon,
        }
    }

    pub fn from_params(p: &ScenarioParams) -> Self {
        Self::new(p.xi_init, p.delta, p.beta_init, p.epsilon)
    }

    pub fn xi(&self, m: u32) -> f64 {
        value(self.xi_init, self.delta, m)
    }

    pub fn beta(&self, m: u32) -> f64 {
        value(self.beta_init, self.epsilon, m)
    }

    /// Largest `m` with `ξ_init − m·δ ≥ 0`.
    pub fn xi_max_step(&self) -> u32 {
        max_steps(self.xi_init, self.delta)
    }

    /// First `m` at which the floored time share reaches zero.
    pub fn beta_max_step(&self) -> u32 {
        ((self.beta_init / self.epsilon) - MATCH_TOL).ceil().max(0.0) as u32
    }

    /// Whether `ξ − δ` is still strictly positive at step `m`.
    pub fn xi_can_drop(&self, m: u32) -> bool {
        self.xi_init - f64::from(m + 1) * self.delta > SNAP
    }

    /// `(step, value)` pairs of the price set, largest first.
    pub fn xi_points(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        (0..=self.xi_max_step()).map(move |m| (m, self.xi(m)))
    }

    pub fn beta_points(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        (0..=self.beta_max_step()).map(move |m| (m, self.beta(m)))
    }

    pub fn size(&self) -> (usize, usize) {
        (self.xi_max_step() as usize + 1, self.beta_max_step() as usize + 1)
    }

    pub fn xi_step_of(&self, xi: f64) -> Option<u32> {
        step_of(self.xi_init, self.delta, self.xi_max_step(), xi)
    }

    pub fn beta_step_of(&self, beta: f64) -> Option<u32> {
        step_of(self.beta_init, self.epsilon, self.beta_max_step(), beta)
    }
}

fn step_of(init: f64, step: f64, max: u32, v: f64) -> Option<u32> {
    let m = ((init - v) / step).round();
    if m < 0.0 || m > f64::from(max) {
        return None;
    }
    let m = m as u32;
    ((value(init, step, m) - v).abs() <= MATCH_TOL).then_some(m)
}
