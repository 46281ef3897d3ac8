//! Classical rate equations for the facilitated contact process.
//!
//! Each site carries an excitation probability `p_j` and obeys
//!
//! ```text
//! dp_j/dt = −(Γ_f + γ) p_j + Γ_f (1 − p_j),
//! Γ_f     = Γ_f⁰ [p_{j−1}(1 − p_{j+1}) + (1 − p_{j−1}) p_{j+1}],
//! ```
//!
//! with virtual neighbours at `p = 0`. Integration is fixed-step RK4.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Excursion outside `[0, 1]` that is clamped with a warning.
pub const CLAMP_TOL: f64 = 1e-9;
/// Excursion outside `[0, 1]` treated as an integrator failure.
pub const INSTABILITY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub p: Vec<f64>,
}

impl ClassicalState {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Parameter("classical state needs at least one site".into()));
        }
        if let Some((j, x)) = p.iter().enumerate().find(|(_, x)| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Parameter(format!("p[{}] = {x} is outside [0, 1]", j + 1)));
        }
        Ok(Self { p })
    }

    /// `p = (1, 0, ..., 0)`.
    pub fn seed(n_sites: usize) -> Result<Self> {
        let mut p = vec![0.0; n_sites];
        if let Some(first) = p.first_mut() {
            *first = 1.0;
        }
        Self::new(p)
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassicalTrajectory {
    pub times: Vec<f64>,
    pub p: Vec<Vec<f64>>,
    pub step: f64,
}

impl ClassicalTrajectory {
    pub fn totals(&self) -> Vec<f64> {
        self.p.iter().map(|p| p.iter().sum()).collect()
    }
}

fn rates(p: &[f64], gamma_f0: f64, gamma: f64, out: &mut [f64]) {
    let n = p.len();
    for j in 0..n {
        let left = if j > 0 { p[j - 1] } else { 0.0 };
        let right = if j + 1 < n { p[j + 1] } else { 0.0 };
        let gf = gamma_f0 * (left * (1.0 - right) + (1.0 - left) * right);
        out[j] = -(gf + gamma) * p[j] + gf * (1.0 - p[j]);
    }
}

fn rk4_step(p: &mut [f64], h: f64, gamma_f0: f64, gamma: f64, k: &mut [Vec<f64>; 4], tmp: &mut [f64]) {
    let n = p.len();
    rates(p, gamma_f0, gamma, &mut k[0]);
    for i in 0..n {
        tmp[i] = p[i] + 0.5 * h * k[0][i];
    }
    rates(tmp, gamma_f0, gamma, &mut k[1]);
    for i in 0..n {
        tmp[i] = p[i] + 0.5 * h * k[1][i];
    }
    rates(tmp, gamma_f0, gamma, &mut k[2]);
    for i in 0..n {
        tmp[i] = p[i] + h * k[2][i];
    }
    rates(tmp, gamma_f0, gamma, &mut k[3]);
    for i in 0..n {
        p[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
    }
}

/// Integrates the rate equations and samples `p` at every grid time.
pub fn classical_evolve(p0: &ClassicalState, gamma_f0: f64, gamma: f64, t_grid: &[f64]) -> Result<ClassicalTrajectory> {
    if !(gamma_f0 >= 0.0 && gamma >= 0.0 && gamma_f0.is_finite() && gamma.is_finite()) {
        return Err(Error::Parameter(format!(
            "rates must be finite and non-negative (gamma_f0 = {gamma_f0}, gamma = {gamma})"
        )));
    }
    if t_grid.is_empty() || t_grid[0] != 0.0 || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter("time grid must start at 0 and be strictly increasing".into()));
    }
    let rate = gamma_f0.max(gamma);
    let h_max = if rate > 0.0 { 0.01 / rate } else { f64::INFINITY };

    let n = p0.p.len();
    let mut p = p0.p.clone();
    let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut tmp = vec![0.0; n];
    let mut out = ClassicalTrajectory {
        times: vec![0.0],
        p: vec![p.clone()],
        step: 0.0,
    };

    for w in t_grid.windows(2) {
        let interval = w[1] - w[0];
        let steps = if h_max.is_finite() { (interval / h_max).ceil().max(1.0) as usize } else { 1 };
        let h = interval / steps as f64;
        out.step = out.step.max(h);
        if rate > 0.0 {
            for _ in 0..steps {
                rk4_step(&mut p, h, gamma_f0, gamma, &mut k, &mut tmp);
                for (j, x) in p.iter_mut().enumerate() {
                    if !x.is_finite() || *x < -INSTABILITY_TOL || *x > 1.0 + INSTABILITY_TOL {
                        return Err(Error::Numerical(format!("rate equations unstable: p[{}] = {x}", j + 1)));
                    }
                    if *x < -CLAMP_TOL || *x > 1.0 + CLAMP_TOL {
                        warn!("clamping p[{}] = {x:e} into [0, 1]", j + 1);
                    }
                    *x = x.clamp(0.0, 1.0);
                }
            }
        }
        out.times.push(w[1]);
        out.p.push(p.clone());
    }
    Ok(out)
}
