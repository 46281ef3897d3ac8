//! Many-body Hamiltonians of the QXP chain and of its Rydberg realization.
//!
//! Energies are in units of `λ₀` and `ħ = 1`. Sites are numbered `1..=N`; the
//! virtual sites `0` and `N + 1` are permanently in the ground state.

use num_complex::Complex64 as C64;

use crate::basis::{check_sites, SpinConfiguration};
use crate::error::{Error, Result};
use crate::pump::RydbergPump;
use crate::sparse::SparseOperator;

/// Site-dependent excitation rates and on-site energies of the QXP chain.
#[derive(Clone, Debug, PartialEq)]
pub struct QxpParameters {
    pub n_sites: usize,
    /// `lambda[j - 1] = λ_j`.
    pub lambda: Vec<f64>,
    /// `delta[j - 1] = δ_j`.
    pub delta: Vec<f64>,
}

impl QxpParameters {
    pub fn new(n_sites: usize, lambda: Vec<f64>, delta: Vec<f64>) -> Result<Self> {
        let p = Self { n_sites, lambda, delta };
        p.validate()?;
        Ok(p)
    }

    /// Seeded chain: the first atom is neither driven nor detuned, the
    /// remaining rates are `hop[j - 2] = λ_j` for `j = 2..N`.
    pub fn seeded(hop: &[f64], detuning: &[f64]) -> Result<Self> {
        let n = hop.len() + 1;
        if detuning.len() + 1 != n {
            return Err(Error::Parameter(format!(
                "seeded chain of {n} sites needs {} detunings, got {}",
                n - 1,
                detuning.len()
            )));
        }
        let lambda = std::iter::once(0.0).chain(hop.iter().copied()).collect();
        let delta = std::iter::once(0.0).chain(detuning.iter().copied()).collect();
        Self::new(n, lambda, delta)
    }

    pub fn validate(&self) -> Result<()> {
        check_sites(self.n_sites)?;
        if self.lambda.len() != self.n_sites || self.delta.len() != self.n_sites {
            return Err(Error::Parameter(format!(
                "expected {} rates and detunings, got {} and {}",
                self.n_sites,
                self.lambda.len(),
                self.delta.len()
            )));
        }
        if self.lambda.iter().chain(&self.delta).any(|x| !x.is_finite()) {
            return Err(Error::Parameter("QXP parameters must be finite".into()));
        }
        Ok(())
    }

    pub fn is_seed_boundary(&self) -> bool {
        self.lambda[0] == 0.0 && self.delta[0] == 0.0
    }

    pub fn require_seed_boundary(&self) -> Result<()> {
        self.validate()?;
        if !self.is_seed_boundary() {
            return Err(Error::Parameter(
                "seed-boundary mode requires lambda_1 = 0 and delta_1 = 0".into(),
            ));
        }
        Ok(())
    }
}

/// `H = Σ_j λ_j (Q_{j−1} X_j P_{j+1} + P_{j−1} X_j Q_{j+1}) + δ_j Q_j`.
///
/// A site flips only when exactly one of its neighbours is excited.
pub fn build_qxp_hamiltonian(params: &QxpParameters) -> Result<SparseOperator> {
    params.validate()?;
    let n = params.n_sites;
    Ok(SparseOperator::from_hermitian_rows(1 << n, |r, row| {
        let s = r as u32;
        let occupied = |j: usize| j >= 1 && j <= n && (s >> (j - 1)) & 1 == 1;
        let energy: f64 = (1..=n).filter(|&j| occupied(j)).map(|j| params.delta[j - 1]).sum();
        if energy != 0.0 {
            row.push((r, C64::new(energy, 0.0)));
        }
        for j in 1..=n {
            let rate = params.lambda[j - 1];
            if rate != 0.0 && occupied(j - 1) != occupied(j + 1) {
                row.push((r ^ (1 << (j - 1)), C64::new(rate, 0.0)));
            }
        }
    }))
}

/// Time dependence of the Rabi frequencies and detuning modulations.
#[derive(Clone, Debug, PartialEq)]
pub enum RydbergDrive {
    Static { lambda: Vec<f64>, delta: Vec<f64> },
    Pump(RydbergPump),
}

/// Rydberg chain `Σ_j λ_j σˣ_j + Δ_j n_j + V_NN n_j n_{j+1}` with
/// `Δ_j = Δ₀ + δ_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct RydbergParameters {
    pub n_sites: usize,
    pub delta_offset: f64,
    pub v_nn: f64,
    pub drive: RydbergDrive,
    /// Require `V_NN + Δ₀ = 0`.
    pub facilitation_mode: bool,
    /// Site 1 is the undriven seed: `λ_1 = 0`, `Δ_1 = 0`.
    pub seed_boundary: bool,
}

impl RydbergParameters {
    /// Facilitated, seeded chain with `V_NN = −Δ₀`.
    pub fn facilitated(n_sites: usize, delta_offset: f64, drive: RydbergDrive) -> Result<Self> {
        let p = Self {
            n_sites,
            delta_offset,
            v_nn: -delta_offset,
            drive,
            facilitation_mode: true,
            seed_boundary: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_sites(self.n_sites)?;
        if !self.delta_offset.is_finite() || !self.v_nn.is_finite() {
            return Err(Error::Parameter("delta_offset and v_nn must be finite".into()));
        }
        if self.facilitation_mode && (self.v_nn + self.delta_offset).abs() > 1e-12 * self.delta_offset.abs().max(1.0) {
            return Err(Error::Parameter(format!(
                "facilitation requires V_NN + Delta_0 = 0, got {} + {}",
                self.v_nn, self.delta_offset
            )));
        }
        if let RydbergDrive::Static { lambda, delta } = &self.drive {
            if lambda.len() != self.n_sites || delta.len() != self.n_sites {
                return Err(Error::Parameter(format!(
                    "expected {} Rabi frequencies and detunings, got {} and {}",
                    self.n_sites,
                    lambda.len(),
                    delta.len()
                )));
            }
            if lambda.iter().chain(delta).any(|x| !x.is_finite()) {
                return Err(Error::Parameter("Rydberg drive must be finite".into()));
            }
            if self.seed_boundary && (lambda[0] != 0.0 || delta[0] != 0.0) {
                return Err(Error::Parameter(
                    "seed-boundary mode requires lambda_1 = 0 and delta_1 = 0".into(),
                ));
            }
        }
        Ok(())
    }

    /// `λ_j(t)`.
    pub fn rabi(&self, j: usize, t: f64) -> f64 {
        if self.seed_boundary && j == 1 {
            return 0.0;
        }
        match &self.drive {
            RydbergDrive::Static { lambda, .. } => lambda[j - 1],
            RydbergDrive::Pump(p) => p.lambda(j, t),
        }
    }

    /// `δ_j(t)`.
    pub fn modulation(&self, j: usize, t: f64) -> f64 {
        match &self.drive {
            RydbergDrive::Static { delta, .. } => delta[j - 1],
            RydbergDrive::Pump(p) => p.delta(j, t),
        }
    }

    /// `Δ_j(t) = Δ₀ + δ_j(t)`, zero on the seed site.
    pub fn detuning(&self, j: usize, t: f64) -> f64 {
        if self.seed_boundary && j == 1 {
            0.0
        } else {
            self.delta_offset + self.modulation(j, t)
        }
    }

    /// Bound on the norm of the time-dependent part
    /// `Σ_j λ_j(t) σˣ_j + δ_j(t) n_j`.
    pub fn drive_norm(&self, t: f64) -> f64 {
        (1..=self.n_sites)
            .map(|j| {
                let delta = if self.seed_boundary && j == 1 { 0.0 } else { self.modulation(j, t) };
                self.rabi(j, t).abs() + delta.abs()
            })
            .sum()
    }
}

/// Many-body Rydberg Hamiltonian at time `t`, open boundary. No kinetic
/// constraint is imposed: any site may flip, facilitation emerges from the
/// energetics.
pub fn build_rydberg_hamiltonian(params: &RydbergParameters, t: f64) -> Result<SparseOperator> {
    params.validate()?;
    if !(t >= 0.0) {
        return Err(Error::Parameter(format!("time must be >= 0, got {t}")));
    }
    let n = params.n_sites;
    let rabi: Vec<f64> = (1..=n).map(|j| params.rabi(j, t)).collect();
    let detuning: Vec<f64> = (1..=n).map(|j| params.detuning(j, t)).collect();
    Ok(SparseOperator::from_hermitian_rows(1 << n, |r, row| {
        let s = r as u32;
        let mut energy = 0.0;
        for j in 0..n {
            if (s >> j) & 1 == 1 {
                energy += detuning[j];
                if j + 1 < n && (s >> (j + 1)) & 1 == 1 {
                    energy += params.v_nn;
                }
            }
        }
        if energy != 0.0 {
            row.push((r, C64::new(energy, 0.0)));
        }
        for (j, &rate) in rabi.iter().enumerate() {
            if rate != 0.0 {
                row.push((r ^ (1 << j), C64::new(rate, 0.0)));
            }
        }
    }))
}

/// Whether the flip of site `j` in `config` is allowed by the QXP constraint.
pub fn qxp_flip_allowed(config: &SpinConfiguration, j: usize) -> bool {
    config.is_excited(j - 1) != config.is_excited(j + 1)
}
