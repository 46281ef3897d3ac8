//! Thouless-pump schedules for the domain model and their Rydberg-detuning
//! realization.
//!
//! A pump is described by a phase program: a list of segments with constant
//! angular frequency. The accumulated phase `φ(t)` is continuous and
//! piecewise linear, so holding (`ω = 0`) freezes every parameter and
//! reversing `ω` runs the pump backwards from wherever it stopped.
//!
//! The hopping and on-site generators have unit-cell size `q = 3`:
//!
//! ```text
//! λ_m(t) = λ₀ sin(φ(t) + 4π(m+1)/3)
//! η_m(t) = η₀ cos(φ(t) + 4π(m+1)/3)
//! ```
//!
//! and the matching Rydberg detuning modulation is
//! `δ_j(t) = η_j(t) − η_{j−1}(t) = −√3 η₀ sin(φ(t) + 4πj/3 + 2π/3)`.

use std::f64::consts::PI;

use log::warn;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::domain::DomainParameters;
use crate::error::{Error, Result};

/// Unit-cell size of the pump schedule.
pub const UNIT_CELL: usize = 3;

/// Default minimum hold after a segment change, in units of `1/λ₀`.
pub const DEFAULT_MIN_HOLD: f64 = 5.0;

/// Smallest `|η₀| / λ₀` for which the on-site modulation is considered strong
/// enough to keep the pumped particle on single sites.
pub const DISPERSION_SUPPRESSION_RATIO: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PumpSegment {
    pub duration: f64,
    pub omega: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PumpProgram {
    pub segments: Vec<PumpSegment>,
}

impl PumpProgram {
    pub fn new(segments: Vec<PumpSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Parameter("pump program has no segments".into()));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.duration > 0.0) || s.duration.is_nan() {
                return Err(Error::Parameter(format!(
                    "segment {i}: duration must be > 0, got {}",
                    s.duration
                )));
            }
            if !s.omega.is_finite() {
                return Err(Error::Parameter(format!("segment {i}: omega must be finite")));
            }
        }
        Ok(Self { segments })
    }

    /// A single segment with constant frequency that never ends.
    pub fn constant(omega: f64) -> Self {
        Self {
            segments: vec![PumpSegment {
                duration: f64::INFINITY,
                omega,
            }],
        }
    }

    /// Length of one pump cycle at frequency `omega`.
    pub fn cycle(omega: f64) -> f64 {
        2.0 * PI / omega.abs()
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Accumulated phase `φ(t) = ∫₀ᵗ ω(t′) dt′`, with `φ(0) = 0`. Past the
    /// last segment the final frequency continues.
    pub fn phase(&self, t: f64) -> f64 {
        let mut start = 0.0;
        let mut phase = 0.0;
        for (i, s) in self.segments.iter().enumerate() {
            let last = i + 1 == self.segments.len();
            if t <= start + s.duration || last {
                return phase + s.omega * (t - start);
            }
            phase += s.omega * s.duration;
            start += s.duration;
        }
        unreachable!("program has at least one segment")
    }

    pub fn omega_at(&self, t: f64) -> f64 {
        let mut start = 0.0;
        for s in &self.segments {
            if t < start + s.duration {
                return s.omega;
            }
            start += s.duration;
        }
        self.segments.last().map(|s| s.omega).unwrap_or(0.0)
    }

    pub fn max_abs_omega(&self) -> f64 {
        self.segments.iter().map(|s| s.omega.abs()).fold(0.0, f64::max)
    }

    /// Start and end times of every segment.
    pub fn boundaries(&self) -> Vec<(f64, f64)> {
        let mut start = 0.0;
        self.segments
            .iter()
            .map(|s| {
                let span = (start, start + s.duration);
                start += s.duration;
                span
            })
            .collect()
    }

    /// Time windows where the pump is held (`ω = 0`).
    pub fn holds(&self) -> Vec<(f64, f64)> {
        self.boundaries()
            .into_iter()
            .zip(&self.segments)
            .filter(|(_, s)| s.omega == 0.0)
            .map(|(span, _)| span)
            .collect()
    }

    /// Hold segments sandwiched between driven segments that are shorter
    /// than `min_hold`. Returns the offending segment indices.
    pub fn short_holds(&self, min_hold: f64) -> Vec<usize> {
        let n = self.segments.len();
        (1..n.saturating_sub(1))
            .filter(|&i| {
                let s = self.segments[i];
                s.omega == 0.0
                    && s.duration < min_hold
                    && self.segments[i - 1].omega != 0.0
                    && self.segments[i + 1].omega != 0.0
            })
            .collect()
    }

    /// Range of phases visited over `[0, t_end]`.
    pub fn phase_range(&self, t_end: f64) -> (f64, f64) {
        let mut lo = 0.0f64;
        let mut hi = 0.0f64;
        for (_, end) in self.boundaries() {
            let p = self.phase(end.min(t_end));
            lo = lo.min(p);
            hi = hi.max(p);
            if end >= t_end {
                break;
            }
        }
        (lo, hi)
    }
}

/// The period-3 hopping and on-site generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AahSchedule {
    pub lambda0: f64,
    pub eta0: f64,
    pub program: PumpProgram,
}

fn cell_angle(m: i64) -> f64 {
    // reducing (m + 1) mod 3 first makes the period-3 symmetry exact in
    // floating point
    4.0 * PI * ((m + 1).rem_euclid(UNIT_CELL as i64) as f64) / 3.0
}

/// Builds the schedule. Warns when `|η₀| < 5 λ₀`, below which the pumped
/// particle is no longer confined to single sites.
pub fn aah_schedule(lambda0: f64, eta0: f64, program: PumpProgram) -> AahSchedule {
    if eta0.abs() < DISPERSION_SUPPRESSION_RATIO * lambda0.abs() {
        warn!(
            "|eta0| = {} is below {} lambda0; dispersion is not suppressed",
            eta0.abs(),
            DISPERSION_SUPPRESSION_RATIO
        );
    }
    AahSchedule {
        lambda0,
        eta0,
        program,
    }
}

impl AahSchedule {
    pub fn phase(&self, t: f64) -> f64 {
        self.program.phase(t)
    }

    pub fn lambda_at_phase(&self, m: i64, phase: f64) -> f64 {
        self.lambda0 * (phase + cell_angle(m)).sin()
    }

    pub fn eta_at_phase(&self, m: i64, phase: f64) -> f64 {
        self.eta0 * (phase + cell_angle(m)).cos()
    }

    /// Hopping `λ_m(t)` between domain sites `m − 1` and `m`.
    pub fn lambda(&self, m: usize, t: f64) -> f64 {
        self.lambda_at_phase(m as i64, self.phase(t))
    }

    /// On-site potential `η_m(t)`.
    pub fn eta(&self, m: usize, t: f64) -> f64 {
        self.eta_at_phase(m as i64, self.phase(t))
    }

    /// Domain-model parameters of an `n`-site chain at time `t`.
    pub fn domain_parameters(&self, n: usize, t: f64) -> DomainParameters {
        let phase = self.phase(t);
        DomainParameters {
            hop: (2..=n).map(|m| self.lambda_at_phase(m as i64, phase)).collect(),
            onsite: (1..=n).map(|m| self.eta_at_phase(m as i64, phase)).collect(),
        }
    }

    /// Bloch Hamiltonian of the infinite chain with the three-site unit cell
    /// `m = 1, 2, 3`. The hop leaving the cell (site 3 to site 1 of the next
    /// cell) carries `e^{ik}`.
    pub fn bloch_hamiltonian(&self, k: f64, phase: f64) -> DMatrix<C64> {
        let q = UNIT_CELL;
        let mut h = DMatrix::zeros(q, q);
        for s in 0..q {
            h[(s, s)] = C64::new(self.eta_at_phase(s as i64 + 1, phase), 0.0);
        }
        for s in 1..q {
            let hop = self.lambda_at_phase(s as i64 + 1, phase);
            h[(s, s - 1)] += C64::new(hop, 0.0);
            h[(s - 1, s)] += C64::new(hop, 0.0);
        }
        let outer = self.lambda_at_phase(q as i64 + 1, phase);
        let bloch = C64::from_polar(outer, k);
        h[(q - 1, 0)] += bloch;
        h[(0, q - 1)] += bloch.conj();
        h
    }

    /// Sorted band energies at `(k, φ)`.
    pub fn bands(&self, k: f64, phase: f64) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(self.bloch_hamiltonian(k, phase))
            .eigenvalues
            .iter()
            .copied()
            .collect();
        e.sort_by(f64::total_cmp);
        e
    }

    /// Index of the band (0 = lowest) with the largest weight on unit-cell
    /// sublattice `s` at phase `phase`, averaged over `k`.
    pub fn band_on_sublattice(&self, s: usize, phase: f64) -> usize {
        let n_k = 32;
        let mut weight = vec![0.0; UNIT_CELL];
        for i in 0..n_k {
            let k = 2.0 * PI * i as f64 / n_k as f64;
            let eig = SymmetricEigen::new(self.bloch_hamiltonian(k, phase));
            let mut order: Vec<usize> = (0..UNIT_CELL).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            for (band, &col) in order.iter().enumerate() {
                weight[band] += eig.eigenvectors[(s, col)].norm_sqr();
            }
        }
        (0..UNIT_CELL)
            .max_by(|&a, &b| weight[a].total_cmp(&weight[b]))
            .unwrap()
    }
}

/// Detuning modulation of the Rydberg chain realizing an [`AahSchedule`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RydbergPump {
    pub schedule: AahSchedule,
    /// `√3 |η₀|`, the largest `|δ_j(t)|`.
    pub delta_max: f64,
    /// Smallest `|Δ₀|` considered safely inside the facilitation regime,
    /// `10 δ_max`.
    pub min_offset: f64,
}

/// Safety factor between the detuning offset and the modulation amplitude.
pub const OFFSET_SAFETY_FACTOR: f64 = 10.0;

pub fn rydberg_pump_detunings(schedule: &AahSchedule) -> RydbergPump {
    let delta_max = 3f64.sqrt() * schedule.eta0.abs();
    RydbergPump {
        schedule: schedule.clone(),
        delta_max,
        min_offset: OFFSET_SAFETY_FACTOR * delta_max,
    }
}

impl RydbergPump {
    /// `δ_j(t)`; the undriven seed site `j = 1` has `δ_1 = 0`.
    pub fn delta(&self, j: usize, t: f64) -> f64 {
        if j <= 1 {
            return 0.0;
        }
        let phase = self.schedule.phase(t);
        let cell = (j as i64).rem_euclid(UNIT_CELL as i64) as f64;
        -3f64.sqrt() * self.schedule.eta0 * (phase + 4.0 * PI * cell / 3.0 + 2.0 * PI / 3.0).sin()
    }

    /// Rabi frequency of atom `j`, equal to the domain hop `λ_{m=j}`; the seed
    /// atom is not driven.
    pub fn lambda(&self, j: usize, t: f64) -> f64 {
        if j <= 1 {
            0.0
        } else {
            self.schedule.lambda(j, t)
        }
    }

    /// Whether `|Δ₀|` meets the `10 δ_max` recommendation.
    pub fn offset_is_safe(&self, delta_offset: f64) -> bool {
        delta_offset.abs() >= self.min_offset
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticityReport {
    pub max_omega: f64,
    pub min_gap: f64,
    /// `k` and phase where the smallest gap was found.
    pub gap_k: f64,
    pub gap_phase: f64,
    /// `max |ω| / min gap`.
    pub ratio: f64,
    pub pass: bool,
}

/// Ratio threshold below which the pump counts as adiabatic.
pub const ADIABATIC_RATIO: f64 = 0.1;

/// Smallest band gap of the Bloch problem over the phases visited by the
/// program (a full cycle if it winds), compared with the fastest segment.
pub fn adiabaticity_check(schedule: &AahSchedule, n_k: usize, n_phase: usize) -> Result<AdiabaticityReport> {
    let max_omega = schedule.program.max_abs_omega();
    let total = schedule.program.total_duration();
    let (lo, hi) = if total.is_finite() {
        schedule.program.phase_range(total)
    } else {
        (0.0, 2.0 * PI)
    };
    let (lo, hi) = if hi - lo >= 2.0 * PI || hi == lo {
        (0.0, 2.0 * PI)
    } else {
        (lo, hi)
    };

    let n_k = n_k.max(8);
    let n_phase = n_phase.max(8);
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for ip in 0..=n_phase {
        let phase = lo + (hi - lo) * ip as f64 / n_phase as f64;
        for ik in 0..n_k {
            let k = -PI + 2.0 * PI * ik as f64 / n_k as f64;
            let e = schedule.bands(k, phase);
            for w in e.windows(2) {
                let gap = w[1] - w[0];
                if gap < best.0 {
                    best = (gap, k, phase);
                }
            }
        }
    }
    let (min_gap, gap_k, gap_phase) = best;
    if min_gap < 1e-8 {
        return Err(Error::GapClosed {
            k: gap_k,
            phase: gap_phase,
            gap: min_gap,
        });
    }
    let ratio = max_omega / min_gap;
    Ok(AdiabaticityReport {
        max_omega,
        min_gap,
        gap_k,
        gap_phase,
        ratio,
        pass: ratio < ADIABATIC_RATIO,
    })
}
