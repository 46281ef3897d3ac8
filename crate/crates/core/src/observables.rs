//! Observables recorded along a trajectory.

use serde::{Deserialize, Serialize};

use crate::domain::prefix_index;
use crate::state::{Basis, QuantumState};

/// Below this domain-sector population the center of mass is not reported.
pub const COM_MIN_POPULATION: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRow {
    /// `n_j = ⟨n̂_j⟩`, site 1 first.
    pub site_populations: Vec<f64>,
    /// `P_m = |⟨m|ψ⟩|²`, `m = 1` first.
    pub domain_populations: Vec<f64>,
    pub leakage: f64,
    /// `|⟨•∘...∘|ψ⟩|²`.
    pub fidelity_left: f64,
    /// `|⟨•...•|ψ⟩|²`.
    pub fidelity_right: f64,
    /// `Σ m P_m / Σ P_m`.
    pub center_of_mass: Option<f64>,
    pub norm: f64,
}

pub fn measure(state: &QuantumState) -> ObservableRow {
    let amps = state.amps();
    let norm_sq = state.norm_sq();
    let (sites, domain) = match state.basis() {
        Basis::Spin { n_sites } => {
            let mut sites = vec![0.0; n_sites];
            for (s, a) in amps.iter().enumerate() {
                let p = a.norm_sqr();
                if p == 0.0 {
                    continue;
                }
                for (j, n) in sites.iter_mut().enumerate() {
                    if (s >> j) & 1 == 1 {
                        *n += p;
                    }
                }
            }
            let domain: Vec<f64> = (1..=n_sites).map(|m| amps[prefix_index(m)].norm_sqr()).collect();
            (sites, domain)
        }
        Basis::Domain { n } => {
            let domain: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
            // site j is excited whenever the domain reaches it
            let mut sites = vec![0.0; n];
            let mut acc = 0.0;
            for m in (0..n).rev() {
                acc += domain[m];
                sites[m] = acc;
            }
            (sites, domain)
        }
    };
    let inside: f64 = domain.iter().sum();
    let weighted: f64 = domain.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum();
    ObservableRow {
        fidelity_left: domain.first().copied().unwrap_or(0.0),
        fidelity_right: domain.last().copied().unwrap_or(0.0),
        center_of_mass: (inside >= COM_MIN_POPULATION).then(|| weighted / inside),
        leakage: (norm_sq - inside).max(0.0),
        site_populations: sites,
        domain_populations: domain,
        norm: norm_sq.sqrt(),
    }
}

/// Observables on a time grid.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub site_populations: Vec<Vec<f64>>,
    pub domain_populations: Vec<Vec<f64>>,
    pub leakage: Vec<f64>,
    pub fidelity_left: Vec<f64>,
    pub fidelity_right: Vec<f64>,
    pub center_of_mass: Vec<Option<f64>>,
    pub norm: Vec<f64>,
    /// `⟨H⟩(t)`, static Hamiltonians only.
    pub energy: Option<Vec<f64>>,
}

impl TrajectoryRecord {
    pub fn push(&mut self, t: f64, row: ObservableRow, energy: Option<f64>) {
        self.times.push(t);
        self.site_populations.push(row.site_populations);
        self.domain_populations.push(row.domain_populations);
        self.leakage.push(row.leakage);
        self.fidelity_left.push(row.fidelity_left);
        self.fidelity_right.push(row.fidelity_right);
        self.center_of_mass.push(row.center_of_mass);
        self.norm.push(row.norm);
        if let Some(e) = energy {
            self.energy.get_or_insert_with(Vec::new).push(e);
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the grid point closest to `t`.
    pub fn index_at(&self, t: f64) -> usize {
        self.times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Total population in the prefix-domain sector at every sample.
    pub fn sector_population(&self) -> Vec<f64> {
        self.domain_populations.iter().map(|p| p.iter().sum()).collect()
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.norm.iter().map(|n| (n * n - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_energy_drift(&self) -> Option<f64> {
        self.energy.as_ref().map(|e| e.iter().map(|x| (x - e[0]).abs()).fold(0.0, f64::max))
    }

    /// Largest difference between matching population observables of two
    /// records on the same grid.
    pub fn max_population_difference(&self, other: &TrajectoryRecord) -> f64 {
        let rows = |a: &[Vec<f64>], b: &[Vec<f64>]| {
            a.iter()
                .zip(b)
                .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
                .fold(0.0, f64::max)
        };
        rows(&self.site_populations, &other.site_populations)
            .max(rows(&self.domain_populations, &other.domain_populations))
    }
}
