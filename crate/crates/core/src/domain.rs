//! Effective single-particle description of a seeded QXP chain.
//!
//! Starting from `|•∘∘...∘⟩` with an undriven seed atom, the constrained
//! dynamics only ever produces prefix domains `|•...•∘...∘⟩`. The domain size
//! `m = 1..N` becomes the position of a single particle hopping with
//! `λ_m` between `m − 1` and `m`, in the on-site potential
//! `η_m = Σ_{j ≤ m} δ_j`.

use log::warn;
use num_complex::Complex64 as C64;

use crate::basis::SpinConfiguration;
use crate::error::{Error, Result};
use crate::model::QxpParameters;
use crate::sparse::SparseOperator;
use crate::state::{Basis, QuantumState, NORM_TOL};

/// Size of the prefix domain, or `None` for the vacuum and for anything that
/// is not a contiguous block starting at site 1.
pub fn domain_index(config: &SpinConfiguration) -> Option<usize> {
    let bits = config.bits();
    // prefix domains are exactly the patterns 2^m - 1 with m >= 1
    if bits != 0 && bits & (bits + 1) == 0 {
        Some(bits.count_ones() as usize)
    } else {
        None
    }
}

/// Spin-space index of the prefix domain of size `m`.
pub fn prefix_index(m: usize) -> usize {
    (1usize << m) - 1
}

#[derive(Clone, Debug, PartialEq)]
pub struct DomainAmplitudes {
    /// `amps[m - 1] = ⟨m|ψ⟩`.
    pub amps: Vec<C64>,
    /// Population outside the prefix-domain sector.
    pub leakage: f64,
}

impl DomainAmplitudes {
    pub fn populations(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn sector_population(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Overlaps of a normalized spin-space state with every prefix domain.
pub fn project_to_domain(state: &QuantumState) -> Result<DomainAmplitudes> {
    let n = match state.basis() {
        Basis::Spin { n_sites } => n_sites,
        Basis::Domain { .. } => {
            return Err(Error::Parameter("project_to_domain expects a spin-space state".into()))
        }
    };
    let norm_sq = state.norm_sq();
    if (norm_sq - 1.0).abs() > NORM_TOL {
        return Err(Error::Normalization { norm_sq });
    }
    let amps: Vec<C64> = (1..=n).map(|m| state.amps()[prefix_index(m)]).collect();
    let inside: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    Ok(DomainAmplitudes {
        amps,
        leakage: (1.0 - inside).max(0.0),
    })
}

/// Places domain amplitudes on the corresponding prefix configurations.
pub fn embed_domain_state(domain: &QuantumState) -> Result<QuantumState> {
    let n = match domain.basis() {
        Basis::Domain { n } => n,
        Basis::Spin { .. } => return Err(Error::Parameter("embed_domain_state expects a domain-space state".into())),
    };
    let mut amps = vec![C64::new(0.0, 0.0); 1usize << n];
    for (m, a) in domain.amps().iter().enumerate() {
        amps[prefix_index(m + 1)] = *a;
    }
    QuantumState::new(Basis::Spin { n_sites: n }, amps)
}

/// Hopping `λ_m` for `m = 2..N` and on-site potential `η_m` for `m = 1..N`.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainParameters {
    /// `hop[i] = λ_{m = i + 2}`.
    pub hop: Vec<f64>,
    /// `onsite[i] = η_{m = i + 1}`.
    pub onsite: Vec<f64>,
}

impl DomainParameters {
    pub fn new(hop: Vec<f64>, onsite: Vec<f64>) -> Result<Self> {
        let p = Self { hop, onsite };
        p.validate()?;
        Ok(p)
    }

    /// Pure hopping chain with zero potential.
    pub fn hopping(hop: Vec<f64>) -> Self {
        let n = hop.len() + 1;
        Self {
            hop,
            onsite: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.onsite.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.onsite.is_empty() {
            return Err(Error::Parameter("domain chain needs at least one site".into()));
        }
        if self.hop.len() + 1 != self.onsite.len() {
            return Err(Error::Parameter(format!(
                "domain chain of {} sites needs {} hops, got {}",
                self.onsite.len(),
                self.onsite.len() - 1,
                self.hop.len()
            )));
        }
        if self.hop.iter().chain(&self.onsite).any(|x| !x.is_finite()) {
            return Err(Error::Parameter("domain parameters must be finite".into()));
        }
        Ok(())
    }

    /// The domain model equivalent to a seeded QXP chain:
    /// `λ_m = λ_{j=m}` and `η_m = Σ_{j ≤ m} δ_j`.
    pub fn from_qxp(params: &QxpParameters) -> Result<Self> {
        params.require_seed_boundary()?;
        let mut acc = 0.0;
        let onsite = params
            .delta
            .iter()
            .map(|d| {
                acc += d;
                acc
            })
            .collect();
        Self::new(params.lambda[1..].to_vec(), onsite)
    }
}

/// Tridiagonal `N × N` operator with `⟨m|H|m−1⟩ = λ_m` and `⟨m|H|m⟩ = η_m`.
pub fn build_domain_hamiltonian(params: &DomainParameters) -> Result<SparseOperator> {
    params.validate()?;
    let n = params.n();
    let mut triplets = Vec::with_capacity(3 * n);
    for (i, &eta) in params.onsite.iter().enumerate() {
        triplets.push((i, i, C64::new(eta, 0.0)));
    }
    for (i, &hop) in params.hop.iter().enumerate() {
        triplets.push((i + 1, i, C64::new(hop, 0.0)));
        triplets.push((i, i + 1, C64::new(hop, 0.0)));
    }
    SparseOperator::from_triplets(n, triplets)
}

/// Alternating hops for `m = 2..N`: `λ_v` on even `m`, `λ_w` on odd `m`.
pub fn ssh_couplings(n: usize, lambda_v: f64, lambda_w: f64) -> Vec<f64> {
    if n % 2 != 0 {
        warn!("SSH chain with odd length {n}: the edge-state pair assumes an even number of sites");
    }
    (2..=n)
        .map(|m| if m % 2 == 0 { lambda_v } else { lambda_w })
        .collect()
}

/// Detunings `δ_j(t) = η_j(t) − η_{j−1}(t)` for `j ≥ 2`, with `δ_1 = 0`.
///
/// The on-site potential is only defined up to a global shift, so `η` is
/// taken relative to `η_1`.
pub fn derive_detunings<F>(eta: F) -> impl Fn(usize, f64) -> f64
where
    F: Fn(usize, f64) -> f64,
{
    move |j, t| if j <= 1 { 0.0 } else { eta(j, t) - eta(j - 1, t) }
}

/// Partial sums `Σ_{j ≤ m} δ_j`, the inverse of [`derive_detunings`] up to the
/// offset `η_1`.
pub fn potential_from_detunings(delta: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    delta
        .iter()
        .map(|d| {
            acc += d;
            acc
        })
        .collect()
}
