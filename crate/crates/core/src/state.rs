use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::basis::check_sites;
use crate::domain::prefix_index;
use crate::error::{Error, Result};

/// Tolerance on `‖ψ‖² = 1` for states handed to the library.
pub const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Basis {
    /// Full many-body space, dimension `2^N`.
    Spin { n_sites: usize },
    /// Domain-size space, dimension `N`, index `m - 1`.
    Domain { n: usize },
}

impl Basis {
    pub fn dim(&self) -> usize {
        match *self {
            Basis::Spin { n_sites } => 1usize << n_sites,
            Basis::Domain { n } => n,
        }
    }

    pub fn n_sites(&self) -> usize {
        match *self {
            Basis::Spin { n_sites } => n_sites,
            Basis::Domain { n } => n,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    basis: Basis,
    amps: Vec<C64>,
}

impl QuantumState {
    /// Wraps amplitudes, requiring unit norm within [`NORM_TOL`].
    pub fn new(basis: Basis, amps: Vec<C64>) -> Result<Self> {
        check_sites(basis.n_sites())?;
        if amps.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                got: amps.len(),
            });
        }
        let state = Self { basis, amps };
        let norm_sq = state.norm_sq();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::Normalization { norm_sq });
        }
        Ok(state)
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(basis: Basis, mut amps: Vec<C64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Normalization { norm_sq: norm * norm });
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::new(basis, amps)
    }

    pub fn basis_state(basis: Basis, index: usize) -> Result<Self> {
        check_sites(basis.n_sites())?;
        if index >= basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                got: index + 1,
            });
        }
        let mut amps = vec![C64::new(0.0, 0.0); basis.dim()];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { basis, amps })
    }

    /// The seed `|•∘...∘⟩` in the given basis (domain size 1).
    pub fn seed(basis: Basis) -> Result<Self> {
        Self::domain_fock(basis, 1)
    }

    /// Domain of size `m`: `|m⟩` in domain space, `|•..•∘..∘⟩` in spin space.
    pub fn domain_fock(basis: Basis, m: usize) -> Result<Self> {
        if m == 0 || m > basis.n_sites() {
            return Err(Error::Parameter(format!(
                "domain size {m} outside 1..={}",
                basis.n_sites()
            )));
        }
        match basis {
            Basis::Spin { .. } => Self::basis_state(basis, prefix_index(m)),
            Basis::Domain { .. } => Self::basis_state(basis, m - 1),
        }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }


    pub(crate) fn from_raw(basis: Basis, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), basis.dim());
        Self { basis, amps }
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn overlap(&self, other: &QuantumState) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn distance(&self, other: &QuantumState) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}
