//! Many-body basis of `N` two-level sites.
//!
//! A configuration is stored as a bit pattern where bit `j - 1` is set when
//! site `j` is excited. Site 1 is the least-significant bit, so the index of a
//! configuration in [`enumerate_basis`] equals its bit pattern.

use std::fmt;

use crate::error::{Error, Result};

/// Largest chain a [`SpinConfiguration`] can describe.
pub const MAX_SITES: usize = 30;

/// Largest chain for which full state-vector evolution is allowed by default
/// (2^14 amplitudes). Raise it with an explicit dimension override.
pub const DEFAULT_MAX_EVOLVE_SITES: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinConfiguration {
    bits: u32,
    n_sites: u8,
}

pub(crate) fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites == 0 || n_sites > MAX_SITES {
        return Err(Error::Capacity {
            what: "n_sites",
            value: n_sites,
            limit: MAX_SITES,
        });
    }
    Ok(())
}

impl SpinConfiguration {
    pub fn new(bits: u32, n_sites: usize) -> Result<Self> {
        check_sites(n_sites)?;
        if (bits as u64) >= (1u64 << n_sites) {
            return Err(Error::Parameter(format!(
                "bit pattern {bits:#b} does not fit in {n_sites} sites"
            )));
        }
        Ok(Self {
            bits,
            n_sites: n_sites as u8,
        })
    }

    /// Builds a configuration from per-site occupations, site 1 first.
    pub fn from_sites(excited: &[bool]) -> Result<Self> {
        let bits = excited
            .iter()
            .enumerate()
            .filter(|(_, &e)| e)
            .fold(0u32, |acc, (j, _)| acc | (1 << j));
        Self::new(bits, excited.len())
    }

    /// The prefix domain `|•...•∘...∘⟩` with `m` excited sites.
    pub fn prefix_domain(m: usize, n_sites: usize) -> Result<Self> {
        if m > n_sites {
            return Err(Error::Parameter(format!(
                "domain size {m} exceeds chain length {n_sites}"
            )));
        }
        Self::new(((1u64 << m) - 1) as u32, n_sites)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites as usize
    }

    pub fn index(&self) -> usize {
        self.bits as usize
    }

    /// Whether site `j` (1-based) is excited. Virtual sites `0` and `N + 1`
    /// are always in the ground state.
    pub fn is_excited(&self, j: usize) -> bool {
        j >= 1 && j <= self.n_sites() && (self.bits >> (j - 1)) & 1 == 1
    }

    pub fn flipped(&self, j: usize) -> Self {
        debug_assert!(j >= 1 && j <= self.n_sites());
        Self {
            bits: self.bits ^ (1 << (j - 1)),
            n_sites: self.n_sites,
        }
    }

    pub fn excitation_count(&self) -> usize {
        self.bits.count_ones() as usize
    }
}

impl fmt::Display for SpinConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 1..=self.n_sites() {
            f.write_str(if self.is_excited(j) { "•" } else { "∘" })?;
        }
        Ok(())
    }
}

/// All `2^N` configurations in increasing bit-pattern order.
pub fn enumerate_basis(n_sites: usize) -> Result<Vec<SpinConfiguration>> {
    check_sites(n_sites)?;
    let dim = 1u64 << n_sites;
    Ok((0..dim)
        .map(|bits| SpinConfiguration {
            bits: bits as u32,
            n_sites: n_sites as u8,
        })
        .collect())
}

/// Hilbert-space dimension of a spin chain, refusing chains above `max_sites`.
pub fn spin_dimension(n_sites: usize, max_sites: usize) -> Result<usize> {
    check_sites(n_sites)?;
    if n_sites > max_sites {
        return Err(Error::Capacity {
            what: "n_sites for state-vector evolution",
            value: n_sites,
            limit: max_sites,
        });
    }
    Ok(1usize << n_sites)
}
