//! Edge-state and band-topology diagnostics.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::domain::{build_domain_hamiltonian, ssh_couplings, DomainParameters};
use crate::error::{Error, Result};
use crate::observables::TrajectoryRecord;
use crate::pump::{AahSchedule, UNIT_CELL};

/// Phase of an SSH chain as read off the localization length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SshPhase {
    Topological,
    Trivial,
    /// `|λ_v| = |λ_w|`, gap closed.
    Critical,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    /// Signed `ξ`; negative in the trivial phase, infinite at the transition.
    pub xi: f64,
    pub phase: SshPhase,
}

/// `ξ = 1/(ln|λ_w| − ln|λ_v|)`.
pub fn localization_length(lambda_v: f64, lambda_w: f64) -> Result<Localization> {
    if lambda_v == 0.0 || lambda_w == 0.0 || !lambda_v.is_finite() || !lambda_w.is_finite() {
        return Err(Error::Parameter(format!(
            "couplings must be finite and nonzero (lambda_v = {lambda_v}, lambda_w = {lambda_w})"
        )));
    }
    let d = lambda_w.abs().ln() - lambda_v.abs().ln();
    let phase = if d > 0.0 {
        SshPhase::Topological
    } else if d < 0.0 {
        SshPhase::Trivial
    } else {
        SshPhase::Critical
    };
    let xi = if d == 0.0 { f64::INFINITY } else { 1.0 / d };
    Ok(Localization { xi, phase })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeStateReport {
    pub xi: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    pub t_hyb: f64,
    pub n1: f64,
    /// False outside the topological phase, where the closed form does not
    /// describe edge states.
    pub valid: bool,
}

/// Closed-form edge-state splitting `E± = ±|n₁ e^{−(N−1)/ξ} λ_v|` and period
/// `T_hyb = 2π/(E₊ − E₋)`.
pub fn hybridization(n_sites: usize, lambda_v: f64, lambda_w: f64, n1: f64) -> Result<EdgeStateReport> {
    if n_sites < 2 {
        return Err(Error::Parameter(format!("need at least 2 sites, got {n_sites}")));
    }
    if !(n1 > 0.0 && n1 <= 1.0) {
        return Err(Error::Parameter(format!("n1 must lie in (0, 1], got {n1}")));
    }
    let loc = localization_length(lambda_v, lambda_w)?;
    let valid = loc.phase == SshPhase::Topological && n_sites % 2 == 0;
    let e = (n1 * (-((n_sites - 1) as f64) / loc.xi).exp() * lambda_v).abs();
    Ok(EdgeStateReport {
        xi: loc.xi,
        e_plus: e,
        e_minus: -e,
        t_hyb: 2.0 * PI / (2.0 * e),
        n1,
        valid,
    })
}

fn ssh_eigen(n_sites: usize, lambda_v: f64, lambda_w: f64) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    let h = build_domain_hamiltonian(&DomainParameters::hopping(ssh_couplings(n_sites, lambda_v, lambda_w)))?;
    Ok(SymmetricEigen::new(h.to_dense().map(|z| z.re)))
}

fn smallest_two(values: &DVector<f64>) -> (usize, usize) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].abs().total_cmp(&values[b].abs()));
    (order[0], order[1])
}

/// The two eigenvalues of smallest magnitude of the SSH domain matrix,
/// returned as `(E₊, E₋)`.
pub fn exact_splitting(n_sites: usize, lambda_v: f64, lambda_w: f64) -> Result<(f64, f64)> {
    if n_sites < 2 {
        return Err(Error::Parameter(format!("need at least 2 sites, got {n_sites}")));
    }
    let eig = ssh_eigen(n_sites, lambda_v, lambda_w)?;
    let (a, b) = smallest_two(&eig.eigenvalues);
    let (ea, eb) = (eig.eigenvalues[a], eig.eigenvalues[b]);
    Ok((ea.max(eb), ea.min(eb)))
}

/// `2π/(E₊ − E₋)` from [`exact_splitting`].
pub fn exact_period(n_sites: usize, lambda_v: f64, lambda_w: f64) -> Result<f64> {
    let (p, m) = exact_splitting(n_sites, lambda_v, lambda_w)?;
    Ok(2.0 * PI / (p - m))
}

/// Edge-site population `n₁` of the numerically exact edge modes: twice the
/// weight of the hybridized zero modes on site 1.
pub fn edge_site_population(n_sites: usize, lambda_v: f64, lambda_w: f64) -> Result<f64> {
    let eig = ssh_eigen(n_sites, lambda_v, lambda_w)?;
    let (a, b) = smallest_two(&eig.eigenvalues);
    let w = eig.eigenvectors[(0, a)].powi(2) + eig.eigenvectors[(0, b)].powi(2);
    Ok(w.min(1.0))
}

/// Winding of `h(k) = λ_v + λ_w e^{ik}` around the origin.
pub fn winding_number(lambda_v: f64, lambda_w: f64, k_samples: usize) -> Result<i64> {
    if lambda_v.abs() == lambda_w.abs() {
        return Err(Error::GapClosed {
            k: PI,
            phase: 0.0,
            gap: 0.0,
        });
    }
    if lambda_w == 0.0 && lambda_v == 0.0 {
        return Err(Error::Parameter("both couplings vanish".into()));
    }
    if k_samples < 64 {
        return Err(Error::Parameter(format!("winding number needs at least 64 k samples, got {k_samples}")));
    }
    let h = |k: f64| C64::new(lambda_v, 0.0) + C64::from_polar(lambda_w, k);
    let mut total = 0.0;
    for i in 0..k_samples {
        let k0 = 2.0 * PI * i as f64 / k_samples as f64;
        let k1 = 2.0 * PI * (i + 1) as f64 / k_samples as f64;
        total += (h(k1) / h(k0)).arg();
    }
    let w = total / (2.0 * PI);
    let rounded = w.round();
    if (w - rounded).abs() > 1e-6 {
        return Err(Error::Numerical(format!("winding {w} is not an integer")));
    }
    Ok(rounded as i64)
}

/// Sampling of the `(k, φ)` torus used by [`pump_chern_number`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChernGrid {
    pub n_k: usize,
    pub n_t: usize,
    pub k_offset: f64,
    pub t_offset: f64,
}

impl ChernGrid {
    pub fn new(n_k: usize, n_t: usize) -> Self {
        Self {
            n_k,
            n_t,
            k_offset: 0.0,
            t_offset: 0.0,
        }
    }
}

/// Smallest gap below which bands are considered degenerate on the grid.
pub const GAP_TOL: f64 = 1e-8;

struct BandFrames {
    /// `frames[ik][it]` holds the eigenvectors sorted by energy.
    frames: Vec<Vec<DMatrix<C64>>>,
}

fn band_frames(schedule: &AahSchedule, grid: &ChernGrid) -> Result<BandFrames> {
    let mut frames = Vec::with_capacity(grid.n_k);
    for ik in 0..grid.n_k {
        let k = grid.k_offset + 2.0 * PI * ik as f64 / grid.n_k as f64;
        let mut row = Vec::with_capacity(grid.n_t);
        for it in 0..grid.n_t {
            let phase = grid.t_offset + 2.0 * PI * it as f64 / grid.n_t as f64;
            let eig = SymmetricEigen::new(schedule.bloch_hamiltonian(k, phase));
            let mut order: Vec<usize> = (0..UNIT_CELL).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            for w in order.windows(2) {
                let gap = eig.eigenvalues[w[1]] - eig.eigenvalues[w[0]];
                if gap < GAP_TOL {
                    return Err(Error::GapClosed { k, phase, gap });
                }
            }
            row.push(DMatrix::from_columns(&order.iter().map(|&c| eig.eigenvectors.column(c)).collect::<Vec<_>>()));
        }
        frames.push(row);
    }
    Ok(BandFrames { frames })
}

fn link(a: &DMatrix<C64>, b: &DMatrix<C64>, band: usize) -> C64 {
    let z = a.column(band).dotc(&b.column(band));
    z / z.norm()
}

fn plaquette_sum(frames: &BandFrames, band: usize, n_k: usize, n_t: usize) -> f64 {
    let f = &frames.frames;
    let mut total = 0.0;
    for ik in 0..n_k {
        let ik1 = (ik + 1) % n_k;
        for it in 0..n_t {
            let it1 = (it + 1) % n_t;
            let u1 = link(&f[ik][it], &f[ik1][it], band);
            let u2 = link(&f[ik1][it], &f[ik1][it1], band);
            let u3 = link(&f[ik][it1], &f[ik1][it1], band);
            let u4 = link(&f[ik][it], &f[ik][it1], band);
            total += (u1 * u2 / (u3 * u4)).arg();
        }
    }
    total / (2.0 * PI)
}

/// Chern number of `band` (0 = lowest) over the torus spanned by quasi-
/// momentum and the pump phase `φ ∈ [0, 2π)`, from the lattice field
/// strength of Fukui, Hatsugai and Suzuki. With `ω > 0` a particle in a band
/// of Chern number `C` moves by `3C` sites per cycle; `ω < 0` reverses it.
pub fn pump_chern_number(schedule: &AahSchedule, band: usize, grid: &ChernGrid) -> Result<i64> {
    if band >= UNIT_CELL {
        return Err(Error::Parameter(format!("band {band} out of range 0..{UNIT_CELL}")));
    }
    if grid.n_k < 24 || grid.n_t < 24 {
        return Err(Error::Parameter(format!(
            "Chern grid must be at least 24 x 24, got {} x {}",
            grid.n_k, grid.n_t
        )));
    }
    let mut frames = band_frames(schedule, grid)?;
    let c = plaquette_sum(&frames, band, grid.n_k, grid.n_t);
    let rounded = c.round();
    if (c - rounded).abs() > 1e-6 {
        return Err(Error::Numerical(format!("Chern number {c} is not an integer")));
    }

    // the result must not depend on the eigenvector phases
    for (ik, row) in frames.frames.iter_mut().enumerate() {
        for (it, m) in row.iter_mut().enumerate() {
            let theta = ((ik * 7919 + it * 104729) % 997) as f64;
            let mut col = m.column_mut(band);
            col *= C64::from_polar(1.0, theta);
        }
    }
    let scrambled = plaquette_sum(&frames, band, grid.n_k, grid.n_t);
    if (scrambled - c).abs() > 1e-6 {
        return Err(Error::Numerical(format!("Chern number is gauge dependent: {c} vs {scrambled}")));
    }
    Ok(rounded as i64)
}

/// Chern numbers of all three bands, lowest first.
pub fn all_chern_numbers(schedule: &AahSchedule, grid: &ChernGrid) -> Result<Vec<i64>> {
    (0..UNIT_CELL).map(|b| pump_chern_number(schedule, b, grid)).collect()
}

/// Smallest domain-sector population accepted inside a displacement window.
pub const COM_WINDOW_MIN_POPULATION: f64 = 0.99;

/// `x̄(t_end) − x̄(t_start)`, using the samples closest to the window ends.
pub fn com_displacement(record: &TrajectoryRecord, t_start: f64, t_end: f64) -> Result<f64> {
    if record.is_empty() {
        return Err(Error::InvalidWindow("empty trajectory".into()));
    }
    if !(t_end >= t_start) {
        return Err(Error::InvalidWindow(format!("window [{t_start}, {t_end}] is reversed")));
    }
    let (i0, i1) = (record.index_at(t_start), record.index_at(t_end));
    let sector = record.sector_population();
    if let Some(i) = (i0..=i1).find(|&i| sector[i] < COM_WINDOW_MIN_POPULATION) {
        return Err(Error::InvalidWindow(format!(
            "domain population {:.4} < {COM_WINDOW_MIN_POPULATION} at t = {}",
            sector[i], record.times[i]
        )));
    }
    match (record.center_of_mass[i0], record.center_of_mass[i1]) {
        (Some(a), Some(b)) => Ok(b - a),
        _ => Err(Error::InvalidWindow("center of mass undefined at window edge".into())),
    }
}

/// Mean peak-to-peak spacing of a sampled signal. Each excursion above half
/// the global maximum (entered from below a quarter of it) counts as one
/// peak, located at its largest sample.
pub fn oscillation_period(times: &[f64], values: &[f64]) -> Option<f64> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return None;
    }
    let (hi, lo) = (0.5 * max, 0.25 * max);
    let mut peaks = Vec::new();
    let mut armed = values.first().is_some_and(|&v| v < lo);
    let mut current: Option<(f64, f64)> = None;
    for (&t, &v) in times.iter().zip(values) {
        if let Some((_, best)) = current {
            if v > best {
                current = Some((t, v));
            }
            if v < lo {
                peaks.push(current.take().unwrap().0);
                armed = true;
            }
        } else if v < lo {
            armed = true;
        } else if armed && v > hi {
            current = Some((t, v));
            armed = false;
        }
    }
    if peaks.len() < 2 {
        return None;
    }
    Some((peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pump::{aah_schedule, PumpProgram};

    #[test]
    fn localization_examples() {
        let l = localization_length(1.0, 10.0).unwrap();
        assert!((l.xi - 1.0 / 10f64.ln()).abs() < 1e-15);
        assert_eq!(l.phase, SshPhase::Topological);
        assert!((localization_length(1.0, std::f64::consts::E).unwrap().xi - 1.0).abs() < 1e-15);
        let t = localization_length(1.0, 0.1).unwrap();
        assert!((t.xi + 1.0 / 10f64.ln()).abs() < 1e-15);
        assert_eq!(t.phase, SshPhase::Trivial);
        let c = localization_length(2.0, 2.0).unwrap();
        assert!(c.xi.is_infinite());
        assert_eq!(c.phase, SshPhase::Critical);
    }

    #[test]
    fn closed_form_splitting() {
        let r = hybridization(4, 1.0, 10.0, 1.0).unwrap();
        assert!((r.e_plus - 1e-3).abs() < 1e-15);
        assert_eq!(r.e_plus, -r.e_minus);
        assert!((r.t_hyb - PI * 1e3).abs() < 1e-9);
        assert!(r.valid);
        let r6 = hybridization(6, 1.0, 10.0, 1.0).unwrap();
        assert!((r6.t_hyb / r.t_hyb - 100.0).abs() < 1e-9);
        assert!(!hybridization(4, 1.0, 0.1, 1.0).unwrap().valid);
        assert!(!hybridization(4, 1.0, 1.0, 1.0).unwrap().valid);
    }

    #[test]
    fn exact_splitting_is_chiral() {
        // 4x4 chain with hops (1, 10, 1): E = ±(√104 − 10)/2
        let (p, m) = exact_splitting(4, 1.0, 10.0).unwrap();
        let want = (104f64.sqrt() - 10.0) / 2.0;
        assert!((p - want).abs() < 1e-12);
        assert!((p + m).abs() < 1e-12);
        let n1 = edge_site_population(4, 1.0, 10.0).unwrap();
        assert!(n1 > 0.98 && n1 <= 1.0);
    }

    #[test]
    fn winding_examples() {
        assert_eq!(winding_number(1.0, 10.0, 64).unwrap(), 1);
        assert_eq!(winding_number(1.0, 0.1, 64).unwrap(), 0);
        assert_eq!(winding_number(0.0, 1.0, 64).unwrap(), 1);
        assert!(winding_number(1.0, 1.0, 64).is_err());
        assert!(winding_number(1.0, 2.0, 10).is_err());
    }

    #[test]
    fn chern_numbers_sum_to_zero_and_are_stable() {
        let s = aah_schedule(1.0, -10.0, PumpProgram::constant(0.02));
        let c24 = all_chern_numbers(&s, &ChernGrid::new(24, 24)).unwrap();
        assert_eq!(c24.iter().sum::<i64>(), 0);
        assert!(c24.iter().all(|c| *c != 0));
        let c48 = all_chern_numbers(&s, &ChernGrid::new(48, 48)).unwrap();
        assert_eq!(c24, c48);
        let shifted = ChernGrid {
            k_offset: 0.3,
            t_offset: -1.1,
            ..ChernGrid::new(30, 27)
        };
        assert_eq!(all_chern_numbers(&s, &shifted).unwrap(), c24);
    }

    #[test]
    fn period_of_a_cosine() {
        let times: Vec<f64> = (0..2000).map(|i| i as f64 * 0.01).collect();
        let values: Vec<f64> = times.iter().map(|t| (PI * t / 2.5).sin().powi(2)).collect();
        let p = oscillation_period(&times, &values).unwrap();
        assert!((p - 2.5).abs() < 0.02);
    }
}
