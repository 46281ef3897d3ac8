//! Time propagation of quantum states under static and driven Hamiltonians.
//!
//! Static Hamiltonians are propagated from one output time to the next with
//! a single Krylov exponential. Driven Hamiltonians are split into steps of
//! length `Δt ≤ min(0.1/‖H‖, 2π/(50ω))`; each step applies either the
//! midpoint propagator `exp(−iH(t + Δt/2)Δt)` or a fourth-order
//! commutator-free Magnus step. Every output interval is integrated twice,
//! with `n` and `2n` steps, and refined until the two agree within the
//! interval's share of the error budget.
//!
//! Output times are exactly the requested grid; nothing is interpolated.

use std::borrow::Cow;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::domain::{build_domain_hamiltonian, DomainParameters};
use crate::error::{Error, Result};
use crate::krylov::{expm_multiply, KrylovOptions, KrylovStats, DEFAULT_MAX_KRYLOV_DIM};
use crate::model::{build_rydberg_hamiltonian, RydbergDrive, RydbergParameters};
use crate::observables::{measure, TrajectoryRecord};
use crate::pump::AahSchedule;
use crate::sparse::SparseOperator;
use crate::state::{QuantumState, NORM_TOL};

/// Source of `H(t)`.
pub trait HamiltonianGenerator: Sync {
    fn dim(&self) -> usize;

    fn hamiltonian(&self, t: f64) -> Result<Cow<'_, SparseOperator>>;

    fn is_static(&self) -> bool;

    /// Angular frequency of the parameter modulation, if any.
    fn modulation_frequency(&self) -> Option<f64> {
        None
    }

    /// Energy scale that bounds the step length, `‖H(t)‖` unless a generator
    /// knows which part of `H` actually varies.
    fn step_norm(&self, t: f64) -> Result<f64> {
        Ok(self.hamiltonian(t)?.norm_inf())
    }
}

pub struct StaticGenerator(pub SparseOperator);

impl HamiltonianGenerator for StaticGenerator {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn hamiltonian(&self, _t: f64) -> Result<Cow<'_, SparseOperator>> {
        Ok(Cow::Borrowed(&self.0))
    }

    fn is_static(&self) -> bool {
        true
    }
}

/// Domain model driven by a pump schedule.
pub struct DomainPumpGenerator {
    pub schedule: AahSchedule,
    pub n: usize,
}

impl DomainPumpGenerator {
    pub fn parameters(&self, t: f64) -> DomainParameters {
        self.schedule.domain_parameters(self.n, t)
    }
}

impl HamiltonianGenerator for DomainPumpGenerator {
    fn dim(&self) -> usize {
        self.n
    }

    fn hamiltonian(&self, t: f64) -> Result<Cow<'_, SparseOperator>> {
        Ok(Cow::Owned(build_domain_hamiltonian(&self.parameters(t))?))
    }

    fn is_static(&self) -> bool {
        false
    }

    fn modulation_frequency(&self) -> Option<f64> {
        let w = self.schedule.program.max_abs_omega();
        (w > 0.0).then_some(w)
    }
}

/// Rydberg chain. For a pump drive the step bound uses the norm of the
/// modulated terms `Σ λ_j σˣ_j + δ_j n_j`; the static facilitation part
/// `Δ₀ n_j + V_NN n_j n_{j+1}` is handled exactly inside each exponential.
pub struct RydbergGenerator {
    pub params: RydbergParameters,
    static_op: Option<SparseOperator>,
    /// Every single-site flip plus the diagonal, refilled at each time.
    pattern: Option<SparseOperator>,
    /// Site flipped by each stored entry, `None` on the diagonal.
    entry_sites: Vec<Option<usize>>,
    /// `Δ₀ n_j + V_NN n_j n_{j+1}` summed per basis state.
    static_diagonal: Vec<f64>,
}

impl RydbergGenerator {
    pub fn new(params: RydbergParameters) -> Result<Self> {
        params.validate()?;
        let n = params.n_sites;
        let dim = 1usize << n;
        let (static_op, pattern, static_diagonal) = match params.drive {
            RydbergDrive::Static { .. } => (Some(build_rydberg_hamiltonian(&params, 0.0)?), None, Vec::new()),
            RydbergDrive::Pump(_) => {
                let one = C64::new(1.0, 0.0);
                let pattern = SparseOperator::from_hermitian_rows(dim, |r, row| {
                    row.push((r, one));
                    row.extend((0..n).map(|j| (r ^ (1 << j), one)));
                });
                let first = if params.seed_boundary { 1 } else { 0 };
                let diag = (0..dim)
                    .map(|s| {
                        (first..n)
                            .filter(|j| (s >> j) & 1 == 1)
                            .map(|_| params.delta_offset)
                            .sum::<f64>()
                            + (0..n.saturating_sub(1))
                                .filter(|j| (s >> j) & 3 == 3)
                                .map(|_| params.v_nn)
                                .sum::<f64>()
                    })
                    .collect();
                (None, Some(pattern), diag)
            }
        };
        let entry_sites = pattern
            .iter()
            .flat_map(|p| p.entries())
            .map(|(r, c, _)| (r != c).then(|| (r ^ c).trailing_zeros() as usize))
            .collect();
        Ok(Self {
            params,
            static_op,
            pattern,
            entry_sites,
            static_diagonal,
        })
    }

    fn driven_hamiltonian(&self, pattern: &SparseOperator, t: f64) -> SparseOperator {
        let n = self.params.n_sites;
        let rabi: Vec<f64> = (1..=n).map(|j| self.params.rabi(j, t)).collect();
        let first = if self.params.seed_boundary { 1 } else { 0 };
        let modulation: Vec<f64> = (0..n)
            .map(|j| if j < first { 0.0 } else { self.params.modulation(j + 1, t) })
            .collect();
        // Σ_j modulation_j n_j, extended from the state without its lowest excitation
        let mut dynamic = vec![0.0; pattern.dim()];
        for s in 1..dynamic.len() {
            dynamic[s] = dynamic[s & (s - 1)] + modulation[s.trailing_zeros() as usize];
        }
        let mut row = 0;
        let mut values = Vec::with_capacity(self.entry_sites.len());
        for site in &self.entry_sites {
            values.push(match site {
                Some(j) => C64::new(rabi[*j], 0.0),
                None => {
                    let v = C64::new(self.static_diagonal[row] + dynamic[row], 0.0);
                    row += 1;
                    v
                }
            });
        }
        pattern.with_values(values, true)
    }
}

impl HamiltonianGenerator for RydbergGenerator {
    fn dim(&self) -> usize {
        1 << self.params.n_sites
    }

    fn hamiltonian(&self, t: f64) -> Result<Cow<'_, SparseOperator>> {
        if !(t >= 0.0) {
            return Err(Error::Parameter(format!("time must be >= 0, got {t}")));
        }
        match (&self.static_op, &self.pattern) {
            (Some(op), _) => Ok(Cow::Borrowed(op)),
            (None, Some(pattern)) => Ok(Cow::Owned(self.driven_hamiltonian(pattern, t))),
            (None, None) => Ok(Cow::Owned(build_rydberg_hamiltonian(&self.params, t)?)),
        }
    }

    fn is_static(&self) -> bool {
        self.static_op.is_some()
    }

    fn modulation_frequency(&self) -> Option<f64> {
        match &self.params.drive {
            RydbergDrive::Pump(p) => {
                let w = p.schedule.program.max_abs_omega();
                (w > 0.0).then_some(w)
            }
            RydbergDrive::Static { .. } => None,
        }
    }

    fn step_norm(&self, t: f64) -> Result<f64> {
        Ok(self.params.drive_norm(t))
    }
}

/// Arbitrary `t ↦ H(t)` closure.
pub struct FnGenerator<F> {
    pub dim: usize,
    pub frequency: Option<f64>,
    pub f: F,
}

impl<F> HamiltonianGenerator for FnGenerator<F>
where
    F: Fn(f64) -> Result<SparseOperator> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn hamiltonian(&self, t: f64) -> Result<Cow<'_, SparseOperator>> {
        Ok(Cow::Owned((self.f)(t)?))
    }

    fn is_static(&self) -> bool {
        false
    }

    fn modulation_frequency(&self) -> Option<f64> {
        self.frequency
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// `exp(−iH(t + Δt/2)Δt)`, second order.
    Midpoint,
    /// Two exponentials at the Gauss points, fourth order.
    Magnus4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Target accuracy; step-halving keeps observable errors below `10 tol`.
    pub tol: f64,
    pub max_krylov_dim: usize,
    pub integrator: Integrator,
    /// Upper bound on `‖H‖ Δt`.
    pub norm_step: f64,
    /// Minimum number of steps per modulation period.
    pub steps_per_period: f64,
    /// Optional hard cap on `Δt`.
    pub max_step: Option<f64>,
    /// Multiplies every step bound; `0.5` reruns with halved steps.
    pub step_scale: f64,
    pub check_halving: bool,
    pub keep_states: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_krylov_dim: DEFAULT_MAX_KRYLOV_DIM,
            integrator: Integrator::Midpoint,
            norm_step: 0.1,
            steps_per_period: 50.0,
            max_step: None,
            step_scale: 1.0,
            check_halving: true,
            keep_states: false,
        }
    }
}

impl EvolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvolveStats {
    pub steps: usize,
    pub matvecs: usize,
    pub krylov_substeps: usize,
    pub largest_krylov_dim: usize,
    /// Number of times an interval had to be re-integrated with more steps.
    pub refinements: usize,
    /// Largest state difference between the `n`- and `2n`-step solutions.
    pub max_halving_difference: f64,
    /// Sum of the accepted per-interval differences. Propagation is unitary,
    /// so this bounds the state difference of the whole trajectory and twice
    /// it bounds any population difference.
    pub halving_difference_sum: f64,
    pub smallest_step: f64,
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub record: TrajectoryRecord,
    pub final_state: QuantumState,
    /// States at every grid time, when requested.
    pub states: Vec<QuantumState>,
    pub stats: EvolveStats,
}

const MAX_REFINEMENTS: usize = 14;

fn validate_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() || t_grid[0] != 0.0 {
        return Err(Error::Parameter("time grid must start at 0".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Parameter("time grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Evenly spaced grid `0, t_max/(n−1), ..., t_max` with `n ≥ 2` points.
pub fn uniform_grid(t_max: f64, n_samples: usize) -> Vec<f64> {
    let n = n_samples.max(2);
    (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
}

fn distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

struct Stepper<'a, G: ?Sized> {
    generator: &'a G,
    opts: &'a EvolveOptions,
    /// Krylov error allowed per unit time.
    krylov_rate: f64,
}

impl<G: HamiltonianGenerator + ?Sized> Stepper<'_, G> {
    fn krylov(&self, tau: f64) -> KrylovOptions {
        KrylovOptions {
            tol: (self.krylov_rate * tau.abs()).max(1e-14),
            max_dim: self.opts.max_krylov_dim,
        }
    }

    fn propagate(&self, psi: &[C64], t0: f64, t1: f64, n: usize, stats: &mut KrylovStats) -> Result<Vec<C64>> {
        let dt = (t1 - t0) / n as f64;
        let mut v = psi.to_vec();
        for k in 0..n {
            let t = t0 + k as f64 * dt;
            match self.opts.integrator {
                Integrator::Midpoint => {
                    let h = self.generator.hamiltonian(t + 0.5 * dt)?;
                    let (w, s) = expm_multiply(&h, &v, dt, &self.krylov(dt))?;
                    stats.absorb(&s);
                    v = w;
                }
                Integrator::Magnus4 => {
                    let r3 = 3f64.sqrt();
                    let (c1, c2) = (0.5 - r3 / 6.0, 0.5 + r3 / 6.0);
                    let (a1, a2) = ((3.0 - 2.0 * r3) / 12.0, (3.0 + 2.0 * r3) / 12.0);
                    let h1 = self.generator.hamiltonian(t + c1 * dt)?;
                    let h2 = self.generator.hamiltonian(t + c2 * dt)?;
                    // the factor applied first leans on the earlier Gauss point
                    let first = SparseOperator::linear_combination(2.0 * a2, &h1, 2.0 * a1, &h2)?;
                    let second = SparseOperator::linear_combination(2.0 * a1, &h1, 2.0 * a2, &h2)?;
                    let half = 0.5 * dt;
                    let (w, s) = expm_multiply(&first, &v, half, &self.krylov(half))?;
                    stats.absorb(&s);
                    let (w, s) = expm_multiply(&second, &w, half, &self.krylov(half))?;
                    stats.absorb(&s);
                    v = w;
                }
            }
        }
        Ok(v)
    }

    /// Largest step allowed on `[t0, t1]`.
    fn step_bound(&self, t0: f64, t1: f64) -> Result<f64> {
        let norm = [t0, 0.5 * (t0 + t1), t1]
            .iter()
            .map(|&t| self.generator.step_norm(t))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let mut dt = f64::INFINITY;
        if norm > 0.0 {
            dt = dt.min(self.opts.norm_step / norm);
        }
        if let Some(w) = self.generator.modulation_frequency() {
            dt = dt.min(2.0 * PI / w / self.opts.steps_per_period);
        }
        if let Some(m) = self.opts.max_step {
            dt = dt.min(m);
        }
        Ok(dt * self.opts.step_scale)
    }
}

/// Propagates `psi0` over `t_grid` and records observables at every grid time.
pub fn evolve<G>(generator: &G, psi0: &QuantumState, t_grid: &[f64], opts: &EvolveOptions) -> Result<Evolution>
where
    G: HamiltonianGenerator + ?Sized,
{
    if !(1e-12..=1e-6).contains(&opts.tol) {
        return Err(Error::Parameter(format!("tol must lie in [1e-12, 1e-6], got {}", opts.tol)));
    }
    if !(opts.step_scale > 0.0) {
        return Err(Error::Parameter("step_scale must be positive".into()));
    }
    if psi0.amps().len() != generator.dim() {
        return Err(Error::DimensionMismatch {
            expected: generator.dim(),
            got: psi0.amps().len(),
        });
    }
    let norm_sq = psi0.norm_sq();
    if (norm_sq - 1.0).abs() > NORM_TOL {
        return Err(Error::Normalization { norm_sq });
    }
    validate_grid(t_grid)?;

    let span = *t_grid.last().unwrap();
    let basis = psi0.basis();
    let stepper = Stepper {
        generator,
        opts,
        krylov_rate: if span > 0.0 { opts.tol / span } else { opts.tol },
    };
    let static_h = if generator.is_static() {
        Some(generator.hamiltonian(0.0)?)
    } else {
        None
    };

    let mut record = TrajectoryRecord::default();
    let mut states = Vec::new();
    let mut stats = EvolveStats {
        smallest_step: f64::INFINITY,
        ..Default::default()
    };
    let mut kstats = KrylovStats::default();
    let mut psi = psi0.amps().to_vec();
    let mut carried_step = f64::INFINITY;

    let observe = |psi: &[C64], t: f64, record: &mut TrajectoryRecord, states: &mut Vec<QuantumState>| {
        let state = QuantumState::from_raw(basis, psi.to_vec());
        let energy = static_h.as_ref().map(|h| h.expectation(psi));
        record.push(t, measure(&state), energy);
        if opts.keep_states {
            states.push(state);
        }
    };
    observe(&psi, 0.0, &mut record, &mut states);

    for w in t_grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let interval = t1 - t0;
        if let Some(h) = &static_h {
            let pieces = (1.0 / opts.step_scale).round().max(1.0) as usize;
            let tau = interval / pieces as f64;
            for _ in 0..pieces {
                let (next, s) = expm_multiply(h, &psi, tau, &stepper.krylov(tau))?;
                kstats.absorb(&s);
                psi = next;
            }
            stats.steps += pieces;
            stats.smallest_step = stats.smallest_step.min(tau);
        } else {
            let dt = stepper.step_bound(t0, t1)?.min(carried_step * opts.step_scale);
            let mut n = (interval / dt).ceil().max(1.0) as usize;
            let first_n = n;
            let mut coarse = stepper.propagate(&psi, t0, t1, n, &mut kstats)?;
            stats.steps += n;
            if opts.check_halving {
                let budget = 10.0 * opts.tol * interval / span;
                let mut refinements = 0;
                loop {
                    let fine = stepper.propagate(&psi, t0, t1, 2 * n, &mut kstats)?;
                    stats.steps += 2 * n;
                    let diff = distance(&coarse, &fine);
                    n *= 2;
                    coarse = fine;
                    if diff <= budget {
                        stats.max_halving_difference = stats.max_halving_difference.max(diff);
                        stats.halving_difference_sum += diff;
                        // start the next interval from the step that passed,
                        // or try a longer one if the check passed by a wide margin
                        let passed = interval / (n / 2) as f64 / opts.step_scale;
                        carried_step = if n / 2 == first_n && diff < budget / 64.0 {
                            2.0 * passed
                        } else {
                            passed
                        };
                        break;
                    }
                    refinements += 1;
                    stats.refinements += 1;
                    if refinements > MAX_REFINEMENTS {
                        return Err(Error::Numerical(format!(
                            "step halving did not converge on [{t0}, {t1}]: difference {diff:.3e} > budget {budget:.3e}"
                        )));
                    }
                }
            }
            psi = coarse;
            stats.smallest_step = stats.smallest_step.min(interval / n as f64);
        }
        if psi.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::Numerical(format!("non-finite amplitudes at t = {t1}")));
        }
        observe(&psi, t1, &mut record, &mut states);
    }

    stats.matvecs = kstats.matvecs;
    stats.krylov_substeps = kstats.substeps;
    stats.largest_krylov_dim = kstats.largest_dim;
    Ok(Evolution {
        record,
        final_state: QuantumState::from_raw(basis, psi),
        states,
        stats,
    })
}

/// Runs `evolve` twice, the second time with every step bound halved, and
/// returns both runs with the largest population difference between them.
pub fn step_halving_check<G>(
    generator: &G,
    psi0: &QuantumState,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<(Evolution, Evolution, f64)>
where
    G: HamiltonianGenerator + ?Sized,
{
    let base = evolve(generator, psi0, t_grid, opts)?;
    let halved_opts = EvolveOptions {
        step_scale: opts.step_scale * 0.5,
        ..*opts
    };
    let halved = evolve(generator, psi0, t_grid, &halved_opts)?;
    let diff = base.record.max_population_difference(&halved.record);
    Ok((base, halved, diff))
}
