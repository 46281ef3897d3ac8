//! Running configured experiments and writing their outputs.
//!
//! Every run directory holds
//!
//! - `trajectory.csv` with columns `t,observable,index,value`, where `index`
//!   is the site or domain size (1-based) and `0` for scalar observables;
//! - one `<observable>.csv` per requested observable, one row per time;
//! - `meta.json` with the resolved config, the crate version and derived
//!   quantities.
//!
//! Numbers are printed with 17 significant digits so files round-trip and
//! identical configs give byte-identical output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use log::{info, warn};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::classical::{classical_evolve, ClassicalState, ClassicalTrajectory};
use crate::config::{CouplingSpec, ExperimentConfig, InitialState, ModelKind, Observable, ResolvedCouplings};
use crate::domain::{build_domain_hamiltonian, potential_from_detunings, DomainParameters};
use crate::error::{Error, Result};
use crate::evolve::{
    evolve, uniform_grid, DomainPumpGenerator, EvolveStats, FnGenerator, HamiltonianGenerator, RydbergGenerator,
    StaticGenerator,
};
use crate::model::{build_qxp_hamiltonian, QxpParameters, RydbergDrive, RydbergParameters};
use crate::observables::TrajectoryRecord;
use crate::pump::{adiabaticity_check, rydberg_pump_detunings, AdiabaticityReport};
use crate::state::{Basis, QuantumState};
use crate::topology::{
    all_chern_numbers, edge_site_population, exact_splitting, hybridization, localization_length, winding_number,
    ChernGrid, EdgeStateReport, Localization,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Grid used for the band diagnostics reported in `meta.json`.
const DIAGNOSTIC_GRID: usize = 48;

/// Quantities computed from the parameters alone.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Derived {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub localization: Option<Localization>,
    /// Closed form with `n₁ = 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_states: Option<EdgeStateReport>,
    /// `(E₊, E₋)` from diagonalizing the domain matrix.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_splitting: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_t_hyb: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_site_population: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winding_number: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_offset: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset_is_safe: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adiabaticity: Option<AdiabaticityReport>,
    /// Lowest band first.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chern_numbers: Option<Vec<i64>>,
    /// Hold segments shorter than the configured minimum.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub short_holds: Option<Vec<usize>>,
}

pub fn derived_quantities(config: &ExperimentConfig) -> Result<Derived> {
    let mut d = Derived::default();
    let n = config.n_sites();
    match &config.couplings {
        Some(CouplingSpec::Ssh { lambda_v, lambda_w }) if *lambda_v != 0.0 && *lambda_w != 0.0 => {
            d.localization = Some(localization_length(*lambda_v, *lambda_w)?);
            if n >= 2 {
                d.edge_states = Some(hybridization(n, *lambda_v, *lambda_w, 1.0)?);
                let (p, m) = exact_splitting(n, *lambda_v, *lambda_w)?;
                d.exact_splitting = Some((p, m));
                d.exact_t_hyb = Some(2.0 * std::f64::consts::PI / (p - m));
                d.edge_site_population = Some(edge_site_population(n, *lambda_v, *lambda_w)?);
            }
            if lambda_v.abs() != lambda_w.abs() {
                d.winding_number = Some(winding_number(*lambda_v, *lambda_w, 256)?);
            }
        }
        Some(CouplingSpec::Aah { min_hold, .. }) => {
            let ResolvedCouplings::Pump(schedule) = config.resolve_couplings()? else {
                unreachable!("aah couplings resolve to a pump")
            };
            let rp = rydberg_pump_detunings(&schedule);
            d.delta_max = Some(rp.delta_max);
            d.min_offset = Some(rp.min_offset);
            if config.model.kind == ModelKind::Rydberg {
                d.offset_is_safe = config.detuning().delta_offset.map(|o| rp.offset_is_safe(o));
            }
            d.adiabaticity = Some(adiabaticity_check(&schedule, 64, 96)?);
            d.chern_numbers = Some(all_chern_numbers(&schedule, &ChernGrid::new(DIAGNOSTIC_GRID, DIAGNOSTIC_GRID))?);
            d.short_holds = Some(schedule.program.short_holds(*min_hold));
        }
        _ => {}
    }
    Ok(d)
}

/// Results of one run held in memory.
#[derive(Clone, Debug)]
pub struct RunOutput {
    /// Sweep label, empty for single runs.
    pub label: String,
    pub config: ExperimentConfig,
    pub t_max: f64,
    pub derived: Derived,
    pub record: Option<TrajectoryRecord>,
    pub classical: Option<ClassicalTrajectory>,
    pub stats: Option<EvolveStats>,
}

#[derive(Serialize)]
struct Meta<'a> {
    software: &'static str,
    version: &'static str,
    label: &'a str,
    config: &'a ExperimentConfig,
    t_max: f64,
    n_samples: usize,
    derived: &'a Derived,
    #[serde(skip_serializing_if = "Option::is_none")]
    stats: Option<&'a EvolveStats>,
    files: Vec<String>,
}

fn basis(config: &ExperimentConfig) -> Basis {
    let n = config.n_sites();
    match config.model.kind {
        ModelKind::Domain => Basis::Domain { n },
        _ => Basis::Spin { n_sites: n },
    }
}

fn initial_state(config: &ExperimentConfig) -> Result<QuantumState> {
    let basis = basis(config);
    match &config.initial {
        InitialState::Seed => QuantumState::seed(basis),
        InitialState::Fock { m } => QuantumState::domain_fock(basis, *m),
        InitialState::Custom { re, im } => {
            let amps = re
                .iter()
                .enumerate()
                .map(|(i, &r)| C64::new(r, im.get(i).copied().unwrap_or(0.0)))
                .collect();
            QuantumState::new(basis, amps).map_err(|e| Error::config("initial.re", e.to_string()))
        }
    }
}

fn classical_initial(config: &ExperimentConfig) -> Result<ClassicalState> {
    let n = config.n_sites();
    match &config.initial {
        InitialState::Seed => ClassicalState::seed(n),
        InitialState::Fock { m } => ClassicalState::new((1..=n).map(|j| if j <= *m { 1.0 } else { 0.0 }).collect()),
        InitialState::Custom { re, .. } => ClassicalState::new(re.clone()),
    }
}

fn check_capacity(config: &ExperimentConfig) -> Result<()> {
    let dim = match config.model.kind {
        ModelKind::Qxp | ModelKind::Rydberg => 1usize << config.n_sites(),
        ModelKind::Domain | ModelKind::Classical => config.n_sites(),
    };
    if dim > config.run.max_dim {
        return Err(Error::Capacity {
            what: "hilbert space dimension",
            value: dim,
            limit: config.run.max_dim,
        });
    }
    Ok(())
}

fn static_delta(config: &ExperimentConfig) -> Vec<f64> {
    config.detuning().delta.unwrap_or_else(|| vec![0.0; config.n_sites()])
}

/// Builds the generator for a quantum model.
pub fn generator(config: &ExperimentConfig) -> Result<Box<dyn HamiltonianGenerator>> {
    let n = config.n_sites();
    let couplings = config.resolve_couplings()?;
    let delta = static_delta(config);
    Ok(match (config.model.kind, couplings) {
        (ModelKind::Domain, ResolvedCouplings::Static(lambda)) => {
            let params = DomainParameters::new(lambda[1..].to_vec(), potential_from_detunings(&delta))?;
            Box::new(StaticGenerator(build_domain_hamiltonian(&params)?))
        }
        (ModelKind::Domain, ResolvedCouplings::Pump(schedule)) => Box::new(DomainPumpGenerator { schedule, n }),
        (ModelKind::Qxp, ResolvedCouplings::Static(lambda)) => {
            Box::new(StaticGenerator(build_qxp_hamiltonian(&QxpParameters::new(n, lambda, delta)?)?))
        }
        (ModelKind::Qxp, ResolvedCouplings::Pump(schedule)) => {
            let rp = rydberg_pump_detunings(&schedule);
            let frequency = Some(schedule.program.max_abs_omega()).filter(|w| *w > 0.0);
            Box::new(FnGenerator {
                dim: 1 << n,
                frequency,
                f: move |t: f64| {
                    let lambda = (1..=n).map(|j| rp.lambda(j, t)).collect();
                    let delta = (1..=n).map(|j| rp.delta(j, t)).collect();
                    build_qxp_hamiltonian(&QxpParameters::new(n, lambda, delta)?)
                },
            })
        }
        (ModelKind::Rydberg, couplings) => {
            let d = config.detuning();
            let offset = d
                .delta_offset
                .ok_or_else(|| Error::config("detuning.delta_offset", "required for the rydberg model"))?;
            let drive = match couplings {
                ResolvedCouplings::Static(lambda) => RydbergDrive::Static { lambda, delta },
                ResolvedCouplings::Pump(schedule) => RydbergDrive::Pump(rydberg_pump_detunings(&schedule)),
            };
            let params = RydbergParameters {
                n_sites: n,
                delta_offset: offset,
                v_nn: d.v_nn.unwrap_or(-offset),
                drive,
                facilitation_mode: d.facilitation_mode,
                seed_boundary: config.model.seed_boundary,
            };
            Box::new(RydbergGenerator::new(params)?)
        }
        (ModelKind::Classical, _) => {
            return Err(Error::config("model.kind", "the classical model has no Hamiltonian"));
        }
    })
}

/// Runs one experiment in memory. Sweeps are not expanded.
pub fn simulate(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    check_capacity(config)?;
    let t_max = config.t_max()?;
    let grid = uniform_grid(t_max, config.run.n_samples);
    let derived = derived_quantities(config)?;
    if let Some(holds) = derived.short_holds.as_ref().filter(|h| !h.is_empty()) {
        warn!("hold segments {holds:?} are shorter than the minimum hold time");
    }
    if derived.offset_is_safe == Some(false) {
        warn!("|delta_offset| is below the recommended 10 delta_max; facilitation may break down");
    }
    let mut out = RunOutput {
        label: String::new(),
        config: config.clone(),
        t_max,
        derived,
        record: None,
        classical: None,
        stats: None,
    };
    if config.model.kind == ModelKind::Classical {
        let c = config.classical();
        out.classical = Some(classical_evolve(&classical_initial(config)?, c.gamma_f0, c.gamma, &grid)?);
        return Ok(out);
    }
    let generator = generator(config)?;
    let psi0 = initial_state(config)?;
    info!(
        "evolving {:?} model, dimension {}, t_max = {t_max}",
        config.model.kind,
        generator.dim()
    );
    let ev = evolve(generator.as_ref(), &psi0, &grid, &config.evolve_options())?;
    out.record = Some(ev.record);
    out.stats = Some(ev.stats);
    Ok(out)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn outputs(config: &ExperimentConfig) -> Vec<Observable> {
    let mut o = config.run.outputs.clone();
    o.sort();
    o.dedup();
    o
}

/// Per-time values of one observable, `(index, value)` pairs.
fn observable_rows(out: &RunOutput, obs: Observable, i: usize) -> Vec<(usize, f64)> {
    let indexed = |v: &[f64]| v.iter().enumerate().map(|(j, x)| (j + 1, *x)).collect();
    if let Some(c) = &out.classical {
        return match obs {
            Observable::PClassical => indexed(&c.p[i]),
            _ => Vec::new(),
        };
    }
    let Some(r) = &out.record else {
        return Vec::new();
    };
    match obs {
        Observable::NSite => indexed(&r.site_populations[i]),
        Observable::PDomain => indexed(&r.domain_populations[i]),
        Observable::FidelityL => vec![(0, r.fidelity_left[i])],
        Observable::FidelityR => vec![(0, r.fidelity_right[i])],
        Observable::Com => r.center_of_mass[i].map(|x| vec![(0, x)]).unwrap_or_default(),
        Observable::Norm => vec![(0, r.norm[i])],
        Observable::Energy => r.energy.as_ref().map(|e| vec![(0, e[i])]).unwrap_or_default(),
        Observable::PClassical => Vec::new(),
    }
}

fn times(out: &RunOutput) -> &[f64] {
    match (&out.record, &out.classical) {
        (Some(r), _) => &r.times,
        (_, Some(c)) => &c.times,
        _ => &[],
    }
}

/// The long-format `trajectory.csv`.
pub fn trajectory_csv(out: &RunOutput) -> String {
    let mut s = String::from("t,observable,index,value\n");
    let obs = outputs(&out.config);
    for (i, &t) in times(out).iter().enumerate() {
        let t = num(t);
        for &o in &obs {
            for (index, value) in observable_rows(out, o, i) {
                let _ = writeln!(s, "{t},{},{index},{}", o.name(), num(value));
            }
        }
    }
    s
}

/// Wide table of one observable, or `None` when the run does not produce it.
pub fn observable_csv(out: &RunOutput, obs: Observable) -> Option<String> {
    let t = times(out);
    let width = (0..t.len()).map(|i| observable_rows(out, obs, i).len()).max().unwrap_or(0);
    if width == 0 {
        return None;
    }
    let indexed = !matches!(
        obs,
        Observable::FidelityL | Observable::FidelityR | Observable::Com | Observable::Norm | Observable::Energy
    );
    let mut s = String::from("t");
    if indexed {
        for j in 1..=width {
            let _ = write!(s, ",{j}");
        }
    } else {
        s.push_str(",value");
    }
    s.push('\n');
    for (i, &ti) in t.iter().enumerate() {
        let rows = observable_rows(out, obs, i);
        if rows.is_empty() {
            continue;
        }
        s.push_str(&num(ti));
        for (_, v) in rows {
            s.push(',');
            s.push_str(&num(v));
        }
        s.push('\n');
    }
    Some(s)
}

/// Writes the files of a single run into `dir`.
pub fn write_run(out: &RunOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("trajectory.csv"), trajectory_csv(out))?;
    let mut files = vec!["trajectory.csv".to_string()];
    for obs in outputs(&out.config) {
        if let Some(csv) = observable_csv(out, obs) {
            let name = format!("{}.csv", obs.name());
            fs::write(dir.join(&name), csv)?;
            files.push(name);
        }
    }
    let meta = Meta {
        software: env!("CARGO_PKG_NAME"),
        version: VERSION,
        label: &out.label,
        config: &out.config,
        t_max: out.t_max,
        n_samples: out.config.run.n_samples,
        derived: &out.derived,
        stats: out.stats.as_ref(),
        files,
    };
    let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Numerical(e.to_string()))?;
    fs::write(dir.join("meta.json"), json + "\n")?;
    Ok(())
}

/// Runs `config` and writes its outputs under `out_dir`. A sweep runs its
/// variants concurrently, each in its own `<parameter>=<value>` directory.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<RunOutput>> {
    config.validate()?;
    if config.sweep.is_none() {
        let out = simulate(config)?;
        write_run(&out, out_dir)?;
        return Ok(vec![out]);
    }
    let variants = config.sweep_variants()?;
    for (_, c) in &variants {
        check_capacity(c)?;
    }
    let outputs: Vec<RunOutput> = variants
        .into_par_iter()
        .map(|(label, c)| {
            let mut out = simulate(&c)?;
            out.label = label.clone();
            write_run(&out, &out_dir.join(&label))?;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let index: Vec<&str> = outputs.iter().map(|o| o.label.as_str()).collect();
    let json = serde_json::json!({
        "software": env!("CARGO_PKG_NAME"),
        "version": VERSION,
        "sweep": config.sweep,
        "runs": index,
    });
    fs::create_dir_all(out_dir)?;
    fs::write(
        out_dir.join("sweep.json"),
        serde_json::to_string_pretty(&json).map_err(|e| Error::Numerical(e.to_string()))? + "\n",
    )?;
    Ok(outputs)
}

/// Runs independent configs concurrently, `configs[i]` into `dirs[i]`.
pub fn run_many(configs: &[(ExperimentConfig, std::path::PathBuf)]) -> Vec<Result<Vec<RunOutput>>> {
    configs.par_iter().map(|(c, dir)| run_experiment(c, dir)).collect()
}
