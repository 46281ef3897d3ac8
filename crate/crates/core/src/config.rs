//! Experiment configuration.
//!
//! One TOML file describes one experiment:
//!
//! ```toml
//! [model]
//! kind = "rydberg"          # qxp | rydberg | domain | classical
//! n_sites = 4
//!
//! [couplings]
//! kind = "ssh"              # uniform | ssh | aah | explicit
//! lambda_v = 1.0
//! lambda_w = 10.0
//!
//! [detuning]
//! delta_offset = -500.0     # Δ₀; V_NN defaults to −Δ₀
//!
//! [initial]
//! kind = "seed"             # seed | fock | custom
//!
//! [run]
//! t_max_hyb = 1.5           # or t_max, t_max_hyb_exact, t_max_cycles
//! n_samples = 3001
//! tol = 1e-8
//! ```
//!
//! Validation errors carry the dotted path of the offending field.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::basis::{DEFAULT_MAX_EVOLVE_SITES, MAX_SITES};
use crate::domain::ssh_couplings;
use crate::error::{Error, Result};
use crate::evolve::{EvolveOptions, Integrator};
use crate::krylov::DEFAULT_MAX_KRYLOV_DIM;
use crate::pump::{aah_schedule, AahSchedule, PumpProgram, PumpSegment, DEFAULT_MIN_HOLD};
use crate::topology::{exact_period, hybridization};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Qxp,
    Rydberg,
    Domain,
    Classical,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub n_sites: usize,
    /// Site 1 is the undriven seed.
    #[serde(default = "yes")]
    pub seed_boundary: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingSpec {
    /// `λ_j = lambda` on every driven site.
    Uniform { lambda: f64 },
    /// `λ_j = λ_v` for even `j`, `λ_w` for odd `j`.
    Ssh { lambda_v: f64, lambda_w: f64 },
    /// Period-3 pump. Either `omega` (constant frequency) or `segments`.
    Aah {
        lambda0: f64,
        eta0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega: Option<f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        segments: Vec<PumpSegment>,
        #[serde(default = "default_min_hold")]
        min_hold: f64,
    },
    /// `λ_j` for `j = 1..N`.
    Explicit { lambda: Vec<f64> },
}

fn default_min_hold() -> f64 {
    DEFAULT_MIN_HOLD
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetuningSection {
    /// `Δ₀`, required by the Rydberg model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_offset: Option<f64>,
    /// Defaults to `−Δ₀`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_nn: Option<f64>,
    #[serde(default = "yes")]
    pub facilitation_mode: bool,
    /// Static on-site energies `δ_j`, `j = 1..N`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// `|•∘...∘⟩`.
    #[default]
    Seed,
    /// Prefix domain of size `m`.
    Fock { m: usize },
    /// Amplitudes over the model's basis (spin or domain), or the
    /// probabilities `p_j` of the classical model.
    Custom {
        re: Vec<f64>,
        #[serde(default)]
        im: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Observable {
    #[serde(rename = "n_site")]
    NSite,
    #[serde(rename = "p_domain")]
    PDomain,
    #[serde(rename = "fidelity_L")]
    FidelityL,
    #[serde(rename = "fidelity_R")]
    FidelityR,
    #[serde(rename = "com")]
    Com,
    #[serde(rename = "norm")]
    Norm,
    #[serde(rename = "energy")]
    Energy,
    #[serde(rename = "p_classical")]
    PClassical,
}

impl Observable {
    pub const ALL: [Observable; 8] = [
        Observable::NSite,
        Observable::PDomain,
        Observable::FidelityL,
        Observable::FidelityR,
        Observable::Com,
        Observable::Norm,
        Observable::Energy,
        Observable::PClassical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::NSite => "n_site",
            Observable::PDomain => "p_domain",
            Observable::FidelityL => "fidelity_L",
            Observable::FidelityR => "fidelity_R",
            Observable::Com => "com",
            Observable::Norm => "norm",
            Observable::Energy => "energy",
            Observable::PClassical => "p_classical",
        }
    }
}

fn default_samples() -> usize {
    201
}

fn default_tol() -> f64 {
    1e-8
}

fn default_norm_step() -> f64 {
    0.1
}

fn default_integrator() -> Integrator {
    Integrator::Midpoint
}

fn default_outputs() -> Vec<Observable> {
    Observable::ALL.to_vec()
}

fn default_max_dim() -> usize {
    1 << DEFAULT_MAX_EVOLVE_SITES
}

fn default_max_krylov() -> usize {
    DEFAULT_MAX_KRYLOV_DIM
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// Window in units of the closed-form hybridization period.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max_hyb: Option<f64>,
    /// Window in units of the exact edge-state period.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max_hyb_exact: Option<f64>,
    /// Window in pump cycles `2π/ω`; for segmented programs, the program
    /// length is used when this is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max_cycles: Option<f64>,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_integrator")]
    pub integrator: Integrator,
    #[serde(default = "default_norm_step")]
    pub norm_step: f64,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<Observable>,
    /// Largest Hilbert-space dimension that may be evolved.
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    #[serde(default = "default_max_krylov")]
    pub max_krylov_dim: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            t_max: None,
            t_max_hyb: None,
            t_max_hyb_exact: None,
            t_max_cycles: None,
            n_samples: default_samples(),
            tol: default_tol(),
            integrator: default_integrator(),
            norm_step: default_norm_step(),
            outputs: default_outputs(),
            max_dim: default_max_dim(),
            max_krylov_dim: default_max_krylov(),
        }
    }
}

fn default_gamma_f0() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSection {
    #[serde(default = "default_gamma_f0")]
    pub gamma_f0: f64,
    #[serde(default)]
    pub gamma: f64,
}

impl Default for ClassicalSection {
    fn default() -> Self {
        Self {
            gamma_f0: default_gamma_f0(),
            gamma: 0.0,
        }
    }
}

/// Parameter varied by a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    #[serde(rename = "couplings.lambda_v")]
    LambdaV,
    #[serde(rename = "couplings.lambda_w")]
    LambdaW,
    #[serde(rename = "couplings.omega")]
    Omega,
    #[serde(rename = "couplings.eta0")]
    Eta0,
    #[serde(rename = "detuning.delta_offset")]
    DeltaOffset,
    #[serde(rename = "model.n_sites")]
    NSites,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::LambdaV => "couplings.lambda_v",
            SweepParameter::LambdaW => "couplings.lambda_w",
            SweepParameter::Omega => "couplings.omega",
            SweepParameter::Eta0 => "couplings.eta0",
            SweepParameter::DeltaOffset => "detuning.delta_offset",
            SweepParameter::NSites => "model.n_sites",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<CouplingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning: Option<DetuningSection>,
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

/// Time-dependence of the couplings after resolution.
#[derive(Clone, Debug, PartialEq)]
pub enum ResolvedCouplings {
    /// `λ_j`, `j = 1..N`.
    Static(Vec<f64>),
    Pump(AahSchedule),
}

fn finite(path: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::config(path, format!("must be finite, got {x}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let path = field_from_message(&message).unwrap_or_else(|| "<toml>".into());
            Error::config(path, message)
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn n_sites(&self) -> usize {
        self.model.n_sites
    }

    pub fn classical(&self) -> ClassicalSection {
        self.classical.clone().unwrap_or_default()
    }

    pub fn detuning(&self) -> DetuningSection {
        self.detuning.clone().unwrap_or_default()
    }

    /// Checks every cross-field constraint.
    pub fn validate(&self) -> Result<()> {
        let n = self.model.n_sites;
        if n == 0 || n > MAX_SITES {
            return Err(Error::config("model.n_sites", format!("must lie in 1..={MAX_SITES}, got {n}")));
        }
        let kind = self.model.kind;
        if kind != ModelKind::Classical && self.couplings.is_none() {
            return Err(Error::config("couplings", "required for quantum models"));
        }
        self.resolve_couplings()?;
        self.check_detuning()?;
        self.check_initial()?;
        self.check_run()?;
        if let Some(c) = &self.classical {
            for (name, x) in [("classical.gamma_f0", c.gamma_f0), ("classical.gamma", c.gamma)] {
                if !(finite(name, x)? >= 0.0) {
                    return Err(Error::config(name, "must be non-negative"));
                }
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::config("sweep.values", "needs at least one value"));
            }
            for v in self.sweep_variants()? {
                v.1.validate()?;
            }
        }
        Ok(())
    }

    fn check_detuning(&self) -> Result<()> {
        let n = self.model.n_sites;
        let d = self.detuning();
        if let Some(delta) = &d.delta {
            if delta.len() != n {
                return Err(Error::config(
                    "detuning.delta",
                    format!("expected {n} entries, got {}", delta.len()),
                ));
            }
            for (j, x) in delta.iter().enumerate() {
                finite(&format!("detuning.delta[{j}]"), *x)?;
            }
            if self.model.seed_boundary && delta[0] != 0.0 {
                return Err(Error::config("detuning.delta[0]", "the seed site must have delta_1 = 0"));
            }
        }
        if self.model.kind == ModelKind::Rydberg {
            let offset = d
                .delta_offset
                .ok_or_else(|| Error::config("detuning.delta_offset", "required for the rydberg model"))?;
            finite("detuning.delta_offset", offset)?;
            if let Some(v) = d.v_nn {
                finite("detuning.v_nn", v)?;
                if d.facilitation_mode && (v + offset).abs() > 1e-12 * offset.abs().max(1.0) {
                    return Err(Error::config(
                        "detuning.v_nn",
                        format!("facilitation requires v_nn = -delta_offset = {}, got {v}", -offset),
                    ));
                }
            }
        }
        Ok(())
    }

    fn check_initial(&self) -> Result<()> {
        let n = self.model.n_sites;
        match &self.initial {
            InitialState::Seed => Ok(()),
            InitialState::Fock { m } => {
                if *m == 0 || *m > n {
                    Err(Error::config("initial.m", format!("must lie in 1..={n}, got {m}")))
                } else {
                    Ok(())
                }
            }
            InitialState::Custom { re, im } => {
                let dim = match self.model.kind {
                    ModelKind::Domain | ModelKind::Classical => n,
                    ModelKind::Qxp | ModelKind::Rydberg => 1 << n,
                };
                if re.len() != dim {
                    return Err(Error::config("initial.re", format!("expected {dim} entries, got {}", re.len())));
                }
                if !im.is_empty() && im.len() != dim {
                    return Err(Error::config("initial.im", format!("expected {dim} entries, got {}", im.len())));
                }
                if re.iter().chain(im).any(|x| !x.is_finite()) {
                    return Err(Error::config("initial.re", "entries must be finite"));
                }
                if self.model.kind == ModelKind::Classical && re.iter().any(|p| !(0.0..=1.0).contains(p)) {
                    return Err(Error::config("initial.re", "classical probabilities must lie in [0, 1]"));
                }
                Ok(())
            }
        }
    }

    fn check_run(&self) -> Result<()> {
        let r = &self.run;
        let windows = [r.t_max, r.t_max_hyb, r.t_max_hyb_exact, r.t_max_cycles];
        let given = windows.iter().filter(|w| w.is_some()).count();
        let segmented = matches!(&self.couplings, Some(CouplingSpec::Aah { segments, .. }) if !segments.is_empty());
        if given > 1 {
            return Err(Error::config("run.t_max", "give only one of t_max, t_max_hyb, t_max_hyb_exact, t_max_cycles"));
        }
        if given == 0 && !segmented {
            return Err(Error::config("run.t_max", "no time window given"));
        }
        for (name, w) in ["run.t_max", "run.t_max_hyb", "run.t_max_hyb_exact", "run.t_max_cycles"]
            .iter()
            .zip(windows)
        {
            if let Some(w) = w {
                if !(finite(name, w)? > 0.0) {
                    return Err(Error::config(*name, "must be positive"));
                }
            }
        }
        if (r.t_max_hyb.is_some() || r.t_max_hyb_exact.is_some()) && !matches!(self.couplings, Some(CouplingSpec::Ssh { .. })) {
            return Err(Error::config("run.t_max_hyb", "hybridization windows need ssh couplings"));
        }
        if r.t_max_cycles.is_some() && !matches!(self.couplings, Some(CouplingSpec::Aah { .. })) {
            return Err(Error::config("run.t_max_cycles", "pump-cycle windows need aah couplings"));
        }
        if r.n_samples < 2 {
            return Err(Error::config("run.n_samples", "needs at least 2 samples"));
        }
        if !(1e-12..=1e-6).contains(&r.tol) {
            return Err(Error::config("run.tol", format!("must lie in [1e-12, 1e-6], got {}", r.tol)));
        }
        if !(r.norm_step > 0.0) {
            return Err(Error::config("run.norm_step", "must be positive"));
        }
        if r.max_krylov_dim < 2 {
            return Err(Error::config("run.max_krylov_dim", "must be at least 2"));
        }
        Ok(())
    }

    /// Couplings as static `λ_j` or a pump schedule.
    pub fn resolve_couplings(&self) -> Result<ResolvedCouplings> {
        let n = self.model.n_sites;
        let seed = self.model.seed_boundary;
        let Some(spec) = &self.couplings else {
            return Ok(ResolvedCouplings::Static(vec![0.0; n]));
        };
        let with_seed = |mut v: Vec<f64>| {
            if seed {
                v[0] = 0.0;
            }
            v
        };
        match spec {
            CouplingSpec::Uniform { lambda } => {
                finite("couplings.lambda", *lambda)?;
                Ok(ResolvedCouplings::Static(with_seed(vec![*lambda; n])))
            }
            CouplingSpec::Ssh { lambda_v, lambda_w } => {
                finite("couplings.lambda_v", *lambda_v)?;
                finite("couplings.lambda_w", *lambda_w)?;
                // site 1 is odd, so without a seed boundary it gets λ_w
                let mut v = vec![*lambda_w];
                v.extend(ssh_couplings(n, *lambda_v, *lambda_w));
                Ok(ResolvedCouplings::Static(with_seed(v)))
            }
            CouplingSpec::Explicit { lambda } => {
                if lambda.len() != n {
                    return Err(Error::config(
                        "couplings.lambda",
                        format!("expected {n} entries, got {}", lambda.len()),
                    ));
                }
                for (j, x) in lambda.iter().enumerate() {
                    finite(&format!("couplings.lambda[{j}]"), *x)?;
                }
                if seed && lambda[0] != 0.0 {
                    return Err(Error::config("couplings.lambda[0]", "the seed site must have lambda_1 = 0"));
                }
                Ok(ResolvedCouplings::Static(lambda.clone()))
            }
            CouplingSpec::Aah {
                lambda0,
                eta0,
                omega,
                segments,
                min_hold,
            } => {
                finite("couplings.lambda0", *lambda0)?;
                finite("couplings.eta0", *eta0)?;
                if !(*min_hold >= 0.0) {
                    return Err(Error::config("couplings.min_hold", "must be non-negative"));
                }
                if !seed {
                    return Err(Error::config("model.seed_boundary", "pump schedules need the seed boundary"));
                }
                let program = match (omega, segments.is_empty()) {
                    (Some(w), true) => PumpProgram::constant(finite("couplings.omega", *w)?),
                    (None, false) => {
                        PumpProgram::new(segments.clone()).map_err(|e| Error::config("couplings.segments", e.to_string()))?
                    }
                    (Some(_), false) => {
                        return Err(Error::config("couplings.omega", "give either omega or segments, not both"))
                    }
                    (None, true) => return Err(Error::config("couplings.omega", "aah couplings need omega or segments")),
                };
                Ok(ResolvedCouplings::Pump(aah_schedule(*lambda0, *eta0, program)))
            }
        }
    }

    /// Length of the simulated window.
    pub fn t_max(&self) -> Result<f64> {
        let r = &self.run;
        if let Some(t) = r.t_max {
            return Ok(t);
        }
        if let Some(CouplingSpec::Ssh { lambda_v, lambda_w }) = &self.couplings {
            if let Some(k) = r.t_max_hyb {
                return Ok(k * hybridization(self.n_sites(), *lambda_v, *lambda_w, 1.0)?.t_hyb);
            }
            if let Some(k) = r.t_max_hyb_exact {
                return Ok(k * exact_period(self.n_sites(), *lambda_v, *lambda_w)?);
            }
        }
        if let Some(CouplingSpec::Aah { omega, segments, .. }) = &self.couplings {
            if let Some(k) = r.t_max_cycles {
                let w = omega
                    .or_else(|| {
                        let m = segments.iter().map(|s| s.omega.abs()).fold(0.0, f64::max);
                        (m > 0.0).then_some(m)
                    })
                    .ok_or_else(|| Error::config("run.t_max_cycles", "the pump never moves"))?;
                return Ok(k * PumpProgram::cycle(w));
            }
            if !segments.is_empty() {
                return Ok(segments.iter().map(|s| s.duration).sum());
            }
        }
        Err(Error::config("run.t_max", "no time window given"))
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions {
            tol: self.run.tol,
            max_krylov_dim: self.run.max_krylov_dim,
            integrator: self.run.integrator,
            norm_step: self.run.norm_step,
            ..EvolveOptions::default()
        }
    }

    /// One config per sweep value, labelled `<parameter>=<value>`.
    pub fn sweep_variants(&self) -> Result<Vec<(String, ExperimentConfig)>> {
        let Some(sweep) = &self.sweep else {
            return Ok(vec![(String::new(), self.clone())]);
        };
        sweep
            .values
            .iter()
            .map(|&v| {
                let mut c = self.clone();
                c.sweep = None;
                c.set_parameter(sweep.parameter, v)?;
                Ok((format!("{}={}", sweep.parameter.name(), v), c))
            })
            .collect()
    }

    fn set_parameter(&mut self, p: SweepParameter, v: f64) -> Result<()> {
        let missing = || Error::config(p.name(), "sweep parameter does not exist in this config");
        match p {
            SweepParameter::LambdaV | SweepParameter::LambdaW => match &mut self.couplings {
                Some(CouplingSpec::Ssh { lambda_v, lambda_w }) => {
                    *if p == SweepParameter::LambdaV { lambda_v } else { lambda_w } = v;
                }
                _ => return Err(missing()),
            },
            SweepParameter::Omega | SweepParameter::Eta0 => match &mut self.couplings {
                Some(CouplingSpec::Aah { omega, eta0, .. }) => {
                    if p == SweepParameter::Omega {
                        *omega.as_mut().ok_or_else(missing)? = v;
                    } else {
                        *eta0 = v;
                    }
                }
                _ => return Err(missing()),
            },
            SweepParameter::DeltaOffset => {
                let d = self.detuning.get_or_insert_with(DetuningSection::default);
                d.delta_offset = Some(v);
                if d.facilitation_mode {
                    d.v_nn = None;
                }
            }
            SweepParameter::NSites => {
                if v < 1.0 || v.fract() != 0.0 {
                    return Err(Error::config(p.name(), format!("site count must be a positive integer, got {v}")));
                }
                self.model.n_sites = v as usize;
            }
        }
        Ok(())
    }
}

/// Pulls the field name out of serde messages such as ``missing field `x` ``.
fn field_from_message(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let end = start + message[start..].find('`')?;
    Some(message[start..end].to_string())
}

/// Segments of a grow / hold / shrink / hold program: a prelude of
/// `prelude` cycles, `grow` cycles forward, a hold, `shrink` cycles back and
/// a final hold.
pub fn composite_segments(omega: f64, prelude: f64, grow: f64, hold: f64, shrink: f64) -> Vec<PumpSegment> {
    let cycle = PumpProgram::cycle(omega);
    let mut segments = Vec::new();
    if prelude > 0.0 {
        segments.push(PumpSegment {
            duration: prelude * cycle,
            omega,
        });
    }
    segments.push(PumpSegment {
        duration: grow * cycle,
        omega,
    });
    segments.push(PumpSegment {
        duration: hold,
        omega: 0.0,
    });
    segments.push(PumpSegment {
        duration: shrink * cycle,
        omega: -omega,
    });
    segments.push(PumpSegment {
        duration: hold,
        omega: 0.0,
    });
    segments
}
