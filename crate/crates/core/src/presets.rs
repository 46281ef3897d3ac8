//! Ready-made experiments for the standard figures.
//!
//! | name               | model     | what it shows                                   |
//! |--------------------|-----------|-------------------------------------------------|
//! | `fig1c`            | classical | rate equations spreading from one seed          |
//! | `fig1d`            | rydberg   | edge-to-edge transfer in a facilitated chain    |
//! | `fig2-trivial`     | domain    | free propagation and reflection, `λ_w < λ_v`    |
//! | `fig2-topological` | domain    | slow edge-state oscillation, `λ_w > λ_v`        |
//! | `fig3-sweep`       | domain    | edge fidelity versus `λ_w / λ_v`                |
//! | `fig4-pump`        | rydberg   | grow / hold / shrink pump program               |
//! | `fig5-sweep`       | rydberg   | breakdown of facilitation as `|Δ₀|` shrinks     |

use crate::config::{
    composite_segments, ClassicalSection, CouplingSpec, DetuningSection, ExperimentConfig, InitialState, ModelKind,
    ModelSection, Observable, RunSection, SweepParameter, SweepSection,
};
use crate::error::{Error, Result};
use crate::evolve::Integrator;
use crate::pump::DEFAULT_MIN_HOLD;

pub const PRESETS: [&str; 7] = [
    "fig1c",
    "fig1d",
    "fig2-trivial",
    "fig2-topological",
    "fig3-sweep",
    "fig4-pump",
    "fig5-sweep",
];

/// Pump frequency of the pump presets.
pub const PUMP_OMEGA: f64 = 0.02;
/// Pump on-site amplitude `η₀`.
pub const PUMP_ETA0: f64 = -10.0;
/// Detuning offset of the facilitated presets.
pub const RYDBERG_OFFSET: f64 = -500.0;
/// Hold duration used by `fig4-pump`.
pub const PUMP_HOLD: f64 = 50.0;

fn model(kind: ModelKind, n_sites: usize) -> ModelSection {
    ModelSection {
        kind,
        n_sites,
        seed_boundary: true,
    }
}

fn ssh(lambda_v: f64, lambda_w: f64) -> Option<CouplingSpec> {
    Some(CouplingSpec::Ssh { lambda_v, lambda_w })
}

fn offset(delta_offset: f64) -> Option<DetuningSection> {
    Some(DetuningSection {
        delta_offset: Some(delta_offset),
        v_nn: None,
        facilitation_mode: true,
        delta: None,
    })
}

fn quantum_outputs() -> Vec<Observable> {
    Observable::ALL
        .into_iter()
        .filter(|o| *o != Observable::PClassical)
        .collect()
}

/// Run settings for driven Rydberg chains: fourth-order steps bounded by the
/// modulated part of `H`, accuracy guarded by the step-halving check.
fn pump_run(n_samples: usize) -> RunSection {
    RunSection {
        n_samples,
        tol: 1e-6,
        integrator: Integrator::Magnus4,
        norm_step: 1.0,
        outputs: quantum_outputs(),
        ..RunSection::default()
    }
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let base = |kind, n| ExperimentConfig {
        model: model(kind, n),
        couplings: None,
        detuning: None,
        initial: InitialState::Seed,
        run: RunSection::default(),
        classical: None,
        sweep: None,
    };
    let config = match name {
        "fig1c" => ExperimentConfig {
            classical: Some(ClassicalSection {
                gamma_f0: 1.0,
                gamma: 0.0,
            }),
            run: RunSection {
                t_max: Some(200.0),
                n_samples: 401,
                outputs: vec![Observable::PClassical],
                ..RunSection::default()
            },
            ..base(ModelKind::Classical, 8)
        },
        "fig1d" => ExperimentConfig {
            couplings: ssh(1.0, 10.0),
            detuning: offset(RYDBERG_OFFSET),
            run: RunSection {
                t_max_hyb: Some(1.5),
                n_samples: 3001,
                outputs: quantum_outputs(),
                ..RunSection::default()
            },
            ..base(ModelKind::Rydberg, 4)
        },
        "fig2-trivial" => ExperimentConfig {
            couplings: ssh(1.0, 0.1),
            run: RunSection {
                t_max: Some(500.0),
                n_samples: 2001,
                outputs: quantum_outputs(),
                ..RunSection::default()
            },
            ..base(ModelKind::Domain, 8)
        },
        "fig2-topological" => ExperimentConfig {
            couplings: ssh(1.0, 10.0),
            run: RunSection {
                t_max_hyb: Some(1.5),
                n_samples: 3001,
                outputs: quantum_outputs(),
                ..RunSection::default()
            },
            ..base(ModelKind::Domain, 4)
        },
        "fig3-sweep" => ExperimentConfig {
            couplings: ssh(1.0, 10.0),
            run: RunSection {
                t_max_hyb_exact: Some(3.0),
                n_samples: 1501,
                outputs: quantum_outputs(),
                ..RunSection::default()
            },
            sweep: Some(SweepSection {
                parameter: SweepParameter::LambdaW,
                values: vec![2.0, 5.0, 10.0, 20.0],
            }),
            ..base(ModelKind::Domain, 4)
        },
        "fig4-pump" => ExperimentConfig {
            couplings: Some(CouplingSpec::Aah {
                lambda0: 1.0,
                eta0: PUMP_ETA0,
                omega: None,
                segments: composite_segments(PUMP_OMEGA, 1.0 / 6.0, 2.0, PUMP_HOLD, 1.0),
                min_hold: DEFAULT_MIN_HOLD,
            }),
            detuning: offset(RYDBERG_OFFSET),
            run: pump_run(1201),
            ..base(ModelKind::Rydberg, 10)
        },
        "fig5-sweep" => ExperimentConfig {
            couplings: Some(CouplingSpec::Aah {
                lambda0: 1.0,
                eta0: PUMP_ETA0,
                omega: Some(PUMP_OMEGA),
                segments: Vec::new(),
                min_hold: DEFAULT_MIN_HOLD,
            }),
            detuning: offset(RYDBERG_OFFSET),
            run: RunSection {
                t_max_cycles: Some(7.0 / 6.0),
                ..pump_run(701)
            },
            sweep: Some(SweepSection {
                parameter: SweepParameter::DeltaOffset,
                values: vec![-22.0, -50.0, -100.0, -500.0],
            }),
            ..base(ModelKind::Rydberg, 8)
        },
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ResolvedCouplings;

    #[test]
    fn every_preset_is_valid() {
        for name in PRESETS {
            preset(name).unwrap();
        }
        assert!(matches!(preset("fig9"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn pump_frequency() {
        let c = preset("fig4-pump").unwrap();
        let ResolvedCouplings::Pump(s) = c.resolve_couplings().unwrap() else {
            panic!("fig4-pump is a pump")
        };
        assert_eq!(s.program.max_abs_omega(), 0.02);
        assert_eq!(s.eta0.abs(), 10.0);
        assert_eq!(c.detuning().delta_offset, Some(-500.0));
    }

    #[test]
    fn facilitation_sweep_includes_the_failure_case() {
        let c = preset("fig5-sweep").unwrap();
        let values = &c.sweep.as_ref().unwrap().values;
        assert!(values.contains(&-22.0) && values.contains(&-500.0));
    }

    #[test]
    fn edge_state_presets() {
        assert_eq!(preset("fig2-topological").unwrap().couplings, ssh(1.0, 10.0));
        assert_eq!(preset("fig2-trivial").unwrap().couplings, ssh(1.0, 0.1));
        let ratios: Vec<f64> = preset("fig3-sweep").unwrap().sweep.unwrap().values;
        assert_eq!(ratios, vec![2.0, 5.0, 10.0, 20.0]);
    }
}
