use num_complex::Complex64 as C64;
use proptest::prelude::*;

use qcontact::classical::{classical_evolve, ClassicalState};
use qcontact::domain::{build_domain_hamiltonian, project_to_domain, DomainParameters};
use qcontact::evolve::{evolve, uniform_grid, EvolveOptions, StaticGenerator};
use qcontact::model::{build_qxp_hamiltonian, QxpParameters};
use qcontact::pump::{aah_schedule, rydberg_pump_detunings, PumpProgram};
use qcontact::state::{Basis, QuantumState};
use qcontact::topology::{all_chern_numbers, localization_length, winding_number, ChernGrid, SshPhase};

fn coupling() -> impl Strategy<Value = f64> {
    prop_oneof![-5.0..-0.2f64, 0.2..5.0f64]
}

fn seeded(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(coupling(), n - 1),
        prop::collection::vec(-3.0..3.0f64, n - 1),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spin_and_domain_dynamics_agree(n in 3usize..=6, seed in any::<u64>()) {
        let mut rng = seed;
        let mut next = || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((rng >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
        };
        let hop: Vec<f64> = (1..n).map(|_| next()).collect();
        let delta: Vec<f64> = (1..n).map(|_| next()).collect();
        let qxp = QxpParameters::seeded(&hop, &delta).unwrap();
        let dom = DomainParameters::from_qxp(&qxp).unwrap();
        let grid = uniform_grid(4.0, 9);
        let spin = evolve(
            &StaticGenerator(build_qxp_hamiltonian(&qxp).unwrap()),
            &QuantumState::seed(Basis::Spin { n_sites: n }).unwrap(),
            &grid,
            &EvolveOptions::with_tol(1e-10),
        ).unwrap();
        let single = evolve(
            &StaticGenerator(build_domain_hamiltonian(&dom).unwrap()),
            &QuantumState::seed(Basis::Domain { n }).unwrap(),
            &grid,
            &EvolveOptions::with_tol(1e-10),
        ).unwrap();
        prop_assert!(spin.record.max_population_difference(&single.record) < 1e-8);
        prop_assert!(spin.record.leakage.iter().all(|l| l.abs() < 1e-10));
    }

    #[test]
    fn hamiltonians_are_hermitian(n in 2usize..=7, (hop, delta) in seeded(7)) {
        let qxp = QxpParameters::seeded(&hop[..n - 1], &delta[..n - 1]).unwrap();
        let h = build_qxp_hamiltonian(&qxp).unwrap();
        prop_assert!(h.hermiticity_defect() < 1e-14);
        let d = build_domain_hamiltonian(&DomainParameters::from_qxp(&qxp).unwrap()).unwrap();
        prop_assert!(d.hermiticity_defect() < 1e-14);
    }

    #[test]
    fn norm_and_energy_are_conserved((hop, delta) in seeded(6), t in 0.5..20.0f64) {
        let qxp = QxpParameters::seeded(&hop, &delta).unwrap();
        let h = build_qxp_hamiltonian(&qxp).unwrap();
        let scale = h.max_abs();
        let amps: Vec<C64> = (0..64).map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let psi = QuantumState::normalized(Basis::Spin { n_sites: 6 }, amps).unwrap();
        let ev = evolve(&StaticGenerator(h), &psi, &uniform_grid(t, 5), &EvolveOptions::default()).unwrap();
        prop_assert!(ev.record.max_norm_drift() < 1e-9);
        prop_assert!(ev.record.max_energy_drift().unwrap() < 1e-8 * scale);
    }

    #[test]
    fn projection_conserves_probability(n in 2usize..=8, m_frac in 0.0..1.0f64) {
        let m = 1 + ((n - 1) as f64 * m_frac) as usize;
        let psi = QuantumState::domain_fock(Basis::Spin { n_sites: n }, m).unwrap();
        let d = project_to_domain(&psi).unwrap();
        prop_assert_eq!(d.sector_population(), 1.0);
        prop_assert_eq!(d.populations()[m - 1], 1.0);
    }

    #[test]
    fn winding_is_zero_or_one(v in coupling(), w in coupling()) {
        prop_assume!((v.abs() - w.abs()).abs() > 1e-3);
        let nu = winding_number(v, w, 128).unwrap();
        let phase = localization_length(v, w).unwrap().phase;
        prop_assert_eq!(nu == 1, phase == SshPhase::Topological);
        prop_assert!(nu == 0 || nu == 1);
    }

    #[test]
    fn rydberg_detunings_are_differences(eta0 in -20.0..-1.0f64, t in 0.0..500.0f64, j in 2usize..12) {
        let s = aah_schedule(1.0, eta0, PumpProgram::constant(0.02));
        let pump = rydberg_pump_detunings(&s);
        let diff = s.eta(j, t) - s.eta(j - 1, t);
        prop_assert!((pump.delta(j, t) - diff).abs() < 1e-9 * eta0.abs());
        prop_assert!(pump.delta(j, t).abs() <= pump.delta_max * (1.0 + 1e-12));
    }

    #[test]
    fn classical_probabilities_stay_physical(
        p in prop::collection::vec(0.0..=1.0f64, 2..8),
        gf in 0.0..5.0f64,
        gamma in 0.0..5.0f64,
    ) {
        let traj = classical_evolve(&ClassicalState::new(p).unwrap(), gf, gamma, &uniform_grid(5.0, 6)).unwrap();
        for row in &traj.p {
            prop_assert!(row.iter().all(|x| (0.0..=1.0).contains(x)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn chern_numbers_sum_to_zero(lambda0 in 0.5..2.0f64, eta0 in prop_oneof![-15.0..-3.0f64, 3.0..15.0f64]) {
        let s = aah_schedule(lambda0, eta0, PumpProgram::constant(0.02));
        let c = all_chern_numbers(&s, &ChernGrid::new(24, 24)).unwrap();
        prop_assert_eq!(c.iter().sum::<i64>(), 0);
        let finer = all_chern_numbers(&s, &ChernGrid::new(40, 40)).unwrap();
        prop_assert_eq!(c, finer);
    }
}
