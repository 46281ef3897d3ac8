//! Results checked against independent computations: dense
//! diagonalization, closed forms derived by hand and an independent
//! Wannier-centre calculation of the pumped charge.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use qcontact::classical::{classical_evolve, ClassicalState};
use qcontact::domain::{build_domain_hamiltonian, DomainParameters};
use qcontact::evolve::{evolve, uniform_grid, EvolveOptions, FnGenerator, Integrator, RydbergGenerator, StaticGenerator};
use qcontact::model::{build_qxp_hamiltonian, QxpParameters, RydbergDrive, RydbergParameters};
use qcontact::pump::{aah_schedule, PumpProgram};
use qcontact::sparse::SparseOperator;
use qcontact::state::{Basis, QuantumState};
use qcontact::topology::{all_chern_numbers, exact_splitting, hybridization, ChernGrid};

/// `exp(−iHt) ψ` by dense diagonalization of a real symmetric `H`.
fn dense_propagate(h: &DMatrix<f64>, psi: &[C64], t: f64) -> Vec<C64> {
    let eig = SymmetricEigen::new(h.clone());
    let v = eig.eigenvectors.map(|x| C64::new(x, 0.0));
    let psi = DVector::from_column_slice(psi);
    let mut c = v.adjoint() * psi;
    for (ci, e) in c.iter_mut().zip(eig.eigenvalues.iter()) {
        *ci *= C64::from_polar(1.0, -e * t);
    }
    (v * c).iter().copied().collect()
}

fn real_dense(op: &SparseOperator) -> DMatrix<f64> {
    op.to_dense().map(|z| z.re)
}

fn populations(psi: &[C64]) -> Vec<f64> {
    psi.iter().map(|a| a.norm_sqr()).collect()
}

#[test]
fn spin_evolution_matches_dense_diagonalization() {
    let qxp = QxpParameters::new(5, vec![0.0, 1.0, 10.0, 1.0, 10.0], vec![0.0, 0.3, -0.7, 1.1, 0.2]).unwrap();
    let h = build_qxp_hamiltonian(&qxp).unwrap();
    let dense = real_dense(&h);
    let psi0 = QuantumState::seed(Basis::Spin { n_sites: 5 }).unwrap();
    let grid = uniform_grid(12.0, 7);
    let opts = EvolveOptions {
        keep_states: true,
        ..EvolveOptions::with_tol(1e-10)
    };
    let ev = evolve(&StaticGenerator(h), &psi0, &grid, &opts).unwrap();
    for (t, state) in grid.iter().zip(&ev.states) {
        let exact = dense_propagate(&dense, psi0.amps(), *t);
        let err = state.amps().iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "t = {t}: {err}");
    }
}

#[test]
fn rydberg_evolution_matches_dense_diagonalization() {
    let drive = RydbergDrive::Static {
        lambda: vec![0.0, 1.0, 2.0, 1.0],
        delta: vec![0.0; 4],
    };
    let params = RydbergParameters::facilitated(4, -30.0, drive).unwrap();
    let gen = RydbergGenerator::new(params.clone()).unwrap();
    let dense = real_dense(&qcontact::model::build_rydberg_hamiltonian(&params, 0.0).unwrap());
    let psi0 = QuantumState::seed(Basis::Spin { n_sites: 4 }).unwrap();
    let grid = uniform_grid(6.0, 4);
    let ev = evolve(&gen, &psi0, &grid, &EvolveOptions { keep_states: true, ..Default::default() }).unwrap();
    for (t, state) in grid.iter().zip(&ev.states) {
        let exact = populations(&dense_propagate(&dense, psi0.amps(), *t));
        let got = populations(state.amps());
        for (a, b) in got.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-8, "t = {t}");
        }
    }
}

#[test]
fn two_site_rabi_oscillation() {
    // P_2(t) = sin²(λ t)
    let lambda = 0.7;
    let h = build_domain_hamiltonian(&DomainParameters::hopping(vec![lambda])).unwrap();
    let grid = uniform_grid(10.0, 41);
    let ev = evolve(&StaticGenerator(h), &QuantumState::seed(Basis::Domain { n: 2 }).unwrap(), &grid, &Default::default())
        .unwrap();
    for (t, p) in grid.iter().zip(&ev.record.domain_populations) {
        assert_relative_eq!(p[1], (lambda * t).sin().powi(2), epsilon = 1e-9);
    }
}

#[test]
fn four_site_ssh_splitting_closed_form() {
    // det(E − H) = E⁴ − (2v² + w²) E² + v⁴ for hops (v, w, v)
    for (v, w) in [(1.0f64, 10.0f64), (1.0, 2.0), (0.5, 3.0), (2.0, 0.3)] {
        let b = 2.0 * v * v + w * w;
        let e_small = ((b - (b * b - 4.0 * v.powi(4)).sqrt()) / 2.0).sqrt();
        let (p, m) = exact_splitting(4, v, w).unwrap();
        assert_relative_eq!(p, e_small, max_relative = 1e-10);
        assert_relative_eq!(m, -e_small, max_relative = 1e-10);
    }
    let (p, _) = exact_splitting(4, 1.0, 10.0).unwrap();
    assert_relative_eq!(p, (104f64.sqrt() - 10.0) / 2.0, max_relative = 1e-12);
}

#[test]
fn ssh_closed_form_against_hand_values() {
    // ξ = 1/ln 10, E = e^{−3 ln 10} = 10⁻³ for N = 4
    let r = hybridization(4, 1.0, 10.0, 1.0).unwrap();
    assert_relative_eq!(r.xi, 1.0 / 10f64.ln(), max_relative = 1e-14);
    assert_relative_eq!(r.e_plus, 1e-3, max_relative = 1e-12);
    assert_relative_eq!(r.t_hyb, PI * 1e3, max_relative = 1e-12);
}

#[test]
fn long_ssh_chain_splitting_decays_exponentially() {
    // edge modes decay by v/w per unit cell, so two more sites scale the
    // splitting by v/w
    let ratios: Vec<f64> = [10, 12, 14]
        .iter()
        .map(|&n| exact_splitting(n, 1.0, 3.0).unwrap().0)
        .collect::<Vec<_>>()
        .windows(2)
        .map(|w| w[1] / w[0])
        .collect();
    for r in ratios {
        assert_relative_eq!(r, 1.0 / 3.0, max_relative = 0.01);
    }
}

/// Wannier-centre shift per pump cycle, in unit cells, from Wilson loops of
/// a Bloch Hamiltonian assembled here from the modulation formulas.
fn wannier_shift(eta0: f64, band: usize) -> f64 {
    let angle = |m: usize, phi: f64| phi + 4.0 * PI * (m + 1) as f64 / 3.0;
    let bloch = |k: f64, phi: f64| {
        let mut h = DMatrix::<C64>::zeros(3, 3);
        for s in 0..3 {
            h[(s, s)] = C64::new(eta0 * angle(s + 1, phi).cos(), 0.0);
        }
        // hop λ_m couples domain sites m − 1 and m
        h[(0, 1)] = C64::new(angle(2, phi).sin(), 0.0);
        h[(1, 2)] = C64::new(angle(3, phi).sin(), 0.0);
        h[(2, 0)] = C64::from_polar(angle(4, phi).sin(), k);
        h[(1, 0)] = h[(0, 1)].conj();
        h[(2, 1)] = h[(1, 2)].conj();
        h[(0, 2)] = h[(2, 0)].conj();
        h
    };
    let state = |k: f64, phi: f64| {
        let eig = SymmetricEigen::new(bloch(k, phi));
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        eig.eigenvectors.column(order[band]).into_owned()
    };
    let (n_k, n_phi) = (60, 240);
    let mut centre = Vec::new();
    for ip in 0..=n_phi {
        let phi = 2.0 * PI * ip as f64 / n_phi as f64;
        let vs: Vec<_> = (0..n_k).map(|ik| state(2.0 * PI * ik as f64 / n_k as f64, phi)).collect();
        let mut w = C64::new(1.0, 0.0);
        for ik in 0..n_k {
            w *= vs[ik].dotc(&vs[(ik + 1) % n_k]);
        }
        centre.push(-w.arg() / (2.0 * PI));
    }
    let mut shift = 0.0;
    for pair in centre.windows(2) {
        let mut d = pair[1] - pair[0];
        d -= d.round();
        shift += d;
    }
    shift
}

#[test]
fn chern_numbers_match_wannier_centre_flow() {
    let s = aah_schedule(1.0, -10.0, PumpProgram::constant(0.02));
    let fukui = all_chern_numbers(&s, &ChernGrid::new(48, 48)).unwrap();
    for (band, c) in fukui.iter().enumerate() {
        let shift = wannier_shift(-10.0, band);
        assert!((shift - *c as f64).abs() < 0.05, "band {band}: Wannier shift {shift}, Chern {c}");
    }
}

#[test]
fn driven_domain_matches_fine_piecewise_constant_propagation() {
    let s = aah_schedule(1.0, -3.0, PumpProgram::constant(0.2));
    let n = 6;
    let gen = FnGenerator {
        dim: n,
        frequency: Some(0.2),
        f: |t: f64| build_domain_hamiltonian(&s.domain_parameters(n, t)),
    };
    let psi0 = QuantumState::domain_fock(Basis::Domain { n }, 2).unwrap();
    let t_end = 8.0;
    let opts = EvolveOptions {
        integrator: Integrator::Magnus4,
        keep_states: true,
        ..EvolveOptions::with_tol(1e-9)
    };
    let ev = evolve(&gen, &psi0, &[0.0, t_end], &opts).unwrap();

    let steps = 4000;
    let dt = t_end / steps as f64;
    let mut psi = psi0.amps().to_vec();
    for i in 0..steps {
        let tm = (i as f64 + 0.5) * dt;
        let h = real_dense(&build_domain_hamiltonian(&s.domain_parameters(n, tm)).unwrap());
        psi = dense_propagate(&h, &psi, dt);
    }
    let got = populations(ev.states.last().unwrap().amps());
    for (a, b) in got.iter().zip(populations(&psi)) {
        assert!((a - b).abs() < 1e-5, "{a} vs {b}");
    }
}

#[test]
fn classical_decay_is_exponential() {
    // without facilitation every p_j decays as e^{−γt}
    let p0 = ClassicalState::new(vec![0.9, 0.0, 0.0]).unwrap();
    let run = classical_evolve(&p0, 0.0, 0.5, &uniform_grid(4.0, 5)).unwrap();
    for (t, p) in run.times.iter().zip(&run.p) {
        assert_relative_eq!(p[0], 0.9 * (-0.5 * t).exp(), max_relative = 1e-9);
    }
}

#[test]
fn classical_matches_independent_integrator() {
    let (gf, gamma) = (1.3, 0.4);
    let p0 = vec![1.0, 0.2, 0.0, 0.5];
    let run = classical_evolve(&ClassicalState::new(p0.clone()).unwrap(), gf, gamma, &[0.0, 3.0]).unwrap();

    let f = |p: &[f64]| -> Vec<f64> {
        (0..p.len())
            .map(|j| {
                let l = if j > 0 { p[j - 1] } else { 0.0 };
                let r = p.get(j + 1).copied().unwrap_or(0.0);
                gf * (l + r - 2.0 * l * r) * (1.0 - 2.0 * p[j]) - gamma * p[j]
            })
            .collect()
    };
    // explicit midpoint with a much smaller step
    let h = 1e-4;
    let mut p = p0;
    for _ in 0..30000 {
        let k1 = f(&p);
        let mid: Vec<f64> = p.iter().zip(&k1).map(|(x, k)| x + 0.5 * h * k).collect();
        let k2 = f(&mid);
        p.iter_mut().zip(&k2).for_each(|(x, k)| *x += h * k);
    }
    for (a, b) in run.p.last().unwrap().iter().zip(&p) {
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }
}

#[test]
fn published_parameter_values() {
    use qcontact::presets::preset;
    use qcontact::pump::rydberg_pump_detunings;

    // δ_max = √3 |η₀| ≈ 17 λ₀ for |η₀| = 10 λ₀
    let pump = rydberg_pump_detunings(&aah_schedule(1.0, -10.0, PumpProgram::constant(0.02)));
    assert_eq!(pump.delta_max.round(), 17.0);

    let fig4 = preset("fig4-pump").unwrap();
    assert_eq!(fig4.detuning().delta_offset, Some(-500.0));
    let fig2 = preset("fig2-trivial").unwrap();
    assert_eq!(
        fig2.couplings,
        Some(qcontact::config::CouplingSpec::Ssh {
            lambda_v: 1.0,
            lambda_w: 0.1
        })
    );
}
