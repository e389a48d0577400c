use dce_core::fock::{
    annihilation, creation, excitation_parity, mandel_q, truncation_check, HilbertSpace,
    LinearOperator, Moments, StateVector, Symmetry,
};
use dce_core::model::{
    counter_rotating_hamiltonian, dicke_network_hamiltonian, dicke_to_ladder,
    effective_strong_modulation_hamiltonian, lab_hamiltonian, rwa_hamiltonian,
    two_level_rotated_hamiltonian, DetectorSpec, FrameTag, Hamiltonian, Ladder, ModulationSpec,
    SqueezeForm,
};
use dce_core::Complex64;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn ladder_strategy() -> impl Strategy<Value = DetectorSpec> {
    (1usize..=4, prop::collection::vec(-0.05f64..0.05, 3), prop::collection::vec(-0.05f64..0.05, 3))
        .prop_map(|(levels, couplings, detunings)| {
            if levels == 1 {
                return DetectorSpec::Empty;
            }
            let mut energies = vec![0.0];
            for j in 1..levels {
                energies.push(energies[j - 1] + 1.0 - detunings[j - 1]);
            }
            DetectorSpec::Ladder(Ladder::new(energies, couplings[..levels - 1].to_vec()).unwrap())
        })
}

fn coherent(space: HilbertSpace, alpha: f64) -> StateVector {
    let mut amps = vec![c(0.0); space.dim()];
    let mut term = libm::exp(-alpha * alpha / 2.0);
    for n in 0..=space.n_max() {
        amps[space.index(1, n).unwrap()] = c(term);
        term *= alpha / ((n + 1) as f64).sqrt();
    }
    StateVector::from_amplitudes(space, amps).unwrap()
}

fn dense(op: &LinearOperator) -> DMatrix<Complex64> {
    let d = op.dim();
    DMatrix::from_row_slice(d, d, &op.to_dense())
}

#[test]
fn coherent_state_is_poissonian() {
    let space = HilbertSpace::new(1, 80).unwrap();
    for alpha in [0.5, 1.0, 2.0, 3.0] {
        let q = mandel_q(&coherent(space, alpha)).unwrap();
        assert!(q.abs() < 1e-8, "alpha {alpha}: Q = {q}");
    }
}

#[test]
fn squeezed_vacuum_tail_is_negligible() {
    // Exact squeezed-vacuum Fock amplitudes with sinh²(s) = 13.2.
    let space = HilbertSpace::new(1, 512).unwrap();
    let s = libm::asinh(13.2f64.sqrt());
    let tanh = libm::tanh(s);
    let mut amps = vec![c(0.0); space.dim()];
    let mut log_amp = -0.5 * libm::log(libm::cosh(s));
    for k in 0..=256 {
        amps[2 * k] = c(if k % 2 == 0 { 1.0 } else { -1.0 } * libm::exp(log_amp));
        log_amp += libm::log(tanh) + 0.5 * libm::log(((2 * k + 1) * (2 * k + 2)) as f64)
            - libm::log(2.0 * (k + 1) as f64);
    }
    let state = StateVector::from_amplitudes(space, amps).unwrap();
    assert!((state.norm_sqr() - 1.0).abs() < 1e-9);
    let m = Moments::from_state(&state);
    // Mass above the cutoff is about 9.1e-10, so the mean falls short by ~5e-7.
    assert!((m.n_mean() - 13.2).abs() < 1e-6);
    let top = truncation_check(&state, 16).unwrap();
    assert!((top - 7.508249178744615e-10).abs() < 1e-15, "{top}");
}

#[test]
fn rwa_parity_commutator_is_exact() {
    let space = HilbertSpace::new(4, 10).unwrap();
    let det = DetectorSpec::Ladder(Ladder::new(vec![0.0, 1.01, 1.99, 3.05], vec![0.01, 0.02, 0.015]).unwrap());
    let modulation = ModulationSpec::new(1.0, 0.003).unwrap().with_shift(0.002);
    let h = rwa_hamiltonian(&det, &modulation, space).unwrap();
    let parity = excitation_parity(space);
    assert!(h.commutator(&parity).max_abs() < 1e-12);
}

#[test]
fn dicke_network_matches_mapped_ladder_spectrum() {
    for atoms in 1..=3 {
        let network = DetectorSpec::DickeNetwork { atoms, omega: 1.0, g: 0.01 };
        let modulation = ModulationSpec::new(1.0, 0.0).unwrap();
        let n_max = 6;
        let explicit = dicke_network_hamiltonian(
            &network,
            &modulation,
            HilbertSpace::new(1 << atoms, n_max).unwrap(),
        )
        .unwrap();
        let mapped = dicke_to_ladder(&network).unwrap();
        let ladder_h =
            rwa_hamiltonian(&mapped, &modulation, HilbertSpace::new(atoms + 1, n_max).unwrap()).unwrap();
        let full: Vec<f64> = SymmetricEigen::new(dense(&explicit)).eigenvalues.iter().copied().collect();
        let sym: Vec<f64> = SymmetricEigen::new(dense(&ladder_h)).eigenvalues.iter().copied().collect();
        // Every symmetric-sector eigenvalue appears in the full network spectrum.
        for lambda in sym {
            let nearest = full.iter().map(|x| (x - lambda).abs()).fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-10, "atoms {atoms}: {lambda} missing ({nearest})");
        }
    }
}

fn all_hamiltonians(det: &DetectorSpec, modulation: &ModulationSpec, space: HilbertSpace) -> Vec<Hamiltonian> {
    let mut out = vec![
        lab_hamiltonian(det, modulation, space).unwrap(),
        lab_hamiltonian(det, &modulation.with_squeeze(SqueezeForm::Exact), space).unwrap(),
        counter_rotating_hamiltonian(det, modulation, space).unwrap(),
        Hamiltonian::time_independent(
            FrameTag::RwaInteraction,
            rwa_hamiltonian(det, modulation, space).unwrap(),
        ),
    ];
    if space.n_levels() == 2 {
        out.push(two_level_rotated_hamiltonian(det, modulation, space).unwrap());
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn commutator_is_identity_below_cutoff(levels in 1usize..4, n_max in 2usize..20) {
        let space = HilbertSpace::new(levels, n_max).unwrap();
        let comm = annihilation(space).commutator(&creation(space));
        for idx in 0..space.dim() {
            let (_, n) = space.decompose(idx);
            if n < n_max {
                for col in 0..space.dim() {
                    let expected = if col == idx { 1.0 } else { 0.0 };
                    prop_assert!((comm.get(idx, col) - c(expected)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn assembled_hamiltonians_are_hermitian(
        det in ladder_strategy(),
        eps in 1e-4f64..5e-3,
        r in -0.01f64..0.01,
        times in prop::collection::vec(0.0f64..1e4, 10),
    ) {
        let space = HilbertSpace::new(det.levels(), 6).unwrap();
        let modulation = ModulationSpec::new(1.0, eps).unwrap().with_shift(r);
        for h in all_hamiltonians(&det, &modulation, space) {
            prop_assert!(h.hermiticity_defect(&times) < 1e-12);
        }
    }

    #[test]
    fn strong_modulation_hamiltonian_is_hermitian(
        levels in 2usize..=4,
        xi in 0.01f64..0.3,
    ) {
        let eps = 0.004;
        let g = xi * 2.0 * eps / 4.0;
        let det = DetectorSpec::Ladder(Ladder::equidistant(1.0, vec![g; levels - 1]).unwrap());
        let space = HilbertSpace::new(levels, 8).unwrap();
        let h = effective_strong_modulation_hamiltonian(&det, &ModulationSpec::new(1.0, eps).unwrap(), space).unwrap();
        prop_assert!(h.symmetry_defect(Symmetry::Hermitian) < 1e-12);
    }

    #[test]
    fn rwa_commutes_with_parity(det in ladder_strategy(), eps in 0.0f64..5e-3, r in -0.01f64..0.01) {
        let space = HilbertSpace::new(det.levels(), 7).unwrap();
        let modulation = ModulationSpec::new(1.0, eps).unwrap().with_shift(r);
        let h = rwa_hamiltonian(&det, &modulation, space).unwrap();
        prop_assert!(h.commutator(&excitation_parity(space)).max_abs() < 1e-12);
    }

    #[test]
    fn moments_are_normalized(
        levels in 1usize..4,
        n_max in 2usize..12,
        re in prop::collection::vec(-1.0f64..1.0, 48),
        im in prop::collection::vec(-1.0f64..1.0, 48),
    ) {
        let space = HilbertSpace::new(levels, n_max).unwrap();
        let amps: Vec<Complex64> = (0..space.dim()).map(|i| Complex64::new(re[i % 48], im[(i * 7) % 48])).collect();
        prop_assume!(amps.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-3);
        let mut state = StateVector::from_amplitudes(space, amps).unwrap();
        state.normalize();
        let m = Moments::from_state(&state);
        prop_assert!((m.level_populations.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!((m.photon_distribution.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let sample = m.sample(0.0);
        prop_assert!(sample.n_mean >= 0.0 && sample.xvar_plus > 0.0 && sample.xvar_minus > 0.0);
    }
}
