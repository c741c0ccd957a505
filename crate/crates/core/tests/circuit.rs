use std::f64::consts::TAU;

use nahn_core::circuit::{
    admittance_bloch, admittance_to_nf, circuit_chain, circuit_to_model, m_coefficients, monte_carlo,
    resonance_frequency, simulated_measurement, CircuitParams, CirculantBloch, MeasurementSetup, NoiseModel, Protocol,
};
use nahn_core::eigen::eig_dense;
use nahn_core::skin::{DEFAULT_THRESHOLD, DEFAULT_WINDOW_FRACTION};
use nahn_core::topology::braiding_degree_of;
use nahn_core::{
    analytic_eigenvalues, bloch_hamiltonian, classify_localization, pauli_combination, BoundaryCondition,
    ComplexMatrix, EigenstateSet, GaugeVector, KGrid,
};
use num_complex::Complex64;

const SAMPLE_SETS: [(f64, f64); 4] = [(20.0, 30.0), (12.0, 9.0), (39.0, 30.0), (10.0, 30.0)];

fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// `C0 sx + C1 e^{ik} sz + C2 e^{-ik} sx` in nF, written out by hand.
fn lattice_part(c: &CircuitParams, k: f64) -> ComplexMatrix {
    let f = Complex64::from_polar(1.0, k);
    let (a, b, d) = (c.c0_nf, c.c1_nf * f, c.c2_nf * f.conj());
    ComplexMatrix::from_rows(&[vec![b, a + d], vec![a + d, -b]]).unwrap()
}

#[test]
fn admittance_matches_lattice_at_resonance() {
    for (c1, c2) in SAMPLE_SETS {
        let c = CircuitParams::experiment(c1, c2);
        let w0 = resonance_frequency(&c);
        let (m0, m1) = m_coefficients(&c, w0);
        assert!(m1.abs() <= 1e-15 * c1 * 1e-9);
        let m0_nf = m0 / 1e-9;
        let grid = KGrid::default();
        for k in grid.values() {
            let j = admittance_to_nf(&admittance_bloch(&c, w0, k), w0);
            let diff = j.shifted(-m0_nf).sub(&lattice_part(&c, k));
            assert!(diff.max_abs() < 1e-12, "({c1}, {c2}) k={k}: {}", diff.max_abs());
        }
    }
}

#[test]
fn model_mapping_reproduces_admittance() {
    for (c1, c2) in SAMPLE_SETS {
        let c = CircuitParams::experiment(c1, c2);
        let cm = circuit_to_model(&c).unwrap();
        assert_eq!(cm.params.d_left, GaugeVector::Z);
        assert_eq!(cm.params.d_right, GaugeVector::X);
        for j in 0..64 {
            let k = TAU * j as f64 / 64.0;
            let expected = bloch_hamiltonian(&cm.params, k).shifted(cm.shift).scale(cm.scale);
            let got = admittance_bloch(&c, cm.omega0, k);
            assert!(got.sub(&expected).max_abs() <= 1e-12 * got.max_abs());
        }
    }
}

#[test]
fn pbc_network_spectrum_is_bloch_sampling() {
    let sites = 19;
    for (c1, c2) in SAMPLE_SETS {
        let c = CircuitParams::experiment(c1, c2);
        let cm = circuit_to_model(&c).unwrap();
        let j = circuit_chain(&c, sites, BoundaryCondition::Pbc, cm.omega0).unwrap();
        let s = eig_dense(&j, true).unwrap();
        assert!(s.max_residual() <= 1e-10);
        // eigenvalues of J are i omega0 (E + m0) with E from the closed form
        let expected: Vec<Complex64> = (0..sites)
            .flat_map(|m| {
                let (a, b) = analytic_eigenvalues(&cm.params, TAU * m as f64 / sites as f64);
                [(a + cm.shift) * cm.scale, (b + cm.shift) * cm.scale]
            })
            .collect();
        let scale = expected.iter().map(|e| e.norm()).fold(0.0, f64::max);
        assert!(multiset_distance(&s.eigenvalues, &expected) <= 1e-8 * scale);
    }
}

fn nu_of(c: &CircuitParams) -> i32 {
    let w0 = resonance_frequency(c);
    braiding_degree_of(|k| admittance_bloch(c, w0, k), &KGrid::default()).unwrap()
}

#[test]
fn braiding_panels() {
    assert_eq!(nu_of(&CircuitParams::experiment(20.0, 30.0)), -2);
    assert_eq!(nu_of(&CircuitParams::experiment(12.0, 9.0)), 0);
    assert_eq!(nu_of(&CircuitParams::experiment(39.0, 30.0)), 2);
}

#[test]
fn braiding_read_from_finite_ring() {
    for ((c1, c2), nu) in [((20.0, 30.0), -2), ((12.0, 9.0), 0), ((39.0, 30.0), 2)] {
        let c = CircuitParams::experiment(c1, c2);
        let j = circuit_chain(&c, 19, BoundaryCondition::Pbc, resonance_frequency(&c)).unwrap();
        let bloch = CirculantBloch::from_chain(&j).unwrap();
        assert_eq!(braiding_degree_of(|k| bloch.at(k), &KGrid::default()).unwrap(), nu);
    }
}

fn open_report(c1: f64, c2: f64) -> nahn_core::LocalizationReport {
    let c = CircuitParams::experiment(c1, c2);
    let j = circuit_chain(&c, 47, BoundaryCondition::Obc, resonance_frequency(&c)).unwrap();
    let states = EigenstateSet::from_chain(&j).unwrap();
    classify_localization(&states, DEFAULT_WINDOW_FRACTION, DEFAULT_THRESHOLD).unwrap()
}

#[test]
fn skin_panels() {
    let mono = open_report(10.0, 30.0);
    assert!(
        mono.is_monopolar_right(),
        "{} left / {} right",
        mono.left_count,
        mono.right_count
    );
    assert!(mono.gamma < -0.8);
    let bi = open_report(12.0, 9.0);
    assert!(bi.bipolar, "{} left / {} right", bi.left_count, bi.right_count);
}

#[test]
fn noiseless_measurement_round_trip() {
    for protocol in [Protocol::PbcUnitCell, Protocol::ObcAllNodes] {
        for (c1, c2) in SAMPLE_SETS {
            let c = CircuitParams::experiment(c1, c2);
            let setup = MeasurementSetup::at_drive(c, 19);
            let truth = circuit_chain(&c, 19, protocol.boundary(), setup.omega).unwrap();
            let got = simulated_measurement(&setup, protocol, None).unwrap();
            let err = got.sub(&truth).max_abs() / truth.max_abs();
            assert!(err < 1e-9, "{protocol:?} ({c1}, {c2}): {err}");
        }
    }
}

#[test]
fn zero_sigma_noise_is_noiseless() {
    let setup = MeasurementSetup::at_drive(CircuitParams::experiment(20.0, 30.0), 19);
    let clean = simulated_measurement(&setup, Protocol::ObcAllNodes, None).unwrap();
    let noise = NoiseModel {
        component_rel_sigma: 0.0,
        seed: 3,
    };
    let zero = simulated_measurement(&setup, Protocol::ObcAllNodes, Some(noise)).unwrap();
    assert!(zero.sub(&clean).max_abs() <= 1e-12 * clean.max_abs());
}

#[test]
fn small_tolerance_keeps_braiding() {
    let setup = MeasurementSetup::at_drive(CircuitParams::experiment(20.0, 30.0), 19);
    let seeds: Vec<u64> = (0..8).collect();
    let verdicts = monte_carlo(&seeds, |seed| {
        let noise = NoiseModel {
            component_rel_sigma: 0.01,
            seed,
        };
        let j = simulated_measurement(&setup, Protocol::PbcUnitCell, Some(noise)).unwrap();
        let bloch = CirculantBloch::from_chain(&j).unwrap();
        braiding_degree_of(|k| bloch.at(k), &KGrid::default())
    });
    assert_eq!(verdicts.iter().map(|(s, _)| *s).collect::<Vec<_>>(), seeds);
    let kept = verdicts.iter().filter(|(_, v)| *v == Ok(-2)).count();
    assert!(kept >= 7, "{verdicts:?}");
}

#[test]
fn sigma_components_are_pauli() {
    // guards the hand-written lattice part above
    let c = CircuitParams::experiment(20.0, 30.0);
    let k = 0.3;
    let f = Complex64::from_polar(1.0, k);
    let sx = pauli_combination(&GaugeVector::X);
    let sz = pauli_combination(&GaugeVector::Z);
    let expected = ComplexMatrix::from_fn(2, |r, q| {
        sx[(r, q)] * (c.c0_nf + c.c2_nf * f.conj()) + sz[(r, q)] * (c.c1_nf * f)
    });
    assert!(lattice_part(&c, k).sub(&expected).max_abs() < 1e-15);
}
