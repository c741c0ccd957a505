use std::f64::consts::TAU;

use nahn_core::skin::{site_density, DEFAULT_THRESHOLD, DEFAULT_WINDOW_FRACTION};
use nahn_core::topology::winding_probe;
use nahn_core::{
    abelian_control, analytic_eigenvalues, bloch_hamiltonian, classify_localization, gamma, obc_eigenstates,
    real_space_hamiltonian, BoundaryCondition, ComplexMatrix, EigenstateSet, GaugeVector, KGrid, Localization,
    ModelParams,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(p: &ModelParams, sites: usize) -> nahn_core::LocalizationReport {
    let states = obc_eigenstates(p, sites).unwrap();
    classify_localization(&states, DEFAULT_WINDOW_FRACTION, DEFAULT_THRESHOLD).unwrap()
}

#[test]
fn hermitian_chain_is_extended() {
    let sites = 100;
    let p = ModelParams::new(1.0, 0.5, 0.5, GaugeVector::X, GaugeVector::X).unwrap();
    let states = obc_eigenstates(&p, sites).unwrap();
    let peak = states.densities.iter().flatten().copied().fold(0.0, f64::max);
    assert!(peak < 5.0 / sites as f64, "peak density {peak}");
    assert!(gamma(&states, DEFAULT_WINDOW_FRACTION).unwrap().abs() < 1e-6);
}

#[test]
fn p1_piles_up_on_the_right() {
    let p1 = ModelParams::standard(1.0, 1.0, 3.0).unwrap();
    let states = obc_eigenstates(&p1, 100).unwrap();
    let r = classify_localization(&states, DEFAULT_WINDOW_FRACTION, DEFAULT_THRESHOLD).unwrap();
    assert!(r.classes.iter().all(|c| *c == Localization::Right));
    assert!(r.is_monopolar_right() && !r.bipolar);
    assert!(r.gamma < -0.8, "gamma {}", r.gamma);
    assert!(gamma(&states.mirrored(), DEFAULT_WINDOW_FRACTION).unwrap() > 0.8);
}

#[test]
fn p3_is_bipolar_at_every_size() {
    let p3 = ModelParams::standard(1.0, 1.2, 0.9).unwrap();
    for sites in [60, 100, 140] {
        let r = report(&p3, sites);
        assert!(r.bipolar, "N={sites}: {} left, {} right", r.left_count, r.right_count);
        assert!(r.gamma.abs() < 0.2, "N={sites}: gamma {}", r.gamma);
    }
}

#[test]
fn mirrored_chain_negates_gamma() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let sites = 40;
    for _ in 0..6 {
        let g = |rng: &mut ChaCha8Rng| {
            GaugeVector::normalized(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
            .unwrap()
        };
        let (dl, dr) = (g(&mut rng), g(&mut rng));
        // strong nonreciprocity makes open-chain eigenvectors exponentially ill conditioned
        let (tl, tr) = (rng.gen_range(0.6..1.0), rng.gen_range(0.6..1.0));
        let p = ModelParams::new(1.0, tl, tr, dl, dr).unwrap();
        let h = real_space_hamiltonian(&p, sites, BoundaryCondition::Obc).unwrap();
        let flip = |i: usize| 2 * (sites - 1 - i / 2) + i % 2;
        let hm = ComplexMatrix::from_fn(2 * sites, |i, j| h[(flip(i), flip(j))]);
        let states = EigenstateSet::from_chain(&h).unwrap();
        let a = gamma(&states, DEFAULT_WINDOW_FRACTION).unwrap();
        let b = gamma(&EigenstateSet::from_chain(&hm).unwrap(), DEFAULT_WINDOW_FRACTION).unwrap();
        assert!((a + b).abs() < 1e-6, "{a} vs {b}");
        assert!((gamma(&states.mirrored(), DEFAULT_WINDOW_FRACTION).unwrap() + a).abs() < 1e-12);
    }
}

#[test]
fn density_ignores_phase_and_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let v: Vec<Complex64> = (0..40)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let base = site_density(&v, 20);
    assert!((base.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    for _ in 0..10 {
        let f = Complex64::from_polar(rng.gen_range(0.01..100.0), rng.gen_range(0.0..TAU));
        let w: Vec<Complex64> = v.iter().map(|z| z * f).collect();
        let d = site_density(&w, 20);
        assert!(base.iter().zip(&d).all(|(a, b)| (a - b).abs() < 1e-14));
    }
}

fn nonzero_windings(p: &ModelParams) -> Vec<i32> {
    let grid = KGrid::default();
    let spec: Vec<Complex64> = grid
        .values()
        .flat_map(|k| {
            let (a, b) = analytic_eigenvalues(p, k);
            [a, b]
        })
        .collect();
    winding_probe(|k| bloch_hamiltonian(p, k), &spec, 24, &grid)
        .into_iter()
        .filter_map(|(_, w)| w.ok())
        .filter(|w| *w != 0)
        .collect()
}

#[test]
fn winding_signs_predict_localization() {
    // negative windings pile states on the right edge, positive on the left
    let mut checked = 0;
    for i in 0..6 {
        for j in 0..6 {
            let (tl, tr) = (0.35 + 0.6 * i as f64, 0.35 + 0.6 * j as f64);
            let p = ModelParams::standard(1.0, tl, tr).unwrap();
            let ws = nonzero_windings(&p);
            if ws.is_empty() {
                continue;
            }
            let (neg, pos) = (ws.iter().any(|w| *w < 0), ws.iter().any(|w| *w > 0));
            let r = report(&p, 60);
            match (neg, pos) {
                (true, false) => assert!(r.right_count > r.left_count && r.gamma < 0.0, "({tl}, {tr})"),
                (false, true) => assert!(r.left_count > r.right_count && r.gamma > 0.0, "({tl}, {tr})"),
                _ => assert!(r.left_count > 0 && r.right_count > 0, "({tl}, {tr})"),
            }
            checked += 1;
        }
    }
    assert!(checked >= 20, "only {checked} points carried a winding");
}

#[test]
fn abelian_gauge_is_never_bipolar() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let samples: Vec<(f64, f64)> = (0..24)
        .map(|_| (rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0)))
        .collect();
    assert!(abelian_control(&samples, 40).unwrap());
}

#[test]
fn swapped_hoppings_flip_monopolar_side() {
    let right = report(&ModelParams::standard(1.0, 1.0, 3.0).unwrap(), 100);
    let left = report(&ModelParams::standard(1.0, 3.0, 1.0).unwrap(), 100);
    assert!(left.gamma > 0.8 && left.is_monopolar_left());
    assert!((left.gamma + right.gamma).abs() < 1e-6);
    for (tl, tr) in [(0.5, 2.0), (1.0, 2.5)] {
        let a = report(&ModelParams::standard(1.0, tl, tr).unwrap(), 60).gamma;
        let b = report(&ModelParams::standard(1.0, tr, tl).unwrap(), 60).gamma;
        assert!((a + b).abs() < 1e-3, "({tl}, {tr}): {a} vs {b}");
    }
}
