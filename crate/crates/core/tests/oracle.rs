mod common;

use coag_core::generator::{
    assemble_generator, closed_classes, config_from_occupancy, null_space_dimension, stationary_vectors,
};
use coag_core::model::{ChainSpec, JunctionRates, RateTriple};
use coag_core::one_particle::{one_particle_spectrum, Route};
use coag_core::simulator::{enabled_events, LatticeState};
use coag_core::spectrum::{assemble_full_spectrum, parity, spectral_gap, vacuum_energy};
use coag_core::verify::brute_force_comparison;
use common::{random_spec, rng};

fn assembled(spec: &ChainSpec) -> Vec<f64> {
    let sp = one_particle_spectrum(spec).unwrap();
    let omega = vacuum_energy(spec, &sp).unwrap();
    assemble_full_spectrum(&sp, omega, parity(spec)).unwrap()
}

fn assert_matches_brute_force(spec: &ChainSpec) {
    let full = assembled(spec);
    let cmp = brute_force_comparison(spec, Some(&full)).unwrap();
    assert!(cmp.matches().unwrap(), "distance {:?}, imag {}", cmp.distance, cmp.max_imag);
}

#[test]
fn single_site_segments() {
    let r = RateTriple::new(0.7, 1.9, 0.4).unwrap();
    for (l1, l2) in [(1, 1), (1, 3), (3, 1)] {
        assert_matches_brute_force(&ChainSpec::impurity(l1, l2, r, 0.3).unwrap());
    }
}

#[test]
fn pure_coagulation_and_symmetric_rates() {
    // Δ = 0 and p = q put Ω and the parity rule on their boundary cases
    for r in [RateTriple::new(0.8, 2.0, 0.0).unwrap(), RateTriple::new(1.3, 1.3, 0.9).unwrap()] {
        assert_matches_brute_force(&ChainSpec::homogeneous(2, 3, r).unwrap());
    }
}

#[test]
fn matrix_route_when_a_segment_has_no_hopping_in_one_direction() {
    let s1 = RateTriple::new(1.0, 2.0, 0.5).unwrap();
    let s2 = RateTriple::new(0.0, 2.0, 0.5).unwrap();
    let spec = ChainSpec::new(3, 2, s1, s2, JunctionRates::new(0.0, 2.0, 1.0).unwrap());
    let Ok(spec) = spec.and_then(|s| s.ensure_valid().map(|_| s)) else {
        return;
    };
    assert_eq!(one_particle_spectrum(&spec).unwrap().route(), Route::Matrix);
    assert_matches_brute_force(&spec);
}

#[test]
fn larger_random_chains() {
    let mut r = rng(5);
    for n in [7usize, 8] {
        let spec = random_spec(&mut r, n / 2, n - n / 2);
        assert_matches_brute_force(&spec);
    }
}

#[test]
fn gap_is_the_largest_nonzero_brute_force_eigenvalue() {
    let mut r = rng(9);
    for _ in 0..15 {
        let spec = random_spec(&mut r, 2, 3);
        let sp = one_particle_spectrum(&spec).unwrap();
        let omega = vacuum_energy(&spec, &sp).unwrap();
        let gap = spectral_gap(&sp, omega, parity(&spec)).unwrap();
        let brute = brute_force_comparison(&spec, None).unwrap();
        let tol = 1e-10 * sp.min_lambda().abs().max(1.0);
        let want = brute.eigenvalues.iter().map(|z| z.re).filter(|x| x.abs() > tol).fold(f64::NEG_INFINITY, f64::max);
        assert!((gap.value - want).abs() < 1e-8, "{} vs {want}", gap.value);
    }
}

#[test]
fn kernel_dimension_matches_closed_classes() {
    let mut r = rng(13);
    for _ in 0..10 {
        let spec = random_spec(&mut r, 2, 2);
        let gen = assemble_generator(&spec).unwrap();
        let classes = closed_classes(&gen);
        assert_eq!(null_space_dimension(&gen).unwrap(), classes.len());
        for v in stationary_vectors(&gen).unwrap() {
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(v.iter().all(|&x| x >= -1e-12));
            assert!(gen.apply(&v).iter().all(|x| x.abs() < 1e-10));
        }
    }
}

#[test]
fn homogeneous_chain_has_two_stationary_states() {
    let r = RateTriple::from_theta(0.5, 3.0, 0.4).unwrap();
    let gen = assemble_generator(&ChainSpec::homogeneous(3, 3, r).unwrap()).unwrap();
    let classes = closed_classes(&gen);
    assert_eq!(classes.len(), 2);
    assert!(classes.contains(&vec![0]));
}

#[test]
fn event_rates_reconstruct_the_generator_diagonal() {
    let mut r = rng(17);
    for n in 2..=6usize {
        let spec = random_spec(&mut r, n / 2, n - n / 2);
        let gen = assemble_generator(&spec).unwrap();
        for config in 0..1usize << n {
            let occ: Vec<bool> = (0..n).map(|i| (config >> (n - 1 - i)) & 1 == 1).collect();
            assert_eq!(config_from_occupancy(&occ), config);
            let table = enabled_events(&LatticeState::new(occ), &spec).unwrap();
            let d = -gen.diagonal()[config];
            assert!((table.total_rate() - d).abs() <= 1e-12 * d.abs().max(1.0), "config {config}");
        }
    }
}
