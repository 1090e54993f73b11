#![allow(dead_code)]

use coag_core::model::{ChainSpec, JunctionRates, RateTriple};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rates(rng: &mut ChaCha8Rng) -> RateTriple {
    let p = rng.random_range(0.2..3.0);
    let q = rng.random_range(0.2..3.0);
    let theta = rng.random_range(0.05..0.7);
    RateTriple::from_theta(p, q, theta).unwrap()
}

/// Feasible interval for Q̄ given the segments and p̄, q̄.
pub fn big_q_interval(s1: &RateTriple, s2: &RateTriple, pb: f64, qb: f64) -> (f64, f64) {
    let (q1, q2) = (s1.imbalance(), s2.imbalance());
    let lo = (0.5 * (pb * s1.delta() + qb * s2.delta())).max(-q1).max(q2);
    let hi = (pb * s1.delta() + q1).min(qb * s2.delta() - q2);
    (lo, hi)
}

/// A random valid spec with an explicit, impurity or quench junction.
pub fn random_spec(rng: &mut ChaCha8Rng, l1: usize, l2: usize) -> ChainSpec {
    loop {
        let s1 = random_rates(rng);
        let s2 = random_rates(rng);
        let spec = match rng.random_range(0..3) {
            0 => {
                let s = rng.random_range(-s1.p().min(s1.q())..2.0);
                ChainSpec::impurity(l1, l2, s1, s)
            }
            1 => ChainSpec::quench(l1, l2, s1, s2),
            _ => {
                let pb = rng.random_range(0.0..3.0);
                let qb = rng.random_range(0.0..3.0);
                let (lo, hi) = big_q_interval(&s1, &s2, pb, qb);
                if lo >= hi {
                    continue;
                }
                let big_q = lo + (hi - lo) * rng.random_range(0.02..0.98);
                ChainSpec::new(l1, l2, s1, s2, JunctionRates::new(pb, qb, big_q).unwrap())
            }
        };
        if let Ok(spec) = spec {
            if spec.validate().is_valid() {
                return spec;
            }
        }
    }
}

pub fn random_lengths(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> (usize, usize) {
    (rng.random_range(lo..=hi), rng.random_range(lo..=hi))
}
