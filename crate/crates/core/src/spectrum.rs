//! Eigenvalues of the Markov generator from the one-particle energies.
//!
//! Every eigenvalue is Ω + Σ_{k∈S} λ_k over subsets S of the N+1 nonzero
//! modes whose size has the parity fixed by the segment rates.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ChainSpec, RateTriple};
use crate::one_particle::{one_particle_spectrum, ModeLabel, OneParticleSpectrum, Route, SecularEquation};
use crate::spin::junction_coefficients;

/// Largest N for which the full 2^N multiset is assembled.
pub const MAX_FULL_SITES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Parity::Odd => "odd",
            Parity::Even => "even",
        }
    }
}

fn products(spec: &ChainSpec) -> (f64, f64) {
    let (s1, s2) = (spec.seg1(), spec.seg2());
    (s1.delta() * (s1.q() - s1.p()), s2.delta() * (s2.q() - s2.p()))
}

/// Odd when Δ1(q1−p1) ≥ Δ2(q2−p2) > 0 or 0 > Δ1(q1−p1) ≥ Δ2(q2−p2); even
/// otherwise, including the tie where both products vanish.
pub fn parity(spec: &ChainSpec) -> Parity {
    let (d1, d2) = products(spec);
    if (d1 >= d2 && d2 > 0.0) || (0.0 > d1 && d1 >= d2) {
        Parity::Odd
    } else {
        Parity::Even
    }
}

/// Vacuum energy from the case analysis on the two segment rates.
pub fn vacuum_energy_closed(spec: &ChainSpec) -> f64 {
    let (d1, d2) = products(spec);
    if d1 >= d2 && d2 > 0.0 {
        d2 / 2.0
    } else if 0.0 > d1 && d1 >= d2 {
        -d1 / 2.0
    } else {
        0.0
    }
}

/// Vacuum energy −½Σλ + (L1−1)f1 + (L2−1)f2 + ψ, checked against the closed form.
pub fn vacuum_energy(spec: &ChainSpec, spectrum: &OneParticleSpectrum) -> Result<f64> {
    let sum: f64 = spectrum.levels().iter().map(|l| l.lambda).sum();
    let abs_sum: f64 = spectrum.levels().iter().map(|l| l.lambda.abs()).sum();
    let (s1, s2) = (spec.seg1(), spec.seg2());
    let psi = junction_coefficients(s1, s2, spec.junction()).psi;
    let omega = -0.5 * sum
        + (spec.l1() - 1) as f64 * s1.diagonal_offset()
        + (spec.l2() - 1) as f64 * s2.diagonal_offset()
        + psi;
    let closed = vacuum_energy_closed(spec);
    let tol = 1e-6f64.max(1e-12 * abs_sum);
    if (omega - closed).abs() > tol {
        return Err(Error::Consistency(format!("vacuum energy {omega} disagrees with the closed form {closed}")));
    }
    Ok(omega)
}

/// All 2^N eigenvalues of M, in decreasing order.
pub fn assemble_full_spectrum(spectrum: &OneParticleSpectrum, omega: f64, parity: Parity) -> Result<Vec<f64>> {
    let ex: Vec<f64> = spectrum.excitations().iter().map(|l| l.lambda).collect();
    let n = ex.len().saturating_sub(1);
    if n > MAX_FULL_SITES {
        return Err(Error::SizeGuard { what: "sites", value: n, limit: MAX_FULL_SITES });
    }
    let subsets = 1usize << ex.len();
    let mut sums = vec![0.0f64; subsets];
    let want_odd = parity == Parity::Odd;
    let mut out = Vec::with_capacity(subsets / 2);
    if !want_odd {
        out.push(omega);
    }
    for mask in 1..subsets {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = sums[mask & (mask - 1)] + ex[low];
        if (mask.count_ones() % 2 == 1) == want_odd {
            out.push(omega + sums[mask]);
        }
    }
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

/// The slowest relaxation rate and the modes that produce it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralGap {
    pub value: f64,
    pub modes: Vec<ModeLabel>,
}

impl SpectralGap {
    /// Labels joined with '+', e.g. "edge2+bulk1".
    pub fn label(&self) -> String {
        self.modes.iter().map(ToString::to_string).collect::<Vec<_>>().join("+")
    }
}

/// Largest nonzero eigenvalue among one-mode (odd) or two-mode (even) states.
pub fn spectral_gap(spectrum: &OneParticleSpectrum, omega: f64, parity: Parity) -> Result<SpectralGap> {
    let ex = spectrum.excitations();
    let tol = 1e-10 * spectrum.min_lambda().abs().max(1.0);
    let mut best: Option<SpectralGap> = None;
    let mut offer = |value: f64, modes: Vec<ModeLabel>| {
        if value.abs() > tol && best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(SpectralGap { value, modes });
        }
    };
    match parity {
        Parity::Odd => {
            for l in ex {
                offer(omega + l.lambda, vec![l.label]);
            }
        }
        Parity::Even => {
            for (i, a) in ex.iter().enumerate() {
                for b in &ex[i + 1..] {
                    offer(omega + a.lambda + b.lambda, vec![a.label, b.label]);
                }
            }
        }
    }
    best.ok_or(Error::DegenerateSpectrum)
}

/// Infinite-length gap of a homogeneous chain.
pub fn homogeneous_gap(rates: &RateTriple) -> f64 {
    let (p, q, c) = (rates.p(), rates.q(), rates.cos2theta());
    let cc = c * c;
    if p > q {
        -(p / cc) * ((q / p).sqrt() - c).powi(2)
    } else if q > 0.0 {
        -(q / cc) * ((p / q).sqrt() - c).powi(2)
    } else {
        0.0
    }
}

/// Angle θ where the homogeneous gap closes: √(min(p,q)/max(p,q)) = cos 2θ.
pub fn transition_theta(p: f64, q: f64) -> Option<f64> {
    let (lo, hi) = (p.min(q), p.max(q));
    if !(lo >= 0.0 && hi > 0.0) {
        return None;
    }
    Some(0.5 * (lo / hi).sqrt().acos())
}

/// Gap of a homogeneous chain of `l` sites from the closed-form energies.
pub fn finite_homogeneous_gap(rates: &RateTriple, l: usize) -> Result<SpectralGap> {
    let spectrum = crate::one_particle::homogeneous_energies(rates, l)?;
    let spec = ChainSpec::homogeneous(l / 2, l - l / 2, *rates)?;
    spectral_gap(&spectrum, vacuum_energy_closed(&spec), parity(&spec))
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportChecks {
    pub route: Route,
    /// |Ω(sum formula) − Ω(closed form)|.
    pub omega_residual: f64,
    /// |Σ roots − Vieta prediction|, when the secular route applies.
    pub vieta_residual: Option<f64>,
    pub max_secular_residual: Option<f64>,
    /// Largest distance between assembled and brute-force eigenvalues.
    pub brute_force_distance: Option<f64>,
    pub brute_force_match: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub omega: f64,
    pub omega_closed: f64,
    pub parity: Parity,
    pub gap: SpectralGap,
    pub one_particle: OneParticleSpectrum,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full_spectrum: Option<Vec<f64>>,
    pub checks: ReportChecks,
}

pub fn spectrum_report(spec: &ChainSpec, full: bool) -> Result<SpectrumReport> {
    let one_particle = one_particle_spectrum(spec)?;
    let omega = vacuum_energy(spec, &one_particle)?;
    let omega_closed = vacuum_energy_closed(spec);
    let parity = parity(spec);
    let gap = spectral_gap(&one_particle, omega, parity)?;
    let (vieta_residual, max_secular_residual) = match SecularEquation::new(spec) {
        Ok(eq) if one_particle.route() == Route::Secular => {
            let bulk = one_particle.bulk();
            let sum: f64 = bulk.iter().sum();
            let worst = bulk.iter().map(|&x| eq.relative_residual(x)).fold(0.0, f64::max);
            (Some((sum - eq.vieta_sum()).abs()), Some(worst))
        }
        _ => (None, None),
    };
    let full_spectrum = if full { Some(assemble_full_spectrum(&one_particle, omega, parity)?) } else { None };
    Ok(SpectrumReport {
        omega,
        omega_closed,
        parity,
        gap,
        checks: ReportChecks {
            route: one_particle.route(),
            omega_residual: (omega - omega_closed).abs(),
            vieta_residual,
            max_secular_residual,
            brute_force_distance: None,
            brute_force_match: None,
        },
        one_particle,
        full_spectrum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::one_particle::{homogeneous_energies, Route};

    fn quench_example() -> ChainSpec {
        let s1 = RateTriple::new(0.6, 6.0, 1.0).unwrap();
        let s2 = RateTriple::new(6.0, 0.2, 1.0).unwrap();
        ChainSpec::quench(3, 3, s1, s2).unwrap()
    }

    #[test]
    fn parity_cases() {
        let r = RateTriple::from_theta(0.5, 3.0, 0.6).unwrap();
        assert_eq!(parity(&ChainSpec::impurity(3, 3, r, 0.2).unwrap()), Parity::Odd);
        assert_eq!(parity(&quench_example()), Parity::Even);
        let sym = RateTriple::new(1.0, 1.0, 0.4).unwrap();
        assert_eq!(parity(&ChainSpec::homogeneous(2, 2, sym).unwrap()), Parity::Even);
    }

    #[test]
    fn vacuum_cases() {
        let r = RateTriple::from_theta(0.5, 3.0, 0.6).unwrap();
        let imp = ChainSpec::impurity(3, 3, r, 0.2).unwrap();
        assert!((vacuum_energy_closed(&imp) - 2.5 * r.delta() / 2.0).abs() < 1e-15);
        assert_eq!(vacuum_energy_closed(&quench_example()), 0.0);
        let sp = one_particle_spectrum(&quench_example()).unwrap();
        assert!(vacuum_energy(&quench_example(), &sp).unwrap().abs() < 1e-10);
    }

    #[test]
    fn two_site_full_spectrum() {
        let r = RateTriple::new(1.0, 1.0, 0.0).unwrap();
        let spec = ChainSpec::homogeneous(1, 1, r).unwrap();
        let sp = one_particle_spectrum(&spec).unwrap();
        let omega = vacuum_energy(&spec, &sp).unwrap();
        let full = assemble_full_spectrum(&sp, omega, parity(&spec)).unwrap();
        for (got, want) in full.iter().zip([0.0, 0.0, -2.0, -2.0]) {
            assert!((got - want).abs() < 1e-12, "{full:?}");
        }
    }

    #[test]
    fn full_spectrum_size_and_stationary_states() {
        let r = RateTriple::from_theta(0.5, 3.0, 0.6).unwrap();
        let spec = ChainSpec::impurity(3, 3, r, 0.4).unwrap();
        let sp = one_particle_spectrum(&spec).unwrap();
        let omega = vacuum_energy(&spec, &sp).unwrap();
        let full = assemble_full_spectrum(&sp, omega, Parity::Odd).unwrap();
        assert_eq!(full.len(), 64);
        // the two edge modes each cancel Ω
        assert!(full[0].abs() < 1e-12 && full[1].abs() < 1e-12 && full[2] < -1e-3);
    }

    #[test]
    fn homogeneous_gap_values() {
        let r = RateTriple::from_theta(1.0, 1.0, std::f64::consts::PI / 8.0).unwrap();
        let want = -2.0 * (1.0 - 0.5f64.sqrt()).powi(2);
        assert!((homogeneous_gap(&r) - want).abs() < 1e-14);
        assert!((homogeneous_gap(&r) + 0.171573).abs() < 1e-6);
        let r0 = RateTriple::new(0.5, 3.0, 0.0).unwrap();
        assert!((homogeneous_gap(&r0) + (0.5f64.sqrt() - 3f64.sqrt()).powi(2)).abs() < 1e-14);
        let t = transition_theta(0.5, 3.0).unwrap();
        let closed = RateTriple::from_theta(0.5, 3.0, t).unwrap();
        assert!(homogeneous_gap(&closed).abs() < 1e-14);
    }

    #[test]
    fn gap_labels() {
        let sp = one_particle_spectrum(&quench_example()).unwrap();
        let gap = spectral_gap(&sp, 0.0, Parity::Even).unwrap();
        assert_eq!(gap.modes[0], ModeLabel::Edge1);
        assert!(matches!(gap.modes[1], ModeLabel::Bulk(1)));
        assert!(gap.label().starts_with("edge1+bulk1"));
    }

    #[test]
    fn degenerate_gap() {
        let sp = OneParticleSpectrum::from_parts(0.0, 0.0, &[], Route::ClosedForm);
        assert!(matches!(spectral_gap(&sp, 0.0, Parity::Odd), Err(Error::DegenerateSpectrum)));
    }

    #[test]
    fn finite_gap_uses_first_band_level() {
        let r = RateTriple::from_theta(0.5, 3.0, 0.1).unwrap();
        let g = finite_homogeneous_gap(&r, 20).unwrap();
        let e = homogeneous_energies(&r, 20).unwrap();
        assert!((g.value - (2.5 * r.delta() / 2.0 + e.bulk()[0])).abs() < 1e-12);
        assert_eq!(g.modes, vec![ModeLabel::Bulk(1)]);
    }
}
