//! Cross-checks of one chain specification against independent routes.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generator::{assemble_generator, brute_force_spectrum, closed_classes, stationary_vectors};
use crate::linalg::match_multisets;
use crate::model::ChainSpec;
use crate::one_particle::{
    build_script_matrix, bulk_mode, edge_modes, one_particle_spectrum, trivial_zero_modes, BlockTridiagonalM,
    OneParticleSpectrum, SecularEquation,
};
use crate::simulator::{run, total_variation, Horizon, LatticeState};
use crate::spectrum::{assemble_full_spectrum, parity, vacuum_energy, vacuum_energy_closed};
use crate::spin::{verify_bulk_identity, verify_junction_identity};

/// Largest lattice for brute-force comparisons.
pub const MAX_ORACLE_SITES: usize = 12;
/// Largest lattice for the simulator check.
pub const MAX_SIMULATION_SITES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyLevel {
    /// Everything except the simulator.
    Fast,
    Full,
}

impl FromStr for VerifyLevel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(VerifyLevel::Fast),
            "full" => Ok(VerifyLevel::Full),
            other => Err(Error::Parse(format!("unknown verification level {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: Status,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl CheckResult {
    fn measured(name: &'static str, residual: f64, tolerance: f64) -> Self {
        let status = if residual <= tolerance { Status::Pass } else { Status::Fail };
        CheckResult { name, status, residual: Some(residual), tolerance: Some(tolerance), detail: String::new() }
    }

    fn skip(name: &'static str, why: impl Into<String>) -> Self {
        CheckResult { name, status: Status::Skip, residual: None, tolerance: None, detail: why.into() }
    }

    fn fail(name: &'static str, why: impl Into<String>) -> Self {
        CheckResult { name, status: Status::Fail, residual: None, tolerance: None, detail: why.into() }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        write!(f, "{status} {}", self.name)?;
        if let (Some(r), Some(t)) = (self.residual, self.tolerance) {
            write!(f, " residual={r:.3e} tol={t:.1e}")?;
        }
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.checks.iter().try_for_each(|c| writeln!(f, "{c}"))
    }
}

/// Options for [`run_verification`].
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub level: VerifyLevel,
    pub seed: u64,
    pub events: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { level: VerifyLevel::Full, seed: 42, events: 1_000_000 }
    }
}

fn rate_scale(spec: &ChainSpec) -> f64 {
    let (s1, s2, j) = (spec.seg1(), spec.seg2(), spec.junction());
    [s1.p(), s1.q(), s2.p(), s2.q(), j.p_bar(), j.q_bar(), j.big_q_bar().abs()]
        .into_iter()
        .fold(0.0, f64::max)
        * (1.0 + s1.delta().max(s2.delta()))
}

pub fn run_verification(spec: &ChainSpec, options: VerifyOptions) -> VerificationReport {
    let mut checks = Vec::new();
    let report = spec.validate();
    if !report.is_valid() {
        checks.push(CheckResult::fail("validation", report.to_string()));
        return VerificationReport { checks };
    }
    checks.push(CheckResult { name: "validation", status: Status::Pass, residual: None, tolerance: None, detail: String::new() });
    let scale = rate_scale(spec).max(1.0);

    checks.push(stochasticity(spec, scale));
    checks.push(identities(spec));

    let one = match one_particle_spectrum(spec) {
        Ok(sp) => sp,
        Err(e) => {
            checks.push(CheckResult::fail("one-particle", e.to_string()));
            return VerificationReport { checks };
        }
    };
    checks.extend(script_matrix_checks(spec, &one));
    checks.extend(oracle_checks(spec, &one));
    checks.push(omega_check(spec, &one));
    checks.extend(secular_checks(spec, &one));
    if options.level == VerifyLevel::Full {
        checks.push(simulator_check(spec, options));
    } else {
        checks.push(CheckResult::skip("simulator-tv", "fast level"));
    }
    VerificationReport { checks }
}

fn stochasticity(spec: &ChainSpec, scale: f64) -> CheckResult {
    let ops = match spec.bond_operators() {
        Ok(ops) => ops,
        Err(e) => return CheckResult::fail("stochasticity", e.to_string()),
    };
    let tol = 1e-12 * scale;
    let mut worst = 0.0f64;
    for op in &ops {
        worst = worst.max(op.column_sum_residual()).max((-op.min_off_diagonal()).max(0.0));
    }
    let absorbing = ops.iter().all(|op| op.empty_column_max_abs() == 0.0);
    if spec.sites() <= MAX_ORACLE_SITES {
        match assemble_generator(spec) {
            Ok(g) => worst = worst.max(g.max_column_sum()).max((-g.min_off_diagonal()).max(0.0)),
            Err(e) => return CheckResult::fail("stochasticity", e.to_string()),
        }
    }
    CheckResult::measured("stochasticity", worst, tol)
        .with_detail(if absorbing { "empty lattice absorbing" } else { "empty lattice not absorbing" })
}

fn identities(spec: &ChainSpec) -> CheckResult {
    let (s1, s2) = (spec.seg1(), spec.seg2());
    let bulk = verify_bulk_identity(s1).max(verify_bulk_identity(s2));
    match verify_junction_identity(s1, s2, spec.junction()) {
        Ok(j) => CheckResult::measured("identities", bulk.max(j), 1e-10),
        Err(e) => CheckResult::fail("identities", e.to_string()),
    }
}

fn script_matrix_checks(spec: &ChainSpec, one: &OneParticleSpectrum) -> Vec<CheckResult> {
    let names = ["script-pairing", "script-match", "ansatz-residuals"];
    if spec.sites() > MAX_ORACLE_SITES {
        return names.iter().map(|&n| CheckResult::skip(n, format!("N > {MAX_ORACLE_SITES}"))).collect();
    }
    let m = match build_script_matrix(spec) {
        Ok(m) => m,
        Err(e) => return names.iter().map(|&n| CheckResult::fail(n, e.to_string())).collect(),
    };
    let eigs = match m.eigenvalues() {
        Ok(e) => e,
        Err(e) => return names.iter().map(|&n| CheckResult::fail(n, e.to_string())).collect(),
    };
    let mut out = vec![CheckResult::measured("script-pairing", BlockTridiagonalM::pairing_residual(&eigs), 1e-9)];

    let half = BlockTridiagonalM::negative_half(&eigs);
    let levels: Vec<f64> = one.levels().iter().map(|l| l.lambda).collect();
    out.push(match crate::linalg::match_real_multisets(&half, &levels) {
        Some(d) => CheckResult::measured("script-match", d, 1e-9),
        None => CheckResult::fail("script-match", format!("{} vs {} values", half.len(), levels.len())),
    });

    let norm = m.matrix().abs().row_sum().max().max(1.0);
    let mut worst = 0.0f64;
    let mut built = 0usize;
    for mode in trivial_zero_modes(spec) {
        worst = worst.max(mode.residual(&m));
        built += 1;
    }
    let edges = edge_modes(spec);
    for mode in &edges.modes {
        worst = worst.max(mode.residual(&m));
        built += 1;
    }
    let mut notes = edges.notices.clone();
    for lambda in one.bulk() {
        match bulk_mode(spec, lambda) {
            Ok(mode) => {
                worst = worst.max(mode.residual(&m));
                built += 1;
            }
            Err(e) => notes.push(format!("bulk λ={lambda:.6}: {e}")),
        }
    }
    let mut ansatz = CheckResult::measured("ansatz-residuals", worst / norm, 1e-9);
    ansatz.detail = format!("{built} modes");
    if !notes.is_empty() {
        ansatz.detail.push_str("; ");
        ansatz.detail.push_str(&notes.join("; "));
    }
    out.push(ansatz);
    out
}

fn oracle_checks(spec: &ChainSpec, one: &OneParticleSpectrum) -> Vec<CheckResult> {
    let n = spec.sites();
    if n > MAX_ORACLE_SITES {
        return vec![
            CheckResult::skip("oracle-multiset", format!("N > {MAX_ORACLE_SITES}")),
            CheckResult::skip("trace", format!("N > {MAX_ORACLE_SITES}")),
        ];
    }
    let run = || -> Result<(f64, f64, f64, f64)> {
        let omega = vacuum_energy(spec, one)?;
        let full = assemble_full_spectrum(one, omega, parity(spec))?;
        let gen = assemble_generator(spec)?;
        let brute = brute_force_spectrum(&gen)?;
        let analytic: Vec<Complex64> = full.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let dist = match_multisets(&analytic, &brute.eigenvalues)
            .ok_or_else(|| Error::Consistency("multiset sizes differ".into()))?;
        let trace_residual = (gen.trace() - full.iter().sum::<f64>()).abs();
        Ok((dist, brute.max_imag, trace_residual, (1u64 << n) as f64))
    };
    match run() {
        Ok((dist, imag, trace, dim)) => vec![
            CheckResult::measured("oracle-multiset", dist.max(imag), 1e-8)
                .with_detail(format!("distance {dist:.3e}, brute-force max imag {imag:.3e}")),
            CheckResult::measured("trace", trace, 1e-8 * dim),
        ],
        Err(e) => vec![CheckResult::fail("oracle-multiset", e.to_string()), CheckResult::fail("trace", e.to_string())],
    }
}

fn omega_check(spec: &ChainSpec, one: &OneParticleSpectrum) -> CheckResult {
    match vacuum_energy(spec, one) {
        Ok(omega) => CheckResult::measured("omega-dual", (omega - vacuum_energy_closed(spec)).abs(), 1e-8),
        Err(e) => CheckResult::fail("omega-dual", e.to_string()),
    }
}

fn secular_checks(spec: &ChainSpec, one: &OneParticleSpectrum) -> Vec<CheckResult> {
    let eq = match SecularEquation::new(spec) {
        Ok(eq) => eq,
        Err(e) => {
            return vec![CheckResult::skip("vieta", e.to_string()), CheckResult::skip("junction-residuals", e.to_string())];
        }
    };
    let bulk = one.bulk();
    let sum: f64 = bulk.iter().sum();
    let abs: f64 = bulk.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
    let vieta = CheckResult::measured("vieta", (sum - eq.vieta_sum()).abs() / abs, 1e-9);
    let worst = bulk
        .iter()
        .map(|&x| {
            let (a, b) = eq.junction_residuals(x);
            a.max(b)
        })
        .fold(0.0, f64::max);
    vec![vieta, CheckResult::measured("junction-residuals", worst, 1e-8)]
}

/// Brute-force eigenvalues of the 2^N generator, optionally compared with an
/// assembled spectrum.
#[derive(Debug, Clone)]
pub struct BruteForceComparison {
    pub eigenvalues: Vec<Complex64>,
    pub max_imag: f64,
    /// Largest matched distance to the assembled eigenvalues.
    pub distance: Option<f64>,
}

impl BruteForceComparison {
    /// Multisets agree within 1e-8 and the brute-force spectrum is real within 1e-8.
    pub fn matches(&self) -> Option<bool> {
        self.distance.map(|d| d <= 1e-8 && self.max_imag <= 1e-8)
    }
}

pub fn brute_force_comparison(spec: &ChainSpec, assembled: Option<&[f64]>) -> Result<BruteForceComparison> {
    let brute = brute_force_spectrum(&assemble_generator(spec)?)?;
    let distance = assembled.map(|full| {
        let lifted: Vec<Complex64> = full.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        match_multisets(&lifted, &brute.eigenvalues).unwrap_or(f64::INFINITY)
    });
    Ok(BruteForceComparison { eigenvalues: brute.eigenvalues, max_imag: brute.max_imag, distance })
}

/// Stationary vector of the unique closed class other than the empty lattice.
pub fn nontrivial_stationary_vector(spec: &ChainSpec) -> Result<Vec<f64>> {
    let gen = assemble_generator(spec)?;
    let classes = closed_classes(&gen);
    let vectors = stationary_vectors(&gen)?;
    let mut nonempty = classes.iter().zip(vectors).filter(|(c, _)| c.as_slice() != [0]).map(|(_, v)| v);
    match (nonempty.next(), nonempty.next()) {
        (Some(v), None) => Ok(v),
        (None, _) => Err(Error::Consistency("no closed class besides the empty lattice".into())),
        (Some(_), Some(_)) => Err(Error::Consistency("several closed classes besides the empty lattice".into())),
    }
}

fn simulator_check(spec: &ChainSpec, options: VerifyOptions) -> CheckResult {
    let n = spec.sites();
    if n > MAX_SIMULATION_SITES {
        return CheckResult::skip("simulator-tv", format!("N > {MAX_SIMULATION_SITES}"));
    }
    let exact = match nontrivial_stationary_vector(spec) {
        Ok(v) => v,
        Err(e) => return CheckResult::skip("simulator-tv", e.to_string()),
    };
    match run(spec, &LatticeState::full(n), Horizon::Events(options.events), options.seed) {
        Ok(t) => match t.histogram {
            Some(h) => CheckResult::measured("simulator-tv", total_variation(&h, &exact), 0.02)
                .with_detail(format!("{} events, seed {}", t.events, options.seed)),
            None => CheckResult::skip("simulator-tv", "no histogram"),
        },
        Err(e) => CheckResult::fail("simulator-tv", e.to_string()),
    }
}
