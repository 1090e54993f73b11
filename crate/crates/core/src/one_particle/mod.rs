//! One-particle energies of the quadratic fermionic form.

pub mod modes;
pub mod script_matrix;
pub mod secular;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ChainSpec, RateTriple};

pub use modes::{
    bulk_mode, edge_modes, homogeneous_modes, left_edge_mode, right_edge_mode, trivial_zero_modes, EdgeModes,
    HomogeneousFamily, ModeKind, ModeVector,
};
pub use script_matrix::{build_script_matrix, homogeneous_script_matrix, BlockTridiagonalM};
pub use secular::{secular_function, solve_secular, SecularEquation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModeLabel {
    Zero,
    Edge1,
    Edge2,
    /// k-th bulk energy, 1-based, in decreasing order.
    Bulk(usize),
}

impl ModeLabel {
    /// Label family without the bulk index.
    pub fn family(&self) -> &'static str {
        match self {
            ModeLabel::Zero => "zero",
            ModeLabel::Edge1 => "edge1",
            ModeLabel::Edge2 => "edge2",
            ModeLabel::Bulk(_) => "bulk",
        }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeLabel::Bulk(k) => write!(f, "bulk{k}"),
            other => f.write_str(other.family()),
        }
    }
}

impl Serialize for ModeLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Which computation produced the bulk energies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Secular,
    Matrix,
    ClosedForm,
}

impl Route {
    pub fn as_str(&self) -> &'static str {
        match self {
            Route::Secular => "secular",
            Route::Matrix => "matrix",
            Route::ClosedForm => "closed-form",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    pub label: ModeLabel,
    pub lambda: f64,
}

/// The zero mode, both edge modes and the bulk energies (all ≤ 0).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneParticleSpectrum {
    levels: Vec<Level>,
    route: Route,
}

impl OneParticleSpectrum {
    /// `bulk` must be sorted in decreasing order.
    pub fn from_parts(edge1: f64, edge2: f64, bulk: &[f64], route: Route) -> Self {
        let mut levels = vec![
            Level { label: ModeLabel::Zero, lambda: 0.0 },
            Level { label: ModeLabel::Edge1, lambda: edge1 },
            Level { label: ModeLabel::Edge2, lambda: edge2 },
        ];
        levels.extend(bulk.iter().enumerate().map(|(i, &lambda)| Level { label: ModeLabel::Bulk(i + 1), lambda }));
        OneParticleSpectrum { levels, route }
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Everything except the zero mode: the N+1 energies that build M.
    pub fn excitations(&self) -> &[Level] {
        &self.levels[1..]
    }

    pub fn edge1(&self) -> f64 {
        self.levels[1].lambda
    }

    pub fn edge2(&self) -> f64 {
        self.levels[2].lambda
    }

    pub fn bulk(&self) -> Vec<f64> {
        self.levels[3..].iter().map(|l| l.lambda).collect()
    }

    pub fn route(&self) -> Route {
        self.route
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn min_lambda(&self) -> f64 {
        self.levels.iter().map(|l| l.lambda).fold(0.0, f64::min)
    }

    pub fn lambda_of(&self, label: ModeLabel) -> Option<f64> {
        self.levels.iter().find(|l| l.label == label).map(|l| l.lambda)
    }
}

/// Closed-form energies of a homogeneous chain of length `l`.
pub fn homogeneous_energies(rates: &RateTriple, l: usize) -> Result<OneParticleSpectrum> {
    let (p, q) = (rates.p(), rates.q());
    if p * q == 0.0 {
        return Err(Error::Unsupported("homogeneous energies need p·q > 0".into()));
    }
    if l < 2 {
        return Err(Error::InvalidRate { name: "L", value: l as f64, reason: "homogeneous chain needs L ≥ 2" });
    }
    let c = rates.cos2theta();
    let bulk: Vec<f64> = (1..l)
        .map(|k| {
            let ck = (std::f64::consts::PI * k as f64 / l as f64).cos();
            (2.0 * (p * q).sqrt() * ck - (p + q) * (c + 1.0 / c) / 2.0) / c
        })
        .collect();
    let edge = rates.edge_energy();
    Ok(OneParticleSpectrum::from_parts(edge, edge, &bulk, Route::ClosedForm))
}

/// Bulk energies from the secular equation when both segments allow it,
/// otherwise from the eigenvalues of ℳ.
pub fn one_particle_spectrum(spec: &ChainSpec) -> Result<OneParticleSpectrum> {
    spec.ensure_valid()?;
    let (e1, e2) = (spec.seg1().edge_energy(), spec.seg2().edge_energy());
    match SecularEquation::new(spec) {
        Ok(eq) => Ok(OneParticleSpectrum::from_parts(e1, e2, &eq.roots()?, Route::Secular)),
        Err(Error::Unsupported(_)) => {
            let m = build_script_matrix(spec)?;
            Ok(OneParticleSpectrum::from_parts(e1, e2, &m.bulk_energies(spec)?, Route::Matrix))
        }
        Err(e) => Err(e),
    }
}
