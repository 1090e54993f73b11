//! Gap curves over a parameter grid.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ChainSpec, RateTriple};
use crate::one_particle::{one_particle_spectrum, Route};
use crate::spectrum::{parity, spectral_gap, vacuum_energy, Parity, SpectralGap};

/// Largest number of points a grid may hold.
pub const MAX_GRID_POINTS: usize = 1_000_000;

/// A strictly monotone list of parameter values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    values: Vec<f64>,
}

impl Grid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Parse("empty grid".into()));
        }
        if values.len() > MAX_GRID_POINTS {
            return Err(Error::Parse(format!("grid has {} points, limit {MAX_GRID_POINTS}", values.len())));
        }
        if let Some(x) = values.iter().find(|x| !x.is_finite()) {
            return Err(Error::Parse(format!("grid value {x} is not finite")));
        }
        let up = values.windows(2).all(|w| w[1] > w[0]);
        let down = values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::Parse("grid is not strictly monotone".into()));
        }
        Ok(Grid { values })
    }

    /// `n` evenly spaced points from `a` to `b` inclusive.
    pub fn linspace(a: f64, b: f64, n: usize) -> Result<Self> {
        match n {
            0 => Err(Error::Parse("grid needs at least one point".into())),
            1 => Self::new(vec![a]),
            _ => {
                let step = (b - a) / (n - 1) as f64;
                Self::new((0..n).map(|i| if i == n - 1 { b } else { a + step * i as f64 }).collect())
            }
        }
    }

    /// `n` geometrically spaced points from `a` to `b`, both of one sign.
    pub fn geomspace(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a * b > 0.0) {
            return Err(Error::Parse("log grid endpoints must be nonzero and share a sign".into()));
        }
        let sign = a.signum();
        let lin = Self::linspace(a.abs().ln(), b.abs().ln(), n)?;
        let mut values: Vec<f64> = lin.values.iter().map(|x| sign * x.exp()).collect();
        values[0] = a;
        let last = values.len() - 1;
        values[last] = b;
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn parse_number(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("invalid number {:?}", s.trim())))
}

impl FromStr for Grid {
    type Err = Error;

    /// "a:b:n" (linear), "a:b:n:log" (geometric) or "x1,x2,…".
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let (a, b) = (parse_number(parts[0])?, parse_number(parts.get(1).copied().unwrap_or(""))?);
            let n_str = parts.get(2).ok_or_else(|| Error::Parse("range grid needs a:b:n".into()))?.trim();
            let n: usize = n_str.parse().map_err(|_| Error::Parse(format!("invalid point count {n_str:?}")))?;
            if n > MAX_GRID_POINTS {
                return Err(Error::Parse(format!("grid has {n} points, limit {MAX_GRID_POINTS}")));
            }
            match parts.get(3).map(|x| x.trim()) {
                None if parts.len() == 3 => Self::linspace(a, b, n),
                Some("log") if parts.len() == 4 => Self::geomspace(a, b, n),
                Some("lin") if parts.len() == 4 => Self::linspace(a, b, n),
                _ => Err(Error::Parse(format!("invalid range grid {s:?}"))),
            }
        } else {
            Self::new(s.split(',').map(parse_number).collect::<Result<Vec<f64>>>()?)
        }
    }
}

/// Gap and its ingredients at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapPoint {
    pub gap: SpectralGap,
    pub omega: f64,
    pub parity: Parity,
    pub route: Route,
}

pub fn gap_point(spec: &ChainSpec) -> Result<GapPoint> {
    let sp = one_particle_spectrum(spec)?;
    let omega = vacuum_energy(spec, &sp)?;
    let parity = parity(spec);
    let gap = spectral_gap(&sp, omega, parity)?;
    Ok(GapPoint { gap, omega, parity, route: sp.route() })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: std::result::Result<GapPoint, String>,
}

/// Evaluate `make` then the gap at every grid value, in parallel, in grid order.
pub fn sweep<F>(grid: &Grid, make: F) -> Vec<SweepRow>
where
    F: Fn(f64) -> Result<ChainSpec> + Sync,
{
    grid.values()
        .par_iter()
        .map(|&value| SweepRow { value, outcome: make(value).and_then(|spec| gap_point(&spec)).map_err(|e| e.to_string()) })
        .collect()
}

/// Impurity strength s ∈ [−min(p,q), 3] with 200 points.
pub fn default_impurity_grid(rates: &RateTriple) -> Grid {
    Grid::linspace(-rates.p().min(rates.q()), 3.0, 200).expect("fixed grid is monotone")
}

pub fn impurity_sweep(rates: &RateTriple, length: usize, grid: &Grid) -> Vec<SweepRow> {
    sweep(grid, |s| ChainSpec::impurity(length, length, *rates, s))
}

/// Quench rates at fixed p1, q1, Δ1, p2, q2 with Δ2 swept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchRates {
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
}

impl QuenchRates {
    /// p1 = 0.6, q1 = 6, p2 = 6, q2 = 0.2.
    pub const REFERENCE: QuenchRates = QuenchRates { p1: 0.6, q1: 6.0, p2: 6.0, q2: 0.2 };

    pub fn spec(&self, length: usize, delta1: f64, delta2: f64) -> Result<ChainSpec> {
        let s1 = RateTriple::new(self.p1, self.q1, delta1)?;
        let s2 = RateTriple::new(self.p2, self.q2, delta2)?;
        ChainSpec::quench(length, length, s1, s2)
    }

    /// Δ2 where the two edge energies cross: (q1−p1)Δ1 = (p2−q2)Δ2.
    pub fn crossing(&self, delta1: f64) -> f64 {
        delta1 * (self.q1 - self.p1) / (self.p2 - self.q2)
    }
}

/// Δ2 ∈ [0.05, 3] with 200 points.
pub fn default_quench_grid() -> Grid {
    Grid::linspace(0.05, 3.0, 200).expect("fixed grid is monotone")
}

pub fn quench_sweep(rates: &QuenchRates, length: usize, delta1: f64, grid: &Grid) -> Vec<SweepRow> {
    sweep(grid, |d2| rates.spec(length, delta1, d2))
}

/// 12 significant digits.
pub struct Sig12(pub f64);

impl fmt::Display for Sig12 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.11e}", self.0)
    }
}

/// CSV with columns `<name>,gap,omega,route,modes,error`. Failed points keep
/// their row with empty numeric fields and the reason.
pub fn rows_to_csv(name: &str, rows: &[SweepRow]) -> String {
    let mut out = format!("{name},gap,omega,route,modes,error\n");
    for r in rows {
        match &r.outcome {
            Ok(p) => out.push_str(&format!(
                "{},{},{},{},{},\n",
                Sig12(r.value),
                Sig12(p.gap.value),
                Sig12(p.omega),
                p.route.as_str(),
                p.gap.label()
            )),
            Err(e) => out.push_str(&format!("{},,,,,\"{}\"\n", Sig12(r.value), e.replace('"', "'"))),
        }
    }
    out
}
