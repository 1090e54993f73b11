//! Model parameters, positivity constraints and the 4×4 bond operators.
//!
//! Two-site configurations are indexed as `2·b_left + b_right` with bit 1
//! meaning "occupied", so the basis order is (++, +−, −+, −−) where `+` is an
//! empty site and `−` an occupied one. Rows of a [`LocalOperator`] are target
//! configurations and columns are source configurations.

use std::fmt;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest accepted Δ = tan²(2θ). Beyond this cos 2θ is below 1e-6.
pub const MAX_DELTA: f64 = 1e12;

/// Both sites empty.
pub const PP: usize = 0;
/// Left empty, right occupied.
pub const PM: usize = 1;
/// Left occupied, right empty.
pub const MP: usize = 2;
/// Both sites occupied.
pub const MM: usize = 3;

fn require_rate(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::InvalidRate { name, value, reason: "not finite" });
    }
    if value < 0.0 {
        return Err(Error::InvalidRate { name, value, reason: "negative" });
    }
    Ok(value)
}

/// Bulk rates of one segment: hopping/coagulation rates `p` (to the right) and
/// `q` (to the left) and the decoagulation ratio `delta` = tan²(2θ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRates", into = "RawRates")]
pub struct RateTriple {
    p: f64,
    q: f64,
    delta: f64,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRates {
    p: f64,
    q: f64,
    delta: f64,
}

impl TryFrom<RawRates> for RateTriple {
    type Error = Error;
    fn try_from(raw: RawRates) -> Result<Self> {
        RateTriple::new(raw.p, raw.q, raw.delta)
    }
}

impl From<RateTriple> for RawRates {
    fn from(r: RateTriple) -> Self {
        RawRates { p: r.p, q: r.q, delta: r.delta }
    }
}

impl RateTriple {
    pub fn new(p: f64, q: f64, delta: f64) -> Result<Self> {
        let p = require_rate("p", p)?;
        let q = require_rate("q", q)?;
        let delta = require_rate("delta", delta)?;
        if delta > MAX_DELTA {
            return Err(Error::InvalidRate {
                name: "delta",
                value: delta,
                reason: "too close to theta = pi/4",
            });
        }
        Ok(RateTriple { p, q, delta })
    }

    /// Rates with Δ = tan²(2θ), θ ∈ [0, π/4).
    pub fn from_theta(p: f64, q: f64, theta: f64) -> Result<Self> {
        if !(0.0..std::f64::consts::FRAC_PI_4).contains(&theta) {
            return Err(Error::InvalidRate {
                name: "theta",
                value: theta,
                reason: "outside [0, pi/4)",
            });
        }
        let t = (2.0 * theta).tan();
        RateTriple::new(p, q, t * t)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn theta(&self) -> f64 {
        0.5 * self.delta.sqrt().atan()
    }

    /// cos 2θ = 1/√(1+Δ).
    pub fn cos2theta(&self) -> f64 {
        1.0 / (1.0 + self.delta).sqrt()
    }

    /// sin²θ = (1 − cos 2θ)/2.
    pub fn sin_sq(&self) -> f64 {
        let d = self.delta;
        // (1 - c)/2 written without cancellation for small Δ
        let s = (1.0 + d).sqrt();
        0.5 * d / (s * (s + 1.0))
    }

    /// cos²θ = (1 + cos 2θ)/2.
    pub fn cos_sq(&self) -> f64 {
        0.5 * (1.0 + self.cos2theta())
    }

    /// f = −(p+q)(2+Δ)/4.
    pub fn diagonal_offset(&self) -> f64 {
        -(self.p + self.q) * (2.0 + self.delta) / 4.0
    }

    /// μ = √(pq(1+Δ)).
    pub fn hopping_scale(&self) -> f64 {
        (self.p * self.q * (1.0 + self.delta)).sqrt()
    }

    /// Q = Δ(q−p)/2.
    pub fn imbalance(&self) -> f64 {
        self.delta * (self.q - self.p) / 2.0
    }

    /// t = (p−q)Δ/4, the coefficient of the boundary term.
    pub fn boundary_field(&self) -> f64 {
        (self.p - self.q) * self.delta / 4.0
    }

    /// One-particle energy of the edge mode, −|p−q|Δ/2.
    pub fn edge_energy(&self) -> f64 {
        -(self.p - self.q).abs() * self.delta / 2.0
    }
}

/// Rates of the junction bond (p̄, q̄, Q̄).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJunction", into = "RawJunction")]
pub struct JunctionRates {
    p: f64,
    q: f64,
    big_q: f64,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJunction {
    p_bar: f64,
    q_bar: f64,
    #[serde(rename = "Q_bar")]
    big_q_bar: f64,
}

impl TryFrom<RawJunction> for JunctionRates {
    type Error = Error;
    fn try_from(raw: RawJunction) -> Result<Self> {
        JunctionRates::new(raw.p_bar, raw.q_bar, raw.big_q_bar)
    }
}

impl From<JunctionRates> for RawJunction {
    fn from(j: JunctionRates) -> Self {
        RawJunction { p_bar: j.p, q_bar: j.q, big_q_bar: j.big_q }
    }
}

impl JunctionRates {
    pub fn new(p_bar: f64, q_bar: f64, big_q_bar: f64) -> Result<Self> {
        let p = require_rate("p_bar", p_bar)?;
        let q = require_rate("q_bar", q_bar)?;
        if !big_q_bar.is_finite() {
            return Err(Error::InvalidRate { name: "Q_bar", value: big_q_bar, reason: "not finite" });
        }
        Ok(JunctionRates { p, q, big_q: big_q_bar })
    }

    /// The junction that makes the chain homogeneous with bulk `rates`.
    pub fn homogeneous(rates: &RateTriple) -> Self {
        JunctionRates {
            p: rates.p,
            q: rates.q,
            big_q: (rates.q + rates.p) * rates.delta / 2.0,
        }
    }

    pub fn p_bar(&self) -> f64 {
        self.p
    }

    pub fn q_bar(&self) -> f64 {
        self.q
    }

    pub fn big_q_bar(&self) -> f64 {
        self.big_q
    }
}

/// How the junction of a [`ChainSpec`] was chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JunctionKind {
    Explicit,
    /// Identical segments with p̄ = p+s, q̄ = q+s, Q̄ = ((p+q)/2+s)Δ.
    Impurity { s: f64 },
    /// p̄ = p1, q̄ = q2, Q̄ = (p1Δ1+q2Δ2)/2.
    Quench,
}

/// One violated positivity inequality `lhs ≥ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn require(&mut self, constraint: &'static str, lhs: f64, rhs: f64) {
        let tol = 1e-12 * lhs.abs().max(rhs.abs()).max(1.0);
        if !(lhs >= rhs - tol) {
            self.violations.push(Violation { constraint, lhs, rhs });
        }
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::Validation(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "all positivity constraints hold");
        }
        write!(f, "violated:")?;
        for (i, v) in self.violations.iter().enumerate() {
            let sep = if i == 0 { " " } else { "; " };
            write!(f, "{sep}{} (lhs {:.6e}, rhs {:.6e})", v.constraint, v.lhs, v.rhs)?;
        }
        Ok(())
    }
}

/// Positivity constraints on the junction rates given the two segments.
pub fn junction_report(seg1: &RateTriple, seg2: &RateTriple, junction: &JunctionRates) -> ValidationReport {
    let (d1, d2) = (seg1.delta, seg2.delta);
    let (q1, q2) = (seg1.imbalance(), seg2.imbalance());
    let (pb, qb, qq) = (junction.p, junction.q, junction.big_q);
    let mut report = ValidationReport::default();
    report.require("Q1 ≥ Q2", q1, q2);
    report.require("p̄ ≥ 0", pb, 0.0);
    report.require("q̄ ≥ 0", qb, 0.0);
    report.require("2Q̄ ≥ p̄Δ1 + q̄Δ2", 2.0 * qq, pb * d1 + qb * d2);
    report.require("p̄Δ1 + Q1 ≥ Q̄", pb * d1 + q1, qq);
    report.require("Q̄ ≥ −Q1", qq, -q1);
    report.require("q̄Δ2 − Q2 ≥ Q̄", qb * d2 - q2, qq);
    report.require("Q̄ ≥ Q2", qq, q2);
    report
}

/// Two segments of lengths `l1`, `l2` joined by one junction bond between
/// sites `l1` and `l1 + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    l1: usize,
    l2: usize,
    seg1: RateTriple,
    seg2: RateTriple,
    junction: JunctionRates,
    kind: JunctionKind,
}

impl ChainSpec {
    /// A chain with explicit junction rates. Positivity is not enforced here;
    /// see [`ChainSpec::validate`].
    pub fn new(l1: usize, l2: usize, seg1: RateTriple, seg2: RateTriple, junction: JunctionRates) -> Result<Self> {
        check_lengths(l1, l2)?;
        Ok(ChainSpec { l1, l2, seg1, seg2, junction, kind: JunctionKind::Explicit })
    }

    pub fn impurity(l1: usize, l2: usize, rates: RateTriple, s: f64) -> Result<Self> {
        check_lengths(l1, l2)?;
        let (junction, _) = build_impurity_junction(&rates, s)?;
        Ok(ChainSpec { l1, l2, seg1: rates, seg2: rates, junction, kind: JunctionKind::Impurity { s } })
    }

    /// Homogeneous chain of `l1 + l2` sites, written as an impurity chain with s = 0.
    pub fn homogeneous(l1: usize, l2: usize, rates: RateTriple) -> Result<Self> {
        Self::impurity(l1, l2, rates, 0.0)
    }

    pub fn quench(l1: usize, l2: usize, seg1: RateTriple, seg2: RateTriple) -> Result<Self> {
        check_lengths(l1, l2)?;
        let (junction, _) = build_quench_junction(&seg1, &seg2)?;
        Ok(ChainSpec { l1, l2, seg1, seg2, junction, kind: JunctionKind::Quench })
    }

    pub fn l1(&self) -> usize {
        self.l1
    }

    pub fn l2(&self) -> usize {
        self.l2
    }

    /// Total number of sites N = L1 + L2.
    pub fn sites(&self) -> usize {
        self.l1 + self.l2
    }

    pub fn seg1(&self) -> &RateTriple {
        &self.seg1
    }

    pub fn seg2(&self) -> &RateTriple {
        &self.seg2
    }

    pub fn junction(&self) -> &JunctionRates {
        &self.junction
    }

    pub fn kind(&self) -> JunctionKind {
        self.kind
    }

    /// Same rates, different segment lengths.
    pub fn with_lengths(&self, l1: usize, l2: usize) -> Result<Self> {
        check_lengths(l1, l2)?;
        Ok(ChainSpec { l1, l2, ..self.clone() })
    }

    pub fn validate(&self) -> ValidationReport {
        junction_report(&self.seg1, &self.seg2, &self.junction)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        self.validate().into_result()
    }

    /// Segment rates governing site `site` (1-based).
    pub fn segment_of_site(&self, site: usize) -> &RateTriple {
        if site <= self.l1 { &self.seg1 } else { &self.seg2 }
    }

    /// Operators of bonds (k, k+1) for k = 1 … N−1, junction at k = L1.
    pub fn bond_operators(&self) -> Result<Vec<LocalOperator>> {
        self.ensure_valid()?;
        let bulk1 = build_bulk_operator(&self.seg1);
        let bulk2 = build_bulk_operator(&self.seg2);
        let junc = match self.kind {
            JunctionKind::Impurity { s } => build_impurity_junction(&self.seg1, s)?.1,
            JunctionKind::Quench => build_quench_junction(&self.seg1, &self.seg2)?.1,
            JunctionKind::Explicit => build_junction_operator(&self.seg1, &self.seg2, &self.junction)?,
        };
        Ok((1..self.sites())
            .map(|k| match k.cmp(&self.l1) {
                std::cmp::Ordering::Less => bulk1,
                std::cmp::Ordering::Equal => junc,
                std::cmp::Ordering::Greater => bulk2,
            })
            .collect())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawChainSpec = serde_json::from_str(text)?;
        raw.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RawChainSpec::from(self)).expect("plain data always serializes")
    }
}

fn check_lengths(l1: usize, l2: usize) -> Result<()> {
    for (name, l) in [("L1", l1), ("L2", l2)] {
        if l == 0 {
            return Err(Error::InvalidRate { name, value: 0.0, reason: "segment must have at least one site" });
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChainSpec {
    #[serde(rename = "L1")]
    l1: usize,
    #[serde(rename = "L2")]
    l2: usize,
    seg1: RateTriple,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seg2: Option<RateTriple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    junction: Option<JunctionRates>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    junction_kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<f64>,
}

impl From<&ChainSpec> for RawChainSpec {
    fn from(spec: &ChainSpec) -> Self {
        let (kind, s) = match spec.kind {
            JunctionKind::Explicit => ("explicit", None),
            JunctionKind::Impurity { s } => ("impurity", Some(s)),
            JunctionKind::Quench => ("quench", None),
        };
        RawChainSpec {
            l1: spec.l1,
            l2: spec.l2,
            seg1: spec.seg1,
            seg2: Some(spec.seg2),
            junction: Some(spec.junction),
            junction_kind: Some(kind.to_string()),
            s,
        }
    }
}

impl TryFrom<RawChainSpec> for ChainSpec {
    type Error = Error;
    fn try_from(raw: RawChainSpec) -> Result<Self> {
        let kind = raw.junction_kind.as_deref().unwrap_or("explicit");
        let spec = match kind {
            "explicit" => {
                if raw.s.is_some() {
                    return Err(Error::Parse("\"s\" is only meaningful for an impurity junction".into()));
                }
                let seg2 = raw.seg2.ok_or_else(|| Error::Parse("missing \"seg2\"".into()))?;
                let junction = raw.junction.ok_or_else(|| Error::Parse("missing \"junction\"".into()))?;
                return ChainSpec::new(raw.l1, raw.l2, raw.seg1, seg2, junction);
            }
            "impurity" => {
                if raw.seg2.is_some_and(|s2| s2 != raw.seg1) {
                    return Err(Error::Parse("impurity junction needs identical segments".into()));
                }
                let s = raw.s.ok_or_else(|| Error::Parse("impurity junction needs \"s\"".into()))?;
                ChainSpec::impurity(raw.l1, raw.l2, raw.seg1, s)?
            }
            "quench" => {
                if raw.s.is_some() {
                    return Err(Error::Parse("\"s\" is only meaningful for an impurity junction".into()));
                }
                let seg2 = raw.seg2.ok_or_else(|| Error::Parse("missing \"seg2\"".into()))?;
                ChainSpec::quench(raw.l1, raw.l2, raw.seg1, seg2)?
            }
            other => return Err(Error::Parse(format!("unknown junction_kind {other:?}"))),
        };
        if let Some(given) = raw.junction {
            let derived = spec.junction;
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
            if !(close(given.p, derived.p) && close(given.q, derived.q) && close(given.big_q, derived.big_q)) {
                return Err(Error::Parse(format!("junction rates disagree with the {kind} junction")));
            }
        }
        Ok(spec)
    }
}

/// A 4×4 generator acting on one bond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalOperator {
    m: Matrix4<f64>,
}

impl LocalOperator {
    pub fn from_matrix(m: Matrix4<f64>) -> Self {
        LocalOperator { m }
    }

    /// Rate from `source` to `target`, or the diagonal when they coincide.
    pub fn entry(&self, target: usize, source: usize) -> f64 {
        self.m[(target, source)]
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.m
    }

    pub fn max_abs(&self) -> f64 {
        self.m.amax()
    }

    pub fn column_sum_residual(&self) -> f64 {
        (0..4).map(|c| self.m.column(c).sum().abs()).fold(0.0, f64::max)
    }

    pub fn min_off_diagonal(&self) -> f64 {
        let mut min = f64::INFINITY;
        for r in 0..4 {
            for c in 0..4 {
                if r != c {
                    min = min.min(self.m[(r, c)]);
                }
            }
        }
        min
    }

    /// Largest magnitude in the column of the empty pair.
    pub fn empty_column_max_abs(&self) -> f64 {
        self.m.column(PP).amax()
    }

    /// Checks the generator invariants (zero column sums, nonnegative rates).
    pub fn check_generator(&self) -> Result<()> {
        let tol = 1e-12 * self.max_abs().max(1.0);
        let sums = self.column_sum_residual();
        if sums > tol {
            return Err(Error::Consistency(format!("column sums deviate from zero by {sums:e}")));
        }
        let min = self.min_off_diagonal();
        if min < -tol {
            return Err(Error::Consistency(format!("negative rate {min:e}")));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &LocalOperator) -> f64 {
        (self.m - other.m).amax()
    }
}

fn from_columns(cols: [[f64; 4]; 4]) -> LocalOperator {
    let mut m = Matrix4::zeros();
    for (c, col) in cols.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            m[(r, c)] = *v;
        }
    }
    LocalOperator { m }
}

pub fn build_bulk_operator(rates: &RateTriple) -> LocalOperator {
    let (p, q, d) = (rates.p, rates.q, rates.delta);
    from_columns([
        [0.0, 0.0, 0.0, 0.0],
        [0.0, -(d + 1.0) * q, q, d * q],
        [0.0, p, -(d + 1.0) * p, d * p],
        [0.0, p, q, -p - q],
    ])
}

/// General junction operator; rejects parameters violating positivity.
pub fn build_junction_operator(seg1: &RateTriple, seg2: &RateTriple, junction: &JunctionRates) -> Result<LocalOperator> {
    junction_report(seg1, seg2, junction).into_result()?;
    let (d1, d2) = (seg1.delta, seg2.delta);
    let (q1, q2) = (seg1.imbalance(), seg2.imbalance());
    let (pb, qb, qq) = (junction.p, junction.q, junction.big_q);
    let mut op = from_columns([
        [q2 - q1, qb * d2 - qq - q2, pb * d1 - qq + q1, 2.0 * qq - pb * d1 - qb * d2],
        [0.0, -qq - q1 - qb, qb, qq + q1],
        [0.0, pb, -qq + q2 - pb, qq - q2],
        [0.0, pb, qb, -pb - qb],
    ]);
    // rates that vanish analytically come out as rounding noise; clear them
    let noise = 8.0 * f64::EPSILON * op.max_abs();
    for r in 0..4 {
        for c in 0..4 {
            if r != c && op.m[(r, c)].abs() <= noise {
                op.m[(r, c)] = 0.0;
            }
        }
    }
    if op.m[(PP, PP)].abs() <= noise {
        op.m[(PP, PP)] = 0.0;
    }
    Ok(op)
}

/// Impurity junction between two copies of `rates`.
pub fn build_impurity_junction(rates: &RateTriple, s: f64) -> Result<(JunctionRates, LocalOperator)> {
    if !s.is_finite() {
        return Err(Error::InvalidRate { name: "s", value: s, reason: "not finite" });
    }
    let lo = -rates.p.min(rates.q);
    if s < lo {
        return Err(Error::InvalidRate { name: "s", value: s, reason: "below -min(p, q): negative hopping rate" });
    }
    let (p, q, d) = (rates.p + s, rates.q + s, rates.delta);
    let junction = JunctionRates { p, q, big_q: ((rates.q + rates.p) / 2.0 + s) * d };
    let op = from_columns([
        [0.0, 0.0, 0.0, 0.0],
        [0.0, -(1.0 + d) * q, q, d * q],
        [0.0, p, -(1.0 + d) * p, d * p],
        [0.0, p, q, -p - q],
    ]);
    Ok((junction, op))
}

/// Junction of the spatial quench between segments with different bulk rates.
pub fn build_quench_junction(seg1: &RateTriple, seg2: &RateTriple) -> Result<(JunctionRates, LocalOperator)> {
    let (p1, q1, d1) = (seg1.p, seg1.q, seg1.delta);
    let (p2, q2, d2) = (seg2.p, seg2.q, seg2.delta);
    let mut report = ValidationReport::default();
    report.require("Δ2·p2 ≥ Δ1·p1", d2 * p2, d1 * p1);
    report.require("Δ1·q1 ≥ Δ2·q2", d1 * q1, d2 * q2);
    report.into_result()?;
    let junction = JunctionRates { p: p1, q: q2, big_q: (p1 * d1 + q2 * d2) / 2.0 };
    let op = from_columns([
        [
            (d2 * (q2 - p2) - d1 * (q1 - p1)) / 2.0,
            (p2 * d2 - p1 * d1) / 2.0,
            (q1 * d1 - q2 * d2) / 2.0,
            0.0,
        ],
        [0.0, -(q1 * d1 + q2 * d2) / 2.0 - q2, q2, (q1 * d1 + q2 * d2) / 2.0],
        [0.0, p1, -(p1 * d1 + p2 * d2) / 2.0 - p1, (p1 * d1 + p2 * d2) / 2.0],
        [0.0, p1, q2, -p1 - q2],
    ]);
    Ok((junction, op))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quench_example(d1: f64, d2: f64) -> (RateTriple, RateTriple) {
        (RateTriple::new(0.6, 6.0, d1).unwrap(), RateTriple::new(6.0, 0.2, d2).unwrap())
    }

    #[test]
    fn bulk_operator_symmetric_point() {
        let m = build_bulk_operator(&RateTriple::new(1.0, 1.0, 0.0).unwrap());
        let want = [[0.0, 0.0, 0.0, 0.0], [0.0, -1.0, 1.0, 1.0], [0.0, 1.0, -1.0, 1.0], [0.0, 0.0, 0.0, -2.0]];
        for (r, row) in want.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                assert_eq!(m.entry(r, c), x);
            }
        }
    }

    #[test]
    fn bulk_operator_creation_entry() {
        let rates = RateTriple::from_theta(0.5, 3.0, 0.1).unwrap();
        let delta = 0.2f64.tan().powi(2);
        let m = build_bulk_operator(&rates);
        assert!((m.entry(MM, PM) - delta * 3.0).abs() < 1e-15);
        m.check_generator().unwrap();
        assert_eq!(m.empty_column_max_abs(), 0.0);
    }

    #[test]
    fn derived_quantities() {
        let r = RateTriple::from_theta(0.5, 3.0, 0.6).unwrap();
        assert!((r.theta() - 0.6).abs() < 1e-14);
        assert!((r.cos2theta() * (1.0 + r.delta()).sqrt() - 1.0).abs() < 1e-15);
        assert!((r.cos2theta() - 1.2f64.cos()).abs() < 1e-14);
        assert!((r.sin_sq() - 0.6f64.sin().powi(2)).abs() < 1e-14);
        assert!((r.cos_sq() - 0.6f64.cos().powi(2)).abs() < 1e-14);
        assert!((r.hopping_scale() - (1.5f64).sqrt() / r.cos2theta()).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(RateTriple::new(-1.0, 1.0, 0.0).is_err());
        assert!(RateTriple::new(1.0, f64::NAN, 0.0).is_err());
        assert!(RateTriple::new(1.0, 1.0, 2e12).is_err());
        assert!(RateTriple::from_theta(1.0, 1.0, std::f64::consts::FRAC_PI_4).is_err());
    }

    #[test]
    fn homogeneous_junction_is_bulk() {
        let r = RateTriple::new(0.7, 1.9, 0.8).unwrap();
        let j = build_junction_operator(&r, &r, &JunctionRates::homogeneous(&r)).unwrap();
        assert!(j.max_abs_diff(&build_bulk_operator(&r)) < 1e-14);
    }

    #[test]
    fn impurity_entry_and_general_form() {
        let r = RateTriple::from_theta(0.5, 3.0, 0.6).unwrap();
        let (junction, op) = build_impurity_junction(&r, -0.4).unwrap();
        assert!((op.entry(MM, MM) + 2.7).abs() < 1e-14);
        let general = build_junction_operator(&r, &r, &junction).unwrap();
        assert!(general.max_abs_diff(&op) < 1e-13);
        let (_, zero) = build_impurity_junction(&r, 0.0).unwrap();
        assert!(zero.max_abs_diff(&build_bulk_operator(&r)) < 1e-15);
    }

    #[test]
    fn impurity_lower_edge() {
        let r = RateTriple::from_theta(0.5, 3.0, 0.6).unwrap();
        let (_, op) = build_impurity_junction(&r, -0.5).unwrap();
        op.check_generator().unwrap();
        assert_eq!(op.entry(MP, PM), 2.5);
        assert_eq!(op.entry(PM, MP), 0.0);
        assert!(build_impurity_junction(&r, -0.5 - 1e-9).is_err());
    }

    #[test]
    fn quench_entry_and_general_form() {
        let (s1, s2) = quench_example(1.0, 1.0);
        let (junction, op) = build_quench_junction(&s1, &s2).unwrap();
        assert!((op.entry(PP, PP) + 5.6).abs() < 1e-14);
        let general = build_junction_operator(&s1, &s2, &junction).unwrap();
        assert!(general.max_abs_diff(&op) < 1e-13);
        op.check_generator().unwrap();
    }

    #[test]
    fn quench_of_identical_segments_is_bulk() {
        let r = RateTriple::new(1.3, 0.4, 2.0).unwrap();
        let (_, op) = build_quench_junction(&r, &r).unwrap();
        assert!(op.max_abs_diff(&build_bulk_operator(&r)) < 1e-14);
    }

    #[test]
    fn quench_boundary_rate_vanishes() {
        let s1 = RateTriple::new(0.6, 2.0, 1.0).unwrap();
        let s2 = RateTriple::new(6.0, 4.0, 0.5).unwrap();
        let (_, op) = build_quench_junction(&s1, &s2).unwrap();
        assert_eq!(op.entry(MP, PP), 0.0);
    }

    #[test]
    fn quench_names_the_violated_inequality() {
        let (s1, s2) = quench_example(1.0, 0.05);
        match build_quench_junction(&s1, &s2) {
            Err(Error::Validation(r)) => {
                assert_eq!(r.violations.len(), 1);
                assert_eq!(r.violations[0].constraint, "Δ2·p2 ≥ Δ1·p1");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn report_collects_every_violation() {
        let r = RateTriple::new(0.5, 3.0, 1.0).unwrap();
        let q2 = r.imbalance();
        let spec = ChainSpec::new(2, 2, r, r, JunctionRates::new(0.5, 3.0, q2 - 1e-3).unwrap()).unwrap();
        let report = spec.validate();
        let names: Vec<_> = report.violations.iter().map(|v| v.constraint).collect();
        assert!(names.contains(&"Q̄ ≥ Q2"), "{names:?}");
        assert!(names.contains(&"2Q̄ ≥ p̄Δ1 + q̄Δ2"));
        assert!(spec.bond_operators().is_err());
    }

    #[test]
    fn homogeneous_spec_is_valid() {
        let r = RateTriple::new(2.0, 0.3, 0.4).unwrap();
        assert!(ChainSpec::homogeneous(3, 4, r).unwrap().validate().is_valid());
    }

    #[test]
    fn json_round_trip() {
        let (s1, s2) = quench_example(1.0, 2.0);
        let spec = ChainSpec::quench(3, 4, s1, s2).unwrap();
        let back = ChainSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(spec, back);

        let text = r#"{"L1":2,"L2":3,"seg1":{"p":0.5,"q":3,"delta":1},"junction_kind":"impurity","s":0.25}"#;
        let imp = ChainSpec::from_json(text).unwrap();
        assert_eq!(imp.junction().p_bar(), 0.75);
        assert_eq!(imp.kind(), JunctionKind::Impurity { s: 0.25 });
        assert_eq!(ChainSpec::from_json(&imp.to_json()).unwrap(), imp);
    }

    #[test]
    fn json_rejects_inconsistent_input() {
        let missing = r#"{"L1":2,"L2":3,"seg1":{"p":0.5,"q":3,"delta":1},"seg2":{"p":0.5,"q":3,"delta":1}}"#;
        assert!(ChainSpec::from_json(missing).is_err());
        let negative = r#"{"L1":2,"L2":2,"seg1":{"p":-0.5,"q":3,"delta":1},"junction_kind":"impurity","s":0}"#;
        assert!(ChainSpec::from_json(negative).is_err());
        let zero_len = r#"{"L1":0,"L2":2,"seg1":{"p":0.5,"q":3,"delta":1},"junction_kind":"impurity","s":0}"#;
        assert!(ChainSpec::from_json(zero_len).is_err());
        let mismatch = r#"{"L1":2,"L2":2,"seg1":{"p":0.5,"q":3,"delta":1},"junction_kind":"impurity","s":0,
            "junction":{"p_bar":1,"q_bar":3,"Q_bar":1.75}}"#;
        assert!(ChainSpec::from_json(mismatch).is_err());
    }
}
