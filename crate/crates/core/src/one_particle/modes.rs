//! Explicit eigenvectors of ℳ built from plane-wave ansätze.
//!
//! A mode stores one pair (φ⁺_ℓ, φ⁻_ℓ) per site ℓ = 0 … N+1. Interior sites
//! follow the ansatz; the end sites follow from the first and last block rows,
//! φ_0 = T1 φ_1 / λ and φ_{N+1} = −T2ᵀ φ_N / λ.

use num_complex::Complex64;

use super::script_matrix::{build_script_matrix, BlockTridiagonalM};
use crate::error::{Error, Result};
use crate::model::{ChainSpec, RateTriple};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    TrivialZero,
    Bulk,
    LeftEdge,
    RightEdge,
    HomogeneousFirst,
    HomogeneousSecond,
}

/// Scalars that determine a mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnsatzParameters {
    None,
    /// Segment amplitudes are `num` (segment 1) and `den` (segment 2); v = num/den.
    Bulk { x1: C, x2: C, num: C, den: C },
    LeftEdge { x1: C, x2: C, v1: C, v2: C },
    RightEdge { x1: C, x2: C, w1: C, w2: C },
    Homogeneous { x: C, r: C },
}

#[derive(Debug, Clone)]
pub struct ModeVector {
    pub lambda: f64,
    pub kind: ModeKind,
    pub params: AnsatzParameters,
    /// Interleaved (φ⁺_ℓ, φ⁻_ℓ), normalized so the largest modulus is 1.
    pub components: Vec<C>,
}

impl ModeVector {
    fn new(lambda: f64, kind: ModeKind, params: AnsatzParameters, mut components: Vec<C>) -> Result<Self> {
        let big = components.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !(big.is_finite() && big > 0.0) {
            return Err(Error::DegenerateMode(format!("{kind:?} mode at λ = {lambda} has no finite nonzero component")));
        }
        let pivot = *components.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
        components.iter_mut().for_each(|z| *z /= pivot);
        Ok(ModeVector { lambda, kind, params, components })
    }

    pub fn site(&self, l: usize) -> (C, C) {
        (self.components[2 * l], self.components[2 * l + 1])
    }

    /// ‖ℳφ − λφ‖∞ / ‖φ‖∞.
    pub fn residual(&self, m: &BlockTridiagonalM) -> f64 {
        let a = m.matrix();
        let n = a.nrows();
        assert_eq!(n, self.components.len(), "mode and matrix sizes differ");
        let mut worst = 0.0f64;
        for r in 0..n {
            let mut acc = C::new(0.0, 0.0);
            for c in 0..n {
                let v = a[(r, c)];
                if v != 0.0 {
                    acc += self.components[c] * v;
                }
            }
            worst = worst.max((acc - self.components[r] * self.lambda).norm());
        }
        let norm = self.components.iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst / norm
    }
}

/// x^e (1+x, 1−x) − y^e (1+y, 1−y) with y = p/(q x).
fn plane_pair(x: C, p: f64, q: f64, e: i32) -> (C, C) {
    let y = p / (x * q);
    let (xe, ye) = (x.powi(e), y.powi(e));
    (xe * (1.0 + x) - ye * (1.0 + y), xe * (1.0 - x) - ye * (1.0 - y))
}

fn close_ends(lambda: f64, interior: &[(C, C)], t1: f64, t2: f64, kind: ModeKind) -> Result<Vec<C>> {
    if lambda == 0.0 && (t1 != 0.0 || t2 != 0.0) {
        return Err(Error::DegenerateMode(format!("{kind:?} mode with λ = 0 cannot fix the end sites")));
    }
    let (f1p, f1m) = interior[0];
    let (fnp, fnm) = *interior.last().unwrap();
    let s = f1p + f1m;
    let phi0 = if t1 == 0.0 { (C::default(), C::default()) } else { (s * (-t1 / lambda), s * (t1 / lambda)) };
    let d = fnm - fnp;
    let phi_end = if t2 == 0.0 { (C::default(), C::default()) } else { (d * (-t2 / lambda), d * (-t2 / lambda)) };
    let mut out = Vec::with_capacity(2 * interior.len() + 4);
    out.extend([phi0.0, phi0.1]);
    for &(a, b) in interior {
        out.extend([a, b]);
    }
    out.extend([phi_end.0, phi_end.1]);
    Ok(out)
}

/// The two λ = 0 modes supported on the end sites only.
pub fn trivial_zero_modes(spec: &ChainSpec) -> [ModeVector; 2] {
    let dim = 2 * (spec.sites() + 2);
    let make = |sign: f64| {
        let mut c = vec![C::default(); dim];
        c[0] = C::new(0.5, 0.0);
        c[1] = C::new(0.5, 0.0);
        c[dim - 2] = C::new(0.5 * sign, 0.0);
        c[dim - 1] = C::new(-0.5 * sign, 0.0);
        ModeVector { lambda: 0.0, kind: ModeKind::TrivialZero, params: AnsatzParameters::None, components: c }
    };
    [make(1.0), make(-1.0)]
}

fn bulk_x(rates: &RateTriple, lambda: f64) -> C {
    let z = (lambda - 2.0 * rates.diagonal_offset()) / (2.0 * rates.hopping_scale());
    let z = C::new(z, 0.0);
    let root = (C::new(1.0, 0.0) - z * z).sqrt();
    (z + C::i() * root) * (rates.p() / rates.q()).sqrt()
}

fn check_distinct(x: C, rates: &RateTriple, what: &str) -> Result<()> {
    let y = rates.p() / (x * rates.q());
    if (x - y).norm() <= 1e-12 * x.norm().max(1e-300) {
        return Err(Error::DegenerateMode(format!("{what}: x² = p/q makes both plane waves coincide")));
    }
    Ok(())
}

/// The eigenvector for a bulk root `lambda` (two plane waves per segment,
/// matched across the junction).
pub fn bulk_mode(spec: &ChainSpec, lambda: f64) -> Result<ModeVector> {
    let (s1, s2) = (spec.seg1(), spec.seg2());
    if s1.p() * s1.q() == 0.0 || s2.p() * s2.q() == 0.0 {
        return Err(Error::Unsupported("bulk ansatz needs p·q > 0 on both segments".into()));
    }
    let (l1, l2) = (spec.l1() as i32, spec.l2() as i32);
    let n = l1 + l2;
    let x1 = bulk_x(s1, lambda);
    let x2 = bulk_x(s2, lambda);
    check_distinct(x1, s1, "segment 1")?;
    check_distinct(x2, s2, "segment 2")?;
    let (num_a, num_b) = (x2.powi(-l2), (x2 * (s2.q() / s2.p())).powi(l2));
    let (den_a, den_b) = (x1.powi(l1), (C::new(s1.p(), 0.0) / (x1 * s1.q())).powi(l1));
    let (mut num, mut den) = (num_a - num_b, den_a - den_b);
    let wave = |a: C, b: C| -> Result<Vec<C>> {
        let interior: Vec<(C, C)> = (1..=n)
            .map(|l| {
                let (u, w) = if l <= l1 {
                    (plane_pair(x1, s1.p(), s1.q(), l - 1), (a, a))
                } else {
                    (plane_pair(x2, s2.p(), s2.q(), l - n - 1), (b, b))
                };
                (u.0 * w.0, u.1 * w.1)
            })
            .collect();
        close_ends(lambda, &interior, s1.boundary_field(), s2.boundary_field(), ModeKind::Bulk)
    };
    let tiny = |v: C, a: C, b: C| v.norm() <= 1e-9 * a.norm().max(b.norm());
    if tiny(num, num_a, num_b) && tiny(den, den_a, den_b) {
        // both segments resonate at λ: the junction rows fix the amplitude ratio
        let m = build_script_matrix(spec)?;
        let zero = C::default();
        let (u, w) = (wave(C::new(1.0, 0.0), zero)?, wave(zero, C::new(1.0, 0.0))?);
        let (ru, rw) = (shifted_apply(&m, &u, lambda), shifted_apply(&m, &w, lambda));
        (num, den) = smallest_combination(&ru, &rw);
    }
    let comps = wave(num, den)?;
    ModeVector::new(lambda, ModeKind::Bulk, AnsatzParameters::Bulk { x1, x2, num, den }, comps)
}

/// (ℳ − λ) v.
fn shifted_apply(m: &BlockTridiagonalM, v: &[C], lambda: f64) -> Vec<C> {
    let a = m.matrix();
    (0..a.nrows())
        .map(|r| (0..a.ncols()).fold(C::default(), |acc, c| acc + v[c] * a[(r, c)]) - v[r] * lambda)
        .collect()
}

/// Unit (α, β) minimizing ‖α u + β w‖.
fn smallest_combination(u: &[C], w: &[C]) -> (C, C) {
    let dot = |x: &[C], y: &[C]| x.iter().zip(y).fold(C::default(), |acc, (a, b)| acc + a.conj() * b);
    let (g11, g12, g22) = (dot(u, u).re, dot(u, w), dot(w, w).re);
    // smallest eigenvalue of the Hermitian Gram matrix [[g11, g12], [g12*, g22]]
    let half_tr = 0.5 * (g11 + g22);
    let mu = half_tr - (0.25 * (g11 - g22).powi(2) + g12.norm_sqr()).sqrt();
    let (a, b) = if (g11 - mu).abs() >= (g22 - mu).abs() { (-g12, C::new(g11 - mu, 0.0)) } else { (C::new(g22 - mu, 0.0), -g12.conj()) };
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if norm == 0.0 {
        return (C::new(1.0, 0.0), C::default());
    }
    (a / norm, b / norm)
}

/// Root of q x² − (λ cos2θ + (p+q)(cos2θ + 1/cos2θ)/2) x + p = 0 with the
/// smaller modulus.
fn decaying_root(rates: &RateTriple, lambda: f64) -> C {
    let (p, q, c) = (rates.p(), rates.q(), rates.cos2theta());
    let b = lambda * c + (p + q) * (c + 1.0 / c) / 2.0;
    let disc = C::new(b * b - 4.0 * p * q, 0.0).sqrt();
    let r1 = (b + disc) / (2.0 * q);
    let r2 = (b - disc) / (2.0 * q);
    if r1.norm() <= r2.norm() { r1 } else { r2 }
}

fn edge_energy(rates: &RateTriple, upper: bool) -> (f64, C) {
    let (p, q, c) = (rates.p(), rates.q(), rates.cos2theta());
    let e = (q - p) * rates.delta() / 2.0;
    if upper {
        (e, C::new(p / q * c, 0.0))
    } else {
        (-e, C::new(c, 0.0))
    }
}

/// Mode localized on segment 1 with λ = +(q1−p1)Δ1/2 (`upper`) or its negative.
pub fn left_edge_mode(spec: &ChainSpec, upper: bool) -> Result<ModeVector> {
    let (s1, s2, j) = (spec.seg1(), spec.seg2(), spec.junction());
    let (p1, q1, c1) = (s1.p(), s1.q(), s1.cos2theta());
    let (p2, q2, c2) = (s2.p(), s2.q(), s2.cos2theta());
    if p1 == q1 || s1.delta() == 0.0 {
        return Err(Error::DegenerateMode("segment 1 edge energy is zero; it merges with the zero modes".into()));
    }
    if q1 == 0.0 || q2 == 0.0 || p2 == 0.0 || j.p_bar() == 0.0 {
        return Err(Error::DegenerateMode("left edge ansatz needs q1, p2, q2, p̄ > 0".into()));
    }
    let (lambda, x1) = edge_energy(s1, upper);
    let (l1, l2) = (spec.l1() as i32, spec.l2() as i32);
    let n = l1 + l2;
    let x2 = decaying_root(s2, lambda);
    let (pb, qb) = (j.p_bar(), j.q_bar());
    let k = j.big_q_bar() + pb + qb;
    let r2 = x2 * x2 * (q2 / p2);
    let gap = p1 - x1 * x1 * q1;
    if gap.norm() < 1e-14 * p1 {
        return Err(Error::DegenerateMode("p1 = q1 x1² in the left edge ansatz".into()));
    }
    let bracket = (k + lambda - x1 * (pb * q1 / (p1 * c1))) * (1.0 - r2.powi(l2)) - x2 * (qb / c2) * (1.0 - r2.powi(l2 - 1));
    let v1 = bracket * (p1 * c1) / (gap * pb * x1.powi(l1 - 1) * x2.powi(l2));
    let v2 = (x1 * x1 * (q1 / p1)).powi(l1) * v1 - (x1 * (q1 / p1)).powi(l1) * x2.powi(-l2) * (1.0 - r2.powi(l2));
    let y1 = p1 / (x1 * q1);
    let interior: Vec<(C, C)> = (1..=n)
        .map(|l| {
            if l <= l1 {
                let (xe, ye) = (x1.powi(l - 1) * v1, y1.powi(l - 1) * v2);
                (xe * (1.0 + x1) - ye * (1.0 + y1), xe * (1.0 - x1) - ye * (1.0 - y1))
            } else {
                plane_pair(x2, p2, q2, l - n - 1)
            }
        })
        .collect();
    let comps = close_ends(lambda, &interior, s1.boundary_field(), s2.boundary_field(), ModeKind::LeftEdge)?;
    ModeVector::new(lambda, ModeKind::LeftEdge, AnsatzParameters::LeftEdge { x1, x2, v1, v2 }, comps)
}

/// Mode localized on segment 2 with λ = +(q2−p2)Δ2/2 (`upper`) or its negative.
pub fn right_edge_mode(spec: &ChainSpec, upper: bool) -> Result<ModeVector> {
    let (s1, s2, j) = (spec.seg1(), spec.seg2(), spec.junction());
    let (p1, q1, c1) = (s1.p(), s1.q(), s1.cos2theta());
    let (p2, q2, c2) = (s2.p(), s2.q(), s2.cos2theta());
    if p2 == q2 || s2.delta() == 0.0 {
        return Err(Error::DegenerateMode("segment 2 edge energy is zero; it merges with the zero modes".into()));
    }
    if p1 == 0.0 || q1 == 0.0 || q2 == 0.0 || j.q_bar() == 0.0 {
        return Err(Error::DegenerateMode("right edge ansatz needs p1, q1, q2, q̄ > 0".into()));
    }
    let (lambda, x2) = edge_energy(s2, upper);
    let (l1, l2) = (spec.l1() as i32, spec.l2() as i32);
    let n = l1 + l2;
    let x1 = decaying_root(s1, lambda);
    let (pb, qb) = (j.p_bar(), j.q_bar());
    let k = j.big_q_bar() + pb + qb;
    let big_p1 = p1 / (x1 * x1 * q1);
    let gap = p2 - x2 * x2 * q2;
    if gap.norm() < 1e-14 * p2 {
        return Err(Error::DegenerateMode("p2 = q2 x2² in the right edge ansatz".into()));
    }
    let bracket = (k + lambda - qb * p2 / (x2 * q2 * c2)) * (big_p1.powi(l1) - 1.0)
        - pb / (x1 * c1) * (big_p1.powi(l1 - 1) - 1.0);
    let w1 = bracket * x1.powi(l1) * x2.powi(l2 + 1) * (q2 * c2) / (gap * qb);
    let w2 = (p2 / (x2 * x2 * q2)).powi(l2) * w1 + (p2 / (x2 * q2)).powi(l2) * x1.powi(l1) * (big_p1.powi(l1) - 1.0);
    let y2 = p2 / (x2 * q2);
    let interior: Vec<(C, C)> = (1..=n)
        .map(|l| {
            if l <= l1 {
                plane_pair(x1, p1, q1, l - 1)
            } else {
                let e = l - n - 1;
                let (xe, ye) = (x2.powi(e) * w1, y2.powi(e) * w2);
                (xe * (1.0 + x2) - ye * (1.0 + y2), xe * (1.0 - x2) - ye * (1.0 - y2))
            }
        })
        .collect();
    let comps = close_ends(lambda, &interior, s1.boundary_field(), s2.boundary_field(), ModeKind::RightEdge)?;
    ModeVector::new(lambda, ModeKind::RightEdge, AnsatzParameters::RightEdge { x1, x2, w1, w2 }, comps)
}

#[derive(Debug, Clone)]
pub struct EdgeModes {
    pub modes: Vec<ModeVector>,
    /// Why a mode could not be built (zero edge energy and similar).
    pub notices: Vec<String>,
}

/// Up to four edge modes: λ = ±(q1−p1)Δ1/2 and ±(q2−p2)Δ2/2.
pub fn edge_modes(spec: &ChainSpec) -> EdgeModes {
    let mut out = EdgeModes { modes: Vec::new(), notices: Vec::new() };
    for (side, f) in [("left", left_edge_mode as fn(&ChainSpec, bool) -> Result<ModeVector>), ("right", right_edge_mode)] {
        for upper in [true, false] {
            match f(spec, upper) {
                Ok(m) => out.modes.push(m),
                Err(e) => {
                    let note = format!("{side} edge: {e}");
                    if !out.notices.contains(&note) {
                        out.notices.push(note);
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HomogeneousFamily {
    /// Energies λ(x) = (q x + p/x − K0)/cos2θ.
    First,
    /// The opposite energies, from the mirrored ansatz.
    Second,
}

/// All L+1 nonzero-energy modes of one family for a uniform chain of `l` sites.
pub fn homogeneous_modes(rates: &RateTriple, l: usize, family: HomogeneousFamily) -> Result<Vec<ModeVector>> {
    let (p, q, c) = (rates.p(), rates.q(), rates.cos2theta());
    if p * q == 0.0 {
        return Err(Error::Unsupported("homogeneous modes need p·q > 0".into()));
    }
    if l < 2 {
        return Err(Error::InvalidRate { name: "L", value: l as f64, reason: "homogeneous chain needs L ≥ 2" });
    }
    let t = rates.boundary_field();
    let k0 = (p + q) * (c + 1.0 / c) / 2.0;
    let phases = (1..l).map(|k| C::from_polar(1.0, std::f64::consts::PI * k as f64 / l as f64));
    let mut out = Vec::with_capacity(l + 1);
    match family {
        HomogeneousFamily::First => {
            let xs = [C::new(p / q * c, 0.0), C::new(c, 0.0)]
                .into_iter()
                .chain(phases.map(|ph| ph * (p / q).sqrt()));
            for x in xs {
                check_distinct(x, rates, "first family")?;
                let lambda = ((x * q + p / x - k0) / c).re;
                let interior: Vec<(C, C)> = (1..=l as i32).map(|s| plane_pair(x, p, q, s - 1)).collect();
                let comps = close_ends(lambda, &interior, t, t, ModeKind::HomogeneousFirst)?;
                let params = AnsatzParameters::Homogeneous { x, r: C::new(1.0, 0.0) };
                out.push(ModeVector::new(lambda, ModeKind::HomogeneousFirst, params, comps)?);
            }
        }
        HomogeneousFamily::Second => {
            let (c4, s4) = (rates.cos_sq().powi(2), rates.sin_sq().powi(2));
            let xs = [C::new(c, 0.0), C::new(1.0 / c, 0.0)]
                .into_iter()
                .chain(phases.map(|ph| ph * (q / p).sqrt()));
            for x in xs {
                let denom = (x * (p * c) - q) * (x * p - q * c);
                if denom.norm() < 1e-12 * (p * q).max(1e-300) {
                    return Err(Error::DegenerateMode("pole of r(x) in the second ansatz".into()));
                }
                let r = (x * c - 1.0) * (x - c) * (p * q) / denom;
                let y = q / (x * p);
                let lambda = (-(x * p + q / x - k0) / c).re;
                let interior: Vec<(C, C)> = (1..=l as i32)
                    .map(|s| {
                        let (xe, ye) = (x.powi(s - 1), y.powi(s - 1) * r);
                        (xe * (1.0 - x) * c4 - ye * (1.0 - y) * c4, xe * (1.0 + x) * s4 - ye * (1.0 + y) * s4)
                    })
                    .collect();
                let comps = close_ends(lambda, &interior, t, t, ModeKind::HomogeneousSecond)?;
                out.push(ModeVector::new(lambda, ModeKind::HomogeneousSecond, AnsatzParameters::Homogeneous { x, r }, comps)?);
            }
        }
    }
    Ok(out)
}
