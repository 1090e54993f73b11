//! Spin-1/2 matrices in the rotated basis and the quadratic decomposition of
//! the bond operators.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{build_bulk_operator, build_junction_operator, JunctionRates, RateTriple};

/// Ladder and Pauli-like matrices for one angle θ.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinMatrixSet {
    pub plus: Matrix2<f64>,
    pub minus: Matrix2<f64>,
    pub z: Matrix2<f64>,
    pub x: Matrix2<f64>,
    /// S^y = i(S^- − S^+); purely imaginary, kept for completeness.
    pub y: Matrix2<Complex64>,
}

impl SpinMatrixSet {
    fn from_parts(cos2: f64, sin_sq: f64, cos_sq: f64) -> Self {
        let plus = Matrix2::new(sin_sq, -cos2 / 2.0, 2.0 * sin_sq * sin_sq / cos2, -sin_sq);
        let minus = Matrix2::new(cos_sq, cos2 / 2.0, -2.0 * cos_sq * cos_sq / cos2, -cos_sq);
        let delta = 1.0 / (cos2 * cos2) - 1.0;
        let z = cos2 * Matrix2::new(1.0, 1.0, delta.max(0.0), -1.0);
        let x = plus + minus;
        let y = (minus - plus).map(|v| Complex64::new(0.0, v));
        SpinMatrixSet { plus, minus, z, x, y }
    }

    /// Matrices for the segment angle of `rates`, evaluated from Δ.
    pub fn for_rates(rates: &RateTriple) -> Self {
        let mut set = Self::from_parts(rates.cos2theta(), rates.sin_sq(), rates.cos_sq());
        set.z = rates.cos2theta() * Matrix2::new(1.0, 1.0, rates.delta(), -1.0);
        set
    }
}

pub fn spin_matrices(theta: f64) -> Result<SpinMatrixSet> {
    if !(0.0..std::f64::consts::FRAC_PI_4).contains(&theta) {
        return Err(Error::InvalidRate { name: "theta", value: theta, reason: "outside [0, pi/4)" });
    }
    let (s, c) = theta.sin_cos();
    Ok(SpinMatrixSet::from_parts((2.0 * theta).cos(), s * s, c * c))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BulkCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub h: f64,
    pub h_bar: f64,
    pub t: f64,
    pub f: f64,
}

pub fn bulk_coefficients(rates: &RateTriple) -> BulkCoefficients {
    let (p, q) = (rates.p(), rates.q());
    let c2 = rates.cos2theta();
    let cc = c2 * c2;
    let cos4 = rates.cos_sq().powi(2);
    let sin4 = rates.sin_sq().powi(2);
    BulkCoefficients {
        a: (p * cos4 + q * sin4) / cc,
        b: (q * cos4 + p * sin4) / cc,
        c: (p + q) * cos4 / cc,
        d: (p + q) * sin4 / cc,
        h: p / (2.0 * c2),
        h_bar: q / (2.0 * c2),
        t: rates.boundary_field(),
        f: rates.diagonal_offset(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta_c: f64,
    pub eta: f64,
    pub eta_bar: f64,
    pub psi: f64,
    pub tau: f64,
    pub tau_bar: f64,
}

pub fn junction_coefficients(seg1: &RateTriple, seg2: &RateTriple, junction: &JunctionRates) -> JunctionCoefficients {
    let (pb, qb, qq) = (junction.p_bar(), junction.q_bar(), junction.big_q_bar());
    let (c1, c2) = (seg1.cos2theta(), seg2.cos2theta());
    let tau = (seg1.p() - seg1.q()) * seg1.delta() / 4.0;
    let tau_bar = -(seg2.p() - seg2.q()) * seg2.delta() / 4.0;
    JunctionCoefficients {
        alpha: pb * seg1.cos_sq() / c1 - qb * seg2.sin_sq() / c2 + qq / 2.0,
        beta: -pb * seg1.sin_sq() / c1 + qb * seg2.cos_sq() / c2 + qq / 2.0,
        gamma: pb * seg1.cos_sq() / c1 + qb * seg2.cos_sq() / c2 + qq / 2.0,
        delta_c: -pb * seg1.sin_sq() / c1 - qb * seg2.sin_sq() / c2 + qq / 2.0,
        eta: pb / (2.0 * c1),
        eta_bar: qb / (2.0 * c2),
        psi: tau + tau_bar - (qq + pb + qb) / 2.0,
        tau,
        tau_bar,
    }
}

/// Tolerance used for the decomposition identities.
pub fn identity_tolerance(scale: f64) -> f64 {
    1e-12f64.max(1e-13 * scale)
}

fn kron(a: &Matrix2<f64>, b: &Matrix2<f64>) -> Matrix4<f64> {
    a.kronecker(b)
}

/// Max elementwise residual between the bulk operator and its spin expansion.
pub fn verify_bulk_identity(rates: &RateTriple) -> f64 {
    let s = SpinMatrixSet::for_rates(rates);
    let k = bulk_coefficients(rates);
    let id = Matrix2::identity();
    let expansion = k.a * kron(&s.plus, &s.minus)
        + k.b * kron(&s.minus, &s.plus)
        + k.c * kron(&s.plus, &s.plus)
        + k.d * kron(&s.minus, &s.minus)
        + k.h * kron(&s.z, &id)
        + k.h_bar * kron(&id, &s.z)
        + k.f * Matrix4::identity()
        + k.t * (kron(&s.x, &id) - kron(&id, &s.x));
    (expansion - build_bulk_operator(rates).matrix()).amax()
}

/// Max elementwise residual between the junction operator and its spin
/// expansion (θ1 on the left site, θ2 on the right).
pub fn verify_junction_identity(seg1: &RateTriple, seg2: &RateTriple, junction: &JunctionRates) -> Result<f64> {
    let op = build_junction_operator(seg1, seg2, junction)?;
    let l = SpinMatrixSet::for_rates(seg1);
    let r = SpinMatrixSet::for_rates(seg2);
    let k = junction_coefficients(seg1, seg2, junction);
    let id = Matrix2::identity();
    let expansion = k.alpha * kron(&l.plus, &r.minus)
        + k.beta * kron(&l.minus, &r.plus)
        + k.gamma * kron(&l.plus, &r.plus)
        + k.delta_c * kron(&l.minus, &r.minus)
        + k.eta * kron(&l.z, &id)
        + k.eta_bar * kron(&id, &r.z)
        + k.psi * Matrix4::identity()
        + k.tau * kron(&l.x, &id)
        + k.tau_bar * kron(&id, &r.x);
    Ok((expansion - op.matrix()).amax())
}
