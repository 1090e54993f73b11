//! The secular equation for the bulk one-particle energies.
//!
//! With z_i = (λ − 2f_i)/(2μ_i) and U_n the Chebyshev polynomials of the second
//! kind, the bulk energies are the roots of
//!
//! F(λ) = (λ + Q̄ + p̄ + q̄) U_{L1−1}(z1) U_{L2−1}(z2)
//!        − μ1 (p̄/p1) U_{L1−2}(z1) U_{L2−1}(z2) − μ2 (q̄/q2) U_{L1−1}(z1) U_{L2−2}(z2).
//!
//! Dividing by U_{L1−1} U_{L2−1} leaves g(λ) = λ + K − A·R1 − B·R2 with ratios
//! R = U_{n−1}/U_n that decrease between their poles. Since A, B ≥ 0, g
//! increases strictly between consecutive poles, which brackets every root.

use crate::chebyshev::{chebyshev_ratio, chebyshev_u_scaled, Scaled};
use crate::error::{Error, Result};
use crate::model::ChainSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct SecularEquation {
    l1: usize,
    l2: usize,
    f1: f64,
    f2: f64,
    mu1: f64,
    mu2: f64,
    k: f64,
    a: f64,
    b: f64,
}

/// One distinct pole position of g, with how many segments vanish there and
/// whether any of them carries a nonzero weight.
#[derive(Debug, Clone, Copy)]
struct Pole {
    at: f64,
    multiplicity: usize,
    active: bool,
}

impl SecularEquation {
    pub fn new(spec: &ChainSpec) -> Result<Self> {
        let (s1, s2, j) = (spec.seg1(), spec.seg2(), spec.junction());
        let (l1, l2) = (spec.l1(), spec.l2());
        let need = |l: usize, p: f64, q: f64, which: &str| {
            if l >= 2 && p * q == 0.0 {
                Err(Error::Unsupported(format!("segment {which} has p·q = 0 (μ = 0)")))
            } else {
                Ok(())
            }
        };
        need(l1, s1.p(), s1.q(), "1")?;
        need(l2, s2.p(), s2.q(), "2")?;
        let (mu1, mu2) = (s1.hopping_scale(), s2.hopping_scale());
        Ok(SecularEquation {
            l1,
            l2,
            f1: s1.diagonal_offset(),
            f2: s2.diagonal_offset(),
            mu1,
            mu2,
            k: j.big_q_bar() + j.p_bar() + j.q_bar(),
            a: if l1 >= 2 { mu1 * j.p_bar() / s1.p() } else { 0.0 },
            b: if l2 >= 2 { mu2 * j.q_bar() / s2.q() } else { 0.0 },
        })
    }

    /// Degree of F in λ.
    pub fn degree(&self) -> usize {
        self.l1 + self.l2 - 1
    }

    fn z1(&self, lambda: f64) -> f64 {
        (lambda - 2.0 * self.f1) / (2.0 * self.mu1)
    }

    fn z2(&self, lambda: f64) -> f64 {
        (lambda - 2.0 * self.f2) / (2.0 * self.mu2)
    }

    /// U_{L−1+shift}(z) for one segment; shifts are −1, 0 or +1.
    fn u(&self, seg: usize, shift: i64, lambda: f64) -> Scaled {
        let (l, mu) = if seg == 1 { (self.l1, self.mu1) } else { (self.l2, self.mu2) };
        let n = l as i64 - 1 + shift;
        if n <= 0 || mu == 0.0 {
            // U_{-1} = 0, U_0 = 1; a μ = 0 segment only ever appears with L = 1
            return if n < 0 { Scaled::ZERO } else if n == 0 { Scaled::new(1.0) } else { Scaled::new(f64::NAN) };
        }
        let z = if seg == 1 { self.z1(lambda) } else { self.z2(lambda) };
        chebyshev_u_scaled(n, z)
    }

    /// The three terms of F(λ): (λ+K)U1U2, A·U1'U2 and B·U1U2'.
    fn terms(&self, lambda: f64) -> [Scaled; 3] {
        let u1 = self.u(1, 0, lambda);
        let u2 = self.u(2, 0, lambda);
        let u1m = self.u(1, -1, lambda);
        let u2m = self.u(2, -1, lambda);
        [u1 * u2 * (lambda + self.k), u1m * u2 * self.a, u1 * u2m * self.b]
    }

    /// F(λ) in overflow-free form.
    pub fn value(&self, lambda: f64) -> Scaled {
        let [t0, t1, t2] = self.terms(lambda);
        t0 - t1 - t2
    }

    /// Scale of segment `seg` near λ: max(|U_{L−2}|, |U_{L−1}|, |U_L|) with the
    /// upper shift included on request. Adjacent U_n never vanish together.
    fn segment_scale(&self, seg: usize, lambda: f64, with_upper: bool) -> Scaled {
        let mut m = self.u(seg, 0, lambda).abs();
        let lower = self.u(seg, -1, lambda).abs();
        if lower.cmp_abs(&m).is_gt() {
            m = lower;
        }
        if with_upper {
            let upper = self.u(seg, 1, lambda).abs();
            if upper.cmp_abs(&m).is_gt() {
                m = upper;
            }
        }
        m
    }

    /// |F(λ)| / ((|λ+K| + A + B)·s1·s2) with s_i the segment scales; near a
    /// simple root this is the distance to the root in units of the slope.
    pub fn relative_residual(&self, lambda: f64) -> f64 {
        let v = self.value(lambda);
        let scale = self.segment_scale(1, lambda, false)
            * self.segment_scale(2, lambda, false)
            * ((lambda + self.k).abs() + self.a + self.b);
        if v.is_zero() {
            return 0.0;
        }
        2f64.powf(v.log2_abs() - scale.log2_abs())
    }

    /// g(λ) = F(λ) / (U_{L1−1} U_{L2−1}).
    pub fn reduced(&self, lambda: f64) -> f64 {
        let r1 = if self.l1 >= 2 { chebyshev_ratio(self.l1 - 1, self.z1(lambda)) } else { 0.0 };
        let r2 = if self.l2 >= 2 { chebyshev_ratio(self.l2 - 1, self.z2(lambda)) } else { 0.0 };
        let mut g = lambda + self.k;
        if self.a != 0.0 {
            g -= self.a * r1;
        }
        if self.b != 0.0 {
            g -= self.b * r2;
        }
        g
    }

    fn poles(&self) -> Vec<Pole> {
        let mut raw: Vec<(f64, bool)> = Vec::new();
        for (l, f, mu, w) in [(self.l1, self.f1, self.mu1, self.a), (self.l2, self.f2, self.mu2, self.b)] {
            for k in 1..l {
                let c = (std::f64::consts::PI * k as f64 / l as f64).cos();
                raw.push((2.0 * f + 2.0 * mu * c, w > 0.0));
            }
        }
        raw.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut poles: Vec<Pole> = Vec::new();
        for (at, active) in raw {
            match poles.last_mut() {
                Some(last) if (at - last.at).abs() <= 1e-12 * at.abs().max(1.0) => {
                    last.multiplicity += 1;
                    last.active |= active;
                }
                _ => poles.push(Pole { at, multiplicity: 1, active }),
            }
        }
        poles
    }

    /// Root of the increasing function g on (lo, hi), where g(lo⁺) < 0 < g(hi⁻).
    fn bisect(&self, mut lo: f64, mut hi: f64) -> f64 {
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return mid;
            }
            let g = self.reduced(mid);
            if g == 0.0 {
                return mid;
            }
            // NaN only occurs exactly on a pole; treat it as the adjacent side
            if g > 0.0 || (g.is_nan() && (mid - hi).abs() < (mid - lo).abs()) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    /// All roots, in decreasing order, with multiplicity.
    pub fn roots(&self) -> Result<Vec<f64>> {
        let poles = self.poles();
        let mut roots = Vec::with_capacity(self.degree());
        for p in &poles {
            let extra = p.multiplicity - usize::from(p.active);
            roots.extend(std::iter::repeat_n(p.at, extra));
        }
        let active: Vec<f64> = poles.iter().filter(|p| p.active).map(|p| p.at).collect();
        let scale = active.iter().fold(self.k.abs().max(1.0), |m, x| m.max(x.abs()));
        let mut intervals = Vec::with_capacity(active.len() + 1);
        // left of the lowest pole: g → −∞ as λ → −∞
        let first = active.first().copied().unwrap_or(-self.k);
        let mut step = scale;
        let mut lo = first - step;
        while self.reduced(lo) >= 0.0 {
            step *= 2.0;
            lo = first - step;
            if !lo.is_finite() {
                return Err(Error::Consistency("secular function never changes sign on the left".into()));
            }
        }
        let last = active.last().copied().unwrap_or(-self.k);
        let mut step = scale;
        let mut hi = last + step;
        while self.reduced(hi) <= 0.0 {
            step *= 2.0;
            hi = last + step;
            if !hi.is_finite() {
                return Err(Error::Consistency("secular function never changes sign on the right".into()));
            }
        }
        if active.is_empty() {
            intervals.push((lo, hi));
        } else {
            intervals.push((lo, active[0]));
            for w in active.windows(2) {
                intervals.push((w[0], w[1]));
            }
            intervals.push((*active.last().unwrap(), hi));
        }
        for &(a, b) in &intervals {
            roots.push(self.bisect(a, b));
        }
        roots.sort_by(|x, y| y.total_cmp(x));
        if roots.len() != self.degree() {
            return Err(Error::RootCount {
                found: roots.len(),
                expected: self.degree(),
                intervals: intervals.len(),
                roots,
            });
        }
        let tol = 1e-10 * scale;
        if let Some(&top) = roots.first() {
            if top > tol {
                return Err(Error::Consistency(format!("positive one-particle energy {top:e}")));
            }
        }
        Ok(roots)
    }

    /// Sum of the roots predicted from the two leading coefficients of F.
    pub fn vieta_sum(&self) -> f64 {
        -(self.k - 2.0 * (self.l1 - 1) as f64 * self.f1 - 2.0 * (self.l2 - 1) as f64 * self.f2)
    }

    /// Relative residuals of the two junction conditions at `lambda`, each in
    /// Chebyshev form with the U_{L1}, U_{L2} terms kept separate.
    pub fn junction_residuals(&self, lambda: f64) -> (f64, f64) {
        let u1 = self.u(1, 0, lambda);
        let u2 = self.u(2, 0, lambda);
        let u1m = self.u(1, -1, lambda);
        let u2m = self.u(2, -1, lambda);
        let u1p = self.u(1, 1, lambda);
        let u2p = self.u(2, 1, lambda);
        let (pr, qr) = (self.a / self.mu1.max(f64::MIN_POSITIVE), self.b / self.mu2.max(f64::MIN_POSITIVE));
        let scale = self.segment_scale(1, lambda, true) * self.segment_scale(2, lambda, true);
        let rel = |lhs: Scaled, rhs: [Scaled; 3], weight: f64| {
            let diff = lhs - rhs[0] - rhs[1] - rhs[2];
            if diff.is_zero() { 0.0 } else { 2f64.powf(diff.log2_abs() - (scale * weight).log2_abs()) }
        };
        // (2f1 + K) U1 U2 = μ1(p̄/p1 − 1) U1' U2 + μ2 (q̄/q2) U1 U2' − μ1 U1⁺ U2
        let r1 = if self.l1 >= 2 {
            rel(
                u1 * u2 * (2.0 * self.f1 + self.k),
                [u1m * u2 * (self.mu1 * (pr - 1.0)), u1 * u2m * self.b, -(u1p * u2 * self.mu1)],
                (2.0 * self.f1 + self.k).abs() + self.mu1 * ((pr - 1.0).abs() + 1.0) + self.b,
            )
        } else {
            self.relative_residual(lambda)
        };
        let r2 = if self.l2 >= 2 {
            rel(
                u1 * u2 * (2.0 * self.f2 + self.k),
                [u1 * u2m * (self.mu2 * (qr - 1.0)), u1m * u2 * self.a, -(u1 * u2p * self.mu2)],
                (2.0 * self.f2 + self.k).abs() + self.mu2 * ((qr - 1.0).abs() + 1.0) + self.a,
            )
        } else {
            self.relative_residual(lambda)
        };
        (r1, r2)
    }
}

/// F(λ) for `spec`.
pub fn secular_function(spec: &ChainSpec, lambda: f64) -> Result<Scaled> {
    Ok(SecularEquation::new(spec)?.value(lambda))
}

/// The L1+L2−1 bulk energies, in decreasing order.
pub fn solve_secular(spec: &ChainSpec) -> Result<Vec<f64>> {
    spec.ensure_valid()?;
    SecularEquation::new(spec)?.roots()
}
