//! Chebyshev polynomials of the second kind with overflow-free evaluation.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

/// A real number stored as `mantissa · 2^exponent` with |mantissa| in [1, 2)
/// (or exactly zero), so products of many large factors never overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    mantissa: f64,
    exponent: i64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled { mantissa: 0.0, exponent: 0 };

    pub fn new(x: f64) -> Self {
        Scaled { mantissa: x, exponent: 0 }.normalized()
    }

    fn normalized(self) -> Self {
        let m = self.mantissa;
        if m == 0.0 || !m.is_finite() {
            return Scaled { mantissa: m, exponent: 0 };
        }
        let (frac, exp) = frexp(m);
        Scaled { mantissa: frac, exponent: self.exponent + exp }
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    /// −1, 0 or +1.
    pub fn signum(&self) -> f64 {
        if self.mantissa > 0.0 {
            1.0
        } else if self.mantissa < 0.0 {
            -1.0
        } else {
            0.0
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    pub fn abs(self) -> Self {
        Scaled { mantissa: self.mantissa.abs(), ..self }
    }

    /// log2 |x|; −∞ for zero.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mantissa.abs().log2() + self.exponent as f64
        }
    }

    /// Plain value; may overflow to ±∞ or underflow to 0.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let e = self.exponent.clamp(-2100, 2100) as i32;
        // split the power so intermediate factors stay representable
        let half = e / 2;
        self.mantissa * 2f64.powi(half) * 2f64.powi(e - half)
    }

    pub fn cmp_abs(&self, other: &Scaled) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => self
                .exponent
                .cmp(&other.exponent)
                .then(self.mantissa.abs().total_cmp(&other.mantissa.abs())),
        }
    }
}

fn frexp(x: f64) -> (f64, i64) {
    let bits = x.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    if raw_exp == 0 {
        // subnormal: lift into the normal range first
        let (m, e) = frexp(x * 2f64.powi(64));
        return (m, e - 64);
    }
    let mant = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1023u64 << 52));
    (mant, raw_exp - 1023)
}

impl Mul for Scaled {
    type Output = Scaled;
    fn mul(self, rhs: Scaled) -> Scaled {
        Scaled { mantissa: self.mantissa * rhs.mantissa, exponent: self.exponent + rhs.exponent }.normalized()
    }
}

impl Mul<f64> for Scaled {
    type Output = Scaled;
    fn mul(self, rhs: f64) -> Scaled {
        self * Scaled::new(rhs)
    }
}

impl Add for Scaled {
    type Output = Scaled;
    fn add(self, rhs: Scaled) -> Scaled {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.exponent >= rhs.exponent { (self, rhs) } else { (rhs, self) };
        let shift = big.exponent - small.exponent;
        if shift > 1100 {
            return big;
        }
        let m = big.mantissa + small.mantissa * 2f64.powi(-(shift as i32));
        Scaled { mantissa: m, exponent: big.exponent }.normalized()
    }
}

impl Neg for Scaled {
    type Output = Scaled;
    fn neg(self) -> Scaled {
        Scaled { mantissa: -self.mantissa, ..self }
    }
}

impl Sub for Scaled {
    type Output = Scaled;
    fn sub(self, rhs: Scaled) -> Scaled {
        self + (-rhs)
    }
}

/// U_n(x) by the three-term recurrence, U_{−1} = 0. Plain doubles.
pub fn chebyshev_u(n: i64, x: f64) -> f64 {
    if n < 0 {
        return 0.0;
    }
    let (mut prev, mut cur) = (0.0, 1.0);
    for _ in 0..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// U_n(x) with the pair (U_{k−1}, U_k) rescaled each step by a common power of two.
pub fn chebyshev_u_scaled(n: i64, x: f64) -> Scaled {
    if n < 0 {
        return Scaled::ZERO;
    }
    let (mut prev, mut cur, mut exponent) = (0.0f64, 1.0f64, 0i64);
    for _ in 0..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
        let big = cur.abs().max(prev.abs());
        if big > 2f64.powi(256) || (big < 2f64.powi(-256) && big > 0.0) {
            let (_, e) = frexp(big);
            let s = 2f64.powi(-(e as i32));
            cur *= s;
            prev *= s;
            exponent += e;
        }
    }
    Scaled { mantissa: cur, exponent }.normalized()
}

/// U_{n−1}(x)/U_n(x) via the continued fraction R_k = 1/(2x − R_{k−1}), R_0 = 0.
/// Equals ±∞ when x is a zero of U_n.
pub fn chebyshev_ratio(n: usize, x: f64) -> f64 {
    let mut r = 0.0;
    for _ in 0..n {
        r = 1.0 / (2.0 * x - r);
    }
    r
}

/// Zeros cos(kπ/(n+1)), k = 1 … n, in decreasing order.
pub fn chebyshev_u_zeros(n: usize) -> Vec<f64> {
    (1..=n).map(|k| (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos()).collect()
}
