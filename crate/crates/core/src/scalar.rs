//! Forward-mode dual numbers over a small scalar trait.
//!
//! Model geometry (constraints, retractions, metrics, fundamental fields,
//! connection forms) is written generically over [`Scalar`] so that exact
//! directional derivatives are available wherever the gradient assembly or
//! the constrained integrator needs them.  Only first-order duals are used;
//! second derivatives are taken by differencing analytic first derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    /// Value part (drops derivative information).
    fn value(self) -> f64;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn atan2(self, other: Self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn value(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn atan2(self, other: Self) -> Self {
        f64::atan2(self, other)
    }
}

/// `v + d·ε` with `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub fn new(v: f64, d: f64) -> Self {
        Self { v, d }
    }
    pub fn constant(v: f64) -> Self {
        Self { v, d: 0.0 }
    }
    /// Seed for differentiation along one input.
    pub fn seed(v: f64) -> Self {
        Self { v, d: 1.0 }
    }
}

impl Add for Dual {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Dual {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Dual {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.v * o.v, self.v * o.d + self.d * o.v)
    }
}

impl Div for Dual {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        Self::new(self.v / o.v, (self.d * o.v - self.v * o.d) / (o.v * o.v))
    }
}

impl Neg for Dual {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.v, -self.d)
    }
}

impl PartialOrd for Dual {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.v.partial_cmp(&other.v)
    }
}

impl Scalar for Dual {
    fn from_f64(x: f64) -> Self {
        Self::constant(x)
    }
    fn value(self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        Self::new(r, self.d / (2.0 * r))
    }
    fn sin(self) -> Self {
        Self::new(self.v.sin(), self.d * self.v.cos())
    }
    fn cos(self) -> Self {
        Self::new(self.v.cos(), -self.d * self.v.sin())
    }
    fn atan2(self, other: Self) -> Self {
        let den = self.v * self.v + other.v * other.v;
        Self::new(
            self.v.atan2(other.v),
            (self.d * other.v - self.v * other.d) / den,
        )
    }
}

/// Dot product over any scalar.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = S::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc + *x * *y;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dual_chain_rule() {
        // f(x) = sin(x) * sqrt(x) + x/(1+x), f'(2) by dual vs closed form
        let f = |x: Dual| x.sin() * x.sqrt() + x / (Dual::constant(1.0) + x);
        let x = 2.0_f64;
        let out = f(Dual::seed(x));
        let expect = x.cos() * x.sqrt() + x.sin() / (2.0 * x.sqrt()) + 1.0 / (1.0 + x).powi(2);
        assert_relative_eq!(out.d, expect, max_relative = 1e-14);
    }

    #[test]
    fn dual_atan2() {
        let y = 0.7_f64;
        let x = -1.3_f64;
        // derivative along y
        let out = Dual::seed(y).atan2(Dual::constant(x));
        assert_relative_eq!(out.d, x / (x * x + y * y), max_relative = 1e-14);
    }
}
